//! Brute-force ground truth: grid conjugates, grid proxes, grid envelopes,
//! and 1-D resolvents by bisection.
//!
//! Nothing here calls the closed forms it is meant to check. Grids are
//! limited to one or two axes since the cost is `points^dim`.

use crate::convex::ConvexFnSpec;
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::monotone::MonotoneOpSpec;
use crate::serde_util::{param, pinned_dim};

pub const DEFAULT_POINTS: usize = 2001;

/// A regular grid on a box in `R` or `R²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    points: usize,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: usize) -> Result<Self> {
        let d = lower.len();
        if d == 0 || d > 2 || upper.len() != d {
            return Err(Error::Grid(format!("grid dims must be 1 or 2 (got {d})")));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u)) {
            return Err(Error::Grid("need finite lower < upper on every axis".into()));
        }
        if points < 3 || points.is_multiple_of(2) {
            return Err(Error::Grid(format!("points per axis must be odd and ≥ 3 (got {points})")));
        }
        Ok(GridSpec { lower, upper, points })
    }

    /// `[-half_width, half_width]^dim`.
    pub fn symmetric(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        GridSpec::new(vec![-half_width; dim], vec![half_width; dim], points)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.points - 1) as f64
    }

    /// Largest step over the axes.
    pub fn max_step(&self) -> f64 {
        (0..self.dim()).map(|a| self.step(a)).fold(0.0, f64::max)
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        if i == self.points - 1 {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * self.step(axis)
        }
    }

    /// Visits grid nodes in lexicographic index order.
    fn scan(&self, mut visit: impl FnMut(&Point, bool)) {
        let n = self.points;
        let edge = |i: usize| i == 0 || i == n - 1;
        match self.dim() {
            1 => {
                for i in 0..n {
                    visit(&Point::from([self.coord(0, i)]), edge(i));
                }
            }
            _ => {
                for i in 0..n {
                    let a = self.coord(0, i);
                    for j in 0..n {
                        visit(&Point::from([a, self.coord(1, j)]), edge(i) || edge(j));
                    }
                }
            }
        }
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "grid oracle argument",
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }
}

/// Best grid value, where it was found, and whether that node is on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GridExtremum {
    pub value: f64,
    pub at: Point,
    pub at_boundary: bool,
}

/// Minimizes `objective` over the grid; ties keep the smallest lexicographic index.
fn grid_min(g: &GridSpec, objective: impl Fn(&Point) -> f64) -> Result<GridExtremum> {
    let mut best: Option<GridExtremum> = None;
    g.scan(|y, edge| {
        let v = objective(y);
        if !v.is_finite() {
            return;
        }
        if best.as_ref().is_none_or(|b| v < b.value) {
            best = Some(GridExtremum {
                value: v,
                at: y.clone(),
                at_boundary: edge,
            });
        }
    });
    best.ok_or_else(|| Error::Grid("function is +∞ at every grid node".into()))
}

/// `max_x ⟨x, x*⟩ − f(x)` over the grid. A maximizer on the boundary is
/// flagged: the true supremum may be larger or infinite.
pub fn grid_conjugate(f: impl Fn(&Point) -> f64, g: &GridSpec, xs: &Point) -> Result<GridExtremum> {
    g.check_point(xs)?;
    let m = grid_min(g, |y| f(y) - y.dot(xs))?;
    Ok(GridExtremum {
        value: -m.value,
        ..m
    })
}

/// `argmin_y f(y) + ‖x − y‖²/2` over the grid.
pub fn grid_prox(f: impl Fn(&Point) -> f64, g: &GridSpec, x: &Point) -> Result<Point> {
    g.check_point(x)?;
    Ok(grid_min(g, |y| f(y) + 0.5 * x.dist(y).powi(2))?.at)
}

/// `min_y f(y) + ‖x − y‖²/2` over the grid.
pub fn grid_envelope(f: impl Fn(&Point) -> f64, g: &GridSpec, x: &Point) -> Result<f64> {
    g.check_point(x)?;
    Ok(grid_min(g, |y| f(y) + 0.5 * x.dist(y).powi(2))?.value)
}

const BISECT_TOL: f64 = 1e-10;
/// Grid nodes within this distance of a set count as members.
const NODE_SLACK: f64 = 1e-9;

/// Solves `x ∈ y + γA(y)` for a 1-D operator by bisection.
///
/// `y ↦ y + γA(y)` is increasing, so the solution is bracketed by any pair
/// of points where the graph lies below and above `x`. Normal cones are
/// handled through their set-valued intervals at the endpoints.
pub fn bisect_resolvent_1d(a: &MonotoneOpSpec, gamma: f64, x: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("bisection needs γ > 0, got {gamma}")));
    }
    if a.dim().is_some_and(|d| d != 1) {
        return Err(Error::Unsupported("bisection oracle is 1-D only".into()));
    }
    match a {
        MonotoneOpSpec::ScaledBy { gamma: s, of } => bisect_resolvent_1d(of, gamma * s, x),
        // x ∈ y + γB⁻¹(y) with y = x − γw  ⇔  x/γ ∈ w + γ⁻¹B(w)
        MonotoneOpSpec::Inverse { of } => {
            let w = bisect_resolvent_1d(of, 1.0 / gamma, x / gamma)?;
            Ok(x - gamma * w)
        }
        MonotoneOpSpec::SubdiffOf { f } => bisect_resolvent_1d(&f.subdifferential(1), gamma, x),
        _ => bisect_interval(|y| value_interval(a, y), gamma, x),
    }
}

/// `A(y)` as a closed interval; outside the domain the graph is continued
/// by `(−∞, −∞)` on the left and `(+∞, +∞)` on the right.
fn value_interval(a: &MonotoneOpSpec, y: f64) -> Result<(f64, f64)> {
    use MonotoneOpSpec::*;
    let cone = |l: f64, u: f64| {
        if y < l {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        } else if y > u {
            (f64::INFINITY, f64::INFINITY)
        } else {
            let lo = if y == l { f64::NEG_INFINITY } else { 0.0 };
            let hi = if y == u { f64::INFINITY } else { 0.0 };
            (lo, hi)
        }
    };
    Ok(match a {
        Zero => (0.0, 0.0),
        ScaledIdentity { alpha } => (alpha * y, alpha * y),
        NormalConeBox { lower, upper } => cone(param(lower, 0), param(upper, 0)),
        NormalConeBall { center, radius } => cone(center[0] - radius, center[0] + radius),
        SubdiffSupportInterval { lower, upper } => {
            let (d, r) = (param(lower, 0), param(upper, 0));
            if y > 0.0 {
                (r, r)
            } else if y < 0.0 {
                (d, d)
            } else {
                (d, r)
            }
        }
        AffineMonotone { matrix, offset } if matrix.rows() == 1 => {
            let v = matrix.get(0, 0) * y + offset[0];
            (v, v)
        }
        other => {
            return Err(Error::Unsupported(format!(
                "no 1-D interval oracle for {other:?}"
            )))
        }
    })
}

fn bisect_interval(
    interval: impl Fn(f64) -> Result<(f64, f64)>,
    gamma: f64,
    x: f64,
) -> Result<f64> {
    // Ordering of y relative to the solution: Less = too small, Greater = too big.
    let classify = |y: f64| -> Result<std::cmp::Ordering> {
        let (lo, hi) = interval(y)?;
        Ok(if y + gamma * lo > x {
            std::cmp::Ordering::Greater
        } else if y + gamma * hi < x {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Equal
        })
    };
    let mut width = 10.0 * (1.0 + x.abs());
    let (mut lo, mut hi) = (x - width, x + width);
    for _ in 0..60 {
        let (cl, ch) = (classify(lo)?, classify(hi)?);
        if cl == std::cmp::Ordering::Equal {
            return Ok(lo);
        }
        if ch == std::cmp::Ordering::Equal {
            return Ok(hi);
        }
        if cl == std::cmp::Ordering::Less && ch == std::cmp::Ordering::Greater {
            break;
        }
        width *= 2.0;
        lo = x - width;
        hi = x + width;
    }
    for _ in 0..400 {
        if hi - lo <= BISECT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match classify(mid)? {
            std::cmp::Ordering::Equal => return Ok(mid),
            std::cmp::Ordering::Less => lo = mid,
            std::cmp::Ordering::Greater => hi = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Grid-evaluable value of a 1-D or 2-D catalog function.
///
/// Values come from the direct formula of each entry rather than from
/// [`ConvexFnSpec::value`], so the oracle does not lean on the code under
/// test. Conjugate entries are themselves grid-conjugated on `inner`.
pub fn oracle_value<'a>(f: &'a ConvexFnSpec, inner: &GridSpec) -> impl Fn(&Point) -> f64 + 'a {
    let inner = inner.clone();
    move |y: &Point| direct_value(f, &inner, y)
}

fn direct_value(f: &ConvexFnSpec, inner: &GridSpec, y: &Point) -> f64 {
    use ConvexFnSpec::*;
    let n = y.dim();
    match f {
        Quadratic { alpha, center } => {
            0.5 * alpha * (0..n).map(|k| (y[k] - center[k]).powi(2)).sum::<f64>()
        }
        QuadraticKernel => 0.5 * (0..n).map(|k| y[k] * y[k]).sum::<f64>(),
        AbsSum { weights } => (0..n).map(|k| param(weights, k) * y[k].abs()).sum(),
        IndicatorBox { lower, upper } => {
            if (0..n).all(|k| param(lower, k) - NODE_SLACK <= y[k] && y[k] <= param(upper, k) + NODE_SLACK) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        IndicatorBall { center, radius } => {
            let d: f64 = (0..n).map(|k| (y[k] - center[k]).powi(2)).sum::<f64>().sqrt();
            if d <= radius + NODE_SLACK {
                0.0
            } else {
                f64::INFINITY
            }
        }
        SupportInterval { lower, upper } => (0..n)
            .map(|k| {
                let v = y[k];
                (param(upper, k) * v).max(param(lower, k) * v).max(0.0 * v)
            })
            .sum(),
        Linear { a, beta } => (0..n).map(|k| a[k] * y[k]).sum::<f64>() + beta,
        Conjugate { of } => grid_conjugate(|z| direct_value(of, inner, z), inner, y)
            .map(|m| m.value)
            .unwrap_or(f64::INFINITY),
    }
}

/// Whether the oracle can represent `f` on a grid of dimension `dim`.
pub fn supports(f: &ConvexFnSpec, dim: usize) -> bool {
    let d = match f {
        ConvexFnSpec::AbsSum { weights } => pinned_dim(weights),
        other => other.dim(),
    };
    d.is_none_or(|d| d == dim) && (1..=2).contains(&dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> GridSpec {
        GridSpec::symmetric(1, 10.0, DEFAULT_POINTS).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::symmetric(3, 1.0, 11).is_err());
        assert!(GridSpec::symmetric(1, 1.0, 10).is_err());
        assert!(GridSpec::symmetric(1, 1.0, 1).is_err());
        assert!(GridSpec::new(vec![1.0], vec![1.0], 11).is_err());
        assert_abs_diff_eq!(grid().step(0), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn conjugate_examples() {
        let g = grid();
        let q = |y: &Point| 0.5 * y.norm_sq();
        let m = grid_conjugate(q, &g, &Point::from([3.0])).unwrap();
        assert_abs_diff_eq!(m.value, 4.5, epsilon = 1e-4);
        assert!(!m.at_boundary);

        let abs = |y: &Point| y[0].abs();
        let m = grid_conjugate(abs, &g, &Point::from([0.5])).unwrap();
        assert_abs_diff_eq!(m.value, 0.0, epsilon = 1e-12);
        assert!(!m.at_boundary);
        assert!(grid_conjugate(abs, &g, &Point::from([2.0])).unwrap().at_boundary);

        let never = |_: &Point| f64::INFINITY;
        assert!(grid_conjugate(never, &g, &Point::from([0.0])).is_err());
    }

    #[test]
    fn prox_examples() {
        let g = grid();
        let p = grid_prox(|y: &Point| y[0].abs(), &g, &Point::from([3.0])).unwrap();
        assert_abs_diff_eq!(p[0], 2.0, epsilon = 0.01);
        let ind = |y: &Point| if (0.0..=1.0).contains(&y[0]) { 0.0 } else { f64::INFINITY };
        assert_abs_diff_eq!(grid_prox(ind, &g, &Point::from([-5.0])).unwrap()[0], 0.0, epsilon = 1e-12);
        let q = |y: &Point| 0.5 * y.norm_sq();
        assert_abs_diff_eq!(grid_prox(q, &g, &Point::from([4.0])).unwrap()[0], 2.0, epsilon = 0.01);
    }

    #[test]
    fn bisection_examples() {
        use MonotoneOpSpec::*;
        assert_abs_diff_eq!(
            bisect_resolvent_1d(&ScaledIdentity { alpha: 1.0 }, 1.0, 4.0).unwrap(),
            2.0,
            epsilon = 1e-10
        );
        let s = MonotoneOpSpec::support_interval(-1.0, 1.0);
        assert_abs_diff_eq!(bisect_resolvent_1d(&s, 1.0, 3.0).unwrap(), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(bisect_resolvent_1d(&Zero, 1.0, -7.5).unwrap(), -7.5, epsilon = 1e-10);
        let far = MonotoneOpSpec::normal_cone_box(100.0, 200.0);
        assert_abs_diff_eq!(bisect_resolvent_1d(&far, 1.0, 0.0).unwrap(), 100.0, epsilon = 1e-9);
        assert!(bisect_resolvent_1d(&Rotation90, 1.0, 0.0).is_err());
    }

    #[test]
    fn bisection_through_wrappers() {
        use MonotoneOpSpec::*;
        let a = ScaledIdentity { alpha: 1.0 }.inverse().scaled(2.0);
        // 2·Id⁻¹ = 2 Id, J(3) = 1
        assert_abs_diff_eq!(bisect_resolvent_1d(&a, 1.0, 3.0).unwrap(), 1.0, epsilon = 1e-9);
        let b = MonotoneOpSpec::subdiff(ConvexFnSpec::conjugate_of(ConvexFnSpec::abs_sum(1.0)));
        // ∂ι_[−1,1]: projection
        assert_abs_diff_eq!(bisect_resolvent_1d(&b, 1.0, 3.0).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn two_dimensional_grid() {
        let g = GridSpec::symmetric(2, 3.0, 61).unwrap();
        let p = grid_prox(|y: &Point| 0.5 * y.norm_sq(), &g, &Point::from([2.0, -1.0])).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 0.1);
        assert_abs_diff_eq!(p[1], -0.5, epsilon = 0.1);
        assert!(grid_prox(|y: &Point| y[0], &g, &Point::from([1.0])).is_err());
    }
}
