//! Catalog of proper lsc convex functions with closed-form value, proximity
//! operator, conjugate, and Moreau envelope.
//!
//! Conjugation is symbolic: [`ConvexFnSpec::conjugate`] rewrites a spec into
//! the catalog entry of its conjugate when one exists, and otherwise wraps it
//! in [`ConvexFnSpec::Conjugate`], whose value and prox are still closed-form.
//! Every entry is in Γ₀, so `f** = f` and a double wrapper collapses.
//!
//! Coordinate-wise parameter vectors (`weights`, `lower`, `upper`) of length
//! one broadcast to any dimension.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{LinOp, Point};
use crate::monotone::{FirmlyNonexpansive, MonotoneOpSpec};
use crate::serde_util::{bounds, param, pinned_dim};

/// Slack for indicator membership; projections land on the boundary only up to rounding.
const MEMBER_TOL: f64 = 1e-10;

fn within(v: f64, lo: f64, hi: f64) -> bool {
    v >= lo - MEMBER_TOL * (1.0 + lo.abs().min(1e300))
        && v <= hi + MEMBER_TOL * (1.0 + hi.abs().min(1e300))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConvexFnSpec {
    /// `α‖x − c‖²/2`
    Quadratic { alpha: f64, center: Vec<f64> },
    /// `‖x‖²/2`
    QuadraticKernel,
    /// `Σ λ_k |x_k|`
    AbsSum { weights: Vec<f64> },
    IndicatorBox {
        #[serde(with = "bounds")]
        lower: Vec<f64>,
        #[serde(with = "bounds")]
        upper: Vec<f64>,
    },
    IndicatorBall { center: Vec<f64>, radius: f64 },
    /// Support function of the box `Π [δ_k, ρ_k]` with `δ_k ≤ 0 ≤ ρ_k`.
    SupportInterval {
        #[serde(with = "bounds")]
        lower: Vec<f64>,
        #[serde(with = "bounds")]
        upper: Vec<f64>,
    },
    /// `⟨a, x⟩ + β`
    Linear { a: Vec<f64>, beta: f64 },
    Conjugate { of: Box<ConvexFnSpec> },
}

fn combined_dim(vs: &[&[f64]]) -> Result<Option<usize>> {
    let mut dim = None;
    for v in vs {
        if v.is_empty() {
            return Err(Error::InvalidParameter("empty parameter vector".into()));
        }
        if let Some(d) = pinned_dim(v) {
            match dim {
                None => dim = Some(d),
                Some(prev) if prev != d => {
                    return Err(Error::InvalidParameter(format!(
                        "parameter vectors of lengths {prev} and {d}"
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(dim)
}

fn support_1d(t: f64, lo: f64, hi: f64) -> f64 {
    if t > 0.0 {
        hi * t
    } else if t < 0.0 {
        lo * t
    } else {
        0.0
    }
}

impl ConvexFnSpec {
    pub fn abs_sum(lambda: f64) -> Self {
        ConvexFnSpec::AbsSum {
            weights: vec![lambda],
        }
    }

    pub fn indicator_box(lower: f64, upper: f64) -> Self {
        ConvexFnSpec::IndicatorBox {
            lower: vec![lower],
            upper: vec![upper],
        }
    }

    pub fn support_interval(lower: f64, upper: f64) -> Self {
        ConvexFnSpec::SupportInterval {
            lower: vec![lower],
            upper: vec![upper],
        }
    }

    pub fn conjugate_of(f: ConvexFnSpec) -> Self {
        ConvexFnSpec::Conjugate { of: Box::new(f) }
    }

    /// Dimension fixed by the parameters; `None` when the function is defined on every `R^n`.
    pub fn dim(&self) -> Option<usize> {
        use ConvexFnSpec::*;
        match self {
            Quadratic { center, .. } => Some(center.len()),
            QuadraticKernel => None,
            AbsSum { weights } => pinned_dim(weights),
            IndicatorBox { lower, upper } | SupportInterval { lower, upper } => {
                combined_dim(&[lower, upper]).ok().flatten()
            }
            IndicatorBall { center, .. } => Some(center.len()),
            Linear { a, .. } => Some(a.len()),
            Conjugate { of } => of.dim(),
        }
    }

    /// Checks the parameter ranges that make the entry a member of Γ₀.
    pub fn validate(&self) -> Result<()> {
        use ConvexFnSpec::*;
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match self {
            Quadratic { alpha, center } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return bad("quadratic needs alpha > 0");
                }
                if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
                    return bad("quadratic center must be finite and nonempty");
                }
            }
            QuadraticKernel => {}
            AbsSum { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return bad("abs_sum weights must be finite and ≥ 0");
                }
            }
            IndicatorBox { lower, upper } => {
                let d = combined_dim(&[lower, upper])?.unwrap_or(1);
                for k in 0..d {
                    let (l, u) = (param(lower, k), param(upper, k));
                    if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                        return bad("indicator_box needs lower ≤ upper with a nonempty box");
                    }
                }
            }
            SupportInterval { lower, upper } => {
                let d = combined_dim(&[lower, upper])?.unwrap_or(1);
                for k in 0..d {
                    let (l, u) = (param(lower, k), param(upper, k));
                    if !(l <= 0.0 && 0.0 <= u) {
                        return bad("support_interval needs lower ≤ 0 ≤ upper");
                    }
                }
            }
            IndicatorBall { center, radius } => {
                if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
                    return bad("ball center must be finite and nonempty");
                }
                if !(radius.is_finite() && *radius >= 0.0) {
                    return bad("ball radius must be finite and ≥ 0");
                }
            }
            Linear { a, beta } => {
                if a.is_empty() || a.iter().any(|c| !c.is_finite()) || !beta.is_finite() {
                    return bad("linear coefficients must be finite");
                }
            }
            Conjugate { of } => of.validate()?,
        }
        Ok(())
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if let Some(d) = self.dim() {
            check_dim("convex function argument", d, x.dim())?;
        }
        Ok(())
    }

    /// Symbolic conjugate, simplified to a plain catalog entry when possible.
    pub fn conjugate(&self) -> ConvexFnSpec {
        use ConvexFnSpec::*;
        match self {
            Quadratic { alpha, center } if center.iter().all(|c| *c == 0.0) => Quadratic {
                alpha: 1.0 / alpha,
                center: center.clone(),
            },
            QuadraticKernel => QuadraticKernel,
            AbsSum { weights } => IndicatorBox {
                lower: weights.iter().map(|w| -w).collect(),
                upper: weights.clone(),
            },
            IndicatorBox { lower, upper }
                if lower.iter().all(|l| *l <= 0.0) && upper.iter().all(|u| *u >= 0.0) =>
            {
                SupportInterval {
                    lower: lower.clone(),
                    upper: upper.clone(),
                }
            }
            SupportInterval { lower, upper } => IndicatorBox {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            Conjugate { of } => (**of).clone(),
            other => Conjugate {
                of: Box::new(other.clone()),
            },
        }
    }

    /// `f(x)`, possibly `+∞`.
    pub fn value(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &Point) -> f64 {
        use ConvexFnSpec::*;
        match self {
            Quadratic { alpha, center } => {
                0.5 * alpha * x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>()
            }
            QuadraticKernel => 0.5 * x.norm_sq(),
            AbsSum { weights } => x
                .iter()
                .enumerate()
                .map(|(k, v)| param(weights, k) * v.abs())
                .sum(),
            IndicatorBox { lower, upper } => {
                let inside = x
                    .iter()
                    .enumerate()
                    .all(|(k, v)| within(*v, param(lower, k), param(upper, k)));
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            IndicatorBall { center, radius } => {
                let d = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if within(d, 0.0, *radius) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            SupportInterval { lower, upper } => x
                .iter()
                .enumerate()
                .map(|(k, v)| support_1d(*v, param(lower, k), param(upper, k)))
                .sum(),
            Linear { a, beta } => x.iter().zip(a).map(|(u, v)| u * v).sum::<f64>() + beta,
            Conjugate { of } => of.conjugate_value_unchecked(x),
        }
    }

    /// `f*(x*) = sup_x ⟨x, x*⟩ − f(x)`, in closed form.
    pub fn conjugate_value(&self, xs: &Point) -> Result<f64> {
        self.check_point(xs)?;
        Ok(self.conjugate_value_unchecked(xs))
    }

    fn conjugate_value_unchecked(&self, u: &Point) -> f64 {
        use ConvexFnSpec::*;
        match self {
            Quadratic { alpha, center } => {
                u.iter().zip(center).map(|(a, c)| a * c).sum::<f64>() + u.norm_sq() / (2.0 * alpha)
            }
            QuadraticKernel => 0.5 * u.norm_sq(),
            AbsSum { weights } => {
                let inside = u.iter().enumerate().all(|(k, v)| {
                    let w = param(weights, k);
                    within(*v, -w, w)
                });
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            IndicatorBox { lower, upper } => u
                .iter()
                .enumerate()
                .map(|(k, v)| support_1d(*v, param(lower, k), param(upper, k)))
                .sum(),
            IndicatorBall { center, radius } => {
                u.iter().zip(center).map(|(a, c)| a * c).sum::<f64>() + radius * u.norm()
            }
            SupportInterval { lower, upper } => {
                let inside = u
                    .iter()
                    .enumerate()
                    .all(|(k, v)| within(*v, param(lower, k), param(upper, k)));
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Linear { a, beta } => {
                let scale = 1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let hit = u
                    .iter()
                    .zip(a)
                    .all(|(v, w)| (v - w).abs() <= MEMBER_TOL * scale);
                if hit {
                    -beta
                } else {
                    f64::INFINITY
                }
            }
            Conjugate { of } => of.value_unchecked(u),
        }
    }

    /// `prox_{γf}(x)`, the minimizer of `f(y) + ‖x − y‖²/(2γ)`.
    pub fn prox(&self, gamma: f64, x: &Point) -> Result<Point> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("prox needs γ > 0, got {gamma}")));
        }
        self.check_point(x)?;
        Ok(self.prox_unchecked(gamma, x))
    }

    pub(crate) fn prox_unchecked(&self, g: f64, x: &Point) -> Point {
        use ConvexFnSpec::*;
        match self {
            Quadratic { alpha, center } => Point::from_fn(x.dim(), |k| {
                (x[k] + g * alpha * center[k]) / (1.0 + g * alpha)
            }),
            QuadraticKernel => x.scale(1.0 / (1.0 + g)),
            AbsSum { weights } => Point::from_fn(x.dim(), |k| {
                let t = g * param(weights, k);
                let v = x[k];
                if v > t {
                    v - t
                } else if v < -t {
                    v + t
                } else {
                    0.0
                }
            }),
            IndicatorBox { lower, upper } => {
                Point::from_fn(x.dim(), |k| x[k].max(param(lower, k)).min(param(upper, k)))
            }
            IndicatorBall { center, radius } => {
                let c = Point::from(center.clone());
                let d = x.sub(&c);
                let n = d.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    let mut p = c;
                    p.axpy(radius / n, &d);
                    p
                }
            }
            SupportInterval { lower, upper } => Point::from_fn(x.dim(), |k| {
                let v = x[k];
                v - v.max(g * param(lower, k)).min(g * param(upper, k))
            }),
            Linear { a, .. } => Point::from_fn(x.dim(), |k| x[k] - g * a[k]),
            Conjugate { of } => of.conjugate_prox(g, x),
        }
    }

    /// `prox_{γf*}(x)` in closed form for each catalog entry.
    fn conjugate_prox(&self, g: f64, x: &Point) -> Point {
        use ConvexFnSpec::*;
        match self {
            // f*(u) = ⟨u, c⟩ + ‖u‖²/(2α)
            Quadratic { alpha, center } => {
                Point::from_fn(x.dim(), |k| alpha * (x[k] - g * center[k]) / (alpha + g))
            }
            QuadraticKernel => x.scale(1.0 / (1.0 + g)),
            AbsSum { weights } => Point::from_fn(x.dim(), |k| {
                let w = param(weights, k);
                x[k].clamp(-w, w)
            }),
            // support function of the box: x − proj_{γ·box}(x)
            IndicatorBox { lower, upper } => Point::from_fn(x.dim(), |k| {
                x[k] - x[k].max(g * param(lower, k)).min(g * param(upper, k))
            }),
            // ⟨u, c⟩ + r‖u‖: block soft-threshold of x − γc
            IndicatorBall { center, radius } => {
                let v = Point::from_fn(x.dim(), |k| x[k] - g * center[k]);
                let n = v.norm();
                let t = g * radius;
                if n <= t {
                    Point::zeros(x.dim())
                } else {
                    v.scale(1.0 - t / n)
                }
            }
            SupportInterval { lower, upper } => {
                Point::from_fn(x.dim(), |k| x[k].max(param(lower, k)).min(param(upper, k)))
            }
            Linear { a, .. } => Point::from(a.clone()),
            Conjugate { of } => of.prox_unchecked(g, x),
        }
    }

    /// Moreau envelope `(f □ Q)(x) = f(p) + ‖x − p‖²/2` with `p = prox_f(x)`.
    pub fn envelope(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.envelope_unchecked(x))
    }

    pub(crate) fn envelope_unchecked(&self, x: &Point) -> f64 {
        let p = self.prox_unchecked(1.0, x);
        self.value_unchecked(&p) + 0.5 * x.dist(&p).powi(2)
    }

    /// The subdifferential `∂f` written as a native monotone catalog entry.
    ///
    /// Kept separate from [`ConvexFnSpec::prox`]: resolvents of the result
    /// run through the monotone catalog's own formulas, so prox/resolvent
    /// agreement is a genuine cross-check.
    pub fn subdifferential(&self, dim_hint: usize) -> MonotoneOpSpec {
        use ConvexFnSpec::*;
        let n = self.dim().unwrap_or(dim_hint);
        match self {
            Quadratic { alpha, center } => MonotoneOpSpec::AffineMonotone {
                matrix: LinOp::identity(n).scaled(*alpha),
                offset: center.iter().map(|c| -alpha * c).collect(),
            },
            QuadraticKernel => MonotoneOpSpec::ScaledIdentity { alpha: 1.0 },
            AbsSum { weights } => MonotoneOpSpec::SubdiffSupportInterval {
                lower: weights.iter().map(|w| -w).collect(),
                upper: weights.clone(),
            },
            IndicatorBox { lower, upper } => MonotoneOpSpec::NormalConeBox {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            IndicatorBall { center, radius } => MonotoneOpSpec::NormalConeBall {
                center: center.clone(),
                radius: *radius,
            },
            SupportInterval { lower, upper } => MonotoneOpSpec::SubdiffSupportInterval {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            Linear { a, .. } => MonotoneOpSpec::AffineMonotone {
                matrix: LinOp::zeros(n, n),
                offset: a.clone(),
            },
            Conjugate { of } => MonotoneOpSpec::Inverse {
                of: Box::new(of.subdifferential(dim_hint)),
            },
        }
    }

    /// Projection-type entries double as firmly nonexpansive maps.
    pub fn as_projection(&self) -> Option<FirmlyNonexpansive> {
        match self {
            ConvexFnSpec::IndicatorBox { lower, upper } => Some(FirmlyNonexpansive::ProjectBox {
                lower: lower.clone(),
                upper: upper.clone(),
            }),
            ConvexFnSpec::IndicatorBall { center, radius } => {
                Some(FirmlyNonexpansive::ProjectBall {
                    center: center.clone(),
                    radius: *radius,
                })
            }
            _ => None,
        }
    }
}
