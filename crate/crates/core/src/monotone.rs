//! Catalog of maximally monotone operators with closed-form resolvents.
//!
//! Only resolvents `J_{γA} = (Id + γA)⁻¹` and Yosida approximations
//! `(Id − J_{γA})/γ` are exposed; `A` itself is never evaluated as a set.

use serde::{Deserialize, Serialize};

use crate::convex::ConvexFnSpec;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{lu_solve, min_sym_eigenvalue, LinOp, Point, Subspace};
use crate::serde_util::{bounds, param, pinned_dim};

/// Eigenvalue floor used to accept `M + Mᵀ ⪰ 0`.
pub const PSD_TOL: f64 = -1e-10;

/// Firmly nonexpansive maps `T` usable inside a Wiener residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FirmlyNonexpansive {
    Identity,
    ProjectBox {
        #[serde(with = "bounds")]
        lower: Vec<f64>,
        #[serde(with = "bounds")]
        upper: Vec<f64>,
    },
    ProjectBall { center: Vec<f64>, radius: f64 },
    /// `T x = M x`; accepted only if `M + Mᵀ − 2MᵀM ⪰ 0`.
    Linear { matrix: LinOp },
}

impl FirmlyNonexpansive {
    /// Clipping onto `[-c, c]` in every coordinate.
    pub fn clip(c: f64) -> Self {
        FirmlyNonexpansive::ProjectBox {
            lower: vec![-c],
            upper: vec![c],
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            FirmlyNonexpansive::Identity => None,
            FirmlyNonexpansive::ProjectBox { lower, upper } => {
                pinned_dim(lower).or_else(|| pinned_dim(upper))
            }
            FirmlyNonexpansive::ProjectBall { center, .. } => Some(center.len()),
            FirmlyNonexpansive::Linear { matrix } => Some(matrix.rows()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FirmlyNonexpansive::Identity => Ok(()),
            FirmlyNonexpansive::ProjectBox { lower, upper } => ConvexFnSpec::IndicatorBox {
                lower: lower.clone(),
                upper: upper.clone(),
            }
            .validate(),
            FirmlyNonexpansive::ProjectBall { center, radius } => ConvexFnSpec::IndicatorBall {
                center: center.clone(),
                radius: *radius,
            }
            .validate(),
            FirmlyNonexpansive::Linear { matrix } => {
                if matrix.rows() != matrix.cols() {
                    return Err(Error::InvalidParameter("linear T must be square".into()));
                }
                // ⟨x, Mx⟩ ≥ ‖Mx‖²  ⇔  (M + Mᵀ)/2 − MᵀM ⪰ 0
                let m = matrix.to_dmatrix();
                let s = (&m + m.transpose()) * 0.5 - m.transpose() * &m;
                let min = s.symmetric_eigenvalues().min();
                if min < PSD_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "linear T is not firmly nonexpansive (min eigenvalue {min:e})"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, x: &Point) -> Point {
        match self {
            FirmlyNonexpansive::Identity => x.clone(),
            FirmlyNonexpansive::ProjectBox { lower, upper } => {
                Point::from_fn(x.dim(), |k| x[k].max(param(lower, k)).min(param(upper, k)))
            }
            FirmlyNonexpansive::ProjectBall { center, radius } => {
                project_ball(x, center, *radius)
            }
            FirmlyNonexpansive::Linear { matrix } => matrix.apply_unchecked(x),
        }
    }
}

fn project_ball(x: &Point, center: &[f64], radius: f64) -> Point {
    let d = Point::from_fn(x.dim(), |k| x[k] - center[k]);
    let n = d.norm();
    if n <= radius {
        return x.clone();
    }
    Point::from_fn(x.dim(), |k| center[k] + radius * d[k] / n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MonotoneOpSpec {
    Zero,
    /// `A = α Id`, `α ≥ 0`.
    ScaledIdentity { alpha: f64 },
    NormalConeBox {
        #[serde(with = "bounds")]
        lower: Vec<f64>,
        #[serde(with = "bounds")]
        upper: Vec<f64>,
    },
    NormalConeBall { center: Vec<f64>, radius: f64 },
    /// Normal cone of the affine set `translate + V`.
    NormalConeAffine {
        translate: Point,
        #[serde(with = "subspace_serde")]
        subspace: Subspace,
    },
    /// Subdifferential of the support function of `Π [δ_k, ρ_k]`, `δ_k ≤ 0 ≤ ρ_k`.
    SubdiffSupportInterval {
        #[serde(with = "bounds")]
        lower: Vec<f64>,
        #[serde(with = "bounds")]
        upper: Vec<f64>,
    },
    /// `A y = M y + b` with `M + Mᵀ ⪰ 0`.
    AffineMonotone { matrix: LinOp, offset: Vec<f64> },
    /// Rotation by +90° in `R²`.
    Rotation90,
    /// `A = (Id − T + r)⁻¹ − Id`; closed-form resolvent only at `γ = 1`.
    WienerResidual { t: FirmlyNonexpansive, offset: Vec<f64> },
    Inverse { of: Box<MonotoneOpSpec> },
    SubdiffOf { f: ConvexFnSpec },
    /// `γ·A`.
    ScaledBy { gamma: f64, of: Box<MonotoneOpSpec> },
}

mod subspace_serde {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::{Point, Subspace};

    pub fn serialize<S: Serializer>(v: &Subspace, s: S) -> Result<S::Ok, S::Error> {
        v.basis().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Subspace, D::Error> {
        let span = Vec::<Point>::deserialize(d)?;
        let n = span.first().map(Point::dim).ok_or_else(|| de::Error::custom("empty basis"))?;
        Subspace::new(n, &span).map_err(de::Error::custom)
    }
}

fn is_unit(gamma: f64) -> bool {
    (gamma - 1.0).abs() <= 4.0 * f64::EPSILON
}

impl MonotoneOpSpec {
    pub fn inverse(self) -> Self {
        MonotoneOpSpec::Inverse { of: Box::new(self) }
    }

    pub fn scaled(self, gamma: f64) -> Self {
        MonotoneOpSpec::ScaledBy {
            gamma,
            of: Box::new(self),
        }
    }

    pub fn subdiff(f: ConvexFnSpec) -> Self {
        MonotoneOpSpec::SubdiffOf { f }
    }

    pub fn normal_cone_box(lower: f64, upper: f64) -> Self {
        MonotoneOpSpec::NormalConeBox {
            lower: vec![lower],
            upper: vec![upper],
        }
    }

    pub fn support_interval(lower: f64, upper: f64) -> Self {
        MonotoneOpSpec::SubdiffSupportInterval {
            lower: vec![lower],
            upper: vec![upper],
        }
    }

    /// Dimension of the space the operator acts on, if fixed by its parameters.
    pub fn dim(&self) -> Option<usize> {
        use MonotoneOpSpec::*;
        match self {
            Zero | ScaledIdentity { .. } => None,
            NormalConeBox { lower, upper } | SubdiffSupportInterval { lower, upper } => {
                pinned_dim(lower).or_else(|| pinned_dim(upper))
            }
            NormalConeBall { center, .. } => Some(center.len()),
            NormalConeAffine { translate, .. } => Some(translate.dim()),
            AffineMonotone { matrix, .. } => Some(matrix.rows()),
            Rotation90 => Some(2),
            WienerResidual { t, offset } => pinned_dim(offset).or_else(|| t.dim()),
            Inverse { of } | ScaledBy { of, .. } => of.dim(),
            SubdiffOf { f } => f.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        use MonotoneOpSpec::*;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            Zero | Rotation90 => Ok(()),
            ScaledIdentity { alpha } => {
                if alpha.is_finite() && *alpha >= 0.0 {
                    Ok(())
                } else {
                    bad(format!("scaled_identity needs α ≥ 0, got {alpha}"))
                }
            }
            NormalConeBox { lower, upper } => ConvexFnSpec::IndicatorBox {
                lower: lower.clone(),
                upper: upper.clone(),
            }
            .validate(),
            NormalConeBall { center, radius } => ConvexFnSpec::IndicatorBall {
                center: center.clone(),
                radius: *radius,
            }
            .validate(),
            NormalConeAffine { translate, subspace } => {
                check_dim("affine set translate", subspace.ambient_dim(), translate.dim())
            }
            SubdiffSupportInterval { lower, upper } => ConvexFnSpec::SupportInterval {
                lower: lower.clone(),
                upper: upper.clone(),
            }
            .validate(),
            AffineMonotone { matrix, offset } => {
                if matrix.rows() != matrix.cols() {
                    return bad("affine_monotone matrix must be square".into());
                }
                check_dim("affine_monotone offset", matrix.rows(), offset.len())?;
                if offset.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("affine_monotone offset"));
                }
                let min = min_sym_eigenvalue(matrix);
                if min < PSD_TOL {
                    return bad(format!(
                        "affine_monotone matrix is not monotone (min eigenvalue of symmetric part {min:e})"
                    ));
                }
                Ok(())
            }
            WienerResidual { t, offset } => {
                t.validate()?;
                if offset.is_empty() || offset.iter().any(|v| !v.is_finite()) {
                    return bad("wiener offset must be finite and nonempty".into());
                }
                if let (Some(a), Some(b)) = (pinned_dim(offset), t.dim()) {
                    check_dim("wiener offset", b, a)?;
                }
                Ok(())
            }
            Inverse { of } => of.validate(),
            SubdiffOf { f } => f.validate(),
            ScaledBy { gamma, of } => {
                if !(gamma.is_finite() && *gamma > 0.0) {
                    return bad(format!("scaled_by needs γ > 0, got {gamma}"));
                }
                of.validate()
            }
        }
    }

    fn check_args(&self, gamma: f64, x: &Point) -> Result<()> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("resolvent needs γ > 0, got {gamma}")));
        }
        if let Some(d) = self.dim() {
            check_dim("monotone operator argument", d, x.dim())?;
        }
        Ok(())
    }

    /// `J_{γA}(x)`.
    pub fn resolvent(&self, gamma: f64, x: &Point) -> Result<Point> {
        self.check_args(gamma, x)?;
        self.resolvent_unchecked(gamma, x)
    }

    pub(crate) fn resolvent_unchecked(&self, g: f64, x: &Point) -> Result<Point> {
        use MonotoneOpSpec::*;
        let n = x.dim();
        Ok(match self {
            Zero => x.clone(),
            ScaledIdentity { alpha } => x.scale(1.0 / (1.0 + g * alpha)),
            NormalConeBox { lower, upper } => {
                Point::from_fn(n, |k| x[k].clamp(param(lower, k), param(upper, k)))
            }
            NormalConeBall { center, radius } => project_ball(x, center, *radius),
            NormalConeAffine { translate, subspace } => {
                let mut p = subspace.project_unchecked(&x.sub(translate));
                p.axpy(1.0, translate);
                p
            }
            SubdiffSupportInterval { lower, upper } => Point::from_fn(n, |k| {
                let (lo, hi) = (g * param(lower, k), g * param(upper, k));
                if x[k] > hi {
                    x[k] - hi
                } else if x[k] < lo {
                    x[k] - lo
                } else {
                    0.0
                }
            }),
            AffineMonotone { matrix, offset } => {
                // (I + γM) y = x − γb
                let rhs = Point::from_fn(n, |k| x[k] - g * offset[k]);
                lu_solve(&matrix.identity_plus(g), &rhs)?
            }
            Rotation90 => {
                // (I + γR)⁻¹ = [[1, γ], [−γ, 1]] / (1 + γ²)
                let d = 1.0 + g * g;
                Point::from([(x[0] + g * x[1]) / d, (x[1] - g * x[0]) / d])
            }
            WienerResidual { t, offset } => {
                if !is_unit(g) {
                    return Err(Error::Unsupported(format!(
                        "wiener residual resolvent is closed-form only at γ = 1 (got {g})"
                    )));
                }
                let tx = t.apply(x);
                Point::from_fn(n, |k| x[k] - tx[k] + param(offset, k))
            }
            Inverse { of } => resolvent_of_inverse_unchecked(of, g, x)?,
            SubdiffOf { f } => f.subdifferential(n).resolvent_unchecked(g, x)?,
            ScaledBy { gamma, of } => of.resolvent_unchecked(g * gamma, x)?,
        })
    }

    /// `J_{γA⁻¹}(x) = x − γ J_{γ⁻¹A}(x/γ)`.
    pub fn resolvent_of_inverse(&self, gamma: f64, x: &Point) -> Result<Point> {
        self.check_args(gamma, x)?;
        resolvent_of_inverse_unchecked(self, gamma, x)
    }

    /// Yosida approximation `(x − J_{γA}x)/γ`.
    pub fn yosida(&self, gamma: f64, x: &Point) -> Result<Point> {
        self.check_args(gamma, x)?;
        self.yosida_unchecked(gamma, x)
    }

    pub(crate) fn yosida_unchecked(&self, g: f64, x: &Point) -> Result<Point> {
        let j = self.resolvent_unchecked(g, x)?;
        Ok(x.sub(&j).scale(1.0 / g))
    }
}

fn resolvent_of_inverse_unchecked(a: &MonotoneOpSpec, g: f64, x: &Point) -> Result<Point> {
    if is_unit(g) {
        return Ok(x.sub(&a.resolvent_unchecked(1.0, x)?));
    }
    let inner = a.resolvent_unchecked(1.0 / g, &x.scale(1.0 / g))?;
    Ok(Point::from_fn(x.dim(), |k| x[k] - g * inner[k]))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p1(v: f64) -> Point {
        Point::from([v])
    }

    #[test]
    fn resolvent_examples() {
        use MonotoneOpSpec::*;
        assert_eq!(MonotoneOpSpec::normal_cone_box(0.0, 2.0).resolvent(1.0, &p1(5.0)).unwrap(), p1(2.0));
        assert_eq!(ScaledIdentity { alpha: 1.0 }.resolvent(1.0, &p1(4.0)).unwrap(), p1(2.0));
        let s = MonotoneOpSpec::support_interval(-1.0, 1.0);
        assert_eq!(s.resolvent(1.0, &p1(3.0)).unwrap(), p1(2.0));
        assert_eq!(s.resolvent(1.0, &p1(0.5)).unwrap(), p1(0.0));
        assert_eq!(s.resolvent(1.0, &p1(-3.0)).unwrap(), p1(-2.0));
        assert_eq!(Rotation90.resolvent(1.0, &Point::from([1.0, 0.0])).unwrap(), Point::from([0.5, -0.5]));
    }

    #[test]
    fn resolvent_errors() {
        use MonotoneOpSpec::*;
        assert!(Zero.resolvent(0.0, &p1(1.0)).is_err());
        assert!(Rotation90.resolvent(1.0, &p1(1.0)).is_err());
        let w = WienerResidual { t: FirmlyNonexpansive::Identity, offset: vec![0.0] };
        assert!(matches!(w.resolvent(2.0, &p1(1.0)), Err(Error::Unsupported(_))));
        assert!(w.resolvent(1.0, &p1(1.0)).is_ok());
    }

    #[test]
    fn resolvent_of_inverse_examples() {
        use MonotoneOpSpec::*;
        let b = MonotoneOpSpec::normal_cone_box(0.0, 2.0);
        assert_eq!(b.resolvent_of_inverse(1.0, &p1(5.0)).unwrap(), p1(3.0));
        assert_eq!(Zero.resolvent_of_inverse(1.0, &Point::from([3.0, -7.0])).unwrap(), Point::zeros(2));
        let y = ScaledIdentity { alpha: 1.0 }.resolvent_of_inverse(2.0, &p1(3.0)).unwrap();
        assert_abs_diff_eq!(y[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn yosida_examples() {
        use MonotoneOpSpec::*;
        assert_eq!(Zero.yosida(1.0, &Point::from([1.0, 2.0])).unwrap(), Point::zeros(2));
        assert_eq!(MonotoneOpSpec::normal_cone_box(-1.0, 1.0).yosida(1.0, &p1(3.0)).unwrap(), p1(2.0));
        assert_eq!(ScaledIdentity { alpha: 1.0 }.yosida(1.0, &p1(4.0)).unwrap(), p1(2.0));
    }

    #[test]
    fn wiener_resolvent_is_id_minus_t_plus_r() {
        let w = MonotoneOpSpec::WienerResidual {
            t: FirmlyNonexpansive::clip(1.0),
            offset: vec![0.25, -0.5],
        };
        let x = Point::from([3.0, 0.2]);
        // J(x) = x − T(x) + r, so x − J(x) = T(x) − r
        assert_eq!(w.resolvent(1.0, &x).unwrap(), Point::from([3.0 - 1.0 + 0.25, 0.2 - 0.2 - 0.5]));
        assert_eq!(w.yosida(1.0, &x).unwrap(), Point::from([1.0 - 0.25, 0.2 + 0.5]));
    }

    #[test]
    fn validation() {
        use MonotoneOpSpec::*;
        let not_monotone = AffineMonotone {
            matrix: LinOp::diagonal(&[1.0, -0.5]),
            offset: vec![0.0, 0.0],
        };
        assert!(not_monotone.validate().is_err());
        let skew = AffineMonotone {
            matrix: LinOp::from_rows(vec![vec![0.0, 2.0], vec![-2.0, 0.0]]).unwrap(),
            offset: vec![1.0, 0.0],
        };
        assert!(skew.validate().is_ok());
        assert!(MonotoneOpSpec::support_interval(0.1, 1.0).validate().is_err());
        assert!(ScaledIdentity { alpha: -1.0 }.validate().is_err());
        let expanding = FirmlyNonexpansive::Linear { matrix: LinOp::identity(2).scaled(1.5) };
        assert!(expanding.validate().is_err());
        let half = FirmlyNonexpansive::Linear { matrix: LinOp::identity(2).scaled(0.5) };
        assert!(half.validate().is_ok());
    }

    #[test]
    fn json_tags() {
        let a = MonotoneOpSpec::normal_cone_box(0.0, f64::INFINITY).inverse();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(
            s,
            r#"{"type":"inverse","of":{"type":"normal_cone_box","lower":[0.0],"upper":["inf"]}}"#
        );
        assert_eq!(serde_json::from_str::<MonotoneOpSpec>(&s).unwrap(), a);
        let aff: MonotoneOpSpec = serde_json::from_str(
            r#"{"type":"normal_cone_affine","translate":[0.0,1.0],"subspace":[[2.0,0.0]]}"#,
        )
        .unwrap();
        assert_eq!(aff.resolvent(1.0, &Point::from([3.0, 4.0])).unwrap(), Point::from([3.0, 1.0]));
    }

    /// One instance of every variant on `R²` (Wiener excluded for γ ≠ 1 callers).
    pub(crate) fn catalog_2d() -> Vec<MonotoneOpSpec> {
        use MonotoneOpSpec::*;
        let affine = Subspace::new(2, &[Point::from([1.0, 2.0])]).unwrap();
        let base = vec![
            Zero,
            ScaledIdentity { alpha: 0.0 },
            ScaledIdentity { alpha: 2.5 },
            NormalConeBox { lower: vec![-1.0, 0.5], upper: vec![2.0, f64::INFINITY] },
            NormalConeBall { center: vec![0.5, -1.0], radius: 1.5 },
            NormalConeAffine { translate: Point::from([1.0, -1.0]), subspace: affine },
            SubdiffSupportInterval { lower: vec![-2.0, 0.0], upper: vec![0.5, 1.0] },
            AffineMonotone {
                matrix: LinOp::from_rows(vec![vec![1.0, 2.0], vec![-2.0, 0.5]]).unwrap(),
                offset: vec![0.3, -1.0],
            },
            AffineMonotone { matrix: LinOp::zeros(2, 2), offset: vec![1.0, -2.0] },
            Rotation90,
            SubdiffOf { f: ConvexFnSpec::AbsSum { weights: vec![1.0, 0.3] } },
            SubdiffOf { f: ConvexFnSpec::conjugate_of(ConvexFnSpec::IndicatorBall { center: vec![0.5, 0.0], radius: 2.0 }) },
        ];
        let mut all = base.clone();
        all.extend(base.iter().cloned().map(MonotoneOpSpec::inverse));
        all.extend(base.into_iter().map(|a| a.scaled(0.7)));
        all
    }

    fn pt2() -> impl Strategy<Value = Point> {
        prop::collection::vec(-10.0..10.0f64, 2).prop_map(Point::from)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn firmly_nonexpansive(x in pt2(), y in pt2(), g in 0.1..4.0f64) {
            for a in catalog_2d() {
                let jx = a.resolvent(g, &x).unwrap();
                let jy = a.resolvent(g, &y).unwrap();
                let d = jx.sub(&jy);
                let slack = x.sub(&y).dot(&d) - d.norm_sq();
                prop_assert!(slack >= -1e-10, "{a:?}: {slack}");
            }
            let w = MonotoneOpSpec::WienerResidual { t: FirmlyNonexpansive::clip(1.0), offset: vec![0.3, -0.2] };
            let d = w.resolvent(1.0, &x).unwrap().sub(&w.resolvent(1.0, &y).unwrap());
            prop_assert!(x.sub(&y).dot(&d) - d.norm_sq() >= -1e-10);
        }

        #[test]
        fn inverse_involution(x in pt2(), g in 0.1..4.0f64) {
            for a in catalog_2d() {
                let twice = a.clone().inverse().inverse();
                let lhs = twice.resolvent(g, &x).unwrap();
                let rhs = a.resolvent(g, &x).unwrap();
                prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + x.norm_inf()), "{a:?}");
                let via_inv = a.clone().inverse().resolvent_of_inverse(g, &x).unwrap();
                prop_assert!(via_inv.max_abs_diff(&rhs) <= 1e-12 * (1.0 + x.norm_inf()), "{a:?}");
            }
        }

        #[test]
        fn yosida_lipschitz_and_cocoercive(x in pt2(), y in pt2(), g in 0.1..4.0f64) {
            for a in catalog_2d() {
                let d = a.yosida(g, &x).unwrap().sub(&a.yosida(g, &y).unwrap());
                let dx = x.sub(&y);
                prop_assert!(d.norm() <= dx.norm() / g * (1.0 + 1e-12) + 1e-12);
                prop_assert!(dx.dot(&d) >= g * d.norm_sq() - 1e-10);
            }
        }

        #[test]
        fn subdifferential_resolvent_is_prox(x in pt2(), g in 0.1..4.0f64) {
            for f in crate::convex::tests::catalog_2d() {
                let a = MonotoneOpSpec::subdiff(f.clone());
                let j = a.resolvent(g, &x).unwrap();
                let p = f.prox(g, &x).unwrap();
                prop_assert!(j.max_abs_diff(&p) <= 1e-12 * (1.0 + x.norm_inf()), "{f:?}");
            }
        }
    }
}
