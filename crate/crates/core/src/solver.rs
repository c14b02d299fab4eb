//! Relaxed inclusion solver.
//!
//! Finds `x ∈ V` with `0 ∈ N_V(x) + Σ w Lᵀ (γA Yosida)(L x)` by the
//! relaxed iteration
//!
//! ```text
//! y_i = L_i x_n,  q_i = y_i − J_{γA_i} y_i,  z = Σ w_i L_iᵀ q_i,
//! x_{n+1} = x_n − λ_n proj_V z
//! ```
//!
//! When the unrelaxed problem `0 ∈ A_i(L_i x)` for all `i`, `x ∈ V` is
//! solvable, both problems have the same solutions.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{LinOp, Point, Subspace};
use crate::mixtures::{Atom, MixtureFamily, OperatorFamily};
use crate::monotone::{FirmlyNonexpansive, MonotoneOpSpec};

/// Tolerance for `x0 ∈ V`.
pub const SUBSPACE_TOL: f64 = 1e-10;
/// Upper bound on stored iterates.
pub const MAX_STORED: usize = 1000;

/// Relaxation parameters: a constant or a finite sequence used cyclically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSchedule {
    Constant(f64),
    Cycle(Vec<f64>),
}

impl Default for LambdaSchedule {
    fn default() -> Self {
        LambdaSchedule::Constant(1.0)
    }
}

impl LambdaSchedule {
    /// `λ_n`.
    pub fn at(&self, n: usize) -> f64 {
        match self {
            LambdaSchedule::Constant(l) => *l,
            LambdaSchedule::Cycle(ls) => ls[n % ls.len()],
        }
    }

    /// Every value lies in `(0, 2)`, so `inf λ(2 − λ) > 0`.
    pub fn validate(&self) -> Result<()> {
        let values: &[f64] = match self {
            LambdaSchedule::Constant(l) => std::slice::from_ref(l),
            LambdaSchedule::Cycle(ls) => ls,
        };
        if values.is_empty() {
            return Err(Error::InvalidParameter("λ schedule is empty".into()));
        }
        if let Some(l) = values.iter().find(|l| !(**l > 0.0 && **l < 2.0)) {
            return Err(Error::InvalidParameter(format!("λ must lie in (0, 2), got {l}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopRule {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            abs_tol: 1e-8,
            rel_tol: 0.0,
            max_iter: 100_000,
        }
    }
}

impl StopRule {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0 && self.abs_tol.is_finite() && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter("tolerances must be finite and ≥ 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedProblem {
    family: OperatorFamily,
    subspace: Subspace,
    gamma: f64,
    lambda: LambdaSchedule,
    x0: Point,
    stop: StopRule,
}

impl RelaxedProblem {
    pub fn new(
        family: OperatorFamily,
        subspace: Subspace,
        gamma: f64,
        lambda: LambdaSchedule,
        x0: Point,
        stop: StopRule,
    ) -> Result<Self> {
        family.validate()?;
        check_dim("subspace ambient dimension", family.x_dim(), subspace.ambient_dim())?;
        check_dim("starting point", family.x_dim(), x0.dim())?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("γ must be > 0, got {gamma}")));
        }
        lambda.validate()?;
        stop.validate()?;
        let off = subspace.distance(&x0)?;
        if off > SUBSPACE_TOL {
            return Err(Error::InvalidParameter(format!(
                "x0 is not in V (distance {off:e})"
            )));
        }
        let p = RelaxedProblem {
            family,
            subspace,
            gamma,
            lambda,
            x0,
            stop,
        };
        // surfaces unsupported (γ, payload) pairs before iterating
        p.iterate_once(&p.x0, 1.0)?;
        Ok(p)
    }

    /// `V = X`, `γ = 1`, `λ ≡ 1`, `x0 = 0`, default stopping rule.
    pub fn with_defaults(family: OperatorFamily) -> Result<Self> {
        let n = family.x_dim();
        RelaxedProblem::new(
            family,
            Subspace::full(n),
            1.0,
            LambdaSchedule::default(),
            Point::zeros(n),
            StopRule::default(),
        )
    }

    pub fn family(&self) -> &OperatorFamily {
        &self.family
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> &LambdaSchedule {
        &self.lambda
    }

    pub fn x0(&self) -> &Point {
        &self.x0
    }

    pub fn stop(&self) -> StopRule {
        self.stop
    }

    pub fn set_stop(&mut self, stop: StopRule) -> Result<()> {
        stop.validate()?;
        self.stop = stop;
        Ok(())
    }

    pub fn set_lambda(&mut self, lambda: LambdaSchedule) -> Result<()> {
        lambda.validate()?;
        self.lambda = lambda;
        Ok(())
    }

    pub fn set_x0(&mut self, x0: Point) -> Result<()> {
        check_dim("starting point", self.family.x_dim(), x0.dim())?;
        let off = self.subspace.distance(&x0)?;
        if off > SUBSPACE_TOL {
            return Err(Error::InvalidParameter(format!("x0 is not in V (distance {off:e})")));
        }
        self.x0 = x0;
        Ok(())
    }

    fn check_x(&self, x: &Point) -> Result<()> {
        check_dim("solver point", self.family.x_dim(), x.dim())
    }

    /// `Σ w Lᵀ (L x − J_{γA}(L x))`.
    fn residual_sum(&self, x: &Point) -> Result<Point> {
        let mut z = Point::zeros(x.dim());
        for a in self.family.atoms() {
            let y = a.linop.apply_unchecked(x);
            let j = a.payload.resolvent_unchecked(self.gamma, &y)?;
            z.axpy(a.weight, &a.linop.adjoint_apply_unchecked(&y.sub(&j)));
        }
        Ok(z)
    }

    /// One relaxed step `x − λ proj_V Σ w Lᵀ(Lx − J_{γA}(Lx))`.
    pub fn iterate_once(&self, x: &Point, lambda: f64) -> Result<Point> {
        self.check_x(x)?;
        let z = self.subspace.project_unchecked(&self.residual_sum(x)?);
        let mut next = x.clone();
        next.axpy(-lambda, &z);
        Ok(next)
    }

    /// `proj_V ∘ J_C ∘ proj_V` for the comixture of the `γ`-scaled family.
    ///
    /// Built from the mixture module rather than the solver loop, so the
    /// step `x + λ(J x − x)` is an independent evaluation of
    /// [`RelaxedProblem::iterate_once`].
    pub fn relaxed_resolvent(&self, x: &Point) -> Result<Point> {
        self.check_x(x)?;
        let scaled = self.family.scaled_family(self.gamma);
        let inner = scaled.resolvent_comixture(&self.subspace.project_unchecked(x))?;
        Ok(self.subspace.project_unchecked(&inner))
    }

    /// Runs until `‖x_{n+1} − x_n‖ ≤ abs_tol + rel_tol ‖x_n‖` or `max_iter`.
    pub fn solve(&self) -> Result<SolveTrace> {
        let StopRule {
            abs_tol,
            rel_tol,
            max_iter,
        } = self.stop;
        let thin = max_iter.div_ceil(MAX_STORED).max(1);
        let mut x = self.x0.clone();
        let mut iterates = vec![(0, x.clone())];
        let mut steps = Vec::new();
        let mut converged = false;
        for n in 0..max_iter {
            let next = self.iterate_once(&x, self.lambda.at(n))?;
            if !next.is_finite() {
                return Err(Error::Diverged { iter: n + 1 });
            }
            let step = next.dist(&x);
            let tol = abs_tol + rel_tol * x.norm();
            x = next;
            steps.push(step);
            if (n + 1) % thin == 0 {
                iterates.push((n + 1, x.clone()));
            }
            if step <= tol {
                converged = true;
                break;
            }
        }
        let iterations = steps.len();
        if iterates.last().is_some_and(|(k, _)| *k != iterations) {
            iterates.push((iterations, x.clone()));
        }
        let residual = self.relaxed_residual(&x)?;
        Ok(SolveTrace {
            x,
            iterations,
            converged,
            step_norms: steps,
            iterates,
            thinning: thin,
            residual,
        })
    }

    /// Distance to `V` and the projected relaxed-stationarity defect.
    pub fn relaxed_residual(&self, x: &Point) -> Result<RelaxedResidual> {
        self.check_x(x)?;
        let z = self.residual_sum(x)?.scale(1.0 / self.gamma);
        Ok(RelaxedResidual {
            in_v_defect: self.subspace.distance(x)?,
            normal_defect: self.subspace.project_unchecked(&z).norm(),
        })
    }

    /// `‖L_i x − J_{γA_i}(L_i x)‖` per atom; all zero iff `0 ∈ A_i(L_i x)` for every `i`.
    pub fn exactness_check(&self, x: &Point) -> Result<Vec<f64>> {
        self.check_x(x)?;
        self.family
            .atoms()
            .iter()
            .map(|a| {
                let y = a.linop.apply_unchecked(x);
                Ok(y.dist(&a.payload.resolvent_unchecked(self.gamma, &y)?))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxedResidual {
    pub in_v_defect: f64,
    pub normal_defect: f64,
}

impl RelaxedResidual {
    pub fn max(&self) -> f64 {
        self.in_v_defect.max(self.normal_defect)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub x: Point,
    pub iterations: usize,
    pub converged: bool,
    /// `‖x_{n+1} − x_n‖` for every iteration.
    pub step_norms: Vec<f64>,
    /// `(n, x_n)` for every `thinning`-th iterate, plus the first and last.
    pub iterates: Vec<(usize, Point)>,
    pub thinning: usize,
    pub residual: RelaxedResidual,
}

impl SolveTrace {
    pub fn last_step(&self) -> f64 {
        self.step_norms.last().copied().unwrap_or(0.0)
    }
}

/// One Wiener atom: observation `r ≈ T(L x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerAtom {
    pub weight: f64,
    pub linop: LinOp,
    pub t: FirmlyNonexpansive,
    pub offset: Vec<f64>,
}

/// Builds the problem whose iteration is `q_i = T_i(L_i x) − r_i`, `γ = 1`.
pub fn wiener_problem(x_dim: usize, atoms: Vec<WienerAtom>, subspace: Subspace) -> Result<RelaxedProblem> {
    let atoms = atoms
        .into_iter()
        .map(|a| {
            a.t.validate()?;
            Ok(Atom::new(
                a.weight,
                a.linop,
                MonotoneOpSpec::WienerResidual {
                    t: a.t,
                    offset: a.offset,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let family = MixtureFamily::new(x_dim, atoms)?;
    RelaxedProblem::new(
        family,
        subspace,
        1.0,
        LambdaSchedule::default(),
        Point::zeros(x_dim),
        StopRule::default(),
    )
}

/// Problem file layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub family: OperatorFamily,
    /// Spanning vectors of `V`; absent means `V = X`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<Vec<Point>>,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub lambda: LambdaSchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Point>,
    #[serde(default)]
    pub stop: StopRule,
}

fn one() -> f64 {
    1.0
}

impl ProblemSpec {
    pub fn build(self) -> Result<RelaxedProblem> {
        let n = self.family.x_dim();
        let v = match &self.subspace {
            Some(span) => Subspace::new(n, span)?,
            None => Subspace::full(n),
        };
        let x0 = self.x0.unwrap_or_else(|| Point::zeros(n));
        RelaxedProblem::new(self.family, v, self.gamma, self.lambda, x0, self.stop)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use MonotoneOpSpec as M;

    pub(crate) fn halfspaces() -> OperatorFamily {
        let h = |lo: f64, hi: f64| M::NormalConeBox {
            lower: vec![lo, f64::NEG_INFINITY],
            upper: vec![hi, f64::INFINITY],
        };
        MixtureFamily::new(
            2,
            vec![
                Atom::new(0.5, LinOp::identity(2), h(f64::NEG_INFINITY, 0.0)),
                Atom::new(0.5, LinOp::identity(2), h(1.0, f64::INFINITY)),
            ],
        )
        .unwrap()
    }

    fn disk_halfspace() -> OperatorFamily {
        MixtureFamily::new(
            2,
            vec![
                Atom::new(
                    0.5,
                    LinOp::identity(2),
                    M::NormalConeBall {
                        center: vec![0.0, 0.0],
                        radius: 1.0,
                    },
                ),
                Atom::new(
                    0.5,
                    LinOp::identity(2),
                    M::NormalConeBox {
                        lower: vec![0.5, f64::NEG_INFINITY],
                        upper: vec![f64::INFINITY, f64::INFINITY],
                    },
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn iterate_examples() {
        let single = MixtureFamily::new(1, vec![Atom::new(1.0, LinOp::identity(1), M::normal_cone_box(-1.0, 1.0))]).unwrap();
        let p = RelaxedProblem::with_defaults(single).unwrap();
        assert_abs_diff_eq!(p.iterate_once(&Point::from([3.0]), 1.0).unwrap()[0], 1.0);
        assert_abs_diff_eq!(p.iterate_once(&Point::from([0.5]), 1.0).unwrap()[0], 0.5);

        let p = RelaxedProblem::with_defaults(halfspaces()).unwrap();
        let x = p.iterate_once(&Point::from([0.0, 0.0]), 1.0).unwrap();
        assert_eq!(x.as_slice(), &[0.5, 0.0]);
    }

    #[test]
    fn problem_validation() {
        let f = halfspaces();
        let v = Subspace::new(2, &[Point::from([1.0, 0.0])]).unwrap();
        let bad_x0 = RelaxedProblem::new(f.clone(), v.clone(), 1.0, LambdaSchedule::default(), Point::from([0.0, 1.0]), StopRule::default());
        assert!(bad_x0.is_err());
        let bad_l = RelaxedProblem::new(f.clone(), v.clone(), 1.0, LambdaSchedule::Constant(2.0), Point::zeros(2), StopRule::default());
        assert!(bad_l.is_err());
        let bad_cycle = RelaxedProblem::new(f.clone(), v.clone(), 1.0, LambdaSchedule::Cycle(vec![1.0, 0.0]), Point::zeros(2), StopRule::default());
        assert!(bad_cycle.is_err());
        let bad_g = RelaxedProblem::new(f, v, 0.0, LambdaSchedule::default(), Point::zeros(2), StopRule::default());
        assert!(bad_g.is_err());

        let w = MixtureFamily::new(
            1,
            vec![Atom::new(1.0, LinOp::identity(1), M::WienerResidual { t: FirmlyNonexpansive::Identity, offset: vec![0.0] })],
        )
        .unwrap();
        let r = RelaxedProblem::new(w, Subspace::full(1), 2.0, LambdaSchedule::default(), Point::zeros(1), StopRule::default());
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn inconsistent_halfspaces() {
        let p = RelaxedProblem::with_defaults(halfspaces()).unwrap();
        let t = p.solve().unwrap();
        assert!(t.converged);
        assert_abs_diff_eq!(t.x[0], 0.5, epsilon = 1e-6);
        assert!(t.residual.max() <= 1e-6);
        let ex = p.exactness_check(&t.x).unwrap();
        assert_abs_diff_eq!(ex[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(ex[1], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn consistent_disk_halfspace() {
        let mut p = RelaxedProblem::with_defaults(disk_halfspace()).unwrap();
        p.set_x0(Point::from([-3.0, 2.0])).unwrap();
        let t = p.solve().unwrap();
        assert!(t.converged);
        assert!(t.iterations <= 5000);
        assert!(p.exactness_check(&t.x).unwrap().iter().all(|r| *r <= 1e-6));

        p.set_lambda(LambdaSchedule::Constant(1.999)).unwrap();
        let t = p.solve().unwrap();
        assert!(t.converged);
        assert!(t.residual.max() <= 1e-5);

        let feasible = Point::from([0.7, 0.1]);
        assert!(p.exactness_check(&feasible).unwrap().iter().all(|r| *r <= 1e-12));
        assert_eq!(p.iterate_once(&feasible, 1.0).unwrap(), feasible);
    }

    #[test]
    fn resolvent_form_and_invariance() {
        let v = Subspace::new(2, &[Point::from([1.0, 1.0])]).unwrap();
        let p = RelaxedProblem::new(
            disk_halfspace(),
            v.clone(),
            0.7,
            LambdaSchedule::Cycle(vec![0.5, 1.5]),
            Point::from([-2.0, -2.0]),
            StopRule::default(),
        )
        .unwrap();
        let mut x = p.x0().clone();
        for n in 0..50 {
            let l = p.lambda().at(n);
            let next = p.iterate_once(&x, l).unwrap();
            let j = p.relaxed_resolvent(&x).unwrap();
            let alt = Point::from_fn(2, |k| x[k] + l * (j[k] - x[k]));
            assert!(next.max_abs_diff(&alt) <= 1e-12);
            assert!(v.distance(&next).unwrap() <= 1e-9);
            x = next;
        }
    }

    #[test]
    fn trace_thinning() {
        let f = MixtureFamily::new(1, vec![Atom::new(1.0, LinOp::identity(1), M::ScaledIdentity { alpha: 1.0 })]).unwrap();
        let mut p = RelaxedProblem::with_defaults(f).unwrap();
        p.set_x0(Point::from([1.0])).unwrap();
        p.set_lambda(LambdaSchedule::Constant(0.01)).unwrap();
        p.set_stop(StopRule { abs_tol: 0.0, rel_tol: 0.0, max_iter: 2500 }).unwrap();
        let t = p.solve().unwrap();
        assert_eq!(t.thinning, 3);
        assert_eq!(t.iterations, 2500);
        assert!(!t.converged);
        assert!(t.iterates.len() <= MAX_STORED + 2);
        assert_eq!(t.iterates.last().unwrap().0, 2500);
    }

    #[test]
    fn wiener_trivial() {
        let a = WienerAtom {
            weight: 1.0,
            linop: LinOp::identity(2),
            t: FirmlyNonexpansive::Identity,
            offset: vec![1.5, -0.25],
        };
        let p = wiener_problem(2, vec![a], Subspace::full(2)).unwrap();
        let t = p.solve().unwrap();
        assert_eq!(t.x.as_slice(), &[1.5, -0.25]);

        let zero = WienerAtom {
            weight: 1.0,
            linop: LinOp::identity(2),
            t: FirmlyNonexpansive::clip(1.0),
            offset: vec![0.0],
        };
        let t = wiener_problem(2, vec![zero], Subspace::full(2)).unwrap().solve().unwrap();
        assert_eq!(t.iterations, 1);
        assert_eq!(t.step_norms[0], 0.0);

        let expanding = WienerAtom {
            weight: 1.0,
            linop: LinOp::identity(1),
            t: FirmlyNonexpansive::Linear { matrix: LinOp::identity(1).scaled(2.0) },
            offset: vec![0.0],
        };
        assert!(wiener_problem(1, vec![expanding], Subspace::full(1)).is_err());
    }

    #[test]
    fn problem_json() {
        let spec = ProblemSpec {
            family: halfspaces(),
            subspace: None,
            gamma: 1.0,
            lambda: LambdaSchedule::Cycle(vec![1.0, 1.5]),
            x0: None,
            stop: StopRule::default(),
        };
        let s = serde_json::to_string(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back.lambda, spec.lambda);
        let min = r#"{"family":{"x_dim":1,"atoms":[{"weight":1.0,"linop":[[1.0]],"payload":{"type":"zero"}}]},"lambda":0.5}"#;
        let p = serde_json::from_str::<ProblemSpec>(min).unwrap().build().unwrap();
        assert_eq!(p.lambda(), &LambdaSchedule::Constant(0.5));
        assert_eq!(p.stop(), StopRule::default());
    }
}
