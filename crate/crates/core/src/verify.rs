//! Seeded identity suite.
//!
//! Each row of the resulting [`MixtureReport`] compares two independently
//! computed quantities that must coincide, over many random families and
//! points, and keeps the largest discrepancy.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convex::ConvexFnSpec;
use crate::error::{Error, Result};
use crate::linalg::{LinOp, Point};
use crate::mixtures::{Atom, Constants, MixtureFamily, MixtureReport, OperatorFamily, Side};
use crate::monotone::MonotoneOpSpec;
use crate::oracle::{bisect_resolvent_1d, grid_conjugate, grid_envelope, grid_prox, oracle_value, GridSpec};
use crate::sampling::{
    gaussian_linop, random_convex, random_expectation_family, random_function_family, random_isometric_family,
    random_monotone, random_operator_family, uniform_point, FamilyShape,
};

/// Thresholds per row kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Closed-form identities.
    pub identity: f64,
    /// Two implementations of the same prox.
    pub exact: f64,
    /// Mixture versus comixture under isometries.
    pub collapse: f64,
    /// Firm nonexpansiveness and cocoercivity slack.
    pub firmness: f64,
    pub cocoercivity: f64,
    /// Central-difference gradients.
    pub gradient: f64,
    /// Multiple of the grid step allowed for grid oracles.
    pub grid_steps: f64,
    pub bisection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-9,
            exact: 1e-12,
            collapse: 1e-11,
            firmness: 1e-10,
            cocoercivity: 1e-9,
            gradient: 1e-4,
            grid_steps: 2.0,
            bisection: 1e-8,
        }
    }
}

/// Deliberate corruption used to check that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Multiplies every mixture resolvent output by `1 + ε`.
    ResolventMixture(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub families: usize,
    pub points_per_family: usize,
    pub pairs_per_family: usize,
    pub oracle_inputs: usize,
    pub shape: FamilyShapeConfig,
    pub tolerances: Tolerances,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyShapeConfig {
    pub max_x_dim: usize,
    pub max_atoms: usize,
    pub max_rows: usize,
}

impl From<FamilyShapeConfig> for FamilyShape {
    fn from(s: FamilyShapeConfig) -> Self {
        FamilyShape {
            max_x_dim: s.max_x_dim,
            max_atoms: s.max_atoms,
            max_rows: s.max_rows,
        }
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            families: 50,
            points_per_family: 10,
            pairs_per_family: 500,
            oracle_inputs: 50,
            shape: FamilyShapeConfig {
                max_x_dim: 8,
                max_atoms: 6,
                max_rows: 8,
            },
            tolerances: Tolerances::default(),
            fault: None,
        }
    }
}

/// Row names, in the order they appear in a report.
pub mod rows {
    pub const MIXTURE_DUALITY: &str = "mixture_inverse_is_comixture_of_inverses";
    pub const MIXTURE_MATRIX_FORM: &str = "mixture_resolvent_vs_assembled_matrix";
    pub const COMIXTURE_DUAL_FORM: &str = "comixture_resolvent_vs_inverse_mixture";
    pub const MIXTURE_YOSIDA: &str = "mixture_yosida_vs_resolvent";
    pub const COMIXTURE_YOSIDA: &str = "comixture_yosida_vs_resolvent";
    pub const RESOLVENT_COLLAPSE: &str = "isometric_probability_mixture_equals_comixture";
    pub const ENVELOPE_PARTITION: &str = "envelope_partition_with_conjugate_family";
    pub const PROX_SUBDIFF: &str = "prox_mixture_vs_subdifferential_resolvent";
    pub const PROX_VARIATIONAL: &str = "prox_mixture_variational_inequality";
    pub const PROX_COMIXTURE_YOSIDA: &str = "prox_comixture_vs_subdifferential_yosida";
    pub const ENVELOPE_GRADIENT: &str = "comixture_envelope_gradient_vs_prox";
    pub const PROX_COLLAPSE: &str = "isometric_probability_prox_mixture_equals_comixture";
    pub const MOREAU: &str = "moreau_decomposition";
    pub const FIRM_MIXTURE: &str = "firm_nonexpansive_mixture_resolvent";
    pub const FIRM_COMIXTURE: &str = "firm_nonexpansive_comixture_resolvent";
    pub const FIRM_EXPECTATION: &str = "firm_nonexpansive_expectation_resolvent";
    pub const COCOERCIVITY: &str = "comixture_cocoercivity";
    pub const ORACLE_PROX: &str = "oracle_grid_prox";
    pub const ORACLE_ENVELOPE: &str = "oracle_grid_envelope";
    pub const ORACLE_CONJUGATE: &str = "oracle_grid_conjugate";
    pub const ORACLE_RESOLVENT: &str = "oracle_bisection_resolvent";
}

struct Suite<'a> {
    cfg: &'a VerifyConfig,
    rng: ChaCha8Rng,
    report: MixtureReport,
}

/// Runs every row and returns the residual table (failures included).
pub fn run(cfg: &VerifyConfig) -> Result<MixtureReport> {
    if cfg.families == 0 {
        return Err(Error::InvalidParameter("need at least one family".into()));
    }
    let mut s = Suite {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        report: MixtureReport::with_seed(cfg.seed),
    };
    for _ in 0..cfg.families {
        s.operator_family()?;
        s.function_family()?;
        s.affine_family()?;
        s.isometric_families()?;
        s.expectation_family()?;
    }
    s.cocoercivity()?;
    s.oracle()?;
    Ok(s.report)
}

fn mixture_resolvent(fault: Option<Fault>, f: &OperatorFamily, x: &Point) -> Result<Point> {
    let j = f.resolvent_mixture(x)?;
    Ok(match fault {
        Some(Fault::ResolventMixture(eps)) => j.scale(1.0 + eps),
        None => j,
    })
}

fn pair_violation(x: &Point, y: &Point, jx: &Point, jy: &Point, modulus: f64) -> f64 {
    let dj = jx.sub(jy);
    modulus * dj.norm_sq() - x.sub(y).dot(&dj)
}

impl Suite<'_> {
    fn tol(&self) -> Tolerances {
        self.cfg.tolerances
    }

    fn shape(&self) -> FamilyShape {
        self.cfg.shape.into()
    }

    fn point(&mut self, n: usize) -> Point {
        uniform_point(&mut self.rng, n, 3.0)
    }

    fn jw(&self, f: &OperatorFamily, x: &Point) -> Result<Point> {
        mixture_resolvent(self.cfg.fault, f, x)
    }

    fn record(&mut self, row: &str, err: f64, threshold: f64) {
        self.report.record(row, err, threshold);
    }

    fn record_violation(&mut self, row: &str, violation: f64, threshold: f64) {
        self.report.record(row, violation.max(0.0), threshold);
    }

    fn firmness(&mut self, row: &str, n: usize, j: impl Fn(&Point) -> Result<Point>) -> Result<()> {
        let tol = self.tol().firmness;
        for _ in 0..self.cfg.pairs_per_family {
            let (x, y) = (self.point(n), self.point(n));
            let v = pair_violation(&x, &y, &j(&x)?, &j(&y)?, 1.0);
            self.record_violation(row, v, tol);
        }
        Ok(())
    }

    fn operator_family(&mut self) -> Result<()> {
        let shape = self.shape();
        let f = random_operator_family(&mut self.rng, shape);
        let inv = f.inverse_family();
        let n = f.x_dim();
        let t = self.tol();
        for _ in 0..self.cfg.points_per_family {
            let x = self.point(n);
            let jw = self.jw(&f, &x)?;
            let jc = f.resolvent_comixture(&x)?;

            let dual = inv.resolvent_comixture(&x)?;
            self.record(rows::MIXTURE_DUALITY, x.sub(&jw).max_abs_diff(&dual), t.identity);

            let via_inverse = x.sub(&inv.resolvent_mixture(&x)?);
            self.record(rows::COMIXTURE_DUAL_FORM, jc.max_abs_diff(&via_inverse), t.identity);

            let yw = f.yosida_mixture(Side::Mixture, &x)?;
            self.record(rows::MIXTURE_YOSIDA, yw.max_abs_diff(&x.sub(&jw)), t.identity);
            let yc = f.yosida_mixture(Side::Comixture, &x)?;
            self.record(rows::COMIXTURE_YOSIDA, yc.max_abs_diff(&x.sub(&jc)), t.identity);
        }
        let fault = self.cfg.fault;
        self.firmness(rows::FIRM_MIXTURE, n, |x| mixture_resolvent(fault, &f, x))?;
        self.firmness(rows::FIRM_COMIXTURE, n, |x| f.resolvent_comixture(x))?;
        Ok(())
    }

    fn function_family(&mut self) -> Result<()> {
        let shape = self.shape();
        let f = random_function_family(&mut self.rng, shape);
        let conj = f.conjugate_family();
        let sub = f.subdifferential_family();
        let n = f.x_dim();
        let t = self.tol();
        for _ in 0..self.cfg.points_per_family {
            let x = self.point(n);
            let q = 0.5 * x.norm_sq();

            let partition = f.envelope_mixture(&x)? + conj.envelope_comixture(&x)?;
            self.record(rows::ENVELOPE_PARTITION, partition - q, t.identity);

            let p = f.prox_mixture(&x)?;
            let r = sub.resolvent_mixture(&x)?;
            self.record(rows::PROX_SUBDIFF, p.max_abs_diff(&r), t.exact);

            // g(y) ≥ g(p) + ⟨x − p, y − p⟩ with y = prox(u)
            let (p2, gp) = f.mixture_value_at_prox(&x)?;
            self.record(rows::PROX_VARIATIONAL, p.max_abs_diff(&p2), t.identity);
            let u = self.point(n);
            let (y, gy) = f.mixture_value_at_prox(&u)?;
            let v = gp + x.sub(&p).dot(&y.sub(&p)) - gy;
            self.record_violation(rows::PROX_VARIATIONAL, v, t.identity);

            let pc = f.prox_comixture(&x)?;
            let alt = x.sub(&sub.yosida_mixture(Side::Comixture, &x)?);
            self.record(rows::PROX_COMIXTURE_YOSIDA, pc.max_abs_diff(&alt), t.identity);

            let h = 1e-5;
            let grad = Point::from_fn(n, |k| {
                let e = Point::basis(n, k).scale(h);
                let up = f.envelope_comixture(&x.add(&e)).unwrap_or(f64::NAN);
                let down = f.envelope_comixture(&x.sub(&e)).unwrap_or(f64::NAN);
                (up - down) / (2.0 * h)
            });
            self.record(rows::ENVELOPE_GRADIENT, grad.max_abs_diff(&x.sub(&pc)), t.gradient);

            for a in f.atoms() {
                let y = a.linop.apply(&x)?;
                let split = a.payload.prox(1.0, &y)?.add(&a.payload.conjugate().prox(1.0, &y)?);
                self.record(rows::MOREAU, split.max_abs_diff(&y), t.identity);
            }
        }
        Ok(())
    }

    /// Families of affine monotone atoms, where `J_W` is a matrix that can be
    /// assembled directly as `Σ w Lᵀ (I + M)⁻¹ L`.
    fn affine_family(&mut self) -> Result<()> {
        let shape = self.shape();
        let raw = random_operator_family(&mut self.rng, shape);
        let atoms = raw
            .atoms()
            .iter()
            .map(|a| {
                let m = a.linop.rows();
                let matrix = gaussian_linop(&mut self.rng, m, m);
                let psd = matrix.transpose().to_dmatrix() * matrix.to_dmatrix() / m as f64;
                let skew = gaussian_linop(&mut self.rng, m, m).to_dmatrix();
                let full = psd + (&skew - skew.transpose()) * 0.5;
                let matrix = LinOp::new(m, m, full.transpose().as_slice().to_vec())?;
                Ok(Atom::new(
                    a.weight,
                    a.linop.clone(),
                    MonotoneOpSpec::AffineMonotone {
                        matrix,
                        offset: vec![0.0; m],
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let f = MixtureFamily::new(raw.x_dim(), atoms)?;
        let n = f.x_dim();
        let mut t = DMatrix::<f64>::zeros(n, n);
        for a in f.atoms() {
            let MonotoneOpSpec::AffineMonotone { matrix, .. } = &a.payload else {
                unreachable!()
            };
            let m = matrix.rows();
            let inv = (DMatrix::identity(m, m) + matrix.to_dmatrix())
                .try_inverse()
                .ok_or_else(|| Error::InvalidParameter("singular I + M".into()))?;
            let l = a.linop.to_dmatrix();
            t += l.transpose() * inv * l * a.weight;
        }
        for _ in 0..self.cfg.points_per_family {
            let x = self.point(n);
            let tx = &t * nalgebra::DVector::from_column_slice(x.as_slice());
            let assembled = Point::from(tx.as_slice().to_vec());
            let jw = self.jw(&f, &x)?;
            self.record(rows::MIXTURE_MATRIX_FORM, jw.max_abs_diff(&assembled), self.tol().identity);
        }
        Ok(())
    }

    fn isometric_families(&mut self) -> Result<()> {
        let shape = self.shape();
        let t = self.tol();
        let ops = random_isometric_family(&mut self.rng, shape, random_monotone);
        let fns = random_isometric_family(&mut self.rng, shape, random_convex);
        for _ in 0..self.cfg.points_per_family {
            let x = self.point(ops.x_dim());
            let d = self.jw(&ops, &x)?.max_abs_diff(&ops.resolvent_comixture(&x)?);
            self.record(rows::RESOLVENT_COLLAPSE, d, t.collapse);
            let x = self.point(fns.x_dim());
            let d = fns.prox_mixture(&x)?.max_abs_diff(&fns.prox_comixture(&x)?);
            self.record(rows::PROX_COLLAPSE, d, t.collapse);
        }
        Ok(())
    }

    fn expectation_family(&mut self) -> Result<()> {
        let shape = self.shape();
        let f = random_expectation_family(&mut self.rng, shape, random_monotone);
        let n = f.x_dim();
        self.firmness(rows::FIRM_EXPECTATION, n, |x| f.resolvent_expectation(x))
    }

    fn cocoercivity(&mut self) -> Result<()> {
        let shape = self.shape();
        let mut last = None;
        for _ in 0..self.cfg.families {
            let f = random_operator_family(&mut self.rng, shape).map_payloads(|_| MonotoneOpSpec::ScaledIdentity { alpha: 1.0 });
            let delta = f.cocoercivity_constant(1.0)?;
            let n = f.x_dim();
            for _ in 0..self.cfg.pairs_per_family / 10 {
                let (u, v) = (self.point(n), self.point(n));
                let (pu, cu) = f.comixture_graph(&u)?;
                let (pv, cv) = f.comixture_graph(&v)?;
                let viol = pair_violation(&pu, &pv, &cu, &cv, delta);
                self.record_violation(rows::COCOERCIVITY, viol, self.tol().cocoercivity);
            }
            last = Some(Constants {
                cocoercivity: delta,
                lipschitz: f.lipschitz_constant(&vec![1.0; f.len()])?,
            });
        }
        self.report.constants = last;
        Ok(())
    }

    fn oracle(&mut self) -> Result<()> {
        let grid = GridSpec::symmetric(1, 10.0, crate::oracle::DEFAULT_POINTS)?;
        let tol = self.tol().grid_steps * grid.step(0);
        for f in quantized_convex_1d(&mut self.rng) {
            let value = oracle_value(&f, &grid);
            for _ in 0..self.cfg.oracle_inputs {
                let x = Point::from([self.rng.random_range(-7.0..=7.0)]);
                let p = f.prox(1.0, &x)?;
                self.record(rows::ORACLE_PROX, p.max_abs_diff(&grid_prox(&value, &grid, &x)?), tol);
                let e = f.envelope(&x)? - grid_envelope(&value, &grid, &x)?;
                self.record(rows::ORACLE_ENVELOPE, e, tol);

                let xs = Point::from([self.rng.random_range(-1.5..=1.5)]);
                let closed = f.conjugate_value(&xs)?;
                let m = grid_conjugate(&value, &grid, &xs)?;
                let err = if m.at_boundary {
                    // the grid only bounds the supremum from below
                    (m.value - closed).max(0.0)
                } else if closed.is_finite() {
                    closed - m.value
                } else {
                    f64::INFINITY
                };
                self.record(rows::ORACLE_CONJUGATE, err, tol);
            }
        }
        for a in monotone_1d(&mut self.rng) {
            for _ in 0..self.cfg.oracle_inputs {
                let x = self.rng.random_range(-10.0..=10.0);
                let closed = a.resolvent(1.0, &Point::from([x]))?[0];
                let bisected = bisect_resolvent_1d(&a, 1.0, x)?;
                self.record(rows::ORACLE_RESOLVENT, closed - bisected, self.tol().bisection);
            }
        }
        Ok(())
    }
}

fn q(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// One instance of every base convex variant in 1-D, parameters on the 0.01 lattice.
fn quantized_convex_1d(rng: &mut ChaCha8Rng) -> Vec<ConvexFnSpec> {
    use ConvexFnSpec::*;
    let mut u = |lo: f64, hi: f64| q(rng.random_range(lo..=hi));
    let lo = u(-3.0, 0.0);
    let hi = lo + u(0.1, 3.0);
    vec![
        Quadratic {
            alpha: u(0.2, 3.0),
            center: vec![u(-2.0, 2.0)],
        },
        QuadraticKernel,
        AbsSum {
            weights: vec![u(0.0, 2.0)],
        },
        IndicatorBox {
            lower: vec![lo],
            upper: vec![hi],
        },
        IndicatorBall {
            center: vec![u(-1.0, 1.0)],
            radius: u(0.1, 2.0),
        },
        SupportInterval {
            lower: vec![u(-2.0, 0.0)],
            upper: vec![u(0.0, 2.0)],
        },
        Linear {
            a: vec![u(-2.0, 2.0)],
            beta: u(-1.0, 1.0),
        },
    ]
}

/// Every 1-D monotone variant the bisection oracle handles, wrappers included.
fn monotone_1d(rng: &mut ChaCha8Rng) -> Vec<MonotoneOpSpec> {
    use MonotoneOpSpec::*;
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..=hi);
    let lo = u(-3.0, 1.0);
    let base = vec![
        Zero,
        ScaledIdentity { alpha: u(0.0, 3.0) },
        NormalConeBox {
            lower: vec![lo],
            upper: vec![lo + u(0.0, 3.0)],
        },
        NormalConeBall {
            center: vec![u(-1.0, 1.0)],
            radius: u(0.0, 2.0),
        },
        SubdiffSupportInterval {
            lower: vec![u(-2.0, 0.0)],
            upper: vec![u(0.0, 2.0)],
        },
        AffineMonotone {
            matrix: LinOp::identity(1).scaled(u(0.0, 3.0)),
            offset: vec![u(-1.0, 1.0)],
        },
        SubdiffOf {
            f: ConvexFnSpec::abs_sum(u(0.0, 2.0)),
        },
        SubdiffOf {
            f: ConvexFnSpec::Quadratic {
                alpha: u(0.2, 3.0),
                center: vec![u(-2.0, 2.0)],
            },
        },
    ];
    let gamma = u(0.3, 3.0);
    let mut out = base.clone();
    out.extend(base.iter().map(|a| a.clone().inverse()));
    out.extend(base.iter().map(|a| a.clone().scaled(gamma)));
    out
}

/// Every row name, in report order.
pub fn identity_names() -> Vec<&'static str> {
    use rows::*;
    vec![
        MIXTURE_DUALITY,
        MIXTURE_MATRIX_FORM,
        COMIXTURE_DUAL_FORM,
        MIXTURE_YOSIDA,
        COMIXTURE_YOSIDA,
        RESOLVENT_COLLAPSE,
        ENVELOPE_PARTITION,
        PROX_SUBDIFF,
        PROX_VARIATIONAL,
        PROX_COMIXTURE_YOSIDA,
        ENVELOPE_GRADIENT,
        PROX_COLLAPSE,
        MOREAU,
        FIRM_MIXTURE,
        FIRM_COMIXTURE,
        FIRM_EXPECTATION,
        COCOERCIVITY,
        ORACLE_PROX,
        ORACLE_ENVELOPE,
        ORACLE_CONJUGATE,
        ORACLE_RESOLVENT,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> VerifyConfig {
        VerifyConfig {
            seed,
            families: 6,
            points_per_family: 4,
            pairs_per_family: 40,
            oracle_inputs: 5,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn small_suite_passes() {
        let r = run(&small(0)).unwrap();
        for row in &r.residuals {
            assert!(row.passed, "{row:?}");
        }
        assert_eq!(r.residuals.len(), identity_names().len());
        for name in identity_names() {
            assert!(r.residuals.iter().any(|row| row.identity == name), "{name}");
        }
    }

    #[test]
    fn fault_is_detected() {
        let mut cfg = small(0);
        cfg.fault = Some(Fault::ResolventMixture(1e-6));
        let r = run(&cfg).unwrap();
        assert!(!r.passed());
        assert!(r.failures().any(|row| row.identity == rows::MIXTURE_DUALITY));
    }

    #[test]
    fn seeds_differ() {
        let a = run(&small(7)).unwrap();
        let b = run(&small(8)).unwrap();
        assert!(a.passed() && b.passed());
        assert_ne!(a, b);
        assert_eq!(a, run(&small(7)).unwrap());
    }
}
