//! Seeded random points, linear maps, catalog entries and admissible families.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::convex::ConvexFnSpec;
use crate::linalg::{LinOp, Point, Subspace};
use crate::mixtures::{Atom, FunctionFamily, MixtureFamily, OperatorFamily, Payload};
use crate::monotone::{FirmlyNonexpansive, MonotoneOpSpec};

/// Uniform point in `[-scale, scale]^dim`.
pub fn uniform_point<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Point {
    Point::from_fn(dim, |_| rng.random_range(-scale..=scale))
}

pub fn gaussian_point<R: Rng>(rng: &mut R, dim: usize) -> Point {
    Point::from_fn(dim, |_| rng.sample(StandardNormal))
}

/// Matrix with independent standard normal entries.
pub fn gaussian_linop<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> LinOp {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    LinOp::new(rows, cols, data).expect("finite gaussian entries")
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`), so `LᵀL = Id`.
pub fn random_isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> LinOp {
    assert!(rows >= cols, "an isometry R^{cols} → R^{rows} needs rows ≥ cols");
    loop {
        let span: Vec<Point> = (0..cols).map(|_| gaussian_point(rng, rows)).collect();
        if let Ok(v) = Subspace::new(rows, &span) {
            if v.dim() == cols {
                return LinOp::from_columns(v.basis()).expect("orthonormal columns");
            }
        }
    }
}

pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> LinOp {
    random_isometry(rng, n, n)
}

fn uniform_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Random monotone operator `M = BBᵀ/n + (S − Sᵀ)/2`.
fn random_monotone_matrix<R: Rng>(rng: &mut R, n: usize) -> LinOp {
    let b = gaussian_linop(rng, n, n);
    let s = gaussian_linop(rng, n, n);
    let data = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let sym: f64 = (0..n).map(|k| b.get(i, k) * b.get(j, k)).sum::<f64>() / n as f64;
            sym + 0.5 * (s.get(i, j) - s.get(j, i))
        })
        .collect();
    LinOp::new(n, n, data).expect("finite entries")
}

/// A box, sometimes with infinite faces.
fn random_box<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lower = uniform_vec(rng, n, -2.0, 1.0);
    let mut upper: Vec<f64> = lower.iter().map(|l| l + rng.random_range(0.0..=3.0)).collect();
    for k in 0..n {
        if rng.random_bool(0.15) {
            lower[k] = f64::NEG_INFINITY;
        }
        if rng.random_bool(0.15) {
            upper[k] = f64::INFINITY;
        }
    }
    (lower, upper)
}

fn random_interval_around_zero<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    (uniform_vec(rng, n, -2.0, 0.0), uniform_vec(rng, n, 0.0, 2.0))
}

/// A convex catalog entry on `R^n`.
pub fn random_convex<R: Rng>(rng: &mut R, n: usize) -> ConvexFnSpec {
    use ConvexFnSpec::*;
    let base = match rng.random_range(0..7) {
        0 => Quadratic {
            alpha: rng.random_range(0.2..=3.0),
            center: uniform_vec(rng, n, -2.0, 2.0),
        },
        1 => QuadraticKernel,
        2 => AbsSum {
            weights: uniform_vec(rng, n, 0.0, 2.0),
        },
        3 => {
            let (lower, upper) = random_box(rng, n);
            IndicatorBox { lower, upper }
        }
        4 => IndicatorBall {
            center: uniform_vec(rng, n, -1.0, 1.0),
            radius: rng.random_range(0.1..=2.0),
        },
        5 => {
            let (lower, upper) = random_interval_around_zero(rng, n);
            SupportInterval { lower, upper }
        }
        _ => Linear {
            a: uniform_vec(rng, n, -2.0, 2.0),
            beta: rng.random_range(-1.0..=1.0),
        },
    };
    if rng.random_bool(0.25) {
        ConvexFnSpec::conjugate_of(base)
    } else {
        base
    }
}

/// A monotone catalog entry on `R^n`, possibly wrapped in an inverse or a scaling.
pub fn random_monotone<R: Rng>(rng: &mut R, n: usize) -> MonotoneOpSpec {
    use MonotoneOpSpec::*;
    let variants = if n == 2 { 11 } else { 10 };
    let base = match rng.random_range(0..variants) {
        0 => Zero,
        1 => ScaledIdentity {
            alpha: rng.random_range(0.0..=3.0),
        },
        2 => {
            let (lower, upper) = random_box(rng, n);
            NormalConeBox { lower, upper }
        }
        3 => NormalConeBall {
            center: uniform_vec(rng, n, -1.0, 1.0),
            radius: rng.random_range(0.1..=2.0),
        },
        4 => {
            let k = rng.random_range(1..=n);
            let span: Vec<Point> = (0..k).map(|_| gaussian_point(rng, n)).collect();
            NormalConeAffine {
                translate: uniform_point(rng, n, 1.0),
                subspace: Subspace::new(n, &span).unwrap_or_else(|_| Subspace::full(n)),
            }
        }
        5 => {
            let (lower, upper) = random_interval_around_zero(rng, n);
            SubdiffSupportInterval { lower, upper }
        }
        6 => AffineMonotone {
            matrix: random_monotone_matrix(rng, n),
            offset: uniform_vec(rng, n, -1.0, 1.0),
        },
        7 => WienerResidual {
            t: if rng.random_bool(0.5) {
                FirmlyNonexpansive::clip(rng.random_range(0.5..=2.0))
            } else {
                FirmlyNonexpansive::ProjectBall {
                    center: vec![0.0; n],
                    radius: rng.random_range(0.5..=2.0),
                }
            },
            offset: uniform_vec(rng, n, -0.5, 0.5),
        },
        8 | 9 => SubdiffOf {
            f: random_convex(rng, n),
        },
        _ => Rotation90,
    };
    let wiener = matches!(base, WienerResidual { .. });
    match rng.random_range(0..6) {
        0 => base.inverse(),
        1 if !wiener => base.scaled(rng.random_range(0.3..=3.0)),
        _ => base,
    }
}

/// Shape limits for random families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyShape {
    pub max_x_dim: usize,
    pub max_atoms: usize,
    pub max_rows: usize,
}

impl Default for FamilyShape {
    fn default() -> Self {
        FamilyShape {
            max_x_dim: 8,
            max_atoms: 6,
            max_rows: 8,
        }
    }
}

fn random_family<R: Rng, P: Payload>(
    rng: &mut R,
    shape: FamilyShape,
    mut payload: impl FnMut(&mut R, usize) -> P,
) -> MixtureFamily<P> {
    let x_dim = rng.random_range(1..=shape.max_x_dim);
    let count = rng.random_range(1..=shape.max_atoms);
    let atoms: Vec<Atom<P>> = (0..count)
        .map(|_| {
            let rows = rng.random_range(1..=shape.max_rows);
            let l = gaussian_linop(rng, rows, x_dim);
            Atom::new(rng.random_range(0.1..=1.0), l, payload(rng, rows))
        })
        .collect();
    let raw = MixtureFamily::new(x_dim, atoms).expect("generated atoms are well formed");
    // target mass in [0.3, 1]
    let target = rng.random_range(0.3..=1.0);
    let c = target / raw.mass();
    let atoms = raw
        .atoms()
        .iter()
        .map(|a| Atom::new(a.weight * c, a.linop.clone(), a.payload.clone()))
        .collect();
    MixtureFamily::new(x_dim, atoms).expect("rescaled weights stay positive")
}

/// Admissible operator family with Gaussian linear maps.
pub fn random_operator_family<R: Rng>(rng: &mut R, shape: FamilyShape) -> OperatorFamily {
    random_family(rng, shape, random_monotone)
}

/// Admissible function family with Gaussian linear maps.
pub fn random_function_family<R: Rng>(rng: &mut R, shape: FamilyShape) -> FunctionFamily {
    random_family(rng, shape, random_convex)
}

/// Random probability weights.
pub fn probability_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..=1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|r| r / s).collect();
    // push the rounding residue into the last weight
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    w
}

/// Probability family whose maps are isometries `R^x_dim → R^rows`.
pub fn random_isometric_family<R: Rng, P: Payload>(
    rng: &mut R,
    shape: FamilyShape,
    mut payload: impl FnMut(&mut R, usize) -> P,
) -> MixtureFamily<P> {
    let x_dim = rng.random_range(1..=shape.max_x_dim);
    let count = rng.random_range(1..=shape.max_atoms);
    let weights = probability_weights(rng, count);
    let atoms = weights
        .into_iter()
        .map(|w| {
            let rows = rng.random_range(x_dim..=shape.max_rows.max(x_dim));
            let l = random_isometry(rng, rows, x_dim);
            Atom::new(w, l, payload(rng, rows))
        })
        .collect();
    MixtureFamily::new(x_dim, atoms).expect("isometric family is well formed")
}

/// Probability family with every `L = Id`.
pub fn random_expectation_family<R: Rng, P: Payload>(
    rng: &mut R,
    shape: FamilyShape,
    mut payload: impl FnMut(&mut R, usize) -> P,
) -> MixtureFamily<P> {
    let x_dim = rng.random_range(1..=shape.max_x_dim);
    let count = rng.random_range(1..=shape.max_atoms);
    let atoms = probability_weights(rng, count)
        .into_iter()
        .map(|w| Atom::new(w, LinOp::identity(x_dim), payload(rng, x_dim)))
        .collect();
    MixtureFamily::new(x_dim, atoms).expect("expectation family is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isometries_are_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let l = random_isometry(&mut rng, 6, 4);
            let x = gaussian_point(&mut rng, 4);
            let y = l.apply(&x).unwrap();
            assert!((y.norm() - x.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn generated_families_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let f = random_operator_family(&mut rng, FamilyShape::default());
            let d = f.validate().unwrap();
            assert!(d.mass >= 0.3 - 1e-9 && d.mass <= 1.0 + 1e-12);
            let g = random_function_family(&mut rng, FamilyShape::default());
            g.validate().unwrap();
            let h = random_isometric_family(&mut rng, FamilyShape::default(), random_monotone);
            assert!(h.is_probability());
            assert!((h.mass() - 1.0).abs() < 1e-12);
            let e = random_expectation_family(&mut rng, FamilyShape::default(), random_convex);
            assert!(e.is_probability());
        }
    }

    #[test]
    fn same_seed_same_family() {
        let a = random_operator_family(&mut ChaCha8Rng::seed_from_u64(9), FamilyShape::default());
        let b = random_operator_family(&mut ChaCha8Rng::seed_from_u64(9), FamilyShape::default());
        assert_eq!(a, b);
    }
}
