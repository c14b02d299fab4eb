//! Resolvent and proximal mixtures over a finite family of atoms.
//!
//! An atom is a triple `(w, L, A)` with weight `w > 0`, a linear map
//! `L: X → H`, and either a monotone operator or a convex function on `H`.
//! With `J_A` the resolvent of each atom the module evaluates
//!
//! * the mixture resolvent `J_W x = Σ w Lᵀ J_A(L x)`,
//! * the comixture resolvent `J_C x = x + Σ w (Lᵀ J_A(L x) − Lᵀ L x)`,
//!
//! their Yosida approximations, the analogous proxes, envelopes and values
//! of proximal mixtures, and the expectation special case (`L = Id`,
//! weights summing to one).
//!
//! Every operation requires the mass condition `0 < Σ w ‖L‖² ≤ 1`. Atom
//! terms are summed in ascending index order so results are bit-stable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::convex::ConvexFnSpec;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{LinOp, Point};
use crate::monotone::MonotoneOpSpec;
use crate::oracle::{grid_conjugate, GridSpec, DEFAULT_POINTS};

/// Slack on the upper mass bound.
pub const MASS_SLACK: f64 = 1e-12;
/// Tolerance on `Σ w = 1` for the probability flag.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Payloads an atom can carry.
pub trait Payload: Clone {
    /// Dimension the payload is pinned to, if any.
    fn payload_dim(&self) -> Option<usize>;
    fn validate_payload(&self) -> Result<()>;
}

impl Payload for MonotoneOpSpec {
    fn payload_dim(&self) -> Option<usize> {
        self.dim()
    }
    fn validate_payload(&self) -> Result<()> {
        self.validate()
    }
}

impl Payload for ConvexFnSpec {
    fn payload_dim(&self) -> Option<usize> {
        self.dim()
    }
    fn validate_payload(&self) -> Result<()> {
        self.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom<P> {
    pub weight: f64,
    pub linop: LinOp,
    pub payload: P,
}

impl<P> Atom<P> {
    pub fn new(weight: f64, linop: LinOp, payload: P) -> Self {
        Atom {
            weight,
            linop,
            payload,
        }
    }
}

/// A finite, structurally valid family of atoms sharing the domain `X = R^x_dim`.
///
/// Construction checks structure only. The mass condition is checked by
/// [`MixtureFamily::validate`] and by every evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFamily<P> {
    x_dim: usize,
    atoms: Vec<Atom<P>>,
    norms_sq: Vec<f64>,
    mass: f64,
    probability: bool,
}

pub type OperatorFamily = MixtureFamily<MonotoneOpSpec>;
pub type FunctionFamily = MixtureFamily<ConvexFnSpec>;

/// Outcome of a successful [`MixtureFamily::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyDiagnostics {
    pub atoms: usize,
    pub mass: f64,
    pub probability: bool,
}

/// Mixture or comixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Mixture,
    Comixture,
}

impl<P: Payload> MixtureFamily<P> {
    pub fn new(x_dim: usize, atoms: Vec<Atom<P>>) -> Result<Self> {
        if x_dim == 0 {
            return Err(Error::InvalidParameter("x_dim must be positive".into()));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("a family needs at least one atom".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.weight.is_finite() && a.weight > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "atom {i}: weight must be finite and > 0 (got {})",
                    a.weight
                )));
            }
            check_dim("atom linop columns", x_dim, a.linop.cols())?;
            if let Some(d) = a.payload.payload_dim() {
                check_dim("atom payload vs linop rows", a.linop.rows(), d)?;
            }
            a.payload.validate_payload()?;
        }
        let norms_sq: Vec<f64> = atoms.iter().map(|a| a.linop.operator_norm().powi(2)).collect();
        Ok(Self::assemble(x_dim, atoms, norms_sq))
    }

    /// Family on `R^x_dim` with every `L = Id`.
    pub fn with_identity_maps(x_dim: usize, weighted: Vec<(f64, P)>) -> Result<Self> {
        let atoms = weighted
            .into_iter()
            .map(|(w, p)| Atom::new(w, LinOp::identity(x_dim), p))
            .collect();
        MixtureFamily::new(x_dim, atoms)
    }

    fn assemble(x_dim: usize, atoms: Vec<Atom<P>>, norms_sq: Vec<f64>) -> Self {
        let mass = atoms.iter().zip(&norms_sq).map(|(a, n)| a.weight * n).sum();
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        MixtureFamily {
            x_dim,
            atoms,
            norms_sq,
            mass,
            probability: (total - 1.0).abs() <= PROBABILITY_TOL,
        }
    }

    pub fn x_dim(&self) -> usize {
        self.x_dim
    }

    pub fn atoms(&self) -> &[Atom<P>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `Σ w ‖L‖²`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `‖L_i‖²` per atom.
    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Checks `0 < Σ w ‖L‖² ≤ 1 + MASS_SLACK`.
    pub fn validate(&self) -> Result<FamilyDiagnostics> {
        if self.atoms.iter().all(|a| a.linop.is_zero()) || self.mass <= 0.0 {
            return Err(Error::Inadmissible {
                clause: "every L_i is zero (lower bound 0 < mass)",
                mass: self.mass,
            });
        }
        if self.mass > 1.0 + MASS_SLACK {
            return Err(Error::Inadmissible {
                clause: "mass exceeds 1",
                mass: self.mass,
            });
        }
        Ok(FamilyDiagnostics {
            atoms: self.len(),
            mass: self.mass,
            probability: self.probability,
        })
    }

    /// Scales every `L_i` by `1/√mass` when the mass exceeds one.
    ///
    /// This yields a different operator: it is an explicit opt-in, never
    /// applied implicitly.
    pub fn rescale_to_admissible(&self) -> Result<Self> {
        if self.atoms.iter().all(|a| a.linop.is_zero()) {
            return Err(Error::Inadmissible {
                clause: "every L_i is zero (lower bound 0 < mass)",
                mass: self.mass,
            });
        }
        if self.mass <= 1.0 + MASS_SLACK {
            return Ok(self.clone());
        }
        let c = 1.0 / self.mass.sqrt();
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.weight, a.linop.scaled(c), a.payload.clone()))
            .collect();
        let norms = self.norms_sq.iter().map(|n| n * c * c).collect();
        Ok(Self::assemble(self.x_dim, atoms, norms))
    }

    /// Same weights and maps, payloads transformed by `f`.
    pub fn map_payloads<Q: Payload>(&self, f: impl Fn(&P) -> Q) -> MixtureFamily<Q> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.weight, a.linop.clone(), f(&a.payload)))
            .collect();
        MixtureFamily::assemble(self.x_dim, atoms, self.norms_sq.clone())
    }

    fn ready(&self, x: &Point) -> Result<()> {
        self.validate()?;
        check_dim("mixture argument", self.x_dim, x.dim())?;
        if !x.is_finite() {
            return Err(Error::NonFinite("mixture argument"));
        }
        Ok(())
    }

    fn ready_expectation(&self, x: &Point) -> Result<()> {
        if !self.probability {
            return Err(Error::NotProbability {
                sum: self.total_weight(),
            });
        }
        if let Some(i) = self.atoms.iter().position(|a| !a.linop.is_identity()) {
            return Err(Error::NotIdentityLinop { atom: i });
        }
        self.ready(x)
    }

    /// `Σ w Lᵀ term(atom, L x)`, ascending atom order.
    fn sum_atoms(
        &self,
        x: &Point,
        mut term: impl FnMut(&P, &Point) -> Result<Point>,
    ) -> Result<Point> {
        let mut acc = Point::zeros(self.x_dim);
        for a in &self.atoms {
            let y = a.linop.apply_unchecked(x);
            let t = term(&a.payload, &y)?;
            acc.axpy(a.weight, &a.linop.adjoint_apply_unchecked(&t));
        }
        Ok(acc)
    }
}

impl OperatorFamily {
    /// `J_W x = Σ w Lᵀ J_A(L x)`.
    pub fn resolvent_mixture(&self, x: &Point) -> Result<Point> {
        self.ready(x)?;
        self.sum_atoms(x, |a, y| a.resolvent_unchecked(1.0, y))
    }

    /// `J_C x = x + Σ w (Lᵀ J_A(L x) − Lᵀ L x)`.
    pub fn resolvent_comixture(&self, x: &Point) -> Result<Point> {
        self.ready(x)?;
        let mut out = self.sum_atoms(x, |a, y| Ok(a.resolvent_unchecked(1.0, y)?.sub(y)))?;
        out.axpy(1.0, x);
        Ok(out)
    }

    /// Yosida approximation at index one.
    ///
    /// The mixture side is `x − Σ w Lᵀ (A⁻¹ Yosida)(L x)`; the comixture side
    /// is `Σ w Lᵀ (A Yosida)(L x)`. Neither calls the resolvent of `W` or `C`.
    pub fn yosida_mixture(&self, side: Side, x: &Point) -> Result<Point> {
        self.ready(x)?;
        match side {
            Side::Mixture => {
                let s = self.sum_atoms(x, |a, y| {
                    // (A⁻¹)_1 (y) = y − J_{A⁻¹} y
                    let inv = MonotoneOpSpec::Inverse {
                        of: Box::new(a.clone()),
                    };
                    inv.yosida_unchecked(1.0, y)
                })?;
                Ok(x.sub(&s))
            }
            Side::Comixture => self.sum_atoms(x, |a, y| a.yosida_unchecked(1.0, y)),
        }
    }

    /// `‖(C Yosida)(x)‖`; zero exactly on `zer C`.
    pub fn zeros_residual(&self, x: &Point) -> Result<f64> {
        Ok(self.yosida_mixture(Side::Comixture, x)?.norm())
    }

    /// Resolvent of the expectation: `Σ w J_A(x)` with every `L = Id`.
    pub fn resolvent_expectation(&self, x: &Point) -> Result<Point> {
        self.ready_expectation(x)?;
        let mut acc = Point::zeros(self.x_dim);
        for a in &self.atoms {
            acc.axpy(a.weight, &a.payload.resolvent_unchecked(1.0, x)?);
        }
        Ok(acc)
    }

    /// Every payload replaced by its inverse.
    pub fn inverse_family(&self) -> OperatorFamily {
        self.map_payloads(|a| a.clone().inverse())
    }

    /// Every payload replaced by `γ A`.
    pub fn scaled_family(&self, gamma: f64) -> OperatorFamily {
        self.map_payloads(|a| a.clone().scaled(gamma))
    }

    /// Graph point `(J_W u, u − J_W u)` of `W`.
    pub fn mixture_graph(&self, u: &Point) -> Result<(Point, Point)> {
        let p = self.resolvent_mixture(u)?;
        let v = u.sub(&p);
        Ok((p, v))
    }

    /// Graph point `(J_C u, u − J_C u)` of `C`.
    pub fn comixture_graph(&self, u: &Point) -> Result<(Point, Point)> {
        let p = self.resolvent_comixture(u)?;
        let v = u.sub(&p);
        Ok((p, v))
    }
}

impl<P: Payload> MixtureFamily<P> {
    /// Cocoercivity constant `δ = (τ + 1)/mass − 1` of `C` when every
    /// `A_i` is `τ`-cocoercive.
    pub fn cocoercivity_constant(&self, tau: f64) -> Result<f64> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!("τ must be > 0, got {tau}")));
        }
        self.validate()?;
        Ok((tau + 1.0) / self.mass - 1.0)
    }

    /// `Σ w ‖L‖² β` for per-atom Lipschitz constants `β`.
    pub fn lipschitz_constant(&self, betas: &[f64]) -> Result<f64> {
        check_dim("per-atom Lipschitz constants", self.len(), betas.len())?;
        if betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidParameter("Lipschitz constants must be finite and ≥ 0".into()));
        }
        self.validate()?;
        Ok(self
            .atoms
            .iter()
            .zip(&self.norms_sq)
            .zip(betas)
            .map(|((a, n), b)| a.weight * n * b)
            .sum())
    }
}

impl FunctionFamily {
    /// `Σ w Lᵀ prox_f(L x)`.
    pub fn prox_mixture(&self, x: &Point) -> Result<Point> {
        self.ready(x)?;
        self.sum_atoms(x, |f, y| Ok(f.prox_unchecked(1.0, y)))
    }

    /// `x − Σ w Lᵀ prox_{f*}(L x)`.
    pub fn prox_comixture(&self, x: &Point) -> Result<Point> {
        self.ready(x)?;
        let s = self.sum_atoms(x, |f, y| Ok(f.conjugate().prox_unchecked(1.0, y)))?;
        Ok(x.sub(&s))
    }

    /// Moreau envelope of the proximal comixture: `Σ w (f □ Q)(L x)`.
    pub fn envelope_comixture(&self, x: &Point) -> Result<f64> {
        self.ready(x)?;
        Ok(self
            .atoms
            .iter()
            .map(|a| a.weight * a.payload.envelope_unchecked(&a.linop.apply_unchecked(x)))
            .sum())
    }

    /// Moreau envelope of the proximal mixture at `x`.
    ///
    /// Evaluated in primal form: with `x_i = prox_{f_i}(L_i x)` and
    /// `p = Σ w L_iᵀ x_i` (the mixture prox), the mixture takes the value
    /// `Σ w (f_i(x_i) + ‖x_i‖²/2) − ‖p‖²/2` at `p`, and the envelope is that
    /// value plus `‖x − p‖²/2`.
    pub fn envelope_mixture(&self, x: &Point) -> Result<f64> {
        let (p, value) = self.mixture_value_at_prox(x)?;
        Ok(value + 0.5 * x.dist(&p).powi(2))
    }

    /// The mixture prox `p` of `x` together with the mixture value at `p`.
    pub fn mixture_value_at_prox(&self, x: &Point) -> Result<(Point, f64)> {
        self.ready(x)?;
        let mut p = Point::zeros(self.x_dim);
        let mut total = 0.0;
        for a in &self.atoms {
            let xi = a.payload.prox_unchecked(1.0, &a.linop.apply_unchecked(x));
            total += a.weight * (a.payload.value_unchecked(&xi) + 0.5 * xi.norm_sq());
            p.axpy(a.weight, &a.linop.adjoint_apply_unchecked(&xi));
        }
        let value = total - 0.5 * p.norm_sq();
        Ok((p, value))
    }

    /// Value of the proximal mixture by grid conjugation of
    /// `y ↦ Σ w (f* □ Q)(L y)`, minus `‖x‖²/2`.
    ///
    /// Defaults to the box `[-R, R]^n`, `R = 3(‖x‖∞ + 1)`, with 2001 points
    /// per axis. Accuracy is of the order of the grid step. A maximizer on
    /// the box boundary is reported as [`Error::BoundaryAttained`].
    pub fn mixture_value(&self, x: &Point, grid: Option<&GridSpec>) -> Result<f64> {
        self.ready(x)?;
        if self.x_dim > 2 {
            return Err(Error::Unsupported(format!(
                "mixture_value grids are limited to dims ≤ 2 (got {})",
                self.x_dim
            )));
        }
        let default;
        let g = match grid {
            Some(g) => g,
            None => {
                default = GridSpec::symmetric(self.x_dim, 3.0 * (x.norm_inf() + 1.0), DEFAULT_POINTS)?;
                &default
            }
        };
        let conj: Vec<ConvexFnSpec> = self.atoms.iter().map(|a| a.payload.conjugate()).collect();
        let smooth = |y: &Point| -> f64 {
            self.atoms
                .iter()
                .zip(&conj)
                .map(|(a, c)| a.weight * c.envelope_unchecked(&a.linop.apply_unchecked(y)))
                .sum()
        };
        let m = grid_conjugate(smooth, g, x)?;
        if m.at_boundary {
            return Err(Error::BoundaryAttained);
        }
        Ok(m.value - 0.5 * x.norm_sq())
    }

    /// Prox of the proximal expectation: `Σ w prox_f(x)` with every `L = Id`.
    pub fn proximal_expectation_prox(&self, x: &Point) -> Result<Point> {
        self.ready_expectation(x)?;
        let mut acc = Point::zeros(self.x_dim);
        for a in &self.atoms {
            acc.axpy(a.weight, &a.payload.prox_unchecked(1.0, x));
        }
        Ok(acc)
    }

    /// Every payload replaced by its conjugate.
    pub fn conjugate_family(&self) -> FunctionFamily {
        self.map_payloads(|f| f.conjugate())
    }

    /// Every payload replaced by its subdifferential, as a `SubdiffOf` wrapper.
    pub fn subdifferential_family(&self) -> OperatorFamily {
        self.map_payloads(|f| MonotoneOpSpec::subdiff(f.clone()))
    }
}

#[derive(Serialize)]
struct RawFamilyRef<'a, P> {
    x_dim: usize,
    atoms: &'a [Atom<P>],
    probability: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily<P> {
    x_dim: usize,
    atoms: Vec<Atom<P>>,
    #[serde(default)]
    probability: Option<bool>,
}

impl<P: Payload + Serialize> Serialize for MixtureFamily<P> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawFamilyRef {
            x_dim: self.x_dim,
            atoms: &self.atoms,
            probability: self.probability,
        }
        .serialize(s)
    }
}

impl<'de, P: Payload + Deserialize<'de>> Deserialize<'de> for MixtureFamily<P> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawFamily::<P>::deserialize(d)?;
        let fam = MixtureFamily::new(raw.x_dim, raw.atoms).map_err(D::Error::custom)?;
        if raw.probability == Some(true) && !fam.probability {
            return Err(D::Error::custom(
                Error::NotProbability {
                    sum: fam.total_weight(),
                }
                .to_string(),
            ));
        }
        Ok(fam)
    }
}

/// Family from quadrature nodes `(weight, parameter)`.
pub fn quadrature_family<P: Payload>(
    x_dim: usize,
    nodes: &[(f64, f64)],
    mut make: impl FnMut(f64) -> (LinOp, P),
) -> Result<MixtureFamily<P>> {
    let atoms = nodes
        .iter()
        .map(|&(w, t)| {
            let (l, p) = make(t);
            Atom::new(w, l, p)
        })
        .collect();
    MixtureFamily::new(x_dim, atoms)
}

/// Family of `n` seeded Monte-Carlo samples with weights `1/n`.
pub fn monte_carlo_family<P: Payload>(
    x_dim: usize,
    n: usize,
    seed: u64,
    mut sample: impl FnMut(&mut ChaCha8Rng) -> (LinOp, P),
) -> Result<MixtureFamily<P>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 1.0 / n as f64;
    let atoms = (0..n)
        .map(|_| {
            let (l, p) = sample(&mut rng);
            Atom::new(w, l, p)
        })
        .collect();
    MixtureFamily::new(x_dim, atoms)
}

/// One row of an identity check: the largest residual seen over the samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub identity: String,
    pub max_error: f64,
    pub threshold: f64,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub cocoercivity: f64,
    pub lipschitz: f64,
}

/// Residual table of a family or of a whole verification run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MixtureReport {
    pub seed: Option<u64>,
    pub residuals: Vec<ResidualRow>,
    pub constants: Option<Constants>,
}

impl MixtureReport {
    pub fn with_seed(seed: u64) -> Self {
        MixtureReport {
            seed: Some(seed),
            ..Default::default()
        }
    }

    /// Folds one sample into the row named `identity`, creating it if needed.
    /// NaN errors count as failures.
    pub fn record(&mut self, identity: &str, error: f64, threshold: f64) {
        let err = if error.is_nan() { f64::INFINITY } else { error.abs() };
        match self.residuals.iter_mut().find(|r| r.identity == identity) {
            Some(row) => {
                row.max_error = row.max_error.max(err);
                row.samples += 1;
                row.passed = row.max_error <= row.threshold;
            }
            None => self.residuals.push(ResidualRow {
                identity: identity.to_string(),
                max_error: err,
                threshold,
                samples: 1,
                passed: err <= threshold,
            }),
        }
    }

    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualRow> {
        self.residuals.iter().filter(|r| !r.passed)
    }

    pub fn max_error(&self) -> f64 {
        self.residuals.iter().map(|r| r.max_error).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use MonotoneOpSpec as M;

    fn id1() -> LinOp {
        LinOp::identity(1)
    }

    fn single<P: Payload>(p: P) -> MixtureFamily<P> {
        MixtureFamily::new(1, vec![Atom::new(1.0, id1(), p)]).unwrap()
    }

    fn p1(v: f64) -> Point {
        Point::from([v])
    }

    fn soft_threshold_family() -> OperatorFamily {
        let atoms = (0..2)
            .map(|k| {
                Atom::new(0.5, LinOp::functional(&Point::basis(2, k)), M::support_interval(-1.0, 1.0))
            })
            .collect();
        MixtureFamily::new(2, atoms).unwrap()
    }

    #[test]
    fn validation_examples() {
        let two = |w: f64| {
            MixtureFamily::new(
                2,
                vec![Atom::new(w, LinOp::identity(2), M::Zero), Atom::new(w, LinOp::identity(2), M::Zero)],
            )
            .unwrap()
        };
        assert!(two(0.5).validate().unwrap().probability);
        match two(1.0).validate() {
            Err(Error::Inadmissible { mass, .. }) => assert_abs_diff_eq!(mass, 2.0, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
        let d = two(0.25).validate().unwrap();
        assert_abs_diff_eq!(d.mass, 0.5, epsilon = 1e-12);
        assert!(!d.probability);

        let rot = LinOp::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let f = MixtureFamily::new(
            2,
            vec![Atom::new(0.5, LinOp::identity(2), M::Zero), Atom::new(0.5, rot, M::Zero)],
        )
        .unwrap();
        let d = f.validate().unwrap();
        assert_abs_diff_eq!(d.mass, 1.0, epsilon = 1e-12);
        assert!(d.probability);

        let zero = MixtureFamily::new(1, vec![Atom::new(1.0, LinOp::zeros(1, 1), M::Zero)]).unwrap();
        assert!(matches!(zero.validate(), Err(Error::Inadmissible { .. })));
        assert!(zero.rescale_to_admissible().is_err());
        assert!(zero.resolvent_mixture(&p1(1.0)).is_err());
    }

    #[test]
    fn structural_errors() {
        assert!(MixtureFamily::<M>::new(1, vec![]).is_err());
        assert!(MixtureFamily::new(1, vec![Atom::new(0.0, id1(), M::Zero)]).is_err());
        assert!(MixtureFamily::new(2, vec![Atom::new(1.0, id1(), M::Zero)]).is_err());
        assert!(MixtureFamily::new(1, vec![Atom::new(1.0, id1(), M::Rotation90)]).is_err());
        let f = single(M::Zero);
        assert!(matches!(
            f.resolvent_mixture(&Point::from([1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rescale_examples() {
        let f = single(M::Zero);
        let big = MixtureFamily::new(1, vec![Atom::new(1.0, id1().scaled(2.0), M::Zero)]).unwrap();
        assert_abs_diff_eq!(big.mass(), 4.0, epsilon = 1e-12);
        let r = big.rescale_to_admissible().unwrap();
        assert_abs_diff_eq!(r.mass(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.atoms()[0].linop.get(0, 0), 1.0, epsilon = 1e-12);
        let half = MixtureFamily::new(1, vec![Atom::new(0.5, id1(), M::Zero)]).unwrap();
        assert_eq!(half.rescale_to_admissible().unwrap(), half);
        assert_eq!(f.rescale_to_admissible().unwrap(), f);
    }

    #[test]
    fn resolvent_mixture_examples() {
        let f = single(M::normal_cone_box(0.0, 2.0));
        assert_abs_diff_eq!(f.resolvent_mixture(&p1(5.0)).unwrap()[0], 2.0);

        let j = soft_threshold_family().resolvent_mixture(&Point::from([3.0, -0.5])).unwrap();
        assert_abs_diff_eq!(j[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j[1], 0.0, epsilon = 1e-15);

        let avg = MixtureFamily::new(
            1,
            vec![Atom::new(0.5, id1(), M::Zero), Atom::new(0.5, id1(), M::Zero.inverse())],
        )
        .unwrap();
        assert_abs_diff_eq!(avg.resolvent_mixture(&p1(4.0)).unwrap()[0], 2.0);
        assert_abs_diff_eq!(avg.resolvent_expectation(&p1(4.0)).unwrap()[0], 2.0);
    }

    #[test]
    fn resolvent_comixture_examples() {
        let f = single(M::ScaledIdentity { alpha: 1.0 });
        assert_abs_diff_eq!(f.resolvent_comixture(&p1(4.0)).unwrap()[0], 2.0);
        // J_C = Id − J_{W'} with W' the mixture of inverses
        let fam = soft_threshold_family();
        let x = Point::from([0.7, -2.5]);
        let jc = fam.resolvent_comixture(&x).unwrap();
        let dual = x.sub(&fam.inverse_family().resolvent_mixture(&x).unwrap());
        assert!(jc.max_abs_diff(&dual) < 1e-12);
    }

    #[test]
    fn yosida_examples() {
        let zero = MixtureFamily::new(
            2,
            vec![Atom::new(0.3, LinOp::identity(2), M::Zero), Atom::new(0.2, LinOp::identity(2), M::Zero)],
        )
        .unwrap();
        let y = zero.yosida_mixture(Side::Comixture, &Point::from([3.0, 1.0])).unwrap();
        assert_eq!(y.as_slice(), &[0.0, 0.0]);

        let f = single(M::normal_cone_box(-1.0, 1.0));
        assert_abs_diff_eq!(f.yosida_mixture(Side::Comixture, &p1(3.0)).unwrap()[0], 2.0);

        let fam = soft_threshold_family();
        let x = Point::from([2.2, -0.1]);
        let lhs = fam.yosida_mixture(Side::Mixture, &x).unwrap();
        let rhs = x.sub(&fam.resolvent_mixture(&x).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn zeros_residual_examples() {
        let halfspace = |lo: f64, hi: f64| M::NormalConeBox {
            lower: vec![lo, f64::NEG_INFINITY],
            upper: vec![hi, f64::INFINITY],
        };
        let fam = MixtureFamily::new(
            2,
            vec![
                Atom::new(0.5, LinOp::identity(2), halfspace(f64::NEG_INFINITY, 0.0)),
                Atom::new(0.5, LinOp::identity(2), halfspace(1.0, f64::INFINITY)),
            ],
        )
        .unwrap();
        for t in [-3.0, 0.0, 17.0] {
            assert!(fam.zeros_residual(&Point::from([0.5, t])).unwrap() <= 1e-12);
        }
        assert!(fam.zeros_residual(&Point::from([2.0, 0.0])).unwrap() > 0.1);

        let consistent = MixtureFamily::new(
            1,
            vec![
                Atom::new(0.5, id1(), M::normal_cone_box(0.0, 2.0)),
                Atom::new(0.5, id1(), M::normal_cone_box(1.0, 3.0)),
            ],
        )
        .unwrap();
        assert!(consistent.zeros_residual(&p1(1.5)).unwrap() <= 1e-10);
        assert!(consistent.zeros_residual(&p1(5.0)).unwrap() > 0.0);
    }

    #[test]
    fn prox_mixture_examples() {
        let f = single(ConvexFnSpec::abs_sum(1.0));
        assert_abs_diff_eq!(f.prox_mixture(&p1(3.0)).unwrap()[0], 2.0);

        let pair = MixtureFamily::new(
            1,
            vec![
                Atom::new(0.5, id1(), ConvexFnSpec::abs_sum(1.0)),
                Atom::new(0.5, id1(), ConvexFnSpec::conjugate_of(ConvexFnSpec::abs_sum(1.0))),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(pair.prox_mixture(&p1(6.0)).unwrap()[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pair.proximal_expectation_prox(&p1(6.0)).unwrap()[0], 3.0, epsilon = 1e-15);

        let rows = MixtureFamily::new(
            2,
            (0..2)
                .map(|k| Atom::new(0.5, LinOp::functional(&Point::basis(2, k)), ConvexFnSpec::abs_sum(1.0)))
                .collect(),
        )
        .unwrap();
        let p = rows.prox_mixture(&Point::from([3.0, -0.5])).unwrap();
        assert_abs_diff_eq!(p[0], 1.0);
        assert_abs_diff_eq!(p[1], 0.0);
    }

    #[test]
    fn prox_comixture_examples() {
        let ball = ConvexFnSpec::IndicatorBall {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let f = MixtureFamily::new(2, vec![Atom::new(1.0, LinOp::identity(2), ball)]).unwrap();
        let p = f.prox_comixture(&Point::from([0.0, 2.0])).unwrap();
        assert!(p.max_abs_diff(&Point::from([0.0, 1.0])) < 1e-15);

        let q = MixtureFamily::new(
            1,
            vec![
                Atom::new(0.5, id1(), ConvexFnSpec::QuadraticKernel),
                Atom::new(0.5, id1(), ConvexFnSpec::QuadraticKernel),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(q.prox_comixture(&p1(3.0)).unwrap()[0], 1.5);
    }

    #[test]
    fn envelope_examples() {
        let f = single(ConvexFnSpec::abs_sum(1.0));
        assert_abs_diff_eq!(f.envelope_comixture(&p1(3.0)).unwrap(), 2.5);
        assert_abs_diff_eq!(f.envelope_mixture(&p1(3.0)).unwrap(), 2.5);

        let q = MixtureFamily::new(
            1,
            vec![
                Atom::new(0.5, id1(), ConvexFnSpec::QuadraticKernel),
                Atom::new(0.5, id1(), ConvexFnSpec::QuadraticKernel),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(q.envelope_comixture(&p1(2.0)).unwrap(), 1.0);
        assert_abs_diff_eq!(q.envelope_mixture(&p1(2.0)).unwrap(), 1.0);

        let boxes = MixtureFamily::new(
            1,
            vec![
                Atom::new(0.5, id1(), ConvexFnSpec::indicator_box(0.0, 1.0)),
                Atom::new(0.25, id1(), ConvexFnSpec::indicator_box(2.0, 3.0)),
            ],
        )
        .unwrap();
        // 0.5·½·4² + 0.25·½·2²
        assert_abs_diff_eq!(boxes.envelope_comixture(&p1(5.0)).unwrap(), 4.5);
    }

    #[test]
    fn envelope_partition() {
        let fam = MixtureFamily::new(
            2,
            vec![
                Atom::new(0.3, LinOp::identity(2), ConvexFnSpec::abs_sum(0.7)),
                Atom::new(
                    0.4,
                    LinOp::from_rows(vec![vec![0.5, -0.5]]).unwrap(),
                    ConvexFnSpec::indicator_box(-0.2, 0.4),
                ),
            ],
        )
        .unwrap();
        let x = Point::from([1.3, -2.1]);
        let lhs = fam.envelope_mixture(&x).unwrap() + fam.conjugate_family().envelope_comixture(&x).unwrap();
        assert_abs_diff_eq!(lhs, 0.5 * x.norm_sq(), epsilon = 1e-12);
    }

    #[test]
    fn mixture_value_examples() {
        let q = single(ConvexFnSpec::QuadraticKernel);
        assert_abs_diff_eq!(q.mixture_value(&p1(2.0), None).unwrap(), 2.0, epsilon = 1e-3);
        let a = single(ConvexFnSpec::abs_sum(1.0));
        assert_abs_diff_eq!(a.mixture_value(&p1(3.0), None).unwrap(), 3.0, epsilon = 1e-3);
        let g = GridSpec::symmetric(1, 2.0, 101).unwrap();
        assert_eq!(a.mixture_value(&p1(3.0), Some(&g)), Err(Error::BoundaryAttained));
    }

    #[test]
    fn expectation_examples() {
        let boxes = MixtureFamily::new(
            1,
            vec![
                Atom::new(0.5, id1(), M::normal_cone_box(0.0, 1.0)),
                Atom::new(0.5, id1(), M::normal_cone_box(2.0, 3.0)),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(boxes.resolvent_expectation(&p1(5.0)).unwrap()[0], 2.0);

        let same = MixtureFamily::new(
            1,
            vec![
                Atom::new(0.25, id1(), M::ScaledIdentity { alpha: 3.0 }),
                Atom::new(0.75, id1(), M::ScaledIdentity { alpha: 3.0 }),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(same.resolvent_expectation(&p1(4.0)).unwrap()[0], 1.0, epsilon = 1e-15);

        let light = MixtureFamily::new(1, vec![Atom::new(0.5, id1(), M::Zero)]).unwrap();
        assert!(matches!(light.resolvent_expectation(&p1(1.0)), Err(Error::NotProbability { .. })));
        let rows = MixtureFamily::new(1, vec![Atom::new(1.0, id1().scaled(-1.0), M::Zero)]).unwrap();
        assert!(matches!(rows.resolvent_expectation(&p1(1.0)), Err(Error::NotIdentityLinop { atom: 0 })));
    }

    #[test]
    fn monte_carlo_clip_average() {
        use rand::Rng;
        let fam = monte_carlo_family(1, 1000, 11, |rng| {
            let a = if rng.random_bool(0.5) { 1.0 } else { 2.0 };
            (LinOp::identity(1), ConvexFnSpec::indicator_box(-a, a))
        })
        .unwrap();
        assert!(fam.is_probability());
        let p = fam.proximal_expectation_prox(&p1(3.0)).unwrap()[0];
        let mean: f64 = fam
            .atoms()
            .iter()
            .map(|a| match &a.payload {
                ConvexFnSpec::IndicatorBox { upper, .. } => upper[0] / 1000.0,
                _ => unreachable!(),
            })
            .sum();
        assert_abs_diff_eq!(p, mean, epsilon = 1e-12);
        assert!((p - 1.5).abs() < 0.07);

        let quad = quadrature_family(1, &[(0.5, 1.0), (0.5, 2.0)], |a| {
            (LinOp::identity(1), ConvexFnSpec::indicator_box(-a, a))
        })
        .unwrap();
        assert_abs_diff_eq!(quad.proximal_expectation_prox(&p1(3.0)).unwrap()[0], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn constants() {
        let fam = |w: f64| {
            MixtureFamily::new(
                1,
                vec![
                    Atom::new(w, id1(), M::ScaledIdentity { alpha: 1.0 }),
                    Atom::new(w, id1(), M::ScaledIdentity { alpha: 1.0 }),
                ],
            )
            .unwrap()
        };
        assert_abs_diff_eq!(fam(0.5).cocoercivity_constant(1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fam(0.25).cocoercivity_constant(1.0).unwrap(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fam(0.25).lipschitz_constant(&[1.0, 3.0]).unwrap(), 1.0, epsilon = 1e-12);
        assert!(fam(0.25).lipschitz_constant(&[1.0]).is_err());
        // C = J_C⁻¹ − Id = Id/3 here
        let (p, c) = fam(0.25).comixture_graph(&p1(4.0)).unwrap();
        assert_abs_diff_eq!(c[0], p[0] / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let fam = soft_threshold_family();
        let s = serde_json::to_string(&fam).unwrap();
        assert!(s.contains("\"x_dim\":2"));
        let back: OperatorFamily = serde_json::from_str(&s).unwrap();
        assert_eq!(back, fam);

        let lying = r#"{"x_dim":1,"atoms":[{"weight":0.5,"linop":[[1.0]],"payload":{"type":"zero"}}],"probability":true}"#;
        assert!(serde_json::from_str::<OperatorFamily>(lying).is_err());
        let bad_dim = r#"{"x_dim":2,"atoms":[{"weight":0.5,"linop":[[1.0]],"payload":{"type":"zero"}}]}"#;
        assert!(serde_json::from_str::<OperatorFamily>(bad_dim).is_err());
    }

    #[test]
    fn report_rows() {
        let mut r = MixtureReport::with_seed(3);
        r.record("a", 1e-13, 1e-9);
        r.record("a", -2e-12, 1e-9);
        r.record("b", f64::NAN, 1e-9);
        assert_eq!(r.residuals[0].samples, 2);
        assert_abs_diff_eq!(r.residuals[0].max_error, 2e-12);
        assert!(!r.passed());
        assert_eq!(r.failures().next().unwrap().identity, "b");
    }
}
