//! Command-line front end.
//!
//! Exit codes: 0 success, 1 malformed or inadmissible input, 2 no
//! convergence or a failed check.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::convex::ConvexFnSpec;
use crate::error::Error;
use crate::linalg::{LinOp, Point, Subspace};
use crate::mixtures::{Atom, FunctionFamily, MixtureFamily};
use crate::monotone::{FirmlyNonexpansive, MonotoneOpSpec};
use crate::output::{fmt_f64, to_json, Csv};
use crate::sampling::{gaussian_linop, random_orthogonal, uniform_point};
use crate::solver::{wiener_problem, LambdaSchedule, ProblemSpec, RelaxedProblem, RelaxedResidual, StopRule, WienerAtom};
use crate::verify::{self, Fault, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_UNCONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "proxmix", version, about = "Resolvent and proximal mixtures, expectations, and the relaxed inclusion solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a relaxed inclusion problem read from --input.
    Solve,
    /// Run the seeded identity suite.
    Verify,
    /// Mixture resolvent of an orthonormal-basis family against the weighted soft-threshold.
    DemoSoftthreshold,
    /// Recover a signal from clipped linear observations.
    DemoWiener,
    /// Tabulate the prox and envelope of a proximal average.
    ProxAverage,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// JSON configuration or problem file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Directory for output files; the main JSON goes to stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the command's main tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Constant relaxation parameter in (0, 2).
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Corrupts mixture resolvents by a relative amount (suite self-test).
    #[arg(long, global = true, hide = true)]
    pub inject_fault: Option<f64>,
}

/// Parses `args` and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Diverged { .. }) => EXIT_UNCONVERGED,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    let o = &cli.opts;
    if let Some(t) = o.tol {
        if !(t.is_finite() && t >= 0.0) {
            bail!("--tol must be finite and ≥ 0 (got {t})");
        }
    }
    match cli.command {
        Command::Solve => cmd_solve(o),
        Command::Verify => cmd_verify(o),
        Command::DemoSoftthreshold => cmd_demo_softthreshold(o),
        Command::DemoWiener => cmd_demo_wiener(o),
        Command::ProxAverage => cmd_prox_average(o),
    }
}

#[derive(Debug, Serialize)]
struct Meta<T: Serialize> {
    command: &'static str,
    seed: u64,
    tolerances: T,
    identities: Vec<&'static str>,
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_optional<T: for<'de> Deserialize<'de> + Default>(o: &Opts) -> anyhow::Result<T> {
    match &o.input {
        Some(p) => read_config(p),
        None => Ok(T::default()),
    }
}

/// Writes `name` into the output directory, or to stdout when `primary`
/// and no directory was given.
fn emit(o: &Opts, name: &str, contents: &str, primary: bool) -> anyhow::Result<()> {
    match &o.output {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
        }
        None if primary => {
            print!("{contents}");
            Ok(())
        }
        None => Ok(()),
    }
}

fn trace_csv(meta: &[(&str, String)], steps: &[f64]) -> String {
    let mut csv = Csv::new(meta, &["iter", "step_norm"]);
    for (i, s) in steps.iter().enumerate() {
        csv.floats(&[(i + 1).to_string()], &[*s]);
    }
    csv.into_string()
}

#[derive(Debug, Serialize)]
struct SolveTolerances {
    abs_tol: f64,
    rel_tol: f64,
    max_iter: usize,
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    meta: Meta<SolveTolerances>,
    converged: bool,
    iterations: usize,
    last_step_norm: f64,
    x: Point,
    residual: RelaxedResidual,
    atom_residuals: Vec<f64>,
    mass: f64,
    gamma: f64,
    lambda: LambdaSchedule,
}

fn apply_overrides(p: &mut RelaxedProblem, o: &Opts) -> anyhow::Result<()> {
    let mut stop = p.stop();
    if let Some(t) = o.tol {
        stop.abs_tol = t;
    }
    if let Some(m) = o.max_iter {
        stop.max_iter = m;
    }
    p.set_stop(stop)?;
    if let Some(l) = o.lambda {
        p.set_lambda(LambdaSchedule::Constant(l))?;
    }
    Ok(())
}

fn cmd_solve(o: &Opts) -> anyhow::Result<i32> {
    let Some(path) = &o.input else {
        bail!("solve needs --input <problem.json>");
    };
    let mut spec: ProblemSpec = read_config(path)?;
    if let Some(g) = o.gamma {
        spec.gamma = g;
    }
    let mut p = spec.build().with_context(|| format!("invalid problem in {}", path.display()))?;
    apply_overrides(&mut p, o)?;
    let trace = p.solve()?;
    let stop = p.stop();
    let summary = SolveSummary {
        meta: Meta {
            command: "solve",
            seed: o.seed,
            tolerances: SolveTolerances {
                abs_tol: stop.abs_tol,
                rel_tol: stop.rel_tol,
                max_iter: stop.max_iter,
            },
            identities: vec!["relaxed_iteration", "relaxed_stationarity", "per_atom_exactness"],
        },
        converged: trace.converged,
        iterations: trace.iterations,
        last_step_norm: trace.last_step(),
        atom_residuals: p.exactness_check(&trace.x)?,
        x: trace.x.clone(),
        residual: trace.residual,
        mass: p.family().mass(),
        gamma: p.gamma(),
        lambda: p.lambda().clone(),
    };
    emit(o, "summary.json", &to_json(&summary)?, true)?;
    let meta = [("command", "solve".to_string()), ("seed", o.seed.to_string())];
    emit(o, "trace.csv", &trace_csv(&meta, &trace.step_norms), false)?;
    if !trace.converged {
        eprintln!("solve: no convergence after {} iterations (last step {:e})", trace.iterations, trace.last_step());
        return Ok(EXIT_UNCONVERGED);
    }
    Ok(EXIT_OK)
}

/// Optional sizes for `verify`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyInput {
    pub families: Option<usize>,
    pub points_per_family: Option<usize>,
    pub pairs_per_family: Option<usize>,
    pub oracle_inputs: Option<usize>,
}

#[derive(Debug, Serialize)]
struct VerifyOutput<'a> {
    meta: Meta<verify::Tolerances>,
    passed: bool,
    families: usize,
    fault: Option<Fault>,
    report: &'a crate::mixtures::MixtureReport,
}

fn cmd_verify(o: &Opts) -> anyhow::Result<i32> {
    let input: VerifyInput = read_optional(o)?;
    let mut cfg = VerifyConfig {
        seed: o.seed,
        fault: o.inject_fault.map(Fault::ResolventMixture),
        ..VerifyConfig::default()
    };
    cfg.families = input.families.unwrap_or(cfg.families);
    cfg.points_per_family = input.points_per_family.unwrap_or(cfg.points_per_family);
    cfg.pairs_per_family = input.pairs_per_family.unwrap_or(cfg.pairs_per_family);
    cfg.oracle_inputs = input.oracle_inputs.unwrap_or(cfg.oracle_inputs);
    if let Some(t) = o.tol {
        cfg.tolerances.identity = t;
    }
    let report = verify::run(&cfg)?;
    let out = VerifyOutput {
        meta: Meta {
            command: "verify",
            seed: o.seed,
            tolerances: cfg.tolerances,
            identities: verify::identity_names(),
        },
        passed: report.passed(),
        families: cfg.families,
        fault: cfg.fault,
        report: &report,
    };
    emit(o, "verify.json", &to_json(&out)?, true)?;
    let mut csv = Csv::new(
        &[("command", "verify".into()), ("seed", o.seed.to_string())],
        &["identity", "max_error", "threshold", "samples", "passed"],
    );
    for r in &report.residuals {
        csv.row(&[
            r.identity.clone(),
            fmt_f64(r.max_error),
            fmt_f64(r.threshold),
            r.samples.to_string(),
            r.passed.to_string(),
        ]);
    }
    emit(o, "verify.csv", &csv.into_string(), false)?;
    if !report.passed() {
        for r in report.failures() {
            eprintln!("verify: FAILED {} (max error {:e} > {:e})", r.identity, r.max_error, r.threshold);
        }
        return Ok(EXIT_UNCONVERGED);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Standard,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SoftThresholdConfig {
    pub n: usize,
    /// Per-direction weights; `1/n` each when absent.
    pub weights: Option<Vec<f64>>,
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
    pub basis: Basis,
    /// Extra inputs reported verbatim; defaults to `(3, −0.5, 0, …)`.
    pub points: Option<Vec<Point>>,
}

impl Default for SoftThresholdConfig {
    fn default() -> Self {
        SoftThresholdConfig {
            n: 8,
            weights: None,
            lower: -1.0,
            upper: 1.0,
            samples: 1000,
            basis: Basis::Standard,
            points: None,
        }
    }
}

/// `Σ α_k s_k(⟨x, e_k⟩) e_k` with `s_k(t) = t − ρ` above `ρ`, `t − δ` below `δ`, else 0.
pub fn weighted_soft_threshold(basis: &[Point], weights: &[f64], lower: f64, upper: f64, x: &Point) -> Point {
    let mut out = Point::zeros(x.dim());
    for (e, w) in basis.iter().zip(weights) {
        let t = x.dot(e);
        let s = if t > upper {
            t - upper
        } else if t < lower {
            t - lower
        } else {
            0.0
        };
        out.axpy(w * s, e);
    }
    out
}

/// The orthonormal-basis family: atom `k` is `(α_k, ⟨·, e_k⟩, ∂σ_[δ, ρ])`.
pub fn soft_threshold_family(basis: &[Point], weights: &[f64], lower: f64, upper: f64) -> crate::Result<crate::mixtures::OperatorFamily> {
    let n = basis.first().map_or(0, Point::dim);
    let atoms = basis
        .iter()
        .zip(weights)
        .map(|(e, w)| Atom::new(*w, LinOp::functional(e), MonotoneOpSpec::support_interval(lower, upper)))
        .collect();
    MixtureFamily::new(n, atoms)
}

#[derive(Debug, Serialize)]
struct SoftPair {
    x: Point,
    mixture: Point,
    closed_form: Point,
}

#[derive(Debug, Serialize)]
struct SoftThresholdTolerances {
    agreement: f64,
}

#[derive(Debug, Serialize)]
struct SoftThresholdOutput {
    meta: Meta<SoftThresholdTolerances>,
    config: SoftThresholdConfig,
    mass: f64,
    samples: usize,
    max_error: f64,
    passed: bool,
    points: Vec<SoftPair>,
}

fn cmd_demo_softthreshold(o: &Opts) -> anyhow::Result<i32> {
    let cfg: SoftThresholdConfig = read_optional(o)?;
    let n = cfg.n;
    if n == 0 {
        bail!("n must be positive");
    }
    let weights = cfg.weights.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
    if weights.len() != n {
        bail!("weights has length {} but n = {n}", weights.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let basis: Vec<Point> = match cfg.basis {
        Basis::Standard => (0..n).map(|k| Point::basis(n, k)).collect(),
        Basis::Random => {
            let q = random_orthogonal(&mut rng, n);
            (0..n).map(|k| Point::from_fn(n, |i| q.get(i, k))).collect()
        }
    };
    let family = soft_threshold_family(&basis, &weights, cfg.lower, cfg.upper)?;
    family.validate()?;
    let tol = o.tol.unwrap_or(1e-12);

    let mut max_error: f64 = 0.0;
    let mut csv = Csv::new(
        &[("command", "demo-softthreshold".into()), ("seed", o.seed.to_string())],
        &["sample", "coordinate", "x", "mixture", "closed_form"],
    );
    let mut check = |x: &Point| -> anyhow::Result<SoftPair> {
        let j = family.resolvent_mixture(x)?;
        let c = weighted_soft_threshold(&basis, &weights, cfg.lower, cfg.upper, x);
        max_error = max_error.max(j.max_abs_diff(&c));
        Ok(SoftPair {
            x: x.clone(),
            mixture: j,
            closed_form: c,
        })
    };
    let given = cfg.points.clone().unwrap_or_else(|| {
        let mut v = vec![0.0; n];
        v[0] = 3.0;
        if n > 1 {
            v[1] = -0.5;
        }
        vec![Point::from(v)]
    });
    let points = given.iter().map(&mut check).collect::<anyhow::Result<Vec<_>>>()?;
    let scale = 3.0 * cfg.upper.abs().max(cfg.lower.abs()).max(1.0);
    for s in 0..cfg.samples {
        let x = uniform_point(&mut rng, n, scale);
        let pair = check(&x)?;
        for k in 0..n {
            csv.row(&[
                s.to_string(),
                k.to_string(),
                fmt_f64(pair.x[k]),
                fmt_f64(pair.mixture[k]),
                fmt_f64(pair.closed_form[k]),
            ]);
        }
    }
    let passed = max_error <= tol;
    let out = SoftThresholdOutput {
        meta: Meta {
            command: "demo-softthreshold",
            seed: o.seed,
            tolerances: SoftThresholdTolerances { agreement: tol },
            identities: vec!["mixture_resolvent_equals_weighted_soft_threshold"],
        },
        mass: family.mass(),
        samples: cfg.samples,
        config: cfg,
        max_error,
        passed,
        points,
    };
    emit(o, "softthreshold.json", &to_json(&out)?, true)?;
    emit(o, "softthreshold.csv", &csv.into_string(), false)?;
    Ok(if passed { EXIT_OK } else { EXIT_UNCONVERGED })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinopKind {
    Gaussian,
    Identity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WienerConfig {
    pub atoms: usize,
    pub x_dim: usize,
    pub rows: usize,
    /// `V` is spanned by the first `v_dim` standard basis vectors.
    pub v_dim: usize,
    /// Clipping level of `T`; `None` means `T = Id`.
    pub clip: Option<f64>,
    /// Standard deviation of additive observation noise.
    pub noise: f64,
    pub truth_scale: f64,
    pub linop: LinopKind,
    pub max_iter: usize,
}

impl Default for WienerConfig {
    fn default() -> Self {
        WienerConfig {
            atoms: 20,
            x_dim: 10,
            rows: 3,
            v_dim: 4,
            clip: Some(1.0),
            noise: 0.0,
            truth_scale: 1.0,
            linop: LinopKind::Gaussian,
            max_iter: 10_000,
        }
    }
}

/// Synthetic data for the Wiener demo.
#[derive(Debug, Clone)]
pub struct WienerInstance {
    pub problem: RelaxedProblem,
    pub truth: Point,
    pub atoms: Vec<WienerAtom>,
}

/// Random admissible maps, ground truth in `V`, observations `r = T(L x†)` (+ noise).
pub fn wiener_instance(cfg: &WienerConfig, seed: u64) -> anyhow::Result<WienerInstance> {
    if cfg.atoms == 0 || cfg.x_dim == 0 || cfg.rows == 0 || cfg.v_dim == 0 || cfg.v_dim > cfg.x_dim {
        bail!("need atoms, x_dim, rows ≥ 1 and 1 ≤ v_dim ≤ x_dim");
    }
    if !(cfg.noise.is_finite() && cfg.noise >= 0.0) {
        bail!("noise must be finite and ≥ 0");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = if cfg.linop == LinopKind::Identity { cfg.x_dim } else { cfg.rows };
    let w = 1.0 / cfg.atoms as f64;
    let mut linops: Vec<LinOp> = (0..cfg.atoms)
        .map(|_| match cfg.linop {
            LinopKind::Gaussian => gaussian_linop(&mut rng, rows, cfg.x_dim),
            LinopKind::Identity => LinOp::identity(cfg.x_dim),
        })
        .collect();
    let mass: f64 = linops.iter().map(|l| w * l.operator_norm().powi(2)).sum();
    if mass > 1.0 {
        let c = 1.0 / mass.sqrt();
        linops = linops.iter().map(|l| l.scaled(c)).collect();
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let truth = Point::from_fn(cfg.x_dim, |k| {
        if k < cfg.v_dim {
            cfg.truth_scale * normal.sample(&mut rng)
        } else {
            0.0
        }
    });
    let t = match cfg.clip {
        Some(c) => FirmlyNonexpansive::clip(c),
        None => FirmlyNonexpansive::Identity,
    };
    let atoms: Vec<WienerAtom> = linops
        .into_iter()
        .map(|l| {
            let clean = t.apply(&l.apply_unchecked(&truth));
            let noisy = Point::from_fn(rows, |k| clean[k] + cfg.noise * normal.sample(&mut rng));
            // observations stay in the range of T
            let r = match cfg.clip {
                Some(c) => noisy.map(|v| v.clamp(-c, c)),
                None => noisy,
            };
            WienerAtom {
                weight: w,
                linop: l,
                t: t.clone(),
                offset: r.into_vec(),
            }
        })
        .collect();
    let span: Vec<Point> = (0..cfg.v_dim).map(|k| Point::basis(cfg.x_dim, k)).collect();
    let v = Subspace::new(cfg.x_dim, &span)?;
    let mut problem = wiener_problem(cfg.x_dim, atoms.clone(), v)?;
    problem.set_stop(StopRule {
        max_iter: cfg.max_iter,
        ..StopRule::default()
    })?;
    Ok(WienerInstance { problem, truth, atoms })
}

/// `max_i ‖T(L_i x) − r_i‖`.
pub fn recovery_residual(atoms: &[WienerAtom], x: &Point) -> f64 {
    atoms
        .iter()
        .map(|a| {
            let tx = a.t.apply(&a.linop.apply_unchecked(x));
            Point::from_fn(tx.dim(), |k| tx[k] - a.offset[k]).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Serialize)]
struct WienerOutput {
    meta: Meta<SolveTolerances>,
    config: WienerConfig,
    converged: bool,
    iterations: usize,
    last_step_norm: f64,
    x: Point,
    truth: Point,
    recovery_residual: f64,
    residual: RelaxedResidual,
}

fn cmd_demo_wiener(o: &Opts) -> anyhow::Result<i32> {
    let mut cfg: WienerConfig = read_optional(o)?;
    if let Some(m) = o.max_iter {
        cfg.max_iter = m;
    }
    if o.gamma.is_some_and(|g| g != 1.0) {
        bail!("the Wiener demo is defined for γ = 1 only");
    }
    let mut inst = wiener_instance(&cfg, o.seed)?;
    apply_overrides(&mut inst.problem, o)?;
    let trace = inst.problem.solve()?;
    let stop = inst.problem.stop();
    let out = WienerOutput {
        meta: Meta {
            command: "demo-wiener",
            seed: o.seed,
            tolerances: SolveTolerances {
                abs_tol: stop.abs_tol,
                rel_tol: stop.rel_tol,
                max_iter: stop.max_iter,
            },
            identities: vec!["wiener_iteration", "recovery_residual", "relaxed_stationarity"],
        },
        config: cfg,
        converged: trace.converged,
        iterations: trace.iterations,
        last_step_norm: trace.last_step(),
        recovery_residual: recovery_residual(&inst.atoms, &trace.x),
        x: trace.x.clone(),
        truth: inst.truth,
        residual: trace.residual,
    };
    emit(o, "wiener.json", &to_json(&out)?, true)?;
    let meta = [("command", "demo-wiener".to_string()), ("seed", o.seed.to_string())];
    emit(o, "trace.csv", &trace_csv(&meta, &trace.step_norms), false)?;
    Ok(if trace.converged { EXIT_OK } else { EXIT_UNCONVERGED })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedFn {
    pub weight: f64,
    pub f: ConvexFnSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProxAverageConfig {
    pub functions: Vec<WeightedFn>,
    pub range: [f64; 2],
    pub samples: usize,
}

impl Default for ProxAverageConfig {
    fn default() -> Self {
        ProxAverageConfig {
            functions: vec![
                WeightedFn {
                    weight: 0.5,
                    f: ConvexFnSpec::abs_sum(1.0),
                },
                WeightedFn {
                    weight: 0.5,
                    f: ConvexFnSpec::QuadraticKernel,
                },
            ],
            range: [-5.0, 5.0],
            samples: 101,
        }
    }
}

impl ProxAverageConfig {
    pub fn family(&self) -> crate::Result<FunctionFamily> {
        let fam = MixtureFamily::with_identity_maps(1, self.functions.iter().map(|w| (w.weight, w.f.clone())).collect())?;
        if !fam.is_probability() {
            return Err(Error::NotProbability { sum: fam.total_weight() });
        }
        Ok(fam)
    }
}

fn cmd_prox_average(o: &Opts) -> anyhow::Result<i32> {
    let cfg: ProxAverageConfig = read_optional(o)?;
    let [lo, hi] = cfg.range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || cfg.samples < 2 {
        bail!("range must be finite with lo < hi, and samples ≥ 2");
    }
    let fam = cfg.family()?;
    let conj = fam.conjugate_family();
    let tol = o.tol.unwrap_or(1e-9);
    let mut csv = Csv::new(
        &[
            ("command", "prox-average".into()),
            ("seed", o.seed.to_string()),
            ("tolerance", fmt_f64(tol)),
            ("identities", "prox_expectation_is_average_of_proxes;prox_pair_moreau;envelope_pair_partition".into()),
        ],
        &["x", "prox", "envelope", "conjugate_prox", "conjugate_envelope", "pair_residual"],
    );
    let mut worst: f64 = 0.0;
    for i in 0..cfg.samples {
        let t = lo + (hi - lo) * i as f64 / (cfg.samples - 1) as f64;
        let x = Point::from([t]);
        let p = fam.proximal_expectation_prox(&x)?[0];
        let e = fam.envelope_mixture(&x)?;
        let pc = conj.proximal_expectation_prox(&x)?[0];
        let ec = conj.envelope_mixture(&x)?;
        let pair = (p + pc - t).abs().max((e + ec - 0.5 * t * t).abs());
        worst = worst.max(pair);
        csv.floats(&[], &[t, p, e, pc, ec, pair]);
    }
    emit(o, "prox_average.csv", &csv.into_string(), true)?;
    if worst > tol {
        eprintln!("prox-average: conjugate-pair residual {worst:e} exceeds {tol:e}");
        return Ok(EXIT_UNCONVERGED);
    }
    Ok(EXIT_OK)
}
