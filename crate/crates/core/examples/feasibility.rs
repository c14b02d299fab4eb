//! Relaxed feasibility: consistent sets give a common point, inconsistent ones
//! a least-squares compromise.

use proxmix::mixtures::{Atom, MixtureFamily};
use proxmix::solver::{LambdaSchedule, RelaxedProblem};
use proxmix::{LinOp, MonotoneOpSpec, Point};

fn main() -> proxmix::Result<()> {
    let ball = MonotoneOpSpec::NormalConeBall { center: vec![0.0, 0.0], radius: 1.0 };
    let right_of = |a: f64| MonotoneOpSpec::NormalConeBox {
        lower: vec![a, f64::NEG_INFINITY],
        upper: vec![f64::INFINITY, f64::INFINITY],
    };
    let left_of = |a: f64| MonotoneOpSpec::NormalConeBox {
        lower: vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
        upper: vec![a, f64::INFINITY],
    };

    let consistent = MixtureFamily::new(
        2,
        vec![Atom::new(0.5, LinOp::identity(2), ball), Atom::new(0.5, LinOp::identity(2), right_of(0.5))],
    )?;
    let mut p = RelaxedProblem::with_defaults(consistent)?;
    p.set_x0(Point::from([-3.0, 2.0]))?;
    for lambda in [1.0, 1.9] {
        p.set_lambda(LambdaSchedule::Constant(lambda))?;
        let t = p.solve()?;
        println!(
            "disk ∩ {{x₁ ≥ ½}}, λ = {lambda}: x̄ = {:?} after {} iterations, per-atom residuals {:?}",
            t.x.as_slice(),
            t.iterations,
            p.exactness_check(&t.x)?
        );
    }

    let inconsistent = MixtureFamily::new(
        2,
        vec![Atom::new(0.5, LinOp::identity(2), left_of(0.0)), Atom::new(0.5, LinOp::identity(2), right_of(1.0))],
    )?;
    let p = RelaxedProblem::with_defaults(inconsistent)?;
    let t = p.solve()?;
    let r = p.relaxed_residual(&t.x)?;
    println!(
        "{{x₁ ≤ 0}} vs {{x₁ ≥ 1}}: x̄ = {:?}, distances {:?}, defects ({:.1e}, {:.1e})",
        t.x.as_slice(),
        p.exactness_check(&t.x)?,
        r.in_v_defect,
        r.normal_defect
    );
    Ok(())
}
