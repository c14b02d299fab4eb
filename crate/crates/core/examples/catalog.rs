//! Closed-form resolvents and proxes from the operator and function catalogs.

use proxmix::{ConvexFnSpec, MonotoneOpSpec, Point};

fn main() -> proxmix::Result<()> {
    let x = Point::from([3.0, -0.4]);

    let ops = [
        ("normal cone of [-1,1]²", MonotoneOpSpec::normal_cone_box(-1.0, 1.0)),
        ("∂σ of [-1,2]²", MonotoneOpSpec::support_interval(-1.0, 2.0)),
        ("2·Id", MonotoneOpSpec::ScaledIdentity { alpha: 2.0 }),
        ("rotation by 90°", MonotoneOpSpec::Rotation90),
    ];
    for (name, a) in &ops {
        let j = a.resolvent(1.0, &x)?;
        let y = a.yosida(1.0, &x)?;
        let ji = a.clone().inverse().resolvent(1.0, &x)?;
        println!("{name:>24}: J = {:?}  Yosida = {:?}  J + J_inv = {:?}", j.as_slice(), y.as_slice(), j.add(&ji).as_slice());
    }

    let fns = [
        ("|·|₁", ConvexFnSpec::abs_sum(1.0)),
        ("ι[-1,1]", ConvexFnSpec::indicator_box(-1.0, 1.0)),
        ("‖·‖²/2", ConvexFnSpec::QuadraticKernel),
    ];
    for (name, f) in &fns {
        let p = f.prox(1.0, &x)?;
        let q = f.conjugate().prox(1.0, &x)?;
        let env = f.envelope(&x)? + f.conjugate().envelope(&x)?;
        println!(
            "{name:>8}: prox = {:?}  prox* = {:?}  moreau gap = {:.1e}  env + env* − ‖x‖²/2 = {:.1e}",
            p.as_slice(),
            q.as_slice(),
            p.add(&q).dist(&x),
            env - 0.5 * x.norm_sq()
        );
    }
    Ok(())
}
