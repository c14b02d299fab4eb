//! Signal recovery from clipped linear observations restricted to a subspace.

use proxmix::app::{recovery_residual, wiener_instance, WienerConfig};

fn main() -> anyhow::Result<()> {
    for noise in [0.0, 0.05] {
        let cfg = WienerConfig { noise, ..WienerConfig::default() };
        let inst = wiener_instance(&cfg, 3)?;
        let t = inst.problem.solve()?;
        let r = inst.problem.relaxed_residual(&t.x)?;
        println!(
            "noise {noise}: {} iterations, max ‖T(Lx̂) − r‖ = {:.2e}, ‖x̂ − x†‖ = {:.2e}, defect {:.2e}",
            t.iterations,
            recovery_residual(&inst.atoms, &t.x),
            t.x.dist(&inst.truth),
            r.max()
        );
    }
    Ok(())
}
