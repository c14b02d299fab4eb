//! Reading a problem file, solving it, and writing the result as JSON.

use proxmix::output::to_json;
use proxmix::solver::ProblemSpec;

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/disk_halfspace.json").into());
    let spec: ProblemSpec = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
    println!("family: {} atoms, mass {}", spec.family.len(), spec.family.mass());
    let p = spec.build()?;
    let t = p.solve()?;
    println!("{}", to_json(&serde_json::json!({ "x": t.x, "iterations": t.iterations, "residual": t.residual }))?);
    Ok(())
}
