//! The seeded identity suite, with and without an injected fault.

use proxmix::verify::{run, Fault, VerifyConfig};

fn main() -> proxmix::Result<()> {
    let cfg = VerifyConfig { families: 10, ..VerifyConfig::default() };
    let report = run(&cfg)?;
    for row in &report.residuals {
        println!("{:<52} {:>10.2e} ≤ {:.0e}  {}", row.identity, row.max_error, row.threshold, if row.passed { "ok" } else { "FAIL" });
    }

    let broken = VerifyConfig { fault: Some(Fault::ResolventMixture(1e-6)), ..cfg };
    let caught: Vec<_> = run(&broken)?.failures().map(|r| r.identity.clone()).collect();
    println!("with a 1e-6 fault in J_W, failing rows: {caught:?}");
    Ok(())
}
