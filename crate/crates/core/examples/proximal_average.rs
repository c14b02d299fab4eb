//! Proximal average of |·| and ‖·‖²/2 and its conjugate pair.

use proxmix::mixtures::MixtureFamily;
use proxmix::{ConvexFnSpec, Point};

fn main() -> proxmix::Result<()> {
    let fam = MixtureFamily::with_identity_maps(1, vec![(0.5, ConvexFnSpec::abs_sum(1.0)), (0.5, ConvexFnSpec::QuadraticKernel)])?;
    let conj = fam.conjugate_family();
    println!("{:>6} {:>10} {:>10} {:>10}", "x", "prox", "prox*", "env+env*");
    for i in -4..=4 {
        let x = Point::from([i as f64]);
        let p = fam.proximal_expectation_prox(&x)?[0];
        let q = conj.proximal_expectation_prox(&x)?[0];
        let e = fam.envelope_mixture(&x)? + conj.envelope_mixture(&x)?;
        println!("{:>6} {p:>10.4} {q:>10.4} {e:>10.4}", x[0]);
    }
    Ok(())
}
