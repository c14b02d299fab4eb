//! Proximal and resolvent expectations built by quadrature and by Monte-Carlo sampling.

use proxmix::mixtures::{monte_carlo_family, quadrature_family};
use proxmix::{ConvexFnSpec, LinOp, MonotoneOpSpec, Point};
use rand::Rng;

fn main() -> proxmix::Result<()> {
    let x = Point::from([3.0]);
    let interval = |a: f64| (LinOp::identity(1), ConvexFnSpec::indicator_box(-a, a));

    // a uniform on {1, 2}
    let exact = quadrature_family(1, &[(0.5, 1.0), (0.5, 2.0)], interval)?;
    println!("quadrature:  prox(3) = {}", exact.proximal_expectation_prox(&x)?[0]);

    for n in [10, 100, 1000, 10000] {
        let mc = monte_carlo_family(1, n, 42, |rng| interval(if rng.random_bool(0.5) { 1.0 } else { 2.0 }))?;
        println!("monte carlo n = {n:>5}: prox(3) = {:.6}", mc.proximal_expectation_prox(&x)?[0]);
    }

    // Gauss–Legendre nodes for a uniform stiffness on [1, 3]
    let s = (3.0f64 / 5.0).sqrt();
    let nodes = [(5.0 / 18.0, 2.0 - s), (8.0 / 18.0, 2.0), (5.0 / 18.0, 2.0 + s)];
    let ops = quadrature_family(1, &nodes, |alpha| (LinOp::identity(1), MonotoneOpSpec::ScaledIdentity { alpha }))?;
    let j = ops.resolvent_expectation(&x)?[0];
    let exact = 3.0 * (4.0f64 / 2.0).ln() / 2.0;
    println!("E[(1 + α)⁻¹]·3 by 3-node quadrature = {j:.8}, exact = {exact:.8}");
    Ok(())
}
