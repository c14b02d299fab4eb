//! The mixture of interval support subdifferentials along an orthonormal basis
//! reproduces the weighted soft-threshold.

use proxmix::app::{soft_threshold_family, weighted_soft_threshold};
use proxmix::sampling::{random_orthogonal, uniform_point};
use proxmix::Point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> proxmix::Result<()> {
    let n = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = random_orthogonal(&mut rng, n);
    let basis: Vec<Point> = (0..n).map(|k| Point::from_fn(n, |i| q.get(i, k))).collect();
    let weights = vec![1.0 / n as f64; n];
    let (lower, upper) = (-0.5, 1.0);
    let fam = soft_threshold_family(&basis, &weights, lower, upper)?;
    println!("mass = {}", fam.validate()?.mass);

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = uniform_point(&mut rng, n, 3.0);
        let j = fam.resolvent_mixture(&x)?;
        worst = worst.max(j.max_abs_diff(&weighted_soft_threshold(&basis, &weights, lower, upper, &x)));
    }
    println!("max |J_W x − soft(x)| over 1000 inputs: {worst:.2e}");
    Ok(())
}
