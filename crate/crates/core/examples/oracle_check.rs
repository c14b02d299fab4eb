//! Closed forms checked against brute-force grid and bisection oracles.

use proxmix::oracle::{bisect_resolvent_1d, grid_conjugate, grid_envelope, grid_prox, oracle_value, GridSpec, DEFAULT_POINTS};
use proxmix::{ConvexFnSpec, MonotoneOpSpec, Point};

fn main() -> proxmix::Result<()> {
    let grid = GridSpec::symmetric(1, 10.0, DEFAULT_POINTS)?;
    let inner = GridSpec::symmetric(1, 10.0, DEFAULT_POINTS)?;
    println!("grid step {}", grid.max_step());
    let fns = [
        ConvexFnSpec::abs_sum(1.5),
        ConvexFnSpec::indicator_box(-2.0, 1.0),
        ConvexFnSpec::Quadratic { alpha: 2.0, center: vec![0.5] },
        ConvexFnSpec::conjugate_of(ConvexFnSpec::support_interval(-1.0, 3.0)),
    ];
    for f in &fns {
        let value = oracle_value(f, &inner);
        let x = Point::from([4.3]);
        let dp = (grid_prox(&value, &grid, &x)?[0] - f.prox(1.0, &x)?[0]).abs();
        let de = (grid_envelope(&value, &grid, &x)? - f.envelope(&x)?).abs();
        let xs = Point::from([0.7]);
        let g = grid_conjugate(&value, &grid, &xs)?;
        let dc = (g.value - f.conjugate_value(&xs)?).abs();
        println!("{f:?}\n    prox {dp:.1e}  envelope {de:.1e}  conjugate {dc:.1e} (boundary {})", g.at_boundary);
    }
    let a = MonotoneOpSpec::ScaledIdentity { alpha: 2.0 }.inverse();
    let b = bisect_resolvent_1d(&a, 0.5, 3.0)?;
    println!("bisection vs closed form for (2·Id)⁻¹: {:.1e}", (b - a.resolvent(0.5, &Point::from([3.0]))?[0]).abs());
    Ok(())
}
