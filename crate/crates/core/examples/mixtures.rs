//! Mixtures and comixtures of composed operators, their Yosida approximations,
//! and the admissibility check.

use proxmix::mixtures::{Atom, MixtureFamily, Side};
use proxmix::{LinOp, MonotoneOpSpec, Point};

fn main() -> proxmix::Result<()> {
    let l1 = LinOp::from_rows(vec![vec![1.0, 0.5], vec![0.0, 1.0], vec![0.3, -0.2]])?.scaled(0.6);
    let l2 = LinOp::functional(&Point::from([0.8, -0.6]));
    let fam = MixtureFamily::new(
        2,
        vec![
            Atom::new(0.5, l1, MonotoneOpSpec::normal_cone_box(-0.5, 0.5)),
            Atom::new(0.4, l2, MonotoneOpSpec::ScaledIdentity { alpha: 3.0 }),
        ],
    )?;
    let diag = fam.validate()?;
    println!("atoms {}, mass {:.6}, probability {}", diag.atoms, diag.mass, diag.probability);

    let x = Point::from([1.5, -2.0]);
    let jw = fam.resolvent_mixture(&x)?;
    let jc = fam.resolvent_comixture(&x)?;
    println!("J_W x = {:?}", jw.as_slice());
    println!("J_C x = {:?}", jc.as_slice());
    println!("Yosida W = {:?}", fam.yosida_mixture(Side::Mixture, &x)?.as_slice());
    println!("Yosida C = {:?}", fam.yosida_mixture(Side::Comixture, &x)?.as_slice());

    // inverting every atom swaps the two constructions
    let inv = fam.inverse_family();
    let dual = x.sub(&inv.resolvent_comixture(&x)?);
    println!("J_W x − (x − J_C[inverses] x) = {:.1e}", jw.dist(&dual));

    println!("cocoercivity of C with firmly nonexpansive atoms: δ = {:.4}", fam.cocoercivity_constant(1.0)?);

    let heavy = MixtureFamily::with_identity_maps(2, vec![(1.0, MonotoneOpSpec::Zero), (1.0, MonotoneOpSpec::Zero)])?;
    match heavy.validate() {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    let fixed = heavy.rescale_to_admissible()?;
    println!("after rescaling: mass {}", fixed.mass());
    Ok(())
}
