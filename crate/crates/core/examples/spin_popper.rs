//! Spin-1 version of the thought experiment: measuring A along x sharpens
//! or broadens B's z distribution depending on the outcome.
//!
//! cargo run --example spin_popper

use popper_sim::spin::{condition_on, eq2_state, marginal_probabilities, Axis, Particle, EIGENVALUES};

fn main() -> popper_sim::Result<()> {
    let state = eq2_state();
    let m = marginal_probabilities(&state, Particle::B, Axis::Z);
    println!("B_z alone:           {:.4?}  variance {:.3}", m.0, m.variance());
    for v in EIGENVALUES {
        let o = condition_on(&state, Particle::A, Axis::X, v)?;
        let d = o.partner_distribution(Axis::Z);
        println!(
            "B_z given A_x = {v:>2}: {:.4?}  variance {:.3}  (p = {:.3})",
            d.0,
            d.variance(),
            o.probability
        );
    }
    Ok(())
}
