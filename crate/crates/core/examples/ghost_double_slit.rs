//! Ghost interference: a double slit in particle 1's path, a fixed detector
//! behind it, and fringes in particle 2's coincidence counts.
//!
//! cargo run --release --example ghost_double_slit

use popper_sim::gaussian::{PhysParams, PropagationLeg};
use popper_sim::oracle::{build_grid_state, evolve_spectral, ghost_double_slit, Aperture, GridSpec};

fn main() -> popper_sim::Result<()> {
    let params = PhysParams::from_nm(702.0)?;
    let (l1, d1, l2) = (200.0, 200.0, 400.0);
    let slit = Aperture::DoubleSlit {
        slit_width: 0.1,
        separation: 0.4,
    };
    let grid = GridSpec::new(2048, 18.0)?;
    let young = params.lambda_mm() * (2.0 * l1 + l2) / 0.4;

    for (label, a, omega) in [("entangled", 0.04, 5.0), ("separable", 1.0, 0.5)] {
        let source = build_grid_state(a, omega, grid)?;
        let at_slit = evolve_spectral(&source, PropagationLeg::new(l1)?, PropagationLeg::new(l1)?, params)?;
        let g = ghost_double_slit(
            &at_slit,
            &slit,
            PropagationLeg::new(d1)?,
            PropagationLeg::new(l2)?,
            params,
        )?;
        match g.fringe_spacing {
            Some(s) => println!(
                "{label:>9}: spacing {s:.4} mm (Young {young:.4} mm), visibility {:.3}",
                g.visibility
            ),
            None => println!("{label:>9}: no fringes, visibility {:.3}", g.visibility),
        }
    }
    Ok(())
}
