//! Invert observed widths: a² behind a known slit, or the slit width that
//! reproduces a real-slit pattern.
//!
//! cargo run --example fit_sigma

use popper_sim::experiments::{fit_real_slit_epsilon, fit_sigma_from_width, forward_fwhm};
use popper_sim::gaussian::PhysParams;

fn main() -> popper_sim::Result<()> {
    let params = PhysParams::from_nm(702.0)?;

    let fit = fit_sigma_from_width(0.657, 0.065, 500.0, params)?;
    println!("0.657 mm behind eps = 0.065 mm over 500 mm:");
    println!("  near root s = {:.4} mm -> a^2 = {:.4} mm^2", fit.s_mm, fit.a2_mm2);
    println!("  far root  s = {:.4} mm", fit.roots.far_mm);

    let eps = fit_real_slit_epsilon(2.0, 500.0, params)?;
    println!("a 2.0 mm real-slit pattern needs eps = {eps:.4} mm");

    let back = forward_fwhm(fit.a2_mm2, 0.065, 500.0, params);
    println!("forward check: {back:.6} mm");

    match fit_sigma_from_width(0.3, 0.065, 500.0, params) {
        Err(e) => println!("0.3 mm: {e}"),
        Ok(f) => println!("0.3 mm: {f:?}"),
    }
    Ok(())
}
