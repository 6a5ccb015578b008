//! Ghost-diffraction width against slit width, analytic and on the grid.
//!
//! cargo run --release --example strekalov_sweep

use popper_sim::experiments::{run_strekalov_sweep, sweep_widths, RunOptions, Scenario};

fn main() -> popper_sim::Result<()> {
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/strekalov.json"))?;
    let widths = sweep_widths(0.2, 1.0, 9)?;
    let rows = run_strekalov_sweep(&scenario, &widths, RunOptions::with_oracle(None))?;
    println!("{:>8} {:>10} {:>10} {:>8} {:>10}", "2eps", "analytic", "oracle", "delta", "hard-edge");
    for r in &rows {
        let o = r.fwhm_oracle_mm.unwrap_or(f64::NAN);
        println!(
            "{:>8.3} {:>10.4} {:>10.4} {:>7.2}% {:>10.4}",
            r.slit_full_width_mm,
            r.fwhm_analytic_mm,
            o,
            100.0 * (o - r.fwhm_analytic_mm) / r.fwhm_analytic_mm,
            r.fwhm_oracle_hard_edge_mm.unwrap_or(f64::NAN)
        );
    }
    if let Some(beam) = rows[0].beam_fwhm_oracle_mm {
        println!("beam (all counts) FWHM on the grid: {beam:.4} mm");
    }
    Ok(())
}
