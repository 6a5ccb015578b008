use approx::assert_relative_eq;

use super::*;

fn bundled(name: &str) -> Scenario {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/");
    Scenario::load(format!("{path}{name}.json")).unwrap()
}

fn analytic_only() -> RunOptions {
    RunOptions::default()
}

#[test]
fn kim_shih_analytic() {
    let mut s = bundled("kim_shih");
    s.oracle = None;
    let r = run_kim_shih(&s, analytic_only()).unwrap();
    assert_eq!(r.provenance, Provenance::Analytic);
    let w = r.analytic;
    assert_relative_eq!(w.coincidence_fwhm_mm, 0.657, max_relative = 0.01);
    assert_relative_eq!(w.real_slit_fwhm_mm.unwrap(), 2.0, max_relative = 0.02);
    assert_relative_eq!(w.ghost_image_width_mm.unwrap(), 0.2173, max_relative = 1e-3);
    assert!(w.coincidence_fwhm_mm < w.beam_fwhm_mm.unwrap());
    let fit = r.fitted.unwrap();
    assert_relative_eq!(fit.a2_mm2, 0.043, max_relative = 0.03);
}

#[test]
fn kim_shih_limits() {
    let mut s = bundled("kim_shih");
    s.oracle = None;
    s.a2_mm2 = Some(0.0);
    let r = run_kim_shih(&s, analytic_only()).unwrap();
    assert_relative_eq!(
        r.analytic.coincidence_fwhm_mm,
        r.analytic.real_slit_fwhm_mm.unwrap(),
        max_relative = 1e-12
    );
    assert_eq!(r.analytic.beam_fwhm_mm, None);

    let mut s = bundled("kim_shih");
    s.oracle = None;
    s.slit = SlitConfig {
        kind: SlitKind::Open,
        width_mm: None,
        convention: None,
        epsilon_mm: None,
    };
    s.observed_fwhm_mm = None;
    let r = run_kim_shih(&s, analytic_only()).unwrap();
    assert_eq!(Some(r.analytic.coincidence_fwhm_mm), r.analytic.beam_fwhm_mm);

    let mut s = bundled("kim_shih");
    s.lens = None;
    assert_eq!(run_kim_shih(&s, analytic_only()).unwrap_err().exit_code(), 2);
}

#[test]
fn kim_shih_oracle() {
    let s = bundled("kim_shih");
    let r = run_kim_shih(&s, RunOptions::default()).unwrap();
    assert_eq!(r.provenance, Provenance::Both);
    let o = r.oracle.as_ref().unwrap();
    assert_eq!(o.grid_n, 2048);
    assert_relative_eq!(o.widths.coincidence_fwhm_mm, 0.657, max_relative = 0.02);
    assert!(o.widths.coincidence_fwhm_mm <= o.widths.beam_fwhm_mm.unwrap());
    assert!(o.coincidence_fraction > 0.0 && o.coincidence_fraction < 1.0);
    assert!(r.relative_deltas.unwrap().coincidence_fwhm_mm.abs() < 0.02);
}

#[test]
fn freespace_split_and_virtual_slit() {
    let s = bundled("popper_freespace");
    let mut split = s.clone();
    split.l1_mm = 450.0;
    split.l2_mm = 900.0;
    let mut far = s.clone();
    far.l1_mm = 900.0;
    far.l2_mm = 0.0;
    let base = run_popper_freespace(&s, analytic_only()).unwrap();
    for other in [split, far] {
        let r = run_popper_freespace(&other, analytic_only()).unwrap();
        let dev = (r.analytic.coincidence_fwhm_mm - base.analytic.coincidence_fwhm_mm).abs()
            / base.analytic.coincidence_fwhm_mm;
        assert!(dev < 1e-8, "split deviation {dev}");
    }
    assert_relative_eq!(base.analytic.virtual_slit_distance_mm.unwrap(), 1800.0, max_relative = 1e-6);
    assert!(base.analytic.coincidence_fwhm_mm < base.analytic.beam_fwhm_mm.unwrap());
}

#[test]
fn strekalov_points() {
    let s = bundled("strekalov");
    let rows = run_strekalov_sweep(&s, &[1.0, 0.2], analytic_only()).unwrap();
    assert_eq!(rows[0].slit_full_width_mm, 0.2);
    assert_relative_eq!(rows[0].fwhm_analytic_mm, 4.399, max_relative = 2e-4);
    assert_relative_eq!(rows[1].fwhm_analytic_mm, 1.114, max_relative = 5e-4);
    assert!(rows[0].fwhm_oracle_mm.is_none());
}

#[test]
fn strekalov_sweep_is_monotone_and_flags_bad_fits() {
    let mut s = bundled("strekalov");
    s.observed_fwhm_mm = Some(1.5);
    let widths = sweep_widths(0.1, 1.0, 10).unwrap();
    let rows = run_strekalov_sweep(&s, &widths, analytic_only()).unwrap();
    assert_eq!(rows.len(), 10);
    for w in rows.windows(2) {
        assert!(w[1].fwhm_analytic_mm < w[0].fwhm_analytic_mm);
    }
    assert!(rows.iter().any(|r| r.flag.is_some()));
    assert!(rows.iter().any(|r| r.fitted_a2_mm2.is_some()));
    assert!(run_strekalov_sweep(&s, &[0.0, 0.5], analytic_only()).is_err());
    assert!(sweep_widths(1.0, 0.5, 3).is_err());
    assert!(sweep_widths(0.1, 0.5, 1).is_err());
}

#[test]
fn large_a_suppresses_diffraction() {
    let mut s = bundled("strekalov");
    s.a_mm = Some(20.0);
    s.omega_mm = 1e9;
    let rows = run_strekalov_sweep(&s, &[0.4], analytic_only()).unwrap();
    let geometric = fwhm_from_width((0.2f64.powi(2) + 400.0).sqrt());
    assert_relative_eq!(rows[0].fwhm_analytic_mm, geometric, max_relative = 1e-4);
}
