use approx::assert_relative_eq;

use super::*;
use crate::gaussian::{
    condition_on_gaussian_slit, intensity_width, make_epr_state, position_uncertainty, propagate_conditional,
    SlitSpec,
};

fn p702() -> PhysParams {
    PhysParams::from_nm(702.0).unwrap()
}

fn leg(l: f64) -> PropagationLeg {
    PropagationLeg::new(l).unwrap()
}

#[test]
fn separable_state_is_uncorrelated() {
    let s = build_grid_state(1.0, 0.5, GridSpec::new(512, 4.0).unwrap()).unwrap();
    assert!(s.correlation().abs() < 1e-6, "r = {}", s.correlation());
    assert_relative_eq!(s.norm(), 1.0, max_relative = 1e-12);
}

#[test]
fn discrete_position_spread() {
    let s = build_grid_state(0.2074, 2.0, GridSpec::new(1024, 12.0).unwrap()).unwrap();
    let analytic = position_uncertainty(&make_epr_state(0.2074, 2.0).unwrap()).unwrap();
    let dy2 = s.marginal(1).variance().sqrt();
    assert_relative_eq!(dy2, 1.00134, max_relative = 2e-3);
    assert_relative_eq!(dy2, analytic, max_relative = 1e-6);
}

#[test]
fn correlation_grows_away_from_separable_point() {
    let grid = GridSpec::new(512, 4.0).unwrap();
    let r: Vec<f64> = [1.0, 0.99, 0.98, 0.96]
        .iter()
        .map(|a| build_grid_state(*a, 0.5, grid).unwrap().correlation())
        .collect();
    for w in r.windows(2) {
        assert!(w[1] > w[0], "{r:?}");
    }
    let r: Vec<f64> = [1.0, 1.01, 1.02]
        .iter()
        .map(|a| build_grid_state(*a, 0.5, grid).unwrap().correlation())
        .collect();
    assert!(r[2] < r[1] && r[1] < r[0], "{r:?}");
}

#[test]
fn undersized_grid_reports_requirements() {
    match build_grid_state(0.2, 2.0, GridSpec::new(256, 3.0).unwrap()) {
        Err(PopperError::Resolution { required_extent_mm, .. }) => assert!(required_extent_mm > 3.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn zero_flight_is_identity_and_flight_is_unitary() {
    let s = build_grid_state(0.3, 1.0, GridSpec::new(512, 8.0).unwrap()).unwrap();
    let same = evolve_spectral(&s, PropagationLeg::zero(), PropagationLeg::zero(), p702()).unwrap();
    assert_eq!(same.psi(), s.psi());
    let flown = evolve_spectral(&s, leg(300.0), leg(150.0), p702()).unwrap();
    assert!((flown.norm() - 1.0).abs() < 1e-10);
    assert_eq!(flown.flight(), [300.0, 150.0]);
}

#[test]
fn gaussian_aperture_matches_closed_form() {
    let (a, omega, eps, l1) = (0.043f64.sqrt(), 2.0, 0.065, 500.0);
    let params = p702();
    let grid = GridSpec::new(2048, 12.0).unwrap();
    let s = evolve_spectral(&build_grid_state(a, omega, grid).unwrap(), leg(l1), leg(l1), params).unwrap();
    let cond = condition(&s, &Aperture::Gaussian { epsilon: eps }).unwrap();

    let state = make_epr_state(a, omega).unwrap();
    let gamma = condition_on_gaussian_slit(&state, &SlitSpec::gaussian(eps).unwrap(), leg(l1), params).unwrap();
    let fitted = cond.amplitude.gaussian_param();
    assert_relative_eq!(fitted.re, gamma.gamma().re, max_relative = 1e-3);
    assert_relative_eq!(fitted.im, gamma.gamma().im, max_relative = 1e-3);

    let w = cond.amplitude.profile().widths().gaussian_equiv_w;
    assert_relative_eq!(w, intensity_width(&gamma), max_relative = 1e-3);

    let later = cond.amplitude.propagate(leg(500.0), params).unwrap();
    let expected = intensity_width(&propagate_conditional(&gamma, leg(500.0), params));
    assert_relative_eq!(later.profile().widths().gaussian_equiv_w, expected, max_relative = 1e-3);
}

#[test]
fn separable_state_ignores_the_aperture() {
    let grid = GridSpec::new(512, 4.0).unwrap();
    let s = build_grid_state(1.0, 0.5, grid).unwrap();
    let marginal = s.marginal(1).widths();
    for aperture in [Aperture::Gaussian { epsilon: 0.1 }, Aperture::Rect { full_width: 0.3 }] {
        let w = condition(&s, &aperture).unwrap().amplitude.profile().widths();
        assert_relative_eq!(w.rms, marginal.rms, max_relative = 1e-3);
    }
}

#[test]
fn far_aperture_is_degenerate() {
    let s = build_grid_state(0.2, 0.5, GridSpec::new(512, 4.0).unwrap()).unwrap();
    let r = condition(&s, &Aperture::Point { center: 3.9, tolerance: 0.01 });
    assert!(matches!(r, Err(PopperError::DegenerateConditioning { .. })), "{r:?}");
}

#[test]
fn rect_slit_on_kim_shih_source() {
    let params = p702();
    let (a, omega) = (0.043f64.sqrt(), 5.0);
    let s = build_grid_state(a, omega, GridSpec::new(2048, 18.0).unwrap()).unwrap();
    let cond = condition(&s, &Aperture::Rect { full_width: 0.16 }).unwrap();
    let at_slit = cond.amplitude.profile().widths();
    assert!(at_slit.rms > 0.08 / 3f64.sqrt());
    let beam = s.marginal(1).widths();
    assert!(at_slit.fwhm < beam.fwhm);

    let detector = cond.amplitude.propagate(leg(500.0), params).unwrap().profile().widths();
    let beam_far = beam_marginal(&s, leg(500.0), params).unwrap().widths();
    assert!(detector.fwhm < beam_far.fwhm);
    // Regression fixture for the hard-edged slit at the detector.
    assert_relative_eq!(detector.fwhm, RECT_KIM_SHIH_FWHM, max_relative = 2e-3);
}

const RECT_KIM_SHIH_FWHM: f64 = 0.656_700_5;

#[test]
fn beam_marginal_matches_closed_form() {
    let params = p702();
    let (a, omega) = (0.2, 1.0);
    let s = build_grid_state(a, omega, GridSpec::new(512, 8.0).unwrap()).unwrap();
    let far = beam_marginal(&s, leg(2000.0), params).unwrap();
    let expected = crate::gaussian::beam_width_exact(&make_epr_state(a, omega).unwrap(), leg(2000.0), params);
    assert_relative_eq!(far.widths().gaussian_equiv_w, expected, max_relative = 1e-3);
    assert_relative_eq!(far.mass(), 1.0, max_relative = 1e-9);
}

#[test]
fn beam_marginal_is_thread_independent() {
    let params = p702();
    let s = build_grid_state(0.2, 1.0, GridSpec::new(256, 6.0).unwrap()).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| beam_marginal(&s, leg(800.0), params).unwrap())
    };
    assert_eq!(run(1).intensity(), run(4).intensity());
}

#[test]
fn ghost_fringes_follow_young_spacing() {
    let params = p702();
    let (l1, d1, l2, sep) = (200.0, 200.0, 400.0, 0.4);
    let src = build_grid_state(0.04, 5.0, GridSpec::new(2048, 18.0).unwrap()).unwrap();
    let at_slit = evolve_spectral(&src, leg(l1), leg(l1), params).unwrap();
    let slit = Aperture::DoubleSlit { slit_width: 0.1, separation: sep };
    let g = ghost_double_slit(&at_slit, &slit, leg(d1), leg(l2), params).unwrap();
    let expected = params.lambda_mm() * (2.0 * l1 + l2) / sep;
    let spacing = g.fringe_spacing.expect("fringes");
    assert_relative_eq!(spacing, expected, max_relative = 0.05);
    assert!(g.visibility > 0.5);
    assert!(g.widths.multimodal);

    let separable = build_grid_state(1.0, 0.5, GridSpec::new(2048, 18.0).unwrap()).unwrap();
    let at_slit = evolve_spectral(&separable, leg(l1), leg(l1), params).unwrap();
    let g = ghost_double_slit(&at_slit, &slit, leg(d1), leg(l2), params).unwrap();
    assert!(g.visibility < 0.05, "visibility {}", g.visibility);
}

#[test]
fn ghost_single_slit_envelope() {
    let params = p702();
    let (l1, d1, l2, eps, a) = (200.0, 200.0, 400.0, 0.1, 0.04);
    let src = build_grid_state(a, 5.0, GridSpec::new(2048, 18.0).unwrap()).unwrap();
    let at_slit = evolve_spectral(&src, leg(l1), leg(l1), params).unwrap();
    let g = ghost_double_slit(&at_slit, &Aperture::Gaussian { epsilon: eps }, leg(d1), leg(l2), params).unwrap();
    let s = (eps * eps + a * a).sqrt();
    let expected = crate::gaussian::fwhm_from_width(crate::gaussian::diffracted_width(s, 2.0 * l1 + l2, params));
    assert!(g.fringe_spacing.is_none());
    assert_relative_eq!(g.widths.fwhm, expected, max_relative = 0.1);
}
