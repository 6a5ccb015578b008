use serde::Serialize;

use crate::error::Result;
use crate::gaussian::{
    condition_on_gaussian_slit, intensity_width, make_epr_state, propagate_conditional, PhysParams, PropagationLeg,
    SlitSpec,
};
use crate::oracle::{build_grid_state, condition, evolve_spectral, Aperture, GridSizing, GridSpec};

use super::{run_kim_shih, RunOptions, Scenario};

/// One oracle self-test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            pass: value.abs() <= tolerance,
        }
    }
}

/// Gaussian-aperture widths against the closed forms, unitarity of the
/// spectral step, and the change in the Kim–Shih grid result when the
/// grid is refined from `n` to `2n` points per axis.
pub fn fidelity_checks(n: usize) -> Result<Vec<Check>> {
    let params = PhysParams::from_nm(702.0)?;
    let (a, omega, eps, l1, l2) = (0.043f64.sqrt(), 2.0, 0.065, 500.0, 500.0);
    let (leg1, leg2) = (PropagationLeg::new(l1)?, PropagationLeg::new(l2)?);

    let sizing = GridSizing::new(a, omega).flight(l1).feature(eps).points(Some(n));
    let grid = GridSpec::auto(&sizing, params)?;
    let source = build_grid_state(a, omega, grid)?;
    let at_slit = evolve_spectral(&source, leg1, leg1, params)?;
    let cond = condition(&at_slit, &Aperture::Gaussian { epsilon: eps })?;

    let gamma = condition_on_gaussian_slit(&make_epr_state(a, omega)?, &SlitSpec::gaussian(eps)?, leg1, params)?;
    let at_slit_w = cond.amplitude.profile().widths().gaussian_equiv_w;
    let detector = cond.amplitude.propagate(leg2, params)?;
    let detector_w = detector.profile().widths().gaussian_equiv_w;
    let analytic_detector_w = intensity_width(&propagate_conditional(&gamma, leg2, params));

    let kim_shih = |points: usize| -> Result<f64> {
        let mut s = Scenario::from_json(include_str!("../../scenarios/kim_shih.json"))?;
        // Refinement at a fixed domain: pin the extent chosen for n points.
        let base = GridSpec::auto(
            &GridSizing::new(s.a()?, s.oracle_omega()).feature(s.slit.feature()?).points(Some(n)),
            s.params()?,
        )?;
        let cfg = s.oracle.get_or_insert_with(Default::default);
        cfg.enabled = true;
        cfg.extent_mm = Some(base.extent);
        let r = run_kim_shih(&s, RunOptions::with_oracle(Some(points)))?;
        Ok(r.oracle.map(|o| o.widths.coincidence_fwhm_mm).unwrap_or(f64::NAN))
    };
    let (coarse, fine) = (kim_shih(n)?, kim_shih(2 * n)?);

    Ok(vec![
        Check::at_most(
            "gaussian_aperture_width_at_slit",
            at_slit_w / intensity_width(&gamma) - 1.0,
            1e-3,
        ),
        Check::at_most("gaussian_aperture_width_at_detector", detector_w / analytic_detector_w - 1.0, 1e-3),
        Check::at_most("norm_drift", at_slit.norm() - 1.0, 1e-8),
        Check::at_most("grid_doubling_kim_shih_fwhm", fine / coarse - 1.0, 5e-4),
    ])
}
