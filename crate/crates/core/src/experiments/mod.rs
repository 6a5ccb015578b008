//! Scenario files, width inversion and the three analyses: Kim–Shih's lens
//! geometry, Strekalov's ghost-diffraction sweep and the free-space layout.

mod fidelity;
mod fit;
mod scenario;

use rayon::prelude::*;
use serde::Serialize;

pub use fidelity::{fidelity_checks, Check};
pub use fit::{
    fit_real_slit_epsilon, fit_sigma_from_width, forward_fwhm, width_roots, Branch, SigmaFit, WidthRoots,
};
pub use scenario::{ExperimentKind, LensFile, OracleConfig, Scenario, SlitConfig, SlitKind, SweepConfig};

use crate::error::{PopperError, Result};
use crate::gaussian::{
    beam_width_exact, condition_on_gaussian_slit, fwhm_from_width, intensity_width, lens_ghost_param,
    make_epr_state, propagate_conditional, GaussianParam, PhysParams, PropagationLeg, SlitSpec,
};
use crate::oracle::{
    beam_marginal, build_grid_state, condition, evolve_spectral, Amplitude, Aperture, GridSizing, GridSpec,
    GridState,
};
use num_complex::Complex64;

/// Grid points per axis when a scenario does not say.
pub const DEFAULT_GRID_N: usize = 2048;

/// How a scenario is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Force the grid oracle on, whatever the scenario says.
    pub oracle: bool,
    /// Grid points per axis, overriding the scenario.
    pub grid_n: Option<usize>,
}

impl RunOptions {
    pub fn with_oracle(grid_n: Option<usize>) -> Self {
        Self { oracle: true, grid_n }
    }

    fn oracle_for(&self, scenario: &Scenario) -> bool {
        self.oracle || scenario.oracle.is_some_and(|o| o.enabled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Both,
}

/// Widths of particle 2 at its detector plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct WidthSet {
    /// All-counts FWHM (no coincidence requirement).
    pub beam_fwhm_mm: Option<f64>,
    pub coincidence_fwhm_mm: f64,
    /// Single-particle pattern of a real slit of the same `ε`.
    pub real_slit_fwhm_mm: Option<f64>,
    /// Intensity width `W` of the ghost image at the lens image plane.
    pub ghost_image_width_mm: Option<f64>,
    /// Flight that un-chirps the conditional amplitude: where the slit seems to be.
    pub virtual_slit_distance_mm: Option<f64>,
}

impl WidthSet {
    fn deltas(&self, oracle: &WidthSet) -> WidthSet {
        let rel = |a: Option<f64>, o: Option<f64>| match (a, o) {
            (Some(a), Some(o)) => Some((o - a) / a),
            _ => None,
        };
        WidthSet {
            beam_fwhm_mm: rel(self.beam_fwhm_mm, oracle.beam_fwhm_mm),
            coincidence_fwhm_mm: (oracle.coincidence_fwhm_mm - self.coincidence_fwhm_mm) / self.coincidence_fwhm_mm,
            real_slit_fwhm_mm: rel(self.real_slit_fwhm_mm, oracle.real_slit_fwhm_mm),
            ghost_image_width_mm: rel(self.ghost_image_width_mm, oracle.ghost_image_width_mm),
            virtual_slit_distance_mm: rel(self.virtual_slit_distance_mm, oracle.virtual_slit_distance_mm),
        }
    }
}

/// Grid-oracle half of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRun {
    pub grid_n: usize,
    pub extent_mm: f64,
    pub omega_mm: f64,
    pub widths: WidthSet,
    /// Probability that particle 1 passes slit A.
    pub coincidence_fraction: f64,
    pub coincidence_multimodal: bool,
    /// `|‖ψ‖² - 1|` after the last unitary step.
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthReport {
    pub experiment: ExperimentKind,
    pub provenance: Provenance,
    pub epsilon_mm: Option<f64>,
    pub effective_distance_mm: f64,
    pub analytic: WidthSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRun>,
    /// `(oracle - analytic)/analytic` per width.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_deltas: Option<WidthSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted: Option<SigmaFit>,
}

impl WidthReport {
    fn new(kind: ExperimentKind, epsilon: Option<f64>, distance: f64, analytic: WidthSet) -> Self {
        Self {
            experiment: kind,
            provenance: Provenance::Analytic,
            epsilon_mm: epsilon,
            effective_distance_mm: distance,
            analytic,
            oracle: None,
            relative_deltas: None,
            fitted: None,
        }
    }

    fn attach(&mut self, oracle: OracleRun) {
        self.relative_deltas = Some(self.analytic.deltas(&oracle.widths));
        self.provenance = Provenance::Both;
        self.oracle = Some(oracle);
    }
}

/// Evaluate a scenario according to its experiment kind.
pub fn run_scenario(scenario: &Scenario, opts: RunOptions) -> Result<WidthReport> {
    match scenario.kind() {
        ExperimentKind::KimShih => run_kim_shih(scenario, opts),
        ExperimentKind::Strekalov | ExperimentKind::PopperFreespace => run_popper_freespace(scenario, opts),
    }
}

fn leg(l: f64) -> Result<PropagationLeg> {
    PropagationLeg::new(l)
}

fn fwhm(gamma: &GaussianParam) -> f64 {
    fwhm_from_width(intensity_width(gamma))
}

/// Single-particle pattern of a Gaussian slit `ε` after `distance`.
fn real_slit_fwhm(epsilon: f64, distance: f64, params: PhysParams) -> Result<f64> {
    Ok(fwhm(&propagate_conditional(&GaussianParam::from_width(epsilon)?, leg(distance)?, params)))
}

fn beam_fwhm(a: f64, omega: f64, distance: f64, params: PhysParams) -> Result<Option<f64>> {
    if a == 0.0 {
        // Perfect momentum correlation: the beam has no finite width.
        return Ok(None);
    }
    let source = make_epr_state(a, omega)?;
    Ok(Some(fwhm_from_width(beam_width_exact(&source, leg(distance)?, params))))
}

/// Kim–Shih geometry: a thin lens images slit A onto slit B's plane, and
/// particle 2 is collected `L₂` behind that plane.
pub fn run_kim_shih(scenario: &Scenario, opts: RunOptions) -> Result<WidthReport> {
    let params = scenario.params()?;
    let lens = scenario
        .lens()?
        .ok_or_else(|| PopperError::config("the Kim–Shih analysis needs a lens"))?;
    let a = scenario.a()?;
    let slit = scenario.slit.spec()?;
    let l2 = scenario.l2_mm;
    let beam = beam_fwhm(a, scenario.omega_mm, l2, params)?;

    let analytic = match slit.epsilon() {
        None => WidthSet {
            beam_fwhm_mm: beam,
            coincidence_fwhm_mm: beam.ok_or_else(|| PopperError::domain("open slit with a = 0 has no finite width"))?,
            ..WidthSet::default()
        },
        Some(eps) => {
            let gaussian = slit.as_gaussian()?;
            let image = lens_ghost_param(&gaussian, a, &lens, leg(lens.ghost_image_distance())?, params)?;
            let at_detector = propagate_conditional(&image, leg(l2)?, params);
            WidthSet {
                beam_fwhm_mm: beam,
                coincidence_fwhm_mm: fwhm(&at_detector),
                real_slit_fwhm_mm: Some(real_slit_fwhm(eps, l2, params)?),
                ghost_image_width_mm: Some(intensity_width(&image)),
                virtual_slit_distance_mm: Some(at_detector.source_distance(params)),
            }
        }
    };
    let mut report = WidthReport::new(ExperimentKind::KimShih, slit.epsilon(), l2, analytic);
    if let (Some(observed), Some(eps)) = (scenario.observed_fwhm_mm, slit.epsilon()) {
        report.fitted = Some(fit_sigma_from_width(observed, eps, l2, params)?);
    }
    if opts.oracle_for(scenario) {
        // The lens maps slit A onto the source plane for particle 2, so the
        // grid conditions the unflown source and flies particle 2 by L₂.
        let grid = oracle_grid(scenario, opts, 0.0, scenario.slit.feature()?)?;
        let source = build_grid_state(a, scenario.oracle_omega(), grid)?;
        report.attach(oracle_widths(scenario, &source, l2, params)?);
    }
    Ok(report)
}

/// Free-space layout: slit A at `L₁` on particle 1's side, particle 2
/// detected after `L₁ + L₂`.
pub fn run_popper_freespace(scenario: &Scenario, opts: RunOptions) -> Result<WidthReport> {
    let params = scenario.params()?;
    if scenario.lens.is_some() {
        return Err(PopperError::config("the free-space analysis takes no lens"));
    }
    let a = scenario.a()?;
    let slit = scenario.slit.spec()?;
    let (l1, l2) = (scenario.l1_mm, scenario.l2_mm);
    let beam = beam_fwhm(a, scenario.omega_mm, l1 + l2, params)?;
    let distance = scenario.effective_distance();

    let analytic = match slit.epsilon() {
        None => WidthSet {
            beam_fwhm_mm: beam,
            coincidence_fwhm_mm: beam.ok_or_else(|| PopperError::domain("open slit with a = 0 has no finite width"))?,
            ..WidthSet::default()
        },
        Some(eps) => {
            let gamma = coincidence_param(a, scenario.omega_mm, &slit, l1, l2, params)?;
            WidthSet {
                beam_fwhm_mm: beam,
                coincidence_fwhm_mm: fwhm(&gamma),
                real_slit_fwhm_mm: Some(real_slit_fwhm(eps, distance, params)?),
                ghost_image_width_mm: None,
                virtual_slit_distance_mm: Some(gamma.source_distance(params)),
            }
        }
    };
    let mut report = WidthReport::new(scenario.kind(), slit.epsilon(), distance, analytic);
    if let (Some(observed), Some(eps)) = (scenario.observed_fwhm_mm, slit.epsilon()) {
        report.fitted = Some(fit_sigma_from_width(observed, eps, distance, params)?);
    }
    if opts.oracle_for(scenario) {
        let grid = oracle_grid(scenario, opts, l1, scenario.slit.feature()?)?;
        let source = build_grid_state(a, scenario.oracle_omega(), grid)?;
        let at_slit = evolve_spectral(&source, leg(l1)?, leg(l1)?, params)?;
        let mut run = oracle_widths(scenario, &at_slit, l2, params)?;
        run.widths.real_slit_fwhm_mm = match slit.epsilon() {
            Some(eps) => Some(line_real_slit(eps, at_slit.spec(), distance, params)?),
            None => None,
        };
        report.attach(run);
    }
    Ok(report)
}

/// Conditional `Γ` of particle 2 at its detector, `a = 0` allowed.
fn coincidence_param(
    a: f64,
    omega: f64,
    slit: &SlitSpec,
    l1: f64,
    l2: f64,
    params: PhysParams,
) -> Result<GaussianParam> {
    let gaussian = slit.as_gaussian()?;
    let gamma = if a == 0.0 {
        // Perfect correlation: the partner's slit is copied exactly.
        let eps = gaussian.epsilon().unwrap_or_default();
        let at_source = GaussianParam::from_width(eps)?;
        propagate_conditional(&at_source, leg(2.0 * l1)?, params)
    } else {
        condition_on_gaussian_slit(&make_epr_state(a, omega)?, &gaussian, leg(l1)?, params)?
    };
    Ok(propagate_conditional(&gamma, leg(l2)?, params))
}

fn oracle_grid(scenario: &Scenario, opts: RunOptions, flight: f64, feature: f64) -> Result<GridSpec> {
    let cfg = scenario.oracle.unwrap_or_default();
    let n = opts.grid_n.or(cfg.n);
    match cfg.extent_mm {
        Some(extent) => GridSpec::new(n.unwrap_or(DEFAULT_GRID_N), extent),
        None => {
            let sizing = GridSizing::new(scenario.a()?, scenario.oracle_omega())
                .flight(flight)
                .feature(feature)
                .points(n);
            GridSpec::auto(&sizing, scenario.params()?)
        }
    }
}

/// Oracle widths for a state already at slit A's plane; particle 2 then
/// flies `l2`.
fn oracle_widths(scenario: &Scenario, at_slit: &GridState, l2: f64, params: PhysParams) -> Result<OracleRun> {
    let spec = at_slit.spec();
    let beam = beam_marginal(at_slit, leg(l2)?, params)?.widths().fwhm;
    let (coinc, fraction, multimodal, ghost, virtual_distance) = match scenario.slit.aperture(scenario.hard_edges())? {
        None => (beam, 1.0, false, None, None),
        Some(aperture) => {
            let cond = condition(at_slit, &aperture)?;
            let image = cond.amplitude.profile().widths();
            let detector = cond.amplitude.propagate(leg(l2)?, params)?;
            let widths = detector.profile().widths();
            let virtual_distance = matches!(aperture, Aperture::Gaussian { .. })
                .then(|| detector.gaussian_param().im / params.reduced_wavelength());
            let ghost = (scenario.kind() == ExperimentKind::KimShih).then_some(image.gaussian_equiv_w);
            (widths.fwhm, cond.weight, widths.multimodal, ghost, virtual_distance)
        }
    };
    let real = match scenario.slit.spec()?.epsilon() {
        Some(eps) if scenario.kind() == ExperimentKind::KimShih => Some(line_real_slit(eps, spec, l2, params)?),
        _ => None,
    };
    Ok(OracleRun {
        grid_n: spec.n,
        extent_mm: spec.extent,
        omega_mm: scenario.oracle_omega(),
        widths: WidthSet {
            beam_fwhm_mm: Some(beam),
            coincidence_fwhm_mm: coinc,
            real_slit_fwhm_mm: real,
            ghost_image_width_mm: ghost,
            virtual_slit_distance_mm: virtual_distance,
        },
        coincidence_fraction: fraction,
        coincidence_multimodal: multimodal,
        norm_drift: (at_slit.norm() - 1.0).abs(),
    })
}

/// Gaussian slit `exp(-y²/ε²)` sampled on the grid's line and flown.
fn line_real_slit(epsilon: f64, spec: GridSpec, distance: f64, params: PhysParams) -> Result<f64> {
    let values = spec
        .coordinates()
        .iter()
        .map(|y| Complex64::new((-(y * y) / (epsilon * epsilon)).exp(), 0.0))
        .collect();
    let amp = Amplitude::new(values, spec.step()).normalized();
    Ok(amp.propagate(leg(distance)?, params)?.profile().widths().fwhm)
}

/// One point of a slit-width sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub slit_full_width_mm: f64,
    pub fwhm_analytic_mm: f64,
    pub fwhm_oracle_mm: Option<f64>,
    /// Grid result for the hard-edged slit when the main oracle column uses
    /// the Gaussian stand-in.
    pub fwhm_oracle_hard_edge_mm: Option<f64>,
    pub beam_fwhm_oracle_mm: Option<f64>,
    /// `a²` inverted from the scenario's observed FWHM at this width.
    pub fitted_a2_mm2: Option<f64>,
    /// Why the inversion failed at this width, if it did.
    pub flag: Option<String>,
}

/// Coincidence FWHM of particle 2 against slit A's full width, in the
/// free-space (Strekalov) geometry. Rows are sorted by width.
pub fn run_strekalov_sweep(scenario: &Scenario, widths: &[f64], opts: RunOptions) -> Result<Vec<SweepRow>> {
    if scenario.lens.is_some() {
        return Err(PopperError::config("the slit-width sweep uses the free-space geometry; remove the lens"));
    }
    if widths.is_empty() {
        return Err(PopperError::config("sweep needs at least one slit width"));
    }
    let mut widths = widths.to_vec();
    if let Some(bad) = widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(PopperError::domain(format!("slit width must be positive, got {bad}")));
    }
    widths.sort_by(f64::total_cmp);
    let params = scenario.params()?;
    let a = scenario.a()?;
    let (l1, l2) = (scenario.l1_mm, scenario.l2_mm);
    let distance = scenario.effective_distance();

    let slits: Vec<SlitConfig> = widths.iter().map(|w| scenario.slit.with_width(*w)).collect();
    let analytic: Vec<f64> = slits
        .par_iter()
        .map(|s| Ok(fwhm(&coincidence_param(a, scenario.omega_mm, &s.spec()?, l1, l2, params)?)))
        .collect::<Result<_>>()?;

    let mut oracle: Vec<(Option<f64>, Option<f64>)> = vec![(None, None); widths.len()];
    let mut beam = None;
    if opts.oracle_for(scenario) {
        let feature = slits.iter().map(|s| s.feature()).collect::<Result<Vec<_>>>()?;
        let feature = feature.into_iter().fold(f64::INFINITY, f64::min);
        let grid = oracle_grid(scenario, opts, l1, feature)?;
        let source = build_grid_state(a, scenario.oracle_omega(), grid)?;
        let at_slit = evolve_spectral(&source, leg(l1)?, leg(l1)?, params)?;
        beam = Some(beam_marginal(&at_slit, leg(l2)?, params)?.widths().fwhm);
        oracle = slits
            .par_iter()
            .map(|s| {
                let width = |aperture: Option<Aperture>| -> Result<Option<f64>> {
                    let Some(aperture) = aperture else {
                        return Ok(beam);
                    };
                    let cond = condition(&at_slit, &aperture)?;
                    Ok(Some(cond.amplitude.propagate(leg(l2)?, params)?.profile().widths().fwhm))
                };
                let main = width(s.aperture(scenario.hard_edges())?)?;
                let hard = match (scenario.hard_edges(), s.kind) {
                    (false, SlitKind::Rect) => width(s.aperture(true)?)?,
                    _ => None,
                };
                Ok((main, hard))
            })
            .collect::<Result<_>>()?;
    }

    let rows = widths
        .iter()
        .zip(&slits)
        .zip(analytic.iter().zip(&oracle))
        .map(|((w, slit), (fa, fo))| {
            let mut row = SweepRow {
                slit_full_width_mm: *w,
                fwhm_analytic_mm: *fa,
                fwhm_oracle_mm: fo.0,
                fwhm_oracle_hard_edge_mm: fo.1,
                beam_fwhm_oracle_mm: beam,
                fitted_a2_mm2: None,
                flag: None,
            };
            if let Some(observed) = scenario.observed_fwhm_mm {
                let eps = slit.spec().ok().and_then(|s| s.epsilon()).unwrap_or_default();
                match fit_sigma_from_width(observed, eps, distance, params) {
                    Ok(fit) => row.fitted_a2_mm2 = Some(fit.a2_mm2),
                    Err(e) => row.flag = Some(flag_name(&e).to_string()),
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

fn flag_name(e: &PopperError) -> &'static str {
    match e {
        PopperError::SlitWiderThanLocalization { .. } => "slit_wider_than_localization",
        PopperError::UnreachableWidth { .. } => "unreachable_width",
        _ => "error",
    }
}

/// `steps` evenly spaced widths from `from` to `to` inclusive.
pub fn sweep_widths(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    scenario::validate_sweep(from, to, steps)?;
    let h = (to - from) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { to } else { from + h * i as f64 })
        .collect())
}

#[cfg(test)]
mod tests;
