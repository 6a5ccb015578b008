use serde::Serialize;

use crate::error::{PopperError, Result};
use crate::gaussian::{diffracted_width, fwhm_from_width, width_from_fwhm, PhysParams};

/// Which root of the width quadratic a localization sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `s < √(ΛD)`: narrower sources give wider patterns.
    Near,
    /// `s > √(ΛD)`: geometric-optics side.
    Far,
}

impl Branch {
    pub fn of(s: f64, distance: f64, params: PhysParams) -> Branch {
        if s * s < params.reduced_wavelength() * distance {
            Branch::Near
        } else {
            Branch::Far
        }
    }
}

/// Both localizations `s` that diffract to the same width over `D`.
/// Their product is `ΛD`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthRoots {
    pub near_mm: f64,
    pub far_mm: f64,
}

impl WidthRoots {
    pub fn on(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Near => self.near_mm,
            Branch::Far => self.far_mm,
        }
    }

    /// `a² = s² - ε²` on the chosen branch.
    pub fn a2(&self, branch: Branch, epsilon: f64) -> Result<f64> {
        let s = self.on(branch);
        if s < epsilon {
            return Err(PopperError::SlitWiderThanLocalization {
                s_mm: s,
                epsilon_mm: epsilon,
            });
        }
        Ok(s * s - epsilon * epsilon)
    }
}

/// Solve `s⁴ - W²s² + Λ²D² = 0` for the observed FWHM.
pub fn width_roots(fwhm: f64, distance: f64, params: PhysParams) -> Result<WidthRoots> {
    if !(fwhm.is_finite() && fwhm > 0.0) {
        return Err(PopperError::domain(format!("observed FWHM must be positive, got {fwhm}")));
    }
    if !(distance.is_finite() && distance > 0.0) {
        return Err(PopperError::domain(format!("distance must be positive, got {distance}")));
    }
    let w2 = width_from_fwhm(fwhm).powi(2);
    let p = params.reduced_wavelength() * distance;
    let disc = w2 * w2 - 4.0 * p * p;
    if disc < 0.0 {
        return Err(PopperError::UnreachableWidth {
            width_mm: fwhm,
            min_width_mm: fwhm_from_width((2.0 * p).sqrt()),
        });
    }
    // Larger root directly, smaller from the product to avoid cancellation.
    let far2 = 0.5 * (w2 + disc.sqrt());
    let near2 = p * p / far2;
    Ok(WidthRoots {
        near_mm: near2.sqrt(),
        far_mm: far2.sqrt(),
    })
}

/// Localization inferred from a coincidence pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaFit {
    pub observed_fwhm_mm: f64,
    pub epsilon_mm: f64,
    pub distance_mm: f64,
    /// `√(ε² + a²)` on the near-field branch.
    pub s_mm: f64,
    pub a2_mm2: f64,
    pub roots: WidthRoots,
}

/// Infer `a²` from an observed FWHM behind a slit of width `ε` at distance
/// `D`. The near-field root is primary; both roots are reported.
pub fn fit_sigma_from_width(fwhm: f64, epsilon: f64, distance: f64, params: PhysParams) -> Result<SigmaFit> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(PopperError::domain(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let roots = width_roots(fwhm, distance, params)?;
    let a2 = roots.a2(Branch::Near, epsilon)?;
    Ok(SigmaFit {
        observed_fwhm_mm: fwhm,
        epsilon_mm: epsilon,
        distance_mm: distance,
        s_mm: roots.near_mm,
        a2_mm2: a2,
        roots,
    })
}

/// Gaussian slit width that alone (perfect correlation, `a = 0`) diffracts
/// to `fwhm` over `distance`.
pub fn fit_real_slit_epsilon(fwhm: f64, distance: f64, params: PhysParams) -> Result<f64> {
    Ok(width_roots(fwhm, distance, params)?.near_mm)
}

/// Coincidence FWHM for `a²`, `ε` and an effective distance `D`.
pub fn forward_fwhm(a2: f64, epsilon: f64, distance: f64, params: PhysParams) -> f64 {
    fwhm_from_width(diffracted_width((a2 + epsilon * epsilon).sqrt(), distance, params))
}
