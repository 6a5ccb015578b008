//! Brute-force two-particle wave simulator used as ground truth.
//!
//! The source amplitude is sampled on an `n × n` grid over `(y₁, y₂)`,
//! propagated exactly in the discrete Fourier domain, and conditioned on
//! particle-1 apertures by direct quadrature. Nothing here uses the closed
//! forms of [`crate::gaussian`].

mod aperture;
mod fft;
mod grid;
mod line;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use aperture::{condition, Aperture, Conditional, MIN_WEIGHT};
pub use grid::{
    build_grid_state, evolve_spectral, GridSizing, GridSpec, GridState, MAX_GRID_ENV, MIN_POINTS, TAIL_TOLERANCE,
};
pub use line::{Amplitude, Profile, Widths};

use crate::error::{PopperError, Result};
use crate::gaussian::{PhysParams, PropagationLeg};
use fft::Plans;

/// Width summary of a conditional amplitude or marginal.
pub fn widths(profile: &Profile) -> Widths {
    profile.widths()
}

/// All-counts intensity of particle 2 after it flies a further `leg`,
/// i.e. `∫|ψ(y₁, y₂)|² dy₁` with each `y₁` row propagated on a padded line.
pub fn beam_marginal(state: &GridState, leg: PropagationLeg, params: PhysParams) -> Result<Profile> {
    let n = state.n();
    let dy = state.step();
    if leg.length() == 0.0 {
        return Ok(state.marginal(1));
    }
    let flight = params.reduced_wavelength() * leg.length();
    let marginal = state.marginal(1);
    let k_rms = particle2_wavenumber_rms(state);
    let half = 6.0 * (marginal.variance().sqrt() + 0.5 * flight * k_rms) + marginal.mean().abs();
    let padded = ((2.0 * half / dy).ceil() as usize).next_power_of_two().max(n);
    if padded > 1 << 20 {
        return Err(PopperError::Resolution {
            reason: format!("beam over {} mm needs {padded} points per row", leg.length()),
            required_extent_mm: half,
            required_step_mm: dy,
        });
    }
    let plans = Plans::new(padded);
    let offset = (padded - n) / 2;
    let rows: Vec<&[Complex64]> = state.rows().collect();

    const CHUNK: usize = 32;
    let partials: Vec<Vec<f64>> = rows
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; padded];
            let mut buf = vec![Complex64::new(0.0, 0.0); padded];
            for row in chunk {
                if row.iter().all(|c| c.norm_sqr() < 1e-300) {
                    continue;
                }
                buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
                buf[offset..offset + n].copy_from_slice(row);
                fft::propagate_line(&mut buf, dy, flight, &plans);
                for (a, c) in acc.iter_mut().zip(&buf) {
                    *a += c.norm_sqr() * dy;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; padded];
    for p in &partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let profile = Profile::new(total, dy);
    let tail = profile.boundary_mass();
    if tail > TAIL_TOLERANCE * marginal.mass() {
        return Err(PopperError::Resolution {
            reason: format!("beam over {} mm reaches the padded boundary (mass {tail:e})", leg.length()),
            required_extent_mm: 2.0 * half,
            required_step_mm: dy,
        });
    }
    Ok(profile)
}

fn particle2_wavenumber_rms(state: &GridState) -> f64 {
    let n = state.n();
    let dy = state.step();
    let plans = Plans::new(n);
    let k2: Vec<f64> = (0..n).map(|j| fft::wavenumber(j, n, dy).powi(2)).collect();
    let sums: Vec<(f64, f64)> = state
        .rows()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|row| {
            let mut buf = row.to_vec();
            plans.forward.process(&mut buf);
            buf.iter()
                .zip(&k2)
                .fold((0.0, 0.0), |(m0, m2), (c, k)| (m0 + c.norm_sqr(), m2 + c.norm_sqr() * k))
        })
        .collect();
    let (m0, m2) = sums.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    (m2 / m0).sqrt()
}

/// Coincidence pattern of particle 2 with a fixed particle-1 detector.
#[derive(Debug, Clone, Serialize)]
pub struct GhostPattern {
    #[serde(skip)]
    pub profile: Profile,
    /// Mean distance from the central maximum to its neighbouring maxima.
    pub fringe_spacing: Option<f64>,
    /// `(I_max - I_min)/(I_max + I_min)` of the central fringe; 0 without fringes.
    pub visibility: f64,
    pub weight: f64,
    pub widths: Widths,
}

/// Ghost pattern behind a particle-1 aperture.
///
/// `state` must already sit at the aperture plane. The aperture transmits
/// particle 1, which then flies `d1` to a point detector at `y₁ = 0`
/// (a Gaussian of one grid step). Particle 2 is conditioned on that click
/// and flown a further `l2`.
pub fn ghost_double_slit(
    state: &GridState,
    slit: &Aperture,
    d1: PropagationLeg,
    l2: PropagationLeg,
    params: PhysParams,
) -> Result<GhostPattern> {
    slit.validate()?;
    let spec = state.spec();
    let mut masked = state.clone();
    masked.apply_transmission(&slit.sample(&spec));
    let transmitted = masked.norm();
    if transmitted.is_nan() || transmitted <= MIN_WEIGHT {
        return Err(PopperError::DegenerateConditioning { weight: transmitted });
    }
    masked.scale(transmitted.sqrt().recip());
    let flown = evolve_spectral(&masked, d1, PropagationLeg::zero(), params)?;
    let detector = Aperture::Point {
        center: 0.0,
        tolerance: spec.step(),
    };
    let cond = condition(&flown, &detector)?;
    let at_screen = cond.amplitude.propagate(l2, params)?;
    let profile = at_screen.profile();
    let (fringe_spacing, visibility) = fringes(&profile);
    Ok(GhostPattern {
        widths: profile.widths(),
        profile,
        fringe_spacing,
        visibility,
        weight: cond.weight * transmitted,
    })
}

/// Fringe spacing and visibility around the global maximum.
pub fn fringes(profile: &Profile) -> (Option<f64>, f64) {
    let peaks = profile.peaks();
    let centre = profile.coordinate(profile.argmax());
    let Some(c) = peaks
        .iter()
        .position(|p| (p.0 - centre).abs() <= profile.step())
    else {
        return (None, 0.0);
    };
    let imax = peaks[c].1;
    let mut spacings = Vec::new();
    let mut minima = Vec::new();
    for k in [c.checked_sub(1), Some(c + 1)].into_iter().flatten() {
        if let Some(p) = peaks.get(k) {
            spacings.push((p.0 - peaks[c].0).abs());
            minima.push(profile.min_between(p.0, peaks[c].0));
        }
    }
    if spacings.is_empty() {
        return (None, 0.0);
    }
    let spacing = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let imin = minima.iter().sum::<f64>() / minima.len() as f64;
    (Some(spacing), (imax - imin) / (imax + imin))
}

#[cfg(test)]
mod tests;
