use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, GridState};
use super::line::Amplitude;
use crate::error::{PopperError, Result};

/// Coincidence weights below this are treated as "never transmits".
pub const MIN_WEIGHT: f64 = 1e-12;

/// Aperture or detector mode acting on particle 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Aperture {
    /// Amplitude `exp(-y²/ε²)`.
    Gaussian { epsilon: f64 },
    /// Hard-edged slit centred on `y = 0`.
    Rect { full_width: f64 },
    /// Two hard-edged slits centred at `±separation/2`.
    DoubleSlit { slit_width: f64, separation: f64 },
    /// Narrow detector: amplitude `exp(-(y-y*)²/tolerance²)`.
    Point { center: f64, tolerance: f64 },
}

/// Overlap of the cell `[y - dy/2, y + dy/2]` with `[lo, hi]`, in `[0, 1]`.
fn coverage(y: f64, dy: f64, lo: f64, hi: f64) -> f64 {
    let a = (y - dy / 2.0).max(lo);
    let b = (y + dy / 2.0).min(hi);
    ((b - a) / dy).clamp(0.0, 1.0)
}

impl Aperture {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Aperture::Gaussian { epsilon } => epsilon > 0.0,
            Aperture::Rect { full_width } => full_width > 0.0,
            Aperture::DoubleSlit { slit_width, separation } => slit_width > 0.0 && separation > slit_width,
            Aperture::Point { tolerance, .. } => tolerance > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(PopperError::domain(format!("invalid aperture {self:?}")))
        }
    }

    /// Amplitude transmission sampled on a cell of width `dy` at `y`.
    /// Hard edges use fractional cell coverage.
    pub fn transmission(&self, y: f64, dy: f64) -> f64 {
        match *self {
            Aperture::Gaussian { epsilon } => (-(y * y) / (epsilon * epsilon)).exp(),
            Aperture::Rect { full_width } => coverage(y, dy, -full_width / 2.0, full_width / 2.0),
            Aperture::DoubleSlit { slit_width, separation } => {
                let c = separation / 2.0;
                let h = slit_width / 2.0;
                coverage(y, dy, -c - h, -c + h) + coverage(y, dy, c - h, c + h)
            }
            Aperture::Point { center, tolerance } => (-((y - center) / tolerance).powi(2)).exp(),
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        let dy = grid.step();
        grid.coordinates().iter().map(|&y| self.transmission(y, dy)).collect()
    }

    /// Projector mode `φ₁` on the grid, normalized so `Σ|φ₁|² dy = 1`.
    pub fn mode(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        self.validate()?;
        let mut t = self.sample(grid);
        let norm: f64 = t.iter().map(|v| v * v).sum::<f64>() * grid.step();
        if norm <= 0.0 {
            return Err(PopperError::Resolution {
                reason: format!("aperture {self:?} falls between grid samples"),
                required_extent_mm: grid.extent,
                required_step_mm: grid.step() / 2.0,
            });
        }
        let s = norm.sqrt().recip();
        t.iter_mut().for_each(|v| *v *= s);
        Ok(t)
    }
}

/// Conditional amplitude of particle 2 and the probability of the
/// particle-1 outcome that produced it.
#[derive(Debug, Clone)]
pub struct Conditional {
    pub amplitude: Amplitude,
    /// `Σ|φ₂|² dy` before renormalization.
    pub weight: f64,
}

/// `φ₂(y₂) = Σᵢ φ₁*(y₁ᵢ) ψ(y₁ᵢ, y₂) dy`, renormalized.
pub fn condition(state: &GridState, aperture: &Aperture) -> Result<Conditional> {
    let spec = state.spec();
    let mode = aperture.mode(&spec)?;
    project_rows(state, &mode)
}

pub(crate) fn project_rows(state: &GridState, mode: &[f64]) -> Result<Conditional> {
    let n = state.n();
    let dy = state.step();
    let active: Vec<(usize, f64)> = mode
        .iter()
        .enumerate()
        .filter(|(_, w)| w.abs() > 1e-300)
        .map(|(i, &w)| (i, w))
        .collect();
    let rows: Vec<&[Complex64]> = state.rows().collect();

    const CHUNK: usize = 256;
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    values.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
        let start = c * CHUNK;
        for &(i, w) in &active {
            let row = &rows[i][start..start + out.len()];
            for (o, psi) in out.iter_mut().zip(row) {
                *o += psi * (w * dy);
            }
        }
    });

    let amplitude = Amplitude::new(values, dy);
    let weight = amplitude.norm();
    if weight.is_nan() || weight <= MIN_WEIGHT {
        return Err(PopperError::DegenerateConditioning { weight });
    }
    Ok(Conditional {
        amplitude: amplitude.normalized(),
        weight,
    })
}
