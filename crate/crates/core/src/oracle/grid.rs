use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fft::{self, Plans};
use super::line::Profile;
use crate::error::{PopperError, Result};
use crate::gaussian::{beam_width_exact, make_epr_state, evolve_free, PhysParams, PropagationLeg};

/// Smallest supported grid.
pub const MIN_POINTS: usize = 256;

/// Probability allowed in the outer 5% band of the domain.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Environment variable capping the points per axis of any oracle grid.
pub const MAX_GRID_ENV: &str = "POPPER_SIM_MAX_GRID";

const DEFAULT_MAX_POINTS: usize = 4096;

/// Tail coverage in standard deviations demanded at build time.
const EXTENT_SIGMAS: f64 = 6.0;

/// Momentum coverage demanded at build time: Nyquist ≥ 6 σ_k.
const NYQUIST_SIGMAS: f64 = 6.0;

/// Momentum coverage used when sizing grids automatically.
const AUTO_NYQUIST_SIGMAS: f64 = 7.0;

/// Samples per Gaussian aperture width when sizing automatically.
const SAMPLES_PER_FEATURE: f64 = 3.0;

/// Symmetric square grid `[-extent, extent)²` with `n` points per axis.
///
/// Sample `j` sits at `y = (j - n/2)·dy` with `dy = 2·extent/n`, so the grid
/// is periodic (FFT-consistent) and contains `y = 0` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub extent: f64,
}

impl GridSpec {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(PopperError::config(format!(
                "grid size must be a power of two >= {MIN_POINTS}, got {n}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(PopperError::config(format!("grid extent must be positive, got {extent}")));
        }
        Ok(Self { n, extent })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.step()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.coordinate(j)).collect()
    }

    /// Largest grid allowed by `POPPER_SIM_MAX_GRID` (default 4096).
    pub fn max_points() -> usize {
        std::env::var(MAX_GRID_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(DEFAULT_MAX_POINTS)
    }

    /// Size a grid for a source `(a, Ω)` that will fly up to `max_flight`
    /// before conditioning on apertures no narrower than `min_feature`.
    ///
    /// Extent covers six standard deviations of the widest particle marginal
    /// met along the way; the step resolves seven momentum standard
    /// deviations and the narrowest aperture.
    pub fn auto(sizing: &GridSizing, params: PhysParams) -> Result<Self> {
        let (extent, step) = sizing.requirements(params)?;
        let cap = sizing.max_points.unwrap_or_else(Self::max_points);
        let raw = (2.0 * extent / step).ceil() as usize;
        let n = raw.next_power_of_two().max(MIN_POINTS);
        match sizing.points {
            Some(points) => {
                let spec = Self::new(points, extent)?;
                if points > cap {
                    return Err(cap_error(points, cap, extent, step));
                }
                Ok(spec)
            }
            None if n > cap => Err(cap_error(n, cap, extent, step)),
            None => Self::new(n, extent),
        }
    }
}

fn cap_error(n: usize, cap: usize, extent: f64, step: f64) -> PopperError {
    PopperError::Resolution {
        reason: format!("grid needs {n} points per axis, above the cap of {cap} ({MAX_GRID_ENV})"),
        required_extent_mm: extent,
        required_step_mm: step,
    }
}

/// Inputs for [`GridSpec::auto`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSizing {
    pub a: f64,
    pub omega: f64,
    /// Longest common flight of the two-particle state on the grid.
    pub max_flight: f64,
    /// Narrowest aperture scale to resolve.
    pub min_feature: f64,
    /// Fixed number of points (extent is still sized automatically).
    pub points: Option<usize>,
    /// Override of the environment cap.
    pub max_points: Option<usize>,
}

impl GridSizing {
    pub fn new(a: f64, omega: f64) -> Self {
        Self {
            a,
            omega,
            max_flight: 0.0,
            min_feature: f64::INFINITY,
            points: None,
            max_points: None,
        }
    }

    pub fn flight(mut self, max_flight: f64) -> Self {
        self.max_flight = max_flight;
        self
    }

    pub fn feature(mut self, min_feature: f64) -> Self {
        self.min_feature = min_feature;
        self
    }

    pub fn points(mut self, n: Option<usize>) -> Self {
        self.points = n;
        self
    }

    pub fn cap(mut self, max_points: usize) -> Self {
        self.max_points = Some(max_points);
        self
    }

    fn requirements(&self, params: PhysParams) -> Result<(f64, f64)> {
        let source = make_epr_state(self.a, self.omega)?;
        let flight = PropagationLeg::new(self.max_flight)?;
        // Marginal rms of either particle: beam_width_exact is 2·rms.
        let rms0 = beam_width_exact(&source, PropagationLeg::zero(), params) / 2.0;
        let rms1 = beam_width_exact(&evolve_free(&source, flight, params), PropagationLeg::zero(), params) / 2.0;
        let extent = EXTENT_SIGMAS * rms0.max(rms1);
        let sigma_k = momentum_sigma(self.a, self.omega);
        let mut step = PI / (AUTO_NYQUIST_SIGMAS * sigma_k);
        if self.min_feature.is_finite() {
            step = step.min(self.min_feature / SAMPLES_PER_FEATURE);
        }
        Ok((extent, step))
    }
}

fn momentum_sigma(a: f64, omega: f64) -> f64 {
    (1.0 / (a * a) + 1.0 / (4.0 * omega * omega)).sqrt()
}

/// Discretized two-particle amplitude `ψ(y₁, y₂)`; rows index `y₁`.
#[derive(Debug, Clone)]
pub struct GridState {
    spec: GridSpec,
    psi: Vec<Complex64>,
    flight: [f64; 2],
}

/// Sample the source state `exp(-(y₁-y₂)²/a²) exp(-(y₁+y₂)²/4Ω²)` and
/// normalize it discretely.
pub fn build_grid_state(a: f64, omega: f64, grid: GridSpec) -> Result<GridState> {
    make_epr_state(a, omega)?;
    let rms = 0.5 * (omega * omega + a * a / 4.0).sqrt();
    let required_extent = EXTENT_SIGMAS * rms;
    let required_step = PI / (NYQUIST_SIGMAS * momentum_sigma(a, omega));
    if grid.extent < required_extent || grid.step() > required_step {
        return Err(PopperError::Resolution {
            reason: format!(
                "grid n = {}, extent = {} mm (step {:.5} mm) cannot hold the source state",
                grid.n,
                grid.extent,
                grid.step()
            ),
            required_extent_mm: required_extent,
            required_step_mm: required_step,
        });
    }

    let n = grid.n;
    let y = grid.coordinates();
    let (inv_u, inv_v) = (1.0 / (a * a), 1.0 / (4.0 * omega * omega));
    let mut psi = vec![Complex64::new(0.0, 0.0); n * n];
    psi.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let y1 = y[i];
        for (j, cell) in row.iter_mut().enumerate() {
            let u = y1 - y[j];
            let v = y1 + y[j];
            *cell = Complex64::new((-u * u * inv_u - v * v * inv_v).exp(), 0.0);
        }
    });
    let mut state = GridState {
        spec: grid,
        psi,
        flight: [0.0, 0.0],
    };
    let norm = state.norm();
    let scale = 1.0 / norm.sqrt();
    state.psi.par_iter_mut().for_each(|c| *c *= scale);
    Ok(state)
}

impl GridState {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn step(&self) -> f64 {
        self.spec.step()
    }

    /// Flight distances `[particle 1, particle 2]` since the source.
    pub fn flight(&self) -> [f64; 2] {
        self.flight
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.psi[i * self.spec.n + j]
    }

    pub(crate) fn rows(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.psi.chunks_exact(self.spec.n)
    }

    /// Discrete `Σ|ψ|² dy²`, reduced row by row in a fixed order.
    pub fn norm(&self) -> f64 {
        let dy = self.step();
        let per_row: Vec<f64> = self
            .psi
            .par_chunks(self.spec.n)
            .map(|row| row.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .collect();
        per_row.iter().sum::<f64>() * dy * dy
    }

    /// Probability of `y₁` (axis 0) or `y₂` (axis 1) in `[−extent, extent)`.
    pub fn marginal(&self, particle: usize) -> Profile {
        let n = self.spec.n;
        let dy = self.step();
        let values = if particle == 0 {
            self.psi
                .par_chunks(n)
                .map(|row| row.iter().map(|c| c.norm_sqr()).sum::<f64>() * dy)
                .collect::<Vec<_>>()
        } else {
            (0..n)
                .into_par_iter()
                .map(|j| (0..n).map(|i| self.psi[i * n + j].norm_sqr()).sum::<f64>() * dy)
                .collect()
        };
        Profile::new(values, dy)
    }

    /// Correlation coefficient of `y₁` and `y₂` under `|ψ|²`.
    pub fn correlation(&self) -> f64 {
        let n = self.spec.n;
        let y = self.spec.coordinates();
        let rows: Vec<[f64; 6]> = self
            .psi
            .par_chunks(n)
            .enumerate()
            .map(|(i, row)| {
                let mut acc = [0.0; 6];
                for (j, c) in row.iter().enumerate() {
                    let p = c.norm_sqr();
                    acc[0] += p;
                    acc[1] += p * y[i];
                    acc[2] += p * y[j];
                    acc[3] += p * y[i] * y[j];
                    acc[4] += p * y[i] * y[i];
                    acc[5] += p * y[j] * y[j];
                }
                acc
            })
            .collect();
        let mut s = [0.0; 6];
        for r in &rows {
            for (total, v) in s.iter_mut().zip(r) {
                *total += v;
            }
        }
        let m = |k: usize| s[k] / s[0];
        let cov = m(3) - m(1) * m(2);
        cov / ((m(4) - m(1) * m(1)) * (m(5) - m(2) * m(2))).sqrt()
    }

    fn second_moments(&self) -> (f64, f64) {
        let (m0, m1) = (self.marginal(0), self.marginal(1));
        (m0.variance(), m1.variance())
    }

    /// Multiply each row `y₁` by a transmission `t(y₁)`; the result is not
    /// renormalized.
    pub fn apply_transmission(&mut self, t: &[f64]) {
        let n = self.spec.n;
        assert_eq!(t.len(), n);
        self.psi.par_chunks_mut(n).zip(t.par_iter()).for_each(|(row, &ti)| {
            for c in row.iter_mut() {
                *c *= ti;
            }
        });
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        self.psi.par_iter_mut().for_each(|c| *c *= factor);
    }

    /// Probability in the outer 5% band of either axis.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.spec.n;
        let band = ((n as f64) * 0.025).ceil() as usize;
        let outer = |k: usize| k < band || k >= n - band;
        let dy = self.step();
        let per_row: Vec<f64> = self
            .psi
            .par_chunks(n)
            .enumerate()
            .map(|(i, row)| {
                if outer(i) {
                    row.iter().map(|c| c.norm_sqr()).sum()
                } else {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| outer(*j))
                        .map(|(_, c)| c.norm_sqr())
                        .sum()
                }
            })
            .collect();
        per_row.iter().sum::<f64>() * dy * dy
    }
}

/// Free flight of particle 1 by `l1` and particle 2 by `l2`: every plane
/// wave `(k₁, k₂)` picks up `exp(-i(k₁²ΛL₁ + k₂²ΛL₂)/4)`, which maps
/// `exp(-y²/ε²)` to `exp(-y²/(ε² + iΛL))`.
pub fn evolve_spectral(state: &GridState, l1: PropagationLeg, l2: PropagationLeg, params: PhysParams) -> Result<GridState> {
    let n = state.spec.n;
    let dy = state.step();
    let mut out = state.clone();
    out.flight[0] += l1.length();
    out.flight[1] += l2.length();
    if l1.length() == 0.0 && l2.length() == 0.0 {
        return Ok(out);
    }

    let plans = Plans::new(n);
    fft::fft2(&mut out.psi, n, &plans.forward);
    let lam = params.reduced_wavelength();
    let (f1, f2) = (lam * l1.length() / 4.0, lam * l2.length() / 4.0);
    let scale = 1.0 / (n * n) as f64;
    let k: Vec<f64> = (0..n).map(|j| fft::wavenumber(j, n, dy)).collect();
    let phase2: Vec<Complex64> = k.iter().map(|kj| Complex64::from_polar(1.0, -kj * kj * f2)).collect();
    out.psi.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let p1 = Complex64::from_polar(scale, -k[i] * k[i] * f1);
        for (c, p2) in row.iter_mut().zip(&phase2) {
            *c *= p1 * p2;
        }
    });
    fft::fft2(&mut out.psi, n, &plans.inverse);

    let tail = out.boundary_mass();
    if tail > TAIL_TOLERANCE * state.norm().max(f64::MIN_POSITIVE) {
        let (v1, v2) = out.second_moments();
        let rms = v1.max(v2).sqrt();
        return Err(PopperError::Resolution {
            reason: format!(
                "propagated state reaches the domain boundary (outer-band probability {tail:e}) after flights {:?} mm",
                out.flight
            ),
            required_extent_mm: EXTENT_SIGMAS * rms,
            required_step_mm: dy,
        });
    }
    Ok(out)
}
