use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::{self, Plans};
use super::grid::TAIL_TOLERANCE;
use crate::error::{PopperError, Result};
use crate::gaussian::{PhysParams, PropagationLeg};

/// Largest padded line length used for 1-D flights.
const MAX_LINE_POINTS: usize = 1 << 22;

/// Local maxima below this fraction of the global maximum are ignored.
const PEAK_FLOOR: f64 = 0.05;

fn coordinate(j: usize, n: usize, dy: f64) -> f64 {
    (j as f64 - (n / 2) as f64) * dy
}

/// Single-particle complex amplitude on `y_j = (j - n/2)·dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitude {
    values: Vec<Complex64>,
    dy: f64,
}

impl Amplitude {
    pub fn new(values: Vec<Complex64>, dy: f64) -> Self {
        assert!(values.len().is_multiple_of(2), "line length must be even");
        Self { values, dy }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        self.dy
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        coordinate(j, self.values.len(), self.dy)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dy
    }

    pub fn normalized(mut self) -> Self {
        let scale = 1.0 / self.norm().sqrt();
        self.values.iter_mut().for_each(|c| *c *= scale);
        self
    }

    pub fn profile(&self) -> Profile {
        Profile::new(self.values.iter().map(|c| c.norm_sqr()).collect(), self.dy)
    }

    /// Free flight over `leg`. The line is zero-padded (same step, centred)
    /// until six standard deviations of the flown amplitude fit inside.
    pub fn propagate(&self, leg: PropagationLeg, params: PhysParams) -> Result<Amplitude> {
        if leg.length() == 0.0 {
            return Ok(self.clone());
        }
        let flight = params.reduced_wavelength() * leg.length();
        let n = self.values.len();
        let profile = self.profile();
        let rms0 = profile.variance().sqrt();
        let mean = profile.mean().abs();
        let k_rms = self.wavenumber_rms();
        // Ballistic bound: y(L) = y(0) + (ΛL/2)·k.
        let rms1 = rms0 + 0.5 * flight * k_rms;
        let half = 6.0 * rms1 + mean;
        let needed = ((2.0 * half / self.dy).ceil() as usize).next_power_of_two().max(n);
        if needed > MAX_LINE_POINTS {
            return Err(PopperError::Resolution {
                reason: format!("1-D flight of {} mm needs {needed} points", leg.length()),
                required_extent_mm: half,
                required_step_mm: self.dy,
            });
        }

        let mut padded = vec![Complex64::new(0.0, 0.0); needed];
        let offset = (needed - n) / 2;
        padded[offset..offset + n].copy_from_slice(&self.values);
        fft::propagate_line(&mut padded, self.dy, flight, &Plans::new(needed));
        let out = Amplitude::new(padded, self.dy);

        let tail = out.profile().boundary_mass();
        if tail > TAIL_TOLERANCE * self.norm() {
            return Err(PopperError::Resolution {
                reason: format!("1-D flight of {} mm reaches the padded boundary (mass {tail:e})", leg.length()),
                required_extent_mm: 2.0 * half,
                required_step_mm: self.dy,
            });
        }
        Ok(out)
    }

    fn wavenumber_rms(&self) -> f64 {
        let n = self.values.len();
        let mut spec = self.values.clone();
        Plans::new(n).forward.process(&mut spec);
        let (mut m0, mut m2) = (0.0, 0.0);
        for (j, c) in spec.iter().enumerate() {
            let k = fft::wavenumber(j, n, self.dy);
            let p = c.norm_sqr();
            m0 += p;
            m2 += p * k * k;
        }
        (m2 / m0).sqrt()
    }

    /// Complex `Γ` of the best-matching `exp(-y²/Γ)` from moments:
    /// `Re(1/Γ) = 1/(4⟨y²⟩)` and `Im(1/Γ) = -∫y·Im(φ*φ′) / (2⟨y²⟩)`.
    /// Exact for centred Gaussians; needs no phase unwrapping.
    pub fn gaussian_param(&self) -> Complex64 {
        let d = fft::derivative(&self.values, self.dy);
        let (mut m0, mut m2, mut flux) = (0.0, 0.0, 0.0);
        for (j, (v, dv)) in self.values.iter().zip(&d).enumerate() {
            let y = self.coordinate(j);
            m0 += v.norm_sqr();
            m2 += v.norm_sqr() * y * y;
            flux += y * (v.conj() * dv).im;
        }
        let y2 = m2 / m0;
        let inv = Complex64::new(1.0 / (4.0 * y2), -(flux / m0) / (2.0 * y2));
        inv.inv()
    }
}

/// Intensity profile on `y_j = (j - n/2)·dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    intensity: Vec<f64>,
    dy: f64,
}

/// Width summary of an intensity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Widths {
    pub rms: f64,
    /// FWHM of the lobe holding the global maximum.
    pub fwhm: f64,
    /// `2·rms`; equals `W` for `exp(-2y²/W²)`.
    pub gaussian_equiv_w: f64,
    pub multimodal: bool,
}

impl Profile {
    pub fn new(intensity: Vec<f64>, dy: f64) -> Self {
        Self { intensity, dy }
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn step(&self) -> f64 {
        self.dy
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        coordinate(j, self.intensity.len(), self.dy)
    }

    pub fn mass(&self) -> f64 {
        self.intensity.iter().sum::<f64>() * self.dy
    }

    pub fn mean(&self) -> f64 {
        let m0: f64 = self.intensity.iter().sum();
        self.intensity
            .iter()
            .enumerate()
            .map(|(j, p)| p * self.coordinate(j))
            .sum::<f64>()
            / m0
    }

    pub fn variance(&self) -> f64 {
        let m0: f64 = self.intensity.iter().sum();
        let mean = self.mean();
        self.intensity
            .iter()
            .enumerate()
            .map(|(j, p)| p * (self.coordinate(j) - mean).powi(2))
            .sum::<f64>()
            / m0
    }

    /// Sum of two profiles sampled on the same step, centred on `y = 0`.
    pub fn add(&mut self, other: &Profile) {
        assert_eq!(self.dy, other.dy);
        let (n, m) = (self.intensity.len(), other.intensity.len());
        if m > n {
            let mut grown = vec![0.0; m];
            let off = (m - n) / 2;
            grown[off..off + n].copy_from_slice(&self.intensity);
            self.intensity = grown;
        }
        let n = self.intensity.len();
        let off = (n - m) / 2;
        for (dst, src) in self.intensity[off..off + m].iter_mut().zip(&other.intensity) {
            *dst += src;
        }
    }

    pub(crate) fn boundary_mass(&self) -> f64 {
        let n = self.intensity.len();
        let band = ((n as f64) * 0.025).ceil() as usize;
        (self.intensity[..band].iter().sum::<f64>() + self.intensity[n - band..].iter().sum::<f64>()) * self.dy
    }

    pub fn argmax(&self) -> usize {
        self.intensity
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (j, &v)| if v > best.1 { (j, v) } else { best })
            .0
    }

    /// Local maxima above 5% of the global maximum, as
    /// `(parabolic peak position, height)`, sorted by position.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        let p = &self.intensity;
        let floor = PEAK_FLOOR * p[self.argmax()];
        let mut out = Vec::new();
        for j in 1..p.len().saturating_sub(1) {
            if p[j] > p[j - 1] && p[j] >= p[j + 1] && p[j] > floor {
                let denom = p[j - 1] - 2.0 * p[j] + p[j + 1];
                let shift = if denom != 0.0 { 0.5 * (p[j - 1] - p[j + 1]) / denom } else { 0.0 };
                out.push((self.coordinate(j) + shift * self.dy, p[j]));
            }
        }
        out
    }

    /// Smallest intensity between two positions.
    pub fn min_between(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.intensity
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                let y = self.coordinate(*j);
                y >= lo && y <= hi
            })
            .map(|(_, &v)| v)
            .fold(f64::INFINITY, f64::min)
    }

    fn is_multimodal(&self) -> bool {
        let peaks = self.peaks();
        peaks.windows(2).any(|w| {
            let dip = self.min_between(w[0].0, w[1].0);
            dip < 0.9 * w[0].1.min(w[1].1)
        })
    }

    pub fn widths(&self) -> Widths {
        let rms = self.variance().sqrt();
        Widths {
            rms,
            fwhm: self.fwhm(),
            gaussian_equiv_w: 2.0 * rms,
            multimodal: self.is_multimodal(),
        }
    }

    /// Full width at half maximum of the global-maximum lobe, linearly
    /// interpolated on both flanks.
    pub fn fwhm(&self) -> f64 {
        let p = &self.intensity;
        let m = self.argmax();
        let half = 0.5 * p[m];
        let mut left = m;
        while left > 0 && p[left] >= half {
            left -= 1;
        }
        let mut right = m;
        while right + 1 < p.len() && p[right] >= half {
            right += 1;
        }
        let cross = |inside: usize, outside: usize| {
            let (yi, yo) = (self.coordinate(inside), self.coordinate(outside));
            let (pi, po) = (p[inside], p[outside]);
            if pi == po {
                yo
            } else {
                yo + (half - po) / (pi - po) * (yi - yo)
            }
        };
        cross(right - 1, right) - cross(left + 1, left)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian_line(gamma: Complex64, n: usize, dy: f64) -> Amplitude {
        let values = (0..n)
            .map(|j| {
                let y = coordinate(j, n, dy);
                (-(y * y) / gamma).exp()
            })
            .collect();
        Amplitude::new(values, dy).normalized()
    }

    #[test]
    fn gaussian_widths() {
        // W = 1: rms 0.5, FWHM √(2 ln 2).
        let line = gaussian_line(Complex64::new(1.0, 0.0), 4096, 0.004);
        let w = line.profile().widths();
        assert_relative_eq!(w.rms, 0.5, max_relative = 1e-9);
        assert_relative_eq!(w.fwhm, 1.177_41, max_relative = 1e-3);
        assert_relative_eq!(w.gaussian_equiv_w, 1.0, max_relative = 1e-9);
        assert!(!w.multimodal);
    }

    #[test]
    fn two_lobes_are_multimodal() {
        let n = 2048;
        let dy = 0.01;
        let values = (0..n)
            .map(|j| {
                let y = coordinate(j, n, dy);
                Complex64::new((-(y - 2.0).powi(2)).exp() + 0.6 * (-(y + 2.0).powi(2)).exp(), 0.0)
            })
            .collect();
        let w = Amplitude::new(values, dy).profile().widths();
        assert!(w.multimodal);
        // Global-max lobe only.
        assert_relative_eq!(w.fwhm, 2.0 * (std::f64::consts::LN_2 / 2.0).sqrt(), max_relative = 2e-3);
    }

    #[test]
    fn flight_matches_gamma_increment() {
        let p = PhysParams::from_nm(702.0).unwrap();
        let line = gaussian_line(Complex64::new(0.01, 0.0), 512, 0.01);
        let flown = line.propagate(PropagationLeg::new(100.0).unwrap(), p).unwrap();
        assert_relative_eq!(flown.norm(), 1.0, max_relative = 1e-10);
        let g = flown.gaussian_param();
        assert_relative_eq!(g.re, 0.01, max_relative = 1e-6);
        assert_relative_eq!(g.im, 0.022_345_354, max_relative = 1e-6);
        // Intensity width |Γ|/√Re Γ = 0.24481 mm.
        assert_relative_eq!(flown.profile().widths().gaussian_equiv_w, 0.244_809, max_relative = 1e-4);
    }

    #[test]
    fn moment_fit_recovers_chirp() {
        let gamma = Complex64::new(0.05, -0.3);
        let g = gaussian_line(gamma, 4096, 0.005).gaussian_param();
        assert_relative_eq!(g.re, gamma.re, max_relative = 1e-8);
        assert_relative_eq!(g.im, gamma.im, max_relative = 1e-8);
    }

    #[test]
    fn profile_sum_aligns_centres() {
        // y = -1 is index 1 of the short profile and index 3 of the long one.
        let mut a = Profile::new(vec![0.0, 1.0, 0.0, 0.0], 1.0);
        let b = Profile::new(vec![0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0], 1.0);
        a.add(&b);
        assert_eq!(a.intensity().len(), 8);
        assert_eq!(a.intensity()[3], 3.0);
        assert_eq!(a.mass(), 3.0);
    }
}
