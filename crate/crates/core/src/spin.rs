//! Two spin-1 particles with ideal Stern–Gerlach projective measurements.
//!
//! Basis order is `(+1, 0, -1)` everywhere: amplitude `[i][j]` belongs to
//! `|A_z; m_i⟩|B_z; m_j⟩` with `m = [+1, 0, -1]`.

use std::fmt;

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PopperError, Result};

/// Eigenvalues in basis order.
pub const EIGENVALUES: [i8; 3] = [1, 0, -1];

const NORM_TOL: f64 = 1e-12;

/// Accepted slack in `2α² + β² = 1`: enough for coefficients typed to
/// eight decimals (`α = 0.70710678`).
pub const COEFFICIENT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Particle {
    A,
    B,
}

impl Particle {
    pub fn partner(self) -> Particle {
        match self {
            Particle::A => Particle::B,
            Particle::B => Particle::A,
        }
    }
}

impl fmt::Display for Particle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Particle::A => f.write_str("A"),
            Particle::B => f.write_str("B"),
        }
    }
}

/// Born-rule probabilities for outcomes `(+1, 0, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution(pub [f64; 3]);

impl Distribution {
    pub fn plus(&self) -> f64 {
        self.0[0]
    }

    pub fn zero(&self) -> f64 {
        self.0[1]
    }

    pub fn minus(&self) -> f64 {
        self.0[2]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().zip(EIGENVALUES).map(|(p, m)| p * f64::from(m)).sum()
    }

    /// Variance of the measured eigenvalue.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.0
            .iter()
            .zip(EIGENVALUES)
            .map(|(p, m)| p * (f64::from(m) - mean).powi(2))
            .sum()
    }
}

/// Joint pure state of spins A and B in the z basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    amplitudes: [[Complex64; 3]; 3],
}

impl SpinState {
    /// Normalized state from raw amplitudes `[m_A][m_B]`.
    pub fn new(amplitudes: [[Complex64; 3]; 3]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().flatten().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(PopperError::domain(format!("spin state norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[[Complex64; 3]; 3] {
        &self.amplitudes
    }

    pub fn amplitude(&self, m_a: usize, m_b: usize) -> Complex64 {
        self.amplitudes[m_a][m_b]
    }

    fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().flatten().map(|c| c.norm_sqr()).sum()
    }
}

/// `α|+1,-1⟩ + β|0,0⟩ + α|-1,+1⟩` with `2α² + β² = 1`.
pub fn make_popper_spin_state(alpha: f64, beta: f64) -> Result<SpinState> {
    let norm = 2.0 * alpha * alpha + beta * beta;
    if !norm.is_finite() || (norm - 1.0).abs() > COEFFICIENT_TOL {
        return Err(PopperError::domain(format!(
            "2 alpha^2 + beta^2 = {norm}, expected 1"
        )));
    }
    // Absorb the residual so the stored state is normalized to machine precision.
    let scale = norm.sqrt().recip();
    let zero = Complex64::new(0.0, 0.0);
    let mut amplitudes = [[zero; 3]; 3];
    amplitudes[0][2] = Complex64::new(alpha * scale, 0.0);
    amplitudes[1][1] = Complex64::new(beta * scale, 0.0);
    amplitudes[2][0] = Complex64::new(alpha * scale, 0.0);
    SpinState::new(amplitudes)
}

/// The `α = √0.05`, `β = √0.9` state used for the coincidence demonstration.
pub fn eq2_state() -> SpinState {
    make_popper_spin_state(0.05f64.sqrt(), 0.9f64.sqrt()).expect("preset is normalized")
}

/// Rows are the `S_x` eigenvectors `|x; +1⟩, |x; 0⟩, |x; -1⟩` in z components.
///
/// Obtained by diagonalizing `S_x = (1/√2)[[0,1,0],[1,0,1],[0,1,0]]`; each
/// row's first nonzero component is made real-positive.
pub fn x_basis_matrix() -> [[Complex64; 3]; 3] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sx = Matrix3::new(0.0, h, 0.0, h, 0.0, h, 0.0, h, 0.0);
    let eig = SymmetricEigen::new(sx);

    let zero = Complex64::new(0.0, 0.0);
    let mut rows = [[zero; 3]; 3];
    for (slot, &m) in EIGENVALUES.iter().enumerate() {
        let idx = eig
            .eigenvalues
            .iter()
            .position(|&e| (e - f64::from(m)).abs() < 1e-9)
            .expect("spin-1 S_x has eigenvalues +1, 0, -1");
        let v = eig.eigenvectors.column(idx);
        let lead = v.iter().copied().find(|c| c.abs() > 1e-12).unwrap_or(1.0);
        let sign = lead.signum();
        for k in 0..3 {
            // Exact zeros keep the basis free of 1e-17 noise.
            let c = sign * v[k];
            rows[slot][k] = Complex64::new(if c.abs() < 1e-14 { 0.0 } else { c }, 0.0);
        }
    }
    rows
}

fn z_basis_matrix() -> [[Complex64; 3]; 3] {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [[o, z, z], [z, o, z], [z, z, o]]
}

fn basis(axis: Axis) -> [[Complex64; 3]; 3] {
    match axis {
        Axis::X => x_basis_matrix(),
        Axis::Z => z_basis_matrix(),
    }
}

/// Amplitude of `⟨e| ⊗ 1` (or `1 ⊗ ⟨e|`) applied to the state: the
/// unnormalized partner vector for outcome row `e` (z components).
fn project(state: &SpinState, particle: Particle, e: &[Complex64; 3]) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (k, o) in out.iter_mut().enumerate() {
        *o = (0..3)
            .map(|j| {
                let amp = match particle {
                    Particle::A => state.amplitudes[j][k],
                    Particle::B => state.amplitudes[k][j],
                };
                e[j].conj() * amp
            })
            .sum();
    }
    out
}

pub fn marginal_probabilities(state: &SpinState, particle: Particle, axis: Axis) -> Distribution {
    let rows = basis(axis);
    let mut p = [0.0; 3];
    for (slot, e) in rows.iter().enumerate() {
        p[slot] = project(state, particle, e).iter().map(|c| c.norm_sqr()).sum();
    }
    Distribution(p)
}

/// Result of a projective measurement on one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub axis: Axis,
    pub particle: Particle,
    pub value: i8,
    pub probability: f64,
    pub post_state: SpinState,
}

impl MeasurementOutcome {
    /// Distribution of the partner particle in coincidence with this outcome.
    pub fn partner_distribution(&self, axis: Axis) -> Distribution {
        marginal_probabilities(&self.post_state, self.particle.partner(), axis)
    }
}

/// Measure `particle` along `axis`, keep outcome `value`, and renormalize.
pub fn condition_on(state: &SpinState, particle: Particle, axis: Axis, value: i8) -> Result<MeasurementOutcome> {
    let slot = EIGENVALUES
        .iter()
        .position(|&m| m == value)
        .ok_or_else(|| PopperError::domain(format!("spin-1 outcome must be +1, 0 or -1, got {value}")))?;
    let e = basis(axis)[slot];
    let partner = project(state, particle, &e);
    let probability: f64 = partner.iter().map(|c| c.norm_sqr()).sum();
    if probability < 1e-15 {
        return Err(PopperError::ImpossibleOutcome(format!(
            "particle {particle} along {axis:?} = {value} has probability {probability:e}"
        )));
    }
    let scale = probability.sqrt().recip();

    let mut amplitudes = [[Complex64::new(0.0, 0.0); 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let amp = e[j] * partner[k] * scale;
            match particle {
                Particle::A => amplitudes[j][k] = amp,
                Particle::B => amplitudes[k][j] = amp,
            }
        }
    }
    let post_state = SpinState { amplitudes };
    debug_assert!((post_state.norm_sqr() - 1.0).abs() < 1e-12);
    Ok(MeasurementOutcome {
        axis,
        particle,
        value,
        probability,
        post_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_dist(d: Distribution, expected: [f64; 3], tol: f64) {
        for (got, want) in d.0.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = tol);
        }
    }

    #[test]
    fn basis_is_unitary() {
        let u = x_basis_matrix();
        for i in 0..3 {
            for j in 0..3 {
                let dot: Complex64 = (0..3).map(|k| u[i][k] * u[j][k].conj()).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot.re, want, epsilon = 1e-12);
                assert_abs_diff_eq!(dot.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn x_eigenvectors() {
        let u = x_basis_matrix();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // ⟨x;0|z;0⟩ = 0 and ⟨x;+1|z;0⟩ = 1/√2.
        assert_eq!(u[1][1], Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(u[0][1].re, h, epsilon = 1e-14);
        assert_abs_diff_eq!(u[1][0].re, h, epsilon = 1e-14);
        assert_abs_diff_eq!(u[1][2].re, -h, epsilon = 1e-14);
    }

    #[test]
    fn constructor() {
        let s = make_popper_spin_state(0.0, 1.0).unwrap();
        assert_eq!(s.amplitude(1, 1), Complex64::new(1.0, 0.0));
        assert!(make_popper_spin_state(0.5, 0.5).is_err());
        let s = eq2_state();
        assert_abs_diff_eq!(s.amplitude(0, 2).re, 0.05f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(2, 0).re, 0.05f64.sqrt(), epsilon = 1e-15);
        assert_eq!(s.amplitude(0, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn marginals() {
        let s = eq2_state();
        assert_dist(marginal_probabilities(&s, Particle::B, Axis::Z), [0.05, 0.9, 0.05], 1e-12);
        assert_dist(marginal_probabilities(&s, Particle::A, Axis::X), [0.475, 0.05, 0.475], 1e-12);
        let s = make_popper_spin_state(0.0, 1.0).unwrap();
        assert_dist(marginal_probabilities(&s, Particle::B, Axis::Z), [0.0, 1.0, 0.0], 1e-15);
        let s = make_popper_spin_state(0.5f64.sqrt(), 0.0).unwrap();
        assert_dist(marginal_probabilities(&s, Particle::B, Axis::Z), [0.5, 0.0, 0.5], 1e-12);
    }

    #[test]
    fn coincidences() {
        let s = eq2_state();
        let o = condition_on(&s, Particle::A, Axis::X, 0).unwrap();
        assert_abs_diff_eq!(o.probability, 0.05, epsilon = 1e-12);
        assert_dist(o.partner_distribution(Axis::Z), [0.5, 0.0, 0.5], 1e-12);
        // B ends up in (|+1⟩ - |-1⟩)/√2 up to a global phase.
        let b = o.post_state.amplitudes()[1];
        assert_abs_diff_eq!((b[0] + b[2]).norm(), 0.0, epsilon = 1e-12);

        let o = condition_on(&s, Particle::A, Axis::X, 1).unwrap();
        assert_dist(o.partner_distribution(Axis::Z), [1.0 / 38.0, 36.0 / 38.0, 1.0 / 38.0], 1e-12);

        let o = condition_on(&s, Particle::A, Axis::Z, 1).unwrap();
        assert_dist(o.partner_distribution(Axis::Z), [0.0, 0.0, 1.0], 1e-15);
    }

    #[test]
    fn impossible_and_invalid_outcomes() {
        let s = make_popper_spin_state(0.0, 1.0).unwrap();
        assert!(matches!(
            condition_on(&s, Particle::A, Axis::Z, 1),
            Err(PopperError::ImpossibleOutcome(_))
        ));
        assert!(condition_on(&s, Particle::A, Axis::Z, 2).is_err());
    }

    #[test]
    fn conditioning_on_b_mirrors_a() {
        let s = eq2_state();
        let a = condition_on(&s, Particle::A, Axis::X, 0).unwrap();
        let b = condition_on(&s, Particle::B, Axis::X, 0).unwrap();
        assert_abs_diff_eq!(a.probability, b.probability, epsilon = 1e-14);
        assert_dist(b.partner_distribution(Axis::Z), a.partner_distribution(Axis::Z).0, 1e-14);
    }

    #[test]
    fn scatter_increases_under_coincidence() {
        let s = eq2_state();
        let before = marginal_probabilities(&s, Particle::B, Axis::Z);
        let after = condition_on(&s, Particle::A, Axis::X, 0).unwrap().partner_distribution(Axis::Z);
        assert_abs_diff_eq!(before.variance(), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(after.variance(), 1.0, epsilon = 1e-12);
    }
}
