//! Closed-form complex-Gaussian algebra for entangled two-particle states.
//!
//! Conventions used throughout:
//!
//! * lengths in millimetres, `ħ = 1`, momenta in rad/mm;
//! * a 1-D amplitude is `exp(-y²/Γ)` with complex area `Γ` (mm²);
//! * free flight over an axial distance `L` adds `iΛL` to `Γ`, where
//!   `Λ = λ/π` is the reduced wavelength (equivalently `2ħt/m = ΛL`);
//! * the two-particle source is
//!   `ψ(y₁, y₂) ∝ exp(-(y₁-y₂)²/Γᵤ) · exp(-(y₁+y₂)²/Γᵥ)` with `Γᵤ = a²`,
//!   `Γᵥ = 4Ω²` at the source, where `a = ħ/σ` is the inverse momentum
//!   spread and `Ω` bounds `y₁ + y₂`.
//!
//! Intensity widths `W` follow `|φ|² ∝ exp(-2y²/W²)`, i.e. `W = 2·rms`.
//! For `Γ = s² + iΛD` this gives `W² = s² + Λ²D²/s²`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PopperError, Result};

/// Numerical stand-in for an unbounded source extent `Ω → ∞`.
pub const LARGE_OMEGA_MM: f64 = 1.0e6;

/// `√(2 ln 2)`: FWHM of `exp(-2y²/W²)` in units of `W`.
pub const FWHM_PER_WIDTH: f64 = 1.177_410_022_515_474_6;

/// Wavelength and the derived reduced wavelength `Λ = λ/π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    lambda_mm: f64,
    reduced_mm: f64,
}

impl PhysParams {
    pub fn new(lambda_mm: f64) -> Result<Self> {
        if !(lambda_mm.is_finite() && lambda_mm > 0.0) {
            return Err(PopperError::domain(format!(
                "wavelength must be positive, got {lambda_mm} mm"
            )));
        }
        Ok(Self {
            lambda_mm,
            reduced_mm: lambda_mm / PI,
        })
    }

    pub fn from_nm(lambda_nm: f64) -> Result<Self> {
        Self::new(lambda_nm * 1.0e-6)
    }

    pub fn lambda_mm(&self) -> f64 {
        self.lambda_mm
    }

    /// `Λ = λ/π`.
    pub fn reduced_wavelength(&self) -> f64 {
        self.reduced_mm
    }

    /// Mean axial momentum `p₀ = 2π/λ` in rad/mm.
    pub fn mean_momentum(&self) -> f64 {
        2.0 * PI / self.lambda_mm
    }

    /// Increment `iΛL` acquired by any `Γ` over a flight distance `L`.
    pub fn flight_increment(&self, leg: PropagationLeg) -> Complex64 {
        Complex64::new(0.0, self.reduced_mm * leg.length())
    }
}

/// Axial flight distance of one particle, in mm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PropagationLeg(f64);

impl PropagationLeg {
    pub fn new(length_mm: f64) -> Result<Self> {
        if !(length_mm.is_finite() && length_mm >= 0.0) {
            return Err(PopperError::domain(format!(
                "flight distance must be non-negative, got {length_mm} mm"
            )));
        }
        Ok(Self(length_mm))
    }

    pub const fn zero() -> Self {
        Self(0.0)
    }

    pub fn length(&self) -> f64 {
        self.0
    }
}

/// Complex squared width of a normalized 1-D Gaussian amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParam {
    gamma: Complex64,
}

impl GaussianParam {
    pub fn new(gamma: Complex64) -> Result<Self> {
        if !(gamma.re > 0.0 && gamma.re.is_finite() && gamma.im.is_finite()) {
            return Err(PopperError::domain(format!(
                "Gaussian parameter needs positive finite real part, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    /// Real `Γ = s²` for an unevolved Gaussian of width `s`.
    pub fn from_width(s: f64) -> Result<Self> {
        Self::new(Complex64::new(s * s, 0.0))
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    /// Normalized amplitude `((Γ+Γ*)/(π|Γ|²))^{1/4} exp(-y²/Γ)`.
    pub fn amplitude(&self, y: f64) -> Complex64 {
        let g = self.gamma;
        let norm = (2.0 * g.re / (PI * g.norm_sqr())).powf(0.25);
        norm * (-(y * y) / g).exp()
    }

    /// Closed-form `∫|φ|² dy` of the un-normalized amplitude `exp(-y²/Γ)`.
    pub fn unnormalized_mass(&self) -> f64 {
        let g = self.gamma;
        (PI * g.norm_sqr() / (2.0 * g.re)).sqrt()
    }

    /// Distance `D` such that `Γ - iΛD` is real: the flight distance since
    /// the amplitude was an unchirped Gaussian (negative means converging).
    pub fn source_distance(&self, params: PhysParams) -> f64 {
        self.gamma.im / params.reduced_wavelength()
    }
}

/// Gaussian approximation of the aperture at slit A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlitConvention {
    /// `ε = full_width / 2`.
    HalfWidth,
    /// `ε` chosen so the Gaussian far-field FWHM equals a reference.
    DiffractionMatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlitSpec {
    /// `φ₁(y) ∝ exp(-y²/ε²)`.
    Gaussian { epsilon: f64 },
    /// Hard-edged aperture approximated by a Gaussian of width `epsilon`.
    Rectangular {
        full_width: f64,
        convention: SlitConvention,
        epsilon: f64,
    },
    /// No aperture: particle 1 is collected by a bucket detector.
    Open,
}

/// Fraunhofer FWHM of a uniformly lit rectangular slit, in units of `λD/w`.
pub const SINC2_FWHM_FACTOR: f64 = 0.885_892_941_378_904;

impl SlitSpec {
    pub fn gaussian(epsilon: f64) -> Result<Self> {
        positive("slit epsilon", epsilon)?;
        Ok(SlitSpec::Gaussian { epsilon })
    }

    /// Rectangular slit with `ε = full_width/2`.
    pub fn rect_half_width(full_width: f64) -> Result<Self> {
        positive("slit full width", full_width)?;
        Ok(SlitSpec::Rectangular {
            full_width,
            convention: SlitConvention::HalfWidth,
            epsilon: full_width / 2.0,
        })
    }

    /// Rectangular slit whose Gaussian stand-in reproduces the
    /// rectangular slit's own Fraunhofer FWHM, `0.8859·λD/w`.
    pub fn rect_far_field_matched(full_width: f64) -> Result<Self> {
        positive("slit full width", full_width)?;
        let epsilon = FWHM_PER_WIDTH * full_width / (PI * SINC2_FWHM_FACTOR);
        Ok(SlitSpec::Rectangular {
            full_width,
            convention: SlitConvention::DiffractionMatched,
            epsilon,
        })
    }

    /// Rectangular slit with an externally matched Gaussian width, e.g. one
    /// fitted to a measured real-slit diffraction pattern.
    pub fn rect_matched(full_width: f64, epsilon: f64) -> Result<Self> {
        positive("slit full width", full_width)?;
        positive("slit epsilon", epsilon)?;
        Ok(SlitSpec::Rectangular {
            full_width,
            convention: SlitConvention::DiffractionMatched,
            epsilon,
        })
    }

    /// Gaussian width parameter, `None` for an open aperture.
    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            SlitSpec::Gaussian { epsilon } | SlitSpec::Rectangular { epsilon, .. } => Some(epsilon),
            SlitSpec::Open => None,
        }
    }

    fn gaussian_epsilon(&self) -> Result<f64> {
        match *self {
            SlitSpec::Gaussian { epsilon } => Ok(epsilon),
            SlitSpec::Rectangular { .. } => Err(PopperError::domain(
                "rectangular slits have no closed form; map to a Gaussian or use the grid oracle",
            )),
            SlitSpec::Open => Err(PopperError::domain("open aperture does not condition")),
        }
    }

    /// The Gaussian stand-in of this slit (identity for Gaussian slits).
    pub fn as_gaussian(&self) -> Result<SlitSpec> {
        match self.epsilon() {
            Some(epsilon) => SlitSpec::gaussian(epsilon),
            None => Err(PopperError::domain("open aperture has no Gaussian stand-in")),
        }
    }
}

/// Thin lens in the path of particle 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensConfig {
    pub f: f64,
    pub b1: f64,
}

impl LensConfig {
    pub fn new(f: f64, b1: f64) -> Result<Self> {
        positive("focal length", f)?;
        if !(b1.is_finite() && b1 >= 0.0) {
            return Err(PopperError::config(format!("lens distance b1 must be >= 0, got {b1}")));
        }
        if 2.0 * f - b1 <= 0.0 {
            return Err(PopperError::config(format!(
                "ghost-image distance 2f - b1 = {} mm must be positive",
                2.0 * f - b1
            )));
        }
        Ok(Self { f, b1 })
    }

    /// Distance `2f - b₁` at which the ghost image of slit A forms.
    pub fn ghost_image_distance(&self) -> f64 {
        2.0 * self.f - self.b1
    }
}

/// Two-particle Gaussian source, possibly after free flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EprState {
    a: f64,
    omega: f64,
    gamma_u: Complex64,
    gamma_v: Complex64,
    distance: f64,
}

/// Source state with `Γᵤ = a²` and `Γᵥ = 4Ω²`.
pub fn make_epr_state(a: f64, omega: f64) -> Result<EprState> {
    positive("a = hbar/sigma", a)?;
    positive("omega", omega)?;
    Ok(EprState {
        a,
        omega,
        gamma_u: Complex64::new(a * a, 0.0),
        gamma_v: Complex64::new(4.0 * omega * omega, 0.0),
        distance: 0.0,
    })
}

impl EprState {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Parameter of `exp(-(y₁-y₂)²/Γᵤ)`.
    pub fn gamma_u(&self) -> Complex64 {
        self.gamma_u
    }

    /// Parameter of `exp(-(y₁+y₂)²/Γᵥ)`.
    pub fn gamma_v(&self) -> Complex64 {
        self.gamma_v
    }

    /// Common flight distance accumulated since the source.
    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn is_at_source(&self) -> bool {
        self.distance == 0.0
    }

    fn require_source(&self, op: &str) -> Result<()> {
        if self.is_at_source() {
            Ok(())
        } else {
            Err(PopperError::domain(format!(
                "{op} is defined for the source state only (state has flown {} mm); use beam_width",
                self.distance
            )))
        }
    }
}

/// `Δy₁ = Δy₂ = ½√(Ω² + a²/4)` for the source state.
pub fn position_uncertainty(state: &EprState) -> Result<f64> {
    state.require_source("position_uncertainty")?;
    let (a, o) = (state.a, state.omega);
    Ok(0.5 * (o * o + a * a / 4.0).sqrt())
}

/// `Δp₁ = Δp₂ = √(1/a² + 1/(4Ω²))` for the source state.
pub fn momentum_uncertainty(state: &EprState) -> Result<f64> {
    state.require_source("momentum_uncertainty")?;
    let (a, o) = (state.a, state.omega);
    Ok((1.0 / (a * a) + 1.0 / (4.0 * o * o)).sqrt())
}

/// Width to which particle 2 is localized when particle 1 is localized to
/// `epsilon1` at the source, without any flight.
pub fn instant_localization_width(epsilon1: f64, state: &EprState) -> Result<f64> {
    positive("epsilon1", epsilon1)?;
    state.require_source("instant_localization_width")?;
    let a2 = state.a * state.a;
    let o2 = state.omega * state.omega;
    let e2 = epsilon1 * epsilon1;
    let num = e2 * (1.0 + a2 / (4.0 * o2)) + a2 / 4.0;
    let den = 1.0 + 4.0 * e2 / o2 + a2 / (4.0 * o2);
    Ok((num / den).sqrt())
}

/// Free flight of both particles over the same distance.
pub fn evolve_free(state: &EprState, leg: PropagationLeg, params: PhysParams) -> EprState {
    let step = 2.0 * params.flight_increment(leg);
    EprState {
        gamma_u: state.gamma_u + step,
        gamma_v: state.gamma_v + step,
        distance: state.distance + leg.length(),
        ..*state
    }
}

/// Conditional amplitude of particle 2 after particle 1 is projected onto a
/// Gaussian slit mode `exp(-y₁²/ε²)` at flight distance `l1`.
///
/// With `A = Γᵤ` and `B = Γᵥ` at the slit plane the projection integral
/// gives `Γ = A + ε² - (A + 2ε²)² / (A + B + 4ε²)`. This form has no
/// cancellation as `Ω → ∞` and equals the textbook expression
/// `[ε² + iΛL₁ + a²/(1+a²/4Ω²)] / [1 + (ε²+iΛL₁)/(Ω²+a²/4)] + iΛL₁`.
pub fn condition_on_gaussian_slit(
    state: &EprState,
    slit: &SlitSpec,
    l1: PropagationLeg,
    params: PhysParams,
) -> Result<GaussianParam> {
    let eps = slit.gaussian_epsilon()?;
    let at_slit = evolve_free(state, l1, params);
    let e2 = Complex64::new(eps * eps, 0.0);
    let (a, b) = (at_slit.gamma_u, at_slit.gamma_v);
    let lead = a + 2.0 * e2;
    GaussianParam::new(a + e2 - lead * lead / (a + b + 4.0 * e2))
}

/// Exact `Δp₂ = √2/√(Γ+Γ*) = 1/√(Re Γ)`.
pub fn momentum_spread_conditional(gamma: &GaussianParam) -> f64 {
    1.0 / gamma.gamma.re.sqrt()
}

/// Large-`Ω` approximation `σ/√(1 + (σε)² + (2σt₁/mΩ)²)` of the
/// conditional momentum spread, with `σ = 1/a` and `2t₁/m = ΛL₁`.
pub fn momentum_spread_approx(
    state: &EprState,
    epsilon: f64,
    l1: PropagationLeg,
    params: PhysParams,
) -> f64 {
    let sigma = 1.0 / state.a;
    let flight = params.reduced_wavelength() * l1.length();
    sigma / (1.0 + (sigma * epsilon).powi(2) + (sigma * flight / state.omega).powi(2)).sqrt()
}

/// `Γ′ = Γ + iΛL₂`.
pub fn propagate_conditional(
    gamma: &GaussianParam,
    leg: PropagationLeg,
    params: PhysParams,
) -> GaussianParam {
    GaussianParam {
        gamma: gamma.gamma + params.flight_increment(leg),
    }
}

/// `W = |Γ|/√(Re Γ)`, the width of `|exp(-y²/Γ)|² = exp(-2y²/W²)`.
pub fn intensity_width(gamma: &GaussianParam) -> f64 {
    gamma.gamma.norm() / gamma.gamma.re.sqrt()
}

pub fn fwhm_from_width(width: f64) -> f64 {
    debug_assert!((FWHM_PER_WIDTH - (2.0 * LN_2).sqrt()).abs() < 1e-15);
    FWHM_PER_WIDTH * width
}

pub fn width_from_fwhm(fwhm: f64) -> f64 {
    fwhm / FWHM_PER_WIDTH
}

/// Width of a Gaussian whose `Γ = s² + iΛD`, without building the parameter.
pub fn diffracted_width(s: f64, distance: f64, params: PhysParams) -> f64 {
    let far = params.reduced_wavelength() * distance / s;
    (s * s + far * far).sqrt()
}

/// Conditional `Γ(L)` of particle 2 behind a thin lens, in the large-`Ω`
/// regime: `ε² + a² - iΛ(2f - b₁) + iΛL`. Real (a ghost image of slit A of
/// width `√(ε² + a²)`) at `L = 2f - b₁`.
pub fn lens_ghost_param(
    slit: &SlitSpec,
    a: f64,
    lens: &LensConfig,
    leg: PropagationLeg,
    params: PhysParams,
) -> Result<GaussianParam> {
    let eps = slit.gaussian_epsilon()?;
    if !(a.is_finite() && a >= 0.0) {
        return Err(PopperError::domain(format!("a must be >= 0, got {a}")));
    }
    // Re-validate: LensConfig fields are public.
    let lens = LensConfig::new(lens.f, lens.b1)?;
    let lam = params.reduced_wavelength();
    GaussianParam::new(Complex64::new(
        eps * eps + a * a,
        lam * (leg.length() - lens.ghost_image_distance()),
    ))
}

/// All-counts width of particle 2 after flight `L` from the source,
/// `√(Ω² + Λ²L²/Ω² + a²/4 + Λ²L²/a²)`.
///
/// The `Λ²L²/Ω²` term is four times the exact marginal value (see
/// [`beam_width_exact`]); for any beam where `Ω ≫ a` it is negligible.
pub fn beam_width(state: &EprState, leg: PropagationLeg, params: PhysParams) -> Result<f64> {
    state.require_source("beam_width")?;
    let (a, o) = (state.a, state.omega);
    let f = params.reduced_wavelength() * leg.length();
    Ok((o * o + f * f / (o * o) + a * a / 4.0 + f * f / (a * a)).sqrt())
}

/// Exact all-counts width `2·rms(y₂)` of particle 2 after it flies a further
/// `leg` from the given state. Uses the `u = y₁-y₂`, `v = y₁+y₂` factorization;
/// particle 1's flight does not affect the marginal.
pub fn beam_width_exact(state: &EprState, leg: PropagationLeg, params: PhysParams) -> f64 {
    let step = 2.0 * params.flight_increment(leg);
    // Flying only particle 2 mixes u and v; at equal flight they stay separable,
    // and the y₂ marginal is invariant to particle 1's flight, so fly both.
    let gu = GaussianParam { gamma: state.gamma_u + step };
    let gv = GaussianParam { gamma: state.gamma_v + step };
    let wu = intensity_width(&gu);
    let wv = intensity_width(&gv);
    0.5 * (wu * wu + wv * wv).sqrt()
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(PopperError::domain(format!("{name} must be positive, got {value}")))
    }
}
