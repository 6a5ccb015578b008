use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PopperError, Result};
use crate::gaussian::{LensConfig, PhysParams, SlitConvention, SlitSpec};
use crate::oracle::Aperture;

/// Which analysis a scenario feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    KimShih,
    Strekalov,
    PopperFreespace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlitKind {
    Gaussian,
    Rect,
    Open,
}

/// Slit A as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitConfig {
    pub kind: SlitKind,
    /// Full width of a rectangular slit, or `2ε` of a Gaussian one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<SlitConvention>,
    /// Explicit Gaussian width; with `diffraction-matched` this overrides
    /// the far-field match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_mm: Option<f64>,
}

impl SlitConfig {
    /// Same slit, resized to a new full width (explicit `ε` dropped).
    pub fn with_width(&self, width: f64) -> SlitConfig {
        SlitConfig {
            width_mm: Some(width),
            epsilon_mm: None,
            ..self.clone()
        }
    }

    pub fn spec(&self) -> Result<SlitSpec> {
        match self.kind {
            SlitKind::Open => Ok(SlitSpec::Open),
            SlitKind::Gaussian => match (self.epsilon_mm, self.width_mm) {
                (Some(eps), _) => SlitSpec::gaussian(eps),
                (None, Some(w)) => SlitSpec::gaussian(w / 2.0),
                (None, None) => Err(PopperError::config("gaussian slit needs epsilon_mm or width_mm")),
            },
            SlitKind::Rect => {
                let w = self
                    .width_mm
                    .ok_or_else(|| PopperError::config("rect slit needs width_mm"))?;
                match (self.convention.unwrap_or(SlitConvention::HalfWidth), self.epsilon_mm) {
                    (SlitConvention::HalfWidth, None) => SlitSpec::rect_half_width(w),
                    (SlitConvention::HalfWidth, Some(_)) => Err(PopperError::config(
                        "epsilon_mm is only meaningful with the diffraction-matched convention",
                    )),
                    (SlitConvention::DiffractionMatched, Some(eps)) => SlitSpec::rect_matched(w, eps),
                    (SlitConvention::DiffractionMatched, None) => SlitSpec::rect_far_field_matched(w),
                }
            }
        }
    }

    /// Aperture the grid oracle conditions on: the hard-edged slit itself,
    /// or its Gaussian stand-in (the object the closed forms describe).
    pub fn aperture(&self, hard_edges: bool) -> Result<Option<Aperture>> {
        Ok(match self.spec()? {
            SlitSpec::Open => None,
            SlitSpec::Rectangular { full_width, .. } if hard_edges => Some(Aperture::Rect { full_width }),
            SlitSpec::Gaussian { epsilon } | SlitSpec::Rectangular { epsilon, .. } => {
                Some(Aperture::Gaussian { epsilon })
            }
        })
    }

    /// Narrowest length the grid must resolve for this slit.
    pub fn feature(&self) -> Result<f64> {
        Ok(match self.spec()? {
            SlitSpec::Open => f64::INFINITY,
            SlitSpec::Gaussian { epsilon } => epsilon,
            SlitSpec::Rectangular { full_width, epsilon, .. } => full_width.min(epsilon),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensFile {
    pub f_mm: f64,
    pub b1_mm: f64,
}

/// Grid settings; the oracle runs when `enabled` or when asked for.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub enabled: bool,
    /// Condition on the rectangular slit itself instead of its Gaussian
    /// stand-in.
    #[serde(default)]
    pub hard_edges: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent_mm: Option<f64>,
    /// Source extent used on the grid when the scenario's own `Ω` is
    /// effectively infinite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_mm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub from_mm: f64,
    pub to_mm: f64,
    pub steps: usize,
}

/// A scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(default = "default_lambda_nm")]
    pub lambda_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2_mm2: Option<f64>,
    pub omega_mm: f64,
    pub slit: SlitConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lens: Option<LensFile>,
    #[serde(rename = "L1_mm")]
    pub l1_mm: f64,
    #[serde(rename = "L2_mm")]
    pub l2_mm: f64,
    /// Measured coincidence FWHM to invert for `a²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_fwhm_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_lambda_nm() -> f64 {
    702.0
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PopperError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| {
            PopperError::config(format!("malformed scenario at line {}, column {}: {e}", e.line(), e.column()))
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.a()?;
        if !(self.omega_mm.is_finite() && self.omega_mm > 0.0) {
            return Err(PopperError::config(format!("omega_mm must be positive, got {}", self.omega_mm)));
        }
        for (name, v) in [("L1_mm", self.l1_mm), ("L2_mm", self.l2_mm)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(PopperError::config(format!("{name} must be >= 0, got {v}")));
            }
        }
        self.slit.spec().map_err(as_config)?;
        self.lens()?;
        if let Some(o) = self.oracle {
            if let Some(w) = o.omega_mm {
                if !(w.is_finite() && w > 0.0) {
                    return Err(PopperError::config(format!("oracle.omega_mm must be positive, got {w}")));
                }
            }
        }
        if let Some(s) = self.sweep {
            validate_sweep(s.from_mm, s.to_mm, s.steps)?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysParams> {
        PhysParams::from_nm(self.lambda_nm).map_err(as_config)
    }

    /// `a = ħ/σ`, from whichever of `a_mm` and `a2_mm2` is given.
    pub fn a(&self) -> Result<f64> {
        let a = match (self.a_mm, self.a2_mm2) {
            (Some(a), None) => a,
            (None, Some(a2)) if a2 >= 0.0 => a2.sqrt(),
            (None, Some(a2)) => return Err(PopperError::config(format!("a2_mm2 must be >= 0, got {a2}"))),
            (Some(_), Some(_)) => return Err(PopperError::config("give either a_mm or a2_mm2, not both")),
            (None, None) => return Err(PopperError::config("scenario needs a_mm or a2_mm2")),
        };
        if !(a.is_finite() && a >= 0.0) {
            return Err(PopperError::config(format!("a_mm must be >= 0, got {a}")));
        }
        Ok(a)
    }

    pub fn lens(&self) -> Result<Option<LensConfig>> {
        self.lens.map(|l| LensConfig::new(l.f_mm, l.b1_mm)).transpose()
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.unwrap_or(if self.lens.is_some() {
            ExperimentKind::KimShih
        } else {
            ExperimentKind::PopperFreespace
        })
    }

    pub fn hard_edges(&self) -> bool {
        self.oracle.is_some_and(|o| o.hard_edges)
    }

    /// `Ω` used on the grid.
    pub fn oracle_omega(&self) -> f64 {
        self.oracle.and_then(|o| o.omega_mm).unwrap_or(self.omega_mm)
    }

    /// Flight `2L₁ + L₂` seen by the conditional pattern of particle 2.
    pub fn effective_distance(&self) -> f64 {
        2.0 * self.l1_mm + self.l2_mm
    }
}

pub(crate) fn validate_sweep(from: f64, to: f64, steps: usize) -> Result<()> {
    if !(from.is_finite() && to.is_finite() && from > 0.0 && from < to) {
        return Err(PopperError::config(format!("sweep needs 0 < from < to, got {from}..{to}")));
    }
    if steps < 2 {
        return Err(PopperError::config(format!("sweep needs at least 2 steps, got {steps}")));
    }
    Ok(())
}

fn as_config(e: PopperError) -> PopperError {
    match e {
        PopperError::Domain(msg) => PopperError::Config(msg),
        other => other,
    }
}
