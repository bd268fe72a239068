//! Run configuration. Every field has a default, so an empty file (or no
//! file) is a valid configuration; unknown keys are rejected.

use std::f64::consts::PI;
use std::path::PathBuf;

use almost_riemannian::{Domain, FrameKind, FrameSpec, PhiPreset};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Geodesic,
    Front,
    Spectrum,
    Classify,
    Evolve,
    Martinet,
    #[default]
    Metric,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Geodesic => "geodesic",
            Command::Front => "front",
            Command::Spectrum => "spectrum",
            Command::Classify => "classify",
            Command::Evolve => "evolve",
            Command::Martinet => "martinet",
            Command::Metric => "metric",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Command,
    /// Directory receiving the CSV files and `manifest.json`.
    pub output_dir: PathBuf,
    pub frame: FrameConfig,
    pub geodesic: GeodesicConfig,
    pub front: FrontConfig,
    pub spectrum: SpectrumConfig,
    pub classify: ClassifyConfig,
    pub evolve: EvolveConfig,
    pub martinet: MartinetConfig,
    pub metric: MetricConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::default(),
            output_dir: PathBuf::from("ars-out"),
            frame: FrameConfig::default(),
            geodesic: GeodesicConfig::default(),
            front: FrontConfig::default(),
            spectrum: SpectrumConfig::default(),
            classify: ClassifyConfig::default(),
            evolve: EvolveConfig::default(),
            martinet: MartinetConfig::default(),
            metric: MetricConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameVariant {
    /// F2 with `phi = 0`.
    #[default]
    Grushin,
    F1,
    F2,
    AlphaGrushin,
    Martinet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    pub variant: FrameVariant,
    /// Exponent for `alpha-grushin`.
    pub alpha: f64,
    /// Scalar field for `f1` / `f2`.
    pub phi: PhiPreset,
    pub domain: Domain,
    /// Optional bound beyond which `phi` is switched off smoothly.
    pub x_flat: Option<f64>,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self { variant: FrameVariant::Grushin, alpha: 1.0, phi: PhiPreset::Zero, domain: Domain::default(), x_flat: None }
    }
}

impl FrameConfig {
    pub fn build(&self) -> Result<FrameSpec, CliError> {
        let kind = match self.variant {
            FrameVariant::Grushin => {
                if self.phi != PhiPreset::Zero {
                    return Err(CliError::Validation("frame: variant grushin takes no phi; use f2".into()));
                }
                FrameKind::F2(PhiPreset::Zero.into())
            }
            FrameVariant::F1 => FrameKind::F1(self.phi.clone().into()),
            FrameVariant::F2 => FrameKind::F2(self.phi.clone().into()),
            FrameVariant::AlphaGrushin => FrameKind::AlphaGrushin { alpha: self.alpha },
            FrameVariant::Martinet => FrameKind::Martinet,
        };
        let frame = FrameSpec::new(kind, self.domain).map_err(|e| CliError::Validation(format!("frame: {e}")))?;
        match self.x_flat {
            Some(x) => frame.with_x_flat(x).map_err(|e| CliError::Validation(format!("frame: {e}"))),
            None => Ok(frame),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeodesicConfig {
    pub x: f64,
    pub y: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub t: f64,
    pub dt: f64,
    /// Allowed drift of `H` is `100 * tol_h`.
    pub tol_h: f64,
}

impl Default for GeodesicConfig {
    fn default() -> Self {
        let th = PI / 4.0;
        Self { x: -1.0, y: 0.0, lambda1: th.cos(), lambda2: th.sin(), t: 1.0, dt: 1e-4, tol_h: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontStartKind {
    #[default]
    Singular,
    Point,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontConfig {
    pub start: FrontStartKind,
    /// Start point for `point`; only `y` is used for `singular`.
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub n: usize,
    pub a_max: f64,
    pub dt: f64,
}

impl Default for FrontConfig {
    fn default() -> Self {
        Self { start: FrontStartKind::Singular, x: -1.0, y: 0.0, t: 1.0, n: 401, a_max: 15.0, dt: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub alpha: f64,
    pub k_max: u32,
    pub n: usize,
    /// Truncation for `|k| = 1`; other modes scale like `|k|^(-1/(1+alpha))`.
    pub x_max: f64,
    pub m_per_mode: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { alpha: 1.0, k_max: 3, n: 4000, x_max: 12.0, m_per_mode: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    /// Inverse-square coefficient; when absent it is derived from `alpha`.
    pub c: Option<f64>,
    pub alpha: f64,
    pub eps: f64,
    pub x_outer: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { c: None, alpha: 1.0, eps: 1e-3, x_outer: 10.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    #[default]
    Heat,
    Schrodinger,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub alpha: f64,
    pub eps: Vec<f64>,
    pub equation: Equation,
    pub dt: f64,
    pub t: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub half_width: f64,
    pub bump_x: f64,
    pub bump_y: f64,
    pub bump_width: f64,
    /// Initial momentum `exp(i k0 x)` for Schrödinger runs.
    pub k0: f64,
    pub margin: f64,
    pub solver_tol: f64,
    pub record_every: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            eps: vec![0.1, 0.05, 0.025, 0.0125],
            equation: Equation::Heat,
            dt: 1e-3,
            t: 0.5,
            n_x: 400,
            n_y: 64,
            half_width: 3.0,
            bump_x: -1.0,
            bump_y: PI,
            bump_width: 0.3,
            k0: 0.0,
            margin: 0.0,
            solver_tol: 1e-10,
            record_every: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MartinetConfig {
    pub k_min: i64,
    pub k_max: i64,
    pub l_min: i64,
    pub l_max: i64,
    pub n: usize,
    pub y_max: f64,
    pub m: usize,
}

impl Default for MartinetConfig {
    fn default() -> Self {
        Self { k_min: -3, k_max: 3, l_min: -3, l_max: 3, n: 2000, y_max: 6.0, m: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricConfig {
    pub points: Vec<[f64; 2]>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { points: vec![[1.0, 0.0]] }
    }
}
