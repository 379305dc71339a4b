//! Experiment configuration: schema, validation, and derived core objects.
//!
//! Configs are strict JSON: unknown fields are rejected and the `version`
//! integer must match the supported schema. Every artifact row carries the
//! SHA-256 prefix of the raw config bytes so numbers stay traceable to the
//! exact file that produced them.

use serde::Deserialize;
use sha2::{Digest, Sha256};
use wiggleguide_core::assembly::Grid;
use wiggleguide_core::geometry::{BumpFamily, BumpFunction, Constants, Disorder, WaveguideSpec};
use wiggleguide_core::probability::{theorem_interval, DistributionSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub family: String,
    pub l: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum DistConfig {
    Uniform,
    Bernoulli { p: f64, scale: f64 },
    TwoPoint { a: f64, b: f64, p: f64 },
}

impl DistConfig {
    pub fn to_spec(&self) -> DistributionSpec {
        match self {
            DistConfig::Uniform => DistributionSpec::Uniform,
            DistConfig::Bernoulli { p, scale } => DistributionSpec::Bernoulli {
                p: *p,
                scale: *scale,
            },
            DistConfig::TwoPoint { a, b, p } => DistributionSpec::TwoPoint {
                a: *a,
                b: *b,
                p: *p,
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nodes_per_unit: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigParams {
    #[serde(default = "default_k")]
    pub k: usize,
    /// Also solve on the refined grid and report extrapolated values.
    #[serde(default = "default_true")]
    pub richardson: bool,
    /// Dump the assembled pencil in MatrixMarket coordinate format.
    #[serde(default)]
    pub mm_dump: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesParams {
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub m_max: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    pub t: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketParams {
    pub kcells: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtParams {
    /// Gap below the solved ground state at which the resolvent is probed.
    #[serde(default = "default_gap")]
    pub gap: f64,
    /// Left strip widths; when absent, integer widths from 2 up to L - beta.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

impl CtParams {
    pub fn resolve_alphas(&self, big_l: f64) -> Vec<f64> {
        match &self.alphas {
            Some(a) => a.clone(),
            None => {
                let mut out = Vec::new();
                let mut alpha = 2.0;
                while alpha + self.beta <= big_l {
                    out.push(alpha);
                    alpha += 1.0;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalParams {
    /// Segment length the window is evaluated at; defaults to n_cells.
    #[serde(default)]
    pub n: Option<f64>,
}

fn default_k() -> usize {
    2
}
fn default_true() -> bool {
    true
}
fn default_gap() -> f64 {
    0.5
}
fn default_beta() -> f64 {
    2.0
}
fn default_tol() -> f64 {
    1e-10
}
fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub bump: BumpConfig,
    pub n_cells: usize,
    #[serde(default)]
    pub kappa: Option<f64>,
    /// When `kappa` is absent, the coupling is picked from the gamma
    /// weak-disorder window (geometric mean of the endpoints).
    #[serde(default)]
    pub gamma: Option<f64>,
    pub distribution: DistConfig,
    pub grid: GridConfig,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Explicit disorder override; sampled from the distribution otherwise.
    #[serde(default)]
    pub omega: Option<Vec<f64>>,
    #[serde(default)]
    pub eig: Option<EigParams>,
    #[serde(default)]
    pub series: Option<SeriesParams>,
    #[serde(default)]
    pub mc: Option<McParams>,
    #[serde(default)]
    pub brackets: Option<BracketParams>,
    #[serde(default)]
    pub ct: Option<CtParams>,
    #[serde(default)]
    pub interval: Option<IntervalParams>,
}

/// Errors surfaced before any computation runs; mapped to exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub struct LoadedConfig {
    pub config: ExperimentConfig,
    /// First 16 hex chars of the SHA-256 of the raw config bytes.
    pub hash: String,
}

pub fn load_config(path: &std::path::Path) -> Result<LoadedConfig, ConfigError> {
    let bytes = std::fs::read(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_slice(&bytes)
        .map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))?;
    if config.version != SCHEMA_VERSION {
        return Err(ConfigError(format!(
            "unsupported config version {} (expected {SCHEMA_VERSION})",
            config.version
        )));
    }
    if config.n_cells == 0 {
        return Err(ConfigError("n_cells must be >= 1".into()));
    }
    if config.grid.nodes_per_unit == 0 {
        return Err(ConfigError("grid.nodes_per_unit must be >= 1".into()));
    }
    if let Some(mc) = &config.mc {
        if mc.trials == 0 {
            return Err(ConfigError("mc.trials must be >= 1".into()));
        }
    }
    if let Some(omega) = &config.omega {
        if omega.len() != config.n_cells {
            return Err(ConfigError(format!(
                "omega has {} entries for n_cells = {}",
                omega.len(),
                config.n_cells
            )));
        }
    }
    let digest = Sha256::digest(&bytes);
    let hash = hex::encode(&digest[..8]);
    Ok(LoadedConfig { config, hash })
}

impl ExperimentConfig {
    pub fn bump(&self) -> wiggleguide_core::Result<BumpFunction> {
        BumpFunction::make(BumpFamily::parse(&self.bump.family)?, self.bump.l)
    }

    pub fn mu(&self) -> DistributionSpec {
        self.distribution.to_spec()
    }

    /// Coupling constant: explicit, or picked inside the gamma window.
    pub fn resolve_kappa(&self, bump: &BumpFunction) -> wiggleguide_core::Result<f64> {
        match (self.kappa, self.gamma) {
            (Some(k), _) => Ok(k),
            (None, Some(gamma)) => {
                let params = theorem_interval(
                    gamma,
                    self.n_cells as f64,
                    &self.mu(),
                    &Constants::for_bump(bump),
                )?;
                if !params.non_empty {
                    return Err(wiggleguide_core::Error::Precondition(format!(
                        "coupling window is empty at N = {} (N1 ~ 10^{:.1})",
                        self.n_cells, params.n1_log10
                    )));
                }
                Ok((params.lower * params.upper).sqrt())
            }
            (None, None) => Err(wiggleguide_core::Error::InvalidParameter(
                "config needs either kappa or gamma".into(),
            )),
        }
    }

    /// Disorder: explicit override, or one counter-based draw at stream 0.
    pub fn resolve_disorder(&self) -> wiggleguide_core::Result<Disorder> {
        match &self.omega {
            Some(omega) => Disorder::new(omega.clone()),
            None => wiggleguide_core::probability::sample_config(
                &self.mu(),
                self.n_cells,
                self.seed,
                0,
            ),
        }
    }

    pub fn build_spec(&self) -> wiggleguide_core::Result<WaveguideSpec> {
        let bump = self.bump()?;
        let kappa = self.resolve_kappa(&bump)?;
        WaveguideSpec::new(bump, kappa, self.resolve_disorder()?)
    }

    pub fn build_grid(&self, spec: &WaveguideSpec) -> wiggleguide_core::Result<Grid> {
        Grid::square_cells(spec, self.grid.nodes_per_unit)
    }
}
