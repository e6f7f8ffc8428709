//! Experiment configuration files (JSON).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use rotns_core::expansion::FitPolicy;
use rotns_core::io::field_from_json;
use rotns_core::lattice::parse_rational;
use rotns_core::linalg::from_parts;
use rotns_core::special::VkData;
use rotns_core::{Form, GevreyIndex, Lattice, SolverConfig, SpectralField};

use crate::error::CliError;

/// Rational given either as an integer or as `"p/q"` text.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Int(i64),
    Text(String),
}

impl RationalText {
    fn parse(&self) -> Result<rotns_core::Rational, CliError> {
        match self {
            RationalText::Int(n) => Ok(rotns_core::lattice::rat(*n)),
            RationalText::Text(s) => parse_rational(s).map_err(CliError::from),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// Periods as rational multiples of `2*pi`; the largest must be 1.
    pub periods: [RationalText; 3],
    pub cutoff: RationalText,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<Arc<Lattice>, CliError> {
        let p = [
            self.periods[0].parse()?,
            self.periods[1].parse()?,
            self.periods[2].parse()?,
        ];
        Ok(Lattice::from_ratios(p, self.cutoff.parse()?)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub m: i32,
    pub re: [f64; 3],
    #[serde(default)]
    pub im: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    RandomGevrey {
        seed: u64,
        #[serde(default)]
        sigma: f64,
        amplitude: f64,
        #[serde(default)]
        mean: [f64; 3],
    },
    Vk {
        k: [i32; 3],
        modes: Vec<ModeSpec>,
        #[serde(default)]
        mean: [f64; 3],
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub record_stride: Option<usize>,
    #[serde(default = "default_form")]
    pub form: Form,
    /// Extra recorded norms as `[alpha, sigma]` pairs.
    #[serde(default)]
    pub gevrey: Vec<[f64; 2]>,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_form() -> Form {
    Form::V
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSpec {
    /// Orders to build; informational for `expand`, which takes `--order`.
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub drift_tol: Option<f64>,
    #[serde(default)]
    pub refine_passes: Option<usize>,
    #[serde(default)]
    pub floor_rel: Option<f64>,
}

impl ExpansionSpec {
    pub fn policy(&self) -> FitPolicy {
        let d = FitPolicy::default();
        FitPolicy {
            window: self.window.map(|w| (w[0], w[1])),
            drift_tol: self.drift_tol.unwrap_or(d.drift_tol),
            refine_passes: self.refine_passes.unwrap_or(d.refine_passes),
            floor_rel: self.floor_rel,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub omega: f64,
    pub initial: InitialData,
    pub solver: SolverSpec,
    #[serde(default)]
    pub expansion: Option<ExpansionSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

/// Default artifact paths, relative to the config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
}

pub struct Loaded {
    pub config: ExperimentConfig,
    pub hash: String,
    pub dir: PathBuf,
}

/// SHA-256 of the canonical (key-sorted, compact) JSON text.
pub fn config_hash(v: &Value) -> String {
    crate::output::hash_value(v)
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(Loaded {
        config,
        hash: config_hash(&value),
        dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.omega.is_finite() {
            return Err(CliError::Config("omega must be finite".into()));
        }
        self.lattice.build()?;
        self.solver_config()?.validate()?;
        Ok(())
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let s = &self.solver;
        let mut cfg = SolverConfig::new(self.omega, s.t_end, s.dt, s.form);
        if let Some(stride) = s.record_stride {
            cfg = cfg.with_stride(stride);
        }
        let gevrey = s
            .gevrey
            .iter()
            .map(|g| GevreyIndex::new(g[0], g[1]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(cfg.with_gevrey(gevrey))
    }

    /// Initial field; relative file paths resolve against `dir`.
    pub fn initial_field(&self, lattice: &Arc<Lattice>, dir: &Path) -> Result<SpectralField, CliError> {
        match &self.initial {
            InitialData::RandomGevrey {
                seed,
                sigma,
                amplitude,
                mean,
            } => Ok(SpectralField::random_gevrey(lattice, *seed, *sigma, *amplitude).with_mean(*mean)),
            InitialData::Vk { k, modes, mean } => {
                let data = vk_from_modes(*k, modes)?;
                Ok(data.to_field(lattice)?.with_mean(*mean))
            }
            InitialData::File { path } => {
                let p = dir.join(path);
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Ok(field_from_json(&v, Some(lattice))?)
            }
        }
    }
}

pub fn vk_from_modes(k: [i32; 3], modes: &[ModeSpec]) -> Result<VkData, CliError> {
    Ok(VkData::new(
        k,
        modes.iter().map(|m| (m.m, from_parts(&m.re, &m.im))).collect(),
    )?)
}
