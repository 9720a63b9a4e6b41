//! Experiment configuration: JSON schema, loading, and validation performed
//! before any computation starts.

use crate::error::{CliError, Result};
use scnlab::dataio::{self, Dataset, FeatureGroupSpec, SplitSpec, TargetColumn};
use scnlab::diagnostics::HeteroProblem;
use scnlab::ncl::SolverConfig;
use scnlab::scn::ScnConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Where the samples come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Delimited numeric file with one designated target column.
    Csv {
        path: PathBuf,
        target: TargetSel,
        #[serde(default)]
        has_header: Option<bool>,
        #[serde(default = "default_delimiter")]
        delimiter: String,
    },
    /// The 2-D demonstration curve.
    SyntheticCurve {
        n: usize,
        #[serde(default = "default_x1_low")]
        x1_low: f64,
        #[serde(default = "default_x1_high")]
        x1_high: f64,
    },
    /// Grouped synthetic regression with known per-group targets.
    SyntheticGroups {
        n: usize,
        widths: Vec<usize>,
        #[serde(default = "default_noise_sd")]
        noise_sd: f64,
    },
}

fn default_delimiter() -> String {
    ",".into()
}

fn default_x1_low() -> f64 {
    -5.0
}

fn default_x1_high() -> f64 {
    5.0
}

fn default_noise_sd() -> f64 {
    0.05
}

/// Target column by 1-based index or by header name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSel {
    Index(usize),
    Name(String),
}

impl TargetSel {
    pub fn to_core(&self) -> TargetColumn {
        match self {
            TargetSel::Index(i) => TargetColumn::Index(*i),
            TargetSel::Name(n) => TargetColumn::Name(n.clone()),
        }
    }
}

/// Feature-group partition, inline or by file reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupsSource {
    File { file: PathBuf },
    Inline(FeatureGroupSpec),
}

/// Split fractions; the shuffle seed defaults to the experiment seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.70,
            val: 0.15,
            test: 0.15,
            seed: None,
        }
    }
}

impl SplitFractions {
    pub fn to_spec(&self, default_seed: u64) -> SplitSpec {
        SplitSpec::new(
            self.train,
            self.val,
            self.test,
            self.seed.unwrap_or(default_seed),
        )
    }
}

/// Node-count / RVFL-range estimation settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateParams {
    pub l_lo: usize,
    pub l_hi: usize,
    pub repeats: usize,
    pub downsample_train: usize,
    pub downsample_val: usize,
    pub alpha_grid: Vec<f64>,
}

impl Default for EstimateParams {
    fn default() -> Self {
        EstimateParams {
            l_lo: 1,
            l_hi: 120,
            repeats: 10,
            downsample_train: 70_000,
            downsample_val: 30_000,
            alpha_grid: (5..=14).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

/// Benchmark settings for the demonstration-style timing runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchParams {
    /// Number of replicated base models sharing the full inputs.
    pub models: usize,
    pub grid: Vec<usize>,
    pub methods: Vec<String>,
    pub repeats: usize,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            models: 10,
            grid: vec![10, 50, 100, 200, 300, 400, 500],
            methods: vec!["analytic".into(), "jacobi".into(), "gauss_seidel".into()],
            repeats: 3,
        }
    }
}

/// One experiment: data, partition, split, base-model and solver settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    #[serde(default)]
    pub groups: Option<GroupsSource>,
    #[serde(default)]
    pub split: SplitFractions,
    /// Shared base-model template; the per-model seed is derived.
    #[serde(default)]
    pub scn: ScnConfig,
    /// Per-group overrides of the base-model template.
    #[serde(default)]
    pub scn_per_group: Option<Vec<ScnConfig>>,
    /// Pinned hidden-node counts; when absent, `train` estimates them.
    #[serde(default)]
    pub nodes_per_group: Option<Vec<usize>>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_true")]
    pub normalize_inputs: bool,
    #[serde(default)]
    pub normalize_target: bool,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub estimate: EstimateParams,
    #[serde(default)]
    pub bench: BenchParams,
}

fn default_true() -> bool {
    true
}

fn default_repeats() -> usize {
    10
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects invalid settings before any computation: λ outside (0, 1),
    /// bad split fractions, missing referenced files, malformed groups.
    pub fn validate(&self) -> Result<()> {
        if !(self.solver.lambda > 0.0 && self.solver.lambda < 1.0) {
            return Err(CliError::Config(format!(
                "solver.lambda must lie in (0, 1), got {}",
                self.solver.lambda
            )));
        }
        if !(self.solver.ridge >= 0.0) {
            return Err(CliError::Config(format!(
                "solver.ridge must be >= 0, got {}",
                self.solver.ridge
            )));
        }
        self.split
            .to_spec(self.seed)
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.repeats == 0 {
            return Err(CliError::Config("repeats must be >= 1".into()));
        }
        match &self.data {
            DataSource::Csv { path, .. } => {
                if !path.exists() {
                    return Err(CliError::Config(format!(
                        "data file {} does not exist",
                        path.display()
                    )));
                }
            }
            DataSource::SyntheticCurve { n, x1_low, x1_high } => {
                if *n == 0 || !(x1_low < x1_high) {
                    return Err(CliError::Config("bad synthetic_curve parameters".into()));
                }
            }
            DataSource::SyntheticGroups {
                n,
                widths,
                noise_sd,
            } => {
                if *n == 0 || widths.is_empty() || !(noise_sd >= &0.0) {
                    return Err(CliError::Config("bad synthetic_groups parameters".into()));
                }
            }
        }
        if let Some(GroupsSource::File { file }) = &self.groups {
            if !file.exists() {
                return Err(CliError::Config(format!(
                    "group spec file {} does not exist",
                    file.display()
                )));
            }
        }
        Ok(())
    }

    /// Materializes the dataset.
    pub fn load_data(&self) -> Result<Dataset> {
        match &self.data {
            DataSource::Csv {
                path,
                target,
                has_header,
                delimiter,
            } => {
                let delim = delimiter.as_bytes().first().copied().unwrap_or(b',');
                Ok(dataio::load_csv(
                    path,
                    &target.to_core(),
                    *has_header,
                    delim,
                )?)
            }
            DataSource::SyntheticCurve { n, x1_low, x1_high } => {
                Ok(dataio::synth_generate(*n, *x1_low, *x1_high, self.seed)?)
            }
            DataSource::SyntheticGroups {
                n,
                widths,
                noise_sd,
            } => Ok(HeteroProblem::new(widths.clone(), *noise_sd).sample(*n, self.seed)?),
        }
    }

    /// Resolves the feature-group partition and checks it against `d`. When
    /// no groups are configured, a synthetic-groups source supplies its own.
    pub fn resolve_groups(&self, d: usize) -> Result<FeatureGroupSpec> {
        let spec = match &self.groups {
            Some(GroupsSource::File { file }) => FeatureGroupSpec::from_json_file(file)?,
            Some(GroupsSource::Inline(spec)) => spec.clone(),
            None => match &self.data {
                DataSource::SyntheticGroups {
                    widths, noise_sd, ..
                } => HeteroProblem::new(widths.clone(), *noise_sd).group_spec(),
                _ => {
                    return Err(CliError::Config(
                        "no feature groups configured (set \"groups\")".into(),
                    ))
                }
            },
        };
        spec.validate(d)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(per_group) = &self.scn_per_group {
            if per_group.len() != spec.group_count() {
                return Err(CliError::Config(format!(
                    "scn_per_group has {} entries for {} groups",
                    per_group.len(),
                    spec.group_count()
                )));
            }
        }
        Ok(spec)
    }

    /// Base-model settings for group `m`: the per-group override when
    /// present, otherwise the shared template.
    pub fn scn_for_group(&self, m: usize) -> ScnConfig {
        match &self.scn_per_group {
            Some(per_group) => per_group[m].clone(),
            None => self.scn.clone(),
        }
    }
}
