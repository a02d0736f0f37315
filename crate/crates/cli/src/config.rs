//! Experiment configuration: one TOML file captures the field, the
//! simulation parameters, and the diagnostic grids, with the seed
//! mandatory so no run depends on implicit entropy.

use std::path::Path;

use serde::Deserialize;
use stablefield::actions::{
    ActionFamily, Cocycle, CocycleTable, FiniteDiscreteAction, Kernel, MarkovShiftFamily,
    MmaFamily, RosinskiTriplet, SubGaussianFamily,
};
use stablefield::diagnostics::DispersionThresholds;
use stablefield::fields::SimulationSettings;
use stablefield::markov::{PathTruncation, TransitionSpec};
use stablefield::stable::FiniteWeightedSpace;
use stablefield::{GroupElement, Window};

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub seed: u64,
    pub family: FamilyConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    FiniteDiscrete {
        atoms: Option<Vec<String>>,
        weights: Vec<f64>,
        /// One permutation (as an image table) per lattice direction.
        generators: Vec<Vec<usize>>,
        kernel: Vec<f64>,
        /// Optional ±1 sign table per lattice direction.
        cocycle: Option<Vec<Vec<i8>>>,
    },
    MixedMovingAverage {
        labels: Option<Vec<String>>,
        label_weights: Vec<f64>,
        dim: usize,
        radius: i64,
        /// One row-major table over the offset cube `[-radius, radius]^dim`
        /// per label.
        kernel: Vec<Vec<f64>>,
    },
    MarkovShift {
        chains: Vec<ChainConfig>,
    },
    SubGaussianShift {
        dim: usize,
        coord_sd: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainConfig {
    Finite { states: Vec<String>, rows: Vec<Vec<f64>> },
    RandomWalk { p: f64 },
    BirthDeath { head_birth: Vec<f64>, tail_birth: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// `[lo, hi]` per dimension, bounds inclusive.
    pub window: Vec<[i64; 2]>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_lepage_truncation")]
    pub lepage_truncation: u64,
    #[serde(default = "default_path_truncation")]
    pub path_truncation_radius: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            window: vec![[-100, 100]],
            realizations: default_realizations(),
            lepage_truncation: default_lepage_truncation(),
            path_truncation_radius: default_path_truncation(),
        }
    }
}

fn default_realizations() -> usize {
    10
}

fn default_lepage_truncation() -> u64 {
    10_000
}

fn default_path_truncation() -> u64 {
    50
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<i64>,
    #[serde(default = "default_h")]
    pub h: String,
    #[serde(default = "default_theta_grid")]
    pub theta_grid: Vec<f64>,
    #[serde(default = "default_lags")]
    pub lags: Vec<Vec<i64>>,
    #[serde(default = "default_stationarity_draws")]
    pub stationarity_draws: usize,
    #[serde(default = "default_dispersion_realizations")]
    pub dispersion_realizations: usize,
    #[serde(default = "default_cf_samples")]
    pub cf_samples: usize,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    #[serde(default = "default_maxima_n_grid")]
    pub maxima_n_grid: Vec<i64>,
    #[serde(default = "default_maxima_realizations")]
    pub maxima_realizations: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            n_grid: default_n_grid(),
            h: default_h(),
            theta_grid: default_theta_grid(),
            lags: default_lags(),
            stationarity_draws: default_stationarity_draws(),
            dispersion_realizations: default_dispersion_realizations(),
            cf_samples: default_cf_samples(),
            thresholds: ThresholdConfig::default(),
            maxima_n_grid: default_maxima_n_grid(),
            maxima_realizations: default_maxima_realizations(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub ergodic: f64,
    pub non_ergodic: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        let d = DispersionThresholds::default();
        ThresholdConfig { ergodic: d.ergodic, non_ergodic: d.non_ergodic }
    }
}

fn default_n_grid() -> Vec<i64> {
    vec![100, 500, 2000]
}

fn default_h() -> String {
    "cos".into()
}

fn default_theta_grid() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0]
}

fn default_lags() -> Vec<Vec<i64>> {
    vec![vec![1], vec![2], vec![5]]
}

fn default_stationarity_draws() -> usize {
    1_000
}

fn default_dispersion_realizations() -> usize {
    50
}

fn default_cf_samples() -> usize {
    20_000
}

fn default_maxima_n_grid() -> Vec<i64> {
    vec![10, 30, 100]
}

fn default_maxima_realizations() -> usize {
    40
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        let config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if !(config.alpha > 0.0 && config.alpha < 2.0) {
            return Err(CliError::Config(format!(
                "alpha must lie in (0, 2), got {}",
                config.alpha
            )));
        }
        Ok(config)
    }

    pub fn build_triplet(&self) -> CliResult<RosinskiTriplet> {
        let (family, kernel, cocycle) = match &self.family {
            FamilyConfig::FiniteDiscrete { atoms, weights, generators, kernel, cocycle } => {
                let space = match atoms {
                    Some(labels) => FiniteWeightedSpace::new(labels.clone(), weights.clone())?,
                    None => FiniteWeightedSpace::with_weights(weights.clone())?,
                };
                let action = FiniteDiscreteAction::new(space, generators.clone())?;
                let cocycle = match cocycle {
                    Some(tables) => {
                        Cocycle::FiniteTable(CocycleTable::new(&action, tables.clone())?)
                    }
                    None => Cocycle::Trivial,
                };
                (
                    ActionFamily::FiniteDiscrete(action),
                    Kernel::AtomTable(kernel.clone()),
                    cocycle,
                )
            }
            FamilyConfig::MixedMovingAverage { labels, label_weights, dim, radius, kernel } => {
                let space = match labels {
                    Some(l) => FiniteWeightedSpace::new(l.clone(), label_weights.clone())?,
                    None => FiniteWeightedSpace::with_weights(label_weights.clone())?,
                };
                let family = MmaFamily::new(space, *dim, *radius)?;
                (
                    ActionFamily::MixedMovingAverage(family),
                    Kernel::MmaTable { per_label: kernel.clone(), radius: *radius },
                    Cocycle::Trivial,
                )
            }
            FamilyConfig::MarkovShift { chains } => {
                let members: Vec<TransitionSpec> = chains
                    .iter()
                    .map(|c| match c {
                        ChainConfig::Finite { states, rows } => {
                            TransitionSpec::finite(states.clone(), rows.clone())
                        }
                        ChainConfig::RandomWalk { p } => TransitionSpec::random_walk(*p),
                        ChainConfig::BirthDeath { head_birth, tail_birth } => {
                            TransitionSpec::birth_death(head_birth.clone(), *tail_birth)
                        }
                    })
                    .collect::<Result<_, _>>()?;
                let spec = if members.len() == 1 {
                    members.into_iter().next().unwrap()
                } else {
                    TransitionSpec::union(members)?
                };
                (
                    ActionFamily::MarkovShift(MarkovShiftFamily::new(spec)?),
                    Kernel::MarkovAnchor,
                    Cocycle::Trivial,
                )
            }
            FamilyConfig::SubGaussianShift { dim, coord_sd } => (
                ActionFamily::SubGaussianShift(SubGaussianFamily::new(*dim, *coord_sd)?),
                Kernel::CoordinateProjection,
                Cocycle::Trivial,
            ),
        };
        Ok(RosinskiTriplet::new(family, kernel, cocycle, self.alpha)?)
    }

    pub fn window(&self) -> CliResult<Window> {
        let lo: Vec<i64> = self.simulation.window.iter().map(|b| b[0]).collect();
        let hi: Vec<i64> = self.simulation.window.iter().map(|b| b[1]).collect();
        Ok(Window::new(lo, hi)?)
    }

    pub fn settings(&self) -> SimulationSettings {
        SimulationSettings {
            lepage_truncation: self.simulation.lepage_truncation,
            path_truncation: PathTruncation {
                graph_radius: self.simulation.path_truncation_radius,
            },
        }
    }

    pub fn thresholds(&self) -> DispersionThresholds {
        DispersionThresholds {
            ergodic: self.diagnostics.thresholds.ergodic,
            non_ergodic: self.diagnostics.thresholds.non_ergodic,
        }
    }

    pub fn lags(&self) -> CliResult<Vec<GroupElement>> {
        self.diagnostics
            .lags
            .iter()
            .map(|l| {
                if l.is_empty() {
                    Err(CliError::Config("empty lag".into()))
                } else {
                    Ok(GroupElement::new(l.clone()))
                }
            })
            .collect()
    }
}
