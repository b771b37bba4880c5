//! TOML experiment configuration: measure, grid, test functions, truncation
//! orders, tolerances, and the resolution step that turns the declarative
//! description into ready-to-use model objects.

use serde::Deserialize;
use thiserror::Error;

use crate::grid::{GridError, SpaceGrid, TestFunction};
use crate::measure::{Atom, LevyModel, MeasureError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("measure section must give exactly one of: preset, nu, nu_tilde")]
    AmbiguousMeasure,
    #[error("unknown measure preset {0:?} (expected two_point_symmetric, three_point_asymmetric, gamma)")]
    UnknownMeasurePreset(String),
    #[error("grid section must give exactly one of: weights, preset")]
    AmbiguousGrid,
    #[error("unknown grid preset {0:?} (expected single_point, uniform)")]
    UnknownGridPreset(String),
    #[error("grid preset {0:?} requires points >= 1")]
    BadGridPoints(String),
    #[error("test function must give exactly one of: values, preset")]
    AmbiguousTestFunction,
    #[error("unknown test function preset {0:?} (expected constant, random)")]
    UnknownTestFunctionPreset(String),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("truncation orders must be at least 1")]
    BadLevels,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub measure: MeasureSpec,
    pub grid: GridSpec,
    #[serde(default, rename = "test_function")]
    pub test_functions: Vec<TestFunctionSpec>,
    #[serde(default)]
    pub truncation: TruncationSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub preset: Option<String>,
    /// Atoms `[s, w]` of the Lévy measure `ν` (mass at zero excluded).
    pub nu: Option<Vec<[f64; 2]>>,
    /// Atoms `[s, w]` of the centered measure `ν̃(ds) = s²ν(ds)`.
    pub nu_tilde: Option<Vec<[f64; 2]>>,
    /// Node count for the `gamma` preset discretization.
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub preset: Option<String>,
    pub weights: Option<Vec<f64>>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSpec {
    pub preset: Option<String>,
    pub values: Option<Vec<f64>>,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    /// Jacobi truncation order `N` (number of recurrence levels).
    pub jacobi: Option<usize>,
    /// Field-power / Fock-level truncation `n_max`.
    pub levels: Option<usize>,
    /// Single-particle ℓ₂ truncation `K`.
    pub ell: Option<usize>,
}

/// Fully resolved experiment: every declarative choice replaced by a value.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub model: LevyModel,
    /// Normalization constant `c = ν̃(ℝ)` of the input measure.
    pub sigma_scale: f64,
    /// Spatial grid with `σ′ = cσ` already folded into the weights.
    pub grid: SpaceGrid,
    pub test_functions: Vec<TestFunction>,
    pub jacobi_n: usize,
    pub n_max: usize,
    pub ell: usize,
    /// Set when `ell` was raised to keep `K > n_max` admissible.
    pub ell_raised: bool,
    pub tol: f64,
    pub seed: u64,
    pub output_dir: Option<String>,
}

impl RawConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn resolve(&self) -> Result<Experiment, ConfigError> {
        let model = resolve_measure(&self.measure)?;
        let sigma_scale = model.scale();

        let raw_weights = resolve_grid_weights(&self.grid)?;
        let grid = SpaceGrid::scaled(raw_weights, sigma_scale)?;

        let mut test_functions = Vec::new();
        let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(self.seed);
        for spec in &self.test_functions {
            test_functions.push(resolve_test_function(spec, &grid, &mut rng)?);
        }
        if test_functions.is_empty() {
            test_functions
                .push(TestFunction::new(grid.clone(), vec![1.0; grid.len()])?);
        }

        let n_max = self.truncation.levels.unwrap_or(4);
        if n_max == 0 {
            return Err(ConfigError::BadLevels);
        }
        let jacobi_n = self.truncation.jacobi.unwrap_or(n_max + 1);
        if jacobi_n == 0 {
            return Err(ConfigError::BadLevels);
        }
        let mut ell = self.truncation.ell.unwrap_or(n_max + 1);
        let mut ell_raised = false;
        if ell < n_max + 1 {
            ell = n_max + 1;
            ell_raised = true;
        }
        if !(self.tol > 0.0) {
            return Err(ConfigError::BadTolerance(self.tol));
        }

        Ok(Experiment {
            model,
            sigma_scale,
            grid,
            test_functions,
            jacobi_n,
            n_max,
            ell,
            ell_raised,
            tol: self.tol,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
        })
    }
}

fn atoms(pairs: &[[f64; 2]]) -> Vec<Atom> {
    pairs.iter().map(|&[s, w]| Atom { s, w }).collect()
}

fn resolve_measure(spec: &MeasureSpec) -> Result<LevyModel, ConfigError> {
    let given =
        [spec.preset.is_some(), spec.nu.is_some(), spec.nu_tilde.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(ConfigError::AmbiguousMeasure);
    }
    if let Some(pairs) = &spec.nu {
        return Ok(LevyModel::from_nu(&atoms(pairs))?);
    }
    if let Some(pairs) = &spec.nu_tilde {
        return Ok(LevyModel::from_nu_tilde(&atoms(pairs))?);
    }
    let name = spec.preset.as_deref().unwrap();
    match name {
        "two_point_symmetric" => Ok(LevyModel::from_nu_tilde(&[
            Atom { s: 1.0, w: 0.5 },
            Atom { s: -1.0, w: 0.5 },
        ])?),
        "three_point_asymmetric" => Ok(LevyModel::from_nu_tilde(&[
            Atom { s: 1.0, w: 1.0 },
            Atom { s: 2.0, w: 1.0 },
            Atom { s: -1.0, w: 2.0 },
        ])?),
        "gamma" => Ok(crate::orthopoly::gamma_reference(spec.nodes.unwrap_or(64))),
        other => Err(ConfigError::UnknownMeasurePreset(other.to_string())),
    }
}

fn resolve_grid_weights(spec: &GridSpec) -> Result<Vec<f64>, ConfigError> {
    match (&spec.weights, &spec.preset) {
        (Some(w), None) => Ok(w.clone()),
        (None, Some(name)) => match name.as_str() {
            "single_point" => Ok(vec![1.0]),
            "uniform" => {
                let p = spec.points.unwrap_or(0);
                if p == 0 {
                    return Err(ConfigError::BadGridPoints(name.clone()));
                }
                Ok(vec![1.0 / p as f64; p])
            }
            other => Err(ConfigError::UnknownGridPreset(other.to_string())),
        },
        _ => Err(ConfigError::AmbiguousGrid),
    }
}

fn resolve_test_function(
    spec: &TestFunctionSpec,
    grid: &SpaceGrid,
    rng: &mut impl rand::Rng,
) -> Result<TestFunction, ConfigError> {
    match (&spec.values, &spec.preset) {
        (Some(v), None) => Ok(TestFunction::new(grid.clone(), v.clone())?),
        (None, Some(name)) => match name.as_str() {
            "constant" => {
                let c = spec.value.unwrap_or(1.0);
                Ok(TestFunction::new(grid.clone(), vec![c; grid.len()])?)
            }
            "random" => {
                let vals = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                Ok(TestFunction::new(grid.clone(), vals)?)
            }
            other => Err(ConfigError::UnknownTestFunctionPreset(other.to_string())),
        },
        _ => Err(ConfigError::AmbiguousTestFunction),
    }
}
