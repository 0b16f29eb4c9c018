//! JSON run configuration. Every solver field is optional and defaults to the
//! library defaults (ε = 1e-3, ℓ = 5, η = 1.01, at most 150 iterations).

use std::path::PathBuf;

use mmgks::forward::{BlurModel, RadonModel};
use mmgks::paramselect::{log_grid, GcvRule, DEFAULT_GRID_POINTS, DEFAULT_GRID_RANGE};
use mmgks::phantom::{NoiseSpec, SceneSpec};
use mmgks::regularization::DEFAULT_EPSILON;
use mmgks::solver::{DEFAULT_ETA, DEFAULT_MAX_ITERS, DEFAULT_REL_CHANGE_TOL, DEFAULT_SEED_STEPS};
use mmgks::{Method, RegularizerSpec, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Deblur,
    RadonDynamic,
    RadonStaticBaseline,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Deblur => "deblur",
            Experiment::RadonDynamic => "radon-dynamic",
            Experiment::RadonStaticBaseline => "radon-static-baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    DeblurPhantom,
    SixDisks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceneConfig {
    Preset { name: Preset, size: usize, frames: usize },
    Custom(SceneSpec),
}

impl SceneConfig {
    pub fn build(&self) -> SceneSpec {
        match self {
            SceneConfig::Preset { name: Preset::DeblurPhantom, size, frames } => {
                SceneSpec::deblur_phantom(*size, *frames)
            }
            SceneConfig::Preset { name: Preset::SixDisks, size, frames } => SceneSpec::six_disks(*size, *frames),
            SceneConfig::Custom(spec) => spec.clone(),
        }
    }
}

/// `"medium"` or an explicit Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlurConfig {
    Named(String),
    Explicit(BlurModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadonConfig {
    pub angles_per_step: usize,
    #[serde(default)]
    pub detectors: Option<usize>,
    #[serde(default)]
    pub start_deg: f64,
    #[serde(default = "one")]
    pub step_offset_deg: f64,
    #[serde(default)]
    pub stride_deg: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForwardConfig {
    Blur(BlurConfig),
    Radon(RadonConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Parsed case-insensitively so the error can list the valid names.
    pub method: Option<String>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub max_iters: Option<usize>,
    pub gk_seed_steps: Option<usize>,
    pub rel_change_tol: Option<f64>,
    pub nonneg: Option<bool>,
    pub fixed_lambda: Option<f64>,
    pub gcv_rule: Option<GcvRule>,
    pub lambda_grid: Option<GridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub scene: SceneConfig,
    pub forward: ForwardConfig,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub method: Option<String>,
    pub nonneg: bool,
}

/// Fully resolved run: everything needed to build the problem and solver.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub experiment: Experiment,
    pub scene: SceneSpec,
    pub forward: ResolvedForward,
    pub noise: NoiseSpec,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone)]
pub enum ResolvedForward {
    Blur(BlurModel),
    Radon(RadonModel),
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| config_error(format!("malformed configuration: {e}")))
    }

    pub fn resolve(&self, overrides: &Overrides) -> Result<ResolvedRun, CliError> {
        let scene = self.scene.build();
        scene.validate().map_err(|e| config_error(e.to_string()))?;
        let [n_v, n_h, n_t] = scene.dims();

        let forward = match (&self.forward, self.experiment) {
            (ForwardConfig::Blur(b), Experiment::Deblur) => {
                let model = match b {
                    BlurConfig::Named(name) if name.eq_ignore_ascii_case("medium") => {
                        if n_v != n_h {
                            return Err(config_error("the medium blur preset needs square frames"));
                        }
                        BlurModel::medium(n_v)
                    }
                    BlurConfig::Named(name) => {
                        return Err(config_error(format!("unknown blur preset '{name}'; use \"medium\" or {{\"sigma_psf\", \"bandwidth\"}}")))
                    }
                    BlurConfig::Explicit(m) => *m,
                };
                ResolvedForward::Blur(model)
            }
            (ForwardConfig::Radon(r), Experiment::RadonDynamic | Experiment::RadonStaticBaseline) => {
                if n_v != n_h {
                    return Err(config_error("Radon experiments need square frames"));
                }
                let mut model = RadonModel::new(n_v, n_t, r.angles_per_step);
                model.n_detectors = r.detectors;
                model.start_deg = r.start_deg;
                model.step_offset_deg = r.step_offset_deg;
                model.stride_deg = r.stride_deg;
                ResolvedForward::Radon(model)
            }
            (_, exp) => {
                return Err(config_error(format!(
                    "experiment '{}' does not match the forward model",
                    exp.name()
                )))
            }
        };

        let mut noise = self.noise;
        if let Some(seed) = overrides.seed {
            noise.seed = seed;
        }

        let s = &self.solver;
        let method_name = overrides.method.as_ref().or(s.method.as_ref());
        let method: Method = match method_name {
            Some(name) => name.parse().map_err(|e: mmgks::Error| config_error(e.to_string()))?,
            None => Method::AnisoTV,
        };
        let epsilon = s.epsilon.unwrap_or(DEFAULT_EPSILON);
        let spec = RegularizerSpec::new(method, [n_v, n_h, n_t], epsilon).map_err(|e| config_error(e.to_string()))?;
        let mut solver = SolverConfig::new(spec);
        solver.eta = s.eta.unwrap_or(DEFAULT_ETA);
        solver.max_iters = s.max_iters.unwrap_or(DEFAULT_MAX_ITERS);
        solver.gk_seed_steps = s.gk_seed_steps.unwrap_or(DEFAULT_SEED_STEPS);
        solver.rel_change_tol = s.rel_change_tol.unwrap_or(DEFAULT_REL_CHANGE_TOL);
        solver.nonneg = overrides.nonneg || s.nonneg.unwrap_or(false);
        solver.fixed_lambda = s.fixed_lambda;
        solver.gcv_rule = s.gcv_rule.unwrap_or_default();
        let grid = s.lambda_grid.clone().unwrap_or(GridConfig {
            lo: DEFAULT_GRID_RANGE.0,
            hi: DEFAULT_GRID_RANGE.1,
            points: DEFAULT_GRID_POINTS,
        });
        if !(grid.lo > 0.0 && grid.hi > grid.lo && grid.points >= 1) {
            return Err(config_error("lambda_grid needs 0 < lo < hi and at least one point"));
        }
        solver.lambda_grid = log_grid(grid.lo, grid.hi, grid.points);
        solver.validate().map_err(|e| config_error(e.to_string()))?;
        if self.experiment == Experiment::RadonStaticBaseline {
            // per-frame problems use spatial TV on single frames
            RegularizerSpec::spatial_tv(n_v, n_h, epsilon).map_err(|e| config_error(e.to_string()))?;
        }

        Ok(ResolvedRun {
            experiment: self.experiment,
            scene,
            forward,
            noise,
            solver,
        })
    }
}
