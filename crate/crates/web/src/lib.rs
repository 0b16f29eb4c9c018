//! Browser bindings for the demo page: simulate a small moving scene, then
//! reconstruct it with any of the six regularizers and inspect the GCV curve
//! of the final projected problem.

use mmgks::forward::{
    assemble_dynamic_forward, build_blur_operator, build_radon_operator, BlurModel, RadonModel,
    StepOperators,
};
use mmgks::metrics::rre;
use mmgks::paramselect::{gcv_curve, log_grid};
use mmgks::phantom::{add_noise, render_scene, NoiseSpec, SceneSpec};
use mmgks::solver::{mm_gks_solve, ReconstructionProblem};
use mmgks::{Method, RegularizerSpec, SolverConfig};
use wasm_bindgen::prelude::*;

const MAX_SIDE: usize = 64;
const MAX_FRAMES: usize = 16;
const GCV_POINTS: usize = 60;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// A synthetic space-time problem held between calls.
#[wasm_bindgen]
pub struct Demo {
    side: usize,
    frames: usize,
    truth: Vec<f64>,
    observed: Vec<f64>,
    observed_shape: [usize; 2],
    problem: ReconstructionProblem,
}

#[wasm_bindgen]
impl Demo {
    /// `experiment` is `"deblur"` (medium Gaussian blur, moving phantom) or
    /// `"radon"` (limited-angle parallel beam, moving disks, 12 angles per frame).
    #[wasm_bindgen(constructor)]
    pub fn new(experiment: &str, side: usize, frames: usize, noise: f64, seed: u64) -> Result<Demo, String> {
        if !(8..=MAX_SIDE).contains(&side) || !(2..=MAX_FRAMES).contains(&frames) {
            return Err(format!("size must be 8..={MAX_SIDE} and frames 2..={MAX_FRAMES}"));
        }
        let (scene, forward, observed_shape) = match experiment {
            "deblur" => {
                let a = build_blur_operator(&BlurModel::medium(side), side, side).map_err(err)?;
                let f = assemble_dynamic_forward(StepOperators::Shared(a), frames).map_err(err)?;
                (SceneSpec::deblur_phantom(side, frames), f, [side, side])
            }
            "radon" => {
                let model = RadonModel::new(side, frames, 12);
                let ops = (1..=frames)
                    .map(|t| build_radon_operator(&model, t))
                    .collect::<mmgks::Result<Vec<_>>>()
                    .map_err(err)?;
                let f = assemble_dynamic_forward(StepOperators::PerStep(ops), frames).map_err(err)?;
                // sinogram frame: detectors down, angles across
                (SceneSpec::six_disks(side, frames), f, [model.detectors(), 12])
            }
            other => return Err(format!("unknown experiment '{other}'; use \"deblur\" or \"radon\"")),
        };
        let truth = render_scene(&scene).map_err(err)?.into_vec();
        let clean = forward.apply(&truth).map_err(err)?;
        let m = clean.len();
        let noisy = add_noise(&clean, &NoiseSpec { sigma: noise, seed }, &vec![1.0; m]).map_err(err)?;
        let problem =
            ReconstructionProblem::white(forward, noisy.data.clone(), noisy.delta, Some(truth.clone())).map_err(err)?;
        Ok(Demo {
            side,
            frames,
            truth,
            observed: noisy.data,
            observed_shape,
            problem,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Column-major frames, one after another.
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }

    /// Blurred frames or per-frame sinograms, column-major.
    pub fn observed(&self) -> Vec<f64> {
        self.observed.clone()
    }

    pub fn observed_rows(&self) -> usize {
        self.observed_shape[0]
    }

    pub fn observed_cols(&self) -> usize {
        self.observed_shape[1]
    }

    /// Runs MM-GKS. A `fixed_lambda` that is not positive selects `λ` by GCV.
    pub fn reconstruct(&self, method: &str, nonneg: bool, fixed_lambda: f64, max_iters: usize) -> Result<Reconstruction, String> {
        let method: Method = method.parse().map_err(err)?;
        let spec = RegularizerSpec::new(method, [self.side, self.side, self.frames], 1e-3).map_err(err)?;
        let mut config = SolverConfig::new(spec);
        config.nonneg = nonneg;
        config.max_iters = max_iters.clamp(1, 300);
        if fixed_lambda > 0.0 {
            config.fixed_lambda = Some(fixed_lambda);
        }
        let out = mm_gks_solve(&self.problem, &config).map_err(err)?;
        let gcv_lambdas = log_grid(1e-6, 1e2, GCV_POINTS);
        let gcv_values = gcv_curve(&out.state.projected_pair().map_err(err)?, &gcv_lambdas).map_err(err)?;
        Ok(Reconstruction {
            rre: rre(&out.u, &self.truth).map_err(err)?,
            rre_history: out.history.iter().filter_map(|r| r.rre).collect(),
            lambda_history: out.history.iter().map(|r| r.lambda).collect(),
            exit: out.exit.as_str().to_string(),
            dp_iteration: out.first_dp().map(|r| r.iter as i32).unwrap_or(-1),
            frames: out.u,
            gcv_lambdas,
            gcv_values,
        })
    }
}

#[wasm_bindgen]
pub struct Reconstruction {
    frames: Vec<f64>,
    rre: f64,
    rre_history: Vec<f64>,
    lambda_history: Vec<f64>,
    exit: String,
    dp_iteration: i32,
    gcv_lambdas: Vec<f64>,
    gcv_values: Vec<f64>,
}

#[wasm_bindgen]
impl Reconstruction {
    pub fn frames(&self) -> Vec<f64> {
        self.frames.clone()
    }

    pub fn rre(&self) -> f64 {
        self.rre
    }

    pub fn rre_history(&self) -> Vec<f64> {
        self.rre_history.clone()
    }

    pub fn lambda_history(&self) -> Vec<f64> {
        self.lambda_history.clone()
    }

    pub fn exit(&self) -> String {
        self.exit.clone()
    }

    /// First iteration meeting the discrepancy principle, or −1.
    pub fn dp_iteration(&self) -> i32 {
        self.dp_iteration
    }

    pub fn gcv_lambdas(&self) -> Vec<f64> {
        self.gcv_lambdas.clone()
    }

    pub fn gcv_values(&self) -> Vec<f64> {
        self.gcv_values.clone()
    }
}

/// Names accepted by [`Demo::reconstruct`], comma separated.
#[wasm_bindgen]
pub fn methods() -> String {
    Method::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deblur_demo_round_trip() {
        let demo = Demo::new("deblur", 16, 3, 0.01, 4).unwrap();
        assert_eq!(demo.truth().len(), 16 * 16 * 3);
        assert_eq!(demo.observed().len(), 16 * 16 * 3);
        assert_eq!((demo.observed_rows(), demo.observed_cols()), (16, 16));
        let rec = demo.reconstruct("anisotv", false, 0.0, 50).unwrap();
        assert_eq!(rec.frames().len(), 16 * 16 * 3);
        assert!(rec.rre().is_finite() && rec.rre() < 1.0);
        assert_eq!(rec.gcv_lambdas().len(), rec.gcv_values().len());
        assert!(rec.gcv_values().iter().all(|g| *g >= 0.0));
        assert_eq!(rec.lambda_history().len(), rec.rre_history().len());
    }

    #[test]
    fn radon_demo_with_fixed_lambda_and_nonneg() {
        let demo = Demo::new("radon", 16, 2, 0.01, 1).unwrap();
        let rows = demo.observed_rows() * demo.observed_cols();
        assert_eq!(demo.observed().len(), rows * 2);
        let rec = demo.reconstruct("GS", true, 0.1, 40).unwrap();
        assert!(rec.frames().iter().all(|v| *v >= 0.0));
        assert!(rec.lambda_history().iter().all(|l| *l == 0.1));
    }

    #[test]
    fn errors_are_messages() {
        assert!(Demo::new("pet", 16, 2, 0.01, 1).is_err());
        assert!(Demo::new("deblur", 4, 2, 0.01, 1).is_err());
        let demo = Demo::new("deblur", 8, 2, 0.01, 1).unwrap();
        let msg = demo.reconstruct("nope", false, 0.0, 5).err().unwrap();
        assert!(msg.contains("Iso3DTV"), "{msg}");
        assert_eq!(methods().split(',').count(), 6);
    }
}
