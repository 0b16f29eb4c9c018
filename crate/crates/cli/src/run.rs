//! `reconstruct`: build the synthetic problem, solve, and write artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mmgks::forward::{assemble_dynamic_forward, build_blur_operator, build_radon_operator, StepOperators};
use mmgks::metrics::QualityReport;
use mmgks::phantom::{add_noise, render_scene};
use mmgks::regularization::RegularizerSpec;
use mmgks::solver::{mm_gks_solve_with, IterationRecord, ReconstructionProblem, SolveOutput};
use mmgks::LinearOperator;
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ResolvedForward, ResolvedRun};
use crate::pgm::{self, Scaling};
use crate::CliError;

pub const HISTORY_HEADER: &str = "iter,lambda,objective,dp_residual,rre,subspace_dim";

/// Per-solve record in the summary; the static baseline has one per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub history: String,
    pub exit_reason: String,
    pub iterations: usize,
    pub iters_at_dp: Option<usize>,
    pub lambda_at_dp: Option<f64>,
    pub final_lambda: f64,
    pub delta: f64,
    pub seed_breakdown: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub method: String,
    pub dims: [usize; 3],
    pub noise_level: f64,
    pub seed: u64,
    pub nonneg: bool,
    pub solves: Vec<SolveSummary>,
    pub quality: QualityReport,
    pub frames: Vec<Scaling>,
    pub truth_frames: Vec<Scaling>,
}

/// Streams history rows to disk so an aborted solve leaves its partial history.
struct HistoryWriter {
    out: BufWriter<File>,
    error: Option<std::io::Error>,
}

impl HistoryWriter {
    fn create(path: &Path) -> Result<Self, CliError> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{HISTORY_HEADER}")?;
        out.flush()?;
        Ok(Self { out, error: None })
    }

    fn row(&mut self, r: &IterationRecord) {
        if self.error.is_some() {
            return;
        }
        let rre = r.rre.map(|v| format!("{v:e}")).unwrap_or_default();
        let res = writeln!(
            self.out,
            "{},{:e},{:e},{:e},{},{}",
            r.iter, r.lambda, r.objective, r.dp_residual, rre, r.subspace_dim
        )
        .and_then(|_| self.out.flush());
        if let Err(e) = res {
            self.error = Some(e);
        }
    }

    fn finish(mut self) -> Result<(), CliError> {
        match self.error.take() {
            Some(e) => Err(e.into()),
            None => Ok(self.out.flush()?),
        }
    }
}

fn solve_logged(
    problem: &ReconstructionProblem,
    config: &mmgks::SolverConfig,
    history_path: &Path,
) -> Result<(SolveOutput, SolveSummary), CliError> {
    let mut writer = HistoryWriter::create(history_path)?;
    let result = mm_gks_solve_with(problem, config, |r, _| writer.row(r));
    let flushed = writer.finish();
    let out = result.map_err(CliError::Solver)?;
    flushed?;
    let last = out.history.last().expect("at least one iteration");
    let dp = out.first_dp();
    let summary = SolveSummary {
        history: history_path.file_name().unwrap().to_string_lossy().into_owned(),
        exit_reason: out.exit.as_str().to_string(),
        iterations: out.history.len(),
        iters_at_dp: dp.map(|r| r.iter),
        lambda_at_dp: dp.map(|r| r.lambda),
        final_lambda: last.lambda,
        delta: problem.delta,
        seed_breakdown: out.seed_breakdown,
    };
    Ok((out, summary))
}

fn frame_ops(run: &ResolvedRun) -> Result<Vec<LinearOperator>, CliError> {
    let [n_v, n_h, n_t] = run.scene.dims();
    Ok(match &run.forward {
        ResolvedForward::Blur(model) => {
            let a = build_blur_operator(model, n_v, n_h).map_err(CliError::Solver)?;
            vec![a; n_t]
        }
        ResolvedForward::Radon(model) => (1..=n_t)
            .map(|t| build_radon_operator(model, t))
            .collect::<mmgks::Result<Vec<_>>>()
            .map_err(CliError::Solver)?,
    })
}

fn write_frames(dir: &Path, prefix: &str, u: &[f64], dims: [usize; 3]) -> Result<Vec<Scaling>, CliError> {
    let [n_v, n_h, _] = dims;
    u.chunks(n_v * n_h)
        .enumerate()
        .map(|(t, frame)| pgm::write_frame(&dir.join(format!("{prefix}_t{:03}.pgm", t + 1)), frame, n_v, n_h))
        .collect()
}

/// Runs one configured experiment and writes every artifact into `out_dir`.
pub fn run(run: &ResolvedRun, out_dir: &Path) -> Result<Summary, CliError> {
    fs::create_dir_all(out_dir)?;
    let dims = run.scene.dims();
    let [n_v, n_h, n_t] = dims;
    let truth = render_scene(&run.scene).map_err(CliError::Solver)?.into_vec();
    let ops = frame_ops(run)?;
    let forward = match &run.forward {
        ResolvedForward::Blur(_) => assemble_dynamic_forward(StepOperators::Shared(ops[0].clone()), n_t),
        ResolvedForward::Radon(_) => assemble_dynamic_forward(StepOperators::PerStep(ops.clone()), n_t),
    }
    .map_err(CliError::Solver)?;
    let clean = forward.apply(&truth).map_err(CliError::Solver)?;
    let m = clean.len();
    let noisy = add_noise(&clean, &run.noise, &vec![1.0; m]).map_err(CliError::Solver)?;

    let (u, solves) = match run.experiment {
        Experiment::Deblur | Experiment::RadonDynamic => {
            let problem = ReconstructionProblem::white(forward, noisy.data.clone(), noisy.delta, Some(truth.clone()))
                .map_err(CliError::Solver)?;
            let (out, summary) = solve_logged(&problem, &run.solver, &out_dir.join("history.csv"))?;
            (out.u, vec![summary])
        }
        Experiment::RadonStaticBaseline => {
            let spec = RegularizerSpec::spatial_tv(n_v, n_h, run.solver.regularizer.epsilon).map_err(CliError::Solver)?;
            let frame_config = mmgks::SolverConfig {
                regularizer: spec,
                ..run.solver.clone()
            };
            let frame = n_v * n_h;
            let mut offset = 0;
            let mut u = Vec::with_capacity(truth.len());
            let mut solves = Vec::with_capacity(n_t);
            for (t, op) in ops.iter().enumerate() {
                let rows = op.rows();
                let data = noisy.data[offset..offset + rows].to_vec();
                // per-frame noise level from this frame's share of the draw
                let delta_t = noisy.noise[offset..offset + rows].iter().map(|e| e * e).sum::<f64>().sqrt();
                offset += rows;
                let truth_t = truth[t * frame..(t + 1) * frame].to_vec();
                let problem = ReconstructionProblem::white(op.clone(), data, delta_t, Some(truth_t))
                    .map_err(CliError::Solver)?;
                let path = out_dir.join(format!("history_t{:03}.csv", t + 1));
                let (out, summary) = solve_logged(&problem, &frame_config, &path)?;
                u.extend_from_slice(&out.u);
                solves.push(summary);
            }
            (u, solves)
        }
    };

    let mut quality = QualityReport::compute(&u, &truth, dims).map_err(CliError::Solver)?;
    if let [single] = solves.as_slice() {
        quality.iters_at_dp = single.iters_at_dp;
        quality.lambda_at_dp = single.lambda_at_dp;
    } else if solves.iter().all(|s| s.iters_at_dp.is_some()) {
        quality.iters_at_dp = solves.iter().filter_map(|s| s.iters_at_dp).max();
    }
    let frames = write_frames(out_dir, "recon", &u, dims)?;
    let truth_frames = write_frames(out_dir, "truth", &truth, dims)?;
    let summary = Summary {
        experiment: run.experiment.name().to_string(),
        method: if run.experiment == Experiment::RadonStaticBaseline {
            "static-TV".to_string()
        } else {
            run.solver.regularizer.method.name().to_string()
        },
        dims,
        noise_level: run.noise.sigma,
        seed: run.noise.seed,
        nonneg: run.solver.nonneg,
        solves,
        quality,
        frames,
        truth_frames,
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Format(e.to_string()))?;
    fs::write(out_dir.join("summary.json"), text + "\n")?;
    Ok(summary)
}

pub fn summary_path(dir: &Path) -> PathBuf {
    dir.join("summary.json")
}
