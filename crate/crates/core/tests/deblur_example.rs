//! Small space-time deblurring run through the public API.

use mmgks::forward::{assemble_dynamic_forward, build_blur_operator, BlurModel, StepOperators};
use mmgks::metrics::rre;
use mmgks::phantom::{add_noise, render_scene, NoiseSpec, SceneSpec};
use mmgks::solver::{mm_gks_solve, ReconstructionProblem};
use mmgks::{Method, RegularizerSpec, SolverConfig};

fn problem(model: BlurModel) -> ReconstructionProblem {
    let (n, n_t) = (16, 3);
    let truth = render_scene(&SceneSpec::deblur_phantom(n, n_t)).unwrap().into_vec();
    let a = build_blur_operator(&model, n, n).unwrap();
    let f = assemble_dynamic_forward(StepOperators::Shared(a), n_t).unwrap();
    let clean = f.apply(&truth).unwrap();
    let m = clean.len();
    let noisy = add_noise(&clean, &NoiseSpec { sigma: 0.01, seed: 5 }, &vec![1.0; m]).unwrap();
    ReconstructionProblem::white(f, noisy.data, noisy.delta, Some(truth)).unwrap()
}

/// The discrepancy principle stops the run, and the regularized iterate beats
/// the `λ → 0` solution on the same subspace.
#[test]
fn aniso_tv_beats_unregularized_projected_solution() {
    let p = problem(BlurModel { sigma_psf: 1.0, bandwidth: 3 });
    let config = SolverConfig::new(RegularizerSpec::new(Method::AnisoTV, [16, 16, 3], 1e-3).unwrap());
    let out = mm_gks_solve(&p, &config).unwrap();
    let dp = out.first_dp().expect("discrepancy principle within 150 iterations");
    assert!(dp.iter <= 150);
    let truth = p.truth.as_ref().unwrap();
    let ls = out.state.unregularized_solution().unwrap();
    let (reg_rre, ls_rre) = (rre(&out.u, truth).unwrap(), rre(&ls, truth).unwrap());
    assert!(reg_rre < ls_rre, "regularized {reg_rre} vs unregularized {ls_rre} at λ = {}", dp.lambda);
}
