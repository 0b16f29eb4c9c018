//! MM-GKS: majorization-minimization where each reweighted least-squares
//! problem is projected onto a generalized Krylov subspace.
//!
//! Outer iteration `k`:
//! 1. weights `W^(k)` from the current iterate, `M^(k) = W^(k) D`;
//! 2. thin QR factors of `Γ^{-1/2} F V_d` (updated by one column per step) and
//!    of `M^(k) V_d` (recomputed, since `M` changes entirely);
//! 3. `λ_k` by GCV on the projected pair (or fixed);
//! 4. projected solve, lift `u = V_d y`, optional projection onto `u >= 0`;
//! 5. stopping tests, then expansion of `V_d` by the normalized residual of the
//!    reweighted normal equations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm, orthogonalize, scale};
use crate::operators::LinearOperator;
use crate::paramselect::{self, check_triangular_rank, GcvFactors, GcvRule, ProjectedPair};
use crate::regularization::{Regularizer, RegularizerSpec, WeightOperator};

/// `d = F u + e`, `e ~ N(0, Γ)` with diagonal `Γ`.
#[derive(Debug, Clone)]
pub struct ReconstructionProblem {
    pub forward: LinearOperator,
    pub data: Vec<f64>,
    pub noise_cov_diag: Vec<f64>,
    /// Estimate of `‖e‖_{Γ⁻¹}`; zero disables the discrepancy principle.
    pub delta: f64,
    pub truth: Option<Vec<f64>>,
    inv_sqrt_gamma: Vec<f64>,
}

impl ReconstructionProblem {
    pub fn new(
        forward: LinearOperator,
        data: Vec<f64>,
        noise_cov_diag: Vec<f64>,
        delta: f64,
        truth: Option<Vec<f64>>,
    ) -> Result<Self> {
        check_len("data", forward.rows(), data.len())?;
        check_len("noise covariance", forward.rows(), noise_cov_diag.len())?;
        if let Some(t) = &truth {
            check_len("ground truth", forward.cols(), t.len())?;
        }
        if noise_cov_diag.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidArgument(
                "noise covariance diagonal must be strictly positive".into(),
            ));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("δ must be nonnegative, got {delta}")));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("data".into()));
        }
        let inv_sqrt_gamma = noise_cov_diag.iter().map(|g| g.sqrt().recip()).collect();
        Ok(Self {
            forward,
            data,
            noise_cov_diag,
            delta,
            truth,
            inv_sqrt_gamma,
        })
    }

    /// Problem with `Γ = I`.
    pub fn white(
        forward: LinearOperator,
        data: Vec<f64>,
        delta: f64,
        truth: Option<Vec<f64>>,
    ) -> Result<Self> {
        let m = forward.rows();
        Self::new(forward, data, vec![1.0; m], delta, truth)
    }

    pub fn n(&self) -> usize {
        self.forward.cols()
    }

    /// `Γ^{-1/2} F x`
    pub fn apply_whitened(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.forward.apply(x)?;
        for (yi, s) in y.iter_mut().zip(&self.inv_sqrt_gamma) {
            *yi *= s;
        }
        Ok(y)
    }

    /// `Fᵀ Γ^{-1/2} y`
    pub fn apply_whitened_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("whitened adjoint input", self.data.len(), y.len())?;
        let scaled: Vec<f64> = y.iter().zip(&self.inv_sqrt_gamma).map(|(a, s)| a * s).collect();
        self.forward.apply_adjoint(&scaled)
    }

    /// `Γ^{-1/2} d`
    pub fn whitened_data(&self) -> Vec<f64> {
        self.data.iter().zip(&self.inv_sqrt_gamma).map(|(a, s)| a * s).collect()
    }

    /// `‖F u − d‖_{Γ⁻¹}`
    pub fn residual_norm(&self, u: &[f64]) -> Result<f64> {
        let fu = self.forward.apply(u)?;
        Ok(fu
            .iter()
            .zip(&self.data)
            .zip(&self.inv_sqrt_gamma)
            .map(|((f, d), s)| ((f - d) * s).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    /// `J_ε(u) = ½‖F u − d‖²_{Γ⁻¹} + λ R_ε(u)`
    pub fn objective(&self, reg: &Regularizer, u: &[f64], lambda: f64) -> Result<f64> {
        let r = self.residual_norm(u)?;
        Ok(0.5 * r * r + lambda * reg.value(u, true)?)
    }
}

/// `‖F u − d‖_{Γ⁻¹} <= η δ`
pub fn check_dp(problem: &ReconstructionProblem, u: &[f64], eta: f64) -> Result<bool> {
    if !(eta > 1.0) {
        return Err(Error::InvalidArgument(format!("η must exceed 1, got {eta}")));
    }
    Ok(problem.residual_norm(u)? <= eta * problem.delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub regularizer: RegularizerSpec,
    pub eta: f64,
    pub max_iters: usize,
    /// Golub-Kahan steps used to seed the subspace.
    pub gk_seed_steps: usize,
    pub rel_change_tol: f64,
    pub nonneg: bool,
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub gcv_rule: GcvRule,
    /// Skip GCV and use this `λ` in every iteration.
    pub fixed_lambda: Option<f64>,
    /// Use the whole space (`V = I`) instead of a growing Krylov basis.
    /// Only sensible for small problems.
    pub full_space: bool,
}

pub const DEFAULT_ETA: f64 = 1.01;
pub const DEFAULT_MAX_ITERS: usize = 150;
pub const DEFAULT_SEED_STEPS: usize = 5;
pub const DEFAULT_REL_CHANGE_TOL: f64 = 1e-6;

impl SolverConfig {
    pub fn new(regularizer: RegularizerSpec) -> Self {
        Self {
            regularizer,
            eta: DEFAULT_ETA,
            max_iters: DEFAULT_MAX_ITERS,
            gk_seed_steps: DEFAULT_SEED_STEPS,
            rel_change_tol: DEFAULT_REL_CHANGE_TOL,
            nonneg: false,
            lambda_grid: paramselect::default_grid(),
            gcv_rule: GcvRule::Projected,
            fixed_lambda: None,
            full_space: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.regularizer.validate()?;
        if !(self.eta > 1.0) {
            return Err(Error::InvalidArgument(format!("η must exceed 1, got {}", self.eta)));
        }
        if self.gk_seed_steps == 0 {
            return Err(Error::InvalidArgument("at least one Golub-Kahan step is required".into()));
        }
        if !(self.rel_change_tol >= 0.0) {
            return Err(Error::InvalidArgument("relative-change tolerance must be >= 0".into()));
        }
        if let Some(l) = self.fixed_lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidArgument(format!("fixed λ must be positive, got {l}")));
            }
        } else if self.lambda_grid.is_empty()
            || self.lambda_grid.iter().any(|l| !(*l > 0.0))
            || self.lambda_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidArgument(
                "λ grid must be nonempty, positive and strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

/// Orthonormal seed basis and whether Golub-Kahan broke down early.
#[derive(Debug, Clone)]
pub struct SeedBasis {
    pub basis: Vec<Vec<f64>>,
    pub breakdown: bool,
}

const BREAKDOWN_TOL: f64 = 1e-12;

/// `ℓ` Golub-Kahan bidiagonalization steps on `Γ^{-1/2} F` started from
/// `Γ^{-1/2} d`, with one reorthogonalization pass; returns the right vectors.
pub fn seed_subspace(problem: &ReconstructionProblem, ell: usize) -> Result<SeedBasis> {
    let n = problem.n();
    if ell == 0 || ell > n {
        return Err(Error::InvalidArgument(format!("seed steps must lie in 1..={n}, got {ell}")));
    }
    let mut u = problem.whitened_data();
    let beta = norm(&u);
    if beta == 0.0 {
        return Err(Error::InvalidArgument("data vector is zero".into()));
    }
    scale(beta.recip(), &mut u);
    let mut left = vec![u.clone()];
    let mut right: Vec<Vec<f64>> = Vec::with_capacity(ell);

    let mut v = problem.apply_whitened_adjoint(&u)?;
    let scale_ref = norm(&v);
    if scale_ref == 0.0 {
        return Err(Error::InvalidArgument(
            "FᵀΓ⁻¹d vanishes; the data carries no information about u".into(),
        ));
    }
    loop {
        orthogonalize(&right, &mut v);
        let alpha = norm(&v);
        if alpha <= BREAKDOWN_TOL * scale_ref {
            return Ok(SeedBasis { basis: right, breakdown: true });
        }
        scale(alpha.recip(), &mut v);
        right.push(v);
        if right.len() == ell {
            return Ok(SeedBasis { basis: right, breakdown: false });
        }
        let last = right.last().expect("just pushed");
        let mut u = problem.apply_whitened(last)?;
        let fv = norm(&u);
        orthogonalize(&left, &mut u);
        let beta = norm(&u);
        if beta <= BREAKDOWN_TOL * fv.max(alpha) {
            return Ok(SeedBasis { basis: right, breakdown: true });
        }
        scale(beta.recip(), &mut u);
        v = problem.apply_whitened_adjoint(&u)?;
        left.push(u);
    }
}

/// `argmin_y ‖R_F y − rhs‖² + λ‖R_M y‖²` via QR of `[R_F; √λ R_M]`.
pub fn solve_projected(pair: &ProjectedPair, lambda: f64) -> Result<DVector<f64>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("λ must be nonnegative, got {lambda}")));
    }
    let d = pair.dim();
    let mut stacked = DMatrix::zeros(2 * d, d);
    stacked.view_mut((0, 0), (d, d)).copy_from(&pair.r_f);
    stacked
        .view_mut((d, 0), (d, d))
        .copy_from(&(&pair.r_m * lambda.sqrt()));
    let mut b = DVector::zeros(2 * d);
    b.rows_mut(0, d).copy_from(&pair.rhs);
    let qr = stacked.qr();
    let r = qr.r();
    check_triangular_rank(&r, "stacked projected system")?;
    let mut qtb = b;
    qr.q_tr_mul(&mut qtb);
    let rhs = qtb.rows(0, d).into_owned();
    r.solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::SingularSystem("triangular solve failed".into()))
}

/// Outcome of one subspace expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    Expanded,
    /// The residual vanished (or the basis already spans the space).
    Converged,
}

/// Residual norms below this fraction of the reference scale mean convergence.
const RESIDUAL_TOL: f64 = 1e-14;
/// A new column of `Γ^{-1/2} F V` whose component outside `span(Q_F)` is below
/// this fraction of its norm is treated as dependent.
const DEPENDENT_TOL: f64 = 1e-12;

/// Basis, cached products and projected factors of an MM-GKS run.
#[derive(Debug, Clone)]
pub struct SolverState {
    basis: Vec<Vec<f64>>,
    /// Columns of `Q_F` (a zero column marks a dependent `Γ^{-1/2} F v`).
    q_f: Vec<Vec<f64>>,
    r_f: DMatrix<f64>,
    /// `Q_Fᵀ Γ^{-1/2} d`
    rhs: DVector<f64>,
    /// `D v_i` for every basis vector.
    dv: Vec<Vec<f64>>,
    weights: Option<WeightOperator>,
    r_m: DMatrix<f64>,
    y: DVector<f64>,
    u: Vec<f64>,
    dw: Vec<f64>,
    pub lambda_history: Vec<f64>,
    pub objective_history: Vec<f64>,
    pub rre_history: Vec<f64>,
}

impl SolverState {
    pub fn new(
        problem: &ReconstructionProblem,
        reg: &Regularizer,
        basis: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_len("regularizer size", problem.n(), reg.spec().len())?;
        let mut state = Self {
            basis: Vec::new(),
            q_f: Vec::new(),
            r_f: DMatrix::zeros(0, 0),
            rhs: DVector::zeros(0),
            dv: Vec::new(),
            weights: None,
            r_m: DMatrix::zeros(0, 0),
            y: DVector::zeros(0),
            u: vec![0.0; problem.n()],
            dw: problem.whitened_data(),
            lambda_history: Vec::new(),
            objective_history: Vec::new(),
            rre_history: Vec::new(),
        };
        for v in basis {
            state.push_basis_vector(problem, reg, v)?;
        }
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn iterate(&self) -> &[f64] {
        &self.u
    }

    pub fn projected_solution(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn weights(&self) -> Option<&WeightOperator> {
        self.weights.as_ref()
    }

    /// Appends an orthonormal vector, extending `R_F` by one column and `D V`.
    fn push_basis_vector(
        &mut self,
        problem: &ReconstructionProblem,
        reg: &Regularizer,
        v: Vec<f64>,
    ) -> Result<()> {
        let mut w = problem.apply_whitened(&v)?;
        let w_norm = norm(&w);
        let coeffs = orthogonalize(&self.q_f, &mut w);
        let rho = norm(&w);
        let d = self.dim();
        let (q, diag) = if rho > DEPENDENT_TOL * w_norm {
            scale(rho.recip(), &mut w);
            (w, rho)
        } else {
            (vec![0.0; w.len()], 0.0)
        };
        let mut r_f = std::mem::replace(&mut self.r_f, DMatrix::zeros(0, 0)).resize(d + 1, d + 1, 0.0);
        for (i, c) in coeffs.iter().enumerate() {
            r_f[(i, d)] = *c;
        }
        r_f[(d, d)] = diag;
        self.r_f = r_f;
        let mut rhs = std::mem::replace(&mut self.rhs, DVector::zeros(0)).resize_vertically(d + 1, 0.0);
        rhs[d] = dot(&q, &self.dw);
        self.rhs = rhs;
        self.q_f.push(q);
        self.dv.push(reg.operator().apply(&v)?);
        self.basis.push(v);
        Ok(())
    }

    /// Recomputes `W^(k)` from the current iterate and the triangular factor of
    /// `M^(k) V_d = W^(k) (D V_d)`.
    pub fn refresh_weights(&mut self, reg: &Regularizer) -> Result<()> {
        let weights = reg.update_weights(&self.u)?;
        let diag = weights.diagonal();
        let rows = diag.len();
        let d = self.dim();
        let mut mv = DMatrix::zeros(rows, d);
        for (j, col) in self.dv.iter().enumerate() {
            for (i, (a, w)) in col.iter().zip(diag).enumerate() {
                mv[(i, j)] = a * w;
            }
        }
        let r = mv.qr().r();
        // fewer rows than columns: pad R with zero rows to keep it square
        let mut r_m = DMatrix::zeros(d, d);
        let k = r.nrows().min(d);
        r_m.view_mut((0, 0), (k, d)).copy_from(&r.rows(0, k));
        self.r_m = r_m;
        self.weights = Some(weights);
        Ok(())
    }

    pub fn projected_pair(&self) -> Result<ProjectedPair> {
        ProjectedPair::new(self.r_f.clone(), self.r_m.clone(), self.rhs.clone())
    }

    /// `‖Γ^{-1/2} d‖² − ‖rhs‖²`, the squared data residual no element of the
    /// subspace can reduce.
    pub fn outside_residual_sq(&self) -> f64 {
        (dot(&self.dw, &self.dw) - self.rhs.norm_squared()).max(0.0)
    }

    /// GCV-optimal `λ` for the current projected problem.
    pub fn select_lambda(&self, rule: GcvRule, grid: &[f64]) -> Result<f64> {
        let pair = self.projected_pair()?;
        match rule {
            GcvRule::Projected => paramselect::select_lambda(&pair, grid),
            GcvRule::FullResidual => {
                let factors = GcvFactors::new(&pair)?;
                let (outside, m) = (self.outside_residual_sq(), self.dw.len());
                paramselect::select_lambda_with(|l| factors.gcv_full_residual(l, outside, m), grid)
            }
        }
    }

    /// Solves the projected problem and lifts `u = V_d y`.
    pub fn solve(&mut self, lambda: f64) -> Result<()> {
        self.y = solve_projected(&self.projected_pair()?, lambda)?;
        self.u = self.lift(&self.y);
        Ok(())
    }

    fn lift(&self, y: &DVector<f64>) -> Vec<f64> {
        let mut u = vec![0.0; self.u.len()];
        for (v, c) in self.basis.iter().zip(y.iter()) {
            axpy(*c, v, &mut u);
        }
        u
    }

    /// Minimizer of the data misfit alone over the current subspace (the
    /// `λ → 0` limit of the projected problem when `R_F` is nonsingular).
    pub fn unregularized_solution(&self) -> Result<Vec<f64>> {
        check_triangular_rank(&self.r_f, "projected forward factor R_F")?;
        let y = self
            .r_f
            .solve_upper_triangular(&self.rhs)
            .ok_or_else(|| Error::SingularSystem("R_F is singular".into()))?;
        Ok(self.lift(&y))
    }

    fn project_nonnegative(&mut self) {
        for v in self.u.iter_mut() {
            *v = v.max(0.0);
        }
    }

    /// Appends the normalized residual of the reweighted normal equations,
    /// `r = FᵀΓ⁻¹(F V y − d) + λ MᵀM V y`, orthogonalized against `V_d`.
    pub fn expand_subspace(
        &mut self,
        problem: &ReconstructionProblem,
        reg: &Regularizer,
        lambda: f64,
    ) -> Result<Expansion> {
        let n = problem.n();
        if self.dim() >= n {
            return Ok(Expansion::Converged);
        }
        let weights = self
            .weights
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("expansion before any weight update".into()))?;
        // Γ^{-1/2}F V y = Q_F R_F y
        let ry = &self.r_f * &self.y;
        let mut fit: Vec<f64> = self.dw.iter().map(|v| -v).collect();
        for (q, c) in self.q_f.iter().zip(ry.iter()) {
            axpy(*c, q, &mut fit);
        }
        let mut r = problem.apply_whitened_adjoint(&fit)?;
        let mut dvy = vec![0.0; reg.operator().rows()];
        for (col, c) in self.dv.iter().zip(self.y.iter()) {
            axpy(*c, col, &mut dvy);
        }
        for (z, w) in dvy.iter_mut().zip(weights.diagonal()) {
            *z *= w * w;
        }
        let reg_grad = reg.operator().apply_adjoint(&dvy)?;
        axpy(lambda, &reg_grad, &mut r);
        let r_scale = norm(&r);
        orthogonalize(&self.basis, &mut r);
        let r_norm = norm(&r);
        let reference = r_scale.max(norm(&self.u)).max(f64::MIN_POSITIVE);
        if !r_norm.is_finite() {
            return Err(Error::NonFinite("expansion residual".into()));
        }
        if r_norm <= RESIDUAL_TOL * reference {
            return Ok(Expansion::Converged);
        }
        scale(r_norm.recip(), &mut r);
        // a third pass keeps orthonormality when the residual was mostly in span(V)
        if r_norm < 1e-6 * r_scale {
            orthogonalize(&self.basis, &mut r);
            let again = norm(&r);
            scale(again.recip(), &mut r);
        }
        self.push_basis_vector(problem, reg, r)?;
        Ok(Expansion::Expanded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitReason {
    /// Discrepancy principle satisfied.
    Discrepancy,
    RelativeChange,
    MaxIterations,
}

impl ExitReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExitReason::Discrepancy => "DP",
            ExitReason::RelativeChange => "relative-change",
            ExitReason::MaxIterations => "max-iters",
        }
    }
}

/// One row of the convergence history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub lambda: f64,
    /// `J_ε(u_k)` at this iteration's `λ`.
    pub objective: f64,
    /// `‖F u_k − d‖_{Γ⁻¹}`
    pub dp_residual: f64,
    pub rre: Option<f64>,
    pub subspace_dim: usize,
    pub dp_satisfied: bool,
}

/// Step-by-step MM-GKS driver.
#[derive(Debug)]
pub struct MmGks<'a> {
    problem: &'a ReconstructionProblem,
    config: SolverConfig,
    reg: Regularizer,
    state: SolverState,
    iter: usize,
    seed_breakdown: bool,
    truth_norm: Option<f64>,
}

/// Result of [`MmGks::step`].
#[derive(Debug, Clone)]
pub struct Step {
    pub record: IterationRecord,
    pub stop: Option<ExitReason>,
    pub expansion: Option<Expansion>,
}

impl<'a> MmGks<'a> {
    pub fn new(problem: &'a ReconstructionProblem, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let reg = Regularizer::new(config.regularizer)?;
        check_len("regularizer size", problem.n(), reg.spec().len())?;
        let (basis, seed_breakdown) = if config.full_space {
            let n = problem.n();
            let basis = (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    e
                })
                .collect();
            (basis, false)
        } else {
            let seed = seed_subspace(problem, config.gk_seed_steps.min(problem.n()))?;
            (seed.basis, seed.breakdown)
        };
        let state = SolverState::new(problem, &reg, basis)?;
        let truth_norm = match &problem.truth {
            Some(t) => {
                let n = norm(t);
                if n == 0.0 {
                    return Err(Error::InvalidArgument("ground truth is identically zero".into()));
                }
                Some(n)
            }
            None => None,
        };
        Ok(Self {
            problem,
            config,
            reg,
            state,
            iter: 0,
            seed_breakdown,
            truth_norm,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.reg
    }

    pub fn seed_breakdown(&self) -> bool {
        self.seed_breakdown
    }

    /// Runs one outer iteration.
    pub fn step(&mut self) -> Result<Step> {
        self.iter += 1;
        let previous = self.state.u.clone();
        self.state.refresh_weights(&self.reg)?;
        let lambda = match self.config.fixed_lambda {
            Some(l) => l,
            None => self.state.select_lambda(self.config.gcv_rule, &self.config.lambda_grid)?,
        };
        self.state.solve(lambda)?;
        if self.config.nonneg {
            self.state.project_nonnegative();
        }
        let u = &self.state.u;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("iterate at iteration {}", self.iter)));
        }
        let dp_residual = self.problem.residual_norm(u)?;
        let objective = 0.5 * dp_residual * dp_residual + lambda * self.reg.value(u, true)?;
        let rre = match (&self.problem.truth, self.truth_norm) {
            (Some(t), Some(tn)) => Some(
                u.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / tn,
            ),
            _ => None,
        };
        self.state.lambda_history.push(lambda);
        self.state.objective_history.push(objective);
        if let Some(r) = rre {
            self.state.rre_history.push(r);
        }
        let dp_satisfied =
            self.problem.delta > 0.0 && dp_residual <= self.config.eta * self.problem.delta;
        let record = IterationRecord {
            iter: self.iter,
            lambda,
            objective,
            dp_residual,
            rre,
            subspace_dim: self.state.dim(),
            dp_satisfied,
        };

        let change = {
            let diff: f64 = u.iter().zip(&previous).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let un = norm(u);
            if un > 0.0 {
                diff / un
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        let stop = if dp_satisfied {
            Some(ExitReason::Discrepancy)
        } else if self.iter > 1 && change < self.config.rel_change_tol {
            Some(ExitReason::RelativeChange)
        } else if self.iter >= self.config.max_iters {
            Some(ExitReason::MaxIterations)
        } else {
            None
        };
        let expansion = if stop.is_none() {
            Some(self.state.expand_subspace(self.problem, &self.reg, lambda)?)
        } else {
            None
        };
        Ok(Step {
            record,
            stop,
            expansion,
        })
    }
}

/// Final iterate, history and solver state.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub u: Vec<f64>,
    pub history: Vec<IterationRecord>,
    pub exit: ExitReason,
    pub seed_breakdown: bool,
    pub state: SolverState,
}

impl SolveOutput {
    /// First iteration at which the discrepancy principle held.
    pub fn first_dp(&self) -> Option<&IterationRecord> {
        self.history.iter().find(|r| r.dp_satisfied)
    }
}

pub fn mm_gks_solve(problem: &ReconstructionProblem, config: &SolverConfig) -> Result<SolveOutput> {
    mm_gks_solve_with(problem, config, |_, _| {})
}

/// [`mm_gks_solve`] with an observer called after every iteration with its
/// record and iterate, before any error of a later iteration can abort the run.
pub fn mm_gks_solve_with<O>(
    problem: &ReconstructionProblem,
    config: &SolverConfig,
    mut observer: O,
) -> Result<SolveOutput>
where
    O: FnMut(&IterationRecord, &[f64]),
{
    let mut solver = MmGks::new(problem, config.clone())?;
    let mut history = Vec::new();
    loop {
        let step = solver.step()?;
        observer(&step.record, solver.state.iterate());
        history.push(step.record);
        if let Some(exit) = step.stop {
            return Ok(SolveOutput {
                u: solver.state.u.clone(),
                history,
                exit,
                seed_breakdown: solver.seed_breakdown,
                state: solver.state,
            });
        }
    }
}

/// Independent per-frame reconstructions with spatial anisotropic TV, the
/// static counterpart of a dynamic problem.
pub fn solve_per_frame(
    frames: &[ReconstructionProblem],
    n_v: usize,
    n_h: usize,
    config: &SolverConfig,
) -> Result<Vec<SolveOutput>> {
    let spec = RegularizerSpec::spatial_tv(n_v, n_h, config.regularizer.epsilon)?;
    let frame_config = SolverConfig {
        regularizer: spec,
        ..config.clone()
    };
    frames.iter().map(|p| mm_gks_solve(p, &frame_config)).collect()
}
