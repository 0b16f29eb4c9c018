//! Regularization-parameter selection by generalized cross validation on the
//! small projected problem
//!
//! ```text
//! min_y ‖R_F y − rhs‖² + λ‖R_M y‖²
//! ```
//!
//! The GCV function is evaluated through the generalized singular value
//! decomposition of the pair `(R_F, R_M)`, obtained from the CS decomposition of
//! the orthogonal factor of the stacked matrix `[R_F; R_M]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Projected pair `(R_F, R_M)` and right-hand side `Q_Fᵀ Γ^{-1/2} d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPair {
    pub r_f: DMatrix<f64>,
    pub r_m: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl ProjectedPair {
    pub fn new(r_f: DMatrix<f64>, r_m: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        let d = r_f.ncols();
        if r_f.nrows() != d || r_m.shape() != (d, d) || rhs.len() != d {
            return Err(Error::InvalidDimension(format!(
                "projected pair needs square factors of equal size, got R_F {:?}, R_M {:?}, rhs {}",
                r_f.shape(),
                r_m.shape(),
                rhs.len()
            )));
        }
        if d == 0 {
            return Err(Error::InvalidDimension("empty projected pair".into()));
        }
        Ok(Self { r_f, r_m, rhs })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

/// GSVD data needed by GCV: `R_F = U C X`, `R_M = V S X` with `C² + S² = I`.
#[derive(Debug, Clone)]
pub struct GcvFactors {
    /// `c_i²`
    c2: Vec<f64>,
    /// `s_i²`
    s2: Vec<f64>,
    /// `(u_iᵀ rhs)²`
    beta2: Vec<f64>,
}

/// Relative threshold on the diagonal of the stacked triangular factor below
/// which the pencil is treated as singular.
const PENCIL_RANK_TOL: f64 = 1e-12;

impl GcvFactors {
    pub fn new(pair: &ProjectedPair) -> Result<Self> {
        let d = pair.dim();
        let mut stacked = DMatrix::zeros(2 * d, d);
        stacked.view_mut((0, 0), (d, d)).copy_from(&pair.r_f);
        stacked.view_mut((d, 0), (d, d)).copy_from(&pair.r_m);
        let qr = stacked.qr();
        let r = qr.r();
        check_triangular_rank(&r, "GCV pencil [R_F; R_M]")?;
        let q = qr.q();
        let q1 = q.rows(0, d).into_owned();
        let q2 = q.rows(d, d).into_owned();
        let svd = q1.svd(true, true);
        let (Some(u), Some(z_t)) = (svd.u, svd.v_t) else {
            return Err(Error::SingularSystem("SVD of the CS block failed".into()));
        };
        let c2: Vec<f64> = svd.singular_values.iter().map(|c| c * c).collect();
        // ‖Q2 z_i‖ is more accurate than √(1 − c_i²) for c_i close to 1
        let q2z = q2 * z_t.transpose();
        let s2: Vec<f64> = q2z.column_iter().map(|col| col.norm_squared()).collect();
        let beta = u.transpose() * &pair.rhs;
        let beta2 = beta.iter().map(|b| b * b).collect();
        Ok(Self { c2, s2, beta2 })
    }

    /// `G(λ) = d Σ(1−f_i)² β_i² / (Σ(1−f_i))²` with `f_i = c_i² / (c_i² + λ s_i²)`.
    pub fn gcv(&self, lambda: f64) -> f64 {
        let d = self.c2.len() as f64;
        let mut num = 0.0;
        let mut trace = 0.0;
        for ((c2, s2), b2) in self.c2.iter().zip(&self.s2).zip(&self.beta2) {
            let denom = c2 + lambda * s2;
            let one_minus_f = if denom > 0.0 { lambda * s2 / denom } else { 1.0 };
            num += one_minus_f * one_minus_f * b2;
            trace += one_minus_f;
        }
        d * num / (trace * trace)
    }

    /// GCV of the full `m`-row problem restricted to the subspace:
    /// `m (Σ(1−f_i)² β_i² + ρ²) / (m − Σ f_i)²`, where `ρ` is the part of the
    /// whitened data outside the range of the projected forward operator.
    pub fn gcv_full_residual(&self, lambda: f64, outside_sq: f64, m: usize) -> f64 {
        let mut num = outside_sq;
        let mut fsum = 0.0;
        for ((c2, s2), b2) in self.c2.iter().zip(&self.s2).zip(&self.beta2) {
            let denom = c2 + lambda * s2;
            let (f, one_minus_f) = if denom > 0.0 {
                (c2 / denom, lambda * s2 / denom)
            } else {
                (0.0, 1.0)
            };
            num += one_minus_f * one_minus_f * b2;
            fsum += f;
        }
        let m = m as f64;
        let trace = m - fsum;
        m * num / (trace * trace)
    }
}

/// Which GCV functional picks `λ` on the projected problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GcvRule {
    /// `d‖(I − R_F T_λ) rhs‖² / trace(I − R_F T_λ)²` on the square projected system.
    #[default]
    Projected,
    /// Numerator includes the residual outside the subspace and the trace
    /// counts all `m` data; see [`GcvFactors::gcv_full_residual`].
    FullResidual,
}

pub(crate) fn check_triangular_rank(r: &DMatrix<f64>, context: &str) -> Result<()> {
    let diag = r.diagonal();
    let scale = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(scale > 0.0) || !(min > PENCIL_RANK_TOL * scale) || diag.len() < r.ncols() {
        return Err(Error::SingularSystem(format!(
            "{context} is rank deficient (min |r_ii| = {min:e}, max = {scale:e}); the null spaces of the forward operator and the regularizer intersect"
        )));
    }
    Ok(())
}

/// GCV values of the projected pair at each `λ`.
pub fn gcv_curve(pair: &ProjectedPair, lambdas: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::InvalidArgument(format!("λ must be positive, got {bad}")));
    }
    let f = GcvFactors::new(pair)?;
    Ok(lambdas.iter().map(|&l| f.gcv(l)).collect())
}

pub const DEFAULT_GRID_POINTS: usize = 40;
pub const DEFAULT_GRID_RANGE: (f64, f64) = (1e-6, 1e2);
/// Golden-section refinement stops when the bracket `[a, b]` has `b/a − 1` below this.
pub const REFINE_REL_WIDTH: f64 = 1e-3;
/// Curve values within this relative distance of the minimum count as ties.
const TIE_REL_TOL: f64 = 1e-12;

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    grid
}

pub fn default_grid() -> Vec<f64> {
    log_grid(DEFAULT_GRID_RANGE.0, DEFAULT_GRID_RANGE.1, DEFAULT_GRID_POINTS)
}

/// GCV-optimal `λ`: the grid minimizer (ties go to the larger `λ`), refined by
/// golden-section search in `log λ` between the neighbouring grid points.
pub fn select_lambda(pair: &ProjectedPair, grid: &[f64]) -> Result<f64> {
    let f = GcvFactors::new(pair)?;
    select_lambda_with(|l| f.gcv(l), grid)
}

/// [`select_lambda`] for an arbitrary curve.
pub fn select_lambda_with<G: Fn(f64) -> f64>(curve: G, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty λ grid".into()));
    }
    if grid.iter().any(|l| !(*l > 0.0)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "λ grid must be positive and strictly ascending".into(),
        ));
    }
    let values: Vec<f64> = grid.iter().map(|&l| curve(l)).collect();
    let min = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::NonFinite("GCV curve has no finite value on the grid".into()));
    }
    let tie = min.abs() * TIE_REL_TOL;
    let best = values
        .iter()
        .rposition(|v| v.is_finite() && *v <= min + tie)
        .expect("a finite minimum exists");

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    if lo == hi {
        return Ok(grid[best]);
    }
    let (l_star, g_star) = golden_section(&curve, lo.ln(), hi.ln());
    if g_star.is_finite() && g_star < values[best] - tie {
        Ok(l_star)
    } else {
        Ok(grid[best])
    }
}

/// Minimizes `curve(exp(t))` over `t ∈ [a, b]`.
fn golden_section<G: Fn(f64) -> f64>(curve: &G, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |t: f64| curve(t.exp());
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    let width = REFINE_REL_WIDTH.ln_1p();
    while b - a > width {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        }
    }
    if f1 <= f2 {
        (x1.exp(), f1)
    } else {
        (x2.exp(), f2)
    }
}
