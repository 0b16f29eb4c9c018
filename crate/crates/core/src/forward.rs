//! Forward operators for the synthetic experiments: separable periodic Gaussian
//! blur and parallel-beam Radon projections with per-step angle schedules.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{CsrMatrix, LinearOperator};

/// Separable Gaussian blur with periodic boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurModel {
    /// Standard deviation of the PSF in pixels.
    pub sigma_psf: f64,
    /// Truncation half-width of the PSF in pixels.
    pub bandwidth: usize,
}

impl BlurModel {
    /// Medium blur: `σ = 2`, half-width 6 at 128 pixels, scaled linearly with
    /// the image side (half-width at least 1).
    pub fn medium(side: usize) -> Self {
        let f = side as f64 / 128.0;
        Self {
            sigma_psf: 2.0 * f,
            bandwidth: ((6.0 * f).round() as usize).max(1),
        }
    }
}

/// 1-D periodic convolution matrix of a sampled Gaussian with standard
/// deviation `σ`, truncated at half-width `bandwidth` and normalized to unit
/// sum, so every row and column sums to 1. The matrix is symmetric; it is
/// positive semidefinite whenever the truncated kernel's circulant symbol is,
/// which holds for the medium calibration at every size up to 64.
pub fn blur_matrix_1d(n: usize, model: &BlurModel) -> Result<DMatrix<f64>> {
    if !(model.sigma_psf >= 0.0 && model.sigma_psf.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "PSF width must be nonnegative, got {}",
            model.sigma_psf
        )));
    }
    if n == 0 {
        return Err(Error::InvalidDimension("blur of an empty axis".into()));
    }
    if model.sigma_psf == 0.0 || model.bandwidth == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let half = model.bandwidth as isize;
    let s = model.sigma_psf;
    let kernel: Vec<f64> = (-half..=half)
        .map(|k| (-(k as f64).powi(2) / (2.0 * s * s)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for (k, g) in (-half..=half).zip(&kernel) {
            let j = (i as isize + k).rem_euclid(n as isize) as usize;
            a[(i, j)] += g / total;
        }
    }
    Ok(a)
}

/// `A = A_h ⊗ A_v` acting on one column-major `n_v × n_h` frame.
pub fn build_blur_operator(model: &BlurModel, n_v: usize, n_h: usize) -> Result<LinearOperator> {
    Ok(LinearOperator::kron(
        LinearOperator::dense(blur_matrix_1d(n_h, model)?),
        LinearOperator::dense(blur_matrix_1d(n_v, model)?),
    ))
}

/// Parallel-beam geometry on an `N × N` image of unit pixels centred at the
/// origin. Step `t` (1-based) uses the angles
/// `start + t·step_offset + k·stride` degrees, `k = 0..n_angles_per_step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadonModel {
    pub image_side: usize,
    pub n_steps: usize,
    pub n_angles_per_step: usize,
    /// Defaults to `⌈√2 N⌉` with unit spacing.
    pub n_detectors: Option<usize>,
    pub start_deg: f64,
    pub step_offset_deg: f64,
    /// Defaults to `n_steps` degrees.
    pub stride_deg: Option<f64>,
}

impl RadonModel {
    pub fn new(image_side: usize, n_steps: usize, n_angles_per_step: usize) -> Self {
        Self {
            image_side,
            n_steps,
            n_angles_per_step,
            n_detectors: None,
            start_deg: 0.0,
            step_offset_deg: 1.0,
            stride_deg: None,
        }
    }

    pub fn detectors(&self) -> usize {
        self.n_detectors
            .unwrap_or_else(|| (std::f64::consts::SQRT_2 * self.image_side as f64).ceil() as usize)
    }

    /// Projection angles (degrees) of step `t ∈ 1..=n_steps`.
    pub fn angles(&self, t: usize) -> Result<Vec<f64>> {
        if t == 0 || t > self.n_steps {
            return Err(Error::InvalidArgument(format!(
                "time step {t} outside 1..={}",
                self.n_steps
            )));
        }
        let stride = self.stride_deg.unwrap_or(self.n_steps as f64);
        Ok((0..self.n_angles_per_step)
            .map(|k| self.start_deg + t as f64 * self.step_offset_deg + k as f64 * stride)
            .collect())
    }

    fn validate(&self) -> Result<()> {
        if self.image_side == 0 || self.n_steps == 0 || self.n_angles_per_step == 0 || self.detectors() == 0
        {
            return Err(Error::InvalidDimension(format!("degenerate Radon geometry {self:?}")));
        }
        Ok(())
    }
}

/// Intersection lengths of the line `x cos θ + y sin θ = s` with the pixels of
/// an `N × N` image. Pixel `(i, j)` (row `i` from the top, column `j` from the
/// left) covers `x ∈ [j − N/2, j + 1 − N/2]`, `y ∈ [N/2 − i − 1, N/2 − i]`.
fn ray_weights(n: usize, theta: f64, s: f64, out: &mut Vec<(usize, f64)>) {
    out.clear();
    let half = n as f64 / 2.0;
    let (c, sn) = (theta.cos(), theta.sin());
    // p(τ) = s (c, sn) + τ (−sn, c)
    let (px, py) = (s * c, s * sn);
    let (dx, dy) = (-sn, c);
    let eps = 1e-12;
    let mut tau = Vec::with_capacity(2 * n + 4);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < eps {
            if p <= -half || p >= half {
                return;
            }
        } else {
            let (a, b) = ((-half - p) / d, (half - p) / d);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
            for k in 0..=n {
                tau.push((-half + k as f64 - p) / d);
            }
        }
    }
    if !(hi > lo) {
        return;
    }
    tau.retain(|t| *t > lo && *t < hi);
    tau.push(lo);
    tau.push(hi);
    tau.sort_by(f64::total_cmp);
    for w in tau.windows(2) {
        let len = w[1] - w[0];
        if len <= eps {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let (x, y) = (px + mid * dx, py + mid * dy);
        let j = (x + half).floor();
        let i = (half - y).floor();
        if j < 0.0 || i < 0.0 || j >= n as f64 || i >= n as f64 {
            continue;
        }
        let (i, j) = (i as usize, j as usize);
        let col = i + n * j;
        match out.last_mut() {
            Some((c, v)) if *c == col => *v += len,
            _ => out.push((col, len)),
        }
    }
    out.sort_by_key(|e| e.0);
    out.dedup_by(|a, b| {
        if a.0 == b.0 {
            b.1 += a.1;
            true
        } else {
            false
        }
    });
}

/// `A^(t)`: one row per (angle, detector), detector index fastest, entries the
/// exact intersection lengths of each ray with each pixel.
pub fn build_radon_operator(model: &RadonModel, t: usize) -> Result<LinearOperator> {
    model.validate()?;
    let angles = model.angles(t)?;
    let n = model.image_side;
    let n_det = model.detectors();
    let mut rows = Vec::with_capacity(angles.len() * n_det);
    let mut buf = Vec::new();
    for a in angles {
        let theta = a.to_radians();
        for k in 0..n_det {
            let s = k as f64 - (n_det as f64 - 1.0) / 2.0;
            ray_weights(n, theta, s, &mut buf);
            rows.push(buf.clone());
        }
    }
    Ok(LinearOperator::sparse(CsrMatrix::from_rows(n * n, rows)?))
}

/// Forward operators of the individual time steps.
#[derive(Debug, Clone)]
pub enum StepOperators {
    /// One operator for every step: `F = I_{n_t} ⊗ A`.
    Shared(LinearOperator),
    /// `F = blockdiag(A^(1), …, A^(n_t))`.
    PerStep(Vec<LinearOperator>),
}

pub fn assemble_dynamic_forward(ops: StepOperators, n_t: usize) -> Result<LinearOperator> {
    if n_t == 0 {
        return Err(Error::InvalidDimension("no time steps".into()));
    }
    match ops {
        StepOperators::Shared(a) if n_t == 1 => Ok(a),
        StepOperators::Shared(a) => Ok(LinearOperator::kron(LinearOperator::identity(n_t), a)),
        StepOperators::PerStep(list) => {
            if list.len() != n_t {
                return Err(Error::InvalidDimension(format!(
                    "{} step operators for {n_t} time steps",
                    list.len()
                )));
            }
            let cols = list[0].cols();
            if let Some(bad) = list.iter().find(|a| a.cols() != cols) {
                return Err(Error::InvalidDimension(format!(
                    "step operators disagree on frame size: {} vs {cols}",
                    bad.cols()
                )));
            }
            if n_t == 1 {
                return Ok(list.into_iter().next().expect("one operator"));
            }
            LinearOperator::block_diag(list)
        }
    }
}

/// The dynamic Radon operator over all steps of `model`.
pub fn build_dynamic_radon(model: &RadonModel) -> Result<LinearOperator> {
    let ops = (1..=model.n_steps)
        .map(|t| build_radon_operator(model, t))
        .collect::<Result<Vec<_>>>()?;
    assemble_dynamic_forward(StepOperators::PerStep(ops), model.n_steps)
}
