//! Reconstruction quality: relative error and structural similarity.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::norm;

/// `‖u − u_true‖₂ / ‖u_true‖₂`
pub fn rre(u: &[f64], u_true: &[f64]) -> Result<f64> {
    check_len("rre", u_true.len(), u.len())?;
    let denom = norm(u_true);
    if denom == 0.0 {
        return Err(Error::InvalidArgument("relative error against a zero reference".into()));
    }
    let diff: f64 = u.iter().zip(u_true).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(diff / denom)
}

const SSIM_RADIUS: usize = 5;
const SSIM_SIGMA: f64 = 1.5;

/// Mean SSIM of two column-major `n_v × n_h` images with an 11×11 Gaussian
/// window (σ = 1.5) and constants `C1 = (0.01 L)²`, `C2 = (0.03 L)²`. Near the
/// border the window is truncated to the image and renormalized, so the map
/// has the image's size.
pub fn ssim(a: &[f64], b: &[f64], n_v: usize, n_h: usize, dynamic_range: f64) -> Result<f64> {
    check_len("ssim first image", n_v * n_h, a.len())?;
    check_len("ssim second image", n_v * n_h, b.len())?;
    if !(dynamic_range > 0.0 && dynamic_range.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dynamic range must be positive, got {dynamic_range}"
        )));
    }
    if n_v == 0 || n_h == 0 {
        return Err(Error::InvalidDimension("empty image".into()));
    }
    let g: Vec<f64> = (0..=2 * SSIM_RADIUS)
        .map(|k| {
            let d = k as f64 - SSIM_RADIUS as f64;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let c1 = (0.01 * dynamic_range).powi(2);
    let c2 = (0.03 * dynamic_range).powi(2);
    let r = SSIM_RADIUS as isize;
    let mut total = 0.0;
    for j in 0..n_h as isize {
        for i in 0..n_v as isize {
            let (mut w_sum, mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for dj in -r..=r {
                let jj = j + dj;
                if jj < 0 || jj >= n_h as isize {
                    continue;
                }
                for di in -r..=r {
                    let ii = i + di;
                    if ii < 0 || ii >= n_v as isize {
                        continue;
                    }
                    let w = g[(di + r) as usize] * g[(dj + r) as usize];
                    let idx = ii as usize + n_v * jj as usize;
                    let (x, y) = (a[idx], b[idx]);
                    w_sum += w;
                    mx += w * x;
                    my += w * y;
                    sxx += w * x * x;
                    syy += w * y * y;
                    sxy += w * x * y;
                }
            }
            let (mx, my) = (mx / w_sum, my / w_sum);
            let var_x = sxx / w_sum - mx * mx;
            let var_y = syy / w_sum - my * my;
            let cov = sxy / w_sum - mx * my;
            let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
            let den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
            total += num / den;
        }
    }
    Ok(total / (n_v * n_h) as f64)
}

/// Per-frame and aggregate quality of a reconstructed sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub rre_total: f64,
    pub rre_per_frame: Vec<f64>,
    pub ssim_per_frame: Vec<f64>,
    pub iters_at_dp: Option<usize>,
    pub lambda_at_dp: Option<f64>,
}

impl QualityReport {
    /// SSIM uses the dynamic range of the whole true sequence.
    pub fn compute(u: &[f64], truth: &[f64], dims: [usize; 3]) -> Result<Self> {
        let [nv, nh, nt] = dims;
        check_len("quality report", nv * nh * nt, truth.len())?;
        let rre_total = rre(u, truth)?;
        let (lo, hi) = truth
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        let range = if hi > lo { hi - lo } else { hi.abs().max(1.0) };
        let frame = nv * nh;
        let mut rre_per_frame = Vec::with_capacity(nt);
        let mut ssim_per_frame = Vec::with_capacity(nt);
        for (uf, tf) in u.chunks(frame).zip(truth.chunks(frame)) {
            // an all-zero true frame has no defined relative error
            rre_per_frame.push(rre(uf, tf).unwrap_or(f64::NAN));
            ssim_per_frame.push(ssim(uf, tf, nv, nh, range)?);
        }
        Ok(Self {
            rre_total,
            rre_per_frame,
            ssim_per_frame,
            iters_at_dp: None,
            lambda_at_dp: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rre_examples() {
        assert_eq!(rre(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(rre(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(rre(&[3.0, 0.0], &[3.0, 4.0]).unwrap(), 0.8);
        assert!(rre(&[1.0], &[0.0]).is_err());
        assert!(rre(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn ssim_identical_and_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a: Vec<f64> = (0..20 * 13).map(|_| rng.random_range(0.0..1.0)).collect();
        assert_eq!(ssim(&a, &a, 20, 13, 1.0).unwrap(), 1.0);
        let c = vec![0.3; 64];
        assert_eq!(ssim(&c, &c, 8, 8, 1.0).unwrap(), 1.0);
    }

    /// `b = 2m − a` flips the local covariance sign wherever the ramp has texture.
    #[test]
    fn negated_ramp_is_negative() {
        let n = 16;
        let a: Vec<f64> = (0..n * n).map(|k| (k % n + k / n) as f64 / 30.0).collect();
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        let b: Vec<f64> = a.iter().map(|v| 2.0 * mean - v).collect();
        let s = ssim(&a, &b, n, n, 1.0).unwrap();
        assert!(s < 0.0, "{s}");
        assert!(s >= -1.0);
    }

    #[test]
    fn ssim_dimension_mismatch() {
        assert!(ssim(&[0.0; 4], &[0.0; 5], 2, 2, 1.0).is_err());
        assert!(ssim(&[0.0; 4], &[0.0; 4], 2, 2, 0.0).is_err());
    }

    #[test]
    fn report_per_frame() {
        let truth: Vec<f64> = (0..32).map(|k| (k % 5) as f64).collect();
        let mut u = truth.clone();
        u[20] += 1.0;
        let r = QualityReport::compute(&u, &truth, [4, 4, 2]).unwrap();
        assert_eq!(r.rre_per_frame[0], 0.0);
        assert!(r.rre_per_frame[1] > 0.0);
        assert_eq!(r.ssim_per_frame[0], 1.0);
        assert!(r.ssim_per_frame[1] < 1.0);
    }

    proptest! {
        #[test]
        fn rre_of_scaled_truth(c in -3.0f64..3.0, seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u: Vec<f64> = t.iter().map(|v| c * v).collect();
            prop_assert!((rre(&u, &t).unwrap() - (c - 1.0).abs()).abs() < 1e-14);
        }

        #[test]
        fn ssim_symmetric_and_bounded(seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<f64> = (0..144).map(|_| rng.random_range(0.0..1.0)).collect();
            let b: Vec<f64> = (0..144).map(|_| rng.random_range(0.0..1.0)).collect();
            let ab = ssim(&a, &b, 12, 12, 1.0).unwrap();
            let ba = ssim(&b, &a, 12, 12, 1.0).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert!((-1.0..1.0).contains(&ab));
        }
    }
}
