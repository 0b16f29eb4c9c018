//! Synthetic piecewise-constant moving scenes and exact-level Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::operators::Tensor3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectShape {
    Disk,
    /// Axis-aligned rectangle with half-height `radius` and half-width
    /// `aspect · radius`.
    Rectangle { aspect: f64 },
}

/// Position and size of an object at one time step, in pixel units; pixel
/// `(i, j)` has its centre at `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// `(vertical, horizontal)`
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub shape: ObjectShape,
    pub intensity: f64,
    /// One placement per time step.
    pub trajectory: Vec<Placement>,
}

impl SceneObject {
    /// Object moving with constant velocity (pixels per step).
    pub fn linear(
        shape: ObjectShape,
        intensity: f64,
        start: [f64; 2],
        velocity: [f64; 2],
        radius: f64,
        n_t: usize,
    ) -> Self {
        let trajectory = (0..n_t)
            .map(|t| Placement {
                center: [
                    start[0] + velocity[0] * t as f64,
                    start[1] + velocity[1] * t as f64,
                ],
                radius,
            })
            .collect();
        Self {
            shape,
            intensity,
            trajectory,
        }
    }

    fn covers(&self, p: &Placement, y: f64, x: f64) -> bool {
        let (dy, dx) = (y - p.center[0], x - p.center[1]);
        match self.shape {
            ObjectShape::Disk => dy * dy + dx * dx <= p.radius * p.radius,
            ObjectShape::Rectangle { aspect } => {
                dy.abs() <= p.radius && dx.abs() <= aspect * p.radius
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub n_v: usize,
    pub n_h: usize,
    pub n_t: usize,
    pub objects: Vec<SceneObject>,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_v == 0 || self.n_h == 0 || self.n_t == 0 {
            return Err(Error::InvalidDimension(format!(
                "scene extents must be positive, got {}×{}×{}",
                self.n_v, self.n_h, self.n_t
            )));
        }
        for (k, o) in self.objects.iter().enumerate() {
            if !o.intensity.is_finite() {
                return Err(Error::InvalidArgument(format!("object {k} has non-finite intensity")));
            }
            if o.trajectory.len() != self.n_t {
                return Err(Error::InvalidArgument(format!(
                    "object {k} has {} placements for {} time steps",
                    o.trajectory.len(),
                    self.n_t
                )));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.n_v, self.n_h, self.n_t]
    }

    /// Moving pieces for blur experiments: a static background disk with a
    /// sliding bar, a drifting bright disk and a dark rectangle moving down.
    pub fn deblur_phantom(n: usize, n_t: usize) -> Self {
        let s = n as f64 / 32.0;
        let c = n as f64 / 2.0;
        let objects = vec![
            SceneObject::linear(ObjectShape::Disk, 0.4, [c, c], [0.0, 0.0], 13.0 * s, n_t),
            SceneObject::linear(
                ObjectShape::Rectangle { aspect: 0.35 },
                0.5,
                [c - 2.0 * s, 9.0 * s],
                [0.0, 1.0 * s],
                6.0 * s,
                n_t,
            ),
            SceneObject::linear(
                ObjectShape::Disk,
                0.6,
                [10.0 * s, 19.0 * s],
                [0.75 * s, -0.5 * s],
                3.5 * s,
                n_t,
            ),
            SceneObject::linear(
                ObjectShape::Rectangle { aspect: 1.6 },
                -0.25,
                [18.0 * s, 17.0 * s],
                [0.5 * s, 0.0],
                2.5 * s,
                n_t,
            ),
        ];
        Self {
            n_v: n,
            n_h: n,
            n_t,
            objects,
        }
    }

    /// Superposition of six moving disks.
    pub fn six_disks(n: usize, n_t: usize) -> Self {
        let s = n as f64 / 32.0;
        let disk = |intensity, start: [f64; 2], velocity: [f64; 2], radius: f64| {
            SceneObject::linear(
                ObjectShape::Disk,
                intensity,
                [start[0] * s, start[1] * s],
                [velocity[0] * s, velocity[1] * s],
                radius * s,
                n_t,
            )
        };
        let objects = vec![
            disk(1.0, [9.0, 9.0], [0.5, 0.25], 4.0),
            disk(0.7, [22.0, 10.0], [-0.25, 0.5], 5.0),
            disk(0.5, [10.0, 22.0], [0.5, -0.25], 3.5),
            disk(0.8, [21.0, 22.0], [-0.5, -0.25], 3.0),
            disk(0.6, [16.0, 16.0], [0.0, 0.0], 2.5),
            disk(0.4, [5.5, 16.0], [0.25, 0.5], 2.0),
        ];
        Self {
            n_v: n,
            n_h: n,
            n_t,
            objects,
        }
    }
}

/// Rasterizes every frame; a pixel receives an object's intensity iff its
/// centre lies inside the object, and overlapping objects add up.
pub fn render_scene(spec: &SceneSpec) -> Result<Tensor3> {
    spec.validate()?;
    let mut out = vec![0.0; spec.n_v * spec.n_h * spec.n_t];
    for (t, frame) in out.chunks_mut(spec.n_v * spec.n_h).enumerate() {
        for o in &spec.objects {
            let p = &o.trajectory[t];
            for j in 0..spec.n_h {
                for i in 0..spec.n_v {
                    if o.covers(p, i as f64 + 0.5, j as f64 + 0.5) {
                        frame[i + spec.n_v * j] += o.intensity;
                    }
                }
            }
        }
    }
    Tensor3::from_vec(spec.dims(), out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Ratio `‖e‖_{Γ⁻¹} / ‖F u‖_{Γ⁻¹}`.
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyData {
    pub data: Vec<f64>,
    pub noise: Vec<f64>,
    /// `‖e‖_{Γ⁻¹}`
    pub delta: f64,
}

/// `‖v‖_{Γ⁻¹}` for diagonal `Γ`.
pub fn weighted_norm(v: &[f64], gamma_diag: &[f64]) -> f64 {
    v.iter().zip(gamma_diag).map(|(x, g)| x * x / g).sum::<f64>().sqrt()
}

/// Adds `e = Γ^{1/2} ξ`, `ξ ~ N(0, I)`, rescaled so that
/// `‖e‖_{Γ⁻¹} = sigma · ‖clean‖_{Γ⁻¹}` exactly.
pub fn add_noise(clean: &[f64], spec: &NoiseSpec, gamma_diag: &[f64]) -> Result<NoisyData> {
    check_len("noise covariance", clean.len(), gamma_diag.len())?;
    if !(spec.sigma >= 0.0 && spec.sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise level must be nonnegative, got {}",
            spec.sigma
        )));
    }
    if gamma_diag.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidArgument("noise covariance must be positive".into()));
    }
    if spec.sigma == 0.0 {
        return Ok(NoisyData {
            data: clean.to_vec(),
            noise: vec![0.0; clean.len()],
            delta: 0.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noise: Vec<f64> = gamma_diag
        .iter()
        .map(|g| {
            let xi: f64 = StandardNormal.sample(&mut rng);
            g.sqrt() * xi
        })
        .collect();
    let target = spec.sigma * weighted_norm(clean, gamma_diag);
    let current = weighted_norm(&noise, gamma_diag);
    let factor = target / current;
    for e in noise.iter_mut() {
        *e *= factor;
    }
    let data = clean.iter().zip(&noise).map(|(c, e)| c + e).collect();
    let delta = weighted_norm(&noise, gamma_diag);
    Ok(NoisyData { data, noise, delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_disk(velocity: [f64; 2]) -> SceneSpec {
        SceneSpec {
            n_v: 16,
            n_h: 16,
            n_t: 3,
            objects: vec![SceneObject::linear(ObjectShape::Disk, 2.0, [6.0, 6.0], velocity, 3.0, 3)],
        }
    }

    #[test]
    fn empty_scene_is_zero() {
        let spec = SceneSpec {
            n_v: 4,
            n_h: 5,
            n_t: 2,
            objects: vec![],
        };
        assert!(render_scene(&spec).unwrap().as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn static_disk_gives_identical_frames() {
        let u = render_scene(&one_disk([0.0, 0.0])).unwrap();
        assert_eq!(u.frontal_slice(0), u.frontal_slice(1));
        assert_eq!(u.frontal_slice(0), u.frontal_slice(2));
        assert!(u.as_slice().iter().any(|v| *v == 2.0));
    }

    #[test]
    fn moving_disk_shifts_one_pixel() {
        let u = render_scene(&one_disk([0.0, 1.0])).unwrap();
        for t in 0..2 {
            let (a, b) = (u.frontal_slice(t), u.frontal_slice(t + 1));
            for j in 1..15 {
                for i in 0..16 {
                    assert_eq!(b[(i, j)], a[(i, j - 1)]);
                }
            }
        }
    }

    #[test]
    fn overlaps_add() {
        let mut spec = one_disk([0.0, 0.0]);
        let mut other = spec.objects[0].clone();
        other.intensity = 0.5;
        spec.objects.push(other);
        let u = render_scene(&spec).unwrap();
        assert!(u.as_slice().iter().any(|v| *v == 2.5));
    }

    #[test]
    fn rectangle_extent() {
        let spec = SceneSpec {
            n_v: 8,
            n_h: 8,
            n_t: 1,
            objects: vec![SceneObject::linear(
                ObjectShape::Rectangle { aspect: 2.0 },
                1.0,
                [4.0, 4.0],
                [0.0, 0.0],
                1.0,
                1,
            )],
        };
        let u = render_scene(&spec).unwrap();
        // centres 3.5, 4.5 vertically and 2.5..5.5 horizontally
        assert_eq!(u.as_slice().iter().sum::<f64>(), 8.0);
        assert_eq!(u.get(3, 2, 0), 1.0);
        assert_eq!(u.get(2, 2, 0), 0.0);
    }

    #[test]
    fn invalid_trajectory_rejected() {
        let mut spec = one_disk([0.0, 0.0]);
        spec.objects[0].trajectory.pop();
        assert!(render_scene(&spec).is_err());
        spec.n_t = 0;
        assert!(render_scene(&spec).is_err());
    }

    #[test]
    fn presets_render() {
        for spec in [SceneSpec::deblur_phantom(32, 4), SceneSpec::six_disks(32, 8)] {
            let u = render_scene(&spec).unwrap();
            assert!(u.as_slice().iter().any(|v| *v != 0.0));
            assert!(u.as_slice().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn zero_noise_level() {
        let clean = vec![1.0, -2.0, 3.0];
        let out = add_noise(&clean, &NoiseSpec { sigma: 0.0, seed: 1 }, &[1.0; 3]).unwrap();
        assert_eq!(out.data, clean);
        assert_eq!(out.delta, 0.0);
    }

    #[test]
    fn exact_noise_ratio_and_determinism() {
        let clean: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        let gamma: Vec<f64> = (0..200).map(|i| 0.5 + (i % 7) as f64 * 0.25).collect();
        let spec = NoiseSpec { sigma: 0.01, seed: 42 };
        let a = add_noise(&clean, &spec, &gamma).unwrap();
        let ratio = a.delta / weighted_norm(&clean, &gamma);
        assert!((ratio - 0.01).abs() < 1e-12);
        let b = add_noise(&clean, &spec, &gamma).unwrap();
        assert_eq!(a, b);
        let c = add_noise(&clean, &NoiseSpec { sigma: 0.01, seed: 43 }, &gamma).unwrap();
        assert_ne!(a.data, c.data);
    }
}
