use nalgebra::DMatrix;

use super::LinearOperator;
use crate::error::{check_len, Error, Result};

/// Third-order tensor with extents `(n1, n2, n3)`, stored column-major so that
/// its data slice is exactly `vec` of the tensor. For an image sequence the
/// extents are `(n_v, n_h, n_t)` and each frontal slice is one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.iter().product()],
        }
    }

    pub fn from_vec(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        check_len("tensor data", dims.iter().product(), data.len())?;
        Ok(Self { dims, data })
    }

    /// Builds the tensor whose frontal slices are the given `n1 × n2` matrices.
    pub fn from_slices(slices: &[DMatrix<f64>]) -> Result<Self> {
        let Some(first) = slices.first() else {
            return Err(Error::InvalidDimension("no frontal slices".into()));
        };
        let (n1, n2) = first.shape();
        let mut data = Vec::with_capacity(n1 * n2 * slices.len());
        for s in slices {
            if s.shape() != (n1, n2) {
                return Err(Error::InvalidDimension(format!(
                    "slice of shape {:?}, expected {:?}",
                    s.shape(),
                    (n1, n2)
                )));
            }
            data.extend_from_slice(s.as_slice());
        }
        Ok(Self {
            dims: [n1, n2, slices.len()],
            data,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    pub fn frontal_slice(&self, k: usize) -> DMatrix<f64> {
        let len = self.dims[0] * self.dims[1];
        DMatrix::from_column_slice(self.dims[0], self.dims[1], &self.data[k * len..(k + 1) * len])
    }

    /// Mode-`mode` unfolding (1-based mode), with the remaining indices ordered
    /// so that the lower mode varies fastest along the columns.
    pub fn unfold(&self, mode: usize) -> Result<DMatrix<f64>> {
        let [n1, n2, n3] = self.dims;
        let m = match mode {
            1 => DMatrix::from_fn(n1, n2 * n3, |i, c| self.get(i, c % n2, c / n2)),
            2 => DMatrix::from_fn(n2, n1 * n3, |j, c| self.get(c % n1, j, c / n1)),
            3 => DMatrix::from_fn(n3, n1 * n2, |k, c| self.get(c % n1, c / n1, k)),
            _ => return Err(Error::InvalidArgument(format!("mode {mode} not in 1..=3"))),
        };
        Ok(m)
    }

    /// Entrywise ℓ_q norm.
    pub fn norm(&self, q: f64) -> f64 {
        if q == 1.0 {
            return self.data.iter().map(|v| v.abs()).sum();
        }
        self.data.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }

    /// `Y = X ×_mode M`, i.e. `Y_(mode) = M X_(mode)`: the operator is applied to
    /// every mode-`mode` fiber.
    pub fn mode_product(&self, m: &LinearOperator, mode: usize) -> Result<Tensor3> {
        if !(1..=3).contains(&mode) {
            return Err(Error::InvalidArgument(format!("mode {mode} not in 1..=3")));
        }
        let axis = mode - 1;
        check_len("mode product", self.dims[axis], m.cols())?;
        let mut out_dims = self.dims;
        out_dims[axis] = m.rows();
        let mut out = Tensor3::zeros(out_dims);

        let n_in = self.dims[axis];
        let n_out = m.rows();
        let stride_in: usize = self.dims[..axis].iter().product();
        let stride_out: usize = out_dims[..axis].iter().product();
        let inner = stride_in;
        let outer: usize = self.dims[axis + 1..].iter().product();

        let mut fiber = vec![0.0; n_in];
        let mut image = vec![0.0; n_out];
        for o in 0..outer {
            for a in 0..inner {
                let base_in = a + o * stride_in * n_in;
                for (t, f) in fiber.iter_mut().enumerate() {
                    *f = self.data[base_in + t * stride_in];
                }
                m.apply_into(&fiber, &mut image);
                let base_out = a + o * stride_out * n_out;
                for (t, v) in image.iter().enumerate() {
                    out.data[base_out + t * stride_out] = *v;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut ChaCha8Rng, dims: [usize; 3]) -> Tensor3 {
        let n = dims.iter().product();
        Tensor3::from_vec(dims, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn vectorization_matches_frame_columns() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = a.map(|v| -v);
        let t = Tensor3::from_slices(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(&t.as_slice()[..6], a.as_slice());
        assert_eq!(t.frontal_slice(1), b);
        // U = [vec(U1), vec(U2)] is the transposed mode-3 unfolding
        let u = t.unfold(3).unwrap().transpose();
        assert_eq!(u.column(0).as_slice(), a.as_slice());
        assert_eq!(u.column(1).as_slice(), b.as_slice());
    }

    #[test]
    fn vec_mat_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dims in [[1, 1, 1], [2, 3, 4], [5, 1, 2], [4, 4, 3]] {
            let t = random_tensor(&mut rng, dims);
            let slices: Vec<_> = (0..dims[2]).map(|k| t.frontal_slice(k)).collect();
            assert_eq!(Tensor3::from_slices(&slices).unwrap(), t);
        }
    }

    #[test]
    fn identity_mode_product_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_tensor(&mut rng, [3, 4, 2]);
        assert_eq!(t.mode_product(&LinearOperator::identity(3), 1).unwrap(), t);
    }

    #[test]
    fn mode_product_matches_unfolding_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_tensor(&mut rng, [3, 4, 5]);
        for mode in 1..=3 {
            let n = t.dims()[mode - 1];
            let m = DMatrix::from_fn(2, n, |_, _| rng.random_range(-1.0..1.0));
            let y = t.mode_product(&LinearOperator::dense(m.clone()), mode).unwrap();
            let expected = &m * t.unfold(mode).unwrap();
            assert!((y.unfold(mode).unwrap() - expected).amax() < 1e-12);
        }
    }

    #[test]
    fn all_mode_products_equal_kronecker_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = random_tensor(&mut rng, [3, 3, 2]);
        let lv = LinearOperator::diff(3, 1.0, false).unwrap();
        let lh = LinearOperator::diff(3, 1.0, true).unwrap();
        let lt = LinearOperator::diff(2, 1.0, false).unwrap();
        let y = t
            .mode_product(&lv, 1)
            .and_then(|y| y.mode_product(&lh, 2))
            .and_then(|y| y.mode_product(&lt, 3))
            .unwrap();
        // dense Kronecker oracle for L_t ⊗ L_h ⊗ L_v
        let k = lt
            .to_dense()
            .unwrap()
            .kronecker(&lh.to_dense().unwrap())
            .kronecker(&lv.to_dense().unwrap());
        let expected = k * nalgebra::DVector::from_column_slice(t.as_slice());
        assert_eq!(y.dims(), [2, 3, 1]);
        for (a, b) in y.as_slice().iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn distinct_mode_products_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = random_tensor(&mut rng, [4, 3, 2]);
        let a = LinearOperator::dense(DMatrix::from_fn(5, 4, |_, _| rng.random_range(-1.0..1.0)));
        let b = LinearOperator::diff(3, 1.0, false).unwrap();
        let ab = t.mode_product(&a, 1).unwrap().mode_product(&b, 2).unwrap();
        let ba = t.mode_product(&b, 2).unwrap().mode_product(&a, 1).unwrap();
        for (x, y) in ab.as_slice().iter().zip(ba.as_slice()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_product_errors() {
        let t = Tensor3::zeros([2, 2, 2]);
        assert!(t.mode_product(&LinearOperator::identity(2), 4).is_err());
        assert!(t.mode_product(&LinearOperator::identity(3), 1).is_err());
    }
}
