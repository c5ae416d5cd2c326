//! Dense N-way tensors and the two matricization families.
//!
//! Storage is a flat `Vec<f64>` with the first index varying fastest, which is
//! also nalgebra's column-major layout. That makes the mode-0 unfolding a pure
//! reshape, and every other unfolding an axis permutation followed by one.
//!
//! Modes are zero-based throughout the crate.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// A real, finite, dense tensor stored first-index-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Selects one of the two unfolding operator families.
///
/// `Gamma(n)` keeps the remaining modes in natural order, `Delta(n)` orders them
/// cyclically starting at `n + 1`. In both cases the first listed column mode
/// varies fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatricizationKind {
    Gamma(usize),
    Delta(usize),
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "order must be at least 1".into(),
        });
    }
    if shape.contains(&0) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "all extents must be positive".into(),
        });
    }
    Ok(shape.iter().product())
}

impl DenseTensor {
    /// Builds a tensor from canonical-order data, rejecting bad shapes and
    /// non-finite entries.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected = check_shape(&shape)?;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                shape,
                len: data.len(),
                expected,
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::filled(shape, 0.0)
    }

    pub fn filled(shape: &[usize], value: f64) -> Result<Self> {
        let len = check_shape(shape)?;
        if !value.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![value; len],
        })
    }

    /// Fills a tensor by evaluating `f` at every multi-index in canonical order.
    pub fn from_fn<F>(shape: &[usize], mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> f64,
    {
        let len = check_shape(shape)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, shape);
        }
        Self::new(shape.to_vec(), data)
    }

    /// Draws i.i.d. normal entries from a seeded ChaCha stream.
    pub fn random_normal(shape: &[usize], mean: f64, stddev: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_normal_with(shape, mean, stddev, &mut rng)
    }

    pub fn random_normal_with<R: Rng + ?Sized>(
        shape: &[usize],
        mean: f64,
        stddev: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let len = check_shape(shape)?;
        let dist = Normal::new(mean, stddev).map_err(|e| Error::InvalidShape {
            shape: shape.to_vec(),
            reason: format!("bad normal parameters: {e}"),
        })?;
        let data = (0..len).map(|_| dist.sample(rng)).collect();
        Self::new(shape.to_vec(), data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Strides of the canonical layout.
    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    pub fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.shape.len() || idx.iter().zip(&self.shape).any(|(i, n)| i >= n) {
            return Err(Error::IndexOutOfRange {
                index: idx.to_vec(),
                shape: self.shape.clone(),
            });
        }
        Ok(idx
            .iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum())
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.data[self.linear_index(idx)?])
    }

    /// Applies `f` elementwise. The result must stay finite.
    pub fn map<F: FnMut(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.shape.clone(), self.data.iter().copied().map(f).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    /// Elementwise product of two equally shaped tensors.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        self.ensure_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    /// Reinterprets the canonical data under a new shape with the same size.
    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        if len != self.data.len() {
            return Err(Error::LengthMismatch {
                shape: shape.to_vec(),
                len: self.data.len(),
                expected: len,
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data: self.data.clone(),
        })
    }

    /// Axis permutation: output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let order = self.order();
        let mut seen = vec![false; order];
        if perm.len() != order {
            return Err(Error::InvalidShape {
                shape: self.shape.clone(),
                reason: format!("permutation {perm:?} has wrong length"),
            });
        }
        for &p in perm {
            if p >= order || seen[p] {
                return Err(Error::InvalidShape {
                    shape: self.shape.clone(),
                    reason: format!("{perm:?} is not a permutation"),
                });
            }
            seen[p] = true;
        }
        Ok(self.permute_unchecked(perm))
    }

    fn permute_unchecked(&self, perm: &[usize]) -> Self {
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return self.clone();
        }
        let in_strides = self.strides();
        let out_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let src_strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; perm.len()];
        let mut offset = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[offset]);
            // odometer step with incremental source offset
            for k in 0..idx.len() {
                idx[k] += 1;
                offset += src_strides[k];
                if idx[k] < out_shape[k] {
                    break;
                }
                offset -= src_strides[k] * out_shape[k];
                idx[k] = 0;
            }
        }
        Self {
            shape: out_shape,
            data,
        }
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode: n,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// Mode-`n` unfolding with the other modes in natural order.
    pub fn gamma_unfold(&self, n: usize) -> Result<Matrix> {
        self.check_mode(n)?;
        Ok(self.unfold_with(&gamma_perm(self.order(), n)))
    }

    /// Mode-`n` unfolding with the other modes in cyclic order from `n + 1`.
    pub fn delta_unfold(&self, n: usize) -> Result<Matrix> {
        self.check_mode(n)?;
        Ok(self.unfold_with(&delta_perm(self.order(), n)))
    }

    pub fn unfold(&self, kind: MatricizationKind) -> Result<Matrix> {
        match kind {
            MatricizationKind::Gamma(n) => self.gamma_unfold(n),
            MatricizationKind::Delta(n) => self.delta_unfold(n),
        }
    }

    fn unfold_with(&self, perm: &[usize]) -> Matrix {
        let rows = self.shape[perm[0]];
        let cols = self.data.len() / rows;
        let permuted = self.permute_unchecked(perm);
        Matrix::from_vec(rows, cols, permuted.data)
    }

    /// Flattens the tensor into a column vector in canonical order.
    pub fn to_vector(&self) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_column_slice(&self.data)
    }
}

/// Inverse of [`DenseTensor::gamma_unfold`].
pub fn gamma_fold(m: &Matrix, n: usize, shape: &[usize]) -> Result<DenseTensor> {
    fold_with(m, shape, MatricizationKind::Gamma(n))
}

/// Inverse of [`DenseTensor::delta_unfold`].
pub fn delta_fold(m: &Matrix, n: usize, shape: &[usize]) -> Result<DenseTensor> {
    fold_with(m, shape, MatricizationKind::Delta(n))
}

pub fn fold(m: &Matrix, kind: MatricizationKind, shape: &[usize]) -> Result<DenseTensor> {
    fold_with(m, shape, kind)
}

fn fold_with(m: &Matrix, shape: &[usize], kind: MatricizationKind) -> Result<DenseTensor> {
    let len = check_shape(shape)?;
    let order = shape.len();
    let (n, perm) = match kind {
        MatricizationKind::Gamma(n) => (n, gamma_perm(order, n.min(order - 1))),
        MatricizationKind::Delta(n) => (n, delta_perm(order, n.min(order - 1))),
    };
    if n >= order {
        return Err(Error::ModeOutOfRange { mode: n, order });
    }
    if m.nrows() != shape[n] || m.nrows() * m.ncols() != len {
        return Err(Error::DimensionMismatch {
            rows: m.nrows(),
            cols: m.ncols(),
            shape: shape.to_vec(),
            kind: format!("{kind:?}"),
        });
    }
    let permuted_shape: Vec<usize> = perm.iter().map(|&p| shape[p]).collect();
    let permuted = DenseTensor::new(permuted_shape, m.as_slice().to_vec())?;
    let mut inverse = vec![0usize; order];
    for (k, &p) in perm.iter().enumerate() {
        inverse[p] = k;
    }
    Ok(permuted.permute_unchecked(&inverse))
}

fn gamma_perm(order: usize, n: usize) -> Vec<usize> {
    std::iter::once(n)
        .chain((0..order).filter(|&k| k != n))
        .collect()
}

fn delta_perm(order: usize, n: usize) -> Vec<usize> {
    (0..order).map(|k| (n + k) % order).collect()
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = Vec::with_capacity(shape.len());
    let mut acc = 1;
    for &n in shape {
        strides.push(acc);
        acc *= n;
    }
    strides
}

/// Steps a multi-index in canonical (first-fastest) order, wrapping at the end.
pub fn advance(idx: &mut [usize], shape: &[usize]) {
    for (i, &n) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < n {
            return;
        }
        *i = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(shape: &[usize]) -> DenseTensor {
        let len = shape.iter().product::<usize>();
        DenseTensor::new(shape.to_vec(), (0..len).map(|v| v as f64).collect()).unwrap()
    }

    /// Brute-force oracle: explicit index enumeration, column index built from
    /// the listed column modes with the first one varying fastest.
    fn brute_unfold(t: &DenseTensor, row_mode: usize, col_modes: &[usize]) -> Matrix {
        let shape = t.shape();
        let cols: usize = col_modes.iter().map(|&k| shape[k]).product();
        let mut m = Matrix::zeros(shape[row_mode], cols);
        let mut idx = vec![0; shape.len()];
        for _ in 0..t.len() {
            let mut col = 0;
            let mut stride = 1;
            for &k in col_modes {
                col += idx[k] * stride;
                stride *= shape[k];
            }
            m[(idx[row_mode], col)] = t.get(&idx).unwrap();
            advance(&mut idx, shape);
        }
        m
    }

    #[test]
    fn gamma_unfold_small_case() {
        let t = seq(&[2, 2, 2]);
        let m = t.gamma_unfold(0).unwrap();
        let expected = Matrix::from_row_slice(2, 4, &[0., 2., 4., 6., 1., 3., 5., 7.]);
        assert_eq!(m, expected);
    }

    #[test]
    fn delta_unfold_small_case() {
        // rows i2, columns (i3, i1) with i3 fastest
        let t = seq(&[2, 2, 2]);
        let m = t.delta_unfold(1).unwrap();
        let expected = Matrix::from_row_slice(2, 4, &[0., 4., 1., 5., 2., 6., 3., 7.]);
        assert_eq!(m, expected);
        assert_eq!(m, brute_unfold(&t, 1, &[2, 0]));
    }

    #[test]
    fn order_one_unfold_is_data() {
        let t = seq(&[5]);
        let m = t.gamma_unfold(0).unwrap();
        assert_eq!(m.shape(), (5, 1));
        assert_eq!(m.as_slice(), t.data());
        assert_eq!(t.delta_unfold(0).unwrap(), m);
    }

    #[test]
    fn unfoldings_match_brute_force() {
        let shape = [3, 2, 4, 2];
        let t = DenseTensor::random_normal(&shape, 0.0, 1.0, 3).unwrap();
        for n in 0..4 {
            let natural: Vec<usize> = (0..4).filter(|&k| k != n).collect();
            let cyclic: Vec<usize> = (1..4).map(|k| (n + k) % 4).collect();
            assert_eq!(t.gamma_unfold(n).unwrap(), brute_unfold(&t, n, &natural));
            assert_eq!(t.delta_unfold(n).unwrap(), brute_unfold(&t, n, &cyclic));
        }
    }

    #[test]
    fn delta_and_gamma_agree_on_first_mode() {
        let t = DenseTensor::random_normal(&[3, 4, 2, 5], 0.0, 1.0, 9).unwrap();
        assert_eq!(t.delta_unfold(0).unwrap(), t.gamma_unfold(0).unwrap());
    }

    #[test]
    fn mode_out_of_range() {
        let t = seq(&[2, 3]);
        assert!(matches!(
            t.gamma_unfold(2),
            Err(Error::ModeOutOfRange { mode: 2, order: 2 })
        ));
        assert!(t.delta_unfold(7).is_err());
    }

    #[test]
    fn fold_rejects_wrong_columns() {
        let m = Matrix::zeros(2, 5);
        assert!(matches!(
            gamma_fold(&m, 0, &[2, 2, 2]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(delta_fold(&m, 1, &[2, 2, 2]).is_err());
        assert!(gamma_fold(&Matrix::zeros(2, 4), 3, &[2, 2, 2]).is_err());
    }

    #[test]
    fn unfold_of_fold_is_identity() {
        let shape = [2, 3, 4];
        for n in 0..3 {
            let cols = 24 / shape[n];
            let m = Matrix::from_fn(shape[n], cols, |r, c| (r * 31 + c * 7) as f64 * 0.5 - 3.0);
            let g = gamma_fold(&m, n, &shape).unwrap();
            assert_eq!(g.gamma_unfold(n).unwrap(), m);
            let d = delta_fold(&m, n, &shape).unwrap();
            assert_eq!(d.delta_unfold(n).unwrap(), m);
        }
    }

    #[test]
    fn hadamard_identities() {
        let a = DenseTensor::random_normal(&[3, 4, 2], 0.0, 1.0, 1).unwrap();
        let b = DenseTensor::random_normal(&[3, 4, 2], 0.0, 1.0, 2).unwrap();
        let ones = DenseTensor::filled(&[3, 4, 2], 1.0).unwrap();
        let zeros = DenseTensor::zeros(&[3, 4, 2]).unwrap();
        assert_eq!(a.hadamard(&ones).unwrap(), a);
        assert_eq!(a.hadamard(&zeros).unwrap(), zeros);

        let prod = a.hadamard(&b).unwrap();
        let mut idx = vec![0; 3];
        for _ in 0..a.len() {
            let want = a.get(&idx).unwrap() * b.get(&idx).unwrap();
            assert_eq!(prod.get(&idx).unwrap(), want);
            advance(&mut idx, &[3, 4, 2]);
        }
        let c = DenseTensor::zeros(&[3, 4, 3]).unwrap();
        assert!(matches!(a.hadamard(&c), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn norms() {
        assert_eq!(DenseTensor::zeros(&[4, 4]).unwrap().frobenius_norm(), 0.0);
        let one_hot = DenseTensor::from_fn(&[3, 3, 3], |i| if i == [1, 2, 0] { -2.5 } else { 0.0 })
            .unwrap();
        assert_eq!(one_hot.frobenius_norm(), 2.5);
        let a = DenseTensor::zeros(&[2, 2]).unwrap();
        let b = DenseTensor::zeros(&[4]).unwrap();
        assert!(a.inner_product(&b).is_err());
    }

    #[test]
    fn random_normal_contract() {
        let c = DenseTensor::random_normal(&[4, 5], 1.5, 0.0, 11).unwrap();
        assert!(c.data().iter().all(|&v| v == 1.5));
        let a = DenseTensor::random_normal(&[3, 7], 0.0, 1.0, 42).unwrap();
        let b = DenseTensor::random_normal(&[3, 7], 0.0, 1.0, 42).unwrap();
        assert_eq!(a, b);

        // sample mean has std 1/sqrt(1e5) ~ 0.0032, sample std ~ 0.0022
        let t = DenseTensor::random_normal(&[100, 1000], 0.0, 1.0, 5).unwrap();
        let n = t.len() as f64;
        let mean = t.data().iter().sum::<f64>() / n;
        let var = t.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 0.02, "std {}", var.sqrt());
    }

    #[test]
    fn constructor_validation() {
        assert!(DenseTensor::new(vec![], vec![]).is_err());
        assert!(DenseTensor::new(vec![2, 0], vec![]).is_err());
        assert!(matches!(
            DenseTensor::new(vec![2, 2], vec![0.0; 3]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            DenseTensor::new(vec![2], vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(seq(&[2, 3]).get(&[2, 0]).is_err());
    }

    #[test]
    fn reshape_and_permute() {
        let t = seq(&[2, 3, 4]);
        let r = t.reshape(&[6, 4]).unwrap();
        assert_eq!(r.data(), t.data());
        assert!(t.reshape(&[5, 5]).is_err());
        let p = t.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.shape(), &[4, 2, 3]);
        assert_eq!(p.get(&[3, 1, 2]).unwrap(), t.get(&[1, 2, 3]).unwrap());
        assert!(t.permute(&[0, 0, 1]).is_err());
    }
}
