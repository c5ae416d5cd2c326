//! Tensor-ring format.
//!
//! Core `n` has shape `(R_n, I_n, R_{n+1})` with the ring closed by
//! `R_{N+1} = R_1`. An entry of the represented tensor is the trace of the
//! product of the mode-1 slices `G_1(i_1) ... G_N(i_N)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Matrix};

/// Bond dimensions `(R_1, ..., R_N)` of a tensor ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrRank(Vec<usize>);

impl TrRank {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        if ranks.len() < 2 {
            return Err(Error::InvalidCores(format!(
                "a ring needs at least two cores, got ranks {ranks:?}"
            )));
        }
        if ranks.contains(&0) {
            return Err(Error::InvalidCores(format!("zero rank in {ranks:?}")));
        }
        Ok(Self(ranks))
    }

    pub fn uniform(order: usize, rank: usize) -> Result<Self> {
        Self::new(vec![rank; order])
    }

    pub fn ranks(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of square roots of the ranks.
    pub fn ssr(&self) -> f64 {
        self.0.iter().map(|&r| (r as f64).sqrt()).sum()
    }

    /// Shape of core `n` for a tensor of the given extents.
    pub fn core_shape(&self, n: usize, extents: &[usize]) -> [usize; 3] {
        let next = (n + 1) % self.0.len();
        [self.0[n], extents[n], self.0[next]]
    }
}

/// An ordered ring of order-3 cores.
#[derive(Debug, Clone, PartialEq)]
pub struct TrCores {
    cores: Vec<DenseTensor>,
}

impl TrCores {
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        if cores.len() < 2 {
            return Err(Error::InvalidCores(format!(
                "need at least two cores, got {}",
                cores.len()
            )));
        }
        for (n, core) in cores.iter().enumerate() {
            if core.order() != 3 {
                return Err(Error::InvalidCores(format!(
                    "core {n} has order {}, expected 3",
                    core.order()
                )));
            }
            let next = &cores[(n + 1) % cores.len()];
            if core.shape()[2] != next.shape()[0] {
                return Err(Error::InvalidCores(format!(
                    "core {n} trailing rank {} does not match core {} leading rank {}",
                    core.shape()[2],
                    (n + 1) % cores.len(),
                    next.shape()[0]
                )));
            }
        }
        Ok(Self { cores })
    }

    /// I.i.d. normal cores for the given tensor extents and ring ranks.
    pub fn random(
        extents: &[usize],
        ranks: &TrRank,
        mean: f64,
        stddev: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(extents, ranks, mean, stddev, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(
        extents: &[usize],
        ranks: &TrRank,
        mean: f64,
        stddev: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if extents.len() != ranks.len() {
            return Err(Error::RankOrderMismatch {
                ranks: ranks.len(),
                order: extents.len(),
            });
        }
        let cores = (0..extents.len())
            .map(|n| {
                DenseTensor::random_normal_with(&ranks.core_shape(n, extents), mean, stddev, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn zeros(extents: &[usize], ranks: &TrRank) -> Result<Self> {
        if extents.len() != ranks.len() {
            return Err(Error::RankOrderMismatch {
                ranks: ranks.len(),
                order: extents.len(),
            });
        }
        let cores = (0..extents.len())
            .map(|n| DenseTensor::zeros(&ranks.core_shape(n, extents)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    pub fn into_cores(self) -> Vec<DenseTensor> {
        self.cores
    }

    pub fn core(&self, n: usize) -> &DenseTensor {
        &self.cores[n]
    }

    /// Swaps in a new core `n` of identical shape.
    pub fn set_core(&mut self, n: usize, core: DenseTensor) -> Result<()> {
        self.check_mode(n)?;
        self.cores[n].ensure_same_shape(&core)?;
        self.cores[n] = core;
        Ok(())
    }

    /// Extents `(I_1, ..., I_N)` of the represented tensor.
    pub fn extents(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    pub fn ranks(&self) -> TrRank {
        TrRank(self.cores.iter().map(|c| c.shape()[0]).collect())
    }

    /// Rotates the ring so that core `k` comes first.
    pub fn rotate(&self, k: usize) -> Self {
        let n = self.order();
        Self {
            cores: (0..n).map(|j| self.cores[(j + k) % n].clone()).collect(),
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

    /// The `R_n x R_{n+1}` slice `G_n(:, i, :)`.
    pub fn slice(&self, n: usize, i: usize) -> Matrix {
        let core = &self.cores[n];
        let [r0, len, r1] = [core.shape()[0], core.shape()[1], core.shape()[2]];
        let data = core.data();
        Matrix::from_fn(r0, r1, |a, b| data[a + r0 * (i + len * b)])
    }

    /// Single entry via the trace of the slice product.
    pub fn element(&self, idx: &[usize]) -> Result<f64> {
        let extents = self.extents();
        if idx.len() != extents.len() || idx.iter().zip(&extents).any(|(i, e)| i >= e) {
            return Err(Error::IndexOutOfRange {
                index: idx.to_vec(),
                shape: extents,
            });
        }
        let mut acc = self.slice(0, idx[0]);
        for (n, &i) in idx.iter().enumerate().skip(1) {
            acc = acc * self.slice(n, i);
        }
        Ok(acc.trace())
    }

    /// Merges cores `start, start+1, ...` (cyclically) `count` times.
    fn merge_run(&self, start: usize, count: usize) -> DenseTensor {
        let n = self.order();
        let mut acc = self.cores[start % n].clone();
        for k in 1..count {
            acc = merge_pair(&acc, &self.cores[(start + k) % n]);
        }
        acc
    }

    /// Subchain obtained by merging every core except `n`, in ring order
    /// starting at `n + 1`. Shape `(R_{n+1}, prod_{j != n} I_j, R_n)`, merged
    /// index cyclic from `n + 1` with the first index varying fastest.
    pub fn subchain(&self, n: usize) -> Result<DenseTensor> {
        self.check_mode(n)?;
        Ok(self.merge_run(n + 1, self.order() - 1))
    }

    /// Dense tensor represented by the ring, by chain contraction followed by
    /// one trace over the closing bond.
    pub fn reconstruct(&self) -> DenseTensor {
        let chain = self.merge_run(0, self.order());
        let r = chain.shape()[0];
        let len = chain.shape()[1];
        let data = chain.data();
        let out = (0..len)
            .map(|j| (0..r).map(|a| data[a + r * (j + len * a)]).sum())
            .collect();
        DenseTensor::new(self.extents(), out).expect("finite cores give finite contraction")
    }

    /// `Δ_2(G_{≠n})`, the `prod_{j != n} I_j  x  R_n R_{n+1}` matrix that links
    /// core `n` to the delta unfolding of the full tensor.
    pub fn subchain_unfolding(&self, n: usize) -> Result<Matrix> {
        self.subchain(n)?.delta_unfold(1)
    }
}

/// Contracts `(Ra, J, Rb) x (Rb, K, Rc) -> (Ra, J*K, Rc)` with the left
/// merged index varying fastest.
fn merge_pair(left: &DenseTensor, right: &DenseTensor) -> DenseTensor {
    let [ra, j, rb] = [left.shape()[0], left.shape()[1], left.shape()[2]];
    let [rb2, k, rc] = [right.shape()[0], right.shape()[1], right.shape()[2]];
    debug_assert_eq!(rb, rb2);
    // Column-major reshapes of the canonical data; the product's layout is
    // already the canonical layout of the merged tensor.
    let a = DMatrix::from_column_slice(ra * j, rb, left.data());
    let b = DMatrix::from_column_slice(rb2, k * rc, right.data());
    let p = a * b;
    DenseTensor::new(vec![ra, j * k, rc], p.data.into())
        .expect("finite cores give finite contraction")
}

/// `‖Δ_n(X) − Γ_2(G_n) Δ_2(G_{≠n})ᵀ‖_F`
pub fn eq2_residual(cores: &TrCores, x: &DenseTensor, n: usize) -> Result<f64> {
    let lhs = x.delta_unfold(n)?;
    let rhs = cores.core(n).gamma_unfold(1)? * cores.subchain_unfolding(n)?.transpose();
    if lhs.shape() != rhs.shape() {
        return Err(Error::ShapeMismatch {
            left: vec![lhs.nrows(), lhs.ncols()],
            right: vec![rhs.nrows(), rhs.ncols()],
        });
    }
    Ok((lhs - rhs).norm())
}

/// Relative threshold for numerical rank.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Checks `rank(Δ_n(X)) <= Σ_i rank(Γ_i(G_n))` at [`RANK_REL_TOL`].
pub fn rank_inequality_check(cores: &TrCores, x: &DenseTensor, n: usize) -> Result<bool> {
    let lhs = numerical_rank(&x.delta_unfold(n)?, RANK_REL_TOL);
    let core = cores.core(n);
    let mut rhs = 0;
    for i in 0..3 {
        rhs += numerical_rank(&core.gamma_unfold(i)?, RANK_REL_TOL);
    }
    Ok(lhs <= rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::advance;

    fn random_ring(extents: &[usize], ranks: &[usize], seed: u64) -> TrCores {
        TrCores::random(extents, &TrRank::new(ranks.to_vec()).unwrap(), 0.0, 1.0, seed).unwrap()
    }

    #[test]
    fn rank_compatibility_enforced() {
        let a = DenseTensor::zeros(&[2, 3, 4]).unwrap();
        let b = DenseTensor::zeros(&[3, 3, 2]).unwrap();
        assert!(matches!(
            TrCores::new(vec![a.clone(), b]),
            Err(Error::InvalidCores(_))
        ));
        assert!(TrCores::new(vec![a]).is_err());
        assert!(TrRank::new(vec![2, 0, 1]).is_err());
        assert!(TrRank::new(vec![2]).is_err());
    }

    #[test]
    fn ssr_from_ranks() {
        let r = TrRank::new(vec![4, 5, 4, 5]).unwrap();
        assert!((r.ssr() - (4.0 + 2.0 * 5f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn rank_one_element_is_product() {
        let ring = random_ring(&[3, 4, 2], &[1, 1, 1], 2);
        let x = ring.reconstruct();
        let mut idx = vec![0; 3];
        for _ in 0..x.len() {
            let want: f64 = (0..3).map(|n| ring.core(n).data()[idx[n]]).product();
            assert!((ring.element(&idx).unwrap() - want).abs() < 1e-14);
            assert!((x.get(&idx).unwrap() - want).abs() < 1e-14);
            advance(&mut idx, &[3, 4, 2]);
        }
    }

    #[test]
    fn order_two_rank_one_is_outer_product() {
        let u = DenseTensor::new(vec![1, 3, 1], vec![1.0, 2.0, 3.0]).unwrap();
        let v = DenseTensor::new(vec![1, 2, 1], vec![-1.0, 0.5]).unwrap();
        let ring = TrCores::new(vec![u, v]).unwrap();
        let x = ring.reconstruct();
        assert_eq!(x.data(), &[-1.0, -2.0, -3.0, 0.5, 1.0, 1.5]);
        assert_eq!(eq2_residual(&ring, &x, 0).unwrap(), 0.0);
        assert_eq!(eq2_residual(&ring, &x, 1).unwrap(), 0.0);
    }

    #[test]
    fn one_hot_from_single_slice_chain() {
        // Only slice i_n = target[n] is nonzero (identity), so only one entry survives.
        let extents = [3, 2, 4];
        let target = [2, 0, 1];
        let cores = (0..3)
            .map(|n| {
                DenseTensor::from_fn(&[2, extents[n], 2], |i| {
                    if i[1] == target[n] && i[0] == i[2] {
                        1.0
                    } else {
                        0.0
                    }
                })
                .unwrap()
            })
            .collect();
        let x = TrCores::new(cores).unwrap().reconstruct();
        let mut idx = vec![0; 3];
        for _ in 0..x.len() {
            let want = if idx == target { 2.0 } else { 0.0 };
            assert_eq!(x.get(&idx).unwrap(), want);
            advance(&mut idx, &extents);
        }
    }

    #[test]
    fn reconstruct_matches_elementwise_trace() {
        let ring = random_ring(&[6, 6, 6, 6], &[3, 3, 3, 3], 7);
        let x = ring.reconstruct();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut oracle_sq = 0.0;
        let mut idx = vec![0; 4];
        for _ in 0..x.len() {
            oracle_sq += ring.element(&idx).unwrap().powi(2);
            advance(&mut idx, &[6, 6, 6, 6]);
        }
        for _ in 0..1000 {
            let idx: Vec<usize> = (0..4).map(|_| rng.random_range(0..6)).collect();
            let e = ring.element(&idx).unwrap();
            assert!((x.get(&idx).unwrap() - e).abs() < 1e-10 * (1.0 + e.abs()));
        }
        let norm = x.frobenius_norm();
        assert!((norm - oracle_sq.sqrt()).abs() < 1e-10 * norm);
    }

    #[test]
    fn order_two_subchain_is_other_core() {
        let ring = random_ring(&[3, 4], &[2, 3], 5);
        assert_eq!(&ring.subchain(0).unwrap(), ring.core(1));
        assert_eq!(&ring.subchain(1).unwrap(), ring.core(0));
    }

    #[test]
    fn subchain_slices_are_slice_products() {
        let extents = [2, 3, 2, 3];
        let ring = random_ring(&extents, &[2, 3, 1, 2], 8);
        for n in 0..4 {
            let sub = ring.subchain(n).unwrap();
            let others: Vec<usize> = (1..4).map(|k| (n + k) % 4).collect();
            let other_ext: Vec<usize> = others.iter().map(|&k| extents[k]).collect();
            let merged: usize = other_ext.iter().product();
            assert_eq!(
                sub.shape(),
                &[ring.core((n + 1) % 4).shape()[0], merged, ring.core(n).shape()[0]]
            );
            let mut local = vec![0; 3];
            for j in 0..merged {
                let mut prod = ring.slice(others[0], local[0]);
                for k in 1..3 {
                    prod *= ring.slice(others[k], local[k]);
                }
                for a in 0..prod.nrows() {
                    for b in 0..prod.ncols() {
                        let got = sub.get(&[a, j, b]).unwrap();
                        assert!((got - prod[(a, b)]).abs() < 1e-12);
                    }
                }
                advance(&mut local, &other_ext);
            }
        }
    }

    #[test]
    fn eq2_identity_and_its_breakage() {
        let ring = random_ring(&[3, 4, 2, 3], &[2, 3, 2, 4], 21);
        let x = ring.reconstruct();
        for n in 0..4 {
            assert!(eq2_residual(&ring, &x, n).unwrap() < 1e-9 * x.frobenius_norm());
        }
        let mut broken = ring.clone();
        let mut data = broken.core(2).data().to_vec();
        data[3] += 1.0;
        broken
            .set_core(2, DenseTensor::new(broken.core(2).shape().to_vec(), data).unwrap())
            .unwrap();
        assert!(eq2_residual(&ring, &broken.reconstruct(), 0).unwrap() > 0.0);
    }

    #[test]
    fn theorem_bound_edge_cases() {
        let ranks = TrRank::uniform(3, 2).unwrap();
        let zero = TrCores::zeros(&[3, 3, 3], &ranks).unwrap();
        let x = zero.reconstruct();
        for n in 0..3 {
            assert!(rank_inequality_check(&zero, &x, n).unwrap());
        }
        let ring = random_ring(&[4, 5, 3], &[1, 1, 1], 4);
        let x = ring.reconstruct();
        for n in 0..3 {
            assert!(numerical_rank(&x.delta_unfold(n).unwrap(), RANK_REL_TOL) <= 3);
            assert!(rank_inequality_check(&ring, &x, n).unwrap());
        }
    }

    #[test]
    fn rotation_matches_reconstruction_permutation() {
        let ring = random_ring(&[2, 3, 4], &[2, 2, 3], 12);
        let x = ring.reconstruct();
        let rotated = ring.rotate(1).reconstruct();
        assert_eq!(rotated.shape(), &[3, 4, 2]);
        let mut idx = vec![0; 3];
        for _ in 0..x.len() {
            let r = [idx[1], idx[2], idx[0]];
            assert!((x.get(&idx).unwrap() - rotated.get(&r).unwrap()).abs() < 1e-12);
            advance(&mut idx, &[2, 3, 4]);
        }
    }

    #[test]
    fn element_index_validation() {
        let ring = random_ring(&[2, 2], &[1, 1], 0);
        assert!(ring.element(&[2, 0]).is_err());
        assert!(ring.element(&[0]).is_err());
        assert!(ring.subchain(2).is_err());
    }
}
