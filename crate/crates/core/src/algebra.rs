//! Direct sums of complex matrix algebras and their elements.
//!
//! An algebra `A = M_{n_1}(C) ⊕ … ⊕ M_{n_k}(C)` is described by an
//! [`AlgebraShape`]; its elements carry one dense complex matrix per block.
//! All arithmetic is blockwise; blocks never mix. The fixed vectorization
//! basis (blocks in shape order, each block row-major) is shared by every
//! tensor in this crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZpdError};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Default relative comparison tolerance used throughout the crate.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Mix a base seed with a stream tag so that independent sampling tasks
/// driven by one user-facing seed draw from disjoint, reproducible streams.
pub fn stream_rng(seed: u64, tag: u64) -> ChaCha8Rng {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

/// Thin SVD `m = U diag(sigma) V*` with `sigma` sorted descending.
/// Columns of `u` belonging to zero singular values are zeroed.
pub(crate) struct SvdParts {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v_t: CMat,
}

/// SVD with a verified backward error. nalgebra's complex SVD occasionally
/// returns factors that do not reproduce the input (observed relative
/// backward error around 1e-3 on rank-deficient blocks), so the result is
/// checked and recomputed with one-sided Jacobi when it is off.
pub(crate) fn checked_svd(m: &CMat) -> SvdParts {
    let svd = nalgebra::SVD::new(m.clone(), true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let k = sigma.len();
    let mut s = CMat::zeros(k, k);
    for (j, &x) in sigma.iter().enumerate() {
        s[(j, j)] = Complex64::from(x);
    }
    let back = (&u * s * &v_t) - m;
    if back.norm() <= 1e-11 * (1.0 + m.norm()) {
        return SvdParts { u, sigma, v_t };
    }
    jacobi_svd(m)
}

pub(crate) fn checked_singular_values(m: &CMat) -> Vec<f64> {
    checked_svd(m).sigma
}

/// One-sided Jacobi SVD. Slower than the bidiagonalization path but its
/// backward error is reliably at machine level.
fn jacobi_svd(m: &CMat) -> SvdParts {
    if m.nrows() < m.ncols() {
        let parts = jacobi_svd(&m.adjoint());
        return SvdParts { u: parts.v_t.adjoint(), sigma: parts.sigma, v_t: parts.u.adjoint() };
    }
    let rows = m.nrows();
    let cols = m.ncols();
    let mut a = m.clone();
    let mut v = CMat::identity(cols, cols);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let app = a.column(p).norm_squared();
                let aqq = a.column(q).norm_squared();
                let apq = a.column(p).dotc(&a.column(q));
                let mag = apq.norm();
                if mag <= 1e-15 * (app * aqq).sqrt() || mag == 0.0 {
                    continue;
                }
                rotated = true;
                // scale column q so the pair Gram matrix becomes real, then
                // apply the classical symmetric Jacobi rotation
                let phase = (apq / mag).conj();
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = Complex64::from(1.0 / (1.0 + t * t).sqrt());
                let sn = cs * t;
                for i in 0..rows {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)] * phase;
                    a[(i, p)] = cs * aip - sn * aiq;
                    a[(i, q)] = sn * aip + cs * aiq;
                }
                for i in 0..cols {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)] * phase;
                    v[(i, p)] = cs * vip - sn * viq;
                    v[(i, q)] = sn * vip + cs * viq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let sigma_max = norms.iter().copied().fold(0.0_f64, f64::max);
    let mut u = CMat::zeros(rows, cols);
    let mut v_t = CMat::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (slot, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        if norms[j] > 1e-18 * sigma_max {
            let col = a.column(j) / Complex64::from(norms[j]);
            u.set_column(slot, &col);
        }
        for i in 0..cols {
            v_t[(slot, i)] = v[(i, j)].conj();
        }
    }
    SvdParts { u, sigma, v_t }
}

/// Shape of a finite direct sum of square complex matrix blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraShape {
    block_dims: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(ZpdError::InvalidArgument("shape needs at least one block".into()));
        }
        if block_dims.iter().any(|&n| n == 0) {
            return Err(ZpdError::InvalidArgument("block dimensions must be positive".into()));
        }
        Ok(AlgebraShape { block_dims })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn block_dim(&self, i: usize) -> usize {
        self.block_dims[i]
    }

    /// Total linear dimension `dim(A) = Σ n_i²`.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    pub fn max_block_dim(&self) -> usize {
        *self.block_dims.iter().max().unwrap()
    }

    /// Offset of block `i` in the vectorization basis.
    pub fn block_offset(&self, i: usize) -> usize {
        self.block_dims[..i].iter().map(|n| n * n).sum()
    }

    /// Index of entry `(r, s)` of block `i` in the vectorization basis.
    pub fn entry_index(&self, block: usize, r: usize, s: usize) -> usize {
        let n = self.block_dims[block];
        debug_assert!(r < n && s < n);
        self.block_offset(block) + r * n + s
    }

    /// Inverse of [`entry_index`](Self::entry_index).
    pub fn entry_of_index(&self, mut idx: usize) -> (usize, usize, usize) {
        for (i, &n) in self.block_dims.iter().enumerate() {
            if idx < n * n {
                return (i, idx / n, idx % n);
            }
            idx -= n * n;
        }
        panic!("vectorization index out of range");
    }

    /// The `t`-th vectorization basis element (a matrix unit in some block).
    pub fn basis_element(&self, t: usize) -> AlgebraElement {
        let (i, r, s) = self.entry_of_index(t);
        AlgebraElement::matrix_unit(self, i, r, s).unwrap()
    }

    pub fn check_block(&self, i: usize) -> Result<()> {
        if i >= self.num_blocks() {
            return Err(ZpdError::BlockIndexOutOfRange { index: i, blocks: self.num_blocks() });
        }
        Ok(())
    }
}

/// Entry distribution for [`AlgebraElement::random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    /// Independent complex standard Gaussian entries.
    Gaussian,
    /// Gaussian, resampled per element until every block is well conditioned
    /// (smallest singular value above 1e-6 of the largest).
    InvertibleGaussian,
}

/// An element of a direct sum of matrix algebras: one `n_i × n_i` complex
/// matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn from_blocks(shape: &AlgebraShape, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(ZpdError::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                shape.num_blocks(),
                blocks.len()
            )));
        }
        for (i, b) in blocks.iter().enumerate() {
            let n = shape.block_dim(i);
            if b.nrows() != n || b.ncols() != n {
                return Err(ZpdError::ShapeMismatch(format!(
                    "block {i} is {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(AlgebraElement { shape: shape.clone(), blocks })
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&n| CMat::zeros(n, n))
            .collect();
        AlgebraElement { shape: shape.clone(), blocks }
    }

    /// The unit `1 = (I_{n_1}, …, I_{n_k})`.
    pub fn unit(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&n| CMat::identity(n, n))
            .collect();
        AlgebraElement { shape: shape.clone(), blocks }
    }

    /// Matrix unit `e_{rs}` in block `i`, zero elsewhere.
    pub fn matrix_unit(shape: &AlgebraShape, block: usize, r: usize, s: usize) -> Result<Self> {
        shape.check_block(block)?;
        let n = shape.block_dim(block);
        if r >= n || s >= n {
            return Err(ZpdError::InvalidArgument(format!(
                "matrix unit ({r},{s}) out of range for block of dim {n}"
            )));
        }
        let mut el = AlgebraElement::zero(shape);
        el.blocks[block][(r, s)] = Complex64::new(1.0, 0.0);
        Ok(el)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut CMat {
        &mut self.blocks[i]
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    fn check_same_shape(&self, other: &AlgebraElement) -> Result<()> {
        if self.shape != other.shape {
            return Err(ZpdError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape.block_dims(),
                other.shape.block_dims()
            )));
        }
        Ok(())
    }

    /// Blockwise product.
    pub fn multiply(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_same_shape(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a * b)
            .collect();
        Ok(AlgebraElement { shape: self.shape.clone(), blocks })
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> AlgebraElement {
        let blocks = self.blocks.iter().map(|b| b.adjoint()).collect();
        AlgebraElement { shape: self.shape.clone(), blocks }
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_same_shape(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect();
        Ok(AlgebraElement { shape: self.shape.clone(), blocks })
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_same_shape(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect();
        Ok(AlgebraElement { shape: self.shape.clone(), blocks })
    }

    pub fn scale(&self, factor: Complex64) -> AlgebraElement {
        let blocks = self.blocks.iter().map(|b| b * factor).collect();
        AlgebraElement { shape: self.shape.clone(), blocks }
    }

    pub fn neg(&self) -> AlgebraElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// The element equal to `self` on block `i` and zero elsewhere.
    pub fn project_block(&self, i: usize) -> Result<AlgebraElement> {
        self.shape.check_block(i)?;
        let mut el = AlgebraElement::zero(&self.shape);
        el.blocks[i] = self.blocks[i].clone();
        Ok(el)
    }

    /// `self` with block `i` zeroed: the truncation `c_{≠i}`.
    pub fn off_block(&self, i: usize) -> Result<AlgebraElement> {
        self.shape.check_block(i)?;
        let mut el = self.clone();
        el.blocks[i] = CMat::zeros(self.shape.block_dim(i), self.shape.block_dim(i));
        Ok(el)
    }

    /// `self` with blocks `i` and `j` zeroed: the truncation `c_{≠i,j}`.
    pub fn off_blocks(&self, i: usize, j: usize) -> Result<AlgebraElement> {
        self.off_block(i)?.off_block(j)
    }

    /// The padded unit `1_{≠i} = 1 - 1_{A_i}`.
    pub fn unit_off_block(shape: &AlgebraShape, i: usize) -> Result<AlgebraElement> {
        AlgebraElement::unit(shape).off_block(i)
    }

    /// The padded unit `1_{≠i,j}`.
    pub fn unit_off_blocks(shape: &AlgebraShape, i: usize, j: usize) -> Result<AlgebraElement> {
        AlgebraElement::unit(shape).off_blocks(i, j)
    }

    /// Frobenius norm over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    /// Blockwise inverse; `None` if any block is singular.
    pub fn try_inverse(&self) -> Option<AlgebraElement> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            blocks.push(b.clone().try_inverse()?);
        }
        Some(AlgebraElement { shape: self.shape.clone(), blocks })
    }

    /// Coordinates in the fixed vectorization basis (blocks in order, each
    /// block row-major).
    pub fn to_vector(&self) -> CVec {
        let d = self.shape.dim();
        let mut v = CVec::zeros(d);
        let mut off = 0;
        for b in &self.blocks {
            let n = b.nrows();
            for r in 0..n {
                for s in 0..n {
                    v[off + r * n + s] = b[(r, s)];
                }
            }
            off += n * n;
        }
        v
    }

    pub fn from_vector(shape: &AlgebraShape, v: &CVec) -> Result<AlgebraElement> {
        if v.len() != shape.dim() {
            return Err(ZpdError::ShapeMismatch(format!(
                "vector of length {} vs dim {}",
                v.len(),
                shape.dim()
            )));
        }
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        let mut off = 0;
        for &n in shape.block_dims() {
            let mut b = CMat::zeros(n, n);
            for r in 0..n {
                for s in 0..n {
                    b[(r, s)] = v[off + r * n + s];
                }
            }
            blocks.push(b);
            off += n * n;
        }
        Ok(AlgebraElement { shape: shape.clone(), blocks })
    }

    /// Matrix of `a ↦ self·a` over the vectorization basis.
    pub fn left_multiplication_matrix(&self) -> CMat {
        let d = self.shape.dim();
        let mut m = CMat::zeros(d, d);
        for t in 0..d {
            let col = self.multiply(&self.shape.basis_element(t)).unwrap().to_vector();
            m.set_column(t, &col);
        }
        m
    }

    /// Matrix of `a ↦ a·self` over the vectorization basis.
    pub fn right_multiplication_matrix(&self) -> CMat {
        let d = self.shape.dim();
        let mut m = CMat::zeros(d, d);
        for t in 0..d {
            let col = self.shape.basis_element(t).multiply(self).unwrap().to_vector();
            m.set_column(t, &col);
        }
        m
    }

    /// Singular values of every block, concatenated with block tags.
    pub fn block_singular_values(&self) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(checked_singular_values)
            .collect()
    }

    /// Numerical rank per block: singular values above
    /// `tol · σ_max · max(n_i)`, with `σ_max` taken over all blocks.
    pub fn rank_profile(&self, tol: f64) -> RankProfile {
        let sv = self.block_singular_values();
        let sigma_max = sv
            .iter()
            .flat_map(|s| s.iter().copied())
            .fold(0.0_f64, f64::max);
        let threshold = tol * sigma_max * self.shape.max_block_dim() as f64;
        let ranks = sv
            .iter()
            .map(|s| s.iter().filter(|&&x| x > threshold).count())
            .collect();
        RankProfile { ranks, threshold_used: threshold }
    }

    /// `rank(π_i(c)) ≤ n_i − 2` in every block.
    pub fn satisfies_rank_hypothesis(&self, tol: f64) -> (bool, RankProfile) {
        let profile = self.rank_profile(tol);
        let ok = profile
            .ranks
            .iter()
            .zip(self.shape.block_dims())
            .all(|(&r, &n)| r + 2 <= n);
        (ok, profile)
    }

    /// Deterministic random element for a given seed.
    pub fn random(shape: &AlgebraShape, seed: u64, kind: RandomKind) -> Result<AlgebraElement> {
        let mut rng = stream_rng(seed, 0x5eed);
        match kind {
            RandomKind::Gaussian => Ok(Self::gaussian_with(shape, &mut rng)),
            RandomKind::InvertibleGaussian => {
                for _ in 0..100 {
                    let el = Self::gaussian_with(shape, &mut rng);
                    let well_conditioned = el.blocks.iter().all(|b| {
                        let sv = checked_singular_values(b);
                        let max = sv.iter().cloned().fold(0.0_f64, f64::max);
                        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
                        max > 0.0 && min > 1e-6 * max
                    });
                    if well_conditioned {
                        return Ok(el);
                    }
                }
                Err(ZpdError::DegenerateRngStream { retries: 100 })
            }
        }
    }

    /// Gaussian element drawn from an already-seeded stream.
    pub fn gaussian_with<R: Rng>(shape: &AlgebraShape, rng: &mut R) -> AlgebraElement {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&n| {
                CMat::from_fn(n, n, |_, _| {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
            })
            .collect();
        AlgebraElement { shape: shape.clone(), blocks }
    }

    /// Invertible Gaussian element drawn from an already-seeded stream.
    pub fn invertible_gaussian_with<R: Rng>(
        shape: &AlgebraShape,
        rng: &mut R,
    ) -> Result<AlgebraElement> {
        for _ in 0..100 {
            let el = Self::gaussian_with(shape, rng);
            let ok = el.blocks.iter().all(|b| {
                let sv = checked_singular_values(b);
                let max = sv.iter().cloned().fold(0.0_f64, f64::max);
                let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
                max > 0.0 && min > 1e-6 * max
            });
            if ok {
                return Ok(el);
            }
        }
        Err(ZpdError::DegenerateRngStream { retries: 100 })
    }

    /// Random element with prescribed numerical rank per block, built as a
    /// sum of `r_i` random rank-one terms.
    pub fn random_with_ranks<R: Rng>(
        shape: &AlgebraShape,
        ranks: &[usize],
        rng: &mut R,
    ) -> Result<AlgebraElement> {
        if ranks.len() != shape.num_blocks() {
            return Err(ZpdError::ShapeMismatch(format!(
                "{} ranks for {} blocks",
                ranks.len(),
                shape.num_blocks()
            )));
        }
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        for (i, (&n, &r)) in shape.block_dims().iter().zip(ranks).enumerate() {
            if r > n {
                return Err(ZpdError::InvalidArgument(format!(
                    "rank {r} > dim {n} in block {i}"
                )));
            }
            if r == 0 {
                blocks.push(CMat::zeros(n, n));
            } else {
                let left = CMat::from_fn(n, r, |_, _| {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                });
                let right = CMat::from_fn(r, n, |_, _| {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                });
                blocks.push(left * right);
            }
        }
        AlgebraElement::from_blocks(shape, blocks)
    }

    /// Relative closeness under the Frobenius norm.
    pub fn approx_eq(&self, other: &AlgebraElement, tol: f64) -> bool {
        match self.sub(other) {
            Ok(d) => d.norm() <= tol * (1.0 + self.norm().max(other.norm())),
            Err(_) => false,
        }
    }
}

/// Numerical rank of every block plus the absolute threshold used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    pub ranks: Vec<usize>,
    pub threshold_used: f64,
}

impl RankProfile {
    pub fn total(&self) -> usize {
        self.ranks.iter().sum()
    }
}

// JSON interchange format: {"shape":[n1,…,nk],"blocks":[[[re,im],…]…]} with
// row-major block entries.
#[derive(Serialize, Deserialize)]
struct ElementJson {
    shape: Vec<usize>,
    blocks: Vec<Vec<[f64; 2]>>,
}

impl Serialize for AlgebraElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let n = b.nrows();
                let mut entries = Vec::with_capacity(n * n);
                for r in 0..n {
                    for s in 0..n {
                        entries.push([b[(r, s)].re, b[(r, s)].im]);
                    }
                }
                entries
            })
            .collect();
        ElementJson { shape: self.shape.block_dims().to_vec(), blocks }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ElementJson::deserialize(deserializer)?;
        let shape = AlgebraShape::new(raw.shape).map_err(serde::de::Error::custom)?;
        if raw.blocks.len() != shape.num_blocks() {
            return Err(serde::de::Error::custom("block count does not match shape"));
        }
        let mut blocks = Vec::with_capacity(raw.blocks.len());
        for (i, entries) in raw.blocks.iter().enumerate() {
            let n = shape.block_dim(i);
            if entries.len() != n * n {
                return Err(serde::de::Error::custom(format!(
                    "block {i} has {} entries, expected {}",
                    entries.len(),
                    n * n
                )));
            }
            blocks.push(CMat::from_fn(n, n, |r, s| {
                let [re, im] = entries[r * n + s];
                Complex64::new(re, im)
            }));
        }
        AlgebraElement::from_blocks(&shape, blocks).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> AlgebraShape {
        AlgebraShape::new(vec![2]).unwrap()
    }

    fn m2m2() -> AlgebraShape {
        AlgebraShape::new(vec![2, 2]).unwrap()
    }

    #[test]
    fn unit_is_neutral() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let c = AlgebraElement::random(&shape, 7, RandomKind::Gaussian).unwrap();
        let one = AlgebraElement::unit(&shape);
        let lhs = one.multiply(&c).unwrap();
        assert!(lhs.approx_eq(&c, 1e-14));
    }

    #[test]
    fn matrix_unit_calculus() {
        let shape = m2();
        let e12 = AlgebraElement::matrix_unit(&shape, 0, 0, 1).unwrap();
        let e11 = AlgebraElement::matrix_unit(&shape, 0, 0, 0).unwrap();
        let p = e12.multiply(&e11).unwrap();
        assert!(p.is_zero(1e-15));
    }

    #[test]
    fn blocks_never_mix() {
        let shape = m2m2();
        let a = AlgebraElement::matrix_unit(&shape, 0, 0, 1).unwrap();
        let b = AlgebraElement::matrix_unit(&shape, 1, 0, 0).unwrap();
        assert!(a.multiply(&b).unwrap().is_zero(1e-15));
    }

    #[test]
    fn adjoint_of_diagonal() {
        let shape = m2();
        let mut a = AlgebraElement::zero(&shape);
        a.block_mut(0)[(0, 0)] = Complex64::new(0.0, 1.0);
        let adj = a.adjoint();
        assert_eq!(adj.block(0)[(0, 0)], Complex64::new(0.0, -1.0));

        let e12 = AlgebraElement::matrix_unit(&shape, 0, 0, 1).unwrap();
        let e21 = AlgebraElement::matrix_unit(&shape, 0, 1, 0).unwrap();
        assert!(e12.adjoint().approx_eq(&e21, 1e-15));

        let one = AlgebraElement::unit(&shape);
        assert!(one.adjoint().approx_eq(&one, 1e-15));
    }

    #[test]
    fn projections_partition_unity() {
        let shape = AlgebraShape::new(vec![2, 3, 2]).unwrap();
        let a = AlgebraElement::random(&shape, 3, RandomKind::Gaussian).unwrap();
        let mut sum = AlgebraElement::zero(&shape);
        for i in 0..shape.num_blocks() {
            sum = sum.add(&a.project_block(i).unwrap()).unwrap();
        }
        assert!(sum.approx_eq(&a, 1e-15));
        assert!(a.project_block(3).is_err());
    }

    #[test]
    fn rank_profile_basics() {
        let shape = AlgebraShape::new(vec![3, 2]).unwrap();
        let zero = AlgebraElement::zero(&shape);
        assert_eq!(zero.rank_profile(DEFAULT_EPS).ranks, vec![0, 0]);

        let c = AlgebraElement::matrix_unit(&shape, 0, 0, 0).unwrap();
        assert_eq!(c.rank_profile(DEFAULT_EPS).ranks, vec![1, 0]);
    }

    #[test]
    fn rank_of_identity_minus_corner() {
        // c = I_{n-1} ⊕ 0_{1,1} in M_n has rank n-1
        for n in 2..=5 {
            let shape = AlgebraShape::new(vec![n]).unwrap();
            let mut c = AlgebraElement::unit(&shape);
            c.block_mut(0)[(n - 1, n - 1)] = Complex64::new(0.0, 0.0);
            assert_eq!(c.rank_profile(DEFAULT_EPS).ranks, vec![n - 1]);
        }
    }

    #[test]
    fn rank_hypothesis_examples() {
        let m3 = AlgebraShape::new(vec![3]).unwrap();
        let c = AlgebraElement::matrix_unit(&m3, 0, 0, 0).unwrap();
        assert!(c.satisfies_rank_hypothesis(DEFAULT_EPS).0);

        let m2 = AlgebraShape::new(vec![2]).unwrap();
        let c = AlgebraElement::matrix_unit(&m2, 0, 0, 0).unwrap();
        assert!(!c.satisfies_rank_hypothesis(DEFAULT_EPS).0);

        let zero = AlgebraElement::zero(&m2);
        assert!(zero.satisfies_rank_hypothesis(DEFAULT_EPS).0);
    }

    #[test]
    fn rank_hypothesis_scale_invariant() {
        let shape = AlgebraShape::new(vec![4]).unwrap();
        let mut rng = stream_rng(11, 1);
        let c = AlgebraElement::random_with_ranks(&shape, &[2], &mut rng).unwrap();
        for &s in &[1e-8, 1.0, 1e8] {
            let scaled = c.scale(Complex64::new(s, 0.0));
            assert!(scaled.satisfies_rank_hypothesis(DEFAULT_EPS).0);
        }
    }

    #[test]
    fn random_is_deterministic() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let a = AlgebraElement::random(&shape, 42, RandomKind::Gaussian).unwrap();
        let b = AlgebraElement::random(&shape, 42, RandomKind::Gaussian).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.block(0).nrows(), 2);
        assert_eq!(a.block(1).nrows(), 3);
    }

    #[test]
    fn invertible_gaussian_is_invertible() {
        let shape = AlgebraShape::new(vec![3]).unwrap();
        let a = AlgebraElement::random(&shape, 5, RandomKind::InvertibleGaussian).unwrap();
        let sv = a.block_singular_values();
        let max = sv[0][0];
        let min = *sv[0].last().unwrap();
        assert!(min > 1e-6 * max);
        assert!(a.try_inverse().is_some());
    }

    #[test]
    fn vectorization_round_trip() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let a = AlgebraElement::random(&shape, 9, RandomKind::Gaussian).unwrap();
        let v = a.to_vector();
        assert_eq!(v.len(), shape.dim());
        let back = AlgebraElement::from_vector(&shape, &v).unwrap();
        assert!(back.approx_eq(&a, 0.0));
    }

    #[test]
    fn jacobi_svd_reconstructs() {
        let mut rng = stream_rng(7, 0x5d);
        for (rows, cols) in [(4, 4), (6, 3), (3, 6), (5, 1)] {
            let m = CMat::from_fn(rows, cols, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let parts = jacobi_svd(&m);
            let k = parts.sigma.len();
            let mut s = CMat::zeros(k, k);
            for (j, &x) in parts.sigma.iter().enumerate() {
                s[(j, j)] = Complex64::from(x);
            }
            let back = (&parts.u * s * &parts.v_t) - &m;
            assert!(back.norm() <= 1e-12 * (1.0 + m.norm()));
            let uo = parts.u.adjoint() * &parts.u - CMat::identity(k, k);
            assert!(uo.norm() <= 1e-12);
            assert!(parts.sigma.windows(2).all(|w| w[0] >= w[1]));
            let reference = checked_singular_values(&m);
            for (a, b) in parts.sigma.iter().zip(&reference) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + m.norm()));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let a = AlgebraElement::random(&shape, 1, RandomKind::Gaussian).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        assert!(text.starts_with("{\"shape\":[2,3]"));
        let b: AlgebraElement = serde_json::from_str(&text).unwrap();
        assert!(b.approx_eq(&a, 1e-15));
    }
}
