//! Rank-one operators and minimal-partial-isometry decompositions.
//!
//! Every element of a direct sum of matrix blocks decomposes blockwise via
//! SVD as `a = Σ λ_i u_i` with `λ_i > 0` and `u_i = e_i ⊗ f_i` pairwise
//! orthogonal rank-one partial isometries. This module houses that
//! decomposition plus the orthogonality predicates, support projections,
//! Peirce projections and the odd cube root.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{checked_svd, AlgebraElement, AlgebraShape, CMat, CVec, DEFAULT_EPS};
use crate::error::{Result, ZpdError};

/// A rank-one operator `e ⊗ f` supported on a single block, acting as
/// `h ↦ <h, f> e`; its matrix has entry `e_p · conj(f_q)` at `(p, q)`.
///
/// Both vectors are kept at unit norm; magnitudes live in the decomposition
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneOperator {
    block: usize,
    e: CVec,
    f: CVec,
}

impl RankOneOperator {
    /// Normalizes both vectors to unit length.
    pub fn new(block: usize, e: CVec, f: CVec) -> Result<Self> {
        if e.len() != f.len() {
            return Err(ZpdError::ShapeMismatch(format!(
                "rank-one vectors of lengths {} and {}",
                e.len(),
                f.len()
            )));
        }
        let (ne, nf) = (e.norm(), f.norm());
        if ne == 0.0 || nf == 0.0 {
            return Err(ZpdError::InvalidArgument("rank-one vectors must be nonzero".into()));
        }
        Ok(RankOneOperator { block, e: e / Complex64::from(ne), f: f / Complex64::from(nf) })
    }

    /// `e_i ⊗ e_j` in the given block: the matrix unit `e_{ij}` (0-based).
    pub fn basis_pair(shape: &AlgebraShape, block: usize, i: usize, j: usize) -> Result<Self> {
        shape.check_block(block)?;
        let n = shape.block_dim(block);
        if i >= n || j >= n {
            return Err(ZpdError::InvalidArgument(format!(
                "basis indices ({i},{j}) out of range for block of dim {n}"
            )));
        }
        let mut e = CVec::zeros(n);
        let mut f = CVec::zeros(n);
        e[i] = Complex64::new(1.0, 0.0);
        f[j] = Complex64::new(1.0, 0.0);
        RankOneOperator::new(block, e, f)
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn e(&self) -> &CVec {
        &self.e
    }

    pub fn f(&self) -> &CVec {
        &self.f
    }

    /// Embeds the operator into the algebra: entry `(p, q)` of its block is
    /// `e_p · conj(f_q)`, zero elsewhere.
    pub fn to_element(&self, shape: &AlgebraShape) -> Result<AlgebraElement> {
        shape.check_block(self.block)?;
        let n = shape.block_dim(self.block);
        if self.e.len() != n {
            return Err(ZpdError::ShapeMismatch(format!(
                "rank-one vectors of length {} in block of dim {n}",
                self.e.len()
            )));
        }
        let mut el = AlgebraElement::zero(shape);
        let b = el.block_mut(self.block);
        for p in 0..n {
            for q in 0..n {
                b[(p, q)] = self.e[p] * self.f[q].conj();
            }
        }
        Ok(el)
    }
}

/// One term `λ · (e ⊗ f)` of a minimal-partial-isometry decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct MinPiTerm {
    pub lambda: f64,
    pub op: RankOneOperator,
}

/// Blockwise SVD of an element as `Σ λ_i u_i` with pairwise orthogonal
/// rank-one partial isometries, `λ_i` non-increasing within each block.
#[derive(Debug, Clone, PartialEq)]
pub struct MinPiDecomposition {
    shape: AlgebraShape,
    terms: Vec<MinPiTerm>,
}

impl MinPiDecomposition {
    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn terms(&self) -> &[MinPiTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms supported on one block.
    pub fn block_terms(&self, block: usize) -> impl Iterator<Item = &MinPiTerm> {
        self.terms.iter().filter(move |t| t.op.block == block)
    }

    /// `Σ λ_i u_i` as an element.
    pub fn reconstruct(&self) -> Result<AlgebraElement> {
        let mut sum = AlgebraElement::zero(&self.shape);
        for t in &self.terms {
            let el = t.op.to_element(&self.shape)?;
            sum = sum.add(&el.scale(Complex64::from(t.lambda)))?;
        }
        Ok(sum)
    }

    /// Splits the terms into two halves; both sides nonempty when rank ≥ 2.
    pub fn split_halves(&self) -> (MinPiDecomposition, MinPiDecomposition) {
        let mid = self.terms.len().div_ceil(2);
        (
            MinPiDecomposition { shape: self.shape.clone(), terms: self.terms[..mid].to_vec() },
            MinPiDecomposition { shape: self.shape.clone(), terms: self.terms[mid..].to_vec() },
        )
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let entries: Vec<MinPiTermJson> = self
            .terms
            .iter()
            .map(|t| MinPiTermJson {
                block: t.op.block,
                lambda: t.lambda,
                e: t.op.e.iter().map(|z| [z.re, z.im]).collect(),
                f: t.op.f.iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect();
        serde_json::to_value(entries).unwrap()
    }
}

#[derive(Serialize, Deserialize)]
struct MinPiTermJson {
    block: usize,
    lambda: f64,
    e: Vec<[f64; 2]>,
    f: Vec<[f64; 2]>,
}

/// Rank threshold matching [`AlgebraElement::rank_profile`]: relative to the
/// largest singular value over all blocks.
fn rank_threshold(a: &AlgebraElement, tol: f64) -> f64 {
    let sigma_max = a
        .block_singular_values()
        .iter()
        .flat_map(|s| s.iter().copied())
        .fold(0.0_f64, f64::max);
    tol * sigma_max * a.shape().max_block_dim() as f64
}

/// SVD of a single block kept for reuse: `m = Σ σ_j u_j v_j^*` with the
/// singular triples above the threshold.
pub(crate) fn block_svd_terms(m: &CMat, threshold: f64) -> Vec<(f64, CVec, CVec)> {
    let svd = checked_svd(m);
    let mut out = Vec::new();
    for (j, &sigma) in svd.sigma.iter().enumerate() {
        if sigma > threshold {
            let left: CVec = svd.u.column(j).into_owned();
            // rows of v_t are v_j^*, so conjugate back
            let right: CVec = svd.v_t.row(j).transpose().map(|z| z.conj());
            out.push((sigma, left, right));
        }
    }
    out
}

/// Blockwise minimal-partial-isometry decomposition via SVD.
///
/// The left vectors span the block range and the right vectors span the
/// orthocomplement of the block kernel. `a = 0` yields an empty
/// decomposition.
pub fn minpi_decompose(a: &AlgebraElement, tol: f64) -> MinPiDecomposition {
    let threshold = rank_threshold(a, tol);
    let mut terms = Vec::new();
    for (i, m) in a.blocks().iter().enumerate() {
        for (sigma, e, f) in block_svd_terms(m, threshold) {
            terms.push(MinPiTerm { lambda: sigma, op: RankOneOperator { block: i, e, f } });
        }
    }
    MinPiDecomposition { shape: a.shape().clone(), terms }
}

/// True iff `a` is supported on exactly one block, has numerical rank 1
/// there, and satisfies `a a* a = a` within `tol`.
pub fn is_minimal_partial_isometry(a: &AlgebraElement, tol: f64) -> bool {
    let profile = a.rank_profile(tol.max(DEFAULT_EPS));
    let nonzero_blocks = profile.ranks.iter().filter(|&&r| r > 0).count();
    if nonzero_blocks != 1 || profile.total() != 1 {
        return false;
    }
    let aaa = a.multiply(&a.adjoint()).and_then(|x| x.multiply(a)).unwrap();
    aaa.sub(a).unwrap().norm() <= tol * (1.0 + a.norm())
}

/// Orthogonality in the C*-sense: `a b* = b* a = 0` within `tol` relative to
/// `|a|·|b|`.
pub fn are_orthogonal(a: &AlgebraElement, b: &AlgebraElement, tol: f64) -> Result<bool> {
    let scale = a.norm() * b.norm();
    let ab = a.multiply(&b.adjoint())?;
    let ba = b.adjoint().multiply(a)?;
    Ok(ab.norm() <= tol * scale.max(f64::MIN_POSITIVE) && ba.norm() <= tol * scale.max(f64::MIN_POSITIVE))
}

/// `u v = 0` for rank-one operators: cross-block always; same-block iff
/// `f_u ⊥ e_v`.
pub fn rank_one_product_zero(u: &RankOneOperator, v: &RankOneOperator, tol: f64) -> bool {
    if u.block != v.block {
        return true;
    }
    u.f.dotc(&v.e).norm() <= tol
}

/// Decomposes a zero-product pair so that every cross product of terms
/// vanishes.
///
/// For `x y = 0` the SVD right vectors of `x` are automatically orthogonal
/// to the left vectors of `y` within each block; this is verified and the
/// pair of decompositions returned.
pub fn zp_decompose_pair(
    x: &AlgebraElement,
    y: &AlgebraElement,
    tol: f64,
) -> Result<(MinPiDecomposition, MinPiDecomposition)> {
    let scale = x.norm() * y.norm();
    let residual = x.multiply(y)?.norm();
    if residual > tol * scale.max(f64::MIN_POSITIVE) {
        return Err(ZpdError::NotZeroProductPair { residual, tol: tol * scale });
    }
    let dx = minpi_decompose(x, DEFAULT_EPS);
    let dy = minpi_decompose(y, DEFAULT_EPS);
    let cross_tol = 10.0 * tol;
    for tx in &dx.terms {
        for ty in &dy.terms {
            if tx.op.block != ty.op.block {
                continue;
            }
            let inner = tx.op.f.dotc(&ty.op.e).norm();
            if inner > cross_tol {
                return Err(ZpdError::CrossProductResidualTooLarge {
                    residual: inner,
                    tol: cross_tol,
                });
            }
        }
    }
    Ok((dx, dy))
}

/// The unique `b` with `b b* b = a`, computed blockwise as `U Σ^{1/3} V*`.
///
/// Singular values below the rank threshold are dropped before taking the
/// cube root; the root would otherwise amplify noise-level values by many
/// orders of magnitude.
pub fn odd_cube_root(a: &AlgebraElement) -> AlgebraElement {
    let threshold = rank_threshold(a, DEFAULT_EPS);
    let blocks = a
        .blocks()
        .iter()
        .map(|m| {
            let svd = checked_svd(m);
            let n = m.nrows();
            let mut sigma = CMat::zeros(n, n);
            for (j, &s) in svd.sigma.iter().enumerate() {
                if s > threshold {
                    sigma[(j, j)] = Complex64::from(s.cbrt());
                }
            }
            svd.u * sigma * svd.v_t
        })
        .collect();
    AlgebraElement::from_blocks(a.shape(), blocks).unwrap()
}

/// Left and right support projections from the rank-truncated SVD:
/// `s_l = U_r U_r*`, `s_r = V_r V_r*`; both have rank equal to the block
/// rank of `a` and satisfy `s_l a = a = a s_r`.
pub fn support_projections(a: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
    let threshold = rank_threshold(a, DEFAULT_EPS);
    let mut left_blocks = Vec::new();
    let mut right_blocks = Vec::new();
    for m in a.blocks() {
        let n = m.nrows();
        let mut sl = CMat::zeros(n, n);
        let mut sr = CMat::zeros(n, n);
        for (_, e, f) in block_svd_terms(m, threshold) {
            sl += &e * e.adjoint();
            sr += &f * f.adjoint();
        }
        left_blocks.push(sl);
        right_blocks.push(sr);
    }
    (
        AlgebraElement::from_blocks(a.shape(), left_blocks).unwrap(),
        AlgebraElement::from_blocks(a.shape(), right_blocks).unwrap(),
    )
}

/// Peirce decomposition of `a` induced by a partial isometry `e`:
/// `a2 = ee* a e*e`, `a0 = (1-ee*) a (1-e*e)`, `a1 = a - a2 - a0`.
pub fn peirce_decompose(
    a: &AlgebraElement,
    e: &AlgebraElement,
) -> Result<(AlgebraElement, AlgebraElement, AlgebraElement)> {
    let eee = e.multiply(&e.adjoint())?.multiply(e)?;
    let residual = eee.sub(e)?.norm();
    if residual > DEFAULT_EPS * (1.0 + e.norm()) {
        return Err(ZpdError::NotPartialIsometry { residual });
    }
    let one = AlgebraElement::unit(a.shape());
    let l = e.multiply(&e.adjoint())?;
    let r = e.adjoint().multiply(e)?;
    let a2 = l.multiply(a)?.multiply(&r)?;
    let a0 = one.sub(&l)?.multiply(a)?.multiply(&one.sub(&r)?)?;
    let a1 = a.sub(&a2)?.sub(&a0)?;
    Ok((a2, a1, a0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{stream_rng, RandomKind};

    fn shape(dims: &[usize]) -> AlgebraShape {
        AlgebraShape::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn rank_one_to_matrix_unit() {
        let sh = shape(&[2]);
        let u = RankOneOperator::basis_pair(&sh, 0, 0, 1).unwrap();
        let e12 = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap();
        assert!(u.to_element(&sh).unwrap().approx_eq(&e12, 1e-15));

        let u = RankOneOperator::basis_pair(&sh, 0, 0, 0).unwrap();
        let e11 = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        assert!(u.to_element(&sh).unwrap().approx_eq(&e11, 1e-15));
    }

    #[test]
    fn rank_one_column_form() {
        let sh = shape(&[2]);
        let s = 1.0 / 2.0_f64.sqrt();
        let e = CVec::from_vec(vec![Complex64::from(s), Complex64::from(s)]);
        let mut f = CVec::zeros(2);
        f[0] = Complex64::from(1.0);
        let u = RankOneOperator::new(0, e, f).unwrap();
        let el = u.to_element(&sh).unwrap();
        assert!((el.block(0)[(0, 0)].re - s).abs() < 1e-15);
        assert!((el.block(0)[(1, 0)].re - s).abs() < 1e-15);
        assert!(el.block(0)[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn minimal_partial_isometry_predicate() {
        let sh = shape(&[2]);
        let e12 = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap();
        assert!(is_minimal_partial_isometry(&e12, DEFAULT_EPS));

        let one = AlgebraElement::unit(&sh);
        assert!(!is_minimal_partial_isometry(&one, DEFAULT_EPS));

        let sh2 = shape(&[2, 2]);
        let both = AlgebraElement::matrix_unit(&sh2, 0, 0, 0)
            .unwrap()
            .add(&AlgebraElement::matrix_unit(&sh2, 1, 0, 0).unwrap())
            .unwrap();
        assert!(!is_minimal_partial_isometry(&both, DEFAULT_EPS));
    }

    #[test]
    fn decompose_positive_diagonal() {
        let sh = shape(&[2]);
        let mut a = AlgebraElement::zero(&sh);
        a.block_mut(0)[(0, 0)] = Complex64::from(3.0);
        let d = minpi_decompose(&a, DEFAULT_EPS);
        assert_eq!(d.terms().len(), 1);
        assert!((d.terms()[0].lambda - 3.0).abs() < 1e-12);
        assert!(d.reconstruct().unwrap().approx_eq(&a, 1e-12));
    }

    #[test]
    fn decompose_single_entry() {
        let sh = shape(&[2]);
        let a = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap().scale(Complex64::from(2.0));
        let d = minpi_decompose(&a, DEFAULT_EPS);
        assert_eq!(d.terms().len(), 1);
        assert!((d.terms()[0].lambda - 2.0).abs() < 1e-12);
        assert!(d.reconstruct().unwrap().approx_eq(&a, 1e-12));
    }

    #[test]
    fn decompose_random_rank2() {
        let sh = shape(&[3]);
        let mut rng = stream_rng(17, 2);
        let a = AlgebraElement::random_with_ranks(&sh, &[2], &mut rng).unwrap();
        let d = minpi_decompose(&a, DEFAULT_EPS);
        assert_eq!(d.terms().len(), 2);
        let err = d.reconstruct().unwrap().sub(&a).unwrap().norm();
        assert!(err <= 1e-9 * a.norm());
        // terms pairwise orthogonal
        let t0 = d.terms()[0].op.to_element(&sh).unwrap();
        let t1 = d.terms()[1].op.to_element(&sh).unwrap();
        assert!(are_orthogonal(&t0, &t1, 1e-9).unwrap());
    }

    #[test]
    fn orthogonality_examples() {
        let sh = shape(&[2]);
        let e11 = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        let e22 = AlgebraElement::matrix_unit(&sh, 0, 1, 1).unwrap();
        let e12 = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap();
        assert!(are_orthogonal(&e11, &e22, 1e-12).unwrap());
        assert!(!are_orthogonal(&e11, &e12, 1e-12).unwrap());
    }

    #[test]
    fn rank_one_zero_products() {
        let sh = shape(&[3]);
        let u = RankOneOperator::basis_pair(&sh, 0, 0, 1).unwrap();
        let v = RankOneOperator::basis_pair(&sh, 0, 2, 0).unwrap();
        assert!(rank_one_product_zero(&u, &v, 1e-12));

        let w = RankOneOperator::basis_pair(&sh, 0, 1, 2).unwrap();
        assert!(!rank_one_product_zero(&u, &w, 1e-12));

        let sh2 = shape(&[2, 2]);
        let a = RankOneOperator::basis_pair(&sh2, 0, 0, 1).unwrap();
        let b = RankOneOperator::basis_pair(&sh2, 1, 0, 1).unwrap();
        assert!(rank_one_product_zero(&a, &b, 1e-12));
    }

    #[test]
    fn zp_pair_matrix_units() {
        let sh = shape(&[2]);
        let x = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap();
        let y = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        let (dx, dy) = zp_decompose_pair(&x, &y, 1e-9).unwrap();
        assert_eq!(dx.terms().len(), 1);
        assert_eq!(dy.terms().len(), 1);

        let zero = AlgebraElement::zero(&sh);
        let (dz, _) = zp_decompose_pair(&zero, &y, 1e-9).unwrap();
        assert!(dz.is_empty());
    }

    #[test]
    fn zp_pair_constructed_kernel() {
        // y = P g with P the projection onto ker(x): all cross products small
        let sh = shape(&[4]);
        let mut rng = stream_rng(23, 3);
        let x = AlgebraElement::random_with_ranks(&sh, &[1], &mut rng).unwrap();
        let (_, sr) = support_projections(&x);
        let one = AlgebraElement::unit(&sh);
        let ker_proj = one.sub(&sr).unwrap();
        let g = AlgebraElement::gaussian_with(&sh, &mut rng);
        // range(y) ⊆ ker(x) needs x y = 0, i.e. y = (1 - s_r(x)) g ... on the left
        let y = ker_proj.multiply(&g).unwrap();
        assert!(x.multiply(&y).unwrap().norm() <= 1e-9 * x.norm() * y.norm());
        let (dx, dy) = zp_decompose_pair(&x, &y, 1e-9).unwrap();
        for tx in dx.terms() {
            for ty in dy.terms() {
                let px = tx.op.to_element(&sh).unwrap();
                let py = ty.op.to_element(&sh).unwrap();
                assert!(px.multiply(&py).unwrap().norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn rejects_non_zero_product_pair() {
        let sh = shape(&[2]);
        let e11 = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        assert!(matches!(
            zp_decompose_pair(&e11, &e11, 1e-9),
            Err(ZpdError::NotZeroProductPair { .. })
        ));
    }

    #[test]
    fn cube_root_examples() {
        let sh = shape(&[2]);
        let mut a = AlgebraElement::zero(&sh);
        a.block_mut(0)[(0, 0)] = Complex64::from(8.0);
        a.block_mut(0)[(1, 1)] = Complex64::from(27.0);
        let b = odd_cube_root(&a);
        assert!((b.block(0)[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((b.block(0)[(1, 1)].re - 3.0).abs() < 1e-12);

        let a = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap().scale(Complex64::from(8.0));
        let b = odd_cube_root(&a);
        let bbb = b.multiply(&b.adjoint()).unwrap().multiply(&b).unwrap();
        assert!(bbb.approx_eq(&a, 1e-12));
        assert!((b.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cube_root_preserves_zero_products() {
        let sh = shape(&[4]);
        let mut rng = stream_rng(31, 4);
        for _ in 0..20 {
            let a = AlgebraElement::random_with_ranks(&sh, &[2], &mut rng).unwrap();
            let (_, sr) = support_projections(&a);
            let one = AlgebraElement::unit(&sh);
            let g = AlgebraElement::gaussian_with(&sh, &mut rng);
            let b = one.sub(&sr).unwrap().multiply(&g).unwrap();
            assert!(a.multiply(&b).unwrap().norm() <= 1e-9 * a.norm() * b.norm());
            let ra = odd_cube_root(&a);
            let rb = odd_cube_root(&b);
            let prod = ra.multiply(&rb).unwrap().norm();
            assert!(prod <= 1e-8 * (1.0 + ra.norm() * rb.norm()), "cube roots cross product {prod}");
        }
    }

    #[test]
    fn support_projection_examples() {
        let sh = shape(&[2]);
        let e12 = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap();
        let (sl, sr) = support_projections(&e12);
        let e11 = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        let e22 = AlgebraElement::matrix_unit(&sh, 0, 1, 1).unwrap();
        assert!(sl.approx_eq(&e11, 1e-12));
        assert!(sr.approx_eq(&e22, 1e-12));

        let a = AlgebraElement::random(&sh, 2, RandomKind::InvertibleGaussian).unwrap();
        let (sl, sr) = support_projections(&a);
        let one = AlgebraElement::unit(&sh);
        assert!(sl.approx_eq(&one, 1e-9));
        assert!(sr.approx_eq(&one, 1e-9));

        let sh2 = shape(&[2, 2]);
        let mut d = AlgebraElement::zero(&sh2);
        d.block_mut(0)[(0, 0)] = Complex64::from(5.0);
        let (sl, sr) = support_projections(&d);
        let p = AlgebraElement::matrix_unit(&sh2, 0, 0, 0).unwrap();
        assert!(sl.approx_eq(&p, 1e-12));
        assert!(sr.approx_eq(&p, 1e-12));
    }

    #[test]
    fn support_projection_contracts() {
        let sh = shape(&[3, 4]);
        let mut rng = stream_rng(37, 5);
        for _ in 0..10 {
            let a = AlgebraElement::random_with_ranks(&sh, &[1, 2], &mut rng).unwrap();
            let (sl, sr) = support_projections(&a);
            for p in [&sl, &sr] {
                let pp = p.multiply(p).unwrap();
                assert!(pp.approx_eq(p, 1e-9));
                assert!(p.adjoint().approx_eq(p, 1e-9));
            }
            assert!(sl.multiply(&a).unwrap().approx_eq(&a, 1e-9));
            assert!(a.multiply(&sr).unwrap().approx_eq(&a, 1e-9));
            assert_eq!(sl.rank_profile(DEFAULT_EPS).ranks, a.rank_profile(DEFAULT_EPS).ranks);
        }
    }

    #[test]
    fn peirce_on_matrix_unit() {
        let sh = shape(&[2]);
        let e = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        let mut a = AlgebraElement::zero(&sh);
        a.block_mut(0)[(0, 0)] = Complex64::from(1.0);
        a.block_mut(0)[(0, 1)] = Complex64::from(2.0);
        a.block_mut(0)[(1, 0)] = Complex64::from(3.0);
        a.block_mut(0)[(1, 1)] = Complex64::from(4.0);
        let (a2, a1, a0) = peirce_decompose(&a, &e).unwrap();
        assert!((a2.block(0)[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(a2.norm() - 1.0 < 1e-15);
        assert!((a1.block(0)[(0, 1)].re - 2.0).abs() < 1e-15);
        assert!((a1.block(0)[(1, 0)].re - 3.0).abs() < 1e-15);
        assert!((a0.block(0)[(1, 1)].re - 4.0).abs() < 1e-15);
        let sum = a2.add(&a1).unwrap().add(&a0).unwrap();
        assert!(sum.approx_eq(&a, 0.0));
    }

    #[test]
    fn peirce_extremes() {
        let sh = shape(&[2, 3]);
        let a = AlgebraElement::random(&sh, 4, RandomKind::Gaussian).unwrap();
        let one = AlgebraElement::unit(&sh);
        let (a2, a1, a0) = peirce_decompose(&a, &one).unwrap();
        assert!(a2.approx_eq(&a, 1e-12));
        assert!(a1.norm() < 1e-12 && a0.norm() < 1e-12);

        let zero = AlgebraElement::zero(&sh);
        let (b2, b1, b0) = peirce_decompose(&a, &zero).unwrap();
        assert!(b0.approx_eq(&a, 1e-12));
        assert!(b1.norm() < 1e-12 && b2.norm() < 1e-12);

        let not_pi = one.scale(Complex64::from(0.5));
        assert!(peirce_decompose(&a, &not_pi).is_err());
    }

    #[test]
    fn minpi_json_shape() {
        let sh = shape(&[2]);
        let a = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap();
        let d = minpi_decompose(&a, DEFAULT_EPS);
        let v = d.to_json_value();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 1);
        assert!(arr[0].get("block").is_some());
        assert!(arr[0].get("lambda").is_some());
        assert!(arr[0].get("e").is_some());
        assert!(arr[0].get("f").is_some());
    }
}
