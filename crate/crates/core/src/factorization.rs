//! Explicit factorizations of an element through zero-product pairs.
//!
//! Given `xy = 0`, a factorization of `c` through `(x, y)` is a pair `(a, b)`
//! with `ay = 0`, `xb = 0` and `ab = c`. Under the rank hypothesis
//! `rank(π_i(c)) ≤ n_i − 2` such pairs exist for every zero-product pair of
//! rank-one partial isometries; this module builds them, together with the
//! generalized variant where `x` or `y` is split into two parts.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{checked_svd, stream_rng, AlgebraElement, AlgebraShape, CMat, CVec, DEFAULT_EPS};
use crate::error::{Result, ZpdError};
use crate::minpi::{block_svd_terms, rank_one_product_zero, RankOneOperator};

/// Which branch of the direct-sum dispatch produced a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DispatchCase {
    /// `u`, `v` in the same block.
    SameBlock,
    /// Different blocks, `c` vanishing in both.
    CrossBothZero,
    /// Different blocks, `c` nonzero only in the block of `u`.
    CrossFirstNonzero,
    /// Different blocks, `c` nonzero only in the block of `v`.
    CrossSecondNonzero,
    /// Different blocks, `c` nonzero in both.
    CrossBothNonzero,
}

/// A pair `(a, b)` certifying that `c` factorizes through some `(x, y)`,
/// together with the three defining residuals.
#[derive(Debug, Clone)]
pub struct FactorizationWitness {
    pub a: AlgebraElement,
    pub b: AlgebraElement,
    /// `‖a·y‖`
    pub residual_ay: f64,
    /// `‖x·b‖`
    pub residual_xb: f64,
    /// `‖a·b − c‖`
    pub residual_abc: f64,
    pub case: DispatchCase,
}

impl FactorizationWitness {
    fn measured(
        a: AlgebraElement,
        b: AlgebraElement,
        x: &AlgebraElement,
        y: &AlgebraElement,
        c: &AlgebraElement,
        case: DispatchCase,
    ) -> Result<Self> {
        let residual_ay = a.multiply(y)?.norm();
        let residual_xb = x.multiply(&b)?.norm();
        let residual_abc = a.multiply(&b)?.sub(c)?.norm();
        Ok(FactorizationWitness { a, b, residual_ay, residual_xb, residual_abc, case })
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_ay.max(self.residual_xb).max(self.residual_abc)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "a": self.a,
            "b": self.b,
            "residual_ay": self.residual_ay,
            "residual_xb": self.residual_xb,
            "residual_abc": self.residual_abc,
            "case": self.case,
        })
    }
}

/// How a generalized witness splits its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SplitSide {
    None,
    Left,
    Right,
    Both,
}

/// One part of a generalized witness: the `(x_part, y_part)` indices it
/// certifies plus the factorization itself.
#[derive(Debug, Clone)]
pub struct GeneralizedPart {
    pub x_index: usize,
    pub y_index: usize,
    pub witness: FactorizationWitness,
}

/// Generalized factorization of `c` through `(x, y)`: `x` and/or `y` may be
/// split into two summands, each combination carrying its own witness.
#[derive(Debug, Clone)]
pub struct GeneralizedWitness {
    pub split_side: SplitSide,
    /// One element when unsplit, two summing to `x` otherwise.
    pub x_parts: Vec<AlgebraElement>,
    pub y_parts: Vec<AlgebraElement>,
    pub parts: Vec<GeneralizedPart>,
}

impl GeneralizedWitness {
    pub fn max_residual(&self) -> f64 {
        self.parts.iter().map(|p| p.witness.max_residual()).fold(0.0, f64::max)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "split_side": self.split_side,
            "x_parts": self.x_parts,
            "y_parts": self.y_parts,
            "parts": self.parts.iter().map(|p| serde_json::json!({
                "x_index": p.x_index,
                "y_index": p.y_index,
                "witness": p.witness.to_json_value(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn local_threshold(m: &CMat) -> f64 {
    let sv = checked_svd(m).sigma;
    let sigma_max = sv.iter().copied().fold(0.0_f64, f64::max);
    DEFAULT_EPS * sigma_max * m.nrows() as f64
}

/// Orthonormal vectors spanning `span(exclude)^⊥` in `C^n`, built by
/// projecting the standard basis and running modified Gram-Schmidt with one
/// reorthogonalization pass; vectors of norm < 1e-6 are discarded and ties
/// are broken by basis order.
pub(crate) fn orthonormal_complement(exclude: &[CVec], n: usize, needed: usize) -> Result<Vec<CVec>> {
    // orthonormalize the excluded set first so projections are exact
    let mut excl: Vec<CVec> = Vec::new();
    for v in exclude {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &excl {
                let coef = u.dotc(&w);
                w -= u * coef;
            }
        }
        if w.norm() > 1e-10 {
            let norm = w.norm();
            excl.push(w / Complex64::from(norm));
        }
    }
    let mut out: Vec<CVec> = Vec::new();
    for t in 0..n {
        if out.len() == needed {
            break;
        }
        let mut w = CVec::zeros(n);
        w[t] = Complex64::new(1.0, 0.0);
        for _pass in 0..2 {
            for u in excl.iter().chain(out.iter()) {
                let coef = u.dotc(&w);
                w -= u * coef;
            }
        }
        let norm = w.norm();
        if norm >= 1e-6 {
            out.push(w / Complex64::from(norm));
        }
    }
    if out.len() < needed {
        return Err(ZpdError::InsufficientComplement { needed, available: out.len() });
    }
    Ok(out)
}

/// Core single-block construction: with `c = Σ α_n e_n ⊗ f_n` and an
/// orthonormal family `{h_n}`, returns `a = Σ α_n^{1/2} e_n ⊗ h_n` and
/// `b = Σ α_n^{1/2} h_n ⊗ f_n`, so `ab = c` and the `h_n` constraints carry
/// the annihilation requirements.
fn assemble_from_terms(
    terms: &[(f64, CVec, CVec)],
    hs: &[CVec],
    n: usize,
) -> (CMat, CMat) {
    let mut a = CMat::zeros(n, n);
    let mut b = CMat::zeros(n, n);
    for ((alpha, e, f), h) in terms.iter().zip(hs) {
        let s = Complex64::from(alpha.sqrt());
        a += (e * h.adjoint()) * s;
        b += (h * f.adjoint()) * s;
    }
    (a, b)
}

fn block_rank(m: &CMat) -> usize {
    let thr = local_threshold(m);
    checked_svd(m).sigma.iter().filter(|&&s| s > thr).count()
}

/// Single-block factorization of `c_block` through a zero-product pair of
/// rank-one operators in a block of dimension `n`: the returned `(a, b)`
/// satisfy `a·v = 0`, `u·b = 0`, `a·b = c_block`.
pub fn factorize_through_block(
    c_block: &CMat,
    u: &RankOneOperator,
    v: &RankOneOperator,
) -> Result<(CMat, CMat)> {
    let n = c_block.nrows();
    if c_block.ncols() != n || u.e().len() != n || v.e().len() != n {
        return Err(ZpdError::ShapeMismatch("block factorization needs square inputs of one size".into()));
    }
    let inner = u.f().dotc(v.e()).norm();
    if inner > DEFAULT_EPS {
        return Err(ZpdError::RankOnePairNotZero { inner });
    }
    let rank = block_rank(c_block);
    if rank + 2 > n {
        return Err(ZpdError::RankHypothesisViolated { block: 0, rank, dim: n });
    }
    let terms = block_svd_terms(c_block, local_threshold(c_block));
    let hs = orthonormal_complement(&[u.f().clone(), v.e().clone()], n, terms.len())?;
    Ok(assemble_from_terms(&terms, &hs, n))
}

/// Like [`factorize_through_block`] but constrained on one side only:
/// `u·b = 0` is required, `a` is unconstrained. Used for the auxiliary
/// constructions in the cross-block cases.
fn factorize_block_left(c_block: &CMat, u: &RankOneOperator) -> Result<(CMat, CMat)> {
    let n = c_block.nrows();
    let rank = block_rank(c_block);
    if rank + 2 > n {
        return Err(ZpdError::RankHypothesisViolated { block: 0, rank, dim: n });
    }
    let terms = block_svd_terms(c_block, local_threshold(c_block));
    let hs = orthonormal_complement(&[u.f().clone()], n, terms.len())?;
    Ok(assemble_from_terms(&terms, &hs, n))
}

/// One-sided variant requiring `a·v = 0` only.
fn factorize_block_right(c_block: &CMat, v: &RankOneOperator) -> Result<(CMat, CMat)> {
    let n = c_block.nrows();
    let rank = block_rank(c_block);
    if rank + 2 > n {
        return Err(ZpdError::RankHypothesisViolated { block: 0, rank, dim: n });
    }
    let terms = block_svd_terms(c_block, local_threshold(c_block));
    let hs = orthonormal_complement(&[v.e().clone()], n, terms.len())?;
    Ok(assemble_from_terms(&terms, &hs, n))
}

/// Factorizes `c` through the zero-product rank-one pair `(u, v)` in a
/// direct sum, dispatching on the block membership of `u` and `v` and on
/// which of the two blocks carry a nonzero part of `c`.
pub fn factorize_through(
    c: &AlgebraElement,
    u: &RankOneOperator,
    v: &RankOneOperator,
) -> Result<FactorizationWitness> {
    let shape = c.shape();
    shape.check_block(u.block())?;
    shape.check_block(v.block())?;
    if !rank_one_product_zero(u, v, DEFAULT_EPS) {
        let inner = if u.block() == v.block() { u.f().dotc(v.e()).norm() } else { 0.0 };
        return Err(ZpdError::RankOnePairNotZero { inner });
    }
    let (rh_ok, profile) = c.satisfies_rank_hypothesis(DEFAULT_EPS);
    if !rh_ok {
        let (block, (&rank, &dim)) = profile
            .ranks
            .iter()
            .zip(shape.block_dims())
            .enumerate()
            .map(|(i, p)| (i, p))
            .find(|(_, (&r, &n))| r + 2 > n)
            .unwrap();
        return Err(ZpdError::RankHypothesisViolated { block, rank, dim });
    }

    let x = u.to_element(shape)?;
    let y = v.to_element(shape)?;
    let mu = u.block();
    let nu = v.block();

    if mu == nu {
        let (a_mu, b_mu) = factorize_through_block(c.block(mu), u, v)?;
        let mut a = AlgebraElement::unit_off_block(shape, mu)?;
        *a.block_mut(mu) = a_mu;
        let mut b = c.off_block(mu)?;
        *b.block_mut(mu) = b_mu;
        return FactorizationWitness::measured(a, b, &x, &y, c, DispatchCase::SameBlock);
    }

    let tol_mu = local_threshold(c.block(mu));
    let tol_nu = local_threshold(c.block(nu));
    let c_mu_zero = c.block(mu).norm() <= tol_mu.max(1e-300);
    let c_nu_zero = c.block(nu).norm() <= tol_nu.max(1e-300);

    if c_mu_zero && c_nu_zero {
        let a = AlgebraElement::unit_off_blocks(shape, mu, nu)?;
        let b = c.clone();
        return FactorizationWitness::measured(a, b, &x, &y, c, DispatchCase::CrossBothZero);
    }

    let mut a = AlgebraElement::unit_off_blocks(shape, mu, nu)?;
    let mut b = c.off_blocks(mu, nu)?;
    let case;
    if !c_mu_zero && c_nu_zero {
        let (a_mu, b_mu) = factorize_block_left(c.block(mu), u)?;
        *a.block_mut(mu) = a_mu;
        *b.block_mut(mu) = b_mu;
        case = DispatchCase::CrossFirstNonzero;
    } else if c_mu_zero && !c_nu_zero {
        let (a_nu, b_nu) = factorize_block_right(c.block(nu), v)?;
        *a.block_mut(nu) = a_nu;
        *b.block_mut(nu) = b_nu;
        case = DispatchCase::CrossSecondNonzero;
    } else {
        let (a_mu, b_mu) = factorize_block_left(c.block(mu), u)?;
        let (a_nu, b_nu) = factorize_block_right(c.block(nu), v)?;
        *a.block_mut(mu) = a_mu;
        *b.block_mut(mu) = b_mu;
        *a.block_mut(nu) = a_nu;
        *b.block_mut(nu) = b_nu;
        case = DispatchCase::CrossBothNonzero;
    }
    FactorizationWitness::measured(a, b, &x, &y, c, case)
}

/// Recomputes the three residuals of `w` against `(x, y, c)` and compares to
/// `tol·(1 + ‖c‖)`.
pub fn verify_witness(
    x: &AlgebraElement,
    y: &AlgebraElement,
    c: &AlgebraElement,
    w: &FactorizationWitness,
    tol: f64,
) -> Result<bool> {
    let ray = w.a.multiply(y)?.norm();
    let rxb = x.multiply(&w.b)?.norm();
    let rab = w.a.multiply(&w.b)?.sub(c)?.norm();
    let bound = tol * (1.0 + c.norm());
    Ok(ray <= bound && rxb <= bound && rab <= bound)
}

/// Orthonormal basis of `ker(x) ∩ range(y)^⊥` in `C^n`: the joint kernel of
/// the stacked constraints `x h = 0`, `y* h = 0`.
fn joint_kernel(x: Option<&CMat>, y: Option<&CMat>, n: usize) -> Vec<CVec> {
    let rows = x.map_or(0, |m| m.nrows()) + y.map_or(0, |m| m.nrows());
    if rows == 0 {
        return (0..n)
            .map(|t| {
                let mut v = CVec::zeros(n);
                v[t] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
    }
    let mut stacked = CMat::zeros(rows, n);
    let mut at = 0;
    if let Some(m) = x {
        stacked.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        at = m.nrows();
    }
    if let Some(m) = y {
        stacked.view_mut((at, 0), (m.nrows(), n)).copy_from(&m.adjoint());
    }
    let svd = checked_svd(&stacked);
    let sigma_max = svd.sigma.iter().copied().fold(0.0_f64, f64::max);
    let thr = DEFAULT_EPS * sigma_max * n as f64;
    let mut out = Vec::new();
    for (j, &s) in svd.sigma.iter().enumerate() {
        if s <= thr {
            out.push(svd.v_t.row(j).transpose().map(|z| z.conj()));
        }
    }
    // rows of v_t only cover min(rows, n) directions; pad with the exact
    // complement when the stack is wide
    if svd.sigma.len() < n {
        let covered: Vec<CVec> = (0..svd.sigma.len())
            .map(|j| svd.v_t.row(j).transpose().map(|z| z.conj()))
            .collect();
        if let Ok(extra) = orthonormal_complement(&covered, n, n - svd.sigma.len()) {
            out.extend(extra);
        }
    }
    out
}

/// Block-level generalized construction: `(a_i, b_i)` with `a_i y_i = 0`,
/// `x_i b_i = 0`, `a_i b_i = c_i`, using `{h_n} ⊆ ker(x_i) ∩ range(y_i)^⊥`.
fn gen_block_factor(c_i: &CMat, x_i: Option<&CMat>, y_i: Option<&CMat>) -> Result<(CMat, CMat)> {
    let n = c_i.nrows();
    let terms = block_svd_terms(c_i, local_threshold(c_i));
    let pool = joint_kernel(x_i, y_i, n);
    if pool.len() < terms.len() {
        return Err(ZpdError::InsufficientComplement { needed: terms.len(), available: pool.len() });
    }
    Ok(assemble_from_terms(&terms, &pool[..terms.len()], n))
}

fn support_block(el: &AlgebraElement, tol: f64) -> Result<Option<usize>> {
    let mut found = None;
    for (i, b) in el.blocks().iter().enumerate() {
        if b.norm() > tol {
            if found.is_some() {
                return Err(ZpdError::NotSingleBlock);
            }
            found = Some(i);
        }
    }
    Ok(found)
}

fn split_element(el: &AlgebraElement) -> Result<(AlgebraElement, AlgebraElement)> {
    let dec = crate::minpi::minpi_decompose(el, DEFAULT_EPS);
    let (first, second) = dec.split_halves();
    Ok((first.reconstruct()?, second.reconstruct()?))
}

fn cross_block_parts(
    c: &AlgebraElement,
    x: &AlgebraElement,
    y: &AlgebraElement,
    i: usize,
    j: usize,
) -> Result<(AlgebraElement, AlgebraElement)> {
    let shape = c.shape();
    let (a_i, b_i) = gen_block_factor(c.block(i), Some(x.block(i)), None)?;
    let (a_j, b_j) = gen_block_factor(c.block(j), None, Some(y.block(j)))?;
    let mut a = AlgebraElement::unit_off_blocks(shape, i, j)?;
    let mut b = c.off_blocks(i, j)?;
    *a.block_mut(i) = a_i;
    *b.block_mut(i) = b_i;
    *a.block_mut(j) = a_j;
    *b.block_mut(j) = b_j;
    Ok((a, b))
}

fn same_block_parts(
    c: &AlgebraElement,
    x: &AlgebraElement,
    y: &AlgebraElement,
    i: usize,
) -> Result<(AlgebraElement, AlgebraElement)> {
    let shape = c.shape();
    let (a_i, b_i) = gen_block_factor(c.block(i), Some(x.block(i)), Some(y.block(i)))?;
    let mut a = AlgebraElement::unit_off_block(shape, i)?;
    let mut b = c.off_block(i)?;
    *a.block_mut(i) = a_i;
    *b.block_mut(i) = b_i;
    Ok((a, b))
}

/// Generalized factorization of `c` through `(x, y)` with `xy = 0` and each
/// of `x`, `y` supported on a single block. When the plain construction runs
/// out of orthonormal directions, `x` and/or `y` are split into two
/// lower-rank summands and each combination receives its own witness.
pub fn generalized_factorize(
    c: &AlgebraElement,
    x: &AlgebraElement,
    y: &AlgebraElement,
    tol: f64,
) -> Result<GeneralizedWitness> {
    let shape = c.shape();
    if x.shape() != shape || y.shape() != shape {
        return Err(ZpdError::ShapeMismatch("c, x, y must share a shape".into()));
    }
    let xy = x.multiply(y)?.norm();
    let bound = tol * (1.0 + x.norm() * y.norm());
    if xy > bound {
        return Err(ZpdError::NotZeroProductPair { residual: xy, tol: bound });
    }
    let (rh_ok, profile) = c.satisfies_rank_hypothesis(DEFAULT_EPS);
    if !rh_ok {
        let (block, (&rank, &dim)) = profile
            .ranks
            .iter()
            .zip(shape.block_dims())
            .enumerate()
            .map(|(i, p)| (i, p))
            .find(|(_, (&r, &n))| r + 2 > n)
            .unwrap();
        return Err(ZpdError::RankHypothesisViolated { block, rank, dim });
    }
    let scale = (x.norm().max(y.norm())).max(1.0);
    // single-block support is validated inside the per-part construction
    support_block(x, DEFAULT_EPS * scale)?;
    support_block(y, DEFAULT_EPS * scale)?;

    let build = |a: AlgebraElement, b: AlgebraElement, xp: &AlgebraElement, yp: &AlgebraElement| {
        FactorizationWitness::measured(a, b, xp, yp, c, DispatchCase::SameBlock)
    };

    // attempts the unsplit construction for one (x_part, y_part) pair
    let plain = |xp: &AlgebraElement, yp: &AlgebraElement| -> Result<FactorizationWitness> {
        match (support_block(xp, DEFAULT_EPS * scale)?, support_block(yp, DEFAULT_EPS * scale)?) {
            (None, None) => build(AlgebraElement::unit(shape), c.clone(), xp, yp),
            (Some(i), None) => {
                let (a, b) = same_block_parts(c, xp, &AlgebraElement::zero(shape), i)?;
                build(a, b, xp, yp)
            }
            (None, Some(j)) => {
                let (a, b) = same_block_parts(c, &AlgebraElement::zero(shape), yp, j)?;
                build(a, b, xp, yp)
            }
            (Some(i), Some(j)) if i == j => {
                let (a, b) = same_block_parts(c, xp, yp, i)?;
                build(a, b, xp, yp)
            }
            (Some(i), Some(j)) => {
                let (a, b) = cross_block_parts(c, xp, yp, i, j)?;
                build(a, b, xp, yp)
            }
        }
    };

    if let Ok(w) = plain(x, y) {
        return Ok(GeneralizedWitness {
            split_side: SplitSide::None,
            x_parts: vec![x.clone()],
            y_parts: vec![y.clone()],
            parts: vec![GeneralizedPart { x_index: 0, y_index: 0, witness: w }],
        });
    }

    // prefer splitting the left side first
    let (x1, x2) = split_element(x)?;
    let left_parts: Result<Vec<_>> = [&x1, &x2]
        .iter()
        .enumerate()
        .map(|(k, xp)| {
            plain(xp, y).map(|w| GeneralizedPart { x_index: k, y_index: 0, witness: w })
        })
        .collect();
    if let Ok(parts) = left_parts {
        return Ok(GeneralizedWitness {
            split_side: SplitSide::Left,
            x_parts: vec![x1, x2],
            y_parts: vec![y.clone()],
            parts,
        });
    }

    let (y1, y2) = split_element(y)?;
    let right_parts: Result<Vec<_>> = [&y1, &y2]
        .iter()
        .enumerate()
        .map(|(k, yp)| {
            plain(x, yp).map(|w| GeneralizedPart { x_index: 0, y_index: k, witness: w })
        })
        .collect();
    if let Ok(parts) = right_parts {
        return Ok(GeneralizedWitness {
            split_side: SplitSide::Right,
            x_parts: vec![x.clone()],
            y_parts: vec![y1, y2],
            parts,
        });
    }

    let mut parts = Vec::with_capacity(4);
    for (kx, xp) in [&x1, &x2].iter().enumerate() {
        for (ky, yp) in [&y1, &y2].iter().enumerate() {
            let w = plain(xp, yp)?;
            parts.push(GeneralizedPart { x_index: kx, y_index: ky, witness: w });
        }
    }
    Ok(GeneralizedWitness {
        split_side: SplitSide::Both,
        x_parts: vec![x1, x2],
        y_parts: vec![y1, y2],
        parts,
    })
}

/// Deterministic pool of zero-product pairs spanning both same-block and
/// cross-block directions; the first entries are fixed matrix-unit pairs,
/// the rest are seeded random rank-one pairs cycling over ordered block
/// pairs. Every returned pair satisfies `xy = 0` to machine precision.
pub fn zero_fiber_generators(
    shape: &AlgebraShape,
    count: usize,
    seed: u64,
) -> Vec<(AlgebraElement, AlgebraElement)> {
    let mut out = Vec::with_capacity(count);
    let k = shape.num_blocks();
    for i in 0..k {
        if out.len() == count {
            return out;
        }
        if shape.block_dim(i) >= 2 {
            let x = AlgebraElement::matrix_unit(shape, i, 0, 1).unwrap();
            let y = AlgebraElement::matrix_unit(shape, i, 0, 0).unwrap();
            out.push((x, y));
        }
    }
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            if out.len() == count {
                return out;
            }
            let x = AlgebraElement::matrix_unit(shape, i, 0, 0).unwrap();
            let y = AlgebraElement::matrix_unit(shape, j, 0, 0).unwrap();
            out.push((x, y));
        }
    }
    let mut rng = stream_rng(seed, 0x2f9e);
    let mut pair_cycle: Vec<(usize, usize)> = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i == j && shape.block_dim(i) < 2 {
                continue;
            }
            pair_cycle.push((i, j));
        }
    }
    let mut t = 0;
    while out.len() < count {
        let (i, j) = pair_cycle[t % pair_cycle.len()];
        t += 1;
        let ni = shape.block_dim(i);
        let nj = shape.block_dim(j);
        let ex = random_unit_vector(ni, &mut rng);
        let fx = random_unit_vector(ni, &mut rng);
        let ey;
        if i == j {
            // same block: pick e_y ⊥ f_x so that xy = 0 exactly
            match orthonormal_complement(&[fx.clone()], ni, 1) {
                Ok(mut hs) => ey = hs.remove(0),
                Err(_) => continue,
            }
        } else {
            ey = random_unit_vector(nj, &mut rng);
        }
        let fy = random_unit_vector(nj, &mut rng);
        let x = RankOneOperator::new(i, ex, fx).unwrap().to_element(shape).unwrap();
        let y = RankOneOperator::new(j, ey, fy).unwrap().to_element(shape).unwrap();
        out.push((x, y));
    }
    out
}

pub(crate) fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> CVec {
    loop {
        let v = CVec::from_fn(n, |_, _| {
            Complex64::new(
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
            )
        });
        let norm = v.norm();
        if norm > 1e-6 {
            return v / Complex64::from(norm);
        }
    }
}
