//! Bilinear maps on a direct sum of matrix blocks, fiber sampling, the
//! product-property tests, factorization through multiplication, and the
//! determinedness rank criterion with its negative certificates.
//!
//! A bilinear map `V: A×A → C^m` is stored as `m` coefficient matrices over
//! the vectorization basis: `V(a,b)_t = vec(a)^T M_t vec(b)`. Determinedness
//! at `c` is decided by comparing the span of sampled fiber differences
//! `a⊗b − a'⊗b'` (over `ab = a'b' = c`) with the kernel of the linearized
//! multiplication `μ`, which has dimension `dim(A)² − dim(A)`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{
    checked_svd, stream_rng, AlgebraElement, AlgebraShape, CMat, CVec, DEFAULT_EPS,
};
use crate::error::{Result, ZpdError};
use crate::factorization::{
    factorize_through, orthonormal_complement, random_unit_vector, zero_fiber_generators,
};
use crate::minpi::RankOneOperator;

/// Singular values below `1e-7·σ_max` count as zero in the big rank
/// computations; looser than the elementwise tolerance because errors
/// accumulate over `dim(A)²` columns.
pub const RANK_TOL_LARGE: f64 = 1e-7;

/// A bilinear map `A×A → C^m` over the fixed vectorization basis.
#[derive(Debug, Clone)]
pub struct BilinearMap {
    shape: AlgebraShape,
    /// One `d×d` coefficient matrix per output coordinate.
    coeffs: Vec<CMat>,
}

impl BilinearMap {
    pub fn new(shape: AlgebraShape, coeffs: Vec<CMat>) -> Result<Self> {
        let d = shape.dim();
        if coeffs.is_empty() {
            return Err(ZpdError::InvalidArgument("codomain dimension must be at least 1".into()));
        }
        if coeffs.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(ZpdError::ShapeMismatch(format!("coefficient matrices must be {d}x{d}")));
        }
        Ok(BilinearMap { shape, coeffs })
    }

    pub fn zero(shape: AlgebraShape, codomain_dim: usize) -> Result<Self> {
        let d = shape.dim();
        BilinearMap::new(shape, vec![CMat::zeros(d, d); codomain_dim])
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn codomain_dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    /// Frobenius norm of the whole coefficient tensor.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn evaluate(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<CVec> {
        if a.shape() != &self.shape || b.shape() != &self.shape {
            return Err(ZpdError::ShapeMismatch("bilinear map evaluated on foreign shape".into()));
        }
        let va = a.to_vector();
        let vb = b.to_vector();
        Ok(CVec::from_iterator(
            self.coeffs.len(),
            self.coeffs.iter().map(|m| va.dot(&(m * &vb))),
        ))
    }

    /// `V(a,b) = ψ(vec(ab))` for a linear `ψ` given as an `m×d` matrix.
    pub fn from_linear_on_product(shape: AlgebraShape, psi: &CMat) -> Result<Self> {
        let d = shape.dim();
        if psi.ncols() != d {
            return Err(ZpdError::ShapeMismatch(format!("psi must have {d} columns")));
        }
        let mu = multiplication_tensor(&shape);
        let composed = psi * mu;
        let coeffs = (0..psi.nrows())
            .map(|t| {
                let mut m = CMat::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        m[(i, j)] = composed[(t, i * d + j)];
                    }
                }
                m
            })
            .collect();
        BilinearMap::new(shape, coeffs)
    }

    /// `V(a,b) = tr(ab)` (sum of block traces).
    pub fn multiplication_trace(shape: AlgebraShape) -> Self {
        let d = shape.dim();
        let mut psi = CMat::zeros(1, d);
        for i in 0..shape.num_blocks() {
            let n = shape.block_dim(i);
            for r in 0..n {
                psi[(0, shape.entry_index(i, r, r))] = Complex64::new(1.0, 0.0);
            }
        }
        BilinearMap::from_linear_on_product(shape, &psi).unwrap()
    }

    /// Pullback by left/right multipliers: `(a,b) ↦ V(g·a, b·h)`.
    pub fn compose_with_multipliers(
        &self,
        g: &AlgebraElement,
        h: &AlgebraElement,
    ) -> Result<BilinearMap> {
        let l = g.left_multiplication_matrix();
        let r = h.right_multiplication_matrix();
        let coeffs = self.coeffs.iter().map(|m| l.transpose() * m * &r).collect();
        BilinearMap::new(self.shape.clone(), coeffs)
    }

    /// Linearization `Ṽ` as an `m×d²` matrix with column index `i·d + j`.
    pub fn linearized(&self) -> CMat {
        let d = self.shape.dim();
        let mut out = CMat::zeros(self.coeffs.len(), d * d);
        for (t, m) in self.coeffs.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    out[(t, i * d + j)] = m[(i, j)];
                }
            }
        }
        out
    }
}

/// Linearized multiplication `μ: A⊗A → A` as a `d×d²` matrix: column
/// `i·d + j` holds `vec(E_i·E_j)`.
pub fn multiplication_tensor(shape: &AlgebraShape) -> CMat {
    let d = shape.dim();
    let mut mu = CMat::zeros(d, d * d);
    for blk in 0..shape.num_blocks() {
        let n = shape.block_dim(blk);
        for r in 0..n {
            for s in 0..n {
                let i = shape.entry_index(blk, r, s);
                for u in 0..n {
                    // E_{rs}·E_{su} = E_{ru}
                    let j = shape.entry_index(blk, s, u);
                    let row = shape.entry_index(blk, r, u);
                    mu[(row, i * d + j)] = Complex64::new(1.0, 0.0);
                }
            }
        }
    }
    mu
}

/// Sampled pairs from the fiber `{(a,b) : ab = c}`.
#[derive(Debug, Clone)]
pub struct FiberSample {
    pub pairs: Vec<(AlgebraElement, AlgebraElement)>,
    pub target: AlgebraElement,
    pub max_residual: f64,
}

fn well_conditioned_gaussian<R: Rng>(shape: &AlgebraShape, rng: &mut R) -> Result<AlgebraElement> {
    // tighter conditioning than invertible_gaussian_with so that inverses
    // keep fiber residuals near machine precision
    for _ in 0..200 {
        let g = AlgebraElement::gaussian_with(shape, rng);
        let sv = g.block_singular_values();
        let ok = sv.iter().all(|s| {
            let max = s.iter().copied().fold(0.0_f64, f64::max);
            let min = s.iter().copied().fold(f64::INFINITY, f64::min);
            max > 0.0 && min > 1e-2 * max
        });
        if ok {
            return Ok(g);
        }
    }
    Err(ZpdError::DegenerateRngStream { retries: 200 })
}

fn random_zero_product_rank_ones<R: Rng>(
    shape: &AlgebraShape,
    rng: &mut R,
) -> Option<(RankOneOperator, RankOneOperator)> {
    let k = shape.num_blocks();
    let bu = rng.gen::<usize>() % k;
    let bv = rng.gen::<usize>() % k;
    let nu = shape.block_dim(bu);
    let nv = shape.block_dim(bv);
    if bu == bv && nu < 2 {
        return None;
    }
    let eu = random_unit_vector(nu, rng);
    let fu = random_unit_vector(nu, rng);
    let ev = if bu == bv {
        orthonormal_complement(&[fu.clone()], nu, 1).ok()?.remove(0)
    } else {
        random_unit_vector(nv, rng)
    };
    let fv = random_unit_vector(nv, rng);
    Some((
        RankOneOperator::new(bu, eu, fu).unwrap(),
        RankOneOperator::new(bv, ev, fv).unwrap(),
    ))
}

/// Seeded sample of the fiber of `c`. For `c = 0` the pool of zero-product
/// generators is used; otherwise the sample mixes `(1, c)`, `(g, g⁻¹c)`,
/// `(cg, g⁻¹)` for well-conditioned Gaussian `g`, and, when the rank
/// hypothesis holds, witness-enriched quadruples
/// `(a,b), (a+x,b), (a,b+y), (a+x,b+y)` from random factorization witnesses.
pub fn sample_fiber(c: &AlgebraElement, count: usize, seed: u64) -> Result<FiberSample> {
    if count < 2 {
        return Err(ZpdError::InvalidArgument("fiber sample needs count >= 2".into()));
    }
    let shape = c.shape();
    let scale = 1.0 + c.norm();
    let accept = 1e-10 * scale;
    if c.is_zero(DEFAULT_EPS) {
        let pairs = zero_fiber_generators(shape, count, seed);
        let max_residual = pairs
            .iter()
            .map(|(x, y)| x.multiply(y).unwrap().norm())
            .fold(0.0, f64::max);
        return Ok(FiberSample { pairs, target: c.clone(), max_residual });
    }
    let mut rng = stream_rng(seed, 0xf1be);
    let (rh_ok, _) = c.satisfies_rank_hypothesis(DEFAULT_EPS);
    let mut pairs: Vec<(AlgebraElement, AlgebraElement)> = Vec::with_capacity(count);
    pairs.push((AlgebraElement::unit(shape), c.clone()));
    let mut max_residual = 0.0_f64;
    let mut strategy = 0usize;
    while pairs.len() < count {
        strategy += 1;
        let candidates: Vec<(AlgebraElement, AlgebraElement)> = if rh_ok && strategy % 3 == 0 {
            let Some((u, v)) = random_zero_product_rank_ones(shape, &mut rng) else {
                continue;
            };
            let Ok(w) = factorize_through(c, &u, &v) else { continue };
            let x = u.to_element(shape)?;
            let y = v.to_element(shape)?;
            let ax = w.a.add(&x)?;
            let by = w.b.add(&y)?;
            vec![(w.a.clone(), w.b.clone()), (ax.clone(), w.b), (w.a, by.clone()), (ax, by)]
        } else if strategy % 2 == 0 {
            let g = well_conditioned_gaussian(shape, &mut rng)?;
            let ginv = g.try_inverse().ok_or(ZpdError::DegenerateRngStream { retries: 0 })?;
            vec![(g, ginv.multiply(c)?)]
        } else {
            let g = well_conditioned_gaussian(shape, &mut rng)?;
            let ginv = g.try_inverse().ok_or(ZpdError::DegenerateRngStream { retries: 0 })?;
            vec![(c.multiply(&g)?, ginv)]
        };
        for (a, b) in candidates {
            if pairs.len() == count {
                break;
            }
            let residual = a.multiply(&b)?.sub(c)?.norm();
            if residual <= accept {
                max_residual = max_residual.max(residual);
                pairs.push((a, b));
            }
        }
    }
    Ok(FiberSample { pairs, target: c.clone(), max_residual })
}

/// Constancy of `V` on the sampled fiber: the only testable content of
/// "product property at c" at a fixed c. Returns the pass flag and the
/// maximum deviation from the first pair's value.
pub fn has_product_property_at(
    v: &BilinearMap,
    c: &AlgebraElement,
    fiber: &FiberSample,
    tol: f64,
) -> Result<(bool, f64)> {
    if fiber.pairs.is_empty() {
        return Err(ZpdError::EmptyFiber);
    }
    if !fiber.target.approx_eq(c, DEFAULT_EPS * (1.0 + c.norm())) {
        return Err(ZpdError::PreconditionFailed("fiber target differs from c".into()));
    }
    let base = v.evaluate(&fiber.pairs[0].0, &fiber.pairs[0].1)?;
    let mut worst = 0.0_f64;
    for (a, b) in &fiber.pairs[1..] {
        let dev = (v.evaluate(a, b)? - &base).norm();
        worst = worst.max(dev);
    }
    Ok((worst <= tol * (1.0 + v.norm()), worst))
}

/// Max `|V(x,y)|` over the zero-product generator pool, compared against
/// `tol·‖V‖`; the failing pair with the largest value is returned.
pub fn vanishes_on_zero_products(
    v: &BilinearMap,
    shape: &AlgebraShape,
    tol: f64,
    seed: u64,
) -> Result<(bool, f64, Option<(AlgebraElement, AlgebraElement)>)> {
    let count = 200.max(4 * shape.dim());
    let pool = zero_fiber_generators(shape, count, seed);
    let mut worst = 0.0_f64;
    let mut witness = None;
    for (x, y) in pool {
        let val = v.evaluate(&x, &y)?.norm();
        if val > worst {
            worst = val;
            witness = Some((x, y));
        }
    }
    let ok = worst <= tol * v.norm().max(1.0);
    Ok((ok, worst, if ok { None } else { witness }))
}

/// Least-squares factorization `V ≈ ψ∘μ`: `ψ = Ṽ·μ⁺`. The residual is the
/// worst violation of `V(a,b) = ψ(vec(ab))` over seeded random pairs, and is
/// small precisely when `V` has the product property.
pub fn factor_through_multiplication(v: &BilinearMap, _tol: f64) -> Result<(CMat, f64)> {
    let shape = v.shape().clone();
    let d = shape.dim();
    let mu = multiplication_tensor(&shape);
    let svd = checked_svd(&mu);
    let k = svd.sigma.len();
    let mut sig_inv = CMat::zeros(k, k);
    let sigma_max = svd.sigma.iter().copied().fold(0.0_f64, f64::max);
    for (j, &s) in svd.sigma.iter().enumerate() {
        if s > RANK_TOL_LARGE * sigma_max {
            sig_inv[(j, j)] = Complex64::from(1.0 / s);
        }
    }
    let pinv = svd.v_t.adjoint() * sig_inv * svd.u.adjoint();
    let psi = v.linearized() * pinv;
    let mut rng = stream_rng(0x95, 0);
    let _ = d;
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let a = AlgebraElement::gaussian_with(&shape, &mut rng);
        let b = AlgebraElement::gaussian_with(&shape, &mut rng);
        let lhs = v.evaluate(&a, &b)?;
        let rhs = &psi * a.multiply(&b)?.to_vector();
        worst = worst.max((lhs - rhs).norm() / (1.0 + a.norm() * b.norm()));
    }
    Ok((psi, worst))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "determined-consistent")]
    DeterminedConsistent,
    #[serde(rename = "not-determined")]
    NotDetermined,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    /// Corner-entry product map, valid at single-block `c` of rank `n−1`.
    Costara,
    /// `(a,b) ↦ (ba)^t`, valid at scalar multiples of the identity.
    Transpose,
}

/// A separating bilinear map: constant on the sampled fiber of `c` yet
/// nonzero on an explicit zero-product pair.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub map: BilinearMap,
    pub witness_x: AlgebraElement,
    pub witness_y: AlgebraElement,
    /// `‖V(witness_x, witness_y)‖`
    pub witness_value: f64,
    /// max deviation of the map over the sampled fiber
    pub fiber_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct DeterminednessReport {
    pub measured_rank: usize,
    pub expected_rank: usize,
    pub verdict: Verdict,
    pub samples_used: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub certificate: Option<Certificate>,
}

impl DeterminednessReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "measured_rank": self.measured_rank,
            "expected_rank": self.expected_rank,
            "verdict": self.verdict,
            "samples": self.samples_used,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "certificate": self.certificate.as_ref().map(|c| serde_json::json!({
                "kind": c.kind,
                "witness_x": c.witness_x,
                "witness_y": c.witness_y,
                "witness_value": c.witness_value,
                "fiber_deviation": c.fiber_deviation,
            })),
        })
    }
}

/// Rank of the span of vectorized tensors at threshold `1e-7·σ_max`.
fn span_rank(rows: Vec<CVec>, width: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m = CMat::zeros(rows.len(), width);
    for (i, r) in rows.iter().enumerate() {
        m.set_row(i, &r.transpose());
    }
    let sv = checked_svd(&m).sigma;
    let sigma_max = sv.iter().copied().fold(0.0_f64, f64::max);
    sv.iter().filter(|&&s| s > RANK_TOL_LARGE * sigma_max).count()
}

fn tensor_row(a: &AlgebraElement, b: &AlgebraElement, d: usize) -> CVec {
    let va = a.to_vector();
    let vb = b.to_vector();
    CVec::from_fn(d * d, |idx, _| va[idx / d] * vb[idx % d])
}

/// Tries to produce a certified counterexample map for `c` on this shape:
/// the corner map transported to any single-block `c` of rank `n−1`, or the
/// transpose map at scalar multiples of the identity.
pub fn negative_certificate(
    shape: &AlgebraShape,
    c: &AlgebraElement,
    fiber_samples: usize,
    seed: u64,
) -> Result<Option<Certificate>> {
    if shape.num_blocks() != 1 {
        return Ok(None);
    }
    let n = shape.block_dim(0);
    if n < 2 {
        return Ok(None);
    }
    let profile = c.rank_profile(DEFAULT_EPS);
    let rank = profile.ranks[0];

    // transpose certificate at c ≈ λ·1
    let lambda = c.block(0)[(0, 0)];
    let scaled_id = AlgebraElement::unit(shape).scale(lambda);
    if lambda.norm() > DEFAULT_EPS && c.approx_eq(&scaled_id, DEFAULT_EPS * (1.0 + c.norm())) {
        let (_, v) = transpose_counterexample(n)?;
        let x = AlgebraElement::matrix_unit(shape, 0, 0, 1)?;
        let y = AlgebraElement::matrix_unit(shape, 0, 0, 0)?;
        return finish_certificate(CertificateKind::Transpose, v, x, y, c, fiber_samples, seed);
    }

    if rank + 1 != n {
        return Ok(None);
    }
    // transport the corner map: c = g·c0·h with c0 = 1_{n−1} ⊕ 0
    let svd = checked_svd(c.block(0));
    let mut gsig = CMat::identity(n, n);
    for j in 0..(n - 1) {
        gsig[(j, j)] = Complex64::from(svd.sigma[j]);
    }
    let g_mat = &svd.u * gsig;
    let h_mat = svd.v_t.clone();
    let g = AlgebraElement::from_blocks(shape, vec![g_mat])?;
    let h = AlgebraElement::from_blocks(shape, vec![h_mat])?;
    let ginv = g.try_inverse().ok_or(ZpdError::NotInvertible {
        which: "corner transport g".into(),
        cond: f64::INFINITY,
    })?;
    let hinv = h.try_inverse().ok_or(ZpdError::NotInvertible {
        which: "corner transport h".into(),
        cond: f64::INFINITY,
    })?;
    let (_, v0) = costara_counterexample(n)?;
    let v = v0.compose_with_multipliers(&ginv, &hinv)?;
    let (x0, y0) = costara_witness(shape);
    let x = g.multiply(&x0)?;
    let y = y0.multiply(&h)?;
    finish_certificate(CertificateKind::Costara, v, x, y, c, fiber_samples, seed)
}

fn finish_certificate(
    kind: CertificateKind,
    map: BilinearMap,
    x: AlgebraElement,
    y: AlgebraElement,
    c: &AlgebraElement,
    fiber_samples: usize,
    seed: u64,
) -> Result<Option<Certificate>> {
    if x.multiply(&y)?.norm() > 1e-9 * (1.0 + x.norm() * y.norm()) {
        return Ok(None);
    }
    let value = map.evaluate(&x, &y)?.norm();
    if value < 0.1 {
        return Ok(None);
    }
    let fiber = sample_fiber(c, fiber_samples.max(64), seed)?;
    let (constant, dev) = has_product_property_at(&map, c, &fiber, 1e-8)?;
    if !constant {
        return Ok(None);
    }
    Ok(Some(Certificate {
        kind,
        map,
        witness_x: x,
        witness_y: y,
        witness_value: value,
        fiber_deviation: dev,
    }))
}

/// The zero-product pair on which the corner map takes the value 4: embedded
/// in the bottom-right 2×2 corner of the block.
fn costara_witness(shape: &AlgebraShape) -> (AlgebraElement, AlgebraElement) {
    let n = shape.block_dim(0);
    let mut a = AlgebraElement::zero(shape);
    let mut b = AlgebraElement::zero(shape);
    let p = n - 2;
    let av = [[1.0, 1.0], [2.0, 2.0]];
    let bv = [[-1.0, -2.0], [1.0, 2.0]];
    for r in 0..2 {
        for s in 0..2 {
            a.block_mut(0)[(p + r, p + s)] = Complex64::from(av[r][s]);
            b.block_mut(0)[(p + r, p + s)] = Complex64::from(bv[r][s]);
        }
    }
    (a, b)
}

/// Monte-Carlo determinedness test: the rank of the sampled fiber-difference
/// span against `dim(A)² − dim(A)`. A `not-determined` verdict is only
/// issued with a validated certificate; rank deficits without one are
/// `inconclusive`.
pub fn determinedness_rank(
    shape: &AlgebraShape,
    c: &AlgebraElement,
    sample_count: usize,
    seed: u64,
    tol: f64,
) -> Result<DeterminednessReport> {
    let d = shape.dim();
    let expected_rank = d * d - d;
    let rows: Vec<CVec> = if c.is_zero(DEFAULT_EPS) {
        zero_fiber_generators(shape, sample_count, seed)
            .iter()
            .map(|(a, b)| tensor_row(a, b, d))
            .collect()
    } else {
        let fiber = sample_fiber(c, sample_count, seed)?;
        let base = tensor_row(&fiber.pairs[0].0, &fiber.pairs[0].1, d);
        fiber.pairs[1..]
            .iter()
            .map(|(a, b)| tensor_row(a, b, d) - &base)
            .collect()
    };
    let samples_used = rows.len();
    let measured_rank = span_rank(rows, d * d);
    let mut verdict = Verdict::Inconclusive;
    let mut certificate = None;
    if measured_rank == expected_rank {
        verdict = Verdict::DeterminedConsistent;
    } else if let Some(cert) = negative_certificate(shape, c, 256, seed)? {
        verdict = Verdict::NotDetermined;
        certificate = Some(cert);
    }
    Ok(DeterminednessReport {
        measured_rank,
        expected_rank,
        verdict,
        samples_used,
        seed,
        tolerance: tol,
        certificate,
    })
}

/// The corner-entry map on `M_n`: `c = 1_{n−1} ⊕ 0` and
/// `V(a,b) = a_{nn}·b_{nn}`; constant (zero) on the fiber of `c` but equal
/// to 4 on an explicit zero-product pair.
pub fn costara_counterexample(n: usize) -> Result<(AlgebraElement, BilinearMap)> {
    if n < 2 {
        return Err(ZpdError::InvalidArgument("corner map needs n >= 2".into()));
    }
    let shape = AlgebraShape::new(vec![n])?;
    let mut c = AlgebraElement::unit(&shape);
    c.block_mut(0)[(n - 1, n - 1)] = Complex64::new(0.0, 0.0);
    let d = shape.dim();
    let idx = shape.entry_index(0, n - 1, n - 1);
    let mut m = CMat::zeros(d, d);
    m[(idx, idx)] = Complex64::new(1.0, 0.0);
    Ok((c, BilinearMap::new(shape, vec![m])?))
}

/// The classical witness pair for the corner map at `n = 2`, padded into the bottom
/// corner for larger `n`: `xy = 0` and `V(x,y) = 4`.
pub fn costara_zero_product_witness(n: usize) -> Result<(AlgebraElement, AlgebraElement)> {
    if n < 2 {
        return Err(ZpdError::InvalidArgument("corner map needs n >= 2".into()));
    }
    let shape = AlgebraShape::new(vec![n])?;
    Ok(costara_witness(&shape))
}

/// The transpose map on `M_n`: `c = 1_n` and `V(a,b) = (ba)^t`, valued in
/// `C^{n²}`; constant on the fiber of the identity but nonzero on `(e12, e11)`.
pub fn transpose_counterexample(n: usize) -> Result<(AlgebraElement, BilinearMap)> {
    if n < 2 {
        return Err(ZpdError::InvalidArgument("transpose map needs n >= 2".into()));
    }
    let shape = AlgebraShape::new(vec![n])?;
    let c = AlgebraElement::unit(&shape);
    let d = shape.dim();
    let mut coeffs = Vec::with_capacity(d);
    for r in 0..n {
        for s in 0..n {
            // output entry (r,s) of (ba)^t is Σ_k b_{sk} a_{kr}
            let mut m = CMat::zeros(d, d);
            for k in 0..n {
                let ia = shape.entry_index(0, k, r);
                let jb = shape.entry_index(0, s, k);
                m[(ia, jb)] = Complex64::new(1.0, 0.0);
            }
            coeffs.push(m);
        }
    }
    Ok((c, BilinearMap::new(shape, coeffs)?))
}

/// For zero-product-vanishing `V`, checks the balanced identity
/// `V(ax, b) = V(a, xb)` on seeded random triples.
pub fn balanced_identity_check(
    v: &BilinearMap,
    shape: &AlgebraShape,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<(bool, f64)> {
    let (vanishes, worst_zero, _) = vanishes_on_zero_products(v, shape, tol.max(1e-8), seed)?;
    if !vanishes {
        return Err(ZpdError::PreconditionFailed(format!(
            "map does not vanish on zero products (worst value {worst_zero:.3e})"
        )));
    }
    let mut rng = stream_rng(seed, 0xba1a);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let a = AlgebraElement::gaussian_with(shape, &mut rng);
        let x = AlgebraElement::gaussian_with(shape, &mut rng);
        let b = AlgebraElement::gaussian_with(shape, &mut rng);
        let lhs = v.evaluate(&a.multiply(&x)?, &b)?;
        let rhs = v.evaluate(&a, &x.multiply(&b)?)?;
        let scale = 1.0 + v.norm() * a.norm() * x.norm() * b.norm();
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    Ok((worst <= tol, worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(dims: &[usize]) -> AlgebraShape {
        AlgebraShape::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn trace_map_evaluates() {
        let sh = shape(&[2]);
        let v = BilinearMap::multiplication_trace(sh.clone());
        let e12 = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap();
        let e21 = AlgebraElement::matrix_unit(&sh, 0, 1, 0).unwrap();
        assert!(v.evaluate(&e12, &e12).unwrap().norm() < 1e-15);
        assert!((v.evaluate(&e12, &e21).unwrap()[0] - Complex64::from(1.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluate_is_bilinear() {
        let sh = shape(&[2, 3]);
        let mut rng = stream_rng(5, 1);
        let d = sh.dim();
        let coeffs: Vec<CMat> = (0..3)
            .map(|_| {
                CMat::from_fn(d, d, |_, _| {
                    Complex64::new(
                        rng.sample(rand_distr::StandardNormal),
                        rng.sample(rand_distr::StandardNormal),
                    )
                })
            })
            .collect();
        let v = BilinearMap::new(sh.clone(), coeffs).unwrap();
        let a = AlgebraElement::gaussian_with(&sh, &mut rng);
        let a2 = AlgebraElement::gaussian_with(&sh, &mut rng);
        let b = AlgebraElement::gaussian_with(&sh, &mut rng);
        let alpha = Complex64::new(0.3, -1.1);
        let lhs = v.evaluate(&a.scale(alpha).add(&a2).unwrap(), &b).unwrap();
        let rhs = v.evaluate(&a, &b).unwrap() * alpha + v.evaluate(&a2, &b).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn multiplication_tensor_matches_products() {
        let sh = shape(&[2, 2]);
        let mu = multiplication_tensor(&sh);
        let d = sh.dim();
        let mut rng = stream_rng(2, 9);
        for _ in 0..5 {
            let a = AlgebraElement::gaussian_with(&sh, &mut rng);
            let b = AlgebraElement::gaussian_with(&sh, &mut rng);
            let ab = a.multiply(&b).unwrap().to_vector();
            let tens = tensor_row(&a, &b, d);
            assert!((&mu * tens - ab).norm() < 1e-12);
        }
    }

    #[test]
    fn fiber_sample_products_match_target() {
        let sh = shape(&[3]);
        let c = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        let fiber = sample_fiber(&c, 60, 11).unwrap();
        assert_eq!(fiber.pairs.len(), 60);
        assert!(fiber.max_residual <= 1e-9 * (1.0 + c.norm()));
        assert!(fiber.pairs[0].0.approx_eq(&AlgebraElement::unit(&sh), 0.0));
    }

    #[test]
    fn trace_map_constant_on_fiber() {
        let sh = shape(&[3]);
        let c = AlgebraElement::random(&sh, 3, crate::algebra::RandomKind::Gaussian).unwrap();
        let v = BilinearMap::multiplication_trace(sh.clone());
        let fiber = sample_fiber(&c, 40, 7).unwrap();
        let (ok, dev) = has_product_property_at(&v, &c, &fiber, 1e-8).unwrap();
        assert!(ok, "trace map deviated {dev}");
    }

    #[test]
    fn entry_product_map_not_constant() {
        // V(a,b) = a_{11}·b_{22} is generically not constant on a fiber
        let sh = shape(&[2]);
        let d = sh.dim();
        let mut m = CMat::zeros(d, d);
        m[(sh.entry_index(0, 0, 0), sh.entry_index(0, 1, 1))] = Complex64::from(1.0);
        let v = BilinearMap::new(sh.clone(), vec![m]).unwrap();
        let c = AlgebraElement::unit(&sh);
        let fiber = sample_fiber(&c, 30, 13).unwrap();
        let (ok, _) = has_product_property_at(&v, &c, &fiber, 1e-8).unwrap();
        assert!(!ok);
    }

    #[test]
    fn factor_through_multiplication_trace() {
        let sh = shape(&[2]);
        let v = BilinearMap::multiplication_trace(sh);
        let (_, residual) = factor_through_multiplication(&v, 1e-9).unwrap();
        assert!(residual <= 1e-10);
    }

    #[test]
    fn factor_through_multiplication_rejects_transpose() {
        let (_, v) = transpose_counterexample(2).unwrap();
        let (_, residual) = factor_through_multiplication(&v, 1e-9).unwrap();
        assert!(residual > 0.05, "residual {residual}");
    }

    #[test]
    fn corner_map_reference_values() {
        let (c, v) = costara_counterexample(2).unwrap();
        let (x, y) = costara_zero_product_witness(2).unwrap();
        assert!(x.multiply(&y).unwrap().norm() <= 1e-14);
        let val = v.evaluate(&x, &y).unwrap();
        assert!((val[0] - Complex64::from(4.0)).norm() <= 1e-12);
        let fiber = sample_fiber(&c, 100, 3).unwrap();
        let (ok, _) = has_product_property_at(&v, &c, &fiber, 1e-8).unwrap();
        assert!(ok);
        // padded n = 3 witness
        let (_, v3) = costara_counterexample(3).unwrap();
        let (x3, y3) = costara_zero_product_witness(3).unwrap();
        assert!(x3.multiply(&y3).unwrap().norm() <= 1e-14);
        assert!((v3.evaluate(&x3, &y3).unwrap()[0] - Complex64::from(4.0)).norm() <= 1e-12);
    }

    #[test]
    fn transpose_map_values() {
        let sh = shape(&[2]);
        let (c, v) = transpose_counterexample(2).unwrap();
        let e12 = AlgebraElement::matrix_unit(&sh, 0, 0, 1).unwrap();
        let e11 = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        assert!(e12.multiply(&e11).unwrap().norm() == 0.0);
        let val = v.evaluate(&e12, &e11).unwrap();
        // (e11·e12)^t = e21
        let idx_e21 = 1 * 2 + 0;
        assert!((val[idx_e21] - Complex64::from(1.0)).norm() <= 1e-14);
        assert!((val.norm() - 1.0).abs() <= 1e-14);
        let fiber = sample_fiber(&c, 100, 5).unwrap();
        let (ok, _) = has_product_property_at(&v, &c, &fiber, 1e-8).unwrap();
        assert!(ok);
    }

    #[test]
    fn determinedness_m3_corner() {
        let sh = shape(&[3]);
        let c = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        let report = determinedness_rank(&sh, &c, 400, 1, 1e-9).unwrap();
        assert_eq!(report.measured_rank, 72);
        assert_eq!(report.expected_rank, 72);
        assert_eq!(report.verdict, Verdict::DeterminedConsistent);
    }

    #[test]
    fn determinedness_m2_corner_not_determined() {
        let sh = shape(&[2]);
        let c = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        let report = determinedness_rank(&sh, &c, 200, 1, 1e-9).unwrap();
        assert!(report.measured_rank <= 11);
        assert_eq!(report.verdict, Verdict::NotDetermined);
        let cert = report.certificate.unwrap();
        assert_eq!(cert.kind, CertificateKind::Costara);
        assert!((cert.witness_value - 4.0).abs() <= 1e-9);
    }

    #[test]
    fn determinedness_m2_identity_not_determined() {
        let sh = shape(&[2]);
        let c = AlgebraElement::unit(&sh);
        let report = determinedness_rank(&sh, &c, 200, 1, 1e-9).unwrap();
        assert_eq!(report.verdict, Verdict::NotDetermined);
        assert_eq!(report.certificate.unwrap().kind, CertificateKind::Transpose);
    }

    #[test]
    fn zpd_baseline_rank() {
        for dims in [vec![2], vec![2, 2]] {
            let sh = AlgebraShape::new(dims).unwrap();
            let d = sh.dim();
            let zero = AlgebraElement::zero(&sh);
            let report = determinedness_rank(&sh, &zero, 4 * d * d, 0, 1e-9).unwrap();
            assert_eq!(report.measured_rank, d * d - d);
            assert_eq!(report.verdict, Verdict::DeterminedConsistent);
        }
    }

    #[test]
    fn rank_monotone_in_samples() {
        let sh = shape(&[3]);
        let c = AlgebraElement::matrix_unit(&sh, 0, 0, 0).unwrap();
        let mut last = 0;
        for count in [40, 80, 160, 320] {
            let report = determinedness_rank(&sh, &c, count, 2, 1e-9).unwrap();
            assert!(report.measured_rank >= last);
            last = report.measured_rank;
        }
    }

    #[test]
    fn balanced_identity_for_factoring_maps() {
        let sh = shape(&[2]);
        let v = BilinearMap::multiplication_trace(sh.clone());
        let (ok, worst) = balanced_identity_check(&v, &sh, 50, 3, 1e-10).unwrap();
        assert!(ok, "worst {worst}");
        let (_, transpose) = transpose_counterexample(2).unwrap();
        assert!(balanced_identity_check(&transpose, &sh, 10, 3, 1e-8).is_err());
    }

    #[test]
    fn generalized_corner_certificate_for_rotated_c() {
        // any rank n−1 element of M_3 admits a transported corner certificate
        let sh = shape(&[3]);
        let mut rng = stream_rng(21, 77);
        let c = AlgebraElement::random_with_ranks(&sh, &[2], &mut rng).unwrap();
        let cert = negative_certificate(&sh, &c, 128, 4).unwrap().unwrap();
        assert_eq!(cert.kind, CertificateKind::Costara);
        assert!(cert.witness_value >= 3.9);
        assert!(cert.fiber_deviation <= 1e-8 * (1.0 + cert.map.norm()));
        assert!(
            cert.witness_x.multiply(&cert.witness_y).unwrap().norm()
                <= 1e-9 * (1.0 + cert.witness_x.norm() * cert.witness_y.norm())
        );
    }
}
