//! Linear maps between direct sums of matrix blocks and the decompositions
//! attached to zero-product preservation: homomorphism extraction from a
//! pair, weighted-homomorphism form of a single bijective map, and the
//! derivation-plus-multiplier form of maps derivable at a point.

use num_complex::Complex64;

use crate::algebra::{checked_svd, stream_rng, AlgebraElement, AlgebraShape, CMat, DEFAULT_EPS};
use crate::bilinear::FiberSample;
use crate::error::{Result, ZpdError};
use crate::factorization::zero_fiber_generators;

/// Condition-number cutoff deciding numerical invertibility.
pub const INVERTIBILITY_COND: f64 = 1e8;

/// A linear map between algebras, stored as a `dim(B) × dim(A)` matrix over
/// the fixed vectorization bases.
#[derive(Debug, Clone)]
pub struct LinearMapMatrix {
    domain: AlgebraShape,
    codomain: AlgebraShape,
    matrix: CMat,
}

impl LinearMapMatrix {
    pub fn new(domain: AlgebraShape, codomain: AlgebraShape, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != codomain.dim() || matrix.ncols() != domain.dim() {
            return Err(ZpdError::ShapeMismatch(format!(
                "map matrix must be {}x{}",
                codomain.dim(),
                domain.dim()
            )));
        }
        Ok(LinearMapMatrix { domain, codomain, matrix })
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let d = shape.dim();
        LinearMapMatrix { domain: shape.clone(), codomain: shape.clone(), matrix: CMat::identity(d, d) }
    }

    /// Builds the matrix column by column from images of basis elements.
    pub fn from_images<F>(domain: &AlgebraShape, codomain: &AlgebraShape, mut f: F) -> Result<Self>
    where
        F: FnMut(&AlgebraElement) -> Result<AlgebraElement>,
    {
        let da = domain.dim();
        let mut matrix = CMat::zeros(codomain.dim(), da);
        for t in 0..da {
            let img = f(&domain.basis_element(t))?;
            if img.shape() != codomain {
                return Err(ZpdError::ShapeMismatch("image lands in the wrong shape".into()));
            }
            matrix.set_column(t, &img.to_vector());
        }
        Ok(LinearMapMatrix { domain: domain.clone(), codomain: codomain.clone(), matrix })
    }

    /// `a ↦ g·a·g⁻¹`.
    pub fn inner_automorphism(g: &AlgebraElement) -> Result<Self> {
        let ginv = g.try_inverse().ok_or(ZpdError::NotInvertible {
            which: "inner automorphism weight".into(),
            cond: f64::INFINITY,
        })?;
        Self::from_images(g.shape(), g.shape(), |e| g.multiply(e)?.multiply(&ginv))
    }

    /// `a ↦ h·a`.
    pub fn left_multiplier(h: &AlgebraElement) -> Self {
        LinearMapMatrix {
            domain: h.shape().clone(),
            codomain: h.shape().clone(),
            matrix: h.left_multiplication_matrix(),
        }
    }

    /// `a ↦ a·h`.
    pub fn right_multiplier(h: &AlgebraElement) -> Self {
        LinearMapMatrix {
            domain: h.shape().clone(),
            codomain: h.shape().clone(),
            matrix: h.right_multiplication_matrix(),
        }
    }

    /// Blockwise transpose.
    pub fn transpose_map(shape: &AlgebraShape) -> Self {
        Self::from_images(shape, shape, |e| {
            let blocks = e.blocks().iter().map(|b| b.transpose()).collect();
            AlgebraElement::from_blocks(shape, blocks)
        })
        .unwrap()
    }

    /// `a ↦ m·a − a·m`.
    pub fn inner_derivation(m: &AlgebraElement) -> Self {
        LinearMapMatrix {
            domain: m.shape().clone(),
            codomain: m.shape().clone(),
            matrix: m.left_multiplication_matrix() - m.right_multiplication_matrix(),
        }
    }

    /// Moves block `i` of the domain to block `perm[i]` of the codomain;
    /// `perm` must be a permutation between blocks of equal dimension.
    pub fn block_permutation(shape: &AlgebraShape, perm: &[usize]) -> Result<Self> {
        let k = shape.num_blocks();
        if perm.len() != k {
            return Err(ZpdError::InvalidArgument("permutation length must match block count".into()));
        }
        let mut seen = vec![false; k];
        for (i, &p) in perm.iter().enumerate() {
            shape.check_block(p)?;
            if seen[p] || shape.block_dim(i) != shape.block_dim(p) {
                return Err(ZpdError::InvalidArgument(
                    "block permutation must be a bijection between equal block dims".into(),
                ));
            }
            seen[p] = true;
        }
        let d = shape.dim();
        let mut matrix = CMat::zeros(d, d);
        for i in 0..k {
            let n = shape.block_dim(i);
            for r in 0..n {
                for s in 0..n {
                    matrix[(shape.entry_index(perm[i], r, s), shape.entry_index(i, r, s))] =
                        Complex64::new(1.0, 0.0);
                }
            }
        }
        Ok(LinearMapMatrix { domain: shape.clone(), codomain: shape.clone(), matrix })
    }

    pub fn domain(&self) -> &AlgebraShape {
        &self.domain
    }

    pub fn codomain(&self) -> &AlgebraShape {
        &self.codomain
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if a.shape() != &self.domain {
            return Err(ZpdError::ShapeMismatch("map applied to foreign shape".into()));
        }
        AlgebraElement::from_vector(&self.codomain, &(&self.matrix * a.to_vector()))
    }

    pub fn compose(&self, inner: &LinearMapMatrix) -> Result<LinearMapMatrix> {
        if inner.codomain != self.domain {
            return Err(ZpdError::ShapeMismatch("composition shapes do not line up".into()));
        }
        LinearMapMatrix::new(inner.domain.clone(), self.codomain.clone(), &self.matrix * &inner.matrix)
    }

    pub fn scale(&self, factor: Complex64) -> LinearMapMatrix {
        LinearMapMatrix {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn add(&self, other: &LinearMapMatrix) -> Result<LinearMapMatrix> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(ZpdError::ShapeMismatch("map addition needs matching shapes".into()));
        }
        LinearMapMatrix::new(self.domain.clone(), self.codomain.clone(), &self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &LinearMapMatrix) -> Result<LinearMapMatrix> {
        self.add(&other.scale(Complex64::from(-1.0)))
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Condition number `σ_max/σ_min` of the map matrix.
    pub fn condition_number(&self) -> f64 {
        let sv = checked_svd(&self.matrix).sigma;
        let max = sv.iter().copied().fold(0.0_f64, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn is_bijective(&self) -> bool {
        self.matrix.is_square() && self.condition_number() < INVERTIBILITY_COND
    }
}

fn invertible_element(el: &AlgebraElement, which: &str) -> Result<AlgebraElement> {
    let sv = el.block_singular_values();
    let max = sv.iter().flatten().copied().fold(0.0_f64, f64::max);
    let min = sv.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if cond >= INVERTIBILITY_COND {
        return Err(ZpdError::NotInvertible { which: which.into(), cond });
    }
    el.try_inverse().ok_or(ZpdError::NotInvertible { which: which.into(), cond })
}

/// Max `‖φ(x)·ψ(y)‖` over the zero-product generator pool, relative to the
/// map norms.
pub fn pair_preserves_zero_products(
    phi: &LinearMapMatrix,
    psi: &LinearMapMatrix,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<(bool, f64, Option<(AlgebraElement, AlgebraElement)>)> {
    if phi.domain != psi.domain || phi.codomain != psi.codomain {
        return Err(ZpdError::ShapeMismatch("pair must share domain and codomain".into()));
    }
    let pool = zero_fiber_generators(&phi.domain, trials.max(8), seed);
    let mut worst = 0.0_f64;
    let mut witness = None;
    for (x, y) in pool {
        let val = phi.apply(&x)?.multiply(&psi.apply(&y)?)?.norm();
        if val > worst {
            worst = val;
            witness = Some((x, y));
        }
    }
    let ok = worst <= tol * (1.0 + phi.norm() * psi.norm());
    Ok((ok, worst, if ok { None } else { witness }))
}

/// Both halves of the pair identity `φ(1)ψ(ab) = φ(a)ψ(b) = φ(ab)ψ(1)`
/// over seeded random pairs.
pub fn pair_identity_check(
    phi: &LinearMapMatrix,
    psi: &LinearMapMatrix,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<(bool, f64)> {
    let (zp_ok, worst_zp, _) = pair_preserves_zero_products(phi, psi, 64, seed, tol.max(1e-8))?;
    if !zp_ok {
        return Err(ZpdError::DoesNotPreserveZeroProducts { worst: worst_zp });
    }
    let shape = phi.domain.clone();
    let one = AlgebraElement::unit(&shape);
    let phi1 = phi.apply(&one)?;
    let psi1 = psi.apply(&one)?;
    let mut rng = stream_rng(seed, 0x1d);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let a = AlgebraElement::gaussian_with(&shape, &mut rng);
        let b = AlgebraElement::gaussian_with(&shape, &mut rng);
        let ab = a.multiply(&b)?;
        let mid = phi.apply(&a)?.multiply(&psi.apply(&b)?)?;
        let left = phi1.multiply(&psi.apply(&ab)?)?;
        let right = phi.apply(&ab)?.multiply(&psi1)?;
        let scale = 1.0 + phi.norm() * psi.norm() * a.norm() * b.norm();
        worst = worst.max(left.sub(&mid)?.norm() / scale);
        worst = worst.max(right.sub(&mid)?.norm() / scale);
    }
    Ok((worst <= tol, worst))
}

/// Result of recovering the homomorphism behind a zero-product-preserving
/// pair: `φ = φ(1)·ρ(−)` and `ψ = ρ(−)·ψ(1)`.
#[derive(Debug, Clone)]
pub struct HomExtractionReport {
    pub rho: LinearMapMatrix,
    pub phi1: AlgebraElement,
    pub psi1: AlgebraElement,
    /// `‖φ(1)⁻¹φ(−) − ψ(−)ψ(1)⁻¹‖` as matrices
    pub rho_mismatch: f64,
    /// worst relative `‖ρ(ab) − ρ(a)ρ(b)‖` over trials
    pub mult_residual: f64,
    /// `‖ρ(1) − 1‖`
    pub unital_residual: f64,
}

impl HomExtractionReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.rho_mismatch <= tol * (1.0 + self.rho.norm())
            && self.mult_residual <= tol
            && self.unital_residual <= tol
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "phi1": self.phi1,
            "psi1": self.psi1,
            "rho_mismatch": self.rho_mismatch,
            "mult_residual": self.mult_residual,
            "unital_residual": self.unital_residual,
        })
    }
}

/// Recovers `ρ` from a pair with `φ(x)ψ(y) = 0` whenever `xy = 0`:
/// `ρ₁ = φ(1)⁻¹φ(−)` must agree with `ρ₂ = ψ(−)ψ(1)⁻¹`.
pub fn extract_homomorphism(
    phi: &LinearMapMatrix,
    psi: &LinearMapMatrix,
    _tol: f64,
) -> Result<HomExtractionReport> {
    if phi.domain != psi.domain || phi.codomain != psi.codomain {
        return Err(ZpdError::ShapeMismatch("pair must share domain and codomain".into()));
    }
    let one = AlgebraElement::unit(&phi.domain);
    let phi1 = phi.apply(&one)?;
    let psi1 = psi.apply(&one)?;
    let phi1_inv = invertible_element(&phi1, "phi(1)")?;
    let psi1_inv = invertible_element(&psi1, "psi(1)")?;
    let rho1 = LinearMapMatrix::left_multiplier(&phi1_inv).compose(phi)?;
    let rho2 = LinearMapMatrix::right_multiplier(&psi1_inv).compose(psi)?;
    let rho_mismatch = (&rho1.matrix - &rho2.matrix).norm();
    let unital_residual = rho1.apply(&one)?.sub(&one)?.norm();
    let mut rng = stream_rng(0x40, 0);
    let mut mult_residual = 0.0_f64;
    for _ in 0..50 {
        let a = AlgebraElement::gaussian_with(&phi.domain, &mut rng);
        let b = AlgebraElement::gaussian_with(&phi.domain, &mut rng);
        let lhs = rho1.apply(&a.multiply(&b)?)?;
        let rhs = rho1.apply(&a)?.multiply(&rho1.apply(&b)?)?;
        mult_residual =
            mult_residual.max(lhs.sub(&rhs)?.norm() / (1.0 + a.norm() * b.norm()));
    }
    Ok(HomExtractionReport { rho: rho1, phi1, psi1, rho_mismatch, mult_residual, unital_residual })
}

/// Weighted-homomorphism form of a single bijective map.
#[derive(Debug, Clone)]
pub struct WeightedHomReport {
    pub weight: AlgebraElement,
    pub rho: LinearMapMatrix,
    /// worst `‖h·e − e·h‖` over basis elements
    pub centrality_residual: f64,
    /// worst relative multiplicativity defect of `ρ`
    pub mult_residual: f64,
    pub bijective: bool,
}

impl WeightedHomReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight,
            "centrality_residual": self.centrality_residual,
            "mult_residual": self.mult_residual,
            "bijective": self.bijective,
        })
    }
}

/// Decomposes a bijective zero-product-preserving `φ` as `h·ρ(−)` with
/// `h = φ(1)` central invertible and `ρ` an isomorphism.
pub fn weighted_hom_decompose(
    phi: &LinearMapMatrix,
    tol: f64,
) -> Result<(AlgebraElement, LinearMapMatrix, WeightedHomReport)> {
    if !phi.is_bijective() {
        return Err(ZpdError::NotBijective);
    }
    let (zp_ok, worst, _) = pair_preserves_zero_products(phi, phi, 64, 0, tol.max(1e-8))?;
    if !zp_ok {
        return Err(ZpdError::DoesNotPreserveZeroProducts { worst });
    }
    let shape = phi.domain.clone();
    let one = AlgebraElement::unit(&shape);
    let h = phi.apply(&one)?;
    let mut centrality_residual = 0.0_f64;
    for t in 0..shape.dim() {
        let e = shape.basis_element(t);
        let comm = h.multiply(&e)?.sub(&e.multiply(&h)?)?.norm();
        centrality_residual = centrality_residual.max(comm);
    }
    if centrality_residual > tol.max(1e-8) * (1.0 + h.norm()) {
        return Err(ZpdError::WeightNotCentral { worst: centrality_residual });
    }
    let hinv = invertible_element(&h, "phi(1)")?;
    let rho = LinearMapMatrix::left_multiplier(&hinv).compose(phi)?;
    let mut rng = stream_rng(0x77, 1);
    let mut mult_residual = 0.0_f64;
    for _ in 0..50 {
        let a = AlgebraElement::gaussian_with(&shape, &mut rng);
        let b = AlgebraElement::gaussian_with(&shape, &mut rng);
        let lhs = rho.apply(&a.multiply(&b)?)?;
        let rhs = rho.apply(&a)?.multiply(&rho.apply(&b)?)?;
        mult_residual = mult_residual.max(lhs.sub(&rhs)?.norm() / (1.0 + a.norm() * b.norm()));
    }
    let report = WeightedHomReport {
        weight: h.clone(),
        rho: rho.clone(),
        centrality_residual,
        mult_residual,
        bijective: rho.is_bijective(),
    };
    Ok((h, rho, report))
}

/// Max `‖δ(c) − δ(a)b − aδ(b)‖` over the fiber sample, relative to `‖δ‖`.
pub fn derivation_at_c_check(
    delta: &LinearMapMatrix,
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
    let dc = delta.apply(c)?;
    let mut worst = 0.0_f64;
    for (a, b) in &fiber.pairs {
        let leib = delta.apply(a)?.multiply(b)?.add(&a.multiply(&delta.apply(b)?)?)?;
        let scale = 1.0 + delta.norm() * (1.0 + a.norm() * b.norm());
        worst = worst.max(dc.sub(&leib)?.norm() / scale);
    }
    Ok((worst <= tol, worst))
}

/// Decomposition of a map derivable at `c` as `δ = d + ξ·(−)`.
#[derive(Debug, Clone)]
pub struct DerivationReport {
    pub xi: AlgebraElement,
    pub d: LinearMapMatrix,
    /// worst relative Leibniz defect of `d` over random pairs
    pub leibniz_residual: f64,
    /// max `‖ξa − aξ‖` over basis elements
    pub centrality_residual: f64,
    /// `‖ξ·c‖`
    pub xi_c_residual: f64,
}

impl DerivationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.leibniz_residual <= tol && self.centrality_residual <= tol && self.xi_c_residual <= tol
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "xi": self.xi,
            "leibniz_residual": self.leibniz_residual,
            "centrality_residual": self.centrality_residual,
            "xi_c_residual": self.xi_c_residual,
        })
    }
}

/// Splits `δ` into a derivation `d = δ − δ(1)·(−)` and the multiplier
/// `ξ = δ(1)`; `δ(1)` is forced because `d(1) = 0` for any derivation on a
/// unital algebra. Requires `δ` to pass the fiber Leibniz test at `c`.
pub fn derivation_decompose(
    delta: &LinearMapMatrix,
    c: &AlgebraElement,
    tol: f64,
) -> Result<DerivationReport> {
    let fiber = crate::bilinear::sample_fiber(c, 64, 0x5eed)?;
    let (ok, worst) = derivation_at_c_check(delta, c, &fiber, tol.max(1e-8))?;
    if !ok {
        return Err(ZpdError::NotDerivableAtC { worst });
    }
    let shape = delta.domain.clone();
    let one = AlgebraElement::unit(&shape);
    let xi = delta.apply(&one)?;
    let d = delta.sub(&LinearMapMatrix::left_multiplier(&xi))?;
    let mut rng = stream_rng(0xde, 2);
    let mut leibniz_residual = 0.0_f64;
    for _ in 0..50 {
        let a = AlgebraElement::gaussian_with(&shape, &mut rng);
        let b = AlgebraElement::gaussian_with(&shape, &mut rng);
        let lhs = d.apply(&a.multiply(&b)?)?;
        let rhs = d.apply(&a)?.multiply(&b)?.add(&a.multiply(&d.apply(&b)?)?)?;
        let scale = 1.0 + d.norm() * a.norm() * b.norm();
        leibniz_residual = leibniz_residual.max(lhs.sub(&rhs)?.norm() / scale);
    }
    let mut centrality_residual = 0.0_f64;
    for t in 0..shape.dim() {
        let e = shape.basis_element(t);
        centrality_residual =
            centrality_residual.max(xi.multiply(&e)?.sub(&e.multiply(&xi)?)?.norm());
    }
    let xi_c_residual = xi.multiply(c)?.norm();
    Ok(DerivationReport { xi, d, leibniz_residual, centrality_residual, xi_c_residual })
}

/// Orthonormal basis of the numerical null space of the map matrix.
fn kernel_basis(m: &CMat) -> CMat {
    let svd = checked_svd(m);
    let sigma_max = svd.sigma.iter().copied().fold(0.0_f64, f64::max);
    let thr = DEFAULT_EPS * sigma_max * m.ncols() as f64;
    let cols: Vec<usize> =
        (0..svd.sigma.len()).filter(|&j| svd.sigma[j] <= thr).collect();
    let mut out = CMat::zeros(m.ncols(), cols.len());
    for (slot, &j) in cols.iter().enumerate() {
        out.set_column(slot, &svd.v_t.row(j).transpose().map(|z| z.conj()));
    }
    out
}

/// Principal-angle gap between the numerical kernels of two maps:
/// `‖P_ker(φ) − P_ker(ψ)‖`.
pub fn kernel_principal_gap(phi: &LinearMapMatrix, psi: &LinearMapMatrix) -> Result<f64> {
    if phi.domain != psi.domain {
        return Err(ZpdError::ShapeMismatch("kernel comparison needs one domain".into()));
    }
    let ka = kernel_basis(&phi.matrix);
    let kb = kernel_basis(&psi.matrix);
    let pa = &ka * ka.adjoint();
    let pb = &kb * kb.adjoint();
    Ok((pa - pb).norm())
}
