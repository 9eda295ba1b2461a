//! Python bindings: algebra elements over direct sums of matrix blocks plus
//! the main factorization, determinedness, and map-decomposition entry
//! points. Structured reports are returned as JSON strings.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use zpd_core::algebra::{stream_rng, AlgebraElement, AlgebraShape, CMat};
use zpd_core::bilinear::{
    costara_counterexample, costara_zero_product_witness, determinedness_rank, sample_fiber,
    transpose_counterexample,
};
use zpd_core::factorization::{factorize_through as core_factorize, generalized_factorize as core_generalized};
use zpd_core::maps::{derivation_decompose, extract_homomorphism, weighted_hom_decompose, LinearMapMatrix};
use zpd_core::minpi::RankOneOperator;
use zpd_core::ZpdError;

fn err(e: ZpdError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Block dimensions of a direct sum of matrix algebras.
#[pyclass(name = "Shape")]
#[derive(Clone)]
struct PyShape {
    inner: AlgebraShape,
}

#[pymethods]
impl PyShape {
    #[new]
    fn new(dims: Vec<usize>) -> PyResult<Self> {
        Ok(PyShape { inner: AlgebraShape::new(dims).map_err(err)? })
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.block_dims().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!("Shape({:?})", self.inner.block_dims())
    }
}

/// An element: one complex matrix per block.
#[pyclass(name = "Element")]
#[derive(Clone)]
struct PyElement {
    inner: AlgebraElement,
}

#[pymethods]
impl PyElement {
    /// Builds from nested lists: blocks[i][r][s] is a complex entry.
    #[new]
    fn new(shape: PyShape, blocks: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let mats = blocks
            .iter()
            .map(|b| {
                let n = b.len();
                CMat::from_fn(n, n, |r, s| b[r][s])
            })
            .collect();
        Ok(PyElement { inner: AlgebraElement::from_blocks(&shape.inner, mats).map_err(err)? })
    }

    #[staticmethod]
    fn zeros(shape: PyShape) -> Self {
        PyElement { inner: AlgebraElement::zero(&shape.inner) }
    }

    #[staticmethod]
    fn identity(shape: PyShape) -> Self {
        PyElement { inner: AlgebraElement::unit(&shape.inner) }
    }

    #[staticmethod]
    fn matrix_unit(shape: PyShape, block: usize, r: usize, s: usize) -> PyResult<Self> {
        Ok(PyElement { inner: AlgebraElement::matrix_unit(&shape.inner, block, r, s).map_err(err)? })
    }

    #[staticmethod]
    fn random(shape: PyShape, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0x9e);
        PyElement { inner: AlgebraElement::gaussian_with(&shape.inner, &mut rng) }
    }

    #[staticmethod]
    fn random_with_ranks(shape: PyShape, ranks: Vec<usize>, seed: u64) -> PyResult<Self> {
        let mut rng = stream_rng(seed, 0x9f);
        Ok(PyElement {
            inner: AlgebraElement::random_with_ranks(&shape.inner, &ranks, &mut rng).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyElement {
            inner: serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).unwrap()
    }

    #[getter]
    fn shape(&self) -> PyShape {
        PyShape { inner: self.inner.shape().clone() }
    }

    fn block(&self, i: usize) -> PyResult<Vec<Vec<Complex64>>> {
        self.inner.shape().check_block(i).map_err(err)?;
        let b = self.inner.block(i);
        Ok((0..b.nrows())
            .map(|r| (0..b.ncols()).map(|s| b[(r, s)]).collect())
            .collect())
    }

    fn multiply(&self, other: &PyElement) -> PyResult<Self> {
        Ok(PyElement { inner: self.inner.multiply(&other.inner).map_err(err)? })
    }

    fn add(&self, other: &PyElement) -> PyResult<Self> {
        Ok(PyElement { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn sub(&self, other: &PyElement) -> PyResult<Self> {
        Ok(PyElement { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn scale(&self, factor: Complex64) -> Self {
        PyElement { inner: self.inner.scale(factor) }
    }

    fn adjoint(&self) -> Self {
        PyElement { inner: self.inner.adjoint() }
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Numerical block ranks at the default tolerance.
    fn ranks(&self) -> Vec<usize> {
        self.inner.rank_profile(zpd_core::DEFAULT_EPS).ranks
    }

    fn satisfies_rank_hypothesis(&self) -> bool {
        self.inner.satisfies_rank_hypothesis(zpd_core::DEFAULT_EPS).0
    }

    fn __repr__(&self) -> String {
        format!("Element(shape={:?}, norm={:.6})", self.inner.shape().block_dims(), self.inner.norm())
    }
}

/// Factorizes c through the zero-product pair of matrix-unit rank-ones
/// x = E_{ij} in block bu and y = E_{kl} in block bv; returns the witness
/// report as JSON.
#[pyfunction]
fn factorize(c: &PyElement, u: (usize, usize, usize), v: (usize, usize, usize)) -> PyResult<String> {
    let shape = c.inner.shape();
    let uu = RankOneOperator::basis_pair(shape, u.0, u.1, u.2).map_err(err)?;
    let vv = RankOneOperator::basis_pair(shape, v.0, v.1, v.2).map_err(err)?;
    let w = core_factorize(&c.inner, &uu, &vv).map_err(err)?;
    let mut report = w.to_json_value();
    report["max_residual"] = serde_json::json!(w.max_residual());
    Ok(report.to_string())
}

/// Generalized factorization through arbitrary single-block-supported
/// elements x, y with x·y = 0; returns the witness report as JSON.
#[pyfunction]
#[pyo3(signature = (c, x, y, tol = 1e-9))]
fn generalized_factorize(c: &PyElement, x: &PyElement, y: &PyElement, tol: f64) -> PyResult<String> {
    let w = core_generalized(&c.inner, &x.inner, &y.inner, tol).map_err(err)?;
    let mut report = w.to_json_value();
    report["max_residual"] = serde_json::json!(w.max_residual());
    Ok(report.to_string())
}

/// Monte-Carlo determinedness report at c, as JSON.
#[pyfunction]
#[pyo3(signature = (c, samples = 0, seed = 0, tol = 1e-9))]
fn zpd_check(c: &PyElement, samples: usize, seed: u64, tol: f64) -> PyResult<String> {
    let shape = c.inner.shape();
    let d = shape.dim();
    let samples = if samples == 0 { 4 * d * d } else { samples };
    let report = determinedness_rank(shape, &c.inner, samples, seed, tol).map_err(err)?;
    Ok(report.to_json_value().to_string())
}

/// Worst fiber residual ‖ab − c‖ over seeded samples of {(a,b) : ab = c}.
#[pyfunction]
fn fiber_max_residual(c: &PyElement, count: usize, seed: u64) -> PyResult<f64> {
    Ok(sample_fiber(&c.inner, count, seed).map_err(err)?.max_residual)
}

/// (c, x, y, value): the corner-map point, its zero-product witness pair,
/// and the map's value there (4 for every n ≥ 2).
#[pyfunction]
fn corner_counterexample(n: usize) -> PyResult<(PyElement, PyElement, PyElement, f64)> {
    let (c, v) = costara_counterexample(n).map_err(err)?;
    let (x, y) = costara_zero_product_witness(n).map_err(err)?;
    let value = v.evaluate(&x, &y).map_err(err)?.norm();
    Ok((PyElement { inner: c }, PyElement { inner: x }, PyElement { inner: y }, value))
}

/// (c, x, y, value) for the transpose map at the identity.
#[pyfunction]
fn transpose_counterexample_witness(n: usize) -> PyResult<(PyElement, PyElement, PyElement, f64)> {
    let (c, v) = transpose_counterexample(n).map_err(err)?;
    let shape = c.shape().clone();
    let x = AlgebraElement::matrix_unit(&shape, 0, 0, 1).map_err(err)?;
    let y = AlgebraElement::matrix_unit(&shape, 0, 0, 0).map_err(err)?;
    let value = v.evaluate(&x, &y).map_err(err)?.norm();
    Ok((PyElement { inner: c }, PyElement { inner: x }, PyElement { inner: y }, value))
}

fn central_invertible(shape: &AlgebraShape, rng: &mut rand_chacha::ChaCha8Rng) -> AlgebraElement {
    use rand::Rng;
    let mut h = AlgebraElement::unit(shape);
    for i in 0..shape.num_blocks() {
        let modulus = 0.5 + 1.5 * rng.gen::<f64>();
        let angle = std::f64::consts::TAU * rng.gen::<f64>();
        *h.block_mut(i) *= Complex64::from_polar(modulus, angle);
    }
    h
}

/// Construct-then-recover round trip for map decompositions; kind is
/// "pair", "single", or "derivation". Returns the report as JSON with a
/// "pass" field.
#[pyfunction]
#[pyo3(signature = (kind, shape, seed = 0, tol = 1e-8))]
fn maps_roundtrip(kind: &str, shape: PyShape, seed: u64, tol: f64) -> PyResult<String> {
    let sh = shape.inner;
    let mut rng = stream_rng(seed, 0x3a15);
    match kind {
        "pair" => {
            let g = AlgebraElement::invertible_gaussian_with(&sh, &mut rng).map_err(err)?;
            let rho0 = LinearMapMatrix::inner_automorphism(&g).map_err(err)?;
            let h = central_invertible(&sh, &mut rng);
            let h2 = central_invertible(&sh, &mut rng);
            let phi = LinearMapMatrix::left_multiplier(&h).compose(&rho0).map_err(err)?;
            let psi = LinearMapMatrix::right_multiplier(&h2).compose(&rho0).map_err(err)?;
            let rep = extract_homomorphism(&phi, &psi, tol).map_err(err)?;
            let recovery = (rep.rho.matrix() - rho0.matrix()).norm();
            let mut report = rep.to_json_value();
            report["pass"] =
                serde_json::json!(rep.passes(tol) && recovery <= tol * (1.0 + rho0.norm()));
            Ok(report.to_string())
        }
        "single" => {
            let g = AlgebraElement::invertible_gaussian_with(&sh, &mut rng).map_err(err)?;
            let rho0 = LinearMapMatrix::inner_automorphism(&g).map_err(err)?;
            let w = central_invertible(&sh, &mut rng);
            let phi = LinearMapMatrix::left_multiplier(&w).compose(&rho0).map_err(err)?;
            let (h, rho, rep) = weighted_hom_decompose(&phi, tol).map_err(err)?;
            let pass = h.sub(&w).map_err(err)?.norm() <= tol * (1.0 + w.norm())
                && (rho.matrix() - rho0.matrix()).norm() <= tol * (1.0 + rho0.norm())
                && rep.mult_residual <= tol;
            let mut report = rep.to_json_value();
            report["pass"] = serde_json::json!(pass);
            Ok(report.to_string())
        }
        "derivation" => {
            let c = AlgebraElement::matrix_unit(&sh, 0, 0, 0).map_err(err)?;
            let mut xi = AlgebraElement::zero(&sh);
            for i in 1..sh.num_blocks() {
                let n = sh.block_dim(i);
                for r in 0..n {
                    xi.block_mut(i)[(r, r)] = Complex64::new(0.0, 2.0);
                }
            }
            let m = AlgebraElement::gaussian_with(&sh, &mut rng);
            let delta = LinearMapMatrix::inner_derivation(&m)
                .add(&LinearMapMatrix::left_multiplier(&xi))
                .map_err(err)?;
            let rep = derivation_decompose(&delta, &c, tol).map_err(err)?;
            let pass = rep.passes(tol) && rep.xi.sub(&xi).map_err(err)?.norm() <= tol;
            let mut report = rep.to_json_value();
            report["pass"] = serde_json::json!(pass);
            Ok(report.to_string())
        }
        other => Err(PyValueError::new_err(format!("unknown round-trip kind '{other}'"))),
    }
}

#[pymodule]
fn zpd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyShape>()?;
    m.add_class::<PyElement>()?;
    m.add_function(wrap_pyfunction!(factorize, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_factorize, m)?)?;
    m.add_function(wrap_pyfunction!(zpd_check, m)?)?;
    m.add_function(wrap_pyfunction!(fiber_max_residual, m)?)?;
    m.add_function(wrap_pyfunction!(corner_counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(transpose_counterexample_witness, m)?)?;
    m.add_function(wrap_pyfunction!(maps_roundtrip, m)?)?;
    Ok(())
}
