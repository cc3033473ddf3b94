//! Linear detection (ZF and MMSE) with a pluggable exact or iterative
//! inverse, plus the diagnostics that relate the two paths.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linalg::{self, flops, ComplexMatrix, IterOrder};

/// How the K x K system matrix gets inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseProvider {
    Exact,
    Iterative { order: IterOrder, iterations: usize },
}

impl InverseProvider {
    /// Inverse (exact or approximate) of `c`, with the multiply-add count.
    pub fn inverse_of(&self, c: &ComplexMatrix) -> Result<(ComplexMatrix, u64)> {
        match *self {
            InverseProvider::Exact => {
                let inv = linalg::exact_inverse(c)?;
                Ok((inv, flops::cholesky_inverse(c.rows())))
            }
            InverseProvider::Iterative { order, iterations } => {
                let state = linalg::approx_inverse(c, order, iterations)?;
                let flops = state.flops();
                Ok((state.into_approx(), flops))
            }
        }
    }
}

/// Output of one linear detection.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Unconstrained estimate, inverse applied to the matched filter output.
    pub unconstrained: Vec<Complex64>,
    /// Hard decision, element-wise nearest constellation point.
    pub hard: Vec<Complex64>,
    /// Matched filter output g = H^H y.
    pub g: Vec<Complex64>,
    /// Complex multiply-adds spent (gram + matched filter + inverse + apply).
    pub flops: u64,
}

fn matched_filter(h: &ComplexMatrix, y: &[Complex64]) -> Result<Vec<Complex64>> {
    if y.len() != h.rows() {
        return Err(Error::Shape(format!(
            "received vector has length {}, channel has {} rows",
            y.len(),
            h.rows()
        )));
    }
    h.hermitian().matvec(y)
}

fn detect_with(
    h: &ComplexMatrix,
    y: &[Complex64],
    c: &Constellation,
    inv: InverseProvider,
    regularizer: f64,
) -> Result<DetectionResult> {
    let (n, k) = (h.rows(), h.cols());
    let g = matched_filter(h, y)?;
    let mut system = linalg::gram(h)?;
    if regularizer != 0.0 {
        system = system.add_scaled_identity(Complex64::new(regularizer, 0.0))?;
    }
    let (inverse, inv_flops) = inv.inverse_of(&system)?;
    let unconstrained = inverse.matvec(&g)?;
    let hard = c.quantize(&unconstrained)?;
    let flops = flops::gram(n, k) + flops::matvec(k, n) + inv_flops + flops::matvec(k, k);
    Ok(DetectionResult {
        unconstrained,
        hard,
        g,
        flops,
    })
}

/// Zero-forcing detection: invert the Gram matrix, apply, quantize.
pub fn zf_detect(
    h: &ComplexMatrix,
    y: &[Complex64],
    c: &Constellation,
    inv: InverseProvider,
) -> Result<DetectionResult> {
    detect_with(h, y, c, inv, 0.0)
}

/// MMSE detection: same machinery on the noise-regularized Gram matrix.
pub fn mmse_detect(
    h: &ComplexMatrix,
    y: &[Complex64],
    c: &Constellation,
    n0: f64,
    es: f64,
    inv: InverseProvider,
) -> Result<DetectionResult> {
    if !(n0 > 0.0 && es > 0.0) {
        return Err(Error::Config(format!("MMSE needs positive n0 and es, got {n0}, {es}")));
    }
    detect_with(h, y, c, inv, n0 / es)
}

/// True when the hard decisions from the approximate and exact inverses agree.
pub fn quantized_equality(
    h: &ComplexMatrix,
    y: &[Complex64],
    c: &Constellation,
    order: IterOrder,
    iterations: usize,
) -> Result<bool> {
    let exact = zf_detect(h, y, c, InverseProvider::Exact)?;
    let approx = zf_detect(h, y, c, InverseProvider::Iterative { order, iterations })?;
    Ok(exact.hard == approx.hard)
}

/// Per-element sufficient condition for the two hard decisions to coincide:
/// both the real and imaginary parts of z - E g stay inside half the minimum
/// distance, where z is the exact quantization error and E the inverse error.
pub fn sufficient_condition_check(
    zf_exact: &DetectionResult,
    e: &ComplexMatrix,
    g: &[Complex64],
    d_min: f64,
) -> Result<bool> {
    let k = zf_exact.hard.len();
    if e.rows() != k || e.cols() != k || g.len() != k {
        return Err(Error::Shape(format!(
            "error matrix {}x{} and g of length {} against K = {k}",
            e.rows(),
            e.cols(),
            g.len()
        )));
    }
    let eg = e.matvec(g)?;
    let half = d_min / 2.0;
    for i in 0..k {
        let z_i = zf_exact.hard[i] - zf_exact.unconstrained[i];
        let w = z_i - eg[i];
        if w.re.abs() >= half || w.im.abs() >= half {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-realization surrogate of the residual-matrix bounds: checks that the
/// real and imaginary parts of (S_k x)_i stay inside half the minimum
/// distance, returning the per-element margin min over both parts.
pub fn expected_bound_check(
    s_k: &ComplexMatrix,
    x: &[Complex64],
    d_min: f64,
) -> Result<(bool, bool, Vec<f64>)> {
    let sx = s_k.matvec(x)?;
    let half = d_min / 2.0;
    let mut re_ok = true;
    let mut im_ok = true;
    let margins = sx
        .iter()
        .map(|v| {
            if v.re.abs() >= half {
                re_ok = false;
            }
            if v.im.abs() >= half {
                im_ok = false;
            }
            (half - v.re.abs()).min(half - v.im.abs())
        })
        .collect();
    Ok((re_ok, im_ok, margins))
}
