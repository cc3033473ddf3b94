//! Iterative approximate inversion of Hermitian positive definite matrices.
//!
//! The family of hyper-power updates of order p satisfies
//! `S_{k+1} = S_k^p` for the residual `S_k = I - C_k C`, so each step
//! multiplies the number of correct digits by p. Order 2 is the classic
//! Newton update `C_{k+1} = (2I - C_k C) C_k`; orders 3 and 7 use longer
//! polynomial recurrences with the same residual-power property.
//!
//! Convergence is guaranteed by the trace-based initialization
//! `C_0 = a C^H` with `a = 2 / (lambda_upper (1 + delta))`, where
//! `lambda_upper = m + t sqrt(K-1)` bounds the largest eigenvalue of
//! `A = C^H C` from above via its first two trace moments. The bound is
//! tight for K = 2, where `a = 2 / lambda_upper` exactly stalls the
//! iteration, hence the small safeguard delta.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::flops;
use crate::linalg::matrix::ComplexMatrix;

/// Safeguard applied to the eigenvalue upper bound in [`init_gain`].
pub const INIT_GAIN_SAFEGUARD: f64 = 1e-6;

/// Order of the polynomial update; the residual satisfies S_{k+1} = S_k^p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IterOrder {
    Two,
    Three,
    Seven,
}

impl IterOrder {
    pub fn value(self) -> usize {
        match self {
            IterOrder::Two => 2,
            IterOrder::Three => 3,
            IterOrder::Seven => 7,
        }
    }

    pub fn from_value(p: usize) -> Result<Self> {
        match p {
            2 => Ok(IterOrder::Two),
            3 => Ok(IterOrder::Three),
            7 => Ok(IterOrder::Seven),
            other => Err(Error::Config(format!("unsupported iteration order {other}; use 2, 3 or 7"))),
        }
    }
}

/// State of one iterative inversion run.
#[derive(Debug, Clone)]
pub struct IterInverseState {
    target: ComplexMatrix,
    approx: ComplexMatrix,
    residual: ComplexMatrix,
    iterations: usize,
    order: IterOrder,
    flops: u64,
    rising_steps: u8,
    last_residual_norm: f64,
}

impl IterInverseState {
    /// Matrix being inverted.
    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    /// Current approximate inverse C_k.
    pub fn approx(&self) -> &ComplexMatrix {
        &self.approx
    }

    /// Consume the state, keeping only the approximate inverse.
    pub fn into_approx(self) -> ComplexMatrix {
        self.approx
    }

    /// Residual S_k = I - C_k C, tracked from the definition after every step.
    pub fn residual(&self) -> &ComplexMatrix {
        &self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn order(&self) -> IterOrder {
        self.order
    }

    /// Complex multiply-adds spent on initialization and updates
    /// (residual tracking is diagnostic and excluded; see [`flops`]).
    pub fn flops(&self) -> u64 {
        self.flops
    }

    pub fn residual_norm(&self) -> f64 {
        self.last_residual_norm
    }

    /// Apply one order-p update.
    ///
    /// Returns a divergence error when the residual Frobenius norm has grown
    /// on two consecutive steps.
    pub fn step(&mut self) -> Result<()> {
        let k = self.target.rows();
        let c = &self.target;
        let ck = &self.approx;

        let next = match self.order {
            IterOrder::Two => {
                // C_{k+1} = (2I - C_k C) C_k
                let t = ck.matmul(c)?;
                let factor = t.scale(Complex64::new(-1.0, 0.0)).add_scaled_identity(Complex64::new(2.0, 0.0))?;
                factor.matmul(ck)?
            }
            IterOrder::Three => {
                // C_{k+1} = C_k (3I - C C_k (3I - C C_k))
                let u = c.matmul(ck)?;
                let inner = u.scale(Complex64::new(-1.0, 0.0)).add_scaled_identity(Complex64::new(3.0, 0.0))?;
                let outer = u
                    .matmul(&inner)?
                    .scale(Complex64::new(-1.0, 0.0))
                    .add_scaled_identity(Complex64::new(3.0, 0.0))?;
                ck.matmul(&outer)?
            }
            IterOrder::Seven => {
                // Horner form of C_k (7I - 21 U + 35 U^2 - 35 U^3 + 21 U^4 - 7 U^5 + U^6),
                // U = C C_k.
                let u = c.matmul(ck)?;
                let coeffs = [-7.0, 21.0, -35.0, 35.0, -21.0, 7.0];
                let mut acc = u.add_scaled_identity(Complex64::new(coeffs[0], 0.0))?;
                for &q in &coeffs[1..] {
                    acc = u.matmul(&acc)?.add_scaled_identity(Complex64::new(q, 0.0))?;
                }
                ck.matmul(&acc)?
            }
        };

        if !next.is_finite() {
            return Err(Error::Numeric(format!(
                "approximate inverse overflowed at iteration {}",
                self.iterations + 1
            )));
        }

        let residual = residual_of(c, &next)?;
        let norm = residual.frobenius_norm();
        // Rounding noise makes the norm wander once the iteration has hit the
        // f64 floor; only meaningful growth counts toward divergence.
        let floor = 1e-12 * k as f64;
        if norm > self.last_residual_norm * (1.0 + 1e-9) && norm > floor {
            self.rising_steps += 1;
            if self.rising_steps >= 2 {
                return Err(Error::Divergence(format!(
                    "residual norm grew on two consecutive steps ({:.3e} at iteration {})",
                    norm,
                    self.iterations + 1
                )));
            }
        } else {
            self.rising_steps = 0;
        }

        self.flops += flops::iterate_update(k, self.order.value());
        self.approx = next;
        self.residual = residual;
        self.last_residual_norm = norm;
        self.iterations += 1;
        Ok(())
    }
}

fn residual_of(target: &ComplexMatrix, approx: &ComplexMatrix) -> Result<ComplexMatrix> {
    let prod = approx.matmul(target)?;
    ComplexMatrix::identity(target.rows()).sub(&prod)
}

/// Trace-moment initialization gain and starting matrix C_0 = a C^H.
///
/// Computes A = C^H C, m = tr(A)/K, t^2 = tr(A^2)/K - m^2 and
/// `lambda_upper = m + t sqrt(K-1)`, then `a = 2 / (lambda_upper (1 + delta))`
/// with delta = [`INIT_GAIN_SAFEGUARD`]. The i-th eigenvalue of
/// S_0 = I - C_0 C is 1 - a sigma_i^2, so the spectral radius of S_0
/// is strictly below one.
pub fn init_gain(c: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
    if c.rows() != c.cols() {
        return Err(Error::Shape(format!("init_gain of a {}x{} matrix", c.rows(), c.cols())));
    }
    let k = c.rows();
    let a_mat = c.hermitian().matmul(c)?;
    let m = a_mat.trace().re / k as f64;
    // tr(A^2) = ||A||_F^2 for Hermitian A.
    let trace_a2 = a_mat.data().iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut t_sqr = trace_a2 / k as f64 - m * m;
    if t_sqr < -1e-12 {
        return Err(Error::Numeric(format!("negative trace variance t^2 = {t_sqr:.3e}")));
    }
    t_sqr = t_sqr.max(0.0);
    let lambda_upper = m + t_sqr.sqrt() * ((k - 1) as f64).sqrt();
    if !(lambda_upper.is_finite() && lambda_upper > 0.0) {
        return Err(Error::Numeric(format!("invalid eigenvalue bound {lambda_upper:.3e}")));
    }
    let a = 2.0 / (lambda_upper * (1.0 + INIT_GAIN_SAFEGUARD));
    let c0 = c.hermitian().scale(Complex64::new(a, 0.0));
    Ok((a, c0))
}

/// Fresh state at k = 0 from the trace-moment initialization.
pub fn initial_state(c: &ComplexMatrix, order: IterOrder) -> Result<IterInverseState> {
    let (_, c0) = init_gain(c)?;
    let residual = residual_of(c, &c0)?;
    let norm = residual.frobenius_norm();
    Ok(IterInverseState {
        target: c.clone(),
        approx: c0,
        residual,
        iterations: 0,
        order,
        flops: flops::init_gain(c.rows()),
        rising_steps: 0,
        last_residual_norm: norm,
    })
}

/// Run `k` order-p updates from the safeguarded initialization.
pub fn approx_inverse(c: &ComplexMatrix, order: IterOrder, k: usize) -> Result<IterInverseState> {
    let mut state = initial_state(c, order)?;
    for _ in 0..k {
        state.step()?;
    }
    Ok(state)
}
