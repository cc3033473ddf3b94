//! Numerical verification of the radius-gap theory: the exact algebraic
//! identity relating the two Babai radii, the trace form of their expected
//! gap, and the radius-versus-iteration study.
//!
//! All radius diagnostics here anchor both radii to the same hard decision,
//! the one from the exact inverse, which is the convention the gap algebra
//! is derived under. The sphere decoder itself anchors its seed radius to
//! the hard decision of the approximate estimate it actually has; the two
//! coincide whenever the quantized solutions agree.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{transmit, ChannelRealization};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linalg::{
    approx_inverse, exact_inverse, gram, initial_state, qr_decompose, vec_dot, vec_norm_sqr,
    vec_sub, ComplexMatrix, IterOrder,
};
use crate::sphere::babai_radius_sq;

/// Residual norm ceiling under which the neglected second-order term of the
/// trace-gap approximation is actually negligible.
pub const TRACE_GAP_RESIDUAL_CEILING: f64 = 0.05;

/// One row of the radius-versus-iteration study.
#[derive(Debug, Clone, Copy)]
pub struct RadiusStudyRecord {
    pub k: usize,
    pub mean_r_sq: f64,
    pub stderr: f64,
    pub mean_re_sq: f64,
    /// Mean of Re tr(S_k) across the draws.
    pub trace_s_k: f64,
    pub trials: usize,
}

/// Monte Carlo estimate of the radius gap against its trace form.
#[derive(Debug, Clone, Copy)]
pub struct TraceGapResult {
    /// Sample mean of r_e^2 - r_k^2 over noise and symbol draws.
    pub lhs: f64,
    /// 2 N0 Re tr(S_k) for the fixed channel.
    pub rhs: f64,
    pub stderr_lhs: f64,
    pub trials: usize,
}

/// Maximum relative discrepancy across the exact radius-gap algebra on one
/// instance:
///
/// * `r_e^2 - r_k^2 = 2 Re[(x_zf - C^{-1} g)^H R^H R E_k g] - ||R E_k g||^2`,
/// * `R^H R = C`,
/// * `||R E_k g||^2 = g^H S_k^H S_k C^{-1} g`.
///
/// Discrepancies are scaled by the magnitude of the participating terms, so
/// near-converged instances (both sides near zero) are judged absolutely.
pub fn appendix_identity_check(
    h: &ComplexMatrix,
    y: &[Complex64],
    c: &Constellation,
    order: IterOrder,
    iterations: usize,
) -> Result<f64> {
    let g_mat = gram(h)?;
    let c_inv = exact_inverse(&g_mat)?;
    let state = approx_inverse(&g_mat, order, iterations)?;
    let (_, r) = qr_decompose(h)?;

    let g = h.hermitian().matvec(y)?;
    let x1 = c_inv.matvec(&g)?; // exact unconstrained estimate
    let x2 = state.approx().matvec(&g)?; // approximate unconstrained estimate
    let x_zf = c.quantize(&x1)?;

    let r_e_sq = babai_radius_sq(&r, &x_zf, &x1)?;
    let r_k_sq = babai_radius_sq(&r, &x_zf, &x2)?;
    let lhs = r_e_sq - r_k_sq;

    let e_k = state.approx().sub(&c_inv)?;
    let e_g = e_k.matvec(&g)?;
    let r_eg = r.matvec(&e_g)?;
    let r_z = r.matvec(&vec_sub(&x_zf, &x1))?;
    let cross = 2.0 * vec_dot(&r_z, &r_eg).re;
    let second = vec_norm_sqr(&r_eg);
    let rhs = cross - second;

    let scale = r_e_sq.max(r_k_sq).max(second).max(cross.abs()).max(1e-30);
    let disc_identity = (lhs - rhs).abs() / scale.max(1.0);

    // R^H R recovers the Gram matrix.
    let rhr = r.hermitian().matmul(&r)?;
    let disc_gram = rhr.sub(&g_mat)?.frobenius_norm() / g_mat.frobenius_norm().max(1.0);

    // ||R E_k g||^2 rewritten through the residual matrix.
    let s_g = state.residual().matvec(&g)?;
    let s_x1 = state.residual().matvec(&x1)?;
    let quad = vec_dot(&s_g, &s_x1).re;
    let disc_rewrite = (second - quad).abs() / scale.max(1.0);

    Ok(disc_identity.max(disc_gram).max(disc_rewrite))
}

/// Monte Carlo check of the expected radius gap against 2 N0 Re tr(S_k) for
/// a fixed channel.
///
/// Requires the residual to be small enough ([`TRACE_GAP_RESIDUAL_CEILING`])
/// that dropping the second-order term is justified; otherwise the
/// approximation is not claimed and a precondition error is returned.
pub fn trace_gap_check(
    h: &ComplexMatrix,
    c: &Constellation,
    n0: f64,
    order: IterOrder,
    iterations: usize,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<TraceGapResult> {
    if trials < 2 {
        return Err(Error::Config(format!("trace gap check needs at least 2 trials, got {trials}")));
    }
    let channel = ChannelRealization::from_matrix(h.clone())?;
    let g_mat = gram(h)?;
    let state = approx_inverse(&g_mat, order, iterations)?;
    let resid_norm = state.residual().frobenius_norm();
    if resid_norm >= TRACE_GAP_RESIDUAL_CEILING {
        return Err(Error::Precondition(format!(
            "residual norm {resid_norm:.3e} after {iterations} iterations exceeds {TRACE_GAP_RESIDUAL_CEILING}; \
             the neglected term is not small"
        )));
    }
    let rhs = 2.0 * n0 * state.residual().trace().re;

    let c_inv = exact_inverse(&g_mat)?;
    let (_, r) = qr_decompose(h)?;
    let k = h.cols();

    let mut sum = 0.0;
    let mut sum_sqr = 0.0;
    for _ in 0..trials {
        let x: Vec<Complex64> = (0..k).map(|_| c.points()[rng.gen_range(0..c.order())]).collect();
        let (y, _) = transmit(&channel, &x, n0, rng)?;
        let g = h.hermitian().matvec(&y)?;
        let x1 = c_inv.matvec(&g)?;
        let x2 = state.approx().matvec(&g)?;
        let x_zf = c.quantize(&x1)?;
        let gap = babai_radius_sq(&r, &x_zf, &x1)? - babai_radius_sq(&r, &x_zf, &x2)?;
        sum += gap;
        sum_sqr += gap * gap;
    }
    let lhs = sum / trials as f64;
    let var = (sum_sqr / trials as f64 - lhs * lhs).max(0.0);
    let stderr_lhs = (var / trials as f64).sqrt();
    Ok(TraceGapResult {
        lhs,
        rhs,
        stderr_lhs,
        trials,
    })
}

/// Average both Babai radii over fresh channel, symbol and noise draws for
/// every iteration count in `k_list`.
///
/// All iteration counts are evaluated on the same draws, so consecutive rows
/// are directly comparable.
pub fn radius_statistics(
    n_rx: usize,
    n_users: usize,
    k_list: &[usize],
    order: IterOrder,
    c: &Constellation,
    n0: f64,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<Vec<RadiusStudyRecord>> {
    if k_list.is_empty() {
        return Ok(Vec::new());
    }
    if trials < 1 {
        return Err(Error::Config("radius study needs at least one trial".into()));
    }
    let max_k = *k_list.iter().max().unwrap();
    let mut sums = vec![0.0f64; k_list.len()];
    let mut sum_sqrs = vec![0.0f64; k_list.len()];
    let mut trace_sums = vec![0.0f64; k_list.len()];
    let mut re_sum = 0.0f64;

    for _ in 0..trials {
        let channel = crate::channel::sample_channel(rng, n_rx, n_users)?;
        let h = channel.matrix();
        let x: Vec<Complex64> = (0..n_users)
            .map(|_| c.points()[rng.gen_range(0..c.order())])
            .collect();
        let (y, _) = transmit(&channel, &x, n0, rng)?;

        let g_mat = gram(h)?;
        let c_inv = exact_inverse(&g_mat)?;
        let (_, r) = qr_decompose(h)?;
        let g = h.hermitian().matvec(&y)?;
        let x1 = c_inv.matvec(&g)?;
        let x_zf = c.quantize(&x1)?;
        re_sum += babai_radius_sq(&r, &x_zf, &x1)?;

        let mut state = initial_state(&g_mat, order)?;
        let mut next = 0usize;
        for step in 0..=max_k {
            if step > 0 {
                state.step()?;
            }
            while next < k_list.len() && k_list[next] == step {
                let x2 = state.approx().matvec(&g)?;
                let r_k_sq = babai_radius_sq(&r, &x_zf, &x2)?;
                sums[next] += r_k_sq;
                sum_sqrs[next] += r_k_sq * r_k_sq;
                trace_sums[next] += state.residual().trace().re;
                next += 1;
            }
        }
    }

    let t = trials as f64;
    Ok(k_list
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let mean = sums[i] / t;
            let var = (sum_sqrs[i] / t - mean * mean).max(0.0);
            RadiusStudyRecord {
                k,
                mean_r_sq: mean,
                stderr: if trials > 1 { (var / t).sqrt() } else { 0.0 },
                mean_re_sq: re_sum / t,
                trace_s_k: trace_sums[i] / t,
                trials,
            }
        })
        .collect())
}
