//! Deterministic operation-count model.
//!
//! The unit everywhere is one complex multiply-add pair. Pure additions,
//! divisions, square roots and diagnostic bookkeeping (residual tracking)
//! are not counted. A `k x k` by `k x k` matrix product therefore costs
//! `k^3`. Counts are closed-form functions of the shapes, so identical
//! inputs always produce identical totals.

/// `m x k` times `k x n` dense product.
pub fn gemm(m: usize, k: usize, n: usize) -> u64 {
    (m * k * n) as u64
}

/// `m x n` matrix applied to a length-`n` vector.
pub fn matvec(m: usize, n: usize) -> u64 {
    (m * n) as u64
}

/// Hermitian product H^H H for an `n x k` H; only the upper triangle is
/// formed, the lower is mirrored.
pub fn gram(n: usize, k: usize) -> u64 {
    (n * k * (k + 1) / 2) as u64
}

/// Cholesky factorization of a `k x k` Hermitian matrix plus forward/back
/// substitution against the k columns of the identity.
pub fn cholesky_inverse(k: usize) -> u64 {
    let k3 = k * k * k;
    ((k3 - k) / 6 + k * k * (k - 1)) as u64
}

/// One order-`p` polynomial update of a `k x k` approximate inverse:
/// `p` dense `k x k` products.
pub fn iterate_update(k: usize, order: usize) -> u64 {
    (order * k * k * k) as u64
}

/// Initialization gain: forming A = C^H C, its two trace accumulations,
/// and the scaled conjugate transpose.
pub fn init_gain(k: usize) -> u64 {
    (k * k * k + 3 * k * k) as u64
}
