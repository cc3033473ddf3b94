use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;

/// Hermitian product C = H^H H for an `n x k` channel matrix, `n >= k`.
///
/// The upper triangle is computed and mirrored, so the result is Hermitian
/// by construction and the diagonal is exactly real.
pub fn gram(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = (h.rows(), h.cols());
    if n < k {
        return Err(Error::Shape(format!("gram of a {n}x{k} matrix requires n >= k")));
    }
    let mut c = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for row in 0..n {
                acc += h.get(row, i).conj() * h.get(row, j);
            }
            if i == j {
                c.set(i, i, Complex64::new(acc.re, 0.0));
            } else {
                c.set(i, j, acc);
                c.set(j, i, acc.conj());
            }
        }
    }
    Ok(c)
}

/// Thin QR decomposition of an `n x k` matrix (`n >= k`) via Householder
/// reflections. Q is `n x k` with Q^H Q = I, R is `k x k` upper triangular
/// with a strictly positive real diagonal.
pub fn qr_decompose(h: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (n, k) = (h.rows(), h.cols());
    if n < k {
        return Err(Error::Shape(format!("QR of a {n}x{k} matrix requires n >= k")));
    }
    if !h.is_finite() {
        return Err(Error::Numeric("QR input contains non-finite entries".into()));
    }
    let scale = h.frobenius_norm();

    let mut a = h.clone();
    // One reflector per column: v (length n - j) and its squared norm.
    let mut reflectors: Vec<(Vec<Complex64>, f64)> = Vec::with_capacity(k);

    for j in 0..k {
        let mut v: Vec<Complex64> = (j..n).map(|r| a.get(r, j)).collect();
        let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

        // alpha = -exp(i arg(x0)) * ||x|| keeps v^H x real.
        let x0 = v[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm_x;
        v[0] -= alpha;
        let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();

        if vnorm_sqr > 0.0 {
            apply_reflector(&mut a, &v, vnorm_sqr, j, j);
        }
        // Clean the annihilated part so R reads off exactly.
        a.set(j, j, alpha);
        for r in j + 1..n {
            a.set(r, j, Complex64::new(0.0, 0.0));
        }
        reflectors.push((v, vnorm_sqr));
    }

    // Accumulate the thin Q by applying the reflectors, last first, to I_{n x k}.
    let mut q = ComplexMatrix::from_fn(n, k, |r, c| {
        if r == c {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    for j in (0..k).rev() {
        let (v, vnorm_sqr) = &reflectors[j];
        if *vnorm_sqr > 0.0 {
            apply_reflector(&mut q, v, *vnorm_sqr, j, 0);
        }
    }

    let mut r = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for c in i..k {
            r.set(i, c, a.get(i, c));
        }
    }

    // Fix the diagonal phase so r_jj is real and positive.
    for j in 0..k {
        let d = r.get(j, j);
        if d.norm() < 1e-12 * scale {
            return Err(Error::Singular(format!(
                "rank deficiency at column {j}: |r_jj| = {:.3e}",
                d.norm()
            )));
        }
        let phase = d / d.norm();
        for c in j..k {
            r.set(j, c, r.get(j, c) * phase.conj());
        }
        for row in 0..n {
            q.set(row, j, q.get(row, j) * phase);
        }
    }

    Ok((q, r))
}

/// In place: M[row0.., col0..] -= 2 v (v^H M[row0.., col0..]) / ||v||^2.
fn apply_reflector(m: &mut ComplexMatrix, v: &[Complex64], vnorm_sqr: f64, row0: usize, col0: usize) {
    let cols = m.cols();
    for c in col0..cols {
        let mut dot = Complex64::new(0.0, 0.0);
        for (i, &vi) in v.iter().enumerate() {
            dot += vi.conj() * m.get(row0 + i, c);
        }
        let f = dot * (2.0 / vnorm_sqr);
        for (i, &vi) in v.iter().enumerate() {
            let val = m.get(row0 + i, c) - vi * f;
            m.set(row0 + i, c, val);
        }
    }
}

/// Inverse of a Hermitian positive definite matrix via Cholesky
/// factorization and triangular solves against the identity.
pub fn exact_inverse(c: &ComplexMatrix) -> Result<ComplexMatrix> {
    let l = cholesky(c)?;
    let k = c.rows();
    let mut inv = ComplexMatrix::zeros(k, k);
    let mut y = vec![Complex64::new(0.0, 0.0); k];
    for col in 0..k {
        // L y = e_col
        for i in 0..k {
            let b = if i == col { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            let mut acc = b;
            for m in 0..i {
                acc -= l.get(i, m) * y[m];
            }
            y[i] = acc / l.get(i, i);
        }
        // L^H x = y
        for i in (0..k).rev() {
            let mut acc = y[i];
            for m in i + 1..k {
                acc -= l.get(m, i).conj() * y[m];
            }
            y[i] = acc / l.get(i, i);
        }
        for i in 0..k {
            inv.set(i, col, y[i]);
        }
    }
    Ok(inv)
}

/// Lower-triangular Cholesky factor of a Hermitian positive definite matrix.
fn cholesky(c: &ComplexMatrix) -> Result<ComplexMatrix> {
    if c.rows() != c.cols() {
        return Err(Error::Shape(format!("Cholesky of a {}x{} matrix", c.rows(), c.cols())));
    }
    let k = c.rows();
    let mut l = ComplexMatrix::zeros(k, k);
    for j in 0..k {
        let mut s = c.get(j, j).re;
        for m in 0..j {
            s -= l.get(j, m).norm_sqr();
        }
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::Singular(format!(
                "non-positive-definite pivot {s:.3e} at index {j}"
            )));
        }
        let d = s.sqrt();
        l.set(j, j, Complex64::new(d, 0.0));
        for i in j + 1..k {
            let mut acc = c.get(i, j);
            for m in 0..j {
                acc -= l.get(i, m) * l.get(j, m).conj();
            }
            l.set(i, j, acc / d);
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::relative_frobenius_distance;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut impl rand::Rng, n: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, k, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im)
        })
    }

    #[test]
    fn gram_of_all_ones_column() {
        let h = ComplexMatrix::from_data(2, 1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let g = gram(&h).unwrap();
        assert_eq!(g.get(0, 0), c(2.0, 0.0));
    }

    #[test]
    fn gram_of_identity_is_identity() {
        let g = gram(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(g, ComplexMatrix::identity(4));
    }

    #[test]
    fn gram_matches_naive_triple_loop() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = random_matrix(&mut rng, 8, 4);
        let g = gram(&h).unwrap();
        // Independent oracle: plain triple loop without symmetry exploitation.
        let mut oracle = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = c(0.0, 0.0);
                for n in 0..8 {
                    acc += h.get(n, i).conj() * h.get(n, j);
                }
                oracle.set(i, j, acc);
            }
        }
        assert!(relative_frobenius_distance(&g, &oracle) < 1e-12);
        // Hermitian by construction.
        for i in 0..4 {
            for j in 0..4 {
                let d = (g.get(i, j) - g.get(j, i).conj()).norm();
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn gram_rejects_wide_matrices() {
        let h = ComplexMatrix::zeros(2, 3);
        assert!(matches!(gram(&h), Err(crate::error::Error::Shape(_))));
    }

    #[test]
    fn qr_of_identity() {
        let (q, r) = qr_decompose(&ComplexMatrix::identity(3)).unwrap();
        assert!(relative_frobenius_distance(&q, &ComplexMatrix::identity(3)) < 1e-14);
        assert!(relative_frobenius_distance(&r, &ComplexMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn qr_of_single_column() {
        let h = ComplexMatrix::from_data(2, 1, vec![c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        let (q, r) = qr_decompose(&h).unwrap();
        assert!((q.get(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(q.get(1, 0).norm() < 1e-14);
        assert!((r.get(0, 0) - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn qr_reconstructs_random_square_matrix() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = random_matrix(&mut rng, 16, 16);
        let (q, r) = qr_decompose(&h).unwrap();

        let qr = q.matmul(&r).unwrap();
        assert!(relative_frobenius_distance(&qr, &h) < 1e-10);

        let qhq = q.hermitian().matmul(&q).unwrap();
        assert!(relative_frobenius_distance(&qhq, &ComplexMatrix::identity(16)) < 1e-10);

        // R^H R equals the Gram matrix.
        let rhr = r.hermitian().matmul(&r).unwrap();
        let g = gram(&h).unwrap();
        assert!(relative_frobenius_distance(&rhr, &g) < 1e-9);

        // Positive real diagonal by convention.
        for j in 0..16 {
            let d = r.get(j, j);
            assert!(d.re > 0.0 && d.im.abs() < 1e-12 * d.re);
        }
        // Upper triangular.
        for i in 0..16 {
            for j in 0..i {
                assert_eq!(r.get(i, j), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn qr_detects_rank_deficiency() {
        let mut h = ComplexMatrix::zeros(4, 2);
        h.set(0, 0, c(1.0, 0.0));
        h.set(1, 0, c(1.0, 0.0));
        h.set(0, 1, c(2.0, 0.0));
        h.set(1, 1, c(2.0, 0.0)); // second column is a multiple of the first
        assert!(matches!(qr_decompose(&h), Err(crate::error::Error::Singular(_))));
    }

    #[test]
    fn inverse_of_identity_and_diagonal() {
        let inv = exact_inverse(&ComplexMatrix::identity(3)).unwrap();
        assert!(relative_frobenius_distance(&inv, &ComplexMatrix::identity(3)) < 1e-14);

        let d = ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let inv = exact_inverse(&d).unwrap();
        assert!((inv.get(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((inv.get(1, 1) - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn inverse_residual_on_random_gram() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let h = random_matrix(&mut rng, 16, 8);
        let g = gram(&h).unwrap();
        let inv = exact_inverse(&g).unwrap();
        let prod = g.matmul(&inv).unwrap();
        let resid = prod.sub(&ComplexMatrix::identity(8)).unwrap();
        assert!(resid.frobenius_norm() < 1e-9 * 8.0);
    }

    #[test]
    fn inverse_rejects_indefinite_matrix() {
        let m = ComplexMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(exact_inverse(&m), Err(crate::error::Error::Singular(_))));
    }
}
