//! Uplink system model y = H x + n with an i.i.d. complex Gaussian channel
//! and per-trial seeded randomness.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// One draw of the N x K channel.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    h: ComplexMatrix,
    n_rx: usize,
    n_users: usize,
}

impl ChannelRealization {
    /// Wrap an explicit matrix, e.g. a fixed fixture for conditioned studies.
    pub fn from_matrix(h: ComplexMatrix) -> Result<Self> {
        if h.cols() < 1 || h.rows() < h.cols() {
            return Err(Error::Config(format!(
                "channel matrix must be n x k with n >= k >= 1, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        Ok(Self {
            n_rx: h.rows(),
            n_users: h.cols(),
            h,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }
}

/// Noise bookkeeping: `n0` is the total variance per complex noise element.
#[derive(Debug, Clone, Copy)]
pub struct NoiseParams {
    pub n0: f64,
    pub es: f64,
    pub snr_db: f64,
}

impl NoiseParams {
    pub fn from_snr(snr_db: f64, n_users: usize, es: f64) -> Self {
        Self {
            n0: snr_to_n0(snr_db, n_users, es),
            es,
            snr_db,
        }
    }
}

/// Noise variance for a receive-antenna SNR of `K Es / N0`.
pub fn snr_to_n0(snr_db: f64, n_users: usize, es: f64) -> f64 {
    n_users as f64 * es / 10f64.powf(snr_db / 10.0)
}

/// Deterministic per-trial generator: one keyed stream per (seed, stream id).
pub fn trial_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

fn complex_gaussian(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * sigma, im * sigma)
}

/// i.i.d. channel draw with unit-variance circularly-symmetric entries.
pub fn sample_channel(rng: &mut impl Rng, n_rx: usize, n_users: usize) -> Result<ChannelRealization> {
    if n_users < 1 || n_rx < n_users {
        return Err(Error::Config(format!(
            "channel needs n >= k >= 1, got n = {n_rx}, k = {n_users}"
        )));
    }
    let h = ComplexMatrix::from_fn(n_rx, n_users, |_, _| complex_gaussian(rng, 1.0));
    Ok(ChannelRealization { h, n_rx, n_users })
}

/// y = H x + n; the noise vector is returned alongside for diagnostics.
pub fn transmit(
    channel: &ChannelRealization,
    x: &[Complex64],
    n0: f64,
    rng: &mut impl Rng,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if x.len() != channel.n_users {
        return Err(Error::Shape(format!(
            "transmit vector has length {}, channel has {} users",
            x.len(),
            channel.n_users
        )));
    }
    let mut y = channel.h.matvec(x)?;
    let noise: Vec<Complex64> = (0..channel.n_rx).map(|_| complex_gaussian(rng, n0)).collect();
    for (yi, ni) in y.iter_mut().zip(noise.iter()) {
        *yi += *ni;
    }
    Ok((y, noise))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_reproduces_the_channel() {
        let a = sample_channel(&mut trial_rng(9, 4), 4, 2).unwrap();
        let b = sample_channel(&mut trial_rng(9, 4), 4, 2).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = sample_channel(&mut trial_rng(9, 5), 4, 2).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn single_entry_shape() {
        let ch = sample_channel(&mut trial_rng(1, 0), 1, 1).unwrap();
        assert_eq!(ch.matrix().rows(), 1);
        assert_eq!(ch.matrix().cols(), 1);
    }

    #[test]
    fn invalid_shapes_are_config_errors() {
        assert!(sample_channel(&mut trial_rng(1, 0), 2, 3).is_err());
        assert!(sample_channel(&mut trial_rng(1, 0), 2, 0).is_err());
    }

    #[test]
    fn entry_statistics() {
        // 1e5 draws of a single entry: |mean| < 0.02, |var - 1| < 0.02 (3 sigma).
        let mut rng = trial_rng(7, 0);
        let n = 100_000;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sum_sqr = 0.0;
        for _ in 0..n {
            let h = sample_channel(&mut rng, 1, 1).unwrap();
            let z = h.matrix().get(0, 0);
            sum += z;
            sum_sqr += z.norm_sqr();
        }
        let mean = sum / n as f64;
        let var = sum_sqr / n as f64 - mean.norm_sqr();
        assert!(mean.norm() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn snr_conversion() {
        assert!((snr_to_n0(0.0, 8, 1.0) - 8.0).abs() < 1e-12);
        assert!((snr_to_n0(10.0, 8, 1.0) - 0.8).abs() < 1e-12);
        assert!((snr_to_n0(3.0103, 1, 1.0) - 0.5).abs() < 1e-4);
    }

    #[test]
    fn noiseless_transmit_is_exact() {
        let mut rng = trial_rng(3, 0);
        let ch = sample_channel(&mut rng, 4, 2).unwrap();
        let x = vec![Complex64::new(1.0, -1.0), Complex64::new(-0.5, 0.25)];
        let (y, noise) = transmit(&ch, &x, 0.0, &mut rng).unwrap();
        let hx = ch.matrix().matvec(&x).unwrap();
        for ((a, b), n) in y.iter().zip(hx.iter()).zip(noise.iter()) {
            assert_eq!(n.norm(), 0.0);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn identity_channel_passes_noise_through() {
        let mut rng = trial_rng(5, 0);
        let ch = ChannelRealization {
            h: ComplexMatrix::identity(3),
            n_rx: 3,
            n_users: 3,
        };
        let x = vec![Complex64::new(1.0, 0.0); 3];
        let (y, noise) = transmit(&ch, &x, 0.5, &mut rng).unwrap();
        for i in 0..3 {
            assert!((y[i] - x[i] - noise[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn noise_energy_statistics() {
        // E||n||^2 = N n0; per-element variance within 2% over 1e5 draws.
        let mut rng = trial_rng(11, 0);
        let ch = sample_channel(&mut rng, 8, 2).unwrap();
        let x = vec![Complex64::new(0.0, 0.0); 2];
        let n0 = 0.7;
        let draws = 100_000 / 8;
        let mut total = 0.0;
        for _ in 0..draws {
            let (_, noise) = transmit(&ch, &x, n0, &mut rng).unwrap();
            total += noise.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let per_element = total / (draws * 8) as f64;
        assert!((per_element - n0).abs() < 0.02 * n0, "var {per_element}");
    }

    #[test]
    fn transmit_shape_mismatch() {
        let mut rng = trial_rng(1, 0);
        let ch = sample_channel(&mut rng, 4, 2).unwrap();
        let x = vec![Complex64::new(0.0, 0.0); 3];
        assert!(matches!(transmit(&ch, &x, 1.0, &mut rng), Err(Error::Shape(_))));
    }
}
