//! Square M-QAM alphabets with Gray bit labels, hard-decision quantization
//! and bit mapping.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A square M-QAM constellation.
///
/// Points live on an L x L grid (L = sqrt(M)) of odd multiples of the grid
/// half-spacing, scaled so the average symbol energy equals `es`. Labels put
/// a Gray code on each axis independently, so grid-adjacent points differ in
/// exactly one bit.
#[derive(Debug, Clone)]
pub struct Constellation {
    order: usize,
    points: Vec<Complex64>,
    bit_labels: Vec<u16>,
    bits_per_symbol: usize,
    d_min: f64,
    es: f64,
    levels: Vec<f64>,
}

/// Gray-labeled square QAM with the requested average symbol energy.
pub fn build_qam(m: usize, es: f64) -> Result<Constellation> {
    if !matches!(m, 4 | 16 | 64) {
        return Err(Error::Config(format!("unsupported constellation order {m}; use 4, 16 or 64")));
    }
    if !(es > 0.0 && es.is_finite()) {
        return Err(Error::Config(format!("average symbol energy must be positive, got {es}")));
    }
    let side = (m as f64).sqrt() as usize;
    let bits_per_axis = side.trailing_zeros() as usize;
    // Unit-spaced odd levels (-L+1, ..., -1, 1, ..., L-1) carry average
    // energy 2(M-1)/3 per complex symbol.
    let scale = (3.0 * es / (2.0 * (m as f64 - 1.0))).sqrt();
    let levels: Vec<f64> = (0..side).map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) * scale).collect();

    let mut points = Vec::with_capacity(m);
    let mut bit_labels = Vec::with_capacity(m);
    for (re_idx, &re) in levels.iter().enumerate() {
        for (im_idx, &im) in levels.iter().enumerate() {
            points.push(Complex64::new(re, im));
            let label = (gray(re_idx as u16) << bits_per_axis) | gray(im_idx as u16);
            bit_labels.push(label);
        }
    }

    let mut d_min = f64::INFINITY;
    for i in 0..m {
        for j in i + 1..m {
            d_min = d_min.min((points[i] - points[j]).norm());
        }
    }

    Ok(Constellation {
        order: m,
        points,
        bit_labels,
        bits_per_symbol: 2 * bits_per_axis,
        d_min,
        es,
        levels,
    })
}

fn gray(n: u16) -> u16 {
    n ^ (n >> 1)
}

impl Constellation {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn bit_labels(&self) -> &[u16] {
        &self.bit_labels
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Minimum distance between distinct points.
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    /// Average symbol energy.
    pub fn es(&self) -> f64 {
        self.es
    }

    /// Nearest constellation point per element.
    ///
    /// Square QAM quantizes the real and imaginary axes independently, which
    /// is equivalent to nearest-point in Euclidean distance. Exact midpoints
    /// resolve toward the smaller level, i.e. the point with the smaller real
    /// part and then the smaller imaginary part.
    pub fn quantize(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        v.iter().map(|&z| self.quantize_scalar(z)).collect()
    }

    pub fn quantize_scalar(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Numeric(format!("cannot quantize non-finite value {z}")));
        }
        Ok(Complex64::new(self.nearest_level(z.re), self.nearest_level(z.im)))
    }

    fn nearest_level(&self, x: f64) -> f64 {
        let side = self.levels.len();
        let scale = self.levels[1] - self.levels[0];
        let t = (x - self.levels[0]) / scale;
        let lo = (t.floor().max(0.0) as usize).min(side - 1);
        let hi = (lo + 1).min(side - 1);
        // Compare actual distances so an exact midpoint resolves to the
        // smaller level regardless of rounding in t.
        if (x - self.levels[lo]).abs() <= (self.levels[hi] - x).abs() {
            self.levels[lo]
        } else {
            self.levels[hi]
        }
    }

    /// Index of `s` in the point list; `s` must be a constellation point.
    pub fn point_index(&self, s: Complex64) -> Result<usize> {
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for (i, &p) in self.points.iter().enumerate() {
            let d = (s - p).norm();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        if best_dist > 1e-9 * self.d_min {
            return Err(Error::Domain(format!("{s} is not a constellation point")));
        }
        Ok(best)
    }

    /// Gray demapping; every symbol must be a constellation point.
    pub fn symbols_to_bits(&self, symbols: &[Complex64]) -> Result<Vec<bool>> {
        let mut bits = Vec::with_capacity(symbols.len() * self.bits_per_symbol);
        for &s in symbols {
            let label = self.bit_labels[self.point_index(s)?];
            for b in (0..self.bits_per_symbol).rev() {
                bits.push((label >> b) & 1 == 1);
            }
        }
        Ok(bits)
    }

    /// Gray mapping; the bit count must be a multiple of log2(M).
    pub fn bits_to_symbols(&self, bits: &[bool]) -> Result<Vec<Complex64>> {
        if bits.len() % self.bits_per_symbol != 0 {
            return Err(Error::Domain(format!(
                "bit vector length {} is not a multiple of {}",
                bits.len(),
                self.bits_per_symbol
            )));
        }
        bits.chunks(self.bits_per_symbol)
            .map(|chunk| {
                let mut label = 0u16;
                for &b in chunk {
                    label = (label << 1) | b as u16;
                }
                self.bit_labels
                    .iter()
                    .position(|&l| l == label)
                    .map(|i| self.points[i])
                    .ok_or_else(|| Error::Domain(format!("no point with label {label:0b}")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn qpsk_geometry() {
        let c = build_qam(4, 1.0).unwrap();
        let s = 0.5f64.sqrt();
        assert_eq!(c.points().len(), 4);
        for p in c.points() {
            assert!((p.re.abs() - s).abs() < 1e-15);
            assert!((p.im.abs() - s).abs() < 1e-15);
        }
        // d_min by brute force over all pairs.
        let mut oracle = f64::INFINITY;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    oracle = oracle.min((c.points()[i] - c.points()[j]).norm());
                }
            }
        }
        assert!((c.d_min() - oracle).abs() < 1e-15);
        assert!((c.d_min() - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn qam16_minimum_distance() {
        let c = build_qam(16, 1.0).unwrap();
        assert!((c.d_min() - 2.0 / 10.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn average_energy_matches_es() {
        for (m, es) in [(4, 1.0), (16, 1.0), (64, 1.0), (4, 2.0), (16, 0.25)] {
            let c = build_qam(m, es).unwrap();
            let mean: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((mean - es).abs() <= 1e-12 * es, "M={m} es={es} mean={mean}");
        }
    }

    #[test]
    fn energy_scaling_is_a_pure_rescale() {
        let base = build_qam(4, 1.0).unwrap();
        let scaled = build_qam(4, 2.0).unwrap();
        let f = 2.0f64.sqrt();
        for (a, b) in base.points().iter().zip(scaled.points()) {
            assert!((a * f - b).norm() < 1e-14);
        }
    }

    #[test]
    fn unsupported_order_is_rejected() {
        assert!(matches!(build_qam(8, 1.0), Err(Error::Config(_))));
        assert!(matches!(build_qam(4, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn quantize_fixes_constellation_points() {
        let c = build_qam(16, 1.0).unwrap();
        let pts: Vec<_> = c.points().to_vec();
        assert_eq!(c.quantize(&pts).unwrap(), pts);
    }

    #[test]
    fn quantize_matches_brute_force_nearest() {
        let c4 = build_qam(4, 1.0).unwrap();
        let v = Complex64::new(0.9, 0.1);
        let q = c4.quantize_scalar(v).unwrap();
        let s = 0.5f64.sqrt();
        assert!((q - Complex64::new(s, s)).norm() < 1e-15);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for m in [4usize, 16, 64] {
            let c = build_qam(m, 1.0).unwrap();
            for _ in 0..200 {
                let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let q = c.quantize_scalar(z).unwrap();
                for &p in c.points() {
                    assert!(
                        (z - q).norm() <= (z - p).norm() + 1e-12,
                        "M={m}: {q} is farther from {z} than {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn quantize_tie_rule_picks_smaller_component() {
        let c = build_qam(16, 1.0).unwrap();
        let q = c.quantize_scalar(Complex64::new(0.0, 0.0)).unwrap();
        let s = 1.0 / 10.0f64.sqrt();
        // Innermost point with the smaller real, then smaller imaginary part.
        assert!((q - Complex64::new(-s, -s)).norm() < 1e-15);
    }

    #[test]
    fn quantize_is_idempotent() {
        let c = build_qam(64, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let v: Vec<Complex64> = (0..64)
            .map(|_| Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
            .collect();
        let once = c.quantize(&v).unwrap();
        let twice = c.quantize(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn quantize_rejects_non_finite() {
        let c = build_qam(4, 1.0).unwrap();
        let bad = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(c.quantize_scalar(bad), Err(Error::Numeric(_))));
    }

    #[test]
    fn gray_labels_differ_in_one_bit_between_neighbors() {
        for m in [4usize, 16, 64] {
            let c = build_qam(m, 1.0).unwrap();
            let side = (m as f64).sqrt() as usize;
            let label = |re: usize, im: usize| c.bit_labels()[re * side + im];
            for re in 0..side {
                for im in 0..side {
                    if re + 1 < side {
                        let h = (label(re, im) ^ label(re + 1, im)).count_ones();
                        assert_eq!(h, 1, "M={m} re-neighbors ({re},{im})");
                    }
                    if im + 1 < side {
                        let h = (label(re, im) ^ label(re, im + 1)).count_ones();
                        assert_eq!(h, 1, "M={m} im-neighbors ({re},{im})");
                    }
                }
            }
        }
    }

    #[test]
    fn qpsk_labels_are_the_standard_gray_set() {
        let c = build_qam(4, 1.0).unwrap();
        let mut labels: Vec<u16> = c.bit_labels().to_vec();
        labels.sort_unstable();
        assert_eq!(labels, vec![0b00, 0b01, 0b10, 0b11]);
    }

    #[test]
    fn bit_round_trip_and_lengths() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for m in [4usize, 16, 64] {
            let c = build_qam(m, 1.0).unwrap();
            let symbols: Vec<Complex64> = (0..50)
                .map(|_| c.points()[rng.gen_range(0..m)])
                .collect();
            let bits = c.symbols_to_bits(&symbols).unwrap();
            assert_eq!(bits.len(), 50 * c.bits_per_symbol());
            let back = c.bits_to_symbols(&bits).unwrap();
            assert_eq!(back, symbols);
        }
    }

    #[test]
    fn foreign_symbol_is_a_domain_error() {
        let c = build_qam(4, 1.0).unwrap();
        let bad = [Complex64::new(0.1, 0.1)];
        assert!(matches!(c.symbols_to_bits(&bad), Err(Error::Domain(_))));
    }
}
