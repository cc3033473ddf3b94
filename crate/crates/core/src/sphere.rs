//! Sphere decoding over the complex constellation: the hybrid scheme seeded
//! by an approximate-inverse Babai radius, the adaptive (Schnorr-Euchner
//! style) and fixed-radius baselines, and an exhaustive ML oracle.
//!
//! All costs and radii are squared Euclidean metrics against the
//! triangularized system `z = Q^H y`, `R` from the thin QR of H. The search
//! walks layers from the last user down to the first, enumerating the per
//! layer metrics `c_j = |z_i - sum_{m >= i} r_{i,m} x_m|^2` for every
//! constellation point, sorted ascending with ties broken by point index.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::detect::InverseProvider;
use crate::error::{Error, Result};
use crate::linalg::{vec_norm_sqr, vec_sub, ComplexMatrix};

/// Relative slack on a fixed search radius so that a boundary point whose
/// accumulated cost differs from the radius only by rounding stays inside.
const FIXED_RADIUS_SLACK: f64 = 1e-9;

/// Search-space guard for the exhaustive oracle.
const BRUTE_FORCE_GUARD: f64 = 1e6;

/// Which decoder to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdScheme {
    Proposed,
    SeSd,
    FpSd,
    BruteForce,
}

/// How the initial radius is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusMode {
    BabaiApprox,
    BabaiExact,
    Infinite,
    Fixed(f64),
}

/// Scheme plus radius policy; [`SdConfig::validate`] enforces the pairings.
#[derive(Debug, Clone, Copy)]
pub struct SdConfig {
    pub scheme: SdScheme,
    pub inverse: InverseProvider,
    pub radius_mode: RadiusMode,
}

impl SdConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = match self.scheme {
            SdScheme::SeSd => matches!(self.radius_mode, RadiusMode::Infinite),
            SdScheme::FpSd => matches!(self.radius_mode, RadiusMode::BabaiExact | RadiusMode::Fixed(_)),
            SdScheme::Proposed => matches!(self.radius_mode, RadiusMode::BabaiApprox),
            SdScheme::BruteForce => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "radius mode {:?} is not valid for scheme {:?}",
                self.radius_mode, self.scheme
            )))
        }
    }
}

/// Node and radius accounting for one decode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchStats {
    /// Partial metrics c_j evaluated.
    pub nodes_visited: u64,
    /// Bound tightenings at improving leaves.
    pub leaf_updates: u64,
    pub radius_initial_sq: f64,
    pub radius_final_sq: f64,
    pub found: bool,
}

/// Squared Babai radius ||R (x_q - x_u)||^2 between a quantized point and
/// the unconstrained estimate it was derived from.
pub fn babai_radius_sq(r: &ComplexMatrix, x_q: &[Complex64], x_u: &[Complex64]) -> Result<f64> {
    if x_q.len() != x_u.len() || r.rows() != r.cols() || r.cols() != x_q.len() {
        return Err(Error::Shape(format!(
            "Babai radius with R {}x{}, x_q length {}, x_u length {}",
            r.rows(),
            r.cols(),
            x_q.len(),
            x_u.len()
        )));
    }
    let diff = vec_sub(x_q, x_u);
    Ok(vec_norm_sqr(&r.matvec(&diff)?))
}

enum BoundPolicy {
    /// Shrink the bound at every improving leaf (proposed scheme and SE-SD).
    Tighten,
    /// Keep the radius fixed, collect the best leaf inside it (FP-SD).
    Fixed,
}

struct Searcher<'a> {
    z: &'a [Complex64],
    r: &'a ComplexMatrix,
    points: &'a [Complex64],
    policy: BoundPolicy,
    bound: f64,
    best: Option<Vec<Complex64>>,
    best_cost: f64,
    assignment: Vec<Complex64>,
    stats: SearchStats,
}

impl<'a> Searcher<'a> {
    fn new(z: &'a [Complex64], r: &'a ComplexMatrix, c: &'a Constellation, policy: BoundPolicy, radius_sq: f64) -> Self {
        let k = z.len();
        Searcher {
            z,
            r,
            points: c.points(),
            policy,
            bound: radius_sq,
            best: None,
            best_cost: f64::INFINITY,
            assignment: vec![Complex64::new(0.0, 0.0); k],
            stats: SearchStats {
                nodes_visited: 0,
                leaf_updates: 0,
                radius_initial_sq: radius_sq,
                radius_final_sq: radius_sq,
                found: false,
            },
        }
    }

    /// Depth-first descent at `layer` with cost `acc` accumulated above it.
    fn descend(&mut self, layer: usize, acc: f64) {
        // Interference from the already-fixed layers below in the recursion
        // (indices above `layer` in the triangular system).
        let k = self.z.len();
        let mut b = self.z[layer];
        for m in layer + 1..k {
            b -= self.r.get(layer, m) * self.assignment[m];
        }
        let r_ii = self.r.get(layer, layer);

        let mut children: Vec<(f64, usize)> = Vec::with_capacity(self.points.len());
        for (j, &p) in self.points.iter().enumerate() {
            let c_j = (b - r_ii * p).norm_sqr();
            self.stats.nodes_visited += 1;
            if self.keeps(acc + c_j) {
                children.push((c_j, j));
            }
        }
        children.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

        for (c_j, j) in children {
            let cost = acc + c_j;
            // The bound may have tightened while earlier siblings were explored.
            if !self.keeps(cost) {
                continue;
            }
            self.assignment[layer] = self.points[j];
            if layer == 0 {
                self.take_leaf(cost);
            } else {
                self.descend(layer - 1, cost);
            }
        }
    }

    fn keeps(&self, cost: f64) -> bool {
        match self.policy {
            BoundPolicy::Tighten => cost < self.bound,
            BoundPolicy::Fixed => cost <= self.bound,
        }
    }

    fn take_leaf(&mut self, cost: f64) {
        match self.policy {
            BoundPolicy::Tighten => {
                self.bound = cost;
                self.stats.radius_final_sq = cost;
                self.stats.leaf_updates += 1;
                self.best_cost = cost;
                self.best = Some(self.assignment.clone());
                self.stats.found = true;
            }
            BoundPolicy::Fixed => {
                if cost < self.best_cost {
                    self.best_cost = cost;
                    self.best = Some(self.assignment.clone());
                    self.stats.leaf_updates += 1;
                }
                self.stats.found = true;
            }
        }
    }

    fn run(mut self) -> (Option<Vec<Complex64>>, SearchStats) {
        let k = self.z.len();
        self.descend(k - 1, 0.0);
        (self.best, self.stats)
    }
}

fn check_triangular_inputs(z: &[Complex64], r: &ComplexMatrix) -> Result<()> {
    if r.rows() != r.cols() || r.rows() != z.len() || z.is_empty() {
        return Err(Error::Shape(format!(
            "sphere search needs square R matching z; got R {}x{} and z of length {}",
            r.rows(),
            r.cols(),
            z.len()
        )));
    }
    Ok(())
}

/// Hybrid sphere decoder: depth-first search inside the approximate-inverse
/// Babai radius, tightening on every improving leaf.
///
/// When the sphere turns out to be empty the quantized approximate estimate
/// `fallback` is returned with `found = false`, so a solution always comes
/// back.
pub fn sd_proposed(
    z: &[Complex64],
    r: &ComplexMatrix,
    c: &Constellation,
    cost0_sq: f64,
    fallback: &[Complex64],
) -> Result<(Vec<Complex64>, SearchStats)> {
    check_triangular_inputs(z, r)?;
    if fallback.len() != z.len() {
        return Err(Error::Shape("fallback length differs from z".into()));
    }
    let searcher = Searcher::new(z, r, c, BoundPolicy::Tighten, cost0_sq);
    let (best, mut stats) = searcher.run();
    match best {
        Some(x) => Ok((x, stats)),
        None => {
            stats.found = false;
            stats.radius_final_sq = stats.radius_initial_sq;
            Ok((fallback.to_vec(), stats))
        }
    }
}

/// Adaptive-radius baseline: identical search started from an infinite
/// radius. Always lands on the ML solution.
pub fn sd_se(z: &[Complex64], r: &ComplexMatrix, c: &Constellation) -> Result<(Vec<Complex64>, SearchStats)> {
    check_triangular_inputs(z, r)?;
    let searcher = Searcher::new(z, r, c, BoundPolicy::Tighten, f64::INFINITY);
    let (best, stats) = searcher.run();
    // With an infinite bound the first dive always reaches a leaf.
    Ok((best.expect("infinite radius always yields a leaf"), stats))
}

/// Fixed-radius baseline: collect every leaf inside `r_sq` without ever
/// shrinking the sphere; returns the minimum-cost leaf if any.
pub fn sd_fp(
    z: &[Complex64],
    r: &ComplexMatrix,
    c: &Constellation,
    r_sq: f64,
) -> Result<(Option<Vec<Complex64>>, SearchStats)> {
    check_triangular_inputs(z, r)?;
    if !(r_sq >= 0.0) {
        return Err(Error::Config(format!("fixed radius must be nonnegative, got {r_sq}")));
    }
    let effective = r_sq * (1.0 + FIXED_RADIUS_SLACK);
    let searcher = Searcher::new(z, r, c, BoundPolicy::Fixed, effective);
    let (best, mut stats) = searcher.run();
    stats.radius_initial_sq = r_sq;
    stats.radius_final_sq = r_sq;
    Ok((best, stats))
}

/// Exhaustive minimum of ||z - R x||^2 over the M^K candidate grid, with a
/// lexicographic tie-break over point indices. Test oracle; guarded.
pub fn brute_force_ml(
    z: &[Complex64],
    r: &ComplexMatrix,
    c: &Constellation,
) -> Result<(Vec<Complex64>, f64)> {
    check_triangular_inputs(z, r)?;
    let k = z.len();
    let m = c.order();
    if (m as f64).powi(k as i32) > BRUTE_FORCE_GUARD {
        return Err(Error::Config(format!(
            "brute force over {m}^{k} candidates exceeds the {BRUTE_FORCE_GUARD:.0} guard"
        )));
    }
    let points = c.points();
    let mut indices = vec![0usize; k];
    let mut best_cost = f64::INFINITY;
    let mut best = vec![points[0]; k];
    loop {
        let candidate: Vec<Complex64> = indices.iter().map(|&i| points[i]).collect();
        let cost = vec_norm_sqr(&vec_sub(z, &r.matvec(&candidate)?));
        if cost < best_cost {
            best_cost = cost;
            best = candidate;
        }
        // Mixed-radix increment, last index fastest: lexicographic order.
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok((best, best_cost));
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < m {
                break;
            }
            indices[pos] = 0;
        }
    }
}
