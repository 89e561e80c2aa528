//! Deterministic sample points.
//!
//! Verdicts are computed over a Halton sequence with a seeded
//! Cranley-Patterson rotation, so reports depend only on the seed and the
//! sample count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default seed for every randomized check.
pub const DEFAULT_SEED: u64 = 42;

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127,
    131,
];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    out
}

/// Shifted Halton points in the unit cube.
#[derive(Clone, Debug)]
pub struct Halton {
    shift: Vec<f64>,
}

impl Halton {
    /// `dim` may not exceed 32.
    pub fn new(dim: usize, seed: u64) -> Halton {
        assert!(dim <= PRIMES.len(), "Halton dimension {dim} too large");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Halton { shift: (0..dim).map(|_| rng.gen::<f64>()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// The `i`-th point (index 0 is skipped internally to avoid the origin).
    pub fn point(&self, i: usize) -> Vec<f64> {
        self.shift
            .iter()
            .enumerate()
            .map(|(d, s)| {
                let x = radical_inverse(i as u64 + 1, PRIMES[d]) + s;
                x - x.floor()
            })
            .collect()
    }
}

/// An axis-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn cube(dim: usize, half_width: f64) -> SampleBox {
        SampleBox { lo: vec![-half_width; dim], hi: vec![half_width; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn map(&self, u: &[f64]) -> Vec<f64> {
        u.iter().enumerate().map(|(i, t)| self.lo[i] + t * (self.hi[i] - self.lo[i])).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, v)| *v >= self.lo[i] && *v <= self.hi[i])
    }
}

/// Maps `u ∈ [0,1)` to `±[lo, hi]`, alternating sign halves.
pub fn signed_band(u: f64, lo: f64, hi: f64) -> f64 {
    if u < 0.5 {
        -(lo + 2.0 * u * (hi - lo))
    } else {
        lo + (2.0 * u - 1.0) * (hi - lo)
    }
}

/// `n` points of `bx`.
pub fn box_points(bx: &SampleBox, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let h = Halton::new(bx.dim(), seed);
    (0..n).map(|i| bx.map(&h.point(i))).collect()
}

/// A seeded generator for auxiliary random data (random expressions,
/// random tangent vectors).
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform vector in `[-w, w]^n`.
pub fn uniform_vec(rng: &mut impl Rng, n: usize, w: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-w..=w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_unit_cube() {
        let a = Halton::new(5, 7);
        let b = Halton::new(5, 7);
        for i in 0..100 {
            let p = a.point(i);
            assert_eq!(p, b.point(i));
            assert!(p.iter().all(|x| (0.0..1.0).contains(x)));
        }
        assert_ne!(Halton::new(5, 8).point(0), a.point(0));
    }

    #[test]
    fn low_discrepancy_mean() {
        let h = Halton::new(3, 1);
        let n = 512;
        let mut mean = [0.0; 3];
        for i in 0..n {
            for (m, x) in mean.iter_mut().zip(h.point(i)) {
                *m += x / n as f64;
            }
        }
        assert!(mean.iter().all(|m| (m - 0.5).abs() < 0.01));
    }

    #[test]
    fn band_covers_both_signs() {
        assert_eq!(signed_band(0.0, 0.05, 1.0), -0.05);
        assert!((signed_band(0.999_999, 0.05, 1.0) - 1.0).abs() < 1e-5);
        assert_eq!(signed_band(0.5, 0.05, 1.0), 0.05);
    }
}
