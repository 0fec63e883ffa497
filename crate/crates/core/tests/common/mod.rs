//! Seeded test-function families shared by the integration tests.

#![allow(dead_code)]

use ancient_ricci::spectral::HalfLine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(L1, L2, L3)` triples for the cylindrical Poincare checks.
pub const CYLINDRICAL_CONFIGS: [(f64, f64, f64); 3] = [(4.0, 5.0, 10.0), (4.0, 6.0, 12.0), (5.0, 6.5, 14.0)];

/// Random smooth functions on `[0, x_max]`: a low-degree polynomial in
/// `ξ/x_max`, two sinusoids and one Gaussian bump, all with seeded
/// coefficients.
pub fn smooth_family(seed: u64, count: usize, x_max: f64, h: f64) -> Vec<HalfLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let poly: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let waves: Vec<(f64, f64, f64)> =
                (0..2).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.3..6.0), rng.gen_range(0.0..6.3))).collect();
            let bump = (rng.gen_range(-2.0..2.0), rng.gen_range(0.0..x_max), rng.gen_range(0.2..1.5));
            HalfLine::sample(x_max, h, |x| {
                let u = x / x_max;
                let p = poly.iter().rev().fold(0.0, |acc, c| acc * u + c);
                let w: f64 = waves.iter().map(|(a, k, ph)| a * (k * x + ph).sin()).sum();
                let b = bump.0 * (-((x - bump.1) / bump.2).powi(2)).exp();
                p + w + b
            })
        })
        .collect()
}
