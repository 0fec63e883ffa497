//! Seeded test functions for the randomized inequality checks.

use ancient_ricci::spectral::HalfLine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth functions on `[0, x_max]`: a quartic in `ξ/x_max`, two
/// sinusoids and a Gaussian bump.
pub fn half_line(seed: u64, count: usize, x_max: f64, h: f64) -> Vec<HalfLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let poly: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let waves: Vec<(f64, f64, f64)> =
                (0..2).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.3..6.0), rng.gen_range(0.0..6.3))).collect();
            let (amp, centre, width) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.0..x_max), rng.gen_range(0.2..1.5));
            HalfLine::sample(x_max, h, |x| {
                let u = x / x_max;
                let p = poly.iter().rev().fold(0.0, |acc, c| acc * u + c);
                let w: f64 = waves.iter().map(|(a, k, ph)| a * (k * x + ph).sin()).sum();
                p + w + amp * (-((x - centre) / width).powi(2)).exp()
            })
        })
        .collect()
}

/// Coefficients of `f(ρ) = u(c0 + c1 u + c2 u²) + a sin(ω u)` with
/// `u = ρ/(2θ)`, so `f(0) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct TipFunction {
    c: [f64; 3],
    a: f64,
    omega: f64,
    scale: f64,
}

impl TipFunction {
    pub fn eval(&self, rho: f64) -> f64 {
        let u = rho / self.scale;
        u * (self.c[0] + u * (self.c[1] + u * self.c[2])) + self.a * (self.omega * u).sin()
    }
}

pub fn tip(seed: u64, count: usize, theta: f64) -> Vec<TipFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| TipFunction {
            c: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            a: rng.gen_range(-1.0..1.0),
            omega: rng.gen_range(0.5..20.0),
            scale: 2.0 * theta,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_deterministic() {
        let a = half_line(3, 4, 10.0, 0.1);
        let b = half_line(3, 4, 10.0, 0.1);
        assert!(a.iter().zip(&b).all(|(x, y)| x.values == y.values));
        assert_ne!(half_line(4, 1, 10.0, 0.1)[0].values, a[0].values);
        for f in tip(5, 20, 0.05) {
            assert_eq!(f.eval(0.0), 0.0);
        }
    }
}
