//! The Bryant soliton in its radial form `Φ(r)⁻¹ dr² + r² g_{S²}`,
//! normalized to unit scalar curvature at the tip, and its arc-length form
//! `dz² + B(z)² g_{S²}`.
//!
//! `Φ` solves
//!
//! ```text
//! Φ Φ'' − ½ Φ'² + r⁻² (1 − Φ)(r Φ' + 2Φ) = 0,   Φ = 1 − r²/6 + r⁴/90 + O(r⁶).
//! ```
//!
//! The origin is a regular singular point, so the table is seeded from the
//! series at a small radius and integrated outward with classical RK4.
//! Beyond the last node the two-term asymptote `r⁻² + 2r⁻⁴` is used.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{bisect, Hermite};

/// Seed radius for the outward integration.
pub const R_SEED: f64 = 1e-3;

/// Below this radius `χ` is evaluated from its series.
const CHI_SERIES_RADIUS: f64 = 1e-2;

/// Substeps keep `h ≤ r / SUBSTEP_RATIO` close to the origin.
const SUBSTEP_RATIO: f64 = 100.0;

/// Fourth-order coefficient of the near-field series, from the recursion
/// `10 c₄ − 4 c₂² = 0` with `c₂ = −1/6`.
pub const C4: f64 = 1.0 / 90.0;

fn series_phi(r: f64) -> (f64, f64) {
    let r2 = r * r;
    (1.0 - r2 / 6.0 + C4 * r2 * r2, -r / 3.0 + 4.0 * C4 * r2 * r)
}

fn far_phi(r: f64) -> (f64, f64) {
    let r2 = r * r;
    (1.0 / r2 + 2.0 / (r2 * r2), -2.0 / (r2 * r) - 8.0 / (r2 * r2 * r))
}

/// Second derivative from the ODE.
pub fn phi_second(r: f64, phi: f64, dphi: f64) -> f64 {
    (0.5 * dphi * dphi - (1.0 - phi) * (r * dphi + 2.0 * phi) / (r * r)) / phi
}

/// ODE residual `ΦΦ'' − ½Φ'² + r⁻²(1−Φ)(rΦ'+2Φ)`.
pub fn residual(r: f64, phi: f64, dphi: f64, d2phi: f64) -> f64 {
    phi * d2phi - 0.5 * dphi * dphi + (1.0 - phi) * (r * dphi + 2.0 * phi) / (r * r)
}

/// Sampled Bryant profile on a uniform radial grid starting at `r = 0`.
#[derive(Debug, Clone)]
pub struct PhiTable {
    pub r_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_prime: Vec<f64>,
    pub r_max: f64,
    /// Largest ODE residual over interior nodes (centred `Φ''`).
    pub max_residual: f64,
    /// Largest node difference against a half-step integration.
    pub richardson_error: f64,
    /// Smallest `K` with `Φ⁻¹ − 1 ≥ r²/K` on the grid.
    pub k_emp: f64,
    interp: Hermite,
}

/// Integrate the profile on `[0, r_max]` with nodes every `dr`.
pub fn solve_phi(r_max: f64, dr: f64) -> Result<PhiTable> {
    if !(r_max > 0.0 && dr > 0.0) {
        return Err(Error::Config(format!("solve_phi: r_max = {r_max}, dr = {dr}")));
    }
    if R_SEED >= r_max {
        return Err(Error::Config(format!("seed radius {R_SEED} not below r_max = {r_max}")));
    }
    let n = (r_max / dr).round() as usize;
    if n < 4 {
        return Err(Error::Config("solve_phi: fewer than four intervals".into()));
    }
    let (phi, phi_prime) = integrate(n, dr, 1)?;
    let (phi_half, _) = integrate(2 * n, 0.5 * dr, 2)?;
    let richardson_error = (0..=n).map(|i| (phi[i] - phi_half[2 * i]).abs()).fold(0.0, f64::max);

    let r_grid: Vec<f64> = (0..=n).map(|i| i as f64 * dr).collect();
    let mut max_residual: f64 = 0.0;
    for i in 1..n {
        let d2 = (phi_prime[i + 1] - phi_prime[i - 1]) / (2.0 * dr);
        let res = residual(r_grid[i], phi[i], phi_prime[i], d2);
        max_residual = max_residual.max(res.abs());
    }
    let mut k_emp: f64 = 6.0;
    for i in 1..=n {
        let r = r_grid[i];
        k_emp = k_emp.max(r * r / (1.0 / phi[i] - 1.0));
    }
    let interp = Hermite::monotone_with_slopes(r_grid.clone(), phi.clone(), phi_prime.clone())?;
    Ok(PhiTable { r_max: r_grid[n], r_grid, phi, phi_prime, max_residual, richardson_error, k_emp, interp })
}

/// RK4 on the uniform grid `i·dr`, `i = 0..=n`. `refine` only selects the
/// seed node so that coarse and refined runs start at the same radius.
fn integrate(n: usize, dr: f64, refine: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let k_seed = ((R_SEED / dr).round() as usize).max(refine);
    let mut phi = vec![0.0; n + 1];
    let mut dphi = vec![0.0; n + 1];
    for i in 0..=k_seed.min(n) {
        let (p, d) = series_phi(i as f64 * dr);
        phi[i] = p;
        dphi[i] = d;
    }
    let f = |r: f64, y: [f64; 2]| [y[1], phi_second(r, y[0], y[1])];
    let rk4 = |r: f64, y: [f64; 2], h: f64| {
        let k1 = f(r, y);
        let k2 = f(r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = f(r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    };
    for i in k_seed..n {
        let r0 = i as f64 * dr;
        // Near the singular point the linearization has rates ~ √2/r, so
        // the step is capped at r/SUBSTEP_RATIO until the grid step fits.
        let m = ((dr * SUBSTEP_RATIO / r0).ceil() as usize).max(1);
        let h = dr / m as f64;
        let mut y = [phi[i], dphi[i]];
        for k in 0..m {
            y = rk4(r0 + k as f64 * h, y, h);
        }
        let (p, d) = (y[0], y[1]);
        if !(p > 0.0 && p <= 1.0) || !d.is_finite() {
            return Err(Error::Integration(format!("Phi left (0, 1] after r = {r0} (last good radius)")));
        }
        phi[i + 1] = p;
        dphi[i + 1] = d;
    }
    Ok((phi, dphi))
}

impl PhiTable {
    /// `Φ(r)` for any `r ≥ 0`, extended by the far-field asymptote.
    pub fn phi(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.r_max {
            far_phi(r).0
        } else {
            self.interp.eval(r)
        }
    }

    /// `Φ'(r)` for any `r ≥ 0`, extended by the far-field asymptote.
    pub fn phi_prime(&self, r: f64) -> f64 {
        if r > self.r_max {
            far_phi(r).1
        } else {
            self.interp.deriv(r)
        }
    }

    /// `χ(r) = r⁻²(Φ⁻¹ − 1)` with the limit `1/6` at the origin; valid for
    /// all `r ≥ 0` through the far-field extension.
    pub fn chi(&self, r: f64) -> f64 {
        let r = r.abs();
        if r < CHI_SERIES_RADIUS {
            1.0 / 6.0 + r * r / 60.0
        } else {
            (1.0 / self.phi(r) - 1.0) / (r * r)
        }
    }

    /// Check the structural invariants of the table.
    pub fn validate(&self) -> Result<()> {
        if self.phi[0] != 1.0 {
            return Err(Error::Degenerate("Phi(0) != 1".into()));
        }
        for (i, (&r, &p)) in self.r_grid.iter().zip(&self.phi).enumerate().skip(1) {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Degenerate(format!("Phi({r}) = {p} outside (0,1)")));
            }
            if r <= self.r_grid[i - 1] {
                return Err(Error::Degenerate("radii not increasing".into()));
            }
            if 1.0 / p - 1.0 < r * r / self.k_emp * (1.0 - 1e-12) {
                return Err(Error::Degenerate(format!("K_emp bound fails at r = {r}")));
            }
        }
        Ok(())
    }

    /// CSV dump with header `r,phi,phi_prime` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,phi,phi_prime")?;
        for i in 0..self.r_grid.len() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", self.r_grid[i], self.phi[i], self.phi_prime[i])?;
        }
        Ok(())
    }
}

/// `χ(r)` with a range check against the solved grid.
pub fn eval_chi(tab: &PhiTable, r: f64) -> Result<f64> {
    if !(0.0..=tab.r_max).contains(&r) {
        return Err(Error::Range(format!("chi: r = {r} outside [0, {}]", tab.r_max)));
    }
    Ok(tab.chi(r))
}

/// The root `B*` of `rΦ'(r) + 2Φ(r)`; `(B²)'' < 0` beyond it.
pub fn concavity_threshold(tab: &PhiTable) -> Result<f64> {
    let g = |r: f64| r * tab.phi_prime(r) + 2.0 * tab.phi(r);
    let idx = tab
        .r_grid
        .iter()
        .zip(tab.phi.iter().zip(&tab.phi_prime))
        .position(|(&r, (&p, &d))| r * d + 2.0 * p < 0.0)
        .ok_or_else(|| Error::Range("no sign change of r Phi' + 2 Phi on the grid; extend r_max".into()))?;
    bisect(g, tab.r_grid[idx - 1], tab.r_grid[idx], 1e-14)
}

/// Arc-length samples `B(z)` with `B' = √Φ(B)`, `B(0) = 0`.
#[derive(Debug, Clone)]
pub struct BryantCurve {
    pub z_grid: Vec<f64>,
    pub b: Vec<f64>,
    pub b_prime: Vec<f64>,
    interp: Hermite,
    inverse: Hermite,
}

/// Default arc-length step for [`arc_length_profile`].
pub const DEFAULT_DZ: f64 = 1e-3;

/// Integrate `B' = √Φ(B)` on `[0, z_max]` with the default step.
pub fn arc_length_profile(tab: &PhiTable, z_max: f64) -> Result<BryantCurve> {
    arc_length_profile_with_step(tab, z_max, DEFAULT_DZ)
}

/// Integrate `B' = √Φ(B)` on `[0, z_max]` with RK4 steps of size `dz`.
pub fn arc_length_profile_with_step(tab: &PhiTable, z_max: f64, dz: f64) -> Result<BryantCurve> {
    if !(z_max > 0.0 && dz > 0.0) {
        return Err(Error::Config(format!("arc_length_profile: z_max = {z_max}, dz = {dz}")));
    }
    let n = (z_max / dz).ceil() as usize;
    let rate = |b: f64| -> Result<f64> {
        let p = tab.phi(b);
        if p <= 0.0 {
            return Err(Error::Degenerate(format!("corrupt table: Phi({b}) = {p}")));
        }
        Ok(p.sqrt())
    };
    let mut b = vec![0.0; n + 1];
    for i in 0..n {
        let y = b[i];
        let k1 = rate(y)?;
        let k2 = rate(y + 0.5 * dz * k1)?;
        let k3 = rate(y + 0.5 * dz * k2)?;
        let k4 = rate(y + dz * k3)?;
        b[i + 1] = y + dz / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    let z_grid: Vec<f64> = (0..=n).map(|i| i as f64 * dz).collect();
    let b_prime: Vec<f64> = b.iter().map(|&v| tab.phi(v).sqrt()).collect();
    let interp = Hermite::with_slopes(z_grid.clone(), b.clone(), b_prime.clone())?;
    let inverse = Hermite::with_slopes(b.clone(), z_grid.clone(), b_prime.iter().map(|d| 1.0 / d).collect())?;
    Ok(BryantCurve { z_grid, b, b_prime, interp, inverse })
}

impl BryantCurve {
    /// `B(z)`; odd reflection for negative `z`.
    pub fn b_at(&self, z: f64) -> f64 {
        z.signum() * self.interp.eval(z.abs())
    }

    /// `B'(z)`.
    pub fn b_prime_at(&self, z: f64) -> f64 {
        self.interp.deriv(z.abs())
    }

    /// Arc length at which the curve reaches radius `b`.
    pub fn z_of_b(&self, b: f64) -> f64 {
        self.inverse.eval(b)
    }

    pub fn z_max(&self) -> f64 {
        *self.z_grid.last().unwrap()
    }
}
