//! Tip-region weights and the weighted Poincaré inequality.
//!
//! Given a tip frame `ξ_±(ρ)`, `V_±(ρ)` the weight is
//!
//! ```text
//! μ(ρ) = −ζ(ρ) ξ²/4 − ∫_ρ^θ ζ'(ρ̃) ξ(ρ̃)²/4 dρ̃
//!        − ∫_ρ^θ (1 − ζ(ρ̃)) ρ̃⁻¹ (Φ(√(−τ) ρ̃)⁻¹ − 1) dρ̃
//! ```
//!
//! with `ζ` a smooth monotone cutoff from 0 on `ρ ≤ θ/8` to 1 on `ρ ≥ θ/4`.
//! The same formula serves both sides, since only `ξ²` enters.

use std::io::Write;

use crate::bryant::PhiTable;
use crate::error::{Error, Result};
use crate::numerics::{fd_slopes, simpson, smooth_step, smooth_step_deriv, trapz, Hermite};
use crate::rescale::{Side, TipFrame};

/// Cutoff `ζ(ρ)`: zero on `ρ ≤ θ/8`, one on `ρ ≥ θ/4`.
pub fn zeta(rho: f64, theta: f64) -> f64 {
    smooth_step((rho - theta / 8.0) / (theta / 8.0))
}

/// `ζ'(ρ)`.
pub fn zeta_prime(rho: f64, theta: f64) -> f64 {
    smooth_step_deriv((rho - theta / 8.0) / (theta / 8.0)) * 8.0 / theta
}

/// Weight samples on the tip frame's grid, restricted to `ρ ≤ 2θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub theta: f64,
    pub side: Side,
    pub tau: f64,
    pub rho_grid: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu_rho: Vec<f64>,
    pub mu_rhorho: Vec<f64>,
}

impl WeightTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "rho,mu,mu_rho")?;
        for i in 0..self.rho_grid.len() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", self.rho_grid[i], self.mu[i], self.mu_rho[i])?;
        }
        Ok(())
    }
}

/// Simpson subdivisions per grid cell used by [`build_mu`].
pub const DEFAULT_SUBDIVISIONS: usize = 8;

pub fn build_mu(tip: &TipFrame, phi: &PhiTable, theta: f64) -> Result<WeightTable> {
    build_mu_with(tip, phi, theta, DEFAULT_SUBDIVISIONS)
}

/// [`build_mu`] with an explicit number of (even) Simpson subdivisions per
/// cell of the tip grid.
pub fn build_mu_with(tip: &TipFrame, phi: &PhiTable, theta: f64, subdivisions: usize) -> Result<WeightTable> {
    if !(theta > 0.0) || subdivisions < 2 || !subdivisions.is_multiple_of(2) {
        return Err(Error::Config(format!("theta = {theta}, subdivisions = {subdivisions}")));
    }
    let top = 2.0 * theta;
    let last = tip.rho_grid.len().checked_sub(1).ok_or_else(|| Error::Grid("empty tip frame".into()))?;
    if tip.rho_grid[last] < top * (1.0 - 1e-9) {
        return Err(Error::Range(format!(
            "tip frame reaches rho = {}, weights need 2*theta = {top}",
            tip.rho_grid[last]
        )));
    }
    let mt = -tip.tau;
    let scale = mt.sqrt();
    if scale * top > phi.r_max {
        return Err(Error::Range(format!(
            "Phi table ends at r = {}, weights need {}; extend the table",
            phi.r_max,
            scale * top
        )));
    }
    let n = tip.rho_grid.partition_point(|&r| r <= top * (1.0 + 1e-9));
    let rho = tip.rho_grid[..n].to_vec();
    let v = &tip.v[..n];
    let sign = match tip.side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
    };
    let xi_rho: Vec<f64> = v.iter().map(|v| -sign / v).collect();
    let xi = Hermite::with_slopes(rho.clone(), tip.xi_of_rho[..n].to_vec(), xi_rho.clone())?;
    let v_rho = fd_slopes(&rho, v);

    // ρ⁻¹(Φ⁻¹ − 1) = (−τ) ρ χ(√(−τ) ρ), regular at the axis.
    let bryant_term = |r: f64| mt * r * phi.chi(scale * r);
    let integrand = |r: f64| {
        let x = xi.eval(r);
        zeta_prime(r, theta) * 0.25 * x * x + (1.0 - zeta(r, theta)) * bryant_term(r)
    };
    // Cell integrals, then cumulative sums from the top down.
    let mut tail = vec![0.0; n];
    for j in (0..n - 1).rev() {
        let (a, b) = (rho[j], rho[j + 1]);
        let h = (b - a) / subdivisions as f64;
        let ys: Vec<f64> = (0..=subdivisions).map(|k| integrand(a + k as f64 * h)).collect();
        tail[j] = tail[j + 1] + simpson(&ys, h);
    }
    // Both integrands vanish above θ/4, so integrating to 2θ instead of θ
    // changes nothing.
    let mut mu = Vec::with_capacity(n);
    let mut mu_rho = Vec::with_capacity(n);
    let mut mu_rhorho = Vec::with_capacity(n);
    for j in 0..n {
        let r = rho[j];
        let x = tip.xi_of_rho[j];
        let (z, zp) = (zeta(r, theta), zeta_prime(r, theta));
        let d1 = 0.5 * x * xi_rho[j];
        let xi_rr = sign * v_rho[j] / (v[j] * v[j]);
        let d2 = 0.5 * (xi_rho[j] * xi_rho[j] + x * xi_rr);
        let p = phi.phi(scale * r);
        let dp = phi.phi_prime(scale * r);
        mu.push(-z * 0.25 * x * x - tail[j]);
        mu_rho.push(-z * d1 + (1.0 - z) * bryant_term(r));
        mu_rhorho.push(
            -z * d2 - zp * d1 - (1.0 - z + r * zp) * mt * phi.chi(scale * r) - (1.0 - z) * scale / r * dp / (p * p),
        );
    }
    Ok(WeightTable { theta, side: tip.side, tau: tip.tau, rho_grid: rho, mu, mu_rho, mu_rhorho })
}

/// Largest relative change of `μ` when the quadrature step is halved.
pub fn quadrature_stability(tip: &TipFrame, phi: &PhiTable, theta: f64) -> Result<f64> {
    let a = build_mu_with(tip, phi, theta, DEFAULT_SUBDIVISIONS)?;
    let b = build_mu_with(tip, phi, theta, 2 * DEFAULT_SUBDIVISIONS)?;
    Ok(a.mu.iter().zip(&b.mu).map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max))
}

/// Relative deviation of `∂μ/∂ρ` from `ρ⁻¹(V⁻² − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    /// Worst ratio over nodes where the reference is nonzero.
    pub max_ratio: Option<f64>,
    pub at_rho: Option<f64>,
    /// True when `V ≡ 1` makes every ratio 0/0.
    pub vacuous: bool,
    pub eta: f64,
    pub pass: bool,
}

pub fn mu_gradient_check(wt: &WeightTable, tip: &TipFrame, eta: f64) -> Result<GradientReport> {
    if tip.side != wt.side || tip.rho_grid.len() < wt.rho_grid.len() {
        return Err(Error::Grid("weight table and tip frame do not share a grid".into()));
    }
    let mut worst: Option<(f64, f64)> = None;
    for (j, &r) in wt.rho_grid.iter().enumerate() {
        if (tip.rho_grid[j] - r).abs() > 1e-12 * r {
            return Err(Error::Grid(format!("grids differ at node {j}")));
        }
        let v = tip.v[j];
        let reference = (1.0 / (v * v) - 1.0) / r;
        if reference.abs() <= 1e-14 / r {
            continue;
        }
        let ratio = (wt.mu_rho[j] - reference).abs() / reference.abs();
        if worst.is_none_or(|(w, _)| ratio > w) {
            worst = Some((ratio, r));
        }
    }
    let vacuous = worst.is_none();
    Ok(GradientReport {
        max_ratio: worst.map(|w| w.0),
        at_rho: worst.map(|w| w.1),
        vacuous,
        eta,
        pass: worst.is_none_or(|(w, _)| w <= eta),
    })
}

/// Smallest `K ≥ 0` with `μ_ρρ ≤ ¼μ_ρ² + (K/4)ρ⁻²` at every node of every
/// table.
pub fn fit_k_star(tables: &[WeightTable]) -> f64 {
    tables
        .iter()
        .flat_map(|t| {
            (0..t.rho_grid.len()).map(move |j| {
                let r = t.rho_grid[j];
                4.0 * r * r * (t.mu_rhorho[j] - 0.25 * t.mu_rho[j] * t.mu_rho[j])
            })
        })
        .fold(0.0, f64::max)
}

/// Outcome of the weighted Poincaré check on one test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `f(0) ≠ 0`: the `ρ⁻²` integral diverges and the check is vacuous.
    pub infinite_rhs: bool,
    pub pass: bool,
}

/// `∫ μ_ρ² f² e^{−μ} ≤ 8 ∫ f'² e^{−μ} + K ∫ ρ⁻² f² e^{−μ}` over `[0, 2θ]`.
///
/// `f` is sampled at the origin and on the table's grid; its derivative is
/// differenced from those samples.
pub fn poincare_tip_check<F: Fn(f64) -> f64>(wt: &WeightTable, f: F, k_star: f64) -> PoincareReport {
    let f0 = f(0.0);
    if f0.abs() > 1e-12 {
        return PoincareReport { lhs: f64::NAN, rhs: f64::INFINITY, infinite_rhs: true, pass: true };
    }
    let mut rho = vec![0.0];
    rho.extend_from_slice(&wt.rho_grid);
    let fv: Vec<f64> = rho.iter().map(|&r| f(r)).collect();
    let df = fd_slopes(&rho, &fv);
    // μ at the axis from μ_ρ(0) = 0 and the trapezoid rule on the first cell.
    let mu0 = wt.mu[0] - 0.5 * wt.rho_grid[0] * wt.mu_rho[0];
    let mut mu = vec![mu0];
    mu.extend_from_slice(&wt.mu);
    let mut mu_rho = vec![0.0];
    mu_rho.extend_from_slice(&wt.mu_rho);
    let w: Vec<f64> = mu.iter().map(|m| (-m).exp()).collect();
    let lhs_i: Vec<f64> = (0..rho.len()).map(|i| mu_rho[i] * mu_rho[i] * fv[i] * fv[i] * w[i]).collect();
    let grad_i: Vec<f64> = (0..rho.len()).map(|i| df[i] * df[i] * w[i]).collect();
    let hardy_i: Vec<f64> = (0..rho.len())
        .map(|i| {
            let q = if i == 0 { df[0] } else { fv[i] / rho[i] };
            q * q * w[i]
        })
        .collect();
    let lhs = trapz(&rho, &lhs_i);
    let rhs = 8.0 * trapz(&rho, &grad_i) + k_star * trapz(&rho, &hardy_i);
    PoincareReport { lhs, rhs, infinite_rhs: false, pass: lhs <= rhs }
}

/// `max_ρ |∂μ/∂τ| / (−τ)` between consecutive tables, by differences.
#[derive(Debug, Clone, PartialEq)]
pub struct TauTrend {
    pub tau_mid: Vec<f64>,
    pub rate: Vec<f64>,
    pub decreasing: bool,
}

pub fn mu_tau_trend(tables: &[WeightTable]) -> Result<TauTrend> {
    let mut tau_mid = Vec::new();
    let mut rate = Vec::new();
    for w in tables.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.rho_grid != b.rho_grid {
            return Err(Error::Grid("weight tables on different grids".into()));
        }
        let dt = b.tau - a.tau;
        let mid = 0.5 * (a.tau + b.tau);
        let m = a.mu.iter().zip(&b.mu).map(|(x, y)| ((y - x) / dt).abs()).fold(0.0, f64::max);
        tau_mid.push(mid);
        rate.push(m / (-mid));
    }
    // Rates are listed in increasing τ, i.e. decreasing −τ.
    let decreasing = rate.len() >= 2 && rate[0] <= rate[rate.len() - 1];
    Ok(TauTrend { tau_mid, rate, decreasing })
}
