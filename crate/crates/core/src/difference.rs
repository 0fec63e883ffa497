//! Diagnostics comparing two solutions in the cylindrical frame.
//!
//! `H = G₁ − G₂` is sampled on a common grid `ξ = i·dξ`, cut off near the
//! tips by `χ_C((−τ)^{-1/2} ξ)`, and projected onto the neutral mode
//! `ξ² − 2` to give `a(τ)`. The residual `Q = a' − 2(−τ)⁻¹a` measures how far
//! the neutral coefficient is from the ODE it obeys to leading order.

use std::f64::consts::SQRT_2;
use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{cumtrapz, loglog_slope, smooth_step};
use crate::rescale::{CylindricalFrame, TipFrame};
use crate::spectral::{
    gauss_inner, neutral_normalization, norm_h_sq, project_modes, symmetric_grid, weight, GaussFunction, SpectralCoeffs,
};

/// Inner and outer radius of the cylindrical cutoff, in units of `√(−τ)`.
pub fn chi_c_band(theta: f64) -> (f64, f64) {
    ((4.0 - 0.5 * theta * theta).sqrt(), (4.0 - 0.25 * theta * theta).sqrt())
}

/// Even cutoff: one on `[0, √(4 − θ²/2)]`, zero beyond `√(4 − θ²/4)`.
pub fn chi_c(x: f64, theta: f64) -> f64 {
    let (a, b) = chi_c_band(theta);
    1.0 - smooth_step((x.abs() - a) / (b - a))
}

/// `H`, its cutoff and both profiles on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffFrame {
    pub tau: f64,
    pub theta: f64,
    pub xi_grid: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// Exact derivatives of the two interpolants at the grid.
    pub g1_xi: Vec<f64>,
    pub g2_xi: Vec<f64>,
    pub h: Vec<f64>,
    pub h_c: Vec<f64>,
}

impl DiffFrame {
    pub fn spacing(&self) -> f64 {
        self.xi_grid[1] - self.xi_grid[0]
    }

    /// Index of `ξ = 0`.
    pub fn origin(&self) -> usize {
        (-self.xi_grid[0] / self.spacing()).round() as usize
    }

    /// `H_C` zero-padded to the symmetric grid of radius `x_trunc`.
    pub fn h_c_gauss(&self, x_trunc: f64) -> Result<GaussFunction> {
        self.pad(&self.h_c, x_trunc)
    }

    fn pad(&self, v: &[f64], x_trunc: f64) -> Result<GaussFunction> {
        let h = self.spacing();
        let grid = symmetric_grid(x_trunc, h);
        let m = (grid.len() - 1) / 2;
        let i0 = self.xi_grid[0] / h;
        let shift = m as i64 + i0.round() as i64;
        if shift < 0 || shift as usize + self.xi_grid.len() > grid.len() {
            return Err(Error::Range(format!("frame exceeds truncation radius {x_trunc}")));
        }
        let mut out = vec![0.0; grid.len()];
        out[shift as usize..shift as usize + v.len()].copy_from_slice(v);
        GaussFunction::new(grid, out)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# tau={:.16e} theta={:.16e}", self.tau, self.theta)?;
        writeln!(w, "xi,h,h_c")?;
        for i in 0..self.xi_grid.len() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", self.xi_grid[i], self.h[i], self.h_c[i])?;
        }
        Ok(())
    }
}

/// Difference of two frames at the same `τ` on the lattice `i·dξ`.
///
/// The lattice spans the support of the cutoff plus one node. Beyond a tip
/// the profile is absent and `G` is taken as `−√2`; a cut-off end that does
/// not reach the support is an error.
pub fn build_diff_frame(
    frame1: &CylindricalFrame,
    frame2: &CylindricalFrame,
    theta: f64,
    dxi: f64,
) -> Result<DiffFrame> {
    if (frame1.tau - frame2.tau).abs() > 1e-10 {
        return Err(Error::Grid(format!("frames at tau {} and {}", frame1.tau, frame2.tau)));
    }
    if !(theta > 0.0 && theta <= 0.2) {
        return Err(Error::Config(format!("theta = {theta} outside (0, 0.2]")));
    }
    let tau = frame1.tau;
    let reach = chi_c_band(theta).1 * (-tau).sqrt();
    let ends = |f: &CylindricalFrame| {
        let n = f.xi_grid.len();
        let tip = |g: f64| g == -SQRT_2;
        let lo = if tip(f.g[0]) { f64::NEG_INFINITY } else { f.xi_grid[0] };
        let hi = if tip(f.g[n - 1]) { f64::INFINITY } else { f.xi_grid[n - 1] };
        (lo, hi, f.xi_grid[0], f.xi_grid[n - 1])
    };
    let (lo1, hi1, a1, b1) = ends(frame1);
    let (lo2, hi2, a2, b2) = ends(frame2);
    let lo = lo1.max(lo2).max(-reach - dxi);
    let hi = hi1.min(hi2).min(reach + dxi);
    let i0 = (lo / dxi).ceil() as i64;
    let i1 = (hi / dxi).floor() as i64;
    if i0 > 0 || i1 < 0 || (i0 as f64) * dxi > -reach || (i1 as f64) * dxi < reach {
        return Err(Error::Range(format!("frames cover [{lo}, {hi}], short of the cutoff support |xi| <= {reach}")));
    }
    let xi_grid: Vec<f64> = (i0..=i1).map(|i| i as f64 * dxi).collect();
    let p1 = frame1.interpolant()?;
    let p2 = frame2.interpolant()?;
    let sample = |p: &crate::numerics::Hermite, a: f64, b: f64| -> (Vec<f64>, Vec<f64>) {
        xi_grid.iter().map(|&x| if x < a || x > b { (-SQRT_2, 0.0) } else { (p.eval(x), p.deriv(x)) }).unzip()
    };
    let (g1, g1_xi) = sample(&p1, a1, b1);
    let (g2, g2_xi) = sample(&p2, a2, b2);
    let h: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a - b).collect();
    let s = (-tau).sqrt();
    let h_c = xi_grid.iter().zip(&h).map(|(&x, &v)| chi_c(x / s, theta) * v).collect();
    Ok(DiffFrame { tau, theta, xi_grid, g1, g2, g1_xi, g2_xi, h, h_c })
}

/// Tip difference `W = V₁ − V₂` and its vanishing rate at the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TipDifference {
    pub rho: Vec<f64>,
    pub w: Vec<f64>,
    /// Log-log slope of `|W|` over the first quarter of the grid; `None`
    /// when `W` vanishes there.
    pub exponent: Option<f64>,
}

pub fn compute_w(tip1: &TipFrame, tip2: &TipFrame) -> Result<TipDifference> {
    if tip1.side != tip2.side {
        return Err(Error::Config("tip frames on different sides".into()));
    }
    if tip1.rho_grid.len() != tip2.rho_grid.len()
        || tip1.rho_grid.iter().zip(&tip2.rho_grid).any(|(a, b)| (a - b).abs() > 1e-12 * a)
    {
        return Err(Error::Grid("tip frames on different rho grids".into()));
    }
    let w: Vec<f64> = tip1.v.iter().zip(&tip2.v).map(|(a, b)| a - b).collect();
    let m = (w.len() / 4).max(2);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        tip1.rho_grid[..m].iter().zip(&w[..m]).filter(|(_, w)| w.abs() > 0.0).map(|(r, w)| (*r, w.abs())).unzip();
    let exponent = (xs.len() >= 2).then(|| loglog_slope(&xs, &ys));
    Ok(TipDifference { rho: tip1.rho_grid.clone(), w, exponent })
}

/// The six error fields of the `H` equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTerms {
    pub e: [Vec<f64>; 6],
}

impl ErrorTerms {
    pub fn sum(&self) -> Vec<f64> {
        (0..self.e[0].len()).map(|i| self.e.iter().map(|e| e[i]).sum()).collect()
    }
}

/// Centred first differences, one-sided at the ends.
fn central(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d
}

/// Cumulative trapezoid anchored at index `o`.
fn integral_from(xi: &[f64], y: &[f64], o: usize) -> Vec<f64> {
    let c = cumtrapz(xi, y);
    c.iter().map(|v| v - c[o]).collect()
}

/// `E₁ … E₆` with `ξ`-derivatives by centred differences and integrals
/// from `ξ = 0` by the trapezoid rule.
pub fn error_terms(diff: &DiffFrame) -> Result<ErrorTerms> {
    let n = diff.xi_grid.len();
    let a: Vec<f64> = diff.g1.iter().map(|g| SQRT_2 + g).collect();
    let b: Vec<f64> = diff.g2.iter().map(|g| SQRT_2 + g).collect();
    if let Some(i) = (0..n).find(|&i| !(a[i] >= 0.0 && b[i] >= 0.0)) {
        return Err(Error::Degenerate(format!("sqrt2 + G < 0 at xi = {}", diff.xi_grid[i])));
    }
    // Terms are evaluated on the block around ξ = 0 where both profiles
    // exist; nodes past a tip are left at zero.
    let o = diff.origin();
    if !(a[o] > 0.0 && b[o] > 0.0) {
        return Err(Error::Degenerate("sqrt2 + G vanishes at xi = 0".into()));
    }
    let first = (0..=o).rev().take_while(|&i| a[i] > 0.0 && b[i] > 0.0).last().unwrap();
    let last = (o..n).take_while(|&i| a[i] > 0.0 && b[i] > 0.0).last().unwrap();
    if last - first < 2 {
        return Err(Error::Degenerate("fewer than three nodes where both profiles exist".into()));
    }
    let dx = diff.spacing();
    let r = first..last + 1;
    let x = &diff.xi_grid[r.clone()];
    let h = &diff.h[r.clone()];
    let (a, b) = (&a[r.clone()], &b[r.clone()]);
    let m = x.len();
    let o = o - first;
    let g1x = central(&diff.g1[r.clone()], dx);
    let g2x = central(&diff.g2[r.clone()], dx);
    let hx = central(h, dx);
    let bracket1 = integral_from(x, &(0..m).map(|i| g1x[i] * g1x[i] / (a[i] * a[i])).collect::<Vec<_>>(), o);
    let int_a = integral_from(x, &(0..m).map(|i| (g1x[i] + g2x[i]) * hx[i] / (b[i] * b[i])).collect::<Vec<_>>(), o);
    let int_b = integral_from(
        x,
        &(0..m).map(|i| (a[i] + b[i]) * h[i] * g1x[i] * g1x[i] / (a[i] * a[i] * b[i] * b[i])).collect::<Vec<_>>(),
        o,
    );
    let mut e: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
    for i in 0..m {
        let ab = 1.0 / (a[i] * b[i]);
        let k = first + i;
        e[0][k] = (ab - 0.5) * h[i];
        e[1][k] = ab * g1x[i] * g1x[i] * h[i];
        e[2][k] = -(g1x[i] + g2x[i]) * hx[i] / b[i];
        e[3][k] = 2.0 * (g1x[o] / a[o] - bracket1[i]) * hx[i];
        e[4][k] = 2.0 * g2x[i] * hx[o] / a[o] - 2.0 * g2x[i] * g2x[o] * h[o] / (a[o] * b[o]);
        e[5][k] = 2.0 * g2x[i] * (-int_a[i] + int_b[i]);
    }
    Ok(ErrorTerms { e })
}

/// Maximum of `|H_τ − 𝓛H − ΣE|` over the core region.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidual {
    pub taus: Vec<f64>,
    /// Worst residual at each interior frame.
    pub max: Vec<f64>,
    pub worst: f64,
    pub at_xi: f64,
    pub at_tau: f64,
}

/// Half-width of the region where the PDE residual is measured.
pub const CORE_XI: f64 = 2.0;

/// Residual of the `H` equation at each interior frame of an evenly
/// spaced series; `H_τ` by centred differences in `τ`.
pub fn pde_residual_check(frames: &[DiffFrame]) -> Result<PdeResidual> {
    if frames.len() < 3 {
        return Err(Error::Range(format!("need three frames, got {}", frames.len())));
    }
    let dtau = frames[1].tau - frames[0].tau;
    let mut out = PdeResidual { taus: vec![], max: vec![], worst: 0.0, at_xi: f64::NAN, at_tau: f64::NAN };
    for k in 1..frames.len() - 1 {
        let (p, c, nx) = (&frames[k - 1], &frames[k], &frames[k + 1]);
        if ((nx.tau - p.tau) - 2.0 * dtau).abs() > 1e-9 * dtau.abs() {
            return Err(Error::Grid("frames are not evenly spaced in tau".into()));
        }
        let dx = c.spacing();
        let e = error_terms(c)?.sum();
        let lookup = |f: &DiffFrame, x: f64| -> Result<f64> {
            let j = ((x - f.xi_grid[0]) / dx).round();
            if j < 0.0 || j as usize >= f.xi_grid.len() || (f.xi_grid[j as usize] - x).abs() > 1e-9 * dx {
                return Err(Error::Grid(format!("xi = {x} missing from a neighbouring frame")));
            }
            Ok(f.h[j as usize])
        };
        let mut frame_max: f64 = 0.0;
        for i in 1..c.xi_grid.len() - 1 {
            let x = c.xi_grid[i];
            if x.abs() > CORE_XI + 1e-12 {
                continue;
            }
            let h_tau = (lookup(nx, x)? - lookup(p, x)?) / (2.0 * dtau);
            let hxx = (c.h[i + 1] - 2.0 * c.h[i] + c.h[i - 1]) / (dx * dx);
            let hx = (c.h[i + 1] - c.h[i - 1]) / (2.0 * dx);
            let r = (h_tau - (hxx - 0.5 * x * hx + c.h[i]) - e[i]).abs();
            frame_max = frame_max.max(r);
            if r > out.worst || out.at_xi.is_nan() {
                out.worst = r.max(out.worst);
                out.at_xi = x;
                out.at_tau = c.tau;
            }
        }
        out.taus.push(c.tau);
        out.max.push(frame_max);
    }
    Ok(out)
}

/// Neutral-mode series of a run of difference frames.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffSeries {
    pub taus: Vec<f64>,
    pub a_series: Vec<f64>,
    /// Full projections of `H_C`, one per frame.
    pub coeffs: Vec<SpectralCoeffs>,
    /// `Q` at interior frames (NaN at the two ends).
    pub q_series: Vec<f64>,
    /// `|Q_h − Q_{2h}|` between centred differences of spacing `h` and
    /// `2h`, carried to the nearest defined value near the ends.
    pub q_envelope: Vec<f64>,
    /// `I₁` and `I₃`, with their common leading form `(−τ)⁻¹a`.
    pub i1: Vec<f64>,
    pub i3: Vec<f64>,
    /// `‖Ĥ_C‖²_𝓗` with `Ĥ_C = H_C − √2·a·(ξ² − 2)`.
    pub energy: Vec<f64>,
}

impl DiffSeries {
    /// Worst `|Q| / ((−τ)⁻¹|a| + envelope)` over the interior frames.
    pub fn q_ratio(&self) -> f64 {
        (1..self.taus.len().saturating_sub(1))
            .map(|k| {
                let bound = self.a_series[k].abs() / (-self.taus[k]) + self.q_envelope[k];
                if bound > 0.0 {
                    self.q_series[k].abs() / bound
                } else if self.q_series[k] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,a,Q,Q_envelope,I1,I3,energy_h")?;
        for k in 0..self.taus.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.taus[k],
                self.a_series[k],
                self.q_series[k],
                self.q_envelope[k],
                self.i1[k],
                self.i3[k],
                self.energy[k]
            )?;
        }
        Ok(())
    }
}

/// `a(τ)`, `Q(τ)` and the `I₁`, `I₃` comparison for evenly spaced frames.
pub fn a_and_q(frames: &[DiffFrame], x_trunc: f64) -> Result<DiffSeries> {
    let n = frames.len();
    if n < 3 {
        return Err(Error::Range(format!("need three frames, got {n}")));
    }
    let dtau = frames[1].tau - frames[0].tau;
    if !(dtau > 0.0) || frames.windows(2).any(|w| ((w[1].tau - w[0].tau) - dtau).abs() > 1e-9 * dtau) {
        return Err(Error::Grid("frames are not evenly spaced in increasing tau".into()));
    }
    let norm = neutral_normalization();
    let mut coeffs = Vec::with_capacity(n);
    let mut i1 = Vec::with_capacity(n);
    let mut i3 = Vec::with_capacity(n);
    let mut energy = Vec::with_capacity(n);
    for f in frames {
        let hc = f.h_c_gauss(x_trunc)?;
        let c = project_modes(&hc);
        let mode = hc.map(|x, _| x * x - 2.0);
        let hat = hc.map(|x, v| v - SQRT_2 * c.a * (x * x - 2.0));
        energy.push(norm_h_sq(&hat));
        // E_{C,1} and E_{C,3} live where H_C does.
        let dx = f.spacing();
        let hcx = central(&f.h_c, dx);
        let mut ec1 = Vec::with_capacity(f.xi_grid.len());
        let mut ec3 = Vec::with_capacity(f.xi_grid.len());
        let g1x = central(&f.g1, dx);
        let g2x = central(&f.g2, dx);
        for i in 0..f.xi_grid.len() {
            let (a, b) = (SQRT_2 + f.g1[i], SQRT_2 + f.g2[i]);
            let exists = a > 0.0 && b > 0.0;
            ec1.push(if exists { (1.0 / (a * b) - 0.5) * f.h_c[i] } else { 0.0 });
            ec3.push(if exists { -(g1x[i] + g2x[i]) * hcx[i] / b } else { 0.0 });
        }
        i1.push(gauss_inner(&mode, &f.pad(&ec1, x_trunc)?)? / norm);
        i3.push(gauss_inner(&mode, &f.pad(&ec3, x_trunc)?)? / norm);
        coeffs.push(c);
    }
    let taus: Vec<f64> = frames.iter().map(|f| f.tau).collect();
    let a: Vec<f64> = coeffs.iter().map(|c| c.a).collect();
    let q_at = |k: usize, s: usize| {
        let da = (a[k + s] - a[k - s]) / (2.0 * s as f64 * dtau);
        da - 2.0 * a[k] / (-taus[k])
    };
    let mut q = vec![f64::NAN; n];
    let mut env = vec![f64::NAN; n];
    for k in 1..n - 1 {
        q[k] = q_at(k, 1);
        if k >= 2 && k + 2 < n {
            env[k] = (q[k] - q_at(k, 2)).abs();
        }
    }
    // Carry the envelope to frames without a wide stencil.
    for k in 0..n {
        if env[k].is_nan() {
            let near = (0..n).filter(|&j| !env[j].is_nan()).min_by_key(|&j| j.abs_diff(k));
            env[k] = near.map_or(0.0, |j| env[j]);
        }
    }
    Ok(DiffSeries { taus, a_series: a, coeffs, q_series: q, q_envelope: env, i1, i3, energy })
}

/// Check of `H_ξ = −V₁(ρ₁) + V₂(ρ₂)`, `ρᵢ = √2 + Gᵢ`, in the overlap band.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapReport {
    pub band: (f64, f64),
    pub nodes: usize,
    pub vacuous: bool,
    /// Worst `|H_ξ + V₁(ρ₁) − V₂(ρ₂)|`.
    pub identity_residual: f64,
    pub at_xi: f64,
    /// Smallest `C` with `|H_ξ + W(ρ₁)| ≤ C·|H|` over the band.
    pub fitted_c: f64,
}

/// Overlap band `√(4 − 400θ²)·√(−τ) ≤ ξ ≤ √(4 − θ²/100)·√(−τ)` on the
/// plus side; nodes whose radii fall outside either tip frame are skipped.
pub fn overlap_consistency(diff: &DiffFrame, tip1: &TipFrame, tip2: &TipFrame) -> Result<OverlapReport> {
    let th2 = diff.theta * diff.theta;
    let s = (-diff.tau).sqrt();
    let lo = (4.0 - 400.0 * th2).max(0.0).sqrt() * s;
    let hi = (4.0 - th2 / 100.0).sqrt() * s;
    let range = |t: &TipFrame| (t.rho_grid[0], t.rho_grid[t.rho_grid.len() - 1]);
    let (r1lo, r1hi) = range(tip1);
    let (r2lo, r2hi) = range(tip2);
    let mut rep = OverlapReport {
        band: (lo, hi),
        nodes: 0,
        vacuous: true,
        identity_residual: 0.0,
        at_xi: f64::NAN,
        fitted_c: 0.0,
    };
    for i in 0..diff.xi_grid.len() {
        let x = diff.xi_grid[i];
        if x < lo || x > hi {
            continue;
        }
        let (rho1, rho2) = (SQRT_2 + diff.g1[i], SQRT_2 + diff.g2[i]);
        if !(rho1 >= r1lo && rho1 <= r1hi && rho2 >= r2lo && rho2 <= r2hi) {
            continue;
        }
        let v1 = tip1.v_at(rho1)?;
        let v2 = tip2.v_at(rho2)?;
        let hx = diff.g1_xi[i] - diff.g2_xi[i];
        let r = (hx + v1 - v2).abs();
        rep.nodes += 1;
        if r > rep.identity_residual || rep.at_xi.is_nan() {
            rep.identity_residual = r.max(rep.identity_residual);
            rep.at_xi = x;
        }
        let w = v1 - tip2.v_at(rho1)?;
        let hh = diff.h[i].abs();
        if hh > 0.0 {
            rep.fitted_c = rep.fitted_c.max((hx + w).abs() / hh);
        }
    }
    rep.vacuous = rep.nodes == 0;
    Ok(rep)
}

/// Gaussian moments used by [`a_and_q`]; exposed for callers that want
/// the projection of an arbitrary field.
pub fn neutral_coefficient(f: &GaussFunction) -> f64 {
    let y: Vec<f64> = f.xi_grid.iter().zip(&f.values).map(|(&x, &v)| weight(x) * (x * x - 2.0) * v).collect();
    crate::numerics::simpson(&y, f.spacing()) / neutral_normalization()
}
