//! Rescaled frames and transformed solutions.
//!
//! With `τ = −log(−t)` the cylindrical frame is `ξ = e^{τ/2} z`,
//! `G = e^{τ/2} F − √2`, so the shrinking cylinder becomes `G ≡ 0`. Near a
//! tip the frame is radial: `ρ = e^{τ/2} r` and `V(ρ) = |F_z|` where
//! `F = r`, with `ξ_±(ρ)` the position of that point.
//!
//! The transformed solution of a triplet `(α, β, γ)` is
//! `F^{αβγ}(z, t) = e^{γ/2} F(e^{−γ/2}(z + s(t)), e^{−γ}(t − β))`, where the
//! shift `s` solves `ds/dt = 2 ∫₀^s F^{βγ}_zz / F^{βγ}` with `s(t_*) = α`.

use std::f64::consts::SQRT_2;
use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{bisect, fd_slopes, lagrange_weights, stencil_window, Hermite};
use crate::profile_pde::{nonlocal_integral, ProfileState, TipChart, LEFT, RIGHT};

/// `τ = −log(−t)`.
pub fn tau_of(t: f64) -> f64 {
    -(-t).ln()
}

/// `t = −e^{−τ}`.
pub fn t_of(tau: f64) -> f64 {
    -(-tau).exp()
}

/// `G(ξ, τ)` on the nodes of a profile, with the tips appended as
/// `G = −√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylindricalFrame {
    pub tau: f64,
    pub xi_grid: Vec<f64>,
    pub g: Vec<f64>,
}

pub fn to_cylindrical(state: &ProfileState) -> Result<CylindricalFrame> {
    if !(state.t < 0.0) {
        return Err(Error::Config(format!("t = {} is not negative", state.t)));
    }
    let tau = tau_of(state.t);
    let e = (0.5 * tau).exp();
    let (z, f) = state.with_tips();
    Ok(CylindricalFrame {
        tau,
        xi_grid: z.iter().map(|v| e * v).collect(),
        g: f.iter().map(|v| e * v - SQRT_2).collect(),
    })
}

/// Inverse of [`to_cylindrical`]: the `(z, F)` samples of a frame.
pub fn from_cylindrical(frame: &CylindricalFrame) -> (Vec<f64>, Vec<f64>) {
    let e = (-0.5 * frame.tau).exp();
    (frame.xi_grid.iter().map(|v| e * v).collect(), frame.g.iter().map(|v| e * (v + SQRT_2)).collect())
}

impl CylindricalFrame {
    /// Shape-preserving cubic through the samples.
    pub fn interpolant(&self) -> Result<Hermite> {
        Hermite::monotone(self.xi_grid.clone(), self.g.clone())
    }

    /// Values at `xi`, all of which must lie inside the frame.
    pub fn resample(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let lo = self.xi_grid[0];
        let hi = self.xi_grid[self.xi_grid.len() - 1];
        if let Some(x) = xi.iter().find(|&&x| x < lo || x > hi) {
            return Err(Error::Range(format!("xi = {x} outside frame [{lo}, {hi}]")));
        }
        let h = self.interpolant()?;
        Ok(xi.iter().map(|&x| h.eval(x)).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# tau={:.16e}", self.tau)?;
        writeln!(w, "xi,g")?;
        for (x, g) in self.xi_grid.iter().zip(&self.g) {
            writeln!(w, "{x:.16e},{g:.16e}")?;
        }
        Ok(())
    }
}

/// Which tip a radial frame describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn index(self) -> usize {
        match self {
            Side::Plus => RIGHT,
            Side::Minus => LEFT,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// `V(ρ)` and `ξ(ρ)` near one tip, on `ρ_j = j·dρ`, `j = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TipFrame {
    pub side: Side,
    pub tau: f64,
    pub rho_grid: Vec<f64>,
    pub v: Vec<f64>,
    pub xi_of_rho: Vec<f64>,
}

impl TipFrame {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# tau={:.16e} side={:?}", self.tau, self.side)?;
        writeln!(w, "rho,v,xi")?;
        for j in 0..self.rho_grid.len() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", self.rho_grid[j], self.v[j], self.xi_of_rho[j])?;
        }
        Ok(())
    }

    /// Interpolated `V` at `rho`.
    pub fn v_at(&self, rho: f64) -> Result<f64> {
        let h = Hermite::with_slopes(self.rho_grid.clone(), self.v.clone(), fd_slopes(&self.rho_grid, &self.v))?;
        Ok(h.eval(rho))
    }
}

/// Default `ρ_max` as a fraction of `e^{τ/2}·max F`.
pub const RHO_MAX_FRACTION: f64 = 0.45;

/// Invert `F = e^{−τ/2}ρ` on one side of the profile.
///
/// Radii inside the inner half of the state's tip chart are read from the
/// chart, where `V = √U`; larger radii are found by bisection on the
/// shape-preserving interpolant between the profile maximum and the tip.
pub fn tip_invert(state: &ProfileState, side: Side, rho_max: Option<f64>, drho: f64) -> Result<TipFrame> {
    let tip = state.tip(side.index()).ok_or_else(|| Error::Config(format!("state has no {side:?} tip")))?;
    let tau = tau_of(state.t);
    let e = (0.5 * tau).exp();
    let peak = argmax(&state.f);
    let side_max = match side {
        Side::Plus => state.f[peak..].iter().cloned().fold(0.0, f64::max),
        Side::Minus => state.f[..=peak].iter().cloned().fold(0.0, f64::max),
    };
    let limit = e * side_max;
    let rho_max = rho_max.unwrap_or(RHO_MAX_FRACTION * limit);
    if !(rho_max > 0.0 && rho_max < limit) {
        return Err(Error::Range(format!("rho_max = {rho_max} must lie in (0, {limit}) on the {side:?} side")));
    }
    if !(drho > 0.0 && drho < rho_max) {
        return Err(Error::Config(format!("drho = {drho}")));
    }
    let mut s = state.clone();
    s.ensure_caps(0.35)?;
    let chart = s.caps[side.index()].clone();
    let depth = chart.as_ref().map(|c| c.depth_map()).transpose()?;
    let u_interp = chart.as_ref().map(|c| c.interpolant());
    let interp = s.interpolant()?;
    let z_peak = s.z_grid[peak];
    let n = (rho_max / drho + 1e-9).floor() as usize;
    let mut rho_grid = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut xi = Vec::with_capacity(n);
    for j in 1..=n {
        let rho = j as f64 * drho;
        let r = rho / e;
        let (z, vj) = match (&chart, &depth, &u_interp) {
            (Some(c), Some(d), Some(u)) if r <= 0.5 * c.r_max() => {
                (tip - side.sign() * d.depth(r), u.eval(r).max(0.0).sqrt())
            }
            _ => {
                let (a, b) = match side {
                    Side::Plus => (z_peak, tip),
                    Side::Minus => (tip, z_peak),
                };
                let z = bisect(|x| interp.eval(x) - r, a, b, 1e-12 * (1.0 + tip.abs()))?;
                (z, interp.deriv(z).abs())
            }
        };
        rho_grid.push(rho);
        v.push(vj);
        xi.push(e * z);
    }
    let frame = TipFrame { side, tau, rho_grid, v, xi_of_rho: xi };
    check_tip_frame(&frame)?;
    Ok(frame)
}

fn argmax(v: &[f64]) -> usize {
    let mut k = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[k] {
            k = i;
        }
    }
    k
}

fn check_tip_frame(f: &TipFrame) -> Result<()> {
    if let Some(j) = f.v.iter().position(|&v| !(v > 0.0 && v <= 1.0 + 1e-6)) {
        return Err(Error::Degenerate(format!("V = {} at rho = {}", f.v[j], f.rho_grid[j])));
    }
    let s = f.side.sign();
    if f.xi_of_rho.iter().any(|&x| !(s * x > 0.0)) {
        return Err(Error::Degenerate(format!("xi has the wrong sign on the {:?} side", f.side)));
    }
    if f.xi_of_rho.windows(2).any(|w| !(s * (w[1] - w[0]) < 0.0)) {
        return Err(Error::Degenerate("xi(rho) is not strictly monotone".into()));
    }
    Ok(())
}

/// Spatial shift, time translation and parabolic dilation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleTriplet {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub t_star: f64,
    pub epsilon: f64,
}

impl AdmissibleTriplet {
    pub fn is_admissible(&self) -> bool {
        check_admissible(self)
    }
}

/// `|α| ≤ ε√(−t_*)`, `|β| ≤ ε(−t_*)/log(−t_*)`, `|γ| ≤ ε log(−t_*)`.
pub fn check_admissible(p: &AdmissibleTriplet) -> bool {
    let big_t = -p.t_star;
    if !(big_t > 1.0 && p.epsilon > 0.0 && p.epsilon < 0.5) {
        return false;
    }
    let l = big_t.ln();
    p.alpha.abs() <= p.epsilon * big_t.sqrt() && p.beta.abs() <= p.epsilon * big_t / l && p.gamma.abs() <= p.epsilon * l
}

/// Shift `s(t)` on a grid of target times, increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTable {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub ds: Vec<f64>,
    /// Largest `|s(t)|/√(−t)` over the table.
    pub worst_ratio: f64,
    /// Whether `|s| ≤ ε√(−t)` held throughout.
    pub bound_ok: bool,
}

impl ShiftTable {
    /// `s` at `t` inside the table.
    pub fn s_at(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.t[0], self.t[self.t.len() - 1]);
        let tol = 1e-12 * (1.0 + t.abs());
        if t < lo - tol || t > hi + tol {
            return Err(Error::Range(format!("t = {t} outside shift table [{lo}, {hi}]")));
        }
        if self.t.len() == 1 {
            return Ok(self.s[0]);
        }
        let h = Hermite::with_slopes(self.t.clone(), self.s.clone(), self.ds.clone())?;
        Ok(h.eval(t.clamp(lo, hi)))
    }
}

/// Integrate the shift ODE backward from `s(t_*) = α` over the target
/// times covered by the source `series`.
pub fn solve_s_ode(series: &[ProfileState], p: &AdmissibleTriplet) -> Result<ShiftTable> {
    if series.is_empty() {
        return Err(Error::Config("empty series".into()));
    }
    if !check_admissible(p) {
        return Err(Error::Config(format!("triplet {p:?} is not admissible")));
    }
    let eg = p.gamma.exp();
    let to_target = |ts: f64| eg * ts + p.beta;
    let mut knots: Vec<(f64, usize)> = series
        .iter()
        .enumerate()
        .map(|(k, s)| (to_target(s.t), k))
        .filter(|&(t, _)| t <= p.t_star * (1.0 - 1e-14))
        .collect();
    let t_last = to_target(series[series.len() - 1].t);
    if p.t_star > t_last + 1e-9 * (1.0 + t_last.abs()) {
        return Err(Error::Range(format!("t_* = {} beyond the transformed series end {t_last}", p.t_star)));
    }
    // Cumulative integrals per snapshot, in the snapshot's own z.
    let integrals: Vec<Hermite> = series
        .iter()
        .map(|s| {
            let (z, f) = crate::profile_pde::padded(s);
            let i = nonlocal_integral(&z, &f, s.gauge_origin_index + 1)?;
            let (zi, ii) = (z[1..z.len() - 1].to_vec(), i[1..i.len() - 1].to_vec());
            let d = fd_slopes(&zi, &ii);
            Hermite::with_slopes(zi, ii, d)
        })
        .collect::<Result<_>>()?;
    let half = (-0.5 * p.gamma).exp();
    // ds/dt at a snapshot: 2·e^{−γ/2}·J(e^{−γ/2}s).
    let rate_at = |k: usize, s: f64| 2.0 * half * integrals[k].eval(half * s);
    // Rate at t_* by linear interpolation between bracketing snapshots.
    let rate_star = |s: f64| -> f64 {
        let ts = (p.t_star - p.beta) / eg;
        let k = series.partition_point(|x| x.t <= ts);
        if k == 0 {
            return rate_at(0, s);
        }
        if k >= series.len() {
            return rate_at(series.len() - 1, s);
        }
        let (t0, t1) = (series[k - 1].t, series[k].t);
        let w = (ts - t0) / (t1 - t0);
        (1.0 - w) * rate_at(k - 1, s) + w * rate_at(k, s)
    };
    knots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut t_out = vec![p.t_star];
    let mut s_out = vec![p.alpha];
    let mut d_out = vec![rate_star(p.alpha)];
    let mut s_cur = p.alpha;
    let mut r_cur = d_out[0];
    let mut t_cur = p.t_star;
    for &(tk, k) in knots.iter().rev() {
        let h = t_cur - tk;
        let pred = s_cur - h * r_cur;
        let r_pred = rate_at(k, pred);
        let s_new = s_cur - 0.5 * h * (r_cur + r_pred);
        let r_new = rate_at(k, s_new);
        t_out.push(tk);
        s_out.push(s_new);
        d_out.push(r_new);
        s_cur = s_new;
        r_cur = r_new;
        t_cur = tk;
    }
    t_out.reverse();
    s_out.reverse();
    d_out.reverse();
    // Drop a duplicate knot at t_* if a snapshot maps onto it.
    let mut t = Vec::with_capacity(t_out.len());
    let mut s = Vec::with_capacity(t_out.len());
    let mut ds = Vec::with_capacity(t_out.len());
    for i in 0..t_out.len() {
        if t.last().is_some_and(|&prev: &f64| (t_out[i] - prev).abs() <= 1e-12 * prev.abs()) {
            continue;
        }
        t.push(t_out[i]);
        s.push(s_out[i]);
        ds.push(d_out[i]);
    }
    let worst_ratio = t.iter().zip(&s).map(|(t, s)| s.abs() / (-t).sqrt()).fold(0.0, f64::max);
    Ok(ShiftTable { t, s, ds, worst_ratio, bound_ok: worst_ratio <= p.epsilon })
}

/// Source profile at time `ts`, interpolated between snapshots.
///
/// A time that coincides with a snapshot returns it unchanged. Otherwise
/// four snapshots are combined with Lagrange weights in `t`, acting on `F²`
/// at fixed position relative to the tips (or at fixed `z` for cut-off
/// ends). Tip charts are interpolated nodewise.
pub fn source_at(series: &[ProfileState], ts: f64) -> Result<ProfileState> {
    let n = series.len();
    let (lo, hi) = (series[0].t, series[n - 1].t);
    let tol = 1e-12 * ts.abs().max(1.0);
    if ts < lo - tol || ts > hi + tol {
        return Err(Error::Range(format!("t = {ts} outside series [{lo}, {hi}]")));
    }
    if let Some(s) = series.iter().find(|s| (s.t - ts).abs() <= tol) {
        return Ok(s.clone());
    }
    if n < 4 {
        return Err(Error::Range("time interpolation needs four snapshots".into()));
    }
    let times: Vec<f64> = series.iter().map(|s| s.t).collect();
    let win = stencil_window(&times, ts, 4);
    let snaps = &series[win.clone()];
    let w = lagrange_weights(&times[win], ts);
    let blend = |vals: Vec<f64>| vals.iter().zip(&w).map(|(v, w)| v * w).sum::<f64>();
    let base = &snaps[0];
    let tip_l = base.tip_left.map(|_| blend(snaps.iter().map(|s| s.tip_left.unwrap()).collect()));
    let tip_r = base.tip_right.map(|_| blend(snaps.iter().map(|s| s.tip_right.unwrap()).collect()));
    let interps: Vec<Hermite> = snaps.iter().map(|s| s.interpolant()).collect::<Result<_>>()?;
    let dz = base.dz;
    let lo_z = tip_l.unwrap_or(base.z_grid[0] - 0.5 * dz);
    let hi_z = tip_r.unwrap_or(base.z_grid[base.len() - 1] + 0.5 * dz);
    let z_grid = crate::profile_pde::lattice_between(dz, lo_z, hi_z);
    let f: Vec<f64> = z_grid
        .iter()
        .map(|&z| {
            let vals = snaps
                .iter()
                .zip(&interps)
                .map(|(s, h)| {
                    let zk = match (tip_l, tip_r) {
                        (Some(a), Some(b)) => {
                            let x = (z - a) / (b - a);
                            let (ak, bk) = (s.tip_left.unwrap(), s.tip_right.unwrap());
                            ak + x * (bk - ak)
                        }
                        _ => z,
                    };
                    let v = h.eval(zk);
                    v * v
                })
                .collect();
            blend(vals).max(0.0).sqrt()
        })
        .collect();
    let gauge =
        z_grid.iter().position(|&z| z == 0.0).ok_or_else(|| Error::Grid("interpolated lattice lost z = 0".into()))?;
    let caps = [LEFT, RIGHT].map(|side| {
        let charts: Vec<&TipChart> = snaps.iter().filter_map(|s| s.caps[side].as_ref()).collect();
        if charts.len() == 4 && charts.iter().all(|c| c.len() == charts[0].len() && c.dr == charts[0].dr) {
            let u = (0..charts[0].len()).map(|j| blend(charts.iter().map(|c| c.u[j]).collect())).collect();
            Some(TipChart { dr: charts[0].dr, u })
        } else {
            None
        }
    });
    Ok(ProfileState { t: ts, dz, z_grid, f, tip_left: tip_l, tip_right: tip_r, gauge_origin_index: gauge, caps })
}

/// `F^{αβγ}` at each target time, resampled onto the lattice `i·dz`.
pub fn apply_abg(
    series: &[ProfileState],
    p: &AdmissibleTriplet,
    shift: &ShiftTable,
    target_times: &[f64],
    dz: f64,
) -> Result<Vec<ProfileState>> {
    let eg2 = (0.5 * p.gamma).exp();
    let mut out = Vec::with_capacity(target_times.len());
    for &t in target_times {
        let ts = (-p.gamma).exp() * (t - p.beta);
        let src = source_at(series, ts)?;
        let s = shift.s_at(t)?;
        let interp = src.interpolant()?;
        let map = |zeta: f64| eg2 * zeta - s;
        let n = src.len();
        let tip_left = src.tip_left.map(map);
        let tip_right = src.tip_right.map(map);
        let lo = tip_left.unwrap_or(map(src.z_grid[0]) - 1e-9 * dz);
        let hi = tip_right.unwrap_or(map(src.z_grid[n - 1]) + 1e-9 * dz);
        let z_grid = crate::profile_pde::lattice_between(dz, lo, hi);
        let f: Vec<f64> = z_grid.iter().map(|&z| eg2 * interp.eval((z + s) / eg2)).collect();
        let gauge = z_grid
            .iter()
            .position(|&z| z == 0.0)
            .ok_or_else(|| Error::Grid("transformed lattice lost z = 0".into()))?;
        let caps = [LEFT, RIGHT].map(|side| {
            src.caps[side].as_ref().map(|c| {
                let h = c.interpolant();
                TipChart::from_fn(dz, eg2 * c.r_max(), |r| h.eval(r / eg2))
            })
        });
        let state = ProfileState { t, dz, z_grid, f, tip_left, tip_right, gauge_origin_index: gauge, caps };
        state.validate()?;
        out.push(state);
    }
    Ok(out)
}
