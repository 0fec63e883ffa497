//! Explicit time stepping with the two charts coupled.
//!
//! Each step advances the body nodes with `F ≥ r_in` through the profile
//! equation and the tip charts through the radial equation. The outer end
//! of each chart takes `U = F_z²` from the new body values; the nodes with
//! `F < r_in` are then rebuilt from the chart by integrating
//! `dz = dr/√U` outward from the last body node, which also fixes the tip.

use super::initial::lattice_between;
use super::{rhs_points, EvolveConfig, ProfileState, TipChart, LEFT, RIGHT};
use crate::error::{Error, Result};
use crate::numerics::bisect;

/// Accepted step and the time increment that was actually used.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: ProfileState,
    pub dt: f64,
    pub halvings: usize,
}

/// One step of the nominal size `cfg.dt()`.
pub fn step(state: &ProfileState, cfg: &EvolveConfig) -> Result<ProfileState> {
    step_with_dt(state, cfg, cfg.dt()).map(|o| o.state)
}

/// One step of size `dt`, halved on rejection up to `cfg.max_halvings`
/// times.
pub fn step_with_dt(state: &ProfileState, cfg: &EvolveConfig, dt: f64) -> Result<StepOutcome> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt = {dt}")));
    }
    let mut s = state.clone();
    s.ensure_caps(cfg.cap_fraction)?;
    let mut h = dt;
    let mut last = None;
    for halvings in 0..=cfg.max_halvings {
        match try_step(&s, cfg, h) {
            Ok(next) => return Ok(StepOutcome { state: next, dt: h, halvings }),
            Err(e) => last = Some(e),
        }
        h *= 0.5;
    }
    Err(Error::Integration(format!(
        "step rejected {} times at t = {}: {}",
        cfg.max_halvings + 1,
        state.t,
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

fn try_step(s: &ProfileState, cfg: &EvolveConfig, dt: f64) -> Result<ProfileState> {
    let n = s.len();
    let g = s.gauge_origin_index;
    let dz = s.dz;
    let mut r_in = [0.0; 2];
    for side in [LEFT, RIGHT] {
        if let Some(chart) = &s.caps[side] {
            r_in[side] = cfg.inner_fraction * chart.r_max();
            if r_in[side] < 2.0 * dz || chart.r_max() - r_in[side] < 2.0 * dz {
                return Err(Error::Config(format!("tip chart of extent {} is too short for dz = {dz}", chart.r_max())));
            }
        }
    }

    // Contiguous block of body nodes advanced by the profile equation.
    let mut a = g;
    if s.tip_left.is_some() {
        while a > 0 && s.f[a - 1] >= r_in[LEFT] {
            a -= 1;
        }
        if a == 0 {
            return Err(Error::Degenerate("no chart nodes next to the left tip".into()));
        }
    } else {
        a = 0;
    }
    let mut b = g;
    if s.tip_right.is_some() {
        while b + 1 < n && s.f[b + 1] >= r_in[RIGHT] {
            b += 1;
        }
        if b == n - 1 {
            return Err(Error::Degenerate("no chart nodes next to the right tip".into()));
        }
    } else {
        b = n - 1;
    }

    let mut zp = Vec::with_capacity(b - a + 3);
    let mut fp = Vec::with_capacity(b - a + 3);
    if s.tip_left.is_some() {
        zp.push(s.z_grid[a - 1]);
        fp.push(s.f[a - 1]);
    } else {
        zp.push(s.z_grid[0] - dz);
        fp.push(s.f[1]);
    }
    zp.extend_from_slice(&s.z_grid[a..=b]);
    fp.extend_from_slice(&s.f[a..=b]);
    if s.tip_right.is_some() {
        zp.push(s.z_grid[b + 1]);
        fp.push(s.f[b + 1]);
    } else {
        zp.push(s.z_grid[n - 1] + dz);
        fp.push(s.f[n - 2]);
    }
    let rate = rhs_points(&zp, &fp, g - a + 1)?;
    let body_z: Vec<f64> = s.z_grid[a..=b].to_vec();
    let body_f: Vec<f64> = s.f[a..=b].iter().zip(&rate).map(|(f, r)| f + dt * r).collect();
    let gl = g - a;

    let mut caps: [Option<TipChart>; 2] = [None, None];
    for side in [LEFT, RIGHT] {
        if let Some(chart) = &s.caps[side] {
            caps[side] = Some(advance_chart(chart, dt, &body_z, &body_f, gl, side)?);
        }
    }

    let mut z_new = Vec::with_capacity(n + 4);
    let mut f_new = Vec::with_capacity(n + 4);
    let mut tip_left = None;
    let mut tip_right = None;
    if let Some(chart) = &caps[LEFT] {
        let depth = chart.depth_map()?;
        let (za, ra) = (body_z[0], body_f[0]);
        check_anchor(chart, ra)?;
        let za_depth = depth.depth(ra);
        let tip = za - za_depth;
        for z in lattice_between(dz, tip, za) {
            z_new.push(z);
            f_new.push(depth.radius(za_depth - (za - z)));
        }
        tip_left = Some(tip);
    }
    let gauge = z_new.len() + gl;
    z_new.extend_from_slice(&body_z);
    f_new.extend_from_slice(&body_f);
    if let Some(chart) = &caps[RIGHT] {
        let depth = chart.depth_map()?;
        let last = body_z.len() - 1;
        let (zb, rb) = (body_z[last], body_f[last]);
        check_anchor(chart, rb)?;
        let zb_depth = depth.depth(rb);
        let tip = zb + zb_depth;
        for z in lattice_between(dz, zb, tip) {
            z_new.push(z);
            f_new.push(depth.radius(zb_depth - (z - zb)));
        }
        tip_right = Some(tip);
    }

    let next =
        ProfileState { t: s.t + dt, dz, z_grid: z_new, f: f_new, tip_left, tip_right, gauge_origin_index: gauge, caps };
    if !(next.t > s.t) {
        return Err(Error::Integration(format!("time did not advance past {}", s.t)));
    }
    next.validate()?;
    Ok(next)
}

fn check_anchor(chart: &TipChart, r: f64) -> Result<()> {
    if !(r > 0.0 && r < chart.r_max()) {
        return Err(Error::Degenerate(format!("anchor radius {r} outside tip chart [0, {}]", chart.r_max())));
    }
    Ok(())
}

/// Euler step of the radial equation with the outer value taken from the
/// freshly advanced body.
fn advance_chart(
    chart: &TipChart,
    dt: f64,
    body_z: &[f64],
    body_f: &[f64],
    gauge: usize,
    side: usize,
) -> Result<TipChart> {
    let rate = chart.rhs();
    let m = chart.len() - 1;
    let mut u: Vec<f64> = chart.u.iter().zip(&rate).map(|(u, r)| u + dt * r).collect();
    u[0] = 1.0;
    let slope = slope_at_radius(body_z, body_f, gauge, side, chart.r_max())?;
    u[m] = slope * slope;
    Ok(TipChart { dr: chart.dr, u })
}

/// `F_z` where the body profile crosses radius `r`, on the given side of
/// the gauge node, from a local cubic through four nodes.
fn slope_at_radius(z: &[f64], f: &[f64], gauge: usize, side: usize, r: f64) -> Result<f64> {
    let n = z.len();
    let k = if side == RIGHT {
        (gauge..n - 1).find(|&k| f[k] >= r && f[k + 1] < r)
    } else {
        (1..=gauge).rev().find(|&k| f[k] >= r && f[k - 1] < r).map(|k| k - 1)
    };
    let k = k.ok_or_else(|| Error::Degenerate(format!("body profile does not cross the chart radius {r}")))?;
    let start = k.saturating_sub(1).min(n.saturating_sub(4));
    if n < 4 {
        return Err(Error::Grid("too few body nodes".into()));
    }
    let cubic = Cubic::through(&z[start..start + 4], &f[start..start + 4]);
    let zc = bisect(|x| cubic.eval(x) - r, z[k], z[k + 1], 1e-13 * (1.0 + z[k].abs()))?;
    Ok(cubic.deriv(zc))
}

/// Newton form of the cubic through four points.
struct Cubic {
    x: [f64; 4],
    c: [f64; 4],
}

impl Cubic {
    fn through(x: &[f64], y: &[f64]) -> Self {
        let mut c = [y[0], y[1], y[2], y[3]];
        for level in 1..4 {
            for i in (level..4).rev() {
                c[i] = (c[i] - c[i - 1]) / (x[i] - x[i - level]);
            }
        }
        Self { x: [x[0], x[1], x[2], x[3]], c }
    }

    fn eval(&self, t: f64) -> f64 {
        let mut p = self.c[3];
        for i in (0..3).rev() {
            p = p * (t - self.x[i]) + self.c[i];
        }
        p
    }

    fn deriv(&self, t: f64) -> f64 {
        let mut p = self.c[3];
        let mut d = 0.0;
        for i in (0..3).rev() {
            d = d * (t - self.x[i]) + p;
            p = p * (t - self.x[i]) + self.c[i];
        }
        d
    }
}

/// How often [`evolve`] records a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub enum Cadence {
    /// Initial and final states only.
    Ends,
    /// Every `dt` in time, landing on those times exactly.
    Every(f64),
    /// At each of the given increasing times, landing on them exactly.
    At(Vec<f64>),
    /// After every `n` accepted steps.
    Steps(usize),
}

/// Failure during [`evolve`], carrying the last accepted state.
#[derive(Debug)]
pub struct EvolveAbort {
    pub last: ProfileState,
    pub snapshots: Vec<ProfileState>,
    pub error: Error,
}

impl std::fmt::Display for EvolveAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "evolution stopped at t = {}: {}", self.last.t, self.error)
    }
}

impl std::error::Error for EvolveAbort {}

impl From<EvolveAbort> for Error {
    fn from(a: EvolveAbort) -> Self {
        Error::Integration(a.to_string())
    }
}

/// Advance to `t_end`, recording snapshots according to `cadence`. The
/// first snapshot is the (validated) input state and the last one sits
/// exactly at `t_end`.
pub fn evolve(
    state: &ProfileState,
    cfg: &EvolveConfig,
    t_end: f64,
    cadence: Cadence,
) -> std::result::Result<Vec<ProfileState>, EvolveAbort> {
    let abort = |last: &ProfileState, snapshots: Vec<ProfileState>, error: Error| EvolveAbort {
        last: last.clone(),
        snapshots,
        error,
    };
    let mut snapshots = Vec::new();
    if let Err(e) = cfg.validate().and_then(|_| state.validate()) {
        return Err(abort(state, snapshots, e));
    }
    if !(t_end > state.t && t_end < 0.0) {
        let e = Error::Config(format!("t_end = {t_end} not in ({}, 0)", state.t));
        return Err(abort(state, snapshots, e));
    }
    let mut s = state.clone();
    if cfg.dz != s.dz {
        s = match remesh(&s, cfg.dz) {
            Ok(r) => r,
            Err(e) => return Err(abort(state, snapshots, e)),
        };
    }
    snapshots.push(s.clone());
    let t_start = s.t;
    let mut next_mark = 1usize;
    let marks: Vec<f64> = match &cadence {
        Cadence::At(times) => times.iter().cloned().filter(|&t| t > t_start && t < t_end).collect(),
        _ => Vec::new(),
    };
    let mark_time = |k: usize| match &cadence {
        Cadence::Every(h) => (t_start + k as f64 * h).min(t_end),
        Cadence::At(_) => marks.get(k - 1).cloned().unwrap_or(t_end),
        _ => t_end,
    };
    let mut steps = 0usize;
    let dt_nominal = cfg.dt();
    while s.t < t_end {
        shrink_caps(&mut s, cfg);
        let target = mark_time(next_mark);
        let remaining = target - s.t;
        let (dt, lands) = if remaining <= dt_nominal * (1.0 + 1e-9) {
            (remaining, true)
        } else if remaining < 2.0 * dt_nominal {
            (0.5 * remaining, false)
        } else {
            (dt_nominal, false)
        };
        let out = match step_with_dt(&s, cfg, dt) {
            Ok(o) => o,
            Err(e) => return Err(abort(&s, snapshots, e)),
        };
        s = out.state;
        if lands && out.halvings == 0 {
            s.t = target;
        }
        steps += 1;
        if cfg.remesh_every > 0 && steps.is_multiple_of(cfg.remesh_every) {
            s = match remesh(&s, cfg.dz) {
                Ok(r) => r,
                Err(e) => return Err(abort(&s, snapshots, e)),
            };
        }
        let at_mark = lands && out.halvings == 0;
        let record = match &cadence {
            Cadence::Ends => s.t >= t_end,
            Cadence::Every(_) | Cadence::At(_) => at_mark,
            Cadence::Steps(k) => steps.is_multiple_of((*k).max(1)) || s.t >= t_end,
        };
        if at_mark {
            next_mark += 1;
        }
        if record {
            snapshots.push(s.clone());
        }
    }
    Ok(snapshots)
}

/// Cut each tip chart back to `cap_fraction·max F` once it has grown more
/// than 5% past that extent relative to the shrinking profile. Left alone,
/// a chart would eventually reach the flat middle where the depth map is
/// no longer monotone.
fn shrink_caps(s: &mut ProfileState, cfg: &EvolveConfig) {
    let target = cfg.cap_fraction * s.max_f();
    for chart in s.caps.iter_mut().flatten() {
        if chart.r_max() > 1.05 * target {
            let old = chart.clone();
            *chart = TipChart::from_fn(old.dr, target, |r| old.u_at(r));
        }
    }
}

/// Resample onto the lattice `i·dz` strictly between the tips (or over the
/// same extent for cut-off ends) with a shape-preserving cubic through the
/// nodes and tip zeros. Tip charts are resampled at spacing `dz`.
pub fn remesh(state: &ProfileState, dz: f64) -> Result<ProfileState> {
    if !(dz > 0.0) {
        return Err(Error::Config(format!("remesh: dz = {dz}")));
    }
    let on_lattice = state.z_grid.iter().all(|&z| ((z / dz).round() * dz - z).abs() <= 1e-9 * dz.max(z.abs()));
    if dz == state.dz && on_lattice {
        return Ok(state.clone());
    }
    let interp = state.interpolant()?;
    let n = state.len();
    let lo = state.tip_left.unwrap_or(state.z_grid[0] - 0.5 * dz);
    let hi = state.tip_right.unwrap_or(state.z_grid[n - 1] + 0.5 * dz);
    let z_grid = lattice_between(dz, lo, hi);
    let f: Vec<f64> = z_grid.iter().map(|&z| interp.eval(z)).collect();
    let gauge =
        z_grid.iter().position(|&z| z == 0.0).ok_or_else(|| Error::Grid("remeshed lattice lost z = 0".into()))?;
    let caps = [LEFT, RIGHT].map(|side| {
        state.caps[side].as_ref().map(|c| {
            let r_max = c.r_max();
            TipChart::from_fn(dz, r_max, |r| c.u_at(r))
        })
    });
    let out = ProfileState {
        t: state.t,
        dz,
        z_grid,
        f,
        tip_left: state.tip_left,
        tip_right: state.tip_right,
        gauge_origin_index: gauge,
        caps,
    };
    out.validate()?;
    Ok(out)
}
