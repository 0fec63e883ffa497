//! The rotationally symmetric profile PDE
//!
//! ```text
//! F_t = F_zz − F⁻¹(1 − F_z²) − 2 F_z ∫₀^z F_zz / F dz'
//! ```
//!
//! for the sphere radius `F(z, t)` at signed arc length `z` from the gauge
//! origin. Body nodes live on a uniform lattice `z_i = i·dz`; close to each
//! tip the solution is carried by a [`TipChart`] in the radial variable.

mod chart;
mod diagnostics;
mod initial;
mod stepper;

pub use chart::{DepthMap, TipChart};
pub use diagnostics::{
    asymptotics_report, concavity_monitor, scalar_curvature, ConcavityReport, CurvatureProfile, ResidualRow, COLLAR_L,
};
pub(crate) use initial::lattice_between;
pub use initial::{bryant_cap_state, build_initial_profile, cylinder_state, sphere_state, InitialLayout, MIN_LOG_T0};
pub use stepper::{evolve, remesh, step, step_with_dt, Cadence, EvolveAbort, StepOutcome};

use crate::error::{Error, Result};
use crate::numerics::Hermite;

/// Relative slack on the discrete concavity invariant.
pub const CONCAVITY_TOL: f64 = 1e-6;
/// Slack on `|F_z| ≤ 1`.
pub const SLOPE_TOL: f64 = 1e-6;
/// Allowed deviation of the one-sided tip slope from 1.
pub const TIP_SLOPE_TOL: f64 = 0.05;

/// Left and right.
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Solution snapshot.
///
/// `z_grid` holds the body nodes only; the tips themselves are not nodes.
/// A missing tip means the profile is cut off there with an even
/// reflection (used for cylinder tests). `caps[LEFT]` and `caps[RIGHT]`
/// hold the radial charts that travel with the state during an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileState {
    pub t: f64,
    pub dz: f64,
    pub z_grid: Vec<f64>,
    pub f: Vec<f64>,
    pub tip_left: Option<f64>,
    pub tip_right: Option<f64>,
    pub gauge_origin_index: usize,
    pub caps: [Option<TipChart>; 2],
}

/// Time stepping and initial-data parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub t0: f64,
    /// `dt = dt_safety·dz²`.
    pub dt_safety: f64,
    pub dz: f64,
    /// Matching parameter for gluing caps to the body.
    pub theta_match: f64,
    /// Remesh every this many accepted steps; 0 disables remeshing.
    pub remesh_every: usize,
    /// Radial extent of each tip chart as a fraction of `max F`.
    pub cap_fraction: f64,
    /// Nodes with `F` below this fraction of the chart extent are
    /// reconstructed from the chart instead of stepped.
    pub inner_fraction: f64,
    /// Step-halving attempts before giving up.
    pub max_halvings: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t0: -(10f64).exp(),
            dt_safety: 0.25,
            dz: 1.0,
            theta_match: 0.05,
            remesh_every: 0,
            cap_fraction: 0.35,
            inner_fraction: 0.5,
            max_halvings: 8,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 < 0.0 && self.t0.is_finite()) {
            return Err(Error::Config(format!("t0 = {} must be negative", self.t0)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 0.5) {
            return Err(Error::Config(format!("dt_safety = {} not in (0, 0.5]", self.dt_safety)));
        }
        if !(self.theta_match > 0.0 && self.theta_match <= 0.1) {
            return Err(Error::Config(format!("theta_match = {} not in (0, 0.1]", self.theta_match)));
        }
        if !(self.dz > 0.0 && self.dz.is_finite()) {
            return Err(Error::Config(format!("dz = {} must be positive", self.dz)));
        }
        if !(self.cap_fraction > 0.0 && self.cap_fraction < 1.0) {
            return Err(Error::Config(format!("cap_fraction = {} not in (0, 1)", self.cap_fraction)));
        }
        if !(self.inner_fraction > 0.0 && self.inner_fraction < 1.0) {
            return Err(Error::Config(format!("inner_fraction = {} not in (0, 1)", self.inner_fraction)));
        }
        Ok(())
    }

    /// Nominal explicit step.
    pub fn dt(&self) -> f64 {
        self.dt_safety * self.dz * self.dz
    }
}

impl ProfileState {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn tip(&self, side: usize) -> Option<f64> {
        if side == LEFT {
            self.tip_left
        } else {
            self.tip_right
        }
    }

    pub fn max_f(&self) -> f64 {
        self.f.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// Check the structural invariants of a snapshot.
    pub fn validate(&self) -> Result<()> {
        let n = self.f.len();
        if n < 3 || self.z_grid.len() != n {
            return Err(Error::Grid(format!("{} nodes, {} values", self.z_grid.len(), n)));
        }
        if !(self.t < 0.0) {
            return Err(Error::Degenerate(format!("t = {} is not negative", self.t)));
        }
        if self.gauge_origin_index >= n {
            return Err(Error::Grid("gauge origin outside the grid".into()));
        }
        for w in self.z_grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Grid("z grid not increasing".into()));
            }
        }
        if let Some(k) = self.f.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Degenerate(format!("F = {} at z = {}", self.f[k], self.z_grid[k])));
        }
        let fmax = self.max_f();
        for k in 1..n - 1 {
            let h1 = self.z_grid[k] - self.z_grid[k - 1];
            let h2 = self.z_grid[k + 1] - self.z_grid[k];
            let fzz = second_diff(self.f[k - 1], self.f[k], self.f[k + 1], h1, h2);
            if fzz > CONCAVITY_TOL * fmax {
                return Err(Error::Degenerate(format!("concavity lost: F_zz = {fzz:e} at z = {}", self.z_grid[k])));
            }
        }
        for k in 0..n - 1 {
            let s = (self.f[k + 1] - self.f[k]) / (self.z_grid[k + 1] - self.z_grid[k]);
            if s.abs() > 1.0 + SLOPE_TOL {
                return Err(Error::Degenerate(format!("|F_z| = {} at z = {}", s.abs(), self.z_grid[k])));
            }
        }
        if let Some(tl) = self.tip_left {
            let gap = self.z_grid[0] - tl;
            check_tip_slope(self.f[0], gap, "left")?;
        }
        if let Some(tr) = self.tip_right {
            let gap = tr - self.z_grid[n - 1];
            check_tip_slope(self.f[n - 1], gap, "right")?;
        }
        Ok(())
    }

    /// Body nodes extended with the tips as zeros of `F`.
    pub fn with_tips(&self) -> (Vec<f64>, Vec<f64>) {
        let mut z = Vec::with_capacity(self.len() + 2);
        let mut f = Vec::with_capacity(self.len() + 2);
        if let Some(tl) = self.tip_left {
            z.push(tl);
            f.push(0.0);
        }
        z.extend_from_slice(&self.z_grid);
        f.extend_from_slice(&self.f);
        if let Some(tr) = self.tip_right {
            z.push(tr);
            f.push(0.0);
        }
        (z, f)
    }

    /// Shape-preserving interpolant of `F` through the nodes and tips.
    pub fn interpolant(&self) -> Result<Hermite> {
        let (z, f) = self.with_tips();
        Hermite::monotone(z, f)
    }

    /// Radial charts for the tips, building them from the nodes when the
    /// state does not carry any.
    pub fn ensure_caps(&mut self, cap_fraction: f64) -> Result<()> {
        for side in [LEFT, RIGHT] {
            if self.tip(side).is_some() && self.caps[side].is_none() {
                self.caps[side] = Some(chart_from_nodes(self, side, cap_fraction)?);
            }
        }
        Ok(())
    }
}

fn check_tip_slope(f_end: f64, gap: f64, which: &str) -> Result<()> {
    if !(gap > 0.0) {
        return Err(Error::Grid(format!("{which} tip does not lie outside the nodes")));
    }
    let slope = f_end / gap;
    if (slope - 1.0).abs() > TIP_SLOPE_TOL {
        return Err(Error::Degenerate(format!("{which} tip slope {slope}")));
    }
    Ok(())
}

pub(crate) fn second_diff(fm: f64, f0: f64, fp: f64, h1: f64, h2: f64) -> f64 {
    2.0 * (fm / (h1 * (h1 + h2)) - f0 / (h1 * h2) + fp / (h2 * (h1 + h2)))
}

pub(crate) fn first_diff(fm: f64, f0: f64, fp: f64, h1: f64, h2: f64) -> f64 {
    (-h2 / (h1 * (h1 + h2))) * fm + ((h2 - h1) / (h1 * h2)) * f0 + (h1 / (h2 * (h1 + h2))) * fp
}

/// `∫_{z_g}^{z_k} F_zz / F` by cumulative trapezoid from node `gauge`,
/// with `F_zz` from three-point differences at the interior points
/// `1..len−1`. The returned vector has an entry for every point; the two
/// end entries are extrapolated from their neighbours and not used by the
/// stepper.
pub fn nonlocal_integral(z: &[f64], f: &[f64], gauge: usize) -> Result<Vec<f64>> {
    let n = z.len();
    if n < 3 || f.len() != n || gauge == 0 || gauge >= n - 1 {
        return Err(Error::Grid("nonlocal_integral: bad layout".into()));
    }
    let mut q = vec![0.0; n];
    for k in 1..n - 1 {
        if !(f[k] > 0.0) {
            return Err(Error::Degenerate(format!("F = {} at z = {}", f[k], z[k])));
        }
        let fzz = second_diff(f[k - 1], f[k], f[k + 1], z[k] - z[k - 1], z[k + 1] - z[k]);
        q[k] = fzz / f[k];
    }
    q[0] = q[1];
    q[n - 1] = q[n - 2];
    let mut out = vec![0.0; n];
    for k in gauge + 1..n {
        out[k] = out[k - 1] + 0.5 * (z[k] - z[k - 1]) * (q[k - 1] + q[k]);
    }
    for k in (0..gauge).rev() {
        out[k] = out[k + 1] - 0.5 * (z[k + 1] - z[k]) * (q[k] + q[k + 1]);
    }
    Ok(out)
}

/// Right-hand side at the points `1..len−1` of `(z, f)`; the end points
/// act as neighbours only. `gauge` indexes the origin of the nonlocal
/// integral inside the same slice.
pub(crate) fn rhs_points(z: &[f64], f: &[f64], gauge: usize) -> Result<Vec<f64>> {
    let n = z.len();
    let integral = nonlocal_integral(z, f, gauge)?;
    let mut out = Vec::with_capacity(n - 2);
    for k in 1..n - 1 {
        let h1 = z[k] - z[k - 1];
        let h2 = z[k + 1] - z[k];
        let fz = first_diff(f[k - 1], f[k], f[k + 1], h1, h2);
        let fzz = second_diff(f[k - 1], f[k], f[k + 1], h1, h2);
        out.push(fzz - (1.0 - fz * fz) / f[k] - 2.0 * fz * integral[k]);
    }
    Ok(out)
}

/// Nodes padded with one neighbour at each end: the tip zero where there
/// is a tip, an even reflection at a cut-off end.
pub(crate) fn padded(state: &ProfileState) -> (Vec<f64>, Vec<f64>) {
    let n = state.len();
    let mut z = Vec::with_capacity(n + 2);
    let mut f = Vec::with_capacity(n + 2);
    match state.tip_left {
        Some(tl) => {
            z.push(tl);
            f.push(0.0);
        }
        None => {
            z.push(2.0 * state.z_grid[0] - state.z_grid[1]);
            f.push(state.f[1]);
        }
    }
    z.extend_from_slice(&state.z_grid);
    f.extend_from_slice(&state.f);
    match state.tip_right {
        Some(tr) => {
            z.push(tr);
            f.push(0.0);
        }
        None => {
            z.push(2.0 * state.z_grid[n - 1] - state.z_grid[n - 2]);
            f.push(state.f[n - 2]);
        }
    }
    (z, f)
}

/// `F_t` at every node. Next to a tip the tip point itself closes the
/// stencil; at a cut-off end the profile is reflected evenly.
pub fn rhs(state: &ProfileState) -> Result<Vec<f64>> {
    if let Some(k) = state.f.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Degenerate(format!("F = {} at interior node z = {}", state.f[k], state.z_grid[k])));
    }
    let (z, f) = padded(state);
    rhs_points(&z, &f, state.gauge_origin_index + 1)
}

/// Radial chart read off the nodes on one side of the gauge origin.
fn chart_from_nodes(state: &ProfileState, side: usize, cap_fraction: f64) -> Result<TipChart> {
    let (z, f) = state.with_tips();
    let interp = Hermite::monotone(z.clone(), f.clone())?;
    let g = state.gauge_origin_index + usize::from(state.tip_left.is_some());
    // Nodes ordered from the tip inward, as (r, U) pairs.
    let idx: Vec<usize> = if side == LEFT { (1..=g).collect() } else { (g..z.len() - 1).rev().collect() };
    let mut r = Vec::new();
    let mut u = Vec::new();
    for &k in &idx {
        if r.last().is_none_or(|&last| f[k] > last) {
            r.push(f[k]);
            let d = interp.deriv(z[k]);
            u.push((d * d).min(1.0));
        }
    }
    if r.len() < 2 {
        return Err(Error::Degenerate("too few nodes to build a tip chart".into()));
    }
    let r_max = cap_fraction * state.max_f();
    let dr = state.dz;
    let fit = Hermite::monotone(r.clone(), u.clone())?;
    let (r0, u0) = (r[0], u[0]);
    let c = (1.0 - u0) / (r0 * r0);
    Ok(TipChart::from_fn(dr, r_max, |rr| if rr < r0 { 1.0 - c * rr * rr } else { fit.eval(rr) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn cylinder_rhs_is_exact() {
        let t: f64 = -3.0;
        let s = cylinder_state(t, 0.1, 5.0).unwrap();
        let r = rhs(&s).unwrap();
        let exact = -1.0 / (-2.0f64 * t).sqrt();
        for v in r {
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn nonlocal_integral_of_sine() {
        // F_zz/F = −1 for sin z, so the integral from the gauge node is −(z − z_g).
        let z = uniform(0.1, 3.0, 300);
        let f: Vec<f64> = z.iter().map(|v| v.sin()).collect();
        let g = 50;
        let i = nonlocal_integral(&z, &f, g).unwrap();
        for k in 1..z.len() - 1 {
            let exact = -(z[k] - z[g]);
            assert!((i[k] - exact).abs() < 1e-4, "k {k}: {} vs {exact}", i[k]);
        }
    }

    #[test]
    fn nonlocal_integral_against_antiderivative() {
        // F = √(2+z²): F_zz/F = 2/(2+z²)².
        let anti = |s: f64| s / (2.0 * (2.0 + s * s)) + (s / 2f64.sqrt()).atan() / (2.0 * 2f64.sqrt());
        let mut errs = Vec::new();
        for n in [401usize, 801] {
            let z = uniform(-4.0, 4.0, n);
            let f: Vec<f64> = z.iter().map(|v| (2.0 + v * v).sqrt()).collect();
            let g = n / 2;
            let i = nonlocal_integral(&z, &f, g).unwrap();
            let e = (1..n - 1).map(|k| (i[k] - anti(z[k])).abs()).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[0] < 1e-4);
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.8, "order {order}");
    }

    #[test]
    fn nonlocal_term_vanishes_at_gauge_origin() {
        let s = sphere_state(-50.0, 0.1, 0.35).unwrap();
        let (z, f) = s.with_tips();
        let g = s.gauge_origin_index + 1;
        let i = nonlocal_integral(&z, &f, g).unwrap();
        assert_eq!(i[g], 0.0);
    }

    #[test]
    fn sphere_rhs_matches_exact_rate() {
        // a cos(z/a) with a² = −4t: F_t = −(2/a)(cos(z/a) + (z/a) sin(z/a)).
        let t: f64 = -25.0;
        let a = (-4.0 * t).sqrt();
        let s = sphere_state(t, 0.02, 0.35).unwrap();
        let r = rhs(&s).unwrap();
        for (k, &zk) in s.z_grid.iter().enumerate() {
            if zk.abs() > 0.8 * a {
                continue;
            }
            let x = zk / a;
            let exact = -(2.0 / a) * (x.cos() + x * x.sin());
            assert!((r[k] - exact).abs() < 1e-4, "z {zk}: {} vs {exact}", r[k]);
        }
    }

    #[test]
    fn rejects_nonpositive_interior_value() {
        let mut s = cylinder_state(-1.0, 0.5, 2.0).unwrap();
        s.f[2] = 0.0;
        assert!(rhs(&s).is_err());
        assert!(s.validate().is_err());
    }

    #[test]
    fn config_bounds() {
        let mut c = EvolveConfig::default();
        assert!(c.validate().is_ok());
        c.dt_safety = 0.6;
        assert!(c.validate().is_err());
        c.dt_safety = 0.3;
        c.theta_match = 0.2;
        assert!(c.validate().is_err());
    }

    #[test]
    fn caps_from_nodes_match_sphere() {
        let t = -25.0;
        let a2 = -4.0 * t;
        let mut s = sphere_state(t, 0.01, 0.35).unwrap();
        s.caps = [None, None];
        s.ensure_caps(0.3).unwrap();
        let chart = s.caps[RIGHT].as_ref().unwrap();
        for j in (10..chart.len()).step_by(37) {
            let r = chart.r(j);
            assert!((chart.u[j] - (1.0 - r * r / a2)).abs() < 2e-3, "r {r}");
        }
    }
}
