//! Initial data: the oval built from body asymptotics and Bryant caps,
//! plus the exact shrinking cylinder and round sphere, and a standalone
//! Bryant cap used to test curvature evaluation.

use super::{EvolveConfig, ProfileState, TipChart, RIGHT};
use crate::bryant::BryantCurve;
use crate::error::{Error, Result};
use crate::numerics::{cumtrapz_corrected, smooth_step, Hermite};

/// Smallest accepted `log(−t0)` for oval data.
pub const MIN_LOG_T0: f64 = 8.0;

/// Keep lattice nodes at least this fraction of `dz` away from a tip.
pub(crate) const TIP_MARGIN: f64 = 1e-6;

/// Scales used to assemble the oval, reported for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialLayout {
    pub log_t: f64,
    /// `√(−t / log(−t))`.
    pub r_scale: f64,
    pub f_max: f64,
    /// Radii between which body and cap are blended.
    pub band: (f64, f64),
    pub tip: f64,
}

/// Lattice indices `i` with `lo + margin < i·dz < hi − margin`.
pub(crate) fn lattice_between(dz: f64, lo: f64, hi: f64) -> Vec<f64> {
    let m = TIP_MARGIN * dz;
    let i0 = ((lo + m) / dz).floor() as i64 + 1;
    let i1 = ((hi - m) / dz).ceil() as i64 - 1;
    (i0..=i1).map(|i| i as f64 * dz).collect()
}

/// Index of the node `z = 0` in a lattice vector.
fn zero_index(z: &[f64]) -> Result<usize> {
    z.iter().position(|&v| v == 0.0).ok_or_else(|| Error::Grid("lattice does not contain z = 0".into()))
}

/// Blend scales for the oval at time `t`.
pub(crate) fn layout(t: f64, theta: f64) -> InitialLayout {
    let big_t = -t;
    let log_t = big_t.ln();
    let r_scale = (big_t / log_t).sqrt();
    let f_max = (2.0 * big_t * (1.0 + 0.5 / log_t)).sqrt();
    let edge = theta * (2.0 * big_t).sqrt();
    let band = (edge.max(2.0 * r_scale), (2.0 * edge).max(3.0 * r_scale));
    InitialLayout { log_t, r_scale, f_max, band, tip: f64::NAN }
}

/// Oval initial data at `cfg.t0`.
///
/// The body follows `F² = −2t − (z² + 2t)/(2 log(−t))`; each tip is a Bryant
/// cap of length scale `√(−t/log(−t))`. The two descriptions are blended in
/// the radial variable `U = F_z²` across a band of radii.
pub fn build_initial_profile(cfg: &EvolveConfig, curve: &BryantCurve) -> Result<ProfileState> {
    cfg.validate()?;
    let t = cfg.t0;
    let lay = layout(t, cfg.theta_match);
    if lay.log_t < MIN_LOG_T0 {
        return Err(Error::Config(format!("log(-t0) = {:.3} is below {MIN_LOG_T0}", lay.log_t)));
    }
    let (r_lo, r_hi) = lay.band;
    if r_hi >= 0.9 * lay.f_max {
        return Err(Error::Config(format!(
            "blend band [{r_lo:.3}, {r_hi:.3}] does not fit under max F = {:.3}",
            lay.f_max
        )));
    }
    let b_top = curve.b_at(curve.z_max());
    if r_hi / lay.r_scale > b_top {
        return Err(Error::Range(format!("Bryant curve reaches B = {b_top:.3}, need {:.3}", r_hi / lay.r_scale)));
    }
    let l = lay.log_t;
    let fm2 = lay.f_max * lay.f_max;
    let zb = |r: f64| (2.0 * l * (fm2 - r * r)).max(0.0).sqrt();
    let u_body = |r: f64| {
        let z = zb(r);
        z * z / (4.0 * l * l * r * r)
    };
    let u_cap = |r: f64| {
        let d = curve.b_prime_at(curve.z_of_b(r / lay.r_scale));
        d * d
    };
    let u_blend = |r: f64| {
        if r <= r_lo {
            u_cap(r)
        } else if r >= r_hi {
            u_body(r)
        } else {
            let w = smooth_step((r - r_lo) / (r_hi - r_lo));
            w * u_body(r) + (1.0 - w) * u_cap(r)
        }
    };

    // Arc length from the tip as a function of radius, up to r_hi.
    let nr = ((r_hi / (0.05 * cfg.dz).min(0.02 * lay.r_scale)).ceil() as usize).max(200);
    let hr = r_hi / nr as f64;
    let rs: Vec<f64> = (0..=nr).map(|j| j as f64 * hr).collect();
    let us: Vec<f64> = rs.iter().map(|&r| if r == 0.0 { 1.0 } else { u_blend(r) }).collect();
    let g: Vec<f64> = us.iter().map(|u| 1.0 / u.sqrt()).collect();
    let gz = numeric_derivative(&rs, &g);
    let depth = cumtrapz_corrected(&rs, &g, &gz);
    let z_join = zb(r_hi);
    let tip = z_join + depth[nr];
    let slopes: Vec<f64> = us.iter().map(|u| u.sqrt()).collect();
    let radius_of_depth = Hermite::with_slopes(depth, rs, slopes)?;

    let z_grid = lattice_between(cfg.dz, -tip, tip);
    let f: Vec<f64> = z_grid
        .iter()
        .map(|&z| {
            let a = z.abs();
            if a <= z_join {
                (fm2 - z * z / (2.0 * l)).sqrt()
            } else {
                radius_of_depth.eval(tip - a)
            }
        })
        .collect();
    let gauge = zero_index(&z_grid)?;
    let cap = TipChart::from_fn(cfg.dz, cfg.cap_fraction * lay.f_max, u_blend);
    let state = ProfileState {
        t,
        dz: cfg.dz,
        z_grid,
        f,
        tip_left: Some(-tip),
        tip_right: Some(tip),
        gauge_origin_index: gauge,
        caps: [Some(cap.clone()), Some(cap)],
    };
    state.validate()?;
    Ok(state)
}

/// Fourth-order differences on a uniform grid, one-sided at the ends.
fn numeric_derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    crate::numerics::fd_slopes(x, y)
}

/// Exact shrinking cylinder `F = √(−2t)` on `[−half_length, half_length]`
/// with cut-off ends.
pub fn cylinder_state(t: f64, dz: f64, half_length: f64) -> Result<ProfileState> {
    if !(t < 0.0 && dz > 0.0 && half_length >= 2.0 * dz) {
        return Err(Error::Config(format!("cylinder_state: t = {t}, dz = {dz}, half_length = {half_length}")));
    }
    let m = (half_length / dz).round() as i64;
    let z_grid: Vec<f64> = (-m..=m).map(|i| i as f64 * dz).collect();
    let f = vec![(-2.0 * t).sqrt(); z_grid.len()];
    Ok(ProfileState {
        t,
        dz,
        gauge_origin_index: m as usize,
        z_grid,
        f,
        tip_left: None,
        tip_right: None,
        caps: [None, None],
    })
}

/// Exact shrinking round sphere `F = a cos(z/a)`, `a² = −4t`, with the
/// gauge origin at the equator and radial charts of extent
/// `cap_fraction·a`.
pub fn sphere_state(t: f64, dz: f64, cap_fraction: f64) -> Result<ProfileState> {
    if !(t < 0.0 && dz > 0.0) {
        return Err(Error::Config(format!("sphere_state: t = {t}, dz = {dz}")));
    }
    let a = (-4.0 * t).sqrt();
    let tip = 0.5 * std::f64::consts::PI * a;
    let z_grid = lattice_between(dz, -tip, tip);
    let f = z_grid.iter().map(|&z| a * (z / a).cos()).collect();
    let gauge = zero_index(&z_grid)?;
    let cap = TipChart::from_fn(dz, cap_fraction * a, |r| 1.0 - r * r / (a * a));
    let state = ProfileState {
        t,
        dz,
        z_grid,
        f,
        tip_left: Some(-tip),
        tip_right: Some(tip),
        gauge_origin_index: gauge,
        caps: [Some(cap.clone()), Some(cap)],
    };
    state.validate()?;
    Ok(state)
}

/// A single Bryant cap `F(z) = B(z_tip − z)` on `[0, z_tip)` with a cut-off
/// left end, at the soliton's own scale.
pub fn bryant_cap_state(curve: &BryantCurve, dz: f64, z_tip: f64) -> Result<ProfileState> {
    if !(z_tip > 2.0 * dz && z_tip <= curve.z_max()) {
        return Err(Error::Config(format!("bryant_cap_state: z_tip = {z_tip}")));
    }
    let m = ((z_tip - TIP_MARGIN * dz) / dz).floor() as usize;
    let z_grid: Vec<f64> = (0..=m).map(|i| i as f64 * dz).collect();
    let f: Vec<f64> = z_grid.iter().map(|&z| curve.b_at(z_tip - z)).collect();
    let r_max = 0.5 * f[0];
    let cap = TipChart::from_fn(dz, r_max, |r| {
        let d = curve.b_prime_at(curve.z_of_b(r));
        d * d
    });
    let mut caps = [None, None];
    caps[RIGHT] = Some(cap);
    Ok(ProfileState { t: -1.0, dz, gauge_origin_index: 1, z_grid, f, tip_left: None, tip_right: Some(z_tip), caps })
}
