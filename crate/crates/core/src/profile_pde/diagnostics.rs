//! Curvature, concavity and asymptotic residuals of a profile.

use super::{first_diff, padded, rhs, second_diff, ProfileState, LEFT, RIGHT};
use crate::error::Result;

/// Scalar curvature at the nodes and, where there is a tip, at the tip.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub tip_left: Option<f64>,
    pub tip_right: Option<f64>,
}

/// Scalar curvature `2F⁻²(1 − F_z²) − 4F_zz/F` of `dz² + F² g_{S²}`.
///
/// Nodes whose radius lies inside the inner half of a tip chart are
/// evaluated through `U = F_z²` instead, where the same curvature reads
/// `2(1 − U)/r² − 2U_r/r`; differencing `F` there would lose accuracy as
/// `F → 0`. Tip values are extrapolated from the chart.
pub fn scalar_curvature(state: &ProfileState) -> Result<CurvatureProfile> {
    let mut s = state.clone();
    s.ensure_caps(0.35)?;
    let (zp, fp) = padded(&s);
    let n = s.len();
    let g = s.gauge_origin_index;
    let interps = [LEFT, RIGHT].map(|side| s.caps[side].as_ref().map(|c| (c.interpolant(), c.r_max())));
    let mut r = Vec::with_capacity(n);
    for k in 0..n {
        let side = if k < g { LEFT } else { RIGHT };
        let f = s.f[k];
        if let Some((u, r_max)) = &interps[side] {
            if f < 0.5 * r_max {
                let uu = u.eval(f);
                let ur = u.deriv(f);
                r.push(2.0 * (1.0 - uu) / (f * f) - 2.0 * ur / f);
                continue;
            }
        }
        // Padded index k + 1 is node k; use five points where they exist.
        let (fz, fzz) = if k >= 1 && k + 3 < fp.len() {
            let h = s.dz;
            let w = &fp[k - 1..k + 4];
            (
                (w[0] - 8.0 * w[1] + 8.0 * w[3] - w[4]) / (12.0 * h),
                (-w[0] + 16.0 * w[1] - 30.0 * w[2] + 16.0 * w[3] - w[4]) / (12.0 * h * h),
            )
        } else {
            let (h1, h2) = (zp[k + 1] - zp[k], zp[k + 2] - zp[k + 1]);
            (first_diff(fp[k], fp[k + 1], fp[k + 2], h1, h2), second_diff(fp[k], fp[k + 1], fp[k + 2], h1, h2))
        };
        r.push(2.0 * (1.0 - fz * fz) / (f * f) - 4.0 * fzz / f);
    }
    let tip = |side: usize| s.caps[side].as_ref().map(|c| c.tip_curvature());
    Ok(CurvatureProfile {
        z: s.z_grid.clone(),
        r,
        tip_left: s.tip_left.and(tip(LEFT)),
        tip_right: s.tip_right.and(tip(RIGHT)),
    })
}

/// Outcome of the concavity monitor for `H = ½F² + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    /// Largest discrete `H_zz` over the monitored region, if nonempty.
    pub max_hzz: Option<f64>,
    pub at_z: Option<f64>,
    pub region_nodes: usize,
    /// `F²` threshold defining the region.
    pub threshold_f2: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Largest `H_zz` over `F² ≥ L0²(−t)/log(−t)`, tested against
/// `10⁻⁶·max F²/(−t)`.
pub fn concavity_monitor(state: &ProfileState, l0: f64) -> ConcavityReport {
    let big_t = -state.t;
    let threshold_f2 = l0 * l0 * big_t / big_t.ln();
    let fmax = state.max_f();
    let tolerance = 1e-6 * fmax * fmax / big_t;
    let (zp, fp) = padded(state);
    let h: Vec<f64> = fp.iter().map(|f| 0.5 * f * f).collect();
    let mut best: Option<(f64, f64)> = None;
    let mut count = 0;
    for k in 0..state.len() {
        let f = state.f[k];
        if f * f < threshold_f2 {
            continue;
        }
        count += 1;
        let hzz = second_diff(h[k], h[k + 1], h[k + 2], zp[k + 1] - zp[k], zp[k + 2] - zp[k + 1]);
        if best.is_none_or(|(b, _)| hzz > b) {
            best = Some((hzz, state.z_grid[k]));
        }
    }
    ConcavityReport {
        max_hzz: best.map(|b| b.0),
        at_z: best.map(|b| b.1),
        region_nodes: count,
        threshold_f2,
        tolerance,
        pass: best.is_none_or(|(b, _)| b <= tolerance),
    }
}

/// Multiple of `√(−t/log(−t))` where the collar estimate starts. It must
/// exceed `1/η`, and `η = 1` here.
pub const COLLAR_L: f64 = 2.0;

/// Maximum of one normalized residual over its region.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualRow {
    pub name: &'static str,
    pub region: String,
    /// Largest residual divided by its envelope; zero on an empty region.
    pub max: f64,
    pub at_z: f64,
    pub nodes: usize,
}

/// Normalized residuals of the five body and collar estimates, with
/// `η = 1` and unit constants. Each row reports the maximum over the nodes
/// in its region, at least two nodes away from either end.
pub fn asymptotics_report(state: &ProfileState, theta: f64) -> Result<Vec<ResidualRow>> {
    let big_t = -state.t;
    let l = big_t.ln();
    let sq = big_t.sqrt();
    let r_scale = (big_t / l).sqrt();
    let ft = rhs(state)?;
    let n = state.len();
    let dz = state.dz;
    let f = &state.f;
    let z = &state.z_grid;

    struct Acc {
        max: f64,
        at: f64,
        nodes: usize,
    }
    let mut acc: Vec<Acc> = (0..5).map(|_| Acc { max: 0.0, at: f64::NAN, nodes: 0 }).collect();
    let mut push = |i: usize, v: f64, zk: f64| {
        let a = &mut acc[i];
        a.nodes += 1;
        if v > a.max || a.at.is_nan() {
            a.max = v.max(a.max);
            a.at = zk;
        }
    };
    let collar_lo = COLLAR_L * r_scale;
    let collar_hi = 100.0 * theta * (2.0 * big_t).sqrt();
    for k in 2..n.saturating_sub(2) {
        let (fk, zk) = (f[k], z[k]);
        let fz = (f[k + 1] - f[k - 1]) / (2.0 * dz);
        let fzz = (f[k + 1] - 2.0 * f[k] + f[k - 1]) / (dz * dz);
        let fzzz = (f[k + 2] - 2.0 * f[k + 1] + 2.0 * f[k - 1] - f[k - 2]) / (2.0 * dz * dz * dz);
        if fk >= theta * sq / 400.0 {
            let lhs = (0.5 * fk * fk + state.t + (zk * zk + 2.0 * state.t) / (4.0 * l)).abs();
            push(0, lhs / ((zk * zk + big_t) / l), zk);
        }
        if fk >= theta * sq / 200.0 {
            let lhs = (fk * fz + zk / (2.0 * l)).abs();
            push(1, lhs / ((zk.abs() + sq) / l), zk);
        }
        if fk >= theta * sq / 100.0 {
            push(2, (fk * fzz.abs() + fk * fk * fzzz.abs()) * l.sqrt(), zk);
            push(3, (1.0 + fk * ft[k]).abs() * l.sqrt(), zk);
        }
        if fk >= collar_lo && fk <= collar_hi {
            push(4, (1.0 - fk * fz.abs() / r_scale).abs(), zk);
        }
    }
    let names = ["precise_F", "precise_F_z", "higher_derivatives", "time_derivative", "collar_F_z"];
    let regions = [
        format!("F >= theta*sqrt(-t)/400 = {:.6e}", theta * sq / 400.0),
        format!("F >= theta*sqrt(-t)/200 = {:.6e}", theta * sq / 200.0),
        format!("F >= theta*sqrt(-t)/100 = {:.6e}", theta * sq / 100.0),
        format!("F >= theta*sqrt(-t)/100 = {:.6e}", theta * sq / 100.0),
        format!("{:.6e} <= F <= {:.6e} (L = {COLLAR_L})", collar_lo, collar_hi),
    ];
    Ok(acc
        .into_iter()
        .zip(names)
        .zip(regions)
        .map(|((a, name), region)| ResidualRow { name, region, max: a.max, at_z: a.at, nodes: a.nodes })
        .collect())
}
