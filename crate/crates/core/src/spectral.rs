//! Gaussian-weighted function space `𝓗 = L²(ℝ, e^{−ξ²/4} dξ)` on uniform
//! symmetric grids, the drift operator `𝓛f = f'' − ½ξf' + f`, projections
//! onto its unstable and neutral modes, windowed norms, and the two
//! auxiliary inequalities used in the cylindrical region.
//!
//! The modes `1`, `ξ`, `ξ² − 2` have eigenvalues `1`, `½`, `0`. The neutral
//! coefficient is normalized so that `P₀f = √2·a·(ξ² − 2)` with
//! `a = ⟨ξ² − 2, f⟩ / (16√(2π))`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{cumtrapz, simpson, simpson_weights};

/// Default truncation radius.
pub const DEFAULT_X: f64 = 30.0;
/// Default grid spacing.
pub const DEFAULT_DXI: f64 = 0.01;

/// Gaussian weight `e^{−ξ²/4}`.
#[inline]
pub fn weight(xi: f64) -> f64 {
    (-0.25 * xi * xi).exp()
}

/// Samples of a function on a uniform grid symmetric about zero.
#[derive(Debug, Clone)]
pub struct GaussFunction {
    pub xi_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub x_trunc: f64,
}

/// Symmetric grid `(i − m)·h`, `i = 0..=2m`, with `m·h` close to `x`.
pub fn symmetric_grid(x: f64, h: f64) -> Vec<f64> {
    let m = (x / h).round() as i64;
    (-m..=m).map(|i| i as f64 * h).collect()
}

impl GaussFunction {
    /// Sample `f` on the symmetric grid of radius `x` and spacing `h`.
    pub fn sample<F: Fn(f64) -> f64>(x: f64, h: f64, f: F) -> Self {
        let xi_grid = symmetric_grid(x, h);
        let values = xi_grid.iter().map(|&v| f(v)).collect();
        let x_trunc = *xi_grid.last().unwrap();
        Self { xi_grid, values, x_trunc }
    }

    /// Wrap existing samples; the grid must be uniform and symmetric.
    pub fn new(xi_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xi_grid.len() != values.len() || xi_grid.len() < 3 {
            return Err(Error::Grid("gauss function: length mismatch".into()));
        }
        let n = xi_grid.len();
        let h = xi_grid[1] - xi_grid[0];
        for i in 0..n {
            if (xi_grid[i] + xi_grid[n - 1 - i]).abs() > 1e-9 * h {
                return Err(Error::Grid("gauss function grid is not symmetric".into()));
            }
            if i > 0 && ((xi_grid[i] - xi_grid[i - 1]) - h).abs() > 1e-9 * h {
                return Err(Error::Grid("gauss function grid is not uniform".into()));
            }
        }
        let x_trunc = xi_grid[n - 1];
        Ok(Self { xi_grid, values, x_trunc })
    }

    pub fn spacing(&self) -> f64 {
        self.xi_grid[1] - self.xi_grid[0]
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self { xi_grid: self.xi_grid.clone(), values, x_trunc: self.x_trunc }
    }

    /// Pointwise map on the same grid.
    pub fn map<F: Fn(f64, f64) -> f64>(&self, f: F) -> Self {
        self.with_values(self.xi_grid.iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect())
    }

    /// Central-difference first derivative (second order, one-sided ends).
    pub fn derivative(&self) -> Vec<f64> {
        let h = self.spacing();
        let v = &self.values;
        let n = v.len();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        d
    }

    /// Truncation diagnostic `e^{−X²/4}·max|f|`.
    pub fn truncation_error(&self) -> f64 {
        let m = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        weight(self.x_trunc) * m
    }
}

fn check_compatible(f: &GaussFunction, g: &GaussFunction) -> Result<()> {
    if f.xi_grid.len() != g.xi_grid.len() || (f.spacing() - g.spacing()).abs() > 1e-12 * f.spacing() {
        return Err(Error::Grid("incompatible gauss grids".into()));
    }
    Ok(())
}

/// `∫ e^{−ξ²/4} f g dξ` by composite Simpson on the truncated line.
pub fn gauss_inner(f: &GaussFunction, g: &GaussFunction) -> Result<f64> {
    check_compatible(f, g)?;
    let y: Vec<f64> =
        f.xi_grid.iter().zip(f.values.iter().zip(&g.values)).map(|(&x, (&a, &b))| weight(x) * a * b).collect();
    Ok(simpson(&y, f.spacing()))
}

/// `‖f‖_𝓗²`.
pub fn norm_h_sq(f: &GaussFunction) -> f64 {
    gauss_inner(f, f).expect("same grid")
}

/// `‖f‖_𝓓² = ∫ e^{−ξ²/4} (f'² + f²)`.
pub fn norm_d_sq(f: &GaussFunction) -> f64 {
    let d = f.derivative();
    let y: Vec<f64> =
        f.xi_grid.iter().zip(f.values.iter().zip(&d)).map(|(&x, (&a, &b))| weight(x) * (a * a + b * b)).collect();
    simpson(&y, f.spacing())
}

/// Pointwise `𝓛f = f'' − ½ξf' + f` with central differences.
pub fn apply_drift_l(f: &GaussFunction) -> GaussFunction {
    let h = f.spacing();
    let v = &f.values;
    let n = v.len();
    let d1 = f.derivative();
    let mut d2 = vec![0.0; n];
    for i in 1..n - 1 {
        d2[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
    }
    d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
    d2[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h);
    let out = (0..n).map(|i| d2[i] - 0.5 * f.xi_grid[i] * d1[i] + v[i]).collect();
    f.with_values(out)
}

/// Projection of a function onto the modes of `𝓛`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCoeffs {
    /// Coefficient on `1`.
    pub c0: f64,
    /// Coefficient on `ξ`.
    pub c1: f64,
    /// Neutral coefficient: `P₀f = √2·a·(ξ² − 2)`.
    pub a: f64,
    /// `𝓗`-norm of `f − c0 − c1 ξ − √2 a (ξ² − 2)`.
    pub remainder_norm_h: f64,
}

/// Normalization `16√(2π)` of the neutral coefficient.
pub fn neutral_normalization() -> f64 {
    16.0 * (2.0 * PI).sqrt()
}

/// Project onto `1`, `ξ`, `ξ² − 2` and report the remainder.
pub fn project_modes(f: &GaussFunction) -> SpectralCoeffs {
    let h = f.spacing();
    let w = simpson_weights(f.xi_grid.len(), h);
    let (mut s0, mut s1, mut s2, mut n0, mut n1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..f.xi_grid.len() {
        let x = f.xi_grid[i];
        let wi = w[i] * weight(x);
        s0 += wi * f.values[i];
        s1 += wi * x * f.values[i];
        s2 += wi * (x * x - 2.0) * f.values[i];
        n0 += wi;
        n1 += wi * x * x;
    }
    let c0 = s0 / n0;
    let c1 = s1 / n1;
    let a = s2 / neutral_normalization();
    let rem = f.map(|x, v| v - c0 - c1 * x - 2f64.sqrt() * a * (x * x - 2.0));
    SpectralCoeffs { c0, c1, a, remainder_norm_h: norm_h_sq(&rem).sqrt() }
}

/// Rebuild `c0 + c1 ξ + √2 a (ξ² − 2)` on the grid of `like`.
pub fn reconstruct(c: &SpectralCoeffs, like: &GaussFunction) -> GaussFunction {
    like.map(|x, _| c.c0 + c.c1 * x + 2f64.sqrt() * c.a * (x * x - 2.0))
}

// ---------------------------------------------------------------------------
// Self-test
// ---------------------------------------------------------------------------

/// One row of the spectral self-test.
#[derive(Debug, Clone)]
pub struct IdentityRow {
    pub name: &'static str,
    pub computed: f64,
    pub target: f64,
    pub rel_error: f64,
    pub tolerance: f64,
}

impl IdentityRow {
    pub fn pass(&self) -> bool {
        self.rel_error <= self.tolerance
    }
}

fn row(name: &'static str, computed: f64, target: f64, scale: f64, tolerance: f64) -> IdentityRow {
    IdentityRow { name, computed, target, rel_error: (computed - target).abs() / scale, tolerance }
}

/// Moment identities, eigenrelations of `𝓛` and mode orthogonality at
/// truncation `x` and spacing `h`.
pub fn moment_selftest(x: f64, h: f64) -> Vec<IdentityRow> {
    let sp = PI.sqrt();
    let one = GaussFunction::sample(x, h, |_| 1.0);
    let lin = GaussFunction::sample(x, h, |v| v);
    let quad = GaussFunction::sample(x, h, |v| v * v - 2.0);
    let cube = GaussFunction::sample(x, h, |v| (v * v - 2.0).powi(2));
    let xsq = GaussFunction::sample(x, h, |v| v * v);
    let ip = |f: &GaussFunction, g: &GaussFunction| gauss_inner(f, g).unwrap();

    let mut rows = vec![
        row("int e^{-xi^2/4} = 2 sqrt(pi)", ip(&one, &one), 2.0 * sp, 2.0 * sp, 1e-8),
        row("int e^{-xi^2/4} xi^2 = 4 sqrt(pi)", ip(&one, &xsq), 4.0 * sp, 4.0 * sp, 1e-8),
        row("int e^{-xi^2/4} xi^4 = 24 sqrt(pi)", ip(&xsq, &xsq), 24.0 * sp, 24.0 * sp, 1e-8),
        row("int e^{-xi^2/4} (xi^2-2)^2 = 16 sqrt(pi)", ip(&quad, &quad), 16.0 * sp, 16.0 * sp, 1e-8),
        row("int e^{-xi^2/4} (xi^2-2)^3 = 128 sqrt(pi)", ip(&quad, &cube), 128.0 * sp, 128.0 * sp, 1e-8),
        row("int e^{-xi^2/4} (xi^2-2) xi^2 = 16 sqrt(pi)", ip(&quad, &xsq), 16.0 * sp, 16.0 * sp, 1e-8),
    ];
    // Orthogonality, relative to the geometric mean of the diagonal.
    let modes = [&one, &lin, &quad];
    let names = ["<1,xi>", "<1,xi^2-2>", "<xi,xi^2-2>"];
    let mut k = 0;
    for i in 0..3 {
        for j in i + 1..3 {
            let scale = (ip(modes[i], modes[i]) * ip(modes[j], modes[j])).sqrt();
            rows.push(row(names[k], ip(modes[i], modes[j]), 0.0, scale, 1e-10));
            k += 1;
        }
    }
    // Eigenrelations, measured away from the truncation boundary.
    let eig = |f: &GaussFunction, lambda: f64| {
        let lf = apply_drift_l(f);
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..f.xi_grid.len() {
            if f.xi_grid[i].abs() <= 0.5 * x {
                err = err.max((lf.values[i] - lambda * f.values[i]).abs());
                scale = scale.max(f.values[i].abs());
            }
        }
        err / scale.max(1.0)
    };
    rows.push(IdentityRow {
        name: "L 1 = 1",
        computed: eig(&one, 1.0),
        target: 0.0,
        rel_error: eig(&one, 1.0),
        tolerance: 1e-4,
    });
    rows.push(IdentityRow {
        name: "L xi = xi/2",
        computed: eig(&lin, 0.5),
        target: 0.0,
        rel_error: eig(&lin, 0.5),
        tolerance: 1e-4,
    });
    rows.push(IdentityRow {
        name: "L (xi^2-2) = 0",
        computed: eig(&quad, 0.0),
        target: 0.0,
        rel_error: eig(&quad, 0.0),
        tolerance: 1e-4,
    });
    rows
}

// ---------------------------------------------------------------------------
// Windowed norms
// ---------------------------------------------------------------------------

/// Windowed norms `sup_{τ ≤ τ*} ∫_{τ−1}^{τ} ‖f‖² dτ'`.
#[derive(Debug, Clone, Copy)]
pub struct WindowNorms {
    pub h_sq: f64,
    pub d_sq: f64,
    /// Right end of the maximizing window for the `𝓗` norm.
    pub tau_at_max: f64,
}

/// Windowed `𝓗` and `𝓓` norms of a series sampled at increasing, uniformly
/// spaced `taus` (spacing at most 0.1).
pub fn window_norms(taus: &[f64], series: &[GaussFunction], tau_star: f64) -> Result<WindowNorms> {
    if taus.len() != series.len() || taus.len() < 2 {
        return Err(Error::Grid("window norms: series length mismatch".into()));
    }
    let dt = taus[1] - taus[0];
    if dt > 0.1 + 1e-12 {
        return Err(Error::Grid(format!("window norms: tau spacing {dt} > 0.1")));
    }
    let hs: Vec<f64> = series.iter().map(norm_h_sq).collect();
    let ds: Vec<f64> = series.iter().map(norm_d_sq).collect();
    let window = |vals: &[f64], k: usize| -> Option<f64> {
        let start = taus[k] - 1.0;
        if start < taus[0] - 1e-9 * dt {
            return None;
        }
        let j = taus.partition_point(|&t| t < start - 1e-9 * dt);
        let mut s = crate::numerics::trapz(&taus[j..=k], &vals[j..=k]);
        if j > 0 && taus[j] > start {
            // Partial first segment by linear interpolation.
            let w = (taus[j] - start) / (taus[j] - taus[j - 1]);
            let v_start = vals[j] + w * (vals[j - 1] - vals[j]);
            s += 0.5 * (taus[j] - start) * (vals[j] + v_start);
        }
        Some(s)
    };
    let mut best: Option<WindowNorms> = None;
    for k in 0..taus.len() {
        if taus[k] > tau_star + 1e-12 {
            break;
        }
        if let (Some(h), Some(d)) = (window(&hs, k), window(&ds, k)) {
            let cand = WindowNorms { h_sq: h, d_sq: d, tau_at_max: taus[k] };
            best = Some(match best {
                None => cand,
                Some(b) => WindowNorms {
                    h_sq: b.h_sq.max(h),
                    d_sq: b.d_sq.max(d),
                    tau_at_max: if h > b.h_sq { taus[k] } else { b.tau_at_max },
                },
            });
        }
    }
    best.ok_or_else(|| Error::Range("window norms: series shorter than one unit window".into()))
}

// ---------------------------------------------------------------------------
// Auxiliary inequalities
// ---------------------------------------------------------------------------

/// Outcome of a two-sided inequality check `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Samples `f(i·h)`, `i = 0..n`, on a half-line grid starting at zero.
#[derive(Debug, Clone)]
pub struct HalfLine {
    pub h: f64,
    pub values: Vec<f64>,
}

impl HalfLine {
    pub fn sample<F: Fn(f64) -> f64>(x_max: f64, h: f64, f: F) -> Self {
        let n = (x_max / h).round() as usize;
        Self { h, values: (0..=n).map(|i| f(i as f64 * h)).collect() }
    }

    fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    fn index_of(&self, x: f64) -> Result<usize> {
        let k = (x / self.h).round();
        if (k * self.h - x).abs() > 1e-9 * self.h.max(x.abs()) || k < 0.0 {
            return Err(Error::Grid(format!("{x} is not a node of the half-line grid")));
        }
        let k = k as usize;
        if k >= self.values.len() {
            return Err(Error::Range(format!("{x} beyond the half-line grid")));
        }
        Ok(k)
    }

    fn derivative(&self) -> Vec<f64> {
        let v = &self.values;
        let n = v.len();
        let h = self.h;
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        d
    }

    /// `∫_a^b e^{−ξ²/4} y²` for node-aligned `a < b`.
    fn weighted_sq(&self, y: &[f64], a: usize, b: usize) -> f64 {
        let seg: Vec<f64> = (a..=b).map(|i| weight(self.x(i)) * y[i] * y[i]).collect();
        simpson(&seg, self.h)
    }
}

/// `∫₀^∞ e^{−ξ²/4} g² ≤ 2 ∫₀^∞ e^{−ξ²/4} f²` with `g(ξ) = ∫₀^ξ f`.
pub fn halfline_bound_check(f: &HalfLine) -> BoundCheck {
    let xs: Vec<f64> = (0..f.values.len()).map(|i| f.x(i)).collect();
    let g = cumtrapz(&xs, &f.values);
    let n = f.values.len() - 1;
    let lhs = f.weighted_sq(&g, 0, n);
    let rhs = 2.0 * f.weighted_sq(&f.values, 0, n);
    BoundCheck { lhs, rhs, pass: lhs <= rhs }
}

/// Frozen constant for [`cylindrical_poincare_check`], calibrated once on
/// a seeded family disjoint from the acceptance family (see the crate's
/// `calibration` test, fitted maximum 6.90) with a safety factor of two.
pub const C_EMP: f64 = 14.0;

/// `L2² ∫_{L2}^{L3} e^{−ξ²/4} f² ≤ C [∫_{L1}^{L3} e^{−ξ²/4} f'² + (L2−L1)⁻² ∫_{L1}^{L2} e^{−ξ²/4} f²]`.
pub fn cylindrical_poincare_check(f: &HalfLine, l1: f64, l2: f64, l3: f64, c: f64) -> Result<BoundCheck> {
    if !(4.0 <= l1 && l1 < l2 && l2 < l3) {
        return Err(Error::Config(format!("cylindrical Poincare needs 4 <= L1 < L2 < L3, got {l1}, {l2}, {l3}")));
    }
    let (i1, i2, i3) = (f.index_of(l1)?, f.index_of(l2)?, f.index_of(l3)?);
    let d = f.derivative();
    let lhs = l2 * l2 * f.weighted_sq(&f.values, i2, i3);
    let rhs = c * (f.weighted_sq(&d, i1, i3) + f.weighted_sq(&f.values, i1, i2) / ((l2 - l1) * (l2 - l1)));
    Ok(BoundCheck { lhs, rhs, pass: lhs <= rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_fn<F: Fn(f64) -> f64>(f: F) -> GaussFunction {
        GaussFunction::sample(DEFAULT_X, DEFAULT_DXI, f)
    }

    #[test]
    fn inner_products() {
        let sp = PI.sqrt();
        let one = grid_fn(|_| 1.0);
        let q = grid_fn(|x| x * x - 2.0);
        let lin = grid_fn(|x| x);
        assert!((gauss_inner(&one, &one).unwrap() / (2.0 * sp) - 1.0).abs() < 1e-12);
        assert!((gauss_inner(&q, &q).unwrap() / (16.0 * sp) - 1.0).abs() < 1e-12);
        assert!(gauss_inner(&one, &lin).unwrap().abs() < 1e-13);
        let coarse = GaussFunction::sample(10.0, 0.1, |_| 1.0);
        assert!(gauss_inner(&one, &coarse).is_err());
    }

    #[test]
    fn drift_operator_eigenrelations() {
        for (f, lambda) in [(grid_fn(|_| 1.0), 1.0), (grid_fn(|x| x), 0.5), (grid_fn(|x| x * x - 2.0), 0.0)] {
            let lf = apply_drift_l(&f);
            for i in 0..f.values.len() {
                assert!((lf.values[i] - lambda * f.values[i]).abs() < 1e-6 * (1.0 + f.values[i].abs()));
            }
        }
    }

    #[test]
    fn drift_operator_is_symmetric_on_compact_support() {
        let bump = |c: f64, w: f64| {
            move |x: f64| {
                let s = (x - c) / w;
                if s.abs() < 1.0 {
                    (1.0 - s * s).powi(4)
                } else {
                    0.0
                }
            }
        };
        let err = |h: f64| {
            let f = GaussFunction::sample(10.0, h, bump(0.5, 2.0));
            let g = GaussFunction::sample(10.0, h, bump(-0.3, 1.5));
            let a = gauss_inner(&apply_drift_l(&f), &g).unwrap();
            let b = gauss_inner(&f, &apply_drift_l(&g)).unwrap();
            (a - b).abs()
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e2 < 1e-5, "{e2}");
        assert!(e1 / e2 > 3.0 || e2 < 1e-12, "{e1} {e2}");
    }

    #[test]
    fn projection_normalization() {
        let q = grid_fn(|x| x * x - 2.0);
        let c = project_modes(&q);
        assert!((c.a - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(c.remainder_norm_h < 1e-10);
        let lin = project_modes(&grid_fn(|x| x));
        assert!(lin.a.abs() < 1e-14 && (lin.c1 - 1.0).abs() < 1e-12);
        let one = project_modes(&grid_fn(|_| 1.0));
        assert!(one.a.abs() < 1e-13 && (one.c0 - 1.0).abs() < 1e-12);
        let mix = grid_fn(|x| 0.3 - 1.2 * x + 0.7 * (x * x - 2.0));
        let c = project_modes(&mix);
        let rec = reconstruct(&c, &mix);
        for (a, b) in rec.values.iter().zip(&mix.values) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn selftest_passes_at_defaults() {
        for r in moment_selftest(DEFAULT_X, DEFAULT_DXI) {
            assert!(r.pass(), "{} rel error {}", r.name, r.rel_error);
        }
    }

    #[test]
    fn truncation_invariant_at_default_radius() {
        let x: f64 = DEFAULT_X;
        assert!(weight(x) * (1.0 + x.powi(10)) < 1e-12);
        let a = gauss_inner(&grid_fn(|v| v.powi(4)), &grid_fn(|_| 1.0)).unwrap();
        let wide = GaussFunction::sample(2.0 * x, DEFAULT_DXI, |v| v.powi(4));
        let one = GaussFunction::sample(2.0 * x, DEFAULT_DXI, |_| 1.0);
        let b = gauss_inner(&wide, &one).unwrap();
        assert!((a - b).abs() / b < 1e-10);
    }

    #[test]
    fn window_norm_examples() {
        let sp = PI.sqrt();
        let dt = 0.01;
        let taus: Vec<f64> = (0..=300).map(|k| -3.0 + k as f64 * dt).collect();
        let f = GaussFunction::sample(20.0, 0.02, |_| 1.0);
        let constant: Vec<_> = taus.iter().map(|_| f.clone()).collect();
        let w = window_norms(&taus, &constant, 0.0).unwrap();
        assert!((w.h_sq / (2.0 * sp) - 1.0).abs() < 1e-9);
        let growing: Vec<_> = taus.iter().map(|t| f.map(|_, v| v * t.exp())).collect();
        let w = window_norms(&taus, &growing, 0.0).unwrap();
        let exact = 2.0 * sp * (1.0 - (-2.0f64).exp()) / 2.0;
        assert!((w.h_sq - exact).abs() / exact < 1e-4);
        assert!(w.tau_at_max.abs() < 1e-12);
        let short: Vec<_> = constant[..50].to_vec();
        assert!(window_norms(&taus[..50], &short, 0.0).is_err());
    }

    #[test]
    fn halfline_examples() {
        let zero = HalfLine::sample(20.0, 0.01, |_| 0.0);
        let c = halfline_bound_check(&zero);
        assert!(c.pass && c.lhs == 0.0);
        let step = HalfLine::sample(20.0, 0.01, |x| if x <= 4.0 { 1.0 } else { 0.0 });
        let c = halfline_bound_check(&step);
        assert!(c.pass, "ratio {}", c.ratio());
    }

    #[test]
    fn cylindrical_examples() {
        let zero = HalfLine::sample(12.0, 0.01, |_| 0.0);
        assert!(cylindrical_poincare_check(&zero, 4.0, 5.0, 10.0, C_EMP).unwrap().pass);
        let ramp = HalfLine::sample(12.0, 0.01, |x| ((x - 4.0) / 2.0).clamp(0.0, 1.0));
        let c = cylindrical_poincare_check(&ramp, 4.0, 6.0, 10.0, C_EMP).unwrap();
        assert!(c.pass && c.ratio() < 0.5, "ratio {}", c.ratio());
        let one = HalfLine::sample(12.0, 0.01, |_| 1.0);
        let c = cylindrical_poincare_check(&one, 4.0, 5.0, 10.0, C_EMP).unwrap();
        assert!(c.ratio().is_finite());
        assert!(cylindrical_poincare_check(&one, 5.0, 4.0, 10.0, C_EMP).is_err());
        assert!(cylindrical_poincare_check(&one, 3.0, 4.0, 10.0, C_EMP).is_err());
    }
}
