//! Small numerical kernels shared by the modules: cubic Hermite
//! interpolation (monotone and plain), uniform-grid quadrature, root
//! bracketing, least-squares slope fits and a C∞ transition function.

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Cubic Hermite interpolation
// ---------------------------------------------------------------------------

/// Piecewise cubic Hermite interpolant on a strictly increasing abscissa.
#[derive(Debug, Clone)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    /// Interpolant with caller-supplied node slopes, used as given.
    pub fn with_slopes(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        check_abscissa(&x)?;
        if y.len() != x.len() || d.len() != x.len() {
            return Err(Error::Grid(format!("hermite: {} abscissae, {} values, {} slopes", x.len(), y.len(), d.len())));
        }
        Ok(Self { x, y, d })
    }

    /// Shape-preserving interpolant (Fritsch-Butland slopes, as in PCHIP).
    pub fn pchip(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_abscissa(&x)?;
        if y.len() != x.len() {
            return Err(Error::Grid("pchip: length mismatch".into()));
        }
        let d = pchip_slopes(&x, &y);
        Ok(Self { x, y, d })
    }

    /// Monotone cubic built from accurate finite-difference slopes, limited
    /// with the Fritsch-Carlson conditions wherever the data are monotone.
    /// Slopes are fourth order on uniform stretches, so smooth data are
    /// reproduced to O(h⁴) while monotone data never overshoot.
    pub fn monotone(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_abscissa(&x)?;
        if y.len() != x.len() {
            return Err(Error::Grid("monotone: length mismatch".into()));
        }
        let mut d = fd_slopes(&x, &y);
        limit_slopes(&x, &y, &mut d);
        Ok(Self { x, y, d })
    }

    /// Monotone interpolant with supplied slopes, limited where needed.
    pub fn monotone_with_slopes(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Result<Self> {
        check_abscissa(&x)?;
        if y.len() != x.len() || d.len() != x.len() {
            return Err(Error::Grid("monotone_with_slopes: length mismatch".into()));
        }
        limit_slopes(&x, &y, &mut d);
        Ok(Self { x, y, d })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn segment(&self, xq: f64) -> usize {
        let n = self.x.len();
        if xq <= self.x[0] {
            return 0;
        }
        if xq >= self.x[n - 1] {
            return n - 2;
        }
        // partition_point returns the first index with x > xq.
        let k = self.x.partition_point(|&v| v <= xq);
        k - 1
    }

    /// Value at `xq`; outside the node range the end cubic is extrapolated.
    pub fn eval(&self, xq: f64) -> f64 {
        let k = self.segment(xq);
        let h = self.x[k + 1] - self.x[k];
        let s = (xq - self.x[k]) / h;
        let (y0, y1, d0, d1) = (self.y[k], self.y[k + 1], self.d[k], self.d[k + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }

    /// First derivative of the interpolant.
    pub fn deriv(&self, xq: f64) -> f64 {
        let k = self.segment(xq);
        let h = self.x[k + 1] - self.x[k];
        let s = (xq - self.x[k]) / h;
        let (y0, y1, d0, d1) = (self.y[k], self.y[k + 1], self.d[k], self.d[k + 1]);
        let s2 = s * s;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1
    }
}

fn check_abscissa(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::Grid("interpolation needs at least two nodes".into()));
    }
    for w in x.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Grid(format!("abscissa not strictly increasing near {}", w[0])));
        }
    }
    Ok(())
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = del[0];
        d[1] = del[0];
        return d;
    }
    for k in 1..n - 1 {
        if del[k - 1] * del[k] <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    d[0] = pchip_end(h[0], h[1], del[0], del[1]);
    d[n - 1] = pchip_end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

fn pchip_end(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Finite-difference slope estimates: fourth-order centred where five
/// equally spaced neighbours exist, three-point Lagrange otherwise.
pub fn fd_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n == 2 {
        let s = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![s, s];
    }
    for i in 0..n {
        let uniform5 = i >= 2 && i + 2 < n && {
            let h = x[i + 1] - x[i];
            let tol = 1e-9 * h.abs();
            ((x[i + 2] - x[i + 1]) - h).abs() < tol
                && ((x[i] - x[i - 1]) - h).abs() < tol
                && ((x[i - 1] - x[i - 2]) - h).abs() < tol
        };
        if uniform5 {
            let h = x[i + 1] - x[i];
            d[i] = (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * h);
            continue;
        }
        let (a, b, c) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        d[i] = lagrange3_deriv(x[a], x[b], x[c], y[a], y[b], y[c], x[i]);
    }
    d
}

fn lagrange3_deriv(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64, xq: f64) -> f64 {
    let l0 = ((xq - x1) + (xq - x2)) / ((x0 - x1) * (x0 - x2));
    let l1 = ((xq - x0) + (xq - x2)) / ((x1 - x0) * (x1 - x2));
    let l2 = ((xq - x0) + (xq - x1)) / ((x2 - x0) * (x2 - x1));
    y0 * l0 + y1 * l1 + y2 * l2
}

/// Fritsch-Carlson limiter: on each monotone segment force slopes to share
/// the secant's sign and pull them into the circle α²+β² ≤ 9.
fn limit_slopes(x: &[f64], y: &[f64], d: &mut [f64]) {
    let n = x.len();
    for k in 0..n - 1 {
        let del = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
        if del == 0.0 {
            d[k] = 0.0;
            d[k + 1] = 0.0;
            continue;
        }
        let monotone_run =
            (k == 0 || (y[k] - y[k - 1]) * del > 0.0) && (k + 2 >= n || (y[k + 2] - y[k + 1]) * del > 0.0);
        if !monotone_run {
            continue;
        }
        if d[k] * del < 0.0 {
            d[k] = 0.0;
        }
        if d[k + 1] * del < 0.0 {
            d[k + 1] = 0.0;
        }
        let a = d[k] / del;
        let b = d[k + 1] / del;
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            d[k] = tau * a * del;
            d[k + 1] = tau * b * del;
        }
    }
}

// ---------------------------------------------------------------------------
// Quadrature on uniform grids
// ---------------------------------------------------------------------------

/// Composite Simpson rule on equally spaced samples. An odd number of
/// intervals is handled by closing with Simpson's 3/8 panel.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (y[0] + y[1]),
        3 => h / 3.0 * (y[0] + 4.0 * y[1] + y[2]),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, 0.0)
            } else {
                let m = n - 4;
                let t = 3.0 * h / 8.0 * (y[m] + 3.0 * y[m + 1] + 3.0 * y[m + 2] + y[m + 3]);
                (m, t)
            };
            let mut s = y[0] + y[even_end];
            for (i, v) in y.iter().enumerate().take(even_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            h / 3.0 * s + tail
        }
    }
}

/// Simpson weights matching [`simpson`], so that `Σ wᵢ yᵢ` equals the rule.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    for (i, wi) in w.iter_mut().enumerate() {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        *wi = simpson(&e, h);
    }
    w
}

/// Cumulative trapezoid on arbitrary abscissae, starting from zero.
pub fn cumtrapz(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in 1..x.len() {
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    out
}

/// Cumulative Hermite-corrected trapezoid using node derivatives `dy` of the
/// integrand; fourth order when `dy` is accurate.
pub fn cumtrapz_corrected(x: &[f64], y: &[f64], dy: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in 1..x.len() {
        let h = x[i] - x[i - 1];
        out[i] = out[i - 1] + 0.5 * h * (y[i] + y[i - 1]) + h * h / 12.0 * (dy[i - 1] - dy[i]);
    }
    out
}

/// Trapezoid rule on arbitrary abscissae.
pub fn trapz(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1])).sum()
}

// ---------------------------------------------------------------------------
// Roots, fits, time interpolation
// ---------------------------------------------------------------------------

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::Range(format!("no sign change on [{a}, {b}] (f = {fa}, {fb})")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < tol {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Least-squares slope of `log|y|` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&a, &b)| a > 0.0 && b != 0.0 && b.is_finite())
        .map(|(&a, &b)| (a.ln(), b.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Lagrange weights for evaluating the polynomial through `nodes` at `x`.
/// A node hit exactly gets weight one and the others zero.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&n| n == x) {
        let mut w = vec![0.0; nodes.len()];
        w[j] = 1.0;
        return w;
    }
    (0..nodes.len())
        .map(|j| nodes.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &nk)| (x - nk) / (nodes[j] - nk)).product())
        .collect()
}

/// Indices of a window of `width` consecutive nodes of the increasing
/// sequence `nodes` centred as well as possible on `x`.
pub fn stencil_window(nodes: &[f64], x: f64, width: usize) -> std::ops::Range<usize> {
    let n = nodes.len();
    let width = width.min(n);
    let k = nodes.partition_point(|&v| v <= x);
    let start = k.saturating_sub(width / 2).min(n - width);
    start..start + width
}

// ---------------------------------------------------------------------------
// Smooth transition
// ---------------------------------------------------------------------------

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn psi_prime(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp() / (x * x)
    }
}

/// C∞ monotone transition: 0 for x ≤ 0, 1 for x ≥ 1. Its derivative is a
/// smooth bump supported on [0, 1].
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = psi(x);
        a / (a + psi(1.0 - x))
    }
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        let a = psi(x);
        let b = psi(1.0 - x);
        (psi_prime(x) * b + a * psi_prime(1.0 - x)) / ((a + b) * (a + b))
    }
}

/// Centred second derivative of [`smooth_step`] by Richardson-extrapolated
/// differences of the analytic first derivative.
pub fn smooth_step_deriv2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let h = 1e-4_f64.min(0.5 * x).min(0.5 * (1.0 - x));
    let d1 = (smooth_step_deriv(x + h) - smooth_step_deriv(x - h)) / (2.0 * h);
    let h2 = 0.5 * h;
    let d2 = (smooth_step_deriv(x + h2) - smooth_step_deriv(x - h2)) / (2.0 * h2);
    (4.0 * d2 - d1) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics_with_exact_slopes() {
        let x: Vec<f64> = (0..7).map(|i| 0.3 * i as f64).collect();
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t * t;
        let df = |t: f64| -2.0 + 1.5 * t * t;
        let h = Hermite::with_slopes(x.clone(), x.iter().map(|&t| f(t)).collect(), x.iter().map(|&t| df(t)).collect())
            .unwrap();
        for q in [0.05, 0.71, 1.33, 1.79] {
            assert!((h.eval(q) - f(q)).abs() < 1e-14);
            assert!((h.deriv(q) - df(q)).abs() < 1e-13);
        }
    }

    #[test]
    fn monotone_interpolant_is_fourth_order_on_smooth_data() {
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let y: Vec<f64> = x.iter().map(|t| (-t).exp()).collect();
            let h = Hermite::monotone(x, y).unwrap();
            (0..200)
                .map(|i| {
                    let q = 0.2 + 0.6 * i as f64 / 199.0;
                    (h.eval(q) - (-q).exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let order = (err(20) / err(40)).log2();
        assert!(order > 3.5, "order {order}");
    }

    #[test]
    fn pchip_does_not_overshoot_a_step() {
        let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let y = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let h = Hermite::pchip(x, y).unwrap();
        for i in 0..=500 {
            let v = h.eval(5.0 * i as f64 / 500.0);
            assert!((-1e-15..=1.0 + 1e-15).contains(&v));
        }
    }

    #[test]
    fn simpson_is_exact_for_cubics_with_odd_and_even_interval_counts() {
        for n in [5usize, 6, 9, 10] {
            let h = 1.0 / (n - 1) as f64;
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson(&y, h) - 0.25).abs() < 1e-14, "n = {n}");
            let w = simpson_weights(n, h);
            let s: f64 = w.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert!((s - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn corrected_trapezoid_beats_plain_trapezoid() {
        let x: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let dy: Vec<f64> = x.iter().map(|t| t.cos()).collect();
        let exact = 1.0 - 2.0_f64.cos();
        let plain = cumtrapz(&x, &y)[20];
        let corr = cumtrapz_corrected(&x, &y, &dy)[20];
        assert!((corr - exact).abs() < 1e-6);
        assert!((corr - exact).abs() < 0.01 * (plain - exact).abs());
    }

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn lagrange_weights_are_exact_on_nodes_and_for_cubics() {
        let nodes = [0.0, 1.0, 2.5, 4.0];
        assert_eq!(lagrange_weights(&nodes, 2.5), vec![0.0, 0.0, 1.0, 0.0]);
        let f = |t: f64| 2.0 - t + 0.3 * t.powi(3);
        let w = lagrange_weights(&nodes, 1.7);
        let v: f64 = w.iter().zip(nodes).map(|(a, b)| a * f(b)).sum();
        assert!((v - f(1.7)).abs() < 1e-13);
    }

    #[test]
    fn smooth_step_endpoints_and_symmetry() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!((smooth_step(x) + smooth_step(1.0 - x) - 1.0).abs() < 1e-14);
            assert!(smooth_step_deriv(x) >= 0.0);
            let fd = (smooth_step(x + 1e-6) - smooth_step(x - 1e-6)) / 2e-6;
            assert!((fd - smooth_step_deriv(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn loglog_slope_recovers_power() {
        let x: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t.powf(-4.0)).collect();
        assert!((loglog_slope(&x, &y) + 4.0).abs() < 1e-12);
    }
}
