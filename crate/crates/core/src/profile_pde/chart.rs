//! Radial chart near a tip.
//!
//! Close to a tip the profile is described by `U(r) = F_z²` as a function
//! of the radius `r = F`. `U` solves
//!
//! ```text
//! U_t = U U_rr − ½ U_r² + r⁻² (1 − U)(r U_r + 2U),   U(0, t) = 1,
//! ```
//!
//! which stays regular at the tip. The arc length from the tip to radius
//! `r` is `Z(r) = ∫₀^r U^{-1/2}`.

use crate::error::{Error, Result};
use crate::numerics::{cumtrapz_corrected, Hermite};

/// `U` sampled at `r_j = j·dr`, `j = 0..=M`, with `u[0] = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TipChart {
    pub dr: f64,
    pub u: Vec<f64>,
}

/// Arc length from the tip as a function of radius, and its inverse.
#[derive(Debug, Clone)]
pub struct DepthMap {
    forward: Hermite,
    inverse: Hermite,
}

impl DepthMap {
    /// `Z(r)`.
    pub fn depth(&self, r: f64) -> f64 {
        self.forward.eval(r)
    }

    /// Radius at arc length `z` from the tip.
    pub fn radius(&self, z: f64) -> f64 {
        self.inverse.eval(z)
    }

    /// Total arc length covered by the chart.
    pub fn max_depth(&self) -> f64 {
        self.forward.y()[self.forward.y().len() - 1]
    }
}

impl TipChart {
    /// Sample `u(r)` on `[0, r_max]`; `u(0)` is forced to one.
    pub fn from_fn<F: Fn(f64) -> f64>(dr: f64, r_max: f64, u: F) -> Self {
        let m = (r_max / dr).round().max(4.0) as usize;
        let mut vals: Vec<f64> = (0..=m).map(|j| u(j as f64 * dr)).collect();
        vals[0] = 1.0;
        Self { dr, u: vals }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn r(&self, j: usize) -> f64 {
        j as f64 * self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.u.len() - 1)
    }

    /// Centred `U_r`; zero at the axis by evenness, one-sided at the end.
    pub fn u_r(&self) -> Vec<f64> {
        let m = self.u.len() - 1;
        let h = self.dr;
        let u = &self.u;
        let mut d = vec![0.0; m + 1];
        for j in 1..m {
            d[j] = (u[j + 1] - u[j - 1]) / (2.0 * h);
        }
        d[m] = (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * h);
        d
    }

    /// Cubic Hermite interpolant of `U` using the centred slopes.
    pub fn interpolant(&self) -> Hermite {
        let xs: Vec<f64> = (0..self.u.len()).map(|j| self.r(j)).collect();
        Hermite::with_slopes(xs, self.u.clone(), self.u_r()).expect("uniform chart grid")
    }

    /// Interpolated `U(r)`.
    pub fn u_at(&self, r: f64) -> f64 {
        self.interpolant().eval(r.abs())
    }

    /// Build `Z(r)` and its inverse.
    pub fn depth_map(&self) -> Result<DepthMap> {
        if let Some(j) = self.u.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Degenerate(format!("tip chart has U = {} <= 0 at r = {}", self.u[j], self.r(j))));
        }
        let xs: Vec<f64> = (0..self.u.len()).map(|j| self.r(j)).collect();
        let ur = self.u_r();
        let g: Vec<f64> = self.u.iter().map(|v| 1.0 / v.sqrt()).collect();
        let dg: Vec<f64> = self.u.iter().zip(&ur).map(|(v, d)| -0.5 * d / (v * v.sqrt())).collect();
        let z = cumtrapz_corrected(&xs, &g, &dg);
        let sqrt_u: Vec<f64> = self.u.iter().map(|v| v.sqrt()).collect();
        let forward = Hermite::with_slopes(xs.clone(), z.clone(), g)?;
        let inverse = Hermite::with_slopes(z, xs, sqrt_u)?;
        Ok(DepthMap { forward, inverse })
    }

    /// `U_t` at interior nodes `1..M`; entries 0 and `M` are zero.
    pub fn rhs(&self) -> Vec<f64> {
        let m = self.u.len() - 1;
        let h = self.dr;
        let u = &self.u;
        let mut out = vec![0.0; m + 1];
        for j in 1..m {
            let r = self.r(j);
            let ur = (u[j + 1] - u[j - 1]) / (2.0 * h);
            let urr = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
            out[j] = u[j] * urr - 0.5 * ur * ur + (1.0 - u[j]) / (r * r) * (r * ur + 2.0 * u[j]);
        }
        out
    }

    /// Scalar curvature `2(1 − U)/r² − 2U_r/r` at the nodes `j ≥ 1`,
    /// extrapolated to the axis from the first two nodes (R is even in r).
    pub fn tip_curvature(&self) -> f64 {
        let ur = self.u_r();
        let rc = |j: usize| {
            let r = self.r(j);
            2.0 * (1.0 - self.u[j]) / (r * r) - 2.0 * ur[j] / r
        };
        (4.0 * rc(1) - rc(2)) / 3.0
    }
}
