//! Shared machinery for the stationary problem: the graded work grid, the
//! nonlocal tail integral, the forcing functional, and the exponential-kernel
//! product quadrature.
//!
//! The unknown is eta(r) = v_tilde(r) - v_+. It satisfies the first-order
//! nonlocal ODE
//!
//! ```text
//! eta_r(r) = -(n kappa / m_b) r^{n-1} eta(r) + F[eta](r),
//! F[eta](r) = m_b v_+/(2 mu) r^{1-n} + (m_b/mu) eta r^{1-n}
//!             - (n-1) m_b/mu r^{n-1} J(r) + r^{n-1}/(mu m_b) N(eta),
//! J(r)      = integral_r^inf eta(s) / s^{2n-1} ds,
//! ```
//!
//! whose integrated form is the contraction map
//!
//! ```text
//! T[eta](r) = eta_b e^{-(kappa/m_b)(r^n - 1)}
//!             + integral_1^r e^{-(kappa/m_b)(r^n - s^n)} F[eta](s) ds.
//! ```
//!
//! In the variable w = s^n the kernel is exactly exponential with rate
//! a = kappa/m_b, so each cell integrates a linear interpolant times an
//! exponential in closed form. For small m_b the kernel has a boundary layer
//! of width m_b/kappa in w, thinner than the output grid spacing at the
//! default resolution; the solver therefore refines internally (layer zone
//! plus a logarithmically graded far zone) and restricts to the output nodes
//! at the end.

use crate::error::{CoreError, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::params::Parameters;
use crate::pressure::pressure_remainder;
use std::sync::Arc;

/// Points per kernel e-fold in the layer zone of the work grid.
const LAYER_POINTS_PER_EFOLD: f64 = 4096.0;
/// Extent of the layer zone in kernel e-folds.
const LAYER_EFOLDS: f64 = 36.0;
/// Relative step of the far zone (dw / w).
const FAR_RELATIVE_STEP: f64 = 2.5e-4;

/// Internal solver grid in the variable w = r^n. Contains every output node
/// plus refinement points.
pub(crate) struct WorkGrid {
    pub n: u32,
    pub w: Vec<f64>,
    pub r: Vec<f64>,
    /// r^{n-1} per node.
    pub s: Vec<f64>,
    /// Index of each output-grid node inside `w`.
    pub out_idx: Vec<usize>,
    pub r_max: f64,
}

impl WorkGrid {
    pub fn build(params: &Parameters, grid: &RadialGrid) -> Self {
        let n = params.n;
        let a = params.kappa() / params.m_b();
        let layer_end = 1.0 + LAYER_EFOLDS / a;
        let layer_h = 1.0 / (a * LAYER_POINTS_PER_EFOLD);

        let out_w: Vec<f64> = grid.nodes().iter().map(|&r| r.powi(n as i32)).collect();
        let mut w = Vec::new();
        let mut out_idx = Vec::with_capacity(out_w.len());
        for (k, &w_right) in out_w.iter().enumerate() {
            if k == 0 {
                w.push(w_right);
                out_idx.push(0);
                continue;
            }
            let w_left = out_w[k - 1];
            let mut target = FAR_RELATIVE_STEP * w_left;
            if w_left < layer_end {
                target = target.min(layer_h);
            }
            let cell = w_right - w_left;
            let m = (cell / target).ceil().max(1.0) as usize;
            for j in 1..m {
                w.push(w_left + cell * j as f64 / m as f64);
            }
            w.push(w_right);
            out_idx.push(w.len() - 1);
        }

        let inv_n = 1.0 / n as f64;
        let r: Vec<f64> = w
            .iter()
            .map(|&wv| match n {
                2 => wv.sqrt(),
                3 => wv.cbrt(),
                _ => wv.powf(inv_n),
            })
            .collect();
        let s: Vec<f64> = r.iter().map(|&rv| rv.powi(n as i32 - 1)).collect();
        WorkGrid {
            n,
            w,
            r,
            s,
            out_idx,
            r_max: grid.r_max(),
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }
}

/// Median of a slice (not necessarily sorted).
fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let m = values.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Fit the tail amplitude A of eta ~ A r^{-2(n-1)} as the median of
/// r^{2(n-1)} eta over the last decade of the grid, after checking the field
/// actually decays there.
pub(crate) fn tail_amplitude(r: &[f64], eta: &[f64], n: u32, r_max: f64) -> Result<f64> {
    let decade = r_max / 10.0;
    let mut weighted = Vec::new();
    let mut sup_outer = 0.0_f64;
    let mut sup_inner = 0.0_f64;
    let p = 2 * (n as i32 - 1);
    for (&rv, &ev) in r.iter().zip(eta) {
        if rv >= decade {
            weighted.push(rv.powi(p) * ev);
            sup_outer = sup_outer.max(ev.abs());
        } else if rv >= decade / 10.0 {
            sup_inner = sup_inner.max(ev.abs());
        }
    }
    if weighted.len() < 4 {
        return Err(CoreError::TailFit(
            "too few nodes in the last decade".into(),
        ));
    }
    let a = median(&mut weighted);
    if !a.is_finite() {
        return Err(CoreError::TailFit("non-finite tail samples".into()));
    }
    if sup_outer > 1.5 * sup_inner && sup_outer > 1e-14 {
        return Err(CoreError::TailFit(format!(
            "field grows toward r_max (sup {sup_outer:.3e} outer vs {sup_inner:.3e} inner)"
        )));
    }
    Ok(a)
}

/// J(r) = integral_r^inf eta(s)/s^{2n-1} ds at every node of `wg`, by
/// backward trapezoid in w plus the analytic closure
/// A r_max^{4-4n}/(4n-4) for the fitted tail.
pub(crate) fn tail_integral(wg: &WorkGrid, eta: &[f64], params: &Parameters) -> Result<Vec<f64>> {
    let n = wg.n;
    let m = wg.len();
    let amp = tail_amplitude(&wg.r, eta, n, wg.r_max)?;
    let closure = amp * wg.r_max.powi(4 - 4 * (n as i32)) / (4.0 * n as f64 - 4.0);
    // eta/s^{2n-1} ds = eta / (n r^{3n-2}) dw
    let q = |i: usize| eta[i] * wg.r[i].powi(2 - 3 * (n as i32)) / (n as f64);
    let mut j = vec![0.0; m];
    j[m - 1] = closure;
    for i in (0..m - 1).rev() {
        let h = wg.w[i + 1] - wg.w[i];
        j[i] = j[i + 1] + 0.5 * h * (q(i) + q(i + 1));
    }
    let _ = params; // parameters only pin n and the grid here
    Ok(j)
}

/// F[eta] at every node of `wg`, given the tail integral J.
pub(crate) fn forcing(
    wg: &WorkGrid,
    eta: &[f64],
    j: &[f64],
    params: &Parameters,
) -> Result<Vec<f64>> {
    let m_b = params.m_b();
    let mu = params.mu;
    let v_plus = params.v_plus();
    let nm1 = params.n as f64 - 1.0;
    let mut f = vec![0.0; wg.len()];
    for i in 0..wg.len() {
        let s = wg.s[i];
        let remainder = pressure_remainder(eta[i], params).map_err(|_| {
            CoreError::RegimeViolation(format!(
                "specific volume v_+ + eta = {} left (0, inf) at r = {}",
                v_plus + eta[i],
                wg.r[i]
            ))
        })?;
        f[i] = m_b * v_plus / (2.0 * mu) / s + m_b / mu * eta[i] / s - nm1 * m_b / mu * s * j[i]
            + s / (mu * m_b) * remainder;
    }
    Ok(f)
}

/// integral_0^h e^{a(tau - h)} (g0 + slope * tau) dtau with slope = (g1-g0)/h.
/// Exact for the linear interpolant; the small-z branch avoids cancellation.
#[inline]
pub(crate) fn cell_convolution(a: f64, h: f64, g0: f64, g1: f64) -> f64 {
    let z = a * h;
    let slope = (g1 - g0) / h;
    let em1 = -(-z).exp_m1(); // 1 - e^{-z}
    let i0 = em1 / a;
    let i1 = if z < 1e-4 {
        h * h * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0)
    } else {
        (h - i0) / a
    };
    g0 * i0 + slope * i1
}

/// One application of the contraction map on the work grid:
/// out_i = eta_b e^{-a (w_i - 1)} + integral_1^{w_i} e^{a(w - w_i)} G(w) dw,
/// with G the linear interpolant of the samples `g` and the convolution
/// accumulated by the exact exponential semigroup recurrence.
pub(crate) fn apply_map(wg: &WorkGrid, a: f64, eta_b: f64, g: &[f64]) -> Vec<f64> {
    let m = wg.len();
    let mut out = vec![0.0; m];
    out[0] = eta_b;
    let mut particular = 0.0;
    for i in 0..m - 1 {
        let h = wg.w[i + 1] - wg.w[i];
        particular = particular * (-a * h).exp() + cell_convolution(a, h, g[i], g[i + 1]);
        out[i + 1] = eta_b * (-a * (wg.w[i + 1] - 1.0)).exp() + particular;
    }
    out
}

/// `F[eta]` on the field's own grid (no internal refinement): the public
/// operator form. The improper tail of J uses the fitted power law.
pub fn apply_forcing(eta: &RadialField, params: &Parameters) -> Result<RadialField> {
    let grid = eta.grid().clone();
    let wg = passthrough_workgrid(params.n, &grid);
    let j = tail_integral(&wg, eta.values(), params)?;
    let f = forcing(&wg, eta.values(), &j, params)?;
    RadialField::new(grid, f)
}

/// One application of the contraction map on the field's own grid.
/// `T[eta](1) = eta_b` exactly.
pub fn fixed_point_map(eta: &RadialField, params: &Parameters) -> Result<RadialField> {
    let grid = eta.grid().clone();
    let wg = passthrough_workgrid(params.n, &grid);
    let j = tail_integral(&wg, eta.values(), params)?;
    let f = forcing(&wg, eta.values(), &j, params)?;
    let g: Vec<f64> = f
        .iter()
        .zip(&wg.s)
        .map(|(fv, s)| fv / (params.n as f64 * s))
        .collect();
    let a = params.kappa() / params.m_b();
    let out = apply_map(&wg, a, params.eta_b(), &g);
    RadialField::new(grid, out)
}

/// Work grid whose nodes are exactly the output nodes (used by the public
/// per-field operators and the kernel-bound check).
pub(crate) fn passthrough_workgrid(n: u32, grid: &Arc<RadialGrid>) -> WorkGrid {
    let w: Vec<f64> = grid.nodes().iter().map(|&r| r.powi(n as i32)).collect();
    let r = grid.nodes().to_vec();
    let s: Vec<f64> = r.iter().map(|&rv| rv.powi(n as i32 - 1)).collect();
    let out_idx = (0..w.len()).collect();
    WorkGrid {
        n,
        w,
        r,
        s,
        out_idx,
        r_max: grid.r_max(),
    }
}

/// Report of the weighted kernel bound
/// r^l |integral_1^r e^{-(kappa/m_b)(r^n - s^n)} f(s) ds|
///   <= C rho_+^{-gamma} u_b sup_r |r^l f(r)|.
#[derive(Debug, Clone, Copy)]
pub struct KernelBoundReport {
    /// sup_r of (left side) / (rho_+^{-gamma} u_b sup |r^l f|).
    pub ratio: f64,
    pub lhs_sup: f64,
    pub weighted_f_sup: f64,
}

/// Evaluate the kernel-bound ratio for a weight exponent 1 <= l <= 3n-3.
pub fn check_weighted_kernel_bound(
    f: &RadialField,
    ell: u32,
    params: &Parameters,
) -> Result<KernelBoundReport> {
    if ell < 1 || ell > 3 * params.n - 3 {
        return Err(CoreError::Precondition(format!(
            "weight exponent l = {ell} outside 1..={}",
            3 * params.n - 3
        )));
    }
    let wg = passthrough_workgrid(params.n, f.grid());
    let g: Vec<f64> = f
        .values()
        .iter()
        .zip(&wg.s)
        .map(|(fv, s)| fv / (params.n as f64 * s))
        .collect();
    let a = params.kappa() / params.m_b();
    // Same recurrence as apply_map without the boundary term.
    let m = wg.len();
    let mut conv = vec![0.0; m];
    let mut particular = 0.0;
    for i in 0..m - 1 {
        let h = wg.w[i + 1] - wg.w[i];
        particular = particular * (-a * h).exp() + cell_convolution(a, h, g[i], g[i + 1]);
        conv[i + 1] = particular;
    }
    let lhs_sup = conv
        .iter()
        .zip(&wg.r)
        .fold(0.0_f64, |acc, (c, r)| acc.max(r.powi(ell as i32) * c.abs()));
    let weighted_f_sup = f.weighted_sup(ell as f64);
    let denom = params.rho_plus.powf(-params.gamma) * params.u_b * weighted_f_sup;
    let ratio = if denom > 0.0 { lhs_sup / denom } else { 0.0 };
    Ok(KernelBoundReport {
        ratio,
        lhs_sup,
        weighted_f_sup,
    })
}
