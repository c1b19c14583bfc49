//! Extremum classification of the stationary density and decay-rate
//! diagnostics on a converged profile.

use super::StationaryProfile;
use crate::error::{CoreError, Result};

/// Shape of the stationary density rho_tilde(r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    /// rho_tilde strictly decreasing up to r_star, strictly increasing past
    /// it; the global minimum sits at r_star > 1.
    InteriorMinimum { r_star: f64, rho_star: f64 },
    /// rho_tilde strictly increasing on the whole domain.
    MonotoneIncreasing,
}

/// Classify the converged density profile from the sign pattern of
/// d_r rho_tilde = -rho_tilde^2 eta_r.
///
/// A dead band of 1e-12 max|eta_r| suppresses grid noise; the extremum
/// location is recovered by quadratic interpolation through the three nodes
/// around the sign change.
pub fn classify_density_profile(profile: &StationaryProfile) -> Result<Classification> {
    let grid = profile.grid();
    let eta_r = profile.eta_r.values();
    let dead_band = 1e-12 * profile.eta_r.max_abs();

    // sign of rho_tilde_r (= -sign eta_r), with the dead band mapped to 0.
    let sign = |i: usize| -> i8 {
        let v = -eta_r[i];
        if v.abs() <= dead_band {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };

    let mut compressed: Vec<(i8, usize)> = Vec::new();
    for i in 0..eta_r.len() {
        let s = sign(i);
        if s != 0 && compressed.last().map(|&(p, _)| p) != Some(s) {
            compressed.push((s, i));
        }
    }

    match compressed.as_slice() {
        [] => Err(CoreError::ClassificationFailure(
            "eta_r vanishes identically; nothing to classify".into(),
        )),
        [(1, _)] => Ok(Classification::MonotoneIncreasing),
        [(-1, _), (1, flip)] => {
            // Bracket the crossing of g = -eta_r between the last negative
            // node before `flip` and `flip` itself.
            let hi = *flip;
            let mut lo = hi - 1;
            while lo > 0 && sign(lo) == 0 {
                lo -= 1;
            }
            let r_star = interpolate_root(grid.nodes(), eta_r, lo, hi)?;
            let rho_star = quadratic_value(grid.nodes(), profile.rho_tilde.values(), r_star);
            // The density minimum is an interior maximum of eta, and that
            // maximum must sit above the far-field value zero.
            let eta_max = profile
                .eta
                .values()
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max);
            if eta_max <= 0.0 {
                return Err(CoreError::ClassificationFailure(format!(
                    "interior minimum found but max eta = {eta_max:.3e} is not positive"
                )));
            }
            Ok(Classification::InteriorMinimum { r_star, rho_star })
        }
        other => Err(CoreError::ClassificationFailure(format!(
            "d_r rho_tilde changes sign {} times (pattern {:?}); the converged \
             profile admits at most one minimum",
            other.len().saturating_sub(1),
            other.iter().map(|&(s, _)| s).collect::<Vec<_>>()
        ))),
    }
}

/// Root of g = -eta_r between nodes lo < hi from the quadratic through
/// (lo, mid, hi) when possible, else the secant through (lo, hi).
fn interpolate_root(r: &[f64], eta_r: &[f64], lo: usize, hi: usize) -> Result<f64> {
    let g = |i: usize| -eta_r[i];
    if hi - lo == 1 && hi + 1 < r.len() {
        // Quadratic through lo, hi, hi+1 in the variable x = r - r_lo.
        let (x0, x1, x2) = (0.0, r[hi] - r[lo], r[hi + 1] - r[lo]);
        let (y0, y1, y2) = (g(lo), g(hi), g(hi + 1));
        // Divided differences.
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let c2 = (d12 - d01) / (x2 - x0);
        let c1 = d01 - c2 * (x0 + x1);
        let c0 = y0 - c1 * x0 - c2 * x0 * x0;
        if c2.abs() > 0.0 {
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                for root in [(-c1 + sq) / (2.0 * c2), (-c1 - sq) / (2.0 * c2)] {
                    if root >= x0 - 1e-12 && root <= x1 + 1e-12 {
                        return Ok(r[lo] + root);
                    }
                }
            }
        }
    }
    // Secant fallback.
    let (y0, y1) = (g(lo), g(hi));
    if (y1 - y0).abs() == 0.0 {
        return Err(CoreError::ClassificationFailure(
            "degenerate bracket around the density extremum".into(),
        ));
    }
    Ok(r[lo] + (r[hi] - r[lo]) * (-y0) / (y1 - y0))
}

/// Quadratic interpolation of a nodal field at r_query.
fn quadratic_value(r: &[f64], f: &[f64], r_query: f64) -> f64 {
    let n = r.len();
    let mut i = match r.binary_search_by(|v| v.total_cmp(&r_query)) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    };
    i = i.clamp(1, n - 2);
    let (x0, x1, x2) = (r[i - 1], r[i], r[i + 1]);
    let (y0, y1, y2) = (f[i - 1], f[i], f[i + 1]);
    let l0 = (r_query - x1) * (r_query - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (r_query - x0) * (r_query - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (r_query - x0) * (r_query - x1) / ((x2 - x0) * (x2 - x1));
    y0 * l0 + y1 * l1 + y2 * l2
}

/// Decay diagnostics of a converged profile: weighted suprema with the
/// implied constants normalized by the expected decay bounds, tail
/// slopes, and the empirical onset of tail positivity.
#[derive(Debug, Clone, Copy)]
pub struct DecayReport {
    pub sup_weighted_u: f64,
    pub sup_weighted_rho_gap: f64,
    pub sup_weighted_u_r: f64,
    pub sup_weighted_rho_r: f64,
    pub const_u: f64,
    pub const_rho_gap: f64,
    pub const_u_r: f64,
    pub const_rho_r: f64,
    pub slope_eta: f64,
    pub slope_eta_r: f64,
    pub slope_u: f64,
    /// Smallest grid radius beyond which eta > 0 at every node.
    pub r_emp_eta_positive: Option<f64>,
    /// Smallest grid radius beyond which eta_r < 0 at every node.
    pub r_emp_eta_r_negative: Option<f64>,
}

pub fn decay_report(profile: &StationaryProfile) -> DecayReport {
    let p = &profile.params;
    let grid = profile.grid();
    let n = p.n as f64;
    let rho_gap = |i: usize| profile.rho_tilde.get(i) - p.rho_plus;
    let rho_r = |i: usize| {
        let rho = profile.rho_tilde.get(i);
        -rho * rho * profile.eta_r.get(i)
    };

    let mut sup_u = 0.0_f64;
    let mut sup_rho = 0.0_f64;
    let mut sup_ur = 0.0_f64;
    let mut sup_rhor = 0.0_f64;
    for (i, &r) in grid.nodes().iter().enumerate() {
        sup_u = sup_u.max(r.powf(n - 1.0) * profile.u_tilde.get(i).abs());
        sup_rho = sup_rho.max(r.powf(2.0 * n - 2.0) * rho_gap(i).abs());
        sup_ur = sup_ur.max(r.powf(n) * profile.u_tilde_r.get(i).abs());
        sup_rhor = sup_rhor.max(r.powf(2.0 * n - 1.0) * rho_r(i).abs());
    }

    let gap = (p.rho_b - p.rho_plus).abs();
    let u_b = p.u_b;
    let rp = p.rho_plus;
    let const_u = sup_u / u_b;
    let const_rho_gap = sup_rho / (gap + rp.powf(2.0 - p.gamma) * u_b * u_b);
    let const_u_r = sup_ur / (u_b + rp.powf(p.gamma - 1.0) * gap);
    let const_rho_r = sup_rhor / (rp * rp * u_b + rp.powf(p.gamma) * gap / u_b);

    let eta = profile.eta.values();
    let eta_r = profile.eta_r.values();
    let last = grid.len() - 1;
    let suffix_start = |pred: &dyn Fn(usize) -> bool| -> Option<f64> {
        if !pred(last) {
            return None;
        }
        let mut i = last;
        while i > 0 && pred(i - 1) {
            i -= 1;
        }
        Some(grid.r(i))
    };

    DecayReport {
        sup_weighted_u: sup_u,
        sup_weighted_rho_gap: sup_rho,
        sup_weighted_u_r: sup_ur,
        sup_weighted_rho_r: sup_rhor,
        const_u,
        const_rho_gap,
        const_u_r,
        const_rho_r,
        slope_eta: profile.tail_fit.eta_slope,
        slope_eta_r: profile.tail_fit.eta_r_slope,
        slope_u: profile.tail_fit.u_slope,
        r_emp_eta_positive: suffix_start(&|i| eta[i] > 0.0),
        r_emp_eta_r_negative: suffix_start(&|i| eta_r[i] < 0.0),
    }
}
