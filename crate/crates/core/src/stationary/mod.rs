//! Stationary profile construction, classification, and decay diagnostics.
//!
//! Two interchangeable construction methods live behind the
//! [`StationaryMethod`] trait and are selected by name through
//! [`lookup_method`]: `"fixed-point"` iterates the contraction map on the
//! representation formula, `"shooting"` integrates the same nonlocal ODE as
//! an initial-value problem with a secant shot on the tail integral. They
//! serve as mutual oracles.

mod diagnostics;
mod fixed_point;
pub(crate) mod operator;
mod registry;
mod shooting;

pub use diagnostics::{classify_density_profile, decay_report, Classification, DecayReport};
pub use operator::{
    apply_forcing, check_weighted_kernel_bound, fixed_point_map, KernelBoundReport,
};
pub use registry::{lookup_method, methods, StationaryMethod};

use crate::calculus::{linear_fit, outer_loglog_slope};
use crate::error::Result;
use crate::grid::{RadialField, RadialGrid};
use crate::io::csv_table;
use crate::params::{Parameters, RegimeFlags};
use crate::pressure::p_of_v;
use std::sync::Arc;

/// Solver knobs shared by both construction methods.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Stopping tolerance on the X-norm distance between iterates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// Log-log tail fit of a stationary field over the outer half-grid.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub eta_slope: f64,
    pub eta_amplitude: f64,
    pub eta_r_slope: f64,
    pub eta_r_amplitude: f64,
    pub u_slope: f64,
    pub u_amplitude: f64,
}

/// Status of the a-priori bounds on the converged profile. Advisory: a
/// violated bound is recorded, not fatal.
#[derive(Debug, Clone, Copy)]
pub struct ProfileRegime {
    /// sup_r r^{n-1} |eta| <= v_+/4.
    pub ball_ok: bool,
    /// 3/4 v_+ <= v_+ + eta <= 5/4 v_+ at every node.
    pub volume_band_ok: bool,
    /// Parameter-level smallness indicators.
    pub flags: RegimeFlags,
}

/// The stationary solution on the output grid.
#[derive(Debug, Clone)]
pub struct StationaryProfile {
    pub params: Parameters,
    /// eta = v_tilde - v_+.
    pub eta: RadialField,
    pub eta_r: RadialField,
    /// rho_tilde = 1/(v_+ + eta).
    pub rho_tilde: RadialField,
    /// u_tilde = m_b r^{1-n} / rho_tilde (constant mass flux).
    pub u_tilde: RadialField,
    pub u_tilde_r: RadialField,
    /// L_tilde = rho_tilde u_tilde d_r u_tilde + d_r P(rho_tilde).
    pub l_tilde: RadialField,
    pub tail_fit: TailFit,
    pub regime: ProfileRegime,
}

/// Convergence record of a stationary solve.
#[derive(Debug, Clone)]
pub struct IterationReport {
    pub iterations: usize,
    /// Per-sweep X-norm distance between successive iterates (fixed point)
    /// or shooting-residual magnitude per shot (shooting).
    pub distances: Vec<f64>,
    /// Median ratio of consecutive distances; None when fewer than two
    /// sweeps were needed.
    pub contraction_ratio: Option<f64>,
    /// Self-consistency residual of the first-order equation on the result.
    pub final_residual: f64,
}

impl IterationReport {
    pub(crate) fn contraction_from(distances: &[f64]) -> Option<f64> {
        let mut ratios: Vec<f64> = distances
            .windows(2)
            .filter(|w| w[0] > 0.0 && w[1].is_finite())
            .map(|w| w[1] / w[0])
            .collect();
        if ratios.is_empty() {
            return None;
        }
        ratios.sort_by(|a, b| a.total_cmp(b));
        Some(ratios[ratios.len() / 2])
    }
}

impl StationaryProfile {
    /// Assemble the derived fields from (eta, eta_r) samples on the output
    /// grid.
    pub(crate) fn from_eta(
        grid: Arc<RadialGrid>,
        params: &Parameters,
        eta: Vec<f64>,
        eta_r: Vec<f64>,
    ) -> Result<Self> {
        let n = params.n as i32;
        let v_plus = params.v_plus();
        let m_b = params.m_b();
        let npts = grid.len();
        let mut rho = vec![0.0; npts];
        let mut u = vec![0.0; npts];
        let mut u_r = vec![0.0; npts];
        let mut l = vec![0.0; npts];
        for i in 0..npts {
            let r = grid.r(i);
            let v = v_plus + eta[i];
            rho[i] = 1.0 / v;
            // u_tilde = m_b r^{1-n} v, so the flux identity r^{n-1} rho u = m_b
            // holds to roundoff by construction.
            u[i] = m_b * r.powi(1 - n) * v;
            u_r[i] = m_b * ((1 - n) as f64 * r.powi(-n) * v + r.powi(1 - n) * eta_r[i]);
            let rho_r = -rho[i] * rho[i] * eta_r[i];
            // d_r P(rho) = P'(rho) rho_r = gamma K rho^{gamma-1} rho_r
            let dp_drho = params.gamma * params.k * rho[i].powf(params.gamma - 1.0);
            l[i] = rho[i] * u[i] * u_r[i] + dp_drho * rho_r;
        }
        // The boundary identities rho(1) = rho_b and u(1) = u_b are exact,
        // not just exact up to the eta_b = v_b - v_+ rounding.
        rho[0] = params.rho_b;
        u[0] = params.u_b;

        let eta_f = RadialField::new(grid.clone(), eta)?;
        let eta_r_f = RadialField::new(grid.clone(), eta_r)?;
        let u_f = RadialField::new(grid.clone(), u)?;

        let fit_of = |f: &RadialField| {
            let slope = outer_loglog_slope(f);
            let cut = 0.5 * (1.0 + grid.r_max());
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (i, &r) in grid.nodes().iter().enumerate() {
                let v = f.get(i).abs();
                if r >= cut && v > f64::MIN_POSITIVE * 1e10 {
                    xs.push(r.ln());
                    ys.push(v.ln());
                }
            }
            let amp = if xs.len() >= 8 {
                linear_fit(&xs, &ys).1.exp()
            } else {
                f64::NAN
            };
            (slope, amp)
        };
        let (eta_slope, eta_amplitude) = fit_of(&eta_f);
        let (eta_r_slope, eta_r_amplitude) = fit_of(&eta_r_f);
        let (u_slope, u_amplitude) = fit_of(&u_f);

        let ball_ok = eta_f.weighted_sup(params.n as f64 - 1.0) <= v_plus / 4.0;
        let volume_band_ok = eta_f
            .values()
            .iter()
            .all(|&e| v_plus + e >= 0.75 * v_plus && v_plus + e <= 1.25 * v_plus);

        Ok(StationaryProfile {
            params: *params,
            eta: eta_f,
            eta_r: eta_r_f,
            rho_tilde: RadialField::new(grid.clone(), rho)?,
            u_tilde: u_f,
            u_tilde_r: RadialField::new(grid.clone(), u_r)?,
            l_tilde: RadialField::new(grid, l)?,
            tail_fit: TailFit {
                eta_slope,
                eta_amplitude,
                eta_r_slope,
                eta_r_amplitude,
                u_slope,
                u_amplitude,
            },
            regime: ProfileRegime {
                ball_ok,
                volume_band_ok,
                flags: params.regime_flags(),
            },
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.eta.grid()
    }

    /// Specific volume v_tilde = v_+ + eta at node i.
    pub fn v_tilde(&self, i: usize) -> f64 {
        self.params.v_plus() + self.eta.get(i)
    }

    /// d_r v_tilde = eta_r at node i.
    pub fn v_tilde_r(&self, i: usize) -> f64 {
        self.eta_r.get(i)
    }

    /// p(v_tilde) at node i.
    pub fn p_tilde(&self, i: usize) -> f64 {
        p_of_v(self.v_tilde(i), &self.params)
    }

    /// CSV export: columns r, eta, eta_r, rho_tilde, u_tilde, u_tilde_r,
    /// L_tilde; 17 significant digits.
    pub fn to_csv(&self) -> String {
        let grid = self.grid();
        csv_table(
            &[
                "r",
                "eta",
                "eta_r",
                "rho_tilde",
                "u_tilde",
                "u_tilde_r",
                "L_tilde",
            ],
            (0..grid.len()).map(|i| {
                vec![
                    grid.r(i),
                    self.eta.get(i),
                    self.eta_r.get(i),
                    self.rho_tilde.get(i),
                    self.u_tilde.get(i),
                    self.u_tilde_r.get(i),
                    self.l_tilde.get(i),
                ]
            }),
        )
    }
}

/// Solve with the default (fixed-point) method.
pub fn solve_stationary(
    params: &Parameters,
    grid: &Arc<RadialGrid>,
    opts: &SolveOptions,
) -> Result<(StationaryProfile, IterationReport)> {
    fixed_point::solve(params, grid, opts)
}

/// Solve with the independent shooting integration of the nonlocal ODE.
pub fn solve_by_shooting(
    params: &Parameters,
    grid: &Arc<RadialGrid>,
    opts: &SolveOptions,
) -> Result<(StationaryProfile, IterationReport)> {
    shooting::solve(params, grid, opts)
}

/// Pointwise residual of the integrated first-order equation at eta == 0:
/// nonzero whenever u_b > 0, which rules out the trivial solution.
pub fn trivial_solution_residual(params: &Parameters, r: f64) -> f64 {
    params.m_b() * params.v_plus() / (2.0 * params.mu) * r.powi(1 - params.n as i32)
}
