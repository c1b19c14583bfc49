//! Mass-coordinate machinery: exact post-processing of Eulerian snapshots.
//!
//! The mass coordinate X(r,t) = -m_b t + integral_1^r rho y^{n-1} dy labels
//! each Eulerian node; all Lagrangian fields are stored on the Eulerian grid
//! under those labels, so the composition with the inverse map R(x,t) is
//! exact and every integral in dx becomes an integral in rho r^{n-1} dr.

use crate::calculus::{cumulative_integral, differentiate};
use crate::error::{CoreError, Result};
use crate::evolution::FluidState;
use crate::grid::RadialField;
use crate::io::csv_table;
use crate::params::Parameters;
use crate::pressure::{d2p_dv2, dp_dv};
use crate::stationary::StationaryProfile;

/// Lagrangian view of one snapshot.
#[derive(Debug, Clone)]
pub struct LagrangianView {
    /// Mass coordinate per Eulerian node; `x[0] = -m_b t`.
    pub x: RadialField,
    /// phi = v - v_tilde (specific volumes).
    pub phi: RadialField,
    /// psi = u - u_tilde.
    pub psi: RadialField,
    /// F = mu phi_x / v - psi / r^{n-1}.
    pub flux_f: RadialField,
    /// q = -(gamma K/mu) v^{-gamma} + (r^{n-1} u_tilde)_r / r^{n-1}
    ///     - (r^{n-1}/m_b) L_tilde.
    pub q: RadialField,
    pub r1: RadialField,
    pub r2: RadialField,
    pub boundary_x: f64,
}

/// X(r, t) by cumulative quadrature; X(1) = -m_b t exactly.
pub fn mass_coordinate(state: &FluidState, params: &Parameters) -> Result<RadialField> {
    let shift = -params.m_b() * state.t;
    let mut x = cumulative_integral(&state.rho, params.n as i32 - 1)?;
    for v in x.values_mut() {
        *v += shift;
    }
    Ok(x)
}

/// Monotone coordinate table for inverting x -> R(x, t).
pub struct CoordinateTable<'a> {
    x: RadialField,
    state: &'a FluidState,
    n: i32,
}

impl<'a> CoordinateTable<'a> {
    pub fn new(state: &'a FluidState, params: &Parameters) -> Result<Self> {
        Ok(CoordinateTable {
            x: mass_coordinate(state, params)?,
            state,
            n: params.n as i32,
        })
    }

    pub fn x(&self) -> &RadialField {
        &self.x
    }

    /// Invert the mass coordinate: bisection bracket on the table, Newton
    /// on the in-cell model (linear density), to 1e-12 in x.
    pub fn invert(&self, x_query: f64) -> Result<f64> {
        let xs = self.x.values();
        let grid = self.x.grid();
        let last = xs.len() - 1;
        if x_query < xs[0] - 1e-12 || x_query > xs[last] + 1e-12 {
            return Err(CoreError::Precondition(format!(
                "x = {x_query} outside [{}, {}]",
                xs[0], xs[last]
            )));
        }
        let mut i = match xs.binary_search_by(|v| v.total_cmp(&x_query)) {
            Ok(i) => return Ok(grid.r(i)),
            Err(i) => i,
        };
        i = i.clamp(1, last);
        let (r0, r1) = (grid.r(i - 1), grid.r(i));
        let (x0, _x1) = (xs[i - 1], xs[i]);
        let (rho0, rho1) = (self.state.rho.get(i - 1), self.state.rho.get(i));
        let dr_cell = r1 - r0;
        // In-cell model: rho linear, X(r) = x0 + integral of rho(s) s^{n-1}.
        let integrand = |r: f64| {
            let w = (r - r0) / dr_cell;
            (rho0 * (1.0 - w) + rho1 * w) * r.powi(self.n - 1)
        };
        let cell_x = |r: f64| {
            // Simpson on [r0, r]; the integrand is near-cubic, so this is
            // accurate well below the 1e-12 target.
            let m = 0.5 * (r0 + r);
            x0 + (r - r0) / 6.0 * (integrand(r0) + 4.0 * integrand(m) + integrand(r))
        };
        let tol = 1e-12 * x_query.abs().max(1.0);
        let (mut lo, mut hi) = (r0, r1);
        let mut r = 0.5 * (lo + hi);
        for _ in 0..200 {
            let fx = cell_x(r) - x_query;
            if fx.abs() <= tol {
                return Ok(r);
            }
            if fx > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let newton = r - fx / integrand(r);
            r = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Ok(r)
    }
}

/// phi = 1/rho - 1/rho_tilde and psi = u - u_tilde per node.
pub fn difference_fields(
    state: &FluidState,
    profile: &StationaryProfile,
) -> Result<(RadialField, RadialField)> {
    let grid = state.rho.grid();
    if grid.len() != profile.grid().len() {
        return Err(CoreError::GridMismatch {
            left: grid.len(),
            right: profile.grid().len(),
        });
    }
    let phi: Vec<f64> = (0..grid.len())
        .map(|i| 1.0 / state.rho.get(i) - 1.0 / profile.rho_tilde.get(i))
        .collect();
    let psi: Vec<f64> = (0..grid.len())
        .map(|i| state.u.get(i) - profile.u_tilde.get(i))
        .collect();
    Ok((
        RadialField::new(grid.clone(), phi)?,
        RadialField::new(grid.clone(), psi)?,
    ))
}

/// d/dx of a nodal field through the chain rule: f_x = f_r v r^{1-n}.
pub fn x_derivative(
    f: &RadialField,
    state: &FluidState,
    params: &Parameters,
) -> Result<RadialField> {
    let fr = differentiate(f)?;
    let grid = f.grid();
    let vals: Vec<f64> = (0..grid.len())
        .map(|i| fr.get(i) / state.rho.get(i) * grid.r(i).powi(1 - params.n as i32))
        .collect();
    RadialField::new(grid.clone(), vals)
}

/// F = mu phi_x / v - psi / r^{n-1}.
pub fn flux_f_field(
    state: &FluidState,
    profile: &StationaryProfile,
    params: &Parameters,
) -> Result<RadialField> {
    let (phi, psi) = difference_fields(state, profile)?;
    let phi_x = x_derivative(&phi, state, params)?;
    let grid = phi.grid();
    let vals: Vec<f64> = (0..grid.len())
        .map(|i| {
            let v = 1.0 / state.rho.get(i);
            params.mu * phi_x.get(i) / v - psi.get(i) * grid.r(i).powi(1 - params.n as i32)
        })
        .collect();
    RadialField::new(grid.clone(), vals)
}

/// q = -(gamma K / mu) v^{-gamma} + (r^{n-1} u_tilde)_r / r^{n-1}
///     - (r^{n-1} / m_b) L_tilde,
/// where the last term uses the stationary momentum balance
/// mu ((r^{n-1} u_tilde)_r / r^{n-1})_r = L_tilde.
pub fn coefficient_q(
    profile: &StationaryProfile,
    state: &FluidState,
    params: &Parameters,
) -> Result<RadialField> {
    let grid = profile.grid();
    let n = params.n as i32;
    let vals: Vec<f64> = (0..grid.len())
        .map(|i| {
            let r = grid.r(i);
            let v = 1.0 / state.rho.get(i);
            let geom = profile.u_tilde_r.get(i) + (n as f64 - 1.0) * profile.u_tilde.get(i) / r;
            -params.gamma * params.k / params.mu * v.powf(-params.gamma) + geom
                - r.powi(n - 1) / params.m_b() * profile.l_tilde.get(i)
        })
        .collect();
    RadialField::new(grid.clone(), vals)
}

/// R1 = (v_tilde_r u_tilde / v_tilde) phi - v_tilde_r psi and
/// R2 = (u_tilde_r u_tilde / v_tilde) phi
///      - v_tilde_r ((p'(v)-p'(v_tilde))/(v-v_tilde)) v phi - u_tilde_r psi.
/// The divided difference is replaced by its limit p''(v_tilde) when
/// |v - v_tilde| < 1e-12.
pub fn residuals_r1_r2(
    state: &FluidState,
    profile: &StationaryProfile,
    params: &Parameters,
) -> Result<(RadialField, RadialField)> {
    let (phi, psi) = difference_fields(state, profile)?;
    let grid = phi.grid();
    let mut r1 = vec![0.0; grid.len()];
    let mut r2 = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        let v = 1.0 / state.rho.get(i);
        let v_t = profile.v_tilde(i);
        let v_t_r = profile.v_tilde_r(i);
        let u_t = profile.u_tilde.get(i);
        let u_t_r = profile.u_tilde_r.get(i);
        r1[i] = v_t_r * u_t / v_t * phi.get(i) - v_t_r * psi.get(i);
        let dd = if (v - v_t).abs() < 1e-12 {
            d2p_dv2(v_t, params)
        } else {
            (dp_dv(v, params) - dp_dv(v_t, params)) / (v - v_t)
        };
        r2[i] = u_t_r * u_t / v_t * phi.get(i) - v_t_r * dd * v * phi.get(i) - u_t_r * psi.get(i);
    }
    Ok((
        RadialField::new(grid.clone(), r1)?,
        RadialField::new(grid.clone(), r2)?,
    ))
}

/// Assemble the whole view for one snapshot.
pub fn lagrangian_view(
    state: &FluidState,
    profile: &StationaryProfile,
    params: &Parameters,
) -> Result<LagrangianView> {
    let x = mass_coordinate(state, params)?;
    let (phi, psi) = difference_fields(state, profile)?;
    let flux_f = flux_f_field(state, profile, params)?;
    let q = coefficient_q(profile, state, params)?;
    let (r1, r2) = residuals_r1_r2(state, profile, params)?;
    Ok(LagrangianView {
        x,
        phi,
        psi,
        flux_f,
        q,
        r1,
        r2,
        boundary_x: -params.m_b() * state.t,
    })
}

impl LagrangianView {
    /// CSV export: columns x, r, phi, psi, F, q, R1, R2.
    pub fn to_csv(&self) -> String {
        let grid = self.x.grid();
        csv_table(
            &["x", "r", "phi", "psi", "F", "q", "R1", "R2"],
            (0..grid.len()).map(|i| {
                vec![
                    self.x.get(i),
                    grid.r(i),
                    self.phi.get(i),
                    self.psi.get(i),
                    self.flux_f.get(i),
                    self.q.get(i),
                    self.r1.get(i),
                    self.r2.get(i),
                ]
            }),
        )
    }
}
