use crate::error::{CoreError, Result};

/// Physical and model constants for the inflow problem.
///
/// The pressure law is `P(rho) = K rho^gamma`; `mu = 2 nu + lambda` is the
/// only viscosity combination the radial equations use, so the individual
/// coefficients are never stored. Boundary data `(rho_b, u_b)` is prescribed
/// at r = 1 and the far field is `(rho_plus, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    /// Spatial dimension n >= 2.
    pub n: u32,
    /// Adiabatic exponent gamma >= 1 (gamma = 1 is the isothermal law).
    pub gamma: f64,
    /// Pressure constant K > 0.
    pub k: f64,
    /// Viscosity mu = 2 nu + lambda > 0.
    pub mu: f64,
    /// Far-field density rho_+ > 0.
    pub rho_plus: f64,
    /// Boundary density rho_b > 0.
    pub rho_b: f64,
    /// Boundary inflow speed u_b > 0.
    pub u_b: f64,
}

/// Advisory smallness indicators. Recorded, never enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeFlags {
    /// |rho_b - rho_+| <= u_b^2.
    pub density_gap_ok: bool,
    /// m_b <= kappa, the dimensionless form of the admissibility bound
    /// u_b <= C rho_+^gamma.
    pub flux_ratio_ok: bool,
    /// m_b / kappa.
    pub flux_ratio: f64,
    /// u_b / rho_+^gamma (the raw admissibility ratio; the constant C is
    /// not pinned by the theory, so only the ratio is reported).
    pub ub_over_rho_gamma: f64,
}

impl Parameters {
    pub fn new(
        n: u32,
        gamma: f64,
        k: f64,
        mu: f64,
        rho_plus: f64,
        rho_b: f64,
        u_b: f64,
    ) -> Result<Self> {
        let p = Parameters {
            n,
            gamma,
            k,
            mu,
            rho_plus,
            rho_b,
            u_b,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CoreError::InvalidParameter(msg));
        if self.n < 2 {
            return bad(format!(
                "n = {} but the radial reduction needs n >= 2",
                self.n
            ));
        }
        if !(self.gamma >= 1.0) {
            return bad(format!("gamma = {} violates gamma >= 1", self.gamma));
        }
        if !(self.k > 0.0) {
            return bad(format!("K = {} violates K > 0", self.k));
        }
        if !(self.mu > 0.0) {
            return bad(format!("mu = {} violates mu > 0", self.mu));
        }
        if !(self.rho_plus > 0.0) {
            return bad(format!(
                "rho_plus = {} violates rho_plus > 0",
                self.rho_plus
            ));
        }
        if !(self.rho_b > 0.0) {
            return bad(format!("rho_b = {} violates rho_b > 0", self.rho_b));
        }
        if !(self.u_b > 0.0) {
            return bad(format!(
                "u_b = {} violates the inflow requirement u_b > 0",
                self.u_b
            ));
        }
        Ok(())
    }

    /// Mass flux m_b = rho_b u_b injected per unit sphere area.
    pub fn m_b(&self) -> f64 {
        self.rho_b * self.u_b
    }

    /// Far-field specific volume v_+ = 1/rho_+.
    pub fn v_plus(&self) -> f64 {
        1.0 / self.rho_plus
    }

    /// Boundary specific volume v_b = 1/rho_b.
    pub fn v_b(&self) -> f64 {
        1.0 / self.rho_b
    }

    /// Boundary deviation eta_b = v_b - v_+.
    pub fn eta_b(&self) -> f64 {
        self.v_b() - self.v_plus()
    }

    /// Relaxation rate kappa = -p'(v_+)/(n mu) = gamma K rho_+^{gamma+1}/(n mu).
    pub fn kappa(&self) -> f64 {
        self.gamma * self.k * self.rho_plus.powf(self.gamma + 1.0) / (self.n as f64 * self.mu)
    }

    /// Evaluate the advisory smallness conditions.
    pub fn regime_flags(&self) -> RegimeFlags {
        let flux_ratio = self.m_b() / self.kappa();
        RegimeFlags {
            density_gap_ok: (self.rho_b - self.rho_plus).abs() <= self.u_b * self.u_b,
            flux_ratio_ok: flux_ratio <= 1.0,
            flux_ratio,
            ub_over_rho_gamma: self.u_b / self.rho_plus.powf(self.gamma),
        }
    }
}
