//! Isentropic pressure law in both density and specific-volume form.

use crate::error::{CoreError, Result};
use crate::params::Parameters;

/// P(rho) = K rho^gamma.
pub fn pressure_of_density(rho: f64, params: &Parameters) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(CoreError::Domain(format!(
            "pressure needs rho > 0, got {rho}"
        )));
    }
    Ok(params.k * rho.powf(params.gamma))
}

/// p(v) = K v^{-gamma} together with dp/dv = -gamma K v^{-gamma-1} < 0.
pub fn pressure_of_volume(v: f64, params: &Parameters) -> Result<(f64, f64)> {
    if !(v > 0.0) {
        return Err(CoreError::Domain(format!("pressure needs v > 0, got {v}")));
    }
    let p = params.k * v.powf(-params.gamma);
    let dp_dv = -params.gamma * p / v;
    Ok((p, dp_dv))
}

/// p(v) without the domain check, for hot loops that guarantee v > 0.
#[inline]
pub(crate) fn p_of_v(v: f64, params: &Parameters) -> f64 {
    params.k * v.powf(-params.gamma)
}

/// dp/dv for v > 0.
#[inline]
pub(crate) fn dp_dv(v: f64, params: &Parameters) -> f64 {
    -params.gamma * params.k * v.powf(-params.gamma - 1.0)
}

/// d2p/dv2 for v > 0.
#[inline]
pub(crate) fn d2p_dv2(v: f64, params: &Parameters) -> f64 {
    params.gamma * (params.gamma + 1.0) * params.k * v.powf(-params.gamma - 2.0)
}

/// Sound speed c = sqrt(P'(rho)) = sqrt(gamma K rho^{gamma-1}).
#[inline]
pub fn sound_speed(rho: f64, params: &Parameters) -> f64 {
    (params.gamma * params.k * rho.powf(params.gamma - 1.0)).sqrt()
}

/// Quadratic pressure remainder
/// N(eta) = p(v_+ + eta) - p(v_+) - p'(v_+) eta.
///
/// For |eta| below one percent of v_+ the direct form loses ~(v_+/eta)^2 in
/// relative accuracy to cancellation, so the binomial series of
/// (1 + eta/v_+)^{-gamma} minus its first two terms is summed instead.
pub fn pressure_remainder(eta: f64, params: &Parameters) -> Result<f64> {
    let v_plus = params.v_plus();
    let v = v_plus + eta;
    if !(v > 0.0) {
        return Err(CoreError::Domain(format!(
            "specific volume v_+ + eta = {v} must stay positive"
        )));
    }
    let x = eta / v_plus;
    if x.abs() < 1e-2 {
        let p_plus = p_of_v(v_plus, params);
        // (1+x)^{-gamma} = sum c_k x^k, c_0 = 1, c_k = c_{k-1} (-gamma-k+1)/k;
        // the remainder drops the k = 0, 1 terms.
        let mut c = -params.gamma; // c_1
        let mut xk = x; // x^1
        let mut sum = 0.0;
        for k in 2..60u32 {
            c *= (-params.gamma - (k as f64 - 1.0)) / k as f64;
            xk *= x;
            let term = c * xk;
            sum += term;
            if term.abs() <= f64::EPSILON * sum.abs() {
                break;
            }
        }
        Ok(p_plus * sum)
    } else {
        let p = p_of_v(v, params);
        let p_plus = p_of_v(v_plus, params);
        Ok(p - p_plus - dp_dv(v_plus, params) * eta)
    }
}

/// N'(eta) = p'(v_+ + eta) - p'(v_+), with the same series treatment.
pub(crate) fn pressure_remainder_slope(eta: f64, params: &Parameters) -> f64 {
    let v_plus = params.v_plus();
    let x = eta / v_plus;
    if x.abs() < 1e-2 {
        // p'(v_+ (1+x)) - p'(v_+) = p'(v_+) [ (1+x)^{-gamma-1} - 1 ]
        let g = params.gamma + 1.0;
        let mut c = 1.0;
        let mut xk = 1.0;
        let mut sum = 0.0;
        for k in 1..60u32 {
            c *= (-g - (k as f64 - 1.0)) / k as f64;
            xk *= x;
            let term = c * xk;
            sum += term;
            if term.abs() <= f64::EPSILON * sum.abs() {
                break;
            }
        }
        dp_dv(v_plus, params) * sum
    } else {
        dp_dv(v_plus + eta, params) - dp_dv(v_plus, params)
    }
}
