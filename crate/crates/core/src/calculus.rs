//! Finite-difference and quadrature helpers on uniform radial grids.

use crate::error::{CoreError, Result};
use crate::grid::RadialField;

/// Second-order derivative: central stencil in the interior, one-sided
/// second-order stencils at both ends.
pub fn differentiate(field: &RadialField) -> Result<RadialField> {
    let n = field.len();
    if n < 3 {
        return Err(CoreError::GridTooSmall { needed: 3, got: n });
    }
    let f = field.values();
    let dr = field.grid().dr();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dr);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dr);
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dr);
    RadialField::new(field.grid().clone(), d)
}

/// Second derivative: central three-point stencil in the interior,
/// one-sided four-point second-order stencils at the ends.
pub fn second_derivative(field: &RadialField) -> Result<RadialField> {
    let n = field.len();
    if n < 4 {
        return Err(CoreError::GridTooSmall { needed: 4, got: n });
    }
    let f = field.values();
    let h2 = field.grid().dr().powi(2);
    let mut d = vec![0.0; n];
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    RadialField::new(field.grid().clone(), d)
}

/// Composite Simpson quadrature of `integral f(r) r^k dr` over the grid.
///
/// With an even number of cells this is pure Simpson; otherwise Simpson on
/// all but the last cell and trapezoid there.
pub fn integrate(field: &RadialField, k: i32) -> f64 {
    let grid = field.grid();
    let f = field.values();
    let n = f.len();
    let g = |i: usize| f[i] * grid.r(i).powi(k);
    let dr = grid.dr();
    let cells = n - 1;
    let simpson_cells = if cells.is_multiple_of(2) {
        cells
    } else {
        cells - 1
    };
    let mut total = 0.0;
    let mut i = 0;
    while i + 1 < simpson_cells {
        total += dr / 3.0 * (g(i) + 4.0 * g(i + 1) + g(i + 2));
        i += 2;
    }
    if simpson_cells < cells {
        total += dr / 2.0 * (g(n - 2) + g(n - 1));
    }
    total
}

/// Cumulative integral `I(r_i) = integral_1^{r_i} f r^k dr`, one value per
/// node. Each cell is integrated with the quadratic through the three
/// nearest nodes (O(dr^4) locally), so smooth integrands keep the solver's
/// formal order.
pub fn cumulative_integral(field: &RadialField, k: i32) -> Result<RadialField> {
    let n = field.len();
    if n < 3 {
        return Err(CoreError::GridTooSmall { needed: 3, got: n });
    }
    let grid = field.grid();
    let f = field.values();
    let g = |i: usize| f[i] * grid.r(i).powi(k);
    let dr = grid.dr();
    let mut acc = vec![0.0; n];
    // First cell from the quadratic through nodes 0,1,2.
    acc[1] = acc[0] + dr / 12.0 * (5.0 * g(0) + 8.0 * g(1) - g(2));
    for i in 1..n - 1 {
        // Cell [i, i+1] from the quadratic through nodes i-1, i, i+1.
        acc[i + 1] = acc[i] + dr / 12.0 * (-g(i - 1) + 8.0 * g(i) + 5.0 * g(i + 1));
    }
    RadialField::new(grid.clone(), acc)
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Log-log least-squares slope of |f| against r over the outer half of the
/// grid (r >= (1 + r_max)/2). Nodes where |f| underflows are skipped.
pub fn outer_loglog_slope(field: &RadialField) -> f64 {
    let grid = field.grid();
    let cut = 0.5 * (1.0 + grid.r_max());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &r) in grid.nodes().iter().enumerate() {
        let v = field.get(i).abs();
        if r >= cut && v > f64::MIN_POSITIVE * 1e10 {
            xs.push(r.ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 8 {
        return f64::NAN;
    }
    linear_fit(&xs, &ys).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    #[test]
    fn derivative_of_linear_is_exact() {
        let g = RadialGrid::new(5.0, 33).unwrap();
        let f = RadialField::from_fn(g, |r| r);
        let d = differentiate(&f).unwrap();
        for &v in d.values() {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_quadratic_is_exact_in_the_interior() {
        let g = RadialGrid::new(5.0, 33).unwrap();
        let f = RadialField::from_fn(g.clone(), |r| r * r);
        let d = differentiate(&f).unwrap();
        for i in 1..g.len() - 1 {
            assert!((d.get(i) - 2.0 * g.r(i)).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn derivative_of_sine_converges_at_second_order() {
        let g = RadialGrid::new(5.0, 1025).unwrap();
        let f = RadialField::from_fn(g.clone(), |r| r.sin());
        let d = differentiate(&f).unwrap();
        let err = g
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &r)| (d.get(i) - r.cos()).abs())
            .fold(0.0_f64, f64::max);
        // |f'''| <= 1, so the central-stencil bound is dr^2/6 and the
        // one-sided boundary stencil dr^2/3.
        let dr = g.dr();
        assert!(
            err <= dr * dr / 2.9,
            "err = {err:.3e}, dr^2 = {:.3e}",
            dr * dr
        );
    }

    #[test]
    fn simpson_handles_both_parities() {
        // f = 1, k = 0 over [1,2]: exact length.
        for n in [101usize, 102] {
            let g = RadialGrid::new(2.0, n).unwrap();
            let f = RadialField::from_fn(g, |_| 1.0);
            assert!((integrate(&f, 0) - 1.0).abs() < 1e-13);
        }
        // f = r, k = 1 over [1,2]: (8-1)/3.
        let g = RadialGrid::new(2.0, 101).unwrap();
        let f = RadialField::from_fn(g, |r| r);
        assert!((integrate(&f, 1) - 7.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_matches_closed_form_exponential_moment() {
        // integral_1^20 e^{-r} r^2 dr = 5/e - 442 e^{-20}.
        let exact = 5.0 / 1.0_f64.exp() - 442.0 * (-20.0_f64).exp();
        let g = RadialGrid::new(20.0, 2001).unwrap();
        let f = RadialField::from_fn(g, |r| (-r).exp());
        let got = integrate(&f, 2);
        assert!(
            (got - exact).abs() < 1e-10 * exact,
            "got {got:.15e}, want {exact:.15e}"
        );
    }

    #[test]
    fn differentiate_then_integrate_recovers_endpoint_difference() {
        let g = RadialGrid::new(6.0, 801).unwrap();
        let f = RadialField::from_fn(g.clone(), |r| (0.7 * r).cos() + r.sqrt());
        let d = differentiate(&f).unwrap();
        let total = integrate(&d, 0);
        let exact = f.get(g.len() - 1) - f.get(0);
        let dr = g.dr();
        assert!((total - exact).abs() < 5.0 * dr * dr);
    }

    #[test]
    fn cumulative_integral_is_exact_for_quadratics() {
        let g = RadialGrid::new(2.0, 65).unwrap();
        let f = RadialField::from_fn(g.clone(), |_| 1.0);
        // weight r^2: integral_1^r s^2 ds = (r^3 - 1)/3
        let acc = cumulative_integral(&f, 2).unwrap();
        for (i, &r) in g.nodes().iter().enumerate() {
            assert!(
                (acc.get(i) - (r.powi(3) - 1.0) / 3.0).abs() < 1e-13,
                "node {i}"
            );
        }
    }

    #[test]
    fn outer_slope_recovers_power_laws() {
        let g = RadialGrid::new(200.0, 2049).unwrap();
        let f = RadialField::from_fn(g, |r| 3.0 * r.powf(-2.0));
        let s = outer_loglog_slope(&f);
        assert!((s + 2.0).abs() < 1e-10);
    }
}
