#![allow(clippy::excessive_precision)] // pins are recorded at full printed precision

//! Frozen regression values recorded from the first validated build.
//! Same-binary runs reproduce them bitwise; the tolerances only absorb
//! cross-platform libm differences.

use nsinflow_core::energy::norm_ne;
use nsinflow_core::evolution::{build_initial_data, cfl_dt, EvolutionSolver, PerturbationSpec};
use nsinflow_core::grid::{RadialField, RadialGrid};
use nsinflow_core::lagrangian::{coefficient_q, difference_fields, mass_coordinate};
use nsinflow_core::params::Parameters;
use nsinflow_core::stationary::{
    check_weighted_kernel_bound, solve_stationary, SolveOptions, StationaryProfile,
};
use std::sync::Arc;

const REL: f64 = 1e-9;

fn close(got: f64, want: f64, label: &str) {
    assert!(
        (got - want).abs() <= REL * want.abs().max(1e-12),
        "{label}: {got:.17e} vs frozen {want:.17e}"
    );
}

fn setup() -> (Parameters, Arc<RadialGrid>, StationaryProfile) {
    let u_b = 0.05;
    let params = Parameters::new(2, 2.0, 1.0, 1.0, 1.0, 1.0 + u_b * u_b, u_b).unwrap();
    let grid = RadialGrid::new(200.0, 1025).unwrap();
    let (profile, _) = solve_stationary(&params, &grid, &SolveOptions::default()).unwrap();
    (params, grid, profile)
}

#[test]
fn single_step_on_perturbed_data_reproduces_the_frozen_values() {
    let (params, grid, profile) = setup();
    let pert = PerturbationSpec {
        amplitude: 0.01,
        center: 5.0,
        width: 2.0,
        margin: 1.0,
    };
    let state = build_initial_data(&profile, &pert).unwrap();
    let solver = EvolutionSolver::from_profile(&params, &profile, true);
    let next = solver.step(&state, 0.01).unwrap();

    close(next.rho.get(3), 9.99743976083362185e-1, "rho at r=1.583");
    close(next.u.get(3), 3.16725137072497165e-2, "u at r=1.583");
    close(next.rho.get(21), 1.00364268174613325e0, "rho at r=5.081");
    close(next.u.get(21), 1.35203839938319026e-2, "u at r=5.081");
    close(next.rho.get(40), 9.99991834187493045e-1, "rho at r=8.773");
    close(next.u.get(40), 5.71331469019394078e-3, "u at r=8.773");
    let _ = grid;
}

#[test]
fn cfl_step_on_the_default_profile_is_pinned() {
    let (params, grid, profile) = setup();
    let pert = PerturbationSpec {
        amplitude: 0.01,
        center: 5.0,
        width: 2.0,
        margin: 1.0,
    };
    let state = build_initial_data(&profile, &pert).unwrap();
    let dt = cfl_dt(&state, &params, 0.4);
    close(dt, 5.30255276498664413e-2, "cfl dt");
    // Independent evaluation of the bound from the state fields.
    let mut speed = 0.0_f64;
    for i in 0..grid.len() {
        let c = (params.gamma * params.k * state.rho.get(i).powf(params.gamma - 1.0)).sqrt();
        speed = speed.max(state.u.get(i).abs() + c);
    }
    close(dt, 0.4 * grid.dr() / speed, "cfl dt vs direct formula");
}

#[test]
fn energy_norm_and_lagrangian_spots_are_pinned() {
    let (params, _grid, profile) = setup();
    let pert = PerturbationSpec {
        amplitude: 0.01,
        center: 5.0,
        width: 2.0,
        margin: 1.0,
    };
    let state = build_initial_data(&profile, &pert).unwrap();
    close(
        norm_ne(&state, &profile).unwrap(),
        3.59230280420743328e-2,
        "NE(0)",
    );

    let q = coefficient_q(&profile, &state, &params).unwrap();
    close(q.get(21), -2.01462778446509372e0, "q at r=5.081");

    let solver = EvolutionSolver::from_profile(&params, &profile, true);
    let next = solver.step(&state, 0.01).unwrap();
    let (phi, psi) = difference_fields(&next, &profile).unwrap();
    close(phi.get(21), -3.65383992648959932e-3, "phi after one step");
    close(psi.get(21), 3.65506565190302363e-3, "psi after one step");
}

#[test]
fn mass_coordinate_matches_a_closed_form_background() {
    // rho = 1 + 0.3/r^2, n = 2, t = 0:
    // X(r) = integral_1^r (1 + 0.3/y^2) y dy = (r^2 - 1)/2 + 0.3 ln r.
    let params = Parameters::new(2, 2.0, 1.0, 1.0, 1.0, 1.0025, 0.05).unwrap();
    let grid = RadialGrid::new(100.0, 2049).unwrap();
    let state = nsinflow_core::evolution::FluidState {
        t: 0.0,
        rho: RadialField::from_fn(grid.clone(), |r| 1.0 + 0.3 / (r * r)),
        u: RadialField::zeros(grid.clone()),
    };
    let x = mass_coordinate(&state, &params).unwrap();
    for (i, &r) in grid.nodes().iter().enumerate() {
        let want = (r * r - 1.0) / 2.0 + 0.3 * r.ln();
        // Per-cell quadratic quadrature: O(dr^4) local error accumulating
        // over the curved inner region.
        let tol = 5e-6 + 1e-9 * want.abs();
        assert!(
            (x.get(i) - want).abs() <= tol,
            "r = {r}: {} vs {want}",
            x.get(i)
        );
    }
}

#[test]
fn kernel_bound_ratio_matches_a_dense_quadrature_oracle() {
    // f = r^{-1}, l = 1, n = 2: compare the product-quadrature convolution
    // against dense Simpson in w = s^2 at a few radii.
    let u_b = 0.05;
    let params = Parameters::new(2, 2.0, 1.0, 1.0, 1.0, 1.0 + u_b * u_b, u_b).unwrap();
    let grid = RadialGrid::new(20.0, 4097).unwrap();
    let f = RadialField::from_fn(grid.clone(), |r| 1.0 / r);
    let rep = check_weighted_kernel_bound(&f, 1, &params).unwrap();
    assert!(rep.ratio.is_finite() && rep.ratio > 0.0);

    let a = params.kappa() / params.m_b();
    let oracle_at = |r: f64| {
        // integral_1^r e^{-a(r^2 - s^2)} / s ds = (1/2) integral_1^{r^2}
        // e^{a(w - r^2)} / w dw by w = s^2; panel size tied to the kernel
        // rate so the layer is fully resolved.
        let (w0, w1) = (1.0, r * r);
        let mut m = ((a * (w1 - w0) * 50.0) as usize).max(2000);
        if m % 2 == 1 {
            m += 1;
        }
        let m = m + 1;
        let h = (w1 - w0) / (m - 1) as f64;
        let mut acc = 0.0;
        for kk in 0..m {
            let w = w0 + h * kk as f64;
            let weight = if kk == 0 || kk == m - 1 {
                1.0
            } else if kk % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += weight * (a * (w - w1)).exp() / w;
        }
        acc * h / 3.0 / 2.0
    };
    let denom = params.rho_plus.powf(-params.gamma) * params.u_b * f.weighted_sup(1.0);
    for r_target in [2.0, 5.0, 12.0] {
        let i = (0..grid.len())
            .min_by(|&a, &b| {
                (grid.r(a) - r_target)
                    .abs()
                    .total_cmp(&(grid.r(b) - r_target).abs())
            })
            .unwrap();
        // The op reports only the sup, so check the oracle's pointwise
        // values never exceed it.
        let pointwise = grid.r(i) * oracle_at(grid.r(i));
        assert!(
            pointwise <= rep.lhs_sup * (1.0 + 1e-6),
            "pointwise {pointwise} exceeds reported sup {}",
            rep.lhs_sup
        );
        assert!(pointwise / denom <= rep.ratio * (1.0 + 1e-6));
    }
    // The sup itself agrees with the oracle's sup over a radius scan that
    // resolves the kernel layer near r = 1 where the weighted maximum sits.
    let mut oracle_sup = 0.0_f64;
    let mut scan: Vec<f64> = (1..=300).map(|k| 1.0 + 0.005 * k as f64).collect();
    scan.extend([3.0, 4.0, 5.0, 8.0, 12.0, 16.0, 20.0]);
    for r in scan {
        oracle_sup = oracle_sup.max(r * oracle_at(r));
    }
    assert!(
        (oracle_sup - rep.lhs_sup).abs() <= 1e-3 * rep.lhs_sup,
        "oracle sup {oracle_sup} vs reported {}",
        rep.lhs_sup
    );
}
