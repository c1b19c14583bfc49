// Index loops read better than iterator chains in the stencil code, and the
// negated comparisons are deliberate: `!(x > 0)` rejects NaN where `x <= 0`
// would accept it.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical laboratory for the spherically symmetric inflow problem of the
//! isentropic compressible Navier-Stokes equations on the exterior domain
//! r >= 1.
//!
//! Gas is injected through the unit sphere at constant density `rho_b` and
//! speed `u_b > 0`, with a quiescent far-field state `(rho_plus, 0)`. The crate
//! provides:
//!
//! - construction of the stationary profile `(rho_tilde, u_tilde)` by two
//!   interchangeable methods (contraction iteration on the representation
//!   formula, and an independent shooting integration of the same nonlocal
//!   ODE), see [`stationary`];
//! - a semi-implicit finite-difference solver for the time-dependent radial
//!   system with inflow boundary, see [`evolution`];
//! - the Lagrangian mass-coordinate view of a snapshot and its structural
//!   fields, see [`lagrangian`];
//! - energy norms, relative-energy functionals, dissipation, and empirical
//!   inequality checks, see [`energy`].
//!
//! ```
//! use nsinflow_core::{Parameters, RadialGrid};
//! use nsinflow_core::stationary::{solve_stationary, SolveOptions};
//!
//! let params = Parameters::new(2, 2.0, 1.0, 1.0, 1.0, 1.0025, 0.05)?;
//! let grid = RadialGrid::new(50.0, 257)?;
//! let (profile, report) = solve_stationary(&params, &grid, &SolveOptions::default())?;
//! assert!(report.final_residual < 1e-9);
//! assert_eq!(profile.u_tilde.get(0), params.u_b);
//! # Ok::<(), nsinflow_core::CoreError>(())
//! ```

pub mod calculus;
pub mod energy;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod io;
pub mod lagrangian;
pub mod params;
pub mod pressure;
pub mod stationary;

pub use error::{CoreError, Result};
pub use grid::{RadialField, RadialGrid};
pub use params::Parameters;
