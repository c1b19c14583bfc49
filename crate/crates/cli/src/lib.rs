// `!(x > 0)` rejects NaN where `x <= 0` would accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Command-line orchestration: configuration, run pipelines, and the
//! acceptance-criteria runner. The binary in `main.rs` is a thin argv
//! wrapper over this library so the test targets drive the same code.

pub mod config;
pub mod pipeline;
pub mod verify;

/// Process exit codes of the binary.
pub mod exit_codes {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const BLOW_UP: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
    pub const VERIFICATION_FAILED: i32 = 4;
}
