//! Name-keyed registry of the stationary construction methods.

use super::{fixed_point, shooting, IterationReport, SolveOptions, StationaryProfile};
use crate::error::{CoreError, Result};
use crate::grid::RadialGrid;
use crate::params::Parameters;
use std::sync::Arc;

/// A stationary-profile construction strategy, selectable by name at
/// runtime.
pub trait StationaryMethod: Sync {
    fn name(&self) -> &'static str;
    fn solve(
        &self,
        params: &Parameters,
        grid: &Arc<RadialGrid>,
        opts: &SolveOptions,
    ) -> Result<(StationaryProfile, IterationReport)>;
}

struct FixedPoint;

impl StationaryMethod for FixedPoint {
    fn name(&self) -> &'static str {
        "fixed-point"
    }

    fn solve(
        &self,
        params: &Parameters,
        grid: &Arc<RadialGrid>,
        opts: &SolveOptions,
    ) -> Result<(StationaryProfile, IterationReport)> {
        fixed_point::solve(params, grid, opts)
    }
}

struct Shooting;

impl StationaryMethod for Shooting {
    fn name(&self) -> &'static str {
        "shooting"
    }

    fn solve(
        &self,
        params: &Parameters,
        grid: &Arc<RadialGrid>,
        opts: &SolveOptions,
    ) -> Result<(StationaryProfile, IterationReport)> {
        shooting::solve(params, grid, opts)
    }
}

/// All registered methods, in registration order.
pub fn methods() -> &'static [&'static dyn StationaryMethod] {
    &[&FixedPoint, &Shooting]
}

/// Look a method up by its registered name.
pub fn lookup_method(name: &str) -> Result<&'static dyn StationaryMethod> {
    methods()
        .iter()
        .copied()
        .find(|m| m.name() == name)
        .ok_or_else(|| CoreError::UnknownMethod(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_both_methods() {
        let names: Vec<_> = methods().iter().map(|m| m.name()).collect();
        assert_eq!(names, vec!["fixed-point", "shooting"]);
        assert!(lookup_method("fixed-point").is_ok());
        assert!(lookup_method("shooting").is_ok());
        assert!(matches!(
            lookup_method("nope"),
            Err(CoreError::UnknownMethod(_))
        ));
    }
}
