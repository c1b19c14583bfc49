//! The run pipelines behind the subcommands. Everything written here is
//! byte-deterministic for a fixed configuration.

use crate::config::{ConfigError, RunConfig};
use nsinflow_core::energy::{energy_report, stability_summary, EnergyReport, StabilityVerdict};
use nsinflow_core::evolution::{build_initial_data, EvolutionSolver, Trajectory};
use nsinflow_core::io::{csv_table, fmt_f64};
use nsinflow_core::lagrangian::lagrangian_view;
use nsinflow_core::stationary::{
    classify_density_profile, decay_report, lookup_method, Classification, DecayReport,
    IterationReport, StationaryProfile,
};
use nsinflow_core::CoreError;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Failure modes mapped to process exit codes by main.
#[derive(Debug)]
pub enum PipelineError {
    /// Exit 1: configuration or I/O problems.
    Usage(String),
    /// Exit 2: density lost positivity.
    BlowUp(String),
    /// Exit 3: the stationary construction failed to converge.
    NonConvergence(String),
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PipelineError::Usage(m) => write!(f, "{m}"),
            PipelineError::BlowUp(m) => write!(f, "{m}"),
            PipelineError::NonConvergence(m) => write!(f, "{m}"),
        }
    }
}

impl From<ConfigError> for PipelineError {
    fn from(e: ConfigError) -> Self {
        PipelineError::Usage(e.0)
    }
}

fn classify_core_error(e: CoreError) -> PipelineError {
    match e {
        CoreError::BlowUp { .. } => PipelineError::BlowUp(e.to_string()),
        // A failed tail fit or classification on a run that started from
        // valid inputs means the stationary construction itself went bad.
        CoreError::NonConvergence { .. }
        | CoreError::ShootingFailure { .. }
        | CoreError::RegimeViolation(_)
        | CoreError::TailFit(_)
        | CoreError::ClassificationFailure(_) => PipelineError::NonConvergence(e.to_string()),
        other => PipelineError::Usage(other.to_string()),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| PipelineError::Usage(format!("cannot create {parent:?}: {e}")))?;
    }
    fs::write(path, contents)
        .map_err(|e| PipelineError::Usage(format!("cannot write {path:?}: {e}")))
}

fn json_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn json_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_f64(x),
        None => "null".to_string(),
    }
}

pub struct StationaryArtifacts {
    pub profile: StationaryProfile,
    pub report: IterationReport,
    pub decay: DecayReport,
    pub classification: Classification,
}

/// Solve, classify, and write profile.csv + stationary_summary.json +
/// manifest.json into the output directory.
pub fn run_stationary(
    config: &RunConfig,
    out_dir: &Path,
) -> Result<StationaryArtifacts, PipelineError> {
    config.validate()?;
    let params = config.params()?;
    let grid = config.grid()?;
    let method = lookup_method(&config.method).map_err(classify_core_error)?;
    // The manifest goes out first: an unwritable directory fails before the
    // solve, and a failed run still leaves its configuration behind.
    write_file(&out_dir.join("manifest.json"), &config.manifest_json())?;
    let (profile, report) = method
        .solve(&params, &grid, &config.solve_options())
        .map_err(classify_core_error)?;
    let decay = decay_report(&profile);
    let classification = classify_density_profile(&profile).map_err(classify_core_error)?;

    write_file(&out_dir.join("profile.csv"), &profile.to_csv())?;

    let (r_star, rho_star, class_name) = match classification {
        Classification::InteriorMinimum { r_star, rho_star } => {
            (Some(r_star), Some(rho_star), "interior-minimum")
        }
        Classification::MonotoneIncreasing => (None, None, "monotone-increasing"),
    };
    let mut s = String::from("{\n");
    let _ = writeln!(s, "  \"converged\": true,");
    let _ = writeln!(s, "  \"method\": \"{}\",", method.name());
    let _ = writeln!(s, "  \"iterations\": {},", report.iterations);
    let _ = writeln!(
        s,
        "  \"final_residual\": {},",
        fmt_f64(report.final_residual)
    );
    let _ = writeln!(s, "  \"classification\": \"{class_name}\",");
    let _ = writeln!(s, "  \"r_star\": {},", json_opt(r_star));
    let _ = writeln!(s, "  \"rho_star\": {},", json_opt(rho_star));
    let _ = writeln!(s, "  \"decay_slopes\": {{");
    let _ = writeln!(s, "    \"eta\": {},", fmt_f64(decay.slope_eta));
    let _ = writeln!(s, "    \"eta_r\": {},", fmt_f64(decay.slope_eta_r));
    let _ = writeln!(s, "    \"u\": {}", fmt_f64(decay.slope_u));
    let _ = writeln!(s, "  }},");
    let _ = writeln!(s, "  \"regime_flags\": {{");
    let _ = writeln!(
        s,
        "    \"density_gap_ok\": {},",
        json_bool(profile.regime.flags.density_gap_ok)
    );
    let _ = writeln!(
        s,
        "    \"flux_ratio_ok\": {},",
        json_bool(profile.regime.flags.flux_ratio_ok)
    );
    let _ = writeln!(
        s,
        "    \"flux_ratio\": {},",
        fmt_f64(profile.regime.flags.flux_ratio)
    );
    let _ = writeln!(
        s,
        "    \"ub_over_rho_gamma\": {},",
        fmt_f64(profile.regime.flags.ub_over_rho_gamma)
    );
    let _ = writeln!(s, "    \"ball_ok\": {},", json_bool(profile.regime.ball_ok));
    let _ = writeln!(
        s,
        "    \"volume_band_ok\": {}",
        json_bool(profile.regime.volume_band_ok)
    );
    let _ = writeln!(s, "  }}");
    s.push_str("}\n");
    write_file(&out_dir.join("stationary_summary.json"), &s)?;
    Ok(StationaryArtifacts {
        profile,
        report,
        decay,
        classification,
    })
}

pub struct EvolveArtifacts {
    pub profile: StationaryProfile,
    pub trajectory: Trajectory,
    pub energy: EnergyReport,
    pub verdict: StabilityVerdict,
}

/// Full pipeline: stationary solve, time evolution, energy accounting,
/// Lagrangian dump of the final snapshot, verdict.
pub fn run_evolve(config: &RunConfig, out_dir: &Path) -> Result<EvolveArtifacts, PipelineError> {
    config.validate()?;
    let params = config.params()?;
    let grid = config.grid()?;
    let method = lookup_method(&config.method).map_err(classify_core_error)?;
    write_file(&out_dir.join("manifest.json"), &config.manifest_json())?;
    let (profile, _) = method
        .solve(&params, &grid, &config.solve_options())
        .map_err(classify_core_error)?;

    let initial =
        build_initial_data(&profile, &config.perturbation()).map_err(classify_core_error)?;
    let solver = EvolutionSolver::from_profile(&params, &profile, config.well_balanced);
    let trajectory = solver
        .run(initial, &config.scheme())
        .map_err(classify_core_error)?;
    let energy = energy_report(&trajectory, &profile, &params).map_err(classify_core_error)?;
    let verdict = stability_summary(&trajectory, &energy, &params);

    write_file(&out_dir.join("profile.csv"), &profile.to_csv())?;

    // Snapshot dumps: r, rho, u, rho_tilde, u_tilde.
    for (k, snap) in trajectory.snapshots.iter().enumerate() {
        let csv = csv_table(
            &["r", "rho", "u", "rho_tilde", "u_tilde"],
            (0..grid.len()).map(|i| {
                vec![
                    grid.r(i),
                    snap.rho.get(i),
                    snap.u.get(i),
                    profile.rho_tilde.get(i),
                    profile.u_tilde.get(i),
                ]
            }),
        );
        write_file(
            &out_dir.join(format!("snapshots/snapshot_{k:04}.csv")),
            &csv,
        )?;
    }

    // Trajectory summary: per-snapshot gaps plus energy functionals.
    let traj_csv = csv_table(
        &[
            "t",
            "sup_gap_rho",
            "sup_gap_u",
            "NE",
            "ME_accum",
            "relative_energy",
            "D",
        ],
        trajectory.gaps.iter().zip(&energy.rows).map(|(g, row)| {
            vec![
                g.t,
                g.sup_gap_rho,
                g.sup_gap_u,
                row.ne,
                row.me2,
                row.e_total,
                row.d,
            ]
        }),
    );
    write_file(&out_dir.join("trajectory.csv"), &traj_csv)?;
    write_file(&out_dir.join("energy.csv"), &energy.to_csv())?;

    let view = lagrangian_view(trajectory.snapshots.last().unwrap(), &profile, &params)
        .map_err(classify_core_error)?;
    write_file(&out_dir.join("lagrangian_final.csv"), &view.to_csv())?;

    let gamma_one = (config.gamma - 1.0).abs() < 1e-12;
    let mut s = String::from("{\n");
    let _ = writeln!(s, "  \"applicable\": {},", json_bool(verdict.applicable));
    let _ = writeln!(
        s,
        "  \"c_emp\": {},",
        json_opt(finite_or_none(verdict.c_emp))
    );
    let _ = writeln!(
        s,
        "  \"decay_factor\": {},",
        json_opt(finite_or_none(verdict.decay_factor))
    );
    let _ = writeln!(
        s,
        "  \"energy_ratio\": {},",
        json_opt(finite_or_none(verdict.energy_ratio))
    );
    let _ = writeln!(
        s,
        "  \"rho_plus_observational\": {},",
        json_bool(verdict.rho_plus_observational)
    );
    let _ = writeln!(s, "  \"gamma_one_excluded\": {},", json_bool(gamma_one));
    let _ = writeln!(s, "  \"steps\": {}", trajectory.steps);
    s.push_str("}\n");
    write_file(&out_dir.join("verdict.json"), &s)?;

    Ok(EvolveArtifacts {
        profile,
        trajectory,
        energy,
        verdict,
    })
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Emit an inert gnuplot script referencing the CSV artifacts of a run
/// directory. Regeneration is byte-identical.
pub fn emit_plot_script(run_dir: &Path) -> Result<PathBuf, PipelineError> {
    let needed = ["profile.csv", "trajectory.csv", "energy.csv"];
    for name in needed {
        let p = run_dir.join(name);
        if !p.exists() {
            return Err(PipelineError::Usage(format!(
                "missing {name} in {run_dir:?}; run the evolve pipeline first"
            )));
        }
    }
    let script = "\
# Plot script for a completed run directory. Inert data: feed it to gnuplot.
set datafile separator ','
set key autotitle columnhead

set terminal pngcairo size 900,600
set output 'profile.png'
set logscale x
plot 'profile.csv' using 1:4 with lines title 'rho', \\
     'profile.csv' using 1:5 with lines title 'u'

set output 'gap.png'
unset logscale x
set logscale y
plot 'trajectory.csv' using 1:2 with lines title 'sup gap rho', \\
     'trajectory.csv' using 1:3 with lines title 'sup gap u'

set output 'energy.png'
plot 'energy.csv' using 1:4 with lines title 'relative energy', \\
     'energy.csv' using 1:5 with lines title 'dissipation'
";
    let path = run_dir.join("plot.gp");
    write_file(&path, script)?;
    Ok(path)
}
