use clap::{Args, Parser, Subcommand};
use nsinflow_cli::config::RunConfig;
use nsinflow_cli::exit_codes;
use nsinflow_cli::pipeline::{emit_plot_script, run_evolve, run_stationary, PipelineError};
use nsinflow_cli::verify::run_all;
use std::path::PathBuf;
use std::process::ExitCode;

/// Spherically symmetric inflow solver: stationary profiles, time
/// evolution, and verification runs.
#[derive(Parser)]
#[command(name = "nsinflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags mirror the config-file keys as --kebab-case; flag values override
/// file values, and NSINFLOW_OUT overrides the output directory.
#[derive(Args, Clone, Default)]
struct ConfigFlags {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    rho_plus: Option<f64>,
    #[arg(long)]
    rho_b: Option<f64>,
    #[arg(long)]
    u_b: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    snapshot_interval: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    center: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Stationary construction method: fixed-point | shooting.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    well_balanced: Option<bool>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Construct the stationary profile, classify it, and write
    /// profile.csv plus a JSON summary.
    Stationary(ConfigFlags),
    /// Run the full pipeline: stationary solve, time evolution, energy
    /// accounting, verdict.
    Evolve(ConfigFlags),
    /// Run the acceptance criteria and print a pass/fail table.
    Verify {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Run only criteria whose id or name contains this string.
        #[arg(long)]
        only: Option<String>,
    },
    /// Write a gnuplot script referencing the CSV artifacts of a run
    /// directory.
    Plot {
        /// Run directory produced by `evolve`.
        dir: PathBuf,
    },
}

fn build_config(flags: &ConfigFlags) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        let contents =
            std::fs::read_to_string(path).map_err(|e| format!("cannot read {path:?}: {e}"))?;
        cfg.apply_file(&contents).map_err(|e| e.to_string())?;
    }
    macro_rules! over {
        ($field:ident) => {
            if let Some(v) = &flags.$field {
                cfg.$field = v.clone();
            }
        };
    }
    over!(n);
    over!(gamma);
    over!(k);
    over!(mu);
    over!(rho_plus);
    if let Some(v) = flags.rho_b {
        cfg.rho_b = Some(v);
    }
    over!(u_b);
    over!(grid_points);
    over!(r_max);
    over!(cfl);
    over!(t_end);
    over!(snapshot_interval);
    over!(amplitude);
    over!(center);
    over!(width);
    over!(out_dir);
    over!(method);
    over!(well_balanced);
    over!(tol);
    over!(max_iter);
    if let Ok(dir) = std::env::var("NSINFLOW_OUT") {
        cfg.out_dir = PathBuf::from(dir);
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn code_of(err: &PipelineError) -> i32 {
    match err {
        PipelineError::Usage(_) => exit_codes::USAGE,
        PipelineError::BlowUp(_) => exit_codes::BLOW_UP,
        PipelineError::NonConvergence(_) => exit_codes::NON_CONVERGENCE,
    }
}

fn warn_isothermal(cfg: &RunConfig) {
    if (cfg.gamma - 1.0).abs() < 1e-12 {
        eprintln!(
            "warning: gamma = 1 (isothermal) runs sit outside the supported \
             stability regime and are excluded from acceptance"
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Stationary(flags) => match build_config(&flags) {
            Err(e) => {
                eprintln!("error: {e}");
                exit_codes::USAGE
            }
            Ok(cfg) => {
                if let Ok(params) = cfg.params() {
                    let flags = params.regime_flags();
                    if !flags.density_gap_ok || !flags.flux_ratio_ok {
                        eprintln!(
                            "warning: parameters sit outside the smallness regime \
                             (density gap ok: {}, flux ratio {:.3}); the solve will \
                             proceed and report the outcome",
                            flags.density_gap_ok, flags.flux_ratio
                        );
                    }
                }
                let out_dir = cfg.out_dir.clone();
                match run_stationary(&cfg, &out_dir) {
                    Ok(art) => {
                        println!(
                            "stationary profile written to {:?} ({} iterations, residual {:.3e})",
                            out_dir, art.report.iterations, art.report.final_residual
                        );
                        exit_codes::OK
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        code_of(&e)
                    }
                }
            }
        },
        Command::Evolve(flags) => match build_config(&flags) {
            Err(e) => {
                eprintln!("error: {e}");
                exit_codes::USAGE
            }
            Ok(cfg) => {
                warn_isothermal(&cfg);
                let out_dir = cfg.out_dir.clone();
                match run_evolve(&cfg, &out_dir) {
                    Ok(art) => {
                        let gaps = &art.trajectory.gaps;
                        println!(
                            "evolved to t = {} in {} steps; final sup gap {:.3e}; \
                             artifacts in {:?}",
                            cfg.t_end,
                            art.trajectory.steps,
                            gaps.last().map(|g| g.sup()).unwrap_or(f64::NAN),
                            out_dir
                        );
                        exit_codes::OK
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        code_of(&e)
                    }
                }
            }
        },
        Command::Verify { flags, only } => match build_config(&flags) {
            Err(e) => {
                eprintln!("error: {e}");
                exit_codes::USAGE
            }
            Ok(_cfg) => {
                let outcomes = run_all(only.as_deref());
                if outcomes.is_empty() {
                    eprintln!("error: no criterion matches the filter");
                    exit_codes::USAGE
                } else {
                    let mut all_ok = true;
                    for o in &outcomes {
                        let mark = if o.passed { "PASS" } else { "FAIL" };
                        println!("[{mark}] {:4} {:32} {}", o.id, o.name, o.details);
                        all_ok &= o.passed;
                    }
                    if all_ok {
                        println!("all {} criteria passed", outcomes.len());
                        exit_codes::OK
                    } else {
                        exit_codes::VERIFICATION_FAILED
                    }
                }
            }
        },
        Command::Plot { dir } => match emit_plot_script(&dir) {
            Ok(path) => {
                println!("plot script written to {path:?}");
                exit_codes::OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                code_of(&e)
            }
        },
    };
    ExitCode::from(code as u8)
}
