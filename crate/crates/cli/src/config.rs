//! Flat key = value run configuration (TOML-compatible subset) with
//! flag overrides and documented defaults.

use nsinflow_core::evolution::{PerturbationSpec, SchemeConfig};
use nsinflow_core::grid::RadialGrid;
use nsinflow_core::params::Parameters;
use nsinflow_core::stationary::SolveOptions;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

/// Every key the config file and the flag set accept, in canonical order.
pub const CONFIG_KEYS: &[&str] = &[
    "n",
    "gamma",
    "k",
    "mu",
    "rho_plus",
    "rho_b",
    "u_b",
    "grid_points",
    "r_max",
    "cfl",
    "t_end",
    "snapshot_interval",
    "amplitude",
    "center",
    "width",
    "out_dir",
    "method",
    "well_balanced",
    "tol",
    "max_iter",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: u32,
    pub gamma: f64,
    pub k: f64,
    pub mu: f64,
    pub rho_plus: f64,
    /// Defaults to rho_plus + u_b^2 when not given.
    pub rho_b: Option<f64>,
    pub u_b: f64,
    pub grid_points: usize,
    pub r_max: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub snapshot_interval: f64,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub out_dir: PathBuf,
    pub method: String,
    pub well_balanced: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            gamma: 2.0,
            k: 1.0,
            mu: 1.0,
            rho_plus: 1.0,
            rho_b: None,
            u_b: 0.05,
            grid_points: 4097,
            r_max: 200.0,
            cfl: 0.4,
            t_end: 100.0,
            snapshot_interval: 1.0,
            amplitude: 0.01,
            center: 5.0,
            width: 2.0,
            out_dir: PathBuf::from("out"),
            method: "fixed-point".to_string(),
            well_balanced: true,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl RunConfig {
    pub fn resolved_rho_b(&self) -> f64 {
        self.rho_b.unwrap_or(self.rho_plus + self.u_b * self.u_b)
    }

    pub fn params(&self) -> Result<Parameters, ConfigError> {
        Parameters::new(
            self.n,
            self.gamma,
            self.k,
            self.mu,
            self.rho_plus,
            self.resolved_rho_b(),
            self.u_b,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>, ConfigError> {
        RadialGrid::new(self.r_max, self.grid_points).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig {
            cfl: self.cfl,
            t_end: self.t_end,
            snapshot_interval: self.snapshot_interval,
            well_balanced: self.well_balanced,
        }
    }

    pub fn perturbation(&self) -> PerturbationSpec {
        PerturbationSpec {
            amplitude: self.amplitude,
            center: self.center,
            width: self.width,
            margin: 1.0,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    /// Validate everything a run needs up front.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params()?;
        self.grid()?;
        self.scheme()
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        nsinflow_core::stationary::lookup_method(&self.method)
            .map_err(|e| ConfigError(e.to_string()))?;
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(ConfigError("tol must be > 0 and max_iter >= 1".into()));
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad_value = |key: &str, value: &str, what: &str| {
            ConfigError(format!("key '{key}': cannot parse '{value}' as {what}"))
        };
        let trimmed = value.trim().trim_matches('"');
        match key {
            "n" => {
                self.n = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "integer"))?
            }
            "gamma" => {
                self.gamma = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "k" => {
                self.k = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "mu" => {
                self.mu = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "rho_plus" => {
                self.rho_plus = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "rho_b" => {
                self.rho_b = Some(
                    trimmed
                        .parse()
                        .map_err(|_| bad_value(key, value, "number"))?,
                )
            }
            "u_b" => {
                self.u_b = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "grid_points" => {
                self.grid_points = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "integer"))?
            }
            "r_max" => {
                self.r_max = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "cfl" => {
                self.cfl = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "t_end" => {
                self.t_end = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "snapshot_interval" => {
                self.snapshot_interval = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "amplitude" => {
                self.amplitude = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "center" => {
                self.center = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "width" => {
                self.width = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "out_dir" => self.out_dir = PathBuf::from(trimmed),
            "method" => self.method = trimmed.to_string(),
            "well_balanced" => {
                self.well_balanced = trimmed.parse().map_err(|_| bad_value(key, value, "bool"))?
            }
            "tol" => {
                self.tol = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "number"))?
            }
            "max_iter" => {
                self.max_iter = trimmed
                    .parse()
                    .map_err(|_| bad_value(key, value, "integer"))?
            }
            other => {
                return Err(ConfigError(format!(
                    "unknown key '{other}'; valid keys: {}",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parse a config file's contents into `self`.
    pub fn apply_file(&mut self, contents: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in contents.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    lineno + 1
                )));
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// The fully resolved manifest, echoed into every run directory.
    pub fn manifest_json(&self) -> String {
        use nsinflow_core::io::fmt_f64;
        let mut s = String::from("{\n");
        let _ = writeln!(s, "  \"n\": {},", self.n);
        let _ = writeln!(s, "  \"gamma\": {},", fmt_f64(self.gamma));
        let _ = writeln!(s, "  \"k\": {},", fmt_f64(self.k));
        let _ = writeln!(s, "  \"mu\": {},", fmt_f64(self.mu));
        let _ = writeln!(s, "  \"rho_plus\": {},", fmt_f64(self.rho_plus));
        let _ = writeln!(s, "  \"rho_b\": {},", fmt_f64(self.resolved_rho_b()));
        let _ = writeln!(s, "  \"u_b\": {},", fmt_f64(self.u_b));
        let _ = writeln!(s, "  \"grid_points\": {},", self.grid_points);
        let _ = writeln!(s, "  \"r_max\": {},", fmt_f64(self.r_max));
        let _ = writeln!(s, "  \"cfl\": {},", fmt_f64(self.cfl));
        let _ = writeln!(s, "  \"t_end\": {},", fmt_f64(self.t_end));
        let _ = writeln!(
            s,
            "  \"snapshot_interval\": {},",
            fmt_f64(self.snapshot_interval)
        );
        let _ = writeln!(s, "  \"amplitude\": {},", fmt_f64(self.amplitude));
        let _ = writeln!(s, "  \"center\": {},", fmt_f64(self.center));
        let _ = writeln!(s, "  \"width\": {},", fmt_f64(self.width));
        let _ = writeln!(s, "  \"out_dir\": \"{}\",", self.out_dir.display());
        let _ = writeln!(s, "  \"method\": \"{}\",", self.method);
        let _ = writeln!(s, "  \"well_balanced\": {},", self.well_balanced);
        let _ = writeln!(s, "  \"tol\": {},", fmt_f64(self.tol));
        let _ = writeln!(s, "  \"max_iter\": {}", self.max_iter);
        s.push('}');
        s.push('\n');
        s
    }
}
