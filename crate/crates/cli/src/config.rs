//! Command-line flags, the `key=value` config file, and the resolved
//! settings a command runs with.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ancient-ricci", version, about = "Diagnostics for rotationally symmetric ancient Ricci flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the Bryant soliton profile and check its asymptotics.
    Bryant,
    /// Build oval initial data, evolve it and save snapshots.
    Evolve,
    /// Diagnose one saved snapshot.
    Diagnose,
    /// Compare a saved run with its (alpha, beta, gamma) transform.
    Compare,
    /// Gaussian moment identities and the integral inequalities.
    SpectralSelftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bryant => "bryant",
            Command::Evolve => "evolve",
            Command::Diagnose => "diagnose",
            Command::Compare => "compare",
            Command::SpectralSelftest => "spectral-selftest",
        }
    }
}

/// Every flag is optional so that a config file can supply it instead.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// log(-t0) of the initial data (at least 8).
    #[arg(long, global = true)]
    pub t0_log: Option<f64>,
    /// Matching parameter between tip and cylindrical regions.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Admissibility parameter of the transform.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Spatial shift of the transform.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Time translation of the transform.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Parabolic dilation of the transform.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Arc-length spacing at log(-t0) = 10; scaled by sqrt(-t0) otherwise.
    #[arg(long, global = true)]
    pub dz: Option<f64>,
    /// Spacing of the cylindrical-frame lattice.
    #[arg(long, global = true)]
    pub dxi: Option<f64>,
    /// Time step as a multiple of dz^2.
    #[arg(long, global = true)]
    pub dt_safety: Option<f64>,
    /// Number of snapshot intervals.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Length of the evolution in tau.
    #[arg(long, global = true)]
    pub dtau: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized property checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Config file of key=value lines; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Snapshot file (diagnose) or run directory (compare).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub t0_log: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub dz: f64,
    pub dxi: f64,
    pub dt_safety: f64,
    pub steps: usize,
    pub dtau: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub config: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            t0_log: 10.0,
            theta: 0.05,
            epsilon: 0.01,
            alpha: 0.0,
            beta: 0.0,
            gamma: 1e-3,
            dz: 1.0,
            dxi: 0.01,
            dt_safety: 0.25,
            steps: 10,
            dtau: 0.25,
            out: PathBuf::from("out"),
            seed: 0,
            config: None,
            input: None,
        }
    }
}

const KEYS: [&str; 14] = [
    "t0-log",
    "theta",
    "epsilon",
    "alpha",
    "beta",
    "gamma",
    "dz",
    "dxi",
    "dt-safety",
    "steps",
    "dtau",
    "out",
    "seed",
    "input",
];

/// Read `key=value` lines. Blank lines and lines starting with `#` are
/// skipped; keys use the flag spelling without dashes in front
/// (`t0-log=12`), and underscores are accepted in place of hyphens.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, (usize, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| CliError::Parse { path: path.display().to_string(), line: i + 1, message };
        let (k, v) = line.split_once('=').ok_or_else(|| parse_err(format!("expected key=value, found {line:?}")))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(parse_err(format!("unknown key {:?}", k.trim())));
        }
        if out.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
            return Err(parse_err(format!("duplicate key {key:?}")));
        }
    }
    Ok(out)
}

impl Settings {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let mut s = Settings::default();
        if let Some(path) = &flags.config {
            s.config = Some(path.clone());
            for (key, (line, value)) in read_config(path)? {
                s.set(&key, &value).map_err(|message| CliError::Parse {
                    path: path.display().to_string(),
                    line,
                    message,
                })?;
            }
        }
        macro_rules! take {
            ($($field:ident),*) => { $(if let Some(v) = flags.$field.clone() { s.$field = v; })* };
        }
        take!(t0_log, theta, epsilon, alpha, beta, gamma, dz, dxi, dt_safety, steps, dtau, out, seed);
        if flags.input.is_some() {
            s.input = flags.input.clone();
        }
        s.validate()?;
        Ok(s)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn f(v: &str) -> Result<f64, String> {
            v.parse().map_err(|_| format!("cannot parse {v:?} as a number"))
        }
        fn u<T: std::str::FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse {v:?} as a nonnegative integer"))
        }
        match key {
            "t0-log" => self.t0_log = f(value)?,
            "theta" => self.theta = f(value)?,
            "epsilon" => self.epsilon = f(value)?,
            "alpha" => self.alpha = f(value)?,
            "beta" => self.beta = f(value)?,
            "gamma" => self.gamma = f(value)?,
            "dz" => self.dz = f(value)?,
            "dxi" => self.dxi = f(value)?,
            "dt-safety" => self.dt_safety = f(value)?,
            "steps" => self.steps = u(value)?,
            "dtau" => self.dtau = f(value)?,
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = u(value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Range checks that do not depend on the command. Command-specific
    /// limits such as the minimum `log(−t0)` are left to the kernels.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |what: &str, v: f64| CliError::Config(format!("{what} = {v} is out of range"));
        let finite = [("t0-log", self.t0_log), ("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(bad(name, v));
            }
        }
        if !(self.theta > 0.0 && self.theta <= 0.1) {
            return Err(bad("theta", self.theta));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(bad("epsilon", self.epsilon));
        }
        for (name, v) in [("dz", self.dz), ("dxi", self.dxi), ("dtau", self.dtau)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(name, v));
            }
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 0.5) {
            return Err(bad("dt-safety", self.dt_safety));
        }
        if self.steps < 2 {
            return Err(CliError::Config(format!("steps = {} must be at least 2", self.steps)));
        }
        Ok(())
    }

    /// Resolved settings as `key=value` lines in a fixed order; the output
    /// can be fed back through `--config`.
    pub fn to_config_lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("t0-log={}", self.t0_log),
            format!("theta={}", self.theta),
            format!("epsilon={}", self.epsilon),
            format!("alpha={}", self.alpha),
            format!("beta={}", self.beta),
            format!("gamma={}", self.gamma),
            format!("dz={}", self.dz),
            format!("dxi={}", self.dxi),
            format!("dt-safety={}", self.dt_safety),
            format!("steps={}", self.steps),
            format!("dtau={}", self.dtau),
            format!("out={}", self.out.display()),
            format!("seed={}", self.seed),
        ];
        if let Some(p) = &self.input {
            v.push(format!("input={}", p.display()));
        }
        v
    }
}
