//! Flat `key = value` configuration shared by the sweep-style commands.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bell::{AngleOverrides, RatioScan};
use crate::eigensolver::SolverOptions;
use crate::error::{Error, Result};

/// Largest chain accepted by sweeps.
pub const SWEEP_MAX_SITES: usize = 12;

/// Inclusive evenly spaced grid; `steps` is the number of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn single(x: f64) -> Self {
        Self::new(x, x, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.min],
            k => (0..k)
                .map(|i| {
                    if i + 1 == k {
                        self.max
                    } else {
                        self.min + (self.max - self.min) * i as f64 / (k - 1) as f64
                    }
                })
                .collect(),
        }
    }

    pub fn spacing(&self) -> f64 {
        if self.steps < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.steps - 1) as f64
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument(format!("{name} grid is empty")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::InvalidArgument(format!(
                "{name} grid needs finite min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyBase {
    Natural,
    Bits,
}

impl FromStr for EntropyBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "e" | "natural" | "ln" => Ok(Self::Natural),
            "2" | "bits" | "log2" => Ok(Self::Bits),
            _ => Err(format!("unknown entropy base '{s}' (use e or 2)")),
        }
    }
}

impl EntropyBase {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Natural => "e",
            Self::Bits => "2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub jz: Grid,
    pub d: Grid,
    pub periodic: bool,
    pub angles: AngleOverrides,
    pub f_max: f64,
    pub f_points: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub krylov_dim: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub entropy_base: EntropyBase,
    /// Target width for criticality refinement.
    pub resolution: f64,
    /// Jz of the cut used by `table1` and `scaling`.
    pub cut_jz: f64,
    pub csv: Option<PathBuf>,
    pub jsonl: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let solver = SolverOptions::default();
        let scan = RatioScan::default();
        Self {
            n_values: vec![8],
            jz: Grid::new(0.0, 16.0, 81),
            d: Grid::new(0.0, 16.0, 81),
            periodic: true,
            angles: AngleOverrides::default(),
            f_max: scan.f_max,
            f_points: scan.points,
            tol: solver.tol,
            max_iter: solver.max_iter,
            krylov_dim: solver.krylov_dim,
            seed: solver.seed,
            workers: 0,
            entropy_base: EntropyBase::Natural,
            resolution: 1e-3,
            cut_jz: 12.0,
            csv: None,
            jsonl: None,
        }
    }
}

/// Keys accepted by [`SweepConfig::set`], in documentation order.
pub const CONFIG_KEYS: &[&str] = &[
    "n", "jz_min", "jz_max", "jz_steps", "d_min", "d_max", "d_steps", "periodic", "theta1", "theta2",
    "theta_nu", "f_max", "f_points", "tol", "max_iter", "krylov_dim", "seed", "workers", "entropy_base",
    "resolution", "cut_jz", "csv", "jsonl",
];

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("{key}: cannot parse '{value}': {e}"))
}

/// `auto` (or empty) clears an angle override.
fn parse_angle(key: &str, value: &str) -> std::result::Result<Option<f64>, String> {
    match value {
        "" | "auto" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl SweepConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key {
            "n" => {
                self.n_values = value
                    .split(',')
                    .map(|s| parse::<usize>(key, s.trim()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "jz_min" => self.jz.min = parse(key, value)?,
            "jz_max" => self.jz.max = parse(key, value)?,
            "jz_steps" => self.jz.steps = parse(key, value)?,
            "d_min" => self.d.min = parse(key, value)?,
            "d_max" => self.d.max = parse(key, value)?,
            "d_steps" => self.d.steps = parse(key, value)?,
            "periodic" => self.periodic = parse(key, value)?,
            "theta1" => self.angles.theta1 = parse_angle(key, value)?,
            "theta2" => self.angles.theta2 = parse_angle(key, value)?,
            "theta_nu" => self.angles.theta_nu = parse_angle(key, value)?,
            "f_max" => self.f_max = parse(key, value)?,
            "f_points" => self.f_points = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "krylov_dim" => self.krylov_dim = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "entropy_base" => self.entropy_base = value.parse()?,
            "resolution" => self.resolution = parse(key, value)?,
            "cut_jz" => self.cut_jz = parse(key, value)?,
            "csv" => self.csv = (!value.is_empty()).then(|| PathBuf::from(value)),
            "jsonl" => self.jsonl = (!value.is_empty()).then(|| PathBuf::from(value)),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`. Blank
    /// lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                msg: format!("expected key = value, got '{line}'"),
            })?;
            self.set(key.trim(), value).map_err(|msg| Error::Config { line: i + 1, msg })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// The config as `key = value` text that [`SweepConfig::from_text`]
    /// reads back unchanged.
    pub fn to_text(&self) -> String {
        let angle = |a: Option<f64>| a.map_or("auto".to_string(), |x| format!("{x:?}"));
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        let n: Vec<String> = self.n_values.iter().map(|n| n.to_string()).collect();
        let values = [
            n.join(","),
            format!("{:?}", self.jz.min),
            format!("{:?}", self.jz.max),
            self.jz.steps.to_string(),
            format!("{:?}", self.d.min),
            format!("{:?}", self.d.max),
            self.d.steps.to_string(),
            self.periodic.to_string(),
            angle(self.angles.theta1),
            angle(self.angles.theta2),
            angle(self.angles.theta_nu),
            format!("{:?}", self.f_max),
            self.f_points.to_string(),
            format!("{:?}", self.tol),
            self.max_iter.to_string(),
            self.krylov_dim.to_string(),
            self.seed.to_string(),
            self.workers.to_string(),
            self.entropy_base.as_str().to_string(),
            format!("{:?}", self.resolution),
            format!("{:?}", self.cut_jz),
            path(&self.csv),
            path(&self.jsonl),
        ];
        CONFIG_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::InvalidArgument("no chain lengths given".into()));
        }
        for &n in &self.n_values {
            if n % 2 == 1 {
                return Err(Error::OddChain(n));
            }
            if n < 2 {
                return Err(Error::InvalidSize(n));
            }
            if n > SWEEP_MAX_SITES {
                return Err(Error::SizeLimit {
                    what: "sweep chain length",
                    size: n,
                    limit: SWEEP_MAX_SITES,
                });
            }
        }
        self.jz.validate("jz")?;
        self.d.validate("d")?;
        if !(self.f_max > 0.0) || self.f_points < 3 {
            return Err(Error::InvalidArgument("f̃ scan needs f_max > 0 and f_points >= 3".into()));
        }
        if !(self.tol > 0.0) || !(self.resolution > 0.0) {
            return Err(Error::InvalidArgument("tol and resolution must be positive".into()));
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            krylov_dim: self.krylov_dim,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }

    pub fn ratio_scan(&self) -> RatioScan {
        RatioScan {
            f_max: self.f_max,
            points: self.f_points,
            angles: self.angles,
            ..RatioScan::default()
        }
    }
}
