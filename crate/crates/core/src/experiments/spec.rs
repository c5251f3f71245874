use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytic::Scheme;
use crate::error::{LeakError, Result};
use crate::sim::AttackStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Analytic,
    Empirical,
    Verify,
    Figure2,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Empirical => "empirical",
            Mode::Verify => "verify",
            Mode::Figure2 => "figure2",
        }
    }
}

/// Raw, unparsed settings from one source (command line or config file).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub lambda_grid: Option<String>,
    pub scheduler: Option<String>,
    pub attacker: Option<String>,
    pub omega: Option<String>,
    pub horizon: Option<String>,
    pub trials: Option<String>,
    pub seed: Option<String>,
    pub out: Option<String>,
}

impl Settings {
    /// Parses `key = value` lines. Blank lines and lines starting with `#` are ignored;
    /// keys accept `-` or `_`.
    pub fn parse_config(text: &str) -> Result<Settings> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LeakError::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1)))?;
            let value = Some(value.trim().to_string());
            match key.trim().replace('-', "_").as_str() {
                "lambda_grid" => s.lambda_grid = value,
                "scheduler" | "schedulers" => s.scheduler = value,
                "attacker" => s.attacker = value,
                "omega" => s.omega = value,
                "horizon" => s.horizon = value,
                "trials" => s.trials = value,
                "seed" => s.seed = value,
                "out" => s.out = value,
                other => return Err(LeakError::Config(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings> {
        Settings::parse_config(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `self` win over `fallback`.
    pub fn over(self, fallback: Settings) -> Settings {
        Settings {
            lambda_grid: self.lambda_grid.or(fallback.lambda_grid),
            scheduler: self.scheduler.or(fallback.scheduler),
            attacker: self.attacker.or(fallback.attacker),
            omega: self.omega.or(fallback.omega),
            horizon: self.horizon.or(fallback.horizon),
            trials: self.trials.or(fallback.trials),
            seed: self.seed.or(fallback.seed),
            out: self.out.or(fallback.out),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub mode: Mode,
    /// Explicit grid; `None` means each scheme's default grid.
    pub lambda_grid: Option<Vec<f64>>,
    pub schemes: Vec<Scheme>,
    pub attacker: Option<AttackStrategy>,
    pub omega: Option<f64>,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Grid used for exact curves when none is given.
pub fn default_exact_grid() -> Vec<f64> {
    linear_grid(0.01, 0.95, 0.01).expect("valid default grid")
}

/// Grid used for the bound curves when none is given.
pub fn default_bound_grid() -> Vec<f64> {
    linear_grid(0.01, 0.49, 0.01).expect("valid default grid")
}

fn tidy(x: f64) -> f64 {
    (x * 1e10).round() / 1e10
}

/// `start, start + step, ...` up to and including `stop` (within rounding).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(LeakError::Config(format!("bad grid {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| tidy(start + i as f64 * step)).collect())
}

/// Parses `start:stop:step` or a comma-separated list.
pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| LeakError::Config(format!("not a number in lambda grid: {t:?}")))
    };
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(LeakError::Config(format!("grid range must be start:stop:step, got {s:?}")));
        }
        linear_grid(num(parts[0])?, num(parts[1])?, num(parts[2])?)?
    } else {
        s.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    validate_grid(&grid)?;
    Ok(grid)
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(LeakError::Config("empty lambda grid".into()));
    }
    if let Some(bad) = grid.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(LeakError::Config(format!("lambda {bad} is outside (0, 1)")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LeakError::Config("lambda grid must be strictly increasing".into()));
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(name: &str, v: &Option<String>) -> Result<Option<T>> {
    v.as_deref()
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| LeakError::Config(format!("invalid {name}: {s:?}")))
        })
        .transpose()
}

fn parse_schemes(s: &str) -> Result<Vec<Scheme>> {
    let mut out: Vec<Scheme> = s
        .split(',')
        .map(|t| Scheme::parse(t).ok_or_else(|| LeakError::Config(format!("unknown scheduler {t:?}"))))
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

impl ExperimentSpec {
    /// Applies precedence `cli > file > defaults` and validates the result.
    pub fn resolve(mode: Mode, cli: Settings, file: Settings) -> Result<ExperimentSpec> {
        let s = cli.over(file);
        let default_schemes: Vec<Scheme> = match mode {
            Mode::Empirical => vec![Scheme::Fcfs, Scheme::Lqf, Scheme::RoundRobin, Scheme::WcTdma],
            _ => Scheme::ALL.to_vec(),
        };
        let (default_horizon, default_trials) = match mode {
            Mode::Empirical => (200_000, 4),
            _ => (100_000, 1),
        };
        let lambda_grid = match (&s.lambda_grid, mode) {
            (Some(g), _) => Some(parse_lambda_grid(g)?),
            (None, Mode::Empirical) => Some(vec![0.1, 0.25, 0.4]),
            (None, _) => None,
        };
        let omega = parse_num::<f64>("omega", &s.omega)?;
        let attacker = s
            .attacker
            .as_deref()
            .map(|a| AttackStrategy::parse(a, omega).ok_or_else(|| LeakError::Config(format!("unknown attacker {a:?}"))))
            .transpose()?;
        let spec = ExperimentSpec {
            mode,
            lambda_grid,
            schemes: match &s.scheduler {
                Some(v) => parse_schemes(v)?,
                None => default_schemes,
            },
            attacker,
            omega,
            horizon: parse_num("horizon", &s.horizon)?.unwrap_or(default_horizon),
            trials: parse_num("trials", &s.trials)?.unwrap_or(default_trials),
            seed: parse_num("seed", &s.seed)?.unwrap_or(DEFAULT_SEED),
            out: s.out.map(PathBuf::from),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(grid) = &self.lambda_grid {
            validate_grid(grid)?;
            if self.mode != Mode::Verify {
                for scheme in &self.schemes {
                    if scheme.is_bound() {
                        if let Some(bad) = grid.iter().find(|&&l| l >= 0.5) {
                            return Err(LeakError::Config(format!(
                                "{} is only available for lambda < 0.5, grid contains {bad}",
                                scheme.name()
                            )));
                        }
                    }
                }
            }
        }
        if self.schemes.is_empty() {
            return Err(LeakError::Config("no schedulers selected".into()));
        }
        if self.horizon == 0 {
            return Err(LeakError::Config("horizon must be positive".into()));
        }
        if self.trials == 0 {
            return Err(LeakError::Config("trials must be positive".into()));
        }
        Ok(())
    }

    /// Grid for one scheme: the explicit grid, or the scheme's default.
    pub fn grid_for(&self, scheme: Scheme) -> Vec<f64> {
        match &self.lambda_grid {
            Some(g) => g.clone(),
            None if scheme.is_bound() => default_bound_grid(),
            None => default_exact_grid(),
        }
    }

    /// The resolved configuration as `key=value` pairs, in a fixed order.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("mode", self.mode.name().to_string());
        m.insert(
            "lambda_grid",
            match &self.lambda_grid {
                Some(g) => g.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","),
                None => "default (exact 0.01:0.95:0.01, bounds 0.01:0.49:0.01)".to_string(),
            },
        );
        m.insert("scheduler", self.schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(","));
        m.insert("attacker", self.attacker.map(|a| a.name()).unwrap_or_else(|| "default".into()));
        m.insert("omega", self.omega.map(|o| o.to_string()).unwrap_or_else(|| "default".into()));
        m.insert("horizon", self.horizon.to_string());
        m.insert("trials", self.trials.to_string());
        m.insert("seed", self.seed.to_string());
        m.insert("units", "bits_per_slot".into());
        m
    }
}
