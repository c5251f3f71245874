use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LeakError {
    #[error("{name} = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("observation is not a nonstop-monitoring trace: A[{index}] = {arrival} but D[{prev}] = {departure}")]
    NotNonstop {
        index: usize,
        prev: usize,
        arrival: u64,
        departure: u64,
    },

    #[error("inconsistent observation: {0}")]
    Inconsistent(String),

    #[error("unsupported scheduler/attacker pair: {0}")]
    Unsupported(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for LeakError {
    fn from(e: std::io::Error) -> Self {
        LeakError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LeakError>;

pub(crate) fn check_prob(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(LeakError::Domain {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(LeakError::Domain {
            name,
            value,
            range: "(0, 1)",
        })
    }
}
