use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sample {group} has {len} observations, at least {min} are required")]
    SampleTooSmall {
        group: &'static str,
        len: usize,
        min: usize,
    },

    #[error("non-finite value {value} at position {index} of sample {group}")]
    NonFinite {
        group: &'static str,
        index: usize,
        value: f64,
    },

    #[error(
        "exact enumeration needs {required} label assignments, above the cap of {cap}; use Monte Carlo mode"
    )]
    EnumerationCap { required: u128, cap: u64 },

    #[error("no built-in critical values for (m, n) = ({m}, {n}) at alpha = {alpha}; use a fresh permutation cutoff instead")]
    MissingTableEntry { m: usize, n: usize, alpha: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
