use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty population")]
    EmptyPopulation,

    #[error("invalid tolerance override: min {min} > max {max}")]
    InvalidTolerance { min: f64, max: f64 },

    #[error("no rule fired")]
    NoRuleFired,

    #[error("insufficient points for regression")]
    InsufficientPoints,

    #[error("empty sample")]
    EmptySample,

    #[error("size {0} g outside histogram range [0, 40]")]
    SizeOutOfRange(f64),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("experiment {config} failed: {source}")]
    Experiment {
        config: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
