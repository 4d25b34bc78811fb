use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: row {row}, column '{column}': {message}")]
    Parse {
        file: String,
        row: u64,
        column: String,
        message: String,
    },

    #[error("{file}: expected {expected} hourly rows for year {year}, found {found}")]
    RowCount {
        file: String,
        year: i32,
        expected: usize,
        found: usize,
    },

    #[error("{file}: row {row}: capacity factor {value} outside [0, 1]")]
    CapacityFactor { file: String, row: u64, value: f64 },

    #[error("invalid hourly series: {0}")]
    Series(String),

    #[error("invalid tariff schedule: {0}")]
    Tariff(String),

    #[error("hour {hour} out of range (year has {hours} hours)")]
    HourOutOfRange { hour: usize, hours: usize },

    #[error("invalid site specification: {0}")]
    Spec(String),

    #[error("power {power} MW outside operating range [0, {capacity}] MW")]
    PowerOutOfRange { power: f64, capacity: f64 },

    #[error("target rate {target} kg/h exceeds maximum producible rate {max} kg/h")]
    RateUnreachable { target: f64, max: f64 },

    #[error("invalid decision matrix: {0}")]
    Matrix(String),

    #[error("criterion '{criterion}' is undefined for alternative '{alternative}'")]
    UndefinedKpi {
        alternative: String,
        criterion: String,
    },

    #[error("ranking: {0}")]
    Ranking(String),

    #[error("invalid study configuration: {0}")]
    Config(String),

    #[error("experiment {id}, step '{step}': {source}")]
    Step {
        id: String,
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_step(self, id: &str, step: &'static str) -> Self {
        Error::Step {
            id: id.to_string(),
            step,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
