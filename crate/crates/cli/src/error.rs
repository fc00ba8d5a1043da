use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("step {step} at t = {time:e}")]
    Solver {
        step: usize,
        time: f64,
        #[source]
        source: isoflow::Error,
    },
    #[error(transparent)]
    Core(#[from] isoflow::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
