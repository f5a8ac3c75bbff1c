use std::path::PathBuf;

use qobs_core::clock::ClockError;
use qobs_core::glianet::GlianetError;
use qobs_core::minisuperspace::MiniSuperspaceError;
use qobs_core::oracle::OracleError;
use qobs_core::wkb::WkbError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<ClockError> for CliError {
    fn from(e: ClockError) -> Self {
        match e {
            ClockError::InvalidParameter(_) | ClockError::InvalidDensity(_) | ClockError::NoCoherence => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<WkbError> for CliError {
    fn from(e: WkbError) -> Self {
        match e {
            WkbError::InvalidParameter(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::InvalidParameter(_) | OracleError::InvalidPotential(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<GlianetError> for CliError {
    fn from(e: GlianetError) -> Self {
        match e {
            GlianetError::InvalidParameter(_)
            | GlianetError::ShapeMismatch(_)
            | GlianetError::TooLarge(_)
            | GlianetError::NotSpinState(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<MiniSuperspaceError> for CliError {
    fn from(e: MiniSuperspaceError) -> Self {
        match e {
            MiniSuperspaceError::InvalidParameter(_)
            | MiniSuperspaceError::EuclideanRegion { .. }
            | MiniSuperspaceError::NonPositiveLapse { .. }
            | MiniSuperspaceError::NotHermitian { .. }
            | MiniSuperspaceError::NotNormalized(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
