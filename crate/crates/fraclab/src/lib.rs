//! Experiment runner for the `fraclab-core` numerics: configuration,
//! landscape registry, parallel sweeps and CSV/JSON emission with a
//! SHA-256 manifest.

pub mod config;
pub mod experiments;
pub mod landscape;
pub mod output;
pub mod parallel;
pub mod tools;

use config::ConfigError;
use fraclab_core::Error as CoreError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Process exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::Diverged { .. }
                | CoreError::QuadratureFailed { .. }
                | CoreError::NotPositiveDefinite { .. }
                | CoreError::NegativeEigenvalue { .. } => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            };
        }
    }
    1
}
