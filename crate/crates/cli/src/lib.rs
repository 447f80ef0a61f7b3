//! Experiment harness for piecewise-affine interpolation on shifted and
//! scaled Kuhn triangulations: configuration, execution and report files.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod config;
pub mod output;
pub mod run;

pub use config::{Command, ConfigError, OutputPaths, RunConfig, Tolerances};
pub use output::{convergence_svg, write_outputs, WrittenFiles};
pub use run::{execute, Check, Relation, Results, RunError, RunReport};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "PWAFFINE_THREADS";

/// Exit status when every configured tolerance passes.
pub const EXIT_PASS: i32 = 0;
/// Exit status for runtime failures such as exhausted sampling.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit status for an unreadable or invalid configuration.
pub const EXIT_INVALID_CONFIG: i32 = 2;
/// Exit status when a configured tolerance fails.
pub const EXIT_TOLERANCE: i32 = 3;
