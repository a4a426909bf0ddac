//! Config-driven front end: one config file describes one run, whose
//! results land in an output directory as `run.json`, CSV tables and KWF1
//! field dumps. Exit status 0 means converged or valid, 2 not converged,
//! 1 error.

mod config;
mod run;

pub use config::{
    parse_config, parse_config_file, Alpha0Config, Command, DomainConfig, KConfig,
    ManufactureConfig, MountainPassConfig, RunConfig, SolverConfig,
};
pub use run::{main_with_args, run, RunOutcome, EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK};
