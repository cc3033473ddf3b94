//! Simulation harness: run configuration, Monte Carlo sweeps and CSV output.

mod config;
mod report;
mod sweep;

pub use config::{
    inverse_to_string, parse_config_file, parse_inverse, parse_linear_detector, parse_scheme,
    parse_snr_list, Detector, SimConfig,
};
pub use report::{format_float, write_diag_csv, write_metrics_csv, write_radius_csv};
pub use sweep::{run_diagnostics, run_linear_sweep, run_radius_study, run_sd_sweep, DiagRow, MetricsRecord};
