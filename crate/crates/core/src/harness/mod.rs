//! Scenario files, the closed-loop simulation driver and its outputs.

mod builtin;
mod csv;
mod scenario;
mod simulate;

pub use builtin::{
    accurate, actuator_additive, actuator_multiplicative, biased, builtin, builtin_scenarios, fading, noisy,
    standard_controller, standard_rbf, process_change, zero_sanity, LearningRate, ACCURATE_BOUND, BIAS_MEASUREMENT_SLACK,
    BIAS_TRACKING_BAND, DEFAULT_DT, DEFAULT_LOG_EVERY, DEFAULT_SEED, DEFAULT_T_END, FAULT_BOUND,
    NOISE_BOUND_HIGH_RATE, NOISE_BOUND_LOW_RATE,
};
pub use csv::{csv_header, emit_plot_script, export_csv, parse_csv, plot_script, read_csv, to_csv_string, CsvError, CsvSeries};
pub use scenario::{Built, CheckThresholds, Scenario, ScenarioError};
pub use simulate::{simulate, simulate_built, Event, LogRow, RunLog, SimError, Summary};
