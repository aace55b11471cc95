//! Scenario registry, parameter sweeps and result emission.

mod config;
mod output;
mod scenario;
mod sweep;

pub use config::RunConfig;
pub use output::{format_sig, write_csv, write_json, CSV_COLUMNS};
pub use scenario::{
    all_scenarios, scenario, DecayTimes, Expectation, Grid, Scenario, CROSSTALK_LEVELS,
    DECAY_SCALES, DEFAULT_THETA_STEPS, SCENARIO_IDS,
};
pub use sweep::{
    average_fidelity, check_expectations, grid_points, minimum_fidelity, run_crosstalk_sweep,
    run_inhomogeneity_sweep, run_point, run_sweep, run_theta_sweep, scenario_inputs, summarize,
    CheckOutcome, GridPoint, PointSummary, SweepMetadata, SweepOptions, SweepResult, SweepRow,
};
