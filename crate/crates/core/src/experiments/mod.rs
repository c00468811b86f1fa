//! Scenario files, Monte-Carlo batches, the local-method pipeline and result
//! emission.

pub mod montecarlo;
pub mod pipeline;
pub mod report;
pub mod scenario;

pub use montecarlo::{run_all, run_monte_carlo, workers_from_env, MonteCarloOptions, ResultTable, RunRecord, ScenarioResult, WORKERS_ENV};
pub use pipeline::{run_local_pipeline, LocalConfig, LocalReport};
pub use report::{csv_string, emit_results, read_csv, scatter_svg, write_csv, OutputFormat, CSV_FILE};
pub use scenario::{default_scenarios, load_scenarios, parse_scenarios, Method, NoiseSite, Scenario, DEFAULT_SCENARIOS, SCHEMA_VERSION};
