//! Named experiments, convergence detection, ensemble statistics and file
//! output.

mod config;
mod convergence;
mod runs;
mod scenario;
mod stats;

pub use config::{default_fig6_graphs, CurveSettings, ExperimentConfig, Scenario, StepLimit};
pub use convergence::{iterations_to_convergence, ConvergenceCriterion, Settle};
pub use runs::{
    csv_field, fig6_scatter, graph_labels, node_snapshots, prepare_graph, run_metrics, run_profiles,
    run_spread, Fig6Row, MetricRun, NodeSnapshot, PreparedGraph, ProfileRun, SpreadPoint, SpreadRun,
    FIG6_CSV_HEADER,
};
pub use scenario::{
    config_from_manifest, edge_list_files, execute, run_scenario, thread_cap, Check, GraphSeed,
    OutputFile, RunReport, ScenarioOutcome, THREADS_ENV,
};
pub use stats::{
    ensemble_stats, ln_gamma, pearson, quantile_sorted, regularized_incomplete_beta,
    student_t_two_sided, Correlation, EnsembleStats,
};
