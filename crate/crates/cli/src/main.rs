use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use polarlab::harness::{config_from_manifest, run_scenario, ExperimentConfig, Scenario, StepLimit};
use polarlab::{Error, GraphKind, Metric};

/// Run a named DeGroot polarization experiment and write its CSVs, manifest
/// and summary log.
#[derive(Debug, Parser)]
#[command(name = "polarlab", version)]
struct Args {
    /// fig1_metrics_vs_time, fig2_profiles, fig3_bimodality_runs,
    /// fig4_bimodality_by_k, fig5_local_snapshots, fig6_agreement_vs_lambda2,
    /// table_ensemble_stats or custom. Optional with --config.
    scenario: Option<Scenario>,

    /// Replay the config stored in a manifest.json; other flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Graph spec such as sbm:k=5,n=1000,p=0.1,q=0.01, geometric:n=1000,r=0.1,
    /// regular:n=500,d=8 or edgelist:PATH. Repeatable; replaces the defaults.
    #[arg(long = "graph", value_name = "SPEC")]
    graphs: Vec<GraphKind>,

    /// Directory whose files are loaded as edge-list networks.
    #[arg(long)]
    edge_list_dir: Option<PathBuf>,

    /// Standard-normal initial opinion vectors per graph.
    #[arg(long)]
    inits: Option<usize>,

    /// Issues tracked by fig2_profiles.
    #[arg(long)]
    issues: Option<usize>,

    /// Step count, or `auto` to stop at convergence.
    #[arg(long, value_name = "T|auto")]
    steps: Option<StepLimit>,

    /// Record every STRIDE-th step.
    #[arg(long)]
    stride: Option<usize>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Metric for the custom scenario. Repeatable.
    #[arg(long = "metric", value_name = "NAME")]
    metrics: Vec<Metric>,

    /// Convergence tolerance on the metric scale.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Consecutive steps that must stay within tolerance.
    #[arg(long)]
    window: Option<usize>,

    /// Step cap for auto-stopped runs.
    #[arg(long)]
    max_steps: Option<usize>,

    /// Block counts for fig4, comma separated.
    #[arg(long, value_delimiter = ',')]
    ks: Vec<usize>,

    /// Node counts for fig4, comma separated.
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<usize>,

    /// Graphs per block count for fig4.
    #[arg(long)]
    graphs_per_k: Option<usize>,

    /// Monte-Carlo trials of the Gaussian reference for fig4.
    #[arg(long)]
    gaussian_trials: Option<usize>,

    /// Intra-block edge probability for fig4.
    #[arg(long)]
    p: Option<f64>,

    /// Inter-block edge probability for fig4.
    #[arg(long)]
    q: Option<f64>,

    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    /// Log progress (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn build_config(args: Args) -> Result<ExperimentConfig, Error> {
    let mut cfg = match (&args.config, args.scenario) {
        (Some(path), scenario) => {
            let mut cfg = config_from_manifest(path)?;
            if let Some(s) = scenario.filter(|s| *s != cfg.scenario) {
                return Err(Error::Parameter(format!(
                    "manifest is for {}, not {s}",
                    cfg.scenario
                )));
            }
            cfg.out_dir = args.out.clone();
            cfg
        }
        (None, Some(scenario)) => ExperimentConfig::for_scenario(scenario, args.out.clone()),
        (None, None) => {
            return Err(Error::Parameter("a scenario or --config is required".into()));
        }
    };
    if !args.graphs.is_empty() {
        cfg.graphs = args.graphs;
    }
    if let Some(dir) = args.edge_list_dir {
        cfg.edge_list_dir = Some(dir);
    }
    if !args.metrics.is_empty() {
        cfg.metrics = args.metrics;
    }
    if !args.ks.is_empty() {
        cfg.curve.ks = args.ks;
    }
    if !args.nodes.is_empty() {
        cfg.curve.node_counts = args.nodes;
    }
    macro_rules! set {
        ($($field:expr => $value:expr),* $(,)?) => {
            $(if let Some(v) = $value { $field = v; })*
        };
    }
    set! {
        cfg.inits => args.inits,
        cfg.issues => args.issues,
        cfg.steps => args.steps,
        cfg.stride => args.stride,
        cfg.seed => args.seed,
        cfg.convergence.epsilon => args.epsilon,
        cfg.convergence.window => args.window,
        cfg.convergence.max_steps => args.max_steps,
        cfg.curve.graphs_per_k => args.graphs_per_k,
        cfg.curve.gaussian_trials => args.gaussian_trials,
        cfg.curve.p => args.p,
        cfg.curve.q => args.q,
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parameter(_) | Error::Parse { .. } | Error::UnknownMetric(_) => 2,
        Error::CheckFailed(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = build_config(args).and_then(|cfg| run_scenario(&cfg));
    match result {
        Ok(report) => {
            for c in &report.checks {
                println!("PASS {} ({})", c.name, c.detail);
            }
            println!("wrote {}", report.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("polarlab: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
