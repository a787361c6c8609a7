use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::runs::{
    csv_field, graph_labels, node_snapshots, prepare_graph, run_metrics, run_profiles, run_spread,
    Fig6Row, PreparedGraph, FIG6_CSV_HEADER,
};
use super::stats::{ensemble_stats, pearson};
use super::{ExperimentConfig, Scenario};
use crate::dynamics::standard_normal;
use crate::equilibrium::{agreement_from_lambda2, sbm_bimodality_curve, CurveParams, CURVE_CSV_HEADER};
use crate::error::{Error, Result};
use crate::graph::{validate, GraphKind};
use crate::metrics::{bimodality, local_agreement, sign_of_deviation, Metric};
use crate::seed::derive_seed;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "POLARLAB_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSeed {
    pub graph: String,
    pub seed: Option<u64>,
}

/// Everything a scenario produced, before anything touches the disk.
#[derive(Debug, Clone, Default)]
pub struct ScenarioOutcome {
    pub files: Vec<OutputFile>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub graph_seeds: Vec<GraphSeed>,
    pub summary: Map<String, Value>,
}

impl ScenarioOutcome {
    fn absorb(&mut self, p: &PreparedGraph) {
        self.notes.extend(p.notes.iter().cloned());
        self.graph_seeds.push(GraphSeed { graph: p.label.clone(), seed: p.seed });
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Paths written by [`run_scenario`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub checks: Vec<Check>,
}

fn init_seed(cfg: &ExperimentConfig, graph: usize, run: usize) -> u64 {
    derive_seed(cfg.seed, &format!("{}/init/{graph}", cfg.scenario.id()), run as u64)
}

fn prepare_all(cfg: &ExperimentConfig, kinds: &[GraphKind]) -> Result<Vec<PreparedGraph>> {
    let labels = graph_labels(kinds);
    kinds
        .par_iter()
        .zip(labels.par_iter())
        .enumerate()
        .map(|(i, (kind, label))| prepare_graph(kind, label, cfg.seed, cfg.scenario.id(), i))
        .collect()
}

/// Prediction usable as a convergence target.
fn target(p: &PreparedGraph, metric: Metric) -> Option<f64> {
    if p.spectral.degenerate {
        None
    } else {
        metric.evaluate(&p.graph, &p.spectral.sbar_star).ok()
    }
}

fn spectral_json(p: &PreparedGraph) -> Value {
    let s = &p.spectral;
    json!({
        "graph": p.label,
        "nodes": p.graph.node_count(),
        "edges": p.graph.edge_count(),
        "lambda1": s.lambda1,
        "lambda2": s.lambda2,
        "lambda3": s.lambda3,
        "gap1": s.gap1,
        "gap2": s.gap2,
        "degenerate": s.degenerate,
        "residuals": s.residuals,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Runs `cfg` in memory: every output file, check and summary entry.
pub fn execute(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Fig1MetricsVsTime => fig1(cfg),
        Scenario::Fig2Profiles => fig2(cfg),
        Scenario::Fig3BimodalityRuns => fig3(cfg),
        Scenario::Fig4BimodalityByK => fig4(cfg),
        Scenario::Fig5LocalSnapshots => fig5(cfg),
        Scenario::Fig6AgreementVsLambda2 => fig6(cfg),
        Scenario::TableEnsembleStats => table(cfg),
        Scenario::Custom => custom(cfg),
    }
}

fn fig1(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let prepared = prepare_all(cfg, &cfg.graphs)?;
    let runs = prepared
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let z0 = standard_normal(p.graph.node_count(), init_seed(cfg, i, 0));
            run_spread(&p.graph, &z0, target(p, Metric::LocalAgreement), cfg.steps, &cfg.convergence, cfg.stride)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = ScenarioOutcome::default();
    let mut csv = String::from("graph,t,std,local_agreement\n");
    let mut per_graph = Vec::new();
    for (p, run) in prepared.iter().zip(&runs) {
        out.absorb(p);
        let label = csv_field(&p.label);
        for pt in &run.points {
            writeln!(csv, "{label},{},{},{}", pt.t, pt.std, opt(pt.local_agreement)).unwrap();
        }
        let (initial, fin) = (run.initial_agreement, run.final_agreement);
        // Regular graphs serve as the standard-deviation control. A random
        // regular graph can have a negative dominant eigenvalue, where local
        // agreement settles below 1/2, so the rise is checked elsewhere.
        let regular = validate(&p.graph).regular.is_some();
        if !regular {
            out.checks.push(Check {
                name: format!("{}: local agreement rises by more than 0.1", p.label),
                passed: matches!((initial, fin), (Some(a), Some(b)) if b > a + 0.1),
                detail: format!("initial {}, final {}", opt(initial), opt(fin)),
            });
        } else {
            out.checks.push(Check {
                name: format!("{}: std non-increasing on a regular graph", p.label),
                passed: run.max_std_increase <= 1e-9,
                detail: format!("largest one-step increase {:e}", run.max_std_increase),
            });
        }
        per_graph.push(json!({
            "graph": p.label,
            "initial_local_agreement": initial,
            "final_local_agreement": fin,
            "predicted_local_agreement": target(p, Metric::LocalAgreement),
            "settled_at": run.settled_at,
            "final_t": run.points.last().map(|pt| pt.t),
            "regular": regular,
            "spectral": spectral_json(p),
        }));
    }
    out.files.push(OutputFile { name: "fig1.csv".into(), contents: csv });
    out.summary.insert("graphs".into(), Value::Array(per_graph));
    Ok(out)
}

fn fig2(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let prepared = prepare_all(cfg, &cfg.graphs)?;
    let runs = prepared
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let inits: Vec<Vec<f64>> = (0..cfg.issues)
                .map(|j| standard_normal(p.graph.node_count(), init_seed(cfg, i, j)))
                .collect();
            let expected = (!p.spectral.degenerate).then(|| sign_of_deviation(&p.spectral.sbar_star));
            run_profiles(&p.graph, &inits, expected.as_deref(), cfg.steps, &cfg.convergence, cfg.stride)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = ScenarioOutcome::default();
    let mut csv = String::from("graph,t,profile,count\n");
    let mut per_graph = Vec::new();
    for (p, run) in prepared.iter().zip(&runs) {
        out.absorb(p);
        let label = csv_field(&p.label);
        for (t, hist) in &run.snapshots {
            for (profile, count) in hist {
                writeln!(csv, "{label},{t},{profile},{count}").unwrap();
            }
        }
        let finals: Map<String, Value> = run
            .final_profiles()
            .into_iter()
            .map(|(k, c)| (k.to_string(), json!(c)))
            .collect();
        per_graph.push(json!({
            "graph": p.label,
            "issues": cfg.issues,
            "first_aligned_t": run.first_aligned,
            "aligned_since_t": run.aligned_since,
            "stayed_aligned": run.stayed_aligned,
            "final_t": run.final_t,
            "final_profiles": finals,
        }));
    }
    out.files.push(OutputFile { name: "fig2.csv".into(), contents: csv });
    out.summary.insert("graphs".into(), Value::Array(per_graph));
    Ok(out)
}

fn fig3(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let prepared = prepare_all(cfg, &cfg.graphs[..1])?;
    if cfg.graphs.len() > 1 {
        log::warn!("fig3 uses only the first graph");
    }
    let p = &prepared[0];
    let predicted = target(p, Metric::Bimodality);
    let runs = (0..cfg.inits)
        .into_par_iter()
        .map(|run| {
            let z0 = standard_normal(p.graph.node_count(), init_seed(cfg, 0, run));
            run_metrics(&p.graph, &z0, &[Metric::Bimodality], &[predicted], cfg.steps, &cfg.convergence, cfg.stride)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = ScenarioOutcome::default();
    out.absorb(p);
    let mut csv = String::from("run,t,bimodality\n");
    let mut finals = Vec::new();
    for (run, r) in runs.iter().enumerate() {
        for &(t, v) in &r.series[0].points {
            writeln!(csv, "{run},{t},{}", opt(v)).unwrap();
        }
        finals.push(r.series[0].last_value());
    }
    let spread = finals
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    out.files.push(OutputFile { name: "fig3.csv".into(), contents: csv });
    out.summary.insert("graph".into(), json!(p.label));
    out.summary.insert(
        "predicted_bimodality".into(),
        json!(bimodality(&p.spectral.sbar_star).ok()),
    );
    out.summary.insert("degenerate".into(), json!(p.spectral.degenerate));
    out.summary.insert("final_bimodality".into(), json!(finals));
    out.summary.insert("final_spread".into(), json!(spread.1 - spread.0));
    out.summary.insert(
        "settled_at".into(),
        json!(runs.iter().map(|r| r.settled_at[0]).collect::<Vec<_>>()),
    );
    out.summary.insert("spectral".into(), spectral_json(p));
    Ok(out)
}

fn fig4(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let c = &cfg.curve;
    let mut rows = Vec::new();
    for &n in &c.node_counts {
        rows.extend(sbm_bimodality_curve(&CurveParams {
            ks: c.ks.clone(),
            n,
            p: c.p,
            q: c.q,
            graphs_per_k: c.graphs_per_k,
            gaussian_trials: c.gaussian_trials,
            seed: cfg.seed,
        })?);
    }
    rows.sort_by_key(|r| (r.n, r.k));
    let mut out = ScenarioOutcome::default();
    let mut csv = format!("{CURVE_CSV_HEADER}\n");
    for r in &rows {
        csv.push_str(&r.csv_line());
        csv.push('\n');
        if r.skipped > 0 {
            out.notes.push(format!(
                "k={}, n={}: skipped {} degenerate graphs",
                r.k, r.n, r.skipped
            ));
        }
    }
    out.files.push(OutputFile { name: "fig4.csv".into(), contents: csv });
    out.summary.insert("rows".into(), serde_json::to_value(&rows).expect("rows serialize"));
    Ok(out)
}

const FIG5_EARLY_STEP: usize = 5;

fn fig5(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let prepared = prepare_all(cfg, &cfg.graphs)?;
    let snaps = prepared
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let z0 = standard_normal(p.graph.node_count(), init_seed(cfg, i, 0));
            node_snapshots(
                &p.graph,
                &z0,
                &[0, FIG5_EARLY_STEP],
                target(p, Metric::LocalAgreement),
                cfg.steps,
                &cfg.convergence,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = ScenarioOutcome::default();
    let mut csv = String::from("graph,phase,node,agree_frac,side,x,y\n");
    let mut per_graph = Vec::new();
    for (p, snaps) in prepared.iter().zip(&snaps) {
        out.absorb(p);
        let label = csv_field(&p.label);
        let coords = p.graph.coordinates();
        let mut high = Map::new();
        for (k, s) in snaps.iter().enumerate() {
            let phase = match k {
                0 => "initial".to_string(),
                1 => format!("t{FIG5_EARLY_STEP}"),
                _ => "equilibrium".to_string(),
            };
            for node in 0..s.agree_frac.len() {
                let (x, y) = coords
                    .map(|c| (c[node][0].to_string(), c[node][1].to_string()))
                    .unwrap_or_default();
                writeln!(csv, "{label},{phase},{node},{},{},{x},{y}", s.agree_frac[node], s.side[node]).unwrap();
            }
            let share = s.agree_frac.iter().filter(|&&a| a >= 2.0 / 3.0).count() as f64
                / s.agree_frac.len() as f64;
            high.insert(phase, json!(share));
        }
        per_graph.push(json!({
            "graph": p.label,
            "equilibrium_t": snaps.last().map(|s| s.t),
            "share_at_least_two_thirds": high,
        }));
    }
    out.files.push(OutputFile { name: "fig5.csv".into(), contents: csv });
    out.summary.insert("graphs".into(), Value::Array(per_graph));
    Ok(out)
}

fn fig6(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let prepared = prepare_all(cfg, &cfg.graphs)?;
    let mut out = ScenarioOutcome::default();
    let mut csv = format!("{FIG6_CSV_HEADER}\n");
    let mut rows = Vec::new();
    for p in &prepared {
        out.absorb(p);
        let row = Fig6Row::from_prepared(p)?;
        csv.push_str(&row.csv_line());
        csv.push('\n');
        rows.push(row);
    }
    let usable: Vec<&Fig6Row> = rows.iter().filter(|r| !r.degenerate).collect();
    let within = usable
        .iter()
        .filter(|r| (r.equilibrium_agreement - r.approx).abs() <= 0.05)
        .count();
    out.files.push(OutputFile { name: "fig6.csv".into(), contents: csv });
    out.summary.insert("graphs".into(), json!(rows.len()));
    out.summary.insert("non_degenerate".into(), json!(usable.len()));
    out.summary.insert("within_0.05_of_line".into(), json!(within));
    let xs: Vec<f64> = usable.iter().map(|r| r.lambda2).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.equilibrium_agreement).collect();
    if let Ok(c) = pearson(&xs, &ys) {
        out.summary.insert("pearson_lambda2_agreement".into(), json!(c));
    }
    Ok(out)
}

/// Edge-list files in `dir`, sorted by name; hidden files are ignored.
pub fn edge_list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::EmptyInput { path: dir.to_path_buf() });
    }
    Ok(files)
}

struct NetworkRow {
    label: String,
    values: Vec<(&'static str, f64)>,
    degenerate: bool,
    iterations: Option<f64>,
    inv_gap2: Option<f64>,
}

fn table(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let mut kinds = cfg.graphs.clone();
    if let Some(dir) = &cfg.edge_list_dir {
        kinds.extend(edge_list_files(dir)?.into_iter().map(GraphKind::EdgeList));
    }
    let prepared = prepare_all(cfg, &kinds)?;
    let rows = prepared
        .par_iter()
        .enumerate()
        .map(|(i, p)| -> Result<NetworkRow> {
            let s = &p.spectral;
            let mut values = vec![
                ("lambda2", s.lambda2),
                ("bimodality", bimodality(&s.sbar_star)?),
                ("local_agreement", local_agreement(&p.graph, &s.sbar_star)?),
                ("spectral_approx", agreement_from_lambda2(s.lambda2)),
            ];
            if let Some(g2) = s.gap2 {
                values.push(("gap2", g2));
            }
            let mut iterations = None;
            if cfg.inits > 0 && !s.degenerate {
                let goal = target(p, Metric::LocalAgreement);
                let mut total = 0.0;
                let mut complete = true;
                for run in 0..cfg.inits {
                    let z0 = standard_normal(p.graph.node_count(), init_seed(cfg, i, run));
                    let r = run_metrics(&p.graph, &z0, &[Metric::LocalAgreement], &[goal], super::StepLimit::Auto, &cfg.convergence, cfg.convergence.max_steps + 1)?;
                    match r.settled_at[0] {
                        Some(t) => total += t as f64,
                        None => complete = false,
                    }
                }
                if complete {
                    let mean = total / cfg.inits as f64;
                    values.push(("iterations", mean));
                    iterations = Some(mean);
                }
            }
            let inv_gap2 = s.gap2.filter(|g| *g > 0.0).map(|g| 1.0 / g);
            Ok(NetworkRow { label: p.label.clone(), values, degenerate: s.degenerate, iterations, inv_gap2 })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = ScenarioOutcome::default();
    let mut csv = String::from("network,metric,value\n");
    for (p, row) in prepared.iter().zip(&rows) {
        out.absorb(p);
        let label = csv_field(&row.label);
        for (metric, value) in &row.values {
            writeln!(csv, "{label},{metric},{value}").unwrap();
        }
        writeln!(csv, "{label},degenerate,{}", u8::from(row.degenerate)).unwrap();
    }
    out.files.push(OutputFile { name: "table.csv".into(), contents: csv });

    let usable: Vec<&NetworkRow> = rows.iter().filter(|r| !r.degenerate).collect();
    let skipped = rows.len() - usable.len();
    if skipped > 0 {
        out.notes.push(format!("{skipped} degenerate networks left out of the statistics"));
    }
    let mut stats_csv = String::from("metric,q1,median,q3,mean,std,count\n");
    let mut stats = Map::new();
    for metric in ["bimodality", "local_agreement", "lambda2", "spectral_approx", "iterations"] {
        let values: Vec<f64> = usable
            .iter()
            .filter_map(|r| r.values.iter().find(|(m, _)| *m == metric).map(|v| v.1))
            .collect();
        if let Ok(s) = ensemble_stats(&values) {
            writeln!(stats_csv, "{metric},{},{},{},{},{},{}", s.q1, s.median, s.q3, s.mean, s.std, s.count).unwrap();
            stats.insert(metric.into(), json!(s));
        }
    }
    out.files.push(OutputFile { name: "table_stats.csv".into(), contents: stats_csv });
    out.summary.insert("networks".into(), json!(rows.len()));
    out.summary.insert("stats".into(), Value::Object(stats));

    let la: Vec<f64> = usable.iter().map(|r| r.values[2].1).collect();
    let l2: Vec<f64> = usable.iter().map(|r| r.values[0].1).collect();
    if let Ok(c) = pearson(&l2, &la) {
        out.summary.insert("pearson_lambda2_agreement".into(), json!(c));
    }
    let pairs: Vec<(f64, f64)> = usable
        .iter()
        .filter_map(|r| Some((r.iterations?, r.inv_gap2?)))
        .collect();
    let (its, inv): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    if let Ok(c) = pearson(&its, &inv) {
        out.summary.insert("pearson_iterations_inverse_gap2".into(), json!(c));
    }
    out.summary.insert(
        "iterations_rule".into(),
        json!(format!(
            "mean over {} standard-normal inits of the first step where local agreement stays within {} of its predicted value for {} steps",
            cfg.inits, cfg.convergence.epsilon, cfg.convergence.window
        )),
    );
    Ok(out)
}

fn custom(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let prepared = prepare_all(cfg, &cfg.graphs)?;
    let metrics = if cfg.metrics.is_empty() { Metric::GROUP_BASED.to_vec() } else { cfg.metrics.clone() };
    let cells: Vec<(usize, usize)> = (0..prepared.len())
        .flat_map(|g| (0..cfg.inits).map(move |r| (g, r)))
        .collect();
    let runs = cells
        .par_iter()
        .map(|&(gi, run)| {
            let p = &prepared[gi];
            let targets: Vec<Option<f64>> = metrics
                .iter()
                .map(|&m| if m.is_group_based() { target(p, m) } else { None })
                .collect();
            let z0 = standard_normal(p.graph.node_count(), init_seed(cfg, gi, run));
            run_metrics(&p.graph, &z0, &metrics, &targets, cfg.steps, &cfg.convergence, cfg.stride)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = ScenarioOutcome::default();
    prepared.iter().for_each(|p| out.absorb(p));
    let mut csv = String::from("graph,run,t,metric,value\n");
    for (&(gi, run), r) in cells.iter().zip(&runs) {
        let label = csv_field(&prepared[gi].label);
        for s in &r.series {
            for &(t, v) in &s.points {
                writeln!(csv, "{label},{run},{t},{},{}", s.metric, opt(v)).unwrap();
            }
        }
    }
    out.files.push(OutputFile { name: "custom.csv".into(), contents: csv });
    let predictions: Vec<Value> = prepared
        .iter()
        .map(|p| {
            let predicted: Map<String, Value> = metrics
                .iter()
                .filter(|m| m.is_group_based())
                .map(|m| (m.id().to_string(), json!(m.evaluate(&p.graph, &p.spectral.sbar_star).ok())))
                .collect();
            json!({ "graph": p.label, "predicted": predicted, "spectral": spectral_json(p) })
        })
        .collect();
    out.summary.insert("graphs".into(), Value::Array(predictions));
    Ok(out)
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Parameter(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn summary_log(cfg: &ExperimentConfig, out: &ScenarioOutcome) -> String {
    let mut log = format!("scenario {}\nseed {}\n", cfg.scenario, cfg.seed);
    for f in &out.files {
        writeln!(log, "wrote {}", f.name).unwrap();
    }
    for n in &out.notes {
        writeln!(log, "note: {n}").unwrap();
    }
    for c in &out.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        writeln!(log, "{status} {} ({})", c.name, c.detail).unwrap();
    }
    let summary = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
    writeln!(log, "summary {summary}").unwrap();
    log
}

/// Runs the scenario and writes its CSVs, `manifest.json` and `summary.log`
/// into `cfg.out_dir`. Output files are written even when a runtime check
/// fails; the failure is then reported as [`Error::CheckFailed`].
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let started = Instant::now();
    let outcome = match thread_cap()? {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(|| execute(cfg))?,
        None => execute(cfg)?,
    };
    let wall = started.elapsed().as_secs_f64();

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let mut files = Vec::new();
    for f in &outcome.files {
        let path = cfg.out_dir.join(&f.name);
        write(&path, &f.contents)?;
        files.push(path);
    }
    let manifest = json!({
        "tool": "polarlab",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": cfg.scenario,
        "config": cfg,
        "seeds": {
            "master": cfg.seed,
            "rule": "graph seed = derive_seed(master, scenario, graph index); init seed = derive_seed(master, scenario/init/graph index, run)",
            "graphs": outcome.graph_seeds,
        },
        "files": outcome.files.iter().map(|f| f.name.as_str()).collect::<Vec<_>>(),
        "checks": outcome.checks,
        "notes": outcome.notes,
        "summary": outcome.summary,
        "wall_time_secs": wall,
    });
    let manifest_path = cfg.out_dir.join("manifest.json");
    write(&manifest_path, &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    write(&cfg.out_dir.join("summary.log"), &summary_log(cfg, &outcome))?;
    log::info!("{} finished in {wall:.2}s", cfg.scenario);

    let failed: Vec<String> = outcome.failed_checks().iter().map(|c| format!("{} ({})", c.name, c.detail)).collect();
    if !failed.is_empty() {
        return Err(Error::CheckFailed(failed.join("; ")));
    }
    Ok(RunReport { out_dir: cfg.out_dir.clone(), files, manifest: manifest_path, checks: outcome.checks })
}

/// Reads the config echoed in a manifest written by [`run_scenario`].
pub fn config_from_manifest(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parameter(format!("{}: invalid JSON: {e}", path.display())))?;
    let config = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(config)
        .map_err(|e| Error::Parameter(format!("{}: invalid config: {e}", path.display())))
}
