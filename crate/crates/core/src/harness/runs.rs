//! Simulation drivers shared by the scenarios and usable on their own.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{ConvergenceCriterion, Settle, StepLimit};
use crate::dynamics::DeviationDynamics;
use crate::equilibrium::agreement_from_lambda2;
use crate::error::{Error, Result};
use crate::graph::{largest_component, validate, Graph, GraphKind};
use crate::metrics::{
    alignment_reached, local_agreement, node_local_agreement, profile_histogram, profile_matrix,
    sign_of_deviation, Metric, MetricSeries,
};
use crate::seed::derive_seed;
use crate::spectral::{top_eigenpairs, EigenOptions, SpectralSummary};

/// A built, connected graph with its spectral summary.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub label: String,
    pub graph: Graph,
    /// Generator seed; `None` for edge lists.
    pub seed: Option<u64>,
    pub spectral: SpectralSummary,
    pub notes: Vec<String>,
}

/// Builds `kind` with the seed `derive_seed(master, scope, index)`, keeps the
/// largest component and runs the eigensolver.
pub fn prepare_graph(kind: &GraphKind, label: &str, master: u64, scope: &str, index: usize) -> Result<PreparedGraph> {
    let seed = kind.is_random().then(|| derive_seed(master, scope, index as u64));
    let built = kind.build(seed.unwrap_or(0))?;
    let mut notes = Vec::new();
    let report = validate(&built);
    let graph = if report.connected {
        built
    } else {
        let sub = largest_component(&built);
        let note = format!(
            "{label}: disconnected ({} components), kept largest component with {} of {} nodes",
            report.components,
            sub.node_count(),
            built.node_count()
        );
        log::info!("{note}");
        notes.push(note);
        sub
    };
    if graph.node_count() < 2 {
        return Err(Error::Precondition(format!("{label}: fewer than two connected nodes")));
    }
    if validate(&graph).bipartite {
        let note = format!("{label}: bipartite, DeGroot opinions oscillate instead of converging");
        log::warn!("{note}");
        notes.push(note);
    }
    let spectral = top_eigenpairs(&graph, 3, &EigenOptions::default())?;
    if spectral.degenerate {
        let note = format!(
            "{label}: |lambda2| ~ |lambda3| ({} vs {:?}), equilibrium prediction unreliable",
            spectral.lambda2, spectral.lambda3
        );
        log::warn!("{note}");
        notes.push(note);
    }
    Ok(PreparedGraph { label: label.to_string(), graph, seed, spectral, notes })
}

/// CSV-friendly labels, suffixed with `#index` where specs repeat.
pub fn graph_labels(kinds: &[GraphKind]) -> Vec<String> {
    let base: Vec<String> = kinds.iter().map(GraphKind::label).collect();
    base.iter()
        .enumerate()
        .map(|(i, l)| {
            if base.iter().filter(|b| *b == l).count() > 1 {
                format!("{l}#{i}")
            } else {
                l.clone()
            }
        })
        .collect()
}

fn finished(limit: StepLimit, crit: &ConvergenceCriterion, t: usize, settled: bool) -> bool {
    match limit {
        StepLimit::Fixed(steps) => t >= steps,
        StepLimit::Auto => settled || t >= crit.max_steps,
    }
}

/// Metric series of one DeGroot run.
#[derive(Debug, Clone)]
pub struct MetricRun {
    pub series: Vec<MetricSeries>,
    /// Start of the first settled window per metric.
    pub settled_at: Vec<Option<usize>>,
    pub final_t: usize,
    /// Unit deviation from consensus at `final_t`.
    pub final_deviation: Vec<f64>,
}

/// Runs DeGroot from `z0`, evaluating `metrics` every step and recording
/// every `stride` steps plus the last one. Under [`StepLimit::Auto`] the run
/// stops once every metric settled on its target (or its trailing mean when
/// the target is `None`).
pub fn run_metrics(
    g: &Graph,
    z0: &[f64],
    metrics: &[Metric],
    targets: &[Option<f64>],
    limit: StepLimit,
    crit: &ConvergenceCriterion,
    stride: usize,
) -> Result<MetricRun> {
    if metrics.len() != targets.len() {
        return Err(Error::LengthMismatch { expected: metrics.len(), found: targets.len() });
    }
    let stride = stride.max(1);
    let mut d = DeviationDynamics::new(g, z0)?;
    let mut settles: Vec<Settle> = targets.iter().map(|&t| Settle::new(t, crit)).collect();
    let mut settled_at = vec![None; metrics.len()];
    let mut series: Vec<MetricSeries> = metrics.iter().map(|&m| MetricSeries::new(m)).collect();
    loop {
        let t = d.t();
        let values: Vec<Option<f64>> = metrics
            .iter()
            .map(|m| d.has_deviation().then(|| m.evaluate(g, d.deviation()).ok()).flatten())
            .collect();
        for (i, &v) in values.iter().enumerate() {
            if settled_at[i].is_none() {
                settled_at[i] = settles[i].push(t, v);
            }
        }
        let settled = settled_at.iter().all(Option::is_some) || !d.has_deviation();
        let done = finished(limit, crit, t, settled);
        if t % stride == 0 || done {
            for (s, v) in series.iter_mut().zip(&values) {
                s.push(t, *v);
            }
        }
        if done {
            break;
        }
        d.step();
    }
    Ok(MetricRun {
        series,
        settled_at,
        final_t: d.t(),
        final_deviation: d.deviation().to_vec(),
    })
}

/// One recorded point of the standard deviation / local agreement pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadPoint {
    pub t: usize,
    /// Population standard deviation of the opinions.
    pub std: f64,
    pub local_agreement: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SpreadRun {
    pub points: Vec<SpreadPoint>,
    pub initial_agreement: Option<f64>,
    pub final_agreement: Option<f64>,
    /// Largest single-step increase of the standard deviation, over every step.
    pub max_std_increase: f64,
    pub settled_at: Option<usize>,
}

fn population_std(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Standard deviation and local agreement over a DeGroot run. The standard
/// deviation is reconstructed from the tracked scale, so it stays exact after
/// it drops below floating-point resolution of the opinions themselves.
pub fn run_spread(
    g: &Graph,
    z0: &[f64],
    agreement_target: Option<f64>,
    limit: StepLimit,
    crit: &ConvergenceCriterion,
    stride: usize,
) -> Result<SpreadRun> {
    let stride = stride.max(1);
    let mut d = DeviationDynamics::new(g, z0)?;
    let mut settle = Settle::new(agreement_target, crit);
    let mut settled_at = None;
    let mut points = Vec::new();
    let mut initial_agreement = None;
    let mut prev_std: Option<f64> = None;
    let mut max_std_increase = f64::NEG_INFINITY;
    loop {
        let t = d.t();
        let std = if d.has_deviation() {
            d.log_scale().exp() * population_std(d.deviation())
        } else {
            0.0
        };
        if let Some(prev) = prev_std {
            max_std_increase = max_std_increase.max(std - prev);
        }
        prev_std = Some(std);
        let agreement = d
            .has_deviation()
            .then(|| local_agreement(g, d.deviation()).ok())
            .flatten();
        if t == 0 {
            initial_agreement = agreement;
        }
        if settled_at.is_none() {
            settled_at = settle.push(t, agreement);
        }
        let done = finished(limit, crit, t, settled_at.is_some() || !d.has_deviation());
        if t % stride == 0 || done {
            points.push(SpreadPoint { t, std, local_agreement: agreement });
        }
        if done {
            return Ok(SpreadRun {
                initial_agreement,
                final_agreement: agreement,
                points,
                max_std_increase,
                settled_at,
            });
        }
        d.step();
    }
}

/// Profile histograms of `m` issues evolving on the same graph.
#[derive(Debug, Clone)]
pub struct ProfileRun {
    /// `(t, histogram)` every `stride` steps plus the last step.
    pub snapshots: Vec<(usize, BTreeMap<String, usize>)>,
    /// Start of the final uninterrupted aligned stretch.
    pub aligned_since: Option<usize>,
    /// First step at which the profiles were aligned.
    pub first_aligned: Option<usize>,
    /// No step after `first_aligned` lost alignment.
    pub stayed_aligned: bool,
    pub final_t: usize,
}

impl ProfileRun {
    /// Profiles holding at least one node at the last step.
    pub fn final_profiles(&self) -> Vec<(&str, usize)> {
        self.snapshots
            .last()
            .map(|(_, h)| h.iter().filter(|(_, &c)| c > 0).map(|(k, &c)| (k.as_str(), c)).collect())
            .unwrap_or_default()
    }
}

/// Evolves one opinion vector per issue and tracks the sign profiles.
///
/// Under [`StepLimit::Auto`] the run stops once the profiles stayed aligned
/// for `crit.window` steps and, when `expected_signs` is given, every issue's
/// signs match it up to a global flip.
pub fn run_profiles(
    g: &Graph,
    inits: &[Vec<f64>],
    expected_signs: Option<&[i8]>,
    limit: StepLimit,
    crit: &ConvergenceCriterion,
    stride: usize,
) -> Result<ProfileRun> {
    if inits.is_empty() {
        return Err(Error::Parameter("need at least one issue".into()));
    }
    let stride = stride.max(1);
    let mut dyns = inits
        .iter()
        .map(|z| DeviationDynamics::new(g, z))
        .collect::<Result<Vec<_>>>()?;
    let mut snapshots = Vec::new();
    let mut first_aligned = None;
    let mut aligned_since = None;
    let mut stayed_aligned = true;
    loop {
        let t = dyns[0].t();
        let columns: Vec<&[f64]> = dyns.iter().map(|d| d.deviation()).collect();
        let profiles = profile_matrix(&columns)?;
        let aligned = alignment_reached(&profiles);
        if aligned {
            first_aligned.get_or_insert(t);
            aligned_since.get_or_insert(t);
        } else {
            if first_aligned.is_some() {
                stayed_aligned = false;
            }
            aligned_since = None;
        }
        let matches_expected = expected_signs.is_none_or(|expected| {
            columns.iter().all(|c| {
                let signs = sign_of_deviation(c);
                signs == expected || signs.iter().zip(expected).all(|(a, b)| *a == -b)
            })
        });
        let settled = aligned_since.is_some_and(|s| t + 1 - s >= crit.window) && matches_expected;
        let done = finished(limit, crit, t, settled);
        if t % stride == 0 || done {
            snapshots.push((t, profile_histogram(&profiles)?));
        }
        if done {
            return Ok(ProfileRun {
                snapshots,
                aligned_since,
                first_aligned,
                stayed_aligned: stayed_aligned && first_aligned.is_some(),
                final_t: t,
            });
        }
        dyns.iter_mut().for_each(DeviationDynamics::step);
    }
}

/// Per-node agreement fractions and sides at chosen steps.
#[derive(Debug, Clone)]
pub struct NodeSnapshot {
    pub t: usize,
    pub agree_frac: Vec<f64>,
    pub side: Vec<i8>,
}

/// Snapshots at each step in `times` (ascending) and at local-agreement
/// convergence, which is last.
pub fn node_snapshots(
    g: &Graph,
    z0: &[f64],
    times: &[usize],
    agreement_target: Option<f64>,
    limit: StepLimit,
    crit: &ConvergenceCriterion,
) -> Result<Vec<NodeSnapshot>> {
    let mut d = DeviationDynamics::new(g, z0)?;
    let mut settle = Settle::new(agreement_target, crit);
    let mut settled = false;
    let mut out = Vec::new();
    let snap = |d: &DeviationDynamics| -> Result<NodeSnapshot> {
        Ok(NodeSnapshot {
            t: d.t(),
            agree_frac: node_local_agreement(g, d.deviation())?,
            side: sign_of_deviation(d.deviation()),
        })
    };
    loop {
        let t = d.t();
        if !settled {
            let agreement = d.has_deviation().then(|| local_agreement(g, d.deviation()).ok()).flatten();
            settled = settle.push(t, agreement).is_some() || !d.has_deviation();
        }
        if times.contains(&t) {
            out.push(snap(&d)?);
        }
        let past_times = times.iter().all(|&s| s <= t);
        if past_times && finished(limit, crit, t, settled) {
            out.push(snap(&d)?);
            return Ok(out);
        }
        d.step();
    }
}

/// One point of the agreement-versus-`lambda_2` scatter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig6Row {
    pub graph: String,
    pub lambda2: f64,
    pub equilibrium_agreement: f64,
    /// `lambda_2 / 2 + 1/2`.
    pub approx: f64,
    pub degenerate: bool,
}

pub const FIG6_CSV_HEADER: &str = "graph,lambda2,equilibrium_agreement,approx,degenerate";

impl Fig6Row {
    pub fn from_prepared(p: &PreparedGraph) -> Result<Self> {
        Ok(Fig6Row {
            graph: p.label.clone(),
            lambda2: p.spectral.lambda2,
            equilibrium_agreement: local_agreement(&p.graph, &p.spectral.sbar_star)?,
            approx: agreement_from_lambda2(p.spectral.lambda2),
            degenerate: p.spectral.degenerate,
        })
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            csv_field(&self.graph),
            self.lambda2,
            self.equilibrium_agreement,
            self.approx,
            u8::from(self.degenerate)
        )
    }
}

/// Equilibrium local agreement against `lambda_2` for each graph, in input
/// order. Graph `i` is generated with `derive_seed(seed, "fig6_agreement_vs_lambda2", i)`.
pub fn fig6_scatter(graphs: &[GraphKind], seed: u64) -> Result<Vec<Fig6Row>> {
    use rayon::prelude::*;
    if graphs.len() < 2 {
        return Err(Error::Parameter("scatter needs at least two graphs".into()));
    }
    let labels = graph_labels(graphs);
    graphs
        .par_iter()
        .zip(labels.par_iter())
        .enumerate()
        .map(|(i, (kind, label))| {
            let p = prepare_graph(kind, label, seed, "fig6_agreement_vs_lambda2", i)?;
            Fig6Row::from_prepared(&p)
        })
        .collect()
}

/// Quotes a CSV field when it holds a comma, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
