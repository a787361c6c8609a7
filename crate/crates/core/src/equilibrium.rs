//! Predicted limiting values of group-based metrics under DeGroot dynamics.
//!
//! A group-based metric of the normalized, centered opinions converges to the
//! metric evaluated on the equilibrium direction, which depends on the graph
//! alone. This module evaluates that prediction, the `lambda_2 / 2 + 1/2`
//! approximation for local agreement, and the Gaussian reference curve used
//! for block models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{generate_sbm, largest_component, validate, Graph};
use crate::metrics::{bimodality, moments, Metric};
use crate::seed::derive_seed;
use crate::spectral::{top_eigenpairs, EigenOptions, SpectralSummary};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub metric: Metric,
    /// Metric evaluated on the equilibrium direction.
    pub predicted: f64,
    /// `lambda_2 / 2 + 1/2`, only for local agreement.
    pub approx_spectral: Option<f64>,
    /// Metric at the end of a simulated trajectory, when one was run.
    pub simulated: Option<f64>,
    /// The eigengap hypothesis failed; `predicted` is unreliable.
    pub degenerate: bool,
}

pub fn equilibrium_metric(metric: Metric, g: &Graph) -> Result<EquilibriumReport> {
    let summary = top_eigenpairs(g, 3, &EigenOptions::default())?;
    equilibrium_from_summary(metric, g, &summary)
}

/// As [`equilibrium_metric`], reusing an existing eigensolve of `g`.
pub fn equilibrium_from_summary(
    metric: Metric,
    g: &Graph,
    summary: &SpectralSummary,
) -> Result<EquilibriumReport> {
    let predicted = metric.evaluate(g, &summary.sbar_star)?;
    let approx_spectral =
        (metric == Metric::LocalAgreement).then(|| agreement_from_lambda2(summary.lambda2));
    Ok(EquilibriumReport {
        metric,
        predicted,
        approx_spectral,
        simulated: None,
        degenerate: summary.degenerate,
    })
}

/// `lambda_2 / 2 + 1/2`.
pub fn agreement_from_lambda2(lambda2: f64) -> f64 {
    lambda2 / 2.0 + 0.5
}

pub fn local_agreement_spectral_approx(g: &Graph) -> Result<f64> {
    let summary = top_eigenpairs(g, 2, &EigenOptions::default())?;
    Ok(agreement_from_lambda2(summary.lambda2))
}

/// `s^T A s / (2 n d) + 1/2` for an unweighted `d`-regular graph without
/// self-loops and a `+1/-1` vector `s`.
pub fn regular_quadratic_form(g: &Graph, s: &[i8]) -> Result<f64> {
    let n = g.node_count();
    if s.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: s.len() });
    }
    if !g.is_unweighted() {
        return Err(Error::Precondition("graph must be unweighted".into()));
    }
    let report = validate(g);
    if report.self_loops {
        return Err(Error::Precondition("graph must not have self-loops".into()));
    }
    let d = report
        .regular
        .ok_or_else(|| Error::Precondition("graph must be regular".into()))?;
    if d == 0 {
        return Err(Error::Precondition("graph has no edges".into()));
    }
    if s.iter().any(|&x| x != 1 && x != -1) {
        return Err(Error::Precondition("sign vector entries must be +1 or -1".into()));
    }
    let x: Vec<f64> = s.iter().map(|&v| f64::from(v)).collect();
    let mut ax = vec![0.0; n];
    g.adjacency_mul(&x, &mut ax);
    let quad: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
    Ok(quad / (2.0 * n as f64 * d as f64) + 0.5)
}

/// Monte-Carlo statistics of the bimodality of `k` standard normal samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianBimodality {
    pub k: usize,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    /// Mean population kurtosis `m4 / m2^2` of the same samples.
    pub kurtosis_mean: f64,
    pub kurtosis_std: f64,
}

pub const DEFAULT_GAUSSIAN_TRIALS: usize = 100;

/// Per-trial streams are seeded with `seed ^ trial`, so results do not depend
/// on scheduling.
pub fn gaussian_sample_bimodality(k: usize, trials: usize, seed: u64) -> Result<GaussianBimodality> {
    if k < 2 || trials == 0 {
        return Err(Error::Parameter(format!(
            "need k >= 2 samples and at least one trial, got k={k}, trials={trials}"
        )));
    }
    let draws: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial as u64);
            loop {
                let sample: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
                if let (Ok(beta), Ok(m)) = (bimodality(&sample), moments(&sample)) {
                    return (beta, m.kurtosis);
                }
            }
        })
        .collect();
    let betas: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let kurts: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let (mean, std) = mean_std(&betas);
    let (kurtosis_mean, kurtosis_std) = mean_std(&kurts);
    Ok(GaussianBimodality { k, trials, mean, std, kurtosis_mean, kurtosis_std })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One row of the bimodality-versus-block-count curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub k: usize,
    pub n: usize,
    pub sbm_bimodality_mean: f64,
    pub sbm_bimodality_std: f64,
    pub gaussian_mean: f64,
    pub gaussian_std: f64,
    /// Graphs that entered the SBM average.
    pub graphs: usize,
    /// Degenerate instances left out.
    pub skipped: usize,
}

pub const CURVE_CSV_HEADER: &str = "k,n,sbm_bimodality_mean,sbm_bimodality_std,gaussian_mean,gaussian_std";

impl CurveRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.k,
            self.n,
            self.sbm_bimodality_mean,
            self.sbm_bimodality_std,
            self.gaussian_mean,
            self.gaussian_std
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveParams {
    pub ks: Vec<usize>,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub graphs_per_k: usize,
    pub gaussian_trials: usize,
    pub seed: u64,
}

impl Default for CurveParams {
    fn default() -> Self {
        CurveParams {
            ks: vec![2, 3, 4, 5, 6, 8, 10, 15, 20, 25, 30, 40, 50],
            n: 1000,
            p: 0.3,
            q: 0.02,
            graphs_per_k: 100,
            gaussian_trials: DEFAULT_GAUSSIAN_TRIALS,
            seed: 0,
        }
    }
}

/// Equilibrium bimodality of random `k`-block SBMs paired with the Gaussian
/// `k`-sample reference, for each `k`.
pub fn sbm_bimodality_curve(params: &CurveParams) -> Result<Vec<CurveRow>> {
    if params.graphs_per_k == 0 {
        return Err(Error::Parameter("need at least one graph per k".into()));
    }
    let mut rows = Vec::with_capacity(params.ks.len());
    for &k in &params.ks {
        let label = format!("sbm_curve/k={k}/n={}", params.n);
        let outcomes: Vec<Result<Option<f64>>> = (0..params.graphs_per_k)
            .into_par_iter()
            .map(|gi| {
                let seed = derive_seed(params.seed, &label, gi as u64);
                let g = generate_sbm(k, params.n, params.p, params.q, seed)?;
                let g = connected_part(g, &label, gi);
                let summary = top_eigenpairs(&g, 3, &EigenOptions::default())?;
                if summary.degenerate {
                    log::info!("{label} graph {gi}: degenerate eigengap, skipped");
                    return Ok(None);
                }
                Ok(Some(bimodality(&summary.sbar_star)?))
            })
            .collect();
        let mut values = Vec::new();
        let mut skipped = 0;
        for outcome in outcomes {
            match outcome? {
                Some(v) => values.push(v),
                None => skipped += 1,
            }
        }
        if values.is_empty() {
            return Err(Error::Degenerate(format!("every graph for k={k} was degenerate")));
        }
        let (sbm_mean, sbm_std) = mean_std(&values);
        let reference = gaussian_sample_bimodality(
            k,
            params.gaussian_trials,
            derive_seed(params.seed, "gaussian_reference", k as u64),
        )?;
        rows.push(CurveRow {
            k,
            n: params.n,
            sbm_bimodality_mean: sbm_mean,
            sbm_bimodality_std: sbm_std,
            gaussian_mean: reference.mean,
            gaussian_std: reference.std,
            graphs: values.len(),
            skipped,
        });
    }
    Ok(rows)
}

/// Largest connected component, logging when nodes were dropped.
pub(crate) fn connected_part(g: Graph, label: &str, index: usize) -> Graph {
    if validate(&g).connected {
        return g;
    }
    let sub = largest_component(&g);
    log::info!(
        "{label} graph {index}: kept largest component ({} of {} nodes)",
        sub.node_count(),
        g.node_count()
    );
    sub
}
