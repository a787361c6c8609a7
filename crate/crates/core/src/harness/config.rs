use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ConvergenceCriterion;
use crate::error::{Error, Result};
use crate::graph::GraphKind;
use crate::metrics::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fig1MetricsVsTime,
    Fig2Profiles,
    Fig3BimodalityRuns,
    Fig4BimodalityByK,
    Fig5LocalSnapshots,
    Fig6AgreementVsLambda2,
    TableEnsembleStats,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Fig1MetricsVsTime,
        Scenario::Fig2Profiles,
        Scenario::Fig3BimodalityRuns,
        Scenario::Fig4BimodalityByK,
        Scenario::Fig5LocalSnapshots,
        Scenario::Fig6AgreementVsLambda2,
        Scenario::TableEnsembleStats,
        Scenario::Custom,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scenario::Fig1MetricsVsTime => "fig1_metrics_vs_time",
            Scenario::Fig2Profiles => "fig2_profiles",
            Scenario::Fig3BimodalityRuns => "fig3_bimodality_runs",
            Scenario::Fig4BimodalityByK => "fig4_bimodality_by_k",
            Scenario::Fig5LocalSnapshots => "fig5_local_snapshots",
            Scenario::Fig6AgreementVsLambda2 => "fig6_agreement_vs_lambda2",
            Scenario::TableEnsembleStats => "table_ensemble_stats",
            Scenario::Custom => "custom",
        }
    }

    /// Base name of the main CSV output.
    pub fn output_stem(self) -> &'static str {
        match self {
            Scenario::Fig1MetricsVsTime => "fig1",
            Scenario::Fig2Profiles => "fig2",
            Scenario::Fig3BimodalityRuns => "fig3",
            Scenario::Fig4BimodalityByK => "fig4",
            Scenario::Fig5LocalSnapshots => "fig5",
            Scenario::Fig6AgreementVsLambda2 => "fig6",
            Scenario::TableEnsembleStats => "table",
            Scenario::Custom => "custom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.id() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown scenario `{s}`")))
    }
}

/// Fixed horizon or convergence-based stopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepLimit {
    Fixed(usize),
    Auto,
}

impl fmt::Display for StepLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepLimit::Fixed(t) => write!(f, "{t}"),
            StepLimit::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for StepLimit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(StepLimit::Auto);
        }
        s.parse()
            .map(StepLimit::Fixed)
            .map_err(|_| Error::Parameter(format!("steps must be a count or `auto`, got `{s}`")))
    }
}

impl Serialize for StepLimit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StepLimit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Parameters of the bimodality-by-block-count sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSettings {
    pub ks: Vec<usize>,
    pub node_counts: Vec<usize>,
    pub p: f64,
    pub q: f64,
    pub graphs_per_k: usize,
    pub gaussian_trials: usize,
}

impl Default for CurveSettings {
    fn default() -> Self {
        CurveSettings {
            ks: vec![2, 3, 4, 5, 6, 8, 10, 15, 20, 25, 30, 40, 50],
            node_counts: vec![1000, 2000],
            p: 0.3,
            q: 0.02,
            graphs_per_k: 100,
            gaussian_trials: crate::equilibrium::DEFAULT_GAUSSIAN_TRIALS,
        }
    }
}

/// Everything needed to reproduce one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub graphs: Vec<GraphKind>,
    /// Directory of edge-list files, each treated as one network.
    pub edge_list_dir: Option<PathBuf>,
    pub inits: usize,
    pub issues: usize,
    pub steps: StepLimit,
    pub stride: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub convergence: ConvergenceCriterion,
    pub curve: CurveSettings,
    pub out_dir: PathBuf,
}

fn sbm5() -> GraphKind {
    GraphKind::Sbm { k: 5, n: 1000, p: 0.1, q: 0.01 }
}

fn geometric() -> GraphKind {
    GraphKind::Geometric { n: 1000, r: 0.1 }
}

/// Ensemble spanning `lambda_2` from about 0.2 to 0.99.
pub fn default_fig6_graphs() -> Vec<GraphKind> {
    let mut graphs: Vec<GraphKind> = [0.001, 0.003, 0.006, 0.01, 0.015, 0.02, 0.03, 0.04, 0.05, 0.07, 0.09, 0.11, 0.13, 0.15, 0.17, 0.2]
        .into_iter()
        .map(|q| GraphKind::Sbm { k: 2, n: 1000, p: 0.3, q })
        .collect();
    graphs.extend(
        [0.002, 0.005, 0.01, 0.02]
            .into_iter()
            .map(|q| GraphKind::Sbm { k: 5, n: 1000, p: 0.1, q }),
    );
    graphs.extend(
        [0.05, 0.1, 0.2]
            .into_iter()
            .map(|q| GraphKind::Sbm { k: 3, n: 900, p: 0.3, q }),
    );
    graphs.extend(
        [0.07, 0.085, 0.1, 0.125, 0.15, 0.2, 0.3]
            .into_iter()
            .map(|r| GraphKind::Geometric { n: 1000, r }),
    );
    graphs
}

impl ExperimentConfig {
    /// Defaults for `scenario`, writing into `out_dir`.
    pub fn for_scenario(scenario: Scenario, out_dir: impl Into<PathBuf>) -> Self {
        let graphs = match scenario {
            Scenario::Fig1MetricsVsTime => vec![sbm5(), geometric(), GraphKind::Regular { n: 1000, d: 10 }],
            Scenario::Fig2Profiles | Scenario::Fig3BimodalityRuns => vec![sbm5()],
            Scenario::Fig5LocalSnapshots | Scenario::Custom => vec![sbm5(), geometric()],
            Scenario::Fig6AgreementVsLambda2 => default_fig6_graphs(),
            Scenario::Fig4BimodalityByK | Scenario::TableEnsembleStats => Vec::new(),
        };
        ExperimentConfig {
            scenario,
            graphs,
            edge_list_dir: None,
            inits: match scenario {
                Scenario::Fig3BimodalityRuns => 5,
                Scenario::TableEnsembleStats => 0,
                _ => 1,
            },
            issues: 4,
            steps: StepLimit::Auto,
            stride: match scenario {
                Scenario::Fig2Profiles => 5,
                _ => 1,
            },
            seed: 1,
            metrics: Metric::GROUP_BASED.to_vec(),
            convergence: ConvergenceCriterion::default(),
            curve: CurveSettings::default(),
            out_dir: out_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::Parameter("stride must be at least 1".into()));
        }
        self.convergence.validate()?;
        for g in &self.graphs {
            g.validate()?;
        }
        match self.scenario {
            Scenario::Fig2Profiles => {
                if self.issues == 0 || self.issues > crate::metrics::MAX_HISTOGRAM_ISSUES {
                    return Err(Error::Parameter(format!(
                        "issues must be in 1..={}, got {}",
                        crate::metrics::MAX_HISTOGRAM_ISSUES,
                        self.issues
                    )));
                }
            }
            Scenario::Fig3BimodalityRuns | Scenario::Custom if self.inits == 0 => {
                return Err(Error::Parameter("need at least one initial opinion vector".into()));
            }
            Scenario::Fig4BimodalityByK => {
                let c = &self.curve;
                if c.ks.is_empty() || c.node_counts.is_empty() || c.graphs_per_k == 0 || c.gaussian_trials == 0 {
                    return Err(Error::Parameter("curve settings need ks, node counts, graphs and trials".into()));
                }
                if c.ks.iter().any(|&k| k < 2) {
                    return Err(Error::Parameter("curve needs k >= 2".into()));
                }
                for &n in &c.node_counts {
                    for &k in &c.ks {
                        GraphKind::Sbm { k, n, p: c.p, q: c.q }.validate()?;
                    }
                }
            }
            Scenario::Fig6AgreementVsLambda2 if self.graphs.len() < 2 => {
                return Err(Error::Parameter("fig6 needs at least two graphs".into()));
            }
            Scenario::TableEnsembleStats if self.graphs.is_empty() && self.edge_list_dir.is_none() => {
                return Err(Error::Parameter(
                    "table_ensemble_stats needs --edge-list-dir or --graph".into(),
                ));
            }
            _ => {}
        }
        if self.scenario != Scenario::Fig4BimodalityByK
            && self.scenario != Scenario::TableEnsembleStats
            && self.graphs.is_empty()
        {
            return Err(Error::Parameter("no graphs configured".into()));
        }
        Ok(())
    }
}
