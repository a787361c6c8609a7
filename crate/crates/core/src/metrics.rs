//! Polarization measures on opinion vectors.
//!
//! [`bimodality`] and [`local_agreement`] are group-based: invariant under
//! `z -> -z`, `z -> z + c 1` and `z -> c z` for `c != 0`. [`variance`] is kept
//! for contrast; it is not scale invariant.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

fn mean(z: &[f64]) -> f64 {
    z.iter().sum::<f64>() / z.len() as f64
}

/// `||z - mean(z) 1||_2^2`, not divided by `n`.
pub fn variance(z: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let m = mean(z);
    z.iter().map(|x| (x - m) * (x - m)).sum()
}

/// `sign(z - mean(z) 1)` with zeros mapped to `+1`.
pub fn sign_of_deviation(z: &[f64]) -> Vec<i8> {
    if z.is_empty() {
        return Vec::new();
    }
    let m = mean(z);
    z.iter().map(|&x| if x - m < 0.0 { -1 } else { 1 }).collect()
}

/// Population skewness and kurtosis of `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub skewness: f64,
    pub kurtosis: f64,
}

pub fn moments(z: &[f64]) -> Result<Moments> {
    if z.len() < 2 {
        return Err(Error::UndefinedMetric("bimodality"));
    }
    let m = mean(z);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in z {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let n = z.len() as f64;
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if m2 == 0.0 {
        return Err(Error::UndefinedMetric("bimodality"));
    }
    Ok(Moments {
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// Sarle's bimodality coefficient `(skew^2 + 1) / kurt` with population moments.
pub fn bimodality(z: &[f64]) -> Result<f64> {
    let m = moments(z)?;
    Ok((m.skewness * m.skewness + 1.0) / m.kurtosis)
}

/// Per-node share of (weighted) neighbors on the same side of the mean.
pub fn node_local_agreement(g: &Graph, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != g.node_count() {
        return Err(Error::LengthMismatch { expected: g.node_count(), found: z.len() });
    }
    g.require_no_isolated()?;
    let s = sign_of_deviation(z);
    Ok((0..g.node_count())
        .map(|i| {
            let (nbrs, ws) = g.neighbors(i);
            let same: f64 = nbrs
                .iter()
                .zip(ws)
                .filter(|(&j, _)| s[j] == s[i])
                .map(|(_, &w)| w)
                .sum();
            same / g.degree(i)
        })
        .collect())
}

/// Average local agreement: mean over nodes of [`node_local_agreement`].
pub fn local_agreement(g: &Graph, z: &[f64]) -> Result<f64> {
    let per_node = node_local_agreement(g, z)?;
    Ok(per_node.iter().sum::<f64>() / per_node.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Bimodality,
    LocalAgreement,
    Variance,
}

impl Metric {
    pub const GROUP_BASED: [Metric; 2] = [Metric::Bimodality, Metric::LocalAgreement];

    pub fn id(self) -> &'static str {
        match self {
            Metric::Bimodality => "bimodality",
            Metric::LocalAgreement => "local_agreement",
            Metric::Variance => "variance",
        }
    }

    /// Whether the metric is invariant to sign flips, shifts and rescaling.
    pub fn is_group_based(self) -> bool {
        !matches!(self, Metric::Variance)
    }

    pub fn evaluate(self, g: &Graph, z: &[f64]) -> Result<f64> {
        match self {
            Metric::Bimodality => bimodality(z),
            Metric::LocalAgreement => local_agreement(g, z),
            Metric::Variance => Ok(variance(z)),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bimodality" => Ok(Metric::Bimodality),
            "local_agreement" => Ok(Metric::LocalAgreement),
            "variance" => Ok(Metric::Variance),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }
}

/// Dispatches `f(G, z)` by metric id.
pub fn evaluate_group_metric(metric_id: &str, g: &Graph, z: &[f64]) -> Result<f64> {
    metric_id.parse::<Metric>()?.evaluate(g, z)
}

/// Time-indexed values of one metric; `None` marks an undefined value.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub metric: Metric,
    pub points: Vec<(usize, Option<f64>)>,
}

impl MetricSeries {
    pub fn new(metric: Metric) -> Self {
        MetricSeries { metric, points: Vec::new() }
    }

    /// Appends a point; `t` must exceed the previous one.
    pub fn push(&mut self, t: usize, value: Option<f64>) {
        if let Some(&(last, _)) = self.points.last() {
            assert!(t > last, "series times must increase ({t} after {last})");
        }
        self.points.push((t, value.filter(|v| v.is_finite())));
    }

    pub fn last_value(&self) -> Option<f64> {
        self.points.last().and_then(|p| p.1)
    }

    /// `t,value` CSV, undefined values left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in &self.points {
            match v {
                Some(v) => out.push_str(&format!("{t},{v}\n")),
                None => out.push_str(&format!("{t},\n")),
            }
        }
        out
    }
}

/// `n x m` matrix of `+1/-1` opinion sides across `m` issues, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileMatrix {
    n: usize,
    m: usize,
    entries: Vec<i8>,
}

impl ProfileMatrix {
    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn issues(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.entries[i * self.m..(i + 1) * self.m]
    }

    /// Profile of node `i` as a `+`/`-` string, first issue first.
    pub fn profile_key(&self, i: usize) -> String {
        profile_string(self.row(i))
    }
}

fn profile_string(row: &[i8]) -> String {
    row.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

/// Column `j` is `sign_of_deviation(zs[j])`.
pub fn profile_matrix<Z: AsRef<[f64]>>(zs: &[Z]) -> Result<ProfileMatrix> {
    let first = zs
        .first()
        .ok_or_else(|| Error::Parameter("profile matrix needs at least one issue".into()))?;
    let n = first.as_ref().len();
    let m = zs.len();
    let mut entries = vec![0i8; n * m];
    for (j, z) in zs.iter().enumerate() {
        let z = z.as_ref();
        if z.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: z.len() });
        }
        for (i, s) in sign_of_deviation(z).into_iter().enumerate() {
            entries[i * m + j] = s;
        }
    }
    Ok(ProfileMatrix { n, m, entries })
}

pub const MAX_HISTOGRAM_ISSUES: usize = 20;

/// Node counts per profile, with all `2^m` profiles present.
///
/// Keys iterate in lexicographic order where `+` sorts before `-`.
pub fn profile_histogram(s: &ProfileMatrix) -> Result<BTreeMap<String, usize>> {
    if s.m > MAX_HISTOGRAM_ISSUES {
        return Err(Error::Parameter(format!(
            "profile histogram supports at most {MAX_HISTOGRAM_ISSUES} issues, got {}",
            s.m
        )));
    }
    let mut hist: BTreeMap<String, usize> = (0..1usize << s.m)
        .map(|bits| {
            let row: Vec<i8> = (0..s.m)
                .map(|j| if bits >> (s.m - 1 - j) & 1 == 0 { 1 } else { -1 })
                .collect();
            (profile_string(&row), 0)
        })
        .collect();
    for i in 0..s.n {
        *hist.get_mut(&s.profile_key(i)).unwrap() += 1;
    }
    Ok(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Some pair of rows is neither equal nor opposite.
    NotAligned,
    /// Exactly two unique rows, elementwise opposite.
    Aligned,
    /// A single unique row: every node on the same side of every issue.
    Unanimous,
}

pub fn alignment_status(s: &ProfileMatrix) -> Alignment {
    if s.n == 0 {
        return Alignment::Unanimous;
    }
    let first = s.row(0);
    let mut other: Option<&[i8]> = None;
    for i in 1..s.n {
        let row = s.row(i);
        if row == first {
            continue;
        }
        match other {
            Some(o) if o == row => {}
            Some(_) => return Alignment::NotAligned,
            None => {
                if row.iter().zip(first).any(|(a, b)| a != &-b) {
                    return Alignment::NotAligned;
                }
                other = Some(row);
            }
        }
    }
    if other.is_some() {
        Alignment::Aligned
    } else {
        Alignment::Unanimous
    }
}

/// True when the profiles hold at most two unique rows that are negations of
/// each other.
pub fn alignment_reached(s: &ProfileMatrix) -> bool {
    alignment_status(s) != Alignment::NotAligned
}
