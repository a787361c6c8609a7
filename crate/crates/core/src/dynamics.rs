//! DeGroot averaging dynamics `z(t+1) = D^-1 A z(t)` and the Friedkin-Johnsen
//! variant.

use std::fmt::Write as _;
use std::ops::Deref;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Opinion state, one finite real per node.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("opinion {i} is not finite")));
        }
        Ok(OpinionVector(values))
    }

    pub fn constant(n: usize, value: f64) -> Self {
        OpinionVector(vec![value; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for OpinionVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for OpinionVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    StandardNormal { seed: u64 },
    Uniform { lo: f64, hi: f64, seed: u64 },
    Explicit { values: Vec<f64> },
}

impl InitSpec {
    pub fn materialize(&self, n: usize) -> Result<OpinionVector> {
        match self {
            &InitSpec::StandardNormal { seed } => Ok(OpinionVector(standard_normal(n, seed))),
            &InitSpec::Uniform { lo, hi, seed } => {
                if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                    return Err(Error::Parameter(format!("uniform init needs lo < hi, got [{lo}, {hi})")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(OpinionVector((0..n).map(|_| rng.random_range(lo..hi)).collect()))
            }
            InitSpec::Explicit { values } => {
                if values.len() != n {
                    return Err(Error::LengthMismatch { expected: n, found: values.len() });
                }
                OpinionVector::new(values.clone())
            }
        }
    }
}

/// `n` i.i.d. standard normal draws from a ChaCha8 stream seeded with `seed`.
pub fn standard_normal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn check_len(g: &Graph, len: usize) -> Result<()> {
    if len == g.node_count() {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected: g.node_count(), found: len })
    }
}

/// `out = D^-1 A z`; degrees must be positive.
fn average_into(g: &Graph, z: &[f64], out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        let (nbrs, ws) = g.neighbors(i);
        let sum: f64 = nbrs.iter().zip(ws).map(|(&j, &w)| w * z[j]).sum();
        *slot = sum / g.degree(i);
    }
}

/// One DeGroot update.
pub fn degroot_step(g: &Graph, z: &[f64]) -> Result<OpinionVector> {
    check_len(g, z.len())?;
    g.require_no_isolated()?;
    let mut out = vec![0.0; z.len()];
    average_into(g, z, &mut out);
    Ok(OpinionVector(out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: usize,
    pub opinions: OpinionVector,
}

/// Thinned record of a DeGroot run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub stride: usize,
}

impl Trajectory {
    pub fn at(&self, t: usize) -> Option<&OpinionVector> {
        self.snapshots
            .binary_search_by_key(&t, |s| s.t)
            .ok()
            .map(|i| &self.snapshots[i].opinions)
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory always holds t = 0")
    }

    /// Long-format `t,node,value` CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("t,node,value\n");
        for snap in &self.snapshots {
            for (i, v) in snap.opinions.iter().enumerate() {
                writeln!(out, "{},{i},{v}", snap.t).unwrap();
            }
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Runs `steps` DeGroot updates, keeping snapshots at multiples of `stride`
/// and at `steps`.
pub fn run_degroot(g: &Graph, init: &InitSpec, steps: usize, stride: usize) -> Result<Trajectory> {
    if stride == 0 {
        return Err(Error::Parameter("stride must be at least 1".into()));
    }
    let z0 = init.materialize(g.node_count())?;
    g.require_no_isolated()?;

    let mut snapshots = vec![Snapshot { t: 0, opinions: z0.clone() }];
    let mut cur = z0.into_inner();
    let mut next = vec![0.0; cur.len()];
    for t in 1..=steps {
        average_into(g, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        if t % stride == 0 || t == steps {
            snapshots.push(Snapshot { t, opinions: OpinionVector(cur.clone()) });
        }
    }
    Ok(Trajectory { snapshots, stride })
}

/// Degree-weighted average `sum_i d_i z_i / sum_j d_j`, the consensus limit.
pub fn consensus_value(g: &Graph, z0: &[f64]) -> Result<f64> {
    check_len(g, z0.len())?;
    g.require_connected()?;
    Ok(degree_weighted_mean(g, z0))
}

fn degree_weighted_mean(g: &Graph, z: &[f64]) -> f64 {
    let num: f64 = g.degrees().iter().zip(z).map(|(d, x)| d * x).sum();
    num / g.total_degree()
}

/// One Friedkin-Johnsen update `(D + I)^-1 (A z + s)` with innate opinions `s`.
pub fn fj_step(g: &Graph, z: &[f64], innate: &[f64]) -> Result<OpinionVector> {
    check_len(g, z.len())?;
    check_len(g, innate.len())?;
    let out = (0..g.node_count())
        .map(|i| {
            let (nbrs, ws) = g.neighbors(i);
            let sum: f64 = nbrs.iter().zip(ws).map(|(&j, &w)| w * z[j]).sum();
            (innate[i] + sum) / (g.degree(i) + 1.0)
        })
        .collect();
    Ok(OpinionVector(out))
}

/// DeGroot evolution tracked as `z(t) = c 1 + exp(log_scale) w(t)`, where `c`
/// is the conserved consensus value and `w` is a unit vector with zero
/// degree-weighted mean.
///
/// Identical to iterating [`degroot_step`] in exact arithmetic, but the
/// deviation from consensus never underflows, so shift- and scale-invariant
/// metrics can be evaluated on `w` at any horizon.
#[derive(Debug, Clone)]
pub struct DeviationDynamics<'g> {
    graph: &'g Graph,
    consensus: f64,
    log_scale: f64,
    deviation: Vec<f64>,
    scratch: Vec<f64>,
    t: usize,
}

impl<'g> DeviationDynamics<'g> {
    pub fn new(g: &'g Graph, z0: &[f64]) -> Result<Self> {
        check_len(g, z0.len())?;
        g.require_no_isolated()?;
        let consensus = degree_weighted_mean(g, z0);
        let mut dyn_ = DeviationDynamics {
            graph: g,
            consensus,
            log_scale: 0.0,
            deviation: z0.iter().map(|z| z - consensus).collect(),
            scratch: vec![0.0; z0.len()],
            t: 0,
        };
        dyn_.renormalize();
        Ok(dyn_)
    }

    fn renormalize(&mut self) {
        let shift = degree_weighted_mean(self.graph, &self.deviation);
        self.deviation.iter_mut().for_each(|w| *w -= shift);
        let norm = self.deviation.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            self.deviation.iter_mut().for_each(|w| *w /= norm);
            self.log_scale += norm.ln();
        } else {
            self.deviation.iter_mut().for_each(|w| *w = 0.0);
            self.log_scale = f64::NEG_INFINITY;
        }
    }

    pub fn step(&mut self) {
        if self.log_scale == f64::NEG_INFINITY {
            self.t += 1;
            return;
        }
        average_into(self.graph, &self.deviation, &mut self.scratch);
        std::mem::swap(&mut self.deviation, &mut self.scratch);
        self.renormalize();
        self.t += 1;
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn consensus(&self) -> f64 {
        self.consensus
    }

    /// Natural log of `||z(t) - c 1||_2`; `-inf` once the deviation vanished.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Unit-norm deviation from consensus, all zeros once it vanished.
    pub fn deviation(&self) -> &[f64] {
        &self.deviation
    }

    /// False once the opinions reached exact consensus.
    pub fn has_deviation(&self) -> bool {
        self.log_scale > f64::NEG_INFINITY
    }

    /// Reconstructs `z(t)` in floating point.
    pub fn opinions(&self) -> OpinionVector {
        let scale = self.log_scale.exp();
        OpinionVector(self.deviation.iter().map(|w| self.consensus + scale * w).collect())
    }
}

/// Reads opinions from CSV: one value per line, or `node,value` rows after a
/// `node,value` header.
pub fn read_opinions_csv(path: impl AsRef<Path>) -> Result<OpinionVector> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column: 1,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();
    let keyed = matches!(lines.peek(), Some((_, l)) if l.replace(' ', "") == "node,value");
    if keyed {
        lines.next();
        let mut pairs = Vec::new();
        for (no, line) in lines {
            let (node, value) = line
                .split_once(',')
                .ok_or_else(|| parse_err(no, "expected `node,value`".into()))?;
            let node: usize = node.trim().parse().map_err(|_| parse_err(no, format!("bad node `{node}`")))?;
            let value: f64 = value.trim().parse().map_err(|_| parse_err(no, format!("bad value `{value}`")))?;
            pairs.push((node, value));
        }
        let n = pairs.len();
        let mut values = vec![f64::NAN; n];
        for (node, value) in pairs {
            if node >= n || !values[node].is_nan() {
                return Err(Error::Parameter(format!("node ids in {} must be a permutation of 0..{n}", path.display())));
            }
            values[node] = value;
        }
        OpinionVector::new(values)
    } else {
        let values = lines
            .map(|(no, l)| l.parse::<f64>().map_err(|_| parse_err(no, format!("bad value `{l}`"))))
            .collect::<Result<Vec<_>>>()?;
        OpinionVector::new(values)
    }
}

pub fn write_opinions_csv(z: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("node,value\n");
    for (i, v) in z.iter().enumerate() {
        writeln!(out, "{i},{v}").unwrap();
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn path_step_averages_neighbors() {
        let z = degroot_step(&path3(), &[0.0, 3.0, 6.0]).unwrap();
        assert_eq!(z.as_slice(), &[3.0, 3.0, 3.0]);
    }

    #[test]
    fn constant_is_fixed_point() {
        let g = crate::graph::generate_sbm(2, 30, 0.5, 0.1, 3).unwrap();
        let g = crate::graph::largest_component(&g);
        let z = OpinionVector::constant(g.node_count(), 2.5);
        assert_eq!(degroot_step(&g, &z).unwrap(), z);
    }

    #[test]
    fn self_loop_single_node() {
        let g = Graph::from_edges(1, [(0, 0, 3.5)]).unwrap();
        assert_eq!(degroot_step(&g, &[5.0]).unwrap().as_slice(), &[5.0]);
    }

    #[test]
    fn isolated_node_is_named() {
        let g = Graph::from_edges(3, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(degroot_step(&g, &[1.0, 2.0, 3.0]), Err(Error::IsolatedNode { node: 2 })));
        assert!(matches!(degroot_step(&g, &[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn zero_steps_keeps_only_initial() {
        let init = InitSpec::Explicit { values: vec![1.0, 2.0, 4.0] };
        let traj = run_degroot(&path3(), &init, 0, 1).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0].t, 0);
    }

    #[test]
    fn trajectory_is_step_composition() {
        let g = path3();
        let init = InitSpec::Explicit { values: vec![1.0, -2.0, 7.0] };
        let traj = run_degroot(&g, &init, 2, 1).unwrap();
        let z0 = traj.at(0).unwrap();
        let twice = degroot_step(&g, &degroot_step(&g, z0).unwrap()).unwrap();
        assert_eq!(traj.at(2).unwrap(), &twice);
    }

    #[test]
    fn stride_thinning_keeps_final_step() {
        let init = InitSpec::StandardNormal { seed: 1 };
        let traj = run_degroot(&path3(), &init, 10, 4).unwrap();
        let ts: Vec<_> = traj.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0, 4, 8, 10]);
        assert!(run_degroot(&path3(), &init, 10, 0).is_err());
    }

    #[test]
    fn consensus_examples() {
        let edge = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(consensus_value(&edge, &[0.0, 4.0]).unwrap(), 2.0);
        let tri = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(consensus_value(&tri, &[1.0, 2.0, 3.0]).unwrap(), 2.0);
        let star = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        assert_eq!(consensus_value(&star, &[6.0, 0.0, 0.0, 0.0]).unwrap(), 3.0);
        let split = Graph::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(consensus_value(&split, &[0.0; 4]), Err(Error::Disconnected { .. })));
    }

    #[test]
    fn fj_examples() {
        let g = path3();
        let z = fj_step(&g, &[0.0, 3.0, 6.0], &[0.0; 3]).unwrap();
        assert_eq!(z.as_slice(), &[1.5, 2.0, 1.5]);

        let c = OpinionVector::constant(3, 4.0);
        assert_eq!(fj_step(&g, &c, &c).unwrap(), c);

        let lone = Graph::from_edges(1, []).unwrap();
        assert_eq!(fj_step(&lone, &[0.0], &[2.0]).unwrap().as_slice(), &[2.0]);
        assert!(fj_step(&g, &[0.0; 3], &[0.0; 2]).is_err());
    }

    #[test]
    fn init_specs() {
        let a = InitSpec::StandardNormal { seed: 5 }.materialize(100).unwrap();
        let b = InitSpec::StandardNormal { seed: 5 }.materialize(100).unwrap();
        assert_eq!(a, b);
        let u = InitSpec::Uniform { lo: -1.0, hi: 2.0, seed: 3 }.materialize(50).unwrap();
        assert!(u.iter().all(|&x| (-1.0..2.0).contains(&x)));
        assert!(InitSpec::Uniform { lo: 1.0, hi: 1.0, seed: 0 }.materialize(2).is_err());
        assert!(InitSpec::Explicit { values: vec![1.0] }.materialize(2).is_err());
        assert!(InitSpec::Explicit { values: vec![f64::INFINITY] }.materialize(1).is_err());
    }

    #[test]
    fn deviation_dynamics_tracks_raw_iteration() {
        let g = crate::graph::largest_component(&crate::graph::generate_sbm(2, 40, 0.4, 0.1, 9).unwrap());
        let z0 = standard_normal(g.node_count(), 4);
        let mut raw = z0.clone();
        let mut dev = DeviationDynamics::new(&g, &z0).unwrap();
        for _ in 0..15 {
            raw = degroot_step(&g, &raw).unwrap().into_inner();
            dev.step();
        }
        let rebuilt = dev.opinions();
        for (a, b) in raw.iter().zip(rebuilt.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(dev.t(), 15);
        let norm: f64 = dev.deviation().iter().map(|w| w * w).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deviation_dynamics_on_constant_init() {
        let g = path3();
        let mut dev = DeviationDynamics::new(&g, &[2.0, 2.0, 2.0]).unwrap();
        assert!(!dev.has_deviation());
        dev.step();
        assert_eq!(dev.opinions().as_slice(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn opinions_csv_forms() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("plain.csv");
        std::fs::write(&plain, "1.5\n-2\n\n3\n").unwrap();
        assert_eq!(read_opinions_csv(&plain).unwrap().as_slice(), &[1.5, -2.0, 3.0]);

        let keyed = dir.path().join("keyed.csv");
        write_opinions_csv(&[0.25, -1.0], &keyed).unwrap();
        assert_eq!(read_opinions_csv(&keyed).unwrap().as_slice(), &[0.25, -1.0]);

        std::fs::write(&keyed, "node,value\n1,2.0\n1,3.0\n").unwrap();
        assert!(read_opinions_csv(&keyed).is_err());
        std::fs::write(&plain, "1.0\nabc\n").unwrap();
        assert!(matches!(read_opinions_csv(&plain), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn trajectory_csv_is_long_format() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("traj.csv");
        let init = InitSpec::Explicit { values: vec![0.0, 3.0, 6.0] };
        run_degroot(&path3(), &init, 1, 1).unwrap().write_csv(&out).unwrap();
        let text = std::fs::read_to_string(out).unwrap();
        assert_eq!(text, "t,node,value\n0,0,0\n0,1,3\n0,2,6\n1,0,3\n1,1,3\n1,2,3\n");
    }
}
