//! Leading eigenpairs of the normalized adjacency matrix and the equilibrium
//! direction of centered, normalized DeGroot opinions.
//!
//! All work happens on the symmetric twin `M = D^-1/2 A D^-1/2`, which shares
//! its eigenvalues with `D^-1 A`. The top pair of `M` is known in closed form
//! (`lambda_1 = 1`, `v_1' = D^1/2 1 / ||D^1/2 1||`) and is projected out
//! analytically. The remaining pairs come from block power iteration on `M^2`
//! (so eigenvalues of either sign converge by magnitude) with a Rayleigh-Ritz
//! projection onto `M` at each sweep, which recovers signed eigenvalues.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Relative threshold on `|lambda_2| - |lambda_3|` below which the summary is
/// flagged degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    /// Residual bound `||M v - lambda v||_2` for every returned pair.
    pub tol: f64,
    /// Block sweeps; `None` means `max(100 n, 100_000)`.
    pub max_iters: Option<usize>,
    /// Seed for the random starting block.
    pub seed: u64,
    /// Number of vectors iterated together, guard vectors included.
    pub block_size: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-10,
            max_iters: None,
            seed: 0x5eed_0fd3_6700,
            block_size: 8,
        }
    }
}

impl EigenOptions {
    fn max_iters_for(&self, n: usize) -> usize {
        self.max_iters.unwrap_or_else(|| (100 * n).max(100_000))
    }
}

/// Top eigenvalues of `D^-1 A` sorted by magnitude, with the second
/// eigenvector in both forms and the derived equilibrium direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: Option<f64>,
    /// Unit right eigenvector of `D^-1 A`, sign-normalized.
    pub v2: Vec<f64>,
    /// Unit eigenvector of `D^-1/2 A D^-1/2`, sign-normalized.
    pub v2_sym: Vec<f64>,
    /// Unit-norm, mean-centered, sign-normalized `v2`.
    pub sbar_star: Vec<f64>,
    pub gap1: f64,
    pub gap2: Option<f64>,
    /// `||M v - lambda v||_2` for each returned pair, `lambda1` first.
    pub residuals: Vec<f64>,
    pub degenerate: bool,
    pub iterations: usize,
}

#[derive(Serialize)]
struct SummaryExport<'a> {
    lambda1: f64,
    lambda2: f64,
    lambda3: Option<f64>,
    gap1: f64,
    gap2: Option<f64>,
    degenerate: bool,
    residuals: &'a [f64],
}

impl SpectralSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SummaryExport {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda3: self.lambda3,
            gap1: self.gap1,
            gap2: self.gap2,
            degenerate: self.degenerate,
            residuals: &self.residuals,
        })
        .expect("summary serializes")
    }
}

/// `x -> D^-1/2 A D^-1/2 x`.
pub(crate) struct NormalizedAdjacency<'g> {
    graph: &'g Graph,
    inv_sqrt_degree: Vec<f64>,
}

impl<'g> NormalizedAdjacency<'g> {
    pub(crate) fn new(graph: &'g Graph) -> Result<Self> {
        graph.require_no_isolated()?;
        let inv_sqrt_degree = graph.degrees().iter().map(|d| 1.0 / d.sqrt()).collect();
        Ok(NormalizedAdjacency { graph, inv_sqrt_degree })
    }

    pub(crate) fn apply(&self, x: &[f64], y: &mut [f64]) {
        let s = &self.inv_sqrt_degree;
        for (i, out) in y.iter_mut().enumerate() {
            let (nbrs, ws) = self.graph.neighbors(i);
            let acc: f64 = nbrs.iter().zip(ws).map(|(&j, &w)| w * s[j] * x[j]).sum();
            *out = s[i] * acc;
        }
    }

    fn apply_block(&self, block: &[Vec<f64>]) -> Vec<Vec<f64>> {
        block
            .par_iter()
            .map(|x| {
                let mut y = vec![0.0; x.len()];
                self.apply(x, &mut y);
                y
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn residual(mv: &[f64], v: &[f64], lambda: f64) -> f64 {
    mv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Orthonormalizes `block` against `fixed` (already orthonormal) and itself.
/// Columns that collapse are refilled from `rng`.
fn orthonormalize(block: &mut [Vec<f64>], fixed: &[f64], rng: &mut ChaCha8Rng) {
    for j in 0..block.len() {
        for attempt in 0..8 {
            let before = norm(&block[j]);
            for _ in 0..2 {
                let c = dot(fixed, &block[j]);
                axpy(-c, fixed, &mut block[j]);
                for i in 0..j {
                    let (done, rest) = block.split_at_mut(j);
                    let c = dot(&done[i], &rest[0]);
                    axpy(-c, &done[i], &mut rest[0]);
                }
            }
            let after = norm(&block[j]);
            if after > 1e-10 * before.max(f64::MIN_POSITIVE) && after > 0.0 {
                block[j].iter_mut().for_each(|x| *x /= after);
                break;
            }
            assert!(attempt < 7, "could not extend orthonormal block");
            block[j] = random_vector(block[j].len(), rng);
        }
    }
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Cyclic Jacobi eigensolver for a small dense symmetric matrix.
/// Returns eigenvalues and eigenvectors as columns `vecs[row][col]`.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = a.len();
    let mut v: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                #[allow(clippy::needless_range_loop)]
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..m).map(|i| a[i][i]).collect(), v)
}

/// Orders eigenvalues by magnitude, positive first on ties.
fn magnitude_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
    });
    idx
}

/// Computes `lambda_1..lambda_k` (k in {2, 3}) of `D^-1 A` for a connected graph.
pub fn top_eigenpairs(g: &Graph, k: usize, opts: &EigenOptions) -> Result<SpectralSummary> {
    if !(2..=3).contains(&k) {
        return Err(Error::Parameter(format!("k must be 2 or 3, got {k}")));
    }
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Parameter("need at least two nodes for a second eigenpair".into()));
    }
    g.require_connected()?;
    let op = NormalizedAdjacency::new(g)?;

    let sqrt_d: Vec<f64> = g.degrees().iter().map(|d| d.sqrt()).collect();
    let s = norm(&sqrt_d);
    let v1: Vec<f64> = sqrt_d.iter().map(|x| x / s).collect();
    let mut mv1 = vec![0.0; n];
    op.apply(&v1, &mut mv1);
    let res1 = residual(&mv1, &v1, 1.0);

    let complement = n - 1;
    let wanted = (k - 1).min(complement);
    let width = opts.block_size.max(wanted).min(complement);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<Vec<f64>> = (0..width).map(|_| random_vector(n, &mut rng)).collect();

    let max_iters = opts.max_iters_for(n);
    let mut last_residual = f64::INFINITY;
    for iter in 1..=max_iters {
        orthonormalize(&mut block, &v1, &mut rng);
        let image = op.apply_block(&block);

        let mut h = vec![vec![0.0; width]; width];
        for i in 0..width {
            for j in i..width {
                let hij = 0.5 * (dot(&block[i], &image[j]) + dot(&block[j], &image[i]));
                h[i][j] = hij;
                h[j][i] = hij;
            }
        }
        let (theta, q) = jacobi_eigen(h);
        let order = magnitude_order(&theta);

        let combine = |cols: &[Vec<f64>], c: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (r, col) in cols.iter().enumerate() {
                axpy(q[r][c], col, &mut out);
            }
            out
        };
        let ritz: Vec<Vec<f64>> = order.iter().map(|&c| combine(&block, c)).collect();
        let ritz_image: Vec<Vec<f64>> = order.iter().map(|&c| combine(&image, c)).collect();
        let values: Vec<f64> = order.iter().map(|&c| theta[c]).collect();

        let residuals: Vec<f64> = (0..wanted)
            .map(|j| residual(&ritz_image[j], &ritz[j], values[j]))
            .collect();
        last_residual = residuals.iter().cloned().fold(0.0, f64::max);
        if last_residual <= opts.tol {
            return finish(g, &v1, res1, ritz, values, wanted, iter, &op);
        }
        // Next block: M applied to the Ritz images, i.e. M^2 on the Ritz basis.
        block = op.apply_block(&ritz_image);
    }
    Err(Error::Convergence { iterations: max_iters, residual: last_residual })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    g: &Graph,
    v1: &[f64],
    res1: f64,
    mut ritz: Vec<Vec<f64>>,
    values: Vec<f64>,
    wanted: usize,
    iterations: usize,
    op: &NormalizedAdjacency<'_>,
) -> Result<SpectralSummary> {
    let n = g.node_count();
    let mut residuals = vec![res1];
    for (j, vec) in ritz.iter_mut().enumerate().take(wanted) {
        // Final clean-up against the known top eigenvector.
        let c = dot(v1, vec);
        axpy(-c, v1, vec);
        let len = norm(vec);
        vec.iter_mut().for_each(|x| *x /= len);
        let mut mv = vec![0.0; n];
        op.apply(vec, &mut mv);
        residuals.push(residual(&mv, vec, values[j]));
    }

    let v2_sym = sign_normalize(&ritz[0])?;
    let mut v2: Vec<f64> = v2_sym
        .iter()
        .zip(g.degrees())
        .map(|(x, d)| x / d.sqrt())
        .collect();
    let len = norm(&v2);
    v2.iter_mut().for_each(|x| *x /= len);
    let sbar_star = centered_direction(&v2)?;

    let lambda1 = 1.0;
    let lambda2 = values[0];
    let lambda3 = (wanted >= 2).then(|| values[1]);
    let gap1 = (lambda1 - lambda2.abs()) / lambda1;
    let gap2 = lambda3.map(|l3| {
        if lambda2 == 0.0 {
            0.0
        } else {
            (lambda2.abs() - l3.abs()) / lambda2.abs()
        }
    });
    let degenerate = lambda3
        .is_some_and(|l3| lambda2.abs() - l3.abs() <= DEGENERACY_THRESHOLD * lambda2.abs());

    Ok(SpectralSummary {
        lambda1,
        lambda2,
        lambda3,
        v2,
        v2_sym,
        sbar_star,
        gap1,
        gap2,
        residuals,
        degenerate,
        iterations,
    })
}

fn centered_direction(v: &[f64]) -> Result<Vec<f64>> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let centered: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let len = norm(&centered);
    if len <= 1e-300 {
        return Err(Error::Internal("second eigenvector has zero centered part".into()));
    }
    let signed = sign_normalize(&centered)?;
    Ok(signed.into_iter().map(|x| x / len).collect())
}

/// Flips `x` so that its first nonzero entry is positive.
pub fn sign_normalize(x: &[f64]) -> Result<Vec<f64>> {
    let first = x
        .iter()
        .find(|&&v| v != 0.0)
        .ok_or_else(|| Error::Degenerate("cannot sign-normalize the zero vector".into()))?;
    let sign = first.signum();
    Ok(x.iter().map(|v| sign * v).collect())
}

/// Limit of the normalized, centered DeGroot opinions for a connected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumDirection {
    pub vector: Vec<f64>,
    /// `|lambda_2| = |lambda_3|` within tolerance; the limit may not exist.
    pub degenerate: bool,
}

pub fn equilibrium_direction(g: &Graph) -> Result<EquilibriumDirection> {
    let summary = top_eigenpairs(g, 3, &EigenOptions::default())?;
    if summary.degenerate {
        log::warn!(
            "|lambda2| ~ |lambda3| ({} vs {:?}); equilibrium direction is not unique",
            summary.lambda2,
            summary.lambda3
        );
    }
    Ok(EquilibriumDirection {
        vector: summary.sbar_star,
        degenerate: summary.degenerate,
    })
}

/// `sign_normalize(z - mean(z) 1) / ||z - mean(z) 1||_2`.
pub fn normalized_deviation(z: &[f64]) -> Result<Vec<f64>> {
    if z.is_empty() {
        return Err(Error::Degenerate("empty opinion vector".into()));
    }
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let centered: Vec<f64> = z.iter().map(|x| x - mean).collect();
    let len = norm(&centered);
    if len == 0.0 {
        return Err(Error::Degenerate("opinions are constant".into()));
    }
    Ok(sign_normalize(&centered)?.into_iter().map(|x| x / len).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
    }

    #[test]
    fn sign_normalize_examples() {
        assert_eq!(sign_normalize(&[-2.0, 1.0]).unwrap(), vec![2.0, -1.0]);
        assert_eq!(sign_normalize(&[0.0, 3.0, -1.0]).unwrap(), vec![0.0, 3.0, -1.0]);
        assert_eq!(sign_normalize(&[0.0, -3.0, 1.0]).unwrap(), vec![0.0, 3.0, -1.0]);
        assert!(matches!(sign_normalize(&[0.0, 0.0]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn normalized_deviation_examples() {
        let r = normalized_deviation(&[1.0, -1.0]).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((r[0] - h).abs() < 1e-15 && (r[1] + h).abs() < 1e-15);
        assert!(normalized_deviation(&[5.0, 5.0]).is_err());
    }

    #[test]
    fn complete_graph_is_degenerate() {
        let s = top_eigenpairs(&complete(4), 3, &EigenOptions::default()).unwrap();
        assert!((s.lambda1 - 1.0).abs() < 1e-12);
        assert!((s.lambda2 + 1.0 / 3.0).abs() < 1e-10);
        assert!((s.lambda3.unwrap() + 1.0 / 3.0).abs() < 1e-10);
        assert!(s.degenerate);
    }

    #[test]
    fn four_cycle_puts_minus_one_second() {
        let s = top_eigenpairs(&cycle(4), 3, &EigenOptions::default()).unwrap();
        assert!((s.lambda2 + 1.0).abs() < 1e-10);
        assert!(s.lambda3.unwrap().abs() < 1e-10);
        assert!(!s.degenerate);
        assert!(s.gap1.abs() < 1e-10);
    }

    #[test]
    fn path_graph_second_pair() {
        // P3: D^-1 A has eigenvalues 1, 0, -1.
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = top_eigenpairs(&g, 3, &EigenOptions::default()).unwrap();
        assert!((s.lambda2 + 1.0).abs() < 1e-10);
        assert!(s.lambda3.unwrap().abs() < 1e-10);
        // v2 of D^-1 A for P3 is proportional to (1, -1, 1).
        let r = 1.0 / 3f64.sqrt();
        for (a, b) in s.v2.iter().zip([r, -r, r]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn two_node_graph_has_no_third_pair() {
        let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let s = top_eigenpairs(&g, 3, &EigenOptions::default()).unwrap();
        assert!((s.lambda2 + 1.0).abs() < 1e-12);
        assert_eq!(s.lambda3, None);
        assert_eq!(s.gap2, None);
        assert!(!s.degenerate);
    }

    #[test]
    fn rejects_bad_inputs() {
        let split = Graph::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(
            top_eigenpairs(&split, 2, &EigenOptions::default()),
            Err(Error::Disconnected { .. })
        ));
        assert!(top_eigenpairs(&complete(3), 4, &EigenOptions::default()).is_err());
        let lone = Graph::from_edges(1, [(0, 0, 1.0)]).unwrap();
        assert!(top_eigenpairs(&lone, 2, &EigenOptions::default()).is_err());
    }

    #[test]
    fn convergence_error_reports_residual() {
        let g = crate::graph::largest_component(&crate::graph::generate_sbm(3, 90, 0.3, 0.05, 4).unwrap());
        let opts = EigenOptions { max_iters: Some(1), tol: 1e-14, ..Default::default() };
        match top_eigenpairs(&g, 3, &opts) {
            Err(Error::Convergence { iterations: 1, residual }) => assert!(residual > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn summary_invariants_on_sbm() {
        let g = crate::graph::largest_component(&crate::graph::generate_sbm(2, 200, 0.3, 0.01, 21).unwrap());
        let s = top_eigenpairs(&g, 3, &EigenOptions::default()).unwrap();
        assert!(s.lambda2.abs() >= s.lambda3.unwrap().abs());
        assert!(s.residuals.iter().all(|&r| r <= 1e-10));
        let sqrt_d: Vec<f64> = g.degrees().iter().map(|d| d.sqrt()).collect();
        let v1_norm = norm(&sqrt_d);
        assert!((dot(&s.v2_sym, &sqrt_d) / v1_norm).abs() <= 1e-10);

        let mean = s.sbar_star.iter().sum::<f64>() / s.sbar_star.len() as f64;
        assert!(mean.abs() < 1e-10);
        assert!((norm(&s.sbar_star) - 1.0).abs() < 1e-12);
        assert!(s.sbar_star.iter().find(|&&x| x != 0.0).unwrap() > &0.0);

        // Right-eigenvector residual of D^-1 A.
        let mut av = vec![0.0; g.node_count()];
        g.adjacency_mul(&s.v2, &mut av);
        let res: f64 = av
            .iter()
            .zip(g.degrees())
            .zip(&s.v2)
            .map(|((a, d), v)| (a / d - s.lambda2 * v).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(res <= 1e-6);

        // Block membership is recovered by the sign pattern.
        let blocks = g.blocks().unwrap();
        let first = s.sbar_star[0] > 0.0;
        let agree = s
            .sbar_star
            .iter()
            .zip(blocks)
            .all(|(&x, &b)| (x > 0.0) == ((b == blocks[0]) == first));
        assert!(agree);

        let json: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(json["degenerate"], false);
        assert_eq!(json["residuals"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn jacobi_small_matrix() {
        let (vals, vecs) = jacobi_eigen(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] - 1.0).abs() < 1e-14 && (sorted[1] - 3.0).abs() < 1e-14);
        let i3 = vals.iter().position(|&v| (v - 3.0).abs() < 1e-9).unwrap();
        assert!((vecs[0][i3].abs() - vecs[1][i3].abs()).abs() < 1e-14);
    }

    #[test]
    fn magnitude_order_prefers_positive_on_ties() {
        assert_eq!(magnitude_order(&[-0.5, 0.2, 0.5, -0.9]), vec![3, 2, 0, 1]);
    }
}
