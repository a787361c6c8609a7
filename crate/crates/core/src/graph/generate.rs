use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

/// Block sizes for `n` nodes in `k` blocks: the first `n mod k` blocks get
/// one extra node.
pub fn sbm_block_sizes(k: usize, n: usize) -> Vec<usize> {
    let base = n / k;
    let extra = n % k;
    (0..k).map(|b| base + usize::from(b < extra)).collect()
}

/// Stochastic block model with `k` contiguous blocks.
///
/// Pairs are visited in row-major order `(i, j), i < j`, each consuming one
/// uniform draw, so the edge set is a pure function of the arguments.
pub fn generate_sbm(k: usize, n: usize, p: f64, q: f64, seed: u64) -> Result<Graph> {
    if k == 0 {
        return Err(Error::Parameter("SBM needs at least one block".into()));
    }
    if n < k {
        return Err(Error::Parameter(format!("SBM with {k} blocks needs n >= k, got n = {n}")));
    }
    if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&p) || q > p {
        return Err(Error::Parameter(format!(
            "SBM probabilities must satisfy 0 <= q <= p <= 1, got p = {p}, q = {q}"
        )));
    }

    let mut block = Vec::with_capacity(n);
    for (b, size) in sbm_block_sizes(k, n).into_iter().enumerate() {
        block.extend(std::iter::repeat_n(b, size));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let prob = if block[i] == block[j] { p } else { q };
            if rng.random::<f64>() < prob {
                edges.push((i, j, 1.0));
            }
        }
    }
    Ok(Graph::from_canonical(n, &edges).with_blocks(block))
}

/// Random geometric graph on the unit square: weight-1 edge iff the
/// Euclidean distance is at most `radius`.
pub fn generate_geometric(n: usize, radius: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::Parameter("geometric graph needs n >= 1".into()));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {radius}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();

    // Bucket points into cells of side >= radius; neighbors live in the 3x3 block.
    let cells = ((1.0 / radius).floor() as usize).clamp(1, 1 << 12);
    let cell_of = |x: f64| ((x * cells as f64) as usize).min(cells - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (i, c) in coords.iter().enumerate() {
        buckets[cell_of(c[1]) * cells + cell_of(c[0])].push(i);
    }

    let r2 = radius * radius;
    let mut edges = Vec::new();
    for (i, ci) in coords.iter().enumerate() {
        let (cx, cy) = (cell_of(ci[0]), cell_of(ci[1]));
        for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &j in &buckets[gy * cells + gx] {
                    if j <= i {
                        continue;
                    }
                    let dx = ci[0] - coords[j][0];
                    let dy = ci[1] - coords[j][1];
                    if dx * dx + dy * dy <= r2 {
                        edges.push((i, j, 1.0));
                    }
                }
            }
        }
    }
    edges.sort_by_key(|&(i, j, _)| (i, j));
    Ok(Graph::from_canonical(n, &edges).with_coordinates(coords))
}

/// Uniform-ish random `degree`-regular simple graph by stub pairing with
/// restarts.
pub fn generate_random_regular(n: usize, degree: usize, seed: u64) -> Result<Graph> {
    if degree >= n || !(n * degree).is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "no simple {degree}-regular graph on {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        if let Some(edges) = try_pairing(n, degree, &mut rng) {
            return Graph::from_edges(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)));
        }
    }
    Err(Error::Parameter(format!(
        "failed to sample a {degree}-regular graph on {n} nodes"
    )))
}

fn try_pairing(n: usize, degree: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, degree)).collect();
    stubs.shuffle(rng);
    let mut seen = HashSet::with_capacity(n * degree / 2);
    let mut edges = Vec::with_capacity(n * degree / 2);
    while !stubs.is_empty() {
        let mut placed = false;
        for _ in 0..50 * stubs.len() {
            let a = rng.random_range(0..stubs.len());
            let b = rng.random_range(0..stubs.len());
            let (u, v) = (stubs[a], stubs[b]);
            if a == b || u == v || seen.contains(&(u.min(v), u.max(v))) {
                continue;
            }
            seen.insert((u.min(v), u.max(v)));
            edges.push((u, v));
            let (hi, lo) = if a > b { (a, b) } else { (b, a) };
            stubs.swap_remove(hi);
            stubs.swap_remove(lo);
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }
    Some(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate;

    #[test]
    fn block_sizes_front_load_remainder() {
        assert_eq!(sbm_block_sizes(3, 10), vec![4, 3, 3]);
        assert_eq!(sbm_block_sizes(5, 1000), vec![200; 5]);
    }

    #[test]
    fn single_block_with_p_one_is_complete() {
        let g = generate_sbm(1, 4, 1.0, 0.0, 7).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(validate(&g).regular, Some(3));
    }

    #[test]
    fn sbm_parameter_errors() {
        assert!(generate_sbm(0, 4, 0.5, 0.1, 0).is_err());
        assert!(generate_sbm(5, 4, 0.5, 0.1, 0).is_err());
        assert!(generate_sbm(2, 4, 0.1, 0.5, 0).is_err());
        assert!(generate_sbm(2, 4, 1.5, 0.5, 0).is_err());
        assert!(generate_sbm(2, 4, 0.5, -0.1, 0).is_err());
    }

    #[test]
    fn sbm_edge_count_within_binomial_band() {
        let (n, k, p, q) = (1000usize, 5usize, 0.1, 0.01);
        let g = generate_sbm(k, n, p, q, 2024).unwrap();
        let pairs = |m: usize| (m * (m - 1) / 2) as f64;
        let intra = k as f64 * pairs(n / k);
        let inter = pairs(n) - intra;
        let mean = intra * p + inter * q;
        let sd = (intra * p * (1.0 - p) + inter * q * (1.0 - q)).sqrt();
        assert_eq!(mean, 13950.0);
        assert!((g.edge_count() as f64 - mean).abs() < 5.0 * sd);
        assert!(!g.has_self_loops());
        assert!(g.is_symmetric());
    }

    #[test]
    fn sbm_is_reproducible() {
        let a = generate_sbm(3, 60, 0.3, 0.05, 11).unwrap();
        let b = generate_sbm(3, 60, 0.3, 0.05, 11).unwrap();
        let c = generate_sbm(3, 60, 0.3, 0.05, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.edges().collect::<Vec<_>>(), c.edges().collect::<Vec<_>>());
    }

    #[test]
    fn geometric_large_radius_gives_single_edge() {
        let g = generate_geometric(2, 2.0, 0).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.coordinates().unwrap().len(), 2);
    }

    #[test]
    fn geometric_matches_all_pairs_oracle() {
        let g = generate_geometric(100, 0.1, 99).unwrap();
        let c = g.coordinates().unwrap();
        let mut expected = Vec::new();
        for i in 0..100 {
            for j in i + 1..100 {
                let d = ((c[i][0] - c[j][0]).powi(2) + (c[i][1] - c[j][1]).powi(2)).sqrt();
                if d <= 0.1 {
                    expected.push((i, j, 1.0));
                }
            }
        }
        assert_eq!(g.edges().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn geometric_parameter_errors() {
        assert!(generate_geometric(0, 0.1, 0).is_err());
        assert!(generate_geometric(5, 0.0, 0).is_err());
    }

    #[test]
    fn random_regular_is_regular_and_simple() {
        for (n, d) in [(10, 3), (50, 4), (200, 6), (7, 6)] {
            let g = generate_random_regular(n, d, n as u64).unwrap();
            let r = validate(&g);
            assert_eq!(r.regular, Some(d));
            assert!(!r.self_loops);
            assert!(g.is_unweighted());
        }
        assert!(generate_random_regular(5, 3, 0).is_err());
        assert!(generate_random_regular(4, 4, 0).is_err());
    }
}
