//! Deterministic generators for test-scale metric spaces.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::space::{FiniteMetricSpace, MetricError};

/// Default cap on generated point counts. Keeps every pairwise certification
/// in this crate interactive. Override per call, or via the
/// `METRIC_EMBED_CAP` environment variable in the command-line tool.
pub const DEFAULT_POINT_CAP: usize = 2000;

/// Families of spaces the generator knows how to build. All variants are
/// deterministic for fixed parameters (including the seed).
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind {
    /// Points 0..n-1 on a line with distance `|i - j|`.
    Path { n: usize },
    /// Complete binary tree of the given depth with the graph metric.
    /// Depth 0 is a single root.
    BinaryTree { depth: usize },
    /// `n` distinct lattice points sampled uniformly from a `dim`-dimensional
    /// box, with the Euclidean metric.
    GridSubset { dim: usize, n: usize, seed: u64 },
    /// `n` points with uniform coordinates in [0, 10)^dim under the l_p
    /// metric (`p >= 1`, or infinite for the sup metric).
    RandomLpSubset { p: f64, dim: usize, n: usize, seed: u64 },
}

/// Builds a space under the default point cap.
pub fn generate(kind: &SpaceKind) -> Result<FiniteMetricSpace, MetricError> {
    generate_with_cap(kind, DEFAULT_POINT_CAP)
}

/// Builds a space, rejecting constructions with more than `cap` points.
pub fn generate_with_cap(kind: &SpaceKind, cap: usize) -> Result<FiniteMetricSpace, MetricError> {
    match *kind {
        SpaceKind::Path { n } => path(n, cap),
        SpaceKind::BinaryTree { depth } => binary_tree(depth, cap),
        SpaceKind::GridSubset { dim, n, seed } => grid_subset(dim, n, seed, cap),
        SpaceKind::RandomLpSubset { p, dim, n, seed } => random_lp_subset(p, dim, n, seed, cap),
    }
}

/// `m + 1` evenly spaced points `{0, 1/m, ..., 1}` of the unit interval,
/// based at 0. The canonical bounded fixture for multiscale embeddings.
pub fn unit_interval(m: usize) -> Result<FiniteMetricSpace, MetricError> {
    if m == 0 {
        return Err(MetricError::Empty);
    }
    let n = m + 1;
    let labels = (0..n).map(|i| format!("{i}/{m}")).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = ((i as f64) - (j as f64)).abs() / m as f64;
        }
    }
    FiniteMetricSpace::from_flat(labels, dist, Some(0))
}

fn check_cap(requested: usize, cap: usize) -> Result<(), MetricError> {
    if requested == 0 {
        return Err(MetricError::Empty);
    }
    if requested > cap {
        return Err(MetricError::SizeOverflow { requested, cap });
    }
    Ok(())
}

fn path(n: usize, cap: usize) -> Result<FiniteMetricSpace, MetricError> {
    check_cap(n, cap)?;
    let labels = (0..n).map(|i| i.to_string()).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = (i as f64 - j as f64).abs();
        }
    }
    FiniteMetricSpace::from_flat(labels, dist, Some(0))
}

fn binary_tree(depth: usize, cap: usize) -> Result<FiniteMetricSpace, MetricError> {
    // Nodes 0..2^(depth+1)-2 in heap order; children of i are 2i+1, 2i+2.
    let n = (1_usize << (depth + 1)) - 1;
    check_cap(n, cap)?;
    let node_depth = |mut v: usize| {
        let mut d = 0;
        while v > 0 {
            v = (v - 1) / 2;
            d += 1;
        }
        d
    };
    // Graph distance via the lowest common ancestor.
    let dist_uv = |mut u: usize, mut v: usize| {
        let mut steps = 0_usize;
        let (mut du, mut dv) = (node_depth(u), node_depth(v));
        while du > dv {
            u = (u - 1) / 2;
            du -= 1;
            steps += 1;
        }
        while dv > du {
            v = (v - 1) / 2;
            dv -= 1;
            steps += 1;
        }
        while u != v {
            u = (u - 1) / 2;
            v = (v - 1) / 2;
            steps += 2;
        }
        steps as f64
    };
    let labels = (0..n).map(|i| i.to_string()).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dist[i * n + j] = dist_uv(i, j);
            }
        }
    }
    FiniteMetricSpace::from_flat(labels, dist, Some(0))
}

fn grid_subset(dim: usize, n: usize, seed: u64, cap: usize) -> Result<FiniteMetricSpace, MetricError> {
    check_cap(n, cap)?;
    assert!(dim >= 1, "grid dimension must be at least 1");
    // A box with ~3n lattice sites leaves room for distinct samples while
    // spreading radii over several dyadic scales.
    let side = ((3 * n) as f64).powf(1.0 / dim as f64).ceil().max(2.0) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<i64>> = Vec::with_capacity(n);
    while points.len() < n {
        let candidate: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..side)).collect();
        if !points.contains(&candidate) {
            points.push(candidate);
        }
    }
    let labels = points
        .iter()
        .map(|p| p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let sq: i64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let d = (sq as f64).sqrt();
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    FiniteMetricSpace::from_flat(labels, dist, Some(0))
}

fn random_lp_subset(
    p: f64,
    dim: usize,
    n: usize,
    seed: u64,
    cap: usize,
) -> Result<FiniteMetricSpace, MetricError> {
    check_cap(n, cap)?;
    assert!(dim >= 1, "dimension must be at least 1");
    assert!(p >= 1.0 || p.is_infinite(), "lp exponent must be >= 1 or infinite");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    while points.len() < n {
        let candidate: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..10.0)).collect();
        if !points.contains(&candidate) {
            points.push(candidate);
        }
    }
    let lp = |a: &[f64], b: &[f64]| -> f64 {
        if p.is_infinite() {
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        } else if p == 1.0 {
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
        } else if p == 2.0 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        } else {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p)
        }
    };
    let labels = (0..n).map(|i| i.to_string()).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = lp(&points[i], &points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    FiniteMetricSpace::from_flat(labels, dist, Some(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_spans_zero_to_one() {
        let m = unit_interval(16).unwrap();
        assert_eq!(m.len(), 17);
        assert_eq!(m.diam(), 1.0);
        assert_eq!(m.dist(0, 4), 0.25);
        assert_eq!(m.label(1), "1/16");
        assert_eq!(m.base_or_default(), 0);
        assert!(unit_interval(0).is_err());
    }

    #[test]
    fn path_distances_are_index_differences() {
        let m = generate(&SpaceKind::Path { n: 11 }).unwrap();
        assert_eq!(m.len(), 11);
        assert_eq!(m.dist(0, 10), 10.0);
        assert_eq!(m.dist(3, 7), 4.0);
        assert_eq!(m.diam(), 10.0);
        assert_eq!(m.base_index(), Some(0));
    }

    #[test]
    fn depth_two_tree_matches_hand_distances() {
        // 7 nodes: root 0; inner 1, 2; leaves 3, 4, 5, 6.
        let m = generate(&SpaceKind::BinaryTree { depth: 2 }).unwrap();
        assert_eq!(m.len(), 7);
        assert_eq!(m.dist(0, 3), 2.0); // root to a leaf
        assert_eq!(m.dist(3, 4), 2.0); // sibling leaves
        assert_eq!(m.dist(3, 6), 4.0); // leaves across the root
        assert_eq!(m.dist(1, 2), 2.0);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn tree_metric_agrees_with_shortest_path_oracle() {
        // Floyd-Warshall over the explicit edge list, written independently
        // of the ancestor-walk used by the generator.
        let m = generate(&SpaceKind::BinaryTree { depth: 3 }).unwrap();
        let n = m.len();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for v in 0..n {
            d[v][v] = 0.0;
        }
        for v in 1..n {
            let parent = (v - 1) / 2;
            d[v][parent] = 1.0;
            d[parent][v] = 1.0;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(m.dist(i, j), d[i][j], "nodes {i},{j}");
            }
        }
    }

    #[test]
    fn seeded_generators_are_reproducible() {
        let kind = SpaceKind::GridSubset { dim: 2, n: 40, seed: 7 };
        let a = generate(&kind).unwrap();
        let b = generate(&kind).unwrap();
        assert_eq!(a, b);
        let other = generate(&SpaceKind::GridSubset { dim: 2, n: 40, seed: 8 }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn random_lp_subsets_validate_for_all_exponents() {
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            let m = generate(&SpaceKind::RandomLpSubset { p, dim: 3, n: 30, seed: 11 }).unwrap();
            assert_eq!(m.len(), 30);
            assert!(m.min_positive_distance().unwrap() > 0.0);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = generate_with_cap(&SpaceKind::Path { n: 2001 }, 2000).unwrap_err();
        assert_eq!(err, MetricError::SizeOverflow { requested: 2001, cap: 2000 });
        let err = generate_with_cap(&SpaceKind::BinaryTree { depth: 11 }, 2000).unwrap_err();
        assert_eq!(err, MetricError::SizeOverflow { requested: 4095, cap: 2000 });
    }
}
