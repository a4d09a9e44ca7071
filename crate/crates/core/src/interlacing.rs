//! Interlacing graphs over k-subsets of `{1..n}` and a finite search for
//! the best interlacing constant of a vertex map.
//!
//! Two strictly increasing k-subsets interlace when one of the two
//! alternating chains of non-strict inequalities holds. The interlacing
//! graph joins exactly the interlacing pairs; its breadth-first metric is
//! the yardstick for Lipschitz constants of vertex maps. The search asks:
//! over ground subsets `S` of size `m`, how small can the image diameter of
//! the vertices inside `S` be, relative to the map's Lipschitz constant?

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::block::EmbeddingTable;
use crate::generate::DEFAULT_POINT_CAP;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterlaceError {
    #[error("subsets have different sizes {a} and {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("subset is not strictly increasing at position {index}")]
    NotSorted { index: usize },
    #[error("subsets must be distinct")]
    EqualSets,
    #[error("subset size k={k} must satisfy 1 <= k <= n={n}")]
    InvalidSubsetSize { k: usize, n: usize },
    #[error("graph would have {vertices} vertices, cap is {cap}")]
    SizeOverflow { vertices: u128, cap: usize },
    #[error("map covers {images} vertices, graph has {vertices}")]
    ImageCountMismatch { images: usize, vertices: usize },
    #[error("search size m={m} must satisfy k={k} <= m <= n={n}")]
    InvalidSearchSize { m: usize, k: usize, n: usize },
}

fn check_sorted(set: &[usize]) -> Result<(), InterlaceError> {
    for i in 1..set.len() {
        if set[i] <= set[i - 1] {
            return Err(InterlaceError::NotSorted { index: i });
        }
    }
    Ok(())
}

/// `low_1 <= high_1 <= low_2 <= high_2 <= ... <= low_k <= high_k`.
fn chain(high: &[usize], low: &[usize]) -> bool {
    let k = high.len();
    for i in 0..k {
        if low[i] > high[i] {
            return false;
        }
        if i + 1 < k && high[i] > low[i + 1] {
            return false;
        }
    }
    true
}

/// Whether two distinct strictly increasing k-subsets interlace: one of the
/// two alternating chains of non-strict inequalities holds.
pub fn interlace(sigma: &[usize], tau: &[usize]) -> Result<bool, InterlaceError> {
    if sigma.len() != tau.len() {
        return Err(InterlaceError::LengthMismatch { a: sigma.len(), b: tau.len() });
    }
    check_sorted(sigma)?;
    check_sorted(tau)?;
    if sigma == tau {
        return Err(InterlaceError::EqualSets);
    }
    Ok(chain(sigma, tau) || chain(tau, sigma))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c.saturating_mul((n - k + i) as u128) / i as u128;
    }
    c
}

/// All k-subsets of `{1..n}` in lexicographic order.
fn lex_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=k).collect();
    loop {
        out.push(current.clone());
        // advance: find rightmost position that can still grow
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - (k - 1 - i) {
                break;
            }
        }
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// The graph of interlacing k-subsets of `{1..n}` with its breadth-first
/// all-pairs metric. Unreachable pairs are stored as `u32::MAX` and flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingGraph {
    pub n: usize,
    pub k: usize,
    /// All k-subsets in colexicographic order.
    pub vertices: Vec<Vec<usize>>,
    /// Flat row-major symmetric boolean matrix.
    pub adjacency: Vec<bool>,
    /// Flat row-major hop counts; `u32::MAX` marks unreachable pairs.
    pub dist: Vec<u32>,
    pub has_unreachable: bool,
}

/// Builds the graph under the default vertex cap.
pub fn build_graph(n: usize, k: usize) -> Result<InterlacingGraph, InterlaceError> {
    build_graph_with_cap(n, k, DEFAULT_POINT_CAP)
}

/// Builds the full adjacency and breadth-first metric, rejecting ground
/// parameters whose subset count exceeds `cap`.
pub fn build_graph_with_cap(
    n: usize,
    k: usize,
    cap: usize,
) -> Result<InterlacingGraph, InterlaceError> {
    if k == 0 || k > n {
        return Err(InterlaceError::InvalidSubsetSize { k, n });
    }
    let count = binomial(n, k);
    if count > cap as u128 {
        return Err(InterlaceError::SizeOverflow { vertices: count, cap });
    }
    let mut vertices = lex_subsets(n, k);
    vertices.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    let v = vertices.len();

    let mut adjacency = vec![false; v * v];
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); v];
    for i in 0..v {
        for j in (i + 1)..v {
            if interlace(&vertices[i], &vertices[j]).expect("distinct sorted subsets") {
                adjacency[i * v + j] = true;
                adjacency[j * v + i] = true;
                neighbors[i].push(j as u32);
                neighbors[j].push(i as u32);
            }
        }
    }

    let mut dist = vec![u32::MAX; v * v];
    let mut queue = std::collections::VecDeque::new();
    for source in 0..v {
        let row = &mut dist[source * v..(source + 1) * v];
        row[source] = 0;
        queue.clear();
        queue.push_back(source as u32);
        while let Some(u) = queue.pop_front() {
            let du = row[u as usize];
            for &w in &neighbors[u as usize] {
                if row[w as usize] == u32::MAX {
                    row[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    let has_unreachable = dist.contains(&u32::MAX);
    Ok(InterlacingGraph { n, k, vertices, adjacency, dist, has_unreachable })
}

impl InterlacingGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.vertices.len() + j]
    }

    /// Hop count between vertices; `u32::MAX` when unreachable.
    pub fn hop_dist(&self, i: usize, j: usize) -> u32 {
        self.dist[i * self.vertices.len() + j]
    }

    /// Largest finite hop count.
    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().filter(|&d| d != u32::MAX).max().unwrap_or(0)
    }

    /// Indices of the vertices whose subset is contained in `s`.
    pub fn vertices_within(&self, s: &[usize]) -> Vec<usize> {
        let member: Vec<bool> = {
            let mut m = vec![false; self.n + 1];
            for &e in s {
                if e <= self.n {
                    m[e] = true;
                }
            }
            m
        };
        (0..self.vertices.len())
            .filter(|&i| self.vertices[i].iter().all(|&e| member[e]))
            .collect()
    }

    /// Breadth-first metric of the subgraph induced by the vertices inside
    /// `s`, indexed like the returned vertex list of
    /// [`Self::vertices_within`]. Induced distances dominate the restricted
    /// ones: deleting vertices only removes paths.
    pub fn induced_metric(&self, s: &[usize]) -> (Vec<usize>, Vec<u32>) {
        let inside = self.vertices_within(s);
        let v = inside.len();
        let mut dist = vec![u32::MAX; v * v];
        let mut queue = std::collections::VecDeque::new();
        for source in 0..v {
            let row = &mut dist[source * v..(source + 1) * v];
            row[source] = 0;
            queue.clear();
            queue.push_back(source);
            while let Some(u) = queue.pop_front() {
                let du = row[u];
                for w in 0..v {
                    if row[w] == u32::MAX && self.adjacent(inside[u], inside[w]) {
                        row[w] = du + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        (inside, dist)
    }

    /// Largest image-distance / hop-distance ratio over reachable pairs.
    fn lipschitz(&self, f: &EmbeddingTable) -> f64 {
        let v = self.vertices.len();
        let mut worst = 0.0_f64;
        for i in 0..v {
            for j in (i + 1)..v {
                let d = self.hop_dist(i, j);
                if d != u32::MAX {
                    worst = worst.max(f.pair_distance(i, j) / d as f64);
                }
            }
        }
        worst
    }
}

/// Outcome of a constant search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QConstantReport {
    /// Smallest achieved image diameter / Lipschitz ratio; 0 when the map
    /// is degenerate.
    pub c_hat: f64,
    /// The ground subset achieving it, sorted.
    pub best_subset: Vec<usize>,
    /// Lipschitz constant of the map against the hop metric.
    pub lipschitz: f64,
    /// Map was constant (zero Lipschitz constant); `c_hat` is vacuous.
    pub degenerate: bool,
    /// Whether every size-m ground subset was enumerated.
    pub exhaustive: bool,
    pub subsets_evaluated: usize,
}

/// How [`q_constant_search`] explores the ground subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Exhaustive when at most [`EXHAUSTIVE_SEARCH_LIMIT`] subsets exist,
    /// greedy otherwise.
    Auto,
    Exhaustive,
    Greedy,
}

/// Largest subset count the automatic mode enumerates exhaustively.
pub const EXHAUSTIVE_SEARCH_LIMIT: u128 = 100_000;
/// Seeded restarts of the greedy descent.
pub const GREEDY_RESTARTS: usize = 64;

/// Searches ground subsets `S` of size `m` for the smallest value of
/// `max image distance within S / Lip(f)`, exhaustively or by steepest
/// single-swap descent from [`GREEDY_RESTARTS`] seeded starts. Ties keep
/// the first subset in enumeration order, so results are deterministic for
/// a fixed seed.
pub fn q_constant_search(
    graph: &InterlacingGraph,
    f: &EmbeddingTable,
    m: usize,
    seed: u64,
) -> Result<QConstantReport, InterlaceError> {
    q_constant_search_mode(graph, f, m, seed, SearchMode::Auto)
}

pub fn q_constant_search_mode(
    graph: &InterlacingGraph,
    f: &EmbeddingTable,
    m: usize,
    seed: u64,
    mode: SearchMode,
) -> Result<QConstantReport, InterlaceError> {
    let v = graph.vertex_count();
    if f.point_count() != v {
        return Err(InterlaceError::ImageCountMismatch { images: f.point_count(), vertices: v });
    }
    if m < graph.k || m > graph.n {
        return Err(InterlaceError::InvalidSearchSize { m, k: graph.k, n: graph.n });
    }
    let lipschitz = graph.lipschitz(f);
    if lipschitz <= 0.0 {
        return Ok(QConstantReport {
            c_hat: 0.0,
            best_subset: (1..=m).collect(),
            lipschitz,
            degenerate: true,
            exhaustive: false,
            subsets_evaluated: 0,
        });
    }

    let image_diameter = |s: &[usize]| -> f64 {
        let inside = graph.vertices_within(s);
        let mut worst = 0.0_f64;
        for a in 0..inside.len() {
            for b in (a + 1)..inside.len() {
                worst = worst.max(f.pair_distance(inside[a], inside[b]));
            }
        }
        worst
    };

    let exhaustive = match mode {
        SearchMode::Exhaustive => true,
        SearchMode::Greedy => false,
        SearchMode::Auto => binomial(graph.n, m) <= EXHAUSTIVE_SEARCH_LIMIT,
    };

    let mut evaluated = 0_usize;
    let (best_subset, best_value) = if exhaustive {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for s in lex_subsets(graph.n, m) {
            let value = image_diameter(&s);
            evaluated += 1;
            if best.as_ref().is_none_or(|(_, b)| value < *b) {
                best = Some((s, value));
            }
        }
        best.expect("at least one size-m subset exists")
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut ground: Vec<usize> = (1..=graph.n).collect();
        for _ in 0..GREEDY_RESTARTS {
            ground.shuffle(&mut rng);
            let mut current: Vec<usize> = ground[..m].to_vec();
            current.sort_unstable();
            let mut current_value = image_diameter(&current);
            evaluated += 1;
            loop {
                // steepest descent over all single swaps, deterministic order
                let mut step: Option<(Vec<usize>, f64)> = None;
                for out_pos in 0..m {
                    for candidate_in in 1..=graph.n {
                        if current.contains(&candidate_in) {
                            continue;
                        }
                        let mut next = current.clone();
                        next[out_pos] = candidate_in;
                        next.sort_unstable();
                        let value = image_diameter(&next);
                        evaluated += 1;
                        if value < current_value
                            && step.as_ref().is_none_or(|(_, s)| value < *s)
                        {
                            step = Some((next, value));
                        }
                    }
                }
                match step {
                    Some((next, value)) => {
                        current = next;
                        current_value = value;
                    }
                    None => break,
                }
            }
            if best.as_ref().is_none_or(|(_, b)| current_value < *b) {
                best = Some((current, current_value));
            }
        }
        best.expect("restarts produce at least one candidate")
    };

    Ok(QConstantReport {
        c_hat: best_value / lipschitz,
        best_subset,
        lipschitz,
        degenerate: false,
        exhaustive,
        subsets_evaluated: evaluated,
    })
}
