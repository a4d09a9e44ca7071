//! Finite metric spaces with validated distance matrices.
//!
//! A [`FiniteMetricSpace`] owns a symmetric, strictly positive off-diagonal,
//! triangle-checked distance matrix together with point labels and an
//! optional distinguished base point. Construction is the only way to obtain
//! one, so every downstream operation may assume the axioms hold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tol;

/// Errors raised while building or transforming a metric space.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("distance matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("expected {points} labels, got {labels}")]
    LabelCountMismatch { points: usize, labels: usize },
    #[error("distance entry ({i},{j}) is not finite")]
    NonFiniteEntry { i: usize, j: usize },
    #[error("diagonal entry ({i},{i}) is {value}, expected 0")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("matrix is asymmetric at ({i},{j}): {dij} vs {dji}")]
    AsymmetricMatrix { i: usize, j: usize, dij: f64, dji: f64 },
    #[error("off-diagonal entry ({i},{j}) is {value}, expected > 0")]
    NegativeOrZeroOffDiagonal { i: usize, j: usize, value: f64 },
    #[error("triangle inequality fails at ({i},{j},{k}): d({i},{j}) = {dij} > {dik} + {dkj}")]
    TriangleViolation { i: usize, j: usize, k: usize, dij: f64, dik: f64, dkj: f64 },
    #[error("base index {base} out of range for {points} points")]
    BaseOutOfRange { base: usize, points: usize },
    #[error("snowflake exponent {s} outside (0, 1)")]
    InvalidExponent { s: f64 },
    #[error("requested {requested} points, cap is {cap}")]
    SizeOverflow { requested: usize, cap: usize },
    #[error("space must be nonempty")]
    Empty,
}

/// Serialized form: labels, row-major distance matrix, optional base index.
#[derive(Serialize, Deserialize)]
struct SpaceJson {
    labels: Vec<String>,
    dist: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<usize>,
}

/// A validated finite metric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceJson", into = "SpaceJson")]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    /// Row-major `n * n` distances.
    dist: Vec<f64>,
    n: usize,
    base_index: Option<usize>,
}

impl TryFrom<SpaceJson> for FiniteMetricSpace {
    type Error = MetricError;

    fn try_from(raw: SpaceJson) -> Result<Self, MetricError> {
        let n = raw.labels.len();
        if n * n != raw.dist.len() {
            return Err(MetricError::NotSquare { rows: n, row: 0, cols: raw.dist.len() });
        }
        FiniteMetricSpace::from_flat(raw.labels, raw.dist, raw.base)
    }
}

impl From<FiniteMetricSpace> for SpaceJson {
    fn from(space: FiniteMetricSpace) -> SpaceJson {
        SpaceJson { labels: space.labels, dist: space.dist, base: space.base_index }
    }
}

impl FiniteMetricSpace {
    /// Validates a full matrix given as rows. Checks run in a fixed order and
    /// report the first violated axiom with witness indices: shape, label
    /// count, finiteness, zero diagonal, symmetry, positivity, triangle.
    pub fn from_matrix(
        labels: Vec<String>,
        rows: Vec<Vec<f64>>,
        base: Option<usize>,
    ) -> Result<Self, MetricError> {
        let n = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare { rows: n, row, cols: r.len() });
            }
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(labels, flat, base)
    }

    /// Validates a row-major flat matrix. See [`Self::from_matrix`].
    pub fn from_flat(
        labels: Vec<String>,
        dist: Vec<f64>,
        base: Option<usize>,
    ) -> Result<Self, MetricError> {
        let n = labels.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if dist.len() != n * n {
            return Err(MetricError::NotSquare { rows: n, row: 0, cols: dist.len() });
        }
        let at = |i: usize, j: usize| dist[i * n + j];
        for i in 0..n {
            for j in 0..n {
                if !at(i, j).is_finite() {
                    return Err(MetricError::NonFiniteEntry { i, j });
                }
            }
        }
        for i in 0..n {
            if at(i, i) != 0.0 {
                return Err(MetricError::NonzeroDiagonal { i, value: at(i, i) });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if at(i, j) != at(j, i) {
                    return Err(MetricError::AsymmetricMatrix {
                        i,
                        j,
                        dij: at(i, j),
                        dji: at(j, i),
                    });
                }
                if at(i, j) <= 0.0 {
                    return Err(MetricError::NegativeOrZeroOffDiagonal { i, j, value: at(i, j) });
                }
            }
        }
        // Exhaustive O(n^3) scan. The slack only absorbs rounding of distances
        // that satisfy a degenerate triangle equality in exact arithmetic.
        if let Some((i, j, k)) = first_triangle_violation(&dist, n) {
            return Err(MetricError::TriangleViolation {
                i,
                j,
                k,
                dij: at(i, j),
                dik: at(i, k),
                dkj: at(k, j),
            });
        }
        if let Some(b) = base {
            if b >= n {
                return Err(MetricError::BaseOutOfRange { base: b, points: n });
            }
        }
        Ok(FiniteMetricSpace { labels, dist, n, base_index: base })
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Distance between points `i` and `j`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Declared base point, if any.
    pub fn base_index(&self) -> Option<usize> {
        self.base_index
    }

    /// Base point used by operations that need one; defaults to point 0.
    pub fn base_or_default(&self) -> usize {
        self.base_index.unwrap_or(0)
    }

    /// Returns a copy with the given base point.
    pub fn with_base(&self, base: usize) -> Result<Self, MetricError> {
        if base >= self.n {
            return Err(MetricError::BaseOutOfRange { base, points: self.n });
        }
        let mut out = self.clone();
        out.base_index = Some(base);
        Ok(out)
    }

    /// Largest pairwise distance (0 for a single point).
    pub fn diam(&self) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// Smallest positive pairwise distance. `None` for a single point.
    pub fn min_positive_distance(&self) -> Option<f64> {
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                best = best.min(self.dist(i, j));
            }
        }
        if best.is_finite() {
            Some(best)
        } else {
            None
        }
    }

    /// All unordered pairs `(i, j)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }

    /// Applies `d -> d^s` for `s` in (0, 1). The result is again a metric
    /// (concave powers preserve the triangle inequality), so no revalidation
    /// is needed; labels and base are kept.
    pub fn snowflake(&self, s: f64) -> Result<Self, MetricError> {
        if !(s > 0.0 && s < 1.0) || !s.is_finite() {
            return Err(MetricError::InvalidExponent { s });
        }
        let dist = self.dist.iter().map(|&d| d.powf(s)).collect();
        Ok(FiniteMetricSpace {
            labels: self.labels.clone(),
            dist,
            n: self.n,
            base_index: self.base_index,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("space serialization cannot fail")
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Earliest `(i, j, k)` in scan order with `d(i,j) > d(i,k) + d(k,j)` beyond
/// rounding slack. Rows are scanned in parallel; the reduce keeps the
/// lexicographically smallest witness, so the result is deterministic.
fn first_triangle_violation(dist: &[f64], n: usize) -> Option<(usize, usize, usize)> {
    use rayon::prelude::*;
    let at = |i: usize, j: usize| dist[i * n + j];
    (0..n)
        .into_par_iter()
        .filter_map(|i| {
            for j in 0..n {
                if j == i {
                    continue;
                }
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    if at(i, j) > at(i, k) + at(k, j) + tol::TRIANGLE_ABS {
                        return Some((i, j, k));
                    }
                }
            }
            None
        })
        .min()
}
