//! Multiscale embedding of a bounded space driven by a decay modulus.
//!
//! A [`DecayModulus`] `mu` maps distances in `(0, D]` onto scales: `mu(D) = 0`,
//! `mu` is strictly decreasing, and `mu(t) -> infinity` as `t -> 0`. Its
//! inverse `sigma(k)` hands each integer depth `k >= 1` a distance scale. The
//! embedding builds, for every depth `k`, a maximal `sigma(k)/16`-net, takes
//! distance coordinates over that net, scales the block by `1/k`, and
//! combines all blocks in an outer l_2 sum.
//!
//! The certificate checks, for every pair at distance `d`:
//!
//! * upper: `|f(x) - f(y)| <= U * d` with `U = sqrt(sum_{k<=K} k^-2)`, which
//!   is below `pi/sqrt(6)` for every depth (each block is 1-Lipschitz).
//! * lower: with `l+1` the smallest depth whose scale is `<= d`, the single
//!   block at depth `j = min(l+1, K)` already certifies
//!   `|f(x) - f(y)| >= (d - 2 r_j) / j >= d / (2 (l+1))`, where `r_j` is the
//!   measured net precision. Depths beyond the truncation are never needed:
//!   at depth `K` the net is the whole space and `r_K = 0`.

use serde::{Deserialize, Serialize};

use crate::block::{BlockVector, EmbeddingTable};
use crate::frechet::{frechet, EmbedError};
use crate::nets::greedy_net;
use crate::space::FiniteMetricSpace;
use crate::tol;

/// Upper limit of the outer constant: `sqrt(sum_{k>=1} k^-2) = pi / sqrt(6)`.
pub const OUTER_CONSTANT_LIMIT: f64 = 1.282549830161864;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Form {
    /// `mu(t) = log2(diam / t)`.
    Log2,
    /// Piecewise-linear through `(t, mu)` samples with `t` ascending and
    /// `mu` strictly decreasing to 0 at `t = diam`. Below the first sample
    /// the modulus continues with slope one doubling per unit, so `sigma`
    /// stays positive and strictly decreasing.
    Table { points: Vec<(f64, f64)> },
}

/// Strictly decreasing scale modulus on `(0, diam]` with a piecewise inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayModulus {
    diam: f64,
    form: Form,
}

impl DecayModulus {
    /// The logarithmic modulus `mu(t) = log2(diam / t)`.
    pub fn log2(diam: f64) -> Result<Self, EmbedError> {
        if diam <= 0.0 || !diam.is_finite() {
            return Err(EmbedError::DegenerateModulus);
        }
        Ok(DecayModulus { diam, form: Form::Log2 })
    }

    /// Sampled modulus. `points` holds `(t, mu(t))` with `t` strictly
    /// ascending, `mu` strictly descending, and the last sample `(diam, 0)`.
    pub fn from_table(points: Vec<(f64, f64)>) -> Result<Self, EmbedError> {
        if points.len() < 2 {
            return Err(EmbedError::DegenerateModulus);
        }
        for (i, &(t, m)) in points.iter().enumerate() {
            if t <= 0.0 || !t.is_finite() || !m.is_finite() || m < 0.0 {
                return Err(EmbedError::DegenerateModulus);
            }
            if i > 0 {
                if t <= points[i - 1].0 {
                    return Err(EmbedError::DegenerateModulus);
                }
                if m >= points[i - 1].1 {
                    return Err(EmbedError::NonDecreasingModulus { index: i });
                }
            }
        }
        let &(diam, last_mu) = points.last().expect("len checked");
        if last_mu != 0.0 {
            return Err(EmbedError::DegenerateModulus);
        }
        Ok(DecayModulus { diam, form: Form::Table { points } })
    }

    pub fn diam(&self) -> f64 {
        self.diam
    }

    /// Modulus value at a distance `t` in `(0, diam]`.
    pub fn mu(&self, t: f64) -> f64 {
        match &self.form {
            Form::Log2 => (self.diam / t).log2(),
            Form::Table { points } => {
                let first = points[0];
                if t < first.0 {
                    return first.1 + (first.0 / t).log2();
                }
                for w in points.windows(2) {
                    let (t0, m0) = w[0];
                    let (t1, m1) = w[1];
                    if t <= t1 {
                        return m0 + (m1 - m0) * (t - t0) / (t1 - t0);
                    }
                }
                0.0
            }
        }
    }

    /// Inverse of the modulus: the distance scale of depth `k`. For `k <= 0`
    /// this is the diameter.
    pub fn sigma(&self, k: f64) -> f64 {
        if k <= 0.0 {
            return self.diam;
        }
        match &self.form {
            Form::Log2 => self.diam * (-k).exp2(),
            Form::Table { points } => {
                let first = points[0];
                if k > first.1 {
                    return first.0 * (first.1 - k).exp2();
                }
                for w in points.windows(2) {
                    let (t0, m0) = w[0];
                    let (t1, m1) = w[1];
                    // mu descends from m0 to m1 on this segment
                    if k >= m1 {
                        return t1 + (t0 - t1) * (k - m1) / (m0 - m1);
                    }
                }
                self.diam
            }
        }
    }

    /// Smallest depth `j >= 1` whose scale is `<= d`; equivalently the
    /// dyadic index with `sigma(j) <= d < sigma(j - 1)`, ties resolved
    /// toward the smaller index. Distances at the diameter clamp to 1.
    pub fn block_index(&self, d: f64) -> usize {
        if self.sigma(1.0) <= d {
            return 1;
        }
        // exponential bracket, then binary search on the monotone predicate
        let mut lo = 1_usize; // sigma(lo) > d
        let mut hi = 2_usize;
        while self.sigma(hi as f64) > d {
            lo = hi;
            hi *= 2;
            assert!(hi < 1 << 40, "modulus does not decay toward 0");
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.sigma(mid as f64) <= d {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// Smallest depth `K >= 1` with `sigma(K)/16` below the smallest positive
/// distance. At that depth the net is the entire space, so deeper blocks
/// would only repeat scaled copies of the same coordinates.
pub fn truncation_depth(
    space: &FiniteMetricSpace,
    mu: &DecayModulus,
) -> Result<usize, EmbedError> {
    let min_d = space.min_positive_distance().ok_or(EmbedError::TooFewPoints)?;
    let mut k = 1_usize;
    while mu.sigma(k as f64) / 16.0 >= min_d {
        k += 1;
        assert!(k < 1 << 40, "modulus does not decay toward 0");
    }
    Ok(k)
}

/// Identifies a checked pair and the realized slack of its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSlack {
    pub x: usize,
    pub y: usize,
    /// `bound - value` for upper bounds, `value - bound` for lower bounds;
    /// negative means the bound failed.
    pub slack: f64,
}

/// Pairwise certification record for the multiscale embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactCertificate {
    pub depth: usize,
    /// `sqrt(sum_{k<=depth} k^-2)`, the realized Lipschitz constant bound.
    pub upper_constant: f64,
    /// `pi/sqrt(6)`, the depth-independent ceiling of `upper_constant`.
    pub upper_constant_limit: f64,
    pub net_sizes: Vec<usize>,
    pub net_precisions: Vec<f64>,
    pub pairs_checked: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub worst_upper: PairSlack,
    pub worst_lower: PairSlack,
}

impl CompactCertificate {
    pub fn ok(&self) -> bool {
        self.upper_ok && self.lower_ok
    }
}

/// Builds the truncated multiscale embedding and certifies both bounds over
/// every pair. The modulus must match the space's diameter.
pub fn compact_embedding(
    space: &FiniteMetricSpace,
    mu: &DecayModulus,
) -> Result<(EmbeddingTable, CompactCertificate), EmbedError> {
    use rayon::prelude::*;

    let diam = space.diam();
    if (diam - mu.diam()).abs() > tol::DIAM_MATCH_ABS {
        return Err(EmbedError::ModulusDiameterMismatch { modulus: mu.diam(), space: diam });
    }
    let depth = truncation_depth(space, mu)?;
    let base = space.base_or_default();

    let mut net_sizes = Vec::with_capacity(depth);
    let mut net_precisions = Vec::with_capacity(depth);
    let mut scaled_blocks: Vec<Vec<Vec<f64>>> = Vec::with_capacity(depth);
    for k in 1..=depth {
        let radius = mu.sigma(k as f64) / 16.0;
        let net = greedy_net(space, radius).expect("net radius is positive");
        let coords = frechet(space, &net.members, base)?;
        net_sizes.push(net.members.len());
        net_precisions.push(net.precision);
        let inv_k = 1.0 / k as f64;
        scaled_blocks.push(
            (0..space.len())
                .map(|t| coords.image(t).blocks()[0].iter().map(|c| c * inv_k).collect())
                .collect(),
        );
    }

    let images: Vec<BlockVector> = (0..space.len())
        .map(|t| {
            let blocks = scaled_blocks.iter().map(|per_point| per_point[t].clone()).collect();
            BlockVector::new(2.0, blocks).expect("coordinates are finite")
        })
        .collect();
    let table = EmbeddingTable::new(images).expect("shapes agree across points");

    let upper_constant = (1..=depth).map(|k| (k as f64).powi(-2)).sum::<f64>().sqrt();
    let pairs: Vec<(usize, usize)> = space.pairs().collect();
    struct PairStats {
        max_ratio: f64,
        min_ratio: f64,
        worst_upper: PairSlack,
        worst_lower: PairSlack,
    }
    let identity = PairStats {
        max_ratio: 0.0,
        min_ratio: f64::INFINITY,
        worst_upper: PairSlack { x: 0, y: 0, slack: f64::INFINITY },
        worst_lower: PairSlack { x: 0, y: 0, slack: f64::INFINITY },
    };
    let merge = |a: PairStats, b: PairStats| PairStats {
        max_ratio: a.max_ratio.max(b.max_ratio),
        min_ratio: a.min_ratio.min(b.min_ratio),
        worst_upper: if a.worst_upper.slack <= b.worst_upper.slack { a.worst_upper } else { b.worst_upper },
        worst_lower: if a.worst_lower.slack <= b.worst_lower.slack { a.worst_lower } else { b.worst_lower },
    };
    let stats = pairs
        .par_iter()
        .map(|&(x, y)| {
            let d = space.dist(x, y);
            let v = table.pair_distance(x, y);
            let dyadic = mu.block_index(d);
            let j = dyadic.min(depth);
            let measured_bound = (d - 2.0 * net_precisions[j - 1]) / j as f64;
            let guaranteed_bound = 0.5 * d / dyadic as f64;
            let lower_bound = measured_bound.max(guaranteed_bound);
            PairStats {
                max_ratio: v / d,
                min_ratio: v / d,
                worst_upper: PairSlack { x, y, slack: upper_constant * d - v },
                worst_lower: PairSlack { x, y, slack: v - lower_bound },
            }
        })
        .reduce(
            || PairStats {
                max_ratio: identity.max_ratio,
                min_ratio: identity.min_ratio,
                worst_upper: identity.worst_upper,
                worst_lower: identity.worst_lower,
            },
            merge,
        );

    let cert = CompactCertificate {
        depth,
        upper_constant,
        upper_constant_limit: OUTER_CONSTANT_LIMIT,
        net_sizes,
        net_precisions,
        pairs_checked: pairs.len(),
        max_ratio: stats.max_ratio,
        min_ratio: stats.min_ratio,
        upper_ok: stats.worst_upper.slack >= -tol::CERT_ABS,
        lower_ok: stats.worst_lower.slack >= -tol::CERT_ABS,
        worst_upper: stats.worst_upper,
        worst_lower: stats.worst_lower,
    };
    Ok((table, cert))
}
