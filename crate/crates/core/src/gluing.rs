//! Gluing per-annulus embeddings into one map with a certified Lipschitz
//! constant.
//!
//! Points are sorted into dyadic annuli by their distance to the base point:
//! annulus `n` holds points with `2^n <= d(x, t0) < 2^(n+1)`. A
//! [`LocalEmbeddingFamily`] supplies, per level `n`, a map `f_n` defined on
//! the ball `B_n = { x : d(x, t0) <= 2^(n+1) }` that fixes the base at the
//! origin and satisfies `d <= |f_n(x) - f_n(y)| <= (1 + eps0) d` there.
//! Gluing blends the two maps straddling each point's annulus with the
//! weight `lambda_x = (2^(n+1) - d(x, t0)) / 2^n` and certifies that the
//! result is `9 (1 + eps0)`-Lipschitz (the worst case: pairs in adjacent
//! annuli pay for both blend weights and one local map).
//!
//! [`augment_with_radius`] appends the scaled radius `c * d(x, t0)` as an
//! extra block. For pairs whose annuli differ by at least 2, the radius gap
//! alone is at least a quarter of their distance, so the augmented map
//! separates them by `(c/4) d(x, y)`.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{BlockError, BlockVector, EmbeddingTable};
use crate::space::FiniteMetricSpace;
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlueError {
    #[error("eps0 {eps0} must be finite and >= 0")]
    InvalidEps0 { eps0: f64 },
    #[error("point {point} is at distance 0 from the base and has no annulus")]
    BasePointHasNoAnnulus { point: usize },
    #[error("no local map for level {level}")]
    MissingLocalMap { level: i32 },
    #[error("local map for level {level} is undefined at point {point} inside its ball")]
    IncompleteLocalMap { level: i32, point: usize },
    #[error("local map for level {level} sends the base point to norm {norm}, expected 0")]
    BaseImageNonzero { level: i32, norm: f64 },
    #[error(
        "local map for level {level} breaks its contract on pair ({x},{y}): \
         distance {distance}, image distance {image_distance}"
    )]
    LocalContractViolation { level: i32, x: usize, y: usize, distance: f64, image_distance: f64 },
    #[error("family covers {actual} points, space has {expected}")]
    PointCountMismatch { expected: usize, actual: usize },
    #[error("radius coordinate scale {c} must be positive and finite")]
    NonpositiveScale { c: f64 },
    #[error(transparent)]
    Block(#[from] BlockError),
}

fn pow2(n: i32) -> f64 {
    (n as f64).exp2()
}

/// The unique `n` with `2^n <= d(x, t0) < 2^(n+1)`. The base point itself
/// (radius 0) has no annulus.
pub fn annulus_index(space: &FiniteMetricSpace, x: usize) -> Result<i32, GlueError> {
    let r = space.dist(x, space.base_or_default());
    if r <= 0.0 {
        return Err(GlueError::BasePointHasNoAnnulus { point: x });
    }
    let mut n = r.log2().floor() as i32;
    // fp fixups so the half-open interval is exact even on boundaries
    while pow2(n + 1) <= r {
        n += 1;
    }
    while r < pow2(n) {
        n -= 1;
    }
    Ok(n)
}

/// Validated family of per-level local embeddings. `maps[&n][x]` is the
/// image of point `x` under `f_n`, present for every `x` in the ball `B_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalEmbeddingFamily {
    eps0: f64,
    point_count: usize,
    maps: BTreeMap<i32, Vec<Option<BlockVector>>>,
}

impl LocalEmbeddingFamily {
    /// Validates shape compatibility, base-point images, ball coverage and
    /// the bi-Lipschitz contract of every level.
    pub fn new(
        space: &FiniteMetricSpace,
        eps0: f64,
        maps: BTreeMap<i32, Vec<Option<BlockVector>>>,
    ) -> Result<Self, GlueError> {
        if !eps0.is_finite() || eps0 < 0.0 {
            return Err(GlueError::InvalidEps0 { eps0 });
        }
        let n_points = space.len();
        let base = space.base_or_default();
        let mut template: Option<&BlockVector> = None;
        for (&level, images) in &maps {
            if images.len() != n_points {
                return Err(GlueError::PointCountMismatch {
                    expected: n_points,
                    actual: images.len(),
                });
            }
            let ball_radius = pow2(level + 1);
            let in_ball = |x: usize| space.dist(x, base) <= ball_radius;
            for (x, image) in images.iter().enumerate() {
                match image {
                    Some(img) => {
                        if let Some(t) = template {
                            // one shape across every level
                            t.sub(img)?;
                        } else {
                            template = Some(img);
                        }
                    }
                    None if in_ball(x) => {
                        return Err(GlueError::IncompleteLocalMap { level, point: x });
                    }
                    None => {}
                }
            }
            if let Some(img) = &images[base] {
                let norm = img.norm();
                if norm > tol::CERT_ABS {
                    return Err(GlueError::BaseImageNonzero { level, norm });
                }
            }
            for x in 0..n_points {
                if !in_ball(x) {
                    continue;
                }
                for y in (x + 1)..n_points {
                    if !in_ball(y) {
                        continue;
                    }
                    let (Some(ix), Some(iy)) = (&images[x], &images[y]) else { continue };
                    let d = space.dist(x, y);
                    let v = ix.distance(iy)?;
                    if v < d - tol::CERT_ABS || v > (1.0 + eps0) * d + tol::CERT_ABS {
                        return Err(GlueError::LocalContractViolation {
                            level,
                            x,
                            y,
                            distance: d,
                            image_distance: v,
                        });
                    }
                }
            }
        }
        Ok(LocalEmbeddingFamily { eps0, point_count: n_points, maps })
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> + '_ {
        self.maps.keys().copied()
    }

    pub fn maps(&self) -> &BTreeMap<i32, Vec<Option<BlockVector>>> {
        &self.maps
    }

    /// Exact local isometries from distance coordinates: level `n` uses the
    /// points of `B_n` as anchors, with coordinates padded to the full point
    /// count so every level shares one block shape. Satisfies the contract
    /// with `eps0 = 0`.
    pub fn full_frechet(space: &FiniteMetricSpace) -> Result<Self, GlueError> {
        Self::full_frechet_scaled(space, 0.0, |_| 1.0)
    }

    /// Synthetic family for stress-testing the glue bound: the exact local
    /// isometries of [`Self::full_frechet`], with every level scaled by its
    /// own factor in `[1, 1 + eps0)` drawn from the seed. Each level still
    /// honors the contract at the declared `eps0`.
    pub fn scaled_perturbation(
        space: &FiniteMetricSpace,
        eps0: f64,
        seed: u64,
    ) -> Result<Self, GlueError> {
        if !eps0.is_finite() || eps0 < 0.0 {
            return Err(GlueError::InvalidEps0 { eps0 });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut factors: BTreeMap<i32, f64> = BTreeMap::new();
        for level in occupied_levels(space)? {
            factors.insert(level, 1.0 + eps0 * rng.gen_range(0.0..1.0));
        }
        Self::full_frechet_scaled(space, eps0, |level| factors.get(&level).copied().unwrap_or(1.0))
    }

    fn full_frechet_scaled(
        space: &FiniteMetricSpace,
        eps0: f64,
        factor: impl Fn(i32) -> f64,
    ) -> Result<Self, GlueError> {
        let n_points = space.len();
        let base = space.base_or_default();
        let mut maps: BTreeMap<i32, Vec<Option<BlockVector>>> = BTreeMap::new();
        for level in occupied_levels(space)? {
            let ball_radius = pow2(level + 1);
            let anchors: Vec<usize> =
                (0..n_points).filter(|&s| space.dist(s, base) <= ball_radius).collect();
            let gamma = factor(level);
            let images = (0..n_points)
                .map(|x| {
                    if space.dist(x, base) > ball_radius {
                        return None;
                    }
                    let mut coords = vec![0.0; n_points];
                    for &s in &anchors {
                        coords[s] = gamma * (space.dist(x, s) - space.dist(s, base));
                    }
                    Some(BlockVector::single(2.0, coords).expect("finite coordinates"))
                })
                .collect();
            maps.insert(level, images);
        }
        Self::new(space, eps0, maps)
    }
}

/// Levels needed to glue over `space`: every occupied annulus and its
/// successor.
fn occupied_levels(space: &FiniteMetricSpace) -> Result<Vec<i32>, GlueError> {
    let base = space.base_or_default();
    let mut levels: Vec<i32> = Vec::new();
    for x in 0..space.len() {
        if x == base {
            continue;
        }
        let n = annulus_index(space, x)?;
        for candidate in [n, n + 1] {
            if !levels.contains(&candidate) {
                levels.push(candidate);
            }
        }
    }
    levels.sort_unstable();
    Ok(levels)
}

/// Certification record for a glued embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueCertificate {
    pub eps0: f64,
    /// `9 (1 + eps0)`.
    pub lip_bound: f64,
    pub measured_lip: f64,
    pub pairs_checked: usize,
    pub worst_pair: (usize, usize),
    pub ok: bool,
}

/// Blends the family into one embedding of the whole space and certifies the
/// Lipschitz bound over every pair.
pub fn glue(
    space: &FiniteMetricSpace,
    family: &LocalEmbeddingFamily,
) -> Result<(EmbeddingTable, GlueCertificate), GlueError> {
    if family.point_count != space.len() {
        return Err(GlueError::PointCountMismatch {
            expected: space.len(),
            actual: family.point_count,
        });
    }
    let base = space.base_or_default();
    let template = family
        .maps
        .values()
        .flat_map(|imgs| imgs.iter().flatten())
        .next()
        .cloned()
        .unwrap_or_else(|| BlockVector::new(2.0, vec![]).expect("empty vector is valid"));
    let zero = template.zeros_like();

    let image_at = |level: i32, x: usize| -> Result<&BlockVector, GlueError> {
        family
            .maps
            .get(&level)
            .ok_or(GlueError::MissingLocalMap { level })?
            .get(x)
            .and_then(Option::as_ref)
            .ok_or(GlueError::IncompleteLocalMap { level, point: x })
    };

    let mut images: Vec<BlockVector> = Vec::with_capacity(space.len());
    for x in 0..space.len() {
        let r = space.dist(x, base);
        if r == 0.0 {
            images.push(zero.clone());
            continue;
        }
        let n = annulus_index(space, x)?;
        // r < 2^(n+1) strictly, so lambda > 0 and f_n is always consulted
        let lambda = (pow2(n + 1) - r) / pow2(n);
        let low = image_at(n, x)?;
        if lambda >= 1.0 {
            images.push(low.clone());
        } else {
            let high = image_at(n + 1, x)?;
            images.push(low.convex_with(high, lambda)?);
        }
    }
    let table = EmbeddingTable::new(images)?;

    let lip_bound = 9.0 * (1.0 + family.eps0);
    let mut measured_lip = 0.0_f64;
    let mut worst_pair = (0, 0);
    let mut pairs_checked = 0_usize;
    for (x, y) in space.pairs() {
        let ratio = table.pair_distance(x, y) / space.dist(x, y);
        pairs_checked += 1;
        if ratio > measured_lip {
            measured_lip = ratio;
            worst_pair = (x, y);
        }
    }
    let cert = GlueCertificate {
        eps0: family.eps0,
        lip_bound,
        measured_lip,
        pairs_checked,
        worst_pair,
        ok: measured_lip <= lip_bound + tol::CERT_ABS,
    };
    Ok((table, cert))
}

/// Appends the scaled radius `c * d(x, t0)` as an extra block of every
/// image. Adds at most `c` to the Lipschitz constant and separates pairs in
/// distant annuli by `(c/4) d(x, y)`.
pub fn augment_with_radius(
    space: &FiniteMetricSpace,
    table: &EmbeddingTable,
    c: f64,
) -> Result<EmbeddingTable, GlueError> {
    if c <= 0.0 || !c.is_finite() {
        return Err(GlueError::NonpositiveScale { c });
    }
    if table.point_count() != space.len() {
        return Err(GlueError::PointCountMismatch {
            expected: space.len(),
            actual: table.point_count(),
        });
    }
    let base = space.base_or_default();
    Ok(table.with_extra_coordinate(|x| c * space.dist(x, base)))
}
