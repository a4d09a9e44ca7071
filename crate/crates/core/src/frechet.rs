//! Coordinate embeddings from distance functions.
//!
//! Given anchor points `s_1 < s_2 < ...` and a base point `b`, each point `t`
//! maps to the single-block vector `(d(t, s) - d(s, b))_s`. Under the sup
//! norm this map is 1-Lipschitz, sends the base point to the origin, and is
//! an exact isometry when every point is an anchor (the coordinate at `s = x`
//! or `s = y` realizes `d(x, y)`). The unshifted variant `(d(t, s))_s` keeps
//! the same distances but not the zero image.

use thiserror::Error;

use crate::block::{BlockVector, EmbeddingTable};
use crate::space::FiniteMetricSpace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("anchor set is empty")]
    EmptyAnchors,
    #[error("anchor {anchor} out of range for {points} points")]
    AnchorOutOfRange { anchor: usize, points: usize },
    #[error("base {base} out of range for {points} points")]
    BaseOutOfRange { base: usize, points: usize },
    #[error("modulus diameter {modulus} does not match space diameter {space}")]
    ModulusDiameterMismatch { modulus: f64, space: f64 },
    #[error("modulus table must be strictly decreasing; offending sample index {index}")]
    NonDecreasingModulus { index: usize },
    #[error("modulus table needs at least two samples and positive diameter")]
    DegenerateModulus,
    #[error("space needs at least two points to choose a truncation depth")]
    TooFewPoints,
}

/// Distance-coordinate embedding with base-point shift. Anchors are sorted
/// ascending (duplicates dropped) so coordinate order is reproducible.
pub fn frechet(
    space: &FiniteMetricSpace,
    anchors: &[usize],
    base: usize,
) -> Result<EmbeddingTable, EmbedError> {
    build(space, anchors, Some(base))
}

/// Unshifted variant: raw distance coordinates `(d(t, s))_s`.
pub fn frechet_unshifted(
    space: &FiniteMetricSpace,
    anchors: &[usize],
) -> Result<EmbeddingTable, EmbedError> {
    build(space, anchors, None)
}

fn build(
    space: &FiniteMetricSpace,
    anchors: &[usize],
    base: Option<usize>,
) -> Result<EmbeddingTable, EmbedError> {
    if anchors.is_empty() {
        return Err(EmbedError::EmptyAnchors);
    }
    let mut sorted: Vec<usize> = anchors.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &a in &sorted {
        if a >= space.len() {
            return Err(EmbedError::AnchorOutOfRange { anchor: a, points: space.len() });
        }
    }
    if let Some(b) = base {
        if b >= space.len() {
            return Err(EmbedError::BaseOutOfRange { base: b, points: space.len() });
        }
    }
    let shift: Vec<f64> = sorted
        .iter()
        .map(|&s| base.map_or(0.0, |b| space.dist(s, b)))
        .collect();
    let images = (0..space.len())
        .map(|t| {
            let coords = sorted
                .iter()
                .zip(&shift)
                .map(|(&s, &sh)| space.dist(t, s) - sh)
                .collect();
            BlockVector::single(2.0, coords).expect("distance coordinates are finite")
        })
        .collect();
    Ok(EmbeddingTable::new(images).expect("images share one shape by construction"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, SpaceKind};

    fn path(n: usize) -> FiniteMetricSpace {
        generate(&SpaceKind::Path { n }).unwrap()
    }

    #[test]
    fn two_anchor_image_on_a_path() {
        // Anchors {0, 10}, base 0: point 5 maps to (5, -5).
        let m = path(11);
        let f = frechet(&m, &[0, 10], 0).unwrap();
        assert_eq!(f.image(5).blocks(), &[vec![5.0, -5.0]]);
        assert_eq!(f.image(0).blocks(), &[vec![0.0, 0.0]]);
        assert_eq!(f.image(10).blocks(), &[vec![10.0, -10.0]]);
    }

    #[test]
    fn base_point_maps_to_zero() {
        let m = generate(&SpaceKind::GridSubset { dim: 2, n: 15, seed: 3 }).unwrap();
        let anchors: Vec<usize> = (0..m.len()).collect();
        let f = frechet(&m, &anchors, 4).unwrap();
        assert_eq!(f.image(4).norm(), 0.0);
    }

    #[test]
    fn full_anchor_embedding_is_an_isometry() {
        let m = generate(&SpaceKind::RandomLpSubset { p: 2.0, dim: 3, n: 40, seed: 5 }).unwrap();
        let anchors: Vec<usize> = (0..m.len()).collect();
        let f = frechet(&m, &anchors, 0).unwrap();
        for (x, y) in m.pairs() {
            assert!((f.pair_distance(x, y) - m.dist(x, y)).abs() <= 1e-12);
        }
    }

    #[test]
    fn unshifted_variant_has_equal_pair_distances() {
        let m = path(9);
        let anchors = [0, 4, 8];
        let shifted = frechet(&m, &anchors, 0).unwrap();
        let raw = frechet_unshifted(&m, &anchors).unwrap();
        for (x, y) in m.pairs() {
            assert_eq!(shifted.pair_distance(x, y), raw.pair_distance(x, y));
        }
        assert_ne!(raw.image(0).norm(), 0.0);
    }

    #[test]
    fn anchor_errors() {
        let m = path(5);
        assert_eq!(frechet(&m, &[], 0).unwrap_err(), EmbedError::EmptyAnchors);
        assert_eq!(
            frechet(&m, &[9], 0).unwrap_err(),
            EmbedError::AnchorOutOfRange { anchor: 9, points: 5 }
        );
        assert_eq!(
            frechet(&m, &[1], 7).unwrap_err(),
            EmbedError::BaseOutOfRange { base: 7, points: 5 }
        );
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;
        use crate::nets::greedy_net;

        proptest! {
            // Any anchor subset yields a 1-Lipschitz map.
            #[test]
            fn anchored_maps_never_expand(seed in 0u64..300, keep in 1usize..20) {
                let m = generate(&SpaceKind::RandomLpSubset { p: 1.0, dim: 2, n: 20, seed }).unwrap();
                let anchors: Vec<usize> = (0..m.len()).step_by(20 / keep.min(19) + 1).collect();
                let f = frechet(&m, &anchors, 0).unwrap();
                for (x, y) in m.pairs() {
                    prop_assert!(f.pair_distance(x, y) <= m.dist(x, y) + 1e-12);
                }
            }

            // With net anchors of precision delta, distances shrink by at
            // most 2 * delta: the coordinate at the anchor nearest y already
            // recovers d(x, y) - 2 * delta.
            #[test]
            fn net_anchored_maps_lose_at_most_two_delta(seed in 0u64..300) {
                let m = generate(&SpaceKind::GridSubset { dim: 2, n: 25, seed }).unwrap();
                let net = greedy_net(&m, m.diam() / 4.0).unwrap();
                let f = frechet(&m, &net.members, 0).unwrap();
                for (x, y) in m.pairs() {
                    let lower = m.dist(x, y) - 2.0 * net.precision;
                    prop_assert!(f.pair_distance(x, y) >= lower - 1e-12);
                }
            }
        }
    }
}
