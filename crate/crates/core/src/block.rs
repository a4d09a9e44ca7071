//! Block-structured vectors: an outer l_p sum of finite sup-norm blocks.
//!
//! Every embedding in this crate lands in a space of the form
//! `(B_1 (+) B_2 (+) ...)_p` where each block `B_k` carries the sup norm and
//! the outer combination is an l_p sum. [`BlockVector`] is one element;
//! [`EmbeddingTable`] is a per-point list of compatible elements.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::FiniteMetricSpace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlockError {
    #[error("outer exponent {p} invalid: need p >= 1 or infinity")]
    InvalidOuterExponent { p: f64 },
    #[error("coordinate ({block},{index}) is not finite")]
    NonFiniteCoordinate { block: usize, index: usize },
    #[error("block shapes differ at block {block}: {left} vs {right} coordinates")]
    ShapeMismatch { block: usize, left: usize, right: usize },
    #[error("block counts differ: {left} vs {right}")]
    BlockCountMismatch { left: usize, right: usize },
    #[error("outer exponents differ: {left} vs {right}")]
    ExponentMismatch { left: f64, right: f64 },
    #[error("embedding table must be nonempty")]
    EmptyTable,
    #[error("table has {images} images for {points} points")]
    ImageCountMismatch { images: usize, points: usize },
}

/// Serializes the outer exponent, spelling infinity as the string `"inf"`
/// (JSON has no literal for it).
mod outer_exp {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(p) => Ok(p),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(de::Error::custom(format!("bad outer exponent {t:?}"))),
        }
    }
}

/// One element of a block-sum normed space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVector {
    #[serde(with = "outer_exp")]
    outer_exponent: f64,
    blocks: Vec<Vec<f64>>,
}

impl BlockVector {
    /// `outer_exponent` must be >= 1 (finite) or infinite; all coordinates
    /// must be finite.
    pub fn new(outer_exponent: f64, blocks: Vec<Vec<f64>>) -> Result<Self, BlockError> {
        if outer_exponent.is_nan() || outer_exponent < 1.0 {
            return Err(BlockError::InvalidOuterExponent { p: outer_exponent });
        }
        for (b, block) in blocks.iter().enumerate() {
            for (i, c) in block.iter().enumerate() {
                if !c.is_finite() {
                    return Err(BlockError::NonFiniteCoordinate { block: b, index: i });
                }
            }
        }
        Ok(BlockVector { outer_exponent, blocks })
    }

    /// Single-block convenience constructor.
    pub fn single(outer_exponent: f64, block: Vec<f64>) -> Result<Self, BlockError> {
        Self::new(outer_exponent, vec![block])
    }

    pub fn outer_exponent(&self) -> f64 {
        self.outer_exponent
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn shape(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), BlockError> {
        if self.outer_exponent != other.outer_exponent {
            return Err(BlockError::ExponentMismatch {
                left: self.outer_exponent,
                right: other.outer_exponent,
            });
        }
        if self.blocks.len() != other.blocks.len() {
            return Err(BlockError::BlockCountMismatch {
                left: self.blocks.len(),
                right: other.blocks.len(),
            });
        }
        for (b, (x, y)) in self.blocks.iter().zip(&other.blocks).enumerate() {
            if x.len() != y.len() {
                return Err(BlockError::ShapeMismatch { block: b, left: x.len(), right: y.len() });
            }
        }
        Ok(())
    }

    /// Norm: sup norm inside each block, l_p combination across blocks.
    pub fn norm(&self) -> f64 {
        let block_sups = self.blocks.iter().map(|b| {
            b.iter().fold(0.0_f64, |acc, c| acc.max(c.abs()))
        });
        let p = self.outer_exponent;
        if p.is_infinite() {
            block_sups.fold(0.0, f64::max)
        } else if p == 1.0 {
            block_sups.sum()
        } else if p == 2.0 {
            block_sups.map(|s| s * s).sum::<f64>().sqrt()
        } else {
            block_sups.map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, BlockError> {
        self.check_compatible(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| x.iter().zip(y).map(|(a, b)| a - b).collect())
            .collect();
        Ok(BlockVector { outer_exponent: self.outer_exponent, blocks })
    }

    /// Distance in the block-sum norm.
    pub fn distance(&self, other: &Self) -> Result<f64, BlockError> {
        Ok(self.sub(other)?.norm())
    }

    pub fn scale(&self, c: f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|x| c * x).collect())
            .collect();
        BlockVector { outer_exponent: self.outer_exponent, blocks }
    }

    /// `lambda * self + (1 - lambda) * other`, coordinatewise. Evaluated as
    /// `other + lambda * (self - other)` so equal inputs come back exactly.
    pub fn convex_with(&self, other: &Self, lambda: f64) -> Result<Self, BlockError> {
        self.check_compatible(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| {
                x.iter().zip(y).map(|(a, b)| b + lambda * (a - b)).collect()
            })
            .collect();
        Ok(BlockVector { outer_exponent: self.outer_exponent, blocks })
    }

    pub fn zeros_like(&self) -> Self {
        let blocks = self.blocks.iter().map(|b| vec![0.0; b.len()]).collect();
        BlockVector { outer_exponent: self.outer_exponent, blocks }
    }

    /// Appends one more block; used to adjoin extra certified coordinates.
    pub fn push_block(&mut self, block: Vec<f64>) {
        self.blocks.push(block);
    }
}

/// Norm of a block vector as a free function, for callers that prefer the
/// operation spelled out.
pub fn block_norm(v: &BlockVector) -> f64 {
    v.norm()
}

/// Images of every point of a space under one embedding. All images share the
/// same block shapes and outer exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    images: Vec<BlockVector>,
}

impl EmbeddingTable {
    pub fn new(images: Vec<BlockVector>) -> Result<Self, BlockError> {
        let first = images.first().ok_or(BlockError::EmptyTable)?.clone();
        for img in &images {
            first.check_compatible(img)?;
        }
        Ok(EmbeddingTable { images })
    }

    pub fn point_count(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, i: usize) -> &BlockVector {
        &self.images[i]
    }

    pub fn images(&self) -> &[BlockVector] {
        &self.images
    }

    /// Distance between the images of points `i` and `j`. Compatibility is
    /// guaranteed by construction.
    pub fn pair_distance(&self, i: usize, j: usize) -> f64 {
        self.images[i]
            .distance(&self.images[j])
            .expect("table images are compatible by construction")
    }

    fn check_domain(&self, space: &FiniteMetricSpace) -> Result<(), BlockError> {
        if self.images.len() != space.len() {
            return Err(BlockError::ImageCountMismatch {
                images: self.images.len(),
                points: space.len(),
            });
        }
        Ok(())
    }

    /// Largest ratio image-distance / source-distance over all pairs.
    /// Returns 0 for a single point.
    pub fn lipschitz(&self, space: &FiniteMetricSpace) -> Result<f64, BlockError> {
        self.check_domain(space)?;
        let mut worst = 0.0_f64;
        for (i, j) in space.pairs() {
            worst = worst.max(self.pair_distance(i, j) / space.dist(i, j));
        }
        Ok(worst)
    }

    /// Smallest ratio image-distance / source-distance over all pairs.
    pub fn min_expansion(&self, space: &FiniteMetricSpace) -> Result<f64, BlockError> {
        self.check_domain(space)?;
        let mut best = f64::INFINITY;
        for (i, j) in space.pairs() {
            best = best.min(self.pair_distance(i, j) / space.dist(i, j));
        }
        Ok(best)
    }

    /// Appends, for every point, one extra single-coordinate block produced
    /// by `coord`.
    pub fn with_extra_coordinate(&self, coord: impl Fn(usize) -> f64) -> Self {
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(i, img)| {
                let mut out = img.clone();
                out.push_block(vec![coord(i)]);
                out
            })
            .collect();
        EmbeddingTable { images }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("embedding serialization cannot fail")
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_of_sup_blocks() {
        // Blocks [1, -2] and [2, 2]: sups 2 and 2, outer l2 norm sqrt(8).
        let v = BlockVector::new(2.0, vec![vec![1.0, -2.0], vec![2.0, 2.0]]).unwrap();
        assert!((v.norm() - 8.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn outer_exponent_extremes() {
        let blocks = vec![vec![3.0], vec![-4.0]];
        let l1 = BlockVector::new(1.0, blocks.clone()).unwrap();
        assert_eq!(l1.norm(), 7.0);
        let linf = BlockVector::new(f64::INFINITY, blocks).unwrap();
        assert_eq!(linf.norm(), 4.0);
    }

    #[test]
    fn rejects_invalid_exponent_and_nan() {
        assert_eq!(
            BlockVector::new(0.5, vec![vec![1.0]]).unwrap_err(),
            BlockError::InvalidOuterExponent { p: 0.5 }
        );
        assert!(matches!(
            BlockVector::new(2.0, vec![vec![f64::NAN]]).unwrap_err(),
            BlockError::NonFiniteCoordinate { .. }
        ));
    }

    #[test]
    fn incompatible_shapes_are_rejected() {
        let a = BlockVector::new(2.0, vec![vec![1.0, 2.0]]).unwrap();
        let b = BlockVector::new(2.0, vec![vec![1.0]]).unwrap();
        assert!(matches!(a.sub(&b), Err(BlockError::ShapeMismatch { .. })));
        let c = BlockVector::new(1.0, vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(a.sub(&c), Err(BlockError::ExponentMismatch { .. })));
    }

    #[test]
    fn convex_combination_interpolates() {
        let a = BlockVector::new(2.0, vec![vec![2.0, 0.0]]).unwrap();
        let b = BlockVector::new(2.0, vec![vec![0.0, 4.0]]).unwrap();
        let mid = a.convex_with(&b, 0.25).unwrap();
        assert_eq!(mid.blocks(), &[vec![0.5, 3.0]]);
    }

    #[test]
    fn json_round_trip_with_infinite_exponent() {
        let v = BlockVector::new(f64::INFINITY, vec![vec![1.0, -1.0]]).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.contains("\"inf\""));
        let back: BlockVector = serde_json::from_str(&text).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn table_requires_compatible_images() {
        let a = BlockVector::new(2.0, vec![vec![1.0]]).unwrap();
        let b = BlockVector::new(2.0, vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            EmbeddingTable::new(vec![a, b]),
            Err(BlockError::ShapeMismatch { .. })
        ));
        assert!(matches!(EmbeddingTable::new(vec![]), Err(BlockError::EmptyTable)));
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        fn coords() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-1e6..1e6_f64, 1..6)
        }

        proptest! {
            #[test]
            fn norm_is_absolutely_homogeneous(b1 in coords(), b2 in coords(), c in -32.0..32.0_f64) {
                let v = BlockVector::new(2.0, vec![b1, b2]).unwrap();
                let lhs = v.scale(c).norm();
                let rhs = c.abs() * v.norm();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
            }

            #[test]
            fn norm_satisfies_triangle(pair in coords().prop_flat_map(|b1| {
                let len = b1.len();
                (Just(b1), proptest::collection::vec(-1e6..1e6_f64, len))
            })) {
                let (b1, b2) = pair;
                let x = BlockVector::new(2.0, vec![b1]).unwrap();
                let y = BlockVector::new(2.0, vec![b2]).unwrap();
                let sum_norm = x.sub(&y.scale(-1.0)).unwrap().norm();
                prop_assert!(sum_norm <= x.norm() + y.norm() + 1e-9);
            }

            #[test]
            fn scaling_by_powers_of_two_is_exact(b in coords()) {
                let v = BlockVector::new(2.0, vec![b]).unwrap();
                prop_assert_eq!(v.scale(4.0).norm(), 4.0 * v.norm());
            }
        }
    }
}
