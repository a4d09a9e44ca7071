//! Centralized numeric tolerances.
//!
//! Every certification in this crate compares floating-point quantities that
//! are mathematically guaranteed to satisfy an inequality in exact arithmetic.
//! The slack constants below absorb f64 rounding only; they are deliberately
//! far below any quantity of interest at desk scale (distances in roughly
//! [1e-6, 1e6]).

/// Absolute slack used by every bound certification (Lipschitz constants,
/// embedding envelopes, retraction error bounds).
pub const CERT_ABS: f64 = 1e-9;

/// Tight slack for identities that hold exactly up to a few ulps, such as the
/// full-anchor coordinate embedding being an isometry.
pub const EXACT_ABS: f64 = 1e-12;

/// Slack admitted by the triangle-inequality scan in the validator. Distances
/// produced by rounded square roots of exact squared lengths can undershoot a
/// degenerate (collinear) triangle equality by a few ulps.
pub const TRIANGLE_ABS: f64 = 1e-9;

/// Agreement required between a decay modulus' declared diameter and the
/// diameter of the space being embedded.
pub const DIAM_MATCH_ABS: f64 = 1e-6;

/// Round-trip error allowed for a modulus and its piecewise inverse.
pub const MODULUS_INVERSE_ABS: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::assertions_on_constants)]
    fn tolerances_are_positive_and_ordered() {
        assert!(EXACT_ABS > 0.0);
        assert!(CERT_ABS > 0.0);
        assert!(EXACT_ABS < CERT_ABS);
        assert!(CERT_ABS <= TRIANGLE_ABS);
        assert!(CERT_ABS < DIAM_MATCH_ABS);
    }
}
