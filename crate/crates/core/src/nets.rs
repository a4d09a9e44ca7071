//! Separated nets and nearest-member retractions.
//!
//! A [`Skeleton`] is a maximal eps-separated subset of a space: members are
//! pairwise at distance >= eps, and maximality forces every other point
//! within eps of some member. Both quantities are stored as *measured*
//! values: `separation` is the realized minimum over member pairs and
//! `precision` the realized worst distance from a point to its nearest
//! member, so certificates never rely on the requested radius alone.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::FiniteMetricSpace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("separation radius {eps} must be positive and finite")]
    InvalidEpsilon { eps: f64 },
    #[error("skeleton has no members")]
    EmptySkeleton,
    #[error("skeleton was built over {expected} points, space has {actual}")]
    SpaceMismatch { expected: usize, actual: usize },
    #[error("skeleton member {member} out of range for {points} points")]
    MemberOutOfRange { member: usize, points: usize },
}

/// Serializes `f64::INFINITY` (the separation of a singleton skeleton) as
/// JSON `null`.
mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_none()
        } else {
            s.serialize_some(v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// A maximal separated subset with measured quality numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    /// Member point indices, ascending (the greedy scan visits in index order).
    pub members: Vec<usize>,
    /// Radius the net was requested at.
    pub requested_eps: f64,
    /// Measured minimum pairwise distance among members; infinite for a
    /// singleton.
    #[serde(with = "inf_as_null")]
    pub separation: f64,
    /// Measured maximum over points of the distance to the nearest member.
    pub precision: f64,
    /// Size of the space the skeleton was built over.
    pub parent_size: usize,
}

impl Skeleton {
    fn check_against(&self, space: &FiniteMetricSpace) -> Result<(), NetError> {
        if self.members.is_empty() {
            return Err(NetError::EmptySkeleton);
        }
        if self.parent_size != space.len() {
            return Err(NetError::SpaceMismatch { expected: self.parent_size, actual: space.len() });
        }
        for &m in &self.members {
            if m >= space.len() {
                return Err(NetError::MemberOutOfRange { member: m, points: space.len() });
            }
        }
        Ok(())
    }
}

/// Nearest-member assignment together with its certified additive error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retraction {
    /// `assignment[x]` is the point index of the member nearest to `x`
    /// (ties broken toward the lowest member index).
    pub assignment: Vec<usize>,
    /// Measured `max |d(c(x), c(y)) - d(x, y)|` over all pairs.
    pub max_additive_error: f64,
    /// The certified bound `2 * precision`; always >= the measured error.
    pub error_bound: f64,
}

impl Retraction {
    pub fn apply(&self, x: usize) -> usize {
        self.assignment[x]
    }
}

/// Greedy maximal eps-separated net, scanning points in index order: a point
/// joins if its distance to every current member is >= eps.
pub fn greedy_net(space: &FiniteMetricSpace, eps: f64) -> Result<Skeleton, NetError> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(NetError::InvalidEpsilon { eps });
    }
    let mut members: Vec<usize> = Vec::new();
    for x in 0..space.len() {
        if members.iter().all(|&m| space.dist(x, m) >= eps) {
            members.push(x);
        }
    }
    let mut separation = f64::INFINITY;
    for (a, &m1) in members.iter().enumerate() {
        for &m2 in &members[(a + 1)..] {
            separation = separation.min(space.dist(m1, m2));
        }
    }
    let precision = (0..space.len())
        .map(|x| {
            members
                .iter()
                .map(|&m| space.dist(x, m))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(Skeleton {
        members,
        requested_eps: eps,
        separation,
        precision,
        parent_size: space.len(),
    })
}

/// Maps every point to its nearest skeleton member and measures the additive
/// error of the induced map on pairs. The certified bound `2 * precision`
/// follows from two triangle inequalities and is checked against the
/// measured value.
pub fn retract(space: &FiniteMetricSpace, skeleton: &Skeleton) -> Result<Retraction, NetError> {
    skeleton.check_against(space)?;
    let assignment: Vec<usize> = (0..space.len())
        .map(|x| {
            let mut best = skeleton.members[0];
            let mut best_d = space.dist(x, best);
            for &m in &skeleton.members[1..] {
                let d = space.dist(x, m);
                // strict < keeps the lowest member index on ties
                if d < best_d {
                    best = m;
                    best_d = d;
                }
            }
            best
        })
        .collect();
    let mut max_additive_error = 0.0_f64;
    for (x, y) in space.pairs() {
        let moved = space.dist(assignment[x], assignment[y]);
        max_additive_error = max_additive_error.max((moved - space.dist(x, y)).abs());
    }
    Ok(Retraction {
        assignment,
        max_additive_error,
        error_bound: 2.0 * skeleton.precision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, SpaceKind};

    fn path(n: usize) -> FiniteMetricSpace {
        generate(&SpaceKind::Path { n }).unwrap()
    }

    #[test]
    fn greedy_net_on_a_path_takes_every_other_reachable_point() {
        let m = path(11);
        let s = greedy_net(&m, 2.0).unwrap();
        assert_eq!(s.members, vec![0, 2, 4, 6, 8, 10]);
        assert_eq!(s.separation, 2.0);
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.parent_size, 11);
    }

    #[test]
    fn huge_radius_yields_singleton() {
        let m = path(11);
        let s = greedy_net(&m, 100.0).unwrap();
        assert_eq!(s.members, vec![0]);
        assert!(s.separation.is_infinite());
        assert_eq!(s.precision, 10.0);
    }

    #[test]
    fn radius_below_min_distance_keeps_every_point() {
        let m = path(6);
        let s = greedy_net(&m, 0.5).unwrap();
        assert_eq!(s.members, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(s.precision, 0.0);
    }

    #[test]
    fn invalid_radius_is_rejected() {
        let m = path(3);
        assert!(matches!(greedy_net(&m, 0.0), Err(NetError::InvalidEpsilon { .. })));
        assert!(matches!(greedy_net(&m, f64::NAN), Err(NetError::InvalidEpsilon { .. })));
    }

    #[test]
    fn retraction_prefers_lowest_member_on_ties() {
        let m = path(11);
        let s = greedy_net(&m, 2.0).unwrap();
        let r = retract(&m, &s).unwrap();
        // point 3 is equidistant from members 2 and 4
        assert_eq!(r.apply(3), 2);
        assert_eq!(r.apply(4), 4);
        assert_eq!(r.error_bound, 2.0);
        assert!(r.max_additive_error <= r.error_bound);
    }

    #[test]
    fn retraction_error_is_certified_on_pairs() {
        let m = path(11);
        let s = greedy_net(&m, 2.0).unwrap();
        let r = retract(&m, &s).unwrap();
        for (x, y) in m.pairs() {
            let moved = m.dist(r.apply(x), r.apply(y));
            assert!((moved - m.dist(x, y)).abs() <= 2.0 * s.precision);
        }
    }

    #[test]
    fn retract_rejects_foreign_skeleton() {
        let m = path(11);
        let s = greedy_net(&m, 2.0).unwrap();
        let other = path(5);
        assert!(matches!(retract(&other, &s), Err(NetError::SpaceMismatch { .. })));
        let empty = Skeleton {
            members: vec![],
            requested_eps: 1.0,
            separation: f64::INFINITY,
            precision: 0.0,
            parent_size: 11,
        };
        assert!(matches!(retract(&m, &empty), Err(NetError::EmptySkeleton)));
    }

    #[test]
    fn skeleton_json_round_trips_with_singleton_separation() {
        let m = path(4);
        let s = greedy_net(&m, 99.0).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"separation\":null"));
        let back: Skeleton = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Maximality: every point sits within eps of some member, and
            // members are pairwise >= eps apart.
            #[test]
            fn nets_are_maximal_and_separated(seed in 0u64..500, eps_frac in 0.05..0.9_f64) {
                let m = generate(&SpaceKind::RandomLpSubset { p: 2.0, dim: 2, n: 25, seed }).unwrap();
                let eps = eps_frac * m.diam();
                let s = greedy_net(&m, eps).unwrap();
                prop_assert!(s.separation >= eps || s.members.len() == 1);
                prop_assert!(s.precision < eps);
                for x in 0..m.len() {
                    let near = s.members.iter().map(|&mm| m.dist(x, mm)).fold(f64::MAX, f64::min);
                    prop_assert!(near < eps);
                }
            }

            // The retraction moves pairs by at most twice the measured precision.
            #[test]
            fn retraction_respects_the_two_delta_bound(seed in 0u64..200) {
                let m = generate(&SpaceKind::GridSubset { dim: 2, n: 20, seed }).unwrap();
                let s = greedy_net(&m, m.diam() / 3.0).unwrap();
                let r = retract(&m, &s).unwrap();
                prop_assert!(r.max_additive_error <= r.error_bound + 1e-12);
            }
        }
    }
}
