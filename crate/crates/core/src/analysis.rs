//! Per-map distance analysis: compression and expansion moduli, distortion,
//! coarse bi-Lipschitz fitting, compression-exponent estimation, and
//! envelope verification.
//!
//! Everything here is exact over the finite pair set: the moduli are true
//! minima/maxima over sampled pairs, not interpolations, and every verdict
//! reports the witnessing pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{BlockError, EmbeddingTable};
use crate::compact::DecayModulus;
use crate::space::FiniteMetricSpace;
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("distinct points {x} and {y} share an image")]
    CollapsedPair { x: usize, y: usize },
    #[error(
        "exponent regression needs at least {MIN_REGRESSION_SAMPLES} distinct distances \
         spanning a ratio of at least {MIN_REGRESSION_SPAN}; got {samples} spanning {span}"
    )]
    InsufficientRange { samples: usize, span: f64 },
    #[error("envelope violates admissibility condition ({condition}) of its kind: {detail}")]
    InadmissibleEnvelope { condition: usize, detail: String },
    #[error("profile needs at least one sample")]
    EmptySamples,
    #[error("sample {index} is not a finite nonnegative pair")]
    InvalidSample { index: usize },
    #[error("embedding covers {images} points, space has {points}")]
    PointCountMismatch { images: usize, points: usize },
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// Least number of distinct distances the exponent regression accepts.
pub const MIN_REGRESSION_SAMPLES: usize = 10;
/// Least max/min distance ratio (two doublings) the regression accepts.
pub const MIN_REGRESSION_SPAN: f64 = 4.0;

/// All sampled pair distances of a map, with the two step-function moduli
/// they induce: `rho_hat(t)` is the smallest image distance among pairs at
/// source distance `>= t`, and `omega_hat(t)` the largest among pairs at
/// source distance `<= t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusProfile {
    /// `(source distance, image distance)`, sorted by source distance.
    samples: Vec<(f64, f64)>,
    /// `suffix_min[i]` = min image distance over `samples[i..]`.
    suffix_min: Vec<f64>,
    /// `prefix_max[i]` = max image distance over `samples[..=i]`.
    prefix_max: Vec<f64>,
}

impl ModulusProfile {
    pub fn from_samples(mut samples: Vec<(f64, f64)>) -> Result<Self, AnalysisError> {
        if samples.is_empty() {
            return Err(AnalysisError::EmptySamples);
        }
        for (index, &(t, v)) in samples.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() || t < 0.0 || v < 0.0 {
                return Err(AnalysisError::InvalidSample { index });
            }
        }
        samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        let n = samples.len();
        let mut suffix_min = vec![0.0; n];
        let mut acc = f64::INFINITY;
        for i in (0..n).rev() {
            acc = acc.min(samples[i].1);
            suffix_min[i] = acc;
        }
        let mut prefix_max = vec![0.0; n];
        let mut acc = f64::NEG_INFINITY;
        for i in 0..n {
            acc = acc.max(samples[i].1);
            prefix_max[i] = acc;
        }
        Ok(ModulusProfile { samples, suffix_min, prefix_max })
    }

    /// Profile of `f` over every pair of `space`.
    pub fn from_pairs(
        space: &FiniteMetricSpace,
        f: &EmbeddingTable,
    ) -> Result<Self, AnalysisError> {
        check_domain(space, f)?;
        let samples: Vec<(f64, f64)> =
            space.pairs().map(|(i, j)| (space.dist(i, j), f.pair_distance(i, j))).collect();
        if samples.is_empty() {
            return Err(AnalysisError::EmptySamples);
        }
        Self::from_samples(samples)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Sorted distinct source distances.
    pub fn distinct_t(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.samples.iter().map(|&(t, _)| t).collect();
        ts.dedup();
        ts
    }

    /// Smallest image distance over samples at source distance `>= t`;
    /// infinity when no sample qualifies. Non-decreasing in `t`.
    pub fn rho_hat(&self, t: f64) -> f64 {
        let idx = self.samples.partition_point(|&(s, _)| s < t);
        self.suffix_min.get(idx).copied().unwrap_or(f64::INFINITY)
    }

    /// Largest image distance over samples at source distance `<= t`;
    /// zero when no sample qualifies. Non-decreasing in `t`.
    pub fn omega_hat(&self, t: f64) -> f64 {
        let idx = self.samples.partition_point(|&(s, _)| s <= t);
        if idx == 0 {
            0.0
        } else {
            self.prefix_max[idx - 1]
        }
    }
}

/// Convenience spelling of [`ModulusProfile::from_pairs`].
pub fn moduli(space: &FiniteMetricSpace, f: &EmbeddingTable) -> Result<ModulusProfile, AnalysisError> {
    ModulusProfile::from_pairs(space, f)
}

fn check_domain(space: &FiniteMetricSpace, f: &EmbeddingTable) -> Result<(), AnalysisError> {
    if f.point_count() != space.len() {
        return Err(AnalysisError::PointCountMismatch {
            images: f.point_count(),
            points: space.len(),
        });
    }
    Ok(())
}

/// Distortion `D` and scaling factor `s` of an injective map:
/// `s * d <= |f(x) - f(y)| <= D * s * d` on every pair, with `s` the
/// smallest image/source ratio and `D` the ratio of extremes. `(1, 1)` for
/// spaces with fewer than two points.
pub fn distortion(
    space: &FiniteMetricSpace,
    f: &EmbeddingTable,
) -> Result<(f64, f64), AnalysisError> {
    check_domain(space, f)?;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0_f64;
    for (x, y) in space.pairs() {
        let v = f.pair_distance(x, y);
        if v <= 0.0 {
            return Err(AnalysisError::CollapsedPair { x, y });
        }
        let ratio = v / space.dist(x, y);
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    if !min_ratio.is_finite() {
        return Ok((1.0, 1.0));
    }
    Ok((max_ratio / min_ratio, min_ratio))
}

/// Coarse bi-Lipschitz certificate `(A, B)` with
/// `(1/A) d - B <= |f(x) - f(y)| <= A d + B` on every pair.
///
/// Two closed-form candidates cover all cases. When no pair collapses, the
/// pure multiplicative certificate `(max(1, max v/d, max d/v), 0)` is valid
/// and is returned — it is the least `A` compatible with `B = 0`. When some
/// pair collapses, no finite `A` works at `B = 0`, and the additive
/// certificate `(1, max |v - d|)` is returned — the least `B` compatible
/// with `A = 1`.
pub fn coarse_lipschitz_fit(
    space: &FiniteMetricSpace,
    f: &EmbeddingTable,
) -> Result<(f64, f64), AnalysisError> {
    check_domain(space, f)?;
    let mut max_ratio = 1.0_f64;
    let mut max_inverse_ratio = 1.0_f64;
    let mut max_additive = 0.0_f64;
    let mut collapsed = false;
    for (x, y) in space.pairs() {
        let d = space.dist(x, y);
        let v = f.pair_distance(x, y);
        if v <= 0.0 {
            collapsed = true;
        } else {
            max_ratio = max_ratio.max(v / d);
            max_inverse_ratio = max_inverse_ratio.max(d / v);
        }
        max_additive = max_additive.max((v - d).abs());
    }
    if collapsed {
        Ok((1.0, max_additive))
    } else {
        Ok((max_ratio.max(max_inverse_ratio), 0.0))
    }
}

/// Slope of the least-squares line through `(ln t, ln rho_hat(t))` over the
/// distinct sampled distances `t >= tau`, clamped to `[0, 1]`.
///
/// Distances where the lower modulus vanishes carry no log-scale
/// information and are excluded; what remains must hold at least
/// [`MIN_REGRESSION_SAMPLES`] distinct distances whose extremes differ by a
/// factor of [`MIN_REGRESSION_SPAN`].
pub fn compression_exponent_estimate(
    profile: &ModulusProfile,
    tau: f64,
) -> Result<f64, AnalysisError> {
    let points: Vec<(f64, f64)> = profile
        .distinct_t()
        .into_iter()
        .filter(|&t| t >= tau && t > 0.0)
        .filter_map(|t| {
            let r = profile.rho_hat(t);
            (r > 0.0 && r.is_finite()).then(|| (t.ln(), r.ln()))
        })
        .collect();
    let samples = points.len();
    let span = if samples < 2 {
        0.0
    } else {
        // points are sorted by t, so the extremes bracket the span
        (points[samples - 1].0 - points[0].0).exp()
    };
    if samples < MIN_REGRESSION_SAMPLES || span < MIN_REGRESSION_SPAN {
        return Err(AnalysisError::InsufficientRange { samples, span });
    }
    let n = samples as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    Ok((sxy / sxx).clamp(0.0, 1.0))
}

/// Parametric envelope functions of `t >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeFn {
    /// `coeff * t^alpha`.
    Power { coeff: f64, alpha: f64 },
    /// `a * t + b`.
    Linear { a: f64, b: f64 },
    /// `min(t, t^alpha)`.
    MinIdPow { alpha: f64 },
    /// `max(t, t^alpha)`.
    MaxIdPow { alpha: f64 },
    /// The lower envelope certified by the multiscale embedding of
    /// [`crate::compact::compact_embedding`]: `t / (2 j(t))` where `j(t)` is
    /// the scale index of `t` under the modulus (the least `j >= 1` with
    /// `sigma(j) <= t`, i.e. `mu(t)` rounded up to at least 1).
    CompactLower { modulus: DecayModulus },
    /// Piecewise-linear interpolation of `(t, value)` samples sorted by
    /// `t`, extended flat beyond the ends.
    Table { points: Vec<(f64, f64)> },
}

impl EnvelopeFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            EnvelopeFn::Power { coeff, alpha } => coeff * t.powf(*alpha),
            EnvelopeFn::Linear { a, b } => a * t + b,
            EnvelopeFn::MinIdPow { alpha } => t.min(t.powf(*alpha)),
            EnvelopeFn::MaxIdPow { alpha } => t.max(t.powf(*alpha)),
            EnvelopeFn::CompactLower { modulus } => {
                if t <= 0.0 {
                    0.0
                } else {
                    0.5 * t / modulus.block_index(t) as f64
                }
            }
            EnvelopeFn::Table { points } => match points.len() {
                0 => 0.0,
                _ => {
                    let first = points[0];
                    let last = points[points.len() - 1];
                    if t <= first.0 {
                        return first.1;
                    }
                    if t >= last.0 {
                        return last.1;
                    }
                    let hi = points.partition_point(|&(s, _)| s < t);
                    let (t0, v0) = points[hi - 1];
                    let (t1, v1) = points[hi];
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                }
            },
        }
    }
}

/// What an envelope pair is asked to certify. Admissibility conditions are
/// numbered per kind and reported through
/// [`AnalysisError::InadmissibleEnvelope`]:
///
/// - `Coarse`: (1) the lower envelope diverges at infinity; (2) the upper
///   envelope is finite at every probed distance.
/// - `Uniform`: (1) the upper envelope vanishes at 0; (2) the lower
///   envelope is positive at every positive probed distance.
/// - `Strong`: conditions (1)–(2) of `Coarse` plus (3) upper vanishes at 0
///   and (4) lower positive — both geometries at once.
/// - `Kalton`: (1) `alpha` lies in `(0, 1]`; (2) the envelopes are exactly
///   the `min(t, t^alpha)` / `max(t, t^alpha)` pair.
/// - `NearlyIsometric`: (1) the upper envelope vanishes at 0, dominates `t`
///   on `[0, 1]`, and is super-linear at 0; (2) the upper envelope equals
///   `t` for `t >= 1`; (3) the lower envelope equals `t` on `[0, 1]`;
///   (4) the lower envelope stays below `t` for `t >= 1` with ratio
///   tending to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    Coarse,
    Uniform,
    Strong,
    Kalton { alpha: f64 },
    NearlyIsometric,
}

/// An envelope pair together with the geometry it must witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub kind: EnvelopeKind,
    pub rho: EnvelopeFn,
    pub omega: EnvelopeFn,
}

// Limit behavior is probed numerically at far-field / near-field distances;
// the thresholds below say how decisively a probed limit must hold.
const NEAR_FIELD_T: f64 = 1e-8;
const FAR_FIELD_T: f64 = 1e8;
const DIVERGED: f64 = 1e3;
const VANISHED: f64 = 1e-3;

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let ratio = hi / lo;
    (0..n).map(move |i| lo * ratio.powf(i as f64 / (n - 1) as f64))
}

impl EnvelopeSpec {
    pub fn new(kind: EnvelopeKind, rho: EnvelopeFn, omega: EnvelopeFn) -> Self {
        EnvelopeSpec { kind, rho, omega }
    }

    /// The `min(t, t^alpha)` / `max(t, t^alpha)` pair.
    pub fn kalton(alpha: f64) -> Self {
        EnvelopeSpec {
            kind: EnvelopeKind::Kalton { alpha },
            rho: EnvelopeFn::MinIdPow { alpha },
            omega: EnvelopeFn::MaxIdPow { alpha },
        }
    }

    /// Checks the kind-specific conditions documented on [`EnvelopeKind`].
    /// Limits are approximated by fixed far-field/near-field probes, so this
    /// is a decisive numerical surrogate, not a symbolic proof.
    pub fn admissible(&self) -> Result<(), AnalysisError> {
        let fail = |condition: usize, detail: &str| {
            Err(AnalysisError::InadmissibleEnvelope { condition, detail: detail.to_string() })
        };
        let lower_diverges = self.rho.eval(FAR_FIELD_T) >= DIVERGED;
        let upper_finite = log_grid(NEAR_FIELD_T, FAR_FIELD_T, 33)
            .all(|t| self.omega.eval(t).is_finite());
        let upper_vanishes = self.omega.eval(NEAR_FIELD_T).abs() <= VANISHED;
        let lower_positive = log_grid(1e-6, 1e6, 49).all(|t| self.rho.eval(t) > 0.0);
        match &self.kind {
            EnvelopeKind::Coarse => {
                if !lower_diverges {
                    return fail(1, "lower envelope does not diverge at infinity");
                }
                if !upper_finite {
                    return fail(2, "upper envelope is not finite everywhere");
                }
            }
            EnvelopeKind::Uniform => {
                if !upper_vanishes {
                    return fail(1, "upper envelope does not vanish at 0");
                }
                if !lower_positive {
                    return fail(2, "lower envelope is not positive for positive distances");
                }
            }
            EnvelopeKind::Strong => {
                if !lower_diverges {
                    return fail(1, "lower envelope does not diverge at infinity");
                }
                if !upper_finite {
                    return fail(2, "upper envelope is not finite everywhere");
                }
                if !upper_vanishes {
                    return fail(3, "upper envelope does not vanish at 0");
                }
                if !lower_positive {
                    return fail(4, "lower envelope is not positive for positive distances");
                }
            }
            EnvelopeKind::Kalton { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return fail(1, "exponent must lie in (0, 1]");
                }
                let expected_rho = EnvelopeFn::MinIdPow { alpha: *alpha };
                let expected_omega = EnvelopeFn::MaxIdPow { alpha: *alpha };
                if self.rho != expected_rho || self.omega != expected_omega {
                    return fail(2, "envelopes are not the min/max pair of the exponent");
                }
            }
            EnvelopeKind::NearlyIsometric => {
                let omega_zero = self.omega.eval(0.0) == 0.0;
                let omega_dominates = log_grid(1e-6, 1.0, 33)
                    .all(|t| self.omega.eval(t) >= t - tol::EXACT_ABS);
                let omega_superlinear = self.omega.eval(NEAR_FIELD_T) / NEAR_FIELD_T >= DIVERGED;
                if !(omega_zero && omega_dominates && omega_superlinear) {
                    return fail(1, "upper envelope must vanish at 0, dominate t on [0,1], and be super-linear at 0");
                }
                let omega_is_id = log_grid(1.0, 1e6, 33)
                    .all(|t| (self.omega.eval(t) - t).abs() <= 1e-9 * t);
                if !omega_is_id {
                    return fail(2, "upper envelope must equal t for t >= 1");
                }
                let rho_is_id = log_grid(1e-6, 1.0, 33)
                    .all(|t| (self.rho.eval(t) - t).abs() <= tol::EXACT_ABS + tol::EXACT_ABS * t);
                if !rho_is_id {
                    return fail(3, "lower envelope must equal t on [0,1]");
                }
                let rho_below = log_grid(1.0, 1e6, 33)
                    .all(|t| self.rho.eval(t) <= t + tol::EXACT_ABS * t);
                let rho_sublinear = self.rho.eval(FAR_FIELD_T) / FAR_FIELD_T <= VANISHED;
                if !(rho_below && rho_sublinear) {
                    return fail(4, "lower envelope must stay below t for t >= 1 with vanishing ratio");
                }
            }
        }
        Ok(())
    }
}

/// One pair breaking an envelope bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    pub x: usize,
    pub y: usize,
    pub distance: f64,
    pub image_distance: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Verdict of an envelope check over every pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub ok: bool,
    pub pairs_checked: usize,
    pub total_violations: usize,
    /// At most [`MAX_REPORTED_VIOLATIONS`] witnesses, in pair order.
    pub violations: Vec<EnvelopeViolation>,
}

/// Witness-list cap in [`EnvelopeReport`].
pub const MAX_REPORTED_VIOLATIONS: usize = 20;

/// Verifies `rho(d) <= |f(x) - f(y)| <= omega(d)` on every pair, after
/// checking that the spec is admissible for its kind.
pub fn envelope_check(
    space: &FiniteMetricSpace,
    f: &EmbeddingTable,
    spec: &EnvelopeSpec,
) -> Result<EnvelopeReport, AnalysisError> {
    check_domain(space, f)?;
    spec.admissible()?;
    let mut violations = Vec::new();
    let mut total_violations = 0_usize;
    let mut pairs_checked = 0_usize;
    for (x, y) in space.pairs() {
        pairs_checked += 1;
        let d = space.dist(x, y);
        let v = f.pair_distance(x, y);
        let lower = spec.rho.eval(d);
        let upper = spec.omega.eval(d);
        if v < lower - tol::CERT_ABS || v > upper + tol::CERT_ABS {
            total_violations += 1;
            if violations.len() < MAX_REPORTED_VIOLATIONS {
                violations.push(EnvelopeViolation {
                    x,
                    y,
                    distance: d,
                    image_distance: v,
                    lower,
                    upper,
                });
            }
        }
    }
    Ok(EnvelopeReport { ok: total_violations == 0, pairs_checked, total_violations, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockVector;
    use crate::compact::{compact_embedding, OUTER_CONSTANT_LIMIT};
    use crate::frechet::frechet;
    use crate::generate::{generate, SpaceKind};
    use crate::nets::{greedy_net, retract};

    fn path(n: usize) -> FiniteMetricSpace {
        generate(&SpaceKind::Path { n }).unwrap()
    }

    fn isometry(space: &FiniteMetricSpace) -> EmbeddingTable {
        frechet(space, &(0..space.len()).collect::<Vec<_>>(), space.base_or_default()).unwrap()
    }

    fn constant_table(space: &FiniteMetricSpace) -> EmbeddingTable {
        let images =
            (0..space.len()).map(|_| BlockVector::single(2.0, vec![1.0]).unwrap()).collect();
        EmbeddingTable::new(images).unwrap()
    }

    #[test]
    fn moduli_of_an_isometry_are_the_identity() {
        let m = path(10);
        let profile = moduli(&m, &isometry(&m)).unwrap();
        for t in profile.distinct_t() {
            assert!((profile.rho_hat(t) - t).abs() <= 1e-12, "rho at {t}");
            assert!((profile.omega_hat(t) - t).abs() <= 1e-12, "omega at {t}");
        }
        assert_eq!(profile.samples().len(), 45);
    }

    #[test]
    fn moduli_of_a_constant_map_vanish() {
        let m = path(6);
        let images =
            (0..m.len()).map(|_| BlockVector::single(2.0, vec![3.0]).unwrap()).collect();
        let f = EmbeddingTable::new(images).unwrap();
        let profile = moduli(&m, &f).unwrap();
        for t in profile.distinct_t() {
            assert_eq!(profile.rho_hat(t), 0.0);
            assert_eq!(profile.omega_hat(t), 0.0);
        }
    }

    #[test]
    fn moduli_step_functions_bracket_each_sample() {
        let m = generate(&SpaceKind::GridSubset { dim: 2, n: 25, seed: 3 }).unwrap();
        let f = isometry(&m);
        let profile = moduli(&m, &f).unwrap();
        for &(t, v) in profile.samples() {
            assert!(profile.rho_hat(t) <= v + 1e-12);
            assert!(profile.omega_hat(t) >= v - 1e-12);
        }
        // out-of-range queries take the empty-set conventions
        assert_eq!(profile.rho_hat(f64::MAX), f64::INFINITY);
        assert_eq!(profile.omega_hat(0.0), 0.0);
    }

    #[test]
    fn distortion_of_an_isometry_is_one() {
        let m = path(9);
        let (d, s) = distortion(&m, &isometry(&m)).unwrap();
        assert!((d - 1.0).abs() <= 1e-12);
        assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn distortion_of_a_square_root_map_on_three_points() {
        // line {0, 1, 3}: distances 1, 2, 3; the square-root map has image
        // distances 1, sqrt(2), sqrt(3), so the extreme ratios are 1 and
        // 1/sqrt(3)
        let m = FiniteMetricSpace::from_matrix(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 2.0], vec![3.0, 2.0, 0.0]],
            None,
        )
        .unwrap();
        let f = isometry(&m.snowflake(0.5).unwrap());
        let (d, s) = distortion(&m, &f).unwrap();
        assert!((d - 3.0_f64.sqrt()).abs() <= 1e-12, "D = {d}");
        assert!((s - 1.0 / 3.0_f64.sqrt()).abs() <= 1e-12, "s = {s}");
    }

    #[test]
    fn distortion_rejects_collapsed_pairs() {
        let m = path(4);
        let err = distortion(&m, &constant_table(&m)).unwrap_err();
        assert_eq!(err, AnalysisError::CollapsedPair { x: 0, y: 1 });
    }

    #[test]
    fn fit_of_an_isometry_is_trivial() {
        let m = path(12);
        assert_eq!(coarse_lipschitz_fit(&m, &isometry(&m)).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn fit_of_a_homothety_is_multiplicative() {
        let m = path(7);
        let tripled = EmbeddingTable::new(
            isometry(&m).images().iter().map(|v| v.scale(3.0)).collect(),
        )
        .unwrap();
        let (a, b) = coarse_lipschitz_fit(&m, &tripled).unwrap();
        assert!((a - 3.0).abs() <= 1e-12);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn fit_of_a_net_retraction_is_additive() {
        // retract to a 2-separated net (precision 1), then embed the net
        // isometrically: distances move by at most 2
        let m = path(11);
        let skeleton = greedy_net(&m, 2.0).unwrap();
        let retraction = retract(&m, &skeleton).unwrap();
        let iso = isometry(&m);
        let images =
            (0..m.len()).map(|x| iso.image(retraction.apply(x)).clone()).collect();
        let f = EmbeddingTable::new(images).unwrap();
        let (a, b) = coarse_lipschitz_fit(&m, &f).unwrap();
        assert_eq!(a, 1.0);
        assert!(b > 0.0 && b <= 2.0 + 1e-9, "B = {b}");
    }

    #[test]
    fn exponent_recovers_exact_powers() {
        for alpha in [0.25, 0.5, 1.0] {
            let samples: Vec<(f64, f64)> =
                (0..19).map(|i| {
                    let t = (i as f64 / 2.0).exp2();
                    (t, t.powf(alpha))
                })
                .collect();
            let profile = ModulusProfile::from_samples(samples).unwrap();
            let estimate = compression_exponent_estimate(&profile, 0.0).unwrap();
            assert!((estimate - alpha).abs() <= 1e-6, "alpha {alpha}: {estimate}");
        }
    }

    #[test]
    fn exponent_of_a_flat_profile_is_zero() {
        let samples: Vec<(f64, f64)> = (1..=16).map(|i| (i as f64, 5.0)).collect();
        let profile = ModulusProfile::from_samples(samples).unwrap();
        assert_eq!(compression_exponent_estimate(&profile, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn exponent_estimates_a_square_root_pipeline() {
        // embed the square-root-deformed path isometrically, then read the
        // profile against the original path metric: rho_hat(t) = sqrt(t)
        let m = path(256);
        let f = isometry(&m.snowflake(0.5).unwrap());
        let profile = moduli(&m, &f).unwrap();
        let estimate = compression_exponent_estimate(&profile, 1.0).unwrap();
        assert!((estimate - 0.5).abs() <= 0.05, "estimate {estimate}");
    }

    #[test]
    fn exponent_requires_enough_spread() {
        let few: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, i as f64)).collect();
        let profile = ModulusProfile::from_samples(few).unwrap();
        assert!(matches!(
            compression_exponent_estimate(&profile, 0.0),
            Err(AnalysisError::InsufficientRange { samples: 5, .. })
        ));

        let narrow: Vec<(f64, f64)> =
            (0..20).map(|i| (1.0 + i as f64 / 20.0, 1.0)).collect();
        let profile = ModulusProfile::from_samples(narrow).unwrap();
        assert!(matches!(
            compression_exponent_estimate(&profile, 0.0),
            Err(AnalysisError::InsufficientRange { .. })
        ));
    }

    #[test]
    fn kalton_envelope_accepts_an_isometry_at_large_distances() {
        // all distances >= 1, so min(t, t^a) = t^a <= t <= t = max(t, t^a)
        let m = path(6);
        let report = envelope_check(&m, &isometry(&m), &EnvelopeSpec::kalton(0.5)).unwrap();
        assert!(report.ok, "{report:?}");
        assert_eq!(report.pairs_checked, 15);
    }

    #[test]
    fn kalton_envelope_lists_violations_of_a_shrunken_map() {
        let m = path(6);
        let shrunk = EmbeddingTable::new(
            isometry(&m).images().iter().map(|v| v.scale(0.3)).collect(),
        )
        .unwrap();
        let report = envelope_check(&m, &shrunk, &EnvelopeSpec::kalton(0.5)).unwrap();
        assert!(!report.ok);
        assert!(report.total_violations > 0);
        assert!(report.violations.len() <= MAX_REPORTED_VIOLATIONS);
        let first = &report.violations[0];
        assert!(first.image_distance < first.lower);
    }

    #[test]
    fn multiscale_embedding_passes_its_certified_envelope() {
        let m = crate::generate::unit_interval(16).unwrap();
        let mu = DecayModulus::log2(1.0).unwrap();
        let (f, cert) = compact_embedding(&m, &mu).unwrap();
        assert!(cert.ok());
        let spec = EnvelopeSpec::new(
            EnvelopeKind::Coarse,
            EnvelopeFn::CompactLower { modulus: mu },
            EnvelopeFn::Power { coeff: OUTER_CONSTANT_LIMIT, alpha: 1.0 },
        );
        let report = envelope_check(&m, &f, &spec).unwrap();
        assert!(report.ok, "{report:?}");
    }

    #[test]
    fn nearly_isometric_admissibility_rejects_a_linear_lower_envelope() {
        let spec = EnvelopeSpec::new(
            EnvelopeKind::NearlyIsometric,
            EnvelopeFn::Power { coeff: 1.0, alpha: 1.0 },
            EnvelopeFn::MaxIdPow { alpha: 0.5 },
        );
        match spec.admissible() {
            Err(AnalysisError::InadmissibleEnvelope { condition: 4, .. }) => {}
            other => panic!("expected condition 4, got {other:?}"),
        }
    }

    #[test]
    fn nearly_isometric_admissibility_accepts_the_min_max_pair() {
        let spec = EnvelopeSpec::new(
            EnvelopeKind::NearlyIsometric,
            EnvelopeFn::MinIdPow { alpha: 0.5 },
            EnvelopeFn::MaxIdPow { alpha: 0.5 },
        );
        spec.admissible().unwrap();
        // an isometry sits inside any admissible nearly-isometric pair
        let m = path(5);
        let report = envelope_check(&m, &isometry(&m), &spec).unwrap();
        assert!(report.ok);
    }

    #[test]
    fn coarse_admissibility_rejects_bounded_lower_envelopes() {
        let spec = EnvelopeSpec::new(
            EnvelopeKind::Coarse,
            EnvelopeFn::Table { points: vec![(0.0, 0.0), (1.0, 1.0)] },
            EnvelopeFn::Linear { a: 1.0, b: 0.0 },
        );
        match spec.admissible() {
            Err(AnalysisError::InadmissibleEnvelope { condition: 1, .. }) => {}
            other => panic!("expected condition 1, got {other:?}"),
        }
    }

    #[test]
    fn uniform_admissibility_checks_both_ends() {
        let bad_upper = EnvelopeSpec::new(
            EnvelopeKind::Uniform,
            EnvelopeFn::Power { coeff: 1.0, alpha: 1.0 },
            EnvelopeFn::Linear { a: 1.0, b: 0.5 },
        );
        assert!(matches!(
            bad_upper.admissible(),
            Err(AnalysisError::InadmissibleEnvelope { condition: 1, .. })
        ));
        let good = EnvelopeSpec::new(
            EnvelopeKind::Strong,
            EnvelopeFn::Power { coeff: 0.5, alpha: 1.0 },
            EnvelopeFn::Power { coeff: 2.0, alpha: 1.0 },
        );
        good.admissible().unwrap();
    }

    #[test]
    fn table_envelope_interpolates_and_clamps() {
        let f = EnvelopeFn::Table { points: vec![(1.0, 2.0), (3.0, 6.0)] };
        assert_eq!(f.eval(0.5), 2.0);
        assert_eq!(f.eval(2.0), 4.0);
        assert_eq!(f.eval(10.0), 6.0);
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // the step functions must agree with brute-force scans
            #[test]
            fn moduli_match_brute_force(values in proptest::collection::vec((0.0..10.0_f64, 0.0..10.0_f64), 1..40), query in 0.0..12.0_f64) {
                let profile = ModulusProfile::from_samples(values.clone()).unwrap();
                let brute_rho = values.iter().filter(|&&(t, _)| t >= query).map(|&(_, v)| v)
                    .fold(f64::INFINITY, f64::min);
                let brute_omega = values.iter().filter(|&&(t, _)| t <= query).map(|&(_, v)| v)
                    .fold(0.0_f64, f64::max);
                prop_assert_eq!(profile.rho_hat(query), brute_rho);
                prop_assert_eq!(profile.omega_hat(query), brute_omega);
            }

            // scaling the image rescales s and leaves D untouched
            #[test]
            fn distortion_is_scale_invariant(exp in -3..6_i32, seed in 0u64..20) {
                let gamma = (exp as f64).exp2();
                let m = generate(&SpaceKind::GridSubset { dim: 2, n: 12, seed }).unwrap();
                let f = frechet(&m, &(0..m.len()).collect::<Vec<_>>(), 0).unwrap();
                let scaled = EmbeddingTable::new(
                    f.images().iter().map(|v| v.scale(gamma)).collect(),
                ).unwrap();
                let (d0, s0) = distortion(&m, &f).unwrap();
                let (d1, s1) = distortion(&m, &scaled).unwrap();
                prop_assert!((d0 - d1).abs() <= 1e-9 * d0);
                prop_assert!((s1 - gamma * s0).abs() <= 1e-9 * s1.abs().max(1.0));
            }

            // the certificate is honest, and A is tight when it exceeds 1:
            // shaving 5% off A breaks a pair at the same B
            #[test]
            fn fit_certificate_is_tight(seed in 0u64..20, scale_exp in -2..3_i32) {
                let gamma = (scale_exp as f64).exp2();
                let m = generate(&SpaceKind::GridSubset { dim: 2, n: 10, seed }).unwrap();
                let base = frechet(&m, &(0..m.len()).collect::<Vec<_>>(), 0).unwrap();
                let f = EmbeddingTable::new(
                    base.images().iter().map(|v| v.scale(gamma)).collect(),
                ).unwrap();
                let (a, b) = coarse_lipschitz_fit(&m, &f).unwrap();
                for (x, y) in m.pairs() {
                    let d = m.dist(x, y);
                    let v = f.pair_distance(x, y);
                    prop_assert!(v <= a * d + b + 1e-9);
                    prop_assert!(v >= d / a - b - 1e-9);
                }
                if a > 1.0 {
                    let a_small = 0.95 * a;
                    let violated = m.pairs().any(|(x, y)| {
                        let d = m.dist(x, y);
                        let v = f.pair_distance(x, y);
                        v > a_small * d + b + 1e-12 || v < d / a_small - b - 1e-12
                    });
                    prop_assert!(violated);
                }
            }
        }
    }
}
