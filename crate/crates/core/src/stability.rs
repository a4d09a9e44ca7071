//! Finite-truncation probes of the double-limit behavior of sequence pairs.
//!
//! The question being probed: for two bounded sequences, do the two iterated
//! limits of `d(x_m, y_n)` agree? True limits along ultrafilters are not
//! computable, so each limit is replaced by a tail-window surrogate: the mean
//! of the last `W` values, accepted only when their spread stays below a
//! tolerance. The inner limit uses the window `(N-W, N]` and the outer limit
//! the disjoint window `(N-2W, N-W]`, so the outer index is always strictly
//! below every inner index — exactly the regime iterated limits see — and
//! witnesses whose distance depends only on which index is larger evaluate
//! exactly at finite truncation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("families live in different ambient norms")]
    AmbientMismatch,
    #[error("family needs at least one element")]
    EmptyFamily,
    #[error("element {element}, coordinate {coordinate} is not finite")]
    NonFiniteCoordinate { element: usize, coordinate: usize },
    #[error("families have different truncation levels {x} and {y}")]
    TruncationMismatch { x: usize, y: usize },
    #[error("window {window} needs truncation >= {}, got {truncation}", 2 * window)]
    WindowTooWide { truncation: usize, window: usize },
    #[error("window must be at least 1")]
    EmptyWindow,
    #[error("tolerance {eta} must be positive and finite")]
    InvalidTolerance { eta: f64 },
    #[error(
        "iterated limit (order {order}) did not stabilize at element {element}: \
         window spread {spread}"
    )]
    NonConvergent { order: u8, element: usize, spread: f64 },
    #[error("norm exponent {p} must satisfy 1 <= p < infinity; use the sup ambient instead")]
    InvalidNormExponent { p: f64 },
    #[error("deformation exponent {s} must lie strictly between 0 and 1")]
    InvalidExponent { s: f64 },
    #[error("operation needs a p-norm ambient")]
    NeedsLpAmbient,
    #[error("coordinatewise decay fails at element {element}, coordinate {coordinate}: |{value}| >= {eta}")]
    HypothesisViolated { element: usize, coordinate: usize, value: f64, eta: f64 },
}

/// Norm of the surrounding sequence space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    /// `(sum |c_i|^p)^(1/p)` with `1 <= p < infinity`.
    Lp { p: f64 },
    /// `max |c_i|`.
    SupNorm,
}

impl Ambient {
    fn validate(&self) -> Result<(), StabilityError> {
        if let Ambient::Lp { p } = *self {
            if !p.is_finite() || p < 1.0 {
                return Err(StabilityError::InvalidNormExponent { p });
            }
        }
        Ok(())
    }

    pub fn norm(&self, coords: &[f64]) -> f64 {
        match *self {
            Ambient::Lp { p } => {
                if p == 1.0 {
                    coords.iter().map(|c| c.abs()).sum()
                } else if p == 2.0 {
                    coords.iter().map(|c| c * c).sum::<f64>().sqrt()
                } else {
                    coords.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(1.0 / p)
                }
            }
            Ambient::SupNorm => coords.iter().fold(0.0, |acc, c| acc.max(c.abs())),
        }
    }

    /// Norm of the difference; shorter vectors are read as zero-padded.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let len = a.len().max(b.len());
        let diff: Vec<f64> = (0..len)
            .map(|i| a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0))
            .collect();
        self.norm(&diff)
    }
}

fn raw_family(ambient: Ambient, elements: Vec<Vec<f64>>) -> SequenceFamily {
    SequenceFamily { ambient, elements }
}

/// A truncated bounded sequence: elements indexed `1..=N`, each a finite
/// coordinate vector in the ambient norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyJson", into = "FamilyJson")]
pub struct SequenceFamily {
    ambient: Ambient,
    elements: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    ambient: Ambient,
    elements: Vec<Vec<f64>>,
}

impl TryFrom<FamilyJson> for SequenceFamily {
    type Error = StabilityError;
    fn try_from(raw: FamilyJson) -> Result<Self, Self::Error> {
        SequenceFamily::new(raw.ambient, raw.elements)
    }
}

impl From<SequenceFamily> for FamilyJson {
    fn from(f: SequenceFamily) -> FamilyJson {
        FamilyJson { ambient: f.ambient, elements: f.elements }
    }
}

impl SequenceFamily {
    pub fn new(ambient: Ambient, elements: Vec<Vec<f64>>) -> Result<Self, StabilityError> {
        ambient.validate()?;
        if elements.is_empty() {
            return Err(StabilityError::EmptyFamily);
        }
        for (e, coords) in elements.iter().enumerate() {
            for (c, value) in coords.iter().enumerate() {
                if !value.is_finite() {
                    return Err(StabilityError::NonFiniteCoordinate {
                        element: e + 1,
                        coordinate: c,
                    });
                }
            }
        }
        Ok(SequenceFamily { ambient, elements })
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    /// Truncation level `N`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// 1-based access, matching sequence notation.
    pub fn element(&self, index: usize) -> &[f64] {
        &self.elements[index - 1]
    }

    /// Largest element norm; finite by construction.
    pub fn max_norm(&self) -> f64 {
        self.elements.iter().map(|e| self.ambient.norm(e)).fold(0.0, f64::max)
    }
}

/// Both iterated tail-window limits of `d(x_m, y_n)` and their gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleLimitReport {
    /// Outer limit over the first family's index (inner over the second).
    pub first_outer: f64,
    /// Outer limit over the second family's index (inner over the first).
    pub second_outer: f64,
    /// `|first_outer - second_outer|`.
    pub delta: f64,
    pub truncation: usize,
    pub window: usize,
    pub eta: f64,
    /// Largest window spread seen in any accepted limit.
    pub max_spread: f64,
    /// Every window was exactly constant; the surrogate limits are exact.
    pub exact: bool,
}

fn window_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn window_spread(values: &[f64]) -> f64 {
    let min = values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let max = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    max - min
}

/// One iterated limit: `outer` indices range over `(N-2W, N-W]`, `inner`
/// indices over `(N-W, N]`. Returns the limit and the largest spread.
fn iterated_limit(
    distance: &impl Fn(usize, usize) -> f64,
    truncation: usize,
    window: usize,
    eta: f64,
    order: u8,
) -> Result<(f64, f64), StabilityError> {
    let mut inner_limits = Vec::with_capacity(window);
    let mut max_spread = 0.0_f64;
    for outer in (truncation - 2 * window + 1)..=(truncation - window) {
        let values: Vec<f64> =
            ((truncation - window + 1)..=truncation).map(|inner| distance(outer, inner)).collect();
        let spread = window_spread(&values);
        if spread >= eta {
            return Err(StabilityError::NonConvergent { order, element: outer, spread });
        }
        max_spread = max_spread.max(spread);
        inner_limits.push(window_mean(&values));
    }
    let spread = window_spread(&inner_limits);
    if spread >= eta {
        return Err(StabilityError::NonConvergent { order, element: 0, spread });
    }
    max_spread = max_spread.max(spread);
    Ok((window_mean(&inner_limits), max_spread))
}

fn double_limit_of(
    x: &SequenceFamily,
    y: &SequenceFamily,
    eta: f64,
    window: usize,
    deform: impl Fn(f64) -> f64,
) -> Result<DoubleLimitReport, StabilityError> {
    if x.ambient != y.ambient {
        return Err(StabilityError::AmbientMismatch);
    }
    if x.len() != y.len() {
        return Err(StabilityError::TruncationMismatch { x: x.len(), y: y.len() });
    }
    if window == 0 {
        return Err(StabilityError::EmptyWindow);
    }
    let truncation = x.len();
    if truncation < 2 * window {
        return Err(StabilityError::WindowTooWide { truncation, window });
    }
    if eta <= 0.0 || !eta.is_finite() {
        return Err(StabilityError::InvalidTolerance { eta });
    }
    let ambient = x.ambient;
    let d = |m: usize, n: usize| deform(ambient.distance(x.element(m), y.element(n)));
    let (first_outer, spread_1) =
        iterated_limit(&|m, n| d(m, n), truncation, window, eta, 1)?;
    let (second_outer, spread_2) =
        iterated_limit(&|n, m| d(m, n), truncation, window, eta, 2)?;
    let max_spread = spread_1.max(spread_2);
    Ok(DoubleLimitReport {
        first_outer,
        second_outer,
        delta: (first_outer - second_outer).abs(),
        truncation,
        window,
        eta,
        max_spread,
        exact: max_spread == 0.0,
    })
}

/// Probes whether the two iterated limits of `d(x_m, y_n)` agree at finite
/// truncation. A nonzero `delta` with `exact = true` is a genuine
/// double-limit gap of the truncated families.
pub fn double_limit(
    x: &SequenceFamily,
    y: &SequenceFamily,
    eta: f64,
    window: usize,
) -> Result<DoubleLimitReport, StabilityError> {
    double_limit_of(x, y, eta, window, |t| t)
}

/// Runs [`double_limit`] on the distance and on its `s`-th power, reporting
/// both. A gap that survives deformation certifies that the deformed
/// distance separates the iterated limits too.
pub fn snowflake_invariance_probe(
    x: &SequenceFamily,
    y: &SequenceFamily,
    s: f64,
    eta: f64,
    window: usize,
) -> Result<(DoubleLimitReport, DoubleLimitReport), StabilityError> {
    if !(s > 0.0 && s < 1.0) {
        return Err(StabilityError::InvalidExponent { s });
    }
    let original = double_limit(x, y, eta, window)?;
    let deformed = double_limit_of(x, y, eta, window, |t| t.powf(s))?;
    Ok((original, deformed))
}

/// Verdict of [`lp_additivity_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    /// `| lim ||x + x_n||^p - (||x||^p + lim ||x_n||^p) |` over the window.
    pub residual: f64,
    pub combined_limit: f64,
    pub separate_sum: f64,
    pub p: f64,
    pub window: usize,
}

/// Checks the splitting identity `lim ||x + x_n||_p^p = ||x||_p^p +
/// lim ||x_n||_p^p` for a tail that decays coordinatewise to zero, with
/// tail limits read as means over the last `window` elements.
///
/// The decay hypothesis is verified where it matters: on the coordinates
/// where `x` lives. Each of the last `window` tail elements must satisfy
/// `|x_n[i]| < eta` at every support coordinate `i` of `x`; mass moving to
/// ever-later coordinates is exactly what the identity tolerates, so
/// coordinates outside the support are unconstrained.
pub fn lp_additivity_check(
    x: &[f64],
    tail: &SequenceFamily,
    eta: f64,
    window: usize,
) -> Result<AdditivityReport, StabilityError> {
    let Ambient::Lp { p } = tail.ambient else {
        return Err(StabilityError::NeedsLpAmbient);
    };
    if window == 0 {
        return Err(StabilityError::EmptyWindow);
    }
    if tail.len() < window {
        return Err(StabilityError::WindowTooWide { truncation: tail.len(), window });
    }
    if eta <= 0.0 || !eta.is_finite() {
        return Err(StabilityError::InvalidTolerance { eta });
    }
    let support: Vec<usize> =
        x.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| i).collect();
    for n in (tail.len() - window + 1)..=tail.len() {
        let coords = tail.element(n);
        for &i in &support {
            let value = coords.get(i).copied().unwrap_or(0.0);
            if value.abs() >= eta {
                return Err(StabilityError::HypothesisViolated {
                    element: n,
                    coordinate: i,
                    value,
                    eta,
                });
            }
        }
    }
    // p-th power sums directly, so exact splittings stay exact
    let power_sum = |a: &[f64], b: &[f64]| -> f64 {
        let len = a.len().max(b.len());
        (0..len)
            .map(|i| {
                let c = a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0);
                if p == 2.0 {
                    c * c
                } else {
                    c.abs().powf(p)
                }
            })
            .sum()
    };
    let zero: Vec<f64> = Vec::new();
    let combined: Vec<f64> = ((tail.len() - window + 1)..=tail.len())
        .map(|n| power_sum(tail.element(n), x))
        .collect();
    let separate: Vec<f64> = ((tail.len() - window + 1)..=tail.len())
        .map(|n| power_sum(tail.element(n), &zero))
        .collect();
    let combined_limit = window_mean(&combined);
    let separate_sum = power_sum(x, &zero) + window_mean(&separate);
    Ok(AdditivityReport {
        residual: (combined_limit - separate_sum).abs(),
        combined_limit,
        separate_sum,
        p,
        window,
    })
}

/// Basis vector `e_index` (1-based) padded to `dim` coordinates.
fn basis(dim: usize, index: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[index - 1] = 1.0;
    v
}

/// The classical sup-norm gap witness: `x_n = e_n` against the negated
/// partial sums `y_m = -(e_1 + ... + e_m)`. Their distance is 2 when the
/// first index is at most the second and 1 otherwise, so the iterated
/// limits are 2 and 1 exactly at any truncation.
pub fn c0_witness(n: usize) -> Result<(SequenceFamily, SequenceFamily), StabilityError> {
    if n == 0 {
        return Err(StabilityError::EmptyFamily);
    }
    let xs: Vec<Vec<f64>> = (1..=n).map(|i| basis(n, i)).collect();
    let ys: Vec<Vec<f64>> = (1..=n)
        .map(|m| {
            let mut v = vec![0.0; n];
            for c in v.iter_mut().take(m) {
                *c = -1.0;
            }
            v
        })
        .collect();
    Ok((raw_family(Ambient::SupNorm, xs), raw_family(Ambient::SupNorm, ys)))
}

/// Hilbert-style family: `x_i = base_x + e_(K+i)` and `y_j = base_y +
/// e_(K+n+j)` with `K` past both bases. Every pair distance is
/// `sqrt(||base_x - base_y||^2 + 2)`, so both iterated limits agree exactly.
pub fn hilbert_witness(
    n: usize,
    base_x: &[f64],
    base_y: &[f64],
) -> Result<(SequenceFamily, SequenceFamily), StabilityError> {
    if n == 0 {
        return Err(StabilityError::EmptyFamily);
    }
    let k = base_x.len().max(base_y.len());
    let pad = |base: &[f64], bump: usize| {
        let mut v = base.to_vec();
        v.resize(k + 2 * n, 0.0);
        v[bump - 1] = 1.0;
        v
    };
    let xs: Vec<Vec<f64>> = (1..=n).map(|i| pad(base_x, k + i)).collect();
    let ys: Vec<Vec<f64>> = (1..=n).map(|j| pad(base_y, k + n + j)).collect();
    let x = SequenceFamily::new(Ambient::Lp { p: 2.0 }, xs)?;
    let y = SequenceFamily::new(Ambient::Lp { p: 2.0 }, ys)?;
    Ok((x, y))
}

/// Tail family `x_n = head/n + e_(n+1)` in the `p`-norm: a unit bump moving
/// out to infinity, optionally with a shrinking copy of `e_1` in front.
pub fn moving_bump_tail(
    n: usize,
    p: f64,
    with_shrinking_head: bool,
) -> Result<SequenceFamily, StabilityError> {
    if n == 0 {
        return Err(StabilityError::EmptyFamily);
    }
    let elements: Vec<Vec<f64>> = (1..=n)
        .map(|i| {
            let mut v = vec![0.0; n + 1];
            v[i] = 1.0;
            if with_shrinking_head {
                v[0] = 1.0 / i as f64;
            }
            v
        })
        .collect();
    SequenceFamily::new(Ambient::Lp { p }, elements)
}
