//! Constructive embeddings of finite metric spaces with certified bounds.
//!
//! The crate takes a validated distance matrix and builds coordinate
//! representations whose quality is *measured, not assumed*: every embedding
//! routine returns, alongside the coordinates, a certificate listing the
//! realized constants and the worst witnesses. The pieces compose into a few
//! pipelines:
//!
//! - **Spaces** ([`space`], [`generate`]): validated finite metric spaces,
//!   deterministic generators for test-scale fixtures, snowflake deformation.
//! - **Skeletons** ([`nets`]): greedy separated nets and nearest-member
//!   retractions with a certified additive error.
//! - **Coordinates** ([`block`], [`frechet`]): block-structured vectors (an
//!   outer p-sum of sup-norm blocks) and the distance-to-anchor coordinate
//!   map, exact on full anchor sets.
//! - **Multiscale embeddings** ([`compact`], [`gluing`]): a truncated
//!   blockwise embedding for bounded spaces driven by a decay modulus, and a
//!   dyadic gluing of per-scale local maps with an explicit Lipschitz budget
//!   plus a radius coordinate that separates far-apart shells.
//! - **Diagnostics** ([`analysis`]): expansion/compression moduli measured
//!   from data, distortion and coarse-fit summaries, compression exponent
//!   regression, and envelope certification for declared embedding classes.
//! - **Combinatorics** ([`interlacing`]): interlacing graphs on k-subsets,
//!   hop metrics, and a seeded search for the cheapest q-spread constant.
//! - **Sequence probes** ([`stability`]): finite-truncation double-limit
//!   surrogates and norm-splitting checks for families in classical sequence
//!   spaces.
//! - **Certification** ([`certify`]): nine end-to-end checks with pinned
//!   tolerances, runnable as a scoreboard.
//!
//! Randomness is always explicit: anything seeded takes a `u64` and is
//! reproducible bit-for-bit. Numerical tolerances live in [`tol`] and are
//! deliberately few.

pub mod analysis;
pub mod block;
pub mod certify;
pub mod compact;
pub mod frechet;
pub mod generate;
pub mod gluing;
pub mod interlacing;
pub mod nets;
pub mod space;
pub mod stability;
pub mod tol;

pub use analysis::{
    coarse_lipschitz_fit, compression_exponent_estimate, distortion, envelope_check, moduli,
    AnalysisError, EnvelopeFn, EnvelopeKind, EnvelopeReport, EnvelopeSpec, ModulusProfile,
};
pub use block::{BlockError, BlockVector, EmbeddingTable};
pub use certify::{run_all, CriterionReport};
pub use compact::{
    compact_embedding, truncation_depth, CompactCertificate, DecayModulus, OUTER_CONSTANT_LIMIT,
};
pub use frechet::{frechet, EmbedError};
pub use generate::{generate, generate_with_cap, unit_interval, SpaceKind, DEFAULT_POINT_CAP};
pub use gluing::{
    annulus_index, augment_with_radius, glue, GlueCertificate, GlueError, LocalEmbeddingFamily,
};
pub use interlacing::{
    build_graph, build_graph_with_cap, interlace, q_constant_search, q_constant_search_mode,
    InterlaceError, InterlacingGraph, QConstantReport, SearchMode,
};
pub use nets::{greedy_net, retract, NetError, Retraction, Skeleton};
pub use space::{FiniteMetricSpace, MetricError};
pub use stability::{
    c0_witness, double_limit, hilbert_witness, lp_additivity_check, moving_bump_tail,
    snowflake_invariance_probe, Ambient, DoubleLimitReport, SequenceFamily, StabilityError,
};
