//! Command-line front end for the metric embedding toolkit.
//!
//! Conventions shared by every subcommand:
//! - primary artifacts (spaces, coordinate tables, reports) are JSON on
//!   stdout, or written to `--out` when given; runs with equal inputs
//!   produce byte-identical output
//! - anything randomized takes an explicit `--seed`
//! - exit codes: 0 success, 1 invalid input, 2 a certified bound or
//!   convergence gate failed, 64 usage error
//! - `METRIC_EMBED_CAP` overrides the default cap on generated or
//!   enumerated point counts

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use metric_embed::analysis::{
    coarse_lipschitz_fit, compression_exponent_estimate, distortion, envelope_check, moduli,
    EnvelopeSpec,
};
use metric_embed::block::EmbeddingTable;
use metric_embed::certify;
use metric_embed::compact::{compact_embedding, DecayModulus};
use metric_embed::frechet::frechet;
use metric_embed::generate::{generate_with_cap, unit_interval, SpaceKind, DEFAULT_POINT_CAP};
use metric_embed::gluing::{augment_with_radius, glue, LocalEmbeddingFamily};
use metric_embed::interlacing::{build_graph_with_cap, q_constant_search_mode, SearchMode};
use metric_embed::nets::{greedy_net, retract};
use metric_embed::space::FiniteMetricSpace;
use metric_embed::stability::{
    c0_witness, double_limit, hilbert_witness, lp_additivity_check, moving_bump_tail,
    snowflake_invariance_probe, SequenceFamily, StabilityError,
};

#[derive(Parser)]
#[command(
    name = "metric-embed",
    version,
    about = "Certified coordinate embeddings of finite metric spaces",
    disable_help_subcommand = true
)]
struct Cli {
    /// Worker threads for parallel scans (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a named space and write it as JSON
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Greedy separated net of a space, with measured quality numbers
    Net {
        /// Space JSON file
        #[arg(long)]
        space: PathBuf,
        /// Separation radius
        #[arg(long)]
        eps: f64,
        /// Also compute the nearest-member retraction and its error bound
        #[arg(long)]
        retraction: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Coordinate embeddings with certificates
    Embed {
        #[command(subcommand)]
        mode: EmbedMode,
    },
    /// Diagnostics of a coordinate table against its space
    Analyze {
        #[command(subcommand)]
        op: AnalyzeOp,
    },
    /// Interlacing graph on k-subsets; optional spread-constant search
    Interlace {
        /// Ground set size
        #[arg(long)]
        n: usize,
        /// Subset size
        #[arg(long)]
        k: usize,
        /// Search the cheapest m-subset spread constant for --table
        #[arg(long)]
        search: Option<usize>,
        /// Coordinate table JSON (one image per graph vertex)
        #[arg(long)]
        table: Option<PathBuf>,
        /// Seed for the local search restarts
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Double-limit probes of sequence families
    Stability {
        /// Built-in witness family
        #[arg(long, value_enum)]
        witness: Option<WitnessArg>,
        /// First family JSON (alternative to --witness)
        #[arg(long)]
        x: Option<PathBuf>,
        /// Second family JSON (alternative to --witness)
        #[arg(long)]
        y: Option<PathBuf>,
        /// Elements per family
        #[arg(long, default_value_t = 128)]
        truncation: usize,
        /// Tail window width
        #[arg(long, default_value_t = 8)]
        window: usize,
        /// Convergence tolerance (and decay threshold for the lp witness)
        #[arg(long, default_value_t = 1e-6)]
        eta: f64,
        /// Also probe the distance raised to this power in (0, 1)
        #[arg(long)]
        snowflake: Option<f64>,
        /// Norm exponent for the lp witness
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Give the lp witness a shrinking head overlapping the fixed vector
        #[arg(long)]
        shrinking_head: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the nine-point certification scoreboard
    CertifyAll {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Machine-readable output instead of one line per check
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Integer path 0..points-1
    Path {
        #[arg(long)]
        points: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Complete binary tree with the graph metric
    Tree {
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Distinct lattice points under the Euclidean metric
    Grid {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Uniform points in a box under an l_p metric (inf accepted)
    RandomLp {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Evenly spaced points {0, 1/m, ..., 1} of the unit interval
    Interval {
        #[arg(long)]
        divisions: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum EmbedMode {
    /// Distance coordinates to anchor points (exact on full anchor sets)
    Frechet {
        #[arg(long)]
        space: PathBuf,
        /// Anchor indices, comma separated (default: every point)
        #[arg(long, value_delimiter = ',')]
        anchors: Option<Vec<usize>>,
        /// Base point mapped to the origin (default: the space's base)
        #[arg(long)]
        base: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Truncated multiscale embedding for bounded spaces
    Compact {
        #[arg(long)]
        space: PathBuf,
        /// Decay modulus as a JSON list of [t, mu] samples
        /// (default: the dyadic modulus of the space's diameter)
        #[arg(long)]
        modulus_table: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Dyadic gluing of per-scale local maps
    Glue {
        #[arg(long)]
        space: PathBuf,
        /// Slack of the local maps; 0 uses exact distance coordinates
        #[arg(long, default_value_t = 0.0)]
        eps0: f64,
        /// Seed for perturbed local maps (required when eps0 > 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Append a radius coordinate scaled by this factor
        #[arg(long)]
        augment: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum AnalyzeOp {
    /// Compression and expansion moduli measured over all pairs
    Moduli {
        #[command(flatten)]
        inputs: SpaceAndTable,
        /// CSV lines `t,rho_hat,omega_hat` instead of JSON
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Distortion and optimal scaling of a bi-Lipschitz fit
    Distortion {
        #[command(flatten)]
        inputs: SpaceAndTable,
        #[command(flatten)]
        out: OutArg,
    },
    /// Best (expansion, additive) coarse-Lipschitz fit
    CoarseFit {
        #[command(flatten)]
        inputs: SpaceAndTable,
        #[command(flatten)]
        out: OutArg,
    },
    /// Compression exponent by log-log regression above a threshold
    Exponent {
        #[command(flatten)]
        inputs: SpaceAndTable,
        /// Smallest distance entering the regression
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Check a declared envelope pair over all pairs
    Envelope {
        #[command(flatten)]
        inputs: SpaceAndTable,
        /// Envelope declaration JSON ({kind, rho, omega})
        #[arg(long, conflicts_with = "kalton")]
        spec: Option<PathBuf>,
        /// Shorthand for the power-pair declaration with this exponent
        #[arg(long)]
        kalton: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args)]
struct SpaceAndTable {
    /// Space JSON file
    #[arg(long)]
    space: PathBuf,
    /// Coordinate table JSON file
    #[arg(long)]
    table: PathBuf,
}

#[derive(Args)]
struct OutArg {
    /// Write primary output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exhaustive,
    Greedy,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> SearchMode {
        match m {
            ModeArg::Auto => SearchMode::Auto,
            ModeArg::Exhaustive => SearchMode::Exhaustive,
            ModeArg::Greedy => SearchMode::Greedy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessArg {
    /// Moving bumps against negated partial sums in the sup norm
    C0,
    /// Orthonormal bumps in the 2-norm
    Hilbert,
    /// p-norm splitting identity on a moving bump tail
    Lp,
}

/// Error carrying the process exit code.
enum Failure {
    /// Invalid input: unreadable files, malformed JSON, out-of-range
    /// parameters (exit 1).
    Invalid(String),
    /// A certified bound or convergence gate failed (exit 2).
    Certification(String),
    /// Argument combinations clap cannot express (exit 64).
    Usage(String),
}

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Failure {
        Failure::Invalid(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            // clap renders help to stdout and errors to stderr
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) =
            rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Certification(m)) => {
            eprintln!("certification failed: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(64)
        }
    }
}

/// Point cap for generated and enumerated constructions.
fn point_cap() -> Result<usize, Failure> {
    match std::env::var("METRIC_EMBED_CAP") {
        Ok(text) => text
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::Invalid(format!("METRIC_EMBED_CAP must be an integer, got {text:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_POINT_CAP),
        Err(e) => Err(Failure::Invalid(format!("METRIC_EMBED_CAP: {e}"))),
    }
}

/// Writes `value` as pretty JSON to `--out` or stdout.
fn emit<T: Serialize>(out: &OutArg, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::invalid)?;
    text.push('\n');
    emit_text(out, &text)
}

fn emit_text(out: &OutArg, text: &str) -> CliResult {
    match &out.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_space(path: &Path) -> Result<FiniteMetricSpace, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    FiniteMetricSpace::from_json_str(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn read_table(path: &Path) -> Result<EmbeddingTable, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    EmbeddingTable::from_json_str(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn read_family(path: &Path) -> Result<SequenceFamily, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Generate { kind } => run_generate(kind),
        Command::Net { space, eps, retraction, out } => run_net(&space, eps, retraction, &out),
        Command::Embed { mode } => run_embed(mode),
        Command::Analyze { op } => run_analyze(op),
        Command::Interlace { n, k, search, table, seed, mode, out } => {
            run_interlace(n, k, search, table.as_deref(), seed, mode, &out)
        }
        Command::Stability {
            witness,
            x,
            y,
            truncation,
            window,
            eta,
            snowflake,
            p,
            shrinking_head,
            out,
        } => run_stability(StabilityArgs {
            witness,
            x,
            y,
            truncation,
            window,
            eta,
            snowflake,
            p,
            shrinking_head,
            out,
        }),
        Command::CertifyAll { seed, json } => run_certify_all(seed, json),
    }
}

fn run_generate(kind: GenerateKind) -> CliResult {
    let cap = point_cap()?;
    let (space, out) = match kind {
        GenerateKind::Path { points, out } => {
            (generate_with_cap(&SpaceKind::Path { n: points }, cap), out)
        }
        GenerateKind::Tree { depth, out } => {
            (generate_with_cap(&SpaceKind::BinaryTree { depth }, cap), out)
        }
        GenerateKind::Grid { dim, points, seed, out } => {
            (generate_with_cap(&SpaceKind::GridSubset { dim, n: points, seed }, cap), out)
        }
        GenerateKind::RandomLp { p, dim, points, seed, out } => {
            (generate_with_cap(&SpaceKind::RandomLpSubset { p, dim, n: points, seed }, cap), out)
        }
        GenerateKind::Interval { divisions, out } => {
            let space = if divisions > cap {
                Err(metric_embed::MetricError::SizeOverflow { requested: divisions + 1, cap })
            } else {
                unit_interval(divisions)
            };
            (space, out)
        }
    };
    let space = space.map_err(Failure::invalid)?;
    emit(&out, &space)
}

fn run_net(space: &Path, eps: f64, retraction: bool, out: &OutArg) -> CliResult {
    let space = read_space(space)?;
    let skeleton = greedy_net(&space, eps).map_err(Failure::invalid)?;
    if retraction {
        let r = retract(&space, &skeleton).map_err(Failure::invalid)?;
        #[derive(Serialize)]
        struct NetReport {
            skeleton: metric_embed::Skeleton,
            retraction: metric_embed::Retraction,
        }
        emit(out, &NetReport { skeleton, retraction: r })
    } else {
        emit(out, &skeleton)
    }
}

/// Emits a (table, certificate) pair: the table goes to `--out` when given
/// (certificate to stdout), otherwise both form one stdout document.
fn emit_certified<C: Serialize>(
    out: &OutArg,
    table: &EmbeddingTable,
    certificate: &C,
) -> CliResult {
    if out.out.is_some() {
        emit(out, table)?;
        emit(&OutArg { out: None }, certificate)
    } else {
        #[derive(Serialize)]
        struct Certified<'a, C> {
            table: &'a EmbeddingTable,
            certificate: &'a C,
        }
        emit(out, &Certified { table, certificate })
    }
}

fn run_embed(mode: EmbedMode) -> CliResult {
    match mode {
        EmbedMode::Frechet { space, anchors, base, out } => {
            let space = read_space(&space)?;
            let anchors = anchors.unwrap_or_else(|| (0..space.len()).collect());
            let base = base.unwrap_or_else(|| space.base_or_default());
            let table = frechet(&space, &anchors, base).map_err(Failure::invalid)?;
            emit(&out, &table)
        }
        EmbedMode::Compact { space, modulus_table, out } => {
            let space = read_space(&space)?;
            let modulus = match modulus_table {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| {
                        Failure::Invalid(format!("cannot read {}: {e}", path.display()))
                    })?;
                    let samples: Vec<(f64, f64)> = serde_json::from_str(&text)
                        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
                    DecayModulus::from_table(samples).map_err(Failure::invalid)?
                }
                None => DecayModulus::log2(space.diam()).map_err(Failure::invalid)?,
            };
            let (table, cert) = compact_embedding(&space, &modulus).map_err(Failure::invalid)?;
            emit_certified(&out, &table, &cert)?;
            if !cert.ok() {
                return Err(Failure::Certification(format!(
                    "multiscale bounds failed: worst upper slack {:.3e}, worst lower slack {:.3e}",
                    cert.worst_upper.slack, cert.worst_lower.slack
                )));
            }
            Ok(())
        }
        EmbedMode::Glue { space, eps0, seed, augment, out } => {
            let space = read_space(&space)?;
            let family = if eps0 == 0.0 {
                LocalEmbeddingFamily::full_frechet(&space).map_err(Failure::invalid)?
            } else {
                let seed = seed.ok_or_else(|| {
                    Failure::Usage("--seed is required when eps0 > 0 (perturbed local maps)".into())
                })?;
                LocalEmbeddingFamily::scaled_perturbation(&space, eps0, seed)
                    .map_err(Failure::invalid)?
            };
            let (table, cert) = glue(&space, &family).map_err(Failure::invalid)?;
            let table = match augment {
                Some(c) => augment_with_radius(&space, &table, c).map_err(Failure::invalid)?,
                None => table,
            };
            emit_certified(&out, &table, &cert)?;
            if !cert.ok {
                return Err(Failure::Certification(format!(
                    "glued map exceeded its expansion budget: measured {:.6} > {:.6}",
                    cert.measured_lip, cert.lip_bound
                )));
            }
            Ok(())
        }
    }
}

fn run_analyze(op: AnalyzeOp) -> CliResult {
    match op {
        AnalyzeOp::Moduli { inputs, csv, out } => {
            let space = read_space(&inputs.space)?;
            let table = read_table(&inputs.table)?;
            let profile = moduli(&space, &table).map_err(Failure::invalid)?;
            if csv {
                let mut text = String::from("t,rho_hat,omega_hat\n");
                for t in profile.distinct_t() {
                    text.push_str(&format!("{},{},{}\n", t, profile.rho_hat(t), profile.omega_hat(t)));
                }
                emit_text(&out, &text)
            } else {
                #[derive(Serialize)]
                struct ModuliRow {
                    t: f64,
                    rho_hat: f64,
                    omega_hat: f64,
                }
                let rows: Vec<ModuliRow> = profile
                    .distinct_t()
                    .into_iter()
                    .map(|t| ModuliRow { t, rho_hat: profile.rho_hat(t), omega_hat: profile.omega_hat(t) })
                    .collect();
                emit(&out, &rows)
            }
        }
        AnalyzeOp::Distortion { inputs, out } => {
            let space = read_space(&inputs.space)?;
            let table = read_table(&inputs.table)?;
            let (d, s) = distortion(&space, &table).map_err(Failure::invalid)?;
            #[derive(Serialize)]
            struct DistortionReport {
                distortion: f64,
                scaling: f64,
            }
            emit(&out, &DistortionReport { distortion: d, scaling: s })
        }
        AnalyzeOp::CoarseFit { inputs, out } => {
            let space = read_space(&inputs.space)?;
            let table = read_table(&inputs.table)?;
            let (a, b) = coarse_lipschitz_fit(&space, &table).map_err(Failure::invalid)?;
            #[derive(Serialize)]
            struct CoarseFitReport {
                expansion: f64,
                additive: f64,
            }
            emit(&out, &CoarseFitReport { expansion: a, additive: b })
        }
        AnalyzeOp::Exponent { inputs, tau, out } => {
            let space = read_space(&inputs.space)?;
            let table = read_table(&inputs.table)?;
            let profile = moduli(&space, &table).map_err(Failure::invalid)?;
            let exponent =
                compression_exponent_estimate(&profile, tau).map_err(Failure::invalid)?;
            #[derive(Serialize)]
            struct ExponentReport {
                tau: f64,
                exponent: f64,
            }
            emit(&out, &ExponentReport { tau, exponent })
        }
        AnalyzeOp::Envelope { inputs, spec, kalton, out } => {
            let space = read_space(&inputs.space)?;
            let table = read_table(&inputs.table)?;
            let spec = match (spec, kalton) {
                (Some(path), None) => {
                    let text = fs::read_to_string(&path).map_err(|e| {
                        Failure::Invalid(format!("cannot read {}: {e}", path.display()))
                    })?;
                    serde_json::from_str::<EnvelopeSpec>(&text)
                        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?
                }
                (None, Some(alpha)) => EnvelopeSpec::kalton(alpha),
                _ => {
                    return Err(Failure::Usage(
                        "envelope needs exactly one of --spec or --kalton".into(),
                    ))
                }
            };
            let report = envelope_check(&space, &table, &spec).map_err(Failure::invalid)?;
            emit(&out, &report)?;
            if !report.ok {
                return Err(Failure::Certification(format!(
                    "{} of {} pairs violate the declared envelopes",
                    report.total_violations, report.pairs_checked
                )));
            }
            Ok(())
        }
    }
}

fn run_interlace(
    n: usize,
    k: usize,
    search: Option<usize>,
    table: Option<&Path>,
    seed: Option<u64>,
    mode: ModeArg,
    out: &OutArg,
) -> CliResult {
    let cap = point_cap()?;
    let graph = build_graph_with_cap(n, k, cap).map_err(Failure::invalid)?;
    match search {
        None => emit(out, &graph),
        Some(m) => {
            let table_path = table.ok_or_else(|| {
                Failure::Usage("--search needs --table with one image per graph vertex".into())
            })?;
            let seed = seed
                .ok_or_else(|| Failure::Usage("--search is randomized; pass --seed".into()))?;
            let table = read_table(table_path)?;
            let report = q_constant_search_mode(&graph, &table, m, seed, mode.into())
                .map_err(Failure::invalid)?;
            emit(out, &report)
        }
    }
}

struct StabilityArgs {
    witness: Option<WitnessArg>,
    x: Option<PathBuf>,
    y: Option<PathBuf>,
    truncation: usize,
    window: usize,
    eta: f64,
    snowflake: Option<f64>,
    p: f64,
    shrinking_head: bool,
    out: OutArg,
}

fn run_stability(args: StabilityArgs) -> CliResult {
    let StabilityArgs { witness, x, y, truncation, window, eta, snowflake, p, shrinking_head, out } =
        args;
    // the lp witness checks the splitting identity rather than a double limit
    if let Some(WitnessArg::Lp) = witness {
        let tail = moving_bump_tail(truncation, p, shrinking_head).map_err(Failure::invalid)?;
        let report = lp_additivity_check(&[1.0], &tail, eta, window).map_err(stability_failure)?;
        return emit(&out, &report);
    }
    let (x, y) = match (witness, x, y) {
        (Some(WitnessArg::C0), None, None) => c0_witness(truncation).map_err(Failure::invalid)?,
        (Some(WitnessArg::Hilbert), None, None) => {
            hilbert_witness(truncation, &[], &[]).map_err(Failure::invalid)?
        }
        (None, Some(x), Some(y)) => (read_family(&x)?, read_family(&y)?),
        _ => {
            return Err(Failure::Usage(
                "pass either --witness, or both --x and --y family files".into(),
            ))
        }
    };
    match snowflake {
        None => {
            let report = double_limit(&x, &y, eta, window).map_err(stability_failure)?;
            emit(&out, &report)
        }
        Some(s) => {
            let (original, deformed) =
                snowflake_invariance_probe(&x, &y, s, eta, window).map_err(stability_failure)?;
            #[derive(Serialize)]
            struct ProbeReport {
                original: metric_embed::DoubleLimitReport,
                deformed: metric_embed::DoubleLimitReport,
            }
            emit(&out, &ProbeReport { original, deformed })
        }
    }
}

/// Convergence-gate failures exit 2; everything else is invalid input.
fn stability_failure(e: StabilityError) -> Failure {
    match e {
        StabilityError::NonConvergent { .. } | StabilityError::HypothesisViolated { .. } => {
            Failure::Certification(e.to_string())
        }
        other => Failure::Invalid(other.to_string()),
    }
}

fn run_certify_all(seed: u64, json: bool) -> CliResult {
    let reports = certify::run_all(seed);
    if json {
        // timing is measurement noise; keep the JSON byte-stable
        #[derive(Serialize)]
        struct Row<'a> {
            index: usize,
            name: &'a str,
            passed: bool,
            detail: &'a str,
        }
        let rows: Vec<Row> = reports
            .iter()
            .map(|r| Row { index: r.index, name: r.name, passed: r.passed, detail: &r.detail })
            .collect();
        emit(&OutArg { out: None }, &rows)?;
    } else {
        for r in &reports {
            println!(
                "criterion {} ({}): {} — {}",
                r.index,
                r.name,
                if r.passed { "PASS" } else { "FAIL" },
                r.detail
            );
        }
    }
    let failures: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Certification(format!("{} of 9 checks failed: {}", failures.len(), failures.join(", "))))
    }
}
