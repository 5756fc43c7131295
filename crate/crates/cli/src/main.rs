//! `qetsim`: run energy teleportation experiments from the command line.
//!
//! Exit codes: 0 success, 1 a `--check` failed, 2 usage or input error.

mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qet_core::model::StarConvention;
use qet_core::table::{self, TableConfig, DEFAULT_SEED, DEFAULT_SHOTS, FIELDS, TILINGS};
use qet_core::teleport::Purpose;
use qet_core::tiling::classify;
use qet_core::*;
use serde::Serialize;

use config::Config;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check(String),
}

impl From<QetError> for CliError {
    fn from(e: QetError) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "qetsim",
    version,
    about = "Quantum energy teleportation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the star-graph table, exactly and by shot sampling
    Table1(Table1Args),
    /// Extracted energy of the two-qubit model over an (h, k) grid
    Sweep(SweepArgs),
    /// Ring statistics of a {3,q} tiling
    Tiling(TilingArgs),
    /// Two-qubit energy teleportation
    Qet(QetArgs),
    /// Energy distribution to several receivers of a star
    Qed(QedArgs),
    /// Energy teleportation relayed through teleportation hops
    Longrange(LongrangeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Key-value (TOML) file supplying any of the long options
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Verify results and exit with status 1 on failure
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct Table1Args {
    #[command(flatten)]
    common: Common,
    /// Tilings to include, as q of {3,q}
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<f64>>,
    /// Shots per basis run; 0 gives exact rows only
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Star Hamiltonian convention: published or full-star
    #[arg(long)]
    star: Option<StarConvention>,
    /// Observables and tilings down, (h,k) across
    #[arg(long)]
    wide: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Grid as `start:stop:count` or a comma list
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// Add the column counting only the receiver's field term
    #[arg(long)]
    field_only: bool,
}

#[derive(Args)]
struct TilingArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Also write the edge list (`u v` per line) here
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Args)]
struct QetArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    /// Also estimate by sampling with this many shots per basis
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct QedArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    receivers: Option<Vec<usize>>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    star: Option<StarConvention>,
}

#[derive(Args)]
struct LongrangeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    hops: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the classical message transcript here
    #[arg(long)]
    transcript: Option<PathBuf>,
}

/// Resolved shared options.
struct Io {
    out: Option<PathBuf>,
    format: Format,
    check: bool,
}

fn open(common: &Common, cfg: &mut Config, default: Format) -> CliResult<Io> {
    Ok(Io {
        out: cfg.pick(common.out.clone(), "out")?,
        format: cfg.pick(common.format, "format")?.unwrap_or(default),
        check: cfg.flag(common.check, "check")?,
    })
}

fn emit(io: &Io, text: &str) -> CliResult<()> {
    match &io.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn require<T>(value: Option<T>, name: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--{name} is required")))
}

fn verdict(failures: Vec<String>) -> CliResult<()> {
    if failures.is_empty() {
        eprintln!("check passed");
        Ok(())
    } else {
        Err(CliError::Check(failures.join("\n")))
    }
}

fn table1(a: Table1Args) -> CliResult<()> {
    let mut cfg = Config::load(a.common.config.as_deref())?;
    let io = open(&a.common, &mut cfg, Format::Csv)?;
    let qs = cfg.pick(a.q, "q")?.unwrap_or(TILINGS.to_vec());
    let hs = cfg.pick(a.h, "h")?;
    let ks = cfg.pick(a.k, "k")?;
    let shots = cfg.pick(a.shots, "shots")?.unwrap_or(DEFAULT_SHOTS);
    let seed = cfg.pick(a.seed, "seed")?.unwrap_or(DEFAULT_SEED);
    let star = match cfg.pick::<String>(a.star.map(|s| s.to_string()), "star")? {
        Some(s) => s.parse::<StarConvention>()?,
        None => StarConvention::default(),
    };
    let wide = cfg.flag(a.wide, "wide")?;
    cfg.finish()?;

    let fields: Vec<(f64, f64)> = match (hs, ks) {
        (None, None) => FIELDS.to_vec(),
        (Some(hs), ks) => {
            let ks = ks.unwrap_or(vec![2.0]);
            hs.iter()
                .flat_map(|&h| ks.iter().map(move |&k| (h, k)))
                .collect()
        }
        (None, Some(ks)) => FIELDS
            .iter()
            .flat_map(|&(h, _)| ks.iter().map(move |&k| (h, k)))
            .collect(),
    };
    let configs: Vec<TableConfig> = qs
        .iter()
        .flat_map(|&q| fields.iter().map(move |&(h, k)| TableConfig::new(q, h, k)))
        .collect();
    let rows = table::estimate_table1(&configs, (shots > 0).then_some(shots), seed, star)?;

    let text = match (io.format, wide) {
        (Format::Json, _) => json(&rows),
        (Format::Csv, true) => {
            let method = if shots > 0 {
                Method::Sampled
            } else {
                Method::Exact
            };
            table::to_wide(&rows, method)
        }
        (Format::Csv, false) => table::to_csv(&rows),
    };
    emit(&io, &text)?;

    if !io.check {
        return Ok(());
    }
    let mut failures = Vec::new();
    let exact: Vec<TableRow> = rows
        .iter()
        .filter(|r| r.method == Method::Exact)
        .cloned()
        .collect();
    let checks = table::check_against_paper(&exact);
    for c in checks.iter().filter(|c| !c.pass) {
        failures.push(format!(
            "{} ({},{}) {}: exact {:.4} vs published {:.4}, band {:.4}",
            c.row.config.tiling(),
            c.row.config.h,
            c.row.config.k,
            c.row.observable,
            c.row.mean,
            c.paper.value,
            c.tolerance
        ));
    }
    eprintln!(
        "{} of {} rows have published counterparts",
        checks.len(),
        exact.len()
    );
    for s in rows.iter().filter(|r| r.method == Method::Sampled) {
        let x = exact
            .iter()
            .find(|r| r.config == s.config && r.observable == s.observable)
            .expect("exact row for every sampled row");
        let dev = (s.mean - x.mean).abs();
        if dev > 5.0 * s.stderr {
            failures.push(format!(
                "{} ({},{}) {}: sampled {:.4}±{:.4} vs exact {:.4}",
                s.config.tiling(),
                s.config.h,
                s.config.k,
                s.observable,
                s.mean,
                s.stderr,
                x.mean
            ));
        }
    }
    verdict(failures)
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || {
        CliError::Usage(format!(
            "bad grid {spec:?}: use start:stop:count or a comma list"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        return match n {
            0 => Err(bad()),
            1 => Ok(vec![a]),
            _ => Ok((0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect()),
        };
    }
    spec.split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect()
}

fn sweep(a: SweepArgs) -> CliResult<()> {
    let mut cfg = Config::load(a.common.config.as_deref())?;
    let io = open(&a.common, &mut cfg, Format::Csv)?;
    let h = parse_grid(&cfg.pick(a.h, "h")?.unwrap_or("0.5:10:20".into()))?;
    let k = parse_grid(&cfg.pick(a.k, "k")?.unwrap_or("0.25:5:20".into()))?;
    let field_only = cfg.flag(a.field_only, "field_only")?;
    cfg.finish()?;

    let grid = sweep_eb(&h, &k)?;
    let text = match io.format {
        Format::Json => json(&grid),
        Format::Csv => report::sweep_csv(&grid, field_only),
    };
    emit(&io, &text)?;
    if !io.check {
        return Ok(());
    }
    let mut failures = Vec::new();
    for (i, row) in grid.e_b.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v < -1e-12 {
                failures.push(format!("E_B({}, {}) = {v:.3e} < 0", grid.h[i], grid.k[j]));
            }
        }
    }
    verdict(failures)
}

#[derive(Serialize)]
struct TilingReport {
    p: usize,
    q: usize,
    depth: usize,
    curvature: String,
    vertices: usize,
    edges: usize,
    rings: Vec<usize>,
}

/// Ring sizes predicted by the two-type vertex recurrence, `q >= 6` only.
fn recurrence_rings(q: usize, depth: usize) -> Vec<usize> {
    let mut sizes = vec![1usize];
    let (mut a, mut b) = (q as i64, 0i64);
    let q = q as i64;
    for _ in 1..=depth {
        sizes.push((a + b) as usize);
        (a, b) = ((q - 5) * a + (q - 6) * b, a + b);
    }
    sizes
}

fn tiling(a: TilingArgs) -> CliResult<()> {
    let mut cfg = Config::load(a.common.config.as_deref())?;
    let io = open(&a.common, &mut cfg, Format::Csv)?;
    let q = require(cfg.pick(a.q, "q")?, "q")?;
    let depth = cfg.pick(a.depth, "depth")?.unwrap_or(4);
    let edges_path: Option<PathBuf> = cfg.pick(a.edges, "edges")?;
    cfg.finish()?;

    let graph = generate(TilingSpec::new(3, q, depth)?)?;
    let rings = ring_sizes(&graph);
    let text = match io.format {
        Format::Csv => qet_core::tiling::ring_sizes_csv(&graph),
        Format::Json => json(&TilingReport {
            p: 3,
            q,
            depth,
            curvature: classify(3, q)?.to_string().to_lowercase(),
            vertices: graph.n_vertices(),
            edges: graph.n_edges(),
            rings: rings.clone(),
        }),
    };
    emit(&io, &text)?;
    if let Some(path) = edges_path {
        std::fs::write(&path, qet_core::tiling::export_edges(&graph))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if !io.check {
        return Ok(());
    }
    if q < 6 {
        return Err(CliError::Usage("--check needs q >= 6".into()));
    }
    let expected = recurrence_rings(q, depth);
    verdict(if rings == expected {
        vec![]
    } else {
        vec![format!("rings {rings:?}, recurrence {expected:?}")]
    })
}

fn qet(a: QetArgs) -> CliResult<()> {
    let mut cfg = Config::load(a.common.config.as_deref())?;
    let io = open(&a.common, &mut cfg, Format::Json)?;
    let h = require(cfg.pick(a.h, "h")?, "h")?;
    let k = require(cfg.pick(a.k, "k")?, "k")?;
    let shots = cfg.pick(a.shots, "shots")?;
    let seed = cfg.pick(a.seed, "seed")?.unwrap_or(DEFAULT_SEED);
    cfg.finish()?;

    let params = MinimalModelParams::new(h, k)?;
    let bundle = build_minimal(params)?;
    let ground = solve_ground(&bundle.total)?;
    let mut records = vec![run_protocol(
        &bundle,
        &ground,
        &[1],
        ProtocolAxes::default(),
    )?];
    if let Some(n) = shots {
        records.push(sampled_record(&bundle, &ground, &[1], n, seed, 0)?);
    }
    emit(&io, &report::records(&records, io.format))?;
    if !io.check {
        return Ok(());
    }
    let mut failures = Vec::new();
    let e0 = h * h / h.hypot(k);
    if (records[0].e0 - e0).abs() > 1e-10 {
        failures.push(format!(
            "E0 {} differs from h^2/sqrt(h^2+k^2) = {e0}",
            records[0].e0
        ));
    }
    failures.extend(report::sampling_failures(&records));
    failures.extend(report::negative_extraction(&records[0]));
    verdict(failures)
}

fn qed(a: QedArgs) -> CliResult<()> {
    let mut cfg = Config::load(a.common.config.as_deref())?;
    let io = open(&a.common, &mut cfg, Format::Json)?;
    let h = require(cfg.pick(a.h, "h")?, "h")?;
    let k = require(cfg.pick(a.k, "k")?, "k")?;
    let q = require(cfg.pick(a.q, "q")?, "q")?;
    let receivers = cfg.pick(a.receivers, "receivers")?.unwrap_or(vec![1, 2]);
    let shots = cfg.pick(a.shots, "shots")?;
    let seed = cfg.pick(a.seed, "seed")?.unwrap_or(DEFAULT_SEED);
    let star = match cfg.pick::<String>(a.star.map(|s| s.to_string()), "star")? {
        Some(s) => s.parse::<StarConvention>()?,
        None => StarConvention::default(),
    };
    cfg.finish()?;

    let params = StarModelParams::with_convention(h, k, q, star)?;
    let (bundle, ground) = build_star_with_ground(params)?;
    let mut records = vec![run_protocol(
        &bundle,
        &ground,
        &receivers,
        ProtocolAxes::default(),
    )?];
    if let Some(n) = shots {
        records.push(sampled_record(&bundle, &ground, &receivers, n, seed, 0)?);
    }
    emit(&io, &report::records(&records, io.format))?;
    if !io.check {
        return Ok(());
    }
    let mut failures = Vec::new();
    // every receiver must see what it would see acting alone
    for &j in &receivers {
        let alone = run_protocol(&bundle, &ground, &[j], ProtocolAxes::default())?;
        let d = (alone.receivers[&j].energy.e - records[0].receivers[&j].energy.e).abs();
        if d > 1e-10 {
            failures.push(format!("receiver {j} depends on the others by {d:.3e}"));
        }
    }
    failures.extend(report::sampling_failures(&records));
    failures.extend(report::negative_extraction(&records[0]));
    verdict(failures)
}

#[derive(Serialize)]
struct LongrangeReport<'a> {
    hops: usize,
    record: &'a QetRecord,
    transcript: &'a [qet_core::teleport::Message],
}

fn longrange(a: LongrangeArgs) -> CliResult<()> {
    let mut cfg = Config::load(a.common.config.as_deref())?;
    let io = open(&a.common, &mut cfg, Format::Json)?;
    let h = require(cfg.pick(a.h, "h")?, "h")?;
    let k = require(cfg.pick(a.k, "k")?, "k")?;
    let hops = cfg.pick(a.hops, "hops")?.unwrap_or(1);
    let seed = cfg.pick(a.seed, "seed")?.unwrap_or(DEFAULT_SEED);
    let transcript_path: Option<PathBuf> = cfg.pick(a.transcript, "transcript")?;
    cfg.finish()?;

    let params = MinimalModelParams::new(h, k)?;
    let (record, transcript) = run_longrange_qet(params, hops, seed)?;
    let text = match io.format {
        Format::Json => json(&LongrangeReport {
            hops,
            record: &record,
            transcript: transcript.messages(),
        }),
        Format::Csv => report::records(std::slice::from_ref(&record), Format::Csv),
    };
    emit(&io, &text)?;
    if let Some(path) = transcript_path {
        std::fs::write(&path, transcript.to_text())
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if !io.check {
        return Ok(());
    }
    let mut failures = Vec::new();
    let direct = run_minimal_qet(params)?;
    let d = record.max_abs_diff(&direct);
    if d > 1e-10 {
        failures.push(format!("relayed record differs from direct by {d:.3e}"));
    }
    if transcript.count(Purpose::MuBroadcast) != 1
        || transcript.count(Purpose::TeleportCorrection) != 2 * hops
    {
        failures.push(format!(
            "unexpected transcript of {} messages",
            transcript.messages().len()
        ));
    }
    verdict(failures)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Table1(a) => table1(a),
        Command::Sweep(a) => sweep(a),
        Command::Tiling(a) => tiling(a),
        Command::Qet(a) => qet(a),
        Command::Qed(a) => qed(a),
        Command::Longrange(a) => longrange(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Check(msg)) => {
            eprintln!("check failed:\n{msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
