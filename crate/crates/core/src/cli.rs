//! The `gapcount` command line: synth, analyze, fit, sweep, schedule, verify.
//!
//! Exit codes: 0 on success, 1 on input or usage errors, 2 on estimation errors.

use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{
    collapse_sweep, draw_rng, gamma_sweep, is_excluded, AggregateOptions, Cell, TupleField, Weighting,
    DEFAULT_GAMMA_GRID, DEFAULT_TIE_THRESHOLD,
};
use crate::gap::{contact_triple, ContactTriple, DEFAULT_EPS};
use crate::io::{create_output, read_dump, read_triples, DumpFormat, TriplesWriter, DumpWriter, Dtype};
use crate::report::{fit_cell, sha256_hex, AnalysisReport, Provenance};
use crate::row::{RowMeta, ScoreRow};
use crate::synth::{dynamic_ntk_scale, legacy_multiplier, yarn_beta, Family, ScoreFamily};
use crate::verify;

pub const SEED_ENV: &str = "GAPCOUNT_SEED";
const DEFAULT_COLLAPSE_GRID: &str = "0.05,0.2,0.5,1,2,5,20";
/// Rows are analyzed in chunks of at most this many scores so memory stays bounded.
const CHUNK_SCORES: usize = 1 << 22;

#[derive(Debug, Parser)]
#[command(name = "gapcount", version, about = "Gap-counting diagnostics for attention score rows")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-row contact triples (Λ, Δ, α) from a score dump.
    Analyze(AnalyzeArgs),
    /// Write a synthetic score dump from a closed-form family.
    Synth(SynthArgs),
    /// Per-cell exponents with bootstrap half-IQRs from a triples table.
    Fit(FitArgs),
    /// γ sweep over a dump, or collapse sweep over a family.
    Sweep(SweepArgs),
    /// Evaluate a length-dependent temperature schedule.
    Schedule(ScheduleArgs),
    /// Run the built-in property suite.
    Verify,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Score dump (text or binary); `-` for stdin.
    #[arg(long = "in", default_value = "-")]
    pub input: PathBuf,
    /// Triples CSV; `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// log10 Λ above which a row counts as a tie in the summary.
    #[arg(long, default_value_t = DEFAULT_TIE_THRESHOLD)]
    pub tie_threshold: f64,
    /// Skip malformed records instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DtypeArg {
    F32,
    F64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// simplex | block | finite-contact
    #[arg(long)]
    pub family: String,
    /// Family parameters: inline JSON or a path to a JSON file.
    #[arg(long, default_value = "{}")]
    pub params: String,
    /// Context lengths, e.g. `1024,4096` or `2^10..20:2`.
    #[arg(long)]
    pub n_grid: String,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    #[arg(long, value_enum, default_value_t = DtypeArg::F64)]
    pub dtype: DtypeArg,
    /// Rows per context length, written as heads 0..K.
    #[arg(long, default_value_t = 1)]
    pub replicates: u32,
    /// Standard deviation of Gaussian noise added to every score.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cell id written into every record (default: the family name).
    #[arg(long)]
    pub cell_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Triples CSV; `-` for stdin.
    #[arg(long = "in", default_value = "-")]
    pub input: PathBuf,
    /// Comma-separated cell ids, or `all`.
    #[arg(long, default_value = "all")]
    pub cells: String,
    /// Context-length grid shared by all cells (default: the lengths present per cell).
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Metadata fields forming the bootstrap unit.
    #[arg(long, default_value = "layer,head")]
    pub tuple_key: String,
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = WeightingArg::Plain)]
    pub weighting: WeightingArg,
    #[arg(long, default_value_t = DEFAULT_TIE_THRESHOLD)]
    pub tie_threshold: f64,
    /// Contact tolerance the triples were computed with (recorded in provenance).
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Plain,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Gamma,
    Collapse,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    /// Score dump for the γ sweep.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Family for the collapse sweep: a name, or JSON with a `kind` field.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value = "{}")]
    pub params: String,
    /// γ values (gamma mode) or s values (collapse mode).
    #[arg(long)]
    pub grid: Option<String>,
    /// Context lengths for the collapse sweep.
    #[arg(long)]
    pub n_grid: Option<String>,
    #[arg(long)]
    pub lenient: bool,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleKind {
    Legacy,
    Yarn,
    Ntk,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long, value_enum)]
    pub kind: ScheduleKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub n_train: usize,
    #[arg(long, default_value_t = 1.0)]
    pub xi: f64,
    #[arg(long, default_value_t = 128)]
    pub d: usize,
}

/// Parses arguments and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gapcount: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::config("--threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::config(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Synth(a) => synth(a),
        Command::Fit(a) => fit(a),
        Command::Sweep(a) => sweep(a),
        Command::Schedule(a) => schedule(a),
        Command::Verify => run_verify(),
    })
}

/// `--seed`, unless the environment overrides it.
fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn parse_count(item: &str) -> Result<usize> {
    let bad = || Error::config(format!("bad grid entry {item:?}"));
    match item.split_once('^') {
        Some(("2", k)) => {
            let k: u32 = k.parse().map_err(|_| bad())?;
            1usize.checked_shl(k).filter(|_| k < usize::BITS).ok_or_else(bad)
        }
        Some(_) => Err(bad()),
        None => item.parse().map_err(|_| bad()),
    }
}

/// A context-length list: `N`, `2^K`, or `2^A..B[:S]` (powers of two, exponent step S).
pub fn parse_n_grid(spec: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let bad = || Error::config(format!("bad grid range {item:?}"));
            let lo = lo.strip_prefix("2^").ok_or_else(bad)?.parse::<u32>().map_err(|_| bad())?;
            let (hi, step) = match rest.split_once(':') {
                Some((h, s)) => (h, s.parse::<u32>().map_err(|_| bad())?),
                None => (rest, 1),
            };
            let hi = hi.trim_start_matches("2^").parse::<u32>().map_err(|_| bad())?;
            if step == 0 || hi < lo || hi >= usize::BITS {
                return Err(bad());
            }
            out.extend((lo..=hi).step_by(step as usize).map(|k| 1usize << k));
        } else {
            out.push(parse_count(item)?);
        }
    }
    if out.is_empty() {
        return Err(Error::config("empty grid"));
    }
    Ok(out)
}

pub fn parse_float_list(spec: &str) -> Result<Vec<f64>> {
    let out = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::config(format!("bad number {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(Error::config("empty list"));
    }
    Ok(out)
}

/// Inline JSON (starting with `{`) or the contents of a file.
fn load_json(spec: &str) -> Result<String> {
    if spec.trim_start().starts_with('{') {
        Ok(spec.to_string())
    } else {
        Ok(std::fs::read_to_string(spec)?)
    }
}

fn parse_family(family: &str, params: &str) -> Result<Family> {
    match family {
        "simplex" | "block" | "finite-contact" => Family::from_json(family, &load_json(params)?),
        spec => {
            let json = load_json(spec)?;
            let value: serde_json::Value = serde_json::from_str(&json)?;
            let kind = value
                .get("kind")
                .and_then(|k| k.as_str())
                .ok_or_else(|| Error::config("family config needs a \"kind\" field"))?;
            Family::from_json(kind, &json)
        }
    }
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    if !(0.0..1.0).contains(&a.eps) {
        return Err(Error::domain(format!("eps must lie in [0, 1), got {}", a.eps)));
    }
    let mut reader = read_dump(&a.input, a.lenient)?;
    let mut out = TriplesWriter::new(create_output(&a.out)?)?;
    let (mut rows, mut ties, mut above) = (0usize, 0usize, 0usize);
    let mut chunk: Vec<ScoreRow> = Vec::new();
    let mut chunk_scores = 0;
    let mut flush = |chunk: &mut Vec<ScoreRow>, out: &mut TriplesWriter<Box<dyn Write>>| -> Result<()> {
        let triples: Vec<ContactTriple> =
            chunk.par_iter().map(|r| contact_triple(r, a.eps)).collect::<Result<_>>()?;
        for (row, t) in chunk.iter().zip(&triples) {
            rows += 1;
            if t.is_tie() {
                ties += 1;
            } else if is_excluded(t, a.tie_threshold) && !t.is_degenerate() {
                above += 1;
            }
            out.write(row.meta(), t)?;
        }
        chunk.clear();
        Ok(())
    };
    for row in reader.by_ref() {
        let row = row?;
        chunk_scores += row.len();
        chunk.push(row);
        if chunk_scores >= CHUNK_SCORES || chunk.len() >= 4096 {
            flush(&mut chunk, &mut out)?;
            chunk_scores = 0;
        }
    }
    flush(&mut chunk, &mut out)?;
    out.finish()?;
    for s in reader.skipped() {
        eprintln!("gapcount: skipped {s}");
    }
    eprintln!(
        "analyze: {rows} rows, {ties} exact ties, {above} with log10 Lambda > {}, {} skipped",
        a.tie_threshold,
        reader.skipped().len()
    );
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let family = parse_family(&a.family, &a.params)?;
    let grid = parse_n_grid(&a.n_grid)?;
    if a.replicates == 0 {
        return Err(Error::config("--replicates must be positive"));
    }
    if !(a.jitter.is_finite() && a.jitter >= 0.0) {
        return Err(Error::config(format!("--jitter must be finite and >= 0, got {}", a.jitter)));
    }
    let seed = effective_seed(a.seed)?;
    let cell_id = a.cell_id.clone().unwrap_or_else(|| family.name().to_string());
    let format = match a.format {
        FormatArg::Text => DumpFormat::Text,
        FormatArg::Binary => DumpFormat::Binary,
    };
    let dtype = match a.dtype {
        DtypeArg::F32 => Dtype::F32,
        DtypeArg::F64 => Dtype::F64,
    };
    let noise = Normal::new(0.0, a.jitter).map_err(|e| Error::config(e.to_string()))?;
    let mut writer = DumpWriter::new(create_output(&a.out)?, format, dtype)?;
    let mut stream = 0usize;
    for &n in &grid {
        let (base, _) = family.row(n)?.into_parts();
        for head in 0..a.replicates {
            let mut scores = base.clone();
            if a.jitter > 0.0 {
                let mut rng = draw_rng(seed, stream);
                scores.iter_mut().for_each(|z| *z += noise.sample(&mut rng));
            }
            stream += 1;
            let row = ScoreRow::new(scores, RowMeta::new(cell_id.clone(), 0, head, "synth", n, n - 1))?;
            writer.write_row(&row)?;
        }
    }
    writer.finish()?;
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let seed = effective_seed(a.seed)?;
    let bytes = if a.input.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().lock().read_to_end(&mut buf)?;
        buf
    } else {
        std::fs::read(&a.input)?
    };
    let triples = read_triples(bytes.as_slice())?;
    let tuple_key = a.tuple_key.split(',').map(str::parse).collect::<Result<Vec<TupleField>>>()?;
    let shared_grid = a.n_grid.as_deref().map(parse_n_grid).transpose()?;

    let mut ids: Vec<String> = if a.cells.trim() == "all" {
        triples.iter().map(|(m, _)| m.cell_id.clone()).collect()
    } else {
        a.cells.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    };
    ids.sort();
    ids.dedup();
    if ids.is_empty() {
        return Err(Error::estimation("no cells to fit"));
    }

    let weighting = match a.weighting {
        WeightingArg::Plain => Weighting::Plain,
        WeightingArg::Count => Weighting::Count,
    };
    let opts = AggregateOptions { tie_threshold: a.tie_threshold, weighting };
    let mut cells = Vec::with_capacity(ids.len());
    for id in ids {
        let grid = match &shared_grid {
            Some(g) => {
                let mut g = g.clone();
                g.sort_unstable();
                g.dedup();
                g
            }
            None => {
                let mut g: Vec<usize> = triples.iter().filter(|(m, _)| m.cell_id == id).map(|(m, _)| m.n).collect();
                g.sort_unstable();
                g.dedup();
                g
            }
        };
        if !triples.iter().any(|(m, _)| m.cell_id == id) {
            return Err(Error::estimation(format!("cell {id} has no rows")));
        }
        let cell = Cell::new(id, grid, tuple_key.clone())?;
        let report = fit_cell(&cell, &triples, opts, a.bootstrap, seed)?;
        if !report.omitted_n.is_empty() {
            eprintln!("fit: cell {}: no surviving rows at n = {:?}", report.cell_id, report.omitted_n);
        }
        cells.push(report);
    }

    let provenance = Provenance {
        tool: "gapcount".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        bootstrap: a.bootstrap,
        eps: a.eps,
        tie_threshold: a.tie_threshold,
        weighting,
        input_sha256: sha256_hex(&bytes),
    };
    let report = AnalysisReport::new(provenance, cells);
    let mut out = create_output(&a.out)?;
    out.write_all(report.to_json()?.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut out = create_output(&a.out)?;
    match a.mode {
        SweepMode::Gamma => {
            let input = a.input.ok_or_else(|| Error::config("gamma sweep needs --in DUMP"))?;
            let gammas = match &a.grid {
                Some(g) => parse_float_list(g)?,
                None => DEFAULT_GAMMA_GRID.to_vec(),
            };
            let mut reader = read_dump(&input, a.lenient)?;
            let rows = reader.by_ref().collect::<Result<Vec<_>>>()?;
            for s in reader.skipped() {
                eprintln!("gapcount: skipped {s}");
            }
            let sweep = gamma_sweep(&rows, &gammas)?;
            eprintln!("sweep: {} rows used, {} tied rows excluded", sweep.rows_used, sweep.rows_excluded);
            writeln!(out, "gamma,median_p_star,frac_below_inv_log_n,rows")?;
            for p in &sweep.points {
                writeln!(out, "{},{},{},{}", p.gamma, p.median_p_star, p.frac_below_inv_log_n, sweep.rows_used)?;
            }
        }
        SweepMode::Collapse => {
            let family = parse_family(
                a.family.as_deref().ok_or_else(|| Error::config("collapse sweep needs --family"))?,
                &a.params,
            )?;
            let n_grid = parse_n_grid(a.n_grid.as_deref().ok_or_else(|| Error::config("collapse sweep needs --n-grid"))?)?;
            let s_values = parse_float_list(a.grid.as_deref().unwrap_or(DEFAULT_COLLAPSE_GRID))?;
            let points = collapse_sweep(&family, &s_values, &n_grid)?;
            writeln!(out, "family,n,s,beta,lambda,H,D,G,Z")?;
            for p in &points {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    family.name(),
                    p.n,
                    p.s,
                    p.beta,
                    p.lambda,
                    p.entropy,
                    p.top_two_gap,
                    p.rank_gap,
                    p.z
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn schedule(a: ScheduleArgs) -> Result<()> {
    let value = match a.kind {
        ScheduleKind::Legacy => legacy_multiplier(a.n, a.n_train, a.xi)?,
        ScheduleKind::Yarn => yarn_beta(a.n, a.n_train)?,
        ScheduleKind::Ntk => dynamic_ntk_scale(a.n, a.n_train, a.d)?,
    };
    println!("{value}");
    Ok(())
}

fn run_verify() -> Result<()> {
    let outcomes = verify::run_all();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    for o in &outcomes {
        println!("{o}");
    }
    println!("{} checks, {} failed", outcomes.len(), failed);
    if failed > 0 {
        return Err(Error::config(format!("{failed} property checks failed")));
    }
    Ok(())
}
