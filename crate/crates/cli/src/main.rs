//! `shortpolar` command-line front end.

mod svg;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use shortpolar::ae::{select_ensemble, Ensemble, EnsembleConfig};
use shortpolar::autgroup::{compute_star_pattern, count_pi, estimate_es, exhaustive_stats, classify_grid, GridCell};
use shortpolar::construct::{
    build_shortened_code, is_polar_like, verify_shortening, CodeSpec, ShortMode, ShortPattern, SnrConvention,
};
use shortpolar::decoders::{DecoderConfig, DecoderKind, UpdateRule};
use shortpolar::parallel::{with_threads, ExecMode};
use shortpolar::sim::{run_bler, write_csv, FrameDecoder, PlainDecoder, StopRule};

#[derive(Parser)]
#[command(name = "shortpolar", version, about = "Shortened polar codes and automorphism ensemble decoding")]
struct Cli {
    /// Worker threads for the parallel commands (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a (shortened) code and write its JSON description.
    Design(DesignArgs),
    /// Star pattern and group statistics of a code's mother.
    Autgroup(AutgroupArgs),
    /// Large/small classification over all (S, K') pairs.
    Classify(ClassifyArgs),
    /// Draw an ensemble of branch permutations.
    Ensemble(EnsembleArgs),
    /// Monte-Carlo BLER simulation.
    Simulate(SimulateArgs),
    /// Render result CSVs as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Number of shortened positions S.
    #[arg(long, default_value_t = 0)]
    short: usize,
    #[arg(long, value_enum, default_value_t = PatternArg::Block)]
    pattern: PatternArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Frozen)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.0)]
    design_snr: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AutgroupArgs {
    /// Code JSON written by `design`.
    #[arg(long)]
    code: PathBuf,
    /// Enumerate the whole pool (n <= 4).
    #[arg(long)]
    exhaustive: bool,
    /// Monte-Carlo samples for the shortening-filter probability.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix: writes `<out>.pattern.json` and `<out>.stats.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    design_snr: f64,
    #[arg(long, value_enum, default_value_t = GridPattern::Both)]
    pattern: GridPattern,
    /// Output prefix: writes `<out>_br.csv` and/or `<out>_block.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct EnsembleOpts {
    /// Number of ensemble branches.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Allow maps that move the shortening set (dynamic frozen bits).
    #[arg(long)]
    adjusted: bool,
    /// Make the first branch the identity.
    #[arg(long)]
    force_identity: bool,
    /// Seed for drawing the branch maps.
    #[arg(long, default_value_t = 0)]
    ensemble_seed: u64,
}

#[derive(Args, Clone)]
struct DecoderOpts {
    /// SCL list size.
    #[arg(long, default_value_t = 4)]
    list: usize,
    /// SCAN/BP iteration budget.
    #[arg(long, default_value_t = 200)]
    iters: usize,
    /// Disable BP early termination.
    #[arg(long)]
    no_early_termination: bool,
    #[arg(long, value_enum, default_value_t = RuleArg::MinSum)]
    update_rule: RuleArg,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long, value_enum, default_value_t = BaseArg::Bp)]
    base: BaseArg,
    #[command(flatten)]
    ens: EnsembleOpts,
    #[command(flatten)]
    dec: DecoderOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long, value_enum)]
    decoder: DecoderArg,
    #[command(flatten)]
    ens: EnsembleOpts,
    /// Ensemble JSON written by `ensemble`; overrides the sampling options.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[command(flatten)]
    dec: DecoderOpts,
    /// SNR grid `start:step:stop` or a comma-separated list, in dB.
    #[arg(long)]
    snrs: String,
    #[arg(long, value_enum, default_value_t = ConventionArg::Snr)]
    convention: ConventionArg,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Input CSVs. For `grid`, the first is the BR grid and the optional
    /// second the block grid.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    kind: PlotKind,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PatternArg {
    Block,
    Br,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridPattern {
    Both,
    Block,
    Br,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Frozen,
    Info,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    MinSum,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Snr,
    Esn0,
    Ebn0,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Sc,
    Scl,
    Scan,
    Bp,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Sc,
    Scl,
    Scan,
    Bp,
    AeSc,
    AeScl,
    AeScan,
    AeBp,
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum PlotKind {
    Bler,
    Tmax,
    Grid,
}

impl From<PatternArg> for ShortPattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Block => ShortPattern::Block,
            PatternArg::Br => ShortPattern::BitReversal,
            PatternArg::None => ShortPattern::None,
        }
    }
}

impl From<ConventionArg> for SnrConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Snr => SnrConvention::Snr,
            ConventionArg::Esn0 => SnrConvention::EsN0,
            ConventionArg::Ebn0 => SnrConvention::EbN0,
        }
    }
}

/// Failure classes mapped to exit codes 2 and 3.
enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<shortpolar::Error> for Failure {
    fn from(e: shortpolar::Error) -> Self {
        use shortpolar::Error as E;
        match e {
            E::Size(_)
            | E::Dimension(_)
            | E::IndexOutOfRange { .. }
            | E::Infeasible(_)
            | E::Config(_)
            | E::Parse(_)
            | E::TooLarge(_)
            | E::MessageLength { .. } => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let result = with_threads(threads, move || match cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Autgroup(a) => cmd_autgroup(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Plot(a) => cmd_plot(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_code(path: &Path) -> Result<CodeSpec, Failure> {
    let file = File::open(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let spec: CodeSpec = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

fn fmt_set(set: &[usize]) -> String {
    let items: Vec<String> = set.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn cmd_design(a: DesignArgs) -> CmdResult {
    let mode = match a.mode {
        ModeArg::Frozen => ShortMode::ZInF,
        ModeArg::Info => ShortMode::ZInI,
    };
    let pattern = if a.short == 0 { ShortPattern::None } else { a.pattern.into() };
    let spec = build_shortened_code(a.n, a.k, a.short, pattern, mode, a.design_snr)?;
    eprintln!("N = {}, K = {}, S = {}, N' = {}", spec.big_n, spec.k, spec.s, spec.transmitted_len());
    eprintln!("I = {}", fmt_set(&spec.info_set));
    eprintln!("F = {}", fmt_set(&spec.frozen_set));
    eprintln!("Z = {}", fmt_set(&spec.short_set));
    eprintln!("G_N(I, Z) = 0: {}", verify_shortening(&spec));
    eprintln!("polar-like mother: {}", is_polar_like(&spec));
    write_json(&spec, a.out.as_deref())
}

#[derive(Serialize)]
struct AutgroupReport {
    star_count: usize,
    b_stars: usize,
    pattern: Vec<String>,
    pi_bound: u128,
    pi_bound_exact: bool,
}

fn cmd_autgroup(a: AutgroupArgs) -> CmdResult {
    let spec = read_code(&a.code)?;
    if a.exhaustive && spec.n > 4 {
        return Err(Failure::Validation(format!("exhaustive enumeration needs n <= 4, got n = {}", spec.n)));
    }
    let pattern = compute_star_pattern(&spec);
    let count = count_pi(&pattern);
    eprintln!("{pattern}");
    eprintln!("|stars| = {}", pattern.star_count);
    let stats = if a.exhaustive {
        exhaustive_stats(&spec)?
    } else {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(a.seed);
        estimate_es(&spec, a.samples, &mut rng)?.group_stats(&spec)
    };
    eprintln!("|Pi| = {}{}", stats.pi_size, if stats.pi_exact { "" } else { " (bound)" });
    eprintln!("|A(C_m)| = {}", stats.aut_size);
    eprintln!("P(pi(Z) = Z) = {:.6}", stats.es_probability);
    let report = AutgroupReport {
        star_count: pattern.star_count,
        b_stars: pattern.b_star_count(),
        pattern: pattern.to_string().lines().map(str::to_string).collect(),
        pi_bound: count.count,
        pi_bound_exact: count.exact,
    };
    match &a.out {
        Some(prefix) => {
            write_json(&report, Some(&with_suffix(prefix, ".pattern.json")))?;
            write_json(&stats, Some(&with_suffix(prefix, ".stats.json")))
        }
        None => {
            write_json(&report, None)?;
            write_json(&stats, None)
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_grid(cells: &[GridCell], path: &Path) -> CmdResult {
    let file = BufWriter::new(File::create(path)?);
    let mut w = csv::Writer::from_writer(file);
    for c in cells {
        w.serialize(c).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_classify(a: ClassifyArgs) -> CmdResult {
    let patterns: &[(ShortPattern, &str)] = match a.pattern {
        GridPattern::Both => &[(ShortPattern::BitReversal, "br"), (ShortPattern::Block, "block")],
        GridPattern::Br => &[(ShortPattern::BitReversal, "br")],
        GridPattern::Block => &[(ShortPattern::Block, "block")],
    };
    if !(2..=10).contains(&a.n) {
        return Err(Failure::Validation(format!("n = {} outside 2..=10", a.n)));
    }
    for &(pattern, tag) in patterns {
        let grid = classify_grid(a.n, a.design_snr, pattern, ExecMode::Parallel)?;
        println!(
            "{tag}: |C_large| = {}, |(S,K')| = {}, ratio = {:.4}",
            grid.large,
            grid.pairs,
            grid.large_fraction()
        );
        if let Some(prefix) = &a.out {
            write_grid(&grid.cells, &with_suffix(prefix, &format!("_{tag}.csv")))?;
        }
    }
    Ok(())
}

fn base_config(kind: DecoderKind, d: &DecoderOpts) -> DecoderConfig {
    DecoderConfig {
        kind,
        list_size: d.list,
        max_iters: d.iters,
        early_termination: !d.no_early_termination,
        update_rule: match d.update_rule {
            RuleArg::MinSum => UpdateRule::MinSum,
            RuleArg::Exact => UpdateRule::Exact,
        },
    }
}

fn draw_ensemble(spec: &CodeSpec, base: DecoderConfig, e: &EnsembleOpts) -> Result<EnsembleConfig, Failure> {
    Ok(select_ensemble(spec, e.m, e.adjusted, e.force_identity, base, e.ensemble_seed)?)
}

fn cmd_ensemble(a: EnsembleArgs) -> CmdResult {
    let spec = read_code(&a.code)?;
    let kind = match a.base {
        BaseArg::Sc => DecoderKind::Sc,
        BaseArg::Scl => DecoderKind::Scl,
        BaseArg::Scan => DecoderKind::Scan,
        BaseArg::Bp => DecoderKind::Bp,
    };
    let base = base_config(kind, &a.dec);
    base.validate()?;
    let cfg = draw_ensemble(&spec, base, &a.ens)?;
    write_json(&cfg, a.out.as_deref())
}

/// Parses `start:step:stop` (inclusive) or `a,b,c`.
fn parse_snrs(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Validation(format!("invalid SNR list {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    let snrs = match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(Failure::Validation(format!("empty SNR range {text:?}")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).map(|v| (v * 1e9).round() / 1e9).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad()),
    };
    if snrs.is_empty() || snrs.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(snrs)
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let spec = read_code(&a.code)?;
    let snrs = parse_snrs(&a.snrs)?;
    let (kind, ensemble) = match a.decoder {
        DecoderArg::Sc => (DecoderKind::Sc, false),
        DecoderArg::Scl => (DecoderKind::Scl, false),
        DecoderArg::Scan => (DecoderKind::Scan, false),
        DecoderArg::Bp => (DecoderKind::Bp, false),
        DecoderArg::AeSc => (DecoderKind::Sc, true),
        DecoderArg::AeScl => (DecoderKind::Scl, true),
        DecoderArg::AeScan => (DecoderKind::Scan, true),
        DecoderArg::AeBp => (DecoderKind::Bp, true),
    };
    let base = base_config(kind, &a.dec);
    base.validate()?;
    let stop = StopRule { min_errors: a.min_errors, max_frames: a.max_frames };
    let decoder: Box<dyn FrameDecoder> = if ensemble {
        let cfg = match &a.ensemble {
            Some(path) => {
                let file = File::open(path)?;
                serde_json::from_reader(BufReader::new(file))
                    .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
            }
            None => draw_ensemble(&spec, base, &a.ens)?,
        };
        Box::new(Ensemble::new(&cfg, &spec)?)
    } else {
        if a.ensemble.is_some() {
            return Err(Failure::Validation("--ensemble needs an ae-* decoder".into()));
        }
        Box::new(PlainDecoder { spec: spec.clone(), cfg: base })
    };
    let results = run_bler(&spec, decoder.as_ref(), &snrs, a.convention.into(), stop, a.seed, ExecMode::Parallel)?;
    for r in &results {
        eprintln!(
            "snr {:>6.2} dB  frames {:>9}  errors {:>5}  bler {:.3e}  E[Tmax] {:.2}  ({:.1}s)",
            r.snr_db, r.frames, r.block_errors, r.bler, r.avg_tmax, r.wall_time_s
        );
    }
    match &a.out {
        Some(path) => write_csv(&results, BufWriter::new(File::create(path)?))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&results, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> CmdResult {
    let svg = svg::render(a.kind, &a.inputs).map_err(Failure::Validation)?;
    std::fs::write(&a.out, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_grids() {
        assert_eq!(parse_snrs("1:0.5:2").ok().unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_snrs("2.48,2.98").ok().unwrap(), vec![2.48, 2.98]);
        assert_eq!(parse_snrs("0.98:0.5:2.98").ok().unwrap().len(), 5);
        assert!(parse_snrs("4:1:1").is_err());
        assert!(parse_snrs("1:0:2").is_err());
        assert!(parse_snrs("x").is_err());
    }
}
