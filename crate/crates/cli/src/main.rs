//! `ibnet` command line: build daily interbank networks from transaction
//! logs, generate calibrated synthetic networks, compute structural
//! statistics, and run default-cascade experiments.
//!
//! Exit codes: 0 success, 2 usage or input validation error, 1 internal
//! error. All randomness derives from the `--seed` flag; re-running a
//! command with the same arguments reproduces every output file byte for
//! byte, regardless of `--workers`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use ibnet::contagion::{self, ContagionParams};
use ibnet::graph::{BankId, DayLabel, InterbankNetwork};
use ibnet::ingest;
use ibnet::metrics::{self, Direction};
use ibnet::money::{parse_decimal_rational, rational_to_decimal_string};
use ibnet::report::{self, Metadata};
use ibnet::synth::{self, GeneratorConfig};
use ibnet::{Money, Rational};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "ibnet", version, about = "Interbank network metrics and default-cascade simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a transaction log and write one edge-list file per day.
    Ingest(IngestArgs),
    /// Compute structural statistics over edge-list files.
    Metrics(MetricsArgs),
    /// Generate calibrated synthetic daily networks.
    Generate(GenerateArgs),
    /// Sweep the capital buffer and record default-cluster statistics.
    Sweep(SweepArgs),
    /// Run a single seeded cascade and print the result as JSON.
    Cascade(CascadeArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Transaction CSV (`date,borrower,lender,amount`); `-` for stdin.
    #[arg(long)]
    input: String,
    /// Directory for `edges_<day>.csv` outputs.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// Edge-list files, one network per file.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Tail cutoff for the power-law fit.
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    /// Degree threshold for the weight-concentration report.
    #[arg(long, default_value_t = 10)]
    conc_threshold: usize,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of banks.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    gamma_in: f64,
    #[arg(long)]
    gamma_out: f64,
    /// Target mean degree z1.
    #[arg(long)]
    mean_degree: f64,
    #[arg(long)]
    seed: u64,
    /// Number of daily networks to generate.
    #[arg(long, default_value_t = 1)]
    days: usize,
    /// Degree cap (defaults to n - 1).
    #[arg(long)]
    k_max: Option<usize>,
    /// Median edge weight in currency units.
    #[arg(long, default_value = "1000000")]
    weight_scale: String,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Edge-list files, one day per file.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Interbank-asset share of the balance sheet.
    #[arg(long, default_value = "0.20")]
    alpha: String,
    /// Capital-buffer grid: `start:end:step` or a comma list.
    #[arg(long, default_value = "0.04:0.10:0.01")]
    kappa_grid: String,
    /// Fire-sale discount on illiquid assets.
    #[arg(long, default_value = "1")]
    q: String,
    /// Worker threads for independent (day, kappa) cells.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Optional JSON-lines file with one record per (day, kappa, seed).
    #[arg(long)]
    per_seed: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CascadeArgs {
    /// Edge-list file for the network to stress.
    #[arg(long)]
    input: PathBuf,
    /// Bank to default by fiat.
    #[arg(long)]
    seed_bank: String,
    #[arg(long, default_value = "0.20")]
    alpha: String,
    #[arg(long, default_value = "0.04")]
    kappa: String,
    #[arg(long, default_value = "1")]
    q: String,
}

enum CliError {
    Usage(String),
    Internal(String),
}

impl From<ibnet::Error> for CliError {
    fn from(err: ibnet::Error) -> CliError {
        match err {
            ibnet::Error::Io(e) => CliError::Internal(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Cascade(args) => cmd_cascade(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

// ---------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------

/// Reads a file, or stdin when the path is `-`.
fn read_input(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Usage(format!("reading stdin: {e}")))?;
        return Ok(buf);
    }
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("reading {path}: {e}")))
}

fn write_output(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Internal(format!("creating {}: {e}", parent.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))
}

/// Base metadata for every output file: tool version plus the exact
/// command line (no timestamps, so outputs are reproducible).
fn base_metadata() -> Metadata {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut meta = Metadata::new(VERSION);
    meta.push("command", format!("ibnet {}", args.join(" ")));
    meta
}

/// Loads edge-list files, labels any unlabeled network from its file
/// name, and sorts by day label for a deterministic processing order.
fn load_networks(paths: &[PathBuf]) -> CliResult<Vec<InterbankNetwork>> {
    let mut nets = Vec::with_capacity(paths.len());
    for path in paths {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
        let mut net = ingest::parse_edges(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if net.day() == &DayLabel::Tag("unlabeled".into()) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                let label = stem.strip_prefix("edges_").unwrap_or(stem);
                net.set_day(DayLabel::parse(label));
            }
        }
        nets.push(net);
    }
    nets.sort_by(|a, b| a.day().cmp(b.day()));
    Ok(nets)
}

fn edge_file_name(day: &DayLabel) -> String {
    format!("edges_{day}.csv")
}

/// Parses `start:end:step` or a comma-separated list into exact
/// rationals.
fn parse_kappa_grid(text: &str) -> CliResult<Vec<Rational>> {
    let bad = |msg: String| CliError::Usage(format!("kappa grid {text:?}: {msg}"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:end:step".into()));
        }
        let start = parse_decimal_rational(parts[0]).map_err(|e| bad(e.to_string()))?;
        let end = parse_decimal_rational(parts[1]).map_err(|e| bad(e.to_string()))?;
        let step = parse_decimal_rational(parts[2]).map_err(|e| bad(e.to_string()))?;
        if step <= Rational::new(0, 1) {
            return Err(bad("step must be positive".into()));
        }
        if end < start {
            return Err(bad("end must not precede start".into()));
        }
        let mut grid = Vec::new();
        let mut value = start;
        while value <= end {
            grid.push(value);
            value += step;
        }
        Ok(grid)
    } else {
        text.split(',')
            .map(|part| parse_decimal_rational(part.trim()).map_err(|e| bad(e.to_string())))
            .collect()
    }
}

// ---------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------

fn cmd_ingest(args: IngestArgs) -> CliResult<()> {
    let text = read_input(&args.input)?;
    let log = ingest::parse_transactions(&text)?;
    if log.is_empty() {
        return Err(CliError::Usage("no transactions in input".into()));
    }
    let nets = ingest::daily_networks(&log)?;
    let meta = base_metadata();
    println!("{:<14}{:>8}{:>8}{:>10}{:>18}", "day", "banks", "active", "edges", "total_exposure");
    for net in &nets {
        let mut buf = meta.render().into_bytes();
        ingest::export_edges(net, &[], &mut buf)?;
        let contents = String::from_utf8(buf).expect("edge export is UTF-8");
        write_output(&args.out_dir.join(edge_file_name(net.day())), &contents)?;
        let stats = metrics::network_stats(net)?;
        println!(
            "{:<14}{:>8}{:>8}{:>10}{:>18}",
            stats.day,
            stats.n_total,
            stats.n_active,
            stats.edge_count,
            net.total_exposure()?.to_string()
        );
    }
    println!(
        "wrote {} daily edge files to {}",
        nets.len(),
        args.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------

#[derive(serde::Serialize)]
struct PooledStats {
    tail_fit_in: Option<metrics::TailFit>,
    tail_fit_in_error: Option<String>,
    tail_fit_out: Option<metrics::TailFit>,
    tail_fit_out_error: Option<String>,
    k_min: usize,
    decomposition: metrics::DecompositionTable,
    /// Per-day share of total out-strength held by banks with
    /// k_out > conc_threshold, then the in-side equivalent.
    concentration_out: Vec<Option<f64>>,
    concentration_in: Vec<Option<f64>>,
    conc_threshold: usize,
    /// Definition used for the z2 columns of the per-day stats.
    z2_definition: &'static str,
}

#[derive(serde::Serialize)]
struct StatsReport {
    days: Vec<metrics::NetworkStats>,
    pooled: PooledStats,
}

fn cmd_metrics(args: MetricsArgs) -> CliResult<()> {
    let nets = load_networks(&args.inputs)?;
    let meta = base_metadata();

    let days: Vec<metrics::NetworkStats> = nets
        .iter()
        .map(metrics::network_stats)
        .collect::<ibnet::Result<_>>()?;

    let hist_in = metrics::degree_histogram(&nets, Direction::In);
    let hist_out = metrics::degree_histogram(&nets, Direction::Out);
    let (fit_in, fit_in_err) = split_fit(metrics::fit_tail_exponent(&hist_in, args.k_min));
    let (fit_out, fit_out_err) = split_fit(metrics::fit_tail_exponent(&hist_out, args.k_min));

    let decomposition = metrics::activity_decomposition(&nets, &[0, 2, 10])?;
    let curve_out_out = metrics::degree_correlation_curve(&nets, Direction::Out);
    let curve_out_in = metrics::degree_correlation_curve(&nets, Direction::In);

    let concentration = |dir| {
        nets.iter()
            .map(|net| metrics::weight_concentration(net, dir, args.conc_threshold).ok())
            .collect::<Vec<_>>()
    };
    let concentration_out = concentration(Direction::Out);
    let concentration_in = concentration(Direction::In);

    let pooled = PooledStats {
        tail_fit_in: fit_in,
        tail_fit_in_error: fit_in_err,
        tail_fit_out: fit_out,
        tail_fit_out_error: fit_out_err,
        k_min: args.k_min,
        decomposition: decomposition.clone(),
        concentration_out: concentration_out.clone(),
        concentration_in: concentration_in.clone(),
        conc_threshold: args.conc_threshold,
        z2_definition: "mean number of directed length-2 walks per vertex",
    };
    let stats = StatsReport { days, pooled };

    let json = serde_json::to_string_pretty(&stats)
        .map_err(|e| CliError::Internal(format!("serializing stats: {e}")))?;
    write_output(&args.out_dir.join("stats.json"), &json)?;

    write_output(
        &args.out_dir.join("hist_in.csv"),
        &report::histogram_csv(&hist_in, &meta),
    )?;
    write_output(
        &args.out_dir.join("hist_out.csv"),
        &report::histogram_csv(&hist_out, &meta),
    )?;
    write_output(
        &args.out_dir.join("curve_out_out.csv"),
        &report::curve_csv(&curve_out_out, &meta),
    )?;
    write_output(
        &args.out_dir.join("curve_out_in.csv"),
        &report::curve_csv(&curve_out_in, &meta),
    )?;
    write_output(
        &args.out_dir.join("decomposition.csv"),
        &report::decomposition_csv(&decomposition, &meta),
    )?;

    let mut text = report::stats_text(&stats.days);
    text.push('\n');
    text.push_str(&report::decomposition_text(&decomposition));
    text.push('\n');
    let _ = writeln!(text, "{}", report::tail_fit_line("in", &stats.pooled.tail_fit_in));
    let _ = writeln!(text, "{}", report::tail_fit_line("out", &stats.pooled.tail_fit_out));
    let mean_of = |values: &[Option<f64>]| {
        let present: Vec<f64> = values.iter().flatten().copied().collect();
        (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
    };
    if let Some(mean) = mean_of(&concentration_out) {
        let _ = writeln!(
            text,
            "mean share of systemic debt at banks with k_out > {}: {mean:.3}",
            args.conc_threshold
        );
    }
    if let Some(mean) = mean_of(&concentration_in) {
        let _ = writeln!(
            text,
            "mean share of loans at banks with k_in > {}: {mean:.3}",
            args.conc_threshold
        );
    }
    write_output(&args.out_dir.join("report.txt"), &text)?;
    print!("{text}");
    println!("wrote stats to {}", args.out_dir.display());
    Ok(())
}

fn split_fit(
    fit: ibnet::Result<metrics::TailFit>,
) -> (Option<metrics::TailFit>, Option<String>) {
    match fit {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

// ---------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------

fn cmd_generate(args: GenerateArgs) -> CliResult<()> {
    let weight_scale: Money = args
        .weight_scale
        .parse()
        .map_err(|e| CliError::Usage(format!("weight-scale: {e}")))?;
    let mut config = GeneratorConfig::new(args.n, args.gamma_in, args.gamma_out, args.mean_degree, args.seed);
    if let Some(k_max) = args.k_max {
        config.k_max = k_max;
    }
    config.weight_scale = weight_scale;
    config.validate()?;

    let generated = synth::generate_days(&config, args.days)?;
    let mut meta = base_metadata();
    meta.push("seed", args.seed.to_string())
        .push("n", args.n.to_string())
        .push("gamma-in", args.gamma_in.to_string())
        .push("gamma-out", args.gamma_out.to_string())
        .push("mean-degree", args.mean_degree.to_string())
        .push("k-max", config.k_max.to_string())
        .push("weight-scale", config.weight_scale.to_string());

    println!("{:<10}{:>8}{:>10}{:>10}", "day", "edges", "dropped", "swaps");
    for (net, gen_report) in &generated {
        let mut buf = meta.render().into_bytes();
        ingest::export_edges(
            net,
            &[("dropped-stub-pairs", gen_report.dropped_stub_pairs.to_string())],
            &mut buf,
        )?;
        let contents = String::from_utf8(buf).expect("edge export is UTF-8");
        write_output(&args.out_dir.join(edge_file_name(net.day())), &contents)?;
        println!(
            "{:<10}{:>8}{:>10}{:>10}",
            net.day().to_string(),
            gen_report.edges,
            gen_report.dropped_stub_pairs,
            gen_report.repair_swaps
        );
    }
    println!(
        "wrote {} synthetic day(s) to {}",
        generated.len(),
        args.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------

#[derive(serde::Serialize)]
struct PerSeedRecord<'a> {
    day: String,
    kappa: &'a str,
    seed: &'a BankId,
    cluster_size: usize,
    cluster_size_incl_seed: usize,
    rounds: usize,
    defaulted: &'a std::collections::BTreeSet<BankId>,
}

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    if args.workers == 0 {
        return Err(CliError::Usage("workers must be at least 1".into()));
    }
    let nets = load_networks(&args.inputs)?;
    let alpha = parse_decimal_rational(&args.alpha)?;
    let q = parse_decimal_rational(&args.q)?;
    let grid = parse_kappa_grid(&args.kappa_grid)?;
    if grid.is_empty() {
        return Err(CliError::Usage("empty kappa grid".into()));
    }
    // Validate every grid point up front (range checks, alpha + kappa <= 1).
    let params_per_kappa = grid
        .iter()
        .map(|&kappa| ContagionParams::new(alpha, kappa, q))
        .collect::<ibnet::Result<Vec<_>>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;

    // One cell per (kappa, day); cells are independent and deterministic,
    // so any worker count yields identical results.
    let cells: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|k| (0..nets.len()).map(move |d| (k, d)))
        .collect();
    let results: Vec<Vec<contagion::CascadeResult>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(k, d)| contagion::all_seed_clusters(&nets[d], &params_per_kappa[k]))
            .collect::<ibnet::Result<_>>()
    })?;

    let mut entries = Vec::with_capacity(grid.len());
    for (k, &kappa) in grid.iter().enumerate() {
        let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
        let mut trials = 0u64;
        for d in 0..nets.len() {
            for result in &results[k * nets.len() + d] {
                *histogram.entry(result.cluster_size()).or_insert(0) += 1;
                trials += 1;
            }
        }
        entries.push(contagion::pool_kappa_entry(kappa, trials, histogram));
    }
    let sweep = contagion::SweepResult { entries };

    let mut meta = base_metadata();
    meta.push("alpha", rational_to_decimal_string(&alpha))
        .push("q", rational_to_decimal_string(&q))
        .push("kappa-grid", args.kappa_grid.clone())
        .push("days", nets.len().to_string());

    write_output(
        &args.out_dir.join("mean_cluster_by_kappa.csv"),
        &report::sweep_mean_csv(&sweep, &meta),
    )?;
    for entry in &sweep.entries {
        write_output(
            &args.out_dir.join(format!("clusters_kappa_{}.csv", entry.kappa)),
            &report::sweep_histogram_csv(entry, &meta),
        )?;
    }

    if let Some(per_seed_path) = &args.per_seed {
        let mut lines = String::new();
        for (k, entry) in sweep.entries.iter().enumerate() {
            for (d, net) in nets.iter().enumerate() {
                for result in &results[k * nets.len() + d] {
                    let record = PerSeedRecord {
                        day: net.day().to_string(),
                        kappa: &entry.kappa,
                        seed: &result.seed,
                        cluster_size: result.cluster_size(),
                        cluster_size_incl_seed: result.cluster_size() + 1,
                        rounds: result.rounds,
                        defaulted: &result.defaulted,
                    };
                    let json = serde_json::to_string(&record)
                        .map_err(|e| CliError::Internal(format!("serializing record: {e}")))?;
                    lines.push_str(&json);
                    lines.push('\n');
                }
            }
        }
        write_output(per_seed_path, &lines)?;
    }

    println!("{:<10}{:>12}{:>16}", "kappa", "trials", "mean_cluster");
    for entry in &sweep.entries {
        println!(
            "{:<10}{:>12}{:>16.4}",
            entry.kappa, entry.trials, entry.mean_cluster
        );
    }
    println!("wrote sweep outputs to {}", args.out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------
// cascade
// ---------------------------------------------------------------------

fn cmd_cascade(args: CascadeArgs) -> CliResult<()> {
    let nets = load_networks(std::slice::from_ref(&args.input))?;
    let net = &nets[0];
    let params = ContagionParams::from_decimal_strs(&args.alpha, &args.kappa, &args.q)?;
    let seed = BankId::new(args.seed_bank)?;
    let sheets = contagion::build_balance_sheets(net, &params)?;
    let result = contagion::cascade(net, &sheets, &seed, params.q())?;

    #[derive(serde::Serialize)]
    struct CascadeOutput<'a> {
        day: String,
        alpha: String,
        kappa: String,
        q: String,
        seed: &'a BankId,
        cluster_size: usize,
        cluster_size_incl_seed: usize,
        rounds: usize,
        defaulted: &'a std::collections::BTreeSet<BankId>,
    }
    let output = CascadeOutput {
        day: net.day().to_string(),
        alpha: rational_to_decimal_string(&params.alpha()),
        kappa: rational_to_decimal_string(&params.kappa()),
        q: rational_to_decimal_string(&params.q()),
        seed: &result.seed,
        cluster_size: result.cluster_size(),
        cluster_size_incl_seed: result.cluster_size() + 1,
        rounds: result.rounds,
        defaulted: &result.defaulted,
    };
    let json = serde_json::to_string_pretty(&output)
        .map_err(|e| CliError::Internal(format!("serializing cascade: {e}")))?;
    println!("{json}");
    Ok(())
}
