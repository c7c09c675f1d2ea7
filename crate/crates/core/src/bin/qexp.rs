use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qexp_core::experiment::{self, bounds_csv, bounds_table, EmpiricalSpec, ExperimentConfig};
use qexp_core::graph::{
    enumerate_connected_sets, sample_biregular, BipartiteGraph, Graph, DEFAULT_ENUMERATION_BUDGET,
};
use qexp_core::hgp::{code_params, hypergraph_product, read_bundle, write_bundle, CssCode, Pauli};
use qexp_core::locality::Auditor;
use qexp_core::noise::sample_iid;
use qexp_core::percolation::{
    self, estimate_maxconn_tail, tree_lower_bound_experiment, TreeExperimentSpec,
};
use qexp_core::rational::{parse_rational, to_f64};
use qexp_core::rng::{self, Tag};
use qexp_core::ssf::{build_flip_catalog, check_equivalence, decode_ssf, DecoderParams, Mode};
use qexp_core::{BitSet, Error, Rational, Result};

#[derive(Parser)]
#[command(name = "qexp", version, about = "Quantum expander code experiments")]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build a hypergraph-product code and write a bundle.
    BuildCode(BuildArgs),
    /// Decode one syndrome or error with the small-set-flip decoder.
    Decode(DecodeArgs),
    /// Run a Monte Carlo campaign from --config.
    Simulate,
    /// MaxConn tail estimation or the tree experiment.
    Percolation(PercolationArgs),
    /// Threshold and tail-bound table.
    Bounds(BoundsArgs),
    /// Decode random errors and replay each run component by component.
    AuditLocality(AuditArgs),
    /// Count connected vertex sets by size.
    CountConnected(CountArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Seed graph file; otherwise a random biregular graph is sampled.
    #[arg(long)]
    seed_graph: Option<PathBuf>,
    #[arg(long)]
    n_a: Option<usize>,
    #[arg(long)]
    n_b: Option<usize>,
    #[arg(long)]
    d_a: Option<usize>,
    #[arg(long)]
    d_b: Option<usize>,
    /// Also search for the minimum distance up to this budget.
    #[arg(long)]
    distance_budget: Option<u64>,
}

#[derive(Args, Clone)]
struct DecoderArgs {
    #[arg(long, value_parser = parse_mode, default_value = "alg1")]
    mode: Mode,
    /// β for alg2, e.g. 1/4.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    max_flips: Option<usize>,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    match s.to_ascii_lowercase().as_str() {
        "alg1" => Ok(Mode::Alg1),
        "alg2" => Ok(Mode::Alg2),
        _ => Err(format!("unknown mode {s:?} (alg1|alg2)")),
    }
}

fn parse_side(s: &str) -> std::result::Result<Pauli, String> {
    match s.to_ascii_lowercase().as_str() {
        "x" => Ok(Pauli::X),
        "z" => Ok(Pauli::Z),
        _ => Err(format!("unknown side {s:?} (x|z)")),
    }
}

impl DecoderArgs {
    fn params(&self) -> Result<DecoderParams> {
        let mut p = match self.mode {
            Mode::Alg1 => DecoderParams::alg1(),
            Mode::Alg2 => {
                let beta = self.beta.as_deref().ok_or_else(|| {
                    Error::InvalidArgument("--beta is required with --mode alg2".into())
                })?;
                DecoderParams::alg2(parse_rational(beta)?)?
            }
        };
        p.max_flips = self.max_flips;
        Ok(p)
    }
}

#[derive(Args)]
struct DecodeArgs {
    /// Code bundle directory.
    #[arg(long)]
    code: PathBuf,
    #[arg(long, value_parser = parse_side, default_value = "x")]
    side: Pauli,
    /// File holding the syndrome as a 0/1 string.
    #[arg(long, conflicts_with = "error")]
    syndrome: Option<PathBuf>,
    /// File holding the error as a 0/1 string.
    #[arg(long)]
    error: Option<PathBuf>,
    #[command(flatten)]
    decoder: DecoderArgs,
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file ("GRAPH n" format).
    #[arg(long, conflicts_with = "cycle")]
    graph: Option<PathBuf>,
    /// Use the n-vertex cycle.
    #[arg(long)]
    cycle: Option<usize>,
}

impl GraphArgs {
    fn load(&self) -> Result<Option<Graph>> {
        match (&self.graph, self.cycle) {
            (Some(path), _) => Ok(Some(Graph::parse_text(&std::fs::read_to_string(path)?)?)),
            (None, Some(n)) => {
                if n < 3 {
                    return Err(Error::InvalidArgument(
                        "--cycle needs at least 3 vertices".into(),
                    ));
                }
                Ok(Some(Graph::cycle(n)))
            }
            (None, None) => Ok(None),
        }
    }
}

#[derive(Args)]
struct PercolationArgs {
    #[command(subcommand)]
    mode: PercolationMode,
}

#[derive(Subcommand)]
enum PercolationMode {
    /// Estimate P(MaxConn_α ≥ t) under i.i.d. noise.
    Tail(TailArgs),
    /// Complete-tree construction and branching-process survival.
    Tree(TreeArgs),
}

#[derive(Args)]
struct TailArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value = "1")]
    alpha: String,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Size cap for the exact MaxConn search (defaults to 2t).
    #[arg(long)]
    cap: Option<usize>,
    /// Degree bound for the closed-form columns (defaults to the graph's).
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    alpha: String,
    #[arg(long, default_value_t = 2)]
    c: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 100_000)]
    lineages: u64,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<usize>,
    /// |V| used in the tail bounds when no graph is given.
    #[arg(long, default_value_t = 1)]
    n_vertices: usize,
    #[command(flatten)]
    graph: GraphArgs,
    /// Monte Carlo trials for the empirical columns (needs a graph).
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long, value_parser = parse_side, default_value = "x")]
    side: Pauli,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Also check the MaxConn correction criterion at this t (alg2 only).
    #[arg(long)]
    criterion_t: Option<usize>,
    #[command(flatten)]
    decoder: DecoderArgs,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    s_max: usize,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u64,
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| Error::InvalidArgument("--seed is required".into()))
}

fn read_bits(path: &Path, len: usize) -> Result<BitSet> {
    let text = std::fs::read_to_string(path)?;
    let bits: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if bits.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "{} holds {} bits, expected {len}",
            path.display(),
            bits.len()
        )));
    }
    let mut out = BitSet::new(len);
    for (i, c) in bits.into_iter().enumerate() {
        match c {
            '0' => {}
            '1' => out.insert(i),
            _ => {
                return Err(Error::Parse(format!(
                    "unexpected character {c:?} in {}",
                    path.display()
                )))
            }
        }
    }
    Ok(out)
}

fn bits_string(b: &BitSet) -> String {
    (0..b.len())
        .map(|i| if b.contains(i) { '1' } else { '0' })
        .collect()
}

fn emit(cli: &Cli, name: &str, value: &serde_json::Value, csv: Option<String>) -> Result<()> {
    let text = match (cli.format, csv) {
        (Format::Csv, Some(c)) => c,
        _ => serde_json::to_string_pretty(value)? + "\n",
    };
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let ext = if text.starts_with('{') || text.starts_with('[') {
                "json"
            } else {
                "csv"
            };
            std::fs::write(dir.join(format!("{name}.{ext}")), &text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn load_code(dir: &Path) -> Result<CssCode> {
    Ok(read_bundle(dir)?.0)
}

fn build_code(cli: &Cli, a: &BuildArgs) -> Result<()> {
    let out = cli
        .out
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--out is required for build-code".into()))?;
    let (seed_graph, build_seed) = match &a.seed_graph {
        Some(path) => (
            BipartiteGraph::parse_text(&std::fs::read_to_string(path)?)?,
            None,
        ),
        None => {
            let missing = || {
                Error::InvalidArgument("give --seed-graph or all of --n-a --n-b --d-a --d-b".into())
            };
            let seed = require_seed(cli.seed)?;
            let g = sample_biregular(
                a.n_a.ok_or_else(missing)?,
                a.n_b.ok_or_else(missing)?,
                a.d_a.ok_or_else(missing)?,
                a.d_b.ok_or_else(missing)?,
                seed,
            )?;
            (g, Some(seed))
        }
    };
    let code = hypergraph_product(&seed_graph, None)?;
    let manifest = write_bundle(out, &code, build_seed)?;
    let mut value = serde_json::to_value(&manifest)?;
    if let Some(budget) = a.distance_budget {
        let half = Rational::new(1, 2);
        let params = code_params(&code, half, half, Rational::new(1, 4), budget)?;
        value["params"] = serde_json::to_value(params)?;
    }
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn decode(cli: &Cli, a: &DecodeArgs) -> Result<()> {
    let code = load_code(&a.code)?;
    let params = a.decoder.params()?;
    let catalog = build_flip_catalog(&code, a.side)?;
    let (sigma, error) = match (&a.syndrome, &a.error) {
        (Some(s), _) => (read_bits(s, code.n_checks(a.side))?, None),
        (None, Some(e)) => {
            let e = read_bits(e, code.n())?;
            (code.syndrome(a.side, &e)?, Some(e))
        }
        (None, None) => return Err(Error::InvalidArgument("give --syndrome or --error".into())),
    };
    let run = decode_ssf(&code, &catalog, &sigma, &params)?;
    let mut value = json!({
        "side": a.side,
        "termination": run.termination,
        "flips": run.flips,
        "weights": run.weights,
        "estimate": bits_string(&run.estimate),
        "residual_weight": run.residual.count(),
    });
    if let Some(e) = &error {
        value["corrected"] =
            json!(run.converged() && check_equivalence(&code, e, &run.estimate, a.side));
        let report = Auditor::new(&code, &catalog).verify_locality(e, &run, &params)?;
        value["locality"] = serde_json::to_value(report)?;
    }
    emit(cli, "decode", &value, None)
}

fn simulate(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("simulate needs --config".into()))?;
    let mut config = ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?;
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    config.validate()?;
    match &cli.out {
        Some(dir) => {
            let (rows, sidecar) = experiment::run_to_files(&config, dir)?;
            eprintln!("{} rows in {:.2}s", rows.len(), sidecar.total_seconds);
        }
        None => {
            print!("{}", experiment::csv_header());
            let mut n = 0;
            experiment::run_experiment(&config, |row| {
                println!("{}", row.to_csv());
                n += 1;
                Ok(())
            })?;
            print!("{}", experiment::csv_footer(n));
        }
    }
    Ok(())
}

fn parse_alpha(s: &str) -> Result<Rational> {
    let a = parse_rational(s)?;
    if !qexp_core::rational::in_open_unit(&a) && a != Rational::from_integer(1) {
        return Err(Error::Domain(format!("alpha = {a} is not in (0, 1]")));
    }
    Ok(a)
}

fn percolation_cmd(cli: &Cli, a: &PercolationArgs) -> Result<()> {
    let seed = require_seed(cli.seed)?;
    match &a.mode {
        PercolationMode::Tail(t) => {
            let g = t
                .graph
                .load()?
                .ok_or_else(|| Error::InvalidArgument("give --graph or --cycle".into()))?;
            let alpha = parse_alpha(&t.alpha)?;
            let cap = t.cap.unwrap_or(2 * t.t).max(t.t);
            let n = g.n();
            let est = estimate_maxconn_tail(
                &g,
                |r| sample_iid(n, t.p, r),
                alpha,
                t.t,
                t.trials,
                cap,
                seed,
                DEFAULT_ENUMERATION_BUDGET,
            )?;
            let d = t.d.unwrap_or(g.d_max().max(3));
            let af = to_f64(&alpha);
            let mut value = json!({
                "n": n, "d": d, "alpha": af, "p": t.p, "t": t.t, "trials": t.trials, "seed": seed,
                "hits": est.hits, "cap_hits": est.cap_hits, "estimate": est.estimate,
                "ci_low": est.ci.low, "ci_high": est.ci.high,
                "bound_ls": percolation::bound_ls(n, t.p, d, af, t.t).map(|b| b.bound).ok(),
                "bound_iid": percolation::bound_iid(n, t.p, d, af, t.t).ok(),
            });
            let is_cycle = t.graph.cycle.is_some()
                || (g.d_max() == 2 && g.edge_count() == n && g.is_connected_set(&BitSet::full(n)));
            if is_cycle && alpha == Rational::from_integer(1) {
                value["exact"] = json!(percolation::cycle_run_tail(n, t.p, t.t)?);
            }
            emit(cli, "percolation", &value, None)
        }
        PercolationMode::Tree(t) => {
            let spec = TreeExperimentSpec {
                d: t.d,
                alpha: parse_alpha(&t.alpha)?,
                c: t.c,
                k: t.k,
                p: t.p,
                trials: t.trials,
                lineages: t.lineages,
                seed,
            };
            let report = tree_lower_bound_experiment(&spec)?;
            emit(cli, "tree", &serde_json::to_value(report)?, None)
        }
    }
}

fn bounds_cmd(cli: &Cli, a: &BoundsArgs) -> Result<()> {
    let g = a.graph.load()?;
    let spec;
    let empirical = match (&g, a.trials) {
        (Some(g), trials) if trials > 0 => {
            spec = EmpiricalSpec {
                graph: g,
                trials,
                size_cap: a.cap.unwrap_or(0),
                seed: require_seed(cli.seed)?,
            };
            Some(&spec)
        }
        (None, trials) if trials > 0 => {
            return Err(Error::InvalidArgument(
                "--trials needs --graph or --cycle".into(),
            ))
        }
        _ => None,
    };
    let rows = bounds_table(&a.d, &a.alpha, &a.p, &a.t, a.n_vertices, empirical)?;
    let notes: Vec<&str> = experiment::RECONSTRUCTED_PAIRS
        .iter()
        .filter(|(d, al, _)| rows.iter().any(|r| r.d == *d && r.alpha == *al))
        .map(|x| x.2)
        .collect();
    let value = json!({ "rows": rows, "notes": notes });
    emit(cli, "bounds", &value, Some(bounds_csv(&rows)))
}

fn audit_cmd(cli: &Cli, a: &AuditArgs) -> Result<()> {
    let seed = require_seed(cli.seed)?;
    let code = load_code(&a.code)?;
    let params = a.decoder.params()?;
    let catalog = build_flip_catalog(&code, a.side)?;
    let auditor = Auditor::new(&code, &catalog);
    let tag = match a.side {
        Pauli::X => Tag::ErrorX,
        Pauli::Z => Tag::ErrorZ,
    };
    let (mut components, mut fresh_identical, mut corrected) = (0usize, 0usize, 0u64);
    let (mut criterion_applied, mut criterion_failures) = (0u64, 0u64);
    for i in 0..a.trials {
        let mut r = rng::stream(seed, i, tag);
        let e = sample_iid(code.n(), a.p, &mut r);
        let run = decode_ssf(&code, &catalog, &code.syndrome(a.side, &e)?, &params)?;
        let report = auditor.verify_locality(&e, &run, &params)?;
        if !report.pass {
            return Err(Error::InvariantViolation(format!(
                "locality audit failed on trial {i}"
            )));
        }
        components += report.components.len();
        fresh_identical += report
            .components
            .iter()
            .filter(|c| c.fresh_run_identical)
            .count();
        corrected +=
            (run.converged() && check_equivalence(&code, &e, &run.estimate, a.side)) as u64;
        if let Some(t) = a.criterion_t {
            let out =
                auditor.verify_correction_criterion(&e, &params, t, DEFAULT_ENUMERATION_BUDGET)?;
            criterion_applied += out.applies as u64;
            criterion_failures += (!out.holds) as u64;
        }
    }
    let value = json!({
        "side": a.side, "p": a.p, "trials": a.trials, "seed": seed,
        "components": components, "fresh_run_identical": fresh_identical,
        "corrected": corrected,
        "criterion_t": a.criterion_t, "criterion_applied": criterion_applied,
        "criterion_failures": criterion_failures,
        "pass": criterion_failures == 0,
    });
    emit(cli, "audit", &value, None)?;
    if criterion_failures > 0 {
        return Err(Error::InvariantViolation(format!(
            "{criterion_failures} correction-criterion counterexamples"
        )));
    }
    Ok(())
}

fn count_cmd(cli: &Cli, a: &CountArgs) -> Result<()> {
    let g = a
        .graph
        .load()?
        .ok_or_else(|| Error::InvalidArgument("give --graph or --cycle".into()))?;
    let counts = enumerate_connected_sets(&g, a.s_max, a.budget, |_| {})?;
    let d = g.d_max().max(2);
    let mut rows = Vec::new();
    let mut csv = String::from("s,count,raney_bound,kd_bound\n");
    for (i, &c) in counts.iter().enumerate() {
        let s = i + 1;
        let raney = percolation::connected_sets_bound(g.n(), d, s)?;
        let kd = percolation::connected_sets_bound_kd(g.n(), d, s)?;
        csv.push_str(&format!("{s},{c},{raney:e},{kd:e}\n"));
        rows.push(json!({ "s": s, "count": c, "raney_bound": raney, "kd_bound": kd }));
    }
    emit(
        cli,
        "connected",
        &json!({ "n": g.n(), "d": d, "rows": rows }),
        Some(csv),
    )
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::InvalidArgument("--threads must be positive".into()));
        }
        // a second initialisation only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match &cli.command {
        Command::BuildCode(a) => build_code(cli, a),
        Command::Decode(a) => decode(cli, a),
        Command::Simulate => simulate(cli),
        Command::Percolation(a) => percolation_cmd(cli, a),
        Command::Bounds(a) => bounds_cmd(cli, a),
        Command::AuditLocality(a) => audit_cmd(cli, a),
        Command::CountConnected(a) => count_cmd(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
