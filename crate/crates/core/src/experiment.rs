//! Seeded Monte Carlo campaigns over hypergraph-product codes and
//! tabulation of percolation thresholds.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{sample_biregular, BipartiteGraph, Graph};
use crate::hgp::{adjacency_graph, hypergraph_product, read_bundle, CssCode, Pauli};
use crate::locality::Auditor;
use crate::noise::{NoiseSpec, Sampler};
use crate::percolation::{self, estimate_maxconn_tail};
use crate::rational::{parse_rational, Rational};
use crate::rng::{self, Tag};
use crate::ssf::{
    build_flip_catalog, check_equivalence, decode_ssf, DecoderParams, FlipCatalog, Mode, ScanMode,
};
use crate::stats::wilson;

pub const CONFIG_SCHEMA: u32 = 1;
pub const RESULTS_SCHEMA: u32 = 1;

/// Where the code comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodeSource {
    /// Random biregular seed graph.
    Random {
        n_a: usize,
        n_b: usize,
        d_a: usize,
        d_b: usize,
        graph_seed: u64,
    },
    /// Directory written by `write_bundle`.
    Bundle { path: PathBuf },
    /// Seed graph in text form.
    SeedFile { path: PathBuf },
}

impl CodeSource {
    pub fn build(&self) -> Result<CssCode> {
        match self {
            CodeSource::Random {
                n_a,
                n_b,
                d_a,
                d_b,
                graph_seed,
            } => hypergraph_product(
                &sample_biregular(*n_a, *n_b, *d_a, *d_b, *graph_seed)?,
                None,
            ),
            CodeSource::Bundle { path } => Ok(read_bundle(path)?.0),
            CodeSource::SeedFile { path } => hypergraph_product(
                &BipartiteGraph::parse_text(&std::fs::read_to_string(path)?)?,
                None,
            ),
        }
    }

    pub fn id(&self) -> String {
        match self {
            CodeSource::Random {
                n_a,
                n_b,
                d_a,
                d_b,
                graph_seed,
            } => {
                format!("hgp-{n_a}x{n_b}-d{d_a}.{d_b}-g{graph_seed}")
            }
            CodeSource::Bundle { path } | CodeSource::SeedFile { path } => path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Rational such as `"1/4"`; required for `Alg2`.
    #[serde(default)]
    pub beta: Option<String>,
    #[serde(default)]
    pub max_flips: Option<usize>,
    /// Only `"canonical"` is supported: larger Δ, then smaller set, then
    /// lower generator and mask.
    #[serde(default = "default_tie_break")]
    pub tie_break: String,
}

fn default_mode() -> Mode {
    Mode::Alg1
}

fn default_tie_break() -> String {
    "canonical".into()
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            mode: Mode::Alg1,
            beta: None,
            max_flips: None,
            tie_break: default_tie_break(),
        }
    }
}

impl DecoderConfig {
    pub fn params(&self) -> Result<DecoderParams> {
        if self.tie_break != "canonical" {
            return Err(Error::InvalidArgument(format!(
                "unknown tie_break {:?}",
                self.tie_break
            )));
        }
        let mut p = match self.mode {
            Mode::Alg1 => DecoderParams::alg1(),
            Mode::Alg2 => {
                let beta = self.beta.as_deref().ok_or_else(|| {
                    Error::InvalidArgument("decoder.beta is required for Alg2".into())
                })?;
                DecoderParams::alg2(parse_rational(beta)?)?
            }
        };
        p.max_flips = self.max_flips;
        p.scan = ScanMode::Incremental;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Fraction of decode runs replayed through the locality audit.
    #[serde(default)]
    pub locality_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub code: CodeSource,
    #[serde(default)]
    pub decoder: DecoderConfig,
    pub noise: NoiseSpec,
    pub p_grid: Vec<f64>,
    pub trials: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub audit: Option<AuditConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Parse(format!(
                "config schema {} is not {CONFIG_SCHEMA}",
                self.schema
            )));
        }
        if self.p_grid.is_empty() {
            return Err(Error::InvalidArgument("p_grid is empty".into()));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!("p = {p} is not in [0, 1]")));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("threads must be positive".into()));
        }
        if let Some(a) = &self.audit {
            if !(0.0..=1.0).contains(&a.locality_rate) {
                return Err(Error::InvalidArgument(
                    "audit.locality_rate is not in [0, 1]".into(),
                ));
            }
        }
        self.decoder.params()?;
        Ok(())
    }
}

/// One grid point of a decoding campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub code_id: String,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub trials: u64,
    pub x_failures: u64,
    pub z_failures: u64,
    pub either_failures: u64,
    /// `either_failures / trials`
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_flips: f64,
    /// Mean `|U|/|E|` over decode runs with a nonempty error.
    pub mean_support_ratio: f64,
    pub seed: u64,
}

pub const CSV_COLUMNS: &str =
    "code_id,n,k,p,trials,x_failures,z_failures,either_failures,rate,ci_low,ci_high,mean_flips,mean_support_ratio,seed";

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.code_id,
            self.n,
            self.k,
            self.p,
            self.trials,
            self.x_failures,
            self.z_failures,
            self.either_failures,
            self.rate,
            self.ci_low,
            self.ci_high,
            self.mean_flips,
            self.mean_support_ratio,
            self.seed
        )
    }
}

/// Timing and audit bookkeeping kept out of the CSV body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMeta {
    pub p: f64,
    pub wall_seconds: f64,
    pub audited_runs: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialOutcome {
    x_fail: bool,
    z_fail: bool,
    flips: u64,
    ratio_sum: f64,
    ratio_count: u64,
    audited: u64,
}

/// Decoding state shared by all trials of one campaign.
pub struct Campaign {
    pub config: ExperimentConfig,
    pub code: CssCode,
    pub code_id: String,
    params: DecoderParams,
    catalogs: [FlipCatalog; 2],
    graph: Graph,
}

impl Campaign {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let code = config.code.build()?;
        let params = config.decoder.params()?;
        let catalogs = [
            build_flip_catalog(&code, Pauli::X)?,
            build_flip_catalog(&code, Pauli::Z)?,
        ];
        let graph = adjacency_graph(&code);
        Ok(Campaign {
            code_id: config.code.id(),
            config,
            code,
            params,
            catalogs,
            graph,
        })
    }

    fn decode_side(
        &self,
        side: Pauli,
        e: &BitSet,
        auditor: Option<&Auditor>,
    ) -> Result<(bool, u64, Option<f64>, u64)> {
        let catalog = &self.catalogs[side as usize];
        let sigma = self.code.syndrome(side, e)?;
        let run = decode_ssf(&self.code, catalog, &sigma, &self.params)?;
        let ok = run.converged() && check_equivalence(&self.code, e, &run.estimate, side);
        let ratio = (!e.is_empty()).then(|| run.support(Some(e)).count() as f64 / e.count() as f64);
        let mut audited = 0;
        if let Some(a) = auditor {
            let report = a.verify_locality(e, &run, &self.params)?;
            if !report.pass {
                return Err(Error::InvariantViolation("locality audit failed".into()));
            }
            audited = 1;
        }
        Ok((!ok, run.flip_count() as u64, ratio, audited))
    }

    fn trial(
        &self,
        sampler: &Sampler,
        point_seed: u64,
        i: u64,
        auditors: &[Option<Auditor>; 2],
    ) -> Result<TrialOutcome> {
        let mut out = TrialOutcome::default();
        let rate = self.config.audit.as_ref().map_or(0.0, |a| a.locality_rate);
        let mut probe = rng::stream(point_seed, i, Tag::Audit);
        for (side, tag) in [(Pauli::X, Tag::ErrorX), (Pauli::Z, Tag::ErrorZ)] {
            let mut r = rng::stream(point_seed, i, tag);
            let e = sampler.sample(&mut r);
            let audit = if rate > 0.0 && rand::Rng::gen_bool(&mut probe, rate) {
                auditors[side as usize].as_ref()
            } else {
                None
            };
            let (fail, flips, ratio, audited) = self
                .decode_side(side, &e, audit)
                .map_err(|err| annotate(err, self.code_id.as_str(), i))?;
            match side {
                Pauli::X => out.x_fail = fail,
                Pauli::Z => out.z_fail = fail,
            }
            out.flips += flips;
            if let Some(v) = ratio {
                out.ratio_sum += v;
                out.ratio_count += 1;
            }
            out.audited += audited;
        }
        Ok(out)
    }

    /// Runs one grid point. Trials are statically indexed, so the result
    /// does not depend on the worker count.
    pub fn run_point(&self, point: usize) -> Result<(ResultRow, PointMeta)> {
        let p = self.config.p_grid[point];
        let start = Instant::now();
        let sampler = self.config.noise.sampler(&self.graph, p)?;
        let point_seed = rng::mix(&[self.config.seed, point as u64]);
        let rate = self.config.audit.as_ref().map_or(0.0, |a| a.locality_rate);
        let auditors: [Option<Auditor>; 2] = if rate > 0.0 {
            [
                Some(Auditor::new(&self.code, &self.catalogs[0])),
                Some(Auditor::new(&self.code, &self.catalogs[1])),
            ]
        } else {
            [None, None]
        };
        let outcomes: Vec<TrialOutcome> = (0..self.config.trials)
            .into_par_iter()
            .map(|i| self.trial(&sampler, point_seed, i, &auditors))
            .collect::<Result<_>>()?;
        let trials = self.config.trials;
        let x_failures = outcomes.iter().filter(|o| o.x_fail).count() as u64;
        let z_failures = outcomes.iter().filter(|o| o.z_fail).count() as u64;
        let either_failures = outcomes.iter().filter(|o| o.x_fail || o.z_fail).count() as u64;
        debug_assert!(either_failures <= x_failures + z_failures);
        let flips: u64 = outcomes.iter().map(|o| o.flips).sum();
        let ratio_sum: f64 = outcomes.iter().map(|o| o.ratio_sum).sum();
        let ratio_count: u64 = outcomes.iter().map(|o| o.ratio_count).sum();
        let ci = wilson(either_failures, trials, 0.95);
        let row = ResultRow {
            code_id: self.code_id.clone(),
            n: self.code.n(),
            k: self.code.k(),
            p,
            trials,
            x_failures,
            z_failures,
            either_failures,
            rate: if trials == 0 {
                0.0
            } else {
                either_failures as f64 / trials as f64
            },
            ci_low: ci.low,
            ci_high: ci.high,
            mean_flips: if trials == 0 {
                0.0
            } else {
                flips as f64 / trials as f64
            },
            mean_support_ratio: if ratio_count == 0 {
                0.0
            } else {
                ratio_sum / ratio_count as f64
            },
            seed: self.config.seed,
        };
        let meta = PointMeta {
            p,
            wall_seconds: start.elapsed().as_secs_f64(),
            audited_runs: outcomes.iter().map(|o| o.audited).sum(),
        };
        Ok((row, meta))
    }
}

fn annotate(err: Error, code_id: &str, trial: u64) -> Error {
    match err {
        Error::InvariantViolation(m) => {
            Error::InvariantViolation(format!("{code_id} trial {trial}: {m}"))
        }
        other => other,
    }
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Runs every grid point in order, handing each row to `sink` as soon as
/// it is complete.
pub fn run_experiment<F>(config: &ExperimentConfig, mut sink: F) -> Result<Vec<PointMeta>>
where
    F: FnMut(&ResultRow) -> Result<()>,
{
    let pool = thread_pool(config.threads)?;
    let campaign = Campaign::new(config.clone())?;
    let mut metas = Vec::new();
    for point in 0..config.p_grid.len() {
        let (row, meta) = pool.install(|| campaign.run_point(point))?;
        sink(&row)?;
        metas.push(meta);
    }
    Ok(metas)
}

/// CSV header comment and column line.
pub fn csv_header() -> String {
    format!("# qexp results schema={RESULTS_SCHEMA} columns={CSV_COLUMNS}\n{CSV_COLUMNS}\n")
}

pub fn csv_footer(rows: usize) -> String {
    format!("# complete rows={rows}\n")
}

/// True when a results file carries its finalization footer.
pub fn csv_is_complete(text: &str) -> bool {
    text.lines()
        .last()
        .is_some_and(|l| l.starts_with("# complete rows="))
}

/// Provenance written next to a results file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub config: ExperimentConfig,
    pub code_id: String,
    pub n: usize,
    pub k: usize,
    pub points: Vec<PointMeta>,
    pub total_seconds: f64,
    pub version: String,
}

/// Runs `config`, writing `results.csv` incrementally and `results.json`
/// at the end.
pub fn run_to_files(
    config: &ExperimentConfig,
    out_dir: &std::path::Path,
) -> Result<(Vec<ResultRow>, Sidecar)> {
    std::fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let mut csv = std::fs::File::create(out_dir.join("results.csv"))?;
    csv.write_all(csv_header().as_bytes())?;
    let mut rows = Vec::new();
    let metas = run_experiment(config, |row| {
        writeln!(csv, "{}", row.to_csv())?;
        csv.flush()?;
        rows.push(row.clone());
        Ok(())
    })?;
    csv.write_all(csv_footer(rows.len()).as_bytes())?;
    let (n, k) = rows.first().map_or((0, 0), |r| (r.n, r.k));
    let sidecar = Sidecar {
        config: config.clone(),
        code_id: config.code.id(),
        n,
        k,
        points: metas,
        total_seconds: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    std::fs::write(
        out_dir.join("results.json"),
        serde_json::to_string_pretty(&sidecar)? + "\n",
    )?;
    Ok((rows, sidecar))
}

/// One row of the threshold table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub d: usize,
    pub alpha: f64,
    pub t: usize,
    pub p: f64,
    pub p_ls: Option<f64>,
    pub p_iid: Option<f64>,
    /// `Err` carries the error tag written in place of the value.
    pub bound_ls: std::result::Result<f64, String>,
    pub bound_iid: std::result::Result<f64, String>,
    pub empirical: Option<EmpiricalTail>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

pub const BOUNDS_COLUMNS: &str =
    "d,alpha,t,p,p_ls,p_iid,bound_ls,bound_iid,empirical,ci_low,ci_high,trials,seed";

/// `(d, α)` pairs whose table rows are annotated as reconstructions.
pub const RECONSTRUCTED_PAIRS: &[(usize, f64, &str)] = &[(
    8,
    0.5,
    "(d, alpha) = (8, 1/2) is the assumed setting of the toric-code i.i.d. threshold 8.1e-4",
)];

/// Graph and sampling budget for the empirical columns.
pub struct EmpiricalSpec<'g> {
    pub graph: &'g Graph,
    pub trials: u64,
    pub size_cap: usize,
    pub seed: u64,
}

fn tag(e: &Error) -> String {
    e.kind().to_string()
}

/// Evaluates both thresholds and tail bounds on the grid; the empirical
/// columns use i.i.d. noise on `empirical.graph` with `|V|` taken from it.
pub fn bounds_table(
    ds: &[usize],
    alphas: &[f64],
    ps: &[f64],
    ts: &[usize],
    n_vertices: usize,
    empirical: Option<&EmpiricalSpec>,
) -> Result<Vec<BoundsRow>> {
    if ds.is_empty() || alphas.is_empty() || ps.is_empty() || ts.is_empty() {
        return Err(Error::InvalidArgument(
            "bounds grids must be nonempty".into(),
        ));
    }
    let nv = empirical.map_or(n_vertices, |e| e.graph.n());
    let mut rows = Vec::new();
    for &d in ds {
        for &alpha in alphas {
            let p_ls = percolation::p_ls(d, alpha).ok();
            let p_iid = percolation::p_iid(d, alpha, 1e-12).ok();
            for &t in ts {
                for &p in ps {
                    let bound_ls = percolation::bound_ls(nv, p, d, alpha, t)
                        .map(|b| b.bound)
                        .map_err(|e| tag(&e));
                    let bound_iid = percolation::bound_iid(nv, p, d, alpha, t).map_err(|e| tag(&e));
                    let empirical = match empirical {
                        Some(spec) => {
                            let a = Rational::approximate_float(alpha).ok_or_else(|| {
                                Error::InvalidArgument(format!(
                                    "alpha {alpha} is not representable"
                                ))
                            })?;
                            let seed = rng::mix(&[
                                spec.seed,
                                d as u64,
                                alpha.to_bits(),
                                t as u64,
                                p.to_bits(),
                            ]);
                            let n = spec.graph.n();
                            let est = estimate_maxconn_tail(
                                spec.graph,
                                |r| crate::noise::sample_iid(n, p, r),
                                a,
                                t,
                                spec.trials,
                                spec.size_cap.max(t),
                                seed,
                                crate::graph::DEFAULT_ENUMERATION_BUDGET,
                            )?;
                            Some(EmpiricalTail {
                                estimate: est.estimate,
                                ci_low: est.ci.low,
                                ci_high: est.ci.high,
                                trials: est.trials,
                                seed,
                            })
                        }
                        None => None,
                    };
                    rows.push(BoundsRow {
                        d,
                        alpha,
                        t,
                        p,
                        p_ls,
                        p_iid,
                        bound_ls,
                        bound_iid,
                        empirical,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// CSV rendering of [`bounds_table`] with metadata comments.
pub fn bounds_csv(rows: &[BoundsRow]) -> String {
    let mut out = format!("# qexp bounds schema={RESULTS_SCHEMA}\n");
    for &(d, a, note) in RECONSTRUCTED_PAIRS {
        if rows.iter().any(|r| r.d == d && r.alpha == a) {
            out.push_str(&format!("# reconstruction: {note}\n"));
        }
    }
    out.push_str(BOUNDS_COLUMNS);
    out.push('\n');
    let opt = |v: Option<f64>| v.map_or_else(|| "DomainError".to_string(), |x| format!("{x:e}"));
    let res = |v: &std::result::Result<f64, String>| match v {
        Ok(x) => format!("{x:e}"),
        Err(t) => t.clone(),
    };
    for r in rows {
        let (emp, lo, hi, trials, seed) = match &r.empirical {
            Some(e) => (
                e.estimate.to_string(),
                e.ci_low.to_string(),
                e.ci_high.to_string(),
                e.trials.to_string(),
                e.seed.to_string(),
            ),
            None => Default::default(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.d,
            r.alpha,
            r.t,
            r.p,
            opt(r.p_ls),
            opt(r.p_iid),
            res(&r.bound_ls),
            res(&r.bound_iid),
            emp,
            lo,
            hi,
            trials,
            seed
        ));
    }
    out
}
