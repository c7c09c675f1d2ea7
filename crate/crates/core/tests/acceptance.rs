//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 3 4 9`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qexp_core::experiment::{
    bounds_csv, bounds_table, run_experiment, run_to_files, AuditConfig, CodeSource, DecoderConfig,
    ExperimentConfig, CONFIG_SCHEMA,
};
use qexp_core::graph::{enumerate_connected_sets, sample_biregular, BipartiteGraph, Graph};
use qexp_core::hgp::{adjacency_degree_bound, hypergraph_product, CssCode, Pauli};
use qexp_core::locality::Auditor;
use qexp_core::noise::{sample_iid, NoiseSpec};
use qexp_core::percolation::{
    bound_iid, bound_ls, connected_sets_bound, connected_sets_bound_kd, estimate_maxconn_tail,
    p_iid, p_iid_gap, p_ls, tree_lower_bound_experiment, TreeExperimentSpec,
};
use qexp_core::rng::{self, Tag};
use qexp_core::ssf::{
    beta0, build_flip_catalog, decode_ssf, exhaustive_correction_weight, DecoderParams,
};
use qexp_core::stats::difference_upper;
use qexp_core::{BitSet, Rational};
use rand::Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when a FAIL is the recorded, asserted obstruction rather than a
    /// regression.
    known: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            detail,
            known: false,
        }
    }
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(u32, Duration, Criterion); 12] = [
        (1, Duration::from_secs(60), css_identity),
        (2, Duration::from_secs(60), parameter_formulas),
        (3, Duration::from_secs(1), reference_thresholds),
        (4, Duration::from_secs(1), toric_threshold),
        (5, Duration::from_secs(300), counting_bounds),
        (6, Duration::from_secs(600), exhaustive_small_errors),
        (7, Duration::from_secs(600), locality_suite),
        (8, Duration::from_secs(1800), correction_criterion),
        (9, Duration::from_secs(3600), bound_domination),
        (10, Duration::from_secs(300), branching_lower_bound),
        (11, Duration::from_secs(7200), size_trend),
        (12, Duration::from_secs(600), determinism),
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut regressions = 0;
    for (id, limit, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if elapsed > limit {
            out.pass = false;
            out.known = false;
            out.detail.push_str(&format!("; over time limit {limit:?}"));
        }
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2}: {verdict} [{:.1}s] {}",
            elapsed.as_secs_f64(),
            out.detail
        );
        if !out.pass && !out.known {
            regressions += 1;
        }
    }
    if regressions > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn pair_code() -> CssCode {
    hypergraph_product(
        &BipartiteGraph::from_edges(2, 1, &[(0, 0), (1, 0)]).unwrap(),
        None,
    )
    .unwrap()
}

fn rep3_code() -> CssCode {
    hypergraph_product(
        &BipartiteGraph::from_edges(3, 2, &[(0, 0), (1, 0), (1, 1), (2, 1)]).unwrap(),
        None,
    )
    .unwrap()
}

fn random_code() -> CssCode {
    hypergraph_product(&sample_biregular(8, 6, 3, 4, 11).unwrap(), None).unwrap()
}

fn alg2() -> DecoderParams {
    DecoderParams::alg2(Rational::new(1, 4)).unwrap()
}

/// Random products with `d_A, d_B ∈ {2..6}`, cycling through all 25 pairs.
fn corpus() -> Vec<(usize, usize, CssCode)> {
    (0..100u64)
        .map(|i| {
            let d_a = 2 + (i % 5) as usize;
            let d_b = 2 + (i / 5 % 5) as usize;
            let l = num_integer::lcm(d_a, d_b);
            let mut s = 1 + (i / 25) as usize;
            while l / d_b * s < d_a || l / d_a * s < d_b {
                s += 1;
            }
            let (n_a, n_b) = (l / d_a * s, l / d_b * s);
            let g = sample_biregular(n_a, n_b, d_a, d_b, rng::mix(&[SEED, i])).unwrap();
            (n_a, n_b, hypergraph_product(&g, None).unwrap())
        })
        .collect()
}

fn css_identity() -> Outcome {
    let codes = corpus();
    let bad = codes
        .iter()
        .filter(|(_, _, c)| !c.hx().mul_transpose(c.hz()).unwrap().is_zero())
        .count();
    Outcome::new(
        bad == 0,
        format!(
            "H_X H_Z^T = 0 on {} products, {bad} violations",
            codes.len()
        ),
    )
}

fn parameter_formulas() -> Outcome {
    let codes = corpus();
    let mut bad = 0;
    for (n_a, n_b, c) in &codes {
        let k = c.n() as i64 - c.hx().rank() as i64 - c.hz().rank() as i64;
        let lower = (*n_a as i64 - *n_b as i64).pow(2);
        if c.n() != n_a * n_a + n_b * n_b || c.k() as i64 != k || k < lower {
            bad += 1;
        }
    }
    Outcome::new(
        bad == 0,
        format!(
            "n and k formulas on {} products, {bad} violations",
            codes.len()
        ),
    )
}

fn reference_thresholds() -> Outcome {
    let (_, b0) = beta0(38, 39, Rational::new(1, 38), Rational::new(1, 39), true).unwrap();
    let b0 = qexp_core::rational::to_f64(&b0);
    let alpha = b0 / (1.0 + b0);
    let d = adjacency_degree_bound(38, 39);
    let pls = p_ls(d, alpha).unwrap();
    let gap = p_iid_gap(d, alpha).unwrap();
    let checks = [
        (b0 - 0.386).abs() <= 0.001,
        (alpha - 0.278).abs() <= 0.001,
        d == 4407,
        (pls / 2.70e-16 - 1.0).abs() <= 0.02,
        (-28.0..-26.0).contains(&gap.log10()),
    ];
    Outcome::new(
        checks.iter().all(|&c| c),
        format!("beta0 = {b0:.4}, alpha = {alpha:.4}, d = {d}, p_ls = {pls:.3e}, p_iid - p_ls = {gap:.2e}"),
    )
}

fn toric_threshold() -> Outcome {
    let p = p_iid(8, 0.5, 1e-14).unwrap();
    let rows = bounds_table(&[8], &[0.5], &[1e-4], &[10], 1, None).unwrap();
    let noted = bounds_csv(&rows)
        .lines()
        .any(|l| l.starts_with("# reconstruction:") && l.contains("(8, 1/2)"));
    Outcome::new(
        (p / 8.1e-4 - 1.0).abs() <= 0.05 && noted,
        format!("p_iid(8, 1/2) = {p:.4e}, reconstruction recorded in metadata: {noted}"),
    )
}

fn random_bounded_graph(n: usize, d_max: usize, seed: u64) -> Graph {
    let mut rng = rng::stream(seed, 0, Tag::Graph);
    let mut deg = vec![0usize; n];
    let mut edges = Vec::new();
    for _ in 0..4 * n {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && deg[u] < d_max && deg[v] < d_max && !edges.contains(&(u.min(v), u.max(v))) {
            edges.push((u.min(v), u.max(v)));
            deg[u] += 1;
            deg[v] += 1;
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

fn counting_bounds() -> Outcome {
    let fixtures = [
        ("path", Graph::path(12)),
        ("cycle", Graph::cycle(15)),
        ("triangle", Graph::cycle(3)),
        ("3-regular ring", Graph::circulant(20, &[1, 10]).unwrap()),
        ("random", random_bounded_graph(24, 4, SEED)),
    ];
    let mut violations = 0;
    let mut sets = 0u64;
    for (_, g) in &fixtures {
        let d = g.d_max().max(2);
        let counts = enumerate_connected_sets(g, 8, u64::MAX, |_| {}).unwrap();
        for (i, &count) in counts.iter().enumerate() {
            let s = i + 1;
            let raney = connected_sets_bound(g.n(), d, s).unwrap();
            let kd = connected_sets_bound_kd(g.n(), d, s).unwrap();
            let slack = 1.0 + 1e-9;
            if count as f64 > raney * slack || raney > kd * slack {
                violations += 1;
            }
            sets += count;
        }
    }
    Outcome::new(
        violations == 0,
        format!(
            "{} fixtures, {sets} connected sets with s <= 8, {violations} violations",
            fixtures.len()
        ),
    )
}

/// Two weight-1 errors on `side` with equal syndromes whose sum is a
/// logical operator.
fn distance_two_witness(code: &CssCode, side: Pauli) -> Option<(usize, usize)> {
    let n = code.n();
    let single = |q| BitSet::from_indices(n, [q]);
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .find(|&(a, b)| {
            code.syndrome(side, &single(a)).unwrap() == code.syndrome(side, &single(b)).unwrap()
                && !code.equivalent(side, &single(a), &single(b))
        })
}

fn exhaustive_small_errors() -> Outcome {
    let params = alg2();
    let mut parts = Vec::new();
    let mut pass = true;
    let mut obstruction_only = true;
    for (name, code) in [("[1 1]", pair_code()), ("rep-3", rep3_code())] {
        let mut t_star = usize::MAX;
        let mut violations = 0;
        for side in [Pauli::X, Pauli::Z] {
            let cat = build_flip_catalog(&code, side).unwrap();
            let sweep = exhaustive_correction_weight(&code, &cat, &params, 4, 1 << 24).unwrap();
            t_star = t_star.min(sweep.t_star);
            violations += sweep.flip_bound_violations;
            if sweep.t_star == 0 && distance_two_witness(&code, side).is_none() {
                obstruction_only = false;
            }
        }
        pass &= t_star >= 1 && violations == 0;
        obstruction_only &= violations == 0;
        parts.push(format!(
            "{name} (n = {}): t* = {t_star}, flip-bound violations {violations}",
            code.n()
        ));
    }
    let mut out = Outcome::new(pass, parts.join("; "));
    if !pass && obstruction_only {
        out.known = true;
        out.detail
            .push_str("; [1 1] has distance 2, two single-qubit errors share a syndrome");
    }
    out
}

fn locality_suite() -> Outcome {
    let params = alg2();
    let mut parts = Vec::new();
    let mut failures = 0;
    for (name, code, p) in [
        ("[1 1]", pair_code(), 0.2),
        ("rep-3", rep3_code(), 0.1),
        ("hgp-100", random_code(), 0.04),
    ] {
        let mut runs = 0;
        for (side, tag) in [(Pauli::X, Tag::ErrorX), (Pauli::Z, Tag::ErrorZ)] {
            let cat = build_flip_catalog(&code, side).unwrap();
            let auditor = Auditor::new(&code, &cat);
            for trial in 0..500 {
                let mut r = rng::stream(rng::mix(&[SEED, 7]), trial, tag);
                let e = sample_iid(code.n(), p, &mut r);
                let run =
                    decode_ssf(&code, &cat, &code.syndrome(side, &e).unwrap(), &params).unwrap();
                let ok = match auditor.verify_locality(&e, &run, &params) {
                    Ok(rep) => {
                        rep.pass
                            && rep.support_bound != Some(false)
                            && rep.alpha_subset != Some(false)
                    }
                    Err(_) => false,
                };
                failures += !ok as u32;
                runs += 1;
            }
        }
        parts.push(format!("{name} {runs} runs"));
    }
    Outcome::new(
        failures == 0,
        format!("{}; {failures} failures", parts.join(", ")),
    )
}

fn correction_criterion() -> Outcome {
    let params = alg2();
    let mut parts = Vec::new();
    let mut counterexamples = 0;
    for (name, code, p) in [
        ("rep-3", rep3_code(), 0.1),
        ("hgp-100", random_code(), 0.03),
    ] {
        let t_star = [Pauli::X, Pauli::Z]
            .iter()
            .map(|&side| {
                let cat = build_flip_catalog(&code, side).unwrap();
                exhaustive_correction_weight(&code, &cat, &params, 3, 1 << 24)
                    .unwrap()
                    .t_star
            })
            .min()
            .unwrap();
        let mut applied = 0;
        for (side, tag) in [(Pauli::X, Tag::ErrorX), (Pauli::Z, Tag::ErrorZ)] {
            let cat = build_flip_catalog(&code, side).unwrap();
            let auditor = Auditor::new(&code, &cat);
            for trial in 0..2500 {
                let mut r = rng::stream(rng::mix(&[SEED, 8]), trial, tag);
                let e = sample_iid(code.n(), p, &mut r);
                let o = auditor
                    .verify_correction_criterion(&e, &params, t_star, u64::MAX)
                    .unwrap();
                applied += o.applies as u32;
                counterexamples += !o.holds as u32;
            }
        }
        parts.push(format!(
            "{name} t* = {t_star}, 5000 trials, applies to {applied}"
        ));
    }
    Outcome::new(
        counterexamples == 0,
        format!("{}; {counterexamples} counterexamples", parts.join("; ")),
    )
}

fn bound_domination() -> Outcome {
    let graphs = [
        ("C60", Graph::cycle(60), 3),
        ("C60(1,30)", Graph::circulant(60, &[1, 30]).unwrap(), 3),
        ("C40(1,2)", Graph::circulant(40, &[1, 2]).unwrap(), 4),
    ];
    let alphas = [Rational::new(1, 2), Rational::new(1, 1)];
    let mut points = 0;
    let mut violations = Vec::new();
    for (name, g, d) in &graphs {
        for alpha in alphas {
            let a = qexp_core::rational::to_f64(&alpha);
            let threshold = p_iid(*d, a, 1e-14).unwrap();
            for frac in [0.3, 0.8] {
                let p = frac * threshold;
                for t in [3, 5] {
                    let n = g.n();
                    let seed = rng::mix(&[SEED, 9, points]);
                    let est = estimate_maxconn_tail(
                        g,
                        |r| sample_iid(n, p, r),
                        alpha,
                        t,
                        100_000,
                        t,
                        seed,
                        u64::MAX,
                    )
                    .unwrap();
                    let mut bounds = vec![bound_iid(n, p, *d, a, t).unwrap()];
                    if p < p_ls(*d, a).unwrap() {
                        bounds.push(bound_ls(n, p, *d, a, t).unwrap().bound);
                    }
                    if bounds.iter().any(|&b| est.ci.low > b) {
                        violations.push(format!("{name} alpha={a} p={p:.3e} t={t}"));
                    }
                    points += 1;
                }
            }
        }
    }
    Outcome::new(
        violations.is_empty() && points >= 20,
        format!(
            "{points} grid points x 1e5 trials, violations: {}",
            if violations.is_empty() {
                "none".into()
            } else {
                violations.join(", ")
            }
        ),
    )
}

fn branching_lower_bound() -> Outcome {
    let spec = TreeExperimentSpec {
        d: 3,
        alpha: Rational::new(3, 5),
        c: 2,
        k: 4,
        p: 0.3,
        trials: 200,
        lineages: 100_000,
        seed: SEED,
    };
    let sup = tree_lower_bound_experiment(&spec).unwrap();
    let sub = tree_lower_bound_experiment(&TreeExperimentSpec {
        p: 0.2,
        seed: SEED + 1,
        ..spec
    })
    .unwrap();
    let covered = sup.survival_ci.low <= sup.analytic_survival
        && sup.analytic_survival <= sup.survival_ci.high;
    let sub_zero = sub.survival_ci.low == 0.0;
    Outcome::new(
        sup.ell == 2 && covered && sub_zero,
        format!(
            "l = {}, p = 0.3: analytic {:.4}, simulated {:.4} [{:.4}, {:.4}]; p = 0.2: {} of {} survive",
            sup.ell, sup.analytic_survival, sup.survival_estimate, sup.survival_ci.low, sup.survival_ci.high, sub.survived, sub.lineages
        ),
    )
}

fn trend_config(m: usize, p_grid: Vec<f64>, trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        schema: CONFIG_SCHEMA,
        code: CodeSource::Random {
            n_a: 4 * m,
            n_b: 3 * m,
            d_a: 3,
            d_b: 4,
            graph_seed: 1,
        },
        decoder: DecoderConfig::default(),
        noise: NoiseSpec::Iid,
        p_grid,
        trials,
        threads: None,
        seed,
        audit: None,
    }
}

fn failures(config: &ExperimentConfig) -> Vec<(f64, u64, u64)> {
    let mut rows = Vec::new();
    run_experiment(config, |r| {
        rows.push((r.p, r.either_failures, r.trials));
        Ok(())
    })
    .unwrap();
    rows
}

fn size_trend() -> Outcome {
    let grid = vec![0.001, 0.002, 0.003, 0.004, 0.005];
    let pilot = failures(&trend_config(4, grid, 2_000, rng::mix(&[SEED, 11, 0])));
    let Some(&(p, _, _)) = pilot
        .iter()
        .rev()
        .find(|&&(_, x, n)| (0.01..=0.15).contains(&(x as f64 / n as f64)))
    else {
        return Outcome::new(false, "pilot found no measurable p".into());
    };
    let seed = rng::mix(&[SEED, 11, 1]);
    let (_, x_small, n_small) = failures(&trend_config(4, vec![p], 10_000, seed))[0];
    let (_, x_large, n_large) = failures(&trend_config(9, vec![p], 10_000, seed))[0];
    let upper = difference_upper(x_large, n_large, x_small, n_small, 0.95);
    Outcome::new(
        upper < 0.0,
        format!(
            "p = {p} (pilot), n = 400: {x_small}/{n_small}, n = 2025: {x_large}/{n_large}, 95% upper bound on difference {upper:.4}"
        ),
    )
}

fn determinism() -> Outcome {
    let config = |threads| ExperimentConfig {
        schema: CONFIG_SCHEMA,
        code: CodeSource::Random {
            n_a: 8,
            n_b: 6,
            d_a: 3,
            d_b: 4,
            graph_seed: 2,
        },
        decoder: DecoderConfig::default(),
        noise: NoiseSpec::Iid,
        p_grid: vec![0.01, 0.03, 0.06],
        trials: 400,
        threads: Some(threads),
        seed: SEED,
        audit: Some(AuditConfig { locality_rate: 0.1 }),
    };
    let dir = tempfile::tempdir().unwrap();
    let bodies: Vec<Vec<u8>> = [1, 2, 4, 1]
        .iter()
        .enumerate()
        .map(|(i, &threads)| {
            let out = dir.path().join(i.to_string());
            run_to_files(&config(threads), &out).unwrap();
            std::fs::read(out.join("results.csv")).unwrap()
        })
        .collect();
    let identical = bodies.windows(2).all(|w| w[0] == w[1]);
    Outcome::new(
        identical,
        format!(
            "4 runs at 1/2/4/1 threads, {} CSV bytes each, identical: {identical}",
            bodies[0].len()
        ),
    )
}
