//! α-percolation: exact and sampled `MaxConn_α`, threshold formulas, tail
//! bounds and the complete-tree lower-bound experiment.
//!
//! All closed forms are evaluated through logarithms; `K(d)` and `p_ls`
//! reach 10⁻¹⁶ and below for the degrees of interest.

use std::f64::consts::LN_2;

use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{
    complete_tree_size, ConnectedSetSearch, Graph, Visit, DEFAULT_ENUMERATION_BUDGET,
    DEFAULT_TREE_CAP,
};
use crate::rational::{to_f64, Rational};
use crate::rng::{self, StreamRng, Tag};
use crate::stats::{wilson, Interval};

fn domain(msg: String) -> Error {
    Error::Domain(msg)
}

fn check_prob(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(domain(format!("{name} = {x} is not in [0, 1]")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("alpha = {alpha} is not in (0, 1]")));
    }
    Ok(())
}

fn check_degree(d: usize) -> Result<()> {
    if d < 3 {
        return Err(domain(format!("degree bound d = {d} must be at least 3")));
    }
    Ok(())
}

/// `x log₂ x` with the continuous extension `0 log 0 = 0`.
fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy `h(x)` in bits.
pub fn entropy(x: f64) -> Result<f64> {
    check_prob("x", x)?;
    Ok(-xlog2x(x) - xlog2x(1.0 - x))
}

/// Binary relative entropy `D(a ‖ p)` in bits.
pub fn kl(a: f64, p: f64) -> Result<f64> {
    check_prob("a", a)?;
    check_prob("p", p)?;
    let term = |x: f64, y: f64| -> Result<f64> {
        if x == 0.0 {
            Ok(0.0)
        } else if y == 0.0 {
            Err(domain(format!("D({a} ‖ {p}) is infinite")))
        } else {
            Ok(x * (x / y).log2())
        }
    };
    Ok(term(a, p)? + term(1.0 - a, 1.0 - p)?)
}

/// `K(d) = (d−1)(1 + 1/(d−2))^{d−2}`, with `K(2) = 1` as the limit.
pub fn k_d(d: usize) -> Result<f64> {
    Ok(ln_k_d(d)?.exp())
}

fn ln_k_d(d: usize) -> Result<f64> {
    match d {
        0 | 1 => Err(domain(format!("degree bound d = {d} must be at least 2"))),
        2 => Ok(0.0),
        _ => {
            let m = (d - 2) as f64;
            Ok(((d - 1) as f64).ln() + m * (1.0 / m).ln_1p())
        }
    }
}

/// `2^{n h(k/n)}`, an upper bound on `C(n, k)`.
pub fn binom_entropy_bound(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(domain(format!("k = {k} exceeds n = {n}")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    Ok((n as f64 * entropy(k as f64 / n as f64)?).exp2())
}

/// `2^{−s D(k/s ‖ p)}`, an upper bound on `P(Bin(s, p) ≥ k)` for `k ≥ sp`.
pub fn chernoff_tail(s: u64, k: u64, p: f64) -> Result<f64> {
    check_prob("p", p)?;
    if s == 0 || k > s {
        return Err(domain(format!(
            "need 0 < s and k ≤ s, got s = {s}, k = {k}"
        )));
    }
    if (k as f64) < s as f64 * p {
        return Err(domain(format!(
            "k = {k} is below the mean s·p = {}",
            s as f64 * p
        )));
    }
    let a = k as f64 / s as f64;
    if p == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    Ok((-(s as f64) * kl(a, p)?).exp2())
}

/// Derived constants for a degree bound `d` and density `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercParams {
    pub alpha: f64,
    pub d: usize,
    pub h: f64,
    pub k_d: f64,
    pub p_ls: f64,
}

impl PercParams {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        Ok(PercParams {
            alpha,
            d,
            h: entropy(alpha)?,
            k_d: k_d(d)?,
            p_ls: p_ls(d, alpha)?,
        })
    }

    pub fn p_iid(&self) -> Result<f64> {
        p_iid(self.d, self.alpha, 1e-12)
    }
}

fn ln_p_ls(d: usize, alpha: f64) -> Result<f64> {
    check_degree(d)?;
    check_alpha(alpha)?;
    Ok(-(entropy(alpha)? * LN_2 + ln_k_d(d)?) / alpha)
}

/// Local-stochastic threshold `(2^{−h(α)} / K(d))^{1/α}`.
pub fn p_ls(d: usize, alpha: f64) -> Result<f64> {
    Ok(ln_p_ls(d, alpha)?.exp())
}

/// Tail bound for local stochastic noise, `C |V| (p/p_ls)^{αt}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsBound {
    pub bound: f64,
    pub c: f64,
}

pub fn bound_ls(n_vertices: usize, p: f64, d: usize, alpha: f64, t: usize) -> Result<LsBound> {
    check_prob("p", p)?;
    let ln_pls = ln_p_ls(d, alpha)?;
    if p == 0.0 {
        let c = 1.0;
        return Ok(LsBound { bound: 0.0, c });
    }
    let ln_ratio = p.ln() - ln_pls;
    if ln_ratio >= 0.0 {
        return Err(domain(format!(
            "p = {p:e} is not below p_ls = {:e}",
            ln_pls.exp()
        )));
    }
    let h = entropy(alpha)?;
    let a = (h / alpha * LN_2 + p.ln()).exp();
    let inv_c = (1.0 - a) * -(alpha * ln_ratio).exp_m1();
    if inv_c <= 0.0 {
        return Err(domain(format!("prefactor C undefined at p = {p:e}")));
    }
    let ln_bound = -inv_c.ln() + (n_vertices as f64).ln() + alpha * t as f64 * ln_ratio;
    Ok(LsBound {
        bound: ln_bound.exp(),
        c: 1.0 / inv_c,
    })
}

fn ln_q_iid(p: f64, d: usize, alpha: f64) -> Result<f64> {
    check_degree(d)?;
    check_alpha(alpha)?;
    check_prob("p", p)?;
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let exp = (d - 1) as f64 - alpha;
    Ok(exp * (-p).ln_1p() + alpha * p.ln() + entropy(alpha)? * LN_2 + ln_k_d(d)?)
}

/// `q = (1−p)^{d−1−α} p^α 2^{h(α)} K(d)`.
pub fn q_iid(p: f64, d: usize, alpha: f64) -> Result<f64> {
    Ok(ln_q_iid(p, d, alpha)?.exp())
}

/// Unique root of `q(p) = 1` in `(0, α/(d−1)]`, by bisection to relative
/// tolerance `tol`.
pub fn p_iid(d: usize, alpha: f64, tol: f64) -> Result<f64> {
    let mut hi = alpha / (d - 1).max(1) as f64;
    let top = ln_q_iid(hi, d, alpha)?;
    assert!(top >= -1e-12, "q(α/(d−1)) < 1 for d = {d}, α = {alpha}");
    let mut lo = hi * 1e-300_f64.max(f64::MIN_POSITIVE);
    assert!(ln_q_iid(lo, d, alpha)? < 0.0);
    // bisect on log p; the bracket spans hundreds of decades
    for _ in 0..400 {
        let mid = (lo.ln() * 0.5 + hi.ln() * 0.5).exp();
        if mid <= lo || mid >= hi {
            break;
        }
        if ln_q_iid(mid, d, alpha)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= tol * lo {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `p_iid − p_ls`, evaluated without cancellation.
///
/// At the root, `α ln p_iid = −h ln 2 − ln K − (d−1−α) ln(1 − p_iid)`, so
/// the gap is `p_ls · expm1(−(d−1−α)/α · ln(1 − p_iid))`.
pub fn p_iid_gap(d: usize, alpha: f64) -> Result<f64> {
    let root = p_iid(d, alpha, 1e-14)?;
    let pls = p_ls(d, alpha)?;
    let exp = ((d - 1) as f64 - alpha) / alpha;
    Ok(pls * (-exp * (-root).ln_1p()).exp_m1())
}

/// Tail bound for i.i.d. noise, `|V| ((d−1)/(d−2))² q^t / (1 − q)`.
pub fn bound_iid(n_vertices: usize, p: f64, d: usize, alpha: f64, t: usize) -> Result<f64> {
    let ln_q = ln_q_iid(p, d, alpha)?;
    if p > alpha / (d - 1) as f64 {
        return Err(domain(format!("p = {p:e} exceeds α/(d−1)")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if ln_q >= 0.0 {
        return Err(domain(format!(
            "q = {:e} is not below 1 at p = {p:e}",
            ln_q.exp()
        )));
    }
    let ratio = ((d - 1) as f64 / (d - 2) as f64).ln();
    let ln_bound = (n_vertices as f64).ln() + 2.0 * ratio + t as f64 * ln_q - (-ln_q.exp_m1()).ln();
    Ok(ln_bound.exp())
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Upper bound on the number of connected sets of size `s` in a graph of
/// maximum degree `d`: `|V| d / (s(s(d−2)+2)) · C(s(d−1), s−1)`.
pub fn connected_sets_bound(n_vertices: usize, d: usize, s: usize) -> Result<f64> {
    if d < 2 || s == 0 {
        return Err(domain(format!(
            "need d ≥ 2 and s ≥ 1, got d = {d}, s = {s}"
        )));
    }
    let (s_, d_) = (s as f64, d as f64);
    let ln = (n_vertices as f64).ln() + d_.ln() - s_.ln() - (s_ * (d_ - 2.0) + 2.0).ln()
        + ln_binomial((s * (d - 1)) as u64, (s - 1) as u64);
    Ok(ln.exp())
}

/// The simpler bound `|V| K(d)^s`.
pub fn connected_sets_bound_kd(n_vertices: usize, d: usize, s: usize) -> Result<f64> {
    Ok(((n_vertices as f64).ln() + s as f64 * ln_k_d(d)?).exp())
}

/// Result of an exact `MaxConn_α` computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxConn {
    pub value: usize,
    /// A qualifying set of size `size_cap` exists; the true value may be
    /// larger.
    pub cap_hit: bool,
    pub sets_visited: u64,
}

fn meets(count: usize, size: usize, alpha: &Rational) -> bool {
    // count ≥ α·size
    (count as i128) * (*alpha.denom() as i128) >= (*alpha.numer() as i128) * (size as i128)
}

/// Largest connected `X` with `|X ∩ e| ≥ α|X|` and `|X| ≤ size_cap`.
pub fn max_conn_alpha_exact(
    g: &Graph,
    e: &BitSet,
    alpha: Rational,
    size_cap: usize,
) -> Result<MaxConn> {
    max_conn_alpha(g, e, alpha, size_cap, DEFAULT_ENUMERATION_BUDGET, None)
}

/// Branch-and-bound over connected sets anchored at `e`-vertices.
///
/// With `stop_at = Some(t)` the search ends as soon as a qualifying set of
/// size `≥ t` is found; `value` is then only a lower bound.
pub fn max_conn_alpha(
    g: &Graph,
    e: &BitSet,
    alpha: Rational,
    size_cap: usize,
    budget: u64,
    stop_at: Option<usize>,
) -> Result<MaxConn> {
    if alpha <= Rational::zero() || alpha > Rational::one() {
        return Err(domain(format!("alpha = {alpha} is not in (0, 1]")));
    }
    if e.len() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "e has length {}, graph has {} vertices",
            e.len(),
            g.n()
        )));
    }
    let e_total = e.count();
    let cap = size_cap.min(g.n());
    if e_total == 0 || cap == 0 {
        return Ok(MaxConn {
            value: 0,
            cap_hit: false,
            sets_visited: 0,
        });
    }
    let e_vertices = e.to_indices();
    let mut order = e_vertices.clone();
    order.extend((0..g.n()).filter(|&v| !e.contains(v)));
    let mut best = 0usize;
    let stop = stop_at.unwrap_or(usize::MAX);
    let mut done = false;
    let visited = ConnectedSetSearch::new(g, cap)
        .with_order(&order)
        .with_budget(budget)
        .run(e_vertices.iter().copied(), |set| {
            if done {
                return Visit::Prune;
            }
            let s = set.len();
            let m = set.iter().filter(|&&v| e.contains(v)).count();
            if s > best && meets(m, s, &alpha) {
                best = s;
                if best >= stop || best == cap {
                    done = true;
                    return Visit::Prune;
                }
            }
            // some admissible size s' must still be reachable at density α
            let avail = e_total - m;
            let lo = (best + 1).max(s + 1);
            let feasible = (lo..=cap).any(|s2| meets(m + (s2 - s).min(avail), s2, &alpha));
            if feasible {
                Visit::Continue
            } else {
                Visit::Prune
            }
        })?;
    Ok(MaxConn {
        value: best,
        cap_hit: best == cap && cap == size_cap,
        sets_visited: visited,
    })
}

/// Grows `x` by repeatedly absorbing boundary vertices that lie in `e`.
pub fn alpha_closure(g: &Graph, x: &BitSet, e: &BitSet) -> BitSet {
    let mut out = x.clone();
    let mut stack: Vec<usize> = x.iter().collect();
    while let Some(v) = stack.pop() {
        for &u in g.neighbors(v) {
            if e.contains(u) && !out.contains(u) {
                out.insert(u);
                stack.push(u);
            }
        }
    }
    out
}

/// `P(longest circular run of occupied sites ≥ t)` on the `n`-cycle with
/// i.i.d. occupation probability `p`; equals `P(MaxConn_1 ≥ t)`.
pub fn cycle_run_tail(n: usize, p: f64, t: usize) -> Result<f64> {
    check_prob("p", p)?;
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "cycle length {n} is below 3"
        )));
    }
    if t == 0 {
        return Ok(1.0);
    }
    if t > n {
        return Ok(0.0);
    }
    let q = 1.0 - p;
    // linear[l] = P(a string of length l has no run of t ones)
    let mut linear = vec![0.0; n + 1];
    // state[j] = P(no long run so far, current trailing run = j)
    let mut state = vec![0.0; t];
    state[0] = 1.0;
    linear[0] = 1.0;
    for slot in linear.iter_mut().skip(1) {
        let mut next = vec![0.0; t];
        let total: f64 = state.iter().sum();
        next[0] = total * q;
        for j in 1..t {
            next[j] = state[j - 1] * p;
        }
        state = next;
        *slot = state.iter().sum();
    }
    // not all occupied: split off the leading i and trailing j ones
    let mut none = 0.0;
    for i in 0..t {
        for j in 0..t - i {
            let used = i + j;
            if used + 2 <= n {
                none += p.powi(used as i32) * q * q * linear[n - used - 2];
            } else if used + 1 == n {
                none += p.powi(used as i32) * q;
            }
        }
    }
    // with t ≤ n the all-occupied string always has a long run
    Ok((1.0 - none).clamp(0.0, 1.0))
}

/// Monte Carlo estimate of `P(MaxConn_α ≥ t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub hits: u64,
    pub trials: u64,
    pub cap_hits: u64,
    pub estimate: f64,
    pub ci: Interval,
}

/// Samples `trials` error sets and counts those with `MaxConn_α ≥ t`.
///
/// A cap hit with `size_cap ≥ t` counts as an exceedance. Trials use
/// independent RNG streams and run in parallel.
#[allow(clippy::too_many_arguments)]
pub fn estimate_maxconn_tail<S>(
    g: &Graph,
    sampler: S,
    alpha: Rational,
    t: usize,
    trials: u64,
    size_cap: usize,
    seed: u64,
    budget: u64,
) -> Result<TailEstimate>
where
    S: Fn(&mut StreamRng) -> BitSet + Sync,
{
    if size_cap < t {
        return Err(Error::InvalidArgument(format!(
            "size_cap {size_cap} is below t = {t}"
        )));
    }
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i, Tag::Percolation);
            let e = sampler(&mut rng);
            let r = max_conn_alpha(g, &e, alpha, size_cap, budget, Some(t))?;
            Ok((r.value >= t || r.cap_hit, r.cap_hit))
        })
        .collect::<Result<_>>()?;
    let hits = outcomes.iter().filter(|o| o.0).count() as u64;
    let cap_hits = outcomes.iter().filter(|o| o.1).count() as u64;
    Ok(TailEstimate {
        hits,
        trials,
        cap_hits,
        estimate: if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        },
        ci: wilson(hits, trials, 0.99),
    })
}

/// Smallest integer strictly greater than `1/α`.
pub fn ell_for_alpha(alpha: Rational) -> Result<usize> {
    if alpha <= Rational::zero() || alpha > Rational::one() {
        return Err(domain(format!("alpha = {alpha} is not in (0, 1]")));
    }
    let inv = alpha.recip();
    Ok(inv.floor().to_integer() as usize + 1)
}

/// Extinction probability of a Galton–Watson process with offspring
/// `Bin(m, p)`: the smallest fixed point of `s ↦ (1 − p + ps)^m`.
pub fn binomial_extinction(m: u64, p: f64) -> Result<f64> {
    check_prob("p", p)?;
    if m as f64 * p <= 1.0 {
        return Ok(1.0);
    }
    let f = |s: f64| (m as f64 * (p * (s - 1.0)).ln_1p()).exp();
    let mut s = 0.0;
    for _ in 0..10_000_000 {
        let next = f(s);
        if (next - s).abs() <= 1e-16 {
            return Ok(next);
        }
        s = next;
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeExperimentSpec {
    pub d: usize,
    pub alpha: Rational,
    pub c: usize,
    pub k: usize,
    pub p: f64,
    /// Sampled trees.
    pub trials: u64,
    /// Simulated branching-process lineages.
    pub lineages: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeReport {
    pub d: usize,
    pub alpha: Rational,
    pub ell: usize,
    pub c: usize,
    pub k: usize,
    pub p: f64,
    pub height: usize,
    pub vertices: usize,
    /// Vertices at depth `(c−1)k`.
    pub level_size: usize,
    pub trials: u64,
    /// Mean fraction of depth-`(c−1)k` vertices whose path event holds.
    pub event_fraction: f64,
    /// Mean size of the connected set built from the top levels and the
    /// witness paths.
    pub mean_set_size: f64,
    /// Fraction of trials where that set is an α-subset.
    pub alpha_subset_fraction: f64,
    pub analytic_survival: f64,
    pub lineages: u64,
    pub survived: u64,
    pub survival_estimate: f64,
    pub survival_ci: Interval,
}

const LINEAGE_POPULATION_CAP: u64 = 1_000;
const LINEAGE_GENERATION_CAP: usize = 10_000;

/// Samples a complete `(d−1)`-ary tree of height `ck`, marks depth-`(c−1)k`
/// vertices with a downward `k`-vertex path carrying at least `k/ℓ` errors,
/// and compares a simulated branching process with its fixed point.
pub fn tree_lower_bound_experiment(spec: &TreeExperimentSpec) -> Result<TreeReport> {
    let TreeExperimentSpec {
        d,
        alpha,
        c,
        k,
        p,
        trials,
        lineages,
        seed,
    } = spec.clone();
    check_prob("p", p)?;
    if d < 3 || c < 1 || k < 1 {
        return Err(Error::InvalidArgument(format!(
            "need d ≥ 3, c ≥ 1, k ≥ 1; got d = {d}, c = {c}, k = {k}"
        )));
    }
    let ell = ell_for_alpha(alpha)?;
    let height = c
        .checked_mul(k)
        .ok_or_else(|| Error::SizeOverflow("tree height overflows".into()))?;
    let vertices = complete_tree_size(d, height)
        .filter(|&n| n <= DEFAULT_TREE_CAP)
        .ok_or_else(|| {
            Error::SizeOverflow(format!(
                "tree (d={d}, height={height}) exceeds {DEFAULT_TREE_CAP} vertices"
            ))
        })?;
    let b = d - 1;
    let top = complete_tree_size(d, (c - 1) * k).expect("smaller than whole tree");
    let level_size = complete_tree_size(d, (c - 1) * k + 1).expect("fits") - top;

    let per_trial: Vec<(usize, usize, usize)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i, Tag::Percolation);
            let e: Vec<bool> = (0..vertices).map(|_| rng.gen_bool(p)).collect();
            // best[v] = most errors on a downward path from v to the last level
            let mut best = vec![0u32; vertices];
            for v in (0..vertices).rev() {
                let first = b * v + 1;
                let below = if first < vertices {
                    (first..first + b).map(|u| best[u]).max().unwrap_or(0)
                } else {
                    0
                };
                best[v] = below + e[v] as u32;
            }
            let mut holds = 0usize;
            let mut set_size = top;
            let mut in_e = e[..top].iter().filter(|&&x| x).count();
            for &b in &best[top..top + level_size] {
                if b as usize * ell >= k {
                    holds += 1;
                    set_size += k;
                    in_e += b as usize;
                }
            }
            let is_subset = meets(in_e, set_size, &alpha);
            (holds, set_size, is_subset as usize)
        })
        .collect();

    let n = trials.max(1) as f64;
    let event_fraction = per_trial
        .iter()
        .map(|t| t.0 as f64 / level_size as f64)
        .sum::<f64>()
        / n;
    let mean_set_size = per_trial.iter().map(|t| t.1 as f64).sum::<f64>() / n;
    let alpha_subset_fraction = per_trial.iter().map(|t| t.2 as f64).sum::<f64>() / n;

    let m = (b as u64)
        .checked_pow(ell as u32)
        .ok_or_else(|| Error::SizeOverflow("offspring count (d−1)^ℓ overflows".into()))?;
    let analytic_survival = 1.0 - binomial_extinction(m, p)?;
    let survived = simulate_lineages(m, p, lineages, seed)?;

    Ok(TreeReport {
        d,
        alpha,
        ell,
        c,
        k,
        p,
        height,
        vertices,
        level_size,
        trials,
        event_fraction,
        mean_set_size,
        alpha_subset_fraction,
        analytic_survival,
        lineages,
        survived,
        survival_estimate: if lineages == 0 {
            0.0
        } else {
            survived as f64 / lineages as f64
        },
        survival_ci: wilson(survived, lineages, 0.99),
    })
}

/// Counts lineages of a `Bin(m, p)` Galton–Watson process that reach the
/// population or generation cap.
fn simulate_lineages(m: u64, p: f64, lineages: u64, seed: u64) -> Result<u64> {
    let outcomes: Vec<bool> = (0..lineages)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i, Tag::Branching);
            let mut z: u64 = 1;
            for _ in 0..LINEAGE_GENERATION_CAP {
                if z == 0 {
                    return Ok(false);
                }
                if z >= LINEAGE_POPULATION_CAP {
                    return Ok(true);
                }
                let dist = Binomial::new(m * z, p).map_err(|err| domain(err.to_string()))?;
                z = dist.sample(&mut rng);
            }
            Ok(z > 0)
        })
        .collect::<Result<_>>()?;
    Ok(outcomes.into_iter().filter(|&s| s).count() as u64)
}

/// Converts a rational density to `f64` for the closed forms.
pub fn alpha_f64(alpha: &Rational) -> f64 {
    to_f64(alpha)
}
