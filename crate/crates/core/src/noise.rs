//! Error samplers: independent noise, a certified clustered sampler, and
//! an empirical check of the local stochastic inclusion bound
//! `P(F ⊆ E) ≤ p^{|F|}`.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{ConnectedSetSearch, Graph, Visit};
use crate::rng::{self, StreamRng, Tag};
use crate::stats;

pub const NOISE_SCHEMA: u32 = 1;

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} not in [0, 1)")));
    }
    Ok(())
}

/// Independent noise: each of `n` indices is included with probability `p`.
pub fn sample_iid<R: Rng>(n: usize, p: f64, rng: &mut R) -> BitSet {
    let mut e = BitSet::new(n);
    if p <= 0.0 {
        return e;
    }
    for i in 0..n {
        if rng.gen_bool(p) {
            e.insert(i);
        }
    }
    e
}

/// [`sample_iid`] drawn from the stream `(seed, index)`.
pub fn sample_iid_seeded(n: usize, p: f64, seed: u64, index: u64) -> Result<BitSet> {
    check_probability(p)?;
    Ok(sample_iid(n, p, &mut rng::stream(seed, index, Tag::ErrorX)))
}

/// X- and Z-side flip probabilities of a depolarizing channel: `(2p/3, 2p/3)`.
pub fn depolarizing_marginals(p: f64) -> Result<(f64, f64)> {
    check_probability(p)?;
    Ok((2.0 * p / 3.0, 2.0 * p / 3.0))
}

/// X- and Z-side flip probabilities of a Pauli channel: `(p_X + p_Y, p_Y + p_Z)`.
pub fn pauli_marginals(p_x: f64, p_y: f64, p_z: f64) -> Result<(f64, f64)> {
    for p in [p_x, p_y, p_z] {
        check_probability(p)?;
    }
    if p_x + p_y + p_z >= 1.0 {
        return Err(Error::Domain(format!(
            "p_X + p_Y + p_Z = {} ≥ 1",
            p_x + p_y + p_z
        )));
    }
    Ok((p_x + p_y, p_y + p_z))
}

/// Clustered sampler: each vertex independently becomes an anchor with
/// rate `a` and plants its burst `B(v)`, the first `b` vertices of a
/// breadth-first search from `v` (neighbours in ascending order).
///
/// With `c` the largest number of bursts containing a single vertex, any
/// fixed `F` satisfies `P(F ⊆ E) ≤ (c·a^{1/b})^{|F|}`: each vertex of `F`
/// needs an anchored burst covering it, there are at most `c^{|F|}` ways to
/// choose them, and they involve at least `|F|/b` distinct anchors.
#[derive(Debug, Clone)]
pub struct ClusterBurst {
    bursts: Vec<Vec<usize>>,
    burst_size: usize,
    anchor_rate: f64,
    coverage: usize,
    p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstCertificate {
    pub p: f64,
    pub burst_size: usize,
    pub anchor_rate: f64,
    /// Largest number of bursts containing one vertex.
    pub coverage: usize,
    /// `c·a^{1/b}`; `P(F ⊆ E) ≤ factor^{|F|}`.
    pub factor: f64,
}

impl ClusterBurst {
    /// Builds the sampler; `anchor_rate` defaults to the largest admissible
    /// value `(p/c)^b`.
    pub fn new(g: &Graph, p: f64, burst_size: usize, anchor_rate: Option<f64>) -> Result<Self> {
        check_probability(p)?;
        if burst_size == 0 {
            return Err(Error::InfeasibleKnobs(
                "burst size must be at least 1".into(),
            ));
        }
        let bursts: Vec<Vec<usize>> = (0..g.n()).map(|v| bfs_prefix(g, v, burst_size)).collect();
        let mut cover = vec![0usize; g.n()];
        for b in &bursts {
            for &u in b {
                cover[u] += 1;
            }
        }
        let coverage = cover.into_iter().max().unwrap_or(1).max(1);
        let max_rate = (p / coverage as f64).powi(burst_size as i32);
        let anchor_rate = anchor_rate.unwrap_or(max_rate);
        if !(0.0..1.0).contains(&anchor_rate) {
            return Err(Error::InfeasibleKnobs(format!(
                "anchor rate {anchor_rate} not in [0, 1)"
            )));
        }
        let factor = coverage as f64 * anchor_rate.powf(1.0 / burst_size as f64);
        if factor > p * (1.0 + 1e-12) {
            return Err(Error::InfeasibleKnobs(format!(
                "c·a^(1/b) = {factor} exceeds p = {p} (coverage {coverage}, burst {burst_size})"
            )));
        }
        Ok(ClusterBurst {
            bursts,
            burst_size,
            anchor_rate,
            coverage,
            p,
        })
    }

    pub fn certificate(&self) -> BurstCertificate {
        BurstCertificate {
            p: self.p,
            burst_size: self.burst_size,
            anchor_rate: self.anchor_rate,
            coverage: self.coverage,
            factor: self.coverage as f64 * self.anchor_rate.powf(1.0 / self.burst_size as f64),
        }
    }

    pub fn burst(&self, v: usize) -> &[usize] {
        &self.bursts[v]
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> BitSet {
        let mut e = BitSet::new(self.bursts.len());
        if self.anchor_rate <= 0.0 {
            return e;
        }
        for burst in &self.bursts {
            if rng.gen_bool(self.anchor_rate) {
                for &u in burst {
                    e.insert(u);
                }
            }
        }
        e
    }

    /// Exact `P(F ⊆ E)` for every `F ⊆ V` by summing over all anchor
    /// sets; index `F` by bit mask. Only for graphs of at most 16 vertices.
    pub fn exact_inclusion(&self) -> Result<Vec<f64>> {
        let n = self.bursts.len();
        if n > 16 {
            return Err(Error::BudgetExceeded(format!(
                "exact inclusion needs n ≤ 16, got {n}"
            )));
        }
        let burst_masks: Vec<u32> = self
            .bursts
            .iter()
            .map(|b| b.iter().fold(0u32, |m, &u| m | 1 << u))
            .collect();
        // probability that the planted set is exactly `m`
        let mut exact = vec![0.0f64; 1 << n];
        for anchors in 0u32..(1u32 << n) {
            let k = anchors.count_ones() as i32;
            let prob = self.anchor_rate.powi(k) * (1.0 - self.anchor_rate).powi(n as i32 - k);
            let planted = (0..n)
                .filter(|&v| anchors >> v & 1 == 1)
                .fold(0u32, |m, v| m | burst_masks[v]);
            exact[planted as usize] += prob;
        }
        // superset sums: P(F ⊆ E) = Σ_{m ⊇ F} P(E = m)
        for bit in 0..n {
            for m in 0..(1usize << n) {
                if m >> bit & 1 == 0 {
                    exact[m] += exact[m | 1 << bit];
                }
            }
        }
        Ok(exact)
    }
}

fn bfs_prefix(g: &Graph, v: usize, b: usize) -> Vec<usize> {
    let mut seen = vec![false; g.n()];
    let mut order = Vec::with_capacity(b);
    let mut queue = VecDeque::from([v]);
    seen[v] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        if order.len() == b {
            break;
        }
        for &w in g.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order
}

/// Noise model selected in experiment configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Iid,
    ClusterBurst {
        burst_size: usize,
        #[serde(default)]
        anchor_rate: Option<f64>,
    },
}

impl NoiseSpec {
    /// Builds a sampler on `g` at per-qubit level `p`.
    pub fn sampler(&self, g: &Graph, p: f64) -> Result<Sampler> {
        check_probability(p)?;
        Ok(match self {
            NoiseSpec::Iid => Sampler::Iid { n: g.n(), p },
            NoiseSpec::ClusterBurst {
                burst_size,
                anchor_rate,
            } => Sampler::Cluster(ClusterBurst::new(g, p, *burst_size, *anchor_rate)?),
        })
    }
}

#[derive(Debug, Clone)]
pub enum Sampler {
    Iid { n: usize, p: f64 },
    Cluster(ClusterBurst),
}

impl Sampler {
    pub fn sample(&self, rng: &mut StreamRng) -> BitSet {
        match self {
            Sampler::Iid { n, p } => sample_iid(*n, *p, rng),
            Sampler::Cluster(c) => c.sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsViolation {
    pub set: Vec<usize>,
    pub hits: u64,
    pub bound: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsReport {
    pub p: f64,
    pub trials: u64,
    pub sets_tested: usize,
    pub confidence: f64,
    pub violations: Vec<LsViolation>,
}

/// Compares empirical `P(F ⊆ E)` with `p^{|F|}` for every connected `F`
/// of size `≤ f_max` plus `extra_disconnected` random disconnected sets.
///
/// A violation is declared when the one-sided Wilson lower bound exceeds
/// `p^{|F|}`, at a per-set level Bonferroni-adjusted so the family-wise
/// confidence is `confidence`.
#[allow(clippy::too_many_arguments)]
pub fn ls_empirical_check<S>(
    mut sampler: S,
    p: f64,
    g: &Graph,
    f_max: usize,
    extra_disconnected: usize,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<LsReport>
where
    S: FnMut(&mut StreamRng) -> BitSet,
{
    let mut sets: Vec<Vec<usize>> = Vec::new();
    ConnectedSetSearch::new(g, f_max).run(0..g.n(), |set| {
        let mut s = set.to_vec();
        s.sort_unstable();
        sets.push(s);
        Visit::Continue
    })?;
    let mut pick = rng::stream(seed, u64::MAX, Tag::Audit);
    let vertices: Vec<usize> = (0..g.n()).collect();
    let mut attempts = 0;
    let mut added = 0;
    while added < extra_disconnected && attempts < 100 * extra_disconnected && f_max >= 2 {
        attempts += 1;
        let size = pick.gen_range(2..=f_max.min(g.n()));
        let mut s: Vec<usize> = vertices.choose_multiple(&mut pick, size).copied().collect();
        s.sort_unstable();
        if !g.is_connected_set(&BitSet::from_indices(g.n(), s.iter().copied())) {
            sets.push(s);
            added += 1;
        }
    }
    let masks: Vec<BitSet> = sets
        .iter()
        .map(|s| BitSet::from_indices(g.n(), s.iter().copied()))
        .collect();
    let mut hits = vec![0u64; sets.len()];
    for t in 0..trials {
        let e = sampler(&mut rng::stream(seed, t, Tag::ErrorX));
        for (h, m) in hits.iter_mut().zip(&masks) {
            if m.is_subset(&e) {
                *h += 1;
            }
        }
    }
    let per_set = 1.0 - (1.0 - confidence) / sets.len().max(1) as f64;
    let violations = sets
        .iter()
        .zip(&hits)
        .filter_map(|(s, &h)| {
            let bound = p.powi(s.len() as i32);
            let lower = stats::wilson_lower(h, trials, per_set);
            (lower > bound).then(|| LsViolation {
                set: s.clone(),
                hits: h,
                bound,
                lower,
            })
        })
        .collect();
    Ok(LsReport {
        p,
        trials,
        sets_tested: sets.len(),
        confidence,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_examples() {
        let mut r = rng::stream(1, 0, Tag::ErrorX);
        assert!(sample_iid(100, 0.0, &mut r).is_empty());
        let a = sample_iid_seeded(200, 0.3, 9, 4).unwrap();
        let b = sample_iid_seeded(200, 0.3, 9, 4).unwrap();
        assert_eq!(a, b);
        assert!(sample_iid_seeded(10, 1.0, 1, 1).is_err());
    }

    #[test]
    fn iid_mean_weight() {
        let mut total = 0usize;
        let samples = 100_000;
        let mut r = rng::stream(3, 0, Tag::ErrorX);
        for _ in 0..samples {
            total += sample_iid(20, 0.5, &mut r).count();
        }
        let mean = total as f64 / samples as f64;
        // σ of the mean = sqrt(20·¼ / 1e5)
        let sd = (5.0f64 / samples as f64).sqrt();
        assert!((mean - 10.0).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn marginals() {
        assert_eq!(depolarizing_marginals(0.0).unwrap(), (0.0, 0.0));
        let (x, z) = depolarizing_marginals(0.3).unwrap();
        assert!((x - 0.2).abs() < 1e-15 && (z - 0.2).abs() < 1e-15);
        let (x, z) = pauli_marginals(0.1, 0.05, 0.2).unwrap();
        assert!((x - 0.15).abs() < 1e-15 && (z - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unit_bursts_are_iid() {
        let g = Graph::cycle(10);
        let c = ClusterBurst::new(&g, 0.2, 1, None).unwrap();
        let cert = c.certificate();
        assert_eq!(cert.coverage, 1);
        assert!((cert.anchor_rate - 0.2).abs() < 1e-15);
        let exact = c.exact_inclusion().unwrap();
        for (f, &x) in exact.iter().enumerate() {
            let want = 0.2f64.powi(f.count_ones() as i32);
            assert!((x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn certificate_holds_exhaustively() {
        let g = Graph::from_edges(
            10,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 0),
                (0, 5),
                (5, 6),
                (6, 7),
                (7, 8),
                (8, 9),
                (9, 5),
                (2, 7),
            ],
        )
        .unwrap();
        for b in 1..=4 {
            let c = ClusterBurst::new(&g, 0.3, b, None).unwrap();
            let factor = c.certificate().factor;
            assert!(factor <= 0.3 * (1.0 + 1e-12));
            let exact = c.exact_inclusion().unwrap();
            for (f, &x) in exact.iter().enumerate().skip(1) {
                let bound = factor.powi(f.count_ones() as i32);
                assert!(x <= bound * (1.0 + 1e-9), "b={b} F={f:b}: {} > {bound}", x);
            }
        }
    }

    #[test]
    fn infeasible_rate_rejected() {
        let g = Graph::path(12);
        assert!(matches!(
            ClusterBurst::new(&g, 0.1, 2, Some(0.05)),
            Err(Error::InfeasibleKnobs(_))
        ));
        assert!(matches!(
            ClusterBurst::new(&g, 0.1, 0, None),
            Err(Error::InfeasibleKnobs(_))
        ));
    }

    #[test]
    fn iid_passes_own_level_and_fails_smaller() {
        let g = Graph::path(12);
        let p = 0.3;
        let ok = ls_empirical_check(
            |r: &mut StreamRng| sample_iid(12, p, r),
            p,
            &g,
            3,
            20,
            20_000,
            5,
            0.99,
        )
        .unwrap();
        assert!(ok.violations.is_empty(), "{:?}", ok.violations);
        let bad = ls_empirical_check(
            |r: &mut StreamRng| sample_iid(12, p, r),
            0.2,
            &g,
            2,
            0,
            20_000,
            5,
            0.99,
        )
        .unwrap();
        assert!(bad.violations.iter().filter(|v| v.set.len() == 1).count() == 12);
    }
}
