//! Bipartite factor graphs, plain graphs, random biregular sampling,
//! expansion auditing and connected-set machinery.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::rational::{in_open_unit, Rational};
use crate::rng::{self, Tag};

/// Attempts of the configuration model before giving up.
pub const SAMPLE_RETRY_CAP: usize = 10_000;
/// Default cap on the number of sets visited by connected-set enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 100_000_000;
/// Default cap on subsets examined by an exhaustive expansion audit.
pub const DEFAULT_AUDIT_BUDGET: u64 = 10_000_000;
/// Default vertex cap for [`complete_tree`].
pub const DEFAULT_TREE_CAP: usize = 50_000_000;

/// A bipartite graph `L ∪ R` with adjacency stored in both directions.
///
/// For a classical code, left vertices are bits and right vertices are
/// checks. `d_left`/`d_right` are degree bounds; for biregular graphs every
/// vertex meets them exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    d_left: usize,
    d_right: usize,
    adj_left: Vec<Vec<usize>>,
    adj_right: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    /// Builds a graph from `(left, right)` edges. Degree bounds are the
    /// maximum observed degrees.
    pub fn from_edges(n_left: usize, n_right: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj_left = vec![Vec::new(); n_left];
        for &(u, v) in edges {
            if u >= n_left || v >= n_right {
                return Err(Error::DimensionMismatch(format!(
                    "edge ({u}, {v}) outside {n_left}x{n_right}"
                )));
            }
            adj_left[u].push(v);
        }
        Self::from_left_adjacency(n_right, adj_left)
    }

    /// Builds a graph from left adjacency lists, deriving the inverse.
    pub fn from_left_adjacency(n_right: usize, mut adj_left: Vec<Vec<usize>>) -> Result<Self> {
        let n_left = adj_left.len();
        let mut adj_right = vec![Vec::new(); n_right];
        for (u, nbrs) in adj_left.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "left vertex {u} has a repeated neighbour"
                )));
            }
            for &v in nbrs.iter() {
                if v >= n_right {
                    return Err(Error::DimensionMismatch(format!(
                        "right vertex {v} out of range {n_right}"
                    )));
                }
                adj_right[v].push(u);
            }
        }
        let d_left = adj_left.iter().map(Vec::len).max().unwrap_or(0);
        let d_right = adj_right.iter().map(Vec::len).max().unwrap_or(0);
        Ok(BipartiteGraph {
            n_left,
            n_right,
            d_left,
            d_right,
            adj_left,
            adj_right,
        })
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn d_left(&self) -> usize {
        self.d_left
    }

    pub fn d_right(&self) -> usize {
        self.d_right
    }

    pub fn left_neighbors(&self, u: usize) -> &[usize] {
        &self.adj_left[u]
    }

    pub fn right_neighbors(&self, v: usize) -> &[usize] {
        &self.adj_right[v]
    }

    pub fn adj_left(&self) -> &[Vec<usize>] {
        &self.adj_left
    }

    pub fn adj_right(&self) -> &[Vec<usize>] {
        &self.adj_right
    }

    pub fn edge_count(&self) -> usize {
        self.adj_left.iter().map(Vec::len).sum()
    }

    pub fn is_biregular(&self) -> bool {
        self.adj_left.iter().all(|a| a.len() == self.d_left)
            && self.adj_right.iter().all(|a| a.len() == self.d_right)
    }

    /// Edges sorted by `(left, right)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj_left
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().map(move |&v| (u, v)))
    }

    /// The same graph with sides exchanged.
    pub fn transpose(&self) -> BipartiteGraph {
        BipartiteGraph {
            n_left: self.n_right,
            n_right: self.n_left,
            d_left: self.d_right,
            d_right: self.d_left,
            adj_left: self.adj_right.clone(),
            adj_right: self.adj_left.clone(),
        }
    }

    /// Neighbourhood `Γ(S)` of a set of vertices on one side.
    pub fn neighborhood(&self, side: Side, set: &[usize]) -> BitSet {
        let (adj, other) = match side {
            Side::Left => (&self.adj_left, self.n_right),
            Side::Right => (&self.adj_right, self.n_left),
        };
        let mut out = BitSet::new(other);
        for &u in set {
            for &v in &adj[u] {
                out.insert(v);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "BIPARTITE {} {} {} {}\n",
            self.n_left, self.n_right, self.d_left, self.d_right
        );
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    /// Parses the `BIPARTITE n_left n_right d_left d_right` text format.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "BIPARTITE" {
            return Err(Error::Parse(format!("bad bipartite header {header:?}")));
        }
        let nums = parse_usizes(&fields[1..])?;
        let (n_left, n_right, d_left, d_right) = (nums[0], nums[1], nums[2], nums[3]);
        let edges = parse_edges(lines)?;
        let mut g = BipartiteGraph::from_edges(n_left, n_right, &edges)?;
        if g.d_left > d_left || g.d_right > d_right {
            return Err(Error::Parse(format!(
                "observed degrees ({}, {}) exceed declared ({d_left}, {d_right})",
                g.d_left, g.d_right
            )));
        }
        g.d_left = d_left;
        g.d_right = d_right;
        Ok(g)
    }
}

/// A simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    d_max: usize,
}

impl Graph {
    /// Builds a graph from an edge list; duplicate edges are merged,
    /// self-loops rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::DimensionMismatch(format!(
                    "edge ({u}, {v}) outside {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::from_adjacency_unchecked(adj))
    }

    fn from_adjacency_unchecked(mut adj: Vec<Vec<usize>>) -> Self {
        for nbrs in adj.iter_mut() {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        let d_max = adj.iter().map(Vec::len).max().unwrap_or(0);
        Graph {
            n: adj.len(),
            adj,
            d_max,
        }
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("valid path")
    }

    /// Cycle on `n ≥ 3` vertices.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges).expect("valid cycle")
    }

    /// Circulant graph joining `i` to `i ± k` for every offset `k`.
    pub fn circulant(n: usize, offsets: &[usize]) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for &k in offsets {
                if k == 0 || k % n == 0 {
                    return Err(Error::InvalidArgument(format!(
                        "offset {k} makes a self-loop"
                    )));
                }
                edges.push((i, (i + k) % n));
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn adj(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Boundary `∂X = Γ(X) \ X`.
    pub fn boundary(&self, x: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.n);
        for u in x {
            for &v in &self.adj[u] {
                out.insert(v);
            }
        }
        out.difference_assign(x);
        out
    }

    /// True when `x` is nonempty and connected in the induced subgraph.
    pub fn is_connected_set(&self, x: &BitSet) -> bool {
        let comps = connected_components(self, x);
        comps.len() == 1
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("GRAPH {}\n", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    /// Parses the `GRAPH n` text format.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 || fields[0] != "GRAPH" {
            return Err(Error::Parse(format!("bad graph header {header:?}")));
        }
        let n = parse_usizes(&fields[1..])?[0];
        let edges = parse_edges(lines)?;
        Graph::from_edges(n, &edges)
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
}

fn parse_usizes(fields: &[&str]) -> Result<Vec<usize>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad integer {f:?}")))
        })
        .collect()
}

fn parse_edges<'a>(lines: impl Iterator<Item = &'a str>) -> Result<Vec<(usize, usize)>> {
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse(format!("bad edge line {line:?}")));
            }
            let nums = parse_usizes(&fields)?;
            Ok((nums[0], nums[1]))
        })
        .collect()
}

/// Declared expansion constants `(γ_L, δ_L, γ_R, δ_R)`; recorded in
/// outputs, never assumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionParams {
    pub gamma_left: Rational,
    pub delta_left: Rational,
    pub gamma_right: Rational,
    pub delta_right: Rational,
}

impl ExpansionParams {
    pub fn new(
        gamma_left: Rational,
        delta_left: Rational,
        gamma_right: Rational,
        delta_right: Rational,
    ) -> Result<Self> {
        let p = ExpansionParams {
            gamma_left,
            delta_left,
            gamma_right,
            delta_right,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_left", self.gamma_left),
            ("delta_left", self.delta_left),
            ("gamma_right", self.gamma_right),
            ("delta_right", self.delta_right),
        ] {
            if !in_open_unit(&v) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v} not in (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Samples a simple `(d_left, d_right)`-biregular bipartite graph from the
/// configuration model. Multi-edges are removed by degree-preserving edge
/// switches; an attempt whose switches stall is discarded and resampled.
pub fn sample_biregular(
    n_left: usize,
    n_right: usize,
    d_left: usize,
    d_right: usize,
    seed: u64,
) -> Result<BipartiteGraph> {
    if n_left * d_left != n_right * d_right {
        return Err(Error::DimensionMismatch(format!(
            "{n_left}*{d_left} != {n_right}*{d_right}"
        )));
    }
    if d_left > n_right || d_right > n_left {
        return Err(Error::Unsatisfiable(format!(
            "no simple graph with degrees ({d_left}, {d_right}) on {n_left}x{n_right}"
        )));
    }
    let mut rng = rng::stream(seed, 0, Tag::Graph);
    let left_stubs: Vec<usize> = (0..n_left)
        .flat_map(|u| std::iter::repeat(u).take(d_left))
        .collect();
    let mut right_stubs: Vec<usize> = (0..n_right)
        .flat_map(|v| std::iter::repeat(v).take(d_right))
        .collect();
    let m = left_stubs.len();
    for _ in 0..SAMPLE_RETRY_CAP {
        right_stubs.shuffle(&mut rng);
        let mut edges: Vec<(usize, usize)> = left_stubs
            .iter()
            .copied()
            .zip(right_stubs.iter().copied())
            .collect();
        if m == 0 || repair_multi_edges(&mut edges, n_right, &mut rng) {
            return BipartiteGraph::from_edges(n_left, n_right, &edges).map(|mut g| {
                g.d_left = d_left;
                g.d_right = d_right;
                g
            });
        }
    }
    Err(Error::Unsatisfiable(format!(
        "no simple graph after {SAMPLE_RETRY_CAP} attempts"
    )))
}

/// Removes repeated edges by switching `(u,v),(x,y) -> (u,y),(x,v)`.
/// Returns false if the switch budget runs out.
fn repair_multi_edges<R: Rng>(edges: &mut [(usize, usize)], n_right: usize, rng: &mut R) -> bool {
    let m = edges.len();
    let key = |(u, v): (usize, usize)| u * n_right + v;
    let mut multiplicity = std::collections::HashMap::with_capacity(m);
    for &e in edges.iter() {
        *multiplicity.entry(key(e)).or_insert(0usize) += 1;
    }
    let mut budget = 100 * m + 100;
    loop {
        let Some(i) = (0..m).find(|&i| multiplicity[&key(edges[i])] > 1) else {
            return true;
        };
        loop {
            if budget == 0 {
                return false;
            }
            budget -= 1;
            let j = rng.gen_range(0..m);
            let (u, v) = edges[i];
            let (x, y) = edges[j];
            if u == x || v == y {
                continue;
            }
            let a = (u, y);
            let b = (x, v);
            if multiplicity.get(&key(a)).copied().unwrap_or(0) > 0
                || multiplicity.get(&key(b)).copied().unwrap_or(0) > 0
            {
                continue;
            }
            for e in [(u, v), (x, y)] {
                *multiplicity.get_mut(&key(e)).unwrap() -= 1;
            }
            for e in [a, b] {
                *multiplicity.entry(key(e)).or_insert(0) += 1;
            }
            edges[i] = a;
            edges[j] = b;
            break;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    Exhaustive,
    Probe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub mode: AuditMode,
    /// Largest `s` such that every subset of size `≤ s` was verified.
    /// Always 0 in probe mode, which can only refute.
    pub verified_up_to: usize,
    /// A violating set, smallest first (size, then lexicographic) in
    /// exhaustive mode.
    pub counterexample: Option<Vec<usize>>,
    pub subsets_checked: u64,
}

/// Audit parameters for [`expansion_audit`].
#[derive(Debug, Clone, Copy)]
pub struct AuditSpec {
    pub side: Side,
    pub gamma: Rational,
    pub delta: Rational,
    pub s_max: usize,
    pub mode: AuditMode,
    pub probes: u64,
    pub seed: u64,
    pub budget: u64,
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Checks `|Γ(S)| ≥ (1−δ)·d·|S|` for vertex sets `S` on one side.
pub fn expansion_audit(g: &BipartiteGraph, spec: &AuditSpec) -> Result<AuditReport> {
    let (n_side, n_other, d, adj) = match spec.side {
        Side::Left => (g.n_left, g.n_right, g.d_left, &g.adj_left),
        Side::Right => (g.n_right, g.n_left, g.d_right, &g.adj_right),
    };
    if spec.delta <= Rational::from_integer(0) || spec.delta >= Rational::from_integer(1) {
        return Err(Error::InvalidArgument(format!(
            "delta = {} not in (0, 1)",
            spec.delta
        )));
    }
    let (dnum, dden) = (*spec.delta.numer(), *spec.delta.denom());
    let expands = |set: &[usize], stamp: &mut Vec<u32>, epoch: u32| {
        let mut nb = 0i64;
        for &u in set {
            for &v in &adj[u] {
                if stamp[v] != epoch {
                    stamp[v] = epoch;
                    nb += 1;
                }
            }
        }
        nb * dden >= (dden - dnum) * d as i64 * set.len() as i64
    };
    let mut stamp = vec![0u32; n_other];
    let mut epoch = 0u32;
    let mut next_epoch = |stamp: &mut Vec<u32>| {
        if epoch == u32::MAX {
            stamp.iter_mut().for_each(|s| *s = 0);
            epoch = 0;
        }
        epoch += 1;
        epoch
    };
    let s_max = spec.s_max.min(n_side);
    match spec.mode {
        AuditMode::Exhaustive => {
            let limit = spec.gamma * Rational::from_integer(n_side as i64);
            if Rational::from_integer(spec.s_max as i64) > limit.floor() {
                return Err(Error::InvalidArgument(format!(
                    "s_max = {} exceeds floor(gamma * n) = {}",
                    spec.s_max,
                    limit.floor()
                )));
            }
            let total: u128 = (1..=s_max).map(|s| binomial_u128(n_side, s)).sum();
            if total > spec.budget as u128 {
                return Err(Error::BudgetExceeded(format!(
                    "{total} subsets exceed audit budget {}",
                    spec.budget
                )));
            }
            let mut checked = 0u64;
            for s in 1..=s_max {
                let mut combo: Vec<usize> = (0..s).collect();
                loop {
                    checked += 1;
                    let e = next_epoch(&mut stamp);
                    if !expands(&combo, &mut stamp, e) {
                        return Ok(AuditReport {
                            mode: spec.mode,
                            verified_up_to: s - 1,
                            counterexample: Some(combo),
                            subsets_checked: checked,
                        });
                    }
                    if !next_combination(&mut combo, n_side) {
                        break;
                    }
                }
            }
            Ok(AuditReport {
                mode: spec.mode,
                verified_up_to: s_max,
                counterexample: None,
                subsets_checked: checked,
            })
        }
        AuditMode::Probe => {
            let mut rng = rng::stream(spec.seed, 0, Tag::Probe);
            let vertices: Vec<usize> = (0..n_side).collect();
            let mut checked = 0u64;
            if s_max == 0 {
                return Ok(AuditReport {
                    mode: spec.mode,
                    verified_up_to: 0,
                    counterexample: None,
                    subsets_checked: 0,
                });
            }
            for _ in 0..spec.probes {
                let s = rng.gen_range(1..=s_max);
                let mut set: Vec<usize> = vertices.choose_multiple(&mut rng, s).copied().collect();
                set.sort_unstable();
                checked += 1;
                let e = next_epoch(&mut stamp);
                if !expands(&set, &mut stamp, e) {
                    return Ok(AuditReport {
                        mode: spec.mode,
                        verified_up_to: 0,
                        counterexample: Some(set),
                        subsets_checked: checked,
                    });
                }
            }
            Ok(AuditReport {
                mode: spec.mode,
                verified_up_to: 0,
                counterexample: None,
                subsets_checked: checked,
            })
        }
    }
}

/// Advances `combo` to the next k-combination of `0..n` in lexicographic
/// order; returns false after the last one.
pub fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Splits `s` into maximal subsets connected within the subgraph induced
/// by `s`, ordered by smallest member.
pub fn connected_components(g: &Graph, s: &BitSet) -> Vec<BitSet> {
    assert_eq!(s.len(), g.n, "vertex set sized for a different graph");
    let mut seen = BitSet::new(g.n);
    let mut parts = Vec::new();
    let mut stack = Vec::new();
    for start in s.iter() {
        if seen.contains(start) {
            continue;
        }
        let mut part = BitSet::new(g.n);
        seen.insert(start);
        stack.push(start);
        while let Some(u) = stack.pop() {
            part.insert(u);
            for &v in &g.adj[u] {
                if s.contains(v) && !seen.contains(v) {
                    seen.insert(v);
                    stack.push(v);
                }
            }
        }
        parts.push(part);
    }
    parts
}

/// Decision returned by connected-set visitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    /// Keep growing this set.
    Continue,
    /// Skip every set generated by extending this one.
    Prune,
}

/// Duplicate-free enumeration of connected vertex sets (ESU growth).
///
/// Each connected set `X` with `|X| ≤ s_max` is generated exactly once,
/// grown from its minimum vertex under `rank` and extended only by
/// vertices of larger rank. Sets whose minimum is not in `anchors` are
/// skipped. Returns the number of sets visited.
pub struct ConnectedSetSearch<'g> {
    g: &'g Graph,
    s_max: usize,
    rank: Vec<usize>,
    budget: u64,
}

impl<'g> ConnectedSetSearch<'g> {
    pub fn new(g: &'g Graph, s_max: usize) -> Self {
        ConnectedSetSearch {
            g,
            s_max,
            rank: (0..g.n).collect(),
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }

    /// Orders vertices; `order[i]` is the vertex ranked `i`.
    pub fn with_order(mut self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.g.n);
        for (r, &v) in order.iter().enumerate() {
            self.rank[v] = r;
        }
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Runs the search from every anchor in the given order.
    pub fn run<I, F>(&self, anchors: I, mut visit: F) -> Result<u64>
    where
        I: IntoIterator<Item = usize>,
        F: FnMut(&[usize]) -> Visit,
    {
        let mut state = EsuState {
            members: Vec::with_capacity(self.s_max),
            cover: vec![0u32; self.g.n],
            visited: 0,
        };
        for v in anchors {
            if self.s_max == 0 {
                break;
            }
            self.add(&mut state, v);
            let ext: Vec<usize> = self.g.adj[v]
                .iter()
                .copied()
                .filter(|&u| self.rank[u] > self.rank[v])
                .collect();
            let outcome = self.extend(&mut state, ext, self.rank[v], &mut visit);
            self.pop(&mut state);
            outcome?;
        }
        Ok(state.visited)
    }

    fn add(&self, st: &mut EsuState, w: usize) {
        st.members.push(w);
        st.cover[w] += 1;
        for &u in &self.g.adj[w] {
            st.cover[u] += 1;
        }
    }

    fn pop(&self, st: &mut EsuState) {
        let w = st.members.pop().expect("nonempty");
        st.cover[w] -= 1;
        for &u in &self.g.adj[w] {
            st.cover[u] -= 1;
        }
    }

    fn extend<F>(
        &self,
        st: &mut EsuState,
        mut ext: Vec<usize>,
        anchor_rank: usize,
        visit: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&[usize]) -> Visit,
    {
        st.visited += 1;
        if st.visited > self.budget {
            return Err(Error::BudgetExceeded(format!(
                "connected-set enumeration passed {} sets",
                self.budget
            )));
        }
        if visit(&st.members) == Visit::Prune || st.members.len() == self.s_max {
            return Ok(());
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            next.extend(
                self.g.adj[w]
                    .iter()
                    .copied()
                    .filter(|&u| st.cover[u] == 0 && self.rank[u] > anchor_rank),
            );
            self.add(st, w);
            let r = self.extend(st, next, anchor_rank, visit);
            self.pop(st);
            r?;
        }
        Ok(())
    }
}

struct EsuState {
    members: Vec<usize>,
    /// Number of members equal or adjacent to each vertex.
    cover: Vec<u32>,
    visited: u64,
}

/// Exact counts `|C_s(G)|` for `s = 1..=s_max` (index `s-1`), calling
/// `visitor` on every connected set.
pub fn enumerate_connected_sets<F>(
    g: &Graph,
    s_max: usize,
    budget: u64,
    mut visitor: F,
) -> Result<Vec<u64>>
where
    F: FnMut(&[usize]),
{
    if s_max == 0 {
        return Err(Error::InvalidArgument("s_max must be at least 1".into()));
    }
    let mut counts = vec![0u64; s_max];
    ConnectedSetSearch::new(g, s_max)
        .with_budget(budget)
        .run(0..g.n, |set| {
            counts[set.len() - 1] += 1;
            visitor(set);
            Visit::Continue
        })?;
    Ok(counts)
}

/// Number of vertices of a complete (d−1)-ary tree with `height` levels:
/// `((d−1)^height − 1)/(d−2)`.
pub fn complete_tree_size(d: usize, height: usize) -> Option<usize> {
    let b = d.checked_sub(1)?;
    let mut total: usize = 0;
    let mut level: usize = 1;
    for _ in 0..height {
        total = total.checked_add(level)?;
        level = level.checked_mul(b)?;
    }
    Some(total)
}

/// Complete (d−1)-ary tree with `height` levels in BFS order: vertex 0 is
/// the root and the children of `v` are `(d−1)v + 1 ..= (d−1)v + (d−1)`.
pub fn complete_tree(d: usize, height: usize, cap: usize) -> Result<Graph> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!(
            "tree degree d = {d} must be at least 3"
        )));
    }
    if height == 0 {
        return Err(Error::InvalidArgument(
            "tree height must be at least 1".into(),
        ));
    }
    let n = complete_tree_size(d, height)
        .filter(|&n| n <= cap)
        .ok_or_else(|| {
            Error::SizeOverflow(format!(
                "tree (d={d}, height={height}) exceeds {cap} vertices"
            ))
        })?;
    let b = d - 1;
    let mut adj = vec![Vec::new(); n];
    for v in 1..n {
        let parent = (v - 1) / b;
        adj[parent].push(v);
        adj[v].push(parent);
    }
    Ok(Graph::from_adjacency_unchecked(adj))
}
