//! GF(2) parity-check matrices and classical codes on factor graphs.

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{next_combination, BipartiteGraph};

/// Default cap on codewords examined by distance searches.
pub const DEFAULT_DISTANCE_BUDGET: u64 = 1 << 24;

/// Row-major GF(2) matrix, each row a packed bit-vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitSet>,
}

impl ParityMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ParityMatrix {
            rows,
            cols,
            data: vec![BitSet::new(cols); rows],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m.data[i].insert(i);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitSet>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row of width {} in a matrix with {cols} columns",
                r.len()
            )));
        }
        Ok(ParityMatrix {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    /// Builds a matrix from nested 0/1 rows.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows
            .iter()
            .map(|r| {
                if r.len() != cols {
                    return Err(Error::DimensionMismatch("ragged dense matrix".into()));
                }
                Ok(BitSet::from_indices(
                    cols,
                    r.iter()
                        .enumerate()
                        .filter(|(_, &x)| x & 1 == 1)
                        .map(|(i, _)| i),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ParityMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Check-by-bit incidence matrix of a factor graph: rows are right
    /// vertices, columns left vertices.
    pub fn from_graph(g: &BipartiteGraph) -> Self {
        let data = (0..g.n_right())
            .map(|c| BitSet::from_indices(g.n_left(), g.right_neighbors(c).iter().copied()))
            .collect();
        ParityMatrix {
            rows: g.n_right(),
            cols: g.n_left(),
            data,
        }
    }

    /// Factor graph with columns on the left and rows on the right.
    pub fn to_graph(&self) -> BipartiteGraph {
        let mut adj_left = vec![Vec::new(); self.cols];
        for (r, row) in self.data.iter().enumerate() {
            for c in row {
                adj_left[c].push(r);
            }
        }
        BipartiteGraph::from_left_adjacency(self.rows, adj_left)
            .expect("matrix incidence is simple")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &BitSet {
        &self.data[r]
    }

    pub fn row_slice(&self) -> &[BitSet] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].contains(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r].set(c, value);
    }

    pub fn column(&self, c: usize) -> BitSet {
        BitSet::from_indices(
            self.rows,
            (0..self.rows).filter(|&r| self.data[r].contains(c)),
        )
    }

    pub fn transpose(&self) -> ParityMatrix {
        let mut t = ParityMatrix::zeros(self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for c in row {
                t.data[c].insert(r);
            }
        }
        t
    }

    /// `M·v` over GF(2).
    pub fn mul_vec(&self, v: &BitSet) -> Result<BitSet> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok(BitSet::from_indices(
            self.rows,
            (0..self.rows).filter(|&r| self.data[r].intersection_count(v) % 2 == 1),
        ))
    }

    /// `self · otherᵀ` over GF(2).
    pub fn mul_transpose(&self, other: &ParityMatrix) -> Result<ParityMatrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{} columns against {} columns",
                self.cols, other.cols
            )));
        }
        let mut out = ParityMatrix::zeros(self.rows, other.rows);
        for (i, a) in self.data.iter().enumerate() {
            for (j, b) in other.data.iter().enumerate() {
                if a.intersection_count(b) % 2 == 1 {
                    out.data[i].insert(j);
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitSet::is_empty)
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.data.iter().map(BitSet::count).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for row in &self.data {
            for c in row {
                w[c] += 1;
            }
        }
        w
    }

    pub fn rank(&self) -> usize {
        RowBasis::new(self).rank()
    }

    /// Basis of `{x : M x = 0}`.
    pub fn kernel_basis(&self) -> Vec<BitSet> {
        let basis = RowBasis::new(self);
        let pivot_cols: Vec<usize> = basis.pivots.clone();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivot_cols {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitSet::new(self.cols);
                v.insert(f);
                for (row, &p) in basis.rows.iter().zip(&pivot_cols) {
                    if row.contains(f) {
                        v.insert(p);
                    }
                }
                v
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("H {} {}\n", self.rows, self.cols);
        for row in &self.data {
            for c in 0..self.cols {
                s.push(if row.contains(c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Parses the `H rows cols` text format followed by 0/1 strings.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "H" {
            return Err(Error::Parse(format!("bad matrix header {header:?}")));
        }
        let dims: Vec<usize> = fields[1..]
            .iter()
            .map(|f| {
                f.parse()
                    .map_err(|_| Error::Parse(format!("bad integer {f:?}")))
            })
            .collect::<Result<_>>()?;
        let (rows, cols) = (dims[0], dims[1]);
        let mut data = Vec::with_capacity(rows);
        for line in lines {
            if line.len() != cols {
                return Err(Error::Parse(format!("row {line:?} is not {cols} wide")));
            }
            let mut row = BitSet::new(cols);
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => row.insert(c),
                    _ => return Err(Error::Parse(format!("bad matrix symbol {ch:?}"))),
                }
            }
            data.push(row);
        }
        if data.len() != rows {
            return Err(Error::Parse(format!(
                "expected {rows} rows, found {}",
                data.len()
            )));
        }
        Ok(ParityMatrix { rows, cols, data })
    }
}

/// Reduced row-echelon basis of a row space, used for rank, membership
/// and coset reduction.
#[derive(Debug, Clone)]
pub struct RowBasis {
    cols: usize,
    rows: Vec<BitSet>,
    pivots: Vec<usize>,
}

impl RowBasis {
    pub fn new(m: &ParityMatrix) -> Self {
        Self::from_vectors(m.cols, m.data.iter().cloned())
    }

    pub fn from_vectors<I: IntoIterator<Item = BitSet>>(cols: usize, vectors: I) -> Self {
        let mut basis = RowBasis {
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        };
        for v in vectors {
            basis.insert(v);
        }
        basis
    }

    /// Adds a vector; returns false if it was already in the span.
    pub fn insert(&mut self, v: BitSet) -> bool {
        let v = self.reduce(v);
        let Some(p) = v.first() else {
            return false;
        };
        for row in self.rows.iter_mut() {
            if row.contains(p) {
                row.xor_assign(&v);
            }
        }
        let pos = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(pos, p);
        self.rows.insert(pos, v);
        true
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Canonical coset representative of `v` modulo the span.
    pub fn reduce(&self, mut v: BitSet) -> BitSet {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.contains(p) {
                v.xor_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitSet) -> bool {
        self.reduce(v.clone()).is_empty()
    }
}

/// Outcome of a bounded distance search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceResult {
    Exact(usize),
    NotFoundBelowCap,
}

/// Minimum weight of a vector in `ker(h)` that is not in `span(excluded)`.
///
/// With an empty exclusion this is the classical minimum distance. The
/// kernel is scanned by Gray code when `2^dim` fits the budget, otherwise
/// candidate supports are enumerated by increasing weight up to
/// `weight_cap`.
pub fn min_weight_outside(
    h: &ParityMatrix,
    excluded: &RowBasis,
    weight_cap: usize,
    budget: u64,
) -> Result<DistanceResult> {
    let kernel = h.kernel_basis();
    let dim = kernel.len();
    if dim < 63 && (1u64 << dim) <= budget {
        let mut v = BitSet::new(h.cols);
        let mut best: Option<usize> = None;
        for i in 1u64..(1u64 << dim) {
            v.xor_assign(&kernel[i.trailing_zeros() as usize]);
            let w = v.count();
            if w <= weight_cap && best.map_or(true, |b| w < b) && !excluded.contains(&v) {
                best = Some(w);
            }
        }
        return Ok(best.map_or(DistanceResult::NotFoundBelowCap, DistanceResult::Exact));
    }
    let columns: Vec<BitSet> = (0..h.cols).map(|c| h.column(c)).collect();
    let cap = weight_cap.min(h.cols);
    let mut total: u128 = 0;
    for w in 1..=cap {
        total += binomial(h.cols, w);
    }
    if total > budget as u128 {
        return Err(Error::BudgetExceeded(format!(
            "distance search over {total} supports exceeds budget {budget}"
        )));
    }
    for w in 1..=cap {
        let mut combo: Vec<usize> = (0..w).collect();
        loop {
            let mut s = BitSet::new(h.rows);
            for &c in &combo {
                s.xor_assign(&columns[c]);
            }
            if s.is_empty() {
                let v = BitSet::from_indices(h.cols, combo.iter().copied());
                if !excluded.contains(&v) {
                    return Ok(DistanceResult::Exact(w));
                }
            }
            if !next_combination(&mut combo, h.cols) {
                break;
            }
        }
    }
    Ok(DistanceResult::NotFoundBelowCap)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
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

/// Classical minimum distance, or `NotFoundBelowCap`.
pub fn min_distance_bruteforce(
    m: &ParityMatrix,
    weight_cap: usize,
    budget: u64,
) -> Result<DistanceResult> {
    min_weight_outside(m, &RowBasis::from_vectors(m.cols, []), weight_cap, budget)
}

/// A classical code given by its factor graph (left = bits, right =
/// checks).
#[derive(Debug, Clone)]
pub struct ClassicalCodeView {
    graph: BipartiteGraph,
    h: ParityMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitflipStatus {
    Converged,
    Stalled,
    IterCap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitflipOutcome {
    pub estimate: BitSet,
    pub flips: Vec<usize>,
    /// Syndrome weight before the first flip and after each one.
    pub weights: Vec<usize>,
    pub residual: BitSet,
    pub status: BitflipStatus,
}

impl ClassicalCodeView {
    pub fn new(graph: BipartiteGraph) -> Self {
        let h = ParityMatrix::from_graph(&graph);
        ClassicalCodeView { graph, h }
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn parity_matrix(&self) -> &ParityMatrix {
        &self.h
    }

    pub fn n_bits(&self) -> usize {
        self.graph.n_left()
    }

    pub fn n_checks(&self) -> usize {
        self.graph.n_right()
    }

    /// `σ(E) = ⊕_{v∈E} Γ(v)`.
    pub fn syndrome(&self, e: &BitSet) -> Result<BitSet> {
        if e.len() != self.n_bits() {
            return Err(Error::DimensionMismatch(format!(
                "error over {} bits, code has {}",
                e.len(),
                self.n_bits()
            )));
        }
        let mut s = BitSet::new(self.n_checks());
        for v in e {
            for &c in self.graph.left_neighbors(v) {
                s.toggle(c);
            }
        }
        Ok(s)
    }

    /// Sequential bit-flip decoding: sweep bits in ascending order, flip
    /// the first one that lowers the syndrome weight, restart.
    pub fn bitflip_decode(&self, sigma: &BitSet, max_iters: usize) -> Result<BitflipOutcome> {
        if sigma.len() != self.n_checks() {
            return Err(Error::DimensionMismatch(format!(
                "syndrome over {} checks, code has {}",
                sigma.len(),
                self.n_checks()
            )));
        }
        let mut residual = sigma.clone();
        let mut estimate = BitSet::new(self.n_bits());
        let mut flips = Vec::new();
        let mut weights = vec![residual.count()];
        let status = loop {
            if residual.is_empty() {
                break BitflipStatus::Converged;
            }
            if flips.len() >= max_iters {
                break BitflipStatus::IterCap;
            }
            let pick = (0..self.n_bits()).find(|&v| {
                let nbrs = self.graph.left_neighbors(v);
                let hit = nbrs.iter().filter(|&&c| residual.contains(c)).count();
                2 * hit > nbrs.len()
            });
            let Some(v) = pick else {
                break BitflipStatus::Stalled;
            };
            for &c in self.graph.left_neighbors(v) {
                residual.toggle(c);
            }
            estimate.toggle(v);
            flips.push(v);
            weights.push(residual.count());
        };
        Ok(BitflipOutcome {
            estimate,
            flips,
            weights,
            residual,
            status,
        })
    }
}
