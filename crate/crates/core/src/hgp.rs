//! Hypergraph-product CSS codes built from one seed factor graph.
//!
//! For a seed graph with bit side `A` (`n_A` vertices) and check side `B`
//! (`n_B` vertices), `H` is the `n_B × n_A` incidence matrix and
//!
//! ```text
//! H_X = (I_{n_A} ⊗ H, Hᵀ ⊗ I_{n_B})      rows C_X ≅ A×B
//! H_Z = (H ⊗ I_{n_A}, I_{n_B} ⊗ Hᵀ)      rows C_Z ≅ B×A
//! ```
//!
//! Qubits are the A² block, row-major `(α, a) ↦ α·n_A + a`, followed by
//! the B² block, `(b, β) ↦ n_A² + b·n_B + β`. Row `(α, β)` of `H_X` has
//! index `α·n_B + β`, row `(b, a)` of `H_Z` has index `b·n_A + a`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::classical::{min_weight_outside, DistanceResult, ParityMatrix, RowBasis};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, ExpansionParams, Graph};
use crate::rational::{floor_count, Rational};

/// Tag written into bundles describing the qubit and generator order.
pub const ORDERING_TAG: &str = "A2-row-major,B2-row-major;CX=(alpha,beta);CZ=(b,a)";
pub const BUNDLE_SCHEMA: u32 = 1;

/// Which error type a decoder instance handles.
///
/// On the X side, syndromes come from `H_X` and corrections are subsets of
/// `H_Z` rows (X-type generators); the Z side swaps the two matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Z,
}

impl Pauli {
    pub fn other(self) -> Pauli {
        match self {
            Pauli::X => Pauli::Z,
            Pauli::Z => Pauli::X,
        }
    }
}

/// Coordinates of a qubit inside the product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitCoord {
    /// `(α, a) ∈ A²`
    AA(usize, usize),
    /// `(b, β) ∈ B²`
    BB(usize, usize),
}

#[derive(Debug)]
pub struct CssCode {
    seed: BipartiteGraph,
    expansion: Option<ExpansionParams>,
    n_a: usize,
    n_b: usize,
    hx: ParityMatrix,
    hz: ParityMatrix,
    gx: BipartiteGraph,
    gz: BipartiteGraph,
    bases: [OnceLock<RowBasis>; 2],
    column_spaces: [OnceLock<RowBasis>; 2],
}

impl Clone for CssCode {
    fn clone(&self) -> Self {
        CssCode {
            seed: self.seed.clone(),
            expansion: self.expansion,
            n_a: self.n_a,
            n_b: self.n_b,
            hx: self.hx.clone(),
            hz: self.hz.clone(),
            gx: self.gx.clone(),
            gz: self.gz.clone(),
            bases: Default::default(),
            column_spaces: Default::default(),
        }
    }
}

/// Builds the hypergraph product of `g` with itself.
///
/// Degrees `d_A`, `d_B` are the seed's degree bounds; non-biregular seeds
/// are accepted and flagged in the manifest.
pub fn hypergraph_product(
    g: &BipartiteGraph,
    expansion: Option<ExpansionParams>,
) -> Result<CssCode> {
    let (n_a, n_b) = (g.n_left(), g.n_right());
    if n_a == 0 || n_b == 0 {
        return Err(Error::DimensionMismatch(format!(
            "empty seed graph {n_a}x{n_b}"
        )));
    }
    if let Some(p) = &expansion {
        p.validate()?;
    }
    let n = n_a * n_a + n_b * n_b;
    let qa = |alpha: usize, a: usize| alpha * n_a + a;
    let qb = |b: usize, beta: usize| n_a * n_a + b * n_b + beta;

    let mut hx_rows = Vec::with_capacity(n_a * n_b);
    for alpha in 0..n_a {
        for beta in 0..n_b {
            let mut row = BitSet::new(n);
            for &a in g.right_neighbors(beta) {
                row.insert(qa(alpha, a));
            }
            for &b in g.left_neighbors(alpha) {
                row.insert(qb(b, beta));
            }
            hx_rows.push(row);
        }
    }
    let mut hz_rows = Vec::with_capacity(n_b * n_a);
    for b in 0..n_b {
        for a in 0..n_a {
            let mut row = BitSet::new(n);
            for &alpha in g.right_neighbors(b) {
                row.insert(qa(alpha, a));
            }
            for &beta in g.left_neighbors(a) {
                row.insert(qb(b, beta));
            }
            hz_rows.push(row);
        }
    }
    let hx = ParityMatrix::from_rows(n, hx_rows)?;
    let hz = ParityMatrix::from_rows(n, hz_rows)?;
    if !hx.mul_transpose(&hz)?.is_zero() {
        return Err(Error::InvariantViolation("H_X · H_Zᵀ ≠ 0".into()));
    }
    let gx = hx.to_graph();
    let gz = hz.to_graph();
    Ok(CssCode {
        seed: g.clone(),
        expansion,
        n_a,
        n_b,
        hx,
        hz,
        gx,
        gz,
        bases: Default::default(),
        column_spaces: Default::default(),
    })
}

impl CssCode {
    pub fn seed(&self) -> &BipartiteGraph {
        &self.seed
    }

    pub fn expansion(&self) -> Option<&ExpansionParams> {
        self.expansion.as_ref()
    }

    pub fn n(&self) -> usize {
        self.hx.cols()
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn d_a(&self) -> usize {
        self.seed.d_left()
    }

    pub fn d_b(&self) -> usize {
        self.seed.d_right()
    }

    pub fn hx(&self) -> &ParityMatrix {
        &self.hx
    }

    pub fn hz(&self) -> &ParityMatrix {
        &self.hz
    }

    /// Factor graph of `H_X`: qubits on the left, `C_X` on the right.
    pub fn gx(&self) -> &BipartiteGraph {
        &self.gx
    }

    /// Factor graph of `H_Z`: qubits on the left, `C_Z` on the right.
    pub fn gz(&self) -> &BipartiteGraph {
        &self.gz
    }

    /// Matrix whose rows are the checks seen by `side` errors.
    pub fn check_matrix(&self, side: Pauli) -> &ParityMatrix {
        match side {
            Pauli::X => &self.hx,
            Pauli::Z => &self.hz,
        }
    }

    /// Matrix whose rows are the generators that `side` corrections flip.
    pub fn stabilizer_matrix(&self, side: Pauli) -> &ParityMatrix {
        self.check_matrix(side.other())
    }

    pub fn check_graph(&self, side: Pauli) -> &BipartiteGraph {
        match side {
            Pauli::X => &self.gx,
            Pauli::Z => &self.gz,
        }
    }

    pub fn stabilizer_graph(&self, side: Pauli) -> &BipartiteGraph {
        self.check_graph(side.other())
    }

    pub fn n_checks(&self, side: Pauli) -> usize {
        self.check_matrix(side).rows()
    }

    /// Row basis of the stabilizer space for `side`.
    pub fn stabilizer_basis(&self, side: Pauli) -> &RowBasis {
        let slot = &self.bases[side as usize];
        slot.get_or_init(|| RowBasis::new(self.stabilizer_matrix(side)))
    }

    /// Basis of the column space of the check matrix, i.e. of all
    /// reachable syndromes.
    pub fn syndrome_space(&self, side: Pauli) -> &RowBasis {
        let slot = &self.column_spaces[side as usize];
        slot.get_or_init(|| RowBasis::new(&self.check_matrix(side).transpose()))
    }

    /// Syndrome of a `side`-type error.
    pub fn syndrome(&self, side: Pauli, e: &BitSet) -> Result<BitSet> {
        if e.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "error over {} qubits, code has {}",
                e.len(),
                self.n()
            )));
        }
        let g = self.check_graph(side);
        let mut s = BitSet::new(g.n_right());
        for q in e {
            for &c in g.left_neighbors(q) {
                s.toggle(c);
            }
        }
        Ok(s)
    }

    /// True iff `e ⊕ ê` is a sum of `side` stabilizer generators.
    pub fn equivalent(&self, side: Pauli, e: &BitSet, e_hat: &BitSet) -> bool {
        self.stabilizer_basis(side).contains(&e.xor(e_hat))
    }

    pub fn qubit_aa(&self, alpha: usize, a: usize) -> usize {
        alpha * self.n_a + a
    }

    pub fn qubit_bb(&self, b: usize, beta: usize) -> usize {
        self.n_a * self.n_a + b * self.n_b + beta
    }

    pub fn qubit_coord(&self, q: usize) -> QubitCoord {
        let split = self.n_a * self.n_a;
        if q < split {
            QubitCoord::AA(q / self.n_a, q % self.n_a)
        } else {
            let r = q - split;
            QubitCoord::BB(r / self.n_b, r % self.n_b)
        }
    }

    /// Index of the `H_X` row `(α, β)`.
    pub fn cx_index(&self, alpha: usize, beta: usize) -> usize {
        alpha * self.n_b + beta
    }

    /// Index of the `H_Z` row `(b, a)`.
    pub fn cz_index(&self, b: usize, a: usize) -> usize {
        b * self.n_a + a
    }

    pub fn rank_hx(&self) -> usize {
        self.syndrome_space(Pauli::X).rank()
    }

    pub fn rank_hz(&self) -> usize {
        self.syndrome_space(Pauli::Z).rank()
    }

    /// `k = n − rank H_X − rank H_Z`.
    pub fn k(&self) -> usize {
        self.n() - self.rank_hx() - self.rank_hz()
    }

    /// Column permutation `π` with `H'_X[:, π(q)] = H_Z[:, q]`, where `H'`
    /// is the product of the transposed seed.
    pub fn transposed_seed_permutation(&self) -> Vec<usize> {
        let (na2, nb2) = (self.n_a * self.n_a, self.n_b * self.n_b);
        (0..self.n())
            .map(|q| if q < na2 { nb2 + q } else { q - na2 })
            .collect()
    }

    /// Bounds on the adjacency-graph degree: for A² qubits
    /// `d_A² + 2 d_A (d_B − 1)`, for B² qubits `d_B² + 2 d_B (d_A − 1)`.
    pub fn adjacency_degree_bound(&self) -> usize {
        adjacency_degree_bound(self.d_a(), self.d_b())
    }
}

/// Maximum adjacency-graph degree of a product with seed degrees
/// `(d_A, d_B)`.
pub fn adjacency_degree_bound(d_a: usize, d_b: usize) -> usize {
    let bb = d_b * d_b + 2 * d_b * d_a.saturating_sub(1);
    let aa = d_a * d_a + 2 * d_a * d_b.saturating_sub(1);
    aa.max(bb)
}

/// Graph on qubits joining any two that share an X- or Z-type generator.
pub fn adjacency_graph(code: &CssCode) -> Graph {
    let n = code.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for m in [code.hx(), code.hz()] {
        for row in m.row_slice() {
            let support = row.to_indices();
            for &u in &support {
                adj[u].extend(support.iter().copied().filter(|&v| v != u));
            }
        }
    }
    let edges: Vec<(usize, usize)> = adj
        .iter_mut()
        .enumerate()
        .flat_map(|(u, nbrs)| {
            nbrs.sort_unstable();
            nbrs.dedup();
            nbrs.iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
                .collect::<Vec<_>>()
        })
        .collect();
    Graph::from_edges(n, &edges).expect("adjacency edges are in range")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub r: Rational,
    pub rank_hx: usize,
    pub rank_hz: usize,
    pub w0_bound: usize,
    pub t_ssf_bound: usize,
    pub d_x: Option<usize>,
    pub d_z: Option<usize>,
    pub d_min_exact: Option<usize>,
}

/// `min(γ_A n_A, γ_B n_B)`.
fn min_gamma_n(code: &CssCode, gamma_a: Rational, gamma_b: Rational) -> Rational {
    let a = gamma_a * Rational::from_integer(code.n_a() as i64);
    let b = gamma_b * Rational::from_integer(code.n_b() as i64);
    a.min(b)
}

/// `⌊ min(γ_A n_A, γ_B n_B) / (3(1 + d_B)) ⌋`.
pub fn w0_bound(code: &CssCode, gamma_a: Rational, gamma_b: Rational) -> usize {
    let denom = Rational::from_integer(3 * (1 + code.d_b() as i64));
    floor_count(&(min_gamma_n(code, gamma_a, gamma_b) / denom))
}

/// `⌊ rβ/(1+β) · min(γ_A n_A, γ_B n_B) ⌋` with `r = d_A/d_B`.
pub fn t_ssf_bound(code: &CssCode, beta: Rational, gamma_a: Rational, gamma_b: Rational) -> usize {
    let r = Rational::new(code.d_a() as i64, code.d_b() as i64);
    let one = Rational::from_integer(1);
    floor_count(&(r * beta / (one + beta) * min_gamma_n(code, gamma_a, gamma_b)))
}

/// Fills [`CodeParams`]. Distances are computed by exhaustive search when
/// it fits `distance_budget`, and left absent otherwise.
pub fn code_params(
    code: &CssCode,
    gamma_a: Rational,
    gamma_b: Rational,
    beta: Rational,
    distance_budget: u64,
) -> Result<CodeParams> {
    if beta <= Rational::from_integer(0) {
        return Err(Error::InvalidArgument(format!(
            "beta = {beta} must be positive"
        )));
    }
    let distance = |side: Pauli| -> Option<usize> {
        match min_weight_outside(
            code.check_matrix(side),
            code.stabilizer_basis(side),
            code.n(),
            distance_budget,
        ) {
            Ok(DistanceResult::Exact(d)) => Some(d),
            _ => None,
        }
    };
    let (d_x, d_z) = if code.k() == 0 {
        (None, None)
    } else {
        (distance(Pauli::X), distance(Pauli::Z))
    };
    let d_min_exact = match (d_x, d_z) {
        (Some(x), Some(z)) => Some(x.min(z)),
        _ => None,
    };
    Ok(CodeParams {
        n: code.n(),
        k: code.k(),
        n_a: code.n_a(),
        n_b: code.n_b(),
        d_a: code.d_a(),
        d_b: code.d_b(),
        r: Rational::new(code.d_a() as i64, code.d_b() as i64),
        rank_hx: code.rank_hx(),
        rank_hz: code.rank_hz(),
        w0_bound: w0_bound(code, gamma_a, gamma_b),
        t_ssf_bound: t_ssf_bound(code, beta, gamma_a, gamma_b),
        d_x,
        d_z,
        d_min_exact,
    })
}

/// JSON manifest stored next to a code bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub ordering: String,
    pub n_a: usize,
    pub n_b: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub n: usize,
    pub k: usize,
    pub biregular: bool,
    /// Set when `rank H < min(n_A, n_B)`.
    pub seed_rank_deficient: bool,
    pub expansion: Option<BTreeMap<String, String>>,
    pub build_seed: Option<u64>,
}

pub const SEED_FILE: &str = "seed.graph";
pub const HX_FILE: &str = "hx.txt";
pub const HZ_FILE: &str = "hz.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn manifest(code: &CssCode, build_seed: Option<u64>) -> Manifest {
    let h_rank = ParityMatrix::from_graph(code.seed()).rank();
    Manifest {
        schema: BUNDLE_SCHEMA,
        ordering: ORDERING_TAG.to_string(),
        n_a: code.n_a(),
        n_b: code.n_b(),
        d_a: code.d_a(),
        d_b: code.d_b(),
        n: code.n(),
        k: code.k(),
        biregular: code.seed().is_biregular(),
        seed_rank_deficient: h_rank < code.n_a().min(code.n_b()),
        expansion: code.expansion().map(|p| {
            [
                ("gamma_left", p.gamma_left),
                ("delta_left", p.delta_left),
                ("gamma_right", p.gamma_right),
                ("delta_right", p.delta_right),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
        }),
        build_seed,
    }
}

/// Writes seed graph, both parity matrices and the manifest into `dir`.
pub fn write_bundle(dir: &Path, code: &CssCode, build_seed: Option<u64>) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(SEED_FILE), code.seed().to_text())?;
    fs::write(dir.join(HX_FILE), code.hx().to_text())?;
    fs::write(dir.join(HZ_FILE), code.hz().to_text())?;
    let m = manifest(code, build_seed);
    fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&m)? + "\n",
    )?;
    Ok(m)
}

/// Rebuilds a code from a bundle and checks the stored matrices against
/// the reconstruction.
pub fn read_bundle(dir: &Path) -> Result<(CssCode, Manifest)> {
    let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    if m.schema != BUNDLE_SCHEMA || m.ordering != ORDERING_TAG {
        return Err(Error::Parse(format!(
            "unsupported bundle schema {} / ordering {:?}",
            m.schema, m.ordering
        )));
    }
    let seed = BipartiteGraph::parse_text(&fs::read_to_string(dir.join(SEED_FILE))?)?;
    let expansion = match &m.expansion {
        None => None,
        Some(map) => {
            let get = |k: &str| -> Result<Rational> {
                let v = map
                    .get(k)
                    .ok_or_else(|| Error::Parse(format!("manifest lacks {k}")))?;
                crate::rational::parse_rational(v)
            };
            Some(ExpansionParams::new(
                get("gamma_left")?,
                get("delta_left")?,
                get("gamma_right")?,
                get("delta_right")?,
            )?)
        }
    };
    let code = hypergraph_product(&seed, expansion)?;
    let hx = ParityMatrix::parse_text(&fs::read_to_string(dir.join(HX_FILE))?)?;
    let hz = ParityMatrix::parse_text(&fs::read_to_string(dir.join(HZ_FILE))?)?;
    if &hx != code.hx() || &hz != code.hz() {
        return Err(Error::InvariantViolation(
            "bundle matrices differ from the product of the seed graph".into(),
        ));
    }
    if m.n_a != code.n_a() || m.n_b != code.n_b() || m.n != code.n() {
        return Err(Error::InvariantViolation(
            "manifest dimensions disagree with the seed graph".into(),
        ));
    }
    Ok((code, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::DEFAULT_DISTANCE_BUDGET;
    use crate::graph::sample_biregular;

    fn single_edge() -> CssCode {
        let g = BipartiteGraph::from_edges(1, 1, &[(0, 0)]).unwrap();
        hypergraph_product(&g, None).unwrap()
    }

    pub(crate) fn rep2() -> CssCode {
        let g = BipartiteGraph::from_edges(2, 1, &[(0, 0), (1, 0)]).unwrap();
        hypergraph_product(&g, None).unwrap()
    }

    #[test]
    fn single_edge_product() {
        let c = single_edge();
        assert_eq!(c.n(), 2);
        let row = ParityMatrix::from_dense(&[vec![1, 1]]).unwrap();
        assert_eq!(c.hx(), &row);
        assert_eq!(c.hz(), &row);
        assert_eq!(c.k(), 0);
        let adj = adjacency_graph(&c);
        assert_eq!(adj.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn rep2_product() {
        let c = rep2();
        assert_eq!(c.n(), 5);
        assert!(c.k() >= 1);
        assert_eq!(c.k(), 5 - c.hx().rank() - c.hz().rank());
        let p = code_params(
            &c,
            Rational::new(1, 2),
            Rational::new(1, 2),
            Rational::new(1, 4),
            DEFAULT_DISTANCE_BUDGET,
        )
        .unwrap();
        assert_eq!(p.d_min_exact, Some(2));
    }

    #[test]
    fn factor_graph_rule() {
        let g = sample_biregular(8, 6, 3, 4, 21).unwrap();
        let c = hypergraph_product(&g, None).unwrap();
        for alpha in 0..8 {
            for beta in 0..6 {
                let row = c.hx().row(c.cx_index(alpha, beta));
                for a in 0..8 {
                    let adjacent = g.left_neighbors(a).contains(&beta);
                    assert_eq!(row.contains(c.qubit_aa(alpha, a)), adjacent);
                }
                for b in 0..6 {
                    let adjacent = g.left_neighbors(alpha).contains(&b);
                    assert_eq!(row.contains(c.qubit_bb(b, beta)), adjacent);
                }
            }
        }
        for q in 0..c.n() {
            let back = match c.qubit_coord(q) {
                QubitCoord::AA(alpha, a) => c.qubit_aa(alpha, a),
                QubitCoord::BB(b, beta) => c.qubit_bb(b, beta),
            };
            assert_eq!(back, q);
        }
    }

    #[test]
    fn weights_and_degree_bound() {
        assert_eq!(adjacency_degree_bound(38, 39), 4407);
        let g = sample_biregular(12, 9, 3, 4, 2).unwrap();
        let c = hypergraph_product(&g, None).unwrap();
        for m in [c.hx(), c.hz()] {
            assert!(m.row_weights().iter().all(|&w| w <= 7));
            assert!(m.col_weights().iter().all(|&w| w <= 4));
        }
        let adj = adjacency_graph(&c);
        assert!(adj.d_max() <= c.adjacency_degree_bound());
        for (u, v) in adj.edges() {
            let shared = [c.hx(), c.hz()]
                .iter()
                .any(|m| m.row_slice().iter().any(|r| r.contains(u) && r.contains(v)));
            assert!(shared);
        }
    }

    #[test]
    fn transposed_seed_swaps_roles() {
        let g = sample_biregular(8, 6, 3, 4, 5).unwrap();
        let c = hypergraph_product(&g, None).unwrap();
        let t = hypergraph_product(&g.transpose(), None).unwrap();
        let perm = c.transposed_seed_permutation();
        assert_eq!(t.hx().rows(), c.hz().rows());
        for r in 0..c.hz().rows() {
            let mapped = BitSet::from_indices(c.n(), c.hz().row(r).iter().map(|q| perm[q]));
            assert_eq!(&mapped, t.hx().row(r));
        }
    }

    #[test]
    fn bounds_scale_linearly() {
        let small = hypergraph_product(&sample_biregular(8, 6, 3, 4, 1).unwrap(), None).unwrap();
        let large = hypergraph_product(&sample_biregular(16, 12, 3, 4, 1).unwrap(), None).unwrap();
        let (ga, gb) = (Rational::new(1, 2), Rational::new(1, 2));
        assert_eq!(w0_bound(&small, ga, gb), 0);
        assert_eq!(t_ssf_bound(&small, Rational::new(1, 1000), ga, gb), 0);
        let beta = Rational::new(1, 2);
        // min(γn) = 3 vs 6, rβ/(1+β) = 1/4
        assert_eq!(t_ssf_bound(&small, beta, ga, gb), 0);
        assert_eq!(t_ssf_bound(&large, beta, ga, gb), 1);
        assert_eq!(
            t_ssf_bound(
                &large,
                beta,
                Rational::from_integer(4),
                Rational::from_integer(4)
            ),
            12
        );
    }

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = sample_biregular(8, 6, 3, 4, 5).unwrap();
        let params = ExpansionParams::new(
            Rational::new(1, 8),
            Rational::new(1, 4),
            Rational::new(1, 6),
            Rational::new(1, 4),
        )
        .unwrap();
        let c = hypergraph_product(&g, Some(params)).unwrap();
        let m = write_bundle(dir.path(), &c, Some(5)).unwrap();
        let (back, m2) = read_bundle(dir.path()).unwrap();
        assert_eq!(m, m2);
        assert_eq!(back.hx(), c.hx());
        assert_eq!(back.expansion(), c.expansion());
        fs::write(
            dir.path().join(HX_FILE),
            ParityMatrix::zeros(48, 100).to_text(),
        )
        .unwrap();
        assert!(matches!(
            read_bundle(dir.path()),
            Err(Error::InvariantViolation(_))
        ));
    }
}
