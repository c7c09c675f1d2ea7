//! Dynamic checks of decoder locality on recorded runs.
//!
//! A run on `σ(E)` with flips `F_0 … F_{f−1}` has support
//! `U = E ∪ ⋃ F_i`. For every connected component `K` of `U` in the
//! adjacency graph, the flips inside `K` replayed against the restricted
//! syndromes `σ_i ∩ C_K`, with `C_K` the checks touching `K`, must form a
//! valid execution on input `σ(E ∩ K)`.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph};
use crate::hgp::{adjacency_graph, CssCode, Pauli};
use crate::percolation::{max_conn_alpha, MaxConn};
use crate::rational::Rational;
use crate::ssf::{
    check_equivalence, decode_ssf, CatalogEntry, DecodeRun, DecoderParams, FlipCatalog, Mode,
    Termination,
};

/// Checks touching `k` on the syndrome side.
pub fn check_neighborhood(code: &CssCode, side: Pauli, k: &BitSet) -> BitSet {
    let g = code.check_graph(side);
    let mut out = BitSet::new(g.n_right());
    for q in k {
        for &c in g.left_neighbors(q) {
            out.insert(c);
        }
    }
    out
}

/// `σ(W ∩ K) = σ(W) ∩ C_K` for `W ⊆ U` and `K` a component of `U`.
pub fn verify_syndrome_restriction(
    code: &CssCode,
    side: Pauli,
    u: &BitSet,
    w: &BitSet,
    k: &BitSet,
) -> Result<bool> {
    if !w.is_subset(u) {
        return Err(Error::PreconditionViolated(
            "w is not contained in the support U".into(),
        ));
    }
    let lhs = code.syndrome(side, &w.and(k))?;
    let mut rhs = code.syndrome(side, w)?;
    rhs.and_assign(&check_neighborhood(code, side, k));
    Ok(lhs == rhs)
}

/// Per-component record of a locality audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub qubits: Vec<usize>,
    /// `C_K`
    pub checks: Vec<usize>,
    /// Indices `i` of the original flips with `F_i ⊆ K`.
    pub steps: Vec<usize>,
    /// `σ(E ∩ K) = σ(E) ∩ C_K` and the same for every flip.
    pub syndrome_restriction: bool,
    /// `Δ(σ_i ∩ C_K, F) ≤ Δ(σ_i, F)` for all entries, with equality
    /// inside `K`, at every recorded step.
    pub delta_restriction: bool,
    /// Conditions (i)–(v) of the restricted execution.
    pub replay: bool,
    /// Running the decoder afresh on `σ(E ∩ K)` picks exactly the same
    /// flips (informational; ties may legitimately diverge).
    pub fresh_run_identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub side: Pauli,
    pub support_size: usize,
    pub error_weight: usize,
    pub flips: usize,
    pub components: Vec<ComponentRecord>,
    /// Largest qubit degree in the syndrome-side factor graph.
    pub qubit_degree: usize,
    /// `E ⊆ U` and `|U| ≤ |E|(1 + D/(β d_B))` with `D` the qubit degree;
    /// `None` when the guard has no β.
    pub support_bound: Option<bool>,
    /// `|U| ≤ (1+β)/β · |E ∩ U|`, meaningful when `D ≤ d_B`.
    pub alpha_subset: Option<bool>,
    pub pass: bool,
}

/// Shared state for auditing many runs on one code and side.
pub struct Auditor<'c> {
    code: &'c CssCode,
    catalog: &'c FlipCatalog,
    graph: Graph,
    /// Every catalog entry with its size and syndrome.
    entries: Vec<(CatalogEntry, usize, Vec<usize>)>,
}

fn score(sigma: &BitSet, sf: &[usize]) -> i64 {
    2 * sf.iter().filter(|&&c| sigma.contains(c)).count() as i64 - sf.len() as i64
}

impl<'c> Auditor<'c> {
    pub fn new(code: &'c CssCode, catalog: &'c FlipCatalog) -> Self {
        let entries = catalog
            .entries()
            .map(|e| {
                (
                    e,
                    e.mask.count_ones() as usize,
                    catalog.syndrome(e).to_indices(),
                )
            })
            .collect();
        Auditor {
            code,
            catalog,
            graph: adjacency_graph(code),
            entries,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    fn side(&self) -> Pauli {
        self.catalog.side()
    }

    /// Comparison of `Δ` on `σ` and on `σ ∩ C_K` over the whole
    /// catalog.
    pub fn verify_delta_restriction(&self, sigma: &BitSet, k: &BitSet) -> bool {
        let ck = check_neighborhood(self.code, self.side(), k);
        let restricted = sigma.and(&ck);
        self.entries.iter().all(|(entry, _, sf)| {
            let full = score(sigma, sf);
            let local = score(&restricted, sf);
            let inside = self.catalog.qubits(*entry).iter().all(|&q| k.contains(q));
            local <= full && (!inside || local == full)
        })
    }

    fn best_score(&self, sigma: &BitSet) -> Option<(i64, usize)> {
        self.entries
            .iter()
            .map(|(_, size, sf)| (score(sigma, sf), *size))
            .max_by(|a, b| (a.0 * b.1 as i64).cmp(&(b.0 * a.1 as i64)))
    }

    fn any_guarded(&self, sigma: &BitSet, params: &DecoderParams) -> bool {
        let d_b = self.catalog.d_b();
        self.entries
            .iter()
            .any(|(_, size, sf)| params.guard(score(sigma, sf), *size, d_b))
    }

    /// Replays every component of the support of `run` (decoded from
    /// `σ(e)`) as an independent execution.
    pub fn verify_locality(
        &self,
        e: &BitSet,
        run: &DecodeRun,
        params: &DecoderParams,
    ) -> Result<LocalityReport> {
        let side = self.side();
        if run.side != side {
            return Err(Error::InvalidArgument(
                "run and catalog are for different sides".into(),
            ));
        }
        let mismatch = |condition: String, step: usize| Error::ReplayMismatch { condition, step };
        let sigma0 = self.code.syndrome(side, e)?;
        if sigma0 != run.sigma0 {
            return Err(Error::PreconditionViolated(
                "run was not started from σ(e)".into(),
            ));
        }
        let f = run.flip_count();
        let syndromes = run.syndromes(self.catalog);
        let u = run.support(Some(e));
        let flip_sets: Vec<BitSet> = run
            .flips
            .iter()
            .map(|fl| BitSet::from_indices(self.code.n(), fl.iter().copied()))
            .collect();
        let stopped = run.termination != Termination::FlipCapHit;

        let mut components = Vec::new();
        for k in connected_components(&self.graph, &u) {
            let ck = check_neighborhood(self.code, side, &k);
            let mut steps = Vec::new();
            for (i, fs) in flip_sets.iter().enumerate() {
                if fs.is_subset(&k) {
                    steps.push(i);
                } else if !fs.is_disjoint(&k) {
                    return Err(mismatch(
                        format!("flip {i} straddles a component boundary"),
                        i,
                    ));
                }
            }

            let mut syndrome_restriction = verify_syndrome_restriction(self.code, side, &u, e, &k)?;
            for fs in &flip_sets {
                syndrome_restriction &= verify_syndrome_restriction(self.code, side, &u, fs, &k)?;
            }
            let mut delta_restriction = true;
            for &i in &steps {
                delta_restriction &= self.verify_delta_restriction(&syndromes[i], &k);
            }

            // restricted execution σ'_0 = σ(E ∩ K), σ'_{j+1} = σ'_j ⊕ σ(F'_j)
            let ek = e.and(&k);
            let mut sigma = self.code.syndrome(side, &ek)?;
            let mut estimate = BitSet::new(self.code.n());
            let mut covered = ek.clone();
            let d_b = self.catalog.d_b();
            let check_step = |j_step: usize, sigma: &BitSet| -> Result<()> {
                if *sigma != syndromes[j_step].and(&ck) {
                    return Err(mismatch(
                        "restricted syndrome differs from σ_i ∩ C_K".into(),
                        j_step,
                    ));
                }
                Ok(())
            };
            for &i in &steps {
                check_step(i, &sigma)?;
                let (_, size, sf) = &self.entries_for(run.entries[i]);
                let num = score(&sigma, sf);
                if let Some((bn, bs)) = self.best_score(&sigma) {
                    if bn * *size as i64 > num * bs as i64 {
                        return Err(mismatch(
                            "(iii) restricted flip is not a maximiser".into(),
                            i,
                        ));
                    }
                }
                if !params.guard(num, *size, d_b) {
                    return Err(mismatch("(iv) restricted flip fails the guard".into(), i));
                }
                for &c in sf {
                    sigma.toggle(c);
                }
                estimate.xor_assign(&flip_sets[i]);
                covered.or_assign(&flip_sets[i]);
            }
            check_step(f, &sigma)?;
            if estimate != run.estimate.and(&k) {
                return Err(mismatch(
                    "(i) restricted output differs from Ê ∩ K".into(),
                    f,
                ));
            }
            if covered != k {
                return Err(mismatch("(ii) restricted support differs from K".into(), f));
            }
            if stopped && !sigma.is_empty() && self.any_guarded(&sigma, params) {
                return Err(mismatch(
                    "(v) restricted execution could continue".into(),
                    f,
                ));
            }

            let fresh = decode_ssf(
                self.code,
                self.catalog,
                &self.code.syndrome(side, &ek)?,
                params,
            )?;
            let fresh_run_identical = fresh.entries.len() == steps.len()
                && fresh
                    .entries
                    .iter()
                    .zip(&steps)
                    .all(|(a, &i)| *a == run.entries[i]);

            components.push(ComponentRecord {
                qubits: k.to_indices(),
                checks: ck.to_indices(),
                steps,
                syndrome_restriction,
                delta_restriction,
                replay: true,
                fresh_run_identical,
            });
        }

        let qubit_degree = self
            .code
            .check_graph(side)
            .adj_left()
            .iter()
            .map(|a| a.len())
            .max()
            .unwrap_or(0);
        let (support_bound, alpha_subset) = match params.mode {
            Mode::Alg1 => (None, None),
            Mode::Alg2 => {
                let beta = params.beta;
                let d_b = self.catalog.d_b() as i64;
                let (ue, ee) = (u.count() as i64, e.count() as i64);
                // |U| − |E| ≤ Σ|F_i| ≤ D|E|/(β d_B)
                let lhs = (ue - ee) * beta.numer() * d_b;
                let rhs = qubit_degree as i64 * ee * beta.denom();
                let bound = e.is_subset(&u) && lhs <= rhs;
                let alpha: Rational = beta / (Rational::one() + beta);
                let alpha_ok =
                    (u.intersection_count(e) as i64) * alpha.denom() >= alpha.numer() * ue;
                (Some(bound), Some(alpha_ok))
            }
        };
        let degree_form = qubit_degree <= self.catalog.d_b();
        if support_bound == Some(false) || (degree_form && alpha_subset == Some(false)) {
            return Err(mismatch("support exceeds its flip-count bound".into(), f));
        }
        let pass = components
            .iter()
            .all(|c| c.syndrome_restriction && c.delta_restriction && c.replay);
        Ok(LocalityReport {
            side,
            support_size: u.count(),
            error_weight: e.count(),
            flips: f,
            components,
            qubit_degree,
            support_bound,
            alpha_subset,
            pass,
        })
    }

    fn entries_for(&self, entry: CatalogEntry) -> (CatalogEntry, usize, Vec<usize>) {
        (
            entry,
            entry.mask.count_ones() as usize,
            self.catalog.syndrome(entry).to_indices(),
        )
    }

    /// If `MaxConn_α(e) ≤ t` with `α = β/(1+β)`, decoding `σ(e)` must
    /// succeed.
    pub fn verify_correction_criterion(
        &self,
        e: &BitSet,
        params: &DecoderParams,
        t: usize,
        budget: u64,
    ) -> Result<CorrectionOutcome> {
        if params.mode != Mode::Alg2 {
            return Err(Error::InvalidArgument(
                "the correction criterion needs a guard with β > 0".into(),
            ));
        }
        let alpha = params.alpha();
        let max_conn = max_conn_alpha(&self.graph, e, alpha, t + 1, budget, None)?;
        let applies = max_conn.value <= t && !max_conn.cap_hit;
        let side = self.side();
        let run = decode_ssf(
            self.code,
            self.catalog,
            &self.code.syndrome(side, e)?,
            params,
        )?;
        let corrected = run.converged() && check_equivalence(self.code, e, &run.estimate, side);
        Ok(CorrectionOutcome {
            max_conn,
            applies,
            corrected,
            holds: !applies || corrected,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionOutcome {
    pub max_conn: MaxConn,
    /// `MaxConn_α(e) ≤ t`
    pub applies: bool,
    pub corrected: bool,
    pub holds: bool,
}

/// One-shot form of [`Auditor::verify_locality`].
pub fn verify_locality(
    code: &CssCode,
    catalog: &FlipCatalog,
    e: &BitSet,
    run: &DecodeRun,
    params: &DecoderParams,
) -> Result<LocalityReport> {
    Auditor::new(code, catalog).verify_locality(e, run, params)
}

/// One-shot form of [`Auditor::verify_delta_restriction`].
pub fn verify_delta_restriction(
    code: &CssCode,
    catalog: &FlipCatalog,
    sigma: &BitSet,
    k: &BitSet,
) -> bool {
    Auditor::new(code, catalog).verify_delta_restriction(sigma, k)
}

/// One-shot form of [`Auditor::verify_correction_criterion`].
pub fn verify_correction_criterion(
    code: &CssCode,
    catalog: &FlipCatalog,
    e: &BitSet,
    params: &DecoderParams,
    t: usize,
) -> Result<CorrectionOutcome> {
    Auditor::new(code, catalog).verify_correction_criterion(
        e,
        params,
        t,
        crate::graph::DEFAULT_ENUMERATION_BUDGET,
    )
}
