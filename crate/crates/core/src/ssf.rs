//! Small-set-flip decoding.
//!
//! Each step flips the subset `F` of one generator's support that
//! maximises the per-qubit syndrome decrease
//! `Δ(σ, F) = (|σ| − |σ ⊕ σ(F)|)/|F|`, and stops when the maximiser fails
//! the loop guard.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::hgp::{CssCode, Pauli};
use crate::rational::Rational;

pub use crate::hgp::t_ssf_bound;

/// Cap on the total number of catalog entries.
pub const DEFAULT_CATALOG_BUDGET: u64 = 1 << 24;
const MAX_SUPPORT: usize = 30;
const MAX_LOCAL_CHECKS: usize = 128;

/// All nonempty subsets of every generator support on one side, with
/// their syndromes stored as bit masks over the generator's local checks.
#[derive(Debug, Clone)]
pub struct FlipCatalog {
    side: Pauli,
    d_b: usize,
    n_qubits: usize,
    n_checks: usize,
    supports: Vec<Vec<usize>>,
    local_checks: Vec<Vec<usize>>,
    /// `tables[g][mask]` is the local syndrome of the subset `mask`.
    tables: Vec<Vec<u128>>,
    /// For each check, the generators whose local set contains it and the
    /// bit position there.
    check_gens: Vec<Vec<(u32, u8)>>,
}

/// One catalog entry: bit `j` of `mask` selects the `j`-th qubit of the
/// generator's sorted support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub generator: usize,
    pub mask: u32,
}

pub fn build_flip_catalog(code: &CssCode, side: Pauli) -> Result<FlipCatalog> {
    build_flip_catalog_with_budget(code, side, DEFAULT_CATALOG_BUDGET)
}

pub fn build_flip_catalog_with_budget(
    code: &CssCode,
    side: Pauli,
    budget: u64,
) -> Result<FlipCatalog> {
    if code.d_a() + code.d_b() > MAX_SUPPORT {
        return Err(Error::BudgetExceeded(format!(
            "d_A + d_B = {} exceeds {MAX_SUPPORT}",
            code.d_a() + code.d_b()
        )));
    }
    let stab = code.stabilizer_matrix(side);
    let checks = code.check_graph(side);
    let supports: Vec<Vec<usize>> = stab.row_slice().iter().map(BitSet::to_indices).collect();
    let total: u64 = supports.iter().map(|s| (1u64 << s.len()) - 1).sum();
    if total > budget {
        return Err(Error::BudgetExceeded(format!(
            "{total} catalog entries exceed budget {budget}"
        )));
    }
    let n_checks = checks.n_right();
    let mut local_checks = Vec::with_capacity(supports.len());
    let mut tables = Vec::with_capacity(supports.len());
    let mut check_gens = vec![Vec::new(); n_checks];
    let mut pos = vec![u8::MAX; n_checks];
    for (g, support) in supports.iter().enumerate() {
        let mut local: Vec<usize> = support
            .iter()
            .flat_map(|&q| checks.left_neighbors(q).iter().copied())
            .collect();
        local.sort_unstable();
        local.dedup();
        if local.len() > MAX_LOCAL_CHECKS {
            return Err(Error::BudgetExceeded(format!(
                "generator {g} touches {} checks, more than {MAX_LOCAL_CHECKS}",
                local.len()
            )));
        }
        for (j, &c) in local.iter().enumerate() {
            pos[c] = j as u8;
            check_gens[c].push((g as u32, j as u8));
        }
        let qubit_masks: Vec<u128> = support
            .iter()
            .map(|&q| {
                checks
                    .left_neighbors(q)
                    .iter()
                    .fold(0u128, |m, &c| m ^ (1u128 << pos[c]))
            })
            .collect();
        let mut table = vec![0u128; 1usize << support.len()];
        for mask in 1..table.len() {
            let low = mask.trailing_zeros() as usize;
            table[mask] = table[mask & (mask - 1)] ^ qubit_masks[low];
        }
        local_checks.push(local);
        tables.push(table);
    }
    Ok(FlipCatalog {
        side,
        d_b: code.d_b(),
        n_qubits: code.n(),
        n_checks,
        supports,
        local_checks,
        tables,
        check_gens,
    })
}

impl FlipCatalog {
    pub fn side(&self) -> Pauli {
        self.side
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn n_generators(&self) -> usize {
        self.supports.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn support(&self, g: usize) -> &[usize] {
        &self.supports[g]
    }

    pub fn local_checks(&self, g: usize) -> &[usize] {
        &self.local_checks[g]
    }

    /// Number of entries, `Σ_g (2^{|support(g)|} − 1)`.
    pub fn len(&self) -> usize {
        self.tables.iter().map(|t| t.len() - 1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries in catalog order: by generator, then by mask.
    pub fn entries(&self) -> impl Iterator<Item = CatalogEntry> + '_ {
        self.tables.iter().enumerate().flat_map(|(g, t)| {
            (1..t.len() as u32).map(move |mask| CatalogEntry { generator: g, mask })
        })
    }

    pub fn qubits(&self, entry: CatalogEntry) -> Vec<usize> {
        let support = &self.supports[entry.generator];
        (0..support.len())
            .filter(|&j| entry.mask >> j & 1 == 1)
            .map(|j| support[j])
            .collect()
    }

    pub fn qubit_set(&self, entry: CatalogEntry) -> BitSet {
        BitSet::from_indices(self.n_qubits, self.qubits(entry))
    }

    /// Stored syndrome `σ(F)` of an entry as a check set.
    pub fn syndrome(&self, entry: CatalogEntry) -> BitSet {
        let local = &self.local_checks[entry.generator];
        let m = self.tables[entry.generator][entry.mask as usize];
        BitSet::from_indices(
            self.n_checks,
            (0..local.len())
                .filter(|&j| m >> j & 1 == 1)
                .map(|j| local[j]),
        )
    }

    /// Local view of `σ` on the checks of generator `g`.
    fn local_mask(&self, g: usize, sigma: &BitSet) -> u128 {
        self.local_checks[g]
            .iter()
            .enumerate()
            .fold(
                0u128,
                |m, (j, &c)| if sigma.contains(c) { m | 1u128 << j } else { m },
            )
    }

    /// Best entry of generator `g` against local syndrome `s`. With
    /// `positive_only`, entries with `Δ ≤ 0` are skipped.
    fn best_in(&self, g: usize, s: u128, positive_only: bool) -> Option<Candidate> {
        let table = &self.tables[g];
        let mut best: Option<Candidate> = None;
        for (mask, &t) in table.iter().enumerate().skip(1) {
            let num = 2 * (t & s).count_ones() as i32 - t.count_ones() as i32;
            if positive_only && num < 1 {
                continue;
            }
            let cand = Candidate {
                num,
                size: (mask as u32).count_ones() as u8,
                generator: g as u32,
                mask: mask as u32,
            };
            if best.map_or(true, |b| cand > b) {
                best = Some(cand);
            }
        }
        best
    }

    /// Best entry over the whole catalog (including non-positive ones).
    fn best_full_scan(&self, sigma: &BitSet) -> Option<Candidate> {
        (0..self.n_generators())
            .filter_map(|g| self.best_in(g, self.local_mask(g, sigma), false))
            .max()
    }
}

/// A scored catalog entry. Greater means preferred: larger `Δ`, then
/// smaller `|F|`, smaller generator, smaller mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Candidate {
    /// `|σ| − |σ ⊕ σ(F)|`
    num: i32,
    size: u8,
    generator: u32,
    mask: u32,
}

impl Ord for Candidate {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.num as i64 * o.size as i64)
            .cmp(&(o.num as i64 * self.size as i64))
            .then(o.size.cmp(&self.size))
            .then(o.generator.cmp(&self.generator))
            .then(o.mask.cmp(&self.mask))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Candidate {
    fn entry(&self) -> CatalogEntry {
        CatalogEntry {
            generator: self.generator as usize,
            mask: self.mask,
        }
    }
}

/// `Δ(σ, F) = (2|σ(F) ∩ σ| − |σ(F)|)/|F|`, computed from the check graph.
pub fn delta(code: &CssCode, side: Pauli, sigma: &BitSet, f: &BitSet) -> Result<Rational> {
    if f.is_empty() {
        return Err(Error::InvalidArgument(
            "Δ is undefined for an empty flip set".into(),
        ));
    }
    let sf = code.syndrome(side, f)?;
    let num = 2 * sf.intersection_count(sigma) as i64 - sf.count() as i64;
    Ok(Rational::new(num, f.count() as i64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Guard: the syndrome weight decreases by at least one.
    Alg1,
    /// Guard: the decrease is at least `β·d_B·|F|`.
    Alg2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanMode {
    /// Re-evaluate only generators whose local syndrome changed.
    Incremental,
    /// Re-evaluate the whole catalog every step.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderParams {
    pub beta: Rational,
    pub mode: Mode,
    /// Explicit flip cap; hitting it ends the run with `FlipCapHit`. When
    /// absent the proven bound plus one is used and exceeding it is an
    /// invariant violation.
    pub max_flips: Option<usize>,
    pub scan: ScanMode,
}

impl DecoderParams {
    pub fn alg1() -> Self {
        DecoderParams {
            beta: Rational::from_integer(0),
            mode: Mode::Alg1,
            max_flips: None,
            scan: ScanMode::Incremental,
        }
    }

    pub fn alg2(beta: Rational) -> Result<Self> {
        let p = DecoderParams {
            beta,
            mode: Mode::Alg2,
            max_flips: None,
            scan: ScanMode::Incremental,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::Alg2
            && (self.beta <= Rational::from_integer(0) || self.beta > Rational::from_integer(1))
        {
            return Err(Error::InvalidArgument(format!(
                "beta = {} not in (0, 1]",
                self.beta
            )));
        }
        Ok(())
    }

    /// `α = β/(1+β)`.
    pub fn alpha(&self) -> Rational {
        self.beta / (Rational::from_integer(1) + self.beta)
    }

    /// Loop guard on a decrease `num` achieved by flipping `size` qubits.
    pub fn guard(&self, num: i64, size: usize, d_b: usize) -> bool {
        match self.mode {
            Mode::Alg1 => num >= 1,
            Mode::Alg2 => num * self.beta.denom() >= self.beta.numer() * d_b as i64 * size as i64,
        }
    }

    fn default_cap(&self, sigma_weight: usize, d_b: usize) -> usize {
        match self.mode {
            Mode::Alg1 => sigma_weight + 1,
            Mode::Alg2 => {
                let num = sigma_weight as i64 * self.beta.denom();
                let den = self.beta.numer() * d_b as i64;
                (num + den - 1).div_euclid(den) as usize + 1
            }
        }
    }
}

/// `(r, β₀)` with `r = d_A/d_B` and `β₀ = r/2·[1 − 4(δ_A + δ_B + (δ_B − δ_A)²)]`.
/// With `guarantee`, a non-positive `β₀` is an error.
pub fn beta0(
    d_a: usize,
    d_b: usize,
    delta_a: Rational,
    delta_b: Rational,
    guarantee: bool,
) -> Result<(Rational, Rational)> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    for (name, d) in [("delta_A", delta_a), ("delta_B", delta_b)] {
        if d <= zero || d >= one {
            return Err(Error::InvalidArgument(format!(
                "{name} = {d} not in (0, 1)"
            )));
        }
    }
    if d_a == 0 || d_b == 0 {
        return Err(Error::InvalidArgument("degrees must be positive".into()));
    }
    let r = Rational::new(d_a as i64, d_b as i64);
    let diff = delta_b - delta_a;
    let b0 = r / Rational::from_integer(2)
        * (one - Rational::from_integer(4) * (delta_a + delta_b + diff * diff));
    if guarantee && b0 <= zero {
        return Err(Error::NegativeBeta(b0.to_string()));
    }
    Ok((r, b0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    Stalled,
    FlipCapHit,
}

/// Full record of one decoder execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeRun {
    pub side: Pauli,
    pub sigma0: BitSet,
    pub entries: Vec<CatalogEntry>,
    pub flips: Vec<Vec<usize>>,
    /// `|σ_i|` for `i = 0..=f`.
    pub weights: Vec<usize>,
    pub estimate: BitSet,
    pub residual: BitSet,
    pub termination: Termination,
}

impl DecodeRun {
    pub fn flip_count(&self) -> usize {
        self.flips.len()
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// `U = E ∪ ⋃ F_i`, or `⋃ F_i` when the error is unknown.
    pub fn support(&self, e: Option<&BitSet>) -> BitSet {
        let mut u = e
            .cloned()
            .unwrap_or_else(|| BitSet::new(self.estimate.len()));
        for f in &self.flips {
            for &q in f {
                u.insert(q);
            }
        }
        u
    }

    /// Reconstructs `σ_0, …, σ_f` from the catalog.
    pub fn syndromes(&self, catalog: &FlipCatalog) -> Vec<BitSet> {
        let mut out = Vec::with_capacity(self.entries.len() + 1);
        let mut s = self.sigma0.clone();
        out.push(s.clone());
        for &e in &self.entries {
            s.xor_assign(&catalog.syndrome(e));
            out.push(s.clone());
        }
        out
    }
}

struct IncrementalState<'c> {
    catalog: &'c FlipCatalog,
    sigma: BitSet,
    local: Vec<u128>,
    best: Vec<Option<Candidate>>,
    ranked: BTreeSet<Candidate>,
    dirty: Vec<u32>,
    is_dirty: Vec<bool>,
}

impl<'c> IncrementalState<'c> {
    fn new(catalog: &'c FlipCatalog, sigma: &BitSet) -> Self {
        let n_gens = catalog.n_generators();
        let mut st = IncrementalState {
            catalog,
            sigma: sigma.clone(),
            local: vec![0; n_gens],
            best: vec![None; n_gens],
            ranked: BTreeSet::new(),
            dirty: Vec::new(),
            is_dirty: vec![false; n_gens],
        };
        for c in sigma {
            for &(g, j) in &catalog.check_gens[c] {
                st.local[g as usize] |= 1u128 << j;
                st.mark(g);
            }
        }
        st.refresh();
        st
    }

    fn mark(&mut self, g: u32) {
        if !self.is_dirty[g as usize] {
            self.is_dirty[g as usize] = true;
            self.dirty.push(g);
        }
    }

    fn refresh(&mut self) {
        for g in std::mem::take(&mut self.dirty) {
            let g = g as usize;
            self.is_dirty[g] = false;
            if let Some(old) = self.best[g].take() {
                self.ranked.remove(&old);
            }
            let s = self.local[g];
            let best = if s == 0 {
                None
            } else {
                self.catalog.best_in(g, s, true)
            };
            if let Some(b) = best {
                self.ranked.insert(b);
            }
            self.best[g] = best;
        }
    }

    fn top(&self) -> Option<Candidate> {
        self.ranked.last().copied()
    }

    fn apply(&mut self, checks: &[usize]) {
        for &c in checks {
            self.sigma.toggle(c);
            for &(g, j) in &self.catalog.check_gens[c] {
                self.local[g as usize] ^= 1u128 << j;
                self.mark(g);
            }
        }
        self.refresh();
    }
}

/// Runs the decoder on syndrome `sigma`.
pub fn decode_ssf(
    code: &CssCode,
    catalog: &FlipCatalog,
    sigma: &BitSet,
    params: &DecoderParams,
) -> Result<DecodeRun> {
    params.validate()?;
    if sigma.len() != catalog.n_checks() {
        return Err(Error::DimensionMismatch(format!(
            "syndrome over {} checks, catalog has {}",
            sigma.len(),
            catalog.n_checks()
        )));
    }
    let d_b = catalog.d_b();
    let default_cap = params.default_cap(sigma.count(), d_b);
    let cap = params.max_flips.unwrap_or(default_cap);
    let mut state = IncrementalState::new(catalog, sigma);
    let mut full_sigma = sigma.clone();
    let mut run = DecodeRun {
        side: catalog.side(),
        sigma0: sigma.clone(),
        entries: Vec::new(),
        flips: Vec::new(),
        weights: vec![sigma.count()],
        estimate: BitSet::new(catalog.n_qubits()),
        residual: BitSet::new(catalog.n_checks()),
        termination: Termination::Stalled,
    };
    loop {
        let current = match params.scan {
            ScanMode::Incremental => &state.sigma,
            ScanMode::Full => &full_sigma,
        };
        if current.is_empty() {
            run.termination = Termination::Converged;
            break;
        }
        let top = match params.scan {
            ScanMode::Incremental => state.top(),
            ScanMode::Full => catalog.best_full_scan(&full_sigma),
        };
        let Some(top) = top.filter(|t| params.guard(t.num as i64, t.size as usize, d_b)) else {
            run.termination = Termination::Stalled;
            break;
        };
        if run.entries.len() >= cap {
            if params.max_flips.is_some() {
                run.termination = Termination::FlipCapHit;
                break;
            }
            return Err(Error::InvariantViolation(format!(
                "decoder exceeded its proven flip bound {default_cap}"
            )));
        }
        let entry = top.entry();
        let qubits = catalog.qubits(entry);
        let checks = catalog.syndrome(entry);
        match params.scan {
            ScanMode::Incremental => state.apply(&checks.to_indices()),
            ScanMode::Full => full_sigma.xor_assign(&checks),
        }
        for &q in &qubits {
            run.estimate.toggle(q);
        }
        run.entries.push(entry);
        run.flips.push(qubits);
        let w = match params.scan {
            ScanMode::Incremental => state.sigma.count(),
            ScanMode::Full => full_sigma.count(),
        };
        run.weights.push(w);
    }
    run.residual = match params.scan {
        ScanMode::Incremental => state.sigma,
        ScanMode::Full => full_sigma,
    };
    if run.termination == Termination::Stalled
        && !code.syndrome_space(catalog.side()).contains(sigma)
    {
        return Err(Error::UnreachableSyndrome);
    }
    Ok(run)
}

/// First catalog entry (in catalog order) meeting the guard, if any.
pub fn find_progress_move(
    catalog: &FlipCatalog,
    sigma: &BitSet,
    params: &DecoderParams,
) -> Option<CatalogEntry> {
    (0..catalog.n_generators()).find_map(|g| {
        let s = catalog.local_mask(g, sigma);
        let table = &catalog.tables[g];
        (1..table.len()).find_map(|mask| {
            let t = table[mask];
            let num = 2 * (t & s).count_ones() as i64 - t.count_ones() as i64;
            params
                .guard(num, (mask as u32).count_ones() as usize, catalog.d_b())
                .then_some(CatalogEntry {
                    generator: g,
                    mask: mask as u32,
                })
        })
    })
}

/// True iff `e ⊕ ê` lies in the stabilizer row space for `side`.
pub fn check_equivalence(code: &CssCode, e: &BitSet, e_hat: &BitSet, side: Pauli) -> bool {
    code.equivalent(side, e, e_hat)
}

/// Outcome of decoding every error of weight `1, 2, …` on one side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionSweep {
    /// Largest `w` such that every error of weight at most `w` was corrected.
    pub t_star: usize,
    /// Errors decoded.
    pub checked: u64,
    /// Lexicographically first uncorrected error of weight `t_star + 1`.
    pub first_failure: Option<Vec<usize>>,
    /// Runs with more than `|σ₀|/(β·d_B)` flips (alg2 only).
    pub flip_bound_violations: u64,
    /// True when the sweep stopped because the next weight would exceed
    /// the error budget rather than on a failure or at `w_max`.
    pub budget_stop: bool,
}

/// Decodes all errors of weight up to `w_max` in increasing weight and
/// stops at the first weight containing an uncorrected error. A weight is
/// started only if all its `C(n, w)` errors fit in the remaining `budget`.
pub fn exhaustive_correction_weight(
    code: &CssCode,
    catalog: &FlipCatalog,
    params: &DecoderParams,
    w_max: usize,
    budget: u64,
) -> Result<CorrectionSweep> {
    let side = catalog.side();
    let n = code.n();
    let d_b = Rational::from_integer(catalog.d_b() as i64);
    let mut sweep = CorrectionSweep {
        t_star: 0,
        checked: 0,
        first_failure: None,
        flip_bound_violations: 0,
        budget_stop: false,
    };
    for w in 1..=w_max.min(n) {
        let total = binomial(n as u64, w as u64);
        if total.map_or(true, |t| t > budget - sweep.checked) {
            sweep.budget_stop = true;
            break;
        }
        let mut combo: Vec<usize> = (0..w).collect();
        loop {
            let e = BitSet::from_indices(n, combo.iter().copied());
            let sigma = code.syndrome(side, &e)?;
            let run = decode_ssf(code, catalog, &sigma, params)?;
            sweep.checked += 1;
            if params.mode == Mode::Alg2 {
                let cost = Rational::from_integer(run.flip_count() as i64) * params.beta * d_b;
                if cost > Rational::from_integer(sigma.count() as i64) {
                    sweep.flip_bound_violations += 1;
                }
            }
            if !(run.converged() && code.equivalent(side, &e, &run.estimate))
                && sweep.first_failure.is_none()
            {
                sweep.first_failure = Some(combo.clone());
            }
            if !crate::graph::next_combination(&mut combo, n) {
                break;
            }
        }
        if sweep.first_failure.is_some() {
            return Ok(sweep);
        }
        sweep.t_star = w;
    }
    Ok(sweep)
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    (0..k).try_fold(1u64, |acc, i| acc.checked_mul(n - i).map(|v| v / (i + 1)))
}

/// Re-checks a recorded run against the catalog using only the code's
/// check graph: syndrome updates, guards, maximality of every flip and
/// the final stopping condition.
pub fn verify_trace(
    code: &CssCode,
    catalog: &FlipCatalog,
    run: &DecodeRun,
    params: &DecoderParams,
) -> Result<()> {
    let side = run.side;
    let d_b = catalog.d_b();
    let entries: Vec<(CatalogEntry, BitSet)> = catalog
        .entries()
        .map(|e| {
            (
                e,
                code.syndrome(side, &catalog.qubit_set(e)).expect("sized"),
            )
        })
        .collect();
    let score =
        |sigma: &BitSet, sf: &BitSet| 2 * sf.intersection_count(sigma) as i64 - sf.count() as i64;
    let mismatch = |condition: &str, step: usize| Error::ReplayMismatch {
        condition: condition.to_string(),
        step,
    };
    let mut sigma = run.sigma0.clone();
    for (i, (&entry, qubits)) in run.entries.iter().zip(&run.flips).enumerate() {
        if sigma.count() != run.weights[i] {
            return Err(mismatch("recorded syndrome weight", i));
        }
        if &catalog.qubits(entry) != qubits {
            return Err(mismatch("flip does not match its catalog entry", i));
        }
        let f = BitSet::from_indices(code.n(), qubits.iter().copied());
        let sf = code.syndrome(side, &f)?;
        let num = score(&sigma, &sf);
        if !params.guard(num, qubits.len(), d_b) {
            return Err(mismatch("guard", i));
        }
        let size = qubits.len() as i64;
        if entries
            .iter()
            .any(|(e, s)| score(&sigma, s) * size > num * e.mask.count_ones() as i64)
        {
            return Err(mismatch("maximality", i));
        }
        sigma.xor_assign(&sf);
    }
    if sigma != run.residual || sigma.count() != *run.weights.last().unwrap_or(&0) {
        return Err(mismatch("final syndrome", run.entries.len()));
    }
    match run.termination {
        Termination::Converged if !sigma.is_empty() => {
            return Err(mismatch("converged with residual", run.entries.len()))
        }
        Termination::Stalled
            if entries.iter().any(|(e, s)| {
                params.guard(score(&sigma, s), e.mask.count_ones() as usize, d_b)
            }) =>
        {
            return Err(mismatch(
                "stalled with a progress move available",
                run.entries.len(),
            ));
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_biregular, BipartiteGraph};
    use crate::hgp::hypergraph_product;
    use crate::rng::{self, Tag};
    use rand::Rng;

    fn rep3_code() -> CssCode {
        let g = BipartiteGraph::from_edges(3, 2, &[(0, 0), (1, 0), (1, 1), (2, 1)]).unwrap();
        hypergraph_product(&g, None).unwrap()
    }

    #[test]
    fn correction_sweep() {
        let code = rep3_code();
        for (side, params) in [
            (Pauli::X, DecoderParams::alg1()),
            (Pauli::Z, DecoderParams::alg2(Rational::new(1, 4)).unwrap()),
        ] {
            let cat = build_flip_catalog(&code, side).unwrap();
            let sweep = exhaustive_correction_weight(&code, &cat, &params, 3, 1 << 20).unwrap();
            assert!(sweep.t_star >= 1);
            assert_eq!(sweep.flip_bound_violations, 0);
            if let Some(f) = &sweep.first_failure {
                assert_eq!(f.len(), sweep.t_star + 1);
            }
        }
        let pair = BipartiteGraph::from_edges(2, 1, &[(0, 0), (1, 0)]).unwrap();
        let code = hypergraph_product(&pair, None).unwrap();
        let cat = build_flip_catalog(&code, Pauli::X).unwrap();
        let sweep =
            exhaustive_correction_weight(&code, &cat, &DecoderParams::alg1(), 2, 1 << 20).unwrap();
        assert_eq!(sweep.t_star, 0);
        assert_eq!(sweep.first_failure.as_ref().map(Vec::len), Some(1));
        let capped = exhaustive_correction_weight(
            &rep3_code(),
            &build_flip_catalog(&rep3_code(), Pauli::X).unwrap(),
            &DecoderParams::alg1(),
            3,
            20,
        )
        .unwrap();
        assert!(capped.budget_stop);
        assert_eq!(capped.t_star, 1);
    }

    #[test]
    fn catalog_sizes() {
        let g = BipartiteGraph::from_edges(1, 1, &[(0, 0)]).unwrap();
        let c = hypergraph_product(&g, None).unwrap();
        let cat = build_flip_catalog(&c, Pauli::X).unwrap();
        assert_eq!(cat.n_generators(), 1);
        assert_eq!(cat.len(), 3);
        let code = rep3_code();
        for side in [Pauli::X, Pauli::Z] {
            let cat = build_flip_catalog(&code, side).unwrap();
            let expect: usize = (0..cat.n_generators())
                .map(|g| (1 << cat.support(g).len()) - 1)
                .sum();
            assert_eq!(cat.len(), expect);
        }
        assert!(matches!(
            build_flip_catalog_with_budget(&code, Pauli::X, 3),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn catalog_spot_audit() {
        let code = hypergraph_product(&sample_biregular(8, 6, 3, 4, 3).unwrap(), None).unwrap();
        let mut rng = rng::stream(5, 0, Tag::Audit);
        for side in [Pauli::X, Pauli::Z] {
            let cat = build_flip_catalog(&code, side).unwrap();
            let entries: Vec<_> = cat.entries().collect();
            for _ in 0..100 {
                let e = entries[rng.gen_range(0..entries.len())];
                let f = cat.qubit_set(e);
                let mut oracle = BitSet::new(code.n_checks(side));
                for q in &f {
                    oracle.xor_assign(&code.check_matrix(side).column(q));
                }
                assert_eq!(cat.syndrome(e), oracle);
            }
        }
    }

    #[test]
    fn delta_examples() {
        let code = rep3_code();
        let f = BitSet::from_indices(code.n(), [0]);
        let sf = code.syndrome(Pauli::X, &f).unwrap();
        let w = sf.count() as i64;
        let empty = BitSet::new(code.n_checks(Pauli::X));
        assert_eq!(
            delta(&code, Pauli::X, &empty, &f).unwrap(),
            Rational::from_integer(-w)
        );
        assert_eq!(
            delta(&code, Pauli::X, &sf, &f).unwrap(),
            Rational::from_integer(w)
        );
        let two = BitSet::from_indices(code.n(), [0, 4]);
        let s2 = code.syndrome(Pauli::X, &two).unwrap();
        let half: BitSet = BitSet::from_indices(s2.len(), s2.iter().take(s2.count() / 2));
        if s2.count() % 2 == 0 {
            assert_eq!(
                delta(&code, Pauli::X, &half, &two).unwrap(),
                Rational::from_integer(0)
            );
        }
        assert!(delta(&code, Pauli::X, &empty, &BitSet::new(code.n())).is_err());
    }

    #[test]
    fn beta0_values() {
        let (_, b) = beta0(38, 39, Rational::new(1, 38), Rational::new(1, 39), true).unwrap();
        assert!((crate::rational::to_f64(&b) - 0.386).abs() < 1e-3);
        let eighth = Rational::new(1, 8);
        assert_eq!(
            beta0(4, 4, eighth, eighth, false).unwrap().1,
            Rational::from_integer(0)
        );
        assert!(matches!(
            beta0(4, 4, eighth, eighth, true),
            Err(Error::NegativeBeta(_))
        ));
        let d = Rational::new(1, 20);
        let (r, b) = beta0(3, 4, d, d, true).unwrap();
        assert_eq!(
            b,
            r * (Rational::from_integer(1) - Rational::from_integer(8) * d)
                / Rational::from_integer(2)
        );
    }

    #[test]
    fn empty_syndrome_converges_immediately() {
        let code = rep3_code();
        let cat = build_flip_catalog(&code, Pauli::X).unwrap();
        let run = decode_ssf(
            &code,
            &cat,
            &BitSet::new(code.n_checks(Pauli::X)),
            &DecoderParams::alg1(),
        )
        .unwrap();
        assert_eq!(run.termination, Termination::Converged);
        assert_eq!(run.flip_count(), 0);
        assert!(find_progress_move(&cat, &run.sigma0, &DecoderParams::alg1()).is_none());
    }

    #[test]
    fn unreachable_syndrome_is_reported() {
        // H = [[1,1],[1,1]] gives a rank-deficient H_X
        let g = BipartiteGraph::from_edges(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let code = hypergraph_product(&g, None).unwrap();
        let cat = build_flip_catalog(&code, Pauli::X).unwrap();
        let params = DecoderParams::alg2(Rational::new(1, 4)).unwrap();
        let mut found = false;
        for c in 0..code.n_checks(Pauli::X) {
            let s = BitSet::from_indices(code.n_checks(Pauli::X), [c]);
            if !code.syndrome_space(Pauli::X).contains(&s) {
                assert_eq!(
                    decode_ssf(&code, &cat, &s, &params),
                    Err(Error::UnreachableSyndrome)
                );
                found = true;
            }
        }
        let all = BitSet::full(code.n_checks(Pauli::X));
        if !code.syndrome_space(Pauli::X).contains(&all) {
            assert_eq!(
                decode_ssf(&code, &cat, &all, &params),
                Err(Error::UnreachableSyndrome)
            );
            found = true;
        }
        assert!(found);
    }

    #[test]
    fn incremental_matches_full_scan_and_verifies() {
        let code = hypergraph_product(&sample_biregular(8, 6, 3, 4, 7).unwrap(), None).unwrap();
        let mut rng = rng::stream(2, 0, Tag::ErrorX);
        for side in [Pauli::X, Pauli::Z] {
            let cat = build_flip_catalog(&code, side).unwrap();
            for trial in 0..60 {
                let e =
                    BitSet::from_indices(code.n(), (0..code.n()).filter(|_| rng.gen_bool(0.04)));
                let sigma = code.syndrome(side, &e).unwrap();
                for mut params in [
                    DecoderParams::alg1(),
                    DecoderParams::alg2(Rational::new(1, 4)).unwrap(),
                ] {
                    let fast = decode_ssf(&code, &cat, &sigma, &params).unwrap();
                    params.scan = ScanMode::Full;
                    let slow = decode_ssf(&code, &cat, &sigma, &params).unwrap();
                    assert_eq!(fast, slow, "trial {trial}");
                    verify_trace(&code, &cat, &fast, &params).unwrap();
                    assert!(fast.weights.windows(2).all(|w| w[1] < w[0]));
                    if fast.converged() {
                        assert_eq!(code.syndrome(side, &fast.estimate).unwrap(), sigma);
                    }
                    assert_eq!(
                        fast.termination == Termination::Stalled,
                        find_progress_move(&cat, &fast.residual, &params).is_none()
                            && !fast.residual.is_empty()
                    );
                }
            }
        }
    }

    #[test]
    fn explicit_cap_reports_flip_cap_hit() {
        let code = hypergraph_product(&sample_biregular(8, 6, 3, 4, 7).unwrap(), None).unwrap();
        let cat = build_flip_catalog(&code, Pauli::X).unwrap();
        let e = BitSet::from_indices(code.n(), [0, 17, 40, 77]);
        let sigma = code.syndrome(Pauli::X, &e).unwrap();
        let mut params = DecoderParams::alg1();
        params.max_flips = Some(1);
        let run = decode_ssf(&code, &cat, &sigma, &params).unwrap();
        assert_eq!(run.termination, Termination::FlipCapHit);
        assert_eq!(run.flip_count(), 1);
    }

    #[test]
    fn verifier_rejects_tampered_trace() {
        let code = hypergraph_product(&sample_biregular(8, 6, 3, 4, 7).unwrap(), None).unwrap();
        let cat = build_flip_catalog(&code, Pauli::X).unwrap();
        let e = BitSet::from_indices(code.n(), [3, 50]);
        let sigma = code.syndrome(Pauli::X, &e).unwrap();
        let params = DecoderParams::alg1();
        let mut run = decode_ssf(&code, &cat, &sigma, &params).unwrap();
        assert!(run.flip_count() > 0);
        let first = run.entries[0];
        let other = cat
            .entries()
            .find(|x| *x != first && x.mask.count_ones() == 1)
            .unwrap();
        run.entries[0] = other;
        run.flips[0] = cat.qubits(other);
        assert!(matches!(
            verify_trace(&code, &cat, &run, &params),
            Err(Error::ReplayMismatch { step: 0, .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let code = rep3_code();
        let cat = build_flip_catalog(&code, Pauli::Z).unwrap();
        let e = BitSet::from_indices(code.n(), [2]);
        let run = decode_ssf(
            &code,
            &cat,
            &code.syndrome(Pauli::Z, &e).unwrap(),
            &DecoderParams::alg1(),
        )
        .unwrap();
        let json = serde_json::to_string(&run).unwrap();
        assert_eq!(serde_json::from_str::<DecodeRun>(&json).unwrap(), run);
    }
}
