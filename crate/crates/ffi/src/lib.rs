//! C ABI over `qexp-core`.
//!
//! Objects are opaque handles created by `*_new`/constructor functions
//! and released with the matching `*_free`. Every fallible call returns a
//! [`QexpStatus`]; the message of the last failure on the calling thread
//! is available from [`qexp_last_error`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qexp_core::graph::{sample_biregular, BipartiteGraph};
use qexp_core::hgp::{hypergraph_product, CssCode, Pauli};
use qexp_core::percolation;
use qexp_core::ssf::{
    build_flip_catalog, check_equivalence, decode_ssf, DecoderParams, FlipCatalog,
};
use qexp_core::{BitSet, Error, Rational};

/// Result codes. Values 2–5 match the exit codes of the `qexp` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QexpStatus {
    Ok = 0,
    NullPointer = 1,
    Usage = 2,
    Domain = 3,
    Budget = 4,
    Invariant = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QexpSide {
    X = 0,
    Z = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QexpMode {
    Alg1 = 0,
    Alg2 = 1,
}

impl From<QexpSide> for Pauli {
    fn from(s: QexpSide) -> Pauli {
        match s {
            QexpSide::X => Pauli::X,
            QexpSide::Z => Pauli::Z,
        }
    }
}

/// Hypergraph-product code.
pub struct QexpCode {
    code: CssCode,
}

/// Code, one side's flip catalog and decoder parameters.
pub struct QexpDecoder {
    code: CssCode,
    catalog: FlipCatalog,
    params: DecoderParams,
}

/// Outcome of one decode call.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QexpDecodeResult {
    /// 1 when the final syndrome is empty.
    pub converged: u8,
    pub flips: usize,
    pub residual_weight: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QexpStatus {
    match e.exit_code() {
        2 => QexpStatus::Usage,
        3 => QexpStatus::Domain,
        4 => QexpStatus::Budget,
        _ => QexpStatus::Invariant,
    }
}

fn guard<F>(f: F) -> QexpStatus
where
    F: FnOnce() -> Result<(), QexpError>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QexpStatus::Ok,
        Ok(Err(QexpError::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QexpStatus::NullPointer
        }
        Ok(Err(QexpError::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            QexpStatus::Panic
        }
    }
}

enum QexpError {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for QexpError {
    fn from(e: Error) -> Self {
        QexpError::Core(e)
    }
}

unsafe fn nonnull<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, QexpError> {
    p.as_ref().ok_or(QexpError::Null(what))
}

unsafe fn bits_in(p: *const u8, len: usize, what: &'static str) -> Result<BitSet, QexpError> {
    if len == 0 {
        return Ok(BitSet::new(0));
    }
    if p.is_null() {
        return Err(QexpError::Null(what));
    }
    let s = std::slice::from_raw_parts(p, len);
    Ok(BitSet::from_indices(len, (0..len).filter(|&i| s[i] != 0)))
}

unsafe fn bits_out(
    b: &BitSet,
    p: *mut u8,
    len: usize,
    what: &'static str,
) -> Result<(), QexpError> {
    if len != b.len() {
        return Err(
            Error::DimensionMismatch(format!("{what}: buffer of {len}, need {}", b.len())).into(),
        );
    }
    if len == 0 {
        return Ok(());
    }
    if p.is_null() {
        return Err(QexpError::Null(what));
    }
    let s = std::slice::from_raw_parts_mut(p, len);
    for (i, v) in s.iter_mut().enumerate() {
        *v = b.contains(i) as u8;
    }
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qexp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Product code of a random biregular seed graph.
#[no_mangle]
pub unsafe extern "C" fn qexp_code_random(
    n_a: usize,
    n_b: usize,
    d_a: usize,
    d_b: usize,
    seed: u64,
    out: *mut *mut QexpCode,
) -> QexpStatus {
    guard(|| {
        if out.is_null() {
            return Err(QexpError::Null("out"));
        }
        let g = sample_biregular(n_a, n_b, d_a, d_b, seed)?;
        let code = hypergraph_product(&g, None)?;
        *out = Box::into_raw(Box::new(QexpCode { code }));
        Ok(())
    })
}

/// Product code of a seed graph given in the text format
/// (`BIPARTITE n_left n_right d_left d_right` then one line per edge).
#[no_mangle]
pub unsafe extern "C" fn qexp_code_from_seed_text(
    text: *const c_char,
    out: *mut *mut QexpCode,
) -> QexpStatus {
    guard(|| {
        if text.is_null() {
            return Err(QexpError::Null("text"));
        }
        if out.is_null() {
            return Err(QexpError::Null("out"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| Error::Parse("seed text is not UTF-8".into()))?;
        let code = hypergraph_product(&BipartiteGraph::parse_text(s)?, None)?;
        *out = Box::into_raw(Box::new(QexpCode { code }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qexp_code_free(code: *mut QexpCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Number of qubits, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn qexp_code_n(code: *const QexpCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.n())
}

/// Number of logical qubits, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn qexp_code_k(code: *const QexpCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.k())
}

/// Number of checks producing the syndrome on `side`, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn qexp_code_checks(code: *const QexpCode, side: QexpSide) -> usize {
    code.as_ref().map_or(0, |c| c.code.n_checks(side.into()))
}

/// Syndrome of a 0/1 error vector of length n into a buffer of length
/// `qexp_code_checks(code, side)`.
#[no_mangle]
pub unsafe extern "C" fn qexp_syndrome(
    code: *const QexpCode,
    side: QexpSide,
    error: *const u8,
    n: usize,
    syndrome: *mut u8,
    m: usize,
) -> QexpStatus {
    guard(|| {
        let c = nonnull(code, "code")?;
        let e = bits_in(error, n, "error")?;
        let s = c.code.syndrome(side.into(), &e)?;
        bits_out(&s, syndrome, m, "syndrome")
    })
}

/// Sets `*equivalent` to 1 when `a ⊕ b` is a stabilizer on `side`.
#[no_mangle]
pub unsafe extern "C" fn qexp_equivalent(
    code: *const QexpCode,
    side: QexpSide,
    a: *const u8,
    b: *const u8,
    n: usize,
    equivalent: *mut u8,
) -> QexpStatus {
    guard(|| {
        let c = nonnull(code, "code")?;
        if equivalent.is_null() {
            return Err(QexpError::Null("equivalent"));
        }
        if n != c.code.n() {
            return Err(Error::DimensionMismatch(format!(
                "vectors of {n}, code has {}",
                c.code.n()
            ))
            .into());
        }
        let a = bits_in(a, n, "a")?;
        let b = bits_in(b, n, "b")?;
        *equivalent = check_equivalence(&c.code, &a, &b, side.into()) as u8;
        Ok(())
    })
}

/// Builds a decoder for one side. `beta_num/beta_den` is used by
/// `QEXP_MODE_ALG2` only; `max_flips = 0` keeps the proven default cap.
#[no_mangle]
pub unsafe extern "C" fn qexp_decoder_new(
    code: *const QexpCode,
    side: QexpSide,
    mode: QexpMode,
    beta_num: i64,
    beta_den: i64,
    max_flips: usize,
    out: *mut *mut QexpDecoder,
) -> QexpStatus {
    guard(|| {
        let c = nonnull(code, "code")?;
        if out.is_null() {
            return Err(QexpError::Null("out"));
        }
        let mut params = match mode {
            QexpMode::Alg1 => DecoderParams::alg1(),
            QexpMode::Alg2 => {
                if beta_den == 0 {
                    return Err(Error::InvalidArgument("beta denominator is zero".into()).into());
                }
                DecoderParams::alg2(Rational::new(beta_num, beta_den))?
            }
        };
        params.max_flips = (max_flips > 0).then_some(max_flips);
        let catalog = build_flip_catalog(&c.code, side.into())?;
        *out = Box::into_raw(Box::new(QexpDecoder {
            code: c.code.clone(),
            catalog,
            params,
        }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qexp_decoder_free(dec: *mut QexpDecoder) {
    if !dec.is_null() {
        drop(Box::from_raw(dec));
    }
}

/// Decodes a 0/1 syndrome of length m, writing the 0/1 estimate of length
/// n. An unreachable syndrome returns `QEXP_STATUS_DOMAIN`.
#[no_mangle]
pub unsafe extern "C" fn qexp_decode(
    dec: *const QexpDecoder,
    syndrome: *const u8,
    m: usize,
    estimate: *mut u8,
    n: usize,
    result: *mut QexpDecodeResult,
) -> QexpStatus {
    guard(|| {
        let d = nonnull(dec, "decoder")?;
        let sigma = bits_in(syndrome, m, "syndrome")?;
        let run = decode_ssf(&d.code, &d.catalog, &sigma, &d.params)?;
        bits_out(&run.estimate, estimate, n, "estimate")?;
        if let Some(r) = result.as_mut() {
            *r = QexpDecodeResult {
                converged: run.converged() as u8,
                flips: run.flip_count(),
                residual_weight: run.residual.count(),
            };
        }
        Ok(())
    })
}

/// Local-stochastic threshold for degree bound `d` and density `alpha`.
#[no_mangle]
pub unsafe extern "C" fn qexp_p_ls(d: usize, alpha: f64, out: *mut f64) -> QexpStatus {
    guard(|| {
        if out.is_null() {
            return Err(QexpError::Null("out"));
        }
        *out = percolation::p_ls(d, alpha)?;
        Ok(())
    })
}

/// Independent-noise threshold (root of q(p) = 1).
#[no_mangle]
pub unsafe extern "C" fn qexp_p_iid(d: usize, alpha: f64, out: *mut f64) -> QexpStatus {
    guard(|| {
        if out.is_null() {
            return Err(QexpError::Null("out"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) || d < 3 {
            return Err(Error::Domain(format!(
                "need d ≥ 3 and alpha in (0, 1], got d = {d}, alpha = {alpha}"
            ))
            .into());
        }
        *out = percolation::p_iid(d, alpha, 1e-12)?;
        Ok(())
    })
}
