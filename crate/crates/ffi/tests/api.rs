use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use qexp_ffi::*;

const REP3: &str = "BIPARTITE 3 2 2 2\n0 0\n1 0\n1 1\n2 1\n";

fn rep3_code() -> *mut QexpCode {
    let text = CString::new(REP3).unwrap();
    let mut code = ptr::null_mut();
    let st = unsafe { qexp_code_from_seed_text(text.as_ptr(), &mut code) };
    assert_eq!(st, QexpStatus::Ok);
    assert!(!code.is_null());
    code
}

fn last_error() -> String {
    let p = qexp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn code_dimensions() {
    let code = rep3_code();
    unsafe {
        assert_eq!(qexp_code_n(code), 13);
        assert_eq!(qexp_code_k(code), 1);
        assert_eq!(qexp_code_checks(code, QexpSide::X), 6);
        assert_eq!(qexp_code_checks(code, QexpSide::Z), 6);
        qexp_code_free(code);
        assert_eq!(qexp_code_n(ptr::null()), 0);
    }
}

#[test]
fn random_code_matches_formula() {
    let mut code = ptr::null_mut();
    let st = unsafe { qexp_code_random(8, 6, 3, 4, 5, &mut code) };
    assert_eq!(st, QexpStatus::Ok);
    unsafe {
        assert_eq!(qexp_code_n(code), 8 * 8 + 6 * 6);
        qexp_code_free(code);
    }
}

#[test]
fn mismatched_degrees_report_domain() {
    let mut code = ptr::null_mut();
    let st = unsafe { qexp_code_random(8, 6, 3, 3, 5, &mut code) };
    assert_eq!(st, QexpStatus::Domain);
    assert!(code.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn bad_seed_text_is_usage() {
    let text = CString::new("GRAPH 3\n").unwrap();
    let mut code = ptr::null_mut();
    let st = unsafe { qexp_code_from_seed_text(text.as_ptr(), &mut code) };
    assert_eq!(st, QexpStatus::Usage);
    assert!(last_error().contains("header"));
}

#[test]
fn null_pointers_are_rejected() {
    let mut code = ptr::null_mut();
    let st = unsafe { qexp_code_from_seed_text(ptr::null(), &mut code) };
    assert_eq!(st, QexpStatus::NullPointer);
    let st = unsafe {
        qexp_decode(
            ptr::null(),
            ptr::null(),
            0,
            ptr::null_mut(),
            0,
            ptr::null_mut(),
        )
    };
    assert_eq!(st, QexpStatus::NullPointer);
    let st = unsafe { qexp_p_ls(4, 0.5, ptr::null_mut()) };
    assert_eq!(st, QexpStatus::NullPointer);
    unsafe {
        qexp_code_free(ptr::null_mut());
        qexp_decoder_free(ptr::null_mut());
    }
}

#[test]
fn decodes_every_single_qubit_error() {
    let code = rep3_code();
    for (side, mode, num, den) in [
        (QexpSide::X, QexpMode::Alg1, 0, 1),
        (QexpSide::Z, QexpMode::Alg1, 0, 1),
        (QexpSide::X, QexpMode::Alg2, 1, 4),
    ] {
        let mut dec = ptr::null_mut();
        let st = unsafe { qexp_decoder_new(code, side, mode, num, den, 0, &mut dec) };
        assert_eq!(st, QexpStatus::Ok);
        let n = unsafe { qexp_code_n(code) };
        let m = unsafe { qexp_code_checks(code, side) };
        for q in 0..n {
            let mut e = vec![0u8; n];
            e[q] = 1;
            let mut s = vec![0u8; m];
            let mut est = vec![0u8; n];
            let mut res = QexpDecodeResult::default();
            let mut eq = 0u8;
            unsafe {
                assert_eq!(
                    qexp_syndrome(code, side, e.as_ptr(), n, s.as_mut_ptr(), m),
                    QexpStatus::Ok
                );
                assert_eq!(
                    qexp_decode(dec, s.as_ptr(), m, est.as_mut_ptr(), n, &mut res),
                    QexpStatus::Ok
                );
                assert_eq!(res.converged, 1);
                assert_eq!(res.residual_weight, 0);
                assert_eq!(
                    qexp_equivalent(code, side, e.as_ptr(), est.as_ptr(), n, &mut eq),
                    QexpStatus::Ok
                );
            }
            assert_eq!(eq, 1, "qubit {q} side {side:?}");
        }
        unsafe { qexp_decoder_free(dec) };
    }
    unsafe { qexp_code_free(code) };
}

#[test]
fn buffer_length_mismatch() {
    let code = rep3_code();
    let e = [0u8; 13];
    let mut s = [0u8; 5];
    let st = unsafe { qexp_syndrome(code, QexpSide::X, e.as_ptr(), 13, s.as_mut_ptr(), 5) };
    assert_eq!(st, QexpStatus::Domain);
    unsafe { qexp_code_free(code) };
}

#[test]
fn invalid_beta() {
    let code = rep3_code();
    let mut dec = ptr::null_mut();
    for (num, den) in [(1, 0), (0, 1), (3, 2)] {
        let st =
            unsafe { qexp_decoder_new(code, QexpSide::X, QexpMode::Alg2, num, den, 0, &mut dec) };
        assert_ne!(st, QexpStatus::Ok, "beta {num}/{den}");
        assert!(dec.is_null());
    }
    unsafe { qexp_code_free(code) };
}

#[test]
fn thresholds() {
    let mut p = 0.0;
    assert_eq!(unsafe { qexp_p_iid(4, 1.0, &mut p) }, QexpStatus::Ok);
    assert!(p > 0.0 && p < 0.5);
    let mut q = 0.0;
    assert_eq!(unsafe { qexp_p_ls(4, 1.0, &mut q) }, QexpStatus::Ok);
    assert!(q > 0.0 && q < p);
    assert_eq!(unsafe { qexp_p_iid(4, 0.0, &mut p) }, QexpStatus::Domain);
}

#[test]
fn header_declares_api() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qexp.h"))
            .unwrap();
    for sym in [
        "qexp_code_random",
        "qexp_code_from_seed_text",
        "qexp_code_free",
        "qexp_decoder_new",
        "qexp_decode",
        "qexp_syndrome",
        "qexp_equivalent",
        "qexp_last_error",
        "typedef struct QexpCode QexpCode",
        "QEXP_STATUS_DOMAIN = 3",
    ] {
        assert!(header.contains(sym), "missing {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"qexp.h\"\nint probe(void) {\n  QexpCode *c = 0;\n  QexpStatus s = qexp_code_random(8, 6, 3, 4, 1, &c);\n  qexp_code_free(c);\n  return s == QEXP_STATUS_OK;\n}\n",
    )
    .unwrap();
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
