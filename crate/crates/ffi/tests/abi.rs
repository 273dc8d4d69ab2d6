use std::ffi::{CStr, CString};
use std::ptr;

use pottslab_ffi::*;

const DOC: &str =
    r#"{"q": 3, "w": 0.4, "root": 0, "edges": [[0, 1], [0, 2], [1, 3], [1, 4]], "boundary": {"3": 1, "2": 2}}"#;

fn last_error() -> String {
    let p = potts_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(doc: &str) -> *mut PottsTree {
    let json = CString::new(doc).unwrap();
    let mut tree = ptr::null_mut();
    assert_eq!(unsafe { potts_tree_from_json(json.as_ptr(), &mut tree) }, PottsStatus::Ok);
    assert!(!tree.is_null());
    tree
}

#[test]
fn tree_marginals_match_enumeration() {
    let tree = load(DOC);
    let mut n = 0;
    let mut params = PottsParameters { q: 0, w: 0.0, d: 0 };
    unsafe {
        assert_eq!(potts_tree_vertex_count(tree, &mut n), PottsStatus::Ok);
        assert_eq!(potts_tree_params(tree, &mut params), PottsStatus::Ok);
    }
    assert_eq!(n, 5);
    assert_eq!((params.q, params.w, params.d), (3, 0.4, 2));
    for v in [0, 1, 4] {
        let (mut dp, mut exact) = ([0.0; 3], [0.0; 3]);
        unsafe {
            assert_eq!(potts_tree_marginals(tree, v, dp.as_mut_ptr(), 3), PottsStatus::Ok);
            assert_eq!(potts_tree_marginals_exact(tree, v, exact.as_mut_ptr(), 3), PottsStatus::Ok);
        }
        for (a, b) in dp.iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
        assert!((dp.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    unsafe { potts_tree_free(tree) };
}

#[test]
fn fixed_vertex_and_short_buffer() {
    let tree = load(DOC);
    let mut out = [7.0; 3];
    unsafe {
        assert_eq!(potts_tree_marginals(tree, 3, out.as_mut_ptr(), 3), PottsStatus::OutOfRange);
        assert!(last_error().contains("fixed"));
        assert_eq!(potts_tree_marginals(tree, 9, out.as_mut_ptr(), 3), PottsStatus::OutOfRange);
        assert_eq!(potts_tree_marginals(tree, 0, out.as_mut_ptr(), 2), PottsStatus::BufferTooSmall);
        assert_eq!(out, [7.0; 3]);
        assert_eq!(potts_tree_marginals(tree, 0, ptr::null_mut(), 3), PottsStatus::NullPointer);
        assert_eq!(potts_tree_marginals(ptr::null(), 0, out.as_mut_ptr(), 3), PottsStatus::NullPointer);
        potts_tree_free(tree);
        potts_tree_free(ptr::null_mut());
    }
}

#[test]
fn bad_documents() {
    let mut tree = ptr::null_mut();
    let cases = [
        ("{", PottsStatus::Parse),
        (r#"{"q": 1, "w": 0.5, "root": 0, "edges": []}"#, PottsStatus::InvalidParams),
        (r#"{"q": 3, "w": 0.5, "root": 0, "edges": [[0, 1], [1, 0]]}"#, PottsStatus::InvalidTree),
        (r#"{"q": 3, "w": 0.5, "root": 0, "edges": [[0, 1]], "boundary": {"1": 4}}"#, PottsStatus::OutOfRange),
    ];
    for (doc, expected) in cases {
        let json = CString::new(doc).unwrap();
        let status = unsafe { potts_tree_from_json(json.as_ptr(), &mut tree) };
        assert_eq!(status, expected, "{doc}");
        assert!(!last_error().is_empty());
        assert!(tree.is_null());
    }
    assert_eq!(unsafe { potts_tree_from_json(ptr::null(), &mut tree) }, PottsStatus::NullPointer);
    let bad_utf8 = [0xffu8, 0xfe, 0];
    let status = unsafe { potts_tree_from_json(bad_utf8.as_ptr().cast(), &mut tree) };
    assert_eq!(status, PottsStatus::InvalidUtf8);
}

#[test]
fn recursion_and_jacobian() {
    let params = PottsParameters { q: 3, w: 0.5, d: 4 };
    let x = [1.0, 0.5, 0.25];
    let mut fx = [0.0; 3];
    let mut jac = [0.0; 9];
    unsafe {
        assert_eq!(potts_apply_f(&params, x.as_ptr(), 3, fx.as_mut_ptr(), 3), PottsStatus::Ok);
        assert_eq!(potts_jacobian(&params, x.as_ptr(), 3, jac.as_mut_ptr(), 9), PottsStatus::Ok);
        assert_eq!(potts_jacobian(&params, x.as_ptr(), 3, jac.as_mut_ptr(), 8), PottsStatus::BufferTooSmall);
    }
    // S = 1.3125, S_i = S - (1 - w) x_i²
    let s = 1.3125;
    for i in 0..3 {
        let expected = ((s - 0.5 * x[i] * x[i]) / s).sqrt();
        assert!((fx[i] - expected).abs() < 1e-15);
    }
    let h = 1e-6;
    for j in 0..3 {
        let (mut up, mut down) = (x, x);
        up[j] += h;
        down[j] -= h;
        let (mut fu, mut fd) = ([0.0; 3], [0.0; 3]);
        unsafe {
            potts_apply_f(&params, up.as_ptr(), 3, fu.as_mut_ptr(), 3);
            potts_apply_f(&params, down.as_ptr(), 3, fd.as_mut_ptr(), 3);
        }
        for i in 0..3 {
            assert!((jac[3 * i + j] - (fu[i] - fd[i]) / (2.0 * h)).abs() < 1e-8);
        }
    }
    let zero = [1.0, 0.0, 0.5];
    let status = unsafe { potts_jacobian(&params, zero.as_ptr(), 3, jac.as_mut_ptr(), 9) };
    assert_eq!(status, PottsStatus::InvalidVector);
}

#[test]
fn closed_forms() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(potts_bound_k((std::f64::consts::E - 0.5) / (std::f64::consts::E - 1.0), &mut v), PottsStatus::Ok);
        assert!((v - std::f64::consts::E.powi(2)).abs() < 1e-12);

        let p = PottsParameters { q: 3, w: 0.5, d: 29 };
        assert_eq!(potts_alpha_wsm(&p, &mut v), PottsStatus::Ok);
        assert!((v - 0.67388).abs() < 1e-4);
        assert_eq!(potts_alpha_ssm(&p, &mut v), PottsStatus::Ok);
        assert!(v > 0.0 && v < 1.0);

        let p = PottsParameters { q: 3, w: 0.5, d: 7 };
        assert_eq!(potts_alpha_ssm_extrapolated(&p, &mut v), PottsStatus::Ok);
        assert!((v - 0.2233).abs() < 1e-3);

        let p = PottsParameters { q: 3, w: 0.6, d: 4 };
        let mut m = 0.0;
        assert_eq!(potts_bound_m(&p, &mut m), PottsStatus::Ok);
        assert!(m > 0.6 && m < 1.0);
        let (mut b0, mut b4) = (0.0, 0.0);
        assert_eq!(potts_bound_b(&p, 0, &mut b0), PottsStatus::Ok);
        assert_eq!(potts_bound_b(&p, 4, &mut b4), PottsStatus::Ok);
        assert!(b0 <= b4 && b4 <= 1.0);

        let bad = PottsParameters { q: 3, w: 1.5, d: 4 };
        assert_eq!(potts_bound_m(&bad, &mut v), PottsStatus::InvalidParams);
        assert_eq!(potts_bound_m(ptr::null(), &mut v), PottsStatus::NullPointer);
        assert_eq!(potts_bound_m(&p, ptr::null_mut()), PottsStatus::NullPointer);
    }
}

#[test]
fn local_weight_is_at_least_one_over_root_q() {
    let p = PottsParameters { q: 3, w: 0.8, d: 7 };
    let (x, y) = ([1.0, 0.9, 0.95], [0.92, 1.0, 0.97]);
    let mut lambda = 0.0;
    let status = unsafe { potts_local_weight(&p, x.as_ptr(), y.as_ptr(), 3, &mut lambda) };
    assert_eq!(status, PottsStatus::Ok);
    assert!(lambda * lambda >= 1.0 / 3.0 - 1e-12);
}

#[test]
fn errors_are_per_thread() {
    let mut v = 0.0;
    let bad = PottsParameters { q: 1, w: 0.5, d: 4 };
    assert_eq!(unsafe { potts_bound_m(&bad, &mut v) }, PottsStatus::InvalidParams);
    std::thread::spawn(|| assert!(potts_last_error().is_null())).join().unwrap();
    assert!(last_error().contains("q"));
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(potts_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/pottslab.h");
    let src = include_str!("../src/lib.rs");
    let exported: Vec<&str> =
        src.split("extern \"C\" fn ").skip(1).map(|rest| rest.split('(').next().unwrap()).collect();
    assert!(exported.len() >= 15);
    for name in exported {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct PottsTree PottsTree;"));
    assert!(header.contains("POTTS_STATUS_BUFFER_TOO_SMALL = 9"));
}
