use std::ffi::{c_char, CStr, CString};
use std::ptr;

use serde_json::Value;
use shiftcode_ffi::*;

fn owned(s: *mut c_char) -> Value {
    assert!(!s.is_null());
    let v = serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    unsafe { shc_string_free(s) };
    v
}

fn last_error() -> String {
    let p = shc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fixture(name: &str) -> *mut ShcCode {
    let name = CString::new(name).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { shc_code_fixture(name.as_ptr(), &mut c) }, ShcStatus::Ok);
    c
}

#[test]
fn degrees_of_merge_and_xor() {
    unsafe {
        let merge = fixture("merge");
        let mut fto = true;
        assert_eq!(shc_code_is_finite_to_one(merge, ptr::null(), &mut fto), ShcStatus::Ok);
        assert!(!fto);
        let mut d = 0usize;
        assert_eq!(shc_code_degree(merge, ptr::null(), &mut d), ShcStatus::NotFiniteToOne);
        assert!(last_error().contains("finite-to-one"));
        let mut report = ptr::null_mut();
        assert_eq!(shc_code_class_degree(merge, ptr::null(), &mut d, &mut report), ShcStatus::Ok);
        assert_eq!(d, 1);
        assert_eq!(owned(report)["class_degree"], 1);
        assert!(shc_last_error().is_null());
        shc_code_free(merge);

        let xor = fixture("xor");
        assert_eq!(shc_code_degree(xor, ptr::null(), &mut d), ShcStatus::Ok);
        assert_eq!(d, 2);
        assert_eq!(shc_code_class_degree(xor, ptr::null(), &mut d, ptr::null_mut()), ShcStatus::Ok);
        assert_eq!(d, 2);
        shc_code_free(xor);
    }
}

#[test]
fn decomposition_factors_round_trip() {
    unsafe {
        let xor = fixture("xor");
        let mut dec = ptr::null_mut();
        assert_eq!(shc_decompose(xor, ptr::null(), &mut dec), ShcStatus::Ok);
        let mut ok = false;
        let mut report = ptr::null_mut();
        assert_eq!(shc_decomposition_report(dec, &mut ok, &mut report), ShcStatus::Ok);
        assert!(ok);
        assert_eq!(owned(report)["verification"]["all_passed"], true);

        let mut pi2 = ptr::null_mut();
        assert_eq!(shc_decomposition_pi2(dec, &mut pi2), ShcStatus::Ok);
        let mut d = 0usize;
        let st = shc_code_degree(pi2, ptr::null(), &mut d);
        assert_eq!(st, ShcStatus::Ok, "{}", last_error());
        assert_eq!(d, 2);

        let mut pi1 = ptr::null_mut();
        assert_eq!(shc_decomposition_pi1(dec, &mut pi1), ShcStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(shc_code_to_json(pi1, &mut s), ShcStatus::Ok);
        let text = CString::new(owned(s).to_string()).unwrap();
        let mut again = ptr::null_mut();
        assert_eq!(shc_code_from_json(text.as_ptr(), &mut again), ShcStatus::Ok);
        assert_eq!(shc_code_class_degree(again, ptr::null(), &mut d, ptr::null_mut()), ShcStatus::Ok);
        assert_eq!(d, 1);

        let mut y = ptr::null_mut();
        assert_eq!(shc_decomposition_ytilde_json(dec, &mut y), ShcStatus::Ok);
        assert!(owned(y).is_object());

        for c in [xor, pi1, pi2, again] {
            shc_code_free(c);
        }
        shc_decomposition_free(dec);
    }
}

#[test]
fn pressure_and_parry_measure() {
    unsafe {
        let golden = fixture("golden-mean-identity");
        let mut x = ptr::null_mut();
        assert_eq!(shc_code_domain(golden, &mut x), ShcStatus::Ok);
        let mut p = 0.0;
        assert_eq!(shc_pressure(x, ptr::null(), ptr::null(), &mut p), ShcStatus::Ok);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((p - phi.ln()).abs() < 1e-10, "{p}");

        let mut s = ptr::null_mut();
        assert_eq!(shc_equilibrium(x, ptr::null(), ptr::null(), &mut s), ShcStatus::Ok);
        let v = owned(s);
        let m = &v["measure"];
        let i = m["contexts"].as_array().unwrap().iter().position(|c| c == "0").unwrap();
        assert!((m["transitions"][i][0].as_f64().unwrap() - 1.0 / phi).abs() < 1e-10);

        let mut json = ptr::null_mut();
        assert_eq!(shc_presentation_to_json(x, &mut json), ShcStatus::Ok);
        let text = CString::new(owned(json).to_string()).unwrap();
        let mut y = ptr::null_mut();
        assert_eq!(shc_presentation_from_json(text.as_ptr(), &mut y), ShcStatus::Ok);
        let mut q = 0.0;
        assert_eq!(shc_pressure(y, ptr::null(), ptr::null(), &mut q), ShcStatus::Ok);
        assert_eq!(p, q);

        shc_presentation_free(x);
        shc_presentation_free(y);
        shc_code_free(golden);
    }
}

#[test]
fn relative_pressure_on_merge() {
    let nu = CString::new(r#"{"order":0,"alphabet":["0","1"],"contexts":[""],"transitions":[[0.5,0.5]],"stationary":[1.0]}"#)
        .unwrap();
    unsafe {
        let merge = fixture("merge");
        let mut s = ptr::null_mut();
        assert_eq!(
            shc_max_relative_pressure(merge, nu.as_ptr(), ptr::null(), 2, 4, ptr::null(), &mut s),
            ShcStatus::Ok
        );
        let v = owned(s);
        assert!((v["solve"]["value"].as_f64().unwrap() - 1.5 * 2f64.ln()).abs() < 1e-6);
        shc_code_free(merge);
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(shc_code_fixture(ptr::null(), &mut c), ShcStatus::NullPointer);
        let bad = CString::new("{").unwrap();
        assert_eq!(shc_code_from_json(bad.as_ptr(), &mut c), ShcStatus::Parse);
        assert!(c.is_null());
        let name = CString::new("nope").unwrap();
        assert_eq!(shc_code_fixture(name.as_ptr(), &mut c), ShcStatus::InvalidInput);
        assert!(last_error().contains("nope"));

        let xor = fixture("xor");
        let mut d = 0usize;
        let cfg = CString::new(r#"{"limits":{"max_words":1}}"#).unwrap();
        let mut dec = ptr::null_mut();
        assert_eq!(shc_decompose(xor, cfg.as_ptr(), &mut dec), ShcStatus::ResourceLimit);
        let cfg = CString::new("[").unwrap();
        assert_eq!(shc_code_degree(xor, cfg.as_ptr(), &mut d), ShcStatus::Parse);
        assert!(last_error().starts_with("config"));
        assert_eq!(shc_code_degree(xor, ptr::null(), ptr::null_mut()), ShcStatus::NullPointer);
        shc_code_free(xor);
        shc_code_free(ptr::null_mut());
        shc_string_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(shc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
