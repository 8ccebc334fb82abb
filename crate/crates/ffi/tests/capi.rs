use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use junctest_ffi::*;

fn last_error() -> String {
    let p = jt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    jt_string_free(p);
    s
}

unsafe fn builtin(name: &str) -> *mut JtRoadMap {
    let mut map = ptr::null_mut();
    let name = CString::new(name).unwrap();
    assert_eq!(jt_road_map_builtin(name.as_ptr(), &mut map), JtStatus::Ok);
    map
}

unsafe fn catalog(map: *const JtRoadMap) -> *mut JtCatalog {
    let mut cat = ptr::null_mut();
    let j = CString::new("J").unwrap();
    assert_eq!(jt_catalog_new(map, j.as_ptr(), &mut cat), JtStatus::Ok);
    cat
}

#[test]
fn logical_counts_through_the_c_abi() {
    unsafe {
        let map = builtin("T1");
        let cat = catalog(map);
        let mut n = 0;
        assert_eq!(jt_catalog_len(cat, &mut n), JtStatus::Ok);
        assert_eq!(n, 6);
        let mut id = ptr::null_mut();
        assert_eq!(jt_catalog_id(cat, 0, &mut id), JtStatus::Ok);
        assert!(!take_string(id).is_empty());
        assert_eq!(jt_catalog_id(cat, 99, &mut id), JtStatus::NotFound);

        let mut set = ptr::null_mut();
        assert_eq!(jt_find_logical_scenarios(cat, 2, &mut set), JtStatus::Ok);
        assert_eq!(jt_scenario_set_len(set, &mut n), JtStatus::Ok);
        assert_eq!(n, 24);
        assert!(jt_last_error_message().is_null());

        let x1 = builtin("X1");
        let xcat = catalog(x1);
        let mut full = ptr::null_mut();
        let mut reduced = ptr::null_mut();
        assert_eq!(jt_find_logical_scenarios(xcat, 3, &mut full), JtStatus::Ok);
        assert_eq!(jt_reduce_symmetries(full, &mut reduced), JtStatus::Ok);
        jt_scenario_set_len(full, &mut n);
        assert_eq!(n, 748);
        jt_scenario_set_len(reduced, &mut n);
        assert_eq!(n, 420);

        let mut json = ptr::null_mut();
        assert_eq!(jt_scenario_set_to_json(set, &mut json), JtStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(v["scenarios"].as_array().unwrap().len(), 24);

        for s in [set, full, reduced] {
            jt_scenario_set_free(s);
        }
        jt_catalog_free(cat);
        jt_catalog_free(xcat);
        jt_road_map_free(map);
        jt_road_map_free(x1);
    }
}

#[test]
fn concretize_and_simulate() {
    unsafe {
        let map = builtin("T1");
        let cat = catalog(map);
        let mut full = ptr::null_mut();
        let mut set = ptr::null_mut();
        jt_find_logical_scenarios(cat, 2, &mut full);
        jt_reduce_symmetries(full, &mut set);
        let mut json = ptr::null_mut();
        let mut eligible = 0;
        assert_eq!(jt_concretize(map, cat, set, &mut json, &mut eligible), JtStatus::Ok);
        assert_eq!(eligible, 12);
        let scenarios: Vec<serde_json::Value> = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(scenarios.len(), 24);

        // the eligibility count is optional
        assert_eq!(jt_concretize(map, cat, set, &mut json, ptr::null_mut()), JtStatus::Ok);
        jt_string_free(json);

        let eligible_one = scenarios.iter().find(|s| s["static_report"]["violations"].as_array().is_some_and(|v| v.is_empty())).unwrap();
        let text = CString::new(eligible_one.to_string()).unwrap();
        let mut trace = ptr::null_mut();
        assert_eq!(jt_simulate(text.as_ptr(), JtPolicy::Oblivious, 0, &mut trace), JtStatus::Ok);
        let a = take_string(trace);
        assert!(a.lines().count() > 2);
        assert!(a.contains("collision"));
        assert_eq!(jt_simulate(text.as_ptr(), JtPolicy::Oblivious, 0, &mut trace), JtStatus::Ok);
        assert_eq!(take_string(trace), a, "same inputs, same trace");
        assert_eq!(jt_simulate(text.as_ptr(), JtPolicy::ReactiveBrake, 3, &mut trace), JtStatus::Ok);
        jt_string_free(trace);

        jt_scenario_set_free(full);
        jt_scenario_set_free(set);
        jt_catalog_free(cat);
        jt_road_map_free(map);
    }
}

#[test]
fn statistics() {
    let mut p = 0.0;
    unsafe {
        assert_eq!(jt_fisher_exact(1, 1, 1, 1, &mut p), JtStatus::Ok);
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(jt_odds_ratio(10, 0, 0, 10, &mut p), JtStatus::Ok);
        assert!((p - 441.0).abs() < 1e-9);
        assert_eq!(jt_fisher_exact(0, 0, 0, 0, &mut p), JtStatus::Invalid);
        assert_eq!(jt_odds_ratio(1, 2, 3, 4, ptr::null_mut()), JtStatus::NullPointer);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut map = ptr::null_mut();
        assert_eq!(jt_road_map_builtin(ptr::null(), &mut map), JtStatus::NullPointer);
        assert!(last_error().contains("name"));
        let name = CString::new("Q9").unwrap();
        assert_eq!(jt_road_map_builtin(name.as_ptr(), &mut map), JtStatus::NotFound);
        assert!(last_error().contains("Q9"));
        assert!(map.is_null());

        let bad = CString::new("not json").unwrap();
        assert_eq!(jt_road_map_from_json(bad.as_ptr(), &mut map), JtStatus::Parse);
        let empty = CString::new(r#"{"meta": {"name": "m"}, "lanes": [], "junctions": []}"#).unwrap();
        assert_eq!(jt_road_map_from_json(empty.as_ptr(), &mut map), JtStatus::Parse);
        let latin1 = [0xffu8, 0];
        assert_eq!(jt_road_map_from_json(latin1.as_ptr().cast(), &mut map), JtStatus::InvalidUtf8);

        let t1 = builtin("T1");
        let k = CString::new("K").unwrap();
        let mut cat = ptr::null_mut();
        assert_eq!(jt_catalog_new(t1, k.as_ptr(), &mut cat), JtStatus::NotFound);
        assert_eq!(jt_catalog_new(ptr::null(), k.as_ptr(), &mut cat), JtStatus::NullPointer);
        let cat = catalog(t1);
        let mut set = ptr::null_mut();
        assert_eq!(jt_find_logical_scenarios(cat, 1, &mut set), JtStatus::Invalid);

        let mut trace = ptr::null_mut();
        assert_eq!(jt_simulate(bad.as_ptr(), JtPolicy::Oblivious, 0, &mut trace), JtStatus::Parse);

        // NULL is accepted by every release function
        jt_string_free(ptr::null_mut());
        jt_road_map_free(ptr::null_mut());
        jt_catalog_free(ptr::null_mut());
        jt_scenario_set_free(ptr::null_mut());
        jt_catalog_free(cat);
        jt_road_map_free(t1);
    }
}

#[test]
fn errors_are_per_thread() {
    let name = CString::new("Q9").unwrap();
    let mut map = ptr::null_mut();
    assert_eq!(unsafe { jt_road_map_builtin(name.as_ptr(), &mut map) }, JtStatus::NotFound);
    std::thread::spawn(|| assert!(jt_last_error_message().is_null())).join().unwrap();
    assert!(last_error().contains("Q9"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/junctest.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["jt_road_map_builtin", "jt_concretize", "jt_simulate", "jt_fisher_exact", "JT_STATUS_NOT_FOUND", "typedef struct JtRoadMap JtRoadMap"] {
        assert!(text.contains(f), "{f} missing from the header");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let out = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output()
            .unwrap_or_else(|e| panic!("{compiler}: {e}"));
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
