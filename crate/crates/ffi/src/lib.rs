//! C ABI over the junctest core.
//!
//! Every function returns a [`JtStatus`]; results come back through out-pointers.
//! On failure the message is kept per thread and read with [`jt_last_error_message`].
//! Objects are opaque handles released by their `_free` function; strings returned
//! by the library are released with [`jt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use junctest::analysis::{fisher_exact_p, odds_ratio, ContingencyTable2x2};
use junctest::concrete_gen::{ConcreteConfig, ConcreteScenario, Concretizer, SpeedProfile};
use junctest::fixtures::fixture_doc;
use junctest::logical_gen::{find_logical_scenarios, reduce_symmetries, LogicalScenarioSet, OVERLAP_THRESHOLD};
use junctest::road_model::{enumerate_maneuver_instances, load_road_map, parse_road_map, ManeuverCatalog, RoadMap, RoadMapError};
use junctest::sim::{simulate, trace_to_jsonl, EgoPolicy, SimConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Invalid = 4,
    NotFound = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JtPolicy {
    Oblivious = 0,
    ReactiveBrake = 1,
}

/// A validated road map.
pub struct JtRoadMap(RoadMap);

/// Maneuver instances of one junction.
pub struct JtCatalog(ManeuverCatalog);

/// A set of logical scenarios.
pub struct JtScenarioSet(LogicalScenarioSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(JtStatus, String);

impl Failure {
    fn new(status: JtStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

impl From<RoadMapError> for Failure {
    fn from(e: RoadMapError) -> Self {
        let status = match e {
            RoadMapError::Schema(_) => JtStatus::Parse,
            RoadMapError::UnknownJunction(_) | RoadMapError::UnknownLane(_) => JtStatus::NotFound,
            _ => JtStatus::Invalid,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    // interior NULs would truncate the message anyway
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> JtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            JtStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            JtStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(JtStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(JtStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(JtStatus::NullPointer, format!("{name} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(JtStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure::new(JtStatus::Internal, e))?;
    write_out(out, c.into_raw())
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn jt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn jt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a road map document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jt_road_map_from_json(json: *const c_char, out: *mut *mut JtRoadMap) -> JtStatus {
    guard(|| {
        let map = parse_road_map(str_arg(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(JtRoadMap(map))))
    })
}

/// Loads one of the built-in maps ("T1", "X1", "Y1").
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jt_road_map_builtin(name: *const c_char, out: *mut *mut JtRoadMap) -> JtStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let doc = fixture_doc(name).ok_or_else(|| Failure::new(JtStatus::NotFound, format!("no built-in map {name:?}")))?;
        write_out(out, Box::into_raw(Box::new(JtRoadMap(load_road_map(&doc)?))))
    })
}

/// # Safety
/// `map` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn jt_road_map_free(map: *mut JtRoadMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Enumerates the maneuver instances of a junction.
///
/// # Safety
/// Pointers must be valid; `junction` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn jt_catalog_new(map: *const JtRoadMap, junction: *const c_char, out: *mut *mut JtCatalog) -> JtStatus {
    guard(|| {
        let map = ref_arg(map, "map")?;
        let cat = enumerate_maneuver_instances(&map.0, str_arg(junction, "junction")?)?;
        write_out(out, Box::into_raw(Box::new(JtCatalog(cat))))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn jt_catalog_len(catalog: *const JtCatalog, out: *mut usize) -> JtStatus {
    guard(|| write_out(out, ref_arg(catalog, "catalog")?.0.len()))
}

/// Id of the `index`-th maneuver instance, as a new string.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn jt_catalog_id(catalog: *const JtCatalog, index: usize, out: *mut *mut c_char) -> JtStatus {
    guard(|| {
        let cat = &ref_arg(catalog, "catalog")?.0;
        let mi = cat.instances.get(index).ok_or_else(|| Failure::new(JtStatus::NotFound, format!("index {index} out of {}", cat.len())))?;
        write_string(out, mi.id.clone())
    })
}

/// # Safety
/// `catalog` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn jt_catalog_free(catalog: *mut JtCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

/// All dangerous `n_actors`-tuples of the catalog, ego first.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn jt_find_logical_scenarios(catalog: *const JtCatalog, n_actors: usize, out: *mut *mut JtScenarioSet) -> JtStatus {
    guard(|| {
        let set = find_logical_scenarios(&ref_arg(catalog, "catalog")?.0, n_actors).map_err(|e| Failure::new(JtStatus::Invalid, e))?;
        write_out(out, Box::into_raw(Box::new(JtScenarioSet(set))))
    })
}

/// A new set with one representative per (ego, multiset of externals).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn jt_reduce_symmetries(set: *const JtScenarioSet, out: *mut *mut JtScenarioSet) -> JtStatus {
    guard(|| {
        let reduced = reduce_symmetries(&ref_arg(set, "set")?.0);
        write_out(out, Box::into_raw(Box::new(JtScenarioSet(reduced))))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn jt_scenario_set_len(set: *const JtScenarioSet, out: *mut usize) -> JtStatus {
    guard(|| write_out(out, ref_arg(set, "set")?.0.len()))
}

/// # Safety
/// Pointers must be valid. Free the result with [`jt_string_free`].
#[no_mangle]
pub unsafe extern "C" fn jt_scenario_set_to_json(set: *const JtScenarioSet, out: *mut *mut c_char) -> JtStatus {
    guard(|| {
        let json = serde_json::to_string(&ref_arg(set, "set")?.0).map_err(|e| Failure::new(JtStatus::Internal, e))?;
        write_string(out, json)
    })
}

/// # Safety
/// `set` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn jt_scenario_set_free(set: *mut JtScenarioSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Concretizes every scenario of `set` with default settings and speed profiles.
/// Writes a JSON array of concrete scenarios and, if `out_eligible` is not NULL,
/// the number that passed the static check.
///
/// # Safety
/// `map`, `catalog`, `set` and `out_json` must be valid; `out_eligible` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jt_concretize(
    map: *const JtRoadMap,
    catalog: *const JtCatalog,
    set: *const JtScenarioSet,
    out_json: *mut *mut c_char,
    out_eligible: *mut usize,
) -> JtStatus {
    guard(|| {
        let (map, catalog, set) = (ref_arg(map, "map")?, ref_arg(catalog, "catalog")?, ref_arg(set, "set")?);
        let cz = Concretizer::new(&map.0, catalog.0.clone(), OVERLAP_THRESHOLD, ConcreteConfig::default())
            .map_err(|e| Failure::new(JtStatus::Invalid, e))?;
        let profiles = vec![SpeedProfile::default(); set.0.n_actors];
        let scenarios = set
            .0
            .scenarios
            .iter()
            .map(|l| cz.concretize(l, &profiles))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::new(JtStatus::Invalid, e))?;
        let json = serde_json::to_string(&scenarios).map_err(|e| Failure::new(JtStatus::Internal, e))?;
        if !out_eligible.is_null() {
            out_eligible.write(scenarios.iter().filter(|s| s.eligible()).count());
        }
        write_string(out_json, json)
    })
}

/// Simulates one concrete scenario (a JSON object as produced by [`jt_concretize`])
/// and writes the trace as JSON lines.
///
/// # Safety
/// `scenario_json` must be NUL-terminated; `out_jsonl` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jt_simulate(scenario_json: *const c_char, policy: JtPolicy, seed: u64, out_jsonl: *mut *mut c_char) -> JtStatus {
    guard(|| {
        let sc: ConcreteScenario =
            serde_json::from_str(str_arg(scenario_json, "scenario_json")?).map_err(|e| Failure::new(JtStatus::Parse, e))?;
        let policy = match policy {
            JtPolicy::Oblivious => EgoPolicy::Oblivious,
            JtPolicy::ReactiveBrake => EgoPolicy::reactive(),
        };
        let cfg = SimConfig { rng_seed: seed, ..SimConfig::default() };
        let trace = simulate(&sc, &policy, &cfg).map_err(|e| Failure::new(JtStatus::Invalid, e))?;
        write_string(out_jsonl, trace_to_jsonl(&trace).map_err(|e| Failure::new(JtStatus::Internal, e))?)
    })
}

/// Two-sided Fisher exact p-value of [[a, b], [c, d]].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jt_fisher_exact(a: u64, b: u64, c: u64, d: u64, out: *mut f64) -> JtStatus {
    guard(|| {
        let p = fisher_exact_p(&ContingencyTable2x2::new(a, b, c, d)).map_err(|e| Failure::new(JtStatus::Invalid, e))?;
        write_out(out, p)
    })
}

/// Odds ratio of [[a, b], [c, d]], with 0.5 added to every cell when one is zero.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jt_odds_ratio(a: u64, b: u64, c: u64, d: u64, out: *mut f64) -> JtStatus {
    guard(|| {
        let or = odds_ratio(&ContingencyTable2x2::new(a, b, c, d)).map_err(|e| Failure::new(JtStatus::Invalid, e))?;
        write_out(out, or)
    })
}
