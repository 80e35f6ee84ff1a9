//! C ABI for the simulator core. Scenario handles are opaque, every
//! fallible call returns an `MsStatus`, and all strings crossing the
//! boundary are NUL-terminated UTF-8 owned by whichever side allocated
//! them (`ms_string_free` releases strings this library returns).
//! Pointer validity and ownership contracts are stated in each
//! function's documentation rather than separate safety sections.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::slice;

use libc::c_char;

use manet_sim::analysis::{expected_walk_length_series, hitting_time_oracle, AnalysisError};
use manet_sim::engine::SimTime;
use manet_sim::scenario::{parse_scenario, ScenarioConfig};
use manet_sim::sim::{run_to_csv, Protocol};

/// Result code of every fallible API call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsStatus {
    MsOk = 0,
    MsNullPointer = 1,
    MsInvalidUtf8 = 2,
    MsParseError = 3,
    MsUnknownName = 4,
    MsInvalidArgument = 5,
    MsUnreachable = 6,
    MsNumericalError = 7,
}

/// Opaque scenario handle; create with `ms_scenario_parse` or
/// `ms_scenario_builtin`, release with `ms_scenario_free`.
pub struct MsScenario {
    config: ScenarioConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: MsStatus, message: &str) -> MsStatus {
    let message = CString::new(message.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
    status
}

/// Message for the most recent failure on this thread. The pointer is
/// valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn ms_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, MsStatus> {
    if ptr.is_null() {
        return Err(fail(MsStatus::MsNullPointer, "null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(MsStatus::MsInvalidUtf8, "string argument is not UTF-8"))
}

fn give_string(text: String, out: *mut *mut c_char) -> MsStatus {
    if out.is_null() {
        return fail(MsStatus::MsNullPointer, "null output pointer");
    }
    let owned = CString::new(text.replace('\0', " ")).unwrap();
    unsafe { *out = owned.into_raw() };
    MsStatus::MsOk
}

/// Frees a string previously returned through an output parameter.
/// Passing NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ms_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses scenario-file text into a new handle.
#[no_mangle]
pub unsafe extern "C" fn ms_scenario_parse(
    text: *const c_char,
    out: *mut *mut MsScenario,
) -> MsStatus {
    if out.is_null() {
        return fail(MsStatus::MsNullPointer, "null output pointer");
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_scenario(text) {
        Ok(config) => {
            *out = Box::into_raw(Box::new(MsScenario { config }));
            MsStatus::MsOk
        }
        Err(e) => fail(MsStatus::MsParseError, &e.to_string()),
    }
}

/// Creates a handle for a built-in scenario such as `paper-6node`.
#[no_mangle]
pub unsafe extern "C" fn ms_scenario_builtin(
    name: *const c_char,
    out: *mut *mut MsScenario,
) -> MsStatus {
    if out.is_null() {
        return fail(MsStatus::MsNullPointer, "null output pointer");
    }
    let name = match read_str(name) {
        Ok(n) => n,
        Err(status) => return status,
    };
    match ScenarioConfig::builtin(name) {
        Some(config) => {
            *out = Box::into_raw(Box::new(MsScenario { config }));
            MsStatus::MsOk
        }
        None => fail(
            MsStatus::MsUnknownName,
            &format!("unknown built-in scenario '{name}'"),
        ),
    }
}

/// Releases a scenario handle. Passing NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ms_scenario_free(scenario: *mut MsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Serializes the scenario back to its file format.
#[no_mangle]
pub unsafe extern "C" fn ms_scenario_print(
    scenario: *const MsScenario,
    out: *mut *mut c_char,
) -> MsStatus {
    let Some(scenario) = scenario.as_ref() else {
        return fail(MsStatus::MsNullPointer, "null scenario handle");
    };
    give_string(scenario.config.serialize(), out)
}

/// Runs the scenario for every seed and returns the time-binned metrics
/// CSV (header line included). `protocol` is `"randwalk"` or `"aodv"`;
/// `bin_width_us` is the bin width in microseconds.
#[no_mangle]
pub unsafe extern "C" fn ms_simulate_csv(
    scenario: *const MsScenario,
    protocol: *const c_char,
    seeds: *const u64,
    n_seeds: usize,
    bin_width_us: u64,
    out: *mut *mut c_char,
) -> MsStatus {
    let Some(scenario) = scenario.as_ref() else {
        return fail(MsStatus::MsNullPointer, "null scenario handle");
    };
    let protocol = match read_str(protocol) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let protocol: Protocol = match protocol.parse() {
        Ok(p) => p,
        Err(e) => return fail(MsStatus::MsInvalidArgument, &e),
    };
    if seeds.is_null() || n_seeds == 0 {
        return fail(MsStatus::MsInvalidArgument, "empty seed list");
    }
    if bin_width_us == 0 {
        return fail(MsStatus::MsInvalidArgument, "bin width must be positive");
    }
    let seeds = slice::from_raw_parts(seeds, n_seeds);
    let (csv, _) = run_to_csv(
        &scenario.config,
        protocol,
        seeds,
        SimTime::from_micros(bin_width_us),
    );
    give_string(csv, out)
}

/// Exact expected hop count of a uniform random walk from `src` to
/// `dst` on the graph given as a row-major `n`-by-`n` 0/1 adjacency
/// matrix.
#[no_mangle]
pub unsafe extern "C" fn ms_hitting_time(
    adjacency: *const u8,
    n: usize,
    src: usize,
    dst: usize,
    out: *mut f64,
) -> MsStatus {
    if adjacency.is_null() || out.is_null() {
        return fail(MsStatus::MsNullPointer, "null matrix or output pointer");
    }
    if src >= n || dst >= n {
        return fail(MsStatus::MsInvalidArgument, "src and dst must be < n");
    }
    let flat = slice::from_raw_parts(adjacency, n * n);
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| flat[i * n + j] != 0).collect())
        .collect();
    match hitting_time_oracle(&adj, src, dst) {
        Ok(h) => {
            *out = h;
            MsStatus::MsOk
        }
        Err(e @ AnalysisError::Unreachable) => fail(MsStatus::MsUnreachable, &e.to_string()),
        Err(e) => fail(MsStatus::MsNumericalError, &e.to_string()),
    }
}

/// Partial sums of the expected-walk-length series for a mean neighbor
/// count and `k` distance-CDF values; writes `k` sums into `out`.
#[no_mangle]
pub unsafe extern "C" fn ms_walk_series(
    expected_neighbors: f64,
    cdf: *const f64,
    k: usize,
    out: *mut f64,
) -> MsStatus {
    if cdf.is_null() || out.is_null() {
        return fail(MsStatus::MsNullPointer, "null cdf or output pointer");
    }
    let cdf = slice::from_raw_parts(cdf, k);
    match expected_walk_length_series(expected_neighbors, cdf) {
        Ok(sums) => {
            slice::from_raw_parts_mut(out, k).copy_from_slice(&sums);
            MsStatus::MsOk
        }
        Err(e) => fail(MsStatus::MsInvalidArgument, &e.to_string()),
    }
}
