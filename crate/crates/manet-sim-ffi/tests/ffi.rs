//! Exercises the C ABI from Rust exactly as a foreign caller would:
//! raw pointers, NUL-terminated strings, and explicit frees.

use std::ffi::{CStr, CString};
use std::ptr;

use libc::c_char;

use manet_sim_ffi::*;

unsafe fn take_string(ptr: *mut c_char) -> String {
    let text = CStr::from_ptr(ptr).to_str().unwrap().to_owned();
    ms_string_free(ptr);
    text
}

unsafe fn last_error() -> String {
    CStr::from_ptr(ms_last_error()).to_str().unwrap().to_owned()
}

#[test]
fn builtin_roundtrips_through_print_and_parse() {
    unsafe {
        let name = CString::new("paper-6node").unwrap();
        let mut scenario: *mut MsScenario = ptr::null_mut();
        assert_eq!(
            ms_scenario_builtin(name.as_ptr(), &mut scenario),
            MsStatus::MsOk
        );

        let mut text_ptr: *mut c_char = ptr::null_mut();
        assert_eq!(ms_scenario_print(scenario, &mut text_ptr), MsStatus::MsOk);
        let text = take_string(text_ptr);
        assert!(text.contains("node 5 600 200"));

        let ctext = CString::new(text).unwrap();
        let mut reparsed: *mut MsScenario = ptr::null_mut();
        assert_eq!(
            ms_scenario_parse(ctext.as_ptr(), &mut reparsed),
            MsStatus::MsOk
        );
        ms_scenario_free(reparsed);
        ms_scenario_free(scenario);
    }
}

#[test]
fn simulate_returns_binned_csv() {
    unsafe {
        let name = CString::new("paper-6node").unwrap();
        let mut scenario: *mut MsScenario = ptr::null_mut();
        assert_eq!(
            ms_scenario_builtin(name.as_ptr(), &mut scenario),
            MsStatus::MsOk
        );
        let protocol = CString::new("randwalk").unwrap();
        let seeds = [1u64, 2];
        let mut csv_ptr: *mut c_char = ptr::null_mut();
        let status = ms_simulate_csv(
            scenario,
            protocol.as_ptr(),
            seeds.as_ptr(),
            seeds.len(),
            250_000,
            &mut csv_ptr,
        );
        assert_eq!(status, MsStatus::MsOk);
        let csv = take_string(csv_ptr);
        assert!(csv.starts_with("bin_start,protocol,seed,"));
        assert_eq!(csv.lines().count(), 1 + 2 * 13);
        ms_scenario_free(scenario);
    }
}

#[test]
fn hitting_time_matches_three_node_path() {
    // 0 - 1 - 2 path.
    let adj: [u8; 9] = [0, 1, 0, 1, 0, 1, 0, 1, 0];
    let mut h = 0.0f64;
    unsafe {
        assert_eq!(
            ms_hitting_time(adj.as_ptr(), 3, 0, 2, &mut h),
            MsStatus::MsOk
        );
    }
    assert!((h - 4.0).abs() < 1e-12);
}

#[test]
fn disconnected_pair_reports_unreachable() {
    let adj: [u8; 4] = [0, 0, 0, 0];
    let mut h = 0.0f64;
    unsafe {
        assert_eq!(
            ms_hitting_time(adj.as_ptr(), 2, 0, 1, &mut h),
            MsStatus::MsUnreachable
        );
        assert!(last_error().contains("unreachable"));
    }
}

#[test]
fn walk_series_fills_output_buffer() {
    let cdf = [1.0f64; 60];
    let mut sums = [0.0f64; 60];
    unsafe {
        assert_eq!(
            ms_walk_series(2.0, cdf.as_ptr(), 60, sums.as_mut_ptr()),
            MsStatus::MsOk
        );
    }
    assert!((sums[59] - 4.0).abs() < 1e-6);
    assert!(sums.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut scenario: *mut MsScenario = ptr::null_mut();
        let bad = CString::new("nonesuch").unwrap();
        assert_eq!(
            ms_scenario_builtin(bad.as_ptr(), &mut scenario),
            MsStatus::MsUnknownName
        );
        assert!(last_error().contains("nonesuch"));

        let garbage = CString::new("frobnicate 12").unwrap();
        assert_eq!(
            ms_scenario_parse(garbage.as_ptr(), &mut scenario),
            MsStatus::MsParseError
        );
        assert!(last_error().contains("line 1"));

        assert_eq!(
            ms_scenario_parse(ptr::null(), &mut scenario),
            MsStatus::MsNullPointer
        );

        let name = CString::new("paper-6node").unwrap();
        assert_eq!(
            ms_scenario_builtin(name.as_ptr(), &mut scenario),
            MsStatus::MsOk
        );
        let protocol = CString::new("dsr").unwrap();
        let seeds = [1u64];
        let mut csv_ptr: *mut c_char = ptr::null_mut();
        assert_eq!(
            ms_simulate_csv(
                scenario,
                protocol.as_ptr(),
                seeds.as_ptr(),
                1,
                250_000,
                &mut csv_ptr
            ),
            MsStatus::MsInvalidArgument
        );
        assert!(last_error().contains("unknown protocol"));
        ms_scenario_free(scenario);
    }
}
