use std::ffi::{CStr, CString};
use std::ptr;

use splitqp_ffi::*;

const TRIANGLE: &str = r#"{"n":3,"quadratic":[[0,1,2.0],[0,2,2.0],[1,2,2.0]],"linear":[-2.0,-2.0,-2.0],"problem_class":"max_cut"}"#;

fn last_error() -> String {
    unsafe { CStr::from_ptr(splitqp_last_error()) }.to_string_lossy().into_owned()
}

fn problem(json: &str) -> *mut SplitqpProblem {
    let text = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { splitqp_problem_from_json(text.as_ptr(), &mut p) }, SplitqpStatus::Ok);
    p
}

#[test]
fn solve_triangle_through_handles() {
    unsafe {
        let p = problem(TRIANGLE);
        let mut n = 0usize;
        assert_eq!(splitqp_problem_num_vars(p, &mut n), SplitqpStatus::Ok);
        assert_eq!(n, 3);

        let mut cfg = ptr::null_mut();
        assert_eq!(splitqp_config_new(1, &mut cfg), SplitqpStatus::Ok);
        assert_eq!(splitqp_config_set_workers(cfg, 1), SplitqpStatus::Ok);
        let name = CString::new("exhaustive").unwrap();
        assert_eq!(splitqp_config_set_subsolver(cfg, name.as_ptr()), SplitqpStatus::Ok);

        let mut report = ptr::null_mut();
        assert_eq!(splitqp_solve(p, cfg, &mut report), SplitqpStatus::Ok);
        let mut cost = 0.0;
        assert_eq!(splitqp_report_best_cost(report, &mut cost), SplitqpStatus::Ok);
        assert_eq!(cost, -2.0);
        let mut feasible = false;
        assert_eq!(splitqp_report_feasible(report, &mut feasible), SplitqpStatus::Ok);
        assert!(feasible);
        let mut iters = 0usize;
        assert_eq!(splitqp_report_iterations(report, &mut iters), SplitqpStatus::Ok);
        assert_eq!(iters, 1);

        let mut bits = [9u8; 3];
        assert_eq!(splitqp_report_copy_assignment(report, bits.as_mut_ptr(), 3), SplitqpStatus::Ok);
        let mut again = 0.0;
        assert_eq!(splitqp_problem_evaluate(p, bits.as_ptr(), 3, &mut again), SplitqpStatus::Ok);
        assert_eq!(again, -2.0);
        assert_eq!(
            splitqp_report_copy_assignment(report, bits.as_mut_ptr(), 2),
            SplitqpStatus::BufferTooSmall
        );

        let mut json = ptr::null_mut();
        assert_eq!(splitqp_report_to_json(report, &mut json), SplitqpStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        splitqp_string_free(json);
        assert_eq!(splitqp::SolveReport::from_json(&text).unwrap().best_cost, -2.0);

        splitqp_report_free(report);
        splitqp_config_free(cfg);
        splitqp_problem_free(p);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(splitqp_problem_from_json(ptr::null(), &mut p), SplitqpStatus::NullPointer);
        let bad = CString::new("{not json").unwrap();
        assert_eq!(splitqp_problem_from_json(bad.as_ptr(), &mut p), SplitqpStatus::Parse);
        assert!(!last_error().is_empty());
        let invalid = [0xffu8, 0];
        assert_eq!(
            splitqp_problem_from_json(invalid.as_ptr().cast(), &mut p),
            SplitqpStatus::InvalidUtf8
        );

        let p = problem(TRIANGLE);
        let bits = [0u8, 2, 0];
        let mut cost = 0.0;
        assert_eq!(splitqp_problem_evaluate(p, bits.as_ptr(), 3, &mut cost), SplitqpStatus::InvalidArgument);
        assert_eq!(splitqp_problem_evaluate(p, bits.as_ptr(), 2, &mut cost), SplitqpStatus::InvalidArgument);

        let mut cfg = ptr::null_mut();
        assert_eq!(splitqp_config_new(5, &mut cfg), SplitqpStatus::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(splitqp_solve(p, cfg, &mut report), SplitqpStatus::InvalidArgument);
        assert!(report.is_null());
        assert!(last_error().contains('k'));
        let name = CString::new("simplex").unwrap();
        assert_eq!(splitqp_config_set_subsolver(cfg, name.as_ptr()), SplitqpStatus::InvalidArgument);
        assert_eq!(splitqp_config_set_seed(ptr::null_mut(), 1), SplitqpStatus::NullPointer);
        splitqp_config_free(cfg);
        splitqp_problem_free(p);

        splitqp_problem_free(ptr::null_mut());
        splitqp_config_free(ptr::null_mut());
        splitqp_report_free(ptr::null_mut());
        splitqp_string_free(ptr::null_mut());
    }
}

#[test]
fn infeasible_quota_is_reported() {
    let json = r#"{"n":2,"quadratic":[],"linear":[0.0,0.0],
        "constraints":[{"kind":"cardinality_eq","support":[0,1],"coefficients":[1.0,1.0],"bound":3.0}]}"#;
    let text = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    let status = unsafe { splitqp_problem_from_json(text.as_ptr(), &mut p) };
    if status != SplitqpStatus::Ok {
        // rejected at load time
        assert_eq!(status, SplitqpStatus::Parse);
        return;
    }
    unsafe {
        let mut cfg = ptr::null_mut();
        splitqp_config_new(1, &mut cfg);
        let mut report = ptr::null_mut();
        assert_eq!(splitqp_solve(p, cfg, &mut report), SplitqpStatus::Infeasible);
        splitqp_config_free(cfg);
        splitqp_problem_free(p);
    }
}

#[test]
fn config_from_json_and_budget() {
    unsafe {
        let text = CString::new(r#"{"k":2,"seed":4,"worker_count":1,"budget":{"node_budget":500}}"#).unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(splitqp_config_from_json(text.as_ptr(), &mut cfg), SplitqpStatus::Ok);
        assert_eq!(splitqp_config_set_budget(cfg, 1000, 0.0), SplitqpStatus::Ok);
        assert_eq!(splitqp_config_set_iterations(cfg, 3), SplitqpStatus::Ok);
        let sweep = CString::new("none").unwrap();
        assert_eq!(splitqp_config_set_sweep(cfg, sweep.as_ptr()), SplitqpStatus::Ok);
        let p = problem(TRIANGLE);
        let mut report = ptr::null_mut();
        assert_eq!(splitqp_solve(p, cfg, &mut report), SplitqpStatus::Ok);
        let mut n = 0usize;
        assert_eq!(splitqp_report_num_vars(report, &mut n), SplitqpStatus::Ok);
        assert_eq!(n, 3);
        splitqp_report_free(report);
        splitqp_problem_free(p);
        splitqp_config_free(cfg);
    }
}

#[test]
fn header_is_valid_c() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/splitqp.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["splitqp_solve", "splitqp_last_error", "SPLITQP_STATUS_INFEASIBLE", "typedef struct SplitqpProblem"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = std::process::Command::new("cc")
        .args(["-std=c99", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler available; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
