//! Golden JSON output, one instance per command. Set `UPDATE_GOLDEN=1` to rewrite.

mod support;

use support::{goldens_stable, run_bin, CASES};

#[test]
fn goldens_are_byte_stable() {
    goldens_stable(std::env::var_os("UPDATE_GOLDEN").is_some()).unwrap();
}

#[test]
fn errors_have_distinct_exit_codes() {
    assert_eq!(run_bin(&["check", "--theory", "rho-pi", "--term", "out(", "--pred", "top"]).0, 2);
    assert_eq!(run_bin(&["check", "--theory", "rho-pi", "--term", "out(0, 0)", "--pred", "top"]).0, 3);
    assert_eq!(run_bin(&["check", "--theory", "no-such-theory", "--term", "0", "--pred", "top"]).0, 1);
    let (code, out) = run_bin(&["check", "--theory", "rho-pi", "--term", "out(", "--pred", "top", "--json"]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["error"]["message"].is_string());
}

#[test]
fn timing_is_opt_in() {
    let (_, out) = run_bin(CASES[1].1);
    assert!(!out.contains("elapsed_ms"));
    let mut args = CASES[1].1.to_vec();
    args.push("--timing");
    let (_, out) = run_bin(&args);
    assert!(out.contains("elapsed_ms"));
}
