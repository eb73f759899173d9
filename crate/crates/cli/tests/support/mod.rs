//! Command instances shared by the golden and acceptance suites.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

pub const CASES: [(&str, &[&str]); 6] = [
    ("validate", &["validate", "--theory", "rho-pi", "--json"]),
    ("trace", &["trace", "--theory", "rho-pi", "--term", "out(n, out(a, 0)) | in(n, \\x. *x)", "--json"]),
    ("check", &["check", "--theory", "rho-pi", "--term", "out(n, 0) | in(n, \\x. *x)", "--pred", "B!o(<0>)", "--json"]),
    ("bisim", &["bisim", "--theory", "rho-pi", "--left", "out(a, 0)", "--right", "out(b, 0)", "--json"]),
    ("translate", &["translate", "--morphism", "nlambda-to-pi", "--term", "app(lam(\\x. var(x)), y)", "--json"]),
    ("query", &["query", "--theory", "rho-pi", "--universe-depth", "1", "--pred", "{out(N, P)}", "--json"]),
];

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"))
}

pub fn run_bin(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ntt")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

/// Runs every case three times; the error names the first case whose output
/// is unstable or differs from its golden file.
pub fn goldens_stable(update: bool) -> Result<(), String> {
    for (name, args) in CASES {
        let runs: Vec<(i32, String)> = (0..3).map(|_| run_bin(args)).collect();
        if runs[0].0 != 0 {
            return Err(format!("{name} exited with {}", runs[0].0));
        }
        if runs.iter().any(|r| r != &runs[0]) {
            return Err(format!("{name} output differs between runs"));
        }
        let path = golden_path(name);
        if update {
            std::fs::write(&path, &runs[0].1).map_err(|e| e.to_string())?;
        }
        let want = std::fs::read_to_string(&path).map_err(|_| format!("missing {}", path.display()))?;
        if runs[0].1 != want {
            return Err(format!("{name} differs from its golden file"));
        }
    }
    Ok(())
}
