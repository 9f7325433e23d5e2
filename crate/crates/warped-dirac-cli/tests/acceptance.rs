//! Acceptance criterion for the command-line layer: determinism.

use std::path::Path;
use std::process::Command;

fn run_with_config(dir: &Path, out_name: &str) {
    let config = format!(
        "mode = evolve_einstein\nparity = even\nm = 1\na = 1\nlambda_m = 0\nlambda_q = 1\n\
         epsilon = 1\nnorm = 1\nsign = 1\nt_end = 0.5\nstep = 1e-4\ntol = 1e-6\n\
         out = {out_name}\nformat = csv\n"
    );
    let cfg_path = dir.join(format!("{out_name}.cfg"));
    std::fs::write(&cfg_path, config).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_warped-dirac"))
        .arg("run")
        .arg("--config")
        .arg(&cfg_path)
        .current_dir(dir)
        .status()
        .expect("binary runs");
    assert_eq!(status.code(), Some(0));
}

#[test]
fn ac10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    run_with_config(dir.path(), "first.csv");
    run_with_config(dir.path(), "second.csv");
    let a = std::fs::read(dir.path().join("first.csv")).unwrap();
    let b = std::fs::read(dir.path().join("second.csv")).unwrap();
    let ok = a == b && !a.is_empty();
    println!(
        "AC-10 CLI determinism: {} ({} bytes, byte-identical: {})",
        if ok { "pass" } else { "FAIL" },
        a.len(),
        a == b
    );
    assert!(ok, "identical configs must produce byte-identical CSV");
}
