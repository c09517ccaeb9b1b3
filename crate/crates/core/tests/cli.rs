//! End-to-end checks of the command-line interface.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fdnoma"))
}

#[test]
fn rate_region_emits_parseable_csv_and_is_repeatable() {
    let dir = std::env::temp_dir().join(format!("fdnoma-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("small.cfg");
    std::fs::write(
        &cfg_path,
        "trials = 4\nseed = 11\nrbar_grid = 0, 1.0\nschemes = optimum-fd, fixed-fd, half-duplex\n",
    )
    .unwrap();

    let run = || {
        let out = bin()
            .args(["rate-region", "--config"])
            .arg(&cfg_path)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "identical seeds must produce identical CSV bytes");

    let text = String::from_utf8(a).unwrap();
    let rows = fdnoma::driver::parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 2 * 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = std::env::temp_dir().join(format!("fdnoma-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("bad.cfg");
    std::fs::write(&cfg_path, "no_such_key = 1\n").unwrap();
    let out = bin()
        .args(["rate-region", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_config_file_exits_with_code_3() {
    let out = bin()
        .args(["single", "--rbar", "1.0", "--config", "/no/such/file.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn single_prints_diagnostics() {
    let out = bin()
        .args(["single", "--rbar", "1.0", "--trial", "2", "--seed", "5", "-v"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("feasibility interval"));
    assert!(text.contains("scheme optimum-fd"));
    assert!(text.contains("scheme half-duplex"));
}

#[test]
fn sdp_debug_writes_dump() {
    let out = bin()
        .args(["sdp-debug", "--rbar", "1.0", "--trial", "1", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("sdp-problem n=2 constraints=4"));
    assert!(text.contains("sdp-solution"));
}
