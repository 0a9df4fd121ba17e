use std::path::{Path, PathBuf};
use std::process::Command;

use mmw_cli::{load_config, run_experiment, validate_config};

fn mmw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mmw"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Data rows of an emitted CSV, `#` header skipped.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records()
        .map(|x| x.unwrap().iter().map(str::to_string).collect())
        .collect()
}

const SET_A_PSD: &str = r#"
include = [{ source = "preset:pn-set-a", at = "params.pole_zero" }]
kind = "pn-psd"
seed = 2

[params]
f_min_hz = 1e4
f_max_hz = 1e8
points_per_decade = 10
"#;

#[test]
fn psd_lowest_bin_approaches_floor_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", SET_A_PSD);
    let out = dir.path().join("out");
    let st = mmw()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    let rows = csv_rows(&out.join("psd.csv"));
    assert_eq!(rows.len(), 41);
    let f0: f64 = rows[0][0].parse().unwrap();
    let l0: f64 = rows[0][1].parse().unwrap();
    assert_eq!(f0, 1e4);
    // the 100 kHz pole already takes 0.04 dB off at 10 kHz
    assert!((l0 + 79.4).abs() < 0.1, "{l0}");
    let last: f64 = rows[40][1].parse().unwrap();
    assert!(last < l0 - 40.0);
}

#[test]
fn csv_header_carries_hash_seed_and_version() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", SET_A_PSD);
    let out = dir.path().join("out");
    let m = run_experiment(&load_config(&cfg).unwrap(), &out).unwrap();
    let text = std::fs::read_to_string(out.join("psd.csv")).unwrap();
    let head: Vec<&str> = text.lines().take(4).collect();
    assert_eq!(
        head[0],
        format!("# tool: mmw {}", env!("CARGO_PKG_VERSION"))
    );
    assert_eq!(head[2], format!("# config_sha256: {}", m.config_sha256));
    assert_eq!(head[3], "# seed: 2");
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_sha256"], m.config_sha256.as_str());
    assert_eq!(
        manifest["outputs"].as_array().unwrap().len(),
        m.outputs.len()
    );
    let mirror: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("psd.json")).unwrap()).unwrap();
    assert_eq!(mirror["rows"].as_array().unwrap().len(), 41);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.toml",
        r#"
kind = "pa-bussgang"
seed = 9
[params]
theta1 = [1.0, 0.1]
theta2 = [-0.1, 0.05]
sigma_x2 = [0.5, 1.0]
mc_samples = 20000
"#,
    );
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let st = mmw()
            .arg("run")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
            .status;
        assert!(st.success());
        std::fs::read(out.join("bussgang.csv")).unwrap()
    };
    let a = run("one");
    assert_eq!(a, run("two"));

    let out = dir.path().join("three");
    let st = mmw()
        .arg("run")
        .arg(&cfg)
        .args(["--seed", "10", "--out"])
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    assert_ne!(a, std::fs::read(out.join("bussgang.csv")).unwrap());
}

#[test]
fn seed_override_changes_the_hash() {
    let cfg = load_config(&sample("pa-gmp-fit.toml")).unwrap();
    assert_eq!(
        cfg.hash(),
        load_config(&sample("pa-gmp-fit.toml")).unwrap().hash()
    );
    assert_ne!(cfg.hash(), cfg.clone().with_seed(6).hash());
}

#[test]
fn backhaul_three_bit_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ta");
    let m = run_experiment(
        &load_config(&sample("ta-backhaul-3bit.toml")).unwrap(),
        &out,
    )
    .unwrap();
    assert!(m.outputs.iter().any(|p| p.ends_with("pattern.csv")));
    let rows = csv_rows(&out.join("budget.csv"));
    let net: f64 = rows[0][5].parse().unwrap();
    assert!((net - 33.5).abs() <= 1.5, "{net}");
}

#[test]
fn sample_configs_validate() {
    for entry in std::fs::read_dir(sample("")).unwrap() {
        let p = entry.unwrap().path();
        let v = validate_config(&p).unwrap();
        assert!(v.is_empty(), "{}: {v:?}", p.display());
    }
}

#[test]
fn set_a_verbatim_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.toml",
        r#"
kind = "pn-psd"
[params]
f_min_hz = 100.0
f_max_hz = 1e8
[params.pole_zero]
psd0_dbc_hz = -79.4
poles_mhz = [0.1, 0.2, 8.0]
zeros_mhz = [1.8, 2.2, 40.0]
base_carrier_ghz = 30.0
"#,
    );
    let out = mmw().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid"));
}

#[test]
fn pole_zero_mismatch_is_named() {
    let v = validate_config(&fixture("pole-zero-mismatch.toml")).unwrap();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].field, "params.pole_zero.zeros_mhz");
    assert!(v[0].message.contains("pair"));
    let out = mmw()
        .arg("validate")
        .arg(fixture("pole-zero-mismatch.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn negative_focal_distance_has_locator() {
    let out = mmw()
        .arg("validate")
        .arg(fixture("negative-focal.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("params.transmitarray.focal_distance_mm"),
        "{err}"
    );
}

#[test]
fn every_violation_is_listed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        r#"
kind = "link-bler"
[params]
snr_db = []
trials = 0
[params.ofdm]
n_subcarriers = 64
cp_len = 8
subcarrier_spacing_hz = 15000.0
n_tx = 2
n_rx = 1
modulation = "16QAM"
[params.allocation]
n_prbs = 10
[params.channel]
kind = "flat-awgn"
"#,
    );
    let v = validate_config(&cfg).unwrap();
    let fields: Vec<&str> = v.iter().map(|x| x.field.as_str()).collect();
    for f in [
        "params.snr_db",
        "params.trials",
        "params.allocation",
        "params.ofdm.n_tx",
    ] {
        assert!(
            fields.iter().any(|x| x.starts_with(f)),
            "{f} missing from {fields:?}"
        );
    }
}

#[test]
fn runs_refuse_invalid_configs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let st = mmw()
        .arg("run")
        .arg(fixture("negative-focal.toml"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert_eq!(st.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn unknown_kind_is_a_usage_error() {
    let out = mmw()
        .arg("run")
        .arg(fixture("unknown-kind.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pn-psd"));
    assert_eq!(
        mmw().arg("frobnicate").output().unwrap().status.code(),
        Some(1)
    );
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        mmw()
            .arg("validate")
            .arg(&missing)
            .output()
            .unwrap()
            .status
            .code(),
        Some(3)
    );
    let corrupt = write(dir.path(), "c.toml", "kind = \"pn-psd\n[params\n");
    assert_eq!(
        mmw()
            .arg("validate")
            .arg(&corrupt)
            .output()
            .unwrap()
            .status
            .code(),
        Some(3)
    );

    // output path blocked by a plain file
    let cfg = write(dir.path(), "a.toml", SET_A_PSD);
    let blocker = write(dir.path(), "blocker", "");
    let st = mmw()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap()
        .status;
    assert_eq!(st.code(), Some(3));
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // a loop gain this small never crosses unity
    let cfg = write(
        dir.path(),
        "p.toml",
        r#"
kind = "pn-psd"
[params]
f_min_hz = 1e3
f_max_hz = 1e6
[params.pll]
kd = 1e-12
kvco = 1.0
nd = 10.0
loop_filter = { numerator = [1.0], denominator = [1.0] }
reference = { kind = "off" }
loop_noise = { kind = "off" }
vco = { kind = "power-law", points = [[1e3, -60.0], [1e6, -120.0]] }
"#,
    );
    let st = mmw()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap()
        .status;
    assert_eq!(st.code(), Some(2));
}

#[test]
fn mask_files_resolve_against_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_experiment(
        &load_config(&fixture("masked-array.toml")).unwrap(),
        dir.path(),
    )
    .unwrap();
    assert_eq!(m.kind, "array-pattern");
    let s: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["summary"]["mask"]["pass"], true);
    assert_eq!(s["summary"]["grating_lobe_limit_deg"], 90.0);
}

#[test]
fn presets_are_listed() {
    let out = mmw().args(["presets", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "pn-set-a",
        "pn-set-b",
        "ta-backhaul-3bit",
        "link-ptrs-100prb",
    ] {
        assert!(text.contains(name));
    }
}
