//! Config-driven experiment runner. An experiment file names a kind, a
//! seed and a parameter block; [`run_experiment`] writes CSV tables with
//! `#` metadata headers, a JSON mirror of each, a summary and a manifest.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{load_config, parse_config, ExperimentConfig, ExperimentKind};
pub use error::{CliError, CliResult};
use mmw_core::Violation;
pub use output::RunManifest;
use output::{render_csv, render_json, write_atomic, RunMeta, VERSION};

pub const TOOL: &str = "mmw";

/// Every violated invariant of a config file; empty when it is valid.
pub fn validate_config(path: &Path) -> CliResult<Vec<Violation>> {
    match load_config(path) {
        Ok(cfg) => Ok(experiments::param_violations(&cfg, &cfg.base_dir)),
        Err(CliError::Invalid(v)) => Ok(v),
        Err(e) => Err(e),
    }
}

fn meta(cfg: &ExperimentConfig) -> RunMeta {
    RunMeta {
        tool: TOOL,
        version: VERSION,
        kind: cfg.kind.name(),
        config_sha256: cfg.hash(),
        seed: cfg.seed,
    }
}

/// Output folder: explicit override, then the config's `output`, then
/// `out/<kind>` under the working directory.
pub fn output_dir(cfg: &ExperimentConfig, out_override: Option<&Path>) -> PathBuf {
    out_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.kind.name()))
}

pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<RunManifest> {
    let start = Instant::now();
    let artifacts = experiments::execute(cfg, &cfg.base_dir)?;
    let meta = meta(cfg);
    let mut outputs = Vec::new();
    for t in &artifacts.tables {
        let csv = out_dir.join(format!("{}.csv", t.name));
        write_atomic(&csv, &render_csv(t, &meta)?)?;
        let json = out_dir.join(format!("{}.json", t.name));
        write_atomic(&json, &render_json(t, &meta))?;
        outputs.push(csv);
        outputs.push(json);
    }
    let summary = serde_json::json!({ "meta": meta, "summary": artifacts.summary });
    let summary_path = out_dir.join("summary.json");
    let mut bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    bytes.push(b'\n');
    write_atomic(&summary_path, &bytes)?;
    outputs.push(summary_path);
    let config_path = out_dir.join("config.resolved.toml");
    let echoed = toml::to_string(&cfg.resolved).expect("resolved config serializes");
    write_atomic(&config_path, echoed.as_bytes())?;
    outputs.push(config_path);

    let manifest = RunManifest {
        tool: TOOL,
        version: VERSION,
        kind: cfg.kind.name(),
        config_sha256: meta.config_sha256.clone(),
        seed: cfg.seed,
        wall_clock_s: start.elapsed().as_secs_f64(),
        outputs,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(&out_dir.join("manifest.json"), &bytes)?;
    Ok(manifest)
}
