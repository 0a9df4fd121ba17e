use std::path::{Path, PathBuf};

use mmw_core::Violation;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};
use crate::presets::preset;

const MAX_INCLUDE_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PnPsd,
    PnSynth,
    PaBussgang,
    PaGmpFit,
    ArrayPattern,
    TaBudget,
    LinkBler,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::PnPsd,
        ExperimentKind::PnSynth,
        ExperimentKind::PaBussgang,
        ExperimentKind::PaGmpFit,
        ExperimentKind::ArrayPattern,
        ExperimentKind::TaBudget,
        ExperimentKind::LinkBler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PnPsd => "pn-psd",
            ExperimentKind::PnSynth => "pn-synth",
            ExperimentKind::PaBussgang => "pa-bussgang",
            ExperimentKind::PaGmpFit => "pa-gmp-fit",
            ExperimentKind::ArrayPattern => "array-pattern",
            ExperimentKind::TaBudget => "ta-budget",
            ExperimentKind::LinkBler => "link-bler",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// A fully resolved experiment file: includes merged, top level checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Output directory, relative paths taken against the config's folder.
    pub output: Option<PathBuf>,
    pub params: Value,
    /// Folder against which relative paths in `params` resolve.
    pub base_dir: PathBuf,
    /// The merged document, used for hashing and for echoing the run.
    pub resolved: Table,
}

impl ExperimentConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.resolved
            .insert("seed".into(), Value::Integer(seed as i64));
        self
    }

    /// SHA-256 of the canonical JSON rendering of the resolved document.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.resolved).expect("TOML values always serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Where an include entry points.
enum Source {
    Preset(String),
    File(PathBuf),
}

fn parse_source(s: &str, base: &Path) -> Source {
    match s.strip_prefix("preset:") {
        Some(name) => Source::Preset(name.to_string()),
        None => Source::File(base.join(s)),
    }
}

fn parse_toml(text: &str, origin: &str) -> CliResult<Table> {
    // A file that is not TOML at all is corrupt input, not a bad value.
    text.parse::<Table>().map_err(|e| {
        CliError::io(
            origin,
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                e.to_string().trim_end().to_string(),
            ),
        )
    })
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Recursive merge; values in `over` win, tables merge key by key.
pub fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn place(table: Table, at: &str) -> Table {
    if at.is_empty() {
        return table;
    }
    let mut out = table;
    for key in at.rsplit('.') {
        let mut t = Table::new();
        t.insert(key.to_string(), Value::Table(out));
        out = t;
    }
    out
}

/// Expands `include` entries (strings, or `{ source, at }` tables) depth
/// first. Each document overrides what it includes.
fn resolve(
    mut doc: Table,
    base: &Path,
    origin: &str,
    depth: usize,
    stack: &mut Vec<String>,
) -> CliResult<Table> {
    let Some(includes) = doc.remove("include") else {
        return Ok(doc);
    };
    if depth >= MAX_INCLUDE_DEPTH {
        return Err(CliError::Invalid(vec![Violation::new(
            format!("{origin}: include"),
            format!("includes nested deeper than {MAX_INCLUDE_DEPTH}"),
        )]));
    }
    let entries = match includes {
        Value::Array(a) => a,
        other => vec![other],
    };
    let mut merged = Table::new();
    for (i, entry) in entries.into_iter().enumerate() {
        let locator = format!("{origin}: include[{i}]");
        let (source, at) = match entry {
            Value::String(s) => (s, String::new()),
            Value::Table(mut t) => {
                let source = match t.remove("source") {
                    Some(Value::String(s)) => s,
                    _ => {
                        return Err(CliError::Invalid(vec![Violation::new(
                            locator,
                            "needs a string `source`",
                        )]))
                    }
                };
                let at = match t.remove("at") {
                    None => String::new(),
                    Some(Value::String(s)) => s,
                    Some(_) => {
                        return Err(CliError::Invalid(vec![Violation::new(
                            locator,
                            "`at` must be a dotted key",
                        )]))
                    }
                };
                if let Some(k) = t.keys().next() {
                    return Err(CliError::Invalid(vec![Violation::new(
                        locator,
                        format!("unknown key `{k}`"),
                    )]));
                }
                (source, at)
            }
            _ => {
                return Err(CliError::Invalid(vec![Violation::new(
                    locator,
                    "must be a string or a table",
                )]))
            }
        };
        if stack.contains(&source) {
            return Err(CliError::Invalid(vec![Violation::new(
                locator,
                format!("include cycle through `{source}`"),
            )]));
        }
        let (text, child_base, child_origin) = match parse_source(&source, base) {
            Source::Preset(name) => {
                let p = preset(&name).ok_or_else(|| {
                    CliError::Invalid(vec![Violation::new(
                        locator.clone(),
                        format!("unknown preset `{name}`"),
                    )])
                })?;
                (
                    p.text.to_string(),
                    base.to_path_buf(),
                    format!("preset:{name}"),
                )
            }
            Source::File(path) => {
                let text = read_file(&path)?;
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (text, dir, path.display().to_string())
            }
        };
        let child = parse_toml(&text, &child_origin)?;
        stack.push(source);
        let child = resolve(child, &child_base, &child_origin, depth + 1, stack)?;
        stack.pop();
        merge(&mut merged, place(child, &at));
    }
    merge(&mut merged, doc);
    Ok(merged)
}

/// Parses an experiment document whose relative includes resolve against
/// `base`.
pub fn parse_config(text: &str, base: &Path, origin: &str) -> CliResult<ExperimentConfig> {
    let doc = parse_toml(text, origin)?;
    let resolved = resolve(doc, base, origin, 0, &mut Vec::new())?;
    let mut problems = Vec::new();
    let kind = match resolved.get("kind") {
        Some(Value::String(s)) => match ExperimentKind::parse(s) {
            Some(k) => Some(k),
            None => {
                let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                return Err(CliError::Usage(format!(
                    "unknown experiment kind `{s}` (expected one of {})",
                    names.join(", ")
                )));
            }
        },
        Some(_) => {
            problems.push(Violation::new("kind", "must be a string"));
            None
        }
        None => {
            problems.push(Violation::new("kind", "missing"));
            None
        }
    };
    let seed = match resolved.get("seed") {
        None => 0,
        Some(Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(_) => {
            problems.push(Violation::new("seed", "must be a non-negative integer"));
            0
        }
    };
    let output = match resolved.get("output") {
        None => None,
        Some(Value::String(s)) => Some(base.join(s)),
        Some(_) => {
            problems.push(Violation::new("output", "must be a path string"));
            None
        }
    };
    let params = match resolved.get("params") {
        Some(v @ Value::Table(_)) => v.clone(),
        Some(_) => {
            problems.push(Violation::new("params", "must be a table"));
            Value::Table(Table::new())
        }
        None => {
            problems.push(Violation::new("params", "missing parameter block"));
            Value::Table(Table::new())
        }
    };
    for k in resolved.keys() {
        if !["kind", "seed", "output", "params"].contains(&k.as_str()) {
            problems.push(Violation::new(k.clone(), "unknown top-level key"));
        }
    }
    match (kind, problems.is_empty()) {
        (Some(kind), true) => Ok(ExperimentConfig {
            kind,
            seed,
            output,
            params,
            base_dir: base.to_path_buf(),
            resolved,
        }),
        _ => Err(CliError::Invalid(problems)),
    }
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = read_file(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base, &path.display().to_string())
}
