//! Resolves a run request, consults the content-addressed cache, runs the
//! experiment and writes the report files atomically.

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use flatdet::report::ExperimentReport;

use crate::canonical;
use crate::config::{ExperimentId, RawConfig};
use crate::error::CliError;
use crate::experiments::{self, Resolved};

pub const CACHE_ENV: &str = "FLATDET_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".flatdet-cache";

#[derive(Clone, Debug, Default)]
pub struct RunRequest {
    pub experiment: Option<ExperimentId>,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub no_cache: bool,
    pub jobs: Option<usize>,
    pub parameters: Map<String, Value>,
    pub tolerances: Map<String, Value>,
    /// Overrides the environment and the default cache location.
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct Prepared {
    pub resolved: Resolved,
    pub key: String,
    pub output: PathBuf,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub csv: PathBuf,
    pub timing: PathBuf,
    pub key: String,
    pub passed: bool,
    pub cache_hit: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Hash of the resolved configuration and the crate version.
pub fn cache_key(echo: &Value) -> String {
    canonical::hash(&json!({ "config": echo, "version": env!("CARGO_PKG_VERSION") }))
}

/// Merges the config file with command-line overrides and checks the result
/// against the experiment schema. Nothing is written.
pub fn prepare(req: &RunRequest) -> Result<Prepared, CliError> {
    let raw = match &req.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    let from_file = raw.experiment.as_deref().map(str::parse::<ExperimentId>).transpose()?;
    let experiment = match (req.experiment, from_file) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Usage(format!("experiment {a} conflicts with {b} in the config file")))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(CliError::Usage("no experiment given".into())),
    };
    let mut parameters = raw.parameters;
    parameters.extend(req.parameters.clone());
    let mut tolerances = raw.tolerances;
    tolerances.extend(req.tolerances.clone());
    let seed = req.seed.or(raw.seed).unwrap_or(0);
    let resolved = experiments::resolve(experiment, seed, &parameters, &tolerances)?;
    let key = cache_key(&resolved.echo);
    let output = req
        .output
        .clone()
        .or(raw.output)
        .unwrap_or_else(|| PathBuf::from("reports").join(format!("{experiment}.json")));
    Ok(Prepared { resolved, key, output })
}

fn cache_dir(req: &RunRequest) -> PathBuf {
    req.cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Writes through a temporary file in the target directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

fn run_experiment(resolved: &Resolved, jobs: Option<usize>) -> Result<ExperimentReport, CliError> {
    let job = || {
        panic::catch_unwind(AssertUnwindSafe(|| experiments::run(resolved))).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            let mut r = ExperimentReport::new(resolved.experiment.name(), resolved.echo.clone());
            r.failures.push(format!("experiment panicked: {msg}"));
            r
        })
    };
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("--jobs {n}: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// The report document: the experiment report plus its cache key and the
/// overall verdict.
pub fn report_document(report: &ExperimentReport, key: &str) -> Value {
    let mut doc = serde_json::to_value(report).unwrap_or(Value::Null);
    if let Value::Object(m) = &mut doc {
        m.insert("cache_key".into(), json!(key));
        m.insert("passed".into(), json!(report.passed()));
    }
    doc
}

pub fn execute(req: &RunRequest, prepared: &Prepared) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let output = &prepared.output;
    let csv = sibling(output, ".csv");
    let timing = sibling(output, ".timing.json");
    let cache = cache_dir(req);
    let cached_json = cache.join(format!("{}.json", prepared.key));
    let cached_csv = cache.join(format!("{}.csv", prepared.key));

    let hit = if req.no_cache { None } else { read_cached(&cached_json, &cached_csv) };
    let cache_hit = hit.is_some();
    let (json_bytes, csv_bytes, passed) = match hit {
        Some(x) => x,
        None => {
            let report = run_experiment(&prepared.resolved, req.jobs)?;
            let doc = report_document(&report, &prepared.key);
            let bytes = canonical::to_pretty(&doc).into_bytes();
            let csv_bytes = report.rows_csv().into_bytes();
            if !req.no_cache {
                // a cache that cannot be written only costs a rerun
                let _ = write_atomic(&cached_json, &bytes).and_then(|_| write_atomic(&cached_csv, &csv_bytes));
            }
            (bytes, csv_bytes, report.passed())
        }
    };
    write_atomic(output, &json_bytes)?;
    write_atomic(&csv, &csv_bytes)?;
    let sidecar = json!({
        "cache_hit": cache_hit,
        "cache_key": prepared.key,
        "jobs": req.jobs,
        "started_at_unix": started_at,
        "wall_clock_seconds": start.elapsed().as_secs_f64(),
    });
    write_atomic(&timing, canonical::to_pretty(&sidecar).as_bytes())?;
    Ok(RunOutcome { output: output.clone(), csv, timing, key: prepared.key.clone(), passed, cache_hit })
}

fn read_cached(json_path: &Path, csv_path: &Path) -> Option<(Vec<u8>, Vec<u8>, bool)> {
    let bytes = std::fs::read(json_path).ok()?;
    let csv = std::fs::read(csv_path).ok()?;
    let doc: Value = serde_json::from_slice(&bytes).ok()?;
    let passed = doc.get("passed")?.as_bool()?;
    Some((bytes, csv, passed))
}

/// `prepare` followed by `execute`.
pub fn run(req: &RunRequest) -> Result<RunOutcome, CliError> {
    let prepared = prepare(req)?;
    execute(req, &prepared)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/r.json"), ".csv"), PathBuf::from("out/r.csv"));
        assert_eq!(sibling(Path::new("r.json"), ".timing.json"), PathBuf::from("r.timing.json"));
    }

    #[test]
    fn defaults_resolve_for_every_experiment() {
        for e in ExperimentId::ALL {
            let p = prepare(&RunRequest { experiment: Some(e), ..Default::default() }).unwrap();
            assert_eq!(p.output, PathBuf::from(format!("reports/{e}.json")));
            assert_eq!(p.resolved.echo["experiment"], json!(e.name()));
        }
    }

    #[test]
    fn unknown_parameter_is_a_usage_error() {
        let mut parameters = Map::new();
        parameters.insert("nope".into(), json!(1));
        let req = RunRequest { experiment: Some(ExperimentId::FiniteBv), parameters, ..Default::default() };
        match prepare(&req) {
            Err(CliError::Usage(msg)) => assert!(msg.contains("nope"), "{msg}"),
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn seed_enters_the_key() {
        let a = prepare(&RunRequest { experiment: Some(ExperimentId::FiniteBv), seed: Some(1), ..Default::default() }).unwrap();
        let b = prepare(&RunRequest { experiment: Some(ExperimentId::FiniteBv), seed: Some(2), ..Default::default() }).unwrap();
        assert_ne!(a.key, b.key);
    }
}
