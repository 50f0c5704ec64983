use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

pub const ROOT_ENV: &str = "IFDYN_ARTIFACT_ROOT";

/// `--out` if absolute; otherwise joined onto the artifact root
/// (environment override, else `artifacts`). Defaults to the kind name.
pub fn resolve_out(out: Option<&Path>, kind: &str) -> PathBuf {
    let rel = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(kind));
    if rel.is_absolute() {
        return rel;
    }
    match std::env::var_os(ROOT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(rel),
        _ if out.is_some() => rel,
        _ => PathBuf::from("artifacts").join(rel),
    }
}

/// One pass/fail line of the summary.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    /// Lower end for two-sided checks; `limit` is then the upper end.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value <= limit, value, limit, lower: None }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value >= limit, value, limit, lower: None }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), passed: value >= lo && value <= hi, value, limit: hi, lower: Some(lo) }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self { name: name.into(), passed: ok, value: ok as u8 as f64, limit: 1.0, lower: None }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    kind: &'a str,
    passed: bool,
    checks: &'a [Check],
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    kind: &'a str,
    status: &'a str,
    config_source: Option<String>,
    threads: usize,
    seed: Option<u64>,
    started_unix: f64,
    finished_unix: f64,
    timings: Vec<Timing>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Timing {
    stage: String,
    seconds: f64,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub struct Artifacts {
    pub dir: PathBuf,
    pub kind: String,
    pub config_source: Option<String>,
    pub threads: usize,
    pub seed: Option<u64>,
    started: f64,
    files: Vec<String>,
    timings: Vec<Timing>,
    stage: Option<(String, Instant)>,
}

impl Artifacts {
    pub fn create(dir: PathBuf, kind: &str, config_source: Option<String>, threads: usize, seed: Option<u64>) -> Result<Self> {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        // a previous failed run into the same directory
        let stale = dir.join("failure.json");
        if stale.exists() {
            std::fs::remove_file(stale)?;
        }
        Ok(Self {
            dir,
            kind: kind.to_string(),
            config_source,
            threads,
            seed,
            started: unix_now(),
            files: Vec::new(),
            timings: Vec::new(),
            stage: None,
        })
    }

    pub fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        if !self.files.iter().any(|f| f == rel) {
            self.files.push(rel.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text)
    }

    /// Closes the current stage, if any, and opens `name`.
    pub fn stage(&mut self, name: &str) {
        self.end_stage();
        self.stage = Some((name.to_string(), Instant::now()));
    }

    fn end_stage(&mut self) {
        if let Some((name, t)) = self.stage.take() {
            self.timings.push(Timing { stage: name, seconds: t.elapsed().as_secs_f64() });
        }
    }

    pub fn finish_checks(&mut self, checks: &[Check]) -> Result<bool> {
        let passed = checks.iter().all(|c| c.passed);
        let kind = self.kind.clone();
        self.write_json("summary.json", &Summary { kind: &kind, passed, checks })?;
        Ok(passed)
    }

    pub fn write_manifest(&mut self, status: &str) -> Result<()> {
        self.end_stage();
        let mut files = self.files.clone();
        files.push("manifest.json".into());
        files.sort();
        let m = Manifest {
            tool: "ifdyn",
            version: env!("CARGO_PKG_VERSION"),
            kind: &self.kind,
            status,
            config_source: self.config_source.clone(),
            threads: self.threads,
            seed: self.seed,
            started_unix: self.started,
            finished_unix: unix_now(),
            timings: std::mem::take(&mut self.timings),
            files,
        };
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        std::fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}
