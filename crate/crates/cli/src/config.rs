//! Config files: TOML, unknown keys rejected, with `--override KEY=VALUE`
//! applied on top. Top-level `kind` and `seed` are shared by every
//! experiment and handled here.

use std::path::Path;

use ifdyn::validation::StudyConfig;
use ifdyn::PotentialSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

/// Validation failure; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

pub fn reference_spec() -> PotentialSpec {
    PotentialSpec { lambda_phi: 2.0, lambda_sigma: 1.0, beta: 1.2, d: 1.0, epsilon: 0.1, offset: 0.0 }
}

pub trait Experiment: DeserializeOwned + Serialize + Default {
    fn check(&self) -> Result<(), String>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSweepConfig {
    pub spec: PotentialSpec,
    pub r_min: f64,
    pub r_max: f64,
    pub knots: usize,
    /// Half-width of the profile grid; derived from the decay rate if absent.
    pub half_width: Option<f64>,
    pub n_points: usize,
}

impl Default for ProfileSweepConfig {
    fn default() -> Self {
        Self { spec: reference_spec(), r_min: 0.5, r_max: 10.0, knots: 64, half_width: None, n_points: 2049 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumMapConfig {
    pub spec: PotentialSpec,
    pub r_min: f64,
    pub r_max: f64,
    pub knots: usize,
    pub eigenvalues: usize,
    pub audit_samples: usize,
    pub half_width: Option<f64>,
    pub n_points: usize,
}

impl Default for SpectrumMapConfig {
    fn default() -> Self {
        Self {
            spec: reference_spec(),
            r_min: 2.0,
            r_max: 6.0,
            knots: 9,
            eigenvalues: 4,
            audit_samples: 1000,
            half_width: None,
            n_points: 2049,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EffectiveRunConfig {
    pub spec: PotentialSpec,
    pub r0: f64,
    pub t_max: f64,
    pub dt: f64,
    pub table_r_min: f64,
    /// Defaults to r0 + 0.2.
    pub table_r_max: Option<f64>,
    pub table_knots: usize,
}

impl Default for EffectiveRunConfig {
    fn default() -> Self {
        Self { spec: reference_spec(), r0: 3.0, t_max: 3.0, dt: 1e-3, table_r_min: 0.4, table_r_max: None, table_knots: 64 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuenchStudyConfig {
    pub spec: PotentialSpec,
    /// Start at R_* + delta with R′ = 0.
    pub delta: f64,
    pub t_max: f64,
    pub dt: f64,
    pub table_r_min: f64,
    pub table_r_max: f64,
    pub table_knots: usize,
    pub envelope_tol: f64,
}

impl Default for QuenchStudyConfig {
    fn default() -> Self {
        Self {
            spec: reference_spec(),
            delta: 0.05,
            t_max: 5.0,
            dt: 0.01,
            table_r_min: 0.4,
            table_r_max: 3.2,
            table_knots: 64,
            envelope_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FullSimConfig {
    /// `epsilon` here is the interface width of the run.
    pub spec: PotentialSpec,
    pub r0: f64,
    pub t_max: f64,
    pub band: f64,
    pub dr_over_eps: f64,
    /// Time between stored snapshots.
    pub snapshot_interval: f64,
    pub table_knots: usize,
    pub ansatz_knots: usize,
    pub ansatz_points: usize,
    pub ode_dt: f64,
}

impl Default for FullSimConfig {
    fn default() -> Self {
        Self {
            spec: reference_spec(),
            r0: 3.0,
            t_max: 1.0,
            band: 1.2,
            dr_over_eps: 0.02,
            snapshot_interval: 0.1,
            table_knots: 32,
            ansatz_knots: 9,
            ansatz_points: 2049,
            ode_dt: 1e-3,
        }
    }
}

fn positive(items: &[(&str, f64)]) -> Result<(), String> {
    for (name, x) in items {
        if !(*x > 0.0 && x.is_finite()) {
            return Err(format!("{name} must be positive, got {x}"));
        }
    }
    Ok(())
}

fn odd_points(n: usize) -> Result<(), String> {
    if n < 5 || n % 2 == 0 {
        return Err(format!("n_points must be odd and at least 5, got {n}"));
    }
    Ok(())
}

fn spec_ok(spec: &PotentialSpec) -> Result<(), String> {
    spec.validate().map_err(|e| e.to_string())
}

impl Experiment for ProfileSweepConfig {
    fn check(&self) -> Result<(), String> {
        spec_ok(&self.spec)?;
        positive(&[("r_min", self.r_min), ("r_max", self.r_max)])?;
        if let Some(l) = self.half_width {
            positive(&[("half_width", l)])?;
        }
        if self.r_max <= self.r_min || self.knots < 2 {
            return Err("need r_max > r_min and at least two knots".into());
        }
        odd_points(self.n_points)
    }
}

impl Experiment for SpectrumMapConfig {
    fn check(&self) -> Result<(), String> {
        spec_ok(&self.spec)?;
        positive(&[("r_min", self.r_min), ("r_max", self.r_max)])?;
        if let Some(l) = self.half_width {
            positive(&[("half_width", l)])?;
        }
        if self.r_max < self.r_min || self.knots < 1 || self.eigenvalues < 2 {
            return Err("need r_max ≥ r_min, at least one knot and two eigenvalues".into());
        }
        odd_points(self.n_points)
    }
}

impl Experiment for EffectiveRunConfig {
    fn check(&self) -> Result<(), String> {
        spec_ok(&self.spec)?;
        positive(&[("r0", self.r0), ("t_max", self.t_max), ("dt", self.dt), ("table_r_min", self.table_r_min)])?;
        let hi = self.table_r_max.unwrap_or(self.r0 + 0.2);
        if !(self.table_r_min < self.r0 && self.r0 <= hi) {
            return Err(format!("r0 = {} must lie in the table interval ({}, {hi}]", self.r0, self.table_r_min));
        }
        if self.table_knots < 4 {
            return Err("table_knots must be at least 4".into());
        }
        Ok(())
    }
}

impl Experiment for QuenchStudyConfig {
    fn check(&self) -> Result<(), String> {
        spec_ok(&self.spec)?;
        positive(&[
            ("delta", self.delta),
            ("t_max", self.t_max),
            ("dt", self.dt),
            ("table_r_min", self.table_r_min),
            ("envelope_tol", self.envelope_tol),
        ])?;
        if self.table_r_max <= self.table_r_min || self.table_knots < 4 {
            return Err("need table_r_max > table_r_min and at least four knots".into());
        }
        Ok(())
    }
}

impl Experiment for FullSimConfig {
    fn check(&self) -> Result<(), String> {
        spec_ok(&self.spec)?;
        positive(&[
            ("r0", self.r0),
            ("t_max", self.t_max),
            ("band", self.band),
            ("dr_over_eps", self.dr_over_eps),
            ("snapshot_interval", self.snapshot_interval),
            ("ode_dt", self.ode_dt),
        ])?;
        if self.dr_over_eps > 0.1 {
            return Err("dr_over_eps must be at most 0.1".into());
        }
        if self.t_max >= self.r0 - self.band {
            return Err(format!("t_max must stay below the causality cap r0 − band = {}", self.r0 - self.band));
        }
        if self.table_knots < 4 || self.ansatz_knots < 4 {
            return Err("table_knots and ansatz_knots must be at least 4".into());
        }
        odd_points(self.ansatz_points)
    }
}

impl Experiment for StudyConfig {
    fn check(&self) -> Result<(), String> {
        self.validate().map_err(|e| match e {
            ifdyn::Error::Config(m) => m,
            other => other.to_string(),
        })
    }
}

/// A parsed config with its shared top-level keys.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub config: T,
    pub seed: Option<u64>,
}

/// Blanks the top-level `kind` and `seed` lines so the remaining text can
/// be deserialized directly and errors keep their line numbers.
fn strip_shared_keys(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut top = true;
    for line in text.lines() {
        let t = line.trim_start();
        if t.starts_with('[') {
            top = false;
        }
        let key = t.split('=').next().unwrap_or("").trim();
        if top && (key == "kind" || key == "seed") && t.contains('=') {
            out.push('\n');
        } else {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

fn parse_value(raw: &str) -> Value {
    match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut Table, key: &str, value: Value) -> Result<(), ConfigError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return err(format!("--override: malformed key `{key}`"));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let next = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match next {
            Value::Table(t) => t,
            _ => return err(format!("--override: `{p}` in `{key}` is not a table")),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Reads `path` (or an empty config), checks `kind`, applies overrides and
/// validates. Every failure is a [`ConfigError`].
pub fn load<T: Experiment>(path: Option<&Path>, kind: &str, overrides: &[String]) -> Result<Loaded<T>, ConfigError> {
    let (label, text) = match path {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => (p.display().to_string(), t),
            Err(e) => return err(format!("{}: {e}", p.display())),
        },
        None => ("<defaults>".to_string(), String::new()),
    };
    let mut table: Table = toml::from_str(&text).map_err(|e| ConfigError(format!("{label}: {e}")))?;
    let mut seed = None;
    if let Some(k) = table.remove("kind") {
        match k.as_str() {
            Some(k) if k == kind => {}
            _ => return err(format!("{label}: config is for kind {k}, not `{kind}`")),
        }
    }
    if let Some(s) = table.remove("seed") {
        match s.as_integer() {
            Some(v) if v >= 0 => seed = Some(v as u64),
            _ => return err(format!("{label}: seed must be a non-negative integer, got {s}")),
        }
    }
    let mut config: T = toml::from_str(&strip_shared_keys(&text)).map_err(|e| ConfigError(format!("{label}: {e}")))?;
    if !overrides.is_empty() {
        // overrides land on the parsed config so defaults fill absent tables
        let mut table = Table::try_from(&config).map_err(|e| ConfigError(format!("--override: {e}")))?;
        for o in overrides {
            let Some((key, raw)) = o.split_once('=') else {
                return err(format!("--override `{o}`: expected KEY=VALUE"));
            };
            let key = key.trim();
            let value = parse_value(raw.trim());
            match key {
                "seed" => match value.as_integer() {
                    Some(v) if v >= 0 => seed = Some(v as u64),
                    _ => return err(format!("--override `{o}`: seed must be a non-negative integer")),
                },
                "kind" => return err(format!("--override `{o}`: kind is set by the subcommand")),
                _ => set_path(&mut table, key, value)?,
            }
        }
        config = T::deserialize(table).map_err(|e| ConfigError(format!("--override: {e}")))?;
    }
    config.check().map_err(|e| ConfigError(format!("{label}: {e}")))?;
    Ok(Loaded { config, seed })
}

/// TOML rendering of the effective config, shared keys first.
pub fn render<T: Serialize>(kind: &str, seed: Option<u64>, config: &T) -> Result<String, toml::ser::Error> {
    let mut out = format!("kind = \"{kind}\"\n");
    if let Some(s) = seed {
        out.push_str(&format!("seed = {s}\n"));
    }
    out.push_str(&toml::to_string(config)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_keys_are_blanked_in_place() {
        let text = "kind = \"full-sim\"\nseed = 3\nr0 = 2.5\n[spec]\nseed = 1\n";
        let s = strip_shared_keys(text);
        assert_eq!(s, "\n\nr0 = 2.5\n[spec]\nseed = 1\n");
    }

    #[test]
    fn override_values_are_typed() {
        assert_eq!(parse_value("0.5"), Value::Float(0.5));
        assert_eq!(parse_value("[0.1, 0.05]"), Value::Array(vec![Value::Float(0.1), Value::Float(0.05)]));
        assert_eq!(parse_value("true"), Value::Boolean(true));
        assert_eq!(parse_value("abc"), Value::String("abc".into()));
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let l: Loaded<FullSimConfig> =
            load(None, "full-sim", &["spec.epsilon=0.05".into(), "t_max=0.5".into(), "seed=9".into()]).unwrap();
        assert_eq!(l.config.spec.epsilon, 0.05);
        assert_eq!(l.config.t_max, 0.5);
        assert_eq!(l.seed, Some(9));
    }

    #[test]
    fn unknown_override_key_is_rejected() {
        let e = load::<FullSimConfig>(None, "full-sim", &["bogus=1".into()]).unwrap_err();
        assert!(e.0.contains("bogus"), "{e}");
    }

    #[test]
    fn rendered_config_loads_back() {
        let c = StudyConfig::default();
        let text = render("convergence-study", Some(4), &c).unwrap();
        let dir = std::env::temp_dir().join(format!("ifdyn-render-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.toml");
        std::fs::write(&p, text).unwrap();
        let l: Loaded<StudyConfig> = load(Some(&p), "convergence-study", &[]).unwrap();
        assert_eq!(l.config, c);
        assert_eq!(l.seed, Some(4));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
