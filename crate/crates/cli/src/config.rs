use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use ptwell_core::profile::SampledSeries;
use ptwell_core::spectrum::MAX_LEVEL;
use ptwell_core::verify::suite::{GridSettings, Thresholds};
use ptwell_core::{CouplingLaw, MassLaw, TimeProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Raw file contents; laws stay as TOML values until `table` entries are resolved.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    profile: Option<RawProfile>,
    levels: Option<Vec<usize>>,
    times: Option<Vec<f64>>,
    #[serde(default)]
    grid: GridSettings,
    #[serde(default)]
    thresholds: Thresholds,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    verify: RawVerify,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    #[serde(default = "default_t_max")]
    t_max: f64,
    mass: toml::Table,
    coupling: toml::Table,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawVerify {
    invariant_times: usize,
    propagate: bool,
    propagate_to: f64,
}

impl Default for RawVerify {
    fn default() -> Self {
        RawVerify {
            invariant_times: 10,
            propagate: true,
            propagate_to: 0.5,
        }
    }
}

fn default_t_max() -> f64 {
    1.0
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// `None` means the built-in defaults (one profile m = 1, f = 1 for
    /// solving, the three reference profiles for `verify`).
    pub profile: Option<(String, TimeProfile)>,
    pub levels: Option<Vec<usize>>,
    pub times: Vec<f64>,
    pub grid: GridSettings,
    pub thresholds: Thresholds,
    pub out_dir: Option<PathBuf>,
    pub format: Format,
    pub invariant_times: usize,
    pub propagate_to: Option<f64>,
}

pub const DEFAULT_LEVELS: [usize; 6] = [0, 1, 2, 3, 4, 5];
pub const DEFAULT_TIMES: [f64; 3] = [0.1, 0.3, 0.5];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_raw(RawConfig::default(), Path::new(".")).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let raw: RawConfig = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_raw(raw, base).with_context(|| format!("invalid config {}", path.display()))
    }

    fn from_raw(raw: RawConfig, base: &Path) -> Result<Self> {
        let profile = match raw.profile {
            Some(p) => {
                let mass = mass_law(p.mass, base).context("profile.mass")?;
                let coupling = coupling_law(p.coupling, base).context("profile.coupling")?;
                let name = format!("{}/{}", family_name(&mass), coupling_name(&coupling));
                let profile = TimeProfile::new(mass, coupling, p.t_max).context("profile")?;
                Some((name, profile))
            }
            None => None,
        };
        let t_max = profile.as_ref().map_or(1.0, |p| p.1.t_max());
        let cfg = RunConfig {
            profile,
            levels: raw.levels,
            times: raw.times.unwrap_or_else(|| DEFAULT_TIMES.to_vec()),
            grid: raw.grid,
            thresholds: raw.thresholds,
            out_dir: raw.output.dir.map(|d| if d.is_relative() { base.join(d) } else { d }),
            format: raw.output.format.unwrap_or_default(),
            invariant_times: raw.verify.invariant_times,
            propagate_to: raw.verify.propagate.then_some(raw.verify.propagate_to),
        };
        cfg.validate(t_max)?;
        Ok(cfg)
    }

    pub fn validate(&self, t_max: f64) -> Result<()> {
        if let Some(levels) = &self.levels {
            check_levels(levels)?;
        }
        check_times("times", &self.times, t_max)?;
        if let Some(t) = self.propagate_to {
            check_times("verify.propagate_to", &[t], t_max)?;
        }
        let g = &self.grid;
        for (field, v) in [
            ("grid.dx", g.dx),
            ("grid.half_width", g.half_width),
            ("grid.invariant_dx", g.invariant_dx),
            ("grid.delta", g.delta),
            ("grid.dt", g.dt),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bail!("{field}: must be positive, got {v}");
            }
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        self.profile.as_ref().map_or(1.0, |p| p.1.t_max())
    }

    pub fn solve_profile(&self) -> Result<(String, TimeProfile)> {
        match &self.profile {
            Some(p) => Ok(p.clone()),
            None => Ok(("constant/constant".into(), TimeProfile::constant(1.0, 1.0, 1.0)?)),
        }
    }
}

pub fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        bail!("levels: must not be empty");
    }
    if let Some(n) = levels.iter().find(|&&n| n > MAX_LEVEL) {
        bail!("levels: n = {n} exceeds the supported maximum {MAX_LEVEL}");
    }
    Ok(())
}

pub fn check_times(field: &str, times: &[f64], t_max: f64) -> Result<()> {
    if times.is_empty() {
        bail!("{field}: must not be empty");
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && **t <= t_max)) {
        bail!("{field}: t = {t} outside the window [0, {t_max}]");
    }
    Ok(())
}

fn table_path(law: &toml::Table, base: &Path) -> Result<Option<PathBuf>> {
    if law.get("family").and_then(|v| v.as_str()) != Some("table") {
        return Ok(None);
    }
    if let Some(extra) = law.keys().find(|k| *k != "family" && *k != "path") {
        bail!("unknown field `{extra}` for family `table`, expected `path`");
    }
    let path = law
        .get("path")
        .and_then(|v| v.as_str())
        .context("family `table` requires a string field `path`")?;
    let path = Path::new(path);
    Ok(Some(if path.is_relative() {
        base.join(path)
    } else {
        path.to_path_buf()
    }))
}

fn mass_law(law: toml::Table, base: &Path) -> Result<MassLaw> {
    match table_path(&law, base)? {
        Some(path) => Ok(MassLaw::Sampled(read_series(&path)?)),
        None => Ok(toml::Value::Table(law).try_into()?),
    }
}

fn coupling_law(law: toml::Table, base: &Path) -> Result<CouplingLaw> {
    match table_path(&law, base)? {
        Some(path) => Ok(CouplingLaw::Sampled(read_series(&path)?)),
        None => Ok(toml::Value::Table(law).try_into()?),
    }
}

/// Two-column CSV `t,value` with a header row.
pub fn read_series(path: &Path) -> Result<SampledSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read table {}", path.display()))?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, row) in reader.deserialize::<(f64, f64)>().enumerate() {
        let (t, v) = row.with_context(|| format!("{}: bad row {}", path.display(), i + 2))?;
        times.push(t);
        values.push(v);
    }
    Ok(SampledSeries::new(times, values).with_context(|| format!("table {}", path.display()))?)
}

fn family_name(m: &MassLaw) -> &'static str {
    match m {
        MassLaw::Constant { .. } => "constant",
        MassLaw::Exponential { .. } => "exponential",
        MassLaw::Power { .. } => "power",
        MassLaw::Sampled(_) => "table",
    }
}

fn coupling_name(c: &CouplingLaw) -> &'static str {
    match c {
        CouplingLaw::Zero => "zero",
        CouplingLaw::Constant { .. } => "constant",
        CouplingLaw::Linear { .. } => "linear",
        CouplingLaw::Cosine { .. } => "cosine",
        CouplingLaw::Sampled(_) => "table",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        let raw: RawConfig = toml::from_str(text)?;
        RunConfig::from_raw(raw, Path::new("."))
    }

    #[test]
    fn defaults() {
        let cfg = RunConfig::default();
        assert!(cfg.profile.is_none());
        assert!(cfg.levels.is_none());
        assert_eq!(cfg.times, DEFAULT_TIMES);
        assert_eq!(cfg.propagate_to, Some(0.5));
    }

    #[test]
    fn full_profile_block() {
        let cfg = parse(
            r#"
            levels = [0, 2]
            times = [0.2]
            [profile]
            t_max = 2.0
            mass = { family = "exponential", m0 = 1.0, gamma = 0.5 }
            coupling = { family = "cosine", f0 = 1.0, omega = 2.0 }
            [grid]
            dx = 0.02
            [output]
            format = "json"
            "#,
        )
        .unwrap();
        let (name, p) = cfg.profile.unwrap();
        assert_eq!(name, "exponential/cosine");
        assert_eq!(p.t_max(), 2.0);
        assert_eq!(cfg.grid.dx, 0.02);
        assert_eq!(cfg.grid.dt, 1e-4);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse("level = [1]").unwrap_err();
        assert!(format!("{err:#}").contains("unknown field `level`"), "{err:#}");
        let err = parse("[grid]\ndxx = 1.0").unwrap_err();
        assert!(format!("{err:#}").contains("dxx"), "{err:#}");
        let err =
            parse("[profile]\nmass = { family = \"constant\", m0 = 1.0, extra = 2 }\ncoupling = { family = \"zero\" }")
                .unwrap_err();
        assert!(format!("{err:#}").contains("profile.mass"), "{err:#}");
    }

    #[test]
    fn field_errors_name_the_field() {
        let err = parse("levels = [0, -1]").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("levels") && msg.contains("line 1"), "{msg}");
        assert!(format!("{:#}", parse("levels = []").unwrap_err()).contains("levels: must not be empty"));
        assert!(format!("{:#}", parse("levels = [41]").unwrap_err()).contains("exceeds"));
        assert!(format!("{:#}", parse("times = [1.5]").unwrap_err()).contains("times: t = 1.5"));
        assert!(format!("{:#}", parse("[grid]\ndx = -1.0").unwrap_err()).contains("grid.dx"));
    }

    #[test]
    fn missing_table_file_is_reported() {
        let err =
            parse("[profile]\nmass = { family = \"table\", path = \"nope.csv\" }\ncoupling = { family = \"zero\" }")
                .unwrap_err();
        assert!(format!("{err:#}").contains("nope.csv"), "{err:#}");
    }
}
