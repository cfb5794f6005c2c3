use std::fs;
use std::path::PathBuf;

use serde::Deserialize;

use super::suites::SUITES;
use super::Options;
use crate::construction::Engine;
use crate::error::{Error, Result};
use crate::linear::{set_dense_degree_limit, Field};
use crate::schedule::{Schedule, ScheduleJson};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schedule: Option<String>,
    field: Option<u32>,
    engine: Option<String>,
    max_level: Option<usize>,
    max_degree: Option<usize>,
    budget_mb: Option<u64>,
    suite: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    format: Option<String>,
    poly: Option<String>,
    exponent: Option<usize>,
    window: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub schedule: String,
    pub field: Field,
    pub engine: Engine,
    pub max_level: usize,
    pub max_degree: usize,
    pub budget_mb: u64,
    pub suite: String,
    pub out: PathBuf,
    pub seed: u64,
    pub format: Format,
    pub poly: Option<String>,
    pub exponent: usize,
    pub window: Option<(usize, usize)>,
}

/// Largest degree `d` whose dense `2^d × 2^d` bit matrix, `2^{2d−3}` bytes,
/// fits in the budget.
pub fn dense_limit_for_budget(budget_mb: u64) -> usize {
    let bytes_log = 63 - budget_mb.leading_zeros() as usize + 20;
    (bytes_log + 3) / 2
}

impl RunConfig {
    pub fn resolve(o: &Options) -> Result<RunConfig> {
        let file: ConfigFile = match &o.config {
            None => ConfigFile::default(),
            Some(p) => {
                let text =
                    fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
        };
        let field = Field::new(o.field.or(file.field).unwrap_or(2)).map_err(|e| Error::Config(e.to_string()))?;
        let engine: Engine = o.engine.clone().or(file.engine).as_deref().unwrap_or("auto").parse()?;
        let budget_mb = o.budget_mb.or(file.budget_mb).unwrap_or(512);
        if budget_mb == 0 {
            return Err(Error::Config("budget_mb must be positive".into()));
        }
        let max_degree = o.max_degree.or(file.max_degree).unwrap_or(512);
        if max_degree == 0 {
            return Err(Error::Config("max_degree must be positive".into()));
        }
        let max_level = o.max_level.or(file.max_level).unwrap_or(10);
        if max_level > 40 {
            return Err(Error::Config(format!("max_level {max_level} is out of range")));
        }
        let suite = o.suite.clone().or(file.suite).unwrap_or_else(|| "all".into());
        if suite != "all" && !SUITES.contains(&suite.as_str()) {
            return Err(Error::Config(format!("unknown suite {suite:?}")));
        }
        let format = match o.format.clone().or(file.format).as_deref().unwrap_or("json") {
            "json" => Format::Json,
            "csv" => Format::Csv,
            f => return Err(Error::Config(format!("unknown format {f:?}"))),
        };
        let window = match &o.window {
            Some(w) => Some(parse_window(w)?),
            None => file.window,
        };
        Ok(RunConfig {
            schedule: o.schedule.clone().or(file.schedule).unwrap_or_else(|| "default".into()),
            field,
            engine,
            max_level,
            max_degree,
            budget_mb,
            suite,
            out: o.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("nilalg-out")),
            seed: o.seed.or(file.seed).unwrap_or(0),
            format,
            poly: o.poly.clone().or(file.poly),
            exponent: o.exponent.or(file.exponent).unwrap_or(1),
            window,
        })
    }

    pub fn apply_budget(&self) {
        set_dense_degree_limit(dense_limit_for_budget(self.budget_mb));
    }
}

fn parse_window(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("window {s:?} must be N1,N2"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// `default`, `default-real`, `toy:I,J,...` or a schedule JSON file.
pub fn load_schedule(source: &str, field: Field) -> Result<Schedule> {
    if source == "default" || source == "default-real" {
        return Ok(Schedule::default_real());
    }
    if let Some(list) = source.strip_prefix("toy:") {
        let members = list
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Config(format!("bad toy member list {list:?}")))?;
        let s = Schedule::toy(&members);
        s.check_structure()?;
        return Ok(s);
    }
    let text = fs::read_to_string(source).map_err(|e| Error::Config(format!("cannot read {source}: {e}")))?;
    let j: ScheduleJson = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{source}: {e}")))?;
    Schedule::from_json(&j, field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_to_degree() {
        assert_eq!(dense_limit_for_budget(512), 16);
        assert_eq!(dense_limit_for_budget(1), 11);
        assert_eq!(dense_limit_for_budget(2048), 17);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"max_level": 3, "field": 3, "window": [4, 8]}"#).unwrap();
        let o = Options { config: Some(p.clone()), max_level: Some(5), ..Options::default() };
        let c = RunConfig::resolve(&o).unwrap();
        assert_eq!((c.max_level, c.field.modulus(), c.window), (5, 3, Some((4, 8))));
        fs::write(&p, r#"{"levels": 3}"#).unwrap();
        assert!(matches!(RunConfig::resolve(&o), Err(Error::Config(_))));
    }
}
