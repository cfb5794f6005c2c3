use std::fs;

use serde_json::json;
use sha2::{Digest, Sha256};

use super::config::{load_schedule, Format, RunConfig};
use super::suites::{run_suite, SUITES};
use crate::construction::{build_level, build_tower, read_store, write_store, Engine, FOracle, LevelState, Manifest};
use crate::error::{Error, Result};
use crate::freealg::{parse_poly, GeneralPoly};
use crate::growth::{check_growth_bound, gk_slope, hilbert as hilbert_profile, HilbertProfile};
use crate::linear::{dense_degree_limit, Field};
use crate::quotient::{dyadic, QuotientTable};
use crate::report::{any_failed, CheckRecord};
use crate::schedule::{Schedule, ScheduleJson};

/// Largest accepted slope over the fitted window.
pub const SLOPE_CEILING: f64 = 3.0;

const SCHEDULE_FILE: &str = "schedule.json";

/// A level store on disk together with its schedule.
pub(super) struct Store {
    pub manifest: Manifest,
    pub schedule: Schedule,
    pub oracle: FOracle,
    pub levels: Vec<LevelState>,
    pub field: Field,
    pub engine: Engine,
}

impl Store {
    fn open(cfg: &RunConfig) -> Result<Store> {
        let (manifest, levels) = read_store(&cfg.out)?;
        let field = Field::new(manifest.field).map_err(|e| Error::Config(e.to_string()))?;
        let path = cfg.out.join(SCHEDULE_FILE);
        let text =
            fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if schedule_hash(&text) != manifest.schedule_sha256 {
            return Err(Error::Config(format!("{} does not match the manifest hash", path.display())));
        }
        let j: ScheduleJson =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let schedule = Schedule::from_json(&j, field)?;
        let oracle = FOracle::from_schedule(&schedule, field)?;
        let engine = manifest.engine;
        Ok(Store { manifest, schedule, oracle, levels, field, engine })
    }

    /// Builds further levels in memory, with the store's engine.
    pub fn extend_to(&mut self, level: usize) -> Result<()> {
        while self.levels.len() <= level {
            let next = build_level(self.levels.last().unwrap(), &self.schedule, &self.oracle, self.engine)?;
            self.levels.push(next);
        }
        Ok(())
    }

    /// Levels needed for `E(n)`, `n ≤ max_degree`.
    fn extend_for_degree(&mut self, max_degree: usize) -> Result<()> {
        self.extend_to(dyadic(max_degree.max(1)) + 1)
    }
}

fn schedule_text(s: &Schedule) -> Result<String> {
    Ok(serde_json::to_string_pretty(&s.to_json())? + "\n")
}

fn schedule_hash(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<String> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    print!("{text}");
    Ok(text)
}

pub(super) fn build(cfg: &RunConfig) -> Result<i32> {
    if cfg.engine == Engine::Dense && 1usize << cfg.max_level > dense_degree_limit() {
        return Err(Error::Budget(format!(
            "dense engine at level {} needs degree 2^{}, limit is {}",
            cfg.max_level,
            cfg.max_level,
            dense_degree_limit()
        )));
    }
    let schedule = load_schedule(&cfg.schedule, cfg.field)?;
    let oracle = FOracle::from_schedule(&schedule, cfg.field)?;
    let levels = build_tower(&schedule, &oracle, cfg.field, cfg.engine, cfg.max_level)?;
    fs::create_dir_all(&cfg.out)?;
    let text = schedule_text(&schedule)?;
    fs::write(cfg.out.join(SCHEDULE_FILE), &text)?;
    let base = Manifest {
        schedule_sha256: schedule_hash(&text),
        mode: schedule.mode,
        field: cfg.field.modulus(),
        engine: cfg.engine,
        levels: Vec::new(),
    };
    let manifest = write_store(&cfg.out, &levels, base)?;
    print_json(&manifest)?;
    Ok(0)
}

pub(super) fn verify(cfg: &RunConfig) -> Result<i32> {
    let store = Store::open(cfg)?;
    let names: Vec<&str> = if cfg.suite == "all" { SUITES.to_vec() } else { vec![cfg.suite.as_str()] };
    let mut records: Vec<CheckRecord> = Vec::new();
    for name in names {
        records.extend(run_suite(name, &store, cfg)?);
    }
    let text = print_json(&records)?;
    fs::write(cfg.out.join(format!("report_{}.json", cfg.suite)), text)?;
    Ok(if any_failed(&records) { 1 } else { 0 })
}

fn profile(cfg: &RunConfig) -> Result<(Store, HilbertProfile)> {
    let mut store = Store::open(cfg)?;
    store.extend_for_degree(cfg.max_degree)?;
    let mut table = QuotientTable::new(&store.levels, &store.schedule, false);
    let p = hilbert_profile(&mut table, cfg.max_degree)?;
    Ok((store, p))
}

pub(super) fn hilbert(cfg: &RunConfig) -> Result<i32> {
    let (store, p) = profile(cfg)?;
    let checks = check_growth_bound(&p);
    let doc = json!({
        "schedule_sha256": store.manifest.schedule_sha256,
        "field": store.field.modulus(),
        "engine": store.engine,
        "nmax": p.nmax(),
        "dim_quotient": p.dim_quotient,
        "cumulative": p.cumulative,
    });
    let csv = p.to_csv();
    fs::write(cfg.out.join("hilbert.csv"), &csv)?;
    fs::write(cfg.out.join("hilbert.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
    fs::write(cfg.out.join("report_growth.json"), serde_json::to_string_pretty(&checks)? + "\n")?;
    match cfg.format {
        Format::Csv => print!("{csv}"),
        Format::Json => {
            print_json(&json!({ "profile": doc, "checks": checks }))?;
        }
    }
    Ok(if any_failed(&checks) { 1 } else { 0 })
}

pub(super) fn gk(cfg: &RunConfig) -> Result<i32> {
    let (store, p) = profile(cfg)?;
    let window = cfg.window.unwrap_or(((cfg.max_degree / 16).max(2), cfg.max_degree));
    let est = gk_slope(&p, window).map_err(|e| Error::Config(e.to_string()))?;
    let ok = est.slope <= SLOPE_CEILING;
    let check = CheckRecord::from_bool(
        "gk_slope",
        json!({ "window": [window.0, window.1], "ceiling": SLOPE_CEILING }),
        ok,
        || format!("slope {} exceeds {SLOPE_CEILING}", est.slope),
    );
    let doc = json!({
        "schedule_sha256": store.manifest.schedule_sha256,
        "field": store.field.modulus(),
        "engine": store.engine,
        "window": [window.0, window.1],
        "slope": est.slope,
        "power_of_two_only": est.power_of_two_only,
        "points": est.points,
        "check": check,
    });
    let text = print_json(&doc)?;
    fs::write(cfg.out.join("gk.json"), text)?;
    Ok(if ok { 0 } else { 1 })
}

pub(super) fn probe(cfg: &RunConfig) -> Result<i32> {
    let text = cfg.poly.as_deref().ok_or_else(|| Error::Config("probe needs --poly".into()))?;
    let mut store = Store::open(cfg)?;
    let g: GeneralPoly = parse_poly(text, store.field)?.power(cfg.exponent)?;
    let top = g.degree().unwrap_or(0);
    if top > cfg.max_degree {
        return Err(Error::Config(format!("degree {top} of the power exceeds max_degree {}", cfg.max_degree)));
    }
    store.extend_for_degree(top)?;
    let mut table = QuotientTable::new(&store.levels, &store.schedule, false);
    let mut components = Vec::new();
    let mut all_in = true;
    for h in g.components() {
        let d = h.degree();
        let (inside, offending): (bool, Vec<String>) = if d == 0 {
            (false, vec!["1".into()])
        } else {
            let e = table.e(d)?;
            match e.complement_set() {
                Some(excluded) => {
                    let off: Vec<String> =
                        h.terms().filter(|(w, _)| excluded.contains(*w)).map(|(w, _)| w.to_string()).collect();
                    (off.is_empty(), off)
                }
                None => (e.contains(&h.to_dense()?)?, Vec::new()),
            }
        };
        all_in &= inside;
        components.push(json!({ "degree": d, "component": h.to_string(), "in_e": inside, "offending": offending }));
    }
    print_json(&json!({
        "poly": text,
        "exponent": cfg.exponent,
        "power_is_zero": g.is_zero(),
        "in_e": all_in,
        "components": components,
    }))?;
    Ok(0)
}
