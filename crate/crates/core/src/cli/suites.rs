use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::commands::Store;
use super::config::RunConfig;
use crate::construction::{build_tower, check_conditions, check_ustack_all, Engine};
use crate::error::Result;
use crate::freealg::Monomial;
use crate::linear::{dense_degree_limit, DenseVector, Subspace};
use crate::quotient::verify::{
    verify_ideal, verify_main_estimate, verify_mlemma, verify_pieces, verify_qadd_range, verify_sdim, verify_tdim,
    verify_totalsize, verify_witness, verify_wqsmall,
};
use crate::quotient::QuotientTable;
use crate::report::CheckRecord;

/// Suites in the order `all` runs them.
pub const SUITES: &[&str] =
    &["8props", "ustack", "totalsize", "qadd", "wqsmall", "sdim", "tdim", "estimate", "ideal", "witness", "engines"];

/// Largest degree checked by the totalsize suite.
const TOTALSIZE_LIMIT: usize = 12;
/// Largest degree compared between engines; dense `E` cross-checks go further
/// by random probes.
const ENGINE_DEGREE: usize = 4;
const PROBE_DEGREES: std::ops::RangeInclusive<usize> = 5..=7;
const PROBES_PER_DEGREE: usize = 8;

pub(super) fn run_suite(name: &str, store: &Store, cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let mut t = QuotientTable::new(&store.levels, &store.schedule, false);
    let limit = cfg.max_degree.min(t.max_degree());
    let mut out = Vec::new();
    match name {
        "8props" => out = check_conditions(&store.levels, &store.schedule, &store.oracle)?,
        "ustack" => out = check_ustack_all(&store.levels, store.levels.len() - 1)?,
        "totalsize" => {
            for n in 1..=limit.min(TOTALSIZE_LIMIT) {
                out.extend(verify_totalsize(&mut t, n)?);
            }
            out.extend(dense_totalsize(store)?);
        }
        "qadd" => {
            out.extend(verify_qadd_range(&mut t, limit)?);
            for j in 0..=limit {
                out.extend(verify_pieces(&mut t, j)?);
            }
            out.extend(verify_mlemma(&t, &store.levels)?);
        }
        "wqsmall" => {
            for n in 3..=limit {
                out.push(verify_wqsmall(&mut t, n)?);
            }
        }
        "sdim" => {
            for j in 1..=limit {
                out.push(verify_sdim(&mut t, j)?);
            }
        }
        "tdim" => {
            for j in 1..=limit {
                out.push(verify_tdim(&mut t, j)?);
            }
        }
        "estimate" => {
            for n in 2..=limit {
                out.push(verify_main_estimate(&mut t, n)?);
            }
        }
        "ideal" => {
            let nmax = limit.min(t.max_degree().saturating_sub(1));
            out = verify_ideal(&mut t, nmax)?;
        }
        "witness" => {
            let mut first = None;
            for n in 1..=limit {
                let r = verify_witness(&mut t, n)?;
                if r.failed() {
                    first = r.counterexample;
                    break;
                }
            }
            out.push(CheckRecord::new("witness", json!({ "nmax": limit }), first));
        }
        "engines" => out = engines(store, cfg)?,
        _ => unreachable!("suite names are validated with the configuration"),
    }
    Ok(out)
}

/// Dense level count that keeps every degree used below within the limit.
fn dense_top(store: &Store) -> usize {
    let cap = (usize::BITS - 1 - dense_degree_limit().leading_zeros()) as usize;
    cap.min(ENGINE_DEGREE).min(store.levels.len() - 1)
}

fn dense_totalsize(store: &Store) -> Result<Vec<CheckRecord>> {
    let top = dense_top(store);
    let levels = build_tower(&store.schedule, &store.oracle, store.field, Engine::Dense, top)?;
    let mut t = QuotientTable::new(&levels, &store.schedule, true);
    let mut out = Vec::new();
    for n in 1..=ENGINE_DEGREE.min(t.max_degree()) {
        for mut r in verify_totalsize(&mut t, n)? {
            tag(&mut r.parameters, "engine", json!("dense"));
            out.push(r);
        }
    }
    Ok(out)
}

fn tag(params: &mut Value, key: &str, v: Value) {
    if let Value::Object(m) = params {
        m.insert(key.into(), v);
    }
}

/// The store against a dense rebuild: `U`, `V` per level; `E`, `R`, `S`,
/// `Q`, `W` through degree 4; then seeded random membership probes in `E`.
fn engines(store: &Store, cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let top = dense_top(store);
    let dense = build_tower(&store.schedule, &store.oracle, store.field, Engine::Dense, top)?;
    let mut out = Vec::new();
    for (a, b) in store.levels.iter().zip(&dense) {
        for (name, x, y) in [("U", &a.u, &b.u), ("V", &a.v, &b.v)] {
            let same = x.same_space(y)?;
            out.push(CheckRecord::from_bool("engines", json!({ "level": a.n, "space": name }), same, || {
                format!("level {}: {name} differs from the dense rebuild", a.n)
            }));
        }
    }
    let mut s = QuotientTable::new(&store.levels, &store.schedule, false);
    let mut d = QuotientTable::new(&dense, &store.schedule, true);
    let reach = d.max_degree();
    // A corrupted store can break the derived-space construction itself;
    // that is reported as a failed comparison rather than aborting the suite.
    for n in 1..=ENGINE_DEGREE.min(reach) {
        for name in ["E", "R", "S", "Q", "W"] {
            let same = derived(&mut s, name, n).and_then(|x| x.same_space(&derived(&mut d, name, n)?));
            let params = json!({ "degree": n, "space": name });
            out.push(match same {
                Ok(same) => CheckRecord::from_bool("engines", params, same, || {
                    format!("{name}({n}) differs between the store and the dense rebuild")
                }),
                Err(e) => {
                    CheckRecord::fail("engines", params, format!("{name}({n}) cannot be built from the store: {e}"))
                }
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p = store.field.modulus();
    for n in PROBE_DEGREES.filter(|&n| n <= reach) {
        let Ok(es) = s.e(n) else {
            out.push(CheckRecord::fail(
                "engines",
                json!({ "degree": n, "probe": "random" }),
                "E cannot be built from the store",
            ));
            continue;
        };
        let ed = d.e(n)?;
        let mut fail = None;
        for k in 0..PROBES_PER_DEGREE {
            // Half the probes are pushed into E so both answers get exercised.
            let v = if k % 2 == 0 { random_vector(&mut rng, p, n, store)? } else { random_member(&mut rng, &ed)? };
            let (a, b) = (es.contains(&v)?, ed.contains(&v)?);
            if a != b {
                fail = Some(format!("degree {n}, probe {k}: store says {a}, dense says {b}"));
                break;
            }
        }
        out.push(CheckRecord::new(
            "engines",
            json!({ "degree": n, "probe": "random", "seed": cfg.seed, "samples": PROBES_PER_DEGREE }),
            fail,
        ));
    }
    Ok(out)
}

fn derived(t: &mut QuotientTable, name: &str, n: usize) -> Result<Subspace> {
    match name {
        "E" => t.e(n),
        "R" => t.r(n),
        "S" => t.s(n),
        "Q" => t.q(n),
        _ => t.w(n),
    }
}

fn random_vector(rng: &mut ChaCha8Rng, p: u32, n: usize, store: &Store) -> Result<DenseVector> {
    let terms: Vec<(Monomial, u8)> =
        Monomial::all(n).map(|w| (w, rng.gen_range(0..p) as u8)).filter(|(_, c)| *c != 0).collect();
    DenseVector::from_terms(store.field, n, terms.iter().map(|(w, c)| (w, *c)))
}

fn random_member(rng: &mut ChaCha8Rng, e: &Subspace) -> Result<DenseVector> {
    let field = e.field();
    let mut acc = DenseVector::zero(field, e.degree())?.into_row();
    for b in e.basis()? {
        let c = rng.gen_range(0..field.modulus()) as u8;
        acc.axpy(c, b.row());
    }
    DenseVector::from_row(e.degree(), acc)
}
