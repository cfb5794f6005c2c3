//! The inductive tower `U(2^n)`, `V(2^n)` with the `N`/`M` split, the
//! explicit `F` spaces, the eight-condition checker and the stacking check.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::freealg::{GeneralPoly, HomPoly, Monomial};
use crate::linear::{dense_degree_limit, DenseVector, Field, Subspace, SubspaceJson};
use crate::report::CheckRecord;
use crate::schedule::{Mode, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Coordinate subspaces throughout; bounded by the dense degree limit.
    Dense,
    /// Closed monomial forms only; fails where they do not apply.
    Monomial,
    /// Monomial forms where they apply, dense otherwise.
    Auto,
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Engine::Dense),
            "monomial" => Ok(Engine::Monomial),
            "auto" => Ok(Engine::Auto),
            _ => Err(Error::Config(format!("unknown engine {s:?}"))),
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Dense => "dense",
            Engine::Monomial => "monomial",
            Engine::Auto => "auto",
        })
    }
}

/// `U(2^n)`, `V(2^n)` and the derived split `N ⊕ M = H(2^n)`.
#[derive(Debug, Clone)]
pub struct LevelState {
    pub n: usize,
    /// Which case produced the level; 0 for the initial level.
    pub case: u8,
    pub u: Subspace,
    pub v: Subspace,
    pub m1: Option<Monomial>,
    pub m2: Option<Monomial>,
    pub big_n: Subspace,
    pub big_m: Subspace,
}

impl LevelState {
    pub fn degree(&self) -> usize {
        1 << self.n
    }

    /// `V(2^0) = Kx + Ky`, `U(2^0) = 0`, labelled `m1 = x`, `m2 = y`.
    pub fn initial(field: Field, engine: Engine) -> Result<LevelState> {
        let words = [Monomial::x(), Monomial::y()];
        let mut u = Subspace::monomial_complement(field, 1, words.clone())?;
        let mut v = Subspace::monomial_span(field, 1, words)?;
        if engine == Engine::Dense {
            u = u.to_dense()?;
            v = v.to_dense()?;
        }
        let mut s = LevelState {
            n: 0,
            case: 0,
            u,
            v,
            m1: Some(Monomial::x()),
            m2: Some(Monomial::y()),
            big_n: Subspace::zero(field, 1),
            big_m: Subspace::zero(field, 1),
        };
        build_nm(&mut s, engine)?;
        Ok(s)
    }

    /// The shared word set when `V` is a monomial span and `U` spans the
    /// remaining words.
    pub fn monomial_words(&self) -> Option<&BTreeSet<Monomial>> {
        let v = self.v.monomial_set()?;
        (self.u.complement_set()? == v).then_some(v)
    }

    pub fn to_json(&self) -> LevelJson {
        LevelJson {
            n: self.n,
            case: self.case,
            m1: self.m1.clone(),
            m2: self.m2.clone(),
            u: self.u.to_json(),
            v: self.v.to_json(),
            big_n: self.big_n.to_json(),
            big_m: self.big_m.to_json(),
        }
    }

    pub fn from_json(j: &LevelJson) -> Result<LevelState> {
        Ok(LevelState {
            n: j.n,
            case: j.case,
            u: Subspace::from_json(&j.u)?,
            v: Subspace::from_json(&j.v)?,
            m1: j.m1.clone(),
            m2: j.m2.clone(),
            big_n: Subspace::from_json(&j.big_n)?,
            big_m: Subspace::from_json(&j.big_m)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelJson {
    pub n: usize,
    pub case: u8,
    #[serde(default)]
    pub m1: Option<Monomial>,
    #[serde(default)]
    pub m2: Option<Monomial>,
    #[serde(rename = "U")]
    pub u: SubspaceJson,
    #[serde(rename = "V")]
    pub v: SubspaceJson,
    #[serde(rename = "N")]
    pub big_n: SubspaceJson,
    #[serde(rename = "M")]
    pub big_m: SubspaceJson,
}

/// The explicit spaces `F_i`, keyed by the level `2^i − ⌊log i⌋` whose `U`
/// must contain them.
#[derive(Debug, Clone, Default)]
pub struct FOracle {
    spaces: BTreeMap<usize, (BigUint, Subspace)>,
}

impl FOracle {
    /// Every member defaults to the zero space.
    pub fn null() -> Self {
        FOracle::default()
    }

    /// Spans the explicit bases of a schedule and checks
    /// `dim F_i < 2^{2^i} − 2`.
    pub fn from_schedule(schedule: &Schedule, field: Field) -> Result<FOracle> {
        let mut spaces = BTreeMap::new();
        for e in &schedule.entries {
            let Some(basis) = &e.f_basis else { continue };
            let level = e.f_level().filter(|&l| l < 63).ok_or_else(|| {
                Error::FOracle(format!("explicit F for member {} lies beyond any buildable level", e.i))
            })?;
            let space = span_polys(field, 1 << level, basis)?;
            let bound = e.index_small().filter(|&i| i < 6).map(|i| (1usize << (1usize << i)) - 2);
            let dim = space.dim().unwrap_or(usize::MAX);
            if let Some(b) = bound {
                if dim >= b {
                    return Err(Error::FOracle(format!("dim F_{} = {dim} is not below {b}", e.i)));
                }
            }
            spaces.insert(level, (e.i.clone(), space));
        }
        Ok(FOracle { spaces })
    }

    pub fn at_level(&self, level: usize) -> Option<&Subspace> {
        self.spaces.get(&level).map(|(_, s)| s)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &BigUint, &Subspace)> {
        self.spaces.iter().map(|(l, (i, s))| (*l, i, s))
    }
}

/// Span of homogeneous polynomials: a monomial span when every element is a
/// single word with coefficient 1 up to scaling, dense otherwise.
pub fn span_polys(field: Field, degree: usize, polys: &[HomPoly]) -> Result<Subspace> {
    if polys.iter().all(|p| p.len() == 1) {
        let words = polys.iter().map(|p| p.terms().next().unwrap().0.clone());
        return Subspace::monomial_span(field, degree, words);
    }
    let vecs: Vec<DenseVector> = polys.iter().map(|p| p.to_dense()).collect::<Result<_>>()?;
    Subspace::echelonize(field, degree, &vecs)
}

fn words_product(a: &BTreeSet<Monomial>, b: &BTreeSet<Monomial>) -> Result<BTreeSet<Monomial>> {
    if a.len().saturating_mul(b.len()) > crate::linear::MONOMIAL_SET_LIMIT {
        return Err(Error::Budget(format!("product of {} and {} words", a.len(), b.len())));
    }
    Ok(a.iter().flat_map(|u| b.iter().map(move |v| u.concat(v))).collect())
}

/// Picks the two lex-least words of `vv` that are not pivots of `p`, and
/// `Q = P + span(remaining non-pivot words)`, so `VV = Q ⊕ (Km1 + Km2)`.
pub fn case3_select(p: &Subspace, vv: &BTreeSet<Monomial>) -> Result<(Monomial, Monomial, Subspace)> {
    let field = p.field();
    let degree = p.degree();
    let pivots: BTreeSet<Monomial> = match p.monomial_set() {
        Some(s) => s.clone(),
        None => p.primal()?.pivots().into_iter().map(|i| Monomial::from_index(degree, i)).collect(),
    };
    let dim_p = pivots.len();
    if dim_p + 2 >= vv.len() {
        return Err(Error::Precondition(format!(
            "projection has dimension {dim_p}, needs to be below {}",
            vv.len().saturating_sub(2)
        )));
    }
    if let Some(w) = pivots.iter().find(|w| !vv.contains(w)) {
        return Err(Error::Invariant(format!("projection has a pivot {w} outside the product")));
    }
    let free: Vec<&Monomial> = vv.iter().filter(|w| !pivots.contains(w)).collect();
    let (m1, m2) = (free[0].clone(), free[1].clone());
    let rest = Subspace::monomial_span(field, degree, free[2..].iter().map(|w| (*w).clone()))?;
    let q = if p.is_monomial() { p.sum(&rest)? } else { p.sum(&rest.to_dense()?)? };
    Ok((m1, m2, q))
}

/// `N = Km1`, `M = U + Km2` off `S`; `N = V`, `M = U` on `S`.
pub fn build_nm(state: &mut LevelState, engine: Engine) -> Result<()> {
    let field = state.u.field();
    let degree = state.degree();
    match (&state.m1, &state.m2) {
        (Some(m1), Some(m2)) => {
            let mut n = Subspace::monomial_span(field, degree, [m1.clone()])?;
            let mut k2 = Subspace::monomial_span(field, degree, [m2.clone()])?;
            if engine == Engine::Dense || !state.u.is_monomial() {
                n = n.to_dense()?;
                k2 = k2.to_dense()?;
            }
            state.big_m = state.u.sum(&k2)?;
            state.big_n = n;
        }
        _ => {
            state.big_n = state.v.clone();
            state.big_m = state.u.clone();
        }
    }
    Ok(())
}

fn dense(s: &Subspace) -> Result<Subspace> {
    s.to_dense()
}

/// Builds level `n + 1` from level `n`.
pub fn build_level(prev: &LevelState, schedule: &Schedule, oracle: &FOracle, engine: Engine) -> Result<LevelState> {
    let n = prev.n;
    let field = prev.u.field();
    let d = prev.degree();
    let in_s = schedule.in_s(n as u64).is_some();
    let next_in_s = schedule.in_s(n as u64 + 1).is_some();
    let case = match (in_s, next_in_s) {
        (false, _) => 2,
        (true, true) => 1,
        (true, false) => 3,
    };
    let f_space = if case == 3 { oracle.at_level(n + 1) } else { None };
    let monomial_ok = engine != Engine::Dense
        && prev.monomial_words().is_some()
        && f_space.is_none_or(|f| f.monomial_set().is_some());
    if engine == Engine::Monomial && !monomial_ok {
        return Err(Error::Precondition(format!("level {} needs the dense engine (non-monomial ingredients)", n + 1)));
    }
    let (u, v, mut m1, mut m2) = if monomial_ok {
        monomial_step(prev, case, f_space)?
    } else {
        if 2 * d > dense_degree_limit() {
            return Err(Error::Budget(format!(
                "level {} has degree {} beyond the dense limit {}",
                n + 1,
                2 * d,
                dense_degree_limit()
            )));
        }
        dense_step(prev, case, f_space)?
    };
    // labels exist only off S
    if next_in_s {
        m1 = None;
        m2 = None;
    }
    let mut state = LevelState {
        n: n + 1,
        case,
        u,
        v,
        m1,
        m2,
        big_n: Subspace::zero(field, 2 * d),
        big_m: Subspace::zero(field, 2 * d),
    };
    build_nm(&mut state, if monomial_ok { Engine::Auto } else { Engine::Dense })?;
    Ok(state)
}

type Step = (Subspace, Subspace, Option<Monomial>, Option<Monomial>);

fn monomial_step(prev: &LevelState, case: u8, f_space: Option<&Subspace>) -> Result<Step> {
    let field = prev.u.field();
    let d2 = 2 * prev.degree();
    let vset = prev.monomial_words().expect("checked by caller");
    let (words, m1, m2) = match case {
        2 => {
            let (a, b) = labels(prev)?;
            let (w1, w2) = (a.concat(a), a.concat(b));
            (BTreeSet::from([w1.clone(), w2.clone()]), Some(w1), Some(w2))
        }
        1 => (words_product(vset, vset)?, None, None),
        _ => {
            let vv = words_product(vset, vset)?;
            // words of F outside VV lie in UU + UV + VU and project to zero
            let p_words: BTreeSet<Monomial> = f_space
                .and_then(|f| f.monomial_set())
                .map(|s| s.intersection(&vv).cloned().collect())
                .unwrap_or_default();
            let p = Subspace::monomial_span(field, d2, p_words)?;
            let (a, b, _q) = case3_select(&p, &vv)?;
            (BTreeSet::from([a.clone(), b.clone()]), Some(a), Some(b))
        }
    };
    let u = Subspace::monomial_complement(field, d2, words.iter().cloned())?;
    let v = Subspace::monomial_span(field, d2, words)?;
    Ok((u, v, m1, m2))
}

fn labels(prev: &LevelState) -> Result<(&Monomial, &Monomial)> {
    match (&prev.m1, &prev.m2) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Invariant(format!("level {} has no m1, m2", prev.n))),
    }
}

fn dense_step(prev: &LevelState, case: u8, f_space: Option<&Subspace>) -> Result<Step> {
    let field = prev.u.field();
    let d = prev.degree();
    let h = dense(&Subspace::full(field, d))?;
    let u = dense(&prev.u)?;
    let v = dense(&prev.v)?;
    match case {
        2 => {
            let (a, b) = labels(prev)?;
            let (w1, w2) = (a.concat(a), a.concat(b));
            let k2 = dense(&Subspace::monomial_span(field, d, [b.clone()])?)?;
            let u_next = h.space_mul(&u)?.sum(&u.space_mul(&h)?)?.sum(&k2.space_mul(&v)?)?;
            let v_next = dense(&Subspace::monomial_span(field, 2 * d, [w1.clone(), w2.clone()])?)?;
            Ok((u_next, v_next, Some(w1), Some(w2)))
        }
        1 => {
            let u_next = h.space_mul(&u)?.sum(&u.space_mul(&h)?)?;
            Ok((u_next, v.space_mul(&v)?, None, None))
        }
        _ => {
            let x = u.space_mul(&u)?.sum(&u.space_mul(&v)?)?.sum(&v.space_mul(&u)?)?;
            let vv = v.space_mul(&v)?;
            let vv_words = monomial_words_of(&vv)?;
            let f = match f_space {
                Some(f) => dense(f)?,
                None => dense(&Subspace::zero(field, 2 * d))?,
            };
            // H = X ⊕ VV, so (F + X) ∩ VV is the projection of F along X
            let p = f.sum(&x)?.intersect(&vv)?;
            let (m1, m2, q) = case3_select(&p, &vv_words)?;
            let u_next = x.sum(&q)?;
            let v_next = dense(&Subspace::monomial_span(field, 2 * d, [m1.clone(), m2.clone()])?)?;
            Ok((u_next, v_next, Some(m1), Some(m2)))
        }
    }
}

fn monomial_words_of(s: &Subspace) -> Result<BTreeSet<Monomial>> {
    s.as_monomial()
        .and_then(|m| m.monomial_set().cloned())
        .ok_or_else(|| Error::Invariant("V is not spanned by monomials".into()))
}

/// Levels `0..=max_level`.
pub fn build_tower(
    schedule: &Schedule,
    oracle: &FOracle,
    field: Field,
    engine: Engine,
    max_level: usize,
) -> Result<Vec<LevelState>> {
    let mut levels = vec![LevelState::initial(field, engine)?];
    for _ in 0..max_level {
        let next = build_level(levels.last().unwrap(), schedule, oracle, engine)?;
        levels.push(next);
    }
    Ok(levels)
}

/// `V ⊕ U = H`.
pub fn is_direct_complement(v: &Subspace, u: &Subspace) -> Result<bool> {
    if let (Some(a), Some(b)) = (v.monomial_set(), u.complement_set()) {
        return Ok(a == b);
    }
    let total = 1usize << v.degree();
    let (dv, du) = (dense(v)?, dense(u)?);
    Ok(dv.dim().unwrap() + du.dim().unwrap() == total && dv.intersect(&du)?.is_zero())
}

/// The eight construction conditions plus `N ⊕ M = H` at every level.
/// Conditions that relate level `n` to `n + 1` are checked where the next
/// level exists.
pub fn check_conditions(levels: &[LevelState], schedule: &Schedule, oracle: &FOracle) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for (idx, lv) in levels.iter().enumerate() {
        let n = lv.n;
        let params = |c: u8| json!({ "level": n, "condition": c });
        let pos = schedule.in_s(n as u64);
        let vwords = lv.v.as_monomial().and_then(|m| m.monomial_set().cloned());
        // 1
        if pos.is_none() {
            let expected: Option<BTreeSet<Monomial>> =
                lv.m1.clone().zip(lv.m2.clone()).map(|(a, b)| BTreeSet::from([a, b]));
            let ok = lv.v.dim() == Some(2) && vwords.is_some() && vwords == expected;
            out.push(CheckRecord::from_bool("8props", params(1), ok, || {
                format!("dim V = {:?}, V must be K m1 + K m2", lv.v.dim())
            }));
        }
        // 2
        if let Some((i, j)) = &pos {
            if *i > BigUint::from(1u32) {
                let want = if *j < 6 { Some(1usize << (1usize << j)) } else { None };
                let ok = want.is_some() && lv.v.dim() == want;
                out.push(CheckRecord::from_bool("8props", params(2), ok, || {
                    format!("dim V = {:?}, expected 2^(2^{j})", lv.v.dim())
                }));
            }
        }
        // 3
        out.push(CheckRecord::from_bool("8props", params(3), vwords.is_some(), || {
            "V has a basis vector that is not a single word".into()
        }));
        // 4
        if let Some(f) = oracle.at_level(n) {
            let ok = lv.u.contains_space(f)?;
            out.push(CheckRecord::from_bool("8props", params(4), ok, || "F is not contained in U".into()));
        }
        // 5
        let ok = is_direct_complement(&lv.v, &lv.u)?;
        out.push(CheckRecord::from_bool("8props", params(5), ok, || "V + U is not a direct sum equal to H".into()));
        let ok = is_direct_complement(&lv.big_n, &lv.big_m)?;
        out.push(CheckRecord::from_bool("nm_split", json!({ "level": n }), ok, || {
            "N + M is not a direct sum equal to H".into()
        }));
        let Some(next) = levels.get(idx + 1) else { continue };
        let d = lv.degree();
        // 6
        let fail = next.u.sandwich_contains(d, &lv.u, 0)?.or(next.u.sandwich_contains(0, &lv.u, d)?);
        out.push(CheckRecord::new("8props", params(6), fail));
        // 7
        let fail = match (next.v.as_monomial().and_then(|m| m.monomial_set().cloned()), &vwords) {
            (Some(nv), Some(vw)) => nv
                .iter()
                .find(|w| !(vw.contains(&w.prefix(d)) && vw.contains(&w.suffix(d))))
                .map(|w| format!("{w} is not in V V")),
            _ => Some("V is not spanned by monomials".into()),
        };
        out.push(CheckRecord::new("8props", params(7), fail));
        // 8
        if pos.is_none() {
            let fail = match (&lv.m1, &lv.m2) {
                (Some(_), Some(m2)) => {
                    let k2 = Subspace::monomial_span(lv.u.field(), d, [m2.clone()])?;
                    next.u.sandwich_contains(0, &k2, d)?
                }
                _ => Some("m1, m2 missing".into()),
            };
            out.push(CheckRecord::new("8props", params(8), fail));
        }
    }
    Ok(out)
}

/// `H(k·2^n) U(2^n) H((2^{m−n} − k − 1)·2^n) ⊆ U(2^m)`; returns the first
/// failure.
pub fn check_ustack(n: usize, m: usize, k: usize, levels: &[LevelState]) -> Result<Option<String>> {
    if m < n || k >= 1 << (m - n) {
        return Err(Error::Precondition(format!("inadmissible stacking triple ({n}, {m}, {k})")));
    }
    let (lo, hi) = (levels.get(n), levels.get(m));
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::Precondition(format!("levels {n}..{m} are not built")));
    };
    let block = 1usize << n;
    hi.u.sandwich_contains(k * block, &lo.u, ((1 << (m - n)) - k - 1) * block)
}

/// Every triple `(n, m, k)` with `m ≤ max_m`.
pub fn check_ustack_all(levels: &[LevelState], max_m: usize) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for m in 0..=max_m.min(levels.len().saturating_sub(1)) {
        for n in 0..=m {
            let mut failure = None;
            for k in 0..1usize << (m - n) {
                if let Some(why) = check_ustack(n, m, k, levels)? {
                    failure = Some(format!("k = {k}: {why}"));
                    break;
                }
            }
            out.push(CheckRecord::new("ustack", json!({ "n": n, "m": m, "triples": 1usize << (m - n) }), failure));
        }
    }
    Ok(out)
}

/// Checks that every `u·g_c·v` lies in `Σ_k H(k r) F H(d − k r − r)` for each
/// homogeneous component `g_c` of `g = f^exponent` and all words `u`, `v` with
/// total degree `d ≤ max_degree`. Returns the first failing element.
pub fn verify_f_covers(
    f: &GeneralPoly,
    exponent: usize,
    r: usize,
    big_f: &Subspace,
    max_degree: usize,
) -> Result<Option<String>> {
    if big_f.degree() != r {
        return Err(Error::DegreeMismatch(big_f.degree(), r));
    }
    let field = f.field();
    let g = f.power(exponent)?;
    let fd = dense(big_f)?;
    for d in 0..=max_degree {
        let comps: Vec<&HomPoly> = g.components().filter(|c| c.degree() <= d).collect();
        if comps.is_empty() {
            continue;
        }
        let mut y = Subspace::zero(field, d).to_dense()?;
        let mut k = 0;
        while k * r + r <= d {
            let left = dense(&Subspace::full(field, k * r))?;
            let right = dense(&Subspace::full(field, d - k * r - r))?;
            y = y.sum(&left.space_mul(&fd)?.space_mul(&right)?)?;
            k += 1;
        }
        for c in comps {
            let rest = d - c.degree();
            for a in 0..=rest {
                for u in Monomial::all(a) {
                    for v in Monomial::all(rest - a) {
                        let terms: Vec<(Monomial, u8)> = c.terms().map(|(w, x)| (u.concat(w).concat(&v), x)).collect();
                        let elem = HomPoly::from_terms(field, d, terms)?;
                        if !y.contains(&elem.to_dense()?)? {
                            return Ok(Some(elem.to_string()));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Contents of `manifest.json` in a level store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schedule_sha256: String,
    pub mode: Mode,
    pub field: u32,
    pub engine: Engine,
    pub levels: Vec<ManifestLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestLevel {
    pub n: usize,
    pub case: u8,
    pub file: String,
}

pub fn level_file_name(n: usize) -> String {
    format!("level_{n:02}.json")
}

/// Writes `levels/level_XX.json` and `manifest.json` under `dir`.
pub fn write_store(dir: &Path, levels: &[LevelState], manifest_base: Manifest) -> Result<Manifest> {
    let ldir = dir.join("levels");
    fs::create_dir_all(&ldir)?;
    let mut manifest = manifest_base;
    manifest.levels.clear();
    for lv in levels {
        let name = level_file_name(lv.n);
        fs::write(ldir.join(&name), serde_json::to_string(&lv.to_json())? + "\n")?;
        manifest.levels.push(ManifestLevel { n: lv.n, case: lv.case, file: format!("levels/{name}") });
    }
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

/// Reads a store; any file that does not parse is reported with its path.
pub fn read_store(dir: &Path) -> Result<(Manifest, Vec<LevelState>)> {
    let mpath = dir.join("manifest.json");
    let text =
        fs::read_to_string(&mpath).map_err(|e| Error::Config(format!("cannot read {}: {e}", mpath.display())))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", mpath.display())))?;
    if manifest.levels.is_empty() {
        return Err(Error::Config(format!("{} lists no levels", mpath.display())));
    }
    let mut levels = Vec::new();
    for ml in &manifest.levels {
        let path = dir.join(&ml.file);
        let text =
            fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let j: LevelJson =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        levels.push(LevelState::from_json(&j).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?);
    }
    Ok((manifest, levels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::parse_poly;

    fn w(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn set(words: &[&str]) -> BTreeSet<Monomial> {
        words.iter().map(|s| w(s)).collect()
    }

    fn default_levels(engine: Engine, max: usize) -> Vec<LevelState> {
        build_tower(&Schedule::default_real(), &FOracle::null(), Field::GF2, engine, max).unwrap()
    }

    #[test]
    fn default_first_levels() {
        for engine in [Engine::Monomial, Engine::Dense] {
            let lv = default_levels(engine, 2);
            let v2 = lv[1].v.as_monomial().unwrap();
            assert_eq!(v2.monomial_set().unwrap(), &set(&["xx", "xy"]));
            assert!(lv[1].u.same_space(&Subspace::monomial_span(Field::GF2, 2, [w("yx"), w("yy")]).unwrap()).unwrap());
            assert_eq!(lv[2].v.as_monomial().unwrap().monomial_set().unwrap(), &set(&["xxxx", "xxxy"]));
            assert_eq!(lv[2].u.dim(), Some(14));
            assert_eq!((lv[1].case, lv[2].case), (2, 2));
        }
    }

    #[test]
    fn nm_split_examples() {
        let lv = default_levels(Engine::Monomial, 1);
        let f = Field::GF2;
        assert!(lv[0].big_n.same_space(&Subspace::monomial_span(f, 1, [w("x")]).unwrap()).unwrap());
        assert!(lv[0].big_m.same_space(&Subspace::monomial_span(f, 1, [w("y")]).unwrap()).unwrap());
        assert!(lv[1].big_n.same_space(&Subspace::monomial_span(f, 2, [w("xx")]).unwrap()).unwrap());
        assert!(lv[1].big_m.same_space(&Subspace::monomial_span(f, 2, [w("yx"), w("yy"), w("xy")]).unwrap()).unwrap());
        let toy = build_tower(&Schedule::toy(&[2]), &FOracle::null(), f, Engine::Auto, 1).unwrap();
        assert!(toy[1].big_n.same_space(&toy[1].v).unwrap());
        assert!(toy[1].big_m.same_space(&toy[1].u).unwrap());
    }

    #[test]
    fn closed_form_labels() {
        let lv = default_levels(Engine::Monomial, 8);
        for s in &lv {
            let d = s.degree();
            assert_eq!(s.m1.as_ref().unwrap(), &Monomial::x_power(d));
            assert_eq!(s.m2.as_ref().unwrap(), &Monomial::x_power(d - 1).concat(&Monomial::y()));
        }
    }

    #[test]
    fn toy_case_sequence_and_null_case3() {
        let lv = build_tower(&Schedule::toy(&[2]), &FOracle::null(), Field::GF2, Engine::Auto, 4).unwrap();
        let cases: Vec<u8> = lv[1..].iter().map(|s| s.case).collect();
        assert_eq!(cases, vec![2, 1, 3, 2]);
        assert_eq!(lv[2].v.dim(), Some(4));
        assert_eq!(lv[3].m1.as_ref().unwrap(), &Monomial::x_power(8));
        assert_eq!(lv[3].m2.as_ref().unwrap(), &w("xxxxxxxy"));
        assert_eq!(lv[3].u.dim(), Some(254));
    }

    #[test]
    fn case3_select_examples() {
        let f = Field::GF2;
        let vv: BTreeSet<Monomial> = Monomial::all(4).collect();
        let (a, b, q) = case3_select(&Subspace::zero(f, 4), &vv).unwrap();
        assert_eq!((a, b), (w("xxxx"), w("xxxy")));
        assert_eq!(q.dim(), Some(14));
        // P spanned by xxxx + yyyy: pivot xxxx, so the free words start at xxxy
        let pv = HomPoly::from_terms(f, 4, [(w("xxxx"), 1), (w("yyyy"), 1)]).unwrap();
        let p = Subspace::echelonize(f, 4, &[pv.to_dense().unwrap()]).unwrap();
        let (a, b, q) = case3_select(&p, &vv).unwrap();
        assert_eq!((a.clone(), b.clone()), (w("xxxy"), w("xxyx")));
        let pair = Subspace::monomial_span(f, 4, [a, b]).unwrap();
        assert!(pair.intersect(&p).unwrap().is_zero());
        assert!(q.contains_space(&p).unwrap());
        assert_eq!(q.dim(), Some(14));
        let big = Subspace::monomial_span(f, 4, Monomial::all(4).take(14)).unwrap();
        assert!(case3_select(&big, &vv).is_err());
    }

    #[test]
    fn ustack_examples() {
        let lv = default_levels(Engine::Monomial, 2);
        assert_eq!(check_ustack(1, 1, 0, &lv).unwrap(), None);
        assert_eq!(check_ustack(1, 2, 0, &lv).unwrap(), None);
        assert_eq!(check_ustack(1, 2, 1, &lv).unwrap(), None);
        assert!(check_ustack(1, 2, 2, &lv).is_err());
    }

    #[test]
    fn f_cover_examples() {
        let f = Field::GF2;
        let x = parse_poly("x", f).unwrap();
        let fx = Subspace::monomial_span(f, 1, [w("x")]).unwrap();
        let fy = Subspace::monomial_span(f, 1, [w("y")]).unwrap();
        assert_eq!(verify_f_covers(&x, 2, 1, &fx, 3).unwrap(), None);
        assert_eq!(verify_f_covers(&x, 2, 1, &fy, 2).unwrap(), Some("xx".into()));
        let g = parse_poly("xy+yx+x", f).unwrap();
        assert_eq!(verify_f_covers(&g, 2, 2, &Subspace::full(f, 2), 5).unwrap(), None);
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let lv = default_levels(Engine::Auto, 3);
        let base = Manifest {
            schedule_sha256: "0".repeat(64),
            mode: Mode::Real,
            field: 2,
            engine: Engine::Auto,
            levels: vec![],
        };
        let m = write_store(dir.path(), &lv, base).unwrap();
        let (m2, back) = read_store(dir.path()).unwrap();
        assert_eq!(m, m2);
        for (a, b) in lv.iter().zip(&back) {
            assert!(a.u.same_space(&b.u).unwrap());
            assert_eq!(a.m1, b.m1);
        }
    }
}
