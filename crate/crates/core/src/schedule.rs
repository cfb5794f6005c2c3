//! The index set `Z`, the intervals `S_i` and `T_m`, and the per-index
//! constants used by the construction.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freealg::{parse_poly, GeneralPoly, HomPoly};
use crate::linear::Field;

/// Indices below this value have their interval bounds expanded exactly.
pub const EXPANSION_THRESHOLD: u64 = 4096;

/// `⌊log₂ i⌋` for `i ≥ 1`.
pub fn floor_log2(i: &BigUint) -> u64 {
    i.bits().saturating_sub(1)
}

fn small(i: &BigUint) -> Option<u64> {
    i.to_u64().filter(|&v| v < EXPANSION_THRESHOLD)
}

/// `2^i − a·i − b·⌊log i⌋ − c`, or a plain constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundExpr {
    Const(BigInt),
    Pow { i: BigUint, a: u32, b: u32, c: i64 },
}

impl BoundExpr {
    pub fn pow(i: &BigUint, a: u32, b: u32, c: i64) -> Self {
        BoundExpr::Pow { i: i.clone(), a, b, c }
    }

    /// Exact value when the index is small enough to expand.
    pub fn eval(&self) -> Option<BigInt> {
        match self {
            BoundExpr::Const(v) => Some(v.clone()),
            BoundExpr::Pow { i, a, b, c } => {
                let iv = small(i)?;
                let two_i = BigInt::one() << iv;
                Some(two_i - BigInt::from(*a) * iv - BigInt::from(*b) * floor_log2(i) - *c)
            }
        }
    }

    /// Compares against a machine integer; unexpanded bounds exceed every
    /// machine integer.
    pub fn cmp_int(&self, n: u64) -> Ordering {
        match self.eval() {
            Some(v) => v.cmp(&BigInt::from(n)),
            None => Ordering::Greater,
        }
    }

    pub fn cmp_expr(&self, other: &BoundExpr) -> Ordering {
        if let (Some(x), Some(y)) = (self.eval(), other.eval()) {
            return x.cmp(&y);
        }
        match (self, other) {
            (BoundExpr::Const(_), _) => Ordering::Less,
            (_, BoundExpr::Const(_)) => Ordering::Greater,
            (BoundExpr::Pow { i, a, b, c }, BoundExpr::Pow { i: j, a: a2, b: b2, c: c2 }) => {
                if i != j {
                    // at least one side is huge, so the power term dominates
                    return i.cmp(j);
                }
                let lin = |a: u32, b: u32, c: i64| {
                    BigInt::from(a) * BigInt::from(i.clone()) + BigInt::from(b) * floor_log2(i) + c
                };
                lin(*a2, *b2, *c2).cmp(&lin(*a, *b, *c))
            }
        }
    }

    pub fn describe(&self) -> String {
        if let Some(v) = self.eval() {
            return v.to_string();
        }
        match self {
            BoundExpr::Const(v) => v.to_string(),
            BoundExpr::Pow { i, a, b, c } => {
                let mut s = format!("2^{i}");
                if *a != 0 {
                    s += &format!(" - {a}*{i}");
                }
                if *b != 0 {
                    s += &format!(" - {b}*{}", floor_log2(i));
                }
                if *c != 0 {
                    s += &format!(" - {c}");
                }
                s
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Real,
    Toy,
}

/// A member `i` of `Z` with its polynomial and optional explicit `F_i` basis.
#[derive(Debug, Clone)]
pub struct Entry {
    pub i: BigUint,
    pub f: Option<GeneralPoly>,
    pub f_basis: Option<Vec<HomPoly>>,
}

impl Entry {
    /// `S_i = [2^i − i − ⌊log i⌋, 2^i − ⌊log i⌋ − 1]`.
    pub fn s_bounds(&self) -> (BoundExpr, BoundExpr) {
        (BoundExpr::pow(&self.i, 1, 1, 0), BoundExpr::pow(&self.i, 0, 1, 1))
    }

    /// `2^i − ⌊log i⌋`, the level whose `U` must contain `F_i`.
    pub fn f_level(&self) -> Option<usize> {
        BoundExpr::pow(&self.i, 0, 1, 0).eval()?.to_usize()
    }

    /// `r_i = 2^{2^i − ⌊log i⌋}` when it fits a machine word.
    pub fn r(&self) -> Option<usize> {
        self.f_level().filter(|&e| e < 63).map(|e| 1usize << e)
    }

    /// `w_i = 4·r_i`.
    pub fn w(&self) -> Option<usize> {
        self.r().and_then(|r| r.checked_mul(4))
    }

    pub fn index_small(&self) -> Option<usize> {
        self.i.to_usize()
    }
}

/// Label of a `T` interval: a member of `Z`, or everything past the last member.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TLabel {
    Member(BigUint),
    Beyond,
}

impl std::fmt::Display for TLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TLabel::Member(m) => write!(f, "{m}"),
            TLabel::Beyond => f.write_str("beyond"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Position {
    /// `n = 2^i − i − ⌊log i⌋ + j`.
    S {
        i: BigUint,
        j: u64,
    },
    T(TLabel),
}

/// One summand of the S/T split of an integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartTerm {
    S { m: BigUint, value: u64 },
    T { m: TLabel, value: u64 },
}

impl PartTerm {
    pub fn value(&self) -> u64 {
        match self {
            PartTerm::S { value, .. } | PartTerm::T { value, .. } => *value,
        }
    }
}

/// A violated clause of the enumeration constraints, with both sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub index: String,
    pub clause: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone)]
pub struct Schedule {
    pub mode: Mode,
    pub entries: Vec<Entry>,
}

impl Schedule {
    /// Real mode with no explicit members: every representable position is a
    /// `T` position.
    pub fn default_real() -> Self {
        Schedule { mode: Mode::Real, entries: Vec::new() }
    }

    /// The smallest admissible member for `f = x`: `i = 2^46657`.
    pub fn witness_entry(field: Field) -> Entry {
        let f = parse_poly("x", field).expect("literal polynomial");
        Entry { i: BigUint::one() << 46657u32, f: Some(f), f_basis: None }
    }

    /// Toy schedule with the given members and no explicit `F`.
    pub fn toy(members: &[u64]) -> Self {
        Schedule {
            mode: Mode::Toy,
            entries: members.iter().map(|&i| Entry { i: BigUint::from(i), f: None, f_basis: None }).collect(),
        }
    }

    /// Checks ordering, the mode's lower bound on members, and that the `S`
    /// intervals are disjoint.
    pub fn check_structure(&self) -> Result<()> {
        let min = match self.mode {
            Mode::Real => 5u32,
            Mode::Toy => 2,
        };
        for e in &self.entries {
            if e.i < BigUint::from(min) {
                return Err(Error::Schedule(format!("member {} is below {min}", e.i)));
            }
        }
        for pair in self.entries.windows(2) {
            if pair[0].i >= pair[1].i {
                return Err(Error::Schedule("members must be strictly increasing".into()));
            }
            let hi = pair[0].s_bounds().1;
            let lo = pair[1].s_bounds().0;
            if hi.cmp_expr(&lo) != Ordering::Less {
                return Err(Error::Schedule(format!("S intervals of {} and {} overlap", pair[0].i, pair[1].i)));
            }
        }
        Ok(())
    }

    pub fn is_conformant(&self) -> bool {
        self.mode == Mode::Real && validate_real(&self.entries).is_ok()
    }

    /// Classifies `n ≥ 0`. Position 0 falls in the lowest `T` interval.
    pub fn classify(&self, n: u64) -> Position {
        for e in &self.entries {
            let (lo, hi) = e.s_bounds();
            if lo.cmp_int(n) == Ordering::Greater {
                return Position::T(TLabel::Member(e.i.clone()));
            }
            if hi.cmp_int(n) != Ordering::Less {
                let j = (BigInt::from(n) - lo.eval().unwrap()).to_u64().unwrap();
                return Position::S { i: e.i.clone(), j };
            }
        }
        Position::T(TLabel::Beyond)
    }

    pub fn in_s(&self, n: u64) -> Option<(BigUint, u64)> {
        match self.classify(n) {
            Position::S { i, j } => Some((i, j)),
            Position::T(_) => None,
        }
    }

    pub fn t_of(&self, n: u64) -> Option<TLabel> {
        match self.classify(n) {
            Position::T(l) => Some(l),
            Position::S { .. } => None,
        }
    }

    /// The entry whose `S` interval ends at `n`, if any.
    pub fn entry_ending_at(&self, n: u64) -> Option<&Entry> {
        self.entries.iter().find(|e| e.s_bounds().1.cmp_int(n) == Ordering::Equal)
    }

    pub fn entry(&self, i: &BigUint) -> Option<&Entry> {
        self.entries.iter().find(|e| &e.i == i)
    }

    /// Groups the binary digits of `n` by the interval containing their
    /// position: `n = Σ j_m + Σ k_m`.
    pub fn partition_terms(&self, n: u64) -> Vec<PartTerm> {
        let mut s_terms: BTreeMap<BigUint, u64> = BTreeMap::new();
        let mut t_terms: BTreeMap<TLabel, u64> = BTreeMap::new();
        for p in binary_decomposition(n) {
            match self.classify(p as u64) {
                Position::S { i, .. } => *s_terms.entry(i).or_default() += 1u64 << p,
                Position::T(l) => *t_terms.entry(l).or_default() += 1u64 << p,
            }
        }
        s_terms
            .into_iter()
            .map(|(m, value)| PartTerm::S { m, value })
            .chain(t_terms.into_iter().map(|(m, value)| PartTerm::T { m, value }))
            .collect()
    }

    pub fn to_json(&self) -> ScheduleJson {
        ScheduleJson {
            mode: self.mode,
            entries: self
                .entries
                .iter()
                .map(|e| EntryJson {
                    i: e.i.to_string(),
                    f: e.f.as_ref().map(|f| f.to_string()),
                    big_f: e.f_basis.as_ref().map(|b| FJson { basis: b.iter().map(|h| h.to_string()).collect() }),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ScheduleJson, field: Field) -> Result<Schedule> {
        let mut entries = Vec::new();
        for e in &j.entries {
            let i: BigUint =
                e.i.trim().parse().map_err(|_| Error::Schedule(format!("index {:?} is not a decimal integer", e.i)))?;
            let f = e.f.as_deref().map(|t| parse_poly(t, field)).transpose()?;
            let f_basis = match &e.big_f {
                None => None,
                Some(fj) => {
                    let entry = Entry { i: i.clone(), f: None, f_basis: None };
                    let level = entry
                        .f_level()
                        .filter(|&l| l < 63)
                        .ok_or_else(|| Error::Schedule(format!("explicit F for member {i} is too large")))?;
                    let degree = 1usize << level;
                    let mut basis = Vec::new();
                    for t in &fj.basis {
                        let g = parse_poly(t, field)?;
                        let h = match g.as_homogeneous() {
                            Some(h) if h.degree() == degree => h.clone(),
                            None if g.is_zero() => continue,
                            _ => {
                                return Err(Error::Schedule(format!(
                                    "F element {t:?} for member {i} is not homogeneous of degree {degree}"
                                )))
                            }
                        };
                        basis.push(h);
                    }
                    Some(basis)
                }
            };
            entries.push(Entry { i, f, f_basis });
        }
        let s = Schedule { mode: j.mode, entries };
        s.check_structure()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleJson {
    pub mode: Mode,
    #[serde(default)]
    pub entries: Vec<EntryJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryJson {
    pub i: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(rename = "F", default, deserialize_with = "deserialize_f")]
    pub big_f: Option<FJson>,
}

/// `F` is either `{"basis": [...]}` or null (also accepted as the string "null").
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FField {
    Basis(FJson),
    Null(String),
}

fn deserialize_f<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<FJson>, D::Error> {
    match Option::<FField>::deserialize(d)? {
        None => Ok(None),
        Some(FField::Basis(b)) => Ok(Some(b)),
        Some(FField::Null(s)) if s == "null" => Ok(None),
        Some(FField::Null(s)) => Err(serde::de::Error::custom(format!("unexpected F value {s:?}"))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FJson {
    pub basis: Vec<String>,
}

/// Ascending exponents of the binary expansion of `j`.
pub fn binary_decomposition(j: u64) -> Vec<u32> {
    (0..64).filter(|&b| (j >> b) & 1 == 1).collect()
}

/// `6^{6d}` for degree `d`.
fn six_power(d: usize) -> BigUint {
    BigUint::from(6u32).pow((6 * d) as u32)
}

/// Checks the enumeration constraints on `(i, f)` pairs sorted by `i`:
/// `i ≥ 5`, `⌊log i⌋ > 6^{6 deg f}`, and `i > 2^{2^{2^{2j}}}` for each
/// consecutive pair `j < i`. Reports the first violated clause.
pub fn validate_real(entries: &[Entry]) -> std::result::Result<(), Violation> {
    let mut prev: Option<&BigUint> = None;
    for e in entries {
        let idx = e.i.to_string();
        if e.i < BigUint::from(5u32) {
            return Err(Violation { index: idx.clone(), clause: "i >= 5".into(), lhs: idx, rhs: "5".into() });
        }
        let deg = e.f.as_ref().and_then(|f| f.degree()).unwrap_or(0);
        let log = floor_log2(&e.i);
        let bound = if deg <= 4096 { Some(six_power(deg)) } else { None };
        if bound.as_ref().is_none_or(|b| BigUint::from(log) <= *b) {
            return Err(Violation {
                index: idx,
                clause: "floor(log i) > 6^(6 deg f)".into(),
                lhs: log.to_string(),
                rhs: bound.map_or(format!("6^{}", 6 * deg), |b| b.to_string()),
            });
        }
        if let Some(j) = prev {
            if let Some(v) = gap_violation(j, &e.i) {
                return Err(v);
            }
        }
        prev = Some(&e.i);
    }
    Ok(())
}

/// `i > 2^E` with `E = 2^{2^{2j}}`, decided from bit lengths.
fn gap_violation(j: &BigUint, i: &BigUint) -> Option<Violation> {
    let rhs = format!("2^(2^(2^(2*{j})))");
    let fail = || {
        Some(Violation {
            index: i.to_string(),
            clause: "i > 2^(2^(2^(2j)))".into(),
            lhs: i.to_string(),
            rhs: rhs.clone(),
        })
    };
    let inner = match j.to_u64().and_then(|v| v.checked_mul(2)) {
        Some(v) if v < 6 => 1u64 << v,
        // E ≥ 2^64: 2^E has more bits than any stored integer
        _ => return fail(),
    };
    let e = 1u64 << inner;
    // i > 2^E  ⇔  i − 1 ≥ 2^E  ⇔  bits(i − 1) > E
    let below = i - BigUint::one();
    if below.is_zero() || below.bits() <= e {
        return fail();
    }
    None
}
