//! The graded ideal `E`, the complement systems `R`, `S`, `Q`, `W`, and the
//! dimension inequalities relating them.
//!
//! With `2^m ≤ n < 2^{m+1}` and `Vset` the word set of level `m + 1`, the
//! complement of `U H + H U` in degree `2^{m+2}` is spanned by `Vset · Vset`.
//! On monomial levels `E(n)` is therefore the span of the words that are not a
//! length-`n` factor of any word in `Vset · Vset`.

mod factors;
pub mod verify;

use std::collections::BTreeMap;

use crate::construction::LevelState;
use crate::error::{Error, Result};
use crate::freealg::Monomial;
use crate::linear::{check_dense, dense_degree_limit, DenseVector, Echelon, Field, PivotOrder, Row, Subspace};
use crate::schedule::{binary_decomposition, Schedule};

pub use factors::{factor_set, FactorAutomaton};

/// `⌊log2 n⌋` for `n ≥ 1`.
pub fn dyadic(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Memoized `E`, `R`, `S`, `Q`, `W` over a fixed level tower.
pub struct QuotientTable<'a> {
    levels: &'a [LevelState],
    schedule: &'a Schedule,
    field: Field,
    force_dense: bool,
    automata: BTreeMap<usize, FactorAutomaton>,
    e: BTreeMap<usize, Subspace>,
    r: BTreeMap<usize, Subspace>,
    s: BTreeMap<usize, Subspace>,
    q: BTreeMap<usize, Subspace>,
    w: BTreeMap<usize, Subspace>,
}

impl<'a> QuotientTable<'a> {
    /// With `force_dense` the monomial shortcuts for `E`, `R`, `S` are never
    /// taken.
    pub fn new(levels: &'a [LevelState], schedule: &'a Schedule, force_dense: bool) -> Self {
        let field = levels.first().map(|l| l.u.field()).unwrap_or(Field::GF2);
        QuotientTable {
            levels,
            schedule,
            field,
            force_dense,
            automata: BTreeMap::new(),
            e: BTreeMap::new(),
            r: BTreeMap::new(),
            s: BTreeMap::new(),
            q: BTreeMap::new(),
            w: BTreeMap::new(),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn levels(&self) -> &'a [LevelState] {
        self.levels
    }

    pub fn schedule(&self) -> &'a Schedule {
        self.schedule
    }

    pub fn level(&self, k: usize) -> Result<&'a LevelState> {
        self.levels.get(k).ok_or_else(|| {
            Error::Precondition(format!("level {k} is needed but only levels 0..{} are built", self.levels.len()))
        })
    }

    /// Largest `n` for which `E(n)` can be formed from the built levels.
    pub fn max_degree(&self) -> usize {
        match self.levels.len() {
            0 | 1 => 0,
            l => (1 << (l - 1)) - 1,
        }
    }

    /// `Vset(m+1) · Vset(m+1)` when level `m + 1` is monomial and shortcuts
    /// are allowed.
    fn pair_words(&self, m: usize) -> Result<Option<Vec<Monomial>>> {
        let lv = self.level(m + 1)?;
        if self.force_dense {
            return Ok(None);
        }
        Ok(lv.monomial_words().map(|vs| {
            let mut out = Vec::with_capacity(vs.len() * vs.len());
            for a in vs {
                for b in vs {
                    out.push(a.concat(b));
                }
            }
            out
        }))
    }

    fn automaton(&mut self, m: usize) -> Result<Option<&FactorAutomaton>> {
        if !self.automata.contains_key(&m) {
            let Some(words) = self.pair_words(m)? else { return Ok(None) };
            self.automata.insert(m, FactorAutomaton::new(&words));
        }
        Ok(self.automata.get(&m))
    }

    /// `E(n)` for `n ≥ 1`.
    pub fn e(&mut self, n: usize) -> Result<Subspace> {
        if n == 0 {
            return Err(Error::Precondition("E is defined for degrees n ≥ 1".into()));
        }
        if let Some(s) = self.e.get(&n) {
            return Ok(s.clone());
        }
        let m = dyadic(n);
        let out = match self.pair_words(m)? {
            Some(words) => Subspace::monomial_complement(self.field, n, factor_set(&words, n))?,
            None => self.dense_e(n, m)?,
        };
        self.e.insert(n, out.clone());
        Ok(out)
    }

    /// `dim H(n)/E(n)`, counted without materializing `E(n)` on monomial levels.
    pub fn e_codim(&mut self, n: usize) -> Result<u64> {
        if let Some(s) = self.e.get(&n) {
            return s.codim().map(|c| c as u64).ok_or_else(|| Error::Invariant("codim overflow".into()));
        }
        let m = dyadic(n.max(1));
        if let Some(a) = self.automaton(m)? {
            return a
                .counts_by_length()
                .get(n)
                .copied()
                .ok_or_else(|| Error::Precondition(format!("E({n}) needs level {}", m + 1)));
        }
        let e = self.e(n)?;
        Ok(e.codim().unwrap() as u64)
    }

    /// Functionals of `U(2^{m+1})^⊥` restricted to a window.
    fn u_perp(&self, level: usize) -> Result<Echelon> {
        let lv = self.level(level)?;
        check_dense(lv.degree())?;
        lv.u.annihilator()
    }

    fn dense_e(&mut self, n: usize, m: usize) -> Result<Subspace> {
        let h = 1usize << (m + 1);
        check_dense(n)?;
        let perp = self.u_perp(m + 1)?;
        let phis: Vec<&Row> = perp.rows();
        let len = 1usize << n;
        let mut acc = Echelon::new(self.field, len, PivotOrder::Trailing);
        if !phis.is_empty() {
            for j in 0..=2 * h - n {
                if acc.rank() == len {
                    break;
                }
                if j + n <= h {
                    merge(&mut acc, window_slices(&phis, h, j, n));
                } else if j >= h {
                    merge(&mut acc, window_slices(&phis, h, j - h, n));
                } else {
                    let k1 = h - j;
                    let left = window_slices(&phis, h, j, k1);
                    let right = window_slices(&phis, h, 0, n - k1);
                    for l in left.rows() {
                        for r in right.rows() {
                            acc.insert(l.kron(r));
                        }
                    }
                }
            }
        }
        let rows: Vec<DenseVector> =
            acc.into_rows().into_iter().map(|r| DenseVector::from_row(n, r)).collect::<Result<_>>()?;
        Subspace::solve_constraints(self.field, n, &rows)
    }

    /// `R(j) = { r : r H(2^{m+1} − j) ⊆ U(2^{m+1}) }`, with `R(0) = 0` and
    /// `R(1) = U(1)`.
    pub fn r(&mut self, j: usize) -> Result<Subspace> {
        self.r_or_s(j, true)
    }

    /// `S(j) = { s : H(2^{m+1} − j) s ⊆ U(2^{m+1}) }`, with `S(0) = 0` and
    /// `S(1) = U(1)`.
    pub fn s(&mut self, j: usize) -> Result<Subspace> {
        self.r_or_s(j, false)
    }

    fn r_or_s(&mut self, j: usize, prefix: bool) -> Result<Subspace> {
        let cache = if prefix { &self.r } else { &self.s };
        if let Some(s) = cache.get(&j) {
            return Ok(s.clone());
        }
        let out = match j {
            0 => Subspace::monomial_complement(self.field, 0, [Monomial::empty()])?,
            1 => self.level(0)?.u.clone(),
            _ => {
                let m = dyadic(j);
                let lv = self.level(m + 1)?;
                match lv.monomial_words().filter(|_| !self.force_dense) {
                    Some(vs) => Subspace::monomial_complement(
                        self.field,
                        j,
                        vs.iter().map(|w| if prefix { w.prefix(j) } else { w.suffix(j) }),
                    )?,
                    None => {
                        check_dense(j)?;
                        let h = lv.degree();
                        let perp = self.u_perp(m + 1)?;
                        let start = if prefix { 0 } else { h - j };
                        let slices = window_slices(&perp.rows(), h, start, j);
                        let rows: Vec<DenseVector> = slices
                            .into_rows()
                            .into_iter()
                            .map(|r| DenseVector::from_row(j, r))
                            .collect::<Result<_>>()?;
                        Subspace::solve_constraints(self.field, j, &rows)?
                    }
                }
            }
        };
        let cache = if prefix { &mut self.r } else { &mut self.s };
        cache.insert(j, out.clone());
        Ok(out)
    }

    /// `N(2^{p_n}) ⋯ N(2^{p_0})`, the descending product holding `Q(j)`.
    pub fn n_product(&self, j: usize) -> Result<Subspace> {
        let mut bits = binary_decomposition(j as u64);
        bits.reverse();
        self.product(&bits, |lv| &lv.big_n)
    }

    /// `V(2^{p_0}) ⋯ V(2^{p_n})`, the ascending product holding `W(j)`.
    pub fn v_product(&self, j: usize) -> Result<Subspace> {
        let bits = binary_decomposition(j as u64);
        self.product(&bits, |lv| &lv.v)
    }

    fn product(&self, bits: &[u32], pick: impl Fn(&LevelState) -> &Subspace) -> Result<Subspace> {
        let mut acc: Option<Subspace> = None;
        for &p in bits {
            let f = pick(self.level(p as usize)?);
            acc = Some(match acc {
                None => f.clone(),
                Some(a) => a.space_mul(f)?,
            });
        }
        Ok(acc.unwrap_or_else(|| Subspace::full(self.field, 0)))
    }

    /// `Q(j)`: a complement of `R(j)` inside the descending `N` product.
    pub fn q(&mut self, j: usize) -> Result<Subspace> {
        if let Some(s) = self.q.get(&j) {
            return Ok(s.clone());
        }
        let out = match j {
            0 => Subspace::full(self.field, 0),
            1 => self.level(0)?.v.clone(),
            _ => {
                let within = self.n_product(j)?;
                self.r(j)?.pullback_complement(&within)?
            }
        };
        self.q.insert(j, out.clone());
        Ok(out)
    }

    /// `W(j)`: a complement of `S(j)` inside the ascending `V` product.
    pub fn w(&mut self, j: usize) -> Result<Subspace> {
        if let Some(s) = self.w.get(&j) {
            return Ok(s.clone());
        }
        let out = match j {
            0 => Subspace::full(self.field, 0),
            1 => self.level(0)?.v.clone(),
            _ => {
                let within = self.v_product(j)?;
                self.s(j)?.pullback_complement(&within)?
            }
        };
        self.w.insert(j, out.clone());
        Ok(out)
    }

    pub fn dim_q(&mut self, j: usize) -> Result<u64> {
        Ok(self.q(j)?.dim().unwrap() as u64)
    }

    pub fn dim_w(&mut self, j: usize) -> Result<u64> {
        Ok(self.w(j)?.dim().unwrap() as u64)
    }

    pub fn dim_v(&self, level: usize) -> Result<u64> {
        Ok(self.level(level)?.v.dim().unwrap() as u64)
    }

    /// Whether `E(n)` would be computed densely, and so is bounded by the
    /// dense degree limit.
    pub fn e_is_dense(&self, n: usize) -> Result<bool> {
        let m = dyadic(n.max(1));
        let dense = self.pair_words(m)?.is_none();
        if dense && n > dense_degree_limit() {
            return Err(Error::Budget(format!("E({n}) needs the dense engine beyond the degree limit")));
        }
        Ok(dense)
    }
}

fn merge(acc: &mut Echelon, other: Echelon) {
    for r in other.into_rows() {
        acc.insert(r);
    }
}

/// Span of `w ↦ φ(a w c)` over the given functionals `φ` on `H(total)` and all
/// words `a` of length `start`, `c` of length `total − start − len`.
fn window_slices(phis: &[&Row], total: usize, start: usize, len: usize) -> Echelon {
    let field = phis.first().map(|r| r.field()).unwrap_or(Field::GF2);
    let width = 1usize << len;
    let right = total - start - len;
    let mut out = Echelon::new(field, width, PivotOrder::Trailing);
    for phi in phis {
        for a in 0..1usize << start {
            for c in 0..1usize << right {
                if out.rank() == width {
                    return out;
                }
                let mut slice = Row::zero(field, width);
                for w in 0..width {
                    let v = phi.get((a << (len + right)) | (w << right) | c);
                    if v != 0 {
                        slice.set(w, v);
                    }
                }
                if !slice.is_zero() {
                    out.insert(slice);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_tower, Engine, FOracle};

    fn words(s: &Subspace) -> Vec<String> {
        s.monomial_set().unwrap().iter().map(|w| w.to_string()).collect()
    }

    fn excluded(s: &Subspace) -> Vec<String> {
        s.complement_set().unwrap().iter().map(|w| w.to_string()).collect()
    }

    fn tower(engine: Engine, max: usize) -> (Schedule, Vec<LevelState>) {
        let sched = Schedule::default_real();
        let levels = build_tower(&sched, &FOracle::null(), Field::GF2, engine, max).unwrap();
        (sched, levels)
    }

    #[test]
    fn e_examples() {
        let (sched, levels) = tower(Engine::Monomial, 4);
        let mut t = QuotientTable::new(&levels, &sched, false);
        assert!(t.e(1).unwrap().is_zero());
        assert_eq!(t.e(2).unwrap().dim(), Some(1));
        assert!(t.e(2).unwrap().contains_monomial(&"yy".parse().unwrap()).unwrap());
        assert_eq!(excluded(&t.e(3).unwrap()), vec!["xxx", "xxy", "xyx", "yxx"]);
        let dims: Vec<u64> = (1..=4).map(|n| t.e_codim(n).unwrap()).collect();
        assert_eq!(dims, vec![2, 3, 4, 5]);
        assert_eq!(excluded(&t.e(4).unwrap()), vec!["xxxx", "xxxy", "xxyx", "xyxx", "yxxx"]);
    }

    #[test]
    fn r_s_q_w_examples() {
        let (sched, levels) = tower(Engine::Monomial, 4);
        let mut t = QuotientTable::new(&levels, &sched, false);
        assert_eq!(t.r(3).unwrap().dim(), Some(7));
        assert_eq!(excluded(&t.r(3).unwrap()), vec!["xxx"]);
        assert_eq!(excluded(&t.s(3).unwrap()), vec!["xxx", "xxy"]);
        assert!(t.r(1).unwrap().is_zero());
        assert_eq!(words(&t.q(3).unwrap()), vec!["xxx"]);
        assert_eq!(words(&t.q(2).unwrap()), vec!["xx"]);
        assert_eq!(words(&t.w(3).unwrap()), vec!["xxx", "xxy"]);
        assert_eq!(t.dim_q(1).unwrap(), 2);
        assert_eq!(t.dim_w(1).unwrap(), 2);
        assert_eq!(t.dim_q(0).unwrap(), 1);
    }

    #[test]
    fn dense_agrees_with_monomial() {
        let (sched, mono) = tower(Engine::Monomial, 4);
        let (_, dense) = tower(Engine::Dense, 4);
        let mut a = QuotientTable::new(&mono, &sched, false);
        let mut b = QuotientTable::new(&dense, &sched, true);
        for n in 1..=7 {
            assert!(a.e(n).unwrap().same_space(&b.e(n).unwrap()).unwrap(), "E({n})");
            assert_eq!(a.e_codim(n).unwrap(), b.e_codim(n).unwrap());
        }
        for j in 0..=15 {
            assert!(a.r(j).unwrap().same_space(&b.r(j).unwrap()).unwrap(), "R({j})");
            assert!(a.s(j).unwrap().same_space(&b.s(j).unwrap()).unwrap(), "S({j})");
            assert!(a.q(j).unwrap().same_space(&b.q(j).unwrap()).unwrap(), "Q({j})");
            assert!(a.w(j).unwrap().same_space(&b.w(j).unwrap()).unwrap(), "W({j})");
        }
    }
}
