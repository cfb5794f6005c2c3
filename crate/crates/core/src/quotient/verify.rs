//! Validators for the complement systems and the dimension inequalities.
//! Each returns [`CheckRecord`]s; a violated precondition is reported as not
//! applicable rather than as a failure.

use std::collections::BTreeSet;

use serde_json::json;

use super::{dyadic, QuotientTable};
use crate::construction::{is_direct_complement, LevelState};
use crate::error::Result;
use crate::freealg::Monomial;
use crate::linear::Subspace;
use crate::report::CheckRecord;
use crate::schedule::{binary_decomposition, Position, TLabel};

/// `R(j) ⊕ Q(j) = H(j)`, `S(j) ⊕ W(j) = H(j)`, `Q(j)` inside the descending
/// `N` product, `W(j)` inside the ascending `V` product, and the pieces
/// `T_{p_i}(j) ⊆ S(j)`, `B_{p_i}(j) ⊆ R(j)` used to place them there.
pub fn verify_pieces(t: &mut QuotientTable, j: usize) -> Result<Vec<CheckRecord>> {
    let (r, s, q, w) = (t.r(j)?, t.s(j)?, t.q(j)?, t.w(j)?);
    let p = |part: &str| json!({ "j": j, "part": part });
    let mut out = vec![
        CheckRecord::from_bool("pieces", p("r_plus_q"), is_direct_complement_any(&q, &r)?, || {
            "R(j) + Q(j) is not a direct sum equal to H(j)".into()
        }),
        CheckRecord::from_bool("pieces", p("s_plus_w"), is_direct_complement_any(&w, &s)?, || {
            "S(j) + W(j) is not a direct sum equal to H(j)".into()
        }),
    ];
    if j < 2 {
        return Ok(out);
    }
    let (np, vp) = (t.n_product(j)?, t.v_product(j)?);
    out.push(CheckRecord::from_bool("pieces", p("q_in_n_product"), np.contains_space(&q)?, || {
        "Q(j) leaves the descending N product".into()
    }));
    out.push(CheckRecord::from_bool("pieces", p("w_in_v_product"), vp.contains_space(&w)?, || {
        "W(j) leaves the ascending V product".into()
    }));
    let bits = binary_decomposition(j as u64);
    for (i, &b) in bits.iter().enumerate() {
        let block = 1usize << b;
        let below: usize = bits[..i].iter().map(|&x| 1usize << x).sum();
        let above = j - below - block;
        let lv = t.level(b as usize)?;
        let fail = s.sandwich_contains(below, &lv.u, above)?;
        out.push(CheckRecord::new("pieces", json!({ "j": j, "part": "t_piece", "p": b }), fail));
        let fail = r.sandwich_contains(above, &lv.big_m, below)?;
        out.push(CheckRecord::new("pieces", json!({ "j": j, "part": "b_piece", "p": b }), fail));
    }
    let h = 1usize << (dyadic(j) + 1);
    let top = &t.level(dyadic(j) + 1)?.u;
    let fail = top.sandwich_contains(0, &r, h - j)?;
    out.push(CheckRecord::new("pieces", p("r_times_h_in_u"), fail));
    let fail = top.sandwich_contains(h - j, &s, 0)?;
    out.push(CheckRecord::new("pieces", p("h_times_s_in_u"), fail));
    Ok(out)
}

fn is_direct_complement_any(a: &Subspace, b: &Subspace) -> Result<bool> {
    if a.degree() == 0 {
        return Ok(a.dim().unwrap() + b.dim().unwrap() == 1);
    }
    is_direct_complement(a, b)
}

/// `H(m 2^{n+1}) M(2^n) H((2^k − 2m − 1) 2^n) ⊆ U(2^{n+k})` for every level
/// `n` outside `S`, `k ≥ 1` with `n + k` built, and `0 ≤ m < 2^{k−1}`.
pub fn verify_mlemma(t: &QuotientTable, levels: &[LevelState]) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for lv in levels {
        let n = lv.n;
        if t.schedule().in_s(n as u64).is_some() {
            continue;
        }
        for k in 1..levels.len() - n {
            let block = 1usize << n;
            let mut fail = None;
            for m in 0..1usize << (k - 1) {
                let left = m * 2 * block;
                let right = ((1usize << k) - 2 * m - 1) * block;
                if let Some(why) = levels[n + k].u.sandwich_contains(left, &lv.big_m, right)? {
                    fail = Some(format!("m = {m}: {why}"));
                    break;
                }
            }
            out.push(CheckRecord::new("mlemma", json!({ "n": n, "k": k }), fail));
        }
    }
    Ok(out)
}

/// `∩_k (S(n−k) H(k) + H(n−k) R(k)) ⊆ E(n)` and
/// `dim H(n)/E(n) ≤ Σ_k dim W(n−k) dim Q(k)`.
pub fn verify_totalsize(t: &mut QuotientTable, n: usize) -> Result<Vec<CheckRecord>> {
    let e = t.e(n)?;
    let mut rs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        rs.push((t.s(n - k)?, t.r(k)?));
    }
    let fail = match monomial_excluded(&e, &rs) {
        Some((fe, sets)) => fe
            .iter()
            .find(|w| !(0..=n).any(|k| sets[k].0.contains(&w.prefix(n - k)) && sets[k].1.contains(&w.suffix(k))))
            .map(|w| format!("{w} survives every summand but is not in E(n)")),
        None => {
            let field = t.field();
            let mut inter = Subspace::full(field, n).to_dense()?;
            for (k, (s, r)) in rs.iter().enumerate() {
                let left = s.space_mul(&Subspace::full(field, k))?;
                let right = Subspace::full(field, n - k).space_mul(r)?;
                inter = inter.intersect(&left.sum(&right)?)?;
            }
            (!e.contains_space(&inter)?).then(|| "the intersection is not contained in E(n)".to_string())
        }
    };
    let mut out = vec![CheckRecord::new("totalsize", json!({ "n": n, "part": "containment" }), fail)];
    let codim = t.e_codim(n)?;
    let mut bound = 0u64;
    for k in 0..=n {
        bound += t.dim_w(n - k)? * t.dim_q(k)?;
    }
    out.push(CheckRecord::from_bool(
        "totalsize",
        json!({ "n": n, "part": "dimension", "codim_e": codim, "bound": bound }),
        codim <= bound,
        || format!("dim H/E = {codim} exceeds {bound}"),
    ));
    Ok(out)
}

type WordSets<'s> = Vec<(&'s BTreeSet<Monomial>, &'s BTreeSet<Monomial>)>;

fn monomial_excluded<'s>(
    e: &'s Subspace,
    rs: &'s [(Subspace, Subspace)],
) -> Option<(&'s BTreeSet<Monomial>, WordSets<'s>)> {
    let fe = e.complement_set()?;
    let sets = rs.iter().map(|(s, r)| Some((s.complement_set()?, r.complement_set()?))).collect::<Option<Vec<_>>>()?;
    Some((fe, sets))
}

/// `dim Q(j+k) ≤ dim Q(j) dim Q(k)` and the same for `W`, where the bits of
/// `k` all lie below the bits of `j`.
pub fn verify_qadd(t: &mut QuotientTable, j: usize, k: usize) -> Result<CheckRecord> {
    let params = json!({ "j": j, "k": k });
    if j == 0 || k == 0 || k >= 1usize << j.trailing_zeros() {
        return Ok(CheckRecord::not_applicable("qadd", params, "bits of k must all lie below the bits of j"));
    }
    let (qs, qj, qk) = (t.dim_q(j + k)?, t.dim_q(j)?, t.dim_q(k)?);
    let (ws, wj, wk) = (t.dim_w(j + k)?, t.dim_w(j)?, t.dim_w(k)?);
    let fail = if qs > qj * qk {
        Some(format!("dim Q(j+k) = {qs} > {qj}·{qk}"))
    } else if ws > wj * wk {
        Some(format!("dim W(j+k) = {ws} > {wj}·{wk}"))
    } else {
        None
    };
    Ok(CheckRecord::new("qadd", params, fail))
}

/// Every split of every `s ≤ limit` into high and low bits.
pub fn verify_qadd_range(t: &mut QuotientTable, limit: usize) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for s in 3..=limit {
        let bits = binary_decomposition(s as u64);
        for i in 1..bits.len() {
            let k: usize = bits[..i].iter().map(|&b| 1usize << b).sum();
            out.push(verify_qadd(t, s - k, k)?);
        }
    }
    Ok(out)
}

/// For `2^m < n < 2^{m+1}`: `dim W(n) ≤ dim Q(2^{m+1}−n) dim V(2^{m+1})` and
/// `dim Q(n) ≤ dim W(2^{m+1}−n) dim V(2^{m+1})`.
pub fn verify_wqsmall(t: &mut QuotientTable, n: usize) -> Result<CheckRecord> {
    let params = json!({ "n": n });
    if n < 3 || n.is_power_of_two() {
        return Ok(CheckRecord::not_applicable("wqsmall", params, "n must lie strictly between powers of two"));
    }
    let m = dyadic(n);
    let rest = (1usize << (m + 1)) - n;
    let dv = t.dim_v(m + 1)?;
    let (w, q) = (t.dim_w(n)?, t.dim_q(n)?);
    let (qr, wr) = (t.dim_q(rest)?, t.dim_w(rest)?);
    let fail = if w > qr * dv {
        Some(format!("dim W(n) = {w} > {qr}·{dv}"))
    } else if q > wr * dv {
        Some(format!("dim Q(n) = {q} > {wr}·{dv}"))
    } else {
        None
    };
    Ok(CheckRecord::new("wqsmall", params, fail))
}

/// `dim Q(j), dim W(j) ≤ 2 √j ⌊log j⌋` when every bit position of `j` lies in
/// the same `S` interval; compared as `d² ≤ 4 j ⌊log j⌋²`.
pub fn verify_sdim(t: &mut QuotientTable, j: usize) -> Result<CheckRecord> {
    let params = json!({ "j": j });
    let labels: BTreeSet<_> = binary_decomposition(j as u64)
        .into_iter()
        .map(|p| match t.schedule().classify(p as u64) {
            Position::S { i, .. } => Some(i),
            Position::T(_) => None,
        })
        .collect();
    if j == 0 || labels.len() != 1 || labels.contains(&None) {
        return Ok(CheckRecord::not_applicable("sdim", params, "bits of j must all lie in one S interval"));
    }
    let lg = dyadic(j) as u128;
    let bound = 4 * j as u128 * lg * lg;
    let (q, w) = (t.dim_q(j)? as u128, t.dim_w(j)? as u128);
    let fail = if q * q > bound {
        Some(format!("dim Q(j)² = {} > {bound}", q * q))
    } else if w * w > bound {
        Some(format!("dim W(j)² = {} > {bound}", w * w))
    } else {
        None
    };
    Ok(CheckRecord::new("sdim", params, fail))
}

/// `dim Q(j), dim W(j) ≤ 2` when every bit position of `j` lies in the same
/// `T` interval.
pub fn verify_tdim(t: &mut QuotientTable, j: usize) -> Result<CheckRecord> {
    let params = json!({ "j": j });
    let labels: BTreeSet<Option<TLabel>> =
        binary_decomposition(j as u64).into_iter().map(|p| t.schedule().t_of(p as u64)).collect();
    if j == 0 || labels.len() != 1 || labels.contains(&None) {
        return Ok(CheckRecord::not_applicable("tdim", params, "bits of j must all lie in one T interval"));
    }
    let (q, w) = (t.dim_q(j)?, t.dim_w(j)?);
    Ok(CheckRecord::from_bool("tdim", params, q <= 2 && w <= 2, || format!("dim Q(j) = {q}, dim W(j) = {w}")))
}

/// `d ≤ 8 √n (log n)^3` for `d = dim Q(n)` and `d = dim W(n)`, `n ≥ 2`.
pub fn verify_main_estimate(t: &mut QuotientTable, n: usize) -> Result<CheckRecord> {
    let params = json!({ "n": n });
    if n < 2 {
        return Ok(CheckRecord::not_applicable("estimate", params, "n must be at least 2"));
    }
    let (q, w) = (t.dim_q(n)?, t.dim_w(n)?);
    let fail = [("Q", q), ("W", w)]
        .into_iter()
        .find(|&(_, d)| !within_estimate(d, n))
        .map(|(name, d)| format!("dim {name}(n) = {d} exceeds 8 √n (log n)^3"));
    Ok(CheckRecord::new("estimate", params, fail))
}

/// `d² ≤ 64 n (log2 n)^6`, decided exactly when `⌊log2 n⌋` settles it.
pub fn within_estimate(d: u64, n: usize) -> bool {
    let (d2, n) = (d as u128 * d as u128, n as u128);
    let lg = dyadic(n as usize) as u128;
    if d2 <= 64 * n * lg.pow(6) {
        return true;
    }
    if d2 > 64 * n * (lg + 1).pow(6) {
        return false;
    }
    (d as f64) <= 8.0 * (n as f64).sqrt() * (n as f64).log2().powi(3)
}

/// `H(1) E(n) + E(n) H(1) ⊆ E(n+1)` for `1 ≤ n ≤ nmax`.
pub fn verify_ideal(t: &mut QuotientTable, nmax: usize) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for n in 1..=nmax {
        let (lower, upper) = (t.e(n)?, t.e(n + 1)?);
        out.push(CheckRecord::new("ideal", json!({ "n": n }), ideal_step(&lower, &upper)?));
    }
    Ok(out)
}

/// First failure of `H(1)·lower + lower·H(1) ⊆ upper`.
pub fn ideal_step(lower: &Subspace, upper: &Subspace) -> Result<Option<String>> {
    if let (Some(excluded), Some(lower_excluded)) = (upper.complement_set(), lower.complement_set()) {
        for b in excluded {
            let (head, tail) = (b.suffix(lower.degree()), b.prefix(lower.degree()));
            if !lower_excluded.contains(&head) {
                return Ok(Some(format!("{}·{head} is not in E(n+1)", b.prefix(1))));
            }
            if !lower_excluded.contains(&tail) {
                return Ok(Some(format!("{tail}·{} is not in E(n+1)", b.suffix(1))));
            }
        }
        return Ok(None);
    }
    if let Some(why) = upper.sandwich_contains(0, lower, 1)? {
        return Ok(Some(format!("E(n)·H(1): {why}")));
    }
    Ok(upper.sandwich_contains(1, lower, 0)?.map(|why| format!("H(1)·E(n): {why}")))
}

/// `x^n ∉ E(n)`.
pub fn verify_witness(t: &mut QuotientTable, n: usize) -> Result<CheckRecord> {
    let x = Monomial::x_power(n);
    let inside = if t.e_is_dense(n)? { t.e(n)?.contains_monomial(&x)? } else { witness_in_e(t, n)? };
    Ok(CheckRecord::from_bool("witness", json!({ "n": n }), !inside, || format!("x^{n} lies in E(n)")))
}

fn witness_in_e(t: &mut QuotientTable, n: usize) -> Result<bool> {
    let m = dyadic(n);
    let a = t.automaton(m)?.expect("monomial levels");
    Ok(!a.contains(&Monomial::x_power(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_tower, Engine, FOracle};
    use crate::linear::Field;
    use crate::report::{any_failed, Status};
    use crate::schedule::Schedule;

    fn setup(max: usize) -> (Schedule, Vec<LevelState>) {
        let sched = Schedule::default_real();
        let levels = build_tower(&sched, &FOracle::null(), Field::GF2, Engine::Monomial, max).unwrap();
        (sched, levels)
    }

    #[test]
    fn totalsize_examples() {
        let (sched, levels) = setup(4);
        let mut t = QuotientTable::new(&levels, &sched, false);
        let bounds: Vec<_> = (1..=3)
            .map(|n| {
                let r = verify_totalsize(&mut t, n).unwrap();
                assert!(!any_failed(&r), "{r:?}");
                r[1].parameters["bound"].as_u64().unwrap()
            })
            .collect();
        assert_eq!(bounds, vec![4, 7, 9]);
    }

    #[test]
    fn inequality_examples() {
        let (sched, levels) = setup(4);
        let mut t = QuotientTable::new(&levels, &sched, false);
        assert_eq!(verify_qadd(&mut t, 2, 1).unwrap().status, Status::Pass);
        assert_eq!(verify_qadd(&mut t, 1, 2).unwrap().status, Status::NotApplicable);
        assert_eq!(verify_wqsmall(&mut t, 3).unwrap().status, Status::Pass);
        assert_eq!(verify_wqsmall(&mut t, 4).unwrap().status, Status::NotApplicable);
        assert_eq!(verify_tdim(&mut t, 3).unwrap().status, Status::Pass);
        assert_eq!(verify_sdim(&mut t, 3).unwrap().status, Status::NotApplicable);
        assert_eq!(verify_main_estimate(&mut t, 7).unwrap().status, Status::Pass);
        assert!(!any_failed(&verify_pieces(&mut t, 5).unwrap()));
        assert!(!any_failed(&verify_mlemma(&t, &levels).unwrap()));
        assert!(!any_failed(&verify_qadd_range(&mut t, 15).unwrap()));
    }

    #[test]
    fn ideal_and_mutation() {
        let (sched, levels) = setup(4);
        let mut t = QuotientTable::new(&levels, &sched, false);
        assert!(!any_failed(&verify_ideal(&mut t, 7).unwrap()));
        let e2 = t.e(2).unwrap();
        let e3 = t.e(3).unwrap();
        let mut excluded = e3.complement_set().unwrap().clone();
        excluded.insert("yyx".parse().unwrap());
        let smaller = Subspace::monomial_complement(Field::GF2, 3, excluded).unwrap();
        assert_eq!(ideal_step(&e2, &smaller).unwrap().as_deref(), Some("yy·x is not in E(n+1)"));
        let dense = ideal_step(&e2.to_dense().unwrap(), &smaller.to_dense().unwrap()).unwrap();
        assert!(dense.is_some());
        assert_eq!(verify_witness(&mut t, 7).unwrap().status, Status::Pass);
    }

    #[test]
    fn estimate_boundary() {
        assert!(within_estimate(11, 2));
        assert!(!within_estimate(12, 2));
        assert!(within_estimate(1, 1 << 20));
    }
}
