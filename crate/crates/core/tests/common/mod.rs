//! Brute-force oracles over explicit word sets and bit-packed GF(2) vectors.
//! Nothing here goes through the library's subspace code.

#![allow(dead_code)]

use std::collections::BTreeSet;

pub fn all_words(n: usize) -> Vec<String> {
    (0..1usize << n).map(|i| (0..n).map(|k| if i >> (n - 1 - k) & 1 == 1 { 'y' } else { 'x' }).collect()).collect()
}

/// Word sets `V(2^k)` and labels `(m1, m2)` for `k = 0..=levels` when every
/// level is built by doubling: `V' = {m1 m1, m1 m2}`, `m1' = m1 m1`,
/// `m2' = m1 m2`.
pub struct Doubling {
    pub vsets: Vec<BTreeSet<String>>,
    pub labels: Vec<(String, String)>,
}

impl Doubling {
    pub fn new(levels: usize) -> Self {
        let mut vsets = vec![BTreeSet::from(["x".to_string(), "y".to_string()])];
        let mut labels = vec![("x".to_string(), "y".to_string())];
        for _ in 0..levels {
            let (m1, m2) = labels.last().unwrap().clone();
            let (a, b) = (format!("{m1}{m1}"), format!("{m1}{m2}"));
            vsets.push(BTreeSet::from([a.clone(), b.clone()]));
            labels.push((a, b));
        }
        Doubling { vsets, labels }
    }

    /// The words spanning the complement of `U H + H U` in degree `2^{k+1}`.
    pub fn pair_words(&self, k: usize) -> Vec<String> {
        let vs = &self.vsets[k];
        vs.iter().flat_map(|a| vs.iter().map(move |b| format!("{a}{b}"))).collect()
    }
}

fn floor_log2(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Words of length `n` NOT in `E(n)`, by testing every `a w b` of length
/// `2^{m+2}` against `U H + H U` letter by letter. Exponential; `n ≤ 7`.
pub fn brute_e_excluded(vsets: &[BTreeSet<String>], n: usize) -> BTreeSet<String> {
    let m = floor_log2(n);
    let d = 1usize << (m + 2);
    let h = d / 2;
    let v = &vsets[m + 1];
    let in_t = |u: &str| !(v.contains(&u[..h]) && v.contains(&u[h..]));
    let mut out = BTreeSet::new();
    for w in all_words(n) {
        'offsets: for j in 0..=d - n {
            for a in all_words(j) {
                for b in all_words(d - j - n) {
                    if !in_t(&format!("{a}{w}{b}")) {
                        out.insert(w.clone());
                        break 'offsets;
                    }
                }
            }
        }
    }
    out
}

/// Distinct length-`n` substrings.
pub fn substrings(words: &[String], n: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for w in words {
        if w.len() >= n {
            for s in 0..=w.len() - n {
                out.insert(w[s..s + n].to_string());
            }
        }
    }
    out
}

/// Words of length `n` not in `E(n)`, as substrings of the pair words.
pub fn e_excluded(d: &Doubling, n: usize) -> BTreeSet<String> {
    substrings(&d.pair_words(floor_log2(n) + 1), n)
}

/// Words outside `R(j)` (prefix) or `S(j)` (suffix), `j ≥ 2`: the words `r`
/// for which some `r b` (resp. `b r`) of length `2^{m+1}` lies in `V`.
pub fn brute_rs_excluded(vsets: &[BTreeSet<String>], j: usize, prefix: bool) -> BTreeSet<String> {
    let m = floor_log2(j);
    let total = 1usize << (m + 1);
    let v = &vsets[m + 1];
    let mut out = BTreeSet::new();
    for r in all_words(j) {
        for b in all_words(total - j) {
            let word = if prefix { format!("{r}{b}") } else { format!("{b}{r}") };
            if v.contains(&word) {
                out.insert(r.clone());
                break;
            }
        }
    }
    out
}

fn bits(j: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|p| j >> p & 1 == 1).collect()
}

fn concat_sets(sets: &[&BTreeSet<String>]) -> BTreeSet<String> {
    let mut acc = BTreeSet::from([String::new()]);
    for s in sets {
        acc = acc.iter().flat_map(|a| s.iter().map(move |b| format!("{a}{b}"))).collect();
    }
    acc
}

/// `dim Q(j)` and `dim W(j)` for a monomial doubling tower: the words of the
/// descending `N = {m1}` product (resp. ascending `V` product) that are not in
/// `R(j)` (resp. `S(j)`). Also reports whether `R + N-product` and
/// `S + V-product` span `H(j)`.
pub fn qw_dims(d: &Doubling, j: usize) -> ((usize, bool), (usize, bool)) {
    match j {
        0 => ((1, true), (1, true)),
        1 => ((2, true), (2, true)),
        _ => {
            let m = floor_log2(j);
            let b = bits(j);
            let n_sets: Vec<BTreeSet<String>> =
                b.iter().rev().map(|&p| BTreeSet::from([d.labels[p].0.clone()])).collect();
            let nprod = concat_sets(&n_sets.iter().collect::<Vec<_>>());
            let vprod = concat_sets(&b.iter().map(|&p| &d.vsets[p]).collect::<Vec<_>>());
            let v = &d.vsets[m + 1];
            let pre: BTreeSet<String> = v.iter().map(|w| w[..j].to_string()).collect();
            let suf: BTreeSet<String> = v.iter().map(|w| w[w.len() - j..].to_string()).collect();
            (
                (nprod.intersection(&pre).count(), pre.is_subset(&nprod)),
                (vprod.intersection(&suf).count(), suf.is_subset(&vprod)),
            )
        }
    }
}

/// A GF(2) span of bit-packed vectors with a pivot-indexed basis.
#[derive(Clone, Default)]
pub struct Gf2Span {
    rows: Vec<(usize, Vec<u64>)>,
}

impl Gf2Span {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut [u64]) {
        for (p, r) in &self.rows {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                for (a, b) in v.iter_mut().zip(r) {
                    *a ^= b;
                }
            }
        }
    }

    fn lowest(v: &[u64]) -> Option<usize> {
        v.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    /// Returns whether `v` was independent.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let mut v = v.to_vec();
        self.reduce(&mut v);
        let Some(p) = Self::lowest(&v) else { return false };
        for (_, r) in self.rows.iter_mut() {
            if r[p / 64] >> (p % 64) & 1 == 1 {
                for (a, b) in r.iter_mut().zip(&v) {
                    *a ^= b;
                }
            }
        }
        self.rows.push((p, v));
        true
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut v = v.to_vec();
        self.reduce(&mut v);
        v.iter().all(|w| *w == 0)
    }
}

/// Bit-packed coordinates of a word list (index = binary reading, `y = 1`).
pub fn pack(words: &[String], degree: usize) -> Vec<u64> {
    let mut v = vec![0u64; (1usize << degree).div_ceil(64)];
    for w in words {
        let i = w.chars().fold(0usize, |acc, c| acc * 2 + (c == 'y') as usize);
        v[i / 64] ^= 1 << (i % 64);
    }
    v
}
