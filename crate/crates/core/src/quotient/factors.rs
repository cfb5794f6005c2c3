//! Distinct factors of a finite set of binary words, via a generalized
//! suffix automaton.

use std::collections::BTreeSet;

use crate::freealg::Monomial;

#[derive(Debug, Clone)]
struct State {
    len: usize,
    link: Option<usize>,
    next: [Option<usize>; 2],
}

#[derive(Debug, Clone)]
pub struct FactorAutomaton {
    states: Vec<State>,
    max_len: usize,
    counts: Vec<u64>,
}

impl FactorAutomaton {
    pub fn new<'a, I: IntoIterator<Item = &'a Monomial>>(words: I) -> Self {
        let mut a = FactorAutomaton {
            states: vec![State { len: 0, link: None, next: [None, None] }],
            max_len: 0,
            counts: Vec::new(),
        };
        for w in words {
            a.max_len = a.max_len.max(w.degree());
            let mut last = 0;
            for l in w.letters() {
                last = a.extend(last, l as usize);
            }
        }
        a.counts = a.compute_counts();
        a
    }

    fn push(&mut self, s: State) -> usize {
        self.states.push(s);
        self.states.len() - 1
    }

    fn clone_state(&mut self, p: usize, q: usize, c: usize) -> usize {
        let clone =
            self.push(State { len: self.states[p].len + 1, link: self.states[q].link, next: self.states[q].next });
        let mut cur = Some(p);
        while let Some(x) = cur {
            if self.states[x].next[c] != Some(q) {
                break;
            }
            self.states[x].next[c] = Some(clone);
            cur = self.states[x].link;
        }
        self.states[q].link = Some(clone);
        clone
    }

    fn extend(&mut self, last: usize, c: usize) -> usize {
        if let Some(q) = self.states[last].next[c] {
            if self.states[last].len + 1 == self.states[q].len {
                return q;
            }
            return self.clone_state(last, q, c);
        }
        let cur = self.push(State { len: self.states[last].len + 1, link: None, next: [None, None] });
        let mut p = Some(last);
        while let Some(x) = p {
            if self.states[x].next[c].is_some() {
                break;
            }
            self.states[x].next[c] = Some(cur);
            p = self.states[x].link;
        }
        let link = match p {
            None => 0,
            Some(x) => {
                let q = self.states[x].next[c].unwrap();
                if self.states[x].len + 1 == self.states[q].len {
                    q
                } else {
                    self.clone_state(x, q, c)
                }
            }
        };
        self.states[cur].link = Some(link);
        cur
    }

    /// `counts[n]` is the number of distinct factors of length `n`.
    pub fn counts_by_length(&self) -> &[u64] {
        &self.counts
    }

    fn compute_counts(&self) -> Vec<u64> {
        let mut diff = vec![0i64; self.max_len + 2];
        for s in &self.states[1..] {
            let lo = self.states[s.link.unwrap()].len + 1;
            diff[lo] += 1;
            diff[s.len + 1] -= 1;
        }
        let mut out = vec![0u64; self.max_len + 1];
        let mut acc = 0i64;
        for (n, slot) in out.iter_mut().enumerate() {
            acc += diff[n];
            *slot = acc as u64;
        }
        out[0] = 1;
        out
    }

    pub fn contains(&self, w: &Monomial) -> bool {
        let mut s = 0;
        for l in w.letters() {
            match self.states[s].next[l as usize] {
                Some(t) => s = t,
                None => return false,
            }
        }
        true
    }
}

/// Length-`n` factors of the given words, by sliding a window.
pub fn factor_set<'a, I: IntoIterator<Item = &'a Monomial>>(words: I, n: usize) -> BTreeSet<Monomial> {
    let mut out = BTreeSet::new();
    for w in words {
        if w.degree() < n {
            continue;
        }
        for start in 0..=w.degree() - n {
            out.insert(w.subword(start, n));
        }
    }
    out
}
