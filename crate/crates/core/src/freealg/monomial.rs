use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A word over `{x, y}`. Letters are packed most-significant-bit first with
/// `x = 0` and `y = 1`, so the derived ordering is degree first, then lex with
/// `x < y`, and for small degrees the coordinate index is the binary reading of
/// the word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: usize,
    words: Vec<u64>,
}

impl Monomial {
    pub fn empty() -> Self {
        Monomial { degree: 0, words: Vec::new() }
    }

    pub fn x() -> Self {
        Monomial::x_power(1)
    }

    pub fn y() -> Self {
        Monomial::from_index(1, 1)
    }

    pub fn x_power(n: usize) -> Self {
        Monomial { degree: n, words: vec![0; n.div_ceil(64)] }
    }

    /// Word whose binary reading (leftmost letter most significant) is `index`.
    pub fn from_index(degree: usize, index: usize) -> Self {
        assert!(degree <= 63 && index < (1usize << degree), "index out of range");
        let mut m = Monomial::x_power(degree);
        if degree > 0 {
            m.words[0] = (index as u64) << (64 - degree);
        }
        m
    }

    pub fn from_letters<I: IntoIterator<Item = bool>>(letters: I) -> Self {
        let mut words = Vec::new();
        let mut degree = 0;
        for l in letters {
            if degree % 64 == 0 {
                words.push(0);
            }
            if l {
                words[degree / 64] |= 1u64 << (63 - degree % 64);
            }
            degree += 1;
        }
        Monomial { degree, words }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coordinate index in `H(degree)`; `None` when the degree exceeds 63.
    pub fn index(&self) -> Option<usize> {
        match self.degree {
            0 => Some(0),
            d if d <= 63 => Some((self.words[0] >> (64 - d)) as usize),
            _ => None,
        }
    }

    /// `true` for `y`, `false` for `x`.
    pub fn letter(&self, i: usize) -> bool {
        assert!(i < self.degree);
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    pub fn letters(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.degree).map(|i| self.letter(i))
    }

    pub fn count_y(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn concat(&self, other: &Monomial) -> Monomial {
        let degree = self.degree + other.degree;
        let mut words = vec![0u64; degree.div_ceil(64)];
        words[..self.words.len()].copy_from_slice(&self.words);
        let base = self.degree;
        for (k, &w) in other.words.iter().enumerate() {
            let off = base + 64 * k;
            let (idx, s) = (off / 64, off % 64);
            if idx < words.len() {
                words[idx] |= w >> s;
            }
            if s != 0 && idx + 1 < words.len() {
                words[idx + 1] |= w << (64 - s);
            }
        }
        Monomial { degree, words }
    }

    /// The factor of length `len` starting at letter `start`.
    pub fn subword(&self, start: usize, len: usize) -> Monomial {
        assert!(start + len <= self.degree, "subword out of range");
        let mut words = vec![0u64; len.div_ceil(64)];
        for (k, out) in words.iter_mut().enumerate() {
            let off = start + 64 * k;
            let (idx, s) = (off / 64, off % 64);
            let lo = self.words.get(idx).copied().unwrap_or(0);
            let hi = self.words.get(idx + 1).copied().unwrap_or(0);
            *out = if s == 0 { lo } else { (lo << s) | (hi >> (64 - s)) };
        }
        if !len.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= !(u64::MAX >> (len % 64));
            }
        }
        Monomial { degree: len, words }
    }

    pub fn prefix(&self, len: usize) -> Monomial {
        self.subword(0, len)
    }

    pub fn suffix(&self, len: usize) -> Monomial {
        self.subword(self.degree - len, len)
    }

    /// All words of a given (small) degree in lex order.
    pub fn all(degree: usize) -> impl Iterator<Item = Monomial> {
        assert!(degree <= 30, "refusing to enumerate 2^{degree} words");
        (0..1usize << degree).map(move |i| Monomial::from_index(degree, i))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            return f.write_str("1");
        }
        let s: String = self.letters().map(|l| if l { 'y' } else { 'x' }).collect();
        f.write_str(&s)
    }
}

impl FromStr for Monomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s == "1" {
            return Ok(Monomial::empty());
        }
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                'x' => Ok(false),
                'y' => Ok(true),
                _ => Err(Error::Parse { position: i, message: format!("unexpected letter {c:?} in word") }),
            })
            .collect::<Result<Vec<bool>>>()
            .map(Monomial::from_letters)
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
