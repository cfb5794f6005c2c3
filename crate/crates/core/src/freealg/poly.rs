use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linear::{DenseVector, Field};

use super::Monomial;

/// Largest support a product or power may produce.
pub const TERM_LIMIT: usize = 1 << 22;

/// A homogeneous polynomial; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomPoly {
    field: Field,
    degree: usize,
    terms: BTreeMap<Monomial, u8>,
}

impl HomPoly {
    pub fn zero(field: Field, degree: usize) -> Self {
        HomPoly { field, degree, terms: BTreeMap::new() }
    }

    pub fn monomial(field: Field, w: Monomial) -> Self {
        let degree = w.degree();
        HomPoly { field, degree, terms: BTreeMap::from([(w, 1)]) }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, u8)>>(field: Field, degree: usize, terms: I) -> Result<Self> {
        let mut p = HomPoly::zero(field, degree);
        for (w, c) in terms {
            if w.degree() != degree {
                return Err(Error::DegreeMismatch(w.degree(), degree));
            }
            p.add_term(w, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, w: Monomial, c: u8) {
        let c = self.field.reduce(c as i64);
        if c == 0 {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(slot) => {
                *slot = self.field.add(*slot, c);
                if *slot == 0 {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &Monomial) -> u8 {
        self.terms.get(w).copied().unwrap_or(0)
    }

    /// Terms in lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u8)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn add(&self, other: &HomPoly) -> Result<HomPoly> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &HomPoly) -> Result<HomPoly> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.modulus(), other.field.modulus()));
        }
        if self.len().saturating_mul(other.len()) > TERM_LIMIT {
            return Err(Error::Budget(format!(
                "product of {} and {} terms exceeds the term limit {TERM_LIMIT}",
                self.len(),
                other.len()
            )));
        }
        let mut out = HomPoly::zero(self.field, self.degree + other.degree);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a.concat(b), self.field.mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn power(&self, e: usize) -> Result<HomPoly> {
        if e == 0 {
            return Err(Error::Precondition("exponent must be positive".into()));
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn to_dense(&self) -> Result<DenseVector> {
        DenseVector::from_terms(self.field, self.degree, self.terms())
    }

    pub fn from_dense(v: &DenseVector) -> HomPoly {
        HomPoly { field: v.field(), degree: v.degree(), terms: v.terms().into_iter().collect() }
    }
}

/// A polynomial as a sum of homogeneous components; zero components are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralPoly {
    field: Field,
    components: BTreeMap<usize, HomPoly>,
}

impl GeneralPoly {
    pub fn zero(field: Field) -> Self {
        GeneralPoly { field, components: BTreeMap::new() }
    }

    pub fn from_components<I: IntoIterator<Item = HomPoly>>(field: Field, parts: I) -> Result<Self> {
        let mut g = GeneralPoly::zero(field);
        for h in parts {
            if h.field != field {
                return Err(Error::FieldMismatch(h.field.modulus(), field.modulus()));
            }
            g.add_component(h)?;
        }
        Ok(g)
    }

    fn add_component(&mut self, h: HomPoly) -> Result<()> {
        let d = h.degree;
        let merged = match self.components.remove(&d) {
            Some(old) => old.add(&h)?,
            None => h,
        };
        if !merged.is_zero() {
            self.components.insert(d, merged);
        }
        Ok(())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Largest degree with a nonzero component.
    pub fn degree(&self) -> Option<usize> {
        self.components.keys().next_back().copied()
    }

    pub fn component(&self, d: usize) -> Option<&HomPoly> {
        self.components.get(&d)
    }

    pub fn components(&self) -> impl Iterator<Item = &HomPoly> {
        self.components.values()
    }

    /// The single component of a homogeneous polynomial.
    pub fn as_homogeneous(&self) -> Option<&HomPoly> {
        (self.components.len() == 1).then(|| self.components.values().next().unwrap())
    }

    pub fn add(&self, other: &GeneralPoly) -> Result<GeneralPoly> {
        let mut out = self.clone();
        for h in other.components() {
            out.add_component(h.clone())?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &GeneralPoly) -> Result<GeneralPoly> {
        let mut out = GeneralPoly::zero(self.field);
        for a in self.components() {
            for b in other.components() {
                out.add_component(a.mul(b)?)?;
            }
        }
        Ok(out)
    }

    pub fn power(&self, e: usize) -> Result<GeneralPoly> {
        if e == 0 {
            return Err(Error::Precondition("exponent must be positive".into()));
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

impl From<HomPoly> for GeneralPoly {
    fn from(h: HomPoly) -> Self {
        let field = h.field;
        let mut g = GeneralPoly::zero(field);
        if !h.is_zero() {
            g.components.insert(h.degree, h);
        }
        g
    }
}

/// Parses `term ("+" term)*` where `term = [decimal ":"] word` and a word is a
/// string over `{x, y}` or `1` for the empty word. Whitespace is ignored.
pub fn parse_poly(text: &str, field: Field) -> Result<GeneralPoly> {
    let chars: Vec<(usize, char)> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    let err = |position: usize, message: &str| Error::Parse { position, message: message.to_string() };
    if chars.is_empty() {
        return Err(err(0, "empty polynomial"));
    }
    let mut g = GeneralPoly::zero(field);
    let mut i = 0;
    loop {
        let start = chars.get(i).map_or(text.len(), |c| c.0);
        let mut coeff: i64 = 1;
        let mut j = i;
        while j < chars.len() && chars[j].1.is_ascii_digit() {
            j += 1;
        }
        if j < chars.len() && chars[j].1 == ':' {
            if j == i {
                return Err(err(chars[j].0, "missing coefficient before ':'"));
            }
            let digits: String = chars[i..j].iter().map(|c| c.1).collect();
            let big: u128 = digits.parse().map_err(|_| err(start, "coefficient too large"))?;
            coeff = (big % field.modulus() as u128) as i64;
            i = j + 1;
        }
        let mut letters = Vec::new();
        let word_start = chars.get(i).map_or(text.len(), |c| c.0);
        while i < chars.len() && chars[i].1 != '+' {
            match chars[i].1 {
                'x' => letters.push(false),
                'y' => letters.push(true),
                c => {
                    if c == '1' && letters.is_empty() && chars.get(i + 1).is_none_or(|n| n.1 == '+') {
                        i += 1;
                        continue;
                    }
                    return Err(err(chars[i].0, &format!("unexpected character {c:?}")));
                }
            }
            i += 1;
        }
        let consumed_one = i > 0 && chars[i - 1].1 == '1';
        if letters.is_empty() && !consumed_one {
            return Err(err(word_start, "expected a word"));
        }
        let w = Monomial::from_letters(letters);
        g.add_component(HomPoly::from_terms(field, w.degree(), [(w, field.reduce(coeff))])?)?;
        if i == chars.len() {
            break;
        }
        i += 1;
        if i == chars.len() {
            return Err(err(text.len(), "dangling '+'"));
        }
    }
    Ok(g)
}

/// Canonical text: components by increasing degree, terms in lex order,
/// coefficients other than 1 written as `c:`; zero prints as `0`.
pub fn format_poly(g: &GeneralPoly) -> String {
    if g.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for h in g.components() {
        for (w, c) in h.terms() {
            parts.push(if c == 1 { w.to_string() } else { format!("{c}:{w}") });
        }
    }
    parts.join("+")
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(&GeneralPoly::from(self.clone())))
    }
}

impl fmt::Display for GeneralPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GeneralPoly {
        parse_poly(s, Field::GF2).unwrap()
    }

    fn h(s: &str) -> HomPoly {
        p(s).as_homogeneous().unwrap().clone()
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(h("x+y").mul(&h("x+y")).unwrap(), h("xx+xy+yx+yy"));
        assert_eq!(h("x").power(5).unwrap(), h("xxxxx"));
        assert_eq!(h("x+y").power(2).unwrap().len(), 4);
    }

    #[test]
    fn parse_examples() {
        let a = p("xy+yx");
        let ha = a.as_homogeneous().unwrap();
        assert_eq!(ha.degree(), 2);
        assert_eq!(ha.coefficient(&"xy".parse().unwrap()), 1);
        assert_eq!(ha.coefficient(&"yx".parse().unwrap()), 1);
        let b = p("x+xx");
        assert_eq!(b.components().map(|c| c.degree()).collect::<Vec<_>>(), vec![1, 2]);
        let f3 = Field::new(3).unwrap();
        let c = parse_poly("2:xy", f3).unwrap();
        assert_eq!(c.component(2).unwrap().coefficient(&"xy".parse().unwrap()), 2);
        assert_eq!(format_poly(&parse_poly(" 5 : xy + yx + 1", f3).unwrap()), "1+2:xy+yx");
        assert!(p("xy+xy").is_zero());
    }

    #[test]
    fn parse_errors_carry_positions() {
        for (text, pos) in [("xz", 1), ("x++y", 2), ("x+", 2), (":x", 0), ("", 0), ("x1", 1)] {
            match parse_poly(text, Field::GF2) {
                Err(Error::Parse { position, .. }) => assert_eq!(position, pos, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
