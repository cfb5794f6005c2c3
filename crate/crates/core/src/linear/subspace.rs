use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::echelon::{combine_kernel, intersect_spans, Echelon, PivotOrder};
use super::field::Field;
use super::row::Row;
use super::{ambient, check_dense, MONOMIAL_SET_LIMIT};
use crate::error::{Error, Result};
use crate::freealg::Monomial;

/// An element of `H(degree)` in coordinate form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DenseVector {
    degree: usize,
    row: Row,
}

impl DenseVector {
    pub fn zero(field: Field, degree: usize) -> Result<Self> {
        check_dense(degree)?;
        Ok(DenseVector { degree, row: Row::zero(field, ambient(degree)) })
    }

    pub fn monomial(field: Field, w: &Monomial) -> Result<Self> {
        check_dense(w.degree())?;
        let idx = w.index().expect("dense degree fits an index");
        Ok(DenseVector { degree: w.degree(), row: Row::unit(field, ambient(w.degree()), idx) })
    }

    pub fn from_row(degree: usize, row: Row) -> Result<Self> {
        if row.len() != ambient(degree) {
            return Err(Error::Precondition(format!("row of length {} is not a vector of H({degree})", row.len())));
        }
        Ok(DenseVector { degree, row })
    }

    pub fn from_terms<'a, I>(field: Field, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a Monomial, u8)>,
    {
        let mut v = DenseVector::zero(field, degree)?;
        for (w, c) in terms {
            if w.degree() != degree {
                return Err(Error::DegreeMismatch(w.degree(), degree));
            }
            let i = w.index().unwrap();
            v.row.set(i, field.add(v.row.get(i), c));
        }
        Ok(v)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn field(&self) -> Field {
        self.row.field()
    }

    pub fn row(&self) -> &Row {
        &self.row
    }

    pub fn into_row(self) -> Row {
        self.row
    }

    pub fn coefficient(&self, w: &Monomial) -> u8 {
        self.row.get(w.index().unwrap())
    }

    pub fn is_zero(&self) -> bool {
        self.row.is_zero()
    }

    /// Nonzero terms in lex order.
    pub fn terms(&self) -> Vec<(Monomial, u8)> {
        self.row.support().into_iter().map(|i| (Monomial::from_index(self.degree, i), self.row.get(i))).collect()
    }
}

/// Storage for a subspace of `H(n)`.
#[derive(Debug, Clone)]
pub enum Repr {
    /// Reduced row-echelon basis (leading pivots).
    Dense(Echelon),
    /// Reduced row-echelon basis of the annihilator (trailing pivots).
    Annihilator(Echelon),
    /// Span of the listed words.
    Monomials(BTreeSet<Monomial>),
    /// Span of every word except the listed ones.
    Complement(BTreeSet<Monomial>),
}

/// A linear subspace of the homogeneous component `H(degree)`.
#[derive(Debug, Clone)]
pub struct Subspace {
    degree: usize,
    field: Field,
    repr: Repr,
}

fn check_pair(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.degree != b.degree {
        return Err(Error::DegreeMismatch(a.degree, b.degree));
    }
    if a.field != b.field {
        return Err(Error::FieldMismatch(a.field.modulus(), b.field.modulus()));
    }
    Ok(())
}

fn monomials_of_degree(degree: usize, set: &BTreeSet<Monomial>) -> Result<()> {
    match set.iter().find(|w| w.degree() != degree) {
        Some(w) => Err(Error::DegreeMismatch(w.degree(), degree)),
        None => Ok(()),
    }
}

impl Subspace {
    pub fn zero(field: Field, degree: usize) -> Self {
        Subspace { degree, field, repr: Repr::Monomials(BTreeSet::new()) }
    }

    /// The whole of `H(degree)`.
    pub fn full(field: Field, degree: usize) -> Self {
        Subspace { degree, field, repr: Repr::Complement(BTreeSet::new()) }
    }

    pub fn monomial_span<I: IntoIterator<Item = Monomial>>(field: Field, degree: usize, words: I) -> Result<Self> {
        let set: BTreeSet<Monomial> = words.into_iter().collect();
        monomials_of_degree(degree, &set)?;
        Ok(Subspace { degree, field, repr: Repr::Monomials(set) })
    }

    pub fn monomial_complement<I: IntoIterator<Item = Monomial>>(
        field: Field,
        degree: usize,
        words: I,
    ) -> Result<Self> {
        let set: BTreeSet<Monomial> = words.into_iter().collect();
        monomials_of_degree(degree, &set)?;
        Ok(Subspace { degree, field, repr: Repr::Complement(set) })
    }

    /// Reduced row-echelon basis of the span of `vectors`.
    pub fn echelonize(field: Field, degree: usize, vectors: &[DenseVector]) -> Result<Self> {
        check_dense(degree)?;
        let mut e = Echelon::new(field, ambient(degree), PivotOrder::Leading);
        for v in vectors {
            if v.degree != degree {
                return Err(Error::DegreeMismatch(v.degree, degree));
            }
            if v.field() != field {
                return Err(Error::FieldMismatch(v.field().modulus(), field.modulus()));
            }
            e.insert(v.row.clone());
        }
        Ok(Subspace { degree, field, repr: Repr::Dense(e) })
    }

    /// `{ v : <f, v> = 0 for every functional f }`.
    pub fn solve_constraints(field: Field, degree: usize, functionals: &[DenseVector]) -> Result<Self> {
        check_dense(degree)?;
        let mut e = Echelon::new(field, ambient(degree), PivotOrder::Trailing);
        for f in functionals {
            if f.degree != degree {
                return Err(Error::DegreeMismatch(f.degree, degree));
            }
            e.insert(f.row.clone());
        }
        Ok(Subspace { degree, field, repr: Repr::Annihilator(e) })
    }

    pub(crate) fn from_annihilator_rows<I: IntoIterator<Item = Row>>(
        field: Field,
        degree: usize,
        rows: I,
    ) -> Result<Self> {
        check_dense(degree)?;
        let e = Echelon::from_rows(field, ambient(degree), PivotOrder::Trailing, rows);
        Ok(Subspace { degree, field, repr: Repr::Annihilator(e) })
    }

    pub(crate) fn from_rows<I: IntoIterator<Item = Row>>(field: Field, degree: usize, rows: I) -> Result<Self> {
        check_dense(degree)?;
        let e = Echelon::from_rows(field, ambient(degree), PivotOrder::Leading, rows);
        Ok(Subspace { degree, field, repr: Repr::Dense(e) })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn is_monomial(&self) -> bool {
        matches!(self.repr, Repr::Monomials(_) | Repr::Complement(_))
    }

    /// Dimension, when `2^degree` fits a machine word.
    pub fn dim(&self) -> Option<usize> {
        match &self.repr {
            Repr::Dense(e) => Some(e.rank()),
            Repr::Monomials(s) => Some(s.len()),
            Repr::Annihilator(e) => Some(e.len() - e.rank()),
            Repr::Complement(s) => (self.degree < 63).then(|| ambient(self.degree) - s.len()),
        }
    }

    pub fn codim(&self) -> Option<usize> {
        match &self.repr {
            Repr::Annihilator(e) => Some(e.rank()),
            Repr::Complement(s) => Some(s.len()),
            Repr::Dense(e) => Some(e.len() - e.rank()),
            Repr::Monomials(s) => (self.degree < 63).then(|| ambient(self.degree) - s.len()),
        }
    }

    /// The monomial set for a monomial span, if this space is one.
    pub fn monomial_set(&self) -> Option<&BTreeSet<Monomial>> {
        match &self.repr {
            Repr::Monomials(s) => Some(s),
            _ => None,
        }
    }

    /// The excluded words of a monomial complement, if this space is one.
    pub fn complement_set(&self) -> Option<&BTreeSet<Monomial>> {
        match &self.repr {
            Repr::Complement(s) => Some(s),
            _ => None,
        }
    }

    /// Re-expresses a dense space whose canonical rows are coordinate vectors
    /// as a monomial space; `None` if it is not spanned by monomials.
    pub fn as_monomial(&self) -> Option<Subspace> {
        let units = |e: &Echelon| -> Option<BTreeSet<Monomial>> {
            e.pivot_rows()
                .into_iter()
                .map(|(p, r)| (r.weight() == 1).then(|| Monomial::from_index(self.degree, p)))
                .collect()
        };
        let repr = match &self.repr {
            Repr::Monomials(_) | Repr::Complement(_) => return Some(self.clone()),
            Repr::Dense(e) => Repr::Monomials(units(e)?),
            Repr::Annihilator(e) => Repr::Complement(units(e)?),
        };
        Some(Subspace { degree: self.degree, field: self.field, repr })
    }

    /// Dense form: a basis (`Dense`) or an annihilator (`Annihilator`).
    pub fn to_dense(&self) -> Result<Subspace> {
        let len = || -> Result<usize> {
            check_dense(self.degree)?;
            Ok(ambient(self.degree))
        };
        let repr = match &self.repr {
            Repr::Dense(_) | Repr::Annihilator(_) => return Ok(self.clone()),
            Repr::Monomials(s) => Repr::Dense(Echelon::from_units(
                self.field,
                len()?,
                PivotOrder::Leading,
                s.iter().map(|w| w.index().unwrap()),
            )?),
            Repr::Complement(s) => Repr::Annihilator(Echelon::from_units(
                self.field,
                len()?,
                PivotOrder::Trailing,
                s.iter().map(|w| w.index().unwrap()),
            )?),
        };
        Ok(Subspace { degree: self.degree, field: self.field, repr })
    }

    /// Dense basis of the space.
    pub fn primal(&self) -> Result<Echelon> {
        match &self.to_dense()?.repr {
            Repr::Dense(e) => Ok(e.clone()),
            Repr::Annihilator(a) => a.orthogonal(),
            _ => unreachable!(),
        }
    }

    /// Dense basis of the annihilator, trailing pivots.
    pub fn annihilator(&self) -> Result<Echelon> {
        match &self.to_dense()?.repr {
            Repr::Dense(e) => e.orthogonal(),
            Repr::Annihilator(a) => Ok(a.clone()),
            _ => unreachable!(),
        }
    }

    /// Canonical basis vectors.
    pub fn basis(&self) -> Result<Vec<DenseVector>> {
        Ok(self.primal()?.into_rows().into_iter().map(|row| DenseVector { degree: self.degree, row }).collect())
    }

    fn check_vector(&self, v: &DenseVector) -> Result<()> {
        if v.degree != self.degree {
            return Err(Error::DegreeMismatch(v.degree, self.degree));
        }
        if v.field() != self.field {
            return Err(Error::FieldMismatch(v.field().modulus(), self.field.modulus()));
        }
        Ok(())
    }

    pub fn contains(&self, v: &DenseVector) -> Result<bool> {
        self.check_vector(v)?;
        Ok(match &self.repr {
            Repr::Dense(e) => e.contains(&v.row),
            Repr::Annihilator(a) => a.rows().iter().all(|f| f.dot(&v.row) == 0),
            Repr::Monomials(s) => {
                v.row.support().into_iter().all(|i| s.contains(&Monomial::from_index(self.degree, i)))
            }
            Repr::Complement(s) => {
                v.row.support().into_iter().all(|i| !s.contains(&Monomial::from_index(self.degree, i)))
            }
        })
    }

    /// Whether the word itself lies in the space.
    pub fn contains_monomial(&self, w: &Monomial) -> Result<bool> {
        if w.degree() != self.degree {
            return Err(Error::DegreeMismatch(w.degree(), self.degree));
        }
        Ok(match &self.repr {
            Repr::Monomials(s) => s.contains(w),
            Repr::Complement(s) => !s.contains(w),
            Repr::Dense(e) => e.contains(&Row::unit(self.field, e.len(), w.index().unwrap())),
            Repr::Annihilator(a) => a.rows().iter().all(|f| f.get(w.index().unwrap()) == 0),
        })
    }

    /// Whether every element of the space has a zero coefficient on `w`.
    pub fn coordinate_vanishes(&self, w: &Monomial) -> Result<bool> {
        if w.degree() != self.degree {
            return Err(Error::DegreeMismatch(w.degree(), self.degree));
        }
        Ok(match &self.repr {
            Repr::Monomials(s) => !s.contains(w),
            Repr::Complement(s) => s.contains(w),
            Repr::Dense(e) => e.rows().iter().all(|r| r.get(w.index().unwrap()) == 0),
            Repr::Annihilator(a) => a.contains(&Row::unit(self.field, a.len(), w.index().unwrap())),
        })
    }

    /// Whether the functional `f` vanishes on the whole space.
    pub fn annihilated_by(&self, f: &Row) -> bool {
        let word = |i| Monomial::from_index(self.degree, i);
        match &self.repr {
            Repr::Dense(e) => e.rows().iter().all(|r| r.dot(f) == 0),
            Repr::Annihilator(a) => a.contains(f),
            Repr::Monomials(s) => s.iter().all(|w| f.get(w.index().unwrap()) == 0),
            Repr::Complement(s) => f.support().into_iter().all(|i| s.contains(&word(i))),
        }
    }

    /// `other ⊆ self`.
    pub fn contains_space(&self, other: &Subspace) -> Result<bool> {
        check_pair(self, other)?;
        match (&self.repr, &other.repr) {
            (Repr::Monomials(a), Repr::Monomials(b)) => Ok(b.is_subset(a)),
            (Repr::Complement(a), Repr::Complement(b)) => Ok(a.is_subset(b)),
            (Repr::Complement(a), Repr::Monomials(b)) => Ok(b.is_disjoint(a)),
            (Repr::Monomials(a), Repr::Complement(b)) => {
                if self.degree >= 63 {
                    return Ok(false);
                }
                Ok(a.union(b).count() == ambient(self.degree))
            }
            (_, Repr::Monomials(b)) => {
                for w in b {
                    if !self.contains_monomial(w)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (_, Repr::Dense(e)) => {
                let s = self.to_dense()?;
                Ok(e.rows().into_iter().all(|r| match &s.repr {
                    Repr::Dense(se) => se.contains(r),
                    Repr::Annihilator(sa) => sa.rows().iter().all(|f| f.dot(r) == 0),
                    _ => unreachable!(),
                }))
            }
            (_, Repr::Annihilator(_) | Repr::Complement(_)) => {
                let ann = self.annihilator()?;
                Ok(ann.rows().into_iter().all(|f| other.annihilated_by(f)))
            }
        }
    }

    /// Same subspace; canonical bases are then identical.
    pub fn same_space(&self, other: &Subspace) -> Result<bool> {
        check_pair(self, other)?;
        if let (Some(a), Some(b)) = (self.dim(), other.dim()) {
            if a != b {
                return Ok(false);
            }
        } else if self.codim() != other.codim() {
            return Ok(false);
        }
        self.contains_space(other)
    }

    /// The canonical basis on the cheaper side: leading-pivot rows of the
    /// space or, when the space is larger than its annihilator, trailing-pivot
    /// rows of the annihilator. Equal spaces give identical output.
    pub fn canonical_rows(&self) -> Result<(PivotOrder, Vec<Row>)> {
        let d = self.to_dense()?;
        let (dim, codim) = (d.dim().unwrap(), d.codim().unwrap());
        if dim <= codim {
            Ok((PivotOrder::Leading, d.primal()?.into_rows()))
        } else {
            Ok((PivotOrder::Trailing, d.annihilator()?.into_rows()))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == Some(0)
    }

    /// `a + b`.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        check_pair(self, other)?;
        let (degree, field) = (self.degree, self.field);
        let mono = |repr| Ok(Subspace { degree, field, repr });
        match (&self.repr, &other.repr) {
            (Repr::Monomials(a), Repr::Monomials(b)) => return mono(Repr::Monomials(a.union(b).cloned().collect())),
            (Repr::Complement(a), Repr::Complement(b)) => {
                return mono(Repr::Complement(a.intersection(b).cloned().collect()))
            }
            (Repr::Monomials(a), Repr::Complement(b)) | (Repr::Complement(b), Repr::Monomials(a)) => {
                return mono(Repr::Complement(b.difference(a).cloned().collect()))
            }
            _ => {}
        }
        let (a, b) = (self.to_dense()?, other.to_dense()?);
        let repr = match (&a.repr, &b.repr) {
            (Repr::Dense(x), Repr::Dense(y)) => {
                let mut e = x.clone();
                for r in y.rows() {
                    e.insert(r.clone());
                }
                Repr::Dense(e)
            }
            (Repr::Annihilator(x), Repr::Annihilator(y)) => {
                Repr::Annihilator(Echelon::from_rows(field, x.len(), PivotOrder::Trailing, intersect_spans(x, y)))
            }
            (Repr::Annihilator(f), Repr::Dense(v)) | (Repr::Dense(v), Repr::Annihilator(f)) => {
                let basis: Vec<Row> = f.rows().into_iter().cloned().collect();
                let vs = v.rows();
                let images: Vec<Row> = basis
                    .iter()
                    .map(|g| Row::from_values(field, &vs.iter().map(|r| g.dot(r)).collect::<Vec<_>>()))
                    .collect();
                Repr::Annihilator(Echelon::from_rows(
                    field,
                    f.len(),
                    PivotOrder::Trailing,
                    combine_kernel(field, &basis, &images),
                ))
            }
            _ => unreachable!(),
        };
        Ok(Subspace { degree, field, repr })
    }

    /// `a ∩ b`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        check_pair(self, other)?;
        let (degree, field) = (self.degree, self.field);
        let mono = |repr| Ok(Subspace { degree, field, repr });
        match (&self.repr, &other.repr) {
            (Repr::Monomials(a), Repr::Monomials(b)) => {
                return mono(Repr::Monomials(a.intersection(b).cloned().collect()))
            }
            (Repr::Complement(a), Repr::Complement(b)) => return mono(Repr::Complement(a.union(b).cloned().collect())),
            (Repr::Monomials(a), Repr::Complement(b)) | (Repr::Complement(b), Repr::Monomials(a)) => {
                return mono(Repr::Monomials(a.difference(b).cloned().collect()))
            }
            _ => {}
        }
        let (a, b) = (self.to_dense()?, other.to_dense()?);
        let repr = match (&a.repr, &b.repr) {
            (Repr::Dense(x), Repr::Dense(y)) => {
                Repr::Dense(Echelon::from_rows(field, x.len(), PivotOrder::Leading, intersect_spans(x, y)))
            }
            (Repr::Annihilator(x), Repr::Annihilator(y)) => {
                let mut e = x.clone();
                for r in y.rows() {
                    e.insert(r.clone());
                }
                Repr::Annihilator(e)
            }
            (Repr::Annihilator(f), Repr::Dense(v)) | (Repr::Dense(v), Repr::Annihilator(f)) => {
                let basis: Vec<Row> = v.rows().into_iter().cloned().collect();
                let fs = f.rows();
                let images: Vec<Row> = basis
                    .iter()
                    .map(|r| Row::from_values(field, &fs.iter().map(|g| g.dot(r)).collect::<Vec<_>>()))
                    .collect();
                Repr::Dense(Echelon::from_rows(
                    field,
                    v.len(),
                    PivotOrder::Leading,
                    combine_kernel(field, &basis, &images),
                ))
            }
            _ => unreachable!(),
        };
        Ok(Subspace { degree, field, repr })
    }

    /// Words on which the space has a nonzero coordinate (monomial spaces only).
    fn support_set(&self) -> Option<SupportSet<'_>> {
        match &self.repr {
            Repr::Monomials(s) => Some(SupportSet::Listed(s)),
            Repr::Complement(s) => Some(SupportSet::AllBut(s)),
            _ => None,
        }
    }

    /// Graded product `a · b ⊆ H(deg a + deg b)`.
    pub fn space_mul(&self, other: &Subspace) -> Result<Subspace> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.modulus(), other.field.modulus()));
        }
        let (m, n) = (self.degree, other.degree);
        let degree = m + n;
        let field = self.field;
        if let (Some(a), Some(b)) = (self.support_set(), other.support_set()) {
            if let Some(repr) = monomial_product(&a, m, &b, n)? {
                return Ok(Subspace { degree, field, repr });
            }
        }
        check_dense(degree)?;
        let (a, b) = (self.to_dense()?, other.to_dense()?);
        let (dim_a, dim_b) = (a.dim().unwrap(), b.dim().unwrap());
        let (co_a, co_b) = (a.codim().unwrap(), b.codim().unwrap());
        let primal_rows = dim_a * dim_b;
        let dual_rows = co_a * ambient(n) + ambient(m) * co_b;
        let len = ambient(degree);
        if primal_rows <= dual_rows {
            let (pa, pb) = (a.primal()?, b.primal()?);
            let mut e = Echelon::new(field, len, PivotOrder::Leading);
            for x in pa.rows() {
                for y in pb.rows() {
                    e.insert(x.kron(y));
                }
            }
            Ok(Subspace { degree, field, repr: Repr::Dense(e) })
        } else {
            let (fa, fb) = (a.annihilator()?, b.annihilator()?);
            let mut e = Echelon::new(field, len, PivotOrder::Trailing);
            for f in fa.rows() {
                for v in 0..ambient(n) {
                    e.insert(f.kron(&Row::unit(field, ambient(n), v)));
                }
            }
            for u in 0..ambient(m) {
                let eu = Row::unit(field, ambient(m), u);
                for g in fb.rows() {
                    e.insert(eu.kron(g));
                }
            }
            Ok(Subspace { degree, field, repr: Repr::Annihilator(e) })
        }
    }

    /// Coordinate subspace on the non-pivot columns of the canonical basis.
    pub fn nonpivot_space(&self) -> Result<Subspace> {
        let (degree, field) = (self.degree, self.field);
        let word = |i| Monomial::from_index(degree, i);
        let repr = match &self.repr {
            Repr::Monomials(s) => Repr::Complement(s.clone()),
            Repr::Complement(s) => Repr::Monomials(s.clone()),
            Repr::Dense(e) => Repr::Complement(e.pivots().into_iter().map(word).collect()),
            Repr::Annihilator(a) => Repr::Monomials(a.pivots().into_iter().map(word).collect()),
        };
        Ok(Subspace { degree, field, repr })
    }

    /// `C` with `inner ⊕ C = outer`, spanned by the part of `outer` supported
    /// on the non-pivot coordinates of `inner` (lex-least completion).
    pub fn complement_within(inner: &Subspace, outer: &Subspace) -> Result<Subspace> {
        if !outer.contains_space(inner)? {
            return Err(Error::Precondition("complement_within: inner space not contained in outer".into()));
        }
        outer.intersect(&inner.nonpivot_space()?)
    }

    /// Canonical representative of `v` modulo the space: the unique element of
    /// `v + self` vanishing on every pivot column.
    pub fn residual(&self, v: &DenseVector) -> Result<DenseVector> {
        self.check_vector(v)?;
        let d = self.to_dense()?;
        let row = match &d.repr {
            Repr::Dense(e) => {
                let mut w = v.row.clone();
                e.reduce(&mut w);
                w
            }
            Repr::Annihilator(a) => {
                let mut w = Row::zero(self.field, a.len());
                for (c, f) in a.pivot_rows() {
                    w.set(c, f.dot(&v.row));
                }
                w
            }
            _ => unreachable!(),
        };
        Ok(DenseVector { degree: self.degree, row })
    }

    /// A complement of `self` chosen inside `within`: the canonical basis of
    /// `within` is scanned in order and a vector is kept when its residual
    /// modulo `self` is independent of those already kept. Fails unless
    /// `within + self` is everything.
    pub fn pullback_complement(&self, within: &Subspace) -> Result<Subspace> {
        check_pair(self, within)?;
        if let (Repr::Complement(excluded), Some(listed)) = (&self.repr, within.monomial_set()) {
            if !excluded.is_subset(listed) {
                return Err(Error::Invariant("complement space does not cover the quotient".into()));
            }
            return Subspace::monomial_span(self.field, self.degree, excluded.iter().cloned());
        }
        let basis = within.basis()?;
        let codim = self.codim().unwrap();
        let mut residuals = Echelon::new(self.field, ambient(self.degree), PivotOrder::Leading);
        let mut kept = Vec::new();
        for v in basis {
            if residuals.rank() == codim {
                break;
            }
            if residuals.insert(self.residual(&v)?.row) {
                kept.push(v);
            }
        }
        if residuals.rank() != codim {
            return Err(Error::Invariant("complement space does not cover the quotient".into()));
        }
        Subspace::echelonize(self.field, self.degree, &kept)
    }

    /// Checks `H(left) · middle · H(right) ⊆ self`, returning a description of
    /// the first failure.
    pub fn sandwich_contains(&self, left: usize, middle: &Subspace, right: usize) -> Result<Option<String>> {
        let mid = middle.degree;
        if left + mid + right != self.degree {
            return Err(Error::DegreeMismatch(left + mid + right, self.degree));
        }
        if let Repr::Complement(excluded) = &self.repr {
            for b in excluded {
                let seg = b.subword(left, mid);
                if !middle.coordinate_vanishes(&seg)? {
                    return Ok(Some(format!("{b} lies in the product (middle factor {seg})")));
                }
            }
            return Ok(None);
        }
        let ann = self.annihilator()?;
        let (rlen, mlen) = (ambient(right), ambient(mid));
        for (k, phi) in ann.rows().into_iter().enumerate() {
            for u in 0..ambient(left) {
                for v in 0..rlen {
                    let mut slice = Row::zero(self.field, mlen);
                    let base = (u << (mid + right)) | v;
                    for w in 0..mlen {
                        let c = phi.get(base | (w << right));
                        if c != 0 {
                            slice.set(w, c);
                        }
                    }
                    if !slice.is_zero() && !middle.annihilated_by(&slice) {
                        let pre = Monomial::from_index(left, u);
                        let suf = Monomial::from_index(right, v);
                        return Ok(Some(format!("annihilator row {k} does not vanish on {pre}·(middle)·{suf}")));
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn to_json(&self) -> SubspaceJson {
        let (repr, rows, monomials) = match &self.repr {
            Repr::Dense(e) => ("dense", Some(e.rows().iter().map(|r| r.to_hex()).collect()), None),
            Repr::Annihilator(e) => ("annihilator", Some(e.rows().iter().map(|r| r.to_hex()).collect()), None),
            Repr::Monomials(s) => ("monomials", None, Some(s.iter().cloned().collect())),
            Repr::Complement(s) => ("complement", None, Some(s.iter().cloned().collect())),
        };
        SubspaceJson { degree: self.degree, field: self.field.modulus(), repr: repr.to_string(), rows, monomials }
    }

    pub fn from_json(j: &SubspaceJson) -> Result<Subspace> {
        let field = Field::new(j.field)?;
        let degree = j.degree;
        let rows = || -> Result<Vec<Row>> {
            check_dense(degree)?;
            j.rows
                .as_ref()
                .ok_or_else(|| Error::Config("dense subspace without rows".into()))?
                .iter()
                .map(|h| {
                    Row::from_hex(field, ambient(degree), h)
                        .ok_or_else(|| Error::Config(format!("malformed coordinate row {h:?}")))
                })
                .collect()
        };
        let words = || -> Result<Vec<Monomial>> {
            j.monomials.clone().ok_or_else(|| Error::Config("monomial subspace without monomials".into()))
        };
        match j.repr.as_str() {
            "dense" => Subspace::from_rows(field, degree, rows()?),
            "annihilator" => Subspace::from_annihilator_rows(field, degree, rows()?),
            "monomials" => Subspace::monomial_span(field, degree, words()?),
            "complement" => Subspace::monomial_complement(field, degree, words()?),
            other => Err(Error::Config(format!("unknown subspace representation {other:?}"))),
        }
    }
}

/// Serialized subspace. `rows` are hex-packed coordinate rows (see
/// [`Row::to_hex`]); `monomials` are plain words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub degree: usize,
    pub field: u32,
    pub repr: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rows: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub monomials: Option<Vec<Monomial>>,
}

enum SupportSet<'a> {
    Listed(&'a BTreeSet<Monomial>),
    AllBut(&'a BTreeSet<Monomial>),
}

impl SupportSet<'_> {
    fn size(&self, degree: usize) -> Option<usize> {
        match self {
            SupportSet::Listed(s) => Some(s.len()),
            SupportSet::AllBut(s) => (degree < 40).then(|| ambient(degree) - s.len()),
        }
    }

    fn missing_size(&self, degree: usize) -> Option<usize> {
        match self {
            SupportSet::AllBut(s) => Some(s.len()),
            SupportSet::Listed(s) => (degree < 40).then(|| ambient(degree) - s.len()),
        }
    }

    fn listed(&self, degree: usize) -> Vec<Monomial> {
        match self {
            SupportSet::Listed(s) => s.iter().cloned().collect(),
            SupportSet::AllBut(s) => Monomial::all(degree).filter(|w| !s.contains(w)).collect(),
        }
    }

    fn missing(&self, degree: usize) -> Vec<Monomial> {
        match self {
            SupportSet::AllBut(s) => s.iter().cloned().collect(),
            SupportSet::Listed(s) => Monomial::all(degree).filter(|w| !s.contains(w)).collect(),
        }
    }
}

/// Product of two monomial spaces as an explicit monomial space, or `None`
/// when neither the span nor the complement fits the set limit.
fn monomial_product(a: &SupportSet, m: usize, b: &SupportSet, n: usize) -> Result<Option<Repr>> {
    let span_size = a.size(m).zip(b.size(n)).and_then(|(x, y)| x.checked_mul(y));
    // words u·v with u missing from a, or u present and v missing from b
    let missing_size = (|| {
        let ma = a.missing_size(m)?;
        let mb = b.missing_size(n)?;
        let left = if ma == 0 { 0 } else { ma.checked_mul(ambient_checked(n)?)? };
        let right = if mb == 0 { 0 } else { a.size(m)?.checked_mul(mb)? };
        left.checked_add(right)
    })();
    let fits = |s: Option<usize>| s.is_some_and(|s| s <= MONOMIAL_SET_LIMIT);
    let prefer_span = match (span_size, missing_size) {
        (Some(s), Some(c)) => s <= c,
        (Some(_), None) => true,
        _ => false,
    };
    if prefer_span && fits(span_size) {
        let (la, lb) = (a.listed(m), b.listed(n));
        let set = la.iter().flat_map(|u| lb.iter().map(move |v| u.concat(v))).collect();
        return Ok(Some(Repr::Monomials(set)));
    }
    if fits(missing_size) {
        let mut set = BTreeSet::new();
        let ma = a.missing(m);
        if !ma.is_empty() {
            for u in &ma {
                for v in Monomial::all(n) {
                    set.insert(u.concat(&v));
                }
            }
        }
        let mb = b.missing(n);
        if !mb.is_empty() {
            for u in a.listed(m) {
                for v in &mb {
                    set.insert(u.concat(v));
                }
            }
        }
        return Ok(Some(Repr::Complement(set)));
    }
    if m + n <= super::dense_degree_limit() {
        return Ok(None);
    }
    Err(Error::Budget(format!("monomial product in degree {} exceeds the explicit set limit", m + n)))
}

fn ambient_checked(degree: usize) -> Option<usize> {
    (degree < 40).then(|| ambient(degree))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn vecs(f: Field, deg: usize, polys: &[&[&str]]) -> Vec<DenseVector> {
        polys
            .iter()
            .map(|terms| {
                let ws: Vec<Monomial> = terms.iter().map(|t| w(t)).collect();
                DenseVector::from_terms(f, deg, ws.iter().map(|m| (m, 1))).unwrap()
            })
            .collect()
    }

    fn span(f: Field, deg: usize, polys: &[&[&str]]) -> Subspace {
        Subspace::echelonize(f, deg, &vecs(f, deg, polys)).unwrap()
    }

    fn mono(deg: usize, words: &[&str]) -> Subspace {
        Subspace::monomial_span(Field::GF2, deg, words.iter().map(|s| w(s))).unwrap()
    }

    #[test]
    fn echelonize_examples() {
        let f = Field::GF2;
        let s = span(f, 2, &[&["xy", "yx"], &["yx"]]);
        assert_eq!(s.dim(), Some(2));
        let rows: Vec<Vec<(Monomial, u8)>> = s.basis().unwrap().iter().map(|v| v.terms()).collect();
        assert_eq!(rows, vec![vec![(w("xy"), 1)], vec![(w("yx"), 1)]]);
        assert_eq!(span(f, 2, &[]).dim(), Some(0));
        assert_eq!(span(f, 2, &[&["xx"], &["xx"]]).dim(), Some(1));
        let mixed = [vecs(f, 2, &[&["xx"]]), vecs(f, 3, &[&["xxx"]])].concat();
        assert!(matches!(Subspace::echelonize(f, 2, &mixed), Err(Error::DegreeMismatch(3, 2))));
    }

    #[test]
    fn sum_examples() {
        let f = Field::GF2;
        let a = mono(2, &["xx"]).sum(&mono(2, &["xy"])).unwrap();
        assert!(a.same_space(&mono(2, &["xx", "xy"])).unwrap());
        let z = Subspace::zero(f, 2);
        assert!(a.sum(&z).unwrap().same_space(&a).unwrap());
        let b = span(f, 2, &[&["xx", "xy"]]).sum(&span(f, 2, &[&["xy"]])).unwrap();
        assert!(b.same_space(&mono(2, &["xx", "xy"])).unwrap());
        assert!(mono(2, &["xx"]).sum(&mono(3, &["xxx"])).is_err());
    }

    #[test]
    fn intersect_examples() {
        let f = Field::GF2;
        let a = span(f, 2, &[&["xx", "xy"], &["yx"]]);
        let b = span(f, 2, &[&["xx", "xy", "yx"]]);
        let i = a.intersect(&b).unwrap();
        assert_eq!(i.dim(), Some(1));
        assert!(i.same_space(&b).unwrap());
        assert!(a.intersect(&a).unwrap().same_space(&a).unwrap());
        assert!(mono(2, &["xx"]).intersect(&mono(2, &["yy"])).unwrap().is_zero());
    }

    #[test]
    fn contains_examples() {
        let f = Field::GF2;
        let u2 = mono(2, &["yx", "yy"]);
        assert!(u2.contains(&vecs(f, 2, &[&["yx", "yy"]])[0]).unwrap());
        assert!(!u2.contains(&vecs(f, 2, &[&["xx"]])[0]).unwrap());
        assert!(Subspace::full(f, 2).contains_space(&span(f, 2, &[&["xy", "yy"]])).unwrap());
    }

    #[test]
    fn complement_examples() {
        let f = Field::GF2;
        let c = Subspace::complement_within(&mono(2, &["yx", "yy"]), &Subspace::full(f, 2)).unwrap();
        assert!(c.same_space(&mono(2, &["xx", "xy"])).unwrap());
        let a = span(f, 2, &[&["xx", "yy"]]);
        assert!(Subspace::complement_within(&a, &a).unwrap().is_zero());
        let h1 = Subspace::full(f, 1);
        assert!(Subspace::complement_within(&Subspace::zero(f, 1), &h1).unwrap().same_space(&h1).unwrap());
        assert!(Subspace::complement_within(&mono(2, &["xx"]), &mono(2, &["yy"])).is_err());
        // dense inner: pivots of span{xx+yy, xy} are xx, xy; completion is {yx, yy}
        let inner = span(f, 2, &[&["xx", "yy"], &["xy"]]);
        let c = Subspace::complement_within(&inner, &Subspace::full(f, 2)).unwrap();
        assert!(c.same_space(&mono(2, &["yx", "yy"])).unwrap());
    }

    #[test]
    fn solve_constraints_examples() {
        let f = Field::GF2;
        assert!(Subspace::solve_constraints(f, 3, &[]).unwrap().same_space(&Subspace::full(f, 3)).unwrap());
        let all: Vec<DenseVector> = Monomial::all(2).map(|m| DenseVector::monomial(f, &m).unwrap()).collect();
        assert!(Subspace::solve_constraints(f, 2, &all).unwrap().is_zero());
        let e2 = Subspace::solve_constraints(f, 2, &all[..3]).unwrap();
        assert!(e2.same_space(&mono(2, &["yy"])).unwrap());
    }

    #[test]
    fn space_mul_examples() {
        let f = Field::GF2;
        let v1 = mono(1, &["x", "y"]);
        assert!(v1.space_mul(&v1).unwrap().same_space(&Subspace::full(f, 2)).unwrap());
        let p = mono(1, &["y"]).space_mul(&mono(2, &["xx", "xy"])).unwrap();
        assert!(p.same_space(&mono(3, &["yxx", "yxy"])).unwrap());
        let u2 = mono(2, &["yx", "yy"]);
        let prod = u2.space_mul(&Subspace::full(f, 2)).unwrap();
        let expected: Vec<Monomial> = Monomial::all(4).filter(|m| m.letter(0)).collect();
        assert_eq!(expected.len(), 8);
        assert!(prod.same_space(&Subspace::monomial_span(f, 4, expected).unwrap()).unwrap());
        // dense operands agree with the monomial product
        let dense = u2.to_dense().unwrap().space_mul(&Subspace::full(f, 2).to_dense().unwrap()).unwrap();
        assert!(dense.same_space(&prod).unwrap());
    }

    #[test]
    fn monomial_and_dense_round_trip() {
        let f = Field::GF2;
        let s = Subspace::monomial_complement(f, 3, [w("xxy"), w("yyy")]).unwrap();
        let d = s.to_dense().unwrap();
        assert!(matches!(d.repr(), Repr::Annihilator(_)));
        let back = d.as_monomial().unwrap();
        assert_eq!(back.complement_set(), s.complement_set());
        let p = Subspace::from_rows(f, 3, d.primal().unwrap().into_rows()).unwrap();
        assert_eq!(p.as_monomial().unwrap().monomial_set().unwrap().len(), 6);
    }

    #[test]
    fn dense_budget_is_enforced() {
        let f = Field::GF2;
        let big = Subspace::full(f, 17);
        assert!(matches!(big.to_dense(), Err(Error::Budget(_))));
    }

    #[test]
    fn json_round_trip() {
        let f = Field::new(3).unwrap();
        let deg = 2;
        let v = DenseVector::from_terms(f, deg, [(&w("xy"), 2u8), (&w("yy"), 1)]).unwrap();
        let s = Subspace::echelonize(f, deg, &[v]).unwrap();
        let j = s.to_json();
        assert_eq!(j.repr, "dense");
        let t = Subspace::from_json(&j).unwrap();
        assert!(t.same_space(&s).unwrap());
        let text = serde_json::to_string(&mono(3, &["xyx"]).to_json()).unwrap();
        assert_eq!(text, r#"{"degree":3,"field":2,"repr":"monomials","monomials":["xyx"]}"#);
    }

    #[test]
    fn sandwich_dense_matches_monomial() {
        let f = Field::GF2;
        let u4 = Subspace::monomial_complement(f, 4, [w("xxxx"), w("xxxy")]).unwrap();
        let u2 = mono(2, &["yx", "yy"]);
        for left in [0, 2] {
            let right = 2 - left;
            assert_eq!(u4.sandwich_contains(left, &u2, right).unwrap(), None);
            assert_eq!(u4.to_dense().unwrap().sandwich_contains(left, &u2, right).unwrap(), None);
        }
        let bad = mono(2, &["xx"]);
        assert!(u4.sandwich_contains(0, &bad, 2).unwrap().is_some());
        assert!(u4.to_dense().unwrap().sandwich_contains(0, &bad, 2).unwrap().is_some());
    }

    #[test]
    fn pullback_complement_selects_inside() {
        let f = Field::GF2;
        // S(3) = all but {xxx, xxy}; pulling back into V(1)V(2) keeps {xxx, xxy}
        let s3 = Subspace::monomial_complement(f, 3, [w("xxx"), w("xxy")]).unwrap();
        let pv = mono(3, &["xxx", "xxy", "yxx", "yxy"]);
        let w3 = s3.pullback_complement(&pv).unwrap();
        assert!(w3.same_space(&mono(3, &["xxx", "xxy"])).unwrap());
        let dense = s3.to_dense().unwrap().pullback_complement(&pv.to_dense().unwrap()).unwrap();
        assert!(dense.same_space(&w3).unwrap());
        assert!(s3.pullback_complement(&mono(3, &["xxx"])).is_err());
    }
}
