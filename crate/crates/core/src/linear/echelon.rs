//! Incremental reduced row-echelon bases.
//!
//! Rows are kept fully reduced at every step: each row carries a unit entry at
//! its pivot column and zeros in every other pivot column. `Leading` pivots are
//! the first nonzero coordinate of a row (the usual RREF); `Trailing` pivots are
//! the last nonzero coordinate and are used for annihilators, where they make
//! the trailing pivots of `W^⊥` coincide with the non-pivot columns of `W`.

use std::collections::HashMap;

use super::field::Field;
use super::row::Row;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotOrder {
    Leading,
    Trailing,
}

impl PivotOrder {
    pub fn opposite(self) -> Self {
        match self {
            PivotOrder::Leading => PivotOrder::Trailing,
            PivotOrder::Trailing => PivotOrder::Leading,
        }
    }
}

/// Largest number of coordinates a conversion may materialise (rows × len).
pub(crate) const CONVERSION_CELL_LIMIT: usize = 1 << 29;

#[derive(Debug, Clone)]
pub struct Echelon {
    field: Field,
    len: usize,
    order: PivotOrder,
    rows: Vec<Row>,
    pivots: Vec<usize>,
    pivot_of: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new(field: Field, len: usize, order: PivotOrder) -> Self {
        Echelon { field, len, order, rows: Vec::new(), pivots: Vec::new(), pivot_of: HashMap::new() }
    }

    pub fn from_rows<I: IntoIterator<Item = Row>>(field: Field, len: usize, order: PivotOrder, rows: I) -> Self {
        let mut e = Echelon::new(field, len, order);
        for r in rows {
            e.insert(r);
        }
        e
    }

    /// Span of coordinate vectors; unit rows are reduced in either order.
    pub fn from_units<I: IntoIterator<Item = usize>>(
        field: Field,
        len: usize,
        order: PivotOrder,
        cols: I,
    ) -> Result<Self> {
        let mut e = Echelon::new(field, len, order);
        for c in cols {
            if e.pivot_of.contains_key(&c) {
                continue;
            }
            if e.rows.len().saturating_add(1).saturating_mul(len) > CONVERSION_CELL_LIMIT {
                return Err(Error::Budget(format!("too many coordinate rows of length {len}")));
            }
            e.pivot_of.insert(c, e.rows.len());
            e.pivots.push(c);
            e.rows.push(Row::unit(field, len, c));
        }
        Ok(e)
    }

    /// `(pivot, row)` pairs sorted by pivot.
    pub fn pivot_rows(&self) -> Vec<(usize, &Row)> {
        let mut v: Vec<(usize, &Row)> = self.pivots.iter().copied().zip(self.rows.iter()).collect();
        v.sort_unstable_by_key(|(p, _)| *p);
        v
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn order(&self) -> PivotOrder {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_of.contains_key(&col)
    }

    pub fn pivots(&self) -> Vec<usize> {
        let mut p = self.pivots.clone();
        p.sort_unstable();
        p
    }

    /// Rows sorted by pivot column.
    pub fn rows(&self) -> Vec<&Row> {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_unstable_by_key(|&i| self.pivots[i]);
        idx.into_iter().map(|i| &self.rows[i]).collect()
    }

    pub fn into_rows(self) -> Vec<Row> {
        let mut pairs: Vec<(usize, Row)> = self.pivots.into_iter().zip(self.rows).collect();
        pairs.sort_unstable_by_key(|(p, _)| *p);
        pairs.into_iter().map(|(_, r)| r).collect()
    }

    /// Reduce `v` modulo the span in place; the result vanishes on every pivot column.
    pub fn reduce(&self, v: &mut Row) {
        if self.rows.is_empty() {
            return;
        }
        let hits: Vec<(usize, u8)> =
            v.support().into_iter().filter_map(|i| self.pivot_of.get(&i).map(|&r| (r, v.get(i)))).collect();
        for (r, c) in hits {
            v.axpy(self.field.neg(c), &self.rows[r]);
        }
    }

    pub fn contains(&self, v: &Row) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    /// Adds `v` to the span. Returns whether the rank grew.
    pub fn insert(&mut self, mut v: Row) -> bool {
        debug_assert_eq!(v.len(), self.len);
        self.reduce(&mut v);
        let pivot = match self.order {
            PivotOrder::Leading => v.first_nonzero(),
            PivotOrder::Trailing => v.last_nonzero(),
        };
        let Some(c) = pivot else { return false };
        let lead = v.get(c);
        if lead != 1 {
            v.scale(self.field.inv(lead));
        }
        for row in &mut self.rows {
            let a = row.get(c);
            if a != 0 {
                row.axpy(self.field.neg(a), &v);
            }
        }
        self.pivot_of.insert(c, self.rows.len());
        self.pivots.push(c);
        self.rows.push(v);
        true
    }

    /// Basis of the orthogonal complement under the standard pairing, returned
    /// in the opposite pivot order.
    pub fn orthogonal(&self) -> Result<Echelon> {
        let out_rank = self.len - self.rank();
        if out_rank.saturating_mul(self.len) > CONVERSION_CELL_LIMIT {
            return Err(Error::Budget(format!(
                "orthogonal complement would materialise {out_rank} rows of length {}",
                self.len
            )));
        }
        let order = self.order.opposite();
        let mut out = Echelon::new(self.field, self.len, order);
        for c in 0..self.len {
            if self.is_pivot(c) {
                continue;
            }
            let mut f = Row::unit(self.field, self.len, c);
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                let a = row.get(c);
                if a != 0 {
                    f.set(p, self.field.neg(a));
                }
            }
            // Already reduced in the opposite order; record directly.
            out.pivot_of.insert(c, out.rows.len());
            out.pivots.push(c);
            out.rows.push(f);
        }
        Ok(out)
    }

    /// Re-echelonise the same span with a different pivot order.
    pub fn reorder(&self, order: PivotOrder) -> Echelon {
        if order == self.order {
            return self.clone();
        }
        Echelon::from_rows(self.field, self.len, order, self.rows.iter().cloned())
    }
}

/// Given `basis[i]` with `images[i]`, returns a basis of
/// `{ Σ c_i basis_i : Σ c_i images_i = 0 }` (unreduced).
pub(crate) fn combine_kernel(field: Field, basis: &[Row], images: &[Row]) -> Vec<Row> {
    assert_eq!(basis.len(), images.len());
    let k = basis.len();
    if k == 0 {
        return Vec::new();
    }
    let width = images[0].len();
    let mut aug = Echelon::new(field, width + k, PivotOrder::Leading);
    for (i, img) in images.iter().enumerate() {
        let mut r = Row::zero(field, width + k);
        for j in img.support() {
            r.set(j, img.get(j));
        }
        r.set(width + i, 1);
        aug.insert(r);
    }
    let len = basis[0].len();
    aug.into_rows()
        .into_iter()
        .filter(|r| r.first_nonzero().is_some_and(|p| p >= width))
        .map(|r| {
            let mut v = Row::zero(field, len);
            for (i, b) in basis.iter().enumerate().take(k) {
                let c = r.get(width + i);
                if c != 0 {
                    v.axpy(c, b);
                }
            }
            v
        })
        .collect()
}

/// Rows spanning `span(a) ∩ span(b)`.
pub(crate) fn intersect_spans(a: &Echelon, b: &Echelon) -> Vec<Row> {
    let (small, large) = if a.rank() <= b.rank() { (a, b) } else { (b, a) };
    let basis: Vec<Row> = small.rows.clone();
    let images: Vec<Row> = basis
        .iter()
        .map(|r| {
            let mut w = r.clone();
            large.reduce(&mut w);
            w
        })
        .collect();
    combine_kernel(a.field, &basis, &images)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(field: Field, vals: &[&[u8]]) -> Vec<Row> {
        vals.iter().map(|v| Row::from_values(field, v)).collect()
    }

    #[test]
    fn reduced_form_invariants() {
        let f = Field::GF2;
        let e = Echelon::from_rows(
            f,
            4,
            PivotOrder::Leading,
            rows(f, &[&[0, 1, 1, 0], &[0, 1, 0, 0], &[1, 1, 1, 1], &[1, 0, 0, 1]]),
        );
        assert_eq!(e.rank(), 3);
        let pivots = e.pivots();
        for r in e.rows() {
            let lead = r.first_nonzero().unwrap();
            assert_eq!(r.get(lead), 1);
            for &p in &pivots {
                if p != lead {
                    assert_eq!(r.get(p), 0);
                }
            }
        }
    }

    #[test]
    fn orthogonal_is_annihilator() {
        let f = Field::new(5).unwrap();
        let e = Echelon::from_rows(f, 5, PivotOrder::Leading, rows(f, &[&[1, 2, 0, 3, 4], &[0, 0, 1, 1, 1]]));
        let o = e.orthogonal().unwrap();
        assert_eq!(o.rank(), 3);
        for a in e.rows() {
            for b in o.rows() {
                assert_eq!(a.dot(b), 0);
            }
        }
        let back = o.orthogonal().unwrap();
        assert_eq!(back.order(), PivotOrder::Leading);
        let lhs: Vec<Row> = back.into_rows();
        let rhs: Vec<Row> = e.into_rows();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn intersection_small() {
        let f = Field::GF2;
        let a = Echelon::from_rows(f, 3, PivotOrder::Leading, rows(f, &[&[1, 1, 0], &[0, 0, 1]]));
        let b = Echelon::from_rows(f, 3, PivotOrder::Leading, rows(f, &[&[1, 1, 1], &[0, 1, 0]]));
        let i = Echelon::from_rows(f, 3, PivotOrder::Leading, intersect_spans(&a, &b));
        assert_eq!(i.rank(), 1);
        assert!(i.contains(&Row::from_values(f, &[1, 1, 1])));
    }
}
