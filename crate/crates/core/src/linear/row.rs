//! Coordinate rows over a prime field. GF(2) rows are bit-packed into `u64`
//! words (coordinate `i` lives at bit `i % 64` of word `i / 64`); other fields
//! store one byte per coordinate.

use super::field::Field;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Coords {
    Bits(Vec<u64>),
    Digits(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    field: Field,
    len: usize,
    coords: Coords,
}

impl Row {
    pub fn zero(field: Field, len: usize) -> Self {
        let coords =
            if field.is_binary() { Coords::Bits(vec![0; len.div_ceil(64)]) } else { Coords::Digits(vec![0; len]) };
        Row { field, len, coords }
    }

    pub fn unit(field: Field, len: usize, i: usize) -> Self {
        let mut r = Row::zero(field, len);
        r.set(i, 1);
        r
    }

    pub fn from_values(field: Field, values: &[u8]) -> Self {
        let mut r = Row::zero(field, values.len());
        for (i, &v) in values.iter().enumerate() {
            if v != 0 {
                r.set(i, field.reduce(v as i64));
            }
        }
        r
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        match &self.coords {
            Coords::Bits(w) => ((w[i >> 6] >> (i & 63)) & 1) as u8,
            Coords::Digits(d) => d[i],
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: u8) {
        debug_assert!(i < self.len);
        match &mut self.coords {
            Coords::Bits(w) => {
                if v & 1 == 1 {
                    w[i >> 6] |= 1 << (i & 63);
                } else {
                    w[i >> 6] &= !(1 << (i & 63));
                }
            }
            Coords::Digits(d) => d[i] = v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.coords {
            Coords::Bits(w) => w.iter().all(|&x| x == 0),
            Coords::Digits(d) => d.iter().all(|&x| x == 0),
        }
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        match &self.coords {
            Coords::Bits(w) => {
                w.iter().enumerate().find(|(_, &x)| x != 0).map(|(k, &x)| k * 64 + x.trailing_zeros() as usize)
            }
            Coords::Digits(d) => d.iter().position(|&x| x != 0),
        }
    }

    pub fn last_nonzero(&self) -> Option<usize> {
        match &self.coords {
            Coords::Bits(w) => w
                .iter()
                .enumerate()
                .rev()
                .find(|(_, &x)| x != 0)
                .map(|(k, &x)| k * 64 + 63 - x.leading_zeros() as usize),
            Coords::Digits(d) => d.iter().rposition(|&x| x != 0),
        }
    }

    /// Indices of nonzero coordinates in increasing order.
    pub fn support(&self) -> Vec<usize> {
        match &self.coords {
            Coords::Bits(w) => {
                let mut out = Vec::new();
                for (k, &word) in w.iter().enumerate() {
                    let mut x = word;
                    while x != 0 {
                        out.push(k * 64 + x.trailing_zeros() as usize);
                        x &= x - 1;
                    }
                }
                out
            }
            Coords::Digits(d) => d.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, _)| i).collect(),
        }
    }

    pub fn weight(&self) -> usize {
        match &self.coords {
            Coords::Bits(w) => w.iter().map(|x| x.count_ones() as usize).sum(),
            Coords::Digits(d) => d.iter().filter(|&&x| x != 0).count(),
        }
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: u8, other: &Row) {
        debug_assert_eq!(self.len, other.len);
        if c == 0 {
            return;
        }
        let field = self.field;
        match (&mut self.coords, &other.coords) {
            (Coords::Bits(a), Coords::Bits(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x ^= *y;
                }
            }
            (Coords::Digits(a), Coords::Digits(b)) => {
                for (x, &y) in a.iter_mut().zip(b) {
                    if y != 0 {
                        *x = field.add(*x, field.mul(c, y));
                    }
                }
            }
            _ => unreachable!("rows over different fields"),
        }
    }

    pub fn scale(&mut self, c: u8) {
        let field = self.field;
        match &mut self.coords {
            Coords::Bits(w) => {
                if c & 1 == 0 {
                    w.iter_mut().for_each(|x| *x = 0);
                }
            }
            Coords::Digits(d) => d.iter_mut().for_each(|x| *x = field.mul(*x, c)),
        }
    }

    pub fn dot(&self, other: &Row) -> u8 {
        debug_assert_eq!(self.len, other.len);
        match (&self.coords, &other.coords) {
            (Coords::Bits(a), Coords::Bits(b)) => {
                (a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() & 1) as u8
            }
            (Coords::Digits(a), Coords::Digits(b)) => {
                let p = self.field.modulus() as u64;
                (a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum::<u64>() % p) as u8
            }
            _ => unreachable!("rows over different fields"),
        }
    }

    /// Concatenation of coordinate arrays (`self` occupies the low indices).
    pub fn concat(&self, other: &Row) -> Row {
        let mut out = Row::zero(self.field, self.len + other.len);
        for i in self.support() {
            out.set(i, self.get(i));
        }
        for i in other.support() {
            out.set(self.len + i, other.get(i));
        }
        out
    }

    /// Coordinates `start..start+len` as a new row.
    pub fn slice(&self, start: usize, len: usize) -> Row {
        let mut out = Row::zero(self.field, len);
        match (&self.coords, &mut out.coords) {
            (Coords::Bits(src), Coords::Bits(dst)) => {
                let shift = start & 63;
                let base = start >> 6;
                for (k, d) in dst.iter_mut().enumerate() {
                    let lo = src.get(base + k).copied().unwrap_or(0);
                    let hi = src.get(base + k + 1).copied().unwrap_or(0);
                    *d = if shift == 0 { lo } else { (lo >> shift) | (hi << (64 - shift)) };
                }
                if len & 63 != 0 {
                    if let Some(last) = dst.last_mut() {
                        *last &= (1u64 << (len & 63)) - 1;
                    }
                }
            }
            (Coords::Digits(src), Coords::Digits(dst)) => {
                dst.copy_from_slice(&src[start..start + len]);
            }
            _ => unreachable!(),
        }
        out
    }

    /// Tensor product: coordinate `i * other.len + j` is `self[i] * other[j]`.
    pub fn kron(&self, other: &Row) -> Row {
        let n = other.len;
        let mut out = Row::zero(self.field, self.len * n);
        for i in self.support() {
            let a = self.get(i);
            for j in other.support() {
                out.set(i * n + j, self.field.mul(a, other.get(j)));
            }
        }
        out
    }

    /// Hex string, coordinates in index order. Over GF(2) four coordinates per
    /// digit with coordinate 0 as the most significant bit of the first digit;
    /// otherwise two digits per coordinate.
    pub fn to_hex(&self) -> String {
        if self.field.is_binary() {
            let digits = self.len.div_ceil(4);
            let mut s = String::with_capacity(digits);
            for d in 0..digits {
                let mut nib = 0u8;
                for b in 0..4 {
                    let i = d * 4 + b;
                    if i < self.len && self.get(i) == 1 {
                        nib |= 8 >> b;
                    }
                }
                s.push(char::from_digit(nib as u32, 16).unwrap());
            }
            s
        } else {
            (0..self.len).map(|i| format!("{:02x}", self.get(i))).collect()
        }
    }

    pub fn from_hex(field: Field, len: usize, s: &str) -> Option<Row> {
        let mut r = Row::zero(field, len);
        let chars: Vec<u8> = s.chars().map(|c| c.to_digit(16).map(|d| d as u8)).collect::<Option<_>>()?;
        if field.is_binary() {
            if chars.len() != len.div_ceil(4) {
                return None;
            }
            for (d, &nib) in chars.iter().enumerate() {
                for b in 0..4 {
                    let i = d * 4 + b;
                    if nib & (8 >> b) != 0 {
                        if i >= len {
                            return None;
                        }
                        r.set(i, 1);
                    }
                }
            }
        } else {
            if chars.len() != 2 * len {
                return None;
            }
            for i in 0..len {
                let v = chars[2 * i] * 16 + chars[2 * i + 1];
                if v as u32 >= field.modulus() {
                    return None;
                }
                r.set(i, v);
            }
        }
        Some(r)
    }
}
