use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime field GF(p) with p < 256.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Field {
    p: u8,
}

impl Field {
    pub const GF2: Field = Field { p: 2 };

    pub fn new(p: u32) -> Result<Self> {
        if !(2..256).contains(&p) || !(2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d)) {
            return Err(Error::Config(format!("field size {p} is not a prime below 256")));
        }
        Ok(Field { p: p as u8 })
    }

    pub fn modulus(self) -> u32 {
        self.p as u32
    }

    pub fn is_binary(self) -> bool {
        self.p == 2
    }

    pub fn reduce(self, value: i64) -> u8 {
        value.rem_euclid(self.p as i64) as u8
    }

    pub fn add(self, a: u8, b: u8) -> u8 {
        ((a as u16 + b as u16) % self.p as u16) as u8
    }

    pub fn sub(self, a: u8, b: u8) -> u8 {
        ((a as u16 + self.p as u16 - b as u16) % self.p as u16) as u8
    }

    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.p as u16) as u8
    }

    /// Multiplicative inverse via Fermat; `a` must be nonzero.
    pub fn inv(self, a: u8) -> u8 {
        debug_assert!(a != 0);
        let mut result = 1u8;
        let mut base = a;
        let mut e = self.p as u32 - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        result
    }
}

impl Default for Field {
    fn default() -> Self {
        Field::GF2
    }
}

impl TryFrom<u32> for Field {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        Field::new(p)
    }
}

impl From<Field> for u32 {
    fn from(f: Field) -> u32 {
        f.modulus()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composites() {
        assert!(Field::new(4).is_err());
        assert!(Field::new(1).is_err());
        assert!(Field::new(257).is_err());
        assert!(Field::new(251).is_ok());
    }

    #[test]
    fn inverses() {
        for p in [2u32, 3, 5, 7, 251] {
            let f = Field::new(p).unwrap();
            for a in 1..p as u8 {
                assert_eq!(f.mul(a, f.inv(a)), 1, "p={p} a={a}");
            }
        }
    }
}
