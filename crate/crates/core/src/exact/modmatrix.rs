//! 2x2 matrices over Z/N for level structures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major [[a, b], [c, d]] with entries reduced mod N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModMatrix {
    pub n: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

fn inv_mod(x: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, (x % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(n as i128) as u64)
}

impl ModMatrix {
    pub fn new(n: u64, entries: [u64; 4]) -> Self {
        assert!(n > 0);
        ModMatrix {
            n,
            a: entries[0] % n,
            b: entries[1] % n,
            c: entries[2] % n,
            d: entries[3] % n,
        }
    }

    pub fn from_signed(n: u64, entries: [i64; 4]) -> Self {
        let r = |x: i64| x.rem_euclid(n as i64) as u64;
        Self::new(n, [r(entries[0]), r(entries[1]), r(entries[2]), r(entries[3])])
    }

    pub fn identity(n: u64) -> Self {
        Self::new(n, [1, 0, 0, 1])
    }

    pub fn neg_identity(n: u64) -> Self {
        Self::from_signed(n, [-1, 0, 0, -1])
    }

    pub fn entries(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn mul(&self, o: &ModMatrix) -> Result<ModMatrix> {
        if self.n != o.n {
            return Err(Error::InvalidInput(format!(
                "modulus mismatch: {} vs {}",
                self.n, o.n
            )));
        }
        let n = self.n as u128;
        let m = |x: u128| (x % n) as u64;
        Ok(ModMatrix {
            n: self.n,
            a: m(self.a as u128 * o.a as u128 + self.b as u128 * o.c as u128),
            b: m(self.a as u128 * o.b as u128 + self.b as u128 * o.d as u128),
            c: m(self.c as u128 * o.a as u128 + self.d as u128 * o.c as u128),
            d: m(self.c as u128 * o.b as u128 + self.d as u128 * o.d as u128),
        })
    }

    pub fn det(&self) -> u64 {
        let n = self.n as u128;
        let ad = self.a as u128 * self.d as u128 % n;
        let bc = self.b as u128 * self.c as u128 % n;
        ((ad + n - bc) % n) as u64
    }

    pub fn is_invertible(&self) -> bool {
        inv_mod(self.det(), self.n).is_some()
    }

    pub fn inv(&self) -> Result<ModMatrix> {
        let di = inv_mod(self.det(), self.n)
            .ok_or_else(|| Error::InvalidInput("matrix not invertible mod N".into()))?;
        let n = self.n as u128;
        let m = |x: u128| (x * di as u128 % n) as u64;
        Ok(ModMatrix {
            n: self.n,
            a: m(self.d as u128),
            b: m((n - self.b as u128) % n),
            c: m((n - self.c as u128) % n),
            d: m(self.a as u128),
        })
    }

    pub fn pow(&self, mut k: u64) -> Result<ModMatrix> {
        let mut acc = ModMatrix::identity(self.n);
        let mut base = *self;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            k >>= 1;
        }
        Ok(acc)
    }

    /// Reduce entries modulo a divisor m of N.
    pub fn reduce(&self, m: u64) -> ModMatrix {
        assert!(m > 0 && self.n % m == 0);
        ModMatrix::new(m, self.entries())
    }

    /// Action on a row vector (x, y) mod N.
    pub fn act_row(&self, v: (u64, u64)) -> (u64, u64) {
        let n = self.n as u128;
        (
            ((v.0 as u128 * self.a as u128 + v.1 as u128 * self.c as u128) % n) as u64,
            ((v.0 as u128 * self.b as u128 + v.1 as u128 * self.d as u128) % n) as u64,
        )
    }

    /// Action on a column vector mod N.
    pub fn act_col(&self, v: (u64, u64)) -> (u64, u64) {
        let n = self.n as u128;
        (
            ((self.a as u128 * v.0 as u128 + self.b as u128 * v.1 as u128) % n) as u64,
            ((self.c as u128 * v.0 as u128 + self.d as u128 * v.1 as u128) % n) as u64,
        )
    }
}

/// See [`ModMatrix::mul`].
pub fn matmul_mod_n(a: &ModMatrix, b: &ModMatrix) -> Result<ModMatrix> {
    a.mul(b)
}
