//! Capped-precision elements of totally ramified extensions Q_p(pi) with
//! pi^e = p, normalized so that v(p) = 1. Coordinates are rationals in the
//! basis 1, pi, ..., pi^(e-1); only valuations are trusted downstream, so the
//! precision model is absolute precision with pessimistic propagation.

use num::rational::BigRational;
use num::{BigInt, Integer, One, ToPrimitive, Zero};

use super::rat::{int_pow, val_p_int};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct PadicElement {
    pub p: u64,
    /// Ramification index; pi^e = p.
    pub e: u64,
    /// Coordinates in the basis pi^0 .. pi^(e-1).
    pub coeffs: Vec<BigRational>,
    /// Absolute precision: the element is known modulo v >= prec.
    pub prec: BigRational,
}

fn rational_ceil(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

/// Inverse of a mod p^k for a prime to p.
fn mod_inverse(a: &BigInt, modulus: &BigInt) -> BigInt {
    let a = a.mod_floor(modulus);
    let e = a.extended_gcd(modulus);
    assert!(e.gcd.is_one(), "non-unit in modular inverse");
    e.x.mod_floor(modulus)
}

impl PadicElement {
    pub fn new(p: u64, e: u64, coeffs: Vec<BigRational>, prec: BigRational) -> Self {
        assert_eq!(coeffs.len(), e as usize);
        let mut x = PadicElement { p, e, coeffs, prec };
        x.normalize();
        x
    }

    pub fn zero(p: u64, e: u64, prec: BigRational) -> Self {
        PadicElement {
            p,
            e,
            coeffs: vec![BigRational::zero(); e as usize],
            prec,
        }
    }

    pub fn from_rational(p: u64, e: u64, x: &BigRational, prec: BigRational) -> Self {
        let mut coeffs = vec![BigRational::zero(); e as usize];
        coeffs[0] = x.clone();
        Self::new(p, e, coeffs, prec)
    }

    pub fn one(p: u64, e: u64, prec: BigRational) -> Self {
        Self::from_rational(p, e, &BigRational::one(), prec)
    }

    pub fn uniformizer(p: u64, e: u64, prec: BigRational) -> Self {
        let mut coeffs = vec![BigRational::zero(); e as usize];
        if e == 1 {
            coeffs[0] = BigRational::from(BigInt::from(p));
        } else {
            coeffs[1] = BigRational::one();
        }
        Self::new(p, e, coeffs, prec)
    }

    fn same_field(&self, o: &PadicElement) {
        assert!(self.p == o.p && self.e == o.e, "p-adic field mismatch");
    }

    /// Reduce each coordinate modulo the power of p it is known to, dropping
    /// parts below the stored precision. Keeps representatives small.
    pub fn normalize(&mut self) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            // coordinate i sits at valuation offset i/e; known mod p^(prec - i/e)
            let mi = &self.prec - BigRational::new(BigInt::from(i as u64), BigInt::from(self.e));
            let mi = rational_ceil(&mi);
            if c.is_zero() {
                continue;
            }
            let a = val_p_int(c.denom(), self.p);
            let modexp = mi + a;
            if modexp.sign() != num::bigint::Sign::Plus {
                *c = BigRational::zero();
                continue;
            }
            let modexp = modexp.to_u64().expect("precision exponent fits in u64");
            let modulus = int_pow(self.p, modexp);
            let denp = int_pow(self.p, a as u64);
            let den_unit = c.denom() / &denp;
            let num_red =
                (c.numer() * mod_inverse(&den_unit, &modulus)).mod_floor(&modulus);
            *c = BigRational::new(num_red, denp);
        }
    }

    /// Exact valuation of the stored representative, before the precision cap.
    fn raw_val(&self) -> Option<BigRational> {
        let mut best: Option<BigRational> = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = BigRational::from(BigInt::from(super::rat::val_p(c, self.p)))
                + BigRational::new(BigInt::from(i as u64), BigInt::from(self.e));
            best = Some(match best {
                Some(b) if b <= v => b,
                _ => v,
            });
        }
        best
    }

    /// v(x) as an exact rational with denominator dividing e.
    pub fn val(&self) -> Result<BigRational> {
        match self.raw_val() {
            Some(v) if v < self.prec => Ok(v),
            _ => Err(Error::UndecidableValuation),
        }
    }

    /// Sound lower bound on the valuation (min of raw valuation and prec).
    pub fn val_lower_bound(&self) -> BigRational {
        match self.raw_val() {
            Some(v) if v < self.prec => v,
            _ => self.prec.clone(),
        }
    }

    pub fn is_indistinguishable_from_zero(&self) -> bool {
        self.val().is_err()
    }

    pub fn add(&self, o: &PadicElement) -> PadicElement {
        self.same_field(o);
        let prec = self.prec.clone().min(o.prec.clone());
        let coeffs = self
            .coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        PadicElement::new(self.p, self.e, coeffs, prec)
    }

    pub fn sub(&self, o: &PadicElement) -> PadicElement {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> PadicElement {
        PadicElement {
            p: self.p,
            e: self.e,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec.clone(),
        }
    }

    pub fn mul(&self, o: &PadicElement) -> PadicElement {
        self.same_field(o);
        let e = self.e as usize;
        let mut out = vec![BigRational::zero(); e];
        let p = BigRational::from(BigInt::from(self.p));
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let t = a * b;
                let k = i + j;
                if k < e {
                    out[k] += t;
                } else {
                    out[k - e] += t * &p;
                }
            }
        }
        // prec(xy) = min(v(x)+prec(y), v(y)+prec(x))
        let vx = self.val_lower_bound();
        let vy = o.val_lower_bound();
        let prec = (vx + &o.prec).min(vy + &self.prec);
        PadicElement::new(self.p, self.e, out, prec)
    }

    /// Multiply by an exact rational scalar (precision shifts by its valuation).
    pub fn scale(&self, s: &BigRational) -> PadicElement {
        if s.is_zero() {
            return PadicElement::zero(self.p, self.e, self.prec.clone());
        }
        let vs = BigRational::from(BigInt::from(super::rat::val_p(s, self.p)));
        PadicElement::new(
            self.p,
            self.e,
            self.coeffs.iter().map(|c| c * s).collect(),
            &self.prec + vs,
        )
    }

    pub fn pow(&self, mut k: u64) -> PadicElement {
        let mut acc = PadicElement::one(self.p, self.e, self.prec.clone());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Inverse. The representative is an element of the rational algebra
    /// Q[pi]/(pi^e - p), so its inverse is an exact linear solve; only the
    /// precision bookkeeping is p-adic: prec(1/x) = prec(x) - 2 v(x).
    pub fn inv(&self) -> Result<PadicElement> {
        let v = self.val()?;
        let e = self.e as usize;
        let p = BigRational::from(BigInt::from(self.p));
        let m = super::linalg::QMat::from_fn(e, e, |i, j| {
            // coefficient of pi^i in x * pi^j, with pi^e = p carry
            if i >= j {
                self.coeffs[i - j].clone()
            } else {
                &self.coeffs[e + i - j] * &p
            }
        });
        let mut rhs = vec![BigRational::zero(); e];
        rhs[0] = BigRational::one();
        let y = m
            .solve(&rhs)
            .ok_or_else(|| Error::Internal("representative not invertible".into()))?;
        let prec = &self.prec - &v - &v;
        Ok(PadicElement::new(self.p, self.e, y, prec))
    }

    pub fn div(&self, o: &PadicElement) -> Result<PadicElement> {
        Ok(self.mul(&o.inv()?))
    }
}
