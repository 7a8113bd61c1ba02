//! Midpoint-only arbitrary-precision complex arithmetic on top of
//! `astro_float::BigFloat`, plus conversions between BigFloat, BigInt and
//! BigRational. Used where only approximations are needed (root finding,
//! AGM periods); rigorous enclosures live in [`super::ball`].

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num::rational::BigRational;
use num::{BigInt, One, Zero};
use std::cell::RefCell;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Run `f` with the thread-local constants cache of astro-float.
pub fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

const RM: RoundingMode = RoundingMode::ToEven;

pub fn pi(p: usize) -> BigFloat {
    with_consts(|cc| cc.pi(p, RM))
}

/// 2^k as a BigFloat (exact).
pub fn pow2(k: i64) -> BigFloat {
    let mut x = BigFloat::from_word(1, 64);
    x.set_exponent((k + 1) as astro_float::Exponent);
    x
}

/// Exact conversion of a BigInt into a BigFloat (no rounding).
pub fn bigint_to_bigfloat(n: &BigInt) -> BigFloat {
    if n.is_zero() {
        return BigFloat::from_i8(0, 64);
    }
    let (sign, mag) = (n.sign(), n.magnitude());
    let digits = mag.to_u32_digits(); // little endian, leading digit nonzero
    let base = pow2(32);
    let mut it = digits.iter().rev();
    // full-precision ops misbehave on zero operands, so seed with the
    // (nonzero) leading digit and skip zero digits in the fold
    let mut acc = BigFloat::from_u32(*it.next().unwrap(), 64);
    for d in it {
        acc = acc.mul_full_prec(&base);
        if *d != 0 {
            acc = acc.add_full_prec(&BigFloat::from_u32(*d, 64));
        }
    }
    if sign == num::bigint::Sign::Minus {
        acc = acc.neg();
    }
    acc
}

/// Round a rational to a BigFloat with precision `p` (error <= 1 ulp).
pub fn rational_to_bigfloat(x: &BigRational, p: usize, rm: RoundingMode) -> BigFloat {
    let n = bigint_to_bigfloat(x.numer());
    let d = bigint_to_bigfloat(x.denom());
    n.div(&d, p, rm)
}

/// Exact conversion of a finite BigFloat into a BigRational.
pub fn bigfloat_to_rational(x: &BigFloat) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let (words, n, sign, e, _) = x.as_raw_parts().expect("finite number");
    let mut m = BigInt::zero();
    for w in words.iter().rev() {
        m = (m << 64) + BigInt::from(*w);
    }
    if sign == Sign::Neg {
        m = -m;
    }
    let shift = e as i64 - n as i64;
    let num = BigRational::from(m);
    if shift >= 0 {
        num * BigRational::from(BigInt::one() << shift as usize)
    } else {
        num / BigRational::from(BigInt::one() << (-shift) as usize)
    }
}

/// Nearest integer to a finite BigFloat.
pub fn bigfloat_round_to_bigint(x: &BigFloat) -> BigInt {
    let r = bigfloat_to_rational(x);
    r.round().to_integer()
}

/// Approximate complex number: a midpoint pair without radius tracking.
#[derive(Clone, Debug)]
pub struct Cpx {
    pub re: BigFloat,
    pub im: BigFloat,
    pub p: usize,
}

impl Cpx {
    pub fn new(re: BigFloat, im: BigFloat, p: usize) -> Self {
        Cpx { re, im, p }
    }

    pub fn zero(p: usize) -> Self {
        Cpx::new(BigFloat::from_i8(0, p), BigFloat::from_i8(0, p), p)
    }

    pub fn from_f64(re: f64, im: f64, p: usize) -> Self {
        Cpx::new(BigFloat::from_f64(re, p), BigFloat::from_f64(im, p), p)
    }

    pub fn from_rationals(re: &BigRational, im: &BigRational, p: usize) -> Self {
        Cpx::new(
            rational_to_bigfloat(re, p, RM),
            rational_to_bigfloat(im, p, RM),
            p,
        )
    }

    pub fn add(&self, o: &Cpx) -> Cpx {
        let p = self.p.min(o.p);
        Cpx::new(self.re.add(&o.re, p, RM), self.im.add(&o.im, p, RM), p)
    }

    pub fn sub(&self, o: &Cpx) -> Cpx {
        let p = self.p.min(o.p);
        Cpx::new(self.re.sub(&o.re, p, RM), self.im.sub(&o.im, p, RM), p)
    }

    pub fn neg(&self) -> Cpx {
        Cpx::new(self.re.neg(), self.im.neg(), self.p)
    }

    pub fn mul(&self, o: &Cpx) -> Cpx {
        let p = self.p.min(o.p);
        let ac = self.re.mul(&o.re, p, RM);
        let bd = self.im.mul(&o.im, p, RM);
        let ad = self.re.mul(&o.im, p, RM);
        let bc = self.im.mul(&o.re, p, RM);
        Cpx::new(ac.sub(&bd, p, RM), ad.add(&bc, p, RM), p)
    }

    pub fn scale(&self, s: &BigFloat) -> Cpx {
        let p = self.p;
        Cpx::new(self.re.mul(s, p, RM), self.im.mul(s, p, RM), p)
    }

    pub fn div(&self, o: &Cpx) -> Cpx {
        let p = self.p.min(o.p);
        let n2 = o.abs_sq();
        let conj = Cpx::new(o.re.clone(), o.im.neg(), p);
        let num = self.mul(&conj);
        Cpx::new(num.re.div(&n2, p, RM), num.im.div(&n2, p, RM), p)
    }

    pub fn inv(&self) -> Cpx {
        Cpx::from_f64(1.0, 0.0, self.p).div(self)
    }

    pub fn abs_sq(&self) -> BigFloat {
        let p = self.p;
        let r2 = self.re.mul(&self.re, p, RM);
        let i2 = self.im.mul(&self.im, p, RM);
        r2.add(&i2, p, RM)
    }

    pub fn abs(&self) -> BigFloat {
        self.abs_sq().sqrt(self.p, RM)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Cpx {
        let p = self.p;
        let r = self.abs();
        // gamma = sqrt((r + re)/2), delta = sign(im) * sqrt((r - re)/2)
        let half = pow2(-1);
        let gs = r.add(&self.re, p, RM).mul(&half, p, RM);
        let ds = r.sub(&self.re, p, RM).mul(&half, p, RM);
        let gs = if gs.is_negative() { BigFloat::from_i8(0, p) } else { gs };
        let ds = if ds.is_negative() { BigFloat::from_i8(0, p) } else { ds };
        let g = gs.sqrt(p, RM);
        let mut d = ds.sqrt(p, RM);
        if self.im.is_negative() {
            d = d.neg();
        }
        Cpx::new(g, d, p)
    }

    /// exp(self) via e^re * (cos im + i sin im).
    pub fn exp(&self) -> Cpx {
        let p = self.p;
        with_consts(|cc| {
            let m = self.re.exp(p, RM, cc);
            let c = self.im.cos(p, RM, cc);
            let s = self.im.sin(p, RM, cc);
            Cpx::new(m.mul(&c, p, RM), m.mul(&s, p, RM), p)
        })
    }

    pub fn is_nan(&self) -> bool {
        self.re.is_nan() || self.im.is_nan()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (bigfloat_to_f64(&self.re), bigfloat_to_f64(&self.im))
    }
}

pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (words, n, sign, e, _) = match x.as_raw_parts() {
        Some(p) => p,
        None => return f64::NAN,
    };
    let top = *words.last().unwrap() as f64; // most significant word
    let scale = 2f64.powi(e as i32 - (n.min(64)) as i32);
    let mag = if words.len() > 1 && n > 64 {
        // include the second word for full f64 accuracy
        let second = words[words.len() - 2] as f64;
        (top + second / 2f64.powi(64)) * scale
    } else {
        top * scale
    };
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::FromPrimitive;

    #[test]
    fn bigfloat_rational_round_trip() {
        let x = BigFloat::from_f64(0.75, 64);
        assert_eq!(bigfloat_to_rational(&x), BigRational::from_f64(0.75).unwrap());
        let y = BigFloat::from_f64(-10.5, 64);
        assert_eq!(bigfloat_to_rational(&y), BigRational::from_f64(-10.5).unwrap());
    }

    #[test]
    fn bigint_conversion_exact() {
        let n = BigInt::parse_bytes(b"123456789012345678901234567890", 10).unwrap();
        let f = bigint_to_bigfloat(&n);
        assert_eq!(bigfloat_to_rational(&f), BigRational::from(n));
    }

    #[test]
    fn complex_sqrt_squares_back() {
        let z = Cpx::from_f64(-3.0, 4.0, 256);
        let s = z.sqrt();
        let back = s.mul(&s);
        let (re, im) = back.to_f64();
        assert!((re + 3.0).abs() < 1e-12 && (im - 4.0).abs() < 1e-12);
    }

    #[test]
    fn complex_exp_of_2pi_i() {
        let p = 256;
        let two_pi = pi(p).mul(&pow2(1), p, RoundingMode::ToEven);
        let z = Cpx::new(BigFloat::from_i8(0, p), two_pi, p);
        let e = z.exp();
        let (re, im) = e.to_f64();
        assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
    }

    #[test]
    fn rounding_to_integer() {
        let x = BigFloat::from_f64(2.4999, 128);
        assert_eq!(bigfloat_round_to_bigint(&x), BigInt::from(2));
        let y = BigFloat::from_f64(-7.6, 128);
        assert_eq!(bigfloat_round_to_bigint(&y), BigInt::from(-8));
    }
}
