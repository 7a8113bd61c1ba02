//! Rigorous complex ball arithmetic: an arbitrary-precision midpoint plus a
//! low-precision radius rounded outward. Every operation returns a ball
//! containing the exact image of the input balls.

use astro_float::{BigFloat, RoundingMode};
use num::rational::BigRational;
use num::{BigInt, Zero};

use super::cpx::{
    bigfloat_to_f64, bigfloat_to_rational, pow2, rational_to_bigfloat, with_consts, Cpx,
};

/// Radii carry no information beyond an order of magnitude.
const RAD_PREC: usize = 64;
const UP: RoundingMode = RoundingMode::Up;
const DOWN: RoundingMode = RoundingMode::Down;

fn rad_zero() -> BigFloat {
    BigFloat::from_i8(0, RAD_PREC)
}

/// Upper bound on the rounding error of a single correctly-rounded operation
/// that produced `x`: one ulp, i.e. 2^(exponent - precision + 1).
fn ulp_ub(x: &BigFloat) -> BigFloat {
    if x.is_zero() || x.is_nan() {
        return rad_zero();
    }
    let e = x.exponent().unwrap_or(0) as i64;
    let p = x.mantissa_max_bit_len().unwrap_or(RAD_PREC) as i64;
    pow2(e - p + 1)
}

/// |x| rounded up to radius precision.
fn abs_up(x: &BigFloat) -> BigFloat {
    let mut a = x.clone();
    a.set_sign(astro_float::Sign::Pos);
    a.add(&rad_zero(), RAD_PREC, UP)
}

#[derive(Clone, Debug)]
pub struct ComplexBall {
    pub mid: Cpx,
    pub rad: BigFloat,
}

impl ComplexBall {
    pub fn new(mid: Cpx, rad: BigFloat) -> Self {
        ComplexBall { mid, rad }
    }

    pub fn exact(mid: Cpx) -> Self {
        ComplexBall {
            mid,
            rad: rad_zero(),
        }
    }

    pub fn zero(p: usize) -> Self {
        Self::exact(Cpx::zero(p))
    }

    pub fn one(p: usize) -> Self {
        Self::exact(Cpx::from_f64(1.0, 0.0, p))
    }

    pub fn from_i64(n: i64, p: usize) -> Self {
        Self::exact(Cpx::new(
            BigFloat::from_i64(n, p),
            BigFloat::from_i8(0, p),
            p,
        ))
    }

    pub fn from_bigint(n: &BigInt, p: usize) -> Self {
        Self::from_rational(&BigRational::from(n.clone()), p)
    }

    /// Ball containing the exact rational, radius at most one ulp per part.
    pub fn from_rational(x: &BigRational, p: usize) -> Self {
        let re = rational_to_bigfloat(x, p, RoundingMode::ToEven);
        let rad = ulp_ub(&re);
        ComplexBall::new(Cpx::new(re, BigFloat::from_i8(0, p), p), rad)
    }

    pub fn from_rationals(re: &BigRational, im: &BigRational, p: usize) -> Self {
        let mid = Cpx::from_rationals(re, im, p);
        let rad = ulp_ub(&mid.re).add(&ulp_ub(&mid.im), RAD_PREC, UP);
        ComplexBall::new(mid, rad)
    }

    pub fn prec(&self) -> usize {
        self.mid.p
    }

    fn slack(mid: &Cpx, ops_per_part: i64) -> BigFloat {
        let s = ulp_ub(&mid.re).add(&ulp_ub(&mid.im), RAD_PREC, UP);
        s.mul(&BigFloat::from_i64(ops_per_part, RAD_PREC), RAD_PREC, UP)
    }

    pub fn add(&self, o: &ComplexBall) -> ComplexBall {
        let mid = self.mid.add(&o.mid);
        let rad = self
            .rad
            .add(&o.rad, RAD_PREC, UP)
            .add(&Self::slack(&mid, 1), RAD_PREC, UP);
        ComplexBall::new(mid, rad)
    }

    pub fn sub(&self, o: &ComplexBall) -> ComplexBall {
        let mid = self.mid.sub(&o.mid);
        let rad = self
            .rad
            .add(&o.rad, RAD_PREC, UP)
            .add(&Self::slack(&mid, 1), RAD_PREC, UP);
        ComplexBall::new(mid, rad)
    }

    pub fn neg(&self) -> ComplexBall {
        ComplexBall::new(self.mid.neg(), self.rad.clone())
    }

    /// Upper bound on |mid| at radius precision.
    pub fn mid_abs_ub(&self) -> BigFloat {
        let r = abs_up(&self.mid.re);
        let i = abs_up(&self.mid.im);
        let s = r.mul(&r, RAD_PREC, UP).add(&i.mul(&i, RAD_PREC, UP), RAD_PREC, UP);
        let sq = s.sqrt(RAD_PREC, UP);
        sq.add(&ulp_ub(&sq), RAD_PREC, UP)
    }

    /// Lower bound on |mid| at radius precision (may be 0).
    pub fn mid_abs_lb(&self) -> BigFloat {
        let r = abs_up(&self.mid.re);
        let i = abs_up(&self.mid.im);
        let s = r
            .mul(&r, RAD_PREC, DOWN)
            .add(&i.mul(&i, RAD_PREC, DOWN), RAD_PREC, DOWN);
        let sq = s.sqrt(RAD_PREC, DOWN);
        let lb = sq.sub(&ulp_ub(&sq), RAD_PREC, DOWN);
        if lb.is_negative() {
            rad_zero()
        } else {
            lb
        }
    }

    /// Upper bound on |z| over the whole ball.
    pub fn abs_ub(&self) -> BigFloat {
        self.mid_abs_ub().add(&self.rad, RAD_PREC, UP)
    }

    /// Lower bound on |z| over the whole ball (0 when the ball meets 0).
    pub fn abs_lb(&self) -> BigFloat {
        let lb = self.mid_abs_lb().sub(&self.rad, RAD_PREC, DOWN);
        if lb.is_negative() {
            rad_zero()
        } else {
            lb
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.mid_abs_lb().cmp(&self.rad) != Some(1)
    }

    pub fn mul(&self, o: &ComplexBall) -> ComplexBall {
        let mid = self.mid.mul(&o.mid);
        // |z w - m1 m2| <= |m1| r2 + |m2| r1 + r1 r2
        let a1 = self.mid_abs_ub();
        let a2 = o.mid_abs_ub();
        let t1 = a1.mul(&o.rad, RAD_PREC, UP);
        let t2 = a2.mul(&self.rad, RAD_PREC, UP);
        let t3 = self.rad.mul(&o.rad, RAD_PREC, UP);
        let rad = t1
            .add(&t2, RAD_PREC, UP)
            .add(&t3, RAD_PREC, UP)
            .add(&Self::slack(&mid, 3), RAD_PREC, UP);
        ComplexBall::new(mid, rad)
    }

    pub fn scale_pow2(&self, k: i64) -> ComplexBall {
        let f = pow2(k);
        let mid = Cpx::new(
            self.mid.re.mul(&f, self.mid.p, RoundingMode::ToEven),
            self.mid.im.mul(&f, self.mid.p, RoundingMode::ToEven),
            self.mid.p,
        );
        ComplexBall::new(mid, self.rad.mul(&f, RAD_PREC, UP))
    }

    /// 1/z. Fails when the ball contains 0.
    pub fn inv(&self) -> crate::error::Result<ComplexBall> {
        let lb = self.abs_lb();
        if lb.is_zero() {
            return Err(crate::error::Error::precision(
                "ball inversion: enclosure contains 0",
            ));
        }
        let mid = self.mid.inv();
        // |1/z - 1/m| = |z-m| / (|z||m|) <= r / (lb_all * lb_mid)
        let den = lb.mul(&self.mid_abs_lb(), RAD_PREC, DOWN);
        let rad = self
            .rad
            .div(&den, RAD_PREC, UP)
            .add(&Self::slack(&mid, 6), RAD_PREC, UP);
        Ok(ComplexBall::new(mid, rad))
    }

    pub fn div(&self, o: &ComplexBall) -> crate::error::Result<ComplexBall> {
        Ok(self.mul(&o.inv()?))
    }

    /// exp(z); rad bound |e^m| e^r (e^r - 1) <= |e^m| r e^{2r} for r >= 0.
    pub fn exp(&self) -> ComplexBall {
        let mid = self.mid.exp();
        let exp_mid = ComplexBall::exact(mid.clone()).mid_abs_ub();
        let two_r = self.rad.mul(&BigFloat::from_i8(2, RAD_PREC), RAD_PREC, UP);
        let e2r = with_consts(|cc| two_r.exp(RAD_PREC, UP, cc));
        let rad = exp_mid
            .mul(&self.rad, RAD_PREC, UP)
            .mul(&e2r, RAD_PREC, UP)
            .add(&Self::slack(&mid, 4), RAD_PREC, UP);
        ComplexBall::new(mid, rad)
    }

    /// Ball containing exp(2 pi i k / n); used for roots of unity.
    pub fn root_of_unity(k: i64, n: i64, p: usize) -> ComplexBall {
        assert!(n > 0);
        let rm = RoundingMode::ToEven;
        let two_pi = super::cpx::pi(p).mul(&pow2(1), p, rm);
        let kf = BigFloat::from_i64(k, p);
        let theta = two_pi.mul(&kf, p, rm).div(&BigFloat::from_i64(n, p), p, rm);
        let mid = with_consts(|cc| {
            Cpx::new(theta.cos(p, rm, cc), theta.sin(p, rm, cc), p)
        });
        // theta carries ~3 ulps of error; |d e^{i t}/dt| = 1 transfers it 1:1
        let rad = Self::slack(&mid, 2).add(
            &ulp_ub(&theta).mul(&BigFloat::from_i8(4, RAD_PREC), RAD_PREC, UP),
            RAD_PREC,
            UP,
        );
        ComplexBall::new(mid, rad)
    }

    /// z^k by binary powering (k >= 0).
    pub fn pow_u64(&self, k: u64) -> ComplexBall {
        let mut acc = ComplexBall::one(self.prec());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Grow the radius by `r` (used for tail bounds).
    pub fn inflate(&self, r: &BigFloat) -> ComplexBall {
        ComplexBall::new(self.mid.clone(), self.rad.add(r, RAD_PREC, UP))
    }

    /// Exact containment test for a rational point.
    pub fn contains_point(&self, re: &BigRational, im: &BigRational) -> bool {
        let dr = re - bigfloat_to_rational(&self.mid.re);
        let di = im - bigfloat_to_rational(&self.mid.im);
        let r = bigfloat_to_rational(&self.rad);
        &dr * &dr + &di * &di <= &r * &r
    }

    pub fn contains_rational(&self, x: &BigRational) -> bool {
        self.contains_point(x, &BigRational::zero())
    }

    /// Do two balls overlap?
    pub fn intersects(&self, o: &ComplexBall) -> bool {
        let d = self.sub(o);
        d.contains_zero()
    }

    pub fn rad_f64(&self) -> f64 {
        bigfloat_to_f64(&self.rad)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        self.mid.to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::big_rational;

    fn br(n: i64, d: i64) -> BigRational {
        big_rational(n, d)
    }

    #[test]
    fn rational_round_trip_containment() {
        let x = br(22, 7);
        let b = ComplexBall::from_rational(&x, 128);
        assert!(b.contains_rational(&x));
        assert!(!b.contains_rational(&br(22, 6)));
    }

    #[test]
    fn arithmetic_contains_exact_values() {
        let p = 96;
        let (x, y) = (br(355, 113), br(-7, 3));
        let bx = ComplexBall::from_rational(&x, p);
        let by = ComplexBall::from_rational(&y, p);
        assert!(bx.add(&by).contains_rational(&(&x + &y)));
        assert!(bx.sub(&by).contains_rational(&(&x - &y)));
        assert!(bx.mul(&by).contains_rational(&(&x * &y)));
        assert!(bx.div(&by).unwrap().contains_rational(&(&x / &y)));
    }

    #[test]
    fn composite_expression_containment() {
        // (x*y + x)^3 / y, exercised as a chain of ball ops
        let p = 128;
        let (x, y) = (br(13, 11), br(-5, 9));
        let bx = ComplexBall::from_rational(&x, p);
        let by = ComplexBall::from_rational(&y, p);
        let t = bx.mul(&by).add(&bx);
        let ball = t.mul(&t).mul(&t).div(&by).unwrap();
        let e = &x * &y + &x;
        let exact = &e * &e * &e / &y;
        assert!(ball.contains_rational(&exact));
    }

    #[test]
    fn inversion_rejects_zero_ball() {
        let b = ComplexBall::new(Cpx::zero(64), pow2(-10));
        assert!(b.inv().is_err());
    }

    #[test]
    fn root_of_unity_power_is_one() {
        let z = ComplexBall::root_of_unity(1, 7, 256);
        let w = z.pow_u64(7);
        assert!(w.contains_rational(&br(1, 1)));
        assert!(!w.contains_rational(&br(0, 1)));
    }

    #[test]
    fn exp_of_zero_ball_contains_one() {
        let b = ComplexBall::new(Cpx::zero(128), pow2(-40));
        let e = b.exp();
        assert!(e.contains_rational(&br(1, 1)));
    }
}
