//! Truncated univariate power series over a pluggable coefficient ring.
//! The same engine runs in exact rational mode (test oracles), ball mode
//! (production evaluation), number-field mode and p-adic mode.

use num::rational::BigRational;
use num::{BigInt, Zero};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact::ball::ComplexBall;
use crate::exact::nf::{NfElt, NumberField};
use crate::exact::padic::PadicElement;

/// Coefficient ring abstraction. Contexts are cheap to clone and carry
/// whatever ambient data elements need (precision, field, prime).
pub trait RingCtx: Clone {
    type Elem: Clone + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    /// Exactly true only when the element is provably zero; rings with
    /// approximation may return false for tiny elements.
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn mul_i64(&self, a: &Self::Elem, n: i64) -> Self::Elem {
        self.mul(a, &self.from_i64(n))
    }
    fn div_i64(&self, a: &Self::Elem, n: i64) -> Result<Self::Elem> {
        Ok(self.mul(a, &self.inv(&self.from_i64(n))?))
    }
}

/// Exact rationals.
#[derive(Clone, Debug, Default)]
pub struct QCtx;

impl RingCtx for QCtx {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::from(BigInt::from(1))
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Result<BigRational> {
        if a.is_zero() {
            return Err(Error::InvalidInput("division by zero".into()));
        }
        Ok(a.recip())
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
}

/// Complex balls at a fixed working precision.
#[derive(Clone, Debug)]
pub struct BallCtx {
    pub prec: usize,
}

impl RingCtx for BallCtx {
    type Elem = ComplexBall;

    fn zero(&self) -> ComplexBall {
        ComplexBall::zero(self.prec)
    }
    fn one(&self) -> ComplexBall {
        ComplexBall::one(self.prec)
    }
    fn from_i64(&self, n: i64) -> ComplexBall {
        ComplexBall::from_i64(n, self.prec)
    }
    fn add(&self, a: &ComplexBall, b: &ComplexBall) -> ComplexBall {
        a.add(b)
    }
    fn sub(&self, a: &ComplexBall, b: &ComplexBall) -> ComplexBall {
        a.sub(b)
    }
    fn neg(&self, a: &ComplexBall) -> ComplexBall {
        a.neg()
    }
    fn mul(&self, a: &ComplexBall, b: &ComplexBall) -> ComplexBall {
        a.mul(b)
    }
    fn inv(&self, a: &ComplexBall) -> Result<ComplexBall> {
        a.inv()
    }
    fn is_zero(&self, a: &ComplexBall) -> bool {
        // only a literal zero ball is provably zero
        a.mid.re.is_zero() && a.mid.im.is_zero() && a.rad.is_zero()
    }
}

/// A fixed number field.
#[derive(Clone, Debug)]
pub struct NfCtx {
    pub field: Arc<NumberField>,
}

impl RingCtx for NfCtx {
    type Elem = NfElt;

    fn zero(&self) -> NfElt {
        NfElt::zero(self.field.clone())
    }
    fn one(&self) -> NfElt {
        NfElt::one(self.field.clone())
    }
    fn from_i64(&self, n: i64) -> NfElt {
        NfElt::from_rational(self.field.clone(), BigRational::from(BigInt::from(n)))
    }
    fn add(&self, a: &NfElt, b: &NfElt) -> NfElt {
        a.add(b)
    }
    fn sub(&self, a: &NfElt, b: &NfElt) -> NfElt {
        a.sub(b)
    }
    fn neg(&self, a: &NfElt) -> NfElt {
        a.neg()
    }
    fn mul(&self, a: &NfElt, b: &NfElt) -> NfElt {
        a.mul(b)
    }
    fn inv(&self, a: &NfElt) -> Result<NfElt> {
        a.inv()
    }
    fn is_zero(&self, a: &NfElt) -> bool {
        a.is_zero()
    }
}

/// A fixed p-adic field at a fixed starting precision.
#[derive(Clone, Debug)]
pub struct PadicCtx {
    pub p: u64,
    pub e: u64,
    pub prec: BigRational,
}

impl RingCtx for PadicCtx {
    type Elem = PadicElement;

    fn zero(&self) -> PadicElement {
        PadicElement::zero(self.p, self.e, self.prec.clone())
    }
    fn one(&self) -> PadicElement {
        PadicElement::one(self.p, self.e, self.prec.clone())
    }
    fn from_i64(&self, n: i64) -> PadicElement {
        PadicElement::from_rational(
            self.p,
            self.e,
            &BigRational::from(BigInt::from(n)),
            self.prec.clone(),
        )
    }
    fn add(&self, a: &PadicElement, b: &PadicElement) -> PadicElement {
        a.add(b)
    }
    fn sub(&self, a: &PadicElement, b: &PadicElement) -> PadicElement {
        a.sub(b)
    }
    fn neg(&self, a: &PadicElement) -> PadicElement {
        a.neg()
    }
    fn mul(&self, a: &PadicElement, b: &PadicElement) -> PadicElement {
        a.mul(b)
    }
    fn inv(&self, a: &PadicElement) -> Result<PadicElement> {
        a.inv()
    }
    fn is_zero(&self, a: &PadicElement) -> bool {
        a.coeffs.iter().all(|c| c.is_zero())
    }
    fn div_i64(&self, a: &PadicElement, n: i64) -> Result<PadicElement> {
        if n == 0 {
            return Err(Error::InvalidInput("division by zero".into()));
        }
        Ok(a.scale(&BigRational::new(BigInt::from(1), BigInt::from(n))))
    }
    fn mul_i64(&self, a: &PadicElement, n: i64) -> PadicElement {
        a.scale(&BigRational::from(BigInt::from(n)))
    }
}

/// Truncated series sum coeffs[k] q^(offset + k); prec = number of known
/// coefficients. Operations truncate to the minimum knowledge of operands.
#[derive(Clone, Debug)]
pub struct Series<R: RingCtx> {
    pub ctx: R,
    pub offset: i64,
    pub coeffs: Vec<R::Elem>,
}

impl<R: RingCtx> Series<R> {
    pub fn new(ctx: R, offset: i64, coeffs: Vec<R::Elem>) -> Self {
        Series { ctx, offset, coeffs }
    }

    pub fn zero(ctx: R, prec: usize) -> Self {
        let coeffs = (0..prec).map(|_| ctx.zero()).collect();
        Series { ctx, offset: 0, coeffs }
    }

    /// c * q^k, known to `prec` coefficients.
    pub fn monomial(ctx: R, c: R::Elem, k: i64, prec: usize) -> Self {
        let mut coeffs: Vec<R::Elem> = (0..prec).map(|_| ctx.zero()).collect();
        if !coeffs.is_empty() {
            coeffs[0] = c;
        }
        Series { ctx, offset: k, coeffs }
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    /// Highest exponent known exclusive: coefficients of q^k are known for
    /// offset <= k < bound.
    pub fn bound(&self) -> i64 {
        self.offset + self.coeffs.len() as i64
    }

    /// Coefficient of q^k (zero below the offset, panics at or above bound).
    pub fn get(&self, k: i64) -> R::Elem {
        assert!(k < self.bound(), "coefficient beyond known precision");
        if k < self.offset {
            self.ctx.zero()
        } else {
            self.coeffs[(k - self.offset) as usize].clone()
        }
    }

    /// Re-anchor so the offset is exactly `off` (pad or drop low zeros).
    fn realign(&self, off: i64, bound: i64) -> Vec<R::Elem> {
        (off..bound).map(|k| self.get(k)).collect()
    }

    pub fn add(&self, o: &Series<R>) -> Series<R> {
        let off = self.offset.min(o.offset);
        let bound = self.bound().min(o.bound());
        let a = self.realign(off, bound);
        let b = o.realign(off, bound);
        let coeffs = a
            .iter()
            .zip(&b)
            .map(|(x, y)| self.ctx.add(x, y))
            .collect();
        Series::new(self.ctx.clone(), off, coeffs)
    }

    pub fn sub(&self, o: &Series<R>) -> Series<R> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Series<R> {
        Series::new(
            self.ctx.clone(),
            self.offset,
            self.coeffs.iter().map(|c| self.ctx.neg(c)).collect(),
        )
    }

    pub fn scale(&self, s: &R::Elem) -> Series<R> {
        Series::new(
            self.ctx.clone(),
            self.offset,
            self.coeffs.iter().map(|c| self.ctx.mul(c, s)).collect(),
        )
    }

    /// Multiply by q^k.
    pub fn shift(&self, k: i64) -> Series<R> {
        Series::new(self.ctx.clone(), self.offset + k, self.coeffs.clone())
    }

    pub fn truncate_bound(&self, bound: i64) -> Series<R> {
        let keep = (bound - self.offset).clamp(0, self.coeffs.len() as i64) as usize;
        Series::new(self.ctx.clone(), self.offset, self.coeffs[..keep].to_vec())
    }

    pub fn mul(&self, o: &Series<R>) -> Series<R> {
        // lowest unknown exponent of the product
        let bound = (self.bound() + o.offset).min(o.bound() + self.offset);
        let off = self.offset + o.offset;
        let n = (bound - off).max(0) as usize;
        let mut out: Vec<R::Elem> = (0..n).map(|_| self.ctx.zero()).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if self.ctx.is_zero(a) {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if self.ctx.is_zero(b) {
                    continue;
                }
                let t = self.ctx.mul(a, b);
                out[i + j] = self.ctx.add(&out[i + j], &t);
            }
        }
        Series::new(self.ctx.clone(), off, out)
    }

    /// Formal derivative d/dq.
    pub fn derivative(&self) -> Series<R> {
        let coeffs: Vec<R::Elem> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| self.ctx.mul_i64(c, self.offset + k as i64))
            .collect();
        // term at exponent `offset` maps to exponent offset-1 (possibly 0 coeff)
        Series::new(self.ctx.clone(), self.offset - 1, coeffs)
    }

    /// Multiplicative inverse; the lowest-order coefficient must be a unit.
    pub fn inverse(&self) -> Result<Series<R>> {
        if self.coeffs.is_empty() {
            return Err(Error::precision("inverting an empty series"));
        }
        let lead = &self.coeffs[0];
        if self.ctx.is_zero(lead) {
            return Err(Error::InvalidInput(
                "series inverse requires an invertible leading coefficient; normalize the offset first"
                    .into(),
            ));
        }
        let li = self.ctx.inv(lead)?;
        let n = self.coeffs.len();
        let mut out: Vec<R::Elem> = Vec::with_capacity(n);
        out.push(li.clone());
        for k in 1..n {
            // sum_{i=1..k} a_i * b_{k-i} = -a_0 b_k
            let mut s = self.ctx.zero();
            for i in 1..=k {
                let t = self.ctx.mul(&self.coeffs[i], &out[k - i]);
                s = self.ctx.add(&s, &t);
            }
            out.push(self.ctx.neg(&self.ctx.mul(&s, &li)));
        }
        Ok(Series::new(self.ctx.clone(), -self.offset, out))
    }

    /// self^k truncated to exponents < `bound`.
    pub fn pow_u64(&self, mut k: u64, bound: i64) -> Series<R> {
        let n = bound.max(1) as usize;
        let mut acc =
            Series::monomial(self.ctx.clone(), self.ctx.one(), 0, n).truncate_bound(bound);
        let mut base = self.truncate_bound(bound);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).truncate_bound(bound);
            }
            base = base.mul(&base).truncate_bound(bound);
            k >>= 1;
        }
        acc
    }

    /// Substitute `inner` (offset >= 1) into self (offset >= 0), by Horner.
    pub fn compose(&self, inner: &Series<R>) -> Result<Series<R>> {
        if self.offset < 0 {
            return Err(Error::InvalidInput("composition into a Laurent tail".into()));
        }
        if inner.offset < 1 {
            return Err(Error::InvalidInput(
                "inner series of a composition must vanish at 0".into(),
            ));
        }
        let bound = inner.bound();
        let n = bound.max(1) as usize;
        let mut acc = Series::zero(self.ctx.clone(), n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).truncate_bound(bound);
            acc = acc.add(&Series::monomial(self.ctx.clone(), c.clone(), 0, n));
        }
        if self.offset > 0 {
            let f = inner.pow_u64(self.offset as u64, bound);
            acc = acc.mul(&f).truncate_bound(bound);
        }
        // coefficient k of the composition depends on outer coefficients up
        // to k / inner.offset, so knowledge ends at outer bound * valuation
        Ok(acc.truncate_bound(bound.min(self.bound().saturating_mul(inner.offset))))
    }

    /// Compositional inverse of f = a1 q + ... with a1 invertible: returns g
    /// with f(g(q)) = q to the known precision. Newton iteration,
    /// g <- g - (f(g) - q)/f'(g), doubling the verified degree each step.
    pub fn reversion(&self) -> Result<Series<R>> {
        if self.offset != 1 || self.coeffs.is_empty() || self.ctx.is_zero(&self.coeffs[0]) {
            return Err(Error::InvalidInput(
                "reversion requires f = a1 q + ... with a1 invertible".into(),
            ));
        }
        let nb = self.bound();
        let a1i = self.ctx.inv(&self.coeffs[0])?;
        let fp = self.derivative();
        let mut g = Series::new(self.ctx.clone(), 1, vec![a1i]);
        while g.bound() < nb {
            let newb = (2 * (g.bound() - 1) + 1).min(nb);
            let mut coeffs = g.coeffs.clone();
            while (coeffs.len() as i64) < newb - 1 {
                coeffs.push(self.ctx.zero());
            }
            let g_ext = Series::new(self.ctx.clone(), 1, coeffs);
            let fg = self.truncate_bound(newb).compose(&g_ext)?;
            let q1 = Series::monomial(self.ctx.clone(), self.ctx.one(), 1, (newb - 1) as usize);
            let err = fg.sub(&q1);
            let fpg = fp.truncate_bound(newb).compose(&g_ext)?;
            let corr = err.mul(&fpg.inverse()?).truncate_bound(newb);
            g = g_ext.sub(&corr).truncate_bound(newb);
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::big_rational;

    fn qs(offset: i64, vals: &[i64]) -> Series<QCtx> {
        Series::new(
            QCtx,
            offset,
            vals.iter().map(|&v| big_rational(v, 1)).collect(),
        )
    }

    fn coeffs_i64(s: &Series<QCtx>) -> (i64, Vec<BigRational>) {
        (s.offset, s.coeffs.clone())
    }

    #[test]
    fn mul_truncates_to_shared_knowledge() {
        // (1 + q) * (1 + q + q^2), both known to 3 terms
        let a = qs(0, &[1, 1, 0]);
        let b = qs(0, &[1, 1, 1]);
        let p = a.mul(&b);
        assert_eq!(p.offset, 0);
        assert_eq!(
            p.coeffs,
            vec![big_rational(1, 1), big_rational(2, 1), big_rational(2, 1)]
        );
    }

    #[test]
    fn laurent_mul_and_offset() {
        // (q^-1 + 1) * (q + q^2) = 1 + 2q + q^2, product known to bound 2
        let a = qs(-1, &[1, 1, 0]);
        let b = qs(1, &[1, 1, 0]);
        let p = a.mul(&b);
        assert_eq!(p.offset, 0);
        assert_eq!(p.get(0), big_rational(1, 1));
        assert_eq!(p.get(1), big_rational(2, 1));
    }

    #[test]
    fn derivative_of_laurent() {
        // d/dq (q^-1 + 3 + 5q) = -q^-2 + 5
        let s = qs(-1, &[1, 3, 5]);
        let d = s.derivative();
        assert_eq!(d.get(-2), big_rational(-1, 1));
        assert_eq!(d.get(-1), big_rational(0, 1));
        assert_eq!(d.get(0), big_rational(5, 1));
    }

    #[test]
    fn inverse_of_unit_series() {
        // 1/(1 - q) = 1 + q + q^2 + ...
        let s = qs(0, &[1, -1, 0, 0, 0]);
        let i = s.inverse().unwrap();
        for k in 0..5 {
            assert_eq!(i.get(k), big_rational(1, 1));
        }
        // and q^2/(1-q): inverse of q^2(1 - q) has offset -2
        let t = s.shift(2);
        let ti = t.inverse().unwrap();
        assert_eq!(ti.offset, -2);
        assert_eq!(ti.get(-2), big_rational(1, 1));
    }

    #[test]
    fn compose_polynomial() {
        // f = 1 + x^2, inner = q + q^3: f(inner) = 1 + q^2 + 2 q^4 + ...
        let f = qs(0, &[1, 0, 1, 0, 0, 0, 0]);
        let inner = qs(1, &[1, 0, 1, 0, 0, 0]);
        let c = f.compose(&inner).unwrap();
        assert_eq!(c.get(0), big_rational(1, 1));
        assert_eq!(c.get(2), big_rational(1, 1));
        assert_eq!(c.get(4), big_rational(2, 1));
        assert_eq!(c.get(6), big_rational(1, 1));
    }

    #[test]
    fn reversion_round_trip() {
        // f = q + q^2 + 3 q^3; check f(g(q)) = q
        let f = qs(1, &[1, 1, 3, 0, 0, 0, 0, 0]);
        let g = f.reversion().unwrap();
        let back = f.compose(&g).unwrap();
        assert_eq!(back.get(1), big_rational(1, 1));
        for k in 2..back.bound() {
            assert_eq!(back.get(k), big_rational(0, 1), "residual at q^{k}");
        }
        let _ = coeffs_i64(&g);
    }

    #[test]
    fn reversion_of_log_like_series() {
        // f = q - q^2/2 + q^3/3 - ... (log(1+q)); reversion is e^q - 1
        let n = 10usize;
        let f = Series::new(
            QCtx,
            1,
            (1..=n as i64)
                .map(|k| big_rational(if k % 2 == 1 { 1 } else { -1 }, k))
                .collect(),
        );
        let g = f.reversion().unwrap();
        // e^q - 1 has coefficients 1/k!
        let mut fact = big_rational(1, 1);
        for k in 1..=n as i64 {
            fact = fact * big_rational(1, k);
            assert_eq!(g.get(k), fact, "coefficient of q^{k}");
        }
    }

    #[test]
    fn padic_series_smoke() {
        let ctx = PadicCtx {
            p: 5,
            e: 1,
            prec: big_rational(12, 1),
        };
        let s = Series::new(ctx.clone(), 0, vec![ctx.one(), ctx.from_i64(5)]);
        let p = s.mul(&s);
        assert_eq!(p.coeffs[1].val().unwrap(), big_rational(1, 1)); // 2*5 has val 1
    }
}
