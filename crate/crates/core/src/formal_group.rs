//! Formal groups of elliptic curves over p-adic integer rings: good-reduction
//! models and the tame ramification index e_p, the formal group law and
//! [n](T), height detection, Newton polygons, and vertical valuation bounds.

use num::rational::BigRational;
use num::{BigInt, One, Zero};

use crate::error::{Error, Result};
use crate::exact::padic::PadicElement;
use crate::exact::rat::big_rational;
use crate::series::{PadicCtx, RingCtx, Series};

/// y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.
#[derive(Clone, Debug)]
pub struct WeierstrassModel<R: RingCtx> {
    pub ctx: R,
    pub a1: R::Elem,
    pub a2: R::Elem,
    pub a3: R::Elem,
    pub a4: R::Elem,
    pub a6: R::Elem,
}

impl<R: RingCtx> WeierstrassModel<R> {
    pub fn new(ctx: R, a: [R::Elem; 5]) -> Self {
        let [a1, a2, a3, a4, a6] = a;
        WeierstrassModel { ctx, a1, a2, a3, a4, a6 }
    }

    pub fn b_invariants(&self) -> (R::Elem, R::Elem, R::Elem, R::Elem) {
        let c = &self.ctx;
        let a1sq = c.mul(&self.a1, &self.a1);
        let b2 = c.add(&a1sq, &c.mul_i64(&self.a2, 4));
        let b4 = c.add(&c.mul_i64(&self.a4, 2), &c.mul(&self.a1, &self.a3));
        let b6 = c.add(&c.mul(&self.a3, &self.a3), &c.mul_i64(&self.a6, 4));
        // b8 = a1^2 a6 + 4 a2 a6 - a1 a3 a4 + a2 a3^2 - a4^2
        let b8 = c.sub(
            &c.add(
                &c.add(
                    &c.mul(&a1sq, &self.a6),
                    &c.mul_i64(&c.mul(&self.a2, &self.a6), 4),
                ),
                &c.mul(&self.a2, &c.mul(&self.a3, &self.a3)),
            ),
            &c.add(
                &c.mul(&self.a1, &c.mul(&self.a3, &self.a4)),
                &c.mul(&self.a4, &self.a4),
            ),
        );
        (b2, b4, b6, b8)
    }

    pub fn discriminant(&self) -> R::Elem {
        let c = &self.ctx;
        let (b2, b4, b6, b8) = self.b_invariants();
        // -b2^2 b8 - 8 b4^3 - 27 b6^2 + 9 b2 b4 b6
        let t1 = c.neg(&c.mul(&c.mul(&b2, &b2), &b8));
        let t2 = c.mul_i64(&c.mul(&b4, &c.mul(&b4, &b4)), -8);
        let t3 = c.mul_i64(&c.mul(&b6, &b6), -27);
        let t4 = c.mul_i64(&c.mul(&b2, &c.mul(&b4, &b6)), 9);
        c.add(&c.add(&t1, &t2), &c.add(&t3, &t4))
    }

    pub fn c4(&self) -> R::Elem {
        let c = &self.ctx;
        let (b2, b4, _, _) = self.b_invariants();
        c.sub(&c.mul(&b2, &b2), &c.mul_i64(&b4, 24))
    }

    pub fn j_invariant(&self) -> Result<R::Elem> {
        let c = &self.ctx;
        let c4 = self.c4();
        let num = c.mul(&c4, &c.mul(&c4, &c4));
        c.inv(&self.discriminant()).map(|di| c.mul(&num, &di))
    }

    /// The curve y^2 + xy = x^3 - 36/(j-1728) x - 1/(j-1728), plus the
    /// standard degenerate models at j = 0 and j = 1728.
    pub fn from_j(ctx: R, j: &R::Elem) -> Result<Self> {
        let z = ctx.zero();
        if ctx.is_zero(j) {
            // y^2 + y = x^3
            return Ok(Self::new(ctx.clone(), [z.clone(), z.clone(), ctx.one(), z.clone(), z]));
        }
        let j1728 = ctx.sub(j, &ctx.from_i64(1728));
        if ctx.is_zero(&j1728) {
            // y^2 = x^3 + x
            return Ok(Self::new(ctx.clone(), [z.clone(), z.clone(), z.clone(), ctx.one(), z]));
        }
        let d = ctx.inv(&j1728)?;
        Ok(Self::new(
            ctx.clone(),
            [
                ctx.one(),
                z.clone(),
                z,
                ctx.mul_i64(&d, -36),
                ctx.neg(&d),
            ],
        ))
    }
}

/// Lift a Q_p element (e = 1) into the totally ramified extension pi^e = p.
fn lift_to_ramified(x: &PadicElement, e: u64) -> PadicElement {
    assert_eq!(x.e, 1);
    let mut coeffs = vec![BigRational::zero(); e as usize];
    coeffs[0] = x.coeffs[0].clone();
    PadicElement::new(x.p, e, coeffs, x.prec.clone())
}

/// Minimal tamely ramified extension over which E acquires good reduction,
/// with the scaled unit-discriminant model: e_p = 12 / gcd(v(D_min), 12).
pub fn good_reduction_model(
    e_curve: &WeierstrassModel<PadicCtx>,
    p: u64,
) -> Result<(WeierstrassModel<PadicCtx>, u64)> {
    if p < 5 {
        return Err(Error::OutOfScope(format!(
            "residue characteristic {p} < 5: wild ramification not supported"
        )));
    }
    if e_curve.ctx.e != 1 {
        return Err(Error::InvalidInput("expected a model over Q_p".into()));
    }
    let j = e_curve.j_invariant()?;
    let vj = j.val().unwrap_or_else(|_| j.prec.clone());
    if vj < BigRational::zero() {
        return Err(Error::InvalidInput(
            "v(j) < 0: multiplicative reduction, not potentially good".into(),
        ));
    }
    let disc = e_curve.discriminant();
    let vd = disc
        .val()
        .map_err(|_| Error::precision("discriminant indistinguishable from 0"))?;
    let vd = vd
        .to_integer()
        .try_into()
        .ok()
        .filter(|_| vd.is_integer())
        .map(|v: i64| v)
        .ok_or_else(|| Error::Internal("non-integral v(disc) over Q_p".into()))?;
    if vd < 0 {
        return Err(Error::InvalidInput("non-integral model: v(disc) < 0".into()));
    }

    // clear the 12-divisible part: u = p^(vd/12) keeps us over Q_p
    let scale_qp = |m: &WeierstrassModel<PadicCtx>, k: i64| -> WeierstrassModel<PadicCtx> {
        // (x, y) -> (u^2 x, u^3 y) with u = p^k divides a_i by u^i
        let u = |i: i64| {
            BigRational::from(BigInt::from(p)).pow((-k * i) as i32)
        };
        WeierstrassModel::new(
            m.ctx.clone(),
            [
                m.a1.scale(&u(1)),
                m.a2.scale(&u(2)),
                m.a3.scale(&u(3)),
                m.a4.scale(&u(4)),
                m.a6.scale(&u(6)),
            ],
        )
    };
    let reduced = scale_qp(e_curve, vd.div_euclid(12));
    let vd_min = vd.rem_euclid(12) as u64;
    let ep = 12 / gcd_u64(vd_min, 12);
    if ep == 1 {
        return Ok((reduced, 1));
    }

    // over pi^ep = p: u = pi^(vd_min ep / 12) has v(u) = vd_min/12
    let ctx2 = PadicCtx {
        p,
        e: ep,
        prec: e_curve.ctx.prec.clone(),
    };
    let k = (vd_min * ep / 12) as u64;
    let pi = PadicElement::uniformizer(p, ep, ctx2.prec.clone());
    let u_inv_pow = |i: u64| -> Result<PadicElement> {
        pi.pow(k * i).inv()
    };
    let lift = |x: &PadicElement| lift_to_ramified(x, ep);
    let model = WeierstrassModel::new(
        ctx2,
        [
            lift(&reduced.a1).mul(&u_inv_pow(1)?),
            lift(&reduced.a2).mul(&u_inv_pow(2)?),
            lift(&reduced.a3).mul(&u_inv_pow(3)?),
            lift(&reduced.a4).mul(&u_inv_pow(4)?),
            lift(&reduced.a6).mul(&u_inv_pow(6)?),
        ],
    );
    let vcheck = model.discriminant().val().map_err(|_| {
        Error::precision("scaled discriminant indistinguishable from 0")
    })?;
    if !vcheck.is_zero() {
        return Err(Error::Internal(format!(
            "scaled model has v(disc) = {vcheck}, expected 0"
        )));
    }
    Ok((model, ep))
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// The formal group of an elliptic curve at T = -x/y, carried by its formal
/// logarithm/exponential; the bivariate law is materialized at a smaller
/// precision for invariant checks.
#[derive(Clone, Debug)]
pub struct FormalGroupLaw<R: RingCtx> {
    pub ctx: R,
    /// Formal logarithm, log(T) = T + O(T^2).
    pub log: Series<R>,
    /// Compositional inverse of log.
    pub exp: Series<R>,
    pub prec: usize,
}

impl<R: RingCtx> FormalGroupLaw<R> {
    /// Test law F = X + Y + XY with [n](T) = (1+T)^n - 1.
    pub fn multiplicative(ctx: R, prec: usize) -> Result<Self> {
        // log(1+T) and exp(T)-1
        let mut lc = Vec::with_capacity(prec);
        for k in 1..=prec as i64 {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            lc.push(ctx.div_i64(&ctx.from_i64(sign), k)?);
        }
        let log = Series::new(ctx.clone(), 1, lc);
        let exp = log.reversion()?;
        Ok(FormalGroupLaw { ctx, log, exp, prec })
    }

    /// [n](T) = exp(n log T); equals the n-fold iterate F(...F(T,T)...,T).
    pub fn mult_by(&self, n: i64) -> Result<Series<R>> {
        let scaled = self.log.scale(&self.ctx.from_i64(n));
        self.exp.compose(&scaled)
    }

    /// F(u, v) for univariate truncated series arguments u, v (offset >= 1).
    pub fn add_points(&self, u: &Series<R>, v: &Series<R>) -> Result<Series<R>> {
        let lu = self.log.compose(u)?;
        let lv = self.log.compose(v)?;
        self.exp.compose(&lu.add(&lv))
    }

    /// Bivariate F(X,Y) as rows c[i][j] of X^i Y^j, for i + j < prec.
    pub fn bivariate(&self, prec: usize) -> Result<Vec<Vec<R::Elem>>> {
        let ctx = &self.ctx;
        let n = prec;
        let zero_m = || -> Vec<Vec<R::Elem>> {
            (0..n).map(|i| (0..n - i).map(|_| ctx.zero()).collect()).collect()
        };
        let mul_biv = |a: &Vec<Vec<R::Elem>>, b: &Vec<Vec<R::Elem>>| {
            let mut out = zero_m();
            for (i1, row1) in a.iter().enumerate() {
                for (j1, x) in row1.iter().enumerate() {
                    if ctx.is_zero(x) {
                        continue;
                    }
                    for (i2, row2) in b.iter().enumerate() {
                        if i1 + i2 >= n {
                            break;
                        }
                        for (j2, y) in row2.iter().enumerate() {
                            if i1 + i2 + j1 + j2 >= n {
                                break;
                            }
                            let t = ctx.mul(x, y);
                            out[i1 + i2][j1 + j2] = ctx.add(&out[i1 + i2][j1 + j2], &t);
                        }
                    }
                }
            }
            out
        };
        // L = log(X) + log(Y)
        let mut l = zero_m();
        for (k, c) in self.log.coeffs.iter().enumerate() {
            let d = k + 1;
            if d < n {
                l[d][0] = ctx.add(&l[d][0], c);
                l[0][d] = ctx.add(&l[0][d], c);
            }
        }
        // F = exp(L) by Horner (exp has zero constant term)
        let mut acc = zero_m();
        for c in self.exp.coeffs.iter().rev() {
            acc = mul_biv(&acc, &l);
            acc[0][0] = ctx.add(&acc[0][0], c);
        }
        acc = mul_biv(&acc, &l);
        Ok(acc)
    }
}

/// Formal group from a Weierstrass model via the w(t)-recursion:
/// w = t^3 + a1 t w + a2 t^2 w + a3 w^2 + a4 t w^2 + a6 w^3,
/// then x = t/w, y = -1/w, log = integral of dx/(2y + a1 x + a3).
pub fn formal_group<R: RingCtx>(
    model: &WeierstrassModel<R>,
    prec: usize,
) -> Result<FormalGroupLaw<R>> {
    if prec < 2 {
        return Err(Error::InvalidInput("formal group needs prec >= 2".into()));
    }
    let ctx = model.ctx.clone();
    let bound = (prec + 4) as i64;
    let t3 = Series::monomial(ctx.clone(), ctx.one(), 3, prec + 4);
    let mut w = t3.clone();
    for _ in 0..prec + 4 {
        let w2 = w.mul(&w).truncate_bound(bound + 3);
        let w3 = w2.mul(&w).truncate_bound(bound + 3);
        let mut next = t3.clone();
        next = next.add(&w.shift(1).scale(&model.a1).truncate_bound(bound + 3));
        next = next.add(&w.shift(2).scale(&model.a2).truncate_bound(bound + 3));
        next = next.add(&w2.scale(&model.a3).truncate_bound(bound + 3));
        next = next.add(&w2.shift(1).scale(&model.a4).truncate_bound(bound + 3));
        next = next.add(&w3.scale(&model.a6).truncate_bound(bound + 3));
        w = next.truncate_bound(bound + 3);
    }
    // x = t/w (offset -2), y = -1/w (offset -3)
    let winv = w.inverse()?;
    let x = winv.shift(1); // t * w^-1
    let y = winv.neg();
    // omega = x' / (2y + a1 x + a3)
    let dx = x.derivative();
    let mut den = y.scale(&ctx.from_i64(2));
    den = den.add(&x.scale(&model.a1));
    den = den.add(&Series::monomial(ctx.clone(), model.a3.clone(), 0, prec + 4).truncate_bound(den.bound()));
    let omega = dx.mul(&den.inverse()?).truncate_bound(prec as i64);
    if omega.offset != 0 {
        return Err(Error::Internal(format!(
            "invariant differential has unexpected valuation {}",
            omega.offset
        )));
    }
    // log = integral: coefficient of t^k integrates to t^(k+1)/(k+1)
    let mut lc = Vec::with_capacity(prec);
    for k in 0..prec.min(omega.coeffs.len()) {
        lc.push(ctx.div_i64(&omega.coeffs[k], (k + 1) as i64)?);
    }
    let log = Series::new(ctx.clone(), 1, lc);
    let exp = log.reversion()?;
    Ok(FormalGroupLaw { ctx, log, exp, prec })
}

/// Height of the formal group over a p-adic integer ring: the degree of the
/// lowest unit coefficient of [p](T) is p (h = 1) or p^2 (h = 2).
pub fn formal_height(f: &FormalGroupLaw<PadicCtx>) -> Result<u64> {
    let p = f.ctx.p;
    if f.prec <= (p * p) as usize {
        return Err(Error::precision_hint(
            "formal height needs [p](T) past degree p^2",
            (p * p + 1) as usize,
        ));
    }
    let mp = f.mult_by(p as i64)?;
    for k in 1..=(p * p) as i64 {
        if k >= mp.bound() {
            break;
        }
        let c = mp.get(k);
        if let Ok(v) = c.val() {
            if v.is_zero() {
                return match k as u64 {
                    d if d == p => Ok(1),
                    d if d == p * p => Ok(2),
                    d => Err(Error::Inconsistent(format!(
                        "lowest unit coefficient of [p](T) at degree {d}, not p or p^2"
                    ))),
                };
            }
        }
    }
    // no unit found below p^2: the p^2 coefficient must be the unit
    let c = mp.get((p * p) as i64);
    match c.val() {
        Ok(v) if v.is_zero() => Ok(2),
        _ => Err(Error::Inconsistent(
            "no unit coefficient of [p](T) at degree <= p^2".into(),
        )),
    }
}

/// Lower convex hull with vertices (x, y), x strictly increasing. The slope
/// of the edge from (x1,y1) to (x2,y2) is (y1-y2)/(x2-x1).
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPolygon {
    pub vertices: Vec<(i64, BigRational)>,
}

/// Points with y = None are at +infinity and ignored.
pub fn newton_polygon(points: &[(i64, Option<BigRational>)]) -> Result<NewtonPolygon> {
    let mut pts: Vec<(i64, BigRational)> = points
        .iter()
        .filter_map(|(x, y)| y.clone().map(|y| (*x, y)))
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidInput("no finite points for Newton polygon".into()));
    }
    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    pts.dedup_by(|a, b| {
        if a.0 == b.0 {
            // keep the lower y (b is the earlier element after sort)
            true
        } else {
            false
        }
    });
    // monotone chain, lower hull
    let mut hull: Vec<(i64, BigRational)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2].clone();
            let (x2, y2) = hull[hull.len() - 1].clone();
            // drop (x2,y2) if it lies on or above segment (x1,y1)-(p)
            let lhs = (&y2 - &y1) * BigRational::from(BigInt::from(p.0 - x1));
            let rhs = (&p.1 - &y1) * BigRational::from(BigInt::from(x2 - x1));
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(NewtonPolygon { vertices: hull })
}

impl NewtonPolygon {
    /// Edge slopes in the stated convention, in vertex order.
    pub fn slopes(&self) -> Vec<BigRational> {
        self.vertices
            .windows(2)
            .map(|w| {
                let (x1, y1) = &w[0];
                let (x2, y2) = &w[1];
                (y1 - y2) / BigRational::from(BigInt::from(x2 - x1))
            })
            .collect()
    }

    pub fn max_slope(&self) -> Option<BigRational> {
        self.slopes().into_iter().max()
    }

    /// Height of the hull at abscissa x (linear interpolation; None outside).
    pub fn value_at(&self, x: i64) -> Option<BigRational> {
        for w in self.vertices.windows(2) {
            let (x1, y1) = &w[0];
            let (x2, y2) = &w[1];
            if *x1 <= x && x <= *x2 {
                let t = BigRational::from(BigInt::from(x - x1))
                    / BigRational::from(BigInt::from(x2 - x1));
                return Some(y1 + (y2 - y1) * t);
            }
        }
        if self.vertices.len() == 1 && self.vertices[0].0 == x {
            return Some(self.vertices[0].1.clone());
        }
        None
    }

    pub fn has_vertex(&self, x: i64, y: &BigRational) -> bool {
        self.vertices.iter().any(|(vx, vy)| *vx == x && vy == y)
    }
}

/// Newton polygon of a p-adic series' coefficients 1..=deg.
pub fn series_polygon(s: &Series<PadicCtx>, deg: i64) -> Result<NewtonPolygon> {
    let pts: Vec<(i64, Option<BigRational>)> = (1..=deg)
        .map(|k| {
            let v = if k < s.bound() { s.get(k).val().ok() } else { None };
            (k, v)
        })
        .collect();
    newton_polygon(&pts)
}

/// Vertical valuation bound: 1/(p-1) for ordinary reduction; for
/// supersingular, (1-r)/(p^2-p) with r the hull height of [p](T) at
/// x = p^2 - p + 1.
pub fn v_vert_bound(f: &FormalGroupLaw<PadicCtx>, p: u64, m: u64) -> Result<BigRational> {
    if m < 1 {
        return Err(Error::InvalidInput("v_vert_bound needs m >= 1".into()));
    }
    match formal_height(f)? {
        1 => Ok(big_rational(1, (p - 1) as i64)),
        2 => {
            let mp = f.mult_by(p as i64)?;
            let poly = series_polygon(&mp, (p * p) as i64)?;
            let one = BigRational::one();
            let zero = BigRational::zero();
            if !poly.has_vertex(1, &one) || !poly.has_vertex((p * p) as i64, &zero) {
                return Err(Error::Inconsistent(
                    "Newton polygon of [p](T) lacks the vertices (1,1), (p^2,0)".into(),
                ));
            }
            let r = poly
                .value_at((p * p - p + 1) as i64)
                .ok_or_else(|| Error::Internal("hull does not span p^2-p+1".into()))?;
            if r < zero || r > one {
                return Err(Error::Inconsistent(format!("hull height r = {r} outside [0,1]")));
            }
            Ok((one - r) / BigRational::from(BigInt::from((p * p - p) as i64)))
        }
        h => Err(Error::Internal(format!("unexpected formal height {h}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::QCtx;

    fn qp(p: u64, prec: i64) -> PadicCtx {
        PadicCtx {
            p,
            e: 1,
            prec: big_rational(prec, 1),
        }
    }

    fn padic_model(p: u64, prec: i64, a: [i64; 5]) -> WeierstrassModel<PadicCtx> {
        let ctx = qp(p, prec);
        let e = |n: i64| ctx.from_i64(n);
        WeierstrassModel::new(ctx.clone(), [e(a[0]), e(a[1]), e(a[2]), e(a[3]), e(a[4])])
    }

    #[test]
    fn discriminant_matches_reference_curve() {
        // y^2 + y = x^3 - x^2 (curve 11a3): disc = -11
        let ctx = QCtx;
        let m = WeierstrassModel::new(
            ctx.clone(),
            [
                big_rational(0, 1),
                big_rational(-1, 1),
                big_rational(1, 1),
                big_rational(0, 1),
                big_rational(0, 1),
            ],
        );
        assert_eq!(m.discriminant(), big_rational(-11, 1));
        assert_eq!(
            m.j_invariant().unwrap(),
            big_rational(-4096, 11)
        );
    }

    #[test]
    fn good_reduction_passthrough() {
        // y^2 = x^3 + x over Q_7: disc = -64, a unit
        let m = padic_model(7, 30, [0, 0, 0, 1, 0]);
        let (out, ep) = good_reduction_model(&m, 7).unwrap();
        assert_eq!(ep, 1);
        assert!(out.discriminant().val().unwrap().is_zero());
    }

    #[test]
    fn kodaira_ii_gives_e6() {
        // y^2 = x^3 + p: disc = -432 p^2, v = 2 -> Kodaira II, e_p = 6
        let m = padic_model(5, 40, [0, 0, 0, 0, 5]);
        let (out, ep) = good_reduction_model(&m, 5).unwrap();
        assert_eq!(ep, 6);
        assert!(out.discriminant().val().unwrap().is_zero());
    }

    #[test]
    fn kodaira_i0_star_gives_e2() {
        // y^2 = x^3 + p^2 x: disc = -64 p^6, v = 6 -> I0*, e_p = 2
        let m = padic_model(5, 40, [0, 0, 0, 25, 0]);
        let (out, ep) = good_reduction_model(&m, 5).unwrap();
        assert_eq!(ep, 2);
        assert!(out.discriminant().val().unwrap().is_zero());
    }

    #[test]
    fn kodaira_iii_and_iv() {
        // v(disc) = 3 -> III, e_p = 4: y^2 = x^3 + p x
        let (_, ep) = good_reduction_model(&padic_model(5, 40, [0, 0, 0, 5, 0]), 5).unwrap();
        assert_eq!(ep, 4);
        // v(disc) = 4 -> IV, e_p = 3: y^2 = x^3 + p^2
        let (_, ep) = good_reduction_model(&padic_model(5, 40, [0, 0, 0, 0, 25]), 5).unwrap();
        assert_eq!(ep, 3);
    }

    #[test]
    fn non_minimal_model_cleared() {
        // y^2 = x^3 + p^4 x: v(disc) = 12, cleared by u = p to v = 0
        let m = padic_model(5, 60, [0, 0, 0, 5i64.pow(4), 0]);
        let (out, ep) = good_reduction_model(&m, 5).unwrap();
        assert_eq!(ep, 1);
        assert!(out.discriminant().val().unwrap().is_zero());
    }

    #[test]
    fn multiplicative_reduction_rejected() {
        // y^2 + xy = x^3 + 1/p^k style: easiest is a curve with v(j) < 0:
        // y^2 + xy = x^3 - 36/(j-1728) x - 1/(j-1728) with j = 1/5
        let ctx = qp(5, 30);
        let j = PadicElement::from_rational(5, 1, &big_rational(1, 5), big_rational(30, 1));
        let m = WeierstrassModel::from_j(ctx, &j).unwrap();
        assert!(matches!(
            good_reduction_model(&m, 5),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn formal_law_leading_terms() {
        // generic curve over Q: F(X,Y) = X + Y - a1 XY + ... (mod degree 3)
        let ctx = QCtx;
        let m = WeierstrassModel::new(
            ctx.clone(),
            [
                big_rational(1, 1),
                big_rational(0, 1),
                big_rational(0, 1),
                big_rational(-36, 7),
                big_rational(-1, 7),
            ],
        );
        let f = formal_group(&m, 8).unwrap();
        let biv = f.bivariate(3).unwrap();
        assert_eq!(biv[0][0], big_rational(0, 1));
        assert_eq!(biv[1][0], big_rational(1, 1)); // X
        assert_eq!(biv[0][1], big_rational(1, 1)); // Y
        assert_eq!(biv[1][1], big_rational(-1, 1)); // -a1 XY
    }

    #[test]
    fn bivariate_law_symmetric_and_unital() {
        let ctx = QCtx;
        let m = WeierstrassModel::new(
            ctx.clone(),
            [
                big_rational(1, 1),
                big_rational(-1, 1),
                big_rational(1, 1),
                big_rational(-3, 1),
                big_rational(3, 1),
            ],
        );
        let f = formal_group(&m, 10).unwrap();
        let biv = f.bivariate(7).unwrap();
        for i in 0..7 {
            for j in 0..7 - i {
                assert_eq!(biv[i][j], biv[j][i], "symmetry at ({i},{j})");
            }
        }
        // F(X, 0) = X
        assert_eq!(biv[1][0], big_rational(1, 1));
        for i in [0usize, 2, 3, 4, 5, 6] {
            assert_eq!(biv[i][0], big_rational(0, 1), "F(X,0) coefficient X^{i}");
        }
    }

    #[test]
    fn multiplicative_law_mult_by_p() {
        let f = FormalGroupLaw::multiplicative(QCtx, 8).unwrap();
        let m5 = f.mult_by(5).unwrap();
        // (1+T)^5 - 1
        let expect = [5i64, 10, 10, 5, 1, 0, 0];
        for (k, e) in expect.iter().enumerate() {
            let k = (k + 1) as i64;
            if k < m5.bound() {
                assert_eq!(m5.get(k), big_rational(*e, 1), "T^{k}");
            }
        }
    }

    #[test]
    fn mult_by_agrees_with_addition_law() {
        let ctx = QCtx;
        let m = WeierstrassModel::new(
            ctx.clone(),
            [
                big_rational(0, 1),
                big_rational(0, 1),
                big_rational(1, 1),
                big_rational(0, 1),
                big_rational(0, 1),
            ],
        );
        let f = formal_group(&m, 9).unwrap();
        let t = Series::monomial(QCtx, big_rational(1, 1), 1, 8);
        let two_a = f.add_points(&t, &t).unwrap();
        let two_b = f.mult_by(2).unwrap();
        for k in 1..two_a.bound().min(two_b.bound()) {
            assert_eq!(two_a.get(k), two_b.get(k), "[2](T) coefficient {k}");
        }
        // [2] then [3] equals [6]
        let six = f.mult_by(6).unwrap();
        let two = f.mult_by(2).unwrap();
        let three = f.mult_by(3).unwrap();
        let comp = three.compose(&two).unwrap();
        for k in 1..comp.bound().min(six.bound()) {
            assert_eq!(comp.get(k), six.get(k), "[6] vs [3]o[2] at {k}");
        }
    }

    #[test]
    fn height_of_multiplicative_law() {
        let ctx = qp(5, 25);
        let f = FormalGroupLaw::multiplicative(ctx, 30).unwrap();
        assert_eq!(formal_height(&f).unwrap(), 1);
        assert_eq!(v_vert_bound(&f, 5, 1).unwrap(), big_rational(1, 4));
    }

    #[test]
    fn heights_of_j1728_curves() {
        // y^2 = x^3 + x: supersingular at 7 (7 = 3 mod 4), ordinary at 13
        let m7 = padic_model(7, 30, [0, 0, 0, 1, 0]);
        let f7 = formal_group(&m7, 52).unwrap();
        assert_eq!(formal_height(&f7).unwrap(), 2);
        let m13 = padic_model(13, 30, [0, 0, 0, 1, 0]);
        let f13 = formal_group(&m13, 172).unwrap();
        assert_eq!(formal_height(&f13).unwrap(), 1);
    }

    #[test]
    fn newton_polygon_multiplicative_shape() {
        let p = 7i64;
        let mut pts: Vec<(i64, Option<BigRational>)> = (1..p)
            .map(|x| (x, Some(big_rational(1, 1))))
            .collect();
        pts.push((p, Some(big_rational(0, 1))));
        let poly = newton_polygon(&pts).unwrap();
        assert_eq!(
            poly.vertices,
            vec![(1, big_rational(1, 1)), (7, big_rational(0, 1))]
        );
        assert_eq!(poly.max_slope().unwrap(), big_rational(1, 6));
    }

    #[test]
    fn newton_polygon_ignores_interior() {
        let pts = vec![
            (0i64, Some(big_rational(0, 1))),
            (2, Some(big_rational(3, 1))),
            (5, Some(big_rational(0, 1))),
        ];
        let poly = newton_polygon(&pts).unwrap();
        assert_eq!(
            poly.vertices,
            vec![(0, big_rational(0, 1)), (5, big_rational(0, 1))]
        );
    }

    #[test]
    fn newton_polygon_matches_bruteforce() {
        // brute force: a point is on the lower hull iff some line through it
        // keeps all points on or above
        let mut x = 7i64;
        let mut next = || {
            x = (x * 48271) % 2147483647;
            x
        };
        let pts: Vec<(i64, Option<BigRational>)> = (0..50)
            .map(|i| (i as i64, Some(big_rational(next() % 40, 1 + next() % 7))))
            .collect();
        let poly = newton_polygon(&pts).unwrap();
        // every input point lies on or above the hull
        for (x, y) in pts.iter().filter_map(|(x, y)| y.clone().map(|y| (*x, y))) {
            if let Some(h) = poly.value_at(x) {
                assert!(y >= h, "point ({x},{y}) below hull");
            }
        }
        // vertices are input points and slopes strictly increase
        // in the (y1-y2)/(x2-x1) convention hull slopes strictly decrease
        let slopes = poly.slopes();
        for w in slopes.windows(2) {
            assert!(w[0] > w[1], "non-strict hull");
        }
    }

    #[test]
    fn supersingular_v_vert_at_7() {
        let m7 = padic_model(7, 40, [0, 0, 0, 1, 0]);
        let f7 = formal_group(&m7, 52).unwrap();
        let v = v_vert_bound(&f7, 7, 1).unwrap();
        // r = hull height at 43 on the polygon with vertices (1,1),(49,0):
        // supersingular [7] has middle vertex (7, 1/ (something)) or straight
        assert!(v >= big_rational(0, 1) && v <= big_rational(1, 42));
        // the polygon of a height-2 law over Z_p: vertices (1,1),(p^2,0) and
        // possibly (p, v); for y^2 = x^3 + x at 7 the hull is straight:
        let mp = f7.mult_by(7).unwrap();
        let poly = series_polygon(&mp, 49).unwrap();
        assert!(poly.has_vertex(1, &big_rational(1, 1)));
        assert!(poly.has_vertex(49, &big_rational(0, 1)));
    }
}
