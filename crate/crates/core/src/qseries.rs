//! q-expansion machinery: the j-series, CM basepoints q_b = exp(2 pi i tau),
//! rigorous Taylor coefficients at q_b, and period-lattice matching that pins
//! down which complex embedding of the coefficient field is in play.

use astro_float::{BigFloat, RoundingMode};
use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::ball::ComplexBall;
use crate::exact::cpx::{self, bigfloat_to_f64, pow2, rational_to_bigfloat, Cpx};
use crate::exact::nf::NfElt;
use crate::series::{BallCtx, QCtx, Series};

const RM: RoundingMode = RoundingMode::ToEven;
const UP: RoundingMode = RoundingMode::Up;

/// eta-quotient core: prod (1 - q^n) by the pentagonal number theorem,
/// truncated to exponents < prec.
fn euler_product(prec: usize) -> Series<QCtx> {
    let mut coeffs = vec![BigRational::zero(); prec];
    let mut k: i64 = 0;
    loop {
        // generalized pentagonal numbers k(3k-1)/2 for k = 0, 1, -1, 2, -2, ...
        let done = [k, -k].iter().all(|&m| {
            let e = m * (3 * m - 1) / 2;
            e >= prec as i64
        });
        if done && k > 0 {
            break;
        }
        for &m in &[k, -k] {
            if m == 0 && k != 0 {
                continue;
            }
            let e = m * (3 * m - 1) / 2;
            if e < prec as i64 {
                let sign = if m.rem_euclid(2) == 0 { 1 } else { -1 };
                coeffs[e as usize] += BigRational::from(BigInt::from(sign));
            }
            if k == 0 {
                break;
            }
        }
        k += 1;
    }
    Series::new(QCtx, 0, coeffs)
}

fn divisor_sigma(n: u64, k: u32) -> BigInt {
    let mut s = BigInt::zero();
    for d in 1..=n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
        }
    }
    s
}

/// Normalized Eisenstein series E_4 = 1 + 240 sum sigma_3(n) q^n.
pub fn e4_series(prec: usize) -> Series<QCtx> {
    let mut coeffs = vec![BigRational::zero(); prec];
    coeffs[0] = BigRational::one();
    for n in 1..prec as u64 {
        coeffs[n as usize] = BigRational::from(BigInt::from(240) * divisor_sigma(n, 3));
    }
    Series::new(QCtx, 0, coeffs)
}

/// Normalized Eisenstein series E_6 = 1 - 504 sum sigma_5(n) q^n.
pub fn e6_series(prec: usize) -> Series<QCtx> {
    let mut coeffs = vec![BigRational::zero(); prec];
    coeffs[0] = BigRational::one();
    for n in 1..prec as u64 {
        coeffs[n as usize] = BigRational::from(BigInt::from(-504) * divisor_sigma(n, 5));
    }
    Series::new(QCtx, 0, coeffs)
}

/// Delta = q prod (1-q^n)^24, truncated to exponents < prec.
pub fn delta_series(prec: usize) -> Series<QCtx> {
    let eta = euler_product(prec);
    eta.pow_u64(24, prec as i64).shift(1)
}

/// j(q) = E_4^3 / Delta, a Laurent series starting at q^-1, with `prec`
/// known coefficients (exponents -1 .. prec-2).
pub fn j_series(prec: usize) -> Series<QCtx> {
    assert!(prec >= 1);
    let m = prec + 1;
    let e4 = e4_series(m);
    let num = e4.pow_u64(3, m as i64);
    let den = delta_series(m + 1);
    num.mul(&den.inverse().expect("Delta is a unit times q"))
        .truncate_bound(prec as i64 - 1)
}

/// Ball enclosure of sqrt(x) for a positive rational.
pub fn ball_sqrt_rational(x: &BigRational, p: usize) -> ComplexBall {
    assert!(x.is_positive());
    let xf = rational_to_bigfloat(x, p + 8, RM);
    let s = xf.sqrt(p, RM);
    let b = ComplexBall::exact(Cpx::new(s.clone(), BigFloat::from_i8(0, p), p));
    // two roundings: the conversion and the sqrt
    let slack = crate::exact::cpx::pow2(
        s.exponent().unwrap_or(0) as i64 - p as i64 + 2,
    );
    b.inflate(&slack)
}

/// Ball enclosure of pi.
pub fn ball_pi(p: usize) -> ComplexBall {
    let v = cpx::pi(p);
    let slack = pow2(v.exponent().unwrap_or(2) as i64 - p as i64 + 1);
    ComplexBall::exact(Cpx::new(v, BigFloat::from_i8(0, p), p)).inflate(&slack)
}

/// CM basepoint: tau with P(tau) = tau^2 + r tau + s = 0, Im(tau) > 0, and
/// q_b = exp(2 pi i tau).
#[derive(Clone, Debug)]
pub struct Basepoint {
    pub r: i64,
    pub s: i64,
    pub tau: ComplexBall,
    pub q_b: ComplexBall,
    /// Upper-half-plane representatives for the Galois conjugates of the CM
    /// point: one per reduced binary quadratic form of the discriminant.
    pub conjugates: Vec<ComplexBall>,
}

/// tau = (-b + sqrt(D))/(2a) as a ball, for D < 0.
pub fn form_to_tau(a: i64, b: i64, disc: i64, p: usize) -> ComplexBall {
    let sd = ball_sqrt_rational(&BigRational::from(BigInt::from(-disc)), p);
    let re = BigRational::new(BigInt::from(-b), BigInt::from(2 * a));
    let im_scale = BigRational::new(BigInt::one(), BigInt::from(2 * a));
    let re_ball = ComplexBall::from_rational(&re, p);
    // i * sqrt(|D|) / (2a)
    let im_ball = sd
        .mul(&ComplexBall::from_rational(&im_scale, p))
        .mul(&ComplexBall::exact(Cpx::from_f64(0.0, 1.0, p)));
    re_ball.add(&im_ball)
}

/// Reduced primitive forms (a, b, c) of discriminant D < 0: |b| <= a <= c,
/// b > 0 when |b| = a or a = c.
pub fn reduced_forms(disc: i64) -> Vec<(i64, i64, i64)> {
    assert!(disc < 0 && (disc % 4 == 0 || disc.rem_euclid(4) == 1));
    let mut out = Vec::new();
    let bound = ((-disc) as f64 / 3.0).sqrt() as i64 + 1;
    for a in 1..=bound {
        for b in -a..=a {
            let num = (b * b - disc) as i64;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if (b.abs() == a || a == c) && b < 0 {
                continue;
            }
            // primitivity
            let g = gcd3(a, b.abs(), c);
            if g != 1 {
                continue;
            }
            out.push((a, b, c));
        }
    }
    out.sort();
    out
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    fn g(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            g(b, a % b)
        }
    }
    g(g(a, b), c)
}

impl Basepoint {
    pub fn new(r: i64, s: i64, prec: usize) -> Result<Self> {
        let disc = r * r - 4 * s;
        if disc >= 0 {
            return Err(Error::InvalidInput(format!(
                "tau with r={r}, s={s} is not imaginary quadratic (disc {disc} >= 0)"
            )));
        }
        // tau = (-r + i sqrt(4s - r^2)) / 2
        let tau = form_to_tau(1, r, disc, prec);
        let two_pi_i = ball_pi(prec)
            .scale_pow2(1)
            .mul(&ComplexBall::exact(Cpx::from_f64(0.0, 1.0, prec)));
        let q_b = two_pi_i.mul(&tau).exp();
        if q_b.abs_ub().cmp(&BigFloat::from_i8(1, 64)) != Some(-1) {
            return Err(Error::Inconsistent("|q_b| >= 1".into()));
        }
        let conjugates = reduced_forms(disc)
            .into_iter()
            .map(|(a, b, _)| form_to_tau(a, b, disc, prec))
            .collect();
        Ok(Basepoint {
            r,
            s,
            tau,
            q_b,
            conjugates,
        })
    }

    /// q-value for one of the conjugate upper-half-plane points.
    pub fn q_at_conjugate(&self, idx: usize, prec: usize) -> ComplexBall {
        let two_pi_i = ball_pi(prec)
            .scale_pow2(1)
            .mul(&ComplexBall::exact(Cpx::from_f64(0.0, 1.0, prec)));
        two_pi_i.mul(&self.conjugates[idx]).exp()
    }
}

/// q = exp(2 pi i tau) for an upper-half-plane tau.
pub fn q_from_tau(tau: &ComplexBall, prec: usize) -> Result<ComplexBall> {
    let two_pi_i = ball_pi(prec)
        .scale_pow2(1)
        .mul(&ComplexBall::exact(Cpx::from_f64(0.0, 1.0, prec)));
    let q = two_pi_i.mul(tau).exp();
    if q.abs_ub().cmp(&BigFloat::from_i8(1, 64)) != Some(-1) {
        return Err(Error::Inconsistent("|q| >= 1: tau not in the upper half plane".into()));
    }
    Ok(q)
}

/// Convert an exact series to ball coefficients at working precision.
pub fn to_ball_series(s: &Series<QCtx>, prec: usize) -> Series<BallCtx> {
    let ctx = BallCtx { prec };
    Series::new(
        ctx,
        s.offset,
        s.coeffs
            .iter()
            .map(|c| ComplexBall::from_rational(c, prec))
            .collect(),
    )
}

/// Convert a number-field series to balls via the embedding at `root_idx`.
pub fn nf_to_ball_series(
    s: &Series<crate::series::NfCtx>,
    root_idx: usize,
    prec: usize,
) -> Result<Series<BallCtx>> {
    let ctx = BallCtx { prec };
    let coeffs = s
        .coeffs
        .iter()
        .map(|c| c.embed(root_idx, prec))
        .collect::<Result<Vec<_>>>()?;
    Ok(Series::new(ctx, s.offset, coeffs))
}

/// Geometric tail bound after the last retained term. The coefficient
/// envelope is estimated from the maxima A1, A2 of two trailing windows of
/// width w: per-index growth G = 2 (A2/A1)^(1/w) (safety factor 2), and
/// with rho = |q_b| G the dropped terms |c_(M+k)| |q_b|^(M+k) are taken
/// below A2 |q_b|^M rho^k, so the tail is below A2 |q_b|^M rho / (1 - rho).
/// Window maxima make the estimate robust to isolated tiny coefficients.
fn tail_bound(s: &Series<BallCtx>, qb_abs: &BigFloat) -> Result<BigFloat> {
    let m = s.coeffs.len();
    if m == 0 {
        return Ok(BigFloat::from_i8(0, 64));
    }
    let w = 20.min(m / 2).max(1);
    let win_max = |lo: usize, hi: usize| {
        let mut a = BigFloat::from_i8(0, 64);
        for c in &s.coeffs[lo..hi] {
            let x = c.abs_ub();
            if x.cmp(&a) == Some(1) {
                a = x;
            }
        }
        a
    };
    let a2 = win_max(m - w, m);
    let a1 = win_max(m.saturating_sub(2 * w), m - w);
    let mut growth = 1.0f64;
    if !a1.is_zero() && !a2.is_zero() {
        let r = bigfloat_to_f64(&a2.div(&a1, 64, UP));
        if r.is_finite() && r > 0.0 {
            growth = r.powf(1.0 / w as f64);
        }
    }
    if !growth.is_finite() || growth <= 0.0 {
        growth = 1.0;
    }
    let g = BigFloat::from_f64(2.0 * growth, 64);
    let rho = qb_abs.mul(&g, 64, UP);
    if rho.cmp(&BigFloat::from_i8(1, 64)) != Some(-1) {
        return Err(Error::precision(
            "tail bound diverges: |q_b| * growth ratio >= 1",
        ));
    }
    let last = a2;
    // |q_b|^M with M = offset + m - 1, clamped below at exponent 0 since
    // |q_b| < 1 makes that an upper bound for a Laurent-only series
    let e = (s.offset + m as i64 - 1).max(0) as u64;
    let mut qp = BigFloat::from_i8(1, 64);
    let mut base = qb_abs.clone();
    let mut k = e;
    while k > 0 {
        if k & 1 == 1 {
            qp = qp.mul(&base, 64, UP);
        }
        base = base.mul(&base, 64, UP);
        k >>= 1;
    }
    let one_minus = BigFloat::from_i8(1, 64).sub(&rho, 64, RoundingMode::Down);
    let geo = rho.div(&one_minus, 64, UP);
    Ok(last.mul(&qp, 64, UP).mul(&geo, 64, UP))
}

/// Evaluate a ball series at q, including the Laurent part.
fn eval_series(s: &Series<BallCtx>, q: &ComplexBall) -> Result<ComplexBall> {
    let p = s.ctx.prec;
    let mut acc = ComplexBall::zero(p);
    for c in s.coeffs.iter().rev() {
        acc = acc.mul(q).add(c);
    }
    if s.offset > 0 {
        acc = acc.mul(&q.pow_u64(s.offset as u64));
    } else if s.offset < 0 {
        acc = acc.div(&q.pow_u64((-s.offset) as u64))?;
    }
    Ok(acc)
}

/// [s(q_b), s'(q_b)/1!, ..., s^(n)(q_b)/n!] as balls, each inflated by the
/// geometric tail bound.
pub fn taylor_at(s: &Series<BallCtx>, q_b: &ComplexBall, n: usize) -> Result<Vec<ComplexBall>> {
    let qabs = q_b.abs_ub();
    if qabs.cmp(&BigFloat::from_i8(1, 64)) != Some(-1) {
        return Err(Error::precision("|q_b| >= 1: series cannot converge"));
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = s.clone();
    let mut factorial = BigRational::one();
    for l in 0..=n {
        if l > 0 {
            cur = cur.derivative();
            factorial = factorial * BigRational::from(BigInt::from(l as i64));
        }
        let tail = tail_bound(&cur, &qabs)?;
        let v = eval_series(&cur, q_b)?.inflate(&tail);
        let inv_fact =
            ComplexBall::from_rational(&factorial.recip(), s.ctx.prec);
        out.push(v.mul(&inv_fact));
    }
    Ok(out)
}

/// Independent direct summation of a series at q (doubled precision, no tail
/// bound); test oracle only.
pub fn eval_direct(s: &Series<QCtx>, q: &ComplexBall) -> Result<ComplexBall> {
    let p = 2 * q.prec();
    let qq = ComplexBall::new(q.mid.clone(), q.rad.clone());
    eval_series(&to_ball_series(s, p), &qq)
}

// ---------- period lattice matching ----------

/// AGM of two complex numbers with the optimal square-root choice
/// |a' - b'| <= |a' + b'| at each step.
fn complex_agm(mut a: Cpx, mut b: Cpx) -> Cpx {
    let p = a.p;
    let eps = pow2(-(p as i64) + 8);
    for _ in 0..(p + 64) {
        let d = a.sub(&b).abs();
        let scale = a.abs();
        if d.cmp(&eps.mul(&scale, 64, UP)) == Some(-1) {
            break;
        }
        let am = a.add(&b).scale(&pow2(-1));
        let mut gm = a.mul(&b).sqrt();
        // choose the root closer to the arithmetic mean
        if am.sub(&gm).abs().cmp(&am.add(&gm).abs()) == Some(1) {
            gm = gm.neg();
        }
        a = am;
        b = gm;
    }
    a
}

/// Durand-Kerner for a monic cubic with complex coefficients.
fn cubic_roots(c0: &Cpx, c1: &Cpx, c2: &Cpx) -> [Cpx; 3] {
    let p = c0.p;
    let seed = Cpx::from_f64(0.4, 0.9, p);
    let mut z = [
        seed.clone(),
        seed.mul(&seed),
        seed.mul(&seed).mul(&seed),
    ];
    let eval = |x: &Cpx| {
        x.mul(x)
            .mul(x)
            .add(&c2.mul(&x.mul(x)))
            .add(&c1.mul(x))
            .add(c0)
    };
    let tol = pow2(-(p as i64) + 16);
    for _ in 0..(4 * p) {
        let mut max_step = BigFloat::from_i8(0, 64);
        for i in 0..3 {
            let mut den = Cpx::from_f64(1.0, 0.0, p);
            for j in 0..3 {
                if i != j {
                    den = den.mul(&z[i].sub(&z[j]));
                }
            }
            let step = eval(&z[i]).div(&den);
            let sa = step.abs();
            if sa.cmp(&max_step) == Some(1) {
                max_step = sa;
            }
            z[i] = z[i].sub(&step);
        }
        if max_step.cmp(&tol) == Some(-1) {
            break;
        }
    }
    z
}

/// Period ratio tau = w2/w1 (upper half plane) for y^2 = x^3 + Ax + B, up to
/// lattice homothety; approximate arithmetic.
fn period_ratio(a: &Cpx, b: &Cpx) -> Cpx {
    let p = a.p;
    let zero = Cpx::zero(p);
    let [e1, e2, e3] = cubic_roots(&b.clone(), &a.clone(), &zero);
    // w1 = pi / agm(sqrt(e1-e3), sqrt(e1-e2)); w2 = pi i / agm(sqrt(e1-e3), sqrt(e2-e3))
    let s13 = e1.sub(&e3).sqrt();
    let s12 = e1.sub(&e2).sqrt();
    let s23 = e2.sub(&e3).sqrt();
    let m1 = complex_agm(s13.clone(), s12);
    let m2 = complex_agm(s13, s23);
    // ratio w2/w1 = i * m1 / m2
    let i = Cpx::from_f64(0.0, 1.0, p);
    let mut tau = i.mul(&m1).div(&m2);
    if tau.im.is_negative() {
        tau = tau.neg();
    }
    tau
}

/// Reduce a point of the upper half plane into the SL2(Z) fundamental domain.
fn reduce_to_fundamental(mut z: Cpx) -> Cpx {
    let p = z.p;
    for _ in 0..10_000 {
        let re = bigfloat_to_f64(&z.re);
        let n = re.round();
        if n != 0.0 {
            z = z.sub(&Cpx::from_f64(n, 0.0, p));
        }
        let norm = z.abs_sq();
        if norm.cmp(&BigFloat::from_f64(0.999_999_999, 64)) == Some(-1) {
            z = z.inv().neg();
        } else if n == 0.0 {
            break;
        }
    }
    z
}

/// Loop over the complex embeddings of the field of j_E, compute the period
/// lattice of a curve with that j-invariant by AGM, and return the index of
/// the embedding whose lattice is homothetic to Z tau + Z.
pub fn match_lattice(j_e: &NfElt, r: i64, s: i64, prec: usize) -> Result<usize> {
    let disc = r * r - 4 * s;
    if disc >= 0 {
        return Err(Error::InvalidInput("tau is not imaginary quadratic".into()));
    }
    let p = prec.max(96);
    // target tau in the fundamental domain, at full working precision
    let tau_target = reduce_to_fundamental(form_to_tau(1, r, disc, p).mid);
    let degree = j_e.field.degree();
    let tol = pow2(-(p as i64) / 2);
    for idx in 0..degree {
        let jb = j_e.embed(idx, p)?;
        let j = jb.mid.clone();
        // skip embeddings at the singular j-values
        let j1728 = j.sub(&Cpx::from_f64(1728.0, 0.0, p));
        if j.abs().cmp(&pow2(-8)) == Some(-1) || j1728.abs().cmp(&pow2(-8)) == Some(-1) {
            continue;
        }
        // y^2 = x^3 + Ax + B with A = 3j(1728-j), B = 2j(1728-j)^2
        let k = j1728.neg();
        let a = j.mul(&k).scale(&BigFloat::from_i8(3, p));
        let b = j.mul(&k).mul(&k).scale(&BigFloat::from_i8(2, p));
        let tau = reduce_to_fundamental(period_ratio(&a, &b));
        let d = tau.sub(&tau_target).abs();
        if d.cmp(&tol) == Some(-1) {
            return Ok(idx);
        }
        // the mirror point -conj(tau) is the same lattice
        let mirror = Cpx::new(tau.re.neg(), tau.im.clone(), p);
        if mirror.sub(&tau_target).abs().cmp(&tol) == Some(-1) {
            return Ok(idx);
        }
    }
    Err(Error::Inconsistent(
        "no complex embedding of j_E yields a lattice homothetic to Z tau + Z".into(),
    ))
}
