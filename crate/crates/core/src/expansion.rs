//! From Taylor data at the basepoint to the coefficients of g(t) dt: build
//! the lower-triangular transition matrix M from the a_l, solve c = M^-1 b by
//! forward substitution, and rescale by the denominator certificate.
//!
//! The recurrence is field-agnostic; the exact rational instantiation doubles
//! as a test oracle for the production ball path.

use num::rational::BigRational;
use num::{BigInt, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::exact::ball::ComplexBall;
use crate::series::{RingCtx, Series};

/// Taylor data at q_b: t = sum a_l (q - q_b)^l (l >= 1) and
/// f = sum b_l (q - q_b)^l.
#[derive(Clone, Debug)]
pub struct CoeffSystem<R: RingCtx> {
    pub ctx: R,
    /// a_1 .. a_{n+1}
    pub a: Vec<R::Elem>,
    /// b_0 .. b_n
    pub b: Vec<R::Elem>,
    pub n: usize,
}

impl<R: RingCtx> CoeffSystem<R> {
    pub fn new(ctx: R, a: Vec<R::Elem>, b: Vec<R::Elem>, n: usize) -> Result<Self> {
        if a.len() != n + 1 || b.len() != n + 1 {
            return Err(Error::InvalidInput(format!(
                "coefficient system size mismatch: need {} a's and {} b's, got {} and {}",
                n + 1,
                n + 1,
                a.len(),
                b.len()
            )));
        }
        Ok(CoeffSystem { ctx, a, b, n })
    }
}

/// Lower-triangular M, 0-indexed (n+1)x(n+1):
/// M_{l,0} = (l+1) a_{l+1}; M_{l,j} = sum_{k=1}^{l-j+1} a_k M_{l-k,j-1}.
pub fn build_m<R: RingCtx>(sys: &CoeffSystem<R>) -> Vec<Vec<R::Elem>> {
    let ctx = &sys.ctx;
    let n = sys.n;
    let mut m: Vec<Vec<R::Elem>> = (0..=n)
        .map(|_| (0..=n).map(|_| ctx.zero()).collect())
        .collect();
    for l in 0..=n {
        m[l][0] = ctx.mul_i64(&sys.a[l], (l + 1) as i64);
    }
    for j in 1..=n {
        for l in j..=n {
            let mut s = ctx.zero();
            for k in 1..=(l - j + 1) {
                let t = ctx.mul(&sys.a[k - 1], &m[l - k][j - 1]);
                s = ctx.add(&s, &t);
            }
            m[l][j] = s;
        }
    }
    m
}

/// Solve M c = b by forward substitution.
pub fn solve_coeffs<R: RingCtx>(sys: &CoeffSystem<R>) -> Result<Vec<R::Elem>> {
    let ctx = &sys.ctx;
    let m = build_m(sys);
    let n = sys.n;
    let mut c: Vec<R::Elem> = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let mut rhs = sys.b[l].clone();
        for (j, cj) in c.iter().enumerate() {
            let t = ctx.mul(&m[l][j], cj);
            rhs = ctx.sub(&rhs, &t);
        }
        let diag_inv = ctx.inv(&m[l][l]).map_err(|_| Error::Precision {
            msg: format!("singular system: diagonal entry at index {l} is not invertible"),
            required_bits: None,
        })?;
        c.push(ctx.mul(&rhs, &diag_inv));
    }
    Ok(c)
}

/// Recompose sum c_l t(s)^l t'(s) from solved coefficients; equals
/// sum b_l s^l when the solve is exact. Test oracle.
pub fn recompose<R: RingCtx>(sys: &CoeffSystem<R>, c: &[R::Elem]) -> Vec<R::Elem> {
    let ctx = &sys.ctx;
    let n = sys.n;
    let bound = (n + 1) as i64;
    let t = Series::new(ctx.clone(), 1, sys.a.clone());
    let tp = t.derivative();
    let mut acc = Series::zero(ctx.clone(), n + 1);
    let mut tpow = Series::monomial(ctx.clone(), ctx.one(), 0, n + 1);
    for cl in c {
        acc = acc.add(&tpow.mul(&tp).truncate_bound(bound).scale(cl));
        tpow = tpow.mul(&t).truncate_bound(bound);
    }
    (0..bound).map(|k| acc.get(k)).collect()
}

/// Oracle for build_m: column j of M is the coefficient sequence of
/// t(s)^j t'(s).
pub fn m_column_oracle<R: RingCtx>(sys: &CoeffSystem<R>, j: usize) -> Vec<R::Elem> {
    let ctx = &sys.ctx;
    let n = sys.n;
    let bound = (n + 1) as i64;
    let t = Series::new(ctx.clone(), 1, sys.a.clone());
    let tp = t.derivative();
    let col = t.pow_u64(j as u64, bound).mul(&tp).truncate_bound(bound);
    (0..bound).map(|k| col.get(k)).collect()
}

/// One prime's contribution to the denominator certificate: exponent rate r
/// so that the prime enters C^[n] as p^ceil(n r).
pub type CertPrimes = Vec<(BigInt, BigRational)>;

/// C^[n] = prod p^ceil(n r_p); an exact positive integer.
pub fn cert_multiplier(primes: &CertPrimes, n: u64) -> BigInt {
    let mut c = BigInt::from(1);
    for (p, r) in primes {
        let e = (r * BigRational::from(BigInt::from(n))).ceil().to_integer();
        if e.is_positive() {
            c *= p.pow(e.to_u32().expect("certificate exponent fits u32"));
        }
    }
    c
}

/// [c_l * C^[l+1]]_l: candidate algebraic integers for recovery.
pub fn rescale(c: &[ComplexBall], primes: &CertPrimes) -> Vec<ComplexBall> {
    c.iter()
        .enumerate()
        .map(|(l, cl)| {
            let m = cert_multiplier(primes, (l + 1) as u64);
            cl.mul(&ComplexBall::from_bigint(&m, cl.prec()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::big_rational;
    use crate::series::{BallCtx, QCtx};

    fn qsys(a: &[i64], b: &[i64]) -> CoeffSystem<QCtx> {
        let n = a.len() - 1;
        CoeffSystem::new(
            QCtx,
            a.iter().map(|&x| big_rational(x, 1)).collect(),
            b.iter().map(|&x| big_rational(x, 1)).collect(),
            n,
        )
        .unwrap()
    }

    #[test]
    fn smallest_case() {
        let sys = qsys(&[5], &[10]);
        let m = build_m(&sys);
        assert_eq!(m[0][0], big_rational(5, 1));
        assert_eq!(solve_coeffs(&sys).unwrap(), vec![big_rational(2, 1)]);
    }

    #[test]
    fn t_equals_s_plus_s_squared() {
        // a = (1,1,0,0): M column 0 = [1,2,0,0], column 1 = [0,1,3,2]
        let sys = qsys(&[1, 1, 0, 0], &[0, 0, 0, 0]);
        let m = build_m(&sys);
        assert_eq!(m[0][0], big_rational(1, 1));
        assert_eq!(m[1][0], big_rational(2, 1));
        assert_eq!(m[2][0], big_rational(0, 1));
        assert_eq!(m[3][0], big_rational(0, 1));
        assert_eq!(m[1][1], big_rational(1, 1));
        assert_eq!(m[2][1], big_rational(3, 1));
        assert_eq!(m[3][1], big_rational(2, 1));
    }

    #[test]
    fn hand_checked_2x2_solve() {
        // a=(1,1), b=[1,3] -> c=[1,1]
        let sys = qsys(&[1, 1], &[1, 3]);
        let c = solve_coeffs(&sys).unwrap();
        assert_eq!(c, vec![big_rational(1, 1), big_rational(1, 1)]);
    }

    #[test]
    fn b_equals_column_zero_gives_unit_vector() {
        let sys0 = qsys(&[3, -2, 5, 7, 1], &[0, 0, 0, 0, 0]);
        let m = build_m(&sys0);
        let b: Vec<_> = (0..=4).map(|l| m[l][0].clone()).collect();
        let sys = CoeffSystem::new(QCtx, sys0.a.clone(), b, 4).unwrap();
        let c = solve_coeffs(&sys).unwrap();
        assert_eq!(c[0], big_rational(1, 1));
        for cl in &c[1..] {
            assert_eq!(*cl, big_rational(0, 1));
        }
    }

    #[test]
    fn columns_match_series_oracle() {
        use crate::exact::rat::big_rational as br;
        // deterministic pseudo-random small integers
        let mut x = 37i64;
        let mut next = || {
            x = (x * 1103515245 + 12345) % 1000;
            x % 7 - 3
        };
        for n in [4usize, 8, 16] {
            let mut a: Vec<i64> = (0..=n).map(|_| next()).collect();
            a[0] = 1 + a[0].abs(); // a_1 must be a unit
            let sys = qsys(&a, &vec![0; n + 1]);
            let m = build_m(&sys);
            for j in 0..=n {
                let col = m_column_oracle(&sys, j);
                for l in 0..=n {
                    assert_eq!(m[l][j], col[l], "M[{l}][{j}] vs oracle, n={n}");
                }
                let _ = br(0, 1);
            }
        }
    }

    #[test]
    fn exact_recomposition_is_identity() {
        let mut x = 11i64;
        let mut next = || {
            x = (x * 48271) % 2147483647;
            x % 9 - 4
        };
        let n = 12usize;
        let mut a: Vec<i64> = (0..=n).map(|_| next()).collect();
        a[0] = 2;
        let b: Vec<i64> = (0..=n).map(|_| next()).collect();
        let sys = qsys(&a, &b);
        let c = solve_coeffs(&sys).unwrap();
        let back = recompose(&sys, &c);
        for l in 0..=n {
            assert_eq!(back[l], big_rational(b[l], 1), "recomposed b_{l}");
        }
    }

    #[test]
    fn ball_solve_contains_exact_solution() {
        let a = [3i64, -1, 4, -1, 5];
        let b = [9i64, -2, 6, 5, 3];
        let exact = solve_coeffs(&qsys(&a, &b)).unwrap();
        let ctx = BallCtx { prec: 128 };
        let sys = CoeffSystem::new(
            ctx.clone(),
            a.iter().map(|&x| ComplexBall::from_i64(x, 128)).collect(),
            b.iter().map(|&x| ComplexBall::from_i64(x, 128)).collect(),
            4,
        )
        .unwrap();
        let c = solve_coeffs(&sys).unwrap();
        for (ball, ex) in c.iter().zip(&exact) {
            assert!(ball.contains_rational(ex));
        }
    }

    #[test]
    fn singular_diagonal_reports_index() {
        let ctx = BallCtx { prec: 64 };
        let zeroish = ComplexBall::new(
            crate::exact::cpx::Cpx::zero(64),
            crate::exact::cpx::pow2(-5),
        );
        let sys = CoeffSystem::new(
            ctx.clone(),
            vec![zeroish, ComplexBall::one(64)],
            vec![ComplexBall::one(64), ComplexBall::one(64)],
            1,
        )
        .unwrap();
        let err = solve_coeffs(&sys).unwrap_err();
        assert!(err.to_string().contains("index 0"), "got {err}");
    }

    #[test]
    fn rescale_multipliers() {
        let primes_empty: CertPrimes = vec![];
        assert_eq!(cert_multiplier(&primes_empty, 3), BigInt::from(1));
        let primes = vec![(BigInt::from(5), big_rational(1, 4))];
        assert_eq!(cert_multiplier(&primes, 3), BigInt::from(5)); // 5^ceil(3/4)
        let primes2 = vec![
            (BigInt::from(5), big_rational(1, 4)),
            (BigInt::from(7), big_rational(1, 2)),
        ];
        assert_eq!(cert_multiplier(&primes2, 3), BigInt::from(5 * 49)); // l=2: C^[3]
        let c = vec![ComplexBall::from_i64(1, 64); 3];
        let r = rescale(&c, &primes2);
        assert!(r[2].contains_rational(&big_rational(245, 1)));
    }
}
