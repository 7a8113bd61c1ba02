//! Certified complex roots of squarefree rational polynomials.
//!
//! Approximation by Durand-Kerner iteration, then a posteriori certification:
//! around each approximation z the disk of radius n*|f(z)/f'(z)| contains a
//! root, and if the n disks are pairwise disjoint each contains exactly one.

use astro_float::BigFloat;
use num::rational::BigRational;
use num::{Signed, Zero};

use super::ball::ComplexBall;
use super::cpx::{bigfloat_to_rational, Cpx};
use crate::error::{Error, Result};

fn poly_deg(f: &[BigRational]) -> usize {
    f.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
}

fn poly_derivative(f: &[BigRational]) -> Vec<BigRational> {
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(i.into()))
        .collect()
}

fn poly_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let db = poly_deg(b);
    let mut r = a.to_vec();
    while poly_deg(&r) >= db && !(poly_deg(&r) == 0 && r[0].is_zero()) {
        let dr = poly_deg(&r);
        if dr < db {
            break;
        }
        let q = &r[dr] / &b[db];
        for i in 0..=db {
            let t = &q * &b[i];
            r[dr - db + i] -= t;
        }
        r.truncate(poly_deg(&r) + 1);
        if r.iter().all(|c| c.is_zero()) {
            return vec![BigRational::zero()];
        }
    }
    r
}

/// Is gcd(f, f') constant?
pub fn is_squarefree(f: &[BigRational]) -> bool {
    let mut a = f.to_vec();
    let mut b = poly_derivative(f);
    while !(poly_deg(&b) == 0 && b[0].is_zero()) {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    poly_deg(&a) == 0
}

fn eval_cpx(f: &[Cpx], z: &Cpx) -> Cpx {
    let mut acc = Cpx::zero(z.p);
    for c in f.iter().rev() {
        acc = acc.mul(z).add(c);
    }
    acc
}

fn eval_ball(f: &[BigRational], z: &ComplexBall) -> ComplexBall {
    let p = z.prec();
    let mut acc = ComplexBall::zero(p);
    for c in f.iter().rev() {
        acc = acc.mul(z).add(&ComplexBall::from_rational(c, p));
    }
    acc
}

/// All complex roots of a squarefree polynomial, as pairwise disjoint balls,
/// ordered lexicographically by (real, imaginary) midpoint.
pub fn isolate_roots(f: &[BigRational], prec: usize) -> Result<Vec<ComplexBall>> {
    let n = poly_deg(f);
    if n == 0 {
        return Err(Error::InvalidInput("constant polynomial has no roots".into()));
    }
    if !is_squarefree(f) {
        return Err(Error::InvalidInput(
            "defining polynomial is not squarefree".into(),
        ));
    }
    let work = 2 * prec + 64;
    let rm = astro_float::RoundingMode::ToEven;

    // monic rescale in approximate arithmetic
    let lead = &f[n];
    let fc: Vec<Cpx> = f[..=n]
        .iter()
        .map(|c| Cpx::from_rationals(&(c / lead), &BigRational::zero(), work))
        .collect();

    // Durand-Kerner from a spiral start scaled by the Cauchy root bound
    let cauchy = 1.0
        + f[..n]
            .iter()
            .map(|c| {
                let r = c / lead;
                let v = r.numer().to_string().len() as i32 - r.denom().to_string().len() as i32;
                // cheap magnitude estimate: 10^(digit difference + 1)
                10f64.powi(v + 1)
            })
            .fold(0.0f64, f64::max);
    let seed = Cpx::from_f64(0.4, 0.9, work);
    let scale = BigFloat::from_f64(cauchy, work);
    let mut z: Vec<Cpx> = Vec::with_capacity(n);
    let mut acc = Cpx::from_f64(1.0, 0.0, work);
    for _ in 0..n {
        acc = acc.mul(&seed);
        z.push(acc.scale(&scale));
    }
    let tol = super::cpx::pow2(-(work as i64) + 8).mul(
        &BigFloat::from_f64(cauchy.max(1.0), 64),
        64,
        astro_float::RoundingMode::Up,
    );
    let max_iter = 100 + 20 * work / n.max(1);
    let mut converged = false;
    for _ in 0..max_iter {
        let mut max_step = BigFloat::from_i8(0, 64);
        for i in 0..n {
            let mut den = Cpx::from_f64(1.0, 0.0, work);
            for j in 0..n {
                if j != i {
                    den = den.mul(&z[i].sub(&z[j]));
                }
            }
            let num = eval_cpx(&fc, &z[i]);
            let step = num.div(&den);
            let sa = step.abs();
            if sa.cmp(&max_step) == Some(1) {
                max_step = sa;
            }
            z[i] = z[i].sub(&step);
        }
        if max_step.cmp(&tol) == Some(-1) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::precision_hint(
            "root iteration did not converge",
            2 * work,
        ));
    }

    // certify: disk of radius n*|f(z)/f'(z)| around each z contains a root
    let df = poly_derivative(f);
    let nf = BigFloat::from_u64(n as u64, 64);
    let mut balls = Vec::with_capacity(n);
    for zi in &z {
        let zb = ComplexBall::exact(Cpx::new(
            zi.re.add(&BigFloat::from_i8(0, prec), prec, rm),
            zi.im.add(&BigFloat::from_i8(0, prec), prec, rm),
            prec,
        ));
        let fv = eval_ball(f, &zb);
        let dv = eval_ball(&df, &zb);
        let dlb = dv.abs_lb();
        if dlb.is_zero() {
            return Err(Error::precision_hint(
                "derivative indistinguishable from 0 at approximate root",
                2 * work,
            ));
        }
        let r = fv
            .abs_ub()
            .mul(&nf, 64, astro_float::RoundingMode::Up)
            .div(&dlb, 64, astro_float::RoundingMode::Up)
            .add(&zb.rad, 64, astro_float::RoundingMode::Up);
        balls.push(zb.inflate(&r));
    }

    // pairwise disjointness makes the count exact
    for i in 0..n {
        for j in i + 1..n {
            let d = balls[i].mid.sub(&balls[j].mid);
            let gap = ComplexBall::exact(d).abs_lb();
            let rr = balls[i]
                .rad
                .add(&balls[j].rad, 64, astro_float::RoundingMode::Up);
            if gap.cmp(&rr) != Some(1) {
                return Err(Error::precision_hint(
                    "root enclosures overlap; roots not isolated",
                    2 * work,
                ));
            }
        }
    }

    balls.sort_by(|a, b| {
        let (ar, ai) = (
            bigfloat_to_rational(&a.mid.re),
            bigfloat_to_rational(&a.mid.im),
        );
        let (br, bi) = (
            bigfloat_to_rational(&b.mid.re),
            bigfloat_to_rational(&b.mid.im),
        );
        ar.cmp(&br).then(ai.cmp(&bi))
    });
    Ok(balls)
}

/// Roots with tiny imaginary midpoint snapped onto the real axis when the
/// ball still certifies (used for real embeddings of real roots).
pub fn real_part_if_real(b: &ComplexBall) -> Option<BigRational> {
    let im = bigfloat_to_rational(&b.mid.im).abs();
    let r = bigfloat_to_rational(&b.rad);
    if im <= r {
        Some(bigfloat_to_rational(&b.mid.re))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::big_rational;

    fn br(n: i64) -> BigRational {
        big_rational(n, 1)
    }

    #[test]
    fn squarefree_detection() {
        // (x-1)^2 = x^2 - 2x + 1
        assert!(!is_squarefree(&[br(1), br(-2), br(1)]));
        assert!(is_squarefree(&[br(-2), br(0), br(1)])); // x^2 - 2
        assert!(is_squarefree(&[br(1), br(1), br(1)])); // x^2 + x + 1
    }

    #[test]
    fn roots_of_x2_plus_1() {
        let roots = isolate_roots(&[br(1), br(0), br(1)], 128).unwrap();
        assert_eq!(roots.len(), 2);
        // sorted by (re, im): -i before +i
        assert!(roots[0].contains_point(&br(0), &br(-1)));
        assert!(roots[1].contains_point(&br(0), &br(1)));
    }

    #[test]
    fn roots_of_x2_minus_2_match_sqrt2() {
        let roots = isolate_roots(&[br(-2), br(0), br(1)], 192).unwrap();
        // independent high-precision sqrt(2) via astro-float
        let two = astro_float::BigFloat::from_i8(2, 256);
        let s = two.sqrt(256, astro_float::RoundingMode::ToEven);
        let sq = bigfloat_to_rational(&s);
        assert!(roots[1].contains_rational(&sq));
        assert!(roots[0].contains_rational(&(-&sq)));
    }

    #[test]
    fn quintic_root_count_and_isolation() {
        // x^5 - x - 1, irreducible with one real root
        let f = [br(-1), br(-1), br(0), br(0), br(0), br(1)];
        let roots = isolate_roots(&f, 128).unwrap();
        assert_eq!(roots.len(), 5);
        let real: Vec<_> = roots.iter().filter_map(real_part_if_real).collect();
        assert_eq!(real.len(), 1);
        use num::FromPrimitive;
        let x = BigRational::from_f64(1.1673039782614187).unwrap();
        let d = &real[0] - &x;
        assert!(d.abs() < big_rational(1, 1_000_000_000));
    }

    #[test]
    fn non_squarefree_rejected() {
        let err = isolate_roots(&[br(1), br(-2), br(1)], 64).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
