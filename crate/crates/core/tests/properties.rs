//! Randomized invariants of the arithmetic kernels.

use std::sync::Arc;

use num::rational::BigRational;
use num::{BigInt, Zero};
use proptest::prelude::*;

use cm_expand::exact::ball::ComplexBall;
use cm_expand::exact::modmatrix::ModMatrix;
use cm_expand::exact::nf::{NfElt, NumberField};
use cm_expand::exact::padic::PadicElement;
use cm_expand::expansion::{cert_multiplier, recompose, solve_coeffs, CoeffSystem, CertPrimes};
use cm_expand::formal_group::newton_polygon;
use cm_expand::recover::smith_form;
use cm_expand::series::{QCtx, Series};

fn brat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn arb_rat() -> impl Strategy<Value = BigRational> {
    (-40i64..=40, 1i64..=9).prop_map(|(n, d)| brat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // enclosure soundness: ball operations contain the exact rational result
    #[test]
    fn ball_ops_contain_exact(a in arb_rat(), b in arb_rat()) {
        let prec = 96;
        let xa = ComplexBall::from_rational(&a, prec);
        let xb = ComplexBall::from_rational(&b, prec);
        prop_assert!(xa.add(&xb).contains_rational(&(&a + &b)));
        prop_assert!(xa.sub(&xb).contains_rational(&(&a - &b)));
        prop_assert!(xa.mul(&xb).contains_rational(&(&a * &b)));
    }

    // series composition distributes over multiplication
    #[test]
    fn series_compose_multiplicative(
        f1 in proptest::collection::vec(arb_rat(), 1..6),
        f2 in proptest::collection::vec(arb_rat(), 1..6),
        g in proptest::collection::vec(arb_rat(), 1..6),
    ) {
        let bound = 6i64;
        let s1 = Series::new(QCtx, 0, f1).truncate_bound(bound);
        let s2 = Series::new(QCtx, 0, f2).truncate_bound(bound);
        // inner series must have positive valuation
        let inner = Series::new(QCtx, 1, g).truncate_bound(bound);
        let lhs = s1.mul(&s2).truncate_bound(bound).compose(&inner).unwrap();
        let rhs = s1.compose(&inner).unwrap().mul(&s2.compose(&inner).unwrap());
        for k in 0..bound.min(lhs.bound()).min(rhs.bound()) {
            prop_assert_eq!(lhs.get(k), rhs.get(k));
        }
    }

    // reversion is a two-sided compositional inverse
    #[test]
    fn series_reversion_round_trip(
        lead in (1i64..=5, 1i64..=5).prop_map(|(n, d)| brat(n, d)),
        rest in proptest::collection::vec(arb_rat(), 0..5),
    ) {
        let mut coeffs = vec![lead];
        coeffs.extend(rest);
        let bound = coeffs.len() as i64 + 1;
        let t = Series::new(QCtx, 1, coeffs).truncate_bound(bound);
        let r = t.reversion().unwrap();
        let id = t.compose(&r).unwrap();
        prop_assert_eq!(id.get(1), brat(1, 1));
        for k in 2..bound.min(id.bound()) {
            prop_assert_eq!(id.get(k), BigRational::zero());
        }
    }

    // the triangular solve always recomposes its right-hand side exactly
    #[test]
    fn solver_recomposes(
        a in proptest::collection::vec(arb_rat(), 2..8),
        seed in 0u64..1000,
    ) {
        let n = a.len() - 1;
        let mut a = a;
        if a[0].is_zero() {
            a[0] = brat(1 + (seed % 5) as i64, 1);
        }
        let b: Vec<BigRational> =
            (0..=n).map(|k| brat((seed as i64 + k as i64 * 7) % 23 - 11, 3)).collect();
        let sys = CoeffSystem::new(QCtx, a, b.clone(), n).unwrap();
        let c = solve_coeffs(&sys).unwrap();
        prop_assert_eq!(recompose(&sys, &c), b);
    }

    // Newton polygon: lower hull of the input, vertices on input points,
    // slopes strictly decreasing in the (y1-y2)/(x2-x1) convention
    #[test]
    fn newton_polygon_is_lower_hull(
        ys in proptest::collection::vec((0i64..40, 1i64..7), 2..20),
    ) {
        let pts: Vec<(i64, Option<BigRational>)> = ys
            .iter()
            .enumerate()
            .map(|(i, &(n, d))| (i as i64, Some(brat(n, d))))
            .collect();
        let poly = newton_polygon(&pts).unwrap();
        for (x, y) in pts.iter().filter_map(|(x, y)| y.clone().map(|y| (*x, y))) {
            let h = poly.value_at(x).unwrap();
            prop_assert!(y >= h, "input point below hull");
        }
        for (x, y) in &poly.vertices {
            prop_assert!(pts.iter().any(|(px, py)| px == x && py.as_ref() == Some(y)));
        }
        let slopes = poly.slopes();
        for w in slopes.windows(2) {
            prop_assert!(w[0] > w[1]);
        }
    }

    // certificate multipliers are positive and monotone under divisibility
    #[test]
    fn certificate_multiplier_monotone(
        rates in proptest::collection::vec((2u64..50, 0i64..9, 1i64..5), 0..4),
        n in 1u64..80,
    ) {
        let primes: CertPrimes = rates
            .iter()
            .map(|&(p, num, den)| (BigInt::from(p), brat(num, den)))
            .collect();
        let c_n = cert_multiplier(&primes, n);
        let c_n1 = cert_multiplier(&primes, n + 1);
        prop_assert!(c_n > BigInt::zero());
        prop_assert!((&c_n1 % &c_n).is_zero());
    }

    // matrix group identities in GL2(Z/N)
    #[test]
    fn modmatrix_inverse_of_product(
        n in prop_oneof![Just(5u64), Just(7), Just(11), Just(13)],
        a in proptest::array::uniform4(0i64..25),
        b in proptest::array::uniform4(0i64..25),
    ) {
        let ma = ModMatrix::from_signed(n, a);
        let mb = ModMatrix::from_signed(n, b);
        prop_assume!(ma.inv().is_ok() && mb.inv().is_ok());
        let lhs = ma.mul(&mb).unwrap().inv().unwrap();
        let rhs = mb.inv().unwrap().mul(&ma.inv().unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(
            ma.mul(&ma.inv().unwrap()).unwrap(),
            ModMatrix::identity(n)
        );
    }

    // number field norms are multiplicative and embeddings respect products
    #[test]
    fn nf_norm_multiplicative(
        x in proptest::collection::vec(arb_rat(), 2),
        y in proptest::collection::vec(arb_rat(), 2),
    ) {
        let f = NumberField::new(vec![BigInt::from(3), BigInt::from(-1), BigInt::from(1)]).unwrap();
        let a = NfElt::new(f.clone(), x);
        let b = NfElt::new(f.clone(), y);
        let ab = a.mul(&b);
        prop_assert_eq!(ab.norm(), a.norm() * b.norm());
        let prec = 128;
        for idx in 0..2 {
            let lhs = ab.embed(idx, prec).unwrap();
            let rhs = a.embed(idx, prec).unwrap().mul(&b.embed(idx, prec).unwrap());
            prop_assert!(lhs.intersects(&rhs));
        }
    }

    // p-adic valuations are additive under multiplication
    #[test]
    fn padic_valuation_additive(
        x in arb_rat().prop_filter("nonzero", |x| !x.is_zero()),
        y in arb_rat().prop_filter("nonzero", |y| !y.is_zero()),
        p in prop_oneof![Just(5u64), Just(7), Just(13)],
    ) {
        let prec = brat(40, 1);
        let a = PadicElement::from_rational(p, 1, &x, prec.clone());
        let b = PadicElement::from_rational(p, 1, &y, prec);
        let v = a.mul(&b).val().unwrap();
        prop_assert_eq!(v, a.val().unwrap() + b.val().unwrap());
    }

    // Smith normal form: invariant factors divide in order and the group
    // order matches the index of the relation lattice
    #[test]
    fn smith_form_divisibility(
        m in proptest::collection::vec(proptest::array::uniform3(-6i64..=6), 3),
    ) {
        let rel: Vec<Vec<BigInt>> =
            m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let det: i64 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        prop_assume!(det != 0);
        let (dims, _) = smith_form(&rel).unwrap();
        let order: BigInt = dims.iter().product();
        prop_assert_eq!(order, BigInt::from(det.abs()));
        for w in dims.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
    }
}

// keep Arc in scope for NumberField::new's return type inference above
#[allow(dead_code)]
fn _field_ty(f: Arc<NumberField>) -> Arc<NumberField> {
    f
}
