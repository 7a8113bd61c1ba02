//! Helpers for exact rational and integer arithmetic: p-adic valuations of
//! rationals and integer factorization at desk scale.

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

/// p-adic valuation of a nonzero integer.
pub fn val_p_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&p);
        if r.is_zero() {
            v += 1;
            n = q;
        } else {
            return v;
        }
    }
}

/// p-adic valuation of a nonzero rational.
pub fn val_p(x: &BigRational, p: u64) -> i64 {
    val_p_int(x.numer(), p) - val_p_int(x.denom(), p)
}

pub fn big_rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// p^k for a rational exponent is not a rational; this is plain integer power.
pub fn int_pow(p: u64, k: u64) -> BigInt {
    BigInt::from(p).pow(k as u32)
}

fn pollard_rho(n: &BigUint) -> BigUint {
    use num::ToPrimitive;
    let mut rng = rand_like::SplitMix::new(0x9e3779b97f4a7c15 ^ n.to_u64().unwrap_or(0xabcd));
    let one = BigUint::one();
    loop {
        let c = BigUint::from(rng.next() % 1_000_000 + 1);
        let mut x = BigUint::from(rng.next() % 1_000_000 + 2);
        let mut y = x.clone();
        let mut d = one.clone();
        while d.is_one() {
            x = (&x * &x + &c) % n;
            y = (&y * &y + &c) % n;
            y = (&y * &y + &c) % n;
            let diff = if x > y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break;
            }
            d = diff.gcd(n);
        }
        if !d.is_one() && &d != n {
            return d;
        }
    }
}

fn is_prime(n: &BigUint) -> bool {
    // Miller-Rabin with fixed bases; deterministic far beyond desk scale.
    use num::ToPrimitive;
    if let Some(n) = n.to_u64() {
        return is_prime_u64(n);
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'bases: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let a = BigUint::from(a);
        if &a >= n {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == nm1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let nm1 = n - 1;
    let s = nm1.trailing_zeros();
    let d = nm1 >> s;
    'bases: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow_u64(a, d, n);
        if x == 1 || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul_u64(x, x, n);
            if x == nm1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn mod_mul_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mod_pow_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mul_u64(acc, b, m);
        }
        b = mod_mul_u64(b, b, m);
        e >>= 1;
    }
    acc
}

/// Prime factorization of |n|, ascending, with multiplicities.
pub fn factor(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs().to_biguint().unwrap();
    if n.is_zero() || n.is_one() {
        return vec![];
    }
    let mut small = Vec::new();
    for p in 2u64..=100_000 {
        if &BigUint::from(p) * &BigUint::from(p) > n {
            break;
        }
        let bp = BigUint::from(p);
        while (&n % &bp).is_zero() {
            small.push(BigUint::from(p));
            n = &n / &bp;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            small.push(m);
        } else {
            let d = pollard_rho(&m);
            stack.push(&m / &d);
            stack.push(d);
        }
    }
    small.sort();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    for p in small {
        let p = BigInt::from(p);
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Distinct primes dividing numerator or denominator of a nonzero rational.
pub fn rational_primes(x: &BigRational) -> Vec<BigInt> {
    let mut ps: Vec<BigInt> = factor(x.numer()).into_iter().map(|(p, _)| p).collect();
    ps.extend(factor(x.denom()).into_iter().map(|(p, _)| p));
    ps.sort();
    ps.dedup();
    ps
}

// Tiny deterministic PRNG for pollard_rho; no need to drag rand into the lib.
mod rand_like {
    pub struct SplitMix(u64);
    impl SplitMix {
        pub fn new(seed: u64) -> Self {
            SplitMix(seed)
        }
        pub fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations() {
        assert_eq!(val_p(&big_rational(50, 1), 5), 2);
        assert_eq!(val_p(&big_rational(3, 25), 5), -2);
        assert_eq!(val_p(&big_rational(7, 2), 5), 0);
    }

    #[test]
    fn factor_small() {
        let f = factor(&BigInt::from(1729));
        assert_eq!(
            f,
            vec![
                (BigInt::from(7), 1),
                (BigInt::from(13), 1),
                (BigInt::from(19), 1)
            ]
        );
        assert_eq!(factor(&BigInt::from(-1725)).len(), 3); // 3 * 5^2 * 23
    }

    #[test]
    fn factor_large_semiprime() {
        let n = BigInt::from(1_000_003i64) * BigInt::from(999_983i64);
        let f = factor(&n);
        assert_eq!(f.len(), 2);
    }
}
