//! The rational quaternion algebra ramified at {p, infinity}, a maximal
//! order Z_{p,inf} with its reduced-discriminant certificate, embeddings of
//! CM orders by trace/norm lattice enumeration, and the undetermined
//! coefficients computation of the matrix sets M_u and M_{j0}.

use num::integer::Roots;
use num::rational::BigRational;
use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::linalg::{integer_kernel, smith_normal_form, QMat};
use crate::exact::modmatrix::ModMatrix;
use crate::exact::rat::big_rational;

/// B = (a, b / Q): i^2 = a, j^2 = b, ij = -ji = k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuaternionAlgebra {
    pub p: u64,
    pub a: i64,
    pub b: i64,
}

/// Coordinates in the algebra basis 1, i, j, k.
pub type Quat = [BigRational; 4];

pub fn quat_from_i64(c: [i64; 4]) -> Quat {
    c.map(|x| big_rational(x, 1))
}

fn legendre(mut a: u64, p: u64) -> i64 {
    // a^((p-1)/2) mod p
    a %= p;
    if a == 0 {
        return 0;
    }
    let mut e = (p - 1) / 2;
    let mut acc: u64 = 1;
    let mut base = a;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

impl QuaternionAlgebra {
    /// Structure constants ramifying exactly {p, infinity}: (-1, -p) for
    /// p = 3 mod 4, else (-q, -p) with q = 3 mod 4 prime and (p/q) = -1.
    pub fn ramified_at(p: u64) -> Result<Self> {
        if p < 5 {
            return Err(Error::OutOfScope(format!("p = {p} < 5 not supported")));
        }
        if p % 4 == 3 {
            return Ok(QuaternionAlgebra { p, a: -1, b: -(p as i64) });
        }
        let mut q = 3u64;
        loop {
            let is_prime = (2..=q.sqrt()).all(|d| q % d != 0);
            if is_prime && q % 4 == 3 && legendre(p, q) == -1 {
                return Ok(QuaternionAlgebra { p, a: -(q as i64), b: -(p as i64) });
            }
            q += 4;
            if q > 10_000 {
                return Err(Error::Internal(format!(
                    "no auxiliary prime q = 3 mod 4 with (p/q) = -1 below 10000 for p = {p}"
                )));
            }
        }
    }

    pub fn mul(&self, x: &Quat, y: &Quat) -> Quat {
        let a = big_rational(self.a, 1);
        let b = big_rational(self.b, 1);
        let ab = &a * &b;
        [
            &x[0] * &y[0] + &a * &x[1] * &y[1] + &b * &x[2] * &y[2] - &ab * &x[3] * &y[3],
            &x[0] * &y[1] + &x[1] * &y[0] - &b * &x[2] * &y[3] + &b * &x[3] * &y[2],
            &x[0] * &y[2] + &x[2] * &y[0] + &a * &x[1] * &y[3] - &a * &x[3] * &y[1],
            &x[0] * &y[3] + &x[3] * &y[0] + &x[1] * &y[2] - &x[2] * &y[1],
        ]
    }

    pub fn conj(&self, x: &Quat) -> Quat {
        [x[0].clone(), -&x[1], -&x[2], -&x[3]]
    }

    pub fn add(&self, x: &Quat, y: &Quat) -> Quat {
        [&x[0] + &y[0], &x[1] + &y[1], &x[2] + &y[2], &x[3] + &y[3]]
    }

    pub fn scale(&self, x: &Quat, c: &BigRational) -> Quat {
        [c * &x[0], c * &x[1], c * &x[2], c * &x[3]]
    }

    /// Reduced trace x + conj(x).
    pub fn trd(&self, x: &Quat) -> BigRational {
        &x[0] + &x[0]
    }

    /// Reduced norm x * conj(x); positive definite for a, b < 0.
    pub fn nrd(&self, x: &Quat) -> BigRational {
        let a = big_rational(self.a, 1);
        let b = big_rational(self.b, 1);
        &x[0] * &x[0] - &a * &x[1] * &x[1] - &b * &x[2] * &x[2] + &a * &b * &x[3] * &x[3]
    }
}

/// Hermite normal form (row style) of the lattice spanned by the given
/// integer rows; returns the nonzero rows.
fn hnf(rows: &mut Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    let mut work = std::mem::take(rows);
    for col in 0..cols {
        loop {
            // smallest nonzero entry in this column among remaining rows
            let mut best: Option<usize> = None;
            for (idx, r) in work.iter().enumerate() {
                if !r[col].is_zero()
                    && best.map_or(true, |b| r[col].abs() < work[b][col].abs())
                {
                    best = Some(idx);
                }
            }
            let Some(bi) = best else { break };
            let pivot = work.remove(bi);
            let mut again = false;
            for r in work.iter_mut() {
                if !r[col].is_zero() {
                    let q = &r[col] / &pivot[col]; // truncated division
                    for j in 0..cols {
                        let t = &q * &pivot[j];
                        r[j] -= t;
                    }
                    if !r[col].is_zero() {
                        again = true;
                    }
                }
            }
            work.push(pivot);
            if !again {
                let bi = work.len() - 1;
                let mut pivot = work.remove(bi);
                if pivot[col].is_negative() {
                    for x in pivot.iter_mut() {
                        *x = -&*x;
                    }
                }
                // reduce earlier pivots against this one
                for prev in out.iter_mut() {
                    let q = prev[col].div_floor(&pivot[col]);
                    if !q.is_zero() {
                        for j in 0..cols {
                            let t = &q * &pivot[j];
                            prev[j] -= t;
                        }
                    }
                }
                out.push(pivot);
                break;
            }
        }
        work.retain(|r| r.iter().any(|x| !x.is_zero()));
    }
    out
}

/// An order in B: a full-rank lattice with a Z-basis of 4 elements, closed
/// under multiplication and containing 1.
#[derive(Clone, Debug)]
pub struct QuaternionOrder {
    pub alg: QuaternionAlgebra,
    /// Rows are basis elements in 1, i, j, k coordinates.
    pub basis: [Quat; 4],
}

fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    num::integer::lcm(a.clone(), b.clone())
}

/// HNF basis of the lattice generated by arbitrary rational quaternions.
fn lattice_basis(gens: &[Quat]) -> Result<[Quat; 4]> {
    let mut den = BigInt::one();
    for g in gens {
        for c in g {
            den = lcm_big(&den, c.denom());
        }
    }
    let mut rows: Vec<Vec<BigInt>> = gens
        .iter()
        .map(|g| g.iter().map(|c| (c * BigRational::from(den.clone())).to_integer()).collect())
        .collect();
    let h = hnf(&mut rows);
    if h.len() != 4 {
        return Err(Error::InvalidInput(format!(
            "lattice has rank {}, expected 4",
            h.len()
        )));
    }
    let d = BigRational::from(den);
    let row = |r: &Vec<BigInt>| -> Quat {
        [
            BigRational::from(r[0].clone()) / &d,
            BigRational::from(r[1].clone()) / &d,
            BigRational::from(r[2].clone()) / &d,
            BigRational::from(r[3].clone()) / &d,
        ]
    };
    Ok([row(&h[0]), row(&h[1]), row(&h[2]), row(&h[3])])
}

impl QuaternionOrder {
    /// The standard (generally non-maximal) order Z<1, i, j, k>.
    pub fn standard(alg: QuaternionAlgebra) -> Self {
        QuaternionOrder {
            alg,
            basis: [
                quat_from_i64([1, 0, 0, 0]),
                quat_from_i64([0, 1, 0, 0]),
                quat_from_i64([0, 0, 1, 0]),
                quat_from_i64([0, 0, 0, 1]),
            ],
        }
    }

    /// Coordinates of x in the order basis, if x is in the order.
    pub fn coords_of(&self, x: &Quat) -> Option<[BigInt; 4]> {
        let m = QMat::from_fn(4, 4, |i, j| self.basis[j][i].clone());
        let sol = m.solve(&x.to_vec())?;
        let mut out = [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
        for (k, c) in sol.iter().enumerate() {
            if !c.is_integer() {
                return None;
            }
            out[k] = c.to_integer();
        }
        Some(out)
    }

    pub fn contains(&self, x: &Quat) -> bool {
        self.coords_of(x).is_some()
    }

    /// Reduced discriminant d with d^2 = |det(trd(b_i b_j))|.
    pub fn reduced_discriminant(&self) -> Result<BigInt> {
        let alg = self.alg;
        let m = QMat::from_fn(4, 4, |i, j| {
            alg.trd(&alg.mul(&self.basis[i], &self.basis[j]))
        });
        let det = m.det();
        if !det.is_integer() {
            return Err(Error::Internal("non-integral order discriminant".into()));
        }
        let d2 = det.to_integer().abs();
        let d = d2.sqrt();
        if &d * &d != d2 {
            return Err(Error::Internal(format!(
                "order discriminant {d2} is not a perfect square"
            )));
        }
        Ok(d)
    }

    /// Is the lattice closed under multiplication (and does it contain 1)?
    pub fn is_order(&self) -> bool {
        if !self.contains(&quat_from_i64([1, 0, 0, 0])) {
            return false;
        }
        for x in &self.basis {
            for y in &self.basis {
                if !self.contains(&self.alg.mul(x, y)) {
                    return false;
                }
            }
        }
        true
    }

    /// Gram matrix of the norm form in the order basis: G_ij = trd(b_i
    /// conj(b_j)) / 2.
    pub fn gram(&self) -> QMat {
        let alg = self.alg;
        QMat::from_fn(4, 4, |i, j| {
            alg.trd(&alg.mul(&self.basis[i], &alg.conj(&self.basis[j])))
                / big_rational(2, 1)
        })
    }
}

/// A maximal order containing Z<1,i,j,k>, certified by reduced
/// discriminant = p.
pub fn maximal_order(p: u64) -> Result<QuaternionOrder> {
    let alg = QuaternionAlgebra::ramified_at(p)?;
    let mut order = QuaternionOrder::standard(alg);
    let target = BigInt::from(p);
    loop {
        let d = order.reduced_discriminant()?;
        if d == target {
            return Ok(order);
        }
        if d < target || (&d % &target) != BigInt::zero() {
            return Err(Error::Internal(format!(
                "order discriminant {d} incompatible with ramification at {p}"
            )));
        }
        let excess = &d / &target;
        let ell = smallest_prime_factor(&excess);
        let enlarged = enlarge_at(&order, &ell)?;
        match enlarged {
            Some(o) => order = o,
            None => {
                return Err(Error::Internal(format!(
                    "order not maximal at {ell} but no integral enlargement found"
                )))
            }
        }
    }
}

fn smallest_prime_factor(n: &BigInt) -> BigInt {
    let mut d = BigInt::from(2);
    loop {
        if (n % &d).is_zero() {
            return d;
        }
        d += 1;
    }
}

/// Try to find a strictly larger order inside (1/ell) O.
fn enlarge_at(order: &QuaternionOrder, ell: &BigInt) -> Result<Option<QuaternionOrder>> {
    let alg = order.alg;
    let l = ell.to_u64().ok_or_else(|| Error::Internal("huge saturation prime".into()))?;
    let lr = BigRational::from(ell.clone());
    let d0 = order.reduced_discriminant()?;
    for c0 in 0..l {
        for c1 in 0..l {
            for c2 in 0..l {
                for c3 in 0..l {
                    if c0 == 0 && c1 == 0 && c2 == 0 && c3 == 0 {
                        continue;
                    }
                    let mut x = quat_from_i64([0, 0, 0, 0]);
                    for (c, b) in [c0, c1, c2, c3].iter().zip(&order.basis) {
                        x = alg.add(&x, &alg.scale(b, &big_rational(*c as i64, 1)));
                    }
                    let x = alg.scale(&x, &(BigRational::one() / &lr));
                    if !alg.trd(&x).is_integer() || !alg.nrd(&x).is_integer() {
                        continue;
                    }
                    if let Some(o) = try_adjoin(order, &x)? {
                        if o.reduced_discriminant()? < d0 {
                            return Ok(Some(o));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Module closure of O + Zx under multiplication; None if it does not close
/// into an integral order quickly.
fn try_adjoin(order: &QuaternionOrder, x: &Quat) -> Result<Option<QuaternionOrder>> {
    let alg = order.alg;
    let mut gens: Vec<Quat> = order.basis.to_vec();
    gens.push(x.clone());
    for _ in 0..8 {
        let basis = lattice_basis(&gens)?;
        let cand = QuaternionOrder { alg, basis };
        if cand.is_order() {
            // integrality of the whole lattice
            let ok = cand.basis.iter().all(|b| {
                alg.trd(b).is_integer() && alg.nrd(b).is_integer()
            });
            return Ok(ok.then_some(cand));
        }
        let mut next = cand.basis.to_vec();
        for a in &cand.basis {
            for b in &cand.basis {
                next.push(alg.mul(a, b));
            }
        }
        gens = next;
    }
    Ok(None)
}

/// All x in the order with trd(x) = -r and nrd(x) = s, by exhaustive
/// enumeration of the positive definite norm lattice.
pub fn embed_tau(order: &QuaternionOrder, r: i64, s: i64) -> Result<Vec<Quat>> {
    let disc = r * r - 4 * s;
    if disc >= 0 {
        return Err(Error::InvalidInput(format!(
            "T^2 + {r} T + {s} has non-negative discriminant {disc}"
        )));
    }
    let alg = order.alg;
    let g = order.gram();
    let gi = g
        .inverse()
        .ok_or_else(|| Error::Internal("norm Gram matrix is singular".into()))?;
    let sr = big_rational(s, 1);
    // c^T G c = s  =>  c_k^2 <= s * (G^-1)_kk
    let bound: Vec<i64> = (0..4)
        .map(|k| {
            let b = &sr * &gi[(k, k)];
            let f = b.to_f64().unwrap_or(0.0).max(0.0);
            f.sqrt().floor() as i64 + 1
        })
        .collect();
    let mut out = Vec::new();
    for c0 in -bound[0]..=bound[0] {
        for c1 in -bound[1]..=bound[1] {
            for c2 in -bound[2]..=bound[2] {
                for c3 in -bound[3]..=bound[3] {
                    let mut x = quat_from_i64([0, 0, 0, 0]);
                    for (c, b) in [c0, c1, c2, c3].iter().zip(&order.basis) {
                        if *c != 0 {
                            x = alg.add(&x, &alg.scale(b, &big_rational(*c, 1)));
                        }
                    }
                    if alg.trd(&x) == big_rational(-r, 1) && alg.nrd(&x) == sr {
                        out.push(x);
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoEmbedding(format!(
            "Z[T]/(T^2 + {r} T + {s}) does not embed in the order at p = {}",
            alg.p
        )));
    }
    out.sort();
    Ok(out)
}

/// Roots of unity: f_{j0} = T^2+T+1 (j0 = 0) or T^2+1 (j0 = 1728).
pub fn solve_char_poly(order: &QuaternionOrder, j0: u64) -> Result<Vec<Quat>> {
    match j0 {
        0 => embed_tau(order, 1, 1),
        1728 => embed_tau(order, 0, 1),
        _ => Err(Error::InvalidInput(format!("j0 = {j0} is not 0 or 1728"))),
    }
}

/// Primitive integer relation a0 tau u = a1 + a2 tau + a3 u + a4 u tau, with
/// a0 >= 0 and content 1.
pub fn find_relation(order: &QuaternionOrder, tau: &Quat, u: &Quat) -> Result<[BigInt; 5]> {
    let alg = order.alg;
    let tu = alg.mul(tau, u);
    let ut = alg.mul(u, tau);
    let one = quat_from_i64([1, 0, 0, 0]);
    // columns: tau*u, 1, tau, u, u*tau; kernel vector beta gives
    // beta0 tu + beta1 + beta2 tau + beta3 u + beta4 ut = 0
    let cols = [&tu, &one, tau, u, &ut];
    let mut den = BigInt::one();
    for c in cols {
        for e in c.iter() {
            den = lcm_big(&den, e.denom());
        }
    }
    let m: Vec<Vec<BigInt>> = (0..4)
        .map(|row| {
            cols.iter()
                .map(|c| (&c[row] * BigRational::from(den.clone())).to_integer())
                .collect()
        })
        .collect();
    let kernel = integer_kernel(&m);
    if kernel.is_empty() {
        return Err(Error::Internal("5 quaternions with trivial kernel".into()));
    }
    // canonical choice: HNF the kernel rows, take the row with the earliest
    // leading column
    let mut rows = kernel;
    let h = hnf(&mut rows);
    let beta = h
        .first()
        .ok_or_else(|| Error::Internal("empty kernel HNF".into()))?;
    let mut alpha = [
        beta[0].clone(),
        -&beta[1],
        -&beta[2],
        -&beta[3],
        -&beta[4],
    ];
    let mut content = BigInt::zero();
    for a in &alpha {
        content = num::integer::gcd(content.clone(), a.abs());
    }
    if !content.is_one() && !content.is_zero() {
        for a in alpha.iter_mut() {
            *a = &*a / &content;
        }
    }
    let lead = alpha.iter().find(|a| !a.is_zero());
    if let Some(l) = lead {
        if l.is_negative() {
            for a in alpha.iter_mut() {
                *a = -&*a;
            }
        }
    }
    Ok(alpha)
}

/// Companion matrix [[-r, 1], [-s, 0]] of T^2 + rT + s mod N.
pub fn tau_matrix(n: u64, r: i64, s: i64) -> ModMatrix {
    ModMatrix::from_signed(n, [-r, 1, -s, 0])
}

fn fj0_coeffs(j0: u64) -> Result<(i64, i64)> {
    match j0 {
        0 => Ok((1, 1)),     // T^2 + T + 1
        1728 => Ok((0, 1)),  // T^2 + 1
        _ => Err(Error::InvalidInput(format!("j0 = {j0} is not 0 or 1728"))),
    }
}

/// All X in M2(Z/N) with f_{j0}(X) = 0 and
/// a0 T X = a1 I + a2 T + a3 X + a4 X T (T the tau matrix):
/// the linear condition is solved by Smith normal form mod N, then the
/// quadratic condition filters the affine solution coset.
pub fn undetermined_coeffs(
    rel: &[BigInt; 5],
    j0: u64,
    tau_m: &ModMatrix,
    n: u64,
) -> Result<Vec<ModMatrix>> {
    let (fr, fs) = fj0_coeffs(j0)?;
    let nn = BigInt::from(n);
    let t = [
        tau_m.a as i64,
        tau_m.b as i64,
        tau_m.c as i64,
        tau_m.d as i64,
    ];
    // unknown X = (x0, x1, x2, x3) row-major; linear map
    // L(X) = a0 T X - a3 X - a4 X T, target C = a1 I + a2 T
    let a = |k: usize| rel[k].clone();
    let mut l = vec![vec![BigInt::zero(); 4]; 4];
    // T X contributes T[row][k] X[k][col]
    let idx = |r: usize, c: usize| 2 * r + c;
    for r in 0..2 {
        for c in 0..2 {
            let row = idx(r, c);
            for k in 0..2 {
                // a0 * (T X)
                l[row][idx(k, c)] += a(0) * BigInt::from(t[idx(r, k)]);
                // -a4 * (X T)
                l[row][idx(r, k)] -= a(4) * BigInt::from(t[idx(k, c)]);
            }
            // -a3 * X
            l[row][idx(r, c)] -= a(3);
        }
    }
    let mut rhs = vec![BigInt::zero(); 4];
    for r in 0..2 {
        for c in 0..2 {
            let mut v = &a(2) * BigInt::from(t[idx(r, c)]);
            if r == c {
                v += a(1);
            }
            rhs[idx(r, c)] = v;
        }
    }
    // solve L x = rhs mod N via U L V = S
    let sm = smith_normal_form(&l);
    let mut urhs = vec![BigInt::zero(); 4];
    for i in 0..4 {
        for j in 0..4 {
            urhs[i] += &sm.u[i][j] * &rhs[j];
        }
        urhs[i] = urhs[i].mod_floor(&nn);
    }
    // S y = U rhs mod N componentwise
    let mut choices: Vec<Vec<BigInt>> = Vec::new();
    for i in 0..4 {
        let s = sm.s[i][i].mod_floor(&nn);
        let g = num::integer::gcd(s.clone(), nn.clone());
        if (&urhs[i] % &g) != BigInt::zero() {
            return Ok(Vec::new()); // no linear solutions
        }
        // solutions of s y = u mod n: y0 + t n/g, t in 0..g
        let sg = &s / &g;
        let ng = &nn / &g;
        let ug = &urhs[i] / &g;
        // invert s/g mod n/g
        let y0 = if ng.is_one() {
            BigInt::zero()
        } else {
            let inv = mod_inv(&sg.mod_floor(&ng), &ng).ok_or_else(|| {
                Error::Internal("Smith pivot not invertible mod N/g".into())
            })?;
            (ug * inv).mod_floor(&ng)
        };
        let mut opts = Vec::new();
        let mut tshift = BigInt::zero();
        while &tshift < &g {
            opts.push((&y0 + &tshift * &ng).mod_floor(&nn));
            tshift += 1;
        }
        choices.push(opts);
    }
    // enumerate y, map back x = V y, filter the quadratic condition
    let mut out = std::collections::BTreeSet::new();
    let mut stack = vec![0usize; 4];
    'outer: loop {
        let y: Vec<BigInt> = (0..4).map(|i| choices[i][stack[i]].clone()).collect();
        let mut x = vec![BigInt::zero(); 4];
        for i in 0..4 {
            for j in 0..4 {
                x[i] += &sm.v[i][j] * &y[j];
            }
            x[i] = x[i].mod_floor(&nn);
        }
        let xm = ModMatrix::new(
            n,
            [
                x[0].to_u64().unwrap(),
                x[1].to_u64().unwrap(),
                x[2].to_u64().unwrap(),
                x[3].to_u64().unwrap(),
            ],
        );
        // f(X) = X^2 + fr X + fs I = 0
        let x2 = xm.mul(&xm)?;
        let f = ModMatrix::from_signed(
            n,
            [
                x2.a as i64 + fr * xm.a as i64 + fs,
                x2.b as i64 + fr * xm.b as i64,
                x2.c as i64 + fr * xm.c as i64,
                x2.d as i64 + fr * xm.d as i64 + fs,
            ],
        );
        if f == ModMatrix::new(n, [0, 0, 0, 0]) {
            out.insert(xm);
        }
        // odometer
        for i in 0..4 {
            stack[i] += 1;
            if stack[i] < choices[i].len() {
                continue 'outer;
            }
            stack[i] = 0;
        }
        break;
    }
    Ok(out.into_iter().collect())
}

fn mod_inv(x: &BigInt, n: &BigInt) -> Option<BigInt> {
    let e = x.extended_gcd(n);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(n))
    } else {
        None
    }
}

/// Brute-force oracle for undetermined_coeffs over all of M2(Z/N).
pub fn brute_force_mu(
    rel: &[BigInt; 5],
    j0: u64,
    tau_m: &ModMatrix,
    n: u64,
) -> Result<Vec<ModMatrix>> {
    let (fr, fs) = fj0_coeffs(j0)?;
    let nn = BigInt::from(n);
    let red = |m: &BigInt| m.mod_floor(&nn);
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let x = ModMatrix::new(n, [a, b, c, d]);
                    let x2 = x.mul(&x)?;
                    let f = ModMatrix::from_signed(
                        n,
                        [
                            x2.a as i64 + fr * x.a as i64 + fs,
                            x2.b as i64 + fr * x.b as i64,
                            x2.c as i64 + fr * x.c as i64,
                            x2.d as i64 + fr * x.d as i64 + fs,
                        ],
                    );
                    if f != ModMatrix::new(n, [0, 0, 0, 0]) {
                        continue;
                    }
                    let tx = tau_m.mul(&x)?;
                    let xt = x.mul(tau_m)?;
                    let entry = |m: &ModMatrix, k: usize| {
                        BigInt::from([m.a, m.b, m.c, m.d][k])
                    };
                    let ident = ModMatrix::identity(n);
                    let holds = (0..4).all(|k| {
                        let lhs = red(&(&rel[0] * entry(&tx, k)));
                        let rhs = red(
                            &(&rel[1] * entry(&ident, k)
                                + &rel[2] * entry(tau_m, k)
                                + &rel[3] * entry(&x, k)
                                + &rel[4] * entry(&xt, k)),
                        );
                        lhs == rhs
                    });
                    if holds {
                        out.push(x);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// M_{j0}: union of M_u over u in S_{j0}, for a fixed embedded tau with
/// minimal polynomial T^2 + rT + s.
pub fn m_j0(
    order: &QuaternionOrder,
    tau: &Quat,
    r: i64,
    s: i64,
    n: u64,
    j0: u64,
) -> Result<Vec<ModMatrix>> {
    let su = solve_char_poly(order, j0)?;
    let tm = tau_matrix(n, r, s);
    let mut out = std::collections::BTreeSet::new();
    for u in &su {
        let rel = find_relation(order, tau, u)?;
        for x in undetermined_coeffs(&rel, j0, &tm, n)? {
            out.insert(x);
        }
    }
    Ok(out.into_iter().collect())
}

/// Is every element of the set inside g^-1 H g?
pub fn containment(
    m_set: &[ModMatrix],
    h: &crate::cosets::SubgroupH,
    g: &ModMatrix,
) -> Result<bool> {
    let gi = g.inv()?;
    for x in m_set {
        let conj = g.mul(x)?.mul(&gi)?;
        if !h.contains(&conj) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosets::SubgroupH;

    #[test]
    fn algebra_presentations() {
        let b7 = QuaternionAlgebra::ramified_at(7).unwrap();
        assert_eq!((b7.a, b7.b), (-1, -7));
        let b13 = QuaternionAlgebra::ramified_at(13).unwrap();
        assert_eq!(b13.b, -13);
        assert_eq!(b13.a % 4, -3); // -q with q = 3 mod 4
        assert_eq!(legendre(13, (-b13.a) as u64), -1);
    }

    #[test]
    fn multiplication_is_classical_for_minus_one() {
        // a = b = -1: Hamilton quaternions; ij = k, jk = i, ki = j
        let h = QuaternionAlgebra { p: 0, a: -1, b: -1 };
        let i = quat_from_i64([0, 1, 0, 0]);
        let j = quat_from_i64([0, 0, 1, 0]);
        let k = quat_from_i64([0, 0, 0, 1]);
        assert_eq!(h.mul(&i, &j), k);
        assert_eq!(h.mul(&j, &k), i);
        assert_eq!(h.mul(&k, &i), j);
        assert_eq!(h.mul(&i, &i), quat_from_i64([-1, 0, 0, 0]));
        assert_eq!(h.nrd(&h.add(&i, &j)), big_rational(2, 1));
    }

    #[test]
    fn norm_is_multiplicative() {
        let alg = QuaternionAlgebra::ramified_at(7).unwrap();
        let x = quat_from_i64([1, 2, 3, 4]);
        let y = quat_from_i64([-2, 1, 0, 5]);
        let lhs = alg.nrd(&alg.mul(&x, &y));
        assert_eq!(lhs, alg.nrd(&x) * alg.nrd(&y));
        // trd(xy) = trd(yx)
        assert_eq!(
            alg.trd(&alg.mul(&x, &y)),
            alg.trd(&alg.mul(&y, &x))
        );
    }

    #[test]
    fn maximal_orders_have_discriminant_p() {
        for p in [7u64, 11, 13] {
            let o = maximal_order(p).unwrap();
            assert_eq!(o.reduced_discriminant().unwrap(), BigInt::from(p));
            assert!(o.is_order());
            assert!(o.contains(&quat_from_i64([1, 0, 0, 0])));
        }
    }

    #[test]
    fn standard_order_discriminant() {
        let alg = QuaternionAlgebra::ramified_at(7).unwrap();
        let o = QuaternionOrder::standard(alg);
        // d(Z<1,i,j,k>) = 4|ab| = 28
        assert_eq!(o.reduced_discriminant().unwrap(), BigInt::from(28));
    }

    #[test]
    fn embed_fourth_roots_at_7() {
        let o = maximal_order(7).unwrap();
        let s = embed_tau(&o, 0, 1).unwrap();
        let i = quat_from_i64([0, 1, 0, 0]);
        assert!(s.contains(&i));
        assert!(s.contains(&o.alg.scale(&i, &big_rational(-1, 1))));
        for x in &s {
            assert_eq!(o.alg.trd(x), big_rational(0, 1));
            assert_eq!(o.alg.nrd(x), big_rational(1, 1));
            // order 4 in the unit group
            let x2 = o.alg.mul(x, x);
            assert_eq!(x2, quat_from_i64([-1, 0, 0, 0]));
        }
    }

    #[test]
    fn embed_sixth_roots_at_17() {
        // 7 = 1 mod 3: Q(omega) splits at 7, so no embedding there
        assert!(matches!(
            solve_char_poly(&maximal_order(7).unwrap(), 0),
            Err(Error::NoEmbedding(_))
        ));
        // p = 17 gives B = (-3, -17) and omega = (-1 + i)/2 in the maximal
        // order (enumeration must find it there)
        let o = maximal_order(17).unwrap();
        assert_eq!((o.alg.a, o.alg.b), (-3, -17));
        let s = solve_char_poly(&o, 0).unwrap();
        assert!(!s.is_empty());
        for x in &s {
            // u^3 = 1
            let x3 = o.alg.mul(&o.alg.mul(x, x), x);
            assert_eq!(x3, quat_from_i64([1, 0, 0, 0]));
            // other root -1 - u also present
            let other = o.alg.add(&quat_from_i64([-1, 0, 0, 0]), &o.alg.scale(x, &big_rational(-1, 1)));
            assert!(s.contains(&other));
        }
    }

    #[test]
    fn no_fourth_root_at_13() {
        // 13 = 1 mod 4: Q(i) splits Q_{13,inf}, so no embedding
        let o = maximal_order(13).unwrap();
        assert!(matches!(embed_tau(&o, 0, 1), Err(Error::NoEmbedding(_))));
    }

    #[test]
    fn relation_for_commuting_pair() {
        let o = maximal_order(7).unwrap();
        let tau = quat_from_i64([1, 2, 0, 1]);
        // u in Z[tau] commutes
        let u = o.alg.add(&quat_from_i64([3, 0, 0, 0]), &tau);
        let rel = find_relation(&o, &tau, &u).unwrap();
        // verify the relation annihilates
        assert_relation_holds(&o, &tau, &u, &rel);
    }

    #[test]
    fn relation_hand_checked_i_plus_j() {
        // tau = i + j, u = i in (-1, -7): tau u = -1 - k, u tau = -1 + k,
        // so tau u = -2 - u tau
        let o = QuaternionOrder::standard(QuaternionAlgebra::ramified_at(7).unwrap());
        let tau = quat_from_i64([0, 1, 1, 0]);
        let u = quat_from_i64([0, 1, 0, 0]);
        let tu = o.alg.mul(&tau, &u);
        let ut = o.alg.mul(&u, &tau);
        assert_eq!(tu, quat_from_i64([-1, 0, 0, -1]));
        assert_eq!(ut, quat_from_i64([-1, 0, 0, 1]));
        let rel = find_relation(&o, &tau, &u).unwrap();
        assert_relation_holds(&o, &tau, &u, &rel);
        // the canonical solution has a0 = 1 and matches tu = -2 - ut
        assert_eq!(rel[0], BigInt::from(1));
        assert_eq!(rel[1], BigInt::from(-2));
        assert_eq!(rel[4], BigInt::from(-1));
    }

    fn assert_relation_holds(
        o: &QuaternionOrder,
        tau: &Quat,
        u: &Quat,
        rel: &[BigInt; 5],
    ) {
        let alg = o.alg;
        let r = |k: usize| BigRational::from(rel[k].clone());
        let mut acc = alg.scale(&alg.mul(tau, u), &r(0));
        acc = alg.add(&acc, &alg.scale(&quat_from_i64([1, 0, 0, 0]), &-r(1)));
        acc = alg.add(&acc, &alg.scale(tau, &-r(2)));
        acc = alg.add(&acc, &alg.scale(u, &-r(3)));
        acc = alg.add(&acc, &alg.scale(&alg.mul(u, tau), &-r(4)));
        assert_eq!(acc, quat_from_i64([0, 0, 0, 0]));
        assert!(rel.iter().any(|x| !x.is_zero()));
    }

    #[test]
    fn undetermined_matches_brute_force_commuting() {
        // commuting relation, f = T^2 + 1, N = 5, tau matrix [[0,1],[4,0]]
        let rel = [
            BigInt::from(1),
            BigInt::from(0),
            BigInt::from(0),
            BigInt::from(0),
            BigInt::from(1),
        ];
        let tm = tau_matrix(5, 0, 1);
        let fast = undetermined_coeffs(&rel, 1728, &tm, 5).unwrap();
        let slow = brute_force_mu(&rel, 1728, &tm, 5).unwrap();
        let fs: std::collections::BTreeSet<_> = fast.iter().cloned().collect();
        let ss: std::collections::BTreeSet<_> = slow.iter().cloned().collect();
        assert_eq!(fs, ss);
        assert!(fs.contains(&tm));
        assert!(fs.contains(&ModMatrix::from_signed(5, [0, -1, 1, 0])));
    }

    #[test]
    fn undetermined_matches_brute_force_random() {
        let mut x = 17i64;
        let mut next = || {
            x = (x * 48271) % 2147483647;
            x
        };
        for n in [5u64, 7] {
            for _ in 0..6 {
                let rel = [
                    BigInt::from(next() % 4),
                    BigInt::from(next() % 7 - 3),
                    BigInt::from(next() % 7 - 3),
                    BigInt::from(next() % 7 - 3),
                    BigInt::from(next() % 7 - 3),
                ];
                let (r, s) = (next() % 3, 1 + (next() % 3));
                let tm = tau_matrix(n, r, s);
                for j0 in [0u64, 1728] {
                    let fast = undetermined_coeffs(&rel, j0, &tm, n).unwrap();
                    let slow = brute_force_mu(&rel, j0, &tm, n).unwrap();
                    assert_eq!(fast, slow, "n={n} j0={j0} rel={rel:?} tau={tm:?}");
                }
            }
        }
    }

    #[test]
    fn m_j0_full_pipeline_at_7_mod_5() {
        let o = maximal_order(7).unwrap();
        // tau = i has (r, s) = (0, 1)
        let tau = quat_from_i64([0, 1, 0, 0]);
        let m = m_j0(&o, &tau, 0, 1, 5, 1728).unwrap();
        let tm = tau_matrix(5, 0, 1);
        assert!(m.contains(&tm));
        assert!(m.contains(&ModMatrix::from_signed(5, [0, -1, 1, 0])));
        // closed under the other-root pairing X -> -X
        for x in &m {
            let other = ModMatrix::from_signed(
                5,
                [-(x.a as i64), -(x.b as i64), -(x.c as i64), -(x.d as i64)],
            );
            assert!(m.contains(&other));
            // every element squares to -I (f_{1728} root)
            assert_eq!(x.mul(x).unwrap(), ModMatrix::neg_identity(5));
        }
    }

    #[test]
    fn centralizer_invariance() {
        let o = maximal_order(7).unwrap();
        let tau = quat_from_i64([0, 1, 0, 0]);
        let m: std::collections::BTreeSet<ModMatrix> =
            m_j0(&o, &tau, 0, 1, 5, 1728).unwrap().into_iter().collect();
        let tm = tau_matrix(5, 0, 1);
        for c in crate::cosets::enumerate_gl2(5).unwrap() {
            if c.mul(&tm).unwrap() != tm.mul(&c).unwrap() {
                continue;
            }
            let ci = c.inv().unwrap();
            let conj: std::collections::BTreeSet<ModMatrix> = m
                .iter()
                .map(|x| c.mul(x).unwrap().mul(&ci).unwrap())
                .collect();
            assert_eq!(conj, m);
        }
    }

    #[test]
    fn containment_checks() {
        let full = SubgroupH::full(5).unwrap();
        let tm = tau_matrix(5, 0, 1);
        let set = vec![tm, ModMatrix::identity(5)];
        assert!(containment(&set, &full, &ModMatrix::identity(5)).unwrap());
        let pm = SubgroupH::center_pm(5).unwrap();
        assert!(!containment(&set, &pm, &ModMatrix::identity(5)).unwrap());
        let borel = SubgroupH::borel(5).unwrap();
        // anti-diagonal tau matrix is not upper triangular
        assert!(!containment(&[tm], &borel, &ModMatrix::identity(5)).unwrap());
    }
}
