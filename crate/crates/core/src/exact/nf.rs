//! Absolute number fields Q[x]/(f) with power-basis coordinates. Towers are
//! flattened to a single monic integer defining polynomial before they reach
//! this kernel.

use num::rational::BigRational;
use num::{BigInt, One, Zero};
use std::sync::Arc;

use super::ball::ComplexBall;
use super::linalg::QMat;
use super::roots::{is_squarefree, isolate_roots};
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct NumberField {
    /// Monic integer defining polynomial, ascending, degree >= 1.
    pub poly: Vec<BigInt>,
    /// Isolated complex roots per working precision; isolation is expensive
    /// and embeddings are requested constantly during recovery.
    roots_cache: std::sync::Mutex<std::collections::HashMap<usize, Vec<ComplexBall>>>,
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.poly == other.poly
    }
}

impl Eq for NumberField {}

impl NumberField {
    pub fn new(poly: Vec<BigInt>) -> Result<Arc<Self>> {
        let d = poly.len().saturating_sub(1);
        if d == 0 {
            return Err(Error::InvalidInput("defining polynomial must be nonconstant".into()));
        }
        if !poly[d].is_one() {
            return Err(Error::InvalidInput("defining polynomial must be monic".into()));
        }
        let q: Vec<BigRational> = poly.iter().cloned().map(BigRational::from).collect();
        if !is_squarefree(&q) {
            return Err(Error::InvalidInput("defining polynomial must be squarefree".into()));
        }
        Ok(Arc::new(NumberField { poly, roots_cache: Default::default() }))
    }

    /// Q itself, presented as Q[x]/(x).
    pub fn rationals() -> Arc<Self> {
        Arc::new(NumberField {
            poly: vec![BigInt::zero(), BigInt::one()],
            roots_cache: Default::default(),
        })
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn poly_rational(&self) -> Vec<BigRational> {
        self.poly.iter().cloned().map(BigRational::from).collect()
    }

    /// Complex roots of the defining polynomial as pairwise disjoint balls,
    /// ordered lexicographically by (real, imaginary) midpoint.
    pub fn roots(&self, prec: usize) -> Result<Vec<ComplexBall>> {
        if let Some(r) = self.roots_cache.lock().unwrap().get(&prec) {
            return Ok(r.clone());
        }
        let r = isolate_roots(&self.poly_rational(), prec)?;
        self.roots_cache.lock().unwrap().insert(prec, r.clone());
        Ok(r)
    }
}

#[derive(Clone, Debug)]
pub struct NfElt {
    pub field: Arc<NumberField>,
    /// Power-basis coordinates, length = degree.
    pub coords: Vec<BigRational>,
}

fn same_field(a: &NfElt, b: &NfElt) -> bool {
    Arc::ptr_eq(&a.field, &b.field) || a.field == b.field
}

impl NfElt {
    pub fn new(field: Arc<NumberField>, coords: Vec<BigRational>) -> Self {
        assert_eq!(coords.len(), field.degree());
        NfElt { field, coords }
    }

    pub fn zero(field: Arc<NumberField>) -> Self {
        let d = field.degree();
        NfElt::new(field, vec![BigRational::zero(); d])
    }

    pub fn one(field: Arc<NumberField>) -> Self {
        Self::from_rational(field, BigRational::one())
    }

    pub fn from_rational(field: Arc<NumberField>, x: BigRational) -> Self {
        let d = field.degree();
        let mut coords = vec![BigRational::zero(); d];
        coords[0] = x;
        NfElt { field, coords }
    }

    /// The power-basis generator (the class of x).
    pub fn generator(field: Arc<NumberField>) -> Self {
        let d = field.degree();
        let mut coords = vec![BigRational::zero(); d];
        if d > 1 {
            coords[1] = BigRational::one();
        } else {
            // Q[x]/(x - c): the generator is the rational root c
            coords[0] = BigRational::from(-field.poly[0].clone());
        }
        NfElt { field, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coords[1..].iter().all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    pub fn add(&self, o: &NfElt) -> NfElt {
        assert!(same_field(self, o));
        let coords = self
            .coords
            .iter()
            .zip(&o.coords)
            .map(|(a, b)| a + b)
            .collect();
        NfElt::new(self.field.clone(), coords)
    }

    pub fn sub(&self, o: &NfElt) -> NfElt {
        assert!(same_field(self, o));
        let coords = self
            .coords
            .iter()
            .zip(&o.coords)
            .map(|(a, b)| a - b)
            .collect();
        NfElt::new(self.field.clone(), coords)
    }

    pub fn neg(&self) -> NfElt {
        NfElt::new(self.field.clone(), self.coords.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: &BigRational) -> NfElt {
        NfElt::new(self.field.clone(), self.coords.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &NfElt) -> NfElt {
        assert!(same_field(self, o));
        let d = self.field.degree();
        let mut prod = vec![BigRational::zero(); 2 * d - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coords.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        reduce_mod(&mut prod, &self.field.poly);
        prod.truncate(d);
        prod.resize(d, BigRational::zero());
        NfElt::new(self.field.clone(), prod)
    }

    pub fn pow(&self, mut k: u64) -> NfElt {
        let mut acc = NfElt::one(self.field.clone());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x].
    pub fn inv(&self) -> Result<NfElt> {
        if self.is_zero() {
            return Err(Error::InvalidInput("division by zero in number field".into()));
        }
        let f = self.field.poly_rational();
        let a = self.coords.clone();
        // extended gcd(a, f) = u*a + v*f; gcd is a nonzero constant
        let (g, u) = ext_gcd_first(&a, &f);
        if poly_deg(&g) != 0 || g[0].is_zero() {
            return Err(Error::Internal(
                "element not invertible; defining polynomial reducible?".into(),
            ));
        }
        let ginv = g[0].recip();
        let d = self.field.degree();
        let mut coords: Vec<BigRational> = u.iter().map(|c| c * &ginv).collect();
        coords.resize(d.max(coords.len()), BigRational::zero());
        let mut coords = coords;
        reduce_mod(&mut coords, &self.field.poly);
        coords.truncate(d);
        coords.resize(d, BigRational::zero());
        Ok(NfElt::new(self.field.clone(), coords))
    }

    pub fn div(&self, o: &NfElt) -> Result<NfElt> {
        Ok(self.mul(&o.inv()?))
    }

    /// Matrix of multiplication by self on the power basis.
    pub fn mul_matrix(&self) -> QMat {
        let d = self.field.degree();
        let mut m = QMat::zeros(d, d);
        let mut col = NfElt::one(self.field.clone());
        let g1 = NfElt::generator(self.field.clone());
        for j in 0..d {
            let prod = self.mul(&col);
            for i in 0..d {
                m[(i, j)] = prod.coords[i].clone();
            }
            col = col.mul(&g1);
        }
        m
    }

    /// Characteristic polynomial of multiplication by self (degree d, monic,
    /// ascending coefficients).
    pub fn char_poly(&self) -> Vec<BigRational> {
        self.mul_matrix().char_poly()
    }

    /// Field norm N(self) = det of the multiplication matrix.
    pub fn norm(&self) -> BigRational {
        self.mul_matrix().det()
    }

    pub fn trace(&self) -> BigRational {
        let m = self.mul_matrix();
        let mut t = BigRational::zero();
        for i in 0..self.field.degree() {
            t += m[(i, i)].clone();
        }
        t
    }

    /// Image under the embedding sending the generator to root `root_index`
    /// in the lexicographic (real, imaginary) ordering.
    pub fn embed(&self, root_index: usize, prec: usize) -> Result<ComplexBall> {
        let roots = self.field.roots(prec)?;
        if root_index >= roots.len() {
            return Err(Error::InvalidInput(format!(
                "root index {root_index} out of range for degree {}",
                roots.len()
            )));
        }
        let root = &roots[root_index];
        let mut acc = ComplexBall::zero(prec);
        for c in self.coords.iter().rev() {
            acc = acc.mul(root).add(&ComplexBall::from_rational(c, prec));
        }
        Ok(acc)
    }
}

/// See [`NfElt::embed`].
pub fn nf_embed(x: &NfElt, root_index: usize, prec: usize) -> Result<ComplexBall> {
    x.embed(root_index, prec)
}

fn poly_deg(f: &[BigRational]) -> usize {
    f.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
}

/// Reduce `prod` modulo the monic integer polynomial `f` in place.
fn reduce_mod(prod: &mut Vec<BigRational>, f: &[BigInt]) {
    let d = f.len() - 1;
    while prod.len() > d {
        let k = prod.len() - 1;
        let c = match prod.pop() {
            Some(c) => c,
            None => break,
        };
        if c.is_zero() {
            continue;
        }
        for i in 0..d {
            let t = &c * BigRational::from(f[i].clone());
            prod[k - d + i] -= t;
        }
    }
}

/// Extended gcd returning (gcd, u) with u*a ≡ gcd (mod b).
fn ext_gcd_first(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    let mut u0 = vec![BigRational::one()];
    let mut u1 = vec![BigRational::zero()];
    while !(poly_deg(&r1) == 0 && r1[poly_deg(&r1)].is_zero()) {
        let (q, rem) = poly_divmod(&r0, &r1);
        let uq = poly_mul(&q, &u1);
        let u2 = poly_sub(&u0, &uq);
        r0 = r1;
        r1 = rem;
        u0 = u1;
        u1 = u2;
    }
    (r0, u0)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let db = poly_deg(b);
    let lead = &b[db];
    let mut r = a.to_vec();
    let da = poly_deg(&r);
    if da < db {
        return (vec![BigRational::zero()], r);
    }
    let mut q = vec![BigRational::zero(); da - db + 1];
    loop {
        let dr = poly_deg(&r);
        if (dr == 0 && r[0].is_zero()) || dr < db {
            break;
        }
        let c = &r[dr] / lead;
        q[dr - db] = c.clone();
        for i in 0..=db {
            let t = &c * &b[i];
            r[dr - db + i] -= t;
        }
    }
    r.truncate(poly_deg(&r) + 1);
    (q, r)
}
