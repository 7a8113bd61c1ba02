//! Rigorous reconstruction of an algebraic integer from ball approximations
//! of its Galois conjugates, via a normal basis with an explicit denominator
//! bound; for abelian Galois groups the same solve runs through a
//! multidimensional DFT (convolution becomes pointwise division).

use std::sync::Arc;

use astro_float::BigFloat;
use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::ball::ComplexBall;
use crate::exact::cpx::{bigfloat_to_f64, bigfloat_to_rational, pow2};
use crate::exact::linalg::{smith_normal_form, QMat};
use crate::exact::nf::{NfElt, NumberField};

/// Matrix of a field automorphism on the power basis: column t holds the
/// coordinates of image^t. Errors unless the image is a root of the
/// defining polynomial.
pub fn automorphism_matrix(field: &Arc<NumberField>, image: &NfElt) -> Result<QMat> {
    let n = field.degree();
    // check f(image) = 0
    let fr = field.poly_rational();
    let mut acc = NfElt::zero(field.clone());
    for c in fr.iter().rev() {
        acc = acc.mul(image).add(&NfElt::from_rational(field.clone(), c.clone()));
    }
    if !acc.is_zero() {
        return Err(Error::InvalidInput(
            "automorphism image is not a root of the defining polynomial".into(),
        ));
    }
    let mut m = QMat::zeros(n, n);
    let mut p = NfElt::one(field.clone());
    for t in 0..n {
        for r in 0..n {
            m[(r, t)] = p.coords[r].clone();
        }
        p = p.mul(image);
    }
    Ok(m)
}

fn apply_sigma(m: &QMat, x: &NfElt) -> NfElt {
    NfElt::new(x.field.clone(), m.mul_vec(&x.coords))
}

/// Invariant factors and new generators of a finite abelian group presented
/// by a relation matrix (rows = relations among the given generators).
/// Returns (d_1 | d_2 | ... , generator exponent matrix): new generator t is
/// the product of old generators g_i^(v[i][t]).
pub fn smith_form(relations: &[Vec<BigInt>]) -> Result<(Vec<BigInt>, Vec<Vec<BigInt>>)> {
    if relations.is_empty() {
        return Err(Error::InvalidInput("empty relation matrix".into()));
    }
    let k = relations[0].len();
    if relations.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidInput("ragged relation matrix".into()));
    }
    let sm = smith_normal_form(relations);
    let mut factors = Vec::new();
    let mut gens = Vec::new();
    for t in 0..k.min(relations.len()) {
        let s = sm.s[t][t].abs();
        if s.is_zero() {
            return Err(Error::InvalidInput(
                "relations do not present a finite group".into(),
            ));
        }
        if !s.is_one() {
            factors.push(s);
            gens.push((0..k).map(|i| sm.v[i][t].clone()).collect());
        }
    }
    if relations.len() < k {
        return Err(Error::InvalidInput(
            "fewer relations than generators: group is infinite".into(),
        ));
    }
    Ok((factors, gens))
}

/// Structure of an abelian Gal(L/K) in Smith coordinates: sigma indices
/// g_1..g_k of commuting generators with orders d_1 | ... | d_k.
#[derive(Clone, Debug)]
pub struct AbelianStructure {
    pub dims: Vec<u64>,
    pub generators: Vec<usize>,
}

/// The Galois action of Gal(L/K) on L in power-basis coordinates.
#[derive(Clone)]
pub struct GaloisData {
    pub field: Arc<NumberField>,
    /// Defining polynomial of K: [0, 1] (that is, x) for K = Q, or a monic
    /// integer quadratic with negative discriminant.
    pub k_poly: Vec<BigInt>,
    /// Image of K's generator inside L (power-basis coordinates); None for
    /// K = Q.
    pub k_gen_in_l: Option<Vec<BigRational>>,
    pub d: usize,
    pub sigma: Vec<QMat>,
    pub abelian: Option<AbelianStructure>,
}

impl GaloisData {
    pub fn new(
        field: Arc<NumberField>,
        k_poly: Vec<BigInt>,
        k_gen_in_l: Option<Vec<BigRational>>,
        sigma: Vec<QMat>,
        abelian: Option<AbelianStructure>,
    ) -> Result<Self> {
        let n = field.degree();
        let d = sigma.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty sigma table".into()));
        }
        let ident = QMat::identity(n);
        if sigma[0] != ident {
            return Err(Error::InvalidInput("sigma_0 must be the identity".into()));
        }
        // each sigma is an automorphism: generator maps to a root of f
        let theta = NfElt::generator(field.clone());
        for (t, s) in sigma.iter().enumerate() {
            let img = apply_sigma(s, &theta);
            automorphism_matrix(&field, &img).map_err(|_| {
                Error::InvalidInput(format!("sigma_{t} is not a field automorphism"))
            })?;
        }
        // group closure within the table
        for x in &sigma {
            for y in &sigma {
                let p = x.mul(y);
                if !sigma.iter().any(|s| *s == p) {
                    return Err(Error::InvalidInput(
                        "sigma table is not closed under composition".into(),
                    ));
                }
            }
        }
        match k_poly.as_slice() {
            [c0, c1] if c0.is_zero() && c1.is_one() => {
                if k_gen_in_l.is_some() {
                    return Err(Error::InvalidInput(
                        "K = Q takes no embedded generator".into(),
                    ));
                }
            }
            [c0, c1, c2] if c2.is_one() => {
                let disc = c1 * c1 - BigInt::from(4) * c0;
                if !disc.is_negative() {
                    return Err(Error::OutOfScope(
                        "K must be Q or imaginary quadratic".into(),
                    ));
                }
                let kg = k_gen_in_l.as_ref().ok_or_else(|| {
                    Error::InvalidInput("imaginary quadratic K needs its image in L".into())
                })?;
                if kg.len() != n {
                    return Err(Error::InvalidInput("K generator has wrong length".into()));
                }
                // k_poly(kappa) = 0 and kappa fixed by every sigma
                let kappa = NfElt::new(field.clone(), kg.clone());
                let val = kappa
                    .mul(&kappa)
                    .add(&kappa.scale(&BigRational::from(c1.clone())))
                    .add(&NfElt::from_rational(
                        field.clone(),
                        BigRational::from(c0.clone()),
                    ));
                if !val.is_zero() {
                    return Err(Error::InvalidInput(
                        "embedded K generator is not a root of k_poly".into(),
                    ));
                }
                for s in &sigma {
                    if !apply_sigma(s, &kappa).sub(&kappa).is_zero() {
                        return Err(Error::InvalidInput(
                            "sigma table does not fix K pointwise".into(),
                        ));
                    }
                }
            }
            _ => {
                return Err(Error::OutOfScope(
                    "K must be Q or imaginary quadratic (monic, degree <= 2)".into(),
                ));
            }
        }
        if let Some(ab) = &abelian {
            let prod: u64 = ab.dims.iter().product();
            if prod as usize != d || ab.dims.len() != ab.generators.len() {
                return Err(Error::InvalidInput(
                    "abelian structure does not match the group order".into(),
                ));
            }
            for w in ab.dims.windows(2) {
                if w[1] % w[0] != 0 {
                    return Err(Error::InvalidInput(
                        "invariant factors must form a divisibility chain".into(),
                    ));
                }
            }
            for &i in &ab.generators {
                if i >= d {
                    return Err(Error::InvalidInput("generator index out of range".into()));
                }
            }
            for &i in &ab.generators {
                for &j in &ab.generators {
                    if sigma[i].mul(&sigma[j]) != sigma[j].mul(&sigma[i]) {
                        return Err(Error::InvalidInput(
                            "abelian generators do not commute".into(),
                        ));
                    }
                }
            }
        }
        Ok(GaloisData { field, k_poly, k_gen_in_l, d, sigma, abelian })
    }

    pub fn apply(&self, i: usize, x: &NfElt) -> NfElt {
        apply_sigma(&self.sigma[i], x)
    }

    fn kappa(&self) -> Option<NfElt> {
        self.k_gen_in_l
            .as_ref()
            .map(|c| NfElt::new(self.field.clone(), c.clone()))
    }

    /// Index of the product sigma_i sigma_j in the table.
    fn compose_index(&self, i: usize, j: usize) -> Result<usize> {
        let p = self.sigma[i].mul(&self.sigma[j]);
        self.sigma
            .iter()
            .position(|s| *s == p)
            .ok_or_else(|| Error::Internal("sigma table not closed".into()))
    }
}

/// Normal basis {sigma_i(alpha)} with its embedded matrix and an explicit
/// denominator bound D: every element of Z[theta] has coordinates in
/// (1/D) O_K with respect to the basis.
pub struct NormalBasis {
    pub gal: GaloisData,
    pub alpha: NfElt,
    /// A[i][j] = embedding of sigma_i(sigma_j(alpha)).
    pub a_mat: Vec<Vec<ComplexBall>>,
    pub d_den: BigInt,
    /// Which complex root of L's polynomial realizes the embedding.
    pub root_index: usize,
    pub prec: usize,
}

/// Rational solve: coordinates of x in the Q-basis {sigma_j(alpha) kappa^t}.
fn k_coords(gal: &GaloisData, alpha: &NfElt, x: &NfElt) -> Option<Vec<Vec<BigRational>>> {
    let n = gal.field.degree();
    let d = gal.d;
    let deg_k = n / d;
    let kappa = gal.kappa();
    let mut cols: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    for j in 0..d {
        let sa = gal.apply(j, alpha);
        for t in 0..deg_k {
            let b = match (&kappa, t) {
                (_, 0) => sa.clone(),
                (Some(k), _) => sa.mul(&k.pow(t as u64)),
                (None, _) => unreachable!("deg_k = 1 for K = Q"),
            };
            cols.push(b.coords.clone());
        }
    }
    let m = QMat::from_fn(n, n, |r, c| cols[c][r].clone());
    let sol = m.solve(&x.coords)?;
    // regroup per j: deg_k coordinates each
    Some(sol.chunks(deg_k).map(|c| c.to_vec()).collect())
}

/// Try alpha = theta + c (c < 16) then theta^2 + c: the first candidate with
/// certified invertible A and finite denominator wins.
pub fn build_normal_basis(gal: &GaloisData, root_index: usize, prec: usize) -> Result<NormalBasis> {
    let field = gal.field.clone();
    let theta = NfElt::generator(field.clone());
    let n = field.degree();
    let d = gal.d;
    for cand in 0..32u32 {
        let base = if cand < 16 { theta.clone() } else { theta.mul(&theta) };
        let alpha = base.add(&NfElt::from_rational(
            field.clone(),
            BigRational::from(BigInt::from(cand % 16)),
        ));
        // denominator: lcm over theta^t of coordinate denominators
        let mut d_den = BigInt::one();
        let mut ok = true;
        for t in 0..n {
            match k_coords(gal, &alpha, &theta.pow(t as u64)) {
                Some(rows) => {
                    for row in rows {
                        for c in row {
                            d_den = num::integer::lcm(d_den.clone(), c.denom().clone());
                        }
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        // embedded matrix, certified invertible
        let mut a_mat = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = Vec::with_capacity(d);
            for j in 0..d {
                let k = gal.compose_index(i, j)?;
                row.push(gal.apply(k, &alpha).embed(root_index, prec)?);
            }
            a_mat.push(row);
        }
        if ball_det_nonzero(&a_mat) {
            return Ok(NormalBasis {
                gal: gal.clone(),
                alpha,
                a_mat,
                d_den,
                root_index,
                prec,
            });
        }
    }
    Err(Error::Internal(
        "no normal-basis candidate among the first 32 certified as invertible".into(),
    ))
}

fn ball_det_nonzero(a: &[Vec<ComplexBall>]) -> bool {
    let mut m: Vec<Vec<ComplexBall>> = a.to_vec();
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| {
            let ax = bigfloat_to_f64(&m[x][col].abs_lb());
            let ay = bigfloat_to_f64(&m[y][col].abs_lb());
            ax.partial_cmp(&ay).unwrap_or(std::cmp::Ordering::Equal)
        });
        let Some(p) = piv else { return false };
        if m[p][col].contains_zero() {
            return false;
        }
        m.swap(col, p);
        for r in col + 1..n {
            let f = match m[r][col].div(&m[col][col]) {
                Ok(f) => f,
                Err(_) => return false,
            };
            for c in col..n {
                let t = f.mul(&m[col][c]);
                m[r][c] = m[r][c].sub(&t);
            }
        }
    }
    true
}

/// Solve A v = w with ball Gaussian elimination.
fn ball_solve(a: &[Vec<ComplexBall>], w: &[ComplexBall]) -> Result<Vec<ComplexBall>> {
    let n = a.len();
    let mut m: Vec<Vec<ComplexBall>> = a.to_vec();
    let mut rhs = w.to_vec();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| {
                let ax = bigfloat_to_f64(&m[x][col].abs_lb());
                let ay = bigfloat_to_f64(&m[y][col].abs_lb());
                ax.partial_cmp(&ay).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if m[p][col].contains_zero() {
            return Err(Error::precision(
                "normal-basis matrix pivot indistinguishable from 0",
            ));
        }
        m.swap(col, p);
        rhs.swap(col, p);
        for r in col + 1..n {
            let f = m[r][col].div(&m[col][col])?;
            for c in col..n {
                let t = f.mul(&m[col][c]);
                m[r][c] = m[r][c].sub(&t);
            }
            let t = f.mul(&rhs[col]);
            rhs[r] = rhs[r].sub(&t);
        }
    }
    let mut v = vec![ComplexBall::zero(w[0].prec()); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r].clone();
        for c in r + 1..n {
            let t = m[r][c].mul(&v[c]);
            acc = acc.sub(&t);
        }
        v[r] = acc.div(&m[r][r])?;
    }
    Ok(v)
}

/// Shortest vector length (lower estimate) of O_K embedded in C, for
/// rounding-uniqueness margins.
fn ok_min_dist(gal: &GaloisData, root_index: usize, prec: usize) -> Result<f64> {
    match gal.kappa() {
        None => Ok(1.0),
        Some(k) => {
            let kb = k.embed(root_index, prec)?;
            let (re, im) = kb.to_f64();
            let mut best = f64::INFINITY;
            for a in -2i64..=2 {
                for b in -2i64..=2 {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let x = a as f64 + b as f64 * re;
                    let y = b as f64 * im;
                    best = best.min((x * x + y * y).sqrt());
                }
            }
            Ok(best)
        }
    }
}

fn round_nearest(x: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    (x + half).floor().to_integer()
}

/// Round a ball to the unique nearest point of (1/D) O_K, erroring when the
/// enclosure admits two candidates. All rounding and distance arithmetic is
/// exact rational so coordinates beyond 2^53 stay correct.
fn round_coord(
    u: &ComplexBall,
    gal: &GaloisData,
    root_index: usize,
    prec: usize,
) -> Result<(BigInt, BigInt)> {
    let lam = ok_min_dist(gal, root_index, prec)?;
    let ure = bigfloat_to_rational(&u.mid.re);
    let uim = bigfloat_to_rational(&u.mid.im);
    let rad = bigfloat_to_rational(&u.rad);
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    // (a, b), the chosen lattice point embedded, and the embedding error of
    // kappa scaled by |b|
    let (a, b, lre, lim, emb_err) = match gal.kappa() {
        None => {
            if uim.abs() + &rad >= quarter {
                return Err(Error::precision_hint(
                    "imaginary part of a rational coordinate is not certified 0",
                    2 * prec,
                ));
            }
            let a = round_nearest(&ure);
            let lre = BigRational::from(a.clone());
            (a, BigInt::from(0), lre, BigRational::from(BigInt::from(0)), BigRational::from(BigInt::from(0)))
        }
        Some(k) => {
            let kb = k.embed(root_index, prec)?;
            let kre = bigfloat_to_rational(&kb.mid.re);
            let kim = bigfloat_to_rational(&kb.mid.im);
            let krad = bigfloat_to_rational(&kb.rad);
            if kim.is_zero() {
                return Err(Error::InvalidInput(
                    "imaginary quadratic generator embeds with zero imaginary part".into(),
                ));
            }
            let b = round_nearest(&(&uim / &kim));
            let br = BigRational::from(b.clone());
            let a = round_nearest(&(&ure - &br * &kre));
            let lre = BigRational::from(a.clone()) + &br * &kre;
            let lim = &br * &kim;
            let emb_err = br.abs() * krad;
            (a, b, lre, lim, emb_err)
        }
    };
    // need dist + 2 rad + emb_err < lam / 2; compare squared to avoid sqrt,
    // with lam shrunk slightly to absorb its f64 estimation error
    let dre = &ure - &lre;
    let dim = &uim - &lim;
    let dist2 = &dre * &dre + &dim * &dim;
    let margin = BigRational::from_float(lam * 0.499)
        .ok_or_else(|| Error::InvalidInput("degenerate lattice margin".into()))?;
    let slack = margin - BigRational::from(BigInt::from(2)) * &rad - &emb_err;
    if !slack.is_positive() || dist2 >= &slack * &slack {
        return Err(Error::precision_hint(
            "lattice rounding ambiguous: enclosure reaches a second candidate",
            2 * prec,
        ));
    }
    Ok((a, b))
}

fn assemble(
    nb: &NormalBasis,
    rounded: &[(BigInt, BigInt)],
) -> NfElt {
    let gal = &nb.gal;
    let field = gal.field.clone();
    let dr = BigRational::from(nb.d_den.clone());
    let mut gamma = NfElt::zero(field.clone());
    for (j, (a, b)) in rounded.iter().enumerate() {
        let mut v = NfElt::from_rational(field.clone(), BigRational::from(a.clone()) / &dr);
        if let Some(k) = gal.kappa() {
            v = v.add(&k.scale(&(BigRational::from(b.clone()) / &dr)));
        }
        gamma = gamma.add(&v.mul(&gal.apply(j, &nb.alpha)));
    }
    gamma
}

fn verify(nb: &NormalBasis, gamma: &NfElt, w: &[ComplexBall], tol: &BigFloat) -> Result<()> {
    for (j, wj) in w.iter().enumerate() {
        let g = nb.gal.apply(j, gamma).embed(nb.root_index, nb.prec)?;
        let target = wj.inflate(tol);
        // containment of the midpoint enclosure: |mid_g - mid_w| <= radii sum
        let dmid = ComplexBall::exact(g.mid.sub(&target.mid)).abs_ub();
        let reach = target
            .rad
            .sub(&g.rad, 64, astro_float::RoundingMode::Down);
        if dmid.cmp(&reach) == Some(1) {
            return Err(Error::Inconsistent(format!(
                "re-embedded conjugate {j} is outside its input enclosure"
            )));
        }
    }
    Ok(())
}

fn verification_tol(prec: usize) -> BigFloat {
    pow2(-(prec as i64) / 2)
}

/// Reconstruct gamma in O_L from conjugate enclosures w_j ~ sigma_j(gamma):
/// solve A v = w, round D v into O_K, assemble and re-verify.
pub fn recover_integer(nb: &NormalBasis, w: &[ComplexBall]) -> Result<NfElt> {
    let d = nb.gal.d;
    if w.len() != d {
        return Err(Error::InvalidInput(format!(
            "expected {d} conjugate values, got {}",
            w.len()
        )));
    }
    let v = ball_solve(&nb.a_mat, w)?;
    let dscale = ComplexBall::from_bigint(&nb.d_den, nb.prec);
    let mut rounded = Vec::with_capacity(d);
    for vj in &v {
        let u = vj.mul(&dscale);
        rounded.push(round_coord(&u, &nb.gal, nb.root_index, nb.prec)?);
    }
    let gamma = assemble(nb, &rounded);
    verify(nb, &gamma, w, &verification_tol(nb.prec))?;
    Ok(gamma)
}

/// Multidimensional DFT with appendix conventions: forward kernel
/// mu^(-i.m), inverse kernel mu^(+i.m) with a 1/#G scale.
pub fn dft(x: &[ComplexBall], dims: &[u64], inverse: bool, prec: usize) -> Result<Vec<ComplexBall>> {
    let total: u64 = dims.iter().product();
    if x.len() as u64 != total {
        return Err(Error::InvalidInput("array length does not match dims".into()));
    }
    // roots of unity per axis: mu_t^j
    let mut roots: Vec<Vec<ComplexBall>> = Vec::with_capacity(dims.len());
    for &dt in dims {
        let mut axis = Vec::with_capacity(dt as usize);
        for jj in 0..dt {
            axis.push(ComplexBall::root_of_unity(jj as i64, dt as i64, prec));
        }
        roots.push(axis);
    }
    let unflatten = |mut idx: u64| -> Vec<u64> {
        let mut c = vec![0u64; dims.len()];
        for t in (0..dims.len()).rev() {
            c[t] = idx % dims[t];
            idx /= dims[t];
        }
        c
    };
    let n = total as usize;
    let mut out = Vec::with_capacity(n);
    for mi in 0..n {
        let m = unflatten(mi as u64);
        let mut acc = ComplexBall::zero(prec);
        for (ii, xv) in x.iter().enumerate() {
            let i = unflatten(ii as u64);
            let mut ker = ComplexBall::one(prec);
            for t in 0..dims.len() {
                let e = (i[t] * m[t]) % dims[t];
                let e = if inverse { e } else { (dims[t] - e) % dims[t] };
                ker = ker.mul(&roots[t][e as usize]);
            }
            acc = acc.add(&xv.mul(&ker));
        }
        if inverse {
            acc = acc.mul(&ComplexBall::from_rational(
                &BigRational::new(BigInt::one(), BigInt::from(total)),
                prec,
            ));
        }
        out.push(acc);
    }
    Ok(out)
}

/// Group convolution (c = a * b)[m] = sum_i a[i] b[m - i] over Z_d1 x ... x
/// Z_dk.
pub fn convolve(a: &[ComplexBall], b: &[ComplexBall], dims: &[u64], prec: usize) -> Result<Vec<ComplexBall>> {
    let total: u64 = dims.iter().product();
    if a.len() as u64 != total || b.len() as u64 != total {
        return Err(Error::InvalidInput("array length does not match dims".into()));
    }
    let unflatten = |mut idx: u64| -> Vec<u64> {
        let mut c = vec![0u64; dims.len()];
        for t in (0..dims.len()).rev() {
            c[t] = idx % dims[t];
            idx /= dims[t];
        }
        c
    };
    let flatten = |c: &[u64]| -> usize {
        let mut idx = 0u64;
        for t in 0..dims.len() {
            idx = idx * dims[t] + c[t] % dims[t];
        }
        idx as usize
    };
    let n = total as usize;
    let mut out = vec![ComplexBall::zero(prec); n];
    for mi in 0..n {
        let m = unflatten(mi as u64);
        let mut acc = ComplexBall::zero(prec);
        for ii in 0..n {
            let i = unflatten(ii as u64);
            let diff: Vec<u64> = (0..dims.len())
                .map(|t| (m[t] + dims[t] - i[t]) % dims[t])
                .collect();
            acc = acc.add(&a[ii].mul(&b[flatten(&diff)]));
        }
        out[mi] = acc;
    }
    Ok(out)
}

/// Map multi-index m to the sigma-table index of g_1^(m_1) ... g_k^(m_k).
fn group_index_table(gal: &GaloisData) -> Result<Vec<usize>> {
    let ab = gal
        .abelian
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("no abelian structure present".into()))?;
    let total: u64 = ab.dims.iter().product();
    let unflatten = |mut idx: u64| -> Vec<u64> {
        let mut c = vec![0u64; ab.dims.len()];
        for t in (0..ab.dims.len()).rev() {
            c[t] = idx % ab.dims[t];
            idx /= ab.dims[t];
        }
        c
    };
    let mut table = Vec::with_capacity(total as usize);
    for mi in 0..total {
        let m = unflatten(mi);
        let mut idx = 0usize; // identity
        for t in 0..ab.dims.len() {
            for _ in 0..m[t] {
                idx = gal.compose_index(idx, ab.generators[t])?;
            }
        }
        table.push(idx);
    }
    // must be a bijection onto the table
    let mut sorted = table.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != gal.d {
        return Err(Error::InvalidInput(
            "abelian coordinates do not enumerate the group".into(),
        ));
    }
    Ok(table)
}

/// recover_integer through the DFT fast path: with group-coordinate arrays,
/// w = correlation of a with v, so v = reverse(F^-1(F(w) / F(a))).
pub fn recover_abelian(nb: &NormalBasis, w: &[ComplexBall]) -> Result<NfElt> {
    let gal = &nb.gal;
    let table = group_index_table(gal)?;
    let ab = gal.abelian.as_ref().unwrap();
    let d = gal.d;
    if w.len() != d {
        return Err(Error::InvalidInput(format!(
            "expected {d} conjugate values, got {}",
            w.len()
        )));
    }
    let prec = nb.prec;
    // arrays in group coordinates
    let mut a_arr = Vec::with_capacity(d);
    for &si in &table {
        a_arr.push(gal.apply(si, &nb.alpha).embed(nb.root_index, prec)?);
    }
    let w_arr: Vec<ComplexBall> = table.iter().map(|&si| w[si].clone()).collect();
    let fa = dft(&a_arr, &ab.dims, false, prec)?;
    let fw = dft(&w_arr, &ab.dims, false, prec)?;
    let mut quot = Vec::with_capacity(d);
    for (num, den) in fw.iter().zip(&fa) {
        if den.contains_zero() {
            return Err(Error::InvalidInput(
                "DFT of the normal-basis array touches 0: degenerate alpha".into(),
            ));
        }
        quot.push(num.div(den)?);
    }
    let vt = dft(&quot, &ab.dims, true, prec)?;
    // v[m] = vt[-m] in group coordinates; then back to sigma indexing
    let unflatten = |mut idx: u64| -> Vec<u64> {
        let mut c = vec![0u64; ab.dims.len()];
        for t in (0..ab.dims.len()).rev() {
            c[t] = idx % ab.dims[t];
            idx /= ab.dims[t];
        }
        c
    };
    let flatten = |c: &[u64]| -> usize {
        let mut idx = 0u64;
        for t in 0..ab.dims.len() {
            idx = idx * ab.dims[t] + c[t] % ab.dims[t];
        }
        idx as usize
    };
    let mut v_sigma = vec![ComplexBall::zero(prec); d];
    for mi in 0..d {
        let m = unflatten(mi as u64);
        let neg: Vec<u64> = (0..ab.dims.len())
            .map(|t| (ab.dims[t] - m[t]) % ab.dims[t])
            .collect();
        v_sigma[table[mi]] = vt[flatten(&neg)].clone();
    }
    // identical rounding/assembly/verification as the direct path
    let dscale = ComplexBall::from_bigint(&nb.d_den, prec);
    let mut rounded = Vec::with_capacity(d);
    for vj in &v_sigma {
        let u = vj.mul(&dscale);
        rounded.push(round_coord(&u, gal, nb.root_index, prec)?);
    }
    let gamma = assemble(nb, &rounded);
    verify(nb, &gamma, w, &verification_tol(prec))?;
    Ok(gamma)
}

/// Forward-compute the conjugate enclosures of gamma (testing aid and the
/// verification primitive).
pub fn conjugate_values(nb: &NormalBasis, gamma: &NfElt) -> Result<Vec<ComplexBall>> {
    (0..nb.gal.d)
        .map(|j| nb.gal.apply(j, gamma).embed(nb.root_index, nb.prec))
        .collect()
}
