//! Per-prime denominator exponents and the certificate C = prod p^{r_p}:
//! the vertical contribution e_den * v_vert at primes dividing the level,
//! the horizontal contribution v_a near extra-automorphism points, and the
//! containment tests that rule the horizontal part out.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::cosets::{
    automorphism_set, e_den, DoubleCoset, JClass, ReductionCase, SubgroupH, DEFAULT_COSET_BUDGET,
};
use crate::error::{Error, Result};
use crate::exact::modmatrix::ModMatrix;
use crate::exact::nf::NfElt;
use crate::exact::padic::PadicElement;
use crate::exact::rat::{big_rational, factor};
use crate::expansion::{cert_multiplier, CertPrimes};
use crate::formal_group::{
    formal_group, formal_height, good_reduction_model, v_vert_bound, newton_polygon,
    WeierstrassModel,
};
use crate::quaternion::{containment, embed_tau, m_j0, maximal_order, tau_matrix};
use crate::series::PadicCtx;

/// Which divisibility condition made a prime relevant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PrimeTag {
    pub level: bool,
    pub j: bool,
    pub j_1728: bool,
}

fn ensure_in_scope_j(j_e: &NfElt) -> Result<()> {
    for j0 in [0i64, 1728] {
        if j_e
            .sub(&NfElt::from_rational(j_e.field.clone(), big_rational(j0, 1)))
            .is_zero()
        {
            return Err(Error::OutOfScope(format!(
                "basepoint j-invariant {j0} has extra automorphisms"
            )));
        }
    }
    Ok(())
}

/// Rational primes dividing N * Norm(j_E) * Norm(j_E - 1728), ascending,
/// tagged with the conditions that triggered them.
pub fn relevant_primes(level: u64, j_e: &NfElt) -> Result<Vec<(u64, PrimeTag)>> {
    ensure_in_scope_j(j_e)?;
    let mut tags: BTreeMap<u64, PrimeTag> = BTreeMap::new();
    let mut mark = |n: &BigInt, f: fn(&mut PrimeTag)| -> Result<()> {
        for (p, _) in factor(n) {
            let p = p.try_into().map_err(|_| {
                Error::Resource("relevant prime does not fit in u64".into())
            })?;
            f(tags.entry(p).or_default());
        }
        Ok(())
    };
    mark(&BigInt::from(level), |t| t.level = true)?;
    mark(j_e.norm().numer(), |t| t.j = true)?;
    let shifted = j_e.sub(&NfElt::from_rational(
        j_e.field.clone(),
        big_rational(1728, 1),
    ));
    mark(shifted.norm().numer(), |t| t.j_1728 = true)?;
    Ok(tags.into_iter().collect())
}

/// nu_p of a nonzero rational, normalized nu(p) = 1.
pub fn rational_valuation(p: u64, x: &BigRational) -> i64 {
    assert!(!x.is_zero());
    let pb = BigInt::from(p);
    let count = |mut n: BigInt| -> i64 {
        let mut v = 0;
        n = n.abs();
        while (&n % &pb).is_zero() {
            n /= &pb;
            v += 1;
        }
        v
    };
    count(x.numer().clone()) - count(x.denom().clone())
}

/// Largest nu_p among the conjugates of an algebraic number, read off the
/// Newton polygon of its characteristic polynomial (ascending coefficients,
/// monic).
pub fn max_conjugate_valuation(p: u64, poly: &[BigRational]) -> Result<BigRational> {
    let pts: Vec<(i64, Option<BigRational>)> = poly
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let v = if c.is_zero() {
                None
            } else {
                Some(big_rational(rational_valuation(p, c), 1))
            };
            (i as i64, v)
        })
        .collect();
    if pts.first().map(|(_, v)| v.is_none()).unwrap_or(true) {
        return Err(Error::InvalidInput(
            "zero constant term: element is not invertible".into(),
        ));
    }
    let poly = newton_polygon(&pts)?;
    Ok(poly.max_slope().unwrap_or_else(BigRational::zero))
}

/// max over p-adic places of nu(j_E - j0), floored at 0.
pub fn v_a_at(p: u64, j_e: &NfElt, j0: i64) -> Result<BigRational> {
    let shifted = j_e.sub(&NfElt::from_rational(j_e.field.clone(), big_rational(j0, 1)));
    let v = max_conjugate_valuation(p, &shifted.char_poly())?;
    Ok(v.max(BigRational::zero()))
}

/// What to do at residue characteristic 2 or 3, where the tame machinery
/// does not apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallPrimePolicy {
    /// Refuse the basepoint (default).
    Reject,
    /// Take the unconditional horizontal bound r = v_a.
    BoundByVa,
}

/// Everything the per-prime driver needs about the basepoint.
#[derive(Clone)]
pub struct BasepointCtx {
    pub level: u64,
    pub h: Arc<SubgroupH>,
    pub g: ModMatrix,
    /// tau satisfies tau^2 + r tau + s = 0.
    pub tau_r: i64,
    pub tau_s: i64,
    pub j_e: NfElt,
    pub small_primes: SmallPrimePolicy,
    pub coset_budget: u64,
}

impl BasepointCtx {
    pub fn validate(&self) -> Result<()> {
        if num::integer::gcd(self.level, 6) != 1 {
            return Err(Error::InvalidInput(format!(
                "level {} is not coprime to 6",
                self.level
            )));
        }
        if self.h.n != self.level || self.g.n != self.level {
            return Err(Error::InvalidInput("level mismatch in H or g".into()));
        }
        let disc = self.tau_r * self.tau_r - 4 * self.tau_s;
        if disc >= 0 {
            return Err(Error::InvalidInput(
                "tau is not imaginary quadratic (discriminant >= 0)".into(),
            ));
        }
        ensure_in_scope_j(&self.j_e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProvKind {
    Vertical,
    Horizontal,
    Combined,
    SmallPrimeBound,
}

impl ProvKind {
    fn as_str(self) -> &'static str {
        match self {
            ProvKind::Vertical => "vertical",
            ProvKind::Horizontal => "horizontal",
            ProvKind::Combined => "combined",
            ProvKind::SmallPrimeBound => "small-prime-bound",
        }
    }

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "vertical" => ProvKind::Vertical,
            "horizontal" => ProvKind::Horizontal,
            "combined" => ProvKind::Combined,
            "small-prime-bound" => ProvKind::SmallPrimeBound,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown provenance kind {other:?}"
                )))
            }
        })
    }
}

/// The intermediate values behind one exponent, enough to recompute it.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub kind: ProvKind,
    pub v_a: BigRational,
    pub v_d_vert: Option<BigRational>,
    pub e_den: Option<u64>,
    pub v_d_horiz: BigRational,
    pub tag: PrimeTag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrimeEntry {
    pub r: BigRational,
    pub provenance: Provenance,
}

/// Ordinary reduction flag and v_vert for a rational j-invariant at p.
pub fn vertical_values(p: u64, j_e: &NfElt) -> Result<(bool, BigRational)> {
    let j = j_e.as_rational().ok_or_else(|| {
        Error::OutOfScope(
            "vertical analysis needs a rational j-invariant at this prime".into(),
        )
    })?;
    let pp = (p * p) as usize;
    let ctx = PadicCtx {
        p,
        e: 1,
        prec: big_rational((pp + 12) as i64, 1),
    };
    let je = PadicElement::from_rational(p, 1, &j, ctx.prec.clone());
    let model = WeierstrassModel::from_j(ctx, &je)?;
    let (good, _ep) = good_reduction_model(&model, p)?;
    let f = formal_group(&good, pp + 8)?;
    let ordinary = formal_height(&f)? == 1;
    let v = v_vert_bound(&f, p, 1)?;
    Ok((ordinary, v))
}

/// Is the extra-automorphism curve with this j0 supersingular at p?
fn supersingular_j0(p: u64, j0: i64) -> bool {
    match j0 {
        0 => p % 3 == 2,
        1728 => p % 4 == 3,
        _ => unreachable!("j0 is 0 or 1728"),
    }
}

fn jclass(j0: i64) -> JClass {
    match j0 {
        0 => JClass::Zero,
        _ => JClass::S1728,
    }
}

/// Horizontal containment test at one nearby j0: true means the extra
/// automorphisms already live in g^-1 H g and contribute no denominator.
fn horizontal_contained(ctx: &BasepointCtx, p: u64, j0: i64) -> Result<bool> {
    let n = ctx.level;
    let tm = tau_matrix(n, ctx.tau_r, ctx.tau_s);
    if !supersingular_j0(p, j0) {
        // rank-2 endomorphisms: the automorphisms are polynomials in tau
        let aut = automorphism_set(jclass(j0), &tm, n)?;
        return containment(&aut, &ctx.h, &ctx.g);
    }
    // rank-4: quaternionic side
    let order = maximal_order(p)?;
    let embeddings = match embed_tau(&order, ctx.tau_r, ctx.tau_s) {
        Ok(e) => e,
        // tau not visible in this maximal order: inconclusive, so do not
        // certify the containment
        Err(Error::NoEmbedding(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    for tau in &embeddings {
        let m = m_j0(&order, tau, ctx.tau_r, ctx.tau_s, n, j0 as u64)?;
        if !containment(&m, &ctx.h, &ctx.g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The exponent r_p with provenance: vertical part e_den * v_vert when p
/// divides the level, horizontal part v_a unless the containment test
/// discharges it, combined as a max.
pub fn v_den_for_prime(ctx: &BasepointCtx, p: u64) -> Result<PrimeEntry> {
    ctx.validate()?;
    let tag = relevant_primes(ctx.level, &ctx.j_e)?
        .into_iter()
        .find(|(q, _)| *q == p)
        .map(|(_, t)| t)
        .ok_or_else(|| Error::InvalidInput(format!("{p} is not a relevant prime")))?;
    // step 1: horizontal candidates
    let mut j0s = Vec::new();
    for j0 in [0i64, 1728] {
        let v = v_a_at(p, &ctx.j_e, j0)?;
        if v.is_positive() {
            j0s.push((j0, v));
        }
    }
    let v_a = j0s
        .iter()
        .map(|(_, v)| v.clone())
        .max()
        .unwrap_or_else(BigRational::zero);
    if p < 5 {
        if v_a.is_zero() && ctx.level % p != 0 {
            // relevant through a norm denominator only; nothing to certify
            return Ok(PrimeEntry {
                r: BigRational::zero(),
                provenance: Provenance {
                    kind: ProvKind::Horizontal,
                    v_a,
                    v_d_vert: None,
                    e_den: None,
                    v_d_horiz: BigRational::zero(),
                    tag,
                },
            });
        }
        return match ctx.small_primes {
            SmallPrimePolicy::Reject => Err(Error::OutOfScope(format!(
                "residue characteristic {p} < 5: wild ramification not supported"
            ))),
            SmallPrimePolicy::BoundByVa => Ok(PrimeEntry {
                r: v_a.clone(),
                provenance: Provenance {
                    kind: ProvKind::SmallPrimeBound,
                    v_a,
                    v_d_vert: None,
                    e_den: None,
                    v_d_horiz: BigRational::zero(),
                    tag,
                },
            }),
        };
    }
    // step 2: vertical part
    let (big_v, v_vert, ed) = if ctx.level % p == 0 {
        let (ordinary, v_vert) = vertical_values(p, &ctx.j_e)?;
        let mut m = 0u32;
        let mut rest = ctx.level;
        while rest % p == 0 {
            rest /= p;
            m += 1;
        }
        let tm = tau_matrix(ctx.level, ctx.tau_r, ctx.tau_s);
        // reduced automorphisms: extra ones only when j_E meets j0 mod p
        let a_red = match j0s.first() {
            Some((j0, _)) if !supersingular_j0(p, *j0) => {
                automorphism_set(jclass(*j0), &tm, ctx.level)?
            }
            _ => vec![
                ModMatrix::identity(ctx.level),
                ModMatrix::neg_identity(ctx.level),
            ],
        };
        let a_char0 = vec![
            ModMatrix::identity(ctx.level),
            ModMatrix::neg_identity(ctx.level),
        ];
        let dc = DoubleCoset::new(ctx.h.clone(), ctx.g, a_char0)?;
        let case = ReductionCase::new(ctx.level, p, m, ordinary, a_red)?;
        let ed = e_den(&dc, &case, ctx.coset_budget)?;
        let v = &v_vert * BigRational::from(BigInt::from(ed));
        (v, Some(v_vert), Some(ed))
    } else {
        (BigRational::zero(), None, None)
    };
    // step 3
    if big_v >= v_a {
        return Ok(PrimeEntry {
            r: big_v,
            provenance: Provenance {
                kind: ProvKind::Vertical,
                v_a,
                v_d_vert: v_vert,
                e_den: ed,
                v_d_horiz: BigRational::zero(),
                tag,
            },
        });
    }
    // step 4: horizontal test at each nearby j0
    let mut all_contained = true;
    for (j0, _) in &j0s {
        if !horizontal_contained(ctx, p, *j0)? {
            all_contained = false;
            break;
        }
    }
    if all_contained {
        Ok(PrimeEntry {
            r: big_v,
            provenance: Provenance {
                kind: ProvKind::Horizontal,
                v_a,
                v_d_vert: v_vert,
                e_den: ed,
                v_d_horiz: BigRational::zero(),
                tag,
            },
        })
    } else {
        let r = big_v.clone().max(v_a.clone());
        Ok(PrimeEntry {
            r,
            provenance: Provenance {
                kind: ProvKind::Combined,
                v_a: v_a.clone(),
                v_d_vert: v_vert,
                e_den: ed,
                v_d_horiz: v_a,
                tag,
            },
        })
    }
}

/// C = prod p^{r_p} with provenance per prime; exponents are rationals and
/// only C^[n] = prod p^ceil(n r_p) is ever evaluated as an integer.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DenominatorCertificate {
    pub entries: BTreeMap<u64, PrimeEntry>,
}

/// Run the per-prime driver over every relevant prime (parallel map) and
/// assemble the certificate.
pub fn certify(ctx: &BasepointCtx) -> Result<DenominatorCertificate> {
    ctx.validate()?;
    let primes = relevant_primes(ctx.level, &ctx.j_e)?;
    let computed: Vec<(u64, Result<PrimeEntry>)> = primes
        .par_iter()
        .map(|(p, _)| (*p, v_den_for_prime(ctx, *p)))
        .collect();
    let mut entries = BTreeMap::new();
    for (p, e) in computed {
        entries.insert(p, e?);
    }
    Ok(DenominatorCertificate { entries })
}

fn rat_str(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn parse_rat(s: &str) -> Result<BigRational> {
    let mut it = s.splitn(2, '/');
    let num: BigInt = it
        .next()
        .unwrap()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))?;
    let den: BigInt = match it.next() {
        Some(d) => d
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::InvalidInput("zero denominator".into()));
    }
    Ok(BigRational::new(num, den))
}

impl DenominatorCertificate {
    /// Exponent-rate view consumed by coefficient rescaling.
    pub fn cert_primes(&self) -> CertPrimes {
        self.entries
            .iter()
            .filter(|(_, e)| e.r.is_positive())
            .map(|(p, e)| (BigInt::from(*p), e.r.clone()))
            .collect()
    }

    /// C^[n] as an exact positive integer.
    pub fn multiplier(&self, n: u64) -> BigInt {
        cert_multiplier(&self.cert_primes(), n)
    }

    /// Human-readable C, e.g. "5^(5/4)*7^2", or "1".
    pub fn c_sym(&self) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .filter(|(_, e)| e.r.is_positive())
            .map(|(p, e)| {
                if e.r.is_one() {
                    format!("{p}")
                } else if e.r.denom().is_one() {
                    format!("{p}^{}", e.r.numer())
                } else {
                    format!("{p}^({})", rat_str(&e.r))
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn to_json(&self) -> Value {
        let mut primes = Map::new();
        for (p, e) in &self.entries {
            let prov = &e.provenance;
            let mut pv = Map::new();
            pv.insert("kind".into(), json!(prov.kind.as_str()));
            pv.insert("v_a".into(), json!(rat_str(&prov.v_a)));
            if let Some(v) = &prov.v_d_vert {
                pv.insert("v_d_vert".into(), json!(rat_str(v)));
            }
            if let Some(ed) = prov.e_den {
                pv.insert("e_den".into(), json!(ed));
            }
            pv.insert("v_d_horiz".into(), json!(rat_str(&prov.v_d_horiz)));
            pv.insert(
                "tags".into(),
                json!({
                    "level": prov.tag.level,
                    "j": prov.tag.j,
                    "j_1728": prov.tag.j_1728,
                }),
            );
            primes.insert(
                p.to_string(),
                json!({ "r": rat_str(&e.r), "provenance": Value::Object(pv) }),
            );
        }
        json!({
            "schema": "cm-expand/1",
            "primes": Value::Object(primes),
            "C_sym": self.c_sym(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let primes = v
            .get("primes")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::InvalidInput("certificate lacks \"primes\"".into()))?;
        let mut entries = BTreeMap::new();
        for (ps, pe) in primes {
            let p: u64 = ps
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad prime key {ps:?}")))?;
            let r = parse_rat(
                pe.get("r")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::InvalidInput("prime entry lacks \"r\"".into()))?,
            )?;
            if r.is_negative() {
                return Err(Error::InvalidInput("negative certificate exponent".into()));
            }
            let prov = pe
                .get("provenance")
                .ok_or_else(|| Error::InvalidInput("prime entry lacks provenance".into()))?;
            let kind = ProvKind::from_str(
                prov.get("kind").and_then(Value::as_str).unwrap_or(""),
            )?;
            let get_rat = |key: &str| -> Result<Option<BigRational>> {
                match prov.get(key).and_then(Value::as_str) {
                    Some(s) => Ok(Some(parse_rat(s)?)),
                    None => Ok(None),
                }
            };
            let tag_of = |key: &str| {
                prov.get("tags")
                    .and_then(|t| t.get(key))
                    .and_then(Value::as_bool)
                    .unwrap_or(false)
            };
            entries.insert(
                p,
                PrimeEntry {
                    r,
                    provenance: Provenance {
                        kind,
                        v_a: get_rat("v_a")?.unwrap_or_else(BigRational::zero),
                        v_d_vert: get_rat("v_d_vert")?,
                        e_den: prov.get("e_den").and_then(Value::as_u64),
                        v_d_horiz: get_rat("v_d_horiz")?.unwrap_or_else(BigRational::zero),
                        tag: PrimeTag {
                            level: tag_of("level"),
                            j: tag_of("j"),
                            j_1728: tag_of("j_1728"),
                        },
                    },
                },
            );
        }
        Ok(DenominatorCertificate { entries })
    }
}

pub fn default_budget() -> u64 {
    DEFAULT_COSET_BUDGET
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::nf::NumberField;

    fn rational_j(j: i64) -> NfElt {
        NfElt::from_rational(NumberField::rationals(), big_rational(j, 1))
    }

    fn tags(level: bool, j: bool, j_1728: bool) -> PrimeTag {
        PrimeTag { level, j, j_1728 }
    }

    #[test]
    fn relevant_primes_level_5_j_3() {
        // j - 1728 = -1725 = -3 * 5^2 * 23
        let out = relevant_primes(5, &rational_j(3)).unwrap();
        assert_eq!(
            out,
            vec![
                (3, tags(false, true, true)),
                (5, tags(true, false, true)),
                (23, tags(false, false, true)),
            ]
        );
    }

    #[test]
    fn relevant_primes_taxicab() {
        // 1729 = 7 * 13 * 19; 1729 - 1728 = 1
        let out = relevant_primes(1, &rational_j(1729)).unwrap();
        let ps: Vec<u64> = out.iter().map(|(p, _)| *p).collect();
        assert_eq!(ps, vec![7, 13, 19]);
        assert!(out.iter().all(|(_, t)| t.j && !t.j_1728 && !t.level));
    }

    #[test]
    fn relevant_primes_unit_j() {
        // j = 864 + sqrt(864^2 - 1): Norm(j) = 1, Norm(j - 1728) = -1
        let d = 864i64 * 864 - 1;
        let f = NumberField::new(vec![BigInt::from(-d), BigInt::zero(), BigInt::one()]).unwrap();
        let j = NfElt::generator(f.clone()).add(&NfElt::from_rational(f, big_rational(864, 1)));
        assert_eq!(j.norm(), big_rational(1, 1));
        let out = relevant_primes(1, &j).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn out_of_scope_j() {
        assert!(matches!(
            relevant_primes(5, &rational_j(0)),
            Err(Error::OutOfScope(_))
        ));
        assert!(matches!(
            relevant_primes(5, &rational_j(1728)),
            Err(Error::OutOfScope(_))
        ));
    }

    #[test]
    fn v_a_rational_and_quadratic() {
        assert_eq!(v_a_at(5, &rational_j(3), 1728).unwrap(), big_rational(2, 1));
        assert_eq!(v_a_at(5, &rational_j(3), 0).unwrap(), BigRational::zero());
        // j = sqrt(5): both conjugates have nu_5 = 1/2
        let f = NumberField::new(vec![BigInt::from(-5), BigInt::zero(), BigInt::one()]).unwrap();
        let j = NfElt::generator(f);
        assert_eq!(v_a_at(5, &j, 0).unwrap(), big_rational(1, 2));
    }

    fn disc_11_ctx(h: Arc<SubgroupH>) -> BasepointCtx {
        // CM by (1 + sqrt(-11))/2: tau^2 - tau + 3 = 0; j = -32768
        BasepointCtx {
            level: 5,
            h,
            g: ModMatrix::identity(5),
            tau_r: -1,
            tau_s: 3,
            j_e: rational_j(-32768),
            small_primes: SmallPrimePolicy::BoundByVa,
            coset_budget: DEFAULT_COSET_BUDGET,
        }
    }

    #[test]
    fn vertical_composition_borel_5() {
        // ordinary at 5 (disc -11 is a QR mod 5), Borel level: e_den = 5,
        // v_vert = 1/4, no horizontal trigger at 5
        let ctx = disc_11_ctx(Arc::new(SubgroupH::borel(5).unwrap()));
        let e = v_den_for_prime(&ctx, 5).unwrap();
        assert_eq!(e.r, big_rational(5, 4));
        assert_eq!(e.provenance.kind, ProvKind::Vertical);
        assert_eq!(e.provenance.e_den, Some(5));
        assert_eq!(e.provenance.v_d_vert, Some(big_rational(1, 4)));
        assert_eq!(e.provenance.v_a, BigRational::zero());
    }

    #[test]
    fn horizontal_discharged_by_full_group() {
        // j = 1777: nu_7(j - 1728) = 2, 7 = 3 mod 4 so the 1728 curve is
        // supersingular at 7; with H = GL_2 the containment always holds
        let ctx = BasepointCtx {
            level: 5,
            h: Arc::new(SubgroupH::full(5).unwrap()),
            g: ModMatrix::identity(5),
            tau_r: 0,
            tau_s: 1,
            j_e: rational_j(1777),
            small_primes: SmallPrimePolicy::Reject,
            coset_budget: DEFAULT_COSET_BUDGET,
        };
        let e = v_den_for_prime(&ctx, 7).unwrap();
        assert_eq!(e.r, BigRational::zero());
        assert_eq!(e.provenance.kind, ProvKind::Horizontal);
        assert_eq!(e.provenance.v_a, big_rational(2, 1));
    }

    #[test]
    fn horizontal_failure_keeps_v_a() {
        // same basepoint with Borel H: M_{1728} contains the antidiagonal
        // root of -1, which is not upper triangular
        let ctx = BasepointCtx {
            level: 5,
            h: Arc::new(SubgroupH::borel(5).unwrap()),
            g: ModMatrix::identity(5),
            tau_r: 0,
            tau_s: 1,
            j_e: rational_j(1777),
            small_primes: SmallPrimePolicy::Reject,
            coset_budget: DEFAULT_COSET_BUDGET,
        };
        let e = v_den_for_prime(&ctx, 7).unwrap();
        assert_eq!(e.r, big_rational(2, 1));
        assert_eq!(e.provenance.kind, ProvKind::Combined);
    }

    #[test]
    fn small_prime_policy() {
        let mut ctx = disc_11_ctx(Arc::new(SubgroupH::borel(5).unwrap()));
        // j = -2^15, so p = 2 triggers horizontally with v_a = 15
        let e = v_den_for_prime(&ctx, 2).unwrap();
        assert_eq!(e.r, big_rational(15, 1));
        assert_eq!(e.provenance.kind, ProvKind::SmallPrimeBound);
        ctx.small_primes = SmallPrimePolicy::Reject;
        assert!(matches!(
            v_den_for_prime(&ctx, 2),
            Err(Error::OutOfScope(_))
        ));
    }

    #[test]
    fn certify_disc_11_borel() {
        let ctx = disc_11_ctx(Arc::new(SubgroupH::borel(5).unwrap()));
        let cert = certify(&ctx).unwrap();
        // relevant primes: 2 (j and j-1728), 5 (level), 7 and 11 (j - 1728)
        let ps: Vec<u64> = cert.entries.keys().copied().collect();
        assert_eq!(ps, vec![2, 5, 7, 11]);
        assert_eq!(cert.entries[&5].r, big_rational(5, 4));
        // every exponent at least matches both pure parts
        for e in cert.entries.values() {
            let vert = e
                .provenance
                .v_d_vert
                .clone()
                .zip(e.provenance.e_den)
                .map(|(v, ed)| v * BigRational::from(BigInt::from(ed)))
                .unwrap_or_else(BigRational::zero);
            assert!(e.r >= vert);
            assert!(e.r >= e.provenance.v_d_horiz);
        }
    }

    #[test]
    fn certificate_multiplier_and_sym() {
        let mut cert = DenominatorCertificate::default();
        let entry = |r: BigRational| PrimeEntry {
            r,
            provenance: Provenance {
                kind: ProvKind::Vertical,
                v_a: BigRational::zero(),
                v_d_vert: None,
                e_den: None,
                v_d_horiz: BigRational::zero(),
                tag: PrimeTag::default(),
            },
        };
        assert_eq!(cert.multiplier(7), BigInt::one());
        assert_eq!(cert.c_sym(), "1");
        cert.entries.insert(5, entry(big_rational(5, 4)));
        // ceil(1 * 5/4) = 2, ceil(4 * 5/4) = 5
        assert_eq!(cert.multiplier(1), BigInt::from(25));
        assert_eq!(cert.multiplier(4), BigInt::from(5).pow(5));
        cert.entries.insert(7, entry(big_rational(1, 2)));
        assert_eq!(cert.c_sym(), "5^(5/4)*7^(1/2)");
        cert.entries.get_mut(&5).unwrap().r = big_rational(1, 4);
        // C^[3] = 5^1 * 7^2
        assert_eq!(cert.multiplier(3), BigInt::from(245));
    }

    #[test]
    fn multiplier_monotone() {
        let ctx = disc_11_ctx(Arc::new(SubgroupH::borel(5).unwrap()));
        let cert = certify(&ctx).unwrap();
        for n in 1..=50u64 {
            let a = cert.multiplier(n);
            let b = cert.multiplier(n + 1);
            assert!((&b % &a).is_zero(), "C^[{n}] must divide C^[{}]", n + 1);
        }
    }

    #[test]
    fn json_round_trip() {
        let ctx = disc_11_ctx(Arc::new(SubgroupH::borel(5).unwrap()));
        let cert = certify(&ctx).unwrap();
        let v = cert.to_json();
        assert_eq!(v["schema"], "cm-expand/1");
        assert_eq!(v["primes"]["5"]["r"], "5/4");
        let back = DenominatorCertificate::from_json(&v).unwrap();
        assert_eq!(back, cert);
        // byte determinism of the serialized form
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            serde_json::to_string(&cert.to_json()).unwrap()
        );
    }
}
