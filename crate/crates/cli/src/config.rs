//! Job configuration: one JSON document describing the basepoint, the level
//! structure, the cusp form, the conjugate orbit, and the recovery data.

use std::path::Path;
use std::sync::Arc;

use num::rational::BigRational;
use num::{BigInt, One, Zero};
use serde_json::Value;

use cm_expand::cosets::SubgroupH;
use cm_expand::denominators::{BasepointCtx, SmallPrimePolicy};
use cm_expand::error::{Error, Result};
use cm_expand::exact::linalg::QMat;
use cm_expand::exact::modmatrix::ModMatrix;
use cm_expand::exact::nf::{NfElt, NumberField};
use cm_expand::recover::{AbelianStructure, GaloisData};
use cm_expand::series::{NfCtx, Series};

pub const SCHEMA: &str = "cm-expand/1";

fn want<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::InvalidInput(format!("config lacks \"{key}\"")))
}

fn as_u64(v: &Value, key: &str) -> Result<u64> {
    want(v, key)?
        .as_u64()
        .ok_or_else(|| Error::InvalidInput(format!("\"{key}\" must be a nonnegative integer")))
}

fn as_i64(v: &Value, key: &str) -> Result<i64> {
    want(v, key)?
        .as_i64()
        .ok_or_else(|| Error::InvalidInput(format!("\"{key}\" must be an integer")))
}

fn int_array(v: &Value, what: &str) -> Result<Vec<BigInt>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::InvalidInput(format!("{what} must be an array")))?;
    arr.iter()
        .map(|x| match x {
            Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().unwrap())),
            Value::String(s) => s
                .parse::<BigInt>()
                .map_err(|_| Error::InvalidInput(format!("bad integer {s:?} in {what}"))),
            _ => Err(Error::InvalidInput(format!("{what} holds a non-integer"))),
        })
        .collect()
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let mut it = s.splitn(2, '/');
    let num: BigInt = it
        .next()
        .unwrap()
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))?;
    let den: BigInt = match it.next() {
        Some(d) => d
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

fn rational_value(v: &Value, what: &str) -> Result<BigRational> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(BigRational::from(BigInt::from(n.as_i64().unwrap()))),
        Value::String(s) => parse_rational(s),
        _ => Err(Error::InvalidInput(format!(
            "{what} must be an integer or a \"num/den\" string"
        ))),
    }
}

fn mod_matrix(v: &Value, n: u64, what: &str) -> Result<ModMatrix> {
    let rows = v
        .as_array()
        .filter(|r| r.len() == 2)
        .ok_or_else(|| Error::InvalidInput(format!("{what} must be [[a,b],[c,d]]")))?;
    let mut e = [0i64; 4];
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == 2)
            .ok_or_else(|| Error::InvalidInput(format!("{what} must be [[a,b],[c,d]]")))?;
        for (j, x) in row.iter().enumerate() {
            e[2 * i + j] = x
                .as_i64()
                .ok_or_else(|| Error::InvalidInput(format!("{what} holds a non-integer")))?;
        }
    }
    Ok(ModMatrix::from_signed(n, e))
}

/// Cyclotomic polynomial Phi_n, ascending integer coefficients, by dividing
/// x^n - 1 by the Phi_d of the proper divisors.
pub fn cyclotomic_poly(n: u64) -> Vec<BigInt> {
    fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
        // den is monic; division is exact here
        let mut rem = num.to_vec();
        let dd = den.len() - 1;
        let mut q = vec![BigInt::zero(); rem.len() - dd];
        for k in (0..q.len()).rev() {
            let c = rem[k + dd].clone();
            q[k] = c.clone();
            for (i, d) in den.iter().enumerate() {
                rem[k + i] -= &c * d;
            }
        }
        assert!(rem.iter().all(|c| c.is_zero()), "inexact division");
        q
    }
    assert!(n >= 1);
    if n == 1 {
        return vec![BigInt::from(-1), BigInt::one()];
    }
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    let mut out = num;
    for d in 1..n {
        if n % d == 0 {
            out = poly_div_exact(&out, &cyclotomic_poly(d));
        }
    }
    out
}

/// The cusp form as an exact series over its coefficient field.
#[derive(Clone)]
pub struct CuspForm {
    pub series: Series<NfCtx>,
}

impl CuspForm {
    pub fn from_json(v: &Value) -> Result<Self> {
        let zeta_order = v.get("zeta_order").and_then(Value::as_u64).unwrap_or(1);
        let field = if zeta_order <= 2 {
            NumberField::rationals()
        } else {
            NumberField::new(cyclotomic_poly(zeta_order))?
        };
        let deg = field.degree();
        let offset = v.get("offset").and_then(Value::as_i64).unwrap_or(0);
        if offset < -1 {
            return Err(Error::InvalidInput("series offset below -1".into()));
        }
        let coeffs_v = want(v, "coeffs")?
            .as_array()
            .ok_or_else(|| Error::InvalidInput("\"coeffs\" must be an array".into()))?;
        let mut coeffs = Vec::with_capacity(coeffs_v.len());
        for c in coeffs_v {
            let ints = int_array(c, "cusp form coefficient")?;
            if ints.len() > deg {
                return Err(Error::InvalidInput(format!(
                    "coefficient vector longer than the field degree {deg}"
                )));
            }
            let mut coords: Vec<BigRational> =
                ints.into_iter().map(BigRational::from).collect();
            coords.resize(deg, BigRational::zero());
            coeffs.push(NfElt::new(field.clone(), coords));
        }
        let ctx = NfCtx {
            field: field.clone(),
        };
        Ok(CuspForm {
            series: Series::new(ctx, offset, coeffs),
        })
    }
}

/// One Galois-conjugate basepoint: tau = (-b + sqrt(disc))/(2a) with the
/// discriminant of the configured tau.
#[derive(Clone, Copy, Debug)]
pub struct ConjugatePoint {
    pub a: i64,
    pub b: i64,
    /// Complex root of the j_E field realizing this conjugate.
    pub j_root: usize,
    /// Complex root of the coefficient field (zeta embedding).
    pub form_root: usize,
}

pub struct GaloisConfig {
    pub data: GaloisData,
    pub root_index: usize,
}

pub struct JobConfig {
    pub level: u64,
    pub h: Arc<SubgroupH>,
    pub g: ModMatrix,
    pub tau_r: i64,
    pub tau_s: i64,
    pub j_e: NfElt,
    pub form: CuspForm,
    pub conjugates: Vec<ConjugatePoint>,
    pub galois: Option<GaloisConfig>,
    pub precision: usize,
    pub n: usize,
    pub q_terms: usize,
    pub small_primes: SmallPrimePolicy,
    pub coset_budget: u64,
}

fn parse_galois(v: &Value) -> Result<GaloisConfig> {
    let l_poly = int_array(want(v, "l_poly")?, "\"l_poly\"")?;
    let field = NumberField::new(l_poly)?;
    let d = field.degree();
    let k_poly = match v.get("k_poly") {
        Some(kp) => int_array(kp, "\"k_poly\"")?,
        None => vec![BigInt::zero(), BigInt::one()],
    };
    let k_gen_in_l = match v.get("k_gen_in_l") {
        Some(Value::Null) | None => None,
        Some(kg) => {
            let arr = kg
                .as_array()
                .ok_or_else(|| Error::InvalidInput("\"k_gen_in_l\" must be an array".into()))?;
            Some(
                arr.iter()
                    .map(|x| rational_value(x, "\"k_gen_in_l\" entry"))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };
    let sigma_v = want(v, "sigma")?
        .as_array()
        .ok_or_else(|| Error::InvalidInput("\"sigma\" must be an array of matrices".into()))?;
    let mut sigma = Vec::with_capacity(sigma_v.len());
    for m in sigma_v {
        let rows = m
            .as_array()
            .filter(|r| r.len() == d)
            .ok_or_else(|| Error::InvalidInput(format!("sigma matrix must be {d}x{d}")))?;
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            let row = row
                .as_array()
                .filter(|r| r.len() == d)
                .ok_or_else(|| Error::InvalidInput(format!("sigma matrix must be {d}x{d}")))?;
            for x in row {
                entries.push(rational_value(x, "sigma entry")?);
            }
        }
        sigma.push(QMat::from_fn(d, d, |r, c| entries[r * d + c].clone()));
    }
    let abelian = match v.get("abelian") {
        Some(Value::Null) | None => None,
        Some(ab) => {
            let dims = want(ab, "dims")?
                .as_array()
                .ok_or_else(|| Error::InvalidInput("\"dims\" must be an array".into()))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .ok_or_else(|| Error::InvalidInput("bad invariant factor".into()))
                })
                .collect::<Result<Vec<u64>>>()?;
            let generators = want(ab, "generators")?
                .as_array()
                .ok_or_else(|| Error::InvalidInput("\"generators\" must be an array".into()))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| Error::InvalidInput("bad generator index".into()))
                })
                .collect::<Result<Vec<usize>>>()?;
            Some(AbelianStructure { dims, generators })
        }
    };
    let data = GaloisData::new(field, k_poly, k_gen_in_l, sigma, abelian)?;
    let root_index = v.get("root_index").and_then(Value::as_u64).unwrap_or(0) as usize;
    Ok(GaloisConfig { data, root_index })
}

impl JobConfig {
    pub fn from_json(v: &Value, base_dir: &Path) -> Result<Self> {
        if v.get("schema").and_then(Value::as_str) != Some(SCHEMA) {
            return Err(Error::InvalidInput(format!(
                "config must declare \"schema\": \"{SCHEMA}\""
            )));
        }
        let level = as_u64(v, "level")?;
        if num::integer::gcd(level, 6) != 1 {
            return Err(Error::InvalidInput(format!(
                "level {level} is not coprime to 6"
            )));
        }
        let h = match want(v, "h")? {
            Value::String(s) => match s.as_str() {
                "borel" => SubgroupH::borel(level)?,
                "full" => SubgroupH::full(level)?,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown subgroup name {other:?} (use \"borel\", \"full\", or generators)"
                    )))
                }
            },
            hv => {
                let gens_v = want(hv, "generators")?
                    .as_array()
                    .ok_or_else(|| Error::InvalidInput("\"generators\" must be an array".into()))?;
                let gens = gens_v
                    .iter()
                    .map(|m| mod_matrix(m, level, "H generator"))
                    .collect::<Result<Vec<_>>>()?;
                SubgroupH::new(level, gens)?
            }
        };
        let h = Arc::new(h);
        let g = match v.get("g") {
            Some(gv) => mod_matrix(gv, level, "\"g\"")?,
            None => ModMatrix::identity(level),
        };
        if !g.is_invertible() {
            return Err(Error::InvalidInput("\"g\" is not invertible mod N".into()));
        }
        let tau = want(v, "tau")?;
        let tau_r = as_i64(tau, "r")?;
        let tau_s = as_i64(tau, "s")?;
        if tau_r * tau_r - 4 * tau_s >= 0 {
            return Err(Error::InvalidInput(
                "tau is not imaginary quadratic".into(),
            ));
        }
        let je_v = want(v, "j_e")?;
        let j_poly = int_array(want(je_v, "poly")?, "\"j_e.poly\"")?;
        let j_e = if j_poly.len() == 2 && j_poly[1].is_one() {
            let f = NumberField::rationals();
            NfElt::from_rational(f, BigRational::from(-j_poly[0].clone()))
        } else {
            NfElt::generator(NumberField::new(j_poly)?)
        };
        let form = match want(v, "cusp_form")? {
            Value::String(path) => {
                let p = base_dir.join(path);
                let text = std::fs::read_to_string(&p)?;
                CuspForm::from_json(&serde_json::from_str(&text)?)?
            }
            inline => CuspForm::from_json(inline)?,
        };
        let conjugates = match v.get("conjugates") {
            Some(cv) => {
                let arr = cv
                    .as_array()
                    .ok_or_else(|| Error::InvalidInput("\"conjugates\" must be an array".into()))?;
                if arr.is_empty() {
                    return Err(Error::InvalidInput("empty conjugate list".into()));
                }
                arr.iter()
                    .map(|c| {
                        Ok(ConjugatePoint {
                            a: as_i64(c, "a")?,
                            b: as_i64(c, "b")?,
                            j_root: c.get("j_root").and_then(Value::as_u64).unwrap_or(0) as usize,
                            form_root: c.get("form_root").and_then(Value::as_u64).unwrap_or(0)
                                as usize,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            None => vec![ConjugatePoint {
                a: 1,
                b: tau_r,
                j_root: 0,
                form_root: 0,
            }],
        };
        let galois = match v.get("galois") {
            Some(Value::Null) | None => None,
            Some(gv) => Some(parse_galois(gv)?),
        };
        let precision = as_u64(v, "precision")? as usize;
        if precision < 32 {
            return Err(Error::InvalidInput("precision below 32 bits".into()));
        }
        let n = as_u64(v, "n")? as usize;
        let q_terms = v.get("q_terms").and_then(Value::as_u64).unwrap_or(128) as usize;
        let small_primes = match v.get("small_primes").and_then(Value::as_str) {
            None | Some("reject") => SmallPrimePolicy::Reject,
            Some("bound-by-va") => SmallPrimePolicy::BoundByVa,
            Some(other) => {
                return Err(Error::InvalidInput(format!(
                    "unknown small-prime policy {other:?}"
                )))
            }
        };
        let coset_budget = v
            .get("coset_budget")
            .and_then(Value::as_u64)
            .unwrap_or(cm_expand::cosets::DEFAULT_COSET_BUDGET);
        let cfg = JobConfig {
            level,
            h,
            g,
            tau_r,
            tau_s,
            j_e,
            form,
            conjugates,
            galois,
            precision,
            n,
            q_terms,
            small_primes,
            coset_budget,
        };
        cfg.basepoint_ctx().validate()?;
        if let Some(gc) = &cfg.galois {
            if gc.data.d != cfg.conjugates.len() {
                return Err(Error::InvalidInput(format!(
                    "galois degree {} does not match {} conjugate basepoints",
                    gc.data.d,
                    cfg.conjugates.len()
                )));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json(&v, base)
    }

    pub fn basepoint_ctx(&self) -> BasepointCtx {
        BasepointCtx {
            level: self.level,
            h: self.h.clone(),
            g: self.g,
            tau_r: self.tau_r,
            tau_s: self.tau_s,
            j_e: self.j_e.clone(),
            small_primes: self.small_primes,
            coset_budget: self.coset_budget,
        }
    }

    pub fn disc(&self) -> i64 {
        self.tau_r * self.tau_r - 4 * self.tau_s
    }
}
