//! Pipeline stages behind the subcommands: certify denominators, expand at
//! every conjugate basepoint, recover exact coefficients.

use num::rational::BigRational;
use num::{BigInt, One, Signed};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use cm_expand::cosets::{enumerate_cosets, e_den, DoubleCoset, ReductionCase};
use cm_expand::denominators::{certify, vertical_values, DenominatorCertificate};
use cm_expand::error::{Error, Result};
use cm_expand::exact::ball::ComplexBall;
use cm_expand::exact::cpx::{bigfloat_to_rational, pow2, rational_to_bigfloat};
use cm_expand::exact::modmatrix::ModMatrix;
use cm_expand::exact::nf::NfElt;
use cm_expand::exact::padic::PadicElement;
use cm_expand::expansion::{cert_multiplier, rescale, solve_coeffs, CertPrimes, CoeffSystem};
use cm_expand::formal_group::{
    formal_group, formal_height, good_reduction_model, series_polygon, v_vert_bound,
    WeierstrassModel,
};
use cm_expand::qseries::{form_to_tau, j_series, nf_to_ball_series, q_from_tau, taylor_at, to_ball_series};
use cm_expand::recover::{build_normal_basis, recover_abelian, recover_integer, NormalBasis};
use cm_expand::series::{BallCtx, PadicCtx};

use crate::config::{parse_rational, JobConfig, SCHEMA};

fn rat_str(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn ball_to_json(b: &ComplexBall) -> Value {
    json!({
        "re": rat_str(&bigfloat_to_rational(&b.mid.re)),
        "im": rat_str(&bigfloat_to_rational(&b.mid.im)),
        "rad": rat_str(&bigfloat_to_rational(&b.rad)),
    })
}

fn ball_from_json(v: &Value, prec: usize) -> Result<ComplexBall> {
    let get = |key: &str| -> Result<BigRational> {
        parse_rational(
            v.get(key)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::InvalidInput(format!("ball lacks \"{key}\"")))?,
        )
    };
    let re = get("re")?;
    let im = get("im")?;
    let rad = get("rad")?;
    if rad.is_negative() {
        return Err(Error::InvalidInput("negative ball radius".into()));
    }
    let rad_f = rational_to_bigfloat(&rad, 64, astro_float::RoundingMode::Up);
    Ok(ComplexBall::from_rationals(&re, &im, prec).inflate(&rad_f))
}

pub fn cmd_denominator(cfg: &JobConfig) -> Result<Value> {
    let cert = certify(&cfg.basepoint_ctx())?;
    Ok(cert.to_json())
}

/// Taylor data and solved, rescaled coefficients at one conjugate basepoint.
fn expand_at(
    cfg: &JobConfig,
    idx: usize,
    primes: &CertPrimes,
) -> Result<Vec<ComplexBall>> {
    let prec = cfg.precision;
    let n = cfg.n;
    let c = cfg.conjugates[idx];
    let tau = form_to_tau(c.a, c.b, cfg.disc(), prec);
    let q_b = q_from_tau(&tau, prec)?;
    let jser = to_ball_series(&j_series(cfg.q_terms), prec);
    let jt = taylor_at(&jser, &q_b, n + 1)?;
    // t = j - j_E vanishes at the basepoint: check the CM data is consistent
    let je = cfg.j_e.embed(c.j_root, prec)?;
    let a0 = jt[0].sub(&je);
    let tol = pow2(-(prec as i64) / 4);
    let slack = a0
        .abs_ub()
        .sub(&tol, 64, astro_float::RoundingMode::Down);
    if slack.is_positive() {
        return Err(Error::Inconsistent(format!(
            "j(q_b) does not meet j_E at conjugate {idx}: tau and j_E mismatch"
        )));
    }
    let a: Vec<ComplexBall> = jt[1..].to_vec();
    let fser = nf_to_ball_series(&cfg.form.series, c.form_root, prec)?;
    let b = taylor_at(&fser, &q_b, n)?;
    let sys = CoeffSystem::new(BallCtx { prec }, a, b, n)?;
    let coeffs = solve_coeffs(&sys)?;
    Ok(rescale(&coeffs, primes))
}

fn primes_from_cert(cert: &DenominatorCertificate) -> Value {
    let mut m = Map::new();
    for (p, r) in cert.cert_primes() {
        m.insert(p.to_string(), json!(rat_str(&r)));
    }
    Value::Object(m)
}

fn primes_from_json(v: &Value) -> Result<CertPrimes> {
    let obj = v
        .get("primes")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::InvalidInput("coefficients file lacks \"primes\"".into()))?;
    let mut out: CertPrimes = Vec::new();
    for (p, r) in obj {
        let p: BigInt = p
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad prime {p:?}")))?;
        let r = parse_rational(
            r.as_str()
                .ok_or_else(|| Error::InvalidInput("prime rate must be a string".into()))?,
        )?;
        out.push((p, r));
    }
    out.sort();
    Ok(out)
}

pub fn cmd_expand(cfg: &JobConfig, cert: &DenominatorCertificate) -> Result<Value> {
    let primes = cert.cert_primes();
    let per: Vec<Result<Vec<ComplexBall>>> = (0..cfg.conjugates.len())
        .into_par_iter()
        .map(|i| expand_at(cfg, i, &primes))
        .collect();
    let mut conj_out = Vec::new();
    for (c, res) in cfg.conjugates.iter().zip(per) {
        let coeffs = res?;
        conj_out.push(json!({
            "a": c.a,
            "b": c.b,
            "coeffs": coeffs.iter().map(ball_to_json).collect::<Vec<_>>(),
        }));
    }
    Ok(json!({
        "schema": SCHEMA,
        "n": cfg.n,
        "precision": cfg.precision,
        "primes": primes_from_cert(cert),
        "conjugates": conj_out,
    }))
}

fn recover_one(nb: &NormalBasis, w: &[ComplexBall]) -> Result<NfElt> {
    if nb.gal.abelian.is_some() {
        recover_abelian(nb, w)
    } else {
        recover_integer(nb, w)
    }
}

pub fn cmd_recover(cfg: &JobConfig, coeffs: &Value) -> Result<Value> {
    let gc = cfg
        .galois
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("config has no \"galois\" section".into()))?;
    let conj_v = coeffs
        .get("conjugates")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidInput("coefficients file lacks \"conjugates\"".into()))?;
    if conj_v.len() != gc.data.d {
        return Err(Error::InvalidInput(format!(
            "{} conjugate coefficient lists for Galois degree {}",
            conj_v.len(),
            gc.data.d
        )));
    }
    let prec = cfg.precision;
    let n = coeffs
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::InvalidInput("coefficients file lacks \"n\"".into()))?
        as usize;
    let primes = primes_from_json(coeffs)?;
    let mut per_conj: Vec<Vec<ComplexBall>> = Vec::with_capacity(conj_v.len());
    for cv in conj_v {
        let arr = cv
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("conjugate entry lacks \"coeffs\"".into()))?;
        if arr.len() != n + 1 {
            return Err(Error::InvalidInput("coefficient count mismatch".into()));
        }
        per_conj.push(
            arr.iter()
                .map(|b| ball_from_json(b, prec))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let nb = build_normal_basis(&gc.data, gc.root_index, prec)?;
    let mut out_coeffs = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let w: Vec<ComplexBall> = per_conj.iter().map(|c| c[l].clone()).collect();
        let gamma = recover_one(&nb, &w)?;
        let divisor = cert_multiplier(&primes, (l + 1) as u64);
        out_coeffs.push(json!({
            "l": l,
            "divisor": divisor.to_string(),
            "value": gamma.coords.iter().map(rat_str).collect::<Vec<_>>(),
        }));
    }
    Ok(json!({
        "schema": SCHEMA,
        "l_poly": gc.data.field.poly.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "coeffs": out_coeffs,
    }))
}

/// Newton-polygon diagnostics of [p](T) for the curve with a given rational
/// j-invariant.
pub fn cmd_newton(p: u64, j: &BigRational) -> Result<Value> {
    let pp = (p * p) as usize;
    let ctx = PadicCtx {
        p,
        e: 1,
        prec: BigRational::from(BigInt::from((pp + 12) as i64)),
    };
    let je = PadicElement::from_rational(p, 1, j, ctx.prec.clone());
    let model = WeierstrassModel::from_j(ctx, &je)?;
    let (good, ep) = good_reduction_model(&model, p)?;
    let f = formal_group(&good, pp + 8)?;
    let h = formal_height(&f)?;
    let mp = f.mult_by(p as i64)?;
    let poly = series_polygon(&mp, (p * p) as i64)?;
    let v = v_vert_bound(&f, p, 1)?;
    Ok(json!({
        "schema": SCHEMA,
        "p": p,
        "e_p": ep,
        "formal_height": h,
        "vertices": poly
            .vertices
            .iter()
            .map(|(x, y)| json!([x.to_string(), rat_str(y)]))
            .collect::<Vec<_>>(),
        "slopes": poly.slopes().iter().map(rat_str).collect::<Vec<_>>(),
        "v_vert": rat_str(&v),
    }))
}

/// Coset diagnostics: coset count, double-coset size, and e_den per prime
/// dividing the level.
pub fn cmd_cosets(cfg: &JobConfig) -> Result<Value> {
    let reps = enumerate_cosets(&cfg.h, cfg.coset_budget)?;
    let a = vec![
        ModMatrix::identity(cfg.level),
        ModMatrix::neg_identity(cfg.level),
    ];
    let dc = DoubleCoset::new(cfg.h.clone(), cfg.g, a.clone())?;
    let mut per_prime = Vec::new();
    let mut rest = cfg.level;
    let mut p = 2u64;
    while rest > 1 {
        if rest % p == 0 {
            let mut m = 0u32;
            while rest % p == 0 {
                rest /= p;
                m += 1;
            }
            let (ordinary, v_vert) = vertical_values(p, &cfg.j_e)?;
            let case = ReductionCase::new(cfg.level, p, m, ordinary, a.clone())?;
            let ed = e_den(&dc, &case, cfg.coset_budget)?;
            per_prime.push(json!({
                "p": p,
                "m": m,
                "ordinary": ordinary,
                "v_vert": rat_str(&v_vert),
                "e_den": ed,
            }));
        }
        p += 1;
    }
    Ok(json!({
        "schema": SCHEMA,
        "level": cfg.level,
        "h_order": cfg.h.order(),
        "coset_count": reps.len(),
        "double_coset_size": dc.elements.len(),
        "primes": per_prime,
    }))
}
