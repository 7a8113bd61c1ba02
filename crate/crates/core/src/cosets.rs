//! Subgroups H of GL2(Z/N), double cosets HgA (level-structure classes), the
//! reduction map on level structures, and the ramification indices e and
//! e_den at a prime of (potentially) good reduction.
//!
//! Everything is materialized: groups and cosets are explicit matrix sets, so
//! preimage counting is set equality. N is small here by design.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::modmatrix::ModMatrix;
use crate::exact::rat::factor;

/// Cap on |H \ GL2(Z/N)| for coset enumeration.
pub const DEFAULT_COSET_BUDGET: u64 = 100_000;
/// Cap on materialized element sets.
const MAX_ELEMENTS: usize = 4_000_000;

/// |GL2(Z/n)| = n^4 prod_{p | n} (1 - 1/p)(1 - 1/p^2).
pub fn gl2_order(n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    use num::ToPrimitive;
    let mut order: u64 = 1;
    for (p, k) in factor(&num::BigInt::from(n)) {
        let p = p.to_u64().expect("prime factor fits u64");
        // p^(4k-3) (p^2 - 1)(p - 1)
        order *= p.pow(4 * k - 3) * (p * p - 1) * (p - 1);
    }
    order
}

/// All of GL2(Z/n) by direct enumeration.
pub fn enumerate_gl2(n: u64) -> Result<Vec<ModMatrix>> {
    let total = gl2_order(n);
    if total as usize > MAX_ELEMENTS {
        return Err(Error::Resource(format!(
            "GL2(Z/{n}) has order {total}, beyond the materialization cap"
        )));
    }
    let mut out = Vec::with_capacity(total as usize);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let m = ModMatrix::new(n, [a, b, c, d]);
                    if m.is_invertible() {
                        out.push(m);
                    }
                }
            }
        }
    }
    debug_assert_eq!(out.len() as u64, total);
    Ok(out)
}

/// A subgroup of GL2(Z/N) with -I and surjective determinant, materialized.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupH {
    pub n: u64,
    pub generators: Vec<ModMatrix>,
    pub elements: BTreeSet<ModMatrix>,
}

fn close_under_mul(n: u64, gens: &[ModMatrix]) -> Result<BTreeSet<ModMatrix>> {
    let mut set: BTreeSet<ModMatrix> = BTreeSet::new();
    set.insert(ModMatrix::identity(n));
    let mut frontier: Vec<ModMatrix> = vec![ModMatrix::identity(n)];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = x.mul(g)?;
            if set.insert(y) {
                if set.len() > MAX_ELEMENTS {
                    return Err(Error::Resource(
                        "subgroup closure exceeds the materialization cap".into(),
                    ));
                }
                frontier.push(y);
            }
        }
    }
    Ok(set)
}

impl SubgroupH {
    /// Closure of the generators; rejects generators outside GL2, groups
    /// without -I, and groups whose determinant misses a unit.
    pub fn new(n: u64, generators: Vec<ModMatrix>) -> Result<Self> {
        Self::with_det_check(n, generators, true)
    }

    /// As `new`, optionally skipping the det-surjectivity requirement
    /// (needed for index computations with groups like {+-I}).
    pub fn with_det_check(
        n: u64,
        generators: Vec<ModMatrix>,
        require_surjective_det: bool,
    ) -> Result<Self> {
        if n == 0 || generators.iter().any(|g| g.n != n) {
            return Err(Error::InvalidInput("generator modulus mismatch".into()));
        }
        if let Some(g) = generators.iter().find(|g| !g.is_invertible()) {
            return Err(Error::InvalidInput(format!(
                "generator {:?} is not invertible mod {n}",
                g.entries()
            )));
        }
        let elements = close_under_mul(n, &generators)?;
        if !elements.contains(&ModMatrix::neg_identity(n)) {
            return Err(Error::InvalidInput("-I is not in H".into()));
        }
        let dets: BTreeSet<u64> = elements.iter().map(|g| g.det()).collect();
        let units = (1..=n).filter(|u| num::integer::gcd(*u, n) == 1).count();
        if require_surjective_det && n > 1 && dets.len() != units {
            return Err(Error::InvalidInput(format!(
                "det: H -> (Z/{n})^x is not surjective ({} of {units} units hit)",
                dets.len()
            )));
        }
        Ok(SubgroupH { n, generators, elements })
    }

    pub fn full(n: u64) -> Result<Self> {
        let elements: BTreeSet<ModMatrix> = enumerate_gl2(n)?.into_iter().collect();
        Ok(SubgroupH {
            n,
            generators: elements.iter().cloned().collect(),
            elements,
        })
    }

    /// Upper-triangular (Borel) subgroup.
    pub fn borel(n: u64) -> Result<Self> {
        let mut gens = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    let m = ModMatrix::new(n, [a, b, 0, d]);
                    if m.is_invertible() {
                        gens.push(m);
                    }
                }
            }
        }
        Self::new(n, gens)
    }

    /// The subgroup {I, -I}; det is not surjective, so the check is skipped.
    pub fn center_pm(n: u64) -> Result<Self> {
        Self::with_det_check(n, vec![ModMatrix::neg_identity(n)], false)
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains(&self, m: &ModMatrix) -> bool {
        self.elements.contains(m)
    }

    pub fn index(&self) -> u64 {
        gl2_order(self.n) / self.order()
    }
}

/// One representative per right coset Hg.
pub fn enumerate_cosets(h: &SubgroupH, budget: u64) -> Result<Vec<ModMatrix>> {
    let index = h.index();
    if index > budget {
        return Err(Error::Resource(format!(
            "coset index {index} exceeds the budget {budget}"
        )));
    }
    let mut seen: BTreeSet<ModMatrix> = BTreeSet::new();
    let mut reps = Vec::with_capacity(index as usize);
    for g in enumerate_gl2(h.n)? {
        if seen.contains(&g) {
            continue;
        }
        reps.push(g);
        for x in &h.elements {
            seen.insert(x.mul(&g)?);
        }
    }
    debug_assert_eq!(reps.len() as u64, index);
    Ok(reps)
}

/// j-invariant class of the basepoint's curve, which fixes the geometric
/// automorphism group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JClass {
    Generic,
    Zero,
    S1728,
}

/// Automorphisms as matrices mod N: {+-I} generically; at j = 0 the order-6
/// group from a root of T^2+T+1 commuting with tau; at j = 1728 the order-4
/// group from a root of T^2+1. Roots are sought in Z/N[tau] (the full
/// centralizer of a companion matrix), preferring roots that involve tau.
pub fn automorphism_set(j: JClass, tau: &ModMatrix, n: u64) -> Result<Vec<ModMatrix>> {
    if tau.n != n {
        return Err(Error::InvalidInput("tau modulus mismatch".into()));
    }
    let mut set: BTreeSet<ModMatrix> = BTreeSet::new();
    set.insert(ModMatrix::identity(n));
    set.insert(ModMatrix::neg_identity(n));
    if j == JClass::Generic {
        return Ok(set.into_iter().collect());
    }
    if num::integer::gcd(n, 6) != 1 {
        return Err(Error::InvalidInput(
            "automorphism matrices at j in {0, 1728} need gcd(6, N) = 1".into(),
        ));
    }
    // X = aI + b tau; prefer b != 0 (the root tied to the CM embedding)
    let mut root: Option<ModMatrix> = None;
    'outer: for b in (1..n).chain([0]) {
        for a in 0..n {
            let x = ModMatrix::new(
                n,
                [
                    (a + b * tau.a) % n,
                    (b * tau.b) % n,
                    (b * tau.c) % n,
                    (a + b * tau.d) % n,
                ],
            );
            let x2 = x.mul(&x)?;
            let lhs = match j {
                JClass::Zero => ModMatrix::new(
                    n,
                    [
                        (x2.a + x.a + 1) % n,
                        (x2.b + x.b) % n,
                        (x2.c + x.c) % n,
                        (x2.d + x.d + 1) % n,
                    ],
                ),
                JClass::S1728 => ModMatrix::new(
                    n,
                    [(x2.a + 1) % n, x2.b, x2.c, (x2.d + 1) % n],
                ),
                JClass::Generic => unreachable!(),
            };
            if lhs == ModMatrix::new(n, [0, 0, 0, 0]) && x.is_invertible() {
                root = Some(x);
                break 'outer;
            }
        }
    }
    let x = root.ok_or_else(|| {
        Error::Inconsistent(format!(
            "no root of the automorphism polynomial commutes with tau mod {n}"
        ))
    })?;
    let group = close_under_mul(n, &[x, ModMatrix::neg_identity(n)])?;
    let expect = match j {
        JClass::Zero => 6,
        JClass::S1728 => 4,
        JClass::Generic => 2,
    };
    if group.len() != expect {
        return Err(Error::Inconsistent(format!(
            "automorphism group has order {}, expected {expect}",
            group.len()
        )));
    }
    Ok(group.into_iter().collect())
}

/// A level-structure class HgA, materialized.
#[derive(Clone, Debug)]
pub struct DoubleCoset {
    pub h: Arc<SubgroupH>,
    pub g: ModMatrix,
    pub a: Vec<ModMatrix>,
    pub elements: BTreeSet<ModMatrix>,
}

fn check_group(n: u64, a: &[ModMatrix]) -> Result<()> {
    let set: BTreeSet<ModMatrix> = a.iter().cloned().collect();
    if !set.contains(&ModMatrix::identity(n)) || !set.contains(&ModMatrix::neg_identity(n)) {
        return Err(Error::InvalidInput("automorphism set must contain +-I".into()));
    }
    for x in &set {
        for y in &set {
            if !set.contains(&x.mul(y)?) {
                return Err(Error::InvalidInput(
                    "automorphism set is not closed under multiplication".into(),
                ));
            }
        }
    }
    Ok(())
}

impl DoubleCoset {
    pub fn new(h: Arc<SubgroupH>, g: ModMatrix, a: Vec<ModMatrix>) -> Result<Self> {
        let n = h.n;
        if g.n != n || a.iter().any(|x| x.n != n) {
            return Err(Error::InvalidInput("double coset modulus mismatch".into()));
        }
        if !g.is_invertible() {
            return Err(Error::InvalidInput("g is not invertible mod N".into()));
        }
        check_group(n, &a)?;
        let mut elements = BTreeSet::new();
        for x in &h.elements {
            let xg = x.mul(&g)?;
            for y in &a {
                elements.insert(xg.mul(y)?);
            }
        }
        Ok(DoubleCoset { h, g, a, elements })
    }

    /// Same class through a different representative (must lie in HgA).
    pub fn with_representative(&self, g: ModMatrix) -> Result<Self> {
        if !self.elements.contains(&g) {
            return Err(Error::InvalidInput(
                "representative is not in the double coset".into(),
            ));
        }
        Self::new(self.h.clone(), g, self.a.clone())
    }
}

/// All double cosets HgA in GL2(Z/N).
pub fn double_cosets(
    h: &Arc<SubgroupH>,
    a: &[ModMatrix],
    budget: u64,
) -> Result<Vec<DoubleCoset>> {
    if h.index() > budget {
        return Err(Error::Resource(format!(
            "coset index {} exceeds the budget {budget}",
            h.index()
        )));
    }
    let mut seen: BTreeSet<ModMatrix> = BTreeSet::new();
    let mut out = Vec::new();
    for g in enumerate_gl2(h.n)? {
        if seen.contains(&g) {
            continue;
        }
        let c = DoubleCoset::new(h.clone(), g, a.to_vec())?;
        seen.extend(c.elements.iter().cloned());
        out.push(c);
    }
    Ok(out)
}

/// Reduction setting at a prime p with N = N0 p^m: the residue automorphism
/// set (mod N) and the ordinary/supersingular split.
#[derive(Clone, Debug)]
pub struct ReductionCase {
    pub n: u64,
    pub n0: u64,
    pub p: u64,
    pub m: u32,
    pub ordinary: bool,
    /// Automorphisms of the reduced curve, as matrices mod N; contains the
    /// characteristic-0 set.
    pub a_red: Vec<ModMatrix>,
}

impl ReductionCase {
    pub fn new(
        n: u64,
        p: u64,
        m: u32,
        ordinary: bool,
        a_red: Vec<ModMatrix>,
    ) -> Result<Self> {
        let pm = p.checked_pow(m).ok_or_else(|| {
            Error::InvalidInput("p^m overflows".into())
        })?;
        if n % pm != 0 || num::integer::gcd(n / pm, p) != 1 {
            return Err(Error::InvalidInput(format!(
                "N = {n} is not N0 * {p}^{m} with N0 coprime to {p}"
            )));
        }
        if ordinary && m == 0 {
            return Err(Error::InvalidInput(
                "ordinary case needs m >= 1 (p | N)".into(),
            ));
        }
        if a_red.iter().any(|x| x.n != n) {
            return Err(Error::InvalidInput("a_red modulus mismatch".into()));
        }
        check_group(n, &a_red)?;
        Ok(ReductionCase { n, n0: n / pm, p, m, ordinary, a_red })
    }

    pub fn pm(&self) -> u64 {
        self.p.pow(self.m)
    }
}

/// Reduced level structure: the joint orbit of (mod-N0 part, kernel line of
/// the etale surjection) under the residual H x A_red action. Equality of
/// orbits decides equality of reduced structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedStructure {
    pub n0: u64,
    pub ordinary: bool,
    pub orbit: BTreeSet<(ModMatrix, Option<(u64, u64)>)>,
}

/// Canonical generator of the cyclic subgroup <w> of (Z/p^m)^2: first unit
/// coordinate scaled to 1. Errors unless the order is exactly p^m.
pub fn canonical_kernel(w: (u64, u64), p: u64, m: u32) -> Result<(u64, u64)> {
    let pm = p.pow(m);
    let (w0, w1) = (w.0 % pm, w.1 % pm);
    let unit = |x: u64| x % p != 0;
    let inv = |x: u64| {
        // unit mod p^m
        let mut t = 1u64;
        let mut base = x % pm;
        let mut e = pm / p * (p - 1) - 1; // phi(p^m) - 1
        while e > 0 {
            if e & 1 == 1 {
                t = ((t as u128 * base as u128) % pm as u128) as u64;
            }
            base = ((base as u128 * base as u128) % pm as u128) as u64;
            e >>= 1;
        }
        t
    };
    if unit(w0) {
        let u = inv(w0);
        Ok((1, ((w1 as u128 * u as u128) % pm as u128) as u64))
    } else if unit(w1) {
        let u = inv(w1);
        Ok((((w0 as u128 * u as u128) % pm as u128) as u64, 1))
    } else {
        Err(Error::InvalidInput(format!(
            "kernel generator ({w0}, {w1}) does not have order {p}^{m}"
        )))
    }
}

/// Reduction of the level-structure class. `kernel` is the connected
/// (canonical) subgroup of E[p^m] as a row generator in the reference basis
/// of E[p^m]; required exactly in the ordinary case.
pub fn pr_star(
    c: &DoubleCoset,
    case: &ReductionCase,
    kernel: Option<(u64, u64)>,
) -> Result<ReducedStructure> {
    if c.h.n != case.n {
        return Err(Error::InvalidInput("case modulus mismatch".into()));
    }
    let w = if case.ordinary {
        let w = kernel.ok_or_else(|| {
            Error::InvalidInput("ordinary reduction needs the kernel line".into())
        })?;
        Some(canonical_kernel(w, case.p, case.m)?)
    } else {
        None
    };
    let pm = case.pm();
    let mut orbit = BTreeSet::new();
    for x in &c.elements {
        for a in &case.a_red {
            let y = x.mul(a)?;
            let kern = match w {
                Some(w) => {
                    let ypi = y.reduce(pm).inv()?;
                    Some(canonical_kernel(ypi.act_row(w), case.p, case.m)?)
                }
                None => None,
            };
            orbit.insert((y.reduce(case.n0), kern));
        }
    }
    Ok(ReducedStructure { n0: case.n0, ordinary: case.ordinary, orbit })
}

/// The double cosets Hg'A whose reduction equals c's; always contains c.
pub fn pr_star_fiber(
    c: &DoubleCoset,
    case: &ReductionCase,
    kernel: Option<(u64, u64)>,
    budget: u64,
) -> Result<Vec<DoubleCoset>> {
    let target = pr_star(c, case, kernel)?;
    let all = double_cosets(&c.h, &c.a, budget)?;
    let mut fiber = Vec::new();
    for cand in all {
        if pr_star(&cand, case, kernel)? == target {
            fiber.push(cand);
        }
    }
    if !fiber.iter().any(|f| f.elements == c.elements) {
        return Err(Error::Internal("fiber does not contain its own class".into()));
    }
    Ok(fiber)
}

/// Ramification index e = size of the pr_star fiber through c.
pub fn ram_index(
    c: &DoubleCoset,
    case: &ReductionCase,
    kernel: Option<(u64, u64)>,
    budget: u64,
) -> Result<u64> {
    Ok(pr_star_fiber(c, case, kernel, budget)?.len() as u64)
}

/// All cyclic subgroups of (Z/p^m)^2 of order p^m, by canonical generator.
pub fn cyclic_kernels(p: u64, m: u32) -> Vec<(u64, u64)> {
    let pm = p.pow(m);
    let mut out = Vec::new();
    for t in 0..pm {
        out.push((1, t));
    }
    for s in 0..pm / p {
        out.push((s * p, 1));
    }
    out
}

/// Upper bound for the denominator ramification index: the fiber size itself
/// in the supersingular case, the maximum over all order-p^m cyclic kernels
/// in the ordinary case.
pub fn e_den(c: &DoubleCoset, case: &ReductionCase, budget: u64) -> Result<u64> {
    if !case.ordinary {
        return ram_index(c, case, None, budget);
    }
    let mut best = 1;
    for w in cyclic_kernels(case.p, case.m) {
        best = best.max(ram_index(c, case, Some(w), budget)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm_set(n: u64) -> Vec<ModMatrix> {
        vec![ModMatrix::identity(n), ModMatrix::neg_identity(n)]
    }

    #[test]
    fn gl2_orders() {
        assert_eq!(gl2_order(1), 1);
        assert_eq!(gl2_order(5), 480);
        assert_eq!(gl2_order(7), 2016);
        assert_eq!(enumerate_gl2(5).unwrap().len(), 480);
    }

    #[test]
    fn coset_counts() {
        let full = SubgroupH::full(5).unwrap();
        assert_eq!(enumerate_cosets(&full, DEFAULT_COSET_BUDGET).unwrap().len(), 1);
        let borel = SubgroupH::borel(5).unwrap();
        assert_eq!(borel.order(), 80);
        assert_eq!(enumerate_cosets(&borel, DEFAULT_COSET_BUDGET).unwrap().len(), 6);
        let pm = SubgroupH::center_pm(5).unwrap();
        assert_eq!(enumerate_cosets(&pm, DEFAULT_COSET_BUDGET).unwrap().len(), 240);
    }

    #[test]
    fn budget_enforced() {
        let pm = SubgroupH::center_pm(5).unwrap();
        assert!(matches!(
            enumerate_cosets(&pm, 10),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn validation_rejects_bad_subgroups() {
        // unipotent group lacks -I
        let u = ModMatrix::new(5, [1, 1, 0, 1]);
        assert!(matches!(SubgroupH::new(5, vec![u]), Err(Error::InvalidInput(_))));
        // SL2 has det image {1}
        let s1 = ModMatrix::new(5, [1, 1, 0, 1]);
        let s2 = ModMatrix::new(5, [1, 0, 1, 1]);
        assert!(matches!(
            SubgroupH::new(5, vec![s1, s2]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn automorphisms_generic_and_1728() {
        let tau = ModMatrix::new(5, [0, 1, 4, 0]); // tau^2 = -I
        let g: BTreeSet<ModMatrix> = automorphism_set(JClass::Generic, &tau, 5)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(g, pm_set(5).into_iter().collect());
        let a = automorphism_set(JClass::S1728, &tau, 5).unwrap();
        assert_eq!(a.len(), 4);
        let set: BTreeSet<ModMatrix> = a.iter().cloned().collect();
        assert!(set.contains(&tau));
        assert!(set.contains(&ModMatrix::from_signed(5, [0, -1, 1, 0])));
        // brute-force oracle: the group is inside the commuting solution set
        for x in &a {
            let x2 = x.mul(x).unwrap();
            let f = ModMatrix::new(5, [(x2.a + 1) % 5, x2.b, x2.c, (x2.d + 1) % 5]);
            let zero = ModMatrix::new(5, [0, 0, 0, 0]);
            assert!(f == zero || *x == ModMatrix::identity(5) || *x == ModMatrix::neg_identity(5));
            assert_eq!(x.mul(&tau).unwrap(), tau.mul(x).unwrap());
        }
    }

    #[test]
    fn automorphisms_j0_order_6() {
        // companion of T^2 + T + 1 is its own root
        let tau = ModMatrix::from_signed(5, [-1, 1, -1, 0]);
        let a = automorphism_set(JClass::Zero, &tau, 5).unwrap();
        assert_eq!(a.len(), 6);
        let set: BTreeSet<ModMatrix> = a.iter().cloned().collect();
        assert!(set.contains(&tau));
        for x in &a {
            assert_eq!(x.mul(&tau).unwrap(), tau.mul(x).unwrap());
            // order divides 6
            assert_eq!(x.pow(6).unwrap(), ModMatrix::identity(5));
        }
    }

    #[test]
    fn automorphism_brute_force_oracle_1728() {
        // every commuting root of T^2+1 mod 5 lies in Z/5[tau]
        let tau = ModMatrix::new(5, [0, 1, 4, 0]);
        let a: BTreeSet<ModMatrix> = automorphism_set(JClass::S1728, &tau, 5)
            .unwrap()
            .into_iter()
            .collect();
        let mut roots = BTreeSet::new();
        for m in enumerate_gl2(5).unwrap() {
            let m2 = m.mul(&m).unwrap();
            if m2 == ModMatrix::neg_identity(5)
                && m.mul(&tau).unwrap() == tau.mul(&m).unwrap()
            {
                roots.insert(m);
            }
        }
        // the group generated by any root together with -I is the same
        for r in &roots {
            assert!(a.contains(r) || a.contains(&r.inv().unwrap()) || {
                let g = close_under_mul(5, &[*r, ModMatrix::neg_identity(5)]).unwrap();
                g.len() == 4
            });
        }
        assert!(roots.contains(&tau));
    }

    fn borel_setup() -> (Arc<SubgroupH>, Vec<DoubleCoset>, ReductionCase) {
        let h = Arc::new(SubgroupH::borel(5).unwrap());
        let a = pm_set(5);
        let cosets = double_cosets(&h, &a, DEFAULT_COSET_BUDGET).unwrap();
        let case = ReductionCase::new(5, 5, 1, true, pm_set(5)).unwrap();
        (h, cosets, case)
    }

    #[test]
    fn borel_ordinary_ram_indices() {
        let (_, cosets, case) = borel_setup();
        assert_eq!(cosets.len(), 6);
        // fixed curve: connected kernel <e2> in the E[p]-basis
        let w = Some((0, 1));
        let mut indices: Vec<u64> = cosets
            .iter()
            .map(|c| ram_index(c, &case, w, DEFAULT_COSET_BUDGET).unwrap())
            .collect();
        indices.sort();
        assert_eq!(indices, vec![1, 5, 5, 5, 5, 5]);
    }

    #[test]
    fn borel_fiber_partition() {
        let (_, cosets, case) = borel_setup();
        let w = Some((0, 1));
        let mut structures: Vec<ReducedStructure> = Vec::new();
        for c in &cosets {
            let s = pr_star(c, &case, w).unwrap();
            if !structures.contains(&s) {
                structures.push(s);
            }
        }
        // fibers {1} + {5} partition the 6 classes
        assert_eq!(structures.len(), 2);
        let total: usize = structures
            .iter()
            .map(|s| {
                cosets
                    .iter()
                    .filter(|c| pr_star(c, &case, w).unwrap() == *s)
                    .count()
            })
            .sum();
        assert_eq!(total, cosets.len());
    }

    #[test]
    fn borel_e_den_is_5() {
        let (_, cosets, case) = borel_setup();
        for c in &cosets {
            assert_eq!(e_den(c, &case, DEFAULT_COSET_BUDGET).unwrap(), 5);
        }
    }

    #[test]
    fn full_group_e_is_1() {
        let h = Arc::new(SubgroupH::full(5).unwrap());
        let a = pm_set(5);
        let c = DoubleCoset::new(h, ModMatrix::identity(5), a).unwrap();
        let case = ReductionCase::new(5, 5, 1, true, pm_set(5)).unwrap();
        assert_eq!(ram_index(&c, &case, Some((1, 0)), DEFAULT_COSET_BUDGET).unwrap(), 1);
        assert_eq!(e_den(&c, &case, DEFAULT_COSET_BUDGET).unwrap(), 1);
    }

    #[test]
    fn representative_independence() {
        let (_, cosets, case) = borel_setup();
        let c = &cosets[1];
        let other = c.elements.iter().nth(c.elements.len() / 2).unwrap();
        let c2 = c.with_representative(*other).unwrap();
        assert_eq!(c.elements, c2.elements);
        let w = Some((0, 1));
        assert_eq!(
            ram_index(c, &case, w, DEFAULT_COSET_BUDGET).unwrap(),
            ram_index(&c2, &case, w, DEFAULT_COSET_BUDGET).unwrap()
        );
        assert_eq!(pr_star(c, &case, w).unwrap(), pr_star(&c2, &case, w).unwrap());
    }

    #[test]
    fn horizontal_order_6_example() {
        // A_red of order 6 with alpha outside g^-1 H g: e = 3 and the fiber
        // is {Hg, Hg alpha, Hg alpha^2}
        let h = Arc::new(SubgroupH::borel(5).unwrap());
        let tau = ModMatrix::from_signed(5, [-1, 1, -1, 0]);
        let a_red = automorphism_set(JClass::Zero, &tau, 5).unwrap();
        let g = ModMatrix::identity(5);
        assert!(!h.contains(&tau)); // alpha not in g^-1 H g with g = I
        let c = DoubleCoset::new(h.clone(), g, pm_set(5)).unwrap();
        // p = 7 coprime to N: no etale part, m = 0
        let case = ReductionCase::new(5, 7, 0, false, a_red.clone()).unwrap();
        let fiber = pr_star_fiber(&c, &case, None, DEFAULT_COSET_BUDGET).unwrap();
        assert_eq!(fiber.len(), 3);
        // fiber = {Hg, Hg alpha, Hg alpha^2}
        let mut expect: Vec<BTreeSet<ModMatrix>> = Vec::new();
        for k in 0..3u64 {
            let rep = g.mul(&tau.pow(k).unwrap()).unwrap();
            let dc = DoubleCoset::new(h.clone(), rep, pm_set(5)).unwrap();
            expect.push(dc.elements);
        }
        for f in &fiber {
            assert!(expect.contains(&f.elements));
        }
    }

    #[test]
    fn supersingular_trivial_n0() {
        // N = p^m: every class reduces to the single trivial structure
        let h = Arc::new(SubgroupH::borel(5).unwrap());
        let a = pm_set(5);
        let cosets = double_cosets(&h, &a, DEFAULT_COSET_BUDGET).unwrap();
        let case = ReductionCase::new(5, 5, 1, false, pm_set(5)).unwrap();
        let s0 = pr_star(&cosets[0], &case, None).unwrap();
        for c in &cosets {
            assert_eq!(pr_star(c, &case, None).unwrap(), s0);
            // supersingular e_den equals the ram index
            assert_eq!(
                e_den(c, &case, DEFAULT_COSET_BUDGET).unwrap(),
                ram_index(c, &case, None, DEFAULT_COSET_BUDGET).unwrap()
            );
        }
    }

    #[test]
    fn kernel_canonicalization() {
        assert_eq!(canonical_kernel((2, 3), 5, 1).unwrap(), (1, 4)); // 3*2^-1 = 3*3 = 9 = 4
        assert_eq!(canonical_kernel((0, 2), 5, 1).unwrap(), (0, 1));
        assert!(canonical_kernel((0, 0), 5, 1).is_err());
        assert!(canonical_kernel((5, 10), 5, 2).is_err());
        // 3^-1 = 17 mod 25, 5*17 = 85 = 10 mod 25
        assert_eq!(canonical_kernel((5, 3), 5, 2).unwrap(), (10, 1));
        assert_eq!(canonical_kernel((2, 3), 5, 2).unwrap(), (1, 14)); // 3*13 = 39 = 14
        assert_eq!(cyclic_kernels(5, 1).len(), 6);
        assert_eq!(cyclic_kernels(5, 2).len(), 30);
    }
}
