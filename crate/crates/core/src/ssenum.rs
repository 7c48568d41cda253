//! The supersingular locus SS_p: all supersingular j-invariants in F_{p²},
//! their automorphism weights, the Eichler mass and the measure ν_p.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::ffield::{fp2_construct, Fp2, Fp2Ctx};
use crate::numbase::{fmt_rat, Rat};

/// Largest p for the brute-force scan over F_{p²}.
pub const MAX_SCAN_PRIME: i64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SupersingularPoint {
    pub j: Fp2,
    pub weight: u32,
    /// Short Weierstrass model y² = x³ + A x + B with invariant j.
    pub a: Fp2,
    pub b: Fp2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupersingularLocus {
    pub p: i64,
    pub points: Vec<SupersingularPoint>,
    pub mass: Rat,
    pub nu: Vec<Rat>,
}

/// (A, B) with j(y² = x³ + A x + B) = j.
pub fn weierstrass_from_j(j: Fp2, ctx: &Fp2Ctx) -> (Fp2, Fp2) {
    let k1728 = ctx.from_int(1728);
    if j.is_zero() {
        return (Fp2::ZERO, Fp2::ONE);
    }
    if j == k1728 {
        return (Fp2::ONE, Fp2::ZERO);
    }
    let m = ctx.sub(k1728, j);
    let jm = ctx.mul(j, m);
    (ctx.scale(jm, 3), ctx.scale(ctx.mul(jm, m), 2))
}

/// Weight w = |Aut(E)/{±1}| by j-value, valid for p ≥ 5.
pub fn weight_of(j: Fp2, ctx: &Fp2Ctx) -> u32 {
    if j.is_zero() {
        3
    } else if j == ctx.from_int(1728) {
        2
    } else {
        1
    }
}

/// Per-characteristic tables for the Hasse invariant.
struct HasseTables {
    half: usize,
    fact: Vec<u64>,
    inv_fact: Vec<u64>,
}

impl HasseTables {
    fn new(ctx: &Fp2Ctx) -> Self {
        let p = ctx.p();
        let half = ((p - 1) / 2) as usize;
        let mut fact = vec![1u64; half + 1];
        for i in 1..=half {
            fact[i] = fact[i - 1] * i as u64 % p;
        }
        let inv_fact = fact.iter().map(|&f| ctx.fp_inv(f)).collect();
        HasseTables { half, fact, inv_fact }
    }

    /// Coefficient of x^{p−1} in (x³ + A x + B)^{(p−1)/2}, from the multinomial
    /// expansion: terms x^{3i} (Ax)^j B^k with 3i + j = p − 1, i + j + k = m.
    fn coefficient(&self, a: Fp2, b: Fp2, ctx: &Fp2Ctx) -> Fp2 {
        let p = ctx.p() as usize;
        let m = self.half;
        let mut acc = Fp2::ZERO;
        let i_lo = m.div_ceil(2);
        let i_hi = (p - 1) / 3;
        for i in i_lo..=i_hi {
            let j = p - 1 - 3 * i;
            let k = 2 * i - m;
            let multinomial = self.fact[m] * self.inv_fact[i] % ctx.p() * self.inv_fact[j] % ctx.p()
                * self.inv_fact[k]
                % ctx.p();
            let term = ctx.mul(ctx.pow(a, j as u128), ctx.pow(b, k as u128));
            acc = ctx.add(acc, ctx.scale(term, multinomial));
        }
        acc
    }
}

fn check_char(p: i64) -> Result<Fp2Ctx> {
    if p < 5 {
        return Err(domain!("supersingularity test needs p >= 5, got {p}"));
    }
    fp2_construct(p)
}

pub fn is_supersingular_j(j: Fp2, p: i64) -> Result<bool> {
    let ctx = check_char(p)?;
    let tables = HasseTables::new(&ctx);
    let (a, b) = weierstrass_from_j(j, &ctx);
    Ok(tables.coefficient(a, b, &ctx).is_zero())
}

pub fn enumerate_ss(p: i64) -> Result<SupersingularLocus> {
    let ctx = check_char(p)?;
    if p > MAX_SCAN_PRIME {
        return Err(Error::Budget(format!(
            "brute-force scan of F_(p^2) is limited to p <= {MAX_SCAN_PRIME}; larger p needs an isogeny walk"
        )));
    }
    let tables = HasseTables::new(&ctx);
    let pu = ctx.p();
    let mut points: Vec<SupersingularPoint> = (0..pu)
        .into_par_iter()
        .flat_map_iter(|x| {
            let tables = &tables;
            (0..pu).filter_map(move |y| {
                let j = Fp2 { x, y };
                let (a, b) = weierstrass_from_j(j, &ctx);
                tables
                    .coefficient(a, b, &ctx)
                    .is_zero()
                    .then(|| SupersingularPoint { j, weight: weight_of(j, &ctx), a, b })
            })
        })
        .collect();
    points.sort_by_key(|pt| pt.j);
    let mass = points.iter().map(|pt| Rat::new(1.into(), pt.weight.into())).fold(Rat::zero(), |s, x| s + x);
    let mut locus = SupersingularLocus { p, points, mass, nu: vec![] };
    locus.nu = nu_p(&locus);
    Ok(locus)
}

/// ν_p(E) = (12/(p−1))·(1/w_E).
pub fn nu_p(locus: &SupersingularLocus) -> Vec<Rat> {
    let scale = Rat::new(12.into(), (locus.p - 1).into());
    locus.points.iter().map(|pt| &scale / Rat::from_integer(pt.weight.into())).collect()
}

impl SupersingularLocus {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn expected_mass(&self) -> Rat {
        Rat::new((self.p - 1).into(), 12.into())
    }

    pub fn nu_sums_to_one(&self) -> bool {
        self.nu.iter().fold(Rat::zero(), |s, x| s + x).is_one()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "points": self.points.iter().map(|pt| serde_json::json!({"j": pt.j.to_string(), "w": pt.weight})).collect::<Vec<_>>(),
            "mass": fmt_rat(&self.mass),
        })
    }
}
