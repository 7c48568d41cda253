//! Invariant checks behind `cmreduce verify`.

use std::sync::Arc;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmreduce::classpoly::{hilbert_class_poly, ClassPolyCache};
use cmreduce::ffield::{fp2_construct, roots_with_multiplicity};
use cmreduce::numbase::{fmt_rat, is_prime_u64, rat};
use cmreduce::quadforms::{class_number, genus_decomposition, is_fundamental_discriminant, splitting, Discriminant, Splitting};
use cmreduce::quatalg::{construct_bp, ideal_classes, killing_check, maximal_order, QuatElement};
use cmreduce::reduction::{character_average, fiber_multiset_crosscheck, joint_reduce};
use cmreduce::ssenum::{enumerate_ss, is_supersingular_j};
use cmreduce::Result;

pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

struct Ranges {
    mass_pmax: i64,
    class_pmax: i64,
    poly_dmax: i64,
    fiber_dmax: i64,
    joint_dmax: i64,
    killing_samples: usize,
    character_dmax: i64,
}

const QUICK: Ranges = Ranges {
    mass_pmax: 60,
    class_pmax: 30,
    poly_dmax: 120,
    fiber_dmax: 150,
    joint_dmax: 300,
    killing_samples: 50,
    character_dmax: 300,
};

const FULL: Ranges = Ranges {
    mass_pmax: 300,
    class_pmax: 100,
    poly_dmax: 400,
    fiber_dmax: 500,
    joint_dmax: 1000,
    killing_samples: 500,
    character_dmax: 2000,
};

fn primes_up_to(n: i64) -> impl Iterator<Item = i64> {
    (5..=n).filter(|&p| is_prime_u64(p as u64))
}

fn fundamental_up_to(n: i64) -> impl Iterator<Item = Discriminant> {
    (3..=n).filter(|&m| is_fundamental_discriminant(-m)).map(|m| Discriminant::new(-m).expect("fundamental"))
}

fn inert(d: Discriminant, p: i64) -> bool {
    matches!(splitting(d, p), Ok(Splitting::Inert))
}

type Check = fn(&Ranges, Option<&ClassPolyCache>) -> Result<(bool, String)>;

pub fn run_suite(quick: bool, cache: Option<&ClassPolyCache>) -> Vec<CheckResult> {
    let ranges = if quick { &QUICK } else { &FULL };
    let checks: [(&'static str, Check); 7] = [
        ("eichler-mass", mass),
        ("class-sets", class_sets),
        ("classpoly-supersingular", classpoly_roots),
        ("fiber-multiset", fibers),
        ("joint-marginals", joint),
        ("killing-form", killing),
        ("genus-orthogonality", characters),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let (pass, detail) = f(ranges, cache).unwrap_or_else(|e| (false, e.to_string()));
            CheckResult { name, pass, detail }
        })
        .collect()
}

fn mass(r: &Ranges, _: Option<&ClassPolyCache>) -> Result<(bool, String)> {
    let mut n = 0;
    for p in primes_up_to(r.mass_pmax) {
        let ss = enumerate_ss(p)?;
        if ss.mass != ss.expected_mass() || !ss.nu_sums_to_one() {
            return Ok((false, format!("p = {p}: mass {}", fmt_rat(&ss.mass))));
        }
        n += 1;
    }
    Ok((true, format!("{n} primes")))
}

fn class_sets(r: &Ranges, _: Option<&ClassPolyCache>) -> Result<(bool, String)> {
    let mut n = 0;
    for p in primes_up_to(r.class_pmax) {
        let o = Arc::new(maximal_order(&construct_bp(p)?)?);
        let set = ideal_classes(&o)?;
        let ss = enumerate_ss(p)?;
        if set.len() != ss.len() || set.mass() != ss.mass {
            return Ok((false, format!("p = {p}: {} classes, {} supersingular j", set.len(), ss.len())));
        }
        n += 1;
    }
    Ok((true, format!("{n} primes")))
}

fn classpoly_roots(r: &Ranges, cache: Option<&ClassPolyCache>) -> Result<(bool, String)> {
    let mut n = 0;
    for d in fundamental_up_to(r.poly_dmax) {
        let h = match cache {
            Some(c) => c.get(d)?,
            None => hilbert_class_poly(d)?,
        };
        if h.degree() != class_number(d) {
            return Ok((false, format!("D = {d}: degree {} but h = {}", h.degree(), class_number(d))));
        }
        for p in [11, 23].into_iter().filter(|&p| inert(d, p)) {
            let ctx = fp2_construct(p)?;
            for (j, _) in roots_with_multiplicity(&h.to_ffpoly(&ctx), &ctx)? {
                if !is_supersingular_j(j, p)? {
                    return Ok((false, format!("D = {d}, p = {p}: root {j} is ordinary")));
                }
            }
            n += 1;
        }
    }
    Ok((true, format!("{n} (D, p) pairs")))
}

fn fibers(r: &Ranges, _: Option<&ClassPolyCache>) -> Result<(bool, String)> {
    let mut n = 0;
    for d in fundamental_up_to(r.fiber_dmax) {
        for p in [11, 23].into_iter().filter(|&p| inert(d, p)) {
            if !fiber_multiset_crosscheck(d, p)? {
                return Ok((false, format!("D = {d}, p = {p}")));
            }
            n += 1;
        }
    }
    Ok((true, format!("{n} (D, p) pairs")))
}

fn joint(r: &Ranges, _: Option<&ClassPolyCache>) -> Result<(bool, String)> {
    let mut n = 0;
    for d in fundamental_up_to(r.joint_dmax).filter(|&d| inert(d, 11) && inert(d, 23)) {
        let j = joint_reduce(d, &[11, 23])?;
        let total: u64 = j.tuple_counts.values().sum();
        let marginals_ok = j.reductions.iter().all(|red| red.fiber_sizes().iter().sum::<usize>() == j.h);
        if total != j.h as u64 || !marginals_ok || j.tv < rat(0, 1) || j.tv > rat(1, 1) {
            return Ok((false, format!("D = {d}")));
        }
        n += 1;
    }
    Ok((true, format!("{n} discriminants")))
}

fn killing(r: &Ranges, _: Option<&ClassPolyCache>) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let algebras = [construct_bp(5)?, construct_bp(11)?, construct_bp(23)?, construct_bp(101)?];
    for k in 0..r.killing_samples {
        let alg = &algebras[k % algebras.len()];
        let c: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-20..=20));
        let x = QuatElement::new([rat(0, 1), rat(c[1], 1), rat(c[2], 1), rat(c[3], 1)]);
        let (trace, rhs) = killing_check(alg, &x)?;
        // trace(ad_x^2) on the pure quaternions is -8 Nr(x)
        if trace != &rhs * rat(2, 1) || (x.is_zero() && !trace.is_zero()) {
            return Ok((false, format!("x = {x} in ({}, {})", alg.a, alg.b)));
        }
    }
    Ok((true, format!("{} samples satisfy trace(ad_x^2) = -8 Nr(x)", r.killing_samples)))
}

fn characters(r: &Ranges, _: Option<&ClassPolyCache>) -> Result<(bool, String)> {
    let mut n = 0;
    for d in fundamental_up_to(r.character_dmax) {
        let m = d.abs();
        for d1 in (-m..=m).filter(|&x| x != 1 && x != d.value() && is_fundamental_discriminant(x)) {
            if genus_decomposition(d1, d).is_err() {
                continue;
            }
            if !character_average(d, d1)?.is_zero() {
                return Ok((false, format!("D = {d}, d1 = {d1}")));
            }
            n += 1;
        }
    }
    Ok((true, format!("{n} nontrivial genus characters")))
}
