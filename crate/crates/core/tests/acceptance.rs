//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p cmreduce --test acceptance`. The process fails if
//! any criterion fails, except those listed in `KNOWN_UNATTAINABLE`, which
//! print FAIL together with the check that does hold in their place.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmreduce::numbase::{is_prime_u64, rat, Int, Rat};
use cmreduce::quadforms::{
    admissible_discriminants, class_number, genus_decomposition, is_fundamental_discriminant, reduced_forms,
    AdmissibleFilter, Discriminant,
};
use cmreduce::quatalg::{
    construct_bp, hs_norm_ratio, ideal_classes, killing_check, local_norm_surjectivity, maximal_order,
    norm_image, norm_image_brute, packet_discriminant, QuatElement, QuaternionAlgebra,
};
use cmreduce::reduction::{
    character_average, exceptional_fields, fiber_multiset_crosscheck, joint_reduce, median, nu_infinity_cusp,
    reduce_archimedean, scan, CharacterSpec, FactorSpec, PrimeContext, ScanConfig,
};
use cmreduce::ssenum::enumerate_ss;
use std::sync::Arc;

/// Criterion 6: the larger-range median TV must not exceed this.
const TV_MEDIAN_MAX: f64 = 0.15;
/// Criterion 7: allowed deviation of the cusp mass from 3/(2π).
const CUSP_TOLERANCE: f64 = 0.05;
/// Criterion 9: allowed deviation of the HS ratio from √8.
const HS_TOLERANCE: f64 = 1e-6;

/// Criteria that cannot hold as stated. Each still runs its corrected check,
/// which must pass for the suite to succeed.
const KNOWN_UNATTAINABLE: &[u32] = &[8];

struct Outcome {
    pass: bool,
    detail: String,
    /// For known-unattainable criteria: whether the corrected check held.
    corrected_ok: Option<bool>,
}

fn ok(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail, corrected_ok: None }
}

fn primes_between(lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi).filter(|&p| is_prime_u64(p as u64)).collect()
}

fn fundamental_inert(p: &[i64], lo: i64, hi: i64) -> Vec<Discriminant> {
    let filter = AdmissibleFilter { inert: p.to_vec(), fundamental_only: true, ..Default::default() };
    admissible_discriminants(filter, (lo, hi)).unwrap().collect()
}

fn c1() -> Outcome {
    let mut bad = vec![];
    let ps = primes_between(5, 200);
    for &p in &ps {
        let ss = enumerate_ss(p).unwrap();
        if ss.mass != rat(p - 1, 12) {
            bad.push(p);
        }
    }
    ok(bad.is_empty(), format!("{} primes in [5, 200], mismatches {bad:?}", ps.len()))
}

fn c2() -> Outcome {
    let mut bad = vec![];
    let ps = primes_between(5, 100);
    for &p in &ps {
        let ss = enumerate_ss(p).unwrap();
        let o = Arc::new(maximal_order(&construct_bp(p).unwrap()).unwrap());
        let cl = ideal_classes(&o).unwrap();
        let mut a: Vec<u32> = ss.points.iter().map(|q| q.weight).collect();
        let mut b = cl.weights.clone();
        a.sort();
        b.sort();
        if a != b {
            bad.push(p);
        }
    }
    ok(bad.is_empty(), format!("{} primes in [5, 100], mismatches {bad:?}", ps.len()))
}

fn c3() -> Outcome {
    let mut worst = Rat::zero();
    let mut worst_p = 0;
    for p in primes_between(5, 200) {
        let n = enumerate_ss(p).unwrap().points.len() as i64;
        let dev = (rat(n, 1) - rat(p, 12)).abs();
        if dev > worst {
            worst = dev;
            worst_p = p;
        }
    }
    ok(worst <= rat(2, 1), format!("max | |SS_p| - p/12 | = {worst} at p = {worst_p}"))
}

fn c4() -> Outcome {
    let mut cases = 0;
    let mut failures = vec![];
    for p in [5i64, 11, 23] {
        for d in fundamental_inert(&[p], 3, 2000) {
            cases += 1;
            if !fiber_multiset_crosscheck(d, p).unwrap() {
                failures.push((d.value(), p));
            }
        }
    }
    ok(failures.is_empty() && cases >= 150, format!("{cases} (D, p) cases, failures {failures:?}"))
}

fn c5() -> Outcome {
    let found = fundamental_inert(&[11, 23], 3, 5000)
        .into_iter()
        .find(|&d| joint_reduce(d, &[11, 23]).unwrap().is_surjective());
    match found {
        Some(d) => ok(true, format!("smallest |D| hitting all 6 tuples: D = {d}, h = {}", class_number(d))),
        None => ok(false, "no admissible |D| <= 5000 hits all 6 tuples".into()),
    }
}

fn tv_median(lo: i64, hi: i64) -> (f64, usize) {
    let cfg = ScanConfig { primes: vec![11, 23], dmin: lo + 1, dmax: hi, ..Default::default() };
    let report = scan(&cfg).unwrap();
    let mut tv: Vec<Rat> = report.rows.iter().map(|r| r.tv.clone()).collect();
    (median(&mut tv).unwrap().to_f64().unwrap(), tv.len())
}

fn c6() -> Outcome {
    let (small, n_small) = tv_median(100, 1000);
    let (large, n_large) = tv_median(10_000, 20_000);
    ok(
        large < small && large <= TV_MEDIAN_MAX,
        format!("median TV {small:.4} over {n_small} D in (1e2, 1e3], {large:.4} over {n_large} D in (1e4, 2e4]"),
    )
}

fn c7() -> Outcome {
    let target = nu_infinity_cusp(2.0);
    let mut by_h: Vec<(usize, Discriminant)> = fundamental_inert(&[11, 23], 3, 99_999)
        .into_iter()
        .map(|d| (reduced_forms(d).len(), d))
        .filter(|&(h, _)| h <= 600)
        .collect();
    by_h.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.abs().cmp(&a.1.abs())));
    let mut worst: f64 = 0.0;
    let mut parts = vec![];
    for &(h, d) in by_h.iter().take(10) {
        let (_, st) = reduce_archimedean(d);
        let m = st.cusp[0].mass.to_f64().unwrap();
        worst = worst.max((m - target).abs());
        parts.push(format!("{}:{h}:{m:.3}", d.value()));
    }
    ok(
        by_h.len() >= 10 && worst <= CUSP_TOLERANCE,
        format!("target {target:.4}, max deviation {worst:.4}; D:h:mass {}", parts.join(" ")),
    )
}

fn random_traceless(rng: &mut ChaCha8Rng) -> QuatElement {
    let mut c = [rat(0, 1), rat(0, 1), rat(0, 1), rat(0, 1)];
    for t in c.iter_mut().skip(1) {
        *t = rat(rng.gen_range(-50..=50), rng.gen_range(1..=6));
    }
    QuatElement::new(c)
}

fn c8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut algebras: Vec<(String, QuaternionAlgebra)> =
        [5i64, 11, 13, 23].iter().map(|&p| (format!("B_{p}"), construct_bp(p).unwrap())).collect();
    algebras.push(("Mat2".into(), QuaternionAlgebra::new(1, 1).unwrap()));
    let mut literal = 0;
    let mut doubled = 0;
    let mut total = 0;
    for (_, alg) in &algebras {
        for _ in 0..100 {
            let x = random_traceless(&mut rng);
            let (tr, rhs) = killing_check(alg, &x).unwrap();
            total += 1;
            literal += (tr == rhs) as usize;
            doubled += (tr == &rhs * rat(2, 1)) as usize;
        }
    }
    // nilpotent in the split model: both sides vanish
    let mat2 = &algebras[4].1;
    let nil = killing_check(mat2, &QuatElement::from_ints([0, 1, 0, 1])).unwrap();
    let nil_ok = nil == (rat(0, 1), rat(0, 1));
    Outcome {
        pass: literal == total && nil_ok,
        detail: format!(
            "trace(ad_x^2) = -4 Nr(x) on {literal}/{total} samples; unattainable as stated: \
             trace(ad_x^2) = -8 Nr(x) exactly on {doubled}/{total} (x = i, i^2 = -1 gives -8); nilpotent case (0, 0): {nil_ok}"
        ),
        corrected_ok: Some(doubled == total && nil_ok),
    }
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ps = [5i64, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43];
    let mut pairs = 0;
    let mut bad = vec![];
    while pairs < 50 {
        let p = ps[rng.gen_range(0..ps.len())];
        let n = rng.gen_range(3..3000i64);
        let Some(d) = AdmissibleFilter { inert: vec![p], fundamental_only: true, ..Default::default() }.admits(-n) else {
            continue;
        };
        let ctx = PrimeContext::get(p).unwrap();
        let (_, e) = ctx.embedding_for(d).unwrap();
        if packet_discriminant(&e).unwrap() != Int::from(d.abs()) {
            bad.push((d.value(), p));
        }
        pairs += 1;
    }
    let discs = [-3i64, -4, -7, -8, -23, -71, -84, -1003, -99_971, -1_000_003];
    let worst = discs
        .iter()
        .map(|&d| (hs_norm_ratio(Discriminant::new(d).unwrap()) - 8f64.sqrt()).abs())
        .fold(0.0, f64::max);
    ok(
        bad.is_empty() && worst <= HS_TOLERANCE,
        format!("packet discriminant = |D| on {pairs} random pairs (bad {bad:?}); max |HS ratio - sqrt 8| = {worst:.2e} over 10 D"),
    )
}

fn c10() -> Outcome {
    let mut checked = 0;
    let mut bad = vec![];
    let mut brute = 0;
    for p in [11i64, 23] {
        let o = maximal_order(&construct_bp(p).unwrap()).unwrap();
        for q in primes_between(2, 20) {
            let mut k = 1;
            while q.pow(k) <= 10_000 {
                checked += 1;
                if !local_norm_surjectivity(&o, q, k).unwrap() {
                    bad.push((p, q, k));
                }
                if q.pow(4 * k) <= 1_000_000 {
                    brute += 1;
                    if norm_image(&o, q, k).unwrap() != norm_image_brute(&o, q, k).unwrap() {
                        bad.push((p, q, k));
                    }
                }
                k += 1;
            }
        }
    }
    ok(bad.is_empty(), format!("{checked} (p, q, k) triples surjective, {brute} also by full enumeration; failures {bad:?}"))
}

fn c11() -> Outcome {
    let mut discs = 0;
    let mut nontrivial = 0;
    let mut bad = vec![];
    for n in 3..5000i64 {
        if discs == 20 {
            break;
        }
        if !is_fundamental_discriminant(-n) {
            continue;
        }
        let d = Discriminant::new(-n).unwrap();
        let d1s: Vec<i64> = (-n..=n)
            .filter(|&x| x != 0 && x != 1 && x != -n && is_fundamental_discriminant(x))
            .filter(|&x| genus_decomposition(x, d).is_ok())
            .collect();
        if d1s.is_empty() {
            continue;
        }
        discs += 1;
        if character_average(d, 1).unwrap() != rat(1, 1) || character_average(d, -n).unwrap() != rat(1, 1) {
            bad.push((d.value(), 1));
        }
        for d1 in d1s {
            nontrivial += 1;
            if character_average(d, d1).unwrap() != rat(0, 1) {
                bad.push((d.value(), d1));
            }
        }
    }
    let mut exceptional_ok = exceptional_fields(&CharacterSpec::eichler(2, 10_000)).unwrap().is_empty();
    for p in [11i64, 23] {
        let o = maximal_order(&construct_bp(p).unwrap()).unwrap();
        let f = FactorSpec::from_order(&o, &primes_between(2, 50)).unwrap();
        let spec = CharacterSpec { factors: vec![f.clone(), f], conductor_bound: 10_000 };
        exceptional_ok &= exceptional_fields(&spec).unwrap().is_empty();
    }
    ok(
        bad.is_empty() && discs == 20 && exceptional_ok,
        format!("{discs} decomposable D, {nontrivial} nontrivial characters average 0, failures {bad:?}; Eichler exceptional set empty: {exceptional_ok}"),
    )
}

fn c12() -> Outcome {
    let cfg = ScanConfig { primes: vec![11, 23], dmin: 3, dmax: 3000, sample: Some(80), seed: 12, ..Default::default() };
    let a = scan(&cfg).unwrap();
    let b = scan(&ScanConfig { threads: Some(2), ..cfg.clone() }).unwrap();
    let same_csv = a.to_csv() == b.to_csv();
    let same_json = serde_json::to_string(&a.to_json()).unwrap() == serde_json::to_string(&b.to_json()).unwrap();
    ok(same_csv && same_json, format!("{} rows, config {}; CSV identical {same_csv}, JSON identical {same_json}", a.rows.len(), &a.config_hash[..12]))
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "mass formula, 5 <= p <= 200", c1),
        (2, "class set = supersingular locus, 5 <= p <= 100", c2),
        (3, "|SS_p| within 2 of p/12", c3),
        (4, "fiber multisets = root multiplicities", c4),
        (5, "joint reduction surjective for (11, 23)", c5),
        (6, "median TV decreases", c6),
        (7, "archimedean cusp mass", c7),
        (8, "Killing form = -4 Nr", c8),
        (9, "discriminant normalization", c9),
        (10, "local norm surjectivity", c10),
        (11, "character orthogonality", c11),
        (12, "scan reproducibility", c12),
    ];
    let only: Option<Vec<u32>> = std::env::args().nth(1).filter(|a| !a.starts_with('-')).map(|a| {
        a.split(',').filter_map(|s| s.parse().ok()).collect()
    });
    let mut failed = BTreeMap::new();
    for (n, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        println!("{} criterion {n:>2} ({name}): {} [{secs:.1}s]", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        if !out.pass {
            let excused = KNOWN_UNATTAINABLE.contains(&n) && out.corrected_ok == Some(true);
            failed.insert(n, excused);
        }
    }
    let excused: Vec<u32> = failed.iter().filter(|(_, &e)| e).map(|(n, _)| *n).collect();
    let real: Vec<u32> = failed.iter().filter(|(_, &e)| !e).map(|(n, _)| *n).collect();
    if !excused.is_empty() {
        println!("known unattainable as stated (corrected identity verified): {excused:?}");
    }
    if !real.is_empty() {
        println!("failed: {real:?}");
        std::process::exit(1);
    }
}
