//! Reduction maps on Pic(O_D): to CM points in the upper half-plane, and to
//! left ideal classes of a maximal order at each inert prime, plus the
//! statistics comparing joint reductions with the product measure.
//!
//! Class labels at a prime depend on the choice of embedding and base class;
//! every statistic reported here is invariant under relabeling.

mod characters;
mod scan;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::classpoly::hilbert_class_poly;
use crate::error::{domain, internal, Error, Result};
use crate::ffield::{fp2_construct, roots_with_multiplicity};
use crate::numbase::{fmt_rat, Rat};
use crate::quadforms::{cm_point, splitting, ClassGroup, CmPoint, Discriminant, QuadForm, Splitting};
use crate::quatalg::{
    construct_bp, find_optimal_embedding, ideal_classes, left_ideal_from_class, maximal_order, Embedding,
    IdealClassSet, Order,
};

pub use characters::{
    character_average, exceptional_fields, CharacterSpec, FactorSpec, LocalNormImage, MAX_CONDUCTOR_BOUND,
};
pub use scan::{median, scan, DyadicSummary, ScanConfig, ScanReport, ScanRow, CSV_HEADER};

/// ν_∞({Im τ ≥ y}) = 3/(π y) for y ≥ 1.
pub fn nu_infinity_cusp(y: f64) -> f64 {
    assert!(y >= 1.0, "cusp boxes start at height 1");
    3.0 / (std::f64::consts::PI * y)
}

/// ν_∞({|Re τ| ≤ x}) = (6/π) arcsin x for 0 ≤ x ≤ 1/2.
pub fn nu_infinity_strip(x: f64) -> f64 {
    6.0 * x.clamp(0.0, 0.5).asin() / std::f64::consts::PI
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxMass {
    pub bound: f64,
    pub mass: Rat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchimedeanStats {
    pub count: usize,
    pub min_im: f64,
    pub max_im: f64,
    /// Empirical mass of {Im τ ≥ y} per requested y.
    pub cusp: Vec<BoxMass>,
    /// Empirical mass of {|Re τ| ≤ x} per requested x.
    pub strip: Vec<BoxMass>,
}

impl ArchimedeanStats {
    pub fn to_json(&self) -> Value {
        let boxes = |v: &[BoxMass]| v.iter().map(|b| json!({"bound": b.bound, "mass": fmt_rat(&b.mass)})).collect::<Vec<_>>();
        json!({
            "count": self.count,
            "min_im": self.min_im,
            "max_im": self.max_im,
            "cusp": boxes(&self.cusp),
            "strip": boxes(&self.strip),
        })
    }
}

/// CM points of Pic(O_D) with the default boxes {y ≥ 2} and {|x| ≤ 1/4}.
pub fn reduce_archimedean(d: Discriminant) -> (Vec<CmPoint>, ArchimedeanStats) {
    reduce_archimedean_with(d, &[2.0], &[0.25])
}

pub fn reduce_archimedean_with(d: Discriminant, ys: &[f64], xs: &[f64]) -> (Vec<CmPoint>, ArchimedeanStats) {
    let cg = ClassGroup::new(d);
    let points: Vec<CmPoint> = cg.forms.iter().map(|f| cm_point(f, d).expect("reduced form")).collect();
    let h = points.len() as i64;
    // Im τ ≥ y ⟺ |D| ≥ 4 a² y², decided exactly when y² is an integer
    let cusp = ys
        .iter()
        .map(|&y| {
            let n = points.iter().filter(|pt| cusp_contains(pt, y)).count() as i64;
            BoxMass { bound: y, mass: Rat::new(n.into(), h.into()) }
        })
        .collect();
    let strip = xs
        .iter()
        .map(|&x| {
            let n = points.iter().filter(|pt| (pt.tau.0 as f64).abs() <= x * pt.tau.2 as f64).count() as i64;
            BoxMass { bound: x, mass: Rat::new(n.into(), h.into()) }
        })
        .collect();
    let min_im = points.iter().map(|pt| pt.im).fold(f64::INFINITY, f64::min);
    let max_im = points.iter().map(|pt| pt.im).fold(0.0, f64::max);
    let stats = ArchimedeanStats { count: points.len(), min_im, max_im, cusp, strip };
    (points, stats)
}

fn cusp_contains(pt: &CmPoint, y: f64) -> bool {
    let (_, absd, den) = pt.tau;
    let y2 = y * y;
    if y2.fract() == 0.0 && y2 < 1e12 {
        absd as i128 >= (den as i128) * (den as i128) * (y2 as i128)
    } else {
        pt.im >= y
    }
}

/// The maximal order of B_{∞,p} with its class set and ν_p on classes.
#[derive(Debug)]
pub struct PrimeContext {
    pub p: i64,
    pub order: Arc<Order>,
    pub classes: IdealClassSet,
    pub nu: Vec<Rat>,
}

impl PrimeContext {
    pub fn new(p: i64) -> Result<Self> {
        let order = Arc::new(maximal_order(&construct_bp(p)?)?);
        let classes = ideal_classes(&order)?;
        let mass = classes.mass();
        let nu = classes.weights.iter().map(|w| Rat::new(BigInt::one(), BigInt::from(*w)) / &mass).collect();
        Ok(PrimeContext { p, order, classes, nu })
    }

    /// Shared per-prime context, built once per process.
    pub fn get(p: i64) -> Result<Arc<PrimeContext>> {
        static CACHE: OnceLock<Mutex<HashMap<i64, Arc<PrimeContext>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(c) = cache.lock().expect("prime cache").get(&p) {
            return Ok(c.clone());
        }
        let c = Arc::new(PrimeContext::new(p)?);
        Ok(cache.lock().expect("prime cache").entry(p).or_insert(c).clone())
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// First class index whose right order admits an optimal embedding of O_D;
    /// class 0 (the order itself) whenever possible.
    pub fn embedding_for(&self, d: Discriminant) -> Result<(usize, Embedding)> {
        for (k, ro) in self.classes.right_orders.iter().enumerate() {
            match find_optimal_embedding(ro, d) {
                Ok(e) => return Ok((k, e)),
                Err(Error::NotRepresented(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(internal!("no maximal order of B_(inf,{}) admits an optimal embedding of discriminant {d}", self.p))
    }
}

fn check_reducible(d: Discriminant, p: i64) -> Result<()> {
    match splitting(d, p)? {
        Splitting::Inert => {}
        s => return Err(domain!("{p} is {s:?} in discriminant {d}; reduction needs an inert prime")),
    }
    if d.conductor() % p == 0 {
        return Err(domain!("{p} divides the conductor of {d}"));
    }
    Ok(())
}

/// Pic(O_D) → Cl(O) at one inert prime.
#[derive(Clone, Debug)]
pub struct PrimeReduction {
    pub disc: Discriminant,
    pub p: i64,
    /// Class k whose right order O_k carries the embedding; [a] goes to the
    /// class of I_k · O_k ι(a), so the principal class goes to k.
    pub base_class: usize,
    pub embedding: Embedding,
    pub class_count: usize,
    /// Reduced forms in ClassGroup order.
    pub forms: Vec<QuadForm>,
    pub indices: Vec<usize>,
}

impl PrimeReduction {
    pub fn map(&self) -> BTreeMap<QuadForm, usize> {
        self.forms.iter().copied().zip(self.indices.iter().copied()).collect()
    }

    /// Number of classes of Pic(O_D) over each ideal class.
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.class_count];
        for &k in &self.indices {
            out[k] += 1;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "D": self.disc.value().to_string(),
            "p": self.p,
            "base_class": self.base_class,
            "embedding": self.embedding.v().to_strings(),
            "map": self.forms.iter().zip(&self.indices).map(|(f, k)| json!({"form": f.to_array(), "class": k})).collect::<Vec<_>>(),
            "fibers": self.fiber_sizes(),
        })
    }
}

pub fn reduce_at_prime(d: Discriminant, p: i64) -> Result<PrimeReduction> {
    check_reducible(d, p)?;
    let ctx = PrimeContext::get(p)?;
    reduce_with(&ctx, d, &ClassGroup::new(d))
}

fn reduce_with(ctx: &PrimeContext, d: Discriminant, cg: &ClassGroup) -> Result<PrimeReduction> {
    let (k, emb) = ctx.embedding_for(d)?;
    let base = &ctx.classes.representatives[k];
    let host = &ctx.classes.right_orders[k];
    let mut indices = Vec::with_capacity(cg.h());
    for f in &cg.forms {
        let j = left_ideal_from_class(host, &emb, f)?;
        indices.push(ctx.classes.class_of_fast(&base.mul(&j))?);
    }
    Ok(PrimeReduction {
        disc: d,
        p: ctx.p,
        base_class: k,
        embedding: emb,
        class_count: ctx.class_count(),
        forms: cg.forms.clone(),
        indices,
    })
}

#[derive(Clone, Debug)]
pub struct JointDistribution {
    pub disc: Discriminant,
    pub primes: Vec<i64>,
    pub h: usize,
    pub class_counts: Vec<usize>,
    pub tuple_counts: BTreeMap<Vec<usize>, u64>,
    pub product_measure: BTreeMap<Vec<usize>, Rat>,
    /// ½ Σ |count/h − ν(t)| over the whole product space.
    pub tv: Rat,
    pub chi2: f64,
    pub reductions: Vec<PrimeReduction>,
}

impl JointDistribution {
    pub fn target_size(&self) -> usize {
        self.class_counts.iter().product()
    }

    /// Every tuple of classes is hit.
    pub fn is_surjective(&self) -> bool {
        self.tuple_counts.len() == self.target_size()
    }

    /// Tuple of classes for the i-th form of the class group.
    pub fn tuple_of(&self, i: usize) -> Vec<usize> {
        self.reductions.iter().map(|r| r.indices[i]).collect()
    }

    pub fn to_json(&self) -> Value {
        let key = |t: &[usize]| t.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        json!({
            "D": self.disc.value().to_string(),
            "primes": self.primes,
            "h": self.h,
            "class_counts": self.class_counts,
            "tuple_counts": self.tuple_counts.iter().map(|(t, c)| json!({"tuple": key(t), "count": c})).collect::<Vec<_>>(),
            "product_measure": self.product_measure.iter().map(|(t, m)| json!({"tuple": key(t), "mass": fmt_rat(m)})).collect::<Vec<_>>(),
            "tv": fmt_rat(&self.tv),
            "chi2": format!("{:.12e}", self.chi2),
            "surjective": self.is_surjective(),
        })
    }
}

pub fn joint_reduce(d: Discriminant, primes: &[i64]) -> Result<JointDistribution> {
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(domain!("primes must be pairwise distinct"));
    }
    for &p in primes {
        check_reducible(d, p)?;
    }
    let cg = ClassGroup::new(d);
    let ctxs: Vec<Arc<PrimeContext>> = primes.iter().map(|&p| PrimeContext::get(p)).collect::<Result<_>>()?;
    let reductions: Vec<PrimeReduction> = ctxs.iter().map(|c| reduce_with(c, d, &cg)).collect::<Result<_>>()?;
    Ok(joint_from_reductions(d, primes, &ctxs, reductions))
}

fn joint_from_reductions(
    d: Discriminant,
    primes: &[i64],
    ctxs: &[Arc<PrimeContext>],
    reductions: Vec<PrimeReduction>,
) -> JointDistribution {
    let h = reductions.first().map_or_else(|| ClassGroup::new(d).h(), |r| r.indices.len());
    let mut tuple_counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for i in 0..h {
        *tuple_counts.entry(reductions.iter().map(|r| r.indices[i]).collect()).or_default() += 1;
    }
    let class_counts: Vec<usize> = ctxs.iter().map(|c| c.class_count()).collect();
    let mut product_measure = BTreeMap::new();
    let mut tuple = vec![0usize; ctxs.len()];
    loop {
        let m = tuple.iter().zip(ctxs).fold(Rat::one(), |acc, (&k, c)| acc * &c.nu[k]);
        product_measure.insert(tuple.clone(), m);
        // odometer over the product of class sets
        let mut pos = 0;
        while pos < tuple.len() {
            tuple[pos] += 1;
            if tuple[pos] < class_counts[pos] {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
        if pos == tuple.len() {
            break;
        }
    }
    let hr = Rat::from_integer(BigInt::from(h));
    let mut tv = Rat::zero();
    let mut chi2 = Rat::zero();
    for (t, nu) in &product_measure {
        let c = Rat::from_integer(BigInt::from(tuple_counts.get(t).copied().unwrap_or(0)));
        tv += (&c / &hr - nu).abs();
        let expected = &hr * nu;
        chi2 += (&c - &expected) * (&c - &expected) / expected;
    }
    tv /= Rat::from_integer(BigInt::from(2));
    JointDistribution {
        disc: d,
        primes: primes.to_vec(),
        h,
        class_counts,
        tuple_counts,
        product_measure,
        tv,
        chi2: chi2.to_f64().unwrap_or(f64::NAN),
        reductions,
    }
}

/// Root multiplicities of H_D over F_{p²}, sorted.
pub fn root_multiplicities(d: Discriminant, p: i64) -> Result<Vec<usize>> {
    let ctx = fp2_construct(p)?;
    let h = hilbert_class_poly(d)?;
    let roots = roots_with_multiplicity(&h.to_ffpoly(&ctx), &ctx)?;
    let mut m: Vec<usize> = roots.iter().map(|(_, k)| *k as usize).collect();
    m.sort_unstable();
    Ok(m)
}

/// Nonzero fiber sizes equal the root multiplicities as multisets.
pub fn same_fiber_multiset(fibers: &[usize], multiplicities: &[usize]) -> bool {
    let mut f: Vec<usize> = fibers.iter().copied().filter(|&n| n > 0).collect();
    f.sort_unstable();
    let mut m = multiplicities.to_vec();
    m.sort_unstable();
    f == m
}

/// Compares the ideal-theoretic reduction at p with the factorization of
/// H_D mod p, without reference to class labels.
pub fn fiber_multiset_crosscheck(d: Discriminant, p: i64) -> Result<bool> {
    let red = reduce_at_prime(d, p)?;
    Ok(same_fiber_multiset(&red.fiber_sizes(), &root_multiplicities(d, p)?))
}
