use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::enumerate::represents;
use super::lattice::{to_i128, Lattice4};
use super::order::{conj_lattice, elements, lattice_product, norm_gram_i128};
use super::{rat_sqrt, right_order, Embedding, Order, QuatElement};
use crate::error::{domain, internal, Result};
use crate::numbase::{fmt_rat, gcd_i64, is_prime_u64, Rat};
use crate::quadforms::QuadForm;

#[derive(Clone, Debug)]
pub struct LeftIdeal {
    lattice: Lattice4,
    left_order: Arc<Order>,
    reduced_norm: Rat,
}

impl PartialEq for LeftIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice && *self.left_order == *other.left_order
    }
}

impl LeftIdeal {
    pub(crate) fn from_parts(left_order: Arc<Order>, lattice: Lattice4, reduced_norm: Rat) -> Self {
        LeftIdeal { lattice, left_order, reduced_norm }
    }

    /// Validate O·L ⊆ L and compute Nr(L) = sqrt(covol L / covol O).
    pub fn new(order: Arc<Order>, lattice: Lattice4) -> Result<Self> {
        let alg = order.algebra();
        if !lattice.contains_lattice(&lattice_product(alg, order.lattice(), &lattice)) {
            return Err(domain!("lattice is not stable under left multiplication by the order"));
        }
        let ratio = lattice.covolume() / order.lattice().covolume();
        let reduced_norm = rat_sqrt(&ratio).ok_or_else(|| internal!("covolume ratio {ratio} is not a square"))?;
        Ok(LeftIdeal { lattice, left_order: order, reduced_norm })
    }

    /// Σ O·g over the generators.
    pub fn generated_by(order: Arc<Order>, gens: &[QuatElement]) -> Result<Self> {
        let alg = order.algebra();
        let mut v = vec![];
        for g in gens {
            for e in order.basis() {
                v.push(alg.mul(&e, g).0.to_vec());
            }
        }
        let l = Lattice4::from_generators(&v, 4)?;
        LeftIdeal::new(order, l)
    }

    pub fn lattice(&self) -> &Lattice4 {
        &self.lattice
    }

    pub fn left_order(&self) -> &Arc<Order> {
        &self.left_order
    }

    pub fn reduced_norm(&self) -> &Rat {
        &self.reduced_norm
    }

    /// I·x for x ≠ 0.
    pub fn mul_element(&self, x: &QuatElement) -> Result<LeftIdeal> {
        let alg = self.left_order.algebra();
        let gens: Vec<Vec<Rat>> = elements(&self.lattice).iter().map(|e| alg.mul(e, x).0.to_vec()).collect();
        let l = Lattice4::from_generators(&gens, 4)?;
        let n = &self.reduced_norm * alg.nr(x);
        Ok(LeftIdeal::from_parts(self.left_order.clone(), l, n))
    }

    /// I·J where J is a left ideal of the right order of I.
    pub fn mul(&self, j: &LeftIdeal) -> LeftIdeal {
        let alg = self.left_order.algebra();
        let l = lattice_product(alg, &self.lattice, &j.lattice);
        LeftIdeal::from_parts(self.left_order.clone(), l, &self.reduced_norm * &j.reduced_norm)
    }

    /// Ī·J as a bare lattice.
    pub(crate) fn conj_times(&self, j: &LeftIdeal) -> Lattice4 {
        lattice_product(self.left_order.algebra(), &conj_lattice(&self.lattice), &j.lattice)
    }

    pub fn to_json(&self) -> Value {
        json!({ "basis": self.lattice.to_strings(), "norm": fmt_rat(&self.reduced_norm) })
    }
}

/// J = I x for some x ∈ B^×, decided by whether Ī·J has an element of
/// reduced norm Nr(I) Nr(J).
pub fn is_same_class(i: &LeftIdeal, j: &LeftIdeal) -> Result<bool> {
    if !Arc::ptr_eq(&i.left_order, &j.left_order) && *i.left_order != *j.left_order {
        return Err(domain!("ideals have different left orders"));
    }
    let m = i.conj_times(j);
    let den = to_i128(m.den())?;
    let target = &i.reduced_norm * &j.reduced_norm * Rat::from_integer(BigInt::from(den * den));
    if !target.is_integer() {
        return Ok(false);
    }
    let g = norm_gram_i128(i.left_order.algebra(), &m)?;
    represents(&g, to_i128(&target.to_integer())?)
}

/// The left O-ideals of reduced norm ℓ (ℓ a prime not dividing disc B), as
/// O ℓ + O x over x ∈ O/ℓO with ℓ | Nr(x). There are ℓ + 1 of them.
pub fn left_ideals_of_norm(o: &Arc<Order>, l: i64) -> Result<Vec<LeftIdeal>> {
    let alg = o.algebra();
    if !is_prime_u64(l as u64) || alg.discriminant() % l == 0 {
        return Err(domain!("{l} must be a prime coprime to the discriminant"));
    }
    let basis = o.basis();
    let lr = Rat::from_integer(BigInt::from(l));
    let target = l * l;
    let mut out: Vec<LeftIdeal> = vec![];
    for c in Order::residues(l).skip(1) {
        let x = o.element_from_coords(&c.map(|v| Rat::from_integer(BigInt::from(v))));
        let n = alg.nr(&x);
        if !(n.to_integer() % BigInt::from(l)).is_zero() {
            continue;
        }
        let mut gens: Vec<Vec<Rat>> = basis.iter().map(|e| e.scale(&lr).0.to_vec()).collect();
        gens.extend(basis.iter().map(|e| alg.mul(e, &x).0.to_vec()));
        let lat = Lattice4::from_generators(&gens, 4)?;
        if o.lattice().index_of(&lat)? != BigInt::from(target) || out.iter().any(|j| j.lattice == lat) {
            continue;
        }
        out.push(LeftIdeal::from_parts(o.clone(), lat, lr.clone()));
    }
    if out.len() as i64 != l + 1 {
        return Err(internal!("found {} left ideals of norm {l}, expected {}", out.len(), l + 1));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct IdealClassSet {
    order: Arc<Order>,
    /// Class of O first.
    pub representatives: Vec<LeftIdeal>,
    pub right_orders: Vec<Arc<Order>>,
    pub weights: Vec<u32>,
}

impl IdealClassSet {
    pub fn order(&self) -> &Arc<Order> {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn mass(&self) -> Rat {
        self.weights.iter().map(|w| Rat::new(BigInt::one(), BigInt::from(*w))).sum()
    }

    /// Index of the class of a left O-ideal; exactly one class must match.
    pub fn class_of(&self, i: &LeftIdeal) -> Result<usize> {
        let mut found = None;
        for (k, r) in self.representatives.iter().enumerate() {
            if is_same_class(r, i)? {
                if found.is_some() {
                    return Err(internal!("ideal matches two distinct classes"));
                }
                found = Some(k);
            }
        }
        found.ok_or_else(|| internal!("ideal matches no class"))
    }

    /// Same as [`class_of`](Self::class_of) but stops at the first match.
    pub fn class_of_fast(&self, i: &LeftIdeal) -> Result<usize> {
        for (k, r) in self.representatives.iter().enumerate() {
            if is_same_class(r, i)? {
                return Ok(k);
            }
        }
        Err(internal!("ideal matches no class"))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.order.algebra().discriminant(),
            "algebra": [self.order.algebra().a, self.order.algebra().b],
            "order": self.order.lattice().to_strings(),
            "classes": self.representatives.iter().zip(&self.weights).map(|(r, w)| {
                let mut v = r.to_json();
                v["weight"] = json!(w);
                v
            }).collect::<Vec<_>>(),
            "weights": self.weights,
            "mass": fmt_rat(&self.mass()),
        })
    }
}

/// Breadth-first walk over ℓ-neighbours from O until the mass Σ 1/w
/// reaches (p − 1)/12.
pub fn ideal_classes(o: &Arc<Order>) -> Result<IdealClassSet> {
    let alg = o.algebra();
    if !alg.is_definite() || !o.is_maximal() {
        return Err(domain!("class sets are enumerated for maximal orders of definite algebras"));
    }
    let p = alg.discriminant();
    if !is_prime_u64(p as u64) {
        return Err(domain!("expected B_(inf,p), got discriminant {p}"));
    }
    let target = Rat::new(BigInt::from(p - 1), BigInt::from(12));
    let l = (2..).find(|&q| is_prime_u64(q as u64) && q != p).unwrap();
    let w0 = o.unit_weight()?;
    let mut set = IdealClassSet {
        order: o.clone(),
        representatives: vec![o.unit_ideal()],
        right_orders: vec![o.clone()],
        weights: vec![w0],
    };
    let mut mass = Rat::new(BigInt::one(), BigInt::from(w0));
    let mut next = 0;
    while mass < target {
        if next >= set.len() {
            return Err(internal!("neighbour walk exhausted below the mass {target}"));
        }
        let base = set.representatives[next].clone();
        let ro = set.right_orders[next].clone();
        next += 1;
        for j in left_ideals_of_norm(&ro, l)? {
            let cand = base.mul(&j);
            let mut known = false;
            for r in &set.representatives {
                if is_same_class(r, &cand)? {
                    known = true;
                    break;
                }
            }
            if known {
                continue;
            }
            let ro_new = Arc::new(right_order(&cand)?);
            if !ro_new.is_maximal() {
                return Err(internal!("right order of a class representative is not maximal"));
            }
            let w = ro_new.unit_weight()?;
            mass += Rat::new(BigInt::one(), BigInt::from(w));
            set.representatives.push(cand);
            set.right_orders.push(ro_new);
            set.weights.push(w);
            if mass >= target {
                break;
            }
        }
    }
    if mass != target {
        return Err(internal!("class mass {mass} overshoots {target}"));
    }
    Ok(set)
}

/// A form properly equivalent to f whose first coefficient is coprime to n.
fn coprime_representative(f: &QuadForm, n: i64) -> Result<QuadForm> {
    for r in 1..60i64 {
        for x in -r..=r {
            for y in [-(r - x.abs()), r - x.abs()] {
                if gcd_i64(x, y) != 1 {
                    continue;
                }
                let v = f.eval(x, y);
                if gcd_i64(v, n) != 1 {
                    continue;
                }
                // complete (x, y) to a matrix [[x, q], [y, s]] of determinant 1
                let e = x.extended_gcd(&y);
                let (s, q) = (e.x * e.gcd, -e.y * e.gcd);
                let g = f.transform(x, q, y, s);
                debug_assert_eq!(g.a, v);
                return Ok(g);
            }
        }
    }
    Err(internal!("form {f} represents no value coprime to {n} in the search box"))
}

/// O·a + O·ι((−b + √D)/2), after moving f to an equivalent form with a
/// coprime to disc B if necessary.
pub fn left_ideal_from_class(o: &Arc<Order>, iota: &Embedding, f: &QuadForm) -> Result<LeftIdeal> {
    let d = iota.disc();
    if f.discriminant() != d.value() {
        return Err(domain!("form {f} does not have discriminant {d}"));
    }
    let p = o.algebra().discriminant();
    let f = if gcd_i64(f.a, p) == 1 { *f } else { coprime_representative(f, p)? };
    let a = QuatElement::from_ints([f.a, 0, 0, 0]);
    let g = iota.generator(f.b);
    let i = LeftIdeal::generated_by(o.clone(), &[a, g])?;
    if *i.reduced_norm() != Rat::from_integer(BigInt::from(f.a)) {
        return Err(internal!("ideal for {f} has norm {}", i.reduced_norm()));
    }
    Ok(i)
}
