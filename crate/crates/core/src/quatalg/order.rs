use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::enumerate::vectors_of_value;
use super::lattice::{to_i128, Lattice4};
use super::{rat_sqrt, LeftIdeal, QuatElement, QuaternionAlgebra};
use crate::error::{domain, internal, Result};
use crate::numbase::{Int, Rat};

/// Integer Gram matrix G of the reduced norm on a lattice with rows R / den:
/// Nr(Σ x_t e_t) = x^T G x / den².
pub(crate) fn norm_gram_int(alg: &QuaternionAlgebra, l: &Lattice4) -> Vec<Vec<Int>> {
    let f = alg.norm_diagonal().map(BigInt::from);
    let r = l.int_rows();
    let n = r.len();
    let cols = r[0].len();
    let mut g = vec![vec![Int::zero(); n]; n];
    // pure lattices (Gross) use the i, j, k part of the diagonal
    let off = 4 - cols;
    for s in 0..n {
        for t in s..n {
            let v: Int = (0..cols).map(|c| &r[s][c] * &r[t][c] * &f[c + off]).sum();
            g[s][t] = v.clone();
            g[t][s] = v;
        }
    }
    g
}

pub(crate) fn norm_gram_i128(alg: &QuaternionAlgebra, l: &Lattice4) -> Result<Vec<Vec<i128>>> {
    norm_gram_int(alg, l).iter().map(|r| r.iter().map(to_i128).collect::<Result<Vec<_>>>()).collect()
}

fn det_rat(mut m: Vec<Vec<Rat>>) -> Rat {
    let n = m.len();
    let mut det = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            let f = &m[r][c] / &m[c][c];
            for k in c..n {
                let t = &f * &m[c][k];
                m[r][k] -= t;
            }
        }
    }
    det
}

/// Gram matrix of the trace pairing Tr(e_s ē_t) on a basis.
pub fn trace_gram(alg: &QuaternionAlgebra, basis: &[QuatElement]) -> Vec<Vec<Rat>> {
    basis.iter().map(|x| basis.iter().map(|y| alg.trace_pairing(x, y)).collect()).collect()
}

/// sqrt |det Tr(e_s ē_t)|.
pub fn reduced_discriminant_of(alg: &QuaternionAlgebra, basis: &[QuatElement]) -> Result<Rat> {
    let d = det_rat(trace_gram(alg, basis)).abs();
    rat_sqrt(&d).ok_or_else(|| internal!("trace-form determinant {d} is not a square"))
}

pub(crate) fn elements(l: &Lattice4) -> Vec<QuatElement> {
    l.basis().iter().map(|v| QuatElement::from_vec(v)).collect()
}

/// Lattice spanned by all products x·y, x ∈ l1, y ∈ l2.
pub(crate) fn lattice_product(alg: &QuaternionAlgebra, l1: &Lattice4, l2: &Lattice4) -> Lattice4 {
    let mut rows = Vec::with_capacity(16);
    for x in l1.int_rows() {
        for y in l2.int_rows() {
            rows.push(alg.mul_int(x, y));
        }
    }
    Lattice4::from_int_rows(rows, l1.den() * l2.den(), 4).expect("product of full-rank lattices in a division algebra")
}

pub(crate) fn conj_lattice(l: &Lattice4) -> Lattice4 {
    let rows = l.int_rows().iter().map(|r| vec![r[0].clone(), -&r[1], -&r[2], -&r[3]]).collect();
    Lattice4::from_int_rows(rows, l.den().clone(), 4).unwrap()
}

fn is_integral(alg: &QuaternionAlgebra, l: &Lattice4) -> bool {
    let b = elements(l);
    b.iter().all(|x| x.tr().is_integer() && alg.nr(x).is_integer())
        && b.iter().enumerate().all(|(s, x)| b[s + 1..].iter().all(|y| alg.trace_pairing(x, y).is_integer()))
}

#[derive(Clone, Debug)]
pub struct Order {
    alg: QuaternionAlgebra,
    lattice: Lattice4,
    reduced_discriminant: Int,
    unit_weight: OnceLock<u32>,
}

impl PartialEq for Order {
    fn eq(&self, other: &Self) -> bool {
        self.alg == other.alg && self.lattice == other.lattice
    }
}

impl Eq for Order {}

impl Order {
    /// Validate that `lattice` is an order: contains 1, is closed under
    /// multiplication and has integral reduced traces and norms.
    pub fn new(alg: QuaternionAlgebra, lattice: Lattice4) -> Result<Self> {
        if !lattice.contains(QuatElement::one().coords()) {
            return Err(domain!("lattice does not contain 1"));
        }
        if !lattice.contains_lattice(&lattice_product(&alg, &lattice, &lattice)) {
            return Err(domain!("lattice is not closed under multiplication"));
        }
        if !is_integral(&alg, &lattice) {
            return Err(domain!("lattice has non-integral elements"));
        }
        let rd = reduced_discriminant_of(&alg, &elements(&lattice))?;
        if !rd.is_integer() {
            return Err(internal!("order with non-integral reduced discriminant"));
        }
        Ok(Order { alg, lattice, reduced_discriminant: rd.to_integer(), unit_weight: OnceLock::new() })
    }

    /// Z⟨1, i, j, k⟩.
    pub fn standard(alg: &QuaternionAlgebra) -> Result<Self> {
        let gens: Vec<Vec<Rat>> = (0..4).map(|t| QuatElement::from_ints(std::array::from_fn(|s| (s == t) as i64)).0.to_vec()).collect();
        Order::new(alg.clone(), Lattice4::from_generators(&gens, 4)?)
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        &self.alg
    }

    pub fn lattice(&self) -> &Lattice4 {
        &self.lattice
    }

    pub fn reduced_discriminant(&self) -> &Int {
        &self.reduced_discriminant
    }

    pub fn basis(&self) -> Vec<QuatElement> {
        elements(&self.lattice)
    }

    pub fn contains(&self, x: &QuatElement) -> bool {
        self.lattice.contains(x.coords())
    }

    pub fn is_maximal(&self) -> bool {
        self.reduced_discriminant == BigInt::from(self.alg.discriminant())
    }

    /// Norm Gram G in the order basis and scale s: Nr(x) = x^T G x / s.
    pub fn norm_gram(&self) -> Result<(Vec<Vec<i128>>, i128)> {
        let den = to_i128(self.lattice.den())?;
        Ok((norm_gram_i128(&self.alg, &self.lattice)?, den * den))
    }

    /// The order as a left ideal of itself.
    pub fn unit_ideal(&self) -> LeftIdeal {
        LeftIdeal::from_parts(std::sync::Arc::new(self.clone()), self.lattice.clone(), Rat::one())
    }

    pub fn unit_weight(&self) -> Result<u32> {
        if let Some(w) = self.unit_weight.get() {
            return Ok(*w);
        }
        let w = unit_weight(self)?;
        let _ = self.unit_weight.set(w);
        Ok(w)
    }

    /// Enumerate x ∈ O/qO as coordinate vectors in [0, q)^4.
    pub(crate) fn residues(q: i64) -> impl Iterator<Item = [i64; 4]> {
        (0..q.pow(4)).map(move |mut n| {
            std::array::from_fn(|_| {
                let d = n % q;
                n /= q;
                d
            })
        })
    }

    pub(crate) fn element_from_coords(&self, c: &[Rat]) -> QuatElement {
        let b = self.basis();
        let mut x = QuatElement::zero();
        for (ct, e) in c.iter().zip(&b) {
            x = x.add(&e.scale(ct));
        }
        x
    }
}

/// Smallest ring containing `l`, or None once an element stops being integral.
fn ring_closure(alg: &QuaternionAlgebra, l: Lattice4) -> Option<Lattice4> {
    let mut cur = l;
    loop {
        if !is_integral(alg, &cur) {
            return None;
        }
        let next = cur.sum(&lattice_product(alg, &cur, &cur));
        if next == cur {
            return Some(cur);
        }
        cur = next;
    }
}

/// Enlarge Z⟨1,i,j,k⟩ by integral elements of (1/q)O \ O until the reduced
/// discriminant equals the discriminant of the algebra.
pub fn maximal_order(alg: &QuaternionAlgebra) -> Result<Order> {
    let target = BigInt::from(alg.discriminant());
    let mut o = Order::standard(alg)?;
    'outer: while o.reduced_discriminant != target {
        let rd = o.reduced_discriminant.clone();
        let excess = &rd / &target;
        if !(&excess * &target == rd) {
            return Err(internal!("reduced discriminant {rd} is not a multiple of {target}"));
        }
        let q = smallest_prime_factor(&excess);
        let basis = o.basis();
        let qr = Rat::from_integer(BigInt::from(q));
        for c in Order::residues(q).skip(1) {
            let mut x = QuatElement::zero();
            for (ct, e) in c.iter().zip(&basis) {
                x = x.add(&e.scale(&Rat::from_integer(BigInt::from(*ct))));
            }
            let x = x.scale(&qr.recip());
            if !x.tr().is_integer() || !alg.nr(&x).is_integer() {
                continue;
            }
            let mut gens = o.lattice.basis();
            gens.push(x.0.to_vec());
            let gens = Lattice4::from_generators(&gens, 4)?;
            if let Some(l) = ring_closure(alg, gens) {
                o = Order::new(alg.clone(), l)?;
                continue 'outer;
            }
        }
        return Err(internal!("saturation stuck at reduced discriminant {rd} (prime {q})"));
    }
    if !alg.is_definite() || o.unit_weight().is_ok() {
        Ok(o)
    } else {
        Err(internal!("maximal order failed its unit count"))
    }
}

fn smallest_prime_factor(n: &Int) -> i64 {
    let n: i64 = n.try_into().expect("reduced discriminants fit in i64");
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 1;
    }
    n
}

/// {x : I x ⊆ I} = ∩ e⁻¹ I over a basis e of I.
pub fn right_order(i: &LeftIdeal) -> Result<Order> {
    let alg = i.left_order().algebra();
    let mut acc: Option<Lattice4> = None;
    let l = i.lattice();
    for e in elements(l) {
        let inv = alg.inv(&e)?;
        let gens: Vec<Vec<Rat>> = elements(l).iter().map(|y| alg.mul(&inv, y).0.to_vec()).collect();
        let part = Lattice4::from_generators(&gens, 4)?;
        acc = Some(match acc {
            None => part,
            Some(a) => a.intersect(&part),
        });
    }
    Order::new(alg.clone(), acc.expect("rank 4"))
}

/// {x : x I ⊆ I}.
pub fn left_order_of(alg: &QuaternionAlgebra, l: &Lattice4) -> Result<Order> {
    let mut acc: Option<Lattice4> = None;
    for e in elements(l) {
        let inv = alg.inv(&e)?;
        let gens: Vec<Vec<Rat>> = elements(l).iter().map(|y| alg.mul(y, &inv).0.to_vec()).collect();
        let part = Lattice4::from_generators(&gens, 4)?;
        acc = Some(match acc {
            None => part,
            Some(a) => a.intersect(&part),
        });
    }
    Order::new(alg.clone(), acc.expect("rank 4"))
}

/// Half the number of elements of reduced norm 1.
pub fn unit_weight(o: &Order) -> Result<u32> {
    if !o.alg.is_definite() {
        return Err(domain!("unit weights are finite only in definite algebras"));
    }
    let (g, den2) = o.norm_gram()?;
    let n = vectors_of_value(&g, den2)?.len();
    if n == 0 || n % 2 != 0 {
        return Err(internal!("found {n} units"));
    }
    Ok((n / 2) as u32)
}
