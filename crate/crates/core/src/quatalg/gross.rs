use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::enumerate::vectors_of_value;
use super::lattice::{to_i128, Lattice4, RatLattice};
use super::order::norm_gram_i128;
use super::{Order, QuatElement};
use crate::error::{domain, Error, Result};
use crate::numbase::Rat;
use crate::quadforms::Discriminant;

/// O^T = {2x − Tr x : x ∈ O}, a ternary lattice in the i, j, k coordinates.
#[derive(Clone, Debug)]
pub struct GrossLattice {
    lattice: RatLattice,
    gram: Vec<Vec<i128>>,
    scale: i128,
}

impl GrossLattice {
    pub fn new(o: &Order) -> Result<Self> {
        let gens: Vec<Vec<Rat>> = o
            .basis()
            .iter()
            .map(|x| {
                let two = Rat::from_integer(BigInt::from(2));
                vec![&x.0[1] * &two, &x.0[2] * &two, &x.0[3] * &two]
            })
            .collect();
        let lattice = RatLattice::from_generators(&gens, 3)?;
        let gram = norm_gram_i128(o.algebra(), &lattice)?;
        let den = to_i128(lattice.den())?;
        Ok(GrossLattice { lattice, gram, scale: den * den })
    }

    pub fn lattice(&self) -> &RatLattice {
        &self.lattice
    }

    /// Basis as pure quaternions.
    pub fn basis(&self) -> Vec<QuatElement> {
        self.lattice.basis().into_iter().map(|v| QuatElement::new([Rat::zero(), v[0].clone(), v[1].clone(), v[2].clone()])).collect()
    }

    /// Gram G and scale s with Nr(Σ y_t b_t) = y^T G y / s.
    pub fn gram(&self) -> (&[Vec<i128>], i128) {
        (&self.gram, self.scale)
    }

    /// Coordinates of a pure element in the basis, if it lies in the lattice.
    pub fn coordinates(&self, v: &QuatElement) -> Option<Vec<BigInt>> {
        if !v.is_pure() {
            return None;
        }
        let c = self.lattice.coordinates(&v.0[1..]);
        c.iter().all(|t| t.is_integer()).then(|| c.iter().map(|t| t.to_integer()).collect())
    }

    /// v ∈ O^T and not a proper multiple of another element of O^T.
    pub fn is_primitive(&self, v: &QuatElement) -> bool {
        match self.coordinates(v) {
            Some(c) => c.iter().fold(BigInt::zero(), |g, t| g.gcd(t)) == BigInt::from(1),
            None => false,
        }
    }

    /// ½ {x ∈ Z + O^T : Nr x ∈ 4Z}, computed on cosets of 4(Z + O^T).
    pub fn recover_order(&self, o_alg: &super::QuaternionAlgebra) -> Result<Lattice4> {
        let mut gens: Vec<Vec<Rat>> = vec![vec![Rat::from_integer(BigInt::from(1)), Rat::zero(), Rat::zero(), Rat::zero()]];
        for b in self.basis() {
            gens.push(b.0.to_vec());
        }
        let l = Lattice4::from_generators(&gens, 4)?;
        let basis: Vec<QuatElement> = l.basis().iter().map(|v| QuatElement::from_vec(v)).collect();
        let four = Rat::from_integer(BigInt::from(4));
        let mut keep: Vec<Vec<Rat>> = basis.iter().map(|e| e.scale(&four).0.to_vec()).collect();
        for c in Order::residues(4) {
            let mut x = QuatElement::zero();
            for (ct, e) in c.iter().zip(&basis) {
                x = x.add(&e.scale(&Rat::from_integer(BigInt::from(*ct))));
            }
            let n = o_alg.nr(&x);
            if n.is_integer() && (n.to_integer() % BigInt::from(4)).is_zero() {
                keep.push(x.0.to_vec());
            }
        }
        Lattice4::from_generators(&keep, 4)?.scale(&Rat::new(BigInt::from(1), BigInt::from(2)))
    }
}

/// ι: O_D → O determined by ι(√D) = v, with v primitive in O^T and Nr v = |D|.
#[derive(Clone, Debug)]
pub struct Embedding {
    disc: Discriminant,
    v: QuatElement,
    host: Arc<Order>,
}

impl Embedding {
    /// Embedding with ι(√D) = v, checking only Tr v = 0 and Nr v = |D|.
    pub fn from_vector(host: Arc<Order>, disc: Discriminant, v: QuatElement) -> Result<Self> {
        if !v.is_pure() || host.algebra().nr(&v) != Rat::from_integer(BigInt::from(disc.abs())) {
            return Err(domain!("v must be traceless of norm {}", disc.abs()));
        }
        Ok(Embedding { disc, v, host })
    }

    pub fn disc(&self) -> Discriminant {
        self.disc
    }

    pub fn v(&self) -> &QuatElement {
        &self.v
    }

    pub fn host(&self) -> &Arc<Order> {
        &self.host
    }

    /// ι(m + n (D + √D)/2).
    pub fn iota(&self, m: i64, n: i64) -> QuatElement {
        let d = self.disc.value();
        let half = Rat::new(BigInt::from(n), BigInt::from(2));
        QuatElement::from_ints([m, 0, 0, 0]).add(&QuatElement::from_ints([d, 0, 0, 0]).add(&self.v).scale(&half))
    }

    /// ι((−b + √D)/2).
    pub fn generator(&self, b: i64) -> QuatElement {
        QuatElement::from_ints([-b, 0, 0, 0]).add(&self.v).scale(&Rat::new(BigInt::from(1), BigInt::from(2)))
    }
}

/// All primitive v ∈ O^T with Nr v = |D|, normalized so the first nonzero
/// i, j, k coordinate is positive, sorted lexicographically.
pub fn embedding_vectors(o: &Order, d: Discriminant) -> Result<Vec<QuatElement>> {
    let gl = GrossLattice::new(o)?;
    let (g, s) = gl.gram();
    let target = (d.abs() as i128).checked_mul(s).ok_or_else(|| Error::Budget("Gross lattice scale".into()))?;
    let basis = gl.basis();
    let mut out: Vec<QuatElement> = vec![];
    for y in vectors_of_value(g, target)? {
        let gcd = y.iter().fold(0i64, |acc, &t| acc.gcd(&t));
        if gcd != 1 {
            continue;
        }
        let mut v = QuatElement::zero();
        for (c, b) in y.iter().zip(&basis) {
            v = v.add(&b.scale(&Rat::from_integer(BigInt::from(*c))));
        }
        let first = v.0[1..].iter().find(|c| !c.is_zero()).expect("nonzero vector");
        if first.is_negative() {
            continue;
        }
        out.push(v);
    }
    out.sort_by(|x, y| x.0[1..].cmp(&y.0[1..]));
    Ok(out)
}

/// The canonical optimal embedding of O_D into O: the lexicographically
/// smallest normalized primitive Gross-lattice vector of norm |D|.
pub fn find_optimal_embedding(o: &Arc<Order>, d: Discriminant) -> Result<Embedding> {
    if !o.algebra().is_definite() {
        return Err(domain!("embeddings are enumerated in definite algebras only"));
    }
    let v = embedding_vectors(o, d)?.into_iter().next().ok_or(Error::NotRepresented(d.value()))?;
    Ok(Embedding { disc: d, v, host: o.clone() })
}
