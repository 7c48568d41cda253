//! Definite rational quaternion algebras B_{∞,p}, their maximal orders,
//! left ideals and ideal classes, Gross lattices and optimal embeddings.
//!
//! Elements are written x₀ + x₁i + x₂j + x₃k with i² = a, j² = b, k = ij.

mod checks;
pub mod enumerate;
mod gross;
mod ideal;
pub mod lattice;
mod order;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

pub use checks::{
    hs_norm_of_ad, hs_norm_ratio, killing_check, local_norm_surjectivity, norm_image, norm_image_brute, packet_discriminant,
};
pub use gross::{embedding_vectors, find_optimal_embedding, Embedding, GrossLattice};
pub use ideal::{ideal_classes, is_same_class, left_ideal_from_class, left_ideals_of_norm, IdealClassSet, LeftIdeal};
pub use lattice::{Lattice4, RatLattice};
pub use order::{left_order_of, maximal_order, right_order, unit_weight, Order};

use crate::error::{domain, Error, Result};
use crate::numbase::{is_prime_u64, kronecker_i64, Int, Rat};

/// Largest |a| + |b| tried by [`construct_bp`].
pub const SEARCH_BOUND: i64 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(i64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn split_power(mut n: i64, p: i64) -> (u32, i64) {
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    (e, n)
}

/// Local Hilbert symbol (a, b)_v.
pub fn hilbert_symbol(a: i64, b: i64, place: Place) -> Result<i8> {
    if a == 0 || b == 0 {
        return Err(domain!("Hilbert symbol needs nonzero arguments"));
    }
    match place {
        Place::Infinity => Ok(if a < 0 && b < 0 { -1 } else { 1 }),
        Place::Finite(p) if p == 2 => {
            let (al, u) = split_power(a, 2);
            let (be, v) = split_power(b, 2);
            let eps = |x: i64| (x.rem_euclid(4) == 3) as i64;
            let omega = |x: i64| {
                let r = x.rem_euclid(8);
                (r == 3 || r == 5) as i64
            };
            let e = eps(u) * eps(v) + al as i64 * omega(v) + be as i64 * omega(u);
            Ok(if e % 2 == 0 { 1 } else { -1 })
        }
        Place::Finite(p) if p > 2 && is_prime_u64(p as u64) => {
            let (al, u) = split_power(a, p);
            let (be, v) = split_power(b, p);
            let mut s: i8 = if (al as i64 * be as i64 * ((p - 1) / 2)) % 2 == 0 { 1 } else { -1 };
            if be % 2 == 1 {
                s *= kronecker_i64(u, p)?;
            }
            if al % 2 == 1 {
                s *= kronecker_i64(v, p)?;
            }
            Ok(s)
        }
        Place::Finite(p) => Err(domain!("{p} is not a prime")),
    }
}

fn prime_divisors(n: i64) -> Vec<i64> {
    let mut n = n.abs();
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct QuaternionAlgebra {
    pub a: i64,
    pub b: i64,
    /// Places where (a, b) = −1, sorted, ∞ last.
    pub ramified: Vec<Place>,
}

impl QuaternionAlgebra {
    /// The algebra (a, b | Q) with its ramification certified by Hilbert
    /// symbols at ∞ and every prime dividing 2ab.
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(domain!("quaternion algebra needs a, b nonzero"));
        }
        let mut places: Vec<i64> = prime_divisors(2 * a * b);
        places.sort_unstable();
        let mut ramified = vec![];
        for p in places {
            if hilbert_symbol(a, b, Place::Finite(p))? == -1 {
                ramified.push(Place::Finite(p));
            }
        }
        if hilbert_symbol(a, b, Place::Infinity)? == -1 {
            ramified.push(Place::Infinity);
        }
        if ramified.len() % 2 != 0 {
            return Err(Error::Internal(format!("odd ramification for ({a},{b})")));
        }
        Ok(QuaternionAlgebra { a, b, ramified })
    }

    pub fn is_definite(&self) -> bool {
        self.a < 0 && self.b < 0
    }

    /// Product of the finite ramified primes.
    pub fn discriminant(&self) -> i64 {
        self.ramified
            .iter()
            .map(|p| match p {
                Place::Finite(q) => *q,
                Place::Infinity => 1,
            })
            .product()
    }

    pub fn mul(&self, x: &QuatElement, y: &QuatElement) -> QuatElement {
        let a = Rat::from_integer(BigInt::from(self.a));
        let b = Rat::from_integer(BigInt::from(self.b));
        let ab = &a * &b;
        let [x0, x1, x2, x3] = &x.0;
        let [y0, y1, y2, y3] = &y.0;
        QuatElement([
            x0 * y0 + &a * x1 * y1 + &b * x2 * y2 - &ab * x3 * y3,
            x0 * y1 + x1 * y0 - &b * x2 * y3 + &b * x3 * y2,
            x0 * y2 + x2 * y0 + &a * x1 * y3 - &a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ])
    }

    /// Integer version of [`mul`](Self::mul) on coordinate vectors.
    pub fn mul_int(&self, x: &[Int], y: &[Int]) -> Vec<Int> {
        let a = BigInt::from(self.a);
        let b = BigInt::from(self.b);
        let ab = &a * &b;
        vec![
            &x[0] * &y[0] + &a * &x[1] * &y[1] + &b * &x[2] * &y[2] - &ab * &x[3] * &y[3],
            &x[0] * &y[1] + &x[1] * &y[0] - &b * &x[2] * &y[3] + &b * &x[3] * &y[2],
            &x[0] * &y[2] + &x[2] * &y[0] + &a * &x[1] * &y[3] - &a * &x[3] * &y[1],
            &x[0] * &y[3] + &x[3] * &y[0] + &x[1] * &y[2] - &x[2] * &y[1],
        ]
    }

    pub fn nr(&self, x: &QuatElement) -> Rat {
        let f = self.norm_diagonal();
        x.0.iter().zip(f.iter()).map(|(c, d)| c * c * Rat::from_integer(BigInt::from(*d))).sum()
    }

    /// Nr in the 1,i,j,k frame is Σ f_t x_t² with f = (1, −a, −b, ab).
    pub fn norm_diagonal(&self) -> [i64; 4] {
        [1, -self.a, -self.b, self.a * self.b]
    }

    pub fn inv(&self, x: &QuatElement) -> Result<QuatElement> {
        let n = self.nr(x);
        if n.is_zero() {
            return Err(domain!("element {x} has reduced norm 0"));
        }
        Ok(x.conj().scale(&n.recip()))
    }

    /// Tr(x ȳ).
    pub fn trace_pairing(&self, x: &QuatElement, y: &QuatElement) -> Rat {
        let f = self.norm_diagonal();
        let s: Rat = (0..4).map(|t| &x.0[t] * &y.0[t] * Rat::from_integer(BigInt::from(f[t]))).sum();
        s * Rat::from_integer(BigInt::from(2))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuatElement(pub [Rat; 4]);

impl QuatElement {
    pub fn new(c: [Rat; 4]) -> Self {
        QuatElement(c)
    }

    pub fn from_ints(c: [i64; 4]) -> Self {
        QuatElement(c.map(|v| Rat::from_integer(BigInt::from(v))))
    }

    pub fn from_vec(v: &[Rat]) -> Self {
        QuatElement([v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()])
    }

    pub fn zero() -> Self {
        Self::from_ints([0; 4])
    }

    pub fn one() -> Self {
        Self::from_ints([1, 0, 0, 0])
    }

    pub fn coords(&self) -> &[Rat; 4] {
        &self.0
    }

    pub fn tr(&self) -> Rat {
        &self.0[0] * Rat::from_integer(BigInt::from(2))
    }

    pub fn conj(&self) -> Self {
        let [x0, x1, x2, x3] = &self.0;
        QuatElement([x0.clone(), -x1, -x2, -x3])
    }

    pub fn add(&self, o: &Self) -> Self {
        QuatElement(std::array::from_fn(|t| &self.0[t] + &o.0[t]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        QuatElement(std::array::from_fn(|t| &self.0[t] - &o.0[t]))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        QuatElement(std::array::from_fn(|t| &self.0[t] * c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn is_pure(&self) -> bool {
        self.0[0].is_zero()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(crate::numbase::fmt_rat).collect()
    }
}

impl fmt::Display for QuatElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.to_strings();
        write!(f, "{} + {}i + {}j + {}k", s[0], s[1], s[2], s[3])
    }
}

/// B_{∞,p}: the first negative pair (a, b), ordered by |a| + |b| and then
/// |a|, whose certified ramification is exactly {p, ∞}.
pub fn construct_bp(p: i64) -> Result<QuaternionAlgebra> {
    if p < 5 || !is_prime_u64(p as u64) {
        return Err(domain!("B_(inf,p) is built for primes p >= 5, got {p}"));
    }
    let want = vec![Place::Finite(p), Place::Infinity];
    // p must divide ab, so the bound counts the sum past p
    for s in 2..=p + SEARCH_BOUND {
        for a in 1..s {
            let b = s - a;
            if a % p != 0 && b % p != 0 {
                continue;
            }
            let alg = QuaternionAlgebra::new(-a, -b)?;
            if alg.ramified == want {
                return Ok(alg);
            }
        }
    }
    Err(domain!("no (a, b) with |a| + |b| <= p + {SEARCH_BOUND} ramifies exactly at {{{p}, inf}}"))
}

/// Exact square root of a nonnegative rational, if it is a square.
pub(crate) fn rat_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rat::new(n, d))
}
