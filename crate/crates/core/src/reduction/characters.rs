//! Genus characters on Pic(O_D) and the exceptional fields of a product of
//! level structures.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numbase::{factor_trial, gcd_i64, kronecker_i64, Rat, FACTOR_BOUND};
use crate::quadforms::{field_discriminant, genus_character, genus_decomposition, is_fundamental_discriminant, ClassGroup, Discriminant};
use crate::quatalg::{norm_image, Order};

/// Largest |d| for which characters χ_d are enumerated.
pub const MAX_CONDUCTOR_BOUND: i64 = 10_000;

/// Cap on the number of character tuples inspected.
const MAX_TUPLES: u64 = 10_000_000;

/// (1/h) Σ χ_{d1}([a]) over Pic(O_D); d1 = 1 is the trivial character.
pub fn character_average(d: Discriminant, d1: i64) -> Result<Rat> {
    let cg = ClassGroup::new(d);
    let h = BigInt::from(cg.h());
    if d1 == 1 {
        return Ok(Rat::from_integer(BigInt::from(1)));
    }
    genus_decomposition(d1, d)?;
    let mut sum = 0i64;
    for f in &cg.forms {
        sum += genus_character(f, d1, d)? as i64;
    }
    Ok(Rat::new(BigInt::from(sum), h))
}

/// Image of the reduced norm on the units of O ⊗ Z/q^k, as residues mod q^k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalNormImage {
    pub q: i64,
    pub k: u32,
    pub image: Vec<u64>,
}

impl LocalNormImage {
    fn is_full(&self) -> bool {
        let m = self.q.pow(self.k);
        self.image.len() as i64 == m - m / self.q
    }
}

/// One factor of a level structure, described by the norm images of its
/// local unit groups. Primes not listed have full image Z_q^×.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub local: Vec<LocalNormImage>,
}

impl FactorSpec {
    /// A factor whose unit norms are surjective at every prime.
    pub fn eichler() -> Self {
        FactorSpec::default()
    }

    /// Norm images of an order at the given primes (mod q for odd q, mod 8 at 2).
    pub fn from_order(o: &Order, primes: &[i64]) -> Result<Self> {
        let mut local = vec![];
        for &q in primes {
            let k = if q == 2 { 3 } else { 1 };
            let image = norm_image(o, q, k)?;
            let img = LocalNormImage { q, k, image };
            if !img.is_full() {
                local.push(img);
            }
        }
        Ok(FactorSpec { local })
    }

    /// Whether χ_d is trivial on the norm image of this factor.
    pub fn is_invariant(&self, d: i64) -> bool {
        if d == 1 {
            return true;
        }
        let (factors, _) = factor_trial(d.unsigned_abs(), FACTOR_BOUND);
        factors.iter().all(|&(q, _)| {
            let q = q as i64;
            match self.local.iter().find(|l| l.q == q) {
                None => false,
                Some(l) => local_component_trivial(d, l),
            }
        })
    }
}

/// The q-component of χ_d restricted to Z_q^× is trivial on every lift of
/// the listed residues.
fn local_component_trivial(d: i64, l: &LocalNormImage) -> bool {
    let qk = l.q.pow(l.k);
    let m = if l.q == 2 { qk.max(8) } else { qk.max(l.q) };
    (0..m).filter(|r| gcd_i64(*r, l.q) == 1 && l.image.contains(&((r % qk) as u64))).all(|r| local_component(d, l.q, r) == 1)
}

/// Value of the q-part of χ_d on a unit u ∈ Z_q^×.
fn local_component(d: i64, q: i64, u: i64) -> i8 {
    if q != 2 {
        return kronecker_i64(u, q).expect("odd prime");
    }
    // 2-part of d is −4, 8 or −8 (d fundamental and even)
    let odd = {
        let mut n = d;
        while n % 2 == 0 {
            n /= 2;
        }
        n
    };
    let odd_star = if odd.rem_euclid(4) == 1 { odd } else { -odd };
    let two_part = d / odd_star;
    let u = u.rem_euclid(8);
    let chi4 = if u % 4 == 1 { 1 } else { -1 };
    let chi8 = if u == 1 || u == 7 { 1 } else { -1 };
    match two_part {
        -4 => chi4,
        8 => chi8,
        -8 => chi4 * chi8,
        _ => 1,
    }
}

/// Level structure K_f = ∏ K_{f,i} and the conductor bound for characters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterSpec {
    pub factors: Vec<FactorSpec>,
    pub conductor_bound: i64,
}

impl CharacterSpec {
    /// Every factor a maximal (Eichler) order.
    pub fn eichler(factors: usize, conductor_bound: i64) -> Self {
        CharacterSpec { factors: vec![FactorSpec::eichler(); factors], conductor_bound }
    }
}

/// Fields K_{Πχ} for tuples (χ_i) of K_{f,i}-invariant quadratic characters
/// with nontrivial product, as fundamental discriminants.
pub fn exceptional_fields(spec: &CharacterSpec) -> Result<BTreeSet<i64>> {
    let b = spec.conductor_bound;
    if b < 1 {
        return Err(Error::Config(format!("conductor bound {b} must be positive")));
    }
    if b > MAX_CONDUCTOR_BOUND {
        return Err(Error::Budget(format!("conductor bound {b} exceeds {MAX_CONDUCTOR_BOUND}")));
    }
    let candidates: Vec<i64> = (1..=b).flat_map(|n| [n, -n]).filter(|&d| is_fundamental_discriminant(d)).collect();
    let per_factor: Vec<Vec<i64>> = spec
        .factors
        .iter()
        .map(|f| std::iter::once(1).chain(candidates.iter().copied().filter(|&d| f.is_invariant(d))).collect())
        .collect();
    let total = per_factor.iter().try_fold(1u64, |acc, v| acc.checked_mul(v.len() as u64));
    match total {
        Some(t) if t <= MAX_TUPLES => {}
        _ => return Err(Error::Budget("too many invariant character tuples".into())),
    }
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; per_factor.len()];
    loop {
        // Π χ_{d_i} is the character of Q(√(Π d_i))
        let mut core = 1i64;
        for (v, &i) in per_factor.iter().zip(&idx) {
            core = core_product(core, squarefree_part(v[i]))?;
        }
        if core != 1 {
            out.insert(field_discriminant(core));
        }
        let mut pos = 0;
        while pos < idx.len() {
            idx[pos] += 1;
            if idx[pos] < per_factor[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == idx.len() {
            break;
        }
    }
    Ok(out)
}

/// Squarefree part of a·b for squarefree a, b.
fn core_product(a: i64, b: i64) -> Result<i64> {
    let g = gcd_i64(a, b);
    (a / g).checked_mul(b / g).ok_or_else(|| Error::Budget("character product overflows".into()))
}

fn squarefree_part(d: i64) -> i64 {
    if d % 4 == 0 {
        d / 4
    } else {
        d
    }
}
