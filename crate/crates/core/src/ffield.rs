//! Arithmetic in F_p and F_{p²} = F_p[t]/(t² − ν) with ν the least positive
//! quadratic non-residue, and univariate polynomials over F_{p²} with
//! root extraction (distinct-degree gcd with X^{p²} − X, then equal-degree
//! splitting with a seeded PRNG).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numbase::{is_prime_u64, kronecker_i64};

/// Largest characteristic supported; keeps products of residues in a u64.
pub const MAX_CHAR: u64 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fp2 {
    pub x: u64,
    pub y: u64,
}

impl Fp2 {
    pub const ZERO: Fp2 = Fp2 { x: 0, y: 0 };
    pub const ONE: Fp2 = Fp2 { x: 1, y: 0 };

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    pub fn in_prime_field(&self) -> bool {
        self.y == 0
    }
}

impl fmt::Display for Fp2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}*t", self.x, self.y)
    }
}

/// Field context for F_{p²}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp2Ctx {
    p: u64,
    nu: u64,
}

pub fn fp2_construct(p: i64) -> Result<Fp2Ctx> {
    if p < 5 || !is_prime_u64(p as u64) {
        return Err(domain!("F_(p^2) needs an odd prime p >= 5, got {p}"));
    }
    if p as u64 >= MAX_CHAR {
        return Err(domain!("characteristic {p} too large"));
    }
    let nu = (2..p).find(|&n| kronecker_i64(n, p) == Ok(-1)).expect("non-residue exists");
    Ok(Fp2Ctx { p: p as u64, nu: nu as u64 })
}

impl Fp2Ctx {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn nu(&self) -> u64 {
        self.nu
    }

    pub fn elem(&self, x: i64, y: i64) -> Fp2 {
        let p = self.p as i64;
        Fp2 { x: x.rem_euclid(p) as u64, y: y.rem_euclid(p) as u64 }
    }

    pub fn from_int(&self, x: i64) -> Fp2 {
        self.elem(x, 0)
    }

    pub fn parse(&self, s: &str) -> Result<Fp2> {
        let bad = || domain!("not an F_(p^2) element: {s:?}");
        let (x, rest) = s.split_once('+').ok_or_else(bad)?;
        let y = rest.strip_suffix("*t").ok_or_else(bad)?;
        let x: u64 = x.trim().parse().map_err(|_| bad())?;
        let y: u64 = y.trim().parse().map_err(|_| bad())?;
        if x >= self.p || y >= self.p {
            return Err(bad());
        }
        Ok(Fp2 { x, y })
    }

    pub fn add(&self, a: Fp2, b: Fp2) -> Fp2 {
        let p = self.p;
        Fp2 { x: (a.x + b.x) % p, y: (a.y + b.y) % p }
    }

    pub fn sub(&self, a: Fp2, b: Fp2) -> Fp2 {
        let p = self.p;
        Fp2 { x: (a.x + p - b.x) % p, y: (a.y + p - b.y) % p }
    }

    pub fn neg(&self, a: Fp2) -> Fp2 {
        self.sub(Fp2::ZERO, a)
    }

    pub fn mul(&self, a: Fp2, b: Fp2) -> Fp2 {
        let p = self.p;
        let yy = a.y * b.y % p;
        Fp2 {
            x: (a.x * b.x % p + self.nu * yy) % p,
            y: (a.x * b.y % p + a.y * b.x % p) % p,
        }
    }

    pub fn scale(&self, a: Fp2, k: u64) -> Fp2 {
        let k = k % self.p;
        Fp2 { x: a.x * k % self.p, y: a.y * k % self.p }
    }

    pub fn pow(&self, a: Fp2, mut e: u128) -> Fp2 {
        let mut base = a;
        let mut acc = Fp2::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn fp_pow(&self, a: u64, mut e: u64) -> u64 {
        let p = self.p;
        let (mut base, mut acc) = (a % p, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc
    }

    pub fn fp_inv(&self, a: u64) -> u64 {
        self.fp_pow(a, self.p - 2)
    }

    /// Norm to F_p: x² − ν y².
    pub fn norm(&self, a: Fp2) -> u64 {
        let p = self.p;
        (a.x * a.x % p + p - self.nu * (a.y * a.y % p) % p) % p
    }

    pub fn inv(&self, a: Fp2) -> Option<Fp2> {
        if a.is_zero() {
            return None;
        }
        let n_inv = self.fp_inv(self.norm(a));
        let p = self.p;
        Some(Fp2 { x: a.x * n_inv % p, y: (p - a.y) % p * n_inv % p })
    }

    /// x ↦ x^p; with t^p = ν^{(p−1)/2} t = −t this is conjugation.
    pub fn frobenius(&self, a: Fp2) -> Fp2 {
        Fp2 { x: a.x, y: (self.p - a.y) % self.p }
    }

    pub fn order(&self) -> u128 {
        (self.p as u128) * (self.p as u128)
    }

    /// Every element in canonical (x, y) order.
    pub fn elements(&self) -> impl Iterator<Item = Fp2> + '_ {
        (0..self.p).flat_map(move |x| (0..self.p).map(move |y| Fp2 { x, y }))
    }

    pub fn random(&self, rng: &mut impl Rng) -> Fp2 {
        Fp2 { x: rng.gen_range(0..self.p), y: rng.gen_range(0..self.p) }
    }
}

/// Polynomial over F_{p²}, ascending coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FfPoly {
    coeffs: Vec<Fp2>,
}

impl FfPoly {
    pub fn new(mut coeffs: Vec<Fp2>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        FfPoly { coeffs }
    }

    pub fn zero() -> Self {
        FfPoly { coeffs: vec![] }
    }

    pub fn constant(c: Fp2) -> Self {
        FfPoly::new(vec![c])
    }

    pub fn x() -> Self {
        FfPoly::new(vec![Fp2::ZERO, Fp2::ONE])
    }

    /// X − r
    pub fn linear(ctx: &Fp2Ctx, r: Fp2) -> Self {
        FfPoly::new(vec![ctx.neg(r), Fp2::ONE])
    }

    /// From integer coefficients (ascending), reduced mod p.
    pub fn from_ints(ctx: &Fp2Ctx, coeffs: &[i64]) -> Self {
        FfPoly::new(coeffs.iter().map(|&c| ctx.from_int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Fp2] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Fp2 {
        *self.coeffs.last().unwrap_or(&Fp2::ZERO)
    }

    pub fn eval(&self, ctx: &Fp2Ctx, x: Fp2) -> Fp2 {
        self.coeffs.iter().rev().fold(Fp2::ZERO, |acc, &c| ctx.add(ctx.mul(acc, x), c))
    }

    pub fn monic(&self, ctx: &Fp2Ctx) -> Self {
        match ctx.inv(self.leading()) {
            Some(inv) => FfPoly::new(self.coeffs.iter().map(|&c| ctx.mul(c, inv)).collect()),
            None => self.clone(),
        }
    }

    pub fn add(&self, ctx: &Fp2Ctx, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Fp2], i: usize| v.get(i).copied().unwrap_or(Fp2::ZERO);
        FfPoly::new((0..n).map(|i| ctx.add(get(&self.coeffs, i), get(&other.coeffs, i))).collect())
    }

    pub fn sub(&self, ctx: &Fp2Ctx, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Fp2], i: usize| v.get(i).copied().unwrap_or(Fp2::ZERO);
        FfPoly::new((0..n).map(|i| ctx.sub(get(&self.coeffs, i), get(&other.coeffs, i))).collect())
    }

    pub fn mul(&self, ctx: &Fp2Ctx, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return FfPoly::zero();
        }
        let mut out = vec![Fp2::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = ctx.add(out[i + j], ctx.mul(a, b));
            }
        }
        FfPoly::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, ctx: &Fp2Ctx, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead_inv = ctx.inv(divisor.leading()).unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (FfPoly::zero(), self.clone());
        }
        let mut quot = vec![Fp2::ZERO; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = ctx.mul(rem[k + dd], lead_inv);
            quot[k] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = ctx.sub(rem[k + j], ctx.mul(c, dc));
            }
        }
        rem.truncate(dd);
        (FfPoly::new(quot), FfPoly::new(rem))
    }

    pub fn rem(&self, ctx: &Fp2Ctx, divisor: &Self) -> Self {
        self.div_rem(ctx, divisor).1
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, ctx: &Fp2Ctx, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(ctx, &b);
            a = b;
            b = r;
        }
        a.monic(ctx)
    }

    /// self^e mod modulus by square-and-multiply.
    pub fn pow_mod(&self, ctx: &Fp2Ctx, mut e: u128, modulus: &Self) -> Self {
        let mut base = self.rem(ctx, modulus);
        let mut acc = FfPoly::constant(Fp2::ONE).rem(ctx, modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(ctx, &base).rem(ctx, modulus);
            }
            base = base.mul(ctx, &base).rem(ctx, modulus);
            e >>= 1;
        }
        acc
    }

    /// Stable 64-bit FNV-1a digest of the characteristic and coefficients.
    fn digest(&self, p: u64) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |v: u64| {
            for byte in v.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(p);
        for c in &self.coeffs {
            eat(c.x);
            eat(c.y);
        }
        h
    }
}

/// All roots of `f` in F_{p²} with multiplicities, sorted by canonical
/// encoding.
pub fn roots_with_multiplicity(f: &FfPoly, ctx: &Fp2Ctx) -> Result<Vec<(Fp2, u32)>> {
    if f.is_zero() {
        return Err(domain!("the zero polynomial has no finite root multiset"));
    }
    let f = f.monic(ctx);
    if f.degree() == Some(0) {
        return Ok(vec![]);
    }
    let q = ctx.order();
    let xq = FfPoly::x().pow_mod(ctx, q, &f);
    let split_part = f.gcd(ctx, &xq.sub(ctx, &FfPoly::x()));
    let mut rng = ChaCha8Rng::seed_from_u64(f.digest(ctx.p()));
    let mut roots = Vec::new();
    equal_degree_split(&split_part, ctx, &mut rng, &mut roots);
    roots.sort();
    let mut out = Vec::with_capacity(roots.len());
    for r in roots {
        let lin = FfPoly::linear(ctx, r);
        let mut rest = f.clone();
        let mut mult = 0;
        loop {
            let (quot, rem) = rest.div_rem(ctx, &lin);
            if !rem.is_zero() {
                break;
            }
            mult += 1;
            rest = quot;
        }
        out.push((r, mult));
    }
    Ok(out)
}

/// Splits a monic squarefree product of linear factors into its roots.
fn equal_degree_split(g: &FfPoly, ctx: &Fp2Ctx, rng: &mut ChaCha8Rng, out: &mut Vec<Fp2>) {
    match g.degree() {
        None | Some(0) => {}
        Some(1) => out.push(ctx.neg(g.coeffs()[0])),
        Some(deg) => {
            let half = (ctx.order() - 1) / 2;
            loop {
                let delta = ctx.random(rng);
                let shifted = FfPoly::new(vec![delta, Fp2::ONE]);
                let w = shifted.pow_mod(ctx, half, g).sub(ctx, &FfPoly::constant(Fp2::ONE));
                let h = g.gcd(ctx, &w);
                let dh = h.degree().unwrap_or(0);
                if dh > 0 && dh < deg {
                    let (other, _) = g.div_rem(ctx, &h);
                    equal_degree_split(&h, ctx, rng, out);
                    equal_degree_split(&other.monic(ctx), ctx, rng, out);
                    return;
                }
            }
        }
    }
}

pub fn frobenius(x: Fp2, ctx: &Fp2Ctx) -> Fp2 {
    ctx.frobenius(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn minimal_non_residues() {
        // squares mod 13: {1,3,4,9,10,12}; mod 7: {1,2,4}; mod 11: {1,3,4,5,9}
        let squares = |p: u64| (1..p).map(|x| x * x % p).collect::<std::collections::BTreeSet<_>>();
        for (p, nu) in [(13, 2), (7, 3), (11, 2)] {
            let least = (1..p).find(|n| !squares(p).contains(n)).unwrap();
            assert_eq!(least, nu);
            assert_eq!(fp2_construct(p as i64).unwrap().nu(), nu);
        }
        for bad in [2, 3, 4, 9, 1] {
            assert!(fp2_construct(bad).is_err());
        }
    }

    #[test]
    fn element_strings() {
        let ctx = fp2_construct(23).unwrap();
        let e = ctx.elem(3, -1);
        assert_eq!(e.to_string(), "3+22*t");
        assert_eq!(ctx.parse("3+22*t").unwrap(), e);
        assert!(ctx.parse("3+23*t").is_err());
    }

    #[test]
    fn frobenius_examples() {
        let ctx = fp2_construct(13).unwrap();
        for x in 0..13 {
            assert_eq!(frobenius(ctx.from_int(x), &ctx), ctx.from_int(x));
        }
        let t = ctx.elem(0, 1);
        assert_eq!(frobenius(t, &ctx), ctx.neg(t));
        for a in ctx.elements() {
            assert_eq!(frobenius(a, &ctx), ctx.pow(a, 13));
            assert_eq!(frobenius(frobenius(a, &ctx), &ctx), a);
            assert_eq!(frobenius(a, &ctx) == a, a.in_prime_field());
        }
    }

    #[test]
    fn root_examples() {
        let c25 = fp2_construct(5).unwrap();
        let x3 = FfPoly::from_ints(&c25, &[0, 0, 0, 1]);
        assert_eq!(roots_with_multiplicity(&x3, &c25).unwrap(), vec![(Fp2::ZERO, 3)]);

        let c49 = fp2_construct(7).unwrap();
        let lin = |r: i64| FfPoly::linear(&c49, c49.from_int(r));
        let f = lin(1).mul(&c49, &lin(1)).mul(&c49, &lin(3));
        assert_eq!(roots_with_multiplicity(&f, &c49).unwrap(), vec![(c49.from_int(1), 2), (c49.from_int(3), 1)]);

        let c169 = fp2_construct(13).unwrap();
        let f = FfPoly::from_ints(&c169, &[-2, 0, 1]);
        let roots = roots_with_multiplicity(&f, &c169).unwrap();
        assert_eq!(roots.len(), 2);
        let (r, s) = (roots[0].0, roots[1].0);
        assert_eq!(c169.mul(r, r), c169.from_int(2));
        assert_eq!(s, c169.neg(r));
        assert!(!r.in_prime_field());
        assert!(roots_with_multiplicity(&FfPoly::zero(), &c169).is_err());
    }

    #[test]
    fn roots_of_irreducible_cubic_are_absent() {
        // X^3 - 2 over F_7: 2 is not a cube mod 7 and a cubic has no root in F_49 without one in F_7
        let ctx = fp2_construct(7).unwrap();
        let f = FfPoly::from_ints(&ctx, &[-2, 0, 0, 1]);
        assert!(roots_with_multiplicity(&f, &ctx).unwrap().is_empty());
    }

    #[test]
    fn random_products_of_linear_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let p = [5i64, 7, 11, 13, 101][trial % 5];
            let ctx = fp2_construct(p).unwrap();
            let n = rng.gen_range(1..8);
            let mut f = FfPoly::constant(ctx.random(&mut rng));
            if f.is_zero() {
                f = FfPoly::constant(Fp2::ONE);
            }
            let mut expected = std::collections::BTreeMap::new();
            for _ in 0..n {
                let r = ctx.random(&mut rng);
                *expected.entry(r).or_insert(0u32) += 1;
                f = f.mul(&ctx, &FfPoly::linear(&ctx, r));
            }
            let got = roots_with_multiplicity(&f, &ctx).unwrap();
            let total: u32 = got.iter().map(|&(_, m)| m).sum();
            assert_eq!(total as usize, f.degree().unwrap());
            assert_eq!(got, expected.into_iter().collect::<Vec<_>>());
            // deterministic
            assert_eq!(roots_with_multiplicity(&f, &ctx).unwrap(), got);
            // multiplying by an irreducible quadratic over F_{p^2} is impossible, but
            // an irreducible cubic factor drops the total below the degree
        }
    }

    #[test]
    fn partial_splitting_counts_fewer_roots() {
        let ctx = fp2_construct(7).unwrap();
        let cubic = FfPoly::from_ints(&ctx, &[-2, 0, 0, 1]);
        let f = cubic.mul(&ctx, &FfPoly::linear(&ctx, ctx.elem(2, 5)));
        let got = roots_with_multiplicity(&f, &ctx).unwrap();
        assert_eq!(got, vec![(ctx.elem(2, 5), 1)]);
        assert!(got.len() < f.degree().unwrap());
    }

    fn elem_strategy(p: u64) -> impl Strategy<Value = Fp2> {
        (0..p, 0..p).prop_map(|(x, y)| Fp2 { x, y })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn field_axioms(idx in 0usize..4, seed in any::<u64>()) {
            let p = [5u64, 7, 11, 13][idx];
            let ctx = fp2_construct(p as i64).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c) = (ctx.random(&mut rng), ctx.random(&mut rng), ctx.random(&mut rng));
            prop_assert_eq!(ctx.mul(a, ctx.mul(b, c)), ctx.mul(ctx.mul(a, b), c));
            prop_assert_eq!(ctx.mul(a, ctx.add(b, c)), ctx.add(ctx.mul(a, b), ctx.mul(a, c)));
            prop_assert_eq!(ctx.add(a, ctx.add(b, c)), ctx.add(ctx.add(a, b), c));
            prop_assert_eq!(ctx.mul(a, b), ctx.mul(b, a));
            prop_assert_eq!(ctx.add(a, ctx.neg(a)), Fp2::ZERO);
            if let Some(ai) = ctx.inv(a) {
                prop_assert_eq!(ctx.mul(a, ai), Fp2::ONE);
            } else {
                prop_assert!(a.is_zero());
            }
        }

        #[test]
        fn frobenius_is_multiplicative(a in elem_strategy(101), b in elem_strategy(101)) {
            let ctx = fp2_construct(101).unwrap();
            prop_assert_eq!(ctx.frobenius(ctx.mul(a, b)), ctx.mul(ctx.frobenius(a), ctx.frobenius(b)));
        }
    }
}
