//! Exact integer and rational primitives shared by the rest of the crate.
//!
//! `Int` and `Rat` are arbitrary precision. A few hot loops elsewhere use
//! machine words internally, always with results identical to the exact path;
//! the `*_i64` helpers here are those fast paths.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Witnesses making Miller–Rabin deterministic for n < 3.3·10^24.
const MR_WITNESSES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;
/// Default bound for trial-division factorization.
pub const FACTOR_BOUND: u64 = 10_000_000;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: &Int) -> Rat {
    Rat::from_integer(n.clone())
}

/// Extended Kronecker symbol (a|n).
pub fn kronecker(a: &Int, n: &Int) -> Result<i8> {
    if n.is_zero() {
        return Err(domain!("kronecker symbol (a|0) is undefined"));
    }
    let mut result: i8 = 1;
    let mut a = a.clone();
    let mut n = n.clone();
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            result = -result;
        }
    }
    let twos = n.trailing_zeros().unwrap_or(0);
    if twos > 0 {
        if a.is_even() {
            return Ok(0);
        }
        n >>= twos;
        let r8 = a.mod_floor(&Int::from(8)).to_u8().unwrap();
        if twos % 2 == 1 && (r8 == 3 || r8 == 5) {
            result = -result;
        }
    }
    // Jacobi symbol for odd positive n.
    a = a.mod_floor(&n);
    while !a.is_zero() {
        let t = a.trailing_zeros().unwrap_or(0);
        if t > 0 {
            a >>= t;
            let r8 = (&n % 8u32).to_u8().unwrap();
            if t % 2 == 1 && (r8 == 3 || r8 == 5) {
                result = -result;
            }
        }
        if (&a % 4u32).to_u8() == Some(3) && (&n % 4u32).to_u8() == Some(3) {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a = a.mod_floor(&n);
    }
    Ok(if n.is_one() { result } else { 0 })
}

/// Machine-word Kronecker symbol, identical to [`kronecker`].
pub fn kronecker_i64(a: i64, n: i64) -> Result<i8> {
    if n == 0 {
        return Err(domain!("kronecker symbol (a|0) is undefined"));
    }
    let mut result: i8 = 1;
    let mut a = a as i128;
    let mut n = n as i128;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return Ok(0);
        }
        n >>= twos;
        let r8 = a.rem_euclid(8);
        if twos % 2 == 1 && (r8 == 3 || r8 == 5) {
            result = -result;
        }
    }
    a = a.rem_euclid(n);
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        let r8 = n % 8;
        if t % 2 == 1 && (r8 == 3 || r8 == 5) {
            result = -result;
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a = a.rem_euclid(n);
    }
    Ok(if n == 1 { result } else { 0 })
}

fn mod_pow(base: &Int, exp: &Int, m: &Int) -> Int {
    base.modpow(exp, m)
}

/// Primality: trial division below 10^6, fixed-witness Miller–Rabin above.
pub fn is_prime(n: &Int) -> bool {
    if n < &Int::from(2) {
        return false;
    }
    if let Some(small) = n.to_u64() {
        if small < TRIAL_DIVISION_LIMIT {
            return is_prime_u64(small);
        }
    }
    for w in MR_WITNESSES {
        if (n % w).is_zero() {
            return n == &Int::from(w);
        }
    }
    let one = Int::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for w in MR_WITNESSES {
        let mut x = mod_pow(&Int::from(w), &d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < TRIAL_DIVISION_LIMIT {
        if n < 2 {
            return false;
        }
        if n % 2 == 0 {
            return n == 2;
        }
        let mut d = 3;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 2;
        }
        return true;
    }
    is_prime(&Int::from(n))
}

/// Floor of the square root.
pub fn isqrt(n: &Int) -> Result<Int> {
    if n.is_negative() {
        return Err(domain!("isqrt of negative number {n}"));
    }
    Ok(n.sqrt())
}

pub fn isqrt_u64(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Trial-division factorization of |n| with primes below `bound`.
/// Returns (prime, exponent) pairs and the unfactored cofactor (1 if complete).
pub fn factor_trial(n: u64, bound: u64) -> (Vec<(u64, u32)>, u64) {
    let mut n = n;
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n && d < bound {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 && (n < bound.saturating_mul(bound) || is_prime_u64(n)) {
        out.push((n, 1));
        n = 1;
    }
    (out, n)
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Squarefree test for |n| > 0.
pub fn is_squarefree(n: u64) -> bool {
    let (f, rest) = factor_trial(n, FACTOR_BOUND);
    rest == 1 && f.iter().all(|&(_, e)| e == 1)
}

/// Prints a rational as `a/b`, or `a` when the denominator is one.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || domain!("not a rational: {s:?}");
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().map_err(|_| bad())?;
            let d: Int = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// q-adic valuation of a nonzero integer.
pub fn valuation(n: &Int, q: u64) -> u32 {
    let mut n = n.abs();
    let q = Int::from(q);
    let mut v = 0;
    if n.is_zero() {
        return u32::MAX;
    }
    while (&n % &q).is_zero() {
        n /= &q;
        v += 1;
    }
    v
}

pub fn sign_of(n: &Int) -> i8 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn legendre_table(a: i64, p: i64) -> i8 {
        let r = a.rem_euclid(p);
        if r == 0 {
            return 0;
        }
        if (1..p).any(|x| (x * x) % p == r) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_examples() {
        // squares mod 5 are {1, 4}; -23 = 2 mod 5
        assert_eq!(kronecker(&int(-23), &int(5)).unwrap(), -1);
        assert_eq!(kronecker(&int(12345), &int(1)).unwrap(), 1);
        // -23 = 1 mod 8 and odd squares mod 8 are all 1
        assert!((1..8).step_by(2).all(|x| (x * x) % 8 == 1));
        assert_eq!(kronecker(&int(-23), &int(2)).unwrap(), 1);
        assert!(kronecker(&int(3), &int(0)).is_err());
    }

    #[test]
    fn kronecker_matches_residue_tables() {
        for p in (3..=100i64).filter(|&p| is_prime_u64(p as u64)) {
            for a in -150..150 {
                let want = legendre_table(a, p);
                assert_eq!(kronecker(&int(a), &int(p)).unwrap(), want, "({a}|{p})");
                assert_eq!(kronecker_i64(a, p).unwrap(), want);
            }
        }
    }

    #[test]
    fn primality() {
        assert!(is_prime(&int(2)));
        assert!(!is_prime(&int(91)));
        assert!(is_prime(&int(97)));
        assert!(!is_prime(&int(1)));
        // 2^61 - 1 is prime, 2^61 + 1 is divisible by 3
        assert!(is_prime(&((Int::one() << 61) - 1)));
        assert!(!is_prime(&((Int::one() << 61) + 1)));
        // strong pseudoprime to bases 2..=23 but not 29/31/37
        assert!(!is_prime(&"3825123056546413051".parse::<Int>().unwrap()));
        for n in 0..2000u64 {
            let naive = n >= 2 && (2..n).all(|d| n % d != 0);
            assert_eq!(is_prime_u64(n), naive, "{n}");
        }
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&int(0)).unwrap(), int(0));
        assert_eq!(isqrt(&int(24)).unwrap(), int(4));
        let big = Int::from(10u32).pow(40);
        assert_eq!(isqrt(&big).unwrap(), Int::from(10u32).pow(20));
        assert!(isqrt(&int(-1)).is_err());
    }

    #[test]
    fn rationals_print_and_parse() {
        assert_eq!(fmt_rat(&rat(22, 12)), "11/6");
        assert_eq!(fmt_rat(&rat(4, 2)), "2");
        assert_eq!(parse_rat("11/6").unwrap(), rat(11, 6));
        assert_eq!(rat(3, -6), rat(-1, 2));
        assert!(rat(-1, 2).denom().is_positive());
    }

    #[test]
    fn factorization() {
        assert_eq!(factor_trial(84, FACTOR_BOUND).0, vec![(2, 2), (3, 1), (7, 1)]);
        assert!(is_squarefree(23));
        assert!(!is_squarefree(12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn kronecker_multiplicative(a in -10_000i64..10_000, b in -10_000i64..10_000, n in -5000i64..5000) {
            prop_assume!(n != 0);
            let ka = kronecker(&int(a), &int(n)).unwrap();
            let kb = kronecker(&int(b), &int(n)).unwrap();
            let kab = kronecker(&int(a * b), &int(n)).unwrap();
            prop_assert_eq!(ka * kb, kab);
            prop_assert_eq!(kronecker_i64(a, n).unwrap(), ka);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn isqrt_postcondition(bytes in proptest::collection::vec(any::<u8>(), 32)) {
            let n = Int::from_bytes_be(Sign::Plus, &bytes);
            let r = isqrt(&n).unwrap();
            prop_assert!(&r * &r <= n);
            let r1 = &r + 1u32;
            prop_assert!(&r1 * &r1 > n);
        }
    }
}
