//! Imaginary quadratic discriminants and positive definite binary quadratic
//! forms. Reduced forms of discriminant D are the elements of Pic(O_D);
//! composition is Gauss/Dirichlet composition followed by reduction.
//!
//! Form coefficients are machine integers: |D| is capped at [`MAX_ABS_DISC`]
//! and every intermediate of composition is carried in `i128`.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{domain, internal, Error, Result};
use crate::numbase::{factor_trial, gcd_i64, is_prime_u64, isqrt_u64, kronecker_i64, FACTOR_BOUND};

/// Largest |D| accepted anywhere in the crate.
pub const MAX_ABS_DISC: i64 = 1_000_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Discriminant {
    d: i64,
    fundamental_part: i64,
    conductor: i64,
}

impl Discriminant {
    pub fn new(d: i64) -> Result<Self> {
        if d >= 0 {
            return Err(domain!("discriminant must be negative, got {d}"));
        }
        if d < -MAX_ABS_DISC {
            return Err(domain!("|D| = {} exceeds the supported bound {MAX_ABS_DISC}", -d));
        }
        let r = d.rem_euclid(4);
        if r == 2 || r == 3 {
            return Err(domain!("{d} is not a discriminant (must be 0 or 1 mod 4)"));
        }
        let (factors, rest) = factor_trial(d.unsigned_abs(), FACTOR_BOUND);
        if rest != 1 {
            return Err(domain!("could not factor {d} below {FACTOR_BOUND}"));
        }
        let mut conductor: i64 = 1;
        for &(q, e) in &factors {
            if q != 2 {
                conductor *= (q as i64).pow(e / 2);
            }
        }
        let mut fund = d / (conductor * conductor);
        while fund % 16 == 0 || (fund % 4 == 0 && (fund / 4).rem_euclid(4) == 1) {
            fund /= 4;
            conductor *= 2;
        }
        Ok(Discriminant { d, fundamental_part: fund, conductor })
    }

    pub fn value(&self) -> i64 {
        self.d
    }

    pub fn abs(&self) -> i64 {
        -self.d
    }

    pub fn is_fundamental(&self) -> bool {
        self.conductor == 1
    }

    pub fn conductor(&self) -> i64 {
        self.conductor
    }

    pub fn fundamental_part(&self) -> i64 {
        self.fundamental_part
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.d)
    }
}

/// Returns true if `d` (any sign) is a fundamental discriminant; 1 counts as
/// the trivial one.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    let sqfree = |n: i64| {
        let (f, rest) = factor_trial(n.unsigned_abs(), FACTOR_BOUND);
        rest == 1 && f.iter().all(|&(_, e)| e == 1)
    };
    match d.rem_euclid(4) {
        1 => sqfree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && sqfree(m)
        }
        _ => false,
    }
}

/// Fundamental discriminant of the quadratic field Q(√n), n a nonzero
/// integer that is not a perfect square.
pub fn field_discriminant(n: i64) -> i64 {
    let sign = n.signum();
    let (factors, _) = factor_trial(n.unsigned_abs(), FACTOR_BOUND);
    let core: i64 = sign
        * factors
            .iter()
            .filter(|&&(_, e)| e % 2 == 1)
            .map(|&(q, _)| q as i64)
            .product::<i64>();
    if core.rem_euclid(4) == 1 {
        core
    } else {
        4 * core
    }
}

/// A primitive positive definite form a x² + b x y + c y².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        gcd_i64(gcd_i64(self.a, self.b), self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        a > 0 && b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    /// The principal form of discriminant `d`.
    pub fn principal(d: Discriminant) -> Self {
        let d = d.value();
        let b = d.rem_euclid(2);
        QuadForm::new(1, b, (b * b - d) / 4)
    }

    pub fn inverse(&self) -> Self {
        QuadForm::new(self.a, -self.b, self.c).reduced()
    }

    /// The reduced form equivalent to `self` (positive definite input).
    pub fn reduced(&self) -> Self {
        let (mut a, mut b, mut c) = (self.a as i128, self.b as i128, self.c as i128);
        let d = b * b - 4 * a * c;
        debug_assert!(a > 0 && d < 0);
        loop {
            // normalize b into (-a, a]
            let k = (a - b).div_euclid(2 * a);
            b += 2 * k * a;
            c = (b * b - d) / (4 * a);
            if a > c || (a == c && b < 0) {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            break;
        }
        QuadForm::new(a as i64, b as i64, c as i64)
    }

    /// Form obtained by the substitution (x, y) ↦ (p x + q y, r x + s y).
    pub fn transform(&self, p: i64, q: i64, r: i64, s: i64) -> Self {
        let (a, b, c) = (self.a, self.b, self.c);
        QuadForm::new(
            a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s,
        )
    }

    pub fn to_array(&self) -> [i64; 3] {
        [self.a, self.b, self.c]
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// All reduced primitive forms of discriminant `d`, sorted by (a, b).
pub fn reduced_forms(d: Discriminant) -> Vec<QuadForm> {
    let dv = d.value();
    let amax = isqrt_u64((d.abs() / 3) as u64) as i64;
    let mut out = Vec::new();
    for a in 1..=amax {
        let start = if (a - dv).rem_euclid(2) == 0 { -a } else { -a + 1 };
        let mut b = start;
        while b <= a {
            let num = b * b - dv;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                let f = QuadForm::new(a, b, c);
                if f.is_reduced() && f.is_primitive() {
                    out.push(f);
                }
            }
            b += 2;
        }
    }
    out.sort_by_key(|f| (f.a, f.b));
    out
}

pub fn class_number(d: Discriminant) -> usize {
    reduced_forms(d).len()
}

/// Gauss composition of two primitive forms of discriminant `d`, reduced.
pub fn compose(f: &QuadForm, g: &QuadForm, d: Discriminant) -> Result<QuadForm> {
    if f.discriminant() != d.value() || g.discriminant() != d.value() {
        return Err(domain!("forms {f}, {g} do not have discriminant {d}"));
    }
    Ok(compose_unchecked(f, g))
}

/// Dirichlet composition: solve the united-form congruences for the middle
/// coefficient via extended gcds (the CRT step), then reduce.
fn compose_unchecked(f: &QuadForm, g: &QuadForm) -> QuadForm {
    let (mut f1, mut f2) = (*f, *g);
    if f1.a > f2.a {
        std::mem::swap(&mut f1, &mut f2);
    }
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (d, y1) = if a2 % a1 == 0 {
        (a1, 0)
    } else {
        let e = a2.extended_gcd(&a1);
        (e.gcd, e.x)
    };
    let (d1, x2, y2) = if s % d == 0 {
        (d, 0, -1)
    } else {
        let e = s.extended_gcd(&d);
        (e.gcd, e.x, -e.y)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let disc = b1 * b1 - 4 * a1 * (f1.c as i128);
    let c3 = (b3 * b3 - disc) / (4 * a3);
    reduce_wide(a3, b3, c3)
}

fn reduce_wide(a: i128, b: i128, c: i128) -> QuadForm {
    let (mut a, mut b, mut c) = (a, b, c);
    let d = b * b - 4 * a * c;
    loop {
        let k = (a - b).div_euclid(2 * a);
        b += 2 * k * a;
        c = (b * b - d) / (4 * a);
        if a > c || (a == c && b < 0) {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        break;
    }
    QuadForm::new(a as i64, b as i64, c as i64)
}

/// Z-basis (a, (-b + √D)/2) of the proper O_D-ideal attached to `f`. The
/// second generator is returned as (rational part, √D coefficient) with both
/// halves written over the denominator 2: ((-b, 2), (1, 2)).
pub fn form_to_ideal(f: &QuadForm, d: Discriminant) -> Result<(i64, ((i64, i64), (i64, i64)))> {
    if f.discriminant() != d.value() {
        return Err(domain!("form {f} does not have discriminant {d}"));
    }
    Ok((f.a, ((-f.b, 2), (1, 2))))
}

/// A CM point τ = (-b + i√|D|)/(2a) in the standard fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmPoint {
    pub form: QuadForm,
    /// Exact τ as (-b, |D|, 2a): τ = (tau.0 + i·√tau.1) / tau.2.
    pub tau: (i64, i64, i64),
    pub re: f64,
    pub im: f64,
}

impl CmPoint {
    /// |Re τ| ≤ 1/2 and |τ| ≥ 1, decided in exact arithmetic.
    pub fn in_fundamental_domain(&self) -> bool {
        let (num, absd, den) = self.tau;
        // |Re τ| = |num|/den ≤ 1/2;  |τ|² = (num² + |D|)/den² ≥ 1
        2 * num.abs() <= den && num * num + absd >= den * den
    }
}

pub fn cm_point(f: &QuadForm, d: Discriminant) -> Result<CmPoint> {
    if f.discriminant() != d.value() {
        return Err(domain!("form {f} does not have discriminant {d}"));
    }
    if !f.is_reduced() {
        return Err(domain!("form {f} is not reduced"));
    }
    let den = 2 * f.a;
    Ok(CmPoint {
        form: *f,
        tau: (-f.b, d.abs(), den),
        re: -(f.b as f64) / den as f64,
        im: (d.abs() as f64).sqrt() / den as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

pub fn splitting(d: Discriminant, p: i64) -> Result<Splitting> {
    if p < 2 || !is_prime_u64(p as u64) {
        return Err(domain!("{p} is not prime"));
    }
    Ok(match kronecker_i64(d.value(), p)? {
        1 => Splitting::Split,
        -1 => Splitting::Inert,
        _ => Splitting::Ramified,
    })
}

/// Filter describing which discriminants an experiment admits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleFilter {
    pub inert: Vec<i64>,
    pub split: Vec<i64>,
    pub coprime_to: Vec<i64>,
    pub fundamental_only: bool,
}

impl AdmissibleFilter {
    pub fn validate(&self) -> Result<()> {
        for p in self.inert.iter().chain(&self.split) {
            if *p < 2 || !is_prime_u64(*p as u64) {
                return Err(Error::Config(format!("{p} is not prime")));
            }
        }
        if let Some(p) = self.inert.iter().find(|p| self.split.contains(p)) {
            return Err(Error::Config(format!("prime {p} listed as both inert and split")));
        }
        let mut seen = self.inert.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("inert primes must be pairwise distinct".into()));
        }
        Ok(())
    }

    pub fn admits(&self, d: i64) -> Option<Discriminant> {
        let disc = Discriminant::new(d).ok()?;
        if self.fundamental_only && !disc.is_fundamental() {
            return None;
        }
        if self.inert.iter().any(|&p| kronecker_i64(d, p) != Ok(-1)) {
            return None;
        }
        if self.split.iter().any(|&q| kronecker_i64(d, q) != Ok(1)) {
            return None;
        }
        if self.coprime_to.iter().any(|&m| gcd_i64(d, m) != 1) {
            return None;
        }
        // reduction at p needs p coprime to the conductor
        if self.inert.iter().any(|&p| disc.conductor() % p == 0) {
            return None;
        }
        Some(disc)
    }
}

/// Stream of admissible discriminants with |D| in `[lo, hi]`, ascending |D|.
pub struct AdmissibleDiscriminants {
    filter: AdmissibleFilter,
    next_abs: i64,
    hi: i64,
}

impl Iterator for AdmissibleDiscriminants {
    type Item = Discriminant;

    fn next(&mut self) -> Option<Discriminant> {
        while self.next_abs <= self.hi {
            let n = self.next_abs;
            self.next_abs += 1;
            if let Some(d) = self.filter.admits(-n) {
                return Some(d);
            }
        }
        None
    }
}

pub fn admissible_discriminants(filter: AdmissibleFilter, range: (i64, i64)) -> Result<AdmissibleDiscriminants> {
    filter.validate()?;
    let (lo, hi) = range;
    if lo < 0 || hi < lo || hi > MAX_ABS_DISC {
        return Err(Error::Config(format!("invalid |D| range ({lo}, {hi})")));
    }
    Ok(AdmissibleDiscriminants { filter, next_abs: lo.max(3), hi })
}

fn is_discriminant(d: i64) -> bool {
    d != 0 && matches!(d.rem_euclid(4), 0 | 1)
}

/// Checks that D = d1·d2 is a genus decomposition and returns d2.
pub fn genus_decomposition(d1: i64, d: Discriminant) -> Result<i64> {
    if !is_discriminant(d1) || d.value() % d1 != 0 || !is_discriminant(d.value() / d1) {
        return Err(domain!("{d1} does not give a genus decomposition of {d}"));
    }
    Ok(d.value() / d1)
}

/// Genus character χ_{d1} evaluated on the class of `f`.
pub fn genus_character(f: &QuadForm, d1: i64, d: Discriminant) -> Result<i8> {
    genus_decomposition(d1, d)?;
    let modulus = 2 * d.value();
    let mut best: Option<i64> = None;
    for x in -50i64..=50 {
        for y in -50i64..=50 {
            if gcd_i64(x, y) != 1 {
                continue;
            }
            let m = f.eval(x, y);
            if m > 0 && gcd_i64(m, modulus) == 1 && best.is_none_or(|b| m < b) {
                best = Some(m);
            }
        }
    }
    let m = best.ok_or_else(|| internal!("{f} represents no value coprime to 2D in the scan box"))?;
    kronecker_i64(d1, m)
}

/// Pic(O_D) as the canonical list of reduced forms, principal form first.
#[derive(Clone, Debug)]
pub struct ClassGroup {
    pub disc: Discriminant,
    pub forms: Vec<QuadForm>,
    index: HashMap<QuadForm, usize>,
}

impl ClassGroup {
    pub fn new(disc: Discriminant) -> Self {
        let forms = reduced_forms(disc);
        let index = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        ClassGroup { disc, forms, index }
    }

    pub fn h(&self) -> usize {
        self.forms.len()
    }

    pub fn index_of(&self, f: &QuadForm) -> Option<usize> {
        self.index.get(&f.reduced()).copied()
    }

    pub fn compose_idx(&self, i: usize, j: usize) -> usize {
        let g = compose_unchecked(&self.forms[i], &self.forms[j]);
        self.index[&g]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "D": self.disc.value().to_string(),
            "h": self.h(),
            "forms": self.forms.iter().map(|f| f.to_array()).collect::<Vec<_>>(),
        })
    }
}
