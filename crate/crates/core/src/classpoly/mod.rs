//! The modular j-function at CM points and the Hilbert class polynomial
//! H_D = ∏ (X − j(τ_f)) over reduced forms f of discriminant D.

mod bigfloat;
mod cache;

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

pub use bigfloat::{BigFloatComplex, Fixed};
pub use cache::ClassPolyCache;

use crate::error::{domain, internal, Error, Result};
use crate::ffield::{FfPoly, Fp2Ctx};
use crate::numbase::{is_prime, Int};
use crate::quadforms::{cm_point, reduced_forms, CmPoint, Discriminant};

/// Largest |D| for which H_D is computed.
pub const MAX_CLASSPOLY_DISC: i64 = 1_000_000;

/// Lowest precision accepted by [`j_eval`].
pub const MIN_PRECISION: u32 = 64;

/// Bumped whenever the algorithm could change cached output.
pub const ALGORITHM_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassPolynomial {
    pub disc: Discriminant,
    /// Ascending; the last entry is 1.
    pub coeffs: Vec<Int>,
}

impl ClassPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn to_json(&self) -> Value {
        json!({
            "D": self.disc.value().to_string(),
            "h": self.degree(),
            "coeffs": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }

    /// Parse and validate the cache format.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || domain!("malformed class polynomial JSON");
        let d: i64 = v["D"].as_str().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let disc = Discriminant::new(d)?;
        let h = v["h"].as_u64().ok_or_else(bad)? as usize;
        let coeffs = v["coeffs"]
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|c| c.as_str().and_then(|s| s.parse::<BigInt>().ok()).ok_or_else(bad))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != h + 1 || !coeffs[h].is_one() {
            return Err(bad());
        }
        Ok(ClassPolynomial { disc, coeffs })
    }

    pub fn eval(&self, x: &Int) -> Int {
        self.coeffs.iter().rev().fold(Int::zero(), |acc, c| acc * x + c)
    }

    /// Coefficients reduced into [0, p), ascending.
    pub fn mod_p(&self, p: u64) -> Vec<u64> {
        let m = BigInt::from(p);
        self.coeffs.iter().map(|c| c.mod_floor(&m).to_u64().unwrap()).collect()
    }

    pub fn to_ffpoly(&self, ctx: &Fp2Ctx) -> FfPoly {
        let c: Vec<_> = self.mod_p(ctx.p()).into_iter().map(|v| ctx.from_int(v as i64)).collect();
        FfPoly::new(c)
    }
}

/// Integer q-expansion coefficients of E₄ and of Δ/q = (E₄³ − E₆²)/(1728 q).
struct Series {
    e4: Vec<BigInt>,
    delta: Vec<BigInt>,
}

fn divisor_power_sum(n: u64, k: u32) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
            if d * d != n {
                s += BigInt::from(n / d).pow(k);
            }
        }
        d += 1;
    }
    s
}

fn truncated_mul(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

impl Series {
    fn build(n: usize) -> Series {
        let len = n + 2;
        let mut e4 = vec![BigInt::one()];
        let mut e6 = vec![BigInt::one()];
        for k in 1..len as u64 {
            e4.push(divisor_power_sum(k, 3) * 240);
            e6.push(divisor_power_sum(k, 5) * -504);
        }
        let e4sq = truncated_mul(&e4, &e4, len);
        let e4cube = truncated_mul(&e4sq, &e4, len);
        let e6sq = truncated_mul(&e6, &e6, len);
        let big = BigInt::from(1728);
        let delta: Vec<BigInt> = (1..len).map(|k| (&e4cube[k] - &e6sq[k]) / &big).collect();
        e4.truncate(n + 1);
        Series { e4, delta: delta[..n + 1].to_vec() }
    }
}

fn series(n: usize) -> std::sync::Arc<Series> {
    static CACHE: OnceLock<Mutex<std::sync::Arc<Series>>> = OnceLock::new();
    let cell = CACHE.get_or_init(|| Mutex::new(std::sync::Arc::new(Series::build(64))));
    let mut guard = cell.lock().unwrap();
    if guard.e4.len() <= n {
        *guard = std::sync::Arc::new(Series::build((n + 1).next_power_of_two()));
    }
    guard.clone()
}

fn horner(coeffs: &[BigInt], q: &BigFloatComplex) -> BigFloatComplex {
    let bits = q.precision();
    let mut acc = BigFloatComplex::zero(bits);
    for c in coeffs.iter().rev() {
        acc = acc.mul(q).add(&BigFloatComplex::new(Fixed::from_int(c, bits), Fixed::zero(bits)));
    }
    acc
}

/// Truncation length: |q|^N · (coefficient size) < 2^(−bits−16).
fn truncation(log2_inv_q: f64, bits: u32) -> usize {
    let target = bits as f64 + 16.0;
    let mut n = 1usize;
    // Δ/q coefficients are bounded by about n^6, E₄'s by 240 n^4.
    while n as f64 * log2_inv_q < target + 6.0 * (n as f64).log2() + 8.0 {
        n += 1;
    }
    n
}

/// j(τ) at a reduced CM point, as E₄³ / (q · Δ/q).
pub fn j_eval(tau: &CmPoint, precision_bits: u32) -> Result<BigFloatComplex> {
    if precision_bits < MIN_PRECISION {
        return Err(domain!("precision {precision_bits} below {MIN_PRECISION} bits"));
    }
    if tau.im < 3f64.sqrt() / 2.0 - 1e-9 {
        return Err(domain!("Im(tau) = {} is below the fundamental domain", tau.im));
    }
    let (num, absd, den) = tau.tau;
    let two_pi_im_f = 2.0 * std::f64::consts::PI * tau.im;
    let log2_inv_q = two_pi_im_f / std::f64::consts::LN_2;
    let n = truncation(log2_inv_q, precision_bits);
    let guard = 32 + (n as f64).log2().ceil() as u32 * 2;
    let w = precision_bits + guard;

    let pi = Fixed::pi(w + 8);
    let two_pi = pi.mul_int(&BigInt::from(2));
    let two_pi_im = two_pi.mul(&Fixed::sqrt_int(absd as u64, w + 8)).div_int(&BigInt::from(den)).with_bits(w);
    let theta = two_pi.mul_int(&BigInt::from(num)).div_int(&BigInt::from(den)).with_bits(w);
    let (cos, sin) = theta.cos_sin(w);
    let r = two_pi_im.exp(w);
    let one = Fixed::from_i64(1, w);
    let r_inv = one.div(&r);
    let q = BigFloatComplex::new(r_inv.mul(&cos), r_inv.mul(&sin));
    let q_inv = BigFloatComplex::new(r.mul(&cos), r.mul(&sin).neg());

    let s = series(n);
    let e4 = horner(&s.e4[..=n], &q);
    let delta = horner(&s.delta[..=n], &q);
    let e4cube = e4.mul(&e4).mul(&e4);
    let j = e4cube.mul(&q_inv).div(&delta);
    Ok(j.with_bits(precision_bits))
}

/// Starting precision: 32 + ⌈π√|D| Σ 1/a / ln 2⌉ + 8h.
pub fn initial_precision(d: Discriminant) -> u32 {
    let forms = reduced_forms(d);
    let sum: f64 = forms.iter().map(|f| 1.0 / f.a as f64).sum();
    let height = std::f64::consts::PI * (d.abs() as f64).sqrt() * sum / std::f64::consts::LN_2;
    32 + height.ceil() as u32 + 8 * forms.len() as u32
}

fn product_poly(roots: &[BigFloatComplex], bits: u32) -> Vec<BigFloatComplex> {
    let mut poly = vec![BigFloatComplex::from_i64(1, bits)];
    for r in roots {
        let mut next = vec![BigFloatComplex::zero(bits); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k + 1] = next[k + 1].add(c);
            next[k] = next[k].sub(&c.mul(r));
        }
        poly = next;
    }
    poly
}

/// Round complex coefficients, failing if any is farther than 1/4 from an
/// integer. Returns the rounded coefficients and the worst gap.
fn round_coeffs(poly: &[BigFloatComplex]) -> (Option<Vec<Int>>, f64) {
    let mut worst = 0f64;
    let mut ok = true;
    let mut out = Vec::with_capacity(poly.len());
    for c in poly {
        let (n, gap) = c.re.round();
        let g = gap.to_f64().max(c.im.to_f64().abs());
        worst = worst.max(g);
        if !gap.le_pow2_neg(2) || !c.im.le_pow2_neg(2) {
            ok = false;
        }
        out.push(n);
    }
    (ok.then_some(out), worst)
}

/// H_D at a given starting precision, doubling at most twice.
pub fn hilbert_class_poly_at(d: Discriminant, start_bits: u32) -> Result<ClassPolynomial> {
    if d.abs() > MAX_CLASSPOLY_DISC {
        return Err(Error::Budget(format!("|D| = {} exceeds {MAX_CLASSPOLY_DISC}", d.abs())));
    }
    let forms = reduced_forms(d);
    let points: Vec<CmPoint> = forms.iter().map(|f| cm_point(f, d)).collect::<Result<_>>()?;
    let mut bits = start_bits.max(MIN_PRECISION);
    let mut worst = 0.0;
    for _ in 0..3 {
        let roots: Vec<BigFloatComplex> = points.par_iter().map(|t| j_eval(t, bits)).collect::<Result<_>>()?;
        let poly = product_poly(&roots, bits);
        let (rounded, gap) = round_coeffs(&poly);
        worst = gap;
        if let Some(coeffs) = rounded {
            if !coeffs.last().is_some_and(|c| c.is_one()) || coeffs.len() != forms.len() + 1 {
                return Err(internal!("class polynomial for {d} is not monic of degree h"));
            }
            return Ok(ClassPolynomial { disc: d, coeffs });
        }
        bits *= 2;
    }
    Err(Error::Precision(format!("H_{d}: rounding gap {worst:.3} > 0.25 at {} bits", bits / 2)))
}

pub fn hilbert_class_poly(d: Discriminant) -> Result<ClassPolynomial> {
    hilbert_class_poly_at(d, initial_precision(d))
}

/// Coefficientwise reduction mod a prime p, ascending.
pub fn classpoly_mod(h: &ClassPolynomial, p: i64) -> Result<Vec<u64>> {
    if p < 2 || !is_prime(&BigInt::from(p)) {
        return Err(domain!("{p} is not prime"));
    }
    Ok(h.mod_p(p as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::fp2_construct;
    use crate::quadforms::QuadForm;

    fn point(a: i64, b: i64, c: i64) -> CmPoint {
        let f = QuadForm::new(a, b, c);
        cm_point(&f, Discriminant::new(f.discriminant()).unwrap()).unwrap()
    }

    fn ints(v: &[&str]) -> Vec<Int> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn classical_values() {
        for (f, want) in [((1, 0, 1), 1728i64), ((1, 1, 1), 0), ((1, 0, 4), 287496)] {
            let j = j_eval(&point(f.0, f.1, f.2), 128).unwrap();
            let target = BigFloatComplex::from_i64(want, 128);
            let err = j.sub(&target);
            let tol = 2f64.powi(8 - 128) * (want as f64).max(1.0);
            assert!(err.abs_f64() <= tol, "{f:?}: {:?}", j.to_f64());
        }
    }

    #[test]
    fn two_i_agreement_across_precisions() {
        let lo = j_eval(&point(1, 0, 4), 128).unwrap();
        let hi = j_eval(&point(1, 0, 4), 512).unwrap().with_bits(128);
        let diff = lo.sub(&hi);
        assert!(diff.re.le_pow2_neg(100) && diff.im.le_pow2_neg(100));
    }

    #[test]
    fn rejects_bad_input() {
        let mut p = point(1, 0, 1);
        assert!(matches!(j_eval(&p, 32), Err(Error::Domain(_))));
        p.im = 0.5;
        assert!(matches!(j_eval(&p, 128), Err(Error::Domain(_))));
    }

    /// Independent double-precision evaluation of j via the eta product
    /// j = (1 + 240 Σ σ₃(n) qⁿ)³ / (q ∏ (1 − qⁿ)²⁴).
    fn j_eta(re: f64, im: f64) -> (f64, f64) {
        use num_complex::Complex64;
        let q = Complex64::from_polar((-2.0 * std::f64::consts::PI * im).exp(), 2.0 * std::f64::consts::PI * re);
        let mut e4 = Complex64::new(1.0, 0.0);
        let mut prod = Complex64::new(1.0, 0.0);
        let mut qn = Complex64::new(1.0, 0.0);
        for n in 1..60u64 {
            qn *= q;
            e4 += qn * 240.0 * divisor_power_sum(n, 3).to_f64().unwrap();
            prod *= (Complex64::new(1.0, 0.0) - qn).powi(24);
        }
        let j = e4 * e4 * e4 / (q * prod);
        (j.re, j.im)
    }

    #[test]
    fn eta_product_oracle() {
        for d in [-23i64, -31, -47, -56, -71, -95, -119] {
            let disc = Discriminant::new(d).unwrap();
            for f in reduced_forms(disc) {
                let t = cm_point(&f, disc).unwrap();
                let (r, i) = j_eval(&t, 128).unwrap().to_f64();
                let (er, ei) = j_eta(t.re, t.im);
                let scale = r.hypot(i).max(1.0);
                assert!((r - er).abs() / scale < 1e-9 && (i - ei).abs() / scale < 1e-9, "{d} {f}");
            }
        }
    }

    #[test]
    fn frozen_class_polynomials() {
        // values from an independent eta-product evaluation at 80 digits
        let cases: &[(i64, &[&str])] = &[
            (-3, &["0", "1"]),
            (-4, &["-1728", "1"]),
            (-7, &["3375", "1"]),
            (-8, &["-8000", "1"]),
            (-15, &["-121287375", "191025", "1"]),
            (-20, &["-681472000", "-1264000", "1"]),
            (-23, &["12771880859375", "-5151296875", "3491750", "1"]),
            (-47, &["16042929600623870849609375", "-14982472850828613281250", "5115161850595703125", "-9987963828125", "2257834125", "1"]),
            (-71, &[
                "737707086760731113357714241006081263",
                "-425319473946139603274605151187659",
                "5138800366453976780323726329446",
                "-823534263439730779968091389",
                "98394038810047812049302",
                "-3091990138604570",
                "313645809715",
                "1",
            ]),
            (-84, &["-5133201653210986057826304", "88821246589810089394176", "-5663679223085309952", "-3196800946944", "1"]),
        ];
        for (d, coeffs) in cases {
            let h = hilbert_class_poly(Discriminant::new(*d).unwrap()).unwrap();
            assert_eq!(h.coeffs, ints(coeffs), "D = {d}");
        }
    }

    #[test]
    fn precision_independence_and_degree() {
        for d in (3..=2000i64).map(|n| -n).filter(|d| Discriminant::new(*d).is_ok()).step_by(7) {
            let disc = Discriminant::new(d).unwrap();
            let bits = initial_precision(disc);
            let a = hilbert_class_poly_at(disc, bits).unwrap();
            let b = hilbert_class_poly_at(disc, 2 * bits).unwrap();
            assert_eq!(a, b, "D = {d}");
            assert_eq!(a.degree(), reduced_forms(disc).len());
        }
    }

    #[test]
    fn low_precision_is_reported_not_rounded() {
        // 64 bits, doubled twice to 256, is far too little for |D| ≈ 10^4
        let disc = Discriminant::new(-10007).unwrap();
        assert!(matches!(hilbert_class_poly_at(disc, 64), Err(Error::Precision(_))));
    }

    #[test]
    fn reduction_mod_p() {
        let h23 = hilbert_class_poly(Discriminant::new(-23).unwrap()).unwrap();
        assert_eq!(classpoly_mod(&h23, 5).unwrap(), vec![0, 0, 0, 1]);
        let h4 = hilbert_class_poly(Discriminant::new(-4).unwrap()).unwrap();
        assert_eq!(classpoly_mod(&h4, 11).unwrap(), vec![10, 1]);
        let h3 = hilbert_class_poly(Discriminant::new(-3).unwrap()).unwrap();
        for p in [2, 3, 5, 7, 101, 1009] {
            assert_eq!(classpoly_mod(&h3, p).unwrap(), vec![0, 1]);
        }
        assert!(classpoly_mod(&h3, 9).is_err());
        let ctx = fp2_construct(11).unwrap();
        assert_eq!(h4.to_ffpoly(&ctx), FfPoly::from_ints(&ctx, &[-1, 1]));
    }

    #[test]
    fn json_round_trip() {
        let h = hilbert_class_poly(Discriminant::new(-23).unwrap()).unwrap();
        let v = h.to_json();
        assert_eq!(v["D"], "-23");
        assert_eq!(v["h"], 3);
        assert_eq!(ClassPolynomial::from_json(&v).unwrap(), h);
        let mut broken = v.clone();
        broken["coeffs"][3] = json!("2");
        assert!(ClassPolynomial::from_json(&broken).is_err());
    }
}
