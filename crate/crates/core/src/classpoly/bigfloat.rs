//! Binary fixed-point reals and complexes over `BigInt`: a value is
//! `mantissa / 2^bits`. All operands of an operation share `bits`; results
//! are rounded to nearest.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn round_shift(x: BigInt, shift: u32) -> BigInt {
    if shift == 0 {
        return x;
    }
    (x + (BigInt::one() << (shift - 1))) >> shift
}

/// Rounded quotient n / d for d > 0.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (n * &two + d).div_floor(&(d * &two))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    pub m: BigInt,
    pub bits: u32,
}

impl Fixed {
    pub fn from_int(v: &BigInt, bits: u32) -> Self {
        Fixed { m: v << bits, bits }
    }

    pub fn from_i64(v: i64, bits: u32) -> Self {
        Fixed::from_int(&BigInt::from(v), bits)
    }

    pub fn zero(bits: u32) -> Self {
        Fixed { m: BigInt::zero(), bits }
    }

    pub fn add(&self, o: &Fixed) -> Fixed {
        Fixed { m: &self.m + &o.m, bits: self.bits }
    }

    pub fn sub(&self, o: &Fixed) -> Fixed {
        Fixed { m: &self.m - &o.m, bits: self.bits }
    }

    pub fn neg(&self) -> Fixed {
        Fixed { m: -&self.m, bits: self.bits }
    }

    pub fn mul(&self, o: &Fixed) -> Fixed {
        Fixed { m: round_shift(&self.m * &o.m, self.bits), bits: self.bits }
    }

    pub fn mul_int(&self, k: &BigInt) -> Fixed {
        Fixed { m: &self.m * k, bits: self.bits }
    }

    pub fn div_int(&self, k: &BigInt) -> Fixed {
        let (n, d) = if k.is_negative() { (-&self.m, -k) } else { (self.m.clone(), k.clone()) };
        Fixed { m: round_div(&n, &d), bits: self.bits }
    }

    pub fn div(&self, o: &Fixed) -> Fixed {
        let n = &self.m << self.bits;
        let (n, d) = if o.m.is_negative() { (-n, -&o.m) } else { (n, o.m.clone()) };
        Fixed { m: round_div(&n, &d), bits: self.bits }
    }

    /// Re-express with a different number of fractional bits.
    pub fn with_bits(&self, bits: u32) -> Fixed {
        if bits >= self.bits {
            Fixed { m: &self.m << (bits - self.bits), bits }
        } else {
            Fixed { m: round_shift(self.m.clone(), self.bits - bits), bits }
        }
    }

    /// Nearest integer and |self − nearest| as a fixed-point value.
    pub fn round(&self) -> (BigInt, Fixed) {
        let n = round_shift(self.m.clone(), self.bits);
        let diff = Fixed { m: &self.m - (&n << self.bits), bits: self.bits };
        (n, Fixed { m: diff.m.abs(), bits: self.bits })
    }

    pub fn to_f64(&self) -> f64 {
        let shift = self.m.bits().saturating_sub(60) as u32;
        let top = (&self.m >> shift).to_f64().unwrap_or(0.0);
        top * 2f64.powi(shift as i32 - self.bits as i32)
    }

    /// True if |self| ≤ 2^-k.
    pub fn le_pow2_neg(&self, k: u32) -> bool {
        k > self.bits || self.m.abs() <= BigInt::one() << (self.bits - k)
    }

    pub fn sqrt_int(n: u64, bits: u32) -> Fixed {
        let scaled = BigInt::from(n) << (2 * bits);
        Fixed { m: scaled.sqrt(), bits }
    }

    fn atan_inv(n: u64, bits: u32) -> Fixed {
        // atan(1/n) = Σ (−1)^k / ((2k+1) n^{2k+1})
        let n2 = BigInt::from(n * n);
        let mut power = (BigInt::one() << bits) / BigInt::from(n);
        let mut sum = BigInt::zero();
        let mut k = 0u64;
        while !power.is_zero() {
            let term = &power / BigInt::from(2 * k + 1);
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            power /= &n2;
            k += 1;
        }
        Fixed { m: sum, bits }
    }

    /// π by Machin's formula.
    pub fn pi(bits: u32) -> Fixed {
        let g = bits + 16;
        let v = Fixed::atan_inv(5, g).mul_int(&BigInt::from(16)).sub(&Fixed::atan_inv(239, g).mul_int(&BigInt::from(4)));
        v.with_bits(bits)
    }

    /// e^x for x ≥ 0 (any size), by halving, Taylor series and squaring.
    pub fn exp(&self, bits: u32) -> Fixed {
        let xf = self.to_f64().max(0.0);
        let halvings = (xf.log2().max(0.0) as u32) + 10;
        let g = bits + halvings + 16;
        let x = self.with_bits(g);
        let r = Fixed { m: x.m >> halvings, bits: g };
        let one = Fixed::from_i64(1, g);
        let mut term = one.clone();
        let mut sum = one;
        let mut k = 1i64;
        loop {
            term = term.mul(&r).div_int(&BigInt::from(k));
            if term.m.is_zero() {
                break;
            }
            sum = sum.add(&term);
            k += 1;
        }
        for _ in 0..halvings {
            sum = sum.mul(&sum);
        }
        sum.with_bits(bits)
    }

    /// (cos θ, sin θ) for |θ| ≤ 4 via Taylor series.
    pub fn cos_sin(&self, bits: u32) -> (Fixed, Fixed) {
        let g = bits + 16;
        let x = self.with_bits(g);
        let x2 = x.mul(&x);
        let one = Fixed::from_i64(1, g);
        let (mut cos, mut sin) = (one.clone(), x.clone());
        let (mut ct, mut st) = (one, x);
        let mut k = 1i64;
        loop {
            ct = ct.mul(&x2).div_int(&BigInt::from(-(2 * k - 1) * (2 * k)));
            st = st.mul(&x2).div_int(&BigInt::from(-(2 * k) * (2 * k + 1)));
            if ct.m.is_zero() && st.m.is_zero() {
                break;
            }
            cos = cos.add(&ct);
            sin = sin.add(&st);
            k += 1;
        }
        (cos.with_bits(bits), sin.with_bits(bits))
    }
}

/// Complex number with fixed-point real and imaginary parts at a shared
/// precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigFloatComplex {
    pub re: Fixed,
    pub im: Fixed,
}

impl BigFloatComplex {
    pub fn new(re: Fixed, im: Fixed) -> Self {
        debug_assert_eq!(re.bits, im.bits);
        BigFloatComplex { re, im }
    }

    pub fn from_i64(v: i64, bits: u32) -> Self {
        BigFloatComplex { re: Fixed::from_i64(v, bits), im: Fixed::zero(bits) }
    }

    pub fn zero(bits: u32) -> Self {
        BigFloatComplex::from_i64(0, bits)
    }

    pub fn precision(&self) -> u32 {
        self.re.bits
    }

    pub fn add(&self, o: &Self) -> Self {
        BigFloatComplex { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        BigFloatComplex { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> Self {
        BigFloatComplex { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> Self {
        BigFloatComplex { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let bits = self.re.bits;
        let re = &self.re.m * &o.re.m - &self.im.m * &o.im.m;
        let im = &self.re.m * &o.im.m + &self.im.m * &o.re.m;
        BigFloatComplex {
            re: Fixed { m: round_shift(re, bits), bits },
            im: Fixed { m: round_shift(im, bits), bits },
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        BigFloatComplex { re: self.re.mul_int(k), im: self.im.mul_int(k) }
    }

    pub fn div(&self, o: &Self) -> Self {
        let bits = self.re.bits;
        let den = &o.re.m * &o.re.m + &o.im.m * &o.im.m;
        let re = (&self.re.m * &o.re.m + &self.im.m * &o.im.m) << bits;
        let im = (&self.im.m * &o.re.m - &self.re.m * &o.im.m) << bits;
        BigFloatComplex {
            re: Fixed { m: round_div(&re, &den), bits },
            im: Fixed { m: round_div(&im, &den), bits },
        }
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        BigFloatComplex { re: self.re.with_bits(bits), im: self.im.with_bits(bits) }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn abs_f64(&self) -> f64 {
        let (r, i) = self.to_f64();
        r.hypot(i)
    }
}
