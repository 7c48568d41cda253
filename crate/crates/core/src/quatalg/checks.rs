//! Killing form and Hilbert–Schmidt computations on B⁰, discriminants of
//! embedded tori, and norm images of local unit groups.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;

use super::lattice::to_i128;
use super::{Embedding, GrossLattice, Order, QuatElement, QuaternionAlgebra};
use crate::error::{domain, Error, Result};
use crate::numbase::{factor_trial, is_prime_u64, Int, Rat, FACTOR_BOUND};

/// Largest q^k accepted by the local norm computations.
pub const MAX_LOCAL_MODULUS: i64 = 100_000;

/// (trace of ad_x² on B⁰, −4 Nr x) for traceless x.
pub fn killing_check(alg: &QuaternionAlgebra, x: &QuatElement) -> Result<(Rat, Rat)> {
    if !x.tr().is_zero() {
        return Err(domain!("killing_check needs a traceless element, got {x}"));
    }
    let basis = [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]].map(QuatElement::from_ints);
    // column t of ad_x is the image of basis[t] in i, j, k coordinates
    let ad: Vec<Vec<Rat>> = basis
        .iter()
        .map(|e| {
            let y = alg.mul(x, e).sub(&alg.mul(e, x));
            y.0[1..].to_vec()
        })
        .collect();
    let mut tr = Rat::zero();
    for s in 0..3 {
        for t in 0..3 {
            // (ad²)_{ss} = Σ_t ad_{s t} ad_{t s}, with ad[col][row]
            tr += &ad[t][s] * &ad[s][t];
        }
    }
    let four = Rat::from_integer(BigInt::from(-4));
    Ok((tr, four * alg.nr(x)))
}

fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    // Durand–Kerner on λ³ + c2 λ² + c1 λ + c0
    let f = |z: Complex64| ((z + c2) * z + c1) * z + c0;
    let seed = Complex64::new(0.4, 0.9);
    let mut r = [Complex64::new(1.0, 0.0), seed, seed * seed];
    let scale = 1.0 + c2.abs().max(c1.abs()).max(c0.abs());
    for z in r.iter_mut() {
        *z *= scale;
    }
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for s in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for t in 0..3 {
                if s != t {
                    den *= r[s] - r[t];
                }
            }
            let step = f(r[s]) / den;
            r[s] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * scale {
            break;
        }
    }
    r
}

/// Hilbert–Schmidt norm sqrt(Σ |λ|²) of ad_m on the traceless 2×2 matrices,
/// from its eigenvalues.
pub fn hs_norm_of_ad(m: [[f64; 2]; 2]) -> f64 {
    let basis = [[[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]];
    let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        c
    };
    // coordinates of a traceless matrix [[h, e], [f, −h]] are (h, e, f)
    let mut ad = [[0.0; 3]; 3];
    for (t, e) in basis.iter().enumerate() {
        let x = mul(m, *e);
        let y = mul(*e, m);
        let z = [[x[0][0] - y[0][0], x[0][1] - y[0][1]], [x[1][0] - y[1][0], x[1][1] - y[1][1]]];
        ad[0][t] = z[0][0];
        ad[1][t] = z[0][1];
        ad[2][t] = z[1][0];
    }
    let tr = ad[0][0] + ad[1][1] + ad[2][2];
    let minors = ad[0][0] * ad[1][1] - ad[0][1] * ad[1][0] + ad[0][0] * ad[2][2] - ad[0][2] * ad[2][0] + ad[1][1] * ad[2][2]
        - ad[1][2] * ad[2][1];
    let det = ad[0][0] * (ad[1][1] * ad[2][2] - ad[1][2] * ad[2][1]) - ad[0][1] * (ad[1][0] * ad[2][2] - ad[1][2] * ad[2][0])
        + ad[0][2] * (ad[1][0] * ad[2][1] - ad[1][1] * ad[2][0]);
    let roots = cubic_roots(-tr, minors, -det);
    roots.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// HS norm of ad of an element with square D in Mat₂(R), over sqrt|D|.
pub fn hs_norm_ratio(d: crate::quadforms::Discriminant) -> f64 {
    let dv = d.value() as f64;
    hs_norm_of_ad([[0.0, dv], [1.0, 0.0]]) / dv.abs().sqrt()
}

/// ∏_q |D|_q^{-1} after checking that ι(√D) is primitive in the host's
/// Gross lattice.
pub fn packet_discriminant(iota: &Embedding) -> Result<Int> {
    let gl = GrossLattice::new(iota.host())?;
    if !gl.is_primitive(iota.v()) {
        return Err(domain!("ι(√D) is not primitive in the Gross lattice"));
    }
    let n = iota.disc().abs() as u64;
    let (factors, rest) = factor_trial(n, FACTOR_BOUND);
    if rest != 1 {
        return Err(Error::Budget(format!("|D| = {n} has a factor beyond trial division")));
    }
    Ok(factors.iter().fold(Int::from(1), |acc, (q, e)| acc * Int::from(*q).pow(*e)))
}

fn check_modulus(q: i64, k: u32) -> Result<i64> {
    if !is_prime_u64(q as u64) || k == 0 {
        return Err(domain!("need a prime q and k >= 1, got q = {q}, k = {k}"));
    }
    match q.checked_pow(k) {
        Some(m) if m <= MAX_LOCAL_MODULUS => Ok(m),
        _ => Err(Error::Budget(format!("q^k = {q}^{k} exceeds {MAX_LOCAL_MODULUS}"))),
    }
}

fn order_norm(g: &[Vec<i128>], s: i128, c: &[i64; 4]) -> Result<i128> {
    let v = super::enumerate::eval_form(g, c)?;
    if v % s != 0 {
        return Err(Error::Internal("non-integral norm on an order".into()));
    }
    Ok(v / s)
}

fn gcd(a: i64, b: i64) -> i64 {
    crate::numbase::gcd_i64(a, b)
}

/// Subgroup of (Z/m)^× generated by `gens`, as a membership table.
struct Subgroup {
    m: i64,
    member: Vec<bool>,
    size: usize,
}

impl Subgroup {
    fn trivial(m: i64) -> Self {
        let mut member = vec![false; m as usize];
        member[1 % m as usize] = true;
        Subgroup { m, member, size: 1 }
    }

    fn add(&mut self, g: i64) {
        let g = g.rem_euclid(self.m);
        if self.member[g as usize] {
            return;
        }
        // ⟨H, g⟩ = ∪ H gⁱ
        let h: Vec<i64> = (0..self.m).filter(|&x| self.member[x as usize]).collect();
        let mut power = g;
        while !self.member[power as usize] {
            for &x in &h {
                let y = (x as i128 * power as i128).rem_euclid(self.m as i128) as usize;
                if !self.member[y] {
                    self.member[y] = true;
                    self.size += 1;
                }
            }
            power = (power as i128 * g as i128).rem_euclid(self.m as i128) as i64;
        }
    }

    fn elements(&self) -> Vec<u64> {
        (0..self.m).filter(|&x| self.member[x as usize]).map(|x| x as u64).collect()
    }
}

fn totient_prime_power(q: i64, m: i64) -> usize {
    (m - m / q) as usize
}

/// Nr((O ⊗ Z/q^k)^×) ⊆ (Z/q^k)^×. The unit group is generated by lifts of
/// (O/qO)^× together with 1 + q^j e_t (j ≥ 1), so the image is generated by
/// their norms; the enumeration stops once the image is everything.
pub fn norm_image(o: &Order, q: i64, k: u32) -> Result<Vec<u64>> {
    let m = check_modulus(q, k)?;
    let (g, s) = o.norm_gram()?;
    let full = totient_prime_power(q, m);
    let mut h = Subgroup::trivial(m);
    let basis_tr: Vec<i128> =
        o.basis().iter().map(|e| to_i128(&e.tr().to_integer())).collect::<Result<_>>()?;
    for j in 1..k {
        let qj = q.pow(j) as i128;
        for t in 0..4 {
            let mut c = [0i64; 4];
            c[t] = 1;
            let n = order_norm(&g, s, &c)?;
            // Nr(1 + q^j e) = 1 + q^j Tr(e) + q^{2j} Nr(e)
            let v = 1 + qj * basis_tr[t] + qj * qj * n;
            h.add(v.rem_euclid(m as i128) as i64);
        }
    }
    for c in Order::residues(q) {
        if h.size == full {
            break;
        }
        let n = order_norm(&g, s, &c)?;
        let r = n.rem_euclid(m as i128) as i64;
        if gcd(r, q) == 1 {
            h.add(r);
        }
    }
    Ok(h.elements())
}

/// Whether reduced norms of units of O ⊗ Z/q^k cover (Z/q^k)^×.
pub fn local_norm_surjectivity(o: &Order, q: i64, k: u32) -> Result<bool> {
    let m = check_modulus(q, k)?;
    Ok(norm_image(o, q, k)?.len() == totient_prime_power(q, m))
}

/// Exhaustive norm image over all of O/q^kO; only for q^{4k} ≤ 10⁶.
pub fn norm_image_brute(o: &Order, q: i64, k: u32) -> Result<Vec<u64>> {
    let m = check_modulus(q, k)?;
    if m.pow(4) > 1_000_000 {
        return Err(Error::Budget(format!("{m}^4 residues is too many for brute force")));
    }
    let (g, s) = o.norm_gram()?;
    let mut seen = vec![false; m as usize];
    for c in Order::residues(m) {
        let r = order_norm(&g, s, &c)?.rem_euclid(m as i128) as i64;
        if gcd(r, q) == 1 {
            seen[r as usize] = true;
        }
    }
    Ok((0..m).filter(|&x| seen[x as usize]).map(|x| x as u64).collect())
}
