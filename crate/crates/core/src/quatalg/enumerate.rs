//! Short-vector enumeration for positive-definite integral quadratic forms
//! of small rank: LLL reduction on the Gram matrix, then Fincke–Pohst with
//! floating bounds and an exact integer check at every leaf.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

fn overflow() -> Error {
    Error::Budget("lattice entries exceed 128-bit arithmetic".into())
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(overflow)
}

/// Exact value x^T G x.
pub fn eval_form(g: &[Vec<i128>], x: &[i64]) -> Result<i128> {
    let mut s: i128 = 0;
    for i in 0..x.len() {
        if x[i] == 0 {
            continue;
        }
        let mut row: i128 = 0;
        for j in 0..x.len() {
            row = row.checked_add(mul(g[i][j], x[j] as i128)?).ok_or_else(overflow)?;
        }
        s = s.checked_add(mul(row, x[i] as i128)?).ok_or_else(overflow)?;
    }
    Ok(s)
}

/// Gram–Schmidt data (μ, squared lengths) of a Gram matrix, in floating point.
fn gso(g: &[Vec<i128>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j] as f64;
            for k in 0..j {
                s -= mu[j][k] * mu[i][k] * bstar[k];
            }
            mu[i][j] = s / bstar[j];
        }
        let mut s = g[i][i] as f64;
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * bstar[k];
        }
        bstar[i] = s;
    }
    (mu, bstar)
}

/// LLL-reduce in place. `u` collects the transform: reduced vector i is
/// Σ_j u[i][j] · original vector j.
fn lll(g: &mut [Vec<i128>], u: &mut [Vec<i64>]) -> Result<()> {
    let n = g.len();
    let mut k = 1;
    let mut guard = 0u32;
    while k < n {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::Internal("LLL failed to converge".into()));
        }
        for j in (0..k).rev() {
            let (mu, _) = gso(g);
            let r = mu[k][j].round();
            if r == 0.0 {
                continue;
            }
            let r = r as i128;
            let gkk = g[k][k] - mul(2 * r, g[k][j])? + mul(mul(r, r)?, g[j][j])?;
            for i in 0..n {
                if i != k {
                    g[k][i] -= mul(r, g[j][i])?;
                    g[i][k] = g[k][i];
                }
            }
            g[k][k] = gkk;
            for i in 0..n {
                u[k][i] = u[k][i].checked_sub((r as i64).checked_mul(u[j][i]).ok_or_else(overflow)?).ok_or_else(overflow)?;
            }
        }
        let (mu, bstar) = gso(g);
        if bstar[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            k += 1;
        } else {
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            u.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok(())
}

struct Enum<'a, F> {
    g: &'a [Vec<i128>],
    u: &'a [Vec<i64>],
    q: Vec<Vec<f64>>,
    bound: i128,
    exact: bool,
    x: Vec<i64>,
    out: Vec<i64>,
    visit: F,
}

impl<F: FnMut(&[i64], i128) -> ControlFlow<()>> Enum<'_, F> {
    fn leaf(&mut self) -> Result<ControlFlow<()>> {
        if self.x.iter().all(|&v| v == 0) {
            return Ok(ControlFlow::Continue(()));
        }
        let val = eval_form(self.g, &self.x)?;
        let keep = if self.exact { val == self.bound } else { val <= self.bound };
        if !keep {
            return Ok(ControlFlow::Continue(()));
        }
        let n = self.x.len();
        for j in 0..n {
            let mut s = 0i64;
            for i in 0..n {
                s = s.checked_add(self.x[i].checked_mul(self.u[i][j]).ok_or_else(overflow)?).ok_or_else(overflow)?;
            }
            self.out[j] = s;
        }
        Ok((self.visit)(&self.out, val))
    }

    fn rec(&mut self, i: usize, rem: f64) -> Result<ControlFlow<()>> {
        let n = self.x.len();
        let mut c = 0.0;
        for j in i + 1..n {
            c -= self.q[i][j] * self.x[j] as f64;
        }
        let qii = self.q[i][i];
        let r = (rem.max(0.0) / qii).sqrt();
        let slack = 1e-7 * (1.0 + r);
        if i == 0 && self.exact {
            let mut cands = [
                (c - r).floor() as i64,
                (c - r).ceil() as i64,
                (c + r).floor() as i64,
                (c + r).ceil() as i64,
            ];
            cands.sort_unstable();
            let mut last = None;
            for v in cands {
                if last == Some(v) {
                    continue;
                }
                last = Some(v);
                self.x[0] = v;
                if self.leaf()?.is_break() {
                    return Ok(ControlFlow::Break(()));
                }
            }
            return Ok(ControlFlow::Continue(()));
        }
        let lo = (c - r - slack).ceil() as i64;
        let hi = (c + r + slack).floor() as i64;
        for v in lo..=hi {
            self.x[i] = v;
            let d = v as f64 - c;
            let next = rem - qii * d * d;
            let flow = if i == 0 { self.leaf()? } else { self.rec(i - 1, next)? };
            if flow.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        self.x[i] = 0;
        Ok(ControlFlow::Continue(()))
    }
}

/// Visit every nonzero x with x^T G x ≤ bound (or = bound when `exact`),
/// in coordinates of the original basis, together with the value. Both x
/// and −x are visited. The visitor may stop the search early.
pub fn for_each_short_vector<F>(gram: &[Vec<i128>], bound: i128, exact: bool, visit: F) -> Result<()>
where
    F: FnMut(&[i64], i128) -> ControlFlow<()>,
{
    let n = gram.len();
    if bound <= 0 || n == 0 {
        return Ok(());
    }
    let mut g: Vec<Vec<i128>> = gram.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    lll(&mut g, &mut u)?;
    // Cholesky-style decomposition Q(x) = Σ q_ii (x_i + Σ_{j>i} q_ij x_j)²
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let mut s = g[i][j] as f64;
            for k in 0..i {
                s -= q[k][k] * q[k][i] * q[k][j];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Domain("quadratic form is not positive definite".into()));
                }
                q[i][i] = s;
            } else {
                q[i][j] = s / q[i][i];
            }
        }
    }
    let mut e = Enum { g: &g, u: &u, q, bound, exact, x: vec![0; n], out: vec![0; n], visit };
    let b = bound as f64;
    let _ = e.rec(n - 1, b * (1.0 + 1e-9) + 1e-6)?;
    Ok(())
}

/// All nonzero vectors with x^T G x = target.
pub fn vectors_of_value(gram: &[Vec<i128>], target: i128) -> Result<Vec<Vec<i64>>> {
    let mut out = vec![];
    for_each_short_vector(gram, target, true, |x, _| {
        out.push(x.to_vec());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Whether some nonzero vector has x^T G x = target.
pub fn represents(gram: &[Vec<i128>], target: i128) -> Result<bool> {
    let mut found = false;
    for_each_short_vector(gram, target, true, |_, _| {
        found = true;
        ControlFlow::Break(())
    })?;
    Ok(found)
}

/// Smallest nonzero value of the form.
pub fn minimum(gram: &[Vec<i128>]) -> Result<i128> {
    let mut best = (0..gram.len()).map(|i| gram[i][i]).min().unwrap_or(0);
    for_each_short_vector(gram, best, false, |_, v| {
        best = best.min(v);
        ControlFlow::Continue(())
    })?;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(g: &[Vec<i128>], bound: i128, box_r: i64, exact: bool) -> Vec<Vec<i64>> {
        let n = g.len();
        let mut out = vec![];
        let mut x = vec![-box_r; n];
        loop {
            if x.iter().any(|&v| v != 0) {
                let v = eval_form(g, &x).unwrap();
                if (exact && v == bound) || (!exact && v <= bound) {
                    out.push(x.clone());
                }
            }
            let mut i = 0;
            while i < n {
                x[i] += 1;
                if x[i] <= box_r {
                    break;
                }
                x[i] = -box_r;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        out.sort();
        out
    }

    fn gram_from_basis(b: &[Vec<i64>]) -> Vec<Vec<i128>> {
        let n = b.len();
        (0..n)
            .map(|i| (0..n).map(|j| b[i].iter().zip(&b[j]).map(|(x, y)| (*x as i128) * (*y as i128)).sum()).collect())
            .collect()
    }

    #[test]
    fn sums_of_squares() {
        let id: Vec<Vec<i128>> = (0..4).map(|i| (0..4).map(|j| (i == j) as i128).collect()).collect();
        // r4(n) = 8 σ(n) for odd n
        assert_eq!(vectors_of_value(&id, 1).unwrap().len(), 8);
        assert_eq!(vectors_of_value(&id, 3).unwrap().len(), 32);
        assert_eq!(vectors_of_value(&id, 5).unwrap().len(), 48);
        assert_eq!(minimum(&id).unwrap(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn matches_brute_force(entries in proptest::collection::vec(-3i64..=3, 9), bound in 1i128..40) {
            let mut b: Vec<Vec<i64>> = entries.chunks(3).map(|c| c.to_vec()).collect();
            for i in 0..3 { b[i][i] += 4; }
            let g = gram_from_basis(&b);
            let det = {
                let m = |i: usize, j: usize| g[i][j];
                m(0,0)*(m(1,1)*m(2,2)-m(1,2)*m(2,1)) - m(0,1)*(m(1,0)*m(2,2)-m(1,2)*m(2,0)) + m(0,2)*(m(1,0)*m(2,1)-m(1,1)*m(2,0))
            };
            prop_assume!(det != 0);
            // |x_i| ≤ sqrt(bound · (G⁻¹)_ii), with (G⁻¹)_ii = cofactor / det
            let cof = [g[1][1]*g[2][2]-g[1][2]*g[2][1], g[0][0]*g[2][2]-g[0][2]*g[2][0], g[0][0]*g[1][1]-g[0][1]*g[1][0]];
            let r = cof.iter().map(|c| ((bound * c) as f64 / det as f64).sqrt().ceil() as i64).max().unwrap();
            prop_assume!(r <= 20);
            for exact in [false, true] {
                let mut got = vec![];
                for_each_short_vector(&g, bound, exact, |x, _| { got.push(x.to_vec()); ControlFlow::Continue(()) }).unwrap();
                got.sort();
                prop_assert_eq!(got, brute(&g, bound, r, exact));
            }
        }
    }
}
