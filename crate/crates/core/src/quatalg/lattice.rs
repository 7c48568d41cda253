//! Full-rank rational lattices in Q^n stored as an integer Hermite normal
//! form over a common denominator. The form is canonical, so lattice
//! equality is structural equality.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::numbase::{Int, Rat};

/// Echelon form of integer rows: row r has zeros before its pivot column,
/// a positive pivot, and entries above each pivot reduced into [0, pivot).
/// Zero rows are dropped.
pub fn hnf(mut rows: Vec<Vec<Int>>, ncols: usize) -> Vec<Vec<Int>> {
    let mut out: Vec<Vec<Int>> = Vec::new();
    let mut pivots = Vec::new();
    for col in 0..ncols {
        loop {
            // the row with the smallest nonzero entry in this column becomes pivot
            let mut best: Option<usize> = None;
            for (i, r) in rows.iter().enumerate() {
                if !r[col].is_zero() && best.is_none_or(|b| r[col].abs() < rows[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            let pivot = rows.swap_remove(b);
            let mut done = true;
            for r in rows.iter_mut() {
                if r[col].is_zero() {
                    continue;
                }
                let q = r[col].div_floor(&pivot[col]);
                for c in col..ncols {
                    let t = &q * &pivot[c];
                    r[c] -= t;
                }
                if !r[col].is_zero() {
                    done = false;
                }
            }
            if done {
                let mut p = pivot;
                if p[col].is_negative() {
                    for v in p.iter_mut() {
                        *v = -&*v;
                    }
                }
                out.push(p);
                pivots.push(col);
                break;
            }
            rows.push(pivot);
        }
        rows.retain(|r| r.iter().any(|v| !v.is_zero()));
    }
    // reduce above the pivots
    for k in 0..out.len() {
        let col = pivots[k];
        for r in 0..k {
            let q = out[r][col].div_floor(&out[k][col]);
            if !q.is_zero() {
                for c in col..ncols {
                    let t = &q * &out[k][c];
                    out[r][c] -= t;
                }
            }
        }
    }
    out
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatLattice {
    /// Basis vectors are rows[i] / den.
    rows: Vec<Vec<Int>>,
    den: Int,
}

/// Rank-4 lattices in the 1, i, j, k frame.
pub type Lattice4 = RatLattice;

impl fmt::Debug for RatLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(1/{})[", self.den)?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let s: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            write!(f, "{}", s.join(" "))?;
        }
        write!(f, "]")
    }
}

fn lcm_of_dens<'a>(vs: impl Iterator<Item = &'a Rat>) -> Int {
    vs.fold(Int::one(), |acc, v| acc.lcm(v.denom()))
}

impl RatLattice {
    /// Lattice spanned by `gens` (rational vectors of length n); must have rank n.
    pub fn from_generators(gens: &[Vec<Rat>], n: usize) -> Result<Self> {
        let den = lcm_of_dens(gens.iter().flatten());
        let rows = gens
            .iter()
            .map(|g| g.iter().map(|v| (v * Rat::from_integer(den.clone())).to_integer()).collect())
            .collect();
        Self::from_int_rows(rows, den, n)
    }

    /// Lattice spanned by rows[i] / den.
    pub fn from_int_rows(rows: Vec<Vec<Int>>, den: Int, n: usize) -> Result<Self> {
        let h = hnf(rows, n);
        if h.len() != n {
            return Err(domain!("generators span a lattice of rank {} < {n}", h.len()));
        }
        let mut l = RatLattice { rows: h, den };
        l.normalize();
        Ok(l)
    }

    fn normalize(&mut self) {
        let mut g = self.den.clone();
        for r in &self.rows {
            for v in r {
                g = g.gcd(v);
            }
        }
        if !g.is_one() {
            for r in self.rows.iter_mut() {
                for v in r.iter_mut() {
                    *v /= &g;
                }
            }
            self.den /= &g;
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn den(&self) -> &Int {
        &self.den
    }

    pub fn int_rows(&self) -> &[Vec<Int>] {
        &self.rows
    }

    pub fn basis(&self) -> Vec<Vec<Rat>> {
        self.rows.iter().map(|r| r.iter().map(|v| Rat::new(v.clone(), self.den.clone())).collect()).collect()
    }

    /// Basis matrix with rational entries rendered "a/b".
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.basis().iter().map(|r| r.iter().map(crate::numbase::fmt_rat).collect()).collect()
    }

    /// |det| of the basis matrix: the covolume.
    pub fn covolume(&self) -> Rat {
        let mut d = Int::one();
        for (i, r) in self.rows.iter().enumerate() {
            d *= &r[i];
        }
        Rat::new(d, self.den.pow(self.dim() as u32))
    }

    /// Coordinates of x in this basis, if x is in the real span (always, full rank).
    pub fn coordinates(&self, x: &[Rat]) -> Vec<Rat> {
        // upper-triangular system: x = Σ c_i rows[i] / den
        let n = self.dim();
        let mut rest: Vec<Rat> = x.iter().map(|v| v * Rat::from_integer(self.den.clone())).collect();
        let mut c = vec![Rat::zero(); n];
        for i in 0..n {
            c[i] = &rest[i] / Rat::from_integer(self.rows[i][i].clone());
            for j in i..n {
                let t = &c[i] * Rat::from_integer(self.rows[i][j].clone());
                rest[j] -= t;
            }
        }
        c
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.coordinates(x).iter().all(|c| c.is_integer())
    }

    pub fn contains_lattice(&self, other: &RatLattice) -> bool {
        other.basis().iter().all(|b| self.contains(b))
    }

    pub fn sum(&self, other: &RatLattice) -> RatLattice {
        let den = self.den.lcm(&other.den);
        let s1 = &den / &self.den;
        let s2 = &den / &other.den;
        let mut rows: Vec<Vec<Int>> = self.rows.iter().map(|r| r.iter().map(|v| v * &s1).collect()).collect();
        rows.extend(other.rows.iter().map(|r| r.iter().map(|v| v * &s2).collect::<Vec<_>>()));
        Self::from_int_rows(rows, den, self.dim()).expect("sum of full-rank lattices has full rank")
    }

    pub fn scale(&self, c: &Rat) -> Result<RatLattice> {
        if c.is_zero() {
            return Err(domain!("cannot scale a lattice by zero"));
        }
        let rows = self.rows.iter().map(|r| r.iter().map(|v| v * c.numer()).collect()).collect();
        Self::from_int_rows(rows, &self.den * c.denom(), self.dim())
    }

    /// Dual with respect to the standard dot product.
    pub fn dual(&self) -> RatLattice {
        // basis B = R/den upper triangular; dual basis = columns of B^{-1}
        let n = self.dim();
        let b = self.basis();
        let mut inv = vec![vec![Rat::zero(); n]; n];
        for col in 0..n {
            // solve B y = e_col by back substitution (B upper triangular)
            for i in (0..n).rev() {
                let mut s = if i == col { Rat::one() } else { Rat::zero() };
                for j in i + 1..n {
                    s -= &b[i][j] * &inv[j][col];
                }
                inv[i][col] = s / &b[i][i];
            }
        }
        let gens: Vec<Vec<Rat>> = (0..n).map(|c| (0..n).map(|r| inv[r][c].clone()).collect()).collect();
        RatLattice::from_generators(&gens, n).expect("dual of a full-rank lattice")
    }

    pub fn intersect(&self, other: &RatLattice) -> RatLattice {
        self.dual().sum(&other.dual()).dual()
    }

    /// Index [self : other] for other ⊆ self.
    pub fn index_of(&self, other: &RatLattice) -> Result<Int> {
        let r = other.covolume() / self.covolume();
        if !r.is_integer() {
            return Err(Error::Internal("sublattice index is not an integer".into()));
        }
        Ok(r.to_integer())
    }
}

/// i128 conversion used by the enumeration code.
pub fn to_i128(v: &Int) -> Result<i128> {
    v.to_i128().ok_or_else(|| Error::Budget(format!("integer {v} exceeds 128 bits")))
}

pub fn rat_vec(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| Rat::from_integer(BigInt::from(x))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbase::rat;
    use proptest::prelude::*;

    fn lat(rows: &[[i64; 3]], den: i64) -> RatLattice {
        RatLattice::from_int_rows(rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect(), BigInt::from(den), 3)
            .unwrap()
    }

    #[test]
    fn canonical_form() {
        let a = lat(&[[2, 0, 0], [0, 3, 0], [0, 0, 5]], 1);
        let b = lat(&[[2, 3, 0], [0, 3, 0], [0, 3, 5], [4, 6, 10]], 1);
        assert_eq!(a.sum(&b), b.sum(&a));
        let c = lat(&[[4, 0, 0], [0, 6, 0], [0, 0, 10]], 2);
        assert_eq!(a, c);
        assert_eq!(a.covolume(), rat(30, 1));
        assert!(RatLattice::from_int_rows(vec![vec![BigInt::from(1), BigInt::from(0), BigInt::from(0)]], BigInt::one(), 3).is_err());
    }

    #[test]
    fn dual_and_intersection() {
        let a = lat(&[[2, 1, 0], [0, 3, 0], [0, 0, 1]], 1);
        assert_eq!(a.dual().dual(), a);
        assert_eq!(a.dual().covolume(), rat(1, 6));
        let z = lat(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]], 1);
        let two = lat(&[[2, 0, 0], [0, 1, 0], [0, 0, 1]], 1);
        let three = lat(&[[1, 0, 0], [0, 3, 0], [0, 0, 1]], 1);
        assert_eq!(two.intersect(&three), lat(&[[2, 0, 0], [0, 3, 0], [0, 0, 1]], 1));
        assert_eq!(two.sum(&three), z);
        assert_eq!(z.index_of(&two.intersect(&three)).unwrap(), BigInt::from(6));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn membership_of_generators(entries in proptest::collection::vec(-20i64..=20, 12), den in 1i64..6) {
            let rows: Vec<Vec<Int>> = entries.chunks(3).map(|c| c.iter().map(|&v| BigInt::from(v)).collect()).collect();
            if let Ok(l) = RatLattice::from_int_rows(rows.clone(), BigInt::from(den), 3) {
                for r in &rows {
                    let v: Vec<Rat> = r.iter().map(|x| Rat::new(x.clone(), BigInt::from(den))).collect();
                    prop_assert!(l.contains(&v));
                }
                prop_assert_eq!(l.intersect(&l), l.clone());
                let doubled = l.scale(&rat(2, 1)).unwrap();
                prop_assert!(l.contains_lattice(&doubled));
                prop_assert_eq!(l.index_of(&doubled).unwrap(), BigInt::from(8));
            }
        }
    }
}
