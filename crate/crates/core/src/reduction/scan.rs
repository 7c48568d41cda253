//! Batch experiments over ranges of discriminants.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{joint_reduce, reduce_archimedean, PrimeContext};
use crate::error::{Error, Result};
use crate::numbase::{fmt_rat, Rat};
use crate::quadforms::{admissible_discriminants, AdmissibleFilter, Discriminant};

pub const CSV_HEADER: &str = "D,h,primes,tv,chi2,surjective,min_im,box_mass_y2";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Primes at which every discriminant must be inert.
    pub primes: Vec<i64>,
    /// Optional primes required to split.
    pub split: Vec<i64>,
    pub dmin: i64,
    pub dmax: i64,
    pub fundamental_only: bool,
    /// Keep a seeded random subset of this many discriminants.
    pub sample: Option<usize>,
    pub seed: u64,
    /// Does not affect results, so it is left out of reports and the hash.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            primes: vec![11, 23],
            split: vec![],
            dmin: 3,
            dmax: 1000,
            fundamental_only: true,
            sample: None,
            seed: 0,
            threads: None,
        }
    }
}

impl ScanConfig {
    fn filter(&self) -> AdmissibleFilter {
        AdmissibleFilter {
            inert: self.primes.clone(),
            split: self.split.clone(),
            coprime_to: vec![],
            fundamental_only: self.fundamental_only,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.filter().validate()?;
        if let Some(&p) = self.primes.iter().find(|&&p| p < 5) {
            return Err(Error::Config(format!("inert prime {p} must be at least 5")));
        }
        if self.dmin < 3 || self.dmax < self.dmin {
            return Err(Error::Config(format!("invalid |D| range [{}, {}]", self.dmin, self.dmax)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("thread count must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub d: i64,
    pub h: usize,
    pub primes: Vec<i64>,
    pub tv: Rat,
    pub chi2: f64,
    pub surjective: bool,
    pub min_im: f64,
    pub box_mass_y2: Rat,
}

impl ScanRow {
    fn csv(&self) -> String {
        let primes = self.primes.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";");
        format!(
            "{},{},{},{},{},{},{},{}",
            self.d,
            self.h,
            primes,
            fmt_f64(self.tv.to_f64().unwrap_or(f64::NAN)),
            fmt_f64(self.chi2),
            self.surjective,
            fmt_f64(self.min_im),
            fmt_f64(self.box_mass_y2.to_f64().unwrap_or(f64::NAN)),
        )
    }

    fn json(&self) -> Value {
        json!({
            "D": self.d.to_string(),
            "h": self.h,
            "primes": self.primes,
            "tv": fmt_rat(&self.tv),
            "chi2": fmt_f64(self.chi2),
            "surjective": self.surjective,
            "min_im": fmt_f64(self.min_im),
            "box_mass_y2": fmt_rat(&self.box_mass_y2),
        })
    }
}

/// Twelve significant digits.
fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

/// Medians over |D| ∈ [2^k, 2^{k+1}).
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicSummary {
    pub lo: i64,
    pub hi: i64,
    pub count: usize,
    pub median_tv: Rat,
    pub median_box_mass_y2: Rat,
}

pub fn median(values: &mut [Rat]) -> Option<Rat> {
    if values.is_empty() {
        return None;
    }
    values.sort();
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2].clone() } else { (&values[n / 2 - 1] + &values[n / 2]) / Rat::from_integer(BigInt::from(2)) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub version: String,
    pub config: ScanConfig,
    pub config_hash: String,
    /// Sorted by |D|.
    pub rows: Vec<ScanRow>,
    pub dyadic: Vec<DyadicSummary>,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("# cmreduce {} config {}\n{CSV_HEADER}\n", self.version, self.config_hash);
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": self.version,
            "config": self.config,
            "config_hash": self.config_hash,
            "rows": self.rows.iter().map(ScanRow::json).collect::<Vec<_>>(),
            "dyadic": self.dyadic.iter().map(|s| json!({
                "lo": s.lo.to_string(),
                "hi": s.hi.to_string(),
                "count": s.count,
                "median_tv": fmt_rat(&s.median_tv),
                "median_box_mass_y2": fmt_rat(&s.median_box_mass_y2),
            })).collect::<Vec<_>>(),
        })
    }
}

fn scan_one(d: Discriminant, primes: &[i64]) -> Result<ScanRow> {
    let j = joint_reduce(d, primes)?;
    let (_, arch) = reduce_archimedean(d);
    Ok(ScanRow {
        d: d.value(),
        h: j.h,
        primes: primes.to_vec(),
        tv: j.tv.clone(),
        chi2: j.chi2,
        surjective: j.is_surjective(),
        min_im: arch.min_im,
        box_mass_y2: arch.cusp[0].mass.clone(),
    })
}

/// Joint reduction and archimedean statistics for every admissible D in
/// the configured range.
pub fn scan(config: &ScanConfig) -> Result<ScanReport> {
    config.validate()?;
    let mut discs: Vec<Discriminant> = admissible_discriminants(config.filter(), (config.dmin, config.dmax))?.collect();
    if let Some(n) = config.sample {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        discs.shuffle(&mut rng);
        discs.truncate(n);
        discs.sort_by_key(|d| d.abs());
    }
    // class sets first, so workers only read them
    for &p in &config.primes {
        PrimeContext::get(p)?;
    }
    let run = || discs.par_iter().map(|&d| scan_one(d, &config.primes)).collect::<Result<Vec<_>>>();
    let rows = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let mut dyadic = vec![];
    let mut k = 1;
    while (1i64 << k) <= config.dmax {
        let (lo, hi) = (1i64 << k, (1i64 << (k + 1)) - 1);
        let bucket: Vec<&ScanRow> = rows.iter().filter(|r| (lo..=hi).contains(&r.d.abs())).collect();
        if !bucket.is_empty() {
            let mut tv: Vec<Rat> = bucket.iter().map(|r| r.tv.clone()).collect();
            let mut bm: Vec<Rat> = bucket.iter().map(|r| r.box_mass_y2.clone()).collect();
            dyadic.push(DyadicSummary {
                lo,
                hi,
                count: bucket.len(),
                median_tv: median(&mut tv).expect("nonempty"),
                median_box_mass_y2: median(&mut bm).expect("nonempty"),
            });
        }
        k += 1;
    }
    Ok(ScanReport { version: crate::VERSION.to_string(), config: config.clone(), config_hash: config.hash(), rows, dyadic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbase::rat;

    #[test]
    fn empty_and_invalid() {
        let cfg = ScanConfig { dmin: 5, dmax: 6, ..Default::default() };
        let r = scan(&cfg).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.to_csv().lines().nth(1), Some(CSV_HEADER));
        assert!(matches!(scan(&ScanConfig { dmax: 2, ..Default::default() }), Err(Error::Config(_))));
        assert!(matches!(scan(&ScanConfig { primes: vec![11, 11], ..Default::default() }), Err(Error::Config(_))));
        assert!(matches!(scan(&ScanConfig { primes: vec![9], ..Default::default() }), Err(Error::Config(_))));
        assert!(matches!(scan(&ScanConfig { threads: Some(0), ..Default::default() }), Err(Error::Config(_))));
    }

    #[test]
    fn small_scan_is_deterministic() {
        let cfg = ScanConfig { dmax: 600, threads: Some(3), ..Default::default() };
        let a = scan(&cfg).unwrap();
        let b = scan(&ScanConfig { threads: Some(1), ..cfg.clone() }).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.rows.windows(2).all(|w| w[0].d.abs() < w[1].d.abs()));
        for r in &a.rows {
            assert!(r.tv >= rat(0, 1) && r.tv <= rat(1, 1));
        }
        assert_ne!(cfg.hash(), ScanConfig { seed: 1, ..cfg.clone() }.hash());
        let s = scan(&ScanConfig { sample: Some(5), seed: 7, ..cfg.clone() }).unwrap();
        assert_eq!(s.rows.len(), 5);
        assert_eq!(s.to_csv(), scan(&ScanConfig { sample: Some(5), seed: 7, ..cfg }).unwrap().to_csv());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [rat(3, 1), rat(1, 1), rat(2, 1)]), Some(rat(2, 1)));
        assert_eq!(median(&mut [rat(1, 2), rat(1, 1)]), Some(rat(3, 4)));
        assert_eq!(median(&mut []), None);
    }
}
