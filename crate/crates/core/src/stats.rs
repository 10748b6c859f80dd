//! Summary statistics of a sample, addressable by name and composable into a
//! single summary vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::empirical_quantile;

/// A composed summary `T(y)`.
pub type SummaryVector = Vec<f64>;

/// Microsatellite allele sizes for three populations, stored
/// `[locus][population][gene copy]` in one flat buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicrosatDataset {
    n_loci: usize,
    copies_per_pop: usize,
    sizes: Vec<i32>,
}

pub const N_POPULATIONS: usize = 3;

impl MicrosatDataset {
    pub fn new(n_loci: usize, copies_per_pop: usize, sizes: Vec<i32>) -> Result<Self> {
        if n_loci == 0 || copies_per_pop == 0 {
            return Err(Error::domain("microsatellite dataset needs at least one locus and one copy"));
        }
        if sizes.len() != n_loci * N_POPULATIONS * copies_per_pop {
            return Err(Error::shape(format!(
                "expected {} allele sizes for {n_loci} loci x 3 populations x {copies_per_pop} copies, got {}",
                n_loci * N_POPULATIONS * copies_per_pop,
                sizes.len()
            )));
        }
        Ok(Self {
            n_loci,
            copies_per_pop,
            sizes,
        })
    }

    pub fn n_loci(&self) -> usize {
        self.n_loci
    }

    pub fn copies_per_pop(&self) -> usize {
        self.copies_per_pop
    }

    /// Allele sizes at `locus` for population `pop` (1-based).
    pub fn copies(&self, locus: usize, pop: usize) -> &[i32] {
        let start = (locus * N_POPULATIONS + (pop - 1)) * self.copies_per_pop;
        &self.sizes[start..start + self.copies_per_pop]
    }

    pub fn sizes(&self) -> &[i32] {
        &self.sizes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Scalar(Vec<f64>),
    Microsat(MicrosatDataset),
}

impl Sample {
    /// Number of observations: values for scalar data, loci for genetic data.
    pub fn len(&self) -> usize {
        match self {
            Sample::Scalar(v) => v.len(),
            Sample::Microsat(m) => m.n_loci(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A named summary statistic. Every statistic here is scalar-valued.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Mean,
    Median,
    Variance,
    Mad,
    /// Raw moment `n⁻¹ Σ yᵢᵏ`.
    Moment(u32),
    /// Empirical quantile at the given level, stored in whole percent.
    Quantile(u32),
    /// `(δμ)²` between two populations (1-based, ordered `j1 < j2` by the parser).
    DeltaMuSq(u8, u8),
}

impl Statistic {
    pub fn output_dim(&self) -> usize {
        1
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn is_scalar_data(&self) -> bool {
        !matches!(self, Statistic::DeltaMuSq(..))
    }

    pub fn evaluate(&self, sample: &Sample) -> Result<f64> {
        match (self, sample) {
            (Statistic::DeltaMuSq(a, b), Sample::Microsat(m)) => stat_delta_mu_sq(m, *a as usize, *b as usize),
            (Statistic::DeltaMuSq(..), Sample::Scalar(_)) => {
                Err(Error::domain("(δμ)² needs microsatellite data"))
            }
            (_, Sample::Microsat(_)) => Err(Error::domain(format!("`{self}` needs scalar data"))),
            (Statistic::Mean, Sample::Scalar(y)) => stat_mean(y),
            (Statistic::Median, Sample::Scalar(y)) => stat_median(y),
            (Statistic::Variance, Sample::Scalar(y)) => stat_variance(y),
            (Statistic::Mad, Sample::Scalar(y)) => stat_mad(y),
            (Statistic::Moment(k), Sample::Scalar(y)) => stat_moment(y, *k),
            (Statistic::Quantile(pct), Sample::Scalar(y)) => stat_quantile(y, f64::from(*pct) / 100.0),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Mean => f.write_str("mean"),
            Statistic::Median => f.write_str("median"),
            Statistic::Variance => f.write_str("variance"),
            Statistic::Mad => f.write_str("mad"),
            Statistic::Moment(k) => write!(f, "moment{k}"),
            Statistic::Quantile(p) => write!(f, "q{p}"),
            Statistic::DeltaMuSq(a, b) => write!(f, "dmu{a}{b}"),
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("unknown statistic `{s}`"));
        Ok(match s {
            "mean" => Statistic::Mean,
            "median" => Statistic::Median,
            "variance" => Statistic::Variance,
            "mad" => Statistic::Mad,
            _ => {
                if let Some(k) = s.strip_prefix("moment") {
                    let k: u32 = k.parse().map_err(|_| bad())?;
                    if k == 0 {
                        return Err(bad());
                    }
                    Statistic::Moment(k)
                } else if let Some(pair) = s.strip_prefix("dmu") {
                    let b = pair.as_bytes();
                    if b.len() != 2 {
                        return Err(bad());
                    }
                    let (x, y) = (b[0].wrapping_sub(b'0'), b[1].wrapping_sub(b'0'));
                    if !(1..=3).contains(&x) || !(1..=3).contains(&y) || x == y {
                        return Err(bad());
                    }
                    Statistic::DeltaMuSq(x.min(y), x.max(y))
                } else if let Some(p) = s.strip_prefix('q') {
                    let p: u32 = p.parse().map_err(|_| bad())?;
                    if !(1..=100).contains(&p) {
                        return Err(bad());
                    }
                    Statistic::Quantile(p)
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

impl Serialize for Statistic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Statistic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn non_empty(y: &[f64]) -> Result<()> {
    if y.is_empty() {
        Err(Error::domain("statistic of an empty sample"))
    } else {
        Ok(())
    }
}

pub fn stat_mean(y: &[f64]) -> Result<f64> {
    non_empty(y)?;
    Ok(y.iter().sum::<f64>() / y.len() as f64)
}

/// Sample median; the average of the two central order statistics for even n.
pub fn stat_median(y: &[f64]) -> Result<f64> {
    non_empty(y)?;
    let mut buf = y.to_vec();
    Ok(median_in_place(&mut buf))
}

fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    let (lower, upper_mid, _) = buf.select_nth_unstable_by(n / 2, f64::total_cmp);
    let upper_mid = *upper_mid;
    if n % 2 == 1 {
        upper_mid
    } else {
        let lower_mid = lower.iter().copied().max_by(f64::total_cmp).unwrap_or(upper_mid);
        0.5 * (lower_mid + upper_mid)
    }
}

/// Unbiased sample variance (divisor n − 1).
pub fn stat_variance(y: &[f64]) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::domain("sample variance needs at least two values"));
    }
    let m = stat_mean(y)?;
    Ok(y.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (y.len() - 1) as f64)
}

/// Median absolute deviation `med(|y − med(y)|)`, unscaled.
pub fn stat_mad(y: &[f64]) -> Result<f64> {
    non_empty(y)?;
    let mut buf = y.to_vec();
    let med = median_in_place(&mut buf);
    for v in buf.iter_mut() {
        *v = (*v - med).abs();
    }
    Ok(median_in_place(&mut buf))
}

pub fn stat_moment(y: &[f64], k: u32) -> Result<f64> {
    non_empty(y)?;
    let k = i32::try_from(k).map_err(|_| Error::domain("moment order too large"))?;
    Ok(y.iter().map(|x| x.powi(k)).sum::<f64>() / y.len() as f64)
}

pub fn stat_quantile(y: &[f64], p: f64) -> Result<f64> {
    empirical_quantile(y, p)
}

/// `(δμ)²_{j1,j2}`: mean over loci of the squared difference between the
/// populations' mean allele sizes.
pub fn stat_delta_mu_sq(data: &MicrosatDataset, j1: usize, j2: usize) -> Result<f64> {
    for j in [j1, j2] {
        if !(1..=N_POPULATIONS).contains(&j) {
            return Err(Error::domain(format!("population index {j} outside 1..=3")));
        }
    }
    if j1 == j2 {
        return Err(Error::domain("(δμ)² needs two distinct populations"));
    }
    let copies = data.copies_per_pop() as f64;
    // sums are exact integers; one division per locus keeps the result symmetric in (j1, j2)
    let total: f64 = (0..data.n_loci())
        .map(|l| {
            let s1: i64 = data.copies(l, j1).iter().map(|&x| i64::from(x)).sum();
            let s2: i64 = data.copies(l, j2).iter().map(|&x| i64::from(x)).sum();
            let diff = (s1 - s2) as f64 / copies;
            diff * diff
        })
        .sum();
    Ok(total / data.n_loci() as f64)
}

/// Concatenates the outputs of `specs` on `sample`, in order.
pub fn compose_statistics(specs: &[Statistic], sample: &Sample) -> Result<SummaryVector> {
    specs
        .iter()
        .map(|s| {
            s.evaluate(sample).map_err(|e| Error::Statistic {
                statistic: s.name(),
                source: Box::new(e),
            })
        })
        .collect()
}
