//! Multiplier-bootstrap test of independence for bivariate count data, and
//! chi-squared comparators.
//!
//! For multipliers `xi_1..xi_n` with mean zero and unit variance, the
//! replicate statistic is the squared `L2` norm of
//! `n^{-1/2} sum_i (xi_i - mean(xi)) (V_{1,i}(u) - u)(V_{2,i}(v) - v)`,
//! which expands to the quadratic form `(1/n) alpha' (A o B) alpha` with
//! closed-form Gram matrices `A`, `B`. Observations in the same joint
//! category share a Gram row, so the form is evaluated over occupied cells.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::empirical::RankedSample;
use crate::error::{Error, Result};
use crate::grid::Accumulator;
use crate::samplers::RngStream;
use crate::statistics::{chi_squared, ContingencyTable, HatGram};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiplierLaw {
    #[default]
    Normal,
    Rademacher,
}

impl MultiplierLaw {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            MultiplierLaw::Normal => rng.sample(StandardNormal),
            MultiplierLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl std::str::FromStr for MultiplierLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(MultiplierLaw::Normal),
            "rademacher" => Ok(MultiplierLaw::Rademacher),
            _ => Err(Error::validation(format!("unknown multiplier law {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultiplierConfig {
    pub replicates: usize,
    pub law: MultiplierLaw,
    pub seed: u64,
}

impl MultiplierConfig {
    pub fn new(replicates: usize, seed: u64) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::validation("number of multiplier replicates must be at least 1"));
        }
        Ok(MultiplierConfig {
            replicates,
            law: MultiplierLaw::Normal,
            seed,
        })
    }

    pub fn with_law(mut self, law: MultiplierLaw) -> Self {
        self.law = law;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Multiplier,
    ChiSquaredMonteCarlo,
}

/// Outcome of a resampling test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    pub replicates: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicate_values: Option<Vec<f64>>,
}

impl TestReport {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// `(1/M) sum_m 1{S_m > S_n}`.
pub fn p_value_from_replicates(replicates: &[f64], statistic: f64) -> f64 {
    let exceed = replicates.iter().filter(|&&s| s > statistic).count();
    exceed as f64 / replicates.len() as f64
}

/// Cell-level kernel `prod_j int (V_j - u)(V_j' - u)` of a bivariate sample.
#[derive(Clone, Debug)]
pub struct MultiplierKernel {
    gram: HatGram,
    kernel: Vec<f64>,
}

impl MultiplierKernel {
    pub fn new(s: &RankedSample) -> Result<Self> {
        if s.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                expected: "2".into(),
                got: s.dim(),
            });
        }
        Ok(Self::from_gram(HatGram::new(s)))
    }

    pub fn from_gram(gram: HatGram) -> Self {
        let m = gram.occupied_cells();
        let mut kernel = vec![0.0; m * m];
        for a in 0..m {
            for b in a..m {
                let k = gram.cell_centered(a, b);
                kernel[a * m + b] = k;
                kernel[b * m + a] = k;
            }
        }
        MultiplierKernel { gram, kernel }
    }

    pub fn gram(&self) -> &HatGram {
        &self.gram
    }

    /// Replicate statistic for multipliers `xi`.
    pub fn replicate(&self, xi: &[f64]) -> Result<f64> {
        let n = self.gram.len();
        if xi.len() != n {
            return Err(Error::domain(format!("expected {n} multipliers, got {}", xi.len())));
        }
        let mean = xi.iter().sum::<f64>() / n as f64;
        let m = self.gram.occupied_cells();
        let mut beta = vec![0.0; m];
        for (i, &x) in xi.iter().enumerate() {
            beta[self.gram.cell_of(i)] += x - mean;
        }
        let mut acc = Accumulator::default();
        for a in 0..m {
            if beta[a] == 0.0 {
                continue;
            }
            let row = &self.kernel[a * m..(a + 1) * m];
            let inner: f64 = row.iter().zip(&beta).map(|(k, b)| k * b).sum();
            acc.add(beta[a] * inner);
        }
        // positive semi-definite form; clip rounding below zero
        Ok((acc.value() / n as f64).max(0.0))
    }

    /// Replicate statistics for `count` multiplier draws, replicate `m`
    /// drawing from `stream.index(m)`. Identical for any thread count.
    pub fn replicates(&self, law: MultiplierLaw, count: usize, stream: &RngStream) -> Vec<f64> {
        let n = self.gram.len();
        (0..count as u64)
            .into_par_iter()
            .map(|m| {
                let mut rng = stream.index(m).rng();
                let xi: Vec<f64> = (0..n).map(|_| law.draw(&mut rng)).collect();
                self.replicate(&xi).expect("multiplier count matches sample size")
            })
            .collect()
    }
}

/// One multiplier replicate `S^(m)` for the sample `s`.
pub fn multiplier_replicate(s: &RankedSample, xi: &[f64]) -> Result<f64> {
    if xi.len() != s.len() {
        return Err(Error::domain(format!("expected {} multipliers, got {}", s.len(), xi.len())));
    }
    MultiplierKernel::new(s)?.replicate(xi)
}

/// Multiplier-bootstrap test of independence with replicates retained.
pub fn independence_test(s: &RankedSample, cfg: &MultiplierConfig) -> Result<TestReport> {
    let stream = RngStream::new(cfg.seed).child("multiplier");
    let mut report = independence_test_with_stream(s, cfg.replicates, cfg.law, &stream)?;
    report.seed = cfg.seed;
    Ok(report)
}

/// As [`independence_test`], drawing multipliers from `stream`.
pub fn independence_test_with_stream(
    s: &RankedSample,
    replicates: usize,
    law: MultiplierLaw,
    stream: &RngStream,
) -> Result<TestReport> {
    if s.len() < 2 {
        return Err(Error::domain("independence test needs at least two observations"));
    }
    if replicates == 0 {
        return Err(Error::validation("number of multiplier replicates must be at least 1"));
    }
    let kernel = MultiplierKernel::new(s)?;
    let statistic = kernel.gram().cvm();
    let values = kernel.replicates(law, replicates, stream);
    // a constant margin makes the process vanish identically
    let constant = (0..s.dim()).any(|j| s.distinct(j).len() == 1);
    let p_value = if constant { 1.0 } else { p_value_from_replicates(&values, statistic) };
    Ok(TestReport {
        method: TestMethod::Multiplier,
        statistic,
        p_value,
        replicates,
        seed: 0,
        replicate_values: Some(values),
    })
}

/// Asymptotic chi-squared test: `(statistic, degrees of freedom, p-value)`.
/// A table with a single row or column has no degrees of freedom and
/// p-value 1.
pub fn chi_squared_asymptotic(t: &ContingencyTable) -> Result<(f64, usize, f64)> {
    let stat = chi_squared(t)?;
    let df = (t.rows() - 1) * (t.cols() - 1);
    if df == 0 {
        return Ok((stat, 0, 1.0));
    }
    let law = ChiSquared::new(df as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok((stat, df, law.sf(stat)))
}

// Tolerance for replicate ties against the observed value.
const ALMOST_ONE: f64 = 1.0 - 64.0 * f64::EPSILON;

/// Monte Carlo chi-squared test: replicate tables hold `n` draws from the
/// product of the observed marginal frequencies.
pub fn chi_squared_mc(t: &ContingencyTable, replicates: usize, seed: u64) -> Result<TestReport> {
    let mut report = chi_squared_mc_with_stream(t, replicates, &RngStream::new(seed).child("chi2-mc"))?;
    report.seed = seed;
    Ok(report)
}

pub fn chi_squared_mc_with_stream(t: &ContingencyTable, replicates: usize, stream: &RngStream) -> Result<TestReport> {
    if replicates == 0 {
        return Err(Error::validation("number of Monte Carlo replicates must be at least 1"));
    }
    let observed = chi_squared(t)?;
    let n = t.total() as usize;
    let cum = |totals: Vec<u64>| -> Vec<u64> {
        totals
            .iter()
            .scan(0u64, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    };
    let row_cum = cum(t.row_totals());
    let col_cum = cum(t.col_totals());
    let total = t.total();
    let values: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream.index(b).rng();
            let mut counts = vec![0u64; t.rows() * t.cols()];
            for _ in 0..n {
                let r = rng.random_range(0..total);
                let c = rng.random_range(0..total);
                let k = row_cum.partition_point(|&x| x <= r);
                let l = col_cum.partition_point(|&x| x <= c);
                counts[k * t.cols() + l] += 1;
            }
            let table = ContingencyTable::new(t.rows(), t.cols(), counts)
                .expect("replicate table has n > 0 observations")
                .compact();
            chi_squared(&table).expect("compacted table has positive margins")
        })
        .collect();
    let exceed = values.iter().filter(|&&x| x >= observed * ALMOST_ONE).count();
    Ok(TestReport {
        method: TestMethod::ChiSquaredMonteCarlo,
        statistic: observed,
        p_value: exceed as f64 / replicates as f64,
        replicates,
        seed: 0,
        replicate_values: Some(values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample3() -> RankedSample {
        RankedSample::rank(&[[0.0, 1.0], [1.0, 0.0], [1.0, 2.0]]).unwrap()
    }

    #[test]
    fn constant_multipliers_vanish() {
        assert!(multiplier_replicate(&sample3(), &[0.7, 0.7, 0.7]).unwrap() < 1e-30);
    }

    #[test]
    fn replicate_is_quadratic() {
        let s = sample3();
        let a = multiplier_replicate(&s, &[1.0, -1.0, 0.0]).unwrap();
        let b = multiplier_replicate(&s, &[3.0, -3.0, 0.0]).unwrap();
        assert!(a > 0.0);
        assert!((b - 9.0 * a).abs() < 1e-14);
        assert!(multiplier_replicate(&s, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn p_value_counting() {
        assert_eq!(p_value_from_replicates(&[0.1, 0.2, 0.3, 0.4], 0.25), 0.5);
        // strict inequality: ties do not count
        assert_eq!(p_value_from_replicates(&[0.25, 0.25], 0.25), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(MultiplierConfig::new(0, 1).is_err());
        assert_eq!("rademacher".parse::<MultiplierLaw>().unwrap(), MultiplierLaw::Rademacher);
        assert!("cauchy".parse::<MultiplierLaw>().is_err());
    }

    #[test]
    fn test_is_deterministic() {
        let s = RankedSample::rank(&[[0.0, 1.0], [1.0, 0.0], [1.0, 2.0], [2.0, 2.0], [0.0, 0.0]]).unwrap();
        let cfg = MultiplierConfig::new(100, 99).unwrap();
        let a = independence_test(&s, &cfg).unwrap();
        let b = independence_test(&s, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed, 99);
        let c = independence_test(&s, &MultiplierConfig::new(100, 100).unwrap()).unwrap();
        assert_ne!(a.replicate_values, c.replicate_values);
        let r = independence_test(&s, &cfg.with_law(MultiplierLaw::Rademacher)).unwrap();
        assert!(r.replicate_values.unwrap().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn constant_margin_never_rejects() {
        let s = RankedSample::rank(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]).unwrap();
        let r = independence_test(&s, &MultiplierConfig::new(50, 1).unwrap()).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn test_rejects_bad_dimension() {
        let s = RankedSample::rank(&[[0.0, 1.0, 2.0], [1.0, 0.0, 2.0]]).unwrap();
        assert!(matches!(
            independence_test(&s, &MultiplierConfig::new(10, 1).unwrap()),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn chi2_mc_examples() {
        let diag = ContingencyTable::from_rows(&[vec![50, 0], vec![0, 50]]).unwrap();
        let r = chi_squared_mc(&diag, 1000, 5).unwrap();
        assert_eq!(r.statistic, 100.0);
        assert_eq!(r.p_value, 0.0);
        assert_eq!(r, chi_squared_mc(&diag, 1000, 5).unwrap());

        let flat = ContingencyTable::from_rows(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(chi_squared_mc(&flat, 200, 5).unwrap().p_value, 1.0);

        let bad = ContingencyTable::from_rows(&[vec![1, 0], vec![1, 0]]).unwrap();
        assert!(matches!(chi_squared_mc(&bad, 10, 1), Err(Error::DegenerateMargin(_))));
    }

    #[test]
    fn chi2_asymptotic() {
        let diag = ContingencyTable::from_rows(&[vec![5, 0], vec![0, 5]]).unwrap();
        let (stat, df, p) = chi_squared_asymptotic(&diag).unwrap();
        assert_eq!((stat, df), (10.0, 1));
        // P(chi2_1 > 10) = erfc(sqrt(5))
        assert!((p - 0.001_565_402_258_002_549_7).abs() < 1e-12);
        let single = ContingencyTable::from_rows(&[vec![3, 4]]).unwrap();
        assert_eq!(chi_squared_asymptotic(&single).unwrap().2, 1.0);
    }
}
