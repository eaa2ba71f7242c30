//! Univariate discrete margins.
//!
//! A margin with categories `0..=K` is stored through its probability mass
//! function and partial sums `F(k)`. All arithmetic happens on the integer
//! index scale; the support labels `A(k)` are carried for display only.
//!
//! The range set `R = {0, F(0), ..., F(K)}` partitions `[0, 1]` into cells.
//! Vertex `v` of that partition sits at `F(v - 1)`, so vertex `0` is the
//! origin and vertex `K + 1` is `1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a user supplied pmf.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Omitted tail mass allowed when truncating an infinite-support family.
pub const TAIL_TRUNCATION: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMargin {
    support: Vec<f64>,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

/// The barycentric coordinate of `u` inside its bracketing range cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaWeight {
    pub weight: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Position of a probability inside the range partition, in vertex indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Bracket {
    pub lo: usize,
    pub hi: usize,
    pub weight: f64,
}

impl DiscreteMargin {
    /// Builds a margin from support labels and probabilities.
    pub fn new(support: Vec<f64>, pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::validation("margin needs at least one category"));
        }
        if support.len() != pmf.len() {
            return Err(Error::validation(format!(
                "support has {} labels but pmf has {} entries",
                support.len(),
                pmf.len()
            )));
        }
        if support.iter().any(|a| !a.is_finite()) {
            return Err(Error::validation("support labels must be finite"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("support labels must be strictly increasing"));
        }
        if let Some(p) = pmf.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::validation(format!("invalid probability {p}")));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::validation(format!(
                "pmf sums to {total}, expected 1 within {MASS_TOLERANCE:e}"
            )));
        }
        let cdf = partial_sums(&pmf);
        Ok(DiscreteMargin { support, pmf, cdf })
    }

    /// Margin on the index support `0..pmf.len()`.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        let support = (0..pmf.len()).map(|k| k as f64).collect();
        Self::new(support, pmf)
    }

    /// Empirical margin from category counts. The cdf entries are the exact
    /// rationals `cum_k / n` rounded once.
    pub fn from_counts(support: Vec<f64>, counts: &[usize]) -> Result<Self> {
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(Error::validation("no observations"));
        }
        if support.len() != counts.len() {
            return Err(Error::validation("support and counts differ in length"));
        }
        let nf = n as f64;
        let pmf: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
        let mut cum = 0usize;
        let cdf = counts
            .iter()
            .map(|&c| {
                cum += c;
                cum as f64 / nf
            })
            .collect();
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("support labels must be strictly increasing"));
        }
        Ok(DiscreteMargin { support, pmf, cdf })
    }

    /// Binomial(`trials`, `p`) on `0..=trials`.
    pub fn binomial(trials: u32, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("binomial p = {p} outside [0, 1]")));
        }
        let n = trials as i32;
        let mut coef = 1.0f64;
        let pmf = (0..=n)
            .map(|k| {
                if k > 0 {
                    coef *= f64::from(n - k + 1) / f64::from(k);
                }
                coef * p.powi(k) * (1.0 - p).powi(n - k)
            })
            .collect();
        Self::from_pmf(renormalize(pmf))
    }

    /// Poisson(`mean`) truncated once the omitted tail drops below
    /// [`TAIL_TRUNCATION`], then renormalized.
    pub fn poisson(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::domain(format!("poisson mean = {mean} must be positive")));
        }
        let mut pmf = Vec::new();
        let mut term = (-mean).exp();
        let mut cum = 0.0;
        let mut k = 0u32;
        loop {
            pmf.push(term);
            cum += term;
            // past the mode the terms decrease, so the tail is bounded by 1 - cum
            if f64::from(k) >= mean && 1.0 - cum < TAIL_TRUNCATION {
                break;
            }
            k += 1;
            term *= mean / f64::from(k);
            if k > 100_000 {
                return Err(Error::Numeric("poisson truncation did not converge".into()));
            }
        }
        Self::from_pmf(renormalize(pmf))
    }

    /// Geometric(`p`) counting failures before the first success, support
    /// `{0, 1, 2, ...}` with mass `p (1 - p)^k`, truncated and renormalized.
    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::domain(format!("geometric p = {p} outside (0, 1]")));
        }
        let q = 1.0 - p;
        let mut pmf = vec![p];
        let mut tail = q;
        while tail >= TAIL_TRUNCATION {
            pmf.push(p * tail);
            tail *= q;
        }
        Self::from_pmf(renormalize(pmf))
    }

    /// Number of categories `K + 1`.
    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// Largest category index `K`.
    pub fn max_index(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// `F(k)`, with `F(-1) = 0`.
    pub fn cdf(&self, k: isize) -> Result<f64> {
        if k < -1 || k > self.max_index() as isize {
            return Err(Error::domain(format!(
                "category index {k} outside [-1, {}]",
                self.max_index()
            )));
        }
        Ok(self.cdf_at(k))
    }

    #[inline]
    pub(crate) fn cdf_at(&self, k: isize) -> f64 {
        if k < 0 {
            0.0
        } else {
            self.cdf[k as usize]
        }
    }

    /// Width of range cell `k`, i.e. `F(k) - F(k - 1)`.
    #[inline]
    pub fn cell_width(&self, k: usize) -> f64 {
        self.cdf[k] - self.cdf_at(k as isize - 1)
    }

    /// Value of range vertex `v`, i.e. `F(v - 1)`.
    #[inline]
    pub fn vertex(&self, v: usize) -> f64 {
        self.cdf_at(v as isize - 1)
    }

    /// The range set `{0, F(0), ..., F(K)}`, duplicates included.
    pub fn range(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.cdf.iter().copied()).collect()
    }

    /// Pseudo-inverse `min{k : F(k) >= u}` for `u` in `(0, 1]`.
    pub fn quantile(&self, u: f64) -> Result<usize> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::domain(format!("quantile level {u} outside (0, 1]")));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    pub(crate) fn quantile_unchecked(&self, u: f64) -> usize {
        self.cdf.partition_point(|&f| f < u).min(self.max_index())
    }

    /// Piecewise-linear continuation of the cdf: linear over `[k - 1, k)`
    /// with slope `p_k`.
    pub fn continuation_cdf(&self, x: f64) -> f64 {
        if x < -1.0 {
            return 0.0;
        }
        if x >= self.max_index() as f64 {
            return 1.0;
        }
        let k = (x.floor() + 1.0) as usize;
        self.cdf_at(k as isize - 1) + self.cell_width(k) * (x - k as f64 + 1.0)
    }

    /// Inverse of [`continuation_cdf`](Self::continuation_cdf), with `0 -> -1`.
    /// Zero-mass categories are skipped (left-continuous inverse).
    pub fn continuation_quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!("probability {u} outside [0, 1]")));
        }
        if u == 0.0 {
            return Ok(-1.0);
        }
        let k = self.quantile_unchecked(u);
        let lo = self.cdf_at(k as isize - 1);
        Ok(k as f64 - 1.0 + (u - lo) / self.cell_width(k))
    }

    /// `lambda_F(u)` together with the bracketing range elements `u-`, `u+`.
    /// Arguments outside `[0, 1]` are clamped.
    pub fn lambda_weight(&self, u: f64) -> LambdaWeight {
        let u = u.clamp(0.0, 1.0);
        let range = self.range();
        let upper = range[range.partition_point(|&r| r < u).min(range.len() - 1)];
        let lower = range[range.partition_point(|&r| r <= u).saturating_sub(1)];
        let weight = if lower != upper {
            (u - lower) / (upper - lower)
        } else {
            1.0
        };
        LambdaWeight { weight, lower, upper }
    }

    /// Locates `u` in the range partition using the upper-closed cell
    /// convention `F(k - 1) < u <= F(k)`.
    #[inline]
    pub(crate) fn bracket(&self, u: f64) -> Bracket {
        if u <= 0.0 {
            return Bracket { lo: 0, hi: 0, weight: 1.0 };
        }
        let k = self.quantile_unchecked(u);
        let lo = self.cdf_at(k as isize - 1);
        let weight = ((u - lo) / self.cell_width(k)).clamp(0.0, 1.0);
        Bracket { lo: k, hi: k + 1, weight }
    }
}

/// Partial sums with every entry from the last positive mass onward pinned
/// to exactly 1.
fn partial_sums(pmf: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = pmf
        .iter()
        .map(|p| {
            acc += p;
            acc.min(1.0)
        })
        .collect();
    let last_positive = pmf.iter().rposition(|&p| p > 0.0).unwrap_or(pmf.len() - 1);
    for f in &mut cdf[last_positive..] {
        *f = 1.0;
    }
    cdf
}

fn renormalize(mut pmf: Vec<f64>) -> Vec<f64> {
    let total: f64 = pmf.iter().sum();
    for p in &mut pmf {
        *p /= total;
    }
    pmf
}

/// A named margin family or an explicit pmf.
///
/// Text syntax: `binomial(3, 0.5)`, `poisson(20)`, `geometric(0.5)`,
/// `pmf(0.2, 0.3, 0.5)`, plus the shorthands `F1`..`F4` for the four
/// margins of the standard simulation grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MarginSpec {
    Binomial { trials: u32, p: f64 },
    Poisson { mean: f64 },
    Geometric { p: f64 },
    Pmf(Vec<f64>),
}

impl MarginSpec {
    pub fn build(&self) -> Result<DiscreteMargin> {
        match self {
            MarginSpec::Binomial { trials, p } => DiscreteMargin::binomial(*trials, *p),
            MarginSpec::Poisson { mean } => DiscreteMargin::poisson(*mean),
            MarginSpec::Geometric { p } => DiscreteMargin::geometric(*p),
            MarginSpec::Pmf(pmf) => DiscreteMargin::from_pmf(pmf.clone()),
        }
    }
}

impl fmt::Display for MarginSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarginSpec::Binomial { trials, p } => write!(f, "binomial({trials}, {p})"),
            MarginSpec::Poisson { mean } => write!(f, "poisson({mean})"),
            MarginSpec::Geometric { p } => write!(f, "geometric({p})"),
            MarginSpec::Pmf(pmf) => {
                let parts: Vec<String> = pmf.iter().map(|p| p.to_string()).collect();
                write!(f, "pmf({})", parts.join(", "))
            }
        }
    }
}

impl FromStr for MarginSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_uppercase().as_str() {
            "F1" => return Ok(MarginSpec::Binomial { trials: 3, p: 0.5 }),
            "F2" => return Ok(MarginSpec::Poisson { mean: 1.0 }),
            "F3" => return Ok(MarginSpec::Poisson { mean: 20.0 }),
            "F4" => return Ok(MarginSpec::Geometric { p: 0.5 }),
            _ => {}
        }
        let bad = || Error::validation(format!("cannot parse margin spec {s:?}"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim().to_ascii_lowercase();
        let args: Vec<f64> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name.as_str(), args.as_slice()) {
            ("binomial", &[n, p]) if n >= 0.0 && n.fract() == 0.0 => Ok(MarginSpec::Binomial {
                trials: n as u32,
                p,
            }),
            ("poisson", &[mean]) => Ok(MarginSpec::Poisson { mean }),
            ("geometric", &[p]) => Ok(MarginSpec::Geometric { p }),
            ("pmf", probs) if !probs.is_empty() => Ok(MarginSpec::Pmf(probs.to_vec())),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for MarginSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MarginSpec> for String {
    fn from(m: MarginSpec) -> String {
        m.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bern() -> DiscreteMargin {
        DiscreteMargin::from_pmf(vec![0.5, 0.5]).unwrap()
    }

    fn binom3() -> DiscreteMargin {
        DiscreteMargin::from_pmf(vec![0.125, 0.375, 0.375, 0.125]).unwrap()
    }

    #[test]
    fn cdf_values() {
        assert_eq!(bern().cdf(0).unwrap(), 0.5);
        assert_eq!(binom3().cdf(-1).unwrap(), 0.0);
        assert_eq!(binom3().cdf(1).unwrap(), 0.5);
        assert!(matches!(binom3().cdf(4), Err(Error::Domain(_))));
        assert!(matches!(binom3().cdf(-2), Err(Error::Domain(_))));
    }

    #[test]
    fn quantile_values() {
        assert_eq!(bern().quantile(0.5).unwrap(), 0);
        assert_eq!(bern().quantile(0.500001).unwrap(), 1);
        assert_eq!(binom3().quantile(0.2).unwrap(), 1);
        assert!(bern().quantile(0.0).is_err());
        assert!(bern().quantile(1.0 + 1e-9).is_err());
        assert!(bern().quantile(f64::NAN).is_err());
    }

    #[test]
    fn continuation_cdf_values() {
        assert_eq!(bern().continuation_cdf(-0.5), 0.25);
        assert_eq!(bern().continuation_cdf(0.0), 0.5);
        assert_eq!(binom3().continuation_cdf(0.5), 0.3125);
        assert_eq!(bern().continuation_cdf(-7.0), 0.0);
        assert_eq!(bern().continuation_cdf(1.0), 1.0);
        assert_eq!(bern().continuation_cdf(42.0), 1.0);
    }

    #[test]
    fn continuation_quantile_values() {
        assert_eq!(bern().continuation_quantile(0.75).unwrap(), 0.5);
        assert_eq!(binom3().continuation_quantile(0.0).unwrap(), -1.0);
        assert_eq!(bern().continuation_quantile(0.5).unwrap(), 0.0);
        assert!(bern().continuation_quantile(-0.1).is_err());
        assert!(bern().continuation_quantile(1.1).is_err());
    }

    #[test]
    fn continuation_quantile_skips_zero_mass() {
        let m = DiscreteMargin::from_pmf(vec![0.5, 0.0, 0.5]).unwrap();
        // u just above 0.5 lands in category 2, whose ramp spans [1, 2)
        let x = m.continuation_quantile(0.75).unwrap();
        assert!((x - 1.5).abs() < 1e-15);
        assert_eq!(m.continuation_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn lambda_weight_values() {
        let w = bern().lambda_weight(0.25);
        assert_eq!((w.weight, w.lower, w.upper), (0.5, 0.0, 0.5));
        let w = bern().lambda_weight(0.5);
        assert_eq!((w.weight, w.lower, w.upper), (1.0, 0.5, 0.5));
        let w = binom3().lambda_weight(0.25);
        assert!((w.weight - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!((w.lower, w.upper), (0.125, 0.5));
        let w = bern().lambda_weight(0.0);
        assert_eq!((w.weight, w.lower, w.upper), (1.0, 0.0, 0.0));
    }

    #[test]
    fn zero_mass_category_has_degenerate_cell() {
        let m = DiscreteMargin::from_pmf(vec![0.25, 0.0, 0.75]).unwrap();
        assert_eq!(m.range(), vec![0.0, 0.25, 0.25, 1.0]);
        assert_eq!(m.cell_width(1), 0.0);
        let w = m.lambda_weight(0.25);
        assert_eq!(w.weight, 1.0);
    }

    #[test]
    fn trailing_zero_mass_pins_cdf() {
        let m = DiscreteMargin::from_pmf(vec![0.1, 0.2, 0.7, 0.0]).unwrap();
        assert_eq!(m.cdf_values()[2], 1.0);
        assert_eq!(m.cell_width(3), 0.0);
    }

    #[test]
    fn validation_errors() {
        assert!(DiscreteMargin::from_pmf(vec![]).is_err());
        assert!(DiscreteMargin::from_pmf(vec![0.5, 0.6]).is_err());
        assert!(DiscreteMargin::from_pmf(vec![-0.5, 1.5]).is_err());
        assert!(DiscreteMargin::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMargin::new(vec![0.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn families() {
        let b = DiscreteMargin::binomial(3, 0.5).unwrap();
        assert_eq!(b.pmf(), &[0.125, 0.375, 0.375, 0.125]);
        let p = DiscreteMargin::poisson(1.0).unwrap();
        assert!((p.pmf()[0] - (-1.0f64).exp()).abs() < 1e-12);
        let p20 = DiscreteMargin::poisson(20.0).unwrap();
        assert!(p20.len() > 45 && p20.len() < 70, "len {}", p20.len());
        let g = DiscreteMargin::geometric(0.5).unwrap();
        assert!((g.pmf()[0] - 0.5).abs() < 1e-12);
        assert!((g.pmf()[3] - 0.0625).abs() < 1e-12);
        assert_eq!(*g.cdf_values().last().unwrap(), 1.0);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("F1".parse::<MarginSpec>().unwrap(), MarginSpec::Binomial { trials: 3, p: 0.5 });
        assert_eq!("poisson(20)".parse::<MarginSpec>().unwrap(), MarginSpec::Poisson { mean: 20.0 });
        assert_eq!(
            " pmf(0.5, 0.5) ".parse::<MarginSpec>().unwrap(),
            MarginSpec::Pmf(vec![0.5, 0.5])
        );
        assert!("binomial(3)".parse::<MarginSpec>().is_err());
        assert!("cauchy(1)".parse::<MarginSpec>().is_err());
        let spec = MarginSpec::Geometric { p: 0.5 };
        assert_eq!(spec.to_string().parse::<MarginSpec>().unwrap(), spec);
    }

    #[test]
    fn from_counts_is_exact() {
        let m = DiscreteMargin::from_counts(vec![1.0, 2.0, 5.0], &[1, 1, 1]).unwrap();
        assert_eq!(m.cdf_values(), &[1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }

    fn arb_margin() -> impl Strategy<Value = DiscreteMargin> {
        prop::collection::vec(1u32..20, 1..7).prop_map(|w| {
            let total: u32 = w.iter().sum();
            let pmf = w.iter().map(|&x| f64::from(x) / f64::from(total)).collect();
            DiscreteMargin::from_pmf(pmf).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn continuation_agrees_on_grid(m in arb_margin()) {
            for k in -1..=(m.max_index() as isize) {
                prop_assert_eq!(m.continuation_cdf(k as f64), m.cdf(k).unwrap());
            }
        }

        #[test]
        fn continuation_monotone(m in arb_margin(), a in -2.0f64..8.0, b in -2.0f64..8.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(m.continuation_cdf(lo) <= m.continuation_cdf(hi) + 1e-15);
        }

        #[test]
        fn continuation_round_trip(m in arb_margin(), u in 1e-9f64..=1.0) {
            let x = m.continuation_quantile(u).unwrap();
            prop_assert!((m.continuation_cdf(x) - u).abs() <= 1e-12);
        }

        #[test]
        fn galois_property(m in arb_margin(), u in 1e-12f64..=1.0) {
            let q = m.quantile(u).unwrap();
            for k in 0..=m.max_index() {
                prop_assert_eq!(u <= m.cdf(k as isize).unwrap(), q <= k);
            }
        }

        #[test]
        fn lambda_reconstructs(m in arb_margin(), u in 0.0f64..=1.0) {
            let w = m.lambda_weight(u);
            prop_assert!((0.0..=1.0).contains(&w.weight));
            prop_assert!(w.lower <= u && u <= w.upper);
            if w.lower != w.upper {
                let r = (1.0 - w.weight) * w.lower + w.weight * w.upper;
                prop_assert!((r - u).abs() <= 1e-12);
            }
        }
    }
}
