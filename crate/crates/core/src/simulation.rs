//! Monte Carlo study of level and power: bivariate copula samples pushed
//! through discrete margins, then tested for independence with the
//! multiplier test, the asymptotic chi-squared test and the Monte Carlo
//! chi-squared test.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::RankedSample;
use crate::error::{Error, Result};
use crate::inference::{chi_squared_asymptotic, chi_squared_mc_with_stream, independence_test_with_stream, MultiplierLaw};
use crate::io::Record;
use crate::margin::{DiscreteMargin, MarginSpec};
use crate::samplers::{discretize, sample_copula, tau_to_parameter, CopulaFamily, CopulaKind, RngStream};
use crate::statistics::ContingencyTable;

/// Copula family with its Kendall's tau: `independence`, `clayton(0.2)`,
/// `gaussian(0.1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CopulaSpec {
    pub kind: CopulaKind,
    pub tau: f64,
}

impl CopulaSpec {
    pub fn family(&self) -> Result<CopulaFamily> {
        tau_to_parameter(self.kind, self.tau)
    }
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CopulaKind::Independence => write!(f, "independence"),
            kind => write!(f, "{kind}({})", self.tau),
        }
    }
}

impl FromStr for CopulaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::validation(format!("cannot parse copula spec {s:?}"));
        let (name, tau) = match s.find('(') {
            None => (s, None),
            Some(open) if s.ends_with(')') => {
                let tau = s[open + 1..s.len() - 1].trim().parse::<f64>().map_err(|_| bad())?;
                (&s[..open], Some(tau))
            }
            Some(_) => return Err(bad()),
        };
        let kind = match name.trim().to_ascii_lowercase().as_str() {
            "independence" | "pi" => CopulaKind::Independence,
            "clayton" => CopulaKind::Clayton,
            "gaussian" | "normal" => CopulaKind::Gaussian,
            _ => return Err(bad()),
        };
        let spec = CopulaSpec {
            kind,
            tau: tau.unwrap_or(0.0),
        };
        spec.family()?;
        Ok(spec)
    }
}

impl TryFrom<String> for CopulaSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CopulaSpec> for String {
    fn from(c: CopulaSpec) -> String {
        c.to_string()
    }
}

/// One cell of the simulation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub copula: CopulaSpec,
    pub margins: [MarginSpec; 2],
    pub n: usize,
    pub reps: usize,
    pub multipliers: usize,
    pub alpha: f64,
    pub seed: u64,
    pub chi2_mc_replicates: usize,
    pub law: MultiplierLaw,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::validation(format!("sample size n = {} must be at least 2", self.n)));
        }
        if self.reps == 0 {
            return Err(Error::validation("number of repetitions must be at least 1"));
        }
        if self.multipliers == 0 {
            return Err(Error::validation("number of multiplier replicates must be at least 1"));
        }
        if self.chi2_mc_replicates == 0 {
            return Err(Error::validation("number of Monte Carlo chi-squared replicates must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::validation(format!("level alpha = {} outside (0, 1)", self.alpha)));
        }
        self.copula.family()?;
        for m in &self.margins {
            m.build()?;
        }
        Ok(())
    }

    /// Identity of the scenario for seeding: depends on what is simulated,
    /// not on where the scenario sits in a plan or how many repetitions run.
    pub fn key(&self) -> String {
        format!("{}|{}|{}|n={}", self.copula, self.margins[0], self.margins[1], self.n)
    }

    fn stream(&self) -> RngStream {
        RngStream::new(self.seed).child("scenario").child(&self.key())
    }
}

/// Decisions of the three tests on one simulated sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decisions {
    pub multiplier: bool,
    pub chi_squared: bool,
    pub chi_squared_mc: bool,
}

struct Prepared {
    family: CopulaFamily,
    margins: [DiscreteMargin; 2],
}

impl Prepared {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Prepared {
            family: cfg.copula.family()?,
            margins: [cfg.margins[0].build()?, cfg.margins[1].build()?],
        })
    }
}

fn repetition(cfg: &ScenarioConfig, prep: &Prepared, stream: &RngStream) -> Result<Decisions> {
    let points = sample_copula(prep.family, cfg.n, &mut stream.child("copula").rng());
    let obs = discretize(&points, &prep.margins[0], &prep.margins[1])?;
    let sample = RankedSample::rank(&obs)?;
    let sn = independence_test_with_stream(&sample, cfg.multipliers, cfg.law, &stream.child("multiplier"))?;
    let table = ContingencyTable::from_sample(&sample)?;
    let (_, _, p_chi2) = chi_squared_asymptotic(&table)?;
    let mc = chi_squared_mc_with_stream(&table, cfg.chi2_mc_replicates, &stream.child("chi2-mc"))?;
    Ok(Decisions {
        multiplier: sn.p_value < cfg.alpha,
        chi_squared: p_chi2 < cfg.alpha,
        chi_squared_mc: mc.p_value < cfg.alpha,
    })
}

/// Test decisions for repetition `r` of a scenario.
pub fn run_repetition(cfg: &ScenarioConfig, r: usize) -> Result<Decisions> {
    let prep = Prepared::new(cfg)?;
    repetition(cfg, &prep, &cfg.stream().index(r as u64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    /// Rejection counts for the multiplier, chi-squared and Monte Carlo
    /// chi-squared tests.
    pub rejections: [u64; 3],
    pub elapsed: Duration,
}

impl ScenarioReport {
    pub fn percentages(&self) -> [f64; 3] {
        self.rejections.map(|r| 100.0 * r as f64 / self.config.reps as f64)
    }

    /// Report fields; wall time only when `timing` is set, so that reports
    /// stay reproducible by default.
    pub fn to_record(&self, timing: bool) -> Record {
        let c = &self.config;
        let pct = self.percentages();
        let mut r = Record::new();
        r.push("copula", c.copula.to_string())
            .push("margin1", c.margins[0].to_string())
            .push("margin2", c.margins[1].to_string())
            .push("n", c.n)
            .push("reps", c.reps)
            .push("multipliers", c.multipliers)
            .push("chi2_mc_replicates", c.chi2_mc_replicates)
            .push("alpha", c.alpha)
            .push("seed", c.seed)
            .push("reject_sn", self.rejections[0])
            .push("reject_chi2", self.rejections[1])
            .push("reject_chi2_mc", self.rejections[2])
            .push("pct_sn", pct[0])
            .push("pct_chi2", pct[1])
            .push("pct_chi2_mc", pct[2]);
        if timing {
            r.push("seconds", self.elapsed.as_secs_f64());
        }
        r
    }
}

/// Runs every repetition of a scenario on the current rayon pool.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let start = Instant::now();
    let prep = Prepared::new(cfg)?;
    let stream = cfg.stream();
    let decisions: Vec<Decisions> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| repetition(cfg, &prep, &stream.index(r)))
        .collect::<Result<_>>()?;
    let mut rejections = [0u64; 3];
    for d in &decisions {
        rejections[0] += d.multiplier as u64;
        rejections[1] += d.chi_squared as u64;
        rejections[2] += d.chi_squared_mc as u64;
    }
    Ok(ScenarioReport {
        config: cfg.clone(),
        rejections,
        elapsed: start.elapsed(),
    })
}

/// Validates every scenario, then runs them in order on a pool of `jobs`
/// threads (all cores when `None`), handing each report to `sink` as soon
/// as it is complete.
pub fn run_plan(
    scenarios: &[ScenarioConfig],
    jobs: Option<usize>,
    mut sink: impl FnMut(&ScenarioReport) -> Result<()> + Send,
) -> Result<()> {
    for s in scenarios {
        s.validate()?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::validation("--jobs must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::Numeric(e.to_string()))?;
    pool.install(|| {
        for s in scenarios {
            sink(&run_scenario(s)?)?;
        }
        Ok(())
    })
}

/// Values applied to every scenario of a plan unless overridden.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanDefaults {
    pub n: usize,
    pub reps: usize,
    pub multipliers: usize,
    pub alpha: f64,
    pub seed: Option<u64>,
    pub chi2_mc_replicates: usize,
    pub law: MultiplierLaw,
}

impl Default for PlanDefaults {
    fn default() -> Self {
        PlanDefaults {
            n: 100,
            reps: 1000,
            multipliers: 1000,
            alpha: 0.05,
            seed: None,
            chi2_mc_replicates: 2000,
            law: MultiplierLaw::Normal,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridEntry {
    copulas: Vec<CopulaSpec>,
    margins: Vec<[MarginSpec; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioEntry {
    copula: CopulaSpec,
    margins: [MarginSpec; 2],
    n: Option<usize>,
    reps: Option<usize>,
    multipliers: Option<usize>,
    alpha: Option<f64>,
    seed: Option<u64>,
    chi2_mc_replicates: Option<usize>,
    law: Option<MultiplierLaw>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    #[serde(default)]
    defaults: PlanDefaults,
    #[serde(default)]
    grid: Vec<GridEntry>,
    #[serde(default)]
    scenario: Vec<ScenarioEntry>,
}

/// Command-line overrides applied on top of a plan file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanOverrides {
    pub reps: Option<usize>,
    pub multipliers: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
}

/// Scenarios of a TOML plan: every `[[grid]]` expands to all
/// copula x margin-pair combinations (copulas outermost), followed by the
/// explicit `[[scenario]]` entries.
///
/// ```toml
/// [defaults]
/// n = 100
/// seed = 1
///
/// [[grid]]
/// copulas = ["independence", "clayton(0.1)"]
/// margins = [["F1", "F1"], ["F1", "F2"]]
///
/// [[scenario]]
/// copula = "gaussian(0.2)"
/// margins = ["F4", "F4"]
/// reps = 300
/// ```
pub fn parse_plan(text: &str, source_name: &str, overrides: &PlanOverrides) -> Result<Vec<ScenarioConfig>> {
    let file: PlanFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
        Error::parse(source_name, line, e.message().to_owned())
    })?;
    let d = &file.defaults;
    let seed = overrides.seed.or(d.seed);
    let make = |copula: CopulaSpec, margins: [MarginSpec; 2], e: Option<&ScenarioEntry>| -> Result<ScenarioConfig> {
        let seed = overrides
            .seed
            .or(e.and_then(|e| e.seed))
            .or(seed)
            .ok_or_else(|| Error::validation("no seed given: set `seed` in [defaults] or pass --seed"))?;
        let cfg = ScenarioConfig {
            copula,
            margins,
            n: e.and_then(|e| e.n).unwrap_or(d.n),
            reps: overrides.reps.or(e.and_then(|e| e.reps)).unwrap_or(d.reps),
            multipliers: overrides.multipliers.or(e.and_then(|e| e.multipliers)).unwrap_or(d.multipliers),
            alpha: overrides.alpha.or(e.and_then(|e| e.alpha)).unwrap_or(d.alpha),
            seed,
            chi2_mc_replicates: e.and_then(|e| e.chi2_mc_replicates).unwrap_or(d.chi2_mc_replicates),
            law: e.and_then(|e| e.law).unwrap_or(d.law),
        };
        cfg.validate()?;
        Ok(cfg)
    };
    let mut out = Vec::new();
    for g in &file.grid {
        for &c in &g.copulas {
            for m in &g.margins {
                out.push(make(c, m.clone(), None)?);
            }
        }
    }
    for e in &file.scenario {
        out.push(make(e.copula, e.margins.clone(), Some(e))?);
    }
    if out.is_empty() {
        return Err(Error::validation(format!("{source_name}: plan contains no scenarios")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(copula: &str, m: &str, reps: usize) -> ScenarioConfig {
        ScenarioConfig {
            copula: copula.parse().unwrap(),
            margins: [m.parse().unwrap(), m.parse().unwrap()],
            n: 30,
            reps,
            multipliers: 50,
            alpha: 0.05,
            seed: 11,
            chi2_mc_replicates: 100,
            law: MultiplierLaw::Normal,
        }
    }

    #[test]
    fn copula_specs() {
        let c: CopulaSpec = "clayton(0.2)".parse().unwrap();
        assert_eq!((c.kind, c.tau), (CopulaKind::Clayton, 0.2));
        assert_eq!(c.to_string(), "clayton(0.2)");
        assert_eq!("independence".parse::<CopulaSpec>().unwrap().to_string(), "independence");
        assert!("clayton(1.5)".parse::<CopulaSpec>().is_err());
        assert!("independence(0.2)".parse::<CopulaSpec>().is_err());
        assert!("frank(0.2)".parse::<CopulaSpec>().is_err());
    }

    #[test]
    fn validation() {
        let mut s = scenario("independence", "F1", 1);
        assert!(s.validate().is_ok());
        s.n = 1;
        assert!(s.validate().is_err());
        let mut s = scenario("independence", "F1", 0);
        assert!(s.validate().is_err());
        s.reps = 1;
        s.alpha = 1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn single_repetition_is_all_or_nothing() {
        let r = run_scenario(&scenario("clayton(0.2)", "F1", 1)).unwrap();
        for p in r.percentages() {
            assert!(p == 0.0 || p == 100.0);
        }
    }

    #[test]
    fn repetitions_are_prefix_stable() {
        let short = run_scenario(&scenario("clayton(0.2)", "F2", 4)).unwrap();
        let per_rep: Vec<Decisions> = (0..4).map(|r| run_repetition(&scenario("clayton(0.2)", "F2", 9), r).unwrap()).collect();
        let counted = [
            per_rep.iter().filter(|d| d.multiplier).count() as u64,
            per_rep.iter().filter(|d| d.chi_squared).count() as u64,
            per_rep.iter().filter(|d| d.chi_squared_mc).count() as u64,
        ];
        assert_eq!(short.rejections, counted);
    }

    #[test]
    fn plan_expansion() {
        let text = r#"
[defaults]
n = 50
reps = 10
multipliers = 20
seed = 3

[[grid]]
copulas = ["independence", "clayton(0.1)"]
margins = [["F1", "F1"], ["F1", "F2"], ["F2", "F2"]]

[[scenario]]
copula = "gaussian(0.2)"
margins = ["F4", "poisson(20)"]
reps = 7
"#;
        let plan = parse_plan(text, "plan", &PlanOverrides::default()).unwrap();
        assert_eq!(plan.len(), 7);
        assert_eq!(plan[0].copula.kind, CopulaKind::Independence);
        assert_eq!(plan[3].copula.kind, CopulaKind::Clayton);
        assert_eq!(plan[4].margins[1].to_string(), "poisson(1)");
        assert_eq!((plan[6].reps, plan[6].n, plan[6].seed), (7, 50, 3));

        let o = PlanOverrides {
            reps: Some(2),
            seed: Some(9),
            ..Default::default()
        };
        let plan = parse_plan(text, "plan", &o).unwrap();
        assert!(plan.iter().all(|s| s.reps == 2 && s.seed == 9));

        assert!(parse_plan("[[scenario]]\ncopula = \"independence\"\nmargins = [\"F1\", \"F1\"]\n", "p", &PlanOverrides::default()).is_err());
        assert!(parse_plan("[defaults]\nseed = 1\n", "p", &PlanOverrides::default()).is_err());
        assert!(matches!(
            parse_plan("[defaults]\nseed = 1\nbogus = 2\n", "p", &PlanOverrides::default()),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn scenario_seeding_ignores_position() {
        let a = scenario("clayton(0.2)", "F1", 3);
        let b = scenario("independence", "F2", 3);
        let mut first = Vec::new();
        run_plan(&[a.clone(), b.clone()], Some(2), |r| {
            first.push(r.rejections);
            Ok(())
        })
        .unwrap();
        let mut second = Vec::new();
        run_plan(&[b, a], Some(1), |r| {
            second.push(r.rejections);
            Ok(())
        })
        .unwrap();
        assert_eq!(first[0], second[1]);
        assert_eq!(first[1], second[0]);
    }
}
