//! Count-data generators: bivariate copula samplers, discretization through
//! marginal quantiles, and hierarchical seeding.

use std::f64::consts::PI;
use std::fmt;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checkerboard::JointPmf;
use crate::error::{Error, Result};
use crate::margin::DiscreteMargin;

/// A seed stream addressed by a master seed and a path of labels.
///
/// Streams with the same path are identical; children are derived by
/// hashing, so a stream never depends on how many draws its siblings made.
#[derive(Clone, PartialEq, Eq)]
pub struct RngStream {
    key: [u8; 32],
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"checkercop/stream");
        h.update(master_seed.to_le_bytes());
        RngStream { key: finish(h) }
    }

    /// Sub-stream for a textual label.
    pub fn child(&self, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update(b"s");
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        RngStream { key: finish(h) }
    }

    /// Sub-stream for a numeric label.
    pub fn index(&self, i: u64) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update(b"i");
        h.update(i.to_le_bytes());
        RngStream { key: finish(h) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RngStream({:02x}{:02x}{:02x}{:02x}..)", self.key[0], self.key[1], self.key[2], self.key[3])
    }
}

fn finish(h: Sha256) -> [u8; 32] {
    let mut key = [0u8; 32];
    key.copy_from_slice(&h.finalize());
    key
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaKind {
    Independence,
    Clayton,
    Gaussian,
}

impl fmt::Display for CopulaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CopulaKind::Independence => "independence",
            CopulaKind::Clayton => "clayton",
            CopulaKind::Gaussian => "gaussian",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CopulaFamily {
    Independence,
    Clayton { theta: f64 },
    Gaussian { r: f64 },
}

impl CopulaFamily {
    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::domain(format!("Clayton theta = {theta} must be positive")));
        }
        Ok(CopulaFamily::Clayton { theta })
    }

    pub fn gaussian(r: f64) -> Result<Self> {
        if !(r > -1.0 && r < 1.0) {
            return Err(Error::domain(format!("Gaussian correlation {r} outside (-1, 1)")));
        }
        Ok(CopulaFamily::Gaussian { r })
    }
}

/// Copula parameter with the given Kendall's tau: Clayton
/// `theta = 2 tau / (1 - tau)`, Gaussian `r = sin(pi tau / 2)`.
/// Independence only accepts `tau = 0`.
pub fn tau_to_parameter(kind: CopulaKind, tau: f64) -> Result<CopulaFamily> {
    match kind {
        CopulaKind::Independence if tau == 0.0 => Ok(CopulaFamily::Independence),
        CopulaKind::Independence => Err(Error::domain("independence copula has tau = 0")),
        _ if !(tau > 0.0 && tau < 1.0) => Err(Error::domain(format!("tau = {tau} outside (0, 1)"))),
        CopulaKind::Clayton => CopulaFamily::clayton(2.0 * tau / (1.0 - tau)),
        CopulaKind::Gaussian => CopulaFamily::gaussian((PI * tau / 2.0).sin()),
    }
}

/// Draws `n` pairs from `family`: Clayton by conditional inversion,
/// Gaussian through correlated standard normals.
pub fn sample_copula<R: Rng + ?Sized>(family: CopulaFamily, n: usize, rng: &mut R) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| match family {
            CopulaFamily::Independence => [rng.sample(Open01), rng.sample(Open01)],
            CopulaFamily::Clayton { theta } => {
                let u: f64 = rng.sample(Open01);
                let w: f64 = rng.sample(Open01);
                let v = (u.powf(-theta) * (w.powf(-theta / (1.0 + theta)) - 1.0) + 1.0).powf(-1.0 / theta);
                [u, v]
            }
            CopulaFamily::Gaussian { r } => {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let x = r * z1 + (1.0 - r * r).sqrt() * z2;
                [normal_cdf(z1), normal_cdf(x)]
            }
        })
        .collect()
}

/// Maps each coordinate through its margin's quantile, returning the
/// support labels.
pub fn discretize(points: &[[f64; 2]], m1: &DiscreteMargin, m2: &DiscreteMargin) -> Result<Vec<[f64; 2]>> {
    points
        .iter()
        .map(|&[u, v]| Ok([m1.support()[m1.quantile(u)?], m2.support()[m2.quantile(v)?]]))
        .collect()
}

/// `n` rows drawn from a joint pmf, as support labels.
pub fn sample_joint_pmf<R: Rng + ?Sized>(pmf: &JointPmf, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut cum = Vec::with_capacity(pmf.cells().len());
    let mut acc = 0.0;
    for &p in pmf.cells() {
        acc += p;
        cum.push(acc);
    }
    let last = cum.len().saturating_sub(1);
    let shape = pmf.shape();
    (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            let mut flat = cum.partition_point(|&c| c <= u).min(last);
            while pmf.cells()[flat] == 0.0 && flat > 0 {
                flat -= 1;
            }
            let mut row = vec![0.0; shape.len()];
            for j in (0..shape.len()).rev() {
                row[j] = pmf.margin(j).support()[flat % shape[j]];
                flat /= shape[j];
            }
            row
        })
        .collect()
}

/// Standard normal cdf (Hart's double-precision rational approximation).
pub fn normal_cdf(x: f64) -> f64 {
    let a = x.abs();
    let tail = if a > 37.0 {
        0.0
    } else {
        let e = (-a * a / 2.0).exp();
        if a < 7.071_067_811_865_47 {
            const NUM: [f64; 7] = [
                3.526_249_659_989_11e-2,
                0.700_383_064_443_688,
                6.373_962_203_531_65,
                33.912_866_078_383,
                112.079_291_497_871,
                221.213_596_169_931,
                220.206_867_912_376,
            ];
            const DEN: [f64; 8] = [
                8.838_834_764_831_84e-2,
                1.755_667_163_182_64,
                16.064_177_579_207,
                86.780_732_202_946_1,
                296.564_248_779_674,
                637.333_633_378_831,
                793.826_512_519_948,
                440.413_735_824_752,
            ];
            let horner = |c: &[f64]| c.iter().fold(0.0, |acc, &k| acc * a + k);
            e * horner(&NUM) / horner(&DEN)
        } else {
            let mut b = a + 0.65;
            b = a + 4.0 / b;
            b = a + 3.0 / b;
            b = a + 2.0 / b;
            b = a + 1.0 / b;
            e / b / 2.506_628_274_631
        }
    };
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Standard normal quantile: Acklam's rational approximation polished by
/// one Halley step against [`normal_cdf`].
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("normal quantile level {u} outside (0, 1)")));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const LOW: f64 = 0.024_25;
    let tail = |t: f64| {
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    };
    let x = if u < LOW {
        tail((-2.0 * u.ln()).sqrt())
    } else if u <= 1.0 - LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (-u).ln_1p()).sqrt())
    };
    let e = normal_cdf(x) - u;
    let step = e * (2.0 * PI).sqrt() * (x * x / 2.0).exp();
    Ok(x - step / (1.0 + x * step / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert!(matches!(
            tau_to_parameter(CopulaKind::Clayton, 0.2).unwrap(),
            CopulaFamily::Clayton { theta } if (theta - 0.5).abs() < 1e-15
        ));
        match tau_to_parameter(CopulaKind::Gaussian, 0.2).unwrap() {
            CopulaFamily::Gaussian { r } => assert!((r - 0.309_016_994_374_947_4).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        match tau_to_parameter(CopulaKind::Clayton, 1e-9).unwrap() {
            CopulaFamily::Clayton { theta } => assert!(theta > 0.0 && theta < 1e-8),
            other => panic!("{other:?}"),
        }
        assert!(tau_to_parameter(CopulaKind::Clayton, 1.0).is_err());
        assert!(tau_to_parameter(CopulaKind::Gaussian, 0.0).is_err());
        assert!(tau_to_parameter(CopulaKind::Independence, 0.1).is_err());
        assert_eq!(tau_to_parameter(CopulaKind::Independence, 0.0).unwrap(), CopulaFamily::Independence);
    }

    #[test]
    fn discretize_examples() {
        let b = DiscreteMargin::binomial(3, 0.5).unwrap();
        let p = DiscreteMargin::poisson(1.0).unwrap();
        let out = discretize(&[[0.2, 0.1], [0.125, 0.9]], &b, &p).unwrap();
        assert_eq!(out[0], [1.0, 0.0]);
        assert_eq!(out[1][0], 0.0);
    }

    #[test]
    fn normal_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // 40-digit references
        let refs = [
            (0.5, 0.691_462_461_274_013_1),
            (1.0, 0.841_344_746_068_543),
            (-3.0, 0.001_349_898_031_630_094_5),
            (-6.0, 9.865_876_450_376_98e-10),
            (2.5, 0.993_790_334_674_224),
            (-1.2345, 0.108_508_323_362_670_2),
            (8.0, 0.999_999_999_999_999_4),
        ];
        for (x, p) in refs {
            assert!((normal_cdf(x) - p).abs() < 1e-10, "{x}");
        }
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((normal_quantile(0.3).unwrap() + 0.524_400_512_708_040_8).abs() < 1e-9);
        assert!((normal_quantile(1e-8).unwrap() + 5.612_001_244_174_789).abs() < 1e-8);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let u = i as f64 / 1000.0;
            let x = normal_quantile(u).unwrap();
            assert!((normal_cdf(x) - u).abs() < 1e-9);
        }
        for u in [1e-8, 1e-6, 1.0 - 1e-6, 1.0 - 1e-8] {
            assert!((normal_cdf(normal_quantile(u).unwrap()) - u).abs() < 1e-9);
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let s = RngStream::new(7);
        let a: Vec<u64> = (0..4).map(|_| 0).scan(s.child("x").index(3).rng(), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(s.child("x").index(3).rng(), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(s.child("x").index(4).rng(), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(RngStream::new(7).child("ab"), RngStream::new(7).child("a").child("b"));
    }

    #[test]
    fn fixed_stream_gives_fixed_sample() {
        let fam = tau_to_parameter(CopulaKind::Gaussian, 0.1).unwrap();
        let a = sample_copula(fam, 50, &mut RngStream::new(1).rng());
        let b = sample_copula(fam, 50, &mut RngStream::new(1).rng());
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.iter().all(|&x| x > 0.0 && x < 1.0)));
    }

    #[test]
    fn joint_pmf_sampling_respects_support() {
        let pmf = JointPmf::from_cells(vec![2, 3], vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.5]).unwrap();
        let rows = sample_joint_pmf(&pmf, 200, &mut RngStream::new(3).rng());
        assert!(rows.iter().all(|r| r == &[0.0, 0.0] || r == &[1.0, 2.0]));
        assert!(rows.iter().any(|r| r[0] == 1.0));
    }
}
