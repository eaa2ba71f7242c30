//! Slow, literal reference implementations used to cross-check the closed
//! forms elsewhere in the crate. Nothing here reuses those code paths:
//! empirical distribution functions are recomputed from the raw data and
//! quadrature nodes are found by Newton iteration.

use rand::Rng;

use crate::checkerboard::CheckerboardCopula;
use crate::empirical::RankedSample;
use crate::error::{Error, Result};
use crate::samplers::RngStream;

/// Composite tensor Gauss-Legendre rule on `[0, 1]^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub panels: usize,
    pub order: usize,
    pub tolerance: f64,
}

impl QuadratureSpec {
    pub fn new(panels: usize, order: usize, tolerance: f64) -> Result<Self> {
        if panels == 0 || order == 0 {
            return Err(Error::domain("quadrature needs at least one panel and order >= 1"));
        }
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::domain("quadrature tolerance must be positive"));
        }
        Ok(QuadratureSpec { panels, order, tolerance })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            panels: 8,
            order: 6,
            tolerance: 1e-12,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes.push((1.0 - x) / 2.0);
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn panel_rule(breaks: &[f64], order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    breaks
        .windows(2)
        .filter(|p| p[1] > p[0])
        .flat_map(|p| {
            let h = p[1] - p[0];
            x.iter().zip(&w).map(move |(&t, &wt)| (p[0] + h * t, h * wt)).collect::<Vec<_>>()
        })
        .collect()
}

fn uniform_breaks(panels: usize) -> Vec<f64> {
    (0..=panels).map(|k| k as f64 / panels as f64).collect()
}

/// Sorted, deduplicated panel edges with 0 and 1 added.
pub fn panel_edges(points: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = points.into_iter().filter(|x| (0.0..=1.0).contains(x)).collect();
    v.push(0.0);
    v.push(1.0);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `int f` over `[0, 1]^d` with Gauss rules of `order` on every panel of
/// the given per-axis edges.
pub fn box_quadrature(f: impl Fn(&[f64]) -> f64, edges: &[Vec<f64>], order: usize) -> f64 {
    let rules: Vec<Vec<(f64, f64)>> = edges.iter().map(|e| panel_rule(e, order)).collect();
    let d = rules.len();
    let mut idx = vec![0usize; d];
    let mut u = vec![0.0; d];
    let mut total = 0.0;
    if rules.iter().any(Vec::is_empty) {
        return 0.0;
    }
    loop {
        let mut w = 1.0;
        for j in 0..d {
            let (x, wt) = rules[j][idx[j]];
            u[j] = x;
            w *= wt;
        }
        total += w * f(&u);
        let mut j = d;
        loop {
            if j == 0 {
                return total;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < rules[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Composite tensor estimate of `int f` over the unit square, doubling the
/// panel count until two estimates agree within the tolerance (at most ten
/// doublings).
pub fn tensor_quadrature(f: impl Fn(f64, f64) -> f64, spec: &QuadratureSpec) -> f64 {
    let g = |u: &[f64]| f(u[0], u[1]);
    let mut panels = spec.panels;
    let mut prev = box_quadrature(g, &[uniform_breaks(panels), uniform_breaks(panels)], spec.order);
    for _ in 0..10 {
        panels *= 2;
        let next = box_quadrature(g, &[uniform_breaks(panels), uniform_breaks(panels)], spec.order);
        if (next - prev).abs() <= spec.tolerance {
            return next;
        }
        prev = next;
    }
    prev
}

/// Pairs `(strictly concordant, strictly discordant)` by enumeration.
pub fn brute_concordance(s: &RankedSample) -> (u64, u64) {
    let (mut a, mut b) = (0, 0);
    for i in 0..s.len() {
        for k in i + 1..s.len() {
            let p = (s.value(i, 0) - s.value(k, 0)) * (s.value(i, 1) - s.value(k, 1));
            if p > 0.0 {
                a += 1;
            } else if p < 0.0 {
                b += 1;
            }
        }
    }
    (a, b)
}

/// `F_nj(x) = #{X_kj <= x} / n` and `F_nj(x-)` from the raw column.
fn edf(s: &RankedSample, j: usize, x: f64) -> (f64, f64) {
    let n = s.len() as f64;
    let le = (0..s.len()).filter(|&k| s.value(k, j) <= x).count() as f64;
    let lt = (0..s.len()).filter(|&k| s.value(k, j) < x).count() as f64;
    (lt / n, le / n)
}

/// Every empirical breakpoint `F_nj(x)` on axis `j`.
pub fn brute_breakpoints(s: &RankedSample, j: usize) -> Vec<f64> {
    panel_edges((0..s.len()).map(|i| edf(s, j, s.value(i, j)).1))
}

/// The interpolated indicator from its definition.
pub fn brute_hat(s: &RankedSample, j: usize, i: usize, u: f64) -> f64 {
    let (lo, hi) = edf(s, j, s.value(i, j));
    if u <= lo {
        0.0
    } else if u >= hi {
        1.0
    } else {
        (u - lo) / (hi - lo)
    }
}

/// `(1/n) sum_i prod_j V_{nj,i}(u_j)`.
pub fn brute_empirical_checkerboard(s: &RankedSample, u: &[f64]) -> f64 {
    let total: f64 = (0..s.len())
        .map(|i| (0..s.dim()).map(|j| brute_hat(s, j, i, u[j])).product::<f64>())
        .sum();
    total / s.len() as f64
}

/// `(1/n) sum_i 1{F_nj(X_ij) <= u_j for all j}`.
pub fn brute_classical_copula(s: &RankedSample, u: &[f64]) -> f64 {
    let hits = (0..s.len())
        .filter(|&i| (0..s.dim()).all(|j| edf(s, j, s.value(i, j)).1 <= u[j]))
        .count();
    hits as f64 / s.len() as f64
}

fn sample_edges(s: &RankedSample) -> Vec<Vec<f64>> {
    (0..s.dim()).map(|j| brute_breakpoints(s, j)).collect()
}

/// `n int (C_n - Pi)^2` by quadrature aligned to the empirical breakpoints.
pub fn brute_cvm(s: &RankedSample) -> f64 {
    let n = s.len() as f64;
    let f = |u: &[f64]| {
        let diff = brute_empirical_checkerboard(s, u) - u.iter().product::<f64>();
        diff * diff
    };
    n * box_quadrature(f, &sample_edges(s), 3)
}

/// `int (n^{-1/2} sum_i (xi_i - mean) prod_j (V_{nj,i}(u_j) - u_j))^2` by
/// quadrature.
pub fn brute_multiplier_replicate(s: &RankedSample, xi: &[f64]) -> f64 {
    let n = s.len() as f64;
    let mean = xi.iter().sum::<f64>() / n;
    let f = |u: &[f64]| {
        let z: f64 = (0..s.len())
            .map(|i| (xi[i] - mean) * (0..s.dim()).map(|j| brute_hat(s, j, i, u[j]) - u[j]).product::<f64>())
            .sum();
        z * z / n
    };
    box_quadrature(f, &sample_edges(s), 3)
}

/// Panel edges at every range breakpoint of a checkerboard copula.
pub fn copula_edges(c: &CheckerboardCopula) -> Vec<Vec<f64>> {
    (0..c.dim())
        .map(|j| panel_edges(c.margin(j).cdf_values().iter().copied()))
        .collect()
}

/// `int g dC` by quadrature of `g` against the cell densities.
pub fn brute_integral_dc(c: &CheckerboardCopula, g: impl Fn(&[f64]) -> f64, order: usize) -> f64 {
    let f = |u: &[f64]| {
        let inside = u.iter().all(|&x| x > 0.0 && x < 1.0);
        if inside {
            g(u) * c.density(u).unwrap_or(0.0)
        } else {
            0.0
        }
    };
    box_quadrature(f, &copula_edges(c), order)
}

/// Monte Carlo mean of `g` under the checkerboard law (cell by mass, then
/// uniform within the cell) with its standard error.
pub fn mc_functional(
    c: &CheckerboardCopula,
    g: impl Fn(&[f64]) -> f64,
    draws: usize,
    stream: &RngStream,
) -> (f64, f64) {
    let pmf = c.pmf();
    let cells = pmf.cells();
    let shape = pmf.shape().to_vec();
    let d = shape.len();
    let mut rng = stream.rng();
    let (mut sum, mut sum2) = (0.0, 0.0);
    let mut u = vec![0.0; d];
    for _ in 0..draws {
        let mut target: f64 = rng.random();
        let mut flat = cells.len() - 1;
        for (k, &p) in cells.iter().enumerate() {
            if target < p {
                flat = k;
                break;
            }
            target -= p;
        }
        while cells[flat] == 0.0 {
            flat -= 1;
        }
        let mut rest = flat;
        for j in (0..d).rev() {
            let k = rest % shape[j];
            rest /= shape[j];
            let m = pmf.margin(j);
            let lo = if k == 0 { 0.0 } else { m.cdf_values()[k - 1] };
            let hi = m.cdf_values()[k];
            u[j] = lo + (hi - lo) * rng.random::<f64>();
        }
        let x = g(&u);
        sum += x;
        sum2 += x * x;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = if draws > 1 { ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// Standard normal cdf from the Maclaurin series of `Phi(x) - 1/2` for
/// `|x| < 5` and a Lentz-evaluated continued fraction for the tail.
pub fn series_normal_cdf(x: f64) -> f64 {
    let pdf = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if x.abs() < 5.0 {
        let mut term = x;
        let mut sum = x;
        let mut k = 1.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) {
            term *= x * x / (2.0 * k + 1.0);
            sum += term;
            k += 1.0;
        }
        0.5 + pdf * sum
    } else {
        // Q(a) = pdf / (a + 1/(a + 2/(a + 3/(a + ...))))
        let a = x.abs();
        let tiny = 1e-300;
        let mut f = a;
        let mut c = a;
        let mut dd = 0.0;
        for k in 1..500 {
            let num = k as f64;
            dd = a + num * dd;
            if dd.abs() < tiny {
                dd = tiny;
            }
            c = a + num / c;
            if c.abs() < tiny {
                c = tiny;
            }
            dd = 1.0 / dd;
            let delta = c * dd;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let tail = pdf / f;
        if x > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkerboard::JointPmf;
    use crate::margin::DiscreteMargin;

    fn d2() -> CheckerboardCopula {
        let m = DiscreteMargin::from_pmf(vec![0.5, 0.5]).unwrap();
        CheckerboardCopula::build(JointPmf::new(vec![m.clone(), m], vec![0.5, 0.0, 0.0, 0.5]).unwrap())
    }

    fn c_d2(u: f64, v: f64) -> f64 {
        d2().cdf(&[u, v]).unwrap()
    }

    #[test]
    fn nodes_integrate_polynomials() {
        for order in 1..=8 {
            let (x, w) = gauss_legendre(order);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for p in 0..2 * order {
                let est: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!((est - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "order {order} degree {p}");
            }
        }
    }

    #[test]
    fn tensor_examples() {
        let spec = QuadratureSpec::default();
        assert!((tensor_quadrature(|u, v| u * v, &spec) - 0.25).abs() < 1e-13);
        assert!((tensor_quadrature(|_, _| 1.0, &spec) - 1.0).abs() < 1e-13);
        let gap = tensor_quadrature(|u, v| (c_d2(u, v) - u * v).powi(2), &QuadratureSpec::new(2, 3, 1e-14).unwrap());
        assert!((gap - 1.0 / 144.0).abs() < 1e-14);
        assert!(QuadratureSpec::new(0, 3, 1e-3).is_err());
        assert!(QuadratureSpec::new(2, 3, 0.0).is_err());
    }

    #[test]
    fn concordance_examples() {
        let s = RankedSample::rank(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert_eq!(brute_concordance(&s), (1, 0));
        let s = RankedSample::rank(&[[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]]).unwrap();
        assert_eq!(brute_concordance(&s), (1, 1));
        let s = RankedSample::rank(&[[3.0, 3.0], [3.0, 3.0], [3.0, 3.0]]).unwrap();
        assert_eq!(brute_concordance(&s), (0, 0));
    }

    #[test]
    fn d2_sample_cvm() {
        let s = RankedSample::rank(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!((brute_cvm(&s) - 1.0 / 72.0).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_functional() {
        let stream = RngStream::new(3);
        let (m, se) = mc_functional(&d2(), |_| 1.0, 1000, &stream);
        assert_eq!((m, se), (1.0, 0.0));
        let c = d2();
        let (m, se) = mc_functional(&c, |u| c.cdf(u).unwrap(), 1_000_000, &stream);
        assert!((m - 0.375).abs() < 3.0 * se, "{m} +- {se}");
        let pi = CheckerboardCopula::build(
            JointPmf::product(vec![DiscreteMargin::poisson(1.0).unwrap(), DiscreteMargin::binomial(3, 0.5).unwrap()])
                .unwrap(),
        );
        let (m, se) = mc_functional(&pi, |u| u[0] * u[1], 200_000, &stream);
        assert!((m - 0.25).abs() < 3.0 * se, "{m} +- {se}");
    }

    #[test]
    fn series_cdf_reference() {
        assert_eq!(series_normal_cdf(0.0), 0.5);
        assert!((series_normal_cdf(0.5) - 0.691_462_461_274_013_1).abs() < 1e-15);
        assert!((series_normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((series_normal_cdf(-6.0) - 9.865_876_450_376_982e-10).abs() < 1e-22);
    }
}
