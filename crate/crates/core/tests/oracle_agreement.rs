//! Closed forms against the brute-force references in `oracles`.

mod common;

use checkercop::checkerboard::spearman_normalizer;
use checkercop::margin::DiscreteMargin;
use checkercop::oracles::{
    box_quadrature, brute_classical_copula, brute_concordance, brute_empirical_checkerboard, brute_hat,
    brute_integral_dc, copula_edges, mc_functional, panel_edges, series_normal_cdf,
};
use checkercop::samplers::{normal_cdf, normal_quantile, RngStream};
use checkercop::statistics::{kendall_tau, spearman_rho, spearman_rho_multivariate, AxisGram};
use checkercop::CheckerboardCopula;
use common::*;
use rand::Rng;

#[test]
fn axis_gram_matches_quadrature() {
    let mut rng = rng("axis-gram");
    for _ in 0..100 {
        let len = rng.random_range(1..=6);
        let mut pmf: Vec<f64> = (0..len).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random() }).collect();
        let total: f64 = pmf.iter().sum();
        if total == 0.0 {
            continue;
        }
        pmf.iter_mut().for_each(|p| *p /= total);
        let m = DiscreteMargin::from_pmf(pmf).unwrap();
        let g = AxisGram::new(&m);
        let edges = vec![panel_edges(m.cdf_values().iter().copied())];
        let hat = |k: usize, u: f64| {
            let (a, b) = (m.vertex(k), m.vertex(k + 1));
            if u <= a {
                0.0
            } else if u >= b {
                1.0
            } else {
                (u - a) / (b - a)
            }
        };
        for k in 0..m.len() {
            let moment = box_quadrature(|u| u[0] * hat(k, u[0]), &edges, 3);
            assert!((g.moment(k) - moment).abs() < 1e-10);
            for l in 0..m.len() {
                let prod = box_quadrature(|u| hat(k, u[0]) * hat(l, u[0]), &edges, 3);
                assert!((g.product(k, l) - prod).abs() < 1e-10, "k={k} l={l}");
                let centered = box_quadrature(|u| (hat(k, u[0]) - u[0]) * (hat(l, u[0]) - u[0]), &edges, 3);
                assert!((g.centered(k, l) - centered).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn population_integrals_match_quadrature() {
    let mut rng = rng("population");
    for trial in 0..60 {
        let d = 2 + trial % 2;
        let c = random_copula(&mut rng, d, 5);
        let edges = copula_edges(&c);
        let lebesgue = box_quadrature(|u| c.cdf(u).unwrap(), &edges, 3);
        let rho = spearman_normalizer(d) * (lebesgue - 0.5f64.powi(d as i32));
        assert!((c.population_rho().unwrap() - rho).abs() < 1e-10);
        let gap = box_quadrature(|u| (c.cdf(u).unwrap() - u.iter().product::<f64>()).powi(2), &edges, 4);
        assert!((c.independence_gap() - gap).abs() < 1e-12);
        if d == 2 {
            let tau = 4.0 * brute_integral_dc(&c, |u| c.cdf(u).unwrap(), 3) - 1.0;
            let got = c.population_tau().unwrap();
            assert!((got - tau).abs() < 1e-10);
            assert!((-1.0..=1.0).contains(&got));
        } else {
            assert!(c.population_tau().is_err());
        }
    }
}

#[test]
fn population_tau_matches_monte_carlo() {
    let mut rng = rng("tau-mc");
    for k in 0..5 {
        let c = random_copula(&mut rng, 2, 4);
        let stream = RngStream::new(77).index(k);
        let (mean, se) = mc_functional(&c, |u| c.cdf(u).unwrap(), 200_000, &stream);
        let tau_mc = 4.0 * mean - 1.0;
        let tau = c.population_tau().unwrap();
        assert!((tau - tau_mc).abs() < 4.0 * 4.0 * se + 1e-12, "tau {tau} vs {tau_mc} (se {se})");
    }
}

#[test]
fn anti_diagonal_values() {
    let pmf = checkercop::JointPmf::from_cells(vec![2, 2], vec![0.0, 0.5, 0.5, 0.0]).unwrap();
    let c = CheckerboardCopula::build(pmf);
    assert!((c.population_tau().unwrap() + 0.5).abs() < 1e-14);
    assert!((c.population_rho().unwrap() + 0.75).abs() < 1e-14);
    assert!((c.independence_gap() - 1.0 / 144.0).abs() < 1e-15);
}

#[test]
fn empirical_copulas_match_literal_definitions() {
    let mut rng = rng("empirical");
    for trial in 0..60 {
        let d = 2 + trial % 2;
        let n = rng.random_range(1..=30);
        let levels = rng.random_range(1..=5);
        let s = tied_sample(&mut rng, n, d, levels);
        let ec = s.empirical_checkerboard();
        for _ in 0..20 {
            let u: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let brute = brute_empirical_checkerboard(&s, &u);
            assert!((s.hat_product(&u) - brute).abs() < 1e-12);
            assert!((ec.cdf(&u).unwrap() - brute).abs() < 1e-12);
            assert_eq!(s.classical_empirical_copula(&u).unwrap(), brute_classical_copula(&s, &u));
            for i in 0..n {
                for (j, &x) in u.iter().enumerate() {
                    assert!((s.hat_function(j, i, x) - brute_hat(&s, j, i, x)).abs() < 1e-15);
                }
            }
        }
    }
}

#[test]
fn spearman_matches_quadrature() {
    let mut rng = rng("spearman");
    for trial in 0..40 {
        let d = 2 + trial % 2;
        let n = rng.random_range(2..=25);
        let s = tied_sample(&mut rng, n, d, 4);
        let edges = copula_edges(&s.empirical_checkerboard());
        let mean = box_quadrature(|u| brute_empirical_checkerboard(&s, u) - u.iter().product::<f64>(), &edges, 3);
        let rho = spearman_normalizer(d) * mean;
        assert!((spearman_rho_multivariate(&s).unwrap() - rho).abs() < 1e-10);
        if d == 2 {
            assert!((spearman_rho(&s).unwrap() - rho).abs() < 1e-10);
        }
    }
}

#[test]
fn kendall_pair_count_matches_enumeration() {
    let mut rng = rng("kendall");
    for _ in 0..200 {
        let n = rng.random_range(2..=80);
        let levels = rng.random_range(1..=8);
        let s = tied_sample(&mut rng, n, 2, levels);
        let (a, b) = brute_concordance(&s);
        let want = (a as f64 - b as f64) / (n * (n - 1) / 2) as f64;
        assert!((kendall_tau(&s).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn normal_cdf_matches_series() {
    for i in -800..=800 {
        let x = i as f64 / 100.0;
        assert!((normal_cdf(x) - series_normal_cdf(x)).abs() < 1e-10, "x = {x}");
    }
    let q = normal_quantile(0.975).unwrap();
    assert!((series_normal_cdf(q) - 0.975).abs() < 1e-12);
    for i in 1..1000 {
        let u = i as f64 / 1000.0;
        assert!((normal_cdf(normal_quantile(u).unwrap()) - u).abs() < 1e-9);
    }
}
