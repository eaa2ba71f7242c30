#![allow(dead_code)]

use checkercop::samplers::RngStream;
use checkercop::{CheckerboardCopula, JointPmf, RankedSample};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(label: &str) -> ChaCha8Rng {
    RngStream::new(0x5eed).child(label).rng()
}

/// Random joint pmf with `d` axes of 1..=max_len categories; about a fifth
/// of the cells are empty, so zero-mass categories occur.
pub fn random_pmf(rng: &mut ChaCha8Rng, d: usize, max_len: usize) -> JointPmf {
    loop {
        let shape: Vec<usize> = (0..d).map(|_| rng.random_range(1..=max_len)).collect();
        let size: usize = shape.iter().product();
        let mut cells: Vec<f64> = (0..size)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
            .collect();
        let total: f64 = cells.iter().sum();
        if total <= 0.0 {
            continue;
        }
        for c in &mut cells {
            *c /= total;
        }
        return JointPmf::from_cells(shape, cells).expect("valid random pmf");
    }
}

pub fn random_copula(rng: &mut ChaCha8Rng, d: usize, max_len: usize) -> CheckerboardCopula {
    CheckerboardCopula::build(random_pmf(rng, d, max_len))
}

/// `n` rows of `d` small integers in `0..levels`: heavily tied.
pub fn tied_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, levels: u32) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0..levels) as f64).collect())
        .collect()
}

pub fn tied_sample(rng: &mut ChaCha8Rng, n: usize, d: usize, levels: u32) -> RankedSample {
    RankedSample::rank(&tied_rows(rng, n, d, levels)).unwrap()
}

/// `n` rows of continuous draws: no ties with probability one.
pub fn untied_sample(rng: &mut ChaCha8Rng, n: usize, d: usize) -> RankedSample {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    RankedSample::rank(&rows).unwrap()
}

pub fn d2_pmf() -> JointPmf {
    JointPmf::from_cells(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap()
}

pub fn d2_sample() -> RankedSample {
    RankedSample::rank(&[[0.0, 0.0], [1.0, 1.0]]).unwrap()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}
