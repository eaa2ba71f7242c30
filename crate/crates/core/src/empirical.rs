//! Ranked samples and the empirical checkerboard copula.

use crate::checkerboard::{CheckerboardCopula, JointPmf};
use crate::error::{Error, Result};
use crate::grid::{for_each_index, strides};
use crate::margin::DiscreteMargin;

/// An `n x d` sample with per-column distinct values, category codes,
/// mid-ranks and empirical margins.
///
/// Only the order of the values in each column matters.
#[derive(Clone, Debug)]
pub struct RankedSample {
    n: usize,
    d: usize,
    data: Vec<f64>,
    distinct: Vec<Vec<f64>>,
    codes: Vec<usize>,
    counts: Vec<Vec<usize>>,
    midranks: Vec<f64>,
    margins: Vec<DiscreteMargin>,
}

impl RankedSample {
    /// Ranks a sample given as rows of equal length `d >= 2`.
    pub fn rank<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::validation("sample is empty"));
        }
        let d = rows[0].as_ref().len();
        if d < 2 {
            return Err(Error::UnsupportedDimension {
                expected: ">= 2".into(),
                got: d,
            });
        }
        let mut data = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::validation(format!(
                    "row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::validation(format!("row {i} holds non-finite value {x}")));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(n, d, data)
    }

    fn from_flat(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        let mut distinct = Vec::with_capacity(d);
        let mut codes = vec![0usize; n * d];
        let mut counts = Vec::with_capacity(d);
        let mut midranks = vec![0.0; n * d];
        let mut margins = Vec::with_capacity(d);
        let mut order: Vec<usize> = (0..n).collect();
        for j in 0..d {
            order.sort_by(|&a, &b| data[a * d + j].total_cmp(&data[b * d + j]));
            let mut values = Vec::new();
            let mut col_counts = Vec::new();
            let mut start = 0;
            while start < n {
                let v = data[order[start] * d + j];
                let mut end = start + 1;
                while end < n && data[order[end] * d + j] == v {
                    end += 1;
                }
                // ranks start+1..=end share their average
                let mid = (start + 1 + end) as f64 / 2.0;
                for &i in &order[start..end] {
                    codes[i * d + j] = values.len();
                    midranks[i * d + j] = mid;
                }
                values.push(v);
                col_counts.push(end - start);
                start = end;
            }
            margins.push(DiscreteMargin::from_counts(values.clone(), &col_counts)?);
            distinct.push(values);
            counts.push(col_counts);
        }
        Ok(RankedSample {
            n,
            d,
            data,
            distinct,
            codes,
            counts,
            midranks,
            margins,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// Index of observation `i`'s value among the distinct values of column `j`.
    pub fn code(&self, i: usize, j: usize) -> usize {
        self.codes[i * self.d + j]
    }

    pub fn midrank(&self, i: usize, j: usize) -> f64 {
        self.midranks[i * self.d + j]
    }

    pub fn distinct(&self, j: usize) -> &[f64] {
        &self.distinct[j]
    }

    pub fn counts(&self, j: usize) -> &[usize] {
        &self.counts[j]
    }

    pub fn margins(&self) -> &[DiscreteMargin] {
        &self.margins
    }

    pub fn margin(&self, j: usize) -> &DiscreteMargin {
        &self.margins[j]
    }

    /// Rows with every column transformed by its own map.
    pub fn map_columns(&self, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let data = (0..self.n * self.d).map(|f_idx| f(f_idx % self.d, self.data[f_idx])).collect();
        Self::from_flat(self.n, self.d, data)
    }

    /// Range endpoints `(F(c - 1), F(c))` of observation `i`'s category on axis `j`.
    #[inline]
    pub fn ramp(&self, i: usize, j: usize) -> (f64, f64) {
        let c = self.code(i, j);
        let m = &self.margins[j];
        (m.vertex(c), m.vertex(c + 1))
    }

    /// The interpolated indicator `V_{nj,i}(u)`: zero below its category
    /// cell, linear across it, one above.
    pub fn hat_function(&self, j: usize, i: usize, u: f64) -> f64 {
        let (lo, hi) = self.ramp(i, j);
        ((u - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    /// `(1/n) sum_i prod_j V_{nj,i}(u_j)`.
    pub fn hat_product(&self, u: &[f64]) -> f64 {
        let total: f64 = (0..self.n)
            .map(|i| (0..self.d).map(|j| self.hat_function(j, i, u[j])).product::<f64>())
            .sum();
        total / self.n as f64
    }

    /// Number of observations in every cell of the distinct-value grid,
    /// row-major.
    pub fn cell_counts(&self) -> (Vec<usize>, Vec<usize>) {
        let shape: Vec<usize> = self.distinct.iter().map(Vec::len).collect();
        let st = strides(&shape);
        let mut cells = vec![0usize; shape.iter().product()];
        for i in 0..self.n {
            let flat: usize = (0..self.d).map(|j| self.code(i, j) * st[j]).sum();
            cells[flat] += 1;
        }
        (shape, cells)
    }

    /// The empirical joint pmf on the distinct-value grid.
    pub fn empirical_pmf(&self) -> JointPmf {
        let (_, cells) = self.cell_counts();
        let nf = self.n as f64;
        let cells = cells.into_iter().map(|c| c as f64 / nf).collect();
        JointPmf::new(self.margins.clone(), cells).expect("empirical pmf is consistent by construction")
    }

    /// The empirical checkerboard copula.
    pub fn empirical_checkerboard(&self) -> CheckerboardCopula {
        CheckerboardCopula::build(self.empirical_pmf())
    }

    /// The classical step-function empirical copula
    /// `(1/n) sum_i 1{F_nj(X_ij) <= u_j for all j}`.
    pub fn classical_empirical_copula(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.d {
            return Err(Error::domain("point dimension differs from sample dimension"));
        }
        if let Some(x) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::domain(format!("coordinate {x} outside [0, 1]")));
        }
        let hits = (0..self.n)
            .filter(|&i| (0..self.d).all(|j| self.ramp(i, j).1 <= u[j]))
            .count();
        Ok(hits as f64 / self.n as f64)
    }

    /// Largest `|C_n - C_n^checkerboard|` over the tensor grid formed, on
    /// every axis, by all range breakpoints plus `refinement` equally spaced
    /// interior points per cell.
    pub fn checkerboard_vs_classical_gap(&self, refinement: usize) -> Result<f64> {
        if refinement == 0 {
            return Err(Error::domain("refinement must be at least 1"));
        }
        let cop = self.empirical_checkerboard();
        let axes: Vec<Vec<f64>> = self
            .margins
            .iter()
            .map(|m| {
                let mut pts = vec![0.0];
                for k in 0..m.len() {
                    let (lo, w) = (m.vertex(k), m.cell_width(k));
                    pts.extend((1..=refinement).map(|t| lo + w * t as f64 / (refinement + 1) as f64));
                    pts.push(m.vertex(k + 1));
                }
                pts
            })
            .collect();
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let vstrides = strides(cop.vertex_shape());
        let mut u = vec![0.0; self.d];
        let mut best = 0.0f64;
        for_each_index(&shape, |idx| {
            // classical value: H_n at the largest breakpoint <= u_j
            let mut flat = 0;
            for j in 0..self.d {
                u[j] = axes[j][idx[j]];
                let below = self.margins[j].cdf_values().partition_point(|&f| f <= u[j]);
                flat += below * vstrides[j];
            }
            let classical = cop.subcopula()[flat];
            let smooth = cop.cdf(&u).expect("grid points lie in the unit cube");
            best = best.max((classical - smooth).abs());
        });
        Ok(best)
    }

    /// Bound `sum_j max_k dF_nj(k)` on the checkerboard/classical gap; equals
    /// `d/n` for samples without ties.
    pub fn gap_bound(&self) -> f64 {
        self.counts
            .iter()
            .map(|c| *c.iter().max().unwrap() as f64 / self.n as f64)
            .sum()
    }
}
