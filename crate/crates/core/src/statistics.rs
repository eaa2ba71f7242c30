//! Rank statistics of a sample and contingency-table statistics.
//!
//! Kendall's tau is computed by pair counting in `O(n log n)`; the integral
//! form against the empirical checkerboard copula is exposed separately so
//! the two can be compared. Spearman's rho uses mid-ranks. The Cramer-von
//! Mises distance to independence is expanded over products of hat
//! functions, whose pairwise integrals have closed forms.

use crate::checkerboard::{spearman_normalizer, CheckerboardCopula, JointPmf};
use crate::empirical::RankedSample;
use crate::error::{Error, Result};
use crate::grid::Accumulator;
use crate::margin::DiscreteMargin;

/// A `K x L` table of counts, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl ContingencyTable {
    pub fn new(rows: usize, cols: usize, counts: Vec<u64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::validation("table needs at least one row and one column"));
        }
        if counts.len() != rows * cols {
            return Err(Error::validation(format!(
                "{rows}x{cols} table needs {} counts, got {}",
                rows * cols,
                counts.len()
            )));
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::validation("table total must be at least 1"));
        }
        Ok(ContingencyTable { rows, cols, counts })
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::validation("table rows differ in length"));
        }
        Self::new(r, c, rows.concat())
    }

    /// Cross-tabulation of a bivariate sample over its distinct values.
    pub fn from_sample(s: &RankedSample) -> Result<Self> {
        require_bivariate(s)?;
        let (shape, cells) = s.cell_counts();
        Self::new(shape[0], shape[1], cells.into_iter().map(|c| c as u64).collect())
    }

    /// Expands the table into a sample with one row per counted observation,
    /// using category indices as values. Empty rows or columns disappear.
    pub fn to_sample(&self) -> Result<RankedSample> {
        let mut rows = Vec::with_capacity(self.total() as usize);
        for k in 0..self.rows {
            for l in 0..self.cols {
                for _ in 0..self.count(k, l) {
                    rows.push([k as f64, l as f64]);
                }
            }
        }
        RankedSample::rank(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, k: usize, l: usize) -> u64 {
        self.counts[k * self.cols + l]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_totals(&self) -> Vec<u64> {
        (0..self.rows).map(|k| (0..self.cols).map(|l| self.count(k, l)).sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<u64> {
        (0..self.cols).map(|l| (0..self.rows).map(|k| self.count(k, l)).sum()).collect()
    }

    /// Drops empty rows and columns.
    pub fn compact(&self) -> ContingencyTable {
        let keep_r: Vec<usize> = self.row_totals().iter().enumerate().filter(|(_, &t)| t > 0).map(|(k, _)| k).collect();
        let keep_c: Vec<usize> = self.col_totals().iter().enumerate().filter(|(_, &t)| t > 0).map(|(l, _)| l).collect();
        let counts = keep_r
            .iter()
            .flat_map(|&k| keep_c.iter().map(move |&l| (k, l)))
            .map(|(k, l)| self.count(k, l))
            .collect();
        ContingencyTable {
            rows: keep_r.len(),
            cols: keep_c.len(),
            counts,
        }
    }

    fn check_margins(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.total() as f64;
        let rt = self.row_totals();
        let ct = self.col_totals();
        if let Some(k) = rt.iter().position(|&t| t == 0) {
            return Err(Error::DegenerateMargin(format!("row {k} has zero total")));
        }
        if let Some(l) = ct.iter().position(|&t| t == 0) {
            return Err(Error::DegenerateMargin(format!("column {l} has zero total")));
        }
        Ok((
            rt.iter().map(|&t| t as f64 / n).collect(),
            ct.iter().map(|&t| t as f64 / n).collect(),
        ))
    }

    /// Empirical checkerboard copula of the table.
    pub fn checkerboard(&self) -> Result<CheckerboardCopula> {
        self.check_margins()?;
        let rt: Vec<usize> = self.row_totals().iter().map(|&t| t as usize).collect();
        let ct: Vec<usize> = self.col_totals().iter().map(|&t| t as usize).collect();
        let m1 = DiscreteMargin::from_counts((0..self.rows).map(|k| k as f64).collect(), &rt)?;
        let m2 = DiscreteMargin::from_counts((0..self.cols).map(|l| l as f64).collect(), &ct)?;
        let n = self.total() as f64;
        let cells = self.counts.iter().map(|&c| c as f64 / n).collect();
        Ok(CheckerboardCopula::build(JointPmf::new(vec![m1, m2], cells)?))
    }
}

fn require_bivariate(s: &RankedSample) -> Result<()> {
    if s.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            expected: "2".into(),
            got: s.dim(),
        });
    }
    Ok(())
}

fn require_pairs(s: &RankedSample) -> Result<()> {
    require_bivariate(s)?;
    if s.len() < 2 {
        return Err(Error::domain("Kendall's tau needs at least two observations"));
    }
    Ok(())
}

/// Pearson's chi-squared `n sum (f_kl - f_k+ f_+l)^2 / (f_k+ f_+l)`.
pub fn chi_squared(t: &ContingencyTable) -> Result<f64> {
    let (fr, fc) = t.check_margins()?;
    let n = t.total() as f64;
    let mut acc = Accumulator::default();
    for (k, &a) in fr.iter().enumerate() {
        for (l, &b) in fc.iter().enumerate() {
            let e = a * b;
            let diff = t.count(k, l) as f64 / n - e;
            acc.add(diff * diff / e);
        }
    }
    Ok(n * acc.value())
}

/// `n int (c_n - 1)^2 dPi`, cell by cell over the empirical checkerboard density.
pub fn chi_squared_integral(t: &ContingencyTable) -> Result<f64> {
    let cop = t.checkerboard()?;
    let n = t.total() as f64;
    let (m1, m2) = (cop.margin(0), cop.margin(1));
    let dens = cop.cell_densities();
    let mut acc = Accumulator::default();
    for k in 0..t.rows() {
        for l in 0..t.cols() {
            let c = dens[k * t.cols() + l];
            acc.add((c - 1.0) * (c - 1.0) * m1.cell_width(k) * m2.cell_width(l));
        }
    }
    Ok(n * acc.value())
}

/// Likelihood-ratio statistic `2n sum f_kl ln(f_kl / (f_k+ f_+l))`, with
/// empty cells contributing zero.
pub fn g_squared(t: &ContingencyTable) -> Result<f64> {
    let (fr, fc) = t.check_margins()?;
    let n = t.total() as f64;
    let mut acc = Accumulator::default();
    for (k, &a) in fr.iter().enumerate() {
        for (l, &b) in fc.iter().enumerate() {
            let c = t.count(k, l);
            if c > 0 {
                let f = c as f64 / n;
                acc.add(f * (f / (a * b)).ln());
            }
        }
    }
    Ok((2.0 * n * acc.value()).max(0.0))
}

/// `2n int ln(c_n) dC_n` over cells of positive mass.
pub fn g_squared_integral(t: &ContingencyTable) -> Result<f64> {
    let cop = t.checkerboard()?;
    let n = t.total() as f64;
    let dens = cop.cell_densities();
    let mut acc = Accumulator::default();
    for (flat, &p) in cop.pmf().cells().iter().enumerate() {
        if p > 0.0 {
            acc.add(p * dens[flat].ln());
        }
    }
    Ok((2.0 * n * acc.value()).max(0.0))
}

/// Kendall's tau `(a_n - b_n) / C(n, 2)` with `a_n`, `b_n` the numbers of
/// strictly concordant and discordant pairs.
pub fn kendall_tau(s: &RankedSample) -> Result<f64> {
    require_pairs(s)?;
    let n = s.len();
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (s.code(i, 0), s.code(i, 1))).collect();
    pairs.sort_unstable();

    let tied = |len: u64| len * len.saturating_sub(1) / 2;
    let mut ties_x = 0u64;
    let mut ties_xy = 0u64;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end].0 == pairs[start].0 {
            end += 1;
        }
        ties_x += tied((end - start) as u64);
        let mut a = start;
        while a < end {
            let mut b = a + 1;
            while b < end && pairs[b].1 == pairs[a].1 {
                b += 1;
            }
            ties_xy += tied((b - a) as u64);
            a = b;
        }
        start = end;
    }

    let mut ys: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0usize; n];
    let discordant = count_inversions(&mut ys, &mut buf);
    let ties_y: u64 = s.counts(1).iter().map(|&c| tied(c as u64)).sum();

    let total = tied(n as u64);
    let score = total as i128 - ties_x as i128 - ties_y as i128 + ties_xy as i128 - 2 * discordant as i128;
    Ok(score as f64 / total as f64)
}

/// Counts strict inversions while merge-sorting `v`.
fn count_inversions(v: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        count_inversions(left, bl) + count_inversions(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            inv += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    inv
}

/// Kendall's tau as `n/(n-1) * (4 int C_n dC_n - 1)` over the empirical
/// checkerboard copula.
pub fn kendall_tau_integral(s: &RankedSample) -> Result<f64> {
    require_pairs(s)?;
    let n = s.len() as f64;
    let integral = s.empirical_checkerboard().self_integral();
    Ok(n / (n - 1.0) * (4.0 * integral - 1.0))
}

/// Spearman's rho `(12 / n^3) sum (R_i1 - (n+1)/2)(R_i2 - (n+1)/2)` on mid-ranks.
pub fn spearman_rho(s: &RankedSample) -> Result<f64> {
    require_bivariate(s)?;
    let n = s.len() as f64;
    let centre = (n + 1.0) / 2.0;
    let acc: Accumulator = (0..s.len())
        .map(|i| (s.midrank(i, 0) - centre) * (s.midrank(i, 1) - centre))
        .collect();
    Ok(12.0 / (n * n * n) * acc.value())
}

/// Multivariate Spearman's rho
/// `varrho_d [-2^-d + (1/n) sum_i prod_j ((2n+1)/(2n) - R_ij/n)]`.
pub fn spearman_rho_multivariate(s: &RankedSample) -> Result<f64> {
    let d = s.dim();
    if d < 2 {
        return Err(Error::UnsupportedDimension {
            expected: ">= 2".into(),
            got: d,
        });
    }
    let n = s.len() as f64;
    let shift = (2.0 * n + 1.0) / (2.0 * n);
    let acc: Accumulator = (0..s.len())
        .map(|i| (0..d).map(|j| shift - s.midrank(i, j) / n).product::<f64>())
        .collect();
    Ok(spearman_normalizer(d) * (acc.value() / n - 0.5f64.powi(d as i32)))
}

/// `varrho_d int (C_n - Pi) dPi` integrated cell by cell.
pub fn spearman_rho_integral(s: &RankedSample) -> Result<f64> {
    s.empirical_checkerboard().population_rho()
}

/// Closed-form integrals of products of hat functions along one axis.
///
/// Category `k` of the axis has the ramp `[a_k, b_k]`; its hat function is
/// 0 below `a_k`, 1 above `b_k` and linear in between. The ramps partition
/// `[0, 1]`, which gives
///
/// * `int V_k V_l = 1 - (a_m + b_m)/2` with `m = max(k, l)`, `k != l`,
/// * `int V_k^2 = 1 - b_k + (b_k - a_k)/3`,
/// * `int u V_k(u) du = (1 - b_k^2)/2 + (b_k - a_k)(2 b_k + a_k)/6`.
#[derive(Clone, Debug)]
pub struct AxisGram {
    categories: usize,
    products: Vec<f64>,
    moments: Vec<f64>,
}

impl AxisGram {
    pub fn new(margin: &DiscreteMargin) -> Self {
        let k_n = margin.len();
        let ends: Vec<(f64, f64)> = (0..k_n).map(|k| (margin.vertex(k), margin.vertex(k + 1))).collect();
        let mut products = vec![0.0; k_n * k_n];
        for k in 0..k_n {
            for l in k..k_n {
                let (a, b) = ends[l];
                let v = if k == l {
                    1.0 - b + (b - a) / 3.0
                } else {
                    1.0 - (a + b) / 2.0
                };
                products[k * k_n + l] = v;
                products[l * k_n + k] = v;
            }
        }
        let moments = ends
            .iter()
            .map(|&(a, b)| (1.0 - b * b) / 2.0 + (b - a) * (2.0 * b + a) / 6.0)
            .collect();
        AxisGram {
            categories: k_n,
            products,
            moments,
        }
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    /// `int V_k V_l`.
    #[inline]
    pub fn product(&self, k: usize, l: usize) -> f64 {
        self.products[k * self.categories + l]
    }

    /// `int u V_k(u) du`.
    #[inline]
    pub fn moment(&self, k: usize) -> f64 {
        self.moments[k]
    }

    /// `int (V_k(u) - u)(V_l(u) - u) du`.
    #[inline]
    pub fn centered(&self, k: usize, l: usize) -> f64 {
        self.product(k, l) - self.moment(k) - self.moment(l) + 1.0 / 3.0
    }
}

/// Observations grouped by their joint category, with the per-axis hat
/// Gram tables of a sample.
#[derive(Clone, Debug)]
pub struct HatGram {
    n: usize,
    axes: Vec<AxisGram>,
    /// Distinct joint categories, `d` codes each.
    cells: Vec<Vec<usize>>,
    /// Occupied cell of every observation.
    membership: Vec<usize>,
    multiplicity: Vec<usize>,
}

impl HatGram {
    pub fn new(s: &RankedSample) -> Self {
        let d = s.dim();
        let axes = (0..d).map(|j| AxisGram::new(s.margin(j))).collect();
        let mut index = std::collections::BTreeMap::new();
        let mut cells = Vec::new();
        let mut multiplicity = Vec::new();
        let membership = (0..s.len())
            .map(|i| {
                let key: Vec<usize> = (0..d).map(|j| s.code(i, j)).collect();
                let id = *index.entry(key.clone()).or_insert_with(|| {
                    cells.push(key);
                    multiplicity.push(0);
                    cells.len() - 1
                });
                multiplicity[id] += 1;
                id
            })
            .collect();
        HatGram {
            n: s.len(),
            axes,
            cells,
            membership,
            multiplicity,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn axis(&self, j: usize) -> &AxisGram {
        &self.axes[j]
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_of(&self, i: usize) -> usize {
        self.membership[i]
    }

    /// Cramer-von Mises statistic `n int (C_n - Pi)^2 dPi`.
    pub fn cvm(&self) -> f64 {
        let d = self.axes.len();
        let m = self.cells.len();
        let mut quad = Accumulator::default();
        for a in 0..m {
            let wa = self.multiplicity[a] as f64;
            for b in 0..m {
                let wb = self.multiplicity[b] as f64;
                let prod: f64 = (0..d)
                    .map(|j| self.axes[j].product(self.cells[a][j], self.cells[b][j]))
                    .product();
                quad.add(wa * wb * prod);
            }
        }
        let mut lin = Accumulator::default();
        for a in 0..m {
            let prod: f64 = (0..d).map(|j| self.axes[j].moment(self.cells[a][j])).product();
            lin.add(self.multiplicity[a] as f64 * prod);
        }
        let n = self.n as f64;
        (quad.value() / n - 2.0 * lin.value() + n * 3f64.powi(-(d as i32))).max(0.0)
    }

    /// Gram entry `prod_j int (V_{j,i} - u)(V_{j,i'} - u)` for observations `i`, `i'`.
    pub fn centered_entry(&self, i: usize, i2: usize) -> f64 {
        let (a, b) = (self.membership[i], self.membership[i2]);
        self.cell_centered(a, b)
    }

    #[inline]
    pub(crate) fn cell_centered(&self, a: usize, b: usize) -> f64 {
        self.axes
            .iter()
            .enumerate()
            .map(|(j, g)| g.centered(self.cells[a][j], self.cells[b][j]))
            .product()
    }
}

/// Cramer-von Mises statistic `S_n = n int (C_n - Pi)^2 dPi` of the
/// empirical checkerboard copula.
pub fn cvm_statistic(s: &RankedSample) -> Result<f64> {
    if s.dim() < 2 {
        return Err(Error::UnsupportedDimension {
            expected: ">= 2".into(),
            got: s.dim(),
        });
    }
    Ok(HatGram::new(s).cvm())
}

/// Every sample statistic, for reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsReport {
    pub n: usize,
    pub d: usize,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub rho_d: f64,
    pub chi2: Option<f64>,
    pub g2: Option<f64>,
    pub cvm: f64,
}

impl StatsReport {
    pub fn compute(s: &RankedSample) -> Result<Self> {
        let bivariate = s.dim() == 2;
        let table = if bivariate {
            Some(ContingencyTable::from_sample(s)?)
        } else {
            None
        };
        Ok(StatsReport {
            n: s.len(),
            d: s.dim(),
            tau: if bivariate && s.len() >= 2 { Some(kendall_tau(s)?) } else { None },
            rho: if bivariate { Some(spearman_rho(s)?) } else { None },
            rho_d: spearman_rho_multivariate(s)?,
            chi2: table.as_ref().map(chi_squared).transpose()?,
            g2: table.as_ref().map(g_squared).transpose()?,
            cvm: cvm_statistic(s)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: &[[f64; 2]]) -> RankedSample {
        RankedSample::rank(rows).unwrap()
    }

    fn d2() -> RankedSample {
        sample(&[[0.0, 0.0], [1.0, 1.0]])
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall_tau(&d2()).unwrap(), 1.0);
        // the pair tied in the second coordinate counts in neither class
        let s = sample(&[[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]]);
        assert_eq!(kendall_tau(&s).unwrap(), 0.0);
        let s = sample(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 0.0]]);
        assert!((kendall_tau(&s).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let flipped = s.map_columns(|j, x| if j == 1 { -x } else { x }).unwrap();
        assert!((kendall_tau(&flipped).unwrap() + 1.0 / 6.0).abs() < 1e-15);
        assert!(kendall_tau(&sample(&[[1.0, 2.0]])).is_err());
    }

    #[test]
    fn kendall_integral_examples() {
        assert!((d2().empirical_checkerboard().self_integral() - 3.0 / 8.0).abs() < 1e-15);
        assert!((kendall_tau_integral(&d2()).unwrap() - 1.0).abs() < 1e-14);
        let factoring = sample(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
        assert!(kendall_tau_integral(&factoring).unwrap().abs() < 1e-12);
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman_rho(&d2()).unwrap() - 0.75).abs() < 1e-15);
        assert!((spearman_rho(&sample(&[[0.0, 1.0], [1.0, 0.0]])).unwrap() + 0.75).abs() < 1e-15);
        assert_eq!(spearman_rho(&sample(&[[0.0, 3.0], [1.0, 3.0], [2.0, 3.0]])).unwrap(), 0.0);
    }

    #[test]
    fn spearman_multivariate_examples() {
        assert!((spearman_rho_multivariate(&d2()).unwrap() - 0.75).abs() < 1e-14);
        let como3 = RankedSample::rank(&[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]).unwrap();
        assert!((spearman_rho_multivariate(&como3).unwrap() - 0.75).abs() < 1e-14);
        let factoring = sample(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
        assert!(spearman_rho_multivariate(&factoring).unwrap().abs() < 1e-12);
    }

    #[test]
    fn table_examples() {
        let diag = ContingencyTable::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert!((chi_squared(&diag).unwrap() - 2.0).abs() < 1e-14);
        assert!((chi_squared_integral(&diag).unwrap() - 2.0).abs() < 1e-14);
        assert!((g_squared(&diag).unwrap() - 4.0 * 2f64.ln()).abs() < 1e-14);
        assert!((g_squared_integral(&diag).unwrap() - 4.0 * 2f64.ln()).abs() < 1e-14);

        let diag5 = ContingencyTable::from_rows(&[vec![5, 0], vec![0, 5]]).unwrap();
        assert!((chi_squared(&diag5).unwrap() - 10.0).abs() < 1e-13);
        assert!((g_squared(&diag5).unwrap() - 20.0 * 2f64.ln()).abs() < 1e-13);

        let flat = ContingencyTable::from_rows(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(chi_squared(&flat).unwrap(), 0.0);
        assert_eq!(g_squared(&flat).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_tables() {
        let t = ContingencyTable::from_rows(&[vec![1, 0], vec![1, 0]]).unwrap();
        assert!(matches!(chi_squared(&t), Err(Error::DegenerateMargin(_))));
        assert!(matches!(g_squared(&t), Err(Error::DegenerateMargin(_))));
        assert_eq!(t.compact().counts(), &[1, 1]);
        assert!(ContingencyTable::new(1, 1, vec![0]).is_err());
        assert!(ContingencyTable::new(2, 1, vec![0]).is_err());
    }

    #[test]
    fn table_sample_round_trip() {
        let t = ContingencyTable::from_rows(&[vec![2, 0, 1], vec![0, 3, 1]]).unwrap();
        let s = t.to_sample().unwrap();
        assert_eq!(ContingencyTable::from_sample(&s).unwrap(), t);
    }

    #[test]
    fn cvm_examples() {
        assert!((cvm_statistic(&d2()).unwrap() - 1.0 / 72.0).abs() < 1e-14);
        let factoring = sample(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
        assert!(cvm_statistic(&factoring).unwrap() < 1e-12);
    }

    #[test]
    fn gram_is_symmetric() {
        let s = sample(&[[0.0, 2.0], [1.0, 1.0], [1.0, 0.0], [3.0, 2.0], [0.0, 0.0]]);
        let g = HatGram::new(&s);
        for i in 0..5 {
            for k in 0..5 {
                assert_eq!(g.centered_entry(i, k), g.centered_entry(k, i));
            }
        }
        assert_eq!(g.occupied_cells(), 5);
    }

    #[test]
    fn report_for_trivariate_sample() {
        let s = RankedSample::rank(&[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]).unwrap();
        let r = StatsReport::compute(&s).unwrap();
        assert!(r.tau.is_none() && r.chi2.is_none());
        assert!((r.rho_d - 0.75).abs() < 1e-14);
    }
}
