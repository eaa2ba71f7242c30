//! The multilinear extension (checkerboard) copula of a discrete joint pmf.
//!
//! The copula is stored through its values on the vertex grid
//! `R_1 x ... x R_d` of the marginal ranges (the sub-copula) together with
//! the constant density of every cell. Between vertices it is the
//! multilinear blend of the `2^d` corners of the enclosing cell, so
//! integrals of polynomial functionals of it are computed exactly with
//! per-cell tensor Gauss-Legendre rules of sufficient order.

use crate::error::{Error, Result};
use crate::grid::{for_each_index, strides, Accumulator};
use crate::margin::{Bracket, DiscreteMargin, MASS_TOLERANCE};

/// A `d`-variate discrete pmf on a dense grid of category indices.
///
/// `cells` is row-major with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    margins: Vec<DiscreteMargin>,
    shape: Vec<usize>,
    cells: Vec<f64>,
}

impl JointPmf {
    /// Builds a joint pmf and checks that its axis sums reproduce `margins`.
    pub fn new(margins: Vec<DiscreteMargin>, cells: Vec<f64>) -> Result<Self> {
        if margins.is_empty() {
            return Err(Error::validation("joint pmf needs at least one margin"));
        }
        let shape: Vec<usize> = margins.iter().map(DiscreteMargin::len).collect();
        let expected: usize = shape.iter().product();
        if cells.len() != expected {
            return Err(Error::validation(format!(
                "cell array has {} entries, margins imply {expected}",
                cells.len()
            )));
        }
        if let Some(p) = cells.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::validation(format!("invalid cell probability {p}")));
        }
        let pmf = JointPmf { margins, shape, cells };
        let total: f64 = pmf.cells.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::validation(format!("cells sum to {total}, expected 1")));
        }
        for (j, margin) in pmf.margins.iter().enumerate() {
            let sums = pmf.axis_sums(j);
            for (k, (s, p)) in sums.iter().zip(margin.pmf()).enumerate() {
                if (s - p).abs() > MASS_TOLERANCE {
                    return Err(Error::validation(format!(
                        "axis {j} category {k}: cells sum to {s} but margin has {p}"
                    )));
                }
            }
        }
        Ok(pmf)
    }

    /// Builds a joint pmf whose margins are the axis sums of `cells`, on
    /// index supports.
    pub fn from_cells(shape: Vec<usize>, cells: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::validation("shape must have positive extents"));
        }
        if cells.len() != shape.iter().product::<usize>() {
            return Err(Error::validation(format!(
                "cell array has {} entries, shape {shape:?} implies {}",
                cells.len(),
                shape.iter().product::<usize>()
            )));
        }
        let probe = JointPmf {
            margins: Vec::new(),
            shape: shape.clone(),
            cells,
        };
        let margins = (0..shape.len())
            .map(|j| DiscreteMargin::from_pmf(probe.axis_sums(j)))
            .collect::<Result<Vec<_>>>()?;
        JointPmf::new(margins, probe.cells)
    }

    /// The product pmf of independent margins.
    pub fn product(margins: Vec<DiscreteMargin>) -> Result<Self> {
        let shape: Vec<usize> = margins.iter().map(DiscreteMargin::len).collect();
        let mut cells = Vec::with_capacity(shape.iter().product());
        for_each_index(&shape, |idx| {
            cells.push(idx.iter().zip(&margins).map(|(&k, m)| m.pmf()[k]).product());
        });
        JointPmf::new(margins, cells)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn margins(&self) -> &[DiscreteMargin] {
        &self.margins
    }

    pub fn margin(&self, j: usize) -> &DiscreteMargin {
        &self.margins[j]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn cell(&self, idx: &[usize]) -> f64 {
        let st = strides(&self.shape);
        self.cells[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]
    }

    fn axis_sums(&self, axis: usize) -> Vec<f64> {
        let mut sums = vec![0.0; self.shape[axis]];
        let mut flat = 0;
        for_each_index(&self.shape, |idx| {
            sums[idx[axis]] += self.cells[flat];
            flat += 1;
        });
        sums
    }
}

/// Per-cell tensor Gauss-Legendre rules on `[0, 1]`.
mod rules {
    pub(super) fn nodes(order: usize) -> (&'static [f64], &'static [f64]) {
        match order {
            2 => (&NODES2, &WEIGHTS2),
            3 => (&NODES3, &WEIGHTS3),
            _ => unreachable!("only orders 2 and 3 are tabulated"),
        }
    }

    // 0.5 -+ 0.5 / sqrt(3)
    const NODES2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];
    const WEIGHTS2: [f64; 2] = [0.5, 0.5];
    // 0.5 -+ 0.5 sqrt(3/5), 0.5
    const NODES3: [f64; 3] = [0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7];
    const WEIGHTS3: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
}

/// Checkerboard copula of a [`JointPmf`].
#[derive(Clone, Debug)]
pub struct CheckerboardCopula {
    pmf: JointPmf,
    vertex_shape: Vec<usize>,
    vertex_strides: Vec<usize>,
    subcopula: Vec<f64>,
    cell_density: Vec<f64>,
}

impl CheckerboardCopula {
    pub fn build(pmf: JointPmf) -> Self {
        let d = pmf.dim();
        let vertex_shape: Vec<usize> = pmf.shape.iter().map(|k| k + 1).collect();
        let vertex_strides = strides(&vertex_shape);
        let n_vertices: usize = vertex_shape.iter().product();

        // G[v] = sum of cells with k_j < v_j: place cells at offset +1, then
        // cumulate along each axis.
        let mut grid = vec![0.0; n_vertices];
        let mut flat = 0;
        for_each_index(&pmf.shape, |idx| {
            let v: usize = idx.iter().zip(&vertex_strides).map(|(k, s)| (k + 1) * s).sum();
            grid[v] = pmf.cells[flat];
            flat += 1;
        });
        for axis in 0..d {
            let stride = vertex_strides[axis];
            let extent = vertex_shape[axis];
            for v in 0..n_vertices {
                let pos = (v / stride) % extent;
                if pos > 0 {
                    grid[v] += grid[v - stride];
                }
            }
        }
        // One-dimensional faces reproduce the margins exactly.
        let top: Vec<usize> = vertex_shape.iter().map(|n| n - 1).collect();
        for (j, margin) in pmf.margins.iter().enumerate() {
            for v_j in 0..vertex_shape[j] {
                let mut v = top.clone();
                v[j] = v_j;
                let flat: usize = v.iter().zip(&vertex_strides).map(|(a, s)| a * s).sum();
                grid[flat] = margin.vertex(v_j);
            }
        }

        let cell_density = {
            let mut dens = Vec::with_capacity(pmf.cells.len());
            let mut flat = 0;
            for_each_index(&pmf.shape, |idx| {
                let vol: f64 = idx
                    .iter()
                    .zip(&pmf.margins)
                    .map(|(&k, m)| m.cell_width(k))
                    .product();
                dens.push(if vol > 0.0 { pmf.cells[flat] / vol } else { 0.0 });
                flat += 1;
            });
            dens
        };

        CheckerboardCopula {
            pmf,
            vertex_shape,
            vertex_strides,
            subcopula: grid,
            cell_density,
        }
    }

    pub fn dim(&self) -> usize {
        self.pmf.dim()
    }

    pub fn pmf(&self) -> &JointPmf {
        &self.pmf
    }

    pub fn margin(&self, j: usize) -> &DiscreteMargin {
        &self.pmf.margins[j]
    }

    /// Sub-copula values on the vertex grid, row-major over
    /// `(K_1 + 2) x ... x (K_d + 2)`.
    pub fn subcopula(&self) -> &[f64] {
        &self.subcopula
    }

    pub fn vertex_shape(&self) -> &[usize] {
        &self.vertex_shape
    }

    pub fn vertex_count(&self) -> usize {
        self.subcopula.len()
    }

    /// Coordinates in `[0, 1]^d` of the vertex with flat index `flat`.
    pub fn vertex_point(&self, flat: usize) -> Vec<f64> {
        self.vertex_index(flat)
            .iter()
            .zip(&self.pmf.margins)
            .map(|(&v, m)| m.vertex(v))
            .collect()
    }

    /// Multi-index of the vertex with flat index `flat`.
    pub fn vertex_index(&self, flat: usize) -> Vec<usize> {
        self.vertex_strides
            .iter()
            .zip(&self.vertex_shape)
            .map(|(s, n)| (flat / s) % n)
            .collect()
    }

    /// Per-cell constant density, row-major over the category grid.
    pub fn cell_densities(&self) -> &[f64] {
        &self.cell_density
    }

    /// Tabulates `g` on every vertex of the range grid.
    pub fn vertex_values(&self, g: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.vertex_count()).map(|v| g(&self.vertex_point(v))).collect()
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::domain(format!(
                "point has {} coordinates, copula has dimension {}",
                u.len(),
                self.dim()
            )));
        }
        if let Some(x) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::domain(format!("coordinate {x} outside [0, 1]")));
        }
        Ok(())
    }

    fn brackets(&self, u: &[f64]) -> Vec<Bracket> {
        u.iter().zip(&self.pmf.margins).map(|(&x, m)| m.bracket(x)).collect()
    }

    /// Blend of `values` over the `2^d` vertices selected by `brackets`.
    fn blend(&self, values: &[f64], brackets: &[Bracket]) -> f64 {
        let d = brackets.len();
        let mut acc = 0.0;
        for mask in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for (j, b) in brackets.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    w *= b.weight;
                    flat += b.hi * self.vertex_strides[j];
                } else {
                    w *= 1.0 - b.weight;
                    flat += b.lo * self.vertex_strides[j];
                }
            }
            if w != 0.0 {
                acc += w * values[flat];
            }
        }
        acc
    }

    /// `C(u)` as the multilinear blend of the bracketing sub-copula values.
    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        Ok(self.blend(&self.subcopula, &self.brackets(u)))
    }

    /// Constant density of the cell containing `u` (cells are closed on the
    /// upper side).
    pub fn density(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        if let Some(x) = u.iter().find(|&&x| x <= 0.0 || x >= 1.0) {
            return Err(Error::domain(format!("density needs an interior point, got {x}")));
        }
        let st = strides(&self.pmf.shape);
        let flat: usize = u
            .iter()
            .zip(&self.pmf.margins)
            .zip(&st)
            .map(|((&x, m), s)| m.quantile_unchecked(x) * s)
            .sum();
        Ok(self.cell_density[flat])
    }

    /// Partial derivative along `axis` at a point of an open cell.
    pub fn partial_derivative(&self, axis: usize, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        if axis >= self.dim() {
            return Err(Error::domain(format!("axis {axis} out of range")));
        }
        let brackets = self.brackets(u);
        for (j, b) in brackets.iter().enumerate() {
            if !(b.weight > 0.0 && b.weight < 1.0) {
                return Err(Error::Boundary { axis: j, value: u[j] });
            }
        }
        let width = self.pmf.margins[axis].cell_width(brackets[axis].lo);
        let mut lo = brackets.clone();
        lo[axis].weight = 0.0;
        let mut hi = brackets;
        hi[axis].weight = 1.0;
        Ok((self.blend(&self.subcopula, &hi) - self.blend(&self.subcopula, &lo)) / width)
    }

    /// Multilinear interpolation of vertex values `grid_values` at `u`.
    pub fn interpolate(&self, grid_values: &[f64], u: &[f64]) -> Result<f64> {
        if grid_values.len() != self.vertex_count() {
            return Err(Error::validation(format!(
                "expected {} vertex values, got {}",
                self.vertex_count(),
                grid_values.len()
            )));
        }
        self.check_point(u)?;
        Ok(self.blend(grid_values, &self.brackets(u)))
    }

    /// Integrates `f(C(u), u)` over every cell of positive volume with an
    /// order-`order` tensor rule; `f` receives the cell density too.
    fn integrate_cells(&self, order: usize, f: impl Fn(f64, &[f64], f64) -> f64) -> f64 {
        let d = self.dim();
        let (nodes, weights) = rules::nodes(order);
        let n_corners = 1usize << d;
        let mut total = Accumulator::default();
        let mut corners = vec![0.0; n_corners];
        let mut point = vec![0.0; d];
        let mut flat_cell = 0;
        for_each_index(&self.pmf.shape, |cell| {
            let density = self.cell_density[flat_cell];
            flat_cell += 1;
            let lows: Vec<f64> = cell.iter().zip(&self.pmf.margins).map(|(&k, m)| m.vertex(k)).collect();
            let widths: Vec<f64> =
                cell.iter().zip(&self.pmf.margins).map(|(&k, m)| m.cell_width(k)).collect();
            let volume: f64 = widths.iter().product();
            if volume <= 0.0 {
                return;
            }
            for (mask, c) in corners.iter_mut().enumerate() {
                let flat: usize = (0..d)
                    .map(|j| (cell[j] + (mask >> j & 1)) * self.vertex_strides[j])
                    .sum();
                *c = self.subcopula[flat];
            }
            let mut cell_sum = 0.0;
            let node_shape = vec![nodes.len(); d];
            for_each_index(&node_shape, |q| {
                let mut w = 1.0;
                for j in 0..d {
                    w *= weights[q[j]];
                    point[j] = lows[j] + widths[j] * nodes[q[j]];
                }
                let mut c = 0.0;
                for (mask, corner) in corners.iter().enumerate() {
                    let mut cw = 1.0;
                    for j in 0..d {
                        let t = nodes[q[j]];
                        cw *= if mask >> j & 1 == 1 { t } else { 1.0 - t };
                    }
                    c += cw * corner;
                }
                cell_sum += w * f(c, &point, density);
            });
            total.add(volume * cell_sum);
        });
        total.value()
    }

    /// `int C dC`, exact (bilinear integrand against a constant density).
    pub fn self_integral(&self) -> f64 {
        self.integrate_cells(2, |c, _, density| c * density)
    }

    /// `int C dPi`, exact.
    pub fn lebesgue_integral(&self) -> f64 {
        self.integrate_cells(2, |c, _, _| c)
    }

    /// Population Kendall's tau `-1 + 4 int C dC`; bivariate only.
    pub fn population_tau(&self) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                expected: "2".into(),
                got: self.dim(),
            });
        }
        Ok(4.0 * self.self_integral() - 1.0)
    }

    /// Population Spearman's rho `rho_d = varrho_d int (C - Pi) dPi`.
    pub fn population_rho(&self) -> Result<f64> {
        let d = self.dim();
        if d < 2 {
            return Err(Error::UnsupportedDimension {
                expected: ">= 2".into(),
                got: d,
            });
        }
        Ok(spearman_normalizer(d) * (self.lebesgue_integral() - 0.5f64.powi(d as i32)))
    }

    /// `int (C - Pi)^2 dPi`, exact.
    pub fn independence_gap(&self) -> f64 {
        self.integrate_cells(3, |c, u, _| {
            let diff = c - u.iter().product::<f64>();
            diff * diff
        })
        .max(0.0)
    }

    /// Largest `|C(u) - other(u)|` over a tensor grid made of both copulas'
    /// range breakpoints plus `per_axis` equally spaced points.
    pub fn sup_distance_on_grid(&self, other: &CheckerboardCopula, per_axis: usize) -> Result<f64> {
        if other.dim() != self.dim() {
            return Err(Error::domain("copulas differ in dimension"));
        }
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|j| {
                let mut pts: Vec<f64> = self.margin(j).range();
                pts.extend(other.margin(j).range());
                pts.extend((0..=per_axis).map(|i| i as f64 / per_axis.max(1) as f64));
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts
            })
            .collect();
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let mut best = 0.0f64;
        let mut u = vec![0.0; self.dim()];
        let mut err = None;
        for_each_index(&shape, |idx| {
            for (j, &i) in idx.iter().enumerate() {
                u[j] = axes[j][i];
            }
            match (self.cdf(&u), other.cdf(&u)) {
                (Ok(a), Ok(b)) => best = best.max((a - b).abs()),
                (Err(e), _) | (_, Err(e)) => err = Some(e),
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(best),
        }
    }
}

/// `varrho_d = 2^d (d + 1) / (2^d - (d + 1))`.
pub fn spearman_normalizer(d: usize) -> f64 {
    let two_d = 2f64.powi(d as i32);
    let d1 = (d + 1) as f64;
    two_d * d1 / (two_d - d1)
}
