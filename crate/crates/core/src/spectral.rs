//! Cosine basis on a rectangle, spectral coefficients of maps and
//! trajectories, and the ergodic metric with its gradient.
//!
//! The basis functions are
//!
//! ```text
//! f_k(x) = (1 / h_k) * cos(k1 * pi * x1 / L1) * cos(k2 * pi * x2 / L2)
//! ```
//!
//! for `0 <= k1, k2 <= K`, with `h_k` chosen so that every `f_k` has unit
//! L2 norm over `[0, L1] x [0, L2]`. The metric compares coefficients with
//! Sobolev-type weights `alpha_k = (1 + |k|^2)^(-3/2)`.
//!
//! Coefficients are stored in row-major index order: the flat position of
//! `k = (k1, k2)` is `k1 * (K + 1) + k2`.

use std::f64::consts::PI;

use crate::error::{precondition, Error, Result};
use crate::maps::GridMap;
use crate::Point;

/// Index set, normalizations and weights of a truncated cosine basis.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSpec {
    lengths: [f64; 2],
    max_index: usize,
    indices: Vec<[usize; 2]>,
    normalizations: Vec<f64>,
    weights: Vec<f64>,
}

impl BasisSpec {
    pub fn new(lengths: [f64; 2], max_index: usize) -> Result<Self> {
        if !lengths.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(Error::Config(format!(
                "domain lengths must be positive, got {lengths:?}"
            )));
        }
        let side = max_index + 1;
        let mut indices = Vec::with_capacity(side * side);
        let mut normalizations = Vec::with_capacity(side * side);
        let mut weights = Vec::with_capacity(side * side);
        for k1 in 0..side {
            for k2 in 0..side {
                indices.push([k1, k2]);
                // int_0^L cos^2(k pi x / L) dx is L for k = 0 and L / 2 otherwise.
                let half = |k: usize, l: f64| if k == 0 { l } else { 0.5 * l };
                normalizations.push((half(k1, lengths[0]) * half(k2, lengths[1])).sqrt());
                let norm_sq = (k1 * k1 + k2 * k2) as f64;
                weights.push((1.0 + norm_sq).powf(-1.5));
            }
        }
        Ok(Self {
            lengths,
            max_index,
            indices,
            normalizations,
            weights,
        })
    }

    /// Basis on the unit square.
    pub fn unit(max_index: usize) -> Self {
        Self::new([1.0, 1.0], max_index).expect("unit lengths are valid")
    }

    pub fn lengths(&self) -> [f64; 2] {
        self.lengths
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    /// Number of coefficients, `(K + 1)^2`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[[usize; 2]] {
        &self.indices
    }

    pub fn normalizations(&self) -> &[f64] {
        &self.normalizations
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Flat position of `k`, if it is part of the basis.
    pub fn position(&self, k: [usize; 2]) -> Option<usize> {
        (k[0] <= self.max_index && k[1] <= self.max_index)
            .then(|| k[0] * (self.max_index + 1) + k[1])
    }

    pub fn contains(&self, x: Point) -> bool {
        (0.0..=self.lengths[0]).contains(&x[0]) && (0.0..=self.lengths[1]).contains(&x[1])
    }

    pub(crate) fn check_point(&self, x: Point) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                point: x,
                lengths: self.lengths,
            })
        }
    }

    fn checked_position(&self, k: [usize; 2]) -> Result<usize> {
        self.position(k).ok_or_else(|| {
            Error::Precondition(format!(
                "index {k:?} exceeds the basis cap {}",
                self.max_index
            ))
        })
    }

    /// Evaluates `f_k(x)`.
    pub fn eval(&self, k: [usize; 2], x: Point) -> Result<f64> {
        self.check_point(x)?;
        let pos = self.checked_position(k)?;
        let c1 = (k[0] as f64 * PI * x[0] / self.lengths[0]).cos();
        let c2 = (k[1] as f64 * PI * x[1] / self.lengths[1]).cos();
        Ok(c1 * c2 / self.normalizations[pos])
    }

    /// Evaluates the spatial gradient of `f_k` at `x`.
    pub fn grad(&self, k: [usize; 2], x: Point) -> Result<Point> {
        self.check_point(x)?;
        let pos = self.checked_position(k)?;
        let w1 = k[0] as f64 * PI / self.lengths[0];
        let w2 = k[1] as f64 * PI / self.lengths[1];
        let h = self.normalizations[pos];
        Ok([
            -w1 * (w1 * x[0]).sin() * (w2 * x[1]).cos() / h,
            -w2 * (w1 * x[0]).cos() * (w2 * x[1]).sin() / h,
        ])
    }

    pub(crate) fn tables(&self) -> TrigTables {
        let side = self.max_index + 1;
        TrigTables {
            cx: vec![0.0; side],
            sx: vec![0.0; side],
            cy: vec![0.0; side],
            sy: vec![0.0; side],
        }
    }

    /// Fills cosines and sines of `k * pi * x_i / L_i` for every `k <= K`
    /// using the Chebyshev recurrence.
    pub(crate) fn fill_tables(&self, x: Point, t: &mut TrigTables) {
        fill_axis(PI * x[0] / self.lengths[0], &mut t.cx, &mut t.sx);
        fill_axis(PI * x[1] / self.lengths[1], &mut t.cy, &mut t.sy);
    }

    /// Adds `f_k(x) * h_k` (the unnormalized products) for every sample
    /// in `points` into `acc`.
    pub(crate) fn accumulate_products(
        &self,
        points: &[Point],
        tables: &mut TrigTables,
        acc: &mut [f64],
    ) -> Result<()> {
        let side = self.max_index + 1;
        for &p in points {
            self.check_point(p)?;
            self.fill_tables(p, tables);
            for (k1, row) in acc.chunks_exact_mut(side).enumerate() {
                let a = tables.cx[k1];
                for (slot, cy) in row.iter_mut().zip(&tables.cy) {
                    *slot += a * cy;
                }
            }
        }
        Ok(())
    }

    /// Gradient of `sum_k w_k * h_k * f_k(x)` at the point whose tables are
    /// loaded. `w` is indexed like the coefficients.
    pub(crate) fn weighted_gradient(&self, w: &[f64], tables: &TrigTables) -> Point {
        let side = self.max_index + 1;
        let w1 = PI / self.lengths[0];
        let w2 = PI / self.lengths[1];
        let mut gx = 0.0;
        let mut gy = 0.0;
        for (k1, row) in w.chunks_exact(side).enumerate() {
            let mut r_cos = 0.0;
            let mut r_sin = 0.0;
            for (k2, wk) in row.iter().enumerate() {
                r_cos += wk * tables.cy[k2];
                r_sin += wk * k2 as f64 * tables.sy[k2];
            }
            gx -= k1 as f64 * w1 * tables.sx[k1] * r_cos;
            gy -= w2 * tables.cx[k1] * r_sin;
        }
        [gx, gy]
    }
}

fn fill_axis(theta: f64, cos: &mut [f64], sin: &mut [f64]) {
    let (s1, c1) = theta.sin_cos();
    cos[0] = 1.0;
    sin[0] = 0.0;
    if cos.len() > 1 {
        cos[1] = c1;
        sin[1] = s1;
    }
    for k in 2..cos.len() {
        cos[k] = 2.0 * c1 * cos[k - 1] - cos[k - 2];
        sin[k] = 2.0 * c1 * sin[k - 1] - sin[k - 2];
    }
}

/// Scratch buffers holding per-axis trig values for one point.
#[derive(Clone, Debug)]
pub(crate) struct TrigTables {
    pub cx: Vec<f64>,
    pub sx: Vec<f64>,
    pub cy: Vec<f64>,
    pub sy: Vec<f64>,
}

/// Spectral coefficients in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector(Vec<f64>);

impl CoefficientVector {
    pub fn new(basis: &BasisSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return precondition(format!("coefficient {i} is not finite"));
        }
        Ok(Self(values))
    }

    pub fn zeros(basis: &BasisSpec) -> Self {
        Self(vec![0.0; basis.len()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for CoefficientVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_len(basis: &BasisSpec, found: usize) -> Result<()> {
    if found == basis.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: basis.len(),
            found,
        })
    }
}

/// Tolerance on `sum(cells) * cell_area = 1` accepted as "normalized".
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Coefficients `xi_k` of a normalized map by midpoint quadrature on the
/// map's own grid.
pub fn map_coefficients(map: &GridMap, basis: &BasisSpec) -> Result<CoefficientVector> {
    if map.lengths() != basis.lengths() {
        return precondition(format!(
            "map domain {:?} differs from basis domain {:?}",
            map.lengths(),
            basis.lengths()
        ));
    }
    let integral = map.integral();
    if (integral - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return precondition(format!("map is not normalized (integral {integral})"));
    }
    let side = basis.max_index() + 1;
    let (nx, ny) = (map.nx(), map.ny());
    let [l1, l2] = basis.lengths();
    let axis_cos = |n: usize, l: f64| -> Vec<f64> {
        let mut out = vec![0.0; side * n];
        for i in 0..n {
            let x = (i as f64 + 0.5) * l / n as f64;
            for k in 0..side {
                out[k * n + i] = (k as f64 * PI * x / l).cos();
            }
        }
        out
    };
    let cos_x = axis_cos(nx, l1);
    let cos_y = axis_cos(ny, l2);

    // partial[iy][k1] = sum_ix phi(ix, iy) cos(k1 ...)
    let mut partial = vec![0.0; ny * side];
    for (iy, row) in map.cells().chunks_exact(nx).enumerate() {
        for k1 in 0..side {
            let basis_row = &cos_x[k1 * nx..(k1 + 1) * nx];
            partial[iy * side + k1] = row.iter().zip(basis_row).map(|(a, b)| a * b).sum();
        }
    }
    let area = map.cell_area();
    let mut values = vec![0.0; basis.len()];
    for k1 in 0..side {
        for k2 in 0..side {
            let basis_col = &cos_y[k2 * ny..(k2 + 1) * ny];
            let s: f64 = (0..ny).map(|iy| partial[iy * side + k1] * basis_col[iy]).sum();
            let pos = k1 * side + k2;
            values[pos] = s * area / basis.normalizations()[pos];
        }
    }
    CoefficientVector::new(basis, values)
}

fn check_equal_lengths<T: AsRef<[Point]>>(trajectories: &[T]) -> Result<usize> {
    let Some(first) = trajectories.first() else {
        return precondition("at least one trajectory is required");
    };
    let n = first.as_ref().len();
    if n == 0 {
        return precondition("trajectories must contain at least one sample");
    }
    for (i, t) in trajectories.iter().enumerate() {
        if t.as_ref().len() != n {
            return precondition(format!(
                "trajectory {i} has {} samples, expected {n}",
                t.as_ref().len()
            ));
        }
    }
    Ok(n)
}

/// Coefficients `c_k` of the joint time-average statistics of a set of
/// equally long sampled trajectories.
pub fn trajectory_coefficients<T: AsRef<[Point]>>(
    trajectories: &[T],
    basis: &BasisSpec,
) -> Result<CoefficientVector> {
    let samples = check_equal_lengths(trajectories)?;
    let mut acc = vec![0.0; basis.len()];
    let mut tables = basis.tables();
    for t in trajectories {
        basis.accumulate_products(t.as_ref(), &mut tables, &mut acc)?;
    }
    let count = (trajectories.len() * samples) as f64;
    for (v, h) in acc.iter_mut().zip(basis.normalizations()) {
        *v /= count * h;
    }
    CoefficientVector::new(basis, acc)
}

/// `sum_k alpha_k (c_k - xi_k)^2`.
pub fn ergodic_metric(
    c: &CoefficientVector,
    xi: &CoefficientVector,
    basis: &BasisSpec,
) -> Result<f64> {
    check_len(basis, c.len())?;
    check_len(basis, xi.len())?;
    Ok(weighted_distance(c.values(), xi.values(), basis.weights()))
}

pub(crate) fn weighted_distance(c: &[f64], xi: &[f64], weights: &[f64]) -> f64 {
    c.iter()
        .zip(xi)
        .zip(weights)
        .map(|((a, b), w)| w * (a - b) * (a - b))
        .sum()
}

/// Gradient of the ergodic metric with respect to every trajectory sample.
///
/// Returns one 2-vector per sample, grouped per trajectory.
pub fn ergodic_gradient_points<T: AsRef<[Point]>>(
    trajectories: &[T],
    xi: &CoefficientVector,
    basis: &BasisSpec,
) -> Result<Vec<Vec<Point>>> {
    check_len(basis, xi.len())?;
    let samples = check_equal_lengths(trajectories)?;
    let c = trajectory_coefficients(trajectories, basis)?;
    let scale = 2.0 / (trajectories.len() * samples) as f64;
    let w = gradient_weights(basis, c.values(), xi.values(), scale);
    let mut tables = basis.tables();
    Ok(trajectories
        .iter()
        .map(|t| {
            t.as_ref()
                .iter()
                .map(|&p| {
                    basis.fill_tables(p, &mut tables);
                    basis.weighted_gradient(&w, &tables)
                })
                .collect()
        })
        .collect())
}

/// `scale * alpha_k * (c_k - xi_k) / h_k`, the per-index factors of the
/// metric gradient.
pub(crate) fn gradient_weights(basis: &BasisSpec, c: &[f64], xi: &[f64], scale: f64) -> Vec<f64> {
    c.iter()
        .zip(xi)
        .zip(basis.weights().iter().zip(basis.normalizations()))
        .map(|((a, b), (w, h))| scale * w * (a - b) / h)
        .collect()
}

/// Evaluates `sum_k coeffs_k f_k` at the cell midpoints of an `nx` by `ny`
/// grid. Cells may come out negative.
pub fn reconstruct_map(
    coeffs: &CoefficientVector,
    basis: &BasisSpec,
    nx: usize,
    ny: usize,
) -> Result<GridMap> {
    check_len(basis, coeffs.len())?;
    if nx < 2 || ny < 2 {
        return precondition(format!("resolution must be at least 2x2, got {nx}x{ny}"));
    }
    let side = basis.max_index() + 1;
    let [l1, l2] = basis.lengths();
    // weighted[k1][k2] = coeff / h
    let weighted: Vec<f64> = coeffs
        .values()
        .iter()
        .zip(basis.normalizations())
        .map(|(c, h)| c / h)
        .collect();
    let cos_axis = |i: usize, n: usize, l: f64| -> Vec<f64> {
        let x = (i as f64 + 0.5) * l / n as f64;
        (0..side).map(|k| (k as f64 * PI * x / l).cos()).collect()
    };
    let cy_all: Vec<Vec<f64>> = (0..ny).map(|iy| cos_axis(iy, ny, l2)).collect();
    let cx_all: Vec<Vec<f64>> = (0..nx).map(|ix| cos_axis(ix, nx, l1)).collect();
    let mut cells = vec![0.0; nx * ny];
    for (iy, cy) in cy_all.iter().enumerate() {
        // inner[k1] = sum_k2 weighted[k1][k2] cos(k2 ...)
        let inner: Vec<f64> = weighted
            .chunks_exact(side)
            .map(|row| row.iter().zip(cy).map(|(a, b)| a * b).sum())
            .collect();
        for (ix, cx) in cx_all.iter().enumerate() {
            cells[iy * nx + ix] = inner.iter().zip(cx).map(|(a, b)| a * b).sum();
        }
    }
    Ok(GridMap::from_signed(nx, ny, basis.lengths(), cells))
}
