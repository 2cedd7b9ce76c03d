//! Sine eigenbasis of the Dirichlet Laplacian on a box.
//!
//! A [`SpectralField`] holds coefficients against the L²-orthonormal
//! eigenfunctions
//!
//! ```text
//! w_j(x) = Π_a sqrt(2 / L_a) · sin(j_a π x_a / L_a),   1 <= j_a <= n_a
//! ```
//!
//! so the mass matrix is the identity and `-Δ w_j = λ_j w_j` with
//! `λ_j = Σ_a (j_a π / L_a)²`. Every finite expansion vanishes on the
//! boundary together with its Laplacian.
//!
//! Pointwise work happens on a [`GridField`]: samples on the uniform grid of
//! the `2 L_a`-periodic extension with `2 m_a` nodes per axis, where
//! `m_a = 2 n_a + 1`. The first `m_a` nodes of each axis are the cell
//! midpoints of `(0, L_a)`; the remaining nodes carry the extension and are
//! filled automatically by synthesis (odd for sine fields, even for their
//! derivatives).
//!
//! The projection back onto the basis is exact for every trigonometric
//! polynomial of degree at most `2 n_a` per axis on the extended period:
//! the sine part is read off directly and the cosine part is projected with
//! the closed-form integrals `∫ cos(Kπx/L) sin(jπx/L) dx`. Products of two
//! fields (and of their gradients) are such polynomials, so [`multiply`]
//! and [`grad_dot`] return the exact Galerkin projection. Smooth
//! non-polynomial integrands such as `u / α` are projected with spectral
//! accuracy.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest mode count for which dense operator matrices are materialized.
pub const DENSE_MODE_LIMIT: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("domain dimension must be 1, 2 or 3, got {0}")]
    Dimension(usize),
    #[error("axis {axis}: length must be positive and finite, got {length}")]
    Length { axis: usize, length: f64 },
    #[error("axis {axis}: at least one mode is required")]
    NoModes { axis: usize },
    #[error("lengths and modes disagree in dimension ({lengths} vs {modes})")]
    DimensionMismatch { lengths: usize, modes: usize },
    #[error("mode index {index:?} out of range for modes {modes:?}")]
    Index { index: Vec<usize>, modes: Vec<usize> },
    #[error("fields live on different domains")]
    DomainMismatch,
    #[error("expected {expected} values, got {got}")]
    ValueCount { expected: usize, got: usize },
}

/// Serializable description of a box domain and its mode cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    /// Per-axis extents. Defaults to π on every axis when omitted.
    #[serde(default)]
    pub lengths: Vec<f64>,
    pub modes: Vec<usize>,
}

impl DomainSpec {
    pub fn unit_pi(modes: &[usize]) -> Self {
        Self {
            lengths: vec![PI; modes.len()],
            modes: modes.to_vec(),
        }
    }

    pub fn build(&self) -> Result<Arc<Domain>, SpectralError> {
        if self.lengths.is_empty() {
            Domain::new(&vec![PI; self.modes.len()], &self.modes)
        } else {
            Domain::new(&self.lengths, &self.modes)
        }
    }

    /// Same extents with every mode count doubled.
    pub fn refined(&self) -> Self {
        Self {
            lengths: self.lengths.clone(),
            modes: self.modes.iter().map(|n| 2 * n).collect(),
        }
    }
}

/// One axis of the tensor basis: synthesis, derivative synthesis and exact
/// projection matrices, all row-major.
#[derive(Debug)]
struct AxisBasis {
    length: f64,
    modes: usize,
    half: usize,
    /// `2 m × n`: `sqrt(2/L) sin(jπx_i/L)`.
    synth: Vec<f64>,
    /// `2 m × n`: `sqrt(2/L) (jπ/L) cos(jπx_i/L)`.
    dsynth: Vec<f64>,
    /// `n × 2 m`: exact L²(0, L) projection of periodic grid samples.
    proj: Vec<f64>,
}

impl AxisBasis {
    fn new(length: f64, modes: usize) -> Self {
        let half = 2 * modes + 1;
        let full = 2 * half;
        let h = length / half as f64;
        let nodes: Vec<f64> = (0..full).map(|i| (i as f64 + 0.5) * h).collect();
        let norm = (2.0 / length).sqrt();

        let mut synth = vec![0.0; full * modes];
        let mut dsynth = vec![0.0; full * modes];
        for (i, &x) in nodes.iter().enumerate() {
            for j in 1..=modes {
                let k = j as f64 * PI / length;
                synth[i * modes + j - 1] = norm * (k * x).sin();
                dsynth[i * modes + j - 1] = norm * k * (k * x).cos();
            }
        }

        // Discrete Fourier coefficients on the extended period, then the
        // closed-form projections of sin/cos modes onto w_j over (0, L).
        let mut proj = vec![0.0; modes * full];
        let inv_full = 1.0 / full as f64;
        let sine_weight = (length / 2.0).sqrt();
        let cos_weight = norm * length / PI;
        for j in 1..=modes {
            let row = &mut proj[(j - 1) * full..j * full];
            for (i, &x) in nodes.iter().enumerate() {
                let theta = PI * x / length;
                let mut acc = sine_weight * 2.0 * inv_full * (j as f64 * theta).sin();
                for kk in 0..half {
                    let c = cos_sin_integral(j, kk);
                    if c == 0.0 {
                        continue;
                    }
                    let w = if kk == 0 { inv_full } else { 2.0 * inv_full };
                    acc += cos_weight * c * w * (kk as f64 * theta).cos();
                }
                row[i] = acc;
            }
        }

        Self {
            length,
            modes,
            half,
            synth,
            dsynth,
            proj,
        }
    }

    fn full(&self) -> usize {
        2 * self.half
    }
}

/// `∫_0^π cos(K u) sin(j u) du`.
fn cos_sin_integral(j: usize, k: usize) -> f64 {
    if j == k || (j + k).is_multiple_of(2) {
        return 0.0;
    }
    let (jf, kf) = (j as f64, k as f64);
    2.0 * jf / (jf * jf - kf * kf)
}

/// Dense Kronecker forms of the per-axis matrices, for small mode counts.
#[derive(Debug)]
pub struct DenseOperators {
    /// `G × N` synthesis.
    pub synth: DMatrix<f64>,
    /// Per-axis `G × N` derivative synthesis.
    pub dsynth: Vec<DMatrix<f64>>,
    /// `N × G` projection.
    pub proj: DMatrix<f64>,
}

/// Tensor-product Dirichlet box with a mode cutoff.
pub struct Domain {
    axes: Vec<AxisBasis>,
    eigenvalues: Vec<f64>,
    mode_shape: Vec<usize>,
    grid_shape: Vec<usize>,
    dense: OnceLock<Option<DenseOperators>>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("lengths", &self.lengths())
            .field("modes", &self.mode_shape)
            .finish()
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.mode_shape == other.mode_shape && self.lengths() == other.lengths()
    }
}

impl Domain {
    pub fn new(lengths: &[f64], modes: &[usize]) -> Result<Arc<Self>, SpectralError> {
        if lengths.len() != modes.len() {
            return Err(SpectralError::DimensionMismatch {
                lengths: lengths.len(),
                modes: modes.len(),
            });
        }
        if !(1..=3).contains(&modes.len()) {
            return Err(SpectralError::Dimension(modes.len()));
        }
        for (axis, (&length, &n)) in lengths.iter().zip(modes).enumerate() {
            if !(length > 0.0 && length.is_finite()) {
                return Err(SpectralError::Length { axis, length });
            }
            if n == 0 {
                return Err(SpectralError::NoModes { axis });
            }
        }
        let axes: Vec<AxisBasis> = lengths.iter().zip(modes).map(|(&l, &n)| AxisBasis::new(l, n)).collect();
        let grid_shape = axes.iter().map(AxisBasis::full).collect();
        let mut domain = Self {
            axes,
            eigenvalues: Vec::new(),
            mode_shape: modes.to_vec(),
            grid_shape,
            dense: OnceLock::new(),
        };
        domain.eigenvalues = (0..domain.mode_count())
            .map(|flat| {
                let index = domain.multi_index(flat);
                domain.eigenvalue_unchecked(&index)
            })
            .collect();
        Ok(Arc::new(domain))
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.length).collect()
    }

    pub fn modes(&self) -> &[usize] {
        &self.mode_shape
    }

    /// Interior nodes per axis on `(0, L_a)`.
    pub fn half_grid(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.half).collect()
    }

    /// Nodes per axis on the extended period.
    pub fn grid_shape(&self) -> &[usize] {
        &self.grid_shape
    }

    pub fn mode_count(&self) -> usize {
        self.mode_shape.iter().product()
    }

    pub fn grid_len(&self) -> usize {
        self.grid_shape.iter().product()
    }

    pub fn spec(&self) -> DomainSpec {
        DomainSpec {
            lengths: self.lengths(),
            modes: self.mode_shape.clone(),
        }
    }

    /// Multi-index (1-based per axis) of a flat coefficient position.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            index[a] = flat % self.mode_shape[a] + 1;
            flat /= self.mode_shape[a];
        }
        index
    }

    pub fn flat_index(&self, index: &[usize]) -> Result<usize, SpectralError> {
        let in_range =
            index.len() == self.dim() && index.iter().zip(&self.mode_shape).all(|(&j, &n)| (1..=n).contains(&j));
        if !in_range {
            return Err(SpectralError::Index {
                index: index.to_vec(),
                modes: self.mode_shape.clone(),
            });
        }
        Ok(index
            .iter()
            .zip(&self.mode_shape)
            .fold(0, |acc, (&j, &n)| acc * n + (j - 1)))
    }

    fn eigenvalue_unchecked(&self, index: &[usize]) -> f64 {
        index
            .iter()
            .zip(&self.axes)
            .map(|(&j, axis)| {
                let k = j as f64 * PI / axis.length;
                k * k
            })
            .sum()
    }

    /// Eigenvalue `λ_j = Σ_a (j_a π / L_a)²` of `-Δ` for a 1-based multi-index.
    pub fn eigenvalue(&self, index: &[usize]) -> Result<f64, SpectralError> {
        self.flat_index(index)?;
        Ok(self.eigenvalue_unchecked(index))
    }

    /// Eigenvalues in flat coefficient order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Physical coordinates of grid node `index` (per-axis node numbers).
    pub fn node(&self, index: &[usize]) -> Vec<f64> {
        index
            .iter()
            .zip(&self.axes)
            .map(|(&i, axis)| (i as f64 + 0.5) * axis.length / axis.half as f64)
            .collect()
    }

    /// Flat grid positions of the nodes lying inside the physical box.
    pub fn physical_nodes(&self) -> Vec<usize> {
        let half = self.half_grid();
        (0..self.grid_len())
            .filter(|&flat| {
                let mut rest = flat;
                let mut inside = true;
                for a in (0..self.dim()).rev() {
                    let i = rest % self.grid_shape[a];
                    rest /= self.grid_shape[a];
                    inside &= i < half[a];
                }
                inside
            })
            .collect()
    }

    /// Quadrature weight of one physical node (midpoint rule).
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.length / a.half as f64).product()
    }

    /// Dense synthesis/projection matrices, available when
    /// `mode_count() <= DENSE_MODE_LIMIT`.
    pub fn dense(&self) -> Option<&DenseOperators> {
        self.dense
            .get_or_init(|| {
                if self.mode_count() > DENSE_MODE_LIMIT {
                    return None;
                }
                Some(self.build_dense())
            })
            .as_ref()
    }

    fn build_dense(&self) -> DenseOperators {
        let kron = |pick: &dyn Fn(usize) -> DMatrix<f64>| {
            let mut mat = DMatrix::from_element(1, 1, 1.0);
            for a in 0..self.dim() {
                mat = mat.kronecker(&pick(a));
            }
            mat
        };
        let synth = kron(&|a| {
            let ax = &self.axes[a];
            DMatrix::from_row_slice(ax.full(), ax.modes, &ax.synth)
        });
        let proj = kron(&|a| {
            let ax = &self.axes[a];
            DMatrix::from_row_slice(ax.modes, ax.full(), &ax.proj)
        });
        let dsynth = (0..self.dim())
            .map(|d| {
                kron(&|a| {
                    let ax = &self.axes[a];
                    let data = if a == d { &ax.dsynth } else { &ax.synth };
                    DMatrix::from_row_slice(ax.full(), ax.modes, data)
                })
            })
            .collect();
        DenseOperators { synth, dsynth, proj }
    }

    fn synthesize(&self, coeffs: &[f64], derivative_axis: Option<usize>) -> Vec<f64> {
        let mut shape = self.mode_shape.clone();
        let mut data = coeffs.to_vec();
        for (a, axis) in self.axes.iter().enumerate() {
            let mat = if derivative_axis == Some(a) {
                &axis.dsynth
            } else {
                &axis.synth
            };
            data = apply_along_axis(&data, &shape, a, mat, axis.full());
            shape[a] = axis.full();
        }
        data
    }

    fn project(&self, values: &[f64]) -> Vec<f64> {
        let mut shape = self.grid_shape.clone();
        let mut data = values.to_vec();
        for (a, axis) in self.axes.iter().enumerate() {
            data = apply_along_axis(&data, &shape, a, &axis.proj, axis.modes);
            shape[a] = axis.modes;
        }
        data
    }
}

/// Applies a row-major `out × shape[axis]` matrix along one tensor axis.
fn apply_along_axis(input: &[f64], shape: &[usize], axis: usize, mat: &[f64], out_len: usize) -> Vec<f64> {
    let in_len = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * out_len * inner];
    for o in 0..outer {
        let src = &input[o * in_len * inner..(o + 1) * in_len * inner];
        let dst = &mut out[o * out_len * inner..(o + 1) * out_len * inner];
        for r in 0..out_len {
            let row = &mat[r * in_len..(r + 1) * in_len];
            let target = &mut dst[r * inner..(r + 1) * inner];
            for (c, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let slice = &src[c * inner..(c + 1) * inner];
                for (t, &s) in target.iter_mut().zip(slice) {
                    *t += w * s;
                }
            }
        }
    }
    out
}

/// Coefficients of a function in the sine eigenbasis at one instant.
#[derive(Clone, Debug)]
pub struct SpectralField {
    domain: Arc<Domain>,
    coeffs: Vec<f64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && same_domain(&self.domain, &other.domain)
    }
}

pub(crate) fn same_domain(a: &Arc<Domain>, b: &Arc<Domain>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl SpectralField {
    pub fn zeros(domain: &Arc<Domain>) -> Self {
        Self {
            domain: Arc::clone(domain),
            coeffs: vec![0.0; domain.mode_count()],
        }
    }

    pub fn from_coeffs(domain: &Arc<Domain>, coeffs: Vec<f64>) -> Result<Self, SpectralError> {
        if coeffs.len() != domain.mode_count() {
            return Err(SpectralError::ValueCount {
                expected: domain.mode_count(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            domain: Arc::clone(domain),
            coeffs,
        })
    }

    /// Single basis function scaled by `coeff`.
    pub fn mode(domain: &Arc<Domain>, index: &[usize], coeff: f64) -> Result<Self, SpectralError> {
        let mut field = Self::zeros(domain);
        let flat = domain.flat_index(index)?;
        field.coeffs[flat] = coeff;
        Ok(field)
    }

    /// `amplitude · Π_a sin(j_a π x_a / L_a)`, i.e. a mode with the given peak value.
    pub fn sine(domain: &Arc<Domain>, index: &[usize], amplitude: f64) -> Result<Self, SpectralError> {
        let peak: f64 = domain.lengths().iter().map(|l| (2.0 / l).sqrt()).product();
        Self::mode(domain, index, amplitude / peak)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn check_domain(&self, other: &SpectralField) -> Result<(), SpectralError> {
        if same_domain(&self.domain, &other.domain) {
            Ok(())
        } else {
            Err(SpectralError::DomainMismatch)
        }
    }

    /// `Σ ξ_j²`, the squared L² norm.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `Σ λ_j^power ξ_j²`.
    pub fn weighted_norm_sq(&self, power: i32) -> f64 {
        self.coeffs
            .iter()
            .zip(self.domain.eigenvalues())
            .map(|(c, l)| l.powi(power) * c * c)
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            coeffs: self.coeffs.iter().map(|c| s * c).collect(),
        }
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        debug_assert!(same_domain(&self.domain, &other.domain));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    /// `(1 - theta) · self + theta · other`.
    pub fn lerp(&self, other: &SpectralField, theta: f64) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + theta * (b - a))
                .collect(),
        }
    }

    /// Point evaluation by direct summation; valid anywhere including the
    /// boundary.
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        let lengths = self.domain.lengths();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(flat, c)| {
                let index = self.domain.multi_index(flat);
                let basis: f64 = index
                    .iter()
                    .zip(point)
                    .zip(&lengths)
                    .map(|((&j, &x), &l)| (2.0 / l).sqrt() * (j as f64 * PI * x / l).sin())
                    .product();
                c * basis
            })
            .sum()
    }

    /// Copies coefficients into another cutoff on the same extents,
    /// truncating or zero-padding per axis.
    pub fn resample(&self, target: &Arc<Domain>) -> Result<Self, SpectralError> {
        if target.dim() != self.domain.dim() || target.lengths() != self.domain.lengths() {
            return Err(SpectralError::DomainMismatch);
        }
        let mut out = Self::zeros(target);
        for (flat, &c) in self.coeffs.iter().enumerate() {
            let index = self.domain.multi_index(flat);
            if let Ok(dst) = target.flat_index(&index) {
                out.coeffs[dst] = c;
            }
        }
        Ok(out)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, s: f64) -> SpectralField {
        self.scaled(s)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// Samples on the extended periodic grid of a domain.
#[derive(Clone, Debug)]
pub struct GridField {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl GridField {
    pub fn constant(domain: &Arc<Domain>, value: f64) -> Self {
        Self {
            domain: Arc::clone(domain),
            values: vec![value; domain.grid_len()],
        }
    }

    pub fn from_values(domain: &Arc<Domain>, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != domain.grid_len() {
            return Err(SpectralError::ValueCount {
                expected: domain.grid_len(),
                got: values.len(),
            });
        }
        Ok(Self {
            domain: Arc::clone(domain),
            values,
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two grids on the same domain.
    pub fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(same_domain(&self.domain, &other.domain));
        Self {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Extrema over the nodes inside the physical box.
    pub fn physical_extrema(&self) -> (f64, f64) {
        self.domain
            .physical_nodes()
            .into_iter()
            .map(|i| self.values[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Extrema over every node of the extended grid.
    pub fn extrema(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Midpoint-rule approximation of `∫_Ω g²`, exact for squares of fields.
    pub fn quadrature_norm_sq(&self) -> f64 {
        let w = self.domain.cell_volume();
        self.domain
            .physical_nodes()
            .into_iter()
            .map(|i| w * self.values[i] * self.values[i])
            .sum()
    }
}

/// Synthesis onto the extended grid.
pub fn to_grid(f: &SpectralField) -> GridField {
    GridField {
        domain: Arc::clone(&f.domain),
        values: f.domain.synthesize(&f.coeffs, None),
    }
}

/// Exact L² projection of grid samples onto the basis.
pub fn from_grid(g: &GridField) -> SpectralField {
    SpectralField {
        domain: Arc::clone(&g.domain),
        coeffs: g.domain.project(&g.values),
    }
}

/// Samples of `∂f/∂x_axis` on the extended grid.
pub fn partial_to_grid(f: &SpectralField, axis: usize) -> GridField {
    GridField {
        domain: Arc::clone(&f.domain),
        values: f.domain.synthesize(&f.coeffs, Some(axis)),
    }
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    SpectralField {
        domain: Arc::clone(&f.domain),
        coeffs: f
            .coeffs
            .iter()
            .zip(f.domain.eigenvalues())
            .map(|(c, l)| -l * c)
            .collect(),
    }
}

/// Galerkin projection of the pointwise product `f · g`.
pub fn multiply(f: &SpectralField, g: &SpectralField) -> Result<SpectralField, SpectralError> {
    f.check_domain(g)?;
    let fg = to_grid(f);
    let gg = to_grid(g);
    Ok(from_grid(&fg.zip_with(&gg, |a, b| a * b)))
}

/// Galerkin projection of `∇f · ∇g`.
pub fn grad_dot(f: &SpectralField, g: &SpectralField) -> Result<SpectralField, SpectralError> {
    f.check_domain(g)?;
    let domain = f.domain();
    let mut acc = GridField::constant(domain, 0.0);
    for axis in 0..domain.dim() {
        let df = partial_to_grid(f, axis);
        let dg = partial_to_grid(g, axis);
        for ((a, x), y) in acc.values.iter_mut().zip(&df.values).zip(&dg.values) {
            *a += x * y;
        }
    }
    Ok(from_grid(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Arc<Domain> {
        Domain::new(&[PI], &[n]).unwrap()
    }

    #[test]
    fn eigenvalues_match_analytic_spectrum() {
        assert!((line(4).eigenvalue(&[1]).unwrap() - 1.0).abs() < 1e-15);
        let unit = Domain::new(&[1.0], &[4]).unwrap();
        assert!((unit.eigenvalue(&[2]).unwrap() - 4.0 * PI * PI).abs() < 1e-12);
        let square = Domain::new(&[PI, PI], &[3, 3]).unwrap();
        assert!((square.eigenvalue(&[1, 1]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_index_errors() {
        let d = line(4);
        assert!(matches!(d.eigenvalue(&[0]), Err(SpectralError::Index { .. })));
        assert!(matches!(d.eigenvalue(&[5]), Err(SpectralError::Index { .. })));
        assert!(matches!(d.eigenvalue(&[1, 1]), Err(SpectralError::Index { .. })));
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(Domain::new(&[], &[]).is_err());
        assert!(Domain::new(&[1.0; 4], &[2; 4]).is_err());
        assert!(Domain::new(&[-1.0], &[2]).is_err());
        assert!(Domain::new(&[1.0], &[0]).is_err());
        assert!(Domain::new(&[1.0, 1.0], &[2]).is_err());
    }

    #[test]
    fn grid_meets_dealiasing_bound() {
        let d = Domain::new(&[PI, 2.0], &[5, 8]).unwrap();
        for (m, n) in d.half_grid().iter().zip(d.modes()) {
            assert!(2 * m >= 3 * n);
        }
        assert_eq!(d.grid_shape(), &[22, 34]);
    }

    #[test]
    fn first_mode_sampled_at_midpoint() {
        let d = line(8);
        let f = SpectralField::mode(&d, &[1], 1.0).unwrap();
        let g = to_grid(&f);
        // m = 17 midpoint nodes; node 8 sits at π/2.
        let x = d.node(&[8])[0];
        assert!((x - PI / 2.0).abs() < 1e-15);
        assert!((g.values()[8] - (2.0 / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_roundtrip() {
        let d = line(6);
        let g = to_grid(&SpectralField::zeros(&d));
        assert!(g.values().iter().all(|&v| v == 0.0));
        assert!(from_grid(&g).is_zero());
    }

    #[test]
    fn laplacian_of_first_mode() {
        let d = line(4);
        let f = SpectralField::mode(&d, &[1], 1.0).unwrap();
        let lf = laplacian(&f);
        assert!((lf.coeffs()[0] + 1.0).abs() < 1e-15);
        assert!(laplacian(&SpectralField::zeros(&d)).is_zero());
    }

    #[test]
    fn products_with_zero_vanish() {
        let d = Domain::new(&[PI, 1.5], &[4, 3]).unwrap();
        let f = SpectralField::from_coeffs(&d, (0..12).map(|i| (i as f64).sin()).collect()).unwrap();
        let z = SpectralField::zeros(&d);
        assert!(multiply(&f, &z).unwrap().is_zero());
        assert!(grad_dot(&f, &z).unwrap().is_zero());
    }

    #[test]
    fn domain_mismatch_detected() {
        let a = SpectralField::zeros(&line(4));
        let b = SpectralField::zeros(&line(5));
        assert_eq!(multiply(&a, &b), Err(SpectralError::DomainMismatch));
        assert_eq!(grad_dot(&a, &b), Err(SpectralError::DomainMismatch));
    }

    #[test]
    fn boundary_values_vanish() {
        let d = Domain::new(&[PI, 2.0], &[5, 4]).unwrap();
        let f = SpectralField::from_coeffs(&d, (0..20).map(|i| 1.0 / (1.0 + i as f64)).collect()).unwrap();
        let lf = laplacian(&f);
        for point in [[0.0, 0.7], [PI, 1.1], [1.0, 0.0], [2.2, 2.0]] {
            assert!(f.evaluate(&point).abs() < 1e-13);
            assert!(lf.evaluate(&point).abs() < 1e-11);
        }
    }

    #[test]
    fn resample_pads_and_truncates() {
        let coarse = Domain::new(&[PI, PI], &[2, 3]).unwrap();
        let fine = Domain::new(&[PI, PI], &[4, 6]).unwrap();
        let f = SpectralField::from_coeffs(&coarse, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let up = f.resample(&fine).unwrap();
        assert_eq!(up.coeffs()[fine.flat_index(&[2, 3]).unwrap()], 6.0);
        assert!((up.norm_sq() - f.norm_sq()).abs() < 1e-15);
        assert_eq!(up.resample(&coarse).unwrap(), f);
    }

    #[test]
    fn dense_operators_agree_with_separable_transforms() {
        let d = Domain::new(&[PI, 2.0], &[3, 4]).unwrap();
        let f = SpectralField::from_coeffs(&d, (0..12).map(|i| (0.3 * i as f64).cos()).collect()).unwrap();
        let dense = d.dense().unwrap();
        let x = nalgebra::DVector::from_column_slice(f.coeffs());
        let grid = &dense.synth * &x;
        let sep = to_grid(&f);
        for (a, b) in grid.iter().zip(sep.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        let dy = &dense.dsynth[1] * &x;
        for (a, b) in dy.iter().zip(partial_to_grid(&f, 1).values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let back = &dense.proj * grid;
        for (a, b) in back.iter().zip(f.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
