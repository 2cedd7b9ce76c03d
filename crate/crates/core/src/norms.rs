//! Space-time norms of trajectories and log-log rate fits.
//!
//! Spatial norms are computed spectrally: `‖(−Δ)^{s/2} f‖² = Σ λ_j^s ξ_j²`.
//! Time suprema are maxima over stored nodes; time integrals use the
//! composite trapezoidal rule.

use thiserror::Error;

use crate::spectral::SpectralField;
use crate::timeloop::{SolveError, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("seminorm order {0} is outside 0..=4")]
    Order(u32),
    #[error("rate fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("rate fit point {index} is not positive: b = {b}, value = {value}")]
    NonPositive { index: usize, b: f64, value: f64 },
    #[error("rate fit is degenerate: all b values coincide")]
    Degenerate,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Spatial operator applied before taking `L²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Identity,
    Gradient,
    Laplacian,
    GradLaplacian,
    BiLaplacian,
}

impl Operator {
    /// Power of the eigenvalue weighting the squared coefficients.
    pub fn order(self) -> u32 {
        match self {
            Operator::Identity => 0,
            Operator::Gradient => 1,
            Operator::Laplacian => 2,
            Operator::GradLaplacian => 3,
            Operator::BiLaplacian => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    E,
    X,
    XwEnergy { b: f64 },
    XkEnergy { b: f64 },
    L2L2,
    LinfL2(Operator),
}

impl NormKind {
    pub fn label(&self) -> String {
        match self {
            NormKind::E => "E".into(),
            NormKind::X => "X".into(),
            NormKind::XwEnergy { .. } => "XW_energy".into(),
            NormKind::XkEnergy { .. } => "XK_energy".into(),
            NormKind::L2L2 => "L2L2".into(),
            NormKind::LinfL2(op) => format!("LinfL2_{op:?}"),
        }
    }

    pub fn eval(&self, traj: &Trajectory) -> f64 {
        match *self {
            NormKind::E => e_norm(traj),
            NormKind::X => x_norm(traj),
            NormKind::XwEnergy { b } => xw_energy(traj, b).norm(),
            NormKind::XkEnergy { b } => xk_energy(traj, b).norm(),
            NormKind::L2L2 => l2l2_sq(traj.u(), traj.grid().dt(), 0).sqrt(),
            NormKind::LinfL2(op) => linf_sq(traj.u(), op.order()).sqrt(),
        }
    }
}

fn seminorm_sq(f: &SpectralField, order: u32) -> f64 {
    f.weighted_norm_sq(order as i32)
}

/// `‖(−Δ)^{order/2} f‖_{L²}`.
pub fn sobolev_seminorm(f: &SpectralField, order: u32) -> Result<f64, NormError> {
    if order > 4 {
        return Err(NormError::Order(order));
    }
    Ok(seminorm_sq(f, order).sqrt())
}

fn linf_sq(fields: &[SpectralField], order: u32) -> f64 {
    fields.iter().map(|f| seminorm_sq(f, order)).fold(0.0, f64::max)
}

fn l2l2_sq(fields: &[SpectralField], dt: f64, order: u32) -> f64 {
    let n = fields.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = fields[1..n - 1].iter().map(|f| seminorm_sq(f, order)).sum();
    dt * (inner + 0.5 * (seminorm_sq(&fields[0], order) + seminorm_sq(&fields[n - 1], order)))
}

/// `(sup ‖u_t‖² + sup ‖∇u‖²)^{1/2}`.
pub fn e_norm(traj: &Trajectory) -> f64 {
    (linf_sq(traj.ut(), 0) + linf_sq(traj.u(), 1)).sqrt()
}

/// `(‖u_tt‖²_{L²L²} + sup ‖∇u_t‖² + sup ‖Δu‖²)^{1/2}`.
pub fn x_norm(traj: &Trajectory) -> f64 {
    let dt = traj.grid().dt();
    (l2l2_sq(traj.utt(), dt, 0) + linf_sq(traj.ut(), 1) + linf_sq(traj.u(), 2)).sqrt()
}

/// Labeled squared terms of an energy functional.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    pub terms: Vec<(&'static str, f64)>,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.terms.iter().map(|(_, v)| v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.total().sqrt()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

/// Higher-order energy of the pressure form.
pub fn xw_energy(traj: &Trajectory, b: f64) -> EnergyBreakdown {
    let dt = traj.grid().dt();
    EnergyBreakdown {
        terms: vec![
            ("grad_utt_l2l2", l2l2_sq(traj.utt(), dt, 1)),
            ("lap_ut_linf", linf_sq(traj.ut(), 2)),
            ("grad_lap_u_linf", linf_sq(traj.u(), 3)),
            ("b_grad_lap_ut_l2l2", b * l2l2_sq(traj.ut(), dt, 3)),
        ],
    }
}

/// Higher-order energy of the potential form. `u_ttt` is not stored and is
/// taken from finite differences of `u_tt`.
pub fn xk_energy(traj: &Trajectory, b: f64) -> EnergyBreakdown {
    let dt = traj.grid().dt();
    let d = traj.differentiated();
    EnergyBreakdown {
        terms: vec![
            ("grad_uttt_l2l2", l2l2_sq(d.utt(), dt, 1)),
            ("lap_utt_linf", linf_sq(traj.utt(), 2)),
            ("grad_lap_ut_linf", linf_sq(traj.ut(), 3)),
            ("bilap_u_linf", linf_sq(traj.u(), 4)),
            ("b_grad_lap_utt_l2l2", b * l2l2_sq(traj.utt(), dt, 3)),
            ("b_bilap_ut_l2l2", b * l2l2_sq(traj.ut(), dt, 4)),
        ],
    }
}

/// Norm of the stepwise difference `a − b`.
pub fn traj_diff_norm(a: &Trajectory, b: &Trajectory, kind: NormKind) -> Result<f64, NormError> {
    Ok(kind.eval(&a.difference(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares of `log value` against `log b`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit, NormError> {
    if points.len() < 3 {
        return Err(NormError::TooFewPoints(points.len()));
    }
    for (index, &(b, value)) in points.iter().enumerate() {
        if !(b > 0.0 && value > 0.0) {
            return Err(NormError::NonPositive { index, b, value });
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(NormError::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Observed `(b, value)` series for one norm with its fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub norm: String,
    pub rows: Vec<(f64, f64)>,
    pub fit: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateTable {
    pub series: Vec<RateSeries>,
}

impl RateTable {
    /// Adds a series; rows are sorted by `b` descending and fitted when
    /// possible.
    pub fn push(&mut self, norm: impl Into<String>, mut rows: Vec<(f64, f64)>) {
        rows.sort_by(|x, y| y.0.total_cmp(&x.0));
        let fit = fit_rate(&rows).ok();
        self.series.push(RateSeries {
            norm: norm.into(),
            rows,
            fit,
        });
    }

    pub fn get(&self, norm: &str) -> Option<&RateSeries> {
        self.series.iter().find(|s| s.norm == norm)
    }
}
