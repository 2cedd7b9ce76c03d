//! Picard iteration over the whole time slab.
//!
//! Each iterate solves the linearized problem with coefficients frozen around
//! the previous iterate, starting from the linear solve.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{self, Coefficients, DegeneracyReport, FrozenState, ModelError, ModelKind, ModelParams};
use crate::norms;
use crate::spectral::SpectralField;
use crate::timeloop::{self, CoefficientPath, SolveError, TimeGrid, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractionNorm {
    E,
    X,
}

impl ContractionNorm {
    /// `X` for the pressure form, `E` for the potential forms.
    pub fn default_for(kind: ModelKind) -> Self {
        if kind.is_pressure_form() {
            ContractionNorm::X
        } else {
            ContractionNorm::E
        }
    }

    pub fn eval(self, traj: &Trajectory) -> f64 {
        match self {
            ContractionNorm::E => norms::e_norm(traj),
            ContractionNorm::X => norms::x_norm(traj),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// `None` picks the model default.
    pub contraction_norm: Option<ContractionNorm>,
    pub report_ball_radius: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            contraction_norm: None,
            report_ball_radius: true,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<(), PicardError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(PicardError::Config {
                name: "tol",
                reason: "must be positive and finite".into(),
            });
        }
        if self.max_iter == 0 {
            return Err(PicardError::Config {
                name: "max_iter",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub iterations: usize,
    pub contraction_norm: ContractionNorm,
    /// `‖u^{m+1} − u^m‖` for every completed iteration.
    pub diffs: Vec<f64>,
    /// `diffs[m] / diffs[m − 1]`, one shorter than `diffs`.
    pub ratios: Vec<f64>,
    pub degeneracy: DegeneracyReport,
    /// Higher-order energy norm of the final iterate.
    pub observed_r: Option<f64>,
    pub converged: bool,
}

impl PicardReport {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::max)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PicardError {
    #[error("invalid Picard setting `{name}`: {reason}")]
    Config { name: &'static str, reason: String },
    #[error("degenerate coefficient: {0}")]
    Degeneracy(ModelError),
    #[error("no convergence after {} iterations (last diff {:e})", .report.iterations, .report.diffs.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { report: Box<PicardReport> },
    #[error(transparent)]
    Model(ModelError),
    #[error(transparent)]
    Solve(SolveError),
}

impl From<ModelError> for PicardError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Degenerate { .. } | ModelError::Collapse { .. } => PicardError::Degeneracy(e),
            other => PicardError::Model(other),
        }
    }
}

impl From<SolveError> for PicardError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => m.into(),
            other => PicardError::Solve(other),
        }
    }
}

/// Pressure-form Westervelt solve.
pub fn solve_westervelt(
    p0: &SpectralField,
    p1: &SpectralField,
    params: &ModelParams,
    grid: TimeGrid,
    cfg: &PicardConfig,
) -> Result<(Trajectory, PicardReport), PicardError> {
    if !params.kind.is_pressure_form() {
        return Err(ModelError::Invalid {
            name: "kind",
            reason: "expected the pressure form".into(),
        }
        .into());
    }
    iterate(p0, p1, params, grid, cfg)
}

/// Kuznetsov, or the potential form of Westervelt when `σ = 0`.
pub fn solve_kuznetsov(
    psi0: &SpectralField,
    psi1: &SpectralField,
    params: &ModelParams,
    grid: TimeGrid,
    cfg: &PicardConfig,
) -> Result<(Trajectory, PicardReport), PicardError> {
    if params.kind.is_pressure_form() {
        return Err(ModelError::Invalid {
            name: "kind",
            reason: "expected a potential form".into(),
        }
        .into());
    }
    iterate(psi0, psi1, params, grid, cfg)
}

/// Dispatches on `params.kind`.
pub fn solve(
    u0: &SpectralField,
    u1: &SpectralField,
    params: &ModelParams,
    grid: TimeGrid,
    cfg: &PicardConfig,
) -> Result<(Trajectory, PicardReport), PicardError> {
    iterate(u0, u1, params, grid, cfg)
}

fn iterate(
    u0: &SpectralField,
    u1: &SpectralField,
    params: &ModelParams,
    grid: TimeGrid,
    cfg: &PicardConfig,
) -> Result<(Trajectory, PicardReport), PicardError> {
    cfg.validate()?;
    params.validate()?;
    u0.check_domain(u1).map_err(ModelError::from)?;
    models::check_initial_alpha(u0, u1, params)?;
    let norm = cfg
        .contraction_norm
        .unwrap_or(ContractionNorm::default_for(params.kind));

    let mut current = timeloop::solve_linearized(u0, u1, &CoefficientPath::linear(grid), params, grid)?;
    let mut diffs = Vec::new();
    let mut converged = false;
    if params.is_linear() {
        diffs.push(0.0);
        converged = true;
    } else {
        for _ in 0..cfg.max_iter {
            let path = CoefficientPath::from_trajectory(&current);
            let next = timeloop::solve_linearized(u0, u1, &path, params, grid)?;
            let diff = norm.eval(&next.difference(&current)?);
            let scale = norm.eval(&next);
            diffs.push(diff);
            current = next;
            if diff <= cfg.tol * scale {
                converged = true;
                break;
            }
        }
    }

    let ratios = diffs.windows(2).map(|w| w[1] / w[0]).collect();
    let report = PicardReport {
        iterations: diffs.len(),
        contraction_norm: norm,
        diffs,
        ratios,
        degeneracy: degeneracy_of(&current, params),
        observed_r: cfg.report_ball_radius.then(|| ball_radius(&current, params)),
        converged,
    };
    if !converged {
        return Err(PicardError::NoConvergence {
            report: Box::new(report),
        });
    }
    Ok((current, report))
}

/// `α` band check over every stored node of a trajectory.
pub fn degeneracy_of(traj: &Trajectory, params: &ModelParams) -> DegeneracyReport {
    let rates = if params.kind.is_pressure_form() {
        traj.u()
    } else {
        traj.ut()
    };
    let path: Vec<_> = traj
        .grid()
        .nodes()
        .zip(rates)
        .map(|(t, r)| (t, models::alpha_of(r, params)))
        .collect();
    models::check_nondegeneracy(&path, params)
}

fn ball_radius(traj: &Trajectory, params: &ModelParams) -> f64 {
    if params.kind.is_pressure_form() {
        norms::xw_energy(traj, params.b).norm()
    } else {
        norms::xk_energy(traj, params.b).norm()
    }
}

/// `L²(0, T; L²)` norm of the projected nonlinear residual
/// `u_tt − P[(1/α)(bΔu_t + c²Δu + N(u))]` with `α` and `N` evaluated on the
/// trajectory itself. Infinite if `α` collapses somewhere.
pub fn residual(traj: &Trajectory, params: &ModelParams) -> f64 {
    let domain = traj.domain();
    let grid = traj.grid();
    let mut values = Vec::with_capacity(traj.len());
    for (i, t) in grid.nodes().enumerate() {
        let (u, ut, utt) = (&traj.u()[i], &traj.ut()[i], &traj.utt()[i]);
        let coeffs = if params.is_linear() {
            Coefficients::identity(domain)
        } else {
            match Coefficients::evaluate(params, FrozenState { value: u, rate: ut }, t) {
                Ok(c) => c,
                Err(_) => return f64::INFINITY,
            }
        };
        values.push((utt - &coeffs.acceleration(params, u, ut)).norm_sq());
    }
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    (grid.dt() * (inner + 0.5 * (values[0] + values[n - 1]))).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Domain;
    use std::f64::consts::PI;

    fn line(n: usize) -> std::sync::Arc<Domain> {
        Domain::new(&[PI], &[n]).unwrap()
    }

    #[test]
    fn linear_model_takes_one_iteration() {
        let d = line(6);
        let p0 = SpectralField::sine(&d, &[1], 0.1).unwrap();
        let p1 = SpectralField::zeros(&d);
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let params = ModelParams::westervelt(0.0, 0.01, 1.0, 1.0);
        let (traj, report) = solve_westervelt(&p0, &p1, &params, grid, &PicardConfig::default()).unwrap();
        assert_eq!(report.iterations, 1);
        assert!(report.converged && report.ratios.is_empty());
        let direct = timeloop::solve_linearized(&p0, &p1, &CoefficientPath::linear(grid), &params, grid).unwrap();
        assert_eq!(traj, direct);
    }

    #[test]
    fn large_data_is_degenerate() {
        let d = line(6);
        let p0 = SpectralField::sine(&d, &[1], 0.8).unwrap();
        let p1 = SpectralField::zeros(&d);
        let params = ModelParams::westervelt(1.0, 0.01, 1.0, 1.0);
        let err = solve_westervelt(
            &p0,
            &p1,
            &params,
            TimeGrid::new(1.0, 20).unwrap(),
            &PicardConfig::default(),
        );
        assert!(matches!(err, Err(PicardError::Degeneracy(_))));
    }

    #[test]
    fn small_data_contracts() {
        let d = line(8);
        let p0 = SpectralField::sine(&d, &[1], 0.1).unwrap();
        let p1 = SpectralField::zeros(&d);
        let params = ModelParams::westervelt(1.0, 0.01, 1.0, 1.0);
        let cfg = PicardConfig::default();
        let (traj, report) = solve_westervelt(&p0, &p1, &params, TimeGrid::new(1.0, 200).unwrap(), &cfg).unwrap();
        assert!(report.converged && report.iterations <= 20);
        assert!(report.ratios.iter().all(|&r| r < 1.0), "{:?}", report.ratios);
        assert!(!report.degeneracy.violated);
        let scale = norms::x_norm(&traj);
        assert!(residual(&traj, &params) <= 10.0 * cfg.tol * scale);
    }

    #[test]
    fn wrong_kind_rejected() {
        let d = line(4);
        let z = SpectralField::zeros(&d);
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let cfg = PicardConfig::default();
        let kz = ModelParams::kuznetsov(1.0, 2.0, 0.1, 1.0, 1.0);
        assert!(matches!(
            solve_westervelt(&z, &z, &kz, grid, &cfg),
            Err(PicardError::Model(_))
        ));
        let w = ModelParams::westervelt(1.0, 0.1, 1.0, 1.0);
        assert!(matches!(
            solve_kuznetsov(&z, &z, &w, grid, &cfg),
            Err(PicardError::Model(_))
        ));
    }

    #[test]
    fn config_validation() {
        let bad = PicardConfig {
            tol: 0.0,
            ..PicardConfig::default()
        };
        assert!(matches!(bad.validate(), Err(PicardError::Config { name: "tol", .. })));
        let bad = PicardConfig {
            max_iter: 0,
            ..PicardConfig::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(PicardError::Config { name: "max_iter", .. })
        ));
    }
}
