//! Damping sweeps against the `b = 0` reference, Cauchy quotients and the
//! potential/pressure cross-check.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{ModelKind, ModelParams};
use crate::norms::{self, NormKind, RateTable};
use crate::picard::{self, PicardConfig, PicardError, PicardReport};
use crate::spectral::{Domain, DomainSpec, SpectralError, SpectralField};
use crate::timeloop::{SolveError, TimeGrid, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid sweep setting `{name}`: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("reference solve failed: {0}")]
    Reference(PicardError),
}

fn invalid(name: &'static str, reason: impl Into<String>) -> HarnessError {
    HarnessError::Invalid {
        name,
        reason: reason.into(),
    }
}

/// `amplitude · Π_a sin(j_a π x_a / L_a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeAmplitude {
    pub mode: Vec<usize>,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default)]
    pub u0: Vec<ModeAmplitude>,
    #[serde(default)]
    pub u1: Vec<ModeAmplitude>,
}

impl InitialData {
    pub fn single(mode: &[usize], amplitude: f64) -> Self {
        Self {
            u0: vec![ModeAmplitude {
                mode: mode.to_vec(),
                amplitude,
            }],
            u1: Vec::new(),
        }
    }

    pub fn build(&self, domain: &Arc<Domain>) -> Result<(SpectralField, SpectralField), SpectralError> {
        let field = |modes: &[ModeAmplitude]| -> Result<SpectralField, SpectralError> {
            let mut out = SpectralField::zeros(domain);
            for m in modes {
                out.axpy(1.0, &SpectralField::sine(domain, &m.mode, m.amplitude)?);
            }
            Ok(out)
        };
        Ok((field(&self.u0)?, field(&self.u1)?))
    }
}

/// `count` values from `start` downward, `per_decade` per factor of ten.
pub fn geometric_b_values(start: f64, per_decade: f64, count: usize) -> Vec<f64> {
    let e0 = start.log10();
    (0..count).map(|i| 10f64.powf(e0 - i as f64 / per_decade)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// `b` is ignored; every member sets its own.
    pub params: ModelParams,
    pub b_values: Vec<f64>,
    pub data: InitialData,
    pub domain: DomainSpec,
    pub steps: usize,
    #[serde(default)]
    pub picard: PicardConfig,
    /// Also solve the reference with doubled modes to estimate the
    /// discretization floor.
    #[serde(default = "default_true")]
    pub floor_check: bool,
}

fn default_true() -> bool {
    true
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.b_values.is_empty() {
            return Err(invalid("b_values", "empty"));
        }
        if self.b_values.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(invalid("b_values", "must be positive"));
        }
        if self.b_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("b_values", "must be strictly decreasing"));
        }
        if self.steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        self.params
            .with_b(0.0)
            .validate()
            .map_err(|e| invalid("params", e.to_string()))?;
        self.picard.validate().map_err(|e| invalid("picard", e.to_string()))?;
        Ok(())
    }

    fn grid(&self) -> Result<TimeGrid, HarnessError> {
        Ok(TimeGrid::new(self.params.final_time, self.steps)?)
    }
}

/// Successful member of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberStats {
    pub e_diff: f64,
    pub x_diff: f64,
    pub report: PicardReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub b: f64,
    pub outcome: Result<MemberStats, PicardError>,
}

impl SweepRow {
    pub fn iterations(&self) -> usize {
        match &self.outcome {
            Ok(s) => s.report.iterations,
            Err(PicardError::NoConvergence { report }) => report.iterations,
            Err(_) => 0,
        }
    }

    /// Left the non-degeneracy band or failed outright.
    pub fn is_flagged(&self) -> bool {
        match &self.outcome {
            Ok(s) => s.report.degeneracy.violated || !s.report.converged,
            Err(_) => true,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match &self.outcome {
            Ok(s) => s.report.degeneracy.violated,
            Err(PicardError::Degeneracy(_)) => true,
            Err(_) => false,
        }
    }
}

/// Distance between the reference and its doubled-mode counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorEstimate {
    pub e: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyRow {
    pub b: f64,
    pub b_prime: f64,
    pub diff: f64,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CauchyTable {
    pub rows: Vec<CauchyRow>,
}

impl CauchyTable {
    pub fn max_quotient(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.quotient).reduce(f64::max)
    }

    pub fn min_quotient(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.quotient).reduce(f64::min)
    }

    fn from_members(members: &[(f64, Option<&Trajectory>)]) -> Result<Self, HarnessError> {
        let mut rows = Vec::new();
        for w in members.windows(2) {
            let ((b, ta), (b_prime, tb)) = (w[0], w[1]);
            let (Some(ta), Some(tb)) = (ta, tb) else { continue };
            if b == b_prime {
                continue;
            }
            let diff = norms::e_norm(&ta.difference(tb)?);
            rows.push(CauchyRow {
                b,
                b_prime,
                diff,
                quotient: diff / (b - b_prime).abs(),
            });
        }
        Ok(Self { rows })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub reference: PicardReport,
    pub rows: Vec<SweepRow>,
    pub rates: RateTable,
    pub cauchy: CauchyTable,
    pub floor: Option<FloorEstimate>,
    /// False when the floor is within a factor 10 of the smallest difference.
    pub reliable: bool,
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(SweepRow::is_flagged)
    }

    /// Whether the E-norm differences strictly decrease with `b`.
    pub fn monotone(&self) -> bool {
        let e: Vec<f64> = self
            .rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|s| s.e_diff))
            .collect();
        e.windows(2).all(|w| w[1] < w[0])
    }
}

fn solve_member(spec: &SweepSpec, domain: &Arc<Domain>, b: f64) -> Result<(Trajectory, PicardReport), HarnessError> {
    let (u0, u1) = spec.data.build(domain)?;
    picard::solve(&u0, &u1, &spec.params.with_b(b), spec.grid()?, &spec.picard).map_err(HarnessError::Reference)
}

/// Solves the `b = 0` reference and every member on identical grids, then
/// fits `log diff` against `log b` in the E and X norms.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, HarnessError> {
    spec.validate()?;
    let domain = spec.domain.build()?;
    let (u0, u1) = spec.data.build(&domain)?;
    let grid = spec.grid()?;
    let (reference, reference_report) = solve_member(spec, &domain, 0.0)?;

    let mut rows = Vec::with_capacity(spec.b_values.len());
    let mut trajectories = Vec::with_capacity(spec.b_values.len());
    for &b in &spec.b_values {
        let outcome = picard::solve(&u0, &u1, &spec.params.with_b(b), grid, &spec.picard);
        let (stats, traj) = match outcome {
            Ok((traj, report)) => {
                let diff = traj.difference(&reference)?;
                let stats = MemberStats {
                    e_diff: norms::e_norm(&diff),
                    x_diff: norms::x_norm(&diff),
                    report,
                };
                (Ok(stats), Some(traj))
            }
            Err(e) => (Err(e), None),
        };
        rows.push(SweepRow { b, outcome: stats });
        trajectories.push((b, traj));
    }

    let mut rates = RateTable::default();
    let ok_rows = || rows.iter().filter_map(|r| r.outcome.as_ref().ok().map(|s| (r.b, s)));
    rates.push(NormKind::E.label(), ok_rows().map(|(b, s)| (b, s.e_diff)).collect());
    rates.push(NormKind::X.label(), ok_rows().map(|(b, s)| (b, s.x_diff)).collect());

    let members: Vec<(f64, Option<&Trajectory>)> = trajectories.iter().map(|(b, t)| (*b, t.as_ref())).collect();
    let cauchy = CauchyTable::from_members(&members)?;

    let mut warnings = Vec::new();
    let mut reliable = true;
    let floor = if spec.floor_check {
        let fine_domain = spec.domain.refined().build()?;
        let (fine, _) = solve_member(spec, &fine_domain, 0.0)?;
        let diff = reference.resample(&fine_domain)?.difference(&fine)?;
        let floor = FloorEstimate {
            e: norms::e_norm(&diff),
            x: norms::x_norm(&diff),
        };
        let min_e = ok_rows().map(|(_, s)| s.e_diff).fold(f64::INFINITY, f64::min);
        let min_x = ok_rows().map(|(_, s)| s.x_diff).fold(f64::INFINITY, f64::min);
        if 10.0 * floor.e > min_e || 10.0 * floor.x > min_x {
            reliable = false;
            warnings.push(format!(
                "discretization floor (E {:e}, X {:e}) is within 10x of the smallest difference (E {:e}, X {:e})",
                floor.e, floor.x, min_e, min_x
            ));
        }
        Some(floor)
    } else {
        None
    };
    for row in &rows {
        if let Err(e) = &row.outcome {
            warnings.push(format!("b = {:e}: {e}", row.b));
        }
    }

    let result = SweepResult {
        reference: reference_report,
        rows,
        rates,
        cauchy,
        floor,
        reliable,
        warnings,
    };
    Ok(result)
}

/// `‖u^(b) − u^(b′)‖_E / |b − b′|` over consecutive members, without the
/// reference solve.
pub fn cauchy_check(spec: &SweepSpec) -> Result<CauchyTable, HarnessError> {
    if spec.b_values.len() < 2 {
        return Err(invalid("b_values", "need at least two values"));
    }
    spec.validate()?;
    let domain = spec.domain.build()?;
    let mut members = Vec::new();
    for &b in &spec.b_values {
        members.push((b, solve_member(spec, &domain, b).ok().map(|(t, _)| t)));
    }
    let refs: Vec<(f64, Option<&Trajectory>)> = members.iter().map(|(b, t)| (*b, t.as_ref())).collect();
    CauchyTable::from_members(&refs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialPressureSpec {
    pub kappa: f64,
    pub b: f64,
    pub c2: f64,
    pub final_time: f64,
    /// Data `(ψ0, ψ1)` of the potential.
    pub data: InitialData,
    pub domain: DomainSpec,
    pub steps: usize,
    #[serde(default)]
    pub picard: PicardConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPressureReport {
    /// `‖∂_t ψ − p‖_E` at the requested step count.
    pub distance: f64,
    /// The same distance with half the steps.
    pub coarse_distance: f64,
    pub potential: PicardReport,
    pub pressure: PicardReport,
}

impl PotentialPressureReport {
    /// Observed reduction factor from `S/2` to `S` steps.
    pub fn refinement_ratio(&self) -> f64 {
        self.coarse_distance / self.distance
    }
}

/// Compares `∂_t ψ` from the potential form (`σ = 0`) with the pressure
/// form solved from `(ψ1, ψ_tt(0))`.
pub fn potential_pressure_check(spec: &PotentialPressureSpec) -> Result<PotentialPressureReport, HarnessError> {
    if spec.steps < 2 {
        return Err(invalid("steps", "need at least 2"));
    }
    let domain = spec.domain.build()?;
    let (psi0, psi1) = spec.data.build(&domain)?;
    let potential = ModelParams::westervelt_potential(spec.kappa, spec.b, spec.c2, spec.final_time);
    let pressure = ModelParams {
        kind: ModelKind::WesterveltPressure,
        k: spec.kappa,
        kappa: 0.0,
        ..potential.clone()
    };
    let run = |steps: usize| -> Result<(f64, PicardReport, PicardReport), HarnessError> {
        let grid = TimeGrid::new(spec.final_time, steps)?;
        let (psi, pot_report) =
            picard::solve_kuznetsov(&psi0, &psi1, &potential, grid, &spec.picard).map_err(HarnessError::Reference)?;
        let psi2 = psi.utt()[0].clone();
        let (p, pre_report) =
            picard::solve_westervelt(&psi1, &psi2, &pressure, grid, &spec.picard).map_err(HarnessError::Reference)?;
        let distance = norms::e_norm(&psi.differentiated().difference(&p)?);
        Ok((distance, pot_report, pre_report))
    };
    let (distance, pot, pre) = run(spec.steps)?;
    let (coarse_distance, _, _) = run(spec.steps / 2)?;
    Ok(PotentialPressureReport {
        distance,
        coarse_distance,
        potential: pot,
        pressure: pre,
    })
}
