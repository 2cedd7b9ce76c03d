//! Equation catalog, frozen-coefficient evaluation and non-degeneracy checks.
//!
//! All three models share the quasilinear form
//!
//! ```text
//! α u_tt − c² Δu − b Δu_t = N(u)
//! ```
//!
//! * pressure-form Westervelt: `α = 1 − k p`, `N = k p_t²`;
//! * potential-form Westervelt: `α = 1 − κ ψ_t`, `N = 0`;
//! * Kuznetsov: `α = 1 − κ ψ_t`, `N = σ ∇ψ · ∇ψ_t`.
//!
//! Linearizing around a given state `(v, v_t)` freezes `α` and the factor
//! multiplying `u_t` in `N`; see [`Coefficients`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{self, from_grid, partial_to_grid, to_grid, Domain, GridField, SpectralField};

/// Below this value of `α` anywhere on the grid the solve is aborted.
pub const ALPHA_ABORT: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("coefficient α left the band [{lower}, {upper}] at t = {time}: min {min_alpha}, max {max_alpha}")]
    Degenerate {
        time: f64,
        min_alpha: f64,
        max_alpha: f64,
        lower: f64,
        upper: f64,
    },
    #[error("coefficient α fell to {min_alpha} at t = {time}, below the abort floor")]
    Collapse { time: f64, min_alpha: f64 },
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    WesterveltPressure,
    WesterveltPotential,
    Kuznetsov,
}

impl ModelKind {
    pub fn is_pressure_form(self) -> bool {
        matches!(self, ModelKind::WesterveltPressure)
    }
}

fn default_alpha_lower() -> f64 {
    0.5
}

fn default_alpha_upper() -> f64 {
    1.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub kind: ModelKind,
    /// Sound diffusivity; sweeps override it per member.
    #[serde(default)]
    pub b: f64,
    /// Squared speed of sound.
    pub c2: f64,
    /// Pressure-form nonlinearity; ignored by the potential forms.
    #[serde(default)]
    pub k: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub sigma: f64,
    pub final_time: f64,
    #[serde(default = "default_alpha_lower")]
    pub alpha_lower: f64,
    #[serde(default = "default_alpha_upper")]
    pub alpha_upper: f64,
}

impl ModelParams {
    pub fn westervelt(k: f64, b: f64, c2: f64, final_time: f64) -> Self {
        Self {
            kind: ModelKind::WesterveltPressure,
            b,
            c2,
            k,
            kappa: 0.0,
            sigma: 0.0,
            final_time,
            alpha_lower: default_alpha_lower(),
            alpha_upper: default_alpha_upper(),
        }
    }

    pub fn kuznetsov(kappa: f64, sigma: f64, b: f64, c2: f64, final_time: f64) -> Self {
        Self {
            kind: ModelKind::Kuznetsov,
            kappa,
            sigma,
            ..Self::westervelt(0.0, b, c2, final_time)
        }
    }

    pub fn westervelt_potential(kappa: f64, b: f64, c2: f64, final_time: f64) -> Self {
        Self {
            kind: ModelKind::WesterveltPotential,
            kappa,
            ..Self::westervelt(0.0, b, c2, final_time)
        }
    }

    pub fn with_b(&self, b: f64) -> Self {
        Self { b, ..self.clone() }
    }

    /// Coefficient multiplying the state in `α = 1 − (·) u`.
    pub fn alpha_coefficient(&self) -> f64 {
        if self.kind.is_pressure_form() {
            self.k
        } else {
            self.kappa
        }
    }

    pub fn is_linear(&self) -> bool {
        if self.kind.is_pressure_form() {
            self.k == 0.0
        } else {
            self.kappa == 0.0 && self.sigma == 0.0
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let invalid = |name, reason: &str| {
            Err(ModelError::Invalid {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return invalid("b", "must be finite and non-negative");
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return invalid("c2", "must be finite and positive");
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return invalid("final_time", "must be finite and positive");
        }
        for (name, v) in [("k", self.k), ("kappa", self.kappa), ("sigma", self.sigma)] {
            if !v.is_finite() {
                return invalid(name, "must be finite");
            }
        }
        if !(self.alpha_lower > 0.0 && self.alpha_lower < 1.0) {
            return invalid("alpha_lower", "must lie in (0, 1)");
        }
        if !(self.alpha_upper > 1.0 && self.alpha_upper.is_finite()) {
            return invalid("alpha_upper", "must exceed 1");
        }
        if self.kind == ModelKind::WesterveltPotential && self.sigma != 0.0 {
            return invalid("sigma", "must be 0 for the potential-form Westervelt model");
        }
        Ok(())
    }
}

/// Nonlinearity `k` of the pressure form from the medium's `B/A`, density and
/// speed of sound.
pub fn physical_to_westervelt(b_over_a: f64, rho: f64, c: f64) -> Result<f64, ModelError> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(ModelError::Invalid {
            name: "rho",
            reason: "must be positive".into(),
        });
    }
    if c.is_nan() || c <= 0.0 {
        return Err(ModelError::Invalid {
            name: "c",
            reason: "must be positive".into(),
        });
    }
    Ok(2.0 / (rho * c * c) * (b_over_a / 2.0 + 1.0))
}

/// `(κ, σ)` of a potential-form model from `B/A` and the speed of sound.
pub fn physical_to_potential(b_over_a: f64, c: f64, kind: ModelKind) -> Result<(f64, f64), ModelError> {
    if c.is_nan() || c <= 0.0 {
        return Err(ModelError::Invalid {
            name: "c",
            reason: "must be positive".into(),
        });
    }
    match kind {
        ModelKind::WesterveltPotential => Ok((2.0 / (c * c) * (b_over_a / 2.0 + 1.0), 0.0)),
        ModelKind::Kuznetsov => Ok((b_over_a / (c * c), 2.0)),
        ModelKind::WesterveltPressure => Err(ModelError::Invalid {
            name: "kind",
            reason: "pressure form has no potential coefficients".into(),
        }),
    }
}

/// Grid samples of `α = 1 − k u` (pressure form, `u = p`) or `1 − κ u`
/// (potential forms, `u = ψ_t`).
pub fn alpha_of(state_rate: &SpectralField, params: &ModelParams) -> GridField {
    let coeff = params.alpha_coefficient();
    to_grid(state_rate).map(|u| 1.0 - coeff * u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub min_alpha: f64,
    pub max_alpha: f64,
    pub first_violation_time: Option<f64>,
    pub violated: bool,
}

/// Extrema of `α` over a time path, on the physical nodes only.
///
/// # Panics
///
/// Panics when `alpha_path` is empty.
pub fn check_nondegeneracy(alpha_path: &[(f64, GridField)], params: &ModelParams) -> DegeneracyReport {
    assert!(!alpha_path.is_empty(), "empty α path");
    let mut min_alpha = f64::INFINITY;
    let mut max_alpha = f64::NEG_INFINITY;
    let mut first: Option<f64> = None;
    for (t, alpha) in alpha_path {
        let (lo, hi) = alpha.physical_extrema();
        min_alpha = min_alpha.min(lo);
        max_alpha = max_alpha.max(hi);
        if lo < params.alpha_lower || hi > params.alpha_upper {
            first = Some(first.map_or(*t, |f| f.min(*t)));
        }
    }
    DegeneracyReport {
        min_alpha,
        max_alpha,
        first_violation_time: first,
        violated: first.is_some(),
    }
}

/// State a linearization is frozen around: `(q, q_t)` for the pressure form,
/// `(φ, φ_t)` for the potential forms.
#[derive(Debug, Clone, Copy)]
pub struct FrozenState<'a> {
    pub value: &'a SpectralField,
    pub rate: &'a SpectralField,
}

#[derive(Debug, Clone)]
enum Transport {
    None,
    /// `k q_t`
    Damping(GridField),
    /// `σ ∂_a φ`, one grid per axis
    Advection(Vec<GridField>),
}

/// Frozen coefficients of the linearized operator on the grid at one instant.
///
/// `α` stays pointwise; its reciprocal is never formed in coefficient space.
#[derive(Debug, Clone)]
pub struct Coefficients {
    domain: Arc<Domain>,
    alpha: Option<GridField>,
    inv_alpha: Option<GridField>,
    transport: Transport,
}

impl Coefficients {
    /// `α ≡ 1` and no transport term.
    pub fn identity(domain: &Arc<Domain>) -> Self {
        Self {
            domain: Arc::clone(domain),
            alpha: None,
            inv_alpha: None,
            transport: Transport::None,
        }
    }

    /// Evaluates the frozen coefficients; fails when `α` drops below
    /// [`ALPHA_ABORT`] anywhere on the grid.
    pub fn evaluate(params: &ModelParams, state: FrozenState<'_>, time: f64) -> Result<Self, ModelError> {
        let domain = state.value.domain();
        let mut out = Self::identity(domain);
        if params.kind.is_pressure_form() {
            if params.k != 0.0 && !state.value.is_zero() {
                out.set_alpha(alpha_of(state.value, params), time)?;
            }
            if params.k != 0.0 && !state.rate.is_zero() {
                out.transport = Transport::Damping(to_grid(state.rate).map(|v| params.k * v));
            }
        } else {
            if params.kappa != 0.0 && !state.rate.is_zero() {
                out.set_alpha(alpha_of(state.rate, params), time)?;
            }
            if params.sigma != 0.0 && !state.value.is_zero() {
                let grads = (0..domain.dim())
                    .map(|a| partial_to_grid(state.value, a).map(|v| params.sigma * v))
                    .collect();
                out.transport = Transport::Advection(grads);
            }
        }
        Ok(out)
    }

    fn set_alpha(&mut self, alpha: GridField, time: f64) -> Result<(), ModelError> {
        let (lo, _) = alpha.extrema();
        if lo.is_nan() || lo < ALPHA_ABORT {
            return Err(ModelError::Collapse { time, min_alpha: lo });
        }
        self.inv_alpha = Some(alpha.map(|a| 1.0 / a));
        self.alpha = Some(alpha);
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.alpha.is_none() && matches!(self.transport, Transport::None)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    /// `α` on the grid, `None` when identically one.
    pub fn alpha(&self) -> Option<&GridField> {
        self.alpha.as_ref()
    }

    pub fn inv_alpha(&self) -> Option<&GridField> {
        self.inv_alpha.as_ref()
    }

    /// Pointwise factor of `u_t` in the pressure form (`k q_t`).
    pub fn damping(&self) -> Option<&GridField> {
        match &self.transport {
            Transport::Damping(g) => Some(g),
            _ => None,
        }
    }

    /// Pointwise `σ ∇φ` in the potential forms.
    pub fn advection(&self) -> Option<&[GridField]> {
        match &self.transport {
            Transport::Advection(g) => Some(g),
            _ => None,
        }
    }

    /// Projection of `(1/α)(b Δu_t + c² Δu + T u_t)` where `T` is the frozen
    /// transport term: the acceleration the linearized PDE implies.
    pub fn acceleration(&self, params: &ModelParams, u: &SpectralField, ut: &SpectralField) -> SpectralField {
        let eig = self.domain.eigenvalues();
        let elliptic: Vec<f64> = u
            .coeffs()
            .iter()
            .zip(ut.coeffs())
            .zip(eig)
            .map(|((&a, &v), &l)| -l * (params.c2 * a + params.b * v))
            .collect();
        let elliptic = SpectralField::from_coeffs(&self.domain, elliptic).expect("mode count");
        if self.is_identity() {
            return elliptic;
        }
        let mut grid = to_grid(&elliptic);
        match &self.transport {
            Transport::None => {}
            Transport::Damping(g) => {
                let vt = to_grid(ut);
                for ((acc, &d), &v) in grid.values_mut().iter_mut().zip(g.values()).zip(vt.values()) {
                    *acc += d * v;
                }
            }
            Transport::Advection(grads) => {
                for (axis, g) in grads.iter().enumerate() {
                    let dv = partial_to_grid(ut, axis);
                    for ((acc, &d), &v) in grid.values_mut().iter_mut().zip(g.values()).zip(dv.values()) {
                        *acc += d * v;
                    }
                }
            }
        }
        if let Some(inv) = &self.inv_alpha {
            for (acc, &w) in grid.values_mut().iter_mut().zip(inv.values()) {
                *acc *= w;
            }
        }
        from_grid(&grid)
    }
}

/// Initial acceleration forced by the PDE at `t = 0` (the compatibility
/// condition), with the coefficients frozen around `state_at_0`.
///
/// Fails when `α(0)` lies outside `[alpha_lower, alpha_upper]`.
pub fn initial_acceleration(
    u0: &SpectralField,
    u1: &SpectralField,
    params: &ModelParams,
    state_at_0: FrozenState<'_>,
) -> Result<SpectralField, ModelError> {
    u0.check_domain(u1)?;
    let coeffs = Coefficients::evaluate(params, state_at_0, 0.0)?;
    if let Some(alpha) = coeffs.alpha() {
        let (lo, hi) = alpha.physical_extrema();
        if lo < params.alpha_lower || hi > params.alpha_upper {
            return Err(ModelError::Degenerate {
                time: 0.0,
                min_alpha: lo,
                max_alpha: hi,
                lower: params.alpha_lower,
                upper: params.alpha_upper,
            });
        }
    }
    Ok(coeffs.acceleration(params, u0, u1))
}

/// `α` extrema of the data alone, checked against the band before any solve.
pub fn check_initial_alpha(
    u0: &SpectralField,
    u1: &SpectralField,
    params: &ModelParams,
) -> Result<DegeneracyReport, ModelError> {
    let rate = if params.kind.is_pressure_form() { u0 } else { u1 };
    let report = check_nondegeneracy(&[(0.0, alpha_of(rate, params))], params);
    if report.violated {
        return Err(ModelError::Degenerate {
            time: 0.0,
            min_alpha: report.min_alpha,
            max_alpha: report.max_alpha,
            lower: params.alpha_lower,
            upper: params.alpha_upper,
        });
    }
    Ok(report)
}
