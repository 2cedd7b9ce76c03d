//! Frozen-coefficient linearized solves.
//!
//! The Galerkin system `ξ'' = A(t)(ξ, ξ')` is integrated as the first-order
//! system `(u, v)' = (v, L(u, v))` with the trapezoidal rule. Within a step the
//! coefficients are frozen at the midpoint time, so the update is
//!
//! ```text
//! (I − dt/2 C − dt²/4 K) v⁺ = v + dt/2 · L(2u + dt/2 v, v)
//! u⁺ = u + dt/2 (v + v⁺)
//! ```
//!
//! with `L(u, v) = K u + C v`. The `b Δ` damping always sits inside `C`, i.e.
//! is treated implicitly.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::models::{self, Coefficients, FrozenState, ModelError, ModelParams};
use crate::spectral::{Domain, SpectralError, SpectralField};

const GMRES_TOL: f64 = 1e-13;
const GMRES_RESTART: usize = 60;
const GMRES_MAX_RESTARTS: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("inner linear solve stalled at t = {time} with relative residual {residual:e}")]
    InnerSolve { time: f64, residual: f64 },
    #[error("step matrix is singular at t = {time}")]
    Singular { time: f64 },
    #[error("invalid time grid: final time {final_time}, {steps} steps")]
    InvalidGrid { final_time: f64, steps: usize },
    #[error("trajectories or paths use different time grids")]
    GridMismatch,
}

/// Uniform time grid on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    final_time: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(final_time: f64, steps: usize) -> Result<Self, SolveError> {
        if !(final_time > 0.0 && final_time.is_finite()) || steps == 0 {
            return Err(SolveError::InvalidGrid { final_time, steps });
        }
        Ok(Self { final_time, steps })
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    /// Node `i`; node `steps` is exactly `T`.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.final_time
        } else {
            self.final_time * i as f64 / self.steps as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|i| self.time(i))
    }
}

/// Nodal values `(u, u_t, u_tt)` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    u: Vec<SpectralField>,
    ut: Vec<SpectralField>,
    utt: Vec<SpectralField>,
}

impl Trajectory {
    pub fn from_parts(
        grid: TimeGrid,
        u: Vec<SpectralField>,
        ut: Vec<SpectralField>,
        utt: Vec<SpectralField>,
    ) -> Result<Self, SolveError> {
        let n = grid.steps + 1;
        if u.len() != n || ut.len() != n || utt.len() != n {
            return Err(SolveError::GridMismatch);
        }
        let domain = u[0].domain();
        for f in u.iter().chain(&ut).chain(&utt) {
            if !crate::spectral::same_domain(domain, f.domain()) {
                return Err(SpectralError::DomainMismatch.into());
            }
        }
        Ok(Self { grid, u, ut, utt })
    }

    pub fn zeros(domain: &Arc<Domain>, grid: TimeGrid) -> Self {
        let z = vec![SpectralField::zeros(domain); grid.steps + 1];
        Self {
            grid,
            u: z.clone(),
            ut: z.clone(),
            utt: z,
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.u[0].domain()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[SpectralField] {
        &self.u
    }

    pub fn ut(&self) -> &[SpectralField] {
        &self.ut
    }

    pub fn utt(&self) -> &[SpectralField] {
        &self.utt
    }

    pub fn last(&self) -> (&SpectralField, &SpectralField, &SpectralField) {
        let i = self.len() - 1;
        (&self.u[i], &self.ut[i], &self.utt[i])
    }

    fn zip_map(
        &self,
        other: &Trajectory,
        f: impl Fn(&SpectralField, &SpectralField) -> SpectralField,
    ) -> Result<Self, SolveError> {
        if self.grid != other.grid {
            return Err(SolveError::GridMismatch);
        }
        other.u[0].check_domain(&self.u[0])?;
        let map = |a: &[SpectralField], b: &[SpectralField]| a.iter().zip(b).map(|(x, y)| f(x, y)).collect();
        Ok(Self {
            grid: self.grid,
            u: map(&self.u, &other.u),
            ut: map(&self.ut, &other.ut),
            utt: map(&self.utt, &other.utt),
        })
    }

    /// Stepwise `self − other`.
    pub fn difference(&self, other: &Trajectory) -> Result<Self, SolveError> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let map = |a: &[SpectralField]| a.iter().map(|x| x.scaled(s)).collect();
        Self {
            grid: self.grid,
            u: map(&self.u),
            ut: map(&self.ut),
            utt: map(&self.utt),
        }
    }

    /// The trajectory of `u_t`: `(u_t, u_tt, u_ttt)`, with `u_ttt` from
    /// second-order finite differences of the stored accelerations.
    pub fn differentiated(&self) -> Self {
        Self {
            grid: self.grid,
            u: self.ut.clone(),
            ut: self.utt.clone(),
            utt: time_derivative(&self.utt, self.grid.dt()),
        }
    }

    /// Re-expresses every snapshot on another cutoff of the same box.
    pub fn resample(&self, target: &Arc<Domain>) -> Result<Self, SolveError> {
        let map = |a: &[SpectralField]| a.iter().map(|x| x.resample(target)).collect::<Result<Vec<_>, _>>();
        Ok(Self {
            grid: self.grid,
            u: map(&self.u)?,
            ut: map(&self.ut)?,
            utt: map(&self.utt)?,
        })
    }
}

/// Second-order finite differences in time of nodal snapshots.
pub fn time_derivative(values: &[SpectralField], dt: f64) -> Vec<SpectralField> {
    let n = values.len();
    if n < 2 {
        return values.iter().map(|v| v.scaled(0.0)).collect();
    }
    if n == 2 {
        let d = (&values[1] - &values[0]).scaled(1.0 / dt);
        return vec![d.clone(), d];
    }
    let combo = |terms: &[(f64, &SpectralField)]| {
        let mut out = terms[0].1.scaled(terms[0].0);
        for (w, f) in &terms[1..] {
            out.axpy(*w, f);
        }
        out.scaled(1.0 / (2.0 * dt))
    };
    (0..n)
        .map(|i| {
            if i == 0 {
                combo(&[(-3.0, &values[0]), (4.0, &values[1]), (-1.0, &values[2])])
            } else if i == n - 1 {
                combo(&[(3.0, &values[n - 1]), (-4.0, &values[n - 2]), (1.0, &values[n - 3])])
            } else {
                combo(&[(1.0, &values[i + 1]), (-1.0, &values[i - 1])])
            }
        })
        .collect()
}

/// Time path of the state a linearization is frozen around.
///
/// Between nodes the state is interpolated linearly.
#[derive(Debug, Clone)]
pub struct CoefficientPath {
    grid: TimeGrid,
    states: Option<(Vec<SpectralField>, Vec<SpectralField>)>,
}

impl CoefficientPath {
    /// Zero state: `α ≡ 1` and no transport term for every model.
    pub fn linear(grid: TimeGrid) -> Self {
        Self { grid, states: None }
    }

    /// Freezes around the nodal `(u, u_t)` of a previous iterate.
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        Self {
            grid: traj.grid,
            states: Some((traj.u.clone(), traj.ut.clone())),
        }
    }

    pub fn from_states(
        grid: TimeGrid,
        values: Vec<SpectralField>,
        rates: Vec<SpectralField>,
    ) -> Result<Self, SolveError> {
        if values.len() != grid.steps + 1 || rates.len() != grid.steps + 1 {
            return Err(SolveError::GridMismatch);
        }
        Ok(Self {
            grid,
            states: Some((values, rates)),
        })
    }

    /// The same state at every node.
    pub fn constant(grid: TimeGrid, value: &SpectralField, rate: &SpectralField) -> Self {
        let n = grid.steps + 1;
        Self {
            grid,
            states: Some((vec![value.clone(); n], vec![rate.clone(); n])),
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn is_linear(&self) -> bool {
        self.states.is_none()
    }

    /// Interpolated `(value, rate)` at time `t`, `None` for the linear path.
    pub fn state_at(&self, t: f64) -> Option<(SpectralField, SpectralField)> {
        let (values, rates) = self.states.as_ref()?;
        let s = (t / self.grid.dt()).clamp(0.0, self.grid.steps as f64);
        let i = (s.floor() as usize).min(self.grid.steps.saturating_sub(1));
        let theta = s - i as f64;
        if theta == 0.0 {
            return Some((values[i].clone(), rates[i].clone()));
        }
        if theta == 1.0 {
            return Some((values[i + 1].clone(), rates[i + 1].clone()));
        }
        Some((
            values[i].lerp(&values[i + 1], theta),
            rates[i].lerp(&rates[i + 1], theta),
        ))
    }

    pub fn coefficients_at(
        &self,
        params: &ModelParams,
        domain: &Arc<Domain>,
        t: f64,
    ) -> Result<Coefficients, ModelError> {
        if params.is_linear() {
            return Ok(Coefficients::identity(domain));
        }
        match self.state_at(t) {
            None => Ok(Coefficients::identity(domain)),
            Some((value, rate)) => Coefficients::evaluate(
                params,
                FrozenState {
                    value: &value,
                    rate: &rate,
                },
                t,
            ),
        }
    }
}

/// The `u_tt` implied by the linearized PDE at time `t`.
pub fn apply_linearized_operator(
    u: &SpectralField,
    ut: &SpectralField,
    t: f64,
    path: &CoefficientPath,
    params: &ModelParams,
) -> Result<SpectralField, SolveError> {
    u.check_domain(ut)?;
    let coeffs = path.coefficients_at(params, u.domain(), t)?;
    Ok(coeffs.acceleration(params, u, ut))
}

/// Trapezoidal stepper bound to one path and parameter set.
pub struct Integrator<'a> {
    params: &'a ModelParams,
    path: &'a CoefficientPath,
    domain: Arc<Domain>,
}

impl<'a> Integrator<'a> {
    pub fn new(domain: &Arc<Domain>, params: &'a ModelParams, path: &'a CoefficientPath) -> Self {
        Self {
            params,
            path,
            domain: Arc::clone(domain),
        }
    }

    /// Advances `(u, u_t)` from `t` to `t + dt`; returns the new
    /// `(u, u_t, u_tt)` with `u_tt` evaluated at the new node.
    pub fn step(
        &self,
        u: &SpectralField,
        ut: &SpectralField,
        t: f64,
        dt: f64,
    ) -> Result<(SpectralField, SpectralField, SpectralField), SolveError> {
        let params = self.params;
        let mid_time = t + 0.5 * dt;
        let mid = self.path.coefficients_at(params, &self.domain, mid_time)?;

        let mut lifted = u.scaled(2.0);
        lifted.axpy(0.5 * dt, ut);
        let mut rhs = ut.clone();
        rhs.axpy(0.5 * dt, &mid.acceleration(params, &lifted, ut));

        let ut_new = if mid.is_identity() {
            self.solve_diagonal(&rhs, dt)
        } else if let Some(dense) = self.domain.dense() {
            self.solve_dense(dense, &mid, &rhs, dt, mid_time)?
        } else {
            self.solve_gmres(&mid, &rhs, dt, mid_time)?
        };

        let mut u_new = u.clone();
        u_new.axpy(0.5 * dt, ut);
        u_new.axpy(0.5 * dt, &ut_new);
        let node = self.path.coefficients_at(params, &self.domain, t + dt)?;
        let utt_new = node.acceleration(params, &u_new, &ut_new);
        Ok((u_new, ut_new, utt_new))
    }

    /// Diagonal of the constant-coefficient step matrix.
    fn diagonal(&self, dt: f64) -> Vec<f64> {
        let w = 0.5 * dt * (self.params.b + 0.5 * dt * self.params.c2);
        self.domain.eigenvalues().iter().map(|l| 1.0 + w * l).collect()
    }

    fn solve_diagonal(&self, rhs: &SpectralField, dt: f64) -> SpectralField {
        let coeffs = rhs.coeffs().iter().zip(self.diagonal(dt)).map(|(r, d)| r / d).collect();
        SpectralField::from_coeffs(&self.domain, coeffs).expect("mode count")
    }

    fn solve_dense(
        &self,
        dense: &crate::spectral::DenseOperators,
        mid: &Coefficients,
        rhs: &SpectralField,
        dt: f64,
        time: f64,
    ) -> Result<SpectralField, SolveError> {
        let params = self.params;
        let g = dense.synth.nrows();
        let n = dense.synth.ncols();
        let half_dt = 0.5 * dt;
        let stiff: Vec<f64> = self
            .domain
            .eigenvalues()
            .iter()
            .map(|l| half_dt * (params.b + half_dt * params.c2) * l)
            .collect();
        let inv_alpha = mid.inv_alpha().map(|a| a.values());
        let weight = |i: usize| inv_alpha.map_or(1.0, |a| a[i]);

        // Y = diag(1/α) S diag(stiff) − diag(dt/2 · T/α) S_T ; A = I + P Y
        let mut y = DMatrix::<f64>::zeros(g, n);
        for (j, &sj) in stiff.iter().enumerate() {
            let col = y.column_mut(j);
            let s = dense.synth.column(j);
            for (i, (out, &sij)) in col.into_iter().zip(s.iter()).enumerate() {
                *out = weight(i) * sij * sj;
            }
        }
        if let Some(damping) = mid.damping() {
            let d = damping.values();
            for j in 0..n {
                let mut col = y.column_mut(j);
                let s = dense.synth.column(j);
                for i in 0..g {
                    col[i] -= half_dt * weight(i) * d[i] * s[i];
                }
            }
        }
        if let Some(grads) = mid.advection() {
            for (axis, grad) in grads.iter().enumerate() {
                let d = grad.values();
                let ds = &dense.dsynth[axis];
                for j in 0..n {
                    let mut col = y.column_mut(j);
                    let s = ds.column(j);
                    for i in 0..g {
                        col[i] -= half_dt * weight(i) * d[i] * s[i];
                    }
                }
            }
        }
        let mut a = &dense.proj * y;
        for j in 0..n {
            a[(j, j)] += 1.0;
        }
        let b = DVector::from_column_slice(rhs.coeffs());
        let x = a.lu().solve(&b).ok_or(SolveError::Singular { time })?;
        Ok(SpectralField::from_coeffs(&self.domain, x.as_slice().to_vec())?)
    }

    /// Restarted GMRES on the matrix-free step operator, right-preconditioned
    /// by the constant-coefficient diagonal.
    fn solve_gmres(
        &self,
        mid: &Coefficients,
        rhs: &SpectralField,
        dt: f64,
        time: f64,
    ) -> Result<SpectralField, SolveError> {
        let params = self.params;
        let diag = self.diagonal(dt);
        let domain = &self.domain;
        let apply = |y: &[f64]| -> Vec<f64> {
            let v: Vec<f64> = y.iter().zip(&diag).map(|(a, d)| a / d).collect();
            let v = SpectralField::from_coeffs(domain, v).expect("mode count");
            let lifted = v.scaled(0.5 * dt);
            let lv = mid.acceleration(params, &lifted, &v);
            v.coeffs()
                .iter()
                .zip(lv.coeffs())
                .map(|(a, b)| a - 0.5 * dt * b)
                .collect()
        };
        let (y, residual) = gmres(apply, rhs.coeffs(), GMRES_TOL, GMRES_RESTART, GMRES_MAX_RESTARTS);
        if residual.is_nan() || residual > 1e-12 {
            return Err(SolveError::InnerSolve { time, residual });
        }
        let x = y.iter().zip(&diag).map(|(a, d)| a / d).collect();
        Ok(SpectralField::from_coeffs(domain, x)?)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Restarted GMRES with Givens rotations; returns the solution and the final
/// relative residual.
fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_restarts: usize,
) -> (Vec<f64>, f64) {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return (x, 0.0);
    }
    for _ in 0..max_restarts {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = dot(&r, &r).sqrt();
        if beta / b_norm <= tol {
            break;
        }
        let m = restart.min(n);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut w = apply(&basis[k]);
            for (i, q) in basis.iter().enumerate() {
                let hik = dot(&w, q);
                h[i][k] = hik;
                for (wv, qv) in w.iter_mut().zip(q) {
                    *wv -= hik * qv;
                }
            }
            let wn = dot(&w, &w).sqrt();
            h[k + 1][k] = wn;
            for i in 0..k {
                let tmp = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = tmp;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() / b_norm <= tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut coef = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * coef[j]).sum();
            coef[i] = (g[i] - s) / h[i][i];
        }
        for (c, q) in coef.iter().zip(&basis) {
            for (xv, qv) in x.iter_mut().zip(q) {
                *xv += c * qv;
            }
        }
    }
    let ax = apply(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    (x, dot(&r, &r).sqrt() / b_norm)
}

/// One trapezoidal step; see [`Integrator::step`].
pub fn step(
    state: (&SpectralField, &SpectralField),
    t: f64,
    dt: f64,
    path: &CoefficientPath,
    params: &ModelParams,
) -> Result<(SpectralField, SpectralField, SpectralField), SolveError> {
    state.0.check_domain(state.1)?;
    Integrator::new(state.0.domain(), params, path).step(state.0, state.1, t, dt)
}

/// Solves the linearized problem on the whole grid. The initial acceleration
/// comes from the compatibility condition with the path's state at `t = 0`.
pub fn solve_linearized(
    u0: &SpectralField,
    u1: &SpectralField,
    path: &CoefficientPath,
    params: &ModelParams,
    grid: TimeGrid,
) -> Result<Trajectory, SolveError> {
    u0.check_domain(u1)?;
    if path.grid() != grid {
        return Err(SolveError::GridMismatch);
    }
    let domain = u0.domain();
    let a0 = match (params.is_linear(), path.state_at(0.0)) {
        (false, Some((value, rate))) => models::initial_acceleration(
            u0,
            u1,
            params,
            FrozenState {
                value: &value,
                rate: &rate,
            },
        )?,
        _ => Coefficients::identity(domain).acceleration(params, u0, u1),
    };
    let n = grid.steps() + 1;
    let mut u = Vec::with_capacity(n);
    let mut ut = Vec::with_capacity(n);
    let mut utt = Vec::with_capacity(n);
    u.push(u0.clone());
    ut.push(u1.clone());
    utt.push(a0);
    let integrator = Integrator::new(domain, params, path);
    let dt = grid.dt();
    for i in 0..grid.steps() {
        let (a, b, c) = integrator.step(&u[i], &ut[i], grid.time(i), dt)?;
        u.push(a);
        ut.push(b);
        utt.push(c);
    }
    Ok(Trajectory { grid, u, ut, utt })
}
