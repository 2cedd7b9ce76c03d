//! Built-in verification battery: exact solutions that any build should
//! reproduce.

use std::f64::consts::PI;

use crate::harness::{self, InitialData, PotentialPressureSpec, SweepSpec};
use crate::models::ModelParams;
use crate::norms;
use crate::picard::PicardConfig;
use crate::spectral::{self, Domain, DomainSpec, SpectralField};
use crate::timeloop::{self, CoefficientPath, TimeGrid, Trajectory};

/// Closed-form `(ξ(t), ξ'(t))` of `ξ'' + bλ ξ' + c²λ ξ = 0`.
pub fn damped_oscillator(lambda: f64, b: f64, c2: f64, xi0: f64, xi1: f64, t: f64) -> (f64, f64) {
    let beta = b * lambda;
    let omega2 = c2 * lambda;
    let h = 0.5 * beta;
    let disc = h * h - omega2;
    let decay = (-h * t).exp();
    let a = xi0;
    let rate = xi1 + h * xi0;
    // ξ = e^{-ht} (a f(t) + rate g(t)) with f(0) = 1, g(0) = 0, g'(0) = 1.
    let (f, df, g, dg) = if disc < 0.0 {
        let mu = (-disc).sqrt();
        let (s, c) = (mu * t).sin_cos();
        (c, -mu * s, s / mu, c)
    } else if disc > 0.0 {
        let nu = disc.sqrt();
        let (s, c) = ((nu * t).sinh(), (nu * t).cosh());
        (c, nu * s, s / nu, c)
    } else {
        (1.0, 0.0, t, 1.0)
    };
    let core = a * f + rate * g;
    let dcore = a * df + rate * dg;
    (decay * core, decay * (dcore - h * core))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

/// Linear solve from `u0 = sin x`, `u1 = 0` on `(0, π)` against
/// `cos(t) sin(x)`, in the E norm.
pub fn standing_wave_error(modes: usize, steps: usize, final_time: f64) -> f64 {
    let domain = Domain::new(&[PI], &[modes]).expect("valid domain");
    let u0 = SpectralField::sine(&domain, &[1], 1.0).expect("mode in range");
    let u1 = SpectralField::zeros(&domain);
    let params = ModelParams::westervelt(0.0, 0.0, 1.0, final_time);
    let grid = TimeGrid::new(final_time, steps).expect("valid grid");
    let traj =
        timeloop::solve_linearized(&u0, &u1, &CoefficientPath::linear(grid), &params, grid).expect("linear solve");
    let exact = exact_single_mode(&u0, &params, grid, 0);
    norms::e_norm(&traj.difference(&exact).expect("same grid"))
}

/// Nodal closed-form trajectory of data concentrated in one flat mode index.
pub fn exact_single_mode(u0: &SpectralField, params: &ModelParams, grid: TimeGrid, flat: usize) -> Trajectory {
    let domain = u0.domain();
    let lambda = domain.eigenvalues()[flat];
    let xi0 = u0.coeffs()[flat];
    let mut u = Vec::new();
    let mut ut = Vec::new();
    let mut utt = Vec::new();
    for t in grid.nodes() {
        let (x, v) = damped_oscillator(lambda, params.b, params.c2, xi0, 0.0, t);
        let a = -lambda * (params.c2 * x + params.b * v);
        let field = |c: f64| {
            let mut f = SpectralField::zeros(domain);
            f.coeffs_mut()[flat] = c;
            f
        };
        u.push(field(x));
        ut.push(field(v));
        utt.push(field(a));
    }
    Trajectory::from_parts(grid, u, ut, utt).expect("consistent lengths")
}

fn parseval_error() -> f64 {
    let domain = Domain::new(&[PI, 2.0], &[7, 5]).expect("valid domain");
    let coeffs = (0..domain.mode_count())
        .map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0)
        .collect();
    let f = SpectralField::from_coeffs(&domain, coeffs).expect("mode count");
    let quad = spectral::to_grid(&f).quadrature_norm_sq();
    (quad - f.norm_sq()).abs() / f.norm_sq()
}

fn oscillator_error(b: f64) -> f64 {
    let domain = Domain::new(&[PI], &[4]).expect("valid domain");
    let u0 = SpectralField::sine(&domain, &[1], 1.0).expect("mode in range");
    let u1 = SpectralField::zeros(&domain);
    let params = ModelParams::westervelt(0.0, b, 1.0, 1.0);
    let grid = TimeGrid::new(1.0, 10_000).expect("valid grid");
    let traj =
        timeloop::solve_linearized(&u0, &u1, &CoefficientPath::linear(grid), &params, grid).expect("linear solve");
    let (u, ut, _) = traj.last();
    let (x, v) = damped_oscillator(1.0, b, 1.0, u0.coeffs()[0], 0.0, 1.0);
    let err = ((u.coeffs()[0] - x).powi(2) + (ut.coeffs()[0] - v).powi(2)).sqrt();
    err / (x * x + v * v).sqrt()
}

fn identity_distance() -> f64 {
    let spec = PotentialPressureSpec {
        kappa: 2.0,
        b: 0.01,
        c2: 1.0,
        final_time: 1.0,
        data: InitialData::single(&[1], 0.05),
        domain: DomainSpec::unit_pi(&[16]),
        steps: 1000,
        picard: PicardConfig::default(),
    };
    harness::potential_pressure_check(&spec).map_or(f64::INFINITY, |r| r.distance)
}

fn linear_slope_error() -> f64 {
    let spec = SweepSpec {
        params: ModelParams::westervelt(0.0, 0.0, 1.0, 1.0),
        b_values: harness::geometric_b_values(1e-2, 2.0, 5),
        data: InitialData::single(&[1], 1.0),
        domain: DomainSpec::unit_pi(&[8]),
        steps: 1000,
        picard: PicardConfig::default(),
        floor_check: false,
    };
    harness::run_sweep(&spec)
        .ok()
        .and_then(|r| r.rates.get("E").and_then(|s| s.fit))
        .map_or(f64::INFINITY, |f| (f.slope - 1.0).abs())
}

/// Runs every check; `passed` on each entry tells the outcome.
pub fn run_battery() -> Vec<Check> {
    let mut checks = vec![
        Check::at_most("parseval", parseval_error(), 1e-12),
        Check::at_most("standing wave E error", standing_wave_error(32, 1000, 1.0), 1e-5),
    ];
    for b in [0.01, 0.1, 1.0] {
        checks.push(Check::at_most(
            format!("damped oscillator b={b}"),
            oscillator_error(b),
            1e-8,
        ));
    }
    checks.push(Check::at_most("potential/pressure identity", identity_distance(), 1e-6));
    checks.push(Check::at_most("linear sweep slope", linear_slope_error(), 0.02));
    checks
}
