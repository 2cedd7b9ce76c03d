mod common;

use inviscid_core::harness::{self, InitialData, PotentialPressureSpec, SweepSpec};
use inviscid_core::models::ModelParams;
use inviscid_core::picard::PicardConfig;
use inviscid_core::spectral::DomainSpec;
use inviscid_core::timeloop::TimeGrid;

fn linear_spec(b_values: Vec<f64>, steps: usize) -> SweepSpec {
    SweepSpec {
        params: ModelParams::westervelt(0.0, 0.0, 1.0, 1.0),
        b_values,
        data: InitialData::single(&[1], 1.0),
        domain: DomainSpec::unit_pi(&[8]),
        steps,
        picard: PicardConfig::default(),
        floor_check: false,
    }
}

/// E-norm distance between two single-mode oscillators (`λ = 1`) over the
/// nodes of `grid`.
fn oscillator_e_distance(b: f64, b_prime: f64, grid: TimeGrid) -> f64 {
    // Unit-amplitude sine on (0, π) has coefficient √(π/2).
    let xi0 = (std::f64::consts::PI / 2.0).sqrt();
    let (mut du, mut dv) = (0.0f64, 0.0f64);
    for t in grid.nodes() {
        let (x, v) = common::companion_flow(1.0, b, 1.0, xi0, 0.0, t);
        let (y, w) = common::companion_flow(1.0, b_prime, 1.0, xi0, 0.0, t);
        du = du.max((x - y).powi(2));
        dv = dv.max((v - w).powi(2));
    }
    (du + dv).sqrt()
}

#[test]
fn linear_sweep_matches_oscillator_differences() {
    let steps = 2000;
    let spec = linear_spec(harness::geometric_b_values(1e-2, 2.0, 5), steps);
    let result = harness::run_sweep(&spec).unwrap();
    let grid = TimeGrid::new(1.0, steps).unwrap();
    for row in &result.rows {
        let stats = row.outcome.as_ref().unwrap();
        let exact = oscillator_e_distance(row.b, 0.0, grid);
        assert!(
            (stats.e_diff - exact).abs() <= 1e-8,
            "b = {}: {} vs {}",
            row.b,
            stats.e_diff,
            exact
        );
        assert_eq!(stats.report.iterations, 1);
    }
    let fit = result.rates.get("E").unwrap().fit.unwrap();
    assert!((fit.slope - 1.0).abs() <= 0.02, "{fit:?}");
    assert!(result.monotone());
}

#[test]
fn linear_cauchy_quotients_match_closed_form() {
    let steps = 2000;
    let spec = linear_spec(vec![1e-2, 5e-3, 2e-3, 1e-3], steps);
    let table = harness::cauchy_check(&spec).unwrap();
    assert_eq!(table.rows.len(), 3);
    let grid = TimeGrid::new(1.0, steps).unwrap();
    for row in &table.rows {
        let exact = oscillator_e_distance(row.b, row.b_prime, grid) / (row.b - row.b_prime).abs();
        assert!((row.quotient - exact).abs() <= 1e-6 * exact, "{row:?} vs {exact}");
    }
    assert!(table.max_quotient().unwrap() / table.min_quotient().unwrap() < 1.1);
}

#[test]
fn cauchy_needs_two_values() {
    assert!(harness::cauchy_check(&linear_spec(vec![1e-2], 10)).is_err());
}

#[test]
fn sweeps_are_deterministic() {
    let mut spec = linear_spec(harness::geometric_b_values(1e-2, 2.0, 3), 200);
    spec.params = ModelParams::westervelt(1.0, 0.0, 1.0, 1.0);
    spec.data = InitialData::single(&[1], 0.1);
    spec.floor_check = true;
    let a = harness::run_sweep(&spec).unwrap();
    let b = harness::run_sweep(&spec).unwrap();
    assert_eq!(a, b);
    assert!(a.floor.is_some());
}

#[test]
fn doubling_modes_barely_moves_slopes() {
    let mut spec = linear_spec(harness::geometric_b_values(1e-2, 2.0, 5), 400);
    spec.params = ModelParams::westervelt(1.0, 0.0, 1.0, 1.0);
    spec.data = InitialData::single(&[1], 0.1);
    let coarse = harness::run_sweep(&spec).unwrap();
    spec.domain = spec.domain.refined();
    let fine = harness::run_sweep(&spec).unwrap();
    for norm in ["E", "X"] {
        let a = coarse.rates.get(norm).unwrap().fit.unwrap().slope;
        let b = fine.rates.get(norm).unwrap().fit.unwrap().slope;
        assert!((a - b).abs() <= 0.05, "{norm}: {a} vs {b}");
    }
}

fn identity_spec(kappa: f64, steps: usize) -> PotentialPressureSpec {
    PotentialPressureSpec {
        kappa,
        b: 0.01,
        c2: 1.0,
        final_time: 1.0,
        data: InitialData::single(&[1], 0.05),
        domain: DomainSpec::unit_pi(&[16]),
        steps,
        picard: PicardConfig::default(),
    }
}

#[test]
fn potential_pressure_identity_without_nonlinearity() {
    let report = harness::potential_pressure_check(&identity_spec(0.0, 200)).unwrap();
    assert!(report.distance <= 1e-10, "{:e}", report.distance);
}

#[test]
fn potential_pressure_distance_is_second_order_in_time() {
    let report = harness::potential_pressure_check(&identity_spec(2.0, 100)).unwrap();
    let ratio = report.refinement_ratio();
    assert!((3.0..5.0).contains(&ratio), "{ratio} ({:e})", report.distance);
}
