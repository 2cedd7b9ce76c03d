mod common;

use std::f64::consts::PI;

use inviscid_core::spectral::{self, Domain, SpectralField};
use proptest::prelude::*;

fn field(domain: &std::sync::Arc<Domain>, seed: u64, decay: f64) -> SpectralField {
    SpectralField::from_coeffs(domain, common::pseudo_random(seed, domain.mode_count(), decay)).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn grid_values_match_direct_summation() {
    for (lengths, modes) in [
        (vec![PI], vec![9]),
        (vec![1.3, PI], vec![5, 4]),
        (vec![1.0, 2.0, 0.7], vec![3, 2, 4]),
    ] {
        let d = Domain::new(&lengths, &modes).unwrap();
        let f = field(&d, 7, 0.5);
        let grid = spectral::to_grid(&f);
        for flat in d.physical_nodes() {
            let mut rest = flat;
            let mut idx = vec![0; d.dim()];
            for a in (0..d.dim()).rev() {
                idx[a] = rest % d.grid_shape()[a];
                rest /= d.grid_shape()[a];
            }
            let x = d.node(&idx);
            let direct = common::eval(&lengths, &modes, f.coeffs(), &x);
            assert!((grid.values()[flat] - direct).abs() < 1e-12, "{lengths:?} {idx:?}");
            assert!((f.evaluate(&x) - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn multiply_matches_quadrature_projection() {
    for (lengths, modes) in [(vec![PI], vec![10]), (vec![1.0], vec![7]), (vec![PI, 1.5], vec![5, 4])] {
        let d = Domain::new(&lengths, &modes).unwrap();
        let f = field(&d, 3, 0.3);
        let g = field(&d, 11, 0.8);
        let ours = spectral::multiply(&f, &g).unwrap();
        let oracle = common::project(
            &lengths,
            &modes,
            |x| common::eval(&lengths, &modes, f.coeffs(), x) * common::eval(&lengths, &modes, g.coeffs(), x),
            8,
        );
        assert!(max_abs_diff(ours.coeffs(), &oracle) < 1e-12, "{lengths:?}");
    }
}

#[test]
fn grad_dot_matches_quadrature_projection() {
    for (lengths, modes) in [(vec![PI], vec![8]), (vec![0.8, 1.7], vec![4, 5])] {
        let d = Domain::new(&lengths, &modes).unwrap();
        let f = field(&d, 5, 0.7);
        let g = field(&d, 9, 0.4);
        let ours = spectral::grad_dot(&f, &g).unwrap();
        let oracle = common::project(
            &lengths,
            &modes,
            |x| {
                (0..lengths.len())
                    .map(|a| {
                        common::eval_grad(&lengths, &modes, f.coeffs(), x, a)
                            * common::eval_grad(&lengths, &modes, g.coeffs(), x, a)
                    })
                    .sum()
            },
            8,
        );
        assert!(max_abs_diff(ours.coeffs(), &oracle) < 1e-12, "{lengths:?}");
    }
}

#[test]
fn laplacian_close_to_finite_differences() {
    let lengths = [PI, 2.0];
    let modes = [4, 3];
    let d = Domain::new(&lengths, &modes).unwrap();
    let f = field(&d, 13, 1.0);
    let lap = spectral::laplacian(&f);
    let h = 1e-3;
    for x in [[0.4, 0.7], [1.9, 1.2], [2.7, 0.3]] {
        let c = common::eval(&lengths, &modes, f.coeffs(), &x);
        let mut fd = 0.0;
        for a in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            fd += (common::eval(&lengths, &modes, f.coeffs(), &xp) - 2.0 * c
                + common::eval(&lengths, &modes, f.coeffs(), &xm))
                / (h * h);
        }
        // Truncation error is h²/12 times the fourth derivative, bounded by
        // Σ|ξ| λ_max² ≈ 1e3 here.
        assert!((lap.evaluate(&x) - fd).abs() < 1e-3, "{x:?}");
    }
}

#[test]
fn quotient_by_smooth_coefficient_matches_quadrature() {
    // (1/α) g with α = 1 − 0.1 sin x, projected.
    let lengths = [PI];
    let modes = [12];
    let d = Domain::new(&lengths, &modes).unwrap();
    let g = field(&d, 21, 1.0);
    let alpha = spectral::to_grid(&SpectralField::sine(&d, &[1], 1.0).unwrap()).map(|v| 1.0 - 0.1 * v);
    let quotient = spectral::to_grid(&g).zip_with(&alpha, |a, b| a / b);
    let ours = spectral::from_grid(&quotient);
    let oracle = common::project(
        &lengths,
        &modes,
        |x| common::eval(&lengths, &modes, g.coeffs(), x) / (1.0 - 0.1 * x[0].sin()),
        16,
    );
    assert!(max_abs_diff(ours.coeffs(), &oracle) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_roundtrip_is_identity(coeffs in prop::collection::vec(-1.0f64..1.0, 12)) {
        let d = Domain::new(&[PI, 1.0], &[4, 3]).unwrap();
        let f = SpectralField::from_coeffs(&d, coeffs).unwrap();
        let back = spectral::from_grid(&spectral::to_grid(&f));
        prop_assert!(max_abs_diff(back.coeffs(), f.coeffs()) < 1e-13);
    }

    #[test]
    fn parseval_on_physical_nodes(coeffs in prop::collection::vec(-1.0f64..1.0, 10)) {
        let d = Domain::new(&[1.7], &[10]).unwrap();
        let f = SpectralField::from_coeffs(&d, coeffs).unwrap();
        let quad = spectral::to_grid(&f).quadrature_norm_sq();
        prop_assert!((quad - f.norm_sq()).abs() <= 1e-12 * (1.0 + f.norm_sq()));
    }

    #[test]
    fn multiply_is_symmetric_and_bilinear(
        a in prop::collection::vec(-1.0f64..1.0, 6),
        b in prop::collection::vec(-1.0f64..1.0, 6),
        c in prop::collection::vec(-1.0f64..1.0, 6),
        s in -3.0f64..3.0,
    ) {
        let d = Domain::new(&[PI, PI], &[3, 2]).unwrap();
        let (f, g, h) = (
            SpectralField::from_coeffs(&d, a).unwrap(),
            SpectralField::from_coeffs(&d, b).unwrap(),
            SpectralField::from_coeffs(&d, c).unwrap(),
        );
        let fg = spectral::multiply(&f, &g).unwrap();
        prop_assert!(max_abs_diff(fg.coeffs(), spectral::multiply(&g, &f).unwrap().coeffs()) < 1e-14);
        let lhs = spectral::multiply(&(&f.scaled(s) + &h), &g).unwrap();
        let rhs = &fg.scaled(s) + &spectral::multiply(&h, &g).unwrap();
        prop_assert!(max_abs_diff(lhs.coeffs(), rhs.coeffs()) < 1e-13);
    }

    #[test]
    fn laplacian_scales_by_eigenvalues(coeffs in prop::collection::vec(-1.0f64..1.0, 8)) {
        let d = Domain::new(&[2.5], &[8]).unwrap();
        let f = SpectralField::from_coeffs(&d, coeffs).unwrap();
        let lap = spectral::laplacian(&f);
        for ((l, c), e) in lap.coeffs().iter().zip(f.coeffs()).zip(d.eigenvalues()) {
            prop_assert!((l + e * c).abs() <= 1e-15 * e.max(1.0));
        }
    }
}
