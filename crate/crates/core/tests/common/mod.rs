//! Reference computations that share no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss rule on `[0, L]` with `panels` panels of `order` points.
pub fn composite_rule(length: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order);
    let h = length / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let a = p as f64 * h;
        for &(x, w) in &base {
            out.push((a + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// Tensor product of per-axis rules.
pub fn tensor_rule(lengths: &[f64], panels: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    let mut pts: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for &l in lengths {
        let rule = composite_rule(l, panels, order);
        let mut next = Vec::with_capacity(pts.len() * rule.len());
        for (p, w) in &pts {
            for &(x, wx) in &rule {
                let mut q = p.clone();
                q.push(x);
                next.push((q, w * wx));
            }
        }
        pts = next;
    }
    pts
}

/// Mode multi-indices in row-major order, axis 0 slowest, 1-based.
pub fn mode_indices(modes: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for &n in modes {
        out = out
            .into_iter()
            .flat_map(|p| {
                (1..=n).map(move |j| {
                    let mut q = p.clone();
                    q.push(j);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn basis(lengths: &[f64], index: &[usize], x: &[f64]) -> f64 {
    index
        .iter()
        .zip(lengths)
        .zip(x)
        .map(|((&j, &l), &xa)| (2.0 / l).sqrt() * (j as f64 * PI * xa / l).sin())
        .product()
}

pub fn basis_grad(lengths: &[f64], index: &[usize], x: &[f64], axis: usize) -> f64 {
    (0..lengths.len())
        .map(|a| {
            let (j, l) = (index[a] as f64, lengths[a]);
            let k = j * PI / l;
            if a == axis {
                (2.0 / l).sqrt() * k * (k * x[a]).cos()
            } else {
                (2.0 / l).sqrt() * (k * x[a]).sin()
            }
        })
        .product()
}

pub fn eval(lengths: &[f64], modes: &[usize], coeffs: &[f64], x: &[f64]) -> f64 {
    mode_indices(modes)
        .iter()
        .zip(coeffs)
        .map(|(idx, c)| c * basis(lengths, idx, x))
        .sum()
}

pub fn eval_grad(lengths: &[f64], modes: &[usize], coeffs: &[f64], x: &[f64], axis: usize) -> f64 {
    mode_indices(modes)
        .iter()
        .zip(coeffs)
        .map(|(idx, c)| c * basis_grad(lengths, idx, x, axis))
        .sum()
}

/// `∫ f w_j` for every mode by tensor Gauss quadrature.
pub fn project(lengths: &[f64], modes: &[usize], f: impl Fn(&[f64]) -> f64, panels: usize) -> Vec<f64> {
    let rule = tensor_rule(lengths, panels, 12);
    let values: Vec<f64> = rule.iter().map(|(x, _)| f(x)).collect();
    mode_indices(modes)
        .iter()
        .map(|idx| {
            rule.iter()
                .zip(&values)
                .map(|((x, w), v)| w * v * basis(lengths, idx, x))
                .sum()
        })
        .collect()
}

type M2 = [[f64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// `exp(A)` by scaling and squaring with a Taylor series.
pub fn expm2(a: &M2) -> M2 {
    let norm = a.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max) * 2.0;
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let scale = 2f64.powi(-s);
    let x = [[a[0][0] * scale, a[0][1] * scale], [a[1][0] * scale, a[1][1] * scale]];
    let mut result = [[1.0, 0.0], [0.0, 1.0]];
    let mut term = result;
    for k in 1..30 {
        term = mul(&term, &x);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = mul(&result, &result);
    }
    result
}

/// `(ξ(t), ξ'(t))` of `ξ'' + bλ ξ' + c²λ ξ = 0` via the companion matrix.
pub fn companion_flow(lambda: f64, b: f64, c2: f64, xi0: f64, xi1: f64, t: f64) -> (f64, f64) {
    let e = expm2(&[[0.0, t], [-c2 * lambda * t, -b * lambda * t]]);
    (e[0][0] * xi0 + e[0][1] * xi1, e[1][0] * xi0 + e[1][1] * xi1)
}

/// Deterministic pseudo-random coefficients.
pub fn pseudo_random(seed: u64, count: usize, decay: f64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..count)
        .map(|i| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            (2.0 * u - 1.0) / (1.0 + i as f64).powf(decay)
        })
        .collect()
}
