//! One-dimensional Gauss rules and sphere/ball volumes.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Gauss-Legendre rule mapped to `[0, 1]`, nodes ascending.
pub fn gauss_legendre_unit(count: usize) -> Vec<(f64, f64)> {
    let m = count;
    let mut rule = vec![(0.0, 0.0); m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        // z is the i-th largest root; map [-1,1] -> [0,1]
        rule[m - 1 - i] = (0.5 * (1.0 + z), 0.5 * w);
        rule[i] = (0.5 * (1.0 - z), 0.5 * w);
    }
    rule
}

fn legendre_with_derivative(m: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss rule on `[-1, 1]` for the weight `(1 - t^2)^(half_alpha / 2)`,
/// built by Golub-Welsch from the symmetric Jacobi recurrence.
pub fn gauss_jacobi_symmetric(count: usize, half_alpha: u32) -> Vec<(f64, f64)> {
    let alpha = half_alpha as f64 / 2.0;
    let mut jacobi = DMatrix::<f64>::zeros(count, count);
    for k in 1..count {
        let kf = k as f64;
        let s = 2.0 * kf + 2.0 * alpha;
        let b = 4.0 * kf * (kf + alpha) * (kf + alpha) * (kf + 2.0 * alpha)
            / (s * s * (s + 1.0) * (s - 1.0));
        let off = b.sqrt();
        jacobi[(k, k - 1)] = off;
        jacobi[(k - 1, k)] = off;
    }
    let mu0 = symmetric_jacobi_mass(half_alpha);
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..count)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// `∫_{-1}^{1} (1 - t^2)^(half_alpha / 2) dt`.
fn symmetric_jacobi_mass(half_alpha: u32) -> f64 {
    // m(a) = m(a-1) * 2a / (2a + 1)
    let mut m = if half_alpha % 2 == 0 { 2.0 } else { PI / 2.0 };
    let mut a = if half_alpha % 2 == 0 { 0.0 } else { 0.5 };
    let target = half_alpha as f64 / 2.0;
    while a < target - 1e-12 {
        a += 1.0;
        m *= 2.0 * a / (2.0 * a + 1.0);
    }
    m
}

/// Volume of the round unit sphere `S^{n-1}` bounding the ball in `R^n`.
pub fn sphere_volume(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_volume(n - 2),
    }
}

/// Volume of the Euclidean unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_volume(n) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let m = 10;
        let rule = gauss_legendre_unit(m);
        for deg in 0..(2 * m) {
            let q: f64 = rule.iter().map(|&(r, w)| w * r.powi(deg as i32)).sum();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!(
                ((q - exact) / exact).abs() < 1e-13,
                "deg {deg}: {q} vs {exact}"
            );
        }
        assert!(rule.windows(2).all(|p| p[0].0 < p[1].0));
        assert!(rule.iter().all(|&(r, w)| r > 0.0 && r < 1.0 && w > 0.0));
    }

    #[test]
    fn jacobi_masses() {
        assert!((symmetric_jacobi_mass(0) - 2.0).abs() < 1e-15);
        assert!((symmetric_jacobi_mass(1) - PI / 2.0).abs() < 1e-15);
        assert!((symmetric_jacobi_mass(2) - 4.0 / 3.0).abs() < 1e-15);
        assert!((symmetric_jacobi_mass(3) - 3.0 * PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_rule_integrates_sin_powers() {
        // ∫_0^π sin^p θ · cos^2 θ dθ through t = cos θ
        for p in 1..=4u32 {
            let rule = gauss_jacobi_symmetric(8, p - 1);
            let q: f64 = rule.iter().map(|&(t, w)| w * t * t).sum();
            let exact = match p {
                1 => 2.0 / 3.0,
                2 => PI / 8.0,
                3 => 4.0 / 15.0,
                _ => PI / 16.0,
            };
            assert!((q - exact).abs() < 1e-14, "p = {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn volumes() {
        assert!((sphere_volume(4) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((sphere_volume(6) - PI.powi(3)).abs() < 1e-13);
        assert!((ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
        assert!((ball_volume(6) - PI.powi(3) / 6.0).abs() < 1e-14);
    }
}
