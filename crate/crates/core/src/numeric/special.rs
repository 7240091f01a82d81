//! Gamma at half-integers, ball/sphere volumes, and Bessel functions of
//! half-integer order.

use std::f64::consts::PI;

use crate::error::{Result, WeylError};

/// `Γ(twice / 2)` for `twice ≥ 1`, exact recurrence from `Γ(1/2) = √π`
/// and `Γ(1) = 1`.
pub fn gamma_half(twice: u32) -> f64 {
    assert!(twice >= 1, "gamma_half needs a positive argument");
    let (mut x, mut g) = if twice.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = twice as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: u32) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half(n + 2)
}

/// Surface measure of the unit sphere `S^{n-1} ⊂ R^n`.
pub fn sphere_area(n: u32) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Riemannian volume of the round unit sphere `S^d`.
pub fn round_sphere_volume(d: u32) -> f64 {
    sphere_area(d + 1)
}

const SERIES_LIMIT: f64 = 12.0;
const OVERLAP: (f64, f64) = (10.0, 14.0);

/// Power series for `J_ν(z)`, `ν = twice_nu / 2`.
pub fn bessel_j_series(twice_nu: i32, z: f64) -> f64 {
    let nu = twice_nu as f64 / 2.0;
    let half = 0.5 * z;
    let mut term = if twice_nu == 0 { 1.0 } else { half.powf(nu) / gamma_half((twice_nu + 2) as u32) };
    let mut sum = term;
    let q = half * half;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > half {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion for `J_ν(z)` at large `z`. Terminates for
/// half-integer orders.
pub fn bessel_j_asymptotic(twice_nu: i32, z: f64) -> f64 {
    let nu = twice_nu as f64 / 2.0;
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let t = a;
        if t == 0.0 {
            break;
        }
        if t.abs() > prev && k > 2 {
            break;
        }
        prev = t.abs();
        match k % 4 {
            0 => p += t,
            1 => q += t,
            2 => p -= t,
            _ => q -= t,
        }
        if t.abs() < 1e-17 {
            break;
        }
        let j = (2 * k + 1) as f64;
        a *= (mu - j * j) / ((k + 1) as f64 * 8.0 * z);
    }
    let chi = z - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_ν(z)` for `ν = twice_nu / 2 ≥ -1/2` and `z ≥ 0`.
pub fn bessel_j(twice_nu: i32, z: f64) -> f64 {
    debug_assert!(twice_nu >= -1 && z >= 0.0);
    if z < SERIES_LIMIT {
        bessel_j_series(twice_nu, z)
    } else {
        bessel_j_asymptotic(twice_nu, z)
    }
}

/// Like [`bessel_j`], but inside the band where both branches are accurate
/// it evaluates both and reports a disagreement beyond `1e-8`.
pub fn bessel_j_checked(twice_nu: i32, z: f64) -> Result<f64> {
    let v = bessel_j(twice_nu, z);
    if z >= OVERLAP.0 && z <= OVERLAP.1 {
        let a = bessel_j_series(twice_nu, z);
        let b = bessel_j_asymptotic(twice_nu, z);
        if (a - b).abs() > 1e-8 {
            return Err(WeylError::BranchMismatch { xi: z, a, b });
        }
    }
    Ok(v)
}
