//! Fourier transforms on the lattice side, with the convention
//! `ĝ(ξ) = ∫ g(x) e^{-2πi⟨x,ξ⟩} dx`.

pub mod cutoff;
pub mod poisson;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result, WeylError};
use crate::lattice::WeightSpec;
use crate::numeric::bracket;
use crate::numeric::quad::{integrate, Tolerance};
use crate::numeric::special::{ball_volume, bessel_j_checked};

pub use cutoff::{beta, f_tilde_hat, CutoffSpec};
pub use poisson::{dyadic_sum_check, poisson_error_sum, rho_hat, PoissonSum, ShellSum, TruncationSpec};

/// `χ̂_B` of the unit ball at radius `r = |ξ|`: `r^{-n/2} J_{n/2}(2πr)`.
pub fn ball_chi_hat_radial(n: usize, r: f64) -> Result<f64> {
    if !(1..=4).contains(&n) {
        return invalid(format!("ball transform supports n in 1..=4, got {n}"));
    }
    if r == 0.0 {
        return Ok(ball_volume(n as u32));
    }
    let j = bessel_j_checked(n as i32, 2.0 * PI * r)?;
    Ok(j / r.powf(n as f64 / 2.0))
}

pub fn ball_chi_hat(n: usize, xi: &[f64]) -> Result<f64> {
    if xi.len() != n {
        return invalid(format!("frequency has {} components, expected {n}", xi.len()));
    }
    ball_chi_hat_radial(n, xi.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `max |χ̂_B(ξ)| ⟨ξ⟩^{(n+1)/2}` over the sampled radii.
pub fn decay_ratio_sup(n: usize, radii: &[f64]) -> Result<f64> {
    let a = (n as f64 + 1.0) / 2.0;
    let mut sup: f64 = 0.0;
    for &r in radii {
        if !(r >= 1.0) {
            return invalid(format!("decay samples need radius >= 1, got {r}"));
        }
        sup = sup.max(ball_chi_hat_radial(n, r)?.abs() * bracket(r).powf(a));
    }
    if !sup.is_finite() {
        return Err(WeylError::Quadrature("decay ratio is not finite".into()));
    }
    Ok(sup)
}

/// `n_points` radii evenly spaced on `[lo, hi]`.
pub fn sample_radii(lo: f64, hi: f64, n_points: usize) -> Vec<f64> {
    (0..n_points).map(|i| lo + (hi - lo) * i as f64 / (n_points - 1) as f64).collect()
}

fn transform_tolerance() -> Tolerance {
    Tolerance { abs: 1e-12, rel: 1e-11, max_intervals: 50_000 }
}

/// `∫_{rB} F(x) e^{-2πi⟨x,ξ⟩} dx` by quadrature, for `n ≤ 2`.
///
/// The outer coordinate is parametrized as `x₁ = r sin θ` so the chord
/// length `r cos θ` is smooth; circle coordinates integrate in closed form.
pub fn weighted_ball_transform(w: &WeightSpec, radius: f64, xi: &[f64]) -> Result<Complex64> {
    w.validate()?;
    let n = w.n();
    if n > 2 {
        return invalid(format!("weighted ball transform supports n <= 2, got {n}"));
    }
    if xi.len() != n {
        return invalid(format!("frequency has {} components, expected {n}", xi.len()));
    }
    let tol = transform_tolerance();
    let wave = |x: f64, f: f64| Complex64::from_polar(1.0, -2.0 * PI * x * f);
    if n == 1 {
        let p = w.exponent(0) as i32;
        let lo = if w.weighted == 1 { 0.0 } else { -radius };
        return Ok(integrate(|x: f64| wave(x, xi[0]) * x.powi(p), lo, radius, tol)?.value);
    }
    let (p0, p1) = (w.exponent(0) as i32, w.exponent(1) as i32);
    let theta_lo = if w.weighted >= 1 { 0.0 } else { -PI / 2.0 };
    let mut failure: Option<WeylError> = None;
    let outer = |theta: f64| -> Complex64 {
        let x = radius * theta.sin();
        let h = radius * theta.cos();
        let jac = radius * theta.cos();
        let inner = if w.weighted == 2 {
            match integrate(|z: f64| wave(z, xi[1]) * z.powi(p1), 0.0, h, tol) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        } else if xi[1] == 0.0 {
            Complex64::new(2.0 * h, 0.0)
        } else {
            Complex64::new((2.0 * PI * xi[1] * h).sin() / (PI * xi[1]), 0.0)
        };
        wave(x, xi[0]) * inner * (x.powi(p0) * jac)
    };
    let v = integrate(outer, theta_lo, PI / 2.0, tol)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(v.value),
    }
}

/// `(χ_B F)^(ξ)` on the unit ball: the Bessel closed form when `F ≡ 1`,
/// quadrature otherwise.
pub fn chi_f_hat(w: &WeightSpec, xi: &[f64]) -> Result<Complex64> {
    if w.weighted == 0 {
        return Ok(Complex64::new(ball_chi_hat(w.n(), xi)?, 0.0));
    }
    weighted_ball_transform(w, 1.0, xi)
}
