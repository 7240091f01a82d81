//! The cutoff weight `F̃ = F · Π β(x_i)` and its transform.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::lattice::WeightSpec;
use crate::numeric::quad::{integrate_pieces, Tolerance};

fn transition(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Even smooth bump: 1 on `[-1, 1]`, 0 outside `(-2, 2)`, with the
/// exponential smoothstep `h(2-|x|) / (h(2-|x|) + h(|x|-1))` between.
pub fn beta(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let up = transition(2.0 - a);
        up / (up + transition(a - 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    /// Absolute tolerance for each one-dimensional transform.
    pub tolerance: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { tolerance: 1e-9 }
    }
}

impl CutoffSpec {
    pub fn describe(&self) -> &'static str {
        "beta = h(2-|x|)/(h(2-|x|)+h(|x|-1)), h(t)=exp(-1/t)"
    }
}

/// One coordinate factor of `F̃̂`: `∫_0^2 β(x) x^p e^{-2πixξ} dx` on an
/// orthant coordinate, `∫_{-2}^2 β(x) e^{-2πixξ} dx` otherwise.
pub fn factor_hat(weighted: bool, p: u32, xi: f64, cut: &CutoffSpec) -> Result<Complex64> {
    let tol = Tolerance { abs: cut.tolerance, rel: 1e-12, max_intervals: 50_000 };
    if weighted {
        let f = |x: f64| Complex64::from_polar(beta(x) * x.powi(p as i32), -2.0 * PI * x * xi);
        Ok(integrate_pieces(f, &[0.0, 1.0, 2.0], tol)?.value)
    } else {
        let f = |x: f64| 2.0 * beta(x) * (2.0 * PI * x * xi).cos();
        Ok(Complex64::new(integrate_pieces(f, &[0.0, 1.0, 2.0], tol)?.value, 0.0))
    }
}

/// `F̃̂(ξ)` as the product of the coordinate transforms.
pub fn f_tilde_hat(w: &WeightSpec, cut: &CutoffSpec, xi: &[f64]) -> Result<Complex64> {
    w.validate()?;
    if xi.len() != w.n() {
        return invalid(format!("frequency has {} components, expected {}", xi.len(), w.n()));
    }
    let mut out = Complex64::new(1.0, 0.0);
    for (i, &f) in xi.iter().enumerate() {
        out *= factor_hat(i < w.weighted, w.exponent(i), f, cut)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::bracket;
    use crate::numeric::quad::integrate;

    #[test]
    fn beta_shape() {
        assert_eq!(beta(0.3), 1.0);
        assert_eq!(beta(-1.0), 1.0);
        assert_eq!(beta(2.0), 0.0);
        assert_eq!(beta(-7.0), 0.0);
        assert!((beta(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let b = beta(1.0 + i as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&b) && b <= prev);
            prev = b;
        }
    }

    #[test]
    fn zero_frequency_is_integral() {
        let w = WeightSpec::sphere_circle(&[3], 1).unwrap();
        let cut = CutoffSpec::default();
        let got = f_tilde_hat(&w, &cut, &[0.0, 0.0]).unwrap();
        let tol = Tolerance::new(1e-13, 1e-13);
        let a = integrate(|x: f64| beta(x) * x * x, 0.0, 2.0, tol).unwrap().value;
        let b = integrate(beta, -2.0, 2.0, tol).unwrap().value;
        assert!((got.re - a * b).abs() < 1e-9 && got.im.abs() < 1e-12);
        // ∫β = 3 by the symmetry h-ratio + mirror = 1 on [1, 2]
        assert!((b - 3.0).abs() < 1e-10);
    }

    #[test]
    fn unweighted_factors_are_even_and_real() {
        let w = WeightSpec::unweighted(2);
        let cut = CutoffSpec::default();
        let a = f_tilde_hat(&w, &cut, &[1.3, -0.7]).unwrap();
        let b = f_tilde_hat(&w, &cut, &[-1.3, 0.7]).unwrap();
        assert_eq!(a.im, 0.0);
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn decay_bound_is_refinement_stable() {
        let cut = CutoffSpec::default();
        let sup = |steps: usize| -> f64 {
            let mut s: f64 = 0.0;
            for i in 0..=steps {
                let a = -40.0 + 80.0 * i as f64 / steps as f64;
                let f1 = factor_hat(true, 1, a, &cut).unwrap().norm() * bracket(a).powi(2);
                let f2 = factor_hat(false, 0, a, &cut).unwrap().norm() * bracket(a).powi(2);
                s = s.max(f1).max(f2);
            }
            s
        };
        let coarse = sup(400);
        let fine = sup(800);
        assert!(fine.is_finite());
        assert!((fine - coarse).abs() < 0.05 * fine, "{coarse} vs {fine}");
    }
}
