//! Mollified weighted counts.
//!
//! The bump `ρ(u) = Z⁻¹ exp(-1/(1-|u|²))` on the unit ball is rescaled to
//! `ρ_ε(u) = ε^{-n} ρ(u/ε)`. The smoothed ball indicator `χ_{λB} ∗ ρ_ε` is
//! radial, so one profile in `r = |x|` serves every lattice point.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{weighted_sum_between, WeightSpec};
use crate::error::{invalid, Result, WeylError};
use crate::numeric::interp::MonotoneCubic;
use crate::numeric::quad::{integrate, integrate_pieces, Tolerance};
use crate::numeric::special::{gamma_half, sphere_area};
use crate::numeric::CompensatedSum;

pub const DEFAULT_PROFILE_NODES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec {
    pub epsilon: f64,
    /// Intervals in the radial profile grid.
    pub nodes: usize,
}

impl MollifierSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        let s = Self { epsilon, nodes: DEFAULT_PROFILE_NODES };
        s.validate()?;
        Ok(s)
    }

    /// `ε = λ^{-(n-1)/(n+1)}`.
    pub fn auto(lambda: f64, n: usize) -> Result<Self> {
        Self::new(lambda.powf(-((n as f64 - 1.0) / (n as f64 + 1.0))))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return invalid(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.nodes < 8 {
            return invalid(format!("profile needs at least 8 intervals, got {}", self.nodes));
        }
        Ok(())
    }
}

fn bump(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Normalized bump in dimension `n` (`1 ≤ n ≤ 4`).
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    n: u32,
    norm: f64,
}

impl Mollifier {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=4).contains(&n) {
            return invalid(format!("mollifier supports dimensions 1..=4, got {n}"));
        }
        let n = n as u32;
        let tol = Tolerance::new(1e-16, 1e-14);
        let radial = integrate(|s: f64| bump(s) * s.powi(n as i32 - 1), 0.0, 1.0, tol)?.value;
        Ok(Self { n, norm: sphere_area(n) * radial })
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    /// `ρ(u)` at `|u| = s`.
    pub fn density(&self, s: f64) -> f64 {
        bump(s) / self.norm
    }

    /// Radial density of `|u|` under `ρ`; integrates to one on `[0, 1]`.
    pub fn radial_density(&self, s: f64) -> f64 {
        sphere_area(self.n) * s.powi(self.n as i32 - 1) * self.density(s)
    }

    /// `∫ ρ(u) |u|^q du`.
    pub fn radial_moment(&self, q: u32) -> Result<f64> {
        let tol = Tolerance::new(1e-16, 1e-13);
        Ok(integrate(|s: f64| self.radial_density(s) * s.powi(q as i32), 0.0, 1.0, tol)?.value)
    }

    /// Mass of `ρ` in the ball of radius `t`.
    pub fn mass_within(&self, t: f64) -> Result<f64> {
        if t >= 1.0 {
            return Ok(1.0);
        }
        if t <= 0.0 {
            return Ok(0.0);
        }
        let tol = Tolerance::new(1e-15, 1e-13);
        Ok(integrate(|s: f64| self.radial_density(s), 0.0, t, tol)?.value)
    }

    /// `(χ_{λB} ∗ ρ_ε)(x)` at `|x| = r` by radial quadrature.
    pub fn ball_convolution(&self, lambda: f64, epsilon: f64, r: f64) -> Result<f64> {
        if r + epsilon <= lambda {
            return Ok(1.0);
        }
        if r - epsilon >= lambda {
            return Ok(0.0);
        }
        if r == 0.0 {
            return self.mass_within(lambda / epsilon);
        }
        let n = self.n;
        let integrand = |s: f64| {
            if s <= 0.0 {
                return if r < lambda { self.radial_density(s) } else { 0.0 };
            }
            let tau = (r * r + epsilon * epsilon * s * s - lambda * lambda) / (2.0 * r * epsilon * s);
            self.radial_density(s) * cap_fraction(n, tau)
        };
        let mut pts = vec![0.0];
        for b in [(r - lambda).abs() / epsilon, (r + lambda) / epsilon] {
            if b > 0.0 && b < 1.0 {
                pts.push(b);
            }
        }
        pts.push(1.0);
        pts.sort_by(f64::total_cmp);
        let v = integrate_pieces(integrand, &pts, Tolerance::new(1e-13, 1e-12))?.value;
        Ok(v.clamp(0.0, 1.0))
    }

    /// Tabulates the convolution on `[max(0, λ-ε), λ+ε]`.
    pub fn profile(&self, lambda: f64, spec: &MollifierSpec) -> Result<ConvolutionProfile> {
        spec.validate()?;
        let eps = spec.epsilon;
        let start = (lambda - eps).max(0.0);
        let end = lambda + eps;
        let values: Vec<Result<f64>> = (0..=spec.nodes)
            .into_par_iter()
            .map(|j| {
                let r = start + (end - start) * j as f64 / spec.nodes as f64;
                self.ball_convolution(lambda, eps, r)
            })
            .collect();
        let values = values.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(ConvolutionProfile { lambda, epsilon: eps, interp: MonotoneCubic::new(start, end, values) })
    }
}

/// Fraction of `S^{n-1}` where the first coordinate is at least `tau`.
pub fn cap_fraction(n: u32, tau: f64) -> f64 {
    if tau <= -1.0 {
        return 1.0;
    }
    if tau >= 1.0 {
        return 0.0;
    }
    match n {
        1 => 0.5,
        2 => tau.acos() / PI,
        3 => 0.5 * (1.0 - tau),
        4 => (tau.acos() - tau * (1.0 - tau * tau).sqrt()) / PI,
        _ => unreachable!("dimension checked by Mollifier::new"),
    }
}

#[derive(Debug, Clone)]
pub struct ConvolutionProfile {
    lambda: f64,
    epsilon: f64,
    interp: MonotoneCubic,
}

impl ConvolutionProfile {
    pub fn eval(&self, r: f64) -> f64 {
        if r + self.epsilon <= self.lambda {
            1.0
        } else if r >= self.lambda + self.epsilon {
            0.0
        } else {
            self.interp.eval(r).clamp(0.0, 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifiedCount {
    pub lambda: f64,
    pub epsilon: f64,
    pub value: f64,
    /// Exact weight of points with `|x| ≤ λ-ε`.
    pub inner: f64,
    /// Unsmoothed weight of points in the transition shell.
    pub shell_weight: f64,
    pub shell_points: u64,
}

/// `Σ (χ_{λB} ∗ ρ_ε)(x) F(x)` over shifted lattice points.
pub fn mollified_count(w: &WeightSpec, lambda: f64, spec: &MollifierSpec) -> Result<MollifiedCount> {
    w.validate()?;
    spec.validate()?;
    if !(lambda >= 0.0) {
        return invalid(format!("lambda must be non-negative, got {lambda}"));
    }
    let eps = spec.epsilon;
    let moll = Mollifier::new(w.n())?;
    let profile = moll.profile(lambda, spec)?;
    let lattice = w.lattice();
    let lo = lattice.budget(lambda - eps);
    let hi = lattice.budget(lambda + eps);
    let inner = weighted_sum_between(w, -1, lo)?.value();
    let scale = lattice.scale() as f64;
    let slabs = lattice.par_map_slabs(hi, |m0| {
        let mut acc = CompensatedSum::default();
        let mut weight = CompensatedSum::default();
        let mut count = 0u64;
        let mut x = vec![0.0; w.n()];
        lattice.for_each_point(m0, lo, hi, &mut |m, s| {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = lattice.scaled(i, m[i]) as f64 / scale;
            }
            let f = w.weight_at(&x);
            let r = (s as f64).sqrt() / scale;
            acc.add(profile.eval(r) * f);
            weight.add(f);
            count += 1;
        });
        (acc.value(), weight.value(), count)
    });
    let mut shell = CompensatedSum::default();
    let mut shell_weight = CompensatedSum::default();
    let mut shell_points = 0;
    for (a, b, c) in slabs {
        shell.add(a);
        shell_weight.add(b);
        shell_points += c;
    }
    Ok(MollifiedCount {
        lambda,
        epsilon: eps,
        value: inner + shell.value(),
        inner,
        shell_weight: shell_weight.value(),
        shell_points,
    })
}

/// `lower ≤ exact ≤ upper`, with slack proportional to the weight of the
/// smoothed shells (profile accuracy is about `1e-9` per point).
pub fn sandwich_holds(lower: &MollifiedCount, exact: f64, upper: &MollifiedCount) -> bool {
    let slack = 1e-9 * (lower.shell_weight + upper.shell_weight) + 1e-12 * exact.abs();
    lower.value <= exact + slack && exact <= upper.value + slack
}

/// `Σ ((χ_{λB} F) ∗ ρ_ε)(x)`: the weight moves inside the convolution.
/// Points whose `ε`-ball lies inside the region use the moment expansion
/// of the polynomial weight; the rest use polar quadrature over the ball.
pub fn mollified_count_swapped(w: &WeightSpec, lambda: f64, spec: &MollifierSpec) -> Result<f64> {
    w.validate()?;
    spec.validate()?;
    let n = w.n();
    if n > 3 {
        return invalid(format!("swapped mollified count supports n <= 3, got {n}"));
    }
    if !(lambda > 0.0) {
        return invalid(format!("lambda must be positive, got {lambda}"));
    }
    let eps = spec.epsilon;
    let moll = Mollifier::new(n)?;
    let moments = MomentTable::new(&moll, w)?;
    let base = w.lattice();
    let lower = (0..n).map(|i| (i < w.weighted).then(|| (-eps - base.coordinate(i, 0)).ceil() as i64)).collect();
    let lattice = base.with_lower(lower);
    let hi = lattice.budget(lambda + eps);
    let scale = lattice.scale() as f64;
    let slabs: Vec<Result<f64>> = lattice.par_map_slabs(hi, |m0| {
        let mut acc = CompensatedSum::default();
        let mut x = vec![0.0; n];
        let mut failure = None;
        lattice.for_each_point(m0, -1, hi, &mut |m, s| {
            if failure.is_some() {
                return;
            }
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = lattice.scaled(i, m[i]) as f64 / scale;
            }
            let r = (s as f64).sqrt() / scale;
            let inside = r + eps <= lambda && x[..w.weighted].iter().all(|&v| v >= eps);
            if inside {
                acc.add(moments.expand(w, &x, eps));
            } else {
                match smoothed_weight(&moll, w, lambda, eps, &x) {
                    Ok(v) => acc.add(v),
                    Err(e) => failure = Some(e),
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(acc.value()),
        }
    });
    let mut total = CompensatedSum::default();
    for s in slabs {
        total.add(s?);
    }
    Ok(total.value())
}

/// `E[Π u_i^{a_i}]` under `ρ`, for the exponent boxes a weight can need.
struct MomentTable {
    radial: Vec<f64>,
    n: u32,
}

impl MomentTable {
    fn new(moll: &Mollifier, w: &WeightSpec) -> Result<Self> {
        let max_q: u32 = (0..w.n()).map(|i| w.exponent(i)).sum();
        let radial = (0..=max_q).map(|q| moll.radial_moment(q)).collect::<Result<Vec<_>>>()?;
        Ok(Self { radial, n: moll.dim() })
    }

    fn mixed(&self, a: &[u32]) -> f64 {
        if a.iter().any(|&v| v % 2 == 1) {
            return 0.0;
        }
        let q: u32 = a.iter().sum();
        // average of Π ω_i^{a_i} over the sphere
        let mut avg = gamma_half(self.n) / gamma_half(self.n + q);
        for &ai in a {
            avg *= gamma_half(ai + 1) / gamma_half(1);
        }
        self.radial[q as usize] * avg
    }

    /// `∫ ρ(u) Π (x_i - ε u_i)^{p_i} du`.
    fn expand(&self, w: &WeightSpec, x: &[f64], eps: f64) -> f64 {
        let k = w.weighted;
        let p: Vec<u32> = (0..k).map(|i| w.exponent(i)).collect();
        let mut a = vec![0u32; self.n as usize];
        let mut total = 0.0;
        loop {
            let mut coeff = 1.0;
            for i in 0..k {
                coeff *= binomial(p[i], a[i]) * x[i].powi((p[i] - a[i]) as i32) * (-eps).powi(a[i] as i32);
            }
            total += coeff * self.mixed(&a);
            let mut i = 0;
            loop {
                if i == k {
                    return total;
                }
                a[i] += 1;
                if a[i] > p[i] {
                    a[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Interval of `s ∈ [0, 1]` with `x - ε s ω` in the ball and orthant.
fn ray_interval(w: &WeightSpec, lambda: f64, eps: f64, x: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
    let xd: f64 = x.iter().zip(dir).map(|(a, b)| a * b).sum();
    let xx: f64 = x.iter().map(|a| a * a).sum();
    let disc = xd * xd - (xx - lambda * lambda);
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let mut lo = ((xd - root) / eps).max(0.0);
    let mut hi = ((xd + root) / eps).min(1.0);
    for i in 0..w.weighted {
        let o = dir[i];
        if o > 0.0 {
            hi = hi.min(x[i] / (eps * o));
        } else if o < 0.0 {
            lo = lo.max(x[i] / (eps * o));
        } else if x[i] < 0.0 {
            return None;
        }
    }
    (lo < hi).then_some((lo, hi))
}

fn smoothed_weight(moll: &Mollifier, w: &WeightSpec, lambda: f64, eps: f64, x: &[f64]) -> Result<f64> {
    let n = w.n();
    let inner_tol = Tolerance::new(1e-14, 1e-10);
    let along_ray = |dir: &[f64]| -> Result<f64> {
        let Some((a, b)) = ray_interval(w, lambda, eps, x, dir) else {
            return Ok(0.0);
        };
        let f = |s: f64| {
            let mut g = moll.density(s) * s.powi(n as i32 - 1);
            for i in 0..w.weighted {
                g *= (x[i] - eps * s * dir[i]).max(0.0).powi(w.exponent(i) as i32);
            }
            g
        };
        Ok(integrate(f, a, b, inner_tol)?.value)
    };
    let outer_tol = Tolerance::new(1e-13, 1e-9);
    // the bump is flat near s = 1, so the integrands are smooth in the angles
    // except where a ray becomes tangent to the ball or crosses a face
    match n {
        1 => Ok(along_ray(&[1.0])? + along_ray(&[-1.0])?),
        2 => angular(|t: f64| along_ray(&[t.cos(), t.sin()]), 0.0, 2.0 * PI, outer_tol),
        3 => angular(
            |phi: f64| {
                angular(
                    |z: f64| {
                        let rho = (1.0 - z * z).max(0.0).sqrt();
                        along_ray(&[rho * phi.cos(), rho * phi.sin(), z])
                    },
                    -1.0,
                    1.0,
                    Tolerance::new(1e-13, 1e-9),
                )
            },
            0.0,
            2.0 * PI,
            outer_tol,
        ),
        _ => invalid(format!("swapped mollified count supports n <= 3, got {n}")),
    }
}

/// Adaptive quadrature of a fallible integrand.
fn angular<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut failure: Option<WeylError> = None;
    let v = integrate(
        |t: f64| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        tol,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(v.value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::weighted_count;

    #[test]
    fn bump_has_unit_mass() {
        for n in 1..=4 {
            let m = Mollifier::new(n).unwrap();
            assert!((m.radial_moment(0).unwrap() - 1.0).abs() < 1e-12, "n={n}");
            assert_eq!(m.density(1.0), 0.0);
            assert!(m.density(0.3) > 0.0);
        }
        assert!(Mollifier::new(5).is_err());
    }

    #[test]
    fn cap_fraction_endpoints_and_symmetry() {
        for n in 1..=4 {
            assert_eq!(cap_fraction(n, -1.0), 1.0);
            assert_eq!(cap_fraction(n, 1.0), 0.0);
            assert!((cap_fraction(n, 0.0) - 0.5).abs() < 1e-15);
            for &t in &[0.1, 0.4, 0.9] {
                assert!((cap_fraction(n, t) + cap_fraction(n, -t) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn convolution_is_one_inside_and_zero_outside() {
        let m = Mollifier::new(2).unwrap();
        assert_eq!(m.ball_convolution(5.0, 0.5, 4.4).unwrap(), 1.0);
        assert_eq!(m.ball_convolution(5.0, 0.5, 5.6).unwrap(), 0.0);
        let mid = m.ball_convolution(5.0, 0.5, 5.0).unwrap();
        assert!(mid > 0.4 && mid < 0.5, "{mid}");
    }

    #[test]
    fn one_dimensional_convolution_matches_mass() {
        // in 1D the convolution at r is the mass of ρ in [(r-λ)/ε, 1]
        let m = Mollifier::new(1).unwrap();
        let (lam, eps) = (3.0, 0.4);
        for &r in &[2.7, 2.95, 3.0, 3.2] {
            let t = (r - lam) / eps;
            let tail =
                if t >= 0.0 { 0.5 * (1.0 - m.mass_within(t).unwrap()) } else { 0.5 + 0.5 * m.mass_within(-t).unwrap() };
            let v = m.ball_convolution(lam, eps, r).unwrap();
            assert!((v - tail).abs() < 1e-12, "r={r}: {v} vs {tail}");
        }
    }

    #[test]
    fn profile_interpolation_is_accurate() {
        for n in [1usize, 2, 3] {
            let m = Mollifier::new(n).unwrap();
            let spec = MollifierSpec::new(0.3).unwrap();
            let p = m.profile(7.0, &spec).unwrap();
            for j in 0..200 {
                let r = 6.7 + 0.6 * (j as f64 + 0.37) / 200.0;
                let direct = m.ball_convolution(7.0, 0.3, r).unwrap();
                assert!((p.eval(r) - direct).abs() < 1e-9, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn sandwich_on_small_grid() {
        let w = WeightSpec::sphere_circle(&[2], 1).unwrap();
        for &lam in &[3.0, 5.5, 8.25] {
            let spec = MollifierSpec::new(0.4).unwrap();
            let lower = mollified_count(&w, lam - 0.4, &spec).unwrap();
            let upper = mollified_count(&w, lam + 0.4, &spec).unwrap();
            let exact = weighted_count(&w, lam).unwrap().value;
            assert!(sandwich_holds(&lower, exact, &upper), "lambda {lam}");
        }
    }

    #[test]
    fn swapped_agrees_for_unit_weight() {
        let w = WeightSpec::unweighted(2);
        let spec = MollifierSpec::new(0.35).unwrap();
        for &lam in &[2.0, 4.3] {
            let a = mollified_count(&w, lam, &spec).unwrap().value;
            let b = mollified_count_swapped(&w, lam, &spec).unwrap();
            assert!((a - b).abs() < 1e-7 * a, "lambda {lam}: {a} vs {b}");
        }
    }

    #[test]
    fn moment_expansion_matches_quadrature() {
        let w = WeightSpec::new(vec![3, 2], 2, vec![num_rational::Rational64::from_integer(0); 2]).unwrap();
        let m = Mollifier::new(2).unwrap();
        let table = MomentTable::new(&m, &w).unwrap();
        let x = [2.3, 1.7];
        let a = table.expand(&w, &x, 0.5);
        let b = smoothed_weight(&m, &w, 10.0, 0.5, &x).unwrap();
        assert!((a - b).abs() < 1e-9 * a, "{a} vs {b}");
    }
}
