//! The frequency side of the mollified count.
//!
//! For `g = (χ_{λB} F) ∗ ρ_ε`, Poisson summation over `Z^n + y` gives
//! `Σ_x g(x) = Σ_m e^{2πi⟨y,m⟩} λ^{|d|} (χ_B F)^(λm) ρ̂(εm)`. The `m = 0` term
//! is the main term; the rest is summed over a cube `|m|_∞ ≤ R` with a
//! certified bound on what lies outside.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ball_chi_hat_radial, chi_f_hat, decay_ratio_sup, sample_radii};
use crate::error::{invalid, Result, WeylError};
use crate::lattice::{Mollifier, MollifierSpec, ShiftedLattice, WeightSpec};
use crate::numeric::quad::{integrate_pieces, Tolerance};
use crate::numeric::special::bessel_j;
use crate::numeric::{bracket, CompensatedSum};

/// `ρ̂(k)` for the radial bump, by the Hankel transform
/// `2π k^{1-n/2} ∫_0^1 ρ(s) J_{n/2-1}(2πks) s^{n/2} ds`.
pub fn rho_hat(moll: &Mollifier, k: f64) -> Result<f64> {
    let k = k.abs();
    if k == 0.0 {
        return moll.radial_moment(0);
    }
    let n = moll.dim() as i32;
    let half = n as f64 / 2.0;
    let pieces = (4.0 * k).ceil().max(1.0) as usize;
    let pts: Vec<f64> = (0..=pieces).map(|i| i as f64 / pieces as f64).collect();
    let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 2_000 };
    let v =
        integrate_pieces(|s: f64| moll.density(s) * bessel_j(n - 2, 2.0 * PI * k * s) * s.powf(half), &pts, tol)?.value;
    Ok(2.0 * PI * k.powf(1.0 - half) * v)
}

const DECAY_POWER: i32 = 6;

/// `sup |ρ̂(ξ)| ⟨ξ⟩^6` over `ξ ∈ [0, 60]`, cached per dimension.
pub fn rho_hat_decay_constant(n: usize) -> Result<f64> {
    static CACHE: [OnceLock<std::result::Result<f64, WeylError>>; 4] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    if !(1..=4).contains(&n) {
        return invalid(format!("mollifier supports dimensions 1..=4, got {n}"));
    }
    CACHE[n - 1]
        .get_or_init(|| {
            let moll = Mollifier::new(n)?;
            let samples: Vec<Result<f64>> = (0..=2400)
                .into_par_iter()
                .map(|i| {
                    let xi = i as f64 * 0.025;
                    Ok(rho_hat(&moll, xi)?.abs() * bracket(xi).powi(DECAY_POWER))
                })
                .collect();
            let mut sup: f64 = 0.0;
            for s in samples {
                sup = sup.max(s?);
            }
            Ok(sup)
        })
        .clone()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    /// Frequencies with `|m|_∞ ≤ radius` are summed explicitly.
    pub radius: f64,
    pub dyadic_levels: u32,
    pub tail_tolerance: f64,
}

impl TruncationSpec {
    /// `radius = 2^levels / ε`, the outer edge of the last dyadic shell.
    pub fn from_levels(epsilon: f64, levels: u32, tail_tolerance: f64) -> Self {
        Self { radius: 2f64.powi(levels as i32) / epsilon, dyadic_levels: levels, tail_tolerance }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius >= 1.0) || !(self.tail_tolerance > 0.0) {
            return invalid(format!(
                "truncation needs radius >= 1 and positive tail tolerance, got {} and {}",
                self.radius, self.tail_tolerance
            ));
        }
        Ok(())
    }

    pub fn cube_radius(&self) -> i64 {
        self.radius.floor() as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonSum {
    pub value: f64,
    pub imag: f64,
    pub abs_sum: f64,
    pub terms: u64,
    pub cube_radius: i64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSum {
    /// `-1` for the central cube `0 < |m|_∞ ≤ 1/ε`.
    pub level: i32,
    pub inner: i64,
    pub outer: i64,
    pub abs_sum: f64,
    pub signed_sum: f64,
}

/// Decay model `|(χ_B F)^(ξ)| ≤ K ⟨ξ⟩^{-a}` used by the tail bound.
#[derive(Debug, Clone, Copy)]
struct TransformDecay {
    k: f64,
    a: f64,
}

fn transform_decay(w: &WeightSpec) -> Result<TransformDecay> {
    let n = w.n();
    if w.weighted == 0 {
        let k = decay_ratio_sup(n, &sample_radii(1.0, 60.0, 6000))?;
        return Ok(TransformDecay { k, a: (n as f64 + 1.0) / 2.0 });
    }
    // faces of the orthant cost decay; a single power is enough to make
    // the tail sum converge against ⟨ξ⟩^{-6} from the mollifier
    let dirs = 16;
    let samples: Vec<(usize, usize)> = (0..dirs).flat_map(|d| (0..=116).map(move |i| (d, i))).collect();
    let vals: Vec<Result<f64>> = samples
        .into_par_iter()
        .map(|(d, i)| {
            let r = 1.0 + 0.25 * i as f64;
            let t = 2.0 * PI * d as f64 / dirs as f64;
            let xi: Vec<f64> = if n == 1 { vec![r * t.cos().signum()] } else { vec![r * t.cos(), r * t.sin()] };
            Ok(chi_f_hat(w, &xi)?.norm() * bracket(r))
        })
        .collect();
    let mut k: f64 = 0.0;
    for v in vals {
        k = k.max(v?);
    }
    Ok(TransformDecay { k, a: 1.0 })
}

/// Bound on `Σ_{|m|_∞ > R} λ^{|d|} |(χ_B F)^(λm)| |ρ̂(εm)|`, using
/// `|m| ≥ s` on the cube boundary `|m|_∞ = s`.
fn tail_bound(n: usize, lambda: f64, degree: u32, eps: f64, r: i64, decay: TransformDecay, c6: f64) -> f64 {
    let lam_deg = lambda.powi(degree as i32);
    let per_point = |s: f64| lam_deg * decay.k * (lambda * s).powf(-decay.a) * c6 * (eps * s).powi(-DECAY_POWER);
    let shell_count = |s: f64| (2.0 * s + 1.0).powi(n as i32) - (2.0 * s - 1.0).powi(n as i32);
    let end = (4 * r).max(r + 2000);
    let mut total = CompensatedSum::default();
    for s in (r + 1)..=end {
        let s = s as f64;
        total.add(shell_count(s) * per_point(s));
    }
    // integral tail with shell count ≤ 2n (3s)^{n-1}
    let e = end as f64;
    let power = n as f64 - decay.a - DECAY_POWER as f64;
    let coeff = 2.0
        * n as f64
        * 3f64.powi(n as i32 - 1)
        * lam_deg
        * decay.k
        * lambda.powf(-decay.a)
        * c6
        * eps.powi(-DECAY_POWER);
    total.add(coeff * e.powf(power) / -power);
    total.value()
}

fn cube_shell(n: usize, inner: i64, outer: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut m = vec![-outer; n];
    loop {
        if m.iter().map(|v| v.abs()).max().unwrap() > inner {
            out.push(m.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            m[i] += 1;
            if m[i] > outer {
                m[i] = -outer;
            } else {
                break;
            }
        }
    }
}

struct FrequencySide<'a> {
    w: &'a WeightSpec,
    lambda: f64,
    eps: f64,
    moll: Mollifier,
    lattice: ShiftedLattice,
}

impl<'a> FrequencySide<'a> {
    fn new(w: &'a WeightSpec, lambda: f64, spec: &MollifierSpec) -> Result<Self> {
        w.validate()?;
        spec.validate()?;
        let n = w.n();
        if w.weighted > 0 && n > 2 {
            return invalid(format!("weighted Poisson sums support n <= 2, got {n}"));
        }
        if n > 3 {
            return invalid(format!("Poisson sums support n <= 3, got {n}"));
        }
        if !(lambda > 0.0) {
            return invalid(format!("lambda must be positive, got {lambda}"));
        }
        Ok(Self {
            w,
            lambda,
            eps: spec.epsilon,
            moll: Mollifier::new(n)?,
            lattice: ShiftedLattice::new(&w.shift, vec![None; n]),
        })
    }

    /// `e^{2πi⟨y,m⟩}` with the exponent reduced exactly modulo 1.
    fn phase(&self, m: &[i64]) -> Complex64 {
        let l = self.lattice.scale();
        let num: i64 =
            m.iter().zip(self.lattice.offsets()).map(|(a, p)| (a * p).rem_euclid(l)).sum::<i64>().rem_euclid(l);
        if num == 0 {
            return Complex64::new(1.0, 0.0);
        }
        Complex64::from_polar(1.0, 2.0 * PI * num as f64 / l as f64)
    }

    /// Sum of the terms with `inner < |m|_∞ ≤ outer`, as (signed, abs).
    fn shell(&self, inner: i64, outer: i64) -> Result<(Complex64, f64, u64)> {
        let n = self.w.n();
        let points = cube_shell(n, inner, outer);
        let mut qs: Vec<i64> = points.iter().map(|m| m.iter().map(|v| v * v).sum()).collect();
        qs.sort_unstable();
        qs.dedup();
        let rho: Vec<Result<f64>> = qs.par_iter().map(|&q| rho_hat(&self.moll, self.eps * (q as f64).sqrt())).collect();
        let rho = rho.into_iter().collect::<Result<Vec<_>>>()?;
        let lam_deg = self.lambda.powi(self.w.total_degree() as i32);
        let radial: Option<Vec<Result<f64>>> = (self.w.weighted == 0)
            .then(|| qs.par_iter().map(|&q| ball_chi_hat_radial(n, self.lambda * (q as f64).sqrt())).collect());
        let radial = radial.map(|v| v.into_iter().collect::<Result<Vec<_>>>()).transpose()?;
        let terms: Vec<Result<Complex64>> = points
            .par_iter()
            .map(|m| {
                let q: i64 = m.iter().map(|v| v * v).sum();
                let idx = qs.binary_search(&q).expect("frequency norm was tabulated");
                let t = match &radial {
                    Some(r) => Complex64::new(r[idx], 0.0),
                    None => {
                        let xi: Vec<f64> = m.iter().map(|&v| self.lambda * v as f64).collect();
                        chi_f_hat(self.w, &xi)?
                    }
                };
                Ok(self.phase(m) * t * (lam_deg * rho[idx]))
            })
            .collect();
        let mut re = CompensatedSum::default();
        let mut im = CompensatedSum::default();
        let mut abs = CompensatedSum::default();
        for t in terms {
            let t = t?;
            re.add(t.re);
            im.add(t.im);
            abs.add(t.norm());
        }
        Ok((Complex64::new(re.value(), im.value()), abs.value(), points.len() as u64))
    }

    fn tail(&self, r: i64) -> Result<f64> {
        let decay = transform_decay(self.w)?;
        let c6 = rho_hat_decay_constant(self.w.n())?;
        Ok(tail_bound(self.w.n(), self.lambda, self.w.total_degree(), self.eps, r, decay, c6))
    }
}

/// `Σ_{0 < |m|_∞ ≤ R} e^{2πi⟨y,m⟩} λ^{|d|} (χ_B F)^(λm) ρ̂(εm)`.
pub fn poisson_error_sum(
    w: &WeightSpec,
    lambda: f64,
    spec: &MollifierSpec,
    trunc: &TruncationSpec,
) -> Result<PoissonSum> {
    trunc.validate()?;
    let side = FrequencySide::new(w, lambda, spec)?;
    let r = trunc.cube_radius();
    let tail_bound = side.tail(r)?;
    if tail_bound > trunc.tail_tolerance {
        return Err(WeylError::TailCertificate { bound: tail_bound, tolerance: trunc.tail_tolerance });
    }
    let (sum, abs_sum, terms) = side.shell(0, r)?;
    if sum.im.abs() > 1e-9 * abs_sum.max(1.0) {
        return Err(WeylError::Quadrature(format!(
            "Poisson sum has imaginary part {:e} against magnitude {:e}",
            sum.im, abs_sum
        )));
    }
    Ok(PoissonSum { value: sum.re, imag: sum.im, abs_sum, terms, cube_radius: r, tail_bound })
}

/// Central cube `0 < |m|_∞ ≤ 1/ε` followed by the dyadic shells
/// `2^j/ε < |m|_∞ ≤ 2^{j+1}/ε`, `j < levels`.
pub fn dyadic_sum_check(w: &WeightSpec, lambda: f64, spec: &MollifierSpec, levels: u32) -> Result<Vec<ShellSum>> {
    let side = FrequencySide::new(w, lambda, spec)?;
    let edge = |j: i32| (2f64.powi(j) / spec.epsilon).floor() as i64;
    let mut out = Vec::with_capacity(levels as usize + 1);
    for level in -1..levels as i32 {
        let (inner, outer) = if level < 0 { (0, edge(0)) } else { (edge(level), edge(level + 1)) };
        let (sum, abs_sum, _) = side.shell(inner, outer)?;
        out.push(ShellSum { level, inner, outer, abs_sum, signed_sum: sum.re });
    }
    Ok(out)
}
