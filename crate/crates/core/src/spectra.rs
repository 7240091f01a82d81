//! Spectra of the model factors: round spheres, the circle, and synthetic
//! Zoll cluster models.
//!
//! A Zoll model of dimension `d` with Maslov index `α` has its `k`-th
//! cluster centred at `t = k + α/4` with half-width `c_width / k`, holding
//! `round(C t^{d-1} + e(t))` eigenvalues where `|e(t)| ≤ correction · t^{d-3}`.

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlacementRule {
    AtCenter,
    Equispaced,
    SeededUniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZollModel {
    pub dim: u32,
    pub alpha: Rational64,
    /// Leading coefficient `C` of the cluster-count polynomial.
    pub leading: f64,
    pub c_width: f64,
    pub correction: f64,
    pub placement: PlacementRule,
    pub seed: u64,
    /// Low-lying eigenvalues below the first generated cluster, counted verbatim.
    pub low_lying: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactorSpec {
    Sphere { dim: u32 },
    Circle,
    Zoll(ZollModel),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub k: u64,
    pub center: f64,
    pub half_width: f64,
    pub population: u64,
    pub eigenvalues: Vec<f64>,
}

impl Cluster {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }
}

impl FactorSpec {
    pub fn dim(&self) -> u32 {
        match self {
            FactorSpec::Sphere { dim } => *dim,
            FactorSpec::Circle => 1,
            FactorSpec::Zoll(z) => z.dim,
        }
    }

    /// Maslov index; `2(d-1)` for the round sphere.
    pub fn maslov(&self) -> Rational64 {
        match self {
            FactorSpec::Sphere { dim } => Rational64::from_integer(2 * (*dim as i64 - 1)),
            FactorSpec::Circle => Rational64::zero(),
            FactorSpec::Zoll(z) => z.alpha,
        }
    }

    /// Cluster-center shift `α/4`.
    pub fn shift(&self) -> Rational64 {
        self.maslov() / Rational64::from_integer(4)
    }

    /// Leading coefficient of the cluster-count polynomial in `t`.
    pub fn leading_coefficient(&self) -> f64 {
        match self {
            FactorSpec::Sphere { dim } => 2.0 / factorial_f64(dim - 1),
            FactorSpec::Circle => 1.0,
            FactorSpec::Zoll(z) => z.leading,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FactorSpec::Sphere { dim } if *dim < 2 => {
                invalid(format!("sphere dimension must be at least 2, got {dim}"))
            }
            FactorSpec::Zoll(z) => z.validate(),
            _ => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FactorSpec::Sphere { dim } => format!("S^{dim}"),
            FactorSpec::Circle => "S^1".to_string(),
            FactorSpec::Zoll(z) => format!("Z^{}(alpha={})", z.dim, z.alpha),
        }
    }
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl ZollModel {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return invalid(format!(
                "Zoll model dimension must be at least 2 (use a circle for dimension 1), got {}",
                self.dim
            ));
        }
        if self.alpha < Rational64::zero() {
            return invalid("Maslov index must be nonnegative");
        }
        if !(self.leading > 0.0 && self.leading.is_finite()) {
            return invalid("leading coefficient C must be positive");
        }
        if !(self.c_width > 0.0) {
            return invalid("cluster width constant must be positive");
        }
        if self.c_width >= self.shift_f64() + 1.0 {
            return invalid("cluster width constant must be below 1 + alpha/4 so cluster 1 stays positive");
        }
        if !(self.correction >= 0.0) {
            return invalid("correction bound must be nonnegative");
        }
        if self.low_lying.iter().any(|v| !(*v >= 0.0)) {
            return invalid("low-lying eigenvalues must be nonnegative");
        }
        Ok(())
    }

    pub fn shift_f64(&self) -> f64 {
        rational_to_f64(self.alpha) / 4.0
    }

    pub fn center(&self, k: u64) -> f64 {
        k as f64 + self.shift_f64()
    }

    pub fn half_width(&self, k: u64) -> f64 {
        self.c_width / k as f64
    }

    fn rng(&self, k: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(k)));
        rng.set_stream(stream);
        rng
    }

    /// Correction term `e(t)`, uniform in `±correction · t^{d-3}`.
    pub fn correction_term(&self, k: u64) -> f64 {
        if self.correction == 0.0 {
            return 0.0;
        }
        let t = self.center(k);
        let u: f64 = self.rng(k, 0).gen_range(-1.0..=1.0);
        self.correction * t.powi(self.dim as i32 - 3) * u
    }

    /// Number of eigenvalues in cluster `k ≥ 1`, rounded half-to-even.
    pub fn population(&self, k: u64) -> u64 {
        let t = self.center(k);
        let raw = self.leading * t.powi(self.dim as i32 - 1) + self.correction_term(k);
        raw.round_ties_even().max(0.0) as u64
    }

    pub fn cluster(&self, k: u64) -> Cluster {
        let center = self.center(k);
        let half_width = self.half_width(k);
        let population = self.population(k);
        let p = population as usize;
        let mut eigenvalues = match self.placement {
            PlacementRule::AtCenter => vec![center; p],
            PlacementRule::Equispaced => {
                (0..p).map(|j| center - half_width + half_width * (2 * j + 1) as f64 / p as f64).collect()
            }
            PlacementRule::SeededUniform => {
                let mut rng = self.rng(k, 1);
                (0..p).map(|_| rng.gen_range(center - half_width..=center + half_width)).collect()
            }
        };
        eigenvalues.sort_by(f64::total_cmp);
        Cluster { k, center, half_width, population, eigenvalues }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rational_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `√(k(k+d-1))`, the `k`-th distinct eigenvalue of `√(-Δ)` on `S^d`.
pub fn sphere_eigenvalue(d: u32, k: u64) -> f64 {
    ((k * (k + d as u64 - 1)) as f64).sqrt()
}

fn binom_big(n: i64, k: u32) -> BigUint {
    if n < k as i64 || n < 0 {
        return BigUint::zero();
    }
    binomial(BigUint::from(n as u64), BigUint::from(k))
}

/// Multiplicity `C(d+k, d) - C(d+k-2, d)` of the `k`-th sphere eigenvalue.
pub fn sphere_multiplicity(d: u32, k: u64) -> BigUint {
    let n = d as i64 + k as i64;
    binom_big(n, d) - binom_big(n - 2, d)
}

/// `P_{S^d}(k + (d-1)/2) = (2/(d-1)!) (k + (d-1)/2) (k+d-2)!/k!` as an exact
/// rational, defined for `k ≥ 2`.
pub fn sphere_cluster_poly(d: u32, k: u64) -> Result<BigRational> {
    if k < 2 {
        return invalid(format!("cluster polynomial is stated for k >= 2, got k = {k}"));
    }
    if d < 2 {
        return invalid(format!("sphere dimension must be at least 2, got {d}"));
    }
    let mut falling = BigUint::one();
    for j in (k + 1)..=(k + d as u64 - 2) {
        falling *= BigUint::from(j);
    }
    let mut fact = BigUint::one();
    for j in 1..d as u64 {
        fact *= BigUint::from(j);
    }
    let t = BigRational::new((2 * k + d as u64 - 1).into(), 2u32.into());
    let two = BigRational::from_integer(2u32.into());
    Ok(two / BigRational::from_integer(fact.into()) * t * BigRational::from_integer(falling.into()))
}

/// One distinct eigenvalue level of an exactly solvable factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level {
    pub index: u64,
    /// Squared eigenvalue of `√(-Δ)`, an integer for spheres and circles.
    pub eigenvalue_sq: u64,
    pub multiplicity: u128,
}

/// Sphere levels with `k(k+d-1) ≤ max_sq`. Multiplicities come from the
/// dimension of degree-`k` spherical harmonics,
/// `(2k+d-1)/(d-1) · C(k+d-2, k)`, evaluated in 128-bit arithmetic.
pub fn sphere_levels(d: u32, max_sq: u64) -> Vec<Level> {
    let d64 = d as u64;
    let mut out = Vec::new();
    // running C(k+d-2, k)
    let mut c: u128 = 1;
    let mut k = 0u64;
    loop {
        let sq = k * (k + d64 - 1);
        if sq > max_sq {
            break;
        }
        let mult = c * (2 * k + d64 - 1) as u128 / (d64 - 1) as u128;
        out.push(Level { index: k, eigenvalue_sq: sq, multiplicity: mult });
        k += 1;
        c = c * (k + d64 - 2) as u128 / k as u128;
    }
    out
}

/// Circle levels `j ≥ 0` with `j² ≤ max_sq`; `±j` give multiplicity 2.
pub fn circle_levels(max_sq: u64) -> Vec<Level> {
    (0u64..)
        .take_while(|j| j * j <= max_sq)
        .map(|j| Level { index: j, eigenvalue_sq: j * j, multiplicity: if j == 0 { 1 } else { 2 } })
        .collect()
}

/// Clusters `k = 1..=k_max` of a Zoll model.
pub fn zoll_clusters(model: &ZollModel, k_max: u64) -> Vec<Cluster> {
    (1..=k_max).map(|k| model.cluster(k)).collect()
}

/// `#{m ∈ Z^dim : |m| ≤ λ}` by nested integer square roots.
pub fn torus_spectrum_count(dim: u32, lambda: f64) -> u128 {
    if lambda < 0.0 {
        return 0;
    }
    let budget = crate::numeric::norm_budget(lambda);
    fn rec(dim: u32, budget: i64) -> u128 {
        let r = crate::numeric::isqrt(budget);
        if dim == 1 {
            return (2 * r + 1) as u128;
        }
        let mut total = rec(dim - 1, budget);
        for x in 1..=r {
            total += 2 * rec(dim - 1, budget - x * x);
        }
        total
    }
    rec(dim, budget)
}

pub(crate) fn biguint_to_u128(v: &BigUint) -> Option<u128> {
    v.to_u128()
}
