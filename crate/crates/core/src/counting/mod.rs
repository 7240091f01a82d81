//! Weyl counting functions of product manifolds.
//!
//! Exact sphere/circle products are counted twice: by direct convolution of
//! factor spectra ([`product_count_tensor`]) and as a multiplicity-weighted
//! lattice sum over cluster indices ([`sphere_product_count`]).

pub mod nhat;
pub mod zoll;

use num_rational::Rational64;
use rayon::prelude::*;

use crate::error::{invalid, Result, WeylError};
use crate::lattice::enumerate::{max_index, weighted_sum, AxisWeights};
use crate::lattice::{main_term_constant, ShiftedLattice, WeightSpec};
use crate::numeric::norm_budget;
use crate::numeric::special::{ball_volume, round_sphere_volume};
use crate::spectra::{biguint_to_u128, circle_levels, sphere_levels, sphere_multiplicity, FactorSpec, Level};

pub use nhat::{nhat, nhat1, nhat2, nhat3, nhat_annulus_diff};
pub use zoll::{zoll_product_count, CountBreakdown, CubeModel, ZollProductSpectrum};

/// Factors reordered so that every factor of dimension at least two comes
/// before the circles.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpec {
    factors: Vec<FactorSpec>,
}

impl ProductSpec {
    pub fn new(factors: Vec<FactorSpec>) -> Result<Self> {
        if factors.is_empty() {
            return invalid("product needs at least one factor");
        }
        for f in &factors {
            f.validate()?;
        }
        let (mut big, circles): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| !matches!(f, FactorSpec::Circle));
        big.extend(circles);
        Ok(Self { factors: big })
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    /// Number of factors of dimension at least two.
    pub fn k(&self) -> usize {
        self.factors.iter().filter(|f| !matches!(f, FactorSpec::Circle)).count()
    }

    pub fn dims(&self) -> Vec<u32> {
        self.factors.iter().map(FactorSpec::dim).collect()
    }

    pub fn total_dim(&self) -> u32 {
        self.dims().iter().sum()
    }

    /// `(α_1/4, …, α_k/4, 0, …, 0)`.
    pub fn shift(&self) -> Vec<Rational64> {
        self.factors.iter().map(FactorSpec::shift).collect()
    }

    pub fn is_exact(&self) -> bool {
        self.factors.iter().all(|f| !matches!(f, FactorSpec::Zoll(_)))
    }

    pub fn weight_spec(&self) -> WeightSpec {
        WeightSpec { dims: self.dims(), weighted: self.k(), shift: self.shift() }
    }

    pub fn leading_product(&self) -> f64 {
        self.factors[..self.k()].iter().map(FactorSpec::leading_coefficient).product()
    }

    /// `Π C_i · ∫_B F`, the coefficient of `λ^{|d|}` in the counting function.
    pub fn main_coefficient(&self) -> f64 {
        self.leading_product() * main_term_constant(&self.weight_spec())
    }

    /// `|B_{|d|}| vol(M) / (2π)^{|d|}` for products of round spheres and
    /// unit circles. `None` when a factor is a synthetic model.
    pub fn geometric_coefficient(&self) -> Option<f64> {
        let mut vol = 1.0;
        for f in &self.factors {
            vol *= match f {
                FactorSpec::Sphere { dim } => round_sphere_volume(*dim),
                FactorSpec::Circle => 2.0 * std::f64::consts::PI,
                FactorSpec::Zoll(_) => return None,
            };
        }
        let d = self.total_dim();
        Some(ball_volume(d) * vol / (2.0 * std::f64::consts::PI).powi(d as i32))
    }

    pub fn describe(&self) -> String {
        self.factors.iter().map(FactorSpec::describe).collect::<Vec<_>>().join("x")
    }
}

fn exact_levels(f: &FactorSpec, max_sq: u64) -> Result<Vec<Level>> {
    match f {
        FactorSpec::Sphere { dim } => Ok(sphere_levels(*dim, max_sq)),
        FactorSpec::Circle => Ok(circle_levels(max_sq)),
        FactorSpec::Zoll(_) => invalid("synthetic Zoll factors have no exact level list; use zoll_product_count"),
    }
}

/// `N(λ) = Σ_{λ_1²+…+λ_n² ≤ λ²} Π μ_i(λ_i)` by recursion over the factor
/// spectra with a running budget.
pub fn product_count_tensor(spec: &ProductSpec, lambda: f64) -> Result<u128> {
    if !(lambda >= 0.0) {
        return invalid(format!("lambda must be non-negative, got {lambda}"));
    }
    let budget = norm_budget(lambda) as u64;
    let levels: Vec<Vec<Level>> = spec.factors().iter().map(|f| exact_levels(f, budget)).collect::<Result<_>>()?;
    let last = levels.last().expect("nonempty product");
    let mut cumulative = Vec::with_capacity(last.len());
    let mut acc = 0u128;
    for l in last {
        acc = acc.checked_add(l.multiplicity).ok_or(WeylError::Overflow)?;
        cumulative.push(acc);
    }
    let last_sq: Vec<u64> = last.iter().map(|l| l.eigenvalue_sq).collect();
    let tail = |rem: u64| -> u128 {
        let idx = last_sq.partition_point(|&s| s <= rem);
        if idx == 0 {
            0
        } else {
            cumulative[idx - 1]
        }
    };
    if levels.len() == 1 {
        return Ok(tail(budget));
    }
    fn rec(levels: &[Vec<Level>], rem: u64, tail: &dyn Fn(u64) -> u128) -> Option<u128> {
        if levels.len() == 1 {
            return Some(tail(rem));
        }
        let mut total = 0u128;
        for l in &levels[0] {
            if l.eigenvalue_sq > rem {
                break;
            }
            let inner = rec(&levels[1..], rem - l.eigenvalue_sq, tail)?;
            total = total.checked_add(l.multiplicity.checked_mul(inner)?)?;
        }
        Some(total)
    }
    let parts: Vec<Option<u128>> = levels[0]
        .par_iter()
        .filter(|l| l.eigenvalue_sq <= budget)
        .map(|l| {
            let inner = rec(&levels[1..], budget - l.eigenvalue_sq, &tail)?;
            l.multiplicity.checked_mul(inner)
        })
        .collect();
    parts.into_iter().try_fold(0u128, |acc, p| p.and_then(|v| acc.checked_add(v))).ok_or(WeylError::Overflow)
}

fn sphere_axis_weights(lattice: &ShiftedLattice, spec: &ProductSpec, hi: i64) -> Result<Vec<AxisWeights>> {
    spec.factors()
        .iter()
        .enumerate()
        .map(|(axis, f)| match f {
            FactorSpec::Sphere { dim } => {
                let last = max_index(lattice, axis, hi).max(-1);
                let table = (0..=last)
                    .map(|m| biguint_to_u128(&sphere_multiplicity(*dim, m as u64)).ok_or(WeylError::Overflow))
                    .collect::<Result<Vec<_>>>()?;
                AxisWeights::table(0, table)
            }
            FactorSpec::Circle => Ok(AxisWeights::unit()),
            FactorSpec::Zoll(_) => invalid("sphere_product_count needs round spheres and circles only"),
        })
        .collect()
}

/// The counting function as a lattice sum over cluster indices `m`:
/// `Σ Π μ_i(m_i)` over `m ∈ Z_{≥0}^k × Z^{n-k}`.
///
/// With `shifted_ball` the region is `|m+y|² ≤ λ² + |y|²`, which is exactly
/// `Σ m_i(m_i+d_i-1) + Σ m_j² ≤ λ²` and reproduces `N(λ)`. Without it the
/// region is the plain ball `|m+y| ≤ λ`.
pub fn sphere_product_count(spec: &ProductSpec, lambda: f64, shifted_ball: bool) -> Result<u128> {
    if !(lambda >= 0.0) {
        return invalid(format!("lambda must be non-negative, got {lambda}"));
    }
    let lower = spec.factors().iter().map(|f| (!matches!(f, FactorSpec::Circle)).then_some(0)).collect();
    let lattice = ShiftedLattice::new(&spec.shift(), lower);
    let mut hi = lattice.budget(lambda);
    if shifted_ball {
        hi += lattice.shift_norm_sq();
    }
    let weights = sphere_axis_weights(&lattice, spec, hi)?;
    weighted_sum(&lattice, &weights, -1, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn sphere(d: u32) -> FactorSpec {
        FactorSpec::Sphere { dim: d }
    }

    #[test]
    fn factors_are_reordered() {
        let p = ProductSpec::new(vec![FactorSpec::Circle, sphere(3), FactorSpec::Circle, sphere(2)]).unwrap();
        assert_eq!(p.dims(), vec![3, 2, 1, 1]);
        assert_eq!(p.k(), 2);
        assert_eq!(
            p.shift(),
            vec![Rational64::from_integer(1), Rational64::new(1, 2), Rational64::zero(), Rational64::zero()]
        );
        assert!(ProductSpec::new(vec![]).is_err());
        assert!(ProductSpec::new(vec![sphere(1)]).is_err());
    }

    #[test]
    fn tensor_examples() {
        let s2 = ProductSpec::new(vec![sphere(2)]).unwrap();
        assert_eq!(product_count_tensor(&s2, 10.0).unwrap(), 100);
        assert_eq!(product_count_tensor(&s2, 0.0).unwrap(), 1);
        let t2 = ProductSpec::new(vec![FactorSpec::Circle, FactorSpec::Circle]).unwrap();
        assert_eq!(product_count_tensor(&t2, 1.0).unwrap(), 5);
        let s3 = ProductSpec::new(vec![sphere(3)]).unwrap();
        assert_eq!(product_count_tensor(&s3, 3f64.sqrt()).unwrap(), 5);
    }

    #[test]
    fn lattice_route_examples() {
        let s2 = ProductSpec::new(vec![sphere(2)]).unwrap();
        assert_eq!(sphere_product_count(&s2, 10.0, true).unwrap(), 100);
        let s3 = ProductSpec::new(vec![sphere(3)]).unwrap();
        assert_eq!(sphere_product_count(&s3, 3f64.sqrt(), true).unwrap(), 5);
        // plain ball: m + 1/2 ≤ 10 keeps m ≤ 9
        assert_eq!(sphere_product_count(&s2, 10.0, false).unwrap(), 100);
        assert_eq!(sphere_product_count(&s2, 10.4, false).unwrap(), 100);
        assert_eq!(sphere_product_count(&s2, 10.5, false).unwrap(), 121);
    }

    #[test]
    fn two_routes_agree_on_mixed_products() {
        let specs = [
            vec![sphere(2), FactorSpec::Circle],
            vec![sphere(2), sphere(2)],
            vec![sphere(4), FactorSpec::Circle, FactorSpec::Circle],
            vec![sphere(3), sphere(2), FactorSpec::Circle],
        ];
        for factors in specs {
            let p = ProductSpec::new(factors).unwrap();
            for i in 0..=60 {
                let lam = 0.25 * i as f64;
                assert_eq!(
                    product_count_tensor(&p, lam).unwrap(),
                    sphere_product_count(&p, lam, true).unwrap(),
                    "{} at {lam}",
                    p.describe()
                );
            }
        }
    }

    #[test]
    fn coefficients_agree() {
        let s2s2 = ProductSpec::new(vec![sphere(2), sphere(2)]).unwrap();
        assert!((s2s2.main_coefficient() - 0.5).abs() < 1e-14);
        assert!((s2s2.geometric_coefficient().unwrap() - 0.5).abs() < 1e-14);
        let s2s1 = ProductSpec::new(vec![sphere(2), FactorSpec::Circle]).unwrap();
        assert!((s2s1.main_coefficient() - 4.0 / 3.0).abs() < 1e-14);
        for factors in [vec![sphere(3)], vec![sphere(4), FactorSpec::Circle], vec![FactorSpec::Circle; 3]] {
            let p = ProductSpec::new(factors).unwrap();
            let a = p.main_coefficient();
            let b = p.geometric_coefficient().unwrap();
            assert!((a - b).abs() < 1e-13 * b, "{}: {a} vs {b}", p.describe());
        }
    }

    #[test]
    fn rejects_zoll_in_exact_paths() {
        let z = crate::spectra::ZollModel {
            dim: 2,
            alpha: Rational64::from_integer(2),
            leading: 2.0,
            c_width: 0.5,
            correction: 0.0,
            placement: crate::spectra::PlacementRule::AtCenter,
            seed: 1,
            low_lying: vec![],
        };
        let p = ProductSpec::new(vec![FactorSpec::Zoll(z)]).unwrap();
        assert!(product_count_tensor(&p, 3.0).is_err());
        assert!(sphere_product_count(&p, 3.0, true).is_err());
        assert!(p.geometric_coefficient().is_none());
    }
}
