//! Cluster-index lattice sums approximating the counting function.
//!
//! `N̂(λ)` sums the cluster populations `Π w_i(m_i)` over indices with
//! `|m+y| ≤ λ`. `N̂₁` drops indices below a cutoff `M`, `N̂₂` replaces each
//! population by its leading monomial `C_i (m_i+y_i)^{d_i-1}`, and `N̂₃`
//! extends that monomial sum to every shifted lattice point in the orthant.

use super::ProductSpec;
use crate::error::{invalid, Result, WeylError};
use crate::lattice::enumerate::{max_index, weighted_sum, AxisWeights};
use crate::lattice::{weighted_count, ShiftedLattice};
use crate::spectra::{biguint_to_u128, sphere_multiplicity, FactorSpec};

#[derive(Clone, Copy)]
enum Weights {
    Population,
    Monomial,
}

fn lattice_from(spec: &ProductSpec, cutoff: i64) -> ShiftedLattice {
    let lower = spec.factors().iter().map(|f| (!matches!(f, FactorSpec::Circle)).then_some(cutoff)).collect();
    ShiftedLattice::new(&spec.shift(), lower)
}

fn axis_weights(spec: &ProductSpec, lattice: &ShiftedLattice, hi: i64, kind: Weights) -> Result<Vec<AxisWeights>> {
    spec.factors()
        .iter()
        .enumerate()
        .map(|(axis, f)| {
            if matches!(f, FactorSpec::Circle) {
                return Ok(AxisWeights::unit());
            }
            let first = lattice.lower()[axis].expect("cluster axes are bounded below");
            let last = max_index(lattice, axis, hi).max(first - 1);
            let table = (first..=last)
                .map(|m| -> Result<u128> {
                    match (kind, f) {
                        (Weights::Monomial, _) => {
                            let x = lattice.scaled(axis, m) as u128;
                            x.checked_pow(f.dim() - 1).ok_or(WeylError::Overflow)
                        }
                        (Weights::Population, FactorSpec::Sphere { dim }) => {
                            biguint_to_u128(&sphere_multiplicity(*dim, m as u64)).ok_or(WeylError::Overflow)
                        }
                        (Weights::Population, FactorSpec::Zoll(z)) => {
                            Ok(if m == 0 { z.low_lying.len() as u128 } else { z.population(m as u64) as u128 })
                        }
                        (Weights::Population, FactorSpec::Circle) => unreachable!(),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            AxisWeights::table(first, table)
        })
        .collect()
}

fn population_sum(spec: &ProductSpec, lo_radius: Option<f64>, lambda: f64, cutoff: i64) -> Result<u128> {
    let lattice = lattice_from(spec, cutoff);
    let hi = lattice.budget(lambda);
    let lo = lo_radius.map_or(-1, |r| lattice.budget(r));
    let weights = axis_weights(spec, &lattice, hi, Weights::Population)?;
    weighted_sum(&lattice, &weights, lo, hi)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) {
        return invalid(format!("lambda must be non-negative, got {lambda}"));
    }
    Ok(())
}

/// `Σ_{m ∈ Z_{≥0}^k × Z^{n-k}, |m+y| ≤ λ} Π w_i(m_i)`, with `w` the sphere
/// multiplicity, the Zoll cluster population (low-lying count at `m = 0`),
/// or 1 on circles.
pub fn nhat(spec: &ProductSpec, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(population_sum(spec, None, lambda, 0)? as f64)
}

/// [`nhat`] restricted to `m_i ≥ cutoff` on the cluster axes.
pub fn nhat1(spec: &ProductSpec, lambda: f64, cutoff: i64) -> Result<f64> {
    check_lambda(lambda)?;
    if cutoff < 1 {
        return invalid(format!("cutoff must be at least 1, got {cutoff}"));
    }
    Ok(population_sum(spec, None, lambda, cutoff)? as f64)
}

/// `Π C_i · Σ_{m_i ≥ cutoff, |m+y| ≤ λ} Π (m_i+y_i)^{d_i-1}`.
pub fn nhat2(spec: &ProductSpec, lambda: f64, cutoff: i64) -> Result<f64> {
    check_lambda(lambda)?;
    if cutoff < 1 {
        return invalid(format!("cutoff must be at least 1, got {cutoff}"));
    }
    let lattice = lattice_from(spec, cutoff);
    let hi = lattice.budget(lambda);
    let weights = axis_weights(spec, &lattice, hi, Weights::Monomial)?;
    let numerator = weighted_sum(&lattice, &weights, -1, hi)?;
    let power: i32 = spec.dims()[..spec.k()].iter().map(|d| *d as i32 - 1).sum();
    let denominator = (lattice.scale() as f64).powi(power);
    Ok(spec.leading_product() * numerator as f64 / denominator)
}

/// `Π C_i ·` the weighted orthant count of the product's lattice model.
pub fn nhat3(spec: &ProductSpec, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(spec.leading_product() * weighted_count(&spec.weight_spec(), lambda)?.value)
}

/// `N̂(λ) - N̂(λ - c/λ)`: populations with `λ - c/λ < |m+y| ≤ λ`.
pub fn nhat_annulus_diff(spec: &ProductSpec, lambda: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) || !(lambda * lambda > c) {
        return invalid(format!("annulus difference needs c > 0 and lambda > sqrt(c), got {lambda}, {c}"));
    }
    Ok(population_sum(spec, Some(lambda - c / lambda), lambda, 0)? as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{PlacementRule, ZollModel};
    use num_rational::Rational64;

    fn s2() -> ProductSpec {
        ProductSpec::new(vec![FactorSpec::Sphere { dim: 2 }]).unwrap()
    }

    #[test]
    fn sphere_weight_examples() {
        assert_eq!(nhat(&s2(), 10.5).unwrap(), 121.0);
        // annulus (10, 10.5] holds only m = 10
        assert_eq!(nhat_annulus_diff(&s2(), 10.5, 10.5 * 0.5).unwrap(), 21.0);
        assert_eq!(nhat_annulus_diff(&s2(), 10.2, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn chain_orderings() {
        let spec = ProductSpec::new(vec![FactorSpec::Sphere { dim: 2 }, FactorSpec::Circle]).unwrap();
        for &lam in &[5.0, 17.3, 40.0] {
            let n0 = nhat(&spec, lam).unwrap();
            let n1 = nhat1(&spec, lam, 3).unwrap();
            let n2 = nhat2(&spec, lam, 3).unwrap();
            let n3 = nhat3(&spec, lam).unwrap();
            assert!(n0 >= n1);
            assert!(n3 >= n2);
            // P(t) = 2t on S², so population and leading monomial coincide
            assert!((n1 - n2).abs() < 1e-9 * n1);
        }
    }

    #[test]
    fn monomial_sum_matches_brute_force() {
        let spec = ProductSpec::new(vec![FactorSpec::Sphere { dim: 3 }, FactorSpec::Sphere { dim: 2 }]).unwrap();
        let lam = 9.3;
        let mut brute = 0.0;
        for a in 2i64..20 {
            for b in 2i64..20 {
                let (x, y) = (a as f64 + 1.0, b as f64 + 0.5);
                if x * x + y * y <= lam * lam {
                    brute += x * x * y;
                }
            }
        }
        // C = 2/2! = 1 for S³ and 2 for S²
        let got = nhat2(&spec, lam, 2).unwrap();
        assert!((got - 2.0 * brute).abs() < 1e-9 * got, "{got} vs {}", 2.0 * brute);
    }

    #[test]
    fn zoll_populations_and_low_lying() {
        let z = ZollModel {
            dim: 2,
            alpha: Rational64::from_integer(2),
            leading: 2.0,
            c_width: 0.3,
            correction: 0.6,
            placement: PlacementRule::AtCenter,
            seed: 3,
            low_lying: vec![0.0, 0.2],
        };
        let spec = ProductSpec::new(vec![FactorSpec::Zoll(z.clone())]).unwrap();
        let want: u128 = 2 + (1..=7).map(|k| z.population(k) as u128).sum::<u128>();
        assert_eq!(nhat(&spec, 7.5).unwrap(), want as f64);
    }

    #[test]
    fn invalid_arguments() {
        assert!(nhat1(&s2(), 3.0, 0).is_err());
        assert!(nhat_annulus_diff(&s2(), 1.0, 2.0).is_err());
        assert!(nhat(&s2(), -1.0).is_err());
    }
}
