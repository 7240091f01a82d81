//! Products of synthetic Zoll models and circles.
//!
//! Each factor's spectrum is split into bands: the clusters around
//! `k + α/4` (plus a band of low-lying eigenvalues at index 0), and single
//! points `|j|` for circles. A choice of one band per factor is a cube; cubes
//! entirely inside the ball form the interior part of the count and cubes
//! straddling the sphere form the boundary part.

use rayon::prelude::*;

use super::ProductSpec;
use crate::error::{invalid, Result, WeylError};
use crate::spectra::FactorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountBreakdown {
    /// Eigenvalues in cubes whose far corner lies in the ball.
    pub interior: u128,
    /// Eigenvalues `≤ λ` in cubes straddling the sphere.
    pub boundary: u128,
    /// Full population of the straddling cubes.
    pub boundary_upper: u128,
    /// Direct count over the flattened product spectrum.
    pub total: u128,
}

#[derive(Debug, Clone)]
struct Band {
    index: i64,
    lower: f64,
    upper: f64,
    /// Sorted squared eigenvalues.
    values_sq: Vec<f64>,
}

/// One product cube: per-factor band index and corner norms.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeModel {
    pub index: Vec<i64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub population: u128,
}

impl CubeModel {
    pub fn min_norm(&self) -> f64 {
        self.lower.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_norm(&self) -> f64 {
        self.upper.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// The product spectrum generated once up to a coverage radius.
#[derive(Debug, Clone)]
pub struct ZollProductSpectrum {
    spec: ProductSpec,
    coverage: f64,
    bands: Vec<Vec<Band>>,
    /// Per factor: distinct squared eigenvalues with multiplicities.
    flat: Vec<Vec<(f64, u64)>>,
}

impl ZollProductSpectrum {
    pub fn generate(spec: &ProductSpec, coverage: f64) -> Result<Self> {
        if !(coverage >= 0.0) || !coverage.is_finite() {
            return invalid(format!("coverage radius must be finite and non-negative, got {coverage}"));
        }
        let mut bands = Vec::with_capacity(spec.n());
        for f in spec.factors() {
            let mut list = Vec::new();
            match f {
                FactorSpec::Zoll(z) => {
                    if !z.low_lying.is_empty() {
                        let mut v: Vec<f64> = z.low_lying.clone();
                        v.sort_by(f64::total_cmp);
                        list.push(Band {
                            index: 0,
                            lower: v[0],
                            upper: v[v.len() - 1],
                            values_sq: v.iter().map(|x| x * x).collect(),
                        });
                    }
                    let k_max = (coverage - z.shift_f64() + z.c_width).floor().max(0.0) as u64 + 1;
                    for k in 1..=k_max {
                        let c = z.cluster(k);
                        if c.population == 0 {
                            continue;
                        }
                        list.push(Band {
                            index: k as i64,
                            lower: c.lower(),
                            upper: c.upper(),
                            values_sq: c.eigenvalues.iter().map(|x| x * x).collect(),
                        });
                    }
                }
                FactorSpec::Circle => {
                    let j_max = coverage.floor() as i64;
                    for j in -j_max..=j_max {
                        let a = j.unsigned_abs() as f64;
                        list.push(Band { index: j, lower: a, upper: a, values_sq: vec![a * a] });
                    }
                }
                FactorSpec::Sphere { .. } => {
                    return invalid("round spheres are counted exactly; use product_count_tensor");
                }
            }
            list.sort_by(|a, b| a.lower.total_cmp(&b.lower).then(a.index.cmp(&b.index)));
            bands.push(list);
        }
        let flat = bands
            .iter()
            .map(|list| {
                let mut all: Vec<f64> = list.iter().flat_map(|b| b.values_sq.iter().copied()).collect();
                all.sort_by(f64::total_cmp);
                let mut out: Vec<(f64, u64)> = Vec::new();
                for v in all {
                    match out.last_mut() {
                        Some((last, c)) if *last == v => *c += 1,
                        _ => out.push((v, 1)),
                    }
                }
                out
            })
            .collect();
        Ok(Self { spec: spec.clone(), coverage, bands, flat })
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn spec(&self) -> &ProductSpec {
        &self.spec
    }

    fn check_range(&self, lambda: f64) -> Result<()> {
        if !(lambda >= 0.0) {
            return invalid(format!("lambda must be non-negative, got {lambda}"));
        }
        if lambda > self.coverage {
            return Err(WeylError::OutOfRange { lambda, coverage: self.coverage });
        }
        Ok(())
    }

    /// Number of product eigenvalues `√(Σ λ_i²) ≤ λ`.
    pub fn total(&self, lambda: f64) -> Result<u128> {
        self.check_range(lambda)?;
        let lam_sq = lambda * lambda;
        let last = self.flat.last().expect("nonempty product");
        let mut cumulative = Vec::with_capacity(last.len());
        let mut acc = 0u128;
        for &(_, c) in last {
            acc += c as u128;
            cumulative.push(acc);
        }
        let tail = |rem: f64| -> u128 {
            let idx = last.partition_point(|&(v, _)| v <= rem);
            if idx == 0 {
                0
            } else {
                cumulative[idx - 1]
            }
        };
        fn rec(flat: &[Vec<(f64, u64)>], rem: f64, tail: &dyn Fn(f64) -> u128) -> u128 {
            if flat.len() == 1 {
                return tail(rem);
            }
            let mut total = 0;
            for &(v, c) in &flat[0] {
                if v > rem {
                    break;
                }
                total += c as u128 * rec(&flat[1..], rem - v, tail);
            }
            total
        }
        if self.flat.len() == 1 {
            return Ok(tail(lam_sq));
        }
        let parts: Vec<u128> = self.flat[0]
            .par_iter()
            .filter(|&&(v, _)| v <= lam_sq)
            .map(|&(v, c)| c as u128 * rec(&self.flat[1..], lam_sq - v, &tail))
            .collect();
        Ok(parts.into_iter().sum())
    }

    /// Interior/boundary split over cubes, plus the direct total.
    pub fn breakdown(&self, lambda: f64) -> Result<CountBreakdown> {
        self.check_range(lambda)?;
        let lam_sq = lambda * lambda;
        let parts: Vec<CountBreakdown> = self.bands[0]
            .par_iter()
            .filter(|b| b.lower * b.lower <= lam_sq)
            .map(|b| {
                let mut out = CountBreakdown::default();
                let mut chosen = vec![b];
                self.cubes(1, b.lower * b.lower, b.upper * b.upper, lam_sq, &mut chosen, &mut out);
                out
            })
            .collect();
        let mut out = CountBreakdown::default();
        for p in parts {
            out.interior += p.interior;
            out.boundary += p.boundary;
            out.boundary_upper += p.boundary_upper;
        }
        out.total = self.total(lambda)?;
        Ok(out)
    }

    fn cubes<'a>(
        &'a self,
        factor: usize,
        min_sq: f64,
        max_sq: f64,
        lam_sq: f64,
        chosen: &mut Vec<&'a Band>,
        out: &mut CountBreakdown,
    ) {
        if factor == self.bands.len() {
            let population: u128 = chosen.iter().map(|b| b.values_sq.len() as u128).product();
            if max_sq <= lam_sq {
                out.interior += population;
            } else {
                out.boundary_upper += population;
                out.boundary += count_in_cube(chosen, lam_sq);
            }
            return;
        }
        for b in &self.bands[factor] {
            let lo = min_sq + b.lower * b.lower;
            if lo > lam_sq {
                break;
            }
            chosen.push(b);
            self.cubes(factor + 1, lo, max_sq + b.upper * b.upper, lam_sq, chosen, out);
            chosen.pop();
        }
    }

    /// Cubes meeting the closed ball of radius `lambda`, in band order.
    pub fn cubes_meeting(&self, lambda: f64) -> Result<Vec<CubeModel>> {
        self.check_range(lambda)?;
        let lam_sq = lambda * lambda;
        let mut out = Vec::new();
        let mut chosen: Vec<&Band> = Vec::new();
        fn walk<'a>(
            bands: &'a [Vec<Band>],
            min_sq: f64,
            lam_sq: f64,
            chosen: &mut Vec<&'a Band>,
            out: &mut Vec<CubeModel>,
        ) {
            if chosen.len() == bands.len() {
                out.push(CubeModel {
                    index: chosen.iter().map(|b| b.index).collect(),
                    lower: chosen.iter().map(|b| b.lower).collect(),
                    upper: chosen.iter().map(|b| b.upper).collect(),
                    population: chosen.iter().map(|b| b.values_sq.len() as u128).product(),
                });
                return;
            }
            for b in &bands[chosen.len()] {
                let lo = min_sq + b.lower * b.lower;
                if lo > lam_sq {
                    break;
                }
                chosen.push(b);
                walk(bands, lo, lam_sq, chosen, out);
                chosen.pop();
            }
        }
        walk(&self.bands, 0.0, lam_sq, &mut chosen, &mut out);
        Ok(out)
    }
}

fn count_in_cube(bands: &[&Band], rem: f64) -> u128 {
    if bands.len() == 1 {
        return bands[0].values_sq.partition_point(|&v| v <= rem) as u128;
    }
    let mut total = 0;
    for &v in &bands[0].values_sq {
        if v > rem {
            break;
        }
        total += count_in_cube(&bands[1..], rem - v);
    }
    total
}

/// Generates the product spectrum up to `lambda` and splits its count.
pub fn zoll_product_count(spec: &ProductSpec, lambda: f64) -> Result<CountBreakdown> {
    ZollProductSpectrum::generate(spec, lambda)?.breakdown(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{PlacementRule, ZollModel};
    use num_rational::Rational64;

    fn model(placement: PlacementRule, correction: f64, low: Vec<f64>) -> ZollModel {
        ZollModel {
            dim: 2,
            alpha: Rational64::from_integer(2),
            leading: 2.0,
            c_width: 0.4,
            correction,
            placement,
            seed: 7,
            low_lying: low,
        }
    }

    #[test]
    fn single_factor_total_is_population_sum() {
        let z = model(PlacementRule::SeededUniform, 0.0, vec![]);
        let spec = ProductSpec::new(vec![FactorSpec::Zoll(z.clone())]).unwrap();
        // between the bands of clusters 6 and 7: centers 6.5, 7.5, width ≤ 0.4/6
        let b = zoll_product_count(&spec, 7.0).unwrap();
        let expect: u128 = (1..=6).map(|k| z.population(k) as u128).sum();
        assert_eq!(b.total, expect);
        assert_eq!(b.interior, expect);
        assert_eq!(b.boundary, 0);
        assert_eq!(zoll_product_count(&spec, 0.0).unwrap().total, 0);
    }

    #[test]
    fn breakdown_partitions_total() {
        for placement in [PlacementRule::AtCenter, PlacementRule::Equispaced, PlacementRule::SeededUniform] {
            let z = model(placement, 0.8, vec![0.0]);
            let spec =
                ProductSpec::new(vec![FactorSpec::Circle, FactorSpec::Zoll(z.clone()), FactorSpec::Zoll(z)]).unwrap();
            let s = ZollProductSpectrum::generate(&spec, 15.0).unwrap();
            for i in 0..30 {
                let lam = 0.5 * i as f64;
                let b = s.breakdown(lam).unwrap();
                assert_eq!(b.interior + b.boundary, b.total, "lambda {lam}");
                assert!(b.interior <= b.total && b.total <= b.interior + b.boundary_upper);
            }
        }
    }

    #[test]
    fn total_matches_brute_force() {
        let z = model(PlacementRule::SeededUniform, 0.5, vec![0.0, 0.9]);
        let spec = ProductSpec::new(vec![FactorSpec::Zoll(z.clone()), FactorSpec::Circle]).unwrap();
        let s = ZollProductSpectrum::generate(&spec, 9.0).unwrap();
        let mut evs: Vec<f64> = z.low_lying.clone();
        for k in 1..=12 {
            evs.extend(z.cluster(k).eigenvalues);
        }
        for &lam in &[0.5, 3.3, 6.0, 8.9] {
            let mut brute = 0u128;
            for &e in &evs {
                for j in -10i64..=10 {
                    if e * e + (j * j) as f64 <= lam * lam {
                        brute += 1;
                    }
                }
            }
            assert_eq!(s.total(lam).unwrap(), brute, "lambda {lam}");
        }
    }

    #[test]
    fn cubes_classify_by_corner_norms() {
        let z = model(PlacementRule::Equispaced, 0.0, vec![]);
        let spec = ProductSpec::new(vec![FactorSpec::Zoll(z), FactorSpec::Circle]).unwrap();
        let s = ZollProductSpectrum::generate(&spec, 12.0).unwrap();
        let lam = 10.0;
        let cubes = s.cubes_meeting(lam).unwrap();
        let inner: u128 = cubes.iter().filter(|c| c.max_norm() <= lam).map(|c| c.population).sum();
        let straddle: u128 = cubes.iter().filter(|c| c.max_norm() > lam).map(|c| c.population).sum();
        let b = s.breakdown(lam).unwrap();
        assert_eq!(inner, b.interior);
        assert_eq!(straddle, b.boundary_upper);
        assert!(cubes.iter().all(|c| c.min_norm() <= lam));
    }

    #[test]
    fn beyond_coverage_is_an_error() {
        let z = model(PlacementRule::AtCenter, 0.0, vec![]);
        let spec = ProductSpec::new(vec![FactorSpec::Zoll(z)]).unwrap();
        let s = ZollProductSpectrum::generate(&spec, 5.0).unwrap();
        assert!(matches!(s.total(5.5), Err(WeylError::OutOfRange { .. })));
        let sphere = ProductSpec::new(vec![FactorSpec::Sphere { dim: 2 }]).unwrap();
        assert!(ZollProductSpectrum::generate(&sphere, 3.0).is_err());
    }
}
