//! Weighted lattice counts in shifted balls.
//!
//! A [`WeightSpec`] fixes the dimensions `d_1..d_n`, how many leading
//! coordinates are weighted (`k`), and the shift `y`. The counted quantity is
//!
//! `Σ_{m ∈ Z^n, |m+y| ≤ λ} Π_{i<k} (m_i+y_i)_+^{d_i-1} 1[m_i+y_i ≥ 0]`,
//!
//! the lattice model of products of spheres and circles.

pub mod enumerate;
pub mod mollify;

use num_rational::Rational64;

use crate::error::{invalid, Result, WeylError};
use crate::numeric::ceil_div;
use crate::numeric::special::gamma_half;
pub use enumerate::ShiftedLattice;
use enumerate::{max_index, weighted_sum, AxisWeights};
pub use mollify::{mollified_count, mollified_count_swapped, sandwich_holds, Mollifier, MollifierSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub dims: Vec<u32>,
    pub weighted: usize,
    pub shift: Vec<Rational64>,
}

impl WeightSpec {
    pub fn new(dims: Vec<u32>, weighted: usize, shift: Vec<Rational64>) -> Result<Self> {
        let w = Self { dims, weighted, shift };
        w.validate()?;
        Ok(w)
    }

    /// Plain ball count in `R^n` with no shift.
    pub fn unweighted(n: usize) -> Self {
        Self { dims: vec![1; n], weighted: 0, shift: vec![Rational64::from_integer(0); n] }
    }

    /// Sphere dimensions first, then circles; shift `(d-1)/2` on spheres.
    pub fn sphere_circle(sphere_dims: &[u32], circles: usize) -> Result<Self> {
        let mut dims = sphere_dims.to_vec();
        dims.extend(std::iter::repeat_n(1, circles));
        let shift = dims.iter().map(|&d| Rational64::new(d as i64 - 1, 2)).collect();
        Self::new(dims, sphere_dims.len(), shift)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dims.len();
        if n == 0 {
            return invalid("weight spec needs at least one coordinate");
        }
        if self.shift.len() != n {
            return invalid(format!("shift has {} entries, expected {n}", self.shift.len()));
        }
        if self.weighted > n {
            return invalid(format!("{} weighted coordinates in dimension {n}", self.weighted));
        }
        for (i, &d) in self.dims.iter().enumerate() {
            if i < self.weighted && d < 2 {
                return invalid(format!("weighted coordinate {i} needs dimension >= 2, got {d}"));
            }
            if i >= self.weighted && d != 1 {
                return invalid(format!("unweighted coordinate {i} must have dimension 1, got {d}"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    /// Exponent on coordinate `i` (zero past the weighted block).
    pub fn exponent(&self, i: usize) -> u32 {
        if i < self.weighted {
            self.dims[i] - 1
        } else {
            0
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.dims.iter().sum()
    }

    pub fn lattice(&self) -> ShiftedLattice {
        let probe = ShiftedLattice::new(&self.shift, vec![None; self.n()]);
        let lower =
            (0..self.n()).map(|i| (i < self.weighted).then(|| ceil_div(-probe.offsets()[i], probe.scale()))).collect();
        probe.with_lower(lower)
    }

    /// Evaluates the weight `Π x_i^{p_i}` at a real point in the closed
    /// orthant.
    pub fn weight_at(&self, x: &[f64]) -> f64 {
        (0..self.weighted).map(|i| x[i].powi(self.exponent(i) as i32)).product()
    }

    pub fn describe(&self) -> String {
        let shift: Vec<String> = self.shift.iter().map(|y| y.to_string()).collect();
        format!("dims={:?} weighted={} shift=[{}]", self.dims, self.weighted, shift.join(","))
    }
}

/// Exact value of a weighted sum: `numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSum {
    pub numerator: u128,
    pub denominator: u128,
}

impl ExactSum {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedCount {
    pub lambda: f64,
    pub exact: ExactSum,
    pub value: f64,
    pub main_term: f64,
    pub error: f64,
}

fn monomial_weights(w: &WeightSpec, lattice: &ShiftedLattice, hi: i64) -> Result<Vec<AxisWeights>> {
    (0..w.n())
        .map(|i| {
            let p = w.exponent(i);
            if i >= w.weighted {
                return Ok(AxisWeights::unit());
            }
            let first = lattice.lower()[i].expect("weighted axes are bounded below");
            let last = max_index(lattice, i, hi).max(first - 1);
            let mut table = Vec::with_capacity((last - first + 1) as usize);
            for m in first..=last {
                let x = lattice.scaled(i, m) as u128;
                table.push(x.checked_pow(p).ok_or(WeylError::Overflow)?);
            }
            AxisWeights::table(first, table)
        })
        .collect()
}

/// Exact weighted sum over the shell `lo < L²|x|² ≤ hi` (budgets on the
/// scaled lattice of `w`).
pub fn weighted_sum_between(w: &WeightSpec, lo: i64, hi: i64) -> Result<ExactSum> {
    w.validate()?;
    let lattice = w.lattice();
    let weights = monomial_weights(w, &lattice, hi)?;
    let numerator = weighted_sum(&lattice, &weights, lo, hi)?;
    let power: u32 = (0..w.n()).map(|i| w.exponent(i)).sum();
    let denominator = (lattice.scale() as u128).checked_pow(power).ok_or(WeylError::Overflow)?;
    Ok(ExactSum { numerator, denominator })
}

/// Weighted count in the closed ball of radius `lambda`.
pub fn weighted_count(w: &WeightSpec, lambda: f64) -> Result<WeightedCount> {
    if !(lambda >= 0.0) {
        return invalid(format!("lambda must be non-negative, got {lambda}"));
    }
    let hi = w.lattice().budget(lambda);
    let exact = weighted_sum_between(w, -1, hi)?;
    let value = exact.value();
    let main_term = main_term_constant(w) * lambda.powi(w.total_degree() as i32);
    Ok(WeightedCount { lambda, exact, value, main_term, error: value - main_term })
}

/// Weighted sum over the annulus `λ ≤ |x| ≤ λ + c/λ`.
pub fn annulus_sum(w: &WeightSpec, lambda: f64, c: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(c > 0.0) {
        return invalid(format!("annulus needs lambda > 0 and c > 0, got {lambda}, {c}"));
    }
    let l = w.lattice();
    let lo = l.budget_open(lambda);
    let hi = l.budget(lambda + c / lambda);
    Ok(weighted_sum_between(w, lo, hi)?.value())
}

/// `∫_{B ∩ orthant} Π x_i^{d_i-1} dx` over the unit ball:
/// `2^{-k} π^{(n-k)/2} Π_{i<k} Γ(d_i/2) / Γ(1 + |d|/2)`.
pub fn main_term_constant(w: &WeightSpec) -> f64 {
    let n = w.n();
    let k = w.weighted;
    let mut c = 0.5f64.powi(k as i32) * std::f64::consts::PI.powf((n - k) as f64 / 2.0);
    for &d in &w.dims[..k] {
        c *= gamma_half(d);
    }
    c / gamma_half(w.total_degree() + 2)
}
