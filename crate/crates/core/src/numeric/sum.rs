use std::iter::Sum;
use std::ops::AddAssign;

/// Neumaier-compensated running sum. Reduction order is whatever order the
/// caller feeds values in, so callers fix that order for reproducibility.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, v: f64) {
        self.add(v);
    }
}

impl AddAssign<CompensatedSum> for CompensatedSum {
    fn add_assign(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let vals = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = vals.iter().sum();
        let comp: CompensatedSum = vals.iter().copied().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(comp.value(), 2.0);
    }
}
