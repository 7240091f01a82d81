//! Enumeration of shifted lattice points inside balls and shells.
//!
//! Points are `x = m + y` with `m ∈ Z^n` and rational `y`. With `L` the
//! common denominator of `y`, every coordinate is carried as the integer
//! `X = L m + P` (`P = L y`), so `|x|² ≤ r²` becomes the exact integer test
//! `Σ X² ≤ ⌊L² r²⌋`.
//!
//! Work is split into slabs along the first coordinate. Slabs are processed
//! in parallel and returned in ascending order, so reductions done by the
//! caller are independent of the worker count.

use num_integer::Integer;
use num_rational::Rational64;
use rayon::prelude::*;

use crate::error::{Result, WeylError};
use crate::numeric::{ceil_div, floor_div, isqrt, norm_budget, norm_budget_open};

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedLattice {
    scale: i64,
    offsets: Vec<i64>,
    lower: Vec<Option<i64>>,
}

/// Range `[lo, hi]` of integer indices on one axis.
pub type IndexRange = (i64, i64);

impl ShiftedLattice {
    /// `lower[i]` bounds the integer index `m_i` from below when present.
    pub fn new(shift: &[Rational64], lower: Vec<Option<i64>>) -> Self {
        assert_eq!(shift.len(), lower.len());
        let scale = shift.iter().fold(1i64, |acc, y| acc.lcm(y.denom()));
        let offsets = shift.iter().map(|y| y.numer() * (scale / y.denom())).collect();
        Self { scale, offsets, lower }
    }

    pub fn dim(&self) -> usize {
        self.offsets.len()
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn lower(&self) -> &[Option<i64>] {
        &self.lower
    }

    pub fn with_lower(&self, lower: Vec<Option<i64>>) -> Self {
        Self { scale: self.scale, offsets: self.offsets.clone(), lower }
    }

    /// Scaled coordinate `X = L m + P` on `axis`.
    pub fn scaled(&self, axis: usize, m: i64) -> i64 {
        self.scale * m + self.offsets[axis]
    }

    /// Real coordinate `m + y` on `axis`.
    pub fn coordinate(&self, axis: usize, m: i64) -> f64 {
        self.scaled(axis, m) as f64 / self.scale as f64
    }

    /// Largest scaled squared norm `S` inside the closed ball of radius `r`
    /// (`√S ≤ L r` with correctly rounded roots); `-1` for negative radius.
    pub fn budget(&self, radius: f64) -> i64 {
        norm_budget(self.scale as f64 * radius)
    }

    /// Largest scaled squared norm strictly inside radius `r`.
    pub fn budget_open(&self, radius: f64) -> i64 {
        norm_budget_open(self.scale as f64 * radius)
    }

    /// `Σ P_i² = L² |y|²`.
    pub fn shift_norm_sq(&self) -> i64 {
        self.offsets.iter().map(|p| p * p).sum()
    }

    /// Index ranges on `axis` with `lo < X² ≤ hi` (no lower test when
    /// `lo < 0`), ascending.
    pub fn axis_ranges(&self, axis: usize, lo: i64, hi: i64) -> [Option<IndexRange>; 2] {
        if hi < 0 {
            return [None, None];
        }
        let s_hi = isqrt(hi);
        let to_index = |a: i64, b: i64| -> Option<IndexRange> {
            let p = self.offsets[axis];
            let mut j_lo = ceil_div(a - p, self.scale);
            let j_hi = floor_div(b - p, self.scale);
            if let Some(l) = self.lower[axis] {
                j_lo = j_lo.max(l);
            }
            (j_lo <= j_hi).then_some((j_lo, j_hi))
        };
        if lo < 0 {
            return [to_index(-s_hi, s_hi), None];
        }
        let s_lo = isqrt(lo) + 1;
        if s_lo > s_hi {
            return [None, None];
        }
        [to_index(-s_hi, -s_lo), to_index(s_lo, s_hi)]
    }

    /// First-axis indices whose slab can hold points with `Σ X² ≤ hi`.
    pub fn slabs(&self, hi: i64) -> Vec<i64> {
        if self.dim() == 1 {
            return vec![0];
        }
        let mut out = Vec::new();
        for r in self.axis_ranges(0, -1, hi).into_iter().flatten() {
            out.extend(r.0..=r.1);
        }
        out
    }

    /// Visits every row of slab `m0` for the shell `lo < Σ X² ≤ hi`.
    /// A row is a fixed prefix `m[0..n-1]` (with its partial `Σ X²`) plus an
    /// index range on the last axis. In one dimension the slab id is
    /// ignored and the prefix is empty.
    pub fn for_each_row<F>(&self, m0: i64, lo: i64, hi: i64, f: &mut F)
    where
        F: FnMut(&[i64], i64, IndexRange),
    {
        let n = self.dim();
        if n == 1 {
            for r in self.axis_ranges(0, lo, hi).into_iter().flatten() {
                f(&[], 0, r);
            }
            return;
        }
        let x0 = self.scaled(0, m0);
        let partial = x0 * x0;
        if partial > hi {
            return;
        }
        let mut prefix = vec![0i64; n - 1];
        prefix[0] = m0;
        self.rows_rec(1, &mut prefix, partial, lo, hi, f);
    }

    fn rows_rec<F>(&self, axis: usize, prefix: &mut Vec<i64>, partial: i64, lo: i64, hi: i64, f: &mut F)
    where
        F: FnMut(&[i64], i64, IndexRange),
    {
        let n = self.dim();
        if axis == n - 1 {
            let rem_lo = lo - partial;
            for r in self.axis_ranges(axis, rem_lo, hi - partial).into_iter().flatten() {
                f(prefix, partial, r);
            }
            return;
        }
        for r in self.axis_ranges(axis, -1, hi - partial).into_iter().flatten() {
            for m in r.0..=r.1 {
                let x = self.scaled(axis, m);
                prefix[axis] = m;
                self.rows_rec(axis + 1, prefix, partial + x * x, lo, hi, f);
            }
        }
    }

    /// Visits every point in the shell `lo < Σ X² ≤ hi` of slab `m0`,
    /// passing the full index vector and its `Σ X²`.
    pub fn for_each_point<F>(&self, m0: i64, lo: i64, hi: i64, f: &mut F)
    where
        F: FnMut(&[i64], i64),
    {
        let n = self.dim();
        let mut m = vec![0i64; n];
        self.for_each_row(m0, lo, hi, &mut |prefix, partial, (a, b)| {
            m[..n - 1].copy_from_slice(prefix);
            for j in a..=b {
                m[n - 1] = j;
                let x = self.scaled(n - 1, j);
                f(&m, partial + x * x);
            }
        });
    }

    /// Maps every slab of the shell through `per_slab` in parallel, returning
    /// the per-slab results in ascending slab order.
    pub fn par_map_slabs<T, F>(&self, hi: i64, per_slab: F) -> Vec<T>
    where
        T: Send,
        F: Fn(i64) -> T + Sync + Send,
    {
        self.slabs(hi).into_par_iter().map(per_slab).collect()
    }
}

/// Per-axis weight tables, indexed by `m - first`. `None` means weight 1.
#[derive(Debug, Clone)]
pub(crate) struct AxisWeights {
    pub first: i64,
    pub table: Option<Vec<u128>>,
    /// `prefix[i] = Σ table[..i]`
    prefix: Option<Vec<u128>>,
}

impl AxisWeights {
    pub fn unit() -> Self {
        Self { first: 0, table: None, prefix: None }
    }

    pub fn table(first: i64, table: Vec<u128>) -> Result<Self> {
        let mut prefix = Vec::with_capacity(table.len() + 1);
        let mut acc = 0u128;
        prefix.push(0);
        for &v in &table {
            acc = acc.checked_add(v).ok_or(WeylError::Overflow)?;
            prefix.push(acc);
        }
        Ok(Self { first, table: Some(table), prefix: Some(prefix) })
    }

    fn at(&self, m: i64) -> u128 {
        match &self.table {
            None => 1,
            Some(t) => {
                let i = m - self.first;
                if i < 0 || i as usize >= t.len() {
                    panic!("weight table on index {m} out of range (first {})", self.first);
                }
                t[i as usize]
            }
        }
    }

    fn range_sum(&self, (a, b): IndexRange) -> u128 {
        match &self.prefix {
            None => (b - a + 1) as u128,
            Some(p) => {
                let lo = (a - self.first) as usize;
                let hi = (b - self.first) as usize + 1;
                p[hi] - p[lo]
            }
        }
    }
}

/// Largest index on `axis` that can satisfy `X² ≤ hi`.
pub(crate) fn max_index(lattice: &ShiftedLattice, axis: usize, hi: i64) -> i64 {
    let s = isqrt(hi.max(0));
    floor_div(s - lattice.offsets()[axis], lattice.scale())
}

/// Exact `Σ Π w_i(m_i)` over the shell `lo < Σ X² ≤ hi`.
pub(crate) fn weighted_sum(lattice: &ShiftedLattice, weights: &[AxisWeights], lo: i64, hi: i64) -> Result<u128> {
    let n = lattice.dim();
    if hi < 0 {
        return Ok(0);
    }
    let parts: Vec<Result<u128>> = lattice.par_map_slabs(hi, |m0| {
        let mut acc: u128 = 0;
        let mut overflow = false;
        lattice.for_each_row(m0, lo, hi, &mut |prefix, _partial, range| {
            let mut w: u128 = 1;
            for (axis, &m) in prefix.iter().enumerate() {
                w = match w.checked_mul(weights[axis].at(m)) {
                    Some(v) => v,
                    None => {
                        overflow = true;
                        return;
                    }
                };
            }
            match w.checked_mul(weights[n - 1].range_sum(range)).and_then(|v| acc.checked_add(v)) {
                Some(v) => acc = v,
                None => overflow = true,
            }
        });
        if overflow {
            Err(WeylError::Overflow)
        } else {
            Ok(acc)
        }
    });
    let mut total: u128 = 0;
    for p in parts {
        total = total.checked_add(p?).ok_or(WeylError::Overflow)?;
    }
    Ok(total)
}
