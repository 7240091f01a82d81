//! Globally adaptive Gauss-Kronrod (10/21) quadrature for real and complex
//! integrands, plus fixed Gauss-Legendre rules.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Result, WeylError};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Values a quadrature rule can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_intervals: 20_000 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-12)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

fn gk21<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let k = kron * h;
    let g = gauss * h;
    (k, (k - g).magnitude())
}

/// Adaptive integration of `f` over `[a, b]`. Subdivides the interval with
/// the largest error estimate until the total estimate meets the tolerance.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Ok(QuadResult { value: T::zero(), error: 0.0, intervals: 0 });
    }
    let (v, e) = gk21(&mut f, a, b);
    let mut parts: Vec<(f64, f64, T, f64)> = vec![(a, b, v, e)];
    loop {
        let mut total = T::zero();
        let mut err = 0.0;
        let mut worst = 0;
        for (i, p) in parts.iter().enumerate() {
            total = total + p.2;
            err += p.3;
            if p.3 > parts[worst].3 {
                worst = i;
            }
        }
        let target = tol.abs.max(tol.rel * total.magnitude());
        if err <= target {
            return Ok(QuadResult { value: total, error: err, intervals: parts.len() });
        }
        if parts.len() >= tol.max_intervals {
            return Err(WeylError::Quadrature(format!(
                "error estimate {err:e} above target {target:e} on [{a}, {b}] after {} intervals",
                parts.len()
            )));
        }
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // interval collapsed to floating-point resolution; accept what we have
            return Ok(QuadResult { value: total, error: err, intervals: parts.len() + 1 });
        }
        let (v1, e1) = gk21(&mut f, lo, mid);
        let (v2, e2) = gk21(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Adaptive integration over consecutive pieces `[p0, p1], [p1, p2], ...`,
/// useful when the integrand has known kinks at the breakpoints.
pub fn integrate_pieces<T, F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut value = T::zero();
    let mut error = 0.0;
    let mut intervals = 0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = integrate(&mut f, w[0], w[1], tol)?;
        value = value + r.value;
        error += r.error;
        intervals += r.intervals;
    }
    Ok(QuadResult { value, error, intervals })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` via Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
