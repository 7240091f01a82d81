//! Numerical building blocks shared by the counting and Fourier modules.

pub mod interp;
pub mod quad;
pub mod special;
pub mod sum;

pub use sum::CompensatedSum;

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(v: i64) -> i64 {
    if v < 0 {
        return -1;
    }
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// `floor(a / b)` for `b > 0`.
pub fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// `ceil(a / b)` for `b > 0`.
pub fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// Largest integer `S` whose correctly rounded square root is at most `r`
/// (`-1` for negative `r`). A radius given as the float nearest `√n` thus
/// reaches norm `√n`, while the next float below it does not.
pub fn norm_budget(r: f64) -> i64 {
    if !(r >= 0.0) {
        return -1;
    }
    let mut s = (r * r).floor() as i64;
    while s >= 0 && (s as f64).sqrt() > r {
        s -= 1;
    }
    while ((s + 1) as f64).sqrt() <= r {
        s += 1;
    }
    s
}

/// Largest integer `S` whose correctly rounded square root is below `r`.
pub fn norm_budget_open(r: f64) -> i64 {
    if !(r > 0.0) {
        return -1;
    }
    let mut s = (r * r).ceil() as i64;
    while s >= 0 && (s as f64).sqrt() >= r {
        s -= 1;
    }
    while ((s + 1) as f64).sqrt() < r {
        s += 1;
    }
    s
}

/// Japanese bracket `(1 + x^2)^(1/2)`.
pub fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}
