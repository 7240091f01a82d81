/// Cubic Hermite interpolant on a uniform grid with Fritsch-Carlson slope
/// limiting, so monotone data stays monotone between nodes.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Slopes come from fourth-order finite differences, then limited.
    pub fn new(x0: f64, x1: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        assert!(n >= 5, "need at least five nodes");
        let h = (x1 - x0) / (n - 1) as f64;
        let mut slopes = vec![0.0; n];
        for i in 0..n {
            slopes[i] = if i >= 2 && i + 2 < n {
                (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2]) / (12.0 * h)
            } else if i < 2 {
                (-25.0 * values[i] + 48.0 * values[i + 1] - 36.0 * values[i + 2] + 16.0 * values[i + 3]
                    - 3.0 * values[i + 4])
                    / (12.0 * h)
            } else {
                (25.0 * values[i] - 48.0 * values[i - 1] + 36.0 * values[i - 2] - 16.0 * values[i - 3]
                    + 3.0 * values[i - 4])
                    / (12.0 * h)
            };
        }
        for i in 0..n - 1 {
            let delta = (values[i + 1] - values[i]) / h;
            if delta == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            if slopes[i] * delta < 0.0 {
                slopes[i] = 0.0;
            }
            if slopes[i + 1] * delta < 0.0 {
                slopes[i + 1] = 0.0;
            }
            let a = slopes[i] / delta;
            let b = slopes[i + 1] / delta;
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                slopes[i] = t * a * delta;
                slopes[i + 1] = t * b * delta;
            }
        }
        Self { x0, h, values, slopes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let u = (x - self.x0) / self.h;
        if u <= 0.0 {
            return self.values[0];
        }
        if u >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = (u.floor() as usize).min(n - 2);
        let t = u - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i]
            + h10 * self.h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.h * self.slopes[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let n = 257;
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 / 256.0 * 3.0).cos()).collect();
        let m = MonotoneCubic::new(0.0, 3.0, vals);
        for k in 0..1000 {
            let x = 3.0 * k as f64 / 999.0;
            assert!((m.eval(x) - x.cos()).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn stays_monotone_on_step_data() {
        let vals: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { 0.0 }).collect();
        let m = MonotoneCubic::new(0.0, 19.0, vals);
        let mut prev = m.eval(0.0);
        for k in 1..=1900 {
            let v = m.eval(k as f64 / 100.0);
            assert!(v <= prev + 1e-15);
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
    }
}
