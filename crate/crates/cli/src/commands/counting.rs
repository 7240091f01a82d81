use anyhow::Result;
use rayon::prelude::*;
use serde_json::json;
use weyl_core::analysis::{error_series, exponent_report};
use weyl_core::counting::{
    product_count_tensor, sphere_product_count, CountBreakdown, ProductSpec, ZollProductSpectrum,
};

use super::{fit_series, report_svg, series_csv, Outcome};
use crate::output::{num, to_json, Csv, OutDir};
use crate::settings::RunConfig;

enum Counter {
    Exact { spec: ProductSpec, shifted_ball: bool },
    Zoll(ZollProductSpectrum),
}

impl Counter {
    fn new(spec: ProductSpec, max_lambda: f64, shifted_ball: bool) -> Result<Self> {
        if spec.is_exact() {
            Ok(Counter::Exact { spec, shifted_ball })
        } else {
            Ok(Counter::Zoll(ZollProductSpectrum::generate(&spec, max_lambda)?))
        }
    }

    fn method(&self) -> &'static str {
        match self {
            Counter::Exact { shifted_ball: true, .. } => "shifted-ball",
            Counter::Exact { .. } => "tensor",
            Counter::Zoll(_) => "zoll-cubes",
        }
    }

    /// Interior/boundary split for Zoll products; exact products report only the total.
    fn count(&self, lambda: f64) -> weyl_core::Result<(u128, Option<CountBreakdown>)> {
        Ok(match self {
            Counter::Exact { spec, shifted_ball: true } => (sphere_product_count(spec, lambda, true)?, None),
            Counter::Exact { spec, .. } => (product_count_tensor(spec, lambda)?, None),
            Counter::Zoll(z) => {
                let b = z.breakdown(lambda)?;
                (b.total, Some(b))
            }
        })
    }
}

fn max_of(grid: &[f64]) -> f64 {
    grid[grid.len() - 1]
}

pub fn count(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let spec = cfg.product()?;
    let grid = cfg.grid()?;
    let counter = Counter::new(spec.clone(), max_of(grid), cfg.shifted_ball)?;
    let rows = grid.par_iter().map(|&l| counter.count(l).map(|c| (l, c))).collect::<weyl_core::Result<Vec<_>>>()?;

    let mut csv = Csv::new(&["lambda", "total", "interior", "boundary", "boundary_upper"]);
    let mut failures = Vec::new();
    for (l, (total, b)) in &rows {
        let cells = match b {
            Some(b) => {
                if !(b.interior <= b.total && b.total <= b.interior + b.boundary_upper) {
                    failures.push(format!(
                        "containment interior <= total <= interior + boundary_upper fails at lambda = {l}"
                    ));
                }
                vec![b.interior.to_string(), b.boundary.to_string(), b.boundary_upper.to_string()]
            }
            None => vec![String::new(); 3],
        };
        let mut row = vec![num(*l), total.to_string()];
        row.extend(cells);
        csv.push(row);
    }
    for pair in rows.windows(2) {
        if pair[1].1 .0 < pair[0].1 .0 {
            failures.push(format!("count decreases between lambda = {} and {}", pair[0].0, pair[1].0));
        }
    }
    let last = rows.last().map(|(l, (t, b))| {
        json!({
            "lambda": l,
            "total": t.to_string(),
            "interior": b.map(|b| b.interior.to_string()),
            "boundary": b.map(|b| b.boundary.to_string()),
            "boundary_upper": b.map(|b| b.boundary_upper.to_string()),
        })
    });
    out.write("count.csv", &csv.render())?;
    out.write(
        "count.json",
        &to_json(&json!({
            "provenance": cfg.provenance(),
            "spec": spec.describe(),
            "dims": spec.dims(),
            "shift": spec.shift().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "method": counter.method(),
            "rows": rows.len(),
            "breakdown": last,
            "failures": failures,
        }))?,
    )?;
    Ok(Outcome { failures })
}

pub fn weyl(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let spec = cfg.product()?;
    let grid = cfg.grid()?;
    let counter = Counter::new(spec.clone(), max_of(grid), cfg.shifted_ball)?;
    let coefficient = spec.main_coefficient();
    let series =
        error_series(spec.describe(), |l| Ok(counter.count(l)?.0 as f64), coefficient, spec.total_dim(), grid)?;
    let (windows, fit) = fit_series(cfg, &series)?;
    let tolerance = cfg.tolerance.unwrap_or(0.1);
    let report = exponent_report(&spec.describe(), &fit, &spec.dims(), spec.n(), tolerance);
    let mut failures = Vec::new();
    if cfg.check_bound && !report.pass {
        failures.push(format!(
            "fitted exponent {:.4} exceeds improved bound {:.4} + {tolerance}",
            report.slope, report.improved_exponent
        ));
    }
    out.write("weyl.csv", &series_csv(&series, windows).render())?;
    out.write(
        "weyl.json",
        &to_json(&json!({
            "provenance": cfg.provenance(),
            "spec": spec.describe(),
            "method": counter.method(),
            "main_coefficient": coefficient,
            "geometric_coefficient": spec.geometric_coefficient(),
            "total_degree": spec.total_dim(),
            "n": spec.n(),
            "window_count": windows,
            "report": report,
        }))?,
    )?;
    out.write("weyl.svg", &report_svg(&format!("E(lambda) for {}", spec.describe()), &fit, &report))?;
    Ok(Outcome { failures })
}
