use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;
use weyl_core::analysis::{exponent_report, window_ids, ErrorSeries};

use super::{fit_series, report_svg, Outcome};
use crate::output::{envelope_svg, num, to_json, Csv, OutDir};
use crate::settings::RunConfig;

/// Reads `lambda` and `error` columns (or the first two columns) of a CSV.
fn read_pairs(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| anyhow!("input is empty"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| cols.iter().position(|c| *c == name);
    let (li, ei) = match (find("lambda"), find("error")) {
        (Some(a), Some(b)) => (a, b),
        _ if cols.len() >= 2 => (0, 1),
        _ => bail!("input needs at least two columns"),
    };
    lines
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').map(str::trim).collect();
            let get = |j: usize| -> Result<f64> {
                f.get(j)
                    .ok_or_else(|| anyhow!("line {}: missing column {j}", i + 1))?
                    .parse::<f64>()
                    .with_context(|| format!("line {}: bad number", i + 1))
            };
            Ok((get(li)?, get(ei)?))
        })
        .collect()
}

pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let path = cfg.input.as_ref().ok_or_else(|| anyhow!("fit needs --input PATH"))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pairs = read_pairs(&text)?;
    let series = ErrorSeries::from_pairs(path.display().to_string(), &pairs)?;
    let (windows, fit) = fit_series(cfg, &series)?;

    let mut csv = Csv::new(&["lambda", "error", "window_id"]);
    for (e, id) in series.entries.iter().zip(window_ids(&series, windows)) {
        csv.push(vec![num(e.lambda), num(e.error), id.to_string()]);
    }
    let mut failures = Vec::new();
    let report = match &cfg.dims {
        Some(dims) => {
            let tolerance = cfg.tolerance.unwrap_or(0.1);
            let r = exponent_report(&series.description, &fit, dims, dims.len(), tolerance);
            if cfg.check_bound && !r.pass {
                failures.push(format!(
                    "fitted exponent {:.4} exceeds improved bound {:.4} + {tolerance}",
                    r.slope, r.improved_exponent
                ));
            }
            Some(r)
        }
        None => None,
    };
    out.write("fit.csv", &csv.render())?;
    out.write(
        "fit.json",
        &to_json(&json!({
            "provenance": cfg.provenance(),
            "input": path.display().to_string(),
            "window_count": windows,
            "fit": fit,
            "report": report,
        }))?,
    )?;
    let svg = match &report {
        Some(r) => report_svg("envelope fit", &fit, r),
        None => envelope_svg("envelope fit", &fit, &[]),
    };
    out.write("fit.svg", &svg)?;
    Ok(Outcome { failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_named_or_leading_columns() {
        let named = read_pairs("window_id,error,lambda\n0,2.5,10\n1,-1,20\n").unwrap();
        assert_eq!(named, vec![(10.0, 2.5), (20.0, -1.0)]);
        let plain = read_pairs("x,y\n1,2\n").unwrap();
        assert_eq!(plain, vec![(1.0, 2.0)]);
        assert!(read_pairs("x,y\n1,zz\n").is_err());
    }
}
