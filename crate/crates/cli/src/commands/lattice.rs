use anyhow::{bail, Result};
use rayon::prelude::*;
use serde_json::{json, Value};
use weyl_core::analysis::{bound_report, error_series, exponent_report, ErrorSeries};
use weyl_core::counting::{nhat, nhat1, nhat2, nhat3, nhat_annulus_diff, ProductSpec};
use weyl_core::fourier::weighted_ball_transform;
use weyl_core::lattice::{
    annulus_sum, main_term_constant, mollified_count, sandwich_holds, weighted_count, MollifierSpec, WeightSpec,
};
use weyl_core::WeylError;

use super::{fit_series, report_svg, series_csv, Outcome};
use crate::output::{envelope_svg, num, to_json, Csv, OutDir, Reference};
use crate::settings::{EpsilonPolicy, RunConfig};

pub fn lattice(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let w = cfg.weight_spec()?;
    let grid = cfg.grid()?;
    let constant = main_term_constant(&w);
    let series = error_series(w.describe(), |l| Ok(weighted_count(&w, l)?.value), constant, w.total_degree(), grid)?;
    let (windows, fit) = fit_series(cfg, &series)?;
    let tolerance = cfg.tolerance.unwrap_or(0.1);
    let report = exponent_report(&w.describe(), &fit, &w.dims, w.n(), tolerance);
    let quadrature = if w.n() <= 2 { Some(weighted_ball_transform(&w, 1.0, &vec![0.0; w.n()])?.re) } else { None };
    let mut failures = Vec::new();
    if cfg.check_bound && !report.pass {
        failures.push(format!(
            "fitted exponent {:.4} exceeds improved bound {:.4} + {tolerance}",
            report.slope, report.improved_exponent
        ));
    }
    out.write("lattice.csv", &series_csv(&series, windows).render())?;
    out.write(
        "lattice.json",
        &to_json(&json!({
            "provenance": cfg.provenance(),
            "spec": w.describe(),
            "main_term_constant": constant,
            "main_term_constant_quadrature": quadrature,
            "main_term_constant_relative_difference": quadrature.map(|q| (q - constant).abs() / constant),
            "window_count": windows,
            "report": report,
        }))?,
    )?;
    out.write("lattice.svg", &report_svg(&format!("weighted lattice remainder, {}", w.describe()), &fit, &report))?;
    Ok(Outcome { failures })
}

/// Quantities expected to grow like `λ^{|d|-2}`.
struct ThinQuantity {
    name: &'static str,
    values: Vec<f64>,
}

fn chain(spec: &ProductSpec, grid: &[f64], c: f64, cutoff: i64) -> Result<Vec<ThinQuantity>> {
    let rows = grid
        .par_iter()
        .map(|&l| -> weyl_core::Result<[f64; 4]> {
            let n0 = nhat(spec, l)?;
            let n1 = nhat1(spec, l, cutoff)?;
            let n2 = nhat2(spec, l, cutoff)?;
            let n3 = nhat3(spec, l)?;
            Ok([nhat_annulus_diff(spec, l, c)?, n0 - n1, (n1 - n2).abs(), n3 - n2])
        })
        .collect::<weyl_core::Result<Vec<_>>>()?;
    let names = ["nhat_annulus_diff", "nhat_minus_nhat1", "abs_nhat1_minus_nhat2", "nhat3_minus_nhat2"];
    Ok(names
        .iter()
        .enumerate()
        .map(|(i, name)| ThinQuantity { name, values: rows.iter().map(|r| r[i]).collect() })
        .collect())
}

pub fn annulus(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let w = cfg.weight_spec()?;
    let grid = cfg.grid()?;
    let sums = grid.par_iter().map(|&l| annulus_sum(&w, l, cfg.c)).collect::<weyl_core::Result<Vec<_>>>()?;
    let mut quantities = vec![ThinQuantity { name: "annulus_sum", values: sums }];
    let product = if cfg.factors.is_empty() { None } else { Some(cfg.product()?) };
    if let Some(spec) = &product {
        quantities.extend(chain(spec, grid, cfg.c, cfg.cutoff)?);
    }

    let tolerance = cfg.tolerance.unwrap_or(0.15);
    let mut header = vec!["lambda"];
    header.extend(quantities.iter().map(|q| q.name));
    let mut csv = Csv::new(&header);
    for (i, l) in grid.iter().enumerate() {
        let mut row = vec![num(*l)];
        row.extend(quantities.iter().map(|q| num(q.values[i])));
        csv.push(row);
    }

    let mut failures = Vec::new();
    let mut reports = Vec::new();
    for q in &quantities {
        let (degree, n) = match (q.name, &product) {
            ("annulus_sum", _) | (_, None) => (w.total_degree(), w.n()),
            (_, Some(spec)) => (spec.total_dim(), spec.n()),
        };
        let bound = degree as f64 - 2.0;
        let pairs: Vec<(f64, f64)> = grid.iter().cloned().zip(q.values.iter().cloned()).collect();
        let series = ErrorSeries::from_pairs(q.name, &pairs)?;
        let entry = match fit_series(cfg, &series) {
            Ok((windows, fit)) => {
                let report = bound_report(q.name, &fit, degree, n, bound, tolerance);
                if cfg.check_bound && !report.pass {
                    failures
                        .push(format!("{}: fitted exponent {:.4} exceeds {bound} + {tolerance}", q.name, report.slope));
                }
                out.write(
                    &format!("annulus-{}.svg", q.name),
                    &envelope_svg(q.name, &fit, &[Reference { label: "|d|-2".into(), slope: bound }]),
                )?;
                json!({"quantity": q.name, "status": "fit", "window_count": windows, "report": report})
            }
            Err(e) => match e.downcast_ref::<WeylError>() {
                Some(WeylError::InsufficientWindows { usable: 0, .. }) if q.values.iter().all(|v| *v == 0.0) => {
                    json!({"quantity": q.name, "status": "identically-zero", "bound": bound})
                }
                _ => return Err(e),
            },
        };
        reports.push(entry);
    }
    out.write("annulus.csv", &csv.render())?;
    out.write(
        "annulus.json",
        &to_json(&json!({
            "provenance": cfg.provenance(),
            "spec": w.describe(),
            "product": product.as_ref().map(|p| p.describe()),
            "c": cfg.c,
            "cutoff_M": cfg.cutoff,
            "quantities": reports,
        }))?,
    )?;
    Ok(Outcome { failures })
}

fn mollifier_at(policy: &EpsilonPolicy, w: &WeightSpec, lambda: f64) -> Result<MollifierSpec> {
    Ok(MollifierSpec::new(policy.at(lambda, w.n()))?)
}

pub fn mollify(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let w = cfg.weight_spec()?;
    let grid = cfg.grid()?;
    let policy = cfg.epsilon.unwrap_or(EpsilonPolicy::Auto { factor: 1.0 });
    for &l in grid {
        let eps = policy.at(l, w.n());
        if l < eps {
            bail!("mollify needs lambda >= epsilon, got lambda = {l}, epsilon = {eps}");
        }
    }
    let rows = grid
        .par_iter()
        .map(|&l| -> Result<Value> {
            let spec = mollifier_at(&policy, &w, l)?;
            let eps = spec.epsilon;
            let exact = weighted_count(&w, l)?.value;
            let lower = mollified_count(&w, l - eps, &spec)?;
            let mid = mollified_count(&w, l, &spec)?;
            let upper = mollified_count(&w, l + eps, &spec)?;
            Ok(json!({
                "lambda": l,
                "epsilon": eps,
                "lower": lower.value,
                "exact": exact,
                "mollified": mid.value,
                "upper": upper.value,
                "holds": sandwich_holds(&lower, exact, &upper),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = Csv::new(&["lambda", "epsilon", "lower", "exact", "mollified", "upper", "holds"]);
    let mut violations = Vec::new();
    for r in &rows {
        let f = |k: &str| num(r[k].as_f64().unwrap_or(f64::NAN));
        let holds = r["holds"].as_bool().unwrap_or(false);
        if !holds {
            violations.push(r["lambda"].as_f64().unwrap_or(f64::NAN));
        }
        csv.push(vec![
            f("lambda"),
            f("epsilon"),
            f("lower"),
            f("exact"),
            f("mollified"),
            f("upper"),
            holds.to_string(),
        ]);
    }
    let mut failures = Vec::new();
    if cfg.check_sandwich && !violations.is_empty() {
        failures.push(format!("sandwich inequality fails at lambda = {violations:?}"));
    }
    out.write("mollify.csv", &csv.render())?;
    out.write(
        "mollify.json",
        &to_json(&json!({
            "provenance": cfg.provenance(),
            "spec": w.describe(),
            "epsilon": policy,
            "rows": rows.len(),
            "violations": violations,
            "sandwich_holds": violations.is_empty(),
        }))?,
    )?;
    Ok(Outcome { failures })
}
