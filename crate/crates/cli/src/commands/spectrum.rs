use anyhow::{bail, Result};
use serde_json::json;
use weyl_core::spectra::{sphere_eigenvalue, sphere_multiplicity, zoll_clusters, FactorSpec};

use super::Outcome;
use crate::output::{num, to_json, Csv, OutDir};
use crate::settings::RunConfig;

pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    if cfg.factors.is_empty() {
        bail!("spectrum needs [factor] sections in --config");
    }
    let mut csv = Csv::new(&["factor", "type", "k", "center", "eigenvalue", "count"]);
    let mut factors = Vec::new();
    for (i, f) in cfg.factors.iter().enumerate() {
        let id = i.to_string();
        match f {
            FactorSpec::Sphere { dim } => {
                for k in 0..=cfg.k_max {
                    let e = num(sphere_eigenvalue(*dim, k));
                    csv.push(vec![
                        id.clone(),
                        "sphere".into(),
                        k.to_string(),
                        e.clone(),
                        e,
                        sphere_multiplicity(*dim, k).to_string(),
                    ]);
                }
            }
            FactorSpec::Circle => {
                for k in 0..=cfg.k_max {
                    let e = num(k as f64);
                    let m = if k == 0 { "1" } else { "2" };
                    csv.push(vec![id.clone(), "circle".into(), k.to_string(), e.clone(), e, m.into()]);
                }
            }
            FactorSpec::Zoll(z) => {
                let mut low = z.low_lying.clone();
                low.sort_by(f64::total_cmp);
                for v in &low {
                    csv.push(vec![id.clone(), "zoll".into(), "0".into(), num(*v), num(*v), low.len().to_string()]);
                }
                for c in zoll_clusters(z, cfg.k_max) {
                    for e in &c.eigenvalues {
                        csv.push(vec![
                            id.clone(),
                            "zoll".into(),
                            c.k.to_string(),
                            num(c.center),
                            num(*e),
                            c.population.to_string(),
                        ]);
                    }
                }
            }
        }
        let populations: Vec<String> = (0..=cfg.k_max)
            .map(|k| match f {
                FactorSpec::Sphere { dim } => sphere_multiplicity(*dim, k).to_string(),
                FactorSpec::Circle => (if k == 0 { 1 } else { 2 }).to_string(),
                FactorSpec::Zoll(z) if k == 0 => z.low_lying.len().to_string(),
                FactorSpec::Zoll(z) => z.population(k).to_string(),
            })
            .collect();
        factors.push(json!({
            "index": i,
            "factor": f.describe(),
            "dim": f.dim(),
            "maslov": f.maslov().to_string(),
            "shift": f.shift().to_string(),
            "leading_coefficient": f.leading_coefficient(),
            "counts_by_k": populations,
        }));
    }
    out.write("spectrum.csv", &csv.render())?;
    out.write(
        "spectrum.json",
        &to_json(&json!({
            "provenance": cfg.provenance(),
            "k_max": cfg.k_max,
            "rows": csv.len(),
            "factors": factors,
        }))?,
    )?;
    Ok(Outcome::default())
}
