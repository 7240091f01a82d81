use anyhow::Result;
use serde_json::json;
use weyl_core::fourier::{
    ball_chi_hat, decay_ratio_sup, dyadic_sum_check, poisson_error_sum, sample_radii, TruncationSpec,
};
use weyl_core::lattice::{main_term_constant, mollified_count, MollifierSpec, WeightSpec};
use weyl_core::numeric::special::ball_volume;
use weyl_core::WeylError;

use super::Outcome;
use crate::output::{num, to_json, Csv, OutDir};
use crate::settings::{EpsilonPolicy, RunConfig};

/// Poisson identity `Σ_m (χ_{λB}F ∗ ρ_ε)(m+y) = C λ^{|d|} + Σ_{ξ≠0} …` per λ,
/// plus decay and dyadic-shell diagnostics.
pub fn check(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let w = if cfg.dims.is_none() && cfg.factors.is_empty() { WeightSpec::unweighted(2) } else { cfg.weight_spec()? };
    let grid: Vec<f64> = match &cfg.grid {
        Some(g) => g.clone(),
        None => vec![10.0, 20.0, 40.0],
    };
    let policy = cfg.epsilon.unwrap_or(EpsilonPolicy::Fixed { epsilon: 0.2 });
    let levels = cfg.levels.unwrap_or(4);
    let rel = cfg.tolerance.unwrap_or(1e-3);
    let constant = main_term_constant(&w);
    let mut failures = Vec::new();

    let mut csv = Csv::new(&[
        "lambda",
        "epsilon",
        "lattice",
        "main_term",
        "poisson_sum",
        "difference",
        "tail_bound",
        "terms",
        "pass",
    ]);
    for &l in &grid {
        let spec = MollifierSpec::new(policy.at(l, w.n()))?;
        let lattice = mollified_count(&w, l, &spec)?.value;
        let main = constant * l.powi(w.total_degree() as i32);
        let allowed = rel * lattice.abs();
        let trunc = TruncationSpec::from_levels(spec.epsilon, levels, allowed);
        match poisson_error_sum(&w, l, &spec, &trunc) {
            Ok(p) => {
                let diff = lattice - main - p.value;
                let pass = diff.abs() <= allowed.max(p.tail_bound);
                if !pass {
                    failures.push(format!("Poisson identity off by {diff:e} at lambda = {l}"));
                }
                csv.push(vec![
                    num(l),
                    num(spec.epsilon),
                    num(lattice),
                    num(main),
                    num(p.value),
                    num(diff),
                    num(p.tail_bound),
                    p.terms.to_string(),
                    pass.to_string(),
                ]);
            }
            Err(WeylError::TailCertificate { bound, tolerance }) => {
                failures.push(format!("tail bound {bound:e} exceeds {tolerance:e} at lambda = {l}; raise --levels"));
                csv.push(vec![
                    num(l),
                    num(spec.epsilon),
                    num(lattice),
                    num(main),
                    String::new(),
                    String::new(),
                    num(bound),
                    "0".into(),
                    "false".into(),
                ]);
            }
            Err(e) => return Err(e.into()),
        }
    }

    let n = w.n();
    let mut decay = json!(null);
    if n <= 4 {
        let coarse = decay_ratio_sup(n, &sample_radii(1.0, 50.0, 2000))?;
        let fine = decay_ratio_sup(n, &sample_radii(1.0, 50.0, 4000))?;
        let stable = (fine - coarse).abs() <= 0.05 * fine;
        let zero = ball_chi_hat(n, &vec![0.0; n])?;
        let volume_ok = (zero - ball_volume(n as u32)).abs() < 1e-8;
        if !stable {
            failures.push(format!("decay ratio not refinement-stable: {coarse} vs {fine}"));
        }
        if !volume_ok {
            failures.push(format!("transform at zero {zero} differs from the ball volume"));
        }
        decay = json!({
            "sup_ratio": fine,
            "sup_ratio_coarse": coarse,
            "refinement_stable": stable,
            "transform_at_zero": zero,
            "ball_volume": ball_volume(n as u32),
        });
    }

    let first = grid[0];
    let spec = MollifierSpec::new(policy.at(first, n))?;
    let shells = dyadic_sum_check(&w, first, &spec, levels)?;
    // the central cube is excluded; shells proper must shrink
    let monotone = shells.iter().skip(1).collect::<Vec<_>>().windows(2).all(|p| p[1].abs_sum <= p[0].abs_sum);
    if !monotone {
        failures.push(format!("dyadic shell sums do not decay at lambda = {first}"));
    }
    let shell_json: Vec<_> = shells
        .iter()
        .map(|s| json!({"level": s.level, "inner": s.inner, "outer": s.outer, "abs_sum": s.abs_sum, "signed_sum": s.signed_sum}))
        .collect();

    out.write("fourier-check.csv", &csv.render())?;
    out.write(
        "fourier-check.json",
        &to_json(&json!({
            "provenance": cfg.provenance(),
            "spec": w.describe(),
            "epsilon": policy,
            "levels": levels,
            "relative_tolerance": rel,
            "main_term_constant": constant,
            "decay": decay,
            "dyadic_lambda": first,
            "dyadic_shells": shell_json,
            "shells_monotone": monotone,
            "failures": failures,
        }))?,
    )?;
    Ok(Outcome { failures })
}
