mod counting;
mod fit;
mod fourier;
mod lattice;
mod spectrum;

use anyhow::Result;
use weyl_core::analysis::{
    default_window_count, fit_envelope_exponent, window_ids, ErrorSeries, ExponentFit, ExponentReport,
};

use crate::output::{envelope_svg, num, Csv, OutDir, Reference};
use crate::settings::{Command, RunConfig};

/// Failed assertions of a run; empty means exit code 0.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = OutDir::create(&cfg.out)?;
    let outcome = match cfg.command {
        Command::Spectrum => spectrum::run(cfg, &mut out)?,
        Command::Count => counting::count(cfg, &mut out)?,
        Command::Weyl => counting::weyl(cfg, &mut out)?,
        Command::Lattice => lattice::lattice(cfg, &mut out)?,
        Command::Annulus => lattice::annulus(cfg, &mut out)?,
        Command::Mollify => lattice::mollify(cfg, &mut out)?,
        Command::FourierCheck => fourier::check(cfg, &mut out)?,
        Command::Fit => fit::run(cfg, &mut out)?,
    };
    for p in out.written() {
        println!("{}", p.display());
    }
    Ok(outcome)
}

pub(crate) fn window_count(cfg: &RunConfig, series: &ErrorSeries) -> usize {
    cfg.windows.unwrap_or_else(|| {
        let l = series.lambdas();
        default_window_count(l[0], l[l.len() - 1])
    })
}

/// `lambda,count,main_term,error,window_id` rows.
pub(crate) fn series_csv(series: &ErrorSeries, windows: usize) -> Csv {
    let mut csv = Csv::new(&["lambda", "count", "main_term", "error", "window_id"]);
    for (e, id) in series.entries.iter().zip(window_ids(series, windows)) {
        csv.push(vec![num(e.lambda), num(e.count), num(e.main_term), num(e.error), id.to_string()]);
    }
    csv
}

pub(crate) fn fit_series(cfg: &RunConfig, series: &ErrorSeries) -> Result<(usize, ExponentFit)> {
    let windows = window_count(cfg, series);
    Ok((windows, fit_envelope_exponent(series, windows)?))
}

pub(crate) fn report_svg(title: &str, fit: &ExponentFit, report: &ExponentReport) -> String {
    envelope_svg(
        title,
        fit,
        &[
            Reference { label: "classical".into(), slope: report.classical_exponent },
            Reference { label: "improved".into(), slope: report.improved_exponent },
        ],
    )
}
