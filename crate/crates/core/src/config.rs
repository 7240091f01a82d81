//! Plain-text run configuration.
//!
//! ```text
//! [run]
//! lambda_grid = geometric:100:3000:400
//! epsilon = auto
//! seed = 7
//!
//! [factor]
//! type = zoll
//! dim = 2
//! alpha = 2
//! C = 2
//! c_width = 0.3
//! placement = uniform
//! ```
//!
//! `#` and `;` start comments. Keys are case-sensitive. Factors appear in
//! the order given; a factor without its own `seed` inherits the run seed.
//! Explicit factor seeds always win.

use std::collections::BTreeMap;

use num_rational::Rational64;

use crate::error::{Result, WeylError};
use crate::spectra::{FactorSpec, PlacementRule, ZollModel};

#[derive(Debug, Clone, PartialEq)]
pub enum LambdaGrid {
    Geometric { start: f64, stop: f64, count: usize },
    Linear { start: f64, stop: f64, count: usize },
    List(Vec<f64>),
}

impl LambdaGrid {
    /// `geometric:a:b:count`, `linear:a:b:count` or `list:x,y,...`.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        let (kind, rest) = text.split_once(':').ok_or_else(|| format!("grid '{text}' has no kind prefix"))?;
        if kind == "list" {
            let values = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad grid value '{v}'")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            return Ok(LambdaGrid::List(values));
        }
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid '{text}' must look like {kind}:start:stop:count"));
        }
        let start = parts[0].trim().parse::<f64>().map_err(|_| format!("bad grid start '{}'", parts[0]))?;
        let stop = parts[1].trim().parse::<f64>().map_err(|_| format!("bad grid stop '{}'", parts[1]))?;
        let count = parts[2].trim().parse::<usize>().map_err(|_| format!("bad grid count '{}'", parts[2]))?;
        match kind {
            "geometric" => Ok(LambdaGrid::Geometric { start, stop, count }),
            "linear" => Ok(LambdaGrid::Linear { start, stop, count }),
            other => Err(format!("unknown grid kind '{other}'")),
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = |m: String| Err(WeylError::InvalidSpec(m));
        let out = match *self {
            LambdaGrid::Geometric { start, stop, count } | LambdaGrid::Linear { start, stop, count } => {
                let geometric = matches!(self, LambdaGrid::Geometric { .. });
                if count == 0 {
                    return bad("lambda grid is empty".into());
                }
                if !(start.is_finite()
                    && stop.is_finite()
                    && start >= 0.0
                    && (stop > start || (count == 1 && stop == start)))
                {
                    return bad(format!("lambda grid needs 0 <= start < stop, got {start}..{stop}"));
                }
                if geometric && !(start > 0.0) {
                    return bad("geometric grid needs a positive start".into());
                }
                if count == 1 {
                    return Ok(vec![start]);
                }
                let last = (count - 1) as f64;
                let mut v: Vec<f64> = (0..count)
                    .map(|i| {
                        let t = i as f64 / last;
                        if geometric {
                            start * (stop / start).powf(t)
                        } else {
                            start + (stop - start) * t
                        }
                    })
                    .collect();
                v[count - 1] = stop;
                v
            }
            LambdaGrid::List(ref v) => {
                if v.is_empty() {
                    return bad("lambda grid is empty".into());
                }
                v.clone()
            }
        };
        if out.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return bad("lambda values must be finite and nonnegative".into());
        }
        if out.windows(2).any(|p| !(p[1] > p[0])) {
            return bad("lambda grid must be strictly increasing".into());
        }
        Ok(out)
    }
}

/// Values of the `[run]` section, all optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSection {
    pub lambda_grid: Option<LambdaGrid>,
    pub epsilon: Option<String>,
    pub c: Option<f64>,
    pub cutoff: Option<i64>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub dims: Option<Vec<u32>>,
    pub shift: Option<Vec<Rational64>>,
    pub k_max: Option<u64>,
    pub windows: Option<usize>,
    pub levels: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub factors: Vec<FactorSpec>,
    pub run: RunSection,
    /// File contents as read, recorded in outputs.
    pub source: String,
}

struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

fn config_err(line: usize, message: impl Into<String>) -> WeylError {
    WeylError::Config { line, message: message.into() }
}

pub fn parse_rational(text: &str) -> std::result::Result<Rational64, String> {
    let t = text.trim();
    let r = match t.split_once('/') {
        Some((p, q)) => {
            let p = p.trim().parse::<i64>().map_err(|_| format!("bad rational '{t}'"))?;
            let q = q.trim().parse::<i64>().map_err(|_| format!("bad rational '{t}'"))?;
            if q == 0 {
                return Err(format!("zero denominator in '{t}'"));
            }
            Rational64::new(p, q)
        }
        None => Rational64::from_integer(t.parse::<i64>().map_err(|_| format!("bad rational '{t}'"))?),
    };
    Ok(r)
}

pub fn parse_list<T, F>(text: &str, item: F) -> std::result::Result<Vec<T>, String>
where
    F: Fn(&str) -> std::result::Result<T, String>,
{
    text.split(',').map(|s| item(s.trim())).collect()
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.trim().parse::<T>().map_err(|_| config_err(line, format!("cannot parse {key} = '{v}'")))
}

fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split(['#', ';']).next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| config_err(line, "unterminated section header"))?.trim();
            if name != "run" && name != "factor" {
                return Err(config_err(line, format!("unknown section [{name}]")));
            }
            out.push(Section { name: name.to_string(), line, entries: BTreeMap::new() });
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| config_err(line, "expected key = value"))?;
        let section = out.last_mut().ok_or_else(|| config_err(line, "key outside of any section"))?;
        let key = k.trim().to_string();
        if section.entries.insert(key.clone(), (line, v.trim().to_string())).is_some() {
            return Err(config_err(line, format!("duplicate key '{key}'")));
        }
    }
    Ok(out)
}

fn take<'a>(s: &'a Section, key: &str) -> Option<(usize, &'a str)> {
    s.entries.get(key).map(|(l, v)| (*l, v.as_str()))
}

fn check_keys(s: &Section, allowed: &[&str]) -> Result<()> {
    for (k, (line, _)) in &s.entries {
        if !allowed.contains(&k.as_str()) {
            return Err(config_err(*line, format!("unknown key '{k}' in [{}]", s.name)));
        }
    }
    Ok(())
}

fn parse_factor(s: &Section, run_seed: Option<u64>) -> Result<FactorSpec> {
    let (tline, kind) = take(s, "type").ok_or_else(|| config_err(s.line, "factor needs a type"))?;
    let dim = |required: bool| -> Result<Option<u32>> {
        match take(s, "dim") {
            Some((l, v)) => Ok(Some(parse_num(l, "dim", v)?)),
            None if required => Err(config_err(s.line, "factor needs dim")),
            None => Ok(None),
        }
    };
    let factor = match kind {
        "sphere" => {
            check_keys(s, &["type", "dim"])?;
            FactorSpec::Sphere { dim: dim(true)?.unwrap() }
        }
        "circle" => {
            check_keys(s, &["type", "dim"])?;
            if let Some(d) = dim(false)? {
                if d != 1 {
                    return Err(config_err(take(s, "dim").unwrap().0, "circle factors have dim = 1"));
                }
            }
            FactorSpec::Circle
        }
        "zoll" => {
            check_keys(s, &["type", "dim", "alpha", "C", "c_width", "correction", "placement", "seed", "low"])?;
            let alpha = match take(s, "alpha") {
                Some((l, v)) => parse_rational(v).map_err(|m| config_err(l, m))?,
                None => return Err(config_err(s.line, "zoll factor needs alpha")),
            };
            let leading = match take(s, "C") {
                Some((l, v)) => parse_num(l, "C", v)?,
                None => return Err(config_err(s.line, "zoll factor needs C")),
            };
            let c_width = match take(s, "c_width") {
                Some((l, v)) => parse_num(l, "c_width", v)?,
                None => return Err(config_err(s.line, "zoll factor needs c_width")),
            };
            let correction = match take(s, "correction") {
                Some((l, v)) => parse_num(l, "correction", v)?,
                None => 0.0,
            };
            let placement = match take(s, "placement") {
                None | Some((_, "center")) => PlacementRule::AtCenter,
                Some((_, "equispaced")) => PlacementRule::Equispaced,
                Some((_, "uniform")) => PlacementRule::SeededUniform,
                Some((l, v)) => return Err(config_err(l, format!("unknown placement '{v}'"))),
            };
            let seed = match take(s, "seed") {
                Some((l, v)) => parse_num(l, "seed", v)?,
                None => run_seed.unwrap_or(0),
            };
            let low_lying = match take(s, "low") {
                Some((l, v)) => parse_list(v, |x| x.parse::<f64>().map_err(|_| format!("bad value '{x}'")))
                    .map_err(|m| config_err(l, m))?,
                None => Vec::new(),
            };
            FactorSpec::Zoll(ZollModel {
                dim: dim(true)?.unwrap(),
                alpha,
                leading,
                c_width,
                correction,
                placement,
                seed,
                low_lying,
            })
        }
        other => return Err(config_err(tline, format!("unknown factor type '{other}'"))),
    };
    factor.validate().map_err(|e| config_err(s.line, e.to_string()))?;
    Ok(factor)
}

fn parse_run(s: &Section) -> Result<RunSection> {
    check_keys(
        s,
        &[
            "lambda_grid",
            "epsilon",
            "c",
            "cutoff_M",
            "tolerance",
            "seed",
            "workers",
            "dims",
            "shift",
            "k_max",
            "windows",
            "levels",
        ],
    )?;
    let mut run = RunSection::default();
    for (key, (line, v)) in &s.entries {
        let line = *line;
        match key.as_str() {
            "lambda_grid" => run.lambda_grid = Some(LambdaGrid::parse(v).map_err(|m| config_err(line, m))?),
            "epsilon" => {
                if let Some(f) = v.strip_prefix("auto*") {
                    parse_num::<f64>(line, key, f)?;
                } else if v != "auto" {
                    parse_num::<f64>(line, key, v)?;
                }
                run.epsilon = Some(v.clone());
            }
            "c" => run.c = Some(parse_num(line, key, v)?),
            "cutoff_M" => run.cutoff = Some(parse_num(line, key, v)?),
            "tolerance" => run.tolerance = Some(parse_num(line, key, v)?),
            "seed" => run.seed = Some(parse_num(line, key, v)?),
            "workers" => run.workers = Some(parse_num(line, key, v)?),
            "dims" => {
                run.dims = Some(
                    parse_list(v, |x| x.parse::<u32>().map_err(|_| format!("bad dimension '{x}'")))
                        .map_err(|m| config_err(line, m))?,
                )
            }
            "shift" => run.shift = Some(parse_list(v, parse_rational).map_err(|m| config_err(line, m))?),
            "k_max" => run.k_max = Some(parse_num(line, key, v)?),
            "windows" => run.windows = Some(parse_num(line, key, v)?),
            "levels" => run.levels = Some(parse_num(line, key, v)?),
            _ => unreachable!(),
        }
    }
    Ok(run)
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_seed(text, None)
    }

    /// Like [`ConfigFile::parse`], with `seed` replacing the `[run]` seed.
    pub fn parse_with_seed(text: &str, seed: Option<u64>) -> Result<Self> {
        let all = sections(text)?;
        let runs: Vec<&Section> = all.iter().filter(|s| s.name == "run").collect();
        if runs.len() > 1 {
            return Err(config_err(runs[1].line, "more than one [run] section"));
        }
        let run = match runs.first() {
            Some(s) => parse_run(s)?,
            None => RunSection::default(),
        };
        let run = RunSection { seed: seed.or(run.seed), ..run };
        let factors =
            all.iter().filter(|s| s.name == "factor").map(|s| parse_factor(s, run.seed)).collect::<Result<Vec<_>>>()?;
        Ok(Self { factors, run, source: text.to_string() })
    }
}
