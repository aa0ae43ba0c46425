//! Aggregation of run logs: per-seed window medians, then across-seed
//! median and spread per run id.

use std::collections::HashMap;
use std::fmt::Write as _;

use polyak_core::problems::format_f64;

use crate::config::{HarnessError, Result};
use crate::run::CSV_HEADER;

pub const SUMMARY_HEADER: &str =
    "run_id,n_seeds,val_metric_median,val_metric_std,param_norm_median,param_norm_std,diverged_runs";

/// Inclusive epoch window `a:b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    pub fn parse(s: &str) -> Result<Window> {
        let err = || {
            HarnessError::Config(format!(
                "window `{s}` is not of the form `a:b` with integers a <= b"
            ))
        };
        let (lo, hi) = s.split_once(':').ok_or_else(err)?;
        let lo: usize = lo.trim().parse().map_err(|_| err())?;
        let hi: usize = hi.trim().parse().map_err(|_| err())?;
        if lo > hi {
            return Err(err());
        }
        Ok(Window { lo, hi })
    }

    fn contains(&self, epoch: usize) -> bool {
        self.lo <= epoch && epoch <= self.hi
    }
}

struct LogRow {
    run_id: String,
    seed: u64,
    epoch: usize,
    val_metric: f64,
    param_norm: f64,
    diverged: bool,
}

fn parse_field<T: std::str::FromStr>(line_no: usize, field: &str, name: &str) -> Result<T> {
    field.parse().map_err(|_| {
        HarnessError::Config(format!(
            "line {line_no}: field `{name}` holds unparseable value `{field}`"
        ))
    })
}

fn parse_log(text: &str) -> Result<Vec<LogRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(HarnessError::Config(format!(
                "unexpected header `{header}`; this file was not produced by `run`/`sweep`"
            )))
        }
        None => return Err(HarnessError::Config("empty log file".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(HarnessError::Config(format!(
                "line {line_no}: expected 10 fields, found {}",
                fields.len()
            )));
        }
        let diverged = match fields[9] {
            "0" => false,
            "1" => true,
            other => {
                return Err(HarnessError::Config(format!(
                    "line {line_no}: field `diverged` must be 0 or 1, got `{other}`"
                )))
            }
        };
        rows.push(LogRow {
            run_id: fields[0].to_string(),
            seed: parse_field(line_no, fields[1], "seed")?,
            epoch: parse_field(line_no, fields[2], "epoch")?,
            val_metric: parse_field(line_no, fields[5], "val_metric")?,
            param_norm: parse_field(line_no, fields[6], "param_norm")?,
            diverged,
        });
    }
    Ok(rows)
}

fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

/// Population standard deviation; zero for a single sample, infinite when
/// any sample is non-finite (a diverged seed has no finite spread).
fn spread(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    var.sqrt()
}

/// Summarize a run log over an epoch window.
///
/// Per `(run_id, seed)`, the window rows collapse to the medians of
/// `val_metric` and `param_norm` — or `+inf` when any window row is flagged
/// diverged. Per `run_id` (in first-appearance order), those per-seed values
/// collapse to their median and population standard deviation, along with
/// the diverged-seed count.
pub fn summarize_csv(text: &str, window: Window) -> Result<String> {
    let rows = parse_log(text)?;

    // (run_id, seed) -> windowed samples, plus stable orderings.
    let mut run_order: Vec<String> = Vec::new();
    let mut seed_order: HashMap<String, Vec<u64>> = HashMap::new();
    #[allow(clippy::type_complexity)]
    let mut samples: HashMap<(String, u64), (Vec<f64>, Vec<f64>, bool)> = HashMap::new();
    for row in &rows {
        if !run_order.contains(&row.run_id) {
            run_order.push(row.run_id.clone());
        }
        let seeds = seed_order.entry(row.run_id.clone()).or_default();
        if !seeds.contains(&row.seed) {
            seeds.push(row.seed);
        }
        if !window.contains(row.epoch) {
            continue;
        }
        let entry = samples
            .entry((row.run_id.clone(), row.seed))
            .or_insert_with(|| (Vec::new(), Vec::new(), false));
        entry.0.push(row.val_metric);
        entry.1.push(row.param_norm);
        entry.2 |= row.diverged;
    }

    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for run_id in &run_order {
        let seeds = &seed_order[run_id];
        let mut val_by_seed = Vec::with_capacity(seeds.len());
        let mut norm_by_seed = Vec::with_capacity(seeds.len());
        let mut diverged_runs = 0usize;
        for &seed in seeds {
            let Some((vals, norms, diverged)) = samples.get(&(run_id.clone(), seed)) else {
                return Err(HarnessError::Config(format!(
                    "window {}:{} selects no epochs for run `{run_id}` seed {seed}",
                    window.lo, window.hi
                )));
            };
            if *diverged {
                diverged_runs += 1;
                val_by_seed.push(f64::INFINITY);
                norm_by_seed.push(f64::INFINITY);
            } else {
                val_by_seed.push(median(vals.clone()));
                norm_by_seed.push(median(norms.clone()));
            }
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            run_id,
            seeds.len(),
            format_f64(median(val_by_seed.clone())),
            format_f64(spread(&val_by_seed)),
            format_f64(median(norm_by_seed.clone())),
            format_f64(spread(&norm_by_seed)),
            diverged_runs,
        );
    }
    Ok(out)
}
