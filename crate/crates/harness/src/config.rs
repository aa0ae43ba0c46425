//! Line-oriented experiment configuration.
//!
//! Format: `key = value` lines, `#` starts a comment, `[name]` opens a
//! section. Each section describes one experiment; keys placed before the
//! first section header act as shared defaults for every section (a file
//! without headers is a single anonymous experiment). The keys `method`,
//! `lambda`, and `alpha0` accept comma-separated lists, which the `sweep`
//! command expands into a Cartesian grid; `run` requires single values.
//! Unknown keys are rejected with their line number — there are no silent
//! defaults for misspelled keys.

use std::collections::BTreeMap;

use polyak_core::optim::{Method, Schedule};

/// Errors split by exit-code class: configuration problems exit 1, I/O
/// problems exit 2.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<polyak_core::Error> for HarnessError {
    fn from(e: polyak_core::Error) -> Self {
        HarnessError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Config(msg.into()))
}

/// Which benchmark problem a section runs on, with its generator inputs.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    MatrixFac {
        p: usize,
        q: usize,
        n_samples: usize,
        rank: usize,
        upsilon: f64,
        epsilon: f64,
        data_seed: u64,
    },
    Ridge {
        n_rows: usize,
        n_cols: usize,
        data_seed: u64,
    },
    Logreg {
        n_rows: usize,
        n_cols: usize,
        data_seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodName {
    Sgd,
    ProxSgd,
    Sps,
    SpsMax,
    ProxSps,
    ProxSpsGeneral,
    DecSps,
}

impl MethodName {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::Sgd => "sgd",
            MethodName::ProxSgd => "prox_sgd",
            MethodName::Sps => "sps",
            MethodName::SpsMax => "spsmax",
            MethodName::ProxSps => "proxsps",
            MethodName::ProxSpsGeneral => "proxsps_general",
            MethodName::DecSps => "decsps",
        }
    }

    fn parse(line: usize, s: &str) -> Result<MethodName> {
        match s {
            "sgd" => Ok(MethodName::Sgd),
            "prox_sgd" => Ok(MethodName::ProxSgd),
            "sps" => Ok(MethodName::Sps),
            "spsmax" => Ok(MethodName::SpsMax),
            "proxsps" => Ok(MethodName::ProxSps),
            "proxsps_general" => Ok(MethodName::ProxSpsGeneral),
            "decsps" => Ok(MethodName::DecSps),
            other => config_err(format!(
                "line {line}: unknown method `{other}` (expected one of sgd, prox_sgd, sps, \
                 spsmax, proxsps, proxsps_general, decsps)"
            )),
        }
    }

    /// Instantiate the run-loop method. `sps` pins the denominator scale to
    /// 1; `spsmax` takes it from the config.
    pub fn to_method(self, section: &RunSection, alpha0: f64) -> Method {
        match self {
            MethodName::Sgd => Method::Sgd,
            MethodName::ProxSgd => Method::ProxSgd,
            MethodName::Sps => Method::Sps { c_scale: 1.0 },
            MethodName::SpsMax => Method::Sps {
                c_scale: section.c_scale,
            },
            MethodName::ProxSps => Method::ProxSpsL2,
            MethodName::ProxSpsGeneral => Method::ProxSpsGeneral,
            MethodName::DecSps => Method::DecSps {
                c0: section.c0,
                gamma_init: Some(section.gamma_init.unwrap_or(alpha0)),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    SqrtEpoch,
    SqrtIter,
    SqrtTotal,
    StrongDecay,
}

impl ScheduleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleKind::Constant => "constant",
            ScheduleKind::SqrtEpoch => "sqrt_epoch",
            ScheduleKind::SqrtIter => "sqrt_iter",
            ScheduleKind::SqrtTotal => "sqrt_total",
            ScheduleKind::StrongDecay => "strong_decay",
        }
    }

    fn parse(line: usize, s: &str) -> Result<ScheduleKind> {
        match s {
            "constant" => Ok(ScheduleKind::Constant),
            "sqrt_epoch" => Ok(ScheduleKind::SqrtEpoch),
            "sqrt_iter" => Ok(ScheduleKind::SqrtIter),
            "sqrt_total" => Ok(ScheduleKind::SqrtTotal),
            "strong_decay" => Ok(ScheduleKind::StrongDecay),
            other => config_err(format!(
                "line {line}: unknown schedule `{other}` (expected one of constant, sqrt_epoch, \
                 sqrt_iter, sqrt_total, strong_decay)"
            )),
        }
    }

    /// Build the concrete schedule for one grid point. `total_iters` is the
    /// run length, needed only by `sqrt_total`; `lambda`/`k0` only by
    /// `strong_decay`.
    pub fn to_schedule(
        self,
        alpha0: f64,
        lambda: f64,
        k0: Option<f64>,
        total_iters: usize,
    ) -> Result<Schedule> {
        Ok(match self {
            ScheduleKind::Constant => Schedule::constant(alpha0),
            ScheduleKind::SqrtEpoch => Schedule::sqrt_epoch(alpha0),
            ScheduleKind::SqrtIter => Schedule::sqrt_iter(alpha0),
            ScheduleKind::SqrtTotal => Schedule::sqrt_total(alpha0, total_iters),
            ScheduleKind::StrongDecay => {
                if lambda <= 0.0 {
                    return config_err(
                        "the strong_decay schedule needs lambda > 0 (its step is 1/(lambda (k + k0)))",
                    );
                }
                let k0 = k0.ok_or_else(|| {
                    HarnessError::Config("the strong_decay schedule requires the key `k0`".into())
                })?;
                Schedule::strong_decay(lambda, k0)
            }
        })
    }
}

/// One experiment: a problem, a method/lambda/alpha0 grid, and run shape.
#[derive(Clone, Debug)]
pub struct RunSection {
    pub name: String,
    pub problem: ProblemSpec,
    pub methods: Vec<MethodName>,
    pub schedule: ScheduleKind,
    pub alpha0s: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub k0: Option<f64>,
    pub c_scale: f64,
    pub c0: f64,
    pub gamma_init: Option<f64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    pub output: String,
}

impl RunSection {
    /// The `run` command takes one grid point per section; name the keys
    /// that hold lists so the user can switch to `sweep` or trim them.
    pub fn require_single_point(&self) -> Result<()> {
        let mut listy = Vec::new();
        if self.methods.len() > 1 {
            listy.push("method");
        }
        if self.lambdas.len() > 1 {
            listy.push("lambda");
        }
        if self.alpha0s.len() > 1 {
            listy.push("alpha0");
        }
        if listy.is_empty() {
            Ok(())
        } else {
            config_err(format!(
                "section `{}`: `run` takes a single grid point but {} hold(s) a list; \
                 use `sweep` or reduce to one value",
                self.name,
                listy.join(", ")
            ))
        }
    }
}

/// Inputs for the interpolation-gap table.
#[derive(Clone, Debug)]
pub struct SigmaConfig {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data_seed: u64,
    pub lambda_grid: Vec<f64>,
}

// ---------------------------------------------------------------------------
// raw key = value scanning

struct RawEntry {
    line: usize,
    value: String,
}

struct RawSection {
    name: String,
    entries: BTreeMap<String, RawEntry>,
}

fn scan_sections(text: &str) -> Result<Vec<RawSection>> {
    let mut prelude = RawSection {
        name: String::new(),
        entries: BTreeMap::new(),
    };
    let mut sections: Vec<RawSection> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return config_err(format!("line {line_no}: unterminated section header"));
            }
            let name = line[1..line.len() - 1].trim();
            if name.is_empty() {
                return config_err(format!("line {line_no}: empty section name"));
            }
            sections.push(RawSection {
                name: name.to_string(),
                entries: BTreeMap::new(),
            });
            continue;
        }
        let Some(eq) = line.find('=') else {
            return config_err(format!(
                "line {line_no}: expected `key = value`, got `{line}`"
            ));
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if key.is_empty() {
            return config_err(format!("line {line_no}: missing key before `=`"));
        }
        let scope = sections.last_mut().unwrap_or(&mut prelude);
        if let Some(prev) = scope.entries.get(&key) {
            return config_err(format!(
                "line {line_no}: key `{key}` already set on line {}",
                prev.line
            ));
        }
        scope.entries.insert(
            key,
            RawEntry {
                line: line_no,
                value,
            },
        );
    }
    if sections.is_empty() {
        prelude.name = "run".to_string();
        return Ok(vec![prelude]);
    }
    // Prelude keys act as defaults; section keys win.
    for section in &mut sections {
        for (k, v) in &prelude.entries {
            section.entries.entry(k.clone()).or_insert(RawEntry {
                line: v.line,
                value: v.value.clone(),
            });
        }
    }
    Ok(sections)
}

// typed extraction ----------------------------------------------------------

struct KeyBag {
    section: String,
    entries: BTreeMap<String, RawEntry>,
}

impl KeyBag {
    fn take(&mut self, key: &str) -> Option<RawEntry> {
        self.entries.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<RawEntry> {
        self.take(key).ok_or_else(|| {
            HarnessError::Config(format!(
                "section `{}`: missing required key `{key}`",
                self.section
            ))
        })
    }

    fn finish(self) -> Result<()> {
        if let Some((key, entry)) = self.entries.into_iter().next() {
            return config_err(format!("line {}: unknown key `{key}`", entry.line));
        }
        Ok(())
    }
}

fn parse_f64(entry: &RawEntry, key: &str) -> Result<f64> {
    entry.value.parse::<f64>().map_err(|_| {
        HarnessError::Config(format!(
            "line {}: key `{key}` expects a number, got `{}`",
            entry.line, entry.value
        ))
    })
}

fn parse_usize(entry: &RawEntry, key: &str) -> Result<usize> {
    entry.value.parse::<usize>().map_err(|_| {
        HarnessError::Config(format!(
            "line {}: key `{key}` expects a nonnegative integer, got `{}`",
            entry.line, entry.value
        ))
    })
}

fn parse_u64(entry: &RawEntry, key: &str) -> Result<u64> {
    entry.value.parse::<u64>().map_err(|_| {
        HarnessError::Config(format!(
            "line {}: key `{key}` expects a nonnegative integer, got `{}`",
            entry.line, entry.value
        ))
    })
}

fn split_list<'a>(entry: &'a RawEntry, key: &str) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = entry
        .value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if parts.is_empty() {
        return config_err(format!(
            "line {}: key `{key}` expects at least one value",
            entry.line
        ));
    }
    Ok(parts)
}

fn parse_f64_list(entry: &RawEntry, key: &str) -> Result<Vec<f64>> {
    split_list(entry, key)?
        .into_iter()
        .map(|s| {
            s.parse::<f64>().map_err(|_| {
                HarnessError::Config(format!(
                    "line {}: key `{key}` expects numbers, got `{s}`",
                    entry.line
                ))
            })
        })
        .collect()
}

fn parse_u64_list(entry: &RawEntry, key: &str) -> Result<Vec<u64>> {
    split_list(entry, key)?
        .into_iter()
        .map(|s| {
            s.parse::<u64>().map_err(|_| {
                HarnessError::Config(format!(
                    "line {}: key `{key}` expects nonnegative integers, got `{s}`",
                    entry.line
                ))
            })
        })
        .collect()
}

fn parse_problem(bag: &mut KeyBag) -> Result<ProblemSpec> {
    let problem = bag.required("problem")?;
    let data_seed = match bag.take("data_seed") {
        Some(e) => parse_u64(&e, "data_seed")?,
        None => 0,
    };
    match problem.value.as_str() {
        "matrix_fac" => {
            let p = parse_usize(&bag.required("p")?, "p")?;
            let q = parse_usize(&bag.required("q")?, "q")?;
            let n_samples = parse_usize(&bag.required("n_samples")?, "n_samples")?;
            let rank = parse_usize(&bag.required("rank")?, "rank")?;
            let upsilon_entry = bag.required("upsilon")?;
            let upsilon = parse_f64(&upsilon_entry, "upsilon")?;
            if !(upsilon > 0.0 && upsilon <= 1.0) {
                return config_err(format!(
                    "line {}: `upsilon` must lie in (0, 1], got {upsilon}",
                    upsilon_entry.line
                ));
            }
            let epsilon = match bag.take("epsilon") {
                Some(e) => {
                    let v = parse_f64(&e, "epsilon")?;
                    if v < 0.0 {
                        return config_err(format!(
                            "line {}: `epsilon` must be nonnegative, got {v}",
                            e.line
                        ));
                    }
                    v
                }
                None => 0.0,
            };
            if p == 0 || q == 0 || n_samples == 0 || rank == 0 {
                return config_err(format!(
                    "section `{}`: matrix_fac dimensions must be at least 1",
                    bag.section
                ));
            }
            Ok(ProblemSpec::MatrixFac {
                p,
                q,
                n_samples,
                rank,
                upsilon,
                epsilon,
                data_seed,
            })
        }
        "ridge" | "logreg" => {
            let n_rows = parse_usize(&bag.required("n_rows")?, "n_rows")?;
            let n_cols = parse_usize(&bag.required("n_cols")?, "n_cols")?;
            if n_rows == 0 || n_cols == 0 {
                return config_err(format!(
                    "section `{}`: `n_rows` and `n_cols` must be at least 1",
                    bag.section
                ));
            }
            Ok(if problem.value == "ridge" {
                ProblemSpec::Ridge {
                    n_rows,
                    n_cols,
                    data_seed,
                }
            } else {
                ProblemSpec::Logreg {
                    n_rows,
                    n_cols,
                    data_seed,
                }
            })
        }
        other => config_err(format!(
            "line {}: unknown problem `{other}` (expected matrix_fac, ridge, or logreg)",
            problem.line
        )),
    }
}

/// Parse an experiment file into its sections.
pub fn parse_config(text: &str) -> Result<Vec<RunSection>> {
    let raw_sections = scan_sections(text)?;
    let mut sections = Vec::with_capacity(raw_sections.len());
    for raw in raw_sections {
        let mut bag = KeyBag {
            section: raw.name.clone(),
            entries: raw.entries,
        };

        let problem = parse_problem(&mut bag)?;

        let method_entry = bag.required("method")?;
        let mut methods = Vec::new();
        for tok in split_list(&method_entry, "method")? {
            let m = MethodName::parse(method_entry.line, tok)?;
            if methods.contains(&m) {
                return config_err(format!(
                    "line {}: method `{tok}` listed twice",
                    method_entry.line
                ));
            }
            methods.push(m);
        }

        let schedule_entry = bag.required("schedule")?;
        let schedule = ScheduleKind::parse(schedule_entry.line, &schedule_entry.value)?;

        let alpha_entry = bag.required("alpha0")?;
        let alpha0s = parse_f64_list(&alpha_entry, "alpha0")?;
        for &a in &alpha0s {
            if !(a > 0.0 && a.is_finite()) {
                return config_err(format!(
                    "line {}: `alpha0` values must be positive and finite, got {a}",
                    alpha_entry.line
                ));
            }
        }

        let lambda_entry = bag.required("lambda")?;
        let lambdas = parse_f64_list(&lambda_entry, "lambda")?;
        for &l in &lambdas {
            if !(l >= 0.0 && l.is_finite()) {
                return config_err(format!(
                    "line {}: `lambda` values must be nonnegative and finite, got {l}",
                    lambda_entry.line
                ));
            }
        }

        let k0 = match bag.take("k0") {
            Some(e) => {
                let v = parse_f64(&e, "k0")?;
                if !(v >= 1.0) {
                    return config_err(format!(
                        "line {}: `k0` must be at least 1, got {v}",
                        e.line
                    ));
                }
                Some(v)
            }
            None => None,
        };
        if schedule == ScheduleKind::StrongDecay && k0.is_none() {
            return config_err(format!(
                "section `{}`: the strong_decay schedule requires the key `k0`",
                bag.section
            ));
        }

        let c_scale = match bag.take("c_scale") {
            Some(e) => {
                let v = parse_f64(&e, "c_scale")?;
                if !(v > 0.0) {
                    return config_err(format!(
                        "line {}: `c_scale` must be positive, got {v}",
                        e.line
                    ));
                }
                v
            }
            None => 1.0,
        };
        let c0 = match bag.take("c0") {
            Some(e) => {
                let v = parse_f64(&e, "c0")?;
                if !(v > 0.0) {
                    return config_err(format!("line {}: `c0` must be positive, got {v}", e.line));
                }
                v
            }
            None => 1.0,
        };
        let gamma_init = match bag.take("gamma_init") {
            Some(e) => {
                let v = parse_f64(&e, "gamma_init")?;
                if !(v > 0.0) {
                    return config_err(format!(
                        "line {}: `gamma_init` must be positive, got {v}",
                        e.line
                    ));
                }
                Some(v)
            }
            None => None,
        };

        let epochs_entry = bag.required("epochs")?;
        let epochs = parse_usize(&epochs_entry, "epochs")?;
        if epochs == 0 {
            return config_err(format!(
                "line {}: `epochs` must be at least 1",
                epochs_entry.line
            ));
        }
        let batch_entry = bag.required("batch_size")?;
        let batch_size = parse_usize(&batch_entry, "batch_size")?;
        if batch_size == 0 {
            return config_err(format!(
                "line {}: `batch_size` must be at least 1",
                batch_entry.line
            ));
        }

        let seeds = parse_u64_list(&bag.required("seeds")?, "seeds")?;
        let output = bag.required("output")?.value;
        if output.is_empty() {
            return config_err(format!(
                "section `{}`: `output` must name a file",
                bag.section
            ));
        }

        bag.finish()?;
        sections.push(RunSection {
            name: raw.name,
            problem,
            methods,
            schedule,
            alpha0s,
            lambdas,
            k0,
            c_scale,
            c0,
            gamma_init,
            epochs,
            batch_size,
            seeds,
            output,
        });
    }

    // Two sections writing the same file would silently shadow each other.
    for i in 0..sections.len() {
        for j in (i + 1)..sections.len() {
            if sections[i].output == sections[j].output {
                return config_err(format!(
                    "sections `{}` and `{}` share the output path `{}`",
                    sections[i].name, sections[j].name, sections[i].output
                ));
            }
        }
    }
    Ok(sections)
}

/// Parse a config for the interpolation-gap table: a ridge problem plus a
/// `lambda_grid` list.
pub fn parse_sigma2_config(text: &str) -> Result<SigmaConfig> {
    let raw_sections = scan_sections(text)?;
    if raw_sections.len() != 1 {
        return config_err("the interpolation-gap command takes a single-section config");
    }
    let raw = raw_sections.into_iter().next().unwrap();
    let mut bag = KeyBag {
        section: raw.name.clone(),
        entries: raw.entries,
    };
    let problem = parse_problem(&mut bag)?;
    let ProblemSpec::Ridge {
        n_rows,
        n_cols,
        data_seed,
    } = problem
    else {
        return config_err("the interpolation-gap command needs `problem = ridge`");
    };
    let grid_entry = bag.required("lambda_grid")?;
    let lambda_grid = parse_f64_list(&grid_entry, "lambda_grid")?;
    for &l in &lambda_grid {
        if !(l >= 0.0 && l.is_finite()) {
            return config_err(format!(
                "line {}: `lambda_grid` values must be nonnegative and finite, got {l}",
                grid_entry.line
            ));
        }
    }
    bag.finish()?;
    Ok(SigmaConfig {
        n_rows,
        n_cols,
        data_seed,
        lambda_grid,
    })
}
