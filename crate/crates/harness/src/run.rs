//! Grid expansion, parallel execution, and CSV rendering.
//!
//! Output is byte-deterministic: rows appear in grid order (method, then
//! lambda, then alpha0, then seed), all floats are printed with 17
//! significant digits, and every run draws its batches from a stream seeded
//! only by its own `seed`.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use polyak_core::optim::{run_optimizer, EpochRow, RunSettings, Schedule};
use polyak_core::problems::{
    format_f64, gen_matrix_fac, matrixfac_objective, sigma2, LogisticProblem, MatrixFacConfig,
    RidgeProblem,
};
use polyak_core::{L2Reg, RngStream, StochasticObjective};

use crate::config::{
    HarnessError, MethodName, ProblemSpec, Result, RunSection, ScheduleKind, SigmaConfig,
};

pub const CSV_HEADER: &str =
    "run_id,seed,epoch,objective,train_loss,val_metric,param_norm,zeta_median,step_median,diverged";

/// Grid values keep their plain decimal form inside run ids so ids stay
/// readable (`lam0.1`, not `lam1.0000000000000001e-1`).
fn grid_value(v: f64) -> String {
    format!("{v}")
}

pub fn run_id(method: MethodName, schedule: ScheduleKind, lambda: f64, alpha0: f64) -> String {
    format!(
        "{}-{}-lam{}-a{}",
        method.as_str(),
        schedule.as_str(),
        grid_value(lambda),
        grid_value(alpha0)
    )
}

/// Instantiate the section's problem. Generation depends only on the
/// `ProblemSpec` fields, so equal values give bitwise-equal data.
pub fn build_objective(spec: &ProblemSpec) -> Arc<dyn StochasticObjective + Send + Sync> {
    match *spec {
        ProblemSpec::MatrixFac {
            p,
            q,
            n_samples,
            rank,
            upsilon,
            epsilon,
            data_seed,
        } => {
            let cfg = MatrixFacConfig {
                p,
                q,
                n_samples,
                diag_last: upsilon,
                rank,
                noise: epsilon,
                seed: data_seed,
            };
            let (dataset, _) = gen_matrix_fac(&cfg);
            Arc::new(matrixfac_objective(dataset, rank))
        }
        ProblemSpec::Ridge {
            n_rows,
            n_cols,
            data_seed,
        } => {
            let (problem, _) = RidgeProblem::generate(n_rows, n_cols, data_seed);
            Arc::new(problem)
        }
        ProblemSpec::Logreg {
            n_rows,
            n_cols,
            data_seed,
        } => Arc::new(LogisticProblem::generate(n_rows, n_cols, data_seed)),
    }
}

/// One finished (run_id, seed) trajectory's epoch log.
#[derive(Clone, Debug)]
pub struct CompletedRun {
    pub run_id: String,
    pub seed: u64,
    pub rows: Vec<EpochRow>,
    pub diverged: bool,
}

struct Task {
    method: MethodName,
    lambda: f64,
    alpha0: f64,
    seed: u64,
}

fn build_schedule(section: &RunSection, task: &Task, dataset_size: usize) -> Result<Schedule> {
    let batches_per_epoch = dataset_size.div_ceil(section.batch_size);
    let total_iters = section.epochs * batches_per_epoch;
    section
        .schedule
        .to_schedule(task.alpha0, task.lambda, section.k0, total_iters)
}

/// Run every grid point of one section, in parallel, preserving grid order.
pub fn execute_section(section: &RunSection) -> Result<Vec<CompletedRun>> {
    let objective = build_objective(&section.problem);
    if section.batch_size > objective.dataset_size() {
        return Err(HarnessError::Config(format!(
            "section `{}`: batch_size {} exceeds the dataset size {}",
            section.name,
            section.batch_size,
            objective.dataset_size()
        )));
    }

    let mut tasks = Vec::new();
    for &method in &section.methods {
        for &lambda in &section.lambdas {
            for &alpha0 in &section.alpha0s {
                for &seed in &section.seeds {
                    tasks.push(Task {
                        method,
                        lambda,
                        alpha0,
                        seed,
                    });
                }
            }
        }
    }

    tasks
        .par_iter()
        .map(|task| {
            let schedule = build_schedule(section, task, objective.dataset_size())?;
            let reg = L2Reg::new(task.lambda);
            let method = task.method.to_method(section, task.alpha0);
            let settings =
                RunSettings::new(method, schedule, section.epochs, section.batch_size);
            let mut rng = RngStream::new(task.seed);
            let result = run_optimizer(&*objective, &reg, &settings, &mut rng)?;
            Ok(CompletedRun {
                run_id: run_id(task.method, section.schedule, task.lambda, task.alpha0),
                seed: task.seed,
                rows: result.epoch_rows,
                diverged: result.diverged,
            })
        })
        .collect()
}

pub fn render_csv(runs: &[CompletedRun]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for run in runs {
        for row in &run.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                run.run_id,
                run.seed,
                row.epoch,
                format_f64(row.objective),
                format_f64(row.train_loss),
                format_f64(row.val_metric),
                format_f64(row.param_norm),
                format_f64(row.zeta_median),
                format_f64(row.step_median),
                u8::from(row.diverged),
            );
        }
    }
    out
}

/// Execute a parsed config end to end, writing one CSV per section.
/// Returns `(path, data_rows)` per file, in section order.
pub fn execute_config(
    sections: &[RunSection],
    single_point: bool,
) -> Result<Vec<(String, usize)>> {
    if single_point {
        for section in sections {
            section.require_single_point()?;
        }
    }
    let mut written = Vec::with_capacity(sections.len());
    for section in sections {
        let runs = execute_section(section)?;
        let csv = render_csv(&runs);
        std::fs::write(&section.output, &csv)?;
        let rows: usize = runs.iter().map(|r| r.rows.len()).sum();
        written.push((section.output.clone(), rows));
    }
    Ok(written)
}

/// Gap-at-the-regularized-minimum table: one `lambda,sigma2` row per grid
/// value, for a generated least-squares problem.
pub fn sigma2_table(cfg: &SigmaConfig) -> Result<String> {
    let (problem, _) = RidgeProblem::generate(cfg.n_rows, cfg.n_cols, cfg.data_seed);
    let mut out = String::from("lambda,sigma2\n");
    for &lambda in &cfg.lambda_grid {
        let value = sigma2(&problem, lambda)?;
        let _ = writeln!(out, "{},{}", grid_value(lambda), format_f64(value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn tiny_section(extra: &str) -> RunSection {
        let text = format!(
            "\
problem = ridge
n_rows = 12
n_cols = 4
method = sps
schedule = constant
alpha0 = 0.5
lambda = 0.1
epochs = 3
batch_size = 4
seeds = 1, 2
output = out.csv
{extra}"
        );
        parse_config(&text).unwrap().into_iter().next().unwrap()
    }

    #[test]
    fn run_ids_use_plain_decimal_grid_values() {
        assert_eq!(
            run_id(MethodName::Sps, ScheduleKind::Constant, 0.1, 10.0),
            "sps-constant-lam0.1-a10"
        );
        assert_eq!(
            run_id(
                MethodName::ProxSgd,
                ScheduleKind::SqrtEpoch,
                0.0,
                0.05
            ),
            "prox_sgd-sqrt_epoch-lam0-a0.05"
        );
    }

    #[test]
    fn execution_is_deterministic_and_ordered() {
        let section = tiny_section("");
        let a = render_csv(&execute_section(&section).unwrap());
        let b = render_csv(&execute_section(&section).unwrap());
        assert_eq!(a, b);

        let lines: Vec<&str> = a.lines().collect();
        // header + 2 seeds x 3 epochs
        assert_eq!(lines.len(), 1 + 6);
        assert_eq!(lines[0], CSV_HEADER);
        // seed 1's three epochs come before seed 2's
        assert!(lines[1].starts_with("sps-constant-lam0.1-a0.5,1,1,"));
        assert!(lines[4].starts_with("sps-constant-lam0.1-a0.5,2,1,"));
    }

    #[test]
    fn rendered_floats_parse_back() {
        let section = tiny_section("");
        let csv = render_csv(&execute_section(&section).unwrap());
        for line in csv.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 10);
            for field in &fields[3..9] {
                field.parse::<f64>().unwrap();
            }
            assert!(fields[9] == "0" || fields[9] == "1");
        }
    }

    #[test]
    fn oversized_batch_is_a_config_error() {
        let mut section = tiny_section("");
        section.batch_size = 1000;
        let err = execute_section(&section).unwrap_err().to_string();
        assert!(err.contains("exceeds the dataset size"), "{err}");
    }

    #[test]
    fn grid_order_is_method_lambda_alpha_seed() {
        let text = "\
problem = ridge
n_rows = 12
n_cols = 4
method = sgd, sps
schedule = constant
alpha0 = 0.1, 0.2
lambda = 0
epochs = 1
batch_size = 4
seeds = 5
output = out.csv
";
        let section = parse_config(text).unwrap().into_iter().next().unwrap();
        let ids: Vec<String> = execute_section(&section)
            .unwrap()
            .into_iter()
            .map(|r| r.run_id)
            .collect();
        assert_eq!(
            ids,
            vec![
                "sgd-constant-lam0-a0.1",
                "sgd-constant-lam0-a0.2",
                "sps-constant-lam0-a0.1",
                "sps-constant-lam0-a0.2",
            ]
        );
    }

    #[test]
    fn sigma2_table_shrinks_with_lambda_on_consistent_data() {
        // Planted targets make the unregularized residual zero, so the gap
        // vanishes as lambda -> 0 and grows with it.
        let cfg = SigmaConfig {
            n_rows: 30,
            n_cols: 40,
            data_seed: 3,
            lambda_grid: vec![1e-6, 1e-2, 1.0],
        };
        let table = sigma2_table(&cfg).unwrap();
        let values: Vec<f64> = table
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(values.len(), 3);
        assert!(values[0] >= 0.0 && values[0] < values[1]);
        assert!(values[1] < values[2]);
    }
}
