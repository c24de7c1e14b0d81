//! Parameter sweeps over the lemma verifiers.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{verify_lemma, LemmaId, LemmaParams, LemmaReport, Verdict};
use crate::error::{Error, Result};
use crate::rational::{format, serde_str_vec, Rational};

pub const EXPERIMENT_SCHEMA: &str = "mmm/experiment";

/// Axes of the sweep. An empty axis keeps the value from `params`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub num_vars: Vec<usize>,
    pub num_colors: Vec<usize>,
    #[serde(with = "serde_str_vec")]
    pub epsilon: Vec<Rational>,
    #[serde(with = "serde_str_vec")]
    pub xi: Vec<Rational>,
    #[serde(with = "serde_str_vec")]
    pub rho: Vec<Rational>,
    pub size: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub version: u32,
    pub lemmas: Vec<LemmaId>,
    #[serde(default)]
    pub params: LemmaParams,
    #[serde(default)]
    pub grid: Grid,
    /// CSV destination, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Worker threads; `0` picks the available parallelism.
    #[serde(default)]
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(lemmas: Vec<LemmaId>, params: LemmaParams, grid: Grid) -> Self {
        ExperimentConfig {
            schema: EXPERIMENT_SCHEMA.into(),
            version: super::io::SCHEMA_VERSION,
            lemmas,
            params,
            grid,
            output: None,
            threads: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Schema {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        if config.schema != EXPERIMENT_SCHEMA {
            return Err(Error::Schema {
                location: "schema".into(),
                message: format!("expected `{EXPERIMENT_SCHEMA}`, found `{}`", config.schema),
            });
        }
        if config.version != super::io::SCHEMA_VERSION {
            return Err(Error::Schema {
                location: "version".into(),
                message: format!("unsupported version {}", config.version),
            });
        }
        Ok(config)
    }

    /// Grid points in row order: lemma, then the axes as declared.
    pub fn points(&self) -> Vec<(LemmaId, LemmaParams)> {
        fn axis<T: Clone>(values: &[T], fallback: &T) -> Vec<T> {
            if values.is_empty() {
                vec![fallback.clone()]
            } else {
                values.to_vec()
            }
        }
        let g = &self.grid;
        let base = &self.params;
        let mut out = Vec::new();
        for &lemma in &self.lemmas {
            for num_vars in axis(&g.num_vars, &base.num_vars) {
                for num_colors in axis(&g.num_colors, &base.num_colors) {
                    for epsilon in axis(&g.epsilon, &base.epsilon) {
                        for xi in axis(&g.xi, &base.xi) {
                            for rho in axis(&g.rho, &base.rho) {
                                for size in axis(&g.size, &base.size) {
                                    for seed in axis(&g.seeds, &base.seed) {
                                        out.push((
                                            lemma,
                                            LemmaParams {
                                                num_vars,
                                                num_colors,
                                                epsilon: epsilon.clone(),
                                                xi: xi.clone(),
                                                rho: rho.clone(),
                                                size,
                                                seed,
                                                ..base.clone()
                                            },
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentRow {
    pub lemma: String,
    pub num_vars: usize,
    pub num_colors: usize,
    pub epsilon: String,
    pub xi: String,
    pub rho: String,
    pub size: usize,
    pub seed: u64,
    pub mode: String,
    pub verdict: String,
    pub checks_passed: usize,
    pub checks_total: usize,
    /// The first check of the report, which each verifier uses for its
    /// main inequality.
    pub headline: String,
    pub lhs: String,
    pub rhs: String,
    pub slack: String,
}

impl ExperimentRow {
    fn from_report(report: &LemmaReport) -> Self {
        let p = &report.params;
        let head = report.checks.first();
        let text = |f: &dyn Fn(&super::Check) -> String| head.map(f).unwrap_or_default();
        ExperimentRow {
            lemma: report.lemma.to_string(),
            num_vars: p.num_vars,
            num_colors: p.num_colors,
            epsilon: format(&p.epsilon),
            xi: format(&p.xi),
            rho: format(&p.rho),
            size: p.size,
            seed: p.seed,
            mode: report.mode.to_string(),
            verdict: report.verdict.to_string(),
            checks_passed: report.checks.iter().filter(|c| c.holds).count(),
            checks_total: report.checks.len(),
            headline: text(&|c| format!("{} ({})", c.name, c.relation.symbol())),
            lhs: text(&|c| format(&c.lhs)),
            rhs: text(&|c| format(&c.rhs)),
            slack: text(&|c| format(&c.slack())),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
    pub reports: Vec<LemmaReport>,
}

impl ExperimentTable {
    pub fn any_fail(&self) -> bool {
        self.reports.iter().any(|r| r.verdict == Verdict::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.verdict == Verdict::Pass)
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            writer
                .write_record(ROW_HEADER)
                .expect("writing to memory cannot fail");
        }
        for row in &self.rows {
            writer.serialize(row).expect("writing to memory cannot fail");
        }
        String::from_utf8(writer.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }
}

const ROW_HEADER: [&str; 16] = [
    "lemma",
    "num_vars",
    "num_colors",
    "epsilon",
    "xi",
    "rho",
    "size",
    "seed",
    "mode",
    "verdict",
    "checks_passed",
    "checks_total",
    "headline",
    "lhs",
    "rhs",
    "slack",
];

/// Runs every grid point, in parallel, and returns rows in grid order.
/// The first error in grid order is returned if any point fails to run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentTable> {
    let points = config.points();
    let threads = match config.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(points.len().max(1));
    let results: Mutex<Vec<Option<Result<LemmaReport>>>> = Mutex::new(vec![None; points.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((lemma, params)) = points.get(i) else {
                    break;
                };
                let report = verify_lemma(*lemma, params);
                results.lock().expect("no worker panicked")[i] = Some(report);
            });
        }
    });
    let mut table = ExperimentTable::default();
    for result in results.into_inner().expect("no worker panicked") {
        let report = result.expect("every point ran")?;
        table.rows.push(ExperimentRow::from_report(&report));
        table.reports.push(report);
    }
    Ok(table)
}
