//! Multi-seed comparisons of the variants, with optional parameter sweeps.
//!
//! Specs are read from flat `key = value` files:
//!
//! ```text
//! n = 200            # generator template
//! m = 100
//! s = 0.1
//! p = 0.5
//! beta = 10
//! seed_count = 10    # or: seeds = 3, 7, 11
//! row.1.n = 400      # optional problem rows overriding the template
//! variant.1.name = lbfgs
//! variant.1.kappa = 1.01
//! sweep.axis = k_bar # beta | kappa | zeta_delta | k_bar
//! sweep.values = 5, 10, 20
//! output = table.csv
//! ```
//!
//! Within one `(row, seed)` every variant and sweep value sees the same
//! instance.

mod config;
mod table;

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::diagnostics::certify_trace;
use crate::problem::{generate, GeneratorSpec, LassoProblem};
use crate::solver::{solve, solve_traced, IterationReport, SolverConfig, Variant};
use crate::{Error, Result};

pub use table::{
    emit_table, parse_csv, strip_timing, write_csv, write_markdown, ResultRow, ResultTable, CSV_COLUMNS, TIMING_COLUMNS,
};

/// Largest `n` for which `diagnostics = true` traces and certifies runs.
pub const DIAGNOSTICS_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

/// One problem shape; `beta` is the default penalty for this row.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemRow {
    pub generator: GeneratorSpec,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSpec {
    pub label: String,
    pub config: SolverConfig,
}

impl VariantSpec {
    pub fn new(config: SolverConfig) -> Self {
        Self {
            label: config.variant.label().to_string(),
            config,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Beta,
    Kappa,
    /// Values written `zeta:delta`.
    ZetaDelta,
    KBar,
}

impl SweepAxis {
    /// Whether sweeping this axis changes the given variant.
    pub fn affects(self, v: Variant) -> bool {
        match self {
            SweepAxis::Beta => true,
            SweepAxis::Kappa => v != Variant::Opt,
            SweepAxis::ZetaDelta => v == Variant::BfgsR,
            SweepAxis::KBar => matches!(v, Variant::Bfgs | Variant::Lbfgs | Variant::LbfgsR),
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta",
            SweepAxis::Kappa => "kappa",
            SweepAxis::ZetaDelta => "zeta_delta",
            SweepAxis::KBar => "k_bar",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    /// Values as written in the config; echoed verbatim as `sweep_value`.
    pub values: Vec<String>,
}

impl Sweep {
    /// The config with the sweep value applied.
    pub fn apply(&self, config: &SolverConfig, beta: &mut f64, value: &str) -> Result<SolverConfig> {
        let bad = || Error::config(format!("bad {} sweep value '{value}'", self.axis));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let mut cfg = config.clone();
        match self.axis {
            SweepAxis::Beta => *beta = num(value)?,
            SweepAxis::Kappa => cfg.set_kappa(num(value)?),
            SweepAxis::ZetaDelta => {
                let (z, d) = value.split_once(':').ok_or_else(bad)?;
                cfg.zeta = Some(num(z)?);
                cfg.delta = Some(num(d)?);
            }
            SweepAxis::KBar => cfg.k_bar = Some(value.trim().parse().map_err(|_| bad())?),
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub rows: Vec<ProblemRow>,
    pub seeds: Vec<u64>,
    pub variants: Vec<VariantSpec>,
    pub sweep: Option<Sweep>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub diagnostics: bool,
}

const PRESETS: [(&str, &str); 5] = [
    ("table1_desk", include_str!("../../presets/table1_desk.cfg")),
    ("table2_desk", include_str!("../../presets/table2_desk.cfg")),
    ("table3_desk", include_str!("../../presets/table3_desk.cfg")),
    ("table4_desk", include_str!("../../presets/table4_desk.cfg")),
    ("table5_desk", include_str!("../../presets/table5_desk.cfg")),
];

impl ExperimentSpec {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        config::parse(text, origin)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Names of the bundled desk-scale presets.
    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    /// A bundled preset by name, with or without the `.cfg` suffix.
    pub fn preset(name: &str) -> Option<Result<Self>> {
        let name = name.strip_suffix(".cfg").unwrap_or(name);
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| Self::parse(text, Path::new(&format!("{n}.cfg"))))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("experiment needs at least one seed"));
        }
        if self.variants.is_empty() {
            return Err(Error::config("experiment needs at least one variant"));
        }
        if self.rows.is_empty() {
            return Err(Error::config("experiment needs at least one problem row"));
        }
        for row in &self.rows {
            row.generator.validate()?;
        }
        for row in &self.rows {
            for v in &self.variants {
                for (_, cfg, beta) in self.cells_for(row, v)? {
                    SolverConfig { beta, ..cfg }.validate()?;
                }
            }
        }
        Ok(())
    }

    /// `(sweep_value, config, beta)` triples that a variant runs in a row.
    fn cells_for(&self, row: &ProblemRow, v: &VariantSpec) -> Result<Vec<(String, SolverConfig, f64)>> {
        match &self.sweep {
            Some(sweep) if sweep.axis.affects(v.config.variant) => sweep
                .values
                .iter()
                .map(|val| {
                    let mut beta = row.beta;
                    let cfg = sweep.apply(&v.config, &mut beta, val)?;
                    Ok((val.clone(), cfg, beta))
                })
                .collect(),
            _ => Ok(vec![("-".to_string(), v.config.clone(), row.beta)]),
        }
    }
}

/// Outcome of one seed in one cell.
#[derive(Debug, Clone)]
struct Trial {
    report: IterationReport,
    certified: Option<bool>,
}

fn run_trial(prob: &LassoProblem, cfg: &SolverConfig, diagnostics: bool) -> Result<Trial> {
    if diagnostics && prob.n() <= DIAGNOSTICS_CAP && cfg.variant.uses_metric() {
        let (_, report, trace) = solve_traced(prob, cfg)?;
        let certified = match certify_trace(prob, &trace) {
            Ok(c) => c.passed(),
            Err(Error::IndefiniteMetric { .. }) => false,
            Err(e) => return Err(e),
        };
        Ok(Trial {
            report,
            certified: Some(certified),
        })
    } else {
        let (_, report) = solve(prob, cfg)?;
        Ok(Trial { report, certified: None })
    }
}

/// Runs every `(row, sweep value, variant)` cell over all seeds.
///
/// Trials run on the rayon pool; the table order is fixed (rows, then
/// variants, then sweep values). A trial that errors drops its row and is
/// reported in [`ResultTable::failures`]; non-convergence is only recorded.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let mut table = ResultTable::default();

    for (row_idx, row) in spec.rows.iter().enumerate() {
        let instances: Vec<LassoProblem> = spec
            .seeds
            .par_iter()
            .map(|&seed| {
                let gen = GeneratorSpec {
                    seed,
                    ..row.generator.clone()
                };
                generate(&gen, row.beta).map(|(p, _)| p)
            })
            .collect::<Result<_>>()?;

        let mut cells = Vec::new();
        for v in &spec.variants {
            for (sweep_value, cfg, beta) in spec.cells_for(row, v)? {
                cells.push((v.label.clone(), sweep_value, SolverConfig { beta, ..cfg }));
            }
        }

        let jobs: Vec<(usize, usize)> = (0..cells.len())
            .flat_map(|c| (0..instances.len()).map(move |s| (c, s)))
            .collect();
        let results: Vec<Result<Trial>> = jobs
            .par_iter()
            .map(|&(c, s)| run_trial(&instances[s], &cells[c].2, spec.diagnostics))
            .collect();

        let mut rows_out = Vec::with_capacity(cells.len());
        let mut failed = None;
        for (c, (label, sweep_value, cfg)) in cells.iter().enumerate() {
            let mut trials = Vec::with_capacity(instances.len());
            for s in 0..instances.len() {
                match &results[c * instances.len() + s] {
                    Ok(t) => trials.push(t.clone()),
                    Err(e) => {
                        failed.get_or_insert_with(|| {
                            format!(
                                "row {} ({label}, sweep {sweep_value}, seed {}): {e}",
                                row_idx + 1,
                                spec.seeds[s]
                            )
                        });
                    }
                }
            }
            if failed.is_none() {
                rows_out.push(aggregate(row, label, sweep_value, cfg, &trials));
            }
        }
        match failed {
            Some(msg) => table.failures.push(msg),
            None => table.rows.extend(rows_out),
        }
    }
    Ok(table)
}

fn aggregate(row: &ProblemRow, label: &str, sweep_value: &str, cfg: &SolverConfig, trials: &[Trial]) -> ResultRow {
    let k = trials.len() as f64;
    let mean = |f: &dyn Fn(&IterationReport) -> f64| trials.iter().map(|t| f(&t.report)).sum::<f64>() / k;
    let iters: Vec<usize> = trials.iter().map(|t| t.report.iterations).collect();
    let iter_mean = mean(&|r| r.iterations as f64);
    let var = iters.iter().map(|&i| (i as f64 - iter_mean).powi(2)).sum::<f64>() / k;
    let certs: Vec<bool> = trials.iter().filter_map(|t| t.certified).collect();
    ResultRow {
        n: row.generator.n,
        m: row.generator.m,
        s: row.generator.sparsity,
        p: row.generator.density,
        beta: cfg.beta,
        sweep_value: sweep_value.to_string(),
        variant: label.to_string(),
        iter_mean,
        time_total: mean(&|r| r.time_total.as_secs_f64()),
        time_algo: mean(&|r| r.time_algo.as_secs_f64()),
        time_factor: mean(&|r| r.time_factor.as_secs_f64()),
        time_eig: mean(&|r| r.time_eig.as_secs_f64()),
        time_qn: mean(&|r| r.time_qn.as_secs_f64()),
        conv_rate: trials.iter().filter(|t| t.report.converged).count() as f64 / k,
        obj_mean: mean(&|r| r.objective),
        kkt_mean: mean(&|r| r.kkt_final),
        iter_median: median(&iters),
        iter_std: var.sqrt(),
        cert_rate: (!certs.is_empty()).then(|| certs.iter().filter(|&&c| c).count() as f64 / certs.len() as f64),
        iters,
    }
}

/// Median of a nonempty sample; the mean of the middle pair for even sizes.
pub fn median(values: &[usize]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}
