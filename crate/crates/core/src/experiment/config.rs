use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::kv::{self, Entry};
use crate::problem::GeneratorSpec;
use crate::solver::{SolverConfig, Variant};
use crate::{Error, Result};

use super::{ExperimentSpec, OutputFormat, ProblemRow, Sweep, SweepAxis, VariantSpec};

fn parse_err(path: &Path, e: &Entry, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: e.line,
        msg: msg.into(),
    }
}

/// Applies a generator/problem key; returns false if the key is not one.
fn apply_problem_key(gen: &mut GeneratorSpec, beta: &mut Option<f64>, key: &str, e: &Entry, path: &Path) -> Result<bool> {
    match key {
        "n" => gen.n = kv::value(e, path)?,
        "m" => gen.m = kv::value(e, path)?,
        "s" | "sparsity" => gen.sparsity = kv::value(e, path)?,
        "p" | "density" => gen.density = kv::value(e, path)?,
        "noise_var" => gen.noise_var = kv::value(e, path)?,
        "tau_factor" => gen.tau_factor = kv::value(e, path)?,
        "beta" => *beta = Some(kv::value(e, path)?),
        _ => return Ok(false),
    }
    Ok(true)
}

#[derive(Default)]
struct VariantDraft {
    name: Option<(Variant, usize)>,
    label: Option<String>,
    kappa: Option<f64>,
    entries: Vec<Entry>,
}

pub(super) fn parse(text: &str, path: &Path) -> Result<ExperimentSpec> {
    let entries = kv::parse(text, path)?;
    let mut template = GeneratorSpec::default();
    let mut beta: Option<f64> = None;
    let mut seeds: Option<Vec<u64>> = None;
    let mut rows: BTreeMap<usize, Vec<Entry>> = BTreeMap::new();
    let mut drafts: BTreeMap<usize, VariantDraft> = BTreeMap::new();
    let mut axis: Option<(SweepAxis, Entry)> = None;
    let mut sweep_values: Option<Vec<String>> = None;
    let mut output = None;
    let mut format = OutputFormat::Csv;
    let mut diagnostics = false;
    let mut defaults = SolverConfig::new(Variant::Opt, 1.0);

    for e in &entries {
        let key = e.key.as_str();
        if apply_problem_key(&mut template, &mut beta, key, e, path)? {
            continue;
        }
        match key {
            "seeds" => seeds = Some(kv::list(e, path)?),
            "seed_count" => {
                let k: u64 = kv::value(e, path)?;
                seeds = Some((0..k).collect());
            }
            "eps_abs" => defaults.eps_abs = kv::value(e, path)?,
            "eps_rel" => defaults.eps_rel = kv::value(e, path)?,
            "max_iter" => defaults.max_iter = kv::value(e, path)?,
            "power_seed" => defaults.power.seed = kv::value(e, path)?,
            "output" => output = Some(PathBuf::from(&e.value)),
            "format" => {
                format = match e.value.as_str() {
                    "csv" => OutputFormat::Csv,
                    "markdown" | "md" => OutputFormat::Markdown,
                    other => return Err(parse_err(path, e, format!("unknown format '{other}'"))),
                }
            }
            "diagnostics" => diagnostics = kv::value(e, path)?,
            "sweep.axis" => {
                let a = match e.value.as_str() {
                    "beta" => SweepAxis::Beta,
                    "kappa" => SweepAxis::Kappa,
                    "zeta_delta" => SweepAxis::ZetaDelta,
                    "k_bar" => SweepAxis::KBar,
                    other => return Err(parse_err(path, e, format!("unknown sweep axis '{other}'"))),
                };
                axis = Some((a, e.clone()));
            }
            "sweep.values" => {
                sweep_values = Some(e.value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            }
            _ => {
                if let Some(rest) = key.strip_prefix("row.") {
                    let (idx, field) = numbered(rest, e, path)?;
                    rows.entry(idx).or_default().push(Entry {
                        key: field.to_string(),
                        ..e.clone()
                    });
                } else if let Some(rest) = key.strip_prefix("variant.") {
                    let (idx, field) = numbered(rest, e, path)?;
                    let d = drafts.entry(idx).or_default();
                    match field {
                        "name" => {
                            let v: Variant = e.value.parse().map_err(|_| parse_err(path, e, format!("unknown variant '{}'", e.value)))?;
                            d.name = Some((v, e.line));
                        }
                        "label" => d.label = Some(e.value.clone()),
                        "kappa" => d.kappa = Some(kv::value(e, path)?),
                        _ => d.entries.push(Entry {
                            key: field.to_string(),
                            ..e.clone()
                        }),
                    }
                } else {
                    return Err(parse_err(path, e, format!("unknown key '{key}'")));
                }
            }
        }
    }

    let default_beta = beta.unwrap_or(1.0);
    let rows: Vec<ProblemRow> = if rows.is_empty() {
        vec![ProblemRow {
            generator: template.clone(),
            beta: default_beta,
        }]
    } else {
        rows.into_values()
            .map(|fields| {
                let mut gen = template.clone();
                let mut row_beta = None;
                for f in &fields {
                    if !apply_problem_key(&mut gen, &mut row_beta, &f.key, f, path)? {
                        return Err(parse_err(path, f, format!("unknown row key '{}'", f.key)));
                    }
                }
                Ok(ProblemRow {
                    generator: gen,
                    beta: row_beta.unwrap_or(default_beta),
                })
            })
            .collect::<Result<_>>()?
    };

    let mut variants = Vec::with_capacity(drafts.len());
    for (idx, d) in drafts {
        let (variant, _) = d.name.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: d.entries.first().map_or(0, |e| e.line),
            msg: format!("variant.{idx} has no name"),
        })?;
        let mut cfg = SolverConfig {
            variant,
            ..defaults.clone()
        };
        if let Some(k) = d.kappa {
            cfg.set_kappa(k);
        }
        for e in &d.entries {
            match e.key.as_str() {
                "alpha" => cfg.alpha = kv::value(e, path)?,
                "kappa1" => cfg.kappa1 = kv::value(e, path)?,
                "kappa2" => cfg.kappa2 = kv::value(e, path)?,
                "kappa3" => cfg.kappa3 = kv::value(e, path)?,
                "memory" | "h" => cfg.memory = kv::value(e, path)?,
                "k_bar" => cfg.k_bar = Some(kv::value(e, path)?),
                "delta" => cfg.delta = Some(kv::value(e, path)?),
                "zeta" => cfg.zeta = Some(kv::value(e, path)?),
                "eps_abs" => cfg.eps_abs = kv::value(e, path)?,
                "eps_rel" => cfg.eps_rel = kv::value(e, path)?,
                "max_iter" => cfg.max_iter = kv::value(e, path)?,
                other => return Err(parse_err(path, e, format!("unknown variant key '{other}'"))),
            }
        }
        variants.push(VariantSpec {
            label: d.label.unwrap_or_else(|| variant.label().to_string()),
            config: cfg,
        });
    }

    let sweep = match (axis, sweep_values) {
        (None, None) => None,
        (Some((axis, _)), Some(values)) => Some(Sweep { axis, values }),
        (Some((_, e)), None) => return Err(parse_err(path, &e, "sweep.axis given without sweep.values")),
        (None, Some(_)) => return Err(Error::config("sweep.values given without sweep.axis")),
    };

    let spec = ExperimentSpec {
        rows,
        seeds: seeds.unwrap_or_else(|| (0..10).collect()),
        variants,
        sweep,
        output,
        format,
        diagnostics,
    };
    spec.validate()?;
    Ok(spec)
}

fn numbered<'a>(rest: &'a str, e: &Entry, path: &Path) -> Result<(usize, &'a str)> {
    let (idx, field) = rest
        .split_once('.')
        .ok_or_else(|| parse_err(path, e, format!("expected '<index>.<field>' in '{}'", e.key)))?;
    let idx = idx
        .parse()
        .map_err(|_| parse_err(path, e, format!("bad index '{idx}' in '{}'", e.key)))?;
    Ok((idx, field))
}
