//! On-disk instance bundles.
//!
//! A bundle is a directory holding `A.mtx` (Matrix Market), `b.txt` and
//! optionally `xbar.txt` (one decimal float per line, 17 significant digits),
//! and `meta.txt`, a flat `key = value` file.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{GeneratorSpec, LassoProblem};
use crate::linalg::mtx;
use crate::{kv, Error, Result};

#[derive(Debug, Clone)]
pub struct Bundle {
    pub problem: LassoProblem,
    pub xbar: Option<Vec<f64>>,
    /// Recipe that produced the instance, when known.
    pub recipe: Option<GeneratorSpec>,
}

pub fn write_bundle(dir: &Path, bundle: &Bundle) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let prob = &bundle.problem;

    let a_path = dir.join("A.mtx");
    let file = fs::File::create(&a_path).map_err(|e| Error::io(&a_path, e))?;
    let mut w = BufWriter::new(file);
    mtx::write(prob.a(), &mut w).map_err(|source| Error::Mtx {
        path: a_path.clone(),
        source,
    })?;
    w.flush().map_err(|e| Error::io(&a_path, e))?;

    write_vector(&dir.join("b.txt"), prob.b())?;
    if let Some(xbar) = &bundle.xbar {
        write_vector(&dir.join("xbar.txt"), xbar)?;
    }

    let mut meta = String::new();
    meta.push_str(&format!("n = {}\nm = {}\n", prob.n(), prob.m()));
    meta.push_str(&format!("tau = {:.16e}\nbeta = {:.16e}\n", prob.tau(), prob.beta()));
    if let Some(r) = &bundle.recipe {
        meta.push_str(&format!(
            "s = {}\np = {}\nnoise_var = {}\ntau_factor = {}\nseed = {}\n",
            r.sparsity, r.density, r.noise_var, r.tau_factor, r.seed
        ));
    }
    let meta_path = dir.join("meta.txt");
    fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))
}

pub fn read_bundle(dir: &Path) -> Result<Bundle> {
    let a_path = dir.join("A.mtx");
    let file = fs::File::open(&a_path).map_err(|e| Error::io(&a_path, e))?;
    let a = mtx::read(BufReader::new(file)).map_err(|source| Error::Mtx {
        path: a_path.clone(),
        source,
    })?;
    let b = read_vector(&dir.join("b.txt"))?;
    let xbar_path = dir.join("xbar.txt");
    let xbar = if xbar_path.exists() {
        Some(read_vector(&xbar_path)?)
    } else {
        None
    };

    let meta_path = dir.join("meta.txt");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let entries = kv::parse(&text, &meta_path)?;
    let mut tau = None;
    let mut beta = None;
    let mut recipe = GeneratorSpec {
        n: a.cols(),
        m: a.rows(),
        ..Default::default()
    };
    let mut have_recipe = false;
    for e in &entries {
        match e.key.as_str() {
            "tau" => tau = Some(kv::value(e, &meta_path)?),
            "beta" => beta = Some(kv::value(e, &meta_path)?),
            "n" => check_dim(e, &meta_path, a.cols())?,
            "m" => check_dim(e, &meta_path, a.rows())?,
            "s" => (recipe.sparsity, have_recipe) = (kv::value(e, &meta_path)?, true),
            "p" => recipe.density = kv::value(e, &meta_path)?,
            "noise_var" => recipe.noise_var = kv::value(e, &meta_path)?,
            "tau_factor" => recipe.tau_factor = kv::value(e, &meta_path)?,
            "seed" => recipe.seed = kv::value(e, &meta_path)?,
            other => {
                return Err(Error::Parse {
                    path: meta_path.clone(),
                    line: e.line,
                    msg: format!("unknown key '{other}'"),
                })
            }
        }
    }
    let missing = |k: &str| Error::Parse {
        path: meta_path.clone(),
        line: 0,
        msg: format!("missing key '{k}'"),
    };
    let tau = tau.ok_or_else(|| missing("tau"))?;
    let beta = beta.ok_or_else(|| missing("beta"))?;
    Ok(Bundle {
        problem: LassoProblem::new(a, b, tau, beta)?,
        xbar,
        recipe: have_recipe.then_some(recipe),
    })
}

fn check_dim(e: &kv::Entry, path: &Path, actual: usize) -> Result<()> {
    let v: usize = kv::value(e, path)?;
    if v != actual {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: e.line,
            msg: format!("{} = {v} disagrees with A.mtx ({actual})", e.key),
        });
    }
    Ok(())
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    let mut text = String::with_capacity(v.len() * 25);
    for x in v {
        text.push_str(&format!("{x:.16e}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|_| Error::Parse {
                path: PathBuf::from(path),
                line: i + 1,
                msg: format!("not a number: '{}'", l.trim()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::generate;

    #[test]
    fn bundle_round_trip_is_bit_exact() {
        let spec = GeneratorSpec { n: 12, m: 7, seed: 11, ..Default::default() };
        let (problem, xbar) = generate(&spec, 3.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bundle = Bundle { problem, xbar: Some(xbar), recipe: Some(spec.clone()) };
        write_bundle(dir.path(), &bundle).unwrap();
        let back = read_bundle(dir.path()).unwrap();
        assert_eq!(back.problem.a(), bundle.problem.a());
        assert_eq!(back.problem.b(), bundle.problem.b());
        assert_eq!(back.problem.tau().to_bits(), bundle.problem.tau().to_bits());
        assert_eq!(back.problem.beta(), 3.5);
        assert_eq!(back.xbar, bundle.xbar);
        assert_eq!(back.recipe, Some(spec));
    }

    #[test]
    fn missing_files_are_io_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(read_bundle(dir.path()), Err(Error::Io { .. })));
    }
}
