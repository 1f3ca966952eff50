use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vmadmm::diagnostics::{
    certify_trace, g_distance_series, max_g_increase, mu_hat_series, proximal_terms, reference_solution,
    write_series_csv,
};
use vmadmm::experiment::{emit_table, run_experiment, write_csv, write_markdown, ExperimentSpec, OutputFormat};
use vmadmm::problem::bundle::{read_bundle, write_bundle, Bundle};
use vmadmm::{generate, solve, solve_traced, Error, GeneratorSpec, IterationReport, LassoProblem, SolverConfig, Variant};

#[derive(Parser)]
#[command(name = "vmadmm", version, about = "Variable-metric semi-proximal ADMM for Lasso problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as a bundle directory.
    Gen {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance with one variant and print the report.
    Solve {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write per-iteration residuals as CSV.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Run a multi-seed experiment from a config file or bundled preset.
    Bench {
        /// Config path, or the name of a bundled preset (e.g. table1_desk).
        #[arg(long)]
        config: Option<String>,
        /// Output path; defaults to the config's `output`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// List the bundled presets and exit.
        #[arg(long)]
        list_presets: bool,
    },
    /// Solve with full tracing and run the convergence diagnostics.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Directory for the per-step series (g_distance, mu_hat, gamma).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Markdown => OutputFormat::Markdown,
        }
    }
}

#[derive(Args, Clone)]
struct ProblemArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Fraction of nonzeros in the ground truth.
    #[arg(long, default_value_t = 0.1)]
    s: f64,
    /// Fraction of nonzeros in A.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 1e-3)]
    noise_var: f64,
    #[arg(long, default_value_t = 0.1)]
    tau_factor: f64,
    #[arg(long, default_value_t = 10.0)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ProblemArgs {
    fn spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            n: self.n,
            m: self.m,
            sparsity: self.s,
            density: self.p,
            noise_var: self.noise_var,
            tau_factor: self.tau_factor,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct SourceArgs {
    /// Read the instance from a bundle directory instead of generating it.
    #[arg(long)]
    bundle: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemArgs,
}

impl SourceArgs {
    fn load(&self) -> vmadmm::Result<LassoProblem> {
        match &self.bundle {
            Some(dir) => read_bundle(dir)?.problem.with_beta(self.problem.beta),
            None => Ok(generate(&self.problem.spec(), self.problem.beta)?.0),
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    /// Scale factor of the variant's proximal term (κ₁, κ₂ or κ₃).
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// L-BFGS memory.
    #[arg(long)]
    memory: Option<usize>,
    #[arg(long)]
    k_bar: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    eps_abs: Option<f64>,
    #[arg(long)]
    eps_rel: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

impl SolverArgs {
    fn config(&self, beta: f64) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.variant, beta);
        if let Some(k) = self.kappa {
            cfg.set_kappa(k);
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(h) = self.memory {
            cfg.memory = h;
        }
        cfg.k_bar = self.k_bar;
        cfg.delta = self.delta;
        cfg.zeta = self.zeta;
        if self.variant == Variant::BfgsR {
            cfg.delta = cfg.delta.or(Some(1e-5));
            cfg.zeta = cfg.zeta.or(Some(0.5));
        }
        if let Some(e) = self.eps_abs {
            cfg.eps_abs = e;
        }
        if let Some(e) = self.eps_rel {
            cfg.eps_rel = e;
        }
        if let Some(k) = self.max_iter {
            cfg.max_iter = k;
        }
        cfg
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|_| {
        let keys: Vec<&str> = Variant::ALL.iter().map(|v| v.key()).collect();
        format!("expected one of {}", keys.join(", "))
    })
}

/// Failure of a subcommand, carrying the exit status.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Parse { .. } => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen { problem, out } => cmd_gen(&problem, &out),
        Command::Solve { source, solver, history } => cmd_solve(&source, &solver, history.as_deref()),
        Command::Bench {
            config,
            out,
            format,
            list_presets,
        } => cmd_bench(config.as_deref(), out, format, list_presets),
        Command::Verify { source, solver, out } => cmd_verify(&source, &solver, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cmd_gen(args: &ProblemArgs, out: &Path) -> Result<(), Failure> {
    let spec = args.spec();
    let (problem, xbar) = generate(&spec, args.beta)?;
    let (n, m, nnz, tau) = (problem.n(), problem.m(), problem.a().nnz(), problem.tau());
    write_bundle(
        out,
        &Bundle {
            problem,
            xbar: Some(xbar),
            recipe: Some(spec),
        },
    )?;
    println!("wrote {} (n = {n}, m = {m}, nnz = {nnz}, tau = {tau:.6e})", out.display());
    Ok(())
}

fn print_report(out: &mut impl Write, prob: &LassoProblem, r: &IterationReport) -> io::Result<()> {
    let variant = r.variant.map_or("-", Variant::label);
    writeln!(out, "variant        {variant}")?;
    writeln!(out, "size           n = {}, m = {}, nnz = {}", prob.n(), prob.m(), prob.a().nnz())?;
    writeln!(out, "tau            {:.6e}", prob.tau())?;
    writeln!(out, "beta           {}", prob.beta())?;
    writeln!(out, "converged      {}", r.converged)?;
    writeln!(out, "iterations     {}", r.iterations)?;
    writeln!(out, "objective      {:.10e}", r.objective)?;
    writeln!(out, "kkt(y)/tau     {:.3e}", r.kkt_final / prob.tau())?;
    writeln!(out, "kkt(x)/tau     {:.3e}", r.kkt_final_x / prob.tau())?;
    if let Some(l) = r.lambda_max {
        writeln!(out, "lambda_max     {l:.6e}")?;
    }
    if let Some(xi) = r.xi {
        writeln!(out, "xi             {xi:.6e}")?;
    }
    if r.metric_updates > 0 {
        writeln!(out, "metric updates {}", r.metric_updates)?;
    }
    writeln!(
        out,
        "time (s)       total {:.4}, algo {:.4}, factor {:.4}, eig {:.4}, qn {:.4}",
        r.time_total.as_secs_f64(),
        r.time_algo.as_secs_f64(),
        r.time_factor.as_secs_f64(),
        r.time_eig.as_secs_f64(),
        r.time_qn.as_secs_f64()
    )
}

fn cmd_solve(source: &SourceArgs, solver: &SolverArgs, history: Option<&Path>) -> Result<(), Failure> {
    let prob = source.load()?;
    let cfg = solver.config(prob.beta());
    let (state, report) = solve(&prob, &cfg)?;
    let nonzeros = state.y.iter().filter(|v| **v != 0.0).count();
    let mut out = io::stdout().lock();
    print_report(&mut out, &prob, &report)?;
    writeln!(out, "nonzeros(y)    {nonzeros}")?;
    if let Some(path) = history {
        let mut text = String::from("k,r_norm,s_norm,eps_pri,eps_dual\n");
        for k in 0..report.primal_residuals.len() {
            text.push_str(&format!(
                "{},{:e},{:e},{:e},{:e}\n",
                k + 1,
                report.primal_residuals[k],
                report.dual_residuals[k],
                report.eps_pri[k],
                report.eps_dual[k]
            ));
        }
        fs::write(path, text).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn load_spec(config: &str) -> Result<ExperimentSpec, Failure> {
    let path = Path::new(config);
    if path.is_file() {
        return Ok(ExperimentSpec::from_file(path)?);
    }
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or(config);
    match ExperimentSpec::preset(name) {
        Some(spec) => Ok(spec?),
        None => Err(Failure::Usage(format!(
            "'{config}' is neither a config file nor a bundled preset ({})",
            ExperimentSpec::preset_names().collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn cmd_bench(config: Option<&str>, out: Option<PathBuf>, format: Option<Format>, list: bool) -> Result<(), Failure> {
    if list {
        for name in ExperimentSpec::preset_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let config = config.ok_or_else(|| Failure::Usage("bench needs --config".into()))?;
    let spec = load_spec(config)?;
    let format = format.map_or(spec.format, OutputFormat::from);
    let table = run_experiment(&spec)?;
    match out.or_else(|| spec.output.clone()) {
        Some(path) => {
            emit_table(&table, format, &path)?;
            eprintln!("wrote {} ({} rows)", path.display(), table.rows.len());
        }
        None => {
            let text = match format {
                OutputFormat::Csv => write_csv(&table),
                OutputFormat::Markdown => write_markdown(&table),
            };
            io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    if table.failures.is_empty() {
        Ok(())
    } else {
        for f in &table.failures {
            eprintln!("row failed: {f}");
        }
        Err(Failure::Run(format!("{} problem row(s) failed", table.failures.len())))
    }
}

fn cmd_verify(source: &SourceArgs, solver: &SolverArgs, out: Option<&Path>) -> Result<(), Failure> {
    let prob = source.load()?;
    let cfg = solver.config(prob.beta());
    let (_, report, trace) = solve_traced(&prob, &cfg)?;
    let mut stdout = io::stdout().lock();
    print_report(&mut stdout, &prob, &report)?;

    let terms = proximal_terms(&prob, &trace)?;
    let w_star = reference_solution(&prob)?;
    let g_series = g_distance_series(&prob, &trace, &terms, &w_star)?;
    let g_increase = max_g_increase(&prob, &trace, &terms, &w_star)?;
    let mu = mu_hat_series(&prob, &trace, &terms)?;
    writeln!(stdout, "G-distance     {:.6e} -> {:.6e}", g_series[0], g_series[g_series.len() - 1])?;
    writeln!(stdout, "max G increase {g_increase:.3e}")?;
    writeln!(stdout, "mu_hat         {:.6e}", mu.last().copied().unwrap_or(0.0))?;

    let mut gamma = Vec::new();
    match certify_trace(&prob, &trace) {
        Ok(cert) => {
            writeln!(
                stdout,
                "certificate    {} (growth {}, lower bound {}, from step {})",
                if cert.passed() { "pass" } else { "fail" },
                cert.growth_ok,
                cert.lower_bound_ok,
                cert.first_step
            )?;
            writeln!(stdout, "gamma sum      {:.6e}", cert.gamma_sum)?;
            if let (Some(q), Some(bound)) = (cert.q_estimate, cert.gamma_bound) {
                writeln!(stdout, "Q estimate     {q:.6e} (gamma bound {bound:.6e})")?;
            }
            if !cert.growth_violations.is_empty() {
                writeln!(stdout, "violations     {:?}", cert.growth_violations)?;
            }
            gamma = cert.gamma_series;
        }
        Err(Error::IndefiniteMetric { step, min_eig }) => {
            writeln!(stdout, "certificate    not applicable: T_{step} indefinite (min eig {min_eig:.3e})")?;
        }
        Err(e) => return Err(e.into()),
    }

    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))?;
        write_series_csv(&dir.join("g_distance.csv"), &g_series)?;
        write_series_csv(&dir.join("mu_hat.csv"), &mu)?;
        write_series_csv(&dir.join("gamma.csv"), &gamma)?;
        writeln!(stdout, "series written to {}", dir.display())?;
    }
    Ok(())
}
