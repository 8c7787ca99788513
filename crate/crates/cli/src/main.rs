//! `censreg`: fit, predict, tune and simulate penalized Tobit models from
//! CSV files.

mod csvio;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use censreg::diagnostics;
use censreg::lla::{fit_folded_concave, LlaConfig};
use censreg::ls::fit_ls_penalized_with;
use censreg::model_file::{ModelFile, ModelKind};
use censreg::sim::{
    kfold_cv, lambda_sequence, run_experiment, CvOptions, ExperimentConfig, Method, MethodKind,
    SimDesign, Tuning,
};
use censreg::{
    fit_lasso, fit_path_at, fit_weighted_lasso, Dataset, FitResult, PenaltyFamily, PenaltySpec,
    PredictMode, SolverConfig,
};

use csvio::{write_rows, Table};
use exit::CliError;

const THREADS_ENV: &str = "CENSREG_THREADS";

#[derive(Parser)]
#[command(
    name = "censreg",
    version,
    about = "Penalized Tobit regression for left-censored data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write it as JSON.
    Fit(FitArgs),
    /// Predict from a saved model.
    Predict(PredictArgs),
    /// Fit along a lambda grid and write one CSV row per lambda.
    Path(PathArgs),
    /// K-fold cross-validation curve.
    Cv(CvArgs),
    /// Run a synthetic-data experiment and report mean (se) metrics.
    Simulate(SimulateArgs),
    /// Run the numerical self-checks.
    Check(CheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Tobit,
    LeastSquares,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PenaltyArg {
    Lasso,
    Scad,
    Mcp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Latent,
    CensoredMean,
    Prob,
}

impl From<ModeArg> for PredictMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Latent => PredictMode::Latent,
            ModeArg::CensoredMean => PredictMode::CensoredMean,
            ModeArg::Prob => PredictMode::ProbUncensored,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Response column.
    #[arg(long)]
    response: String,
    /// Columns to leave out of the design (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
    /// Censoring threshold; responses at this value are censored and
    /// responses below it are rejected.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    censor_value: f64,
}

#[derive(Args)]
struct SolverArgs {
    /// Convergence tolerance on the largest parameter change per cycle.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_cycles: usize,
    /// Fit on the raw column scale.
    #[arg(long)]
    no_standardize: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_cycles: self.max_cycles,
            standardize: !self.no_standardize,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct PenaltyArgs {
    #[arg(long, value_enum, default_value = "tobit")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "lasso")]
    penalty: PenaltyArg,
    /// Concavity for SCAD and MCP (default 3 for Tobit, 3.7 for least squares).
    #[arg(long)]
    a: Option<f64>,
    /// Number of LLA steps for SCAD and MCP.
    #[arg(long, default_value_t = 3)]
    lla_steps: usize,
}

impl PenaltyArgs {
    fn a(&self) -> f64 {
        self.a.unwrap_or(match self.model {
            ModelArg::Tobit => 3.0,
            ModelArg::LeastSquares => 3.7,
        })
    }

    fn family(&self) -> PenaltyFamily {
        match self.penalty {
            PenaltyArg::Lasso => PenaltyFamily::Lasso,
            PenaltyArg::Scad => PenaltyFamily::Scad,
            PenaltyArg::Mcp => PenaltyFamily::Mcp,
        }
    }

    /// The cross-validation method, when one exists for this combination.
    fn method(&self) -> Result<Method, CliError> {
        match (self.model, self.penalty) {
            (ModelArg::Tobit, PenaltyArg::Lasso) => Ok(Method::TobitLasso),
            (ModelArg::Tobit, PenaltyArg::Scad) => Ok(Method::TobitScad),
            (ModelArg::LeastSquares, PenaltyArg::Lasso) => Ok(Method::LsLasso),
            (ModelArg::LeastSquares, PenaltyArg::Scad) => Ok(Method::LsScad),
            (_, PenaltyArg::Mcp) => Err(CliError::input(
                "cross-validation supports lasso and scad only",
            )),
        }
    }
}

#[derive(Args)]
struct CvFlags {
    /// Number of folds.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    n_lambda: usize,
    /// Smallest lambda as a fraction of lambda_max.
    #[arg(long)]
    lambda_min_ratio: Option<f64>,
    /// Seed for fold assignment.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to $CENSREG_THREADS, then all cores).
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    penalty: PenaltyArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Penalty level on the solver's scale.
    #[arg(long, conflicts_with = "cv", required_unless_present = "cv")]
    lambda: Option<f64>,
    /// Choose lambda by cross-validation.
    #[arg(long)]
    cv: bool,
    #[command(flatten)]
    cv_flags: CvFlags,
    /// Per-column lasso weights (Tobit lasso only), in design-column order.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Write the model even if the solver did not converge.
    #[arg(long)]
    allow_nonconverged: bool,
    /// Output model file.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    model: PathBuf,
    /// Input CSV; must contain every model column.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "censored-mean")]
    mode: ModeArg,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    penalty: PenaltyArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 100)]
    n_lambda: usize,
    #[arg(long)]
    lambda_min_ratio: Option<f64>,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    penalty: PenaltyArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    cv_flags: CvFlags,
    #[arg(long, value_enum, default_value = "censored-mean")]
    mode: ModeArg,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Design name, table1 through table5.
    #[arg(long)]
    design: String,
    /// Censoring quantile.
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 50)]
    p: usize,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    n_train: usize,
    #[arg(long, default_value_t = 5000)]
    n_test: usize,
    /// Methods to compare (default: all that the design admits).
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Use a fixed lambda instead of cross-validation.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    n_lambda: usize,
    /// How Tobit fits predict on the test set.
    #[arg(long, value_enum, default_value = "censored-mean")]
    mode: ModeArg,
    /// Worker threads (defaults to $CENSREG_THREADS, then all cores).
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Output CSV of `method,metric,mean,se` (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Response plus design read from a CSV.
struct Loaded {
    dataset: Dataset,
    columns: Vec<String>,
}

impl Loaded {
    /// Library error with column indices replaced by names.
    fn err(&self, e: censreg::Error) -> CliError {
        match e {
            censreg::Error::ZeroVariance { column } => {
                let mut c = CliError::from(e);
                c.message = format!("column '{}' has zero variance", self.columns[column]);
                c
            }
            other => other.into(),
        }
    }
}

fn load(args: &DataArgs) -> Result<Loaded, CliError> {
    let table = Table::read(&args.data, &args.exclude)?;
    let y = table.column(&args.response)?.to_vec();
    let columns: Vec<String> = table
        .headers
        .iter()
        .filter(|h| **h != args.response && !args.exclude.contains(h))
        .cloned()
        .collect();
    for e in &args.exclude {
        table.index(e)?;
    }
    if columns.is_empty() {
        return Err(CliError::input("no predictor columns left"));
    }
    let x = table.matrix(&columns)?;
    let dataset = Dataset::new(x, &y, args.censor_value)?;
    Ok(Loaded { dataset, columns })
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::input("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::input(format!("thread pool: {e}"))),
    }
}

fn cv_options(
    penalty: &PenaltyArgs,
    solver: &SolverArgs,
    flags: &CvFlags,
    mode: PredictMode,
) -> CvOptions {
    CvOptions {
        k: flags.k,
        n_lambda: flags.n_lambda,
        lambda_min_ratio: flags.lambda_min_ratio,
        lambdas: None,
        solver: solver.config(),
        lla_steps: penalty.lla_steps,
        tobit_a: penalty.a(),
        ls_a: penalty.a(),
        predict_mode: mode,
        seed: flags.seed,
    }
}

fn fit_at(
    data: &Dataset,
    penalty: &PenaltyArgs,
    lambda: f64,
    weights: Option<&[f64]>,
    config: &SolverConfig,
) -> censreg::Result<FitResult> {
    let lla = LlaConfig {
        steps: penalty.lla_steps,
        ..LlaConfig::default()
    };
    let fit = match (penalty.model, penalty.penalty) {
        (ModelArg::Tobit, PenaltyArg::Lasso) => match weights {
            Some(w) => fit_weighted_lasso(data, lambda, w, config, None)?,
            None => fit_lasso(data, lambda, config)?,
        },
        (ModelArg::Tobit, _) => {
            let spec = PenaltySpec::build(penalty.family(), lambda, penalty.a(), None)?;
            fit_folded_concave(data, &spec, &lla, config)?.fit
        }
        (ModelArg::LeastSquares, _) => {
            let spec = PenaltySpec::build(penalty.family(), lambda, penalty.a(), None)?;
            fit_ls_penalized_with(data, &spec, config, &lla)?
        }
    };
    Ok(fit)
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let loaded = load(&args.data)?;
    let data = &loaded.dataset;
    let config = args.solver.config();
    if args.weights.is_some()
        && (args.penalty.model, args.penalty.penalty) != (ModelArg::Tobit, PenaltyArg::Lasso)
    {
        return Err(CliError::input("--weights applies to the Tobit lasso only"));
    }
    let lambda = if args.cv {
        let method = args.penalty.method()?;
        let options = cv_options(
            &args.penalty,
            &args.solver,
            &args.cv_flags,
            PredictMode::CensoredMean,
        );
        let cv = with_threads(args.cv_flags.threads, || kfold_cv(data, method, &options))?
            .map_err(|e| loaded.err(e))?;
        cv.best_lambda
    } else {
        args.lambda.expect("clap requires --lambda without --cv")
    };
    let fit = fit_at(
        data,
        &args.penalty,
        lambda,
        args.weights.as_deref(),
        &config,
    )
    .map_err(|e| loaded.err(e))?;
    if !fit.converged {
        let msg = format!(
            "solver did not converge in {} cycles (KKT residual {:.3e})",
            fit.cycles_used, fit.kkt_residual
        );
        if !args.allow_nonconverged {
            return Err(CliError::convergence(msg));
        }
        eprintln!("warning: {msg}");
    }
    let (model, a) = match args.penalty.model {
        ModelArg::Tobit => (ModelKind::Tobit, args.penalty.a()),
        ModelArg::LeastSquares => (ModelKind::LeastSquares, args.penalty.a()),
    };
    let family = match (args.penalty.penalty, &args.weights) {
        (PenaltyArg::Lasso, Some(_)) => PenaltyFamily::WeightedLasso,
        _ => args.penalty.family(),
    };
    let a = family.is_folded_concave().then_some(a);
    let file = ModelFile::from_fit(
        &fit,
        model,
        family,
        a,
        &args.data.response,
        &loaded.columns,
        data.censor_shift(),
    )?;
    file.write(&args.out)?;
    println!("lambda        {}", fit.lambda);
    println!("support size  {}", fit.support().len());
    println!("objective     {}", fit.objective);
    println!("kkt residual  {:.3e}", fit.kkt_residual);
    println!("cycles        {}", fit.cycles_used);
    println!("converged     {}", fit.converged);
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let model = ModelFile::read(&args.model)?;
    let header = Table::read_header(&args.data)?;
    let skip: Vec<String> = header
        .into_iter()
        .filter(|h| !model.column_names.contains(h))
        .collect();
    let table = Table::read(&args.data, &skip)?;
    for c in &model.column_names {
        if !table.headers.contains(c) {
            return Err(CliError::input(format!(
                "model column '{c}' missing from {}",
                args.data.display()
            )));
        }
    }
    let x = table.matrix(&model.column_names)?;
    let pred = model.predict(&x, args.mode.into())?;
    let rows: Vec<Vec<String>> = pred.iter().map(|v| vec![v.to_string()]).collect();
    write_rows(args.out.as_deref(), &["prediction".to_string()], &rows)
}

fn cmd_path(args: PathArgs) -> Result<(), CliError> {
    let loaded = load(&args.data)?;
    let data = &loaded.dataset;
    let method_like = CvOptions {
        n_lambda: args.n_lambda,
        lambda_min_ratio: args.lambda_min_ratio,
        solver: args.solver.config(),
        ..CvOptions::default()
    };
    let grid_method = match args.penalty.model {
        ModelArg::Tobit => Method::TobitLasso,
        ModelArg::LeastSquares => Method::LsLasso,
    };
    let config = args.solver.config();
    let method = args.penalty.method().ok();
    let options = CvOptions {
        lla_steps: args.penalty.lla_steps,
        tobit_a: args.penalty.a(),
        ls_a: args.penalty.a(),
        ..method_like.clone()
    };
    let run = || -> censreg::Result<Vec<FitResult>> {
        let lambdas = lambda_sequence(data, grid_method, &method_like)?;
        match method {
            Some(Method::TobitLasso) => Ok(fit_path_at(data, &lambdas, None, &config)?.fits),
            Some(m) => censreg::sim::fit_method_path(data, m, &lambdas, &options),
            None => lambdas
                .iter()
                .map(|&l| fit_at(data, &args.penalty, l, None, &config))
                .collect(),
        }
    };
    let fits = run().map_err(|e| loaded.err(e))?;
    let mut header: Vec<String> = [
        "lambda",
        "support_size",
        "objective",
        "kkt_residual",
        "converged",
        "beta0",
        "sigma",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(loaded.columns.iter().cloned());
    let rows: Vec<Vec<String>> = fits
        .iter()
        .map(|f| {
            let mut r = vec![
                f.lambda.to_string(),
                f.support().len().to_string(),
                f.objective.to_string(),
                f.kkt_residual.to_string(),
                f.converged.to_string(),
                f.natural.beta0.to_string(),
                f.natural.sigma.to_string(),
            ];
            r.extend(f.natural.beta.iter().map(f64::to_string));
            r
        })
        .collect();
    write_rows(args.out.as_deref(), &header, &rows)?;
    if let Some(f) = fits.iter().find(|f| !f.converged) {
        return Err(CliError::convergence(format!(
            "solver did not converge at lambda = {}",
            f.lambda
        )));
    }
    Ok(())
}

fn cmd_cv(args: CvArgs) -> Result<(), CliError> {
    let loaded = load(&args.data)?;
    let method = args.penalty.method()?;
    let options = cv_options(
        &args.penalty,
        &args.solver,
        &args.cv_flags,
        args.mode.into(),
    );
    let cv = with_threads(args.cv_flags.threads, || {
        kfold_cv(&loaded.dataset, method, &options)
    })?
    .map_err(|e| loaded.err(e))?;
    let header: Vec<String> = ["lambda", "cv_mse", "cv_se"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = (0..cv.lambdas.len())
        .map(|i| {
            vec![
                cv.lambdas[i].to_string(),
                cv.cv_mse[i].to_string(),
                cv.cv_se[i].to_string(),
            ]
        })
        .collect();
    write_rows(args.out.as_deref(), &header, &rows)?;
    eprintln!(
        "best lambda {} (cv mse {})",
        cv.best_lambda, cv.cv_mse[cv.best_index]
    );
    Ok(())
}

fn parse_design(name: &str) -> Result<usize, CliError> {
    name.strip_prefix("table")
        .and_then(|t| t.parse::<usize>().ok())
        .filter(|t| (1..=5).contains(t))
        .ok_or_else(|| {
            CliError::input(format!("unknown design '{name}' (expected table1..table5)"))
        })
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let table = parse_design(&args.design)?;
    let mut design = SimDesign::table(table, args.q, args.p, args.reps, args.seed)?;
    design.n_train = args.n_train;
    design.n_test = args.n_test;
    let methods: Vec<MethodKind> = if args.methods.is_empty() {
        MethodKind::ALL
            .into_iter()
            .filter(|m| *m != MethodKind::Ols || args.p + 1 < args.n_train)
            .collect()
    } else {
        args.methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_, _>>()?
    };
    let mut config = ExperimentConfig::new(design, methods);
    config.tuning = args.lambda.map_or(Tuning::Cv, Tuning::Fixed);
    config.cv.k = args.k;
    config.cv.n_lambda = args.n_lambda;
    config.cv.predict_mode = args.mode.into();
    config.threads = args.threads;
    let result = run_experiment(&config)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, result.to_csv())
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            print!("{}", result.to_pretty());
        }
        None => print!("{}", result.to_csv()),
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<(), CliError> {
    let reports = diagnostics::run_all(args.seed);
    let mut failed = 0;
    for r in &reports {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        return Err(CliError::check(format!(
            "{failed} of {} checks failed",
            reports.len()
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Path(a) => cmd_path(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Check(a) => cmd_check(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
