//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a check or run fails, 2 on usage
//! errors (including invalid instance parameters and malformed configs).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use opelab_cli::config::{parse_kind, ExperimentConfig, PartialConfig};
use opelab_cli::document::{
    load_bundle, save_bundle, write_json, EstimateDoc, IdentityDoc, RealizabilityDoc, ShiftDoc,
};
use opelab_cli::experiments::{
    run_amplification_sweep, run_distinguishing_test, run_upper_bound_check,
};
use opelab_cli::output::{
    emit_plot_data, read_csv, write_dataset_csv, write_distinguish_csv, write_sweep_csv,
    write_upperbound_csv, DistinguishRecord, SweepRecord, UpperBoundRecord, DISTINGUISH_FILE,
    SWEEP_FILE, UPPERBOUND_FILE,
};
use opelab_cli::{CliError, Result};

use opelab_core::instances::{
    build_det_instance_with, build_sparse_instance_with, max_r0, Basis, HardInstanceBundle,
    InstanceKind,
};
use opelab_core::rng::derive_seed;
use opelab_core::{
    build_optimality_reduction, check_coverage, check_error_identity, run_lspe, sample_offline,
    shift_report, spot_check_realizability, DataDistribution,
};

#[derive(Parser)]
#[command(
    name = "opelab",
    version,
    about = "Offline policy evaluation laboratory: hard instances, LSPE, and shift diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Instance construction.
    Instance {
        #[command(subcommand)]
        cmd: InstanceCmd,
    },
    /// Coverage spectrum of the data distributions.
    Coverage(CoverageArgs),
    /// Linear realizability spot check over sampled policies.
    Realizability(RealizabilityArgs),
    /// Least-squares policy evaluation.
    Lspe {
        #[command(subcommand)]
        cmd: LspeCmd,
    },
    /// Exact error-identity diagnostics.
    Identity {
        #[command(subcommand)]
        cmd: IdentityCmd,
    },
    /// Distribution-shift diagnostics.
    Shift {
        #[command(subcommand)]
        cmd: ShiftCmd,
    },
    /// Monte Carlo sweeps.
    Sweep {
        #[command(subcommand)]
        cmd: SweepCmd,
    },
    /// Statistical tests.
    Test {
        #[command(subcommand)]
        cmd: TestCmd,
    },
    /// Empirical checks against closed-form guarantees.
    Check {
        #[command(subcommand)]
        cmd: CheckCmd,
    },
    /// Plot-ready data emission.
    Emit {
        #[command(subcommand)]
        cmd: EmitCmd,
    },
}

/// Selects an instance: either build one from parameters or load a bundle
/// document.
#[derive(Args, Clone)]
struct InstanceSelect {
    /// Load a bundle JSON document instead of building.
    #[arg(long, value_name = "FILE")]
    instance: Option<PathBuf>,

    /// Instance family: "det" or "sparse".
    #[arg(long, default_value = "det")]
    kind: String,

    /// Feature dimension (even; >= 4 for det, >= 6 for sparse).
    #[arg(long, default_value_t = 4)]
    d: usize,

    /// Horizon H (>= 1 for det, >= 4 for sparse).
    #[arg(long, default_value_t = 3)]
    horizon: usize,

    /// Reward/transition gap parameter.
    #[arg(long, default_value_t = 0.0, conflicts_with = "r0_max")]
    r0: f64,

    /// Use the maximal admissible r0 (the value-1 world).
    #[arg(long)]
    r0_max: bool,

    /// Replace the standard basis by a seeded random orthonormal basis.
    #[arg(long, value_name = "SEED")]
    rotate_seed: Option<u64>,
}

impl InstanceSelect {
    fn bundle(&self) -> Result<HardInstanceBundle> {
        if let Some(path) = &self.instance {
            return load_bundle(path);
        }
        let kind = parse_kind(&self.kind)?;
        let r0 = if self.r0_max {
            max_r0(kind, self.d, self.horizon)
        } else {
            self.r0
        };
        let basis = match self.rotate_seed {
            Some(seed) => Basis::Rotated { seed },
            None => Basis::Standard,
        };
        let built = match kind {
            InstanceKind::Det => build_det_instance_with(self.d, self.horizon, r0, basis, None),
            InstanceKind::Sparse => build_sparse_instance_with(self.d, self.horizon, r0, basis),
        };
        built.map_err(|e| CliError::usage(e.to_string()))
    }
}

#[derive(Subcommand)]
enum InstanceCmd {
    /// Build a hard instance and write it as a JSON bundle.
    Build(InstanceBuildArgs),
}

#[derive(Args)]
struct InstanceBuildArgs {
    #[command(flatten)]
    select: InstanceSelect,

    /// Amplifier feature weights for the det family (comma separated,
    /// d/2 values; sum must exceed 1).
    #[arg(long, value_delimiter = ',', value_name = "W1,W2,...")]
    weights: Option<Vec<f64>>,

    /// Wrap the instance in the optimality reduction.
    #[arg(long)]
    reduction: bool,

    /// Output path for the bundle document.
    #[arg(long, default_value = "bundle.json")]
    out: PathBuf,

    /// Also sample an offline dataset of this many tuples per level.
    #[arg(long, value_name = "N")]
    sample: Option<usize>,

    /// Seed for the sampled dataset.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Where to write the sampled dataset CSV.
    #[arg(long, value_name = "FILE")]
    dataset_out: Option<PathBuf>,
}

#[derive(Args)]
struct CoverageArgs {
    #[command(flatten)]
    select: InstanceSelect,

    /// Minimum-eigenvalue threshold; defaults to 1/d - 1e-9.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct RealizabilityArgs {
    #[command(flatten)]
    select: InstanceSelect,

    /// Number of seeded random policies (the constant policies are always
    /// included).
    #[arg(long, default_value_t = 20)]
    policies: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Sup-norm residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,

    /// Write the evaluation policy's fit report as JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LspeCmd {
    /// Run LSPE on freshly sampled offline data.
    Run(LspeRunArgs),
}

#[derive(Args)]
struct LspeRunArgs {
    #[command(flatten)]
    select: InstanceSelect,

    /// Samples per level.
    #[arg(long, default_value_t = 100)]
    n: usize,

    /// Ridge regularization (0 = plain least squares).
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Independent repetitions; trial t uses the substream `(seed, [t])`.
    #[arg(long, default_value_t = 1)]
    trials: usize,

    /// Write the first trial's estimate as JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Export the sampled datasets as CSV.
    #[arg(long, value_name = "FILE")]
    dataset_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum IdentityCmd {
    /// Verify the exact error identity on one dataset.
    Check(IdentityCheckArgs),
}

#[derive(Args)]
struct IdentityCheckArgs {
    #[command(flatten)]
    select: InstanceSelect,

    #[arg(long, default_value_t = 100)]
    n: usize,

    /// Ridge regularization; must be positive.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Largest acceptable relative discrepancy.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,

    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ShiftCmd {
    /// Per-level table of coverage, shift coefficients, and completeness.
    Report(ShiftReportArgs),
}

#[derive(Args)]
struct ShiftReportArgs {
    #[command(flatten)]
    select: InstanceSelect,

    /// Replace the instance's data distributions by the on-policy mixture
    /// with this weight (the low-shift regime).
    #[arg(long, value_name = "EPSILON")]
    mix_epsilon: Option<f64>,

    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SweepCmd {
    /// LSPE error amplification across the horizon grid.
    Amplification(ConfigArgs),
}

#[derive(Subcommand)]
enum TestCmd {
    /// Two-world distinguishing test via the exact likelihood ratio.
    Distinguish(DistinguishArgs),
}

#[derive(Args)]
struct DistinguishArgs {
    #[arg(long, default_value = "det")]
    kind: String,

    #[arg(long, default_value_t = 4)]
    d: usize,

    #[arg(long, default_value_t = 6)]
    horizon: usize,

    /// Sample sizes per level (comma separated; 0 = no data).
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    n: Vec<usize>,

    #[arg(long, default_value_t = 2000)]
    trials: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Directory for distinguish.csv.
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Empirical error quantiles against the low-shift bound.
    Upperbound(ConfigArgs),
}

#[derive(Subcommand)]
enum EmitCmd {
    /// Convert result tables into tidy plot-ready CSV files.
    Plots(EmitPlotsArgs),
}

#[derive(Args)]
struct EmitPlotsArgs {
    /// Directory containing amplification.csv / distinguish.csv /
    /// upperbound.csv (whichever exist).
    #[arg(long, default_value = "out")]
    results_dir: PathBuf,

    /// Where to write the figure files (defaults to the results dir).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Config file plus flag overrides; flags win over the file, and the
/// OPELAB_OUTPUT_DIR environment variable wins for the output directory.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long)]
    kind: Option<String>,

    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,

    #[arg(long, value_delimiter = ',')]
    horizon: Option<Vec<usize>>,

    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,

    /// r0 as fractions of the maximal admissible value.
    #[arg(long, value_delimiter = ',')]
    r0_frac: Option<Vec<f64>>,

    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,

    #[arg(long)]
    trials: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    output_dir: Option<PathBuf>,

    #[arg(long)]
    epsilon: Option<f64>,

    #[arg(long)]
    delta: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let overrides = PartialConfig {
            kind: self.kind.clone(),
            d: self.d.clone(),
            horizon: self.horizon.clone(),
            n: self.n.clone(),
            r0_frac: self.r0_frac.clone(),
            lambda: self.lambda.clone(),
            trials: self.trials,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            epsilon: self.epsilon,
            delta: self.delta,
        };
        ExperimentConfig::resolve(self.config.as_deref(), &overrides)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Instance {
            cmd: InstanceCmd::Build(args),
        } => instance_build(args),
        Command::Coverage(args) => coverage(args),
        Command::Realizability(args) => realizability(args),
        Command::Lspe {
            cmd: LspeCmd::Run(args),
        } => lspe_run(args),
        Command::Identity {
            cmd: IdentityCmd::Check(args),
        } => identity_check(args),
        Command::Shift {
            cmd: ShiftCmd::Report(args),
        } => shift_report_cmd(args),
        Command::Sweep {
            cmd: SweepCmd::Amplification(args),
        } => sweep_amplification(args),
        Command::Test {
            cmd: TestCmd::Distinguish(args),
        } => test_distinguish(args),
        Command::Check {
            cmd: CheckCmd::Upperbound(args),
        } => check_upperbound(args),
        Command::Emit {
            cmd: EmitCmd::Plots(args),
        } => emit_plots(args),
    }
}

fn instance_build(args: InstanceBuildArgs) -> Result<()> {
    let mut bundle = if let Some(weights) = &args.weights {
        let kind = parse_kind(&args.select.kind)?;
        if kind != InstanceKind::Det {
            return Err(CliError::usage("--weights applies to the det family only"));
        }
        if args.select.instance.is_some() {
            return Err(CliError::usage(
                "--weights cannot be combined with --instance",
            ));
        }
        let basis = match args.select.rotate_seed {
            Some(seed) => Basis::Rotated { seed },
            None => Basis::Standard,
        };
        let gain: f64 = weights.iter().sum();
        let r0 = if args.select.r0_max {
            gain.powi(-(args.select.horizon as i32))
        } else {
            args.select.r0
        };
        build_det_instance_with(args.select.d, args.select.horizon, r0, basis, Some(weights))
            .map_err(|e| CliError::usage(e.to_string()))?
    } else {
        args.select.bundle()?
    };

    if args.reduction {
        bundle = build_optimality_reduction(&bundle)?;
    }
    save_bundle(&args.out, &bundle)?;
    println!(
        "wrote {} ({} instance, d = {}, H = {}, r0 = {}, V^pi = {})",
        args.out.display(),
        bundle.kind,
        bundle.phi.dim(),
        bundle.mdp.horizon(),
        bundle.r0,
        bundle.ground_truth_value
    );

    if let Some(n) = args.sample {
        let dataset = sample_offline(&bundle.mdp, &bundle.mu, n, args.seed)?;
        let path = args
            .dataset_out
            .unwrap_or_else(|| args.out.with_extension("csv"));
        write_dataset_csv(&path, &bundle.mdp, &[dataset])?;
        println!(
            "wrote {} ({} tuples per level, seed {})",
            path.display(),
            n,
            args.seed
        );
    }
    Ok(())
}

fn coverage(args: CoverageArgs) -> Result<()> {
    let bundle = args.select.bundle()?;
    let d = bundle.phi.dim() as f64;
    let threshold = args.threshold.unwrap_or(1.0 / d - 1e-9);
    let report = check_coverage(&bundle.mu, &bundle.phi, threshold);
    println!("coverage threshold {threshold} (1/d = {})", 1.0 / d);
    println!("{:>5} {:>14}", "level", "sigma_min");
    for (h, sigma) in report.sigma_min.iter().enumerate() {
        println!("{:>5} {:>14.10}", h + 1, sigma);
    }
    if report.pass {
        println!("coverage: PASS");
        Ok(())
    } else {
        for v in &report.violations {
            println!(
                "violation at level {}: sigma_min = {} ({:?})",
                v.level + 1,
                v.sigma_min,
                v.reason
            );
        }
        Err(CliError::check("coverage check failed"))
    }
}

fn realizability(args: RealizabilityArgs) -> Result<()> {
    let bundle = args.select.bundle()?;
    let eval_fit = opelab_core::fit_linear_q(&bundle.mdp, &bundle.eval_policy, &bundle.phi);
    println!("{:>14} policy", "residual");
    println!("{:>14.3e} evaluation policy", eval_fit.max_residual);
    let mut worst = eval_fit.max_residual;

    // The det family is realizable for every policy; the sparse family
    // only claims realizability for its evaluation policy, so the policy
    // sample applies to det bundles alone.
    if bundle.kind == InstanceKind::Det {
        let check = spot_check_realizability(&bundle.mdp, &bundle.phi, args.policies, args.seed)?;
        for (label, report) in check.policy_labels.iter().zip(&check.reports) {
            println!("{:>14.3e} {label}", report.max_residual);
        }
        worst = worst.max(check.worst_residual);
    } else {
        println!("(sparse family: realizability is specific to the evaluation policy)");
    }
    println!("worst residual: {:.3e}", worst);

    if let Some(out) = &args.out {
        write_json(out, &RealizabilityDoc::from_core(&eval_fit))?;
        println!("wrote {}", out.display());
    }

    if worst < args.tolerance {
        println!("realizability: PASS");
        Ok(())
    } else {
        Err(CliError::check(format!(
            "worst residual {:.3e} exceeds tolerance {:.3e}",
            worst, args.tolerance
        )))
    }
}

fn lspe_run(args: LspeRunArgs) -> Result<()> {
    let bundle = args.select.bundle()?;
    let mut estimates = Vec::with_capacity(args.trials);
    let mut datasets = Vec::new();
    let mut first_doc: Option<EstimateDoc> = None;
    for trial in 0..args.trials {
        let seed = if args.trials == 1 {
            args.seed
        } else {
            derive_seed(args.seed, &[trial as u64])
        };
        let dataset = sample_offline(&bundle.mdp, &bundle.mu, args.n, seed)?;
        let est = run_lspe(
            &bundle.mdp,
            &dataset,
            &bundle.eval_policy,
            &bundle.phi,
            args.lambda,
        )?;
        if first_doc.is_none() {
            first_doc = Some(EstimateDoc::from_core(&est, bundle.ground_truth_value));
        }
        estimates.push(est.estimate);
        if args.dataset_out.is_some() {
            datasets.push(dataset);
        }
    }

    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    if args.trials == 1 {
        println!(
            "V_hat = {mean}, V^pi = {}, error = {}",
            bundle.ground_truth_value,
            mean - bundle.ground_truth_value
        );
    } else {
        let var =
            estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / estimates.len() as f64;
        println!(
            "trials = {}, mean V_hat = {mean}, sd = {}, V^pi = {}",
            args.trials,
            var.sqrt(),
            bundle.ground_truth_value
        );
    }

    if let Some(out) = &args.out {
        write_json(out, &first_doc.expect("at least one trial"))?;
        println!("wrote {}", out.display());
    }
    if let Some(path) = &args.dataset_out {
        write_dataset_csv(path, &bundle.mdp, &datasets)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn identity_check(args: IdentityCheckArgs) -> Result<()> {
    let bundle = args.select.bundle()?;
    let dataset = sample_offline(&bundle.mdp, &bundle.mu, args.n, args.seed)?;
    let report = check_error_identity(
        &bundle.mdp,
        &dataset,
        &bundle.eval_policy,
        &bundle.phi,
        args.lambda,
    )?;
    println!("left  (V^pi - V_hat)^2 = {}", report.left);
    println!("right (telescoped sum) = {}", report.right);
    println!(
        "relative discrepancy   = {:.3e}",
        report.relative_discrepancy
    );
    if let Some(out) = &args.out {
        write_json(out, &IdentityDoc::from_core(&report))?;
        println!("wrote {}", out.display());
    }
    if report.relative_discrepancy < args.tolerance {
        println!("identity: PASS");
        Ok(())
    } else {
        Err(CliError::check(format!(
            "relative discrepancy {:.3e} exceeds tolerance {:.3e}",
            report.relative_discrepancy, args.tolerance
        )))
    }
}

fn shift_report_cmd(args: ShiftReportArgs) -> Result<()> {
    let bundle = args.select.bundle()?;
    let mu = match args.mix_epsilon {
        Some(epsilon) => {
            DataDistribution::on_policy_mixture(&bundle.mdp, &bundle.eval_policy, epsilon)?
        }
        None => bundle.mu.clone(),
    };
    let report = shift_report(&bundle.mdp, &mu, &bundle.eval_policy, &bundle.phi)?;
    println!(
        "{:>5} {:>14} {:>14} {:>18}",
        "level", "sigma_min", "C_h", "completeness"
    );
    for (h, level) in report.levels.iter().enumerate() {
        let shift = if level.shift.is_finite() {
            format!("{:.10}", level.shift)
        } else {
            "inf".to_string()
        };
        let completeness = level
            .completeness_residual
            .map(|r| format!("{r:.3e}"))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:>5} {:>14.10} {:>14} {:>18}",
            h + 1,
            level.sigma_min,
            shift,
            completeness
        );
    }
    if report.any_infinite {
        println!("product of C_h: inf (bound vacuous)");
    } else {
        println!("product of C_h: {}", report.shift_product);
    }
    if let Some(out) = &args.out {
        write_json(out, &ShiftDoc::from_core(&report))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn sweep_amplification(args: ConfigArgs) -> Result<()> {
    let config = args.resolve()?;
    let started = Instant::now();
    let result = run_amplification_sweep(&config)?;
    let path = config.output_dir.join(SWEEP_FILE);
    write_sweep_csv(&path, &result.rows)?;
    write_json(
        &config.output_dir.join("amplification_config.json"),
        &config,
    )?;

    let failures: usize = result.rows.iter().map(|r| r.failures).sum();
    if failures > 0 {
        eprintln!("note: {failures} trials hit singular designs and were excluded");
    }
    if let Some(worst) = result
        .rows
        .iter()
        .filter_map(|r| r.identity_max_discrepancy)
        .fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.max(x)))
        })
    {
        println!("worst identity discrepancy across trials: {worst:.3e}");
    }
    println!(
        "{} grid points, {} trials each -> {}",
        result.rows.len(),
        config.trials,
        path.display()
    );
    println!(
        "log-RMSE slope vs H: {:.4} (bootstrap 95% CI [{:.4}, {:.4}])",
        result.slope, result.slope_ci.0, result.slope_ci.1
    );
    eprintln!("elapsed: {:.1?}", started.elapsed());
    Ok(())
}

fn test_distinguish(args: DistinguishArgs) -> Result<()> {
    let kind = parse_kind(&args.kind)?;
    let started = Instant::now();
    let mut rows = Vec::with_capacity(args.n.len());
    for &n in &args.n {
        let row = run_distinguishing_test(kind, args.d, args.horizon, n, args.trials, args.seed)?;
        println!(
            "N = {:>7}: success = {:.4} (95% CI [{:.4}, {:.4}])",
            row.n, row.success_rate, row.ci_lo, row.ci_hi
        );
        rows.push(row);
    }
    let out_dir = match std::env::var_os(opelab_cli::config::OUTPUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => args.output_dir.clone(),
    };
    let path = out_dir.join(DISTINGUISH_FILE);
    write_distinguish_csv(&path, &rows)?;
    println!("wrote {}", path.display());
    eprintln!("elapsed: {:.1?}", started.elapsed());
    Ok(())
}

fn check_upperbound(args: ConfigArgs) -> Result<()> {
    let config = args.resolve()?;
    let started = Instant::now();
    let rows = run_upper_bound_check(&config)?;
    let path = config.output_dir.join(UPPERBOUND_FILE);
    write_upperbound_csv(&path, &rows)?;
    write_json(&config.output_dir.join("upperbound_config.json"), &config)?;

    let mut all_pass = true;
    for row in &rows {
        let status = if row.vacuous {
            "VACUOUS"
        } else if row.pass {
            "PASS"
        } else {
            all_pass = false;
            "FAIL"
        };
        println!(
            "d = {}, H = {}, N = {:>7}: empirical q{} = {:.6}, bound = {:.3}, lambda = {:.3} [{status}]",
            row.d,
            row.horizon,
            row.n,
            (1.0 - row.delta) * 100.0,
            row.empirical,
            row.bound,
            row.lambda
        );
    }
    println!("wrote {}", path.display());
    eprintln!("elapsed: {:.1?}", started.elapsed());
    if all_pass {
        Ok(())
    } else {
        Err(CliError::check("empirical error exceeded the bound"))
    }
}

fn emit_plots(args: EmitPlotsArgs) -> Result<()> {
    let out_dir = args
        .out_dir
        .clone()
        .unwrap_or_else(|| args.results_dir.clone());
    let sweep_path = args.results_dir.join(SWEEP_FILE);
    let distinguish_path = args.results_dir.join(DISTINGUISH_FILE);
    let upper_path = args.results_dir.join(UPPERBOUND_FILE);

    let sweep: Option<Vec<SweepRecord>> = sweep_path
        .exists()
        .then(|| read_csv(&sweep_path))
        .transpose()?;
    let distinguish: Option<Vec<DistinguishRecord>> = distinguish_path
        .exists()
        .then(|| read_csv(&distinguish_path))
        .transpose()?;
    let upper: Option<Vec<UpperBoundRecord>> = upper_path
        .exists()
        .then(|| read_csv(&upper_path))
        .transpose()?;

    if sweep.is_none() && distinguish.is_none() && upper.is_none() {
        return Err(CliError::usage(format!(
            "no result tables found in {}",
            args.results_dir.display()
        )));
    }

    let written = emit_plot_data(
        &out_dir,
        sweep.as_deref(),
        distinguish.as_deref(),
        upper.as_deref(),
    )?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
