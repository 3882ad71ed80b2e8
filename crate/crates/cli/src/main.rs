use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use solenoidal_cli::{
    compute_beta_text, orbit_text, render_text, resolve, CliError, RunConfig, SuiteSelector,
};

/// Exact-arithmetic verification of solenoidal groupoids, their equivalence
/// bibundles, convolution algebras and imprimitivity bimodules.
#[derive(Parser)]
#[command(name = "solenoidal", version, about)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// The prime p.
    #[arg(long, global = true, default_value_t = 2, env = "SOLENOIDAL_P")]
    p: u32,
    /// Real component of alpha: `n/d` or a decimal.
    #[arg(
        long = "alpha-t",
        global = true,
        default_value = "1/3",
        env = "SOLENOIDAL_ALPHA_T"
    )]
    alpha_t: String,
    /// p-adic component of alpha: `n/d`, a decimal, or digits `d0.d1...@v`.
    #[arg(
        long = "alpha-r",
        global = true,
        default_value = "5/2",
        env = "SOLENOIDAL_ALPHA_R"
    )]
    alpha_r: String,
    /// Matrix literal `a,b;c,d` with `Z[1/p]` entries (the letter `p` is the
    /// active prime).
    #[arg(
        long,
        global = true,
        default_value = "0,1;1,0",
        env = "SOLENOIDAL_MATRIX"
    )]
    matrix: String,
    /// Solenoid truncation level.
    #[arg(long, global = true, default_value_t = 8, env = "SOLENOIDAL_LEVEL")]
    level: u32,
    /// Phase-sequence level for the algebra suite.
    #[arg(
        long = "alg-level",
        global = true,
        default_value_t = 12,
        env = "SOLENOIDAL_ALG_LEVEL"
    )]
    alg_level: u32,
    /// Samples per randomized check.
    #[arg(long, global = true, default_value_t = 500, env = "SOLENOIDAL_SAMPLES")]
    samples: u64,
    /// RNG seed; reports are byte-identical for a fixed seed.
    #[arg(long, global = true, default_value_t = 42, env = "SOLENOIDAL_SEED")]
    seed: u64,
    /// Comparison mode: exact (normative) or float (exploratory).
    #[arg(long, global = true, default_value = "exact", env = "SOLENOIDAL_MODE")]
    mode: String,
    /// Tolerance for float mode.
    #[arg(
        long,
        global = true,
        default_value_t = 1e-9,
        env = "SOLENOIDAL_TOLERANCE"
    )]
    tolerance: f64,
    /// Cap on cyclotomic moduli for exact zero tests.
    #[arg(long = "cyclo-cap", global = true, default_value_t = 1 << 16, env = "SOLENOIDAL_CYCLO_CAP")]
    cyclo_cap: u64,
    /// Write the JSON report here (verify only).
    #[arg(long, global = true, env = "SOLENOIDAL_OUT")]
    out: Option<PathBuf>,
    /// Refuse to run unless the matrix is strict (c a unit +-p^k).
    #[arg(long = "strict-only", global = true, env = "SOLENOIDAL_STRICT_ONLY")]
    strict_only: bool,
    /// Include wall-clock timing in the JSON report (breaks byte-for-byte
    /// reproducibility).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the pullback beta = M^{-1} * alpha with its classification.
    ComputeBeta,
    /// Run verification suites and report pass/fail per check.
    Verify {
        /// groupoid|moebius|bibundle|algebra|bimodule|all
        #[arg(long, default_value = "all")]
        suite: String,
        /// JSON file with an explicit step-function triple {phi, psi, chi}
        /// for the bimodule checks.
        #[arg(long)]
        steps: Option<PathBuf>,
    },
    /// Solve for a preimage of a coherent point literal `t0,t1,...`.
    Orbit {
        #[arg(long)]
        point: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let opts = cli.opts;
    let config = RunConfig {
        p: opts.p,
        alpha_t: opts.alpha_t.clone(),
        alpha_r: opts.alpha_r.clone(),
        matrix: opts.matrix.clone(),
        level: opts.level,
        alg_level: opts.alg_level,
        samples: opts.samples,
        seed: opts.seed,
        mode: opts.mode.clone(),
        tolerance: opts.tolerance,
        cyclo_cap: opts.cyclo_cap,
    };
    let rz = resolve(config)?;
    match cli.command {
        Command::ComputeBeta => {
            if opts.strict_only && !solenoidal_cli::matrix_is_strict(&rz.matrix) {
                return Err(CliError::NotStrict(rz.matrix.c.to_string()));
            }
            print!("{}", compute_beta_text(&rz)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, steps } => {
            let selector: SuiteSelector = suite.parse()?;
            let triple = match &steps {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::Input(format!("cannot read {path:?}: {e}")))?;
                    Some(serde_json::from_str(&text).map_err(|e| {
                        CliError::Input(format!("bad step-function JSON in {path:?}: {e}"))
                    })?)
                }
                None => None,
            };
            let report = solenoidal_cli::run_verify_with_steps(
                &rz,
                selector,
                opts.strict_only,
                opts.timings,
                triple.as_ref(),
            )?;
            print!("{}", render_text(&report));
            if let Some(path) = &opts.out {
                std::fs::write(path, report.to_json())
                    .map_err(|e| CliError::Input(format!("cannot write {path:?}: {e}")))?;
            }
            Ok(if report.gate_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Orbit { point } => {
            print!("{}", orbit_text(&rz, &point)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
