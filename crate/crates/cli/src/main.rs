use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sgm_core::geometry::{distances, metric_mean_linear_p2};
use sgm_core::io::{chain_to_json, matrix_to_json, parse_spd, parse_tuple, to_json_string};
use sgm_core::means::{
    halving_schedule, ltk_converging, ltk_errors, metric_mean, riccati_residual,
    spectral_equation_residual, spectral_mean,
};
use sgm_core::pinch::{
    build_pinch_chain, build_positional_chain, verify_chain_matrix, verify_chain_scalar,
    PinchChain,
};
use sgm_core::spd::{rel_frobenius, SpdMatrix, MAX_DIM, PD_TOL, SYM_TOL};
use sgm_core::tolerance::{
    agreement_with_spectral_mean, check_tilde_with, sigma_metric_mean_linear,
    sigma_spectral_mean_formula, spectral_mean_p2_closed_form, tilde_mean_formula,
    tilde_mean_general, DEFAULT_TAU, DET_TOL, L_AB_MERGE_TOL, UNIT_DET_TOL,
};
use sgm_core::verify::{
    run_all, ConvexityFixture, VerifyConfig, CHAIN_TOL, CLOSED_FORM_TOL, DEFAULT_SEED,
    FIXTURE_FILES, RESIDUAL_TOL,
};
use sgm_core::Error;

const EXIT_INTERNAL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser)]
#[command(name = "sgm", version, about = "Geometric means of positive definite matrices")]
struct Cli {
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeanKind {
    Metric,
    Spectral,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted metric or spectral mean of two matrices.
    Mean {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "spectral")]
        kind: MeanKind,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        t: f64,
    },
    /// Semi-metric and Thompson distance.
    Dist { a: PathBuf, b: PathBuf },
    /// σ and ~ relations with the closed forms they enable.
    Tolerance {
        a: PathBuf,
        b: PathBuf,
        /// Relative cluster tolerance for eigenvalues.
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        /// Weight at which closed forms are compared.
        #[arg(long, default_value_t = 0.5)]
        t: f64,
    },
    /// Chain of multiplicative pinches from one tuple to a log-majorized one.
    Pinch {
        alpha: PathBuf,
        beta: PathBuf,
        /// Keep the given coordinate order by adding t=0 swap steps.
        #[arg(long)]
        positional_pinches: bool,
    },
    /// Errors of the Lie-Trotter-Kato approximation at s = 1, 1/2, ..., 1/2^halvings.
    Ltk {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = 6)]
        halvings: u32,
    },
    /// Run every verification suite.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Comma-separated dimensions overriding each suite's defaults.
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        /// Trials per dimension overriding each suite's defaults.
        #[arg(long)]
        trials: Option<usize>,
        /// Directory holding replacement convexity fixture files.
        #[arg(long, value_name = "DIR")]
        fixture: Option<PathBuf>,
    },
}

/// A failure with its exit code and machine-readable kind.
struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotLogMajorized | Error::RelationAbsent(_) | Error::DeterminantNotOne { .. } => {
                EXIT_PRECONDITION
            }
            Error::ConvergenceFailure
            | Error::ChainOverflow { .. }
            | Error::ChainInvariant(_)
            | Error::SingularTransform
            | Error::NonpositiveEigenvalue(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

/// A report plus the exit code it should produce.
struct Output {
    report: Value,
    code: u8,
}

impl Output {
    fn ok(report: Value) -> Self {
        Output { report, code: 0 }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        kind: "Io".into(),
        message: format!("{}: {e}", path.display()),
    })
}

fn load_pair(a: &Path, b: &Path) -> Result<(SpdMatrix, SpdMatrix), Failure> {
    let a = parse_spd(&read(a)?)?;
    let b = parse_spd(&read(b)?)?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        }
        .into());
    }
    Ok((a, b))
}

fn input_tolerances() -> Value {
    json!({ "symmetry": SYM_TOL, "positive_definite": PD_TOL, "max_dim": MAX_DIM })
}

fn cmd_mean(a: &Path, b: &Path, kind: MeanKind, t: f64) -> Result<Output, Failure> {
    let (a, b) = load_pair(a, b)?;
    let (name, result, check) = match kind {
        MeanKind::Metric => {
            let x = metric_mean(&a, &b, t)?;
            // the Riccati equation characterizes the midpoint only
            let check = if t == 0.5 {
                Some(("riccati", riccati_residual(&a, &b, &x)?))
            } else {
                None
            };
            ("metric", x, check)
        }
        MeanKind::Spectral => {
            let x = spectral_mean(&a, &b, t)?;
            ("spectral", x, Some(("spectral_equation", spectral_equation_residual(&a, &b, t)?)))
        }
    };
    let passed = check.is_none_or(|(_, r)| r <= RESIDUAL_TOL);
    let residuals = match check {
        Some((k, r)) => json!({ k: r }),
        None => json!({}),
    };
    let report = json!({
        "kind": name,
        "t": t,
        "result": matrix_to_json(result.as_matrix()),
        "residuals": residuals,
        "self_check_passed": passed,
        "tolerances": { "input": input_tolerances(), "residual": RESIDUAL_TOL },
    });
    Ok(Output {
        report,
        code: if passed { 0 } else { EXIT_VERIFICATION },
    })
}

fn cmd_dist(a: &Path, b: &Path) -> Result<Output, Failure> {
    let (a, b) = load_pair(a, b)?;
    let d = distances(&a, &b)?;
    Ok(Output::ok(json!({
        "semi_metric": d.semi_metric,
        "thompson": d.thompson,
        "tolerances": { "input": input_tolerances() },
    })))
}

/// Agreement of a closed form with its direct counterpart, or the reason it
/// does not apply.
fn closed_form(value: sgm_core::Result<f64>) -> Value {
    match value {
        Ok(r) => json!({ "residual": r, "passed": r <= CLOSED_FORM_TOL }),
        Err(e) => json!({ "not_applicable": e.kind(), "reason": e.to_string() }),
    }
}

fn cmd_tolerance(a: &Path, b: &Path, tau: f64, t: f64) -> Result<Output, Failure> {
    let (a, b) = load_pair(a, b)?;
    let a_inv = a.inverse()?;
    let direct = check_tilde_with(&a, &b, tau)?;
    let inverse = check_tilde_with(&a_inv, &b, tau)?;

    let mut forms = serde_json::Map::new();
    let spectral_against = |f: sgm_core::Result<SpdMatrix>| {
        closed_form(f.and_then(|x| agreement_with_spectral_mean(&a, &b, t, &x)))
    };
    if direct.sigma() {
        let metric = metric_mean(&a, &b, t);
        let r = sigma_metric_mean_linear(&a, &b, t)
            .and_then(|x| Ok(rel_frobenius(x.as_matrix(), metric.clone()?.as_matrix())));
        forms.insert("sigma_metric_linear".into(), closed_form(r));
    }
    if inverse.sigma() {
        forms.insert(
            "sigma_spectral".into(),
            spectral_against(sigma_spectral_mean_formula(&a, &b, t)),
        );
    }
    if inverse.tilde() {
        forms.insert("tilde_general".into(), spectral_against(tilde_mean_general(&a, &b, t)));
        forms.insert("tilde_unit_det".into(), spectral_against(tilde_mean_formula(&a, &b, t)));
    }
    if a.dim() == 2 {
        forms.insert(
            "p2_spectral_closed_form".into(),
            spectral_against(spectral_mean_p2_closed_form(&a, &b, t)),
        );
        let metric = metric_mean(&a, &b, t);
        let r = metric_mean_linear_p2(&a, &b, t)
            .and_then(|x| Ok(rel_frobenius(x.as_matrix(), metric.clone()?.as_matrix())));
        forms.insert("p2_metric_linear".into(), closed_form(r));
    }
    let limit_branch = direct.sigma() && (direct.a - direct.b).abs() <= L_AB_MERGE_TOL * direct.b;
    Ok(Output::ok(json!({
        "pair": direct,
        "inverse_pair": inverse,
        "t": t,
        "l_ab_limit_branch": limit_branch,
        "closed_forms": forms,
        "tolerances": {
            "input": input_tolerances(),
            "tau": tau,
            "determinant": DET_TOL,
            "unit_determinant": UNIT_DET_TOL,
            "l_ab_merge": L_AB_MERGE_TOL,
            "closed_form": CLOSED_FORM_TOL,
        },
    })))
}

fn cmd_pinch(alpha: &Path, beta: &Path, positional: bool) -> Result<Output, Failure> {
    let alpha = parse_tuple(&read(alpha)?)?;
    let beta = parse_tuple(&read(beta)?)?;
    let chain: PinchChain = if positional {
        build_positional_chain(&alpha, &beta)?
    } else {
        build_pinch_chain(&alpha, &beta)?
    };
    let m = alpha.len();
    let steps = chain.averaging_steps();
    let scalar = verify_chain_scalar(&chain);
    let matrix = verify_chain_matrix(&chain);
    let passed = scalar <= CHAIN_TOL && matrix <= CHAIN_TOL;
    let report = json!({
        "chain": chain_to_json(&chain),
        "averaging_steps": steps,
        "total_steps": chain.steps.len(),
        "bound": m.saturating_sub(1),
        "reached_m": steps >= m,
        "scalar_deviation": scalar,
        "matrix_deviation": matrix,
        "passed": passed,
        "tolerances": { "replay": CHAIN_TOL },
    });
    Ok(Output {
        report,
        code: if passed { 0 } else { EXIT_VERIFICATION },
    })
}

fn cmd_ltk(a: &Path, b: &Path, t: f64, halvings: u32) -> Result<Output, Failure> {
    let (a, b) = load_pair(a, b)?;
    let schedule = halving_schedule(halvings);
    let errors = ltk_errors(&a, &b, t, &schedule)?;
    Ok(Output::ok(json!({
        "t": t,
        "s": schedule,
        "errors": errors,
        "converging": ltk_converging(&errors),
    })))
}

fn cmd_verify(
    seed: u64,
    dims: Option<Vec<usize>>,
    trials: Option<usize>,
    fixture: Option<&Path>,
) -> Result<Output, Failure> {
    let fixture = match fixture {
        None => ConvexityFixture::bundled(),
        Some(dir) => {
            let [a, b, c] = FIXTURE_FILES.map(|f| read(&dir.join(f)));
            ConvexityFixture::from_texts(&a?, &b?, &c?)?
        }
    };
    let cfg = VerifyConfig {
        seed,
        dims,
        trials,
        fixture,
    };
    let report = run_all(&cfg)?;
    let code = if report.passed { 0 } else { EXIT_VERIFICATION };
    let value = serde_json::to_value(&report).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        kind: "Serialize".into(),
        message: e.to_string(),
    })?;
    Ok(Output { report: value, code })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Mean { a, b, kind, t } => cmd_mean(a, b, *kind, *t),
        Command::Dist { a, b } => cmd_dist(a, b),
        Command::Tolerance { a, b, tau, t } => cmd_tolerance(a, b, *tau, *t),
        Command::Pinch {
            alpha,
            beta,
            positional_pinches,
        } => cmd_pinch(alpha, beta, *positional_pinches),
        Command::Ltk { a, b, t, halvings } => cmd_ltk(a, b, *t, *halvings),
        Command::Verify {
            seed,
            m,
            trials,
            fixture,
        } => cmd_verify(*seed, m.clone(), *trials, fixture.as_deref()),
    }
}

fn emit(cli: &Cli, value: &Value) -> Result<(), Failure> {
    let mut text = to_json_string(value);
    text.push('\n');
    match &cli.json {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: EXIT_INPUT,
            kind: "Io".into(),
            message: format!("{}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| emit(&cli, &out.report).map(|_| out.code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let err = json!({ "error": { "kind": f.kind, "message": f.message } });
            println!("{}", to_json_string(&err));
            eprintln!("sgm: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
