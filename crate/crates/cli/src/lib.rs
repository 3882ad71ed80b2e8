//! Orchestration behind the `solenoidal` binary: configuration parsing,
//! suite composition, and deterministic text/JSON report rendering.
//!
//! Reports are byte-reproducible for a fixed `(config, seed)` pair: the run
//! id is a stable digest of the configuration, sampling is stream-keyed, and
//! wall-clock timing is only emitted on request.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use solenoidal_core::algebra::{relations_suite, AlgContext, RelationOptions};
use solenoidal_core::bibundle::{BibundleError, BibundleSpec, VerifyOptions};
use solenoidal_core::bimodule::{
    bimodule_suite, imprimitivity_check, BimoduleOptions, StepFn, StepFnLiteral, TripleOptions,
};
use solenoidal_core::exact::{
    self, parse_padic_digits, parse_rat, set_cyclo_cap, Rat, SplitScalar,
};
use solenoidal_core::groupoid::{
    axiom_suite, immersion_check, CircleRotation, FullSolenoidalAction, SolenoidalAction,
};
use solenoidal_core::moebius::{
    c_zero_affine_parts, factor_eps, mobius_pullback, moebius_suite, mu_eps_check, Mat2,
    MoebiusOptions,
};
use solenoidal_core::report::SuiteReport;
use solenoidal_core::solenoid::{orbit_solve, parse_point, pi_map};
use solenoidal_core::EqMode;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("NotStrict: matrix entry c = {0} is not a unit of the acting lattice")]
    NotStrict(String),
}

impl From<exact::NumError> for CliError {
    fn from(e: exact::NumError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<BibundleError> for CliError {
    fn from(e: BibundleError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// The run configuration as echoed into every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u32,
    pub alpha_t: String,
    pub alpha_r: String,
    pub matrix: String,
    pub level: u32,
    pub alg_level: u32,
    pub samples: u64,
    pub seed: u64,
    pub mode: String,
    pub tolerance: f64,
    pub cyclo_cap: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 2,
            alpha_t: "1/3".into(),
            alpha_r: "5/2".into(),
            matrix: "0,1;1,0".into(),
            level: 8,
            alg_level: 12,
            samples: 500,
            seed: 42,
            mode: "exact".into(),
            tolerance: 1e-9,
            cyclo_cap: 1 << 16,
        }
    }
}

/// Parsed configuration ready to drive the suites.
pub struct Resolved {
    pub config: RunConfig,
    pub alpha: SplitScalar,
    pub matrix: Mat2,
    pub eq: EqMode,
}

/// Parses a real-component literal: `n/d`, an integer, or a decimal.
pub fn parse_real_literal(s: &str) -> Result<Rat, CliError> {
    Ok(parse_rat(s)?)
}

/// Parses the p-adic component: `n/d`, a decimal, or a digit string
/// `d0.d1d2...@v`.
pub fn parse_padic_literal(s: &str, p: u32) -> Result<Rat, CliError> {
    if s.contains('@') {
        return Ok(parse_padic_digits(s, p)?);
    }
    parse_real_literal(s)
}

pub fn resolve(config: RunConfig) -> Result<Resolved, CliError> {
    if config.p < 2 || !is_prime(config.p) {
        return Err(CliError::Input(format!("p = {} is not a prime", config.p)));
    }
    set_cyclo_cap(config.cyclo_cap);
    let alpha = SplitScalar::new(
        parse_real_literal(&config.alpha_t)?,
        parse_padic_literal(&config.alpha_r, config.p)?,
    );
    let matrix = Mat2::parse(&config.matrix, config.p)?;
    let eq = match config.mode.as_str() {
        "exact" => EqMode::Exact,
        "float" => EqMode::Float {
            tol: config.tolerance,
        },
        other => {
            return Err(CliError::Input(format!(
                "mode must be exact or float, got {other:?}"
            )))
        }
    };
    Ok(Resolved {
        config,
        alpha,
        matrix,
        eq,
    })
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Strictness of the configured matrix: `c` a unit `+-p^k`.
pub fn matrix_is_strict(m: &Mat2) -> bool {
    !m.c.is_zero() && m.c.is_unit()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteSelector {
    Groupoid,
    Moebius,
    Bibundle,
    Algebra,
    Bimodule,
    All,
}

impl FromStr for SuiteSelector {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "groupoid" => SuiteSelector::Groupoid,
            "moebius" => SuiteSelector::Moebius,
            "bibundle" => SuiteSelector::Bibundle,
            "algebra" => SuiteSelector::Algebra,
            "bimodule" => SuiteSelector::Bimodule,
            "all" => SuiteSelector::All,
            other => return Err(CliError::Input(format!(
                "unknown suite {other:?}; expected groupoid|moebius|bibundle|algebra|bimodule|all"
            ))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub run_id: String,
    pub config: RunConfig,
    pub suites: Vec<SuiteReport>,
    pub timing_ms: Option<u128>,
}

impl RunReport {
    /// Exit gate: every check passes or is a measured report-mode defect.
    pub fn gate_passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::gate_passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Stable digest of the configuration; not cryptographic, just reproducible.
pub fn run_id(config: &RunConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let h1 = fnv1a64(canonical.as_bytes(), 0xcbf29ce484222325);
    let h2 = fnv1a64(canonical.as_bytes(), h1 ^ 0x9e3779b97f4a7c15);
    format!("{h1:016x}{h2:016x}")
}

fn fnv1a64(bytes: &[u8], offset: u64) -> u64 {
    let mut h = offset;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// A step-function triple supplied on the wire for the bimodule checks.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct StepTripleLiteral {
    pub phi: StepFnLiteral,
    pub psi: StepFnLiteral,
    pub chi: StepFnLiteral,
}

/// Runs the imprimitivity checks for an explicit step-function triple.
pub fn run_step_triple(
    rz: &Resolved,
    literal: &StepTripleLiteral,
) -> Result<SuiteReport, CliError> {
    let cfg = &rz.config;
    let spec = Arc::new(build_spec(rz)?);
    let phi = StepFn::from_literal(&literal.phi, cfg.p)?;
    let psi = StepFn::from_literal(&literal.psi, cfg.p)?;
    let chi = StepFn::from_literal(&literal.chi, cfg.p)?;
    imprimitivity_check(
        &spec,
        &phi,
        &psi,
        &chi,
        &TripleOptions {
            points: (cfg.samples / 5).max(20),
            seed: cfg.seed,
            stream: 60,
            mode: rz.eq,
        },
    )
    .map_err(|e| CliError::Input(e.to_string()))
}

/// Runs the selected verification suites.
pub fn run_verify(
    rz: &Resolved,
    selector: SuiteSelector,
    strict_only: bool,
    timings: bool,
) -> Result<RunReport, CliError> {
    run_verify_with_steps(rz, selector, strict_only, timings, None)
}

/// Like [`run_verify`], with an optional explicit step-function triple for
/// the bimodule checks.
pub fn run_verify_with_steps(
    rz: &Resolved,
    selector: SuiteSelector,
    strict_only: bool,
    timings: bool,
    steps: Option<&StepTripleLiteral>,
) -> Result<RunReport, CliError> {
    if strict_only && !matrix_is_strict(&rz.matrix) {
        return Err(CliError::NotStrict(rz.matrix.c.to_string()));
    }
    let start = std::time::Instant::now();
    let cfg = &rz.config;
    let mut suites = Vec::new();
    let run_all = selector == SuiteSelector::All;

    if run_all || selector == SuiteSelector::Groupoid {
        let s_alpha = SolenoidalAction::new(cfg.p, rz.alpha.clone(), cfg.level);
        suites.push(axiom_suite(&s_alpha, cfg.samples, cfg.seed, 10, &rz.eq));
        let full = FullSolenoidalAction::new(cfg.p, rz.alpha.clone(), cfg.level);
        suites.push(axiom_suite(&full, cfg.samples, cfg.seed, 11, &rz.eq));
        let torus = CircleRotation::new(rz.alpha.real().clone());
        suites.push(axiom_suite(&torus, cfg.samples, cfg.seed, 12, &rz.eq));
        let mut immersion = SuiteReport::new("groupoid_immersion");
        immersion.push(immersion_check(&s_alpha, cfg.samples, cfg.seed, 13, &rz.eq).finish());
        suites.push(immersion);
    }

    if run_all || selector == SuiteSelector::Moebius {
        suites.push(moebius_suite(
            cfg.p,
            &rz.alpha,
            &MoebiusOptions {
                samples: cfg.samples.min(200),
                seed: cfg.seed,
                stream: 20,
                mode: rz.eq,
            },
        ));
    }

    if run_all || selector == SuiteSelector::Bibundle {
        suites.extend(bibundle_pipeline(rz, 30)?);
    }

    if run_all || selector == SuiteSelector::Algebra {
        let ctx = AlgContext::new(cfg.p, rz.alpha.clone());
        suites.push(relations_suite(
            &ctx,
            &RelationOptions {
                max_depth: cfg.alg_level / 2,
                phase_level: cfg.alg_level,
                cocycle_samples: cfg.samples * 2,
                assoc_samples: (cfg.samples / 5).max(20),
                seed: cfg.seed,
                stream: 40,
                mode: rz.eq,
            },
        ));
    }

    if run_all || selector == SuiteSelector::Bimodule {
        match build_spec(rz) {
            Ok(spec) if spec.strict() => {
                let spec = Arc::new(spec);
                let suite = bimodule_suite(
                    &spec,
                    &BimoduleOptions {
                        arrows: (cfg.samples / 10).max(10),
                        points: (cfg.samples / 5).max(20),
                        triples: 10,
                        windows: (cfg.samples / 5).max(20),
                        seed: cfg.seed,
                        stream: 50,
                        mode: rz.eq,
                    },
                )
                .map_err(|e| CliError::Input(e.to_string()))?;
                suites.push(suite);
            }
            _ if selector == SuiteSelector::Bimodule => {
                return Err(CliError::Input(
                    "bimodule suite requires a strict-mode bibundle (c a unit +-p^k)".into(),
                ));
            }
            // Under `all`, a non-strict or degenerate matrix simply has no
            // bimodule instance.
            _ => {}
        }
        if let Some(triple) = steps {
            suites.push(run_step_triple(rz, triple)?);
        }
    }

    Ok(RunReport {
        run_id: run_id(cfg),
        config: cfg.clone(),
        suites,
        timing_ms: timings.then(|| start.elapsed().as_millis()),
    })
}

fn build_spec(rz: &Resolved) -> Result<BibundleSpec, BibundleError> {
    BibundleSpec::build(rz.config.p, &rz.alpha, &rz.matrix, rz.config.level)
}

/// The matrix route for the bibundle suite: `SL_2`-with-`c != 0` matrices
/// verify directly; a unit determinant splits off through the scaling
/// isomorphism; `c = 0` reduces to the affine route entirely.
fn bibundle_pipeline(rz: &Resolved, stream: u64) -> Result<Vec<SuiteReport>, CliError> {
    let cfg = &rz.config;
    let mut suites = Vec::new();

    if rz.matrix.c.is_zero() {
        // beta = eps^{-1} eps2 alpha + translation; the translation acts
        // through the kernel, so the whole route is one scaling isomorphism.
        let mut suite = SuiteReport::new(format!("bibundle_route[c=0, matrix={}]", rz.matrix));
        let (m_sl, _m_eps, eps) =
            factor_eps(&rz.matrix).map_err(|e| CliError::Input(e.to_string()))?;
        let (eps2, _off) =
            c_zero_affine_parts(&m_sl).map_err(|e| CliError::Input(e.to_string()))?;
        let sys = SolenoidalAction::new(cfg.p, rz.alpha.clone(), cfg.level);
        let route_unit = eps
            .inv_unit()
            .map(|e| e.mul(&eps2))
            .map_err(|e| CliError::Input(e.to_string()))?;
        suite.push(
            mu_eps_check(
                &sys,
                &route_unit,
                cfg.samples.min(200),
                cfg.seed,
                stream + 1,
                &rz.eq,
            )
            .finish(),
        );
        suites.push(suite);
        return Ok(suites);
    }

    let det = rz.matrix.det();
    let (m_sl, eps) = if det.is_one() || det.neg().is_one() {
        (rz.matrix.clone(), None)
    } else {
        let (m_sl, _m_eps, eps) =
            factor_eps(&rz.matrix).map_err(|e| CliError::Input(e.to_string()))?;
        (m_sl, Some(eps))
    };

    let spec = BibundleSpec::build(cfg.p, &rz.alpha, &m_sl, cfg.level)?;
    suites.push(solenoidal_core::bibundle::verify_equivalence(
        &spec,
        &VerifyOptions {
            samples: cfg.samples,
            seed: cfg.seed,
            stream,
            mode: rz.eq,
        },
    ));

    if let Some(eps) = eps {
        // The remaining diagonal unit acts through the scaling isomorphism
        // on the pulled-back groupoid.
        let beta_mid =
            mobius_pullback(&m_sl, &rz.alpha).map_err(|e| CliError::Input(e.to_string()))?;
        let sys = SolenoidalAction::new(cfg.p, beta_mid, cfg.level);
        let eps_inv = eps.inv_unit().map_err(|e| CliError::Input(e.to_string()))?;
        let mut suite = SuiteReport::new(format!("bibundle_route[det={det}]"));
        suite.push(
            mu_eps_check(
                &sys,
                &eps_inv,
                cfg.samples.min(200),
                cfg.seed,
                stream + 2,
                &rz.eq,
            )
            .finish(),
        );
        suites.push(suite);
    }

    // The circle-rotation instance runs alongside whenever the matrix has
    // integer entries.
    if [&rz.matrix.a, &rz.matrix.b, &rz.matrix.c, &rz.matrix.d]
        .iter()
        .all(|e| e.is_integer())
        && (det.is_one() || det.neg().is_one())
    {
        let torus = BibundleSpec::build_torus(cfg.p, rz.alpha.real(), &rz.matrix)?;
        suites.push(solenoidal_core::bibundle::verify_equivalence(
            &torus,
            &VerifyOptions {
                samples: cfg.samples,
                seed: cfg.seed,
                stream: stream + 3,
                mode: rz.eq,
            },
        ));
    }

    Ok(suites)
}

/// `compute-beta`: the pullback along the configured matrix, with the
/// determinant, its unit factor and the strictness classification.
pub fn compute_beta_text(rz: &Resolved) -> Result<String, CliError> {
    let beta =
        mobius_pullback(&rz.matrix, &rz.alpha).map_err(|e| CliError::Input(e.to_string()))?;
    let det = rz.matrix.det();
    let eps = if det.is_unit() {
        det.to_string()
    } else {
        format!("{det} (not a unit)")
    };
    let mode = if matrix_is_strict(&rz.matrix) {
        "strict"
    } else {
        "report"
    };
    let mut out = String::new();
    let _ = writeln!(out, "alpha = {}", rz.alpha);
    let _ = writeln!(out, "matrix = {}", rz.matrix);
    let _ = writeln!(out, "beta = {beta}");
    let _ = writeln!(out, "det = {det}");
    let _ = writeln!(out, "eps = {eps}");
    let _ = writeln!(out, "mode = {mode}");
    Ok(out)
}

/// `orbit`: constructive preimage of a coherent point literal under the
/// exponential, verified by a round trip before printing.
pub fn orbit_text(rz: &Resolved, point_literal: &str) -> Result<String, CliError> {
    let z = parse_point(point_literal, rz.config.p)?;
    let q = orbit_solve(&z).map_err(|e| CliError::Input(e.to_string()))?;
    let back = pi_map(rz.config.p, &q, z.level());
    if back != z {
        return Err(CliError::Input(format!(
            "round trip failed: pi({q}) = {back} != {z}"
        )));
    }
    Ok(format!("z = {z}\nq = {q}\n"))
}

/// One line per check plus a gate summary.
pub fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "run {}", report.run_id);
    let cfg = &report.config;
    let _ = writeln!(
        out,
        "config p={} alpha=({}, {}) matrix={} level={} alg_level={} samples={} seed={} mode={}",
        cfg.p,
        cfg.alpha_t,
        cfg.alpha_r,
        cfg.matrix,
        cfg.level,
        cfg.alg_level,
        cfg.samples,
        cfg.seed,
        cfg.mode
    );
    let mut checks = 0usize;
    for suite in &report.suites {
        for check in &suite.checks {
            checks += 1;
            let status = match check.status {
                solenoidal_core::ReportStatus::Pass => "PASS",
                solenoidal_core::ReportStatus::Fail => "FAIL",
                solenoidal_core::ReportStatus::Defect => "DEFECT",
            };
            let _ = write!(
                out,
                "[{status}] {}/{} ({} samples)",
                suite.name, check.id, check.samples
            );
            if let Some(phase) = &check.defect_phase {
                let _ = write!(out, " defect_phase={phase}");
            }
            if check.status == solenoidal_core::ReportStatus::Fail {
                if let Some(cex) = &check.counterexample {
                    let _ = write!(out, " counterexample: {cex}");
                }
            }
            let _ = writeln!(out);
        }
    }
    let _ = writeln!(
        out,
        "RESULT: {} ({} checks in {} suites)",
        if report.gate_passed() { "PASS" } else { "FAIL" },
        checks,
        report.suites.len()
    );
    if let Some(ms) = report.timing_ms {
        let _ = writeln!(out, "timing_ms {ms}");
    }
    out
}
