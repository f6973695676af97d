//! Glue between the solver core and the file formats: run the dynamics and
//! assemble a report, or re-load a report and evaluate it against the
//! brute-force optimum.

use bgnd_core::dynamics::{self, DynamicsConfig};
use bgnd_core::eval::{self, EnumerationCaps};
use bgnd_core::gametheory::GameConstants;
use bgnd_core::model::Instance;
use bgnd_core::oracle::{Oracle, OracleKind};

use crate::format::{self, BcrDoc, ReportDoc};
use crate::CliError;

/// Slack allowed when comparing the empirical ratio to the proven bound;
/// covers float rounding in the two exact expectations.
pub const BOUND_TOLERANCE: f64 = 1e-6;

/// Oracle selection on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleChoice {
    /// Dispatch by request kind.
    #[default]
    Auto,
    ShortestPath,
    Steiner,
    Explicit,
}

impl OracleChoice {
    pub fn to_oracle(self) -> Oracle {
        match self {
            OracleChoice::Auto => Oracle::auto(),
            OracleChoice::ShortestPath => Oracle::forced(OracleKind::ShortestPath),
            OracleChoice::Steiner => Oracle::forced(OracleKind::SteinerMst),
            OracleChoice::Explicit => Oracle::forced(OracleKind::Explicit),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub oracle: OracleChoice,
    pub rounds_override: Option<u64>,
    pub diagnostics: bool,
    /// Also evaluate the output against the brute-force optimum and embed
    /// the ratio section in the report.
    pub with_bcr: bool,
    pub caps: EnumerationCaps,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            oracle: OracleChoice::Auto,
            rounds_override: None,
            diagnostics: false,
            with_bcr: false,
            caps: EnumerationCaps::default(),
        }
    }
}

/// Computes constants, runs the dynamics, and assembles the report.
pub fn solve(inst: &Instance, opts: &SolveOptions) -> Result<ReportDoc, CliError> {
    let oracle = opts.oracle.to_oracle();
    let rho = oracle.rho(inst)?;
    let constants = GameConstants::compute(inst, rho)?;
    let config = DynamicsConfig {
        round_cap_override: opts.rounds_override,
        diagnostics: opts.diagnostics,
    };
    let trace = dynamics::run(inst, &oracle, &constants, &config)?;
    let bcr = if opts.with_bcr {
        let report = eval::bcr_report(inst, &trace.final_profile, &constants, &opts.caps, false)?;
        Some(format::bcr_to_doc(&report))
    } else {
        None
    };
    Ok(ReportDoc {
        constants: format::constants_to_doc(&constants),
        trace: format::trace_to_doc(&trace),
        strategies: format::strategies_to_doc(&trace.final_profile),
        bcr,
    })
}

/// Derives the constants for `inst` and checks them against the ones a
/// report recorded; a mismatch means the report does not belong to this
/// instance (or was edited).
pub fn check_report_constants(inst: &Instance, report: &ReportDoc) -> Result<GameConstants, CliError> {
    let recorded = &report.constants;
    let recomputed = GameConstants::compute(inst, recorded.rho)?;
    let fresh = format::constants_to_doc(&recomputed);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let consistent = close(fresh.eta_low, recorded.eta_low)
        && close(fresh.eta_high, recorded.eta_high)
        && close(fresh.lambda, recorded.lambda)
        && close(fresh.mu, recorded.mu)
        && close(fresh.gamma, recorded.gamma)
        && fresh.k == recorded.k;
    if !consistent {
        return Err(CliError::Validation(
            "report constants do not match the instance".into(),
        ));
    }
    Ok(recomputed)
}

/// Re-loads the solved strategies, recomputes the exact cost and the
/// brute-force expected optimum, and reports the ratio against the bound.
pub fn evaluate(
    inst: &Instance,
    report: &ReportDoc,
    caps: &EnumerationCaps,
) -> Result<BcrDoc, CliError> {
    let profile = format::strategies_from_doc(inst, report)?;
    let constants = check_report_constants(inst, report)?;
    let bcr = eval::bcr_report(inst, &profile, &constants, caps, false)?;
    Ok(format::bcr_to_doc(&bcr))
}

/// Whether the empirical ratio respects the proven bound.
pub fn bound_holds(bcr: &BcrDoc) -> bool {
    bcr.empirical_bcr <= bcr.theoretical_bound + BOUND_TOLERANCE
}
