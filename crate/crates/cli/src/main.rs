//! `bgnd`: solve, evaluate, and inspect Bayesian generalized network design
//! instances.
//!
//! Exit codes: 0 success, 1 i/o error, 2 validation or parse error,
//! 3 proven bound violated by `eval` (a solver bug).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bgnd_cli::format;
use bgnd_cli::gen::{self, GenParams, RequestKindChoice};
use bgnd_cli::pipeline::{self, OracleChoice, SolveOptions};
use bgnd_cli::CliError;
use bgnd_core::eval::{self, EnumerationCaps};
use bgnd_core::gametheory::GameConstants;
use bgnd_core::model::Instance;
use bgnd_core::oracle::Oracle;

#[derive(Parser)]
#[command(name = "bgnd", version, about = "Bayesian generalized network design solver")]
struct Cli {
    /// Cap on enumerated type profiles (brute-force evaluation).
    #[arg(long, global = true)]
    cap_profiles: Option<u64>,
    /// Cap on candidate action combinations per type profile.
    #[arg(long, global = true)]
    cap_actions: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute constants, run the dynamics, and write the run report.
    Solve {
        instance: PathBuf,
        /// Oracle selection; `auto` dispatches per request kind.
        #[arg(long, value_enum, default_value_t = OracleArg::Auto)]
        oracle: OracleArg,
        /// Override the derived round cap.
        #[arg(long)]
        rounds: Option<u64>,
        /// Record exact potential / cost snapshots per round (slow).
        #[arg(long)]
        diagnostics: bool,
        /// Embed the competitive-ratio section (runs the brute-force optimum).
        #[arg(long)]
        bcr: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Exact cost of a solved report vs the brute-force expected optimum.
    Eval { instance: PathBuf, report: PathBuf },
    /// Print the derived game constants.
    Bound { instance: PathBuf },
    /// Brute-force expected optimum with the per-type-profile breakdown.
    Opt { instance: PathBuf },
    /// Generate a random instance, deterministic in the seed.
    Gen {
        #[arg(long)]
        seed: u64,
        /// Number of agents.
        #[arg(long)]
        n: usize,
        /// Graph nodes (resource count for explicit instances).
        #[arg(long, default_value_t = 6)]
        nodes: u32,
        /// Probability of each extra edge beyond the spanning tree.
        #[arg(long, default_value_t = 0.3)]
        edge_density: f64,
        #[arg(long, default_value_t = 2)]
        types: usize,
        /// Comma-separated cost exponents to draw from.
        #[arg(long, value_delimiter = ',', default_value = "2.0")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        xi_lo: f64,
        #[arg(long, default_value_t = 2.0)]
        xi_hi: f64,
        #[arg(long, value_enum, default_value_t = KindArg::Routing)]
        kind: KindArg,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleArg {
    Auto,
    ShortestPath,
    Steiner,
    Explicit,
}

impl From<OracleArg> for OracleChoice {
    fn from(arg: OracleArg) -> Self {
        match arg {
            OracleArg::Auto => OracleChoice::Auto,
            OracleArg::ShortestPath => OracleChoice::ShortestPath,
            OracleArg::Steiner => OracleChoice::Steiner,
            OracleArg::Explicit => OracleChoice::Explicit,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Routing,
    SetConnectivity,
    Explicit,
    Mixed,
}

impl From<KindArg> for RequestKindChoice {
    fn from(arg: KindArg) -> Self {
        match arg {
            KindArg::Routing => RequestKindChoice::Routing,
            KindArg::SetConnectivity => RequestKindChoice::SetConnectivity,
            KindArg::Explicit => RequestKindChoice::Explicit,
            KindArg::Mixed => RequestKindChoice::Mixed,
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path)?;
    format::parse_instance(&text)
}

/// Writes via a sibling temp file and rename, so outputs are never partial.
fn write_atomically(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn caps_from(cli: &Cli) -> EnumerationCaps {
    let mut caps = EnumerationCaps::default();
    if let Some(cap) = cli.cap_profiles {
        caps.max_type_profiles = cap;
    }
    if let Some(cap) = cli.cap_actions {
        caps.max_action_profiles = cap;
    }
    caps
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let caps = caps_from(cli);
    match &cli.command {
        Command::Solve {
            instance,
            oracle,
            rounds,
            diagnostics,
            bcr,
            output,
        } => {
            let inst = read_instance(instance)?;
            let opts = SolveOptions {
                oracle: (*oracle).into(),
                rounds_override: *rounds,
                diagnostics: *diagnostics,
                with_bcr: *bcr,
                caps,
            };
            let report = pipeline::solve(&inst, &opts)?;
            write_atomically(output, &format::serialize_report(&report))?;
            println!(
                "solved: {} rounds, {}",
                report.trace.rounds_executed,
                match report.trace.termination {
                    format::TerminationDoc::Converged => "converged",
                    format::TerminationDoc::RoundCap => "round cap reached",
                }
            );
            Ok(0)
        }
        Command::Eval { instance, report } => {
            let inst = read_instance(instance)?;
            let report = format::parse_report(&fs::read_to_string(report)?)?;
            let bcr = pipeline::evaluate(&inst, &report, &caps)?;
            println!("exact cost        = {}", bcr.exact_cost);
            println!("expected optimum  = {}", bcr.expected_opt);
            println!("empirical ratio   = {}", bcr.empirical_bcr);
            println!("theoretical bound = {}", bcr.theoretical_bound);
            if pipeline::bound_holds(&bcr) {
                println!("bound holds");
                Ok(0)
            } else {
                println!("BOUND VIOLATED");
                Ok(3)
            }
        }
        Command::Bound { instance } => {
            let inst = read_instance(instance)?;
            let oracle = Oracle::auto();
            let rho = oracle.rho(&inst)?;
            let constants = GameConstants::compute(&inst, rho)?;
            let doc = format::constants_to_doc(&constants);
            println!("rho      = {}", doc.rho);
            println!("eta_low  = {}", doc.eta_low);
            println!("eta_high = {}", doc.eta_high);
            println!("lambda   = {}", doc.lambda);
            println!("mu       = {}", doc.mu);
            println!("gamma    = {}", doc.gamma);
            println!("K        = {}", doc.k);
            println!("Q        = {}", doc.q);
            println!("R        = {}", doc.r);
            println!("bcr bound = {}", constants.theoretical_bcr_bound());
            Ok(0)
        }
        Command::Opt { instance } => {
            let inst = read_instance(instance)?;
            let rows = eval::expected_opt_report(&inst, &caps)?;
            let mut expected = 0.0;
            let mut index = 0usize;
            inst.for_each_type_profile(|t, p| {
                let (_, cost) = &rows[index];
                println!("profile {:?}: p = {p}, opt = {cost}", t.0);
                expected += p * cost;
                index += 1;
            });
            println!("expected optimum = {expected}");
            Ok(0)
        }
        Command::Gen {
            seed,
            n,
            nodes,
            edge_density,
            types,
            alphas,
            xi_lo,
            xi_hi,
            kind,
            output,
        } => {
            let params = GenParams {
                agents: *n,
                nodes: *nodes,
                edge_density: *edge_density,
                types_per_agent: *types,
                alphas: alphas.clone(),
                xi_range: (*xi_lo, *xi_hi),
                request_kind: (*kind).into(),
            };
            let inst = gen::generate_instance(*seed, &params)?;
            write_atomically(output, &format::serialize_instance(&inst))?;
            println!(
                "generated: {} agents, {} resources{}",
                inst.agent_count(),
                inst.resource_count(),
                inst.graph()
                    .map(|g| format!(", {} nodes", g.nodes))
                    .unwrap_or_default()
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
