//! JSON interchange formats.
//!
//! Two documents: the instance file (resources, optional graph, agents) and
//! the run report (constants, trace summary, strategy tables, optional
//! competitive-ratio section). Serialization is canonical (object keys
//! sorted, resource ids sorted, floats in shortest exact round-trip form),
//! so identical inputs produce byte-identical files and golden tests are
//! meaningful. Parse errors carry the path into the offending document.

use serde::{Deserialize, Serialize};

use bgnd_core::dynamics::{DynamicsTrace, Termination};
use bgnd_core::eval::BcrReport;
use bgnd_core::gametheory::GameConstants;
use bgnd_core::model::{
    Action, Agent, CostFunction, CostTerm, Edge, Graph, Instance, Request, Resource, ResourceId,
    StrategyProfile,
};

use crate::CliError;

// ---------------------------------------------------------------------------
// instance document
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub resources: Vec<ResourceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDoc>,
    pub agents: Vec<AgentDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceDoc {
    pub id: u32,
    pub terms: Vec<TermDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub xi: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub nodes: u32,
    pub directed: bool,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: u32,
    pub to: u32,
    pub resource: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentDoc {
    pub types: Vec<RequestDoc>,
    pub prior: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RequestDoc {
    Routing { source: u32, target: u32 },
    SetConnectivity { terminals: Vec<u32> },
    Explicit { actions: Vec<Vec<u32>> },
}

// ---------------------------------------------------------------------------
// run report document
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub constants: ConstantsDoc,
    pub trace: TraceDoc,
    /// Per agent, per type: the sorted resource ids of the chosen action.
    pub strategies: Vec<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bcr: Option<BcrDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsDoc {
    pub rho: f64,
    pub eta_low: f64,
    pub eta_high: f64,
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    pub k: u32,
    pub q: f64,
    pub r: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub rounds_executed: u64,
    pub termination: TerminationDoc,
    pub rounds: Vec<RoundDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationDoc {
    Converged,
    RoundCap,
}

/// One round: the chosen agent and its improvement margin; both absent on
/// the convergence round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundDoc {
    pub round: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcrDoc {
    pub exact_cost: f64,
    pub expected_opt: f64,
    pub empirical_bcr: f64,
    pub theoretical_bound: f64,
}

// ---------------------------------------------------------------------------
// parsing and canonical serialization
// ---------------------------------------------------------------------------

fn parse_doc<'de, T: Deserialize<'de>>(text: &'de str, what: &str) -> Result<T, CliError> {
    let deserializer = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(deserializer).map_err(|err| {
        CliError::Parse(format!(
            "{what}: {} (at {})",
            err.inner(),
            if err.path().to_string() == "." {
                "document root".to_string()
            } else {
                err.path().to_string()
            }
        ))
    })
}

/// Canonical JSON: keys sorted (via the value layer), two-space indent,
/// trailing newline. Floats use the shortest representation that parses
/// back to the identical bits, so round-trips are exact.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable document");
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    text
}

pub fn parse_instance(text: &str) -> Result<Instance, CliError> {
    let doc: InstanceDoc = parse_doc(text, "instance")?;
    instance_from_doc(&doc)
}

pub fn serialize_instance(inst: &Instance) -> String {
    canonical_json(&instance_to_doc(inst))
}

pub fn parse_report(text: &str) -> Result<ReportDoc, CliError> {
    parse_doc(text, "report")
}

pub fn serialize_report(report: &ReportDoc) -> String {
    canonical_json(report)
}

pub fn instance_from_doc(doc: &InstanceDoc) -> Result<Instance, CliError> {
    let resources = doc
        .resources
        .iter()
        .map(|r| {
            let terms = r
                .terms
                .iter()
                .map(|t| CostTerm {
                    coefficient: t.xi,
                    exponent: t.alpha,
                })
                .collect();
            Ok(Resource {
                id: ResourceId(r.id),
                cost: CostFunction::new(terms).map_err(|e| {
                    CliError::Validation(format!("resources[{}]: {e}", r.id))
                })?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let graph = doc.graph.as_ref().map(|g| Graph {
        nodes: g.nodes,
        directed: g.directed,
        edges: g
            .edges
            .iter()
            .map(|e| Edge {
                from: e.from,
                to: e.to,
                resource: ResourceId(e.resource),
            })
            .collect(),
    });
    let agents = doc
        .agents
        .iter()
        .map(|a| Agent {
            types: a.types.iter().map(request_from_doc).collect(),
            prior: a.prior.clone(),
        })
        .collect();
    Instance::new(resources, graph, agents).map_err(Into::into)
}

fn request_from_doc(doc: &RequestDoc) -> Request {
    match doc {
        RequestDoc::Routing { source, target } => Request::Routing {
            source: *source,
            target: *target,
        },
        RequestDoc::SetConnectivity { terminals } => Request::SetConnectivity {
            terminals: terminals.clone(),
        },
        RequestDoc::Explicit { actions } => Request::Explicit {
            actions: actions
                .iter()
                .map(|ids| Action::from_ids(ids.iter().map(|&v| ResourceId(v)).collect()))
                .collect(),
        },
    }
}

pub fn instance_to_doc(inst: &Instance) -> InstanceDoc {
    InstanceDoc {
        resources: inst
            .resources()
            .iter()
            .map(|r| ResourceDoc {
                id: r.id.0,
                terms: r
                    .cost
                    .terms()
                    .iter()
                    .map(|t| TermDoc {
                        xi: t.coefficient,
                        alpha: t.exponent,
                    })
                    .collect(),
            })
            .collect(),
        graph: inst.graph().map(|g| GraphDoc {
            nodes: g.nodes,
            directed: g.directed,
            edges: g
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    from: e.from,
                    to: e.to,
                    resource: e.resource.0,
                })
                .collect(),
        }),
        agents: inst
            .agents()
            .iter()
            .map(|a| AgentDoc {
                types: a.types.iter().map(request_to_doc).collect(),
                prior: a.prior.clone(),
            })
            .collect(),
    }
}

fn request_to_doc(req: &Request) -> RequestDoc {
    match req {
        Request::Routing { source, target } => RequestDoc::Routing {
            source: *source,
            target: *target,
        },
        Request::SetConnectivity { terminals } => RequestDoc::SetConnectivity {
            terminals: terminals.clone(),
        },
        Request::Explicit { actions } => RequestDoc::Explicit {
            actions: actions
                .iter()
                .map(|a| a.ids().iter().map(|id| id.0).collect())
                .collect(),
        },
    }
}

pub fn constants_to_doc(c: &GameConstants) -> ConstantsDoc {
    ConstantsDoc {
        rho: c.rho,
        eta_low: c.eta_low,
        eta_high: c.eta_high,
        lambda: c.smoothness.lambda,
        mu: c.smoothness.mu,
        gamma: c.smoothness.gamma,
        k: c.k,
        q: c.q,
        r: c.r,
    }
}

pub fn trace_to_doc(trace: &DynamicsTrace) -> TraceDoc {
    TraceDoc {
        rounds_executed: trace.rounds_executed(),
        termination: match trace.termination {
            Termination::Converged => TerminationDoc::Converged,
            Termination::RoundCap => TerminationDoc::RoundCap,
        },
        rounds: trace
            .rounds
            .iter()
            .map(|r| RoundDoc {
                round: r.round,
                chosen: r.chosen,
                delta: r.chosen.map(|i| r.deltas[i]),
            })
            .collect(),
    }
}

pub fn strategies_to_doc(s: &StrategyProfile) -> Vec<Vec<Vec<u32>>> {
    s.strategies
        .iter()
        .map(|per_agent| {
            per_agent
                .iter()
                .map(|action| action.ids().iter().map(|id| id.0).collect())
                .collect()
        })
        .collect()
}

pub fn bcr_to_doc(report: &BcrReport) -> BcrDoc {
    BcrDoc {
        exact_cost: report.exact_cost,
        expected_opt: report.expected_opt,
        empirical_bcr: report.empirical_bcr,
        theoretical_bound: report.theoretical_bound,
    }
}

/// Rebuilds the strategy profile from a report and verifies feasibility
/// against the instance.
pub fn strategies_from_doc(inst: &Instance, doc: &ReportDoc) -> Result<StrategyProfile, CliError> {
    let strategies = doc
        .strategies
        .iter()
        .map(|per_agent| {
            per_agent
                .iter()
                .map(|ids| Action::from_ids(ids.iter().map(|&v| ResourceId(v)).collect()))
                .collect()
        })
        .collect();
    let profile = StrategyProfile { strategies };
    inst.validate_strategy_profile(&profile)
        .map_err(|e| CliError::Validation(format!("report strategies: {e}")))?;
    Ok(profile)
}
