//! Core domain types for Bayesian generalized network design instances and
//! exact arithmetic on realized action profiles (loads, costs, cost shares).
//!
//! An [`Instance`] holds resources with polynomial cost functions, an
//! optional graph whose edges carry those resources, and agents with finite
//! type spaces and priors. Loads are exact integers; only cost space uses
//! double precision.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Graph node index, in `0..graph.nodes`.
pub type NodeId = u32;

/// Opaque resource identifier, unique within an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResourceId(pub u32);

impl core::fmt::Display for ResourceId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One `xi * l^alpha` term of a resource cost function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostTerm {
    /// Speed-scaling coefficient, strictly positive.
    pub coefficient: f64,
    /// Load exponent, at least 1.
    pub exponent: f64,
}

/// Superadditive polynomial cost of load: `F(l) = sum_j xi_j * l^alpha_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction {
    terms: Vec<CostTerm>,
}

impl CostFunction {
    /// Builds a cost function from its terms. Fails when there are no terms,
    /// a coefficient is not strictly positive, or an exponent is below 1.
    pub fn new(terms: Vec<CostTerm>) -> Result<Self> {
        let mut violations = Vec::new();
        if terms.is_empty() {
            violations.push(String::from("cost function has no terms"));
        }
        for (j, t) in terms.iter().enumerate() {
            if !t.coefficient.is_finite() || t.coefficient <= 0.0 {
                violations.push(format!(
                    "term {j}: coefficient {} must be finite and > 0",
                    t.coefficient
                ));
            }
            if !t.exponent.is_finite() || t.exponent < 1.0 {
                violations.push(format!(
                    "term {j}: exponent {} must be finite and >= 1",
                    t.exponent
                ));
            }
        }
        if violations.is_empty() {
            Ok(CostFunction { terms })
        } else {
            Err(Error::InvalidInstance(violations))
        }
    }

    pub fn terms(&self) -> &[CostTerm] {
        &self.terms
    }

    /// Evaluates `F(l)`. Zero load always costs zero.
    pub fn eval(&self, load: u32) -> f64 {
        if load == 0 {
            return 0.0;
        }
        let l = f64::from(load);
        self.terms
            .iter()
            .map(|t| t.coefficient * math::powf(l, t.exponent))
            .sum()
    }

    /// Equal-division share of `F(l)` per user: `sum_j xi_j * l^(alpha_j - 1)`.
    pub fn share(&self, load: u32) -> f64 {
        if load == 0 {
            return 0.0;
        }
        let l = f64::from(load);
        self.terms
            .iter()
            .map(|t| t.coefficient * math::powf(l, t.exponent - 1.0))
            .sum()
    }

    /// Largest exponent of the function.
    pub fn max_exponent(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.exponent)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A costed resource.
#[derive(Debug, Clone, PartialEq)]
pub struct Resource {
    pub id: ResourceId,
    pub cost: CostFunction,
}

/// A graph edge carrying exactly one resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub resource: ResourceId,
}

/// Directed or undirected graph whose edges are identified with resources.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub nodes: u32,
    pub directed: bool,
    pub edges: Vec<Edge>,
}

impl Graph {
    /// Edges incident to `node` that can be traversed away from it.
    pub(crate) fn arcs_from(&self, node: NodeId) -> impl Iterator<Item = (NodeId, ResourceId)> + '_ {
        self.edges.iter().filter_map(move |e| {
            if e.from == node {
                Some((e.to, e.resource))
            } else if !self.directed && e.to == node {
                Some((e.from, e.resource))
            } else {
                None
            }
        })
    }
}

/// A request an agent type must satisfy.
#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    /// Connect `source` to `target` with a path (directed if the graph is).
    Routing { source: NodeId, target: NodeId },
    /// Connect all terminals: a connected subgraph in undirected graphs, a
    /// mutually-reachable one in directed graphs.
    SetConnectivity { terminals: Vec<NodeId> },
    /// The action set, listed outright.
    Explicit { actions: Vec<Action> },
}

impl Request {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Request::Routing { .. } => "routing",
            Request::SetConnectivity { .. } => "set_connectivity",
            Request::Explicit { .. } => "explicit",
        }
    }

    fn needs_graph(&self) -> bool {
        !matches!(self, Request::Explicit { .. })
    }
}

/// An agent: a finite type space and a prior over it.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub types: Vec<Request>,
    pub prior: Vec<f64>,
}

impl Agent {
    pub fn type_count(&self) -> usize {
        self.types.len()
    }
}

/// A feasible action: a set of resource ids (sorted, deduplicated).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Action {
    ids: Vec<ResourceId>,
}

impl Action {
    pub fn empty() -> Self {
        Action { ids: Vec::new() }
    }

    /// Builds an action from arbitrary ids; sorts and deduplicates.
    pub fn from_ids(mut ids: Vec<ResourceId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Action { ids }
    }

    pub fn ids(&self) -> &[ResourceId] {
        &self.ids
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn contains(&self, id: ResourceId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }
}

/// One action per agent, for a realized type profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionProfile(pub Vec<Action>);

/// One realized type index per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeProfile(pub Vec<usize>);

/// Per agent, a total map from type index to action: the solver's output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProfile {
    /// `strategies[i][t]` is agent `i`'s action when its type is `t`.
    pub strategies: Vec<Vec<Action>>,
}

impl StrategyProfile {
    pub fn action(&self, agent: usize, type_index: usize) -> &Action {
        &self.strategies[agent][type_index]
    }

    /// The action profile this strategy profile induces on a type profile.
    pub fn realize(&self, t: &TypeProfile) -> ActionProfile {
        ActionProfile(
            self.strategies
                .iter()
                .zip(t.0.iter())
                .map(|(s_i, &t_i)| s_i[t_i].clone())
                .collect(),
        )
    }
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    resources: Vec<Resource>,
    graph: Option<Graph>,
    agents: Vec<Agent>,
    max_exponent: f64,
}

impl Instance {
    /// Validates and builds an instance. Resources are kept sorted by id so
    /// that resource indices (and every downstream iteration order) are
    /// canonical. Returns every violation found, not just the first.
    pub fn new(
        mut resources: Vec<Resource>,
        graph: Option<Graph>,
        agents: Vec<Agent>,
    ) -> Result<Self> {
        let mut violations = Vec::new();

        resources.sort_by_key(|r| r.id);
        for pair in resources.windows(2) {
            if pair[0].id == pair[1].id {
                violations.push(format!("duplicate resource id {}", pair[0].id));
            }
        }
        let known_ids: BTreeSet<ResourceId> = resources.iter().map(|r| r.id).collect();

        let max_exponent = resources
            .iter()
            .map(|r| r.cost.max_exponent())
            .fold(f64::NEG_INFINITY, f64::max);
        if !resources.is_empty() && max_exponent <= 1.0 {
            violations.push(format!(
                "instance-level max exponent is {max_exponent}, must be > 1"
            ));
        }
        if resources.is_empty() {
            violations.push(String::from("instance has no resources"));
        }

        if let Some(g) = &graph {
            let mut seen = BTreeSet::new();
            for (k, e) in g.edges.iter().enumerate() {
                if e.from >= g.nodes || e.to >= g.nodes {
                    violations.push(format!("edge {k}: endpoint out of range"));
                }
                if !known_ids.contains(&e.resource) {
                    violations.push(format!("edge {k}: unknown resource {}", e.resource));
                }
                if !seen.insert(e.resource) {
                    violations.push(format!(
                        "edge {k}: resource {} used by more than one edge",
                        e.resource
                    ));
                }
            }
        }

        if agents.is_empty() {
            violations.push(String::from("instance has no agents"));
        }
        for (i, agent) in agents.iter().enumerate() {
            if agent.types.is_empty() {
                violations.push(format!("agent {i}: empty type space"));
            }
            if agent.prior.len() != agent.types.len() {
                violations.push(format!(
                    "agent {i}: prior length {} != type count {}",
                    agent.prior.len(),
                    agent.types.len()
                ));
            }
            if agent.prior.iter().any(|&p| !p.is_finite() || p < 0.0) {
                violations.push(format!("agent {i}: prior has a negative or non-finite entry"));
            }
            let total: f64 = agent.prior.iter().sum();
            if math::abs(total - 1.0) > 1e-12 {
                violations.push(format!("agent {i}: prior sums to {total}"));
            }
            for (t, req) in agent.types.iter().enumerate() {
                match req {
                    Request::Routing { source, target } => match &graph {
                        None => violations.push(format!(
                            "agent {i} type {t}: routing request but instance has no graph"
                        )),
                        Some(g) => {
                            if *source >= g.nodes || *target >= g.nodes {
                                violations.push(format!(
                                    "agent {i} type {t}: routing endpoint out of range"
                                ));
                            }
                        }
                    },
                    Request::SetConnectivity { terminals } => match &graph {
                        None => violations.push(format!(
                            "agent {i} type {t}: set-connectivity request but instance has no graph"
                        )),
                        Some(g) => {
                            if terminals.len() < 2 {
                                violations.push(format!(
                                    "agent {i} type {t}: set-connectivity needs >= 2 terminals"
                                ));
                            }
                            if terminals.iter().any(|&n| n >= g.nodes) {
                                violations.push(format!(
                                    "agent {i} type {t}: terminal out of range"
                                ));
                            }
                        }
                    },
                    Request::Explicit { actions } => {
                        if actions.is_empty() {
                            violations.push(format!(
                                "agent {i} type {t}: explicit request lists no actions"
                            ));
                        }
                        for (k, a) in actions.iter().enumerate() {
                            if a.is_empty() {
                                violations.push(format!(
                                    "agent {i} type {t}: explicit action {k} is empty"
                                ));
                            }
                            for id in a.ids() {
                                if !known_ids.contains(id) {
                                    violations.push(format!(
                                        "agent {i} type {t}: explicit action {k} references unknown resource {id}"
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }

        if !violations.is_empty() {
            return Err(Error::InvalidInstance(violations));
        }
        Ok(Instance {
            resources,
            graph,
            agents,
            max_exponent,
        })
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn graph(&self) -> Option<&Graph> {
        self.graph.as_ref()
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    /// Largest cost exponent over all resources; validated to exceed 1.
    pub fn max_exponent(&self) -> f64 {
        self.max_exponent
    }

    /// Dense index of a resource id (resources are sorted by id).
    pub fn resource_index(&self, id: ResourceId) -> Option<usize> {
        self.resources.binary_search_by_key(&id, |r| r.id).ok()
    }

    pub fn resource(&self, id: ResourceId) -> Option<&Resource> {
        self.resource_index(id).map(|k| &self.resources[k])
    }

    /// Number of agents whose action in `a` contains resource `e`.
    pub fn load(&self, a: &ActionProfile, e: ResourceId) -> u32 {
        a.0.iter().filter(|action| action.contains(e)).count() as u32
    }

    /// Cost share of agent `i` on resource `e` under realized profile `a`:
    /// zero when `i` does not use `e`, otherwise the equal split
    /// `sum_j xi_j * l^(alpha_j - 1)`.
    pub fn cost_share(&self, i: usize, a: &ActionProfile, e: ResourceId) -> f64 {
        if !a.0[i].contains(e) {
            return 0.0;
        }
        let resource = self.resource(e).expect("action references a known resource");
        resource.cost.share(self.load(a, e))
    }

    /// Total realized cost `sum_e F_e(load_e)`.
    pub fn realized_social_cost(&self, a: &ActionProfile) -> f64 {
        self.resources
            .iter()
            .map(|r| r.cost.eval(self.load(a, r.id)))
            .sum()
    }

    /// Realized individual cost of agent `i`: its cost shares summed over
    /// the resources of its own action.
    pub fn realized_individual_cost(&self, i: usize, a: &ActionProfile) -> f64 {
        a.0[i]
            .ids()
            .iter()
            .map(|&e| self.cost_share(i, a, e))
            .sum()
    }

    /// Checks feasibility of `action` for `req`.
    pub fn feasible(&self, req: &Request, action: &Action) -> Result<bool> {
        if req.needs_graph() && self.graph.is_none() {
            return Err(Error::MissingGraph);
        }
        Ok(match req {
            Request::Routing { source, target } => {
                let g = self.graph.as_ref().expect("checked above");
                reachable(g, action, *source).contains(target)
            }
            Request::SetConnectivity { terminals } => {
                let g = self.graph.as_ref().expect("checked above");
                // Every terminal must reach every other one over the action's
                // edges; for undirected graphs one search suffices.
                if terminals.len() <= 1 {
                    true
                } else if g.directed {
                    terminals.iter().all(|&t| {
                        let r = reachable(g, action, t);
                        terminals.iter().all(|other| r.contains(other))
                    })
                } else {
                    let r = reachable(g, action, terminals[0]);
                    terminals.iter().all(|t| r.contains(t))
                }
            }
            Request::Explicit { actions } => actions.iter().any(|a| a == action),
        })
    }

    /// Checks that a strategy profile maps every type of every agent to a
    /// feasible action.
    pub fn validate_strategy_profile(&self, s: &StrategyProfile) -> Result<()> {
        if s.strategies.len() != self.agents.len() {
            return Err(Error::InvalidInstance(vec![format!(
                "strategy profile covers {} agents, instance has {}",
                s.strategies.len(),
                self.agents.len()
            )]));
        }
        for (i, (agent, s_i)) in self.agents.iter().zip(&s.strategies).enumerate() {
            if s_i.len() != agent.types.len() {
                return Err(Error::InvalidInstance(vec![format!(
                    "agent {i}: strategy covers {} types, agent has {}",
                    s_i.len(),
                    agent.types.len()
                )]));
            }
            for (t, req) in agent.types.iter().enumerate() {
                for id in s_i[t].ids() {
                    if self.resource_index(*id).is_none() {
                        return Err(Error::InfeasibleAction {
                            agent: i,
                            type_index: t,
                        });
                    }
                }
                if !self.feasible(req, &s_i[t])? {
                    return Err(Error::InfeasibleAction {
                        agent: i,
                        type_index: t,
                    });
                }
            }
        }
        Ok(())
    }

    /// Iterates all type profiles in lexicographic order, calling `visit`
    /// with each profile and its product-prior probability.
    pub fn for_each_type_profile<F: FnMut(&TypeProfile, f64)>(&self, mut visit: F) {
        let counts: Vec<usize> = self.agents.iter().map(|a| a.types.len()).collect();
        let mut current = TypeProfile(vec![0; counts.len()]);
        loop {
            let p: f64 = self
                .agents
                .iter()
                .zip(current.0.iter())
                .map(|(a, &t)| a.prior[t])
                .product();
            visit(&current, p);
            // odometer increment
            let mut k = counts.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                current.0[k] += 1;
                if current.0[k] < counts[k] {
                    break;
                }
                current.0[k] = 0;
            }
        }
    }

    /// Total number of type profiles, saturating.
    pub fn type_profile_count(&self) -> u128 {
        self.agents
            .iter()
            .map(|a| a.types.len() as u128)
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }
}

/// Nodes reachable from `start` using only edges whose resource is in the
/// action (directed traversal if the graph is directed).
fn reachable(g: &Graph, action: &Action, start: NodeId) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    seen.insert(start);
    while let Some(node) = stack.pop() {
        for (next, rid) in g.arcs_from(node) {
            if action.contains(rid) && seen.insert(next) {
                stack.push(next);
            }
        }
    }
    seen
}
