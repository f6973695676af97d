//! Seeded random instances and strategies for validation tests.

use bgnd_core::eval::{self, EnumerationCaps};
use bgnd_core::model::{
    Action, Agent, CostFunction, CostTerm, Edge, Graph, Instance, Request, Resource, ResourceId,
    StrategyProfile,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn power(coefficient: f64, alpha: f64) -> CostFunction {
    CostFunction::new(vec![CostTerm {
        coefficient,
        exponent: alpha,
    }])
    .unwrap()
}

fn dirichlet_prior(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..len)
        .map(|_| -f64::ln(1.0 - rng.random::<f64>()))
        .collect();
    let total: f64 = draws.iter().sum();
    draws.iter().map(|d| d / total).collect()
}

/// Random instance with explicit action lists: `agents` agents, up to
/// `max_types` types each, all cost exponents drawn from `alphas`.
pub fn explicit_instance(rng: &mut ChaCha8Rng, agents: usize, max_types: usize, alphas: &[f64]) -> Instance {
    let m = rng.random_range(2..=5usize);
    let resources: Vec<Resource> = (0..m as u32)
        .map(|k| Resource {
            id: ResourceId(k),
            cost: power(
                0.5 + 1.5 * rng.random::<f64>(),
                alphas[rng.random_range(0..alphas.len())],
            ),
        })
        .collect();
    let agent_list: Vec<Agent> = (0..agents)
        .map(|_| {
            let types = rng.random_range(1..=max_types);
            let requests: Vec<Request> = (0..types)
                .map(|_| {
                    let n_actions = rng.random_range(1..=3usize);
                    let actions: Vec<Action> = (0..n_actions)
                        .map(|_| {
                            let size = rng.random_range(1..=m.min(3));
                            let mut ids: Vec<ResourceId> = Vec::new();
                            while ids.len() < size {
                                let id = ResourceId(rng.random_range(0..m as u32));
                                if !ids.contains(&id) {
                                    ids.push(id);
                                }
                            }
                            Action::from_ids(ids)
                        })
                        .collect();
                    Request::Explicit { actions }
                })
                .collect();
            let prior = dirichlet_prior(rng, types);
            Agent {
                types: requests,
                prior,
            }
        })
        .collect();
    Instance::new(resources, None, agent_list).unwrap()
}

/// Random connected undirected routing instance.
pub fn routing_instance(rng: &mut ChaCha8Rng, agents: usize, max_types: usize, alphas: &[f64]) -> Instance {
    let nodes = rng.random_range(4..=6u32);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for v in 1..nodes {
        edges.push((rng.random_range(0..v), v));
    }
    let extra = rng.random_range(0..=3usize);
    for _ in 0..extra {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
            edges.push((a, b));
        }
    }
    let resources: Vec<Resource> = (0..edges.len() as u32)
        .map(|k| Resource {
            id: ResourceId(k),
            cost: power(
                0.5 + 1.5 * rng.random::<f64>(),
                alphas[rng.random_range(0..alphas.len())],
            ),
        })
        .collect();
    let graph = Graph {
        nodes,
        directed: false,
        edges: edges
            .into_iter()
            .enumerate()
            .map(|(k, (from, to))| Edge {
                from,
                to,
                resource: ResourceId(k as u32),
            })
            .collect(),
    };
    let agent_list: Vec<Agent> = (0..agents)
        .map(|_| {
            let types = rng.random_range(1..=max_types);
            let requests: Vec<Request> = (0..types)
                .map(|_| {
                    let source = rng.random_range(0..nodes);
                    let mut target = rng.random_range(0..nodes);
                    while target == source {
                        target = rng.random_range(0..nodes);
                    }
                    Request::Routing { source, target }
                })
                .collect();
            let prior = dirichlet_prior(rng, types);
            Agent {
                types: requests,
                prior,
            }
        })
        .collect();
    Instance::new(resources, Some(graph), agent_list).unwrap()
}

/// Random feasible strategy: picks uniformly among the enumerated candidate
/// actions of each (agent, type).
pub fn random_strategy(rng: &mut ChaCha8Rng, inst: &Instance) -> StrategyProfile {
    let caps = EnumerationCaps::default();
    let strategies = inst
        .agents()
        .iter()
        .map(|agent| {
            agent
                .types
                .iter()
                .map(|req| {
                    let candidates = eval::candidate_actions(inst, req, &caps).unwrap();
                    candidates[rng.random_range(0..candidates.len())].clone()
                })
                .collect()
        })
        .collect();
    StrategyProfile { strategies }
}
