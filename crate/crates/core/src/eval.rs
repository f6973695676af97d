//! Exact desk-scale evaluation: expected social cost, brute-force optima
//! over realized type profiles, and the empirical-vs-theoretical
//! competitive-ratio report.
//!
//! This module is the trusted oracle of the crate: enumeration caps fail
//! loudly instead of sampling, and every quantity is exact up to float
//! rounding.

use alloc::vec;
use alloc::vec::Vec;

use crate::gametheory::GameConstants;
use crate::math;
use crate::model::{Action, ActionProfile, Instance, Request, StrategyProfile, TypeProfile};
use crate::{estimate, Error, Result};

/// Enumeration limits for the brute-force oracles.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationCaps {
    /// Maximum number of type profiles `prod_i |T_i|` to enumerate.
    pub max_type_profiles: u64,
    /// Maximum number of candidate action combinations per type profile,
    /// and of edge subsets per set-connectivity request.
    pub max_action_profiles: u64,
    /// Maximum number of edges per enumerated simple path; defaults to the
    /// node count (which never binds, simple paths are shorter).
    pub max_path_edges: Option<usize>,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        EnumerationCaps {
            max_type_profiles: 100_000,
            max_action_profiles: 10_000_000,
            max_path_edges: None,
        }
    }
}

/// Empirical competitive ratio against the proven bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BcrReport {
    /// Exact expected social cost of the evaluated profile.
    pub exact_cost: f64,
    /// Expectation of the omniscient per-type-profile optimum.
    pub expected_opt: f64,
    pub empirical_bcr: f64,
    pub theoretical_bound: f64,
    /// Optimum per type profile, when requested.
    pub per_profile: Option<Vec<(TypeProfile, f64)>>,
}

/// Exact expected social cost of a strategy profile via per-resource
/// Poisson-binomial load distributions; polynomial in agents and types.
pub fn exact_social_cost(inst: &Instance, s: &StrategyProfile) -> f64 {
    let probs = estimate::InclusionProbs::new(inst, s);
    inst.resources()
        .iter()
        .enumerate()
        .map(|(e_index, r)| {
            let all: Vec<f64> = (0..inst.agent_count())
                .map(|agent| probs.get(agent, e_index))
                .collect();
            let pmf = math::poisson_binomial_pmf(&all);
            pmf.iter()
                .enumerate()
                .map(|(load, &p)| p * r.cost.eval(load as u32))
                .sum::<f64>()
        })
        .sum()
}

/// Enumerates every candidate action worth considering for a request:
/// the explicit list, all simple paths, or all minimal connecting edge
/// subsets. Sorted lexicographically; unsatisfiable requests are an error.
pub fn candidate_actions(
    inst: &Instance,
    req: &Request,
    caps: &EnumerationCaps,
) -> Result<Vec<Action>> {
    let mut candidates = match req {
        Request::Explicit { actions } => actions.clone(),
        Request::Routing { source, target } => {
            let g = inst.graph().ok_or(Error::MissingGraph)?;
            if source == target {
                vec![Action::empty()]
            } else {
                let cap = caps.max_path_edges.unwrap_or(g.nodes as usize);
                let mut paths = Vec::new();
                let mut visited = vec![false; g.nodes as usize];
                visited[*source as usize] = true;
                let mut edges = Vec::new();
                simple_paths(
                    g,
                    *source,
                    *target,
                    cap,
                    &mut visited,
                    &mut edges,
                    &mut paths,
                    caps.max_action_profiles,
                )?;
                if paths.is_empty() {
                    return Err(Error::NoPath {
                        source: *source,
                        target: *target,
                    });
                }
                paths
            }
        }
        Request::SetConnectivity { terminals } => {
            if inst.graph().is_none() {
                return Err(Error::MissingGraph);
            }
            let mut terminals = terminals.clone();
            terminals.sort_unstable();
            terminals.dedup();
            if terminals.len() <= 1 {
                vec![Action::empty()]
            } else {
                minimal_connecting_subsets(inst, req, caps)?
            }
        }
    };
    candidates.sort();
    candidates.dedup();
    Ok(candidates)
}

#[allow(clippy::too_many_arguments)]
fn simple_paths(
    g: &crate::model::Graph,
    node: u32,
    target: u32,
    budget: usize,
    visited: &mut Vec<bool>,
    edges: &mut Vec<crate::model::ResourceId>,
    out: &mut Vec<Action>,
    cap: u64,
) -> Result<()> {
    if node == target {
        if out.len() as u64 >= cap {
            return Err(Error::CapExceeded {
                what: "simple-path enumeration",
                required: out.len() as u128 + 1,
                cap,
            });
        }
        out.push(Action::from_ids(edges.clone()));
        return Ok(());
    }
    if budget == 0 {
        return Ok(());
    }
    let arcs: Vec<(u32, crate::model::ResourceId)> = g.arcs_from(node).collect();
    for (next, rid) in arcs {
        if visited[next as usize] {
            continue;
        }
        visited[next as usize] = true;
        edges.push(rid);
        simple_paths(g, next, target, budget - 1, visited, edges, out, cap)?;
        edges.pop();
        visited[next as usize] = false;
    }
    Ok(())
}

/// All minimal (by set inclusion) feasible edge subsets of a connectivity
/// request, by increasing size; supersets of a kept set are skipped. Under
/// strictly increasing costs only minimal subsets can be optimal.
fn minimal_connecting_subsets(
    inst: &Instance,
    req: &Request,
    caps: &EnumerationCaps,
) -> Result<Vec<Action>> {
    let g = inst.graph().expect("caller checked");
    let edge_resources: Vec<crate::model::ResourceId> =
        g.edges.iter().map(|e| e.resource).collect();
    let m = edge_resources.len();
    let subsets: u128 = 1u128 << m;
    if subsets > caps.max_action_profiles as u128 {
        return Err(Error::CapExceeded {
            what: "edge-subset enumeration",
            required: subsets,
            cap: caps.max_action_profiles,
        });
    }
    let mut masks: Vec<u32> = (0..subsets as u32).collect();
    masks.sort_by_key(|mask| (mask.count_ones(), *mask));
    let mut minimal: Vec<(u32, Action)> = Vec::new();
    for mask in masks {
        if minimal.iter().any(|(kept, _)| kept & mask == *kept) {
            continue; // superset of a smaller feasible set
        }
        let ids: Vec<crate::model::ResourceId> = (0..m)
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| edge_resources[k])
            .collect();
        let action = Action::from_ids(ids);
        if inst.feasible(req, &action)? {
            minimal.push((mask, action));
        }
    }
    if minimal.is_empty() {
        return Err(Error::DisconnectedTerminals);
    }
    Ok(minimal.into_iter().map(|(_, a)| a).collect())
}

/// Exhaustive minimum-cost action profile over per-agent candidate lists.
/// Candidates are explored in lexicographic order and the first minimum is
/// kept, so ties resolve to the lexicographically smallest profile.
fn opt_over_candidates(inst: &Instance, candidates: &[&[Action]]) -> (ActionProfile, f64) {
    let mut loads = vec![0u32; inst.resource_count()];
    let mut choice: Vec<usize> = Vec::with_capacity(candidates.len());
    let mut best_cost = f64::INFINITY;
    let mut best: Vec<usize> = Vec::new();

    fn cost_of(inst: &Instance, loads: &[u32]) -> f64 {
        inst.resources()
            .iter()
            .zip(loads)
            .map(|(r, &l)| r.cost.eval(l))
            .sum()
    }

    fn descend(
        inst: &Instance,
        candidates: &[&[Action]],
        loads: &mut Vec<u32>,
        choice: &mut Vec<usize>,
        best_cost: &mut f64,
        best: &mut Vec<usize>,
    ) {
        let partial = cost_of(inst, loads);
        if partial > *best_cost {
            return; // costs only grow as agents are added
        }
        let depth = choice.len();
        if depth == candidates.len() {
            if partial < *best_cost {
                *best_cost = partial;
                *best = choice.clone();
            }
            return;
        }
        for (k, action) in candidates[depth].iter().enumerate() {
            for id in action.ids() {
                loads[inst.resource_index(*id).expect("known resource")] += 1;
            }
            choice.push(k);
            descend(inst, candidates, loads, choice, best_cost, best);
            choice.pop();
            for id in action.ids() {
                loads[inst.resource_index(*id).expect("known resource")] -= 1;
            }
        }
    }

    descend(
        inst,
        candidates,
        &mut loads,
        &mut choice,
        &mut best_cost,
        &mut best,
    );
    let profile = ActionProfile(
        best.iter()
            .zip(candidates)
            .map(|(&k, list)| list[k].clone())
            .collect(),
    );
    (profile, best_cost)
}

/// Brute-force optimum for one realized type profile.
pub fn brute_force_opt(
    inst: &Instance,
    t: &TypeProfile,
    caps: &EnumerationCaps,
) -> Result<(ActionProfile, f64)> {
    let per_agent: Vec<Vec<Action>> = inst
        .agents()
        .iter()
        .zip(t.0.iter())
        .map(|(agent, &ti)| candidate_actions(inst, &agent.types[ti], caps))
        .collect::<Result<_>>()?;
    let product: u128 = per_agent
        .iter()
        .map(|c| c.len() as u128)
        .fold(1, |acc, n| acc.saturating_mul(n));
    if product > caps.max_action_profiles as u128 {
        return Err(Error::CapExceeded {
            what: "action-profile enumeration",
            required: product,
            cap: caps.max_action_profiles,
        });
    }
    let views: Vec<&[Action]> = per_agent.iter().map(|c| c.as_slice()).collect();
    Ok(opt_over_candidates(inst, &views))
}

/// Expected omniscient optimum with the per-profile breakdown.
pub fn expected_opt_report(
    inst: &Instance,
    caps: &EnumerationCaps,
) -> Result<Vec<(TypeProfile, f64)>> {
    let profiles = inst.type_profile_count();
    if profiles > caps.max_type_profiles as u128 {
        return Err(Error::CapExceeded {
            what: "type-profile enumeration",
            required: profiles,
            cap: caps.max_type_profiles,
        });
    }
    // candidate lists per (agent, type), computed once
    let mut per_agent_type: Vec<Vec<Vec<Action>>> = Vec::with_capacity(inst.agent_count());
    for agent in inst.agents() {
        let mut per_type = Vec::with_capacity(agent.types.len());
        for req in &agent.types {
            per_type.push(candidate_actions(inst, req, caps)?);
        }
        per_agent_type.push(per_type);
    }

    let mut rows = Vec::new();
    let counts: Vec<usize> = inst.agents().iter().map(|a| a.types.len()).collect();
    let mut t = TypeProfile(vec![0; counts.len()]);
    loop {
        let views: Vec<&[Action]> = per_agent_type
            .iter()
            .zip(t.0.iter())
            .map(|(per_type, &ti)| per_type[ti].as_slice())
            .collect();
        let product: u128 = views
            .iter()
            .map(|c| c.len() as u128)
            .fold(1, |acc, n| acc.saturating_mul(n));
        if product > caps.max_action_profiles as u128 {
            return Err(Error::CapExceeded {
                what: "action-profile enumeration",
                required: product,
                cap: caps.max_action_profiles,
            });
        }
        let (_, cost) = opt_over_candidates(inst, &views);
        rows.push((t.clone(), cost));

        let mut k = counts.len();
        loop {
            if k == 0 {
                return Ok(rows);
            }
            k -= 1;
            t.0[k] += 1;
            if t.0[k] < counts[k] {
                break;
            }
            t.0[k] = 0;
        }
    }
}

/// Expectation, over the product prior, of the per-type-profile optimum.
pub fn expected_opt(inst: &Instance, caps: &EnumerationCaps) -> Result<f64> {
    let rows = expected_opt_report(inst, caps)?;
    let mut by_profile = rows.iter();
    let mut total = 0.0;
    inst.for_each_type_profile(|_, p| {
        let (_, cost) = by_profile.next().expect("same enumeration order");
        total += p * cost;
    });
    Ok(total)
}

/// Assembles the competitive-ratio report for a solved profile.
pub fn bcr_report(
    inst: &Instance,
    s_out: &StrategyProfile,
    constants: &GameConstants,
    caps: &EnumerationCaps,
    with_breakdown: bool,
) -> Result<BcrReport> {
    let exact_cost = exact_social_cost(inst, s_out);
    let rows = expected_opt_report(inst, caps)?;
    let mut expected = 0.0;
    {
        let mut by_profile = rows.iter();
        inst.for_each_type_profile(|_, p| {
            let (_, cost) = by_profile.next().expect("same enumeration order");
            expected += p * cost;
        });
    }
    let empirical_bcr = if expected > 0.0 {
        exact_cost / expected
    } else if exact_cost == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(BcrReport {
        exact_cost,
        expected_opt: expected,
        empirical_bcr,
        theoretical_bound: constants.theoretical_bcr_bound(),
        per_profile: with_breakdown.then_some(rows),
    })
}
