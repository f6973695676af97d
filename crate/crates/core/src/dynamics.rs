//! The solver loop: round-based approximate-best-response dynamics over
//! strategy tables.
//!
//! Each agent starts from the action its oracle picks under play-alone
//! weights `w0(e) = sum_j xi_j`. In every round, each agent builds the
//! weight vector of estimated expected cost shares against the others'
//! current strategies, asks the oracle for a best response per type, and
//! reports the improvement margin
//! `delta_i = est_cost(current) - eta_low * eta_high * est_cost(candidate)`.
//! If no margin is positive the dynamics has converged; otherwise exactly
//! one agent with `delta_i > 0` and `delta_i >= total_delta / N` (smallest
//! index on ties; one always exists by pigeonhole) commits its candidate
//! strategy. The loop stops after the round cap from [`GameConstants`].
//!
//! Everything is deterministic: oracles break ties canonically and rounds
//! update a single agent, so identical inputs produce identical traces.

use alloc::vec::Vec;

use crate::estimate;
use crate::eval;
use crate::gametheory::{self, GameConstants};
use crate::model::{Action, Instance, StrategyProfile};
use crate::oracle::{Oracle, WeightVector};
use crate::{Error, Result};

/// Execution knobs for [`run`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DynamicsConfig {
    /// Overrides the derived round cap (for experiments).
    pub round_cap_override: Option<u64>,
    /// Record exact potential / social-cost snapshots per round. Opt-in:
    /// diagnostics cost far more than the round itself.
    pub diagnostics: bool,
}

/// Exact snapshots of a strategy profile, for trace validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundDiagnostics {
    pub potential: f64,
    pub social_cost: f64,
}

/// What one round computed and decided. `chosen` is `None` exactly when the
/// round detected convergence (all margins nonpositive) and left the
/// profile unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    /// Improvement margin per agent.
    pub deltas: Vec<f64>,
    pub chosen: Option<usize>,
    /// Estimated type-averaged cost of each agent's current strategy.
    pub est_cost_current: Vec<f64>,
    /// Estimated type-averaged cost of each agent's candidate strategy.
    pub est_cost_abr: Vec<f64>,
    /// Snapshot of the profile this round produced.
    pub diagnostics: Option<RoundDiagnostics>,
}

/// Why the dynamics stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    RoundCap,
}

/// Full record of a dynamics execution.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace {
    pub initial: StrategyProfile,
    pub initial_diagnostics: Option<RoundDiagnostics>,
    pub rounds: Vec<RoundRecord>,
    pub final_profile: StrategyProfile,
    pub termination: Termination,
}

impl DynamicsTrace {
    pub fn rounds_executed(&self) -> u64 {
        self.rounds.len() as u64
    }
}

/// Play-alone start: every agent maps every type to the oracle's best
/// action under the weight vector `w0(e) = sum_j xi_j`.
pub fn initial_profile(inst: &Instance, oracle: &Oracle) -> Result<StrategyProfile> {
    let w0 = WeightVector::from_fn(inst, |k, _| {
        inst.resources()[k]
            .cost
            .terms()
            .iter()
            .map(|t| t.coefficient)
            .sum()
    });
    let mut strategies = Vec::with_capacity(inst.agent_count());
    for agent in inst.agents() {
        let mut per_type = Vec::with_capacity(agent.types.len());
        for req in &agent.types {
            per_type.push(oracle.best_action(inst, req, &w0)?);
        }
        strategies.push(per_type);
    }
    Ok(StrategyProfile { strategies })
}

/// An agent's candidate strategy for one round, with both estimated costs
/// under the same weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AbrOutcome {
    pub strategy: Vec<Action>,
    /// Estimated type-averaged cost of the candidate strategy.
    pub est_cost_abr: f64,
    /// Estimated type-averaged cost of the agent's current strategy.
    pub est_cost_current: f64,
}

/// Computes agent `agent`'s approximate best response to the others'
/// strategies in `s`: one oracle call per type against the weight vector of
/// estimated expected cost shares.
pub fn compute_abr(
    inst: &Instance,
    agent: usize,
    s: &StrategyProfile,
    oracle: &Oracle,
) -> Result<AbrOutcome> {
    let w = WeightVector::from_fn(inst, |e_index, _| {
        estimate::estimate_cost_share(inst, agent, e_index, s)
    });
    let who = &inst.agents()[agent];
    let mut strategy = Vec::with_capacity(who.types.len());
    let mut est_cost_abr = 0.0;
    let mut est_cost_current = 0.0;
    for (t, req) in who.types.iter().enumerate() {
        let action = oracle.best_action(inst, req, &w)?;
        est_cost_abr += who.prior[t] * w.action_weight(&action);
        est_cost_current += who.prior[t] * w.action_weight(s.action(agent, t));
        strategy.push(action);
    }
    Ok(AbrOutcome {
        strategy,
        est_cost_abr,
        est_cost_current,
    })
}

fn snapshot(inst: &Instance, s: &StrategyProfile, enabled: bool) -> Option<RoundDiagnostics> {
    enabled.then(|| RoundDiagnostics {
        potential: gametheory::potential_expected(inst, s),
        social_cost: eval::exact_social_cost(inst, s),
    })
}

/// Runs the dynamics and returns the full trace; the final profile is the
/// solver's output.
pub fn run(
    inst: &Instance,
    oracle: &Oracle,
    constants: &GameConstants,
    config: &DynamicsConfig,
) -> Result<DynamicsTrace> {
    let initial = initial_profile(inst, oracle)?;
    let cap = config.round_cap_override.unwrap_or(constants.r).max(1);
    let eta = constants.eta_product();
    let n = inst.agent_count();

    let initial_diagnostics = snapshot(inst, &initial, config.diagnostics);
    let mut s = initial.clone();
    let mut rounds = Vec::new();
    let mut termination = Termination::RoundCap;

    for round in 1..=cap {
        // Within a round every agent responds to the same frozen profile;
        // the calls are independent and order-insensitive.
        let outcomes: Vec<AbrOutcome> = (0..n)
            .map(|agent| compute_abr(inst, agent, &s, oracle))
            .collect::<Result<_>>()?;
        let deltas: Vec<f64> = outcomes
            .iter()
            .map(|o| o.est_cost_current - eta * o.est_cost_abr)
            .collect();

        let converged = deltas.iter().all(|&d| d <= 0.0);
        let chosen = if converged {
            None
        } else {
            let total: f64 = deltas.iter().sum();
            let threshold = total / n as f64;
            let pick = deltas
                .iter()
                .position(|&d| d > 0.0 && d >= threshold)
                .ok_or(Error::InternalInvariant(
                    "no agent met the pigeonhole selection rule",
                ))?;
            s.strategies[pick] = outcomes[pick].strategy.clone();
            Some(pick)
        };

        rounds.push(RoundRecord {
            round,
            deltas,
            chosen,
            est_cost_current: outcomes.iter().map(|o| o.est_cost_current).collect(),
            est_cost_abr: outcomes.iter().map(|o| o.est_cost_abr).collect(),
            diagnostics: snapshot(inst, &s, config.diagnostics),
        });

        if converged {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(DynamicsTrace {
        initial,
        initial_diagnostics,
        rounds,
        final_profile: s,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Agent, CostFunction, CostTerm, Edge, Graph, Instance, Request, Resource, ResourceId,
    };
    use alloc::vec;

    fn rid(v: u32) -> ResourceId {
        ResourceId(v)
    }

    fn power(coefficient: f64, alpha: f64) -> CostFunction {
        CostFunction::new(vec![CostTerm {
            coefficient,
            exponent: alpha,
        }])
        .unwrap()
    }

    #[test]
    fn single_agent_converges_immediately() {
        let inst = Instance::new(
            vec![
                Resource {
                    id: rid(0),
                    cost: power(1.0, 2.0),
                },
                Resource {
                    id: rid(1),
                    cost: power(2.0, 2.0),
                },
            ],
            None,
            vec![Agent {
                types: vec![Request::Explicit {
                    actions: vec![Action::from_ids(vec![rid(0)]), Action::from_ids(vec![rid(1)])],
                }],
                prior: vec![1.0],
            }],
        )
        .unwrap();
        let oracle = Oracle::auto();
        let constants = GameConstants::compute(&inst, oracle.rho(&inst).unwrap()).unwrap();
        let trace = run(&inst, &oracle, &constants, &DynamicsConfig::default()).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.rounds_executed(), 1);
        assert_eq!(trace.rounds[0].chosen, None);
        // play-alone weights 1 vs 2: picks r0
        assert_eq!(
            trace.final_profile.action(0, 0),
            &Action::from_ids(vec![rid(0)])
        );
    }

    /// Two parallel edges between the same endpoints with equal costs; the
    /// other agent sits on edge 0 deterministically, so the estimated share
    /// makes edge 1 cheaper and the best response switches to it.
    #[test]
    fn abr_switches_away_from_loaded_path() {
        let resources = vec![
            Resource {
                id: rid(0),
                cost: power(1.0, 2.0),
            },
            Resource {
                id: rid(1),
                cost: power(1.0, 2.0),
            },
        ];
        let graph = Graph {
            nodes: 2,
            directed: false,
            edges: vec![
                Edge {
                    from: 0,
                    to: 1,
                    resource: rid(0),
                },
                Edge {
                    from: 0,
                    to: 1,
                    resource: rid(1),
                },
            ],
        };
        let route = Request::Routing {
            source: 0,
            target: 1,
        };
        let inst = Instance::new(
            resources,
            Some(graph),
            vec![
                Agent {
                    types: vec![Request::Explicit {
                        actions: vec![Action::from_ids(vec![rid(0)])],
                    }],
                    prior: vec![1.0],
                },
                Agent {
                    types: vec![route],
                    prior: vec![1.0],
                },
            ],
        )
        .unwrap();
        let oracle = Oracle::auto();
        let s = StrategyProfile {
            strategies: vec![
                vec![Action::from_ids(vec![rid(0)])],
                vec![Action::from_ids(vec![rid(0)])],
            ],
        };
        let outcome = compute_abr(&inst, 1, &s, &oracle).unwrap();
        // w(e0) = (1 + 1)^1 = 2, w(e1) = 1
        assert_eq!(outcome.strategy, vec![Action::from_ids(vec![rid(1)])]);
        assert!((outcome.est_cost_abr - 1.0).abs() < 1e-12);
        assert!((outcome.est_cost_current - 2.0).abs() < 1e-12);
    }

    #[test]
    fn initial_profile_is_play_alone_argmin() {
        // two-path routing: edge sums 3 (path via r0) vs 5 (chord r1)
        let resources = vec![
            Resource {
                id: rid(0),
                cost: power(3.0, 2.0),
            },
            Resource {
                id: rid(1),
                cost: power(5.0, 2.0),
            },
        ];
        let graph = Graph {
            nodes: 2,
            directed: false,
            edges: vec![
                Edge {
                    from: 0,
                    to: 1,
                    resource: rid(0),
                },
                Edge {
                    from: 0,
                    to: 1,
                    resource: rid(1),
                },
            ],
        };
        let inst = Instance::new(
            resources,
            Some(graph),
            vec![Agent {
                types: vec![
                    Request::Routing {
                        source: 0,
                        target: 1,
                    },
                    Request::Routing {
                        source: 1,
                        target: 0,
                    },
                ],
                prior: vec![0.5, 0.5],
            }],
        )
        .unwrap();
        let s0 = initial_profile(&inst, &Oracle::auto()).unwrap();
        for t in 0..2 {
            assert_eq!(s0.action(0, t), &Action::from_ids(vec![rid(0)]));
        }
    }

    #[test]
    fn trace_never_exceeds_round_cap() {
        let inst = Instance::new(
            vec![
                Resource {
                    id: rid(0),
                    cost: power(1.0, 2.0),
                },
                Resource {
                    id: rid(1),
                    cost: power(1.0, 2.0),
                },
            ],
            None,
            vec![
                Agent {
                    types: vec![Request::Explicit {
                        actions: vec![
                            Action::from_ids(vec![rid(0)]),
                            Action::from_ids(vec![rid(1)]),
                        ],
                    }],
                    prior: vec![1.0],
                };
                3
            ],
        )
        .unwrap();
        let oracle = Oracle::auto();
        let constants = GameConstants::compute(&inst, 1.0).unwrap();
        let config = DynamicsConfig {
            round_cap_override: Some(2),
            diagnostics: false,
        };
        let trace = run(&inst, &oracle, &constants, &config).unwrap();
        assert!(trace.rounds_executed() <= 2);
    }

    #[test]
    fn identical_runs_produce_identical_traces() {
        let inst = Instance::new(
            vec![
                Resource {
                    id: rid(0),
                    cost: power(1.0, 2.0),
                },
                Resource {
                    id: rid(1),
                    cost: power(1.5, 2.0),
                },
            ],
            None,
            vec![
                Agent {
                    types: vec![
                        Request::Explicit {
                            actions: vec![
                                Action::from_ids(vec![rid(0)]),
                                Action::from_ids(vec![rid(1)]),
                            ],
                        },
                        Request::Explicit {
                            actions: vec![
                                Action::from_ids(vec![rid(1)]),
                                Action::from_ids(vec![rid(0), rid(1)]),
                            ],
                        },
                    ],
                    prior: vec![0.25, 0.75],
                };
                3
            ],
        )
        .unwrap();
        let oracle = Oracle::auto();
        let constants = GameConstants::compute(&inst, 1.0).unwrap();
        let config = DynamicsConfig {
            round_cap_override: None,
            diagnostics: true,
        };
        let a = run(&inst, &oracle, &constants, &config).unwrap();
        let b = run(&inst, &oracle, &constants, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chosen_agent_satisfies_selection_rule() {
        let inst = Instance::new(
            vec![
                Resource {
                    id: rid(0),
                    cost: power(1.0, 2.0),
                },
                Resource {
                    id: rid(1),
                    cost: power(1.0, 2.0),
                },
                Resource {
                    id: rid(2),
                    cost: power(1.0, 2.0),
                },
            ],
            None,
            vec![
                Agent {
                    types: vec![Request::Explicit {
                        actions: vec![
                            Action::from_ids(vec![rid(0)]),
                            Action::from_ids(vec![rid(1)]),
                            Action::from_ids(vec![rid(2)]),
                        ],
                    }],
                    prior: vec![1.0],
                };
                4
            ],
        )
        .unwrap();
        let oracle = Oracle::auto();
        let constants = GameConstants::compute(&inst, 1.0).unwrap();
        let trace = run(&inst, &oracle, &constants, &DynamicsConfig::default()).unwrap();
        let n = inst.agent_count() as f64;
        for record in &trace.rounds {
            if let Some(chosen) = record.chosen {
                let total: f64 = record.deltas.iter().sum();
                assert!(record.deltas[chosen] > 0.0);
                assert!(record.deltas[chosen] >= total / n);
                // smallest qualifying index
                for (i, &d) in record.deltas.iter().enumerate().take(chosen) {
                    assert!(!(d > 0.0 && d >= total / n), "agent {i} qualified earlier");
                }
            }
        }
    }
}
