//! Expected cost-share estimation.
//!
//! The expected cost share of agent `i` on resource `e`, over the other
//! agents' type priors, is a nonlinear expectation that the dynamics engine
//! must evaluate once per (agent, resource) per round. The closed form
//! implemented here replaces the load distribution by its mean:
//!
//! ```text
//! est(i, e) = sum_j xi_j * (1 + sum_{i' != i} pi_{i',e})^(alpha_j - 1)
//! ```
//!
//! where `pi_{i',e}` is the probability that `i'`'s strategy routes through
//! `e`. The estimate is exact for quadratic costs and sandwiched within
//! multiplicative constants otherwise: fractional Bell numbers bound the
//! convex side (`alpha_j >= 2`) from above and a Cantelli-style constant
//! bounds the concave side (`alpha_j` in `(1,2)`) from below. The exact
//! expectation is also provided, via Poisson-binomial dynamic programming,
//! as the validation oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::model::{Action, Instance, ResourceId, StrategyProfile};
use crate::{Error, Result};

/// Multiplicative sandwich constants: `est / eta_low <= exact <= est * eta_high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationParams {
    pub eta_low: f64,
    pub eta_high: f64,
}

impl EstimationParams {
    /// The product that scales approximate-best-response guarantees.
    pub fn product(&self) -> f64 {
        self.eta_low * self.eta_high
    }
}

/// Probability that agent `agent`'s strategy uses resource `id`: the prior
/// mass of the types whose assigned action contains it.
pub fn inclusion_prob(
    inst: &Instance,
    agent: usize,
    strategy: &[Action],
    id: ResourceId,
) -> f64 {
    inst.agents()[agent]
        .prior
        .iter()
        .zip(strategy.iter())
        .filter(|(_, action)| action.contains(id))
        .map(|(&p, _)| p)
        .sum()
}

/// All inclusion probabilities of a strategy profile, with per-resource
/// totals, so a round of dynamics can reuse one pass over everyone's types.
#[derive(Debug, Clone)]
pub struct InclusionProbs {
    resources: usize,
    /// `probs[agent * resources + e_index]`
    probs: Vec<f64>,
    totals: Vec<f64>,
}

impl InclusionProbs {
    pub fn new(inst: &Instance, s: &StrategyProfile) -> Self {
        let resources = inst.resource_count();
        let agents = inst.agent_count();
        let mut probs = Vec::with_capacity(agents * resources);
        for (agent, strategy) in s.strategies.iter().enumerate() {
            for r in inst.resources() {
                probs.push(inclusion_prob(inst, agent, strategy, r.id));
            }
        }
        let mut totals = vec![0.0; resources];
        for agent in 0..agents {
            for (e, total) in totals.iter_mut().enumerate() {
                *total += probs[agent * resources + e];
            }
        }
        InclusionProbs {
            resources,
            probs,
            totals,
        }
    }

    pub fn get(&self, agent: usize, e_index: usize) -> f64 {
        self.probs[agent * self.resources + e_index]
    }

    /// Total inclusion probability on one resource: the mean load.
    pub fn total(&self, e_index: usize) -> f64 {
        self.totals[e_index]
    }

    /// Mean of the other agents' inclusion probabilities, the quantity the
    /// closed-form estimator raises to `alpha - 1`.
    pub fn mean_of_others(&self, agent: usize, e_index: usize) -> f64 {
        (self.total(e_index) - self.get(agent, e_index)).max(0.0)
    }
}

/// Closed-form estimate of the expected cost share of `agent` on `e_index`,
/// given the strategies of the others (agent's own entry in `s` is unused).
/// One pass over the other agents' types.
pub fn estimate_cost_share(
    inst: &Instance,
    agent: usize,
    e_index: usize,
    s: &StrategyProfile,
) -> f64 {
    let id = inst.resources()[e_index].id;
    let mean_others: f64 = s
        .strategies
        .iter()
        .enumerate()
        .filter(|(other, _)| *other != agent)
        .map(|(other, strategy)| inclusion_prob(inst, other, strategy, id))
        .sum();
    estimate_from_mean(inst, e_index, mean_others)
}

/// The same estimate computed from a prepared mean of the others' inclusion
/// probabilities.
pub fn estimate_from_mean(inst: &Instance, e_index: usize, mean_others: f64) -> f64 {
    inst.resources()[e_index]
        .cost
        .terms()
        .iter()
        .map(|t| t.coefficient * math::powf(1.0 + mean_others, t.exponent - 1.0))
        .sum()
}

/// Exact expected cost share of `agent` on `e_index`: the expectation of
/// `sum_j xi_j * (1 + S)^(alpha_j - 1)` where `S` is the Poisson-binomial
/// count of the other agents using the resource. O(N^2) per resource.
pub fn exact_cost_share(
    inst: &Instance,
    agent: usize,
    e_index: usize,
    s: &StrategyProfile,
) -> f64 {
    let id = inst.resources()[e_index].id;
    let others: Vec<f64> = s
        .strategies
        .iter()
        .enumerate()
        .filter(|(other, _)| *other != agent)
        .map(|(other, strategy)| inclusion_prob(inst, other, strategy, id))
        .collect();
    let pmf = math::poisson_binomial_pmf(&others);
    let cost = &inst.resources()[e_index].cost;
    pmf.iter()
        .enumerate()
        .map(|(k, &p)| p * cost.share(k as u32 + 1))
        .sum()
}

/// Fractional Bell number `B_z`: the `z`-th moment of a unit-rate Poisson
/// variable, via the Dobinski-style series `e^-1 * sum_k k^z / k!`. Terms
/// decay super-exponentially; summation stops after three consecutive terms
/// below `1e-15` of the partial sum.
pub fn bell_fractional(z: f64) -> f64 {
    debug_assert!(z >= 1.0, "fractional Bell number needs z >= 1");
    if z == 1.0 {
        return 1.0; // the mean; keeps quadratic instances exactly at (1, 1)
    }
    let mut sum = 0.0;
    let mut log_factorial = 0.0;
    let mut small_streak = 0;
    for k in 1..=600u32 {
        if k > 1 {
            log_factorial += math::ln(f64::from(k));
        }
        let term = math::exp(z * math::ln(f64::from(k)) - log_factorial);
        sum += term;
        if term < 1e-15 * sum {
            small_streak += 1;
            if small_streak >= 3 {
                break;
            }
        } else {
            small_streak = 0;
        }
    }
    sum * math::exp(-1.0)
}

/// Cantelli-derived lower-bound constant for exponents in `(0, 1)`:
/// `(beta^2 + 1) * (1 - 1/beta)^-z` at the unique root `beta` of
/// `2 b^3 - (z + 2) b^2 - 2` in `(1, inf)`, found by bisection.
pub fn b_const(z: f64) -> Result<f64> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::Domain("b_const requires z in (0, 1)"));
    }
    let cubic = |beta: f64| 2.0 * beta * beta * beta - (z + 2.0) * beta * beta - 2.0;
    let (lo, hi) = (1.0 + 1e-9, z + 3.0);
    assert!(
        cubic(lo) < 0.0 && cubic(hi) > 0.0,
        "b_const bracket must straddle the root"
    );
    let beta = math::bisect(lo, hi, 1e-12, 200, cubic);
    Ok((beta * beta + 1.0) * math::powf(1.0 - 1.0 / beta, -z))
}

/// Sandwich constants for an instance: the Cantelli constants of the
/// exponents in `(1, 2)` drive `eta_low`, the Bell constants of the
/// exponents at or above 2 drive `eta_high`. Both are 1 when every
/// exponent is 1 or 2 (the estimator is then exact).
pub fn estimation_params(inst: &Instance) -> Result<EstimationParams> {
    let mut eta_low: f64 = 1.0;
    let mut eta_high: f64 = 1.0;
    for r in inst.resources() {
        for t in r.cost.terms() {
            let alpha = t.exponent;
            if alpha > 1.0 && alpha < 2.0 {
                eta_low = eta_low.max(b_const(alpha - 1.0)?);
            } else if alpha >= 2.0 {
                eta_high = eta_high.max(bell_fractional(alpha - 1.0));
            }
        }
    }
    Ok(EstimationParams { eta_low, eta_high })
}

/// Estimated individual cost of `agent` at type `type_index`: the estimate
/// summed over the resources of the assigned action.
pub fn estimated_individual_cost(
    inst: &Instance,
    agent: usize,
    type_index: usize,
    s: &StrategyProfile,
) -> f64 {
    s.action(agent, type_index)
        .ids()
        .iter()
        .map(|&id| {
            let e_index = inst.resource_index(id).expect("known resource");
            estimate_cost_share(inst, agent, e_index, s)
        })
        .sum()
}

/// Prior-weighted average of the per-type estimated individual costs.
pub fn estimated_type_averaged_cost(inst: &Instance, agent: usize, s: &StrategyProfile) -> f64 {
    inst.agents()[agent]
        .prior
        .iter()
        .enumerate()
        .map(|(t, &p)| p * estimated_individual_cost(inst, agent, t, s))
        .sum()
}
