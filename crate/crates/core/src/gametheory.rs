//! Smoothness parameters and the bounded potential function of the induced
//! cost-sharing game.
//!
//! The smoothness pair `(lambda, mu)` comes from a one-dimensional
//! construction: `gamma` is the unique positive root of
//! `(x+1)^(a-1) = x^a` for `a = alpha_max`; evaluating
//! `h(x) = (a-1)(x+1)^(a-2) / (a x^(a-1))` at `x0 = rho * (eta_low *
//! eta_high)^2 * gamma` gives `mu`, and `lambda = (x0+1)^(a-1) - mu * x0^a`
//! is then the global maximum of that expression over `x > 0`. The pair
//! satisfies `y (x+y)^(a_j-1) <= lambda y^(a_j) + mu x^(a_j)` for all
//! nonnegative `x, y`, which is what the competitive-ratio analysis needs,
//! and `rho (eta_low eta_high)^2 mu < 1 - 1/alpha_max` keeps the derived
//! round budget finite.
//!
//! The potential is the classic per-resource partial sum
//! `sum_e sum_{l=1}^{load_e} sum_j xi_j l^(alpha_j - 1)`, averaged over type
//! profiles; unilateral deviation differences equal individual cost
//! differences and the expected total cost is within a factor
//! `ceil(alpha_max)` of it.

use alloc::vec::Vec;

use crate::estimate;
use crate::math;
use crate::model::{ActionProfile, Instance, StrategyProfile, TypeProfile};
use crate::{Error, Result};

/// Smoothness pair plus the root and scale it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessParams {
    pub lambda: f64,
    pub mu: f64,
    /// Unique positive root of `(x+1)^(alpha_max - 1) = x^alpha_max`.
    pub gamma: f64,
    /// `rho * (eta_low * eta_high)^2`.
    pub scale: f64,
}

/// Everything the round budget and the competitive-ratio bound need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameConstants {
    pub rho: f64,
    pub eta_low: f64,
    pub eta_high: f64,
    pub smoothness: SmoothnessParams,
    /// Potential bound `ceil(alpha_max)`.
    pub k: u32,
    /// Potential decay constant `2 (eta_low eta_high) N / (1 - scale * mu)`.
    pub q: f64,
    /// Round cap `ceil(q * ln(k * N^(alpha_max - 1)))`.
    pub r: u64,
}

impl GameConstants {
    /// Derives every constant from the instance and the oracle guarantee.
    pub fn compute(inst: &Instance, rho: f64) -> Result<Self> {
        let params = estimate::estimation_params(inst)?;
        let smoothness =
            smoothness_params(inst.max_exponent(), rho, params.eta_low, params.eta_high)?;
        let alpha_max = inst.max_exponent();
        let eta = params.product();
        let n = inst.agent_count() as f64;
        let k = math::ceil(alpha_max) as u32;
        let q = 2.0 * eta * n / (1.0 - smoothness.scale * smoothness.mu);
        let r_raw = math::ceil(q * math::ln(f64::from(k) * math::powf(n, alpha_max - 1.0)));
        let r = if r_raw < 1.0 { 1 } else { r_raw as u64 };
        Ok(GameConstants {
            rho,
            eta_low: params.eta_low,
            eta_high: params.eta_high,
            smoothness,
            k,
            q,
            r,
        })
    }

    pub fn eta_product(&self) -> f64 {
        self.eta_low * self.eta_high
    }

    /// The proven worst-case ratio of the dynamics output cost to the
    /// expected omniscient optimum:
    /// `2 K rho (eta_low eta_high)^2 lambda / (1 - rho (eta_low eta_high)^2 mu)`.
    pub fn theoretical_bcr_bound(&self) -> f64 {
        2.0 * f64::from(self.k) * self.smoothness.scale * self.smoothness.lambda
            / (1.0 - self.smoothness.scale * self.smoothness.mu)
    }
}

/// Unique positive root of `(x+1)^(alpha_max - 1) = x^alpha_max`, by
/// bisection with a doubling upper bracket.
pub fn gamma_root(alpha_max: f64) -> f64 {
    debug_assert!(alpha_max > 1.0);
    let f = |x: f64| math::powf(x + 1.0, alpha_max - 1.0) - math::powf(x, alpha_max);
    let mut hi = 2.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    math::bisect(1e-9, hi, 1e-14, 200, f)
}

fn h(x: f64, alpha_max: f64) -> f64 {
    (alpha_max - 1.0) * math::powf(x + 1.0, alpha_max - 2.0)
        / (alpha_max * math::powf(x, alpha_max - 1.0))
}

fn g(x: f64, mu: f64, alpha_max: f64) -> f64 {
    math::powf(x + 1.0, alpha_max - 1.0) - mu * math::powf(x, alpha_max)
}

/// Smoothness pair for the given exponent ceiling, oracle guarantee, and
/// estimation constants.
pub fn smoothness_params(
    alpha_max: f64,
    rho: f64,
    eta_low: f64,
    eta_high: f64,
) -> Result<SmoothnessParams> {
    if !alpha_max.is_finite() || alpha_max <= 1.0 {
        return Err(Error::Domain("smoothness needs alpha_max > 1"));
    }
    if rho < 1.0 || eta_low < 1.0 || eta_high < 1.0 {
        return Err(Error::Domain("rho and estimation constants must be >= 1"));
    }
    let scale = rho * (eta_low * eta_high) * (eta_low * eta_high);
    let gamma = gamma_root(alpha_max);
    let x0 = scale * gamma;
    let mu = h(x0, alpha_max);
    let lambda = g(x0, mu, alpha_max);
    let mu_ceiling = 1.0 - 1.0 / alpha_max;
    if !(scale * mu).is_finite() || scale * mu >= mu_ceiling {
        return Err(Error::InternalInvariant(
            "scale * mu must stay below 1 - 1/alpha_max",
        ));
    }
    let price = lambda / (1.0 - mu);
    if !price.is_finite() || price < 1.0 {
        return Err(Error::InternalInvariant("lambda / (1 - mu) must be >= 1"));
    }
    Ok(SmoothnessParams {
        lambda,
        mu,
        gamma,
        scale,
    })
}

/// Grid check of `y (x+y)^(alpha-1) <= lambda y^alpha + mu x^alpha` for all
/// integer `x, y` up to `x_max` and every exponent, with `1e-9` slack.
pub fn verify_smoothness_inequality(lambda: f64, mu: f64, alphas: &[f64], x_max: u32) -> bool {
    for &alpha in alphas {
        for x in 0..=x_max {
            for y in 0..=x_max {
                let (xf, yf) = (f64::from(x), f64::from(y));
                let lhs = yf * math::powf(xf + yf, alpha - 1.0);
                let rhs = lambda * math::powf(yf, alpha) + mu * math::powf(xf, alpha);
                if lhs - rhs > 1e-9 {
                    return false;
                }
            }
        }
    }
    true
}

/// Potential of a realized action profile:
/// `sum_e sum_{l=1}^{load_e} sum_j xi_j l^(alpha_j - 1)`.
/// The profile must be feasible for the type profile.
pub fn potential_realized(inst: &Instance, t: &TypeProfile, a: &ActionProfile) -> Result<f64> {
    for (i, (agent, action)) in inst.agents().iter().zip(a.0.iter()).enumerate() {
        let req = &agent.types[t.0[i]];
        if !inst.feasible(req, action)? {
            return Err(Error::InfeasibleAction {
                agent: i,
                type_index: t.0[i],
            });
        }
    }
    Ok(inst
        .resources()
        .iter()
        .map(|r| {
            let load = inst.load(a, r.id);
            (1..=load).map(|l| r.cost.share(l)).sum::<f64>()
        })
        .sum())
}

/// Expected potential of a strategy profile, computed exactly from the
/// per-resource Poisson-binomial load distributions (polynomial, no type
/// profile enumeration).
pub fn potential_expected(inst: &Instance, s: &StrategyProfile) -> f64 {
    let probs = estimate::InclusionProbs::new(inst, s);
    inst.resources()
        .iter()
        .enumerate()
        .map(|(e_index, r)| {
            let all: Vec<f64> = (0..inst.agent_count())
                .map(|agent| probs.get(agent, e_index))
                .collect();
            let pmf = math::poisson_binomial_pmf(&all);
            // E[sum_{l=1}^{L} share(l)] via prefix sums of the partial sums
            let mut expectation = 0.0;
            let mut partial = 0.0;
            for (load, &p) in pmf.iter().enumerate().skip(1) {
                partial += r.cost.share(load as u32);
                expectation += p * partial;
            }
            expectation
        })
        .sum()
}
