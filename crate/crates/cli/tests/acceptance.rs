//! Acceptance suite. Each criterion prints exactly one `acceptance NN ...`
//! verdict line (run with `--nocapture` to see them) and fails the test if
//! violated. Oracles used for cross-checking are implemented locally in
//! this file where independence from the library path matters.
//!
//! Comparisons are written in negated form on purpose: a NaN anywhere must
//! count as a violation, never as a pass.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::process::Command;

use bgnd_cli::gen::{self, GenParams, RequestKindChoice};
use bgnd_core::dynamics::{self, DynamicsConfig};
use bgnd_core::estimate;
use bgnd_core::eval::{self, EnumerationCaps};
use bgnd_core::gametheory::{self, GameConstants};
use bgnd_core::model::{Graph, Instance, NodeId, ResourceId, StrategyProfile};
use bgnd_core::oracle::{self, Oracle, WeightVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdict(number: u32, slug: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {:02} {slug}: {} ({detail})",
        number,
        if pass { "PASS" } else { "FAIL" }
    );
}

// ---------------------------------------------------------------------------
// corpus: criteria 1, 5, 8 share the seeded desk-scale instances
// ---------------------------------------------------------------------------

struct CorpusStats {
    instances: usize,
    bcr_violations: usize,
    descent_violations: usize,
    initial_violations: usize,
    worst_margin: f64,
}

fn corpus_instance(seed: u64, alpha: f64, kind: RequestKindChoice, shape: u64) -> Option<Instance> {
    let params = GenParams {
        agents: 1 + (shape % 4) as usize,
        nodes: 4 + (shape % 3) as u32,
        edge_density: 0.2,
        types_per_agent: 1 + (shape % 3) as usize,
        alphas: vec![alpha],
        xi_range: (0.5, 2.0),
        request_kind: kind,
    };
    let inst = gen::generate_instance(seed, &params).ok()?;
    if let Some(g) = inst.graph() {
        if g.nodes > 8 || g.edges.len() > 12 {
            return None;
        }
    }
    Some(inst)
}

fn run_corpus() -> CorpusStats {
    let caps = EnumerationCaps::default();
    let oracle = Oracle::auto();
    let mut stats = CorpusStats {
        instances: 0,
        bcr_violations: 0,
        descent_violations: 0,
        initial_violations: 0,
        worst_margin: 0.0,
    };
    let mut corpus: Vec<Instance> = Vec::new();
    let mut shape = 0u64;
    for &alpha in &[1.5, 2.0, 2.5, 3.0] {
        for &kind in &[RequestKindChoice::Routing, RequestKindChoice::Explicit] {
            let mut accepted = 0;
            let mut seed = (alpha * 1000.0) as u64;
            while accepted < 25 {
                seed += 1;
                if let Some(inst) = corpus_instance(seed, alpha, kind, shape) {
                    corpus.push(inst);
                    accepted += 1;
                    shape += 1;
                }
            }
        }
    }
    // a few 2-approximate-oracle instances on top of the exact-oracle 200
    let mut accepted = 0;
    let mut seed = 9000;
    while accepted < 8 {
        seed += 1;
        if let Some(inst) = corpus_instance(seed, 2.0, RequestKindChoice::SetConnectivity, shape) {
            corpus.push(inst);
            accepted += 1;
            shape += 1;
        }
    }

    for inst in &corpus {
        let rho = oracle.rho(inst).unwrap();
        let constants = GameConstants::compute(inst, rho).unwrap();
        let config = DynamicsConfig {
            round_cap_override: None,
            diagnostics: true,
        };
        let trace = dynamics::run(inst, &oracle, &constants, &config).unwrap();
        let report = eval::bcr_report(inst, &trace.final_profile, &constants, &caps, false).unwrap();

        // criterion 1: the headline bound (and the ignorance lower bound)
        if !(report.empirical_bcr <= report.theoretical_bound + 1e-6)
            || !(report.empirical_bcr >= 1.0 - 1e-9)
        {
            stats.bcr_violations += 1;
        }
        stats.worst_margin = stats
            .worst_margin
            .max(report.empirical_bcr / report.theoretical_bound);

        // criterion 5: exact potential descends at every non-converged round
        let mut previous = trace.initial_diagnostics.unwrap().potential;
        for record in &trace.rounds {
            let now = record.diagnostics.unwrap().potential;
            if record.chosen.is_some() && !(previous - now > -1e-9) {
                stats.descent_violations += 1;
            }
            previous = now;
        }

        // criterion 8: play-alone start within rho * N^(alpha_max - 1) of OPT
        let n = inst.agent_count() as f64;
        let initial_cost = eval::exact_social_cost(inst, &trace.initial);
        let bound = rho * n.powf(inst.max_exponent() - 1.0) * report.expected_opt;
        if !(initial_cost <= bound + 1e-6) {
            stats.initial_violations += 1;
        }

        stats.instances += 1;
    }
    stats
}

#[test]
fn criteria_1_5_8_corpus() {
    let stats = run_corpus();
    let c1 = stats.bcr_violations == 0 && stats.instances >= 200;
    verdict(
        1,
        "end-to-end-bcr-bound",
        c1,
        &format!(
            "{} instances, {} violations, worst empirical/theoretical = {:.4}",
            stats.instances, stats.bcr_violations, stats.worst_margin
        ),
    );
    let c5 = stats.descent_violations == 0;
    verdict(
        5,
        "potential-descent",
        c5,
        &format!("{} non-descending rounds", stats.descent_violations),
    );
    let c8 = stats.initial_violations == 0;
    verdict(
        8,
        "initial-profile-bound",
        c8,
        &format!("{} violations", stats.initial_violations),
    );
    assert!(c1, "criterion 1 failed");
    assert!(c5, "criterion 5 failed");
    assert!(c8, "criterion 8 failed");
}

// ---------------------------------------------------------------------------
// criteria 2 and 3: estimator exactness and sandwich
// ---------------------------------------------------------------------------

fn random_strategy(rng: &mut ChaCha8Rng, inst: &Instance) -> StrategyProfile {
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

fn explicit_corpus_instance(seed: u64, alpha: f64) -> Instance {
    let params = GenParams {
        agents: 1 + (seed % 4) as usize,
        nodes: 5, // resource count for explicit instances
        edge_density: 0.0,
        types_per_agent: 1 + (seed % 3) as usize,
        alphas: vec![alpha],
        xi_range: (0.5, 2.0),
        request_kind: RequestKindChoice::Explicit,
    };
    gen::generate_instance(seed, &params).unwrap()
}

#[test]
fn criterion_2_quadratic_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut probes = 0u64;
    let mut worst: f64 = 0.0;
    let mut instance_seed = 0;
    while probes < 10_000 {
        instance_seed += 1;
        let inst = explicit_corpus_instance(instance_seed, 2.0);
        for _ in 0..3 {
            let s = random_strategy(&mut rng, &inst);
            for agent in 0..inst.agent_count() {
                for e_index in 0..inst.resource_count() {
                    let est = estimate::estimate_cost_share(&inst, agent, e_index, &s);
                    let exact = estimate::exact_cost_share(&inst, agent, e_index, &s);
                    worst = worst.max((est - exact).abs());
                    probes += 1;
                }
            }
        }
    }
    let pass = worst <= 1e-9;
    verdict(
        2,
        "quadratic-exactness",
        pass,
        &format!("{probes} probes, max |estimate - exact| = {worst:.3e}"),
    );
    assert!(pass, "criterion 2 failed");
}

#[test]
fn criterion_3_estimator_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut probes = 0u64;
    let mut violations = 0u64;
    for &alpha in &[1.2, 1.5, 1.8, 2.5, 3.0, 4.0] {
        for instance_seed in 1..=25u64 {
            let inst = explicit_corpus_instance(instance_seed, alpha);
            let params = estimate::estimation_params(&inst).unwrap();
            for _ in 0..2 {
                let s = random_strategy(&mut rng, &inst);
                for agent in 0..inst.agent_count() {
                    for e_index in 0..inst.resource_count() {
                        let est = estimate::estimate_cost_share(&inst, agent, e_index, &s);
                        let exact = estimate::exact_cost_share(&inst, agent, e_index, &s);
                        probes += 1;
                        if !(est / params.eta_low <= exact + 1e-9
                            && exact <= est * params.eta_high + 1e-9)
                        {
                            violations += 1;
                        }
                    }
                }
            }
        }
    }
    let pass = violations == 0;
    verdict(
        3,
        "estimator-sandwich",
        pass,
        &format!("{probes} probes across 6 exponents, {violations} violations"),
    );
    assert!(pass, "criterion 3 failed");
}

// ---------------------------------------------------------------------------
// criterion 4: potential identity and K-bound by exhaustive expectation
// ---------------------------------------------------------------------------

fn potential_by_enumeration(inst: &Instance, s: &StrategyProfile) -> f64 {
    let mut total = 0.0;
    inst.for_each_type_profile(|t, p| {
        total += p * gametheory::potential_realized(inst, t, &s.realize(t)).unwrap();
    });
    total
}

fn individual_cost_by_enumeration(inst: &Instance, agent: usize, s: &StrategyProfile) -> f64 {
    let mut total = 0.0;
    inst.for_each_type_profile(|t, p| {
        total += p * inst.realized_individual_cost(agent, &s.realize(t));
    });
    total
}

fn social_cost_by_enumeration(inst: &Instance, s: &StrategyProfile) -> f64 {
    let mut total = 0.0;
    inst.for_each_type_profile(|t, p| {
        total += p * inst.realized_social_cost(&s.realize(t));
    });
    total
}

#[test]
fn criterion_4_potential_identity_and_k_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let alphas = [1.5, 2.0, 2.5, 3.0];
    let mut deviations = 0u64;
    let mut identity_violations = 0u64;
    let mut k_bound_violations = 0u64;
    let mut instance_seed = 100;
    while deviations < 1_000 {
        instance_seed += 1;
        let alpha = alphas[(instance_seed % 4) as usize];
        let inst = explicit_corpus_instance(instance_seed, alpha);
        let k = f64::from(GameConstants::compute(&inst, 1.0).unwrap().k);
        for _ in 0..3 {
            let s = random_strategy(&mut rng, &inst);
            let agent = rng.random_range(0..inst.agent_count());
            let mut deviated = s.clone();
            deviated.strategies[agent] = random_strategy(&mut rng, &inst).strategies[agent].clone();

            let phi_s = potential_by_enumeration(&inst, &s);
            let phi_d = potential_by_enumeration(&inst, &deviated);
            let ci_s = individual_cost_by_enumeration(&inst, agent, &s);
            let ci_d = individual_cost_by_enumeration(&inst, agent, &deviated);
            if !(((phi_s - phi_d) - (ci_s - ci_d)).abs() <= 1e-9) {
                identity_violations += 1;
            }
            let cost = social_cost_by_enumeration(&inst, &s);
            if !(phi_s <= cost + 1e-9 && cost <= k * phi_s + 1e-9) {
                k_bound_violations += 1;
            }
            deviations += 1;
        }
    }
    let pass = identity_violations == 0 && k_bound_violations == 0;
    verdict(
        4,
        "potential-identity-k-bound",
        pass,
        &format!(
            "{deviations} deviations, {identity_violations} identity / {k_bound_violations} K-bound violations"
        ),
    );
    assert!(pass, "criterion 4 failed");
}

// ---------------------------------------------------------------------------
// criterion 6: smoothness grid and mu-condition sweep
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_smoothness_validity() {
    let alphas = [1.1, 1.5, 2.0, 2.5, 3.0, 4.0];
    let mut grid_failures = 0u32;
    let mut mu_failures = 0u32;
    for &alpha_max in &alphas {
        for &rho in &[1.0, 2.0] {
            for &eta in &[1.0, 2.0] {
                let p = gametheory::smoothness_params(alpha_max, rho, eta, 1.0).unwrap();
                if !(p.scale * p.mu < 1.0 - 1.0 / alpha_max) {
                    mu_failures += 1;
                }
                // every exponent up to alpha_max must satisfy the inequality
                let exponents: Vec<f64> = alphas
                    .iter()
                    .copied()
                    .filter(|a| *a <= alpha_max)
                    .chain([1.0])
                    .collect();
                if !gametheory::verify_smoothness_inequality(p.lambda, p.mu, &exponents, 50) {
                    grid_failures += 1;
                }
            }
        }
    }
    let pass = grid_failures == 0 && mu_failures == 0;
    verdict(
        6,
        "smoothness-validity",
        pass,
        &format!(
            "grid x,y <= 50 over {} parameter combos: {grid_failures} grid / {mu_failures} mu-condition failures",
            alphas.len() * 4
        ),
    );
    assert!(pass, "criterion 6 failed");
}

// ---------------------------------------------------------------------------
// criterion 7: constants cross-checks
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_constants_cross_checks() {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    let gamma_err = (gametheory::gamma_root(2.0) - golden).abs();

    let bell_expected = [1.0, 2.0, 5.0, 15.0, 52.0];
    let mut bell_err: f64 = 0.0;
    for (n, &want) in bell_expected.iter().enumerate() {
        bell_err = bell_err.max((estimate::bell_fractional((n + 1) as f64) - want).abs());
    }

    let mut residual: f64 = 0.0;
    for z in [0.1, 0.25, 0.5, 0.75, 0.9] {
        // recover the root the same way b_const finds it and check it
        let cubic = |beta: f64| 2.0 * beta.powi(3) - (z + 2.0) * beta.powi(2) - 2.0;
        let mut lo = 1.0 + 1e-9;
        let mut hi = z + 3.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cubic(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let beta = 0.5 * (lo + hi);
        residual = residual.max(cubic(beta).abs());
        // and b_const must equal the closed form at that root
        let b = estimate::b_const(z).unwrap();
        residual = residual.max((b - (beta * beta + 1.0) * (1.0 - 1.0 / beta).powf(-z)).abs());
    }

    let pass = gamma_err <= 1e-9 && bell_err <= 1e-9 && residual <= 1e-9;
    verdict(
        7,
        "constants-cross-checks",
        pass,
        &format!(
            "|gamma(2) - phi| = {gamma_err:.2e}, max Bell error = {bell_err:.2e}, max b-root residual = {residual:.2e}"
        ),
    );
    assert!(pass, "criterion 7 failed");
}

// ---------------------------------------------------------------------------
// criterion 9: oracle correctness against independent enumerators
// ---------------------------------------------------------------------------

/// Independent simple-path enumeration (plain DFS over the adjacency list).
fn all_simple_paths(g: &Graph, from: NodeId, to: NodeId) -> Vec<Vec<ResourceId>> {
    fn dfs(
        g: &Graph,
        node: NodeId,
        to: NodeId,
        seen: &mut Vec<NodeId>,
        edges: &mut Vec<ResourceId>,
        out: &mut Vec<Vec<ResourceId>>,
    ) {
        if node == to {
            out.push(edges.clone());
            return;
        }
        for e in &g.edges {
            let next = if e.from == node {
                Some(e.to)
            } else if !g.directed && e.to == node {
                Some(e.from)
            } else {
                None
            };
            if let Some(next) = next {
                if !seen.contains(&next) {
                    seen.push(next);
                    edges.push(e.resource);
                    dfs(g, next, to, seen, edges, out);
                    edges.pop();
                    seen.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    dfs(g, from, to, &mut vec![from], &mut Vec::new(), &mut out);
    out
}

/// Independent optimum Steiner weight: minimum over all edge subsets that
/// connect the terminals, connectivity checked by repeated merging.
fn brute_steiner_weight(g: &Graph, terminals: &[NodeId], w: &WeightVector) -> Option<f64> {
    let m = g.edges.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << m) {
        let mut labels: Vec<u32> = (0..g.nodes).collect();
        loop {
            let mut changed = false;
            for (k, e) in g.edges.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    let (a, b) = (labels[e.from as usize], labels[e.to as usize]);
                    if a != b {
                        let low = a.min(b);
                        for l in labels.iter_mut() {
                            if *l == a || *l == b {
                                *l = low;
                            }
                        }
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let root = labels[terminals[0] as usize];
        if terminals.iter().all(|&t| labels[t as usize] == root) {
            let weight: f64 = g
                .edges
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, e)| w.get(e.resource).unwrap())
                .sum();
            best = Some(best.map_or(weight, |b: f64| b.min(weight)));
        }
    }
    best
}

#[test]
fn criterion_9_oracle_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut path_checks = 0u32;
    let mut path_failures = 0u32;
    let mut seed = 0;
    while path_checks < 100 {
        seed += 1;
        let params = GenParams {
            agents: 1,
            nodes: 4 + (seed % 4) as u32,
            edge_density: 0.3,
            types_per_agent: 1,
            alphas: vec![2.0],
            xi_range: (0.5, 2.0),
            request_kind: RequestKindChoice::Routing,
        };
        let Ok(inst) = gen::generate_instance(seed, &params) else {
            continue;
        };
        let g = inst.graph().unwrap();
        let w = WeightVector::from_fn(&inst, |_, _| rng.random::<f64>() * 4.0);
        let from = rng.random_range(0..g.nodes);
        let mut to = rng.random_range(0..g.nodes);
        while to == from {
            to = rng.random_range(0..g.nodes);
        }
        let got = oracle::shortest_path(g, from, to, &w).unwrap();
        let best = all_simple_paths(g, from, to)
            .iter()
            .map(|edges| edges.iter().map(|&id| w.get(id).unwrap()).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        path_checks += 1;
        if (w.action_weight(&got) - best).abs() > 1e-9 {
            path_failures += 1;
        }
    }

    let mut steiner_checks = 0u32;
    let mut steiner_failures = 0u32;
    seed = 1000;
    while steiner_checks < 40 {
        seed += 1;
        let params = GenParams {
            agents: 1,
            nodes: 5,
            edge_density: 0.25,
            types_per_agent: 1,
            alphas: vec![2.0],
            xi_range: (0.5, 2.0),
            request_kind: RequestKindChoice::Routing,
        };
        let Ok(inst) = gen::generate_instance(seed, &params) else {
            continue;
        };
        let g = inst.graph().unwrap();
        if g.edges.len() > 10 {
            continue;
        }
        let w = WeightVector::from_fn(&inst, |_, _| 0.1 + rng.random::<f64>() * 4.0);
        let mut terminals: Vec<NodeId> = Vec::new();
        while terminals.len() < 3 {
            let v = rng.random_range(0..g.nodes);
            if !terminals.contains(&v) {
                terminals.push(v);
            }
        }
        let tree = oracle::steiner_mst(g, &terminals, &w).unwrap();
        let optimum = brute_steiner_weight(g, &terminals, &w).unwrap();
        steiner_checks += 1;
        if w.action_weight(&tree) > 2.0 * optimum + 1e-9 {
            steiner_failures += 1;
        }
    }

    let pass = path_failures == 0 && steiner_failures == 0;
    verdict(
        9,
        "oracle-correctness",
        pass,
        &format!(
            "{path_checks} shortest-path checks ({path_failures} failures), {steiner_checks} steiner checks ({steiner_failures} failures)"
        ),
    );
    assert!(pass, "criterion 9 failed");
}

// ---------------------------------------------------------------------------
// criterion 10: byte-identical reports from identical runs
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let gen_out = Command::new(env!("CARGO_BIN_EXE_bgnd"))
        .args([
            "gen", "--seed", "77", "--n", "4", "--nodes", "6", "--types", "3", "--alphas",
            "2.0,3.0", "--kind", "mixed", "-o", "inst.json",
        ])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(gen_out.status.success());
    for name in ["a.json", "b.json"] {
        let out = Command::new(env!("CARGO_BIN_EXE_bgnd"))
            .args(["solve", "inst.json", "--diagnostics", "--bcr", "-o", name])
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    let b = fs::read(dir.path().join("b.json")).unwrap();
    let pass = a == b && !a.is_empty();
    verdict(
        10,
        "solve-determinism",
        pass,
        &format!("two solves, {} bytes each", a.len()),
    );
    assert!(pass, "criterion 10 failed");
}
