//! Acceptance suite. Every criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.
//!
//! Run with `cargo test -p hacn --test acceptance`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hacn::cluster::{silhouette, Cluster};
use hacn::domain::{
    AgentId, AgentProfile, Candidate, CandidateId, ClusterId, ClusterSolution, GlobalMemory,
    PriorDecision, Proposal, Roster, Task, TaskId, Vote,
};
use hacn::harness::{run_experiment, sweep, ExperimentConfig, SweepRow};
use hacn::metrics::{complexity_fit, Engine};
use hacn::sim::ForcedAgreement;
use hacn::tier1::{
    convergence_lower_bound, local_consensus, tally, LocalContext, ThresholdState, VotingParams,
};
use hacn::tier3::{fallback, select_candidate, ArbitrationParams};
use hacn::Network;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

// ---------------------------------------------------------------- 1

fn cluster_count_at_thousand() -> Verdict {
    let start = Instant::now();
    let mut cfg = ExperimentConfig {
        task_count: 5,
        seed: 2024,
        ..Default::default()
    };
    cfg.population.agents = 1000;
    let rows = match sweep(&cfg, &[1000]) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("sweep failed: {e}")),
    };
    let row = &rows[0];
    let elapsed = start.elapsed();
    verdict(
        row.clusters_formed == 31.0
            && (30.0..=34.0).contains(&row.mean_agents_per_cluster)
            && within(elapsed, Duration::from_secs(60)),
        format!(
            "clusters_formed={} mean_agents_per_cluster={:.2} runtime={:.1}s",
            row.clusters_formed,
            row.mean_agents_per_cluster,
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 2

fn message_reduction_at_hundred() -> Verdict {
    let start = Instant::now();
    let mut cfg = ExperimentConfig {
        task_count: 25,
        baseline: true,
        seed: 100,
        ..Default::default()
    };
    cfg.population.agents = 100;
    let run = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("run failed: {e}")),
    };
    let elapsed = start.elapsed();
    let baseline: Vec<u64> = run.engine(Engine::Baseline).map(|r| r.total_messages).collect();
    let hacn: Vec<u64> = run.engine(Engine::Hacn).map(|r| r.total_messages).collect();
    let min_baseline = baseline.iter().copied().min().unwrap_or(0);
    let mean = |v: &[u64]| v.iter().sum::<u64>() as f64 / v.len() as f64;
    let ratio = 100.0 * (1.0 - mean(&hacn) / mean(&baseline));
    verdict(
        baseline.len() == 25
            && min_baseline >= 9_900
            && ratio >= 99.0
            && within(elapsed, Duration::from_secs(60)),
        format!(
            "min baseline/task={min_baseline} mean hacn={:.1} mean baseline={:.1} reduction={ratio:.2}% (need >= 99.0) runtime={:.1}s",
            mean(&hacn),
            mean(&baseline),
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 3 and tick bound

fn scaling_sweep() -> (Vec<SweepRow>, Duration) {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        task_count: 10,
        baseline: true,
        seed: 7,
        ..Default::default()
    };
    let rows = sweep(&cfg, &[50, 100, 200, 400, 600, 800, 1000]).expect("scaling sweep");
    (rows, start.elapsed())
}

fn scaling_law(rows: &[SweepRow], elapsed: Duration) -> Verdict {
    let hacn: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.total_messages_mean)).collect();
    let base: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.n as f64, r.baseline_messages_mean.unwrap_or(0.0)))
        .collect();
    let (Ok(h), Ok(b)) = (complexity_fit(&hacn), complexity_fit(&base)) else {
        return verdict(false, "degenerate series");
    };
    verdict(
        h.slope <= 1.2
            && h.r_squared >= 0.9
            && (b.slope - 2.0).abs() <= 0.1
            && within(elapsed, Duration::from_secs(300)),
        format!(
            "hacn slope={:.3} (need <= 1.2) r2={:.4}; baseline slope={:.3} (need 2.0 +/- 0.1) r2={:.4}; runtime={:.1}s",
            h.slope,
            h.r_squared,
            b.slope,
            b.r_squared,
            elapsed.as_secs_f64()
        ),
    )
}

fn tick_growth(rows: &[SweepRow]) -> Verdict {
    let at = |n| rows.iter().find(|r| r.n == n).map(|r| r.convergence_ticks_mean);
    let (Some(small), Some(large)) = (at(100), at(1000)) else {
        return verdict(false, "sweep rows missing");
    };
    verdict(
        large <= 3.0 * small,
        format!("mean ticks n=100: {small:.1}, n=1000: {large:.1} (need <= {:.1})", 3.0 * small),
    )
}

// ---------------------------------------------------------------- 4

fn convergence_bound() -> Verdict {
    let start = Instant::now();
    let trials = 10_000u32;
    let slack = 3.0 * (0.25f64 / f64::from(trials)).sqrt();
    let m = 4u32;
    let roster = Roster::new(
        (0..m)
            .map(|i| AgentProfile {
                id: AgentId(i),
                expertise: vec![1.0],
                history: 1.0,
                availability: 1.0,
                online: true,
            })
            .collect(),
    );
    let cluster = Cluster {
        id: ClusterId(0),
        members: (0..m).map(AgentId).collect(),
        leader: AgentId(0),
        centroid: vec![],
    };
    let task = Task::new(TaskId(0), vec![1.0], 0.5, 10_000, 1.0).expect("task");
    let candidates: Vec<Candidate> = (0..m)
        .map(|i| Candidate {
            id: CandidateId(i),
            feature: vec![1.0],
            cost: 0.0,
        })
        .collect();
    let memory = GlobalMemory::new();
    let ctx = LocalContext {
        task: &task,
        candidates: &candidates,
        roster: &roster,
        memory: &memory,
    };

    let mut pass = true;
    let mut parts = Vec::new();
    for (pi, p) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        for k in [1u32, 3, 10] {
            let params = VotingParams {
                max_iters: k,
                ..Default::default()
            };
            let mut agents = ForcedAgreement::new(p, 1000 * pi as u64 + u64::from(k));
            let mut converged = 0u32;
            for _ in 0..trials {
                let mut net = Network::default();
                let out = local_consensus(&cluster, &ctx, &params, &mut agents, &mut net).expect("vote");
                converged += u32::from(!out.solution.escalated);
            }
            let freq = f64::from(converged) / f64::from(trials);
            let bound = convergence_lower_bound(p, k);
            pass &= freq >= bound - slack;
            parts.push(format!("p={p} k={k}: {freq:.4} vs {bound:.4}"));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        pass && within(elapsed, Duration::from_secs(60)),
        format!("{}; runtime={:.1}s", parts.join(", "), elapsed.as_secs_f64()),
    )
}

// ---------------------------------------------------------------- 5

fn guaranteed_termination() -> Verdict {
    let start = Instant::now();
    let runs = 1000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut paths: BTreeMap<String, usize> = BTreeMap::new();
    for run in 0..runs {
        let mut cfg = ExperimentConfig {
            seed: rng.random(),
            task_count: 2,
            ..Default::default()
        };
        cfg.population.agents = rng.random_range(10..=120);
        cfg.population.dropout_rate = 0.1;
        cfg.population.adversarial_rate = 0.1;
        cfg.tasks.adversarial_costs = true;
        let lo = rng.random_range(8..=150);
        cfg.tasks.deadline_min = lo;
        cfg.tasks.deadline_max = rng.random_range(lo..=300);
        cfg.protocol.partition_rate = if run % 2 == 0 { 0.0 } else { 0.3 };
        let out = match run_experiment(&cfg) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("run {run}: {e}"));
                continue;
            }
        };
        let records: Vec<_> = out.engine(Engine::Hacn).collect();
        let ok = records.len() == cfg.task_count
            && out.memory.history().len() == cfg.task_count
            && records.iter().all(|r| {
                r.convergence_ticks <= r.deadline && (r.decision.0 as usize) < cfg.tasks.candidates
            })
            && out
                .memory
                .history()
                .iter()
                .zip(&records)
                .all(|(h, r)| h.path == r.escalation_path && h.decision == r.decision);
        if !ok {
            failures.push(format!("run {run}: missing decision, late, or unrecorded path"));
        }
        for r in records {
            *paths.entry(r.escalation_path.to_string()).or_default() += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        failures.is_empty() && within(elapsed, Duration::from_secs(120)),
        format!(
            "{}/{runs} runs ok; paths {paths:?}; runtime={:.1}s{}",
            runs as usize - failures.len(),
            elapsed.as_secs_f64(),
            failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------- 6

fn brute_force_tally(votes: &[(u32, f64, f64)]) -> Option<CandidateId> {
    let mut sums = [0.0f64; 4];
    for &(c, conf, h) in votes {
        sums[c as usize] += conf * h;
    }
    if sums.iter().sum::<f64>() <= 0.0 {
        return None;
    }
    let mut best = 0;
    for c in 1..4 {
        if sums[c] > sums[best] {
            best = c;
        }
    }
    Some(CandidateId(best as u32))
}

fn unit_cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Phases 2 and 3 evaluated directly: every group pair's mean similarity
/// is recomputed from scratch, every medoid candidate is scored by its full
/// similarity sum, and every check is evaluated from its definition.
fn brute_force_selection(
    solutions: &[CandidateId],
    candidates: &[Candidate],
    task: &Task,
    priors: &[PriorDecision],
) -> Option<CandidateId> {
    let n = solutions.len();
    let feature = |i: usize| &candidates[solutions[i].0 as usize].feature;
    let sim = |i: usize, j: usize| {
        if solutions[i] == solutions[j] {
            1.0
        } else {
            (unit_cos(feature(i), feature(j)) + 1.0) / 2.0
        }
    };

    let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let pairs: Vec<f64> = groups[a]
                    .iter()
                    .flat_map(|&i| groups[b].iter().map(move |&j| (i, j)))
                    .map(|(i, j)| sim(i, j))
                    .collect();
                let mean = pairs.iter().sum::<f64>() / pairs.len() as f64;
                if best.is_none_or(|(s, _, _)| mean > s) {
                    best = Some((mean, a, b));
                }
            }
        }
        match best {
            Some((s, a, b)) if s >= 0.7 => {
                let moved = groups.remove(b);
                groups[a].extend(moved);
                groups[a].sort_unstable();
                groups.sort();
            }
            _ => break,
        }
    }

    let mut options: Vec<(f64, CandidateId)> = Vec::new();
    for g in &groups {
        let scores: Vec<(usize, f64)> = g.iter().map(|&i| (i, (0..n).map(|j| sim(i, j)).sum())).collect();
        let top = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let medoid = scores.iter().filter(|s| s.1 == top).map(|s| s.0).min().unwrap();
        let cand = &candidates[solutions[medoid].0 as usize];

        let relevance = (unit_cos(&cand.feature, &task.required_expertise) + 1.0) / 2.0;
        let omega_bound = 0.5 * task.complexity;
        let related: Vec<&PriorDecision> = priors
            .iter()
            .filter(|p| unit_cos(&p.requirement, &task.required_expertise) >= 0.9)
            .collect();
        let phi_mean = if related.is_empty() {
            None
        } else {
            Some(
                related
                    .iter()
                    .map(|p| (unit_cos(&cand.feature, &p.feature) + 1.0) / 2.0)
                    .sum::<f64>()
                    / related.len() as f64,
            )
        };
        let feasible = relevance >= omega_bound
            && phi_mean.is_none_or(|m| m >= 0.3)
            && cand.cost <= task.resource_budget;
        if feasible {
            let margins = [
                relevance - omega_bound,
                phi_mean.map_or(1.0, |m| m - 0.3),
                1.0 - cand.cost / task.resource_budget,
            ];
            let bonus = 1.0 + 0.1 * margins.iter().map(|m| m.clamp(0.0, 1.0)).sum::<f64>() / 3.0;
            options.push((top * bonus, cand.id));
        }
    }
    options.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    options.first().map(|o| o.1)
}

fn brute_force_fallback(sols: &[ClusterSolution], candidates: &[Candidate]) -> CandidateId {
    let mut rows: Vec<(CandidateId, f64, f64, f64)> = Vec::new();
    for c in candidates {
        let backing: Vec<&ClusterSolution> = sols.iter().filter(|s| s.candidate == c.id).collect();
        if backing.is_empty() {
            continue;
        }
        let votes = backing.iter().map(|s| s.strength * s.member_count as f64).sum();
        let strength = backing.iter().map(|s| s.strength).sum::<f64>() / backing.len() as f64;
        rows.push((c.id, votes, c.cost, strength));
    }
    rows.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.2.total_cmp(&b.2))
            .then(b.3.total_cmp(&a.3))
            .then(a.0.cmp(&b.0))
    });
    rows[0].0
}

fn voting_oracle() -> Verdict {
    let instances = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut tally_mismatch = 0;
    let mut select_mismatch = 0;
    let mut fallbacks = 0;
    for _ in 0..instances {
        // tally over at most 5 agents and 4 candidates
        let m = rng.random_range(1..=5);
        let ballots: Vec<(u32, f64, f64)> = (0..m)
            .map(|_| (rng.random_range(0..4), rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let votes: Vec<Vote> = ballots
            .iter()
            .enumerate()
            .map(|(i, &(c, conf, h))| {
                Vote::cast(
                    AgentId(i as u32),
                    Proposal {
                        candidate: CandidateId(c),
                        confidence: conf,
                    },
                    h,
                )
            })
            .collect();
        let got = tally(&votes).ok().and_then(|t| t.leader()).map(|l| l.0);
        if got != brute_force_tally(&ballots) {
            tally_mismatch += 1;
        }

        // selection over at most 4 cluster solutions and 4 candidates
        let nc = rng.random_range(1..=4u32);
        let candidates: Vec<Candidate> = (0..nc)
            .map(|i| Candidate {
                id: CandidateId(i),
                feature: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                cost: rng.random_range(0.0..12.0),
            })
            .collect();
        let task = Task::new(
            TaskId(0),
            vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            rng.random(),
            200,
            10.0,
        )
        .expect("task");
        let mut memory = GlobalMemory::new();
        for p in 0..rng.random_range(0..3u32) {
            let jitter = if rng.random_bool(0.5) { 0.05 } else { 1.5 };
            memory.push_prior(PriorDecision {
                task: TaskId(p + 1),
                requirement: task
                    .required_expertise
                    .iter()
                    .map(|x| x + rng.random_range(-jitter..jitter))
                    .collect(),
                candidate: CandidateId(0),
                feature: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            });
        }
        let k = rng.random_range(1..=4u32);
        let sols: Vec<ClusterSolution> = (0..k)
            .map(|c| ClusterSolution {
                cluster: ClusterId(c),
                candidate: CandidateId(rng.random_range(0..nc)),
                strength: rng.random(),
                member_count: rng.random_range(1..=5),
                escalated: false,
            })
            .collect();
        let ids: Vec<CandidateId> = sols.iter().map(|s| s.candidate).collect();
        let (_, winner) =
            select_candidate(&ids, &candidates, &task, &memory, &ArbitrationParams::default()).expect("select");
        let expected = brute_force_selection(&ids, &candidates, &task, memory.prior_decisions());
        let (got, expected) = match (winner, expected) {
            (None, None) => {
                fallbacks += 1;
                (fallback(&sols, &candidates).ok(), Some(brute_force_fallback(&sols, &candidates)))
            }
            other => other,
        };
        if got != expected {
            select_mismatch += 1;
        }
    }
    verdict(
        tally_mismatch == 0 && select_mismatch == 0,
        format!(
            "{instances} instances: tally mismatches={tally_mismatch}, selection mismatches={select_mismatch} ({fallbacks} via fallback)"
        ),
    )
}

// ---------------------------------------------------------------- 7

fn reference_silhouette(labels: &[usize], points: &[Vec<f64>]) -> f64 {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    if clusters.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..points.len() {
        let same: Vec<usize> = (0..points.len()).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if same.is_empty() {
            continue;
        }
        let a = same.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / same.len() as f64;
        let mut b = f64::INFINITY;
        for &c in &clusters {
            if c == labels[i] {
                continue;
            }
            let other: Vec<usize> = (0..points.len()).filter(|&j| labels[j] == c).collect();
            let d = other.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / other.len() as f64;
            b = b.min(d);
        }
        let s = if a.max(b) > 0.0 { (b - a) / a.max(b) } else { 0.0 };
        total += s;
    }
    total / points.len() as f64
}

fn silhouette_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=50);
        let d = rng.random_range(1..=6);
        let k = rng.random_range(1..=6);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        worst = worst.max((silhouette(&labels, &points) - reference_silhouette(&labels, &points)).abs());
    }
    verdict(worst <= 1e-9, format!("100 instances, max |diff| = {worst:.3e}"))
}

// ---------------------------------------------------------------- 8

fn threshold_decay() -> Verdict {
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&(0.0f64..=1.0, 0u32..=20), |(theta_0, i)| {
        let mut t = ThresholdState::new(theta_0);
        for _ in 0..i {
            t.decay();
        }
        let expected = (theta_0 * 0.95f64.powi(i as i32)).max(0.5);
        prop_assert_eq!(t.theta().to_bits(), expected.to_bits());
        Ok(())
    });
    verdict(result.is_ok(), format!("2000 cases: {}", result.err().map_or("ok".into(), |e| e.to_string())))
}

// ---------------------------------------------------------------- 9

fn weighted_vote_invariance() -> Verdict {
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        failure_persistence: None,
        ..Config::default()
    });
    let ballot = (0u32..6, 0.01f64..=1.0, 0.01f64..=1.0);
    let result = runner.run(
        &(prop::collection::vec(ballot, 1..40), 1e-6f64..=1.0),
        |(ballots, gamma)| {
            let cast = |scale: f64| -> Vec<Vote> {
                ballots
                    .iter()
                    .enumerate()
                    .map(|(i, &(c, conf, h))| {
                        Vote::cast(
                            AgentId(i as u32),
                            Proposal {
                                candidate: CandidateId(c),
                                confidence: conf * scale,
                            },
                            h,
                        )
                    })
                    .collect()
            };
            let base = tally(&cast(1.0)).unwrap().leader().unwrap().0;
            let scaled = tally(&cast(gamma)).unwrap().leader().unwrap().0;
            prop_assert_eq!(base, scaled);
            Ok(())
        },
    );
    verdict(result.is_ok(), format!("2000 cases: {}", result.err().map_or("ok".into(), |e| e.to_string())))
}

// ---------------------------------------------------------------- 10

fn competence_monotonicity() -> Verdict {
    let accuracy = |mean: f64| -> (f64, usize) {
        let mut cfg = ExperimentConfig {
            task_count: 200,
            seed: 10,
            ..Default::default()
        };
        cfg.population.reliability.mean = mean;
        let run = run_experiment(&cfg).expect("competence run");
        let recs: Vec<_> = run.engine(Engine::Hacn).collect();
        let hits = recs.iter().filter(|r| r.correct).count();
        (hits as f64 / recs.len() as f64, recs.len())
    };
    let (high, n1) = accuracy(0.8);
    let (low, n2) = accuracy(0.5);
    // one-sided two-proportion z-test at the 5% level
    let pooled = (high * n1 as f64 + low * n2 as f64) / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = if se > 0.0 { (high - low) / se } else { 0.0 };
    verdict(
        high > low && z > 1.645,
        format!("accuracy at 0.8: {high:.3}, at 0.5: {low:.3}, z={z:.2} (need > 1.645)"),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    results.push(("1 cluster count at n=1000", cluster_count_at_thousand()));
    results.push(("2 message reduction at n=100", message_reduction_at_hundred()));
    let (rows, elapsed) = scaling_sweep();
    results.push(("3 scaling law", scaling_law(&rows, elapsed)));
    results.push(("4 convergence bound", convergence_bound()));
    results.push(("5 guaranteed termination", guaranteed_termination()));
    results.push(("6 voting oracle", voting_oracle()));
    results.push(("7 silhouette oracle", silhouette_oracle()));
    results.push(("8 threshold decay", threshold_decay()));
    results.push(("9 weighted-vote invariance", weighted_vote_invariance()));
    results.push(("10 competence monotonicity", competence_monotonicity()));
    results.push(("tick growth n=1000 vs n=100", tick_growth(&rows)));

    let mut failed = 0;
    for (name, v) in &results {
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
