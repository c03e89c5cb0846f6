use std::thread;

use serde::Serialize;

use crate::baseline::{baseline_consensus, BaselineParams};
use crate::domain::{GlobalMemory, Roster, TaskId};
use crate::error::{HacnError, Result};
use crate::math::mix_seed;
use crate::metrics::{reduction_ratio, Engine, MetricsRecord};
use crate::protocol::Hacn;
use crate::sim::{generate_population, generate_tasks, PopulationConfig, SimulatedAgents};
use crate::tier2::DebateOutcome;

use super::ExperimentConfig;

const POPULATION: u64 = 1;
const TASKS: u64 = 2;
const ENGINE: u64 = 3;
const AGENTS: u64 = 4;

#[derive(Clone, Debug)]
pub struct ExperimentRun {
    /// Per task: the HACN record, then the baseline record when enabled.
    pub records: Vec<MetricsRecord>,
    pub memory: GlobalMemory,
    pub transcripts: Vec<(TaskId, DebateOutcome)>,
}

impl ExperimentRun {
    pub fn engine(&self, engine: Engine) -> impl Iterator<Item = &MetricsRecord> {
        self.records.iter().filter(move |r| r.engine == engine)
    }
}

/// Run every task through HACN and, if enabled, the baseline twin. Both
/// engines see the same population, tasks and agent random streams.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let population = PopulationConfig {
        seed: mix_seed(cfg.seed, POPULATION),
        ..cfg.population.clone()
    };
    let specs = generate_population(&population)?;
    let cases = generate_tasks(
        &cfg.tasks,
        population.dimension,
        cfg.task_count,
        mix_seed(cfg.seed, TASKS),
    )?;
    let roster = Roster::new(specs.iter().map(|s| s.profile.clone()).collect());
    let n = roster.len();

    let mut engine = Hacn::new(roster.clone(), cfg.protocol.clone(), mix_seed(cfg.seed, ENGINE))?;
    let agent_seed = mix_seed(cfg.seed, AGENTS);
    let mut hacn_agents = SimulatedAgents::new(&specs, cfg.agents, agent_seed);
    let mut twin = SimulatedAgents::new(&specs, cfg.agents, agent_seed);
    let baseline_params = BaselineParams {
        voting: cfg.protocol.voting,
        costs: cfg.protocol.costs,
    };

    let mut records = Vec::with_capacity(cases.len() * if cfg.baseline { 2 } else { 1 });
    let mut transcripts = Vec::new();
    for case in &cases {
        let id = case.task.id;
        let deadline = case.task.deadline;
        hacn_agents.set_case(case);
        let out = engine.run_task(&case.task, &case.candidates, &mut hacn_agents)?;
        let mut rec = MetricsRecord::from_hacn(id, n, deadline, &out);
        rec.correct = out.decision == case.truth;
        records.push(rec);
        if let Some(d) = out.debate {
            transcripts.push((id, d));
        }

        if cfg.baseline {
            twin.set_case(case);
            let b = baseline_consensus(&roster, &case.task, &case.candidates, &baseline_params, &mut twin)?;
            let mut rec = MetricsRecord::from_baseline(id, n, deadline, &b);
            rec.correct = b.decision == case.truth;
            records.push(rec);
        }
    }
    Ok(ExperimentRun {
        records,
        memory: engine.memory().clone(),
        transcripts,
    })
}

/// One population size of a sweep, averaged over tasks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub total_messages_mean: f64,
    pub convergence_ticks_mean: f64,
    pub clusters_formed: f64,
    pub mean_agents_per_cluster: f64,
    pub accuracy: f64,
    /// Empty when the baseline is off.
    pub reduction_ratio: Option<f64>,
    pub baseline_messages_mean: Option<f64>,
    pub baseline_ticks_mean: Option<f64>,
    pub baseline_accuracy: Option<f64>,
}

fn mean<'a>(records: impl Iterator<Item = &'a MetricsRecord>, f: impl Fn(&MetricsRecord) -> f64) -> Option<f64> {
    let (sum, count) = records.fold((0.0, 0usize), |(s, c), r| (s + f(r), c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Average a run into one sweep row.
pub fn summarize(n: usize, run: &ExperimentRun) -> Result<SweepRow> {
    let h = |f: fn(&MetricsRecord) -> f64| mean(run.engine(Engine::Hacn), f).unwrap_or(0.0);
    let b = |f: fn(&MetricsRecord) -> f64| mean(run.engine(Engine::Baseline), f);
    let total = h(|r| r.total_messages as f64);
    let baseline_messages = b(|r| r.total_messages as f64);
    Ok(SweepRow {
        n,
        total_messages_mean: total,
        convergence_ticks_mean: h(|r| r.convergence_ticks as f64),
        clusters_formed: h(|r| r.clusters_formed as f64),
        mean_agents_per_cluster: h(|r| r.mean_agents_per_cluster),
        accuracy: h(|r| f64::from(u8::from(r.correct))),
        reduction_ratio: baseline_messages.map(|bm| reduction_ratio(total, bm)).transpose()?,
        baseline_messages_mean: baseline_messages,
        baseline_ticks_mean: b(|r| r.convergence_ticks as f64),
        baseline_accuracy: b(|r| f64::from(u8::from(r.correct))),
    })
}

/// Run the experiment once per population size. Sizes run concurrently;
/// rows come back in input order.
pub fn sweep(cfg: &ExperimentConfig, sizes: &[usize]) -> Result<Vec<SweepRow>> {
    if sizes.is_empty() {
        return Err(HacnError::InvalidInput("sweep needs at least one population size".into()));
    }
    let results: Vec<Result<SweepRow>> = thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .map(|&n| {
                scope.spawn(move || {
                    let mut c = cfg.clone();
                    c.population.agents = n;
                    run_experiment(&c)
                        .and_then(|run| summarize(n, &run))
                        .map_err(|e| HacnError::Sweep {
                            agents: n,
                            source: Box::new(e),
                        })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}
