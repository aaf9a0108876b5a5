//! Repeated runs of an agent/trainer pairing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::agent::Agent;
use super::config::Config;
use super::episode::{run_episode, RunRngs, Trainer};
use super::HarnessError;

/// One row of `metrics.csv`. Runs and episodes count from zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub run: usize,
    pub episode: usize,
    pub steps: usize,
    pub reward: f64,
    pub interactions: usize,
    pub retained_uses: usize,
}

/// Final state of one run, for inspection.
pub struct RunOutcome {
    pub metrics: Vec<EpisodeMetrics>,
    pub agent: Agent,
    pub trainer: Trainer,
}

/// Runs the episodes of run `run` from freshly reset agent, trainer and
/// environment.
pub fn run_one(config: &Config, run: usize) -> Result<RunOutcome, HarnessError> {
    let mut env = config.env.build()?;
    let mut agent = Agent::new(
        config.agent.kind,
        env.state_count(),
        env.actions().len(),
        config.learning_params(),
        &config.ppr,
    );
    let mut trainer = Trainer::from_config(config)?;
    let mut rngs = RunRngs::new(config.experiment.seed, run as u64);
    let mut metrics = Vec::with_capacity(config.experiment.episodes);
    for episode in 0..config.experiment.episodes {
        let stats = run_episode(env.as_mut(), &mut agent, &mut trainer, &mut rngs)?;
        metrics.push(EpisodeMetrics {
            run,
            episode,
            steps: stats.steps,
            reward: stats.reward,
            interactions: stats.interactions,
            retained_uses: stats.retained_uses,
        });
    }
    Ok(RunOutcome {
        metrics,
        agent,
        trainer,
    })
}

/// All runs, ordered by run then episode whatever the thread count.
pub fn run_experiment(config: &Config, parallel: usize) -> Result<Vec<EpisodeMetrics>, HarnessError> {
    config.validate()?;
    let runs = config.experiment.runs;
    let per_run = |run: usize| run_one(config, run).map(|o| o.metrics);
    let results: Vec<Vec<EpisodeMetrics>> = if parallel <= 1 {
        (0..runs).map(per_run).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        pool.install(|| (0..runs).into_par_iter().map(per_run).collect::<Result<_, _>>())?
    };
    Ok(results.into_iter().flatten().collect())
}

/// Per-episode statistics across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeAggregate {
    pub episode: usize,
    pub steps_mean: f64,
    pub steps_std: f64,
    pub reward_mean: f64,
    pub reward_std: f64,
    pub interactions_mean: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate(metrics: &[EpisodeMetrics]) -> Vec<EpisodeAggregate> {
    let episodes = metrics.iter().map(|m| m.episode + 1).max().unwrap_or(0);
    (0..episodes)
        .map(|e| {
            let rows: Vec<&EpisodeMetrics> = metrics.iter().filter(|m| m.episode == e).collect();
            let steps: Vec<f64> = rows.iter().map(|m| m.steps as f64).collect();
            let rewards: Vec<f64> = rows.iter().map(|m| m.reward).collect();
            let interactions: Vec<f64> = rows.iter().map(|m| m.interactions as f64).collect();
            let (steps_mean, steps_std) = mean_std(&steps);
            let (reward_mean, reward_std) = mean_std(&rewards);
            EpisodeAggregate {
                episode: e,
                steps_mean,
                steps_std,
                reward_mean,
                reward_std,
                interactions_mean: mean_std(&interactions).0,
            }
        })
        .collect()
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub agent: String,
    pub user: String,
    /// Mean trainer interactions per run.
    pub interactions: f64,
    /// Interactions as a percentage of all steps taken.
    pub interaction_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Totals {
    pub runs: usize,
    pub steps: usize,
    pub interactions: usize,
    pub retained_uses: usize,
}

impl Totals {
    pub fn of(metrics: &[EpisodeMetrics]) -> Self {
        let mut runs: Vec<usize> = metrics.iter().map(|m| m.run).collect();
        runs.sort_unstable();
        runs.dedup();
        Totals {
            runs: runs.len(),
            steps: metrics.iter().map(|m| m.steps).sum(),
            interactions: metrics.iter().map(|m| m.interactions).sum(),
            retained_uses: metrics.iter().map(|m| m.retained_uses).sum(),
        }
    }

    pub fn interaction_pct(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            100.0 * self.interactions as f64 / self.steps as f64
        }
    }

    pub fn interactions_per_run(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.interactions as f64 / self.runs as f64
        }
    }
}

pub fn summarize(agent: &str, user: &str, metrics: &[EpisodeMetrics]) -> Summary {
    let totals = Totals::of(metrics);
    Summary {
        agent: agent.to_string(),
        user: user.to_string(),
        interactions: totals.interactions_per_run(),
        interaction_pct: totals.interaction_pct(),
    }
}
