//! One episode of learning with an optional simulated trainer.

use super::agent::Agent;
use super::config::{Config, ConfigError, UserKind};
use super::HarnessError;
use crate::advice::RdrError;
use crate::env::Environment;
use crate::rl::{ActionChoice, ActionSource};
use crate::rng::{stream, SimRng, Stream};
use crate::users::{AdviceKind, Oracle, RuleUser, StateUser};

pub enum Trainer {
    None,
    State(StateUser),
    Rule(RuleUser),
}

impl Trainer {
    pub fn from_config(config: &Config) -> Result<Self, ConfigError> {
        let env = config.env.kind;
        let kind = match config.user.kind {
            UserKind::None => return Ok(Trainer::None),
            UserKind::Rule => return Ok(Trainer::Rule(RuleUser::new(config.user.knowledge_tree(env)?))),
            UserKind::Evaluative => AdviceKind::Evaluative,
            UserKind::Informative => AdviceKind::Informative,
        };
        Ok(Trainer::State(StateUser::new(
            kind,
            config.user.reliability(),
            config.user.region.rule(),
            Oracle::for_env(env),
            config.advice.eval_magnitude,
            env.actions().len(),
        )))
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Trainer::None)
    }
}

/// Independent random streams for one run.
pub struct RunRngs {
    pub env: SimRng,
    pub agent: SimRng,
    pub trainer: SimRng,
}

impl RunRngs {
    pub fn new(base_seed: u64, run: u64) -> Self {
        RunRngs {
            env: stream(base_seed, run, Stream::Environment),
            agent: stream(base_seed, run, Stream::Agent),
            trainer: stream(base_seed, run, Stream::Trainer),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeStats {
    pub steps: usize,
    /// Environment reward only; evaluations are not included.
    pub reward: f64,
    /// Steps on which the trainer gave advice.
    pub interactions: usize,
    /// Steps on which retained advice was used instead.
    pub retained_uses: usize,
}

pub fn run_episode(
    env: &mut dyn Environment,
    agent: &mut Agent,
    trainer: &mut Trainer,
    rngs: &mut RunRngs,
) -> Result<EpisodeStats, HarnessError> {
    env.reset(&mut rngs.env)?;
    let persistent = agent.kind().persistent();
    let needs_case = agent.reads_cases() || !trainer.is_none();
    let mut stats = EpisodeStats::default();
    let mut s = env.state_id()?;
    let mut case = needs_case.then(|| env.case());

    for _ in 0..env.max_steps() {
        let retained = agent.retained(s, case.as_ref())?;
        let intended = agent.choose(s, &retained, None, &mut rngs.agent)?;

        let mut fresh = None;
        match trainer {
            Trainer::State(user) if user.kind == AdviceKind::Informative => {
                let c = case.as_ref().expect("cases are built when a trainer is present");
                fresh = user.advise_action(c, s, persistent, &mut rngs.trainer)?;
                if let Some(a) = fresh {
                    agent.accept_recommendation(s, Some(c), a);
                }
            }
            Trainer::Rule(user) => {
                let c = case.as_ref().expect("cases are built when a trainer is present");
                if let Some(advice) = user.advise(c, intended.action)? {
                    let at = retained
                        .classification
                        .map(|k| k.insertion_node)
                        .ok_or(HarnessError::Incompatible("rule advice needs a rule-based agent"))?;
                    match agent.accept_rule(at, advice.rule, advice.action, c.clone()) {
                        // The advice is still followed on this step.
                        Ok(_) | Err(RdrError::CornerstoneConflict(_)) => {}
                        Err(e) => return Err(e.into()),
                    }
                    fresh = Some(advice.action);
                }
            }
            _ => {}
        }

        let choice = match fresh {
            Some(action) => {
                stats.interactions += 1;
                ActionChoice {
                    action,
                    source: ActionSource::FreshAdvice,
                }
            }
            None => {
                if intended.source == ActionSource::RetainedAdvice {
                    stats.retained_uses += 1;
                }
                intended
            }
        };
        let a = choice.action;
        let outcome = env.step(a, &mut rngs.env)?;
        let mut reward = outcome.reward;

        if let Trainer::State(user) = trainer {
            if user.kind == AdviceKind::Evaluative {
                if let Some(r) = agent.replay_evaluation(s, a, &mut rngs.agent) {
                    reward += r;
                    stats.retained_uses += 1;
                } else if !agent.has_evaluation(s, a) {
                    let c = case.as_ref().expect("cases are built when a trainer is present");
                    if let Some(r) = user.advise_evaluation(c, s, a, persistent, &mut rngs.trainer)? {
                        stats.interactions += 1;
                        reward += r;
                        agent.accept_evaluation(s, a, r);
                    }
                }
            }
        }

        let next = env.state_id()?;
        agent.learn(s, a, reward, (!outcome.terminal).then_some(next))?;
        stats.steps += 1;
        stats.reward += outcome.reward;
        if outcome.terminal {
            break;
        }
        s = next;
        case = needs_case.then(|| env.case());
    }
    agent.end_episode();
    Ok(stats)
}
