//! One live advising session, driven one step at a time.
//!
//! Each step is prepared (the agent picks its intended action and, depending
//! on the prompt policy, a [`Prompt`] is produced) and then resolved with the
//! trainer's reply or `Ignore`. The Q update of a step is held back until the
//! next step is resolved so that an evaluation can still reach it; it is
//! flushed immediately when the episode ends.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::protocol::{
    ActionInfo, Opened, Prompt, PromptPolicy, SessionOptions, Snapshot, StateUpdate, SubmitKind,
    Submission,
};
use crate::advice::{case_diff, parse_rule, ParseError, RdrError, RuleError};
use crate::case::Case;
use crate::env::{ActionId, EnvError, Environment, StateId};
use crate::harness::{Agent, AgentKind, Config, ConfigError, Retained, RunRngs};
use crate::rl::{ActionChoice, ActionSource, RlError};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("submission for step {got} but the pending prompt is for step {expected:?}")]
    StalePrompt { got: u64, expected: Option<u64> },
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Rdr(#[from] RdrError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("{0}")]
    BadSubmission(String),
    #[error("there is no previous step in this episode to evaluate")]
    NothingToEvaluate,
    #[error("only rule-based agents accept rules")]
    RulesUnsupported,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Rl(#[from] RlError),
}

impl SessionError {
    /// Stable identifier sent in `error` messages.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::StalePrompt { .. } => "stale_prompt",
            SessionError::Parse(_) => "parse_error",
            SessionError::Rdr(RdrError::RuleRejected { .. }) => "rule_rejected",
            SessionError::Rdr(RdrError::CornerstoneConflict(_)) => "cornerstone_conflict",
            SessionError::Rdr(_) => "tree_error",
            SessionError::Rule(_) => "rule_error",
            SessionError::UnknownAction(_) => "unknown_action",
            SessionError::BadSubmission(_) => "bad_submission",
            SessionError::NothingToEvaluate => "nothing_to_evaluate",
            SessionError::RulesUnsupported => "unsupported",
            SessionError::Config(_) => "invalid_config",
            SessionError::Env(_) | SessionError::Rl(_) => "internal",
        }
    }
}

/// How a prepared step is settled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "resolution", rename_all = "lowercase")]
pub enum Resolution {
    /// No reply: the prompt timed out or no prompt was shown.
    Ignore,
    Submit { submission: Submission },
}

struct Prepared {
    step: u64,
    s: StateId,
    case: Case,
    retained: Retained,
    intended: ActionChoice,
    prompt: Option<Prompt>,
}

struct PendingUpdate {
    s: StateId,
    a: ActionId,
    reward: f64,
    next: Option<StateId>,
}

pub struct Session {
    id: String,
    config: Config,
    options: SessionOptions,
    env: Box<dyn Environment>,
    agent: Agent,
    rngs: RunRngs,
    step: u64,
    episode: u64,
    episode_step: usize,
    needs_reset: bool,
    prepared: Option<Prepared>,
    pending: Option<PendingUpdate>,
    interactions: u64,
}

impl Session {
    pub fn new(id: &str, config: Config, options: SessionOptions) -> Result<Self, SessionError> {
        config.validate()?;
        let env = config.env.build()?;
        let agent = Agent::new(
            config.agent.kind,
            env.state_count(),
            env.actions().len(),
            config.learning_params(),
            &config.ppr,
        );
        let rngs = RunRngs::new(config.experiment.seed, 0);
        Ok(Session {
            id: id.to_string(),
            config,
            options,
            env,
            agent,
            rngs,
            step: 0,
            episode: 0,
            episode_step: 0,
            needs_reset: true,
            prepared: None,
            pending: None,
            interactions: 0,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn options(&self) -> &SessionOptions {
        &self.options
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn interactions(&self) -> u64 {
        self.interactions
    }

    pub fn opened(&self) -> Opened {
        let actions = self.env.actions();
        Opened {
            session: self.id.clone(),
            env: self.env.kind(),
            agent: self.agent.kind(),
            schema: self
                .env
                .schema()
                .features()
                .map(|(n, k)| (n.to_string(), k))
                .collect(),
            actions: actions
                .iter()
                .map(|a| ActionInfo {
                    name: actions.name(a).to_string(),
                    label: actions.label(a).to_string(),
                })
                .collect(),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        let q = self.agent.q();
        let advice = self.agent.advice_json(&self.env.actions());
        Snapshot {
            step: self.step,
            q: q.values().chunks(q.actions()).map(<[f64]>::to_vec).collect(),
            advice: serde_json::from_str(&advice).expect("advice is JSON"),
        }
    }

    /// The prompt awaiting a reply, if any.
    pub fn pending_prompt(&self) -> Option<&Prompt> {
        self.prepared.as_ref().and_then(|p| p.prompt.as_ref())
    }

    fn wants_prompt(&self, retained: &Retained) -> bool {
        match self.options.prompt {
            PromptPolicy::EveryStep => true,
            PromptPolicy::Never => false,
            PromptPolicy::WhenModelFires => retained.action.is_some(),
            PromptPolicy::EveryN { n } => n > 0 && self.step % n == 0,
        }
    }

    /// Picks the intended action for the current step. Calling it again
    /// before [`Session::resolve`] returns the same prompt.
    pub fn prepare(&mut self) -> Result<Option<Prompt>, SessionError> {
        if let Some(p) = &self.prepared {
            return Ok(p.prompt.clone());
        }
        if self.needs_reset {
            self.env.reset(&mut self.rngs.env)?;
            self.episode_step = 0;
            self.needs_reset = false;
        }
        let s = self.env.state_id()?;
        let case = self.env.case();
        let retained = self.agent.retained(s, Some(&case))?;
        let intended = self.agent.choose(s, &retained, None, &mut self.rngs.agent)?;
        let prompt = if self.wants_prompt(&retained) {
            let cornerstone = if intended.source == ActionSource::RetainedAdvice {
                self.agent.cornerstone(s, &retained).cloned()
            } else {
                None
            };
            let diff = match &cornerstone {
                Some(c) => Some(case_diff(&case, c).map_err(|e| SessionError::BadSubmission(e.to_string()))?),
                None => None,
            };
            Some(Prompt {
                step: self.step,
                episode: self.episode,
                case: case.clone(),
                intended_action: self.env.actions().name(intended.action).to_string(),
                source: intended.source,
                cornerstone,
                diff,
                can_evaluate: self.pending.is_some(),
            })
        } else {
            None
        };
        self.prepared = Some(Prepared {
            step: self.step,
            s,
            case,
            retained,
            intended,
            prompt: prompt.clone(),
        });
        Ok(prompt)
    }

    fn parse_action(&self, name: Option<&str>) -> Result<ActionId, SessionError> {
        let name = name.ok_or_else(|| SessionError::BadSubmission("missing `action`".into()))?;
        self.env
            .actions()
            .parse(name)
            .ok_or_else(|| SessionError::UnknownAction(name.to_string()))
    }

    /// Settles the prepared step and executes it. On error nothing changes
    /// and the prompt stays pending.
    pub fn resolve(&mut self, resolution: &Resolution) -> Result<StateUpdate, SessionError> {
        self.prepare()?;
        let prepared = self.prepared.as_ref().expect("prepared above");
        let mut fresh = None;
        let mut evaluation = None;
        if let Resolution::Submit { submission } = resolution {
            if prepared.prompt.is_none() || submission.step != prepared.step {
                return Err(SessionError::StalePrompt {
                    got: submission.step,
                    expected: prepared.prompt.as_ref().map(|p| p.step),
                });
            }
            match submission.kind {
                SubmitKind::Approve => {}
                SubmitKind::Action => {
                    let a = self.parse_action(submission.action.as_deref())?;
                    self.agent.accept_recommendation(prepared.s, Some(&prepared.case), a);
                    fresh = Some(a);
                }
                SubmitKind::Rule => {
                    if self.agent.kind() != AgentKind::Rdr {
                        return Err(SessionError::RulesUnsupported);
                    }
                    let a = self.parse_action(submission.action.as_deref())?;
                    let text = submission
                        .rule_text
                        .as_deref()
                        .ok_or_else(|| SessionError::BadSubmission("missing `rule_text`".into()))?;
                    let rule = parse_rule(text)?;
                    rule.validate(self.env.schema())?;
                    let at = prepared
                        .retained
                        .classification
                        .map(|c| c.insertion_node)
                        .expect("rule-based agents classify every case");
                    self.agent.accept_rule(at, rule, a, prepared.case.clone())?;
                    fresh = Some(a);
                }
                SubmitKind::Evaluate => {
                    let sign = submission
                        .sign
                        .filter(|s| *s != 0)
                        .ok_or_else(|| SessionError::BadSubmission("`sign` must be +1 or -1".into()))?;
                    if self.pending.is_none() {
                        return Err(SessionError::NothingToEvaluate);
                    }
                    evaluation = Some(sign.signum() as f64 * self.config.advice.eval_magnitude);
                }
            }
            if submission.kind != SubmitKind::Approve {
                self.interactions += 1;
            }
        }

        let prepared = self.prepared.take().expect("prepared above");
        self.flush(evaluation)?;
        let choice = match fresh {
            Some(action) => ActionChoice {
                action,
                source: ActionSource::FreshAdvice,
            },
            None => prepared.intended,
        };
        let outcome = self.env.step(choice.action, &mut self.rngs.env)?;
        let next = self.env.state_id()?;
        self.pending = Some(PendingUpdate {
            s: prepared.s,
            a: choice.action,
            reward: outcome.reward,
            next: (!outcome.terminal).then_some(next),
        });
        self.episode_step += 1;
        let episode = self.episode;
        let episode_done = outcome.terminal || self.episode_step >= self.env.max_steps();
        let mut q_snapshot = None;
        if episode_done {
            self.flush(None)?;
            self.agent.end_episode();
            self.episode += 1;
            self.needs_reset = true;
            if self.options.q_snapshots {
                let q = self.agent.q();
                q_snapshot = Some(q.values().chunks(q.actions()).map(<[f64]>::to_vec).collect());
            }
        }
        let update = StateUpdate {
            step: self.step,
            case: self.env.case(),
            reward: outcome.reward,
            episode,
            q_snapshot,
            action: self.env.actions().name(choice.action).to_string(),
            source: choice.source,
            terminal: outcome.terminal,
            episode_done,
            interactions: self.interactions,
        };
        self.step += 1;
        Ok(update)
    }

    /// Applies the held-back update, with a fresh evaluation or, for
    /// persistent evaluative agents, a replayed one.
    fn flush(&mut self, evaluation: Option<f64>) -> Result<(), SessionError> {
        let Some(p) = self.pending.take() else {
            return Ok(());
        };
        let mut reward = p.reward;
        match evaluation {
            Some(e) => {
                reward += e;
                self.agent.accept_evaluation(p.s, p.a, e);
            }
            None => {
                if let Some(e) = self.agent.replay_evaluation(p.s, p.a, &mut self.rngs.agent) {
                    reward += e;
                }
            }
        }
        self.agent.learn(p.s, p.a, reward, p.next)?;
        Ok(())
    }

    /// Prepares and resolves one step, answering any prompt with `reply`.
    pub fn advance(&mut self, reply: impl FnOnce(&Prompt) -> Resolution) -> Result<StateUpdate, SessionError> {
        let resolution = match self.prepare()? {
            Some(prompt) => reply(&prompt),
            None => Resolution::Ignore,
        };
        self.resolve(&resolution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ActionSpace;

    fn rdr_config() -> Config {
        let mut c = Config::default();
        c.agent.kind = AgentKind::Rdr;
        c.experiment.seed = 9;
        c
    }

    fn open(config: Config) -> Session {
        Session::new("t", config, SessionOptions::default()).unwrap()
    }

    #[test]
    fn first_prompt_has_no_cornerstone() {
        let mut s = open(rdr_config());
        let p = s.prepare().unwrap().unwrap();
        assert_eq!(p.step, 0);
        assert!(p.cornerstone.is_none() && p.diff.is_none());
        assert!(!p.can_evaluate);
        assert_eq!(s.prepare().unwrap().unwrap(), p);
    }

    #[test]
    fn rule_submission_matches_direct_insertion() {
        let mut s = open(rdr_config());
        let p = s.prepare().unwrap().unwrap();
        let case = p.case.clone();
        let u = s
            .resolve(&Resolution::Submit {
                submission: Submission::rule(0, "velocity >", "right"),
            })
            .unwrap_err();
        assert_eq!(u.code(), "parse_error");

        // The start state has zero velocity, so this rule is false on it.
        let err = s
            .resolve(&Resolution::Submit {
                submission: Submission::rule(0, "velocity > 0", "right"),
            })
            .unwrap_err();
        assert_eq!(err.code(), "rule_rejected");

        let u = s
            .resolve(&Resolution::Submit {
                submission: Submission::rule(0, "velocity >= 0", "right"),
            })
            .unwrap();
        assert_eq!(u.action, "right");
        assert_eq!(u.source, ActionSource::FreshAdvice);
        assert_eq!(s.interactions(), 1);

        let mut direct = Agent::new(AgentKind::Rdr, 400, 3, s.config().learning_params(), &s.config().ppr);
        let at = direct.retained(StateId(0), Some(&case)).unwrap().classification.unwrap().insertion_node;
        direct.accept_rule(at, parse_rule("velocity >= 0").unwrap(), ActionId(2), case).unwrap();
        let actions = ActionSpace::MOUNTAIN_CAR;
        assert_eq!(s.agent().advice_json(&actions), direct.advice_json(&actions));
    }

    #[test]
    fn stale_submissions_change_nothing() {
        let mut s = open(rdr_config());
        s.prepare().unwrap();
        let err = s
            .resolve(&Resolution::Submit {
                submission: Submission::action(3, "left"),
            })
            .unwrap_err();
        assert_eq!(err.code(), "stale_prompt");
        assert_eq!(s.step_index(), 0);
        assert_eq!(s.interactions(), 0);
        assert!(s.pending_prompt().is_some());
    }

    #[test]
    fn approve_and_ignore_are_equivalent() {
        let mut a = open(rdr_config());
        let mut b = open(rdr_config());
        for _ in 0..300 {
            let ua = a.advance(|p| Resolution::Submit { submission: Submission::approve(p.step) }).unwrap();
            let ub = b.advance(|_| Resolution::Ignore).unwrap();
            assert_eq!(ua, ub);
        }
        assert_eq!(a.agent().q(), b.agent().q());
    }

    #[test]
    fn evaluation_reaches_the_previous_update() {
        let mut c = Config::default();
        c.agent.kind = AgentKind::Pe;
        let mut s = open(c);
        let first = s.prepare().unwrap().unwrap();
        assert_eq!(
            s.resolve(&Resolution::Submit { submission: Submission::evaluate(0, 1) }).unwrap_err().code(),
            "nothing_to_evaluate"
        );
        let s0 = s.prepared.as_ref().unwrap().s;
        let u = s.resolve(&Resolution::Ignore).unwrap();
        let a = s.env.actions().parse(&u.action).unwrap();
        assert!(first.step == 0);
        let p = s.prepare().unwrap().unwrap();
        assert!(p.can_evaluate);
        s.resolve(&Resolution::Submit { submission: Submission::evaluate(1, 1) }).unwrap();
        // -1 step reward plus +1 evaluation, bootstrapping from an all-zero row.
        assert_eq!(s.agent().q().get(s0, a).unwrap(), 0.0);
        assert_eq!(s.agent().evaluations().recall(s0, a), Some(1.0));
    }

    #[test]
    fn every_n_policy_skips_prompts() {
        let options = SessionOptions {
            prompt: PromptPolicy::EveryN { n: 3 },
            ..SessionOptions::default()
        };
        let mut s = Session::new("t", rdr_config(), options).unwrap();
        let prompted: Vec<bool> = (0..6)
            .map(|_| {
                let p = s.prepare().unwrap().is_some();
                s.resolve(&Resolution::Ignore).unwrap();
                p
            })
            .collect();
        assert_eq!(prompted, [true, false, false, true, false, false]);
    }
}
