//! Named agent/trainer pairings.
//!
//! The thirteen-entry suite crosses unassisted learning with evaluative and
//! informative agents, each persistent or not, under optimistic, realistic
//! and pessimistic trainers. Further names cover the policy-reuse ablation,
//! knowledge-limited state trainers, rule trainers and the driving task.

use super::agent::AgentKind;
use super::config::{Config, UserKind};
use crate::env::EnvKind;
use crate::rl::PprConfig;
use crate::users::{KnowledgeBase, Region, TrainerLevel};

pub const SUITE: [&str; 13] = [
    "UQL", "NPE-O", "NPE-R", "NPE-P", "NPI-O", "NPI-R", "NPI-P", "PE-O", "PE-R", "PE-P", "PI-O",
    "PI-R", "PI-P",
];

pub const EXTRA: [&str; 12] = [
    "PI-R-NOPPR",
    "MCP-FULL",
    "MCP-HALF",
    "MCP-QUAR",
    "MCP-MID",
    "MCRDR-FULL",
    "MCRDR-HALF",
    "MCRDR-QUAR",
    "MCRDR-MID",
    "SC-UQL",
    "SCP-AVOID",
    "SCRDR-AVOID",
];

/// Expands `all`, `rules`, `driving` or a comma-separated list into names.
pub fn expand(selection: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for item in selection.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.to_ascii_lowercase().as_str() {
            "all" => out.extend(SUITE.iter().map(|s| s.to_string())),
            "rules" => out.extend(
                ["MCP-FULL", "MCP-HALF", "MCP-QUAR", "MCP-MID", "MCRDR-FULL", "MCRDR-HALF", "MCRDR-QUAR", "MCRDR-MID"]
                    .iter()
                    .map(|s| s.to_string()),
            ),
            "driving" => out.extend(["SC-UQL", "SCP-AVOID", "SCRDR-AVOID"].iter().map(|s| s.to_string())),
            _ => {
                apply(item, &Config::default())?;
                out.push(item.to_ascii_uppercase());
            }
        }
    }
    if out.is_empty() {
        return Err("no combination selected".into());
    }
    Ok(out)
}

fn level(letter: &str) -> Option<TrainerLevel> {
    match letter {
        "O" => Some(TrainerLevel::Optimistic),
        "R" => Some(TrainerLevel::Realistic),
        "P" => Some(TrainerLevel::Pessimistic),
        _ => None,
    }
}

fn region(name: &str) -> Option<Region> {
    match name {
        "FULL" => Some(Region::Full),
        "HALF" => Some(Region::Half),
        "QUAR" | "QUARTER" => Some(Region::Quarter),
        "MID" | "MIDDLE" => Some(Region::Middle),
        _ => None,
    }
}

fn knowledge_base(region: Region) -> KnowledgeBase {
    match region {
        Region::Full => KnowledgeBase::McFull,
        Region::Half => KnowledgeBase::McHalf,
        Region::Quarter => KnowledgeBase::McQuarter,
        Region::Middle => KnowledgeBase::McMiddle,
        Region::Avoid => KnowledgeBase::ScAvoid,
    }
}

/// Returns `base` with the agent, trainer and task set for `name`. Run
/// counts, seeds, map and step caps are kept from `base`.
pub fn apply(name: &str, base: &Config) -> Result<Config, String> {
    let upper = name.trim().to_ascii_uppercase();
    let mut c = base.clone();
    c.user.accuracy = None;
    c.user.availability = None;
    c.user.level = None;
    c.user.region = Region::Full;
    c.user.knowledge_base = None;
    c.user.knowledge_base_file = None;
    let unknown = || format!("unknown combination `{name}`");

    let mut set = |env: EnvKind, agent: AgentKind, user: UserKind| {
        c.env.kind = env;
        c.agent.kind = agent;
        c.user.kind = user;
    };
    let parts: Vec<&str> = upper.split('-').collect();
    match parts.as_slice() {
        ["UQL"] => set(EnvKind::MountainCar, AgentKind::Uql, UserKind::None),
        ["SC", "UQL"] => set(EnvKind::SelfDrivingCar, AgentKind::Uql, UserKind::None),
        ["SCP", "AVOID"] => {
            set(EnvKind::SelfDrivingCar, AgentKind::Pi, UserKind::Informative);
            c.user.region = Region::Avoid;
        }
        ["SCRDR", "AVOID"] => {
            set(EnvKind::SelfDrivingCar, AgentKind::Rdr, UserKind::Rule);
            c.user.knowledge_base = Some(KnowledgeBase::ScAvoid);
        }
        ["MCP", r] => {
            let r = region(r).ok_or_else(unknown)?;
            set(EnvKind::MountainCar, AgentKind::Pi, UserKind::Informative);
            c.user.region = r;
        }
        ["MCRDR", r] => {
            let r = region(r).ok_or_else(unknown)?;
            set(EnvKind::MountainCar, AgentKind::Rdr, UserKind::Rule);
            c.user.knowledge_base = Some(knowledge_base(r));
        }
        [agent, l] | [agent, l, "NOPPR"] => {
            let lvl = level(l).ok_or_else(unknown)?;
            let (kind, user) = match *agent {
                "NPE" => (AgentKind::Npe, UserKind::Evaluative),
                "NPI" => (AgentKind::Npi, UserKind::Informative),
                "PE" => (AgentKind::Pe, UserKind::Evaluative),
                "PI" => (AgentKind::Pi, UserKind::Informative),
                _ => return Err(unknown()),
            };
            set(EnvKind::MountainCar, kind, user);
            c.user.level = Some(lvl);
            if parts.len() == 3 {
                if !kind.persistent() {
                    return Err(format!("`{name}`: only persistent agents reuse advice"));
                }
                c.ppr = PprConfig::always_follow();
            }
        }
        _ => return Err(unknown()),
    }
    Ok(c)
}
