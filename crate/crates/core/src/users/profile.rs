//! Trainer profiles: how often and how well a simulated user advises, and
//! which part of the state space it knows about.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::advice::{parse_rule, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdviceKind {
    Evaluative,
    Informative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainerLevel {
    Optimistic,
    Realistic,
    Pessimistic,
}

impl TrainerLevel {
    pub fn letter(self) -> char {
        match self {
            TrainerLevel::Optimistic => 'O',
            TrainerLevel::Realistic => 'R',
            TrainerLevel::Pessimistic => 'P',
        }
    }
}

/// Probabilities in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reliability {
    pub accuracy: f64,
    pub availability: f64,
}

impl Reliability {
    pub const PERFECT: Reliability = Reliability {
        accuracy: 1.0,
        availability: 1.0,
    };

    /// Accuracy and availability measured for human trainers; the
    /// pessimistic rows halve the realistic ones.
    pub fn of(kind: AdviceKind, level: TrainerLevel) -> Self {
        let (accuracy, availability) = match (kind, level) {
            (_, TrainerLevel::Optimistic) => (1.0, 1.0),
            (AdviceKind::Evaluative, TrainerLevel::Realistic) => (0.484_70, 0.268_60),
            (AdviceKind::Evaluative, TrainerLevel::Pessimistic) => (0.242_35, 0.134_3),
            (AdviceKind::Informative, TrainerLevel::Realistic) => (0.948_70, 0.473_16),
            (AdviceKind::Informative, TrainerLevel::Pessimistic) => (0.474_35, 0.236_58),
        };
        Reliability {
            accuracy,
            availability,
        }
    }
}

/// Named knowledge limits for state-based trainers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Full,
    Half,
    Quarter,
    Middle,
    /// Exactly one side of the car blocked.
    Avoid,
}

impl Region {
    pub fn rule_text(self) -> &'static str {
        match self {
            Region::Full => "1==1",
            Region::Half => "position < -0.53",
            Region::Quarter => "position < -0.53 AND position > -0.865",
            Region::Middle => "position < -0.43 AND position > -0.63",
            Region::Avoid => {
                "right AND left == false AND left-front-close == false \
                 OR right-front-close AND left == false AND left-front-close == false \
                 OR left AND right == false AND right-front-close == false \
                 OR left-front-close AND right == false AND right-front-close == false"
            }
        }
    }

    pub fn rule(self) -> Rule {
        parse_rule(self.rule_text()).expect("built-in regions parse")
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Region::Full => "FULL",
            Region::Half => "HALF",
            Region::Quarter => "QUAR",
            Region::Middle => "MID",
            Region::Avoid => "AVOID",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::Case;

    #[test]
    fn profile_table_loads_exactly() {
        let r = Reliability::of(AdviceKind::Evaluative, TrainerLevel::Realistic);
        assert_eq!((r.accuracy, r.availability), (0.4847, 0.2686));
        let p = Reliability::of(AdviceKind::Informative, TrainerLevel::Pessimistic);
        assert_eq!((p.accuracy, p.availability), (0.47435, 0.23658));
        let o = Reliability::of(AdviceKind::Informative, TrainerLevel::Optimistic);
        assert_eq!(o, Reliability::PERFECT);
        for kind in [AdviceKind::Evaluative, AdviceKind::Informative] {
            let r = Reliability::of(kind, TrainerLevel::Realistic);
            let p = Reliability::of(kind, TrainerLevel::Pessimistic);
            assert!((p.accuracy - r.accuracy / 2.0).abs() < 1e-12);
            assert!((p.availability - r.availability / 2.0).abs() < 1e-4);
        }
    }

    #[test]
    fn regions_bound_position() {
        let at = |p: f64| Case::new().with("position", p).with("velocity", 0.0);
        assert!(Region::Half.rule().eval(&at(-0.6)).unwrap());
        assert!(!Region::Half.rule().eval(&at(-0.3)).unwrap());
        assert!(!Region::Quarter.rule().eval(&at(-0.9)).unwrap());
        assert!(Region::Middle.rule().eval(&at(-0.5)).unwrap());
        assert!(Region::Full.rule().is_always());
    }

    #[test]
    fn avoid_region_excludes_both_sides_blocked() {
        let case = |left: bool, right: bool| {
            Case::new()
                .with("left", left)
                .with("right", right)
                .with("left-front-close", false)
                .with("right-front-close", false)
        };
        let rule = Region::Avoid.rule();
        assert!(rule.eval(&case(true, false)).unwrap());
        assert!(rule.eval(&case(false, true)).unwrap());
        assert!(!rule.eval(&case(true, true)).unwrap());
        assert!(!rule.eval(&case(false, false)).unwrap());
    }
}
