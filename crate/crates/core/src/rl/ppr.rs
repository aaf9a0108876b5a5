//! Probabilistic policy reuse: how likely retained advice is to be followed.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayKind {
    /// `p ← p − decay`
    Subtractive,
    /// `p ← p · (1 − decay)`
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PprMode {
    /// Reuse with a probability that decays every episode.
    Reuse,
    /// Always follow retained advice (the no-PPR ablation).
    AlwaysFollow,
}

/// The `ppr` section of a configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PprConfig {
    pub mode: PprMode,
    pub p_reuse: f64,
    pub decay: f64,
    pub decay_kind: DecayKind,
    pub floor: f64,
}

impl Default for PprConfig {
    fn default() -> Self {
        PprConfig {
            mode: PprMode::Reuse,
            p_reuse: 0.8,
            decay: 0.05,
            decay_kind: DecayKind::Subtractive,
            floor: 0.0,
        }
    }
}

impl PprConfig {
    pub fn always_follow() -> Self {
        PprConfig {
            mode: PprMode::AlwaysFollow,
            ..PprConfig::default()
        }
    }

    pub fn initial_state(&self) -> PprState {
        match self.mode {
            PprMode::Reuse => PprState {
                p_reuse: self.p_reuse.max(self.floor),
                decay: self.decay,
                kind: self.decay_kind,
                floor: self.floor,
            },
            PprMode::AlwaysFollow => PprState {
                p_reuse: 1.0,
                decay: 0.0,
                kind: DecayKind::Subtractive,
                floor: 0.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PprState {
    pub p_reuse: f64,
    pub decay: f64,
    pub kind: DecayKind,
    pub floor: f64,
}

impl PprState {
    /// Called once at every episode boundary.
    pub fn decay(&mut self) {
        let next = match self.kind {
            DecayKind::Subtractive => self.p_reuse - self.decay,
            DecayKind::Multiplicative => self.p_reuse * (1.0 - self.decay),
        };
        self.p_reuse = next.max(self.floor);
    }

    /// Rolls whether retained advice is reused on this step. Draws nothing
    /// when the outcome is certain.
    pub fn roll<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        if self.p_reuse >= 1.0 {
            true
        } else if self.p_reuse <= 0.0 {
            false
        } else {
            rng.random::<f64>() < self.p_reuse
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtractive_decay_reaches_zero_after_sixteen_episodes() {
        let mut ppr = PprConfig::default().initial_state();
        ppr.decay();
        assert!((ppr.p_reuse - 0.75).abs() < 1e-12);
        for _ in 1..16 {
            ppr.decay();
        }
        assert!(ppr.p_reuse.abs() < 1e-12, "{}", ppr.p_reuse);
        // Floating-point residue lands on the floor, not below it.
        ppr.decay();
        assert_eq!(ppr.p_reuse, 0.0);
    }

    #[test]
    fn zero_decay_is_constant() {
        let mut ppr = PprConfig { decay: 0.0, ..PprConfig::default() }.initial_state();
        for _ in 0..50 {
            ppr.decay();
        }
        assert_eq!(ppr.p_reuse, 0.8);
    }

    #[test]
    fn multiplicative_decay() {
        let mut ppr = PprConfig {
            decay_kind: DecayKind::Multiplicative,
            ..PprConfig::default()
        }
        .initial_state();
        ppr.decay();
        assert!((ppr.p_reuse - 0.76).abs() < 1e-12);
    }

    #[test]
    fn always_follow_never_decays() {
        let mut ppr = PprConfig::always_follow().initial_state();
        for _ in 0..100 {
            ppr.decay();
        }
        assert_eq!(ppr.p_reuse, 1.0);
    }
}
