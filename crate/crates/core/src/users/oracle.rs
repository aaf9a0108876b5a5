//! Reference policies the simulated trainers draw their advice from.

use serde::{Deserialize, Serialize};

use crate::advice::RuleError;
use crate::case::{Case, FeatureValue};
use crate::env::driving::SdcAction;
use crate::env::mountain_car::McAction;
use crate::env::{ActionId, EnvKind};

fn real(case: &Case, name: &str) -> Result<f64, RuleError> {
    match case.get(name) {
        Some(FeatureValue::Real(v)) => Ok(v),
        _ => Err(RuleError::MissingFeature(name.to_string())),
    }
}

fn flag(case: &Case, name: &str) -> Result<bool, RuleError> {
    match case.get(name) {
        Some(FeatureValue::Bool(b)) => Ok(b),
        _ => Err(RuleError::MissingFeature(name.to_string())),
    }
}

/// Energy pumping: push in the direction of travel, left when at rest.
pub fn optimal_mc_action(case: &Case) -> Result<ActionId, RuleError> {
    Ok(if real(case, "velocity")? > 0.0 {
        McAction::Right.id()
    } else {
        McAction::Left.id()
    })
}

/// Steer away from whichever side is blocked; no opinion otherwise.
pub fn sdc_avoid_action(case: &Case) -> Result<Option<ActionId>, RuleError> {
    if flag(case, "right")? || flag(case, "right-front-close")? {
        Ok(Some(SdcAction::TurnLeft.id()))
    } else if flag(case, "left")? || flag(case, "left-front-close")? {
        Ok(Some(SdcAction::TurnRight.id()))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Oracle {
    MountainCar,
    DrivingAvoid,
}

impl Oracle {
    pub fn for_env(kind: EnvKind) -> Self {
        match kind {
            EnvKind::MountainCar => Oracle::MountainCar,
            EnvKind::SelfDrivingCar => Oracle::DrivingAvoid,
        }
    }

    pub fn action(self, case: &Case) -> Result<Option<ActionId>, RuleError> {
        match self {
            Oracle::MountainCar => optimal_mc_action(case).map(Some),
            Oracle::DrivingAvoid => sdc_avoid_action(case),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::driving::{SdcObservation, SENSOR_NAMES};
    use crate::env::driving;

    #[test]
    fn mountain_car_follows_the_sign_of_velocity() {
        let at = |v: f64| optimal_mc_action(&Case::new().with("velocity", v)).unwrap();
        assert_eq!(at(0.03), McAction::Right.id());
        assert_eq!(at(-0.03), McAction::Left.id());
        assert_eq!(at(0.0), McAction::Left.id());
    }

    fn sdc_case(on: &[&str]) -> Case {
        let mut sensors = [false; 8];
        for name in on {
            sensors[SENSOR_NAMES.iter().position(|n| n == name).unwrap()] = true;
        }
        SdcObservation::new(sensors, 2.0).unwrap().case(&driving::schema())
    }

    #[test]
    fn driving_avoids_the_blocked_side() {
        assert_eq!(sdc_avoid_action(&sdc_case(&["right"])).unwrap(), Some(SdcAction::TurnLeft.id()));
        assert_eq!(
            sdc_avoid_action(&sdc_case(&["left-front-close"])).unwrap(),
            Some(SdcAction::TurnRight.id())
        );
        assert_eq!(sdc_avoid_action(&sdc_case(&[])).unwrap(), None);
        assert_eq!(sdc_avoid_action(&sdc_case(&["front-far"])).unwrap(), None);
    }
}
