use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case::{Case, FeatureValue};

const REAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cases have different features: {0}")]
pub struct SchemaMismatch(pub String);

/// One feature that differs between the current state and a cornerstone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDiff {
    pub feature: String,
    pub current: FeatureValue,
    pub cornerstone: FeatureValue,
}

/// Features whose values differ, in the order of `current`. Reals closer
/// than 1e-9 count as equal.
pub fn case_diff(current: &Case, cornerstone: &Case) -> Result<Vec<FeatureDiff>, SchemaMismatch> {
    if current.len() != cornerstone.len() {
        return Err(SchemaMismatch(format!(
            "{} features vs {}",
            current.len(),
            cornerstone.len()
        )));
    }
    let mut out = Vec::new();
    for (name, value) in current.iter() {
        let other = cornerstone
            .get(name)
            .ok_or_else(|| SchemaMismatch(format!("cornerstone lacks `{name}`")))?;
        let same = match (value, other) {
            (FeatureValue::Real(a), FeatureValue::Real(b)) => (a - b).abs() <= REAL_TOLERANCE,
            (FeatureValue::Bool(a), FeatureValue::Bool(b)) => a == b,
            _ => return Err(SchemaMismatch(format!("`{name}` changes type"))),
        };
        if !same {
            out.push(FeatureDiff {
                feature: name.to_string(),
                current: value,
                cornerstone: other,
            });
        }
    }
    Ok(out)
}
