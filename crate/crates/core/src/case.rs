//! Observations as named features.
//!
//! A [`Case`] is what a trainer (and the rule tree) sees of a state: an ordered
//! list of `name → value` pairs. Feature order follows the environment's
//! [`Schema`], which keeps diffs and printed cases stable.

use std::fmt;
use std::sync::Arc;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue {
    Bool(bool),
    Real(f64),
}

impl FeatureValue {
    pub fn kind(&self) -> FeatureKind {
        match self {
            FeatureValue::Bool(_) => FeatureKind::Bool,
            FeatureValue::Real(_) => FeatureKind::Real,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match *self {
            FeatureValue::Real(v) => Some(v),
            FeatureValue::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            FeatureValue::Bool(b) => Some(b),
            FeatureValue::Real(_) => None,
        }
    }
}

impl From<bool> for FeatureValue {
    fn from(b: bool) -> Self {
        FeatureValue::Bool(b)
    }
}

impl From<f64> for FeatureValue {
    fn from(v: f64) -> Self {
        FeatureValue::Real(v)
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Bool(b) => write!(f, "{b}"),
            FeatureValue::Real(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for FeatureValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            FeatureValue::Bool(b) => serializer.serialize_bool(b),
            FeatureValue::Real(v) => serializer.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for FeatureValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;

        impl Visitor<'_> for ValueVisitor {
            type Value = FeatureValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a boolean or a finite number")
            }

            fn visit_bool<E: serde::de::Error>(self, v: bool) -> Result<FeatureValue, E> {
                Ok(FeatureValue::Bool(v))
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<FeatureValue, E> {
                if v.is_finite() {
                    Ok(FeatureValue::Real(v))
                } else {
                    Err(E::custom("feature values must be finite"))
                }
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<FeatureValue, E> {
                Ok(FeatureValue::Real(v as f64))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<FeatureValue, E> {
                Ok(FeatureValue::Real(v as f64))
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Bool,
    Real,
}

/// Ordered feature names and kinds of one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    names: Vec<Arc<str>>,
    kinds: Vec<FeatureKind>,
}

impl Schema {
    pub fn new(features: &[(&str, FeatureKind)]) -> Self {
        Schema {
            names: features.iter().map(|(n, _)| Arc::from(*n)).collect(),
            kinds: features.iter().map(|(_, k)| *k).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| &**n == name)
    }

    pub fn kind(&self, name: &str) -> Option<FeatureKind> {
        self.position(name).map(|i| self.kinds[i])
    }

    pub fn features(&self) -> impl Iterator<Item = (&str, FeatureKind)> {
        self.names.iter().map(|n| &**n).zip(self.kinds.iter().copied())
    }

    /// Builds a case from values given in schema order.
    pub fn case<I>(&self, values: I) -> Case
    where
        I: IntoIterator<Item = FeatureValue>,
    {
        let features: Vec<_> = self.names.iter().cloned().zip(values).collect();
        debug_assert_eq!(features.len(), self.names.len());
        Case { features }
    }
}

/// A state as seen by a trainer: named feature values in a fixed order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Case {
    features: Vec<(Arc<str>, FeatureValue)>,
}

impl Case {
    pub fn new() -> Self {
        Case::default()
    }

    /// Builder-style insert, mostly for tests and hand-built cases.
    pub fn with(mut self, name: &str, value: impl Into<FeatureValue>) -> Self {
        self.insert(name, value.into());
        self
    }

    /// Sets a feature, replacing an existing value in place.
    pub fn insert(&mut self, name: &str, value: FeatureValue) {
        debug_assert!(value.as_real().is_none_or(f64::is_finite));
        match self.features.iter_mut().find(|(n, _)| &**n == name) {
            Some(slot) => slot.1 = value,
            None => self.features.push((Arc::from(name), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<FeatureValue> {
        self.features
            .iter()
            .find(|(n, _)| &**n == name)
            .map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, FeatureValue)> {
        self.features.iter().map(|(n, v)| (&**n, *v))
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (name, value)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}: {value}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Case {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.features.len()))?;
        for (name, value) in self.iter() {
            map.serialize_entry(name, &value)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Case {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CaseVisitor;

        impl<'de> Visitor<'de> for CaseVisitor {
            type Value = Case;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map of feature names to values")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Case, A::Error> {
                let mut case = Case::new();
                while let Some((name, value)) = access.next_entry::<String, FeatureValue>()? {
                    if case.get(&name).is_some() {
                        return Err(serde::de::Error::custom(format!(
                            "duplicate feature `{name}`"
                        )));
                    }
                    case.insert(&name, value);
                }
                Ok(case)
            }
        }

        deserializer.deserialize_map(CaseVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keeps_feature_order() {
        let case = Case::new().with("velocity", 0.01).with("position", -0.5);
        let text = serde_json::to_string(&case).unwrap();
        assert_eq!(text, r#"{"velocity":0.01,"position":-0.5}"#);
        let back: Case = serde_json::from_str(&text).unwrap();
        assert_eq!(back, case);
    }

    #[test]
    fn integers_and_booleans_deserialize() {
        let case: Case = serde_json::from_str(r#"{"left":true,"velocity":2}"#).unwrap();
        assert_eq!(case.get("left"), Some(FeatureValue::Bool(true)));
        assert_eq!(case.get("velocity"), Some(FeatureValue::Real(2.0)));
    }

    #[test]
    fn duplicate_features_are_rejected() {
        assert!(serde_json::from_str::<Case>(r#"{"a":1,"a":2}"#).is_err());
    }

    #[test]
    fn insert_replaces_in_place() {
        let mut case = Case::new().with("a", 1.0).with("b", true);
        case.insert("a", FeatureValue::Real(2.0));
        assert_eq!(case.iter().map(|(n, _)| n).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(case.get("a"), Some(FeatureValue::Real(2.0)));
    }
}
