//! Predicates and rules over cases.

use std::fmt;

use thiserror::Error;

use crate::case::{Case, FeatureKind, FeatureValue, Schema};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("case has no feature `{0}`")]
    MissingFeature(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("`{feature}` is {kind} and cannot be compared with `{cmp} {literal}`")]
    TypeMismatch {
        feature: String,
        kind: &'static str,
        cmp: Comparator,
        literal: Literal,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "==",
            Comparator::Ne => "!=",
        }
    }

    fn is_equality(self) -> bool {
        matches!(self, Comparator::Eq | Comparator::Ne)
    }

    pub(crate) fn holds<T: PartialOrd>(self, lhs: T, rhs: T) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ne => lhs != rhs,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Literal {
    Bool(bool),
    Real(f64),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Real(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub feature: String,
    pub cmp: Comparator,
    pub literal: Literal,
}

impl Predicate {
    pub fn new(feature: &str, cmp: Comparator, literal: Literal) -> Self {
        Predicate {
            feature: feature.to_string(),
            cmp,
            literal,
        }
    }

    /// Bare boolean feature, `feature == true`.
    pub fn flag(feature: &str) -> Self {
        Predicate::new(feature, Comparator::Eq, Literal::Bool(true))
    }

    fn mismatch(&self, kind: &'static str) -> RuleError {
        RuleError::TypeMismatch {
            feature: self.feature.clone(),
            kind,
            cmp: self.cmp,
            literal: self.literal,
        }
    }

    pub fn eval(&self, case: &Case) -> Result<bool, RuleError> {
        let value = case
            .get(&self.feature)
            .ok_or_else(|| RuleError::MissingFeature(self.feature.clone()))?;
        match (value, self.literal) {
            (FeatureValue::Real(v), Literal::Real(l)) => Ok(self.cmp.holds(v, l)),
            (FeatureValue::Bool(v), Literal::Bool(l)) if self.cmp.is_equality() => {
                Ok(self.cmp.holds(v, l))
            }
            (FeatureValue::Bool(_), _) => Err(self.mismatch("boolean")),
            (FeatureValue::Real(_), _) => Err(self.mismatch("real")),
        }
    }

    pub fn validate(&self, schema: &Schema) -> Result<(), RuleError> {
        match (schema.kind(&self.feature), self.literal) {
            (None, _) => Err(RuleError::UnknownFeature(self.feature.clone())),
            (Some(FeatureKind::Real), Literal::Real(_)) => Ok(()),
            (Some(FeatureKind::Bool), Literal::Bool(_)) if self.cmp.is_equality() => Ok(()),
            (Some(FeatureKind::Bool), _) => Err(self.mismatch("boolean")),
            (Some(FeatureKind::Real), _) => Err(self.mismatch("real")),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.cmp, self.literal) {
            (Comparator::Eq, Literal::Bool(true)) => f.write_str(&self.feature),
            _ => write!(f, "{} {} {}", self.feature, self.cmp, self.literal),
        }
    }
}

/// Either the tautology or a disjunction of conjunctions.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Always,
    AnyOf(Vec<Vec<Predicate>>),
}

impl Rule {
    pub fn all(predicates: Vec<Predicate>) -> Self {
        Rule::AnyOf(vec![predicates])
    }

    pub fn single(predicate: Predicate) -> Self {
        Rule::AnyOf(vec![vec![predicate]])
    }

    pub fn is_always(&self) -> bool {
        matches!(self, Rule::Always)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &Predicate> {
        let groups: &[Vec<Predicate>] = match self {
            Rule::Always => &[],
            Rule::AnyOf(groups) => groups,
        };
        groups.iter().flatten()
    }

    /// Every predicate is evaluated, so a missing feature is reported even
    /// when an earlier branch already decided the result.
    pub fn eval(&self, case: &Case) -> Result<bool, RuleError> {
        match self {
            Rule::Always => Ok(true),
            Rule::AnyOf(groups) => {
                let mut any = false;
                for group in groups {
                    let mut all = true;
                    for p in group {
                        all &= p.eval(case)?;
                    }
                    any |= all;
                }
                Ok(any)
            }
        }
    }

    pub fn validate(&self, schema: &Schema) -> Result<(), RuleError> {
        self.predicates().try_for_each(|p| p.validate(schema))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Always => f.write_str("1==1"),
            Rule::AnyOf(groups) => {
                for (i, group) in groups.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" OR ")?;
                    }
                    for (j, p) in group.iter().enumerate() {
                        if j > 0 {
                            f.write_str(" AND ")?;
                        }
                        write!(f, "{p}")?;
                    }
                }
                Ok(())
            }
        }
    }
}
