//! Recursive-descent parser for the rule language.
//!
//! ```text
//! expr := conj ("OR" conj)*
//! conj := pred ("AND" pred)*
//! pred := IDENT CMP literal | IDENT
//! ```
//!
//! Keywords are case-insensitive; `=` is accepted for `==`. A rule that is a
//! single true comparison between numbers (the `1==1` idiom) parses as
//! [`Rule::Always`].

use std::fmt;

use thiserror::Error;

use super::rule::{Comparator, Literal, Predicate, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {}: {message}", .position + 1)]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Bool(bool),
    And,
    Or,
    Cmp(Comparator),
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Number(v) => write!(f, "number {v}"),
            Token::Bool(b) => write!(f, "`{b}`"),
            Token::And => f.write_str("AND"),
            Token::Or => f.write_str("OR"),
            Token::Cmp(c) => write!(f, "`{c}`"),
            Token::End => f.write_str("end of input"),
        }
    }
}

fn error(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'-')
            {
                i += 1;
            }
            let word = &text[start..i];
            let token = match word.to_ascii_lowercase().as_str() {
                "and" => Token::And,
                "or" => Token::Or,
                "true" => Token::Bool(true),
                "false" => Token::Bool(false),
                _ => Token::Ident(word.to_string()),
            };
            tokens.push((start, token));
            continue;
        }
        let signed = (c == b'-' || c == b'+')
            && bytes
                .get(i + 1)
                .is_some_and(|&n| n.is_ascii_digit() || n == b'.');
        if c.is_ascii_digit() || c == b'.' || signed {
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'-' || bytes[j] == b'+') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let literal = &text[start..i];
            let value: f64 = literal
                .parse()
                .map_err(|_| error(start, format!("malformed number `{literal}`")))?;
            if !value.is_finite() {
                return Err(error(start, format!("number `{literal}` is out of range")));
            }
            tokens.push((start, Token::Number(value)));
            continue;
        }
        let next = bytes.get(i + 1).copied();
        let (cmp, len) = match (c, next) {
            (b'<', Some(b'=')) => (Comparator::Le, 2),
            (b'>', Some(b'=')) => (Comparator::Ge, 2),
            (b'=', Some(b'=')) => (Comparator::Eq, 2),
            (b'!', Some(b'=')) => (Comparator::Ne, 2),
            (b'<', _) => (Comparator::Lt, 1),
            (b'>', _) => (Comparator::Gt, 1),
            (b'=', _) => (Comparator::Eq, 1),
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(error(start, format!("unexpected character `{ch}`")));
            }
        };
        i += len;
        tokens.push((start, Token::Cmp(cmp)));
    }
    tokens.push((text.len(), Token::End));
    Ok(tokens)
}

enum Atom {
    Predicate(Predicate),
    Constant(bool),
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn advance(&mut self) -> (usize, Token) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Vec<Vec<(usize, Atom)>>, ParseError> {
        let mut groups = vec![self.conj()?];
        while *self.peek() == Token::Or {
            self.advance();
            groups.push(self.conj()?);
        }
        Ok(groups)
    }

    fn conj(&mut self) -> Result<Vec<(usize, Atom)>, ParseError> {
        let mut atoms = vec![self.pred()?];
        while *self.peek() == Token::And {
            self.advance();
            atoms.push(self.pred()?);
        }
        Ok(atoms)
    }

    fn comparator(&mut self) -> Option<Comparator> {
        match self.peek() {
            Token::Cmp(c) => {
                let c = *c;
                self.advance();
                Some(c)
            }
            _ => None,
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let (at, token) = self.advance();
        match token {
            Token::Number(v) => Ok(Literal::Real(v)),
            Token::Bool(b) => Ok(Literal::Bool(b)),
            other => Err(error(at, format!("expected a number, `true` or `false`, found {other}"))),
        }
    }

    fn pred(&mut self) -> Result<(usize, Atom), ParseError> {
        let (at, token) = self.advance();
        match token {
            Token::Ident(feature) => {
                let atom = match self.comparator() {
                    Some(cmp) => Predicate::new(&feature, cmp, self.literal()?),
                    None => Predicate::flag(&feature),
                };
                Ok((at, Atom::Predicate(atom)))
            }
            Token::Number(lhs) => {
                let cmp = self
                    .comparator()
                    .ok_or_else(|| error(self.offset(), format!("expected a comparator, found {}", self.peek())))?;
                let (rhs_at, rhs) = self.advance();
                let Token::Number(rhs) = rhs else {
                    return Err(error(rhs_at, format!("expected a number, found {rhs}")));
                };
                Ok((at, Atom::Constant(cmp.holds(lhs, rhs))))
            }
            other => Err(error(at, format!("expected a feature name, found {other}"))),
        }
    }
}

pub fn parse_rule(text: &str) -> Result<Rule, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.len() == 1 {
        return Err(error(0, "empty rule"));
    }
    let mut parser = Parser { tokens, pos: 0 };
    let groups = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(error(
            parser.offset(),
            format!("expected AND, OR or end of input, found {}", parser.peek()),
        ));
    }
    let single = groups.len() == 1 && groups[0].len() == 1;
    let mut out = Vec::with_capacity(groups.len());
    for group in groups {
        let mut preds = Vec::with_capacity(group.len());
        for (at, atom) in group {
            match atom {
                Atom::Predicate(p) => preds.push(p),
                Atom::Constant(true) if single => return Ok(Rule::Always),
                Atom::Constant(false) if single => {
                    return Err(error(at, "rule can never be true"));
                }
                Atom::Constant(_) => {
                    return Err(error(at, "a constant comparison must be the whole rule"));
                }
            }
        }
        out.push(preds);
    }
    Ok(Rule::AnyOf(out))
}

impl std::str::FromStr for Rule {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rule(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::Case;

    #[test]
    fn conjunction_of_position_bounds() {
        let rule = parse_rule("position < -0.53 AND position > -0.865").unwrap();
        assert_eq!(
            rule,
            Rule::all(vec![
                Predicate::new("position", Comparator::Lt, Literal::Real(-0.53)),
                Predicate::new("position", Comparator::Gt, Literal::Real(-0.865)),
            ])
        );
    }

    #[test]
    fn disjunction_of_hyphenated_flags() {
        let rule = parse_rule("right OR right-front-close").unwrap();
        assert_eq!(
            rule,
            Rule::AnyOf(vec![
                vec![Predicate::flag("right")],
                vec![Predicate::flag("right-front-close")],
            ])
        );
    }

    #[test]
    fn tautology_is_always() {
        assert_eq!(parse_rule("1==1").unwrap(), Rule::Always);
        assert_eq!(parse_rule(" 1 == 1 ").unwrap(), Rule::Always);
        assert!(parse_rule("1==2").is_err());
        assert!(parse_rule("1==1 AND left").is_err());
    }

    #[test]
    fn keywords_ignore_case_and_spacing() {
        let rule = parse_rule("velocity <=0 and left==TRUE or Right").unwrap();
        assert_eq!(rule.to_string(), "velocity <= 0 AND left OR Right");
        let eq = parse_rule("left = false").unwrap();
        assert_eq!(eq, Rule::single(Predicate::new("left", Comparator::Eq, Literal::Bool(false))));
    }

    #[test]
    fn compact_comparisons() {
        let rule = parse_rule("position<-0.53").unwrap();
        assert!(rule.eval(&Case::new().with("position", -0.6)).unwrap());
        let rule = parse_rule("velocity>=1e-3").unwrap();
        assert!(rule.eval(&Case::new().with("velocity", 0.001)).unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_rule("velocity >").unwrap_err();
        assert_eq!(e.position, 10);
        let e = parse_rule("velocity > 0 position < 1").unwrap_err();
        assert_eq!(e.position, 13);
        let e = parse_rule("left AND").unwrap_err();
        assert_eq!(e.position, 8);
        let e = parse_rule("a # b").unwrap_err();
        assert_eq!(e.position, 2);
        assert!(parse_rule("").is_err());
        assert!(parse_rule("   ").is_err());
        assert!(parse_rule("OR left").is_err());
    }
}
