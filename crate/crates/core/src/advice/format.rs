//! Text and JSON forms of rule trees.
//!
//! The text form lists one node per line as `IF <rule>: <CONCLUSION>`.
//! Children sit one indent level deeper, true child first, false child
//! second, with `NO TRUE NODE` / `NO FALSE NODE` standing in for an empty
//! slot:
//!
//! ```text
//! IF 1==1: EXPLORE
//!     IF velocity > 0: GO RIGHT
//!         NO TRUE NODE
//!         IF velocity <= 0: GO LEFT
//!     NO FALSE NODE
//! ```
//!
//! The reader also accepts a missing colon and a node wrapped over several
//! lines, as long as the conclusion closes it. Cornerstones only survive the
//! JSON form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::parser::parse_rule;
use super::rdr::{Conclusion, NodeId, RdrError, RdrTree};
use super::rule::Rule;
use crate::case::Case;
use crate::env::ActionSpace;

const EXPLORE: &str = "EXPLORE";
const NO_TRUE: &str = "NO TRUE NODE";
const NO_FALSE: &str = "NO FALSE NODE";
const INDENT: &str = "    ";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeFormatError {
    #[error("line {line}: {message}")]
    Text { line: usize, message: String },
    #[error("invalid tree document: {0}")]
    Json(String),
}

fn text_error(line: usize, message: impl Into<String>) -> TreeFormatError {
    TreeFormatError::Text {
        line,
        message: message.into(),
    }
}

pub fn conclusion_label(conclusion: Conclusion, actions: &ActionSpace) -> &'static str {
    match conclusion {
        Conclusion::Explore => EXPLORE,
        Conclusion::Recommend(a) => actions.label(a),
    }
}

pub fn parse_conclusion(text: &str, actions: &ActionSpace) -> Option<Conclusion> {
    if text.trim().eq_ignore_ascii_case(EXPLORE) {
        return Some(Conclusion::Explore);
    }
    actions.parse(text).map(Conclusion::Recommend)
}

pub fn to_text(tree: &RdrTree, actions: &ActionSpace) -> String {
    let mut out = String::new();
    write_node(tree, NodeId::ROOT, 0, actions, &mut out);
    out
}

fn write_node(tree: &RdrTree, id: NodeId, level: usize, actions: &ActionSpace, out: &mut String) {
    let node = tree.node(id).expect("ids come from the tree");
    out.push_str(&INDENT.repeat(level));
    out.push_str(&format!(
        "IF {}: {}\n",
        node.rule,
        conclusion_label(node.conclusion, actions)
    ));
    if node.true_child.is_none() && node.false_child.is_none() {
        return;
    }
    for (child, placeholder) in [(node.true_child, NO_TRUE), (node.false_child, NO_FALSE)] {
        match child {
            Some(c) => write_node(tree, c, level + 1, actions, out),
            None => {
                out.push_str(&INDENT.repeat(level + 1));
                out.push_str(placeholder);
                out.push('\n');
            }
        }
    }
}

#[derive(Debug)]
enum Item {
    Node { rule: Rule, conclusion: Conclusion },
    Empty,
}

struct Entry {
    line: usize,
    width: usize,
    item: Item,
}

/// Splits `IF <rule>[:] <CONCLUSION>` into its parts, if the conclusion is
/// present at the end.
fn split_conclusion(body: &str, actions: &ActionSpace) -> Option<(String, Conclusion)> {
    let upper = body.trim_end().to_ascii_uppercase();
    let mut labels: Vec<&str> = actions.labels().to_vec();
    labels.push(EXPLORE);
    labels.sort_by_key(|l| std::cmp::Reverse(l.len()));
    for label in labels {
        let Some(head) = upper.strip_suffix(label) else {
            continue;
        };
        if !head.is_empty() && !head.ends_with(|c: char| c.is_whitespace() || c == ':') {
            continue;
        }
        let rule = body.trim_end()[..head.len()].trim_end().trim_end_matches(':').trim();
        let conclusion = parse_conclusion(label, actions)?;
        return Some((rule.to_string(), conclusion));
    }
    None
}

fn leading_width(line: &str) -> usize {
    line.chars()
        .take_while(|c| c.is_whitespace())
        .map(|c| if c == '\t' { 4 } else { 1 })
        .sum()
}

fn scan(text: &str, actions: &ActionSpace) -> Result<Vec<Entry>, TreeFormatError> {
    let mut entries = Vec::new();
    let mut open: Option<(usize, usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let upper = trimmed.to_ascii_uppercase();
        let starts_node = upper.starts_with("IF ") || upper == "IF";
        let placeholder = upper == NO_TRUE || upper == NO_FALSE;
        if let Some((start, width, mut body)) = open.take() {
            if starts_node || placeholder {
                return Err(text_error(start, "node has no conclusion"));
            }
            body.push(' ');
            body.push_str(trimmed);
            match split_conclusion(&body, actions) {
                Some((rule, conclusion)) => entries.push(node_entry(start, width, &rule, conclusion)?),
                None => open = Some((start, width, body)),
            }
            continue;
        }
        let width = leading_width(raw);
        if placeholder {
            entries.push(Entry {
                line,
                width,
                item: Item::Empty,
            });
        } else if starts_node {
            let body = trimmed[2..].trim().to_string();
            match split_conclusion(&body, actions) {
                Some((rule, conclusion)) => entries.push(node_entry(line, width, &rule, conclusion)?),
                None => open = Some((line, width, body)),
            }
        } else {
            return Err(text_error(line, format!("expected `IF ...` or a placeholder, found `{trimmed}`")));
        }
    }
    if let Some((start, _, _)) = open {
        return Err(text_error(start, "node has no conclusion"));
    }
    Ok(entries)
}

fn node_entry(line: usize, width: usize, rule: &str, conclusion: Conclusion) -> Result<Entry, TreeFormatError> {
    let rule = parse_rule(rule).map_err(|e| text_error(line, e.to_string()))?;
    Ok(Entry {
        line,
        width,
        item: Item::Node { rule, conclusion },
    })
}

pub fn from_text(text: &str, actions: &ActionSpace) -> Result<RdrTree, TreeFormatError> {
    let entries = scan(text, actions)?;
    let Some(first) = entries.first() else {
        return Err(text_error(1, "empty tree"));
    };
    match &first.item {
        Item::Node {
            rule: Rule::Always,
            conclusion: Conclusion::Explore,
        } => {}
        _ => return Err(text_error(first.line, "the root must be `IF 1==1: EXPLORE`")),
    }
    let mut tree = RdrTree::new();
    let next = build_children(&entries, 0, NodeId::ROOT, &mut tree)?;
    if let Some(extra) = entries.get(next) {
        return Err(text_error(extra.line, "only one root is allowed"));
    }
    Ok(tree)
}

/// Reads the children of `entries[at]` into `tree` below `id` and returns
/// the index just past the subtree.
fn build_children(
    entries: &[Entry],
    at: usize,
    id: NodeId,
    tree: &mut RdrTree,
) -> Result<usize, TreeFormatError> {
    let width = entries[at].width;
    let mut i = at + 1;
    let Some(child_width) = entries.get(i).map(|e| e.width).filter(|&w| w > width) else {
        return Ok(i);
    };
    let mut slot = 0;
    while let Some(entry) = entries.get(i) {
        if entry.width <= width {
            break;
        }
        if entry.width != child_width {
            return Err(text_error(entry.line, "inconsistent indentation"));
        }
        if slot == 2 {
            return Err(text_error(entry.line, "a node has at most a true and a false child"));
        }
        let branch = slot == 0;
        slot += 1;
        match &entry.item {
            Item::Empty => i += 1,
            Item::Node { rule, conclusion } => {
                let child = tree
                    .attach(id, branch, rule.clone(), *conclusion, None)
                    .map_err(|e| text_error(entry.line, e.to_string()))?;
                i = build_children(entries, i, child, tree)?;
            }
        }
    }
    Ok(i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonNode {
    pub rule: String,
    pub conclusion: String,
    pub cornerstone: Option<Case>,
    #[serde(rename = "true")]
    pub true_child: Option<Box<JsonNode>>,
    #[serde(rename = "false")]
    pub false_child: Option<Box<JsonNode>>,
}

pub fn to_json_node(tree: &RdrTree, actions: &ActionSpace) -> JsonNode {
    fn build(tree: &RdrTree, id: NodeId, actions: &ActionSpace) -> JsonNode {
        let node = tree.node(id).expect("ids come from the tree");
        JsonNode {
            rule: node.rule.to_string(),
            conclusion: conclusion_label(node.conclusion, actions).to_string(),
            cornerstone: node.cornerstone.clone(),
            true_child: node.true_child.map(|c| Box::new(build(tree, c, actions))),
            false_child: node.false_child.map(|c| Box::new(build(tree, c, actions))),
        }
    }
    build(tree, NodeId::ROOT, actions)
}

pub fn to_json(tree: &RdrTree, actions: &ActionSpace) -> String {
    serde_json::to_string(&to_json_node(tree, actions)).expect("tree serializes")
}

pub fn from_json_node(root: &JsonNode, actions: &ActionSpace) -> Result<RdrTree, TreeFormatError> {
    let json_err = |m: String| TreeFormatError::Json(m);
    let rule = parse_rule(&root.rule).map_err(|e| json_err(format!("root rule: {e}")))?;
    let conclusion = parse_conclusion(&root.conclusion, actions)
        .ok_or_else(|| json_err(format!("unknown conclusion `{}`", root.conclusion)))?;
    if rule != Rule::Always || conclusion != Conclusion::Explore {
        return Err(json_err("the root must be `1==1` concluding EXPLORE".into()));
    }
    let mut tree = RdrTree::new();
    fn attach(
        tree: &mut RdrTree,
        parent: NodeId,
        node: &JsonNode,
        actions: &ActionSpace,
    ) -> Result<(), TreeFormatError> {
        for (branch, child) in [(true, &node.true_child), (false, &node.false_child)] {
            let Some(child) = child else { continue };
            let rule = parse_rule(&child.rule)
                .map_err(|e| TreeFormatError::Json(format!("rule `{}`: {e}", child.rule)))?;
            let conclusion = parse_conclusion(&child.conclusion, actions).ok_or_else(|| {
                TreeFormatError::Json(format!("unknown conclusion `{}`", child.conclusion))
            })?;
            let id = tree
                .attach(parent, branch, rule, conclusion, child.cornerstone.clone())
                .map_err(|e: RdrError| TreeFormatError::Json(e.to_string()))?;
            attach(tree, id, child, actions)?;
        }
        Ok(())
    }
    attach(&mut tree, NodeId::ROOT, root, actions)?;
    if let Some(case) = &root.cornerstone {
        return Err(json_err(format!("the root has no cornerstone, found {case}")));
    }
    Ok(tree)
}

pub fn from_json(text: &str, actions: &ActionSpace) -> Result<RdrTree, TreeFormatError> {
    let root: JsonNode = serde_json::from_str(text).map_err(|e| TreeFormatError::Json(e.to_string()))?;
    from_json_node(&root, actions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ActionId;

    const MC: ActionSpace = ActionSpace::MOUNTAIN_CAR;

    #[test]
    fn loose_layout_with_missing_colon_and_wrapped_lines() {
        let text = "IF 1==1 : EXPLORE\n\
                    \x20 IF position < -0.53 AND\n\
                    \x20   position > -0.86: GO RIGHT\n\
                    \x20   IF velocity >= 0: GO RIGHT\n\
                    \x20   IF velocity <0 GO LEFT\n\
                    \x20 NO FALSE NODE\n";
        let tree = from_text(text, &MC).unwrap();
        assert_eq!(tree.non_root_count(), 3);
        let a = tree.node(NodeId::ROOT).unwrap().true_child.unwrap();
        let node = tree.node(a).unwrap();
        assert_eq!(node.rule.to_string(), "position < -0.53 AND position > -0.86");
        assert_eq!(node.conclusion, Conclusion::Recommend(ActionId(2)));
        let f = tree.node(node.false_child.unwrap()).unwrap();
        assert_eq!(f.conclusion, Conclusion::Recommend(ActionId(0)));
        assert_eq!(tree.node(NodeId::ROOT).unwrap().false_child, None);
    }

    #[test]
    fn printing_round_trips() {
        let text = "IF 1==1: EXPLORE\n    IF velocity > 0: GO RIGHT\n        NO TRUE NODE\n        IF velocity <= 0: GO LEFT\n    NO FALSE NODE\n";
        let tree = from_text(text, &MC).unwrap();
        assert_eq!(to_text(&tree, &MC), text);
        let again = from_json(&to_json(&tree, &MC), &MC).unwrap();
        assert_eq!(again, tree);
    }

    #[test]
    fn leaf_children_are_not_padded() {
        assert_eq!(to_text(&RdrTree::new(), &MC), "IF 1==1: EXPLORE\n");
    }

    #[test]
    fn json_keeps_cornerstones() {
        let mut tree = RdrTree::new();
        let case = Case::new().with("velocity", 0.01);
        tree.insert(NodeId::ROOT, parse_rule("velocity > 0").unwrap(), ActionId(2), case.clone())
            .unwrap();
        let text = to_json(&tree, &MC);
        assert_eq!(
            text,
            r#"{"rule":"1==1","conclusion":"EXPLORE","cornerstone":null,"true":{"rule":"velocity > 0","conclusion":"GO RIGHT","cornerstone":{"velocity":0.01},"true":null,"false":null},"false":null}"#
        );
        assert_eq!(from_json(&text, &MC).unwrap(), tree);
    }

    #[test]
    fn malformed_trees_report_lines() {
        let cases = [
            ("IF velocity > 0: GO RIGHT\n", 1),
            ("IF 1==1: EXPLORE\n    IF velocity > : GO RIGHT\n", 2),
            ("IF 1==1: EXPLORE\n    IF velocity > 0\n", 2),
            ("IF 1==1: EXPLORE\n    NO TRUE NODE\n    NO FALSE NODE\n    NO FALSE NODE\n", 4),
            ("IF 1==1: EXPLORE\n    IF left: GO LEFT\n  NO FALSE NODE\n", 3),
            ("IF 1==1: EXPLORE\nIF 1==1: EXPLORE\n", 2),
            ("IF 1==1: EXPLORE\n    velocity > 0\n", 2),
        ];
        for (text, line) in cases {
            match from_text(text, &MC) {
                Err(TreeFormatError::Text { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
