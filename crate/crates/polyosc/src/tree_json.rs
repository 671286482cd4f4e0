//! Trees as JSON: `{"leaf": i}` or `{"left": ..., "right": ...}`.

use std::path::Path;

use polyosc_core::tree::{parse_tree, Tree, TreeSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeJson {
    Leaf { leaf: usize },
    Pair { left: Box<TreeJson>, right: Box<TreeJson> },
}

impl From<&TreeSpec> for TreeJson {
    fn from(spec: &TreeSpec) -> Self {
        match spec {
            TreeSpec::Leaf(i) => TreeJson::Leaf { leaf: *i },
            TreeSpec::Pair(l, r) => TreeJson::Pair { left: Box::new((&**l).into()), right: Box::new((&**r).into()) },
        }
    }
}

impl From<&TreeJson> for TreeSpec {
    fn from(json: &TreeJson) -> Self {
        match json {
            TreeJson::Leaf { leaf } => TreeSpec::Leaf(*leaf),
            TreeJson::Pair { left, right } => TreeSpec::pair((&**left).into(), (&**right).into()),
        }
    }
}

pub fn tree_to_json(tree: &Tree) -> TreeJson {
    (&tree.to_spec()).into()
}

pub fn tree_from_json(text: &str) -> Result<Tree> {
    let json: TreeJson = serde_json::from_str(text).map_err(|e| CliError::Input(format!("tree json: {e}")))?;
    Tree::from_spec(&(&json).into()).map_err(Into::into)
}

/// Parses DSL text, reporting syntax errors with a caret under the offending column.
pub fn tree_from_dsl(text: &str) -> Result<Tree> {
    parse_tree(text).map_err(|e| match e {
        polyosc_core::Error::Parse(p) => CliError::Input(format!("{p}\n{}", p.annotate(text))),
        other => other.into(),
    })
}

/// Accepts DSL text, JSON text, or a path to a file holding either.
pub fn load_tree(arg: &str) -> Result<Tree> {
    let trimmed = arg.trim();
    let looks_inline = trimmed.starts_with('(') || trimmed.starts_with('{') || trimmed.starts_with('x');
    let text = if !looks_inline && Path::new(trimmed).is_file() {
        std::fs::read_to_string(trimmed)?
    } else {
        arg.to_string()
    };
    let body = text.trim();
    if body.starts_with('{') {
        tree_from_json(body)
    } else {
        tree_from_dsl(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let tree = parse_tree("((x1 (x2 x3)) ((x4 x5) x6))").unwrap();
        let text = serde_json::to_string(&tree_to_json(&tree)).unwrap();
        assert!(text.starts_with(r#"{"left":{"left":{"leaf":1}"#), "{text}");
        assert_eq!(tree_from_json(&text).unwrap(), tree);
    }

    #[test]
    fn load_accepts_all_forms() {
        let dsl = "(x2 (x1 x3))";
        let tree = load_tree(dsl).unwrap();
        let json = serde_json::to_string(&tree_to_json(&tree)).unwrap();
        assert_eq!(load_tree(&json).unwrap(), tree);
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in [("t.txt", dsl.to_string()), ("t.json", json)] {
            let path = dir.path().join(name);
            std::fs::write(&path, body).unwrap();
            assert_eq!(load_tree(path.to_str().unwrap()).unwrap(), tree);
        }
    }

    #[test]
    fn parse_errors_carry_a_caret() {
        let err = load_tree("((x1 x2)").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("offset 8"), "{msg}");
        assert!(msg.ends_with("((x1 x2)\n        ^"), "{msg}");
    }

    #[test]
    fn bad_json_tree_is_an_input_error() {
        assert_eq!(load_tree(r#"{"leaf": 1}"#).unwrap_err().exit_code(), 2);
        assert_eq!(load_tree(r#"{"left": {"leaf": 1}}"#).unwrap_err().exit_code(), 2);
        assert_eq!(load_tree(r#"{"left": {"leaf": 1}, "right": {"leaf": 1}}"#).unwrap_err().exit_code(), 2);
    }
}
