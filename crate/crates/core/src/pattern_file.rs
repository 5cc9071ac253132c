//! Line-oriented pattern files.
//!
//! ```text
//! # the 3-star rotation
//! node o
//! node x
//! node y
//! node z
//! edge o x
//! edge o y
//! edge o z
//! cycle x y z
//! ```
//!
//! `node <id>` and `edge <id> <id>` describe the tree, `cycle <id> ...` lists
//! the orbit in time order (exactly one such line, before any `ambient`
//! line). An `ambient` line may be
//! followed by further `node`/`edge` lines; they belong to the ambient tree
//! but not to the orbit's span. Identifiers are nonempty ASCII alphanumeric
//! tokens; `#` starts a comment line.

use std::fmt::Write as _;

use thiserror::Error;

use crate::pattern::Pattern;
use crate::plmap::PLTreeMap;
use crate::tree::{NodeId, Tree, TreeBuilder};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based line number; 0 for problems with the file as a whole.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// A parsed file: the ambient tree and, when present, the orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeFile {
    pub tree: Tree,
    pub cycle: Option<Vec<NodeId>>,
}

impl TreeFile {
    /// The pattern spanned by the cycle inside the ambient tree.
    pub fn pattern(&self) -> Result<Pattern, ParseError> {
        let cycle = self
            .cycle
            .as_ref()
            .ok_or_else(|| err(0, "missing `cycle` line"))?;
        Pattern::validate(&self.tree, cycle).map_err(|e| err(0, e.to_string()))
    }
}

fn check_id(line: usize, id: &str) -> Result<(), ParseError> {
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(err(line, format!("identifier `{id}` is not alphanumeric")));
    }
    Ok(())
}

/// Parses a file; `cycle` lines are optional here and checked by callers.
pub fn parse(text: &str) -> Result<TreeFile, ParseError> {
    let mut b = TreeBuilder::new();
    let mut cycle: Option<(usize, Vec<String>)> = None;
    let mut in_ambient = false;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        match words[0] {
            "node" => {
                let [_, id] = words[..] else {
                    return Err(err(line, "expected `node <id>`"));
                };
                check_id(line, id)?;
                b.add_node(id).map_err(|e| err(line, e.to_string()))?;
            }
            "edge" => {
                let [_, u, v] = words[..] else {
                    return Err(err(line, "expected `edge <id> <id>`"));
                };
                check_id(line, u)?;
                check_id(line, v)?;
                let u = b.node(u).map_err(|e| err(line, e.to_string()))?;
                let v = b.node(v).map_err(|e| err(line, e.to_string()))?;
                b.add_edge(u, v).map_err(|e| err(line, e.to_string()))?;
            }
            "cycle" => {
                if in_ambient {
                    return Err(err(line, "`cycle` must come before `ambient`"));
                }
                if let Some((first, _)) = cycle {
                    return Err(err(
                        line,
                        format!("second `cycle` line (first on line {first})"),
                    ));
                }
                if words.len() < 2 {
                    return Err(err(line, "expected `cycle <id> ...`"));
                }
                for id in &words[1..] {
                    check_id(line, id)?;
                }
                cycle = Some((line, words[1..].iter().map(|s| s.to_string()).collect()));
            }
            "ambient" => {
                if words.len() != 1 {
                    return Err(err(line, "`ambient` takes no arguments"));
                }
                if in_ambient {
                    return Err(err(line, "second `ambient` line"));
                }
                in_ambient = true;
            }
            other => return Err(err(line, format!("unknown record `{other}`"))),
        }
    }
    let cycle = match cycle {
        None => None,
        Some((line, ids)) => {
            let mut orbit = Vec::with_capacity(ids.len());
            for id in &ids {
                let v = b.node(id).map_err(|e| err(line, e.to_string()))?;
                if orbit.contains(&v) {
                    return Err(err(line, format!("cycle visits `{id}` twice")));
                }
                orbit.push(v);
            }
            Some(orbit)
        }
    };
    if b.node_count() == 0 {
        return Err(err(last_line.max(1), "no nodes"));
    }
    let tree = b.build().map_err(|e| err(0, e.to_string()))?;
    Ok(TreeFile { tree, cycle })
}

/// Parses a file that must contain a cycle and returns its pattern with the
/// ambient tree.
pub fn parse_pattern(text: &str) -> Result<(Pattern, TreeFile), ParseError> {
    let file = parse(text)?;
    let pattern = file.pattern()?;
    Ok((pattern, file))
}

/// Writes a tree (and optional cycle) in the file format.
pub fn write_tree(tree: &Tree, cycle: Option<&[NodeId]>) -> String {
    let mut out = String::new();
    for v in tree.nodes() {
        let _ = writeln!(out, "node {}", tree.label(v));
    }
    for &(u, v) in tree.edges() {
        let _ = writeln!(out, "edge {} {}", tree.label(u), tree.label(v));
    }
    if let Some(c) = cycle {
        let ids: Vec<&str> = c.iter().map(|&v| tree.label(v)).collect();
        let _ = writeln!(out, "cycle {}", ids.join(" "));
    }
    out
}

pub fn write_pattern(pattern: &Pattern) -> String {
    write_tree(pattern.tree(), Some(pattern.orbit()))
}

/// Text dump of a map: every node with its image, then every edge with its
/// image path, then the realized orbit if there is one.
///
/// ```text
/// map <node count> <edge count>
/// image <node> <image>
/// path <u> <v> : <q_0> ... <q_d>
/// orbit <node> ...
/// ```
pub fn write_map(map: &PLTreeMap, orbit: &[NodeId]) -> String {
    let t = map.domain();
    let mut out = String::new();
    let _ = writeln!(out, "map {} {}", t.node_count(), t.edge_count());
    for v in t.nodes() {
        let _ = writeln!(out, "image {} {}", t.label(v), t.label(map.node_image(v)));
    }
    for (e, &(u, v)) in t.edges().iter().enumerate() {
        let path: Vec<&str> = map.edge_path(e).iter().map(|&q| t.label(q)).collect();
        let _ = writeln!(
            out,
            "path {} {} : {}",
            t.label(u),
            t.label(v),
            path.join(" ")
        );
    }
    if !orbit.is_empty() {
        let ids: Vec<&str> = orbit.iter().map(|&v| t.label(v)).collect();
        let _ = writeln!(out, "orbit {}", ids.join(" "));
    }
    out
}
