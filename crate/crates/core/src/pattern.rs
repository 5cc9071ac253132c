//! Periodic-orbit patterns: a marked tree whose marked nodes are visited
//! cyclically in time order.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::tree::{NodeId, Tree, TreeBuilder, TreeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("orbit is empty")]
    EmptyOrbit,
    #[error("orbit visits `{0}` more than once")]
    RepeatedNode(String),
    #[error("orbit node `{0}` is not in the tree")]
    MissingNode(String),
    #[error("modulus {modulus} does not divide the period {period}")]
    BadModulus { modulus: usize, period: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// The combinatorial type of a periodic orbit.
///
/// `orbit[i]` is the position at time `i`; the cyclic permutation sends
/// `orbit[i]` to `orbit[(i + 1) % N]`. The tree is always the connected hull
/// of the orbit with non-orbit degree-2 nodes suppressed, so every leaf is an
/// orbit node and every other non-orbit node has degree at least 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    tree: Tree,
    orbit: Vec<NodeId>,
    time: Vec<Option<usize>>,
}

impl Pattern {
    /// Normalizes a tree and orbit into a pattern: prunes everything outside
    /// the hull of the orbit and suppresses degree-2 non-orbit nodes.
    pub fn validate(tree: &Tree, orbit: &[NodeId]) -> Result<Pattern, PatternError> {
        if orbit.is_empty() {
            return Err(PatternError::EmptyOrbit);
        }
        let mut seen = BTreeSet::new();
        for &v in orbit {
            if !tree.contains(v) {
                return Err(PatternError::MissingNode(format!("{v}")));
            }
            if !seen.insert(v) {
                return Err(PatternError::RepeatedNode(tree.label(v).to_string()));
            }
        }
        let hull = tree.hull(orbit)?;
        let (hull_tree, old) = tree.induced(hull.nodes())?;
        let mut new_of = vec![usize::MAX; tree.node_count()];
        for (i, v) in old.iter().enumerate() {
            new_of[v.0] = i;
        }
        let marked: Vec<bool> = old.iter().map(|v| seen.contains(v)).collect();
        let (normal, kept) = suppress_unmarked_degree_two(&hull_tree, &marked)?;
        let mut final_of = vec![usize::MAX; hull_tree.node_count()];
        for (i, v) in kept.iter().enumerate() {
            final_of[v.0] = i;
        }
        let orbit: Vec<NodeId> = orbit
            .iter()
            .map(|v| NodeId(final_of[new_of[v.0]]))
            .collect();
        Ok(Pattern::from_parts(normal, orbit))
    }

    /// Builds and validates a pattern from labels.
    pub fn from_labels<S: AsRef<str>>(
        nodes: &[S],
        edges: &[(S, S)],
        orbit: &[S],
    ) -> Result<Pattern, PatternError> {
        let tree = Tree::from_labels(nodes, edges)?;
        let orbit = orbit
            .iter()
            .map(|l| {
                tree.node(l.as_ref())
                    .ok_or_else(|| PatternError::MissingNode(l.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Pattern::validate(&tree, &orbit)
    }

    /// An interval pattern: nodes `0..N` along a path, visited in the given
    /// order of positions. `positions[t]` is the place on the line at time t.
    pub fn interval(positions: &[usize]) -> Result<Pattern, PatternError> {
        let tree = Tree::path(positions.len());
        let orbit: Vec<NodeId> = positions.iter().map(|&p| NodeId(p)).collect();
        Pattern::validate(&tree, &orbit)
    }

    fn from_parts(tree: Tree, orbit: Vec<NodeId>) -> Pattern {
        let mut time = vec![None; tree.node_count()];
        for (t, v) in orbit.iter().enumerate() {
            time[v.0] = Some(t);
        }
        Pattern { tree, orbit, time }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn orbit(&self) -> &[NodeId] {
        &self.orbit
    }

    pub fn period(&self) -> usize {
        self.orbit.len()
    }

    /// Time index of `v`, if `v` is an orbit node.
    pub fn time_of(&self, v: NodeId) -> Option<usize> {
        self.time.get(v.0).copied().flatten()
    }

    pub fn is_marked(&self, v: NodeId) -> bool {
        self.time_of(v).is_some()
    }

    /// Image of an orbit node under the cyclic permutation.
    pub fn successor(&self, v: NodeId) -> Option<NodeId> {
        self.time_of(v)
            .map(|t| self.orbit[(t + 1) % self.orbit.len()])
    }

    /// Unordered pairs of orbit nodes whose open connecting path avoids the
    /// orbit, as `(smaller, larger)` node ids.
    pub fn neighboring_pairs(&self) -> BTreeSet<(NodeId, NodeId)> {
        let mut pairs = BTreeSet::new();
        for &a in &self.orbit {
            let mut seen = vec![false; self.tree.node_count()];
            seen[a.0] = true;
            let mut stack = vec![a];
            while let Some(u) = stack.pop() {
                for &w in self.tree.neighbors(u) {
                    if seen[w.0] {
                        continue;
                    }
                    seen[w.0] = true;
                    if self.is_marked(w) {
                        pairs.insert(if a < w { (a, w) } else { (w, a) });
                    } else {
                        stack.push(w);
                    }
                }
            }
        }
        pairs
    }

    /// Residue classes of the orbit modulo `m`.
    pub fn blocks(&self, m: usize) -> Result<Vec<Block>, PatternError> {
        let n = self.period();
        if m == 0 || m > n || !n.is_multiple_of(m) {
            return Err(PatternError::BadModulus {
                modulus: m,
                period: n,
            });
        }
        Ok((0..m)
            .map(|r| Block {
                residue: r,
                modulus: m,
                nodes: (r..n).step_by(m).map(|s| self.orbit[s]).collect(),
            })
            .collect())
    }

    /// The same pattern with time shifted so that `orbit[shift]` is first.
    pub fn rotated(&self, shift: usize) -> Pattern {
        let n = self.period();
        let orbit = (0..n).map(|t| self.orbit[(t + shift) % n]).collect();
        Pattern::from_parts(self.tree.clone(), orbit)
    }
}

/// Orbit points whose time index is `residue` modulo `modulus`, in time order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub residue: usize,
    pub modulus: usize,
    pub nodes: Vec<NodeId>,
}

fn suppress_unmarked_degree_two(
    tree: &Tree,
    marked: &[bool],
) -> Result<(Tree, Vec<NodeId>), TreeError> {
    let mut b: TreeBuilder = tree.to_builder();
    let mut removed = vec![false; tree.node_count()];
    for v in tree.nodes() {
        if marked[v.0] {
            continue;
        }
        let nbrs = b.neighbors(v);
        if nbrs.len() == 2 {
            b.remove_edge(v, nbrs[0])?;
            b.remove_edge(v, nbrs[1])?;
            b.add_edge(nbrs[0], nbrs[1])?;
            removed[v.0] = true;
        }
    }
    let staged = b.clone();
    let kept: Vec<NodeId> = tree.nodes().filter(|v| !removed[v.0]).collect();
    let mut out = TreeBuilder::new();
    let mut new_of = vec![usize::MAX; tree.node_count()];
    for (i, &v) in kept.iter().enumerate() {
        new_of[v.0] = i;
        out.add_node(tree.label(v))?;
    }
    for &v in &kept {
        for w in staged.neighbors(v) {
            if v < w {
                out.add_edge(NodeId(new_of[v.0]), NodeId(new_of[w.0]))?;
            }
        }
    }
    Ok((out.build()?, kept))
}
