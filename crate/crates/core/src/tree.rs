//! Finite combinatorial trees.
//!
//! A [`Tree`] is the exact, finite stand-in for a compact tree: nodes carry
//! opaque labels, edges are unordered pairs. Everything a tree map needs from
//! the ambient space lives here: connected hulls of node sets, the
//! components left over when a family of disjoint subtrees is removed from
//! its hull, and the endpoint/edge counts of the reduced shape (degree-2
//! nodes suppressed).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Index of a node inside one particular [`Tree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node index {0} out of range")]
    UnknownIndex(usize),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}` -- `{1}`")]
    DuplicateEdge(String, String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph contains a cycle")]
    Cycle,
    #[error("empty point set")]
    EmptyPointSet,
    #[error("node set is not connected")]
    NotConnected,
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("blocks {0} and {1} share a node")]
    OverlappingBlocks(usize, usize),
    #[error("no edge between `{0}` and `{1}`")]
    MissingEdge(String, String),
}

/// A finite tree with labelled nodes.
///
/// Edges are stored with the smaller endpoint first and sorted, so edge
/// indices are stable for a given node/edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    labels: Vec<String>,
    by_label: HashMap<String, NodeId>,
    adj: Vec<Vec<NodeId>>,
    edges: Vec<(NodeId, NodeId)>,
    edge_index: HashMap<(NodeId, NodeId), usize>,
}

impl Tree {
    /// Builds a tree from labels and label pairs.
    pub fn from_labels<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Tree, TreeError> {
        let mut b = TreeBuilder::new();
        for n in nodes {
            b.add_node(n.as_ref())?;
        }
        for (u, v) in edges {
            let u = b.node(u.as_ref())?;
            let v = b.node(v.as_ref())?;
            b.add_edge(u, v)?;
        }
        b.build()
    }

    /// A path `0 - 1 - ... - (n-1)` labelled by decimal indices.
    pub fn path(n: usize) -> Tree {
        let mut b = TreeBuilder::new();
        for i in 0..n {
            b.add_node(&i.to_string()).expect("fresh label");
        }
        for i in 1..n {
            b.add_edge(NodeId(i - 1), NodeId(i)).expect("fresh edge");
        }
        b.build().expect("a path is a tree")
    }

    /// A star with center `o` and leaves `l1..lk`.
    pub fn star(k: usize) -> Tree {
        let mut b = TreeBuilder::new();
        let o = b.add_node("o").expect("fresh label");
        for i in 1..=k {
            let l = b.add_node(&format!("l{i}")).expect("fresh label");
            b.add_edge(o, l).expect("fresh edge");
        }
        b.build().expect("a star is a tree")
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len()).map(NodeId)
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node(&self, label: &str) -> Option<NodeId> {
        self.by_label.get(label).copied()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 < self.labels.len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v.0]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v.0].len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (NodeId, NodeId) {
        self.edges[e]
    }

    /// Index of the edge joining `u` and `v`, in either order.
    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<usize> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edge_index.get(&key).copied()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes().filter(|&v| self.degree(v) == 1).collect()
    }

    fn check(&self, v: NodeId) -> Result<(), TreeError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(TreeError::UnknownIndex(v.0))
        }
    }

    /// BFS parents from `root`; `parent[root] == root`.
    pub fn parents_from(&self, root: NodeId) -> Vec<NodeId> {
        let mut parent = vec![NodeId(usize::MAX); self.node_count()];
        parent[root.0] = root;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u.0] {
                if parent[w.0].0 == usize::MAX {
                    parent[w.0] = u;
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    pub fn distances_from(&self, root: NodeId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[root.0] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u.0] {
                if dist[w.0] == usize::MAX {
                    dist[w.0] = dist[u.0] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// The unique path from `from` to `to`, both included.
    pub fn path_between(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let parent = self.parents_from(to);
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = parent[cur.0];
            path.push(cur);
        }
        path
    }

    /// The median of three nodes: the unique node common to all three
    /// pairwise paths.
    pub fn median(&self, a: NodeId, b: NodeId, c: NodeId) -> NodeId {
        let dist_c = self.distances_from(c);
        self.path_between(a, b)
            .into_iter()
            .min_by_key(|v| (dist_c[v.0], v.0))
            .expect("paths are nonempty")
    }

    /// Connected hull of `points`: the smallest subtree containing them.
    pub fn hull(&self, points: &[NodeId]) -> Result<Subtree, TreeError> {
        if points.is_empty() {
            return Err(TreeError::EmptyPointSet);
        }
        let mut keep = vec![true; self.node_count()];
        let mut pinned = vec![false; self.node_count()];
        for &p in points {
            self.check(p)?;
            pinned[p.0] = true;
        }
        let mut degree: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let mut queue: VecDeque<NodeId> = self
            .nodes()
            .filter(|v| degree[v.0] <= 1 && !pinned[v.0])
            .collect();
        while let Some(v) = queue.pop_front() {
            if !keep[v.0] {
                continue;
            }
            keep[v.0] = false;
            for &w in &self.adj[v.0] {
                if keep[w.0] {
                    degree[w.0] -= 1;
                    if degree[w.0] <= 1 && !pinned[w.0] {
                        queue.push_back(w);
                    }
                }
            }
        }
        Ok(Subtree::from_mask(keep))
    }

    /// Whether `nodes` induces a connected subgraph.
    pub fn is_connected_set(&self, nodes: &[NodeId]) -> bool {
        if nodes.is_empty() {
            return false;
        }
        let mut inside = vec![false; self.node_count()];
        for &v in nodes {
            if !self.contains(v) {
                return false;
            }
            inside[v.0] = true;
        }
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![nodes[0]];
        seen[nodes[0].0] = true;
        let mut count = 0;
        while let Some(u) = stack.pop() {
            count += 1;
            for &w in &self.adj[u.0] {
                if inside[w.0] && !seen[w.0] {
                    seen[w.0] = true;
                    stack.push(w);
                }
            }
        }
        count == inside.iter().filter(|&&b| b).count()
    }

    /// The subgraph induced on `nodes`, with nodes kept in increasing index
    /// order. Returns the new tree and the old index of every new node.
    pub fn induced(&self, nodes: &[NodeId]) -> Result<(Tree, Vec<NodeId>), TreeError> {
        let set: BTreeSet<NodeId> = nodes.iter().copied().collect();
        let old: Vec<NodeId> = set.iter().copied().collect();
        let mut new_of = vec![usize::MAX; self.node_count()];
        let mut b = TreeBuilder::new();
        for (i, &v) in old.iter().enumerate() {
            self.check(v)?;
            new_of[v.0] = i;
            b.add_node(self.label(v))?;
        }
        for &(u, v) in &self.edges {
            if new_of[u.0] != usize::MAX && new_of[v.0] != usize::MAX {
                b.add_edge(NodeId(new_of[u.0]), NodeId(new_of[v.0]))?;
            }
        }
        Ok((b.build()?, old))
    }

    /// A builder seeded with this tree's nodes and edges.
    pub fn to_builder(&self) -> TreeBuilder {
        TreeBuilder {
            labels: self.labels.clone(),
            by_label: self.by_label.clone(),
            edges: self.edges.iter().copied().collect(),
        }
    }
}

/// Mutable staging area for trees; [`TreeBuilder::build`] checks the tree
/// invariants.
#[derive(Debug, Clone, Default)]
pub struct TreeBuilder {
    labels: Vec<String>,
    by_label: HashMap<String, NodeId>,
    edges: BTreeSet<(NodeId, NodeId)>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, label: &str) -> Result<NodeId, TreeError> {
        if self.by_label.contains_key(label) {
            return Err(TreeError::DuplicateNode(label.to_string()));
        }
        let id = NodeId(self.labels.len());
        self.labels.push(label.to_string());
        self.by_label.insert(label.to_string(), id);
        Ok(id)
    }

    /// Adds a node whose label starts with `prefix` and is not yet in use.
    pub fn add_fresh_node(&mut self, prefix: &str) -> NodeId {
        let mut k = self.labels.len();
        loop {
            let label = format!("{prefix}{k}");
            if !self.by_label.contains_key(&label) {
                return self.add_node(&label).expect("label is fresh");
            }
            k += 1;
        }
    }

    pub fn node(&self, label: &str) -> Result<NodeId, TreeError> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| TreeError::UnknownNode(label.to_string()))
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.0]
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), TreeError> {
        for w in [u, v] {
            if w.0 >= self.labels.len() {
                return Err(TreeError::UnknownIndex(w.0));
            }
        }
        if u == v {
            return Err(TreeError::SelfLoop(self.labels[u.0].clone()));
        }
        let key = if u < v { (u, v) } else { (v, u) };
        if !self.edges.insert(key) {
            return Err(TreeError::DuplicateEdge(
                self.labels[key.0 .0].clone(),
                self.labels[key.1 .0].clone(),
            ));
        }
        Ok(())
    }

    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), TreeError> {
        let key = if u < v { (u, v) } else { (v, u) };
        if self.edges.remove(&key) {
            Ok(())
        } else {
            Err(TreeError::MissingEdge(
                self.labels[u.0].clone(),
                self.labels[v.0].clone(),
            ))
        }
    }

    /// Neighbors of `v` among the edges staged so far, in increasing order.
    pub fn neighbors(&self, v: NodeId) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Replaces the edge `u - v` by the path `u - n1 - ... - nk - v` through
    /// `k` fresh nodes; returns the new nodes in order from `u` to `v`.
    pub fn subdivide(
        &mut self,
        u: NodeId,
        v: NodeId,
        k: usize,
        prefix: &str,
    ) -> Result<Vec<NodeId>, TreeError> {
        self.remove_edge(u, v)?;
        let fresh: Vec<NodeId> = (0..k).map(|_| self.add_fresh_node(prefix)).collect();
        let mut prev = u;
        for &w in &fresh {
            self.add_edge(prev, w)?;
            prev = w;
        }
        self.add_edge(prev, v)?;
        Ok(fresh)
    }

    pub fn build(self) -> Result<Tree, TreeError> {
        let n = self.labels.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u.0].push(v);
            adj[v.0].push(u);
        }
        for list in &mut adj {
            list.sort();
        }
        if n > 0 {
            let mut seen = vec![false; n];
            let mut stack = vec![NodeId(0)];
            seen[0] = true;
            let mut count = 0;
            while let Some(u) = stack.pop() {
                count += 1;
                for &w in &adj[u.0] {
                    if !seen[w.0] {
                        seen[w.0] = true;
                        stack.push(w);
                    }
                }
            }
            if count < n {
                return Err(TreeError::Disconnected);
            }
            if self.edges.len() != n - 1 {
                return Err(TreeError::Cycle);
            }
        } else if !self.edges.is_empty() {
            return Err(TreeError::Cycle);
        }
        let edges: Vec<(NodeId, NodeId)> = self.edges.into_iter().collect();
        let edge_index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Ok(Tree {
            labels: self.labels,
            by_label: self.by_label,
            adj,
            edges,
            edge_index,
        })
    }
}

/// A connected, nonempty set of nodes of some tree (the induced subgraph is
/// connected). Stored as a membership mask over the parent tree's nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subtree {
    mask: Vec<bool>,
    nodes: Vec<NodeId>,
}

impl Subtree {
    pub fn new(tree: &Tree, nodes: &[NodeId]) -> Result<Subtree, TreeError> {
        if nodes.is_empty() {
            return Err(TreeError::EmptyPointSet);
        }
        if !tree.is_connected_set(nodes) {
            return Err(TreeError::NotConnected);
        }
        let mut mask = vec![false; tree.node_count()];
        for &v in nodes {
            mask[v.0] = true;
        }
        Ok(Subtree::from_mask(mask))
    }

    fn from_mask(mask: Vec<bool>) -> Subtree {
        let nodes = mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| NodeId(i))
            .collect();
        Subtree { mask, nodes }
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.mask.get(v.0).copied().unwrap_or(false)
    }

    /// Member nodes in increasing order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_disjoint(&self, other: &Subtree) -> bool {
        self.nodes.iter().all(|&v| !other.contains(v))
    }
}

/// One connected component of `[Z] \ Z`, where `Z` is a union of disjoint
/// subtrees.
///
/// `nodes` are the hull nodes outside every block that belong to the
/// component; `edges` are the hull edges whose open interior lies in it.
/// A component with no nodes is a single open arc joining two blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DifferenceComponent {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<usize>,
}

impl DifferenceComponent {
    pub fn is_open_arc(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Components of `hull(union of blocks)` minus the blocks.
pub fn difference_components(
    tree: &Tree,
    blocks: &[Subtree],
) -> Result<Vec<DifferenceComponent>, TreeError> {
    let n = tree.node_count();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut points = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        if b.is_empty() {
            return Err(TreeError::EmptyBlock(i));
        }
        for &v in b.nodes() {
            if v.0 >= n {
                return Err(TreeError::UnknownIndex(v.0));
            }
            if let Some(j) = owner[v.0] {
                return Err(TreeError::OverlappingBlocks(j, i));
            }
            owner[v.0] = Some(i);
            points.push(v);
        }
    }
    if points.is_empty() {
        return Err(TreeError::EmptyPointSet);
    }
    let hull = tree.hull(&points)?;

    // Union-find over residual hull nodes.
    let mut comp_of = vec![usize::MAX; n];
    let mut components: Vec<DifferenceComponent> = Vec::new();
    for &start in hull.nodes() {
        if owner[start.0].is_some() || comp_of[start.0] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut nodes = Vec::new();
        let mut stack = vec![start];
        comp_of[start.0] = id;
        while let Some(u) = stack.pop() {
            nodes.push(u);
            for &w in tree.neighbors(u) {
                if hull.contains(w) && owner[w.0].is_none() && comp_of[w.0] == usize::MAX {
                    comp_of[w.0] = id;
                    stack.push(w);
                }
            }
        }
        nodes.sort();
        components.push(DifferenceComponent {
            nodes,
            edges: Vec::new(),
        });
    }
    for (e, &(u, v)) in tree.edges().iter().enumerate() {
        if !hull.contains(u) || !hull.contains(v) {
            continue;
        }
        match (owner[u.0], owner[v.0]) {
            (Some(a), Some(b)) if a == b => {}
            (Some(_), Some(_)) => components.push(DifferenceComponent {
                nodes: Vec::new(),
                edges: vec![e],
            }),
            (None, _) => components[comp_of[u.0]].edges.push(e),
            (Some(_), None) => components[comp_of[v.0]].edges.push(e),
        }
    }
    Ok(components)
}

/// Whether the union of `blocks` is a surrounding set (its hull minus
/// itself is connected). A single block counts as surrounding.
pub fn is_surrounding(tree: &Tree, blocks: &[Subtree]) -> Result<bool, TreeError> {
    if blocks.is_empty() {
        return Err(TreeError::EmptyPointSet);
    }
    let components = difference_components(tree, blocks)?;
    Ok(blocks.len() == 1 || components.len() == 1)
}

/// Endpoint and edge counts of a tree with degree-2 nodes suppressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReducedShape {
    pub end_count: usize,
    pub edge_count: usize,
}

impl ReducedShape {
    /// A single point: no endpoints and no edges.
    pub fn is_degenerate(&self) -> bool {
        self.edge_count == 0
    }
}

pub fn reduce(tree: &Tree) -> ReducedShape {
    if tree.node_count() < 2 {
        return ReducedShape {
            end_count: 0,
            edge_count: 0,
        };
    }
    let end_count = tree.nodes().filter(|&v| tree.degree(v) == 1).count();
    let kept = tree.nodes().filter(|&v| tree.degree(v) != 2).count();
    ReducedShape {
        end_count,
        edge_count: kept - 1,
    }
}
