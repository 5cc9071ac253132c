//! Markov piecewise-linear tree maps.
//!
//! Every edge has length 1 and is mapped linearly, in path length, onto the
//! tree path between the images of its endpoints. Nodes go to nodes, so the
//! map is determined by the node images alone and its covering relation is a
//! 0/1 transition matrix over edges.

mod matrix;
mod periods;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub use matrix::{spectral_radius, SpectralRadius, TransitionMatrix};
pub use periods::{
    enumerate_periods, exact_period, find_fixed_point, PeriodEnumeration, PeriodicWitness,
    DEFAULT_BUDGET,
};

use crate::pattern::Pattern;
use crate::tree::{NodeId, Tree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlMapError {
    #[error("expected {expected} node images, got {got}")]
    ImageLength { expected: usize, got: usize },
    #[error("node image {0} is outside the tree")]
    ImageOutOfRange(usize),
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("matrix row {row} has length {len}, expected {expected}")]
    NonSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error("point does not lie on this tree")]
    BadPoint,
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

/// A point of the tree: a node, or an interior point of an edge at parameter
/// `t` in `(0, 1)` measured from the edge's smaller endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Point {
    Node(NodeId),
    Edge { edge: usize, t: BigRational },
}

impl Point {
    /// Builds a point, snapping `t = 0` and `t = 1` onto the endpoints.
    pub fn on_edge(tree: &Tree, edge: usize, t: BigRational) -> Result<Point, PlMapError> {
        if edge >= tree.edge_count() || t < BigRational::zero() || t > BigRational::one() {
            return Err(PlMapError::BadPoint);
        }
        let (a, b) = tree.edge(edge);
        Ok(if t.is_zero() {
            Point::Node(a)
        } else if t.is_one() {
            Point::Node(b)
        } else {
            Point::Edge { edge, t }
        })
    }

    /// `t` as a decimal, for display.
    pub fn t_f64(&self) -> Option<f64> {
        match self {
            Point::Node(_) => None,
            Point::Edge { t, .. } => t.to_f64(),
        }
    }
}

/// A Markov PL self-map of a finite tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLTreeMap {
    domain: Tree,
    image: Vec<NodeId>,
    paths: Vec<Vec<NodeId>>,
}

impl PLTreeMap {
    pub fn new(domain: Tree, image: Vec<NodeId>) -> Result<PLTreeMap, PlMapError> {
        if image.len() != domain.node_count() {
            return Err(PlMapError::ImageLength {
                expected: domain.node_count(),
                got: image.len(),
            });
        }
        if let Some(v) = image.iter().find(|v| !domain.contains(**v)) {
            return Err(PlMapError::ImageOutOfRange(v.0));
        }
        let paths = domain
            .edges()
            .iter()
            .map(|&(u, v)| domain.path_between(image[u.0], image[v.0]))
            .collect();
        Ok(PLTreeMap {
            domain,
            image,
            paths,
        })
    }

    pub fn identity(domain: Tree) -> PLTreeMap {
        let image = domain.nodes().collect();
        PLTreeMap::new(domain, image).expect("identity is well formed")
    }

    pub fn domain(&self) -> &Tree {
        &self.domain
    }

    pub fn node_image(&self, v: NodeId) -> NodeId {
        self.image[v.0]
    }

    pub fn node_images(&self) -> &[NodeId] {
        &self.image
    }

    /// Image path of edge `e`, from the image of its smaller endpoint.
    pub fn edge_path(&self, e: usize) -> &[NodeId] {
        &self.paths[e]
    }

    /// Whether every stored edge path equals the recomputed tree path.
    pub fn is_consistent(&self) -> bool {
        self.domain.edges().iter().enumerate().all(|(e, &(u, v))| {
            self.paths[e] == self.domain.path_between(self.image[u.0], self.image[v.0])
        })
    }

    pub fn transition_matrix(&self) -> TransitionMatrix {
        TransitionMatrix::of_map(self)
    }

    /// Edges covered by edge `e`, with the inverse branch data
    /// `(target, k, reversed)`: a point at parameter `s` of `target` has the
    /// preimage `(k + s) / d` (or `(k + 1 - s) / d` when reversed) in `e`,
    /// `d` being the length of the image path.
    pub(crate) fn coverings(&self, e: usize) -> Vec<(usize, usize, bool)> {
        let path = &self.paths[e];
        path.windows(2)
            .enumerate()
            .map(|(j, w)| {
                let target = self
                    .domain
                    .edge_between(w[0], w[1])
                    .expect("path steps are edges");
                (target, j, w[0] > w[1])
            })
            .collect()
    }

    /// Applies the map to a point, exactly.
    pub fn apply(&self, p: &Point) -> Result<Point, PlMapError> {
        match p {
            Point::Node(v) => {
                if !self.domain.contains(*v) {
                    return Err(PlMapError::BadPoint);
                }
                Ok(Point::Node(self.image[v.0]))
            }
            Point::Edge { edge, t } => {
                if *edge >= self.domain.edge_count() {
                    return Err(PlMapError::BadPoint);
                }
                let path = &self.paths[*edge];
                let d = path.len() - 1;
                if d == 0 {
                    return Ok(Point::Node(path[0]));
                }
                let x = t * BigRational::from_integer(BigInt::from(d));
                let mut j = x
                    .floor()
                    .to_integer()
                    .to_usize()
                    .ok_or(PlMapError::BadPoint)?;
                if j >= d {
                    j = d - 1;
                }
                let s = x - BigRational::from_integer(BigInt::from(j));
                let (a, b) = (path[j], path[j + 1]);
                let target = self
                    .domain
                    .edge_between(a, b)
                    .expect("path steps are edges");
                let param = if a < b { s } else { BigRational::one() - s };
                Point::on_edge(&self.domain, target, param)
            }
        }
    }

    /// `f^k(p)`.
    pub fn iterate(&self, p: &Point, k: usize) -> Result<Point, PlMapError> {
        let mut q = p.clone();
        for _ in 0..k {
            q = self.apply(&q)?;
        }
        Ok(q)
    }
}

/// Nearest marked node seen from `from` when leaving `b` through `from`;
/// ties go to the smallest node index.
fn nearest_marked(pattern: &Pattern, b: NodeId, from: NodeId) -> NodeId {
    let tree = pattern.tree();
    let mut frontier = vec![from];
    let mut seen = vec![false; tree.node_count()];
    seen[b.0] = true;
    seen[from.0] = true;
    while !frontier.is_empty() {
        if let Some(&v) = frontier.iter().filter(|v| pattern.is_marked(**v)).min() {
            return v;
        }
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in tree.neighbors(u) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    unreachable!("every branch of a pattern tree ends in a marked leaf")
}

/// The canonical Markov model of a pattern: orbit nodes follow the cycle and
/// each branch node goes to the iterated median of the images of the nearest
/// marked node in each direction (neighbors in increasing order, folded as
/// `median(acc, q_j, q_1)`).
pub fn connect_the_dots(pattern: &Pattern) -> PLTreeMap {
    let tree = pattern.tree();
    let image = tree
        .nodes()
        .map(|v| {
            if let Some(w) = pattern.successor(v) {
                return w;
            }
            let q: Vec<NodeId> = tree
                .neighbors(v)
                .iter()
                .map(|&w| {
                    pattern
                        .successor(nearest_marked(pattern, v, w))
                        .expect("marked")
                })
                .collect();
            match q.len() {
                0 => v,
                1 | 2 => q[0],
                _ => {
                    let mut acc = tree.median(q[0], q[1], q[2]);
                    for &qj in &q[3..] {
                        acc = tree.median(acc, qj, q[0]);
                    }
                    acc
                }
            }
        })
        .collect();
    PLTreeMap::new(tree.clone(), image).expect("images are nodes of the pattern tree")
}
