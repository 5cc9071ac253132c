//! Explicit Markov maps with prescribed periodic behavior.
//!
//! * [`realize_interval`]: an interval map with period set exactly `S(key)`
//!   and fixed endpoints (Štefan cycles and period doubling).
//! * [`synth_period_set`]: a tree map with period set `{1} ∪ n·S(key)`,
//!   rotating `n` end arcs and running an interval realizer on the return.
//! * [`synth_snowflake_map`]: a zero-entropy extension of a snowflake
//!   pattern, with one funnel cycle per level.
//! * [`synth_prop3`]: a snowflake orbit of period `2^k·m` on any tree with at
//!   least `m` endpoints, together with its zero-entropy extension.
//!
//! Nothing here is trusted: [`SynthesizedMap::verify`] re-checks every claim
//! with the loop solver and the spectral test.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::forcing::{PeriodSet, SharkovskiiKey};
use crate::pattern::{Pattern, PatternError};
use crate::plmap::{
    enumerate_periods, spectral_radius, PLTreeMap, PeriodEnumeration, PlMapError, SpectralRadius,
};
use crate::snowflake::decompose;
use crate::tree::{self, reduce, NodeId, Subtree, Tree, TreeBuilder, TreeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("pattern is not a snowflake")]
    NotSnowflake,
    #[error("ambient tree does not contain the pattern: {0}")]
    AmbientMismatch(String),
    #[error("{requested} arcs requested but the ambient tree has {end_count} endpoints")]
    TooFewEndpoints { requested: usize, end_count: usize },
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("unsupported Sharkovskii key {0}")]
    UnsupportedKey(SharkovskiiKey),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Map(#[from] PlMapError),
}

/// A constructed map with the claims it is supposed to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedMap {
    pub map: PLTreeMap,
    pub declared_periods: PeriodSet,
    pub declared_entropy_zero: bool,
    /// The realized orbit in time order (empty when none is prescribed).
    pub orbit: Vec<NodeId>,
}

/// Outcome of re-checking a [`SynthesizedMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub cutoff: u64,
    pub expected_periods: BTreeSet<u64>,
    pub found: PeriodEnumeration,
    pub radius: SpectralRadius,
    pub orbit_preserved: bool,
    pub declared_entropy_zero: bool,
}

impl Verification {
    pub fn periods_match(&self) -> bool {
        self.found.is_complete() && self.found.periods() == self.expected_periods
    }

    /// The exact radius flag matches the entropy claim.
    pub fn radius_matches(&self) -> bool {
        self.radius.at_most_one == self.declared_entropy_zero
    }

    pub fn passed(&self) -> bool {
        self.periods_match() && self.radius_matches() && self.orbit_preserved
    }
}

impl SynthesizedMap {
    pub fn verify(&self, cutoff: u64, tol: f64, budget: u64) -> Result<Verification, PlMapError> {
        let found = enumerate_periods(&self.map, cutoff, budget)?;
        let radius = spectral_radius(&self.map.transition_matrix(), tol)?;
        let n = self.orbit.len();
        let orbit_preserved =
            (0..n).all(|t| self.map.node_image(self.orbit[t]) == self.orbit[(t + 1) % n]);
        Ok(Verification {
            cutoff,
            expected_periods: self.declared_periods.up_to(cutoff),
            found,
            radius,
            orbit_preserved,
            declared_entropy_zero: self.declared_entropy_zero,
        })
    }
}

/// Adds a node labelled `name`, or `name` plus a counter if that is taken.
fn add_named(b: &mut TreeBuilder, name: &str) -> NodeId {
    let mut label = name.to_string();
    let mut k = 0;
    while b.node(&label).is_ok() {
        label = format!("{name}n{k}");
        k += 1;
    }
    b.add_node(&label).expect("label is unused")
}

/// An interval map on a path whose nodes are listed left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalMap {
    pub map: PLTreeMap,
    /// Path nodes in spatial order; the first and last are fixed.
    pub nodes: Vec<NodeId>,
}

/// Node images of an interval map given by positions `0..=L`.
fn stefan_positions(q: usize) -> Vec<usize> {
    // Spatial order z_{q-1} < z_{q-3} < ... < z_0 < z_1 < ... < z_{q-2},
    // framed by fixed ends at positions 0 and q + 1.
    let mut order: Vec<usize> = (0..q).filter(|i| i % 2 == 0).rev().collect();
    order.extend((0..q).filter(|i| i % 2 == 1));
    let mut pos = vec![0; q];
    for (slot, &i) in order.iter().enumerate() {
        pos[i] = slot + 1;
    }
    let mut image = vec![0; q + 2];
    image[q + 1] = q + 1;
    for i in 0..q {
        image[pos[i]] = pos[(i + 1) % q];
    }
    image
}

/// One period doubling: two copies of `g` swapped across a fixed middle.
fn doubled(g: &[usize]) -> Vec<usize> {
    let l = g.len() - 1;
    // z0 = 0, a_i = 1 + i, m = l + 2, b_i = l + 3 + i, z1 = 2l + 4.
    let a = |i: usize| 1 + i;
    let b = |i: usize| l + 3 + i;
    let mut image = vec![0; 2 * l + 5];
    for i in 0..=l {
        image[a(i)] = b(g[i]);
        image[b(i)] = a(i);
    }
    image[l + 2] = l + 2;
    image[2 * l + 4] = 2 * l + 4;
    image
}

fn interval_images(key: u64) -> Vec<usize> {
    let s = key.trailing_zeros();
    let q = (key >> s) as usize;
    let mut g = if q == 1 {
        vec![0, 1]
    } else {
        stefan_positions(q)
    };
    for _ in 0..s {
        g = doubled(&g);
    }
    g
}

/// A PL interval map with period set exactly `S(key)` and both ends fixed.
pub fn realize_interval(key: u64) -> Result<IntervalMap, SynthesisError> {
    if key == 0 {
        return Err(SynthesisError::UnsupportedKey(SharkovskiiKey::Int(0)));
    }
    let g = interval_images(key);
    let tree = Tree::path(g.len());
    let map = PLTreeMap::new(tree, g.into_iter().map(NodeId).collect())?;
    let nodes = map.domain().nodes().collect();
    Ok(IntervalMap { map, nodes })
}

fn finite_key(key: SharkovskiiKey) -> Result<u64, SynthesisError> {
    match key {
        SharkovskiiKey::Int(k) if k >= 1 => Ok(k),
        other => Err(SynthesisError::UnsupportedKey(other)),
    }
}

fn check_arcs(ambient: &Tree, n: usize) -> Result<Vec<NodeId>, SynthesisError> {
    if n == 0 {
        return Err(SynthesisError::ZeroCount);
    }
    let end_count = reduce(ambient).end_count;
    if n > end_count {
        return Err(SynthesisError::TooFewEndpoints {
            requested: n,
            end_count,
        });
    }
    Ok(ambient.leaves().into_iter().take(n).collect())
}

/// The only current neighbor of a leaf.
fn leaf_neighbor(b: &TreeBuilder, z: NodeId) -> NodeId {
    let nbrs = b.neighbors(z);
    debug_assert_eq!(nbrs.len(), 1);
    nbrs[0]
}

/// A map on (a subdivision of) `ambient` with period set `{1} ∪ n·S(key)`.
///
/// The first `n` leaves `z_i` get an arc `w_i - y_i - c_i[0] - ... - c_i[L] =
/// z_i`. Everything off the arcs is fixed, arc `i` is carried onto arc
/// `i + 1`, and the last arc returns onto the first through the interval
/// realizer of `key`.
pub fn synth_period_set(
    ambient: &Tree,
    n: usize,
    key: SharkovskiiKey,
) -> Result<SynthesizedMap, SynthesisError> {
    let k = finite_key(key)?;
    let leaves = check_arcs(ambient, n)?;
    let g = interval_images(k);
    let len = g.len() - 1;

    let mut b = ambient.to_builder();
    let mut arcs: Vec<Vec<NodeId>> = Vec::with_capacity(n);
    for (i, &z) in leaves.iter().enumerate() {
        let w = leaf_neighbor(&b, z);
        b.remove_edge(z, w)?;
        let zl = b.label(z).to_string();
        let y = add_named(&mut b, &format!("y{}", i + 1));
        let mut arc: Vec<NodeId> = (0..len)
            .map(|j| add_named(&mut b, &format!("{zl}a{j}")))
            .collect();
        arc.push(z);
        b.add_edge(w, y)?;
        b.add_edge(y, arc[0])?;
        for pair in arc.windows(2) {
            b.add_edge(pair[0], pair[1])?;
        }
        arcs.push(arc);
    }
    let tree = b.build()?;
    let mut image: Vec<NodeId> = tree.nodes().collect();
    for i in 0..n {
        for j in 0..=len {
            image[arcs[i][j].0] = if i + 1 < n {
                arcs[i + 1][j]
            } else {
                arcs[0][g[j]]
            };
        }
    }
    let map = PLTreeMap::new(tree, image)?;
    Ok(SynthesizedMap {
        map,
        declared_periods: PeriodSet::ScaledTail {
            extra: [1].into(),
            factor: n as u64,
            key,
        },
        declared_entropy_zero: k.is_power_of_two(),
        orbit: Vec::new(),
    })
}

fn edge_labels(t: &Tree) -> BTreeSet<(String, String)> {
    t.edges()
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (t.label(u).to_string(), t.label(v).to_string());
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect()
}

/// Orbit of `pattern` as nodes of `ambient`, checked to induce the same pattern.
fn orbit_in(pattern: &Pattern, ambient: &Tree) -> Result<Vec<NodeId>, SynthesisError> {
    let orbit = pattern
        .orbit()
        .iter()
        .map(|&v| {
            let label = pattern.tree().label(v);
            ambient
                .node(label)
                .ok_or_else(|| SynthesisError::AmbientMismatch(format!("no node `{label}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let induced = Pattern::validate(ambient, &orbit)?;
    if edge_labels(induced.tree()) != edge_labels(pattern.tree()) {
        return Err(SynthesisError::AmbientMismatch(
            "the orbit spans a different tree".to_string(),
        ));
    }
    Ok(orbit)
}

fn block_hull(tree: &Tree, orbit: &[NodeId], modulus: usize, residue: usize) -> Subtree {
    let nodes: Vec<NodeId> = (residue..orbit.len())
        .step_by(modulus)
        .map(|t| orbit[t])
        .collect();
    tree.hull(&nodes).expect("blocks are nonempty")
}

/// Sub-block hulls at level `to` of the block `residue` mod `from`.
fn sub_hulls(
    tree: &Tree,
    orbit: &[NodeId],
    from: usize,
    to: usize,
    residue: usize,
) -> Vec<Subtree> {
    (residue..to)
        .step_by(from)
        .map(|s| block_hull(tree, orbit, to, s))
        .collect()
}

/// Zero-entropy Markov map on (a subdivision of) `ambient` extending the
/// snowflake `pattern`.
///
/// At level `i` every block hull minus its sub-block hulls is one connected
/// region; its nodes all go to the hub of the next block's region (a new node
/// is inserted when the region is a bare edge). Hubs of level `i` then form
/// a cycle of period `m_i`, the edge entering each sub-block hull is carried
/// onto the next one, and nodes outside the orbit hull follow their nearest
/// hull node.
pub fn synth_snowflake_map(
    pattern: &Pattern,
    ambient: &Tree,
) -> Result<SynthesizedMap, SynthesisError> {
    let chain = decompose(pattern)
        .snowflake_type()
        .cloned()
        .ok_or(SynthesisError::NotSnowflake)?;
    let orbit = orbit_in(pattern, ambient)?;
    let levels = chain.levels();

    let mut bridges = Vec::new();
    for w in levels.windows(2) {
        for r in 0..w[0] {
            let family = sub_hulls(ambient, &orbit, w[0], w[1], r);
            let comps = tree::difference_components(ambient, &family)?;
            if let [c] = comps.as_slice() {
                if c.is_open_arc() {
                    bridges.push(ambient.edge(c.edges[0]));
                }
            }
        }
    }
    let mut b = ambient.to_builder();
    for (u, v) in bridges {
        b.subdivide(u, v, 1, "h")?;
    }
    let tree = b.build()?;

    let mut image: Vec<Option<NodeId>> = vec![None; tree.node_count()];
    let n = orbit.len();
    for t in 0..n {
        image[orbit[t].0] = Some(orbit[(t + 1) % n]);
    }
    for w in levels.windows(2) {
        let (from, to) = (w[0], w[1]);
        let mut residual = Vec::with_capacity(from);
        for r in 0..from {
            let outer = block_hull(&tree, &orbit, from, r);
            let inner = sub_hulls(&tree, &orbit, from, to, r);
            let rest: Vec<NodeId> = outer
                .nodes()
                .iter()
                .copied()
                .filter(|&v| inner.iter().all(|h| !h.contains(v)))
                .collect();
            if rest.is_empty() {
                return Err(PlMapError::InvariantViolation(format!(
                    "level {from}->{to}, block {r}: no room for a hub"
                ))
                .into());
            }
            residual.push(rest);
        }
        for r in 0..from {
            let hub = residual[(r + 1) % from][0];
            for &v in &residual[r] {
                image[v.0] = Some(hub);
            }
        }
    }

    // Outside the orbit hull, follow the nearest hull node.
    let hull = tree.hull(&orbit)?;
    let mut queue: VecDeque<NodeId> = hull.nodes().iter().copied().collect();
    let mut anchor: Vec<Option<NodeId>> = vec![None; tree.node_count()];
    for &v in hull.nodes() {
        anchor[v.0] = Some(v);
    }
    while let Some(u) = queue.pop_front() {
        for &w in tree.neighbors(u) {
            if anchor[w.0].is_none() {
                anchor[w.0] = anchor[u.0];
                queue.push_back(w);
            }
        }
    }
    let image: Vec<NodeId> = tree
        .nodes()
        .map(|v| {
            let a = anchor[v.0].expect("tree is connected");
            image[a.0].expect("every hull node was assigned")
        })
        .collect();

    let map = PLTreeMap::new(tree, image)?;
    Ok(SynthesizedMap {
        map,
        declared_periods: PeriodSet::finite(levels.iter().map(|&m| m as u64)),
        declared_entropy_zero: true,
        orbit,
    })
}

/// Position along a leg of time `q` in the simple orbit of period `2^k`:
/// even times fill the inner half, odd times the outer half.
fn simple_position(k: u32, q: usize) -> usize {
    if k == 0 {
        return 0;
    }
    if q.is_multiple_of(2) {
        simple_position(k - 1, q / 2)
    } else {
        (1 << (k - 1)) + simple_position(k - 1, (q - 1) / 2)
    }
}

/// A snowflake orbit of period `2^k·m` and its zero-entropy extension.
///
/// `2^k` orbit nodes go on each of the first `m` leaf edges; time `t` sits on
/// leg `t mod m` at the simple-orbit position of `t div m`.
pub fn synth_prop3(
    ambient: &Tree,
    m: usize,
    k: u32,
) -> Result<(SynthesizedMap, Pattern), SynthesisError> {
    let leaves = check_arcs(ambient, m)?;
    let per_leg = 1usize << k;
    let mut b = ambient.to_builder();
    let mut legs = Vec::with_capacity(m);
    for &z in &leaves {
        let w = leaf_neighbor(&b, z);
        legs.push(b.subdivide(w, z, per_leg, "p")?);
    }
    let tree = b.build()?;
    let orbit: Vec<NodeId> = (0..per_leg * m)
        .map(|t| legs[t % m][simple_position(k, t / m)])
        .collect();
    let pattern = Pattern::validate(&tree, &orbit)?;
    let synthesized = synth_snowflake_map(&pattern, &tree)?;
    Ok((synthesized, pattern))
}
