//! Exhaustive enumeration of normalized patterns.
//!
//! A normalized pattern of period `N` with `b` branch nodes is a tree on
//! `N + b` nodes in which every leaf is an orbit node and every branch node
//! has degree at least 3. Labelled trees come from Prüfer sequences with orbit
//! node `t` labelled by its time; two labelled trees give the same pattern
//! when some tree isomorphism matches orbit labels up to a common time shift,
//! which a canonical encoding detects.

use std::collections::HashSet;

use thiserror::Error;

use crate::pattern::Pattern;
use crate::tree::{NodeId, Tree, TreeBuilder};

/// Largest supported `N + b`.
pub const MAX_NODES: usize = 9;
pub const MAX_PERIOD: usize = 8;
pub const MAX_ENDPOINTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("period limit {0} outside 1..={MAX_PERIOD}")]
    Period(usize),
    #[error("endpoint limit {0} outside 2..={MAX_ENDPOINTS}")]
    Endpoints(usize),
    #[error("period {period} with up to {branch} branch nodes exceeds {MAX_NODES} tree nodes")]
    TooLarge { period: usize, branch: usize },
}

pub fn check_limits(max_period: usize, max_endpoints: usize) -> Result<(), EnumerationError> {
    if !(1..=MAX_PERIOD).contains(&max_period) {
        return Err(EnumerationError::Period(max_period));
    }
    if !(2..=MAX_ENDPOINTS).contains(&max_endpoints) {
        return Err(EnumerationError::Endpoints(max_endpoints));
    }
    let branch = max_endpoints - 2;
    if max_period + branch > MAX_NODES {
        return Err(EnumerationError::TooLarge {
            period: max_period,
            branch,
        });
    }
    Ok(())
}

/// Edges of the labelled tree with the given Prüfer sequence.
fn prufer_edges(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf remains");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// AHU-style encoding of the tree rooted at `v`; `tag` gives node labels.
fn encode(adj: &[Vec<usize>], tag: &[u8], v: usize, parent: usize, out: &mut Vec<u8>) {
    let mut kids: Vec<Vec<u8>> = adj[v]
        .iter()
        .filter(|&&w| w != parent)
        .map(|&w| {
            let mut s = Vec::new();
            encode(adj, tag, w, v, &mut s);
            s
        })
        .collect();
    kids.sort();
    out.push(b'(');
    out.push(tag[v]);
    for k in kids {
        out.extend(k);
    }
    out.push(b')');
}

/// The one or two centers of a tree.
fn centers(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

/// Canonical form of the pattern class: minimum over time shifts and centers.
fn canonical(adj: &[Vec<usize>], period: usize) -> Vec<u8> {
    let n = adj.len();
    let cs = centers(adj);
    let mut best: Option<Vec<u8>> = None;
    for shift in 0..period {
        let tag: Vec<u8> = (0..n)
            .map(|v| {
                if v < period {
                    b'0' + ((v + period - shift) % period) as u8
                } else {
                    b'b'
                }
            })
            .collect();
        for &c in &cs {
            let mut s = Vec::new();
            encode(adj, &tag, c, usize::MAX, &mut s);
            if best.as_ref().is_none_or(|b| s < *b) {
                best = Some(s);
            }
        }
    }
    best.expect("trees are nonempty")
}

fn build_pattern(period: usize, n: usize, edges: &[(usize, usize)]) -> Pattern {
    let mut b = TreeBuilder::new();
    for v in 0..n {
        let label = if v < period {
            format!("x{v}")
        } else {
            format!("b{}", v - period)
        };
        b.add_node(&label).expect("fresh label");
    }
    for &(u, v) in edges {
        b.add_edge(NodeId(u), NodeId(v)).expect("fresh edge");
    }
    let tree: Tree = b.build().expect("Prüfer sequences give trees");
    let orbit: Vec<NodeId> = (0..period).map(NodeId).collect();
    Pattern::validate(&tree, &orbit).expect("normalized by construction")
}

/// Every normalized pattern of period `period` with exactly `branch` branch
/// nodes and at most `max_endpoints` leaves, one per isomorphism class, in
/// first-seen Prüfer order.
pub fn patterns_with(period: usize, branch: usize, max_endpoints: usize) -> Vec<Pattern> {
    let n = period + branch;
    if n == 1 {
        return vec![build_pattern(1, 1, &[])];
    }
    if n == 2 {
        return if branch == 0 {
            vec![build_pattern(2, 2, &[(0, 1)])]
        } else {
            Vec::new()
        };
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut seq = vec![0usize; n - 2];
    loop {
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let leaves = degree.iter().filter(|&&d| d == 1).count();
        if leaves <= max_endpoints && degree[period..].iter().all(|&d| d >= 3) {
            let edges = prufer_edges(&seq, n);
            let mut adj = vec![Vec::new(); n];
            for &(u, v) in &edges {
                adj[u].push(v);
                adj[v].push(u);
            }
            if seen.insert(canonical(&adj, period)) {
                out.push(build_pattern(period, n, &edges));
            }
        }
        // Next sequence in base-n counting order.
        let mut i = seq.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
        }
    }
}

/// The full corpus up to the given limits, ordered by period, then branch
/// count, then first-seen order.
pub fn enumerate_patterns(
    max_period: usize,
    max_endpoints: usize,
) -> Result<Vec<Pattern>, EnumerationError> {
    check_limits(max_period, max_endpoints)?;
    let mut out = Vec::new();
    for period in 1..=max_period {
        for branch in 0..=max_endpoints - 2 {
            out.extend(patterns_with(period, branch, max_endpoints));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cyclic permutations of `0..n` up to reflection, by brute force.
    fn interval_classes(n: usize) -> usize {
        let mut classes = HashSet::new();
        let mut rest: Vec<usize> = (1..n).collect();
        permute(&mut rest, 0, &mut |order| {
            let mut succ = vec![0; n];
            let cycle: Vec<usize> = std::iter::once(0).chain(order.iter().copied()).collect();
            for t in 0..n {
                succ[cycle[t]] = cycle[(t + 1) % n];
            }
            let mirror: Vec<usize> = (0..n).map(|i| n - 1 - succ[n - 1 - i]).collect();
            classes.insert(succ.clone().min(mirror));
        });
        classes.len()
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn interval_counts() {
        for period in 1..=7 {
            assert_eq!(
                patterns_with(period, 0, 2).len(),
                interval_classes(period),
                "N={period}"
            );
        }
    }

    #[test]
    fn three_point_patterns() {
        // The interval 3-cycle, and the 3-star rotation (its two directions
        // differ by a leaf swap).
        assert_eq!(patterns_with(3, 0, 3).len(), 1);
        assert_eq!(patterns_with(3, 1, 3).len(), 1);
    }

    #[test]
    fn star_center_orbit_point() {
        let pats = patterns_with(4, 0, 3);
        let stars = pats.iter().filter(|p| p.tree().leaves().len() == 3).count();
        let paths = pats.len() - stars;
        assert_eq!(paths, interval_classes(4));
        // The shift puts the center at time 0 and any leaf permutation is a
        // tree automorphism.
        assert_eq!(stars, 1);
    }

    #[test]
    fn limits_are_enforced() {
        assert!(enumerate_patterns(9, 2).is_err());
        assert!(enumerate_patterns(8, 4).is_err());
        assert!(enumerate_patterns(3, 1).is_err());
        assert!(enumerate_patterns(0, 3).is_err());
        assert!(check_limits(7, 4).is_ok());
    }

    #[test]
    fn all_patterns_are_normalized() {
        for p in enumerate_patterns(5, 3).unwrap() {
            let t = p.tree();
            for v in t.nodes() {
                if !p.is_marked(v) {
                    assert!(t.degree(v) >= 3);
                }
            }
            assert!(t.leaves().len() <= 3);
        }
    }
}
