//! Periodic points of Markov PL maps by loop solving.
//!
//! A periodic point off the nodes never meets a node, so its itinerary is a
//! loop `e_0 -> e_1 -> ... -> e_0` of the Markov graph and it is a fixed
//! point of the composed inverse branches along that loop, an affine map of
//! `e_0` into itself. Periodic nodes are read off the node map directly.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use super::{PLTreeMap, PlMapError, Point};

/// Default cap on search steps spent on a single period.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// A periodic point with its exact period and, for points inside edges, the
/// edge itinerary it was solved from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicWitness {
    pub period: u64,
    pub point: Point,
    pub loop_edges: Vec<usize>,
}

impl PeriodicWitness {
    /// Re-checks by exact iteration that `period` is the least return time.
    pub fn verify(&self, map: &PLTreeMap) -> bool {
        exact_period(map, &self.point, self.period) == Some(self.period)
    }
}

/// Least `k in 1..=max` with `f^k(p) = p`.
pub fn exact_period(map: &PLTreeMap, p: &Point, max: u64) -> Option<u64> {
    let mut q = p.clone();
    for k in 1..=max {
        q = map.apply(&q).ok()?;
        if q == *p {
            return Some(k);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodEnumeration {
    pub cutoff: u64,
    pub witnesses: BTreeMap<u64, PeriodicWitness>,
    /// Periods whose search ran out of budget before finding a witness.
    pub budget_exceeded: BTreeSet<u64>,
}

impl PeriodEnumeration {
    pub fn periods(&self) -> BTreeSet<u64> {
        self.witnesses.keys().copied().collect()
    }

    pub fn is_complete(&self) -> bool {
        self.budget_exceeded.is_empty()
    }
}

/// Inverse branch `s -> (tau * s + k) / d` from a covered edge back into the
/// covering edge.
#[derive(Debug, Clone, Copy)]
struct Branch {
    target: usize,
    tau: i128,
    k: i128,
    d: i128,
}

/// `s -> (sigma * s + c) / den`.
#[derive(Debug, Clone, Copy)]
struct Affine {
    sigma: i128,
    c: i128,
    den: i128,
}

impl Affine {
    const IDENTITY: Affine = Affine {
        sigma: 1,
        c: 0,
        den: 1,
    };

    fn then(self, b: &Branch) -> Option<Affine> {
        Some(Affine {
            sigma: self.sigma * b.tau,
            c: self.c.checked_mul(b.d)?.checked_add(self.sigma * b.k)?,
            den: self.den.checked_mul(b.d)?,
        })
    }
}

struct Graph {
    succ: Vec<Vec<Branch>>,
    /// `reach[k][x]` is the bitset of edges reachable from `x` in exactly `k` steps.
    reach: Vec<Vec<Vec<u64>>>,
}

impl Graph {
    fn new(map: &PLTreeMap, max_len: usize) -> Graph {
        let n = map.domain().edge_count();
        let succ: Vec<Vec<Branch>> = (0..n)
            .map(|e| {
                let d = map.edge_path(e).len() as i128 - 1;
                map.coverings(e)
                    .into_iter()
                    .map(|(target, j, reversed)| Branch {
                        target,
                        tau: if reversed { -1 } else { 1 },
                        k: j as i128 + i128::from(reversed),
                        d,
                    })
                    .collect()
            })
            .collect();
        let words = n.div_ceil(64).max(1);
        let mut reach = Vec::with_capacity(max_len + 1);
        let mut id = vec![vec![0u64; words]; n];
        for (x, row) in id.iter_mut().enumerate() {
            row[x / 64] |= 1 << (x % 64);
        }
        reach.push(id);
        for k in 1..=max_len {
            let prev: &Vec<Vec<u64>> = &reach[k - 1];
            let next: Vec<Vec<u64>> = (0..n)
                .map(|x| {
                    let mut row = vec![0u64; words];
                    for b in &succ[x] {
                        for (w, p) in row.iter_mut().zip(&prev[b.target]) {
                            *w |= p;
                        }
                    }
                    row
                })
                .collect();
            reach.push(next);
        }
        Graph { succ, reach }
    }

    fn reaches(&self, steps: usize, from: usize, to: usize) -> bool {
        self.reach[steps][from][to / 64] >> (to % 64) & 1 == 1
    }
}

enum Search {
    Found(PeriodicWitness),
    Absent,
    OutOfBudget,
}

struct LoopSearch<'a> {
    map: &'a PLTreeMap,
    graph: &'a Graph,
    p: usize,
    start: usize,
    budget: u64,
    steps: u64,
    path: Vec<usize>,
    branches: Vec<Branch>,
}

impl LoopSearch<'_> {
    /// Depth-first over loops whose smallest edge is `start`; `Err` when the
    /// budget runs out.
    fn dfs(&mut self, at: usize, comp: Option<Affine>) -> Result<Option<PeriodicWitness>, ()> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(());
        }
        let depth = self.path.len();
        for bi in 0..self.graph.succ[at].len() {
            let b = self.graph.succ[at][bi];
            if b.target < self.start {
                continue;
            }
            let next = comp.and_then(|c| c.then(&b));
            if depth == self.p {
                if b.target != self.start {
                    continue;
                }
                self.branches.push(b);
                let found = self.close(next);
                self.branches.pop();
                if found.is_some() {
                    return Ok(found);
                }
            } else {
                if !self.graph.reaches(self.p - depth, b.target, self.start) {
                    continue;
                }
                self.path.push(b.target);
                self.branches.push(b);
                let found = self.dfs(b.target, next);
                self.path.pop();
                self.branches.pop();
                if let Some(w) = found? {
                    return Ok(Some(w));
                }
            }
        }
        Ok(None)
    }

    /// Solves the closed loop in `self.path` / `self.branches`.
    fn close(&self, comp: Option<Affine>) -> Option<PeriodicWitness> {
        let (sigma, c, den) = match comp {
            Some(a) => (
                BigInt::from(a.sigma),
                BigInt::from(a.c),
                BigInt::from(a.den),
            ),
            None => {
                let (mut sigma, mut c, mut den) =
                    (BigInt::from(1), BigInt::from(0), BigInt::from(1));
                for b in &self.branches {
                    c = &c * b.d + &sigma * b.k;
                    den *= b.d;
                    sigma *= b.tau;
                }
                (sigma, c, den)
            }
        };
        let gap = &den - &sigma;
        let t = if gap == BigInt::from(0) {
            // The loop composes to the identity on e_0: test a generic point.
            BigRational::new(BigInt::from(1), BigInt::from(3))
        } else {
            BigRational::new(c, gap)
        };
        let point = Point::on_edge(self.map.domain(), self.start, t).ok()?;
        if matches!(point, Point::Node(_)) {
            return None;
        }
        let p = self.p as u64;
        if exact_period(self.map, &point, p) != Some(p) {
            return None;
        }
        Some(PeriodicWitness {
            period: p,
            point,
            loop_edges: self.path.clone(),
        })
    }
}

fn search_period(map: &PLTreeMap, graph: &Graph, p: usize, budget: u64) -> Search {
    let n = map.domain().edge_count();
    let mut steps = 0;
    for start in 0..n {
        if !graph.reaches(p, start, start) {
            continue;
        }
        let mut s = LoopSearch {
            map,
            graph,
            p,
            start,
            budget,
            steps,
            path: vec![start],
            branches: Vec::with_capacity(p),
        };
        match s.dfs(start, Some(Affine::IDENTITY)) {
            Ok(Some(w)) => return Search::Found(w),
            Ok(None) => steps = s.steps,
            Err(()) => return Search::OutOfBudget,
        }
    }
    Search::Absent
}

/// Periods of the node map's cycles, with the smallest node of each period.
fn node_cycles(map: &PLTreeMap, cutoff: u64) -> BTreeMap<u64, PeriodicWitness> {
    let mut out = BTreeMap::new();
    for v in map.domain().nodes() {
        let mut w = map.node_image(v);
        let mut k = 1u64;
        while w != v && k <= map.domain().node_count() as u64 {
            w = map.node_image(w);
            k += 1;
        }
        if w == v && k <= cutoff {
            out.entry(k).or_insert_with(|| PeriodicWitness {
                period: k,
                point: Point::Node(v),
                loop_edges: Vec::new(),
            });
        }
    }
    out
}

/// Every exact period `<= cutoff`, one witness each. Each period gets its own
/// step `budget`; periods whose search exhausts it are reported, not dropped.
pub fn enumerate_periods(
    map: &PLTreeMap,
    cutoff: u64,
    budget: u64,
) -> Result<PeriodEnumeration, PlMapError> {
    if cutoff == 0 {
        return Err(PlMapError::ZeroCutoff);
    }
    let mut witnesses = node_cycles(map, cutoff);
    let graph = Graph::new(map, cutoff as usize);
    let todo: Vec<u64> = (1..=cutoff)
        .filter(|p| !witnesses.contains_key(p))
        .collect();
    let results: Vec<(u64, Search)> = todo
        .par_iter()
        .map(|&p| (p, search_period(map, &graph, p as usize, budget)))
        .collect();
    let mut budget_exceeded = BTreeSet::new();
    for (p, r) in results {
        match r {
            Search::Found(w) => {
                witnesses.insert(p, w);
            }
            Search::OutOfBudget => {
                budget_exceeded.insert(p);
            }
            Search::Absent => {}
        }
    }
    Ok(PeriodEnumeration {
        cutoff,
        witnesses,
        budget_exceeded,
    })
}

/// One exact fixed point: the smallest fixed node, or else the solution on
/// the first self-covering edge.
pub fn find_fixed_point(map: &PLTreeMap) -> Result<PeriodicWitness, PlMapError> {
    if let Some(v) = map.domain().nodes().find(|&v| map.node_image(v) == v) {
        return Ok(PeriodicWitness {
            period: 1,
            point: Point::Node(v),
            loop_edges: Vec::new(),
        });
    }
    let graph = Graph::new(map, 1);
    match search_period(map, &graph, 1, u64::MAX) {
        Search::Found(w) => Ok(w),
        _ => Err(PlMapError::InvariantViolation(format!(
            "no fixed point on a tree with {} nodes",
            map.domain().node_count()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Pattern;
    use crate::plmap::connect_the_dots;
    use crate::tree::{NodeId, Tree};

    fn periods(map: &PLTreeMap, cutoff: u64) -> Vec<u64> {
        let e = enumerate_periods(map, cutoff, DEFAULT_BUDGET).unwrap();
        assert!(e.is_complete());
        for w in e.witnesses.values() {
            assert!(w.verify(map), "{w:?}");
        }
        e.periods().into_iter().collect()
    }

    #[test]
    fn stefan_has_everything() {
        let f = connect_the_dots(&Pattern::interval(&[0, 1, 2]).unwrap());
        assert_eq!(periods(&f, 8), (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn stefan_fixed_point() {
        let f = connect_the_dots(&Pattern::interval(&[0, 1, 2]).unwrap());
        let w = find_fixed_point(&f).unwrap();
        assert_eq!(
            w.point,
            Point::Edge {
                edge: 1,
                t: BigRational::new(1.into(), 3.into())
            }
        );
    }

    #[test]
    fn star_rotation_periods() {
        let p = Pattern::from_labels(
            &["o", "x", "y", "z"],
            &[("o", "x"), ("o", "y"), ("o", "z")],
            &["x", "y", "z"],
        )
        .unwrap();
        let f = connect_the_dots(&p);
        assert_eq!(periods(&f, 10), [1, 3]);
        assert_eq!(
            find_fixed_point(&f).unwrap().point,
            Point::Node(p.tree().node("o").unwrap())
        );
    }

    #[test]
    fn identity_maps() {
        let f = PLTreeMap::identity(Tree::path(1));
        assert_eq!(periods(&f, 5), [1]);
        let f = PLTreeMap::identity(Tree::star(3));
        assert_eq!(periods(&f, 5), [1]);
    }

    #[test]
    fn flip_gives_two() {
        let f = PLTreeMap::new(Tree::path(2), vec![NodeId(1), NodeId(0)]).unwrap();
        assert_eq!(periods(&f, 6), [1, 2]);
        let fixed = find_fixed_point(&f).unwrap();
        assert_eq!(
            fixed.point,
            Point::Edge {
                edge: 0,
                t: BigRational::new(1.into(), 2.into())
            }
        );
    }

    #[test]
    fn tiny_budget_is_reported() {
        let f = connect_the_dots(&Pattern::interval(&[0, 1, 2]).unwrap());
        let e = enumerate_periods(&f, 12, 1).unwrap();
        assert!(!e.budget_exceeded.is_empty());
        assert!(e
            .budget_exceeded
            .iter()
            .all(|p| !e.witnesses.contains_key(p)));
    }

    #[test]
    fn zero_cutoff_rejected() {
        let f = PLTreeMap::identity(Tree::path(2));
        assert_eq!(enumerate_periods(&f, 0, 10), Err(PlMapError::ZeroCutoff));
    }
}
