//! Combinatorial snowflakes.
//!
//! A pattern of period `N` is a snowflake of type `1 = m_0 < m_1 < ... < m_k = N`
//! when, at every level, the hulls of the residue blocks mod `m_i` are
//! pairwise disjoint and, inside each block of the previous level, the hulls
//! of its sub-blocks form a surrounding family. [`decompose`] searches all
//! divisor chains depth-first, smallest next divisor first, and returns the
//! lexicographically smallest valid chain.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::pattern::Pattern;
use crate::tree::{self, Subtree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnowflakeError {
    #[error("level step {from} -> {to} does not respect divisibility of the period {period}")]
    BadStep {
        from: usize,
        to: usize,
        period: usize,
    },
}

/// Level sequence `m_0 = 1 < m_1 < ... < m_k = N`, each dividing the next.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SnowflakeType {
    levels: Vec<usize>,
}

impl SnowflakeType {
    /// Checks the divisibility-chain invariants.
    pub fn new(levels: Vec<usize>) -> Option<SnowflakeType> {
        if levels.first() != Some(&1) {
            return None;
        }
        if levels.windows(2).any(|w| w[1] <= w[0] || w[1] % w[0] != 0) {
            return None;
        }
        Some(SnowflakeType { levels })
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn period(&self) -> usize {
        *self.levels.last().expect("chain is nonempty")
    }

    /// Successive ratios `m_{i+1} / m_i`.
    pub fn ratios(&self) -> Vec<usize> {
        self.levels.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Why a level step was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum LevelFailure {
    /// The hulls of blocks `first` and `second` (residues mod the new level) meet.
    OverlappingHulls { first: usize, second: usize },
    /// Inside the parent block `residue`, the sub-block hulls leave
    /// `components` pieces instead of one.
    NotSurrounding { residue: usize, components: usize },
}

/// One level step that the search examined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelAttempt {
    pub from: usize,
    pub to: usize,
    pub failure: Option<LevelFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    Snowflake(SnowflakeType),
    /// Every divisor chain dead-ends; `attempts` lists the steps examined.
    NotSnowflake {
        attempts: Vec<LevelAttempt>,
    },
}

impl Decomposition {
    pub fn snowflake_type(&self) -> Option<&SnowflakeType> {
        match self {
            Decomposition::Snowflake(t) => Some(t),
            Decomposition::NotSnowflake { .. } => None,
        }
    }
}

/// Level checker with cached block hulls.
struct Levels<'a> {
    pattern: &'a Pattern,
    hulls: HashMap<usize, Vec<Subtree>>,
    steps: HashMap<(usize, usize), Option<LevelFailure>>,
    attempts: Vec<LevelAttempt>,
}

impl<'a> Levels<'a> {
    fn new(pattern: &'a Pattern) -> Self {
        Levels {
            pattern,
            hulls: HashMap::new(),
            steps: HashMap::new(),
            attempts: Vec::new(),
        }
    }

    fn hulls(&mut self, m: usize) -> &[Subtree] {
        let pattern = self.pattern;
        self.hulls.entry(m).or_insert_with(|| {
            pattern
                .blocks(m)
                .expect("caller checked divisibility")
                .iter()
                .map(|b| pattern.tree().hull(&b.nodes).expect("blocks are nonempty"))
                .collect()
        })
    }

    fn step(&mut self, from: usize, to: usize) -> Option<LevelFailure> {
        if let Some(f) = self.steps.get(&(from, to)) {
            return f.clone();
        }
        let failure = self.check(from, to);
        self.steps.insert((from, to), failure.clone());
        self.attempts.push(LevelAttempt {
            from,
            to,
            failure: failure.clone(),
        });
        failure
    }

    fn check(&mut self, from: usize, to: usize) -> Option<LevelFailure> {
        let tree = self.pattern.tree();
        let hulls = self.hulls(to).to_vec();
        for i in 0..hulls.len() {
            for j in i + 1..hulls.len() {
                if !hulls[i].is_disjoint(&hulls[j]) {
                    return Some(LevelFailure::OverlappingHulls {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        for r in 0..from {
            let family: Vec<Subtree> = (r..to).step_by(from).map(|s| hulls[s].clone()).collect();
            if family.len() < 2 {
                continue;
            }
            let comps = tree::difference_components(tree, &family)
                .expect("hulls are disjoint and nonempty");
            if comps.len() != 1 {
                return Some(LevelFailure::NotSurrounding {
                    residue: r,
                    components: comps.len(),
                });
            }
        }
        None
    }
}

fn check_step(pattern: &Pattern, from: usize, to: usize) -> Result<(), SnowflakeError> {
    let n = pattern.period();
    if from == 0 || to <= from || !to.is_multiple_of(from) || !n.is_multiple_of(to) {
        return Err(SnowflakeError::BadStep {
            from,
            to,
            period: n,
        });
    }
    Ok(())
}

/// Whether the step from level modulus `m_prev` to `m` is valid: block hulls
/// mod `m` pairwise disjoint, and surrounding inside each block mod `m_prev`.
pub fn level_valid(pattern: &Pattern, m_prev: usize, m: usize) -> Result<bool, SnowflakeError> {
    Ok(level_failure(pattern, m_prev, m)?.is_none())
}

/// Like [`level_valid`] but reports the first violated condition.
pub fn level_failure(
    pattern: &Pattern,
    m_prev: usize,
    m: usize,
) -> Result<Option<LevelFailure>, SnowflakeError> {
    check_step(pattern, m_prev, m)?;
    Ok(Levels::new(pattern).check(m_prev, m))
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Depth-first search over divisor chains; `limit` bounds how many complete
/// chains are collected.
fn search(
    levels: &mut Levels<'_>,
    chain: &mut Vec<usize>,
    out: &mut Vec<SnowflakeType>,
    limit: usize,
) {
    let n = levels.pattern.period();
    let last = *chain.last().expect("chain starts at 1");
    if last == n {
        out.push(SnowflakeType {
            levels: chain.clone(),
        });
        return;
    }
    for next in divisors(n) {
        if out.len() >= limit {
            return;
        }
        if next <= last || next % last != 0 {
            continue;
        }
        if levels.step(last, next).is_none() {
            chain.push(next);
            search(levels, chain, out, limit);
            chain.pop();
        }
    }
}

/// Snowflake type of the pattern, or the list of level steps that failed.
pub fn decompose(pattern: &Pattern) -> Decomposition {
    let mut levels = Levels::new(pattern);
    let mut found = Vec::new();
    search(&mut levels, &mut vec![1], &mut found, 1);
    match found.pop() {
        Some(t) => Decomposition::Snowflake(t),
        None => Decomposition::NotSnowflake {
            attempts: levels.attempts,
        },
    }
}

pub fn is_snowflake(pattern: &Pattern) -> bool {
    decompose(pattern).snowflake_type().is_some()
}

/// Every valid chain, in lexicographic order.
pub fn all_chains(pattern: &Pattern) -> Vec<SnowflakeType> {
    let mut levels = Levels::new(pattern);
    let mut found = Vec::new();
    search(&mut levels, &mut vec![1], &mut found, usize::MAX);
    found
}
