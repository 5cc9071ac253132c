//! Exhaustive model-scale check of the entropy dichotomy and period forcing
//! over every normalized pattern up to the configured limits.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::{enumerate_patterns, EnumerationError};
use crate::forcing::{
    entropy_lower_bound, forced_period_threshold, is_ap_number, zero_entropy_admissible,
};
use crate::pattern::Pattern;
use crate::pattern_file::write_pattern;
use crate::plmap::{connect_the_dots, enumerate_periods, spectral_radius};
use crate::snowflake::{all_chains, decompose};
use crate::synthesis::synth_snowflake_map;
use crate::tree::reduce;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub max_period: usize,
    pub max_endpoints: usize,
    /// Period cutoff for the forced-tail check.
    pub cutoff: u64,
    pub tol: f64,
    pub budget: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max_period: 6,
            max_endpoints: 3,
            cutoff: 40,
            tol: 1e-9,
            budget: crate::plmap::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub check: &'static str,
    pub pattern: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetNote {
    pub check: &'static str,
    pub pattern: String,
    pub periods: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PeriodTally {
    pub patterns: usize,
    pub snowflakes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub patterns: usize,
    pub snowflakes: usize,
    pub by_period: BTreeMap<usize, PeriodTally>,
    /// How many patterns each check was applied to.
    pub checks: BTreeMap<&'static str, usize>,
    /// Patterns admitting more than one valid level chain.
    pub multi_chain: Vec<String>,
    pub counterexamples: Vec<Counterexample>,
    pub budget_exceeded: Vec<BudgetNote>,
}

impl SweepReport {
    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Outcome for one pattern.
#[derive(Debug, Clone, Default)]
pub struct PatternOutcome {
    pub period: usize,
    pub is_snowflake: bool,
    pub multi_chain: bool,
    pub checks: Vec<&'static str>,
    pub failures: Vec<(&'static str, String)>,
    pub budget: Vec<(&'static str, Vec<u64>)>,
}

impl PatternOutcome {
    fn check(&mut self, name: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        self.checks.push(name);
        if !ok {
            self.failures.push((name, detail()));
        }
    }
}

/// Positions along the line of each orbit time, if the pattern lives on an
/// interval.
pub fn interval_positions(pattern: &Pattern) -> Option<Vec<usize>> {
    let t = pattern.tree();
    if t.nodes().any(|v| t.degree(v) > 2) {
        return None;
    }
    let start = t.nodes().find(|&v| t.degree(v) <= 1)?;
    let dist = t.distances_from(start);
    Some(pattern.orbit().iter().map(|v| dist[v.0]).collect())
}

/// Block's simple orbits: period 1, or the lower and upper halves swap and
/// the second iterate is again simple on each half.
pub fn is_simple_orbit(positions: &[usize]) -> bool {
    let n = positions.len();
    if n == 1 {
        return true;
    }
    if n % 2 == 1 {
        return false;
    }
    let half = n / 2;
    let low = |t: usize| positions[t] < half;
    if (0..n).any(|t| low(t) == low((t + 1) % n)) {
        return false;
    }
    (0..2).all(|start| {
        let sub: Vec<usize> = (start..n).step_by(2).map(|t| positions[t] % half).collect();
        is_simple_orbit(&sub)
    })
}

/// Runs every applicable check on one pattern.
pub fn check_pattern(pattern: &Pattern, config: &SweepConfig) -> PatternOutcome {
    let n = pattern.period();
    let shape = reduce(pattern.tree());
    let end = shape.end_count as u64;
    let edg = shape.edge_count as u64;
    let decomposition = decompose(pattern);
    let mut out = PatternOutcome {
        period: n,
        is_snowflake: decomposition.snowflake_type().is_some(),
        ..PatternOutcome::default()
    };

    let model = connect_the_dots(pattern);
    let realized =
        (0..n).all(|t| model.node_image(pattern.orbit()[t]) == pattern.orbit()[(t + 1) % n]);
    out.check("realization", realized, || {
        "model does not restrict to the cycle".into()
    });
    let radius = match spectral_radius(&model.transition_matrix(), config.tol) {
        Ok(r) => r,
        Err(e) => {
            out.failures.push(("radius", e.to_string()));
            return out;
        }
    };
    out.check("radius_cross_validation", radius.agrees(config.tol), || {
        format!(
            "value {} but flag at_most_one = {}",
            radius.value, radius.at_most_one
        )
    });

    if let Some(chain) = decomposition.snowflake_type() {
        // A lone point has no reduced shape; its only period is 1.
        let admissible = shape.is_degenerate() || zero_entropy_admissible(n as u64, end, edg);
        out.check("snowflake_admissible", admissible, || {
            format!("period {n} with End {end}, Edg {edg}")
        });
        let ratios_ok = shape.is_degenerate() || chain.ratios().iter().all(|&r| r as u64 <= end);
        out.check("ratio_bound", ratios_ok, || {
            format!("ratios {:?} with End {end}", chain.ratios())
        });
        out.multi_chain = all_chains(pattern).len() > 1;

        let cutoff = 2 * n as u64;
        match synth_snowflake_map(pattern, pattern.tree()) {
            Ok(s) => match s.verify(cutoff, config.tol, config.budget) {
                Ok(v) => {
                    if !v.found.is_complete() {
                        out.budget.push((
                            "snowflake_synthesis",
                            v.found.budget_exceeded.iter().copied().collect(),
                        ));
                    }
                    let ok = v.radius.at_most_one
                        && v.orbit_preserved
                        && v.found.periods() == v.expected_periods;
                    out.check("snowflake_synthesis", ok || !v.found.is_complete(), || {
                        format!(
                            "declared {:?}, found {:?}, radius flag {}, orbit preserved {}",
                            v.expected_periods,
                            v.found.periods(),
                            v.radius.at_most_one,
                            v.orbit_preserved
                        )
                    });
                }
                Err(e) => out.failures.push(("snowflake_synthesis", e.to_string())),
            },
            Err(e) => out.failures.push(("snowflake_synthesis", e.to_string())),
        }
    } else {
        out.check(
            "non_snowflake_positive_entropy",
            !radius.at_most_one,
            || format!("radius {} with flag at most one", radius.value),
        );
    }

    if end >= 2 && is_ap_number(n as u64, end) {
        let bound = entropy_lower_bound(n as u64, end).expect("ap-number").exp();
        out.check("entropy_bound", radius.value >= bound - config.tol, || {
            format!("radius {} below {bound}", radius.value)
        });
        let threshold = forced_period_threshold(n as u64, end).expect("ap-number");
        if threshold < config.cutoff {
            match enumerate_periods(&model, config.cutoff, config.budget) {
                Ok(found) => {
                    let periods = found.periods();
                    let missing: Vec<u64> = (threshold + 1..=config.cutoff)
                        .filter(|p| !periods.contains(p) && !found.budget_exceeded.contains(p))
                        .collect();
                    if !found.is_complete() {
                        out.budget.push((
                            "forced_tail",
                            found.budget_exceeded.iter().copied().collect(),
                        ));
                    }
                    out.check("forced_tail", missing.is_empty(), || {
                        format!("periods {missing:?} above {threshold} are missing")
                    });
                }
                Err(e) => out.failures.push(("forced_tail", e.to_string())),
            }
        }
    }

    if let Some(positions) = interval_positions(pattern) {
        let simple = is_simple_orbit(&positions);
        let snowflake = out.is_snowflake;
        out.check("interval_simple_orbit", simple == snowflake, || {
            format!("simple orbit {simple}, snowflake {snowflake}")
        });
    }
    out
}

/// Enumerates the corpus and checks every pattern, in parallel; the report
/// does not depend on scheduling.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport, EnumerationError> {
    let corpus = enumerate_patterns(config.max_period, config.max_endpoints)?;
    let outcomes: Vec<PatternOutcome> = corpus
        .par_iter()
        .map(|p| check_pattern(p, config))
        .collect();
    let mut report = SweepReport {
        config: *config,
        patterns: corpus.len(),
        snowflakes: 0,
        by_period: BTreeMap::new(),
        checks: BTreeMap::new(),
        multi_chain: Vec::new(),
        counterexamples: Vec::new(),
        budget_exceeded: Vec::new(),
    };
    for (p, o) in corpus.iter().zip(outcomes) {
        let tally = report.by_period.entry(o.period).or_default();
        tally.patterns += 1;
        if o.is_snowflake {
            tally.snowflakes += 1;
            report.snowflakes += 1;
        }
        for c in o.checks {
            *report.checks.entry(c).or_default() += 1;
        }
        if o.multi_chain {
            report.multi_chain.push(write_pattern(p));
        }
        for (check, detail) in o.failures {
            report.counterexamples.push(Counterexample {
                check,
                pattern: write_pattern(p),
                detail,
            });
        }
        for (check, periods) in o.budget {
            report.budget_exceeded.push(BudgetNote {
                check,
                pattern: write_pattern(p),
                periods,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_orbit_examples() {
        assert!(is_simple_orbit(&[0]));
        assert!(is_simple_orbit(&[0, 1]));
        assert!(is_simple_orbit(&[0, 2, 1, 3]));
        assert!(!is_simple_orbit(&[0, 1, 2, 3]));
        assert!(!is_simple_orbit(&[0, 1, 2]));
        // Period 8 simple orbit built by doubling.
        assert!(is_simple_orbit(&[0, 4, 2, 6, 1, 5, 3, 7]));
        // Lower half fine, upper half visited in a 3-cycle-like order.
        assert!(!is_simple_orbit(&[0, 4, 2, 5, 1, 7, 3, 6]));
    }

    #[test]
    fn small_sweep_is_clean() {
        let config = SweepConfig {
            max_period: 4,
            max_endpoints: 3,
            ..SweepConfig::default()
        };
        let r = run_sweep(&config).unwrap();
        assert!(r.is_clean(), "{:#?}", r.counterexamples);
        assert!(r.budget_exceeded.is_empty());
        assert_eq!(r.by_period[&3].patterns, 2);
        assert_eq!(r.by_period[&3].snowflakes, 1);
    }

    #[test]
    fn sweep_is_deterministic() {
        let config = SweepConfig {
            max_period: 4,
            max_endpoints: 2,
            ..SweepConfig::default()
        };
        assert_eq!(run_sweep(&config).unwrap(), run_sweep(&config).unwrap());
    }
}
