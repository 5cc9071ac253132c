//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
//!
//! Expected values come from oracles written here: closed forms, a quadratic
//! root, an SCC-by-closure entropy test, a generative simple-orbit catalogue
//! and a rank-based Sharkovskii order.

#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashSet};
use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use treedyn_core::enumerate::enumerate_patterns;
use treedyn_core::forcing::{
    entropy_lower_bound, forced_period_threshold, is_ap_number, misiurewicz_threshold,
    sharkovskii_less, zero_entropy_admissible, SharkovskiiKey,
};
use treedyn_core::pattern::Pattern;
use treedyn_core::plmap::{
    connect_the_dots, enumerate_periods, spectral_radius, TransitionMatrix, DEFAULT_BUDGET,
};
use treedyn_core::snowflake::decompose;
use treedyn_core::synthesis::{synth_period_set, synth_prop3, synth_snowflake_map};
use treedyn_core::tree::{reduce, NodeId, Tree};

/// Tolerance for floating comparisons against closed forms.
const CLOSED_FORM_TOL: f64 = 1e-15;
/// Tolerance for the numeric spectral radius.
const RADIUS_TOL: f64 = 1e-9;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return fail(format!($($msg)+));
        }
    }};
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed > limit {
        Err(format!("{what} took {elapsed:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

/// Exact radius test by reachability closure: the radius of a 0/1 matrix is
/// at most one iff every node on a cycle has exactly one successor inside its
/// strongly connected class.
fn radius_at_most_one_oracle(m: &TransitionMatrix) -> bool {
    let n = m.size();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        for (j, r) in row.iter_mut().enumerate() {
            *r = m.get(i, j) > 0;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n).filter(|&i| reach[i][i]).all(|i| {
        let inside = (0..n).filter(|&j| m.get(i, j) > 0 && reach[j][i]).count();
        inside == 1 && (0..n).all(|j| m.get(i, j) <= 1 || !reach[j][i])
    })
}

fn criterion_formulas() -> Outcome {
    let checks = [
        ("L(2)", misiurewicz_threshold(2).ok(), 8),
        ("L(3)", misiurewicz_threshold(3).ok(), 24),
        ("threshold(5,3)", forced_period_threshold(5, 3).ok(), 24),
    ];
    for (name, got, want) in checks {
        ensure!(got == Some(want), "{name} = {got:?}, expected {want}");
    }
    let h = entropy_lower_bound(5, 3).unwrap_or(f64::NAN);
    let want = LN_2 / 14.0;
    ensure!(
        (h - want).abs() <= CLOSED_FORM_TOL,
        "entropy bound {h} vs ln2/14 = {want}"
    );
    pass("L(2)=8, L(3)=24, threshold(5,3)=24, bound(5,3)=ln2/14")
}

fn criterion_stefan() -> Outcome {
    let start = Instant::now();
    let Ok(p) = Pattern::interval(&[0, 1, 2]) else {
        return fail("interval 3-cycle rejected");
    };
    let model = connect_the_dots(&p);
    let m = model.transition_matrix();
    ensure!(
        m.rows() == [vec![0, 1], vec![1, 1]],
        "matrix {:?}",
        m.rows()
    );
    let Ok(r) = spectral_radius(&m, RADIUS_TOL) else {
        return fail("radius failed");
    };
    // Larger root of x^2 - x - 1.
    let golden = (1.0 + (1.0f64 + 4.0).sqrt()) / 2.0;
    ensure!(
        (r.value - golden).abs() <= RADIUS_TOL,
        "radius {} vs {golden}",
        r.value
    );
    ensure!(!r.at_most_one, "exact flag says radius <= 1");
    let bound = (LN_2 / 5.0).exp();
    ensure!(
        r.value >= bound,
        "radius {} below exp(ln2/5) = {bound}",
        r.value
    );
    let Ok(found) = enumerate_periods(&model, 8, DEFAULT_BUDGET) else {
        return fail("period enumeration failed");
    };
    let want: BTreeSet<u64> = (1..=8).collect();
    ensure!(
        found.is_complete(),
        "budget exceeded at {:?}",
        found.budget_exceeded
    );
    ensure!(found.periods() == want, "periods {:?}", found.periods());
    for w in found.witnesses.values() {
        ensure!(
            w.verify(&model),
            "witness for period {} does not verify",
            w.period
        );
    }
    if let Err(e) = within(start.elapsed(), Duration::from_secs(1), "Štefan oracle") {
        return fail(e);
    }
    pass(format!(
        "radius {:.12}, periods 1..8, {:?}",
        r.value,
        start.elapsed()
    ))
}

fn criterion_dichotomy() -> Outcome {
    let start = Instant::now();
    let Ok(corpus) = enumerate_patterns(6, 3) else {
        return fail("corpus refused");
    };
    let mut snowflakes = 0;
    for p in &corpus {
        let shape = reduce(p.tree());
        let n = p.period() as u64;
        let model = connect_the_dots(p);
        let m = model.transition_matrix();
        let Ok(r) = spectral_radius(&m, RADIUS_TOL) else {
            return fail("radius failed");
        };
        let oracle = radius_at_most_one_oracle(&m);
        ensure!(
            r.at_most_one == oracle,
            "flag {} but closure oracle {oracle}",
            r.at_most_one
        );
        match decompose(p).snowflake_type() {
            Some(t) => {
                snowflakes += 1;
                // A one-point hull has no reduced shape and only period 1.
                let admissible = if shape.is_degenerate() {
                    n == 1
                } else {
                    zero_entropy_admissible(n, shape.end_count as u64, shape.edge_count as u64)
                };
                ensure!(admissible, "(a) snowflake of inadmissible period {n}");
                let Ok(s) = synth_snowflake_map(p, p.tree()) else {
                    return fail("(c) synthesis refused a snowflake");
                };
                let Ok(v) = s.verify(2 * n, RADIUS_TOL, DEFAULT_BUDGET) else {
                    return fail("(c) verification failed");
                };
                let m2 = s.map.transition_matrix();
                ensure!(
                    v.radius.at_most_one && radius_at_most_one_oracle(&m2),
                    "(c) synthesized radius above one"
                );
                let want: BTreeSet<u64> = t.levels().iter().map(|&l| l as u64).collect();
                ensure!(v.found.is_complete(), "(c) budget exceeded");
                ensure!(
                    v.found.periods() == want,
                    "(c) periods {:?}, levels {want:?}",
                    v.found.periods()
                );
            }
            None => {
                ensure!(!oracle, "(b) non-snowflake of period {n} with radius <= 1");
            }
        }
    }
    if let Err(e) = within(start.elapsed(), Duration::from_secs(300), "sweep") {
        return fail(e);
    }
    pass(format!(
        "{} patterns, {snowflakes} snowflakes, 0 counterexamples, {:?}",
        corpus.len(),
        start.elapsed()
    ))
}

fn criterion_forced_tail() -> Outcome {
    let Ok(corpus) = enumerate_patterns(5, 3) else {
        return fail("corpus refused");
    };
    let mut count = 0;
    let mut slowest = Duration::ZERO;
    for p in corpus
        .iter()
        .filter(|p| p.period() == 5 && reduce(p.tree()).end_count == 3)
    {
        count += 1;
        let start = Instant::now();
        let model = connect_the_dots(p);
        let Ok(found) = enumerate_periods(&model, 40, DEFAULT_BUDGET) else {
            return fail("period enumeration failed");
        };
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        ensure!(
            found.is_complete(),
            "budget exceeded at periods {:?}",
            found.budget_exceeded
        );
        let periods = found.periods();
        let missing: Vec<u64> = (25..=40).filter(|q| !periods.contains(q)).collect();
        ensure!(missing.is_empty(), "periods {missing:?} missing");
        for q in 25..=40 {
            ensure!(
                found.witnesses[&q].verify(&model),
                "witness for {q} does not verify"
            );
        }
        if let Err(e) = within(elapsed, Duration::from_secs(60), "one pattern") {
            return fail(e);
        }
    }
    ensure!(count > 0, "no period-5 patterns on 3-endpoint hulls");
    pass(format!(
        "{count} patterns contain 25..=40, slowest {slowest:?}"
    ))
}

/// Positions along the path, counted from one end.
fn path_positions(p: &Pattern) -> Vec<usize> {
    let t = p.tree();
    let mut pos = vec![usize::MAX; t.node_count()];
    let mut prev: Option<NodeId> = None;
    let mut cur = t.leaves().first().copied().unwrap_or(NodeId(0));
    for i in 0..t.node_count() {
        pos[cur.0] = i;
        let next = t.neighbors(cur).iter().copied().find(|&w| Some(w) != prev);
        prev = Some(cur);
        match next {
            Some(w) => cur = w,
            None => break,
        }
    }
    p.orbit().iter().map(|v| pos[v.0]).collect()
}

/// Least representative under rotation of time and reflection of the line.
fn canonical(seq: &[usize]) -> Vec<usize> {
    let n = seq.len();
    let mut best: Option<Vec<usize>> = None;
    for mirror in [false, true] {
        for shift in 0..n {
            let s: Vec<usize> = (0..n)
                .map(|t| {
                    let x = seq[(t + shift) % n];
                    if mirror {
                        n - 1 - x
                    } else {
                        x
                    }
                })
                .collect();
            if best.as_ref().is_none_or(|b| s < *b) {
                best = Some(s);
            }
        }
    }
    best.unwrap_or_default()
}

/// Every simple orbit of period `n`, as position sequences, generated by
/// interleaving two simple orbits of half the period, one per half of the
/// line.
fn simple_orbits(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    if n % 2 == 1 {
        return Vec::new();
    }
    let h = n / 2;
    let halves = simple_orbits(h);
    let mut out = Vec::new();
    for a in &halves {
        for b in &halves {
            for shift in 0..h {
                for a_low in [true, false] {
                    let (oa, ob) = if a_low { (0, h) } else { (h, 0) };
                    let seq: Vec<usize> = (0..n)
                        .map(|t| {
                            if t % 2 == 0 {
                                a[t / 2] + oa
                            } else {
                                b[(t / 2 + shift) % h] + ob
                            }
                        })
                        .collect();
                    out.push(seq);
                }
            }
        }
    }
    out
}

fn criterion_interval() -> Outcome {
    let Ok(corpus) = enumerate_patterns(8, 2) else {
        return fail("corpus refused");
    };
    let mut catalogue: Vec<HashSet<Vec<usize>>> = vec![HashSet::new()];
    for n in 1..=8 {
        catalogue.push(simple_orbits(n).iter().map(|s| canonical(s)).collect());
    }
    let mut snowflakes = [0usize; 9];
    for p in &corpus {
        let n = p.period();
        let positions = path_positions(p);
        let simple = catalogue[n].contains(&canonical(&positions));
        let snowflake = decompose(p).snowflake_type().is_some();
        ensure!(
            simple == snowflake,
            "positions {positions:?}: simple {simple}, snowflake {snowflake}"
        );
        if snowflake {
            snowflakes[n] += 1;
        }
    }
    for n in 1..=8 {
        ensure!(
            snowflakes[n] == catalogue[n].len(),
            "period {n}: {} snowflakes, {} simple classes",
            snowflakes[n],
            catalogue[n].len()
        );
    }
    for n in 1..=4096u64 {
        ensure!(
            zero_entropy_admissible(n, 2, 1) == (n & (n - 1) == 0),
            "interval admissibility wrong at {n}"
        );
    }
    pass(format!(
        "{} interval patterns agree; snowflakes per period {:?}",
        corpus.len(),
        &snowflakes[1..]
    ))
}

fn periods_of(map: &treedyn_core::plmap::PLTreeMap, cutoff: u64) -> Result<BTreeSet<u64>, String> {
    let found = enumerate_periods(map, cutoff, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    if !found.is_complete() {
        return Err(format!("budget exceeded at {:?}", found.budget_exceeded));
    }
    Ok(found.periods())
}

fn criterion_synthesis() -> Outcome {
    let star = Tree::star(3);
    let cases = [
        (2u64, 15u64, vec![1u64, 3, 6]),
        (3, 12, vec![1, 3, 6, 9, 12]),
    ];
    let mut timings = Vec::new();
    for (key, cutoff, want) in cases {
        let start = Instant::now();
        let Ok(s) = synth_period_set(&star, 3, SharkovskiiKey::Int(key)) else {
            return fail(format!("period-set key {key} refused"));
        };
        let got = match periods_of(&s.map, cutoff) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let want: BTreeSet<u64> = want.into_iter().collect();
        ensure!(got == want, "key {key}: periods {got:?}, expected {want:?}");
        if let Err(e) = within(start.elapsed(), Duration::from_secs(10), "period-set") {
            return fail(e);
        }
        timings.push(start.elapsed());
    }
    let start = Instant::now();
    let Ok((s, pattern)) = synth_prop3(&star, 3, 1) else {
        return fail("prop3 refused");
    };
    ensure!(pattern.period() == 6, "prop3 period {}", pattern.period());
    let chain = decompose(&pattern)
        .snowflake_type()
        .map(|t| t.levels().to_vec());
    ensure!(chain == Some(vec![1, 3, 6]), "prop3 chain {chain:?}");
    let n = pattern.period();
    let preserved = (0..n).all(|t| s.map.node_image(s.orbit[t]) == s.orbit[(t + 1) % n]);
    ensure!(preserved, "prop3 map does not carry the orbit");
    ensure!(
        radius_at_most_one_oracle(&s.map.transition_matrix()),
        "prop3 radius above one"
    );
    match periods_of(&s.map, 12) {
        Ok(g) => ensure!(g == BTreeSet::from([1, 3, 6]), "prop3 periods {g:?}"),
        Err(e) => return fail(e),
    }
    if let Err(e) = within(start.elapsed(), Duration::from_secs(10), "prop3") {
        return fail(e);
    }
    timings.push(start.elapsed());
    pass(format!(
        "{{1,3,6}}, {{1,3,6,9,12}}, prop3 type (1,3,6); {timings:?}"
    ))
}

/// Rank in the Sharkovskii order: `3 ≺ 5 ≺ 7 ≺ ... ≺ 2·3 ≺ ... ≺ 4 ≺ 2 ≺ 1`.
fn sharkovskii_rank(n: u64) -> (u8, u64, u64) {
    let s = n.trailing_zeros() as u64;
    let odd = n >> s;
    if odd > 1 {
        (0, s, odd)
    } else {
        (1, u64::MAX - s, 0)
    }
}

fn criterion_arithmetic() -> Outcome {
    const LIMIT: u64 = 200;
    let less = |a: u64, b: u64| sharkovskii_less(a, b).unwrap_or(false);
    let mut table = vec![vec![false; LIMIT as usize + 1]; LIMIT as usize + 1];
    for a in 1..=LIMIT {
        for b in 1..=LIMIT {
            let l = less(a, b);
            table[a as usize][b as usize] = l;
            ensure!(
                l == (sharkovskii_rank(a) < sharkovskii_rank(b)),
                "order disagrees at ({a},{b})"
            );
        }
    }
    for a in 1..=LIMIT as usize {
        for b in 1..=LIMIT as usize {
            let relations = [table[a][b], table[b][a], a == b]
                .iter()
                .filter(|&&x| x)
                .count();
            ensure!(relations == 1, "trichotomy fails at ({a},{b})");
        }
    }
    for a in 1..=LIMIT as usize {
        for b in 1..=LIMIT as usize {
            if !table[a][b] {
                continue;
            }
            for c in 1..=LIMIT as usize {
                ensure!(
                    !table[b][c] || table[a][c],
                    "transitivity fails at ({a},{b},{c})"
                );
            }
        }
    }
    for end in 2..=8 {
        for edg in 1..=12 {
            for n in 1..=LIMIT {
                if zero_entropy_admissible(n, end, edg) {
                    ensure!(
                        zero_entropy_admissible(2 * n, end, edg),
                        "not closed under doubling at {n}"
                    );
                }
            }
        }
    }
    for n in 1..=10 * LIMIT {
        ensure!(
            is_ap_number(n, 2) == (n % 2 == 1 && n > 1),
            "ap status at End 2 wrong for {n}"
        );
    }
    pass("trichotomy, transitivity and rank agreement to 200; doubling closure; ap at End 2")
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 formula reproduction", criterion_formulas),
        ("2 Štefan oracle", criterion_stefan),
        (
            "3 snowflake/entropy dichotomy over the sweep corpus",
            criterion_dichotomy,
        ),
        (
            "4 forced tail for period 5 on 3-endpoint hulls",
            criterion_forced_tail,
        ),
        ("5 interval cross-validation", criterion_interval),
        ("6 synthesis verification", criterion_synthesis),
        ("7 arithmetic invariants", criterion_arithmetic),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!(
            "{} [{name}] {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.ok {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
