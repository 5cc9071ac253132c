//! Transition matrices and their spectral radius.

use serde::Serialize;

use super::{PLTreeMap, PlMapError};

/// Edge covering counts: entry `(e, e')` is how many times the image path of
/// `e` runs over `e'`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TransitionMatrix {
    rows: Vec<Vec<u64>>,
}

impl TransitionMatrix {
    /// Wraps raw rows; shape is checked by the consumers that need it.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> TransitionMatrix {
        TransitionMatrix { rows }
    }

    pub(super) fn of_map(map: &PLTreeMap) -> TransitionMatrix {
        let n = map.domain().edge_count();
        let mut rows = vec![vec![0u64; n]; n];
        for (e, row) in rows.iter_mut().enumerate() {
            for (target, _, _) in map.coverings(e) {
                row[target] += 1;
            }
        }
        TransitionMatrix { rows }
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.rows[i][j]
    }

    fn check_square(&self) -> Result<(), PlMapError> {
        let n = self.rows.len();
        for (row, r) in self.rows.iter().enumerate() {
            if r.len() != n {
                return Err(PlMapError::NonSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
        }
        Ok(())
    }

    /// Strongly connected components (Tarjan), each sorted, in discovery order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        Tarjan::run(&self.rows)
    }
}

struct Tarjan<'a> {
    rows: &'a [Vec<u64>],
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next: usize,
    out: Vec<Vec<usize>>,
}

impl<'a> Tarjan<'a> {
    fn run(rows: &'a [Vec<u64>]) -> Vec<Vec<usize>> {
        let n = rows.len();
        let mut t = Tarjan {
            rows,
            index: vec![None; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next: 0,
            out: Vec::new(),
        };
        for v in 0..n {
            if t.index[v].is_none() {
                t.visit(v);
            }
        }
        t.out
    }

    // Iterative to keep deep chains off the call stack.
    fn visit(&mut self, root: usize) {
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        self.open(root);
        while let Some(&mut (v, ref mut j)) = work.last_mut() {
            let n = self.rows.len();
            if *j < n {
                let w = *j;
                *j += 1;
                if self.rows[v][w] == 0 {
                    continue;
                }
                match self.index[w] {
                    None => {
                        self.open(w);
                        work.push((w, 0));
                    }
                    Some(iw) if self.on_stack[w] => {
                        self.low[v] = self.low[v].min(iw);
                    }
                    Some(_) => {}
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    self.low[parent] = self.low[parent].min(self.low[v]);
                }
                if Some(self.low[v]) == self.index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = self.stack.pop().expect("component members are stacked");
                        self.on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    self.out.push(comp);
                }
            }
        }
    }

    fn open(&mut self, v: usize) {
        self.index[v] = Some(self.next);
        self.low[v] = self.next;
        self.next += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
    }
}

/// Perron root estimate together with the exact `radius <= 1` decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralRadius {
    pub value: f64,
    pub at_most_one: bool,
}

impl SpectralRadius {
    /// Whether the numerical value and the exact flag tell the same story.
    pub fn agrees(&self, tol: f64) -> bool {
        self.at_most_one == (self.value <= 1.0 + tol)
    }
}

/// Spectral radius of a nonnegative square matrix.
///
/// The flag is combinatorial: the radius is at most 1 exactly when every
/// strongly connected component carrying an edge is a simple cycle of ones.
/// The value comes from power iteration on `A + I` restricted to each such
/// component, accelerated by repeated squaring and bracketed by the
/// Collatz-Wielandt bounds until the bracket is within `tol` relative to the
/// root.
pub fn spectral_radius(m: &TransitionMatrix, tol: f64) -> Result<SpectralRadius, PlMapError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(PlMapError::NonPositiveTolerance);
    }
    m.check_square()?;
    let rows = m.rows();
    let mut at_most_one = true;
    let mut value = 0.0f64;
    for comp in m.components() {
        let nontrivial = comp.len() > 1 || rows[comp[0]][comp[0]] > 0;
        if !nontrivial {
            continue;
        }
        let is_cycle = comp
            .iter()
            .all(|&i| comp.iter().map(|&j| rows[i][j]).sum::<u64>() == 1);
        if !is_cycle {
            at_most_one = false;
        }
        let sub: Vec<Vec<f64>> = comp
            .iter()
            .map(|&i| comp.iter().map(|&j| rows[i][j] as f64).collect())
            .collect();
        value = value.max(irreducible_radius(&sub, tol));
    }
    Ok(SpectralRadius { value, at_most_one })
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

fn normalize(a: &mut [Vec<f64>]) {
    let max = a.iter().flatten().fold(0.0f64, |m, &x| m.max(x));
    if max > 0.0 {
        a.iter_mut().flatten().for_each(|x| *x /= max);
    }
}

/// Collatz-Wielandt bracket `[min, max]` of `(Bx)_i / x_i` for positive `x`.
fn bracket(b: &[Vec<f64>], x: &[f64]) -> Option<(f64, f64)> {
    if x.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (row, &xi) in b.iter().zip(x) {
        let bx: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        let r = bx / xi;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Some((lo, hi))
}

/// Perron root of an irreducible nonnegative matrix.
fn irreducible_radius(a: &[Vec<f64>], tol: f64) -> f64 {
    let n = a.len();
    let mut b = a.to_vec();
    for (i, row) in b.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    // B = A + I is primitive with Perron root rho(A) + 1.
    let mut power = b.clone();
    let mut best = None;
    for _ in 0..64 {
        let x: Vec<f64> = power.iter().map(|row| row.iter().sum()).collect();
        if let Some((lo, hi)) = bracket(&b, &x) {
            best = Some((lo + hi) / 2.0);
            if hi - lo <= tol * (lo - 1.0).max(1.0) {
                break;
            }
        }
        power = mat_mul(&power, &power);
        normalize(&mut power);
        if n == 1 {
            break;
        }
    }
    best.expect("a primitive matrix has a positive power") - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radius(rows: Vec<Vec<u64>>) -> SpectralRadius {
        spectral_radius(&TransitionMatrix::from_rows(rows), 1e-12).unwrap()
    }

    #[test]
    fn golden_mean() {
        let r = radius(vec![vec![0, 1], vec![1, 1]]);
        assert!((r.value - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-9);
        assert!(!r.at_most_one);
    }

    #[test]
    fn permutation_and_zero() {
        let r = radius(vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.at_most_one);
        let z = radius(vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(z.value, 0.0);
        assert!(z.at_most_one);
    }

    #[test]
    fn nilpotent_feeding_a_cycle() {
        let r = radius(vec![vec![0, 1, 1], vec![0, 0, 1], vec![0, 1, 0]]);
        assert!(r.at_most_one);
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_shift_and_block_triangular() {
        let r = radius(vec![vec![2]]);
        assert!((r.value - 2.0).abs() < 1e-12);
        // Two cycles joined one way: still radius 1 but a nontrivial SCC with
        // a double entry pushes it to 2.
        let r = radius(vec![vec![1, 1], vec![0, 2]]);
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(!r.at_most_one);
    }

    #[test]
    fn periodic_irreducible() {
        // Bipartite irreducible matrix with eigenvalues +-sqrt(2).
        let r = radius(vec![vec![0, 2], vec![1, 0]]);
        assert!((r.value - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        let m = TransitionMatrix::from_rows(vec![vec![0, 1]]);
        assert!(matches!(
            spectral_radius(&m, 1e-9),
            Err(PlMapError::NonSquare { .. })
        ));
        let m = TransitionMatrix::from_rows(vec![vec![0]]);
        assert!(spectral_radius(&m, 0.0).is_err());
        assert!(spectral_radius(&m, -1.0).is_err());
    }

    #[test]
    fn components_of_a_chain() {
        let m = TransitionMatrix::from_rows(vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 0, 1]]);
        let mut comps = m.components();
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2]]);
    }
}
