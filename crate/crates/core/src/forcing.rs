//! Period-forcing arithmetic: the Sharkovskii ordering and its tails,
//! ap-numbers, forced-period thresholds, entropy lower bounds and the
//! admissible periods of zero-entropy tree maps.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::f64::consts::LN_2;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForcingError {
    #[error("expected a positive integer, got {0}")]
    NonPositive(u64),
    #[error("{n} is not an ap-number for a tree with {end_count} endpoints")]
    NotApNumber { n: u64, end_count: u64 },
    #[error("endpoint count must be at least 2, got {0}")]
    TooFewEndpoints(u64),
}

/// Splits `n >= 1` into `(s, q)` with `n = 2^s * q`, `q` odd.
pub fn two_adic(n: u64) -> (u32, u64) {
    let s = n.trailing_zeros();
    (s, n >> s)
}

/// Sort key realizing the Sharkovskii ordering: odd parts > 1 by power of two
/// and then size, pure powers of two last and in decreasing order.
fn sharkovskii_key(n: u64) -> (u8, u32, u64) {
    let (s, q) = two_adic(n);
    if q > 1 {
        (0, s, q)
    } else {
        (1, u32::MAX - s, 0)
    }
}

/// Sharkovskii comparison: `Less` when `a` precedes `b` (`3` is first, `1` last).
pub fn sharkovskii_cmp(a: u64, b: u64) -> Result<Ordering, ForcingError> {
    for x in [a, b] {
        if x == 0 {
            return Err(ForcingError::NonPositive(x));
        }
    }
    Ok(sharkovskii_key(a).cmp(&sharkovskii_key(b)))
}

/// Whether `a` strictly precedes `b` in the Sharkovskii ordering.
pub fn sharkovskii_less(a: u64, b: u64) -> Result<bool, ForcingError> {
    Ok(sharkovskii_cmp(a, b)? == Ordering::Less)
}

/// Index of a Sharkovskii tail `S(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SharkovskiiKey {
    Int(u64),
    /// `2^∞`: the tail `{1, 2, 4, 8, ...}`.
    TwoInf,
    Empty,
}

impl SharkovskiiKey {
    /// `S(key)`: every `m` with `key ≺ m` or `key = m`.
    pub fn contains(&self, m: u64) -> bool {
        if m == 0 {
            return false;
        }
        match *self {
            SharkovskiiKey::Int(k) => k >= 1 && (k == m || sharkovskii_key(k) < sharkovskii_key(m)),
            SharkovskiiKey::TwoInf => m.is_power_of_two(),
            SharkovskiiKey::Empty => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SharkovskiiKey::Empty | SharkovskiiKey::Int(0))
    }
}

impl fmt::Display for SharkovskiiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SharkovskiiKey::Int(k) => write!(f, "{k}"),
            SharkovskiiKey::TwoInf => write!(f, "2^inf"),
            SharkovskiiKey::Empty => write!(f, "empty"),
        }
    }
}

/// Membership predicate for `S(key)`.
pub fn sharkovskii_tail(key: SharkovskiiKey) -> impl Fn(u64) -> bool {
    move |m| key.contains(m)
}

/// A set of periods, possibly infinite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PeriodSet {
    Finite {
        members: BTreeSet<u64>,
    },
    /// `members` together with every integer `>= from`.
    Cofinite {
        members: BTreeSet<u64>,
        from: u64,
    },
    /// `extra ∪ factor·S(key)`.
    ScaledTail {
        extra: BTreeSet<u64>,
        factor: u64,
        key: SharkovskiiKey,
    },
}

impl PeriodSet {
    pub fn finite(members: impl IntoIterator<Item = u64>) -> PeriodSet {
        PeriodSet::Finite {
            members: members.into_iter().collect(),
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            PeriodSet::Finite { members } => members.contains(&n),
            PeriodSet::Cofinite { members, from } => n >= *from || members.contains(&n),
            PeriodSet::ScaledTail { extra, factor, key } => {
                extra.contains(&n)
                    || (*factor > 0 && n.is_multiple_of(*factor) && key.contains(n / factor))
            }
        }
    }

    /// Members in `1..=cutoff`.
    pub fn up_to(&self, cutoff: u64) -> BTreeSet<u64> {
        (1..=cutoff).filter(|&n| self.contains(n)).collect()
    }
}

/// Smallest prime factor of `n >= 2`.
pub fn smallest_prime_factor(n: u64) -> u64 {
    debug_assert!(n >= 2);
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 2;
    }
    n
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && smallest_prime_factor(n) == n
}

/// `n > 1` with no prime divisor below `end_count + 1`.
pub fn is_ap_number(n: u64, end_count: u64) -> bool {
    n > 1 && smallest_prime_factor(n) > end_count
}

fn require_ap(n: u64, end_count: u64) -> Result<(), ForcingError> {
    if is_ap_number(n, end_count) {
        Ok(())
    } else {
        Err(ForcingError::NotApNumber { n, end_count })
    }
}

/// `2·End·(n − 1)`: a cycle of ap-period `n` forces every larger period.
pub fn forced_period_threshold(n: u64, end_count: u64) -> Result<u64, ForcingError> {
    require_ap(n, end_count)?;
    Ok(2 * end_count * (n - 1))
}

/// `ln 2 / (n·End − 1)`.
pub fn entropy_lower_bound(n: u64, end_count: u64) -> Result<f64, ForcingError> {
    require_ap(n, end_count)?;
    Ok(LN_2 / (n * end_count - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyBound {
    pub value: f64,
    /// The ap-factor `p` and cofactor `k` with `n = p·k`.
    pub ap_factor: u64,
    pub cofactor: u64,
}

/// Best bound `ln 2 / (k (p·End − 1))` over factorizations `n = p·k` with
/// `p` an ap-number.
pub fn best_entropy_bound(n: u64, end_count: u64) -> Option<EntropyBound> {
    let mut best: Option<EntropyBound> = None;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            for p in [d, n / d] {
                if !is_ap_number(p, end_count) {
                    continue;
                }
                let k = n / p;
                let value = LN_2 / (k * (p * end_count - 1)) as f64;
                if best.is_none_or(|b| value > b.value) {
                    best = Some(EntropyBound {
                        value,
                        ap_factor: p,
                        cofactor: k,
                    });
                }
            }
        }
        d += 1;
    }
    best
}

/// The least prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut p = n + 1;
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// `L = 2·End·(p − 1)` with `p` the least prime above `End`: periods
/// `1..=L` force all periods.
pub fn misiurewicz_threshold(end_count: u64) -> Result<u64, ForcingError> {
    if end_count < 2 {
        return Err(ForcingError::TooFewEndpoints(end_count));
    }
    Ok(2 * end_count * (next_prime(end_count) - 1))
}

/// Whether `n = 2^l·m` (m odd) with `m <= Edg` and every prime factor of `m`
/// below `End + 1`.
pub fn zero_entropy_admissible(n: u64, end_count: u64, edge_count: u64) -> bool {
    if n == 0 {
        return false;
    }
    let (_, m) = two_adic(n);
    m <= edge_count && (m == 1 || largest_prime_factor(m) <= end_count)
}

fn largest_prime_factor(mut n: u64) -> u64 {
    let mut largest = 1;
    while n > 1 {
        let p = smallest_prime_factor(n);
        largest = p;
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    largest
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_examples() {
        assert!(sharkovskii_less(3, 5).unwrap());
        assert!(sharkovskii_less(6, 8).unwrap());
        assert!(sharkovskii_less(4, 2).unwrap());
        assert!(!sharkovskii_less(1, 2).unwrap());
        assert!(sharkovskii_less(2, 1).unwrap());
        assert!(sharkovskii_less(0, 2).is_err());
    }

    #[test]
    fn ordering_matches_displayed_prefix() {
        let displayed = [
            3, 5, 7, 9, 11, 6, 10, 14, 18, 12, 20, 28, 64, 32, 16, 8, 4, 2, 1,
        ];
        for w in displayed.windows(2) {
            assert!(
                sharkovskii_less(w[0], w[1]).unwrap(),
                "{} before {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn tail_examples() {
        let s3 = sharkovskii_tail(SharkovskiiKey::Int(3));
        assert!((1..500).all(s3));
        let s2 = SharkovskiiKey::Int(2);
        assert_eq!(
            (1..100).filter(|&m| s2.contains(m)).collect::<Vec<_>>(),
            [1, 2]
        );
        assert!(SharkovskiiKey::TwoInf.contains(16));
        assert!(!SharkovskiiKey::TwoInf.contains(6));
        assert!(!SharkovskiiKey::Empty.contains(1));
        let s1 = SharkovskiiKey::Int(1);
        assert_eq!(
            (1..100).filter(|&m| s1.contains(m)).collect::<Vec<_>>(),
            [1]
        );
    }

    #[test]
    fn ap_examples() {
        assert!(is_ap_number(5, 3));
        assert!(is_ap_number(3, 2));
        assert!(!is_ap_number(6, 3));
        assert!(!is_ap_number(1, 3));
        assert!(!is_ap_number(3, 3));
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(forced_period_threshold(5, 3).unwrap(), 24);
        assert_eq!(forced_period_threshold(3, 2).unwrap(), 8);
        assert_eq!(forced_period_threshold(7, 3).unwrap(), 36);
        assert!(forced_period_threshold(6, 3).is_err());
    }

    #[test]
    fn entropy_bound_examples() {
        assert_eq!(entropy_lower_bound(3, 2).unwrap(), LN_2 / 5.0);
        assert!((entropy_lower_bound(3, 2).unwrap() - 0.138629).abs() < 1e-6);
        assert_eq!(entropy_lower_bound(5, 3).unwrap(), LN_2 / 14.0);
        assert!((entropy_lower_bound(5, 3).unwrap() - 0.049511).abs() < 1e-6);
        assert_eq!(entropy_lower_bound(5, 2).unwrap(), LN_2 / 9.0);
        assert!(entropy_lower_bound(4, 2).is_err());
    }

    #[test]
    fn best_bound_examples() {
        let b = best_entropy_bound(6, 2).unwrap();
        assert_eq!((b.ap_factor, b.cofactor), (3, 2));
        assert_eq!(b.value, LN_2 / 10.0);
        assert!(best_entropy_bound(4, 2).is_none());
        let b = best_entropy_bound(10, 3).unwrap();
        assert_eq!((b.ap_factor, b.cofactor), (5, 2));
        assert_eq!(b.value, LN_2 / 28.0);
    }

    #[test]
    fn misiurewicz_examples() {
        assert_eq!(misiurewicz_threshold(2).unwrap(), 8);
        assert_eq!(misiurewicz_threshold(3).unwrap(), 24);
        assert_eq!(misiurewicz_threshold(4).unwrap(), 32);
        assert!(misiurewicz_threshold(1).is_err());
    }

    #[test]
    fn admissibility_examples() {
        for n in 1..=64 {
            assert_eq!(
                zero_entropy_admissible(n, 2, 1),
                n.is_power_of_two(),
                "n={n}"
            );
        }
        assert!(zero_entropy_admissible(6, 3, 3));
        assert!(zero_entropy_admissible(12, 3, 3));
        assert!(!zero_entropy_admissible(5, 3, 3));
        assert!(!zero_entropy_admissible(15, 5, 5));
        assert!(zero_entropy_admissible(15, 5, 15));
    }

    #[test]
    fn period_set_membership() {
        let s = PeriodSet::ScaledTail {
            extra: [1].into(),
            factor: 3,
            key: SharkovskiiKey::Int(2),
        };
        assert_eq!(s.up_to(15), [1, 3, 6].into());
        let c = PeriodSet::Cofinite {
            members: [1, 2].into(),
            from: 5,
        };
        assert_eq!(c.up_to(7), [1, 2, 5, 6, 7].into());
    }
}
