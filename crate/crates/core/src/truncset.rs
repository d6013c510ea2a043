//! Finite divisor-stable truncation sets and the index arithmetic built on them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, non-empty subset of the positive integers closed under taking
/// divisors. Elements are kept strictly increasing, so `1` is always first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct TruncationSet {
    elems: Vec<u64>,
}

impl TruncationSet {
    /// Divisor closure of `elems`, sorted and deduplicated.
    pub fn new(elems: &[u64]) -> Result<Self> {
        if elems.is_empty() {
            return Err(Error::InvalidTruncationSet("empty set".into()));
        }
        if elems.contains(&0) {
            return Err(Error::InvalidTruncationSet(
                "0 is not a positive integer".into(),
            ));
        }
        let mut out: Vec<u64> = elems.iter().flat_map(|&n| divisors(n)).collect();
        out.sort_unstable();
        out.dedup();
        Ok(TruncationSet { elems: out })
    }

    /// Parses a signed list, rejecting zero and negative entries.
    pub fn from_signed(elems: &[i64]) -> Result<Self> {
        let mut v = Vec::with_capacity(elems.len());
        for &e in elems {
            if e <= 0 {
                return Err(Error::InvalidTruncationSet(format!(
                    "{e} is not a positive integer"
                )));
            }
            v.push(e as u64);
        }
        Self::new(&v)
    }

    /// `{1}`.
    pub fn one() -> Self {
        TruncationSet { elems: vec![1] }
    }

    /// Builds from a list already known to be divisor stable.
    fn from_closed(elems: Vec<u64>) -> Self {
        debug_assert!(is_divisor_stable(&elems));
        TruncationSet { elems }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elems
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elems.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    /// Never true: `1` is always a member.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max(&self) -> u64 {
        *self.elems.last().unwrap()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elems.binary_search(&n).is_ok()
    }

    /// Position of `n` in the increasing enumeration.
    pub fn index_of(&self, n: u64) -> Option<usize> {
        self.elems.binary_search(&n).ok()
    }

    pub(crate) fn require(&self, n: u64) -> Result<usize> {
        self.index_of(n).ok_or_else(|| Error::NotAMember {
            n,
            set: self.to_string(),
        })
    }

    /// Members dividing `n`, increasing. For `n` in the set these are all divisors of `n`.
    pub fn divisors_of(&self, n: u64) -> impl Iterator<Item = u64> + '_ {
        self.elems
            .iter()
            .copied()
            .take_while(move |&d| d <= n)
            .filter(move |&d| n.is_multiple_of(d))
    }

    /// Comma-separated members, the form accepted by [`FromStr`].
    pub fn to_list(&self) -> String {
        let parts: Vec<String> = self.elems.iter().map(|n| n.to_string()).collect();
        parts.join(",")
    }

    /// `S/n = {ν ∈ S | νn ∈ S}`.
    pub fn quotient(&self, n: u64) -> Result<Self> {
        self.require(n)?;
        let elems = self
            .elems
            .iter()
            .copied()
            .filter(|&v| self.contains(v * n))
            .collect();
        Ok(Self::from_closed(elems))
    }

    /// `S(n) = {ν ∈ S | n ∤ ν}` for `n > 1`.
    pub fn prime_complement(&self, n: u64) -> Result<Self> {
        self.require(n)?;
        if n == 1 {
            return Err(Error::InvalidTruncationSet("S(1) is empty".into()));
        }
        let elems = self.elems.iter().copied().filter(|&v| v % n != 0).collect();
        Ok(Self::from_closed(elems))
    }

    /// `T₁·T₂ = {nm}` for coprime sets (`T₁ ∩ T₂ = {1}`).
    pub fn product(&self, other: &TruncationSet) -> Result<Self> {
        if self.elems.iter().any(|&n| n > 1 && other.contains(n)) {
            return Err(Error::NotCoprime(self.to_string(), other.to_string()));
        }
        let mut elems: Vec<u64> = self
            .elems
            .iter()
            .flat_map(|&a| other.elems.iter().map(move |&b| a * b))
            .collect();
        elems.sort_unstable();
        elems.dedup();
        Ok(Self::from_closed(elems))
    }

    /// `n·S = {nν | ν ∈ S}` as a plain list (not divisor stable in general).
    pub fn scaled(&self, n: u64) -> Vec<u64> {
        self.elems.iter().map(|&v| v * n).collect()
    }

    pub fn is_subset_of(&self, other: &TruncationSet) -> bool {
        self.elems.iter().all(|&n| other.contains(n))
    }

    /// Every divisor-stable subset, ordered by size then lexicographically.
    pub fn sub_sets(&self) -> Vec<TruncationSet> {
        // Grow closed sets by adding elements whose proper divisors are already present.
        let mut found: Vec<Vec<u64>> = vec![vec![1]];
        let mut frontier = vec![vec![1u64]];
        while let Some(cur) = frontier.pop() {
            for &n in &self.elems {
                if cur.contains(&n) {
                    continue;
                }
                if divisors(n).iter().all(|d| *d == n || cur.contains(d)) {
                    let mut next = cur.clone();
                    next.push(n);
                    next.sort_unstable();
                    if !found.contains(&next) {
                        found.push(next.clone());
                        frontier.push(next);
                    }
                }
            }
        }
        found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        found.into_iter().map(Self::from_closed).collect()
    }

    /// Primes belonging to the set.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.elems.iter().copied().filter(|&n| is_prime(n))
    }
}

impl fmt::Display for TruncationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_list())
    }
}

impl fmt::Debug for TruncationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `"1,2,4"`, closing under divisors.
impl FromStr for TruncationSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}');
        let mut v = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let n: i64 = part
                .parse()
                .map_err(|_| Error::Parse(format!("bad truncation set entry {part:?}")))?;
            v.push(n);
        }
        Self::from_signed(&v)
    }
}

impl TryFrom<Vec<u64>> for TruncationSet {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        TruncationSet::new(&v)
    }
}

impl From<TruncationSet> for Vec<u64> {
    fn from(s: TruncationSet) -> Self {
        s.elems
    }
}

fn is_divisor_stable(elems: &[u64]) -> bool {
    elems.contains(&1)
        && elems
            .iter()
            .all(|&n| divisors(n).iter().all(|d| elems.contains(d)))
}

/// All positive divisors of `n`, increasing.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorisation as `(p, exponent)` pairs, increasing in `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Prime factors of `n` with multiplicity, increasing.
pub fn prime_chain(n: u64) -> Vec<u64> {
    factorize(n)
        .into_iter()
        .flat_map(|(p, e)| std::iter::repeat_n(p, e as usize))
        .collect()
}

/// p-adic valuation `v_p(n)` for `n ≥ 1`.
pub fn valuation(p: u64, mut n: u64) -> u32 {
    assert!(p >= 2 && n >= 1);
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[u64]) -> TruncationSet {
        TruncationSet::new(v).unwrap()
    }

    #[test]
    fn make_closes_under_divisors() {
        assert_eq!(ts(&[1]).elements(), &[1]);
        assert_eq!(ts(&[4]).elements(), &[1, 2, 4]);
        assert_eq!(ts(&[6]).elements(), &[1, 2, 3, 6]);
        assert_eq!(ts(&[6, 4, 4]).elements(), &[1, 2, 3, 4, 6]);
    }

    #[test]
    fn make_rejects_nonpositive() {
        assert!(TruncationSet::new(&[0, 2]).is_err());
        assert!(TruncationSet::from_signed(&[-3]).is_err());
        assert!(TruncationSet::new(&[]).is_err());
        assert!("1,-2".parse::<TruncationSet>().is_err());
    }

    #[test]
    fn parse_text_form() {
        let s: TruncationSet = "1,2,4".parse().unwrap();
        assert_eq!(s, ts(&[4]));
        let s: TruncationSet = "6".parse().unwrap();
        assert_eq!(s.elements(), &[1, 2, 3, 6]);
        assert_eq!(s.to_string(), "{1,2,3,6}");
    }

    #[test]
    fn quotient_examples() {
        assert_eq!(ts(&[4]).quotient(2).unwrap(), ts(&[2]));
        assert_eq!(ts(&[6]).quotient(6).unwrap(), ts(&[1]));
        for p in [2, 3, 5, 7] {
            assert_eq!(ts(&[p]).quotient(p).unwrap(), ts(&[1]));
        }
        assert!(ts(&[4]).quotient(3).is_err());
    }

    #[test]
    fn prime_complement_examples() {
        assert_eq!(ts(&[4]).prime_complement(2).unwrap(), ts(&[1]));
        assert_eq!(ts(&[6]).prime_complement(2).unwrap(), ts(&[3]));
        assert_eq!(ts(&[6]).prime_complement(3).unwrap(), ts(&[2]));
        assert!(ts(&[6]).prime_complement(1).is_err());
        assert!(ts(&[6]).prime_complement(5).is_err());
    }

    #[test]
    fn product_examples() {
        assert_eq!(ts(&[2]).product(&ts(&[3])).unwrap(), ts(&[6]));
        assert_eq!(ts(&[1]).product(&ts(&[5])).unwrap(), ts(&[5]));
        assert!(matches!(
            ts(&[2]).product(&ts(&[2])),
            Err(Error::NotCoprime(..))
        ));
    }

    /// Brute force over the power set, keeping divisor-stable members.
    fn brute_sub_sets(s: &TruncationSet) -> Vec<TruncationSet> {
        let e = s.elements();
        let mut out = Vec::new();
        for mask in 0u32..(1 << e.len()) {
            let pick: Vec<u64> = (0..e.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| e[i])
                .collect();
            if !pick.is_empty() && is_divisor_stable(&pick) {
                out.push(TruncationSet::from_closed(pick));
            }
        }
        out.sort();
        out
    }

    #[test]
    fn sub_sets_examples() {
        assert_eq!(ts(&[1]).sub_sets(), vec![ts(&[1])]);
        assert_eq!(ts(&[5]).sub_sets(), vec![ts(&[1]), ts(&[5])]);
        assert_eq!(ts(&[4]).sub_sets(), vec![ts(&[1]), ts(&[2]), ts(&[4])]);
        for s in [ts(&[12]), ts(&[6, 4, 5]), ts(&[30])] {
            let mut got = s.sub_sets();
            got.sort();
            assert_eq!(got, brute_sub_sets(&s));
        }
    }

    #[test]
    fn number_theory_helpers() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(prime_chain(12), vec![2, 2, 3]);
        assert_eq!(valuation(2, 12), 2);
        assert_eq!(valuation(3, 12), 1);
        assert_eq!(valuation(5, 12), 0);
        assert!(is_prime(7) && !is_prime(1) && !is_prime(9));
    }

    fn arb_set() -> impl Strategy<Value = TruncationSet> {
        proptest::collection::vec(1u64..=36, 1..4).prop_map(|v| TruncationSet::new(&v).unwrap())
    }

    proptest! {
        #[test]
        fn quotient_by_one_is_identity(s in arb_set()) {
            prop_assert_eq!(s.quotient(1).unwrap(), s);
        }

        #[test]
        fn quotient_composes(s in arb_set()) {
            for n in s.iter() {
                for m in s.iter() {
                    if s.contains(n * m) {
                        let lhs = s.quotient(n).unwrap().quotient(m).unwrap();
                        prop_assert_eq!(lhs, s.quotient(n * m).unwrap());
                    }
                }
            }
        }

        #[test]
        fn prime_split_is_disjoint_union(s in arb_set()) {
            for p in s.primes().collect::<Vec<_>>() {
                let mut left = s.quotient(p).unwrap().scaled(p);
                let right = s.prime_complement(p).unwrap();
                prop_assert!(left.iter().all(|x| !right.contains(*x)));
                left.extend(right.iter());
                left.sort_unstable();
                prop_assert_eq!(left.as_slice(), s.elements());
            }
        }

        #[test]
        fn product_commutes_with_quotient(a in 1u64..=8, b in 1u64..=8) {
            let t1 = TruncationSet::new(&[2u64.pow((a % 4) as u32)]).unwrap();
            let t2 = TruncationSet::new(&[3u64.pow((b % 3) as u32), 5]).unwrap();
            let prod = t1.product(&t2).unwrap();
            for n in t1.iter() {
                prop_assert_eq!(
                    prod.quotient(n).unwrap(),
                    t1.quotient(n).unwrap().product(&t2).unwrap()
                );
            }
        }
    }
}
