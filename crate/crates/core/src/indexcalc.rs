//! Multi-index combinatorics: index sets `I ⊆ {1,…,n}`, prime-power chains
//! `{1, p, …, p^r}`, truncation, the boundary move on the top exponent, the
//! admissible family `S(I)` and the weights `ε_I`, `κ_I`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A strictly increasing set of indices, all ≥ 1.
///
/// The index `k` stands for the odd generator of degree `2k - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn singleton(k: u32) -> Self {
        MultiIndex(vec![k])
    }

    /// Validates strict increase and the range `1..=n`.
    pub fn new(elems: Vec<u32>, n: u32) -> Result<Self> {
        let idx = MultiIndex::try_from(elems)?;
        if let Some(&top) = idx.0.last() {
            if top > n {
                return Err(invalid(format!("index {top} exceeds n = {n}")));
            }
        }
        Ok(idx)
    }

    pub(crate) fn from_sorted(elems: Vec<u32>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(elems.first().is_none_or(|&e| e >= 1));
        MultiIndex(elems)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = u32> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn contains(&self, k: u32) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    /// Total degree `Σ (2k - 1)` of the product of odd generators.
    pub fn odd_degree(&self) -> u32 {
        self.0.iter().map(|&k| 2 * k - 1).sum()
    }

    /// `I` with its largest element removed.
    pub fn truncate(&self) -> Result<MultiIndex> {
        if self.0.is_empty() {
            return Err(invalid("cannot truncate the empty multi-index"));
        }
        Ok(MultiIndex(self.0[..self.0.len() - 1].to_vec()))
    }

    /// Elements of `self` not in `other`.
    pub fn difference(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .copied()
                .filter(|&k| !other.contains(k))
                .collect(),
        )
    }

    pub fn filter(&self, mut keep: impl FnMut(u32) -> bool) -> MultiIndex {
        MultiIndex(self.0.iter().copied().filter(|&k| keep(k)).collect())
    }

    /// All subsets of `{lo, …, hi}` in (length, lexicographic) order.
    pub fn all_subsets(lo: u32, hi: u32) -> Vec<MultiIndex> {
        let pool: Vec<u32> = (lo..=hi).collect();
        subsets_of(&pool)
    }
}

/// All subsets of a strictly increasing pool, ordered by length and then
/// lexicographically.
pub fn subsets_of(pool: &[u32]) -> Vec<MultiIndex> {
    let m = pool.len();
    assert!(m < 32, "pool too large to enumerate");
    let mut out: Vec<MultiIndex> = (0u32..(1 << m))
        .map(|mask| {
            MultiIndex(
                (0..m)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| pool[i])
                    .collect(),
            )
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = Error;

    fn try_from(elems: Vec<u32>) -> Result<Self> {
        if elems.first() == Some(&0) {
            return Err(invalid("multi-index entries must be >= 1"));
        }
        if !elems.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid(format!(
                "multi-index {elems:?} is not strictly increasing"
            )));
        }
        Ok(MultiIndex(elems))
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(m: MultiIndex) -> Self {
        m.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Parses `"1,2,8"`; the empty string is the empty index.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(MultiIndex::empty());
        }
        let elems = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| invalid(format!("bad index {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiIndex::try_from(elems)
    }
}

/// Sorts a list of odd-degree generator indices, returning the sorted index
/// with the sign of the permutation, or `None` (the algebraic zero) when an
/// index repeats.
pub fn sort_with_sign(indices: &[u32]) -> Option<(MultiIndex, i8)> {
    let mut v = indices.to_vec();
    let mut sign = 1i8;
    // insertion sort; the number of swaps gives the parity
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) || v.first() == Some(&0) {
        return None;
    }
    Some((MultiIndex(v), sign))
}

/// Sign of the product `x_A · x_B` of two sorted sets of odd generators when
/// re-sorted, or `None` if they overlap.
pub fn merge_sign(a: &[u32], b: &[u32]) -> Option<(Vec<u32>, i8)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut swaps = 0usize;
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            // b[j] jumps over the remaining elements of a
            swaps += a.len() - i;
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some((out, if swaps.is_multiple_of(2) { 1 } else { -1 }))
}

/// The chain `{1, p, p², …, p^r}`.
pub fn prime_power_chain(p: u64, r: u32) -> Vec<u64> {
    (0..=r).map(|s| p.pow(s)).collect()
}

/// A subset `{p^{i₁}, …, p^{i_k}}` of the chain `{1, p, …, p^r}`, stored by
/// its exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PSequence {
    p: u64,
    r: u32,
    exponents: Vec<u32>,
}

impl PSequence {
    pub fn new(p: u64, r: u32, exponents: Vec<u32>) -> Result<Self> {
        if !exponents.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid(format!(
                "exponents {exponents:?} are not strictly increasing"
            )));
        }
        if exponents.last().is_some_and(|&e| e > r) {
            return Err(invalid(format!("exponents {exponents:?} exceed r = {r}")));
        }
        Ok(PSequence { p, r, exponents })
    }

    /// Reads a multi-index whose entries are all powers of `p` up to `p^r`.
    pub fn from_multi_index(p: u64, r: u32, idx: &MultiIndex) -> Result<Self> {
        let mut exps = Vec::with_capacity(idx.len());
        for k in idx.iter() {
            let mut m = k as u64;
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            if m != 1 {
                return Err(invalid(format!("{k} is not a power of {p}")));
            }
            exps.push(e);
        }
        PSequence::new(p, r, exps)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn to_multi_index(&self) -> MultiIndex {
        MultiIndex(
            self.exponents
                .iter()
                .map(|&e| self.p.pow(e) as u32)
                .collect(),
        )
    }

    /// Lowers the top exponent by one; `None` is the algebraic zero produced
    /// when the lowered exponent collides with the one below it.
    pub fn boundary(&self) -> Result<Option<PSequence>> {
        let Some(&top) = self.exponents.last() else {
            return Err(invalid("boundary of the empty sequence"));
        };
        if top == 0 {
            return Err(invalid("boundary needs a top exponent >= 1"));
        }
        let k = self.exponents.len();
        if k >= 2 && self.exponents[k - 2] == top - 1 {
            return Ok(None);
        }
        let mut exponents = self.exponents.clone();
        exponents[k - 1] = top - 1;
        Ok(Some(PSequence { exponents, ..*self }))
    }

    /// The family `S(I)` of `J = {p^{j₂},…,p^{j_k}}` with `i_s ≥ j_s > i_{s-1}`,
    /// in lexicographic order of `(j₂,…,j_k)`.
    pub fn admissible(&self) -> Result<Vec<PSequence>> {
        let k = self.exponents.len();
        if k < 2 {
            return Err(invalid(
                "the admissible family needs at least two exponents",
            ));
        }
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k - 1);
        self.enumerate_admissible(1, &mut current, &mut out);
        Ok(out)
    }

    fn enumerate_admissible(&self, s: usize, current: &mut Vec<u32>, out: &mut Vec<PSequence>) {
        if s == self.exponents.len() {
            out.push(PSequence {
                exponents: current.clone(),
                ..*self
            });
            return;
        }
        for j in (self.exponents[s - 1] + 1)..=self.exponents[s] {
            current.push(j);
            self.enumerate_admissible(s + 1, current, out);
            current.pop();
        }
    }

    /// Number of admissible `J`: `Π_{s≥2} (i_s - i_{s-1})`.
    pub fn admissible_count(&self) -> u64 {
        self.exponents
            .windows(2)
            .map(|w| (w[1] - w[0]) as u64)
            .product()
    }

    fn check_admissible(&self, j: &PSequence) -> Result<()> {
        let ok = j.p == self.p
            && j.exponents.len() + 1 == self.exponents.len()
            && j.exponents
                .iter()
                .enumerate()
                .all(|(s, &js)| self.exponents[s] < js && js <= self.exponents[s + 1]);
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "{:?} is not admissible for {:?}",
                j.exponents, self.exponents
            )))
        }
    }

    /// `ε_I(J) = Σ_{s≥2} (i_s - j_s)`.
    pub fn epsilon(&self, j: &PSequence) -> Result<u32> {
        self.check_admissible(j)?;
        Ok(self.exponents[1..]
            .iter()
            .zip(&j.exponents)
            .map(|(i, j)| i - j)
            .sum())
    }

    /// `κ_I(J) = Σ_{s≥2} (p^{i_s} - p^{j_s}) + p^{i₁} - 1`.
    pub fn kappa(&self, j: &PSequence) -> Result<u64> {
        self.check_admissible(j)?;
        let p = self.p;
        let body: u64 = self.exponents[1..]
            .iter()
            .zip(&j.exponents)
            .map(|(&i, &j)| p.pow(i) - p.pow(j))
            .sum();
        Ok(body + p.pow(self.exponents[0]) - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(p: u64, r: u32, e: &[u32]) -> PSequence {
        PSequence::new(p, r, e.to_vec()).unwrap()
    }

    fn brute_force_admissible(i: &PSequence) -> Vec<Vec<u32>> {
        // every (k-1)-subset of 0..=r, filtered by the interlacing condition
        let k = i.len();
        let pool: Vec<u32> = (0..=i.r()).collect();
        let mut out: Vec<Vec<u32>> = subsets_of(&pool)
            .into_iter()
            .filter(|s| s.len() == k - 1)
            .map(|s| s.as_slice().to_vec())
            .filter(|js| {
                js.iter()
                    .enumerate()
                    .all(|(s, &j)| i.exponents()[s] < j && j <= i.exponents()[s + 1])
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn truncate_examples() {
        let t = |s: &str| {
            s.parse::<MultiIndex>()
                .unwrap()
                .truncate()
                .unwrap()
                .to_string()
        };
        assert_eq!(t("1,2,8"), "1,2");
        assert_eq!(t("5"), "");
        assert_eq!(t("2,4,8"), "2,4");
        assert!(MultiIndex::empty().truncate().is_err());
    }

    #[test]
    fn parse_and_display() {
        let m: MultiIndex = "1, 2,8".parse().unwrap();
        assert_eq!(m.as_slice(), &[1, 2, 8]);
        assert_eq!(m.to_string(), "1,2,8");
        assert!("2,1".parse::<MultiIndex>().is_err());
        assert!("0,1".parse::<MultiIndex>().is_err());
        assert!("1,1".parse::<MultiIndex>().is_err());
        assert!(MultiIndex::new(vec![1, 9], 8).is_err());
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(
            ps(2, 3, &[0, 3]).boundary().unwrap(),
            Some(ps(2, 3, &[0, 2]))
        );
        assert_eq!(ps(2, 3, &[0, 1]).boundary().unwrap(), None);
        assert_eq!(ps(2, 3, &[2]).boundary().unwrap(), Some(ps(2, 3, &[1])));
        assert!(ps(2, 3, &[0]).boundary().is_err());
    }

    #[test]
    fn boundary_iteration_terminates() {
        for r in 1..=5 {
            for sub in subsets_of(&(0..=r).collect::<Vec<_>>()) {
                if sub.len() < 2 {
                    continue;
                }
                let i = ps(2, r, sub.as_slice());
                let gap = i.exponents()[i.len() - 1] - i.exponents()[i.len() - 2];
                let mut cur = Some(i.clone());
                for _ in 0..gap {
                    cur = cur.and_then(|c| c.boundary().unwrap());
                }
                assert!(cur.is_none(), "{:?}", i);
            }
        }
    }

    #[test]
    fn admissible_examples() {
        let exps = |v: Vec<PSequence>| v.iter().map(|j| j.exponents().to_vec()).collect::<Vec<_>>();
        assert_eq!(
            exps(ps(2, 3, &[0, 3]).admissible().unwrap()),
            vec![vec![1], vec![2], vec![3]]
        );
        assert_eq!(
            exps(ps(2, 3, &[0, 1, 2]).admissible().unwrap()),
            vec![vec![1, 2]]
        );
        assert_eq!(exps(ps(2, 3, &[1, 2]).admissible().unwrap()), vec![vec![2]]);
        assert!(ps(2, 3, &[1]).admissible().is_err());
    }

    #[test]
    fn epsilon_kappa_examples() {
        let i = ps(2, 3, &[0, 3]);
        assert_eq!(i.epsilon(&ps(2, 3, &[1])).unwrap(), 2);
        assert_eq!(i.kappa(&ps(2, 3, &[1])).unwrap(), 6);
        assert_eq!(i.epsilon(&ps(2, 3, &[3])).unwrap(), 0);
        assert_eq!(i.kappa(&ps(2, 3, &[3])).unwrap(), 0);
        let i = ps(2, 3, &[1, 2]);
        assert_eq!(i.epsilon(&ps(2, 3, &[2])).unwrap(), 0);
        assert_eq!(i.kappa(&ps(2, 3, &[2])).unwrap(), 1);
        assert!(i.epsilon(&ps(2, 3, &[1])).is_err());
    }

    #[test]
    fn admissible_count_and_epsilon_bound() {
        for (p, r) in [(2u64, 3u32), (2, 4), (3, 3), (3, 4)] {
            for sub in subsets_of(&(0..=r).collect::<Vec<_>>()) {
                if sub.len() < 2 {
                    continue;
                }
                let i = ps(p, r, sub.as_slice());
                let adm = i.admissible().unwrap();
                let got: Vec<Vec<u32>> = adm.iter().map(|j| j.exponents().to_vec()).collect();
                assert_eq!(got, brute_force_admissible(&i));
                assert_eq!(adm.len() as u64, i.admissible_count());
                let e = i.exponents();
                let bound = e[e.len() - 1] - e[0] - (e.len() as u32 - 1);
                for j in &adm {
                    assert!(i.epsilon(j).unwrap() <= bound);
                }
            }
        }
    }

    #[test]
    fn sort_with_sign_examples() {
        let (m, s) = sort_with_sign(&[8, 2]).unwrap();
        assert_eq!((m.as_slice(), s), (&[2, 8][..], -1));
        assert!(sort_with_sign(&[3, 3]).is_none());
        let (m, s) = sort_with_sign(&[2, 4, 8]).unwrap();
        assert_eq!((m.as_slice(), s), (&[2, 4, 8][..], 1));
        let (_, s) = sort_with_sign(&[3, 1, 2]).unwrap();
        assert_eq!(s, 1);
    }

    #[test]
    fn merge_sign_agrees_with_sort() {
        let pool: Vec<u32> = (1..=6).collect();
        let subs = subsets_of(&pool);
        for a in &subs {
            for b in &subs {
                let cat: Vec<u32> = a.iter().chain(b.iter()).collect();
                let merged = merge_sign(a.as_slice(), b.as_slice());
                match sort_with_sign(&cat) {
                    None => assert!(merged.is_none()),
                    Some((m, s)) => assert_eq!(merged, Some((m.as_slice().to_vec(), s))),
                }
            }
        }
    }

    #[test]
    fn psequence_roundtrip() {
        let m: MultiIndex = "1,2,8".parse().unwrap();
        let s = PSequence::from_multi_index(2, 3, &m).unwrap();
        assert_eq!(s.exponents(), &[0, 1, 3]);
        assert_eq!(s.to_multi_index(), m);
        assert!(PSequence::from_multi_index(2, 3, &"1,3".parse().unwrap()).is_err());
    }
}
