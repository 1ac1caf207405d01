//! Class combinations: surjective maps from `K0` observed classes onto `K`
//! combined classes.
//!
//! A [`Partition`] is stored in restricted-growth form: scanning the
//! assignment left to right, each new combined label is one larger than the
//! largest seen so far. Two partitions with the same grouping therefore have
//! identical assignment vectors, which makes equality and hashing `O(K0)`.
//!
//! Internally every index is 0-based. The text form (`{(1,2),3,(4,5)}`) and
//! [`Partition::apply`] use the 1-based labels users see.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest `K0` for which nominal partitions are materialized.
/// Bell(15) already exceeds 10^9.
pub const NOMINAL_ENUMERATION_CAP: usize = 14;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Relabels `raw` by order of first appearance.
    ///
    /// Any sequence of integers describes a grouping, so the only failure is
    /// an empty input; gaps in the raw labels disappear under relabeling.
    pub fn canonicalize(raw: &[usize]) -> Result<Partition> {
        if raw.is_empty() {
            return Err(Error::EmptyAssignment);
        }
        let mut seen: Vec<(usize, usize)> = Vec::new();
        let mut assignment = Vec::with_capacity(raw.len());
        for &r in raw {
            let label = match seen.iter().find(|(raw_label, _)| *raw_label == r) {
                Some(&(_, c)) => c,
                None => {
                    let c = seen.len();
                    seen.push((r, c));
                    c
                }
            };
            assignment.push(label);
        }
        Ok(Partition {
            assignment,
            k: seen.len(),
        })
    }

    pub fn identity(k0: usize) -> Partition {
        assert!(k0 >= 1, "a partition needs at least one class");
        Partition {
            assignment: (0..k0).collect(),
            k: k0,
        }
    }

    pub fn all_combined(k0: usize) -> Partition {
        assert!(k0 >= 1, "a partition needs at least one class");
        Partition {
            assignment: vec![0; k0],
            k: 1,
        }
    }

    /// Builds a partition from groups of 0-based original classes.
    pub fn from_groups(k0: usize, groups: &[Vec<usize>]) -> Result<Partition> {
        let mut raw = vec![usize::MAX; k0];
        for (g, members) in groups.iter().enumerate() {
            for &m in members {
                if m >= k0 {
                    return Err(Error::LabelOutOfRange { label: m + 1, k0 });
                }
                if raw[m] != usize::MAX {
                    return Err(Error::InvalidConfig(format!(
                        "class {} appears in two groups",
                        m + 1
                    )));
                }
                raw[m] = g;
            }
        }
        if let Some(missing) = raw.iter().position(|&r| r == usize::MAX) {
            return Err(Error::InvalidConfig(format!(
                "class {} is not assigned to any group",
                missing + 1
            )));
        }
        Partition::canonicalize(&raw)
    }

    pub fn k0(&self) -> usize {
        self.assignment.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Canonical 0-based assignment, `assignment()[c0]` is the combined class of `c0`.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// 0-based lookup. Panics when `class` is not below `k0`.
    #[inline]
    pub fn class_of(&self, class: usize) -> usize {
        self.assignment[class]
    }

    /// `π_K(label)` with 1-based labels on both sides.
    pub fn apply(&self, label: usize) -> Result<usize> {
        if label == 0 || label > self.k0() {
            return Err(Error::LabelOutOfRange {
                label,
                k0: self.k0(),
            });
        }
        Ok(self.assignment[label - 1] + 1)
    }

    /// Preimages of each combined class (0-based members, ascending).
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k];
        for (c0, &c) in self.assignment.iter().enumerate() {
            groups[c].push(c0);
        }
        groups
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn is_identity(&self) -> bool {
        self.k == self.k0()
    }

    /// True when every combined class is a run of consecutive original classes.
    pub fn is_ordinal(&self) -> bool {
        // In restricted-growth form a contiguous-block partition is non-decreasing.
        self.assignment.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1)
    }

    /// Merges combined classes `a` and `b` (0-based).
    pub fn merge(&self, a: usize, b: usize) -> Partition {
        assert!(a < self.k && b < self.k && a != b, "invalid merge pair");
        let (keep, drop) = if a < b { (a, b) } else { (b, a) };
        let raw: Vec<usize> = self
            .assignment
            .iter()
            .map(|&c| if c == drop { keep } else { c })
            .collect();
        Partition::canonicalize(&raw).expect("non-empty")
    }

    /// Pairs of combined classes that may be merged, in ascending order.
    pub fn merge_pairs(&self, ordinal: bool, forbidden: &ForbiddenMerges) -> Vec<(usize, usize)> {
        if self.k < 2 {
            return Vec::new();
        }
        let groups = self.groups();
        let mut pairs = Vec::new();
        for i in 0..self.k {
            for j in (i + 1)..self.k {
                if ordinal && j != i + 1 {
                    continue;
                }
                if forbidden.blocks(&groups[i], &groups[j]) {
                    continue;
                }
                pairs.push((i, j));
            }
        }
        pairs
    }

    /// Every partition reachable by merging exactly two combined classes.
    pub fn neighbors(&self, ordinal: bool, forbidden: &ForbiddenMerges) -> Vec<Partition> {
        self.merge_pairs(ordinal, forbidden)
            .into_iter()
            .map(|(i, j)| self.merge(i, j))
            .collect()
    }

    /// True when every class of `self` lies inside one class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.k0() != coarser.k0() {
            return false;
        }
        let mut image = vec![usize::MAX; self.k];
        for (c0, &c) in self.assignment.iter().enumerate() {
            let target = coarser.assignment[c0];
            if image[c] == usize::MAX {
                image[c] = target;
            } else if image[c] != target {
                return false;
            }
        }
        true
    }

    pub fn encode_ordinal(&self) -> Result<OrdinalEncoding> {
        if !self.is_ordinal() {
            return Err(Error::NotOrdinal(self.to_string()));
        }
        Ok(OrdinalEncoding {
            bits: self.assignment.windows(2).map(|w| w[1] != w[0]).collect(),
        })
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({self})")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (g, members) in self.groups().iter().enumerate() {
            if g > 0 {
                f.write_str(",")?;
            }
            if members.len() == 1 {
                write!(f, "{}", members[0] + 1)?;
            } else {
                f.write_str("(")?;
                for (m, c0) in members.iter().enumerate() {
                    if m > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", c0 + 1)?;
                }
                f.write_str(")")?;
            }
        }
        f.write_str("}")
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(text: &str) -> Result<Partition> {
        let fail = |reason: &str| Error::PartitionSyntax {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let body = compact
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| fail("expected surrounding braces"))?;
        if body.is_empty() {
            return Err(fail("no classes"));
        }

        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut rest = body;
        loop {
            let (item, tail) = if let Some(inner) = rest.strip_prefix('(') {
                let close = inner.find(')').ok_or_else(|| fail("unclosed parenthesis"))?;
                (&inner[..close], &inner[close + 1..])
            } else {
                match rest.find(',') {
                    Some(p) => (&rest[..p], &rest[p..]),
                    None => (rest, ""),
                }
            };
            let mut members = Vec::new();
            for token in item.split(',') {
                let label: usize = token
                    .parse()
                    .map_err(|_| fail(&format!("bad label {token:?}")))?;
                if label == 0 {
                    return Err(fail("labels are 1-based"));
                }
                members.push(label - 1);
            }
            groups.push(members);
            if tail.is_empty() {
                break;
            }
            rest = tail
                .strip_prefix(',')
                .ok_or_else(|| fail("expected ',' between classes"))?;
            if rest.is_empty() {
                return Err(fail("trailing comma"));
            }
        }

        let k0: usize = groups.iter().map(Vec::len).sum();
        Partition::from_groups(k0, &groups).map_err(|e| fail(&e.to_string()))
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Stars-and-bars code of an ordinal partition: `bits[i]` is set when
/// original classes `i` and `i + 1` (0-based) are in different groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrdinalEncoding {
    bits: Vec<bool>,
}

impl OrdinalEncoding {
    pub fn new(bits: Vec<bool>) -> OrdinalEncoding {
        OrdinalEncoding { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn decode(&self) -> Partition {
        let mut assignment = Vec::with_capacity(self.bits.len() + 1);
        let mut current = 0;
        assignment.push(0);
        for &bar in &self.bits {
            if bar {
                current += 1;
            }
            assignment.push(current);
        }
        Partition {
            assignment,
            k: current + 1,
        }
    }

    pub fn hamming(&self, other: &OrdinalEncoding) -> Result<usize> {
        if self.bits.len() != other.bits.len() {
            return Err(Error::LengthMismatch {
                left: self.bits.len(),
                right: other.bits.len(),
            });
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }
}

impl fmt::Display for OrdinalEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for OrdinalEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<OrdinalEncoding> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::PartitionSyntax {
                    text: s.to_string(),
                    reason: "encodings contain only 0 and 1".into(),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(OrdinalEncoding::new)
    }
}

/// Pairs of original classes that must never share a combined class.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ForbiddenMerges {
    pairs: BTreeSet<(usize, usize)>,
}

impl ForbiddenMerges {
    pub fn none() -> ForbiddenMerges {
        ForbiddenMerges::default()
    }

    /// Pairs given as 0-based original classes.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> ForbiddenMerges {
        ForbiddenMerges {
            pairs: pairs
                .into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Whether putting `left` and `right` into one class joins a forbidden pair.
    pub fn blocks(&self, left: &[usize], right: &[usize]) -> bool {
        if self.pairs.is_empty() {
            return false;
        }
        left.iter().any(|&a| {
            right
                .iter()
                .any(|&b| self.pairs.contains(&(a.min(b), a.max(b))))
        })
    }

    /// Whether `p` keeps every forbidden pair apart.
    pub fn admits(&self, p: &Partition) -> bool {
        self.pairs.iter().all(|&(a, b)| {
            a >= p.k0() || b >= p.k0() || p.class_of(a) != p.class_of(b)
        })
    }
}

impl fmt::Display for ForbiddenMerges {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}-{}", a + 1, b + 1)?;
        }
        Ok(())
    }
}

/// Parses `"1-2,5-6"` (1-based pairs).
impl FromStr for ForbiddenMerges {
    type Err = Error;

    fn from_str(s: &str) -> Result<ForbiddenMerges> {
        let bad = || Error::InvalidConfig(format!("bad forbidden-merge list {s:?}"));
        let mut pairs = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (a, b) = item.split_once('-').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a == 0 || b == 0 {
                return Err(bad());
            }
            pairs.push((a - 1, b - 1));
        }
        Ok(ForbiddenMerges::new(pairs))
    }
}

impl Serialize for ForbiddenMerges {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ForbiddenMerges {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Contiguous-block partitions of `k0` ordered classes, by ascending bar mask.
pub fn enumerate_ordinal(k0: usize, include_identity: bool) -> OrdinalPartitions {
    assert!((1..=64).contains(&k0), "ordinal enumeration supports 1..=64 classes");
    let bars = k0 - 1;
    let end = if bars == 64 { u128::from(u64::MAX) + 1 } else { 1u128 << bars };
    OrdinalPartitions {
        bars,
        next: 0,
        end,
        include_identity,
    }
}

pub struct OrdinalPartitions {
    bars: usize,
    next: u128,
    end: u128,
    include_identity: bool,
}

impl Iterator for OrdinalPartitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        while self.next < self.end {
            let mask = self.next;
            self.next += 1;
            if !self.include_identity && mask == self.end - 1 {
                continue;
            }
            let bits = (0..self.bars).map(|i| mask >> i & 1 == 1).collect();
            return Some(OrdinalEncoding::new(bits).decode());
        }
        None
    }
}

/// All set partitions of `k0` classes as restricted-growth strings, from
/// the all-combined partition up to the identity.
pub fn enumerate_nominal(k0: usize, include_identity: bool) -> Result<NominalPartitions> {
    assert!(k0 >= 1, "a partition needs at least one class");
    if k0 > NOMINAL_ENUMERATION_CAP {
        return Err(Error::TooManyClasses {
            k0,
            cap: NOMINAL_ENUMERATION_CAP,
        });
    }
    Ok(NominalPartitions {
        current: Some(vec![0; k0]),
        include_identity,
    })
}

pub struct NominalPartitions {
    current: Option<Vec<usize>>,
    include_identity: bool,
}

impl NominalPartitions {
    fn advance(rgs: &[usize]) -> Option<Vec<usize>> {
        let n = rgs.len();
        // prefix_max[i] = max(rgs[0..i])
        let mut prefix_max = vec![0; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(rgs[i - 1]);
        }
        for i in (1..n).rev() {
            if rgs[i] <= prefix_max[i] {
                let mut next = rgs.to_vec();
                next[i] += 1;
                for slot in next.iter_mut().skip(i + 1) {
                    *slot = 0;
                }
                return Some(next);
            }
        }
        None
    }
}

impl Iterator for NominalPartitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        loop {
            let rgs = self.current.take()?;
            self.current = Self::advance(&rgs);
            let k = rgs.iter().max().map_or(0, |m| m + 1);
            if !self.include_identity && k == rgs.len() {
                continue;
            }
            return Some(Partition { assignment: rgs, k });
        }
    }
}

/// `2^(k0-1)`, minus one without the identity.
pub fn count_ordinal(k0: usize, include_identity: bool) -> u128 {
    assert!((1..=128).contains(&k0));
    let all = 1u128 << (k0 - 1);
    if include_identity {
        all
    } else {
        all - 1
    }
}

/// Bell(k0) through Stirling numbers of the second kind, minus one without the identity.
pub fn count_nominal(k0: usize, include_identity: bool) -> u128 {
    assert!(k0 >= 1);
    // S(n, k) = k S(n-1, k) + S(n-1, k-1)
    let mut row = vec![1u128];
    for n in 1..=k0 {
        let mut next = vec![0u128; n + 1];
        for k in 1..=n {
            let stay = if k < row.len() { k as u128 * row[k] } else { 0 };
            next[k] = stay + row[k - 1];
        }
        row = next;
    }
    let bell: u128 = row.iter().sum();
    if include_identity {
        bell
    } else {
        bell - 1
    }
}
