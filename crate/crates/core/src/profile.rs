//! Profit profiles and deduplicated profile sets, the currency every dynamic
//! program in this crate trades in.

use std::fmt;
use std::ops::Index;

use rustc_hash::FxHashSet;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A k-tuple of nonnegative profits, one per agent.
///
/// Orders lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Profile(SmallVec<[u64; 4]>);

impl Profile {
    pub fn zero(k: usize) -> Self {
        Profile(SmallVec::from_elem(0, k))
    }

    pub fn from_slice(values: &[u64]) -> Self {
        Profile(SmallVec::from_slice(values))
    }

    /// `e_j(value)`: `value` at coordinate `j`, zero elsewhere.
    pub fn unit(k: usize, j: usize, value: u64) -> Self {
        let mut p = Self::zero(k);
        p.0[j] = value;
        p
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [u64] {
        &mut self.0
    }

    /// The satisfaction level: the smallest coordinate (0 for arity 0).
    pub fn satisfaction_level(&self) -> u64 {
        self.0.iter().copied().min().unwrap_or(0)
    }

    pub fn add(&self, other: &Profile) -> Profile {
        debug_assert_eq!(self.arity(), other.arity());
        Profile(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &Profile) -> Option<Profile> {
        debug_assert_eq!(self.arity(), other.arity());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<SmallVec<_>>>()
            .map(Profile)
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &Profile) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    fn max_assign(&mut self, other: &Profile) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = (*a).max(*b);
        }
    }
}

impl FromIterator<u64> for Profile {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        Profile(iter.into_iter().collect())
    }
}

impl Index<usize> for Profile {
    type Output = u64;

    fn index(&self, j: usize) -> &u64 {
        &self.0[j]
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// `min_j q_j`.
pub fn satisfaction_level(q: &Profile) -> u64 {
    q.satisfaction_level()
}

/// Default cap on the number of profiles a single set may hold.
pub const DEFAULT_PROFILE_CAP: usize = 1 << 26;

/// A finite set of profiles of common arity.
///
/// Members live in a hash set; canonical (lexicographic) order is applied
/// only when the set is listed or dumped.
#[derive(Clone)]
pub struct ProfileSet {
    arity: usize,
    members: FxHashSet<Profile>,
    upper: Profile,
}

impl ProfileSet {
    pub fn empty(arity: usize) -> Self {
        ProfileSet {
            arity,
            members: FxHashSet::default(),
            upper: Profile::zero(arity),
        }
    }

    /// `{(0, ..., 0)}`.
    pub fn zero(arity: usize) -> Self {
        Self::singleton(Profile::zero(arity))
    }

    pub fn singleton(p: Profile) -> Self {
        let mut s = Self::empty(p.arity());
        s.upper = p.clone();
        s.members.insert(p);
        s
    }

    pub fn from_profiles<I: IntoIterator<Item = Profile>>(arity: usize, iter: I, cap: usize) -> Result<Self> {
        let mut s = Self::empty(arity);
        for p in iter {
            s.insert(p, cap)?;
        }
        Ok(s)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: &Profile) -> bool {
        self.members.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Profile> + '_ {
        self.members.iter()
    }

    /// Componentwise maximum over all members (all zeros when empty).
    pub fn upper_bound(&self) -> &Profile {
        &self.upper
    }

    fn check_arity(&self, other: usize) -> Result<()> {
        if self.arity != other {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other,
            });
        }
        Ok(())
    }

    /// Inserts `p`; returns whether it was new.
    pub fn insert(&mut self, p: Profile, cap: usize) -> Result<bool> {
        self.check_arity(p.arity())?;
        if self.members.contains(&p) {
            return Ok(false);
        }
        if self.members.len() >= cap {
            return Err(Error::ProfileCapExceeded { cap });
        }
        self.upper.max_assign(&p);
        self.members.insert(p);
        Ok(true)
    }

    /// In-place union.
    pub fn union_with(&mut self, other: &ProfileSet, cap: usize) -> Result<()> {
        self.check_arity(other.arity)?;
        for p in &other.members {
            self.insert(p.clone(), cap)?;
        }
        Ok(())
    }

    /// `{q1 + q2 : q1 in self, q2 in other}`.
    pub fn merge(&self, other: &ProfileSet, cap: usize) -> Result<ProfileSet> {
        self.check_arity(other.arity)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = ProfileSet::empty(self.arity);
        for a in &small.members {
            for b in &large.members {
                out.insert(a.add(b), cap)?;
            }
        }
        Ok(out)
    }

    /// Adds `delta` to every member. Cardinality is preserved.
    pub fn shift(&self, delta: &Profile) -> Result<ProfileSet> {
        self.check_arity(delta.arity())?;
        if delta.is_zero() {
            return Ok(self.clone());
        }
        let members: FxHashSet<Profile> = self.members.iter().map(|p| p.add(delta)).collect();
        let upper = if self.is_empty() {
            Profile::zero(self.arity)
        } else {
            self.upper.add(delta)
        };
        Ok(ProfileSet {
            arity: self.arity,
            members,
            upper,
        })
    }

    /// Subtracts `delta` from every member; `None` if some member would go
    /// negative.
    pub fn unshift(&self, delta: &Profile) -> Option<ProfileSet> {
        if delta.is_zero() {
            return Some(self.clone());
        }
        let members = self
            .members
            .iter()
            .map(|p| p.checked_sub(delta))
            .collect::<Option<FxHashSet<Profile>>>()?;
        let mut upper = Profile::zero(self.arity);
        for p in &members {
            upper.max_assign(p);
        }
        Some(ProfileSet {
            arity: self.arity,
            members,
            upper,
        })
    }

    /// The member with the largest satisfaction level; ties go to the
    /// lexicographically smallest profile.
    pub fn best_profile(&self) -> Result<&Profile> {
        self.members
            .iter()
            .max_by(|a, b| {
                a.satisfaction_level()
                    .cmp(&b.satisfaction_level())
                    .then_with(|| b.cmp(a))
            })
            .ok_or(Error::EmptyProfileSet)
    }

    /// `max_{q in S} min_j q_j`.
    pub fn best_satisfaction(&self) -> Result<u64> {
        self.best_profile().map(Profile::satisfaction_level)
    }

    /// Keeps only the Pareto-maximal members. Only sound when the caller
    /// needs the optimum, never when the full set is requested.
    pub fn dominance_prune(&self) -> ProfileSet {
        let mut sorted: Vec<&Profile> = self.members.iter().collect();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let mut kept: Vec<&Profile> = Vec::new();
        for p in sorted {
            // A strict dominator is lexicographically larger, so it was seen first.
            if !kept.iter().any(|q| q.dominates(p)) {
                kept.push(p);
            }
        }
        let mut out = ProfileSet::empty(self.arity);
        for p in kept {
            out.upper.max_assign(p);
            out.members.insert(p.clone());
        }
        out
    }

    /// Members in ascending lexicographic order.
    pub fn sorted(&self) -> Vec<Profile> {
        let mut v: Vec<Profile> = self.members.iter().cloned().collect();
        v.sort_unstable();
        v
    }

    /// One profile per line, space separated, lexicographically sorted.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        for p in self.sorted() {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }

    /// Reads the dump format back. Blank lines are ignored.
    pub fn parse_dump(text: &str, arity: usize) -> Result<ProfileSet> {
        let mut s = ProfileSet::empty(arity);
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<u64>()
                        .map_err(|_| Error::syntax(idx + 1, format!("invalid profit `{t}`")))
                })
                .collect::<Result<Vec<u64>>>()?;
            if values.len() != arity {
                return Err(Error::ArityMismatch {
                    left: arity,
                    right: values.len(),
                });
            }
            s.insert(Profile::from_slice(&values), usize::MAX)?;
        }
        Ok(s)
    }
}

impl PartialEq for ProfileSet {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.members == other.members
    }
}

impl Eq for ProfileSet {}

impl fmt::Debug for ProfileSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.sorted()).finish()
    }
}

fn extend_edgeless(current: &ProfileSet, item: &Profile, cap: usize) -> Result<ProfileSet> {
    let k = current.arity();
    let mut next = current.clone();
    for j in 0..k {
        let p = item[j];
        if p == 0 {
            continue;
        }
        for q in current.iter() {
            let mut r = q.clone();
            r.as_mut_slice()[j] += p;
            next.insert(r, cap)?;
        }
    }
    Ok(next)
}

/// All profiles reachable by giving each item to no agent or to exactly one
/// agent, ignoring conflicts. `items[i]` is the per-agent profit vector of
/// the i-th item.
pub fn edgeless_profiles(k: usize, items: &[Profile], cap: usize) -> Result<ProfileSet> {
    let mut set = ProfileSet::zero(k);
    for item in items {
        if item.arity() != k {
            return Err(Error::ArityMismatch {
                left: k,
                right: item.arity(),
            });
        }
        if item.is_zero() {
            continue;
        }
        set = extend_edgeless(&set, item, cap)?;
    }
    Ok(set)
}

/// An assignment `items -> {0 (none), 1..=k}` reaching exactly `target`, if
/// one exists. Items are only ever assigned to an agent that values them
/// positively.
pub fn edgeless_assignment(
    k: usize,
    items: &[Profile],
    target: &Profile,
    cap: usize,
) -> Result<Option<Vec<usize>>> {
    let mut layers = Vec::with_capacity(items.len() + 1);
    layers.push(ProfileSet::zero(k));
    for item in items {
        let next = extend_edgeless(layers.last().expect("nonempty"), item, cap)?;
        layers.push(next);
    }
    if !layers[items.len()].contains(target) {
        return Ok(None);
    }
    let mut assignment = vec![0; items.len()];
    let mut rest = target.clone();
    for i in (0..items.len()).rev() {
        let before = &layers[i];
        if before.contains(&rest) {
            continue;
        }
        let j = (0..k)
            .find(|&j| {
                items[i][j] > 0
                    && rest[j] >= items[i][j]
                    && before.contains(&{
                        let mut r = rest.clone();
                        r.as_mut_slice()[j] -= items[i][j];
                        r
                    })
            })
            .expect("layered sets are consistent");
        rest.as_mut_slice()[j] -= items[i][j];
        assignment[i] = j + 1;
    }
    debug_assert!(rest.is_zero());
    Ok(Some(assignment))
}
