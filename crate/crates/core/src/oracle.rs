//! Exhaustive ground truth for small instances.
//!
//! Deliberately naive: every assignment `V -> {0, 1, ..., k}` is visited in
//! mixed-radix order (vertex 0 most significant, value 0 first), with a
//! branch cut as soon as an edge becomes monochromatic.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{ConflictInstance, PartialKColoring};
use crate::profile::{Profile, ProfileSet};
use crate::report::{Solution, SolveStats};
use crate::Limits;

/// Default cap on `(k+1)^n`.
pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000_000;

fn check_cap(inst: &ConflictInstance, cap: u128) -> Result<()> {
    let base = inst.k() as u128 + 1;
    let mut required: u128 = 1;
    for _ in 0..inst.n() {
        required = required.saturating_mul(base);
    }
    if required > cap {
        return Err(Error::EnumerationCapExceeded { required, cap });
    }
    Ok(())
}

struct Walker<'a, F> {
    inst: &'a ConflictInstance,
    assignment: Vec<usize>,
    profile: Profile,
    visit: F,
}

impl<F: FnMut(&[usize], &Profile)> Walker<'_, F> {
    fn walk(&mut self, v: usize) {
        if v == self.inst.n() {
            (self.visit)(&self.assignment, &self.profile);
            return;
        }
        for c in 0..=self.inst.k() {
            if c > 0
                && self
                    .inst
                    .neighbors(v)
                    .iter()
                    .any(|&w| w < v && self.assignment[w] == c)
            {
                continue;
            }
            self.assignment[v] = c;
            if c > 0 {
                self.profile.as_mut_slice()[c - 1] += self.inst.profit(c - 1, v);
            }
            self.walk(v + 1);
            if c > 0 {
                self.profile.as_mut_slice()[c - 1] -= self.inst.profit(c - 1, v);
            }
        }
        self.assignment[v] = 0;
    }
}

/// Calls `visit(assignment, profile)` for every partial k-coloring of
/// `inst`, in enumeration order.
pub fn for_each_coloring<F>(inst: &ConflictInstance, cap: u128, visit: F) -> Result<()>
where
    F: FnMut(&[usize], &Profile),
{
    check_cap(inst, cap)?;
    let mut walker = Walker {
        inst,
        assignment: vec![0; inst.n()],
        profile: Profile::zero(inst.k()),
        visit,
    };
    walker.walk(0);
    Ok(())
}

/// Every profile attained by a partial k-coloring of `inst`.
pub fn brute_force_profiles(inst: &ConflictInstance, limits: &Limits) -> Result<ProfileSet> {
    let mut set = ProfileSet::empty(inst.k());
    let mut failure = None;
    for_each_coloring(inst, limits.enumeration_cap, |_, q| {
        if failure.is_none() {
            if let Err(e) = set.insert(q.clone(), limits.profile_cap) {
                failure = Some(e);
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(set),
    }
}

/// The optimum satisfaction level and the first optimal coloring in
/// enumeration order.
pub fn brute_force_optimum(inst: &ConflictInstance, limits: &Limits) -> Result<Solution> {
    let start = Instant::now();
    let mut best: Option<(u64, Vec<usize>, Profile)> = None;
    let mut visited = 0u64;
    for_each_coloring(inst, limits.enumeration_cap, |assignment, q| {
        visited += 1;
        let level = q.satisfaction_level();
        if best.as_ref().is_none_or(|(b, _, _)| level > *b) {
            best = Some((level, assignment.to_vec(), q.clone()));
        }
    })?;
    let (optimum, assignment, profile) = best.expect("the empty coloring always exists");
    Ok(Solution {
        optimum,
        profile,
        witness: PartialKColoring::from_assignment(&assignment, inst.k()),
        stats: SolveStats {
            elapsed_ms: start.elapsed().as_millis() as u64,
            dp_cells: visited,
            profiles_stored: 0,
            work: visited,
        },
    })
}

/// Maximum total weight of an independent set, by plain branching on a
/// maximum-degree vertex. Independent of the coloring enumerator above.
pub fn max_weight_independent_set(inst: &ConflictInstance, weights: &[u64]) -> u64 {
    fn go(inst: &ConflictInstance, weights: &[u64], alive: &mut Vec<bool>) -> u64 {
        let mut pivot = None;
        let mut pivot_degree = 0;
        for v in 0..inst.n() {
            if !alive[v] {
                continue;
            }
            let d = inst.neighbors(v).iter().filter(|&&w| alive[w]).count();
            if d > pivot_degree {
                pivot_degree = d;
                pivot = Some(v);
            }
        }
        let Some(v) = pivot else {
            return (0..inst.n()).filter(|&v| alive[v]).map(|v| weights[v]).sum();
        };
        alive[v] = false;
        let without = go(inst, weights, alive);
        let removed: Vec<usize> = inst.neighbors(v).iter().copied().filter(|&w| alive[w]).collect();
        for &w in &removed {
            alive[w] = false;
        }
        let with = weights[v] + go(inst, weights, alive);
        for &w in &removed {
            alive[w] = true;
        }
        alive[v] = true;
        without.max(with)
    }
    let mut alive = vec![true; inst.n()];
    go(inst, weights, &mut alive)
}
