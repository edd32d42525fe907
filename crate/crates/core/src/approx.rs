//! Profit scaling around the exact solvers.
//!
//! For guesses `g = Q, ⌈Q/2⌉, …, 1` the profits are floor-divided by
//! `K = max(1, ⌊ε·g/(2n)⌋)`, the scaled instance is solved exactly, and the
//! witness is scored with the original profits. The first guess whose true
//! satisfaction reaches `(1−ε)·g` is accepted. Rounding costs each agent at
//! most `n·K ≤ ε·g/2`, so the accepted witness is within `1−ε` of optimal.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::convex::{solve_convex, ConvexOrdering};
use crate::cw::{solve_cliquewidth, CliqueExpression};
use crate::error::{Error, Result};
use crate::model::{profile_of, validate_coloring, ConflictInstance, PartialKColoring};
use crate::profile::Profile;
use crate::report::{Solution, SolveStats};
use crate::tin::{solve_tin, TreeDecomposition};
use crate::Limits;

/// A rational ε with `0 < ε < 1`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 || num >= den {
            return Err(Error::InvalidEpsilon(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Epsilon {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `max(1, ⌊ε·g/(2n)⌋)`.
    pub fn scale_factor(&self, g: u64, n: usize) -> u64 {
        let k = (self.num as u128 * g as u128) / (2 * n.max(1) as u128 * self.den as u128);
        (k as u64).max(1)
    }

    /// Whether `s ≥ (1−ε)·g`.
    pub fn accepts(&self, s: u64, g: u64) -> bool {
        s as u128 * self.den as u128 >= (self.den - self.num) as u128 * g as u128
    }
}

/// Accepts `a/b` or a decimal such as `0.25`.
impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidEpsilon(s.to_string());
        let t = s.trim();
        if let Some((a, b)) = t.split_once('/') {
            let num = a.trim().parse::<u64>().map_err(|_| bad())?;
            let den = b.trim().parse::<u64>().map_err(|_| bad())?;
            return Epsilon::new(num, den).map_err(|_| bad());
        }
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if frac.len() > 18 || (int.is_empty() && frac.is_empty()) {
            return Err(bad());
        }
        let digits = |x: &str| x.chars().all(|c| c.is_ascii_digit());
        if !digits(int) || !digits(frac) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let whole = if int.is_empty() { 0 } else { int.parse::<u64>().map_err(|_| bad())? };
        let part = if frac.is_empty() { 0 } else { frac.parse::<u64>().map_err(|_| bad())? };
        let num = whole.checked_mul(den).and_then(|x| x.checked_add(part)).ok_or_else(bad)?;
        Epsilon::new(num, den).map_err(|_| bad())
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// An instance with every profit floor-divided by `factor`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledInstance {
    pub factor: u64,
    pub instance: ConflictInstance,
}

pub fn scale_profits(inst: &ConflictInstance, factor: u64) -> Result<ScaledInstance> {
    if factor == 0 {
        return Err(Error::InvalidInstance("scale factor must be at least 1".into()));
    }
    let profits = inst
        .profit_matrix()
        .iter()
        .map(|row| row.iter().map(|p| p / factor).collect())
        .collect();
    Ok(ScaledInstance {
        factor,
        instance: inst.with_profits(profits)?,
    })
}

/// The exact solver run on each scaled instance.
#[derive(Debug, Clone, Copy)]
pub enum ExactMethod<'a> {
    Convex(Option<&'a ConvexOrdering>),
    Cw(&'a CliqueExpression),
    Tin(&'a TreeDecomposition),
}

impl ExactMethod<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            ExactMethod::Convex(_) => "convex",
            ExactMethod::Cw(_) => "cw",
            ExactMethod::Tin(_) => "tin",
        }
    }

    pub fn solve(&self, inst: &ConflictInstance, limits: &Limits) -> Result<Solution> {
        match *self {
            ExactMethod::Convex(co) => solve_convex(inst, co, limits),
            ExactMethod::Cw(expr) => solve_cliquewidth(inst, expr, limits),
            ExactMethod::Tin(td) => solve_tin(inst, td, limits),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxOutcome {
    /// True satisfaction level of `witness`.
    pub value: u64,
    pub profile: Profile,
    pub witness: PartialKColoring,
    /// Exact-solver invocations made.
    pub calls: usize,
    /// The accepted guess, if any guess passed.
    pub accepted_guess: Option<u64>,
    pub stats: SolveStats,
}

impl ApproxOutcome {
    pub fn into_solution(self) -> Solution {
        Solution {
            optimum: self.value,
            profile: self.profile,
            witness: self.witness,
            stats: self.stats,
        }
    }
}

/// The guesses `Q, ⌈Q/2⌉, ⌈Q/4⌉, …, 1`; empty for `Q = 0`.
pub fn guesses(q: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut g = q;
    while g > 0 {
        out.push(g);
        if g == 1 {
            break;
        }
        g = g.div_ceil(2);
    }
    out
}

/// A witness within `1−ε` of the optimum.
pub fn fptas(inst: &ConflictInstance, eps: Epsilon, method: ExactMethod<'_>, limits: &Limits) -> Result<ApproxOutcome> {
    let start = Instant::now();
    let k = inst.k();
    let mut best = ApproxOutcome {
        value: 0,
        profile: Profile::zero(k),
        witness: PartialKColoring::empty(k),
        calls: 0,
        accepted_guess: None,
        stats: SolveStats::default(),
    };
    for g in guesses(inst.max_total_profit()) {
        let scaled = scale_profits(inst, eps.scale_factor(g, inst.n()))?;
        let sol = method.solve(&scaled.instance, limits)?;
        best.calls += 1;
        best.stats.absorb(&sol.stats);
        validate_coloring(inst, &sol.witness)?;
        let profile = profile_of(inst, &sol.witness);
        let value = profile.satisfaction_level();
        if value > best.value {
            best.value = value;
            best.profile = profile;
            best.witness = sol.witness;
        }
        if eps.accepts(value, g) {
            best.accepted_guess = Some(g);
            break;
        }
    }
    best.stats.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(best)
}
