//! Vanishing trajectories: enumeration, weights, genus and trajectory sums.
//!
//! A trajectory is a sequence of labeled steps ending at the null sequence.
//! Steps are operation-labeled, so two different operations with the same
//! result give two different trajectories.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dsl::emit_sequence;
use crate::loops::{LoopSequence, SeqKey};
use crate::ops::{visit_operations, Family, FamilyFilter, OperationStep, Sign};
use crate::rational::{self, Rational};

/// Numbers of deformations `i`, twistings `a`, mergers `b` and inactions `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Budget {
    pub i: u32,
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl Budget {
    pub fn new(i: u32, a: u32, b: u32, c: u32) -> Self {
        Budget { i, a, b, c }
    }

    /// k = a + 2b + c.
    pub fn k(&self) -> u32 {
        self.a + 2 * self.b + self.c
    }

    /// b + (a + c)/2.
    pub fn genus(&self) -> Rational {
        Rational::new((2 * self.b + self.a + self.c).into(), 2.into())
    }

    pub fn is_zero(&self) -> bool {
        *self == Budget::default()
    }

    /// All budgets with the given `i` and `a + 2b + c = k`.
    pub fn with_k(i: u32, k: u32) -> Vec<Budget> {
        let mut out = Vec::new();
        for b in 0..=k / 2 {
            for a in 0..=k - 2 * b {
                out.push(Budget::new(i, a, b, k - 2 * b - a));
            }
        }
        out
    }

    /// Upper bound on the number of splittings along any trajectory from `s`.
    pub fn split_cap(&self, s: &LoopSequence) -> u64 {
        s.index() as u64 + 4 * self.i as u64 + self.b as u64
    }

    /// Cheap necessary condition for a vanishing trajectory to exist.
    ///
    /// Only deformations and twistings can delete one loop and only mergers
    /// two; splittings never produce null loops.
    pub fn feasible(&self, s: &LoopSequence) -> bool {
        if s.is_null() {
            return self.is_zero();
        }
        s.size() as u64 <= self.i as u64 + self.a as u64 + 2 * self.b as u64
    }

    fn spend(&self, family: Family) -> Option<Budget> {
        let mut b = *self;
        let slot = match family {
            Family::Deform => &mut b.i,
            Family::Twist => &mut b.a,
            Family::Merge => &mut b.b,
            Family::Inaction => &mut b.c,
            Family::Split => return Some(b),
        };
        *slot = slot.checked_sub(1)?;
        Some(b)
    }

    fn filter(&self) -> FamilyFilter {
        FamilyFilter { twist: self.a > 0, split: true, merge: self.b > 0, deform: self.i > 0 }
    }
}

/// `coefficient · β^beta_power`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightMonomial {
    pub coefficient: Rational,
    pub beta_power: u32,
}

impl WeightMonomial {
    pub fn one() -> Self {
        WeightMonomial { coefficient: rational::one(), beta_power: 0 }
    }

    pub fn times(&self, other: &WeightMonomial) -> Self {
        WeightMonomial {
            coefficient: &self.coefficient * &other.coefficient,
            beta_power: self.beta_power + other.beta_power,
        }
    }

    pub fn eval(&self, beta: &Rational) -> Rational {
        &self.coefficient * rational::pow(beta, self.beta_power as usize)
    }
}

/// Weight of one step taken from a sequence of length `len`.
pub fn step_weight(len: usize, step: &OperationStep) -> WeightMonomial {
    let Some(sign) = step.sign else {
        return WeightMonomial::one();
    };
    let coefficient = Rational::new(sign.coefficient().into(), (len as i64).into());
    let beta_power = u32::from(step.family() == Family::Deform);
    WeightMonomial { coefficient, beta_power }
}

/// A start sequence and the steps taken from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: LoopSequence,
    pub steps: Vec<OperationStep>,
}

impl Trajectory {
    /// The visited states, starting with `start`.
    pub fn states(&self) -> impl Iterator<Item = &LoopSequence> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.result))
    }

    pub fn terminal(&self) -> &LoopSequence {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    pub fn is_vanishing(&self) -> bool {
        let n = self.steps.len();
        self.terminal().is_null() && self.states().take(n).all(|s| !s.is_null())
    }

    pub fn budget(&self) -> Budget {
        let mut b = Budget::default();
        for st in &self.steps {
            match st.family() {
                Family::Deform => b.i += 1,
                Family::Twist => b.a += 1,
                Family::Merge => b.b += 1,
                Family::Inaction => b.c += 1,
                Family::Split => {}
            }
        }
        b
    }

    pub fn splits(&self) -> usize {
        self.steps.iter().filter(|s| s.family() == Family::Split).count()
    }

    pub fn genus(&self) -> Rational {
        self.budget().genus()
    }

    pub fn weight(&self) -> WeightMonomial {
        self.states()
            .zip(&self.steps)
            .fold(WeightMonomial::one(), |w, (from, st)| w.times(&step_weight(from.length(), st)))
    }

    pub fn record(&self) -> TrajectoryRecord {
        let w = self.weight();
        TrajectoryRecord {
            start: emit_sequence(&self.start),
            steps: self.steps.iter().map(OperationStep::label).collect(),
            weight_num: w.coefficient.numer().to_string(),
            weight_den: w.coefficient.denom().to_string(),
            beta_power: w.beta_power,
            genus: rational::format_rational(&self.genus()),
        }
    }
}

/// One line of the trajectory listing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub start: String,
    pub steps: Vec<String>,
    pub weight_num: String,
    pub weight_den: String,
    pub beta_power: u32,
    pub genus: String,
}

/// Knobs for the depth-first enumerator.
#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    /// Skip states that cannot vanish within the remaining budget.
    pub feasibility_prune: bool,
    /// Refuse splittings beyond the `ι(s) + 4i + b` cap.
    pub split_cap: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { feasibility_prune: true, split_cap: true }
    }
}

/// Calls `f` on every trajectory in X_{i,a,b,c}(s).
pub fn for_each_vanishing(
    s: &LoopSequence,
    budget: Budget,
    opts: EnumerationOptions,
    f: &mut dyn FnMut(&Trajectory),
) {
    if s.is_null() {
        return;
    }
    let cap = budget.split_cap(s);
    let mut t = Trajectory { start: s.clone(), steps: Vec::new() };
    dfs(&mut t, s.clone(), budget, 0, cap, opts, f);
}

fn dfs(
    t: &mut Trajectory,
    state: LoopSequence,
    budget: Budget,
    splits: u64,
    cap: u64,
    opts: EnumerationOptions,
    f: &mut dyn FnMut(&Trajectory),
) {
    if state.is_null() {
        if budget.is_zero() {
            f(t);
        }
        return;
    }
    if opts.feasibility_prune && !budget.feasible(&state) {
        return;
    }
    if let Some(rest) = budget.spend(Family::Inaction) {
        t.steps.push(OperationStep::inaction(&state));
        dfs(t, state.clone(), rest, splits, cap, opts, f);
        t.steps.pop();
    }
    let mut children = Vec::new();
    visit_operations(&state, budget.filter(), &mut |op, sign, result| {
        children.push(OperationStep { op, sign: Some(sign), result });
    });
    for child in children {
        let fam = child.family();
        let Some(rest) = budget.spend(fam) else { continue };
        let splits = splits + u64::from(fam == Family::Split);
        if fam == Family::Split && opts.split_cap && splits > cap {
            continue;
        }
        let next = child.result.clone();
        t.steps.push(child);
        dfs(t, next, rest, splits, cap, opts, f);
        t.steps.pop();
    }
}

/// Every trajectory in X_{i,a,b,c}(s), in deterministic order.
pub fn enumerate_vanishing(s: &LoopSequence, budget: Budget) -> Vec<Trajectory> {
    let mut out = Vec::new();
    for_each_vanishing(s, budget, EnumerationOptions::default(), &mut |t| out.push(t.clone()));
    out
}

/// As [`enumerate_vanishing`], splitting the work over first steps among
/// `threads` workers. The output order does not depend on `threads`.
pub fn enumerate_vanishing_parallel(s: &LoopSequence, budget: Budget, threads: usize) -> Vec<Trajectory> {
    if s.is_null() || threads <= 1 {
        return enumerate_vanishing(s, budget);
    }
    let opts = EnumerationOptions::default();
    if !budget.feasible(s) {
        return Vec::new();
    }
    let mut firsts = Vec::new();
    if budget.c > 0 {
        firsts.push(OperationStep::inaction(s));
    }
    visit_operations(s, budget.filter(), &mut |op, sign, result| {
        firsts.push(OperationStep { op, sign: Some(sign), result });
    });
    let cap = budget.split_cap(s);
    let chunks: Vec<Vec<Trajectory>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let firsts = &firsts;
                scope.spawn(move || {
                    let mut per_first = Vec::new();
                    for (j, first) in firsts.iter().enumerate().filter(|(j, _)| j % threads == w) {
                        let fam = first.family();
                        let rest = budget.spend(fam).expect("filtered by budget");
                        let splits = u64::from(fam == Family::Split);
                        let mut found = Vec::new();
                        let mut t = Trajectory { start: s.clone(), steps: vec![first.clone()] };
                        dfs(&mut t, first.result.clone(), rest, splits, cap, opts, &mut |tr| found.push(tr.clone()));
                        per_first.push((j, found));
                    }
                    per_first
                })
            })
            .collect();
        let mut all: Vec<(usize, Vec<Trajectory>)> =
            handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect();
        all.sort_by_key(|(j, _)| *j);
        all.into_iter().map(|(_, v)| v).collect()
    });
    chunks.into_iter().flatten().collect()
}

/// Whether trajectory weights are summed with their signs or in absolute value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumMode {
    Signed,
    Absolute,
}

/// Memoized trajectory sums keyed by (canonical key, remaining budget).
#[derive(Default)]
pub struct TrajectorySums {
    memo: HashMap<(SeqKey, Budget), (Rational, Rational)>,
}

impl TrajectorySums {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// `(Σ w, Σ |w|)` over X_{i,a,b,c}(s), as coefficients of β^i and |β|^i.
    pub fn budget_sums(&mut self, s: &LoopSequence, budget: Budget) -> (Rational, Rational) {
        if s.is_null() {
            let v = if budget.is_zero() { rational::one() } else { rational::zero() };
            return (v.clone(), v);
        }
        if !budget.feasible(s) {
            return (rational::zero(), rational::zero());
        }
        let key = (s.canonical_key(), budget);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut signed = rational::zero();
        let mut absolute = rational::zero();
        if let Some(rest) = budget.spend(Family::Inaction) {
            let (t, a) = self.budget_sums(s, rest);
            signed += t;
            absolute += a;
        }
        let mut children = Vec::new();
        visit_operations(s, budget.filter(), &mut |op, sign, result| {
            children.push((op.family(), sign, result));
        });
        let len = Rational::from_integer((s.length() as i64).into());
        for (fam, sign, result) in children {
            let rest = budget.spend(fam).expect("filtered by budget");
            let (t, a) = self.budget_sums(&result, rest);
            if t.is_zero() && a.is_zero() {
                continue;
            }
            if sign == Sign::Negative {
                signed += &t / &len;
            } else {
                signed -= &t / &len;
            }
            absolute += &a / &len;
        }
        debug_assert!(!absolute.is_negative());
        self.memo.insert(key, (signed.clone(), absolute.clone()));
        (signed, absolute)
    }

    /// T_{β,i,k}(s) or S_{β,i,k}(s) as a monomial in β (or |β|) of degree i.
    pub fn trajectory_sum(&mut self, s: &LoopSequence, i: u32, k: u32, mode: SumMode) -> WeightMonomial {
        let mut total = rational::zero();
        for b in Budget::with_k(i, k) {
            let (t, a) = self.budget_sums(s, b);
            total += match mode {
                SumMode::Signed => t,
                SumMode::Absolute => a,
            };
        }
        WeightMonomial { coefficient: total, beta_power: i }
    }
}

/// Convenience wrapper around a fresh [`TrajectorySums`].
pub fn trajectory_sum(s: &LoopSequence, i: u32, k: u32, mode: SumMode) -> WeightMonomial {
    TrajectorySums::new().trajectory_sum(s, i, k, mode)
}
