//! Invariant suites shared by the command line and the test suite.
//!
//! Each suite returns a [`CheckReport`] counting the cases examined and the
//! failures found, with the first few failures spelled out.

use std::collections::HashMap;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeff::{catalan, coeff_bound, f_partial, k_constant, master_residual, CoefficientEngine, Recursion, SeriesOptions};
use crate::corpus::{corpus_2d, random_sequence};
use crate::error::CoeffError;
use crate::loops::{FirstEdgeRule, LoopSequence};
use crate::ops::{splitting, visit_operations, Family, FamilyFilter, Operation, OperationStep, Sign};
use crate::rational::{self, Rational};
use crate::trajectory::{for_each_vanishing, Budget, EnumerationOptions, SumMode, TrajectorySums};

const EXAMPLES: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub cases: usize,
    pub failures: usize,
    pub examples: Vec<String>,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(check: &str) -> Self {
        CheckReport { check: check.to_string(), cases: 0, failures: 0, examples: Vec::new(), passed: true }
    }

    pub fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            self.passed = false;
            if self.examples.len() < EXAMPLES {
                self.examples.push(describe());
            }
        }
    }

    /// Marks the suite failed when it examined nothing.
    pub fn require_cases(mut self) -> Self {
        if self.cases == 0 {
            self.passed = false;
        }
        self
    }
}

/// The d = 2 corpus and the (i, k) ranges to sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Scope {
    pub max_length: usize,
    pub i_max: u32,
    pub k_max: u32,
}

impl Scope {
    pub fn corpus(&self) -> Vec<LoopSequence> {
        corpus_2d(self.max_length)
    }

    fn cells(&self) -> impl Iterator<Item = (LoopSequence, u32, u32)> + '_ {
        let corpus = self.corpus();
        let (im, km) = (self.i_max, self.k_max);
        corpus
            .into_iter()
            .flat_map(move |s| (0..=im).flat_map(move |i| (0..=km).map(move |k| (i, k))).map(move |(i, k)| (s.clone(), i, k)))
    }
}

/// T_{β,i,k}(s) = a_{i,k}(s) β^i on the corpus.
pub fn duality(engine: &mut CoefficientEngine, sums: &mut TrajectorySums, scope: Scope) -> Result<CheckReport, CoeffError> {
    let mut rep = CheckReport::new("duality");
    for (s, i, k) in scope.cells() {
        let a = engine.a_coeff(&s, i, k)?;
        let t = sums.trajectory_sum(&s, i, k, SumMode::Signed);
        rep.record(t.coefficient == a && t.beta_power == i, || {
            format!("{s} i={i} k={k}: trajectories {} vs recursion {}", t.coefficient, a)
        });
    }
    Ok(rep.require_cases())
}

/// First-edge recursion against the recursion over all operations.
pub fn cross_recursion(engine: &mut CoefficientEngine, scope: Scope) -> Result<CheckReport, CoeffError> {
    let mut rep = CheckReport::new("cross");
    for (s, i, k) in scope.cells() {
        let a = engine.a_coeff(&s, i, k)?;
        let b = engine.a_coeff_symmetrized(&s, i, k)?;
        rep.record(a == b, || format!("{s} i={i} k={k}: {a} vs {b}"));
    }
    Ok(rep.require_cases())
}

/// S_{β,i,k}(s) = b_{i,k}(s)|β|^i and |a_{i,k}(s)| ≤ b_{i,k}(s).
pub fn absolute_sums(engine: &mut CoefficientEngine, sums: &mut TrajectorySums, scope: Scope) -> Result<CheckReport, CoeffError> {
    let mut rep = CheckReport::new("absolute");
    for (s, i, k) in scope.cells() {
        let a = engine.a_coeff(&s, i, k)?;
        let b = engine.b_coeff(&s, i, k)?;
        let total = sums.trajectory_sum(&s, i, k, SumMode::Absolute);
        rep.record(total.coefficient == b, || format!("{s} i={i} k={k}: S {} vs b {b}", total.coefficient));
        rep.record(a.abs() <= b, || format!("{s} i={i} k={k}: |a| = {} exceeds b = {b}", a.abs()));
    }
    Ok(rep.require_cases())
}

/// The first-edge recursion gives the same numbers whichever extreme rotation supplies e.
pub fn rule_independence(scope: Scope) -> Result<CheckReport, CoeffError> {
    let mut rep = CheckReport::new("rule-independence");
    let mut lo = CoefficientEngine::new(2)?;
    let mut hi = CoefficientEngine::new(2)?.with_rule(FirstEdgeRule::LexMax);
    for (s, i, k) in scope.cells() {
        let a = lo.a_coeff(&s, i, k)?;
        let b = hi.a_coeff(&s, i, k)?;
        rep.record(a == b, || format!("{s} i={i} k={k}: {a} vs {b}"));
    }
    Ok(rep.require_cases())
}

/// Catalan-type bound on every memoized coefficient, and the growth bound on
/// partial sums at β = ½ K^{−(5+k)}.
pub fn coefficient_bounds(engine: &mut CoefficientEngine, scope: Scope) -> Result<CheckReport, CoeffError> {
    let mut rep = CheckReport::new("bounds");
    for (s, i, k) in scope.cells() {
        engine.a_coeff(&s, i, k)?;
        engine.b_coeff(&s, i, k)?;
    }
    let entries: Vec<(Recursion, LoopSequence, u32, u32, Rational)> = engine
        .memo_entries()
        .map(|(r, key, i, k, v)| (r, key.to_sequence().expect("memo keys are canonical"), i, k, v.clone()))
        .collect();
    for (r, s, i, k, v) in entries {
        let bound = coeff_bound(&s, i, k);
        rep.record(v.abs() <= bound, || format!("{r:?} {s} i={i} k={k}: |{v}| above the bound"));
        if r == Recursion::Absolute {
            rep.record(!v.is_negative(), || format!("{s} i={i} k={k}: b = {v} is negative"));
        }
    }
    let kk = rational::int(k_constant(2) as i64);
    for s in scope.corpus() {
        for k in 0..=scope.k_max {
            let beta = rational::pow(&kk, 5 + k as usize).recip() / rational::int(2);
            let opts = SeriesOptions { i_max: Some(scope.i_max), ..SeriesOptions::default() };
            let res = f_partial(engine, &s, k, &beta, &opts)?;
            rep.record(res.growth_ok == Some(true), || format!("{s} k={k}: growth bound violated or not rigorous"));
        }
    }
    Ok(rep.require_cases())
}

/// C_{n+m−1} ≤ (n+m)² C_{n−1} C_{m−1} for 1 ≤ n, m ≤ `max`.
pub fn catalan_products(max: usize) -> CheckReport {
    let mut rep = CheckReport::new("catalan");
    for n in 1..=max {
        for m in 1..=max {
            let lhs = catalan(n + m - 1);
            let rhs = catalan(n - 1) * catalan(m - 1) * ((n + m) * (n + m));
            rep.record(lhs <= rhs, || format!("n={n} m={m}"));
        }
    }
    rep
}

/// The symmetrized limiting loop equation on partial sums truncated at `i_max`.
///
/// With every f_k cut after β^{i_max}, the only surviving discrepancy is the
/// deformation term of top order, so the residual must equal
/// `β^{i_max+1} Σ_D ±a_{i_max,k}(s')` exactly.
pub fn master_coefficients(engine: &mut CoefficientEngine, scope: Scope, beta: &Rational) -> Result<CheckReport, CoeffError> {
    let mut rep = CheckReport::new("master");
    for s in scope.corpus() {
        let mut deforms = Vec::new();
        visit_operations(&s, FamilyFilter { twist: false, split: false, merge: false, deform: true }, &mut |_, sign, next| {
            deforms.push((sign, next))
        });
        for k in 0..=scope.k_max {
            let res = master_residual(engine, &s, k, beta, scope.i_max)?;
            let mut expected = rational::zero();
            for (sign, next) in &deforms {
                let a = engine.a_coeff(next, scope.i_max, k)?;
                expected += a * rational::int(sign.coefficient() as i64);
            }
            expected *= rational::pow(beta, scope.i_max as usize + 1);
            rep.record(res.residual == expected, || format!("{s} k={k}: residual {} expected {expected}", res.residual));
            if let Some(w) = res.within {
                rep.record(w, || format!("{s} k={k}: residual outside the tail bound"));
            }
        }
    }
    Ok(rep.require_cases())
}

/// Pruned enumeration agrees, trajectory by trajectory and in order, with an
/// exhaustive search that applies every operation the budget allows and
/// never discards a state early.
pub fn pruning(max_length: usize, max_budget: u32) -> CheckReport {
    let mut rep = CheckReport::new("pruning");
    for s in corpus_2d(max_length) {
        let mut dag = Exhaustive::default();
        for budget in budgets_up_to(max_budget) {
            let root = dag.build(&s, budget);
            let mut walk = PathWalk::new(root);
            let (mut listed, mut mismatched) = (0u64, 0u64);
            for_each_vanishing(&s, budget, EnumerationOptions::default(), &mut |t| {
                listed += 1;
                let same = walk.next(&dag).is_some_and(|path| {
                    path.len() == t.steps.len()
                        && path.iter().zip(&t.steps).all(|(&(op, sign), st)| dag.ops[op] == st.op && sign == st.sign)
                });
                mismatched += u64::from(!same);
            });
            let extra = walk.next(&dag).is_some();
            let expected = dag.nodes[root].count;
            rep.record(mismatched == 0 && !extra && listed == expected, || {
                format!("{s} budget {budget:?}: {listed} pruned vs {expected} exhaustive, {mismatched} out of order")
            });
        }
    }
    rep.require_cases()
}

/// Every vanishing continuation of every reachable (state, remaining budget),
/// stored as a DAG whose edges are operations.
///
/// Splittings are free, so termination rests on the loop count (each
/// splitting adds a loop, and total length L holds at most L/4 loops) and on
/// the budget otherwise.
#[derive(Default)]
struct Exhaustive {
    memo: HashMap<(LoopSequence, Budget), usize>,
    nodes: Vec<DagNode>,
    ops: Vec<Operation>,
}

struct DagNode {
    /// The null sequence with nothing left to spend.
    terminal: bool,
    /// Only edges leading to at least one vanishing path.
    edges: Vec<(usize, Option<Sign>, usize)>,
    count: u64,
}

impl Exhaustive {
    fn build(&mut self, state: &LoopSequence, budget: Budget) -> usize {
        let key = (state.clone(), budget);
        if let Some(&id) = self.memo.get(&key) {
            return id;
        }
        let mut node = DagNode { terminal: false, edges: Vec::new(), count: 0 };
        if state.is_null() {
            node.terminal = budget.is_zero();
            node.count = u64::from(node.terminal);
        } else {
            let mut children = Vec::new();
            if budget.c > 0 {
                children.push((OperationStep::inaction(state), Budget { c: budget.c - 1, ..budget }));
            }
            let mut ops = Vec::new();
            visit_operations(state, FamilyFilter::ALL, &mut |op, sign, result| {
                ops.push(OperationStep { op, sign: Some(sign), result });
            });
            for child in ops {
                let mut b = budget;
                let slot = match child.family() {
                    Family::Deform => Some(&mut b.i),
                    Family::Twist => Some(&mut b.a),
                    Family::Merge => Some(&mut b.b),
                    Family::Split => None,
                    Family::Inaction => unreachable!("not produced by visit_operations"),
                };
                if let Some(slot) = slot {
                    let Some(left) = slot.checked_sub(1) else { continue };
                    *slot = left;
                }
                children.push((child, b));
            }
            for (child, b) in children {
                let id = self.build(&child.result, b);
                if self.nodes[id].count > 0 {
                    node.count += self.nodes[id].count;
                    self.ops.push(child.op);
                    node.edges.push((self.ops.len() - 1, child.sign, id));
                }
            }
        }
        self.nodes.push(node);
        let id = self.nodes.len() - 1;
        self.memo.insert(key, id);
        id
    }
}

/// Depth-first walk over the root-to-terminal paths of an [`Exhaustive`] DAG.
struct PathWalk {
    /// (node, edges already taken from it).
    stack: Vec<(usize, usize)>,
}

impl PathWalk {
    fn new(root: usize) -> Self {
        PathWalk { stack: vec![(root, 0)] }
    }

    fn next(&mut self, dag: &Exhaustive) -> Option<Vec<(usize, Option<Sign>)>> {
        loop {
            let &(node, taken) = self.stack.last()?;
            if let Some(&(_, _, child)) = dag.nodes[node].edges.get(taken) {
                self.stack.last_mut().expect("non-empty").1 += 1;
                self.stack.push((child, 0));
                if dag.nodes[child].terminal {
                    let path = self.stack[..self.stack.len() - 1]
                        .iter()
                        .map(|&(n, t)| {
                            let (op, sign, _) = dag.nodes[n].edges[t - 1];
                            (op, sign)
                        })
                        .collect();
                    return Some(path);
                }
            } else {
                self.stack.pop();
            }
        }
    }
}

/// Every (i, a, b, c) with i + a + b + c ≤ `max`.
pub fn budgets_up_to(max: u32) -> Vec<Budget> {
    let mut out = Vec::new();
    for i in 0..=max {
        for a in 0..=max - i {
            for b in 0..=max - i - a {
                for c in 0..=max - i - a - b {
                    out.push(Budget::new(i, a, b, c));
                }
            }
        }
    }
    out
}

/// Randomized checks of how |s| and ι(s) move under each operation.
///
/// Every suite draws random sequences in each dimension of `dims` (loops of
/// length at most `max_len`) until it has made `per_suite` applications.
pub fn lemma_suite(seed: u64, per_suite: usize, dims: &[usize], max_len: usize) -> Vec<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suites: [(&str, Family, Option<Sign>); 6] = [
        ("twisting", Family::Twist, None),
        ("merger", Family::Merge, None),
        ("deformation", Family::Deform, None),
        ("positive-splitting", Family::Split, Some(Sign::Positive)),
        ("negative-splitting", Family::Split, Some(Sign::Negative)),
        ("splitting-index", Family::Split, None),
    ];
    suites
        .iter()
        .map(|&(name, family, sign)| {
            let mut rep = CheckReport::new(name);
            let mut attempts = 0usize;
            while rep.cases < per_suite && attempts < per_suite * 1000 {
                attempts += 1;
                let dim = dims[attempts % dims.len()];
                let loops = if family == Family::Merge { 3 } else { 2 };
                let s = random_sequence(&mut rng, dim, max_len * loops, loops);
                if s.loops().iter().any(|l| l.len() > max_len) {
                    continue;
                }
                let filter = FamilyFilter {
                    twist: family == Family::Twist,
                    split: family == Family::Split,
                    merge: family == Family::Merge,
                    deform: family == Family::Deform,
                };
                let mut found = Vec::new();
                visit_operations(&s, filter, &mut |op, sg, next| {
                    if sign.is_none_or(|want| want == sg) {
                        found.push((op, sg, next));
                    }
                });
                if found.is_empty() {
                    continue;
                }
                let (op, sg, next) = found.swap_remove(rng.random_range(0..found.len()));
                check_lemma(&mut rep, name, &s, &op, sg, &next);
            }
            rep.require_cases()
        })
        .collect()
}

fn check_lemma(rep: &mut CheckReport, name: &str, s: &LoopSequence, op: &Operation, sign: Sign, next: &LoopSequence) {
    let (len, idx) = (s.length() as i64, s.index() as i64);
    let (len2, idx2) = (next.length() as i64, next.index() as i64);
    let describe = || format!("{s} --{op:?} {sign:?}--> {next}");
    match name {
        "twisting" => rep.record(len2 <= len && idx2 <= idx, describe),
        "merger" => rep.record(len2 <= len && idx2 <= idx + 1, describe),
        "deformation" => rep.record(len2 <= len + 4 && idx2 <= idx + 4, describe),
        "splitting-index" => rep.record(idx2 < idx, describe),
        _ => {
            let Operation::Split { loop_index, x, y } = *op else { unreachable!("split suites only see splits") };
            let l = &s.loops()[loop_index];
            let n = l.len() as i64;
            let fd = ((y as i64 - x as i64) % n + n) % n;
            let shrink = i64::from(sign == Sign::Negative);
            let ok = match splitting(l, x, y, sign) {
                Ok((l1, l2)) => {
                    !l1.is_null()
                        && !l2.is_null()
                        && l1.len() as i64 <= n - fd - shrink
                        && l2.len() as i64 <= fd - shrink
                }
                Err(_) => false,
            };
            rep.record(ok, describe);
        }
    }
}

