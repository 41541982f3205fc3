//! The string operations: merger, deformation, splitting and twisting, plus
//! enumerators for the full operation multisets and for the first-edge sums.
//!
//! Locations are 1-based positions in the stored (canonical) rotation of a
//! loop. Loop indices are 0-based positions in the sequence.
//!
//! Every binary operation rotates its loops so that the chosen edge comes first:
//! `l = e L` and `l' = e' L'` for mergers, `l = e B e' C` for the single-loop
//! operations. The formulas are then
//!
//! | operation | same edge (`e' = e`) | inverse edge (`e' = e⁻¹`) |
//! |-----------|----------------------|---------------------------|
//! | merger +  | `[e L' e L]`         | `[e L'⁻¹ e L]`            |
//! | merger −  | `[L'⁻¹ L]`           | `[L' L]`                  |
//! | split     | + : `([e C], [B e])` | − : `([C], [B])`          |
//! | twist     | − : `[B⁻¹ C]`        | + : `[e B⁻¹ e⁻¹ C]`       |

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LoopError;
use crate::lattice::{DirectedEdge, LatticeVector, Step};
use crate::loops::{reduce_closed, FirstEdgeRule, Loop, LoopSequence};

/// Polarity of an operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    /// Sign of the operation's term in the loop equations: `+1` for negative
    /// operations and `-1` for positive ones.
    pub fn coefficient(self) -> i32 {
        match self {
            Sign::Negative => 1,
            Sign::Positive => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// How the edges at two locations relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Incidence {
    Same,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Twist,
    Split,
    Merge,
    Deform,
    Inaction,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::Twist => 'T',
            Family::Split => 'S',
            Family::Merge => 'M',
            Family::Deform => 'D',
            Family::Inaction => 'I',
        }
    }
}

/// An operation applied to a loop sequence, without its result.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operation {
    Twist { loop_index: usize, x: usize, y: usize },
    Split { loop_index: usize, x: usize, y: usize },
    Merge { first: usize, second: usize, x: usize, y: usize },
    Deform { loop_index: usize, x: usize, plaquette: Loop },
    Inaction,
}

impl Operation {
    pub fn family(&self) -> Family {
        match self {
            Operation::Twist { .. } => Family::Twist,
            Operation::Split { .. } => Family::Split,
            Operation::Merge { .. } => Family::Merge,
            Operation::Deform { .. } => Family::Deform,
            Operation::Inaction => Family::Inaction,
        }
    }
}

/// A labeled operation together with the sequence it produces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationStep {
    pub op: Operation,
    /// `None` exactly for inaction.
    pub sign: Option<Sign>,
    pub result: LoopSequence,
}

impl OperationStep {
    pub fn inaction(s: &LoopSequence) -> Self {
        OperationStep { op: Operation::Inaction, sign: None, result: s.clone() }
    }

    pub fn family(&self) -> Family {
        self.op.family()
    }

    /// Compact label such as `T-(0;1,5)` or `D+(0;3;@(0,0) +2 +1 -2 -1)`.
    pub fn label(&self) -> String {
        let sign = self.sign.map_or(String::new(), |s| s.symbol().to_string());
        let letter = self.family().letter();
        match &self.op {
            Operation::Twist { loop_index, x, y } | Operation::Split { loop_index, x, y } => {
                format!("{letter}{sign}({loop_index};{x},{y})")
            }
            Operation::Merge { first, second, x, y } => {
                format!("{letter}{sign}({first},{second};{x},{y})")
            }
            Operation::Deform { loop_index, x, plaquette } => {
                format!("{letter}{sign}({loop_index};{x};{plaquette})")
            }
            Operation::Inaction => "I".to_string(),
        }
    }
}

impl fmt::Display for OperationStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

// Serialization of loops and sequences goes through the DSL.
impl Serialize for Loop {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&crate::dsl::emit_loop(self))
    }
}

impl Serialize for LoopSequence {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("LoopSequence", 2)?;
        st.serialize_field("dim", &self.dim())?;
        st.serialize_field("loops", &crate::dsl::emit_sequence(self))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Loop {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        // A loop alone does not carry its dimension unless it has a start vertex.
        let text = String::deserialize(de)?;
        let dim = text
            .trim()
            .strip_prefix("@(")
            .and_then(|t| t.split(')').next())
            .map(|inner| inner.split(',').count())
            .ok_or_else(|| serde::de::Error::custom("loop text needs an explicit start vertex"))?;
        crate::dsl::parse_loop(&text, dim).map_err(serde::de::Error::custom)
    }
}

impl<'de> Deserialize<'de> for LoopSequence {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            loops: String,
        }
        let raw = Raw::deserialize(de)?;
        crate::dsl::parse_loop_dsl(&raw.loops, raw.dim).map_err(serde::de::Error::custom)
    }
}

fn rotated(l: &Loop, x: usize) -> (LatticeVector, Vec<Step>) {
    let p = l.rotated_to(x);
    (p.start, p.steps)
}

fn inverse_steps(steps: &[Step]) -> impl Iterator<Item = Step> + '_ {
    steps.iter().rev().map(|s| s.inverse())
}

/// Relation between the edge at `x` in `l` and the edge at `y` in `l2`.
pub fn incidence(l: &Loop, x: usize, l2: &Loop, y: usize) -> Result<Option<Incidence>, LoopError> {
    let e = l.edge_at(x)?;
    let f = l2.edge_at(y)?;
    Ok(if e == f {
        Some(Incidence::Same)
    } else if e == f.inverse() {
        Some(Incidence::Inverse)
    } else {
        None
    })
}

fn require_non_null(l: &Loop) -> Result<(), LoopError> {
    if l.is_null() {
        Err(LoopError::NullLoop)
    } else {
        Ok(())
    }
}

/// Positive or negative merger of `l` at `x` with `l2` at `y`.
pub fn merger(l: &Loop, l2: &Loop, x: usize, y: usize, sign: Sign) -> Result<Loop, LoopError> {
    require_non_null(l)?;
    require_non_null(l2)?;
    if l.dim() != l2.dim() {
        return Err(LoopError::DimensionMismatch { expected: l.dim(), got: l2.dim() });
    }
    let case = incidence(l, x, l2, y)?.ok_or(LoopError::EdgeMismatch { x, y })?;
    let (u, lp) = rotated(l, x);
    let (_, lq) = rotated(l2, y);
    Ok(merge_rotated(u, &lp, &lq, case, sign))
}

/// Merger on rotated step lists `e L` and `e' L'`, where `u = u(e)`.
fn merge_rotated(u: LatticeVector, lp: &[Step], lq: &[Step], case: Incidence, sign: Sign) -> Loop {
    let e = lp[0];
    let (big_l, big_lq) = (&lp[1..], &lq[1..]);
    let mut steps = Vec::with_capacity(lp.len() + lq.len());
    match (case, sign) {
        (Incidence::Same, Sign::Positive) => {
            steps.push(e);
            steps.extend_from_slice(big_lq);
            steps.push(e);
            steps.extend_from_slice(big_l);
        }
        (Incidence::Same, Sign::Negative) => {
            steps.extend(inverse_steps(big_lq));
            steps.extend_from_slice(big_l);
        }
        (Incidence::Inverse, Sign::Positive) => {
            steps.push(e);
            steps.extend(inverse_steps(big_lq));
            steps.push(e);
            steps.extend_from_slice(big_l);
        }
        (Incidence::Inverse, Sign::Negative) => {
            steps.extend_from_slice(big_lq);
            steps.extend_from_slice(big_l);
        }
    }
    reduce_closed(u, &steps)
}

fn pair_case(l: &Loop, x: usize, y: usize) -> Result<Incidence, LoopError> {
    require_non_null(l)?;
    l.check_location(x)?;
    l.check_location(y)?;
    if x == y {
        return Err(LoopError::SameLocation(x));
    }
    incidence(l, x, l, y)?.ok_or(LoopError::EdgeMismatch { x, y })
}

/// Splits the rotated list `e B e' C` into `(u(e), B, C)`.
fn split_parts(l: &Loop, x: usize, y: usize) -> (LatticeVector, Vec<Step>, usize) {
    let n = l.len();
    let fd = (y + n - x) % n;
    let (u, r) = rotated(l, x);
    (u, r, fd)
}

/// Positive (same edge) or negative (inverse edge) splitting of `l` at `(x, y)`.
pub fn splitting(l: &Loop, x: usize, y: usize, sign: Sign) -> Result<(Loop, Loop), LoopError> {
    let case = pair_case(l, x, y)?;
    let needed = match sign {
        Sign::Positive => Incidence::Same,
        Sign::Negative => Incidence::Inverse,
    };
    if case != needed {
        return Err(LoopError::WrongCase {
            op: if sign == Sign::Positive { "positive splitting" } else { "negative splitting" },
            needed: if needed == Incidence::Same { "equal" } else { "mutually inverse" },
            x,
            y,
        });
    }
    Ok(split_unchecked(l, x, y, case))
}

fn split_unchecked(l: &Loop, x: usize, y: usize, case: Incidence) -> (Loop, Loop) {
    let (u, r, fd) = split_parts(l, x, y);
    let e = r[0];
    let b = &r[1..fd];
    let c = &r[fd + 1..];
    let v = u.shifted(e);
    match case {
        Incidence::Same => {
            let mut first = Vec::with_capacity(c.len() + 1);
            first.push(e);
            first.extend_from_slice(c);
            let mut second = b.to_vec();
            second.push(e);
            (reduce_closed(u, &first), reduce_closed(v, &second))
        }
        Incidence::Inverse => (reduce_closed(u, c), reduce_closed(v, b)),
    }
}

/// Negative (same edge) or positive (inverse edge) twisting of `l` at `(x, y)`.
pub fn twisting(l: &Loop, x: usize, y: usize, sign: Sign) -> Result<Loop, LoopError> {
    let case = pair_case(l, x, y)?;
    let needed = match sign {
        Sign::Negative => Incidence::Same,
        Sign::Positive => Incidence::Inverse,
    };
    if case != needed {
        return Err(LoopError::WrongCase {
            op: if sign == Sign::Positive { "positive twisting" } else { "negative twisting" },
            needed: if needed == Incidence::Same { "equal" } else { "mutually inverse" },
            x,
            y,
        });
    }
    Ok(twist_unchecked(l, x, y, case))
}

fn twist_unchecked(l: &Loop, x: usize, y: usize, case: Incidence) -> Loop {
    let (u, r, fd) = split_parts(l, x, y);
    let e = r[0];
    let b = &r[1..fd];
    let c = &r[fd + 1..];
    let mut steps = Vec::with_capacity(r.len());
    match case {
        Incidence::Same => {
            steps.extend(inverse_steps(b));
            steps.extend_from_slice(c);
        }
        Incidence::Inverse => {
            steps.push(e);
            steps.extend(inverse_steps(b));
            steps.push(e.inverse());
            steps.extend_from_slice(c);
        }
    }
    reduce_closed(u, &steps)
}

/// The positively oriented plaquette with lowest corner `v0` in the plane of axes `a < b`.
pub fn positive_plaquette(v0: &LatticeVector, a: usize, b: usize) -> Loop {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let steps = vec![Step::plus(b), Step::plus(a), Step::minus(b), Step::minus(a)];
    reduce_closed(v0.clone(), &steps)
}

/// P⁺(e): the 2(d−1) positively oriented plaquettes containing `e` or `e⁻¹`.
///
/// Ordered by the other axis ascending, and for each axis the plaquette on the
/// negative side first.
pub fn plaquettes_containing(e: &DirectedEdge) -> Vec<Loop> {
    let dim = e.base.dim();
    let a = e.axis();
    let w = e.positive().base;
    let mut out = Vec::with_capacity(2 * (dim - 1));
    for mu in (1..=dim).filter(|&mu| mu != a) {
        out.push(positive_plaquette(&w.shifted(Step::minus(mu)), a, mu));
        out.push(positive_plaquette(&w, a, mu));
    }
    out
}

/// Checks that `p` is a plaquette: length 4 with no edge repeated or reversed.
pub fn is_plaquette(p: &Loop) -> bool {
    if p.len() != 4 {
        return false;
    }
    let edges = p.edges();
    edges.iter().all(|e| edges.iter().all(|f| *f != e.inverse()))
}

/// Deformation of `l` at `x` by the plaquette `p` (merger at the matching location of `p`).
pub fn deform(l: &Loop, x: usize, p: &Loop, sign: Sign) -> Result<Loop, LoopError> {
    require_non_null(l)?;
    if !is_plaquette(p) {
        return Err(LoopError::NotAPlaquette(p.to_string()));
    }
    let e = l.edge_at(x)?;
    let y = p
        .edges()
        .iter()
        .position(|f| *f == e || *f == e.inverse())
        .ok_or(LoopError::PlaquetteMismatch { x })?
        + 1;
    merger(l, p, x, y, sign)
}

/// Per-loop index from positive edges to `(location, same orientation as the key)`.
struct EdgeIndex {
    edges: Vec<DirectedEdge>,
    by_edge: HashMap<DirectedEdge, Vec<(usize, bool)>>,
}

impl EdgeIndex {
    fn new(l: &Loop) -> Self {
        let edges = l.edges();
        let mut by_edge: HashMap<DirectedEdge, Vec<(usize, bool)>> = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            by_edge.entry(e.positive()).or_default().push((i + 1, e.is_positive()));
        }
        EdgeIndex { edges, by_edge }
    }

    /// Locations carrying the edge at 1-based `x` of the indexed loop, or its inverse.
    fn partners(&self, e: &DirectedEdge) -> &[(usize, bool)] {
        self.by_edge.get(&e.positive()).map_or(&[], Vec::as_slice)
    }
}

/// Which families an enumeration should produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyFilter {
    pub twist: bool,
    pub split: bool,
    pub merge: bool,
    pub deform: bool,
}

impl FamilyFilter {
    pub const ALL: FamilyFilter = FamilyFilter { twist: true, split: true, merge: true, deform: true };
}

/// Calls `f` once per admissible operation of `s`, in the deterministic order
/// twists, splits, mergers, deformations; within a family by loop index, then
/// `x`, then `y`, then plaquette.
pub fn visit_operations(
    s: &LoopSequence,
    filter: FamilyFilter,
    f: &mut dyn FnMut(Operation, Sign, LoopSequence),
) {
    let loops = s.loops();
    let index: Vec<EdgeIndex> = loops.iter().map(EdgeIndex::new).collect();
    let pair_ops = |want_split: bool, f: &mut dyn FnMut(Operation, Sign, LoopSequence)| {
        for (r, l) in loops.iter().enumerate() {
            let idx = &index[r];
            for (xi, e) in idx.edges.iter().enumerate() {
                let x = xi + 1;
                for &(y, pos) in idx.partners(e) {
                    if y == x {
                        continue;
                    }
                    let case = if pos == e.is_positive() { Incidence::Same } else { Incidence::Inverse };
                    if want_split {
                        let sign = if case == Incidence::Same { Sign::Positive } else { Sign::Negative };
                        let (a, b) = split_unchecked(l, x, y, case);
                        f(Operation::Split { loop_index: r, x, y }, sign, s.splice(r, &[a, b]));
                    } else {
                        let sign = if case == Incidence::Same { Sign::Negative } else { Sign::Positive };
                        let t = twist_unchecked(l, x, y, case);
                        f(Operation::Twist { loop_index: r, x, y }, sign, s.splice(r, &[t]));
                    }
                }
            }
        }
    };
    if filter.twist {
        pair_ops(false, f);
    }
    if filter.split {
        pair_ops(true, f);
    }
    if filter.merge {
        for (r, l) in loops.iter().enumerate() {
            for (r2, l2) in loops.iter().enumerate() {
                if r2 == r {
                    continue;
                }
                for (xi, e) in index[r].edges.iter().enumerate() {
                    let x = xi + 1;
                    for &(y, pos) in index[r2].partners(e) {
                        let case = if pos == e.is_positive() { Incidence::Same } else { Incidence::Inverse };
                        let (u, lp) = rotated(l, x);
                        let (_, lq) = rotated(l2, y);
                        for sign in [Sign::Negative, Sign::Positive] {
                            let m = merge_rotated(u.clone(), &lp, &lq, case, sign);
                            f(Operation::Merge { first: r, second: r2, x, y }, sign, s.merged_at(r, r2, m));
                        }
                    }
                }
            }
        }
    }
    if filter.deform {
        for (r, l) in loops.iter().enumerate() {
            for (xi, e) in index[r].edges.iter().enumerate() {
                let x = xi + 1;
                for p in plaquettes_containing(e) {
                    for sign in [Sign::Negative, Sign::Positive] {
                        let d = deform(l, x, &p, sign).expect("plaquette from P+(e) contains e");
                        f(
                            Operation::Deform { loop_index: r, x, plaquette: p.clone() },
                            sign,
                            s.splice(r, &[d]),
                        );
                    }
                }
            }
        }
    }
}

/// The eight operation multisets 𝕋±, 𝕊±, 𝕄±, 𝔻± of a sequence.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FullOperations {
    pub twist_pos: Vec<OperationStep>,
    pub twist_neg: Vec<OperationStep>,
    pub split_pos: Vec<OperationStep>,
    pub split_neg: Vec<OperationStep>,
    pub merge_pos: Vec<OperationStep>,
    pub merge_neg: Vec<OperationStep>,
    pub deform_pos: Vec<OperationStep>,
    pub deform_neg: Vec<OperationStep>,
}

impl FullOperations {
    pub fn get(&self, family: Family, sign: Sign) -> &[OperationStep] {
        match (family, sign) {
            (Family::Twist, Sign::Positive) => &self.twist_pos,
            (Family::Twist, Sign::Negative) => &self.twist_neg,
            (Family::Split, Sign::Positive) => &self.split_pos,
            (Family::Split, Sign::Negative) => &self.split_neg,
            (Family::Merge, Sign::Positive) => &self.merge_pos,
            (Family::Merge, Sign::Negative) => &self.merge_neg,
            (Family::Deform, Sign::Positive) => &self.deform_pos,
            (Family::Deform, Sign::Negative) => &self.deform_neg,
            (Family::Inaction, _) => &[],
        }
    }

    fn get_mut(&mut self, family: Family, sign: Sign) -> &mut Vec<OperationStep> {
        match (family, sign) {
            (Family::Twist, Sign::Positive) => &mut self.twist_pos,
            (Family::Twist, Sign::Negative) => &mut self.twist_neg,
            (Family::Split, Sign::Positive) => &mut self.split_pos,
            (Family::Split, Sign::Negative) => &mut self.split_neg,
            (Family::Merge, Sign::Positive) => &mut self.merge_pos,
            (Family::Merge, Sign::Negative) => &mut self.merge_neg,
            (Family::Deform, Sign::Positive) => &mut self.deform_pos,
            (Family::Deform, Sign::Negative) => &mut self.deform_neg,
            (Family::Inaction, _) => unreachable!("inaction is not an operation multiset"),
        }
    }

    /// All steps in enumeration order.
    pub fn iter(&self) -> impl Iterator<Item = &OperationStep> {
        [
            &self.twist_pos,
            &self.twist_neg,
            &self.split_pos,
            &self.split_neg,
            &self.merge_pos,
            &self.merge_neg,
            &self.deform_pos,
            &self.deform_neg,
        ]
        .into_iter()
        .flatten()
    }

    pub fn total(&self) -> usize {
        self.iter().count()
    }
}

/// Every admissible operation on `s`, each location pair and loop pair ordered.
pub fn enumerate_full(s: &LoopSequence) -> FullOperations {
    let mut out = FullOperations::default();
    visit_operations(s, FamilyFilter::ALL, &mut |op, sign, result| {
        let fam = op.family();
        out.get_mut(fam, sign).push(OperationStep { op, sign: Some(sign), result });
    });
    out
}

/// Locations of the first edge `e` of loop 1 and of `e⁻¹`, in each loop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OccurrenceSets {
    pub edge: DirectedEdge,
    /// `a[r]`: 1-based locations of `e` in loop `r`.
    pub a: Vec<Vec<usize>>,
    /// `b[r]`: 1-based locations of `e⁻¹` in loop `r`.
    pub b: Vec<Vec<usize>>,
    pub m: usize,
}

impl OccurrenceSets {
    pub fn new(s: &LoopSequence, rule: FirstEdgeRule) -> Option<Self> {
        let l1 = s.loops().first()?;
        let edge = l1.edge_at(l1.first_location(rule)).expect("non-null loop");
        let inv = edge.inverse();
        let mut a: Vec<Vec<usize>> = Vec::with_capacity(s.size());
        let mut b: Vec<Vec<usize>> = Vec::with_capacity(s.size());
        for l in s.loops() {
            let edges = l.edges();
            a.push((1..=edges.len()).filter(|&i| edges[i - 1] == edge).collect());
            b.push((1..=edges.len()).filter(|&i| edges[i - 1] == inv).collect());
        }
        let m = a[0].len() + b[0].len();
        Some(OccurrenceSets { edge, a, b, m })
    }

    /// C_r = A_r ∪ B_r, sorted.
    pub fn c(&self, r: usize) -> Vec<usize> {
        let mut c: Vec<usize> = self.a[r].iter().chain(&self.b[r]).copied().collect();
        c.sort_unstable();
        c
    }
}

/// The first-edge-restricted signed families of the unsymmetrized equation.
#[derive(Clone, Debug, Serialize)]
pub struct FirstEdgeFamilies {
    pub occurrences: OccurrenceSets,
    pub twist: Vec<(Sign, LoopSequence)>,
    pub split: Vec<(Sign, LoopSequence)>,
    pub merge: Vec<(Sign, LoopSequence)>,
    pub deform: Vec<(Sign, LoopSequence)>,
}

impl FirstEdgeFamilies {
    pub fn m(&self) -> usize {
        self.occurrences.m
    }
}

/// Builds the twist, merge, split and deform families attached to the first
/// edge of loop 1. Each entry's sign is the polarity of the operation; its
/// term enters the equations with [`Sign::coefficient`].
pub fn enumerate_first_edge(s: &LoopSequence, rule: FirstEdgeRule, filter: FamilyFilter) -> Option<FirstEdgeFamilies> {
    let occ = OccurrenceSets::new(s, rule)?;
    let l1 = &s.loops()[0];
    let c1 = occ.c(0);
    let in_a = |x: usize| occ.a[0].contains(&x);
    let mut twist = Vec::new();
    let mut split = Vec::new();
    if filter.twist || filter.split {
        for &x in &c1 {
            for &y in &c1 {
                if x == y {
                    continue;
                }
                let case = if in_a(x) == in_a(y) { Incidence::Same } else { Incidence::Inverse };
                if filter.twist {
                    let sign = if case == Incidence::Same { Sign::Negative } else { Sign::Positive };
                    twist.push((sign, s.splice(0, &[twist_unchecked(l1, x, y, case)])));
                }
                if filter.split {
                    let sign = if case == Incidence::Same { Sign::Positive } else { Sign::Negative };
                    let (a, b) = split_unchecked(l1, x, y, case);
                    split.push((sign, s.splice(0, &[a, b])));
                }
            }
        }
    }
    let mut merge = Vec::new();
    if filter.merge {
        for r in 1..s.size() {
            let lr = &s.loops()[r];
            for &x in &c1 {
                for y in occ.c(r) {
                    let case = if in_a(x) == occ.a[r].contains(&y) { Incidence::Same } else { Incidence::Inverse };
                    let (u, lp) = rotated(l1, x);
                    let (_, lq) = rotated(lr, y);
                    for sign in [Sign::Negative, Sign::Positive] {
                        let m = merge_rotated(u.clone(), &lp, &lq, case, sign);
                        merge.push((sign, s.merged_at(0, r, m)));
                    }
                }
            }
        }
    }
    let mut deform_fam = Vec::new();
    if filter.deform {
        for p in plaquettes_containing(&occ.edge) {
            for &x in &c1 {
                for sign in [Sign::Negative, Sign::Positive] {
                    let d = deform(l1, x, &p, sign).expect("plaquette from P+(e) contains e");
                    deform_fam.push((sign, s.splice(0, &[d])));
                }
            }
        }
    }
    Some(FirstEdgeFamilies { occurrences: occ, twist, split, merge, deform: deform_fam })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_loop, parse_loop_dsl};

    fn lp(text: &str) -> Loop {
        parse_loop(text, 2).unwrap()
    }

    #[test]
    fn self_negative_merger_vanishes() {
        let p = lp("+1 +2 -1 -2");
        assert!(merger(&p, &p, 1, 1, Sign::Negative).unwrap().is_null());
    }

    #[test]
    fn adjacent_plaquettes_merge_into_domino() {
        let p = lp("+1 +2 -1 -2");
        let q = lp("@(1,0) +1 +2 -1 -2");
        // p has +2 at (1,0) at location 2; q has -2 at (1,1) at location 4.
        assert_eq!(incidence(&p, 2, &q, 4).unwrap(), Some(Incidence::Inverse));
        let neg = merger(&p, &q, 2, 4, Sign::Negative).unwrap();
        assert_eq!(neg, lp("+1 +1 +2 -1 -1 -2"));
        let pos = merger(&p, &q, 2, 4, Sign::Positive).unwrap();
        assert_eq!(pos.len(), 8);
        // Hand expansion of [e L'^-1 e L] from u(e) = (1,0).
        assert_eq!(pos, lp("@(1,0) +2 +1 -2 -1 +2 -1 -2 +1"));
    }

    #[test]
    fn merger_rejects_unrelated_edges() {
        let p = lp("+1 +2 -1 -2");
        assert!(matches!(merger(&p, &p, 1, 2, Sign::Positive), Err(LoopError::EdgeMismatch { .. })));
        assert!(matches!(merger(&p, &p, 1, 9, Sign::Positive), Err(LoopError::LocationOutOfRange { .. })));
    }

    #[test]
    fn doubled_plaquette_splits_into_two_copies() {
        let pp = lp("+1 +2 -1 -2 +1 +2 -1 -2");
        let p = lp("+1 +2 -1 -2");
        assert_eq!(splitting(&pp, 1, 5, Sign::Positive).unwrap(), (p.clone(), p));
        assert!(twisting(&pp, 1, 5, Sign::Negative).unwrap().is_null());
        assert!(splitting(&pp, 1, 5, Sign::Negative).is_err());
    }

    #[test]
    fn negative_split_of_two_plaquettes_joined_by_an_edge() {
        let l = lp("+1 +1 +2 -1 -2 -1 -1 +2 +1 -2");
        assert_eq!(l.len(), 10);
        // Input locations (1, 6) in the canonical rotation.
        let e = DirectedEdge::new(LatticeVector::origin(2), Step::plus(1));
        let edges = l.edges();
        let x = edges.iter().position(|f| *f == e).unwrap() + 1;
        let y = edges.iter().position(|f| *f == e.inverse()).unwrap() + 1;
        let (first, second) = splitting(&l, x, y, Sign::Negative).unwrap();
        assert_eq!(first, lp("-1 +2 +1 -2"));
        assert_eq!(second, lp("@(1,0) +1 +2 -1 -2"));
        assert!(first.len() < 10 - 5 && second.len() < 5);
        let t = twisting(&l, x, y, Sign::Positive).unwrap();
        assert_eq!(t.len(), 10);
        assert_eq!(t, lp("+1 +2 +1 -2 -1 -1 -1 +2 +1 -2"));
    }

    #[test]
    fn plaquette_neighborhood() {
        let e = DirectedEdge::new(LatticeVector::new(&[0, 0]), Step::plus(1));
        let ps = plaquettes_containing(&e);
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0], lp("@(0,-1) +2 +1 -2 -1"));
        assert_eq!(ps[1], lp("+2 +1 -2 -1"));
        let e3 = DirectedEdge::new(LatticeVector::origin(3), Step::minus(2));
        assert_eq!(plaquettes_containing(&e3).len(), 4);
        for p in plaquettes_containing(&e3) {
            assert!(is_plaquette(&p));
            assert!(p.edges().iter().any(|f| *f == e3 || *f == e3.inverse()));
        }
    }

    #[test]
    fn deformation_examples() {
        let p = lp("+2 +1 -2 -1");
        for x in 1..=4 {
            assert!(deform(&p, x, &p, Sign::Negative).unwrap().is_null());
        }
        let q = lp("@(1,0) +2 +1 -2 -1");
        // p's right side (1,1)->(1,0) is at location 3; q's left side (1,0)->(1,1) at location 1.
        assert_eq!(deform(&p, 3, &q, Sign::Negative).unwrap().len(), 6);
        assert!(matches!(
            deform(&p, 1, &lp("@(5,5) +2 +1 -2 -1"), Sign::Negative),
            Err(LoopError::PlaquetteMismatch { x: 1 })
        ));
    }

    #[test]
    fn plaquette_multiset_counts() {
        let s = parse_loop_dsl("+1 +2 -1 -2", 2).unwrap();
        let ops = enumerate_full(&s);
        assert_eq!(ops.deform_pos.len(), 8);
        assert_eq!(ops.deform_neg.len(), 8);
        assert_eq!(ops.total(), 16);
        let fe = enumerate_first_edge(&s, FirstEdgeRule::LexMin, FamilyFilter::ALL).unwrap();
        assert_eq!(fe.m(), 1);
        assert_eq!(fe.deform.iter().filter(|(s, _)| *s == Sign::Negative).count(), 2);
        assert_eq!(fe.deform.iter().filter(|(s, _)| *s == Sign::Positive).count(), 2);
        assert!(fe.twist.is_empty() && fe.split.is_empty() && fe.merge.is_empty());
    }

    #[test]
    fn doubled_plaquette_families() {
        let s = parse_loop_dsl("+1 +2 -1 -2 +1 +2 -1 -2", 2).unwrap();
        let ops = enumerate_full(&s);
        assert_eq!(ops.split_pos.len(), 8);
        for st in &ops.split_pos {
            let Operation::Split { x, y, .. } = st.op else { panic!() };
            assert_eq!((x + 8 - y) % 8, 4);
        }
        let fe = enumerate_first_edge(&s, FirstEdgeRule::LexMin, FamilyFilter::ALL).unwrap();
        assert_eq!(fe.m(), 2);
        assert_eq!(fe.twist.len(), 2);
        assert!(!fe.split.is_empty());
    }
}
