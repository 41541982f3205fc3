//! Loops (nonbacktracking cycles in canonical rotation) and loop sequences.
//!
//! A [`Loop`] is stored as a start vertex plus its unit steps, rotated so that
//! the sequence of `(base, axis, sign)` triples is lexicographically smallest.
//! The first edge of that rotation is the loop's distinguished first edge.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LoopError;
use crate::lattice::{DirectedEdge, LatticeVector, Path, Step, MAX_DIM};

/// Which rotation of a loop supplies the distinguished first edge.
///
/// Stored loops always use [`FirstEdgeRule::LexMin`]; the alternative exists so
/// that coefficient values can be checked for independence from the choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum FirstEdgeRule {
    #[default]
    LexMin,
    LexMax,
}

pub(crate) fn check_dim(dim: usize) -> Result<(), LoopError> {
    if (2..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(LoopError::BadDimension(dim))
    }
}

/// A nonbacktracking cycle in canonical rotation, or the null loop.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Loop {
    start: LatticeVector,
    steps: Vec<Step>,
}

impl Loop {
    pub fn null(dim: usize) -> Self {
        Loop { start: LatticeVector::origin(dim), steps: Vec::new() }
    }

    /// Wraps steps that are already known to be a canonical nonbacktracking cycle.
    fn from_canonical(start: LatticeVector, steps: Vec<Step>) -> Self {
        if steps.is_empty() {
            let dim = start.dim();
            return Loop::null(dim);
        }
        Loop { start, steps }
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_null(&self) -> bool {
        self.steps.is_empty()
    }

    /// Base vertex of the first edge; the lexicographically smallest vertex of the loop.
    pub fn start(&self) -> &LatticeVector {
        &self.start
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn path(&self) -> Path {
        Path::new(self.start.clone(), self.steps.clone())
    }

    pub fn edges(&self) -> Vec<DirectedEdge> {
        self.path().edges()
    }

    /// Vertices visited, one per location (u of each edge).
    pub fn vertices(&self) -> Vec<LatticeVector> {
        let mut v = self.path().vertices();
        v.pop();
        v
    }

    /// Edge at 1-based location `x`.
    pub fn edge_at(&self, x: usize) -> Result<DirectedEdge, LoopError> {
        self.check_location(x)?;
        let mut at = self.start.clone();
        for &s in &self.steps[..x - 1] {
            at.apply(s);
        }
        Ok(DirectedEdge::new(at, self.steps[x - 1]))
    }

    pub(crate) fn check_location(&self, x: usize) -> Result<(), LoopError> {
        if x == 0 || x > self.len() {
            Err(LoopError::LocationOutOfRange { location: x, len: self.len() })
        } else {
            Ok(())
        }
    }

    /// The representative path starting at 1-based location `x`.
    pub fn rotated_to(&self, x: usize) -> Path {
        let n = self.len();
        if n == 0 {
            return self.path();
        }
        let mut at = self.start.clone();
        for &s in &self.steps[..x - 1] {
            at.apply(s);
        }
        let mut steps = Vec::with_capacity(n);
        steps.extend_from_slice(&self.steps[x - 1..]);
        steps.extend_from_slice(&self.steps[..x - 1]);
        Path::new(at, steps)
    }

    /// The first edge under `rule` as a 1-based location in the stored rotation.
    pub fn first_location(&self, rule: FirstEdgeRule) -> usize {
        match rule {
            FirstEdgeRule::LexMin => 1,
            FirstEdgeRule::LexMax => {
                let verts = self.vertices();
                extreme_rotation(&verts, &self.steps, Ordering::Greater) + 1
            }
        }
    }

    pub fn inverse(&self) -> Loop {
        if self.is_null() {
            return self.clone();
        }
        let p = self.path().inverse();
        canonical_rotation(p.start, p.steps)
    }

    pub fn translated(&self, by: &LatticeVector) -> Loop {
        if self.is_null() {
            return self.clone();
        }
        Loop { start: self.start.add(by), steps: self.steps.clone() }
    }
}

impl fmt::Debug for Loop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Loop[{}]", crate::dsl::emit_loop(self))
    }
}

impl fmt::Display for Loop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::emit_loop(self))
    }
}

/// Index of the lexicographically extreme rotation of a cyclic triple list.
fn extreme_rotation(verts: &[LatticeVector], steps: &[Step], want: Ordering) -> usize {
    let n = steps.len();
    let triple_cmp = |i: usize, j: usize| -> Ordering {
        verts[i].cmp(&verts[j]).then(steps[i].cmp(&steps[j]))
    };
    let mut best = 0;
    for r in 1..n {
        let first = triple_cmp(r, best);
        if first == want.reverse() {
            continue;
        }
        let mut ord = first;
        let mut j = 1;
        while ord == Ordering::Equal && j < n {
            ord = triple_cmp((r + j) % n, (best + j) % n);
            j += 1;
        }
        if ord == want {
            best = r;
        }
    }
    best
}

/// Rotates a nonbacktracking closed step list into canonical form.
fn canonical_rotation(start: LatticeVector, steps: Vec<Step>) -> Loop {
    let n = steps.len();
    if n == 0 {
        return Loop::null(start.dim());
    }
    let mut verts = Vec::with_capacity(n);
    let mut at = start;
    for &s in &steps {
        verts.push(at.clone());
        at.apply(s);
    }
    let r = extreme_rotation(&verts, &steps, Ordering::Less);
    if r == 0 {
        return Loop::from_canonical(verts.swap_remove(0), steps);
    }
    let mut rotated = Vec::with_capacity(n);
    rotated.extend_from_slice(&steps[r..]);
    rotated.extend_from_slice(&steps[..r]);
    Loop::from_canonical(verts.swap_remove(r), rotated)
}

/// Erases backtracks from a closed step list, linearly and then cyclically.
pub(crate) fn reduce_closed(start: LatticeVector, steps: &[Step]) -> Loop {
    let mut stack: Vec<Step> = Vec::with_capacity(steps.len());
    for &s in steps {
        if stack.last() == Some(&s.inverse()) {
            stack.pop();
        } else {
            stack.push(s);
        }
    }
    let mut lo = 0;
    let mut hi = stack.len();
    let mut start = start;
    while hi - lo >= 2 && stack[lo] == stack[hi - 1].inverse() {
        start.apply(stack[lo]);
        lo += 1;
        hi -= 1;
    }
    canonical_rotation(start, stack[lo..hi].to_vec())
}

/// The nonbacktracking core `[c]` of a closed path.
pub fn nonbacktracking_core(c: &Path) -> Result<Loop, LoopError> {
    if !c.is_closed() {
        return Err(LoopError::NotClosed { start: c.start.to_string(), end: c.end().to_string() });
    }
    Ok(reduce_closed(c.start.clone(), &c.steps))
}

/// Canonical rotation of a closed path that has no backtracks, cyclically.
pub fn canonicalize(l: &Path) -> Result<Loop, LoopError> {
    if !l.is_closed() {
        return Err(LoopError::NotClosed { start: l.start.to_string(), end: l.end().to_string() });
    }
    let n = l.steps.len();
    for i in 0..n {
        if l.steps[(i + 1) % n] == l.steps[i].inverse() {
            return Err(LoopError::Backtracking { position: i + 1 });
        }
    }
    Ok(canonical_rotation(l.start.clone(), l.steps.clone()))
}

/// Length, size, index and degree sequence of a loop sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measures {
    pub length: usize,
    pub size: usize,
    pub index: usize,
    pub degrees: Vec<usize>,
}

/// Ordered tuple of non-null loops (the minimal representation).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LoopSequence {
    dim: usize,
    loops: Vec<Loop>,
}

impl LoopSequence {
    pub fn null(dim: usize) -> Self {
        LoopSequence { dim, loops: Vec::new() }
    }

    /// Builds a sequence, dropping null loops.
    pub fn new(dim: usize, loops: Vec<Loop>) -> Result<Self, LoopError> {
        check_dim(dim)?;
        for l in &loops {
            if l.dim() != dim {
                return Err(LoopError::DimensionMismatch { expected: dim, got: l.dim() });
            }
        }
        Ok(Self::from_loops_unchecked(dim, loops))
    }

    pub(crate) fn from_loops_unchecked(dim: usize, loops: Vec<Loop>) -> Self {
        LoopSequence { dim, loops: loops.into_iter().filter(|l| !l.is_null()).collect() }
    }

    pub fn single(l: Loop) -> Self {
        let dim = l.dim();
        Self::from_loops_unchecked(dim, vec![l])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn is_null(&self) -> bool {
        self.loops.is_empty()
    }

    /// |s|, the total number of edges.
    pub fn length(&self) -> usize {
        self.loops.iter().map(Loop::len).sum()
    }

    /// #s, the number of loops.
    pub fn size(&self) -> usize {
        self.loops.len()
    }

    /// ι(s) = |s| − #s.
    pub fn index(&self) -> usize {
        self.length() - self.size()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.loops.iter().map(Loop::len).collect()
    }

    pub fn measures(&self) -> Measures {
        Measures {
            length: self.length(),
            size: self.size(),
            index: self.index(),
            degrees: self.degrees(),
        }
    }

    pub fn translated(&self, by: &LatticeVector) -> Self {
        LoopSequence { dim: self.dim, loops: self.loops.iter().map(|l| l.translated(by)).collect() }
    }

    /// Concatenation of two sequences, `self` first.
    pub fn concat(&self, other: &LoopSequence) -> Self {
        let mut loops = self.loops.clone();
        loops.extend(other.loops.iter().cloned());
        LoopSequence { dim: self.dim, loops }
    }

    /// Replaces loop `r` by `with` (which may contain zero, one or two loops).
    pub(crate) fn splice(&self, r: usize, with: &[Loop]) -> Self {
        let mut loops = Vec::with_capacity(self.loops.len() + 1);
        loops.extend_from_slice(&self.loops[..r]);
        loops.extend(with.iter().filter(|l| !l.is_null()).cloned());
        loops.extend_from_slice(&self.loops[r + 1..]);
        LoopSequence { dim: self.dim, loops }
    }

    /// Puts `merged` at position `r` and removes loop `r2`.
    pub(crate) fn merged_at(&self, r: usize, r2: usize, merged: Loop) -> Self {
        let mut loops = Vec::with_capacity(self.loops.len());
        for (j, l) in self.loops.iter().enumerate() {
            if j == r {
                if !merged.is_null() {
                    loops.push(merged.clone());
                }
            } else if j != r2 {
                loops.push(l.clone());
            }
        }
        LoopSequence { dim: self.dim, loops }
    }

    /// Translation-normalized key; equal iff the sequences differ by one global translation.
    pub fn canonical_key(&self) -> SeqKey {
        let mut out = Vec::with_capacity(2 + self.length() + self.size() * (self.dim + 1));
        out.push(self.dim as i32);
        out.push(self.loops.len() as i32);
        let origin = self.loops.first().map(|l| l.start().clone());
        for l in &self.loops {
            out.push(l.len() as i32);
            let o = origin.as_ref().expect("non-empty");
            for (a, b) in l.start().coords().iter().zip(o.coords()) {
                out.push(a - b);
            }
            out.extend(l.steps().iter().map(|s| s.signed()));
        }
        SeqKey(out.into_boxed_slice())
    }

    /// Every vertex visited by some loop.
    pub fn vertices(&self) -> Vec<LatticeVector> {
        self.loops.iter().flat_map(|l| l.vertices()).collect()
    }
}

impl fmt::Debug for LoopSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seq[{}]", crate::dsl::emit_sequence(self))
    }
}

impl fmt::Display for LoopSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::emit_sequence(self))
    }
}

/// Opaque memoization key produced by [`LoopSequence::canonical_key`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct SeqKey(Box<[i32]>);

impl SeqKey {
    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    /// Rebuilds a key from its raw encoding, checking that it is canonical.
    pub fn from_raw(raw: Vec<i32>) -> Result<Self, LoopError> {
        let key = SeqKey(raw.into_boxed_slice());
        let seq = key.to_sequence()?;
        if seq.canonical_key() != key {
            return Err(LoopError::BadToken {
                position: 0,
                token: format!("{:?}", key.0),
                reason: "key is not in canonical form".into(),
            });
        }
        Ok(key)
    }

    /// Rebuilds the representative sequence (loop 1 starting at the origin).
    pub fn to_sequence(&self) -> Result<LoopSequence, LoopError> {
        let bad = || LoopError::BadToken {
            position: 0,
            token: format!("{:?}", self.0),
            reason: "malformed key".into(),
        };
        let v = &self.0;
        let dim = *v.first().ok_or_else(bad)? as usize;
        check_dim(dim)?;
        let n = *v.get(1).ok_or_else(bad)? as usize;
        let mut pos = 2;
        let mut loops = Vec::with_capacity(n);
        for _ in 0..n {
            let len = *v.get(pos).ok_or_else(bad)? as usize;
            pos += 1;
            let start = LatticeVector::new(v.get(pos..pos + dim).ok_or_else(bad)?);
            pos += dim;
            let steps = v
                .get(pos..pos + len)
                .ok_or_else(bad)?
                .iter()
                .map(|&s| Step::from_signed(s).filter(|st| st.axis() <= dim).ok_or_else(bad))
                .collect::<Result<Vec<_>, _>>()?;
            pos += len;
            let path = Path::new(start, steps);
            let l = canonicalize(&path)?;
            if l.start() != &path.start {
                return Err(bad());
            }
            loops.push(l);
        }
        if pos != v.len() {
            return Err(bad());
        }
        LoopSequence::new(dim, loops)
    }
}
