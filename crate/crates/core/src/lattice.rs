//! Vertices, unit steps, directed edges and paths of the integer lattice Z^d.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::LoopError;

/// Largest supported dimension. Steps are stored as a signed byte.
pub const MAX_DIM: usize = 64;

/// A vertex of Z^d.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LatticeVector(SmallVec<[i32; 4]>);

impl LatticeVector {
    pub fn new(coords: &[i32]) -> Self {
        LatticeVector(SmallVec::from_slice(coords))
    }

    pub fn origin(dim: usize) -> Self {
        LatticeVector(SmallVec::from_elem(0, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    /// The vertex reached by taking `step` from `self`.
    pub fn shifted(&self, step: Step) -> Self {
        let mut out = self.clone();
        out.apply(step);
        out
    }

    /// In-place version of [`LatticeVector::shifted`].
    pub fn apply(&mut self, step: Step) {
        let a = step.axis() - 1;
        self.0[a] += if step.is_positive() { 1 } else { -1 };
    }

    pub fn add(&self, other: &LatticeVector) -> Self {
        LatticeVector(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> Self {
        LatticeVector(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }

    /// Sup-norm distance.
    pub fn linf_distance(&self, other: &LatticeVector) -> i32 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for LatticeVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

/// A unit step `±axis`, axes numbered from 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step(i8);

impl Step {
    pub fn new(axis: usize, positive: bool) -> Self {
        assert!((1..=MAX_DIM).contains(&axis), "axis {axis} out of range");
        let a = axis as i8;
        Step(if positive { a } else { -a })
    }

    pub fn plus(axis: usize) -> Self {
        Step::new(axis, true)
    }

    pub fn minus(axis: usize) -> Self {
        Step::new(axis, false)
    }

    /// Signed integer form, `+axis` or `-axis`.
    pub fn signed(self) -> i32 {
        self.0 as i32
    }

    pub fn from_signed(v: i32) -> Option<Self> {
        if v == 0 || v.unsigned_abs() as usize > MAX_DIM {
            None
        } else {
            Some(Step(v as i8))
        }
    }

    pub fn axis(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn inverse(self) -> Self {
        Step(-self.0)
    }

    /// Sort key with `+` before `-` on the same axis.
    fn order_key(self) -> (usize, bool) {
        (self.axis(), !self.is_positive())
    }
}

impl Ord for Step {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for Step {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.is_positive() { '+' } else { '-' }, self.axis())
    }
}

impl Serialize for Step {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A directed edge given by its base vertex u(e) and the step to v(e).
///
/// Ordering is lexicographic in (base, axis, sign) with `+` before `-`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct DirectedEdge {
    pub base: LatticeVector,
    pub step: Step,
}

impl DirectedEdge {
    pub fn new(base: LatticeVector, step: Step) -> Self {
        DirectedEdge { base, step }
    }

    pub fn axis(&self) -> usize {
        self.step.axis()
    }

    /// Positively oriented iff u(e) is lexicographically smaller than v(e).
    pub fn is_positive(&self) -> bool {
        self.step.is_positive()
    }

    pub fn head(&self) -> LatticeVector {
        self.base.shifted(self.step)
    }

    pub fn inverse(&self) -> Self {
        DirectedEdge { base: self.head(), step: self.step.inverse() }
    }

    /// The positively oriented member of `{e, e⁻¹}`.
    pub fn positive(&self) -> Self {
        if self.is_positive() {
            self.clone()
        } else {
            self.inverse()
        }
    }
}

impl Ord for DirectedEdge {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base.cmp(&other.base).then(self.step.cmp(&other.step))
    }
}

impl PartialOrd for DirectedEdge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A lattice path: a start vertex followed by unit steps.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Path {
    pub start: LatticeVector,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn new(start: LatticeVector, steps: Vec<Step>) -> Self {
        Path { start, steps }
    }

    /// Builds a path from an explicit edge list, checking that consecutive edges chain.
    pub fn from_edges(dim: usize, edges: &[DirectedEdge]) -> Result<Self, LoopError> {
        let Some(first) = edges.first() else {
            return Ok(Path::new(LatticeVector::origin(dim), Vec::new()));
        };
        let mut at = first.base.clone();
        let mut steps = Vec::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if e.base != at {
                return Err(LoopError::Disconnected { position: i + 1 });
            }
            at.apply(e.step);
            steps.push(e.step);
        }
        Ok(Path::new(first.base.clone(), steps))
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> LatticeVector {
        let mut at = self.start.clone();
        for &s in &self.steps {
            at.apply(s);
        }
        at
    }

    /// The null path counts as closed.
    pub fn is_closed(&self) -> bool {
        self.end() == self.start
    }

    pub fn edges(&self) -> Vec<DirectedEdge> {
        let mut at = self.start.clone();
        let mut out = Vec::with_capacity(self.steps.len());
        for &s in &self.steps {
            out.push(DirectedEdge::new(at.clone(), s));
            at.apply(s);
        }
        out
    }

    pub fn vertices(&self) -> Vec<LatticeVector> {
        let mut at = self.start.clone();
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(at.clone());
        for &s in &self.steps {
            at.apply(s);
            out.push(at.clone());
        }
        out
    }

    pub fn inverse(&self) -> Self {
        Path::new(self.end(), self.steps.iter().rev().map(|s| s.inverse()).collect())
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn concat(&self, other: &Path) -> Result<Self, LoopError> {
        if self.end() != other.start {
            return Err(LoopError::Disconnected { position: self.len() + 1 });
        }
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Ok(Path::new(self.start.clone(), steps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_order_puts_plus_first() {
        assert!(Step::plus(1) < Step::minus(1));
        assert!(Step::minus(1) < Step::plus(2));
    }

    #[test]
    fn inverse_edge_roundtrip() {
        let e = DirectedEdge::new(LatticeVector::new(&[2, -1]), Step::minus(2));
        assert_eq!(e.inverse().inverse(), e);
        assert_eq!(e.inverse().base, LatticeVector::new(&[2, -2]));
        assert!(e.inverse().is_positive());
        assert_eq!(e.positive(), e.inverse());
    }

    #[test]
    fn path_closure_and_inverse() {
        let p = Path::new(
            LatticeVector::origin(2),
            vec![Step::plus(1), Step::plus(2), Step::minus(1), Step::minus(2)],
        );
        assert!(p.is_closed());
        let q = p.inverse();
        assert_eq!(q.steps, vec![Step::plus(2), Step::plus(1), Step::minus(2), Step::minus(1)]);
        assert_eq!(Path::from_edges(2, &p.edges()).unwrap(), p);
    }
}
