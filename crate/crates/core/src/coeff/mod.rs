//! Exact coefficients a_{i,k}(s) and b_{i,k}(s) of the 1/N expansion.
//!
//! Three recursions share one engine and one memo:
//!
//! * [`Recursion::Unsymmetrized`] uses the first edge `e` of loop 1 and the
//!   occurrence count `m = |C_1|`;
//! * [`Recursion::Symmetrized`] sums over every operation, normalized by `|s|`;
//! * [`Recursion::Absolute`] is the symmetrized recursion with all signs `+`,
//!   which defines b_{i,k}(s).
//!
//! All three have the shape
//!
//! ```text
//! c_{i,k}(s) = c_{i,k-1}(s) + (1/n) [ Σ_twist c_{i,k-1} + Σ_merge c_{i,k-2}
//!                                   + Σ_split c_{i,k}   + Σ_deform c_{i-1,k} ]
//! ```
//!
//! with `n = m` or `n = |s|`. Values with `i < 0` or `k < 0` are zero.

mod bounds;
mod cache;
mod series;

use std::collections::{HashMap, HashSet};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use bounds::{catalan, coeff_bound, growth_bound, k_constant};
pub use cache::{CacheEntry, CacheFile, CoefficientRow, CACHE_FORMAT, CACHE_VERSION};
pub use series::{f_partial, master_residual, MasterResidual, SeriesOptions, SeriesResult};

use crate::error::CoeffError;
use crate::loops::{check_dim, FirstEdgeRule, LoopSequence, SeqKey};
use crate::ops::{enumerate_first_edge, visit_operations, Family, FamilyFilter};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Recursion {
    Unsymmetrized,
    Symmetrized,
    Absolute,
}

/// Treatment of the zero-deformation coefficients a_{0,k}(s), k ≥ 1, s non-null.
///
/// With [`ZeroOrder::Recursive`] they follow from the recursion like every
/// other entry. [`ZeroOrder::PinnedZero`] forces them to zero instead; that
/// choice disagrees with the trajectory sums on sequences that can vanish
/// without deformations, such as a doubled plaquette.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ZeroOrder {
    #[default]
    Recursive,
    PinnedZero,
}

type MemoKey = (Recursion, SeqKey, u32, u32);

/// Memoizing evaluator for the coefficient recursions in a fixed dimension.
pub struct CoefficientEngine {
    dim: usize,
    rule: FirstEdgeRule,
    zero_order: ZeroOrder,
    memo: HashMap<MemoKey, Rational>,
    active: HashSet<MemoKey>,
}

impl CoefficientEngine {
    pub fn new(dim: usize) -> Result<Self, CoeffError> {
        check_dim(dim)?;
        Ok(CoefficientEngine {
            dim,
            rule: FirstEdgeRule::LexMin,
            zero_order: ZeroOrder::Recursive,
            memo: HashMap::new(),
            active: HashSet::new(),
        })
    }

    /// Uses `rule` to pick the first edge in the unsymmetrized recursion.
    pub fn with_rule(mut self, rule: FirstEdgeRule) -> Self {
        self.rule = rule;
        self.memo.clear();
        self
    }

    pub fn with_zero_order(mut self, z: ZeroOrder) -> Self {
        self.zero_order = z;
        self.memo.clear();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rule(&self) -> FirstEdgeRule {
        self.rule
    }

    pub fn zero_order(&self) -> ZeroOrder {
        self.zero_order
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Iterates over memoized `(recursion, key, i, k, value)` entries.
    pub fn memo_entries(&self) -> impl Iterator<Item = (Recursion, &SeqKey, u32, u32, &Rational)> {
        self.memo.iter().map(|((r, key, i, k), v)| (*r, key, *i, *k, v))
    }

    pub(crate) fn insert_memo(&mut self, r: Recursion, key: SeqKey, i: u32, k: u32, v: Rational) {
        self.memo.insert((r, key, i, k), v);
    }

    /// a_{i,k}(s) through the first-edge recursion.
    pub fn a_coeff(&mut self, s: &LoopSequence, i: u32, k: u32) -> Result<Rational, CoeffError> {
        self.coeff(Recursion::Unsymmetrized, s, i, k)
    }

    /// a_{i,k}(s) through the recursion over all operations.
    pub fn a_coeff_symmetrized(&mut self, s: &LoopSequence, i: u32, k: u32) -> Result<Rational, CoeffError> {
        self.coeff(Recursion::Symmetrized, s, i, k)
    }

    /// b_{i,k}(s), the all-plus counterpart.
    pub fn b_coeff(&mut self, s: &LoopSequence, i: u32, k: u32) -> Result<Rational, CoeffError> {
        self.coeff(Recursion::Absolute, s, i, k)
    }

    pub fn coeff(&mut self, r: Recursion, s: &LoopSequence, i: u32, k: u32) -> Result<Rational, CoeffError> {
        if s.dim() != self.dim {
            return Err(crate::error::LoopError::DimensionMismatch { expected: self.dim, got: s.dim() }.into());
        }
        self.eval(r, s, i as i64, k as i64)
    }

    fn eval(&mut self, r: Recursion, s: &LoopSequence, i: i64, k: i64) -> Result<Rational, CoeffError> {
        if i < 0 || k < 0 {
            return Ok(rational::zero());
        }
        if s.is_null() {
            return Ok(if i == 0 && k == 0 { rational::one() } else { rational::zero() });
        }
        if i == 0 && (k == 0 || self.zero_order == ZeroOrder::PinnedZero) {
            return Ok(rational::zero());
        }
        // Every term of the recursion preserves #s > i + k, and the base cases vanish there.
        if s.size() as i64 > i + k {
            return Ok(rational::zero());
        }
        let key = (r, s.canonical_key(), i as u32, k as u32);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        if !self.active.insert(key.clone()) {
            return Err(CoeffError::Cycle(format!("{r:?} {s} i={i} k={k}")));
        }
        let result = self.expand(r, s, i, k);
        self.active.remove(&key);
        let v = result?;
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    fn expand(&mut self, r: Recursion, s: &LoopSequence, i: i64, k: i64) -> Result<Rational, CoeffError> {
        let filter = FamilyFilter { twist: k >= 1, split: true, merge: k >= 2 && s.size() >= 2, deform: i >= 1 };
        let target = |fam: Family| match fam {
            Family::Twist => (i, k - 1),
            Family::Merge => (i, k - 2),
            Family::Split => (i, k),
            Family::Deform => (i - 1, k),
            Family::Inaction => (i, k - 1),
        };
        let mut value = self.eval(r, s, i, k - 1)?;
        let mut acc = rational::zero();
        let norm;
        match r {
            Recursion::Unsymmetrized => {
                let fam = enumerate_first_edge(s, self.rule, filter).expect("non-null sequence");
                norm = fam.m();
                let groups = [
                    (Family::Twist, &fam.twist),
                    (Family::Merge, &fam.merge),
                    (Family::Split, &fam.split),
                    (Family::Deform, &fam.deform),
                ];
                for (family, entries) in groups {
                    let (ti, tk) = target(family);
                    for (sign, next) in entries {
                        let v = self.eval(r, next, ti, tk)?;
                        accumulate(&mut acc, sign.coefficient(), v);
                    }
                }
            }
            Recursion::Symmetrized | Recursion::Absolute => {
                norm = s.length();
                let mut children = Vec::new();
                visit_operations(s, filter, &mut |op, sign, next| children.push((op.family(), sign, next)));
                for (family, sign, next) in children {
                    let (ti, tk) = target(family);
                    let v = self.eval(r, &next, ti, tk)?;
                    let c = if r == Recursion::Absolute { 1 } else { sign.coefficient() };
                    accumulate(&mut acc, c, v);
                }
            }
        }
        if !acc.is_zero() {
            value += acc / Rational::from_integer((norm as i64).into());
        }
        Ok(value)
    }
}

fn accumulate(acc: &mut Rational, c: i32, v: Rational) {
    if v.is_zero() {
        return;
    }
    if c > 0 {
        *acc += v;
    } else {
        *acc -= v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_loop_dsl;

    fn seq(text: &str) -> LoopSequence {
        parse_loop_dsl(text, 2).unwrap()
    }

    #[test]
    fn null_sequence_base_cases() {
        let mut e = CoefficientEngine::new(2).unwrap();
        let null = LoopSequence::null(2);
        for r in [Recursion::Unsymmetrized, Recursion::Symmetrized, Recursion::Absolute] {
            assert_eq!(e.coeff(r, &null, 0, 0).unwrap(), rational::one());
            for (i, k) in [(1, 0), (0, 1), (2, 3)] {
                assert_eq!(e.coeff(r, &null, i, k).unwrap(), rational::zero());
            }
        }
    }

    #[test]
    fn plaquette_first_order() {
        let mut e = CoefficientEngine::new(2).unwrap();
        let p = seq("+1 +2 -1 -2");
        assert_eq!(e.a_coeff(&p, 0, 0).unwrap(), rational::zero());
        assert_eq!(e.a_coeff(&p, 1, 0).unwrap(), rational::one());
        assert_eq!(e.a_coeff_symmetrized(&p, 1, 0).unwrap(), rational::one());
        assert_eq!(e.b_coeff(&p, 1, 0).unwrap(), rational::one());
    }

    #[test]
    fn doubled_plaquette_zero_order_depends_on_convention() {
        let pp = seq("+1 +2 -1 -2 +1 +2 -1 -2");
        let mut e = CoefficientEngine::new(2).unwrap();
        assert_eq!(e.a_coeff(&pp, 0, 1).unwrap(), rational::one());
        let mut pinned = CoefficientEngine::new(2).unwrap().with_zero_order(ZeroOrder::PinnedZero);
        assert_eq!(pinned.a_coeff(&pp, 0, 1).unwrap(), rational::zero());
    }

    #[test]
    fn dimension_is_checked() {
        let mut e = CoefficientEngine::new(3).unwrap();
        assert!(e.a_coeff(&seq("+1 +2 -1 -2"), 1, 0).is_err());
        assert!(CoefficientEngine::new(1).is_err());
    }
}
