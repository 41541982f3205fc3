//! Partial sums of f_k(s) = Σ_i a_{i,k}(s) β^i with explicit truncation tails.

use num_traits::{One, Signed};
use serde::Serialize;

use super::bounds::{coeff_bound, growth_bound, k_constant};
use super::CoefficientEngine;
use crate::error::CoeffError;
use crate::loops::LoopSequence;
use crate::ops::{visit_operations, Family, FamilyFilter};
use crate::rational::{self, Rational};

/// How many orders to sum.
#[derive(Clone, Debug)]
pub struct SeriesOptions {
    /// Fixed truncation order. When `None`, the smallest order whose tail is
    /// below `rel_tol · max(1, |partial|)` is used, up to `i_cap`.
    pub i_max: Option<u32>,
    pub i_cap: u32,
    pub rel_tol: Rational,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { i_max: None, i_cap: 6, rel_tol: Rational::new(1.into(), 1_000_000_000.into()) }
    }
}

/// A truncated series for f_k(s) at a given β.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesResult {
    pub k: u32,
    pub i_max: u32,
    /// `coefficients[i] = a_{i,k}(s)`.
    #[serde(with = "rational::serde_str::vec")]
    pub coefficients: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub beta: Rational,
    #[serde(with = "rational::serde_str")]
    pub partial_sum: Rational,
    /// Bound on Σ_{i > i_max} |a_{i,k}(s)| |β|^i; `None` outside the convergence regime.
    #[serde(with = "rational::serde_str::option")]
    pub tail_bound: Option<Rational>,
    pub k_constant: u64,
    /// Whether |β| < K^{−(5+k)}.
    pub rigorous: bool,
    /// Whether the requested tail tolerance was met before hitting the order cap.
    pub tolerance_met: bool,
    /// (2^{2k+13} d)^{|s|}.
    #[serde(with = "rational::serde_str")]
    pub growth_bound: Rational,
    /// |partial_sum| ≤ growth_bound + tail_bound; only checked when rigorous.
    pub growth_ok: Option<bool>,
}

/// r = K^{5+k} |β|.
fn ratio(s: &LoopSequence, k: u32, beta: &Rational) -> Rational {
    let kk = Rational::from_integer(k_constant(s.dim()).into());
    rational::pow(&kk, 5 + k as usize) * beta.abs()
}

/// Geometric tail bound after order `i_max`, or `None` when r ≥ 1.
pub fn tail_bound(s: &LoopSequence, k: u32, beta: &Rational, i_max: u32) -> Option<Rational> {
    if s.is_null() {
        return Some(rational::zero());
    }
    let r = ratio(s, k, beta);
    if r >= Rational::one() {
        return None;
    }
    let b0 = coeff_bound(s, 0, k);
    Some(b0 * rational::pow(&r, i_max as usize + 1) / (Rational::one() - r))
}

/// Sums a_{i,k}(s) β^i for i ≤ i_max and attaches the tail and growth checks.
pub fn f_partial(
    engine: &mut CoefficientEngine,
    s: &LoopSequence,
    k: u32,
    beta: &Rational,
    opts: &SeriesOptions,
) -> Result<SeriesResult, CoeffError> {
    let rigorous = s.is_null() || ratio(s, k, beta) < Rational::one();
    let mut coefficients = Vec::new();
    let mut partial = rational::zero();
    let mut tolerance_met = false;
    let mut i = 0u32;
    loop {
        let a = engine.a_coeff(s, i, k)?;
        partial += &a * rational::pow(beta, i as usize);
        coefficients.push(a);
        let done = match opts.i_max {
            Some(m) => i >= m,
            None => {
                if let Some(t) = tail_bound(s, k, beta, i) {
                    let scale = std::cmp::max(Rational::one(), partial.abs());
                    tolerance_met = t < &opts.rel_tol * scale;
                }
                tolerance_met || i >= opts.i_cap
            }
        };
        if done {
            break;
        }
        i += 1;
    }
    let tail = tail_bound(s, k, beta, i);
    if opts.i_max.is_some() {
        if let Some(t) = &tail {
            tolerance_met = *t < &opts.rel_tol * std::cmp::max(Rational::one(), partial.abs());
        }
    }
    let growth = growth_bound(s, k);
    let growth_ok = tail.as_ref().map(|t| partial.abs() <= &growth + t);
    Ok(SeriesResult {
        k,
        i_max: i,
        coefficients,
        beta: beta.clone(),
        partial_sum: partial,
        tail_bound: tail,
        k_constant: k_constant(s.dim()),
        rigorous,
        tolerance_met,
        growth_bound: growth,
        growth_ok,
    })
}

/// Residual of the symmetrized limiting loop equation evaluated on partial sums.
#[derive(Clone, Debug, Serialize)]
pub struct MasterResidual {
    pub k: u32,
    pub i_max: u32,
    #[serde(with = "rational::serde_str")]
    pub residual: Rational,
    /// Sum of the truncation tails of every term; `None` when not rigorous.
    #[serde(with = "rational::serde_str::option")]
    pub bound: Option<Rational>,
    pub within: Option<bool>,
}

/// Evaluates `|s| f_k(s) − [|s| f_{k−1}(s) + Σ_T f_{k−1} + Σ_M f_{k−2} + Σ_S f_k + β Σ_D f_k]`
/// with every f truncated at `i_max`, signed sums taken over the full
/// operation multisets.
pub fn master_residual(
    engine: &mut CoefficientEngine,
    s: &LoopSequence,
    k: u32,
    beta: &Rational,
    i_max: u32,
) -> Result<MasterResidual, CoeffError> {
    let eval = |engine: &mut CoefficientEngine, t: &LoopSequence, kk: i64| -> Result<(Rational, Option<Rational>), CoeffError> {
        if kk < 0 {
            return Ok((rational::zero(), Some(rational::zero())));
        }
        let opts = SeriesOptions { i_max: Some(i_max), ..SeriesOptions::default() };
        let r = f_partial(engine, t, kk as u32, beta, &opts)?;
        Ok((r.partial_sum, r.tail_bound))
    };
    let len = Rational::from_integer((s.length() as i64).into());
    let k = k as i64;
    let mut bound = Some(rational::zero());
    let add_bound = |bound: &mut Option<Rational>, weight: &Rational, t: Option<Rational>| {
        *bound = match (bound.take(), t) {
            (Some(b), Some(t)) => Some(b + weight.abs() * t),
            _ => None,
        };
    };
    let (fk, tk) = eval(engine, s, k)?;
    let (fk1, tk1) = eval(engine, s, k - 1)?;
    let mut residual = &len * fk - &len * fk1;
    add_bound(&mut bound, &len, tk);
    add_bound(&mut bound, &len, tk1);
    let mut children = Vec::new();
    visit_operations(s, FamilyFilter::ALL, &mut |op, sign, next| children.push((op.family(), sign, next)));
    for (family, sign, next) in children {
        let (kk, weight) = match family {
            Family::Twist => (k - 1, rational::one()),
            Family::Merge => (k - 2, rational::one()),
            Family::Split => (k, rational::one()),
            Family::Deform => (k, beta.clone()),
            Family::Inaction => unreachable!("not an operation"),
        };
        if kk < 0 {
            continue;
        }
        let (f, t) = eval(engine, &next, kk)?;
        let term = &weight * f * Rational::from_integer(sign.coefficient().into());
        residual -= term;
        add_bound(&mut bound, &weight, t);
    }
    let within = bound.as_ref().map(|b| residual.abs() <= *b);
    Ok(MasterResidual { k: k as u32, i_max, residual, bound, within })
}
