//! Chains, measurements and the three estimators built on them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::GaugeConfig;
use super::lattice_box::{EdgeRef, LatticeBox};
use super::metropolis::{tune_step_size, Metropolis};
use super::stats::{integrated_autocorrelation, MCEstimate};
use crate::coeff::{f_partial, CoefficientEngine, SeriesOptions};
use crate::error::{CoeffError, GaugeError};
use crate::loops::LoopSequence;
use crate::ops::{visit_operations, Family, FamilyFilter};
use crate::rational::{self, Rational};

/// Monte Carlo settings shared by every estimator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McParams {
    pub n: usize,
    pub beta: f64,
    /// Sweeps after warmup.
    pub sweeps: usize,
    pub warmup: usize,
    pub seed: u64,
    pub chains: usize,
    pub threads: usize,
    /// Initial proposal angle; tuned during the first half of warmup.
    pub step_size: f64,
    pub reorthogonalize_every: usize,
    /// Sweeps between measurements; `None` uses the warmup estimate of τ.
    pub measure_every: Option<usize>,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            n: 3,
            beta: 0.0,
            sweeps: 10_000,
            warmup: 1_000,
            seed: 0,
            chains: 1,
            threads: 1,
            step_size: 0.5,
            reorthogonalize_every: 100,
            measure_every: None,
        }
    }
}

impl McParams {
    fn validate(&self) -> Result<(), GaugeError> {
        let bad = |m: &str| Err(GaugeError::InvalidParameter(m.to_string()));
        if self.n < 2 {
            return bad("N must be at least 2");
        }
        if !self.beta.is_finite() {
            return bad("beta must be finite");
        }
        if !(self.step_size > 0.0 && self.step_size <= std::f64::consts::PI) {
            return bad("step size must lie in (0, pi]");
        }
        if self.chains == 0 || self.sweeps == 0 {
            return bad("need at least one chain and one sweep");
        }
        if self.reorthogonalize_every == 0 || self.measure_every == Some(0) {
            return bad("intervals must be positive");
        }
        Ok(())
    }
}

/// What happened in one chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainReport {
    pub chain: usize,
    pub step_size: f64,
    pub acceptance: f64,
    /// τ of the mean plaquette over the second half of warmup, in sweeps.
    pub tau_warmup: f64,
    pub measure_every: usize,
    pub measurements: usize,
    pub max_group_defect: f64,
}

/// Per-chain reports and raw measurements, `series[chain][t][observable]`.
#[derive(Clone, Debug)]
pub struct McRun {
    pub chains: Vec<ChainReport>,
    pub series: Vec<Vec<Vec<f64>>>,
}

impl McRun {
    /// Estimate of a derived scalar, computed per chain and pooled.
    pub fn estimate_with(&self, f: impl Fn(&[f64]) -> f64) -> MCEstimate {
        let parts: Vec<MCEstimate> = self
            .series
            .iter()
            .map(|chain| MCEstimate::from_series(&chain.iter().map(|row| f(row)).collect::<Vec<_>>()))
            .collect();
        MCEstimate::combine(&parts)
    }

    pub fn estimate(&self, column: usize) -> MCEstimate {
        self.estimate_with(|row| row[column])
    }
}

/// The random stream of chain `chain` under master seed `seed`.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

type Measure<'a> = &'a (dyn Fn(&GaugeConfig, &mut [f64]) + Sync);

/// Runs `params.chains` independent chains from Haar-random starts and records
/// `width` observables every `measure_every` sweeps.
pub fn run_chains(lattice: &LatticeBox, params: &McParams, width: usize, measure: Measure<'_>) -> Result<McRun, GaugeError> {
    params.validate()?;
    let updater = Metropolis::new(lattice, params.beta);
    let workers = params.threads.clamp(1, params.chains);
    let mut slots: Vec<Option<(ChainReport, Vec<Vec<f64>>)>> = vec![None; params.chains];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let updater = &updater;
                scope.spawn(move || {
                    (w..params.chains)
                        .step_by(workers)
                        .map(|c| (c, run_one(lattice, updater, params, c, width, measure)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (c, out) in h.join().expect("chain worker panicked") {
                slots[c] = Some(out);
            }
        }
    });
    let (chains, series) = slots.into_iter().map(|s| s.expect("every chain ran")).unzip();
    Ok(McRun { chains, series })
}

fn run_one(
    lattice: &LatticeBox,
    updater: &Metropolis,
    params: &McParams,
    chain: usize,
    width: usize,
    measure: Measure<'_>,
) -> (ChainReport, Vec<Vec<f64>>) {
    let mut rng = chain_rng(params.seed, chain);
    let mut cfg = GaugeConfig::haar(lattice, params.n, &mut rng);
    let mut step = params.step_size;
    let mut since_reortho = 0usize;
    let mut maintain = |cfg: &mut GaugeConfig| {
        since_reortho += 1;
        if since_reortho == params.reorthogonalize_every {
            cfg.reorthogonalize();
            since_reortho = 0;
        }
    };
    let tune_until = params.warmup / 2;
    let mut window = 0.0;
    let mut trace = Vec::with_capacity(params.warmup - tune_until);
    for t in 0..params.warmup {
        let acc = updater.sweep(&mut cfg, step, &mut rng);
        maintain(&mut cfg);
        if t < tune_until {
            window += acc;
            if (t + 1) % 10 == 0 {
                step = tune_step_size(step, window / 10.0);
                window = 0.0;
            }
        } else {
            trace.push(updater.mean_plaquette(&cfg));
        }
    }
    let tau = integrated_autocorrelation(&trace);
    let every = params.measure_every.unwrap_or_else(|| (tau.ceil() as usize).max(1));
    let mut rows = Vec::with_capacity(params.sweeps / every + 1);
    let mut accepted = 0.0;
    for t in 1..=params.sweeps {
        accepted += updater.sweep(&mut cfg, step, &mut rng);
        maintain(&mut cfg);
        if t % every == 0 {
            let mut row = vec![0.0; width];
            measure(&cfg, &mut row);
            rows.push(row);
        }
    }
    let report = ChainReport {
        chain,
        step_size: step,
        acceptance: accepted / params.sweeps as f64,
        tau_warmup: tau,
        measure_every: every,
        measurements: rows.len(),
        max_group_defect: cfg.max_group_defect(),
    };
    (report, rows)
}

/// Compiled loop sequence: Φ(s) = ∏_r W_{l_r} / N on one configuration.
#[derive(Clone, Debug)]
pub struct CompiledSequence(Vec<Vec<EdgeRef>>);

impl CompiledSequence {
    pub fn new(lattice: &LatticeBox, s: &LoopSequence) -> Result<Self, GaugeError> {
        Ok(CompiledSequence(s.loops().iter().map(|l| lattice.compile_loop(l)).collect::<Result<_, _>>()?))
    }

    pub fn eval(&self, cfg: &GaugeConfig) -> f64 {
        let n = cfg.n() as f64;
        self.0.iter().map(|l| cfg.wilson(l) / n).product()
    }
}

/// φ_N(s) with its run.
#[derive(Clone, Debug)]
pub struct PhiEstimate {
    pub phi: MCEstimate,
    pub run: Option<McRun>,
}

/// Estimates φ_N(s) = ⟨∏ W_l⟩ / N^{#s}; exactly 1 for the null sequence.
pub fn estimate_phi(lattice: &LatticeBox, s: &LoopSequence, params: &McParams) -> Result<PhiEstimate, GaugeError> {
    if s.is_null() {
        return Ok(PhiEstimate { phi: MCEstimate::exact(1.0), run: None });
    }
    lattice.check_margin(s)?;
    let compiled = CompiledSequence::new(lattice, s)?;
    let run = run_chains(lattice, params, 1, &|cfg, out| out[0] = compiled.eval(cfg))?;
    Ok(PhiEstimate { phi: run.estimate(0), run: Some(run) })
}

/// Finite-N loop equation residual with its two sides.
#[derive(Clone, Debug)]
pub struct MasterEquationEstimate {
    /// (N − 1)|s| φ_N(s).
    pub lhs: MCEstimate,
    /// Signed twist, split, merge and deformation sums with weights 1, N, 1/N and Nβ.
    pub rhs: MCEstimate,
    /// lhs − rhs, measured sample by sample.
    pub residual: MCEstimate,
    pub terms: usize,
    pub run: Option<McRun>,
}

/// Evaluates the finite-N symmetrized loop equation on one sample stream.
pub fn master_equation_residual(
    lattice: &LatticeBox,
    s: &LoopSequence,
    params: &McParams,
) -> Result<MasterEquationEstimate, GaugeError> {
    if s.is_null() {
        let zero = MCEstimate::exact(0.0);
        return Ok(MasterEquationEstimate { lhs: zero, rhs: zero, residual: zero, terms: 0, run: None });
    }
    lattice.check_margin(s)?;
    let n = params.n as f64;
    let mut terms: Vec<(f64, CompiledSequence)> = Vec::new();
    let mut failure = None;
    visit_operations(s, FamilyFilter::ALL, &mut |op, sign, next| {
        let w = match op.family() {
            Family::Twist => 1.0,
            Family::Split => n,
            Family::Merge => 1.0 / n,
            Family::Deform => n * params.beta,
            Family::Inaction => unreachable!("not an operation"),
        };
        match CompiledSequence::new(lattice, &next) {
            Ok(c) => terms.push((w * sign.coefficient() as f64, c)),
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let own = CompiledSequence::new(lattice, s)?;
    let lhs_weight = (n - 1.0) * s.length() as f64;
    let run = run_chains(lattice, params, 2, &|cfg, out| {
        out[0] = lhs_weight * own.eval(cfg);
        out[1] = terms.iter().map(|(w, c)| w * c.eval(cfg)).sum();
    })?;
    Ok(MasterEquationEstimate {
        lhs: run.estimate(0),
        rhs: run.estimate(1),
        residual: run.estimate_with(|row| row[0] - row[1]),
        terms: terms.len(),
        run: Some(run),
    })
}

/// One N in the comparison of φ_N with the truncated 1/N expansion.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionRow {
    pub n: usize,
    pub phi: MCEstimate,
    /// Σ_{k ≤ k_max} N^{−k} f_k(s), each f_k truncated in β.
    pub series: f64,
    /// Σ_k N^{−k} · (β tail of f_k); `None` outside the convergence regime.
    pub series_tail: Option<f64>,
    /// N^{−(k_max+1)}, a unit-constant allowance for the omitted orders in 1/N.
    pub order_budget: f64,
    pub discrepancy: f64,
    /// 3 · (stderr + tail + order budget), with a missing tail counted as 0.
    pub allowed: f64,
    pub within: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub k_max: u32,
    #[serde(with = "crate::rational::serde_str")]
    pub beta: Rational,
    pub rigorous: bool,
    pub rows: Vec<ExpansionRow>,
    /// Each discrepancy is at most the previous one plus three combined standard errors.
    pub decreasing: bool,
}

/// Compares φ_N(s) with Σ_{k ≤ k_max} N^{−k} f_k(s) for several N.
///
/// `params.n` and `params.beta` are overridden by each entry of `ns` and by `beta`.
#[allow(clippy::too_many_arguments)]
pub fn expansion_comparison(
    engine: &mut CoefficientEngine,
    lattice: &LatticeBox,
    s: &LoopSequence,
    beta: &Rational,
    ns: &[usize],
    k_max: u32,
    series: &SeriesOptions,
    params: &McParams,
) -> Result<ExpansionReport, ExpansionError> {
    let mut partials = Vec::new();
    for k in 0..=k_max {
        partials.push(f_partial(engine, s, k, beta, series)?);
    }
    let rigorous = partials.iter().all(|p| p.rigorous);
    let mut rows = Vec::new();
    for (j, &n) in ns.iter().enumerate() {
        let mut p = params.clone();
        p.n = n;
        p.beta = rational::to_f64(beta);
        p.seed = params.seed.wrapping_add(j as u64);
        let phi = estimate_phi(lattice, s, &p)?.phi;
        let nf = n as f64;
        let value: f64 = partials.iter().enumerate().map(|(k, r)| rational::to_f64(&r.partial_sum) / nf.powi(k as i32)).sum();
        let tail = partials
            .iter()
            .enumerate()
            .map(|(k, r)| r.tail_bound.as_ref().map(|t| rational::to_f64(t) / nf.powi(k as i32)))
            .sum::<Option<f64>>();
        let order_budget = nf.powi(-(k_max as i32 + 1));
        let discrepancy = (phi.mean - value).abs();
        let allowed = 3.0 * (phi.stderr + tail.unwrap_or(0.0) + order_budget);
        rows.push(ExpansionRow {
            n,
            phi,
            series: value,
            series_tail: tail,
            order_budget,
            discrepancy,
            allowed,
            within: discrepancy <= allowed,
        });
    }
    let decreasing = rows.windows(2).all(|w| {
        let slack = 3.0 * (w[0].phi.stderr.powi(2) + w[1].phi.stderr.powi(2)).sqrt();
        w[1].discrepancy <= w[0].discrepancy + slack
    });
    Ok(ExpansionReport { k_max, beta: beta.clone(), rigorous, rows, decreasing })
}

#[derive(Debug, thiserror::Error)]
pub enum ExpansionError {
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_loop_dsl;
    use crate::lattice::LatticeVector;

    #[test]
    fn null_sequence_is_exact() {
        let b = LatticeBox::cube(2, 4, LatticeVector::origin(2)).unwrap();
        let null = LoopSequence::null(2);
        let params = McParams::default();
        assert_eq!(estimate_phi(&b, &null, &params).unwrap().phi.mean, 1.0);
        assert_eq!(master_equation_residual(&b, &null, &params).unwrap().residual.mean, 0.0);
    }

    #[test]
    fn runs_are_reproducible_and_thread_independent() {
        let b = LatticeBox::cube(2, 4, LatticeVector::origin(2)).unwrap();
        let p = b.centered(&parse_loop_dsl("+1 +2 -1 -2", 2).unwrap());
        let mut params = McParams { n: 3, beta: 0.2, sweeps: 200, warmup: 40, seed: 17, chains: 3, ..Default::default() };
        let a = estimate_phi(&b, &p, &params).unwrap();
        params.threads = 3;
        let c = estimate_phi(&b, &p, &params).unwrap();
        assert_eq!(a.run.unwrap().series, c.run.unwrap().series);
        assert_eq!(a.phi, c.phi);
    }

    #[test]
    fn single_loops_stay_bounded_by_one() {
        let b = LatticeBox::cube(2, 5, LatticeVector::origin(2)).unwrap();
        let d = b.centered(&parse_loop_dsl("+1 +1 +2 -1 -1 -2", 2).unwrap());
        let params = McParams { n: 4, beta: 0.5, sweeps: 100, warmup: 20, measure_every: Some(1), ..Default::default() };
        let run = estimate_phi(&b, &d, &params).unwrap().run.unwrap();
        assert!(run.series[0].iter().all(|row| row[0].abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn margin_is_enforced() {
        let b = LatticeBox::cube(2, 4, LatticeVector::origin(2)).unwrap();
        let p = parse_loop_dsl("+1 +2 -1 -2", 2).unwrap();
        assert!(estimate_phi(&b, &p, &McParams::default()).is_err());
        assert!(master_equation_residual(&b, &p, &McParams::default()).is_err());
    }
}
