use std::path::PathBuf;

use lattice_strings::checks::{self, CheckReport, Scope};
use lattice_strings::coeff::{f_partial, CoefficientEngine, CoefficientRow, Recursion, SeriesOptions};
use lattice_strings::dsl::{emit_sequence, parse_loop_dsl};
use lattice_strings::gauge::{estimate_phi, master_equation_residual, LatticeBox, MCEstimate, McParams, McRun};
use lattice_strings::lattice::LatticeVector;
use lattice_strings::loops::LoopSequence;
use lattice_strings::rational::{format_rational, parse_rational, to_f64, Rational};
use lattice_strings::trajectory::{enumerate_vanishing_parallel, Budget, TrajectorySums};
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{CacheArgs, CheckArgs, Cli, CoeffArgs, Command, ExpandArgs, LoopArgs, McArgs, Observable, Suite, TrajectoryArgs, Which};

pub const SCHEMA_VERSION: u32 = 1;

pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

fn err(kind: &'static str, e: impl std::fmt::Display) -> CliError {
    CliError { kind, message: e.to_string() }
}

pub fn run(cli: &Cli) -> Result<Value, CliError> {
    match &cli.command {
        Command::Coeff(a) => coeff(a),
        Command::Expand(a) => expand(a),
        Command::Trajectories(a) => trajectories(a, cli.threads),
        Command::Mc(a) => mc(a, cli.threads),
        Command::Check(a) => check(a),
    }
}

fn schema(name: &str) -> String {
    format!("lstr/{name}/{SCHEMA_VERSION}")
}

fn parse_target(t: &LoopArgs) -> Result<LoopSequence, CliError> {
    parse_loop_dsl(&t.loops, t.dim).map_err(|e| err("loop", e))
}

fn parse_beta(text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| err("beta", e))
}

fn cache_path(c: &CacheArgs, dim: usize) -> Option<PathBuf> {
    c.cache.clone().or_else(|| c.cache_dir.as_ref().map(|d| d.join(format!("coefficients-d{dim}.json"))))
}

fn engine_with_cache(c: &CacheArgs, dim: usize) -> Result<(CoefficientEngine, Option<PathBuf>), CliError> {
    let mut engine = CoefficientEngine::new(dim).map_err(|e| err("coefficient", e))?;
    let path = cache_path(c, dim);
    if let Some(p) = &path {
        engine.load_cache_file(p).map_err(|e| err("cache", e))?;
    }
    Ok((engine, path))
}

fn save_cache(engine: &CoefficientEngine, path: &Option<PathBuf>) -> Result<(), CliError> {
    if let Some(p) = path {
        if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| err("cache", e))?;
        }
        engine.save_cache_file(p).map_err(|e| err("cache", e))?;
    }
    Ok(())
}

fn coeff(a: &CoeffArgs) -> Result<Value, CliError> {
    let s = parse_target(&a.target)?;
    let (mut engine, path) = engine_with_cache(&a.cache, a.target.dim)?;
    let ks: Vec<u32> = match (a.k, a.kmax) {
        (Some(k), _) => vec![k],
        (None, Some(m)) => (0..=m).collect(),
        (None, None) => vec![0],
    };
    let recursion = if a.symmetrized { Recursion::Symmetrized } else { Recursion::Unsymmetrized };
    let mut rows = Vec::new();
    for &k in &ks {
        for i in 0..=a.imax {
            let av = match a.which {
                Which::B => None,
                _ => Some(format_rational(&engine.coeff(recursion, &s, i, k).map_err(|e| err("coefficient", e))?)),
            };
            let bv = match a.which {
                Which::A => None,
                _ => Some(format_rational(&engine.b_coeff(&s, i, k).map_err(|e| err("coefficient", e))?)),
            };
            rows.push(CoefficientRow { loops: emit_sequence(&s), i, k, a: av, b: bv });
        }
    }
    save_cache(&engine, &path)?;
    Ok(json!({
        "schema": schema("coeff"),
        "dim": a.target.dim,
        "loop": emit_sequence(&s),
        "recursion": recursion,
        "rows": rows,
    }))
}

fn expand(a: &ExpandArgs) -> Result<Value, CliError> {
    let s = parse_target(&a.target)?;
    let beta = parse_beta(&a.beta)?;
    let (mut engine, path) = engine_with_cache(&a.cache, a.target.dim)?;
    let opts = SeriesOptions { i_max: a.imax, i_cap: a.icap, ..SeriesOptions::default() };
    let res = f_partial(&mut engine, &s, a.k, &beta, &opts).map_err(|e| err("coefficient", e))?;
    save_cache(&engine, &path)?;
    let mut warnings = Vec::new();
    if !res.rigorous {
        warnings.push(format!(
            "|beta| is not below K^-(5+k) = {}^-{}; the partial sum carries no rigorous tail bound",
            res.k_constant,
            5 + a.k
        ));
    } else if !res.tolerance_met {
        warnings.push("tail bound did not reach the requested tolerance before the order cap".to_string());
    }
    Ok(json!({
        "schema": schema("expand"),
        "dim": a.target.dim,
        "loop": emit_sequence(&s),
        "partial_sum_f64": to_f64(&res.partial_sum),
        "result": res,
        "warnings": warnings,
    }))
}

#[derive(Serialize)]
struct BudgetRow {
    i: u32,
    a: u32,
    b: u32,
    c: u32,
    count: usize,
    signed: String,
    absolute: String,
}

fn trajectories(a: &TrajectoryArgs, threads: usize) -> Result<Value, CliError> {
    let s = parse_target(&a.target)?;
    if s.is_null() {
        return Err(err("loop", "the null sequence has no vanishing trajectories"));
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let (mut t_total, mut s_total) = (Rational::zero(), Rational::zero());
    let mut sums = TrajectorySums::new();
    for budget in Budget::with_k(a.i, a.k) {
        let list = enumerate_vanishing_parallel(&s, budget, threads.max(1));
        let mut signed = Rational::zero();
        let mut absolute = Rational::zero();
        for t in &list {
            let w = t.weight().coefficient;
            absolute += num_traits::Signed::abs(&w);
            signed += w;
            if a.list {
                records.push(t.record());
            }
        }
        let (ms, ma) = sums.budget_sums(&s, budget);
        if ms != signed || ma != absolute {
            return Err(err("internal", format!("memoized sums disagree with the listing for budget {budget:?}")));
        }
        t_total += &signed;
        s_total += &absolute;
        rows.push(BudgetRow {
            i: budget.i,
            a: budget.a,
            b: budget.b,
            c: budget.c,
            count: list.len(),
            signed: format_rational(&signed),
            absolute: format_rational(&absolute),
        });
    }
    let mut out = json!({
        "schema": schema("trajectories"),
        "dim": a.target.dim,
        "loop": emit_sequence(&s),
        "i": a.i,
        "k": a.k,
        "beta_power": a.i,
        "budgets": rows,
        "count": rows.iter().map(|r| r.count).sum::<usize>(),
        "T": format_rational(&t_total),
        "S": format_rational(&s_total),
    });
    if a.list {
        out["trajectories"] = serde_json::to_value(records).expect("serializable records");
    }
    Ok(out)
}

#[derive(Serialize)]
struct NamedEstimate {
    name: &'static str,
    #[serde(flatten)]
    estimate: MCEstimate,
}

fn mc(a: &McArgs, threads: usize) -> Result<Value, CliError> {
    let s = parse_target(&a.target)?;
    let beta = parse_beta(&a.beta)?;
    let lattice = LatticeBox::cube(a.target.dim, a.side, LatticeVector::origin(a.target.dim)).map_err(|e| err("gauge", e))?;
    let placed = if a.as_is { s.clone() } else { lattice.centered(&s) };
    let params = McParams {
        n: a.n,
        beta: to_f64(&beta),
        sweeps: a.sweeps,
        warmup: a.warmup,
        seed: a.seed,
        chains: a.chains,
        threads,
        ..McParams::default()
    };
    let (estimates, run, columns): (Vec<NamedEstimate>, Option<McRun>, Vec<&str>) = match a.observable {
        Observable::Phi => {
            let r = estimate_phi(&lattice, &placed, &params).map_err(|e| err("gauge", e))?;
            (vec![NamedEstimate { name: "phi", estimate: r.phi }], r.run, vec!["phi"])
        }
        Observable::Master => {
            let r = master_equation_residual(&lattice, &placed, &params).map_err(|e| err("gauge", e))?;
            (
                vec![
                    NamedEstimate { name: "lhs", estimate: r.lhs },
                    NamedEstimate { name: "rhs", estimate: r.rhs },
                    NamedEstimate { name: "residual", estimate: r.residual },
                ],
                r.run,
                vec!["lhs", "rhs"],
            )
        }
    };
    if let (Some(path), Some(run)) = (&a.samples_csv, &run) {
        write_samples(path, run, &columns).map_err(|e| err("io", e))?;
    }
    Ok(json!({
        "schema": schema("mc"),
        "d": a.target.dim,
        "box": lattice.shape(),
        "N": a.n,
        "beta": format_rational(&beta),
        "seed": a.seed,
        "sweeps": a.sweeps,
        "warmup": a.warmup,
        "chains": a.chains,
        "loop": emit_sequence(&placed),
        "observable": match a.observable { Observable::Phi => "phi", Observable::Master => "master" },
        "estimates": estimates,
        "chain_reports": run.map(|r| r.chains).unwrap_or_default(),
    }))
}

fn write_samples(path: &PathBuf, run: &McRun, columns: &[&str]) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["chain".to_string(), "index".to_string()];
    header.extend(columns.iter().map(|c| c.to_string()));
    w.write_record(&header)?;
    for (c, chain) in run.series.iter().enumerate() {
        for (t, row) in chain.iter().enumerate() {
            let mut rec = vec![c.to_string(), t.to_string()];
            rec.extend(row.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn check(a: &CheckArgs) -> Result<Value, CliError> {
    if a.dim != 2 {
        return Err(err("check", "the built-in corpus is two-dimensional; use --dim 2"));
    }
    let scope = Scope { max_length: a.max_length, i_max: a.imax, k_max: a.kmax };
    let beta = parse_beta(&a.beta)?;
    let (mut engine, path) = engine_with_cache(&a.cache, a.dim)?;
    let mut sums = TrajectorySums::new();
    let suites: Vec<Suite> = if a.suite == Suite::All {
        vec![
            Suite::Duality,
            Suite::Cross,
            Suite::Absolute,
            Suite::Rules,
            Suite::Bounds,
            Suite::Catalan,
            Suite::Master,
            Suite::Lemmas,
            Suite::Pruning,
        ]
    } else {
        vec![a.suite]
    };
    let ce = |e| err("coefficient", e);
    let mut reports: Vec<CheckReport> = Vec::new();
    for suite in &suites {
        match suite {
            Suite::Duality => reports.push(checks::duality(&mut engine, &mut sums, scope).map_err(ce)?),
            Suite::Cross => reports.push(checks::cross_recursion(&mut engine, scope).map_err(ce)?),
            Suite::Absolute => reports.push(checks::absolute_sums(&mut engine, &mut sums, scope).map_err(ce)?),
            Suite::Rules => reports.push(checks::rule_independence(scope).map_err(ce)?),
            Suite::Bounds => reports.push(checks::coefficient_bounds(&mut engine, scope).map_err(ce)?),
            Suite::Catalan => reports.push(checks::catalan_products(12)),
            Suite::Master => reports.push(checks::master_coefficients(&mut engine, scope, &beta).map_err(ce)?),
            Suite::Lemmas => reports.extend(checks::lemma_suite(a.seed, a.count, &[2, 3], 16)),
            Suite::Pruning => reports.push(checks::pruning(a.max_length, a.max_budget)),
            Suite::All => unreachable!("expanded above"),
        }
    }
    save_cache(&engine, &path)?;
    let passed = reports.iter().all(|r| r.passed);
    let mut out = json!({
        "schema": schema("check"),
        "scope": scope,
        "reports": reports,
        "passed": passed,
    });
    if suites.iter().all(|s| matches!(s, Suite::Duality | Suite::Cross | Suite::Absolute | Suite::Rules)) {
        out["all_equal"] = json!(passed);
    }
    Ok(out)
}
