use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use bellmd_core::io::{
    behavior_from_json, behavior_to_json, functional_from_json, functional_to_json, joint_model_to_json,
    model_from_json, strategy_from_json, strategy_to_json, summary_to_json,
};
use bellmd_core::simulator::MAX_KEPT_RECORDS;
use bellmd_core::{
    catalog_chsh, cross_set, lambda_marginal, local_mimic, m_prime, m_prime_bound_check, max_bell, min_entropy,
    min_entropy_unconditioned, ns_threshold, ns_threshold_of, p_max_merit, p_min_merit, quantum_pm_threshold,
    quantum_threshold, simulate, simulate_streaming, solve_prior, strategy_general, strategy_hide_one,
    strategy_theorem1, strategy_theorem1_mimic, strategy_tilted_chsh, theorem1_threshold, tightness_check,
    BellFunctional, BoundReport, LpStatus, PriorError, RunRecord, Scalar, ScenarioShape, SourceStrategy,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::inputs::*;

/// What a command produced: the machine-readable body and a few lines for
/// a human.
pub struct Output {
    pub body: String,
    pub summary: Vec<String>,
}

impl Output {
    fn json(v: &Value, summary: Vec<String>) -> Self {
        Self { body: pretty(v), summary }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn scalars<T: Scalar>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(Scalar::to_json).collect())
}

fn describe(report: &BoundReport) -> String {
    format!(
        "{:.6} bits/run (P_M ≥ {:.6})",
        report.per_run_min_entropy_threshold, report.p_max_threshold
    )
}

pub fn bounds(args: &BoundsArgs) -> CliResult<Output> {
    let ineq = resolve_inequality::<f64>(&args.inequality, InequalityKind::Chsh)?;
    let name = ineq.name();
    let mut notes: Vec<String> = Vec::new();
    let mut summary = vec![format!("inequality: {name}")];
    let (shape, meta, ns, quantum, quantum_pm) = match &ineq {
        Inequality::Functional(f) => {
            let ns = ns_threshold_of(f).map_err(|e| notes.push(format!("ns: {e}"))).ok();
            let quantum = quantum_threshold(f).map_err(|e| notes.push(format!("quantum: {e}"))).ok();
            let pm = quantum_pm_threshold(f).ok();
            (f.shape().clone(), f.hiding_metadata(), ns, quantum, pm)
        }
        Inequality::Mermin(info) => {
            let ns = ns_threshold(&info.hiding_metadata()).map_err(|e| notes.push(format!("ns: {e}"))).ok();
            notes.push("quantum: no quantum value tabulated for Mermin expressions".into());
            (info.shape(), Some(info.hiding_metadata()), ns, None, None)
        }
    };
    let theorem1 = theorem1_threshold(&shape);
    summary.push(format!("any inequality: {}", describe(&theorem1)));
    if let Some(r) = &ns {
        summary.push(format!("no-signaling limit: {}", describe(r)));
    }
    if let Some(r) = &quantum {
        summary.push(format!("quantum limit: {}", describe(r)));
    }
    if let Some(m) = &meta {
        summary.push(format!(
            "settings: {} total, {} used, {} good",
            m.total_settings, m.used_settings, m.good_settings
        ));
    }
    summary.extend(notes.iter().cloned());
    let body = json!({
        "inequality": name,
        "shape": shape,
        "settings": meta.map(|m| json!({
            "total": m.total_settings,
            "used": m.used_settings,
            "good": m.good_settings,
            "hidden": m.hidden_settings,
            "symmetric": m.symmetric,
        })),
        "theorem1": theorem1,
        "ns": ns,
        "quantum": quantum,
        "quantum_pm": quantum_pm,
        "notes": notes,
    });
    Ok(Output::json(&body, summary))
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("BELLMD_NUM_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("BELLMD_NUM_THREADS must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Failure::Compute(e.to_string()))
}

struct Row<T> {
    p_max: T,
    status: LpStatus,
    value: Option<T>,
    certificate: Option<Vec<T>>,
}

fn status_name(s: LpStatus) -> &'static str {
    match s {
        LpStatus::Optimal => "optimal",
        LpStatus::Infeasible => "infeasible",
        LpStatus::Capped => "capped",
    }
}

pub fn maxbell(args: &MaxbellArgs) -> CliResult<Output> {
    match args.mode {
        Mode::Rational => maxbell_in::<bellmd_core::Rational>(args),
        Mode::Double => maxbell_in::<f64>(args),
    }
}

fn maxbell_in<T: Scalar>(args: &MaxbellArgs) -> CliResult<Output> {
    let f = resolve_inequality::<T>(&args.inequality, InequalityKind::Chsh)?.functional("maxbell")?;
    let p_obs = parse_distribution::<T>(&args.p_obs, f.shape())?;
    let grid = parse_grid::<T>(&args.grid)?;
    let pool = thread_pool()?;
    let rows: Vec<Row<T>> = pool.install(|| {
        grid.par_iter()
            .map(|p| {
                let sol = max_bell(&f, &p_obs, p)?;
                Ok(Row { p_max: p.clone(), status: sol.status, value: sol.value, certificate: sol.certificate })
            })
            .collect::<Result<_, bellmd_core::Error>>()
    })?;

    let optimal = rows.iter().filter(|r| r.status == LpStatus::Optimal).count();
    let mut summary = vec![format!(
        "{}: {} grid points, {optimal} optimal, {} infeasible, {} capped",
        f.name(),
        rows.len(),
        rows.iter().filter(|r| r.status == LpStatus::Infeasible).count(),
        rows.iter().filter(|r| r.status == LpStatus::Capped).count(),
    )];
    if let (Some(first), Some(last)) = (
        rows.iter().find(|r| r.value.is_some()),
        rows.iter().rev().find(|r| r.value.is_some()),
    ) {
        summary.push(format!(
            "B^max rises from {} at P_M = {} to {} at P_M = {}",
            first.value.as_ref().expect("some").display(),
            first.p_max.display(),
            last.value.as_ref().expect("some").display(),
            last.p_max.display()
        ));
    }

    let body = match args.format {
        Format::Csv => {
            let mut out = String::from("p_max,bell_max,status\n");
            for r in &rows {
                let value = r.value.as_ref().map(Scalar::display).unwrap_or_default();
                out.push_str(&format!("{},{value},{}\n", r.p_max.display(), status_name(r.status)));
            }
            out
        }
        Format::Json => pretty(&json!({
            "inequality": f.name(),
            "p_obs": scalars(p_obs.probs()),
            "rows": rows.iter().map(|r| {
                let mut row = json!({
                    "p_max": r.p_max.to_json(),
                    "bell_max": r.value.as_ref().map(Scalar::to_json),
                    "status": status_name(r.status),
                });
                if let Some(c) = &r.certificate {
                    row["certificate"] = scalars(c);
                }
                row
            }).collect::<Vec<_>>(),
        })),
    };
    if optimal == 0 && rows.iter().any(|r| r.status == LpStatus::Infeasible) {
        return Err(Failure::Infeasible {
            message: "no grid point admits a P_M-bounded local model with these inputs".into(),
            report: serde_json::from_str(&body).unwrap_or_else(|_| {
                json!({ "rows": rows.iter().map(|r| json!({
                    "p_max": r.p_max.to_json(),
                    "status": status_name(r.status),
                    "certificate": r.certificate.as_deref().map(scalars),
                })).collect::<Vec<_>>() })
            }),
        });
    }
    Ok(Output { body, summary })
}

pub fn fine(args: &FineArgs) -> CliResult<Output> {
    match args.mode {
        Mode::Rational => fine_in::<bellmd_core::Rational>(args),
        Mode::Double => fine_in::<f64>(args),
    }
}

fn fine_in<T: Scalar>(args: &FineArgs) -> CliResult<Output> {
    let p = behavior_from_json::<T>(&read_json(&args.behavior)?)?;
    let anchor = parse_tuple(&args.anchor, "--anchor")?;
    let cross = cross_set(p.shape(), &anchor)?;
    let (mimic, model) = local_mimic(&p, &anchor)?;
    let chsh_value = (p.shape() == &ScenarioShape::chsh()).then(|| catalog_chsh::<T>());
    let value_of = |b| chsh_value.as_ref().map(|f| f.value(b)).transpose();
    let (input_chsh, mimic_chsh) = (value_of(&p)?, value_of(&mimic)?);
    let tight = match &args.extra {
        Some(extra) => Some(tightness_check(&p, &anchor, &parse_tuple(extra, "--extra")?)?),
        None => None,
    };

    let mut summary = vec![format!(
        "cross set of {:?}: {} of {} setting tuples, {} deterministic strategies in the mixture",
        anchor,
        cross.len(),
        p.shape().num_settings(),
        model.len()
    )];
    if let (Some(a), Some(b)) = (&input_chsh, &mimic_chsh) {
        summary.push(format!("CHSH: input {}, mimic {}", a.display(), b.display()));
    }
    if let Some(t) = tight {
        summary.push(format!("extends to {}: {t}", args.extra.as_deref().unwrap_or_default()));
    }
    let body = json!({
        "anchor": anchor,
        "cross_set": cross.members().iter().map(|&z| p.shape().setting_tuple(z)).collect::<Vec<_>>(),
        "mimic": behavior_to_json(&mimic),
        "decomposition": joint_model_to_json(&model),
        "chsh": { "input": input_chsh.map(|v| v.to_json()), "mimic": mimic_chsh.map(|v| v.to_json()) },
        "extends_to_extra": tight,
    });
    Ok(Output::json(&body, summary))
}

/// `--inequality`, else the functional stored with the strategy, else CHSH
/// when the scenario is the 2×2 one.
fn functional_for<T: Scalar>(
    args: &InequalityArgs,
    stored: Option<&Value>,
    shape: &ScenarioShape,
) -> CliResult<BellFunctional<T>> {
    let f = if args.inequality.is_some() {
        resolve_inequality::<T>(args, InequalityKind::Chsh)?.functional("simulate")?
    } else if let Some(v) = stored {
        functional_from_json(v)?
    } else if shape == &ScenarioShape::chsh() {
        catalog_chsh()
    } else {
        return Err(usage("no inequality given and none stored in the strategy file; pass --inequality"));
    };
    if f.shape() != shape {
        return Err(usage("inequality and strategy have different scenarios"));
    }
    Ok(f)
}

pub fn simulate_cmd(args: &SimulateArgs) -> CliResult<Output> {
    match args.mode {
        Mode::Rational => simulate_in::<bellmd_core::Rational>(args),
        Mode::Double => simulate_in::<f64>(args),
    }
}

fn record_header(shape: &ScenarioShape) -> String {
    let mut cols = vec!["round".to_string(), "lambda".to_string()];
    cols.extend((0..shape.parties()).map(|i| format!("z{i}")));
    cols.extend((0..shape.parties()).map(|i| format!("o{i}")));
    cols.join(",")
}

fn record_line(r: &RunRecord) -> String {
    let mut line = format!("{},{}", r.round, r.lambda);
    for x in r.settings.iter().chain(&r.outcomes) {
        line.push(',');
        line.push_str(&x.to_string());
    }
    line
}

fn simulate_in<T: Scalar>(args: &SimulateArgs) -> CliResult<Output> {
    let raw = read_json(&args.strategy)?;
    let s = strategy_from_json::<T>(&raw)?;
    let f = functional_for::<T>(&args.inequality, raw.get("functional"), s.shape())?;
    if args.keep_records && args.rounds > MAX_KEPT_RECORDS {
        return Err(usage(format!("--keep-records allows at most {MAX_KEPT_RECORDS} rounds")));
    }

    let mut kept: Vec<RunRecord> = Vec::new();
    let summary = if args.records.is_some() || args.keep_records {
        let mut csv = match &args.records {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                writeln!(w, "{}", record_header(s.shape()))?;
                Some(w)
            }
            None => None,
        };
        let summary = simulate_streaming(&s, &f, args.rounds, args.seed, |r| {
            if let Some(w) = csv.as_mut() {
                writeln!(w, "{}", record_line(r)).map_err(|e| bellmd_core::Error::InvalidArgument(e.to_string()))?;
            }
            if args.keep_records {
                kept.push(r.clone());
            }
            Ok(())
        })?;
        if let Some(mut w) = csv {
            w.flush()?;
        }
        summary
    } else {
        simulate(&s, &f, args.rounds, args.seed)?
    };

    let mut lines = vec![format!(
        "{} rounds, seed {}, generator {}",
        summary.rounds, summary.seed, summary.rng
    )];
    match (&summary.bell_value, summary.bell_standard_error) {
        (Some(v), Some(se)) => lines.push(format!("{} = {} ± {:.3e}", f.name(), v.display(), se)),
        (Some(v), None) => lines.push(format!("{} = {}", f.name(), v.display())),
        _ => lines.push(format!("{} undefined: some used setting never drawn", f.name())),
    }
    lines.extend(summary.warnings.iter().map(|w| format!("warning: {w}")));
    let mut body = summary_to_json(&summary);
    body["inequality"] = json!(f.name());
    if args.keep_records {
        body["records"] = serde_json::to_value(&kept).map_err(|e| Failure::Compute(e.to_string()))?;
    }
    Ok(Output::json(&body, lines))
}

pub fn mprime(args: &MprimeArgs) -> CliResult<Output> {
    match args.mode {
        Mode::Rational => mprime_in::<bellmd_core::Rational>(args),
        Mode::Double => mprime_in::<f64>(args),
    }
}

fn mprime_in<T: Scalar>(args: &MprimeArgs) -> CliResult<Output> {
    let file = model_from_json::<T>(&read_json(&args.model)?)?;
    let value = m_prime(&file.posterior, &file.p_obs)?;
    let marginal = lambda_marginal(&file.posterior, &file.p_obs)?;
    let mut summary = vec![format!("M' = {}", value.display())];
    let bound = match &file.model {
        Some(model) => {
            let check = m_prime_bound_check(model, &file.p_obs)?;
            summary.push(format!(
                "largest deviation from the independent model {} ({})",
                check.max_deviation.display(),
                if check.holds { "within M'" } else { "exceeds M'" }
            ));
            Some(json!({
                "max_deviation": check.max_deviation.to_json(),
                "holds": check.holds,
                "slack": check.slack.to_json(),
            }))
        }
        None => None,
    };
    let body = json!({
        "m_prime": value.to_json(),
        "lambda_marginal": scalars(&marginal),
        "bound": bound,
    });
    Ok(Output::json(&body, summary))
}

pub fn catalog(args: &CatalogArgs) -> CliResult<Output> {
    match args.mode {
        Mode::Rational => catalog_in::<bellmd_core::Rational>(args),
        Mode::Double => catalog_in::<f64>(args),
    }
}

fn catalog_in<T: Scalar>(args: &CatalogArgs) -> CliResult<Output> {
    Ok(match resolve_inequality::<T>(&args.inequality, InequalityKind::Chsh)? {
        Inequality::Functional(f) => {
            let l = f.limits();
            let summary = vec![format!(
                "{}: {} setting tuples, local {:?}, quantum {:?}, no-signaling {:?}",
                f.name(),
                f.shape().num_settings(),
                l.local,
                l.quantum,
                l.no_signaling
            )];
            Output::json(&functional_to_json(&f), summary)
        }
        Inequality::Mermin(info) => {
            let meta = info.hiding_metadata();
            let summary = vec![format!(
                "Mermin, {} parties: {} used settings, {} good",
                info.parties, meta.used_settings, meta.good_settings
            )];
            Output::json(
                &json!({ "name": format!("mermin_{}", info.parties), "shape": info.shape(), "hiding": meta }),
                summary,
            )
        }
    })
}

pub fn strategy(args: &StrategyArgs) -> CliResult<Output> {
    match args.mode {
        Mode::Rational => strategy_in::<bellmd_core::Rational>(args),
        Mode::Double => strategy_in::<f64>(args),
    }
}

fn merit_lines<T: Scalar>(s: &SourceStrategy<T>) -> Vec<String> {
    vec![
        format!("{} hidden values over {} setting tuples", s.len(), s.shape().num_settings()),
        format!(
            "P_M = {}, P_m = {}, H_min(Z|Λ) = {:.6} bits, H_min(Z) = {:.6} bits",
            p_max_merit(s).display(),
            p_min_merit(s).display(),
            min_entropy(s),
            min_entropy_unconditioned(s)
        ),
    ]
}

fn strategy_in<T: Scalar>(args: &StrategyArgs) -> CliResult<Output> {
    let functional = || resolve_inequality::<T>(&args.inequality, InequalityKind::Chsh)?.functional("strategy");
    let (s, f): (SourceStrategy<T>, Option<BellFunctional<T>>) = match args.kind {
        StrategyKind::Theorem1 => {
            let f = functional()?;
            (strategy_theorem1(f.shape(), Some(&f))?, Some(f))
        }
        StrategyKind::Theorem1Mimic => {
            let path = args.behavior.as_ref().ok_or_else(|| usage("theorem1-mimic needs --behavior"))?;
            let p = behavior_from_json::<T>(&read_json(path)?)?;
            let f = (p.shape() == &ScenarioShape::chsh()).then(catalog_chsh);
            (strategy_theorem1_mimic(&p)?, f)
        }
        StrategyKind::HideOne => {
            let f = functional()?;
            (strategy_hide_one(&f)?, Some(f))
        }
        StrategyKind::General => {
            let f = functional()?;
            let p = args.p_max.as_deref().ok_or_else(|| usage("general needs --p-max"))?;
            (strategy_general(&f, parse_scalar(p, "--p-max")?)?, Some(f))
        }
        StrategyKind::Tilted => {
            let mut ineq = args.inequality.clone();
            ineq.inequality.get_or_insert(InequalityKind::Tilted);
            let f = resolve_inequality::<T>(&ineq, InequalityKind::Tilted)?.functional("strategy")?;
            (strategy_tilted_chsh(), Some(f))
        }
    };
    let mut body = strategy_to_json(&s);
    if let Some(f) = &f {
        body["functional"] = functional_to_json(f);
    }
    Ok(Output::json(&body, merit_lines(&s)))
}

pub fn merit(args: &MeritArgs) -> CliResult<Output> {
    match args.mode {
        Mode::Rational => merit_in::<bellmd_core::Rational>(args),
        Mode::Double => merit_in::<f64>(args),
    }
}

fn merit_in<T: Scalar>(args: &MeritArgs) -> CliResult<Output> {
    let s = strategy_from_json::<T>(&read_json(&args.strategy)?)?;
    let body = json!({
        "p_max": p_max_merit(&s).to_json(),
        "p_min": p_min_merit(&s).to_json(),
        "min_entropy_bits": min_entropy(&s),
        "min_entropy_unconditioned_bits": min_entropy_unconditioned(&s),
        "induced_p_obs": scalars(s.induced_p_obs().probs()),
    });
    Ok(Output::json(&body, merit_lines(&s)))
}

pub fn solve_prior_cmd(args: &SolvePriorArgs) -> CliResult<Output> {
    match args.mode {
        Mode::Rational => solve_prior_in::<bellmd_core::Rational>(args),
        Mode::Double => solve_prior_in::<f64>(args),
    }
}

fn solve_prior_in<T: Scalar>(args: &SolvePriorArgs) -> CliResult<Output> {
    let s = strategy_from_json::<T>(&read_json(&args.strategy)?)?;
    let target = match &args.target {
        Some(spec) => parse_distribution::<T>(spec, s.shape())?,
        None => s.induced_p_obs(),
    };
    match solve_prior(s.conditionals(), &target) {
        Ok(sol) => {
            let summary = vec![format!(
                "prior found ({}{}), residual {:.3e}",
                if sol.unique { "unique" } else { "not unique" },
                if sol.max_entropy { ", maximum entropy" } else { "" },
                sol.residual
            )];
            let body = json!({
                "status": "feasible",
                "lambdas": s.lambdas(),
                "prior": scalars(&sol.prior),
                "unique": sol.unique,
                "max_entropy": sol.max_entropy,
                "residual": sol.residual,
            });
            Ok(Output::json(&body, summary))
        }
        Err(PriorError::Infeasible { certificate }) => Err(Failure::Infeasible {
            message: "no prior reproduces the target distribution".into(),
            report: json!({
                "status": "infeasible",
                "certificate": scalars(&certificate),
                "rows": "one per setting tuple, then the normalization row",
            }),
        }),
        Err(PriorError::Invalid(e)) => Err(e.into()),
    }
}

pub fn write_output(path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
