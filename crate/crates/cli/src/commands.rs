use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use feynman_core::associativity::{classify_detailed, Classification, ClassifyOutcome};
use feynman_core::born_solver::{admissible, sampled_multiplicativity, solution_family_for, HFunction};
use feynman_core::pair_algebra::{GammaVector, StandardForm};
use feynman_core::reciprocity::{
    cross_check, eliminate, run_full_elimination, solve_reciprocity, DerivationReport, EliminationCell,
    EliminationConfig, ReciprocityOp, Verdict,
};
use feynman_core::regrading::{reduce_with_tol, ReductionResult};
use feynman_core::rng::stream;
use feynman_core::sequence_lab::{
    check_symmetries, normalization_check, sequences_from_json, Setup, SymmetryConfig,
};
use feynman_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{exit, Cli, Command, EliminateArgs, GammaArgs, RunArgs};

pub struct Output {
    pub command: &'static str,
    pub status: u8,
    pub result: Value,
    pub text: String,
}

pub struct Failure {
    pub status: u8,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { status: exit::USAGE, message: message.into() }
}

type CmdResult = Result<Output, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_form(s: &str) -> Result<StandardForm, Failure> {
    s.parse().map_err(|e: Error| usage(e.to_string()))
}

pub fn run(cli: &Cli) -> CmdResult {
    let run = &cli.run;
    match &cli.command {
        Command::Classify(g) => classify(run, g, false),
        Command::Reduce(g) => classify(run, g, true),
        Command::SolveH(a) => solve_h(run, &a.form, a.alpha, a.beta),
        Command::SolveReciprocity(a) => solve_rec(run, a.form.as_deref()),
        Command::Eliminate(a) => eliminate_one(run, a),
        Command::Derive => derive(run),
        Command::Simulate(a) => simulate(&a.setup, &a.sequences),
        Command::CheckSymmetries(a) => {
            let cfg = SymmetryConfig { seed: run.rng_seed, cases: a.cases, max_len: a.max_len, labels: a.labels };
            symmetries(&cfg)
        }
    }
}

fn gamma_from(args: &GammaArgs) -> Result<GammaVector, Failure> {
    let values: Vec<f64> = match &args.file {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => args
            .gamma
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| usage(format!("not a number: {s:?}"))))
            .collect::<Result<_, _>>()?,
    };
    GammaVector::from_slice(&values).map_err(|e| usage(e.to_string()))
}

#[derive(Serialize)]
struct ClassifyReport {
    gamma: GammaVector,
    #[serde(flatten)]
    outcome: ClassifyOutcome,
    mu: Option<i8>,
    reduction: Option<ReductionResult>,
    violated_equations: Vec<usize>,
}

fn classify(run: &RunArgs, args: &GammaArgs, reduce_only: bool) -> CmdResult {
    let g = gamma_from(args)?;
    let outcome = classify_detailed(&g, run.tolerance).map_err(|e| usage(e.to_string()))?;
    let c = outcome.classification;
    let reduction = if c.is_associative() {
        Some(reduce_with_tol(&c, run.tolerance).map_err(|e| Failure { status: exit::REGRESSION, message: e.to_string() })?)
    } else {
        None
    };
    let mu = match &reduction {
        Some(ReductionResult::Reduced { mu, .. }) => *mu,
        _ => None,
    };
    let violated = match &c {
        Classification::NotAssociative { residuals } => residuals.violated(run.tolerance),
        _ => Vec::new(),
    };

    let mut t = String::new();
    let _ = writeln!(t, "gamma: {g}");
    let _ = writeln!(t, "family: {c}");
    if let Classification::NotAssociative { residuals } = &c {
        for (i, r) in residuals.values().iter().enumerate() {
            let mark = if violated.contains(&(i + 1)) { "  violated" } else { "" };
            let _ = writeln!(t, "  equation {:>2}: {r:e}{mark}", i + 1);
        }
    }
    if let Some(m) = mu {
        let _ = writeln!(t, "mu: {m}");
    }
    match &reduction {
        Some(ReductionResult::Reduced { form, map, .. }) => {
            let _ = writeln!(t, "standard form: {form}");
            let _ = writeln!(t, "reduction map: {map}");
        }
        Some(ReductionResult::Inadmissible { inadmissible }) => {
            let _ = writeln!(t, "inadmissible: {inadmissible}");
        }
        None => {}
    }
    if outcome.borderline {
        let _ = writeln!(t, "warning: decision within two decades of the tolerance");
    }
    for d in &outcome.diagnostics {
        let _ = writeln!(t, "note: {d}");
    }

    let status = match (&reduction, reduce_only) {
        (None, _) => exit::NEGATIVE,
        (Some(ReductionResult::Inadmissible { .. }), true) => exit::NEGATIVE,
        _ => exit::OK,
    };
    let report = ClassifyReport { gamma: g, outcome, mu, reduction, violated_equations: violated };
    Ok(Output {
        command: if reduce_only { "reduce" } else { "classify" },
        status,
        result: to_value(&report),
        text: t,
    })
}

fn solve_h(run: &RunArgs, form: &str, alpha: Option<f64>, beta: Option<f64>) -> CmdResult {
    let form = parse_form(form)?;
    let family = solution_family_for(form);
    let mut t = String::new();
    let _ = writeln!(t, "form: {form}");
    let _ = writeln!(t, "solution: h(x) = {} [{}]", family.formula, family.formula_id);
    let mut result = json!({ "family": family });
    let mut status = exit::OK;
    if let Some(alpha) = alpha {
        let h = HFunction::new(form, alpha, beta.unwrap_or(0.0));
        let mut rng = stream(run.rng_seed, &[0xb0, form as u64]);
        let check = sampled_multiplicativity(&h, run.sample_count, &mut rng);
        let ok = check.max_relative < run.tolerance;
        if !ok {
            status = exit::REGRESSION;
        }
        let _ = writeln!(t, "member: alpha={alpha} beta={}", h.beta.map_or("-".into(), |b| b.to_string()));
        let _ = writeln!(t, "admissible: {}", admissible(&h));
        let _ = writeln!(
            t,
            "multiplicative: {ok} (max relative residual {:e} over {} samples, {} outside domain)",
            check.max_relative, check.checked, check.skipped
        );
        result["member"] = to_value(&h);
        result["admissible"] = json!(admissible(&h));
        result["check"] = to_value(&check);
        result["multiplicative"] = json!(ok);
    } else {
        let _ = writeln!(t, "admissible members: {}", if family.beta_free || form == StandardForm::C1 { "yes" } else { "none" });
    }
    Ok(Output { command: "solve-h", status, result, text: t })
}

fn solve_rec(run: &RunArgs, form: Option<&str>) -> CmdResult {
    let forms = match form {
        Some(f) => vec![parse_form(f)?],
        None => StandardForm::ALL.to_vec(),
    };
    let mut t = String::new();
    let mut rows = Vec::new();
    let mut status = exit::OK;
    for f in forms {
        let sol = solve_reciprocity(f);
        let check = cross_check(&sol, run.rng_seed);
        if !check.agrees || !sol.unresolved.is_empty() {
            status = exit::REGRESSION;
        }
        let _ = writeln!(t, "{f}:");
        for op in &sol.isolated {
            let inv = if op.invertible { "invertible" } else { "non-invertible" };
            let _ = writeln!(t, "  {}  {inv}", op.label());
        }
        for fam in &sol.families {
            let _ = writeln!(
                t,
                "  family {} (contains {})",
                fam.description,
                if fam.named_members.is_empty() { "no named operator".to_string() } else { fam.named_members.join(", ") }
            );
        }
        for u in &sol.unresolved {
            let _ = writeln!(t, "  unresolved {u}");
        }
        let _ = writeln!(
            t,
            "  brute force {}: {} hits, {}",
            check.grid,
            check.hits,
            if check.agrees { "agrees" } else { "DISAGREES" }
        );
        rows.push(json!({ "solutions": sol, "cross_check": check }));
    }
    Ok(Output { command: "solve-reciprocity", status, result: Value::Array(rows), text: t })
}

fn elimination_config(run: &RunArgs) -> EliminationConfig {
    EliminationConfig { seed: run.rng_seed, samples: run.sample_count, tol: run.tolerance }
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Accepted { alpha, beta } => match beta {
            Some(b) => format!("Accepted alpha={alpha} beta={b}"),
            None => format!("Accepted alpha={alpha}"),
        },
        Verdict::RejectedNonInvertible { det } => format!("RejectedNonInvertible det={det}"),
        Verdict::RejectedCounterexample { certificate: c } => format!(
            "RejectedCounterexample at alpha={}{}: a={} b={} h(a)+h(b)={} h(c)={}",
            c.alpha,
            c.beta.map_or(String::new(), |b| format!(" beta={b}")),
            c.a,
            c.b,
            c.lhs,
            c.rhs
        ),
        Verdict::RejectedInadmissibleExponents { detail, .. } => format!("RejectedInadmissibleExponents: {detail}"),
        Verdict::RejectedProbabilityAsymmetry { exponents, point, probability, reversed_probability } => format!(
            "RejectedProbabilityAsymmetry at {exponents}: h{point}={probability} but reversed {reversed_probability}"
        ),
    }
}

fn cell_text(t: &mut String, c: &EliminationCell) {
    let _ = writeln!(t, "{:<3} {:<22} {}", c.form.label(), c.operator.label(), verdict_text(&c.verdict));
    if let Some(e) = &c.exponent_analysis {
        let _ = writeln!(
            t,
            "    exponent: witness {:.9} sampled {:.9} isolated on grid: {}",
            e.witness_alpha, e.sampled_alpha, e.isolated
        );
    }
}

fn eliminate_one(run: &RunArgs, a: &EliminateArgs) -> CmdResult {
    let form = parse_form(&a.form)?;
    let op = match (&a.op, &a.matrix) {
        (Some(name), None) => ReciprocityOp::named(name).ok_or_else(|| usage(format!("unknown operator {name:?}")))?,
        (None, Some(m)) => ReciprocityOp::new(m[0], m[1], m[2], m[3]).map_err(|e| usage(e.to_string()))?,
        _ => return Err(usage("give --op NAME or --matrix R1 R2 R3 R4")),
    };
    let cell = eliminate(form, &op, &elimination_config(run));
    let mut t = String::new();
    cell_text(&mut t, &cell);
    let _ = writeln!(
        t,
        "grid points {}: {} refuted, {} survived, {} vacuous, {} inconclusive",
        cell.grid_points,
        cell.certificates.len(),
        cell.survivors.len(),
        cell.vacuous.len(),
        cell.inconclusive.len()
    );
    Ok(Output { command: "eliminate", status: exit::OK, result: to_value(&cell), text: t })
}

fn derive(run: &RunArgs) -> CmdResult {
    let report: DerivationReport = run_full_elimination(&elimination_config(run));
    let mut t = String::new();
    for f in &report.forms {
        let _ = writeln!(t, "{:<3} h(x) = {:<38} {}", f.form.label(), f.solution_family.formula, f.status);
    }
    let _ = writeln!(t);
    for c in &report.cells {
        cell_text(&mut t, c);
    }
    for s in &report.family_sweeps {
        let verdicts: Vec<String> = s.members.iter().map(|(p, v)| format!("t={p}: {v}")).collect();
        let _ = writeln!(t, "{:<3} family {} members: {}", s.form.label(), s.family, verdicts.join(", "));
    }
    let _ = writeln!(t);
    if let Some(r) = &report.feynman_rules {
        let _ = writeln!(t, "surviving rules:");
        let _ = writeln!(t, "  parallel:    {}", r.addition);
        let _ = writeln!(t, "  series:      {}", r.multiplication);
        let _ = writeln!(t, "  probability: {}", r.probability);
    }
    for d in &report.deviations {
        let _ = writeln!(t, "deviation: {d}");
    }
    let status = if report.ok() { exit::OK } else { exit::REGRESSION };
    let _ = writeln!(t, "verdict table: {}", if report.ok() { "as expected" } else { "DEVIATES" });
    Ok(Output { command: "derive", status, result: to_value(&report), text: t })
}

fn simulate(setup_path: &Path, seq_path: &Path) -> CmdResult {
    let setup = Setup::from_json(&read(setup_path)?).map_err(|e| usage(e.to_string()))?;
    let seqs = sequences_from_json(&read(seq_path)?).map_err(|e| usage(e.to_string()))?;
    let mut t = String::new();
    let mut rows = Vec::new();
    for s in &seqs {
        setup.validate(s).map_err(|e| usage(e.to_string()))?;
        let amp = setup.amplitude(s).map_err(|e| match e {
            Error::MissingAmplitude { .. } => Failure { status: exit::DATA, message: e.to_string() },
            other => usage(other.to_string()),
        })?;
        let p = amp.norm_sqr();
        let _ = writeln!(t, "{s}  amplitude {amp}  probability {p}");
        rows.push(json!({ "sequence": s, "amplitude": amp, "probability": p }));
    }
    let normalization = normalization_check(&setup).ok();
    if let Some(n) = &normalization {
        let _ = writeln!(
            t,
            "normalization: tables preserve modulus squares: {}; max |total - 1| = {:e}; trivial interleave change = {:e}",
            n.qualifies, n.max_deviation, n.interleave_max_change
        );
    }
    Ok(Output {
        command: "simulate",
        status: exit::OK,
        result: json!({ "setup_id": setup.setup_id, "sequences": rows, "normalization": normalization }),
        text: t,
    })
}

fn symmetries(cfg: &SymmetryConfig) -> CmdResult {
    let r = check_symmetries(cfg);
    let mut t = String::new();
    for l in &r.laws {
        let _ = writeln!(t, "{} {:<34} {:<12} {} instances", l.law, l.statement, l.status, l.instances);
        if let Some(w) = &l.witness {
            let _ = writeln!(t, "   witness: {w}");
        }
    }
    let _ = writeln!(
        t,
        "amplitude homomorphism: parallel {:e} over {}, series {:e} over {}",
        r.parallel_residual, r.parallel_instances, r.series_residual, r.series_instances
    );
    let status = if r.passed { exit::OK } else { exit::REGRESSION };
    Ok(Output { command: "check-symmetries", status, result: to_value(&r), text: t })
}
