//! Command-line front end. Exit codes: 0 all pass, 1 a check failed, 2 bad input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bayes::{
    bayes_estimator, balanced_pair_bound, decompose, guntuboyina_bound, jsd_risk_bound,
    pinsker_series, relative_entropy_bound, ProblemFile,
};
use crate::distribution::{align, DiscreteDistribution};
use crate::divergence::{f_divergence, ratio_range};
use crate::error::{Error, Result};
use crate::generator::{make_builtin, parse_generator, Builtin, ConvexGenerator};
use crate::harness::registry::{run_registry, select, summarize, CheckSummary, Context, Execution};
use crate::harness::InstanceGenerator;
use crate::io::read_distribution;
use crate::report::{CheckReport, DEFAULT_TOLERANCE};
use crate::skew::{
    generalized_chi2_masses, generalized_js_masses, generalized_skew_divergence, skew_divergence,
    SkewScheme,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const DEFAULT_PANEL: &str = "kl,total_variation,pearson_chi2,squared_hellinger,jensen_shannon";

#[derive(Debug, Parser)]
#[command(name = "divkit", version, about = "f-divergences between finite distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Divergence panel between two distribution files.
    Compute(ComputeArgs),
    /// Run the inequality registry over random instances.
    Check(CheckArgs),
    /// Decomposition, risk and bounds of a Bayes problem.
    Bayes(BayesArgs),
    /// Trace of the JSD series for relative entropy.
    Series(SeriesArgs),
    /// The κ-table with numeric certification.
    Table(TableArgs),
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    pub p: PathBuf,
    pub q: PathBuf,
    /// Comma-separated generators, e.g. `kl,alpha:0.5,sason:1`.
    #[arg(long, value_delimiter = ',', default_value = DEFAULT_PANEL)]
    pub divergence: Vec<String>,
    /// Skew pair `t,s`; repeatable.
    #[arg(long, value_name = "T,S")]
    pub skew: Vec<String>,
    /// `alphas=a1,a2,... weights=w1,w2,...`
    #[arg(long, num_args = 2, value_names = ["ALPHAS", "WEIGHTS"])]
    pub scheme: Option<Vec<String>>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Instances per (support size, hypothesis count) pair.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub support_sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub hypotheses: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub mass_floor: f64,
    /// Comma-separated check identifiers; all by default.
    #[arg(long, value_delimiter = ',')]
    pub checks: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Evaluate on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
    /// Print every report, not only the summary.
    #[arg(long)]
    pub json: bool,
    /// List the registered checks and exit.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Generators for the sharpened bound.
    #[arg(long, value_delimiter = ',', default_value = "kl,pearson_chi2,squared_hellinger")]
    pub divergence: Vec<String>,
    /// Human-readable output instead of JSON.
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    pub p: PathBuf,
    pub q: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub max_terms: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Likelihood-ratio bound `M`.
    #[arg(long = "M", default_value_t = 1.0, allow_negative_numbers = true)]
    pub m: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.5", allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub s: Vec<f64>,
    #[arg(long)]
    pub json: bool,
}

/// Parses `argv` (program name first), runs, prints, and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Runs a command, returning its standard output and exit code.
pub fn run(command: &Command) -> Result<(String, i32)> {
    match command {
        Command::Compute(a) => compute(a).map(|s| (s, EXIT_OK)),
        Command::Check(a) => check(a),
        Command::Bayes(a) => bayes(a).map(|s| (s, EXIT_OK)),
        Command::Series(a) => series(a).map(|s| (s, EXIT_OK)),
        Command::Table(a) => table(a),
    }
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn generators(names: &[String]) -> Result<Vec<ConvexGenerator>> {
    names
        .iter()
        .map(|n| parse_generator(n.trim()).map_err(|e| Error::Input(format!("`divergence`: {e}"))))
        .collect()
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [t, s] => match (t.parse(), s.parse()) {
            (Ok(t), Ok(s)) => Ok((t, s)),
            _ => Err(Error::Input(format!("`skew`: `{text}` is not a pair of numbers"))),
        },
        _ => Err(Error::Input(format!("`skew`: expected `t,s`, got `{text}`"))),
    }
}

fn parse_list(field: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("`{field}`: `{v}` is not a number")))
        })
        .collect()
}

fn parse_scheme(parts: &[String]) -> Result<SkewScheme> {
    let mut alphas = None;
    let mut weights = None;
    for part in parts {
        match part.split_once('=') {
            Some(("alphas", v)) => alphas = Some(parse_list("alphas", v)?),
            Some(("weights", v)) => weights = Some(parse_list("weights", v)?),
            _ => return Err(Error::Input(format!("`scheme`: unexpected `{part}`"))),
        }
    }
    let alphas = alphas.ok_or_else(|| Error::Input("`scheme`: missing `alphas=`".into()))?;
    let weights = weights.ok_or_else(|| Error::Input("`scheme`: missing `weights=`".into()))?;
    SkewScheme::new(alphas, weights).map_err(|e| Error::Input(format!("`scheme`: {e}")))
}

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.10}")
    } else {
        format!("{v}")
    }
}

fn json_value(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn compute(a: &ComputeArgs) -> Result<String> {
    let p = read_distribution(&a.p)?;
    let q = read_distribution(&a.q)?;
    let gens = generators(&a.divergence)?;
    let skews = a.skew.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>>>()?;
    let scheme = a.scheme.as_deref().map(parse_scheme).transpose()?;

    let mut rows = Vec::new();
    for g in &gens {
        let d = f_divergence(g, &p, &q)?;
        let mut row = json!({ "divergence": g.name(), "value": json_value(d.value) });
        for &(t, s) in &skews {
            let v = skew_divergence(g, &p, &q, t, s)?;
            row[format!("skew({t},{s})")] = json_value(v);
        }
        if let Some(sc) = &scheme {
            row["scheme"] = json_value(generalized_skew_divergence(g, &p, &q, sc));
        }
        rows.push(row);
    }
    let (lo, hi) = ratio_range(&p, &q);
    let mut doc = json!({
        "rows": rows,
        "ratio_range": [json_value(lo), json_value(hi)],
    });
    if let Some(sc) = &scheme {
        let al = align(&p, &q);
        doc["generalized_js"] = json_value(generalized_js_masses(&al.p, &al.q, sc));
        doc["generalized_chi2"] = json_value(generalized_chi2_masses(&al.p, &al.q, sc));
    }
    if a.json {
        return Ok(to_json(&doc));
    }
    let mut out = String::new();
    let extra: Vec<String> = skews
        .iter()
        .map(|(t, s)| format!("skew({t},{s})"))
        .chain(scheme.iter().map(|_| "scheme".to_string()))
        .collect();
    let _ = write!(out, "{:<28} {:>16}", "divergence", "value");
    for h in &extra {
        let _ = write!(out, " {h:>16}");
    }
    out.push('\n');
    for row in &rows {
        let _ = write!(out, "{:<28} {:>16}", row["divergence"].as_str().unwrap_or(""), cell(&row["value"]));
        for h in &extra {
            let _ = write!(out, " {:>16}", cell(&row[h.as_str()]));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "ratio range: [{}, {}]", fmt_value(lo), fmt_value(hi));
    for key in ["generalized_js", "generalized_chi2"] {
        if !doc[key].is_null() {
            let _ = writeln!(out, "{key}: {}", cell(&doc[key]));
        }
    }
    Ok(out)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => fmt_value(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        _ => String::new(),
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: &'a InstanceGenerator,
    tolerance: f64,
    checks: Vec<&'static str>,
    summary: &'a [CheckSummary],
    #[serde(skip_serializing_if = "Option::is_none")]
    reports: Option<&'a [CheckReport]>,
}

fn check(a: &CheckArgs) -> Result<(String, i32)> {
    if a.list {
        let mut out = String::new();
        for c in crate::harness::REGISTRY {
            let _ = writeln!(out, "{:<30} {}", c.id, c.summary);
        }
        return Ok((out, EXIT_OK));
    }
    if !(a.tolerance >= 0.0 && a.tolerance.is_finite()) {
        return Err(Error::Input(format!("`tolerance` = {} must be finite and nonnegative", a.tolerance)));
    }
    let gen = InstanceGenerator {
        seed: a.seed,
        support_sizes: a.support_sizes.clone(),
        n_hypotheses: a.hypotheses.clone(),
        mass_floor: a.mass_floor,
        count: a.count,
    };
    let checks = select(&a.checks)?;
    let execution = if a.sequential { Execution::Sequential } else { Execution::default() };
    let reports = run_registry(&gen, &checks, &Context { tolerance: a.tolerance }, execution)?;
    let summary = summarize(&reports);
    let code = if reports.iter().any(|r| r.verdict.is_failure()) {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    };
    if a.json {
        let doc = RunReport {
            config: &gen,
            tolerance: a.tolerance,
            checks: checks.iter().map(|c| c.id).collect(),
            summary: &summary,
            reports: Some(&reports),
        };
        return Ok((to_json(&doc), code));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<30} {:>6} {:>6} {:>6} {:>6} {:>6} {:>14}",
        "check", "total", "pass", "fail", "skip", "degen", "worst margin"
    );
    for s in &summary {
        let _ = writeln!(
            out,
            "{:<30} {:>6} {:>6} {:>6} {:>6} {:>6} {:>14.3e}",
            s.check_id, s.total, s.passed, s.failed, s.skipped, s.degenerate, s.worst_margin
        );
        for m in &s.monitors {
            let _ = writeln!(
                out,
                "    monitor {:<24} held {}/{} worst margin {:.3e}",
                m.form, m.held, m.evaluated, m.worst_margin
            );
        }
    }
    let failed: usize = summary.iter().map(|s| s.failed).sum();
    let _ = writeln!(out, "{} reports, {failed} failed", reports.len());
    Ok((out, code))
}

fn bayes(a: &BayesArgs) -> Result<String> {
    let text = fs::read_to_string(&a.problem).map_err(|e| Error::Input(format!("{}: {e}", a.problem.display())))?;
    let file: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| Error::Input(format!("{}: {e}", a.problem.display())))?;
    let (prob, q) = file.into_parts()?;
    let gens = generators(&a.divergence)?;
    let d = decompose(&prob, &q)?;
    let w = crate::bayes::w_terms_from(&prob, &q, &d)?;
    let mut bounds = Vec::new();
    for g in &gens {
        let b = guntuboyina_bound(&prob, &q, g)?;
        bounds.push(json!({
            "divergence": g.name(),
            "lhs": json_value(b.lhs),
            "rhs": json_value(b.rhs),
            "kappa": json_value(b.kappa),
            "margin": json_value(b.margin()),
        }));
    }
    let mut doc = json!({
        "support": prob.support(),
        "prior": prob.prior(),
        "q": q,
        "decision": bayes_estimator(&prob).decision,
        "risk": d.risk,
        "decomposition": d,
        "w_terms": w,
        "bounds": bounds,
    });
    if let Ok(b) = relative_entropy_bound(&prob, &q) {
        doc["relative_entropy_bound"] = json!({
            "lhs": json_value(b.lhs),
            "t_star": json_value(b.t_star),
            "reference_rhs": json_value(b.reference_rhs),
            "barycenter_rhs": json_value(b.barycenter_rhs),
        });
    }
    if prob.n() == 2 {
        let hyp = prob.hypotheses();
        if let Ok(b) = jsd_risk_bound(&hyp[0], &hyp[1]) {
            doc["jsd_risk_bound"] = json!({
                "jsd": b.jsd,
                "tv": b.tv,
                "quarter_rhs": b.quarter_rhs,
                "quadratic_rhs": b.quadratic_rhs,
                "eighth_rhs": b.eighth_rhs,
            });
        }
        let uniform = prob.prior().iter().all(|&l| l == 0.5);
        if uniform {
            let mut pair = Vec::new();
            for g in &gens {
                if let Ok(b) = balanced_pair_bound(&prob, &q, g) {
                    pair.push(json!({
                        "divergence": g.name(),
                        "lhs": json_value(b.lhs),
                        "quarter_kappa_rhs": json_value(b.quarter_kappa_rhs),
                        "half_kappa_rhs": json_value(b.half_kappa_rhs),
                    }));
                }
            }
            doc["two_point_bounds"] = json!(pair);
        }
    }
    if !a.text {
        return Ok(to_json(&doc));
    }
    let mut out = String::new();
    let _ = writeln!(out, "risk R = {}", fmt_value(d.risk));
    let _ = writeln!(out, "Q mass = {}", fmt_value(d.q_mass));
    let _ = writeln!(out, "W0 = {}  W1 = {}  W2 = {}", fmt_value(w.w0), fmt_value(w.w1), fmt_value(w.w2));
    if let Some(reason) = d.degenerate() {
        let _ = writeln!(out, "degenerate: {reason}");
    }
    for b in &bounds {
        let _ = writeln!(
            out,
            "{:<24} lhs {:>16} rhs {:>16} margin {:>16}",
            b["divergence"].as_str().unwrap_or(""),
            cell(&b["lhs"]),
            cell(&b["rhs"]),
            cell(&b["margin"])
        );
    }
    Ok(out)
}

fn series(a: &SeriesArgs) -> Result<String> {
    let p: DiscreteDistribution = read_distribution(&a.p)?;
    let q: DiscreteDistribution = read_distribution(&a.q)?;
    let al = align(&p, &q);
    let s = pinsker_series(&al.p, &al.q, a.max_terms)?;
    if a.json {
        let doc = json!({
            "kl": s.kl,
            "tv": s.tv,
            "partial_sums": s.partial_sums,
            "lower_bound_terms": s.lower_bound_terms,
            "weighted_terms": s.weighted_terms,
            "pinsker": s.pinsker(),
            "unweighted_bound": s.unweighted_bound(),
            "weighted_bound": s.weighted_bound(),
        });
        return Ok(to_json(&doc));
    }
    let mut out = String::new();
    let _ = writeln!(out, "{:>4} {:>20} {:>20}", "k", "partial sum", "gap to kl");
    for (k, v) in s.partial_sums.iter().enumerate() {
        let _ = writeln!(out, "{:>4} {:>20.15} {:>20.3e}", k, v, s.kl - v);
    }
    let _ = writeln!(out, "kl = {:.15}", s.kl);
    let _ = writeln!(out, "2 TV^2 = {:.15}", s.pinsker());
    let _ = writeln!(out, "series lower bound = {:.15}", s.weighted_bound());
    Ok(out)
}

#[derive(Serialize)]
struct TableRow {
    name: String,
    formula: &'static str,
    kappa_formula: &'static str,
    domain: String,
    kappa: f64,
    worst_margin: f64,
    certified: bool,
}

/// Every tabulated row at `M`, with the closed-form κ checked by central
/// differences over its interval.
pub fn kappa_table(m: f64, alphas: &[f64], sasons: &[f64]) -> Result<Vec<(Builtin, f64, crate::generator::CertificateCheck)>> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Input(format!("`M` = {m} must be positive and finite")));
    }
    let mut gens = Vec::new();
    for name in &Builtin::NAMES[..8] {
        gens.push(make_builtin(name, &[])?);
    }
    for &s in sasons {
        gens.push(make_builtin("sason_s", &[s]).map_err(|e| Error::Input(format!("`s`: {e}")))?);
    }
    for &al in alphas {
        gens.push(make_builtin("alpha_divergence", &[al]).map_err(|e| Error::Input(format!("`alpha`: {e}")))?);
    }
    Ok(gens
        .iter()
        .map(|g| {
            let b = g.builtin().expect("built-in");
            let cert = crate::generator::KappaCertificate {
                interval: b.table_domain(m),
                kappa: b.table_kappa(m),
                method: crate::generator::CertificateMethod::ClosedForm,
            };
            (b, cert.kappa, cert.verify(g))
        })
        .collect())
}

fn table(a: &TableArgs) -> Result<(String, i32)> {
    let rows: Vec<TableRow> = kappa_table(a.m, &a.alpha, &a.s)?
        .into_iter()
        .map(|(b, kappa, check)| TableRow {
            name: b.name(),
            formula: b.formula(),
            kappa_formula: b.kappa_formula(),
            domain: b.table_domain(a.m).to_string(),
            kappa,
            worst_margin: check.worst_margin,
            certified: check.passed(),
        })
        .collect();
    let code = if rows.iter().all(|r| r.certified) { EXIT_OK } else { EXIT_CHECK_FAILED };
    if a.json {
        return Ok((to_json(&json!({ "M": a.m, "rows": rows })), code));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:<36} {:<14} {:<12} {:>14} {:>10}",
        "divergence", "f(t)", "kappa(M)", "domain", "kappa", "status"
    );
    for r in &rows {
        let status = if r.certified { "certified" } else { "FAILED" };
        let _ = writeln!(
            out,
            "{:<18} {:<36} {:<14} {:<12} {:>14.6} {:>10}",
            r.name, r.formula, r.kappa_formula, r.domain, r.kappa, status
        );
    }
    Ok((out, code))
}
