//! The inequality registry: every check maps one instance to one report.
//!
//! Checks that range over several generators or sub-cases report the case
//! closest to failing. Alternative constants for the same statement travel as
//! monitors on the report and never affect its verdict.

use std::sync::LazyLock;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::bayes::{
    balanced_pair_bound, bayes_estimator, binary_kl_half, compensation_identity_check, decompose,
    enumerated_risk, guntuboyina_bound, jsd_risk_bound, pinsker_series, relative_entropy_bound,
    BayesProblem,
};
use crate::distribution::mixture;
use crate::divergence::{
    binary_divergence, chi_square_masses, divergence, jsd_masses, ratio_range_masses,
    total_variation_masses,
};
use crate::error::{Error, Result};
use crate::generator::{
    affine_shift, dual, kappa_on, kappa_on_ratio_range, parse_generator, scale_extended,
    ConvexGenerator, Interval,
};
use crate::harness::instances::{Instance, InstanceGenerator};
use crate::report::{CheckReport, Monitor, Relation, Verdict, DEFAULT_TOLERANCE};
use crate::skew::{
    a_coefficient, d_infinity_binary, entropy_of_weights, generalized_chi2_masses,
    generalized_js_masses, n_infinity, skew_divergence_masses, skew_generator,
    skew_symmetrization, skew_tv_constant, variance_of_alphas, GeneratorSkewParams,
};

/// Settings shared by every check in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Context {
    /// Absolute tolerance on margins, scaled by the magnitude of the sides
    /// once they exceed 1.
    pub tolerance: f64,
}

impl Default for Context {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Relative tolerance of exact identities.
const IDENTITY_TOLERANCE: f64 = 1e-12;
/// Perturbation size of the sharpness probe.
const SHARPNESS_EPSILON: f64 = 1e-3;
/// Allowed relative deviation of the sharpness ratio.
const SHARPNESS_TOLERANCE: f64 = 0.05;
/// Terms allowed in the JSD series.
const SERIES_TERMS: usize = 60;
/// Largest instance handed to the brute-force risk oracle.
const ENUMERATION_LIMIT: (usize, usize) = (8, 4);

pub type CheckFn = fn(&Instance, &Context) -> CheckReport;

pub struct CheckEntry {
    pub id: &'static str,
    pub summary: &'static str,
    pub run: CheckFn,
}

pub static REGISTRY: &[CheckEntry] = &[
    CheckEntry { id: "chi2_floor", summary: "D_f >= (k/2) chi2 with k certified on the ratio range", run: chi2_floor },
    CheckEntry { id: "functional_dominance", summary: "c f >= g pointwise gives D_g <= c D_f", run: functional_dominance },
    CheckEntry { id: "chi2_floor_sharpness", summary: "D_f / chi2 -> f''(1)/2 under small perturbations", run: chi2_floor_sharpness },
    CheckEntry { id: "mixture_convexity_gap", summary: "strong convexity gap of D_f over mixtures", run: mixture_convexity_gap },
    CheckEntry { id: "barycenter_tv_floor", summary: "k * mean TV^2 to the barycenter <= mean D_f to it", run: barycenter_tv_floor },
    CheckEntry { id: "no_reverse_pinsker", summary: "D_f / TV is unbounded for superlinear f", run: no_reverse_pinsker },
    CheckEntry { id: "vincze_le_cam_floor", summary: "Delta_f >= (k/4) Vincze-Le Cam with k on (0,2)", run: vincze_le_cam_floor },
    CheckEntry { id: "skew_kl_tv_bound", summary: "S_{a,b} <= C(a) D_inf(a||b) TV", run: skew_kl_tv_bound },
    CheckEntry { id: "jsd_tv_bound", summary: "JSD <= ln 2 TV", run: jsd_tv_bound },
    CheckEntry { id: "generalized_js_tv_bounds", summary: "Var_w TV^2 <= JS^{a,w} <= A H(w) TV", run: generalized_js_tv_bounds },
    CheckEntry { id: "generalized_chi2_js_bound", summary: "chi2_{a,w} <= 2 N_inf JS^{a,w}", run: generalized_chi2_js_bound },
    CheckEntry { id: "bayes_sharpened_fano", summary: "sum l_i D_f(p_i||q) >= D_f(R||Q) + k W / 2", run: bayes_sharpened_fano },
    CheckEntry { id: "bayes_uniform_two_point", summary: "two hypotheses, uniform prior: TV form of the sharpened bound", run: bayes_uniform_two_point },
    CheckEntry { id: "relative_entropy_bayes_bound", summary: "relative entropy form with t* = 1/max ratio", run: relative_entropy_bayes_bound },
    CheckEntry { id: "jsd_risk_lower_bound", summary: "JSD >= D((1+V)/2||1/2) + chi2 corrections", run: jsd_risk_lower_bound },
    CheckEntry { id: "pinsker_series_sharpening", summary: "D >= 2 TV^2 + JSD-series chi2 corrections", run: pinsker_series_sharpening },
    CheckEntry { id: "kappa_jensen_gap", summary: "E f(X) - f(EX) >= (k/2) Var X", run: kappa_jensen_gap },
    CheckEntry { id: "skew_kl_log_bound", summary: "D(P || tP + (1-t)Q) <= -ln t TV", run: skew_kl_log_bound },
    CheckEntry { id: "tv_ratio_cap", summary: "D_f <= (f(0) + f*(0)) TV", run: tv_ratio_cap },
    CheckEntry { id: "data_processing", summary: "coarsening does not increase D_f", run: data_processing },
    CheckEntry { id: "duality_swap", summary: "D_{f*}(P||Q) = D_f(Q||P)", run: duality_swap },
    CheckEntry { id: "affine_shift_invariance", summary: "D_{f + c(t-1)} = D_f", run: affine_shift_invariance },
    CheckEntry { id: "skew_generator_equivalence", summary: "skewed generator equals the direct mixture divergence", run: skew_generator_equivalence },
    CheckEntry { id: "skew_symmetrization_vincze", summary: "Delta_chi2 = Delta/2, symmetry, Delta_kl = JSD", run: skew_symmetrization_vincze },
    CheckEntry { id: "bayes_risk_tv_identity", summary: "2R = 1 - TV for two hypotheses, uniform prior", run: bayes_risk_tv_identity },
    CheckEntry { id: "convex_reconstruction", summary: "q and p rebuild from their decompositions", run: convex_reconstruction },
    CheckEntry { id: "bayes_risk_enumeration", summary: "R equals the best of all deterministic estimators", run: bayes_risk_enumeration },
    CheckEntry { id: "compensation_identity", summary: "sum t_i D(P_i||Q) = D(P||Q) + sum t_i D(P_i||P)", run: compensation_identity },
];

/// Resolves check identifiers; an empty list selects the whole registry.
pub fn select(ids: &[String]) -> Result<Vec<&'static CheckEntry>> {
    if ids.is_empty() {
        return Ok(REGISTRY.iter().collect());
    }
    ids.iter()
        .map(|id| {
            REGISTRY
                .iter()
                .find(|c| c.id == id.as_str())
                .ok_or_else(|| Error::Input(format!("`checks`: unknown check `{id}`")))
        })
        .collect()
}

/// How checks fan out over the instance stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Worker threads when built with the `parallel` feature, sequential
    /// otherwise.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Runs `checks` on every instance; reports are ordered by instance, then by
/// registry position, whatever the execution mode.
pub fn run_registry(
    gen: &InstanceGenerator,
    checks: &[&CheckEntry],
    ctx: &Context,
    execution: Execution,
) -> Result<Vec<CheckReport>> {
    let instances = gen.instances()?;
    Ok(run_on(&instances, checks, ctx, execution))
}

pub fn run_on(instances: &[Instance], checks: &[&CheckEntry], ctx: &Context, execution: Execution) -> Vec<CheckReport> {
    let per_instance = |inst: &Instance| checks.iter().map(|c| (c.run)(inst, ctx)).collect::<Vec<_>>();
    match execution {
        Execution::Sequential => instances.iter().flat_map(per_instance).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => instances
            .par_iter()
            .map(per_instance)
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect(),
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => instances.iter().flat_map(per_instance).collect(),
    }
}

/// Per-check tallies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check_id: String,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub degenerate: usize,
    #[serde(with = "crate::report::extended")]
    pub worst_margin: f64,
    pub monitors: Vec<MonitorSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorSummary {
    pub form: String,
    pub evaluated: usize,
    pub held: usize,
    #[serde(with = "crate::report::extended")]
    pub worst_margin: f64,
}

pub fn summarize(reports: &[CheckReport]) -> Vec<CheckSummary> {
    let mut out: Vec<CheckSummary> = Vec::new();
    for r in reports {
        let idx = match out.iter().position(|s| s.check_id == r.check_id) {
            Some(i) => i,
            None => {
                out.push(CheckSummary {
                    check_id: r.check_id.clone(),
                    total: 0,
                    passed: 0,
                    failed: 0,
                    skipped: 0,
                    degenerate: 0,
                    worst_margin: f64::INFINITY,
                    monitors: Vec::new(),
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.total += 1;
        match r.verdict {
            Verdict::Pass => s.passed += 1,
            Verdict::Fail { .. } => s.failed += 1,
            Verdict::Skipped { .. } => s.skipped += 1,
            Verdict::Degenerate { .. } => s.degenerate += 1,
        }
        if !matches!(r.verdict, Verdict::Skipped { .. }) {
            s.worst_margin = min_nan(s.worst_margin, r.margin);
        }
        for m in &r.monitors {
            let ms = match s.monitors.iter().position(|x| x.form == m.form) {
                Some(i) => &mut s.monitors[i],
                None => {
                    s.monitors.push(MonitorSummary {
                        form: m.form.clone(),
                        evaluated: 0,
                        held: 0,
                        worst_margin: f64::INFINITY,
                    });
                    s.monitors.last_mut().expect("just pushed")
                }
            };
            ms.evaluated += 1;
            ms.held += usize::from(m.holds);
            ms.worst_margin = min_nan(ms.worst_margin, m.margin);
        }
    }
    out
}

/// Minimum that lets NaN win, so a NaN margin is never hidden.
fn min_nan(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

// ---------------------------------------------------------------------------
// Generator panels

fn panel(names: &[&str]) -> Vec<ConvexGenerator> {
    names
        .iter()
        .map(|n| parse_generator(n).expect("panel names are valid"))
        .collect()
}

/// Built-ins with a positive curvature somewhere, each checked on the
/// ratio range it meets.
static STRONG: LazyLock<Vec<ConvexGenerator>> = LazyLock::new(|| {
    panel(&[
        "kl",
        "squared_hellinger",
        "reverse_kl",
        "vincze_le_cam",
        "jensen_shannon",
        "neyman_chi2",
        "pearson_chi2",
        "sason_s:1",
        "alpha_divergence:0.5",
        "alpha_divergence:3.5",
    ])
});

/// Every tabulated row, with a spread of parameters.
static ALL: LazyLock<Vec<ConvexGenerator>> = LazyLock::new(|| {
    panel(&[
        "kl",
        "total_variation",
        "pearson_chi2",
        "squared_hellinger",
        "reverse_kl",
        "vincze_le_cam",
        "jensen_shannon",
        "neyman_chi2",
        "sason_s:0.3",
        "sason_s:2",
        "alpha_divergence:-3",
        "alpha_divergence:0",
        "alpha_divergence:2.5",
        "alpha_divergence:3.5",
    ])
});

static BAYES: LazyLock<Vec<ConvexGenerator>> =
    LazyLock::new(|| panel(&["kl", "pearson_chi2", "squared_hellinger", "jensen_shannon", "total_variation"]));

/// Superlinear generators (`f*(0) = ∞`).
static SUPERLINEAR: LazyLock<Vec<ConvexGenerator>> =
    LazyLock::new(|| panel(&["kl", "pearson_chi2", "sason_s:1", "alpha_divergence:3.5"]));

static KL: LazyLock<ConvexGenerator> = LazyLock::new(|| parse_generator("kl").expect("kl"));
static PEARSON: LazyLock<ConvexGenerator> = LazyLock::new(|| parse_generator("pearson_chi2").expect("chi2"));
static VINCZE: LazyLock<ConvexGenerator> = LazyLock::new(|| parse_generator("vincze_le_cam").expect("vlc"));

// ---------------------------------------------------------------------------
// Helpers

/// `tol·max(1, |a|, |b|)` over the finite sides.
fn scaled(tol: f64, a: f64, b: f64) -> f64 {
    let mag = [a, b]
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    tol * mag
}

fn graded(id: &str, inst: &Instance, case: &str, rel: Relation, lhs: f64, rhs: f64, tol: f64) -> CheckReport {
    CheckReport::evaluate(id, inst.descriptor(case), rel, lhs, rhs, scaled(tol, lhs, rhs))
}

fn failed(id: &str, inst: &Instance, case: &str, e: Error) -> CheckReport {
    let mut r = CheckReport::evaluate(id, inst.descriptor(case), Relation::Ge, f64::NAN, f64::NAN, 0.0);
    r.verdict = Verdict::Fail {
        reason: format!("evaluation error: {e}"),
    };
    r
}

/// The case closest to failing; failures first, skipped cases last. Monitors
/// of all cases are merged, keeping the worst per form.
fn worst(id: &str, inst: &Instance, cases: Vec<CheckReport>) -> CheckReport {
    let mut monitors: Vec<Monitor> = Vec::new();
    for m in cases.iter().flat_map(|c| c.monitors.iter()) {
        match monitors.iter_mut().find(|x| x.form == m.form) {
            Some(x) if m.margin.is_nan() || (!x.margin.is_nan() && m.margin < x.margin) => *x = m.clone(),
            Some(_) => {}
            None => monitors.push(m.clone()),
        }
    }
    let rank = |r: &CheckReport| match r.verdict {
        Verdict::Fail { .. } => (0, 0.0),
        Verdict::Skipped { .. } => (2, 0.0),
        _ => (1, r.margin + r.tolerance),
    };
    let chosen = cases
        .into_iter()
        .min_by(|a, b| {
            let (ra, ma) = rank(a);
            let (rb, mb) = rank(b);
            ra.cmp(&rb).then(ma.total_cmp(&mb))
        })
        .unwrap_or_else(|| CheckReport::skipped(id, inst.descriptor(""), "no applicable case"));
    chosen.with_monitors(monitors)
}

fn kappa_range(g: &ConvexGenerator, lo: f64, hi: f64) -> Result<f64> {
    Ok(kappa_on_ratio_range(g, lo, hi)?.kappa)
}

fn problem(inst: &Instance) -> Result<BayesProblem> {
    BayesProblem::from_masses(inst.hypotheses.clone(), inst.prior.clone())
}

fn pair_problem(inst: &Instance) -> Result<BayesProblem> {
    BayesProblem::uniform(inst.hypotheses[..2].to_vec())
}

fn barycenter(inst: &Instance) -> Vec<f64> {
    let k = inst.support_size;
    (0..k)
        .map(|x| inst.prior.iter().zip(&inst.hypotheses).map(|(l, p)| l * p[x]).sum())
        .collect()
}

// ---------------------------------------------------------------------------
// Checks

fn chi2_floor(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "chi2_floor";
    let (lo, hi) = ratio_range_masses(&inst.p, &inst.q);
    let chi2 = chi_square_masses(&inst.p, &inst.q);
    let cases = STRONG
        .iter()
        .map(|g| match kappa_range(g, lo, hi) {
            Ok(k) => graded(ID, inst, g.name(), Relation::Ge, divergence(g, &inst.p, &inst.q), scale_extended(k / 2.0, chi2), ctx.tolerance),
            Err(e) => failed(ID, inst, g.name(), e),
        })
        .collect();
    worst(ID, inst, cases)
}

/// `(dominating f, c, dominated g)` with `c·f̃ ≥ g̃` pointwise.
const DOMINANCE: [(&str, f64, &str); 5] = [
    ("pearson_chi2", 1.0, "kl"),
    ("total_variation", 2.0, "squared_hellinger"),
    ("pearson_chi2", 1.0, "vincze_le_cam"),
    ("total_variation", 2.0, "vincze_le_cam"),
    ("kl", 1.0, "squared_hellinger"),
];

fn functional_dominance(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "functional_dominance";
    let cases = DOMINANCE
        .iter()
        .map(|&(f, c, g)| {
            let (f, g) = (parse_generator(f).expect("f"), parse_generator(g).expect("g"));
            let case = format!("{}<={c}*{}", g.name(), f.name());
            let lhs = scale_extended(c, divergence(&f, &inst.p, &inst.q));
            graded(ID, inst, &case, Relation::Ge, lhs, divergence(&g, &inst.p, &inst.q), ctx.tolerance)
        })
        .collect();
    worst(ID, inst, cases)
}

fn chi2_floor_sharpness(inst: &Instance, _ctx: &Context) -> CheckReport {
    const ID: &str = "chi2_floor_sharpness";
    let q = &inst.q_full;
    let mean: f64 = q.iter().zip(&inst.direction).map(|(a, u)| a * u).sum();
    let spread = inst.direction.iter().map(|u| (u - mean).abs()).fold(0.0, f64::max);
    if spread == 0.0 {
        return CheckReport::skipped(ID, inst.descriptor(""), "no perturbation direction");
    }
    // p/q = 1 + ε(u − ū)/max|u − ū| stays within [1 − ε, 1 + ε].
    let p: Vec<f64> = q
        .iter()
        .zip(&inst.direction)
        .map(|(a, u)| a + SHARPNESS_EPSILON * a * (u - mean) / spread)
        .collect();
    let chi2 = chi_square_masses(&p, q);
    let cases = STRONG
        .iter()
        .map(|g| {
            let target = g.second_derivative(1.0).unwrap_or(f64::NAN) / 2.0;
            let ratio = divergence(g, &p, q) / chi2;
            CheckReport::evaluate(ID, inst.descriptor(g.name()), Relation::Eq, ratio, target, SHARPNESS_TOLERANCE * target)
        })
        .collect();
    worst(ID, inst, cases)
}

fn mixture_convexity_gap(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "mixture_convexity_gap";
    let (comps, refs, mu) = (&inst.hypotheses, &inst.references, &inst.prior);
    let k = inst.support_size;
    let pbar = barycenter(inst);
    let qbar: Vec<f64> = (0..k).map(|x| mu.iter().zip(refs).map(|(l, q)| l * q[x]).sum()).collect();
    let shared = &inst.q_full;

    let mut cases = Vec::new();
    for g in STRONG.iter() {
        // Component-wise references.
        let (lo, hi) = comps
            .iter()
            .zip(refs)
            .map(|(p, q)| ratio_range_masses(p, q))
            .fold((f64::INFINITY, 0.0f64), |(a, b), (l, h)| (a.min(l), b.max(h)));
        let kappa = match kappa_range(g, lo, hi) {
            Ok(k) => k,
            Err(e) => {
                cases.push(failed(ID, inst, g.name(), e));
                continue;
            }
        };
        let avg: f64 = mu.iter().zip(comps).zip(refs).map(|((l, p), q)| l * divergence(g, p, q)).sum();
        let mut own = 0.0;
        let mut common = 0.0;
        for ((l, p), q) in mu.iter().zip(comps).zip(refs) {
            for x in 0..k {
                let dev = p[x] / q[x] - pbar[x] / qbar[x];
                own += l * q[x] * dev * dev;
                common += l * qbar[x] * dev * dev;
            }
        }
        let lhs = divergence(g, &pbar, &qbar);
        let rhs = avg - kappa / 2.0 * own;
        let mut r = graded(ID, inst, g.name(), Relation::Le, lhs, rhs, ctx.tolerance);
        r.monitors.push(Monitor::new("mixture_weighted_by_q", g.name(), Relation::Le, lhs, avg - kappa / 2.0 * common, r.tolerance));
        cases.push(r);

        // Shared reference.
        let (lo, hi) = comps
            .iter()
            .map(|p| ratio_range_masses(p, shared))
            .fold((f64::INFINITY, 0.0f64), |(a, b), (l, h)| (a.min(l), b.max(h)));
        let kappa = match kappa_range(g, lo, hi) {
            Ok(k) => k,
            Err(e) => {
                cases.push(failed(ID, inst, g.name(), e));
                continue;
            }
        };
        let avg: f64 = mu.iter().zip(comps).map(|(l, p)| l * divergence(g, p, shared)).sum();
        let quad: f64 = mu
            .iter()
            .zip(comps)
            .map(|(l, p)| l * (0..k).map(|x| (p[x] - pbar[x]).powi(2) / shared[x]).sum::<f64>())
            .sum();
        let tv2: f64 = mu
            .iter()
            .zip(comps)
            .map(|(l, p)| l * total_variation_masses(p, &pbar).powi(2))
            .sum();
        let lhs = divergence(g, &pbar, shared);
        let case = format!("shared:{}", g.name());
        cases.push(graded(ID, inst, &case, Relation::Le, lhs, avg - kappa / 2.0 * quad, ctx.tolerance));
        let case = format!("shared_tv:{}", g.name());
        let mut r = graded(ID, inst, &case, Relation::Le, lhs, avg - kappa * tv2, ctx.tolerance);
        r.monitors.push(Monitor::new("doubled_tv_constant", &case, Relation::Le, lhs, avg - 2.0 * kappa * tv2, r.tolerance));
        cases.push(r);
    }
    worst(ID, inst, cases)
}

fn barycenter_tv_floor(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "barycenter_tv_floor";
    let pbar = barycenter(inst);
    let (lo, hi) = inst
        .hypotheses
        .iter()
        .map(|p| ratio_range_masses(p, &pbar))
        .fold((f64::INFINITY, 0.0f64), |(a, b), (l, h)| (a.min(l), b.max(h)));
    let tv2: f64 = inst
        .prior
        .iter()
        .zip(&inst.hypotheses)
        .map(|(l, p)| l * total_variation_masses(p, &pbar).powi(2))
        .sum();
    let cases = STRONG
        .iter()
        .map(|g| {
            let kappa = match kappa_range(g, lo, hi) {
                Ok(k) => k,
                Err(e) => return failed(ID, inst, g.name(), e),
            };
            let rhs: f64 = inst.prior.iter().zip(&inst.hypotheses).map(|(l, p)| l * divergence(g, p, &pbar)).sum();
            let mut r = graded(ID, inst, g.name(), Relation::Le, kappa * tv2, rhs, ctx.tolerance);
            r.monitors.push(Monitor::new("doubled_constant", g.name(), Relation::Le, 2.0 * kappa * tv2, rhs, r.tolerance));
            r
        })
        .collect();
    worst(ID, inst, cases)
}

fn no_reverse_pinsker(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "no_reverse_pinsker";
    const STRETCH: [f64; 3] = [10.0, 100.0, 1000.0];
    let a = inst.p[0].clamp(0.05, 0.95);
    let mut cases = Vec::new();
    for g in SUPERLINEAR.iter() {
        let Some(gn) = g.normalized() else {
            cases.push(failed(ID, inst, g.name(), Error::Input("no slope at 1".into())));
            continue;
        };
        // P = (a, 1 − a), Q = (a/t, 1 − a/t): D/TV ≥ f̃(t)/t.
        let threshold = |t: f64| gn.eval(t) / t;
        for t in STRETCH {
            let d = binary_divergence(g, a, a / t);
            let ratio = d / (a - a / t);
            let case = format!("{}@t={t}", g.name());
            cases.push(graded(ID, inst, &case, Relation::Ge, ratio, threshold(t), ctx.tolerance));
        }
        let case = format!("{}:growth", g.name());
        cases.push(CheckReport::evaluate(
            ID,
            inst.descriptor(case),
            Relation::Ge,
            threshold(STRETCH[2]),
            threshold(STRETCH[0]) + 1.0,
            0.0,
        ));
    }
    worst(ID, inst, cases)
}

fn vincze_le_cam_floor(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "vincze_le_cam_floor";
    let vlc = divergence(&VINCZE, &inst.p, &inst.q);
    let cases = STRONG
        .iter()
        .map(|g| match kappa_on(g, Interval::open(0.0, 2.0)) {
            Ok(cert) => {
                let delta = divergence(&skew_symmetrization(g), &inst.p, &inst.q);
                graded(ID, inst, g.name(), Relation::Ge, delta, cert.kappa / 4.0 * vlc, ctx.tolerance)
            }
            Err(e) => failed(ID, inst, g.name(), e),
        })
        .collect();
    worst(ID, inst, cases)
}

fn skew_kl_tv_bound(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "skew_kl_tv_bound";
    let tv = total_variation_masses(&inst.p, &inst.q);
    let (a, b) = inst.skew;
    let cases = [(a, b), (b, a), (0.0, b), (1.0, b)]
        .into_iter()
        .map(|(alpha, beta)| {
            let lhs = skew_divergence_masses(&KL, &inst.p, &inst.q, alpha, beta);
            let cap = scale_extended(skew_tv_constant(alpha, beta), d_infinity_binary(alpha, beta));
            let case = format!("alpha={alpha},beta={beta}");
            graded(ID, inst, &case, Relation::Le, lhs, scale_extended(tv, cap), ctx.tolerance)
        })
        .collect();
    worst(ID, inst, cases)
}

fn jsd_tv_bound(inst: &Instance, ctx: &Context) -> CheckReport {
    let lhs = jsd_masses(&inst.p, &inst.q);
    let rhs = std::f64::consts::LN_2 * total_variation_masses(&inst.p, &inst.q);
    graded("jsd_tv_bound", inst, "jsd", Relation::Le, lhs, rhs, ctx.tolerance)
}

fn generalized_js_tv_bounds(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "generalized_js_tv_bounds";
    let s = &inst.scheme;
    let tv = total_variation_masses(&inst.p, &inst.q);
    let js = generalized_js_masses(&inst.p, &inst.q, s);
    let lower = graded(ID, inst, "lower", Relation::Ge, js, variance_of_alphas(s) * tv * tv, ctx.tolerance);
    let upper = graded(ID, inst, "upper", Relation::Le, js, a_coefficient(s) * entropy_of_weights(s) * tv, ctx.tolerance);
    worst(ID, inst, vec![lower, upper])
}

fn generalized_chi2_js_bound(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "generalized_chi2_js_bound";
    let s = &inst.scheme;
    let n_inf = match n_infinity(s) {
        Ok(n) => n,
        Err(e) => return CheckReport::skipped(ID, inst.descriptor(""), e.to_string()),
    };
    let chi = generalized_chi2_masses(&inst.p, &inst.q, s);
    let js = generalized_js_masses(&inst.p, &inst.q, s);
    let mut r = graded(ID, inst, "2n_inf", Relation::Le, chi, 2.0 * n_inf * js, ctx.tolerance);
    r.monitors.push(Monitor::new("single_n_inf", "n_inf", Relation::Le, chi, n_inf * js, r.tolerance));
    r
}

fn bayes_sharpened_fano(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "bayes_sharpened_fano";
    let prob = match problem(inst) {
        Ok(p) => p,
        Err(e) => return failed(ID, inst, "", e),
    };
    let mut cases = Vec::new();
    for (label, q) in [("q", inst.q.clone()), ("q_full", inst.q_full.clone()), ("barycenter", prob.barycenter())] {
        for g in BAYES.iter() {
            let case = format!("{label}:{}", g.name());
            cases.push(match guntuboyina_bound(&prob, &q, g) {
                Ok(b) => graded(ID, inst, &case, Relation::Ge, b.lhs, b.rhs, ctx.tolerance).degenerate_if(b.degenerate),
                Err(e) => failed(ID, inst, &case, e),
            });
        }
    }
    worst(ID, inst, cases)
}

fn bayes_uniform_two_point(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "bayes_uniform_two_point";
    let prob = match pair_problem(inst) {
        Ok(p) => p,
        Err(e) => return failed(ID, inst, "", e),
    };
    let mut cases = Vec::new();
    for (label, q) in [("q_full", inst.q_full.clone()), ("barycenter", prob.barycenter())] {
        for g in BAYES.iter() {
            let case = format!("{label}:{}", g.name());
            cases.push(match balanced_pair_bound(&prob, &q, g) {
                Ok(b) => {
                    let mut r = graded(ID, inst, &case, Relation::Ge, b.lhs, b.quarter_kappa_rhs, ctx.tolerance);
                    r.monitors.push(Monitor::new("half_kappa_coefficient", &case, Relation::Ge, b.lhs, b.half_kappa_rhs, r.tolerance));
                    r
                }
                Err(e) => failed(ID, inst, &case, e),
            });
        }
    }
    worst(ID, inst, cases)
}

fn relative_entropy_bayes_bound(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "relative_entropy_bayes_bound";
    let prob = match problem(inst) {
        Ok(p) => p,
        Err(e) => return failed(ID, inst, "", e),
    };
    let mut cases = Vec::new();
    for (label, q) in [("q", &inst.q), ("q_full", &inst.q_full)] {
        match relative_entropy_bound(&prob, q) {
            Ok(b) => {
                cases.push(graded(ID, inst, &format!("{label}:reference"), Relation::Ge, b.lhs, b.reference_rhs, ctx.tolerance));
                cases.push(graded(ID, inst, &format!("{label}:barycenter"), Relation::Ge, b.lhs, b.barycenter_rhs, ctx.tolerance));
            }
            Err(e) => cases.push(failed(ID, inst, label, e)),
        }
    }
    worst(ID, inst, cases)
}

fn jsd_risk_lower_bound(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "jsd_risk_lower_bound";
    let b = match jsd_risk_bound(&inst.hypotheses[0], &inst.hypotheses[1]) {
        Ok(b) => b,
        Err(e) => return failed(ID, inst, "", e),
    };
    let mut cases = vec![
        graded(ID, inst, "quarter", Relation::Ge, b.jsd, b.quarter_rhs, ctx.tolerance),
        graded(ID, inst, "quadratic", Relation::Ge, b.jsd, b.quadratic_rhs, ctx.tolerance),
    ];
    // 2·D((1+V)/2 ‖ ½) ≥ V² at the instance's V and along a grid.
    for v in std::iter::once(b.tv).chain((0..100).map(|j| j as f64 / 100.0)) {
        cases.push(graded(ID, inst, &format!("binary@{v}"), Relation::Ge, 2.0 * binary_kl_half(v), v * v, ctx.tolerance));
    }
    worst(ID, inst, cases)
}

fn pinsker_series_sharpening(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "pinsker_series_sharpening";
    let s = match pinsker_series(&inst.p, &inst.q_full, SERIES_TERMS) {
        Ok(s) => s,
        Err(e) => return CheckReport::skipped(ID, inst.descriptor(""), e.to_string()),
    };
    let mut r = graded(ID, inst, "weighted_series", Relation::Ge, s.kl, s.weighted_bound(), ctx.tolerance);
    r.monitors.push(Monitor::new("unweighted_series", "unweighted", Relation::Ge, s.kl, s.unweighted_bound(), r.tolerance));
    r.monitors.push(Monitor::new("improves_pinsker", "weighted", Relation::Ge, s.weighted_bound(), s.pinsker(), 0.0));
    r
}

fn kappa_jensen_gap(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "kappa_jensen_gap";
    // X takes the values p/q_full with probabilities from an independent draw.
    let xs: Vec<f64> = inst.p.iter().zip(&inst.q_full).map(|(p, q)| p / q).collect();
    let w = &inst.references[0];
    let mean: f64 = w.iter().zip(&xs).map(|(a, x)| a * x).sum();
    let var: f64 = w.iter().zip(&xs).map(|(a, x)| a * (x - mean).powi(2)).sum();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(0.0, f64::max);
    let cases = STRONG
        .iter()
        .map(|g| {
            let kappa = match kappa_range(g, lo, hi) {
                Ok(k) => k,
                Err(e) => return failed(ID, inst, g.name(), e),
            };
            let ef: f64 = w.iter().zip(&xs).map(|(a, &x)| scale_extended(*a, g.eval(x))).sum();
            graded(ID, inst, g.name(), Relation::Ge, ef - g.eval(mean), kappa / 2.0 * var, ctx.tolerance)
        })
        .collect();
    worst(ID, inst, cases)
}

fn skew_kl_log_bound(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "skew_kl_log_bound";
    let tv = total_variation_masses(&inst.p, &inst.q);
    let t = inst.skew.0;
    let lhs = skew_divergence_masses(&KL, &inst.p, &inst.q, 0.0, 1.0 - t);
    let mut r = graded(ID, inst, &format!("t={t}"), Relation::Le, lhs, scale_extended(tv, -t.ln()), ctx.tolerance);
    let literal = skew_divergence_masses(&KL, &inst.p, &inst.q, 0.0, t);
    r.monitors.push(Monitor::new("weight_on_q_reading", "S(0,t)", Relation::Le, literal, scale_extended(tv, -t.ln()), r.tolerance));
    r
}

fn tv_ratio_cap(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "tv_ratio_cap";
    static BOUNDED: LazyLock<Vec<ConvexGenerator>> = LazyLock::new(|| {
        let mut v = panel(&[
            "total_variation",
            "squared_hellinger",
            "vincze_le_cam",
            "jensen_shannon",
            "alpha_divergence:0.5",
            "alpha_divergence:0",
        ]);
        v.push(skew_symmetrization(&KL));
        v.push(skew_symmetrization(&PEARSON));
        v
    });
    let tv = total_variation_masses(&inst.p, &inst.q);
    let cases = BOUNDED
        .iter()
        .map(|g| {
            let cap = g.f_at_zero() + g.f_star_at_zero();
            graded(ID, inst, g.name(), Relation::Le, divergence(g, &inst.p, &inst.q), cap * tv, ctx.tolerance)
        })
        .collect();
    worst(ID, inst, cases)
}

fn data_processing(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "data_processing";
    let coarse = |v: &[f64]| -> Vec<f64> {
        inst.partition
            .iter()
            .map(|g| g.iter().map(|&i| v[i]).sum())
            .collect()
    };
    let (cp, cq) = (coarse(&inst.p), coarse(&inst.q));
    let cases = ALL
        .iter()
        .map(|g| {
            graded(ID, inst, g.name(), Relation::Le, divergence(g, &cp, &cq), divergence(g, &inst.p, &inst.q), ctx.tolerance)
        })
        .collect();
    worst(ID, inst, cases)
}

fn duality_swap(inst: &Instance, _ctx: &Context) -> CheckReport {
    const ID: &str = "duality_swap";
    let cases = ALL
        .iter()
        .map(|g| {
            let lhs = divergence(&dual(g), &inst.p, &inst.q);
            let rhs = divergence(g, &inst.q, &inst.p);
            graded(ID, inst, g.name(), Relation::Eq, lhs, rhs, IDENTITY_TOLERANCE)
        })
        .collect();
    worst(ID, inst, cases)
}

fn affine_shift_invariance(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "affine_shift_invariance";
    let mut cases = Vec::new();
    for g in ALL.iter() {
        let base = divergence(g, &inst.p, &inst.q);
        for c in [-3.0, 1.0, 7.0] {
            let shifted = divergence(&affine_shift(g, c), &inst.p, &inst.q);
            let case = format!("{}+{c}(t-1)", g.name());
            cases.push(graded(ID, inst, &case, Relation::Eq, shifted, base, ctx.tolerance * (1.0 + c.abs())));
        }
    }
    worst(ID, inst, cases)
}

fn skew_generator_equivalence(inst: &Instance, _ctx: &Context) -> CheckReport {
    const ID: &str = "skew_generator_equivalence";
    let (a, b) = inst.skew;
    let mut cases = Vec::new();
    for g in ALL.iter() {
        for (t, s) in [(a, b), (b, a)] {
            let direct = skew_divergence_masses(g, &inst.p, &inst.q, t, s);
            let params = GeneratorSkewParams::from_skew(t, s).expect("skews lie in [0, 1]");
            let via = divergence(&skew_generator(g, params), &inst.p, &inst.q);
            let case = format!("{}@({t},{s})", g.name());
            cases.push(graded(ID, inst, &case, Relation::Eq, via, direct, IDENTITY_TOLERANCE));
        }
    }
    worst(ID, inst, cases)
}

fn skew_symmetrization_vincze(inst: &Instance, _ctx: &Context) -> CheckReport {
    const ID: &str = "skew_symmetrization_vincze";
    let (p, q) = (&inst.p, &inst.q);
    let mut cases = vec![
        graded(ID, inst, "chi2_half", Relation::Eq, divergence(&skew_symmetrization(&PEARSON), p, q), divergence(&VINCZE, p, q) / 2.0, IDENTITY_TOLERANCE),
        graded(ID, inst, "kl_jsd", Relation::Eq, divergence(&skew_symmetrization(&KL), p, q), jsd_masses(p, q), IDENTITY_TOLERANCE),
    ];
    for g in ALL.iter() {
        let sym = skew_symmetrization(g);
        cases.push(graded(ID, inst, &format!("symmetry:{}", g.name()), Relation::Eq, divergence(&sym, p, q), divergence(&sym, q, p), IDENTITY_TOLERANCE));
    }
    worst(ID, inst, cases)
}

fn bayes_risk_tv_identity(inst: &Instance, _ctx: &Context) -> CheckReport {
    const ID: &str = "bayes_risk_tv_identity";
    match pair_problem(inst) {
        Ok(prob) => {
            let r = bayes_estimator(&prob).risk;
            let tv = total_variation_masses(&inst.hypotheses[0], &inst.hypotheses[1]);
            graded(ID, inst, "2R=1-TV", Relation::Eq, 2.0 * r, 1.0 - tv, IDENTITY_TOLERANCE)
        }
        Err(e) => failed(ID, inst, "", e),
    }
}

fn convex_reconstruction(inst: &Instance, _ctx: &Context) -> CheckReport {
    const ID: &str = "convex_reconstruction";
    let prob = match problem(inst) {
        Ok(p) => p,
        Err(e) => return failed(ID, inst, "", e),
    };
    let d = match decompose(&prob, &inst.q) {
        Ok(d) => d,
        Err(e) => return failed(ID, inst, "", e),
    };
    let zeros = vec![0.0; inst.support_size];
    let part = |c: &Option<Vec<f64>>| c.clone().unwrap_or_else(|| zeros.clone());
    let q_rebuilt = mixture(&part(&d.q1), &part(&d.q2), d.q_mass);
    let p_rebuilt = mixture(&part(&d.rho1), &part(&d.rho2), d.risk);
    let err = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let worst_err = err(&q_rebuilt, &inst.q).max(err(&p_rebuilt, &d.barycenter));
    CheckReport::evaluate(ID, inst.descriptor("atomwise"), Relation::Le, worst_err, 0.0, IDENTITY_TOLERANCE).degenerate_if(d.degenerate())
}

fn bayes_risk_enumeration(inst: &Instance, _ctx: &Context) -> CheckReport {
    const ID: &str = "bayes_risk_enumeration";
    let (max_k, max_n) = ENUMERATION_LIMIT;
    if inst.support_size > max_k || inst.hypotheses.len() > max_n {
        return CheckReport::skipped(ID, inst.descriptor(""), "instance too large to enumerate");
    }
    match problem(inst) {
        Ok(prob) => graded(ID, inst, "risk", Relation::Eq, bayes_estimator(&prob).risk, enumerated_risk(&prob), IDENTITY_TOLERANCE),
        Err(e) => failed(ID, inst, "", e),
    }
}

fn compensation_identity(inst: &Instance, ctx: &Context) -> CheckReport {
    const ID: &str = "compensation_identity";
    let prob = match problem(inst) {
        Ok(p) => p,
        Err(e) => return failed(ID, inst, "", e),
    };
    match compensation_identity_check(&prob, &inst.q_full) {
        Ok(Some((l, r))) => graded(ID, inst, "q_full", Relation::Eq, l, r, ctx.tolerance),
        Ok(None) => CheckReport::skipped(ID, inst.descriptor(""), "infinite relative entropy"),
        Err(e) => failed(ID, inst, "", e),
    }
}
