//! Bayes risk under 0-1 loss and the convex decompositions induced by the
//! Bayes estimator `T(x) = argmax_i λ_i p_i(x)`.
//!
//! For a reference `q` the estimator splits
//!
//! ```text
//! q = (1 − Q)·q₁ + Q·q₂,   q₁ = λ_T q/(1 − Q),   q₂ = (1 − λ_T) q/Q
//! p = (1 − R)·ρ₁ + R·ρ₂,   ρ₁ = λ_T p_T/(1 − R), ρ₂ = (p − λ_T p_T)/R
//! ```
//!
//! where `p = Σ λ_i p_i`, `R` is the Bayes risk and `Q = 1 − Σ λ_T q`.

use serde::{Deserialize, Serialize};

use crate::distribution::{align_many, DiscreteDistribution, MASS_TOLERANCE};
use crate::divergence::{
    binary_divergence, chi_square_masses, divergence, jsd_midpoint_form, kl_masses, ratio_range_masses,
    total_variation_masses,
};
use crate::error::{Error, Result};
use crate::generator::{kappa_on_ratio_range, make_builtin, scale_extended, ConvexGenerator};

/// Masses at or below this are treated as vanishing decomposition components.
pub const DEGENERATE_MASS: f64 = 1e-15;

/// Hypotheses `p_1 … p_n` on a common support with prior `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesProblem {
    support: Vec<String>,
    hypotheses: Vec<Vec<f64>>,
    prior: Vec<f64>,
}

impl BayesProblem {
    /// Aligns the hypotheses on the union of their supports.
    pub fn new(hypotheses: &[DiscreteDistribution], prior: Vec<f64>) -> Result<Self> {
        let refs: Vec<&DiscreteDistribution> = hypotheses.iter().collect();
        let family = align_many(&refs);
        Self::with_support(family.support, family.masses, prior)
    }

    /// Hypotheses given as mass vectors over a shared, unlabelled support.
    pub fn from_masses(hypotheses: Vec<Vec<f64>>, prior: Vec<f64>) -> Result<Self> {
        let k = hypotheses.first().map_or(0, Vec::len);
        Self::with_support((0..k).map(|i| i.to_string()).collect(), hypotheses, prior)
    }

    fn with_support(support: Vec<String>, hypotheses: Vec<Vec<f64>>, prior: Vec<f64>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::InvalidProblem("field `hypotheses` is empty".into()));
        }
        if prior.len() != hypotheses.len() {
            return Err(Error::InvalidProblem(format!(
                "field `prior` has {} entries for {} hypotheses",
                prior.len(),
                hypotheses.len()
            )));
        }
        for (i, h) in hypotheses.iter().enumerate() {
            if h.len() != support.len() {
                return Err(Error::InvalidProblem(format!(
                    "hypothesis {i} has {} atoms, expected {}",
                    h.len(),
                    support.len()
                )));
            }
            let total: f64 = h.iter().sum();
            if h.iter().any(|m| !m.is_finite() || *m < 0.0) || (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidProblem(format!(
                    "hypothesis {i} is not a probability vector"
                )));
            }
        }
        if let Some(l) = prior.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidProblem(format!(
                "field `prior` has entry {l}; entries must be strictly positive"
            )));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidProblem(format!("field `prior` sums to {total}, not 1")));
        }
        let prior = if total == 1.0 {
            prior
        } else {
            prior.into_iter().map(|l| l / total).collect()
        };
        Ok(Self {
            support,
            hypotheses,
            prior,
        })
    }

    pub fn uniform(hypotheses: Vec<Vec<f64>>) -> Result<Self> {
        let n = hypotheses.len().max(1);
        Self::from_masses(hypotheses, vec![1.0 / n as f64; n])
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn hypotheses(&self) -> &[Vec<f64>] {
        &self.hypotheses
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn n(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    /// `p = Σ λ_i p_i`.
    pub fn barycenter(&self) -> Vec<f64> {
        (0..self.support_len())
            .map(|x| {
                self.prior
                    .iter()
                    .zip(&self.hypotheses)
                    .map(|(l, p)| l * p[x])
                    .sum()
            })
            .collect()
    }

    fn check_reference(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.support_len() {
            return Err(Error::InvalidProblem(format!(
                "reference has {} atoms, expected {}",
                q.len(),
                self.support_len()
            )));
        }
        Ok(())
    }
}

/// The on-disk form: `{"hypotheses": [...], "prior": [...], "q": {...}}`.
/// A missing prior is uniform; a missing `q` means the barycenter.
#[derive(Debug, Clone, Deserialize)]
pub struct ProblemFile {
    pub hypotheses: Vec<DiscreteDistribution>,
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    #[serde(default)]
    pub q: Option<DiscreteDistribution>,
}

impl ProblemFile {
    /// The problem and the reference aligned to it.
    pub fn into_parts(self) -> Result<(BayesProblem, Vec<f64>)> {
        let n = self.hypotheses.len();
        let prior = self.prior.unwrap_or_else(|| vec![1.0 / n.max(1) as f64; n]);
        let mut refs: Vec<&DiscreteDistribution> = self.hypotheses.iter().collect();
        if let Some(q) = &self.q {
            refs.push(q);
        }
        let mut family = align_many(&refs);
        let q = self.q.as_ref().map(|_| family.masses.pop().unwrap_or_default());
        let prob = BayesProblem::with_support(family.support, family.masses, prior)?;
        let q = q.unwrap_or_else(|| prob.barycenter());
        Ok((prob, q))
    }
}

/// The Bayes decision per atom and its risk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesEstimator {
    /// Hypothesis index chosen at each atom.
    pub decision: Vec<usize>,
    pub risk: f64,
}

/// `T(x) = argmax_i λ_i p_i(x)` (ties to the smallest index) and
/// `R = 1 − Σ_x λ_T p_T(x)`.
pub fn bayes_estimator(prob: &BayesProblem) -> BayesEstimator {
    let decision: Vec<usize> = (0..prob.support_len())
        .map(|x| {
            let mut best = 0;
            for i in 1..prob.n() {
                if prob.prior[i] * prob.hypotheses[i][x] > prob.prior[best] * prob.hypotheses[best][x] {
                    best = i;
                }
            }
            best
        })
        .collect();
    // Summing the off-decision mass keeps R exact when it is 0.
    let risk = decision
        .iter()
        .enumerate()
        .map(|(x, &t)| {
            (0..prob.n())
                .filter(|&i| i != t)
                .map(|i| prob.prior[i] * prob.hypotheses[i][x])
                .sum::<f64>()
        })
        .sum::<f64>()
        .clamp(0.0, 1.0);
    BayesEstimator { decision, risk }
}

/// Minimal misclassification probability over all `n^k` deterministic
/// estimators. Exponential; meant for small instances.
pub fn enumerated_risk(prob: &BayesProblem) -> f64 {
    let (n, k) = (prob.n(), prob.support_len());
    let total = n.pow(k as u32);
    let mut best = f64::INFINITY;
    for code in 0..total {
        let mut c = code;
        let mut correct = 0.0;
        for x in 0..k {
            let i = c % n;
            c /= n;
            correct += prob.prior[i] * prob.hypotheses[i][x];
        }
        best = best.min(1.0 - correct);
    }
    best
}

/// Both convex decompositions induced by the Bayes estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub decision: Vec<usize>,
    pub risk: f64,
    /// `Q = 1 − Σ λ_T q`.
    pub q_mass: f64,
    pub q1: Option<Vec<f64>>,
    pub q2: Option<Vec<f64>>,
    pub barycenter: Vec<f64>,
    pub rho1: Option<Vec<f64>>,
    pub rho2: Option<Vec<f64>>,
}

impl Decomposition {
    /// Describes the vanishing components, if any.
    pub fn degenerate(&self) -> Option<String> {
        let missing: Vec<&str> = [
            ("q1", &self.q1),
            ("q2", &self.q2),
            ("rho1", &self.rho1),
            ("rho2", &self.rho2),
        ]
        .iter()
        .filter(|(_, c)| c.is_none())
        .map(|(n, _)| *n)
        .collect();
        (!missing.is_empty()).then(|| format!("vanishing components: {}", missing.join(", ")))
    }
}

pub fn decompose(prob: &BayesProblem, q: &[f64]) -> Result<Decomposition> {
    prob.check_reference(q)?;
    let BayesEstimator { decision, risk } = bayes_estimator(prob);
    let k = prob.support_len();
    let lambda_t: Vec<f64> = decision.iter().map(|&t| prob.prior[t]).collect();

    let q_hit: Vec<f64> = (0..k).map(|x| lambda_t[x] * q[x]).collect();
    let q_miss: Vec<f64> = (0..k).map(|x| (1.0 - lambda_t[x]) * q[x]).collect();
    let q_mass: f64 = q_miss.iter().sum::<f64>().clamp(0.0, 1.0);
    let q_hit_mass: f64 = q_hit.iter().sum();

    let p_hit: Vec<f64> = (0..k)
        .map(|x| lambda_t[x] * prob.hypotheses[decision[x]][x])
        .collect();
    let p_miss: Vec<f64> = (0..k)
        .map(|x| {
            (0..prob.n())
                .filter(|&i| i != decision[x])
                .map(|i| prob.prior[i] * prob.hypotheses[i][x])
                .sum()
        })
        .collect();
    let p_hit_mass: f64 = p_hit.iter().sum();

    Ok(Decomposition {
        q1: normalized(q_hit, q_hit_mass),
        q2: normalized(q_miss, q_mass),
        rho1: normalized(p_hit, p_hit_mass),
        rho2: normalized(p_miss, risk),
        decision,
        risk,
        q_mass,
        barycenter: prob.barycenter(),
    })
}

fn normalized(v: Vec<f64>, mass: f64) -> Option<Vec<f64>> {
    (mass > DEGENERATE_MASS).then(|| v.into_iter().map(|x| x / mass).collect())
}

/// The curvature terms of the sharpened bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WTerms {
    #[serde(with = "crate::report::extended")]
    pub w0: f64,
    #[serde(with = "crate::report::extended")]
    pub w1: f64,
    #[serde(with = "crate::report::extended")]
    pub w2: f64,
    #[serde(with = "crate::report::extended")]
    pub w_total: f64,
}

/// `W₁ = (1−R)²/(1−Q)·χ²(ρ₁‖q₁)`, `W₂ = R²/Q·χ²(ρ₂‖q₂)` and
/// `W₀ = Σ_x Σ_{i≠T} λ_i (p_i − m)²/q` with `m` the λ-weighted mean of the
/// non-chosen hypotheses. Vanishing components contribute 0.
pub fn w_terms(prob: &BayesProblem, q: &[f64]) -> Result<WTerms> {
    let d = decompose(prob, q)?;
    w_terms_from(prob, q, &d)
}

pub fn w_terms_from(prob: &BayesProblem, q: &[f64], d: &Decomposition) -> Result<WTerms> {
    let r = d.risk;
    let w1 = match (&d.rho1, &d.q1) {
        (Some(rho), Some(q1)) => scale_extended((1.0 - r) * (1.0 - r) / (1.0 - d.q_mass), chi_square_masses(rho, q1)),
        (Some(_), None) => f64::INFINITY,
        _ => 0.0,
    };
    let w2 = match (&d.rho2, &d.q2) {
        (Some(rho), Some(q2)) => scale_extended(r * r / d.q_mass, chi_square_masses(rho, q2)),
        (Some(_), None) => f64::INFINITY,
        _ => 0.0,
    };
    let w0 = if prob.n() <= 2 {
        0.0
    } else {
        let mut sum = 0.0;
        for x in 0..prob.support_len() {
            let t = d.decision[x];
            let rest = 1.0 - prob.prior[t];
            let m = (0..prob.n())
                .filter(|&i| i != t)
                .map(|i| prob.prior[i] * prob.hypotheses[i][x])
                .sum::<f64>()
                / rest;
            let spread: f64 = (0..prob.n())
                .filter(|&i| i != t)
                .map(|i| prob.prior[i] * (prob.hypotheses[i][x] - m).powi(2))
                .sum();
            if q[x] > 0.0 {
                sum += spread / q[x];
            } else if spread > 0.0 {
                sum = f64::INFINITY;
            }
        }
        sum
    };
    Ok(WTerms {
        w0,
        w1,
        w2,
        w_total: w0 + w1 + w2,
    })
}

/// Both sides of `Σ λ_i D_f(p_i‖q) ≥ D_f(R‖Q) + κW/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuntuboyinaBound {
    #[serde(with = "crate::report::extended")]
    pub lhs: f64,
    #[serde(with = "crate::report::extended")]
    pub binary_term: f64,
    pub kappa: f64,
    pub w: WTerms,
    #[serde(with = "crate::report::extended")]
    pub rhs: f64,
    pub degenerate: Option<String>,
}

impl GuntuboyinaBound {
    pub fn margin(&self) -> f64 {
        crate::report::Relation::Ge.margin(self.lhs, self.rhs)
    }
}

/// Evaluates the sharpened bound with κ certified on the range of all
/// likelihood ratios `p_i/q`.
pub fn guntuboyina_bound(prob: &BayesProblem, q: &[f64], g: &ConvexGenerator) -> Result<GuntuboyinaBound> {
    let d = decompose(prob, q)?;
    let w = w_terms_from(prob, q, &d)?;
    let (lo, hi) = joint_ratio_range(prob, q);
    let kappa = kappa_on_ratio_range(g, lo, hi)?.kappa;
    let lhs = weighted_divergence(prob, q, g);
    let binary_term = binary_divergence(g, d.risk, d.q_mass);
    let rhs = binary_term + scale_extended(kappa, w.w_total) / 2.0;
    Ok(GuntuboyinaBound {
        lhs,
        binary_term,
        kappa,
        w,
        rhs,
        degenerate: d.degenerate(),
    })
}

/// `Σ λ_i D_g(p_i‖q)`.
pub fn weighted_divergence(prob: &BayesProblem, q: &[f64], g: &ConvexGenerator) -> f64 {
    prob.prior
        .iter()
        .zip(&prob.hypotheses)
        .map(|(&l, p)| scale_extended(l, divergence(g, p, q)))
        .sum()
}

/// `(min, max)` of `p_i/q` over all hypotheses.
pub fn joint_ratio_range(prob: &BayesProblem, q: &[f64]) -> (f64, f64) {
    prob.hypotheses
        .iter()
        .map(|p| ratio_range_masses(p, q))
        .fold((f64::INFINITY, 0.0f64), |(a, b), (lo, hi)| (a.min(lo), b.max(hi)))
}

/// The two-hypothesis, uniform-prior specialization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancedPairBound {
    #[serde(with = "crate::report::extended")]
    pub lhs: f64,
    pub tv: f64,
    pub kappa: f64,
    #[serde(with = "crate::report::extended")]
    pub chi2_rho1: f64,
    #[serde(with = "crate::report::extended")]
    pub chi2_rho2: f64,
    /// `D_f((1−V)/2‖½) + (κ/2)((1+V)²χ²(ρ₁‖q) + (1−V)²χ²(ρ₂‖q))`.
    #[serde(with = "crate::report::extended")]
    pub half_kappa_rhs: f64,
    /// The same with the curvature term halved, which is what the general
    /// bound yields for `λ = (½, ½)`.
    #[serde(with = "crate::report::extended")]
    pub quarter_kappa_rhs: f64,
}

pub fn balanced_pair_bound(prob: &BayesProblem, q: &[f64], g: &ConvexGenerator) -> Result<BalancedPairBound> {
    if prob.n() != 2 || prob.prior[0] != prob.prior[1] {
        return Err(Error::InvalidProblem(
            "the balanced pair bound needs two hypotheses with a uniform prior".into(),
        ));
    }
    let d = decompose(prob, q)?;
    let v = total_variation_masses(&prob.hypotheses[0], &prob.hypotheses[1]);
    let (lo, hi) = joint_ratio_range(prob, q);
    let kappa = kappa_on_ratio_range(g, lo, hi)?.kappa;
    let chi = |rho: &Option<Vec<f64>>| rho.as_ref().map_or(0.0, |r| chi_square_masses(r, q));
    let (c1, c2) = (chi(&d.rho1), chi(&d.rho2));
    let curvature = scale_extended((1.0 + v).powi(2), c1) + scale_extended((1.0 - v).powi(2), c2);
    let binary = binary_divergence(g, (1.0 - v) / 2.0, 0.5);
    Ok(BalancedPairBound {
        lhs: weighted_divergence(prob, q, g),
        tv: v,
        kappa,
        chi2_rho1: c1,
        chi2_rho2: c2,
        half_kappa_rhs: binary + scale_extended(kappa / 2.0, curvature),
        quarter_kappa_rhs: binary + scale_extended(kappa / 4.0, curvature),
    })
}

/// Lower bounds on `JSD(p₁‖p₂)` from the midpoint decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JsdRiskBound {
    pub jsd: f64,
    pub tv: f64,
    pub chi2_rho1: f64,
    pub chi2_rho2: f64,
    /// `D((1+V)/2‖½) + ¼((1+V)²χ²(ρ₁‖p) + (1−V)²χ²(ρ₂‖p))`.
    pub quarter_rhs: f64,
    /// `V²/2 + ¼(…)`, using `2D((1+V)/2‖½) ≥ V²`.
    pub quadratic_rhs: f64,
    /// `D((1+V)/2‖½) + ⅛(…)`, the general bound at κ = ½.
    pub eighth_rhs: f64,
}

pub fn jsd_risk_bound(p1: &[f64], p2: &[f64]) -> Result<JsdRiskBound> {
    let prob = BayesProblem::uniform(vec![p1.to_vec(), p2.to_vec()])?;
    let p = prob.barycenter();
    let d = decompose(&prob, &p)?;
    let v = total_variation_masses(p1, p2);
    let chi = |rho: &Option<Vec<f64>>| rho.as_ref().map_or(0.0, |r| chi_square_masses(r, &p));
    let (c1, c2) = (chi(&d.rho1), chi(&d.rho2));
    let curvature = (1.0 + v).powi(2) * c1 + (1.0 - v).powi(2) * c2;
    let binary = binary_kl_half(v);
    Ok(JsdRiskBound {
        jsd: jsd_midpoint_form(p1.iter().zip(p2).map(|(&a, &b)| ((a + b) / 2.0, (a - b) / 2.0))),
        tv: v,
        chi2_rho1: c1,
        chi2_rho2: c2,
        quarter_rhs: binary + curvature / 4.0,
        quadratic_rhs: v * v / 2.0 + curvature / 4.0,
        eighth_rhs: binary + curvature / 8.0,
    })
}

/// `D((1+V)/2 ‖ ½) = ½[(1+V)ln(1+V) + (1−V)ln(1−V)]` in nats.
pub fn binary_kl_half(v: f64) -> f64 {
    0.5 * crate::divergence::symmetric_entropy_gap(v.clamp(-1.0, 1.0))
}

/// The relative-entropy specialization of the sharpened bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeEntropyBound {
    #[serde(with = "crate::report::extended")]
    pub lhs: f64,
    /// `1/max_i max_x p_i/q`.
    pub t_star: f64,
    /// `D(R‖Q) + t*·W(q)/2`.
    #[serde(with = "crate::report::extended")]
    pub reference_rhs: f64,
    /// `D(p‖q) + D(R‖P) + min λ·W(p)/2` with `P = 1 − Σ λ_T p`.
    #[serde(with = "crate::report::extended")]
    pub barycenter_rhs: f64,
}

pub fn relative_entropy_bound(prob: &BayesProblem, q: &[f64]) -> Result<RelativeEntropyBound> {
    let kl = make_builtin("kl", &[])?;
    let lhs = weighted_divergence(prob, q, &kl);
    let (_, hi) = joint_ratio_range(prob, q);
    let t_star = if hi > 0.0 { 1.0 / hi } else { 0.0 };
    let dq = decompose(prob, q)?;
    let wq = w_terms_from(prob, q, &dq)?;
    let reference_rhs = binary_divergence(&kl, dq.risk, dq.q_mass) + scale_extended(t_star, wq.w_total) / 2.0;

    let p = prob.barycenter();
    let dp = decompose(prob, &p)?;
    let wp = w_terms_from(prob, &p, &dp)?;
    let t_min = prob.prior.iter().copied().fold(f64::INFINITY, f64::min);
    let barycenter_rhs =
        kl_masses(&p, q) + binary_divergence(&kl, dp.risk, dp.q_mass) + t_min * wp.w_total / 2.0;
    Ok(RelativeEntropyBound {
        lhs,
        t_star,
        reference_rhs,
        barycenter_rhs,
    })
}

/// Both sides of `Σ λ_i D(p_i‖q) = D(p‖q) + Σ λ_i D(p_i‖p)`, or `None` when a
/// term is infinite.
pub fn compensation_identity_check(prob: &BayesProblem, q: &[f64]) -> Result<Option<(f64, f64)>> {
    prob.check_reference(q)?;
    let p = prob.barycenter();
    let lhs: f64 = prob
        .prior
        .iter()
        .zip(&prob.hypotheses)
        .map(|(l, pi)| l * kl_masses(pi, q))
        .sum();
    let spread: f64 = prob
        .prior
        .iter()
        .zip(&prob.hypotheses)
        .map(|(l, pi)| l * kl_masses(pi, &p))
        .sum();
    let rhs = kl_masses(&p, q) + spread;
    Ok((lhs.is_finite() && rhs.is_finite()).then_some((lhs, rhs)))
}

/// The JSD series for relative entropy and the χ² corrections to Pinsker.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinskerSeries {
    pub kl: f64,
    pub tv: f64,
    /// `2 Σ_{k ≤ K} 2^k JSD(M_k‖P₂)`.
    pub partial_sums: Vec<f64>,
    /// `2^k (χ²(𝓜₁(k)‖M_{k+1}) + χ²(𝓜₂(k)‖M_{k+1}))/2`.
    pub lower_bound_terms: Vec<f64>,
    /// As above with the χ² terms weighted by `(1 ± V_k)²`, `V_k = 2^{−k}V`.
    pub weighted_terms: Vec<f64>,
}

impl PinskerSeries {
    /// `2V²`.
    pub fn pinsker(&self) -> f64 {
        2.0 * self.tv * self.tv
    }

    /// `2V² + Σ lower_bound_terms`.
    pub fn unweighted_bound(&self) -> f64 {
        self.pinsker() + self.lower_bound_terms.iter().sum::<f64>()
    }

    /// `2V² + Σ weighted_terms`.
    pub fn weighted_bound(&self) -> f64 {
        self.pinsker() + self.weighted_terms.iter().sum::<f64>()
    }
}

/// Increment below which the series is considered converged.
pub const SERIES_TOLERANCE: f64 = 1e-12;

/// Expands `D(P₁‖P₂) = 2 Σ_k 2^k JSD(M_k‖P₂)`, `M_k = 2^{−k}P₁ + (1−2^{−k})P₂`.
///
/// Offsets `M_k − P₂ = 2^{−k}(P₁ − P₂)` are formed directly so that the
/// `2^k` weights do not amplify cancellation.
pub fn pinsker_series(p1: &[f64], p2: &[f64], max_terms: usize) -> Result<PinskerSeries> {
    if p1.len() != p2.len() {
        return Err(Error::InvalidDistribution(format!(
            "mass vectors have lengths {} and {}",
            p1.len(),
            p2.len()
        )));
    }
    if p1.iter().zip(p2).any(|(&a, &b)| a > 0.0 && b == 0.0) {
        return Err(Error::NotAbsolutelyContinuous);
    }
    let diff: Vec<f64> = p1.iter().zip(p2).map(|(a, b)| a - b).collect();
    let above: Vec<bool> = diff.iter().map(|&d| d > 0.0).collect();
    let tv: f64 = diff.iter().filter(|&&d| d > 0.0).sum();

    let mut partial_sums = Vec::new();
    let mut lower_bound_terms = Vec::new();
    let mut weighted_terms = Vec::new();
    let mut sum = 0.0;
    for k in 0..max_terms {
        let scale = 0.5f64.powi(k as i32);
        let vk = scale * tv;
        let weight = 2.0f64.powi(k as i32);
        let d: Vec<f64> = diff.iter().map(|x| scale * x).collect();

        // JSD(M_k‖P₂) with midpoint M_{k+1} = P₂ + d/2 and half-gap d/2.
        let js = jsd_midpoint_form(p2.iter().zip(&d).map(|(&b, &dx)| (b + dx / 2.0, dx / 2.0)));
        let increment = 2.0 * weight * js;
        sum += increment;
        partial_sums.push(sum);

        let (mut c1, mut c2) = (0.0, 0.0);
        for x in 0..p2.len() {
            let next = p2[x] + d[x] / 2.0;
            if next <= 0.0 {
                continue;
            }
            let (plus, minus) = if above[x] { (d[x], 0.0) } else { (0.0, d[x]) };
            let e1 = (plus - d[x] / 2.0 - vk * p2[x] - vk * d[x] / 2.0) / (1.0 + vk);
            c1 += e1 * e1 / next;
            if vk < 1.0 {
                let e2 = (minus - d[x] / 2.0 + vk * p2[x] + vk * d[x] / 2.0) / (1.0 - vk);
                c2 += e2 * e2 / next;
            }
        }
        lower_bound_terms.push(weight * (c1 + c2) / 2.0);
        weighted_terms.push(weight * ((1.0 + vk).powi(2) * c1 + (1.0 - vk).powi(2) * c2) / 2.0);

        if increment < SERIES_TOLERANCE {
            break;
        }
    }
    Ok(PinskerSeries {
        kl: kl_masses(p1, p2),
        tv,
        partial_sums,
        lower_bound_terms,
        weighted_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_masses(rng: &mut ChaCha8Rng, k: usize, zeros: bool) -> Vec<f64> {
        let mut v: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        if zeros && rng.random_bool(0.4) {
            let i = rng.random_range(0..k);
            v[i] = 0.0;
        }
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, k: usize, zeros: bool) -> BayesProblem {
        let hyps = (0..n).map(|_| random_masses(rng, k, zeros)).collect();
        let prior = random_masses(rng, n, false);
        let prior = prior.into_iter().map(|l| l.max(1e-3)).collect::<Vec<_>>();
        let s: f64 = prior.iter().sum();
        BayesProblem::from_masses(hyps, prior.into_iter().map(|l| l / s).collect()).unwrap()
    }

    #[test]
    fn two_point_example() {
        let prob = BayesProblem::uniform(vec![vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let est = bayes_estimator(&prob);
        assert_eq!(est.decision, vec![0, 1]);
        assert_relative_eq!(est.risk, 3.0 / 8.0, epsilon = 1e-15);
        assert_relative_eq!(2.0 * est.risk, 1.0 - 0.25, epsilon = 1e-15);
        let d = decompose(&prob, &prob.barycenter()).unwrap();
        let rho1 = d.rho1.unwrap();
        assert_relative_eq!(rho1[0], 0.4, epsilon = 1e-15);
        assert_relative_eq!(rho1[1], 0.6, epsilon = 1e-15);
        assert_eq!(d.q_mass, 0.5);
    }

    #[test]
    fn identical_hypotheses() {
        let h = vec![0.2, 0.3, 0.5];
        let prob = BayesProblem::from_masses(vec![h.clone(), h.clone(), h.clone()], vec![0.2, 0.5, 0.3]).unwrap();
        let est = bayes_estimator(&prob);
        assert_eq!(est.decision, vec![1, 1, 1]);
        assert_relative_eq!(est.risk, 0.5, epsilon = 1e-15);
        let w = w_terms(&prob, &h).unwrap();
        assert!(w.w_total.abs() < 1e-15, "{w:?}");
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let prob = BayesProblem::uniform(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(bayes_estimator(&prob).decision, vec![0, 0]);
    }

    #[test]
    fn problem_validation() {
        assert!(BayesProblem::uniform(vec![]).is_err());
        assert!(BayesProblem::from_masses(vec![vec![0.5, 0.5]], vec![0.5, 0.5]).is_err());
        assert!(BayesProblem::from_masses(vec![vec![0.5, 0.5], vec![1.0]], vec![0.5, 0.5]).is_err());
        assert!(BayesProblem::from_masses(vec![vec![0.5, 0.6], vec![0.5, 0.5]], vec![0.5, 0.5]).is_err());
        assert!(BayesProblem::from_masses(vec![vec![0.5, 0.5], vec![0.5, 0.5]], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn risk_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let n = rng.random_range(1..=3);
            let k = rng.random_range(1..=4);
            let prob = random_problem(&mut rng, n, k, true);
            assert_relative_eq!(bayes_estimator(&prob).risk, enumerated_risk(&prob), epsilon = 1e-12);
        }
        let prob = random_problem(&mut rng, 3, 4, false);
        assert_relative_eq!(bayes_estimator(&prob).risk, enumerated_risk(&prob), epsilon = 1e-12);
    }

    #[test]
    fn reconstructions_hold_atomwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..1000 {
            let n = rng.random_range(2..=4);
            let k = rng.random_range(2..=8);
            let prob = random_problem(&mut rng, n, k, true);
            let q = random_masses(&mut rng, k, true);
            let d = decompose(&prob, &q).unwrap();
            let zeros = vec![0.0; k];
            let q1 = d.q1.as_ref().unwrap_or(&zeros);
            let q2 = d.q2.as_ref().unwrap_or(&zeros);
            let r1 = d.rho1.as_ref().unwrap_or(&zeros);
            let r2 = d.rho2.as_ref().unwrap_or(&zeros);
            for x in 0..k {
                assert!(((1.0 - d.q_mass) * q1[x] + d.q_mass * q2[x] - q[x]).abs() <= 1e-12);
                assert!(((1.0 - d.risk) * r1[x] + d.risk * r2[x] - d.barycenter[x]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn uniform_prior_fixes_q_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let prob = BayesProblem::uniform(vec![random_masses(&mut rng, 5, false), random_masses(&mut rng, 5, false)]).unwrap();
        for _ in 0..20 {
            let q = random_masses(&mut rng, 5, false);
            assert_relative_eq!(decompose(&prob, &q).unwrap().q_mass, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn w0_matches_brute_force_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..200 {
            let prob = random_problem(&mut rng, 3, 5, false);
            let q = random_masses(&mut rng, 5, false);
            let est = bayes_estimator(&prob);
            let mut brute = 0.0;
            for x in 0..5 {
                let t = est.decision[x];
                let others: Vec<usize> = (0..3).filter(|&i| i != t).collect();
                let rest: f64 = others.iter().map(|&i| prob.prior()[i]).sum();
                let ratios: Vec<f64> = others.iter().map(|&i| prob.hypotheses()[i][x] / q[x]).collect();
                let mean: f64 = others.iter().zip(&ratios).map(|(&i, r)| prob.prior()[i] / rest * r).sum();
                let var: f64 = others
                    .iter()
                    .zip(&ratios)
                    .map(|(&i, r)| prob.prior()[i] / rest * (r - mean).powi(2))
                    .sum();
                brute += q[x] * rest * var;
            }
            let w = w_terms(&prob, &q).unwrap();
            assert!((w.w0 - brute).abs() <= 1e-12 * brute.max(1.0));
        }
        let two = random_problem(&mut rng, 2, 5, false);
        assert_eq!(w_terms(&two, &random_masses(&mut rng, 5, false)).unwrap().w0, 0.0);
    }

    #[test]
    fn sharpened_bound_holds_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let gens: Vec<_> = ["kl", "pearson_chi2", "squared_hellinger", "jensen_shannon", "total_variation"]
            .iter()
            .map(|n| make_builtin(n, &[]).unwrap())
            .collect();
        for _ in 0..300 {
            let n = rng.random_range(2..=4);
            let k = [2, 4, 8, 16][rng.random_range(0..4)];
            let prob = random_problem(&mut rng, n, k, false);
            let q = random_masses(&mut rng, k, false);
            for g in &gens {
                let b = guntuboyina_bound(&prob, &q, g).unwrap();
                assert!(b.margin() >= -1e-10, "{}: {b:?}", g.name());
            }
        }
    }

    #[test]
    fn total_variation_reduces_to_plain_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let tv = make_builtin("total_variation", &[]).unwrap();
        let prob = random_problem(&mut rng, 3, 6, false);
        let q = random_masses(&mut rng, 6, false);
        let b = guntuboyina_bound(&prob, &q, &tv).unwrap();
        assert_eq!(b.kappa, 0.0);
        assert_eq!(b.rhs, b.binary_term);
    }

    #[test]
    fn kl_on_barycenter_matches_jsd_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let kl = make_builtin("kl", &[]).unwrap();
        for _ in 0..100 {
            let p1 = random_masses(&mut rng, 6, false);
            let p2 = random_masses(&mut rng, 6, false);
            let prob = BayesProblem::uniform(vec![p1.clone(), p2.clone()]).unwrap();
            let p = prob.barycenter();
            let pair = balanced_pair_bound(&prob, &p, &kl).unwrap();
            let js = jsd_risk_bound(&p1, &p2).unwrap();
            assert!((pair.lhs - js.jsd).abs() <= 1e-12);
            // κ on the ratio range is at least the uniform ½
            assert!(pair.kappa >= 0.5);
            assert!(pair.quarter_kappa_rhs >= js.eighth_rhs - 1e-12);
            assert!(pair.lhs >= pair.quarter_kappa_rhs - 1e-10);
        }
    }

    #[test]
    fn compensation_identity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..200 {
            let prob = random_problem(&mut rng, 3, 5, false);
            let q = random_masses(&mut rng, 5, false);
            let (l, r) = compensation_identity_check(&prob, &q).unwrap().unwrap();
            assert!((l - r).abs() <= 1e-10);
            let p = prob.barycenter();
            let (l, r) = compensation_identity_check(&prob, &p).unwrap().unwrap();
            assert!((l - r).abs() <= 1e-12);
        }
        let p1 = random_masses(&mut rng, 4, false);
        let p2 = random_masses(&mut rng, 4, false);
        let m: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| (a + b) / 2.0).collect();
        let q = random_masses(&mut rng, 4, false);
        let js = crate::divergence::jsd_masses(&p1, &p2);
        let lhs = kl_masses(&p1, &q) + kl_masses(&p2, &q);
        assert_relative_eq!(lhs, 2.0 * kl_masses(&m, &q) + 2.0 * js, epsilon = 1e-12);
        let prob = BayesProblem::uniform(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert_eq!(compensation_identity_check(&prob, &[0.0, 1.0]).unwrap(), None);
    }

    #[test]
    fn series_converges_to_relative_entropy() {
        let s = pinsker_series(&[0.5, 0.5], &[0.25, 0.75], 60).unwrap();
        let last = *s.partial_sums.last().unwrap();
        assert_relative_eq!(last, 0.143841036225890, epsilon = 1e-9);
        assert!(s.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        assert!(s.partial_sums.len() <= 60);
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        for _ in 0..100 {
            let k = rng.random_range(2..10);
            let p1 = random_masses(&mut rng, k, true);
            let p2 = random_masses(&mut rng, k, false);
            let s = pinsker_series(&p1, &p2, 60).unwrap();
            let last = *s.partial_sums.last().unwrap();
            assert!((last - s.kl).abs() <= 1e-9, "{last} vs {}", s.kl);
            assert!(last <= s.kl + 1e-9);
            assert!(s.weighted_bound() <= s.kl + 1e-10);
        }
    }

    #[test]
    fn series_trivial_and_errors() {
        let s = pinsker_series(&[0.3, 0.7], &[0.3, 0.7], 60).unwrap();
        assert!(s.partial_sums.iter().all(|&x| x == 0.0));
        assert_eq!(s.unweighted_bound(), 0.0);
        assert_eq!(pinsker_series(&[0.5, 0.5], &[1.0, 0.0], 10), Err(Error::NotAbsolutelyContinuous));
    }

    #[test]
    fn first_series_term_is_midpoint_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..50 {
            let p1 = random_masses(&mut rng, 5, false);
            let p2 = random_masses(&mut rng, 5, false);
            let s = pinsker_series(&p1, &p2, 60).unwrap();
            let b = jsd_risk_bound(&p1, &p2).unwrap();
            let expected = (b.chi2_rho1 + b.chi2_rho2) / 2.0;
            assert!((s.lower_bound_terms[0] - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn binary_kl_half_matches_definition() {
        let kl = make_builtin("kl", &[]).unwrap();
        for v in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert_relative_eq!(binary_kl_half(v), binary_divergence(&kl, (1.0 + v) / 2.0, 0.5), epsilon = 1e-15);
            assert!(2.0 * binary_kl_half(v) >= v * v);
        }
    }

    #[test]
    fn problem_file_aligns_reference() {
        let json = r#"{
            "hypotheses": [{"support": ["a","b"], "mass": [0.5,0.5]},
                           {"support": ["b","c"], "mass": [0.5,0.5]}],
            "q": {"support": ["c","a","b"], "mass": [0.2,0.3,0.5]}
        }"#;
        let file: ProblemFile = serde_json::from_str(json).unwrap();
        let (prob, q) = file.into_parts().unwrap();
        assert_eq!(prob.support(), &["a", "b", "c"]);
        assert_eq!(q, vec![0.3, 0.5, 0.2]);
        assert_eq!(prob.prior(), &[0.5, 0.5]);
    }
}
