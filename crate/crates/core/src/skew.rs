//! Skewed generators, skew divergences and generalized Jensen–Shannon families.
//!
//! Two weight conventions meet here. [`skew_divergence`] takes `(t, s)` as the
//! weight on `Q` in each mixture, `D((1−t)P + tQ ‖ (1−s)P + sQ)`.
//! [`GeneratorSkewParams`] takes `(r, t)` as the weight on `P`, so the same
//! divergence is the skewed generator with `r = 1 − t` and denominator weight
//! `1 − s`.

use serde::{Deserialize, Serialize};

use crate::distribution::{align, mixture, DiscreteDistribution};
use crate::divergence::{clamp_zero, divergence, kl_masses, chi_square_masses};
use crate::error::{Error, Result};
use crate::generator::ConvexGenerator;

/// Mixture weights on the first argument for the numerator and denominator
/// of a skewed generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSkewParams {
    num_weight: f64,
    den_weight: f64,
}

impl GeneratorSkewParams {
    pub fn new(num_weight: f64, den_weight: f64) -> Result<Self> {
        for (name, v) in [("num_weight", num_weight), ("den_weight", den_weight)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidSkew(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(Self {
            num_weight,
            den_weight,
        })
    }

    /// Weights matching `D((1−t)P + tQ ‖ (1−s)P + sQ)`.
    pub fn from_skew(t: f64, s: f64) -> Result<Self> {
        Self::new(1.0 - t, 1.0 - s)
    }

    pub fn num_weight(&self) -> f64 {
        self.num_weight
    }

    pub fn den_weight(&self) -> f64 {
        self.den_weight
    }

    /// `(r·x + 1 − r, t·x + 1 − t)`.
    pub fn mixtures(&self, x: f64) -> (f64, f64) {
        (
            self.num_weight * x + 1.0 - self.num_weight,
            self.den_weight * x + 1.0 - self.den_weight,
        )
    }
}

/// `f̂(x) = (tx + 1 − t)·f((rx + 1 − r)/(tx + 1 − t))`, whose divergence is
/// `D_f(rP + (1−r)Q ‖ tP + (1−t)Q)`.
pub fn skew_generator(g: &ConvexGenerator, params: GeneratorSkewParams) -> ConvexGenerator {
    g.skewed(params)
}

/// `D_g((1−t)P + tQ ‖ (1−s)P + sQ)`, evaluated on the mixtures directly.
pub fn skew_divergence(
    g: &ConvexGenerator,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    t: f64,
    s: f64,
) -> Result<f64> {
    check_unit("t", t)?;
    check_unit("s", s)?;
    let a = align(p, q);
    Ok(skew_divergence_masses(g, &a.p, &a.q, t, s))
}

pub fn skew_divergence_masses(g: &ConvexGenerator, p: &[f64], q: &[f64], t: f64, s: f64) -> f64 {
    divergence(g, &mixture(p, q, t), &mixture(p, q, s))
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidSkew(format!("{name} = {v} is outside [0, 1]")))
    }
}

/// Generator of `Δ_f(P‖Q) = ½D_f(P‖M) + ½D_f(Q‖M)`, `M = (P + Q)/2`:
/// `x ↦ ((1+x)/4)·(f(2x/(1+x)) + f(2/(1+x)))`.
pub fn skew_symmetrization(g: &ConvexGenerator) -> ConvexGenerator {
    g.symmetrized()
}

/// Skew coefficients `α` with weights `w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewScheme {
    alphas: Vec<f64>,
    weights: Vec<f64>,
    alpha_bar: f64,
}

/// Slack allowed on `Σ w = 1`.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

impl SkewScheme {
    pub fn new(alphas: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidSkew("scheme has no components".into()));
        }
        if alphas.len() != weights.len() {
            return Err(Error::InvalidSkew(format!(
                "{} alphas but {} weights",
                alphas.len(),
                weights.len()
            )));
        }
        if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidSkew(format!("alpha {a} is outside [0, 1]")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidSkew(format!("weight {w} is not strictly positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidSkew(format!("weights sum to {total}, not 1")));
        }
        let alpha_bar = weights
            .iter()
            .zip(&alphas)
            .map(|(w, a)| w * a)
            .sum::<f64>()
            .clamp(0.0, 1.0);
        Ok(Self {
            alphas,
            weights,
            alpha_bar,
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ᾱ = Σ w_i α_i`.
    pub fn alpha_bar(&self) -> f64 {
        self.alpha_bar
    }

    fn is_constant(&self) -> bool {
        self.alphas.iter().all(|&a| a == self.alphas[0])
    }
}

impl<'de> Deserialize<'de> for SkewScheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alphas: Vec<f64>,
            weights: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        SkewScheme::new(raw.alphas, raw.weights).map_err(serde::de::Error::custom)
    }
}

/// `Σ w_i D_g((1−α_i)P + α_i Q ‖ (1−ᾱ)P + ᾱQ)`.
pub fn generalized_skew_divergence(
    g: &ConvexGenerator,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    scheme: &SkewScheme,
) -> f64 {
    let a = align(p, q);
    generalized_skew_divergence_masses(g, &a.p, &a.q, scheme)
}

pub fn generalized_skew_divergence_masses(
    g: &ConvexGenerator,
    p: &[f64],
    q: &[f64],
    scheme: &SkewScheme,
) -> f64 {
    scheme_sum(p, q, scheme, |a, b| divergence(g, a, b))
}

/// `JS^{α,w}(p : q)`: the generalized skew divergence of relative entropy.
pub fn generalized_js_masses(p: &[f64], q: &[f64], scheme: &SkewScheme) -> f64 {
    scheme_sum(p, q, scheme, kl_masses)
}

/// `χ²_{α,w}(p : q)`: the generalized skew divergence of Pearson's χ².
pub fn generalized_chi2_masses(p: &[f64], q: &[f64], scheme: &SkewScheme) -> f64 {
    scheme_sum(p, q, scheme, chi_square_masses)
}

fn scheme_sum(
    p: &[f64],
    q: &[f64],
    scheme: &SkewScheme,
    d: impl Fn(&[f64], &[f64]) -> f64,
) -> f64 {
    let centre = mixture(p, q, scheme.alpha_bar);
    let total = scheme
        .weights
        .iter()
        .zip(&scheme.alphas)
        .map(|(&w, &a)| {
            let v = d(&mixture(p, q, a), &centre);
            if w == 0.0 { 0.0 } else { w * v }
        })
        .sum();
    clamp_zero(total)
}

/// Binary Rényi-∞ divergence `ln max{a/b, (1−a)/(1−b)}` with `0/0 = 1`.
pub fn d_infinity_binary(a: f64, b: f64) -> f64 {
    let ratio = |x: f64, y: f64| match (x == 0.0, y == 0.0) {
        (true, true) => 1.0,
        (false, true) => f64::INFINITY,
        _ => x / y,
    };
    clamp_zero(ratio(a, b).max(ratio(1.0 - a, 1.0 - b)).ln())
}

/// `N∞ = max_i exp D∞(α_i ‖ ᾱ)`, the largest likelihood ratio between an
/// `α_i`-mixture and the `ᾱ`-mixture.
pub fn n_infinity(scheme: &SkewScheme) -> Result<f64> {
    if scheme.is_constant() {
        return Ok(1.0);
    }
    let ab = scheme.alpha_bar;
    if ab <= 0.0 || ab >= 1.0 {
        return Err(Error::DegenerateScheme { alpha_bar: ab });
    }
    Ok(scheme
        .alphas
        .iter()
        .map(|&a| ((1.0 - a) / (1.0 - ab)).max(a / ab))
        .fold(1.0, f64::max))
}

/// `𝒜 = max_i |α_i − ᾱ_i|` where `ᾱ_i` is the weighted mean of the other
/// skews. A single-component scheme has `𝒜 = 0`.
pub fn a_coefficient(scheme: &SkewScheme) -> f64 {
    let n = scheme.alphas.len();
    if n == 1 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let rest = 1.0 - scheme.weights[i];
            let others: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| scheme.weights[j] * scheme.alphas[j])
                .sum();
            (scheme.alphas[i] - others / rest).abs()
        })
        .fold(0.0, f64::max)
}

/// `Var_w(α) = Σ w_i (α_i − ᾱ)²`.
pub fn variance_of_alphas(scheme: &SkewScheme) -> f64 {
    scheme
        .weights
        .iter()
        .zip(&scheme.alphas)
        .map(|(w, a)| w * (a - scheme.alpha_bar).powi(2))
        .sum()
}

/// `H(w) = −Σ w_i ln w_i`, in nats.
pub fn entropy_of_weights(scheme: &SkewScheme) -> f64 {
    -scheme.weights.iter().map(|w| w * w.ln()).sum::<f64>()
}

/// Constant of the skew-KL total-variation bound: `1 − α` if `α ≤ β`,
/// otherwise `α`.
pub fn skew_tv_constant(alpha: f64, beta: f64) -> f64 {
    if alpha <= beta {
        1.0 - alpha
    } else {
        alpha
    }
}
