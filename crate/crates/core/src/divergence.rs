//! Divergence evaluation on finite distributions.
//!
//! With counting measure as reference, every f-divergence splits into three
//! parts:
//!
//! ```text
//! D_f(P‖Q) = Σ_{p,q>0} q·f(p/q)  +  f(0)·Q{p = 0}  +  f*(0)·P{q = 0}
//! ```
//!
//! The boundary terms use `0·∞ = 0`, so a divergence is `+∞` exactly when a
//! boundary term with an infinite limit carries positive mass.

use serde::{Deserialize, Serialize};

use crate::distribution::{align, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::generator::{scale_extended, ConvexGenerator};

/// Values smaller than this in magnitude are reported as exactly zero.
pub const ZERO_CLAMP: f64 = 1e-15;

/// A divergence together with its three-term breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    #[serde(with = "crate::report::extended")]
    pub value: f64,
    /// `Σ q·f(p/q)` over atoms where both masses are positive.
    pub core: f64,
    /// `f*(0)·P{q = 0}`.
    #[serde(with = "crate::report::extended")]
    pub zero_q_term: f64,
    /// `f(0)·Q{p = 0}`.
    #[serde(with = "crate::report::extended")]
    pub zero_p_term: f64,
}

pub(crate) fn clamp_zero(v: f64) -> f64 {
    if v.abs() < ZERO_CLAMP {
        0.0
    } else {
        v
    }
}

/// `D_g(P‖Q)` with supports aligned by label.
pub fn f_divergence(
    g: &ConvexGenerator,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<DivergenceValue> {
    let a = align(p, q);
    f_divergence_masses(g, &a.p, &a.q)
}

/// `D_g(p‖q)` for mass vectors over a shared support.
pub fn f_divergence_masses(g: &ConvexGenerator, p: &[f64], q: &[f64]) -> Result<DivergenceValue> {
    if p.len() != q.len() {
        return Err(Error::InvalidDistribution(format!(
            "mass vectors have lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    let domain = g.domain();
    let mut core = 0.0;
    let mut p_off_q = 0.0;
    let mut q_off_p = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        match (pi > 0.0, qi > 0.0) {
            (true, true) => {
                let ratio = pi / qi;
                if !domain.contains(ratio) {
                    return Err(Error::DomainError {
                        generator: g.name().to_string(),
                        ratio,
                        domain: domain.to_string(),
                    });
                }
                core += qi * g.eval(ratio);
            }
            (true, false) => p_off_q += pi,
            (false, true) => q_off_p += qi,
            (false, false) => {}
        }
    }
    let zero_q_term = scale_extended(p_off_q, g.f_star_at_zero());
    let zero_p_term = scale_extended(q_off_p, g.f_at_zero());
    Ok(DivergenceValue {
        value: clamp_zero(core + zero_q_term + zero_p_term),
        core,
        zero_q_term,
        zero_p_term,
    })
}

/// Value-only form of [`f_divergence_masses`]; `NaN` on a domain error.
pub fn divergence(g: &ConvexGenerator, p: &[f64], q: &[f64]) -> f64 {
    f_divergence_masses(g, p, q).map_or(f64::NAN, |d| d.value)
}

/// `D_f(t‖s) = s·f(t/s) + (1 − s)·f((1 − t)/(1 − s))` for `t, s ∈ [0, 1]`.
pub fn binary_divergence(g: &ConvexGenerator, t: f64, s: f64) -> f64 {
    clamp_zero(g.perspective(t, s) + g.perspective(1.0 - t, 1.0 - s))
}

/// `sup_A |P(A) − Q(A)| = ½ Σ |p − q|`.
pub fn total_variation(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let a = align(p, q);
    total_variation_masses(&a.p, &a.q)
}

pub fn total_variation_masses(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Pearson `χ²(P‖Q) = Σ (p − q)²/q`.
pub fn chi_square(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let a = align(p, q);
    chi_square_masses(&a.p, &a.q)
}

pub fn chi_square_masses(p: &[f64], q: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if qi > 0.0 {
            let d = pi - qi;
            sum += d * d / qi;
        } else if pi > 0.0 {
            return f64::INFINITY;
        }
    }
    clamp_zero(sum)
}

/// Relative entropy in nats.
pub fn kl(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let a = align(p, q);
    kl_masses(&a.p, &a.q)
}

pub fn kl_masses(p: &[f64], q: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi == 0.0 {
                return f64::INFINITY;
            }
            sum += pi * (pi / qi).ln();
        }
    }
    clamp_zero(sum)
}

/// Jensen–Shannon divergence `½D(P‖M) + ½D(Q‖M)`, `M = (P + Q)/2`, in nats.
pub fn jsd(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let a = align(p, q);
    jsd_masses(&a.p, &a.q)
}

pub fn jsd_masses(p: &[f64], q: &[f64]) -> f64 {
    clamp_zero(jsd_midpoint_form(
        p.iter().zip(q).map(|(&a, &b)| ((a + b) / 2.0, (a - b) / 2.0)),
    ))
}

/// JSD from `(m, δ)` pairs with `p = m + δ`, `q = m − δ`.
///
/// Each atom contributes `½·m·φ(δ/m)` with
/// `φ(u) = (1+u)ln(1+u) + (1−u)ln(1−u)`, which keeps full relative precision
/// when `p` and `q` nearly coincide.
pub(crate) fn jsd_midpoint_form(atoms: impl Iterator<Item = (f64, f64)>) -> f64 {
    0.5 * atoms
        .filter(|&(m, _)| m > 0.0)
        .map(|(m, delta)| m * symmetric_entropy_gap((delta / m).clamp(-1.0, 1.0)))
        .sum::<f64>()
}

/// `(1+u)ln(1+u) + (1−u)ln(1−u)` for `u ∈ [−1, 1]`.
pub(crate) fn symmetric_entropy_gap(u: f64) -> f64 {
    let a = u.abs();
    if a < 1e-2 {
        // Σ_{j≥1} u^{2j} / (j(2j−1))
        let u2 = u * u;
        let mut term = 1.0;
        let mut sum = 0.0;
        for j in 1..=8 {
            term *= u2;
            let j = j as f64;
            sum += term / (j * (2.0 * j - 1.0));
        }
        sum
    } else {
        let xlog1p = |x: f64| if x == -1.0 { 0.0 } else { (1.0 + x) * x.ln_1p() };
        xlog1p(u) + xlog1p(-u)
    }
}

/// `(min, max)` of `p_i/q_i` over atoms with `q_i > 0`; the max is `+∞` when
/// `P` has mass off the support of `Q`.
pub fn ratio_range(p: &DiscreteDistribution, q: &DiscreteDistribution) -> (f64, f64) {
    let a = align(p, q);
    ratio_range_masses(&a.p, &a.q)
}

pub fn ratio_range_masses(p: &[f64], q: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if qi > 0.0 {
            let r = pi / qi;
            lo = lo.min(r);
            hi = hi.max(r);
        } else if pi > 0.0 {
            hi = f64::INFINITY;
        }
    }
    (lo, hi)
}
