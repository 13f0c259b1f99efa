//! Convex generators, their boundary limits, and strong-convexity certificates.
//!
//! A generator is a convex `f: (0, ∞) → ℝ` with `f(1) = 0`. Besides pointwise
//! evaluation it carries the two boundary limits needed to evaluate a
//! divergence on distributions with disjoint mass:
//!
//! * `f(0)  = lim_{t→0+} f(t)`
//! * `f*(0) = lim_{t→∞} f(t)/t`
//!
//! Either may be `+∞`. Generators are immutable and cheap to clone; derived
//! generators (dual, shifted, skewed, symmetrized) share their base through an
//! [`Arc`].

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skew::GeneratorSkewParams;

/// Lower clip applied to certificate intervals before numeric sampling.
pub const CERTIFICATE_LOWER_CLIP: f64 = 1e-6;
/// Upper clip applied to certificate intervals before numeric sampling.
pub const CERTIFICATE_UPPER_CLIP: f64 = 1e6;
/// Number of grid points used by finite-difference certificates.
pub const CERTIFICATE_GRID: usize = 1024;
/// Safety margin subtracted from numerically estimated κ.
pub const NUMERIC_KAPPA_MARGIN: f64 = 1e-6;

/// An interval of the extended half-line with independently open/closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    /// `(lo, hi)`
    pub fn open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, false)
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    /// `(lo, hi]`
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, true)
    }

    /// `[lo, hi)`
    pub fn right_open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, false)
    }

    /// `(0, ∞)`
    pub fn positive_axis() -> Self {
        Self::open(0.0, f64::INFINITY)
    }

    /// The interval spanned by two observed values, open at 0 and at ∞.
    pub fn spanning(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, lo > 0.0, hi.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_nan() || self.hi.is_nan() {
            return Err(Error::InvalidInterval(format!("{self} has a NaN endpoint")));
        }
        if self.lo >= self.hi {
            return Err(Error::InvalidInterval(format!("{self} is empty or degenerate")));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let lo_ok = self.lo > other.lo || (self.lo == other.lo && (other.lo_closed || !self.lo_closed));
        let hi_ok = self.hi < other.hi || (self.hi == other.hi && (other.hi_closed || !self.hi_closed));
        lo_ok && hi_ok
    }

    /// Finite sampling window used by numeric certificates.
    pub fn clipped(&self) -> (f64, f64) {
        (
            self.lo.max(CERTIFICATE_LOWER_CLIP),
            self.hi.min(CERTIFICATE_UPPER_CLIP),
        )
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        let hi = if self.hi.is_infinite() {
            "∞".to_string()
        } else {
            format!("{}", self.hi)
        };
        write!(f, "{l}{}, {hi}{r}", self.lo)
    }
}

/// Direction in which a closed-form second derivative moves over `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Decreasing,
    Increasing,
    Constant,
}

/// The ten divergences with closed-form κ certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Kl,
    TotalVariation,
    PearsonChi2,
    SquaredHellinger,
    ReverseKl,
    VinczeLeCam,
    JensenShannon,
    NeymanChi2,
    Sason { s: f64 },
    Alpha { alpha: f64 },
}

impl Builtin {
    pub const NAMES: [&'static str; 10] = [
        "kl",
        "total_variation",
        "pearson_chi2",
        "squared_hellinger",
        "reverse_kl",
        "vincze_le_cam",
        "jensen_shannon",
        "neyman_chi2",
        "sason_s",
        "alpha_divergence",
    ];

    pub fn name(&self) -> String {
        match self {
            Builtin::Kl => "kl".into(),
            Builtin::TotalVariation => "total_variation".into(),
            Builtin::PearsonChi2 => "pearson_chi2".into(),
            Builtin::SquaredHellinger => "squared_hellinger".into(),
            Builtin::ReverseKl => "reverse_kl".into(),
            Builtin::VinczeLeCam => "vincze_le_cam".into(),
            Builtin::JensenShannon => "jensen_shannon".into(),
            Builtin::NeymanChi2 => "neyman_chi2".into(),
            Builtin::Sason { s } => format!("sason:{s}"),
            Builtin::Alpha { alpha } => format!("alpha:{alpha}"),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Builtin::Kl => xlogx(t),
            Builtin::TotalVariation => (t - 1.0).abs() / 2.0,
            Builtin::PearsonChi2 => (t - 1.0) * (t - 1.0),
            Builtin::SquaredHellinger => 2.0 * (1.0 - t.sqrt()),
            Builtin::ReverseKl => -t.ln(),
            Builtin::VinczeLeCam => (t - 1.0) * (t - 1.0) / (t + 1.0),
            Builtin::JensenShannon => (t + 1.0) * (2.0 / (t + 1.0)).ln() + xlogx(t),
            Builtin::NeymanChi2 => 1.0 / t - 1.0,
            Builtin::Sason { s } => xxlogx(s + t) - xxlogx(s + 1.0),
            Builtin::Alpha { alpha } => {
                4.0 * (1.0 - t.powf((1.0 + alpha) / 2.0)) / (1.0 - alpha * alpha)
            }
        }
    }

    /// Closed-form `f''(t)`; the kink of total variation is ignored.
    pub fn second_derivative(&self, t: f64) -> f64 {
        match *self {
            Builtin::Kl => 1.0 / t,
            Builtin::TotalVariation => 0.0,
            Builtin::PearsonChi2 => 2.0,
            Builtin::SquaredHellinger => 0.5 * t.powf(-1.5),
            Builtin::ReverseKl => 1.0 / (t * t),
            Builtin::VinczeLeCam => 8.0 / (t + 1.0).powi(3),
            Builtin::JensenShannon => 1.0 / (t * (t + 1.0)),
            Builtin::NeymanChi2 => 2.0 / (t * t * t),
            Builtin::Sason { s } => 2.0 * (s + t).ln() + 3.0,
            Builtin::Alpha { alpha } => t.powf((alpha - 3.0) / 2.0),
        }
    }

    /// `f'(1)`, or `None` where `f` is not differentiable at 1.
    pub fn slope_at_one(&self) -> Option<f64> {
        match *self {
            Builtin::Kl => Some(1.0),
            Builtin::TotalVariation => None,
            Builtin::PearsonChi2 | Builtin::VinczeLeCam | Builtin::JensenShannon => Some(0.0),
            Builtin::SquaredHellinger | Builtin::ReverseKl | Builtin::NeymanChi2 => Some(-1.0),
            Builtin::Sason { s } => Some(2.0 * (s + 1.0) * (s + 1.0).ln() + (s + 1.0)),
            Builtin::Alpha { alpha } => Some(-2.0 / (1.0 - alpha)),
        }
    }

    pub fn f_at_zero(&self) -> f64 {
        match *self {
            Builtin::Kl => 0.0,
            Builtin::TotalVariation => 0.5,
            Builtin::PearsonChi2 | Builtin::VinczeLeCam => 1.0,
            Builtin::SquaredHellinger => 2.0,
            Builtin::ReverseKl | Builtin::NeymanChi2 => f64::INFINITY,
            Builtin::JensenShannon => LN_2,
            Builtin::Sason { s } => xxlogx(s) - xxlogx(s + 1.0),
            Builtin::Alpha { alpha } => {
                if alpha > -1.0 {
                    4.0 / (1.0 - alpha * alpha)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn f_star_at_zero(&self) -> f64 {
        match *self {
            Builtin::Kl | Builtin::PearsonChi2 | Builtin::Sason { .. } => f64::INFINITY,
            Builtin::TotalVariation => 0.5,
            Builtin::SquaredHellinger | Builtin::ReverseKl | Builtin::NeymanChi2 => 0.0,
            Builtin::VinczeLeCam => 1.0,
            Builtin::JensenShannon => LN_2,
            Builtin::Alpha { alpha } => {
                if alpha < 1.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn monotonicity(&self) -> Monotonicity {
        match *self {
            Builtin::TotalVariation | Builtin::PearsonChi2 => Monotonicity::Constant,
            Builtin::Sason { .. } => Monotonicity::Increasing,
            Builtin::Alpha { alpha } if alpha > 3.0 => Monotonicity::Increasing,
            Builtin::Alpha { alpha: 3.0 } => Monotonicity::Constant,
            _ => Monotonicity::Decreasing,
        }
    }

    /// The tabulated certificate interval for a given `M`.
    pub fn table_domain(&self, m: f64) -> Interval {
        match self.monotonicity() {
            Monotonicity::Constant => Interval::positive_axis(),
            Monotonicity::Decreasing => Interval::left_open(0.0, m),
            Monotonicity::Increasing => Interval::right_open(m, f64::INFINITY),
        }
    }

    /// The tabulated κ as a function of `M`.
    pub fn table_kappa(&self, m: f64) -> f64 {
        match *self {
            Builtin::Kl => 1.0 / m,
            Builtin::TotalVariation => 0.0,
            Builtin::PearsonChi2 => 2.0,
            Builtin::SquaredHellinger => m.powf(-1.5) / 2.0,
            Builtin::ReverseKl => 1.0 / (m * m),
            Builtin::VinczeLeCam => 8.0 / (m + 1.0).powi(3),
            Builtin::JensenShannon => 1.0 / (m * (m + 1.0)),
            Builtin::NeymanChi2 => 2.0 / m.powi(3),
            Builtin::Sason { s } => 2.0 * (s + m).ln() + 3.0,
            Builtin::Alpha { alpha } => {
                if alpha == 3.0 {
                    1.0
                } else {
                    m.powf((alpha - 3.0) / 2.0)
                }
            }
        }
    }

    /// Formula column of the κ-table, for display.
    pub fn formula(&self) -> &'static str {
        match self {
            Builtin::Kl => "t ln t",
            Builtin::TotalVariation => "|t-1|/2",
            Builtin::PearsonChi2 => "(t-1)^2",
            Builtin::SquaredHellinger => "2(1-sqrt t)",
            Builtin::ReverseKl => "-ln t",
            Builtin::VinczeLeCam => "(t-1)^2/(t+1)",
            Builtin::JensenShannon => "(t+1)ln(2/(t+1)) + t ln t",
            Builtin::NeymanChi2 => "1/t - 1",
            Builtin::Sason { .. } => "(s+t)^2 ln(s+t) - (s+1)^2 ln(s+1)",
            Builtin::Alpha { .. } => "4(1-t^((1+a)/2))/(1-a^2)",
        }
    }

    pub fn kappa_formula(&self) -> &'static str {
        match self {
            Builtin::Kl => "1/M",
            Builtin::TotalVariation => "0",
            Builtin::PearsonChi2 => "2",
            Builtin::SquaredHellinger => "M^(-3/2)/2",
            Builtin::ReverseKl => "1/M^2",
            Builtin::VinczeLeCam => "8/(M+1)^3",
            Builtin::JensenShannon => "1/(M(M+1))",
            Builtin::NeymanChi2 => "2/M^3",
            Builtin::Sason { .. } => "2 ln(s+M) + 3",
            Builtin::Alpha { .. } => "M^((a-3)/2)",
        }
    }
}

fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

fn xxlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t * t.ln()
    }
}

#[derive(Debug)]
enum Node {
    Builtin(Builtin),
    Dual(ConvexGenerator),
    Shifted { base: ConvexGenerator, c: f64 },
    Skewed { base: ConvexGenerator, params: GeneratorSkewParams },
    Symmetrized(ConvexGenerator),
}

/// A convex generator `f` with `f(1) = 0`.
#[derive(Debug, Clone)]
pub struct ConvexGenerator {
    name: String,
    node: Arc<Node>,
    domain: Interval,
    f_at_zero: f64,
    f_star_at_zero: f64,
}

impl ConvexGenerator {
    fn from_node(name: String, node: Node, f_at_zero: f64, f_star_at_zero: f64) -> Self {
        Self {
            name,
            node: Arc::new(node),
            domain: Interval::positive_axis(),
            f_at_zero,
            f_star_at_zero,
        }
    }

    pub fn from_builtin(b: Builtin) -> Self {
        Self::from_node(b.name(), Node::Builtin(b), b.f_at_zero(), b.f_star_at_zero())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// `lim_{t→0+} f(t)`
    pub fn f_at_zero(&self) -> f64 {
        self.f_at_zero
    }

    /// `lim_{t→∞} f(t)/t`
    pub fn f_star_at_zero(&self) -> f64 {
        self.f_star_at_zero
    }

    pub fn builtin(&self) -> Option<Builtin> {
        match &*self.node {
            Node::Builtin(b) => Some(*b),
            _ => None,
        }
    }

    /// Evaluates `f(t)` for `t > 0`; `t = 0` returns `f(0)`. Terms with a zero
    /// denominator go through [`ConvexGenerator::perspective`].
    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.f_at_zero;
        }
        if t < 0.0 || t.is_nan() {
            return f64::NAN;
        }
        match &*self.node {
            Node::Builtin(b) => b.eval(t),
            Node::Dual(base) => t * base.eval(1.0 / t),
            Node::Shifted { base, c } => base.eval(t) + c * (t - 1.0),
            Node::Skewed { base, params } => {
                let (num, den) = params.mixtures(t);
                base.perspective(num, den)
            }
            Node::Symmetrized(base) => {
                let den = (1.0 + t) / 2.0;
                0.5 * (base.perspective(t, den) + base.perspective(1.0, den))
            }
        }
    }

    /// The perspective `b·f(a/b)` with the boundary conventions
    /// `0·f(0/0) = 0` and `0·f(a/0) = a·f*(0)`.
    pub fn perspective(&self, a: f64, b: f64) -> f64 {
        if b > 0.0 {
            if a == 0.0 {
                scale_extended(b, self.f_at_zero)
            } else {
                b * self.eval(a / b)
            }
        } else if a > 0.0 {
            scale_extended(a, self.f_star_at_zero)
        } else {
            0.0
        }
    }

    /// Closed-form `f''(t)` when the whole construction chain has one.
    pub fn second_derivative(&self, t: f64) -> Option<f64> {
        match &*self.node {
            Node::Builtin(b) => Some(b.second_derivative(t)),
            Node::Dual(base) => base.second_derivative(1.0 / t).map(|d| d / (t * t * t)),
            Node::Shifted { base, .. } => base.second_derivative(t),
            Node::Skewed { base, params } => {
                let (num, den) = params.mixtures(t);
                let gap = params.num_weight() - params.den_weight();
                if gap == 0.0 {
                    return Some(0.0);
                }
                base.second_derivative(num / den)
                    .map(|d| d * gap * gap / (den * den * den))
            }
            Node::Symmetrized(base) => {
                let a = GeneratorSkewParams::new(1.0, 0.5).ok()?;
                let b = GeneratorSkewParams::new(0.0, 0.5).ok()?;
                let first = base.skewed(a).second_derivative(t)?;
                let second = base.skewed(b).second_derivative(t)?;
                Some(0.5 * (first + second))
            }
        }
    }

    /// `f'(1)` when known in closed form.
    pub fn slope_at_one(&self) -> Option<f64> {
        match &*self.node {
            Node::Builtin(b) => b.slope_at_one(),
            Node::Dual(base) => base.slope_at_one().map(|s| -s),
            Node::Shifted { base, c } => base.slope_at_one().map(|s| s + c),
            Node::Skewed { base, params } => base
                .slope_at_one()
                .map(|s| (params.num_weight() - params.den_weight()) * s),
            Node::Symmetrized(_) => Some(0.0),
        }
    }

    /// Shifts `f` by `-f'(1)(t-1)` so that the result is minimised at 1 and
    /// nonnegative. Same divergence.
    pub fn normalized(&self) -> Option<ConvexGenerator> {
        self.slope_at_one().map(|s| affine_shift(self, -s))
    }

    pub(crate) fn skewed(&self, params: GeneratorSkewParams) -> ConvexGenerator {
        let f0 = self.perspective(1.0 - params.num_weight(), 1.0 - params.den_weight());
        let fs0 = self.perspective(params.num_weight(), params.den_weight());
        ConvexGenerator::from_node(
            format!("skew({},{},{})", self.name, params.num_weight(), params.den_weight()),
            Node::Skewed { base: self.clone(), params },
            f0,
            fs0,
        )
    }

    pub(crate) fn symmetrized(&self) -> ConvexGenerator {
        // Both boundary limits equal (f(0) + f(2)) / 4.
        let f0 = 0.5 * (self.perspective(0.0, 0.5) + self.perspective(1.0, 0.5));
        ConvexGenerator::from_node(
            format!("symmetrized({})", self.name),
            Node::Symmetrized(self.clone()),
            f0,
            f0,
        )
    }
}

/// `w·v` for a nonnegative weight, with `0·∞ = 0`.
pub(crate) fn scale_extended(w: f64, v: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * v
    }
}

impl fmt::Display for ConvexGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Builds one of the ten tabulated generators.
///
/// `sason_s` takes `s > e^{-3/2}` (default 1); `alpha_divergence` takes
/// `α ∉ {-1, 1}` (default 0.5).
pub fn make_builtin(name: &str, params: &[f64]) -> Result<ConvexGenerator> {
    let param = |default: f64| params.first().copied().unwrap_or(default);
    let builtin = match name {
        "kl" | "relative_entropy" => Builtin::Kl,
        "total_variation" | "tv" => Builtin::TotalVariation,
        "pearson_chi2" | "chi2" => Builtin::PearsonChi2,
        "squared_hellinger" | "hellinger" => Builtin::SquaredHellinger,
        "reverse_kl" => Builtin::ReverseKl,
        "vincze_le_cam" | "triangular" => Builtin::VinczeLeCam,
        "jensen_shannon" => Builtin::JensenShannon,
        "neyman_chi2" => Builtin::NeymanChi2,
        "sason_s" | "sason" => {
            let s = param(1.0);
            if !(s.is_finite() && s > (-1.5f64).exp()) {
                return Err(Error::ParameterOutOfRange {
                    name: "s",
                    value: s,
                    reason: "requires s > e^(-3/2)",
                });
            }
            Builtin::Sason { s }
        }
        "alpha_divergence" | "alpha" => {
            let alpha = param(0.5);
            if !alpha.is_finite() || alpha == 1.0 || alpha == -1.0 {
                return Err(Error::ParameterOutOfRange {
                    name: "alpha",
                    value: alpha,
                    reason: "requires a finite alpha other than -1 and 1",
                });
            }
            Builtin::Alpha { alpha }
        }
        other => return Err(Error::UnknownDivergence(other.to_string())),
    };
    Ok(ConvexGenerator::from_builtin(builtin))
}

/// Parses the CLI form `name` or `name:param`, e.g. `alpha:0.5`.
pub fn parse_generator(spec: &str) -> Result<ConvexGenerator> {
    let spec = spec.trim();
    match spec.split_once(':') {
        Some((name, value)) => {
            let v: f64 = value.trim().parse().map_err(|_| {
                Error::Input(format!("divergence `{spec}`: parameter `{value}` is not a number"))
            })?;
            make_builtin(name.trim(), &[v])
        }
        None => make_builtin(spec, &[]),
    }
}

/// `f*(t) = t·f(1/t)`; swaps the arguments of the divergence.
pub fn dual(g: &ConvexGenerator) -> ConvexGenerator {
    ConvexGenerator::from_node(
        format!("dual({})", g.name),
        Node::Dual(g.clone()),
        g.f_star_at_zero,
        g.f_at_zero,
    )
}

/// `f(t) + c(t − 1)`; leaves every divergence value unchanged.
pub fn affine_shift(g: &ConvexGenerator, c: f64) -> ConvexGenerator {
    ConvexGenerator::from_node(
        format!("shift({},{c})", g.name),
        Node::Shifted { base: g.clone(), c },
        g.f_at_zero - c,
        g.f_star_at_zero + c,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMethod {
    ClosedForm,
    FiniteDifference,
}

/// A lower bound `κ` on `f''` over an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaCertificate {
    pub interval: Interval,
    pub kappa: f64,
    pub method: CertificateMethod,
}

/// Outcome of sampling a certificate's interval with central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateCheck {
    /// Smallest `Δ²f(t)/h² − (κ − 1e−6·max(1, κ))` over the grid.
    pub worst_margin: f64,
    pub worst_point: f64,
}

impl CertificateCheck {
    pub fn passed(&self) -> bool {
        self.worst_margin >= 0.0
    }
}

impl KappaCertificate {
    /// Samples `CERTIFICATE_GRID` points of the clipped interval and compares the
    /// central second difference against κ.
    pub fn verify(&self, g: &ConvexGenerator) -> CertificateCheck {
        let floor = self.kappa - NUMERIC_KAPPA_MARGIN * self.kappa.max(1.0);
        let mut worst = CertificateCheck {
            worst_margin: f64::INFINITY,
            worst_point: f64::NAN,
        };
        for t in sample_grid(self.interval, CERTIFICATE_GRID) {
            let margin = central_second_difference(g, t) - floor;
            if margin.is_nan() || margin < worst.worst_margin {
                worst = CertificateCheck {
                    worst_margin: margin,
                    worst_point: t,
                };
            }
        }
        worst
    }
}

/// Grid over the clipped interval; geometric when it spans more than a decade.
pub fn sample_grid(interval: Interval, n: usize) -> Vec<f64> {
    let (lo, hi) = interval.clipped();
    if n < 2 || hi <= lo {
        return vec![lo];
    }
    let steps = (n - 1) as f64;
    if hi / lo > 10.0 {
        let (llo, lhi) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| (llo + (lhi - llo) * i as f64 / steps).exp().clamp(lo, hi))
            .collect()
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / steps).collect()
    }
}

/// `(f(t+h) − 2f(t) + f(t−h))/h²` with `h = 1e−4·max(1, t)`. Where `t − h`
/// would leave the positive axis the stencil shifts forward to
/// `(f(t+2h) − 2f(t+h) + f(t))/h²`; shrinking `h` instead drowns linear
/// generators in roundoff.
pub fn central_second_difference(g: &ConvexGenerator, t: f64) -> f64 {
    let h = 1e-4 * t.max(1.0);
    if t > h {
        (g.eval(t + h) - 2.0 * g.eval(t) + g.eval(t - h)) / (h * h)
    } else {
        (g.eval(t + 2.0 * h) - 2.0 * g.eval(t + h) + g.eval(t)) / (h * h)
    }
}

/// Certifies a κ for `g` on `interval`.
///
/// Built-ins have monotone `f''`, so the infimum is the closed form at the
/// appropriate endpoint (limits at 0 and ∞ follow from IEEE arithmetic).
/// Anything else falls back to a grid minimum of central second differences
/// minus [`NUMERIC_KAPPA_MARGIN`].
pub fn kappa_on(g: &ConvexGenerator, interval: Interval) -> Result<KappaCertificate> {
    interval.validate()?;
    if !interval.is_subset_of(&g.domain) {
        return Err(Error::OutsideDomain {
            generator: g.name.clone(),
            interval: interval.to_string(),
            domain: g.domain.to_string(),
        });
    }
    if let Some(b) = g.builtin() {
        let kappa = match b.monotonicity() {
            Monotonicity::Constant => b.second_derivative(1.0),
            Monotonicity::Decreasing => b.second_derivative(interval.hi),
            Monotonicity::Increasing => b.second_derivative(interval.lo),
        };
        return Ok(KappaCertificate {
            interval,
            kappa: kappa.max(0.0),
            method: CertificateMethod::ClosedForm,
        });
    }
    let kappa = sample_grid(interval, CERTIFICATE_GRID)
        .into_iter()
        .map(|t| central_second_difference(g, t))
        .fold(f64::INFINITY, f64::min);
    Ok(KappaCertificate {
        interval,
        kappa: (kappa - NUMERIC_KAPPA_MARGIN).max(0.0),
        method: CertificateMethod::FiniteDifference,
    })
}

/// κ over the observed likelihood-ratio range `[lo, hi]`, open at 0 and ∞.
/// A single-point range certifies `f''` at that point.
pub fn kappa_on_ratio_range(g: &ConvexGenerator, lo: f64, hi: f64) -> Result<KappaCertificate> {
    if lo == hi && lo > 0.0 && lo.is_finite() {
        let (kappa, method) = match g.builtin() {
            Some(b) => (b.second_derivative(lo), CertificateMethod::ClosedForm),
            None => (
                central_second_difference(g, lo) - NUMERIC_KAPPA_MARGIN,
                CertificateMethod::FiniteDifference,
            ),
        };
        return Ok(KappaCertificate {
            interval: Interval::closed(lo, hi),
            kappa: kappa.max(0.0),
            method,
        });
    }
    kappa_on(g, Interval::spanning(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_builtins() -> Vec<ConvexGenerator> {
        let mut v: Vec<_> = Builtin::NAMES[..8]
            .iter()
            .map(|n| make_builtin(n, &[]).unwrap())
            .collect();
        for s in [0.3, 1.0, 2.0] {
            v.push(make_builtin("sason_s", &[s]).unwrap());
        }
        for a in [-3.0, 0.0, 0.5, 2.5, 3.5] {
            v.push(make_builtin("alpha_divergence", &[a]).unwrap());
        }
        v
    }

    fn log_grid(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn pearson_row() {
        let g = make_builtin("pearson_chi2", &[]).unwrap();
        for t in [0.1, 0.5, 2.0, 7.0] {
            assert_eq!(g.eval(t), (t - 1.0) * (t - 1.0));
        }
        assert_eq!(g.f_at_zero(), 1.0);
        assert_eq!(g.f_star_at_zero(), f64::INFINITY);
    }

    #[test]
    fn vincze_le_cam_at_three() {
        let g = make_builtin("vincze_le_cam", &[]).unwrap();
        assert_relative_eq!(g.eval(3.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn every_generator_vanishes_at_one() {
        for g in all_builtins() {
            assert_eq!(g.eval(1.0), 0.0, "{}", g.name());
            assert!(dual(&g).eval(1.0).abs() < 1e-15);
            assert_eq!(affine_shift(&g, 2.5).eval(1.0), 0.0);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            make_builtin("sason_s", &[0.2]),
            Err(Error::ParameterOutOfRange { .. })
        ));
        assert!(make_builtin("sason_s", &[0.25]).is_ok());
        assert!(make_builtin("alpha_divergence", &[1.0]).is_err());
        assert!(make_builtin("alpha_divergence", &[-1.0]).is_err());
        assert!(matches!(
            make_builtin("bregman", &[]),
            Err(Error::UnknownDivergence(_))
        ));
        assert_eq!(parse_generator("alpha:0.5").unwrap().name(), "alpha:0.5");
        assert_eq!(parse_generator("sason:1.0").unwrap().name(), "sason:1");
        assert!(parse_generator("alpha:x").is_err());
    }

    #[test]
    fn boundary_limits_match_numeric_limits() {
        for g in all_builtins() {
            let near_zero = g.eval(1e-12);
            let f0 = g.f_at_zero();
            if f0.is_finite() {
                assert!(
                    (near_zero - f0).abs() <= 1e-4 * f0.abs().max(1.0),
                    "{}: f(1e-12) = {near_zero}, f(0) = {f0}",
                    g.name()
                );
            } else {
                assert!(near_zero > 20.0, "{}", g.name());
            }
            let slope = g.eval(1e24) / 1e24;
            let fs0 = g.f_star_at_zero();
            if fs0.is_finite() {
                assert!(
                    (slope - fs0).abs() <= 1e-4 * fs0.abs().max(1.0) + 2e-3,
                    "{}: f(1e24)/1e24 = {slope}, f*(0) = {fs0}",
                    g.name()
                );
            } else {
                assert!(slope > 5.0, "{}", g.name());
            }
        }
    }

    #[test]
    fn closed_form_second_derivatives_match_differences() {
        for g in all_builtins() {
            if g.name() == "total_variation" {
                continue;
            }
            for t in [0.05, 0.3, 0.9, 1.7, 4.0, 20.0] {
                let fd = central_second_difference(&g, t);
                let cf = g.second_derivative(t).unwrap();
                assert!((fd - cf).abs() <= 1e-4 * cf.abs().max(1.0), "{} at {t}: {fd} vs {cf}", g.name());
            }
        }
    }

    #[test]
    fn slopes_match_differences() {
        for g in all_builtins() {
            if let Some(s) = g.slope_at_one() {
                let h = 1e-6;
                let fd = (g.eval(1.0 + h) - g.eval(1.0 - h)) / (2.0 * h);
                assert!((fd - s).abs() < 1e-6, "{}: {fd} vs {s}", g.name());
            }
        }
    }

    #[test]
    fn kappa_examples() {
        let kl = make_builtin("kl", &[]).unwrap();
        let c = kappa_on(&kl, Interval::left_open(0.0, 4.0)).unwrap();
        assert_relative_eq!(c.kappa, 0.25);
        assert_eq!(c.method, CertificateMethod::ClosedForm);

        let chi2 = make_builtin("pearson_chi2", &[]).unwrap();
        assert_eq!(kappa_on(&chi2, Interval::positive_axis()).unwrap().kappa, 2.0);

        let js = make_builtin("jensen_shannon", &[]).unwrap();
        assert_relative_eq!(
            kappa_on(&js, Interval::left_open(0.0, 2.0)).unwrap().kappa,
            1.0 / 6.0,
            epsilon = 1e-15
        );
        // unbounded decreasing curvature has infimum 0
        assert_eq!(kappa_on(&kl, Interval::positive_axis()).unwrap().kappa, 0.0);
    }

    #[test]
    fn kappa_errors() {
        let kl = make_builtin("kl", &[]).unwrap();
        assert!(matches!(
            kappa_on(&kl, Interval::closed(2.0, 2.0)),
            Err(Error::InvalidInterval(_))
        ));
        assert!(matches!(
            kappa_on(&kl, Interval::closed(0.0, 2.0)),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(matches!(
            kappa_on(&kl, Interval::closed(-1.0, 2.0)),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn table_kappa_passes_finite_difference_certificate() {
        for g in all_builtins() {
            let b = g.builtin().unwrap();
            for m in [0.25, 0.5, 1.0, 2.0, 8.0] {
                let interval = b.table_domain(m);
                let cert = KappaCertificate {
                    interval,
                    kappa: b.table_kappa(m),
                    method: CertificateMethod::ClosedForm,
                };
                let check = cert.verify(&g);
                assert!(check.passed(), "{} M={m}: {check:?}", g.name());
                let derived = kappa_on(&g, interval).unwrap().kappa;
                assert!(
                    (derived - b.table_kappa(m)).abs() <= 1e-12 * derived.max(1.0),
                    "{} M={m}: {derived} vs {}",
                    g.name(),
                    b.table_kappa(m)
                );
            }
        }
    }

    #[test]
    fn overstated_kappa_fails_certificate() {
        let kl = make_builtin("kl", &[]).unwrap();
        let cert = KappaCertificate {
            interval: Interval::left_open(0.0, 2.0),
            kappa: 0.6,
            method: CertificateMethod::ClosedForm,
        };
        assert!(!cert.verify(&kl).passed());
    }

    #[test]
    fn numeric_kappa_for_derived_generators() {
        let kl = make_builtin("kl", &[]).unwrap();
        let shifted = affine_shift(&kl, 3.0);
        let c = kappa_on(&shifted, Interval::left_open(0.0, 2.0)).unwrap();
        assert_eq!(c.method, CertificateMethod::FiniteDifference);
        assert!(c.kappa <= 0.5 && c.kappa > 0.5 - 1e-5, "{c:?}");
        assert!(c.verify(&shifted).passed());
    }

    #[test]
    fn dual_certificate_scales_by_cube_of_left_endpoint() {
        for g in all_builtins() {
            let b = g.builtin().unwrap();
            if b.monotonicity() != Monotonicity::Decreasing {
                continue;
            }
            let (a, bb) = (0.5, 4.0);
            let k = kappa_on(&g, Interval::closed(a, bb)).unwrap().kappa;
            let dk = kappa_on(&dual(&g), Interval::closed(1.0 / bb, 1.0 / a)).unwrap().kappa;
            assert!(dk >= k * a.powi(3) - 1e-6, "{}: {dk} < {}", g.name(), k * a.powi(3));
        }
    }

    #[test]
    fn dual_examples() {
        let chi2 = make_builtin("pearson_chi2", &[]).unwrap();
        let neyman = make_builtin("neyman_chi2", &[]).unwrap();
        let d = dual(&chi2);
        for t in log_grid(101) {
            assert_relative_eq!(d.eval(t), (1.0 - t) * (1.0 - t) / t, max_relative = 1e-12);
            // (1-t)²/t = (1/t - 1) + (t - 1)
            assert_relative_eq!(
                d.eval(t),
                affine_shift(&neyman, 1.0).eval(t),
                epsilon = 1e-9,
                max_relative = 1e-12
            );
        }
        let tv = make_builtin("total_variation", &[]).unwrap();
        for t in log_grid(101) {
            assert_relative_eq!(dual(&tv).eval(t), tv.eval(t), max_relative = 1e-12, epsilon = 1e-15);
        }
        assert_eq!(d.f_at_zero(), chi2.f_star_at_zero());
        assert_eq!(d.f_star_at_zero(), chi2.f_at_zero());
    }

    #[test]
    fn dual_is_an_involution() {
        for g in all_builtins() {
            let dd = dual(&dual(&g));
            for t in log_grid(200) {
                let (a, b) = (dd.eval(t), g.eval(t));
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{} at {t}", g.name());
            }
            assert_eq!(dd.f_at_zero(), g.f_at_zero());
            assert_eq!(dd.f_star_at_zero(), g.f_star_at_zero());
        }
    }

    #[test]
    fn shift_examples() {
        let kl = make_builtin("kl", &[]).unwrap();
        let zero = affine_shift(&kl, 0.0);
        for t in log_grid(50) {
            assert_eq!(zero.eval(t), kl.eval(t));
        }
        let s = affine_shift(&kl, -1.0);
        let min = log_grid(2001).into_iter().map(|t| s.eval(t)).fold(f64::INFINITY, f64::min);
        assert!((0.0..1e-5).contains(&min));
        for g in all_builtins() {
            if let Some(n) = g.normalized() {
                for t in log_grid(200) {
                    assert!(n.eval(t) >= -1e-12 * n.eval(t).abs().max(1.0), "{} at {t}", g.name());
                }
            }
        }
    }

    #[test]
    fn three_point_convexity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kl = make_builtin("kl", &[]).unwrap();
        let mut gens = all_builtins();
        gens.push(dual(&kl));
        gens.push(affine_shift(&kl, -4.0));
        gens.push(kl.skewed(GeneratorSkewParams::new(0.2, 0.7).unwrap()));
        gens.push(kl.symmetrized());
        for g in &gens {
            for _ in 0..1000 {
                let x = 10f64.powf(rng.random_range(-3.0..3.0));
                let y = 10f64.powf(rng.random_range(-3.0..3.0));
                for t in [0.25, 0.5, 0.75] {
                    let lhs = g.eval((1.0 - t) * x + t * y);
                    let rhs = (1.0 - t) * g.eval(x) + t * g.eval(y);
                    assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0), "{} at {x},{y},{t}", g.name());
                }
            }
        }
    }

    #[test]
    fn kappa_jensen_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in all_builtins() {
            let b = g.builtin().unwrap();
            let interval = b.table_domain(2.0);
            let cert = kappa_on(&g, interval).unwrap();
            let (lo, hi) = interval.clipped();
            let hi = hi.min(50.0);
            for _ in 0..200 {
                let n = rng.random_range(2..6);
                let xs: Vec<f64> = (0..n).map(|_| rng.random_range(lo.max(1e-3)..hi)).collect();
                let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
                let sum: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= sum);
                let mean: f64 = xs.iter().zip(&w).map(|(x, w)| x * w).sum();
                let var: f64 = xs.iter().zip(&w).map(|(x, w)| w * (x - mean).powi(2)).sum();
                let ef: f64 = xs.iter().zip(&w).map(|(x, w)| w * g.eval(*x)).sum();
                let gap = ef - g.eval(mean) - cert.kappa / 2.0 * var;
                assert!(gap >= -1e-10 * ef.abs().max(1.0), "{}: gap {gap}", g.name());
            }
        }
    }

    #[test]
    fn skewed_and_symmetrized_second_derivatives() {
        let kl = make_builtin("kl", &[]).unwrap();
        let gens = [
            kl.skewed(GeneratorSkewParams::new(0.3, 0.8).unwrap()),
            kl.symmetrized(),
            dual(&kl),
        ];
        for g in &gens {
            for t in [0.1, 0.5, 1.0, 3.0] {
                let fd = central_second_difference(g, t);
                let cf = g.second_derivative(t).unwrap();
                assert!((fd - cf).abs() < 1e-5 * cf.abs().max(1.0), "{} at {t}", g.name());
            }
            if let Some(s) = g.slope_at_one() {
                let h = 1e-6;
                let fd = (g.eval(1.0 + h) - g.eval(1.0 - h)) / (2.0 * h);
                assert!((fd - s).abs() < 1e-6, "{}", g.name());
            }
        }
    }

    #[test]
    fn generators_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ConvexGenerator>();
    }
}
