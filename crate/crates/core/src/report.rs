//! Per-check verdicts and their JSON form.

use serde::{Deserialize, Serialize};

/// Default absolute tolerance on margins.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Serde for extended reals: finite values as JSON numbers, `±∞` and NaN as
/// the strings `"inf"`, `"-inf"` and `"nan"`.
pub mod extended {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct Extended;

        impl Visitor<'_> for Extended {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(Extended)
    }
}

/// Which way an inequality points: `lhs ≥ rhs`, `lhs ≤ rhs`, or equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

impl Relation {
    /// Signed slack; negative means violated. Equalities use `−|lhs − rhs|`.
    pub fn margin(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::Ge => slack(lhs, rhs),
            Relation::Le => slack(rhs, lhs),
            Relation::Eq => {
                if lhs == rhs {
                    0.0
                } else {
                    -(lhs - rhs).abs()
                }
            }
        }
    }
}

/// `big − small` with `∞ − ∞ = 0`.
fn slack(big: f64, small: f64) -> f64 {
    if big == small {
        0.0
    } else {
        big - small
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { reason: String },
    Skipped { reason: String },
    /// Evaluated within tolerance on an instance with a vanishing
    /// decomposition component.
    Degenerate { reason: String },
}

impl Verdict {
    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail { .. } => "fail",
            Verdict::Skipped { .. } => "skipped",
            Verdict::Degenerate { .. } => "degenerate",
        }
    }
}

/// Where an instance came from, enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub seed: u64,
    pub index: usize,
    pub support_size: usize,
    pub n_hypotheses: usize,
    /// Generator, skew or other sub-case the report refers to.
    pub case: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub instance: InstanceDescriptor,
    pub relation: Relation,
    #[serde(with = "extended")]
    pub lhs: f64,
    #[serde(with = "extended")]
    pub rhs: f64,
    #[serde(with = "extended")]
    pub margin: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// Alternative constants evaluated alongside; they never affect the verdict.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub monitors: Vec<Monitor>,
}

/// A secondary form of a bound, tracked without grading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub form: String,
    pub case: String,
    #[serde(with = "extended")]
    pub lhs: f64,
    #[serde(with = "extended")]
    pub rhs: f64,
    #[serde(with = "extended")]
    pub margin: f64,
    pub holds: bool,
}

impl Monitor {
    pub fn new(form: &str, case: &str, relation: Relation, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = relation.margin(lhs, rhs);
        Self {
            form: form.to_string(),
            case: case.to_string(),
            lhs,
            rhs,
            margin,
            holds: margin >= -tolerance,
        }
    }
}

impl CheckReport {
    /// Grades `lhs relation rhs` with the given tolerance. Any NaN fails.
    pub fn evaluate(
        check_id: &str,
        instance: InstanceDescriptor,
        relation: Relation,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let margin = relation.margin(lhs, rhs);
        let verdict = if lhs.is_nan() || rhs.is_nan() || margin.is_nan() {
            Verdict::Fail {
                reason: "NaN in evaluation".into(),
            }
        } else if margin >= -tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail {
                reason: format!("margin {margin:e} below -{tolerance:e}"),
            }
        };
        Self {
            check_id: check_id.to_string(),
            instance,
            relation,
            lhs,
            rhs,
            margin,
            verdict,
            tolerance,
            monitors: Vec::new(),
        }
    }

    pub fn skipped(check_id: &str, instance: InstanceDescriptor, reason: impl Into<String>) -> Self {
        Self {
            check_id: check_id.to_string(),
            instance,
            relation: Relation::Ge,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            verdict: Verdict::Skipped {
                reason: reason.into(),
            },
            tolerance: 0.0,
            monitors: Vec::new(),
        }
    }

    /// Relabels a passing verdict as degenerate.
    pub fn degenerate_if(mut self, flag: Option<String>) -> Self {
        if let (Some(reason), Verdict::Pass) = (flag, &self.verdict) {
            self.verdict = Verdict::Degenerate { reason };
        }
        self
    }

    pub fn with_monitors(mut self, monitors: Vec<Monitor>) -> Self {
        self.monitors = monitors;
        self
    }

    pub fn with_case(mut self, case: impl Into<String>) -> Self {
        self.instance.case = case.into();
        self
    }
}
