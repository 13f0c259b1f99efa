use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest deviation of the total mass from 1 that is silently renormalized.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A probability distribution on a finite set of labelled atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct DiscreteDistribution {
    support: Vec<String>,
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    support: Vec<String>,
    mass: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        Self::new(raw.support, raw.mass)
    }
}

impl From<DiscreteDistribution> for RawDistribution {
    fn from(d: DiscreteDistribution) -> Self {
        RawDistribution {
            support: d.support,
            mass: d.mass,
        }
    }
}

impl DiscreteDistribution {
    pub fn new(support: Vec<String>, mass: Vec<f64>) -> Result<Self> {
        if support.len() != mass.len() {
            return Err(Error::InvalidDistribution(format!(
                "field `mass` has {} entries but `support` has {}",
                mass.len(),
                support.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("field `support` is empty".into()));
        }
        let mut seen = HashSet::with_capacity(support.len());
        for label in &support {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidDistribution(format!(
                    "field `support` repeats label `{label}`"
                )));
            }
        }
        for (label, &m) in support.iter().zip(&mass) {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "field `mass` at `{label}` is {m}; masses must be finite and nonnegative"
                )));
            }
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "field `mass` sums to {total}, not 1"
            )));
        }
        let mass = if total == 1.0 {
            mass
        } else {
            mass.into_iter().map(|m| m / total).collect()
        };
        Ok(Self { support, mass })
    }

    /// Labels atoms `0, 1, …`.
    pub fn from_masses(mass: Vec<f64>) -> Result<Self> {
        let support = (0..mass.len()).map(|i| i.to_string()).collect();
        Self::new(support, mass)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_masses(vec![1.0 / n as f64; n])
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass_of(&self, label: &str) -> f64 {
        self.support
            .iter()
            .position(|l| l == label)
            .map_or(0.0, |i| self.mass[i])
    }

    /// Sums masses over groups of atom indices; the groups must cover every
    /// atom exactly once. Group labels join member labels with `+`.
    pub fn coarsen(&self, partition: &[Vec<usize>]) -> Result<Self> {
        let mut hit = vec![false; self.len()];
        for group in partition {
            if group.is_empty() {
                return Err(Error::MalformedPartition("empty group".into()));
            }
            for &i in group {
                if i >= self.len() {
                    return Err(Error::MalformedPartition(format!(
                        "atom index {i} out of range for {} atoms",
                        self.len()
                    )));
                }
                if std::mem::replace(&mut hit[i], true) {
                    return Err(Error::MalformedPartition(format!("atom {i} appears twice")));
                }
            }
        }
        if let Some(i) = hit.iter().position(|h| !h) {
            return Err(Error::MalformedPartition(format!("atom {i} is not covered")));
        }
        let support = partition
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&i| self.support[i].as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect();
        let mass = partition
            .iter()
            .map(|g| g.iter().map(|&i| self.mass[i]).sum())
            .collect();
        Self::new(support, mass)
    }
}

/// Two distributions written over the union of their supports.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub support: Vec<String>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

/// Aligns `p` and `q` on the union of their labels (first `p`'s, then the new
/// ones of `q`); missing atoms get mass 0.
pub fn align(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Aligned {
    if p.support == q.support {
        return Aligned {
            support: p.support.clone(),
            p: p.mass.clone(),
            q: q.mass.clone(),
        };
    }
    align_many(&[p, q]).into_aligned_pair()
}

/// Several distributions over the union of their supports.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedFamily {
    pub support: Vec<String>,
    pub masses: Vec<Vec<f64>>,
}

impl AlignedFamily {
    fn into_aligned_pair(mut self) -> Aligned {
        let q = self.masses.pop().unwrap_or_default();
        let p = self.masses.pop().unwrap_or_default();
        Aligned {
            support: self.support,
            p,
            q,
        }
    }
}

pub fn align_many(dists: &[&DiscreteDistribution]) -> AlignedFamily {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut support: Vec<String> = Vec::new();
    for d in dists {
        for label in &d.support {
            if !index.contains_key(label.as_str()) {
                index.insert(label.as_str(), support.len());
                support.push(label.clone());
            }
        }
    }
    let masses = dists
        .iter()
        .map(|d| {
            let mut m = vec![0.0; support.len()];
            for (label, &x) in d.support.iter().zip(&d.mass) {
                m[index[label.as_str()]] = x;
            }
            m
        })
        .collect();
    AlignedFamily { support, masses }
}

/// `(1 − w)·p + w·q`, atomwise.
pub fn mixture(p: &[f64], q: &[f64], w: f64) -> Vec<f64> {
    p.iter().zip(q).map(|(a, b)| (1.0 - w) * a + w * b).collect()
}
