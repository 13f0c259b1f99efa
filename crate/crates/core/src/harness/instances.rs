use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::InstanceDescriptor;
use crate::skew::SkewScheme;

/// Configuration of the random instance stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceGenerator {
    pub seed: u64,
    pub support_sizes: Vec<usize>,
    pub n_hypotheses: Vec<usize>,
    /// Lower end of the uniform atom weights; 0 also zeroes random atoms.
    pub mass_floor: f64,
    /// Instances per (support size, hypothesis count) configuration.
    pub count: usize,
}

impl Default for InstanceGenerator {
    fn default() -> Self {
        Self {
            seed: 42,
            support_sizes: vec![2, 4, 8, 16],
            n_hypotheses: vec![2, 3, 4],
            mass_floor: 0.0,
            count: 20,
        }
    }
}

/// Chance that a boundary-case draw loses one atom.
const ZERO_ATOM_PROBABILITY: f64 = 0.3;

/// Everything a check may need, drawn once per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub seed: u64,
    pub index: usize,
    pub support_size: usize,
    /// A pair `(P, Q)`; either may have empty atoms.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Strictly positive reference, for checks needing absolute continuity.
    pub q_full: Vec<f64>,
    pub hypotheses: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
    /// One strictly positive reference per hypothesis.
    pub references: Vec<Vec<f64>>,
    /// Skews strictly inside `(0, 1)`.
    pub scheme: SkewScheme,
    /// A skew pair `(α, β)` in `[0, 1]`.
    pub skew: (f64, f64),
    /// A two-block partition of the support (one block when `k = 1`).
    pub partition: Vec<Vec<usize>>,
    /// Uniform draws on `(−1, 1)`, one per atom.
    pub direction: Vec<f64>,
}

impl Instance {
    pub fn descriptor(&self, case: impl Into<String>) -> InstanceDescriptor {
        InstanceDescriptor {
            seed: self.seed,
            index: self.index,
            support_size: self.support_size,
            n_hypotheses: self.hypotheses.len(),
            case: case.into(),
        }
    }
}

impl InstanceGenerator {
    pub fn validate(&self) -> Result<()> {
        if self.support_sizes.is_empty() || self.support_sizes.contains(&0) {
            return Err(Error::Input("`support-sizes` needs positive entries".into()));
        }
        if self.n_hypotheses.is_empty() || self.n_hypotheses.iter().any(|&n| n < 2) {
            return Err(Error::Input("`hypotheses` needs entries of at least 2".into()));
        }
        if !(0.0..1.0).contains(&self.mass_floor) {
            return Err(Error::Input(format!(
                "`mass-floor` = {} must lie in [0, 1)",
                self.mass_floor
            )));
        }
        Ok(())
    }

    /// The full instance stream, drawn sequentially from one seeded RNG.
    pub fn instances(&self) -> Result<Vec<Instance>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        for &k in &self.support_sizes {
            for &n in &self.n_hypotheses {
                for _ in 0..self.count {
                    let index = out.len();
                    out.push(self.draw(&mut rng, index, k, n));
                }
            }
        }
        Ok(out)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, index: usize, k: usize, n: usize) -> Instance {
        let boundary = self.mass_floor == 0.0;
        let p = self.distribution(rng, k, boundary);
        let q = self.distribution(rng, k, boundary);
        let q_full = self.distribution(rng, k, false);
        let hypotheses = (0..n).map(|_| self.distribution(rng, k, boundary)).collect();
        let references = (0..n).map(|_| self.distribution(rng, k, false)).collect();
        let prior = normalize((0..n).map(|_| rng.random_range(0.05..1.0)).collect());

        let m = rng.random_range(2..=4);
        let alphas = (0..m).map(|_| rng.random_range(0.001..0.999)).collect();
        let weights = normalize((0..m).map(|_| rng.random_range(0.05..1.0)).collect());
        let scheme = SkewScheme::new(alphas, weights).expect("drawn scheme is valid");

        let skew = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        let partition = if k == 1 {
            vec![vec![0]]
        } else {
            let cut = rng.random_range(1..k);
            vec![(0..cut).collect(), (cut..k).collect()]
        };
        let direction = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        Instance {
            seed: self.seed,
            index,
            support_size: k,
            p,
            q,
            q_full,
            hypotheses,
            prior,
            references,
            scheme,
            skew,
            partition,
            direction,
        }
    }

    fn distribution(&self, rng: &mut ChaCha8Rng, k: usize, boundary: bool) -> Vec<f64> {
        let floor = self.mass_floor;
        let mut w: Vec<f64> = (0..k)
            .map(|_| if floor > 0.0 { rng.random_range(floor..1.0) } else { rng.random_range(0.0..1.0) })
            .collect();
        if boundary && k > 1 && rng.random_bool(ZERO_ATOM_PROBABILITY) {
            let i = rng.random_range(0..k);
            w[i] = 0.0;
        }
        if w.iter().all(|&x| x == 0.0) {
            w[0] = 1.0;
        }
        normalize(w)
    }
}

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_deterministic() {
        let g = InstanceGenerator {
            count: 5,
            ..InstanceGenerator::default()
        };
        assert_eq!(g.instances().unwrap(), g.instances().unwrap());
        let other = InstanceGenerator { seed: 43, ..g.clone() };
        assert_ne!(g.instances().unwrap(), other.instances().unwrap());
    }

    #[test]
    fn instances_are_valid() {
        let g = InstanceGenerator {
            count: 10,
            ..InstanceGenerator::default()
        };
        let all = g.instances().unwrap();
        assert_eq!(all.len(), 4 * 3 * 10);
        let mut zeroed = 0;
        for inst in &all {
            for v in [&inst.p, &inst.q, &inst.q_full]
                .into_iter()
                .chain(&inst.hypotheses)
                .chain(&inst.references)
            {
                assert_eq!(v.len(), inst.support_size);
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(v.iter().all(|&x| x >= 0.0));
            }
            assert!(inst.q_full.iter().all(|&x| x > 0.0));
            assert!(inst.references.iter().flatten().all(|&x| x > 0.0));
            zeroed += inst.p.iter().filter(|&&x| x == 0.0).count();
        }
        assert!(zeroed > 0);
    }

    #[test]
    fn positive_floor_avoids_empty_atoms() {
        let g = InstanceGenerator {
            mass_floor: 0.1,
            count: 10,
            ..InstanceGenerator::default()
        };
        for inst in g.instances().unwrap() {
            assert!(inst.p.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        let bad = InstanceGenerator {
            n_hypotheses: vec![1],
            ..InstanceGenerator::default()
        };
        assert!(bad.instances().is_err());
        let bad = InstanceGenerator {
            mass_floor: 1.5,
            ..InstanceGenerator::default()
        };
        assert!(bad.validate().is_err());
    }
}
