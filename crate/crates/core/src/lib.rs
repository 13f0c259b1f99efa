//! f-divergences between finite distributions: κ-convex generators, skew
//! constructions, Bayes-risk decompositions, and a randomized harness that
//! checks the inequalities relating them.

pub mod bayes;
pub mod cli;
pub mod distribution;
pub mod divergence;
pub mod error;
pub mod generator;
pub mod harness;
pub mod io;
pub mod report;
pub mod skew;

pub use distribution::DiscreteDistribution;
pub use divergence::{
    binary_divergence, chi_square, f_divergence, jsd, kl, ratio_range, total_variation,
    DivergenceValue,
};
pub use error::{Error, Result};
pub use generator::{
    affine_shift, dual, kappa_on, make_builtin, parse_generator, Builtin, ConvexGenerator,
    Interval, KappaCertificate,
};
pub use report::{CheckReport, Verdict};
pub use skew::{GeneratorSkewParams, SkewScheme};
