//! Analytical ABER: MGFs of the squared Euclidean distance between
//! hypotheses, their PEP integrals, and the union bound.

pub mod mgf;
pub mod moments;
pub mod pep;
pub mod quadrature;

pub use mgf::{mgf_quadratic_gaussian, PreparedQuadraticForm, QuadraticFormStats};
pub use moments::{pair_moments, printed_z1_mean, printed_z1_variances, z1_stats, PairMoments};
pub use pep::{
    analyze, mgf_z1_cross, mgf_z1_cross_exponent, mgf_z2, pair_mgf, union_bound_aber,
    AberPoint, AberResult, AnalysisOptions, CrossExponent, MgfModel, PairMgf, PepCase, PepEntry,
    PepMethod, UnionBound,
};
pub use quadrature::{pep_closed_bound, pep_quadrature, pep_quadrature_with, GaussLegendre};
