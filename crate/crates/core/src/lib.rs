//! Unbiased estimators for functions of data spread over several sampled
//! instances: max and OR under weight-oblivious and weighted (PPS) Poisson
//! sampling, a solver for order-based optimal estimators over finite
//! domains, a verification oracle, and sum aggregates built on them.

pub mod aggregates;
pub mod error;
pub mod experiments;
pub mod hash;
pub mod io;
pub mod model;
pub mod oblivious;
pub mod oracle;
pub mod qp;
pub mod quadrature;
pub mod sampling;
pub mod solver;
pub mod sum;
pub mod weighted;

pub use error::{Error, Result};
pub use hash::hash_seed;
pub use model::{consistent_set, ConsistentSet, Constraint, Coordination, DataVector, FunctionTag, Outcome, RankFamily, SamplingSpec, Scheme, SeedVector};
