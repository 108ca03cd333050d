//! Rare-event simulation engine for seismic connectivity reliability of
//! lifeline networks.
//!
//! The crate estimates two-terminal, k-terminal and k-out-of-N connectivity
//! reliability under spatially correlated ground motion, using subset
//! simulation driven by informative (piecewise continuous) network limit-state
//! functions, and produces entire fragility curves over moment magnitude in a
//! single specialized run.
//!
//! Module map:
//! - [`gmpe`]: ground-motion attenuation, component reliability indices and
//!   the joint Gaussian distribution of logarithmic safety margins.
//! - [`netgraph`]: network graph, survival masks, BFS/Dijkstra path searches.
//! - [`limitstate`]: binary, most-reliable-path and shortest-path limit-state
//!   functions plus k-terminal / k-out-of-N aggregation.
//! - [`sampler`]: Cholesky-mapped standard-normal space, exact-rotation HMC
//!   kernel and conditional level population.
//! - [`subsetsim`]: fixed-magnitude subset simulation estimator.
//! - [`fragility`]: specialized subset simulation sweeping moment magnitude,
//!   divide-and-conquer intervals, multi-state damage curves.
//! - [`reference`]: independent oracles (crude Monte Carlo, exact 2-D
//!   quadrature) used for validation.
//! - [`fixtures`]: deterministic example systems used by tests and the CLI.

pub mod error;
pub mod fixtures;
pub mod fragility;
pub mod gmpe;
pub mod limitstate;
mod mat;
pub mod netgraph;
mod normal;
pub mod reference;
pub mod sampler;
pub mod subsetsim;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
