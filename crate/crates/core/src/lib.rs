//! Multi-robot route planning where servicing one edge also observes
//! correlated edges nearby.
//!
//! The crate covers instance loading and validation, correlation weights,
//! route construction, a greedy planner, exact tools for small instances,
//! and helpers for generating, clustering, rendering and benchmarking.

pub mod apps;
pub mod correlation;
pub mod exact;
pub mod geometry;
pub mod greedy;
pub mod instance;
pub mod routing;

pub use correlation::WeightModel;
pub use greedy::{solve_greedy, GreedyConfig};
pub use instance::{DistanceTable, Instance, InstanceFile};
pub use routing::{Route, ServiceArc, Solution};
