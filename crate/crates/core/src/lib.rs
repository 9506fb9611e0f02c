//! Planning and asynchronous execution of intermittent-communication
//! schedules for networks of mobile robots.
//!
//! Robots move along a mobility graph and can only exchange data when every
//! member of a team is present at one of that team's communication points.
//! The crate builds, for every robot, an infinite motion plan in lasso form
//! (a finite prefix followed by a repeated suffix) such that every team meets
//! infinitely often, while each team's rendezvous leg is distance-optimal:
//!
//! 1. [`network`] validates the mobility graph and the team structure.
//! 2. [`ts`] abstracts each robot into a weighted transition system and forms
//!    lazy per-team products.
//! 3. [`buchi`] supplies the "meet infinitely often" automaton and the product
//!    Büchi automaton.
//! 4. [`planner`] finds cheapest rendezvous legs over the product automaton.
//! 5. [`coordination`] assembles conflict-free per-robot rounds and detects
//!    the prefix/suffix structure.
//! 6. [`executor`] runs the plans in continuous time with heterogeneous
//!    speeds and checks connectivity over time.

pub mod buchi;
pub mod config;
pub mod coordination;
pub mod executor;
pub mod gen;
pub mod ids;
pub mod network;
pub mod planner;
pub mod report;
pub mod ts;

mod search;

pub use config::Config;
pub use coordination::{MotionPlan, PlanOptions, Planner};
pub use executor::{simulate, ExecutionTrace, SimOptions};
pub use ids::{LocationId, RobotId, TeamId};
pub use network::Network;

/// Absolute tolerance used when comparing accumulated distances and times.
pub const EPS: f64 = 1e-9;

/// Golden five-robot scenario (teams of the classic five-team example).
pub const GOLDEN_CONFIG: &str = include_str!("../golden/scenario.json");
