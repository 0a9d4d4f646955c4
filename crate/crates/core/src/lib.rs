//! Simulation and analysis of planar stopped germ-grain models.
//!
//! Germs are sampled from a homogeneous Poisson process; from each germ a
//! grain grows along one or more branches and stops the first time one of its
//! heads touches another grain. The crate provides
//!
//! * [`point_process`]: seeded marked Poisson configurations,
//! * [`geometry`]: hit-time solver, hexagonal lattice and a uniform grid index,
//! * [`segment_engine`]: exact event-driven resolution for ray grains,
//! * [`generic_engine`]: the cluster-stepped construction for arbitrary paths
//!   (Brownian grains in particular),
//! * [`pog`]: the outdegree-one graph (stopper map) and percolation diagnostics,
//! * [`pollution`]: quick/slow splitting, pollution fields and shield hexagons.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled; every
//! entry point also takes an [`Exec`] so callers can force the sequential path.

pub mod error;
pub mod exec;
pub mod exploration;
pub mod generic_engine;
pub mod geometry;
pub mod pog;
pub mod point_process;
pub mod pollution;
pub mod rng;
pub mod segment_engine;
pub mod union_find;

pub use error::{Error, Result};
pub use exec::Exec;
pub use exploration::{GrainRecord, Outcome, Stop, StoppedExploration};
pub use geometry::{Point, Tolerances};
pub use point_process::{BranchLaw, MarkDistribution, MarkedConfiguration, MarkedPoint, Model, VelocityLaw, Window};
