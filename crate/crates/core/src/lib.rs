// SPDX-License-Identifier: Apache-2.0

//! Cost-driven 2.5D chiplet partitioning.
//!
//! A block-level [`model::Netlist`] is split into chiplets by
//! [`partition::core_chipletpart`]; [`ga::evolve`] searches chiplet count and
//! per-chiplet technology around it. Every candidate is floorplanned by the
//! reach-aware annealer in [`floorplan`] and priced by [`cost`].

pub mod cost;
pub mod defaults;
mod error;
pub mod evaluate;
pub mod floorplan;
pub mod ga;
pub mod io;
pub mod model;
pub mod partition;
pub mod seeds;
pub mod testgen;

#[cfg(test)]
mod fixtures;

pub use error::{Error, Result};
