// SPDX-License-Identifier: Apache-2.0

//! Core partitioner: an initial pool from several generators, statistical
//! pruning, then cost-driven FM and KL refinement of the survivors.

mod driver;
mod init;
mod mincut;
mod pool;
mod refine;
mod spectral;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floorplan::Mode;

pub use driver::{core_chipletpart, PartitionResult, PoolSummary};
pub use init::{node_expansion_init, random_init};
pub use mincut::{cut_size, mincut_init};
pub use pool::{build_pool, prune_costs, prune_pool, spread, Origin, PoolEntry};
pub use refine::{fm_refine, kl_refine, Method, PassTrace, RefineState};
pub use spectral::{kmeans, spectral_embedding, spectral_init};

/// Block-to-chiplet assignment with compact labels `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub k: usize,
}

impl Partition {
    /// Compacts arbitrary labels to `0..k` preserving label order. Returns
    /// the partition and the original label of each new one.
    pub fn compact(labels: &[usize]) -> (Self, Vec<usize>) {
        let used = crate::evaluate::used_labels(labels);
        let mut map = vec![usize::MAX; used.last().map_or(0, |&l| l + 1)];
        for (i, &l) in used.iter().enumerate() {
            map[l] = i;
        }
        let assignment = labels.iter().map(|&l| map[l]).collect();
        (
            Self {
                assignment,
                k: used.len(),
            },
            used,
        )
    }

    pub fn monolithic(n: usize) -> Self {
        Self {
            assignment: vec![0; n],
            k: usize::from(n > 0),
        }
    }

    pub fn validate(&self, blocks: usize) -> Result<()> {
        if self.assignment.len() != blocks {
            return Err(Error::InvalidValue(format!(
                "partition covers {} blocks, netlist has {blocks}",
                self.assignment.len()
            )));
        }
        let mut used = vec![false; self.k];
        for &c in &self.assignment {
            if c >= self.k {
                return Err(Error::InvalidValue(format!("chiplet index {c} >= k = {}", self.k)));
            }
            used[c] = true;
        }
        if let Some(empty) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidValue(format!("chiplet {empty} is empty")));
        }
        Ok(())
    }
}

/// Search effort of one core partitioner run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub spectral: usize,
    pub expansion: usize,
    pub random: usize,
    pub mincut: usize,
    pub fm_passes: usize,
    /// Fraction of all blocks moved per FM pass.
    pub fm_fraction: f64,
    pub kl_passes: usize,
    /// Fraction of all blocks touched by swaps per KL pass.
    pub kl_fraction: f64,
    /// Floorplanner mode between refinement passes.
    pub pass_mode: Mode,
    /// Floorplanner mode for the final evaluation of each survivor.
    pub final_mode: Mode,
}

impl Budget {
    pub fn full() -> Self {
        Self {
            spectral: 1,
            expansion: 1,
            random: 5,
            mincut: 4,
            fm_passes: 4,
            fm_fraction: 0.5,
            kl_passes: 4,
            kl_fraction: 0.1,
            pass_mode: Mode::Standard,
            final_mode: Mode::Standard,
        }
    }

    /// Inner-loop budget for GA fitness evaluation.
    pub fn reduced() -> Self {
        Self {
            spectral: 1,
            expansion: 1,
            random: 3,
            mincut: 2,
            fm_passes: 2,
            fm_fraction: 0.25,
            kl_passes: 1,
            kl_fraction: 0.1,
            pass_mode: Mode::Fast,
            final_mode: Mode::Fast,
        }
    }

    pub fn pool_size(&self) -> usize {
        self.spectral + self.expansion + self.random + self.mincut
    }

    pub fn validate(&self) -> Result<()> {
        if self.pool_size() == 0 {
            return Err(Error::InvalidValue("partition pool budget is empty".into()));
        }
        for f in [self.fm_fraction, self.kl_fraction] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidValue("refinement fractions must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSettings {
    pub spectral_k: usize,
    pub expansion_k: usize,
    /// Balance tolerance of the min-cut generator.
    pub imbalance: f64,
    pub kmeans_restarts: usize,
    /// Pool entries with a z-score above this are pruned.
    pub prune_z: f64,
    /// Pool entries costing more than this multiple of the minimum are pruned.
    pub prune_ratio: f64,
    pub min_survivors: usize,
    pub full: Budget,
    pub reduced: Budget,
}

impl Default for PartitionSettings {
    fn default() -> Self {
        Self {
            spectral_k: 4,
            expansion_k: 4,
            imbalance: 0.05,
            kmeans_restarts: 10,
            prune_z: 1.5,
            prune_ratio: 2.0,
            min_survivors: 3,
            full: Budget::full(),
            reduced: Budget::reduced(),
        }
    }
}

impl PartitionSettings {
    pub fn validate(&self) -> Result<()> {
        if self.spectral_k == 0 || self.expansion_k == 0 {
            return Err(Error::InvalidValue("spectral_k and expansion_k must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.imbalance) {
            return Err(Error::InvalidValue("imbalance must lie in [0, 1)".into()));
        }
        if self.min_survivors == 0 || self.kmeans_restarts == 0 {
            return Err(Error::InvalidValue("min_survivors and kmeans_restarts must be >= 1".into()));
        }
        if self.prune_ratio < 1.0 {
            return Err(Error::InvalidValue("prune_ratio must be >= 1".into()));
        }
        self.full.validate()?;
        self.reduced.validate()
    }
}
