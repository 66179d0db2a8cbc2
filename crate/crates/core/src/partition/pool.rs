// SPDX-License-Identifier: Apache-2.0

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::init::{node_expansion_init, random_init};
use super::mincut::mincut_init;
use super::spectral::spectral_init;
use super::{Budget, PartitionSettings};
use crate::error::Result;
use crate::evaluate::{Evaluation, Evaluator};
use crate::floorplan::Mode;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Spectral,
    NodeExpansion,
    Random,
    Mincut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub origin: Origin,
    /// Requested chiplet count.
    pub k: usize,
    /// Seed the entry was generated with; refinement derives from it.
    pub seed: u64,
    pub labels: Vec<usize>,
    pub evaluation: Evaluation,
}

impl PoolEntry {
    pub fn cost(&self) -> f64 {
        self.evaluation.score
    }

    pub fn feasible(&self) -> bool {
        self.evaluation.feasible
    }
}

/// `count` values spread evenly over `lo..=hi`.
pub fn spread(count: usize, lo: usize, hi: usize) -> Vec<usize> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + ((i * (hi - lo)) as f64 / (count - 1) as f64).round() as usize)
            .collect(),
    }
}

fn specs(n: usize, genome_len: usize, budget: &Budget, settings: &PartitionSettings) -> Vec<(Origin, usize)> {
    let kmax = genome_len.min(n).max(1);
    let mut out = Vec::with_capacity(budget.pool_size());
    out.extend(std::iter::repeat((Origin::Spectral, settings.spectral_k.min(kmax))).take(budget.spectral));
    out.extend(std::iter::repeat((Origin::NodeExpansion, settings.expansion_k.min(kmax))).take(budget.expansion));
    out.extend(spread(budget.random, 1, kmax).into_iter().map(|k| (Origin::Random, k)));
    let mincut = if kmax >= 2 {
        spread(budget.mincut, 2, kmax)
    } else {
        vec![1; budget.mincut]
    };
    out.extend(mincut.into_iter().map(|k| (Origin::Mincut, k)));
    out
}

fn origin_tag(o: Origin) -> u64 {
    match o {
        Origin::Spectral => 1,
        Origin::NodeExpansion => 2,
        Origin::Random => 3,
        Origin::Mincut => 4,
    }
}

fn generate(ev: &Evaluator, origin: Origin, k: usize, seed: u64) -> (Origin, Vec<usize>) {
    let design = ev.design;
    let n = design.block_count();
    let settings = &design.config.partition;
    let made = match origin {
        Origin::Spectral => spectral_init(design, k, settings.kmeans_restarts, seed),
        Origin::NodeExpansion => node_expansion_init(design, k),
        Origin::Random => random_init(n, k, seed),
        Origin::Mincut if k == 1 => Ok(vec![0; n]),
        Origin::Mincut => mincut_init(design, k, settings.imbalance, seed),
    };
    match made {
        Ok(labels) => (origin, labels),
        Err(e) => {
            warn!("{origin:?} generator failed ({e}); padding the pool with a random partition");
            (Origin::Random, random_init(n, k, seed).unwrap_or_else(|_| vec![0; n]))
        }
    }
}

/// Initial partitioning pool for `genome`, each entry priced with a
/// fast-mode floorplan. Seeds depend on (origin, k, ordinal) so a smaller
/// budget's pool is a subset of a larger one's.
pub fn build_pool(ev: &Evaluator, genome: &[usize], budget: &Budget, seed: u64) -> Result<Vec<PoolEntry>> {
    let n = ev.design.block_count();
    let specs = specs(n, genome.len(), budget, &ev.design.config.partition);
    let mut seeded = Vec::with_capacity(specs.len());
    for (i, &(origin, k)) in specs.iter().enumerate() {
        let ordinal = specs[..i].iter().filter(|&&s| s == (origin, k)).count();
        seeded.push((origin, k, seeds::derive(seed, &[origin_tag(origin), k as u64, ordinal as u64])));
    }
    let fast = ev.design.config.floorplan.config(Mode::Fast).clone();
    seeded
        .par_iter()
        .map(|&(origin, k, entry_seed)| {
            let (origin, labels) = generate(ev, origin, k, entry_seed);
            let evaluation = ev.evaluate(&labels, genome, &fast.clone().with_seed(entry_seed))?;
            Ok(PoolEntry {
                origin,
                k,
                seed: entry_seed,
                labels,
                evaluation,
            })
        })
        .collect()
}

/// Indices (ascending) of the costs that survive pruning: drop z-score
/// above `prune_z` (sample standard deviation) or cost above
/// `prune_ratio` times the minimum, then top up to `min_survivors` with the
/// cheapest entries.
pub fn prune_costs(costs: &[f64], settings: &PartitionSettings) -> Vec<usize> {
    let finite: Vec<f64> = costs.iter().copied().filter(|c| c.is_finite()).collect();
    let m = finite.len();
    let mean = finite.iter().sum::<f64>() / m.max(1) as f64;
    let sd = if m > 1 {
        (finite.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt()
    } else {
        0.0
    };
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut keep: Vec<usize> = (0..costs.len())
        .filter(|&i| {
            let c = costs[i];
            let z = if sd > 0.0 { (c - mean) / sd } else { 0.0 };
            c.is_finite() && z <= settings.prune_z && c <= settings.prune_ratio * min
        })
        .collect();
    if keep.len() < settings.min_survivors {
        let mut order: Vec<usize> = (0..costs.len()).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
        keep = order.into_iter().take(settings.min_survivors).collect();
        keep.sort_unstable();
    }
    keep
}

pub fn prune_pool(pool: Vec<PoolEntry>, settings: &PartitionSettings) -> Vec<PoolEntry> {
    let costs: Vec<f64> = pool.iter().map(PoolEntry::cost).collect();
    let keep = prune_costs(&costs, settings);
    pool.into_iter()
        .enumerate()
        .filter(|(i, _)| keep.binary_search(i).is_ok())
        .map(|(_, e)| e)
        .collect()
}
