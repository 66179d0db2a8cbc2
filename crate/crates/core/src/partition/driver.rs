// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pool::{build_pool, prune_costs, Origin};
use super::refine::{fm_refine, kl_refine, settle, PassTrace, RefineState};
use super::{Budget, Partition};
use crate::error::{Error, Result};
use crate::evaluate::{Evaluation, Evaluator};
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSummary {
    pub origin: Origin,
    pub k: usize,
    pub initial_cost: f64,
    pub survived: bool,
    /// Cost after refinement and the final floorplan, for survivors.
    pub refined_cost: Option<f64>,
    pub feasible: bool,
    /// Pass-by-pass refinement costs, for survivors.
    pub trace: Vec<PassTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub partition: Partition,
    /// Technology index of each chiplet of `partition`.
    pub genome: Vec<usize>,
    /// Evaluation of `partition`; chiplet `i` is partition label `i`.
    pub evaluation: Evaluation,
    pub pool: Vec<PoolSummary>,
}

impl PartitionResult {
    pub fn cost(&self) -> f64 {
        self.evaluation.score
    }

    pub fn feasible(&self) -> bool {
        self.evaluation.feasible
    }

    pub fn traces(&self) -> impl Iterator<Item = &PassTrace> {
        self.pool.iter().flat_map(|p| p.trace.iter())
    }
}

fn check_genome(ev: &Evaluator, genome: &[usize]) -> Result<()> {
    if genome.is_empty() {
        return Err(Error::InvalidValue("genome is empty".into()));
    }
    if let Some(&t) = genome.iter().find(|&&t| t >= ev.design.tech_count()) {
        return Err(Error::UnknownTech(format!("index {t}")));
    }
    Ok(())
}

/// Pool, prune, refine each survivor with FM then KL, floorplan it in the
/// budget's final mode, and return the cheapest, feasible solutions first.
/// Chiplet `l` of the working partitions uses `genome[l]`.
pub fn core_chipletpart(ev: &Evaluator, genome: &[usize], budget: &Budget, seed: u64) -> Result<PartitionResult> {
    check_genome(ev, genome)?;
    let settings = &ev.design.config.partition;
    let pool = build_pool(ev, genome, budget, seed)?;
    let mut summaries: Vec<PoolSummary> = pool
        .iter()
        .map(|e| PoolSummary {
            origin: e.origin,
            k: e.k,
            initial_cost: e.cost(),
            survived: false,
            refined_cost: None,
            feasible: e.feasible(),
            trace: Vec::new(),
        })
        .collect();
    let costs: Vec<f64> = pool.iter().map(|e| e.cost()).collect();
    let kept_idx = prune_costs(&costs, settings);

    let refined: Vec<Result<(usize, RefineState, Vec<PassTrace>)>> = kept_idx
        .par_iter()
        .map(|&i| {
            let entry = &pool[i];
            let state = RefineState {
                labels: entry.labels.clone(),
                evaluation: entry.evaluation.clone(),
            };
            let (state, mut trace) = fm_refine(ev, genome, state, budget.fm_passes, budget.fm_fraction, budget.pass_mode, seeds::derive(entry.seed, &[10]))?;
            let (state, kl_trace) = kl_refine(ev, genome, state, budget.kl_passes, budget.kl_fraction, budget.pass_mode, seeds::derive(entry.seed, &[11]))?;
            trace.extend(kl_trace);
            let last = settle(ev, genome, &state.labels, &state.evaluation.floorplan.sp, budget.final_mode, seeds::derive(entry.seed, &[12]))?;
            // keep the pass-mode floorplan if the final one is worse
            let state = if last.score <= state.evaluation.score {
                RefineState {
                    labels: state.labels,
                    evaluation: last,
                }
            } else {
                state
            };
            Ok((i, state, trace))
        })
        .collect();

    let mut best: Option<(usize, RefineState)> = None;
    for r in refined {
        let (i, state, trace) = r?;
        let s = &mut summaries[i];
        s.survived = true;
        s.refined_cost = Some(state.evaluation.score);
        s.feasible = state.evaluation.feasible;
        s.trace = trace;
        let better = match &best {
            None => true,
            Some((_, b)) => {
                let (e, f) = (&state.evaluation, &b.evaluation);
                (e.feasible && !f.feasible) || (e.feasible == f.feasible && e.score < f.score)
            }
        };
        if better {
            best = Some((i, state));
        }
    }
    let (_, state) = best.expect("pruning keeps at least one entry");
    let (partition, used) = Partition::compact(&state.labels);
    let mut evaluation = state.evaluation;
    evaluation.labels = (0..partition.k).collect();
    Ok(PartitionResult {
        genome: used.iter().map(|&l| genome[l]).collect(),
        partition,
        evaluation,
        pool: summaries,
    })
}
