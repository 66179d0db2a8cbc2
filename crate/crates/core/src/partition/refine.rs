// SPDX-License-Identifier: Apache-2.0

//! Cost-driven FM (single moves) and KL (pair swaps) refinement.
//!
//! Candidates are ranked by an estimate: the current sequence pair packed
//! with square chiplets, one evaluation each. Each applied move is then
//! floorplanned in the pass mode's annealer, and the pass rolls back to its
//! best prefix. Labels stay fixed during refinement, so a move may empty a
//! chiplet but never creates one.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evaluate::{restrict_sp, Evaluation, Evaluator};
use crate::floorplan::{Mode, SequencePair};
use crate::seeds;

/// Above this many blocks KL only pairs blocks adjacent to each other's
/// chiplet.
const KL_FULL_SCAN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fm,
    Kl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassTrace {
    pub method: Method,
    pub pass: usize,
    pub cost_before: f64,
    pub cost_after: f64,
    /// Moves (or swaps) kept after rollback.
    pub moves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineState {
    pub labels: Vec<usize>,
    pub evaluation: Evaluation,
}

/// Floorplans `labels` in `mode`, also trying the hint sequence pair with
/// square chiplets; the better of the two is kept.
pub(crate) fn settle(ev: &Evaluator, genome: &[usize], labels: &[usize], hint: &SequencePair, mode: Mode, seed: u64) -> Result<Evaluation> {
    let config = ev.design.config.floorplan.config(mode).clone().with_seed(seed);
    let annealed = ev.evaluate(labels, genome, &config)?;
    let packed = ev.evaluate_on(labels, genome, hint)?;
    Ok(if packed.score < annealed.score { packed } else { annealed })
}

struct Pass<'e, 'd> {
    ev: &'e Evaluator<'d>,
    genome: &'e [usize],
    labels: Vec<usize>,
    used: Vec<usize>,
    sp: SequencePair,
    counts: Vec<usize>,
}

impl<'e, 'd> Pass<'e, 'd> {
    fn new(ev: &'e Evaluator<'d>, genome: &'e [usize], state: &RefineState) -> Self {
        let mut counts = vec![0; state.labels.iter().copied().max().map_or(0, |m| m + 1)];
        for &c in &state.labels {
            counts[c] += 1;
        }
        Self {
            ev,
            genome,
            labels: state.labels.clone(),
            used: state.evaluation.labels.clone(),
            sp: state.evaluation.floorplan.sp.clone(),
            counts,
        }
    }

    fn estimate_move(&mut self, b: usize, t: usize) -> f64 {
        let s = self.labels[b];
        self.labels[b] = t;
        let est = if self.counts[s] == 1 {
            let used: Vec<usize> = self.used.iter().copied().filter(|&l| l != s).collect();
            let sp = restrict_sp(&self.sp, &self.used, &used);
            self.ev.estimate(&self.labels, self.genome, &sp)
        } else {
            self.ev.estimate(&self.labels, self.genome, &self.sp)
        };
        self.labels[b] = s;
        est
    }

    fn estimate_swap(&mut self, a: usize, b: usize) -> f64 {
        self.labels.swap(a, b);
        let est = self.ev.estimate(&self.labels, self.genome, &self.sp);
        self.labels.swap(a, b);
        est
    }

    fn apply(&mut self, eval: &Evaluation) {
        self.used.clone_from(&eval.labels);
        self.sp.clone_from(&eval.floorplan.sp);
    }
}

fn finish_pass(
    ev: &Evaluator,
    genome: &[usize],
    best: RefineState,
    mode: Mode,
    seed: u64,
) -> Result<RefineState> {
    if mode == Mode::Fast {
        return Ok(best);
    }
    let e = settle(ev, genome, &best.labels, &best.evaluation.floorplan.sp, mode, seed)?;
    Ok(if e.score < best.evaluation.score {
        RefineState {
            labels: best.labels,
            evaluation: e,
        }
    } else {
        best
    })
}

/// K-way FM. Each pass moves up to `fraction` of all blocks, one at a time,
/// always the unlocked block and target chiplet with the lowest estimated
/// cost (lower block, then lower chiplet, on ties), locks it, and keeps the
/// best prefix. Stops after a pass without improvement.
pub fn fm_refine(
    ev: &Evaluator,
    genome: &[usize],
    mut state: RefineState,
    passes: usize,
    fraction: f64,
    mode: Mode,
    seed: u64,
) -> Result<(RefineState, Vec<PassTrace>)> {
    let n = state.labels.len();
    let quota = ((fraction * n as f64).ceil() as usize).clamp(usize::from(n > 0), n);
    let mut trace = Vec::new();
    for pass in 0..passes {
        let before = state.evaluation.score;
        let mut p = Pass::new(ev, genome, &state);
        let mut locked = vec![false; n];
        let mut best = state.clone();
        let mut best_len = 0;
        for step in 0..quota {
            let mut pick: Option<(f64, usize, usize)> = None;
            for b in 0..n {
                if locked[b] {
                    continue;
                }
                for ti in 0..p.used.len() {
                    let t = p.used[ti];
                    if t == p.labels[b] {
                        continue;
                    }
                    let est = p.estimate_move(b, t);
                    if pick.map_or(true, |(e, _, _)| est < e) {
                        pick = Some((est, b, t));
                    }
                }
            }
            let Some((_, b, t)) = pick else { break };
            p.counts[p.labels[b]] -= 1;
            p.counts[t] += 1;
            p.labels[b] = t;
            locked[b] = true;
            let step_seed = seeds::derive(seed, &[0, pass as u64, step as u64]);
            let hint = restrict_sp(&p.sp, &p.used, &crate::evaluate::used_labels(&p.labels));
            let e = settle(ev, genome, &p.labels, &hint, Mode::Fast, step_seed)?;
            p.apply(&e);
            if e.score < best.evaluation.score {
                best = RefineState {
                    labels: p.labels.clone(),
                    evaluation: e,
                };
                best_len = step + 1;
            }
        }
        let pass_seed = seeds::derive(seed, &[1, pass as u64]);
        state = finish_pass(ev, genome, best, mode, pass_seed)?;
        trace.push(PassTrace {
            method: Method::Fm,
            pass,
            cost_before: before,
            cost_after: state.evaluation.score,
            moves: best_len,
        });
        if !(state.evaluation.score < before) {
            break;
        }
    }
    Ok((state, trace))
}

/// KL pair-swap refinement. Each pass swaps up to `fraction` of all blocks
/// (two per swap), picking the unlocked cross-chiplet pair with the lowest
/// estimated cost, and keeps the best prefix.
pub fn kl_refine(
    ev: &Evaluator,
    genome: &[usize],
    mut state: RefineState,
    passes: usize,
    fraction: f64,
    mode: Mode,
    seed: u64,
) -> Result<(RefineState, Vec<PassTrace>)> {
    let n = state.labels.len();
    let quota = ((fraction * n as f64 / 2.0).floor() as usize).max(1);
    let adjacency = &ev.design.adjacency;
    let mut trace = Vec::new();
    for pass in 0..passes {
        let before = state.evaluation.score;
        let mut p = Pass::new(ev, genome, &state);
        let mut locked = vec![false; n];
        let mut best = state.clone();
        let mut best_len = 0;
        for step in 0..quota {
            let mut pick: Option<(f64, usize, usize)> = None;
            for a in 0..n {
                if locked[a] {
                    continue;
                }
                for b in a + 1..n {
                    if locked[b] || p.labels[a] == p.labels[b] {
                        continue;
                    }
                    if n > KL_FULL_SCAN {
                        let (la, lb) = (p.labels[a], p.labels[b]);
                        let touches = adjacency[a].iter().any(|&(u, _)| p.labels[u] == lb)
                            || adjacency[b].iter().any(|&(u, _)| p.labels[u] == la);
                        if !touches {
                            continue;
                        }
                    }
                    let est = p.estimate_swap(a, b);
                    if pick.map_or(true, |(e, _, _)| est < e) {
                        pick = Some((est, a, b));
                    }
                }
            }
            let Some((_, a, b)) = pick else { break };
            p.labels.swap(a, b);
            locked[a] = true;
            locked[b] = true;
            let step_seed = seeds::derive(seed, &[2, pass as u64, step as u64]);
            let e = settle(ev, genome, &p.labels, &p.sp, Mode::Fast, step_seed)?;
            p.apply(&e);
            if e.score < best.evaluation.score {
                best = RefineState {
                    labels: p.labels.clone(),
                    evaluation: e,
                };
                best_len = step + 1;
            }
        }
        let pass_seed = seeds::derive(seed, &[3, pass as u64]);
        state = finish_pass(ev, genome, best, mode, pass_seed)?;
        trace.push(PassTrace {
            method: Method::Kl,
            pass,
            cost_before: before,
            cost_after: state.evaluation.score,
            moves: best_len,
        });
        if !(state.evaluation.score < before) {
            break;
        }
    }
    Ok((state, trace))
}
