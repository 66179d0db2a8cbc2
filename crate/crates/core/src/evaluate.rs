// SPDX-License-Identifier: Apache-2.0

//! Scores a (partition, genome) pair: derives the chiplet-level floorplanning
//! problem, floorplans it, and prices the result.
//!
//! Working partitions use fixed labels that may be empty; label `l` is built
//! in technology `genome[l]`. Chiplet `i` of a floorplan is the `i`-th
//! non-empty label in ascending order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cost::{baseline, build_chiplets, mixed_objective, system_cost, Baseline, CostBreakdown};
use crate::error::Result;
use crate::floorplan::{anneal, check_feasible, AnnealConfig, ChipletNet, FeasibilityReport, Floorplan, FloorplanProblem, FpObjective, SequencePair, Shape};
use crate::model::Design;

/// Added to the score of infeasible solutions so any feasible solution wins.
pub const INFEASIBLE_OFFSET: f64 = 1.0e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Non-empty labels, ascending; chiplet `i` is `labels[i]`.
    pub labels: Vec<usize>,
    /// Technology index of each chiplet.
    pub techs: Vec<usize>,
    pub floorplan: Floorplan,
    pub fp_objective: FpObjective,
    pub feasibility: FeasibilityReport,
    /// `None` when the solution cannot be manufactured (reticle violation).
    pub breakdown: Option<CostBreakdown>,
    /// Mixed cost/power objective; infinite when `breakdown` is `None`.
    pub objective: f64,
    pub feasible: bool,
    /// What the optimizers minimize: the objective when feasible, penalized
    /// otherwise.
    pub score: f64,
    pub error: Option<String>,
}

pub fn score(objective: f64, wl_reach: f64, feasible: bool) -> f64 {
    if feasible {
        objective
    } else {
        INFEASIBLE_OFFSET + objective + wl_reach
    }
}

/// Non-empty labels of `assignment`, ascending.
pub fn used_labels(assignment: &[usize]) -> Vec<usize> {
    let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut used = vec![false; k];
    for &c in assignment {
        used[c] = true;
    }
    (0..k).filter(|&l| used[l]).collect()
}

/// Re-indexes a sequence pair over `old` labels to one over `new` labels
/// (which must be a subset of `old`).
pub fn restrict_sp(sp: &SequencePair, old: &[usize], new: &[usize]) -> SequencePair {
    let remap: Vec<Option<usize>> = old.iter().map(|l| new.iter().position(|m| m == l)).collect();
    let fix = |v: &[usize]| v.iter().filter_map(|&i| remap[i]).collect();
    SequencePair {
        first: fix(&sp.first),
        second: fix(&sp.second),
    }
}

/// Shared, read-only evaluation context for one design.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    pub design: &'a Design,
    pub baseline: Baseline,
}

impl<'a> Evaluator<'a> {
    pub fn new(design: &'a Design) -> Self {
        Self {
            design,
            baseline: baseline(design),
        }
    }

    /// Chiplet-level floorplanning problem for `assignment`: one chiplet per
    /// used label, nets aggregated per chiplet pair and IO type.
    pub fn problem(&self, assignment: &[usize], genome: &[usize]) -> Result<(Vec<usize>, FloorplanProblem)> {
        let design = self.design;
        let labels = used_labels(assignment);
        let chiplets = build_chiplets(assignment, genome, design)?;
        let mut index = vec![usize::MAX; labels.last().map_or(0, |&l| l + 1)];
        for (i, &l) in labels.iter().enumerate() {
            index[l] = i;
        }
        let mut agg: BTreeMap<(usize, usize, usize), (u64, u64)> = BTreeMap::new();
        for e in &design.edges {
            let (a, b) = (index[assignment[e.source]], index[assignment[e.sink]]);
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b), e.io);
            let entry = agg.entry(key).or_default();
            entry.0 += e.bandwidth;
            entry.1 += design.config.io_cells[e.io].cells_for(e.bandwidth);
        }
        let nets = agg
            .into_iter()
            .map(|((a, b, io), (bits, cells))| {
                let cell = &design.config.io_cells[io];
                ChipletNet {
                    a,
                    b,
                    bits,
                    io_area: cells as f64 * cell.cell_area,
                    reach: cell.reach,
                }
            })
            .collect();
        let settings = &design.config.floorplan;
        let problem = FloorplanProblem {
            required_areas: chiplets.iter().map(|c| c.area).collect(),
            nets,
            separation: design.config.assembly.separation,
            coefficients: settings.coefficients,
            aspect_limit: settings.aspect_limit,
        };
        Ok((labels, problem))
    }

    fn reticle_ok(&self, labels: &[usize], genome: &[usize], problem: &FloorplanProblem) -> bool {
        labels
            .iter()
            .zip(&problem.required_areas)
            .all(|(&l, &a)| a <= self.design.config.technologies[genome[l]].reticle_max_area)
    }

    fn finish(&self, assignment: &[usize], genome: &[usize], labels: Vec<usize>, problem: &FloorplanProblem, floorplan: Floorplan) -> Evaluation {
        let fp_objective = problem.objective(&floorplan);
        let feasibility = check_feasible(&floorplan, &problem.nets, problem.separation);
        let techs = labels.iter().map(|&l| genome[l]).collect();
        let (breakdown, error) = match system_cost(assignment, genome, self.design, Some(&floorplan)) {
            Ok(b) => (Some(b), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let objective = breakdown
            .as_ref()
            .map_or(f64::INFINITY, |b| mixed_objective(b, &self.design.config.weights, &self.baseline));
        let feasible = feasibility.feasible && breakdown.is_some();
        Evaluation {
            labels,
            techs,
            score: score(objective, fp_objective.wl_reach, feasible),
            floorplan,
            fp_objective,
            feasibility,
            breakdown,
            objective,
            feasible,
            error,
        }
    }

    /// Floorplans with the annealer and prices the result.
    pub fn evaluate(&self, assignment: &[usize], genome: &[usize], config: &AnnealConfig) -> Result<Evaluation> {
        let (labels, problem) = self.problem(assignment, genome)?;
        let floorplan = if self.reticle_ok(&labels, genome, &problem) {
            anneal(&problem, config).floorplan
        } else {
            let shapes = problem.required_areas.iter().map(|&a| Shape::square(a)).collect();
            problem.realize(SequencePair::identity(labels.len()), shapes).0
        };
        Ok(self.finish(assignment, genome, labels, &problem, floorplan))
    }

    /// Prices `assignment` on a given sequence pair (over its used labels)
    /// with every chiplet square at its required area. One packing, no
    /// annealing.
    pub fn evaluate_on(&self, assignment: &[usize], genome: &[usize], sp: &SequencePair) -> Result<Evaluation> {
        let (labels, problem) = self.problem(assignment, genome)?;
        let shapes = problem.required_areas.iter().map(|&a| Shape::square(a)).collect();
        let floorplan = problem.realize(sp.clone(), shapes).0;
        Ok(self.finish(assignment, genome, labels, &problem, floorplan))
    }

    /// Score of [`Evaluator::evaluate_on`], infinite on error.
    pub fn estimate(&self, assignment: &[usize], genome: &[usize], sp: &SequencePair) -> f64 {
        self.evaluate_on(assignment, genome, sp).map_or(f64::INFINITY, |e| e.score)
    }
}
