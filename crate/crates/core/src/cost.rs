// SPDX-License-Identifier: Apache-2.0

//! System cost: die cost and yield per chiplet, assembly, NRE amortization,
//! discretized IO cells, and the power model.
//!
//! ```text
//! total = (assembly_cost + sum(die_cost / die_yield)) / assembly_yield + nre_total / volume
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floorplan::Floorplan;
use crate::model::{Design, ObjectiveWeights, TechNode};

/// Negative-binomial die yield `(1 + A*D/alpha)^-alpha`, area in mm^2 and
/// defect density per cm^2.
pub fn die_yield(area_mm2: f64, tech: &TechNode) -> f64 {
    let faults = area_mm2 / 100.0 * tech.defect_density;
    if faults == 0.0 {
        return 1.0;
    }
    (1.0 + faults / tech.clustering_alpha).powf(-tech.clustering_alpha)
}

fn dies_in_grid(width: f64, height: f64, radius: f64, ox: f64, oy: f64) -> u64 {
    let r2 = radius * radius;
    let j_lo = ((-radius - oy) / height).floor() as i64;
    let j_hi = ((radius - oy) / height).ceil() as i64;
    let mut count = 0u64;
    for j in j_lo..=j_hi {
        let y0 = oy + j as f64 * height;
        let y1 = y0 + height;
        let far = y0.abs().max(y1.abs());
        if far > radius {
            continue;
        }
        let half = (r2 - far * far).sqrt();
        let i_lo = ((-half - ox) / width).ceil() as i64;
        let i_hi = ((half - ox) / width).floor() as i64 - 1;
        if i_hi >= i_lo {
            count += (i_hi - i_lo + 1) as u64;
        }
    }
    count
}

/// Whole `width x height` dies that fit inside the usable wafer disc (edge
/// exclusion removed), best of four grid alignments.
pub fn dies_per_wafer(width: f64, height: f64, tech: &TechNode) -> u64 {
    let radius = tech.wafer_diameter / 2.0 - tech.edge_exclusion;
    [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)]
        .iter()
        .map(|&(fx, fy)| dies_in_grid(width, height, radius, fx * width, fy * height))
        .max()
        .unwrap_or(0)
}

/// Silicon cost of one square die of `area` (yield applied separately).
pub fn die_cost(area: f64, tech: &TechNode) -> Result<f64> {
    if area > tech.reticle_max_area {
        return Err(Error::ReticleViolation {
            tech: tech.id.clone(),
            area,
            limit: tech.reticle_max_area,
        });
    }
    let side = area.sqrt();
    let dies = dies_per_wafer(side, side, tech);
    if dies == 0 {
        return Err(Error::ReticleViolation {
            tech: tech.id.clone(),
            area,
            limit: tech.reticle_max_area,
        });
    }
    Ok(tech.wafer_cost / dies as f64)
}

/// A chiplet: the blocks it holds, its technology, and its IO cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chiplet {
    pub blocks: Vec<usize>,
    pub tech: usize,
    /// Block area plus IO cell area, mm^2.
    pub area: f64,
    /// Cell count per IO cell type.
    pub io_cells: Vec<u64>,
}

/// IO cells per chiplet (indexed by label) and IO cell type: every cut net
/// puts `ceil(bandwidth / bits_per_cell)` cells on both endpoint chiplets.
pub fn io_cells_for_cut(assignment: &[usize], labels: usize, design: &Design) -> Vec<Vec<u64>> {
    let io_types = design.config.io_cells.len();
    let mut cells = vec![vec![0u64; io_types]; labels];
    for e in &design.edges {
        let (ca, cb) = (assignment[e.source], assignment[e.sink]);
        if ca == cb {
            continue;
        }
        let n = design.config.io_cells[e.io].cells_for(e.bandwidth);
        cells[ca][e.io] += n;
        cells[cb][e.io] += n;
    }
    cells
}

/// Builds the non-empty chiplets of `assignment`, in ascending label order.
/// `genome[label]` is the technology of each label.
pub fn build_chiplets(assignment: &[usize], genome: &[usize], design: &Design) -> Result<Vec<Chiplet>> {
    let labels = assignment.iter().copied().max().map_or(0, |m| m + 1);
    if labels > genome.len() {
        return Err(Error::InvalidValue(format!(
            "partition uses {labels} chiplet labels but the genome has {} genes",
            genome.len()
        )));
    }
    let io = io_cells_for_cut(assignment, labels, design);
    let mut members = vec![Vec::new(); labels];
    for (b, &c) in assignment.iter().enumerate() {
        members[c].push(b);
    }
    let mut out = Vec::new();
    for (label, blocks) in members.into_iter().enumerate() {
        if blocks.is_empty() {
            continue;
        }
        let tech = genome[label];
        if tech >= design.tech_count() {
            return Err(Error::UnknownTech(format!("index {tech}")));
        }
        let mut area: f64 = blocks.iter().map(|&b| design.scaled_area[tech][b]).sum();
        for (t, &n) in io[label].iter().enumerate() {
            area += n as f64 * design.config.io_cells[t].cell_area;
        }
        out.push(Chiplet {
            blocks,
            tech,
            area,
            io_cells: io[label].clone(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub chiplet_count: usize,
    pub techs: Vec<String>,
    /// Die area used for cost (floorplan shape area), mm^2.
    pub die_areas: Vec<f64>,
    pub die_costs: Vec<f64>,
    pub die_yields: Vec<f64>,
    pub package_area: f64,
    pub substrate_cost: f64,
    pub bond_cost: f64,
    pub assembly_cost: f64,
    pub assembly_yield: f64,
    pub nre_total: f64,
    pub volume: f64,
    pub total: f64,
    pub block_power: f64,
    pub io_power: f64,
    pub power_total: f64,
    pub cut_bits: u64,
}

impl CostBreakdown {
    /// Recomposes the total from the itemized terms.
    pub fn recompute_total(&self) -> f64 {
        let dies: f64 = self
            .die_costs
            .iter()
            .zip(&self.die_yields)
            .map(|(c, y)| c / y)
            .sum();
        (self.assembly_cost + dies) / self.assembly_yield + self.nre_total / self.volume
    }
}

/// Cost and power of a partition under `genome`. Die areas and the package
/// come from `floorplan` (chiplets in ascending label order) when given;
/// otherwise dies are at their required area and the package is their sum.
pub fn system_cost(assignment: &[usize], genome: &[usize], design: &Design, floorplan: Option<&Floorplan>) -> Result<CostBreakdown> {
    let chiplets = build_chiplets(assignment, genome, design)?;
    let cfg = &design.config;
    let count = chiplets.len();
    if let Some(fp) = floorplan {
        if fp.shapes.len() != count {
            return Err(Error::InvalidValue(format!(
                "floorplan has {} chiplets, partition has {count}",
                fp.shapes.len()
            )));
        }
    }
    let mut die_areas = Vec::with_capacity(count);
    let mut die_costs = Vec::with_capacity(count);
    let mut die_yields = Vec::with_capacity(count);
    let mut nre_total = 0.0;
    let mut techs = Vec::with_capacity(count);
    for (i, c) in chiplets.iter().enumerate() {
        let tech = &cfg.technologies[c.tech];
        let area = floorplan.map_or(c.area, |fp| fp.shapes[i].area().max(c.area));
        die_costs.push(die_cost(area, tech)?);
        die_yields.push(die_yield(area, tech));
        die_areas.push(area);
        nre_total += tech.nre_design_cost;
        techs.push(tech.id.clone());
    }
    let package_area = floorplan.map_or_else(|| die_areas.iter().sum(), Floorplan::package_area);
    let substrate_cost = package_area * cfg.assembly.substrate_cost_per_mm2;
    let bond_cost = cfg.assembly.cost_per_bond * count as f64;
    let assembly_cost = substrate_cost + bond_cost;
    let assembly_yield = cfg.assembly.bond_yield.powi(count as i32);

    let mut label_tech = vec![usize::MAX; genome.len()];
    for (label, &t) in genome.iter().enumerate() {
        label_tech[label] = t;
    }
    let block_power: f64 = assignment
        .iter()
        .enumerate()
        .map(|(b, &c)| design.scaled_power[label_tech[c]][b])
        .sum();
    let mut io_power = 0.0;
    let mut cut_bits = 0u64;
    for e in &design.edges {
        if assignment[e.source] != assignment[e.sink] {
            cut_bits += e.bandwidth;
            io_power += e.bandwidth as f64 * cfg.io_cells[e.io].energy_per_bit;
        }
    }

    let mut breakdown = CostBreakdown {
        chiplet_count: count,
        techs,
        die_areas,
        die_costs,
        die_yields,
        package_area,
        substrate_cost,
        bond_cost,
        assembly_cost,
        assembly_yield,
        nre_total,
        volume: cfg.volume,
        total: 0.0,
        block_power,
        io_power,
        power_total: block_power + io_power,
        cut_bits,
    };
    breakdown.total = breakdown.recompute_total();
    Ok(breakdown)
}

/// Normalizers for the mixed objective: the monolithic design in its
/// cheapest homogeneous technology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub cost: f64,
    pub power: f64,
    pub tech: usize,
}

/// Monolithic cost in one technology, ignoring the reticle limit.
fn monolithic(design: &Design, tech: usize) -> (f64, f64) {
    let cfg = &design.config;
    let t = &cfg.technologies[tech];
    let area: f64 = design.scaled_area[tech].iter().sum();
    let side = area.sqrt();
    let dies = dies_per_wafer(side, side, t).max(1);
    let die = t.wafer_cost / dies as f64;
    let assembly = area * cfg.assembly.substrate_cost_per_mm2 + cfg.assembly.cost_per_bond;
    let cost = (assembly + die / die_yield(area, t)) / cfg.assembly.bond_yield + t.nre_design_cost / cfg.volume;
    let power = design.scaled_power[tech].iter().sum();
    (cost, power)
}

pub fn baseline(design: &Design) -> Baseline {
    let mut best = Baseline {
        cost: f64::INFINITY,
        power: 0.0,
        tech: 0,
    };
    for t in 0..design.tech_count() {
        let (cost, power) = monolithic(design, t);
        if cost < best.cost {
            best = Baseline { cost, power, tech: t };
        }
    }
    best
}

/// Weighted sum of normalized cost and normalized power.
pub fn mixed_objective(breakdown: &CostBreakdown, weights: &ObjectiveWeights, baseline: &Baseline) -> f64 {
    let power_norm = if baseline.power > 0.0 {
        breakdown.power_total / baseline.power
    } else {
        0.0
    };
    weights.cost_weight * breakdown.total / baseline.cost + weights.power_weight * power_norm
}
