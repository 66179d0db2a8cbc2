// SPDX-License-Identifier: Apache-2.0

//! Default technology, IO and assembly tables.
//!
//! These numbers are shipped defaults, not calibrated foundry data. The
//! anchors are the usual public rules of thumb: logic shrinks about 10x from
//! 45nm to 10nm, wafer cost grows about 2.6x and design NRE about 4.6x over
//! the same span, and SRAM scales much worse than logic. Everything else is
//! interpolated. Override any entry from the config file.

use crate::floorplan::FloorplanSettings;
use crate::ga::GaConfig;
use crate::model::{Assembly, IoCellType, ObjectiveWeights, SystemConfig, TechNode, SCHEMA_VERSION};
use crate::partition::PartitionSettings;

#[allow(clippy::too_many_arguments)]
fn node(
    id: &str,
    logic: f64,
    memory: f64,
    power: f64,
    wafer_cost: f64,
    defect_density: f64,
    nre: f64,
) -> TechNode {
    TechNode {
        id: id.to_string(),
        logic_area_scale: logic,
        memory_area_scale: memory,
        power_scale: power,
        wafer_cost,
        wafer_diameter: 300.0,
        defect_density,
        clustering_alpha: 3.0,
        nre_design_cost: nre,
        reticle_max_area: 858.0,
        edge_exclusion: 3.0,
    }
}

/// 45nm reference plus 14/10/7nm.
pub fn technologies() -> Vec<TechNode> {
    vec![
        node("45nm", 1.0, 1.0, 1.0, 2300.0, 0.07, 1.0e6),
        node("14nm", 0.16, 0.36, 0.42, 4000.0, 0.09, 2.1e6),
        node("10nm", 0.10, 0.30, 0.33, 6000.0, 0.11, 4.6e6),
        node("7nm", 0.065, 0.27, 0.25, 9300.0, 0.13, 7.5e6),
    ]
}

pub const PARALLEL_IO: &str = "parallel";
pub const UCIE_STANDARD: &str = "ucie_std";
pub const UCIE_ADVANCED: &str = "ucie_adv";

pub fn io_cells() -> Vec<IoCellType> {
    vec![
        IoCellType {
            id: PARALLEL_IO.into(),
            cell_area: 0.0025,
            reach: 10.0,
            bits_per_cell: 1,
            energy_per_bit: 5.0e-4,
        },
        IoCellType {
            id: UCIE_STANDARD.into(),
            cell_area: 0.88,
            reach: 25.0,
            bits_per_cell: 64,
            energy_per_bit: 1.0e-3,
        },
        IoCellType {
            id: UCIE_ADVANCED.into(),
            cell_area: 0.44,
            reach: 2.0,
            bits_per_cell: 64,
            energy_per_bit: 5.0e-4,
        },
    ]
}

pub fn assembly() -> Assembly {
    Assembly {
        cost_per_bond: 1.0,
        bond_yield: 0.99,
        substrate_cost_per_mm2: 0.005,
        separation: 0.5,
    }
}

pub fn system_config() -> SystemConfig {
    SystemConfig {
        version: SCHEMA_VERSION,
        technologies: technologies(),
        io_cells: io_cells(),
        assembly: assembly(),
        volume: 1.0e7,
        weights: ObjectiveWeights::default(),
        ga: GaConfig::default(),
        floorplan: FloorplanSettings::default(),
        partition: PartitionSettings::default(),
    }
}
