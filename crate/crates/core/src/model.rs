// SPDX-License-Identifier: Apache-2.0

//! Domain data model: blocks, nets, technology and IO tables, system
//! configuration, and the resolved [`Design`] the optimizers work on.
//!
//! Netlist and config files are JSON documents carrying a `version` field;
//! see `docs/FORMATS.md` for the schema.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floorplan::FloorplanSettings;
use crate::ga::GaConfig;
use crate::partition::PartitionSettings;

pub const SCHEMA_VERSION: u32 = 1;

pub(crate) fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    #[default]
    Logic,
    Memory,
}

/// An IP block, sized in its reference technology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    /// mm^2 in `reference_tech`.
    pub area: f64,
    /// W in `reference_tech`.
    pub power: f64,
    pub reference_tech: String,
    #[serde(default)]
    pub kind: BlockKind,
}

/// Two-pin directed connection. Bandwidth is counted per direction; a
/// bidirectional link is two nets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub source: String,
    pub sink: String,
    /// Bit width of the connection.
    pub bandwidth: u64,
    /// IO cell type id that drives this net when it is cut.
    pub reach_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub blocks: Vec<Block>,
    pub nets: Vec<Net>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechNode {
    pub id: String,
    /// Logic area relative to the common reference node.
    pub logic_area_scale: f64,
    pub memory_area_scale: f64,
    pub power_scale: f64,
    pub wafer_cost: f64,
    /// mm
    pub wafer_diameter: f64,
    /// defects / cm^2
    pub defect_density: f64,
    /// Negative-binomial clustering parameter.
    pub clustering_alpha: f64,
    pub nre_design_cost: f64,
    /// mm^2
    pub reticle_max_area: f64,
    /// Unusable ring at the wafer edge, mm.
    #[serde(default = "default_edge_exclusion")]
    pub edge_exclusion: f64,
}

fn default_edge_exclusion() -> f64 {
    3.0
}

impl TechNode {
    pub fn area_scale(&self, kind: BlockKind) -> f64 {
        match kind {
            BlockKind::Logic => self.logic_area_scale,
            BlockKind::Memory => self.memory_area_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoCellType {
    pub id: String,
    /// mm^2 per cell.
    pub cell_area: f64,
    /// Longest wire (mm) a cell can drive.
    pub reach: f64,
    pub bits_per_cell: u64,
    /// IO power drawn per cut bit (W per bit lane at the nominal link rate).
    pub energy_per_bit: f64,
}

impl IoCellType {
    pub fn cells_for(&self, bandwidth: u64) -> u64 {
        bandwidth.div_ceil(self.bits_per_cell)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assembly {
    pub cost_per_bond: f64,
    /// Probability that bonding one chiplet succeeds.
    pub bond_yield: f64,
    pub substrate_cost_per_mm2: f64,
    /// Minimum spacing between chiplets, mm.
    pub separation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub cost_weight: f64,
    pub power_weight: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            cost_weight: 1.0,
            power_weight: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub technologies: Vec<TechNode>,
    pub io_cells: Vec<IoCellType>,
    pub assembly: Assembly,
    pub volume: f64,
    #[serde(default)]
    pub weights: ObjectiveWeights,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub floorplan: FloorplanSettings,
    #[serde(default)]
    pub partition: PartitionSettings,
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn schema(context: &str, err: serde_json::Error) -> Error {
    Error::Schema {
        context: context.to_string(),
        message: err.to_string(),
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidValue(msg()))
    }
}

pub(crate) fn check_version(context: &str, version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Schema {
            context: context.to_string(),
            message: format!("unsupported schema version {version}, expected {SCHEMA_VERSION}"),
        });
    }
    Ok(())
}

impl Netlist {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let netlist: Netlist = serde_json::from_str(text).map_err(|e| schema("netlist", e))?;
        check_version("netlist", netlist.version)?;
        Ok(netlist)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes")
    }

    pub fn block_index(&self) -> Result<HashMap<&str, usize>> {
        let mut index = HashMap::with_capacity(self.blocks.len());
        for (i, b) in self.blocks.iter().enumerate() {
            if index.insert(b.id.as_str(), i).is_some() {
                return Err(Error::DuplicateId(format!("block `{}`", b.id)));
            }
        }
        Ok(index)
    }

    /// Checks ids, endpoints and value ranges against `config`.
    pub fn validate(&self, config: &SystemConfig) -> Result<()> {
        let index = self.block_index()?;
        for b in &self.blocks {
            check(b.area > 0.0 && b.area.is_finite(), || {
                format!("block `{}` area must be > 0", b.id)
            })?;
            check(b.power >= 0.0 && b.power.is_finite(), || {
                format!("block `{}` power must be >= 0", b.id)
            })?;
            if config.tech_index(&b.reference_tech).is_none() {
                return Err(Error::DanglingReference(format!(
                    "block `{}` references unknown technology `{}`",
                    b.id, b.reference_tech
                )));
            }
        }
        for n in &self.nets {
            for end in [&n.source, &n.sink] {
                if !index.contains_key(end.as_str()) {
                    return Err(Error::DanglingReference(format!(
                        "net {} -> {} references unknown block `{end}`",
                        n.source, n.sink
                    )));
                }
            }
            check(n.source != n.sink, || {
                format!("self-loop net on block `{}`", n.source)
            })?;
            check(n.bandwidth >= 1, || {
                format!("net {} -> {} has zero bandwidth", n.source, n.sink)
            })?;
            if config.io_index(&n.reach_class).is_none() {
                return Err(Error::DanglingReference(format!(
                    "net {} -> {} references unknown IO cell type `{}`",
                    n.source, n.sink, n.reach_class
                )));
            }
        }
        Ok(())
    }

    pub fn total_area(&self, config: &SystemConfig, tech: &str) -> Result<f64> {
        let mut total = 0.0;
        for b in &self.blocks {
            total += config.scale_block(b, tech)?.0;
        }
        Ok(total)
    }
}

impl SystemConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: SystemConfig = serde_json::from_str(text).map_err(|e| schema("config", e))?;
        check_version("config", config.version)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn tech_index(&self, id: &str) -> Option<usize> {
        self.technologies.iter().position(|t| t.id == id)
    }

    pub fn io_index(&self, id: &str) -> Option<usize> {
        self.io_cells.iter().position(|t| t.id == id)
    }

    pub fn tech(&self, id: &str) -> Result<&TechNode> {
        self.tech_index(id)
            .map(|i| &self.technologies[i])
            .ok_or_else(|| Error::UnknownTech(id.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        check(!self.technologies.is_empty(), || {
            "technology table is empty".into()
        })?;
        let mut seen = HashMap::new();
        for t in &self.technologies {
            if seen.insert(t.id.as_str(), ()).is_some() {
                return Err(Error::DuplicateId(format!("technology `{}`", t.id)));
            }
            let positive = [
                ("logic_area_scale", t.logic_area_scale),
                ("memory_area_scale", t.memory_area_scale),
                ("power_scale", t.power_scale),
                ("wafer_cost", t.wafer_cost),
                ("wafer_diameter", t.wafer_diameter),
                ("clustering_alpha", t.clustering_alpha),
                ("nre_design_cost", t.nre_design_cost),
                ("reticle_max_area", t.reticle_max_area),
            ];
            for (name, v) in positive {
                check(v > 0.0 && v.is_finite(), || {
                    format!("technology `{}` {name} must be > 0", t.id)
                })?;
            }
            check(t.defect_density >= 0.0, || {
                format!("technology `{}` defect_density must be >= 0", t.id)
            })?;
            check(
                t.edge_exclusion >= 0.0 && 2.0 * t.edge_exclusion < t.wafer_diameter,
                || format!("technology `{}` edge_exclusion out of range", t.id),
            )?;
        }
        let mut seen = HashMap::new();
        for io in &self.io_cells {
            if seen.insert(io.id.as_str(), ()).is_some() {
                return Err(Error::DuplicateId(format!("IO cell type `{}`", io.id)));
            }
            check(io.cell_area > 0.0, || {
                format!("IO cell `{}` cell_area must be > 0", io.id)
            })?;
            check(io.reach > 0.0, || format!("IO cell `{}` reach must be > 0", io.id))?;
            check(io.bits_per_cell >= 1, || {
                format!("IO cell `{}` bits_per_cell must be >= 1", io.id)
            })?;
            check(io.energy_per_bit >= 0.0, || {
                format!("IO cell `{}` energy_per_bit must be >= 0", io.id)
            })?;
        }
        let a = &self.assembly;
        check(a.bond_yield > 0.0 && a.bond_yield <= 1.0, || {
            "bond_yield must be in (0, 1]".into()
        })?;
        check(a.separation >= 0.0, || "separation must be >= 0".into())?;
        check(a.cost_per_bond >= 0.0 && a.substrate_cost_per_mm2 >= 0.0, || {
            "assembly costs must be >= 0".into()
        })?;
        check(self.volume >= 1.0, || "volume must be >= 1".into())?;
        let w = self.weights;
        check(
            (0.0..=1.0).contains(&w.cost_weight) && (0.0..=1.0).contains(&w.power_weight),
            || "objective weights must lie in [0, 1]".into(),
        )?;
        check((w.cost_weight + w.power_weight - 1.0).abs() < 1e-9, || {
            "objective weights must sum to 1".into()
        })?;
        self.ga.validate()?;
        self.floorplan.validate()?;
        self.partition.validate()?;
        Ok(())
    }

    /// Area and power of `block` re-targeted to technology `target`.
    pub fn scale_block(&self, block: &Block, target: &str) -> Result<(f64, f64)> {
        let reference = self
            .tech(&block.reference_tech)
            .map_err(|_| Error::DanglingReference(block.reference_tech.clone()))?;
        let target = self.tech(target)?;
        Ok(scale_block(block, reference, target))
    }
}

/// Re-targets a block from its reference node to `target` by the ratio of
/// the two nodes' scale factors.
pub fn scale_block(block: &Block, reference: &TechNode, target: &TechNode) -> (f64, f64) {
    if reference.id == target.id {
        return (block.area, block.power);
    }
    let area = block.area * (target.area_scale(block.kind) / reference.area_scale(block.kind));
    let power = block.power * (target.power_scale / reference.power_scale);
    (area, power)
}

/// Reads and cross-validates a netlist file and a config file.
pub fn parse_system(netlist_file: &Path, config_file: &Path) -> Result<(Netlist, SystemConfig)> {
    let config = SystemConfig::from_json_str(&read(config_file)?)?;
    let netlist = Netlist::from_json_str(&read(netlist_file)?)?;
    netlist.validate(&config)?;
    Ok((netlist, config))
}

pub fn load_config(path: &Path) -> Result<SystemConfig> {
    SystemConfig::from_json_str(&read(path)?)
}

pub fn load_netlist(path: &Path) -> Result<Netlist> {
    Netlist::from_json_str(&read(path)?)
}

/// A resolved directed net.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub sink: usize,
    pub bandwidth: u64,
    pub io: usize,
}

/// Index-resolved view of a netlist under a config. Immutable and shared
/// read-only by every optimizer.
#[derive(Debug, Clone)]
pub struct Design {
    pub netlist: Netlist,
    pub config: SystemConfig,
    pub edges: Vec<Edge>,
    /// Undirected neighbour lists with summed bandwidth, sorted by neighbour.
    pub adjacency: Vec<Vec<(usize, u64)>>,
    /// Edge indices incident to each block.
    pub incident: Vec<Vec<usize>>,
    /// `scaled_area[tech][block]`, mm^2.
    pub scaled_area: Vec<Vec<f64>>,
    /// `scaled_power[tech][block]`, W.
    pub scaled_power: Vec<Vec<f64>>,
}

impl Design {
    pub fn new(netlist: Netlist, config: SystemConfig) -> Result<Self> {
        config.validate()?;
        netlist.validate(&config)?;
        let index = netlist.block_index()?;
        let n = netlist.blocks.len();
        let edges: Vec<Edge> = netlist
            .nets
            .iter()
            .map(|net| Edge {
                source: index[net.source.as_str()],
                sink: index[net.sink.as_str()],
                bandwidth: net.bandwidth,
                io: config.io_index(&net.reach_class).expect("validated"),
            })
            .collect();
        let mut incident = vec![Vec::new(); n];
        let mut weights: Vec<HashMap<usize, u64>> = vec![HashMap::new(); n];
        for (i, e) in edges.iter().enumerate() {
            incident[e.source].push(i);
            incident[e.sink].push(i);
            *weights[e.source].entry(e.sink).or_default() += e.bandwidth;
            *weights[e.sink].entry(e.source).or_default() += e.bandwidth;
        }
        let adjacency = weights
            .into_iter()
            .map(|m| {
                let mut v: Vec<(usize, u64)> = m.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        let mut scaled_area = Vec::with_capacity(config.technologies.len());
        let mut scaled_power = Vec::with_capacity(config.technologies.len());
        for target in &config.technologies {
            let (a, p): (Vec<f64>, Vec<f64>) = netlist
                .blocks
                .iter()
                .map(|b| {
                    let reference = config.tech(&b.reference_tech).expect("validated");
                    scale_block(b, reference, target)
                })
                .unzip();
            scaled_area.push(a);
            scaled_power.push(p);
        }
        Ok(Self {
            netlist,
            config,
            edges,
            adjacency,
            incident,
            scaled_area,
            scaled_power,
        })
    }

    pub fn block_count(&self) -> usize {
        self.netlist.blocks.len()
    }

    pub fn tech_count(&self) -> usize {
        self.config.technologies.len()
    }

    /// Weighted degree (sum of incident bandwidth).
    pub fn weighted_degree(&self, block: usize) -> u64 {
        self.adjacency[block].iter().map(|&(_, w)| w).sum()
    }
}
