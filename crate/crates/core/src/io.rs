// SPDX-License-Identifier: Apache-2.0

//! Result-bundle and chiplet-level file formats. All files are pretty-printed
//! JSON carrying the shared schema `version`.

use std::collections::HashMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cost::CostBreakdown;
use crate::error::{Error, Result};
use crate::evaluate::Evaluation;
use crate::floorplan::{ChipletNet, FeasibilityReport, Floorplan, FloorplanProblem, FpObjective, ObjectiveCoefficients, SequencePair};
use crate::model::{self, schema_version, Design, SystemConfig, SCHEMA_VERSION};

pub const PARTITION_FILE: &str = "partition.json";
pub const GENOME_FILE: &str = "genome.json";
pub const FLOORPLAN_FILE: &str = "floorplan.json";
pub const COST_FILE: &str = "cost.json";

pub trait Versioned {
    fn version(&self) -> u32;
}

pub fn read_json<T: DeserializeOwned + Versioned>(path: &Path, context: &str) -> Result<T> {
    let value: T = serde_json::from_str(&model::read(path)?).map_err(|e| model::schema(context, e))?;
    model::check_version(context, value.version())?;
    Ok(value)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("bundle types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn version(&self) -> u32 {
                self.version
            }
        })*
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAssignment {
    pub block: String,
    pub chiplet: usize,
}

/// Block-to-chiplet map, in netlist block order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub chiplets: usize,
    pub blocks: Vec<BlockAssignment>,
}

impl PartitionFile {
    pub fn new(design: &Design, assignment: &[usize]) -> Self {
        Self {
            version: SCHEMA_VERSION,
            chiplets: assignment.iter().max().map_or(0, |m| m + 1),
            blocks: design
                .netlist
                .blocks
                .iter()
                .zip(assignment)
                .map(|(b, &c)| BlockAssignment {
                    block: b.id.clone(),
                    chiplet: c,
                })
                .collect(),
        }
    }

    /// Assignment vector in netlist order. Every block must appear exactly
    /// once and chiplet ids must lie below `chiplets`.
    pub fn assignment(&self, design: &Design) -> Result<Vec<usize>> {
        let index = design.netlist.block_index()?;
        let mut out = vec![None; design.block_count()];
        for a in &self.blocks {
            let &i = index
                .get(a.block.as_str())
                .ok_or_else(|| Error::DanglingReference(format!("partition references unknown block `{}`", a.block)))?;
            if a.chiplet >= self.chiplets {
                return Err(Error::InvalidValue(format!(
                    "block `{}` assigned to chiplet {} but the partition declares {} chiplets",
                    a.block, a.chiplet, self.chiplets
                )));
            }
            if out[i].replace(a.chiplet).is_some() {
                return Err(Error::DuplicateId(format!("block `{}` assigned twice", a.block)));
            }
        }
        out.iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| Error::InvalidValue(format!("block `{}` is not assigned", design.netlist.blocks[i].id))))
            .collect()
    }
}

/// Technology of each chiplet, by technology id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeFile {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub techs: Vec<String>,
}

impl GenomeFile {
    pub fn new(config: &SystemConfig, genome: &[usize]) -> Self {
        Self {
            version: SCHEMA_VERSION,
            techs: genome.iter().map(|&t| config.technologies[t].id.clone()).collect(),
        }
    }

    pub fn indices(&self, config: &SystemConfig) -> Result<Vec<usize>> {
        self.techs
            .iter()
            .map(|t| config.tech_index(t).ok_or_else(|| Error::UnknownTech(t.clone())))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedChiplet {
    pub chiplet: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tech: Option<String>,
    /// Lower-left corner, mm.
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

/// Chiplet placement and shapes, plus the sequence pair that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorplanFile {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub package: Size,
    pub chiplets: Vec<PlacedChiplet>,
    pub sequence_pair: SequencePair,
}

impl FloorplanFile {
    pub fn new(fp: &Floorplan, names: Option<&[String]>, techs: Option<&[String]>) -> Self {
        Self {
            version: SCHEMA_VERSION,
            package: Size {
                width: fp.package.0,
                height: fp.package.1,
            },
            chiplets: (0..fp.shapes.len())
                .map(|i| PlacedChiplet {
                    chiplet: i,
                    name: names.map(|n| n[i].clone()),
                    tech: techs.map(|t| t[i].clone()),
                    x: fp.positions[i].0,
                    y: fp.positions[i].1,
                    width: fp.shapes[i].width,
                    height: fp.shapes[i].height,
                })
                .collect(),
            sequence_pair: fp.sp.clone(),
        }
    }
}

/// Floorplan objective terms, cost itemization and feasibility verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub feasible: bool,
    /// Mixed cost/power objective.
    pub objective: f64,
    pub score: f64,
    pub floorplan: FpObjective,
    pub floorplan_value: f64,
    pub cost: Option<CostBreakdown>,
    pub feasibility: FeasibilityReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CostReport {
    pub fn new(evaluation: &Evaluation) -> Self {
        Self {
            version: SCHEMA_VERSION,
            feasible: evaluation.feasible,
            objective: evaluation.objective,
            score: evaluation.score,
            floorplan: evaluation.fp_objective,
            floorplan_value: evaluation.fp_objective.value(),
            cost: evaluation.breakdown.clone(),
            feasibility: evaluation.feasibility.clone(),
            error: evaluation.error.clone(),
        }
    }
}

/// The four files of a result bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub partition: PartitionFile,
    pub genome: GenomeFile,
    pub floorplan: FloorplanFile,
    pub cost: CostReport,
}

impl Bundle {
    /// Bundle of an evaluation whose chiplet `i` is label `i` of `assignment`.
    pub fn new(design: &Design, assignment: &[usize], genome: &[usize], evaluation: &Evaluation) -> Self {
        let genome = GenomeFile::new(&design.config, genome);
        Self {
            partition: PartitionFile::new(design, assignment),
            floorplan: FloorplanFile::new(&evaluation.floorplan, None, Some(&genome.techs)),
            genome,
            cost: CostReport::new(evaluation),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        write_json(&dir.join(PARTITION_FILE), &self.partition)?;
        write_json(&dir.join(GENOME_FILE), &self.genome)?;
        write_json(&dir.join(FLOORPLAN_FILE), &self.floorplan)?;
        write_json(&dir.join(COST_FILE), &self.cost)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipletSpec {
    pub id: String,
    /// Required area (blocks plus IO), mm^2.
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipletNetSpec {
    pub a: String,
    pub b: String,
    pub bits: u64,
    /// IO cell area at each endpoint, mm^2.
    #[serde(default)]
    pub io_area: f64,
    /// mm.
    pub reach: f64,
}

/// Stand-alone floorplanning input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipletInput {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub separation: f64,
    pub chiplets: Vec<ChipletSpec>,
    #[serde(default)]
    pub nets: Vec<ChipletNetSpec>,
    #[serde(default)]
    pub coefficients: ObjectiveCoefficients,
}

impl ChipletInput {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path, "chiplet input")
    }

    pub fn problem(&self) -> Result<FloorplanProblem> {
        let mut index = HashMap::new();
        for (i, c) in self.chiplets.iter().enumerate() {
            if index.insert(c.id.as_str(), i).is_some() {
                return Err(Error::DuplicateId(format!("chiplet `{}`", c.id)));
            }
            if !(c.area > 0.0 && c.area.is_finite()) {
                return Err(Error::InvalidValue(format!("chiplet `{}` area must be > 0", c.id)));
            }
        }
        if self.chiplets.is_empty() {
            return Err(Error::InvalidValue("no chiplets".into()));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::InvalidValue("separation must be >= 0".into()));
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::DanglingReference(format!("net references unknown chiplet `{id}`")))
        };
        let mut nets = Vec::with_capacity(self.nets.len());
        for n in &self.nets {
            let (a, b) = (lookup(&n.a)?, lookup(&n.b)?);
            if a == b {
                return Err(Error::InvalidValue(format!("self-loop net on chiplet `{}`", n.a)));
            }
            if !(n.reach > 0.0) || !(n.io_area >= 0.0) {
                return Err(Error::InvalidValue(format!("net {} - {} needs reach > 0 and io_area >= 0", n.a, n.b)));
            }
            nets.push(ChipletNet {
                a,
                b,
                bits: n.bits,
                io_area: n.io_area,
                reach: n.reach,
            });
        }
        let mut problem = FloorplanProblem::new(self.chiplets.iter().map(|c| c.area).collect(), nets, self.separation);
        problem.coefficients = self.coefficients;
        Ok(problem)
    }

    pub fn names(&self) -> Vec<String> {
        self.chiplets.iter().map(|c| c.id.clone()).collect()
    }
}

/// Output of a stand-alone floorplanning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorplanReport {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub feasible: bool,
    pub objective: FpObjective,
    pub objective_value: f64,
    pub floorplan: FloorplanFile,
    pub feasibility: FeasibilityReport,
}

versioned!(PartitionFile, GenomeFile, FloorplanFile, CostReport, ChipletInput, FloorplanReport);
