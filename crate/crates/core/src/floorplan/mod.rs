// SPDX-License-Identifier: Apache-2.0

//! Reach-aware chiplet floorplanning on sequence pairs.

mod anneal;
pub mod geometry;
mod sequence_pair;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use anneal::{anneal, AnnealResult, AnnealStats};
pub use geometry::{check_feasible, net_length, reach_penalty, FeasibilityReport, Rect};
pub use sequence_pair::{evaluate_sp, Packing, SequencePair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub width: f64,
    pub height: f64,
}

impl Shape {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn square(area: f64) -> Self {
        let s = area.sqrt();
        Self::new(s, s)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// A net of the chiplet-level netlist. `io_area` is the IO cell area each
/// endpoint chiplet dedicates to this net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipletNet {
    pub a: usize,
    pub b: usize,
    pub bits: u64,
    pub io_area: f64,
    pub reach: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for ObjectiveCoefficients {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }
}

/// Floorplanner input: chiplet areas (blocks plus IO) and chiplet-level nets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorplanProblem {
    pub required_areas: Vec<f64>,
    pub nets: Vec<ChipletNet>,
    pub separation: f64,
    #[serde(default)]
    pub coefficients: ObjectiveCoefficients,
    /// Bound on width/height (and its inverse) for reshaped chiplets.
    #[serde(default = "default_aspect_limit")]
    pub aspect_limit: f64,
}

fn default_aspect_limit() -> f64 {
    4.0
}

impl FloorplanProblem {
    pub fn new(required_areas: Vec<f64>, nets: Vec<ChipletNet>, separation: f64) -> Self {
        Self {
            required_areas,
            nets,
            separation,
            coefficients: ObjectiveCoefficients::default(),
            aspect_limit: default_aspect_limit(),
        }
    }

    pub fn len(&self) -> usize {
        self.required_areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.required_areas.is_empty()
    }

    /// Packs `sp` with `shapes` and scores the result.
    pub fn realize(&self, sp: SequencePair, shapes: Vec<Shape>) -> (Floorplan, FpObjective) {
        let (positions, package) = evaluate_sp(&sp, &shapes, self.separation);
        let fp = Floorplan {
            sp,
            shapes,
            positions,
            package,
        };
        let obj = self.objective(&fp);
        (fp, obj)
    }

    pub fn objective(&self, fp: &Floorplan) -> FpObjective {
        let rects = fp.rects();
        let (wl_reach, _) = reach_penalty(&rects, &self.nets);
        FpObjective {
            wl_reach,
            chip_area: fp.shapes.iter().map(Shape::area).sum(),
            package_area: fp.package.0 * fp.package.1,
            coefficients: self.coefficients,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Floorplan {
    pub sp: SequencePair,
    pub shapes: Vec<Shape>,
    /// Lower-left corners, mm.
    pub positions: Vec<(f64, f64)>,
    pub package: (f64, f64),
}

impl Floorplan {
    pub fn rects(&self) -> Vec<Rect> {
        self.positions
            .iter()
            .zip(&self.shapes)
            .map(|(&p, &s)| Rect::new(p, s))
            .collect()
    }

    pub fn package_area(&self) -> f64 {
        self.package.0 * self.package.1
    }

    pub fn chiplet_areas(&self) -> Vec<f64> {
        self.shapes.iter().map(Shape::area).collect()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut fp = self.clone();
        for p in &mut fp.positions {
            p.0 += dx;
            p.1 += dy;
        }
        fp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpObjective {
    /// Reach violation penalty, mm*bits.
    pub wl_reach: f64,
    /// Summed chiplet area, mm^2.
    pub chip_area: f64,
    pub package_area: f64,
    pub coefficients: ObjectiveCoefficients,
}

impl FpObjective {
    pub fn value(&self) -> f64 {
        let c = self.coefficients;
        c.alpha * self.wl_reach + c.beta * self.chip_area + c.gamma * self.package_area
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Standard,
    Fast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub mode: Mode,
    /// Total perturbations, split evenly across walkers.
    pub perturbations: u64,
    /// Temperature multiplier applied once per cooling stage.
    pub cooling_rate: f64,
    /// `None` calibrates from probe moves.
    pub initial_temp: Option<f64>,
    pub walkers: usize,
    /// Steps between GWTW synchronizations; `None` means a tenth of each
    /// walker's run.
    pub sync_period: Option<u64>,
    /// Probabilities of swap-first, swap-second, swap-both, reshape, bloat.
    pub move_probs: [f64; 5],
    pub seed: u64,
}

impl AnnealConfig {
    pub fn standard() -> Self {
        Self {
            mode: Mode::Standard,
            perturbations: 1_000_000,
            cooling_rate: 0.989,
            initial_temp: None,
            walkers: 10,
            sync_period: None,
            move_probs: [0.2; 5],
            seed: 0,
        }
    }

    pub fn fast() -> Self {
        Self {
            mode: Mode::Fast,
            perturbations: 10_000,
            initial_temp: Some(0.0),
            ..Self::standard()
        }
    }

    /// Sequence-pair moves only; shapes stay as initialized.
    pub fn with_fixed_shapes(mut self) -> Self {
        self.move_probs = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0];
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.move_probs.iter().sum();
        if self.move_probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidValue("move_probs must be probabilities summing to 1".into()));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate <= 1.0) {
            return Err(Error::InvalidValue("cooling_rate must be in (0, 1]".into()));
        }
        if self.walkers == 0 {
            return Err(Error::InvalidValue("walkers must be >= 1".into()));
        }
        if matches!(self.initial_temp, Some(t) if !(t >= 0.0)) {
            return Err(Error::InvalidValue("initial_temp must be >= 0".into()));
        }
        if self.sync_period == Some(0) {
            return Err(Error::InvalidValue("sync_period must be >= 1".into()));
        }
        Ok(())
    }
}

/// Floorplanner settings carried by the system config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorplanSettings {
    #[serde(default)]
    pub coefficients: ObjectiveCoefficients,
    #[serde(default = "default_aspect_limit")]
    pub aspect_limit: f64,
    #[serde(default = "AnnealConfig::standard")]
    pub standard: AnnealConfig,
    #[serde(default = "AnnealConfig::fast")]
    pub fast: AnnealConfig,
}

impl Default for FloorplanSettings {
    fn default() -> Self {
        Self {
            coefficients: ObjectiveCoefficients::default(),
            aspect_limit: default_aspect_limit(),
            standard: AnnealConfig::standard(),
            fast: AnnealConfig::fast(),
        }
    }
}

impl FloorplanSettings {
    pub fn config(&self, mode: Mode) -> &AnnealConfig {
        match mode {
            Mode::Standard => &self.standard,
            Mode::Fast => &self.fast,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.aspect_limit < 1.0 {
            return Err(Error::InvalidValue("aspect_limit must be >= 1".into()));
        }
        let c = self.coefficients;
        if c.alpha < 0.0 || c.beta < 0.0 || c.gamma < 0.0 {
            return Err(Error::InvalidValue("floorplan coefficients must be >= 0".into()));
        }
        self.standard.validate()?;
        self.fast.validate()
    }
}
