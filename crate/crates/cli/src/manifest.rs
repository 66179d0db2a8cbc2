// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use chipletpart::floorplan::Mode;
use chipletpart::model::SystemConfig;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

/// What was run, with every input path it read.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Invocation {
    Partition {
        netlist: PathBuf,
        out: PathBuf,
        homogeneous: Option<String>,
        allow_infeasible: bool,
    },
    Evaluate {
        netlist: PathBuf,
        partition: PathBuf,
        genome: PathBuf,
        out: PathBuf,
        allow_infeasible: bool,
    },
    Floorplan {
        input: PathBuf,
        out: PathBuf,
        mode: Mode,
        reach: Option<f64>,
        allow_infeasible: bool,
    },
}

impl Invocation {
    pub fn out(&self) -> &Path {
        match self {
            Self::Partition { out, .. } | Self::Evaluate { out, .. } | Self::Floorplan { out, .. } => out,
        }
    }

    pub fn set_out(&mut self, path: PathBuf) {
        match self {
            Self::Partition { out, .. } | Self::Evaluate { out, .. } | Self::Floorplan { out, .. } => *out = path,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub invocation: Invocation,
    /// Config after all flag overrides.
    pub config: SystemConfig,
    pub seed: u64,
    pub threads: usize,
    /// Wall-clock per stage; the only non-reproducible part of a run.
    pub stages: Vec<Stage>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

/// Stage stopwatch.
pub struct Timer {
    stages: Vec<Stage>,
    mark: Instant,
}

impl Timer {
    pub fn start() -> Self {
        Self {
            stages: Vec::new(),
            mark: Instant::now(),
        }
    }

    pub fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push(Stage {
            name: name.to_string(),
            seconds: (now - self.mark).as_secs_f64(),
        });
        self.mark = now;
    }

    pub fn finish(self) -> Vec<Stage> {
        self.stages
    }
}
