// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use chipletpart::evaluate::Evaluator;
use chipletpart::floorplan::{anneal, check_feasible, Mode};
use chipletpart::ga::{self, EvolveResult};
use chipletpart::io::{self, Bundle, ChipletInput, FloorplanFile, FloorplanReport, GenomeFile, PartitionFile};
use chipletpart::model::{load_config, load_netlist, Design, ObjectiveWeights, SystemConfig, SCHEMA_VERSION};
use chipletpart::partition::{Partition, PartitionResult};
use chipletpart::testgen::{self, GridSpec, MemPoolSpec, TileSpec};
use chipletpart::{defaults, Error};
use log::info;
use serde_json::json;

use crate::manifest::{Invocation, RunManifest, Timer, MANIFEST_FILE};
use crate::{ConfigArg, EvaluateArgs, FloorplanArgs, GaFlags, GenArgs, ModeArg, PartitionArgs, ReplayArgs, Template};

pub const TRACE_FILE: &str = "trace.jsonl";
pub const FLOORPLAN_REPORT_FILE: &str = "floorplan_report.json";

fn resolve_config(arg: &ConfigArg) -> Result<SystemConfig> {
    match &arg.config {
        Some(path) => Ok(load_config(path)?),
        None => Ok(defaults::system_config()),
    }
}

fn apply_weights(config: &mut SystemConfig, weights: &Option<Vec<f64>>) {
    if let Some(w) = weights {
        config.weights = ObjectiveWeights {
            cost_weight: w[0],
            power_weight: w[1],
        };
    }
}

fn apply_ga(config: &mut SystemConfig, flags: &GaFlags) {
    let ga = &mut config.ga;
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = flags.$f { ga.$f = v; })* };
    }
    set!(tot_pop, k_pop, zeta, sigma, psi, epsilon, delta_threshold, p_c, p_m, k_max);
}

fn mkdir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_manifest(invocation: Invocation, config: SystemConfig, seed: u64, timer: Timer) -> Result<()> {
    let path = invocation.out().join(MANIFEST_FILE);
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        invocation,
        config,
        seed,
        threads: rayon::current_num_threads(),
        stages: timer.finish(),
    };
    io::write_json(&path, &manifest)?;
    Ok(())
}

fn verdict(feasible: bool, allow_infeasible: bool) -> bool {
    if !feasible {
        log::warn!("the returned solution is not floorplan-feasible");
    }
    feasible || allow_infeasible
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let base = TileSpec::default();
    let mut rent = base.rent;
    if let Some(k) = args.rent_k {
        rent.k = k;
    }
    if let Some(p) = args.rent_p_logic {
        rent.p_logic = p;
    }
    if let Some(p) = args.rent_p_memory {
        rent.p_memory = p;
    }
    let netlist = match args.template {
        Template::Waferscale => {
            let tile = TileSpec {
                cores_per_tile: args.cores,
                shared_mems: args.mems,
                has_router: !args.no_router,
                has_crossbar: !args.no_crossbar,
                area_scaling: args.area_scaling.unwrap_or(base.area_scaling),
                power_scaling: args.power_scaling.unwrap_or(base.power_scaling),
                rent,
                io: args.io.clone().unwrap_or(base.io.clone()),
                ..base
            };
            if args.tiles == 0 {
                bail!("--tiles must be >= 1");
            }
            testgen::gen_waferscale(&GridSpec::for_tiles(args.tiles), &tile)
        }
        Template::Mempool => {
            let d = MemPoolSpec::default();
            testgen::gen_mempool(&MemPoolSpec {
                area_scaling: args.area_scaling.unwrap_or(d.area_scaling),
                power_scaling: args.power_scaling.unwrap_or(d.power_scaling),
                rent,
                io: args.io.clone().unwrap_or(d.io.clone()),
                ..d
            })
        }
    };
    let config = defaults::system_config();
    let (netlist, config) = if args.techs.is_empty() {
        (netlist, config)
    } else {
        let keep: Vec<&str> = args.techs.iter().map(String::as_str).collect();
        testgen::restrict_techs(&netlist, &config, &keep)?
    };
    netlist.validate(&config)?;
    for path in [&args.netlist, &args.config_out] {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            mkdir(dir)?;
        }
    }
    std::fs::write(&args.netlist, netlist.to_json_string() + "\n").with_context(|| format!("writing {}", args.netlist.display()))?;
    std::fs::write(&args.config_out, config.to_json_string() + "\n").with_context(|| format!("writing {}", args.config_out.display()))?;
    info!("generated {} blocks, {} nets", netlist.blocks.len(), netlist.nets.len());
    Ok(())
}

pub fn partition(args: &PartitionArgs, seed: Option<u64>) -> Result<bool> {
    let mut config = resolve_config(&args.config)?;
    apply_weights(&mut config, &args.weights);
    apply_ga(&mut config, &args.ga);
    if let Some(s) = seed {
        config.ga.seed = s;
    }
    let seed = config.ga.seed;
    let invocation = Invocation::Partition {
        netlist: args.netlist.clone(),
        out: args.out.clone(),
        homogeneous: args.homogeneous.clone(),
        allow_infeasible: args.allow_infeasible,
    };
    run(invocation, config, seed)
}

pub fn evaluate(args: &EvaluateArgs, seed: Option<u64>) -> Result<bool> {
    let mut config = resolve_config(&args.config)?;
    apply_weights(&mut config, &args.weights);
    let seed = seed.unwrap_or(config.ga.seed);
    let invocation = Invocation::Evaluate {
        netlist: args.netlist.clone(),
        partition: args.partition.clone(),
        genome: args.genome.clone(),
        out: args.out.clone(),
        allow_infeasible: args.allow_infeasible,
    };
    run(invocation, config, seed)
}

pub fn floorplan(args: &FloorplanArgs, seed: Option<u64>) -> Result<bool> {
    let config = resolve_config(&args.config)?;
    let seed = seed.unwrap_or(config.ga.seed);
    let invocation = Invocation::Floorplan {
        input: args.input.clone(),
        out: args.out.clone(),
        mode: match args.mode {
            ModeArg::Standard => Mode::Standard,
            ModeArg::Fast => Mode::Fast,
        },
        reach: args.reach,
        allow_infeasible: args.allow_infeasible,
    };
    run(invocation, config, seed)
}

pub fn replay(args: &ReplayArgs) -> Result<bool> {
    let manifest = RunManifest::load(&args.manifest)?;
    manifest.config.validate()?;
    let mut invocation = manifest.invocation;
    if let Some(out) = &args.out {
        invocation.set_out(out.clone());
    }
    run(invocation, manifest.config, manifest.seed)
}

/// Executes a fully resolved invocation and writes its outputs and
/// manifest. Returns whether the exit status should be success.
pub fn run(invocation: Invocation, config: SystemConfig, seed: u64) -> Result<bool> {
    let mut timer = Timer::start();
    let ok = match &invocation {
        Invocation::Partition {
            netlist,
            out,
            homogeneous,
            allow_infeasible,
        } => {
            let design = Design::new(load_netlist(netlist)?, config.clone())?;
            timer.lap("load");
            let feasible = run_partition(&design, homogeneous.as_deref(), seed, out, &mut timer)?;
            verdict(feasible, *allow_infeasible)
        }
        Invocation::Evaluate {
            netlist,
            partition,
            genome,
            out,
            allow_infeasible,
        } => {
            let design = Design::new(load_netlist(netlist)?, config.clone())?;
            let part: PartitionFile = io::read_json(partition, "partition")?;
            let genes: GenomeFile = io::read_json(genome, "genome")?;
            let assignment = part.assignment(&design)?;
            let genome = genes.indices(&design.config)?;
            if genome.len() < part.chiplets {
                return Err(Error::InvalidValue(format!(
                    "genome lists {} technologies for {} chiplets",
                    genome.len(),
                    part.chiplets
                ))
                .into());
            }
            timer.lap("load");
            let ev = Evaluator::new(&design);
            let anneal_config = design.config.floorplan.standard.clone().with_seed(seed);
            let (compact, used) = Partition::compact(&assignment);
            let realized: Vec<usize> = used.iter().map(|&l| genome[l]).collect();
            let evaluation = ev.evaluate(&compact.assignment, &realized, &anneal_config)?;
            timer.lap("evaluate");
            mkdir(out)?;
            Bundle::new(&design, &compact.assignment, &realized, &evaluation).write(out)?;
            timer.lap("write");
            verdict(evaluation.feasible, *allow_infeasible)
        }
        Invocation::Floorplan {
            input,
            out,
            mode,
            reach,
            allow_infeasible,
        } => {
            let input = ChipletInput::load(input)?;
            let mut problem = input.problem()?;
            if let Some(r) = reach {
                if !(*r > 0.0) {
                    bail!("--reach must be > 0");
                }
                problem.nets.iter_mut().for_each(|n| n.reach = *r);
            }
            problem.aspect_limit = config.floorplan.aspect_limit;
            timer.lap("load");
            let result = anneal(&problem, &config.floorplan.config(*mode).clone().with_seed(seed));
            let feasibility = check_feasible(&result.floorplan, &problem.nets, problem.separation);
            timer.lap("floorplan");
            let names = input.names();
            let report = FloorplanReport {
                version: SCHEMA_VERSION,
                feasible: feasibility.feasible,
                objective: result.objective,
                objective_value: result.objective.value(),
                floorplan: FloorplanFile::new(&result.floorplan, Some(&names), None),
                feasibility,
            };
            mkdir(out)?;
            io::write_json(&out.join(FLOORPLAN_REPORT_FILE), &report)?;
            timer.lap("write");
            verdict(report.feasible, *allow_infeasible)
        }
    };
    write_manifest(invocation, config, seed, timer)?;
    Ok(ok)
}

fn run_partition(design: &Design, homogeneous: Option<&str>, seed: u64, out: &Path, timer: &mut Timer) -> Result<bool> {
    let ev = Evaluator::new(design);
    let mut lines: Vec<serde_json::Value> = Vec::new();
    let result: PartitionResult = match homogeneous {
        Some(tech) => {
            let t = design
                .config
                .tech_index(tech)
                .ok_or_else(|| Error::UnknownTech(tech.to_string()))?;
            let r = ga::homogeneous(&ev, t, design.config.ga.k_max, &design.config.partition.full, seed)?;
            timer.lap("partition");
            r
        }
        None => {
            let EvolveResult {
                result,
                genome,
                best_fitness,
                trace,
                evaluations,
                cache_hits,
            } = ga::evolve(&ev, &design.config.ga)?;
            timer.lap("ga");
            for t in &trace {
                lines.push(json!({ "kind": "generation", "data": t }));
            }
            lines.push(json!({
                "kind": "ga_summary",
                "data": {
                    "genome": GenomeFile::new(&design.config, &genome).techs,
                    "best_fitness": best_fitness,
                    "evaluations": evaluations,
                    "cache_hits": cache_hits,
                }
            }));
            result
        }
    };
    for p in &result.pool {
        lines.push(json!({ "kind": "pool", "data": p }));
    }
    mkdir(out)?;
    Bundle::new(design, &result.partition.assignment, &result.genome, &result.evaluation).write(out)?;
    let path = out.join(TRACE_FILE);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    for l in &lines {
        writeln!(f, "{l}")?;
    }
    f.flush()?;
    timer.lap("write");
    Ok(result.feasible())
}
