// SPDX-License-Identifier: Apache-2.0

use chipletpart::evaluate::Evaluator;
use chipletpart::io::{self, Bundle, CostReport, FloorplanFile, GenomeFile, PartitionFile};
use chipletpart::model::{Design, Netlist, SystemConfig};
use chipletpart::partition::{core_chipletpart, Budget, Partition};
use chipletpart::testgen::{self, GridSpec, TileSpec};
use chipletpart::{defaults, ga};

fn small_design() -> Design {
    let tile = TileSpec {
        cores_per_tile: 3,
        shared_mems: 2,
        ..TileSpec::default()
    };
    let netlist = testgen::gen_waferscale(&GridSpec::for_tiles(2), &tile);
    let (netlist, mut config) = testgen::restrict_techs(&netlist, &defaults::system_config(), &["14nm", "7nm"]).unwrap();
    config.floorplan.standard.perturbations = 20_000;
    config.floorplan.fast.perturbations = 2_000;
    Design::new(netlist, config).unwrap()
}

#[test]
fn partition_bundle_round_trips() {
    let design = small_design();
    let ev = Evaluator::new(&design);
    let result = core_chipletpart(&ev, &[1, 1, 1, 1], &Budget::reduced(), 7).unwrap();
    result.partition.validate(design.netlist.blocks.len()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    Bundle::new(&design, &result.partition.assignment, &result.genome, &result.evaluation)
        .write(dir.path())
        .unwrap();

    let part: PartitionFile = io::read_json(&dir.path().join(io::PARTITION_FILE), "partition").unwrap();
    let genes: GenomeFile = io::read_json(&dir.path().join(io::GENOME_FILE), "genome").unwrap();
    assert_eq!(part.assignment(&design).unwrap(), result.partition.assignment);
    assert_eq!(genes.indices(&design.config).unwrap(), result.genome);

    let cost: CostReport = io::read_json(&dir.path().join(io::COST_FILE), "cost").unwrap();
    assert_eq!(cost.feasible, result.evaluation.feasible);
    assert!((cost.objective - result.evaluation.objective).abs() <= 1e-12 * cost.objective);
    let breakdown = cost.cost.unwrap();
    assert!((breakdown.recompute_total() - breakdown.total).abs() <= 1e-9 * breakdown.total);

    let fp: FloorplanFile = io::read_json(&dir.path().join(io::FLOORPLAN_FILE), "floorplan").unwrap();
    assert_eq!(fp.chiplets.len(), breakdown.chiplet_count);
    for (c, area) in fp.chiplets.iter().zip(&breakdown.die_areas) {
        assert!((c.width * c.height - area).abs() <= 1e-6 * area);
    }
}

#[test]
fn homogeneous_is_no_worse_than_monolithic() {
    let design = small_design();
    let ev = Evaluator::new(&design);
    let mono = Partition::monolithic(design.netlist.blocks.len());
    let tech = design.config.tech_index("7nm").unwrap();
    let single = ev
        .evaluate(&mono.assignment, &[tech], &design.config.floorplan.fast.clone().with_seed(1))
        .unwrap();
    let r = ga::homogeneous(&ev, tech, 4, &Budget::reduced(), 1).unwrap();
    assert!(r.cost() <= single.score + 1e-9, "{} vs {}", r.cost(), single.score);
    assert!(r.genome.iter().all(|&t| t == tech));
}

#[test]
fn same_seed_same_result() {
    let design = small_design();
    let ev = Evaluator::new(&design);
    let a = core_chipletpart(&ev, &[0, 1, 1], &Budget::reduced(), 3).unwrap();
    let b = core_chipletpart(&ev, &[0, 1, 1], &Budget::reduced(), 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn generated_files_reload() {
    let netlist = testgen::gen_mempool(&Default::default());
    let config = defaults::system_config();
    let n2 = Netlist::from_json_str(&netlist.to_json_string()).unwrap();
    let c2 = SystemConfig::from_json_str(&config.to_json_string()).unwrap();
    assert_eq!(n2, netlist);
    assert_eq!(c2, config);
    Design::new(n2, c2).unwrap();
}
