// SPDX-License-Identifier: Apache-2.0

//! Parametric benchmark generators: waferscale-style tiled designs on a 2-D
//! router mesh, and a MemPool-style cluster.
//!
//! Base block areas and powers are calibration constants, not published
//! data: one default tile sums to about 0.99 mm^2, i.e. about 1582 mm^2 at
//! 45nm after the default 1600x area scaling. Net bandwidths follow Rent's
//! rule `T = k * C^p`, with the component count `C` taken proportional to
//! block area.

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::model::{scale_block, Block, BlockKind, Net, Netlist, SystemConfig, SCHEMA_VERSION};

/// Terminal count `round(k * C^p)`.
pub fn rent_terminals(components: f64, k: f64, p: f64) -> u64 {
    (k * components.powf(p)).round() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RentParams {
    pub k: f64,
    /// Exponent for logic-like blocks.
    pub p_logic: f64,
    /// Exponent for memory-like blocks.
    pub p_memory: f64,
    /// Components per mm^2 of (scaled) block area.
    pub components_per_mm2: f64,
}

impl Default for RentParams {
    fn default() -> Self {
        Self {
            k: 4.0,
            p_logic: 0.45,
            p_memory: 0.12,
            components_per_mm2: 1000.0,
        }
    }
}

impl RentParams {
    fn terminals(&self, area: f64, kind: BlockKind) -> u64 {
        let p = match kind {
            BlockKind::Logic => self.p_logic,
            BlockKind::Memory => self.p_memory,
        };
        rent_terminals(area * self.components_per_mm2, self.k, p).max(1)
    }
}

/// Unscaled area (mm^2) and power (W) of one block type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockTemplate {
    pub area: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileSpec {
    pub cores_per_tile: usize,
    pub shared_mems: usize,
    pub has_router: bool,
    pub has_crossbar: bool,
    pub core: BlockTemplate,
    pub bus: BlockTemplate,
    pub private_mem: BlockTemplate,
    pub shared_mem: BlockTemplate,
    pub crossbar: BlockTemplate,
    pub router: BlockTemplate,
    pub area_scaling: f64,
    pub power_scaling: f64,
    pub rent: RentParams,
    pub reference_tech: String,
    /// IO cell type of every generated net.
    pub io: String,
}

impl Default for TileSpec {
    fn default() -> Self {
        let t = |area, power| BlockTemplate { area, power };
        Self {
            cores_per_tile: 14,
            shared_mems: 4,
            has_router: true,
            has_crossbar: true,
            core: t(0.035, 0.02),
            bus: t(0.004, 0.002),
            private_mem: t(0.012, 0.004),
            shared_mem: t(0.055, 0.015),
            crossbar: t(0.035, 0.02),
            router: t(0.02, 0.015),
            area_scaling: 1600.0,
            power_scaling: 1600.0,
            rent: RentParams::default(),
            reference_tech: "45nm".into(),
            io: defaults::PARALLEL_IO.into(),
        }
    }
}

impl TileSpec {
    pub fn blocks_per_tile(&self) -> usize {
        3 * self.cores_per_tile + self.shared_mems + usize::from(self.has_router) + usize::from(self.has_crossbar)
    }

    /// Unscaled tile area.
    pub fn tile_area(&self) -> f64 {
        let mut a = self.cores_per_tile as f64 * (self.core.area + self.bus.area + self.private_mem.area)
            + self.shared_mems as f64 * self.shared_mem.area;
        if self.has_crossbar {
            a += self.crossbar.area;
        }
        if self.has_router {
            a += self.router.area;
        }
        a
    }
}

/// `rows x cols` mesh of tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
}

impl GridSpec {
    /// Most nearly square mesh holding exactly `tiles` tiles.
    pub fn for_tiles(tiles: usize) -> Self {
        let tiles = tiles.max(1);
        let rows = (1..=tiles).filter(|r| tiles % r == 0 && r * r <= tiles).max().unwrap_or(1);
        Self {
            rows,
            cols: tiles / rows,
        }
    }

    pub fn tiles(&self) -> usize {
        self.rows * self.cols
    }

    /// Directed router-to-router nets of the mesh.
    pub fn mesh_nets(&self) -> usize {
        let (a, b) = (self.rows, self.cols);
        2 * (a * b.saturating_sub(1) + b * a.saturating_sub(1))
    }
}

struct Builder<'a> {
    spec: &'a TileSpec,
    blocks: Vec<Block>,
    nets: Vec<Net>,
    terminals: Vec<u64>,
}

impl<'a> Builder<'a> {
    fn block(&mut self, id: String, template: BlockTemplate, kind: BlockKind) -> usize {
        let area = template.area * self.spec.area_scaling;
        self.terminals.push(self.spec.rent.terminals(area, kind));
        self.blocks.push(Block {
            id,
            area,
            power: template.power * self.spec.power_scaling,
            reference_tech: self.spec.reference_tech.clone(),
            kind,
        });
        self.blocks.len() - 1
    }

    fn net(&mut self, a: usize, b: usize, bandwidth: u64) {
        self.nets.push(Net {
            source: self.blocks[a].id.clone(),
            sink: self.blocks[b].id.clone(),
            bandwidth,
            reach_class: self.spec.io.clone(),
        });
    }

    /// Intra-tile link, as wide as the narrower endpoint's interface.
    fn link(&mut self, a: usize, b: usize) {
        let bw = self.terminals[a].min(self.terminals[b]);
        self.net(a, b, bw);
    }
}

/// Waferscale netlist: per tile, cores with a bus and private memory each,
/// shared memories, a crossbar and a router; routers form a 2-D mesh.
/// Intra-tile links are single directed nets; mesh links are directed
/// pairs sized by Rent's rule on a whole tile.
pub fn gen_waferscale(grid: &GridSpec, tile: &TileSpec) -> Netlist {
    let mut b = Builder {
        spec: tile,
        blocks: Vec::new(),
        nets: Vec::new(),
        terminals: Vec::new(),
    };
    let tile_terminals = tile
        .rent
        .terminals(tile.tile_area() * tile.area_scaling, BlockKind::Logic);
    let mut routers = vec![None; grid.tiles()];
    for t in 0..grid.tiles() {
        let mut buses = Vec::new();
        let mut shared = Vec::new();
        for i in 0..tile.cores_per_tile {
            let core = b.block(format!("t{t}_core{i}"), tile.core, BlockKind::Logic);
            let bus = b.block(format!("t{t}_bus{i}"), tile.bus, BlockKind::Logic);
            let mem = b.block(format!("t{t}_pmem{i}"), tile.private_mem, BlockKind::Memory);
            b.link(core, bus);
            b.link(bus, mem);
            buses.push(bus);
        }
        for j in 0..tile.shared_mems {
            shared.push(b.block(format!("t{t}_smem{j}"), tile.shared_mem, BlockKind::Memory));
        }
        let xbar = tile
            .has_crossbar
            .then(|| b.block(format!("t{t}_xbar"), tile.crossbar, BlockKind::Logic));
        let router = tile
            .has_router
            .then(|| b.block(format!("t{t}_router"), tile.router, BlockKind::Logic));
        routers[t] = router;
        // without a crossbar, buses and shared memories hang off the router
        if let Some(hub) = xbar.or(router) {
            for &bus in &buses {
                b.link(bus, hub);
            }
            for &m in &shared {
                b.link(hub, m);
            }
        }
        if let (Some(x), Some(r)) = (xbar, router) {
            b.net(x, r, tile_terminals);
        }
    }
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            let here = r * grid.cols + c;
            let mut neighbours = Vec::new();
            if c + 1 < grid.cols {
                neighbours.push(here + 1);
            }
            if r + 1 < grid.rows {
                neighbours.push(here + grid.cols);
            }
            for there in neighbours {
                if let (Some(a), Some(z)) = (routers[here], routers[there]) {
                    b.net(a, z, tile_terminals);
                    b.net(z, a, tile_terminals);
                }
            }
        }
    }
    Netlist {
        version: SCHEMA_VERSION,
        blocks: b.blocks,
        nets: b.nets,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemPoolSpec {
    /// Groups of tiles; each group has one local switch per tile in it.
    pub groups: usize,
    pub tiles_per_group: usize,
    /// Global switches, each linked to one local switch per group.
    pub global_switches: usize,
    pub tile: BlockTemplate,
    pub switch: BlockTemplate,
    pub area_scaling: f64,
    pub power_scaling: f64,
    pub rent: RentParams,
    pub reference_tech: String,
    pub io: String,
}

impl Default for MemPoolSpec {
    fn default() -> Self {
        Self {
            groups: 4,
            tiles_per_group: 4,
            global_switches: 8,
            tile: BlockTemplate { area: 0.25, power: 0.08 },
            switch: BlockTemplate { area: 0.02, power: 0.01 },
            area_scaling: 16.0,
            power_scaling: 16.0,
            rent: RentParams::default(),
            reference_tech: "45nm".into(),
            io: defaults::PARALLEL_IO.into(),
        }
    }
}

/// MemPool-style cluster: `groups x tiles_per_group` tiles, one local
/// switch per tile, and global switches; 16 + 24 = 40 blocks by default.
pub fn gen_mempool(spec: &MemPoolSpec) -> Netlist {
    let tile_spec = TileSpec {
        area_scaling: spec.area_scaling,
        power_scaling: spec.power_scaling,
        rent: spec.rent,
        reference_tech: spec.reference_tech.clone(),
        io: spec.io.clone(),
        ..TileSpec::default()
    };
    let mut b = Builder {
        spec: &tile_spec,
        blocks: Vec::new(),
        nets: Vec::new(),
        terminals: Vec::new(),
    };
    let globals: Vec<usize> = (0..spec.global_switches)
        .map(|s| b.block(format!("gsw{s}"), spec.switch, BlockKind::Logic))
        .collect();
    for g in 0..spec.groups {
        for i in 0..spec.tiles_per_group {
            let tile = b.block(format!("g{g}_tile{i}"), spec.tile, BlockKind::Memory);
            let local = b.block(format!("g{g}_sw{i}"), spec.switch, BlockKind::Logic);
            b.link(tile, local);
            b.link(local, tile);
            if !globals.is_empty() {
                for s in [i % globals.len(), (i + spec.tiles_per_group) % globals.len()] {
                    b.link(local, globals[s]);
                }
            }
        }
    }
    Netlist {
        version: SCHEMA_VERSION,
        blocks: b.blocks,
        nets: b.nets,
    }
}

/// Narrows `config` to the technologies in `keep` (in that order). Blocks
/// whose reference technology is dropped are re-expressed in `keep[0]`.
pub fn restrict_techs(netlist: &Netlist, config: &SystemConfig, keep: &[&str]) -> Result<(Netlist, SystemConfig)> {
    if keep.is_empty() {
        return Err(Error::InvalidValue("technology list is empty".into()));
    }
    let mut out = config.clone();
    out.technologies = keep
        .iter()
        .map(|id| config.tech(id).cloned())
        .collect::<Result<_>>()?;
    let target = &out.technologies[0];
    let mut netlist = netlist.clone();
    for b in &mut netlist.blocks {
        if keep.contains(&b.reference_tech.as_str()) {
            continue;
        }
        let (area, power) = scale_block(b, config.tech(&b.reference_tech)?, target);
        b.area = area;
        b.power = power;
        b.reference_tech = target.id.clone();
    }
    out.validate()?;
    Ok((netlist, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Design;

    #[test]
    fn rent_examples() {
        assert_eq!(rent_terminals(100.0, 1.0, 0.5), 10);
        assert_eq!(rent_terminals(1.0, 4.0, 0.45), 4);
        let t1 = rent_terminals(1.0e6, 1.0, 0.5) as f64;
        let t2 = rent_terminals(2.0e6, 1.0, 0.5) as f64;
        assert!((t2 / t1 - 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn one_tile_is_ws1_shaped() {
        let spec = TileSpec::default();
        let n = gen_waferscale(&GridSpec::for_tiles(1), &spec);
        assert_eq!(n.blocks.len(), 48);
        let area: f64 = n.blocks.iter().map(|b| b.area).sum();
        assert!((area - 1582.4).abs() < 0.5, "{area}");
        Design::new(n, defaults::system_config()).unwrap();
    }

    #[test]
    fn eight_tiles_is_ws4_shaped() {
        let grid = GridSpec::for_tiles(8);
        assert_eq!((grid.rows, grid.cols), (2, 4));
        let n = gen_waferscale(&grid, &TileSpec::default());
        assert_eq!(n.blocks.len(), 384);
        let mesh = n
            .nets
            .iter()
            .filter(|e| e.source.ends_with("_router") && e.sink.ends_with("_router"))
            .count();
        assert_eq!(mesh, grid.mesh_nets());
        assert_eq!(mesh, 2 * (2 * 3 + 4));
    }

    #[test]
    fn skeleton_tile() {
        let spec = TileSpec {
            cores_per_tile: 0,
            shared_mems: 0,
            ..TileSpec::default()
        };
        let n = gen_waferscale(&GridSpec::for_tiles(1), &spec);
        assert_eq!(n.blocks.len(), 2);
        assert_eq!(n.nets.len(), 1);
    }

    #[test]
    fn crossbar_and_router_lead_the_degree_ranking() {
        let n = gen_waferscale(&GridSpec::for_tiles(1), &TileSpec::default());
        let d = Design::new(n, defaults::system_config()).unwrap();
        let mut order: Vec<usize> = (0..d.block_count()).collect();
        order.sort_by_key(|&b| (std::cmp::Reverse(d.weighted_degree(b)), b));
        let top: Vec<&str> = order[..2].iter().map(|&b| d.netlist.blocks[b].id.as_str()).collect();
        assert_eq!(top, vec!["t0_xbar", "t0_router"]);
    }

    #[test]
    fn mempool_has_forty_blocks() {
        let n = gen_mempool(&MemPoolSpec::default());
        assert_eq!(n.blocks.len(), 40);
        Design::new(n, defaults::system_config()).unwrap();
    }

    #[test]
    fn restricting_techs_preserves_scaled_areas() {
        let n = gen_waferscale(&GridSpec::for_tiles(1), &TileSpec::default());
        let config = defaults::system_config();
        let full = Design::new(n.clone(), config.clone()).unwrap();
        let (n2, c2) = restrict_techs(&n, &config, &["14nm", "10nm", "7nm"]).unwrap();
        assert_eq!(c2.technologies.len(), 3);
        assert!(n2.blocks.iter().all(|b| b.reference_tech == "14nm"));
        let small = Design::new(n2, c2).unwrap();
        for (t_full, t_small) in [(1, 0), (2, 1), (3, 2)] {
            for b in 0..full.block_count() {
                let (x, y) = (full.scaled_area[t_full][b], small.scaled_area[t_small][b]);
                assert!((x - y).abs() < 1e-9 * x);
            }
        }
        assert!(restrict_techs(&n, &config, &["3nm"]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn block_count_formula(rows in 1usize..4, cols in 1usize..4, cores in 0usize..6, mems in 0usize..5) {
            let spec = TileSpec { cores_per_tile: cores, shared_mems: mems, ..TileSpec::default() };
            let grid = GridSpec { rows, cols };
            let n = gen_waferscale(&grid, &spec);
            proptest::prop_assert_eq!(n.blocks.len(), rows * cols * (3 * cores + mems + 2));
            proptest::prop_assert!(n.validate(&defaults::system_config()).is_ok());
        }
    }
}
