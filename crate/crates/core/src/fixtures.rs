// SPDX-License-Identifier: Apache-2.0

//! Small designs shared by unit tests.

use crate::defaults;
use crate::model::{Block, BlockKind, Design, Net, Netlist};

/// Unit-area 7nm logic blocks `b0..`, one parallel-IO net per edge.
pub fn graph(n: usize, edges: &[(usize, usize, u64)]) -> Design {
    let blocks = (0..n)
        .map(|i| Block {
            id: format!("b{i}"),
            area: 1.0,
            power: 1.0,
            reference_tech: "7nm".into(),
            kind: BlockKind::Logic,
        })
        .collect();
    let nets = edges
        .iter()
        .map(|&(s, t, bw)| Net {
            source: format!("b{s}"),
            sink: format!("b{t}"),
            bandwidth: bw,
            reach_class: defaults::PARALLEL_IO.into(),
        })
        .collect();
    Design::new(Netlist { version: 1, blocks, nets }, defaults::system_config()).unwrap()
}

/// Two 4-cliques (`0..4`, `4..8`) of weight `heavy` joined by `3 - 4` of
/// weight `bridge`.
pub fn two_cliques(heavy: u64, bridge: u64) -> Design {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((base + i, base + j, heavy));
            }
        }
    }
    edges.push((3, 4, bridge));
    graph(8, &edges)
}
