// SPDX-License-Identifier: Apache-2.0

//! Inter-chiplet wirelength, reach penalty and legality checks.

use serde::{Deserialize, Serialize};

use super::{ChipletNet, Floorplan, Shape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(pos: (f64, f64), shape: Shape) -> Self {
        Self {
            x: pos.0,
            y: pos.1,
            w: shape.width,
            h: shape.height,
        }
    }

    pub fn x1(&self) -> f64 {
        self.x + self.w
    }

    pub fn y1(&self) -> f64 {
        self.y + self.h
    }
}

/// Edge-to-edge gaps along x and y (zero where the projections overlap).
pub fn axis_gaps(a: &Rect, b: &Rect) -> (f64, f64) {
    let gx = (b.x - a.x1()).max(a.x - b.x1()).max(0.0);
    let gy = (b.y - a.y1()).max(a.y - b.y1()).max(0.0);
    (gx, gy)
}

/// Clearance between two rectangles: the larger of the two axis gaps.
pub fn pair_gap(a: &Rect, b: &Rect) -> f64 {
    let (gx, gy) = axis_gaps(a, b);
    gx.max(gy)
}

pub fn overlap_area(a: &Rect, b: &Rect) -> f64 {
    let ox = (a.x1().min(b.x1()) - a.x.max(b.x)).max(0.0);
    let oy = (a.y1().min(b.y1()) - a.y.max(b.y)).max(0.0);
    ox * oy
}

/// Depth of the IO region needed to hold `io_area` along an edge of width `w`.
pub fn io_depth(w: f64, io_area: f64) -> f64 {
    (w * w + 2.0 * io_area).sqrt() - w
}

/// Facing geometry between two chiplets: `(gap, edge_width)`.
///
/// The gap is the Manhattan distance between the rectangles (edge-to-edge
/// along one axis for facing chiplets, corner-to-corner otherwise). The edge
/// width is the shorter of the two edges that face each other across the
/// dominant gap axis.
pub fn facing(a: &Rect, b: &Rect) -> (f64, f64) {
    let (gx, gy) = axis_gaps(a, b);
    let w = if gx >= gy { a.h.min(b.h) } else { a.w.min(b.w) };
    (gx + gy, w)
}

/// Wirelength of a net between two placed chiplets whose endpoint IO
/// regions each hold `io_area` mm^2: `gap + 2 * depth`.
pub fn net_length(a: &Rect, b: &Rect, io_area: f64) -> f64 {
    let (gap, w) = facing(a, b);
    gap + 2.0 * io_depth(w, io_area)
}

pub fn net_penalty(length: f64, net: &ChipletNet) -> f64 {
    net.bits as f64 * (length - net.reach).max(0.0)
}

/// Total reach penalty and per-chiplet penalty (sum over incident nets).
pub fn reach_penalty(rects: &[Rect], nets: &[ChipletNet]) -> (f64, Vec<f64>) {
    let mut per_chiplet = vec![0.0; rects.len()];
    let mut total = 0.0;
    for net in nets {
        let len = net_length(&rects[net.a], &rects[net.b], net.io_area);
        let p = net_penalty(len, net);
        total += p;
        per_chiplet[net.a] += p;
        per_chiplet[net.b] += p;
    }
    (total, per_chiplet)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachViolation {
    pub net: usize,
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub reach: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairViolation {
    pub a: usize,
    pub b: usize,
    /// Overlap area (mm^2) or missing clearance (mm).
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub overlaps: Vec<PairViolation>,
    pub separation: Vec<PairViolation>,
    pub reach: Vec<ReachViolation>,
    pub outside_package: Vec<usize>,
}

impl FeasibilityReport {
    pub fn geometry_ok(&self) -> bool {
        self.overlaps.is_empty() && self.separation.is_empty() && self.outside_package.is_empty()
    }
}

const GEOM_EPS: f64 = 1e-9;

/// Overlap, separation, package containment and reach checks.
pub fn check_feasible(fp: &Floorplan, nets: &[ChipletNet], separation: f64) -> FeasibilityReport {
    let rects = fp.rects();
    let mut report = FeasibilityReport::default();
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            let ov = overlap_area(&rects[i], &rects[j]);
            if ov > GEOM_EPS {
                report.overlaps.push(PairViolation { a: i, b: j, magnitude: ov });
            } else {
                let gap = pair_gap(&rects[i], &rects[j]);
                if gap < separation - GEOM_EPS {
                    report.separation.push(PairViolation {
                        a: i,
                        b: j,
                        magnitude: separation - gap,
                    });
                }
            }
        }
    }
    let (pw, ph) = fp.package;
    for (i, r) in rects.iter().enumerate() {
        if r.x < -GEOM_EPS || r.y < -GEOM_EPS || r.x1() > pw + GEOM_EPS || r.y1() > ph + GEOM_EPS {
            report.outside_package.push(i);
        }
    }
    for (k, net) in nets.iter().enumerate() {
        let length = net_length(&rects[net.a], &rects[net.b], net.io_area);
        let penalty = net_penalty(length, net);
        if penalty > 0.0 {
            report.reach.push(ReachViolation {
                net: k,
                a: net.a,
                b: net.b,
                length,
                reach: net.reach,
                penalty,
            });
        }
    }
    report.feasible = report.geometry_ok() && report.reach.is_empty();
    report
}
