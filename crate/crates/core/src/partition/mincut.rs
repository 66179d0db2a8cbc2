// SPDX-License-Identifier: Apache-2.0

//! Multilevel recursive-bisection min-cut partitioner: heavy-edge matching
//! coarsening, greedy graph growing on the coarsest graph, and balanced FM
//! refinement while projecting back.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Design;

const COARSEN_TO: usize = 20;
const GROW_TRIES: usize = 8;
const FM_PASSES: usize = 8;

#[derive(Debug, Clone)]
struct Graph {
    vwgt: Vec<u64>,
    adj: Vec<Vec<(usize, u64)>>,
}

impl Graph {
    fn len(&self) -> usize {
        self.vwgt.len()
    }

    fn total(&self) -> u64 {
        self.vwgt.iter().sum()
    }

    fn induced(&self, vs: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.len()];
        for (i, &v) in vs.iter().enumerate() {
            local[v] = i;
        }
        Graph {
            vwgt: vs.iter().map(|&v| self.vwgt[v]).collect(),
            adj: vs
                .iter()
                .map(|&v| {
                    self.adj[v]
                        .iter()
                        .filter(|&&(u, _)| local[u] != usize::MAX)
                        .map(|&(u, w)| (local[u], w))
                        .collect()
                })
                .collect(),
        }
    }

    fn cut(&self, side: &[bool]) -> u64 {
        let mut c = 0;
        for v in 0..self.len() {
            for &(u, w) in &self.adj[v] {
                if u > v && side[u] != side[v] {
                    c += w;
                }
            }
        }
        c
    }

    /// Heavy-edge matching. `None` when the graph barely shrinks.
    fn coarsen<R: Rng>(&self, rng: &mut R) -> Option<(Graph, Vec<usize>)> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut mate = vec![usize::MAX; n];
        for &v in &order {
            if mate[v] != usize::MAX {
                continue;
            }
            let mut best: Option<(usize, u64)> = None;
            for &(u, w) in &self.adj[v] {
                if mate[u] == usize::MAX && u != v && best.map_or(true, |(bu, bw)| w > bw || (w == bw && u < bu)) {
                    best = Some((u, w));
                }
            }
            match best {
                Some((u, _)) => {
                    mate[v] = u;
                    mate[u] = v;
                }
                None => mate[v] = v,
            }
        }
        let mut cmap = vec![usize::MAX; n];
        let mut c = 0;
        for v in 0..n {
            if cmap[v] == usize::MAX {
                cmap[v] = c;
                cmap[mate[v]] = c;
                c += 1;
            }
        }
        if c as f64 > 0.95 * n as f64 {
            return None;
        }
        let mut vwgt = vec![0; c];
        let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); c];
        for v in 0..n {
            vwgt[cmap[v]] += self.vwgt[v];
            for &(u, w) in &self.adj[v] {
                if cmap[u] != cmap[v] {
                    adj[cmap[v]].push((cmap[u], w));
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            let mut merged: Vec<(usize, u64)> = Vec::with_capacity(list.len());
            for &(u, w) in list.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == u => last.1 += w,
                    _ => merged.push((u, w)),
                }
            }
            *list = merged;
        }
        Some((Graph { vwgt, adj }, cmap))
    }
}

#[derive(Debug, Clone, Copy)]
struct Balance {
    target0: f64,
    tol: f64,
}

impl Balance {
    fn violation(&self, w0: f64) -> f64 {
        ((w0 - self.target0).abs() - self.tol).max(0.0)
    }
}

fn gains(g: &Graph, side: &[bool]) -> Vec<i64> {
    (0..g.len())
        .map(|v| {
            g.adj[v]
                .iter()
                .map(|&(u, w)| if side[u] != side[v] { w as i64 } else { -(w as i64) })
                .sum()
        })
        .collect()
}

/// Balanced two-way FM with best-prefix rollback. Prefixes are ranked by
/// balance violation first, then cut.
fn fm(g: &Graph, side: &mut [bool], bal: Balance) {
    let n = g.len();
    for _ in 0..FM_PASSES {
        let mut gain = gains(g, side);
        let mut locked = vec![false; n];
        let mut w0: f64 = (0..n).filter(|&v| !side[v]).map(|v| g.vwgt[v] as f64).sum();
        let mut cut = g.cut(side) as i64;
        let mut best = (bal.violation(w0), cut);
        let mut best_len = 0;
        let mut moves = Vec::new();
        for step in 0..n {
            let cur_viol = bal.violation(w0);
            let mut pick: Option<usize> = None;
            for v in 0..n {
                if locked[v] {
                    continue;
                }
                let w = g.vwgt[v] as f64;
                let nw0 = if side[v] { w0 + w } else { w0 - w };
                let nv = bal.violation(nw0);
                if nv > 0.0 && nv >= cur_viol {
                    continue;
                }
                if pick.map_or(true, |p| gain[v] > gain[p]) {
                    pick = Some(v);
                }
            }
            let Some(v) = pick else { break };
            let w = g.vwgt[v] as f64;
            w0 = if side[v] { w0 + w } else { w0 - w };
            side[v] = !side[v];
            cut -= gain[v];
            locked[v] = true;
            gain[v] = -gain[v];
            for &(u, ew) in &g.adj[v] {
                if side[u] == side[v] {
                    gain[u] -= 2 * ew as i64;
                } else {
                    gain[u] += 2 * ew as i64;
                }
            }
            moves.push(v);
            let key = (bal.violation(w0), cut);
            if key.0 < best.0 || (key.0 == best.0 && key.1 < best.1) {
                best = key;
                best_len = step + 1;
            }
        }
        for &v in moves[best_len..].iter().rev() {
            side[v] = !side[v];
        }
        if best_len == 0 {
            break;
        }
    }
}

/// Grows part 0 from `start` by best connection gain until it reaches the
/// target weight.
fn grow(g: &Graph, start: usize, bal: Balance) -> Vec<bool> {
    let n = g.len();
    let mut side = vec![true; n];
    side[start] = false;
    let mut w0 = g.vwgt[start] as f64;
    let mut gain = gains(g, &side);
    while w0 < bal.target0 {
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if side[v] && w0 + g.vwgt[v] as f64 <= bal.target0 + bal.tol && pick.map_or(true, |p| gain[v] > gain[p]) {
                pick = Some(v);
            }
        }
        let Some(v) = pick else { break };
        side[v] = false;
        w0 += g.vwgt[v] as f64;
        gain[v] = -gain[v];
        for &(u, w) in &g.adj[v] {
            if side[u] == side[v] {
                gain[u] -= 2 * w as i64;
            } else {
                gain[u] += 2 * w as i64;
            }
        }
    }
    side
}

fn bisect<R: Rng>(g: &Graph, frac0: f64, imbalance: f64, rng: &mut R) -> Vec<bool> {
    let total = g.total() as f64;
    let bal = Balance {
        target0: frac0 * total,
        tol: (imbalance * total).max(1.0),
    };
    let mut levels: Vec<(Graph, Vec<usize>)> = Vec::new();
    let mut current = g.clone();
    while current.len() > COARSEN_TO {
        match current.coarsen(rng) {
            Some((coarse, map)) => {
                levels.push((current, map));
                current = coarse;
            }
            None => break,
        }
    }
    let mut best: Option<(f64, u64, Vec<bool>)> = None;
    let tries = GROW_TRIES.min(current.len());
    let mut starts: Vec<usize> = (0..current.len()).collect();
    starts.shuffle(rng);
    for &s in &starts[..tries] {
        let mut side = grow(&current, s, bal);
        fm(&current, &mut side, bal);
        let w0: f64 = (0..current.len()).filter(|&v| !side[v]).map(|v| current.vwgt[v] as f64).sum();
        let key = (bal.violation(w0), current.cut(&side));
        if best.as_ref().map_or(true, |b| key.0 < b.0 || (key.0 == b.0 && key.1 < b.1)) {
            best = Some((key.0, key.1, side));
        }
    }
    let mut side = best.map(|b| b.2).unwrap_or_else(|| vec![false; current.len()]);
    while let Some((fine, map)) = levels.pop() {
        side = map.iter().map(|&c| side[c]).collect();
        fm(&fine, &mut side, bal);
    }
    side
}

/// Makes sure each side keeps at least `need` vertices by moving the
/// best-connected vertices across.
fn ensure_sizes(g: &Graph, side: &mut [bool], need0: usize, need1: usize) {
    loop {
        let n0 = side.iter().filter(|&&s| !s).count();
        let n1 = side.len() - n0;
        let to_part0 = if n0 < need0 {
            true
        } else if n1 < need1 {
            false
        } else {
            return;
        };
        let gain = gains(g, side);
        // vertices currently on the donor side have side == to_part0
        let v = (0..side.len())
            .filter(|&v| side[v] == to_part0)
            .max_by_key(|&v| (gain[v], std::cmp::Reverse(v)))
            .expect("donor side is non-empty");
        side[v] = !side[v];
    }
}

fn recurse<R: Rng>(g: &Graph, vs: &[usize], k: usize, base: usize, imbalance: f64, labels: &mut [usize], rng: &mut R) {
    if k == 1 {
        for &v in vs {
            labels[v] = base;
        }
        return;
    }
    let k0 = k / 2;
    let sub = g.induced(vs);
    let mut side = bisect(&sub, k0 as f64 / k as f64, imbalance, rng);
    ensure_sizes(&sub, &mut side, k0, k - k0);
    let part0: Vec<usize> = vs.iter().zip(&side).filter(|(_, &s)| !s).map(|(&v, _)| v).collect();
    let part1: Vec<usize> = vs.iter().zip(&side).filter(|(_, &s)| s).map(|(&v, _)| v).collect();
    recurse(g, &part0, k0, base, imbalance, labels, rng);
    recurse(g, &part1, k - k0, base + k0, imbalance, labels, rng);
}

/// `k`-way min-cut partition by recursive bisection; block counts are
/// balanced within `imbalance`.
pub fn mincut_init(design: &Design, k: usize, imbalance: f64, seed: u64) -> Result<Vec<usize>> {
    let n = design.block_count();
    if k < 2 || k > n {
        return Err(Error::ChipletCount { k, min: 2, max: n });
    }
    let g = Graph {
        vwgt: vec![1; n],
        adj: design.adjacency.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = vec![0; n];
    let all: Vec<usize> = (0..n).collect();
    recurse(&g, &all, k, 0, imbalance, &mut labels, &mut rng);
    Ok(labels)
}

/// Total bandwidth of nets crossing chiplets.
pub fn cut_size(design: &Design, labels: &[usize]) -> u64 {
    design
        .edges
        .iter()
        .filter(|e| labels[e.source] != labels[e.sink])
        .map(|e| e.bandwidth)
        .sum()
}
