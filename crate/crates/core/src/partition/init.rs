// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spectral::repair_empty;
use crate::error::{Error, Result};
use crate::model::Design;

fn check_k(k: usize, min: usize, n: usize) -> Result<()> {
    if k < min || k > n {
        return Err(Error::ChipletCount { k, min, max: n });
    }
    Ok(())
}

/// Seeds `k` chiplets with the highest weighted-degree blocks, then grows
/// them breadth-first. A block reached by several frontiers in the same
/// round joins the chiplet it has the most bandwidth to (lower label on
/// ties). Blocks no frontier reaches go to the smallest chiplet.
pub fn node_expansion_init(design: &Design, k: usize) -> Result<Vec<usize>> {
    let n = design.block_count();
    check_k(k, 1, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&b| (std::cmp::Reverse(design.weighted_degree(b)), b));
    let mut labels = vec![usize::MAX; n];
    for (c, &b) in order.iter().take(k).enumerate() {
        labels[b] = c;
    }
    let mut sizes = vec![1usize; k];
    let mut assigned = k;
    let mut frontier: Vec<usize> = order[..k].to_vec();
    while assigned < n {
        let mut candidates: Vec<usize> = frontier
            .iter()
            .flat_map(|&v| design.adjacency[v].iter().map(|&(u, _)| u))
            .filter(|&u| labels[u] == usize::MAX)
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.is_empty() {
            // disconnected remainder: restart from the lowest unassigned block
            let b = (0..n).find(|&b| labels[b] == usize::MAX).unwrap_or(0);
            let c = (0..k).min_by_key(|&c| (sizes[c], c)).unwrap_or(0);
            labels[b] = c;
            sizes[c] += 1;
            assigned += 1;
            frontier = vec![b];
            continue;
        }
        // decide the whole round against the labels at its start
        let picks: Vec<(usize, usize)> = candidates
            .iter()
            .map(|&u| {
                let mut strength = vec![0u64; k];
                for &(v, w) in &design.adjacency[u] {
                    if labels[v] != usize::MAX {
                        strength[labels[v]] += w;
                    }
                }
                let c = (0..k).max_by_key(|&c| (strength[c], std::cmp::Reverse(c))).unwrap_or(0);
                (u, c)
            })
            .collect();
        for &(u, c) in &picks {
            labels[u] = c;
            sizes[c] += 1;
        }
        assigned += picks.len();
        frontier = candidates;
    }
    Ok(labels)
}

/// Uniform labels in `0..k`; empty chiplets are filled by moving a block.
pub fn random_init(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    check_k(k, 1, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    repair_empty(&mut labels, k);
    Ok(labels)
}
