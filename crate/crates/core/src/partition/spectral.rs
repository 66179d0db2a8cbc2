// SPDX-License-Identifier: Apache-2.0

//! Spectral pool generator: 2-D Laplacian embedding plus k-means.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Design;
use crate::seeds;

/// Distance between the embeddings of different connected components.
const COMPONENT_OFFSET: f64 = 100.0;
const LLOYD_ITERS: usize = 100;

fn components(design: &Design) -> Vec<Vec<usize>> {
    let n = design.block_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &(u, _) in &design.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Rows of eigenvectors 2 and 3 of each component's weighted Laplacian,
/// scaled by `sqrt(component size)`. Components are embedded separately and
/// kept apart on a third axis.
pub fn spectral_embedding(design: &Design) -> Result<Vec<[f64; 3]>> {
    let n = design.block_count();
    let mut points = vec![[0.0; 3]; n];
    let max_w = design
        .adjacency
        .iter()
        .flatten()
        .map(|&(_, w)| w)
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    for (c, comp) in components(design).iter().enumerate() {
        let m = comp.len();
        for &v in comp {
            points[v][2] = c as f64 * COMPONENT_OFFSET;
        }
        if m < 2 {
            continue;
        }
        let mut local = vec![usize::MAX; n];
        for (i, &v) in comp.iter().enumerate() {
            local[v] = i;
        }
        let mut lap = DMatrix::<f64>::zeros(m, m);
        for (i, &v) in comp.iter().enumerate() {
            for &(u, w) in &design.adjacency[v] {
                let w = w as f64 / max_w;
                lap[(i, local[u])] -= w;
                lap[(i, i)] += w;
            }
        }
        let eig = SymmetricEigen::try_new(lap, 1e-12, 100_000).ok_or(Error::EigenSolver)?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let scale = (m as f64).sqrt();
        for (axis, &col) in order.iter().skip(1).take(2).enumerate() {
            let v = eig.eigenvectors.column(col);
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::EigenSolver);
            }
            // fix the sign so the embedding is reproducible
            let sign = v.iter().find(|x| x.abs() > 1e-9).map_or(1.0, |x| x.signum());
            for (i, &b) in comp.iter().enumerate() {
                points[b][axis] = sign * v[i] * scale;
            }
        }
    }
    Ok(points)
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

fn nearest(p: &[f64; 3], centers: &[[f64; 3]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = dist2(p, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_once(points: &[[f64; 3]], k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = points.len();
    let mut centers = vec![points[rng.gen_range(0..n)]];
    while centers.len() < k {
        let d: Vec<f64> = points.iter().map(|p| nearest(p, &centers).1).collect();
        let total: f64 = d.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &di) in d.iter().enumerate() {
                if r < di {
                    pick = i;
                    break;
                }
                r -= di;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        centers.push(points[next]);
    }
    let mut labels = vec![usize::MAX; n];
    for _ in 0..LLOYD_ITERS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let c = nearest(p, &centers).0;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        let mut sums = vec![[0.0; 3]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&labels) {
            counts[c] += 1;
            for a in 0..3 {
                sums[c][a] += p[a];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].map(|s| s / counts[c] as f64);
            } else {
                // reseed an empty cluster at the point worst served
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = dist2(&points[a], &centers[labels[a]]);
                        let db = dist2(&points[b], &centers[labels[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                centers[c] = points[far];
                labels[far] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = points.iter().zip(&labels).map(|(p, &c)| dist2(p, &centers[c])).sum();
    (labels, inertia)
}

/// Forces every label in `0..k` to be used by moving single blocks out of
/// the largest clusters.
pub(crate) fn repair_empty(labels: &mut [usize], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &c in labels.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let largest = (0..k).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).unwrap_or(0);
        if counts[largest] < 2 {
            return;
        }
        let victim = labels.iter().rposition(|&c| c == largest).unwrap_or(0);
        labels[victim] = empty;
    }
}

/// Relabels clusters by first appearance.
pub(crate) fn canonical_labels(labels: &mut [usize]) {
    let mut map: Vec<Option<usize>> = vec![None; labels.iter().copied().max().map_or(0, |m| m + 1)];
    let mut next = 0;
    for l in labels.iter_mut() {
        let m = *map[*l].get_or_insert_with(|| {
            next += 1;
            next - 1
        });
        *l = m;
    }
}

/// K-means++ with `restarts` seeded restarts; lowest inertia wins.
pub fn kmeans(points: &[[f64; 3]], k: usize, restarts: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    let k = k.clamp(1, n.max(1));
    if n == 0 {
        return Vec::new();
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, &[r as u64]));
        let (labels, inertia) = kmeans_once(points, k, &mut rng);
        if best.as_ref().map_or(true, |b| inertia < b.1 - 1e-12) {
            best = Some((labels, inertia));
        }
    }
    let mut labels = best.map(|b| b.0).unwrap_or_default();
    repair_empty(&mut labels, k);
    canonical_labels(&mut labels);
    labels
}

/// Spectral embedding clustered into `k` chiplets.
pub fn spectral_init(design: &Design, k: usize, restarts: usize, seed: u64) -> Result<Vec<usize>> {
    let n = design.block_count();
    if k == 0 || k > n {
        return Err(Error::ChipletCount { k, min: 1, max: n });
    }
    let points = spectral_embedding(design)?;
    Ok(kmeans(&points, k, restarts, seed))
}
