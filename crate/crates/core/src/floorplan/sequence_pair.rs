// SPDX-License-Identifier: Apache-2.0

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Shape;

/// Two permutations of chiplet indices. `i` is left of `j` iff `i` precedes
/// `j` in both; `i` is below `j` iff `i` follows `j` in `first` and precedes
/// it in `second`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SequencePair {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl SequencePair {
    pub fn identity(n: usize) -> Self {
        Self {
            first: (0..n).collect(),
            second: (0..n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut sp = Self::identity(n);
        sp.first.shuffle(rng);
        sp.second.shuffle(rng);
        sp
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        fn is_perm(v: &[usize]) -> bool {
            let mut seen = vec![false; v.len()];
            v.iter().all(|&i| i < seen.len() && !std::mem::replace(&mut seen[i], true))
        }
        self.first.len() == self.second.len() && is_perm(&self.first) && is_perm(&self.second)
    }

    /// Positions of each chiplet within the two sequences.
    pub fn ranks(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.len();
        let mut ra = vec![0; n];
        let mut rb = vec![0; n];
        for (pos, &c) in self.first.iter().enumerate() {
            ra[c] = pos;
        }
        for (pos, &c) in self.second.iter().enumerate() {
            rb[c] = pos;
        }
        (ra, rb)
    }

    /// Drops chiplet `removed` and renumbers the indices above it.
    pub fn without(&self, removed: usize) -> Self {
        let fix = |v: &[usize]| {
            v.iter()
                .filter(|&&c| c != removed)
                .map(|&c| if c > removed { c - 1 } else { c })
                .collect()
        };
        Self {
            first: fix(&self.first),
            second: fix(&self.second),
        }
    }
}

/// Scratch buffers so the annealer can evaluate without allocating.
#[derive(Debug, Clone, Default)]
pub struct Packing {
    pub positions: Vec<(f64, f64)>,
    pub package: (f64, f64),
    rank_first: Vec<usize>,
    rank_second: Vec<usize>,
}

impl Packing {
    pub fn evaluate(&mut self, sp: &SequencePair, shapes: &[Shape], separation: f64) {
        let n = sp.len();
        self.rank_first.resize(n, 0);
        self.rank_second.resize(n, 0);
        for (pos, &c) in sp.first.iter().enumerate() {
            self.rank_first[c] = pos;
        }
        for (pos, &c) in sp.second.iter().enumerate() {
            self.rank_second[c] = pos;
        }
        self.positions.clear();
        self.positions.resize(n, (0.0, 0.0));
        let (ra, rb) = (&self.rank_first, &self.rank_second);

        // x: left-of predecessors all appear earlier in `first`.
        for (pj, &j) in sp.first.iter().enumerate() {
            let mut x = 0.0f64;
            for &i in &sp.first[..pj] {
                if rb[i] < rb[j] {
                    x = x.max(self.positions[i].0 + shapes[i].width + separation);
                }
            }
            self.positions[j].0 = x;
        }
        // y: below predecessors all appear earlier in `second`.
        for (pj, &j) in sp.second.iter().enumerate() {
            let mut y = 0.0f64;
            for &i in &sp.second[..pj] {
                if ra[i] > ra[j] {
                    y = y.max(self.positions[i].1 + shapes[i].height + separation);
                }
            }
            self.positions[j].1 = y;
        }
        let mut pw = 0.0f64;
        let mut ph = 0.0f64;
        for (c, &(x, y)) in self.positions.iter().enumerate() {
            pw = pw.max(x + shapes[c].width);
            ph = ph.max(y + shapes[c].height);
        }
        self.package = (pw, ph);
    }
}

/// Longest-path packing of a sequence pair; separation is added on every
/// constraint edge. Returns lower-left positions and the bounding package.
pub fn evaluate_sp(sp: &SequencePair, shapes: &[Shape], separation: f64) -> (Vec<(f64, f64)>, (f64, f64)) {
    let mut packing = Packing::default();
    packing.evaluate(sp, shapes, separation);
    (packing.positions, packing.package)
}
