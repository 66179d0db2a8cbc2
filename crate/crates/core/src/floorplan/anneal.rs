// SPDX-License-Identifier: Apache-2.0

//! Simulated annealing over sequence pairs with Go-With-the-Winners walkers.
//!
//! Each walker owns its state and a ChaCha stream derived from the master
//! seed. Walkers run independently between synchronization barriers; at a
//! barrier the top fifth (by current objective) are cloned over the rest.
//! Nothing else crosses walker boundaries, so results do not depend on how
//! many threads execute the walkers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{axis_gaps, net_length, net_penalty, reach_penalty, Rect};
use super::{AnnealConfig, Floorplan, FloorplanProblem, FpObjective, Packing, SequencePair, Shape};

/// Stages the temperature schedule is divided into.
const COOLING_STAGES: u64 = 1000;
const PROBE_MOVES: usize = 100;
const PROBE_ACCEPTANCE: f64 = 0.8;
const WINNER_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnealStats {
    pub proposals: u64,
    pub accepted: u64,
    /// Accepted moves that made the objective worse.
    pub uphill_accepted: u64,
    pub syncs: u64,
    pub initial_temp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub floorplan: Floorplan,
    pub objective: FpObjective,
    pub stats: AnnealStats,
}

struct State {
    sp: SequencePair,
    shapes: Vec<Shape>,
    packing: Packing,
    rects: Vec<Rect>,
    value: f64,
}

impl Clone for State {
    fn clone(&self) -> Self {
        Self {
            sp: self.sp.clone(),
            shapes: self.shapes.clone(),
            packing: self.packing.clone(),
            rects: self.rects.clone(),
            value: self.value,
        }
    }

    fn clone_from(&mut self, src: &Self) {
        self.sp.first.clone_from(&src.sp.first);
        self.sp.second.clone_from(&src.sp.second);
        self.shapes.clone_from(&src.shapes);
        self.packing.clone_from(&src.packing);
        self.rects.clone_from(&src.rects);
        self.value = src.value;
    }
}

impl State {
    fn new(problem: &FloorplanProblem, sp: SequencePair) -> Self {
        let shapes = problem.required_areas.iter().map(|&a| Shape::square(a)).collect();
        let mut s = Self {
            sp,
            shapes,
            packing: Packing::default(),
            rects: Vec::new(),
            value: 0.0,
        };
        s.evaluate(problem);
        s
    }

    fn evaluate(&mut self, problem: &FloorplanProblem) {
        self.packing.evaluate(&self.sp, &self.shapes, problem.separation);
        self.rects.clear();
        self.rects.extend(
            self.packing
                .positions
                .iter()
                .zip(&self.shapes)
                .map(|(&p, &s)| Rect::new(p, s)),
        );
        let mut wl = 0.0;
        for net in &problem.nets {
            wl += net_penalty(net_length(&self.rects[net.a], &self.rects[net.b], net.io_area), net);
        }
        let chip_area: f64 = self.shapes.iter().map(Shape::area).sum();
        let (pw, ph) = self.packing.package;
        let c = problem.coefficients;
        self.value = c.alpha * wl + c.beta * chip_area + c.gamma * pw * ph;
    }

    fn to_floorplan(&self) -> Floorplan {
        Floorplan {
            sp: self.sp.clone(),
            shapes: self.shapes.clone(),
            positions: self.packing.positions.clone(),
            package: self.packing.package,
        }
    }
}

fn pick_two<R: Rng>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

fn pick_move<R: Rng>(probs: &[f64; 5], rng: &mut R) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (op, &p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return op;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Width for a chiplet of `area`, clamped to the aspect bound.
fn clamp_width(width: f64, area: f64, limit: f64) -> f64 {
    width.clamp((area / limit).sqrt(), (area * limit).sqrt())
}

/// Chiplet with the largest reach penalty and its worst incident net.
fn victim(problem: &FloorplanProblem, rects: &[Rect]) -> Option<(usize, usize)> {
    let (total, per) = reach_penalty(rects, &problem.nets);
    if total <= 0.0 {
        return None;
    }
    let mut v = 0;
    for c in 1..per.len() {
        if per[c] > per[v] {
            v = c;
        }
    }
    let mut worst: Option<(usize, f64)> = None;
    for (k, net) in problem.nets.iter().enumerate() {
        if net.a != v && net.b != v {
            continue;
        }
        let p = net_penalty(net_length(&rects[net.a], &rects[net.b], net.io_area), net);
        if p > 0.0 && worst.is_none_or(|(_, wp)| p > wp) {
            worst = Some((k, p));
        }
    }
    worst.map(|(k, _)| (v, k))
}

/// Op4: reshape at constant area so the victim lines up with the partner of
/// its worst net; with no violations, reset a random chiplet to its required
/// area at a random aspect ratio.
fn reshape<R: Rng>(state: &mut State, problem: &FloorplanProblem, rng: &mut R) -> bool {
    let limit = problem.aspect_limit;
    match victim(problem, &state.rects) {
        None => {
            let c = rng.gen_range(0..state.shapes.len());
            let area = problem.required_areas[c];
            let ratio = limit.powf(rng.gen_range(-1.0..=1.0));
            let w = clamp_width((area * ratio).sqrt(), area, limit);
            state.shapes[c] = Shape::new(w, area / w);
            true
        }
        Some((v, k)) => {
            let net = &problem.nets[k];
            let p = if net.a == v { net.b } else { net.a };
            let (vr, pr) = (state.rects[v], state.rects[p]);
            let area = state.shapes[v].area();
            let (gx, gy) = axis_gaps(&vr, &pr);
            let align_right = rng.gen_bool(0.5);
            let w = if gy > gx {
                // stacked: widen/narrow to share an x-span with the partner
                let target = if align_right && pr.x1() > vr.x { pr.x1() - vr.x } else { pr.w };
                clamp_width(target, area, limit)
            } else {
                let target = if align_right && pr.y1() > vr.y { pr.y1() - vr.y } else { pr.h };
                clamp_width(area / target, area, limit)
            };
            let new = Shape::new(w, area / w);
            if (new.width - state.shapes[v].width).abs() < 1e-12 {
                return false;
            }
            state.shapes[v] = new;
            true
        }
    }
}

/// Op5: grow the victim toward partners that lie right of or above it, by
/// the overshoot of each violating net, capped by the whitespace before the
/// next chiplet (or the package edge) in that direction.
fn bloat(state: &mut State, problem: &FloorplanProblem) -> bool {
    let Some((v, _)) = victim(problem, &state.rects) else {
        return false;
    };
    let rects = &state.rects;
    let vr = rects[v];
    let sep = problem.separation;
    let (mut need_x, mut need_y) = (0.0f64, 0.0f64);
    for net in &problem.nets {
        if net.a != v && net.b != v {
            continue;
        }
        let p = if net.a == v { net.b } else { net.a };
        let pr = rects[p];
        let overshoot = net_length(&vr, &pr, net.io_area) - net.reach;
        if overshoot <= 0.0 {
            continue;
        }
        if pr.x >= vr.x1() {
            need_x = need_x.max(overshoot.min(pr.x - vr.x1() - sep));
        }
        if pr.y >= vr.y1() {
            need_y = need_y.max(overshoot.min(pr.y - vr.y1() - sep));
        }
    }
    let (pw, ph) = state.packing.package;
    let mut room_x = pw - vr.x1();
    let mut room_y = ph - vr.y1();
    for (q, qr) in rects.iter().enumerate() {
        if q == v {
            continue;
        }
        let y_overlap = qr.y < vr.y1() && vr.y < qr.y1();
        let x_overlap = qr.x < vr.x1() && vr.x < qr.x1();
        if y_overlap && qr.x >= vr.x1() {
            room_x = room_x.min(qr.x - vr.x1() - sep);
        }
        if x_overlap && qr.y >= vr.y1() {
            room_y = room_y.min(qr.y - vr.y1() - sep);
        }
    }
    let gx = need_x.min(room_x).max(0.0);
    let gy = need_y.min(room_y).max(0.0);
    if gx <= 1e-12 && gy <= 1e-12 {
        return false;
    }
    state.shapes[v].width += gx;
    state.shapes[v].height += gy;
    true
}

fn perturb<R: Rng>(state: &mut State, op: usize, problem: &FloorplanProblem, rng: &mut R) -> bool {
    let n = state.shapes.len();
    match op {
        0 | 1 | 2 if n < 2 => false,
        0 => {
            let (i, j) = pick_two(n, rng);
            state.sp.first.swap(i, j);
            true
        }
        1 => {
            let (i, j) = pick_two(n, rng);
            state.sp.second.swap(i, j);
            true
        }
        2 => {
            let (a, b) = pick_two(n, rng);
            for seq in [&mut state.sp.first, &mut state.sp.second] {
                let ia = seq.iter().position(|&c| c == a).expect("permutation");
                let ib = seq.iter().position(|&c| c == b).expect("permutation");
                seq.swap(ia, ib);
            }
            true
        }
        3 => reshape(state, problem, rng),
        _ => bloat(state, problem),
    }
}

struct Walker {
    current: State,
    candidate: State,
    best: State,
    rng: ChaCha8Rng,
    stats: AnnealStats,
}

impl Walker {
    fn run(&mut self, problem: &FloorplanProblem, config: &AnnealConfig, schedule: &Schedule, steps: std::ops::Range<u64>) {
        for step in steps {
            let temp = schedule.temperature(step);
            let op = pick_move(&config.move_probs, &mut self.rng);
            self.candidate.clone_from(&self.current);
            if !perturb(&mut self.candidate, op, problem, &mut self.rng) {
                continue;
            }
            self.candidate.evaluate(problem);
            self.stats.proposals += 1;
            let delta = self.candidate.value - self.current.value;
            let accept = delta <= 0.0 || (temp > 0.0 && self.rng.gen::<f64>() < (-delta / temp).exp());
            if accept {
                self.stats.accepted += 1;
                if delta > 0.0 {
                    self.stats.uphill_accepted += 1;
                }
                std::mem::swap(&mut self.current, &mut self.candidate);
                if self.current.value < self.best.value {
                    self.best.clone_from(&self.current);
                }
            }
        }
    }
}

struct Schedule {
    initial: f64,
    rate: f64,
    stage_len: u64,
}

impl Schedule {
    fn temperature(&self, step: u64) -> f64 {
        if self.initial <= 0.0 {
            return 0.0;
        }
        self.initial * self.rate.powi((step / self.stage_len) as i32)
    }
}

/// Initial temperature giving roughly 80% acceptance of uphill probe moves.
fn calibrate_temperature(problem: &FloorplanProblem, config: &AnnealConfig, start: &State, rng: &mut ChaCha8Rng) -> f64 {
    let mut probe = start.clone();
    let mut sum = 0.0;
    let mut uphill = 0usize;
    for _ in 0..PROBE_MOVES {
        probe.clone_from(start);
        let op = pick_move(&config.move_probs, rng);
        if !perturb(&mut probe, op, problem, rng) {
            continue;
        }
        probe.evaluate(problem);
        let delta = probe.value - start.value;
        if delta > 0.0 {
            sum += delta;
            uphill += 1;
        }
    }
    if uphill == 0 {
        0.0
    } else {
        -(sum / uphill as f64) / PROBE_ACCEPTANCE.ln()
    }
}

/// Anneals a floorplan for `problem`. Always returns the best plan seen;
/// feasibility is checked separately.
pub fn anneal(problem: &FloorplanProblem, config: &AnnealConfig) -> AnnealResult {
    let n = problem.len();
    assert!(n >= 1, "floorplanning needs at least one chiplet");
    if n == 1 {
        let (floorplan, objective) = problem.realize(SequencePair::identity(1), vec![Shape::square(problem.required_areas[0])]);
        return AnnealResult {
            floorplan,
            objective,
            stats: AnnealStats::default(),
        };
    }

    let walkers_n = config.walkers.max(1);
    let steps = config.perturbations.div_ceil(walkers_n as u64);
    let mut walkers: Vec<Walker> = (0..walkers_n)
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(w as u64 + 1);
            let sp = SequencePair::random(n, &mut rng);
            let state = State::new(problem, sp);
            Walker {
                candidate: state.clone(),
                best: state.clone(),
                current: state,
                rng,
                stats: AnnealStats::default(),
            }
        })
        .collect();

    let initial = match config.initial_temp {
        Some(t) => t,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(0);
            calibrate_temperature(problem, config, &walkers[0].current, &mut rng)
        }
    };
    let schedule = Schedule {
        initial,
        rate: config.cooling_rate,
        stage_len: (steps / COOLING_STAGES).max(1),
    };
    let period = config.sync_period.unwrap_or((steps / 10).max(1)).max(1);
    let winners_n = ((walkers_n as f64 * WINNER_FRACTION).ceil() as usize).clamp(1, walkers_n);

    let mut syncs = 0;
    let mut done = 0;
    while done < steps {
        let end = (done + period).min(steps);
        walkers
            .par_iter_mut()
            .for_each(|w| w.run(problem, config, &schedule, done..end));
        done = end;
        if done < steps && walkers_n > 1 {
            let mut order: Vec<usize> = (0..walkers_n).collect();
            order.sort_by(|&a, &b| walkers[a].current.value.total_cmp(&walkers[b].current.value).then(a.cmp(&b)));
            let winners: Vec<State> = order[..winners_n].iter().map(|&w| walkers[w].current.clone()).collect();
            for (slot, &loser) in order[winners_n..].iter().enumerate() {
                walkers[loser].current.clone_from(&winners[slot % winners_n]);
            }
            syncs += 1;
        }
    }

    let mut stats = AnnealStats {
        syncs,
        initial_temp: initial,
        ..AnnealStats::default()
    };
    let mut best = 0;
    for (i, w) in walkers.iter().enumerate() {
        stats.proposals += w.stats.proposals;
        stats.accepted += w.stats.accepted;
        stats.uphill_accepted += w.stats.uphill_accepted;
        if w.best.value < walkers[best].best.value {
            best = i;
        }
    }
    let floorplan = walkers[best].best.to_floorplan();
    let objective = problem.objective(&floorplan);
    AnnealResult {
        floorplan,
        objective,
        stats,
    }
}
