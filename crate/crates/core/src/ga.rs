// SPDX-License-Identifier: Apache-2.0

//! Genetic search over chiplet technology assignments.
//!
//! A genome lists a technology (table index) per chiplet slot, `K_max`
//! slots long. The core partitioner decides how many slots are used, always
//! a prefix of the canonical (sorted) genome. Fitness is memoized on the
//! canonical form and seeded from it, so equal multisets always score the
//! same.

use std::collections::HashMap;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::Evaluator;
use crate::partition::{core_chipletpart, Budget, PartitionResult};
use crate::seeds;

pub type Genome = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub tot_pop: usize,
    pub k_pop: usize,
    /// Tournament size.
    pub zeta: usize,
    /// Elites carried into the next generation.
    pub sigma: usize,
    /// Maximum generations.
    pub psi: usize,
    /// Stall generations before stopping.
    pub epsilon: usize,
    pub delta_threshold: f64,
    pub p_c: f64,
    pub p_m: f64,
    #[serde(rename = "K_max")]
    pub k_max: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            tot_pop: 50,
            k_pop: 45,
            zeta: 3,
            sigma: 5,
            psi: 50,
            epsilon: 10,
            delta_threshold: 0.01,
            p_c: 0.6,
            p_m: 0.07,
            k_max: 8,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidValue(m.to_string()));
        if self.tot_pop != self.k_pop + self.sigma {
            return bad("tot_pop must equal k_pop + sigma");
        }
        if self.tot_pop == 0 || self.zeta == 0 || self.k_max == 0 || self.psi == 0 {
            return bad("tot_pop, zeta, psi and K_max must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.p_c) || !(0.0..=1.0).contains(&self.p_m) {
            return bad("p_c and p_m must lie in [0, 1]");
        }
        if !(self.delta_threshold >= 0.0) {
            return bad("delta_threshold must be >= 0");
        }
        Ok(())
    }
}

/// Sorted representative of the genome's multiset.
pub fn canonicalize(genome: &[usize]) -> Genome {
    let mut g = genome.to_vec();
    g.sort_unstable();
    g
}

/// `tot_pop` canonical genomes of `K_max` uniform random genes.
pub fn init_population<R: Rng>(config: &GaConfig, tech_count: usize, rng: &mut R) -> Vec<Genome> {
    (0..config.tot_pop)
        .map(|_| canonicalize(&(0..config.k_max).map(|_| rng.gen_range(0..tech_count)).collect::<Vec<_>>()))
        .collect()
}

/// `k_pop` parent pairs from `2 * k_pop` tournaments of `zeta` uniform
/// draws (with replacement); lowest fitness wins, earlier index on ties.
pub fn tournament_select<R: Rng>(fitness: &[f64], config: &GaConfig, rng: &mut R) -> Vec<(usize, usize)> {
    let tournament = |rng: &mut R| {
        let mut best = rng.gen_range(0..fitness.len());
        for _ in 1..config.zeta {
            let c = rng.gen_range(0..fitness.len());
            if fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best) {
                best = c;
            }
        }
        best
    };
    (0..config.k_pop).map(|_| (tournament(rng), tournament(rng))).collect()
}

/// Uniform crossover with probability `p_c`, otherwise a copy of `a`. A
/// shorter parent is padded with the other's genes.
pub fn crossover<R: Rng>(a: &[usize], b: &[usize], p_c: f64, rng: &mut R) -> Genome {
    if rng.gen::<f64>() >= p_c {
        return a.to_vec();
    }
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| {
            let (x, y) = (a.get(i).or(b.get(i)), b.get(i).or(a.get(i)));
            *if rng.gen::<bool>() { x } else { y }.expect("index within the longer parent")
        })
        .collect()
}

/// Random-reset mutation: each gene becomes a uniform random technology
/// with probability `p_m`.
pub fn mutate<R: Rng>(genome: &mut [usize], p_m: f64, tech_count: usize, rng: &mut R) {
    for g in genome {
        if rng.gen::<f64>() < p_m {
            *g = rng.gen_range(0..tech_count);
        }
    }
}

/// Seed of the inner partitioner run for `genome`.
pub fn fitness_seed(genome: &[usize], master: u64) -> u64 {
    let canon = canonicalize(genome);
    let parts: Vec<u64> = std::iter::once(canon.len() as u64).chain(canon.iter().map(|&g| g as u64)).collect();
    seeds::derive(master, &parts)
}

/// Core partitioner on the canonical genome with its derived seed.
pub fn run_genome(ev: &Evaluator, genome: &[usize], budget: &Budget, master: u64) -> Result<PartitionResult> {
    let canon = canonicalize(genome);
    core_chipletpart(ev, &canon, budget, fitness_seed(&canon, master))
}

/// Reduced-budget fitness; errors count as infinitely bad.
pub fn fitness(ev: &Evaluator, genome: &[usize], master: u64) -> f64 {
    run_genome(ev, genome, &ev.design.config.partition.reduced, master).map_or(f64::INFINITY, |r| r.cost())
}

/// Homogeneous run: every slot in technology `tech`.
pub fn homogeneous(ev: &Evaluator, tech: usize, k_max: usize, budget: &Budget, master: u64) -> Result<PartitionResult> {
    run_genome(ev, &vec![tech; k_max], budget, master)
}

/// Memo table of fitness values keyed by canonical genome.
#[derive(Debug, Default, Clone)]
pub struct FitnessCache {
    values: HashMap<Genome, f64>,
    pub evaluations: usize,
    pub hits: usize,
}

impl FitnessCache {
    pub fn get(&self, genome: &[usize]) -> Option<f64> {
        self.values.get(&canonicalize(genome)).copied()
    }

    /// Scores `genomes`, evaluating each missing canonical form once
    /// (concurrently) and counting the rest as hits.
    pub fn score_all(&mut self, ev: &Evaluator, genomes: &[Genome], master: u64) -> Vec<f64> {
        let mut missing: Vec<Genome> = Vec::new();
        for g in genomes {
            let c = canonicalize(g);
            if self.values.contains_key(&c) || missing.contains(&c) {
                self.hits += 1;
            } else {
                missing.push(c);
            }
        }
        let scored: Vec<f64> = missing.par_iter().map(|g| fitness(ev, g, master)).collect();
        self.evaluations += missing.len();
        for (g, s) in missing.into_iter().zip(scored) {
            self.values.insert(g, s);
        }
        genomes.iter().map(|g| self.values[&canonicalize(g)]).collect()
    }

    /// Cached genomes, best first (ties by genome order).
    pub fn ranked(&self) -> Vec<(Genome, f64)> {
        let mut v: Vec<(Genome, f64)> = self.values.iter().map(|(g, &s)| (g.clone(), s)).collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub generation: usize,
    pub best: f64,
    pub best_ever: f64,
    /// Mean over finite fitness values.
    pub mean: f64,
    pub cache_hit_rate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveResult {
    /// Full-budget partitioner result of the winning genome.
    pub result: PartitionResult,
    /// Winning `K_max`-slot canonical genome.
    pub genome: Genome,
    /// Best reduced-budget fitness seen.
    pub best_fitness: f64,
    pub trace: Vec<GenerationTrace>,
    /// Distinct genomes evaluated at reduced budget.
    pub evaluations: usize,
    pub cache_hits: usize,
}

/// Runs the GA, then re-runs the core partitioner at full budget on the
/// `sigma` best distinct genomes and returns the best of those.
pub fn evolve(ev: &Evaluator, config: &GaConfig) -> Result<EvolveResult> {
    config.validate()?;
    let tech_count = ev.design.tech_count();
    let master = config.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let mut population = init_population(config, tech_count, &mut rng);
    let mut cache = FitnessCache::default();
    let mut trace = Vec::new();
    let mut best_ever = f64::INFINITY;
    let mut stall = 0;
    for generation in 0..config.psi {
        let (hits0, evals0) = (cache.hits, cache.evaluations);
        let fit = cache.score_all(ev, &population, master);
        let best = fit.iter().copied().fold(f64::INFINITY, f64::min);
        let prev = best_ever;
        best_ever = best_ever.min(best);
        let finite: Vec<f64> = fit.iter().copied().filter(|f| f.is_finite()).collect();
        let mean = finite.iter().sum::<f64>() / finite.len().max(1) as f64;
        let evals = cache.evaluations - evals0;
        let hits = cache.hits - hits0;
        trace.push(GenerationTrace {
            generation,
            best,
            best_ever,
            mean,
            cache_hit_rate: hits as f64 / population.len() as f64,
            evaluations: evals,
        });
        info!("generation {generation}: best {best:.6} best_ever {best_ever:.6} mean {mean:.6} new evaluations {evals}");
        let delta = prev - best_ever;
        if delta <= config.delta_threshold || delta.is_nan() {
            stall += 1;
        } else {
            stall = 0;
        }
        if stall > config.epsilon || generation + 1 == config.psi {
            break;
        }

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        let mut next: Vec<Genome> = order.iter().take(config.sigma).map(|&i| population[i].clone()).collect();
        for (a, b) in tournament_select(&fit, config, &mut rng) {
            let mut child = crossover(&population[a], &population[b], config.p_c, &mut rng);
            mutate(&mut child, config.p_m, tech_count, &mut rng);
            next.push(canonicalize(&child));
        }
        population = next;
    }

    let finalists: Vec<Genome> = cache.ranked().into_iter().take(config.sigma.max(1)).map(|(g, _)| g).collect();
    let full = &ev.design.config.partition.full;
    let results: Vec<Result<PartitionResult>> = finalists.par_iter().map(|g| run_genome(ev, g, full, master)).collect();
    let mut best: Option<(Genome, PartitionResult)> = None;
    for (g, r) in finalists.into_iter().zip(results) {
        let r = r?;
        let better = best.as_ref().map_or(true, |(_, b)| {
            (r.feasible() && !b.feasible()) || (r.feasible() == b.feasible() && r.cost() < b.cost())
        });
        if better {
            best = Some((g, r));
        }
    }
    let (genome, result) = best.expect("at least one genome was evaluated");
    Ok(EvolveResult {
        result,
        genome,
        best_fitness: best_ever,
        trace,
        evaluations: cache.evaluations,
        cache_hits: cache.hits,
    })
}

/// Every canonical genome of length `1..=k_max` over `tech_count`
/// technologies.
pub fn enumerate_genomes(tech_count: usize, k_max: usize) -> Vec<Genome> {
    fn rec(start: usize, left: usize, tech_count: usize, cur: &mut Genome, out: &mut Vec<Genome>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for t in start..tech_count {
            cur.push(t);
            rec(t, left - 1, tech_count, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 1..=k_max {
        rec(0, k, tech_count, &mut Vec::new(), &mut out);
    }
    out
}

/// Exhaustive oracle: reduced-budget fitness of every canonical genome.
/// Returns the best genome, its fitness, and the number of evaluations.
pub fn enumerate_best(ev: &Evaluator, k_max: usize, master: u64) -> (Genome, f64, usize) {
    let all = enumerate_genomes(ev.design.tech_count(), k_max);
    let scores: Vec<f64> = all.par_iter().map(|g| fitness(ev, g, master)).collect();
    let mut best = 0;
    for i in 1..all.len() {
        if scores[i] < scores[best] {
            best = i;
        }
    }
    (all[best].clone(), scores[best], all.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn canonical_forms_match() {
        // 7nm = 3, 14nm = 1 in the default table
        assert_eq!(canonicalize(&[3, 3, 1]), canonicalize(&[1, 3, 3]));
        assert_eq!(canonicalize(&[2]), vec![2]);
    }

    #[test]
    fn default_population_shape() {
        let c = GaConfig::default();
        let pop = init_population(&c, 4, &mut rng(1));
        assert_eq!(pop.len(), 50);
        assert!(pop.iter().all(|g| g.len() == 8 && *g == canonicalize(g)));
        assert_eq!(pop, init_population(&c, 4, &mut rng(1)));
        let single = init_population(&c, 1, &mut rng(2));
        assert!(single.iter().all(|g| *g == vec![0; 8]));
    }

    #[test]
    fn ninety_tournaments_make_45_pairs() {
        let c = GaConfig::default();
        let fit: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert_eq!(tournament_select(&fit, &c, &mut rng(3)).len(), 45);
        let all = GaConfig {
            zeta: 5000,
            ..GaConfig::default()
        };
        let pairs = tournament_select(&fit, &all, &mut rng(3));
        assert!(pairs.iter().all(|&(a, b)| a == 0 && b == 0));
    }

    #[test]
    fn crossover_can_mix() {
        // 7nm=3, 14nm=1, 10nm=2
        let a = [3, 3, 1];
        let b = [2, 2, 2];
        let mut seen = std::collections::HashSet::new();
        let mut r = rng(4);
        for _ in 0..500 {
            seen.insert(crossover(&a, &b, 1.0, &mut r));
        }
        assert!(seen.contains(&vec![3, 2, 1]));
        assert!(seen.iter().all(|g| g.iter().enumerate().all(|(i, &x)| x == a[i] || x == b[i])));
        assert_eq!(crossover(&a, &b, 0.0, &mut r), a.to_vec());
    }

    #[test]
    fn mutation_edge_cases() {
        let mut g = vec![1, 2, 3];
        mutate(&mut g, 0.0, 4, &mut rng(5));
        assert_eq!(g, vec![1, 2, 3]);
        let mut h = vec![0; 5];
        mutate(&mut h, 1.0, 1, &mut rng(5));
        assert_eq!(h, vec![0; 5]);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_genomes(3, 3).len(), 19);
        assert_eq!(enumerate_genomes(3, 6).len(), 83);
        assert_eq!(enumerate_genomes(4, 8).len(), 494);
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = GaConfig {
            k_pop: 40,
            ..GaConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn canonicalize_is_idempotent(g in proptest::collection::vec(0usize..6, 1..12)) {
            let c = canonicalize(&g);
            proptest::prop_assert_eq!(canonicalize(&c), c.clone());
            let mut rev = g.clone();
            rev.reverse();
            proptest::prop_assert_eq!(canonicalize(&rev), c);
        }
    }
}
