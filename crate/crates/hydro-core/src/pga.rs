//! Island-model genetic algorithm over gridded design spaces.
//!
//! Candidates are fixed-length bitstrings, one binary-coded chunk per
//! decision variable, decoded onto the parameter grid. The population is
//! split across islands that evolve independently — each island gets its
//! own crossover rate (linearly spaced) and mutation rate (log-spaced), so
//! the archipelago spans exploitative to exploratory settings — and every
//! few generations each island sends copies of its best members to the next
//! island around a ring, replacing that island's worst.
//!
//! Within an island a generation keeps its single best member, then fills
//! the rest of the population with children bred by binary-tournament
//! selection, single-point crossover, and per-bit mutation. Children are
//! evaluated at birth; elites and migrants keep their known fitness, so a
//! run's evaluation count is fixed by the population shape.
//!
//! The best solution the archipelago ever saw is finally polished with the
//! greedy pattern search ([`crate::tabu::hooke_jeeves`]).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::search::{EvalCounter, SearchOutcome, SearchSpace, SolutionRecord};
use crate::tabu::{hooke_jeeves, HookeJeevesConfig};

/// Tuning for [`pga_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgaConfig {
    /// Number of islands in the ring.
    pub islands: usize,
    /// Members per island.
    pub members: usize,
    /// Generations evolved on every island.
    pub generations: usize,
    /// Migrate every this many generations.
    pub migration_interval: usize,
    /// How many members each island sends (and replaces) per migration.
    pub migrants: usize,
    /// Bits per decision variable in the genome.
    pub bits_per_param: u32,
    /// Members carried over unchanged each generation (per island).
    pub elitism: usize,
    /// Crossover probability on the first island…
    pub crossover_low: f64,
    /// …rising linearly to this on the last island.
    pub crossover_high: f64,
    /// Per-bit mutation probability on the first island…
    pub mutation_low: f64,
    /// …rising log-spaced to this on the last island.
    pub mutation_high: f64,
    /// Settings for the final greedy polish.
    pub polish: HookeJeevesConfig,
}

impl Default for PgaConfig {
    fn default() -> Self {
        Self {
            islands: 8,
            members: 20,
            generations: 42,
            migration_interval: 3,
            migrants: 4,
            bits_per_param: 10,
            elitism: 1,
            crossover_low: 0.60,
            crossover_high: 0.95,
            mutation_low: 0.001,
            mutation_high: 0.05,
            polish: HookeJeevesConfig::default(),
        }
    }
}

impl PgaConfig {
    /// Crossover probability for island `i`: linear between the ends.
    fn crossover_rate(&self, i: usize) -> f64 {
        if self.islands <= 1 {
            return self.crossover_low;
        }
        let t = i as f64 / (self.islands - 1) as f64;
        self.crossover_low + (self.crossover_high - self.crossover_low) * t
    }

    /// Mutation probability for island `i`: log-spaced between the ends.
    fn mutation_rate(&self, i: usize) -> f64 {
        if self.islands <= 1 {
            return self.mutation_low;
        }
        let t = i as f64 / (self.islands - 1) as f64;
        self.mutation_low * (self.mutation_high / self.mutation_low).powf(t)
    }
}

/// Result of a genetic-algorithm run, with the evaluation budget split into
/// the evolutionary phase and the final polish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgaOutcome {
    pub best: SolutionRecord,
    pub ga_evals: usize,
    pub polish_evals: usize,
}

impl PgaOutcome {
    pub fn total_evals(&self) -> usize {
        self.ga_evals + self.polish_evals
    }
}

/// One population member: genome plus its fitness (the decoded point is
/// only needed transiently, at evaluation time).
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    /// Bit string, one byte per bit (values 0/1), `bits_per_param` bits per
    /// parameter in search-space order, most significant bit first.
    pub genome: Vec<u8>,
    /// Objective value of the decoded point.
    pub obfn: f64,
}

/// Decodes one binary-coded chunk per parameter onto the grid: the chunk's
/// integer maps linearly onto the parameter range, then snaps.
///
/// All-zero chunks land exactly on the parameter's lower bound and all-one
/// chunks exactly on the upper bound; decoded values never leave the grid.
pub fn decode(genome: &[u8], space: &SearchSpace, bits_per_param: u32) -> Vec<f64> {
    let bpp = bits_per_param as usize;
    let max = (1u64 << bits_per_param) - 1;
    space
        .params
        .iter()
        .enumerate()
        .map(|(d, p)| {
            let chunk = &genome[d * bpp..(d + 1) * bpp];
            let mut int = 0u64;
            for &b in chunk {
                int = (int << 1) | b as u64;
            }
            p.snap(p.lower + int as f64 / max as f64 * p.range())
        })
        .collect()
}

/// Binary tournament with replacement: draw two members uniformly, return
/// the index of the fitter (lower objective).
fn select_parent<R: Rng>(island: &[Individual], rng: &mut R) -> usize {
    let a = rng.gen_range(0..island.len());
    let b = rng.gen_range(0..island.len());
    if island[a].obfn <= island[b].obfn {
        a
    } else {
        b
    }
}

/// Single-point crossover at `cut` (first `cut` bits from one parent, rest
/// from the other).
fn crossover_at(a: &[u8], b: &[u8], cut: usize) -> (Vec<u8>, Vec<u8>) {
    let mut c1 = a[..cut].to_vec();
    c1.extend_from_slice(&b[cut..]);
    let mut c2 = b[..cut].to_vec();
    c2.extend_from_slice(&a[cut..]);
    (c1, c2)
}

/// With probability `pc`, crosses the parents at a uniform interior cut;
/// otherwise the children are plain copies.
fn crossover<R: Rng>(a: &[u8], b: &[u8], pc: f64, rng: &mut R) -> (Vec<u8>, Vec<u8>) {
    if rng.gen::<f64>() < pc {
        let cut = rng.gen_range(1..a.len());
        crossover_at(a, b, cut)
    } else {
        (a.to_vec(), b.to_vec())
    }
}

/// Flips each bit independently with probability `pm`.
fn mutate<R: Rng>(genome: &mut [u8], pm: f64, rng: &mut R) {
    for bit in genome {
        if rng.gen::<f64>() < pm {
            *bit ^= 1;
        }
    }
}

/// Indices of the `n` fittest members, ties broken toward lower index.
fn best_indices(island: &[Individual], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..island.len()).collect();
    idx.sort_by(|&a, &b| island[a].obfn.partial_cmp(&island[b].obfn).unwrap().then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

/// Indices of the `n` least-fit members, ties broken toward higher index.
fn worst_indices(island: &[Individual], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..island.len()).collect();
    idx.sort_by(|&a, &b| island[b].obfn.partial_cmp(&island[a].obfn).unwrap().then(b.cmp(&a)));
    idx.truncate(n);
    idx
}

/// Ring migration: island `i` sends copies of its `migrants` best members to
/// island `i+1`, replacing that island's worst. All sends and replacement
/// targets are decided from the pre-migration state, so the order islands
/// are processed in cannot change the result.
pub fn migrate(islands: &mut [Vec<Individual>], migrants: usize) {
    let n = islands.len();
    if n < 2 || migrants == 0 {
        return;
    }
    let snapshot: Vec<Vec<Individual>> = islands.to_vec();
    for (i, sender) in snapshot.iter().enumerate() {
        let recv = (i + 1) % n;
        let senders = best_indices(sender, migrants);
        let targets = worst_indices(&snapshot[recv], migrants);
        for (&s, &t) in senders.iter().zip(&targets) {
            islands[recv][t] = sender[s].clone();
        }
    }
}

/// Evolves one island for one generation: keep the elites, then breed and
/// evaluate children until the island is full again.
fn evolve<F, R>(
    island: &mut Vec<Individual>,
    space: &SearchSpace,
    cfg: &PgaConfig,
    pc: f64,
    pm: f64,
    counter: &mut EvalCounter<'_, F>,
    rng: &mut R,
) where
    F: Fn(&[f64]) -> f64,
    R: Rng,
{
    let elites: Vec<Individual> =
        best_indices(island, cfg.elitism).into_iter().map(|i| island[i].clone()).collect();
    let mut next = elites;
    while next.len() < cfg.members {
        let p1 = select_parent(island, rng);
        let p2 = select_parent(island, rng);
        let (c1, c2) = crossover(&island[p1].genome, &island[p2].genome, pc, rng);
        for mut genome in [c1, c2] {
            if next.len() >= cfg.members {
                break; // odd slot: second child of the last pair is dropped unevaluated
            }
            mutate(&mut genome, pm, rng);
            let point = decode(&genome, space, cfg.bits_per_param);
            let obfn = counter.eval(&point);
            next.push(Individual { genome, obfn });
        }
    }
    *island = next;
}

/// Runs the island-model genetic algorithm, then polishes the best solution
/// with a greedy pattern search. Fully deterministic for a given seed:
/// every island draws from its own counter-mode stream of the seeded
/// generator, and islands evolve in a fixed order.
pub fn pga_run<F>(space: &SearchSpace, obfn: F, cfg: &PgaConfig, seed: u64) -> PgaOutcome
where
    F: Fn(&[f64]) -> f64,
{
    assert!(cfg.islands > 0 && cfg.members > 0, "population must be non-empty");
    assert!(cfg.elitism < cfg.members, "elitism must leave room for children");
    assert!(cfg.migrants <= cfg.members, "cannot migrate more members than an island holds");

    let mut counter = EvalCounter::new(&obfn);
    let genome_len = space.dims() * cfg.bits_per_param as usize;

    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.islands)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1 + i as u64);
            rng
        })
        .collect();

    let mut islands: Vec<Vec<Individual>> = Vec::with_capacity(cfg.islands);
    for rng in rngs.iter_mut() {
        let mut island = Vec::with_capacity(cfg.members);
        for _ in 0..cfg.members {
            let genome: Vec<u8> = (0..genome_len).map(|_| rng.gen_range(0..=1u8)).collect();
            let point = decode(&genome, space, cfg.bits_per_param);
            let obfn = counter.eval(&point);
            island.push(Individual { genome, obfn });
        }
        islands.push(island);
    }

    for gen in 1..=cfg.generations {
        for i in 0..cfg.islands {
            let (pc, pm) = (cfg.crossover_rate(i), cfg.mutation_rate(i));
            evolve(&mut islands[i], space, cfg, pc, pm, &mut counter, &mut rngs[i]);
        }
        if cfg.migration_interval > 0 && gen % cfg.migration_interval == 0 {
            migrate(&mut islands, cfg.migrants);
        }
    }

    let ga_best = counter.best.clone();
    let ga_evals = counter.evals;

    let polish: SearchOutcome = hooke_jeeves(space, &obfn, &cfg.polish, &ga_best.point);
    let best = if polish.best.obfn < ga_best.obfn {
        SolutionRecord {
            point: polish.best.point,
            obfn: polish.best.obfn,
            evals: ga_evals + polish.best.evals,
        }
    } else {
        ga_best
    };

    PgaOutcome { best, ga_evals, polish_evals: polish.total_evals }
}
