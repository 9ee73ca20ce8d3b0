//! Tabu-restricted pattern search over gridded design spaces.
//!
//! The search walks the grid with coordinate exploration moves (± one step
//! quantum per axis), always moving to the best non-banned neighbor even
//! when that is uphill, which lets it climb out of local minima. A FIFO ban
//! list of recently visited points prevents immediate cycling. Downhill
//! moves trigger a pattern move that extrapolates along the improving
//! direction. After repeated failures to improve on the best solution seen,
//! the step size halves; after repeated step reductions, the search
//! diversifies by recombining coordinates of the best solutions kept in a
//! small intermediate memory. The search stops when the step size falls
//! below a floor or an evaluation budget is exhausted.
//!
//! [`hooke_jeeves`] is the greedy cousin (no ban list, moves only downhill)
//! used to polish candidate solutions produced by other optimizers.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::search::{EvalCounter, ParamSpec, SearchOutcome, SearchSpace, SolutionRecord};

/// Tuning for [`tabu_search`]. Step sizes are fractions of each parameter's
/// range, so one setting serves spaces of any scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabuConfig {
    /// Starting step, as a fraction of each parameter's range.
    pub initial_step: f64,
    /// Multiplier applied to the step on each reduction.
    pub step_reduction: f64,
    /// Search stops once the step fraction falls below this.
    pub min_step: f64,
    /// Consecutive accepted moves without a new overall best before the
    /// step is reduced.
    pub stall_limit: usize,
    /// Step reductions without a new overall best before diversifying.
    pub reduction_limit: usize,
    /// Capacity of the FIFO ban list of recently visited points.
    pub tabu_len: usize,
    /// Capacity of the intermediate memory of best solutions.
    pub intermediate_len: usize,
    /// Extrapolation factor for pattern moves.
    pub pattern_factor: f64,
    /// Evaluation budget (checked between moves).
    pub max_evals: usize,
}

impl Default for TabuConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            step_reduction: 0.85,
            min_step: 0.0005,
            stall_limit: 3,
            reduction_limit: 2,
            tabu_len: 8,
            intermediate_len: 6,
            pattern_factor: 1.0,
            max_evals: 2000,
        }
    }
}

/// Number of grid quanta a move of `frac` (fraction of range) spans on
/// `param`, never less than one quantum.
pub(crate) fn move_units(frac: f64, param: &ParamSpec) -> i64 {
    ((frac * param.range() / param.step).round() as i64).max(1)
}

/// Mutable search memory: ban list, intermediate best solutions, and the
/// step/stall ladder.
#[derive(Debug, Clone)]
pub struct TabuState {
    /// Recently visited points, oldest first.
    pub tabu: VecDeque<Vec<f64>>,
    /// Best solutions seen, oldest first; feeds diversification.
    pub intermediate: Vec<SolutionRecord>,
    /// Current step as a fraction of each parameter's range.
    pub step_frac: f64,
    /// Accepted moves since the last overall-best improvement or reduction.
    pub stalls: usize,
    /// Step reductions since the last overall-best improvement.
    pub reductions_since_best: usize,
    /// Whether the one-time step reset on first diversification was spent.
    pub step_reset_used: bool,
}

impl TabuState {
    pub fn new(cfg: &TabuConfig) -> Self {
        Self {
            tabu: VecDeque::new(),
            intermediate: Vec::new(),
            step_frac: cfg.initial_step,
            stalls: 0,
            reductions_since_best: 0,
            step_reset_used: false,
        }
    }

    /// Exact-equality membership test. All candidate points come from grid
    /// index arithmetic, so equal grid points are bitwise equal.
    pub fn is_tabu(&self, point: &[f64]) -> bool {
        self.tabu.iter().any(|p| p == point)
    }

    /// Pushes a visited point onto the ban list, evicting the oldest entry
    /// beyond capacity.
    pub fn record_accepted(&mut self, cfg: &TabuConfig, point: Vec<f64>) {
        self.tabu.push_back(point);
        while self.tabu.len() > cfg.tabu_len {
            self.tabu.pop_front();
        }
    }

    /// Stores a new overall-best solution in the intermediate memory,
    /// evicting the oldest entry beyond capacity.
    pub fn update_intermediate(&mut self, cfg: &TabuConfig, record: SolutionRecord) {
        self.intermediate.push(record);
        while self.intermediate.len() > cfg.intermediate_len {
            self.intermediate.remove(0);
        }
    }

    /// Evaluates the non-banned ± neighbors of `base` along every axis and
    /// returns the best one (even if worse than `base`). Banned neighbors
    /// are skipped without evaluation. `None` means every neighbor was
    /// banned or out of reach.
    pub fn explore<F>(
        &self,
        space: &SearchSpace,
        base: &[f64],
        eval: &mut F,
    ) -> Option<(Vec<f64>, f64)>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for (d, param) in space.params.iter().enumerate() {
            let idx = param.index_of(base[d]);
            let units = move_units(self.step_frac, param);
            for dir in [-1i64, 1] {
                let cand_idx = (idx + dir * units).clamp(0, param.units());
                let value = param.value_at(cand_idx);
                if value == base[d] {
                    continue; // clamped onto the base point: not a move
                }
                let mut cand = base.to_vec();
                cand[d] = value;
                if self.is_tabu(&cand) {
                    continue;
                }
                let v = eval(&cand);
                if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                    best = Some((cand, v));
                }
            }
        }
        best
    }

    /// Extrapolates from `old` through `new` by `factor`, snapped to the
    /// grid and clamped to bounds.
    pub fn pattern_move(space: &SearchSpace, old: &[f64], new: &[f64], factor: f64) -> Vec<f64> {
        let raw: Vec<f64> =
            new.iter().zip(old).map(|(n, o)| n + factor * (n - o)).collect();
        space.snap(&raw)
    }

    /// Produces a restart point by drawing each coordinate from a uniformly
    /// random intermediate-memory entry (or a fully random point when the
    /// memory is empty), retrying if the draw lands on a banned point. The
    /// first diversification also resets the step to `initial`.
    pub fn diversify<R: Rng>(
        &mut self,
        cfg: &TabuConfig,
        space: &SearchSpace,
        rng: &mut R,
    ) -> Vec<f64> {
        let mut point = self.draw_restart(space, rng);
        let mut attempts = 0;
        while self.is_tabu(&point) {
            attempts += 1;
            point = if attempts < 8 {
                self.draw_restart(space, rng)
            } else {
                space.random_point(rng)
            };
        }
        if !self.step_reset_used {
            self.step_frac = cfg.initial_step;
            self.step_reset_used = true;
        }
        self.stalls = 0;
        self.reductions_since_best = 0;
        point
    }

    fn draw_restart<R: Rng>(&self, space: &SearchSpace, rng: &mut R) -> Vec<f64> {
        if self.intermediate.is_empty() {
            return space.random_point(rng);
        }
        (0..space.dims())
            .map(|d| {
                let pick = rng.gen_range(0..self.intermediate.len());
                self.intermediate[pick].point[d]
            })
            .collect()
    }
}

/// Runs the tabu-restricted pattern search from a random start and returns
/// the best solution found together with the total evaluation count.
pub fn tabu_search<F, R>(
    space: &SearchSpace,
    obfn: F,
    cfg: &TabuConfig,
    rng: &mut R,
) -> SearchOutcome
where
    F: Fn(&[f64]) -> f64,
    R: Rng,
{
    let mut st = TabuState::new(cfg);
    let mut counter = EvalCounter::new(&obfn);

    let mut base = space.random_point(rng);
    let mut base_val = counter.eval(&base);
    let mut best_obfn = counter.best.obfn;
    st.update_intermediate(cfg, counter.best.clone());
    st.record_accepted(cfg, base.clone());

    while st.step_frac >= cfg.min_step && counter.evals < cfg.max_evals {
        let neighbor = st.explore(space, &base, &mut |x| counter.eval(x));

        let (cand, cand_val) = match neighbor {
            Some(found) => found,
            None => {
                // Entire neighborhood banned: restart from recombined bests.
                base = st.diversify(cfg, space, rng);
                base_val = counter.eval(&base);
                st.record_accepted(cfg, base.clone());
                if counter.best.obfn < best_obfn {
                    best_obfn = counter.best.obfn;
                    st.update_intermediate(cfg, counter.best.clone());
                }
                continue;
            }
        };

        let (mut accepted, mut accepted_val) = (cand, cand_val);
        if accepted_val < base_val {
            // Downhill: try extending the move along the same direction.
            let pat = TabuState::pattern_move(space, &base, &accepted, cfg.pattern_factor);
            if pat != accepted && pat != base && !st.is_tabu(&pat) {
                let pv = counter.eval(&pat);
                if pv < accepted_val {
                    accepted = pat;
                    accepted_val = pv;
                }
            }
        }

        base = accepted;
        base_val = accepted_val;
        st.record_accepted(cfg, base.clone());

        if counter.best.obfn < best_obfn {
            best_obfn = counter.best.obfn;
            st.update_intermediate(cfg, counter.best.clone());
            st.stalls = 0;
            st.reductions_since_best = 0;
        } else {
            st.stalls += 1;
            if st.stalls >= cfg.stall_limit {
                st.stalls = 0;
                st.step_frac *= cfg.step_reduction;
                st.reductions_since_best += 1;
                if st.reductions_since_best >= cfg.reduction_limit
                    && st.step_frac >= cfg.min_step
                {
                    base = st.diversify(cfg, space, rng);
                    base_val = counter.eval(&base);
                    st.record_accepted(cfg, base.clone());
                    if counter.best.obfn < best_obfn {
                        best_obfn = counter.best.obfn;
                        st.update_intermediate(cfg, counter.best.clone());
                    }
                }
            }
        }
    }

    SearchOutcome { best: counter.best, total_evals: counter.evals }
}

/// Tuning for [`hooke_jeeves`]. Steps are whole grid quanta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HookeJeevesConfig {
    /// Starting step, in grid quanta.
    pub initial_step_units: i64,
    /// Multiplier applied to the step when no neighbor improves.
    pub step_reduction: f64,
    /// Search stops once the step falls below this many quanta.
    pub min_step_units: i64,
    /// Evaluation budget (checked between rounds).
    pub max_evals: usize,
    /// Extrapolation factor for pattern moves.
    pub pattern_factor: f64,
}

impl Default for HookeJeevesConfig {
    fn default() -> Self {
        Self {
            initial_step_units: 2,
            step_reduction: 0.5,
            min_step_units: 1,
            max_evals: 800,
            pattern_factor: 1.0,
        }
    }
}

/// Greedy pattern search from `start`: moves only downhill, halves the step
/// when no axis neighbor improves, and stops below the minimum step or at
/// the evaluation budget. Used to polish near-optimal candidates.
pub fn hooke_jeeves<F>(
    space: &SearchSpace,
    obfn: F,
    cfg: &HookeJeevesConfig,
    start: &[f64],
) -> SearchOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let mut counter = EvalCounter::new(&obfn);
    let mut base = space.snap(start);
    let mut base_val = counter.eval(&base);
    let mut units = cfg.initial_step_units as f64;

    while units.round() as i64 >= cfg.min_step_units && counter.evals < cfg.max_evals {
        let step_units = units.round() as i64;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for (d, param) in space.params.iter().enumerate() {
            let idx = param.index_of(base[d]);
            for dir in [-1i64, 1] {
                let cand_idx = (idx + dir * step_units).clamp(0, param.units());
                let value = param.value_at(cand_idx);
                if value == base[d] {
                    continue;
                }
                let mut cand = base.to_vec();
                cand[d] = value;
                let v = counter.eval(&cand);
                if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                    best = Some((cand, v));
                }
            }
        }

        match best {
            Some((cand, val)) if val < base_val => {
                let pat = TabuState::pattern_move(space, &base, &cand, cfg.pattern_factor);
                let (mut next, mut next_val) = (cand, val);
                if pat != next && pat != base {
                    let pv = counter.eval(&pat);
                    if pv < next_val {
                        next = pat;
                        next_val = pv;
                    }
                }
                base = next;
                base_val = next_val;
            }
            _ => {
                units *= cfg.step_reduction;
            }
        }
    }

    SearchOutcome { best: counter.best, total_evals: counter.evals }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::cell::RefCell;

    fn space_1d() -> SearchSpace {
        SearchSpace::new(vec![ParamSpec::new("x", -1.0, 1.0, 0.5)])
    }

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn move_units_scales_with_range_and_floors_at_one() {
        let motor = ParamSpec::new("m", 10.0, 1000.0, 1.0);
        assert_eq!(move_units(0.1, &motor), 99);
        assert_eq!(move_units(1e-4, &motor), 1);
        let pipe = ParamSpec::new("p", 7.0, 60.0, 0.5);
        assert_eq!(move_units(0.1, &pipe), 11);
    }

    #[test]
    fn ban_list_is_fifo_with_capacity() {
        let cfg = TabuConfig { tabu_len: 3, ..TabuConfig::default() };
        let mut st = TabuState::new(&cfg);
        for i in 0..5 {
            st.record_accepted(&cfg, vec![i as f64]);
        }
        assert_eq!(st.tabu.len(), 3);
        assert!(!st.is_tabu(&[0.0]));
        assert!(!st.is_tabu(&[1.0]));
        assert!(st.is_tabu(&[2.0]));
        assert!(st.is_tabu(&[4.0]));
    }

    #[test]
    fn intermediate_memory_evicts_oldest() {
        let cfg = TabuConfig { intermediate_len: 2, ..TabuConfig::default() };
        let mut st = TabuState::new(&cfg);
        for i in 0..3 {
            st.update_intermediate(
                &cfg,
                SolutionRecord { point: vec![i as f64], obfn: -(i as f64), evals: i as usize + 1 },
            );
        }
        assert_eq!(st.intermediate.len(), 2);
        assert_eq!(st.intermediate[0].point, vec![1.0]);
        assert_eq!(st.intermediate[1].point, vec![2.0]);
    }

    #[test]
    fn explore_returns_best_neighbor_and_skips_banned() {
        let space = space_1d();
        let cfg = TabuConfig { initial_step: 0.25, ..TabuConfig::default() }; // 1 quantum
        let mut st = TabuState::new(&cfg);
        let base = vec![0.5];

        let found = st.explore(&space, &base, &mut |x| sphere(x)).unwrap();
        assert_eq!(found, (vec![0.0], 0.0));

        st.record_accepted(&cfg, vec![0.0]);
        let found = st.explore(&space, &base, &mut |x| sphere(x)).unwrap();
        assert_eq!(found, (vec![1.0], 1.0)); // uphill, but 0.0 is banned

        st.record_accepted(&cfg, vec![1.0]);
        assert!(st.explore(&space, &base, &mut |x| sphere(x)).is_none());
    }

    #[test]
    fn explore_never_evaluates_banned_points() {
        let space = SearchSpace::new(vec![
            ParamSpec::new("x", 0.0, 10.0, 1.0),
            ParamSpec::new("y", 0.0, 10.0, 1.0),
        ]);
        let cfg = TabuConfig::default();
        let mut st = TabuState::new(&cfg);
        st.record_accepted(&cfg, vec![4.0, 5.0]);
        st.record_accepted(&cfg, vec![5.0, 6.0]);

        let evaluated = RefCell::new(Vec::new());
        st.explore(&space, &[5.0, 5.0], &mut |x: &[f64]| {
            evaluated.borrow_mut().push(x.to_vec());
            sphere(x)
        });
        for p in evaluated.borrow().iter() {
            assert!(!st.is_tabu(p), "evaluated banned point {p:?}");
        }
        assert_eq!(evaluated.borrow().len(), 2); // 4 neighbors, 2 banned
    }

    #[test]
    fn pattern_move_extrapolates_snaps_and_clamps() {
        let space = SearchSpace::new(vec![ParamSpec::new("x", 0.0, 100.0, 1.0)]);
        let p = TabuState::pattern_move(&space, &[10.0], &[12.0], 2.0);
        assert_eq!(p, vec![16.0]);
        let clamped = TabuState::pattern_move(&space, &[10.0], &[90.0], 1.0);
        assert_eq!(clamped, vec![100.0]);
    }

    #[test]
    fn diversify_recombines_intermediate_coordinates() {
        let space = SearchSpace::new(vec![
            ParamSpec::new("x", 0.0, 10.0, 1.0),
            ParamSpec::new("y", 0.0, 10.0, 1.0),
        ]);
        let cfg = TabuConfig::default();
        let mut st = TabuState::new(&cfg);
        st.update_intermediate(&cfg, SolutionRecord { point: vec![0.0, 0.0], obfn: 1.0, evals: 1 });
        st.update_intermediate(&cfg, SolutionRecord { point: vec![10.0, 10.0], obfn: 0.5, evals: 2 });

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut zero_count = 0usize;
        const DRAWS: usize = 10_000;
        for _ in 0..DRAWS {
            let p = st.diversify(&cfg, &space, &mut rng);
            for c in &p {
                assert!(*c == 0.0 || *c == 10.0, "coordinate {c} not from memory");
            }
            if p[0] == 0.0 {
                zero_count += 1;
            }
        }
        let freq = zero_count as f64 / DRAWS as f64;
        assert!((freq - 0.5).abs() < 0.02, "entry pick frequency {freq}");
    }

    #[test]
    fn diversify_resets_step_once() {
        let space = space_1d();
        let cfg = TabuConfig::default();
        let mut st = TabuState::new(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(1);

        st.step_frac = 0.01;
        st.diversify(&cfg, &space, &mut rng);
        assert_eq!(st.step_frac, cfg.initial_step);
        assert!(st.step_reset_used);

        st.step_frac = 0.01;
        st.diversify(&cfg, &space, &mut rng);
        assert_eq!(st.step_frac, 0.01); // no second reset
    }

    #[test]
    fn tabu_search_minimizes_sphere_within_budget() {
        let space = SearchSpace::new(vec![
            ParamSpec::new("x", -5.0, 5.0, 0.1),
            ParamSpec::new("y", -5.0, 5.0, 0.1),
            ParamSpec::new("z", -5.0, 5.0, 0.1),
        ]);
        let cfg = TabuConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let out = tabu_search(&space, sphere, &cfg, &mut rng);
        assert!(out.best.obfn < 1e-12, "best {} at {:?}", out.best.obfn, out.best.point);
        assert!(out.best.evals <= 1500, "took {} evals", out.best.evals);
        assert!(out.total_evals <= cfg.max_evals + 2 * space.dims() + 2);
    }

    #[test]
    fn tabu_search_is_deterministic_per_seed() {
        let space = SearchSpace::new(vec![
            ParamSpec::new("x", -5.0, 5.0, 0.1),
            ParamSpec::new("y", -5.0, 5.0, 0.1),
        ]);
        let cfg = TabuConfig::default();
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            tabu_search(&space, sphere, &cfg, &mut rng)
        };
        assert_eq!(run(3), run(3));
        // Different seeds must start somewhere else (the final best may
        // coincide on an easy surface, so compare the first evaluation).
        let first_eval = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let first: std::cell::RefCell<Option<Vec<f64>>> = std::cell::RefCell::new(None);
            tabu_search(
                &space,
                |x: &[f64]| {
                    first.borrow_mut().get_or_insert_with(|| x.to_vec());
                    sphere(x)
                },
                &cfg,
                &mut rng,
            );
            first.into_inner().unwrap()
        };
        assert_ne!(first_eval(3), first_eval(4));
    }

    #[test]
    fn hooke_jeeves_polishes_to_the_grid_optimum() {
        let space = SearchSpace::new(vec![
            ParamSpec::new("x", -5.0, 5.0, 0.1),
            ParamSpec::new("y", -5.0, 5.0, 0.1),
        ]);
        let out = hooke_jeeves(&space, sphere, &HookeJeevesConfig::default(), &[0.4, -0.3]);
        assert_eq!(out.best.point, vec![0.0, 0.0]);
        assert!(out.total_evals <= HookeJeevesConfig::default().max_evals);
    }

    #[test]
    fn hooke_jeeves_never_accepts_uphill_moves() {
        let space = SearchSpace::new(vec![ParamSpec::new("x", 0.0, 10.0, 1.0)]);
        // Start in a local minimum of a two-well function; greedy search
        // must stay put rather than cross the barrier.
        let two_well = |x: &[f64]| {
            let v = x[0];
            (v - 2.0).powi(2).min((v - 8.0).powi(2) - 0.5)
        };
        let out = hooke_jeeves(&space, two_well, &HookeJeevesConfig::default(), &[2.0]);
        assert_eq!(out.best.point, vec![2.0]);
    }

    proptest! {
        #[test]
        fn search_stays_on_grid_and_in_bounds(seed in 0u64..256) {
            let space = SearchSpace::new(vec![
                ParamSpec::new("x", -3.0, 7.0, 0.5),
                ParamSpec::new("y", 0.0, 1.0, 0.01),
            ]);
            let cfg = TabuConfig { max_evals: 200, ..TabuConfig::default() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let seen = RefCell::new(Vec::new());
            let out = tabu_search(
                &space,
                |x: &[f64]| {
                    seen.borrow_mut().push(x.to_vec());
                    sphere(x)
                },
                &cfg,
                &mut rng,
            );
            for p in seen.borrow().iter() {
                prop_assert!(space.contains(p), "evaluated off-space point {p:?}");
                prop_assert_eq!(&space.snap(p), p, "evaluated off-grid point");
            }
            prop_assert!(space.contains(&out.best.point));
        }

        #[test]
        fn best_record_matches_reported_minimum(seed in 0u64..64) {
            let space = SearchSpace::new(vec![ParamSpec::new("x", -2.0, 2.0, 0.1)]);
            let cfg = TabuConfig { max_evals: 120, ..TabuConfig::default() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lowest = RefCell::new(f64::INFINITY);
            let out = tabu_search(
                &space,
                |x: &[f64]| {
                    let v = sphere(x);
                    let mut low = lowest.borrow_mut();
                    if v < *low { *low = v; }
                    v
                },
                &cfg,
                &mut rng,
            );
            prop_assert_eq!(out.best.obfn, *lowest.borrow());
            prop_assert!(out.best.evals <= out.total_evals);
        }
    }
}
