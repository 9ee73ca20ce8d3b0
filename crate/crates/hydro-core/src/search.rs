//! Bounded, grid-quantized parameter spaces shared by both optimizers, and
//! the solution records they return.
//!
//! Every decision variable lives on a uniform grid `lower + i·step`. All
//! optimizer moves snap onto that grid, so points can be compared for exact
//! equality and every reported solution is a catalogue-valid size.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// One bounded, gridded decision variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Grid step; all admissible values are `lower + i·step`.
    pub step: f64,
}

impl ParamSpec {
    /// Panics on a malformed range: specs are authored in code, so that is a
    /// programming error.
    pub fn new(name: &str, lower: f64, upper: f64, step: f64) -> Self {
        assert!(lower < upper, "{name}: lower bound must be below upper");
        assert!(step > 0.0, "{name}: grid step must be positive");
        Self { name: name.to_string(), lower, upper, step }
    }

    /// Number of grid steps between the bounds (index range is `0..=units`).
    pub fn units(&self) -> i64 {
        ((self.upper - self.lower) / self.step).round() as i64
    }

    /// Range covered by the parameter.
    pub fn range(&self) -> f64 {
        self.upper - self.lower
    }

    /// Grid value at a unit index, clamped into bounds.
    pub fn value_at(&self, index: i64) -> f64 {
        let clamped = index.clamp(0, self.units());
        self.lower + clamped as f64 * self.step
    }

    /// Index of the nearest grid value.
    pub fn index_of(&self, value: f64) -> i64 {
        (((value - self.lower) / self.step).round() as i64).clamp(0, self.units())
    }

    /// Nearest grid value within bounds.
    pub fn snap(&self, value: f64) -> f64 {
        self.value_at(self.index_of(value))
    }
}

/// An ordered set of [`ParamSpec`]s; points are plain `Vec<f64>` in the same
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamSpec>) -> Self {
        assert!(!params.is_empty(), "search space needs at least one parameter");
        Self { params }
    }

    pub fn dims(&self) -> usize {
        self.params.len()
    }

    /// Snaps every coordinate onto its grid, clamping into bounds.
    pub fn snap(&self, point: &[f64]) -> Vec<f64> {
        assert_eq!(point.len(), self.dims(), "point dimension mismatch");
        point.iter().zip(&self.params).map(|(&v, p)| p.snap(v)).collect()
    }

    /// True when every coordinate is inside its bounds (grid or not).
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dims()
            && point
                .iter()
                .zip(&self.params)
                .all(|(&v, p)| v >= p.lower - 1e-9 && v <= p.upper + 1e-9)
    }

    /// Uniform random grid point.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.params.iter().map(|p| p.value_at(rng.gen_range(0..=p.units()))).collect()
    }
}

/// A solution as reported by an optimizer: the point, its objective value,
/// and how many objective evaluations had been spent when it was first found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub point: Vec<f64>,
    pub obfn: f64,
    /// Evaluation count at the moment of discovery.
    pub evals: usize,
}

/// Result of a full optimizer run: the best solution plus the whole run's
/// evaluation count (discovery count ≤ total).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: SolutionRecord,
    pub total_evals: usize,
}

/// Evaluation bookkeeping shared by the optimizers: counts objective calls
/// and tracks the best solution with the call count at which it was found.
pub(crate) struct EvalCounter<'a, F> {
    obfn: &'a F,
    pub(crate) evals: usize,
    pub(crate) best: SolutionRecord,
}

impl<'a, F: Fn(&[f64]) -> f64> EvalCounter<'a, F> {
    pub(crate) fn new(obfn: &'a F) -> Self {
        Self {
            obfn,
            evals: 0,
            best: SolutionRecord { point: Vec::new(), obfn: f64::INFINITY, evals: 0 },
        }
    }

    pub(crate) fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.obfn)(x);
        if v < self.best.obfn {
            self.best = SolutionRecord { point: x.to_vec(), obfn: v, evals: self.evals };
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn motor() -> ParamSpec {
        ParamSpec::new("motor_disp", 10.0, 1000.0, 1.0)
    }

    fn pipe() -> ParamSpec {
        ParamSpec::new("pipe_diameter", 7.0, 60.0, 0.5)
    }

    #[test]
    fn unit_counts_cover_the_range() {
        assert_eq!(motor().units(), 990);
        assert_eq!(pipe().units(), 106);
    }

    #[test]
    fn snap_rounds_to_nearest_grid_value() {
        // 10 + 512/1023·990 = 505.48…, which rounds down on a unit grid.
        assert_eq!(motor().snap(505.483_87), 505.0);
        assert_eq!(motor().snap(505.5), 506.0);
        assert_eq!(pipe().snap(35.3), 35.5);
        assert_eq!(pipe().snap(35.24), 35.0);
    }

    #[test]
    fn snap_clamps_out_of_bounds_values() {
        assert_eq!(motor().snap(2.0), 10.0);
        assert_eq!(motor().snap(4000.0), 1000.0);
        assert_eq!(pipe().snap(-3.0), 7.0);
    }

    #[test]
    fn random_points_are_reproducible() {
        let space = SearchSpace::new(vec![motor(), pipe()]);
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(space.random_point(&mut a), space.random_point(&mut b));
        }
    }

    proptest! {
        #[test]
        fn snap_is_idempotent_and_on_grid(raw in -100.0f64..1200.0) {
            let p = motor();
            let snapped = p.snap(raw);
            prop_assert_eq!(p.snap(snapped), snapped);
            prop_assert!(snapped >= p.lower && snapped <= p.upper);
            let units = (snapped - p.lower) / p.step;
            prop_assert!((units - units.round()).abs() < 1e-9);
        }

        #[test]
        fn half_steps_snap_on_grid_too(raw in 0.0f64..80.0) {
            let p = pipe();
            let snapped = p.snap(raw);
            prop_assert_eq!(p.snap(snapped), snapped);
            let units = (snapped - p.lower) / p.step;
            prop_assert!((units - units.round()).abs() < 1e-9);
        }

        #[test]
        fn random_points_land_on_grid_within_bounds(seed in 0u64..1000) {
            let space = SearchSpace::new(vec![motor(), pipe()]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let point = space.random_point(&mut rng);
            prop_assert!(space.contains(&point));
            prop_assert_eq!(space.snap(&point), point);
        }
    }
}
