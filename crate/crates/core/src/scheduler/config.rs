use serde::{Deserialize, Serialize};

use crate::num::Scalar;

/// Tuning knobs of the search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SearchConfig<T = f64> {
    /// Weight of the extended-set term.
    pub extended_weight: T,
    /// Number of blocks in the extended set.
    pub lookahead: usize,
    /// Choose block permutations by cost (on) or always keep the identity (off).
    pub permutation_enabled: bool,
    /// Length of the rolling `(move, state)` window used to detect repeated paths.
    pub cycle_window: usize,
    /// Fraction of occupied segment nodes above which ions are pushed back into traps.
    pub pushback_threshold: T,
    /// Recursion limit for congestion resolution; `None` uses the number of segment nodes.
    pub max_recursion_depth: Option<usize>,
    /// Alternating forward/reverse passes used to pick the initial layout.
    pub layout_passes: usize,
    pub seed: u64,
    /// Greedy moves allowed without executing a block before escaping; `None` uses the
    /// number of position-graph nodes.
    pub stagnation_limit: Option<usize>,
    /// State expansions for the exhaustive fallback when path-based escape fails.
    pub search_budget: usize,
}

impl<T: Scalar> Default for SearchConfig<T> {
    fn default() -> Self {
        SearchConfig {
            extended_weight: T::lit(0.5),
            lookahead: 20,
            permutation_enabled: true,
            cycle_window: 8,
            pushback_threshold: T::lit(0.5),
            max_recursion_depth: None,
            layout_passes: 3,
            seed: 0,
            stagnation_limit: None,
            search_budget: 1_000_000,
        }
    }
}

impl<T: Scalar> SearchConfig<T> {
    pub fn shaper() -> Self {
        Self::default()
    }

    /// Same search without permutation selection.
    pub fn shaw() -> Self {
        SearchConfig {
            permutation_enabled: false,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.extended_weight >= T::zero()) || !self.extended_weight.is_finite() {
            return Err(format!(
                "extended weight must be finite and non-negative, got {}",
                self.extended_weight
            ));
        }
        if self.cycle_window < 2 {
            return Err(format!(
                "cycle window must be at least 2, got {}",
                self.cycle_window
            ));
        }
        if !(self.pushback_threshold > T::zero() && self.pushback_threshold <= T::one()) {
            return Err(format!(
                "push-back threshold must lie in (0, 1], got {}",
                self.pushback_threshold
            ));
        }
        if self.layout_passes == 0 {
            return Err("layout passes must be at least 1".into());
        }
        Ok(())
    }
}
