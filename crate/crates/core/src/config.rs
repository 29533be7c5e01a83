use serde::{Deserialize, Serialize};

/// Default bit cap on tower values: 2^20 bits.
pub const DEFAULT_BIT_CAP: u64 = 1 << 20;
/// Default cap on densely stored cube points.
pub const DEFAULT_MAX_POINTS: u64 = 1 << 24;

/// Resource caps and parallelism shared by every engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Worker threads used by the parallel searches. Results never depend on it.
    pub workers: usize,
    /// Maximum number of search-tree nodes a coloring enumeration may visit.
    pub max_nodes: u64,
    /// Largest window `[1..n]` any search is allowed to materialize.
    pub max_window: usize,
    /// Bit cap for exact exponential arithmetic.
    pub bit_cap: u64,
    /// Largest point space stored densely.
    pub max_points: u64,
    /// Largest polynomial family `enumerate_family` will build.
    pub max_family: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            workers: 1,
            max_nodes: 50_000_000,
            max_window: 1 << 16,
            bit_cap: DEFAULT_BIT_CAP,
            max_points: DEFAULT_MAX_POINTS,
            max_family: 1 << 20,
        }
    }
}

impl SearchConfig {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    /// Run `f` inside a rayon pool sized to `workers`.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
        {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
}
