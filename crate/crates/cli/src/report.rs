use ramsey_core::search::Witness;
use ramsey_core::SearchConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Found,
    NotFound,
    Exhausted,
    Capped,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Found => 0,
            Status::NotFound | Status::Exhausted => 1,
            Status::Capped => 2,
        }
    }
}

/// Resource caps in force for a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_nodes: u64,
    pub max_window: usize,
    pub bit_cap: u64,
    pub max_points: u64,
}

impl From<&SearchConfig> for Caps {
    fn from(c: &SearchConfig) -> Self {
        Caps {
            max_nodes: c.max_nodes,
            max_window: c.max_window,
            bit_cap: c.bit_cap,
            max_points: c.max_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub search_order: String,
    pub caps: Caps,
}

/// The coloring a witness was found in, in the input file formats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContextSpec {
    Coloring { text: String },
    Sets { a: String, b: Option<String> },
}

/// A witness as emitted on the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    #[serde(flatten)]
    pub witness: Witness,
    /// `n` of the window `[1..n]`, absent for rule colorings.
    pub window: Option<usize>,
    /// Number of colors.
    pub colors: usize,
    pub context: ContextSpec,
    pub provenance: Provenance,
}

/// Timing and search-space counters. Never part of determinism checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Perf {
    pub elapsed_ms: f64,
    pub workers: usize,
    pub nodes: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub status: Status,
    pub result: Value,
    pub witnesses: Vec<WitnessRecord>,
    pub counterexamples: Vec<Value>,
    pub caps: Caps,
    pub perf: Perf,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with its `perf` block blanked, for comparing runs.
    pub fn without_perf(&self) -> Report {
        Report {
            perf: Perf::default(),
            ..self.clone()
        }
    }
}
