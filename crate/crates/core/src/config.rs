use serde::{Deserialize, Serialize};

/// Hard caps on exponential constructions. Exceeding one is reported as
/// [`Error::ResourceLimit`](crate::Error::ResourceLimit), never truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    pub max_words: usize,
    pub max_states: usize,
    /// Words a streaming check may visit.
    pub max_visited: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_words: 1_000_000,
            max_states: 10_000,
            max_visited: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub pressure_rel: f64,
    pub measure: f64,
    pub lift: f64,
    pub solver_residual: f64,
    pub seed_agreement: f64,
    pub support_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pressure_rel: 1e-12,
            measure: 1e-12,
            lift: 1e-9,
            solver_residual: 1e-8,
            seed_agreement: 1e-6,
            support_floor: 1e-12,
        }
    }
}

/// Every knob an analysis reads. Serialized verbatim into CLI reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub limits: Limits,
    /// Longest word used by word-level equality checks.
    pub word_len_cap: usize,
    /// Plateau for the degree rule; `None` means (number of domain states)².
    pub degree_plateau: Option<usize>,
    /// Plateau for the class-degree rule; `None` means (number of domain symbols)².
    pub class_degree_plateau: Option<usize>,
    /// Word length used by lift and relative-entropy checks.
    pub lift_word_len: usize,
    pub tolerances: Tolerances,
    pub power_iteration_cap: usize,
    pub solver_iteration_cap: usize,
    pub seed: u64,
    pub seeds: usize,
    pub order: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            limits: Limits::default(),
            word_len_cap: 12,
            degree_plateau: None,
            class_degree_plateau: None,
            lift_word_len: 10,
            tolerances: Tolerances::default(),
            power_iteration_cap: 100_000,
            solver_iteration_cap: 100_000,
            seed: 1,
            seeds: 10,
            order: 2,
        }
    }
}
