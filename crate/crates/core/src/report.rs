use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qp::Assignment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Consecutive post-solve costs agreed within tolerance, or the partition
    /// has no cross couplings so further iterations cannot change anything.
    Converged,
    MaxIter,
    /// A post-solve cost repeated one seen earlier in the cycle window.
    Cycle,
}

/// Wall-clock seconds spent in each stage of one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub fields_s: f64,
    pub solve_s: f64,
    pub evaluate_s: f64,
    pub sweep_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost_after_solve: f64,
    /// Absent on the terminating iteration, which skips the sweep.
    pub cost_after_sweep: Option<f64>,
    pub fields_norm: f64,
    /// Whether every subproblem was solved to proven optimality.
    pub all_parts_optimal: bool,
    pub feasible: bool,
    pub times: StageTimes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    pub k: usize,
    pub best_x: Assignment,
    /// Cost of `best_x` under the solved objective (including any penalty
    /// terms for constraints that could not be enforced per part).
    pub best_cost: f64,
    /// Cost of `best_x` under the original program.
    pub objective_cost: f64,
    pub feasible: bool,
    pub iterations_run: usize,
    pub termination: Termination,
    /// From the start of partitioning to termination.
    pub tts_seconds: f64,
    pub partition_seconds: f64,
    pub cut_weight: f64,
    /// Original constraint indices folded into the objective as penalties.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub penalized_constraints: Vec<usize>,
    pub iterations: Vec<IterationRecord>,
}

impl SolveReport {
    /// Post-solve costs, one per iteration.
    pub fn cost_trajectory(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.cost_after_solve).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
