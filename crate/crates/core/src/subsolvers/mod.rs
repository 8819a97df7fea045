//! Solvers for individual subproblems.
//!
//! All solvers work on a (local) [`QuadraticProgram`] and treat its
//! constraints as hard: they return a satisfying assignment or an
//! [`Error::Infeasible`], never a violating assignment.

mod branch_bound;
mod exhaustive;
mod greedy;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::decomposition::Subproblem;
use crate::error::{Error, Result};
use crate::qp::{Assignment, Constraint, ConstraintKind, QuadraticProgram};

pub use branch_bound::branch_and_bound;
pub use exhaustive::{exhaustive_minimum, DEFAULT_EXHAUSTIVE_CAP};
pub use greedy::greedy_descent;

/// Search limits. `None` means unlimited; whichever limit triggers first stops
/// the search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverBudget {
    #[serde(default)]
    pub node_budget: Option<u64>,
    #[serde(default, rename = "wall_limit_s")]
    pub wall_limit: Option<f64>,
}

impl SolverBudget {
    pub fn unlimited() -> Self {
        SolverBudget::default()
    }

    pub fn nodes(n: u64) -> Self {
        SolverBudget {
            node_budget: Some(n),
            wall_limit: None,
        }
    }

    pub fn seconds(s: f64) -> Self {
        SolverBudget {
            node_budget: None,
            wall_limit: Some(s),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.wall_limit.is_none()
    }

    pub(crate) fn wall_duration(&self) -> Option<Duration> {
        self.wall_limit.map(|s| Duration::from_secs_f64(s.max(0.0)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// The search completed and proved optimality.
    Optimal,
    /// Best assignment found before a limit (or a heuristic's stopping rule).
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubSolution {
    pub x: Assignment,
    pub cost: f64,
    pub status: SolveStatus,
    /// Search nodes (branch-and-bound), states (exhaustive) or moves (greedy).
    pub work: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exhaustive,
    BranchBound,
    Greedy,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SolverKind::Exhaustive),
            "branch_bound" => Ok(SolverKind::BranchBound),
            "greedy" => Ok(SolverKind::Greedy),
            other => Err(Error::InvalidParameter(format!(
                "unknown subsolver '{other}' (expected exhaustive, branch_bound or greedy)"
            ))),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Exhaustive => "exhaustive",
            SolverKind::BranchBound => "branch_bound",
            SolverKind::Greedy => "greedy",
        })
    }
}

/// Anything that can minimize a local program under its constraints.
///
/// This is the extension point for external backends; implementations must
/// be callable concurrently on distinct subproblems.
pub trait SubSolver: Send + Sync {
    fn solve(&self, program: &QuadraticProgram) -> Result<SubSolution>;

    /// Whether constraints are honoured as hard constraints.
    fn enforces_constraints(&self) -> bool {
        true
    }
}

/// One of the built-in solvers with its settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuiltinSolver {
    pub kind: SolverKind,
    pub budget: SolverBudget,
    pub exhaustive_cap: usize,
    pub seed: u64,
}

impl BuiltinSolver {
    pub fn new(kind: SolverKind, budget: SolverBudget) -> Self {
        BuiltinSolver {
            kind,
            budget,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            seed: 0,
        }
    }
}

impl SubSolver for BuiltinSolver {
    fn solve(&self, program: &QuadraticProgram) -> Result<SubSolution> {
        match self.kind {
            SolverKind::Exhaustive => exhaustive_minimum(program, self.exhaustive_cap),
            SolverKind::BranchBound => branch_and_bound(program, &self.budget),
            SolverKind::Greedy => greedy_descent(program, self.seed),
        }
    }
}

pub fn solve_exhaustive(sp: &Subproblem) -> Result<SubSolution> {
    exhaustive_minimum(&sp.program, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn solve_branch_bound(sp: &Subproblem, budget: &SolverBudget) -> Result<SubSolution> {
    branch_and_bound(&sp.program, budget)
}

pub fn solve_greedy(sp: &Subproblem, seed: u64) -> Result<SubSolution> {
    greedy_descent(&sp.program, seed)
}

/// Incremental left-hand sides of a program's constraints.
#[derive(Clone, Debug)]
pub(crate) struct ConstraintTracker<'a> {
    constraints: &'a [Constraint],
    /// Per variable: (constraint index, coefficient).
    pub by_var: Vec<Vec<(usize, f64)>>,
    pub lhs: Vec<f64>,
}

impl<'a> ConstraintTracker<'a> {
    pub fn new(program: &'a QuadraticProgram, x: &Assignment) -> Self {
        let constraints = program.constraints();
        let mut by_var = vec![Vec::new(); program.n()];
        for (c, con) in constraints.iter().enumerate() {
            for (&i, &a) in con.support.iter().zip(&con.coefficients) {
                by_var[i].push((c, a));
            }
        }
        let lhs = constraints.iter().map(|c| c.lhs(x)).collect();
        ConstraintTracker { constraints, by_var, lhs }
    }

    pub fn all_hold(&self) -> bool {
        self.constraints.iter().zip(&self.lhs).all(|(c, &l)| c.holds_at(l))
    }

    /// Applies a signed change (`+1` raise, `-1` lower) of variable `i`.
    pub fn apply(&mut self, i: usize, sign: f64) {
        for &(c, a) in &self.by_var[i] {
            self.lhs[c] += sign * a;
        }
    }

    /// Whether every constraint still holds after the given signed changes,
    /// ignoring the constraint at `skip` (if any).
    pub fn holds_after(&self, changes: &[(usize, f64)], skip: Option<usize>) -> bool {
        let mut touched: Vec<(usize, f64)> = Vec::new();
        for &(i, sign) in changes {
            for &(c, a) in &self.by_var[i] {
                match touched.iter_mut().find(|t| t.0 == c) {
                    Some(t) => t.1 += sign * a,
                    None => touched.push((c, sign * a)),
                }
            }
        }
        touched
            .iter()
            .filter(|t| Some(t.0) != skip)
            .all(|&(c, d)| self.constraints[c].holds_at(self.lhs[c] + d))
    }
}

/// The single cardinality-equality constraint covering every variable, if
/// that is the program's only cardinality constraint.
pub(crate) fn global_quota(program: &QuadraticProgram) -> Option<(usize, ConstraintKind, usize)> {
    let mut found = None;
    for (idx, c) in program.constraints().iter().enumerate() {
        if c.kind.is_cardinality() {
            if found.is_some() || c.support.len() != program.n() {
                return None;
            }
            found = Some((idx, c.kind, c.cardinality_bound().unwrap()));
        }
    }
    found
}

/// Rejects cardinality requirements that no assignment can meet.
pub(crate) fn check_quotas(program: &QuadraticProgram) -> Result<()> {
    for c in program.constraints() {
        if c.kind == ConstraintKind::CardinalityEq && c.bound > c.support.len() as f64 {
            return Err(Error::Infeasible(format!(
                "quota {} exceeds the {} variables it covers",
                c.bound,
                c.support.len()
            )));
        }
    }
    Ok(())
}
