//! The iterative split-and-solve loop.
//!
//! ```text
//! partition once; x <- 0 (or warm start)
//! repeat up to n_iter:
//!     d <- fields(x)
//!     x <- concat_k solve(H_k(. ; d_k))      (parts in parallel)
//!     stop if H(x) repeats the previous cost (or an earlier one in the window)
//!     x <- sweep(x)
//! return the best feasible post-solve x
//! ```

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{apportion, assign_local_constraints, Decomposition};
use crate::error::{Error, Result};
use crate::partition::{
    build_graph, cut_weight, partition_greedy, partition_spectral_with, Partition, SpectralOptions,
    DEFAULT_DENSE_LIMIT,
};
use crate::qp::{Assignment, Constraint, ConstraintKind, QpBuilder, QuadraticProgram};
use crate::report::{IterationRecord, SolveReport, StageTimes, Termination};
use crate::subsolvers::{BuiltinSolver, SolveStatus, SolverBudget, SolverKind, SubSolver, DEFAULT_EXHAUSTIVE_CAP};
use crate::sweep::{sweep_double_flip_with, sweep_single_flip, DoubleFlipOptions};

/// Environment variable read for the default worker count.
pub const WORKERS_ENV: &str = "SPLITQP_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionerKind {
    /// Spectral up to the dense limit, greedy above it.
    Auto,
    Spectral,
    Greedy,
    /// Use `SplitConfig::partition`.
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// `single_flip` without cardinality constraints, `both` with them.
    Auto,
    SingleFlip,
    DoubleFlip,
    /// Double flips, then single flips.
    Both,
    None,
}

impl std::str::FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidParameter(format!("unknown sweep '{s}'")))
    }
}

impl std::str::FromStr for PartitionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidParameter(format!("unknown partitioner '{s}'")))
    }
}

pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w: &usize| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn default_iters() -> usize {
    500
}
fn default_tol() -> f64 {
    1e-9
}
fn default_window() -> usize {
    10
}
fn default_subsolver() -> SolverKind {
    SolverKind::BranchBound
}
fn default_budget() -> SolverBudget {
    SolverBudget::seconds(10.0)
}
fn default_cap() -> usize {
    DEFAULT_EXHAUSTIVE_CAP
}
fn default_dense_limit() -> usize {
    DEFAULT_DENSE_LIMIT
}
fn default_partitioner() -> PartitionerKind {
    PartitionerKind::Auto
}
fn default_sweep() -> SweepKind {
    SweepKind::Auto
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub k: usize,
    #[serde(default = "default_iters")]
    pub n_iter: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_partitioner")]
    pub partitioner: PartitionerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    #[serde(default = "default_dense_limit")]
    pub dense_limit: usize,
    #[serde(default = "default_subsolver")]
    pub subsolver: SolverKind,
    #[serde(default = "default_budget")]
    pub budget: SolverBudget,
    #[serde(default = "default_cap")]
    pub exhaustive_cap: usize,
    #[serde(default = "default_sweep")]
    pub sweep: SweepKind,
    #[serde(default = "default_tol")]
    pub convergence_tol: f64,
    #[serde(default = "default_window")]
    pub cycle_window: usize,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
    /// Weight of penalty terms for equality constraints spanning several
    /// parts; `None` picks `1 + sum |Q|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<Assignment>,
}

impl SplitConfig {
    pub fn new(k: usize) -> Self {
        SplitConfig {
            k,
            n_iter: default_iters(),
            seed: 0,
            partitioner: default_partitioner(),
            partition: None,
            dense_limit: DEFAULT_DENSE_LIMIT,
            subsolver: default_subsolver(),
            budget: default_budget(),
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            sweep: default_sweep(),
            convergence_tol: default_tol(),
            cycle_window: default_window(),
            worker_count: default_workers(),
            penalty_weight: None,
            warm_start: None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.k == 0 || self.k > n {
            return bad(format!("k = {} must lie in [1, {n}]", self.k));
        }
        if self.n_iter == 0 {
            return bad("n_iter must be at least 1".into());
        }
        if !(self.convergence_tol >= 0.0) {
            return bad("convergence_tol must be non-negative".into());
        }
        if self.worker_count == 0 {
            return bad("worker_count must be at least 1".into());
        }
        if let Some(w) = self.penalty_weight {
            if !(w > 0.0) {
                return bad("penalty_weight must be positive".into());
            }
        }
        if let Some(t) = self.budget.wall_limit {
            if !(t >= 0.0) {
                return bad("wall_limit_s must be non-negative".into());
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn solver(&self) -> BuiltinSolver {
        BuiltinSolver {
            kind: self.subsolver,
            budget: self.budget,
            exhaustive_cap: self.exhaustive_cap,
            seed: self.seed,
        }
    }
}

/// A program with penalty terms and the constant they shed on expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct PenalizedProgram {
    pub program: QuadraticProgram,
    pub constant: f64,
}

/// Adds `weight * (sum a_i x_i - b)^2` for each equality, expanded with
/// `x_i^2 = x_i`; the `weight * b^2` parts are returned as `constant`.
pub fn penalty_augment(qp: &QuadraticProgram, equalities: &[Constraint], weight: f64) -> Result<PenalizedProgram> {
    if !(weight > 0.0) {
        return Err(Error::InvalidParameter("penalty weight must be positive".into()));
    }
    if equalities.is_empty() {
        return Ok(PenalizedProgram {
            program: qp.clone(),
            constant: 0.0,
        });
    }
    let mut b = QpBuilder::new(qp.n());
    for (i, &v) in qp.linear().iter().enumerate() {
        b.add_linear(i, v);
    }
    for &(i, j, v) in qp.terms() {
        b.add_quadratic(i, j, v);
    }
    let mut constant = 0.0;
    for c in equalities {
        if !c.kind.is_equality() {
            return Err(Error::Unsupported(
                "penalties for inequality constraints need slack variables".into(),
            ));
        }
        c.validate(qp.n())?;
        for (s, (&i, &a)) in c.support.iter().zip(&c.coefficients).enumerate() {
            b.add_linear(i, weight * (a * a - 2.0 * c.bound * a));
            for (&j, &a2) in c.support[s + 1..].iter().zip(&c.coefficients[s + 1..]) {
                b.add_quadratic(i, j, 2.0 * weight * a * a2);
            }
        }
        constant += weight * c.bound * c.bound;
    }
    for c in qp.constraints() {
        b.add_constraint(c.clone());
    }
    if let Some(class) = qp.class() {
        b.class(class);
    }
    Ok(PenalizedProgram {
        program: b.build()?,
        constant,
    })
}

fn build_partition(qp: &QuadraticProgram, cfg: &SplitConfig) -> Result<Partition> {
    let graph = build_graph(qp);
    let spectral = |g| {
        let opts = SpectralOptions {
            dense_limit: cfg.dense_limit,
            ..Default::default()
        };
        partition_spectral_with(g, cfg.k, cfg.seed, &opts)
    };
    match cfg.partitioner {
        PartitionerKind::Spectral => spectral(&graph),
        PartitionerKind::Greedy => partition_greedy(&graph, cfg.k, cfg.seed),
        PartitionerKind::Auto if qp.n() <= cfg.dense_limit => spectral(&graph),
        PartitionerKind::Auto => partition_greedy(&graph, cfg.k, cfg.seed),
        PartitionerKind::External => {
            let p = cfg
                .partition
                .clone()
                .ok_or_else(|| Error::InvalidParameter("external partitioner selected but no partition given".into()))?;
            if p.n() != qp.n() {
                return Err(Error::Dimension {
                    expected: qp.n(),
                    actual: p.n(),
                });
            }
            if p.k() != cfg.k {
                return Err(Error::InvalidParameter(format!(
                    "external partition has {} parts but k = {}",
                    p.k(),
                    cfg.k
                )));
            }
            Ok(p)
        }
    }
}

/// Per-part constraint shares (global indices) and the indices of
/// constraints that must become penalties.
fn constraint_shares(qp: &QuadraticProgram, p: &Partition) -> Result<(Vec<Vec<Constraint>>, Vec<usize>)> {
    let mut shares = vec![Vec::new(); p.k()];
    for c in qp.constraints().iter().filter(|c| c.kind.is_cardinality()) {
        let mut local: Vec<Vec<usize>> = vec![Vec::new(); p.k()];
        for &i in &c.support {
            local[p.part_of(i)].push(i);
        }
        let bound = c.cardinality_bound().unwrap();
        let total = match c.kind {
            ConstraintKind::CardinalityEq => bound,
            _ => bound.min(c.support.len()),
        };
        let sizes: Vec<usize> = local.iter().map(Vec::len).collect();
        let quotas = apportion(total, &sizes)?;
        for (part, (support, quota)) in local.into_iter().zip(quotas).enumerate() {
            if support.is_empty() {
                continue;
            }
            shares[part].push(match c.kind {
                ConstraintKind::CardinalityEq => Constraint::cardinality_eq(support, quota),
                _ => Constraint::cardinality_le(support, quota),
            });
        }
    }
    let routing = assign_local_constraints(qp, p);
    for (part, idxs) in routing.per_part.iter().enumerate() {
        shares[part].extend(idxs.iter().map(|&i| qp.constraints()[i].clone()));
    }
    Ok((shares, routing.unassignable))
}

pub fn split_solve(qp: &QuadraticProgram, cfg: &SplitConfig) -> Result<SolveReport> {
    split_solve_with(qp, cfg, &cfg.solver())
}

/// Runs the loop with a caller-supplied subproblem solver.
pub fn split_solve_with(qp: &QuadraticProgram, cfg: &SplitConfig, solver: &dyn SubSolver) -> Result<SolveReport> {
    cfg.validate(qp.n())?;
    if !qp.constraints().is_empty() && !solver.enforces_constraints() {
        return Err(Error::Unsupported(
            "the program has constraints but the subsolver does not enforce them".into(),
        ));
    }
    if let Some(w) = &cfg.warm_start {
        if w.len() != qp.n() {
            return Err(Error::Dimension {
                expected: qp.n(),
                actual: w.len(),
            });
        }
    }

    let start = Instant::now();
    let partition = build_partition(qp, cfg)?;
    let partition_seconds = start.elapsed().as_secs_f64();

    let (shares, unassignable) = constraint_shares(qp, &partition)?;
    let (working, constant) = if unassignable.is_empty() {
        (qp.clone(), 0.0)
    } else {
        let spanning: Vec<Constraint> = unassignable.iter().map(|&i| qp.constraints()[i].clone()).collect();
        let hard: Vec<Constraint> = qp
            .constraints()
            .iter()
            .enumerate()
            .filter(|(i, _)| !unassignable.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        let weight = cfg
            .penalty_weight
            .unwrap_or_else(|| 1.0 + qp.linear().iter().chain(qp.terms().iter().map(|t| &t.2)).map(|v| v.abs()).sum::<f64>());
        let base = qp.clone().with_constraints(hard)?;
        let pen = penalty_augment(&base, &spanning, weight)?;
        (pen.program, pen.constant)
    };
    let cut = cut_weight(&build_graph(&working), &partition);
    let decomposition = Decomposition::new(&working, partition, shares)?;
    let has_cardinality = working.constraints().iter().any(|c| c.kind.is_cardinality());
    let sweep = match cfg.sweep {
        SweepKind::Auto if has_cardinality => SweepKind::Both,
        SweepKind::Auto => SweepKind::SingleFlip,
        other => other,
    };
    let frozen_fields = decomposition.cross_edges().is_empty();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;

    let mut x = cfg.warm_start.clone().unwrap_or_else(|| Assignment::zeros(qp.n()));
    let mut best: Option<(f64, Assignment)> = None;
    let mut history: Vec<f64> = Vec::new();
    let mut records = Vec::new();
    let mut termination = Termination::MaxIter;

    for iteration in 1..=cfg.n_iter {
        let mut times = StageTimes::default();

        let t = Instant::now();
        let fields = decomposition.fields(&x)?;
        let subproblems = decomposition.subproblems(&fields)?;
        times.fields_s = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let solutions: Vec<_> = pool.install(|| subproblems.par_iter().map(|sp| solver.solve(&sp.program)).collect());
        times.solve_s = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let mut next = Assignment::zeros(qp.n());
        let mut all_optimal = true;
        for (sp, solution) in subproblems.iter().zip(solutions) {
            let solution = solution.map_err(|e| match e {
                Error::Infeasible(m) => Error::Infeasible(format!("part {} (iteration {iteration}): {m}", sp.part_index)),
                other => other,
            })?;
            all_optimal &= solution.status == SolveStatus::Optimal;
            sp.scatter(&solution.x, &mut next);
        }
        x = next;
        let cost = working.evaluate(&x)? + constant;
        let feasible = working.is_feasible(&x)?;
        times.evaluate_s = t.elapsed().as_secs_f64();

        if feasible && best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, x.clone()));
        }

        let close = |h: f64| (cost - h).abs() <= cfg.convergence_tol;
        let stop = if frozen_fields || history.last().is_some_and(|&h| close(h)) {
            Some(Termination::Converged)
        } else if history.iter().rev().take(cfg.cycle_window).any(|&h| close(h)) {
            Some(Termination::Cycle)
        } else {
            None
        };
        history.push(cost);

        let mut record = IterationRecord {
            iteration,
            cost_after_solve: cost,
            cost_after_sweep: None,
            fields_norm: fields.norm(),
            all_parts_optimal: all_optimal,
            feasible,
            times,
        };
        if let Some(reason) = stop {
            termination = reason;
            records.push(record);
            break;
        }

        let t = Instant::now();
        let opts = DoubleFlipOptions {
            seed: cfg.seed.wrapping_add(iteration as u64),
            ..Default::default()
        };
        let p = decomposition.partition();
        x = match sweep {
            SweepKind::SingleFlip => sweep_single_flip(&working, &x)?,
            SweepKind::DoubleFlip => sweep_double_flip_with(&working, &x, p, &opts)?,
            SweepKind::Both => sweep_single_flip(&working, &sweep_double_flip_with(&working, &x, p, &opts)?)?,
            SweepKind::None | SweepKind::Auto => x,
        };
        record.times.sweep_s = t.elapsed().as_secs_f64();
        record.cost_after_sweep = Some(working.evaluate(&x)? + constant);
        records.push(record);
    }

    let (best_cost, best_x) =
        best.ok_or_else(|| Error::Infeasible("no iterate satisfied the hard constraints".into()))?;
    Ok(SolveReport {
        n: qp.n(),
        k: decomposition.partition().k(),
        objective_cost: qp.evaluate(&best_x)?,
        feasible: qp.is_feasible(&best_x)?,
        best_cost,
        best_x,
        iterations_run: records.len(),
        termination,
        tts_seconds: start.elapsed().as_secs_f64(),
        partition_seconds,
        cut_weight: cut,
        penalized_constraints: unassignable,
        iterations: records,
    })
}
