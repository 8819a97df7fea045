//! Depth-first branch-and-bound over binary variables.
//!
//! Lower bound at a node: the cost of the decided variables plus, for each
//! undecided variable `i`, `min(0, f_i + sum_{j undecided} min(0, Q_ij))`
//! where `f_i = Q_ii + sum_{j decided} Q_ij x_j`. When a single cardinality
//! constraint covers every variable, the per-variable terms are restricted to
//! the number of ones still to be placed. Linear constraints prune on
//! partial-sum feasibility.

use std::time::Instant;

use super::{check_quotas, global_quota, greedy_descent, SolveStatus, SolverBudget, SubSolution};
use crate::error::{Error, Result};
use crate::qp::{Assignment, ConstraintKind, QuadraticProgram, FEASIBILITY_TOL};

pub fn branch_and_bound(program: &QuadraticProgram, budget: &SolverBudget) -> Result<SubSolution> {
    check_quotas(program)?;
    let mut search = Search::new(program, budget);
    if let Ok(start) = greedy_descent(program, 0) {
        if program.is_feasible(&start.x)? {
            search.incumbent = Some((start.cost, start.x.as_slice().to_vec()));
        }
    }
    if search.root_feasible() {
        search.descend(0);
    }
    let work = search.nodes;
    let complete = !search.stopped;
    match search.incumbent {
        Some((_, bits)) => {
            let x = Assignment::from_bits(bits)?;
            Ok(SubSolution {
                cost: program.evaluate(&x)?,
                x,
                status: if complete {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::BudgetExhausted
                },
                work,
            })
        }
        None if complete => Err(Error::Infeasible("no assignment satisfies the constraints".into())),
        None => Err(Error::Infeasible(
            "search budget exhausted before any feasible assignment was found".into(),
        )),
    }
}

struct Search<'a> {
    program: &'a QuadraticProgram,
    /// Branching order: position -> variable.
    order: Vec<usize>,
    values: Vec<u8>,
    /// `Q_ii + sum_{decided j} Q_ij x_j`.
    field: Vec<f64>,
    /// `sum_{undecided j} min(0, Q_ij)`.
    negative: Vec<f64>,
    partial: f64,
    ones: usize,
    /// Per constraint: decided lhs, and min/max reachable additions.
    lhs: Vec<f64>,
    rest_min: Vec<f64>,
    rest_max: Vec<f64>,
    by_var: Vec<Vec<(usize, f64)>>,
    quota: Option<(ConstraintKind, usize)>,
    incumbent: Option<(f64, Vec<u8>)>,
    nodes: u64,
    node_budget: u64,
    deadline: Option<Instant>,
    stopped: bool,
    scratch: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(program: &'a QuadraticProgram, budget: &SolverBudget) -> Self {
        let n = program.n();
        let weight = |i: usize| program.linear()[i].abs() + program.neighbors(i).iter().map(|e| e.1.abs()).sum::<f64>();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)).then(a.cmp(&b)));

        let constraints = program.constraints();
        let mut by_var = vec![Vec::new(); n];
        for (c, con) in constraints.iter().enumerate() {
            for (&i, &a) in con.support.iter().zip(&con.coefficients) {
                by_var[i].push((c, a));
            }
        }
        Search {
            program,
            order,
            values: vec![0; n],
            field: program.linear().to_vec(),
            negative: (0..n)
                .map(|i| program.neighbors(i).iter().map(|e| e.1.min(0.0)).sum())
                .collect(),
            partial: 0.0,
            ones: 0,
            lhs: vec![0.0; constraints.len()],
            rest_min: constraints
                .iter()
                .map(|c| c.coefficients.iter().map(|a| a.min(0.0)).sum())
                .collect(),
            rest_max: constraints
                .iter()
                .map(|c| c.coefficients.iter().map(|a| a.max(0.0)).sum())
                .collect(),
            by_var,
            quota: global_quota(program).map(|(_, kind, v)| (kind, v)),
            incumbent: None,
            nodes: 0,
            node_budget: budget.node_budget.unwrap_or(u64::MAX),
            deadline: budget.wall_duration().map(|d| Instant::now() + d),
            stopped: false,
            scratch: Vec::with_capacity(n),
        }
    }

    fn root_feasible(&self) -> bool {
        (0..self.lhs.len()).all(|c| self.constraint_reachable(c))
    }

    fn constraint_reachable(&self, c: usize) -> bool {
        let con = &self.program.constraints()[c];
        let low = self.lhs[c] + self.rest_min[c];
        let high = self.lhs[c] + self.rest_max[c];
        if con.kind.is_equality() {
            low <= con.bound + FEASIBILITY_TOL && high >= con.bound - FEASIBILITY_TOL
        } else {
            low <= con.bound + FEASIBILITY_TOL
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.stopped {
            return true;
        }
        if self.nodes >= self.node_budget {
            self.stopped = true;
        } else if let Some(deadline) = self.deadline {
            if self.nodes % 1024 == 0 && Instant::now() >= deadline {
                self.stopped = true;
            }
        }
        self.stopped
    }

    fn bound(&mut self, depth: usize) -> f64 {
        let n = self.order.len();
        self.scratch.clear();
        for &v in &self.order[depth..n] {
            self.scratch.push(self.field[v] + self.negative[v]);
        }
        let rest: f64 = match self.quota {
            Some((kind, v)) => {
                let needed = v.saturating_sub(self.ones).min(self.scratch.len());
                if needed > 0 && needed < self.scratch.len() {
                    self.scratch.select_nth_unstable_by(needed - 1, |a, b| a.total_cmp(b));
                }
                let chosen = self.scratch[..needed].iter();
                match kind {
                    ConstraintKind::CardinalityEq => chosen.sum(),
                    _ => chosen.map(|t| t.min(0.0)).sum(),
                }
            }
            None => self.scratch.iter().map(|t| t.min(0.0)).sum(),
        };
        self.partial + rest
    }

    fn prune_threshold(&self) -> f64 {
        match &self.incumbent {
            Some((c, _)) => c - 1e-9 * (1.0 + c.abs()),
            None => f64::INFINITY,
        }
    }

    fn descend(&mut self, depth: usize) {
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        if depth == self.order.len() {
            if self.incumbent.as_ref().is_none_or(|(c, _)| self.partial < *c - 1e-12 * (1.0 + c.abs())) {
                self.incumbent = Some((self.partial, self.values.clone()));
            }
            return;
        }
        if self.bound(depth) >= self.prune_threshold() {
            return;
        }
        let v = self.order[depth];
        let first = u8::from(self.field[v] < 0.0);
        for value in [first, 1 - first] {
            if self.assign(v, value) {
                self.descend(depth + 1);
            }
            self.unassign(v, value);
            if self.stopped {
                return;
            }
        }
    }

    /// Decides `v`; returns whether the node stays feasible.
    fn assign(&mut self, v: usize, value: u8) -> bool {
        self.values[v] = value;
        let up = value == 1;
        if up {
            self.partial += self.field[v];
            self.ones += 1;
        }
        for &(j, q) in self.program.neighbors(v) {
            self.negative[j] -= q.min(0.0);
            if up {
                self.field[j] += q;
            }
        }
        let mut ok = true;
        for k in 0..self.by_var[v].len() {
            let (c, a) = self.by_var[v][k];
            self.rest_min[c] -= a.min(0.0);
            self.rest_max[c] -= a.max(0.0);
            if up {
                self.lhs[c] += a;
            }
            ok &= self.constraint_reachable(c);
        }
        ok
    }

    fn unassign(&mut self, v: usize, value: u8) {
        let up = value == 1;
        for &(j, q) in self.program.neighbors(v) {
            self.negative[j] += q.min(0.0);
            if up {
                self.field[j] -= q;
            }
        }
        if up {
            self.partial -= self.field[v];
            self.ones -= 1;
        }
        for k in 0..self.by_var[v].len() {
            let (c, a) = self.by_var[v][k];
            self.rest_min[c] += a.min(0.0);
            self.rest_max[c] += a.max(0.0);
            if up {
                self.lhs[c] -= a;
            }
        }
        self.values[v] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::super::exhaustive_minimum;
    use super::super::test_support::random_program;
    use super::*;
    use crate::qp::Constraint;

    #[test]
    fn agrees_with_enumeration() {
        for seed in 0..300 {
            let n = 1 + (seed as usize % 14);
            let qp = random_program(1000 + seed, n, 0.5, seed % 3 == 0);
            let exact = exhaustive_minimum(&qp, 26).unwrap();
            let bb = branch_and_bound(&qp, &SolverBudget::unlimited()).unwrap();
            assert_eq!(bb.cost, exact.cost, "seed {seed}");
            assert_eq!(bb.status, SolveStatus::Optimal);
            assert!(qp.is_feasible(&bb.x).unwrap());
        }
    }

    #[test]
    fn monotone_problem_stays_at_zero() {
        let qp = QuadraticProgram::new(3, vec![1.0, 0.0, 2.0], vec![(0, 1, 1.0), (1, 2, 3.0)], vec![]).unwrap();
        let s = branch_and_bound(&qp, &SolverBudget::unlimited()).unwrap();
        assert_eq!(s.x, Assignment::zeros(3));
        assert_eq!(s.cost, 0.0);
        assert_eq!(s.status, SolveStatus::Optimal);
    }

    #[test]
    fn full_quota_forces_all_ones() {
        let qp = QuadraticProgram::new(
            4,
            vec![1.0, 5.0, 2.0, 3.0],
            vec![(0, 1, 4.0)],
            vec![Constraint::cardinality_eq((0..4).collect(), 4)],
        )
        .unwrap();
        let s = branch_and_bound(&qp, &SolverBudget::unlimited()).unwrap();
        assert_eq!(s.x, Assignment::ones(4));
        assert_eq!(s.status, SolveStatus::Optimal);
    }

    #[test]
    fn budget_exhaustion_keeps_incumbent() {
        let qp = random_program(77, 24, 0.6, false);
        let s = branch_and_bound(&qp, &SolverBudget::nodes(10)).unwrap();
        assert_eq!(s.status, SolveStatus::BudgetExhausted);
        assert_eq!(s.cost, qp.evaluate(&s.x).unwrap());
    }

    #[test]
    fn linear_constraints_are_respected() {
        let qp = QuadraticProgram::new(
            4,
            vec![-3.0, -2.0, -4.0, -1.0],
            vec![(0, 2, 1.0)],
            vec![
                Constraint::linear_le(vec![0, 1, 2], vec![2.0, 1.0, 2.0], 3.0),
                Constraint::linear_eq(vec![1, 3], vec![1.0, 1.0], 1.0),
            ],
        )
        .unwrap();
        let exact = exhaustive_minimum(&qp, 26).unwrap();
        let bb = branch_and_bound(&qp, &SolverBudget::unlimited()).unwrap();
        assert_eq!(bb.cost, exact.cost);
        assert!(qp.is_feasible(&bb.x).unwrap());
    }

    #[test]
    fn infeasible_quota_is_reported() {
        let qp = QuadraticProgram::new(2, vec![0.0; 2], vec![], vec![Constraint::cardinality_eq(vec![0, 1], 3)])
            .unwrap();
        assert!(matches!(
            branch_and_bound(&qp, &SolverBudget::unlimited()),
            Err(Error::Infeasible(_))
        ));
        let clash = QuadraticProgram::new(
            2,
            vec![0.0; 2],
            vec![],
            vec![Constraint::linear_eq(vec![0, 1], vec![1.0, 1.0], 1.5)],
        )
        .unwrap();
        assert!(matches!(
            branch_and_bound(&clash, &SolverBudget::unlimited()),
            Err(Error::Infeasible(_))
        ));
    }
}
