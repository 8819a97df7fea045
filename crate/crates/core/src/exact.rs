//! Exact reference solves of whole programs.
//!
//! Unconstrained programs are split into connected components, each solved by
//! branch-and-bound. A component whose cost is invariant under complementing
//! every variable (`Q_ii = -1/2 sum_j Q_ij`, as for MaxCut) has one variable
//! fixed to zero first, halving the search.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qp::{Assignment, QuadraticProgram};
use crate::subsolvers::{branch_and_bound, SolveStatus, SolverBudget};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub x: Assignment,
    pub cost: f64,
    /// Every component finished within budget.
    pub optimal: bool,
    pub nodes: u64,
    pub components: usize,
    pub seconds: f64,
}

/// Connected components of the coupling graph, each sorted, ordered by
/// smallest member.
pub fn components(qp: &QuadraticProgram) -> Vec<Vec<usize>> {
    let n = qp.n();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        label[s] = id;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &(v, _) in qp.neighbors(u) {
                if label[v] == usize::MAX {
                    label[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn complement_symmetric(qp: &QuadraticProgram) -> bool {
    (0..qp.n()).all(|i| {
        let row: f64 = qp.neighbors(i).iter().map(|e| e.1).sum();
        let scale = 1.0 + row.abs() + qp.linear()[i].abs();
        (qp.linear()[i] + 0.5 * row).abs() <= 1e-12 * scale
    })
}

fn restrict(qp: &QuadraticProgram, nodes: &[usize]) -> Result<QuadraticProgram> {
    let mut local = vec![usize::MAX; qp.n()];
    for (l, &g) in nodes.iter().enumerate() {
        local[g] = l;
    }
    let linear = nodes.iter().map(|&g| qp.linear()[g]).collect();
    let terms: Vec<_> = qp
        .terms()
        .iter()
        .filter(|&&(i, j, _)| local[i] != usize::MAX && local[j] != usize::MAX)
        .map(|&(i, j, v)| (local[i], local[j], v))
        .collect();
    QuadraticProgram::new(nodes.len(), linear, terms, Vec::new())
}

pub fn solve_exact(qp: &QuadraticProgram, budget: &SolverBudget) -> Result<ExactSolution> {
    let start = std::time::Instant::now();
    if !qp.constraints().is_empty() {
        let s = branch_and_bound(qp, budget)?;
        return Ok(ExactSolution {
            cost: s.cost,
            x: s.x,
            optimal: s.status == SolveStatus::Optimal,
            nodes: s.work,
            components: 1,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let mut x = Assignment::zeros(qp.n());
    let mut optimal = true;
    let mut nodes = 0;
    let parts = components(qp);
    for comp in &parts {
        if comp.len() == 1 {
            x.set(comp[0], qp.linear()[comp[0]] < 0.0);
            continue;
        }
        let sub = restrict(qp, comp)?;
        // fixing the first variable to zero keeps one of each complementary pair
        let (program, solved) = if complement_symmetric(&sub) {
            (restrict(&sub, &(1..comp.len()).collect::<Vec<_>>())?, &comp[1..])
        } else {
            (sub, &comp[..])
        };
        let s = branch_and_bound(&program, budget)?;
        optimal &= s.status == SolveStatus::Optimal;
        nodes += s.work;
        for (l, &g) in solved.iter().enumerate() {
            x.set(g, s.x.get(l));
        }
    }
    Ok(ExactSolution {
        cost: qp.evaluate(&x)?,
        x,
        optimal,
        nodes,
        components: parts.len(),
        seconds: start.elapsed().as_secs_f64(),
    })
}
