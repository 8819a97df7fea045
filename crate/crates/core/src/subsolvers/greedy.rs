//! Best-improvement local search. Single flips in general; under a cardinality
//! equality the covered variables move only in quota-preserving swaps.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_quotas, ConstraintTracker, SolveStatus, SubSolution};
use crate::error::{Error, Result};
use crate::qp::{Assignment, ConstraintKind, QuadraticProgram};

const IMPROVEMENT_TOL: f64 = 1e-12;

pub fn greedy_descent(program: &QuadraticProgram, seed: u64) -> Result<SubSolution> {
    check_quotas(program)?;
    let n = program.n();

    // the first cardinality equality (if any) is handled by swaps
    let swap_constraint = program
        .constraints()
        .iter()
        .position(|c| c.kind == ConstraintKind::CardinalityEq);
    let mut in_swap_set = vec![false; n];
    let mut x = Assignment::zeros(n);
    if let Some(c) = swap_constraint {
        let con = &program.constraints()[c];
        for &i in &con.support {
            in_swap_set[i] = true;
        }
        let mut by_linear = con.support.clone();
        by_linear.sort_by(|&a, &b| program.linear()[a].total_cmp(&program.linear()[b]).then(a.cmp(&b)));
        for &i in by_linear.iter().take(con.cardinality_bound().unwrap()) {
            x.set(i, true);
        }
    }

    let mut tracker = ConstraintTracker::new(program, &x);
    if !tracker.all_hold() {
        return Err(Error::Infeasible(
            "greedy descent found no feasible starting point".into(),
        ));
    }

    let mut field: Vec<f64> = (0..n).map(|i| program.local_field(&x, i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut row = vec![0.0f64; n];
    let mut moves = 0u64;

    loop {
        let mut best: Option<(f64, usize, Option<usize>)> = None;
        let consider = |best: &mut Option<(f64, usize, Option<usize>)>, delta: f64, i: usize, j: Option<usize>| {
            if delta < -IMPROVEMENT_TOL && best.is_none_or(|b| delta < b.0) {
                *best = Some((delta, i, j));
            }
        };

        for &i in &order {
            if in_swap_set[i] {
                continue;
            }
            let sign = if x.get(i) { -1.0 } else { 1.0 };
            let delta = sign * field[i];
            if delta < -IMPROVEMENT_TOL && tracker.holds_after(&[(i, sign)], None) {
                consider(&mut best, delta, i, None);
            }
        }

        if swap_constraint.is_some() {
            for &i in order.iter().filter(|&&i| in_swap_set[i] && x.get(i)) {
                for &(j, q) in program.neighbors(i) {
                    row[j] = q;
                }
                for &j in order.iter().filter(|&&j| in_swap_set[j] && !x.get(j)) {
                    let delta = field[j] - field[i] - row[j];
                    if delta < -IMPROVEMENT_TOL && best.is_none_or(|b| delta < b.0) && tracker.holds_after(&[(i, -1.0), (j, 1.0)], swap_constraint) {
                        consider(&mut best, delta, i, Some(j));
                    }
                }
                for &(j, _) in program.neighbors(i) {
                    row[j] = 0.0;
                }
            }
        }

        let Some((_, i, j)) = best else { break };
        for v in std::iter::once(i).chain(j) {
            let sign = if x.get(v) { -1.0 } else { 1.0 };
            x.flip(v);
            tracker.apply(v, sign);
            for &(u, q) in program.neighbors(v) {
                field[u] += sign * q;
            }
        }
        moves += 1;
    }

    Ok(SubSolution {
        cost: program.evaluate_unchecked(&x),
        x,
        status: SolveStatus::BudgetExhausted,
        work: moves,
    })
}
