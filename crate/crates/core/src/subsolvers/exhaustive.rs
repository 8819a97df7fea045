use super::{check_quotas, ConstraintTracker, SolveStatus, SubSolution};
use crate::error::{Error, Result};
use crate::qp::{Assignment, QuadraticProgram};

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 26;

/// Full enumeration. States are visited in lexicographic order of
/// `(x_0, .., x_{n-1})`, and only strict improvements replace the incumbent,
/// so ties resolve to the lexicographically smallest minimizer.
pub fn exhaustive_minimum(program: &QuadraticProgram, cap: usize) -> Result<SubSolution> {
    let n = program.n();
    if n > cap {
        return Err(Error::SizeCapExceeded { size: n, cap });
    }
    check_quotas(program)?;

    let mut x = Assignment::zeros(n);
    let mut tracker = ConstraintTracker::new(program, &x);
    let mut cost = 0.0;
    let mut best: Option<(f64, Assignment)> = tracker.all_hold().then(|| (0.0, x.clone()));

    let total: u64 = 1 << n;
    for mask in 1..total {
        // incrementing flips the trailing ones of mask-1 down and one zero up;
        // bit b carries variable n-1-b
        let flipped = (mask - 1).trailing_ones() as usize + 1;
        for b in 0..flipped {
            let i = n - 1 - b;
            let h = program.local_field(&x, i);
            if x.get(i) {
                cost -= h;
                tracker.apply(i, -1.0);
            } else {
                cost += h;
                tracker.apply(i, 1.0);
            }
            x.flip(i);
        }
        if flipped > 12 {
            cost = program.evaluate_unchecked(&x);
        }
        if !tracker.all_hold() {
            continue;
        }
        let improves = match &best {
            None => true,
            Some((b, _)) => cost < b - 1e-12 * (1.0 + b.abs()),
        };
        if improves {
            best = Some((cost, x.clone()));
        }
    }

    let (_, x) = best.ok_or_else(|| Error::Infeasible("no assignment satisfies the constraints".into()))?;
    Ok(SubSolution {
        cost: program.evaluate_unchecked(&x),
        x,
        status: SolveStatus::Optimal,
        work: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qp::Constraint;

    #[test]
    fn picks_negative_linear_terms() {
        let qp = QuadraticProgram::new(2, vec![1.0, -1.0], vec![], vec![]).unwrap();
        let s = exhaustive_minimum(&qp, 26).unwrap();
        assert_eq!(s.x.as_slice(), &[0, 1]);
        assert_eq!(s.cost, -1.0);
        assert_eq!(s.status, SolveStatus::Optimal);
    }

    #[test]
    fn triangle_tie_breaks_lexicographically() {
        let qp = QuadraticProgram::new(
            3,
            vec![-2.0; 3],
            vec![(0, 1, 2.0), (0, 2, 2.0), (1, 2, 2.0)],
            vec![],
        )
        .unwrap();
        let s = exhaustive_minimum(&qp, 26).unwrap();
        assert_eq!(s.cost, -2.0);
        assert_eq!(s.x.as_slice(), &[0, 0, 1]);
    }

    #[test]
    fn quota_is_hard() {
        let qp = QuadraticProgram::new(2, vec![5.0, 7.0], vec![], vec![Constraint::cardinality_eq(vec![0, 1], 1)])
            .unwrap();
        let s = exhaustive_minimum(&qp, 26).unwrap();
        assert_eq!(s.x.as_slice(), &[1, 0]);
        assert_eq!(s.cost, 5.0);
    }

    #[test]
    fn cap_and_infeasibility() {
        let qp = QuadraticProgram::new(4, vec![0.0; 4], vec![], vec![]).unwrap();
        assert!(matches!(exhaustive_minimum(&qp, 3), Err(Error::SizeCapExceeded { size: 4, cap: 3 })));
        let bad = QuadraticProgram::new(
            2,
            vec![0.0; 2],
            vec![],
            vec![Constraint::linear_eq(vec![0, 1], vec![2.0, 2.0], 3.0)],
        )
        .unwrap();
        assert!(matches!(exhaustive_minimum(&bad, 26), Err(Error::Infeasible(_))));
        let over = QuadraticProgram::new(2, vec![0.0; 2], vec![], vec![Constraint::cardinality_eq(vec![0, 1], 3)])
            .unwrap();
        assert!(matches!(exhaustive_minimum(&over, 26), Err(Error::Infeasible(_))));
    }

    #[test]
    fn empty_program() {
        let qp = QuadraticProgram::new(0, vec![], vec![], vec![]).unwrap();
        let s = exhaustive_minimum(&qp, 26).unwrap();
        assert!(s.x.is_empty());
        assert_eq!(s.cost, 0.0);
    }
}
