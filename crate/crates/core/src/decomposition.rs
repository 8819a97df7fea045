//! Splitting a program along a partition.
//!
//! Every part `k` gets a subproblem over its own variables whose linear terms
//! absorb the couplings to variables held fixed in other parts:
//!
//! ```text
//! H_k = sum_{(i,j) internal} Q_ij x_i x_j + sum_{i in S_k} (Q_ii + d_i) x_i
//! d_i = sum_{a foreign} Q_ia x_a
//! ```
//!
//! Summing `H_k` counts each cross pair twice, once from each side, so the
//! global cost is recovered as `sum_k (H_k - d_k . x_k / 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::qp::{Assignment, Constraint, ConstraintKind, QuadraticProgram};

/// Cross-part couplings, stored from both endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossEdges {
    per_node: Vec<Vec<(usize, f64)>>,
}

impl CrossEdges {
    pub fn node_count(&self) -> usize {
        self.per_node.len()
    }

    pub fn of(&self, node: usize) -> &[(usize, f64)] {
        &self.per_node[node]
    }

    pub fn is_empty(&self) -> bool {
        self.per_node.iter().all(Vec::is_empty)
    }

    /// Number of undirected cross edges.
    pub fn len(&self) -> usize {
        self.per_node.iter().map(Vec::len).sum::<usize>() / 2
    }
}

pub fn build_cross_edges(qp: &QuadraticProgram, p: &Partition) -> Result<CrossEdges> {
    check_cover(qp, p)?;
    let per_node = (0..qp.n())
        .map(|i| {
            qp.neighbors(i)
                .iter()
                .filter(|&&(j, _)| p.part_of(j) != p.part_of(i))
                .copied()
                .collect()
        })
        .collect();
    Ok(CrossEdges { per_node })
}

fn check_cover(qp: &QuadraticProgram, p: &Partition) -> Result<()> {
    if p.n() != qp.n() {
        return Err(Error::Dimension {
            expected: qp.n(),
            actual: p.n(),
        });
    }
    Ok(())
}

/// Per-node field `d_i`; entry `i` belongs to the part holding node `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocalFields(pub Vec<f64>);

impl LocalFields {
    pub fn zeros(n: usize) -> Self {
        LocalFields(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    /// Field values of the given nodes, in order.
    pub fn slice(&self, nodes: &[usize]) -> Vec<f64> {
        nodes.iter().map(|&i| self.0[i]).collect()
    }
}

pub fn compute_fields(x: &Assignment, ce: &CrossEdges) -> Result<LocalFields> {
    if x.len() != ce.node_count() {
        return Err(Error::Dimension {
            expected: ce.node_count(),
            actual: x.len(),
        });
    }
    Ok(LocalFields(
        ce.per_node
            .iter()
            .map(|row| row.iter().filter(|&&(a, _)| x.get(a)).map(|e| e.1).sum())
            .collect(),
    ))
}

/// Restriction of a program to one part, with field-augmented linear terms.
///
/// `program` is indexed locally: local index `t` is global node `nodes[t]`.
/// Its constraints are the part's share, also in local indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Subproblem {
    pub part_index: usize,
    pub nodes: Vec<usize>,
    pub program: QuadraticProgram,
}

impl Subproblem {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn effective_linear(&self) -> &[f64] {
        self.program.linear()
    }

    pub fn constraint_share(&self) -> &[Constraint] {
        self.program.constraints()
    }

    /// `H_k` at a local assignment.
    pub fn cost(&self, x_local: &Assignment) -> Result<f64> {
        self.program.evaluate(x_local)
    }

    /// Local slice of a global assignment.
    pub fn gather(&self, x: &Assignment) -> Assignment {
        Assignment::from_bools(self.nodes.iter().map(|&i| x.get(i)))
    }

    /// Writes a local assignment back into the global one.
    pub fn scatter(&self, x_local: &Assignment, x: &mut Assignment) {
        for (t, &i) in self.nodes.iter().enumerate() {
            x.set(i, x_local.get(t));
        }
    }
}

/// Per-part templates built once per (program, partition); each iteration
/// only swaps in new linear terms.
#[derive(Clone, Debug)]
pub struct Decomposition {
    partition: Partition,
    cross: CrossEdges,
    templates: Vec<QuadraticProgram>,
}

impl Decomposition {
    /// `shares[k]` holds part `k`'s constraints in global indices.
    pub fn new(qp: &QuadraticProgram, partition: Partition, shares: Vec<Vec<Constraint>>) -> Result<Self> {
        check_cover(qp, &partition)?;
        if shares.len() != partition.k() {
            return Err(Error::Dimension {
                expected: partition.k(),
                actual: shares.len(),
            });
        }
        let cross = build_cross_edges(qp, &partition)?;
        let local = partition.local_indices();
        let mut terms: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); partition.k()];
        for &(i, j, v) in qp.terms() {
            let part = partition.part_of(i);
            if part == partition.part_of(j) {
                let (a, b) = (local[i], local[j]);
                terms[part].push((a.min(b), a.max(b), v));
            }
        }
        let mut templates = Vec::with_capacity(partition.k());
        for (part, (mut part_terms, share)) in terms.into_iter().zip(shares).enumerate() {
            let nodes = partition.members(part);
            part_terms.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            let linear = nodes.iter().map(|&i| qp.linear()[i]).collect();
            let share = share
                .into_iter()
                .map(|c| localize(&c, part, &partition, &local))
                .collect::<Result<Vec<_>>>()?;
            let template = QuadraticProgram::from_canonical(nodes.len(), linear, part_terms, vec![]).with_constraints(share)?;
            templates.push(template);
        }
        Ok(Decomposition {
            partition,
            cross,
            templates,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn cross_edges(&self) -> &CrossEdges {
        &self.cross
    }

    pub fn fields(&self, x: &Assignment) -> Result<LocalFields> {
        compute_fields(x, &self.cross)
    }

    pub fn subproblem(&self, part: usize, fields: &LocalFields) -> Result<Subproblem> {
        let template = self.templates.get(part).ok_or_else(|| {
            Error::InvalidParameter(format!("part index {part} out of range for k = {}", self.partition.k()))
        })?;
        if fields.0.len() != self.partition.n() {
            return Err(Error::Dimension {
                expected: self.partition.n(),
                actual: fields.0.len(),
            });
        }
        let nodes = self.partition.members(part).to_vec();
        let linear: Vec<f64> = template
            .linear()
            .iter()
            .zip(&nodes)
            .map(|(q, &i)| q + fields.0[i])
            .collect();
        Ok(Subproblem {
            part_index: part,
            program: template.with_linear(linear),
            nodes,
        })
    }

    pub fn subproblems(&self, fields: &LocalFields) -> Result<Vec<Subproblem>> {
        (0..self.partition.k()).map(|k| self.subproblem(k, fields)).collect()
    }
}

fn localize(c: &Constraint, part: usize, p: &Partition, local: &[usize]) -> Result<Constraint> {
    if let Some(&bad) = c.support.iter().find(|&&i| i >= p.n() || p.part_of(i) != part) {
        return Err(Error::InvalidParameter(format!(
            "constraint variable {bad} does not belong to part {part}"
        )));
    }
    Ok(Constraint {
        kind: c.kind,
        support: c.support.iter().map(|&i| local[i]).collect(),
        coefficients: c.coefficients.clone(),
        bound: c.bound,
    })
}

/// Subproblem for part `k` under the given fields, carrying an optional
/// quota (global indices, support inside part `k`).
pub fn build_subproblem(
    qp: &QuadraticProgram,
    p: &Partition,
    k: usize,
    fields: &LocalFields,
    quota: Option<Constraint>,
) -> Result<Subproblem> {
    if k >= p.k() {
        return Err(Error::InvalidParameter(format!("part index {k} out of range for k = {}", p.k())));
    }
    let mut shares = vec![Vec::new(); p.k()];
    shares[k].extend(quota);
    Decomposition::new(qp, p.clone(), shares)?.subproblem(k, fields)
}

/// `Delta_k = (1/2) sum_i d_i x_i` over the part's variables.
pub fn correction_delta(x_local: &Assignment, field_slice: &[f64]) -> Result<f64> {
    if x_local.len() != field_slice.len() {
        return Err(Error::Dimension {
            expected: field_slice.len(),
            actual: x_local.len(),
        });
    }
    Ok(0.5 * field_slice.iter().zip(x_local.iter()).filter(|(_, b)| *b).map(|(d, _)| d).sum::<f64>())
}

/// `sum_k (H_k - Delta_k)` with fields computed from `x`; equals `H(x)`.
pub fn reconstruct_cost(qp: &QuadraticProgram, p: &Partition, x: &Assignment) -> Result<f64> {
    if x.len() != qp.n() {
        return Err(Error::Dimension {
            expected: qp.n(),
            actual: x.len(),
        });
    }
    let dec = Decomposition::new(qp, p.clone(), vec![Vec::new(); p.k()])?;
    let fields = dec.fields(x)?;
    let mut total = 0.0;
    for sp in dec.subproblems(&fields)? {
        let x_local = sp.gather(x);
        total += sp.cost(&x_local)? - correction_delta(&x_local, &fields.slice(&sp.nodes))?;
    }
    Ok(total)
}

/// Largest-remainder apportionment of `total` units over parts of the given
/// sizes, proportional to size. Ties go to the lower part index; any part
/// whose share would exceed its size spills the excess down the same order.
pub fn apportion(total: usize, sizes: &[usize]) -> Result<Vec<usize>> {
    let n: usize = sizes.iter().sum();
    if total > n {
        return Err(Error::Infeasible(format!("capacity {total} exceeds the {n} available variables")));
    }
    if n == 0 {
        return Ok(vec![0; sizes.len()]);
    }
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| total * s / n).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| ((total * sizes[b]) % n).cmp(&((total * sizes[a]) % n)).then(a.cmp(&b)));
    let mut remainder = total - quotas.iter().sum::<usize>();
    for &k in order.iter().cycle().take(order.len() * 2) {
        if remainder == 0 {
            break;
        }
        if quotas[k] < sizes[k] {
            quotas[k] += 1;
            remainder -= 1;
        }
    }
    // spill any overflow; unreachable when every part starts at floor <= size
    let mut overflow: usize = 0;
    for k in 0..sizes.len() {
        if quotas[k] > sizes[k] {
            overflow += quotas[k] - sizes[k];
            quotas[k] = sizes[k];
        }
    }
    overflow += remainder;
    for &k in &order {
        let room = sizes[k] - quotas[k];
        let take = room.min(overflow);
        quotas[k] += take;
        overflow -= take;
    }
    Ok(quotas)
}

/// Per-part quotas for a capacity of `v` over all variables.
pub fn distribute_capacity(v: usize, p: &Partition) -> Result<Vec<usize>> {
    apportion(v, &p.sizes())
}

/// Routing of non-cardinality constraints to the parts that contain them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintRouting {
    /// Constraint indices attached to each part.
    pub per_part: Vec<Vec<usize>>,
    /// Constraint indices whose support spans several parts.
    pub unassignable: Vec<usize>,
}

pub fn assign_local_constraints(qp: &QuadraticProgram, p: &Partition) -> ConstraintRouting {
    let mut routing = ConstraintRouting {
        per_part: vec![Vec::new(); p.k()],
        unassignable: Vec::new(),
    };
    for (idx, c) in qp.constraints().iter().enumerate() {
        if !matches!(c.kind, ConstraintKind::LinearEq | ConstraintKind::LinearLe) {
            continue;
        }
        let mut parts = c.support.iter().map(|&i| p.part_of(i));
        match parts.next() {
            None => routing.per_part[0].push(idx),
            Some(first) if parts.all(|q| q == first) => routing.per_part[first].push(idx),
            Some(_) => routing.unassignable.push(idx),
        }
    }
    routing
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qp::QpBuilder;

    /// Two triangles {0,1,2} and {3,4,5} bridged by (2,3).
    fn bridged() -> (QuadraticProgram, Partition) {
        let mut b = QpBuilder::new(6);
        for &(i, j) in &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)] {
            b.add_quadratic(i, j, 2.0);
        }
        b.add_quadratic(2, 3, -1.5);
        for i in 0..6 {
            b.add_linear(i, i as f64 - 2.5);
        }
        let p = Partition::from_assignment(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        (b.build().unwrap(), p)
    }

    #[test]
    fn cross_edges_examples() {
        let (qp, p) = bridged();
        assert!(build_cross_edges(&qp, &Partition::single(6)).unwrap().is_empty());
        let ce = build_cross_edges(&qp, &p).unwrap();
        assert_eq!(ce.len(), 1);
        assert_eq!(ce.of(2), &[(3, -1.5)]);
        assert_eq!(ce.of(3), &[(2, -1.5)]);
        let singletons = Partition::from_assignment((0..6).collect(), 6).unwrap();
        assert_eq!(build_cross_edges(&qp, &singletons).unwrap().len(), qp.num_terms());
    }

    #[test]
    fn fields_vanish_at_zero_and_sum_couplings_at_one() {
        let (qp, p) = bridged();
        let ce = build_cross_edges(&qp, &p).unwrap();
        assert_eq!(compute_fields(&Assignment::zeros(6), &ce).unwrap(), LocalFields::zeros(6));
        let all = compute_fields(&Assignment::ones(6), &ce).unwrap();
        assert_eq!(all.0, vec![0.0, 0.0, -1.5, -1.5, 0.0, 0.0]);
        assert!(compute_fields(&Assignment::zeros(5), &ce).is_err());
    }

    #[test]
    fn field_of_node_with_two_foreign_neighbours() {
        // node 0 alone in part 0, coupled with unit weight to nodes 1 and 2 in part 1
        let qp = QuadraticProgram::new(3, vec![0.0; 3], vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], vec![]).unwrap();
        let p = Partition::from_assignment(vec![0, 1, 1], 2).unwrap();
        let ce = build_cross_edges(&qp, &p).unwrap();
        let d = compute_fields(&Assignment::from_bits(vec![0, 1, 1]).unwrap(), &ce).unwrap();
        assert_eq!(d.0[0], 2.0);
        let sp = build_subproblem(&qp, &p, 0, &d, None).unwrap();
        assert_eq!(sp.effective_linear(), &[2.0]);
    }

    #[test]
    fn subproblem_with_zero_fields_is_plain_restriction() {
        let (qp, p) = bridged();
        let sp = build_subproblem(&qp, &p, 1, &LocalFields::zeros(6), None).unwrap();
        assert_eq!(sp.nodes, vec![3, 4, 5]);
        assert_eq!(sp.effective_linear(), &[0.5, 1.5, 2.5]);
        assert_eq!(sp.program.terms(), &[(0, 1, 2.0), (0, 2, 2.0), (1, 2, 2.0)]);
        let whole = build_subproblem(&qp, &Partition::single(6), 0, &LocalFields::zeros(6), None).unwrap();
        assert_eq!(whole.program.terms(), qp.terms());
        assert_eq!(whole.program.linear(), qp.linear());
        assert!(build_subproblem(&qp, &p, 2, &LocalFields::zeros(6), None).is_err());
    }

    #[test]
    fn quota_is_localized() {
        let (qp, p) = bridged();
        let quota = Constraint::cardinality_eq(vec![3, 4, 5], 2);
        let sp = build_subproblem(&qp, &p, 1, &LocalFields::zeros(6), Some(quota)).unwrap();
        assert_eq!(sp.constraint_share()[0].support, vec![0, 1, 2]);
        let foreign = Constraint::cardinality_eq(vec![0, 4], 1);
        assert!(build_subproblem(&qp, &p, 1, &LocalFields::zeros(6), Some(foreign)).is_err());
    }

    #[test]
    fn correction_examples() {
        assert_eq!(correction_delta(&Assignment::zeros(2), &[2.0, 0.0]).unwrap(), 0.0);
        assert_eq!(correction_delta(&Assignment::ones(2), &[2.0, 0.0]).unwrap(), 1.0);
        assert_eq!(correction_delta(&Assignment::ones(2), &[0.0, 0.0]).unwrap(), 0.0);
        assert!(correction_delta(&Assignment::ones(3), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn reconstruction_matches_direct_cost() {
        let (qp, p) = bridged();
        for mask in 0u32..64 {
            let x = Assignment::from_bools((0..6).map(|i| (mask >> i) & 1 == 1));
            let direct = qp.evaluate(&x).unwrap();
            assert!((reconstruct_cost(&qp, &p, &x).unwrap() - direct).abs() <= 1e-12);
            assert_eq!(reconstruct_cost(&qp, &Partition::single(6), &x).unwrap(), direct);
        }
    }

    #[test]
    fn capacity_examples() {
        let halves = Partition::from_assignment((0..50).map(|i| i / 25).collect(), 2).unwrap();
        assert_eq!(distribute_capacity(25, &halves).unwrap(), vec![13, 12]);
        assert_eq!(distribute_capacity(0, &halves).unwrap(), vec![0, 0]);
        assert_eq!(distribute_capacity(17, &Partition::single(40)).unwrap(), vec![17]);
        assert!(distribute_capacity(51, &halves).is_err());
        // 5 * (3, 7) / 10 = (1.5, 3.5): equal fractions, lower index wins
        assert_eq!(apportion(5, &[3, 7]).unwrap(), vec![2, 3]);
        assert_eq!(apportion(4, &[1, 1, 1, 1, 1, 1]).unwrap(), vec![1, 1, 1, 1, 0, 0]);
    }

    #[test]
    fn constraint_routing() {
        let qp = QuadraticProgram::new(
            5,
            vec![0.0; 5],
            vec![],
            vec![
                Constraint::linear_le(vec![2, 3], vec![1.0, 1.0], 1.0),
                Constraint::linear_eq(vec![0, 4], vec![1.0, 1.0], 1.0),
                Constraint::cardinality_eq(vec![0, 1, 2, 3, 4], 2),
            ],
        )
        .unwrap();
        let p = Partition::from_assignment(vec![0, 0, 1, 1, 1], 2).unwrap();
        let r = assign_local_constraints(&qp, &p);
        assert_eq!(r.per_part, vec![vec![], vec![0]]);
        let q = Partition::from_assignment(vec![0, 1, 1, 1, 0], 2).unwrap();
        assert_eq!(assign_local_constraints(&qp, &q).per_part, vec![vec![1], vec![0]]);
        let s = Partition::from_assignment(vec![0, 0, 0, 1, 1], 2).unwrap();
        let r = assign_local_constraints(&qp, &s);
        assert_eq!(r.unassignable, vec![0, 1]);
    }
}
