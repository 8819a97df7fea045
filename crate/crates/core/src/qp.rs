//! Binary quadratic programs: storage, cost evaluation and constraint checks.
//!
//! A program over `n` binary variables has cost
//! `H(x) = sum_{i<j} Q_ij x_i x_j + sum_i Q_ii x_i`, minimized subject to an
//! optional list of linear constraints. Off-diagonal coefficients are stored
//! once per unordered pair with canonical key `i < j`, and a CSR adjacency is
//! kept alongside so per-variable work is proportional to the degree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing constraint left-hand sides.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    CardinalityEq,
    CardinalityLe,
    LinearEq,
    LinearLe,
}

impl ConstraintKind {
    pub fn is_cardinality(self) -> bool {
        matches!(self, ConstraintKind::CardinalityEq | ConstraintKind::CardinalityLe)
    }

    pub fn is_equality(self) -> bool {
        matches!(self, ConstraintKind::CardinalityEq | ConstraintKind::LinearEq)
    }
}

/// A linear constraint `sum_{i in support} a_i x_i (= | <=) bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub bound: f64,
}

impl Constraint {
    pub fn cardinality_eq(support: Vec<usize>, count: usize) -> Self {
        let coefficients = vec![1.0; support.len()];
        Constraint {
            kind: ConstraintKind::CardinalityEq,
            support,
            coefficients,
            bound: count as f64,
        }
    }

    pub fn cardinality_le(support: Vec<usize>, count: usize) -> Self {
        let coefficients = vec![1.0; support.len()];
        Constraint {
            kind: ConstraintKind::CardinalityLe,
            support,
            coefficients,
            bound: count as f64,
        }
    }

    pub fn linear_eq(support: Vec<usize>, coefficients: Vec<f64>, bound: f64) -> Self {
        Constraint {
            kind: ConstraintKind::LinearEq,
            support,
            coefficients,
            bound,
        }
    }

    pub fn linear_le(support: Vec<usize>, coefficients: Vec<f64>, bound: f64) -> Self {
        Constraint {
            kind: ConstraintKind::LinearLe,
            support,
            coefficients,
            bound,
        }
    }

    /// Integer right-hand side of a cardinality constraint.
    pub fn cardinality_bound(&self) -> Option<usize> {
        self.kind.is_cardinality().then(|| self.bound as usize)
    }

    pub fn lhs(&self, x: &Assignment) -> f64 {
        self.support
            .iter()
            .zip(&self.coefficients)
            .map(|(&i, &a)| if x.get(i) { a } else { 0.0 })
            .sum()
    }

    /// Whether a left-hand side value satisfies the constraint.
    pub fn holds_at(&self, lhs: f64) -> bool {
        if self.kind.is_equality() {
            (lhs - self.bound).abs() <= FEASIBILITY_TOL
        } else {
            lhs <= self.bound + FEASIBILITY_TOL
        }
    }

    pub fn is_satisfied_by(&self, x: &Assignment) -> bool {
        self.holds_at(self.lhs(x))
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        if self.support.len() != self.coefficients.len() {
            return Err(Error::InvalidProblem(format!(
                "constraint support has {} entries but {} coefficients",
                self.support.len(),
                self.coefficients.len()
            )));
        }
        let mut seen = self.support.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidProblem("constraint support has duplicate indices".into()));
        }
        if let Some(&bad) = seen.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        if !self.bound.is_finite() || self.coefficients.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidProblem("constraint has non-finite values".into()));
        }
        if self.kind.is_cardinality() {
            if self.bound < 0.0 || self.bound.fract() != 0.0 {
                return Err(Error::InvalidProblem(
                    "cardinality bound must be a non-negative integer".into(),
                ));
            }
            if self.coefficients.iter().any(|&a| a != 1.0) {
                return Err(Error::InvalidProblem(
                    "cardinality coefficients must all be 1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Dense binary assignment `x in {0,1}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Assignment(Vec<u8>);

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Assignment(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        Assignment(vec![1; n])
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!("assignment value {b} is not binary")));
        }
        Ok(Assignment(bits))
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        Assignment(bits.into_iter().map(u8::from).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i] != 0
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = u8::from(v);
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().map(|&b| b != 0)
    }
}

impl TryFrom<Vec<u8>> for Assignment {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Assignment::from_bits(bits)
    }
}

impl From<Assignment> for Vec<u8> {
    fn from(a: Assignment) -> Self {
        a.0
    }
}

/// Benchmark family a program was generated from, when known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemClass {
    MaxCut,
    AntennaPlacement,
}

/// Symmetric sparse binary quadratic program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProgramFile", into = "ProgramFile")]
pub struct QuadraticProgram {
    n: usize,
    linear: Vec<f64>,
    terms: Vec<(usize, usize, f64)>,
    constraints: Vec<Constraint>,
    class: Option<ProblemClass>,
    offsets: Vec<usize>,
    adjacency: Vec<(usize, f64)>,
}

impl QuadraticProgram {
    /// Strict constructor: rejects self-pairs, out-of-range indices and pairs
    /// given more than once in either orientation. Zero coefficients are dropped.
    pub fn new<I>(n: usize, linear: Vec<f64>, quadratic: I, constraints: Vec<Constraint>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if linear.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: linear.len(),
            });
        }
        if linear.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite linear coefficient".into()));
        }
        let mut terms = Vec::new();
        for (i, j, v) in quadratic {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            if i == j {
                return Err(Error::InvalidProblem(format!(
                    "pair ({i}, {i}) belongs on the diagonal, use the linear vector"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidProblem(format!("non-finite coefficient on ({i}, {j})")));
            }
            terms.push((i.min(j), i.max(j), v));
        }
        terms.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        if let Some(w) = terms.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidProblem(format!(
                "pair ({}, {}) given more than once",
                w[0].0, w[0].1
            )));
        }
        terms.retain(|t| t.2 != 0.0);
        for c in &constraints {
            c.validate(n)?;
        }
        Ok(Self::from_canonical(n, linear, terms, constraints))
    }

    /// Builds from canonical, validated parts.
    pub(crate) fn from_canonical(
        n: usize,
        linear: Vec<f64>,
        terms: Vec<(usize, usize, f64)>,
        constraints: Vec<Constraint>,
    ) -> Self {
        let mut degree = vec![0usize; n];
        for &(i, j, _) in &terms {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![(0usize, 0.0f64); offsets[n]];
        for &(i, j, v) in &terms {
            adjacency[fill[i]] = (j, v);
            fill[i] += 1;
            adjacency[fill[j]] = (i, v);
            fill[j] += 1;
        }
        // rows sorted by neighbour index for binary-search lookup
        for i in 0..n {
            adjacency[offsets[i]..offsets[i + 1]].sort_by_key(|e| e.0);
        }
        QuadraticProgram {
            n,
            linear,
            terms,
            constraints,
            class: None,
            offsets,
            adjacency,
        }
    }

    /// Same couplings and constraints, new diagonal.
    pub(crate) fn with_linear(&self, linear: Vec<f64>) -> Self {
        debug_assert_eq!(linear.len(), self.n);
        QuadraticProgram {
            linear,
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Stored off-diagonal pairs, canonical `i < j`, sorted.
    pub fn terms(&self) -> &[(usize, usize, f64)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn class(&self) -> Option<ProblemClass> {
        self.class
    }

    pub fn with_class(mut self, class: Option<ProblemClass>) -> Self {
        self.class = class;
        self
    }

    pub fn with_constraints(mut self, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            c.validate(self.n)?;
        }
        self.constraints = constraints;
        Ok(self)
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// `Q_ij` for `i != j` (symmetric lookup), 0 when absent.
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.linear[i];
        }
        let row = self.neighbors(i);
        row.binary_search_by_key(&j, |e| e.0).map_or(0.0, |k| row[k].1)
    }

    fn check_len(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// `H(x)`; constraints are not checked.
    pub fn evaluate(&self, x: &Assignment) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &Assignment) -> f64 {
        let quad: f64 = self
            .terms
            .iter()
            .filter(|&&(i, j, _)| x.get(i) && x.get(j))
            .map(|t| t.2)
            .sum();
        let lin: f64 = self
            .linear
            .iter()
            .enumerate()
            .filter(|&(i, _)| x.get(i))
            .map(|(_, v)| v)
            .sum();
        quad + lin
    }

    /// `Q_ii + sum_j Q_ij x_j`, the cost change of raising `x_i` from 0 to 1.
    #[inline]
    pub fn local_field(&self, x: &Assignment, i: usize) -> f64 {
        self.linear[i]
            + self
                .neighbors(i)
                .iter()
                .filter(|&&(j, _)| x.get(j))
                .map(|e| e.1)
                .sum::<f64>()
    }

    /// `H(x with bit i flipped) - H(x)` in O(deg i).
    pub fn flip_delta(&self, x: &Assignment, i: usize) -> Result<f64> {
        self.check_len(x)?;
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        let h = self.local_field(x, i);
        Ok(if x.get(i) { -h } else { h })
    }

    /// Indices of violated constraints, in order.
    pub fn check_feasibility(&self, x: &Assignment) -> Result<Vec<usize>> {
        self.check_len(x)?;
        Ok(self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied_by(x))
            .map(|(k, _)| k)
            .collect())
    }

    pub fn is_feasible(&self, x: &Assignment) -> Result<bool> {
        Ok(self.check_feasibility(x)?.is_empty())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Accumulating builder; repeated pairs are summed.
#[derive(Clone, Debug, Default)]
pub struct QpBuilder {
    n: usize,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    constraints: Vec<Constraint>,
    class: Option<ProblemClass>,
}

impl QpBuilder {
    pub fn new(n: usize) -> Self {
        QpBuilder {
            n,
            linear: vec![0.0; n],
            ..Default::default()
        }
    }

    pub fn add_linear(&mut self, i: usize, v: f64) -> &mut Self {
        self.linear[i] += v;
        self
    }

    /// Adds `v` to the coefficient of `x_i x_j`; `i == j` goes to the diagonal.
    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) -> &mut Self {
        if i == j {
            self.linear[i] += v;
        } else {
            *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
        self
    }

    pub fn add_constraint(&mut self, c: Constraint) -> &mut Self {
        self.constraints.push(c);
        self
    }

    pub fn class(&mut self, class: ProblemClass) -> &mut Self {
        self.class = Some(class);
        self
    }

    pub fn build(&self) -> Result<QuadraticProgram> {
        let qp = QuadraticProgram::new(
            self.n,
            self.linear.clone(),
            self.quadratic.iter().map(|(&(i, j), &v)| (i, j, v)),
            self.constraints.clone(),
        )?;
        Ok(qp.with_class(self.class))
    }
}

/// On-disk JSON layout of a program.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProgramFile {
    pub n: usize,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem_class: Option<ProblemClass>,
}

impl TryFrom<ProgramFile> for QuadraticProgram {
    type Error = Error;

    fn try_from(f: ProgramFile) -> Result<Self> {
        Ok(QuadraticProgram::new(f.n, f.linear, f.quadratic, f.constraints)?.with_class(f.problem_class))
    }
}

impl From<QuadraticProgram> for ProgramFile {
    fn from(qp: QuadraticProgram) -> Self {
        ProgramFile {
            n: qp.n,
            quadratic: qp.terms,
            linear: qp.linear,
            constraints: qp.constraints,
            problem_class: qp.class,
        }
    }
}

pub fn evaluate_cost(qp: &QuadraticProgram, x: &Assignment) -> Result<f64> {
    qp.evaluate(x)
}

pub fn check_feasibility(qp: &QuadraticProgram, x: &Assignment) -> Result<Vec<usize>> {
    qp.check_feasibility(x)
}

pub fn flip_delta(qp: &QuadraticProgram, x: &Assignment, i: usize) -> Result<f64> {
    qp.flip_delta(x, i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_maxcut() -> QuadraticProgram {
        // -sum_{ij} (x_i + x_j - 2 x_i x_j) on K3 with unit weights
        QuadraticProgram::new(
            3,
            vec![-2.0, -2.0, -2.0],
            vec![(0, 1, 2.0), (0, 2, 2.0), (1, 2, 2.0)],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn zero_assignment_costs_nothing() {
        let qp = triangle_maxcut();
        assert_eq!(qp.evaluate(&Assignment::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn triangle_single_vertex_cuts_two_edges() {
        let qp = triangle_maxcut();
        let x = Assignment::from_bits(vec![1, 0, 0]).unwrap();
        assert_eq!(qp.evaluate(&x).unwrap(), -2.0);
        // flipping back to all zeros loses the cut
        assert_eq!(qp.flip_delta(&x, 0).unwrap(), 2.0);
    }

    #[test]
    fn linear_only_cost() {
        let qp = QuadraticProgram::new(2, vec![1.5, -2.0], vec![], vec![]).unwrap();
        assert_eq!(qp.evaluate(&Assignment::ones(2)).unwrap(), -0.5);
    }

    #[test]
    fn flip_delta_from_zero_is_linear_term() {
        let qp = triangle_maxcut();
        for i in 0..3 {
            assert_eq!(qp.flip_delta(&Assignment::zeros(3), i).unwrap(), qp.linear()[i]);
        }
    }

    #[test]
    fn flip_delta_is_an_involution() {
        let qp = triangle_maxcut();
        let x = Assignment::from_bits(vec![1, 1, 0]).unwrap();
        for i in 0..3 {
            let mut y = x.clone();
            y.flip(i);
            let s = qp.flip_delta(&x, i).unwrap() + qp.flip_delta(&y, i).unwrap();
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn feasibility_examples() {
        let card = QuadraticProgram::new(4, vec![0.0; 4], vec![], vec![Constraint::cardinality_eq(vec![0, 1, 2, 3], 2)])
            .unwrap();
        assert!(card.check_feasibility(&Assignment::from_bits(vec![1, 0, 1, 0]).unwrap()).unwrap().is_empty());
        assert_eq!(
            card.check_feasibility(&Assignment::from_bits(vec![1, 1, 1, 0]).unwrap()).unwrap(),
            vec![0]
        );
        let lin = QuadraticProgram::new(2, vec![0.0; 2], vec![], vec![Constraint::linear_le(vec![0, 1], vec![2.0, 3.0], 4.0)])
            .unwrap();
        assert_eq!(lin.check_feasibility(&Assignment::ones(2)).unwrap(), vec![0]);
    }

    #[test]
    fn dimension_and_index_errors() {
        let qp = triangle_maxcut();
        assert!(matches!(qp.evaluate(&Assignment::zeros(2)), Err(Error::Dimension { .. })));
        assert!(matches!(qp.check_feasibility(&Assignment::zeros(4)), Err(Error::Dimension { .. })));
        assert!(matches!(
            qp.flip_delta(&Assignment::zeros(3), 3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(QuadraticProgram::new(2, vec![0.0; 2], vec![(0, 0, 1.0)], vec![]).is_err());
        assert!(QuadraticProgram::new(2, vec![0.0; 2], vec![(0, 2, 1.0)], vec![]).is_err());
        assert!(QuadraticProgram::new(2, vec![0.0; 2], vec![(0, 1, 1.0), (1, 0, 1.0)], vec![]).is_err());
        assert!(QuadraticProgram::new(
            2,
            vec![0.0; 2],
            vec![],
            vec![Constraint::linear_eq(vec![0, 0], vec![1.0, 1.0], 1.0)]
        )
        .is_err());
        let mut bad = Constraint::cardinality_eq(vec![0, 1], 1);
        bad.bound = 0.5;
        assert!(QuadraticProgram::new(2, vec![0.0; 2], vec![], vec![bad]).is_err());
    }

    #[test]
    fn zero_coefficients_are_not_stored_and_lookup_is_symmetric() {
        let qp = QuadraticProgram::new(3, vec![0.0; 3], vec![(2, 0, -1.5), (0, 1, 0.0)], vec![]).unwrap();
        assert_eq!(qp.terms(), &[(0, 2, -1.5)]);
        assert_eq!(qp.coefficient(0, 2), -1.5);
        assert_eq!(qp.coefficient(2, 0), -1.5);
        assert_eq!(qp.coefficient(0, 1), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let qp = QuadraticProgram::new(
            3,
            vec![0.25, -1.0, 3.0],
            vec![(0, 1, 0.1), (1, 2, -7.0)],
            vec![Constraint::cardinality_eq(vec![0, 1, 2], 1)],
        )
        .unwrap()
        .with_class(Some(ProblemClass::AntennaPlacement));
        let back = QuadraticProgram::from_json(&qp.to_json().unwrap()).unwrap();
        assert_eq!(qp, back);
    }

    #[test]
    fn json_rejects_invalid_program() {
        let text = r#"{"n":2,"quadratic":[[0,5,1.0]],"linear":[0,0]}"#;
        assert!(QuadraticProgram::from_json(text).is_err());
        assert!(serde_json::from_str::<Assignment>("[0,2]").is_err());
    }

    #[test]
    fn builder_accumulates_both_orientations() {
        let mut b = QpBuilder::new(2);
        b.add_quadratic(0, 1, 1.0).add_quadratic(1, 0, 1.0).add_quadratic(1, 1, -3.0);
        let qp = b.build().unwrap();
        assert_eq!(qp.coefficient(0, 1), 2.0);
        assert_eq!(qp.linear(), &[0.0, -3.0]);
    }
}
