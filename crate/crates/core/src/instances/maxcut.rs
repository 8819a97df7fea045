use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::qp::{Assignment, ProblemClass, QpBuilder, QuadraticProgram};

/// Points drawn from `blob_count` isotropic Gaussians whose centers sit on a
/// circle of radius `10 * std`; nodes closer than `threshold` get a unit edge.
pub fn generate_blob_graph(n: usize, blob_count: usize, std: f64, threshold: f64, seed: u64) -> Result<WeightedGraph> {
    if blob_count == 0 || n < blob_count {
        return Err(Error::InvalidParameter(format!(
            "need n >= blob_count >= 1, got n = {n}, blob_count = {blob_count}"
        )));
    }
    if !(std > 0.0 && std.is_finite()) || !(threshold > 0.0) {
        return Err(Error::InvalidParameter("std and threshold must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, std).expect("std checked positive");
    let mut points = Vec::with_capacity(n);
    for b in 0..blob_count {
        let angle = TAU * b as f64 / blob_count as f64;
        let (cx, cy) = (10.0 * std * angle.cos(), 10.0 * std * angle.sin());
        let count = n / blob_count + usize::from(b < n % blob_count);
        for _ in 0..count {
            points.push((cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)));
        }
    }
    let t2 = threshold * threshold;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
            if dx * dx + dy * dy < t2 {
                edges.push((i, j, 1.0));
            }
        }
    }
    WeightedGraph::new(n, edges)
}

/// `H(x) = -sum_{(i,j)} w_ij (x_i + x_j - 2 x_i x_j)`, so `H(x) = -cut(x)`.
pub fn maxcut_to_qubo(g: &WeightedGraph) -> QuadraticProgram {
    let mut b = QpBuilder::new(g.node_count());
    for &(i, j, w) in g.edges() {
        b.add_quadratic(i, j, 2.0 * w).add_linear(i, -w).add_linear(j, -w);
    }
    b.class(ProblemClass::MaxCut);
    b.build().expect("edges of a valid graph form a valid program")
}

pub fn cut_value(g: &WeightedGraph, x: &Assignment) -> Result<f64> {
    if x.len() != g.node_count() {
        return Err(Error::Dimension {
            expected: g.node_count(),
            actual: x.len(),
        });
    }
    Ok(g.edges().iter().filter(|&&(i, j, _)| x.get(i) != x.get(j)).map(|e| e.2).sum())
}

/// Parses the Gset text format: a header `n m`, then `m` lines `i j w` with
/// 1-based node indices. Blank lines and trailing whitespace are ignored.
pub fn parse_gset(text: &str) -> Result<WeightedGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(no, l)| (no + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: String| Error::Parse { line, message };

    let (hline, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, m] = fields[..] else {
        return Err(err(hline, format!("header must be 'n m', got '{header}'")));
    };
    let n: usize = n.parse().map_err(|_| err(hline, format!("bad node count '{n}'")))?;
    let m: usize = m.parse().map_err(|_| err(hline, format!("bad edge count '{m}'")))?;

    let mut seen = std::collections::HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b, w] = fields[..] else {
            return Err(err(no, format!("edge line must be 'i j w', got '{line}'")));
        };
        let index = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
                Ok(v) => Err(err(no, format!("node {v} outside 1..={n}"))),
                Err(_) => Err(err(no, format!("bad node index '{s}'"))),
            }
        };
        let (i, j) = (index(a)?, index(b)?);
        let w: f64 = w.parse().map_err(|_| err(no, format!("bad weight '{w}'")))?;
        if !w.is_finite() {
            return Err(err(no, format!("non-finite weight '{w}'")));
        }
        if i == j {
            return Err(err(no, format!("self-loop at node {}", i + 1)));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(err(no, format!("duplicate edge {} {}", i + 1, j + 1)));
        }
        if edges.len() == m {
            return Err(err(no, format!("more than the {m} declared edges")));
        }
        edges.push((i, j, w));
    }
    if edges.len() != m {
        return Err(err(hline, format!("header declares {m} edges, found {}", edges.len())));
    }
    WeightedGraph::new(n, edges)
}

/// Inverse of [`parse_gset`].
pub fn write_gset(g: &WeightedGraph) -> String {
    let mut out = format!("{} {}\n", g.node_count(), g.edge_count());
    for &(i, j, w) in g.edges() {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{build_graph, cut_weight, partition_spectral};
    use rand::Rng;

    fn assignments(n: usize) -> impl Iterator<Item = Assignment> {
        (0u32..1 << n).map(move |m| Assignment::from_bools((0..n).map(|i| (m >> i) & 1 == 1)))
    }

    #[test]
    fn single_edge() {
        let g = WeightedGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let qp = maxcut_to_qubo(&g);
        assert_eq!(qp.evaluate(&Assignment::from_bits(vec![0, 1]).unwrap()).unwrap(), -1.0);
        assert_eq!(qp.evaluate(&Assignment::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn triangle_minimum_is_minus_two() {
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let qp = maxcut_to_qubo(&g);
        assert!(qp.terms().iter().all(|t| t.2 == 2.0));
        let min = assignments(3).map(|x| qp.evaluate(&x).unwrap()).fold(f64::INFINITY, f64::min);
        assert_eq!(min, -2.0);
    }

    #[test]
    fn qubo_cost_is_negative_cut() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(2..20);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(0.3) {
                        edges.push((i, j, rng.random_range(-3i32..=3) as f64));
                    }
                }
            }
            let g = WeightedGraph::new(n, edges).unwrap();
            let x = Assignment::from_bools((0..n).map(|_| rng.random_bool(0.5)));
            assert_eq!(maxcut_to_qubo(&g).evaluate(&x).unwrap(), -cut_value(&g, &x).unwrap());
        }
    }

    #[test]
    fn cut_value_examples() {
        let g = WeightedGraph::new(2, vec![(0, 1, -1.0)]).unwrap();
        assert_eq!(cut_value(&g, &Assignment::zeros(2)).unwrap(), 0.0);
        assert_eq!(cut_value(&g, &Assignment::ones(2)).unwrap(), 0.0);
        assert_eq!(cut_value(&g, &Assignment::from_bits(vec![0, 1]).unwrap()).unwrap(), -1.0);
        assert!(cut_value(&g, &Assignment::zeros(3)).is_err());
    }

    #[test]
    fn gset_parsing() {
        let g = parse_gset("3 2\n1 2 1\n2 3 -1\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges(), &[(0, 1, 1.0), (1, 2, -1.0)]);
        let g2 = parse_gset("3 2  \n\n1 2 1 \n2 3 -1\n\n").unwrap();
        assert_eq!(g2, g);
        assert_eq!(parse_gset(&write_gset(&g)).unwrap(), g);
    }

    #[test]
    fn gset_errors_carry_line_numbers() {
        let line_of = |text: &str| match parse_gset(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of("2 1\n1 1 1\n"), 2);
        assert_eq!(line_of("3 2\n1 2 1\n2 1 1\n"), 3);
        assert_eq!(line_of("3 1\n1 4 1\n"), 2);
        assert_eq!(line_of("3 1\n1 2\n"), 2);
        assert_eq!(line_of("3 1\n1 2 x\n"), 2);
        assert_eq!(line_of("3\n"), 1);
        assert_eq!(line_of("3 2\n1 2 1\n"), 1);
        assert_eq!(line_of("3 1\n1 2 1\n2 3 1\n"), 3);
        assert_eq!(line_of(""), 1);
    }

    #[test]
    fn blob_threshold_extremes() {
        let none = generate_blob_graph(20, 2, 1.0, 1e-12, 1).unwrap();
        assert_eq!(none.edge_count(), 0);
        let all = generate_blob_graph(20, 2, 1.0, 1e9, 1).unwrap();
        assert_eq!(all.edge_count(), 20 * 19 / 2);
        assert!(all.edges().iter().all(|e| e.2 == 1.0));
    }

    #[test]
    fn blob_generation_is_seeded() {
        let a = generate_blob_graph(40, 3, 1.0, 1.5, 9).unwrap();
        assert_eq!(a, generate_blob_graph(40, 3, 1.0, 1.5, 9).unwrap());
        assert_ne!(a, generate_blob_graph(40, 3, 1.0, 1.5, 10).unwrap());
    }

    #[test]
    fn blob_parameter_errors() {
        assert!(generate_blob_graph(2, 3, 1.0, 1.0, 0).is_err());
        assert!(generate_blob_graph(5, 0, 1.0, 1.0, 0).is_err());
        assert!(generate_blob_graph(5, 1, 0.0, 1.0, 0).is_err());
        assert!(generate_blob_graph(5, 1, 1.0, -1.0, 0).is_err());
    }

    #[test]
    fn three_blobs_separate_spectrally() {
        let g = generate_blob_graph(90, 3, 1.0, 1.5, 3).unwrap();
        let ig = build_graph(&maxcut_to_qubo(&g));
        let p = partition_spectral(&ig, 3, 0).unwrap();
        assert!(cut_weight(&ig, &p) <= 0.01 * ig.total_weight());
    }

    #[test]
    fn program_json_round_trip_is_exact() {
        let g = generate_blob_graph(30, 2, 0.7, 1.1, 4).unwrap();
        let qp = maxcut_to_qubo(&g);
        assert_eq!(QuadraticProgram::from_json(&qp.to_json().unwrap()).unwrap(), qp);
    }
}
