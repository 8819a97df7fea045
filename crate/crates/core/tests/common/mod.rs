#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use splitqp::qp::{Assignment, Constraint, QpBuilder, QuadraticProgram};
use splitqp::Partition;

/// Integer coefficients in [-10, 10]; `quota` adds a global cardinality
/// equality with a random right-hand side.
pub fn random_program(rng: &mut ChaCha8Rng, n: usize, density: f64, quota: bool) -> QuadraticProgram {
    let mut b = QpBuilder::new(n);
    for i in 0..n {
        b.add_linear(i, rng.random_range(-10..=10) as f64);
        for j in i + 1..n {
            if rng.random_bool(density) {
                b.add_quadratic(i, j, rng.random_range(-10..=10) as f64);
            }
        }
    }
    if quota {
        let v = rng.random_range(0..=n);
        b.add_constraint(Constraint::cardinality_eq((0..n).collect(), v));
    }
    b.build().unwrap()
}

/// Real coefficients, for identities that must hold up to rounding.
pub fn random_real_program(rng: &mut ChaCha8Rng, n: usize, density: f64) -> QuadraticProgram {
    let mut b = QpBuilder::new(n);
    for i in 0..n {
        b.add_linear(i, rng.random_range(-5.0..5.0));
        for j in i + 1..n {
            if rng.random_bool(density) {
                b.add_quadratic(i, j, rng.random_range(-5.0..5.0));
            }
        }
    }
    b.build().unwrap()
}

/// Every part non-empty.
pub fn random_partition(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Partition {
    let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    labels.shuffle(rng);
    Partition::from_assignment(labels, k).unwrap()
}

pub fn random_assignment(rng: &mut ChaCha8Rng, n: usize) -> Assignment {
    Assignment::from_bools((0..n).map(|_| rng.random_bool(0.5)))
}

pub fn enumerate(n: usize) -> impl Iterator<Item = Assignment> {
    (0u64..1 << n).map(move |m| Assignment::from_bools((0..n).map(|i| (m >> i) & 1 == 1)))
}
