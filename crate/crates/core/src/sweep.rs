//! Monotone sweep updates applied between iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::qp::{Assignment, QuadraticProgram};

/// A move is accepted only if it lowers the cost by more than this.
pub const ACCEPT_TOL: f64 = 1e-12;

fn check_len(qp: &QuadraticProgram, x: &Assignment) -> Result<()> {
    if x.len() != qp.n() {
        return Err(Error::Dimension {
            expected: qp.n(),
            actual: x.len(),
        });
    }
    Ok(())
}

fn fields(qp: &QuadraticProgram, x: &Assignment) -> Vec<f64> {
    (0..qp.n()).map(|i| qp.local_field(x, i)).collect()
}

#[inline]
fn raise_sign(x: &Assignment, i: usize) -> f64 {
    if x.get(i) {
        -1.0
    } else {
        1.0
    }
}

fn flip_and_update(qp: &QuadraticProgram, x: &mut Assignment, field: &mut [f64], i: usize) {
    let sign = raise_sign(x, i);
    x.flip(i);
    for &(j, q) in qp.neighbors(i) {
        field[j] += sign * q;
    }
}

/// One pass in index order, flipping each variable whose flip lowers the cost.
pub fn sweep_single_flip(qp: &QuadraticProgram, x: &Assignment) -> Result<Assignment> {
    check_len(qp, x)?;
    let mut x = x.clone();
    let mut field = fields(qp, &x);
    for i in 0..qp.n() {
        if raise_sign(&x, i) * field[i] < -ACCEPT_TOL {
            flip_and_update(qp, &mut x, &mut field, i);
        }
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug)]
pub struct DoubleFlipOptions {
    /// Up to this many variables every cross-part pair is a candidate.
    pub all_pairs_limit: usize,
    /// Above the limit: cross-edge pairs plus `sample_factor * n` random pairs.
    pub sample_factor: usize,
    pub seed: u64,
}

impl Default for DoubleFlipOptions {
    fn default() -> Self {
        DoubleFlipOptions {
            all_pairs_limit: 2000,
            sample_factor: 10,
            seed: 0,
        }
    }
}

/// Pair moves flipping two opposite-valued variables in different parts;
/// the number of ones is preserved.
pub fn sweep_double_flip(qp: &QuadraticProgram, x: &Assignment, p: &Partition) -> Result<Assignment> {
    sweep_double_flip_with(qp, x, p, &DoubleFlipOptions::default())
}

pub fn sweep_double_flip_with(
    qp: &QuadraticProgram,
    x: &Assignment,
    p: &Partition,
    opts: &DoubleFlipOptions,
) -> Result<Assignment> {
    check_len(qp, x)?;
    if p.n() != qp.n() {
        return Err(Error::Dimension {
            expected: qp.n(),
            actual: p.n(),
        });
    }
    let n = qp.n();
    let mut x = x.clone();
    let mut field = fields(qp, &x);
    let mut row = vec![0.0f64; n];

    let try_pair = |x: &mut Assignment, field: &mut Vec<f64>, i: usize, j: usize, q: f64| {
        if x.get(i) == x.get(j) {
            return;
        }
        let delta = raise_sign(x, i) * field[i] + raise_sign(x, j) * field[j] - q;
        if delta < -ACCEPT_TOL {
            flip_and_update(qp, x, field, i);
            flip_and_update(qp, x, field, j);
        }
    };

    if n <= opts.all_pairs_limit {
        for i in 0..n {
            for &(j, q) in qp.neighbors(i) {
                row[j] = q;
            }
            for j in i + 1..n {
                if p.part_of(i) != p.part_of(j) {
                    try_pair(&mut x, &mut field, i, j, row[j]);
                }
            }
            for &(j, _) in qp.neighbors(i) {
                row[j] = 0.0;
            }
        }
    } else {
        for (i, j, q) in candidate_pairs(qp, p, opts) {
            try_pair(&mut x, &mut field, i, j, q);
        }
    }
    Ok(x)
}

/// Sorted, deduplicated cross-part pairs with their couplings.
fn candidate_pairs(qp: &QuadraticProgram, p: &Partition, opts: &DoubleFlipOptions) -> Vec<(usize, usize, f64)> {
    let n = qp.n();
    let mut pairs: Vec<(usize, usize)> = qp
        .terms()
        .iter()
        .filter(|&&(i, j, _)| p.part_of(i) != p.part_of(j))
        .map(|&(i, j, _)| (i, j))
        .collect();
    if p.k() > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let target = opts.sample_factor * n;
        let mut drawn = 0;
        let mut attempts = 0;
        while drawn < target && attempts < 4 * target {
            attempts += 1;
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if p.part_of(i) != p.part_of(j) {
                pairs.push((i.min(j), i.max(j)));
                drawn += 1;
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs.into_iter().map(|(i, j)| (i, j, qp.coefficient(i, j))).collect()
}
