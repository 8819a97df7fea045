//! Normalized spectral clustering: embed nodes with the low eigenvectors of
//! `I - D^{-1/2} W D^{-1/2}`, row-normalize, then k-means++ / Lloyd.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_k, InteractionGraph, Partition};
use crate::error::{Error, Result};

pub const DEFAULT_DENSE_LIMIT: usize = 4000;

#[derive(Clone, Copy, Debug)]
pub struct SpectralOptions {
    /// Largest node count handed to the dense eigensolver.
    pub dense_limit: usize,
    /// Independent k-means++ restarts; the lowest-inertia run wins.
    pub restarts: usize,
    pub max_lloyd_iters: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            dense_limit: DEFAULT_DENSE_LIMIT,
            restarts: 10,
            max_lloyd_iters: 300,
        }
    }
}

pub fn partition_spectral(g: &InteractionGraph, k: usize, seed: u64) -> Result<Partition> {
    partition_spectral_with(g, k, seed, &SpectralOptions::default())
}

pub fn partition_spectral_with(
    g: &InteractionGraph,
    k: usize,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<Partition> {
    let n = g.node_count();
    check_k(k, n)?;
    if n > opts.dense_limit {
        return Err(Error::GraphTooLarge {
            nodes: n,
            limit: opts.dense_limit,
        });
    }
    if k == 1 {
        return Ok(Partition::single(n));
    }

    let degree: Vec<f64> = (0..n).map(|i| g.weighted_degree(i)).collect();
    let active: Vec<usize> = (0..n).filter(|&i| degree[i] > 0.0).collect();
    let dims = k.min(active.len());

    let mut embedding = vec![vec![0.0; dims]; n];
    if dims > 0 {
        let rows = spectral_embedding(g, &degree, &active, dims);
        for (row, &node) in rows.into_iter().zip(&active) {
            embedding[node] = row;
        }
    }

    let mut labels = vec![usize::MAX; n];
    if dims > 0 {
        let points: Vec<&[f64]> = active.iter().map(|&i| embedding[i].as_slice()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<(f64, Vec<usize>)> = None;
        for _ in 0..opts.restarts.max(1) {
            let (inertia, assign) = kmeans(&points, dims, opts.max_lloyd_iters, &mut rng);
            if best.as_ref().is_none_or(|b| inertia < b.0) {
                best = Some((inertia, assign));
            }
        }
        for (&node, label) in active.iter().zip(best.unwrap().1) {
            labels[node] = label;
        }
    }

    let mut sizes = vec![0usize; k];
    for &l in labels.iter().filter(|&&l| l != usize::MAX) {
        sizes[l] += 1;
    }
    // isolated nodes go to the currently smallest cluster
    for label in labels.iter_mut().filter(|l| **l == usize::MAX) {
        let smallest = (0..k).min_by_key(|&c| (sizes[c], c)).unwrap();
        *label = smallest;
        sizes[smallest] += 1;
    }

    repair_empty(&mut labels, &mut sizes, &embedding);
    Partition::canonical(&labels, k)
}

/// Row-normalized eigenvectors of the `dims` smallest eigenvalues of the
/// normalized Laplacian restricted to `active` nodes.
fn spectral_embedding(g: &InteractionGraph, degree: &[f64], active: &[usize], dims: usize) -> Vec<Vec<f64>> {
    let m = active.len();
    let mut local = vec![usize::MAX; degree.len()];
    for (pos, &node) in active.iter().enumerate() {
        local[node] = pos;
    }
    let inv_sqrt: Vec<f64> = active.iter().map(|&i| 1.0 / degree[i].sqrt()).collect();
    let mut lap = DMatrix::<f64>::identity(m, m);
    for (a, &i) in active.iter().enumerate() {
        for &(j, w) in g.neighbors(i) {
            let b = local[j];
            lap[(a, b)] -= w * inv_sqrt[a] * inv_sqrt[b];
        }
    }
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    (0..m)
        .map(|row| {
            let mut v: Vec<f64> = order[..dims].iter().map(|&c| eig.eigenvectors[(row, c)]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            v
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One k-means++ seeded Lloyd run. Returns (inertia, labels).
fn kmeans(points: &[&[f64]], k: usize, max_iters: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<usize>) {
    let n = points.len();
    let dim = points[0].len();

    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..n)].to_vec());
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[pick].to_vec());
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centers.last().unwrap()));
        }
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iters {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(p, &centers[a]).total_cmp(&sq_dist(p, &centers[b])).then(a.cmp(&b)))
                .unwrap();
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p.iter()).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = points.iter().zip(&labels).map(|(p, &l)| sq_dist(p, &centers[l])).sum();
    (inertia, labels)
}

/// Fills empty clusters by moving, one at a time, the node farthest from its
/// cluster centroid (taken from clusters with more than one member).
fn repair_empty(labels: &mut [usize], sizes: &mut [usize], embedding: &[Vec<f64>]) {
    let k = sizes.len();
    let dim = embedding.first().map_or(0, Vec::len);
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let mut centroids = vec![vec![0.0; dim]; k];
        for (row, &l) in embedding.iter().zip(labels.iter()) {
            centroids[l].iter_mut().zip(row).for_each(|(c, x)| *c += x);
        }
        for (c, &s) in centroids.iter_mut().zip(sizes.iter()) {
            if s > 0 {
                c.iter_mut().for_each(|v| *v /= s as f64);
            }
        }
        let mut best: Option<(f64, usize)> = None;
        for (node, &l) in labels.iter().enumerate() {
            if sizes[l] <= 1 {
                continue;
            }
            let d = sq_dist(&embedding[node], &centroids[l]);
            if best.is_none_or(|b| d > b.0) {
                best = Some((d, node));
            }
        }
        let node = best.expect("k <= n guarantees a donor cluster").1;
        sizes[labels[node]] -= 1;
        labels[node] = empty;
        sizes[empty] += 1;
    }
}
