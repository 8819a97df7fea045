//! Scalable partitioner for graphs beyond the dense eigensolver limit.
//!
//! Size-capped label propagation coarsens the graph into small, well
//! connected clusters. Clusters are then laid out in a connectivity-following
//! order (each step takes the cluster most strongly attached to those already
//! placed) and the resulting node sequence is cut into `k` contiguous chunks
//! whose sizes differ by at most one.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_k, InteractionGraph, Partition};
use crate::error::Result;

const MAX_ROUNDS: usize = 20;

pub fn partition_greedy(g: &InteractionGraph, k: usize, seed: u64) -> Result<Partition> {
    let n = g.node_count();
    check_k(k, n)?;
    if k == 1 {
        return Ok(Partition::single(n));
    }
    let labels = propagate_labels(g, n.div_ceil(k), seed);
    let sequence = cluster_sequence(g, &labels);

    let mut assignment = vec![0; n];
    let (base, extra) = (n / k, n % k);
    let mut cursor = 0;
    for part in 0..k {
        let len = base + usize::from(part < extra);
        for &node in &sequence[cursor..cursor + len] {
            assignment[node] = part;
        }
        cursor += len;
    }
    Partition::canonical(&assignment, k)
}

fn propagate_labels(g: &InteractionGraph, cap: usize, seed: u64) -> Vec<usize> {
    let n = g.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weight = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::new();

    for _ in 0..MAX_ROUNDS {
        order.shuffle(&mut rng);
        let mut moved = 0;
        for &v in &order {
            let own = labels[v];
            for &(u, w) in g.neighbors(v) {
                let l = labels[u];
                if weight[l] == 0.0 {
                    touched.push(l);
                }
                weight[l] += w;
            }
            let mut best = (weight[own], own);
            touched.sort_unstable();
            for &l in &touched {
                if l != own && sizes[l] < cap && weight[l] > best.0 {
                    best = (weight[l], l);
                }
            }
            for &l in &touched {
                weight[l] = 0.0;
            }
            touched.clear();
            if best.1 != own {
                sizes[own] -= 1;
                sizes[best.1] += 1;
                labels[v] = best.1;
                moved += 1;
            }
        }
        if moved == 0 {
            break;
        }
    }
    labels
}

/// Node order: clusters visited by strongest attachment to the visited set,
/// falling back to the cluster with the smallest node when none is attached.
fn cluster_sequence(g: &InteractionGraph, labels: &[usize]) -> Vec<usize> {
    let n = g.node_count();
    // dense cluster ids in order of smallest member
    let mut remap = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (node, &l) in labels.iter().enumerate() {
        if remap[l] == usize::MAX {
            remap[l] = members.len();
            members.push(Vec::new());
        }
        members[remap[l]].push(node);
    }
    let cluster_of: Vec<usize> = labels.iter().map(|&l| remap[l]).collect();
    let c = members.len();

    let mut attach = vec![0.0f64; c];
    let mut visited = vec![false; c];
    let mut sequence = Vec::with_capacity(n);
    let mut next_fallback = 0;
    for _ in 0..c {
        let mut pick: Option<usize> = None;
        for id in 0..c {
            if !visited[id] && attach[id] > 0.0 && pick.is_none_or(|p| attach[id] > attach[p]) {
                pick = Some(id);
            }
        }
        let id = pick.unwrap_or_else(|| {
            while visited[next_fallback] {
                next_fallback += 1;
            }
            next_fallback
        });
        visited[id] = true;
        for &node in &members[id] {
            sequence.push(node);
            for &(u, w) in g.neighbors(node) {
                let cu = cluster_of[u];
                if !visited[cu] {
                    attach[cu] += w;
                }
            }
        }
    }
    sequence
}
