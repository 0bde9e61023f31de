//! Feasible-solution generators: weighted k-means++ seeding and a
//! constraint-respecting Lloyd loop with restarts. These provide the root
//! incumbent for the solver and double as a standalone baseline.

use crate::bounds::coloring_order;
use crate::model::{squared_distance, CollapsedInstance, Solution};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HeuristicError {
    /// A sample had every cluster banned by already-assigned cannot-link
    /// neighbors; this restart is abandoned.
    #[error("constrained assignment blocked for sample {sample}")]
    AssignmentBlocked { sample: usize },
}

/// Weighted k-means++ seeding: the first centroid is drawn proportionally
/// to weight, later ones proportionally to weight times squared distance to
/// the nearest chosen centroid. When the distance mass hits zero (fewer
/// distinct points than k), remaining centroids duplicate existing points.
pub fn kmeanspp_seed(inst: &CollapsedInstance, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = inst.n();
    let weights: Vec<f64> = inst.samples.iter().map(|s| s.weight as f64).collect();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = WeightedIndex::new(&weights).expect("positive weights").sample(rng);
    centroids.push(inst.samples[first].coords.clone());

    let mut nearest: Vec<f64> = inst
        .samples
        .iter()
        .map(|s| squared_distance(&s.coords, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let mass: Vec<f64> = nearest
            .iter()
            .zip(&weights)
            .map(|(d, w)| d * w)
            .collect();
        let total: f64 = mass.iter().sum();
        let chosen = if total > 0.0 {
            WeightedIndex::new(&mass).expect("nonnegative mass").sample(rng)
        } else {
            (centroids.len() - 1) % n
        };
        let c = inst.samples[chosen].coords.clone();
        for (s, d) in inst.samples.iter().zip(nearest.iter_mut()) {
            *d = d.min(squared_distance(&s.coords, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Constrained Lloyd: each pass assigns samples (hardest first) to the
/// nearest centroid not already used by an assigned cannot-link neighbor,
/// then recomputes centroids as weighted means. Returns the best iterate;
/// the recorded cost sequence is strictly decreasing by construction.
pub fn cop_kmeans(
    inst: &CollapsedInstance,
    k: usize,
    rng: &mut impl Rng,
    max_iters: usize,
) -> Result<Solution, HeuristicError> {
    let order = coloring_order(inst);
    let adj = inst.cl_adjacency();
    let dim = inst.dim();
    let mut centroids = kmeanspp_seed(inst, k, rng);
    let mut best: Option<Solution> = None;
    let mut prev_assignment: Option<Vec<usize>> = None;

    for _ in 0..max_iters.max(1) {
        let mut assignment = vec![usize::MAX; inst.n()];
        for &s in &order {
            let mut banned = 0u64;
            for &u in &adj[s] {
                if assignment[u] != usize::MAX {
                    banned |= 1 << assignment[u];
                }
            }
            let mut best_c = usize::MAX;
            let mut best_d = f64::INFINITY;
            for (c, mu) in centroids.iter().enumerate() {
                if banned & (1 << c) != 0 {
                    continue;
                }
                let d = squared_distance(&inst.samples[s].coords, mu);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            if best_c == usize::MAX {
                return Err(HeuristicError::AssignmentBlocked { sample: s });
            }
            assignment[s] = best_c;
        }

        // Weighted means; empty clusters keep their previous centroid.
        let mut wsum = vec![0.0; k];
        let mut sums = vec![vec![0.0; dim]; k];
        for (wp, &c) in inst.samples.iter().zip(&assignment) {
            let w = wp.weight as f64;
            wsum[c] += w;
            for (j, &v) in wp.coords.iter().enumerate() {
                sums[c][j] += w * v;
            }
        }
        for c in 0..k {
            if wsum[c] > 0.0 {
                for j in 0..dim {
                    centroids[c][j] = sums[c][j] / wsum[c];
                }
            }
        }

        let cost = inst.constant
            + inst
                .samples
                .iter()
                .zip(&assignment)
                .map(|(wp, &c)| wp.weight as f64 * squared_distance(&wp.coords, &centroids[c]))
                .sum::<f64>();
        let improved = best.as_ref().is_none_or(|b| cost < b.objective);
        let fixpoint = prev_assignment.as_ref() == Some(&assignment);
        if improved {
            best = Some(Solution {
                centroids: centroids.clone(),
                assignment: assignment.clone(),
                objective: cost,
                feasible: true,
            });
        }
        if fixpoint || !improved {
            break;
        }
        prev_assignment = Some(assignment);
    }
    Ok(best.expect("at least one pass ran"))
}

/// Best feasible solution over independently seeded restarts. Restart r uses
/// stream r of the master seed, so results do not depend on scheduling
/// order. Returns `None` when every restart blocks.
pub fn multi_restart(
    inst: &CollapsedInstance,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Option<Solution> {
    let mut best: Option<Solution> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        if let Ok(sol) = cop_kmeans(inst, k, &mut rng, 100) {
            if best.as_ref().is_none_or(|b| sol.objective < b.objective) {
                best = Some(sol);
            }
        }
    }
    best
}
