//! Seeded synthetic data: isotropic Gaussian blobs and random-pair
//! constraint generation from ground-truth labels.

use super::IoError;
use crate::model::{ConstraintSet, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// `k_true` unit-variance Gaussian blobs with means drawn uniformly from
/// `[0, 10 * spread]^d`. Blob sizes are equal with the remainder going to
/// the last blob; rows interleave the blobs so that any prefix of the data
/// mixes all classes. Labels are the blob ids.
pub fn generate_synthetic(n: usize, d: usize, k_true: usize, seed: u64, spread: f64) -> Dataset {
    assert!(n >= k_true && k_true >= 1 && d >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = 10.0 * spread;
    let means: Vec<Vec<f64>> = (0..k_true)
        .map(|_| (0..d).map(|_| rng.gen::<f64>() * side).collect())
        .collect();
    let base = n / k_true;
    let mut remaining: Vec<usize> = vec![base; k_true];
    remaining[k_true - 1] += n % k_true;

    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut blob = 0usize;
    while points.len() < n {
        if remaining[blob] > 0 {
            remaining[blob] -= 1;
            let point: Vec<f64> = means[blob]
                .iter()
                .map(|m| m + normal.sample(&mut rng))
                .collect();
            points.push(point);
            labels.push(blob);
        }
        blob = (blob + 1) % k_true;
    }
    Dataset::new(points, Some(labels)).expect("generated data is valid")
}

/// Draws uniform random sample pairs until the requested ML and CL counts
/// are met: same-label pairs become must-links, different-label pairs become
/// cannot-links, pairs of an already-filled kind are discarded. Duplicates
/// are resampled.
pub fn generate_constraints(
    labels: &[usize],
    count_ml: usize,
    count_cl: usize,
    seed: u64,
) -> Result<ConstraintSet, IoError> {
    let n = labels.len();
    if n < 2 && count_ml + count_cl > 0 {
        return Err(IoError::Unsatisfiable(
            "need at least two samples to draw pairs".into(),
        ));
    }
    // Feasibility caps: same-label and cross-label pair counts.
    let mut class_sizes = std::collections::HashMap::new();
    for &l in labels {
        *class_sizes.entry(l).or_insert(0usize) += 1;
    }
    let same: usize = class_sizes.values().map(|&c| c * (c - 1) / 2).sum();
    let cross = n * (n - 1) / 2 - same;
    if count_ml > same {
        return Err(IoError::Unsatisfiable(format!(
            "{count_ml} must-link pairs requested but only {same} same-label pairs exist"
        )));
    }
    if count_cl > cross {
        return Err(IoError::Unsatisfiable(format!(
            "{count_cl} cannot-link pairs requested but only {cross} cross-label pairs exist"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ml = std::collections::BTreeSet::new();
    let mut cl = std::collections::BTreeSet::new();
    while ml.len() < count_ml || cl.len() < count_cl {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let pair = (i.min(j), i.max(j));
        if labels[i] == labels[j] {
            if ml.len() < count_ml {
                ml.insert(pair);
            }
        } else if cl.len() < count_cl {
            cl.insert(pair);
        }
    }
    Ok(ConstraintSet::new_dedup(
        ml.into_iter().collect(),
        cl.into_iter().collect(),
    )?)
}
