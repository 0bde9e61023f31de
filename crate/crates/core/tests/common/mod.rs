//! Shared helpers for the integration and acceptance suites.

#![allow(dead_code)]

use ckbb::model::{CentroidBox, CentroidRegion, ConstraintSet, Dataset};
use ckbb::oracle;
use ckbb::preprocess::{check_root_feasibility, collapse, RootFeasibility};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct TinyInstance {
    pub data: Dataset,
    pub cons: ConstraintSet,
    pub k: usize,
}

/// Seeded random tiny instance with a feasible ML/CL mix: n in 2..=9,
/// d in 1..=3, k in 1..=3. Instances whose constraints admit no assignment
/// are resampled.
pub fn random_tiny(seed: u64) -> TinyInstance {
    for attempt in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000).wrapping_add(attempt));
        let n = rng.gen_range(2..=9usize);
        let d = rng.gen_range(1..=3usize);
        let k = rng.gen_range(1..=3usize).min(n);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let data = Dataset::new(points, None).unwrap();

        let mut ml = Vec::new();
        let mut cl = Vec::new();
        let pair_attempts = rng.gen_range(0..=n);
        for _ in 0..pair_attempts {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i == j {
                continue;
            }
            let pair = (i.min(j), i.max(j));
            if rng.gen_bool(0.5) {
                if !cl.contains(&pair) && !ml.contains(&pair) {
                    ml.push(pair);
                }
            } else if !ml.contains(&pair) && !cl.contains(&pair) {
                cl.push(pair);
            }
        }
        let Ok(cons) = ConstraintSet::new(ml, cl) else {
            continue;
        };
        let Ok(inst) = collapse(&data, &cons, k) else {
            continue;
        };
        if matches!(check_root_feasibility(&inst), RootFeasibility::Infeasible { .. }) {
            continue;
        }
        // Reject instances that are infeasible in ways the cheap check missed.
        match oracle::brute_force_raw(&data, &cons, k) {
            Ok(Some(_)) => return TinyInstance { data, cons, k },
            _ => continue,
        }
    }
    panic!("could not build a feasible tiny instance for seed {seed}");
}

/// Tiny instance with must-links only.
pub fn ml_only_tiny(seed: u64) -> TinyInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(7919).wrapping_add(13));
    let n = rng.gen_range(3..=9usize);
    let d = rng.gen_range(1..=3usize);
    let k = rng.gen_range(1..=3usize).min(n);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .collect();
    let data = Dataset::new(points, None).unwrap();
    let mut ml = Vec::new();
    for _ in 0..rng.gen_range(1..=n) {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let pair = (i.min(j), i.max(j));
        if i != j && !ml.contains(&pair) {
            ml.push(pair);
        }
    }
    let cons = ConstraintSet::new(ml, vec![]).unwrap();
    TinyInstance { data, cons, k }
}

/// Random sub-region of the instance's root box: every cluster gets an
/// independent box with edges of at most `max_edge`.
pub fn random_subregion(
    inst: &ckbb::CollapsedInstance,
    rng: &mut ChaCha8Rng,
    max_edge: f64,
) -> CentroidRegion {
    let root = ckbb::geometry::root_region(inst);
    let boxes = root
        .boxes
        .iter()
        .map(|b| {
            let (lower, upper) = b
                .lower
                .iter()
                .zip(&b.upper)
                .map(|(&lo, &hi)| {
                    let width = (hi - lo).min(max_edge) * rng.gen_range(0.2..1.0);
                    let start = if hi - width > lo {
                        rng.gen_range(lo..(hi - width))
                    } else {
                        lo
                    };
                    (start, start + width)
                })
                .unzip();
            CentroidBox { lower, upper }
        })
        .collect();
    CentroidRegion { boxes }
}
