//! Brute-force exact solvers for tiny instances. These stay deliberately
//! dumb: they enumerate, they do not branch, and every other module's tests
//! are checked against them.

use crate::geometry::{d_max, ViableSets};
use crate::model::{
    squared_distance, CentroidRegion, CollapsedInstance, ConstraintSet, Dataset,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("enumeration size {size:.3e} exceeds the {limit:.0e} cap")]
    TooLarge { size: f64, limit: f64 },
}

const ASSIGNMENT_CAP: f64 = 1e7;
const GRID_CAP: f64 = 1e7;

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub cost: f64,
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
}

struct WeightedInput<'a> {
    coords: Vec<&'a [f64]>,
    weights: Vec<f64>,
    k: usize,
    constant: f64,
    ml: &'a [(usize, usize)],
    cl: &'a [(usize, usize)],
}

/// Enumerates every assignment in lexicographic order, skipping ML and CL
/// violations; per assignment the optimal centroids are the weighted means
/// of nonempty clusters (empty clusters cost nothing). Ties go to the
/// lexicographically smallest assignment.
fn enumerate_assignments(input: &WeightedInput) -> Result<Option<OracleSolution>, OracleError> {
    let n = input.coords.len();
    let k = input.k;
    let size = (k as f64).powi(n as i32);
    if size > ASSIGNMENT_CAP {
        return Err(OracleError::TooLarge {
            size,
            limit: ASSIGNMENT_CAP,
        });
    }
    let dim = input.coords[0].len();
    let total_sq: f64 = input
        .coords
        .iter()
        .zip(&input.weights)
        .map(|(c, w)| w * c.iter().map(|v| v * v).sum::<f64>())
        .sum();

    let mut assignment = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    'outer: loop {
        let feasible = input
            .ml
            .iter()
            .all(|&(a, b)| assignment[a] == assignment[b])
            && input
                .cl
                .iter()
                .all(|&(a, b)| assignment[a] != assignment[b]);
        if feasible {
            // cost = sum w|x|^2 - sum_k |sum_k w x|^2 / W_k
            let mut sums = vec![0.0; k * dim];
            let mut wsum = vec![0.0; k];
            for (i, c) in input.coords.iter().enumerate() {
                let a = assignment[i];
                let w = input.weights[i];
                wsum[a] += w;
                for (j, &v) in c.iter().enumerate() {
                    sums[a * dim + j] += w * v;
                }
            }
            let mut cost = total_sq;
            for c in 0..k {
                if wsum[c] > 0.0 {
                    let sq: f64 = sums[c * dim..(c + 1) * dim].iter().map(|v| v * v).sum();
                    cost -= sq / wsum[c];
                }
            }
            let replace = match &best {
                None => true,
                Some((bc, _)) => cost < bc - 1e-12 * bc.abs().max(1.0),
            };
            if replace {
                best = Some((cost, assignment.clone()));
            }
        }
        // Advance the base-k counter, most significant digit first.
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < k {
                continue 'outer;
            }
            assignment[pos] = 0;
        }
        break;
    }

    Ok(best.map(|(cost, assignment)| {
        let mut centroids = vec![vec![0.0; dim]; k];
        let mut wsum = vec![0.0; k];
        for (i, c) in input.coords.iter().enumerate() {
            let a = assignment[i];
            let w = input.weights[i];
            wsum[a] += w;
            for (j, &v) in c.iter().enumerate() {
                centroids[a][j] += w * v;
            }
        }
        for (c, w) in centroids.iter_mut().zip(&wsum) {
            if *w > 0.0 {
                for v in c.iter_mut() {
                    *v /= w;
                }
            }
        }
        OracleSolution {
            cost: cost.max(0.0) + input.constant,
            assignment,
            centroids,
        }
    }))
}

/// Exact optimum of the raw pairwise-constrained problem. `None` means no
/// assignment satisfies the constraints.
pub fn brute_force_raw(
    data: &Dataset,
    cons: &ConstraintSet,
    k: usize,
) -> Result<Option<OracleSolution>, OracleError> {
    let coords: Vec<&[f64]> = data.points().iter().map(|p| p.as_slice()).collect();
    enumerate_assignments(&WeightedInput {
        weights: vec![1.0; coords.len()],
        coords,
        k,
        constant: 0.0,
        ml: cons.ml_pairs(),
        cl: cons.cl_pairs(),
    })
}

/// Exact optimum of a collapsed instance; the reported cost includes the
/// instance constant.
pub fn brute_force(inst: &CollapsedInstance) -> Result<Option<OracleSolution>, OracleError> {
    enumerate_assignments(&WeightedInput {
        coords: inst.samples.iter().map(|s| s.coords.as_slice()).collect(),
        weights: inst.samples.iter().map(|s| s.weight as f64).collect(),
        k: inst.k,
        constant: inst.constant,
        ml: &[],
        cl: &inst.cl_edges,
    })
}

/// Exact region-restricted optimum: enumerates assignments (masks and CL
/// respected) and, per assignment, places each cluster centroid at its
/// weighted mean clamped into the cluster's box. This is the test oracle for
/// node-level bounds.
pub fn exact_region_optimum(
    inst: &CollapsedInstance,
    region: &CentroidRegion,
    viable: Option<&ViableSets>,
) -> Result<Option<OracleSolution>, OracleError> {
    let n = inst.n();
    let k = inst.k;
    let size = (k as f64).powi(n as i32);
    if size > ASSIGNMENT_CAP {
        return Err(OracleError::TooLarge {
            size,
            limit: ASSIGNMENT_CAP,
        });
    }
    let dim = inst.dim();
    let mut assignment = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>, Vec<Vec<f64>>)> = None;
    'outer: loop {
        let mask_ok = viable
            .map(|v| assignment.iter().enumerate().all(|(s, &a)| v.admits(s, a)))
            .unwrap_or(true);
        if mask_ok && inst.cl_feasible(&assignment) {
            let mut sums = vec![0.0; k * dim];
            let mut wsum = vec![0.0; k];
            let mut sq = 0.0;
            for (i, wp) in inst.samples.iter().enumerate() {
                let a = assignment[i];
                let w = wp.weight as f64;
                wsum[a] += w;
                sq += w * wp.coords.iter().map(|v| v * v).sum::<f64>();
                for (j, &v) in wp.coords.iter().enumerate() {
                    sums[a * dim + j] += w * v;
                }
            }
            let mut centroids = vec![vec![0.0; dim]; k];
            let mut cost = sq + inst.constant;
            for c in 0..k {
                let b = &region.boxes[c];
                for j in 0..dim {
                    let mu = if wsum[c] > 0.0 {
                        (sums[c * dim + j] / wsum[c]).clamp(b.lower[j], b.upper[j])
                    } else {
                        b.lower[j]
                    };
                    centroids[c][j] = mu;
                    cost += wsum[c] * mu * mu - 2.0 * sums[c * dim + j] * mu;
                }
            }
            let replace = match &best {
                None => true,
                Some((bc, _, _)) => cost < bc - 1e-12 * bc.abs().max(1.0),
            };
            if replace {
                best = Some((cost, assignment.clone(), centroids));
            }
        }
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < k {
                continue 'outer;
            }
            assignment[pos] = 0;
        }
        break;
    }
    Ok(best.map(|(cost, assignment, centroids)| OracleSolution {
        cost,
        assignment,
        centroids,
    }))
}

#[derive(Debug, Clone, Copy)]
pub struct RegionOracle {
    /// Minimum cost over the centroid grid; an upper bound on the true
    /// region-restricted optimum.
    pub value: f64,
    /// Lipschitz slack: the grid minimum is within this amount of the true
    /// optimum.
    pub slack: f64,
}

/// Dense-grid approximation of the region-restricted optimum. Cannot-link
/// constraints are enforced exactly (by assignment enumeration at each grid
/// point) when the instance has at most 10 samples, otherwise relaxed.
pub fn brute_force_in_region(
    inst: &CollapsedInstance,
    region: &CentroidRegion,
    grid_step: f64,
    viable: Option<&ViableSets>,
) -> Result<RegionOracle, OracleError> {
    assert!(grid_step > 0.0);
    let k = inst.k;
    let dim = inst.dim();
    // Axis grids: l, l+step, ..., plus the exact upper endpoint.
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(k * dim);
    let mut total: f64 = 1.0;
    for b in &region.boxes {
        for j in 0..dim {
            let mut pts = Vec::new();
            let mut v = b.lower[j];
            while v < b.upper[j] {
                pts.push(v);
                v += grid_step;
            }
            pts.push(b.upper[j]);
            total *= pts.len() as f64;
            axes.push(pts);
        }
    }
    if total > GRID_CAP {
        return Err(OracleError::TooLarge {
            size: total,
            limit: GRID_CAP,
        });
    }

    let exact_cl = !inst.cl_edges.is_empty() && inst.n() <= 10;
    let mut idx = vec![0usize; k * dim];
    let mut mu = vec![vec![0.0; dim]; k];
    let mut best = f64::INFINITY;
    'outer: loop {
        for c in 0..k {
            for j in 0..dim {
                mu[c][j] = axes[c * dim + j][idx[c * dim + j]];
            }
        }
        let cost = if exact_cl {
            min_assignment_cost_exact(inst, &mu, viable)
        } else {
            relaxed_cost(inst, &mu, viable)
        };
        if cost < best {
            best = cost;
        }
        let mut pos = idx.len();
        while pos > 0 {
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < axes[pos].len() {
                continue 'outer;
            }
            idx[pos] = 0;
        }
        break;
    }

    // |cost(a) - cost(b)| <= w * (|a-b|^2 + 2 |a-b| * max-dist) per sample,
    // with |a-b| at most sqrt(d) * step / 2 for the nearest grid point.
    let delta = grid_step * (dim as f64).sqrt() / 2.0;
    let slack: f64 = inst
        .samples
        .iter()
        .map(|wp| {
            let reach = region
                .boxes
                .iter()
                .map(|b| d_max(&wp.coords, b).sqrt())
                .fold(0.0, f64::max);
            wp.weight as f64 * (delta * delta + 2.0 * delta * reach)
        })
        .sum();
    Ok(RegionOracle { value: best, slack })
}

/// Best assignment cost at fixed centroids under masks and cannot-links.
/// Exact (by search) up to 20 samples; larger instances relax the
/// cannot-links, which keeps the value a lower bound on the true optimum.
pub fn fixed_centroid_optimum(
    inst: &CollapsedInstance,
    mu: &[Vec<f64>],
    viable: Option<&ViableSets>,
) -> f64 {
    if inst.cl_edges.is_empty() || inst.n() > 20 {
        relaxed_cost(inst, mu, viable)
    } else {
        min_assignment_cost_exact(inst, mu, viable)
    }
}

fn relaxed_cost(inst: &CollapsedInstance, mu: &[Vec<f64>], viable: Option<&ViableSets>) -> f64 {
    let mut cost = inst.constant;
    for (s, wp) in inst.samples.iter().enumerate() {
        let mut bestd = f64::INFINITY;
        for (c, center) in mu.iter().enumerate() {
            if viable.is_none_or(|v| v.admits(s, c)) {
                bestd = bestd.min(squared_distance(&wp.coords, center));
            }
        }
        cost += wp.weight as f64 * bestd;
    }
    cost
}

/// Exact minimum assignment cost at fixed centroids under masks plus CL,
/// found by depth-first search with a running suffix bound.
fn min_assignment_cost_exact(
    inst: &CollapsedInstance,
    mu: &[Vec<f64>],
    viable: Option<&ViableSets>,
) -> f64 {
    let n = inst.n();
    let k = inst.k;
    let mut dist = vec![0.0; n * k];
    let mut suffix_min = vec![0.0; n + 1];
    for (s, wp) in inst.samples.iter().enumerate() {
        let mut m = f64::INFINITY;
        for c in 0..k {
            let d = wp.weight as f64 * squared_distance(&wp.coords, &mu[c]);
            dist[s * k + c] = d;
            if viable.map(|v| v.admits(s, c)).unwrap_or(true) {
                m = m.min(d);
            }
        }
        suffix_min[s] = m;
    }
    for s in (0..n).rev() {
        suffix_min[s] += suffix_min[s + 1];
    }
    let adj = inst.cl_adjacency();

    struct Search<'a> {
        k: usize,
        dist: &'a [f64],
        suffix_min: &'a [f64],
        adj: &'a [Vec<usize>],
        viable: Option<&'a ViableSets>,
        assignment: Vec<usize>,
        best: f64,
    }
    impl Search<'_> {
        fn dfs(&mut self, s: usize, acc: f64) {
            if acc + self.suffix_min[s] >= self.best {
                return;
            }
            if s == self.assignment.len() {
                self.best = acc;
                return;
            }
            for c in 0..self.k {
                if !self.viable.is_none_or(|v| v.admits(s, c)) {
                    continue;
                }
                if self.adj[s]
                    .iter()
                    .any(|&u| u < s && self.assignment[u] == c)
                {
                    continue;
                }
                self.assignment[s] = c;
                self.dfs(s + 1, acc + self.dist[s * self.k + c]);
                self.assignment[s] = usize::MAX;
            }
        }
    }
    let mut search = Search {
        k,
        dist: &dist,
        suffix_min: &suffix_min,
        adj: &adj,
        viable,
        assignment: vec![usize::MAX; n],
        best: f64::INFINITY,
    };
    search.dfs(0, 0.0);
    search.best + inst.constant
}

/// Hand-built collapsed instance, shared by the unit tests.
#[cfg(test)]
pub(crate) fn weighted(
    points: &[(&[f64], u64)],
    cl: &[(usize, usize)],
    constant: f64,
    k: usize,
) -> CollapsedInstance {
    use crate::model::WeightedPoint;
    let mut next = 0usize;
    CollapsedInstance {
        samples: points
            .iter()
            .map(|(p, w)| {
                let members = (next..next + *w as usize).collect();
                next += *w as usize;
                WeightedPoint {
                    coords: p.to_vec(),
                    weight: *w,
                    members,
                }
            })
            .collect(),
        cl_edges: cl.to_vec(),
        constant,
        k,
    }
}
