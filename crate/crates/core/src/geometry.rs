//! Box-distance primitives and the geometric sample-determination rules:
//! early elimination against the incumbent, forced assignment from distance
//! dominance, and cannot-link propagation to a fixed point.

use crate::model::{CentroidBox, CentroidRegion, CollapsedInstance};

/// Raised when a determination rule proves that no solution better than the
/// incumbent has centroids inside the node's region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeInfeasible;

/// Per-sample sets of still-admissible clusters, stored as bitmasks, plus
/// the forced assignment where a mask has shrunk to one cluster.
///
/// Invariants: every mask is nonempty, and `forced(s) == Some(k)` exactly
/// when `mask(s) == {k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViableSets {
    masks: Vec<u64>,
    k: usize,
}

impl ViableSets {
    pub fn full(n: usize, k: usize) -> Self {
        assert!((1..=64).contains(&k));
        let all = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        Self {
            masks: vec![all; n],
            k,
        }
    }

    pub fn n(&self) -> usize {
        self.masks.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn mask(&self, s: usize) -> u64 {
        self.masks[s]
    }

    #[inline]
    pub fn admits(&self, s: usize, cluster: usize) -> bool {
        self.masks[s] & (1 << cluster) != 0
    }

    #[inline]
    pub fn count(&self, s: usize) -> u32 {
        self.masks[s].count_ones()
    }

    #[inline]
    pub fn forced(&self, s: usize) -> Option<usize> {
        let m = self.masks[s];
        if m.count_ones() == 1 {
            Some(m.trailing_zeros() as usize)
        } else {
            None
        }
    }

    pub fn clusters(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = self.masks[s];
        (0..self.k).filter(move |&c| mask & (1 << c) != 0)
    }

    /// Removes one cluster from a sample's mask; emptying it means the node
    /// admits no improving solution.
    pub fn remove(&mut self, s: usize, cluster: usize) -> Result<(), NodeInfeasible> {
        self.masks[s] &= !(1u64 << cluster);
        if self.masks[s] == 0 {
            Err(NodeInfeasible)
        } else {
            Ok(())
        }
    }

    pub fn force(&mut self, s: usize, cluster: usize) {
        debug_assert!(self.admits(s, cluster));
        self.masks[s] = 1u64 << cluster;
    }
}

/// Root centroid region: one identical box per cluster spanning the
/// coordinate-wise data range.
pub fn root_region(inst: &CollapsedInstance) -> CentroidRegion {
    let dim = inst.dim();
    let mut lower = vec![f64::INFINITY; dim];
    let mut upper = vec![f64::NEG_INFINITY; dim];
    for wp in &inst.samples {
        for i in 0..dim {
            lower[i] = lower[i].min(wp.coords[i]);
            upper[i] = upper[i].max(wp.coords[i]);
        }
    }
    let b = CentroidBox { lower, upper };
    CentroidRegion {
        boxes: vec![b; inst.k],
    }
}

/// Minimum squared distance from a point to a box: each coordinate clamps
/// to the box, so the deficit is `max(l - x, 0, x - u)` per coordinate.
#[inline]
pub fn d_min(x: &[f64], b: &CentroidBox) -> f64 {
    let mut acc = 0.0;
    for ((&v, &lo), &hi) in x.iter().zip(&b.lower).zip(&b.upper) {
        let deficit = (lo - v).max(0.0).max(v - hi);
        acc += deficit * deficit;
    }
    acc
}

/// Maximum squared distance from a point to a box, attained at a corner.
#[inline]
pub fn d_max(x: &[f64], b: &CentroidBox) -> f64 {
    let mut acc = 0.0;
    for ((&v, &lo), &hi) in x.iter().zip(&b.lower).zip(&b.upper) {
        let far = (v - lo).abs().max((hi - v).abs());
        acc += far * far;
    }
    acc
}

const ELIM_SLACK: f64 = 1e-9;

/// Early elimination. Drops cluster `k` from a sample's viable set when even
/// the most optimistic completion — this sample at its best point of box `k`,
/// every other sample at its own best box — already exceeds the incumbent.
///
/// With `rho` set (the literal per-sample threshold rule), additionally drops
/// `k` whenever `d_min(x_s, M_k) > rho`.
///
/// Returns whether any mask changed.
pub fn eliminate_assignments(
    viable: &mut ViableSets,
    region: &CentroidRegion,
    inst: &CollapsedInstance,
    incumbent: f64,
    rho: Option<f64>,
) -> Result<bool, NodeInfeasible> {
    if incumbent == f64::INFINITY && rho.is_none() {
        return Ok(false);
    }
    let n = inst.n();
    let k = inst.k;
    // Per-sample minimum box distance over the current mask.
    let mut dmin = vec![0.0; n * k];
    let mut best = vec![f64::INFINITY; n];
    for (s, wp) in inst.samples.iter().enumerate() {
        for c in viable.clusters(s) {
            let v = d_min(&wp.coords, &region.boxes[c]);
            dmin[s * k + c] = v;
            if v < best[s] {
                best[s] = v;
            }
        }
    }
    let residual: f64 = inst.constant
        + inst
            .samples
            .iter()
            .enumerate()
            .map(|(s, wp)| wp.weight as f64 * best[s])
            .sum::<f64>();

    let mut changed = false;
    for (s, wp) in inst.samples.iter().enumerate() {
        let w = wp.weight as f64;
        let others = residual - w * best[s];
        let clusters: Vec<usize> = viable.clusters(s).collect();
        for c in clusters {
            let d = dmin[s * k + c];
            let mut drop = incumbent.is_finite() && others + w * d > incumbent + ELIM_SLACK;
            if let Some(r) = rho {
                drop = drop || d > r + ELIM_SLACK;
            }
            if drop {
                viable.remove(s, c)?;
                changed = true;
            }
        }
    }
    Ok(changed)
}

/// Forced assignment. Fixes sample `s` to cluster `k+` when the worst point
/// of box `k+` is strictly closer than the best point of every other viable
/// box. Returns whether any mask changed.
///
/// Only samples without cannot-link edges are forced this way: a
/// cannot-linked sample may be assigned away from its nearest cluster in the
/// constrained optimum, so distance dominance alone cannot pin it. Such
/// samples are still determined through elimination and link propagation,
/// which reason against the incumbent instead.
pub fn force_assignments(
    viable: &mut ViableSets,
    region: &CentroidRegion,
    inst: &CollapsedInstance,
) -> bool {
    let mut cl_touched = vec![false; inst.n()];
    for &(a, b) in &inst.cl_edges {
        cl_touched[a] = true;
        cl_touched[b] = true;
    }
    let mut changed = false;
    for (s, wp) in inst.samples.iter().enumerate() {
        if viable.count(s) < 2 || cl_touched[s] {
            continue;
        }
        let clusters: Vec<usize> = viable.clusters(s).collect();
        let dmin: Vec<f64> = clusters
            .iter()
            .map(|&c| d_min(&wp.coords, &region.boxes[c]))
            .collect();
        for (ci, &c) in clusters.iter().enumerate() {
            let worst = d_max(&wp.coords, &region.boxes[c]);
            let rival = dmin
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != ci)
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min);
            if worst < rival {
                viable.force(s, c);
                changed = true;
                break;
            }
        }
    }
    changed
}

/// Cannot-link propagation to a fixed point: a forced endpoint removes its
/// cluster from the other endpoint's mask, and masks that shrink to a single
/// cluster become forced in turn.
pub fn propagate_links(
    viable: &mut ViableSets,
    cl_edges: &[(usize, usize)],
) -> Result<bool, NodeInfeasible> {
    let mut changed = false;
    loop {
        let mut round_changed = false;
        for &(a, b) in cl_edges {
            match (viable.forced(a), viable.forced(b)) {
                (Some(ka), Some(kb)) => {
                    if ka == kb {
                        return Err(NodeInfeasible);
                    }
                }
                (Some(ka), None) => {
                    if viable.admits(b, ka) {
                        viable.remove(b, ka)?;
                        round_changed = true;
                    }
                }
                (None, Some(kb)) => {
                    if viable.admits(a, kb) {
                        viable.remove(a, kb)?;
                        round_changed = true;
                    }
                }
                (None, None) => {}
            }
        }
        if !round_changed {
            break;
        }
        changed = true;
    }
    Ok(changed)
}
