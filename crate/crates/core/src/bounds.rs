//! Node bounds. Lower bounds come from per-sample box distances and from a
//! grouped Lagrangian decomposition whose coupling constraints are dualized
//! and improved by subgradient steps; upper bounds come from nearest-centroid
//! assignment treated as a cannot-link graph coloring, with a constrained
//! Lloyd polish on new incumbents.

use crate::geometry::{d_min, NodeInfeasible, ViableSets};
use crate::model::{squared_distance, CentroidRegion, CollapsedInstance, Solution};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("no joint assignment satisfies the group's masks and cannot-links")]
    GroupInfeasible,
    #[error("operation requires an instance without cannot-link edges")]
    PreconditionViolated,
}

/// Ordered partition of the pseudo-samples, fixed once at the root.
#[derive(Debug, Clone)]
pub struct Grouping {
    pub groups: Vec<Vec<usize>>,
}

/// Packs cannot-link-connected samples into common groups first (so their
/// edges tighten the subproblems), then fills with the remaining samples in
/// index order. Deterministic; the seed is reserved for future shuffling.
pub fn build_grouping(
    inst: &CollapsedInstance,
    cl_edges: &[(usize, usize)],
    group_size_max: usize,
    _seed: u64,
) -> Grouping {
    assert!(group_size_max >= 1);
    let n = inst.n();
    let comps = crate::preprocess::build_ml_components(n, cl_edges);
    let mut placed = vec![false; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let push = |s: usize, groups: &mut Vec<Vec<usize>>, current: &mut Vec<usize>| {
        if current.len() == group_size_max {
            groups.push(std::mem::take(current));
        }
        current.push(s);
    };
    for members in &comps.component_members {
        if members.len() < 2 {
            continue;
        }
        for &s in members {
            push(s, &mut groups, &mut current);
            placed[s] = true;
        }
    }
    for (s, done) in placed.iter().enumerate() {
        if !done {
            push(s, &mut groups, &mut current);
        }
    }
    if !current.is_empty() {
        groups.push(current);
    }
    Grouping { groups }
}

/// Exact solution of one group subproblem.
#[derive(Debug, Clone)]
pub struct GroupSolution {
    pub value: f64,
    /// Optimal group-local centroids, one per cluster (empty clusters take
    /// the corner minimizing the linear term).
    pub centroids: Vec<Vec<f64>>,
    /// Cluster per group member, parallel to the group slice.
    pub assignment: Vec<usize>,
}

/// Precomputed per-group state reused across subgradient iterations.
struct GroupContext {
    members: Vec<usize>,
    weights: Vec<f64>,
    /// Flattened member coordinates, one row per member.
    coords: Vec<f64>,
    /// Flattened w * |x|^2 per member.
    sq: Vec<f64>,
    masks: Vec<u64>,
    /// For member position i, positions j < i that are cannot-linked to i.
    earlier_cl: Vec<Vec<usize>>,
    /// w * d_min(x, box_c) per member position and cluster.
    dmin: Vec<f64>,
    /// Suffix sums of the per-member minimum of dmin over the mask.
    suffix: Vec<f64>,
}

impl GroupContext {
    fn new(
        inst: &CollapsedInstance,
        group: &[usize],
        region: &CentroidRegion,
        viable: &ViableSets,
        cl_adj: &[Vec<usize>],
    ) -> Self {
        let g = group.len();
        let k = inst.k;
        let dim = inst.dim();
        let mut weights = Vec::with_capacity(g);
        let mut coords = Vec::with_capacity(g * dim);
        let mut sq = Vec::with_capacity(g);
        let mut masks = Vec::with_capacity(g);
        for &s in group {
            let wp = &inst.samples[s];
            let w = wp.weight as f64;
            weights.push(w);
            coords.extend_from_slice(&wp.coords);
            sq.push(w * wp.coords.iter().map(|v| v * v).sum::<f64>());
            masks.push(viable.mask(s));
        }
        let mut earlier_cl = vec![Vec::new(); g];
        for (i, &s) in group.iter().enumerate() {
            for (j, &t) in group.iter().enumerate().take(i) {
                if cl_adj[s].contains(&t) {
                    earlier_cl[i].push(j);
                }
            }
        }
        let mut dmin = vec![f64::INFINITY; g * k];
        let mut suffix = vec![0.0; g + 1];
        for i in 0..g {
            let x = &coords[i * dim..(i + 1) * dim];
            let mut m = f64::INFINITY;
            for c in 0..k {
                if masks[i] & (1 << c) != 0 {
                    let v = weights[i] * d_min(x, &region.boxes[c]);
                    dmin[i * k + c] = v;
                    m = m.min(v);
                }
            }
            suffix[i] = m;
        }
        for i in (0..g).rev() {
            suffix[i] += suffix[i + 1];
        }
        Self {
            members: group.to_vec(),
            weights,
            coords,
            sq,
            masks,
            earlier_cl,
            dmin,
            suffix,
        }
    }
}

/// DFS state for the joint-assignment enumeration.
struct GroupSearch<'a> {
    ctx: &'a GroupContext,
    region: &'a CentroidRegion,
    linear: &'a [f64],
    k: usize,
    dim: usize,
    /// Lower bound on the linear term over the region, added to every prefix.
    linear_floor: f64,
    wsum: Vec<f64>,
    sums: Vec<f64>,
    assignment: Vec<usize>,
    best_value: f64,
    best_assignment: Vec<usize>,
}

impl<'a> GroupSearch<'a> {
    fn leaf_value(&self) -> f64 {
        let mut value: f64 = self.ctx.sq.iter().sum();
        for c in 0..self.k {
            let b = &self.region.boxes[c];
            let w = self.wsum[c];
            for j in 0..self.dim {
                let cv = self.linear[c * self.dim + j];
                let mu = if w > 0.0 {
                    let raw = (self.sums[c * self.dim + j] - 0.5 * cv) / w;
                    raw.clamp(b.lower[j], b.upper[j])
                } else if cv > 0.0 {
                    b.lower[j]
                } else if cv < 0.0 {
                    b.upper[j]
                } else {
                    b.lower[j]
                };
                value += w * mu * mu - 2.0 * self.sums[c * self.dim + j] * mu + cv * mu;
            }
        }
        value
    }

    fn centroids_for(&self, assignment: &[usize]) -> Vec<Vec<f64>> {
        let mut wsum = vec![0.0; self.k];
        let mut sums = vec![0.0; self.k * self.dim];
        for (i, &c) in assignment.iter().enumerate() {
            wsum[c] += self.ctx.weights[i];
            for j in 0..self.dim {
                sums[c * self.dim + j] += self.ctx.weights[i] * self.ctx.coords[i * self.dim + j];
            }
        }
        (0..self.k)
            .map(|c| {
                let b = &self.region.boxes[c];
                (0..self.dim)
                    .map(|j| {
                        let cv = self.linear[c * self.dim + j];
                        if wsum[c] > 0.0 {
                            ((sums[c * self.dim + j] - 0.5 * cv) / wsum[c])
                                .clamp(b.lower[j], b.upper[j])
                        } else if cv > 0.0 {
                            b.lower[j]
                        } else if cv < 0.0 {
                            b.upper[j]
                        } else {
                            b.lower[j]
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn dfs(&mut self, pos: usize, partial: f64) {
        if partial + self.ctx.suffix[pos] + self.linear_floor >= self.best_value {
            return;
        }
        let g = self.ctx.members.len();
        if pos == g {
            let value = self.leaf_value();
            if value < self.best_value {
                self.best_value = value;
                self.best_assignment = self.assignment[..g].to_vec();
            }
            return;
        }
        // Visit admissible clusters cheapest-first for earlier cutoffs.
        let mut order: Vec<usize> = (0..self.k)
            .filter(|&c| self.ctx.masks[pos] & (1 << c) != 0)
            .filter(|&c| {
                !self.ctx.earlier_cl[pos]
                    .iter()
                    .any(|&j| self.assignment[j] == c)
            })
            .collect();
        order.sort_by(|&a, &b| {
            self.ctx.dmin[pos * self.k + a]
                .total_cmp(&self.ctx.dmin[pos * self.k + b])
                .then(a.cmp(&b))
        });
        let w = self.ctx.weights[pos];
        for c in order {
            self.assignment[pos] = c;
            self.wsum[c] += w;
            for j in 0..self.dim {
                self.sums[c * self.dim + j] += w * self.ctx.coords[pos * self.dim + j];
            }
            self.dfs(pos + 1, partial + self.ctx.dmin[pos * self.k + c]);
            self.wsum[c] -= w;
            for j in 0..self.dim {
                self.sums[c * self.dim + j] -= w * self.ctx.coords[pos * self.dim + j];
            }
        }
        self.assignment[pos] = usize::MAX;
    }
}

fn solve_group_ctx(
    ctx: &GroupContext,
    inst: &CollapsedInstance,
    region: &CentroidRegion,
    linear: &[f64],
) -> Result<GroupSolution, BoundError> {
    let k = inst.k;
    let dim = inst.dim();
    let mut linear_floor = 0.0;
    for c in 0..k {
        let b = &region.boxes[c];
        for j in 0..dim {
            let cv = linear[c * dim + j];
            linear_floor += (cv * b.lower[j]).min(cv * b.upper[j]);
        }
    }
    let mut search = GroupSearch {
        ctx,
        region,
        linear,
        k,
        dim,
        linear_floor,
        wsum: vec![0.0; k],
        sums: vec![0.0; k * dim],
        assignment: vec![usize::MAX; ctx.members.len()],
        best_value: f64::INFINITY,
        best_assignment: Vec::new(),
    };
    search.dfs(0, 0.0);
    if search.best_assignment.is_empty() && !ctx.members.is_empty() {
        return Err(BoundError::GroupInfeasible);
    }
    let assignment = search.best_assignment.clone();
    let centroids = search.centroids_for(&assignment);
    Ok(GroupSolution {
        value: search.best_value,
        centroids,
        assignment,
    })
}

/// Exact minimum over the region of the group's assignment cost plus a
/// linear centroid term, by enumerating joint assignments that satisfy the
/// viable masks and intra-group cannot-links. For each assignment the
/// optimal centroid is the weighted mean shifted by the linear term and
/// clamped into the box.
pub fn solve_group_subproblem(
    inst: &CollapsedInstance,
    group: &[usize],
    region: &CentroidRegion,
    viable: &ViableSets,
    linear: &[Vec<f64>],
) -> Result<GroupSolution, BoundError> {
    let cl_adj = inst.cl_adjacency();
    let ctx = GroupContext::new(inst, group, region, viable, &cl_adj);
    let flat: Vec<f64> = linear.iter().flatten().copied().collect();
    solve_group_ctx(&ctx, inst, region, &flat)
}

/// Per-sample box-distance lower bound:
/// `constant + sum_s w_s * min_{k in mask(s)} d_min(x_s, M_k)`.
pub fn lower_bound_basic(
    inst: &CollapsedInstance,
    region: &CentroidRegion,
    viable: &ViableSets,
) -> f64 {
    let mut total = inst.constant;
    for (s, wp) in inst.samples.iter().enumerate() {
        let best = viable
            .clusters(s)
            .map(|c| d_min(&wp.coords, &region.boxes[c]))
            .fold(f64::INFINITY, f64::min);
        total += wp.weight as f64 * best;
    }
    total
}

/// Result of the Lagrangian pass: the best dual value seen and the averaged
/// group centroids of every iteration, reusable as upper-bound candidates.
#[derive(Debug, Clone)]
pub struct LagrangianOutcome {
    pub bound: f64,
    pub candidates: Vec<Vec<Vec<f64>>>,
    /// Final multipliers, for optional warm starts in child nodes.
    pub multipliers: Vec<Vec<f64>>,
}

/// Grouped Lagrangian decomposition bound. The coupling `mu_g = mu_{g+1}`
/// between consecutive groups is dualized with multipliers that enter the
/// subproblems as per-cluster linear terms; multipliers are improved by
/// subgradient ascent with diminishing steps `step0 / t`.
///
/// The value at zero multipliers is always evaluated first, so the returned
/// bound never falls below the plain decomposition value (and hence never
/// below the basic bound).
pub fn lower_bound_lagrangian(
    inst: &CollapsedInstance,
    region: &CentroidRegion,
    viable: &ViableSets,
    grouping: &Grouping,
    ld_iterations: usize,
    ld_step0: f64,
    warm_multipliers: Option<&[Vec<f64>]>,
) -> Result<LagrangianOutcome, NodeInfeasible> {
    let k = inst.k;
    let dim = inst.dim();
    let flat = k * dim;
    let groups = &grouping.groups;
    let num_groups = groups.len();
    let cl_adj = inst.cl_adjacency();
    let ctxs: Vec<GroupContext> = groups
        .iter()
        .map(|g| GroupContext::new(inst, g, region, viable, &cl_adj))
        .collect();

    // lambda[g] couples group g to group g+1; zero-initialized unless warmed.
    let mut lambda: Vec<Vec<f64>> = match warm_multipliers {
        Some(w) if w.len() + 1 == num_groups => w.to_vec(),
        _ => vec![vec![0.0; flat]; num_groups.saturating_sub(1)],
    };
    let start_from_zero = lambda.iter().all(|m| m.iter().all(|&v| v == 0.0));

    let mut best = f64::NEG_INFINITY;
    let mut candidates = Vec::new();
    let mut linear = vec![0.0; flat];
    let mut mu_star: Vec<Vec<f64>> = vec![vec![0.0; flat]; num_groups];

    let evaluate = |lambda: &[Vec<f64>],
                        mu_star: &mut Vec<Vec<f64>>,
                        linear: &mut Vec<f64>,
                        candidates: &mut Vec<Vec<Vec<f64>>>|
     -> Result<f64, NodeInfeasible> {
        let mut value = inst.constant;
        for g in 0..num_groups {
            linear.iter_mut().for_each(|v| *v = 0.0);
            if g > 0 {
                for (v, l) in linear.iter_mut().zip(&lambda[g - 1]) {
                    *v -= l;
                }
            }
            if g + 1 < num_groups {
                for (v, l) in linear.iter_mut().zip(&lambda[g]) {
                    *v += l;
                }
            }
            let sol = solve_group_ctx(&ctxs[g], inst, region, linear)
                .map_err(|_| NodeInfeasible)?;
            value += sol.value;
            for (c, row) in sol.centroids.iter().enumerate() {
                mu_star[g][c * dim..(c + 1) * dim].copy_from_slice(row);
            }
        }
        // Average the replicated centroids into one candidate, clamped in.
        let mut avg = vec![0.0; flat];
        for mu in mu_star.iter() {
            for (a, &v) in avg.iter_mut().zip(mu) {
                *a += v;
            }
        }
        let scale = 1.0 / num_groups as f64;
        let candidate: Vec<Vec<f64>> = (0..k)
            .map(|c| {
                let b = &region.boxes[c];
                (0..dim)
                    .map(|j| (avg[c * dim + j] * scale).clamp(b.lower[j], b.upper[j]))
                    .collect()
            })
            .collect();
        candidates.push(candidate);
        Ok(value)
    };

    // Zero-multiplier evaluation first; this is the plain decomposition and
    // anchors the bound at or above the basic bound.
    if !start_from_zero {
        let zero = vec![vec![0.0; flat]; num_groups - 1];
        best = evaluate(&zero, &mut mu_star, &mut linear, &mut candidates)?;
    }
    let value = evaluate(&lambda, &mut mu_star, &mut linear, &mut candidates)?;
    best = best.max(value);

    if num_groups <= 1 {
        return Ok(LagrangianOutcome {
            bound: best,
            candidates,
            multipliers: lambda,
        });
    }

    for t in 1..=ld_iterations {
        let step = ld_step0 / t as f64;
        for g in 0..num_groups - 1 {
            for j in 0..flat {
                lambda[g][j] += step * (mu_star[g][j] - mu_star[g + 1][j]);
            }
        }
        let value = evaluate(&lambda, &mut mu_star, &mut linear, &mut candidates)?;
        best = best.max(value);
    }

    Ok(LagrangianOutcome {
        bound: best,
        candidates,
        multipliers: lambda,
    })
}

/// Assignment order shared by the coloring bound, the Lloyd polish, and the
/// constrained heuristic: hardest vertices first.
pub fn coloring_order(inst: &CollapsedInstance) -> Vec<usize> {
    let adj = inst.cl_adjacency();
    let mut order: Vec<usize> = (0..inst.n()).collect();
    order.sort_by_key(|&s| {
        (
            std::cmp::Reverse(adj[s].len()),
            std::cmp::Reverse(inst.samples[s].weight),
            s,
        )
    });
    order
}

fn color_assign(
    inst: &CollapsedInstance,
    centroids: &[Vec<f64>],
    order: &[usize],
    adj: &[Vec<usize>],
) -> Option<Vec<usize>> {
    let mut assignment = vec![usize::MAX; inst.n()];
    for &s in order {
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
            return None;
        }
        assignment[s] = best_c;
    }
    Some(assignment)
}

fn assignment_cost(inst: &CollapsedInstance, centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    inst.constant
        + inst
            .samples
            .iter()
            .zip(assignment)
            .map(|(wp, &c)| wp.weight as f64 * squared_distance(&wp.coords, &centroids[c]))
            .sum::<f64>()
}

/// Nearest-centroid assignment as a proper coloring of the cannot-link
/// graph, over a pool of centroid candidates. Samples are colored in
/// descending cannot-link degree, then weight; a sample with every cluster
/// banned makes that candidate score infinity.
pub fn upper_bound_kcoloring(
    inst: &CollapsedInstance,
    candidates: &[Vec<Vec<f64>>],
) -> (f64, Option<Solution>) {
    let order = coloring_order(inst);
    let adj = inst.cl_adjacency();
    let mut best_cost = f64::INFINITY;
    let mut best: Option<Solution> = None;
    for centroids in candidates {
        let Some(assignment) = color_assign(inst, centroids, &order, &adj) else {
            continue;
        };
        let cost = assignment_cost(inst, centroids, &assignment);
        if cost < best_cost {
            best_cost = cost;
            best = Some(Solution {
                centroids: centroids.clone(),
                assignment,
                objective: cost,
                feasible: true,
            });
        }
    }
    (best_cost, best)
}

/// Closed-form upper bound for instances without cannot-links: every sample
/// goes to its nearest centroid (ties to the lowest index).
pub fn upper_bound_ml_closed_form(
    inst: &CollapsedInstance,
    centroids: &[Vec<f64>],
) -> Result<(f64, Solution), BoundError> {
    if !inst.cl_edges.is_empty() {
        return Err(BoundError::PreconditionViolated);
    }
    let assignment: Vec<usize> = inst
        .samples
        .iter()
        .map(|wp| {
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for (c, mu) in centroids.iter().enumerate() {
                let d = squared_distance(&wp.coords, mu);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            best_c
        })
        .collect();
    let cost = assignment_cost(inst, centroids, &assignment);
    Ok((
        cost,
        Solution {
            centroids: centroids.to_vec(),
            assignment,
            objective: cost,
            feasible: true,
        },
    ))
}

/// Alternates weighted-mean centroid updates with coloring reassignment,
/// keeping the best iterate. Stops when the cost stops strictly decreasing,
/// a reassignment blocks, or `max_iters` passes. The result never costs more
/// than the input and stays cannot-link feasible.
pub fn polish_lloyd_constrained(
    inst: &CollapsedInstance,
    sol: &Solution,
    max_iters: usize,
) -> Solution {
    let order = coloring_order(inst);
    let adj = inst.cl_adjacency();
    let dim = inst.dim();

    // Weighted means of the given clusters; empty clusters keep their
    // previous centroid.
    let refit = |assignment: &[usize], previous: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut wsum = vec![0.0; inst.k];
        let mut sums = vec![vec![0.0; dim]; inst.k];
        for (wp, &c) in inst.samples.iter().zip(assignment) {
            let w = wp.weight as f64;
            wsum[c] += w;
            for (j, &v) in wp.coords.iter().enumerate() {
                sums[c][j] += w * v;
            }
        }
        (0..inst.k)
            .map(|c| {
                if wsum[c] > 0.0 {
                    (0..dim).map(|j| sums[c][j] / wsum[c]).collect()
                } else {
                    previous[c].clone()
                }
            })
            .collect()
    };

    let mut best = sol.clone();
    let mut assignment = sol.assignment.clone();
    let mut centroids = sol.centroids.clone();
    for _ in 0..max_iters {
        centroids = refit(&assignment, &centroids);
        let Some(next) = color_assign(inst, &centroids, &order, &adj) else {
            break;
        };
        // Judge the reassignment with its own refitted means, so that a
        // swap paying off only after the centroid update is still taken.
        let refitted = refit(&next, &centroids);
        let cost = assignment_cost(inst, &refitted, &next);
        if cost < best.objective {
            best = Solution {
                centroids: refitted.clone(),
                assignment: next.clone(),
                objective: cost,
                feasible: true,
            };
            assignment = next;
            centroids = refitted;
        } else {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::root_region;
    use crate::model::CentroidBox;
    use crate::oracle::weighted;

    fn f2() -> CollapsedInstance {
        weighted(
            &[
                (&[0.0, 0.0], 1),
                (&[0.0, 1.0], 1),
                (&[10.0, 0.0], 1),
                (&[10.0, 1.0], 1),
            ],
            &[(0, 1)],
            0.0,
            2,
        )
    }

    #[test]
    fn grouping_index_order() {
        let inst = weighted(
            &[
                (&[0.0], 1),
                (&[1.0], 1),
                (&[2.0], 1),
                (&[3.0], 1),
                (&[4.0], 1),
                (&[5.0], 1),
            ],
            &[],
            0.0,
            2,
        );
        let g = build_grouping(&inst, &[], 3, 0);
        assert_eq!(g.groups, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn grouping_packs_cl_pairs_together() {
        let inst = weighted(
            &[
                (&[0.0], 1),
                (&[1.0], 1),
                (&[2.0], 1),
                (&[3.0], 1),
                (&[4.0], 1),
                (&[5.0], 1),
            ],
            &[(0, 5)],
            0.0,
            2,
        );
        let g = build_grouping(&inst, &[(0, 5)], 2, 0);
        assert_eq!(g.groups[0], vec![0, 5]);
        let all: Vec<usize> = {
            let mut v: Vec<usize> = g.groups.iter().flatten().copied().collect();
            v.sort_unstable();
            v
        };
        assert_eq!(all, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn grouping_singletons() {
        let inst = weighted(&[(&[0.0], 1), (&[1.0], 1), (&[2.0], 1)], &[], 0.0, 2);
        let g = build_grouping(&inst, &[], 1, 0);
        assert_eq!(g.groups.len(), 3);
    }

    #[test]
    fn basic_bound_root_is_constant() {
        let inst = weighted(&[(&[0.0, 0.0], 1), (&[2.0, 4.0], 2)], &[], 3.5, 2);
        let region = root_region(&inst);
        let viable = ViableSets::full(2, 2);
        assert_eq!(lower_bound_basic(&inst, &region, &viable), 3.5);
    }

    #[test]
    fn basic_bound_degenerate_region_is_exact() {
        let inst = weighted(&[(&[0.0, 0.0], 1), (&[10.0, 0.0], 1)], &[], 1.0, 2);
        let point = |x: f64, y: f64| CentroidBox {
            lower: vec![x, y],
            upper: vec![x, y],
        };
        let region = CentroidRegion {
            boxes: vec![point(1.0, 0.0), point(9.0, 0.0)],
        };
        let viable = ViableSets::full(2, 2);
        // constant + 1 + 1
        assert!((lower_bound_basic(&inst, &region, &viable) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn basic_bound_separated_boxes() {
        let inst = weighted(&[(&[0.0, 0.0], 1), (&[10.0, 0.0], 1)], &[], 0.0, 2);
        let region = CentroidRegion {
            boxes: vec![
                CentroidBox {
                    lower: vec![0.0, 0.0],
                    upper: vec![1.0, 1.0],
                },
                CentroidBox {
                    lower: vec![9.0, -1.0],
                    upper: vec![11.0, 1.0],
                },
            ],
        };
        let viable = ViableSets::full(2, 2);
        assert_eq!(lower_bound_basic(&inst, &region, &viable), 0.0);
    }

    #[test]
    fn singleton_group_reduces_to_dmin() {
        let inst = weighted(&[(&[5.0, 5.0], 3)], &[], 0.0, 2);
        let region = CentroidRegion {
            boxes: vec![
                CentroidBox {
                    lower: vec![0.0, 0.0],
                    upper: vec![1.0, 1.0],
                },
                CentroidBox {
                    lower: vec![0.0, 0.0],
                    upper: vec![4.0, 4.0],
                },
            ],
        };
        let viable = ViableSets::full(1, 2);
        let zero = vec![vec![0.0; 2]; 2];
        let sol = solve_group_subproblem(&inst, &[0], &region, &viable, &zero).unwrap();
        // Nearest box point of cluster 1 is (4, 4): value 3 * 2 = 6.
        assert!((sol.value - 6.0).abs() < 1e-12);
        assert_eq!(sol.assignment, vec![1]);
        assert_eq!(sol.centroids[1], vec![4.0, 4.0]);
    }

    #[test]
    fn cl_pair_in_group_forces_split() {
        let inst = weighted(&[(&[0.0], 1), (&[0.0], 1)], &[(0, 1)], 0.0, 2);
        let region = CentroidRegion {
            boxes: vec![
                CentroidBox {
                    lower: vec![1.0],
                    upper: vec![2.0],
                },
                CentroidBox {
                    lower: vec![3.0],
                    upper: vec![4.0],
                },
            ],
        };
        let viable = ViableSets::full(2, 2);
        let zero = vec![vec![0.0; 1]; 2];
        let sol = solve_group_subproblem(&inst, &[0, 1], &region, &viable, &zero).unwrap();
        // One sample must take the far box: 1 + 9.
        assert!((sol.value - 10.0).abs() < 1e-12);
        assert_ne!(sol.assignment[0], sol.assignment[1]);
    }

    #[test]
    fn empty_cluster_takes_linear_corner() {
        let inst = weighted(&[(&[0.5, 0.5], 1)], &[], 0.0, 2);
        let region = CentroidRegion {
            boxes: vec![
                CentroidBox {
                    lower: vec![0.0, 0.0],
                    upper: vec![1.0, 1.0],
                },
                CentroidBox {
                    lower: vec![0.0, 0.0],
                    upper: vec![1.0, 1.0],
                },
            ],
        };
        let viable = {
            let mut v = ViableSets::full(1, 2);
            v.force(0, 0);
            v
        };
        let linear = vec![vec![0.0, 0.0], vec![1.0, -1.0]];
        let sol = solve_group_subproblem(&inst, &[0], &region, &viable, &linear).unwrap();
        assert_eq!(sol.centroids[1], vec![0.0, 1.0]);
    }

    #[test]
    fn group_infeasible_when_masks_conflict() {
        let inst = weighted(&[(&[0.0], 1), (&[1.0], 1)], &[(0, 1)], 0.0, 2);
        let region = root_region(&inst);
        let mut viable = ViableSets::full(2, 2);
        viable.force(0, 0);
        viable.force(1, 0);
        let zero = vec![vec![0.0; 1]; 2];
        let err = solve_group_subproblem(&inst, &[0, 1], &region, &viable, &zero).unwrap_err();
        assert_eq!(err, BoundError::GroupInfeasible);
    }

    #[test]
    fn ld_single_group_equals_subproblem() {
        let inst = f2();
        let region = root_region(&inst);
        let viable = ViableSets::full(4, 2);
        let grouping = build_grouping(&inst, &inst.cl_edges, 4, 0);
        assert_eq!(grouping.groups.len(), 1);
        let out =
            lower_bound_lagrangian(&inst, &region, &viable, &grouping, 5, 1.0, None).unwrap();
        let zero = vec![vec![0.0; 2]; 2];
        let sub =
            solve_group_subproblem(&inst, &grouping.groups[0], &region, &viable, &zero).unwrap();
        assert!((out.bound - sub.value).abs() < 1e-12);
    }

    #[test]
    fn ld_zero_iterations_is_plain_decomposition() {
        let mut inst = f2();
        inst.constant = 3.25;
        let region = root_region(&inst);
        let viable = ViableSets::full(4, 2);
        let grouping = build_grouping(&inst, &inst.cl_edges, 2, 0);
        let out =
            lower_bound_lagrangian(&inst, &region, &viable, &grouping, 0, 1.0, None).unwrap();
        let zero = vec![vec![0.0; 2]; 2];
        let manual: f64 = grouping
            .groups
            .iter()
            .map(|g| {
                solve_group_subproblem(&inst, g, &region, &viable, &zero)
                    .unwrap()
                    .value
            })
            .sum();
        assert!((out.bound - (manual + inst.constant)).abs() < 1e-12);
    }

    #[test]
    fn kcoloring_no_cl_matches_closed_form() {
        let inst = weighted(
            &[(&[0.0, 0.0], 1), (&[1.0, 0.0], 2), (&[10.0, 0.0], 1)],
            &[],
            0.5,
            2,
        );
        let centroids = vec![vec![0.5, 0.0], vec![10.0, 0.0]];
        let (cost_color, sol_color) = upper_bound_kcoloring(&inst, std::slice::from_ref(&centroids));
        let (cost_ml, sol_ml) = upper_bound_ml_closed_form(&inst, &centroids).unwrap();
        assert_eq!(cost_color, cost_ml);
        assert_eq!(sol_color.unwrap().assignment, sol_ml.assignment);
    }

    #[test]
    fn kcoloring_triangle_k2_is_infinite() {
        let inst = weighted(
            &[(&[0.0], 1), (&[1.0], 1), (&[2.0], 1)],
            &[(0, 1), (1, 2), (0, 2)],
            0.0,
            2,
        );
        let (cost, sol) = upper_bound_kcoloring(&inst, &[vec![vec![0.0], vec![2.0]]]);
        assert_eq!(cost, f64::INFINITY);
        assert!(sol.is_none());
    }

    #[test]
    fn kcoloring_f2_reaches_oracle_value() {
        let inst = f2();
        let candidate = vec![vec![20.0 / 3.0, 2.0 / 3.0], vec![0.0, 0.0]];
        let (cost, sol) = upper_bound_kcoloring(&inst, &[candidate]);
        assert!((cost - 606.0 / 9.0).abs() < 1e-9);
        let sol = sol.unwrap();
        assert!(inst.cl_feasible(&sol.assignment));
    }

    #[test]
    fn ml_closed_form_tie_breaks_low_index() {
        let inst = weighted(&[(&[1.0], 1)], &[], 0.0, 2);
        let centroids = vec![vec![0.0], vec![2.0]];
        let (_, sol) = upper_bound_ml_closed_form(&inst, &centroids).unwrap();
        assert_eq!(sol.assignment, vec![0]);
    }

    #[test]
    fn ml_closed_form_rejects_cl_instances() {
        let inst = f2();
        let err = upper_bound_ml_closed_form(&inst, &[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap_err();
        assert_eq!(err, BoundError::PreconditionViolated);
    }

    #[test]
    fn polish_is_noop_on_stable_solution() {
        let inst = weighted(&[(&[0.0, 0.0], 1), (&[10.0, 0.0], 1)], &[], 0.0, 2);
        let sol = Solution {
            centroids: vec![vec![0.0, 0.0], vec![10.0, 0.0]],
            assignment: vec![0, 1],
            objective: 0.0,
            feasible: true,
        };
        let out = polish_lloyd_constrained(&inst, &sol, 10);
        assert_eq!(out, sol);
    }

    #[test]
    fn polish_zero_iters_returns_input() {
        let inst = f2();
        let sol = Solution {
            centroids: vec![vec![0.0, 0.0], vec![10.0, 0.5]],
            assignment: vec![0, 1, 1, 1],
            objective: assignment_cost(&inst, &[vec![0.0, 0.0], vec![10.0, 0.5]], &[0, 1, 1, 1]),
            feasible: true,
        };
        assert_eq!(polish_lloyd_constrained(&inst, &sol, 0), sol);
    }

    #[test]
    fn polish_improves_bad_f2_labeling() {
        // Diagonal split: both cluster means collapse to the global center,
        // which is not Lloyd-stable and polishes down to the optimum.
        let inst = f2();
        let centroids = vec![vec![5.0, 0.5], vec![5.0, 0.5]];
        let assignment = vec![0, 1, 1, 0];
        let sol = Solution {
            objective: assignment_cost(&inst, &centroids, &assignment),
            centroids,
            assignment,
            feasible: true,
        };
        let out = polish_lloyd_constrained(&inst, &sol, 50);
        assert!(out.objective <= sol.objective + 1e-12);
        assert!((out.objective - 606.0 / 9.0).abs() < 1e-9);
        assert!(inst.cl_feasible(&out.assignment));
    }
}
