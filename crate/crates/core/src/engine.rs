//! Best-bound branch-and-bound over centroid boxes: pop the open node with
//! the smallest lower bound, re-run geometric determination against the
//! current incumbent, rebound (basic, then Lagrangian), harvest upper-bound
//! candidates, bisect the longest box edge, and prune against the incumbent
//! until the relative gap closes or a limit fires.

use crate::bounds::{
    build_grouping, lower_bound_basic, lower_bound_lagrangian, polish_lloyd_constrained,
    upper_bound_kcoloring, Grouping,
};
use crate::geometry::{
    eliminate_assignments, force_assignments, propagate_links, root_region, ViableSets,
};
use crate::heuristics::multi_restart;
use crate::model::{
    squared_distance, CentroidRegion, CollapsedInstance, Solution, SolverConfig, ValidationError,
};
use crate::preprocess::{check_root_feasibility, RootFeasibility};
use std::collections::BinaryHeap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

const DEGENERATE_EDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Gap closed to (numerical) zero or the search tree was exhausted.
    Optimal,
    /// The requested relative gap tolerance was met with open nodes left.
    GapLimit,
    TimeLimit,
    NodeLimit,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapLimit => "gap_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

/// Snapshot handed to the progress callback.
#[derive(Debug, Clone, Copy)]
pub struct Progress {
    pub time_s: f64,
    pub lb: f64,
    pub ub: f64,
    pub rel_gap: f64,
    pub nodes: u64,
}

pub type ProgressFn<'a> = dyn Fn(&Progress) + Sync + 'a;

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub nodes_processed: u64,
    pub wall_time_s: f64,
    pub time_per_node_s: f64,
    pub core_hours: f64,
    pub lb_history: Vec<(f64, f64)>,
    pub ub_history: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Best solution on original sample indices (expanded from
    /// pseudo-samples); `None` when the instance is infeasible.
    pub best: Option<Solution>,
    /// The same solution on pseudo-sample indices.
    pub best_collapsed: Option<Solution>,
    pub lb: f64,
    pub ub: f64,
    pub rel_gap: f64,
    pub status: SolveStatus,
    pub stats: SolveStats,
}

/// Relative optimality gap `(ub - lb) / min(ub, lb)`. Infinite upper bound
/// gives an infinite gap; equal bounds give zero; a nonpositive or infinite
/// denominator falls back to the absolute gap.
pub fn relative_gap(ub: f64, lb: f64) -> f64 {
    if ub == f64::INFINITY {
        return f64::INFINITY;
    }
    if ub == lb {
        return 0.0;
    }
    if !lb.is_finite() {
        return f64::INFINITY;
    }
    let denom = ub.min(lb);
    if denom <= 0.0 {
        (ub - lb).abs()
    } else {
        (ub - lb) / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegenerateRegion;

/// Bisects the region at the midpoint of its longest edge over all
/// (cluster, coordinate) pairs; ties take the lowest cluster, then the
/// lowest coordinate. The children cover the parent with disjoint interiors.
pub fn branch_region(
    region: &CentroidRegion,
) -> Result<(CentroidRegion, CentroidRegion), DegenerateRegion> {
    let mut best = DEGENERATE_EDGE;
    let mut pick: Option<(usize, usize)> = None;
    for (c, b) in region.boxes.iter().enumerate() {
        for i in 0..b.lower.len() {
            let w = b.upper[i] - b.lower[i];
            if w > best {
                best = w;
                pick = Some((c, i));
            }
        }
    }
    let Some((c, i)) = pick else {
        return Err(DegenerateRegion);
    };
    let mid = 0.5 * (region.boxes[c].lower[i] + region.boxes[c].upper[i]);
    let mut left = region.clone();
    let mut right = region.clone();
    left.boxes[c].upper[i] = mid;
    right.boxes[c].lower[i] = mid;
    Ok((left, right))
}

/// Splits the root into up to `2^(k-1)` ordered regions by bisecting each
/// cluster's box on coordinate 0 and raising lower bounds so that cluster
/// centroids can be assumed sorted by their first coordinate. Labels are
/// interchangeable (pairwise constraints never name a cluster), so at least
/// one optimal labeling survives the cut.
pub fn apply_symmetry_breaking(root: &CentroidRegion) -> Vec<CentroidRegion> {
    let k = root.k();
    if k == 1 {
        return vec![root.clone()];
    }
    if root.boxes[0].width(0) <= DEGENERATE_EDGE {
        return vec![root.clone()];
    }
    let mut regions = vec![root.clone()];
    for cluster in 0..k - 1 {
        let mut next = Vec::with_capacity(regions.len() * 2);
        for region in &regions {
            let b = &region.boxes[cluster];
            if b.width(0) <= DEGENERATE_EDGE {
                next.push(region.clone());
                continue;
            }
            let mid = 0.5 * (b.lower[0] + b.upper[0]);
            let mut low = region.clone();
            low.boxes[cluster].upper[0] = mid;
            let mut high = region.clone();
            high.boxes[cluster].lower[0] = mid;
            for child in [low, high] {
                if let Some(cut) = ordering_cut(child) {
                    next.push(cut);
                }
            }
        }
        regions = next;
    }
    regions
}

/// Raises each box's lower bound on coordinate 0 to at least its
/// predecessor's; returns `None` when that empties a box.
fn ordering_cut(mut region: CentroidRegion) -> Option<CentroidRegion> {
    for j in 1..region.boxes.len() {
        let floor = region.boxes[j - 1].lower[0];
        if floor > region.boxes[j].lower[0] {
            region.boxes[j].lower[0] = floor;
        }
        if region.boxes[j].lower[0] > region.boxes[j].upper[0] {
            return None;
        }
    }
    Some(region)
}

struct SolveNode {
    region: CentroidRegion,
    viable: Arc<ViableSets>,
    lb: f64,
    depth: u32,
    id: u64,
    warm: Option<Arc<Vec<Vec<f64>>>>,
}

impl PartialEq for SolveNode {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for SolveNode {}
impl PartialOrd for SolveNode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SolveNode {
    // BinaryHeap is a max-heap; invert so the smallest (lb, id) pops first.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .lb
            .total_cmp(&self.lb)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Shared {
    queue: BinaryHeap<SolveNode>,
    in_flight: Vec<(u64, f64)>,
    /// Min over exactly-evaluated closed nodes; caps the provable global lb.
    closed_floor: f64,
    ub: f64,
    best: Option<Solution>,
    next_id: u64,
    nodes_processed: u64,
    stop: Option<SolveStatus>,
    lb_history: Vec<(f64, f64)>,
    ub_history: Vec<(f64, f64)>,
    last_emit: f64,
    last_lb: f64,
}

impl Shared {
    fn global_lb(&self) -> f64 {
        let mut lb = self.closed_floor;
        if let Some(top) = self.queue.peek() {
            lb = lb.min(top.lb);
        }
        for &(_, l) in &self.in_flight {
            lb = lb.min(l);
        }
        if self.queue.is_empty() && self.in_flight.is_empty() {
            lb = lb.min(self.ub);
        }
        lb
    }
}

enum NodeOutcome {
    Pruned,
    Closed {
        value: f64,
        solution: Option<Solution>,
    },
    Branched {
        children: Vec<SolveNode>,
        incumbent: Option<Solution>,
    },
    PrunedByBound {
        incumbent: Option<Solution>,
    },
}

struct Ctx<'a> {
    inst: &'a CollapsedInstance,
    config: &'a SolverConfig,
    grouping: Grouping,
    started: Instant,
}

pub fn solve(
    inst: &CollapsedInstance,
    config: &SolverConfig,
    progress: Option<&ProgressFn>,
) -> Result<SolveResult, ValidationError> {
    config.validate()?;
    if config.k != inst.k {
        return Err(ValidationError::InvalidConfig(
            "config.k does not match the instance".into(),
        ));
    }
    let started = Instant::now();

    if let RootFeasibility::Infeasible { .. } = check_root_feasibility(inst) {
        return Ok(infeasible_result(started, config));
    }

    let incumbent = multi_restart(inst, config.k, config.heuristic_restarts, config.seed)
        .map(|sol| polish_lloyd_constrained(inst, &sol, 100));
    let ub0 = incumbent.as_ref().map_or(f64::INFINITY, |s| s.objective);

    let root = root_region(inst);
    let regions = if config.symmetry_breaking {
        apply_symmetry_breaking(&root)
    } else {
        vec![root]
    };
    let viable = Arc::new(ViableSets::full(inst.n(), inst.k));
    let grouping = build_grouping(inst, &inst.cl_edges, config.group_size_max, config.seed);

    let mut queue = BinaryHeap::new();
    let mut next_id = 0u64;
    for region in regions {
        queue.push(SolveNode {
            region,
            viable: Arc::clone(&viable),
            lb: inst.constant,
            depth: 0,
            id: next_id,
            warm: None,
        });
        next_id += 1;
    }

    let shared = Mutex::new(Shared {
        queue,
        in_flight: Vec::new(),
        closed_floor: f64::INFINITY,
        ub: ub0,
        best: incumbent,
        next_id,
        nodes_processed: 0,
        stop: None,
        lb_history: Vec::new(),
        ub_history: if ub0.is_finite() {
            vec![(0.0, ub0)]
        } else {
            Vec::new()
        },
        last_emit: 0.0,
        last_lb: f64::NEG_INFINITY,
    });
    let cv = Condvar::new();
    let ctx = Ctx {
        inst,
        config,
        grouping,
        started,
    };

    if config.threads == 1 {
        worker(&ctx, &shared, &cv, progress);
    } else {
        std::thread::scope(|scope| {
            for _ in 0..config.threads {
                scope.spawn(|| worker(&ctx, &shared, &cv, progress));
            }
        });
    }

    let state = shared.into_inner().unwrap();
    finalize(state, inst, config, started, progress)
}

fn infeasible_result(started: Instant, config: &SolverConfig) -> SolveResult {
    let wall = started.elapsed().as_secs_f64();
    SolveResult {
        best: None,
        best_collapsed: None,
        lb: f64::INFINITY,
        ub: f64::INFINITY,
        rel_gap: f64::INFINITY,
        status: SolveStatus::Infeasible,
        stats: SolveStats {
            nodes_processed: 0,
            wall_time_s: wall,
            time_per_node_s: 0.0,
            core_hours: wall * config.threads as f64 / 3600.0,
            lb_history: Vec::new(),
            ub_history: Vec::new(),
        },
    }
}

fn finalize(
    state: Shared,
    inst: &CollapsedInstance,
    config: &SolverConfig,
    started: Instant,
    progress: Option<&ProgressFn>,
) -> Result<SolveResult, ValidationError> {
    let wall = started.elapsed().as_secs_f64();
    let ub = state.ub;
    let lb = state.global_lb().min(ub);
    let gap = relative_gap(ub, lb);
    let status = state.stop.unwrap_or({
        if ub.is_finite() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        }
    });
    if let Some(cb) = progress {
        cb(&Progress {
            time_s: wall,
            lb,
            ub,
            rel_gap: gap,
            nodes: state.nodes_processed,
        });
    }
    let nodes = state.nodes_processed;
    let stats = SolveStats {
        nodes_processed: nodes,
        wall_time_s: wall,
        time_per_node_s: if nodes > 0 { wall / nodes as f64 } else { 0.0 },
        core_hours: wall * config.threads as f64 / 3600.0,
        lb_history: state.lb_history,
        ub_history: state.ub_history,
    };
    let best_collapsed = state.best;
    let best = best_collapsed.as_ref().map(|sol| Solution {
        centroids: sol.centroids.clone(),
        assignment: inst.expand_assignment(&sol.assignment),
        objective: sol.objective,
        feasible: sol.feasible,
    });
    Ok(SolveResult {
        best,
        best_collapsed,
        lb,
        ub,
        rel_gap: gap,
        status,
        stats,
    })
}

fn worker(ctx: &Ctx, shared: &Mutex<Shared>, cv: &Condvar, progress: Option<&ProgressFn>) {
    loop {
        let node = {
            let mut state = shared.lock().unwrap();
            loop {
                if state.stop.is_some() {
                    return;
                }
                if ctx.started.elapsed().as_secs_f64() > ctx.config.time_limit_s {
                    state.stop = Some(SolveStatus::TimeLimit);
                    cv.notify_all();
                    return;
                }
                match state.queue.pop() {
                    Some(node) => {
                        if node.lb >= state.ub {
                            continue; // pruned while queued
                        }
                        state.in_flight.push((node.id, node.lb));
                        break node;
                    }
                    None => {
                        if state.in_flight.is_empty() {
                            cv.notify_all();
                            return;
                        }
                        state = cv.wait(state).unwrap();
                    }
                }
            }
        };

        let (ub_snapshot, best_snapshot) = {
            let state = shared.lock().unwrap();
            (state.ub, state.best.clone())
        };
        let outcome = process_node(ctx, &node, ub_snapshot, &best_snapshot);

        let mut state = shared.lock().unwrap();
        state.in_flight.retain(|&(id, _)| id != node.id);
        state.nodes_processed += 1;
        match outcome {
            NodeOutcome::Pruned => {}
            NodeOutcome::Closed { value, solution } => {
                if let Some(sol) = solution {
                    try_update_incumbent(&mut state, sol, ctx.started);
                }
                if value < state.closed_floor {
                    state.closed_floor = value;
                }
            }
            NodeOutcome::PrunedByBound { incumbent } => {
                if let Some(sol) = incumbent {
                    try_update_incumbent(&mut state, sol, ctx.started);
                }
            }
            NodeOutcome::Branched {
                mut children,
                incumbent,
            } => {
                if let Some(sol) = incumbent {
                    try_update_incumbent(&mut state, sol, ctx.started);
                }
                for child in children.drain(..) {
                    if child.lb < state.ub {
                        let mut child = child;
                        child.id = state.next_id;
                        state.next_id += 1;
                        state.queue.push(child);
                    }
                }
            }
        }

        let elapsed = ctx.started.elapsed().as_secs_f64();
        let lb = state.global_lb();
        if lb > state.last_lb {
            state.last_lb = lb;
            state.lb_history.push((elapsed, lb));
        }
        let gap = relative_gap(state.ub, lb);
        if state.stop.is_none() {
            if gap <= 1e-12 {
                state.stop = Some(SolveStatus::Optimal);
            } else if gap <= ctx.config.rel_gap_tol {
                state.stop = Some(SolveStatus::GapLimit);
            } else if state.nodes_processed >= ctx.config.max_nodes {
                state.stop = Some(SolveStatus::NodeLimit);
            } else if elapsed > ctx.config.time_limit_s {
                state.stop = Some(SolveStatus::TimeLimit);
            }
        }
        if let Some(cb) = progress {
            if elapsed - state.last_emit >= 0.5 {
                state.last_emit = elapsed;
                cb(&Progress {
                    time_s: elapsed,
                    lb,
                    ub: state.ub,
                    rel_gap: gap,
                    nodes: state.nodes_processed,
                });
            }
        }
        cv.notify_all();
    }
}

fn try_update_incumbent(state: &mut Shared, sol: Solution, started: Instant) {
    if sol.objective < state.ub {
        state.ub = sol.objective;
        state
            .ub_history
            .push((started.elapsed().as_secs_f64(), sol.objective));
        state.best = Some(sol);
    }
}

fn process_node(ctx: &Ctx, node: &SolveNode, ub: f64, best: &Option<Solution>) -> NodeOutcome {
    let inst = ctx.inst;
    let config = ctx.config;

    // Geometric determination against the incumbent, to a fixed point.
    let mut viable = (*node.viable).clone();
    let rho = if config.paper_rho_rule {
        best.as_ref().map(|sol| {
            inst.samples
                .iter()
                .zip(&sol.assignment)
                .map(|(wp, &c)| squared_distance(&wp.coords, &sol.centroids[c]))
                .fold(0.0, f64::max)
        })
    } else {
        None
    };
    loop {
        let elim = match eliminate_assignments(&mut viable, &node.region, inst, ub, rho) {
            Ok(changed) => changed,
            Err(_) => return NodeOutcome::Pruned,
        };
        let forced = force_assignments(&mut viable, &node.region, inst);
        let propagated = match propagate_links(&mut viable, &inst.cl_edges) {
            Ok(changed) => changed,
            Err(_) => return NodeOutcome::Pruned,
        };
        if !(elim || forced || propagated) {
            break;
        }
    }

    // Endgame: once determination leaves only a small joint-assignment
    // space, the node optimum is computed exactly (each assignment is a
    // convex problem solved by clamped weighted means) and the node is
    // finalized instead of branched.
    if endgame_budget(&viable) <= ENDGAME_BUDGET {
        return match exact_endgame(inst, &node.region, &viable) {
            Some((value, solution)) => NodeOutcome::Closed {
                value,
                solution: Some(solution),
            },
            None => NodeOutcome::Pruned,
        };
    }

    // Point regions are evaluated exactly as well.
    if node.region.max_edge() <= DEGENERATE_EDGE {
        let (value, solution) = evaluate_point_region(inst, &node.region, &viable);
        return NodeOutcome::Closed { value, solution };
    }

    let mut lb = node.lb.max(lower_bound_basic(inst, &node.region, &viable));
    if lb >= ub {
        return NodeOutcome::Pruned;
    }

    let warm = node.warm.as_ref().map(|w| w.as_slice());
    let ld = match lower_bound_lagrangian(
        inst,
        &node.region,
        &viable,
        &ctx.grouping,
        config.ld_iterations,
        config.ld_step0,
        warm,
    ) {
        Ok(out) => out,
        Err(_) => return NodeOutcome::Pruned,
    };
    lb = lb.max(ld.bound);

    // Upper-bound pass over the candidate pool: Lagrangian centroid
    // averages, the box midpoints, and the incumbent clamped into the region.
    let mut pool = ld.candidates;
    pool.push(node.region.midpoints());
    if let Some(sol) = best {
        pool.push(node.region.clamp_centroids(&sol.centroids));
    }
    let (cost, candidate) = upper_bound_kcoloring(inst, &pool);
    let incumbent = if cost < ub {
        candidate.map(|sol| polish_lloyd_constrained(inst, &sol, 30))
    } else {
        None
    };
    let ub_now = incumbent.as_ref().map_or(ub, |s| s.objective.min(ub));

    if lb >= ub_now {
        return NodeOutcome::PrunedByBound { incumbent };
    }

    let (left, right) = match branch_region(&node.region) {
        Ok(pair) => pair,
        Err(DegenerateRegion) => {
            let (value, solution) = evaluate_point_region(inst, &node.region, &viable);
            return NodeOutcome::Closed { value, solution };
        }
    };
    let viable = Arc::new(viable);
    let warm = if config.inherit_multipliers {
        Some(Arc::new(ld.multipliers))
    } else {
        None
    };
    let children = vec![
        SolveNode {
            region: left,
            viable: Arc::clone(&viable),
            lb,
            depth: node.depth + 1,
            id: 0,
            warm: warm.clone(),
        },
        SolveNode {
            region: right,
            viable,
            lb,
            depth: node.depth + 1,
            id: 0,
            warm,
        },
    ];
    NodeOutcome::Branched {
        children,
        incumbent,
    }
}

const ENDGAME_BUDGET: f64 = 16384.0;

/// Size of the remaining joint-assignment space: the product of viable-set
/// sizes over undetermined samples.
fn endgame_budget(viable: &ViableSets) -> f64 {
    let mut budget = 1.0;
    for s in 0..viable.n() {
        budget *= viable.count(s) as f64;
        if budget > ENDGAME_BUDGET {
            return budget;
        }
    }
    budget
}

/// Exact node optimum by enumerating the joint assignments of undetermined
/// samples (masks and cannot-links respected); each complete assignment is
/// solved in closed form with centroids at clamped weighted means. Returns
/// `None` when no admissible assignment exists.
fn exact_endgame(
    inst: &CollapsedInstance,
    region: &CentroidRegion,
    viable: &ViableSets,
) -> Option<(f64, Solution)> {
    let k = inst.k;
    let dim = inst.dim();
    let mut assignment = vec![usize::MAX; inst.n()];
    let mut wsum = vec![0.0; k];
    let mut sums = vec![0.0; k * dim];
    let mut total_sq = 0.0;
    let mut free: Vec<usize> = Vec::new();
    for (s, wp) in inst.samples.iter().enumerate() {
        let w = wp.weight as f64;
        total_sq += w * wp.coords.iter().map(|v| v * v).sum::<f64>();
        if let Some(c) = viable.forced(s) {
            assignment[s] = c;
            wsum[c] += w;
            for (j, &v) in wp.coords.iter().enumerate() {
                sums[c * dim + j] += w * v;
            }
        } else {
            free.push(s);
        }
    }
    // Cannot-link positions among the free samples; edges into determined
    // samples are already reflected in the masks by propagation.
    let adj = inst.cl_adjacency();
    let earlier: Vec<Vec<usize>> = free
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            free[..i]
                .iter()
                .enumerate()
                .filter(|&(_, &t)| adj[s].contains(&t))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();

    struct Search<'a> {
        inst: &'a CollapsedInstance,
        region: &'a CentroidRegion,
        viable: &'a ViableSets,
        free: &'a [usize],
        earlier: &'a [Vec<usize>],
        choice: Vec<usize>,
        wsum: Vec<f64>,
        sums: Vec<f64>,
        base: f64,
        dim: usize,
        best: f64,
        best_choice: Option<Vec<usize>>,
    }
    impl Search<'_> {
        fn leaf(&mut self) {
            let k = self.inst.k;
            let mut value = self.base;
            for c in 0..k {
                let b = &self.region.boxes[c];
                let w = self.wsum[c];
                for j in 0..self.dim {
                    let s = self.sums[c * self.dim + j];
                    let mu = if w > 0.0 {
                        (s / w).clamp(b.lower[j], b.upper[j])
                    } else {
                        b.lower[j]
                    };
                    value += w * mu * mu - 2.0 * s * mu;
                }
            }
            if value < self.best {
                self.best = value;
                self.best_choice = Some(self.choice.clone());
            }
        }

        fn dfs(&mut self, pos: usize) {
            if pos == self.free.len() {
                self.leaf();
                return;
            }
            let s = self.free[pos];
            let wp = &self.inst.samples[s];
            let w = wp.weight as f64;
            for c in self.viable.clusters(s) {
                if self.earlier[pos].iter().any(|&j| self.choice[j] == c) {
                    continue;
                }
                self.choice[pos] = c;
                self.wsum[c] += w;
                for (j, &v) in wp.coords.iter().enumerate() {
                    self.sums[c * self.dim + j] += w * v;
                }
                self.dfs(pos + 1);
                self.wsum[c] -= w;
                for (j, &v) in wp.coords.iter().enumerate() {
                    self.sums[c * self.dim + j] -= w * v;
                }
            }
            self.choice[pos] = usize::MAX;
        }
    }

    let mut search = Search {
        inst,
        region,
        viable,
        free: &free,
        earlier: &earlier,
        choice: vec![usize::MAX; free.len()],
        wsum,
        sums,
        base: inst.constant + total_sq,
        dim,
        best: f64::INFINITY,
        best_choice: None,
    };
    search.dfs(0);
    let choice = search.best_choice?;
    for (pos, &s) in free.iter().enumerate() {
        assignment[s] = choice[pos];
    }

    let mut wsum = vec![0.0; k];
    let mut sums = vec![0.0; k * dim];
    for (wp, &c) in inst.samples.iter().zip(&assignment) {
        let w = wp.weight as f64;
        wsum[c] += w;
        for (j, &v) in wp.coords.iter().enumerate() {
            sums[c * dim + j] += w * v;
        }
    }
    let centroids: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let b = &region.boxes[c];
            (0..dim)
                .map(|j| {
                    if wsum[c] > 0.0 {
                        (sums[c * dim + j] / wsum[c]).clamp(b.lower[j], b.upper[j])
                    } else {
                        b.lower[j]
                    }
                })
                .collect()
        })
        .collect();
    let value = inst.constant
        + inst
            .samples
            .iter()
            .zip(&assignment)
            .map(|(wp, &c)| wp.weight as f64 * squared_distance(&wp.coords, &centroids[c]))
            .sum::<f64>();
    debug_assert!(inst.cl_feasible(&assignment));
    Some((
        value,
        Solution {
            centroids,
            assignment,
            objective: value,
            feasible: true,
        },
    ))
}

/// Exact evaluation of a point region: the lower bound is the assignment
/// optimum at the fixed centroids (exact when cannot-links are absent or
/// few), the upper bound candidate comes from the coloring assignment.
fn evaluate_point_region(
    inst: &CollapsedInstance,
    region: &CentroidRegion,
    viable: &ViableSets,
) -> (f64, Option<Solution>) {
    let mu: Vec<Vec<f64>> = region.boxes.iter().map(|b| b.lower.clone()).collect();
    let value = if inst.cl_edges.is_empty() {
        inst.constant
            + inst
                .samples
                .iter()
                .enumerate()
                .map(|(s, wp)| {
                    wp.weight as f64
                        * viable
                            .clusters(s)
                            .map(|c| squared_distance(&wp.coords, &mu[c]))
                            .fold(f64::INFINITY, f64::min)
                })
                .sum::<f64>()
    } else {
        crate::oracle::fixed_centroid_optimum(inst, &mu, Some(viable))
    };
    let (cost, solution) = upper_bound_kcoloring(inst, &[mu]);
    let _ = cost;
    (value, solution)
}
