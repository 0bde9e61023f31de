//! Turns a raw `(Dataset, ConstraintSet)` pair into an equivalent
//! `CollapsedInstance`: every must-link component becomes one weighted
//! pseudo-sample at the component mean, the removed within-component
//! variance is carried as an additive constant, and cannot-link pairs are
//! inherited onto pseudo-sample indices.

use crate::model::{
    squared_distance, CollapsedInstance, ConstraintSet, Dataset, WeightedPoint,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    /// A cannot-link pair ended up inside a single must-link component, so
    /// no assignment can satisfy both constraint lists.
    #[error("cannot-link pair ({i}, {j}) is forced into one cluster by must-links")]
    ConstraintContradiction { i: usize, j: usize },
}

/// Disjoint-set forest with union by rank and path compression.
struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Connected components of the must-link graph.
///
/// Components are ordered by their smallest member index and members within
/// a component ascend, so pseudo-sample ordering is reproducible.
#[derive(Debug, Clone)]
pub struct MlComponents {
    pub component_id: Vec<usize>,
    pub component_members: Vec<Vec<usize>>,
}

pub fn build_ml_components(n: usize, ml_pairs: &[(usize, usize)]) -> MlComponents {
    let mut uf = UnionFind::new(n);
    for &(a, b) in ml_pairs {
        uf.union(a, b);
    }
    let mut component_id = vec![usize::MAX; n];
    let mut component_members: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        if component_id[root] == usize::MAX {
            component_id[root] = component_members.len();
            component_members.push(Vec::new());
        }
        let cid = component_id[root];
        component_id[i] = cid;
        component_members[cid].push(i);
    }
    MlComponents {
        component_id,
        component_members,
    }
}

/// Collapses each component into a weighted point at its mean and sums the
/// within-component squared deviations into the additive constant.
///
/// The constant equals `(t - 1) * tr(cov)` per component but is computed as
/// the raw deviation sum, which sidesteps the `t = 1` division.
pub fn collapse_components(data: &Dataset, comps: &MlComponents) -> (Vec<WeightedPoint>, f64) {
    let dim = data.dim();
    let mut samples = Vec::with_capacity(comps.component_members.len());
    let mut constant = 0.0;
    for members in &comps.component_members {
        let t = members.len();
        let mut mean = vec![0.0; dim];
        for &m in members {
            for (acc, &v) in mean.iter_mut().zip(data.point(m)) {
                *acc += v;
            }
        }
        for v in &mut mean {
            *v /= t as f64;
        }
        for &m in members {
            constant += squared_distance(data.point(m), &mean);
        }
        samples.push(WeightedPoint {
            coords: mean,
            weight: t as u64,
            members: members.clone(),
        });
    }
    (samples, constant)
}

/// Lifts each cannot-link pair onto the pseudo-sample indices of its two
/// components; a pair whose endpoints share a component is a contradiction.
pub fn inherit_cl_edges(
    comps: &MlComponents,
    cl_pairs: &[(usize, usize)],
) -> Result<Vec<(usize, usize)>, PreprocessError> {
    let mut edges = Vec::with_capacity(cl_pairs.len());
    for &(i, j) in cl_pairs {
        let (a, b) = (comps.component_id[i], comps.component_id[j]);
        if a == b {
            return Err(PreprocessError::ConstraintContradiction { i, j });
        }
        edges.push((a.min(b), a.max(b)));
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(edges)
}

/// Full preprocessing pipeline: components, collapse, CL inheritance.
pub fn collapse(
    data: &Dataset,
    cons: &ConstraintSet,
    k: usize,
) -> Result<CollapsedInstance, PreprocessError> {
    let comps = build_ml_components(data.n(), cons.ml_pairs());
    let (samples, constant) = collapse_components(data, &comps);
    let cl_edges = inherit_cl_edges(&comps, cons.cl_pairs())?;
    Ok(CollapsedInstance {
        samples,
        cl_edges,
        constant,
        k,
    })
}

/// Outcome of the best-effort root feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub enum RootFeasibility {
    /// A proper coloring with at most k colors was found.
    Feasible,
    /// The cannot-link graph is provably not k-colorable; the witness lists
    /// the vertices of an infeasible substructure (a clique when one was
    /// found, otherwise the whole constrained vertex set).
    Infeasible { witness: Vec<usize> },
    /// k-colorability could not be decided cheaply; branch-and-bound will
    /// prove infeasibility itself if the instance has no solution.
    Unknown,
}

/// Checks whether the cannot-link graph admits any k-cluster assignment:
/// greedy largest-degree-first coloring, then an exact search when at most
/// 20 vertices carry cannot-link edges.
pub fn check_root_feasibility(inst: &CollapsedInstance) -> RootFeasibility {
    let k = inst.k;
    let adj = inst.cl_adjacency();
    let mut constrained: Vec<usize> = (0..inst.n()).filter(|&v| !adj[v].is_empty()).collect();
    if constrained.is_empty() {
        return RootFeasibility::Feasible;
    }
    constrained.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));

    let mut color = vec![usize::MAX; inst.n()];
    let mut greedy_ok = true;
    for &v in &constrained {
        let mut used = 0u64;
        for &u in &adj[v] {
            if color[u] != usize::MAX {
                used |= 1 << color[u];
            }
        }
        match (0..k).find(|&c| used & (1 << c) == 0) {
            Some(c) => color[v] = c,
            None => {
                greedy_ok = false;
                break;
            }
        }
    }
    if greedy_ok {
        return RootFeasibility::Feasible;
    }

    if constrained.len() > 20 {
        return RootFeasibility::Unknown;
    }
    if exact_k_colorable(&constrained, &adj, k) {
        return RootFeasibility::Feasible;
    }
    let witness = find_clique(&constrained, &adj, k + 1).unwrap_or(constrained);
    RootFeasibility::Infeasible { witness }
}

fn exact_k_colorable(vertices: &[usize], adj: &[Vec<usize>], k: usize) -> bool {
    let n = vertices.len();
    let pos: std::collections::HashMap<usize, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // Local adjacency restricted to the constrained vertices.
    let local: Vec<Vec<usize>> = vertices
        .iter()
        .map(|&v| adj[v].iter().filter_map(|u| pos.get(u).copied()).collect())
        .collect();
    let mut colors = vec![usize::MAX; n];

    fn rec(i: usize, colors: &mut [usize], local: &[Vec<usize>], k: usize) -> bool {
        if i == colors.len() {
            return true;
        }
        let mut used = 0u64;
        for &u in &local[i] {
            if colors[u] != usize::MAX {
                used |= 1 << colors[u];
            }
        }
        // Trying colors beyond the first unused one only permutes labels.
        let fresh_cap = colors[..i].iter().map(|&c| c + 1).max().unwrap_or(0);
        for c in 0..k.min(fresh_cap + 1) {
            if used & (1 << c) == 0 {
                colors[i] = c;
                if rec(i + 1, colors, local, k) {
                    return true;
                }
                colors[i] = usize::MAX;
            }
        }
        false
    }
    rec(0, &mut colors, &local, k)
}

/// Greedy search for a clique of the requested size among the constrained
/// vertices; used only to produce a readable infeasibility witness.
fn find_clique(vertices: &[usize], adj: &[Vec<usize>], size: usize) -> Option<Vec<usize>> {
    for &start in vertices {
        let mut clique = vec![start];
        for &v in vertices {
            if v == start || clique.contains(&v) {
                continue;
            }
            if clique.iter().all(|&c| adj[v].contains(&c)) {
                clique.push(v);
            }
            if clique.len() == size {
                return Some(clique);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConstraintSet;

    fn dataset(points: &[&[f64]]) -> Dataset {
        Dataset::new(points.iter().map(|p| p.to_vec()).collect(), None).unwrap()
    }

    #[test]
    fn components_single_edge() {
        let comps = build_ml_components(3, &[(0, 1)]);
        assert_eq!(comps.component_members, vec![vec![0, 1], vec![2]]);
        assert_eq!(comps.component_id, vec![0, 0, 1]);
    }

    #[test]
    fn components_transitive() {
        let comps = build_ml_components(4, &[(0, 1), (1, 2)]);
        assert_eq!(comps.component_members, vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn components_no_edges() {
        let comps = build_ml_components(5, &[]);
        assert_eq!(comps.component_members.len(), 5);
        for (i, m) in comps.component_members.iter().enumerate() {
            assert_eq!(m, &vec![i]);
        }
    }

    #[test]
    fn collapse_two_points() {
        let data = dataset(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let comps = build_ml_components(2, &[(0, 1)]);
        let (samples, constant) = collapse_components(&data, &comps);
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].coords, vec![1.0, 0.0]);
        assert_eq!(samples[0].weight, 2);
        assert!((constant - 2.0).abs() < 1e-12);
    }

    #[test]
    fn collapse_duplicate_points_zero_constant() {
        let data = dataset(&[&[3.0, 3.0], &[3.0, 3.0]]);
        let comps = build_ml_components(2, &[(0, 1)]);
        let (samples, constant) = collapse_components(&data, &comps);
        assert_eq!(samples[0].coords, vec![3.0, 3.0]);
        assert_eq!(constant, 0.0);
    }

    #[test]
    fn collapse_identity_without_ml() {
        let data = dataset(&[&[1.0], &[2.0], &[3.0]]);
        let comps = build_ml_components(3, &[]);
        let (samples, constant) = collapse_components(&data, &comps);
        assert_eq!(samples.len(), 3);
        assert_eq!(constant, 0.0);
        assert!(samples.iter().all(|s| s.weight == 1));
    }

    #[test]
    fn cl_edge_spanning_components() {
        let comps = build_ml_components(3, &[(0, 1)]);
        let edges = inherit_cl_edges(&comps, &[(1, 2)]).unwrap();
        assert_eq!(edges, vec![(0, 1)]);
    }

    #[test]
    fn cl_inside_component_is_contradiction() {
        let comps = build_ml_components(3, &[(0, 1), (1, 2)]);
        let err = inherit_cl_edges(&comps, &[(0, 2)]).unwrap_err();
        assert_eq!(err, PreprocessError::ConstraintContradiction { i: 0, j: 2 });
    }

    #[test]
    fn cl_edges_deduplicated() {
        let comps = build_ml_components(4, &[]);
        let edges = inherit_cl_edges(&comps, &[(2, 3), (3, 2)]).unwrap();
        assert_eq!(edges, vec![(2, 3)]);
    }

    fn instance_with_cl(n: usize, cl: Vec<(usize, usize)>, k: usize) -> CollapsedInstance {
        let points: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let data = Dataset::new(points, None).unwrap();
        let cons = ConstraintSet::new(vec![], cl).unwrap();
        collapse(&data, &cons, k).unwrap()
    }

    #[test]
    fn triangle_needs_three_colors() {
        let inst = instance_with_cl(3, vec![(0, 1), (1, 2), (0, 2)], 2);
        assert!(matches!(
            check_root_feasibility(&inst),
            RootFeasibility::Infeasible { .. }
        ));
        let inst3 = instance_with_cl(3, vec![(0, 1), (1, 2), (0, 2)], 3);
        assert_eq!(check_root_feasibility(&inst3), RootFeasibility::Feasible);
    }

    #[test]
    fn path_is_bipartite() {
        let inst = instance_with_cl(5, vec![(0, 1), (1, 2), (2, 3), (3, 4)], 2);
        assert_eq!(check_root_feasibility(&inst), RootFeasibility::Feasible);
    }

    #[test]
    fn infeasible_witness_is_a_clique() {
        let inst = instance_with_cl(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], 2);
        match check_root_feasibility(&inst) {
            RootFeasibility::Infeasible { witness } => assert!(witness.len() >= 3),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
