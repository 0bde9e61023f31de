//! Shared domain types: datasets, pairwise constraints, collapsed instances,
//! centroid regions, solutions, and solver configuration.
//!
//! All types are immutable after construction and safe to share across threads.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("dataset must contain at least one point")]
    EmptyDataset,
    #[error("row {row} has {got} coordinates, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("non-finite coordinate at row {row}, column {col}")]
    NonFiniteCoordinate { row: usize, col: usize },
    #[error("labels length {got} does not match point count {expected}")]
    LabelLengthMismatch { got: usize, expected: usize },
    #[error("constraint index {index} out of range for {n} samples")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("constraint pair ({0}, {0}) links a sample to itself")]
    SelfPair(usize),
    #[error("duplicate constraint pair ({i}, {j})")]
    DuplicatePair { i: usize, j: usize },
    #[error("pair ({i}, {j}) appears as both must-link and cannot-link")]
    MlClConflict { i: usize, j: usize },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("k = {k} exceeds the supported maximum of 64 clusters")]
    TooManyClusters { k: usize },
    #[error("assignment length {got} does not match sample count {expected}")]
    ShapeMismatch { got: usize, expected: usize },
    #[error("cluster index {index} out of range for k = {k}")]
    ClusterOutOfRange { index: usize, k: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Squared Euclidean distance between two coordinate vectors.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

/// Raw input points, with optional ground-truth class labels.
///
/// Labels are only consumed by constraint generation and external metrics;
/// the solver itself never reads them.
#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Result<Self, ValidationError> {
        if points.is_empty() {
            return Err(ValidationError::EmptyDataset);
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(ValidationError::EmptyDataset);
        }
        for (row, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(ValidationError::RaggedRow {
                    row,
                    got: p.len(),
                    expected: dim,
                });
            }
            for (col, &v) in p.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ValidationError::NonFiniteCoordinate { row, col });
                }
            }
        }
        if let Some(ref l) = labels {
            if l.len() != points.len() {
                return Err(ValidationError::LabelLengthMismatch {
                    got: l.len(),
                    expected: points.len(),
                });
            }
        }
        Ok(Self { points, labels })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }
}

/// Pairwise must-link and cannot-link constraints over sample indices.
///
/// Pairs are stored normalized (`i < j`), deduplicated, with direct
/// ML/CL contradictions rejected at construction.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    ml: Vec<(usize, usize)>,
    cl: Vec<(usize, usize)>,
}

fn normalize_pairs(
    pairs: &[(usize, usize)],
    allow_duplicates: bool,
) -> Result<Vec<(usize, usize)>, ValidationError> {
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        if a == b {
            return Err(ValidationError::SelfPair(a));
        }
        out.push((a.min(b), a.max(b)));
    }
    out.sort_unstable();
    if allow_duplicates {
        out.dedup();
    } else {
        for w in out.windows(2) {
            if w[0] == w[1] {
                return Err(ValidationError::DuplicatePair {
                    i: w[0].0,
                    j: w[0].1,
                });
            }
        }
    }
    Ok(out)
}

impl ConstraintSet {
    /// Builds a constraint set, rejecting self-pairs, duplicates, and pairs
    /// listed as both ML and CL.
    pub fn new(ml: Vec<(usize, usize)>, cl: Vec<(usize, usize)>) -> Result<Self, ValidationError> {
        Self::build(ml, cl, false)
    }

    /// Like [`ConstraintSet::new`] but silently deduplicates repeated pairs,
    /// as the text constraint format requires.
    pub fn new_dedup(
        ml: Vec<(usize, usize)>,
        cl: Vec<(usize, usize)>,
    ) -> Result<Self, ValidationError> {
        Self::build(ml, cl, true)
    }

    fn build(
        ml: Vec<(usize, usize)>,
        cl: Vec<(usize, usize)>,
        dedup: bool,
    ) -> Result<Self, ValidationError> {
        let ml = normalize_pairs(&ml, dedup)?;
        let cl = normalize_pairs(&cl, dedup)?;
        // Both lists are sorted; a linear merge finds any shared pair.
        let (mut a, mut b) = (0, 0);
        while a < ml.len() && b < cl.len() {
            match ml[a].cmp(&cl[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    return Err(ValidationError::MlClConflict {
                        i: ml[a].0,
                        j: ml[a].1,
                    })
                }
            }
        }
        Ok(Self { ml, cl })
    }

    pub fn ml_pairs(&self) -> &[(usize, usize)] {
        &self.ml
    }

    pub fn cl_pairs(&self) -> &[(usize, usize)] {
        &self.cl
    }

    pub fn is_empty(&self) -> bool {
        self.ml.is_empty() && self.cl.is_empty()
    }

    fn max_index(&self) -> Option<usize> {
        self.ml
            .iter()
            .chain(self.cl.iter())
            .map(|&(_, j)| j)
            .max()
    }
}

/// Checks that a dataset, constraint set, and cluster count are mutually
/// consistent. Returns the inputs untouched on success.
pub fn validate_instance(
    data: &Dataset,
    cons: &ConstraintSet,
    k: usize,
) -> Result<(), ValidationError> {
    if k == 0 {
        return Err(ValidationError::InvalidK);
    }
    if let Some(max) = cons.max_index() {
        if max >= data.n() {
            return Err(ValidationError::IndexOutOfRange {
                index: max,
                n: data.n(),
            });
        }
    }
    Ok(())
}

/// One pseudo-sample: the mean of a must-link component, weighted by the
/// number of original samples it represents.
#[derive(Debug, Clone)]
pub struct WeightedPoint {
    pub coords: Vec<f64>,
    pub weight: u64,
    pub members: Vec<usize>,
}

/// A constrained clustering instance after must-link collapse: weighted
/// pseudo-samples, the inherited cannot-link graph, and the additive
/// within-component variance constant.
#[derive(Debug, Clone)]
pub struct CollapsedInstance {
    pub samples: Vec<WeightedPoint>,
    pub cl_edges: Vec<(usize, usize)>,
    pub constant: f64,
    pub k: usize,
}

impl CollapsedInstance {
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].coords.len()
    }

    pub fn original_n(&self) -> usize {
        self.samples.iter().map(|s| s.weight as usize).sum()
    }

    /// Cannot-link adjacency lists over pseudo-sample indices.
    pub fn cl_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n()];
        for &(a, b) in &self.cl_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// True when no cannot-link edge has both endpoints in the same cluster.
    pub fn cl_feasible(&self, assignment: &[usize]) -> bool {
        self.cl_edges
            .iter()
            .all(|&(a, b)| assignment[a] != assignment[b])
    }

    /// Maps a pseudo-sample assignment back onto original sample indices.
    pub fn expand_assignment(&self, assignment: &[usize]) -> Vec<usize> {
        let mut out = vec![0usize; self.original_n()];
        for (ps, wp) in self.samples.iter().enumerate() {
            for &m in &wp.members {
                out[m] = assignment[ps];
            }
        }
        out
    }
}

/// Axis-aligned box bounding one cluster centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CentroidBox {
    pub fn width(&self, coord: usize) -> f64 {
        self.upper[coord] - self.lower[coord]
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn clamp(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| v.clamp(self.lower[i], self.upper[i]))
            .collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .enumerate()
            .all(|(i, &v)| v >= self.lower[i] && v <= self.upper[i])
    }
}

/// The centroid search region of one branch-and-bound node: one box per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidRegion {
    pub boxes: Vec<CentroidBox>,
}

impl CentroidRegion {
    pub fn k(&self) -> usize {
        self.boxes.len()
    }

    /// Longest edge over all (cluster, coordinate) pairs.
    pub fn max_edge(&self) -> f64 {
        self.boxes
            .iter()
            .flat_map(|b| b.lower.iter().zip(&b.upper).map(|(l, u)| u - l))
            .fold(0.0, f64::max)
    }

    pub fn midpoints(&self) -> Vec<Vec<f64>> {
        self.boxes.iter().map(CentroidBox::midpoint).collect()
    }

    pub fn clamp_centroids(&self, centroids: &[Vec<f64>]) -> Vec<Vec<f64>> {
        centroids
            .iter()
            .zip(&self.boxes)
            .map(|(c, b)| b.clamp(c))
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        self.boxes.iter().all(|b| {
            b.lower
                .iter()
                .zip(&b.upper)
                .all(|(l, u)| l.is_finite() && u.is_finite() && l <= u)
        })
    }
}

/// A clustering of the pseudo-samples with its objective value.
///
/// `objective` always includes the instance's additive constant, so it is
/// directly comparable to objectives on the original (uncollapsed) data.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub objective: f64,
    pub feasible: bool,
}

/// Recomputes the weighted sum-of-squares objective plus constant for a
/// solution over a collapsed instance.
pub fn recompute_objective(
    inst: &CollapsedInstance,
    sol: &Solution,
) -> Result<f64, ValidationError> {
    if sol.assignment.len() != inst.n() {
        return Err(ValidationError::ShapeMismatch {
            got: sol.assignment.len(),
            expected: inst.n(),
        });
    }
    let mut total = inst.constant;
    for (s, wp) in inst.samples.iter().enumerate() {
        let c = sol.assignment[s];
        if c >= inst.k {
            return Err(ValidationError::ClusterOutOfRange {
                index: c,
                k: inst.k,
            });
        }
        total += wp.weight as f64 * squared_distance(&wp.coords, &sol.centroids[c]);
    }
    Ok(total)
}

/// All tunables of the branch-and-bound solver.
#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub k: usize,
    pub rel_gap_tol: f64,
    pub time_limit_s: f64,
    pub max_nodes: u64,
    pub threads: usize,
    pub seed: u64,
    pub group_size_max: usize,
    pub ld_iterations: usize,
    pub ld_step0: f64,
    pub heuristic_restarts: usize,
    pub paper_rho_rule: bool,
    pub symmetry_breaking: bool,
    pub inherit_multipliers: bool,
}

impl SolverConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            rel_gap_tol: 1e-3,
            time_limit_s: f64::INFINITY,
            max_nodes: u64::MAX,
            threads: 1,
            seed: 0,
            group_size_max: 4,
            ld_iterations: 20,
            ld_step0: 1.0,
            heuristic_restarts: 100,
            paper_rho_rule: false,
            symmetry_breaking: true,
            inherit_multipliers: false,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.k == 0 {
            return Err(ValidationError::InvalidK);
        }
        if self.k > 64 {
            // Viable-cluster sets are stored as 64-bit masks.
            return Err(ValidationError::TooManyClusters { k: self.k });
        }
        if !self.rel_gap_tol.is_finite() || self.rel_gap_tol <= 0.0 {
            return Err(ValidationError::InvalidConfig(
                "rel_gap_tol must be positive".into(),
            ));
        }
        if self.threads == 0 {
            return Err(ValidationError::InvalidConfig(
                "threads must be at least 1".into(),
            ));
        }
        if self.group_size_max == 0 {
            return Err(ValidationError::InvalidConfig(
                "group_size_max must be at least 1".into(),
            ));
        }
        // Group subproblems enumerate at most k^group_size_max joint
        // assignments; cap that at 10^6 so a single subproblem stays cheap.
        if (self.k as f64).powi(self.group_size_max as i32) > 1e6 {
            return Err(ValidationError::InvalidConfig(format!(
                "k^group_size_max = {}^{} exceeds 10^6",
                self.k, self.group_size_max
            )));
        }
        if !self.ld_step0.is_finite() || self.ld_step0 <= 0.0 {
            return Err(ValidationError::InvalidConfig(
                "ld_step0 must be positive".into(),
            ));
        }
        if self.heuristic_restarts == 0 {
            return Err(ValidationError::InvalidConfig(
                "heuristic_restarts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(points: &[&[f64]]) -> Dataset {
        Dataset::new(points.iter().map(|p| p.to_vec()).collect(), None).unwrap()
    }

    #[test]
    fn valid_instance_passes() {
        let data = dataset(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        let cons = ConstraintSet::new(vec![(0, 1)], vec![]).unwrap();
        assert!(validate_instance(&data, &cons, 2).is_ok());
    }

    #[test]
    fn self_pair_rejected() {
        let err = ConstraintSet::new(vec![], vec![(0, 0)]).unwrap_err();
        assert_eq!(err, ValidationError::SelfPair(0));
    }

    #[test]
    fn ml_cl_conflict_rejected() {
        let err = ConstraintSet::new(vec![(0, 1)], vec![(1, 0)]).unwrap_err();
        assert_eq!(err, ValidationError::MlClConflict { i: 0, j: 1 });
    }

    #[test]
    fn duplicate_pair_rejected() {
        let err = ConstraintSet::new(vec![(0, 1), (1, 0)], vec![]).unwrap_err();
        assert_eq!(err, ValidationError::DuplicatePair { i: 0, j: 1 });
    }

    #[test]
    fn dedup_constructor_merges() {
        let cons = ConstraintSet::new_dedup(vec![], vec![(2, 3), (3, 2)]).unwrap();
        assert_eq!(cons.cl_pairs(), &[(2, 3)]);
    }

    #[test]
    fn out_of_range_index_rejected() {
        let data = dataset(&[&[0.0], &[1.0]]);
        let cons = ConstraintSet::new(vec![(0, 5)], vec![]).unwrap();
        let err = validate_instance(&data, &cons, 1).unwrap_err();
        assert_eq!(err, ValidationError::IndexOutOfRange { index: 5, n: 2 });
    }

    #[test]
    fn non_finite_coordinate_rejected() {
        let err = Dataset::new(vec![vec![0.0, f64::NAN]], None).unwrap_err();
        assert_eq!(err, ValidationError::NonFiniteCoordinate { row: 0, col: 1 });
    }

    fn tiny_instance() -> CollapsedInstance {
        CollapsedInstance {
            samples: vec![
                WeightedPoint {
                    coords: vec![1.0, 0.0],
                    weight: 2,
                    members: vec![0, 1],
                },
                WeightedPoint {
                    coords: vec![10.0, 0.0],
                    weight: 1,
                    members: vec![2],
                },
            ],
            cl_edges: vec![],
            constant: 2.0,
            k: 2,
        }
    }

    #[test]
    fn recompute_objective_weighted() {
        let inst = tiny_instance();
        let sol = Solution {
            centroids: vec![vec![1.0, 0.0], vec![10.0, 0.0]],
            assignment: vec![0, 1],
            objective: 2.0,
            feasible: true,
        };
        let v = recompute_objective(&inst, &sol).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn recompute_objective_empty_cluster() {
        let inst = tiny_instance();
        let sol = Solution {
            centroids: vec![vec![4.0, 0.0], vec![0.0, 0.0]],
            assignment: vec![0, 0],
            objective: 0.0,
            feasible: true,
        };
        // Cluster 1 is empty; only assigned samples contribute.
        let v = recompute_objective(&inst, &sol).unwrap();
        assert!((v - (2.0 * 9.0 + 36.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn recompute_objective_single_point_k1() {
        let inst = CollapsedInstance {
            samples: vec![WeightedPoint {
                coords: vec![3.0],
                weight: 1,
                members: vec![0],
            }],
            cl_edges: vec![],
            constant: 7.5,
            k: 1,
        };
        let sol = Solution {
            centroids: vec![vec![3.0]],
            assignment: vec![0],
            objective: 7.5,
            feasible: true,
        };
        assert_eq!(recompute_objective(&inst, &sol).unwrap(), 7.5);
    }

    #[test]
    fn recompute_shape_mismatch() {
        let inst = tiny_instance();
        let sol = Solution {
            centroids: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            assignment: vec![0],
            objective: 0.0,
            feasible: true,
        };
        assert!(matches!(
            recompute_objective(&inst, &sol),
            Err(ValidationError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn config_group_size_cap() {
        let mut cfg = SolverConfig::new(10);
        cfg.group_size_max = 7; // 10^7 joint assignments is over the cap
        assert!(cfg.validate().is_err());
        cfg.group_size_max = 6;
        assert!(cfg.validate().is_ok());
    }
}
