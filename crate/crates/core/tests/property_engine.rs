//! Engine-level behavior on tiny instances: finite termination at tight
//! tolerances, bound soundness around the enumerated optimum, and incumbent
//! monotonicity.

mod common;

use ckbb::engine::{solve, SolveStatus};
use ckbb::model::{recompute_objective, SolverConfig};
use ckbb::oracle::brute_force_raw;
use ckbb::preprocess::collapse;

fn tight_config(k: usize) -> SolverConfig {
    let mut config = SolverConfig::new(k);
    config.rel_gap_tol = 1e-6;
    config.heuristic_restarts = 20;
    config
}

/// Exhaustive bisection plus exact endgames terminate with the gap closed on
/// tiny instances, with no node or time limit needed.
#[test]
fn converges_without_limits() {
    for seed in 500..520u64 {
        let tiny = common::random_tiny(seed);
        let inst = collapse(&tiny.data, &tiny.cons, tiny.k).unwrap();
        let result = solve(&inst, &tight_config(tiny.k), None).unwrap();
        assert!(
            matches!(result.status, SolveStatus::Optimal | SolveStatus::GapLimit),
            "unexpected status {:?} on seed {seed}",
            result.status
        );
        assert!(result.rel_gap <= 1e-6 + 1e-12, "gap {} on seed {seed}", result.rel_gap);
    }
}

/// The enumerated optimum always lies between the final bounds, and the
/// reported solutions recompute and respect every constraint.
#[test]
fn bounds_bracket_the_oracle() {
    for seed in 600..630u64 {
        let tiny = common::random_tiny(seed);
        let inst = collapse(&tiny.data, &tiny.cons, tiny.k).unwrap();
        let oracle = brute_force_raw(&tiny.data, &tiny.cons, tiny.k)
            .unwrap()
            .unwrap();
        let result = solve(&inst, &tight_config(tiny.k), None).unwrap();
        assert!(
            result.lb <= oracle.cost + 1e-9 && oracle.cost <= result.ub + 1e-9,
            "oracle {} outside [{}, {}] on seed {seed}",
            oracle.cost,
            result.lb,
            result.ub
        );
        let collapsed = result.best_collapsed.unwrap();
        let recomputed = recompute_objective(&inst, &collapsed).unwrap();
        assert!((recomputed - collapsed.objective).abs() < 1e-9 * collapsed.objective.max(1.0));
        assert!(inst.cl_feasible(&collapsed.assignment));

        // The expanded assignment honors the raw pairwise constraints.
        let expanded = &result.best.as_ref().unwrap().assignment;
        for &(i, j) in tiny.cons.ml_pairs() {
            assert_eq!(expanded[i], expanded[j], "ML({i},{j}) broken on seed {seed}");
        }
        for &(i, j) in tiny.cons.cl_pairs() {
            assert_ne!(expanded[i], expanded[j], "CL({i},{j}) broken on seed {seed}");
        }
    }
}

/// Node limits surface as the matching status instead of a bogus optimum.
#[test]
fn node_limit_is_reported() {
    // Spread-out points with a moderate gap tolerance so the search cannot
    // finish within one node.
    let tiny = common::random_tiny(42);
    let inst = collapse(&tiny.data, &tiny.cons, tiny.k).unwrap();
    let mut config = tight_config(tiny.k);
    config.rel_gap_tol = 1e-9;
    config.max_nodes = 1;
    config.group_size_max = 1;
    config.ld_iterations = 0;
    let result = solve(&inst, &config, None).unwrap();
    if result.rel_gap > 1e-9 {
        assert_eq!(result.status, SolveStatus::NodeLimit);
        assert_eq!(result.stats.nodes_processed, 1);
    }
}
