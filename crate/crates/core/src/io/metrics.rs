//! External clustering metrics against ground-truth labels: adjusted Rand
//! index, normalized mutual information (arithmetic-mean normalization), and
//! purity.

use crate::model::ValidationError;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Metrics {
    pub ari: f64,
    pub nmi: f64,
    pub purity: f64,
}

pub fn external_metrics(pred: &[usize], truth: &[usize]) -> Result<Metrics, ValidationError> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(ValidationError::ShapeMismatch {
            got: pred.len(),
            expected: truth.len(),
        });
    }
    let n = pred.len() as f64;

    let mut table: HashMap<(usize, usize), f64> = HashMap::new();
    let mut rows: HashMap<usize, f64> = HashMap::new();
    let mut cols: HashMap<usize, f64> = HashMap::new();
    for (&p, &t) in pred.iter().zip(truth) {
        *table.entry((p, t)).or_default() += 1.0;
        *rows.entry(p).or_default() += 1.0;
        *cols.entry(t).or_default() += 1.0;
    }

    let comb2 = |x: f64| x * (x - 1.0) / 2.0;
    let sum_cells: f64 = table.values().map(|&c| comb2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| comb2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| comb2(c)).sum();
    let expected = sum_rows * sum_cols / comb2(n);
    let max_index = 0.5 * (sum_rows + sum_cols);
    let ari = if (max_index - expected).abs() < 1e-12 {
        // Both partitions are trivial and identical up to relabeling.
        1.0
    } else {
        (sum_cells - expected) / (max_index - expected)
    };

    let entropy = |counts: &HashMap<usize, f64>| -> f64 {
        counts
            .values()
            .map(|&c| {
                let p = c / n;
                -p * p.ln()
            })
            .sum()
    };
    let h_pred = entropy(&rows);
    let h_truth = entropy(&cols);
    let mut mi = 0.0;
    for (&(p, t), &c) in &table {
        let joint = c / n;
        mi += joint * (n * c / (rows[&p] * cols[&t])).ln();
    }
    let mean_h = 0.5 * (h_pred + h_truth);
    let nmi = if mean_h <= 0.0 {
        1.0
    } else {
        (mi / mean_h).clamp(0.0, 1.0)
    };

    let mut per_cluster_max: HashMap<usize, f64> = HashMap::new();
    for (&(p, _), &c) in &table {
        let e = per_cluster_max.entry(p).or_default();
        if c > *e {
            *e = c;
        }
    }
    let purity = per_cluster_max.values().sum::<f64>() / n;

    Ok(Metrics { ari, nmi, purity })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_agreement() {
        let truth = vec![0, 0, 1, 1, 2, 2];
        let m = external_metrics(&truth, &truth).unwrap();
        assert!((m.ari - 1.0).abs() < 1e-12);
        assert!((m.nmi - 1.0).abs() < 1e-12);
        assert!((m.purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_prediction_is_chance() {
        let pred = vec![0; 8];
        let truth = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let m = external_metrics(&pred, &truth).unwrap();
        assert!(m.ari.abs() < 1e-12);
        assert!((m.purity - 0.5).abs() < 1e-12);
        assert!(m.nmi.abs() < 1e-12);
    }

    #[test]
    fn invariant_under_relabeling() {
        let truth = vec![0, 0, 1, 1, 2, 2, 0, 1];
        let pred = vec![2, 2, 0, 0, 1, 1, 2, 0];
        let m = external_metrics(&pred, &truth).unwrap();
        assert!((m.ari - 1.0).abs() < 1e-12);
        assert!((m.nmi - 1.0).abs() < 1e-12);
        assert!((m.purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(external_metrics(&[0, 1], &[0]).is_err());
    }
}
