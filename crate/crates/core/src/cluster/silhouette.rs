use std::collections::BTreeMap;

use crate::math::euclidean;

/// Mean silhouette coefficient under the Euclidean metric.
///
/// Points in singleton clusters contribute 0, a point with `a = b = 0`
/// contributes 0, and a labelling with fewer than two clusters scores 0.
pub fn silhouette(labels: &[usize], vectors: &[Vec<f64>]) -> f64 {
    assert_eq!(labels.len(), vectors.len(), "one label per vector");
    let n = labels.len();
    // dense cluster indices
    let ids: BTreeMap<usize, usize> = labels
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(dense, label)| (label, dense))
        .collect();
    let k = ids.len();
    if k < 2 || n == 0 {
        return 0.0;
    }
    let dense: Vec<usize> = labels.iter().map(|l| ids[l]).collect();
    let mut sizes = vec![0usize; k];
    for &c in &dense {
        sizes[c] += 1;
    }

    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..n {
        let own = dense[i];
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if i != j {
                sums[dense[j]] += euclidean(&vectors[i], &vectors[j]);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}
