//! Capacity-constrained k-means over capability vectors.

use rand::Rng;

use crate::math::squared_euclidean;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Partition {
    /// Dense labels in `0..k`.
    pub labels: Vec<usize>,
    pub k: usize,
    /// Assignment passes performed.
    pub passes: usize,
}

/// k-means++ seeding: first centre uniform, then `D²` sampling.
pub(crate) fn seed_centroids<R: Rng>(vectors: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = vectors
        .iter()
        .map(|v| squared_euclidean(v, &vectors[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            // rounding can land on an already chosen point
            if d2[pick] == 0.0 {
                pick = (0..n).rev().find(|&i| d2[i] > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            // every point coincides with a centre: fall back to uniform
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, v) in vectors.iter().enumerate() {
            d2[i] = d2[i].min(squared_euclidean(v, &vectors[next]));
        }
    }
    chosen.into_iter().map(|i| vectors[i].clone()).collect()
}

/// Centres ordered by distance from `v`, ties by index.
fn ranked(v: &[f64], centroids: &[Vec<f64>]) -> Vec<(f64, usize)> {
    let mut r: Vec<(f64, usize)> = centroids
        .iter()
        .enumerate()
        .map(|(c, mu)| (squared_euclidean(v, mu), c))
        .collect();
    r.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    r
}

/// Points in order of distance to their nearest centre, each placed in the
/// nearest centre that still has room.
fn assign(vectors: &[Vec<f64>], centroids: &[Vec<f64>], cap: usize) -> Vec<usize> {
    let ranks: Vec<Vec<(f64, usize)>> = vectors.iter().map(|v| ranked(v, centroids)).collect();
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| ranks[a][0].0.total_cmp(&ranks[b][0].0).then(a.cmp(&b)));

    let mut sizes = vec![0usize; centroids.len()];
    let mut labels = vec![0usize; vectors.len()];
    for i in order {
        // overflow only happens when k * cap < n; then the nearest centre takes it
        let c = ranks[i]
            .iter()
            .map(|&(_, c)| c)
            .find(|&c| sizes[c] < cap)
            .unwrap_or(ranks[i][0].1);
        labels[i] = c;
        sizes[c] += 1;
    }
    labels
}

/// Top up undersized clusters with the closest points from clusters that can
/// spare one.
fn repair_min_size(vectors: &[Vec<f64>], centroids: &[Vec<f64>], labels: &mut [usize], min: usize) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for c in 0..k {
        while sizes[c] < min {
            let donor = (0..vectors.len())
                .filter(|&i| labels[i] != c && sizes[labels[i]] > min)
                .min_by(|&a, &b| {
                    squared_euclidean(&vectors[a], &centroids[c])
                        .total_cmp(&squared_euclidean(&vectors[b], &centroids[c]))
                        .then(a.cmp(&b))
                });
            let Some(i) = donor else { break };
            sizes[labels[i]] -= 1;
            labels[i] = c;
            sizes[c] += 1;
        }
    }
}

pub(crate) fn centroids_of(vectors: &[Vec<f64>], labels: &[usize], previous: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; previous.len()];
    let mut counts = vec![0usize; previous.len()];
    for (v, &l) in vectors.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(v) {
            *s += x;
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(previous)
        .map(|((s, n), prev)| {
            if n == 0 {
                prev.clone()
            } else {
                s.into_iter().map(|x| x / n as f64).collect()
            }
        })
        .collect()
}

/// Dissolve clusters below `min` into the nearest surviving cluster with
/// room. Points that find no room are kept together as one floating cluster.
/// Returns dense labels and the resulting cluster count.
fn dissolve_small(
    vectors: &[Vec<f64>],
    centroids: &[Vec<f64>],
    labels: &[usize],
    min: usize,
    cap: usize,
) -> (Vec<usize>, usize) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let survivors: Vec<bool> = sizes.iter().map(|&s| s >= min).collect();
    let mut out: Vec<Option<usize>> = labels
        .iter()
        .map(|&l| survivors[l].then_some(l))
        .collect();
    for i in 0..vectors.len() {
        if out[i].is_some() {
            continue;
        }
        let target = ranked(&vectors[i], centroids)
            .into_iter()
            .map(|(_, c)| c)
            .find(|&c| survivors[c] && sizes[c] < cap);
        if let Some(c) = target {
            out[i] = Some(c);
            sizes[c] += 1;
        }
    }
    let float = k;
    let raw: Vec<usize> = out.into_iter().map(|l| l.unwrap_or(float)).collect();

    let mut dense = vec![usize::MAX; k + 1];
    let mut next = 0;
    let labels = raw
        .iter()
        .map(|&l| {
            if dense[l] == usize::MAX {
                dense[l] = next;
                next += 1;
            }
            dense[l]
        })
        .collect();
    (labels, next)
}

/// Size-constrained Lloyd iterations from k-means++ seeds. Stops when a pass
/// changes no assignment or after `iter_max` passes.
pub(crate) fn constrained_kmeans<R: Rng>(
    vectors: &[Vec<f64>],
    k: usize,
    min: usize,
    cap: usize,
    iter_max: usize,
    rng: &mut R,
) -> Partition {
    assert!(k >= 1 && k <= vectors.len(), "k must lie in 1..=n");
    let mut centroids = seed_centroids(vectors, k, rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut passes = 0;
    while passes < iter_max.max(1) {
        passes += 1;
        let mut next = assign(vectors, &centroids, cap);
        repair_min_size(vectors, &centroids, &mut next, min);
        let changed = next != labels;
        labels = next;
        centroids = centroids_of(vectors, &labels, &centroids);
        if !changed {
            break;
        }
    }
    let (labels, k) = dissolve_small(vectors, &centroids, &labels, min, cap);
    Partition { labels, k, passes }
}
