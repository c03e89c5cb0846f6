//! Small numeric helpers shared by clustering, voting and arbitration.

/// Cosine similarity; zero-length vectors are orthogonal to everything.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

/// Cosine similarity mapped onto `[0, 1]` via `(cos + 1) / 2`.
pub fn unit_similarity(a: &[f64], b: &[f64]) -> f64 {
    (cosine(a, b) + 1.0) / 2.0
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Shannon entropy (natural log) of a discrete distribution given as counts
/// or unnormalised weights. Zero entries contribute nothing.
pub fn entropy(weights: impl IntoIterator<Item = f64>) -> f64 {
    let weights: Vec<f64> = weights.into_iter().filter(|w| *w > 0.0).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -weights
        .iter()
        .map(|w| {
            let p = w / total;
            p * p.ln()
        })
        .sum::<f64>()
}

/// SplitMix64 finaliser, used to derive independent sub-seeds from a run seed.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_basics() {
        assert!((cosine(&[1.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(unit_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.5);
    }

    #[test]
    fn entropy_of_two_point_split() {
        let h = entropy([3.0, 1.0]);
        assert!((h - 0.562_335_144_618_808_9).abs() < 1e-12);
        assert_eq!(entropy([5.0]), 0.0);
        assert!((entropy([1.0, 1.0, 1.0]) - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn seeds_differ_by_salt() {
        assert_ne!(mix_seed(1, 0), mix_seed(1, 1));
        assert_eq!(mix_seed(9, 4), mix_seed(9, 4));
    }
}
