//! k-nearest-neighbour surrogate over fixed-length graph features.

use crate::catalog::Component;
use crate::graph::AlgorithmGraph;

pub const NEIGHBOURS: usize = 3;
/// Exactly evaluated candidates required before predictions are used.
pub const MIN_HISTORY: usize = 10;
pub const EXACT_FRACTION: f64 = 0.3;

/// Component counts, mean normalized hyperparameters per (component,
/// parameter) slot, then vertex count, pathway count and total loop count.
/// Slots follow catalog order for the graph's encoding, so vectors from the
/// same encoding are comparable.
pub fn features(graph: &AlgorithmGraph) -> Vec<f64> {
    let comps: Vec<Component> = Component::ALL.iter().copied().filter(|c| c.supports(graph.encoding)).collect();
    let mut out = Vec::new();
    for &c in &comps {
        out.push(graph.vertices.iter().filter(|v| v.component == c).count() as f64);
    }
    for &c in &comps {
        let vs: Vec<_> = graph.vertices.iter().filter(|v| v.component == c).collect();
        for s in c.params() {
            if vs.is_empty() {
                out.push(0.0);
            } else {
                let sum: f64 = vs.iter().map(|v| s.normalize(v.param(s.name), s.lower, s.upper)).sum();
                out.push(sum / vs.len() as f64);
            }
        }
    }
    out.push(graph.vertices.len() as f64);
    out.push(graph.pathway_count() as f64);
    out.push(graph.vertices.iter().map(|v| v.loop_count as f64).sum());
    out
}

/// Inverse-distance weighted mean of the `k` nearest history scores; an
/// exact feature match returns that entry's score.
pub fn knn_predict(history: &[(Vec<f64>, f64)], x: &[f64], k: usize) -> f64 {
    let mut d: Vec<(f64, f64)> = history
        .iter()
        .map(|(f, s)| (f.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(), *s))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(&(0.0, s)) = d.first() {
        return s;
    }
    let near = &d[..k.min(d.len())];
    let wsum: f64 = near.iter().map(|(dist, _)| 1.0 / dist).sum();
    near.iter().map(|(dist, s)| s / dist).sum::<f64>() / wsum
}

/// Number of candidates that receive an exact evaluation.
pub fn exact_quota(n: usize) -> usize {
    ((n as f64 * EXACT_FRACTION).ceil() as usize).clamp(1, n.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::stats::spearman;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_match_returns_history_score() {
        let h = vec![(features(&presets::ris_designed()), 0.25), (features(&presets::stacking_designed()), 0.5)];
        assert_eq!(knn_predict(&h, &features(&presets::ris_designed()), 3), 0.25);
    }

    #[test]
    fn quota_is_thirty_percent() {
        assert_eq!(exact_quota(10), 3);
        assert_eq!(exact_quota(1), 1);
        assert_eq!(exact_quota(4), 2);
    }

    #[test]
    fn linear_landscape_is_ranked_well() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let w: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let point = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> { (0..5).map(|_| r.random()).collect() };
        let score = |x: &[f64]| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let history: Vec<(Vec<f64>, f64)> = (0..50).map(|_| point(&mut r)).map(|x| { let s = score(&x); (x, s) }).collect();
        let test: Vec<Vec<f64>> = (0..30).map(|_| point(&mut r)).collect();
        let truth: Vec<f64> = test.iter().map(|x| score(x)).collect();
        let pred: Vec<f64> = test.iter().map(|x| knn_predict(&history, x, NEIGHBOURS)).collect();
        assert!(spearman(&truth, &pred) >= 0.8, "{}", spearman(&truth, &pred));
    }

    #[test]
    fn features_have_fixed_length_per_encoding() {
        let a = features(&presets::ris_designed());
        let b = features(&presets::two_pathway_example(crate::catalog::Encoding::Discrete));
        assert_eq!(a.len(), b.len());
    }
}
