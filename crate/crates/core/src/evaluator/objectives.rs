use crate::executor::TrajectoryPoint;

/// Number of FE checkpoints used by [`score_auc`].
pub const AUC_CHECKPOINTS: usize = 51;
pub const PAR_FACTOR: f64 = 10.0;

/// Final best-so-far fitness.
pub fn score_quality(trajectory: &[TrajectoryPoint]) -> f64 {
    trajectory.last().expect("non-empty trajectory").best
}

/// FEs until the best-so-far fitness first reaches `threshold`. Runs that
/// never reach it score `10 * budget` and are flagged censored.
pub fn score_runtime_fe(trajectory: &[TrajectoryPoint], threshold: f64, budget: usize) -> (f64, bool) {
    match trajectory.iter().find(|p| p.best <= threshold) {
        Some(p) => (p.fe as f64, false),
        None => (PAR_FACTOR * budget as f64, true),
    }
}

/// Wall-clock variant of [`score_runtime_fe`]; `seconds[i]` is the time at
/// which `trajectory[i]` was recorded and `total` the run's duration.
pub fn score_runtime_sec(trajectory: &[TrajectoryPoint], seconds: &[f64], threshold: f64, total: f64) -> (f64, bool) {
    match trajectory.iter().position(|p| p.best <= threshold) {
        Some(i) => (seconds[i], false),
        None => (PAR_FACTOR * total, true),
    }
}

/// Log-spaced FE checkpoints from `first` to `last`.
pub fn auc_checkpoints(first: usize, last: usize) -> Vec<f64> {
    let (a, b) = (first.max(1) as f64, last.max(first).max(1) as f64);
    (0..AUC_CHECKPOINTS)
        .map(|i| {
            let t = i as f64 / (AUC_CHECKPOINTS - 1) as f64;
            a * (b / a).powf(t)
        })
        .collect()
}

/// Fraction of (target, checkpoint) pairs where the best fitness recorded at
/// or before the checkpoint reaches the target. In `[0, 1]`, higher is better.
pub fn score_auc(trajectory: &[TrajectoryPoint], targets: &[f64], checkpoints: &[f64]) -> f64 {
    if targets.is_empty() || checkpoints.is_empty() {
        return 0.0;
    }
    let mut hits = 0usize;
    for &c in checkpoints {
        let best = trajectory.iter().take_while(|p| p.fe as f64 <= c + 1e-9).last().map(|p| p.best);
        if let Some(b) = best {
            hits += targets.iter().filter(|&&t| b <= t).count();
        }
    }
    hits as f64 / (targets.len() * checkpoints.len()) as f64
}

/// `AUC_CHECKPOINTS` targets between `hi` and `lo`; geometric when both are
/// positive, linear otherwise.
pub fn default_targets(hi: f64, lo: f64) -> Vec<f64> {
    let n = AUC_CHECKPOINTS;
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            if hi > 0.0 && lo > 0.0 {
                hi * (lo / hi).powf(t)
            } else {
                hi + (lo - hi) * t
            }
        })
        .collect()
}
