//! Rank-based tests used by racing and by the acceptance comparisons.

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF, Normal};

/// Average ranks (1 = smallest) with ties sharing their mean rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Friedman {
    pub statistic: f64,
    pub p_value: f64,
    /// Mean rank per treatment; lower is better.
    pub mean_ranks: Vec<f64>,
}

/// Friedman test on `blocks[b][t]` (block `b`, treatment `t`), tie
/// corrected through the within-block rank variance. Returns `None` for fewer than two treatments or
/// blocks.
pub fn friedman(blocks: &[Vec<f64>]) -> Option<Friedman> {
    let b = blocks.len();
    let k = blocks.first()?.len();
    if b < 2 || k < 2 {
        return None;
    }
    let mut rank_sums = vec![0.0; k];
    let mut sum_sq = 0.0;
    for row in blocks {
        for (s, r) in rank_sums.iter_mut().zip(ranks(row)) {
            *s += r;
            sum_sq += r * r;
        }
    }
    let (bf, kf) = (b as f64, k as f64);
    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / bf).collect();
    let ss: f64 = rank_sums.iter().map(|s| (s - bf * (kf + 1.0) / 2.0).powi(2)).sum();
    let denom = sum_sq - bf * kf * (kf + 1.0).powi(2) / 4.0;
    if denom <= 1e-12 {
        return Some(Friedman { statistic: 0.0, p_value: 1.0, mean_ranks });
    }
    let statistic = (kf - 1.0) * ss / denom;
    let p_value = ChiSquared::new(kf - 1.0).expect("k >= 2").sf(statistic);
    Some(Friedman { statistic, p_value, mean_ranks })
}

/// One-sided sign test p-value for "x tends to be larger than y" over paired
/// samples. Ties are dropped.
pub fn sign_test_greater(x: &[f64], y: &[f64]) -> f64 {
    let (mut wins, mut n) = (0u64, 0u64);
    for (a, b) in x.iter().zip(y) {
        if a != b {
            n += 1;
            if a > b {
                wins += 1;
            }
        }
    }
    if n == 0 {
        return 1.0;
    }
    let bin = Binomial::new(0.5, n).expect("valid binomial");
    // P(W >= wins)
    if wins == 0 {
        1.0
    } else {
        bin.sf(wins - 1)
    }
}

/// Holm step-down adjusted p-values, in input order.
pub fn holm(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut out = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (i, &idx) in order.iter().enumerate() {
        running = running.max(((m - i) as f64 * p[idx]).min(1.0));
        out[idx] = running;
    }
    out
}

/// Wilcoxon signed-rank test. Returns the one-sided p-value for the
/// alternative "x tends to be smaller than y". Zero differences are dropped;
/// the null distribution is exact up to 25 pairs and normal beyond.
pub fn wilcoxon_less(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let r = ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    // W+ is the rank sum of positive differences; small W+ favours x < y
    let w_plus: f64 = d.iter().zip(&r).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    if n <= 25 {
        // exact distribution over doubled ranks to keep half-ranks integral
        let doubled: Vec<usize> = r.iter().map(|v| (v * 2.0).round() as usize).collect();
        let total: usize = doubled.iter().sum();
        let mut counts = vec![0f64; total + 1];
        counts[0] = 1.0;
        for &rk in &doubled {
            for s in (rk..=total).rev() {
                counts[s] += counts[s - rk];
            }
        }
        let target = (w_plus * 2.0).round() as usize;
        let le: f64 = counts[..=target].iter().sum();
        le / 2f64.powi(n as i32)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
        let z = (w_plus - mean + 0.5) / sd;
        Normal::new(0.0, 1.0).unwrap().cdf(z)
    }
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn sample_std(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}
