//! Instance-by-instance evaluation schedules, independent of how a cell is
//! scored. `cells[c][i]` holds candidate `c`'s per-repetition scores on
//! instance `i`; missing instances are empty.

use crate::stats::{friedman, holm, sign_test_greater};

pub const RACING_ALPHA: f64 = 0.05;
/// Instances completed before the first elimination test.
pub const RACING_MIN_INSTANCES: usize = 4;

pub type Cells = Vec<Vec<Vec<f64>>>;

#[derive(Debug, Clone, PartialEq)]
pub struct RaceOutcome {
    pub cells: Cells,
    /// Instance count after which each candidate was eliminated.
    pub eliminated_after: Vec<Option<usize>>,
}

impl RaceOutcome {
    pub fn survivors(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&c| self.eliminated_after[c].is_none()).collect()
    }
}

/// Races `n_candidates` over `n_instances`. `eval(survivors, i)` returns
/// the per-repetition scores of each survivor on instance `i`. Protected
/// candidates are never eliminated.
pub fn race<E>(
    n_candidates: usize,
    n_instances: usize,
    protected: &[bool],
    mut eval: impl FnMut(&[usize], usize) -> Result<Vec<Vec<f64>>, E>,
) -> Result<RaceOutcome, E> {
    let mut cells: Cells = vec![vec![Vec::new(); n_instances]; n_candidates];
    let mut eliminated_after = vec![None; n_candidates];
    for i in 0..n_instances {
        let alive: Vec<usize> = (0..n_candidates).filter(|&c| eliminated_after[c].is_none()).collect();
        for (c, scores) in alive.iter().zip(eval(&alive, i)?) {
            cells[*c][i] = scores;
        }
        if i + 1 < RACING_MIN_INSTANCES || alive.len() < 2 {
            continue;
        }
        for c in eliminate(&cells, &alive, i + 1) {
            if !protected.get(c).copied().unwrap_or(false) {
                eliminated_after[c] = Some(i + 1);
            }
        }
    }
    Ok(RaceOutcome { cells, eliminated_after })
}

/// Candidates among `alive` that rank significantly worse than the
/// rank-best one over the first `done` instances.
fn eliminate(cells: &Cells, alive: &[usize], done: usize) -> Vec<usize> {
    let mut blocks: Vec<Vec<f64>> = Vec::new();
    for i in 0..done {
        let reps = alive.iter().map(|&c| cells[c][i].len()).min().unwrap_or(0);
        for r in 0..reps {
            blocks.push(alive.iter().map(|&c| cells[c][i][r]).collect());
        }
    }
    let Some(f) = friedman(&blocks) else { return Vec::new() };
    if f.p_value >= RACING_ALPHA {
        return Vec::new();
    }
    let best = (0..alive.len()).min_by(|&a, &b| f.mean_ranks[a].total_cmp(&f.mean_ranks[b])).unwrap();
    let column = |k: usize| -> Vec<f64> { blocks.iter().map(|row| row[k]).collect() };
    let others: Vec<usize> = (0..alive.len()).filter(|&k| k != best).collect();
    let p: Vec<f64> = others.iter().map(|&k| sign_test_greater(&column(k), &column(best))).collect();
    holm(&p)
        .into_iter()
        .zip(&others)
        .filter(|(adj, _)| *adj < RACING_ALPHA)
        .map(|(_, &k)| alive[k])
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntensifyOutcome {
    pub cells: Cells,
    pub rejected: Vec<bool>,
    pub incumbent: usize,
}

fn prefix_mean(cells: &[Vec<f64>], upto: usize) -> f64 {
    let v: Vec<f64> = cells[..upto].iter().flatten().copied().collect();
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

/// Challenger-versus-incumbent evaluation. The starting incumbent is
/// evaluated on every instance; each challenger in turn stops as soon as
/// its mean over the shared instance prefix exceeds the incumbent's, and
/// replaces the incumbent if it completes every instance (ties favour the
/// challenger).
pub fn intensify<E>(
    n_candidates: usize,
    n_instances: usize,
    incumbent: usize,
    mut eval: impl FnMut(usize, usize) -> Result<Vec<f64>, E>,
) -> Result<IntensifyOutcome, E> {
    let mut cells: Cells = vec![vec![Vec::new(); n_instances]; n_candidates];
    let mut rejected = vec![false; n_candidates];
    let mut inc = incumbent;
    for i in 0..n_instances {
        cells[inc][i] = eval(inc, i)?;
    }
    for c in (0..n_candidates).filter(|&c| c != incumbent) {
        for i in 0..n_instances {
            cells[c][i] = eval(c, i)?;
            if prefix_mean(&cells[c], i + 1) > prefix_mean(&cells[inc], i + 1) {
                rejected[c] = true;
                break;
            }
        }
        if !rejected[c] {
            inc = c;
        }
    }
    Ok(IntensifyOutcome { cells, rejected, incumbent: inc })
}
