//! The design loop: sample initial designs, disturb them with local moves,
//! periodically tune the best one's hyperparameters, and keep the best
//! candidates by training score. Finalists are scored on held-out test
//! instances at the end.

mod moves;
mod tune;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::Role;
use crate::evaluator::{CandidateScore, EvalError, EvalPlan, Evaluator, Method, ScoreStatus};
use crate::graph::AlgorithmGraph;
use crate::problems::ProblemInstance;
use crate::seed::derive_seed;
use crate::space::{DesignSpace, SpaceError};

pub use moves::{applicable_moves, apply_move, disturb, initialize_designs, Move, ARCHIVE_PROB};
pub use tune::{tune_hyperparams, tuning_lambda, Tuned, TUNING_SIGMA};

/// Non-improving iterations before moves escalate to strength 2.
pub const STAGNATION_WINDOW: usize = 5;
/// Tuning runs on iterations that are multiples of this.
pub const TUNING_PERIOD: usize = 10;

#[derive(Debug, Clone)]
pub struct DesignConfig {
    pub space: DesignSpace,
    pub plan: EvalPlan,
    pub n_candidates: usize,
    pub n_iterations: usize,
    /// Objective calls per tuning run.
    pub cmaes_budget: usize,
    pub master_seed: u64,
    pub test_instances: Vec<ProblemInstance>,
}

impl DesignConfig {
    pub fn new(space: DesignSpace, plan: EvalPlan) -> Self {
        Self { space, plan, n_candidates: 4, n_iterations: 50, cmaes_budget: 20, master_seed: 0, test_instances: Vec::new() }
    }

    pub fn check(&self) -> Result<(), DesignError> {
        if self.n_candidates == 0 {
            return Err(DesignError::Config("n_candidates must be at least 1".into()));
        }
        self.space.check()?;
        self.plan.check().map_err(|source| DesignError::Eval { stage: Stage::Initial, source })?;
        let train: BTreeSet<&str> = self.plan.instances.iter().map(|i| i.id.as_str()).collect();
        if let Some(dup) = self.test_instances.iter().find(|i| train.contains(i.id.as_str())) {
            return Err(DesignError::Config(format!("instance `{}` is both a training and a test instance", dup.id)));
        }
        let enc = self.space.encoding;
        if let Some(inst) = self.plan.instances.iter().chain(&self.test_instances).find(|i| i.problem.domain().encoding() != enc) {
            return Err(DesignError::Config(format!("instance `{}` is not a {enc} problem", inst.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Initial,
    Iteration(usize),
    Test,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stage::Initial => f.write_str("initial evaluation"),
            Stage::Iteration(i) => write!(f, "iteration {i}"),
            Stage::Test => f.write_str("test evaluation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DesignError {
    #[error("invalid design configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("design space has no allowed {0:?} component")]
    EmptySpaceRole(Role),
    #[error("no move applies to the graph in this design space")]
    NoApplicableMove,
    #[error("selection needs at least one candidate")]
    SizeZero,
    #[error("{stage}: {source}")]
    Eval { stage: Stage, source: EvalError },
}

fn status_class(s: ScoreStatus) -> u8 {
    match s {
        ScoreStatus::Exact => 0,
        ScoreStatus::Surrogate => 1,
        ScoreStatus::Eliminated | ScoreStatus::Rejected => 2,
    }
}

/// Selection order: exactly scored first, then lower aggregate, fewer
/// vertices and lower candidate index.
pub fn design_order(a: &(AlgorithmGraph, CandidateScore), b: &(AlgorithmGraph, CandidateScore)) -> Ordering {
    status_class(a.1.status)
        .cmp(&status_class(b.1.status))
        .then(a.1.aggregate.total_cmp(&b.1.aggregate))
        .then(a.0.vertices.len().cmp(&b.0.vertices.len()))
        .then(a.1.candidate.cmp(&b.1.candidate))
}

/// Keeps the best `n` of `current` and `challengers` under [`design_order`].
pub fn select_designs(
    current: Vec<(AlgorithmGraph, CandidateScore)>,
    challengers: Vec<(AlgorithmGraph, CandidateScore)>,
    n: usize,
) -> Result<Vec<(AlgorithmGraph, CandidateScore)>, DesignError> {
    if n == 0 || current.len() + challengers.len() == 0 {
        return Err(DesignError::SizeZero);
    }
    let mut all: Vec<_> = current.into_iter().chain(challengers).collect();
    all.sort_by(design_order);
    all.truncate(n);
    Ok(all)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Progress {
    pub iteration: usize,
    pub best_aggregate: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finalist {
    pub graph: AlgorithmGraph,
    pub training: CandidateScore,
    /// `None` without test instances.
    pub test: Option<CandidateScore>,
}

#[derive(Debug, Clone)]
pub struct DesignReport {
    /// Final incumbents, best first.
    pub finalists: Vec<Finalist>,
    /// `(iteration, best training aggregate)`, starting at iteration 0.
    pub convergence: Vec<(usize, f64)>,
    /// Training solve runs, tuning included.
    pub runs: usize,
    pub test_runs: usize,
    pub tuning_evaluations: usize,
    /// Incumbents whose topology differed from the fixed one, summed over
    /// iterations; always 0 in fixed-topology mode.
    pub topology_changes: usize,
    pub evaluation_log: String,
    pub test_log: String,
}

impl DesignReport {
    pub fn best(&self) -> &Finalist {
        &self.finalists[0]
    }

    pub fn convergence_csv(&self) -> String {
        let mut s = String::from("iteration,best_aggregate\n");
        for (i, b) in &self.convergence {
            s.push_str(&format!("{i},{b}\n"));
        }
        s
    }
}

type Scored = Vec<(AlgorithmGraph, CandidateScore)>;

fn score(ev: &mut Evaluator, graphs: Vec<AlgorithmGraph>, ids: &[usize], protected: &[bool], stage: Stage) -> Result<Scored, DesignError> {
    let racing_short = ev.plan.method == Method::Racing && graphs.len() < 2;
    let scores = if racing_short { ev.exhaustive(&graphs, ids) } else { ev.evaluate(&graphs, ids, protected) };
    let scores = scores.map_err(|source| DesignError::Eval { stage, source })?;
    Ok(graphs.into_iter().zip(scores).collect())
}

pub fn design(config: &DesignConfig) -> Result<DesignReport, DesignError> {
    design_with(config, |_| {})
}

/// [`design`] with a callback after the initial evaluation and each
/// iteration.
pub fn design_with(config: &DesignConfig, mut progress: impl FnMut(&Progress)) -> Result<DesignReport, DesignError> {
    config.check()?;
    let space = &config.space;
    let n = config.n_candidates;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, &[0]));
    let mut plan = config.plan.clone();
    plan.master_seed = derive_seed(config.master_seed, &[1]);
    let mut ev = Evaluator::new(plan).map_err(|source| DesignError::Eval { stage: Stage::Initial, source })?;

    let initial = initialize_designs(space, n, &mut rng)?;
    let ids: Vec<usize> = (0..n).collect();
    let scored = score(&mut ev, initial, &ids, &[], Stage::Initial)?;
    let mut incumbents = select_designs(Vec::new(), scored, n)?;
    let mut next_id = n;
    let mut best = incumbents[0].1.aggregate;
    let mut convergence = vec![(0, best)];
    progress(&Progress { iteration: 0, best_aggregate: best, runs: ev.runs });

    let mut stagnation = 0;
    let mut tuning_evaluations = 0;
    let mut topology_changes = 0;
    for it in 1..=config.n_iterations {
        let stage = Stage::Iteration(it);
        let strength = if stagnation >= STAGNATION_WINDOW { 2 } else { 1 };
        let mut challengers = Vec::with_capacity(n + 1);
        for (g, _) in &incumbents {
            challengers.push(match disturb(g, space, &mut rng, strength) {
                Err(DesignError::NoApplicableMove) => g.clone(),
                other => other?,
            });
        }
        if it % TUNING_PERIOD == 0 {
            let tune_id = next_id + challengers.len();
            let tuned = tune_hyperparams(&incumbents[0].0, space, config.cmaes_budget, &mut rng, |g| {
                ev.exhaustive_with_reps(std::slice::from_ref(g), &[tune_id], 1).map(|s| s[0].aggregate)
            })
            .map_err(|source| DesignError::Eval { stage, source })?;
            tuning_evaluations += tuned.evaluations;
            challengers.push(tuned.graph);
        }
        let ids: Vec<usize> = (next_id..next_id + challengers.len()).collect();
        next_id += challengers.len();

        incumbents = match ev.plan.method {
            Method::Racing | Method::Intensification => {
                // incumbents race alongside and are protected from elimination
                let k = incumbents.len();
                let graphs: Vec<AlgorithmGraph> = incumbents.iter().map(|c| c.0.clone()).chain(challengers).collect();
                let all_ids: Vec<usize> = incumbents.iter().map(|c| c.1.candidate).chain(ids).collect();
                let protected: Vec<bool> = (0..graphs.len()).map(|i| i < k).collect();
                let mut union = score(&mut ev, graphs, &all_ids, &protected, stage)?;
                let rest = union.split_off(k);
                select_designs(union, rest, n)?
            }
            Method::Exhaustive | Method::Approximate => {
                let new = score(&mut ev, challengers, &ids, &[], stage)?;
                select_designs(incumbents, new, n)?
            }
        };

        let now = incumbents[0].1.aggregate;
        if now < best {
            best = now;
            stagnation = 0;
        } else {
            stagnation += 1;
        }
        convergence.push((it, best));
        if let Some(fixed) = &space.fixed_topology {
            topology_changes += incumbents.iter().filter(|c| !c.0.same_topology(fixed)).count();
        }
        progress(&Progress { iteration: it, best_aggregate: best, runs: ev.runs });
    }

    let (tests, test_runs, test_log) = if config.test_instances.is_empty() {
        (vec![None; incumbents.len()], 0, String::new())
    } else {
        let mut plan = ev.plan.clone();
        plan.instances = config.test_instances.clone();
        plan.method = Method::Exhaustive;
        plan.master_seed = derive_seed(config.master_seed, &[2]);
        let mut test_ev = Evaluator::new(plan).map_err(|source| DesignError::Eval { stage: Stage::Test, source })?;
        let graphs: Vec<AlgorithmGraph> = incumbents.iter().map(|c| c.0.clone()).collect();
        let ids: Vec<usize> = incumbents.iter().map(|c| c.1.candidate).collect();
        let scores = test_ev.exhaustive(&graphs, &ids).map_err(|source| DesignError::Eval { stage: Stage::Test, source })?;
        (scores.into_iter().map(Some).collect(), test_ev.runs, test_ev.log_csv())
    };

    Ok(DesignReport {
        finalists: incumbents
            .into_iter()
            .zip(tests)
            .map(|((graph, training), test)| Finalist { graph, training, test })
            .collect(),
        convergence,
        runs: ev.runs,
        test_runs,
        tuning_evaluations,
        topology_changes,
        evaluation_log: ev.log_csv(),
        test_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Encoding;
    use crate::executor::SolveConfig;
    use crate::presets;
    use crate::problems::{build_instances, InstanceRole, ProblemConfig};
    use crate::space::build_default_space;
    use rand::Rng;

    fn cand(id: usize, agg: f64, vertices: usize) -> (AlgorithmGraph, CandidateScore) {
        let mut g = presets::ris_designed();
        g.vertices.truncate(vertices);
        let s = CandidateScore { candidate: id, cells: Vec::new(), aggregate: agg, evaluations_spent: 0, status: ScoreStatus::Exact };
        (g, s)
    }

    #[test]
    fn worse_challengers_leave_current_unchanged() {
        let cur = vec![cand(0, 1.0, 4), cand(1, 2.0, 4)];
        let ch = vec![cand(2, 3.0, 4), cand(3, 2.5, 4)];
        let sel = select_designs(cur.clone(), ch, 2).unwrap();
        assert_eq!(sel, cur);
    }

    #[test]
    fn tie_prefers_fewer_vertices() {
        let sel = select_designs(vec![cand(0, 1.0, 4)], vec![cand(1, 1.0, 3)], 1).unwrap();
        assert_eq!(sel[0].1.candidate, 1);
        assert_eq!(select_designs(vec![], vec![], 1), Err(DesignError::SizeZero));
    }

    #[test]
    fn selection_matches_sorting_oracle() {
        let mut r = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let a = r.random_range(1..6);
            let b = r.random_range(0..6);
            let n = r.random_range(1..8);
            let mk = |i: usize, r: &mut ChaCha8Rng| cand(i, r.random_range(0..4) as f64, r.random_range(3..5));
            let cur: Vec<_> = (0..a).map(|i| mk(i, &mut r)).collect();
            let ch: Vec<_> = (a..a + b).map(|i| mk(i, &mut r)).collect();
            // oracle: lexicographic key over (aggregate, vertices, index)
            let mut keys: Vec<(u64, usize, usize)> = cur
                .iter()
                .chain(&ch)
                .map(|c| (c.1.aggregate as u64, c.0.vertices.len(), c.1.candidate))
                .collect();
            keys.sort();
            keys.truncate(n);
            let sel = select_designs(cur, ch, n).unwrap();
            let got: Vec<usize> = sel.iter().map(|c| c.1.candidate).collect();
            assert_eq!(got, keys.iter().map(|k| k.2).collect::<Vec<_>>());
        }
    }

    fn small_config(iterations: usize, method: Method) -> DesignConfig {
        let problem = ProblemConfig { name: "onemax".into(), dim: 20, ..Default::default() };
        let train = build_instances(&problem, InstanceRole::Training, 2, 1).unwrap();
        let test = build_instances(&problem, InstanceRole::Test, 2, 1).unwrap();
        let mut plan = EvalPlan::new(train, SolveConfig { pop_size: 10, max_fe: 300, seed: 0, record_every: None });
        plan.reps = 2;
        plan.method = method;
        let mut c = DesignConfig::new(build_default_space(Encoding::Discrete), plan);
        c.n_iterations = iterations;
        c.n_candidates = 3;
        c.cmaes_budget = 6;
        c.master_seed = 5;
        c.test_instances = test;
        c
    }

    #[test]
    fn zero_iterations_reports_initial_candidates() {
        let r = design(&small_config(0, Method::Exhaustive)).unwrap();
        assert_eq!(r.finalists.len(), 3);
        assert_eq!(r.convergence.len(), 1);
        assert!(r.finalists.iter().all(|f| f.test.as_ref().unwrap().cells.len() == 4));
        assert_eq!(r.runs, 12);
        assert_eq!(r.test_runs, 12);
    }

    #[test]
    fn loop_is_elitist_deterministic_and_tunes() {
        let c = small_config(10, Method::Exhaustive);
        let mut lines = 0;
        let a = design_with(&c, |_| lines += 1).unwrap();
        assert_eq!(lines, 11);
        assert!(a.convergence.windows(2).all(|w| w[1].1 <= w[0].1));
        assert_eq!(a.tuning_evaluations, 6);
        let rows = a.evaluation_log.lines().count() - 1;
        assert_eq!(rows, a.runs);
        let b = design(&c).unwrap();
        assert_eq!(a.convergence, b.convergence);
        assert_eq!(a.best().graph, b.best().graph);
    }

    #[test]
    fn racing_and_intensification_loops_run() {
        for m in [Method::Racing, Method::Intensification, Method::Approximate] {
            let r = design(&small_config(4, m)).unwrap();
            assert!(r.convergence.windows(2).all(|w| w[1].1 <= w[0].1), "{m}");
            assert_eq!(r.best().training.status, ScoreStatus::Exact);
        }
    }

    #[test]
    fn fixed_topology_never_changes() {
        let mut c = small_config(6, Method::Exhaustive);
        c.space = c.space.with_fixed_topology(presets::stacking_designed(), None);
        let r = design(&c).unwrap();
        assert_eq!(r.topology_changes, 0);
        assert!(r.finalists.iter().all(|f| f.graph.same_topology(&presets::stacking_designed())));
    }

    #[test]
    fn overlapping_instances_rejected() {
        let mut c = small_config(0, Method::Exhaustive);
        c.test_instances = c.plan.instances.clone();
        assert!(matches!(design(&c), Err(DesignError::Config(_))));
    }
}
