//! Design objectives and evaluation methods for scoring candidate graphs on
//! training instances.
//!
//! Every (candidate, instance, repetition) cell is one solve run seeded from
//! `(master_seed, instance, repetition)`, so candidates share random numbers
//! on each cell and identical graphs get identical scores. Finished runs are
//! cached by graph, so re-scoring an already evaluated graph is free.

pub mod objectives;
pub mod racing;
pub mod surrogate;

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::UnknownName;
use crate::executor::{solve, SolveConfig, SolveError, TrajectoryPoint};
use crate::graph::AlgorithmGraph;
use crate::problems::ProblemInstance;
use crate::seed::derive_seed;
use crate::serial::to_json;

pub use objectives::{score_auc, score_quality, score_runtime_fe, score_runtime_sec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    #[serde(rename = "quality")]
    Quality,
    #[serde(rename = "runtimeFE")]
    RuntimeFe,
    #[serde(rename = "runtimeSec")]
    RuntimeSec,
    #[serde(rename = "auc")]
    Auc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Racing,
    Intensification,
    Approximate,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Quality => "quality",
            Objective::RuntimeFe => "runtimeFE",
            Objective::RuntimeSec => "runtimeSec",
            Objective::Auc => "auc",
        })
    }
}

impl FromStr for Objective {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "quality" => Ok(Objective::Quality),
            "runtimefe" => Ok(Objective::RuntimeFe),
            "runtimesec" => Ok(Objective::RuntimeSec),
            "auc" => Ok(Objective::Auc),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exhaustive => "exhaustive",
            Method::Racing => "racing",
            Method::Intensification => "intensification",
            Method::Approximate => "approximate",
        })
    }
}

impl FromStr for Method {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exhaustive" => Ok(Method::Exhaustive),
            "racing" => Ok(Method::Racing),
            "intensification" => Ok(Method::Intensification),
            "approximate" => Ok(Method::Approximate),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalPlan {
    pub objective: Objective,
    pub method: Method,
    pub instances: Vec<ProblemInstance>,
    pub reps: usize,
    /// Per-run settings; the seed is replaced by each cell's derived seed.
    pub solve: SolveConfig,
    /// Required for the runtime objectives.
    pub threshold: Option<f64>,
    /// AUC targets; derived per instance from the run pool when absent.
    pub targets: Option<Vec<f64>>,
    pub master_seed: u64,
}

impl EvalPlan {
    pub fn new(instances: Vec<ProblemInstance>, solve: SolveConfig) -> Self {
        Self {
            objective: Objective::Quality,
            method: Method::Exhaustive,
            instances,
            reps: 3,
            solve,
            threshold: None,
            targets: None,
            master_seed: 0,
        }
    }

    pub fn check(&self) -> Result<(), EvalError> {
        let runtime = matches!(self.objective, Objective::RuntimeFe | Objective::RuntimeSec);
        if runtime != self.threshold.is_some() {
            return Err(EvalError::Config(if runtime {
                format!("objective {} needs a threshold", self.objective)
            } else {
                format!("a threshold only applies to runtime objectives, not {}", self.objective)
            }));
        }
        if self.reps == 0 {
            return Err(EvalError::Config("reps must be at least 1".into()));
        }
        if self.instances.is_empty() {
            return Err(EvalError::Config("no training instances".into()));
        }
        if let Some(t) = &self.targets {
            if t.is_empty() || t.iter().any(|v| !v.is_finite()) {
                return Err(EvalError::EmptyTargets);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreStatus {
    /// Every cell evaluated.
    Exact,
    /// Aggregate predicted by the surrogate.
    Surrogate,
    /// Dropped by a racing test; aggregate covers completed cells only.
    Eliminated,
    /// Stopped by intensification; aggregate covers completed cells only.
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub instance: usize,
    pub rep: usize,
    pub score: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateScore {
    pub candidate: usize,
    pub cells: Vec<Cell>,
    /// Mean cell score; lower is better.
    pub aggregate: f64,
    /// Solve runs performed for this candidate in this call.
    pub evaluations_spent: usize,
    pub status: ScoreStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub candidate: usize,
    pub instance: String,
    pub rep: Option<usize>,
    pub score: f64,
    pub censored: bool,
    pub surrogate: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("invalid evaluation plan: {0}")]
    Config(String),
    #[error("racing needs at least 2 candidates, got {0}")]
    TooFewCandidates(usize),
    #[error("AUC targets must be a non-empty list of finite values")]
    EmptyTargets,
    #[error("candidate {candidate}, instance {instance}, rep {rep}: {source}")]
    Solve { candidate: usize, instance: String, rep: usize, source: SolveError },
}

#[derive(Debug, Clone)]
struct RunSummary {
    trajectory: Vec<TrajectoryPoint>,
    times: Vec<f64>,
    elapsed: f64,
}

/// Scores candidates under an [`EvalPlan`], caching runs and keeping the
/// evaluation log and surrogate history.
#[derive(Debug)]
pub struct Evaluator {
    pub plan: EvalPlan,
    cache: HashMap<(String, usize, usize), RunSummary>,
    targets: Vec<Option<Vec<f64>>>,
    history: Vec<(String, Vec<f64>, f64)>,
    /// Solve runs performed so far.
    pub runs: usize,
    pub log: Vec<LogRow>,
}

impl Evaluator {
    pub fn new(plan: EvalPlan) -> Result<Self, EvalError> {
        plan.check()?;
        let n = plan.instances.len();
        Ok(Self { plan, cache: HashMap::new(), targets: vec![None; n], history: Vec::new(), runs: 0, log: Vec::new() })
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    /// Scores `candidates` with the plan's method. `ids` label the
    /// candidates in scores and logs; `protected` candidates are never
    /// eliminated by racing, and the first protected candidate is the
    /// intensification incumbent.
    pub fn evaluate(
        &mut self,
        candidates: &[AlgorithmGraph],
        ids: &[usize],
        protected: &[bool],
    ) -> Result<Vec<CandidateScore>, EvalError> {
        match self.plan.method {
            Method::Exhaustive => self.exhaustive(candidates, ids),
            Method::Racing => self.racing(candidates, ids, protected),
            Method::Intensification => {
                let inc = protected.iter().position(|&p| p).unwrap_or(0);
                self.intensification(candidates, ids, inc)
            }
            Method::Approximate => self.approximate(candidates, ids),
        }
    }

    /// Runs every missing `(graph, instance, rep)` job, in parallel.
    /// Returns how many runs each job's candidate triggered.
    fn ensure(&mut self, jobs: &[(usize, &AlgorithmGraph, usize, usize)], ids: &[usize]) -> Result<Vec<usize>, EvalError> {
        let mut fresh_count = vec![0; ids.len()];
        let mut todo: Vec<(usize, String, &AlgorithmGraph, usize, usize)> = Vec::new();
        for &(c, g, i, r) in jobs {
            let key = to_json(g);
            let k = (key.clone(), i, r);
            if !self.cache.contains_key(&k) && !todo.iter().any(|t| t.1 == key && t.3 == i && t.4 == r) {
                todo.push((c, key, g, i, r));
            }
        }
        let plan = &self.plan;
        let results: Vec<Result<RunSummary, EvalError>> = todo
            .par_iter()
            .map(|&(c, _, g, i, r)| {
                let inst = &plan.instances[i];
                let cfg = SolveConfig { seed: derive_seed(plan.master_seed, &[i as u64, r as u64]), ..plan.solve };
                solve(g, inst.problem.as_ref(), &cfg)
                    .map(|rec| RunSummary { trajectory: rec.trajectory, times: rec.times, elapsed: rec.elapsed_seconds })
                    .map_err(|source| EvalError::Solve { candidate: ids[c], instance: inst.id.clone(), rep: r, source })
            })
            .collect();
        for ((c, key, _, i, r), res) in todo.into_iter().zip(results) {
            let summary = res?;
            self.runs += 1;
            fresh_count[c] += 1;
            self.cache.insert((key.clone(), i, r), summary);
            let (score, censored) = self.cell_score(&key, i, r);
            self.log.push(LogRow {
                candidate: ids[c],
                instance: self.plan.instances[i].id.clone(),
                rep: Some(r),
                score,
                censored,
                surrogate: false,
            });
        }
        Ok(fresh_count)
    }

    fn cell_score(&mut self, key: &str, instance: usize, rep: usize) -> (f64, bool) {
        let run = &self.cache[&(key.to_string(), instance, rep)];
        let budget = self.plan.solve.max_fe;
        match self.plan.objective {
            Objective::Quality => (score_quality(&run.trajectory), false),
            Objective::RuntimeFe => score_runtime_fe(&run.trajectory, self.plan.threshold.unwrap(), budget),
            Objective::RuntimeSec => score_runtime_sec(&run.trajectory, &run.times, self.plan.threshold.unwrap(), run.elapsed),
            Objective::Auc => {
                let trajectory = run.trajectory.clone();
                let targets = self.auc_targets(instance);
                let checkpoints = objectives::auc_checkpoints(self.plan.solve.pop_size, budget);
                (-score_auc(&trajectory, &targets, &checkpoints), false)
            }
        }
    }

    /// Targets fixed at first use from the runs cached for `instance`.
    fn auc_targets(&mut self, instance: usize) -> Vec<f64> {
        if let Some(t) = &self.plan.targets {
            return t.clone();
        }
        if let Some(t) = &self.targets[instance] {
            return t.clone();
        }
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for ((_, i, _), run) in &self.cache {
            if *i == instance {
                hi = hi.max(run.trajectory[0].best);
                lo = lo.min(score_quality(&run.trajectory));
            }
        }
        let t = objectives::default_targets(hi, lo);
        self.targets[instance] = Some(t.clone());
        t
    }

    fn score(
        &mut self,
        graph: &AlgorithmGraph,
        id: usize,
        instances: usize,
        reps: usize,
        spent: usize,
        status: ScoreStatus,
    ) -> CandidateScore {
        let key = to_json(graph);
        let mut cells = Vec::new();
        for i in 0..instances {
            for r in 0..reps {
                if self.cache.contains_key(&(key.clone(), i, r)) {
                    let (score, censored) = self.cell_score(&key, i, r);
                    cells.push(Cell { instance: i, rep: r, score, censored });
                }
            }
        }
        let aggregate = cells.iter().map(|c| c.score).sum::<f64>() / cells.len().max(1) as f64;
        if status == ScoreStatus::Exact && reps == self.plan.reps && !self.history.iter().any(|h| h.0 == key) {
            self.history.push((key, surrogate::features(graph), aggregate));
        }
        CandidateScore { candidate: id, cells, aggregate, evaluations_spent: spent, status }
    }

    pub fn exhaustive(&mut self, candidates: &[AlgorithmGraph], ids: &[usize]) -> Result<Vec<CandidateScore>, EvalError> {
        self.exhaustive_with_reps(candidates, ids, self.plan.reps)
    }

    /// Exhaustive evaluation with a custom repetition count.
    pub fn exhaustive_with_reps(
        &mut self,
        candidates: &[AlgorithmGraph],
        ids: &[usize],
        reps: usize,
    ) -> Result<Vec<CandidateScore>, EvalError> {
        let n_inst = self.plan.instances.len();
        let mut jobs = Vec::new();
        for (c, g) in candidates.iter().enumerate() {
            for i in 0..n_inst {
                for r in 0..reps {
                    jobs.push((c, g, i, r));
                }
            }
        }
        let spent = self.ensure(&jobs, ids)?;
        Ok(candidates
            .iter()
            .enumerate()
            .map(|(c, g)| self.score(g, ids[c], n_inst, reps, spent[c], ScoreStatus::Exact))
            .collect())
    }

    pub fn racing(
        &mut self,
        candidates: &[AlgorithmGraph],
        ids: &[usize],
        protected: &[bool],
    ) -> Result<Vec<CandidateScore>, EvalError> {
        if candidates.len() < 2 {
            return Err(EvalError::TooFewCandidates(candidates.len()));
        }
        let (n_inst, reps) = (self.plan.instances.len(), self.plan.reps);
        let mut spent = vec![0; candidates.len()];
        let outcome = racing::race(candidates.len(), n_inst, protected, |alive, i| {
            let jobs: Vec<_> = alive.iter().flat_map(|&c| (0..reps).map(move |r| (c, &candidates[c], i, r))).collect();
            for (s, f) in spent.iter_mut().zip(self.ensure(&jobs, ids)?) {
                *s += f;
            }
            Ok(alive
                .iter()
                .map(|&c| {
                    let key = to_json(&candidates[c]);
                    (0..reps).map(|r| self.cell_score(&key, i, r).0).collect()
                })
                .collect())
        })?;
        Ok(candidates
            .iter()
            .enumerate()
            .map(|(c, g)| match outcome.eliminated_after[c] {
                None => self.score(g, ids[c], n_inst, reps, spent[c], ScoreStatus::Exact),
                Some(done) => self.score(g, ids[c], done, reps, spent[c], ScoreStatus::Eliminated),
            })
            .collect())
    }

    pub fn intensification(
        &mut self,
        candidates: &[AlgorithmGraph],
        ids: &[usize],
        incumbent: usize,
    ) -> Result<Vec<CandidateScore>, EvalError> {
        let (n_inst, reps) = (self.plan.instances.len(), self.plan.reps);
        let mut spent = vec![0; candidates.len()];
        let outcome = racing::intensify(candidates.len(), n_inst, incumbent, |c, i| {
            let jobs: Vec<_> = (0..reps).map(|r| (c, &candidates[c], i, r)).collect();
            for (s, f) in spent.iter_mut().zip(self.ensure(&jobs, ids)?) {
                *s += f;
            }
            let key = to_json(&candidates[c]);
            Ok((0..reps).map(|r| self.cell_score(&key, i, r).0).collect())
        })?;
        Ok(candidates
            .iter()
            .enumerate()
            .map(|(c, g)| {
                if outcome.rejected[c] {
                    let done = outcome.cells[c].iter().filter(|x| !x.is_empty()).count();
                    self.score(g, ids[c], done, reps, spent[c], ScoreStatus::Rejected)
                } else {
                    self.score(g, ids[c], n_inst, reps, spent[c], ScoreStatus::Exact)
                }
            })
            .collect())
    }

    /// Surrogate-assisted evaluation; falls back to exhaustive evaluation
    /// until the history holds enough exactly scored candidates.
    pub fn approximate(&mut self, candidates: &[AlgorithmGraph], ids: &[usize]) -> Result<Vec<CandidateScore>, EvalError> {
        if self.history.len() < surrogate::MIN_HISTORY {
            return self.exhaustive(candidates, ids);
        }
        let hist: Vec<(Vec<f64>, f64)> = self.history.iter().map(|h| (h.1.clone(), h.2)).collect();
        let pred: Vec<f64> = candidates
            .iter()
            .map(|g| surrogate::knn_predict(&hist, &surrogate::features(g), surrogate::NEIGHBOURS))
            .collect();
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| pred[a].total_cmp(&pred[b]).then(a.cmp(&b)));
        let exact: Vec<usize> = order[..surrogate::exact_quota(candidates.len())].to_vec();
        let graphs: Vec<AlgorithmGraph> = exact.iter().map(|&c| candidates[c].clone()).collect();
        let exact_ids: Vec<usize> = exact.iter().map(|&c| ids[c]).collect();
        let scored = self.exhaustive(&graphs, &exact_ids)?;
        let mut out: Vec<Option<CandidateScore>> = vec![None; candidates.len()];
        for (&c, s) in exact.iter().zip(scored) {
            out[c] = Some(s);
        }
        for c in 0..candidates.len() {
            if out[c].is_none() {
                self.log.push(LogRow {
                    candidate: ids[c],
                    instance: String::new(),
                    rep: None,
                    score: pred[c],
                    censored: false,
                    surrogate: true,
                });
                out[c] = Some(CandidateScore {
                    candidate: ids[c],
                    cells: Vec::new(),
                    aggregate: pred[c],
                    evaluations_spent: 0,
                    status: ScoreStatus::Surrogate,
                });
            }
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    }

    /// CSV with header `candidate,instance,rep,score,censored,surrogate`.
    pub fn log_csv(&self) -> String {
        let mut s = String::from("candidate,instance,rep,score,censored,surrogate\n");
        for row in &self.log {
            let rep = row.rep.map(|r| r.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{},{}", row.candidate, row.instance, rep, row.score, row.censored, row.surrogate);
        }
        s
    }
}
