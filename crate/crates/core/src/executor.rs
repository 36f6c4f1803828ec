//! Interprets an algorithm graph to solve one problem instance.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::catalog::Role;
use crate::components::{self, ArchiveState, ComponentError, Solution, SolverRng, VertexState};
use crate::graph::{validate_structure, AlgorithmGraph, InvalidGraph, VertexId};
use crate::problems::{Problem, ProblemError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub pop_size: usize,
    pub max_fe: usize,
    pub seed: u64,
    /// Record the best-so-far fitness every this many FEs; `None` means
    /// every `pop_size` FEs.
    pub record_every: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { pop_size: 50, max_fe: 5000, seed: 0, record_every: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub fe: usize,
    pub best: f64,
}

#[derive(Debug, Clone)]
pub struct SolveRecord {
    /// Strictly increasing FE, non-increasing best fitness.
    pub trajectory: Vec<TrajectoryPoint>,
    /// Wall-clock seconds at which each trajectory point was recorded.
    pub times: Vec<f64>,
    pub best: Solution,
    pub final_pop: Vec<Solution>,
    pub archives: Vec<(VertexId, ArchiveState)>,
    pub evaluations: usize,
    pub iterations: usize,
    pub elapsed_seconds: f64,
}

impl SolveRecord {
    pub fn final_best(&self) -> f64 {
        self.trajectory.last().expect("non-empty trajectory").best
    }

    /// CSV with header `fe,best_fitness`.
    pub fn trajectory_csv(&self) -> String {
        let mut s = String::from("fe,best_fitness\n");
        for p in &self.trajectory {
            let _ = writeln!(s, "{},{}", p.fe, p.best);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid solve configuration: {0}")]
    Config(String),
    #[error(transparent)]
    InvalidGraph(#[from] InvalidGraph),
    #[error("graph encoding {graph} does not match problem encoding {problem}")]
    EncodingMismatch { graph: crate::catalog::Encoding, problem: crate::catalog::Encoding },
    #[error("vertex {vertex}: {source}")]
    Component { vertex: VertexId, source: ComponentError },
    #[error("evaluation failed after {fe} FEs: {source}")]
    Evaluation { fe: usize, source: ProblemError },
}

struct Run<'a> {
    graph: &'a AlgorithmGraph,
    problem: &'a dyn Problem,
    rng: SolverRng,
    states: BTreeMap<VertexId, VertexState>,
    fe: usize,
    max_fe: usize,
    record_every: usize,
    best: Option<Solution>,
    trajectory: Vec<TrajectoryPoint>,
    times: Vec<f64>,
    start: Instant,
}

impl Run<'_> {
    fn evaluate(&mut self, genome: components::Genome, birth: usize) -> Result<Solution, SolveError> {
        let mut s = self.problem.solution(genome).map_err(|source| SolveError::Evaluation { fe: self.fe, source })?;
        s.birth = birth;
        self.fe += 1;
        if self.best.as_ref().is_none_or(|b| s.fitness < b.fitness) {
            self.best = Some(s.clone());
        }
        if self.fe % self.record_every == 0 {
            self.record();
        }
        Ok(s)
    }

    fn record(&mut self) {
        let best = self.best.as_ref().expect("evaluated").fitness;
        if self.trajectory.last().is_none_or(|p| p.fe < self.fe) {
            self.trajectory.push(TrajectoryPoint { fe: self.fe, best });
            self.times.push(self.start.elapsed().as_secs_f64());
        }
    }

    /// Runs the Search subtree rooted at `vertex` on `input`, appending one
    /// offspring set per reached pathway end.
    fn descend(&mut self, vertex: VertexId, input: Vec<Solution>, out: &mut Vec<Vec<Solution>>) -> Result<(), SolveError> {
        let v = self.graph.vertex(vertex).expect("validated");
        let next = match v.role() {
            Role::Update => {
                out.push(input);
                return Ok(());
            }
            Role::Search => {
                let mut cur = input;
                for _ in 0..v.loop_count {
                    cur = self.apply_search(vertex, cur)?;
                }
                cur
            }
            _ => input,
        };
        let mut succ: Vec<VertexId> = self
            .graph
            .successors(vertex)
            .into_iter()
            .filter(|s| self.graph.vertex(*s).is_some_and(|x| x.role() != Role::Archive))
            .collect();
        succ.sort_unstable();
        for s in succ {
            self.descend(s, next.clone(), out)?;
        }
        Ok(())
    }

    fn apply_search(&mut self, vertex: VertexId, mut parents: Vec<Solution>) -> Result<Vec<Solution>, SolveError> {
        let v = self.graph.vertex(vertex).expect("validated");
        let n = parents.len();
        // crossover pads an odd parent set with a random duplicate
        if v.component.is_crossover() && n % 2 == 1 {
            let extra = parents[self.rng.random_range(0..n)].clone();
            parents.push(extra);
        }
        let state = self.states.entry(vertex).or_default();
        let mut off = components::search(v.component, &parents, &v.params, self.problem.domain(), &mut self.rng, state)
            .map_err(|source| SolveError::Component { vertex, source })?;
        off.truncate(n);
        Ok(off)
    }
}

/// Runs `graph` on `problem` until `config.max_fe` evaluations are spent.
pub fn solve(graph: &AlgorithmGraph, problem: &dyn Problem, config: &SolveConfig) -> Result<SolveRecord, SolveError> {
    let start = Instant::now();
    let n = config.pop_size;
    if n < 2 {
        return Err(SolveError::Config(format!("population size must be at least 2, got {n}")));
    }
    if config.max_fe < n {
        return Err(SolveError::Config(format!("max_fe {} is below the population size {n}", config.max_fe)));
    }
    let report = validate_structure(graph);
    if !report.is_valid() {
        return Err(InvalidGraph(report).into());
    }
    let domain_enc = problem.domain().encoding();
    if graph.encoding != domain_enc {
        return Err(SolveError::EncodingMismatch { graph: graph.encoding, problem: domain_enc });
    }

    let mut run = Run {
        graph,
        problem,
        rng: SolverRng::seed_from_u64(config.seed),
        states: BTreeMap::new(),
        fe: 0,
        max_fe: config.max_fe,
        record_every: config.record_every.unwrap_or(n).max(1),
        best: None,
        trajectory: Vec::new(),
        times: Vec::new(),
        start,
    };
    let choose = graph.vertex(graph.entry).expect("validated");
    let update = graph.vertex(graph.update_id().expect("validated")).expect("validated");
    let mut archives: Vec<(VertexId, ArchiveState)> = graph
        .vertices
        .iter()
        .filter(|v| v.role() == Role::Archive)
        .map(|v| (v.id, ArchiveState::new(v.component, &v.params)))
        .collect();

    let mut pop = Vec::with_capacity(n);
    for _ in 0..n {
        let g = problem.domain().random_genome(&mut run.rng);
        pop.push(run.evaluate(g, 0)?);
    }
    for (_, a) in &mut archives {
        a.observe(&pop);
    }

    let mut iteration = 0;
    while run.fe < run.max_fe {
        iteration += 1;
        let idx = components::choose(choose.component, &pop, &choose.params, &mut run.rng)
            .map_err(|source| SolveError::Component { vertex: choose.id, source })?;
        let parents: Vec<Solution> = idx.into_iter().map(|i| pop[i].clone()).collect();

        let mut branches = Vec::new();
        run.descend(choose.id, parents, &mut branches)?;
        let mut pool: Vec<Solution> = branches.into_iter().flatten().collect();
        if pool.len() > n {
            let mut keep = sample(&mut run.rng, pool.len(), n).into_vec();
            keep.sort_unstable();
            pool = keep.into_iter().map(|i| pool[i].clone()).collect();
        }
        while pool.len() < n {
            let extra = pool[run.rng.random_range(0..pool.len())].clone();
            pool.push(extra);
        }

        let mut tabu: Vec<bool> =
            pool.iter().map(|c| archives.iter().any(|(_, a)| a.is_tabu(&c.genome))).collect();
        // an all-tabu pool would spend no evaluations and never terminate
        if tabu.iter().all(|&t| t) {
            tabu.fill(false);
        }
        let mut offspring = Vec::with_capacity(n);
        for (i, child) in pool.into_iter().enumerate() {
            if tabu[i] || run.fe >= run.max_fe {
                offspring.push(pop[i].clone());
            } else {
                offspring.push(run.evaluate(child.genome, iteration)?);
            }
        }

        pop = components::update(update.component, &pop, &offspring, &update.params, iteration, &mut run.rng)
            .map_err(|source| SolveError::Component { vertex: update.id, source })?;
        let accepted: Vec<Solution> = pop.iter().filter(|s| s.birth == iteration).cloned().collect();
        for (_, a) in &mut archives {
            a.observe(&accepted);
        }
    }
    run.record();

    Ok(SolveRecord {
        trajectory: run.trajectory,
        times: run.times,
        best: run.best.expect("population evaluated"),
        final_pop: pop,
        archives,
        evaluations: run.fe,
        iterations: iteration,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
