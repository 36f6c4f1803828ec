//! Run configuration: defaults, then JSON config-file keys, then flags.
//!
//! Config files are flat JSON objects with dotted keys, e.g.
//! `{"problem.name": "onemax", "plan.method": "racing"}`. Every key has a
//! matching flag listed in [`KEYS`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use metadesign::evaluator::{Method, Objective};
use metadesign::executor::SolveConfig;
use metadesign::problems::{ProblemConfig, PROBLEM_NAMES};

pub const OUTPUT_ENV: &str = "METADESIGN_OUTPUT_DIR";
pub const DEFAULT_OUTPUT: &str = "metadesign-out";

/// Config-file key and the flag that sets it.
pub const KEYS: &[(&str, &str)] = &[
    ("problem.name", "--problem"),
    ("problem.dim", "--dim"),
    ("problem.elements", "--n"),
    ("problem.antennas", "--antennas"),
    ("problem.users", "--users"),
    ("problem.bits", "--bits"),
    ("problem.power", "--power"),
    ("problem.noise", "--noise"),
    ("instances.seed", "--instance-seed"),
    ("instances.train", "--train"),
    ("instances.test", "--test"),
    ("instances.solve", "--instances"),
    ("design.n_candidates", "--n-candidates"),
    ("design.n_iterations", "--n-iterations"),
    ("design.cmaes_budget", "--cmaes-budget"),
    ("design.master_seed", "--seed"),
    ("design.max_search", "--max-search"),
    ("design.max_pathways", "--max-pathways"),
    ("design.fixed_topology", "--fixed-topology"),
    ("design.tunable", "--tunable"),
    ("plan.objective", "--objective"),
    ("plan.method", "--method"),
    ("plan.reps", "--reps"),
    ("plan.threshold", "--threshold"),
    ("plan.targets", "--targets"),
    ("solve.algorithm", "--algorithm"),
    ("solve.baseline", "--baseline"),
    ("solve.reps", "--reps"),
    ("solve.seed", "--seed"),
    ("solve.pop_size", "--pop-size"),
    ("solve.max_fe", "--max-fe"),
    ("solve.record_every", "--record-every"),
    ("output", "--output"),
    ("threads", "--threads"),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}\n  fix: {fix}")]
pub struct UsageError {
    pub message: String,
    pub fix: String,
}

impl UsageError {
    fn new(message: impl Into<String>, fix: impl Into<String>) -> Self {
        Self { message: message.into(), fix: fix.into() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "metadesign", version, about = "Design metaheuristic optimizers and run them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Design algorithms for a problem's training instances.
    Design(DesignArgs),
    /// Run an algorithm file or a baseline on a problem.
    Solve(SolveArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// JSON config file with dotted keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// RIS element counts, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    pub elements: Option<Vec<usize>>,
    #[arg(long)]
    pub antennas: Option<usize>,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub bits: Option<u32>,
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub instance_seed: Option<u64>,
    #[arg(long)]
    pub pop_size: Option<usize>,
    #[arg(long)]
    pub max_fe: Option<usize>,
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Output directory (default: $METADESIGN_OUTPUT_DIR or ./metadesign-out).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct DesignArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long)]
    pub test: Option<usize>,
    #[arg(long)]
    pub n_candidates: Option<usize>,
    #[arg(long)]
    pub n_iterations: Option<usize>,
    #[arg(long)]
    pub cmaes_budget: Option<usize>,
    /// Master seed of the design run.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_search: Option<usize>,
    #[arg(long)]
    pub max_pathways: Option<usize>,
    /// Algorithm file whose topology stays fixed.
    #[arg(long)]
    pub fixed_topology: Option<PathBuf>,
    /// Tunable `vertex:param` slots in fixed-topology mode, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub tunable: Option<Vec<String>>,
    /// quality, runtimeFE, runtimeSec or auc.
    #[arg(long)]
    pub objective: Option<String>,
    /// exhaustive, racing, intensification or approximate.
    #[arg(long)]
    pub method: Option<String>,
    /// Repetitions per instance.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub targets: Option<Vec<f64>>,
}

#[derive(Args, Debug, Default)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Algorithm JSON file.
    #[arg(long)]
    pub algorithm: Option<PathBuf>,
    /// GA, ILS, SA or RS.
    #[arg(long)]
    pub baseline: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed of the runs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of problem instances (default: one per element count).
    #[arg(long)]
    pub instances: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Design,
    Solve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub problem: ProblemConfig,
    pub instance_seed: u64,
    pub train: usize,
    pub test: usize,
    pub solve_instances: Option<usize>,
    pub n_candidates: usize,
    pub n_iterations: usize,
    pub cmaes_budget: usize,
    pub master_seed: u64,
    pub max_search: usize,
    pub max_pathways: usize,
    pub fixed_topology: Option<PathBuf>,
    pub tunable: Option<Vec<String>>,
    pub objective: Objective,
    pub method: Method,
    pub plan_reps: usize,
    pub threshold: Option<f64>,
    pub targets: Option<Vec<f64>>,
    pub algorithm: Option<PathBuf>,
    pub baseline: Option<String>,
    pub solve_reps: usize,
    /// Run settings; the seed is the solve-mode base seed.
    pub solve: SolveConfig,
    pub output: PathBuf,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn defaults(mode: Mode) -> Self {
        Self {
            mode,
            problem: ProblemConfig::default(),
            instance_seed: 0,
            train: 5,
            test: 5,
            solve_instances: None,
            n_candidates: 4,
            n_iterations: 50,
            cmaes_budget: 20,
            master_seed: 0,
            max_search: 3,
            max_pathways: 2,
            fixed_topology: None,
            tunable: None,
            objective: Objective::Quality,
            method: Method::Exhaustive,
            plan_reps: 3,
            threshold: None,
            targets: None,
            algorithm: None,
            baseline: None,
            solve_reps: 10,
            solve: SolveConfig { pop_size: 50, max_fe: 5000, seed: 0, record_every: None },
            output: std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_OUTPUT.into()),
            threads: None,
        }
    }

    /// Applies one dotted key. `source` names the key or flag in errors.
    pub fn apply(&mut self, key: &str, value: &Value, source: &str) -> Result<(), UsageError> {
        fn get<T: serde::de::DeserializeOwned>(v: &Value, source: &str, what: &str) -> Result<T, UsageError> {
            serde_json::from_value(v.clone())
                .map_err(|_| UsageError::new(format!("{source}: expected {what}, got {v}"), format!("give {source} {what}")))
        }
        fn named<T: std::str::FromStr>(v: &Value, source: &str, choices: &str) -> Result<T, UsageError> {
            let s: String = get(v, source, "a string")?;
            s.parse().map_err(|_| UsageError::new(format!("{source}: unknown value `{s}`"), format!("use one of {choices}")))
        }
        let count = "a non-negative integer";
        match key {
            "problem.name" => self.problem.name = get(value, source, "a problem name")?,
            "problem.dim" => self.problem.dim = get(value, source, count)?,
            "problem.elements" => self.problem.elements = get(value, source, "a list of element counts")?,
            "problem.antennas" => self.problem.beamforming.antennas = get(value, source, count)?,
            "problem.users" => self.problem.beamforming.users = get(value, source, count)?,
            "problem.bits" => self.problem.beamforming.bits = get(value, source, count)?,
            "problem.power" => self.problem.beamforming.power = get(value, source, "a number")?,
            "problem.noise" => self.problem.beamforming.noise = get(value, source, "a number")?,
            "instances.seed" => self.instance_seed = get(value, source, count)?,
            "instances.train" => self.train = get(value, source, count)?,
            "instances.test" => self.test = get(value, source, count)?,
            "instances.solve" => self.solve_instances = Some(get(value, source, count)?),
            "design.n_candidates" => self.n_candidates = get(value, source, count)?,
            "design.n_iterations" => self.n_iterations = get(value, source, count)?,
            "design.cmaes_budget" => self.cmaes_budget = get(value, source, count)?,
            "design.master_seed" => self.master_seed = get(value, source, count)?,
            "design.max_search" => self.max_search = get(value, source, count)?,
            "design.max_pathways" => self.max_pathways = get(value, source, count)?,
            "design.fixed_topology" => self.fixed_topology = Some(get(value, source, "a file path")?),
            "design.tunable" => self.tunable = Some(get(value, source, "a list of `vertex:param` slots")?),
            "plan.objective" => self.objective = named(value, source, "quality, runtimeFE, runtimeSec, auc")?,
            "plan.method" => self.method = named(value, source, "exhaustive, racing, intensification, approximate")?,
            "plan.reps" => self.plan_reps = get(value, source, count)?,
            "plan.threshold" => self.threshold = Some(get(value, source, "a number")?),
            "plan.targets" => self.targets = Some(get(value, source, "a list of numbers")?),
            "solve.algorithm" => self.algorithm = Some(get(value, source, "a file path")?),
            "solve.baseline" => self.baseline = Some(get(value, source, "a baseline name")?),
            "solve.reps" => self.solve_reps = get(value, source, count)?,
            "solve.seed" => self.solve.seed = get(value, source, count)?,
            "solve.pop_size" => self.solve.pop_size = get(value, source, count)?,
            "solve.max_fe" => self.solve.max_fe = get(value, source, count)?,
            "solve.record_every" => self.solve.record_every = Some(get(value, source, count)?),
            "output" => self.output = get(value, source, "a directory path")?,
            "threads" => self.threads = Some(get(value, source, count)?),
            _ => {
                return Err(UsageError::new(
                    format!("unknown config key `{key}`"),
                    "remove it; valid keys are listed by `metadesign design --help` as flags",
                ))
            }
        }
        Ok(())
    }

    fn apply_file(&mut self, path: &PathBuf) -> Result<(), UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            UsageError::new(format!("--config {}: {e}", path.display()), "point --config at a readable JSON file")
        })?;
        let map: Map<String, Value> = serde_json::from_str(&text).map_err(|e| {
            UsageError::new(format!("--config {}: {e}", path.display()), "write the config as one flat JSON object")
        })?;
        for (k, v) in &map {
            self.apply(k, v, &format!("config key `{k}`"))?;
        }
        Ok(())
    }

    fn check(&self) -> Result<(), UsageError> {
        if self.problem.name.is_empty() {
            return Err(UsageError::new(
                "missing problem name",
                format!("pass --problem <name> with one of {}", PROBLEM_NAMES.join(", ")),
            ));
        }
        if !PROBLEM_NAMES.contains(&self.problem.name.as_str()) {
            return Err(UsageError::new(
                format!("--problem: unknown problem `{}`", self.problem.name),
                format!("use one of {}", PROBLEM_NAMES.join(", ")),
            ));
        }
        if self.solve.pop_size == 0 || self.solve.max_fe < self.solve.pop_size {
            return Err(UsageError::new(
                format!("--max-fe {} is smaller than --pop-size {}", self.solve.max_fe, self.solve.pop_size),
                "raise --max-fe to at least the population size",
            ));
        }
        if self.threads == Some(0) {
            return Err(UsageError::new("--threads 0", "pass --threads 1 or more"));
        }
        match self.mode {
            Mode::Solve => {
                if self.algorithm.is_some() == self.baseline.is_some() {
                    let msg = if self.algorithm.is_some() {
                        "--algorithm and --baseline are mutually exclusive"
                    } else {
                        "no algorithm to run"
                    };
                    return Err(UsageError::new(msg, "pass exactly one of --algorithm <file.json> or --baseline <GA|ILS|SA|RS>"));
                }
                if self.solve_reps == 0 {
                    return Err(UsageError::new("--reps 0", "pass --reps 1 or more"));
                }
            }
            Mode::Design => {
                if self.train == 0 {
                    return Err(UsageError::new("--train 0 leaves no training instances", "pass --train 1 or more"));
                }
                if self.n_candidates == 0 {
                    return Err(UsageError::new("--n-candidates 0", "pass --n-candidates 1 or more"));
                }
                if self.plan_reps == 0 {
                    return Err(UsageError::new("--reps 0", "pass --reps 1 or more"));
                }
                let runtime = matches!(self.objective, Objective::RuntimeFe | Objective::RuntimeSec);
                if runtime && self.threshold.is_none() {
                    return Err(UsageError::new(
                        format!("--objective {} needs a target fitness", self.objective),
                        "pass --threshold <fitness>",
                    ));
                }
                if !runtime && self.threshold.is_some() {
                    return Err(UsageError::new(
                        format!("--threshold has no effect with --objective {}", self.objective),
                        "drop --threshold or use --objective runtimeFE",
                    ));
                }
                if self.tunable.is_some() && self.fixed_topology.is_none() {
                    return Err(UsageError::new(
                        "--tunable only applies in fixed-topology mode",
                        "add --fixed-topology <file.json> or drop --tunable",
                    ));
                }
            }
        }
        Ok(())
    }
}

fn push<T: serde::Serialize>(out: &mut Vec<(&'static str, Value)>, key: &'static str, v: &Option<T>) {
    if let Some(v) = v {
        out.push((key, serde_json::to_value(v).expect("plain value")));
    }
}

fn common_pairs(c: &CommonArgs, out: &mut Vec<(&'static str, Value)>) {
    push(out, "problem.name", &c.problem);
    push(out, "problem.dim", &c.dim);
    push(out, "problem.elements", &c.elements);
    push(out, "problem.antennas", &c.antennas);
    push(out, "problem.users", &c.users);
    push(out, "problem.bits", &c.bits);
    push(out, "problem.power", &c.power);
    push(out, "problem.noise", &c.noise);
    push(out, "instances.seed", &c.instance_seed);
    push(out, "solve.pop_size", &c.pop_size);
    push(out, "solve.max_fe", &c.max_fe);
    push(out, "solve.record_every", &c.record_every);
    push(out, "output", &c.output);
    push(out, "threads", &c.threads);
}

fn flag_for(key: &str) -> &'static str {
    KEYS.iter().find(|k| k.0 == key).map(|k| k.1).unwrap_or("flag")
}

/// Resolves a parsed command line into a checked [`RunConfig`].
pub fn parse_config(cli: &Cli) -> Result<RunConfig, UsageError> {
    let mut pairs = Vec::new();
    let (mode, common) = match &cli.command {
        Command::Design(a) => {
            common_pairs(&a.common, &mut pairs);
            push(&mut pairs, "instances.train", &a.train);
            push(&mut pairs, "instances.test", &a.test);
            push(&mut pairs, "design.n_candidates", &a.n_candidates);
            push(&mut pairs, "design.n_iterations", &a.n_iterations);
            push(&mut pairs, "design.cmaes_budget", &a.cmaes_budget);
            push(&mut pairs, "design.master_seed", &a.seed);
            push(&mut pairs, "design.max_search", &a.max_search);
            push(&mut pairs, "design.max_pathways", &a.max_pathways);
            push(&mut pairs, "design.fixed_topology", &a.fixed_topology);
            push(&mut pairs, "design.tunable", &a.tunable);
            push(&mut pairs, "plan.objective", &a.objective);
            push(&mut pairs, "plan.method", &a.method);
            push(&mut pairs, "plan.reps", &a.reps);
            push(&mut pairs, "plan.threshold", &a.threshold);
            push(&mut pairs, "plan.targets", &a.targets);
            (Mode::Design, &a.common)
        }
        Command::Solve(a) => {
            common_pairs(&a.common, &mut pairs);
            push(&mut pairs, "solve.algorithm", &a.algorithm);
            push(&mut pairs, "solve.baseline", &a.baseline);
            push(&mut pairs, "solve.reps", &a.reps);
            push(&mut pairs, "solve.seed", &a.seed);
            push(&mut pairs, "instances.solve", &a.instances);
            (Mode::Solve, &a.common)
        }
    };
    let mut cfg = RunConfig::defaults(mode);
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    for (key, value) in &pairs {
        cfg.apply(key, value, flag_for(key))?;
    }
    cfg.check()?;
    Ok(cfg)
}
