//! Design and solve runs. Outputs are staged in a scratch directory and
//! moved into place only after every file is written.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use metadesign::catalog::Encoding;
use metadesign::designer::{design_with, DesignConfig, DesignError};
use metadesign::evaluator::EvalPlan;
use metadesign::executor::{solve, SolveConfig, SolveError};
use metadesign::graph::AlgorithmGraph;
use metadesign::presets::{make_baseline, UnknownBaseline};
use metadesign::problems::{build_instances, InstanceRole, ProblemError};
use metadesign::render::render_pseudocode;
use metadesign::seed::derive_seed;
use metadesign::serial::{deserialize, to_json, FormatError};
use metadesign::space::build_default_space;
use metadesign::stats::{mean, sample_std};

use crate::config::{Mode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Problem(#[from] ProblemError),
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Baseline(#[from] UnknownBaseline),
    #[error("design failed: {0}")]
    Design(#[from] DesignError),
    #[error("instance {instance}, rep {rep}: {source}")]
    Solve { instance: String, rep: usize, source: SolveError },
    #[error("{0}")]
    Config(String),
    #[error("writing outputs to {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

fn load_graph(path: &Path) -> Result<AlgorithmGraph, RunError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    deserialize(&bytes).map_err(|source| RunError::Format { path: path.to_path_buf(), source })
}

/// Writes `files` into `dir`, all or nothing.
pub fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let staging = tempfile::Builder::new().prefix(".staging").tempdir_in(dir).map_err(io_err(dir))?;
    for (name, body) in files {
        let p = staging.path().join(name);
        std::fs::write(&p, body).map_err(io_err(&p))?;
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, _) in files {
        let target = dir.join(name);
        if let Err(e) = std::fs::rename(staging.path().join(name), &target) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            return Err(RunError::Io { path: target, source: e });
        }
        written.push(target);
    }
    Ok(written)
}

/// `x` with three significant digits, e.g. `0.0332`; scientific outside
/// `[1e-3, 1e5)`.
pub fn format_mean(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        return "0".into();
    }
    if !(1e-3..1e5).contains(&a) {
        return format_sci(x);
    }
    let decimals = (2 - a.log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Scientific notation with two decimals and a signed two-digit exponent,
/// e.g. `5.05E-04`.
pub fn format_sci(x: f64) -> String {
    let s = format!("{x:.2E}");
    let (mantissa, exp) = s.split_once('E').expect("scientific format");
    let e: i32 = exp.parse().expect("exponent");
    format!("{mantissa}E{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

pub fn format_cell(values: &[f64]) -> String {
    format!("{}±{}", format_mean(mean(values)), format_sci(sample_std(values)))
}

fn encoding_of(cfg: &RunConfig) -> Result<Encoding, RunError> {
    let probe = build_instances(&cfg.problem, InstanceRole::Training, 1, cfg.instance_seed)?;
    Ok(probe[0].problem.domain().encoding())
}

fn parse_tunable(slots: &[String]) -> Result<BTreeSet<(usize, String)>, RunError> {
    slots
        .iter()
        .map(|s| {
            let (v, p) = s
                .split_once(':')
                .ok_or_else(|| RunError::Config(format!("tunable slot `{s}` is not of the form vertex:param")))?;
            let v = v.parse().map_err(|_| RunError::Config(format!("tunable slot `{s}` has a non-numeric vertex id")))?;
            Ok((v, p.to_string()))
        })
        .collect()
}

pub fn design_config(cfg: &RunConfig) -> Result<DesignConfig, RunError> {
    let train = build_instances(&cfg.problem, InstanceRole::Training, cfg.train, cfg.instance_seed)?;
    let test = build_instances(&cfg.problem, InstanceRole::Test, cfg.test, cfg.instance_seed)?;
    let encoding = train[0].problem.domain().encoding();
    let mut space = build_default_space(encoding);
    space.max_search_vertices = cfg.max_search;
    space.max_pathways = cfg.max_pathways;
    if let Some(path) = &cfg.fixed_topology {
        let g = load_graph(path)?;
        let tunable = cfg.tunable.as_deref().map(parse_tunable).transpose()?;
        space = space.with_fixed_topology(g, tunable);
    }
    let mut plan = EvalPlan::new(train, SolveConfig { seed: 0, ..cfg.solve });
    plan.objective = cfg.objective;
    plan.method = cfg.method;
    plan.reps = cfg.plan_reps;
    plan.threshold = cfg.threshold;
    plan.targets = cfg.targets.clone();
    let mut d = DesignConfig::new(space, plan);
    d.n_candidates = cfg.n_candidates;
    d.n_iterations = cfg.n_iterations;
    d.cmaes_budget = cfg.cmaes_budget;
    d.master_seed = cfg.master_seed;
    d.test_instances = test;
    Ok(d)
}

/// Runs a design and writes best.json, best.txt, finalist files,
/// convergence.csv, evaluation_log.csv, test_log.csv and summary.csv.
pub fn run_design(cfg: &RunConfig, out: &mut impl Write) -> Result<Vec<PathBuf>, RunError> {
    assert_eq!(cfg.mode, Mode::Design);
    let dc = design_config(cfg)?;
    let report = design_with(&dc, |p| {
        let _ = writeln!(out, "iteration {:>3}  best {:.6e}  runs {}", p.iteration, p.best_aggregate, p.runs);
    })?;

    let best = report.best();
    let mut files = vec![
        ("best.json".to_string(), to_json(&best.graph)),
        ("best.txt".to_string(), render_pseudocode(&best.graph).expect("designed graphs are valid")),
        ("convergence.csv".to_string(), report.convergence_csv()),
        ("evaluation_log.csv".to_string(), report.evaluation_log.clone()),
    ];
    if !report.test_log.is_empty() {
        files.push(("test_log.csv".to_string(), report.test_log.clone()));
    }
    let mut summary = String::from("rank,candidate,training,test,status\n");
    for (k, f) in report.finalists.iter().enumerate() {
        files.push((format!("finalist_{k}.json"), to_json(&f.graph)));
        files.push((format!("finalist_{k}.txt"), render_pseudocode(&f.graph).expect("designed graphs are valid")));
        let test = f.test.as_ref().map(|t| t.aggregate.to_string()).unwrap_or_default();
        let status = serde_json::to_value(f.training.status).expect("status");
        summary.push_str(&format!("{k},{},{},{test},{}\n", f.training.candidate, f.training.aggregate, status.as_str().unwrap()));
    }
    files.push(("summary.csv".to_string(), summary));
    let _ = writeln!(
        out,
        "done: {} training runs, {} test runs, best training {:.6e}",
        report.runs, report.test_runs, best.training.aggregate
    );
    write_outputs(&cfg.output, &files)
}

/// Runs an algorithm file or baseline per instance and repetition and
/// writes trajectory CSVs, algorithm.txt and summary.csv.
pub fn run_solve(cfg: &RunConfig, out: &mut impl Write) -> Result<Vec<PathBuf>, RunError> {
    assert_eq!(cfg.mode, Mode::Solve);
    let graph = match (&cfg.algorithm, &cfg.baseline) {
        (Some(path), _) => load_graph(path)?,
        (None, Some(name)) => make_baseline(name, encoding_of(cfg)?)?,
        (None, None) => unreachable!("checked by parse_config"),
    };
    let count = cfg.solve_instances.unwrap_or(if cfg.problem.name == "beamforming" { cfg.problem.elements.len() } else { 1 });
    let instances = build_instances(&cfg.problem, InstanceRole::Test, count, cfg.instance_seed)?;

    let text = render_pseudocode(&graph).map_err(|e| RunError::Solve {
        instance: String::new(),
        rep: 0,
        source: SolveError::InvalidGraph(e),
    })?;
    let _ = write!(out, "{text}");

    let jobs: Vec<(usize, usize)> = (0..instances.len()).flat_map(|i| (0..cfg.solve_reps).map(move |r| (i, r))).collect();
    let records = jobs
        .par_iter()
        .map(|&(i, r)| {
            let sc = SolveConfig { seed: derive_seed(cfg.solve.seed, &[i as u64, r as u64]), ..cfg.solve };
            solve(&graph, instances[i].problem.as_ref(), &sc)
                .map_err(|source| RunError::Solve { instance: instances[i].id.clone(), rep: r, source })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut files = vec![("algorithm.txt".to_string(), text), ("algorithm.json".to_string(), to_json(&graph))];
    let mut summary = String::from("instance,reps,mean,std,cell\n");
    for (i, inst) in instances.iter().enumerate() {
        let finals: Vec<f64> = jobs
            .iter()
            .zip(&records)
            .filter(|((ji, _), _)| *ji == i)
            .map(|((_, r), rec)| {
                files.push((format!("trajectory_{}_rep{r}.csv", inst.id), rec.trajectory_csv()));
                rec.final_best()
            })
            .collect();
        let cell = format_cell(&finals);
        let _ = writeln!(out, "{}: {cell}", inst.id);
        summary.push_str(&format!("{},{},{},{},{cell}\n", inst.id, finals.len(), mean(&finals), sample_std(&finals)));
    }
    files.push(("summary.csv".to_string(), summary));
    write_outputs(&cfg.output, &files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_cell_format() {
        assert_eq!(format_sci(5.05e-4), "5.05E-04");
        assert_eq!(format_sci(0.0), "0.00E+00");
        assert_eq!(format_sci(1.234e12), "1.23E+12");
        assert_eq!(format_mean(0.0332), "0.0332");
        assert_eq!(format_mean(12.5), "12.5");
        assert_eq!(format_cell(&[0.0332]), "0.0332±0.00E+00");
    }

    #[test]
    fn failed_rename_leaves_no_partial_output() {
        let dir = tempfile::tempdir().unwrap();
        // a directory in place of the second file makes its rename fail
        std::fs::create_dir_all(dir.path().join("b.csv/x")).unwrap();
        let files = vec![("a.csv".to_string(), "1".to_string()), ("b.csv".to_string(), "2".to_string())];
        assert!(write_outputs(dir.path(), &files).is_err());
        assert!(!dir.path().join("a.csv").exists());
        let left: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(left, ["b.csv"]);
    }
}
