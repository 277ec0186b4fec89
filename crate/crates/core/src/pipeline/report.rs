use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{total_cost, Cost};
use crate::dag::ComputationalDag;
use crate::error::{Error, Result};
use crate::machine::MachineParams;
use crate::schedule::{load_schedule, write_schedule, BspSchedule};

use super::{run_algorithm, Algorithm, PipelineConfig};

/// `exp(mean(ln r))`; `None` for an empty slice.
pub fn geometric_mean(ratios: &[f64]) -> Option<f64> {
    if ratios.is_empty() {
        return None;
    }
    let s: f64 = ratios.iter().map(|r| r.ln()).sum();
    Some((s / ratios.len() as f64).exp())
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub dataset: String,
    pub dag: ComputationalDag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MachineSpec {
    pub p: usize,
    pub g: u64,
    pub l: u64,
    /// NUMA tree factor; uniform communication if absent.
    #[serde(default)]
    pub delta: Option<u64>,
}

impl MachineSpec {
    pub fn params(&self) -> Result<MachineParams> {
        match self.delta {
            Some(d) => MachineParams::numa_tree(self.p, self.g, self.l, d),
            None => MachineParams::uniform(self.p, self.g, self.l),
        }
    }

    pub fn label(&self) -> String {
        match self.delta {
            Some(d) => format!("p{}-g{}-l{}-d{d}", self.p, self.g, self.l),
            None => format!("p{}-g{}-l{}", self.p, self.g, self.l),
        }
    }
}

/// An algorithm to evaluate: built in, or schedules read from files named
/// `<instance>.<machine label>.sched` (or `<instance>.sched`) in `dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgoSpec {
    Builtin(Algorithm),
    External { name: String, dir: PathBuf },
}

impl AlgoSpec {
    pub fn name(&self) -> &str {
        match self {
            AlgoSpec::Builtin(a) => a.name(),
            AlgoSpec::External { name, .. } => name,
        }
    }
}

impl From<Algorithm> for AlgoSpec {
    fn from(a: Algorithm) -> Self {
        AlgoSpec::Builtin(a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance: String,
    pub dataset: String,
    pub nodes: usize,
    pub p: usize,
    pub g: u64,
    pub l: u64,
    pub delta: Option<u64>,
    pub algorithm: String,
    pub cost: Option<f64>,
    /// Exact cost, a fraction when NUMA coefficients are fractional.
    pub cost_exact: Option<String>,
    /// Cost divided by the baseline's cost on the same instance and machine.
    pub ratio: Option<f64>,
    pub wall_ms: f64,
    pub schedule_file: Option<String>,
    /// Why the row has no cost.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub p: usize,
    pub g: u64,
    pub delta: Option<u64>,
    pub dataset: String,
    pub algorithm: String,
    pub instances: usize,
    pub geomean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub baseline: String,
    pub rows: Vec<RunRow>,
    pub groups: Vec<GroupRow>,
}

type GroupKey = (usize, u64, Option<u64>, String, String);

impl SuiteReport {
    /// Fills in ratios against `baseline` and aggregates them per
    /// `(P, g, delta, dataset, algorithm)`.
    pub fn from_rows(baseline: &str, mut rows: Vec<RunRow>) -> Self {
        let key = |r: &RunRow| (r.instance.clone(), r.p, r.g, r.l, r.delta);
        let base: BTreeMap<_, f64> = rows
            .iter()
            .filter(|r| r.algorithm == baseline)
            .filter_map(|r| r.cost.map(|c| (key(r), c)))
            .collect();
        for r in &mut rows {
            r.ratio = match (r.cost, base.get(&key(r))) {
                (Some(c), Some(&b)) if b > 0.0 => Some(c / b),
                _ => None,
            };
        }
        let mut buckets: BTreeMap<GroupKey, Vec<f64>> = BTreeMap::new();
        for r in &rows {
            if let Some(x) = r.ratio {
                buckets
                    .entry((r.p, r.g, r.delta, r.dataset.clone(), r.algorithm.clone()))
                    .or_default()
                    .push(x);
            }
        }
        let groups = buckets
            .into_iter()
            .map(|((p, g, delta, dataset, algorithm), xs)| GroupRow {
                p,
                g,
                delta,
                dataset,
                algorithm,
                instances: xs.len(),
                geomean: geometric_mean(&xs).expect("buckets are nonempty"),
            })
            .collect();
        Self {
            baseline: baseline.to_string(),
            rows,
            groups,
        }
    }

    pub fn rows_csv(&self) -> Result<String> {
        to_csv(&self.rows)
    }

    pub fn groups_csv(&self) -> Result<String> {
        to_csv(&self.groups)
    }

    /// Geometric means of all ratios of `algorithm`.
    pub fn overall(&self, algorithm: &str) -> Option<f64> {
        let xs: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .filter_map(|r| r.ratio)
            .collect();
        geometric_mean(&xs)
    }

    /// One line per `(P, g, delta, dataset)`, one column per algorithm,
    /// cells are geometric-mean ratios against the baseline.
    pub fn to_table(&self) -> String {
        let mut algos: Vec<&str> = Vec::new();
        for r in &self.rows {
            if r.algorithm != self.baseline && !algos.contains(&r.algorithm.as_str()) {
                algos.push(&r.algorithm);
            }
        }
        let mut lines: BTreeMap<(usize, u64, Option<u64>, &str), BTreeMap<&str, f64>> = BTreeMap::new();
        for g in &self.groups {
            lines
                .entry((g.p, g.g, g.delta, &g.dataset))
                .or_default()
                .insert(&g.algorithm, g.geomean);
        }
        let width = algos.iter().map(|a| a.len()).max().unwrap_or(0).max(8);
        let mut out = String::new();
        let _ = write!(out, "{:<5}{:<5}{:<7}{:<10}", "P", "g", "delta", "dataset");
        for a in &algos {
            let _ = write!(out, " {a:>width$}");
        }
        out.push('\n');
        for ((p, g, delta, dataset), cells) in &lines {
            let d = delta.map_or("-".to_string(), |d| d.to_string());
            let _ = write!(out, "{p:<5}{g:<5}{d:<7}{dataset:<10}");
            for a in &algos {
                match cells.get(a) {
                    Some(x) => {
                        let _ = write!(out, " {x:>width$.3}");
                    }
                    None => {
                        let _ = write!(out, " {:>width$}", "-");
                    }
                }
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<27}", "all");
        for a in &algos {
            match self.overall(a) {
                Some(x) => {
                    let _ = write!(out, " {x:>width$.3}");
                }
                None => {
                    let _ = write!(out, " {:>width$}", "-");
                }
            }
        }
        out.push('\n');
        let _ = writeln!(out, "(ratios against {})", self.baseline);
        out
    }
}

fn to_csv<T: Serialize>(items: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for it in items {
        w.serialize(it)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Runs every algorithm on every (instance, machine) pair, in parallel, and
/// reports ratios against `baseline`. With `schedule_dir`, every schedule
/// is written there as `<instance>.<machine>.<algorithm>.sched`.
pub fn evaluate_suite(
    instances: &[Instance],
    machines: &[MachineSpec],
    algorithms: &[AlgoSpec],
    baseline: &str,
    config: &PipelineConfig,
    schedule_dir: Option<&Path>,
) -> Result<SuiteReport> {
    if instances.is_empty() || machines.is_empty() || algorithms.is_empty() {
        return Err(Error::Config("suite needs instances, machines and algorithms".into()));
    }
    if !algorithms.iter().any(|a| a.name() == baseline) {
        return Err(Error::Config(format!("baseline '{baseline}' is not among the algorithms")));
    }
    config.validate()?;
    if let Some(dir) = schedule_dir {
        std::fs::create_dir_all(dir)?;
    }
    let jobs: Vec<(&Instance, &MachineSpec)> = instances
        .iter()
        .flat_map(|i| machines.iter().map(move |m| (i, m)))
        .collect();
    let rows: Vec<Vec<RunRow>> = jobs
        .par_iter()
        .map(|&(inst, spec)| run_job(inst, spec, algorithms, config, schedule_dir))
        .collect::<Result<_>>()?;
    Ok(SuiteReport::from_rows(baseline, rows.into_iter().flatten().collect()))
}

fn run_job(
    inst: &Instance,
    spec: &MachineSpec,
    algorithms: &[AlgoSpec],
    config: &PipelineConfig,
    schedule_dir: Option<&Path>,
) -> Result<Vec<RunRow>> {
    let machine = spec.params()?;
    let row = |algorithm: &str| RunRow {
        instance: inst.name.clone(),
        dataset: inst.dataset.clone(),
        nodes: inst.dag.num_nodes(),
        p: spec.p,
        g: spec.g,
        l: spec.l,
        delta: spec.delta,
        algorithm: algorithm.to_string(),
        cost: None,
        cost_exact: None,
        ratio: None,
        wall_ms: 0.0,
        schedule_file: None,
        note: None,
    };
    let with_cost = |mut r: RunRow, c: Cost| {
        r.cost = Some(c.to_f64());
        r.cost_exact = Some(c.to_string());
        r
    };
    let mut out = Vec::new();
    for algo in algorithms {
        let mut r = row(algo.name());
        let result: Result<(BspSchedule, Cost, f64, Vec<(String, Cost)>)> = match algo {
            AlgoSpec::Builtin(a) => run_algorithm(*a, &inst.dag, &machine, config)
                .map(|run| (run.schedule, run.cost, run.wall.as_secs_f64() * 1e3, run.extra)),
            AlgoSpec::External { dir, .. } => load_external(dir, inst, spec, &machine).map(|(s, c)| (s, c, 0.0, vec![])),
        };
        match result {
            Ok((sched, cost, ms, extra)) => {
                r.wall_ms = ms;
                if let Some(dir) = schedule_dir {
                    let path = dir.join(format!("{}.{}.{}.sched", inst.name, spec.label(), algo.name()));
                    std::fs::write(&path, write_schedule(&sched, spec.p))?;
                    r.schedule_file = Some(path.display().to_string());
                }
                out.push(with_cost(r, cost));
                for (label, c) in extra {
                    out.push(with_cost(row(&label), c));
                }
            }
            Err(e @ (Error::TooSmall(_) | Error::Io(_))) => {
                r.note = Some(e.to_string());
                out.push(r);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn load_external(dir: &Path, inst: &Instance, spec: &MachineSpec, machine: &MachineParams) -> Result<(BspSchedule, Cost)> {
    let specific = dir.join(format!("{}.{}.sched", inst.name, spec.label()));
    let path = if specific.exists() {
        specific
    } else {
        dir.join(format!("{}.sched", inst.name))
    };
    let (p, sched) = load_schedule(&path)?;
    if p != spec.p {
        return Err(Error::InvalidSchedule(format!(
            "{} is for {p} processors, machine has {}",
            path.display(),
            spec.p
        )));
    }
    let cost = total_cost(&inst.dag, machine, &sched)?;
    Ok((sched, cost))
}
