use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperdag::load_hyperdag;

use super::{evaluate_suite, AlgoSpec, Algorithm, Instance, MachineSpec, PipelineConfig, SuiteReport};

/// Named node-count range used to label instances found directly in the
/// suite directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRange {
    pub name: String,
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl DatasetRange {
    fn new(name: &str, min_nodes: usize, max_nodes: usize) -> Self {
        Self {
            name: name.to_string(),
            min_nodes,
            max_nodes,
        }
    }
}

pub fn default_datasets() -> Vec<DatasetRange> {
    vec![
        DatasetRange::new("tiny", 40, 80),
        DatasetRange::new("small", 250, 500),
        DatasetRange::new("medium", 1000, 2000),
        DatasetRange::new("large", 5000, 10000),
    ]
}

/// Contents of a bench TOML file.
///
/// ```toml
/// baseline = "cilk"
/// algorithms = ["cilk", "pipeline"]
///
/// [[machines]]
/// p = 4
/// g = 3
/// l = 5
/// delta = 2
///
/// [pipeline]
/// budget_mode = "ops"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub machines: Vec<MachineSpec>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<AlgoSpec>,
    #[serde(default = "default_baseline")]
    pub baseline: String,
    #[serde(default = "default_datasets")]
    pub datasets: Vec<DatasetRange>,
    #[serde(default)]
    pub pipeline: PipelineConfig,
}

fn default_algorithms() -> Vec<AlgoSpec> {
    [Algorithm::Cilk, Algorithm::BlEst, Algorithm::Etf, Algorithm::Pipeline]
        .into_iter()
        .map(AlgoSpec::from)
        .collect()
}

fn default_baseline() -> String {
    Algorithm::Cilk.name().to_string()
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.machines.is_empty() {
            return Err(Error::Config("no machines configured".into()));
        }
        cfg.pipeline.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    fn dataset_for(&self, nodes: usize) -> String {
        self.datasets
            .iter()
            .find(|d| (d.min_nodes..=d.max_nodes).contains(&nodes))
            .map_or_else(|| "other".to_string(), |d| d.name.clone())
    }

    /// Reads every `*.hdag` file under `dir`. Files in a subdirectory take
    /// the subdirectory name as their dataset; files at the top level are
    /// labelled by node count. Instances are sorted by name.
    pub fn load_suite(&self, dir: impl AsRef<Path>) -> Result<Vec<Instance>> {
        let dir = dir.as_ref();
        let mut found: Vec<(PathBuf, Option<String>)> = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned());
                for inner in std::fs::read_dir(&path)? {
                    let p = inner?.path();
                    if is_hyperdag(&p) {
                        found.push((p, name.clone()));
                    }
                }
            } else if is_hyperdag(&path) {
                found.push((path, None));
            }
        }
        let mut out = Vec::with_capacity(found.len());
        for (path, dataset) in found {
            let dag = load_hyperdag(&path)?;
            let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let dataset = dataset.unwrap_or_else(|| self.dataset_for(dag.num_nodes()));
            out.push(Instance { name, dataset, dag });
        }
        out.sort_by(|a, b| (&a.dataset, &a.name).cmp(&(&b.dataset, &b.name)));
        if out.is_empty() {
            return Err(Error::Config(format!("no .hdag files in {}", dir.display())));
        }
        Ok(out)
    }

    pub fn run(&self, instances: &[Instance], schedule_dir: Option<&Path>) -> Result<SuiteReport> {
        evaluate_suite(
            instances,
            &self.machines,
            &self.algorithms,
            &self.baseline,
            &self.pipeline,
            schedule_dir,
        )
    }
}

fn is_hyperdag(path: &Path) -> bool {
    path.is_file() && path.extension().is_some_and(|e| e == "hdag")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate, GenKind, GenSpec};
    use crate::hyperdag::save_hyperdag;

    #[test]
    fn parses_minimal_config() {
        let cfg = BenchConfig::from_toml(
            "algorithms = [\"cilk\", \"bspg\"]\n[[machines]]\np = 4\ng = 1\nl = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.baseline, "cilk");
        assert_eq!(cfg.machines[0].delta, None);
        assert_eq!(cfg.algorithms.len(), 2);
        assert_eq!(cfg.datasets, default_datasets());
    }

    #[test]
    fn rejects_empty_machine_list() {
        assert!(BenchConfig::from_toml("machines = []\n").is_err());
    }

    #[test]
    fn suite_directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("mine");
        std::fs::create_dir(&sub).unwrap();
        let a = generate(&GenSpec::new(GenKind::Spmv, 8, 0.3, 1, 1)).unwrap();
        let b = generate(&GenSpec::new(GenKind::Exp, 6, 0.3, 2, 2)).unwrap();
        save_hyperdag(&a, dir.path().join("a.hdag")).unwrap();
        save_hyperdag(&b, sub.join("b.hdag")).unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();

        let cfg = BenchConfig::from_toml("[[machines]]\np = 2\ng = 1\nl = 1\n").unwrap();
        let suite = cfg.load_suite(dir.path()).unwrap();
        assert_eq!(suite.len(), 2);
        let b_inst = suite.iter().find(|i| i.name == "b").unwrap();
        assert_eq!(b_inst.dataset, "mine");
        let a_inst = suite.iter().find(|i| i.name == "a").unwrap();
        assert_eq!(a_inst.dataset, cfg.dataset_for(a.num_nodes()));
    }
}
