//! Task execution and the result bundle.

use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, Task};
use crate::error::{Error, Result};
use crate::linear::{exact_spectrum, rotated_det};
use crate::numerics::ModelParams;
use crate::scaling::{integrate_branch, ScalingBranch};
use crate::secular::{bs_levels, bt_levels};
use crate::shooting::{
    branch_end, classify, find_spectrum_with, shoot_residual_with, track_branches, BranchTable, EigenvalueRecord,
};
use crate::stokes::{build_graph, StokesGraph};

type C = Complex64;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "PTSPECTRA_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Shooting,
    AiryDeterminant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub params: ModelParams,
    pub record: EigenvalueRecord,
    /// `|shooting residual|` or `|rotated determinant|`, by source.
    pub residual: f64,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTableEntry {
    pub params: ModelParams,
    pub table: BranchTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecularLevels {
    pub params: ModelParams,
    /// `(j, E)` pairs.
    pub bt: Vec<(u32, f64)>,
    pub bs: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskFailure {
    pub task: Task,
    pub n: u32,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub config_digest: String,
    pub config: RunConfig,
    pub records: Vec<SpectrumRecord>,
    pub branches: Vec<ScalingBranch>,
    pub graphs: Vec<StokesGraph>,
    pub branch_tables: Vec<BranchTableEntry>,
    pub secular: Vec<SecularLevels>,
    pub failures: Vec<TaskFailure>,
    pub provenance: Provenance,
}

impl ResultBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid { pointer: String::new(), message: e.to_string() })
    }

    pub fn spectrum_records(&self, source: Source) -> impl Iterator<Item = &SpectrumRecord> {
        self.records.iter().filter(move |r| r.source == source)
    }
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Spectrum(ModelParams),
    Branches(ModelParams),
    Scaling(u32),
    Stokes(u32, C),
    /// Real energy `factor * E_c`, resolved when the job runs.
    StokesAtBranchEnd(u32, f64),
    Secular(ModelParams),
    Linear(ModelParams),
}

impl Job {
    fn task(&self) -> Task {
        match self {
            Job::Spectrum(_) => Task::Spectrum,
            Job::Branches(_) => Task::Branches,
            Job::Scaling(_) => Task::ScalingGraph,
            Job::Stokes(..) | Job::StokesAtBranchEnd(..) => Task::StokesGraph,
            Job::Secular(_) => Task::SecularScan,
            Job::Linear(_) => Task::LinearExact,
        }
    }

    fn failure(&self, error: Error) -> TaskFailure {
        let (n, l) = match *self {
            Job::Spectrum(p) | Job::Secular(p) | Job::Linear(p) => (p.n, Some(p.l)),
            Job::Branches(p) => (p.n, None),
            Job::Scaling(n) | Job::Stokes(n, _) | Job::StokesAtBranchEnd(n, _) => (n, None),
        };
        TaskFailure { task: self.task(), n, l, error: error.to_string() }
    }
}

enum Output {
    Records(Vec<SpectrumRecord>),
    Table(BranchTableEntry),
    Branch(ScalingBranch),
    Graph(StokesGraph),
    Secular(SecularLevels),
}

fn jobs(config: &RunConfig) -> Vec<Job> {
    let m = &config.model;
    let params = |n: u32, l: f64| ModelParams { n, g: m.g, l, hbar: m.hbar };
    let mut out = Vec::new();
    for &task in &config.tasks {
        for &n in &m.n {
            match task {
                Task::Spectrum => out.extend(m.l.iter().map(|&l| Job::Spectrum(params(n, l)))),
                Task::Branches => out.push(Job::Branches(params(n, m.l[0]))),
                Task::ScalingGraph => out.push(Job::Scaling(n)),
                Task::StokesGraph => match config.seed_overrides.as_ref().and_then(|s| s.stokes_emapped.as_ref()) {
                    Some(list) => out.extend(list.iter().map(|e| Job::Stokes(n, C::new(e[0], e[1])))),
                    None => out.extend([0.1, 1.0, 10.0].map(|f| Job::StokesAtBranchEnd(n, f))),
                },
                Task::SecularScan => out.extend(m.l.iter().map(|&l| Job::Secular(params(n, l)))),
                Task::LinearExact if n == 0 => out.extend(m.l.iter().map(|&l| Job::Linear(params(0, l)))),
                Task::LinearExact => {}
            }
        }
    }
    out
}

fn execute(job: Job, config: &RunConfig) -> Result<Output> {
    let opts = config.tolerances.shooting_options();
    match job {
        Job::Spectrum(p) => {
            let recs = find_spectrum_with(&p, config.count, &opts)?;
            let out = recs
                .into_iter()
                .map(|record| {
                    let residual = shoot_residual_with(record.e, &p, &opts)?.norm();
                    Ok(SpectrumRecord { params: p, record, residual, source: Source::Shooting })
                })
                .collect::<Result<_>>()?;
            Ok(Output::Records(out))
        }
        Job::Branches(p) => {
            let table = track_branches(&p, &config.model.l, config.count)?;
            Ok(Output::Table(BranchTableEntry { params: p, table }))
        }
        Job::Scaling(n) => Ok(Output::Branch(integrate_branch(n, config.tolerances.scaling)?)),
        Job::Stokes(n, e) => Ok(Output::Graph(build_graph(e, n)?)),
        Job::StokesAtBranchEnd(n, f) => Ok(Output::Graph(build_graph(C::new(f * branch_end(n)?, 0.0), n)?)),
        Job::Secular(p) => {
            let count = config.count as u32;
            Ok(Output::Secular(SecularLevels { params: p, bt: bt_levels(&p, count)?, bs: bs_levels(&p, count)? }))
        }
        Job::Linear(p) => {
            let roots = exact_spectrum(&p, config.count)?;
            let out = roots
                .into_iter()
                .enumerate()
                .map(|(k, e)| {
                    let record =
                        EigenvalueRecord { j: k + 1, l: p.l, e, e_mapped: p.to_mapped(e), regime: classify(e, &p)? };
                    let residual = rotated_det(e, &p)?.norm();
                    Ok(SpectrumRecord { params: p, record, residual, source: Source::AiryDeterminant })
                })
                .collect::<Result<_>>()?;
            Ok(Output::Records(out))
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Worker count from `PTSPECTRA_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&t| t > 0)
}

/// Runs every task of the config. Failing jobs are recorded in
/// `failures`; the rest of the bundle is still assembled.
pub fn run(config: &RunConfig) -> Result<ResultBundle> {
    let started = unix_now();
    let list = jobs(config);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_cap() {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Io(e.to_string()))?;
    let results: Vec<Result<Output>> = pool.install(|| list.par_iter().map(|&j| execute(j, config)).collect());

    let mut bundle = ResultBundle {
        config_digest: config.digest(),
        config: config.clone(),
        records: Vec::new(),
        branches: Vec::new(),
        graphs: Vec::new(),
        branch_tables: Vec::new(),
        secular: Vec::new(),
        failures: Vec::new(),
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix: started,
            finished_unix: 0,
        },
    };
    for (job, res) in list.iter().zip(results) {
        match res {
            Ok(Output::Records(r)) => bundle.records.extend(r),
            Ok(Output::Table(t)) => bundle.branch_tables.push(t),
            Ok(Output::Branch(b)) => bundle.branches.push(b),
            Ok(Output::Graph(g)) => bundle.graphs.push(g),
            Ok(Output::Secular(s)) => bundle.secular.push(s),
            Err(e) => bundle.failures.push(job.failure(e)),
        }
    }
    bundle.provenance.finished_unix = unix_now();
    Ok(bundle)
}
