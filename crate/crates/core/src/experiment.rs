//! Replication driver that turns a simulation scenario into table rows.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, ReplicationRecord, S_QUANTILE_LEVELS};
use crate::screening::{self, NeighborRule, ScreeningConfig, Selection};
use crate::seed;
use crate::simgen::{self, SimScenario};

pub const DEFAULT_REPLICATIONS: usize = 500;

/// A named neighbour rule, e.g. `XIM-SIS2 = floor(sqrt(n))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub rule: NeighborRule,
}

impl Variant {
    pub fn new(name: impl Into<String>, rule: NeighborRule) -> Self {
        Self {
            name: name.into(),
            rule,
        }
    }

    pub fn benchmark_set() -> Vec<Variant> {
        NeighborRule::benchmark_variants()
            .into_iter()
            .map(|(name, rule)| Variant { name, rule })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scenario: SimScenario,
    pub n_reps: usize,
    pub variants: Vec<Variant>,
    /// Empty means `[ceil(n / ln n), n - 1]`.
    pub model_sizes: Vec<usize>,
    /// Base of the per-replication tie-break seeds.
    pub base_seed: u64,
    /// Replication workers; 0 uses the global pool.
    pub workers: usize,
}

impl ExperimentSpec {
    pub fn new(scenario: SimScenario) -> Self {
        let base_seed = scenario.seed;
        Self {
            scenario,
            n_reps: DEFAULT_REPLICATIONS,
            variants: Variant::benchmark_set(),
            model_sizes: Vec::new(),
            base_seed,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_reps == 0 {
            return Err(Error::InvalidArgument("n_reps must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one neighbor variant is required".into(),
            ));
        }
        for v in &self.variants {
            v.rule.resolve(self.scenario.n)?;
        }
        if self.model_sizes.contains(&0) {
            return Err(Error::InvalidArgument(
                "model sizes must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn resolved_model_sizes(&self) -> Result<Vec<usize>> {
        if self.model_sizes.is_empty() {
            let (d1, d2) = screening::default_model_sizes(self.scenario.n)?;
            Ok(vec![d1, d2])
        } else {
            Ok(self.model_sizes.clone())
        }
    }

    fn tie_seed(&self, rep: usize) -> u64 {
        seed::derive(self.base_seed, rep as u64)
    }
}

/// Everything one replication produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub rep: usize,
    /// One record per variant, in spec order.
    pub records: Vec<ReplicationRecord>,
    pub m_used: Vec<usize>,
    pub censoring_rate: f64,
    pub seconds: f64,
}

/// One table row: a variant at one model size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: String,
    pub m: usize,
    pub d: usize,
    /// Minimum model size at the 5, 25, 50, 75 and 95% levels.
    pub s_quantiles: [f64; 5],
    pub iqr: f64,
    /// Zero-based active features, aligned with `p_j`.
    pub active_set: Vec<usize>,
    pub p_j: Vec<f64>,
    pub p_a: f64,
    pub realized_cr: f64,
    pub seconds_per_rep: f64,
}

impl ReportRow {
    pub fn median_s(&self) -> f64 {
        self.s_quantiles[2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: SimScenario,
    pub n_reps: usize,
    pub c_upper: f64,
    pub rows: Vec<ReportRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replications: Vec<ReplicationOutcome>,
}

impl ExperimentReport {
    pub fn row(&self, variant: &str, d: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.variant == variant && r.d == d)
    }
}

/// A spec with its censoring bound fixed.
#[derive(Debug, Clone)]
pub struct Experiment {
    spec: ExperimentSpec,
    c_upper: f64,
}

impl Experiment {
    /// Calibrates the censoring bound once for all replications.
    pub fn prepare(spec: ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let c_upper = simgen::scenario_censoring_bound(&spec.scenario)?;
        Ok(Self { spec, c_upper })
    }

    pub fn with_censoring_bound(spec: ExperimentSpec, c_upper: f64) -> Result<Self> {
        spec.validate()?;
        if !(c_upper.is_finite() && c_upper > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "censoring bound must be positive, got {c_upper}"
            )));
        }
        Ok(Self { spec, c_upper })
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    pub fn c_upper(&self) -> f64 {
        self.c_upper
    }

    /// Generates replication `rep` and screens it once per variant.
    pub fn run_replication(&self, rep: usize) -> Result<ReplicationOutcome> {
        if rep >= self.spec.n_reps {
            return Err(Error::InvalidArgument(format!(
                "replication {rep} outside 0..{}",
                self.spec.n_reps
            )));
        }
        self.replicate(rep).map_err(|e| Error::Replication {
            rep,
            seed: self.spec.scenario.seed,
            stream: rep as u64,
            source: Box::new(e),
        })
    }

    fn replicate(&self, rep: usize) -> Result<ReplicationOutcome> {
        let started = Instant::now();
        let scenario = &self.spec.scenario;
        let sample = simgen::generate_replication(scenario, self.c_upper, rep as u64)?;
        let active = scenario.active_set();
        let mut records = Vec::with_capacity(self.spec.variants.len());
        let mut m_used = Vec::with_capacity(self.spec.variants.len());
        for variant in &self.spec.variants {
            let cfg = ScreeningConfig {
                neighbors: variant.rule,
                selection: Selection::TopD(scenario.p),
                tie_seed: self.spec.tie_seed(rep),
                workers: 1,
            };
            let res = screening::screen(sample.x.view(), &sample.resp, &cfg)?;
            m_used.push(res.m_used);
            records.push(ReplicationRecord::new(res.order, active.clone())?);
        }
        Ok(ReplicationOutcome {
            rep,
            records,
            m_used,
            censoring_rate: sample.resp.censoring_rate(),
            seconds: started.elapsed().as_secs_f64(),
        })
    }

    /// Runs every replication in parallel and aggregates in index order.
    pub fn run_outcomes(&self) -> Result<Vec<ReplicationOutcome>> {
        let run = || -> Result<Vec<ReplicationOutcome>> {
            (0..self.spec.n_reps)
                .into_par_iter()
                .map(|rep| self.run_replication(rep))
                .collect()
        };
        match self.spec.workers {
            0 => run(),
            w => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?
                .install(run),
        }
    }

    pub fn run(&self) -> Result<ExperimentReport> {
        let outcomes = self.run_outcomes()?;
        let rows = aggregate(&self.spec, &outcomes)?;
        Ok(ExperimentReport {
            scenario: self.spec.scenario.clone(),
            n_reps: self.spec.n_reps,
            c_upper: self.c_upper,
            rows,
            replications: outcomes,
        })
    }
}

/// Calibrates, replicates and aggregates.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    Experiment::prepare(spec.clone())?.run()
}

/// Table rows from saved replication outcomes.
pub fn aggregate(spec: &ExperimentSpec, outcomes: &[ReplicationOutcome]) -> Result<Vec<ReportRow>> {
    if outcomes.is_empty() {
        return Err(Error::InvalidArgument("no replication outcomes".into()));
    }
    let sizes = spec.resolved_model_sizes()?;
    let reps = outcomes.len() as f64;
    let realized_cr = outcomes.iter().map(|o| o.censoring_rate).sum::<f64>() / reps;
    let seconds_per_rep = outcomes.iter().map(|o| o.seconds).sum::<f64>() / reps;
    let mut rows = Vec::with_capacity(spec.variants.len() * sizes.len());
    for (v, variant) in spec.variants.iter().enumerate() {
        let records: Vec<ReplicationRecord> = outcomes
            .iter()
            .map(|o| {
                o.records.get(v).cloned().ok_or_else(|| {
                    Error::InvalidArgument(format!("replication {} lacks variant {v}", o.rep))
                })
            })
            .collect::<Result<_>>()?;
        let s: Vec<f64> = records
            .iter()
            .map(|r| metrics::min_model_size(r).map(|s| s as f64))
            .collect::<Result<_>>()?;
        let mut s_quantiles = [0.0; 5];
        for (slot, &q) in s_quantiles.iter_mut().zip(&S_QUANTILE_LEVELS) {
            *slot = metrics::quantile(&s, q)?;
        }
        let m = outcomes[0].m_used.get(v).copied().unwrap_or(0);
        for &d in &sizes {
            let (p_j, p_a) = metrics::selection_proportions(&records, d)?;
            rows.push(ReportRow {
                variant: variant.name.clone(),
                m,
                d,
                s_quantiles,
                iqr: s_quantiles[3] - s_quantiles[1],
                active_set: records[0].active_set.clone(),
                p_j,
                p_a,
                realized_cr,
                seconds_per_rep,
            });
        }
    }
    Ok(rows)
}
