//! Rule sweeps over datasets, CSV output and summary statistics.
//!
//! Seeding: each dataset is generated once from `derive_seed(base, id)` and
//! shared by every rule; the mapping seed is the base seed. A record therefore
//! depends only on the base seed, its dataset and its rule, and adding rules
//! to a sweep never changes existing records.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::datasets::{generate_with, DatasetId, GenOptions, SplitSpec, Task};
use crate::error::{Error, Result};
use crate::lattice::LinearRule;
use crate::pipeline::{evaluate, Encoding, ModelConfig, Transformation};
use crate::rng::{derive_seed, hash_str};

/// Settings shared by every job of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub rows: usize,
    pub cols: usize,
    pub iterations: usize,
    pub transformation: Transformation,
    pub encoding: Encoding,
    pub ridge_alpha: f64,
    pub input_skip: bool,
    pub base_seed: u64,
    pub split: SplitSpec,
    pub gen: GenOptions,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            rows: 16,
            cols: 32,
            iterations: 4,
            transformation: Transformation::ScaleOffset,
            encoding: Encoding::Replacement,
            ridge_alpha: 1.0,
            input_skip: false,
            base_seed: 0,
            split: SplitSpec::default(),
            gen: GenOptions::default(),
            workers: 1,
        }
    }
}

impl SweepConfig {
    pub fn model(&self, rule: LinearRule) -> ModelConfig {
        ModelConfig {
            rows: self.rows,
            cols: self.cols,
            iterations: self.iterations,
            transformation: self.transformation,
            encoding: self.encoding,
            mapping_seed: self.base_seed,
            ridge_alpha: self.ridge_alpha,
            input_skip: self.input_skip,
            washout: self.split.washout,
            ..ModelConfig::new(rule)
        }
    }

    pub fn dataset_seed(&self, id: DatasetId) -> u64 {
        derive_seed(self.base_seed, &[hash_str(id.name())])
    }

    pub fn task(&self, id: DatasetId) -> Result<Task> {
        generate_with(id, &self.split, self.dataset_seed(id), self.gen)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub rows: usize,
    pub cols: usize,
    pub iterations: usize,
    pub m: u32,
    pub neighborhood: usize,
    pub transformation: Transformation,
    pub encoding: Encoding,
    pub seed: u64,
    pub rule: String,
    pub nmse_train: Option<f64>,
    pub nmse_test: Option<f64>,
    pub nmse_validation: Option<f64>,
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    fn csv_fields(&self) -> Vec<String> {
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            format!("{}x{}", self.rows, self.cols),
            self.iterations.to_string(),
            self.m.to_string(),
            self.neighborhood.to_string(),
            self.transformation.to_string(),
            quantization_name(self.transformation).to_string(),
            self.encoding.to_string(),
            "random".to_string(),
            self.seed.to_string(),
            self.rule.clone(),
            num(self.nmse_train),
            num(self.nmse_test),
            num(self.nmse_validation),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn quantization_name(t: Transformation) -> &'static str {
    if t == Transformation::Gray {
        "rounding_gray"
    } else {
        "rounding"
    }
}

pub const CSV_HEADER: [&str; 14] = [
    "lattice",
    "iterations",
    "m",
    "neighborhood",
    "transformation",
    "quantization",
    "encoding",
    "mapping",
    "seed",
    "rule",
    "nmse_train",
    "nmse_test",
    "nmse_validation",
    "error",
];

fn run_job(cfg: &SweepConfig, id: DatasetId, task: &Result<Task>, rule: &LinearRule) -> ExperimentRecord {
    let model = cfg.model(rule.clone());
    let outcome = task.as_ref().map_err(Clone::clone).and_then(|t| evaluate(&model, t));
    let (train, test, validation, error) = match outcome {
        Ok(e) => (
            Some(e.train.nmse),
            Some(e.test.nmse),
            e.validation.map(|v| v.nmse),
            None,
        ),
        Err(e) => (None, None, None, Some(e.to_string())),
    };
    ExperimentRecord {
        dataset: id.name().to_string(),
        rows: cfg.rows,
        cols: cfg.cols,
        iterations: cfg.iterations,
        m: rule.m(),
        neighborhood: rule.neighborhood(),
        transformation: cfg.transformation,
        encoding: cfg.encoding,
        seed: model.mapping_seed,
        rule: rule.to_string(),
        nmse_train: train,
        nmse_test: test,
        nmse_validation: validation,
        error,
    }
}

/// Evaluates every (rule, dataset) pair on a pool of `cfg.workers` threads.
/// Records come back sorted by dataset, then rule coefficients.
pub fn sweep(
    rules: &[LinearRule],
    datasets: &[DatasetId],
    cfg: &SweepConfig,
) -> Result<Vec<ExperimentRecord>> {
    if rules.is_empty() || datasets.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rules = rules.to_vec();
    rules.sort_by(|a, b| (a.m(), a.coeffs()).cmp(&(b.m(), b.coeffs())));
    rules.dedup();
    let mut datasets = datasets.to_vec();
    datasets.sort_by_key(|d| d.name());
    datasets.dedup();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(pool.install(|| {
        let tasks: Vec<Result<Task>> = datasets.par_iter().map(|&id| cfg.task(id)).collect();
        let jobs: Vec<(usize, &LinearRule)> = (0..datasets.len())
            .flat_map(|d| rules.iter().map(move |r| (d, r)))
            .collect();
        jobs.par_iter()
            .with_max_len(1)
            .map(|&(d, r)| run_job(cfg, datasets[d], &tasks[d], r))
            .collect()
    }))
}

/// Writes records as CSV: header, then one line per record.
pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record(r.csv_fields()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Groups records into one CSV text per dataset.
pub fn csv_by_dataset(records: &[ExperimentRecord]) -> Result<BTreeMap<String, String>> {
    let mut groups: BTreeMap<String, Vec<ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.dataset.clone()).or_default().push(r.clone());
    }
    groups
        .into_iter()
        .map(|(name, recs)| {
            let mut buf = Vec::new();
            write_csv(&recs, &mut buf)?;
            Ok((name, String::from_utf8(buf).expect("csv output is utf-8")))
        })
        .collect()
}

/// Step points `(value, fraction of values <= value)` of the empirical CDF.
pub fn ecdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == x => last.1 = p,
            _ => points.push((x, p)),
        }
    }
    Ok(points)
}

/// Percentage of `all` that is strictly worse (larger) than `selected`.
pub fn percent_better(selected: f64, all: &[f64]) -> Result<f64> {
    if all.is_empty() {
        return Err(Error::EmptyInput);
    }
    let worse = all.iter().filter(|&&v| v > selected).count();
    Ok(100.0 * worse as f64 / all.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleScore {
    pub rule: String,
    pub m: u32,
    pub mean_nmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedScore {
    pub rule: String,
    pub mean_nmse: f64,
    pub percent_better: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub per_rule: Vec<RuleScore>,
    pub ecdf: Vec<(f64, f64)>,
    pub selected: Vec<SelectedScore>,
    pub failed_records: usize,
}

/// Mean test NMSE per rule over datasets. Rules with any failed record are
/// left out of the ECDF and ranking.
pub fn summarize(records: &[ExperimentRecord], selected: &[LinearRule]) -> Result<SweepSummary> {
    let mut by_rule: BTreeMap<(u32, String), Vec<Option<f64>>> = BTreeMap::new();
    for r in records {
        by_rule
            .entry((r.m, r.rule.clone()))
            .or_default()
            .push(r.nmse_test.filter(|_| r.ok()));
    }
    let per_rule: Vec<RuleScore> = by_rule
        .into_iter()
        .filter_map(|((m, rule), v)| {
            let vals: Option<Vec<f64>> = v.into_iter().collect();
            vals.map(|vals| RuleScore {
                rule,
                m,
                mean_nmse: vals.iter().sum::<f64>() / vals.len() as f64,
            })
        })
        .collect();
    let all: Vec<f64> = per_rule.iter().map(|s| s.mean_nmse).collect();
    let ecdf_points = ecdf(&all)?;
    let mut chosen = Vec::new();
    for rule in selected {
        let key = rule.to_string();
        if let Some(s) = per_rule.iter().find(|s| s.m == rule.m() && s.rule == key) {
            chosen.push(SelectedScore {
                rule: key,
                mean_nmse: s.mean_nmse,
                percent_better: percent_better(s.mean_nmse, &all)?,
            });
        }
    }
    Ok(SweepSummary {
        per_rule,
        ecdf: ecdf_points,
        selected: chosen,
        failed_records: records.iter().filter(|r| !r.ok()).count(),
    })
}

pub fn summary_json(summary: &SweepSummary) -> Result<String> {
    serde_json::to_string_pretty(summary).map_err(|e| Error::Io(e.to_string()))
}
