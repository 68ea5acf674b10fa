//! Runs every (method, seed) cell of an experiment and writes the report
//! directory:
//!
//! ```text
//! metrics.csv                method,seed,metric,value
//! summary.csv                method,metric,median
//! pad.csv                    source,pad,rank
//! bound.txt                  key = value (only when target labels exist)
//! wilcoxon.csv               pair,statistic,p
//! trace/<method>-<seed>.log  one JSON object per training step
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rayon::prelude::*;
use serde_json::json;

use super::config::{ExperimentConfig, Method};
use super::pad::{pad, PadReport};
use super::wilcoxon::wilcoxon_signed_rank;
use crate::data::io::write_file;
use crate::data::{LabeledDomain, MultiDomain};
use crate::error::{Error, Result};
use crate::mdan::{
    evaluate, train, train_dann, train_source_only, Metric, MdanModel, Mode, ModelConfig,
    TrainConfig,
};
use crate::nn::Matrix;
use crate::rng::stream_rng;
use crate::theory::{assemble_bound, enumerate_stumps, worst_source_risk, BoundReport};

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub method: Method,
    pub seed: u64,
    pub value: f64,
    /// JSON lines of the training trace, when the method has one.
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub metric: Metric,
    pub cells: Vec<CellResult>,
    pub pad: PadReport,
    pub bound: Option<BoundReport>,
}

impl ExperimentReport {
    pub fn values(&self, method: Method) -> Vec<f64> {
        self.cells.iter().filter(|c| c.method == method).map(|c| c.value).collect()
    }

    pub fn median(&self, method: Method) -> Option<f64> {
        median(&self.values(method))
    }

    pub fn methods(&self) -> Vec<Method> {
        let mut m: Vec<Method> = self.cells.iter().map(|c| c.method).collect();
        m.dedup();
        m
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("method,seed,metric,value\n");
        for c in &self.cells {
            writeln!(out, "{},{},{},{}", c.method.name(), c.seed, self.metric.name(), c.value).unwrap();
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("method,metric,median\n");
        for m in self.methods() {
            writeln!(out, "{},{},{}", m.name(), self.metric.name(), self.median(m).unwrap()).unwrap();
        }
        out
    }

    pub fn wilcoxon_csv(&self) -> Result<String> {
        let mut out = String::from("pair,statistic,p\n");
        let methods = self.methods();
        for (i, a) in methods.iter().enumerate() {
            for b in &methods[i + 1..] {
                let r = wilcoxon_signed_rank(&self.values(*a), &self.values(*b))?;
                writeln!(out, "{}-vs-{},{},{}", a.name(), b.name(), r.statistic, r.p_value).unwrap();
            }
        }
        Ok(out)
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        write_file(&out.join("metrics.csv"), &self.metrics_csv())?;
        write_file(&out.join("summary.csv"), &self.summary_csv())?;
        write_file(&out.join("pad.csv"), &self.pad.to_csv())?;
        write_file(&out.join("wilcoxon.csv"), &self.wilcoxon_csv()?)?;
        if let Some(b) = &self.bound {
            write_file(&out.join("bound.txt"), &b.to_text())?;
        }
        for c in self.cells.iter().filter(|c| !c.trace.is_empty()) {
            let mut text = c.trace.join("\n");
            text.push('\n');
            write_file(&out.join("trace").join(format!("{}-{}.log", c.method.name(), c.seed)), &text)?;
        }
        Ok(())
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn better(metric: Metric, a: f64, b: f64) -> bool {
    match metric {
        Metric::Accuracy => a > b,
        Metric::Mae => a < b,
    }
}

fn select_best(metric: Metric, values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let first = it.next().expect("at least one source");
    it.fold(first, |best, v| if better(metric, v, best) { v } else { best })
}

struct Context<'a> {
    data: &'a MultiDomain,
    target: LabeledDomain,
    combined: LabeledDomain,
    model: ModelConfig,
    train: TrainConfig,
    metric: Metric,
}

fn run_cell(ctx: &Context, method: Method, seed: u64) -> Result<CellResult> {
    let cfg = TrainConfig {
        seed,
        ..ctx.train.clone()
    };
    let k = ctx.data.k();
    let eval = |m: &MdanModel| evaluate(m, &ctx.target, ctx.metric);
    let source_only = |src: &LabeledDomain| -> Result<(f64, Vec<f64>)> {
        let (m, losses) = train_source_only(MdanModel::new(&ctx.model, 1, seed)?, src, &cfg)?;
        Ok((eval(&m)?, losses))
    };
    let dann = |src: &LabeledDomain| -> Result<(f64, Vec<String>)> {
        let (m, hist) = train_dann(MdanModel::new(&ctx.model, 1, seed)?, src, &ctx.data.target, &cfg)?;
        let trace = hist
            .iter()
            .enumerate()
            .map(|(t, h)| json!({"step": t, "task_loss": h.task_loss, "domain_loss": h.domain_loss}).to_string())
            .collect();
        Ok((eval(&m)?, trace))
    };
    let (value, trace) = match method {
        Method::SourceOnlyCombined => {
            let (v, losses) = source_only(&ctx.combined)?;
            let trace = losses
                .iter()
                .enumerate()
                .map(|(t, l)| json!({"step": t, "task_loss": l}).to_string())
                .collect();
            (v, trace)
        }
        Method::BestSingleSource => {
            let vals = ctx
                .data
                .sources
                .iter()
                .map(|s| source_only(s).map(|r| r.0))
                .collect::<Result<Vec<_>>>()?;
            (select_best(ctx.metric, vals), Vec::new())
        }
        Method::DannSingleBest => {
            let vals = ctx
                .data
                .sources
                .iter()
                .map(|s| dann(s).map(|r| r.0))
                .collect::<Result<Vec<_>>>()?;
            (select_best(ctx.metric, vals), Vec::new())
        }
        Method::DannCombined => dann(&ctx.combined)?,
        Method::MdanHard | Method::MdanSoft => {
            let mode = if method == Method::MdanHard { Mode::Hard } else { Mode::Soft };
            let cfg = TrainConfig { mode, ..cfg.clone() };
            let out = train(MdanModel::new(&ctx.model, k, seed)?, &ctx.data.sources, &ctx.data.target, &cfg)?;
            (eval(&out.model)?, out.history.iter().map(|t| t.to_json()).collect())
        }
    };
    Ok(CellResult {
        method,
        seed,
        value,
        trace,
    })
}

fn subsample(m: &Matrix, n: usize, seed: u64, stream: u64) -> Vec<usize> {
    if m.rows() <= n {
        return (0..m.rows()).collect();
    }
    let mut idx = index::sample(&mut stream_rng(seed, stream), m.rows(), n).into_vec();
    idx.sort_unstable();
    idx
}

/// Bound for the stump minimizing the worst source risk, on a subsample of
/// `cfg.bound.sample` points per domain.
pub fn bound_for(cfg: &ExperimentConfig, data: &MultiDomain, target: &LabeledDomain) -> Result<BoundReport> {
    let b = &cfg.bound;
    let sources: Vec<LabeledDomain> = data
        .sources
        .iter()
        .enumerate()
        .map(|(i, s)| s.subset(&subsample(s.features(), b.sample, b.seed, i as u64)))
        .collect();
    let target = target.subset(&subsample(target.features(), b.sample, b.seed, u64::MAX));
    let mut parts = vec![target.features()];
    parts.extend(sources.iter().map(LabeledDomain::features));
    let class = enumerate_stumps(&Matrix::vstack(&parts)?)?;
    let mut best = (class.hypotheses()[0], f64::INFINITY);
    for h in class.hypotheses() {
        let r = worst_source_risk(h, &sources);
        if r < best.1 {
            best = (*h, r);
        }
    }
    assemble_bound(&class, &best.0, target.features(), &sources, Some(&target), b.delta)
}

/// Trains every selected method for every seed on the same data. Cells run
/// in parallel; results are ordered by method (as listed) then seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let data = cfg.load_data()?;
    let target = data.target.oracle().map_err(|_| {
        Error::Config("target labels are required to score methods (oracle evaluation)".into())
    })?;
    let num_classes = data
        .sources
        .iter()
        .flat_map(|s| s.labels().iter())
        .chain(target.labels())
        .max()
        .map_or(2, |m| (m + 1).max(2));
    let ctx = Context {
        data: &data,
        combined: LabeledDomain::concat(&data.sources)?,
        target: target.clone(),
        model: cfg.model_config(data.dim(), num_classes)?,
        train: cfg.train.clone(),
        metric: cfg.experiment.metric,
    };
    let mut methods = cfg.experiment.methods.clone();
    methods.dedup();
    let jobs: Vec<(Method, u64)> = methods
        .iter()
        .flat_map(|&m| cfg.experiment.seeds.iter().map(move |&s| (m, s)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(m, s)| run_cell(&ctx, m, s))
        .collect::<Result<Vec<_>>>()?;

    let pads = data
        .sources
        .iter()
        .map(|s| pad(s.features(), data.target.features(), &cfg.pad))
        .collect::<Result<Vec<_>>>()?;
    let bound = if cfg.bound.enabled {
        Some(bound_for(cfg, &data, &target)?)
    } else {
        None
    };
    Ok(ExperimentReport {
        metric: cfg.experiment.metric,
        cells,
        pad: PadReport::new(pads),
        bound,
    })
}
