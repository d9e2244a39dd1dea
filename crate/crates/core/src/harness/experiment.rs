use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::adversarial::{AdvConfig, AdversarialCombiner};
use crate::bases::make_restricted_linucb;
use crate::combiner::{
    build_doubling_grid, sqrt_t_targets, target_regrets_from_eta, Combiner, CombinerConfig,
    EtaPrior, TargetMode, ThresholdRule,
};
use crate::contract::{BaseAlgorithm, PutativeBound};
use crate::error::{Error, Result};
use crate::harness::calibrate::{calibrate_putative_bound, run_alone, CalibrationResult};
use crate::harness::spec::{
    BuildContext, ExperimentConfig, ExperimentKind, LearnerSpec, TargetSpec,
};
use crate::rng::{fork_rng, replication_stream, stream};
use crate::trace::RegretTrace;

pub const TRACE_HEADER: &str = "rep,t,chosen,inst_regret,cum_regret,active_count";
pub const SUMMARY_HEADER: &str = "policy,t,mean,std";

/// A base with its envelope resolved.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedBase {
    pub name: String,
    #[serde(skip)]
    pub learner: LearnerSpec,
    pub coefficient: f64,
    pub alpha: f64,
    pub eta: f64,
}

/// Everything fixed before the first replication: resolved envelopes,
/// the combiner's learner roster and its targets.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    pub cfg: ExperimentConfig,
    pub ctx: BuildContext,
    pub bases: Vec<ResolvedBase>,
    pub calibration: Vec<CalibrationResult>,
    /// Index into `bases` for every learner the combiner runs (duplicates
    /// under the doubling grid).
    pub roster: Vec<usize>,
    pub bounds: Vec<PutativeBound>,
    pub targets: Vec<f64>,
    pub target_mode: TargetMode,
}

#[derive(Debug, Clone)]
pub struct SeriesResult {
    pub name: String,
    /// One trace per replication, in replication order.
    pub traces: Vec<RegretTrace>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub prepared: PreparedExperiment,
    pub series: Vec<SeriesResult>,
    /// Environment description per replication.
    pub environments: Vec<String>,
}

impl ExperimentResults {
    pub fn series(&self, name: &str) -> Option<&SeriesResult> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Mean cumulative regret at the last round.
    pub fn final_mean(&self, name: &str) -> Option<f64> {
        let s = self.series(name)?;
        Some(s.traces.iter().map(RegretTrace::total).sum::<f64>() / s.traces.len() as f64)
    }
}

fn calibrate_base(
    cfg: &ExperimentConfig,
    ctx: &BuildContext,
    index: usize,
) -> Result<Option<CalibrationResult>> {
    let base = &cfg.bases[index];
    let Some(cal) = &base.bound.calibrate else {
        return Ok(None);
    };
    let env_spec = cal.env.as_ref().unwrap_or(&cfg.environment);
    if env_spec.arms()? != ctx.arms {
        return Err(Error::Config(format!(
            "base `{}`: calibration environment has a different arm count",
            base.name
        )));
    }
    let horizon = cal.horizon.unwrap_or(cfg.horizon);
    let seed = cfg.seed.wrapping_add((index as u64) << 32);
    let fit = calibrate_putative_bound(
        &base.name,
        || base.learner.build(ctx),
        |rng| env_spec.build(rng),
        horizon,
        base.bound.alpha,
        cal.reps,
        seed,
    )?;
    Ok(Some(fit.with_margin(cal.margin)))
}

/// Resolves envelopes (calibrating where asked) and targets.
pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedExperiment> {
    cfg.validate()?;
    let ctx = BuildContext::new(&cfg.environment, cfg.horizon, cfg.delta)?;
    let mut bases = Vec::with_capacity(cfg.bases.len());
    let mut calibration = Vec::new();
    for (i, b) in cfg.bases.iter().enumerate() {
        let coefficient = match calibrate_base(cfg, &ctx, i)? {
            Some(fit) => {
                let c = fit.coefficient;
                calibration.push(fit);
                c
            }
            None => b.bound.c.expect("validated"),
        };
        bases.push(ResolvedBase {
            name: b.name.clone(),
            learner: b.learner.clone(),
            coefficient,
            alpha: b.bound.alpha,
            eta: b.eta,
        });
    }

    let (roster, bounds, etas) = if cfg.flags.doubling {
        let prior = EtaPrior::new(bases.iter().map(|b| b.eta).collect())?;
        let grid = build_doubling_grid(bases.len(), cfg.horizon, cfg.delta, &prior)?;
        (
            grid.cells.iter().map(|c| c.original).collect::<Vec<_>>(),
            grid.bounds(),
            grid.cells.iter().map(|c| c.eta).collect::<Vec<_>>(),
        )
    } else {
        let bounds = bases
            .iter()
            .map(|b| PutativeBound::new(b.coefficient, b.alpha))
            .collect::<Result<Vec<_>>>()?;
        (
            (0..bases.len()).collect(),
            bounds,
            bases.iter().map(|b| b.eta).collect(),
        )
    };

    let n = bounds.len();
    let (targets, target_mode) = if cfg.flags.gap_mode {
        (vec![0.0; n], TargetMode::Gap)
    } else {
        match &cfg.targets {
            TargetSpec::Gap => (vec![0.0; n], TargetMode::Gap),
            TargetSpec::SqrtT => (sqrt_t_targets(&bounds, cfg.horizon), TargetMode::Override),
            TargetSpec::Eta => (
                target_regrets_from_eta(&bounds, &EtaPrior::new(etas)?, cfg.horizon, cfg.delta)?,
                TargetMode::Checked,
            ),
            TargetSpec::Explicit { values } => {
                if cfg.flags.doubling {
                    return Err(Error::Config(
                        "explicit targets cannot be combined with doubling".into(),
                    ));
                }
                (values.clone(), TargetMode::Override)
            }
        }
    };

    Ok(PreparedExperiment {
        cfg: cfg.clone(),
        ctx,
        bases,
        calibration,
        roster,
        bounds,
        targets,
        target_mode,
    })
}

impl PreparedExperiment {
    pub fn combiner_config(&self) -> Result<CombinerConfig> {
        let mut c = CombinerConfig::new(
            self.bounds.clone(),
            self.targets.clone(),
            self.cfg.horizon,
            self.cfg.delta,
        )?
        .with_target_mode(self.target_mode);
        if self.cfg.flags.literal_constants {
            c = c.with_threshold(ThresholdRule::Pseudocode);
        }
        if self.cfg.flags.clamp {
            c = c.with_clamp(0.0, 1.0);
        }
        Ok(c)
    }

    pub fn adversarial_config(&self) -> Result<AdvConfig> {
        let dims = self
            .bases
            .iter()
            .map(|b| {
                b.learner
                    .d_hat(&self.ctx)
                    .ok_or_else(|| Error::Config("adversarial bases must be linucb".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let lambda = match self.bases[0].learner {
            LearnerSpec::Linucb { lambda, .. } => lambda,
            _ => unreachable!("validated"),
        };
        let mut c = AdvConfig::new(
            dims,
            self.targets.clone(),
            self.cfg.horizon,
            self.cfg.delta,
            lambda,
        )?;
        if self.cfg.flags.literal_constants {
            c = c.with_literal_beta()?;
        }
        c.with_bounds(self.bounds.clone())
    }

    fn alone_learner(&self, index: usize) -> Result<Box<dyn BaseAlgorithm>> {
        if self.cfg.kind == ExperimentKind::Adversarial {
            // Alone runs use the same radius the combiner gives this learner.
            let adv = self.adversarial_config()?;
            let lambda = adv.lambda();
            return Ok(Box::new(make_restricted_linucb(
                adv.dims()[index],
                lambda,
                adv.betas()[index],
            )?));
        }
        self.bases[index].learner.build(&self.ctx)
    }

    /// Runs every series for replication `rep`.
    pub fn run_replication(&self, rep: u64) -> Result<(String, Vec<RegretTrace>)> {
        let seed = self.cfg.seed;
        let instance = |rng_stream| -> Result<_> {
            let mut rng = fork_rng(seed, replication_stream(rep, rng_stream));
            self.cfg.environment.build(&mut rng)
        };
        let description = instance(stream::ENV_INSTANCE)?.describe().to_string();
        let mut out = Vec::with_capacity(self.cfg.series.len());
        for name in &self.cfg.series {
            let mut env = instance(stream::ENV_INSTANCE)?;
            let mut rng = fork_rng(seed, replication_stream(rep, stream::ENV_NOISE));
            let horizon = self.cfg.horizon;
            let trace = if name == "combiner" {
                if self.cfg.kind == ExperimentKind::Adversarial {
                    let mut c = AdversarialCombiner::new(self.adversarial_config()?)?;
                    c.run_rounds(&mut env, horizon, &mut rng)?;
                    c.into_trace()
                } else {
                    let learners = self
                        .roster
                        .iter()
                        .map(|&i| self.bases[i].learner.build(&self.ctx))
                        .collect::<Result<Vec<_>>>()?;
                    let mut c = Combiner::new(learners, self.combiner_config()?)?;
                    c.run_rounds(&mut env, horizon, &mut rng)?;
                    c.into_trace()
                }
            } else {
                let i = self
                    .bases
                    .iter()
                    .position(|b| &b.name == name)
                    .expect("validated");
                let mut base = self.alone_learner(i)?;
                run_alone(&mut env, &mut base, horizon, &mut rng)?
            };
            out.push(trace);
        }
        Ok((description, out))
    }
}

/// Prepares and runs all replications (in parallel, merged in replication
/// order).
pub fn run_experiment_in_memory(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    let prepared = prepare(cfg)?;
    let reps: Vec<(String, Vec<RegretTrace>)> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| prepared.run_replication(r))
        .collect::<Result<Vec<_>>>()?;
    let mut series: Vec<SeriesResult> = cfg
        .series
        .iter()
        .map(|name| SeriesResult {
            name: name.clone(),
            traces: Vec::with_capacity(reps.len()),
        })
        .collect();
    let mut environments = Vec::with_capacity(reps.len());
    for (desc, traces) in reps {
        environments.push(desc);
        for (s, t) in series.iter_mut().zip(traces) {
            s.traces.push(t);
        }
    }
    Ok(ExperimentResults {
        prepared,
        series,
        environments,
    })
}

/// SHA-256 of the canonical TOML form of `cfg`.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    Ok(hex::encode(Sha256::digest(cfg.to_toml()?.as_bytes())))
}

fn recorded(t: u64, every: u64, horizon: u64) -> bool {
    t.is_multiple_of(every) || t == horizon
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn write_trace_csv<W: Write>(
    out: &mut W,
    traces: &[RegretTrace],
    every: u64,
    horizon: u64,
) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for (rep, trace) in traces.iter().enumerate() {
        for row in trace.rows.iter().filter(|r| recorded(r.t, every, horizon)) {
            writeln!(
                out,
                "{rep},{},{},{:.16e},{:.16e},{}",
                row.t, row.chosen, row.inst_regret, row.cum_regret, row.active_count
            )?;
        }
    }
    Ok(())
}

/// Per recorded round: mean and sample standard deviation of cumulative
/// regret across replications.
pub fn summarize(traces: &[RegretTrace], every: u64, horizon: u64) -> Vec<(u64, f64, f64)> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    let n = traces.len() as f64;
    (0..first.rows.len())
        .filter(|&k| recorded(first.rows[k].t, every, horizon))
        .map(|k| {
            let vals: Vec<f64> = traces.iter().map(|tr| tr.rows[k].cum_regret).collect();
            let mean = vals.iter().sum::<f64>() / n;
            let var = if vals.len() > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            (first.rows[k].t, mean, var.sqrt())
        })
        .collect()
}

#[derive(Serialize)]
struct Metadata<'a> {
    version: &'static str,
    config_sha256: String,
    seed: u64,
    replications: usize,
    horizon: u64,
    delta: f64,
    bases: &'a [ResolvedBase],
    combiner_bounds: Vec<(f64, f64)>,
    combiner_targets: &'a [f64],
    target_mode: String,
    calibration: &'a [CalibrationResult],
    environments: &'a [String],
    fallback_resets: BTreeMap<&'a str, Vec<u32>>,
}

/// Writes `trace_<series>.csv`, `summary.csv` and `metadata.json` into `dir`.
pub fn write_outputs(results: &ExperimentResults, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let cfg = &results.prepared.cfg;
    let mut files = Vec::new();
    for s in &results.series {
        let path = dir.join(format!("trace_{}.csv", file_safe(&s.name)));
        let mut w = BufWriter::new(fs::File::create(&path)?);
        write_trace_csv(&mut w, &s.traces, cfg.record_every, cfg.horizon)?;
        w.flush()?;
        files.push(path);
    }

    let path = dir.join("summary.csv");
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in &results.series {
        for (t, mean, sd) in summarize(&s.traces, cfg.record_every, cfg.horizon) {
            writeln!(w, "{},{t},{mean:.16e},{sd:.16e}", s.name)?;
        }
    }
    w.flush()?;
    files.push(path);

    let p = &results.prepared;
    let meta = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: config_hash(cfg)?,
        seed: cfg.seed,
        replications: cfg.replications,
        horizon: cfg.horizon,
        delta: cfg.delta,
        bases: &p.bases,
        combiner_bounds: p
            .bounds
            .iter()
            .map(|b| (b.coefficient(), b.exponent()))
            .collect(),
        combiner_targets: &p.targets,
        target_mode: format!("{:?}", p.target_mode),
        calibration: &p.calibration,
        environments: &results.environments,
        fallback_resets: results
            .series
            .iter()
            .map(|s| {
                (
                    s.name.as_str(),
                    s.traces.iter().map(|t| t.fallback_resets).collect(),
                )
            })
            .collect(),
    };
    let path = dir.join("metadata.json");
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Numerical(e.to_string()))?;
    fs::write(&path, text + "\n")?;
    files.push(path);
    Ok(files)
}

/// Runs `cfg` and writes its outputs into `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentResults> {
    let results = run_experiment_in_memory(cfg)?;
    write_outputs(&results, dir)?;
    Ok(results)
}
