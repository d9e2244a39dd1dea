//! Experiment configuration schema.

use serde::{Deserialize, Serialize};

use crate::bases::{
    make_fixed_arm, make_restricted_linucb, make_restricted_ucb, oful_beta, ucb_conf_scale,
};
use crate::contract::{BaseAlgorithm, Environment};
use crate::environments::{
    make_adversarial_linear_env, make_misspecified_env, make_model_selection_env, unit_sphere,
    FeatureSchedule, KArmedEnv, Noise,
};
use crate::error::{Error, Result};
use crate::rng::SimRng;

fn default_sigma() -> f64 {
    0.1
}

fn default_best() -> f64 {
    0.8
}

fn default_lambda() -> f64 {
    2.0
}

fn default_one() -> f64 {
    1.0
}

fn default_reps() -> usize {
    1
}

fn default_delta() -> f64 {
    0.05
}

fn default_record_every() -> u64 {
    1
}

fn default_calibration_reps() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Misspecified,
    ModelSelection,
    Karmed,
    Adversarial,
    #[default]
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    #[default]
    Spherical,
    Rotating,
}

/// Environment family and parameters. A fresh instance is drawn for every
/// replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum EnvSpec {
    /// Explicit `means`, or `arms` with either `uniform = true` or a `gap`
    /// below `best` for every arm except `optimal_arm`.
    Karmed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        means: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arms: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gap: Option<f64>,
        #[serde(default = "default_best")]
        best: f64,
        #[serde(default)]
        optimal_arm: usize,
        #[serde(default)]
        uniform: bool,
        #[serde(default)]
        noise: NoiseKind,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Misspecified {
        arms: usize,
        dim: usize,
        alpha_mix: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Modelselection {
        arms: usize,
        dim: usize,
        d_star: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// `theta` defaults to a random unit vector on the first `d_star`
    /// coordinates.
    Adversarial {
        dim: usize,
        d_star: usize,
        actions: usize,
        #[serde(default)]
        schedule: ScheduleKind,
        #[serde(default = "default_sigma")]
        noise: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Vec<f64>>,
    },
}

impl EnvSpec {
    pub fn arms(&self) -> Result<usize> {
        match self {
            EnvSpec::Karmed { means, arms, .. } => {
                means.as_ref().map(|m| m.len()).or(*arms).ok_or_else(|| {
                    Error::Config("karmed environment needs `means` or `arms`".into())
                })
            }
            EnvSpec::Misspecified { arms, .. } | EnvSpec::Modelselection { arms, .. } => Ok(*arms),
            EnvSpec::Adversarial { actions, .. } => Ok(*actions),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            EnvSpec::Karmed { .. } => None,
            EnvSpec::Misspecified { dim, .. }
            | EnvSpec::Modelselection { dim, .. }
            | EnvSpec::Adversarial { dim, .. } => Some(*dim),
        }
    }

    /// Observation noise scale, used for default confidence widths.
    pub fn noise_scale(&self) -> f64 {
        match self {
            EnvSpec::Karmed {
                noise: NoiseKind::Bernoulli,
                ..
            } => 0.5,
            EnvSpec::Karmed { sigma, .. }
            | EnvSpec::Misspecified { sigma, .. }
            | EnvSpec::Modelselection { sigma, .. } => *sigma,
            EnvSpec::Adversarial { noise, .. } => *noise,
        }
    }

    /// Norm of the true linear parameter, used for default linUCB radii.
    pub fn parameter_norm(&self) -> f64 {
        match self {
            EnvSpec::Misspecified { dim, .. } => (*dim as f64).sqrt(),
            _ => 1.0,
        }
    }

    pub fn build(&self, rng: &mut SimRng) -> Result<Box<dyn Environment>> {
        Ok(match self {
            EnvSpec::Karmed {
                means,
                arms,
                gap,
                best,
                optimal_arm,
                uniform,
                noise,
                sigma,
            } => {
                let noise = match noise {
                    NoiseKind::Gaussian => Noise::Gaussian { sigma: *sigma },
                    NoiseKind::Bernoulli => Noise::Bernoulli,
                };
                match (means, arms, uniform, gap) {
                    (Some(m), _, _, _) => Box::new(KArmedEnv::new(m.clone(), noise)?),
                    (None, Some(k), true, _) => Box::new(KArmedEnv::uniform_means(*k, noise, rng)?),
                    (None, Some(k), false, Some(g)) => {
                        if optimal_arm >= k {
                            return Err(Error::Config(format!("optimal_arm {optimal_arm} out of range")));
                        }
                        let m = (0..*k).map(|a| if a == *optimal_arm { *best } else { best - g }).collect();
                        Box::new(KArmedEnv::new(m, noise)?)
                    }
                    _ => {
                        return Err(Error::Config(
                            "karmed environment needs `means`, or `arms` with `gap` or `uniform = true`".into(),
                        ))
                    }
                }
            }
            EnvSpec::Misspecified {
                arms,
                dim,
                alpha_mix,
                sigma,
            } => Box::new(make_misspecified_env(*arms, *dim, *alpha_mix, *sigma, rng)?),
            EnvSpec::Modelselection {
                arms,
                dim,
                d_star,
                sigma,
            } => Box::new(make_model_selection_env(*arms, *dim, *d_star, *sigma, rng)?),
            EnvSpec::Adversarial {
                dim,
                d_star,
                actions,
                schedule,
                noise,
                theta,
            } => {
                let theta = match theta {
                    Some(t) => nalgebra::DVector::from_vec(t.clone()),
                    None => unit_sphere(*d_star, rng),
                };
                let schedule = match schedule {
                    ScheduleKind::Spherical => FeatureSchedule::Spherical,
                    ScheduleKind::Rotating => FeatureSchedule::Rotating,
                };
                Box::new(
                    make_adversarial_linear_env(*dim, *d_star, *actions, &theta, schedule, rng)?
                        .with_noise(*noise)?,
                )
            }
        })
    }
}

/// Learner family and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum LearnerSpec {
    /// UCB over `arms` (all arms when absent). The width scale defaults to
    /// `noise_scale * sqrt(2 ln(2 T K / delta))`.
    Ucb {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arms: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        conf: Option<f64>,
        #[serde(default = "default_one")]
        noise_scale: f64,
    },
    /// linUCB on the first `d_hat` coordinates (all when absent). The radius
    /// defaults to the self-normalized bound with the environment's noise
    /// scale and `norm_bound` (the environment's parameter norm when absent).
    Linucb {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d_hat: Option<usize>,
        #[serde(default = "default_lambda")]
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm_bound: Option<f64>,
    },
    Fixed {
        arm: usize,
    },
}

/// What a learner needs to know about the run to pick its defaults.
#[derive(Debug, Clone, Copy)]
pub struct BuildContext {
    pub horizon: u64,
    pub delta: f64,
    pub arms: usize,
    pub dim: Option<usize>,
    pub noise_scale: f64,
    pub parameter_norm: f64,
}

impl BuildContext {
    pub fn new(env: &EnvSpec, horizon: u64, delta: f64) -> Result<Self> {
        Ok(Self {
            horizon,
            delta,
            arms: env.arms()?,
            dim: env.dim(),
            noise_scale: env.noise_scale(),
            parameter_norm: env.parameter_norm(),
        })
    }
}

impl LearnerSpec {
    /// Dimension the learner works in, if linear.
    pub fn d_hat(&self, ctx: &BuildContext) -> Option<usize> {
        match self {
            LearnerSpec::Linucb { d_hat, .. } => d_hat.or(ctx.dim),
            _ => None,
        }
    }

    /// Resolved linUCB radius.
    pub fn linucb_beta(&self, ctx: &BuildContext) -> Option<f64> {
        match self {
            LearnerSpec::Linucb {
                lambda,
                beta,
                noise,
                norm_bound,
                ..
            } => {
                let d = self.d_hat(ctx)?;
                Some(beta.unwrap_or_else(|| {
                    oful_beta(
                        d,
                        *lambda,
                        ctx.horizon,
                        ctx.delta,
                        noise.unwrap_or(ctx.noise_scale),
                        norm_bound.unwrap_or(ctx.parameter_norm),
                    )
                }))
            }
            _ => None,
        }
    }

    pub fn build(&self, ctx: &BuildContext) -> Result<Box<dyn BaseAlgorithm>> {
        Ok(match self {
            LearnerSpec::Ucb {
                arms,
                conf,
                noise_scale,
            } => {
                let subset: Vec<usize> = arms.clone().unwrap_or_else(|| (0..ctx.arms).collect());
                if let Some(&bad) = subset.iter().find(|&&a| a >= ctx.arms) {
                    return Err(Error::Config(format!(
                        "ucb arm {bad} out of range (K = {})",
                        ctx.arms
                    )));
                }
                let conf = conf.unwrap_or_else(|| {
                    ucb_conf_scale(ctx.horizon, subset.len(), ctx.delta, *noise_scale)
                });
                Box::new(make_restricted_ucb(&subset, conf)?)
            }
            LearnerSpec::Linucb { lambda, .. } => {
                let d = self.d_hat(ctx).ok_or_else(|| {
                    Error::Config("linucb needs a linear environment or `d_hat`".into())
                })?;
                if ctx.dim.is_some_and(|env_d| d > env_d) {
                    return Err(Error::Config(format!(
                        "linucb d_hat {d} exceeds environment dimension"
                    )));
                }
                let beta = self.linucb_beta(ctx).expect("linear learner");
                Box::new(make_restricted_linucb(d, *lambda, beta)?)
            }
            LearnerSpec::Fixed { arm } => {
                if *arm >= ctx.arms {
                    return Err(Error::Config(format!(
                        "fixed arm {arm} out of range (K = {})",
                        ctx.arms
                    )));
                }
                Box::new(make_fixed_arm(*arm))
            }
        })
    }
}

/// Fit the envelope coefficient by running the learner alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    /// Environment to calibrate on (the experiment's when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<EnvSpec>,
    #[serde(default = "default_calibration_reps")]
    pub reps: usize,
    /// Calibration horizon (the experiment's when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    /// Multiplier applied to the fitted coefficient.
    #[serde(default = "default_one")]
    pub margin: f64,
}

/// Either a given coefficient `c` or a calibration recipe, with exponent
/// `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<CalibrationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub name: String,
    pub learner: LearnerSpec,
    pub bound: BoundSpec,
    #[serde(default = "default_one")]
    pub eta: f64,
}

/// How target regrets are derived from the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    /// Budget split by each base's `eta`; must pass the feasibility check.
    Eta,
    /// `(C_i^2 + N) sqrt(T)`.
    #[default]
    SqrtT,
    Explicit {
        values: Vec<f64>,
    },
    /// All zero.
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// Clamp observed rewards into `[0, 1]` before the combiner sees them.
    #[serde(default)]
    pub clamp: bool,
    /// Pseudocode constants: `3 sqrt(L n)` threshold, unsquared radius in the
    /// adversarial combiner.
    #[serde(default)]
    pub literal_constants: bool,
    /// Zero targets and no feasibility check.
    #[serde(default)]
    pub gap_mode: bool,
    /// Replace every base by its grid of guessed envelopes.
    #[serde(default)]
    pub doubling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: ExperimentKind,
    pub horizon: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub replications: usize,
    /// Policies to run: `"combiner"` or the name of a base run alone. All
    /// run on the same environment instance and noise stream per replication.
    pub series: Vec<String>,
    /// Write every k-th round to the trace CSV (the last round is always
    /// written).
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    pub environment: EnvSpec,
    pub bases: Vec<BaseSpec>,
    #[serde(default)]
    pub targets: TargetSpec,
    #[serde(default)]
    pub flags: Flags,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.replications == 0 {
            return bad("replications must be >= 1".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be >= 1".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1".into());
        }
        if self.bases.is_empty() {
            return bad("at least one base is required".into());
        }
        if self.series.is_empty() {
            return bad("at least one series is required".into());
        }
        for (i, b) in self.bases.iter().enumerate() {
            if self.bases[..i].iter().any(|o| o.name == b.name) || b.name == "combiner" {
                return bad(format!("duplicate or reserved base name `{}`", b.name));
            }
            if b.bound.c.is_some() == b.bound.calibrate.is_some() {
                return bad(format!(
                    "base `{}`: give exactly one of bound.c and bound.calibrate",
                    b.name
                ));
            }
            if !(0.5..=1.0).contains(&b.bound.alpha) {
                return bad(format!("base `{}`: alpha must lie in [0.5, 1]", b.name));
            }
            if !(b.eta > 0.0 && b.eta.is_finite()) {
                return bad(format!("base `{}`: eta must be > 0", b.name));
            }
            if let Some(cal) = &b.bound.calibrate {
                if cal.reps == 0 {
                    return bad(format!("base `{}`: calibration reps must be >= 1", b.name));
                }
            }
        }
        for s in &self.series {
            if s != "combiner" && !self.bases.iter().any(|b| &b.name == s) {
                return bad(format!(
                    "series `{s}` is neither `combiner` nor a base name"
                ));
            }
        }
        if let TargetSpec::Explicit { values } = &self.targets {
            if values.len() != self.bases.len() {
                return bad("explicit targets must list one value per base".into());
            }
        }
        if self.kind == ExperimentKind::Adversarial {
            if self.flags.doubling {
                return bad(
                    "the doubling grid is not available for the adversarial combiner".into(),
                );
            }
            if self
                .bases
                .iter()
                .any(|b| !matches!(b.learner, LearnerSpec::Linucb { .. }))
            {
                return bad("adversarial experiments take linucb bases only".into());
            }
        }
        let ctx = BuildContext::new(&self.environment, self.horizon, self.delta)?;
        for b in &self.bases {
            b.learner.build(&ctx)?;
        }
        Ok(())
    }
}

fn parse_scalar(raw: &str) -> toml::Value {
    if let Ok(i) = raw.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = raw.parse::<f64>() {
        toml::Value::Float(f)
    } else if let Ok(b) = raw.parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(raw.to_string())
    }
}

/// Parses `kind:key=value,key=value` into a table with `type = kind`. List
/// values are separated by `;`.
pub fn parse_inline_table(spec: &str) -> Result<toml::Table> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut table = toml::Table::new();
    table.insert("type".into(), toml::Value::String(kind.trim().to_string()));
    for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{pair}`")))?;
        let value = if v.contains(';') {
            toml::Value::Array(v.split(';').map(|x| parse_scalar(x.trim())).collect())
        } else {
            parse_scalar(v.trim())
        };
        table.insert(k.trim().to_string(), value);
    }
    Ok(table)
}

pub fn parse_env_spec(spec: &str) -> Result<EnvSpec> {
    parse_inline_table(spec)?
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(format!("environment `{spec}`: {e}")))
}

pub fn parse_learner_spec(spec: &str) -> Result<LearnerSpec> {
    parse_inline_table(spec)?
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(format!("learner `{spec}`: {e}")))
}
