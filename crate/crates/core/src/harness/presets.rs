//! Built-in experiment definitions.

use std::path::{Path, PathBuf};

use super::spec::ExperimentConfig;
use crate::combiner::log_term;
use crate::error::{Error, Result};

const HORIZON: u64 = 20_000;
const DELTA: f64 = 0.05;

pub const PRESET_NAMES: [&str; 2] = ["misspecified", "modelselection"];

/// Misspecified-linear mixture: a UCB over all arms against a full-dimension
/// linUCB. UCB is calibrated on fully non-linear instances and linUCB on
/// linear ones. Targets come from the eta construction with the eta that
/// minimises `288 L T eta + 1 / eta`.
fn misspecified(alpha_mix: f64) -> String {
    let eta = (1.0 / (288.0 * log_term(HORIZON, 2, DELTA) * HORIZON as f64)).sqrt();
    format!(
        r#"kind = "misspecified"
horizon = {HORIZON}
delta = {DELTA}
seed = 2024
replications = 20
series = ["combiner", "ucb", "linucb"]
record_every = 10

[environment]
type = "misspecified"
arms = 50
dim = 10
alpha_mix = {alpha_mix:?}
sigma = 0.1

[[bases]]
name = "ucb"
eta = {eta:e}
learner = {{ type = "ucb", noise_scale = 0.5 }}
bound = {{ alpha = 0.5, calibrate = {{ reps = 10, env = {{ type = "misspecified", arms = 50, dim = 10, alpha_mix = 1.0, sigma = 0.1 }} }} }}

[[bases]]
name = "linucb"
eta = {eta:e}
learner = {{ type = "linucb", lambda = 0.1 }}
bound = {{ alpha = 0.5, calibrate = {{ reps = 10, env = {{ type = "misspecified", arms = 50, dim = 10, alpha_mix = 0.0, sigma = 0.1 }} }} }}

[targets]
mode = "eta"

[flags]
clamp = true
"#
    )
}

/// Nested linUCB learners on the first 2, 4, .., 128 coordinates. Each is
/// calibrated on instances where its own dimension is the true one.
fn model_selection() -> String {
    let mut text = String::from(
        r#"kind = "model-selection"
horizon = 20000
delta = 0.05
seed = 2024
replications = 10
series = ["combiner", "d128", "d8"]
record_every = 10

[environment]
type = "modelselection"
arms = 1000
dim = 128
d_star = 8
sigma = 0.1

[targets]
mode = "sqrt-t"
"#,
    );
    for k in 1..=7 {
        let d = 1usize << k;
        text.push_str(&format!(
            r#"
[[bases]]
name = "d{d}"
learner = {{ type = "linucb", d_hat = {d} }}
bound = {{ alpha = 0.5, calibrate = {{ reps = 3, env = {{ type = "modelselection", arms = 1000, dim = 128, d_star = {d}, sigma = 0.1 }} }} }}
"#
        ));
    }
    text
}

/// The configs behind preset `name`, keyed by file stem.
pub fn preset(name: &str) -> Result<Vec<(String, ExperimentConfig)>> {
    let texts = match name {
        "misspecified" => vec![
            ("misspecified_alpha0".to_string(), misspecified(0.0)),
            ("misspecified_alpha1".to_string(), misspecified(1.0)),
        ],
        "modelselection" => vec![("modelselection".to_string(), model_selection())],
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}`, expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    texts
        .into_iter()
        .map(|(stem, text)| Ok((stem, ExperimentConfig::from_toml(&text)?)))
        .collect()
}

/// Writes `<stem>.toml` for each config of preset `name` into `dir`.
pub fn write_preset(name: &str, dir: &Path) -> Result<Vec<PathBuf>> {
    let configs = preset(name)?;
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(configs.len());
    for (stem, cfg) in configs {
        let path = dir.join(format!("{stem}.toml"));
        std::fs::write(&path, cfg.to_toml()?)?;
        paths.push(path);
    }
    Ok(paths)
}
