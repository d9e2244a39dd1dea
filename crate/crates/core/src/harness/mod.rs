//! Configuration, calibration, seeded replication and CSV output.

mod calibrate;
mod experiment;
mod oracle;
mod presets;
mod selftest;
mod spec;

pub use calibrate::{calibrate_putative_bound, envelope_ratio, run_alone, CalibrationResult};
pub use experiment::{
    config_hash, prepare, run_experiment, run_experiment_in_memory, summarize, write_outputs,
    write_trace_csv, ExperimentResults, PreparedExperiment, ResolvedBase, SeriesResult,
    SUMMARY_HEADER, TRACE_HEADER,
};
pub use oracle::{bracketed_sup, brute_force_cover, brute_force_sup, check_times};
pub use presets::{preset, write_preset, PRESET_NAMES};
pub use selftest::{selftest, CheckResult};
pub use spec::{
    parse_env_spec, parse_inline_table, parse_learner_spec, BaseSpec, BoundSpec, BuildContext,
    CalibrationSpec, EnvSpec, ExperimentConfig, ExperimentKind, Flags, LearnerSpec, NoiseKind,
    ScheduleKind, TargetSpec,
};
