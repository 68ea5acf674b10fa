//! Proxy A-distance, significance testing and experiment orchestration.

pub mod config;
pub mod experiment;
pub mod pad;
pub mod wilcoxon;

pub use config::{BoundSection, DataSection, ExperimentConfig, ExperimentSection, Method, ModelSection};
pub use experiment::{median, run_experiment, CellResult, ExperimentReport};
pub use pad::{pad, rank_sources, PadReport, ProbeConfig};
pub use wilcoxon::{
    average_ranks, wilcoxon_exact_p, wilcoxon_normal_p, wilcoxon_signed_rank, WilcoxonResult,
    EXACT_MAX_N,
};
