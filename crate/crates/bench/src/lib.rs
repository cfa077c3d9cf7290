//! Experiment harness for `pb-core`: runs rules over generated, bundled or
//! Pabulib datasets, scores them against the exact optima, aggregates the
//! ratios and renders CSV tables and an SVG scatter plot.

pub mod config;
pub mod experiment;
pub mod plot;
pub mod rules;

pub use config::{parse_config, Preset};
pub use experiment::{
    aggregate, decimal6, load_instances, rows_csv, run_experiment, summary_csv, summary_table, write_corpus, Dataset,
    ExperimentSpec, NamedInstance, ResultRow, Scores, Summary, TCap,
};
pub use plot::emit_scatter;
pub use rules::{run_rule, Rule, TieBreak};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// Bad configuration or command line; nothing was run.
    #[error("{0}")]
    Spec(String),
    #[error("cannot read dataset: {0}")]
    Dataset(String),
    #[error("every row failed; first reason: {0}")]
    AllFailed(String),
    #[error(transparent)]
    Core(#[from] pb_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// 2 for configuration problems, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Spec(_) | Self::Dataset(_) => 2,
            _ => 1,
        }
    }
}
