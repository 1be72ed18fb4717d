//! The two-type education game used in the laboratory sessions and the
//! reanalysis of their block-level summaries.

mod kmn;
mod stats;

pub use kmn::{
    hybrid_support, kmn_game, pipeline_regime, regime, RegimeVerdict, COST_H, COST_L, POOLING_THRESHOLD,
    SEPARATING_THRESHOLD, THETA_H, THETA_L,
};
pub use stats::{
    bundled_block_stats, confidence_interval, load_block_stats, one_sample_t, parse_block_stats,
    prediction_report, Block, BlockStats, PredictionRow, TTest, TestOutcome, Treatment, WorkerType,
};
