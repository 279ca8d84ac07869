//! Gold-standard sampling and strict evaluation of alignments.

mod gold;
mod sample;
mod score;

pub use gold::{read_gold, write_gold, GoldPair, Label, Stratum};
pub use sample::{apportion, default_quotas, stratified_sample, StratumQuota};
pub use score::{
    default_thresholds, f1_score, pr_sweep, score_at, score_keys, score_strict, write_sweep,
    EvalResult, SweepRow,
};
