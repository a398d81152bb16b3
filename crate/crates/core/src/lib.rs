//! Window-based comparison (WBC) membership inference over per-token loss
//! sequences, with loss-only baselines, ranking metrics, a synthetic
//! extremal-event simulator, closed-form power analysis and Δ diagnostics.

pub mod attack;
pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod metrics;
pub mod power;
pub mod scoring;
pub mod sim;
pub mod window;

pub use attack::{geometric_schedule, preset, wbc_score, Preset, ScheduleSpec, WbcScore, WindowSchedule};
pub use baselines::{difference_score, loss_score, min_k_score, ratio_score, ScoredRecord};
pub use dataset::{load_jsonl, load_jsonl_lenient, write_jsonl, Dataset, Label, LossDelta, LossRecord};
pub use error::{Error, Result};
pub use metrics::{bootstrap_evaluate, BootstrapConfig, ClassScores, EvalReport};
pub use power::{p_member, power_curve, variance_tsign, PowerProfile};
pub use scoring::{score_dataset, Method, MethodKind, ScoreTable};
pub use sim::{heavy_tail_preset, sample_dataset, sample_record, SimParams, TailDist};
pub use window::{sign_count, sign_statistic, window_sums, window_sums_prefix};
