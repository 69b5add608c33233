//! Optimization: learning-rate schedule, Adam and the teacher-forced loop.

mod adam;
mod schedule;
mod trainer;

pub use adam::{Adam, AdamConfig};
pub use schedule::{lr_at, lr_branches};
pub use trainer::{
    exact_match_rate, load_best, train_loop, train_step, Batcher, BestPointer, LogEntry, TrainConfig,
    TrainOutcome, BEST_FILE, CHECKPOINT_FILE, LOG_FILE,
};
