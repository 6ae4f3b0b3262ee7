//! Projected gradient descent on the empirical Ritz energy, and the
//! theoretical hyperparameter schedule.

mod projection;
mod schedule;
mod train;

pub use projection::{
    l1_norm, l1_threshold, l2_distance, project_l1_ball, project_l1_ball_in_place, project_l2_ball, project_l2_ball_in_place,
};
pub use schedule::{
    ceil_log2, clamp_step, schedule, width_depth, Feasibility, ScheduleConstants, ScheduleParams, StepRule, EXECUTION_LIMIT,
};
pub use train::{continue_training, initialize, pgd_step, train, HistoryRecord, PgdConfig, TrainState, MIN_RADIUS};
