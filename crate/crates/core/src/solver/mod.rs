//! The NL-PDHGM iteration, its step-length regimes and the testing
//! diagnostics.

mod bounds;
mod iteration;
mod metric;
mod point;
mod record;
mod steps;

pub use bounds::{step_bound_report, AnalysisParams, BoundCheck, StepBoundReport};
pub use iteration::{nlpdhgm_step, Iterate, StepOutput};
pub use metric::{check_descent_inequality, metric_norm_sq, DescentReport, MetricValue};
pub use point::PrimalDualPoint;
pub use record::IterationRecord;
pub use steps::{
    advance_accelerated, advance_constant, advance_linear, make_linear_rate, StepRule, StepState,
};
