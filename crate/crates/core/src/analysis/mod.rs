//! Cost accounting, parameter-matched architecture builders and sweeps.

pub mod budget;
pub mod cost;
pub mod sweep;

pub use budget::{
    candidates, match_params, matched_configs, param_spread, BudgetError, BudgetOptions,
    Candidate, Family,
};
pub use cost::{
    activation_flops, affine_flops, cost_report, count_flops, count_params, spline_eval_flops,
    CostReport, LayerCost,
};
pub use sweep::{
    read_records, run_sweep, write_plot_csv, SweepConfig, SweepError, SweepRecord, SweepResult,
    UnreachableBudget, THREADS_ENV,
};
