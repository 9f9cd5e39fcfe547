//! Measures how well an abstract trajectory generator reproduces the
//! simulator it was trained on.
//!
//! Accuracy is resolved per initial setting, observed species, and grid
//! step: the exact 1-D Wasserstein distance plus absolute and relative
//! moment differences ([`histogram_errors`]), an energy-distance
//! permutation test over whole trajectories ([`energy_test_pvalue`]),
//! and satisfaction fractions of qualitative trajectory properties
//! ([`check_property`]). [`timing_benchmark`] compares the per-trajectory
//! cost of simulation and generation on one worker. Reports export as
//! long-form CSV and a JSON summary with stable column orders.

mod bench;
mod energy;
mod error;
mod export;
mod properties;
mod report;
mod wasserstein;

pub use bench::{timing_benchmark, TimingReport, TimingRow, BENCH_METHODS};
pub use energy::{
    energy_statistic, energy_test_pvalue, energy_test_report, EnergyTestEntry, EnergyTestReport,
};
pub use error::EvalError;
pub use export::{energy_csv, error_csv, error_summary_json, timing_csv};
pub use properties::{check_property, Comparator, TemporalProperty, ROUND_TOL};
pub use report::{histogram_errors, ErrorReport, MetricGrid, METRIC_NAMES, REL_GUARD};
pub use wasserstein::wasserstein_1d;
