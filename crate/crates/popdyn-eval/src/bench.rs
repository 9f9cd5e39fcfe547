use crate::error::EvalError;
use popdyn_dataset::ScalingBounds;
use popdyn_gan::{sample_trajectories, GeneratorParams};
use popdyn_model::{ReactionNetwork, SimGrid};
use popdyn_sim::{ssa_trajectory, tau_leap_trajectory, InitialSetting};
use serde::Serialize;
use std::time::Instant;

pub const BENCH_METHODS: [&str; 3] = ["ssa", "tau", "abstract"];

#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub method: &'static str,
    pub batch: usize,
    pub total_s: f64,
    pub per_trajectory_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
}

impl TimingReport {
    pub fn get(&self, method: &str, batch: usize) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.method == method && r.batch == batch)
    }
}

/// Wall-clock cost per trajectory for exact simulation, tau-leaping, and
/// abstract generation at each requested batch size.
///
/// Everything runs on the calling thread so the numbers compare a single
/// worker against a single worker. Each method is run once before the
/// clock starts, which keeps one-time costs (lazy allocations, page
/// faults) out of the measurement. Simulated batches give every
/// trajectory its own seed so run lengths vary realistically.
pub fn timing_benchmark(
    net: &ReactionNetwork,
    grid: &SimGrid,
    gp: &GeneratorParams,
    bounds: &ScalingBounds,
    setting: &InitialSetting,
    tau: f64,
    batch_sizes: &[usize],
    seed: u64,
) -> Result<TimingReport, EvalError> {
    if batch_sizes.is_empty() || batch_sizes.contains(&0) {
        return Err(EvalError::Args("batch sizes must be positive".into()));
    }
    setting.check(net)?;
    let observables = net.observables().to_vec();

    let run_ssa = |batch: usize| -> Result<(), EvalError> {
        for i in 0..batch {
            ssa_trajectory(net, setting, grid, seed.wrapping_add(i as u64))?;
        }
        Ok(())
    };
    let run_tau = |batch: usize| -> Result<(), EvalError> {
        for i in 0..batch {
            tau_leap_trajectory(net, setting, grid, tau, seed.wrapping_add(i as u64))?;
        }
        Ok(())
    };
    let run_abs = |batch: usize| -> Result<(), EvalError> {
        sample_trajectories(gp, setting, &observables, batch, bounds, seed, false)?;
        Ok(())
    };

    let mut rows = Vec::with_capacity(BENCH_METHODS.len() * batch_sizes.len());
    let methods: [(&'static str, &dyn Fn(usize) -> Result<(), EvalError>); 3] =
        [("ssa", &run_ssa), ("tau", &run_tau), ("abstract", &run_abs)];
    for (name, run) in methods {
        run(1)?;
        for &batch in batch_sizes {
            let start = Instant::now();
            run(batch)?;
            let total_s = start.elapsed().as_secs_f64();
            rows.push(TimingRow { method: name, batch, total_s, per_trajectory_s: total_s / batch as f64 });
        }
    }
    Ok(TimingReport { rows })
}
