use crate::error::SimError;
use crate::pool;
use crate::rng::{stream_rng, StreamDomain};
use crate::ssa::ssa_core;
use crate::tau::{tau_core, LeapStats};
use crate::trajectory::{InitialSetting, Trajectory};
use popdyn_model::{ReactionNetwork, SimGrid};

/// Which simulator a batch should use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimMethod {
    Ssa,
    TauLeap { tau: f64 },
}

#[derive(Debug)]
pub struct BatchResult {
    /// One trajectory per requested setting, in request order.
    pub trajectories: Vec<Trajectory>,
    /// Aggregated tau-leap statistics; zero for SSA batches.
    pub leap_stats: LeapStats,
}

/// Simulates one trajectory per setting on the shared worker pool.
/// Trajectory i draws from simulation stream i of `base_seed`, so the
/// result is identical for any worker count and any execution order.
pub fn simulate_batch(
    net: &ReactionNetwork,
    grid: &SimGrid,
    settings: &[InitialSetting],
    method: SimMethod,
    base_seed: u64,
) -> Result<BatchResult, SimError> {
    if let SimMethod::TauLeap { tau } = method {
        if !(tau > 0.0) || tau > grid.dt() {
            return Err(SimError::BadTau { tau, dt: grid.dt() });
        }
    }
    let runs = pool::run_indexed(settings.len(), |i| {
        let mut rng = stream_rng(base_seed, StreamDomain::Simulate, i as u64);
        match method {
            SimMethod::Ssa => {
                ssa_core(net, &settings[i], grid, &mut rng).map(|t| (t, LeapStats::default()))
            }
            SimMethod::TauLeap { tau } => tau_core(net, &settings[i], grid, tau, &mut rng),
        }
    });
    let mut trajectories = Vec::with_capacity(settings.len());
    let mut leap_stats = LeapStats::default();
    for r in runs {
        let (t, s) = r?;
        trajectories.push(t);
        leap_stats.leaps += s.leaps;
        leap_stats.clamped += s.clamped;
    }
    Ok(BatchResult { trajectories, leap_stats })
}
