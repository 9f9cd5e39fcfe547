use crate::error::SimError;
use crate::rng::{stream_rng, StreamDomain};
use crate::ssa::{record_rest, record_until};
use crate::trajectory::{InitialSetting, Trajectory};
use ndarray::Array2;
use popdyn_model::{ReactionNetwork, SimGrid};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// Bookkeeping from one tau-leap run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LeapStats {
    pub leaps: u64,
    /// Number of (leap, species) pairs where a negative count was clamped
    /// to zero. Nonzero clamping means tau is too coarse for the model.
    pub clamped: u64,
}

/// Fixed-step tau-leaping: every leap fires Poisson(rate * tau) copies of
/// each reaction, then clamps negative counts to zero. The grid row at a
/// leap boundary takes the post-leap state, matching the simulator's
/// at-or-before recording convention. Requires 0 < tau <= dt.
pub fn tau_leap_trajectory(
    net: &ReactionNetwork,
    setting: &InitialSetting,
    grid: &SimGrid,
    tau: f64,
    seed: u64,
) -> Result<(Trajectory, LeapStats), SimError> {
    let mut rng = stream_rng(seed, StreamDomain::Simulate, 0);
    tau_core(net, setting, grid, tau, &mut rng)
}

pub(crate) fn tau_core(
    net: &ReactionNetwork,
    setting: &InitialSetting,
    grid: &SimGrid,
    tau: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Trajectory, LeapStats), SimError> {
    if !(tau > 0.0) || tau > grid.dt() || !tau.is_finite() {
        return Err(SimError::BadTau { tau, dt: grid.dt() });
    }
    setting.check(net)?;
    let params = net.full_params(&setting.theta).map_err(SimError::Eval)?;
    let reactions = net.reactions();
    let mut values = Array2::zeros((grid.rows(), net.n_species()));
    let mut state = setting.s0.clone();
    let mut stats = LeapStats::default();
    let mut next_row = 0usize;
    let mut leap: u64 = 0;

    while next_row <= grid.steps() {
        // Multiplication, not accumulation, keeps leap boundaries exactly
        // on grid times when dt is a multiple of tau.
        let t_next = grid.t0() + (leap + 1) as f64 * tau;

        let mut total = 0.0;
        let mut fired = false;
        let mut rates = vec![0.0; reactions.len()];
        for (j, r) in reactions.iter().enumerate() {
            let a = r.rate(&state, &params)?;
            rates[j] = a;
            total += a;
        }
        if total <= 0.0 {
            // Absorbing state: identical to the exact simulator from here.
            record_rest(&mut values, &mut next_row, grid, &state);
            break;
        }

        record_until(&mut values, &mut next_row, grid, &state, t_next);
        if next_row > grid.steps() {
            break;
        }

        for (j, r) in reactions.iter().enumerate() {
            if rates[j] <= 0.0 {
                continue;
            }
            // Clamping can inflate populations on stiff feedback loops until
            // the leap means stop being representable; that is a divergence
            // of the approximation, not a crash.
            let mean = rates[j] * tau;
            let dist = Poisson::new(mean).map_err(|_| {
                SimError::Diverged(format!(
                    "leap {leap}: reaction mean {mean:.3e} is not samplable; reduce tau"
                ))
            })?;
            let count = dist.sample(rng);
            if count > 0.0 {
                fired = true;
                for (v, &d) in state.iter_mut().zip(r.update()) {
                    *v += count * d as f64;
                }
            }
        }
        if fired {
            for v in state.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                    stats.clamped += 1;
                }
            }
        }
        stats.leaps += 1;
        leap += 1;
    }
    Ok((Trajectory::new(values)?, stats))
}
