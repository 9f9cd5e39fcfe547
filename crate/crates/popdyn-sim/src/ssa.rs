use crate::error::SimError;
use crate::rng::{stream_rng, StreamDomain};
use crate::trajectory::{InitialSetting, Trajectory};
use ndarray::Array2;
use popdyn_model::{ReactionNetwork, SimGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Copies `state` into every grid row whose time is strictly before
/// `upto`, starting at `*next_row`. Used by both simulators: between
/// events the path is constant, so rows falling inside the current
/// holding interval all take the current state.
pub(crate) fn record_until(
    values: &mut Array2<f64>,
    next_row: &mut usize,
    grid: &SimGrid,
    state: &[f64],
    upto: f64,
) {
    while *next_row <= grid.steps() && grid.time(*next_row) < upto {
        for (j, &v) in state.iter().enumerate() {
            values[(*next_row, j)] = v;
        }
        *next_row += 1;
    }
}

/// Fills every remaining row with `state` (absorbing tail).
pub(crate) fn record_rest(
    values: &mut Array2<f64>,
    next_row: &mut usize,
    grid: &SimGrid,
    state: &[f64],
) {
    record_until(values, next_row, grid, state, f64::INFINITY);
}

/// Exact Gillespie direct-method sample of the network's CTMC, recorded
/// on the grid (row i = state just after the last event at or before t_i).
/// When the total propensity reaches 0 the state is absorbing and fills
/// the remaining rows. Deterministic given the seed.
pub fn ssa_trajectory(
    net: &ReactionNetwork,
    setting: &InitialSetting,
    grid: &SimGrid,
    seed: u64,
) -> Result<Trajectory, SimError> {
    let mut rng = stream_rng(seed, StreamDomain::Simulate, 0);
    ssa_core(net, setting, grid, &mut rng)
}

pub(crate) fn ssa_core(
    net: &ReactionNetwork,
    setting: &InitialSetting,
    grid: &SimGrid,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory, SimError> {
    setting.check(net)?;
    let params = net.full_params(&setting.theta).map_err(SimError::Eval)?;
    let n = net.n_species();
    let reactions = net.reactions();
    let mut values = Array2::zeros((grid.rows(), n));
    let mut state = setting.s0.clone();
    let mut rates = vec![0.0f64; reactions.len()];
    let mut t = grid.t0();
    let mut next_row = 0usize;

    loop {
        let mut total = 0.0;
        for (j, r) in reactions.iter().enumerate() {
            let a = r.rate(&state, &params)?;
            rates[j] = a;
            total += a;
        }
        if total <= 0.0 {
            record_rest(&mut values, &mut next_row, grid, &state);
            break;
        }

        // Exponential holding time; 1 - U keeps the argument in (0, 1].
        let u: f64 = rng.random();
        let t_next = t + (-(1.0 - u).ln()) / total;
        record_until(&mut values, &mut next_row, grid, &state, t_next);
        if next_row > grid.steps() {
            break;
        }

        // Pick the firing reaction proportionally to its rate.
        let mut pick = rng.random::<f64>() * total;
        let mut chosen = reactions.len() - 1;
        for (j, &a) in rates.iter().enumerate() {
            pick -= a;
            if pick <= 0.0 {
                chosen = j;
                break;
            }
        }
        for (v, &d) in state.iter_mut().zip(reactions[chosen].update()) {
            *v += d as f64;
            debug_assert!(*v >= 0.0, "validated propensities never fire into negatives");
        }
        t = t_next;
    }
    Trajectory::new(values)
}
