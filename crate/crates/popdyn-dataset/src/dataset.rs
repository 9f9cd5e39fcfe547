use crate::error::DataError;
use crate::scaling::ScalingBounds;
use ndarray::{Array2, Array3};
use popdyn_model::{ReactionNetwork, SimGrid};
use popdyn_sim::rng::{stream_rng, StreamDomain};
use popdyn_sim::{simulate_batch, InitialSampler, InitialSetting, SimMethod};
use serde::{Deserialize, Serialize};

/// Identifying facts about how a dataset was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// Model name as the caller knows it; generation leaves it empty
    /// because networks are anonymous, so name-aware callers fill it in.
    pub model: String,
    pub grid: SimGrid,
    /// Observed species per trajectory row.
    pub n_obs: usize,
    /// Varying parameters per conditioning row.
    pub m_cond: usize,
    /// Number of distinct initial settings.
    pub n_settings: usize,
    /// Replica trajectories per setting.
    pub k_per_setting: usize,
    /// Observable names, in trajectory column order.
    pub observables: Vec<String>,
    /// Base seed the generation streams were derived from.
    pub seed: u64,
}

/// A pool of simulated trajectories paired with the settings that produced
/// them, everything already scaled to `[-1, 1]`.
///
/// Row `i * k + j` of `settings` holds replica `j` of setting `i`: the
/// scaled observed initial state followed by the scaled varying parameters.
/// The matching `trajectories` slab holds the scaled observed path, whose
/// row 0 repeats the observed initial state.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub bounds: ScalingBounds,
    /// Scaled conditioning rows, `[n_settings * k, n_obs + m_cond]`.
    pub settings: Array2<f32>,
    /// Scaled observed trajectories, `[n_settings * k, H + 1, n_obs]`.
    pub trajectories: Array3<f32>,
    /// Generation-time notes (small k, values outside bounds). Not
    /// persisted, so equality ignores them.
    pub warnings: Vec<String>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.meta == other.meta
            && self.bounds == other.bounds
            && self.settings == other.settings
            && self.trajectories == other.trajectories
    }
}

impl Dataset {
    /// Total number of (setting, trajectory) pairs.
    pub fn len(&self) -> usize {
        self.settings.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.nrows() == 0
    }

    /// Trajectories mapped back to count units, `[pairs, H + 1, n_obs]`.
    pub fn unscale_trajectories(&self) -> Array3<f64> {
        self.bounds.unscale_batch(&self.trajectories)
    }

    /// Conditioning rows mapped back to count/parameter units.
    pub fn unscale_settings(&self) -> Array2<f64> {
        let n_obs = self.meta.n_obs;
        let sb = self.bounds.species();
        let pb = self.bounds.params();
        Array2::from_shape_fn(self.settings.dim(), |(i, j)| {
            let (lo, hi) = if j < n_obs { sb[j] } else { pb[j - n_obs] };
            lo + (self.settings[(i, j)] as f64 + 1.0) * (hi - lo) / 2.0
        })
    }
}

/// Draws `n_settings` initial settings, simulates `k` exact trajectories
/// for each, and packages the observed, scaled result. Species scaling
/// bounds are the union of the simulated data and the declared initial
/// ranges, so every stored entry lands in `[-1, 1]`.
pub fn generate_training_set(
    net: &ReactionNetwork,
    grid: &SimGrid,
    n_settings: usize,
    k: usize,
    seed: u64,
) -> Result<Dataset, DataError> {
    generate(net, grid, n_settings, k, seed, SimMethod::Ssa, false)
}

/// Same construction as [`generate_training_set`] with its own seed
/// streams; meant for held-out settings with many replicas each, so small
/// `k` draws a warning (the empirical distributions it feeds become too
/// coarse to compare against).
pub fn generate_test_set(
    net: &ReactionNetwork,
    grid: &SimGrid,
    n_settings: usize,
    k: usize,
    seed: u64,
) -> Result<Dataset, DataError> {
    generate(net, grid, n_settings, k, seed, SimMethod::Ssa, true)
}

/// [`generate_training_set`] with an explicit simulation method, for
/// datasets built from the approximate simulator.
pub fn generate_with_method(
    net: &ReactionNetwork,
    grid: &SimGrid,
    n_settings: usize,
    k: usize,
    seed: u64,
    method: SimMethod,
) -> Result<Dataset, DataError> {
    generate(net, grid, n_settings, k, seed, method, false)
}

fn generate(
    net: &ReactionNetwork,
    grid: &SimGrid,
    n_settings: usize,
    k: usize,
    seed: u64,
    method: SimMethod,
    is_test: bool,
) -> Result<Dataset, DataError> {
    if n_settings < 1 || k < 1 {
        return Err(DataError::Args(format!(
            "need at least one setting and one replica, got N={n_settings}, k={k}"
        )));
    }
    let mut warnings = Vec::new();
    if is_test && k < 10 {
        let w = format!("k={k} replicas per setting is too few for empirical distributions");
        log::warn!("{w}");
        warnings.push(w);
    }

    let sampler = InitialSampler::new(net)?;
    let mut setting_rng = stream_rng(seed, StreamDomain::Settings, 0);
    let base: Vec<InitialSetting> =
        (0..n_settings).map(|_| sampler.sample(&mut setting_rng)).collect();

    // Each replica re-draws the unobserved part of the initial state from
    // its own stream; the observed part and the parameters stay pinned to
    // the setting. With full observability this is a no-op and the k
    // replicas share the exact initial state.
    let pairs = n_settings * k;
    let mut flat = Vec::with_capacity(pairs);
    for i in 0..n_settings {
        for j in 0..k {
            let idx = (i * k + j) as u64;
            let mut s0 = base[i].s0.clone();
            sampler.resample_hidden(&mut s0, &mut stream_rng(seed, StreamDomain::HiddenInit, idx))?;
            flat.push(InitialSetting { s0, theta: base[i].theta.clone() });
        }
    }

    let batch = simulate_batch(net, grid, &flat, method, seed)?;
    let observables = net.observables().to_vec();
    let n_obs = observables.len();
    let observed: Vec<Array2<f64>> = batch
        .trajectories
        .into_iter()
        .map(|t| t.project(&observables).map(|p| p.into_values()))
        .collect::<Result<_, _>>()?;

    let bounds = data_bounds(net, &observed)?;

    let rows = grid.rows();
    let mut trajectories = Array3::<f32>::zeros((pairs, rows, n_obs));
    let mut total_oob = 0usize;
    for (p, block) in observed.iter().enumerate() {
        let (scaled, oob) = bounds.scale_trajectory(block);
        total_oob += oob;
        for t in 0..rows {
            for j in 0..n_obs {
                trajectories[(p, t, j)] = scaled[(t, j)] as f32;
            }
        }
    }

    let m_cond = net.m_cond();
    let mut settings = Array2::<f32>::zeros((pairs, n_obs + m_cond));
    for (p, s) in flat.iter().enumerate() {
        let s0_obs: Vec<f64> = observables.iter().map(|&c| s.s0[c]).collect();
        let (row, oob) = bounds.scale_condition(&s0_obs, &s.theta);
        total_oob += oob;
        for (j, &v) in row.iter().enumerate() {
            settings[(p, j)] = v as f32;
        }
        for j in 0..n_obs {
            debug_assert_eq!(settings[(p, j)], trajectories[(p, 0, j)]);
        }
    }
    if total_oob > 0 {
        let w = format!("{total_oob} scaled entries fell outside [-1, 1]");
        log::warn!("{w}");
        warnings.push(w);
    }

    Ok(Dataset {
        meta: DatasetMeta {
            model: String::new(),
            grid: *grid,
            n_obs,
            m_cond,
            n_settings,
            k_per_setting: k,
            observables: net.observable_names().iter().map(|s| s.to_string()).collect(),
            seed,
        },
        bounds,
        settings,
        trajectories,
        warnings,
    })
}

/// Species bounds cover both what the simulations produced and what the
/// model declares as initial ranges; parameter bounds are the declared
/// varying ranges. Zero-width spans are widened by half a count so the
/// affine map stays invertible.
fn data_bounds(
    net: &ReactionNetwork,
    observed: &[Array2<f64>],
) -> Result<ScalingBounds, DataError> {
    let observables = net.observables();
    let init = net.init_ranges();
    let mut species = Vec::with_capacity(observables.len());
    for (j, &col) in observables.iter().enumerate() {
        let (mut lo, mut hi) = init[col];
        for block in observed {
            for t in 0..block.nrows() {
                let v = block[(t, j)];
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        species.push(widen((lo, hi)));
    }
    let params = net.varying_ranges().into_iter().map(widen).collect();
    Ok(ScalingBounds::new(species, params)?)
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if lo < hi {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}
