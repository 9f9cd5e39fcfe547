//! Uniform sampling of initial settings.
//!
//! Free species are uniform on their integer ranges. Species tied by a sum
//! constraint are sampled uniformly over the exact feasible set
//! {x : lo_i <= x_i <= hi_i, sum x_i = T} by counting lattice points with
//! a suffix DP and drawing each coordinate from its implied conditional.
//! Counting is in u128, so uniformity is exact, not approximate.

use crate::error::SimError;
use crate::rng::{stream_rng, StreamDomain};
use crate::trajectory::InitialSetting;
use popdyn_model::ReactionNetwork;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Limit on T * range work per constraint group; protects against
/// pathological hand-written models, not the built-ins.
const MAX_DP_CELLS: u128 = 100_000_000;

struct Group {
    members: Vec<usize>,
    bounds: Vec<(u64, u64)>,
    total: u64,
    /// suffix[j][s] = number of ways members[j..] can sum to s.
    suffix: Vec<Vec<u128>>,
}

impl Group {
    fn build(members: Vec<usize>, bounds: Vec<(u64, u64)>, total: u64) -> Result<Self, SimError> {
        let g = members.len();
        let cells = (total as u128 + 1) * g as u128;
        if cells > MAX_DP_CELLS {
            return Err(SimError::ConstraintTooLarge(format!(
                "constraint with total {total} over {g} species"
            )));
        }
        let mut suffix = vec![vec![0u128; total as usize + 1]; g + 1];
        suffix[g][0] = 1;
        for j in (0..g).rev() {
            let (lo, hi) = bounds[j];
            for s in 0..=total {
                let mut acc: u128 = 0;
                let v_hi = hi.min(s);
                if lo <= v_hi {
                    for v in lo..=v_hi {
                        acc = acc.checked_add(suffix[j + 1][(s - v) as usize]).ok_or_else(
                            || SimError::ConstraintTooLarge("lattice count overflow".into()),
                        )?;
                    }
                }
                suffix[j][s as usize] = acc;
            }
        }
        Ok(Group { members, bounds, total, suffix })
    }

    fn ways(&self, total: u64) -> u128 {
        self.suffix[0].get(total as usize).copied().unwrap_or(0)
    }

    /// Draws a uniform member of the feasible set with sum `total`,
    /// writing counts into `state`. `total` must satisfy ways(total) > 0.
    fn sample_into(&self, state: &mut [f64], total: u64, rng: &mut ChaCha8Rng) {
        let mut s = total;
        for (j, &idx) in self.members.iter().enumerate() {
            let (lo, hi) = self.bounds[j];
            let v_hi = hi.min(s);
            let mut pick = rng.random_range(0..self.suffix[j][s as usize]);
            let mut value = v_hi;
            for v in lo..=v_hi {
                let w = self.suffix[j + 1][(s - v) as usize];
                if pick < w {
                    value = v;
                    break;
                }
                pick -= w;
            }
            state[idx] = value as f64;
            s -= value;
        }
        debug_assert_eq!(s, 0);
    }
}

/// Precomputed sampler for a network's initial-state specification.
/// Building it costs one DP per constraint group; each sample is then
/// cheap, so batch generation should construct it once.
pub struct InitialSampler<'a> {
    net: &'a ReactionNetwork,
    free: Vec<usize>,
    groups: Vec<Group>,
    /// Per group: members that are hidden (not observed), with bounds, for
    /// conditional resampling; None when the whole group is observed.
    hidden_groups: Vec<Option<Group>>,
    hidden_free: Vec<usize>,
}

impl<'a> InitialSampler<'a> {
    pub fn new(net: &'a ReactionNetwork) -> Result<Self, SimError> {
        let n = net.n_species();
        let int_bounds: Vec<(u64, u64)> = net
            .init_ranges()
            .iter()
            .map(|&(lo, hi)| (lo.max(0.0).ceil() as u64, hi.floor() as u64))
            .collect();

        let mut in_group = vec![false; n];
        let mut groups = Vec::new();
        for c in net.constraints() {
            for &m in &c.members {
                if in_group[m] {
                    return Err(SimError::Infeasible(format!(
                        "species `{}` appears in more than one constraint",
                        net.species()[m]
                    )));
                }
                in_group[m] = true;
            }
            let bounds: Vec<(u64, u64)> = c.members.iter().map(|&m| int_bounds[m]).collect();
            let group = Group::build(c.members.clone(), bounds, c.total as u64)?;
            if group.ways(group.total) == 0 {
                return Err(SimError::Infeasible(format!(
                    "no integer state satisfies the constraint summing to {}",
                    c.total
                )));
            }
            groups.push(group);
        }

        let free: Vec<usize> = (0..n).filter(|&i| !in_group[i]).collect();
        let observed = net.observables();
        let hidden_free: Vec<usize> =
            free.iter().copied().filter(|i| !observed.contains(i)).collect();
        let mut hidden_groups = Vec::new();
        for g in &groups {
            let hidden: Vec<usize> =
                g.members.iter().copied().filter(|m| !observed.contains(m)).collect();
            if hidden.is_empty() {
                hidden_groups.push(None);
            } else {
                let bounds: Vec<(u64, u64)> = hidden.iter().map(|&m| int_bounds[m]).collect();
                hidden_groups.push(Some(Group::build(hidden, bounds, g.total)?));
            }
        }

        Ok(InitialSampler { net, free, groups, hidden_groups, hidden_free })
    }

    /// Draws a full setting: parameters uniform on their ranges, then free
    /// species, then each constraint group. Draw order is fixed and
    /// documented by this sequence.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> InitialSetting {
        let theta: Vec<f64> = self
            .net
            .varying_ranges()
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) })
            .collect();
        let mut s0 = vec![0.0; self.net.n_species()];
        for &i in &self.free {
            s0[i] = self.draw_free(i, rng);
        }
        for g in &self.groups {
            g.sample_into(&mut s0, g.total, rng);
        }
        InitialSetting { s0, theta }
    }

    fn draw_free(&self, i: usize, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = self.int_bounds_of(i);
        if lo == hi {
            lo as f64
        } else {
            rng.random_range(lo..=hi) as f64
        }
    }

    fn int_bounds_of(&self, i: usize) -> (u64, u64) {
        let (lo, hi) = self.net.init_ranges()[i];
        (lo.max(0.0).ceil() as u64, hi.floor() as u64)
    }

    /// Resamples the unobserved part of `s0` in place, conditional on the
    /// observed part. Observed entries are untouched; hidden members of a
    /// constraint group are drawn uniformly among completions that keep
    /// the group total valid.
    pub fn resample_hidden(&self, s0: &mut [f64], rng: &mut ChaCha8Rng) -> Result<(), SimError> {
        for &i in &self.hidden_free {
            s0[i] = self.draw_free(i, rng);
        }
        for (g, hg) in self.groups.iter().zip(&self.hidden_groups) {
            let Some(hg) = hg else { continue };
            let observed_sum: f64 = g
                .members
                .iter()
                .filter(|m| !hg.members.contains(m))
                .map(|&m| s0[m])
                .sum();
            let remaining = g.total as f64 - observed_sum;
            if remaining < 0.0 || remaining.fract() != 0.0 || hg.ways(remaining as u64) == 0 {
                return Err(SimError::Infeasible(format!(
                    "observed counts leave no valid completion (remaining {remaining})"
                )));
            }
            hg.sample_into(s0, remaining as u64, rng);
        }
        Ok(())
    }
}

/// One-shot convenience around [`InitialSampler`]. The draw is stream 0 of
/// the settings domain for this seed.
pub fn sample_initial_setting(
    net: &ReactionNetwork,
    seed: u64,
) -> Result<InitialSetting, SimError> {
    let sampler = InitialSampler::new(net)?;
    let mut rng = stream_rng(seed, StreamDomain::Settings, 0);
    Ok(sampler.sample(&mut rng))
}
