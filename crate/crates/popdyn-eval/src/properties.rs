use crate::error::EvalError;
use popdyn_sim::Trajectory;
use serde::{Deserialize, Serialize};

/// Half-count slack when matching continuous trajectory values against an
/// integer target: an abstract trajectory that would round to the target
/// counts as being there.
pub const ROUND_TOL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparator {
    Less,
    Greater,
}

impl Comparator {
    fn holds(self, x: f64, threshold: f64) -> bool {
        match self {
            Comparator::Less => x < threshold,
            Comparator::Greater => x > threshold,
        }
    }
}

/// The two trajectory-level checks used to judge whether an abstract model
/// preserves qualitative behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemporalProperty {
    /// From some grid step onward, the species always compares true
    /// against the threshold: there exists a step j such that the
    /// comparison holds at every step j' >= j. Evaluated on the grid
    /// samples only; the final step alone is an admissible suffix.
    EventuallyAlways { species: String, comparator: Comparator, threshold: f64 },
    /// Once the species reaches `value` (within [`ROUND_TOL`]), it must
    /// stay there for the rest of the trajectory.
    AbsorbingValidity { species: String, value: f64 },
}

impl TemporalProperty {
    fn species(&self) -> &str {
        match self {
            TemporalProperty::EventuallyAlways { species, .. } => species,
            TemporalProperty::AbsorbingValidity { species, .. } => species,
        }
    }

    fn satisfied(&self, traj: &Trajectory, col: usize) -> bool {
        let v = traj.values();
        let rows = v.nrows();
        match *self {
            TemporalProperty::EventuallyAlways { comparator, threshold, .. } => {
                (0..rows).any(|j| (j..rows).all(|k| comparator.holds(v[(k, col)], threshold)))
            }
            TemporalProperty::AbsorbingValidity { value, .. } => {
                let mut reached = false;
                for j in 0..rows {
                    let inside = (v[(j, col)] - value).abs() <= ROUND_TOL;
                    if reached && !inside {
                        return false;
                    }
                    reached = reached || inside;
                }
                true
            }
        }
    }
}

/// Fraction of trajectories satisfying the property. `observables` names
/// the trajectory columns; the property's species must be one of them.
pub fn check_property(
    trajs: &[Trajectory],
    observables: &[String],
    prop: &TemporalProperty,
) -> Result<f64, EvalError> {
    if let TemporalProperty::EventuallyAlways { threshold, .. } = prop {
        if !threshold.is_finite() {
            return Err(EvalError::Args(format!("threshold {threshold} is not finite")));
        }
    }
    let col = observables
        .iter()
        .position(|n| n == prop.species())
        .ok_or_else(|| EvalError::UnknownSpecies(prop.species().into()))?;
    if trajs.is_empty() {
        return Err(EvalError::Empty("no trajectories to check".into()));
    }
    if let Some(bad) = trajs.iter().find(|t| t.columns() != observables.len()) {
        return Err(EvalError::Shape(format!(
            "trajectory has {} columns but {} observables were named",
            bad.columns(),
            observables.len()
        )));
    }
    let sat = trajs.iter().filter(|t| prop.satisfied(t, col)).count();
    Ok(sat as f64 / trajs.len() as f64)
}
