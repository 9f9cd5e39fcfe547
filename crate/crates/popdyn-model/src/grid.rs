use crate::error::ModelError;
use serde::{Deserialize, Serialize};

/// Uniform time grid t0, t0+dt, ..., t0+H*dt on which trajectories are
/// recorded. `H` is the number of steps, so a trajectory has H+1 rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimGrid {
    t0: f64,
    dt: f64,
    #[serde(rename = "H")]
    steps: usize,
}

impl SimGrid {
    pub fn new(t0: f64, dt: f64, steps: usize) -> Result<Self, ModelError> {
        if !t0.is_finite() {
            return Err(ModelError::Grid("t0 must be finite".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(ModelError::Grid(format!("dt must be positive, got {dt}")));
        }
        if steps < 1 {
            return Err(ModelError::Grid("H must be at least 1".into()));
        }
        Ok(SimGrid { t0, dt, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps H.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of recorded rows, H+1.
    pub fn rows(&self) -> usize {
        self.steps + 1
    }

    /// Time of grid point i (i = 0..=H).
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// End of the horizon, t0 + H*dt.
    pub fn t_end(&self) -> f64 {
        self.time(self.steps)
    }
}
