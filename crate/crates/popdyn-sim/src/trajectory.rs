use crate::error::SimError;
use ndarray::{Array2, ArrayView1};
use popdyn_model::ReactionNetwork;

/// One trajectory on the grid: row i holds the state at grid time t_i,
/// so the shape is (H+1) x n and row 0 is the initial state. Simulator
/// output is integer-valued; generated (abstract) trajectories reuse this
/// type with continuous entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    values: Array2<f64>,
}

impl Trajectory {
    pub fn new(values: Array2<f64>) -> Result<Self, SimError> {
        if values.nrows() < 2 || values.ncols() < 1 {
            return Err(SimError::Shape(format!(
                "trajectory needs at least 2 rows and 1 column, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(Trajectory { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Grid rows, H+1.
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    /// Number of recorded species columns.
    pub fn columns(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    /// Restricts the trajectory to the given column subset, in the given
    /// order. This is the projection to an observable space.
    pub fn project(&self, columns: &[usize]) -> Result<Trajectory, SimError> {
        if columns.is_empty() {
            return Err(SimError::Projection("observable set is empty".into()));
        }
        for &c in columns {
            if c >= self.values.ncols() {
                return Err(SimError::Projection(format!(
                    "column {c} out of range for a {}-column trajectory",
                    self.values.ncols()
                )));
            }
        }
        let mut out = Array2::zeros((self.values.nrows(), columns.len()));
        for (k, &c) in columns.iter().enumerate() {
            out.column_mut(k).assign(&self.values.column(c));
        }
        Ok(Trajectory { values: out })
    }
}

/// A simulation condition: full initial state plus the varying-parameter
/// vector (empty when every parameter is fixed).
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSetting {
    pub s0: Vec<f64>,
    pub theta: Vec<f64>,
}

impl InitialSetting {
    /// Checks the shape and basic sanity of a setting against a network:
    /// lengths, nonnegative integer counts, finite parameters. Range and
    /// constraint membership are not enforced here so that callers may
    /// probe off-distribution settings deliberately.
    pub fn check(&self, net: &ReactionNetwork) -> Result<(), SimError> {
        if self.s0.len() != net.n_species() {
            return Err(SimError::Setting(format!(
                "state has {} entries, network has {} species",
                self.s0.len(),
                net.n_species()
            )));
        }
        if self.theta.len() != net.m_cond() {
            return Err(SimError::Setting(format!(
                "theta has {} entries, network has {} varying parameters",
                self.theta.len(),
                net.m_cond()
            )));
        }
        for (i, &v) in self.s0.iter().enumerate() {
            if !v.is_finite() || v < 0.0 || v.fract() != 0.0 {
                return Err(SimError::Setting(format!(
                    "species `{}` count {v} is not a nonnegative integer",
                    net.species()[i]
                )));
            }
        }
        if self.theta.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Setting("non-finite parameter value".into()));
        }
        Ok(())
    }
}
