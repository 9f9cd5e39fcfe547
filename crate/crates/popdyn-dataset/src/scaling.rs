use crate::error::DataError;
use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

/// Maps a value from `[lo, hi]` onto `[-1, 1]`. Values outside the bounds
/// map outside the target interval; nothing is clamped.
pub fn scale(x: f64, bounds: (f64, f64)) -> Result<f64, DataError> {
    let (lo, hi) = check(bounds)?;
    Ok(2.0 * (x - lo) / (hi - lo) - 1.0)
}

/// Inverse of [`scale`]: maps `[-1, 1]` back onto `[lo, hi]`.
pub fn unscale(y: f64, bounds: (f64, f64)) -> Result<f64, DataError> {
    let (lo, hi) = check(bounds)?;
    Ok(lo + (y + 1.0) * (hi - lo) / 2.0)
}

fn check(bounds: (f64, f64)) -> Result<(f64, f64), DataError> {
    let (lo, hi) = bounds;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(DataError::BadBounds { lo, hi });
    }
    Ok(bounds)
}

/// Per-dimension affine scaling ranges for a dataset: one `(lo, hi)` pair
/// per observed species (count units) and one per varying parameter.
/// Construction enforces `lo < hi` everywhere, so the scaling methods
/// never divide by zero.
///
/// Networks evaluated against each other must share the ranges the weights
/// were trained with, so the bounds travel inside both the dataset and the
/// trained-weights containers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds")]
pub struct ScalingBounds {
    species: Vec<(f64, f64)>,
    params: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawBounds {
    species: Vec<(f64, f64)>,
    params: Vec<(f64, f64)>,
}

impl TryFrom<RawBounds> for ScalingBounds {
    type Error = DataError;

    fn try_from(raw: RawBounds) -> Result<Self, DataError> {
        ScalingBounds::new(raw.species, raw.params)
    }
}

impl ScalingBounds {
    pub fn new(
        species: Vec<(f64, f64)>,
        params: Vec<(f64, f64)>,
    ) -> Result<Self, DataError> {
        for &b in species.iter().chain(params.iter()) {
            check(b)?;
        }
        Ok(ScalingBounds { species, params })
    }

    /// One `(lo, hi)` per observed species, in observable order.
    pub fn species(&self) -> &[(f64, f64)] {
        &self.species
    }

    /// One `(lo, hi)` per varying parameter, in declaration order.
    pub fn params(&self) -> &[(f64, f64)] {
        &self.params
    }

    /// Scales a trajectory block `[rows, n_obs]`; returns the scaled block
    /// and how many entries fell outside their species bounds.
    pub fn scale_trajectory(&self, values: &Array2<f64>) -> (Array2<f64>, usize) {
        assert_eq!(values.ncols(), self.species.len(), "species arity mismatch");
        let mut oob = 0usize;
        let out = Array2::from_shape_fn(values.dim(), |(i, j)| {
            let (lo, hi) = self.species[j];
            let x = values[(i, j)];
            if x < lo || x > hi {
                oob += 1;
            }
            2.0 * (x - lo) / (hi - lo) - 1.0
        });
        (out, oob)
    }

    /// Scales one conditioning row: observed initial state then varying
    /// parameters. Returns the scaled row and the out-of-bounds count.
    pub fn scale_condition(&self, s0_obs: &[f64], theta: &[f64]) -> (Vec<f64>, usize) {
        assert_eq!(s0_obs.len(), self.species.len(), "species arity mismatch");
        assert_eq!(theta.len(), self.params.len(), "parameter arity mismatch");
        let mut oob = 0usize;
        let mut row = Vec::with_capacity(s0_obs.len() + theta.len());
        for (&x, &(lo, hi)) in s0_obs.iter().zip(&self.species) {
            if x < lo || x > hi {
                oob += 1;
            }
            row.push(2.0 * (x - lo) / (hi - lo) - 1.0);
        }
        for (&x, &(lo, hi)) in theta.iter().zip(&self.params) {
            if x < lo || x > hi {
                oob += 1;
            }
            row.push(2.0 * (x - lo) / (hi - lo) - 1.0);
        }
        (row, oob)
    }

    /// Maps a scaled trajectory block `[rows, n_obs]` back to count units.
    pub fn unscale_trajectory(&self, scaled: &Array2<f64>) -> Array2<f64> {
        assert_eq!(scaled.ncols(), self.species.len(), "species arity mismatch");
        Array2::from_shape_fn(scaled.dim(), |(i, j)| {
            let (lo, hi) = self.species[j];
            lo + (scaled[(i, j)] + 1.0) * (hi - lo) / 2.0
        })
    }

    /// Maps a scaled batch `[n, rows, n_obs]` back to count units.
    pub fn unscale_batch(&self, scaled: &Array3<f32>) -> Array3<f64> {
        let (_, _, cols) = scaled.dim();
        assert_eq!(cols, self.species.len(), "species arity mismatch");
        Array3::from_shape_fn(scaled.dim(), |(i, t, j)| {
            let (lo, hi) = self.species[j];
            lo + (scaled[(i, t, j)] as f64 + 1.0) * (hi - lo) / 2.0
        })
    }
}
