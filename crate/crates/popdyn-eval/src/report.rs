use crate::error::EvalError;
use crate::wasserstein::wasserstein_1d;
use ndarray::Array2;
use popdyn_dataset::{scale, ScalingBounds};
use popdyn_sim::Trajectory;

/// Denominator floor for the relative metrics. Species routinely hit zero
/// (absorbing states), so a naive relative error would divide by zero; one
/// count is the smallest meaningful population difference.
pub const REL_GUARD: f64 = 1.0;

/// Column order used everywhere a report is exported.
pub const METRIC_NAMES: [&str; 5] = ["wasserstein", "mean_abs", "mean_rel", "var_abs", "var_rel"];

/// One `[H, n_obs]` table per metric; row `j-1` holds grid step `j`
/// (step 0 is the shared deterministic initial state, so it is skipped).
#[derive(Debug, Clone)]
pub struct MetricGrid {
    pub wasserstein: Array2<f64>,
    pub mean_abs: Array2<f64>,
    pub mean_rel: Array2<f64>,
    pub var_abs: Array2<f64>,
    pub var_rel: Array2<f64>,
}

impl MetricGrid {
    fn zeros(h: usize, n_obs: usize) -> Self {
        MetricGrid {
            wasserstein: Array2::zeros((h, n_obs)),
            mean_abs: Array2::zeros((h, n_obs)),
            mean_rel: Array2::zeros((h, n_obs)),
            var_abs: Array2::zeros((h, n_obs)),
            var_rel: Array2::zeros((h, n_obs)),
        }
    }

    /// Tables in [`METRIC_NAMES`] order.
    pub fn tables(&self) -> [&Array2<f64>; 5] {
        [&self.wasserstein, &self.mean_abs, &self.mean_rel, &self.var_abs, &self.var_rel]
    }

    fn tables_mut(&mut self) -> [&mut Array2<f64>; 5] {
        [
            &mut self.wasserstein,
            &mut self.mean_abs,
            &mut self.mean_rel,
            &mut self.var_abs,
            &mut self.var_rel,
        ]
    }
}

/// Distribution distances between a real and an abstract trajectory set,
/// resolved per (initial setting, observed species, grid step).
///
/// `mean` and `std` aggregate the per-setting tables entrywise with equal
/// weight per setting; `std` is the population standard deviation, so a
/// single-setting report has an all-zero spread.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub per_setting: Vec<MetricGrid>,
    pub mean: MetricGrid,
    pub std: MetricGrid,
}

impl ErrorReport {
    /// Number of grid steps covered (step 0 excluded).
    pub fn steps(&self) -> usize {
        self.mean.wasserstein.nrows()
    }

    pub fn n_obs(&self) -> usize {
        self.mean.wasserstein.ncols()
    }

    pub fn n_settings(&self) -> usize {
        self.per_setting.len()
    }

    /// Grand mean of one metric table over settings, species, and steps.
    pub fn overall_mean(&self, metric: &str) -> Option<f64> {
        let k = METRIC_NAMES.iter().position(|&m| m == metric)?;
        let mut acc = 0.0;
        let mut count = 0usize;
        for g in &self.per_setting {
            let t = g.tables()[k];
            acc += t.sum();
            count += t.len();
        }
        (count > 0).then(|| acc / count as f64)
    }
}

/// Mean and population variance of a sample.
fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Validates that both groups describe the same settings on the same grid
/// and returns the shared (rows, columns) of every trajectory.
pub(crate) fn check_groups(
    real: &[Vec<Trajectory>],
    fake: &[Vec<Trajectory>],
) -> Result<(usize, usize), EvalError> {
    if real.len() != fake.len() {
        return Err(EvalError::Shape(format!(
            "{} real settings vs {} fake settings",
            real.len(),
            fake.len()
        )));
    }
    if real.is_empty() {
        return Err(EvalError::Empty("no settings to compare".into()));
    }
    let mut shape: Option<(usize, usize)> = None;
    for (s, group) in real.iter().chain(fake.iter()).enumerate() {
        if group.is_empty() {
            return Err(EvalError::Empty(format!("setting {} has no trajectories", s % real.len())));
        }
        for t in group {
            let dim = (t.rows(), t.columns());
            match shape {
                None => shape = Some(dim),
                Some(expect) if expect != dim => {
                    return Err(EvalError::Shape(format!(
                        "trajectory shape {dim:?} does not match {expect:?}; all inputs must share one grid and observable set"
                    )))
                }
                Some(_) => {}
            }
        }
    }
    let (rows, cols) = shape.expect("nonempty groups were checked");
    if rows < 2 {
        return Err(EvalError::Shape("trajectories need at least one step after the initial state".into()));
    }
    Ok((rows, cols))
}

/// Five distribution-error metrics per (setting, species, grid step)
/// between matched real and abstract trajectory groups in count units.
///
/// Wasserstein and the absolute moment differences are computed after
/// scaling values to `[-1, 1]` with `bounds` (the training-time ranges, so
/// numbers are comparable across species and models); the relative moment
/// differences stay in count units and divide by
/// `max(real moment, REL_GUARD)`.
pub fn histogram_errors(
    real: &[Vec<Trajectory>],
    fake: &[Vec<Trajectory>],
    bounds: &ScalingBounds,
) -> Result<ErrorReport, EvalError> {
    let (rows, cols) = check_groups(real, fake)?;
    if bounds.species().len() != cols {
        return Err(EvalError::Shape(format!(
            "bounds cover {} species but trajectories have {} columns",
            bounds.species().len(),
            cols
        )));
    }
    let h = rows - 1;
    let mut per_setting = Vec::with_capacity(real.len());
    for (rs, fs) in real.iter().zip(fake) {
        let mut g = MetricGrid::zeros(h, cols);
        for c in 0..cols {
            let sb = bounds.species()[c];
            for j in 1..rows {
                let rv: Vec<f64> = rs.iter().map(|t| t.values()[(j, c)]).collect();
                let fv: Vec<f64> = fs.iter().map(|t| t.values()[(j, c)]).collect();
                let rv_s: Vec<f64> =
                    rv.iter().map(|&x| scale(x, sb)).collect::<Result<_, _>>()?;
                let fv_s: Vec<f64> =
                    fv.iter().map(|&x| scale(x, sb)).collect::<Result<_, _>>()?;

                let (rm_s, rvar_s) = mean_var(&rv_s);
                let (fm_s, fvar_s) = mean_var(&fv_s);
                let (rm, rvar) = mean_var(&rv);
                let (fm, fvar) = mean_var(&fv);

                let cell = (j - 1, c);
                g.wasserstein[cell] = wasserstein_1d(&rv_s, &fv_s)?;
                g.mean_abs[cell] = (rm_s - fm_s).abs();
                g.var_abs[cell] = (rvar_s - fvar_s).abs();
                g.mean_rel[cell] = (rm - fm).abs() / rm.abs().max(REL_GUARD);
                g.var_rel[cell] = (rvar - fvar).abs() / rvar.max(REL_GUARD);
            }
        }
        per_setting.push(g);
    }

    let n = per_setting.len() as f64;
    let mut mean = MetricGrid::zeros(h, cols);
    let mut std = MetricGrid::zeros(h, cols);
    for k in 0..METRIC_NAMES.len() {
        for g in &per_setting {
            *mean.tables_mut()[k] += g.tables()[k];
        }
        *mean.tables_mut()[k] /= n;
        for g in &per_setting {
            let dev = g.tables()[k] - mean.tables()[k];
            *std.tables_mut()[k] += &(&dev * &dev);
        }
        std.tables_mut()[k].mapv_inplace(|v| (v / n).sqrt());
    }
    Ok(ErrorReport { per_setting, mean, std })
}
