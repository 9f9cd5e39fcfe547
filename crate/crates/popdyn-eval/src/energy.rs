use crate::error::EvalError;
use crate::report::check_groups;
use ndarray::{Array2, ArrayView1};
use popdyn_sim::rng::{stream_rng, StreamDomain};
use popdyn_sim::Trajectory;
use rand::seq::SliceRandom;
use serde::Serialize;

fn euclid(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_points(a: &Array2<f64>, b: &Array2<f64>) -> Result<(), EvalError> {
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(EvalError::Empty("energy distance needs two nonempty point sets".into()));
    }
    if a.ncols() != b.ncols() {
        return Err(EvalError::Shape(format!(
            "point sets live in different dimensions ({} vs {})",
            a.ncols(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Energy distance between the empirical laws of two point sets (one point
/// per row): twice the mean cross distance minus both mean within-set
/// distances. Zero when the sets coincide, positive when they separate.
pub fn energy_statistic(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64, EvalError> {
    check_points(a, b)?;
    let (na, nb) = (a.nrows() as f64, b.nrows() as f64);
    let mut cross = 0.0;
    for i in 0..a.nrows() {
        for j in 0..b.nrows() {
            cross += euclid(a.row(i), b.row(j));
        }
    }
    let mut within_a = 0.0;
    for i in 0..a.nrows() {
        for j in i + 1..a.nrows() {
            within_a += euclid(a.row(i), a.row(j));
        }
    }
    let mut within_b = 0.0;
    for i in 0..b.nrows() {
        for j in i + 1..b.nrows() {
            within_b += euclid(b.row(i), b.row(j));
        }
    }
    Ok(2.0 * cross / (na * nb) - 2.0 * within_a / (na * na) - 2.0 * within_b / (nb * nb))
}

/// Two-sample permutation test on the energy statistic. The pooled points
/// are relabeled `n_perm` times (full reshuffles, one `Permute` stream per
/// round) and the p-value is `(count of permuted statistics >= observed
/// + 1) / (n_perm + 1)`, so it never reaches zero.
///
/// The p-value is invariant under any affine map applied to both sets, so
/// scaled and count units give the same test.
pub fn energy_test_pvalue(
    a: &Array2<f64>,
    b: &Array2<f64>,
    n_perm: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    if n_perm < 99 {
        return Err(EvalError::Args(format!("n_perm must be at least 99, got {n_perm}")));
    }
    check_points(a, b)?;
    let (na, nb) = (a.nrows(), b.nrows());
    let n = na + nb;

    // All permuted statistics reuse one pooled distance matrix. With the
    // matrix total fixed, a permutation is summarized by its within-A sum
    // and its A row-sum total.
    let mut d = Array2::<f64>::zeros((n, n));
    let point = |i: usize| if i < na { a.row(i) } else { b.row(i - na) };
    for i in 0..n {
        for j in i + 1..n {
            let v = euclid(point(i), point(j));
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    let row_sums: Vec<f64> = (0..n).map(|i| d.row(i).sum()).collect();
    let total: f64 = row_sums.iter().sum();

    let stat_of = |a_idx: &[usize]| -> f64 {
        let mut s_aa = 0.0;
        for (p, &i) in a_idx.iter().enumerate() {
            for &j in &a_idx[p + 1..] {
                s_aa += d[(i, j)];
            }
        }
        let s_aa = 2.0 * s_aa;
        let s_ab = a_idx.iter().map(|&i| row_sums[i]).sum::<f64>() - s_aa;
        let s_bb = total - 2.0 * s_ab - s_aa;
        let (na, nb) = (na as f64, nb as f64);
        2.0 * s_ab / (na * nb) - s_aa / (na * na) - s_bb / (nb * nb)
    };

    let observed = stat_of(&(0..na).collect::<Vec<_>>());
    let mut at_least = 0usize;
    for r in 0..n_perm {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut stream_rng(seed, StreamDomain::Permute, r as u64));
        if stat_of(&idx[..na]) >= observed {
            at_least += 1;
        }
    }
    Ok((at_least + 1) as f64 / (n_perm + 1) as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyTestEntry {
    pub setting: usize,
    pub species: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n_real: usize,
    pub n_fake: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyTestReport {
    pub n_perm: usize,
    pub entries: Vec<EnergyTestEntry>,
}

/// Runs the energy test per (setting, species), treating each trajectory
/// as one point whose coordinates are its values at grid steps `1..=H`.
/// `real[s]` and `fake[s]` hold the trajectories of setting `s`.
pub fn energy_test_report(
    real: &[Vec<Trajectory>],
    fake: &[Vec<Trajectory>],
    observables: &[String],
    n_perm: usize,
    seed: u64,
) -> Result<EnergyTestReport, EvalError> {
    let (rows, cols) = check_groups(real, fake)?;
    if observables.len() != cols {
        return Err(EvalError::Shape(format!(
            "{} observable names for {cols} trajectory columns",
            observables.len()
        )));
    }
    let h = rows - 1;
    let points = |trajs: &[Trajectory], col: usize| {
        Array2::from_shape_fn((trajs.len(), h), |(i, j)| trajs[i].values()[(j + 1, col)])
    };
    let mut entries = Vec::with_capacity(real.len() * cols);
    for s in 0..real.len() {
        for (c, name) in observables.iter().enumerate() {
            let pa = points(&real[s], c);
            let pb = points(&fake[s], c);
            entries.push(EnergyTestEntry {
                setting: s,
                species: name.clone(),
                statistic: energy_statistic(&pa, &pb)?,
                p_value: energy_test_pvalue(&pa, &pb, n_perm, seed)?,
                n_real: pa.nrows(),
                n_fake: pb.nrows(),
            });
        }
    }
    Ok(EnergyTestReport { n_perm, entries })
}
