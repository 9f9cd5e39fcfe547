use crate::energy::EnergyTestReport;
use crate::report::{ErrorReport, MetricGrid, METRIC_NAMES};
use crate::bench::TimingReport;
use popdyn_model::SimGrid;
use serde_json::{json, Value};

/// Long-form CSV of the per-setting tables: one row per
/// setting x species x step x metric, in exactly that nesting order.
/// Columns: `setting,species,step,time,metric,value`.
pub fn error_csv(report: &ErrorReport, grid: &SimGrid, observables: &[String]) -> String {
    let mut out = String::from("setting,species,step,time,metric,value\n");
    for (s, g) in report.per_setting.iter().enumerate() {
        for (c, name) in observables.iter().enumerate() {
            for j in 1..=report.steps() {
                for (k, metric) in METRIC_NAMES.iter().enumerate() {
                    let v = g.tables()[k][(j - 1, c)];
                    out.push_str(&format!("{s},{name},{j},{},{metric},{v}\n", grid.time(j)));
                }
            }
        }
    }
    out
}

fn grid_json(g: &MetricGrid) -> Value {
    let table = |t: &ndarray::Array2<f64>| -> Value {
        json!(t.rows().into_iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    };
    let mut obj = serde_json::Map::new();
    for (k, name) in METRIC_NAMES.iter().enumerate() {
        obj.insert((*name).into(), table(g.tables()[k]));
    }
    Value::Object(obj)
}

/// Landscape steps: the first step, the midpoint, and the horizon
/// (deduplicated for very short grids).
fn landscape_steps(h: usize) -> Vec<usize> {
    let mut steps = vec![1, (h / 2).max(1), h];
    steps.dedup();
    steps
}

/// JSON summary of an error report: aggregate tables, a scalar grand mean
/// and spread per metric, and per-setting landscape tables at the first,
/// middle, and final grid step.
pub fn error_summary_json(report: &ErrorReport, grid: &SimGrid, observables: &[String]) -> Value {
    let mut overall = serde_json::Map::new();
    for (k, name) in METRIC_NAMES.iter().enumerate() {
        let mean = report.overall_mean(name).expect("known metric");
        let values: Vec<f64> = report
            .per_setting
            .iter()
            .flat_map(|g| g.tables()[k].iter().copied())
            .collect();
        let var =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        overall.insert((*name).into(), json!({ "mean": mean, "std": var.sqrt() }));
    }

    let landscape: Vec<Value> = landscape_steps(report.steps())
        .into_iter()
        .map(|j| {
            let rows: Vec<Value> = (0..report.n_settings())
                .flat_map(|s| {
                    let g = &report.per_setting[s];
                    observables.iter().enumerate().map(move |(c, name)| {
                        let mut row = serde_json::Map::new();
                        row.insert("setting".into(), json!(s));
                        row.insert("species".into(), json!(name));
                        for (k, metric) in METRIC_NAMES.iter().enumerate() {
                            row.insert((*metric).into(), json!(g.tables()[k][(j - 1, c)]));
                        }
                        Value::Object(row)
                    })
                })
                .collect();
            json!({ "step": j, "time": grid.time(j), "rows": rows })
        })
        .collect();

    json!({
        "observables": observables,
        "times": (1..=report.steps()).map(|j| grid.time(j)).collect::<Vec<_>>(),
        "n_settings": report.n_settings(),
        "overall": Value::Object(overall),
        "mean": grid_json(&report.mean),
        "std": grid_json(&report.std),
        "landscape": landscape,
    })
}

/// Columns: `setting,species,n_real,n_fake,statistic,p_value`.
pub fn energy_csv(report: &EnergyTestReport) -> String {
    let mut out = String::from("setting,species,n_real,n_fake,statistic,p_value\n");
    for e in &report.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.setting, e.species, e.n_real, e.n_fake, e.statistic, e.p_value
        ));
    }
    out
}

/// Columns: `method,batch,total_s,per_trajectory_s`.
pub fn timing_csv(report: &TimingReport) -> String {
    let mut out = String::from("method,batch,total_s,per_trajectory_s\n");
    for r in &report.rows {
        out.push_str(&format!("{},{},{},{}\n", r.method, r.batch, r.total_s, r.per_trajectory_s));
    }
    out
}
