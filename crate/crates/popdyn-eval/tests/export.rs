//! Export formats: stable headers, full row coverage, parseable JSON
//! summary with a landscape section.

use ndarray::Array2;
use popdyn_dataset::ScalingBounds;
use popdyn_eval::{
    energy_csv, energy_test_report, error_csv, error_summary_json, histogram_errors,
};
use popdyn_model::SimGrid;
use popdyn_sim::rng::{stream_rng, StreamDomain};
use popdyn_sim::Trajectory;
use rand::Rng;

fn random_group(seed: u64, k: usize, rows: usize, cols: usize) -> Vec<Trajectory> {
    let mut rng = stream_rng(seed, StreamDomain::Permute, 0);
    (0..k)
        .map(|_| {
            Trajectory::new(Array2::from_shape_fn((rows, cols), |_| rng.random_range(0.0..10.0)))
                .unwrap()
        })
        .collect()
}

#[test]
fn error_csv_has_one_row_per_cell_per_metric() {
    let real = vec![random_group(51, 4, 9, 2), random_group(52, 4, 9, 2)];
    let fake = vec![random_group(53, 4, 9, 2), random_group(54, 4, 9, 2)];
    let bounds = ScalingBounds::new(vec![(0.0, 10.0); 2], vec![]).unwrap();
    let report = histogram_errors(&real, &fake, &bounds).unwrap();
    let grid = SimGrid::new(0.0, 0.5, 8).unwrap();
    let obs = vec!["S".to_string(), "I".to_string()];

    let csv = error_csv(&report, &grid, &obs);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "setting,species,step,time,metric,value");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 2 * 8 * 5, "settings x species x steps x metrics");
    assert_eq!(rows[0].split(',').count(), 6);
    // Nesting order: setting, species, step, metric.
    assert!(rows[0].starts_with("0,S,1,0.5,wasserstein,"));
    assert!(rows[1].starts_with("0,S,1,0.5,mean_abs,"));
    assert!(rows[5].starts_with("0,S,2,1,wasserstein,"));
    assert!(rows.last().unwrap().starts_with("1,I,8,4,var_rel,"));
}

#[test]
fn summary_json_reports_aggregates_and_landscape() {
    let real = vec![random_group(55, 4, 9, 1)];
    let fake = vec![random_group(56, 4, 9, 1)];
    let bounds = ScalingBounds::new(vec![(0.0, 10.0)], vec![]).unwrap();
    let report = histogram_errors(&real, &fake, &bounds).unwrap();
    let grid = SimGrid::new(0.0, 0.5, 8).unwrap();
    let obs = vec!["X".to_string()];

    let v = error_summary_json(&report, &grid, &obs);
    assert_eq!(v["n_settings"], 1);
    assert_eq!(v["observables"][0], "X");
    assert_eq!(v["times"].as_array().unwrap().len(), 8);
    let overall = v["overall"]["wasserstein"]["mean"].as_f64().unwrap();
    assert_eq!(overall, report.overall_mean("wasserstein").unwrap());
    assert_eq!(v["mean"]["var_rel"].as_array().unwrap().len(), 8);

    // Landscape: first, middle, and final step, one row per setting x species.
    let landscape = v["landscape"].as_array().unwrap();
    let steps: Vec<u64> = landscape.iter().map(|t| t["step"].as_u64().unwrap()).collect();
    assert_eq!(steps, vec![1, 4, 8]);
    for table in landscape {
        let rows = table["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0]["mean_abs"].as_f64().unwrap() >= 0.0);
    }

    // The JSON round-trips through text.
    let text = serde_json::to_string_pretty(&v).unwrap();
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back, v);
}

#[test]
fn identical_inputs_export_all_zero_values() {
    let real = vec![random_group(57, 3, 5, 1)];
    let bounds = ScalingBounds::new(vec![(0.0, 10.0)], vec![]).unwrap();
    let report = histogram_errors(&real, &real, &bounds).unwrap();
    let grid = SimGrid::new(0.0, 1.0, 4).unwrap();
    let csv = error_csv(&report, &grid, &["X".to_string()]);
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",0"), "expected a zero value in {line}");
    }
}

#[test]
fn energy_csv_lists_every_setting_species_pair() {
    let real = vec![random_group(58, 6, 5, 2), random_group(59, 6, 5, 2)];
    let fake = vec![random_group(60, 6, 5, 2), random_group(61, 6, 5, 2)];
    let obs = vec!["S".to_string(), "I".to_string()];
    let report = energy_test_report(&real, &fake, &obs, 99, 17).unwrap();
    assert_eq!(report.entries.len(), 4);

    let csv = energy_csv(&report);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "setting,species,n_real,n_fake,statistic,p_value");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("0,S,6,6,"));
    assert!(rows[3].starts_with("1,I,6,6,"));
    for e in &report.entries {
        assert!(e.p_value >= 0.01 && e.p_value <= 1.0);
        assert!(e.statistic.is_finite());
    }
}
