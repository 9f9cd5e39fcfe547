use crate::args::*;
use crate::config::{need, need_seed, pick, RunConfig};
use crate::error::CliError;
use crate::model::{resolve_model, ResolvedModel};
use ndarray::Array2;
use popdyn_dataset::{
    generate_test_set, generate_training_set, generate_with_method, read_dataset, write_dataset,
    Dataset,
};
use popdyn_eval::{
    check_property, energy_csv, energy_test_report, error_csv, error_summary_json,
    histogram_errors, timing_benchmark, timing_csv, TemporalProperty,
};
use popdyn_gan::{
    load_params, sample_trajectories, save_params, train, CriticConfig, GeneratorConfig,
    TrainConfig, WeightsMeta,
};
use popdyn_model::{print_model, BUILTIN_NAMES};
use popdyn_sim::{InitialSetting, SimMethod, Trajectory};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// Every command funnels its machine-readable result through here.
fn emit(v: &Value) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn cmd_validate(a: &ValidateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let spec = need(pick(&a.model, &cfg.model), "--model")?;
    let dt = pick(&a.grid_dt, &cfg.grid_dt);
    let h = pick(&a.grid_h, &cfg.grid_h);
    let m = resolve_model(&spec, dt, h)?;
    let net = &m.network;
    emit(&json!({
        "model": m.name,
        "builtin": BUILTIN_NAMES.contains(&spec.as_str()),
        "species": net.species(),
        "n_species": net.n_species(),
        "observables": net.observable_names(),
        "parameters": net.parameters().iter().map(|p| p.name.clone()).collect::<Vec<_>>(),
        "varying_parameters": net.m_cond(),
        "reactions": net.reactions().iter().map(|r| r.name().to_string()).collect::<Vec<_>>(),
        "n_reactions": net.reactions().len(),
        "constraints": net.constraints().len(),
        "grid": { "t0": m.grid.t0(), "dt": m.grid.dt(), "h": m.grid.steps() },
        "deep_architecture": m.deep_arch,
        "canonical": print_model(net, Some(&m.grid)),
    }))
}

fn dataset_json(ds: &Dataset, out: &Path) -> Value {
    json!({
        "out": out,
        "model": ds.meta.model,
        "n_settings": ds.meta.n_settings,
        "k_per_setting": ds.meta.k_per_setting,
        "pairs": ds.len(),
        "observables": ds.meta.observables,
        "grid": { "t0": ds.meta.grid.t0(), "dt": ds.meta.grid.dt(), "h": ds.meta.grid.steps() },
        "seed": ds.meta.seed,
        "warnings": ds.warnings,
    })
}

pub fn cmd_simulate(a: &SimulateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let spec = need(pick(&a.model, &cfg.model), "--model")?;
    let m = resolve_model(&spec, pick(&a.grid_dt, &cfg.grid_dt), pick(&a.grid_h, &cfg.grid_h))?;
    let n = need(pick(&a.n_settings, &cfg.n_settings), "--n-settings")?;
    let k = need(pick(&a.k_per_setting, &cfg.k_per_setting), "--k-per-setting")?;
    let seed = need_seed(a.seed, cfg)?;
    let out = need(pick(&a.out, &cfg.out), "--out")?;
    let method = match pick(&a.method, &method_from_cfg(cfg)?).unwrap_or(Method::Ssa) {
        Method::Ssa => SimMethod::Ssa,
        Method::Tau => {
            let tau = pick(&a.tau, &cfg.tau).unwrap_or(m.grid.dt());
            SimMethod::TauLeap { tau }
        }
    };
    let mut ds = generate_with_method(&m.network, &m.grid, n, k, seed, method)?;
    ds.meta.model = m.name.clone();
    write_dataset(&ds, &out)?;
    emit(&dataset_json(&ds, &out))
}

fn method_from_cfg(cfg: &RunConfig) -> Result<Option<Method>, CliError> {
    match cfg.method.as_deref() {
        None => Ok(None),
        Some("ssa") => Ok(Some(Method::Ssa)),
        Some("tau") => Ok(Some(Method::Tau)),
        Some(other) => Err(CliError::Usage(format!(
            "config method must be `ssa` or `tau`, got `{other}`"
        ))),
    }
}

pub fn cmd_make_dataset(a: &MakeDatasetArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let spec = need(pick(&a.model, &cfg.model), "--model")?;
    let m = resolve_model(&spec, pick(&a.grid_dt, &cfg.grid_dt), pick(&a.grid_h, &cfg.grid_h))?;
    let (def_n, def_k) = match a.role {
        Role::Train => m.train_sizes,
        Role::Test => m.test_sizes,
    };
    let n = pick(&a.n_settings, &cfg.n_settings).unwrap_or(def_n);
    let k = pick(&a.k_per_setting, &cfg.k_per_setting).unwrap_or(def_k);
    let seed = need_seed(a.seed, cfg)?;
    let out = need(pick(&a.out, &cfg.out), "--out")?;
    let mut ds = match a.role {
        Role::Train => generate_training_set(&m.network, &m.grid, n, k, seed)?,
        Role::Test => generate_test_set(&m.network, &m.grid, n, k, seed)?,
    };
    ds.meta.model = m.name.clone();
    write_dataset(&ds, &out)?;
    emit(&dataset_json(&ds, &out))
}

pub fn cmd_train(a: &TrainArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let seed = need_seed(a.seed, cfg)?;
    let out = need(pick(&a.out, &cfg.out), "--out")?;
    let ds = read_dataset(&a.dataset)?;
    let deep = ds.meta.model == "mapk";
    let h = ds.meta.grid.steps();

    let mut gcfg = GeneratorConfig::for_model(ds.meta.n_obs, ds.meta.m_cond, h, deep);
    if let Some(nd) = pick(&a.noise_dim, &cfg.noise_dim) {
        gcfg.noise_dim = nd;
    }
    let ccfg = CriticConfig::for_model(ds.meta.n_obs, ds.meta.m_cond, h, deep);
    let mut tcfg = TrainConfig::default();
    tcfg.seed = seed;
    if let Some(v) = pick(&a.epochs, &cfg.epochs) {
        tcfg.epochs = v;
    }
    if let Some(v) = pick(&a.batch_size, &cfg.batch_size) {
        tcfg.batch_size = v;
    }
    if let Some(v) = pick(&a.lambda_gp, &cfg.lambda_gp) {
        tcfg.lambda_gp = v;
    }
    if let Some(v) = pick(&a.n_critic, &cfg.n_critic) {
        tcfg.n_critic = v;
    }
    if let Some(v) = pick(&a.alpha, &cfg.alpha) {
        tcfg.alpha = v;
    }

    let (gp, log) = train(&ds, &gcfg, &ccfg, &tcfg)?;
    let meta = WeightsMeta {
        model: ds.meta.model.clone(),
        grid: ds.meta.grid,
        observables: ds.meta.observables.clone(),
        bounds: ds.bounds.clone(),
        critic: ccfg,
        train: tcfg.clone(),
    };
    save_params(&out, &gp, &meta)?;

    let log_path = a
        .log
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.train.csv", out.display())));
    let mut csv = String::from("epoch,cycle,critic_loss,gen_loss,gradient_penalty,wall_ms\n");
    for r in &log.records {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.epoch, r.cycle, r.critic_loss, r.gen_loss, r.gradient_penalty, r.wall_ms
        ));
    }
    write_file(&log_path, &csv)?;

    let last = log.records.last();
    emit(&json!({
        "out": out,
        "log": log_path,
        "model": meta.model,
        "epochs": tcfg.epochs,
        "critic_steps": log.critic_steps,
        "gen_steps": log.gen_steps,
        "final_critic_loss": last.map(|r| r.critic_loss),
        "final_gen_loss": last.map(|r| r.gen_loss),
        "final_gradient_penalty": last.map(|r| r.gradient_penalty),
    }))
}

#[derive(Debug, Deserialize)]
struct SettingSpec {
    s0: Vec<f64>,
    #[serde(default)]
    theta: Vec<f64>,
}

fn parse_setting(
    inline: Option<&str>,
    file: Option<&Path>,
) -> Result<Option<InitialSetting>, CliError> {
    let text = match (inline, file) {
        (Some(s), _) => s.to_string(),
        (None, Some(p)) => std::fs::read_to_string(p)?,
        (None, None) => return Ok(None),
    };
    let spec: SettingSpec = serde_json::from_str(&text)?;
    Ok(Some(InitialSetting { s0: spec.s0, theta: spec.theta }))
}

/// Generated trajectories only cover the observed species, so settings for
/// sampling name the observed initial state directly: identity indices
/// into an `n_obs`-long state vector.
fn identity_obs(n_obs: usize) -> Vec<usize> {
    (0..n_obs).collect()
}

pub fn cmd_generate(a: &GenerateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let seed = need_seed(a.seed, cfg)?;
    let out = need(pick(&a.out, &cfg.out), "--out")?;
    let (gp, meta) = load_params(&a.weights)?;
    let n_obs = meta.observables.len();
    let setting = parse_setting(a.setting.as_deref(), a.setting_file.as_deref())?
        .ok_or_else(|| CliError::Usage("--setting or --setting-file is required".into()))?;
    if setting.s0.len() != n_obs {
        return Err(CliError::Usage(format!(
            "setting s0 has {} entries; these weights observe {} species ({})",
            setting.s0.len(),
            n_obs,
            meta.observables.join(", ")
        )));
    }
    let trajs = sample_trajectories(
        &gp,
        &setting,
        &identity_obs(n_obs),
        a.p,
        &meta.bounds,
        seed,
        a.round,
    )?;
    let arrays: Vec<Vec<Vec<f64>>> = trajs
        .iter()
        .map(|t| t.values().rows().into_iter().map(|r| r.to_vec()).collect())
        .collect();
    let doc = json!({
        "model": meta.model,
        "observables": meta.observables,
        "grid": { "t0": meta.grid.t0(), "dt": meta.grid.dt(), "h": meta.grid.steps() },
        "setting": { "s0": setting.s0, "theta": setting.theta },
        "round": a.round,
        "seed": seed,
        "trajectories": arrays,
    });
    write_file(&out, &serde_json::to_string_pretty(&doc)?)?;
    emit(&json!({
        "out": out,
        "model": meta.model,
        "p": trajs.len(),
        "rows": meta.grid.rows(),
        "observables": meta.observables,
    }))
}

/// Splits a test dataset back into per-setting trajectory groups in count
/// units and extracts one representative setting per group.
fn regroup(ds: &Dataset) -> (Vec<InitialSetting>, Vec<Vec<Trajectory>>) {
    let n = ds.meta.n_settings;
    let k = ds.meta.k_per_setting;
    let n_obs = ds.meta.n_obs;
    let rows = ds.meta.grid.rows();
    let unscaled = ds.unscale_trajectories();
    let conds = ds.unscale_settings();

    let mut settings = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for s in 0..n {
        let row = conds.row(s * k);
        settings.push(InitialSetting {
            s0: row.iter().take(n_obs).copied().collect(),
            theta: row.iter().skip(n_obs).copied().collect(),
        });
        let group: Vec<Trajectory> = (0..k)
            .map(|j| {
                let p = s * k + j;
                Trajectory::new(Array2::from_shape_fn((rows, n_obs), |(t, c)| {
                    unscaled[(p, t, c)]
                }))
                .expect("dataset grids have at least two rows")
            })
            .collect();
        groups.push(group);
    }
    (settings, groups)
}

/// Deterministic per-setting noise seeds (splitmix-style) so the sampled
/// trajectories of different settings never share noise streams.
fn setting_seed(seed: u64, s: usize) -> u64 {
    let mut z = seed ^ ((s as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn cmd_evaluate(a: &EvaluateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let seed = need_seed(a.seed, cfg)?;
    let out_dir = need(pick(&a.out, &cfg.out), "--out")?;
    let (gp, meta) = load_params(&a.weights)?;
    let ds = read_dataset(&a.dataset)?;
    if ds.meta.model != meta.model {
        return Err(CliError::Input(format!(
            "weights were trained on `{}` but the dataset holds `{}`",
            meta.model, ds.meta.model
        )));
    }
    if ds.meta.grid != meta.grid || ds.meta.observables != meta.observables {
        return Err(CliError::Input(
            "weights and dataset disagree on grid or observables".into(),
        ));
    }

    let (settings, real) = regroup(&ds);
    let n_obs = ds.meta.n_obs;
    let k = ds.meta.k_per_setting;
    let obs_idx = identity_obs(n_obs);
    let mut fake = Vec::with_capacity(settings.len());
    for (s, setting) in settings.iter().enumerate() {
        fake.push(sample_trajectories(
            &gp,
            setting,
            &obs_idx,
            k,
            &meta.bounds,
            setting_seed(seed, s),
            false,
        )?);
    }

    // Distances in the units training saw: scale with the weights' bounds.
    let report = histogram_errors(&real, &fake, &meta.bounds)?;
    let summary = error_summary_json(&report, &meta.grid, &meta.observables);

    let cap = if a.energy_replicas == 0 { k } else { a.energy_replicas.min(k) };
    let head = |groups: &[Vec<Trajectory>]| -> Vec<Vec<Trajectory>> {
        groups.iter().map(|g| g[..cap].to_vec()).collect()
    };
    let energy =
        energy_test_report(&head(&real), &head(&fake), &meta.observables, a.n_perm, seed)?;

    std::fs::create_dir_all(&out_dir)?;
    write_file(&out_dir.join("error_report.csv"), &error_csv(&report, &meta.grid, &meta.observables))?;
    write_file(&out_dir.join("energy.csv"), &energy_csv(&energy))?;

    let mut doc = json!({
        "out": out_dir,
        "model": meta.model,
        "n_settings": settings.len(),
        "k_per_setting": k,
        "summary": summary,
        "energy": {
            "n_perm": energy.n_perm,
            "replicas": cap,
            "min_p_value": energy.entries.iter().map(|e| e.p_value).fold(f64::INFINITY, f64::min),
            "max_statistic": energy.entries.iter().map(|e| e.statistic).fold(0.0, f64::max),
        },
    });
    if let Some(props_path) = &a.properties {
        let text = std::fs::read_to_string(props_path)?;
        let props: Vec<TemporalProperty> = serde_json::from_str(&text)?;
        let mut rows = Vec::with_capacity(props.len());
        for prop in &props {
            let mut real_frac = 0.0;
            let mut fake_frac = 0.0;
            for s in 0..settings.len() {
                real_frac += check_property(&real[s], &meta.observables, prop)?;
                fake_frac += check_property(&fake[s], &meta.observables, prop)?;
            }
            rows.push(json!({
                "property": prop,
                "real_fraction": real_frac / settings.len() as f64,
                "abstract_fraction": fake_frac / settings.len() as f64,
            }));
        }
        doc["properties"] = Value::Array(rows.clone());
        write_file(
            &out_dir.join("properties.json"),
            &serde_json::to_string_pretty(&Value::Array(rows))?,
        )?;
    }
    write_file(&out_dir.join("summary.json"), &serde_json::to_string_pretty(&doc)?)?;
    emit(&doc)
}

pub fn cmd_bench(a: &BenchArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let spec = need(pick(&a.model, &cfg.model), "--model")?;
    let m = resolve_model(&spec, pick(&a.grid_dt, &cfg.grid_dt), pick(&a.grid_h, &cfg.grid_h))?;
    let seed = need_seed(a.seed, cfg)?;
    let (gp, meta) = load_params(&a.weights)?;
    meta.check_model(&m.name, &m.network, &m.grid)?;
    let setting = match parse_setting(a.setting.as_deref(), None)? {
        Some(s) => s,
        None => midpoint_setting(&m),
    };
    let tau = pick(&a.tau, &cfg.tau).unwrap_or(m.grid.dt());
    let report = timing_benchmark(
        &m.network,
        &m.grid,
        &gp,
        &meta.bounds,
        &setting,
        tau,
        &a.batches,
        seed,
    )?;
    if let Some(path) = &a.out {
        write_file(path, &timing_csv(&report))?;
    }
    emit(&json!({
        "model": m.name,
        "batches": a.batches,
        "rows": report.rows,
    }))
}

/// Center of the declared initial ranges (integer counts) and varying
/// ranges, the natural "typical" benchmark condition.
fn midpoint_setting(m: &ResolvedModel) -> InitialSetting {
    let s0 = m
        .network
        .init_ranges()
        .iter()
        .map(|&(lo, hi)| ((lo + hi) / 2.0).round())
        .collect();
    let theta = m.network.varying_ranges().iter().map(|&(lo, hi)| (lo + hi) / 2.0).collect();
    InitialSetting { s0, theta }
}

/// Dispatch used by `main`; kept here so tests can drive commands without
/// spawning a process.
pub fn run(cli: &crate::args::Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match &cli.cmd {
        Command::Validate(a) => cmd_validate(a, &cfg),
        Command::Simulate(a) => cmd_simulate(a, &cfg),
        Command::MakeDataset(a) => cmd_make_dataset(a, &cfg),
        Command::Train(a) => cmd_train(a, &cfg),
        Command::Generate(a) => cmd_generate(a, &cfg),
        Command::Evaluate(a) => cmd_evaluate(a, &cfg),
        Command::Bench(a) => cmd_bench(a, &cfg),
    }
}
