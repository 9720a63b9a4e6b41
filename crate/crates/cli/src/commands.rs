//! The experiment protocols behind each subcommand.

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::report::{ensure_out_dir, sig6, write_csv, Manifest};
use scnlab::dataio::{self, Dataset, FeatureGroupSpec, NormParams, TargetNorm};
use scnlab::diagnostics;
use scnlab::ncl::{self, EnsembleModel, NclSystem, SolveMethod, SolverConfig};
use scnlab::numkit::{self, Matrix};
use scnlab::scn::{self, RvflConfig, ScnConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// On-disk model bundle: the ensemble plus the normalization fitted during
/// training, so prediction can replay the whole pipeline.
#[derive(Debug, Serialize, Deserialize)]
pub struct SavedModel {
    #[serde(flatten)]
    pub ensemble: EnsembleModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_norm: Option<NormParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_norm: Option<TargetNorm>,
}

impl SavedModel {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read model {}: {e}", path.display())))?;
        let parsed: SavedModel = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("model {}: {e}", path.display())))?;
        // The stacked weight vector is authoritative for per-model betas.
        let ensemble = EnsembleModel::new(
            parsed.ensemble.base_models,
            parsed.ensemble.group_spec,
            parsed.ensemble.lambda,
            parsed.ensemble.b,
        )?;
        Ok(SavedModel {
            ensemble,
            input_norm: parsed.input_norm,
            target_norm: parsed.target_norm,
        })
    }
}

// ---------------------------------------------------------------------------
// demo

pub struct DemoOpts {
    pub out: PathBuf,
    pub seed: u64,
    pub samples: usize,
    pub grid: Vec<usize>,
    pub repeats: usize,
    pub ridge: f64,
}

/// The synthetic demonstration: 10 base models on the 2-D curve, solver
/// timing and weight-correlation studies with and without ridge, four CSV
/// files in total.
pub fn cmd_demo(opts: DemoOpts) -> Result<()> {
    if opts.grid.is_empty() {
        return Err(CliError::Config("demo grid must be nonempty".into()));
    }
    if opts.samples < 50 {
        return Err(CliError::Config("demo needs at least 50 samples".into()));
    }
    if !(opts.ridge > 0.0) {
        return Err(CliError::Config("demo ridge must be > 0".into()));
    }
    ensure_out_dir(&opts.out)?;
    let config_echo = serde_json::json!({
        "samples": opts.samples,
        "grid": opts.grid,
        "repeats": opts.repeats,
        "ridge": opts.ridge,
        "models": 10,
        "lambda": 0.1,
        "tau": 1e-6,
        "k_max": 5,
    });
    let mut manifest = Manifest::new("demo", opts.seed, config_echo, &opts.out);

    let full = dataio::synth_generate(opts.samples, -5.0, 5.0, opts.seed)?;
    let n_train = opts.samples * 4 / 5;
    let train = full.take_rows(&(0..n_train).collect::<Vec<_>>());
    let n_test = opts.samples - n_train;

    let l_max = *opts.grid.iter().max().unwrap();
    let build_clock = std::time::Instant::now();
    let models = diagnostics::build_replicated_models(
        &train,
        10,
        l_max,
        &diagnostics::demo_scn_template(),
        opts.seed,
    )?;
    let build_seconds = build_clock.elapsed().as_secs_f64();
    let hidden: Vec<Matrix> = models
        .iter()
        .map(|m| scn::hidden_matrix(m, &train.x))
        .collect::<scn::Result<Vec<_>>>()
        .map_err(CliError::from)?;

    let methods = [
        SolveMethod::Analytic,
        SolveMethod::Jacobi,
        SolveMethod::GaussSeidel,
    ];
    for (tag, ridge) in [("plain", 0.0), ("ridge", opts.ridge)] {
        let corr = diagnostics::weight_correlation_study_from_hidden(
            &hidden, &train.y, &opts.grid, 0.1, ridge, 5,
        )?;
        let rows: Vec<String> = corr
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{}",
                    r.l_m,
                    r.l_total,
                    sig6(r.a1_a2),
                    sig6(r.a1_a3),
                    sig6(r.a2_a3)
                )
            })
            .collect();
        let name = format!("correlation_{tag}.csv");
        write_csv(
            &manifest.out_path(&name),
            "l_m,l_total,a1_a2,a1_a3,a2_a3",
            &rows,
        )?;
        manifest.add_file(&name);

        let timing = diagnostics::bench_construction_from_hidden(
            &hidden,
            &train.y,
            &opts.grid,
            &methods,
            opts.repeats,
            0.1,
            ridge,
            5,
        )?;
        let rows: Vec<String> = timing
            .iter()
            .map(|r| format!("{},{},{}", r.l_total, r.method, sig6(r.wall_seconds)))
            .collect();
        let name = format!("timing_{tag}.csv");
        write_csv(
            &manifest.out_path(&name),
            "l_total,method,median_seconds",
            &rows,
        )?;
        manifest.add_file(&name);
    }

    manifest.set_details(serde_json::json!({
        "train_samples": n_train,
        "test_samples": n_test,
        "realized_nodes": models.iter().map(|m| m.hidden_count()).collect::<Vec<_>>(),
        "base_model_build_seconds": build_seconds,
    }));
    manifest.finish()
}

// ---------------------------------------------------------------------------
// shared pipeline pieces

pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub method: Option<SolveMethod>,
    pub ridge: Option<f64>,
    pub normalize_target: Option<bool>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = Some(out.clone());
        }
        if let Some(method) = self.method {
            cfg.solver.method = method;
        }
        if let Some(ridge) = self.ridge {
            cfg.solver.ridge = ridge;
        }
        if let Some(nt) = self.normalize_target {
            cfg.normalize_target = nt;
        }
    }
}

fn out_dir_for(cfg: &ExperimentConfig, default_name: &str) -> PathBuf {
    cfg.out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_name))
}

fn group_names(spec: &FeatureGroupSpec) -> Vec<String> {
    match &spec.names {
        Some(names) => names.clone(),
        None => (1..=spec.group_count())
            .map(|m| format!("group{m}"))
            .collect(),
    }
}

struct Stage1 {
    train: Dataset,
    val: Dataset,
}

/// Split and stage-1 normalization (fitted on the training split only), used
/// by hyperparameter estimation.
fn stage1(cfg: &ExperimentConfig, data: &Dataset) -> Result<Stage1> {
    let spec = cfg.split.to_spec(cfg.seed);
    let (train, val, _test) = dataio::split(data, &spec)?;
    let (mut train, mut others, _) = if cfg.normalize_inputs {
        dataio::minmax_fit_apply(&train, &[&val])
    } else {
        (train.clone(), vec![val.clone()], NormParams::fit(&train))
    };
    let mut val = others.remove(0);
    if cfg.normalize_target {
        let tn = TargetNorm::fit(&train.y);
        train.y = tn.apply(&train.y);
        val.y = tn.apply(&val.y);
    }
    Ok(Stage1 { train, val })
}

struct Stage2 {
    combined: Dataset,
    test: Dataset,
    input_norm: Option<NormParams>,
    target_norm: Option<TargetNorm>,
}

/// Split, then retrain-style preparation: train and validation merged, the
/// normalization refitted on the merge, test carried along.
fn stage2(cfg: &ExperimentConfig, data: &Dataset) -> Result<Stage2> {
    let spec = cfg.split.to_spec(cfg.seed);
    let (train, val, test) = dataio::split(data, &spec)?;
    let combined = train.concat(&val)?;
    let (mut combined, mut others, params) = if cfg.normalize_inputs {
        dataio::minmax_fit_apply(&combined, &[&test])
    } else {
        (
            combined.clone(),
            vec![test.clone()],
            NormParams::fit(&combined),
        )
    };
    let mut test = others.remove(0);
    let input_norm = cfg.normalize_inputs.then_some(params);
    let target_norm = if cfg.normalize_target {
        let tn = TargetNorm::fit(&combined.y);
        combined.y = tn.apply(&combined.y);
        test.y = tn.apply(&test.y);
        Some(tn)
    } else {
        None
    };
    Ok(Stage2 {
        combined,
        test,
        input_norm,
        target_norm,
    })
}

/// Estimated or configured hidden-node counts per group.
fn resolve_nodes(
    cfg: &ExperimentConfig,
    data: &Dataset,
    spec: &FeatureGroupSpec,
    manifest: &mut Manifest,
) -> Result<Vec<usize>> {
    if let Some(nodes) = &cfg.nodes_per_group {
        if nodes.len() != spec.group_count() {
            return Err(CliError::Config(format!(
                "nodes_per_group has {} entries for {} groups",
                nodes.len(),
                spec.group_count()
            )));
        }
        if nodes.contains(&0) {
            return Err(CliError::Config(
                "nodes_per_group entries must be >= 1".into(),
            ));
        }
        return Ok(nodes.clone());
    }
    let (runs, _, _) = estimate_scn_runs(cfg, data, spec, manifest)?;
    Ok(runs
        .iter()
        .map(|r| scnlab::scn::estimate_from_runs(r))
        .collect())
}

/// Down-samples stage-1 train/val and runs the node estimation per group.
/// Returns per-group argmin runs plus the realized sample counts.
fn estimate_scn_runs(
    cfg: &ExperimentConfig,
    data: &Dataset,
    spec: &FeatureGroupSpec,
    manifest: &mut Manifest,
) -> Result<(Vec<Vec<usize>>, usize, usize)> {
    let stage = stage1(cfg, data)?;
    let (train, used_train) = downsample(
        &stage.train,
        cfg.estimate.downsample_train,
        "training",
        manifest,
    );
    let (val, used_val) = downsample(
        &stage.val,
        cfg.estimate.downsample_val,
        "validation",
        manifest,
    );
    let train_parts = dataio::partition_features(&train, spec)?;
    let val_parts = dataio::partition_features(&val, spec)?;
    let mut runs = Vec::with_capacity(spec.group_count());
    for m in 0..spec.group_count() {
        let scn_cfg = ScnConfig {
            seed: cfg.seed.wrapping_add(97 * m as u64),
            ..cfg.scn_for_group(m)
        };
        runs.push(scn::estimate_nodes_runs(
            &train_parts[m],
            &val_parts[m],
            (cfg.estimate.l_lo, cfg.estimate.l_hi),
            cfg.estimate.repeats,
            &scn_cfg,
        )?);
    }
    Ok((runs, used_train, used_val))
}

fn downsample(
    data: &Dataset,
    want: usize,
    label: &str,
    manifest: &mut Manifest,
) -> (Dataset, usize) {
    if data.n() <= want {
        if data.n() < want {
            manifest.warn(format!(
                "requested {want} {label} rows for estimation, only {} available; using all",
                data.n()
            ));
        }
        (data.clone(), data.n())
    } else {
        // Rows are already shuffled by the split.
        (data.take_rows(&(0..want).collect::<Vec<_>>()), want)
    }
}

fn build_group_models(
    cfg: &ExperimentConfig,
    parts: &[Dataset],
    nodes: &[usize],
    seed: u64,
) -> Result<Vec<scnlab::scn::ScnModel>> {
    let mut models = Vec::with_capacity(parts.len());
    for (m, part) in parts.iter().enumerate() {
        let scn_cfg = ScnConfig {
            l_max: nodes[m],
            seed: seed.wrapping_add(m as u64),
            ..cfg.scn_for_group(m)
        };
        models.push(scn::build_scn(part, &scn_cfg)?.0);
    }
    Ok(models)
}

fn ensemble_rmse(models: &[scnlab::scn::ScnModel], b: &[f64], parts: &[Dataset]) -> Result<f64> {
    let n = parts[0].n();
    let mut sum = vec![0.0; n];
    let mut lo = 0;
    for (m, model) in models.iter().enumerate() {
        let hi = lo + model.hidden_count();
        let mut mm = model.clone();
        mm.beta = b[lo..hi].to_vec();
        lo = hi;
        let p = scn::predict_base(&mm, &parts[m].x)?;
        for (s, v) in sum.iter_mut().zip(&p) {
            *s += v;
        }
    }
    let m_f = models.len() as f64;
    for s in &mut sum {
        *s /= m_f;
    }
    Ok(numkit::rmse(&sum, &parts[0].y)?)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

// ---------------------------------------------------------------------------
// train

/// Two-stage protocol: estimate (or take) the node counts on train/val, then
/// retrain on train+val and evaluate on test, repeated over seeded builds.
/// Reports all four methods unless one is forced, and saves the model solved
/// by the configured method.
pub fn cmd_train(config_path: &Path, overrides: &Overrides) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    let data = cfg.load_data()?;
    let spec = cfg.resolve_groups(data.dim())?;
    let out = out_dir_for(&cfg, "train-out");
    ensure_out_dir(&out)?;
    let mut manifest = Manifest::new("train", cfg.seed, serde_json::to_value(&cfg)?, &out);

    let nodes = resolve_nodes(&cfg, &data, &spec, &mut manifest)?;
    let stage = stage2(&cfg, &data)?;
    let parts = dataio::partition_features(&stage.combined, &spec)?;
    let test_parts = dataio::partition_features(&stage.test, &spec)?;

    let methods: Vec<SolveMethod> = match overrides.method {
        Some(m) => vec![m],
        None => SolveMethod::ALL.to_vec(),
    };
    let mut results: Vec<(SolveMethod, Vec<f64>, Vec<f64>)> = methods
        .iter()
        .map(|&m| (m, Vec::new(), Vec::new()))
        .collect();
    let mut saved: Option<SavedModel> = None;
    let mut saved_train_rmse = f64::NAN;

    for rep in 0..cfg.repeats {
        let rep_seed = cfg.seed.wrapping_add(10_007 * rep as u64);
        let models = build_group_models(&cfg, &parts, &nodes, rep_seed)?;
        let blocks: Vec<Matrix> = models
            .iter()
            .zip(&parts)
            .map(|(m, p)| scn::hidden_matrix(m, &p.x))
            .collect::<scn::Result<Vec<_>>>()
            .map_err(CliError::from)?;
        let sys = NclSystem::from_hidden(
            &blocks,
            &stage.combined.y,
            cfg.solver.lambda,
            cfg.solver.ridge,
        )?;
        for (method, train_runs, test_runs) in &mut results {
            let solver = SolverConfig {
                method: *method,
                ..cfg.solver.clone()
            };
            let (b, report) = ncl::solve(&sys, &solver)?;
            train_runs.push(*report.e_ens.last().unwrap());
            test_runs.push(ensemble_rmse(&models, &b, &test_parts)?);
            if rep == 0 && *method == cfg.solver.method {
                saved_train_rmse = *train_runs.last().unwrap();
                let ensemble =
                    EnsembleModel::new(models.clone(), spec.clone(), cfg.solver.lambda, b)?;
                saved = Some(SavedModel {
                    ensemble,
                    input_norm: stage.input_norm.clone(),
                    target_norm: stage.target_norm,
                });
            }
        }
    }

    let rows: Vec<String> = results
        .iter()
        .map(|(method, train_runs, test_runs)| {
            let (tm, ts) = mean_std(train_runs);
            let (em, es) = mean_std(test_runs);
            format!(
                "{},{},{},{},{},{}",
                method,
                method.label(),
                sig6(tm),
                sig6(ts),
                sig6(em),
                sig6(es)
            )
        })
        .collect();
    write_csv(
        &manifest.out_path("report.csv"),
        "method,label,train_rmse_mean,train_rmse_std,test_rmse_mean,test_rmse_std",
        &rows,
    )?;
    manifest.add_file("report.csv");

    let saved = saved.ok_or_else(|| {
        CliError::Config(format!(
            "configured method {} is not among the evaluated methods",
            cfg.solver.method
        ))
    })?;
    std::fs::write(
        manifest.out_path("model.json"),
        serde_json::to_string(&saved)?,
    )?;
    manifest.add_file("model.json");

    // Full-precision results go to the manifest; the CSV rounds to six
    // significant digits.
    let full: Vec<serde_json::Value> = results
        .iter()
        .map(|(method, train_runs, test_runs)| {
            let (tm, ts) = mean_std(train_runs);
            let (em, es) = mean_std(test_runs);
            serde_json::json!({
                "method": method.tag(),
                "train_rmse_mean": tm,
                "train_rmse_std": ts,
                "test_rmse_mean": em,
                "test_rmse_std": es,
            })
        })
        .collect();
    manifest.set_details(serde_json::json!({
        "nodes_per_group": nodes,
        "train_rows": stage.combined.n(),
        "test_rows": stage.test.n(),
        "normalize_inputs": cfg.normalize_inputs,
        "normalize_target": cfg.normalize_target,
        "repeats": cfg.repeats,
        "results": full,
        "saved_model_method": cfg.solver.method.tag(),
        "saved_model_train_rmse": saved_train_rmse,
    }));
    manifest.finish()
}

// ---------------------------------------------------------------------------
// estimate

/// Node-count estimation per group (Tables-style runs + median), or RVFL
/// weight-range estimation over the α grid when `rvfl` is set.
pub fn cmd_estimate(config_path: &Path, rvfl: bool, overrides: &Overrides) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    let data = cfg.load_data()?;
    let spec = cfg.resolve_groups(data.dim())?;
    let out = out_dir_for(&cfg, "estimate-out");
    ensure_out_dir(&out)?;
    let command = if rvfl { "estimate-rvfl" } else { "estimate" };
    let mut manifest = Manifest::new(command, cfg.seed, serde_json::to_value(&cfg)?, &out);
    let names = group_names(&spec);

    if rvfl {
        let nodes = cfg.nodes_per_group.clone().ok_or_else(|| {
            CliError::Config("rvfl estimation needs nodes_per_group (matched architecture)".into())
        })?;
        if nodes.len() != spec.group_count() {
            return Err(CliError::Config(format!(
                "nodes_per_group has {} entries for {} groups",
                nodes.len(),
                spec.group_count()
            )));
        }
        let stage = stage1(&cfg, &data)?;
        let (train, _) = downsample(
            &stage.train,
            cfg.estimate.downsample_train,
            "training",
            &mut manifest,
        );
        let (val, _) = downsample(
            &stage.val,
            cfg.estimate.downsample_val,
            "validation",
            &mut manifest,
        );
        let train_parts = dataio::partition_features(&train, &spec)?;
        let val_parts = dataio::partition_features(&val, &spec)?;

        let mut rows = Vec::new();
        let mut best = vec![(f64::INFINITY, 0.0); spec.group_count()];
        for &alpha in &cfg.estimate.alpha_grid {
            let mut cells = Vec::with_capacity(spec.group_count());
            for m in 0..spec.group_count() {
                let mut errs = Vec::with_capacity(cfg.estimate.repeats);
                for rep in 0..cfg.estimate.repeats {
                    let rc = RvflConfig {
                        l: nodes[m],
                        alpha,
                        seed: cfg
                            .seed
                            .wrapping_add(31 * m as u64)
                            .wrapping_add(101 * rep as u64),
                        activation: cfg.scn_for_group(m).activation,
                    };
                    let model = scn::build_rvfl(&train_parts[m], &rc)?;
                    let pred = scn::predict_base(&model, &val_parts[m].x)?;
                    errs.push(numkit::rmse(&pred, &val_parts[m].y)?);
                }
                let (mean, _) = mean_std(&errs);
                if mean < best[m].0 {
                    best[m] = (mean, alpha);
                }
                cells.push(sig6(mean));
            }
            rows.push(format!("{alpha},{}", cells.join(",")));
        }
        rows.push(format!(
            "best_alpha,{}",
            best.iter()
                .map(|(_, a)| a.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        write_csv(
            &manifest.out_path("rvfl_alpha.csv"),
            &format!("alpha,{}", names.join(",")),
            &rows,
        )?;
        manifest.add_file("rvfl_alpha.csv");
        manifest.set_details(serde_json::json!({
            "best_alpha": best.iter().map(|(_, a)| *a).collect::<Vec<_>>(),
            "nodes_per_group": nodes,
        }));
    } else {
        let (runs, used_train, used_val) = estimate_scn_runs(&cfg, &data, &spec, &mut manifest)?;
        let repeats = cfg.estimate.repeats;
        let mut rows = Vec::with_capacity(repeats + 1);
        for rep in 0..repeats {
            let cells: Vec<String> = runs.iter().map(|r| r[rep].to_string()).collect();
            rows.push(format!("{},{}", rep + 1, cells.join(",")));
        }
        let medians: Vec<usize> = runs
            .iter()
            .map(|r| scnlab::scn::estimate_from_runs(r))
            .collect();
        rows.push(format!(
            "median,{}",
            medians
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        write_csv(
            &manifest.out_path("estimate_nodes.csv"),
            &format!("index,{}", names.join(",")),
            &rows,
        )?;
        manifest.add_file("estimate_nodes.csv");
        manifest.set_details(serde_json::json!({
            "median_nodes": medians,
            "search_range": [cfg.estimate.l_lo, cfg.estimate.l_hi],
            "train_rows_used": used_train,
            "val_rows_used": used_val,
        }));
    }
    manifest.finish()
}

// ---------------------------------------------------------------------------
// sweep

/// λ robustness sweep: shared base models per repeat, one solve per λ,
/// box-plot statistics of the per-λ test RMSE distributions.
pub fn cmd_sweep(
    config_path: &Path,
    lambdas: Option<Vec<f64>>,
    overrides: &Overrides,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    let lambdas = lambdas.unwrap_or_else(|| vec![0.08, 0.09, 0.10, 0.11, 0.12]);
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(CliError::Config("sweep lambdas must lie in (0, 1)".into()));
    }
    let data = cfg.load_data()?;
    let spec = cfg.resolve_groups(data.dim())?;
    let out = out_dir_for(&cfg, "sweep-out");
    ensure_out_dir(&out)?;
    let mut manifest = Manifest::new("sweep", cfg.seed, serde_json::to_value(&cfg)?, &out);

    let nodes = resolve_nodes(&cfg, &data, &spec, &mut manifest)?;
    let stage = stage2(&cfg, &data)?;
    let parts = dataio::partition_features(&stage.combined, &spec)?;
    let test_parts = dataio::partition_features(&stage.test, &spec)?;

    let mut table = vec![Vec::with_capacity(cfg.repeats); lambdas.len()];
    for rep in 0..cfg.repeats {
        let rep_seed = cfg.seed.wrapping_add(10_007 * rep as u64);
        let models = build_group_models(&cfg, &parts, &nodes, rep_seed)?;
        let blocks: Vec<Matrix> = models
            .iter()
            .zip(&parts)
            .map(|(m, p)| scn::hidden_matrix(m, &p.x))
            .collect::<scn::Result<Vec<_>>>()
            .map_err(CliError::from)?;
        for (li, &lambda) in lambdas.iter().enumerate() {
            let sys = NclSystem::from_hidden(&blocks, &stage.combined.y, lambda, cfg.solver.ridge)?;
            let solver = SolverConfig {
                lambda,
                ..cfg.solver.clone()
            };
            let (b, _) = ncl::solve(&sys, &solver)?;
            table[li].push(ensemble_rmse(&models, &b, &test_parts)?);
        }
    }

    let mut rows = Vec::with_capacity(lambdas.len());
    for (li, &lambda) in lambdas.iter().enumerate() {
        let mut runs = table[li].clone();
        runs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = quantile(&runs, 0.5);
        let q1 = quantile(&runs, 0.25);
        let q3 = quantile(&runs, 0.75);
        let iqr = q3 - q1;
        let lo = q1 - 1.5 * iqr;
        let hi = q3 + 1.5 * iqr;
        let outliers: Vec<String> = runs
            .iter()
            .filter(|v| **v < lo || **v > hi)
            .map(|v| sig6(*v))
            .collect();
        rows.push(format!(
            "{lambda},{},{},{},{},{},{},{}",
            sig6(median),
            sig6(q1),
            sig6(q3),
            sig6(lo),
            sig6(hi),
            runs.len(),
            outliers.join(";")
        ));
    }
    write_csv(
        &manifest.out_path("sweep.csv"),
        "lambda,median,q1,q3,fence_low,fence_high,n,outliers",
        &rows,
    )?;
    manifest.add_file("sweep.csv");
    manifest.set_details(serde_json::json!({
        "lambdas": lambdas,
        "nodes_per_group": nodes,
        "method": cfg.solver.method.tag(),
    }));
    manifest.finish()
}

/// Linear-interpolation quantile over sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

// ---------------------------------------------------------------------------
// bench

pub struct BenchOverrides {
    pub grid: Option<Vec<usize>>,
    pub methods: Option<Vec<String>>,
    pub repeats: Option<usize>,
}

/// Construction-time scaling on replicated base models over the configured
/// data source.
pub fn cmd_bench(config_path: &Path, bench: &BenchOverrides, overrides: &Overrides) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    let grid = bench.grid.clone().unwrap_or_else(|| cfg.bench.grid.clone());
    let method_names = bench
        .methods
        .clone()
        .unwrap_or_else(|| cfg.bench.methods.clone());
    let methods: Vec<SolveMethod> = method_names
        .iter()
        .map(|s| s.parse().map_err(CliError::Config))
        .collect::<Result<_>>()?;
    let repeats = bench.repeats.unwrap_or(cfg.bench.repeats);
    let data = cfg.load_data()?;
    let out = out_dir_for(&cfg, "bench-out");
    ensure_out_dir(&out)?;
    let mut manifest = Manifest::new("bench", cfg.seed, serde_json::to_value(&cfg)?, &out);

    // Base models are grown once and timed on their own; the records below
    // cover system assembly + solve only.
    let l_max = grid.iter().copied().max().unwrap_or(1);
    let build_clock = std::time::Instant::now();
    let models = diagnostics::build_replicated_models(
        &data,
        cfg.bench.models,
        l_max,
        &diagnostics::demo_scn_template(),
        cfg.seed,
    )?;
    let build_seconds = build_clock.elapsed().as_secs_f64();
    let hidden: Vec<Matrix> = models
        .iter()
        .map(|m| scn::hidden_matrix(m, &data.x))
        .collect::<scn::Result<Vec<_>>>()
        .map_err(CliError::from)?;
    let records = diagnostics::bench_construction_from_hidden(
        &hidden,
        &data.y,
        &grid,
        &methods,
        repeats,
        cfg.solver.lambda,
        cfg.solver.ridge,
        cfg.solver.k_max,
    )?;
    let rows: Vec<String> = records
        .iter()
        .map(|r| format!("{},{},{}", r.l_total, r.method, sig6(r.wall_seconds)))
        .collect();
    write_csv(
        &manifest.out_path("timing.csv"),
        "l_total,method,median_seconds",
        &rows,
    )?;
    manifest.add_file("timing.csv");
    manifest.set_details(serde_json::json!({
        "grid": grid,
        "methods": method_names,
        "repeats": repeats,
        "models": cfg.bench.models,
        "base_model_build_seconds": build_seconds,
        "realized_nodes": models.iter().map(|m| m.hidden_count()).collect::<Vec<_>>(),
    }));
    manifest.finish()
}

// ---------------------------------------------------------------------------
// predict

/// Applies a saved model to a feature-only CSV, one prediction per line.
/// Stored normalization is replayed; predictions are mapped back to the
/// original target scale when the model was trained on a normalized target.
pub fn cmd_predict(model_path: &Path, input: &Path, output: &Path, delimiter: u8) -> Result<()> {
    let saved = SavedModel::load(model_path)?;
    let (x, _names) = dataio::load_matrix_csv(input, None, delimiter)?;
    if x.rows() == 0 {
        std::fs::write(output, "")?;
        return Ok(());
    }
    let expected = saved.ensemble.group_spec.total_width();
    if x.cols() != expected {
        return Err(CliError::Data(format!(
            "input has {} feature columns, the model expects {expected}",
            x.cols()
        )));
    }
    let x = match &saved.input_norm {
        Some(norm) => norm.apply_matrix(&x),
        None => x,
    };
    let mut pred = saved.ensemble.predict(&x)?;
    if let Some(tn) = &saved.target_norm {
        pred = tn.invert(&pred);
    }
    let mut text = String::with_capacity(pred.len() * 20);
    for p in &pred {
        text.push_str(&format!("{p}\n"));
    }
    std::fs::write(output, text)?;
    Ok(())
}
