//! Experiment-grade analysis on top of the solvers: agreement of the three
//! weight-evaluation methods, construction-time scaling, and the
//! variance/covariance/bias decomposition of the ensemble generalization
//! error against a synthetic problem with known group targets.

use crate::dataio::{self, DataError, Dataset, FeatureGroupSpec};
use crate::ncl::{self, NclError, NclSystem, SolveMethod, SolverConfig};
use crate::numkit::{self, Matrix, NumError};
use crate::scn::{self, ScnConfig, ScnError, ScnModel};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Scn(#[from] ScnError),
    #[error(transparent)]
    Ncl(#[from] NclError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("decomposition needs at least 2 trials, got {0}")]
    InsufficientTrials(usize),
}

pub type Result<T> = std::result::Result<T, DiagError>;

/// One timing measurement of system assembly + solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingRecord {
    pub l_total: usize,
    pub method: SolveMethod,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_note: Option<String>,
}

/// Pairwise weight correlations among the three coupled solvers at one grid
/// point. A1 = analytic, A2 = block Jacobi, A3 = block Gauss-Seidel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationRecord {
    /// Requested nodes per base model.
    pub l_m: usize,
    /// Realized stacked width.
    pub l_total: usize,
    pub a1_a2: f64,
    pub a1_a3: f64,
    pub a2_a3: f64,
}

/// Base-model template for demonstration-scale studies. Hundreds of nodes on
/// a smooth low-dimensional target need a deeper relaxation tail than the
/// stock sequence before late candidates qualify; both knobs are documented
/// as tunable.
pub fn demo_scn_template() -> ScnConfig {
    let mut cfg = ScnConfig::default();
    cfg.r_sequence
        .extend([1.0 - 1e-6, 1.0 - 1e-7, 1.0 - 1e-8, 1.0 - 1e-9]);
    cfg
}

/// Grows `m_count` base models on the same inputs (seeds `seed..seed+M`),
/// each up to `l_max` nodes. Used by the demonstration-style studies where
/// every model sees the full feature set.
pub fn build_replicated_models(
    data: &Dataset,
    m_count: usize,
    l_max: usize,
    template: &ScnConfig,
    seed: u64,
) -> Result<Vec<ScnModel>> {
    if m_count == 0 {
        return Err(DiagError::Parameter("need at least one base model".into()));
    }
    let models: Vec<scn::Result<ScnModel>> = (0..m_count)
        .into_par_iter()
        .map(|m| {
            let cfg = ScnConfig {
                l_max,
                seed: seed.wrapping_add(m as u64),
                tol: 1e-14,
                ..template.clone()
            };
            scn::build_scn(data, &cfg).map(|(model, _)| model)
        })
        .collect();
    let mut out = Vec::with_capacity(m_count);
    for m in models {
        out.push(m?);
    }
    Ok(out)
}

fn sliced_blocks(hidden: &[Matrix], l: usize) -> Vec<Matrix> {
    hidden
        .iter()
        .map(|h| h.col_slice(0, l.min(h.cols())))
        .collect()
}

/// For each grid point, builds one shared set of base models (prefixes of a
/// single growth per model), runs the three coupled solvers on the same
/// system, and reports the pairwise correlations of the stacked weights.
pub fn weight_correlation_study(
    data: &Dataset,
    m_count: usize,
    l_grid: &[usize],
    lambda: f64,
    ridge: f64,
    k_max: usize,
    seed: u64,
) -> Result<Vec<CorrelationRecord>> {
    if l_grid.is_empty() {
        return Err(DiagError::Parameter("node grid must be nonempty".into()));
    }
    let l_max = *l_grid.iter().max().unwrap();
    let models = build_replicated_models(data, m_count, l_max, &demo_scn_template(), seed)?;
    let hidden: Vec<Matrix> = models
        .iter()
        .map(|m| scn::hidden_matrix(m, &data.x))
        .collect::<scn::Result<Vec<_>>>()?;
    weight_correlation_study_from_hidden(&hidden, &data.y, l_grid, lambda, ridge, k_max)
}

/// [`weight_correlation_study`] over already-computed hidden blocks, so one
/// model build can feed several parameterizations.
pub fn weight_correlation_study_from_hidden(
    hidden: &[Matrix],
    y: &[f64],
    l_grid: &[usize],
    lambda: f64,
    ridge: f64,
    k_max: usize,
) -> Result<Vec<CorrelationRecord>> {
    let mut records = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let blocks = sliced_blocks(hidden, l);
        let sys = NclSystem::from_hidden(&blocks, y, lambda, ridge)?;
        let cfg = SolverConfig {
            lambda,
            ridge,
            k_max,
            tau: 1e-6,
            record_trajectory: false,
            method: SolveMethod::Analytic,
        };
        let (b1, _) = ncl::solve_analytic(&sys)?;
        let (b2, _) = ncl::solve_jacobi(&sys, &cfg)?;
        let (b3, _) = ncl::solve_gauss_seidel(&sys, &cfg)?;
        records.push(CorrelationRecord {
            l_m: l,
            l_total: sys.l_total(),
            a1_a2: numkit::pearson_corr(&b1, &b2)?,
            a1_a3: numkit::pearson_corr(&b1, &b3)?,
            a2_a3: numkit::pearson_corr(&b2, &b3)?,
        });
    }
    Ok(records)
}

/// Times system assembly + solve per (grid point, method); base-model
/// training happens once outside the clock. Reports the median over
/// `repeats` runs.
pub fn bench_construction(
    data: &Dataset,
    m_count: usize,
    l_grid: &[usize],
    methods: &[SolveMethod],
    repeats: usize,
    lambda: f64,
    ridge: f64,
    k_max: usize,
    seed: u64,
) -> Result<Vec<TimingRecord>> {
    if l_grid.is_empty() {
        return Err(DiagError::Parameter("grid must be nonempty".into()));
    }
    let l_max = *l_grid.iter().max().unwrap();
    let models = build_replicated_models(data, m_count, l_max, &demo_scn_template(), seed)?;
    let hidden: Vec<Matrix> = models
        .iter()
        .map(|m| scn::hidden_matrix(m, &data.x))
        .collect::<scn::Result<Vec<_>>>()?;
    bench_construction_from_hidden(
        &hidden, &data.y, l_grid, methods, repeats, lambda, ridge, k_max,
    )
}

/// [`bench_construction`] over already-computed hidden blocks.
pub fn bench_construction_from_hidden(
    hidden: &[Matrix],
    y: &[f64],
    l_grid: &[usize],
    methods: &[SolveMethod],
    repeats: usize,
    lambda: f64,
    ridge: f64,
    k_max: usize,
) -> Result<Vec<TimingRecord>> {
    if repeats == 0 {
        return Err(DiagError::Parameter("repeats must be >= 1".into()));
    }
    if l_grid.is_empty() || methods.is_empty() {
        return Err(DiagError::Parameter(
            "grid and method list must be nonempty".into(),
        ));
    }
    let mut records = Vec::new();
    for &l in l_grid {
        let blocks = sliced_blocks(hidden, l);
        let sys = NclSystem::from_hidden(&blocks, y, lambda, ridge)?;
        for &method in methods {
            let cfg = SolverConfig {
                lambda,
                ridge,
                k_max,
                tau: 1e-6,
                record_trajectory: false,
                method,
            };
            let mut times = Vec::with_capacity(repeats);
            for _ in 0..repeats {
                let start = Instant::now();
                let _ = ncl::solve(&sys, &cfg)?;
                times.push(start.elapsed().as_secs_f64());
            }
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            records.push(TimingRecord {
                l_total: sys.l_total(),
                method,
                wall_seconds: times[(times.len() - 1) / 2],
                peak_note: None,
            });
        }
    }
    Ok(records)
}

/// Synthetic regression problem over heterogeneous feature groups with known
/// per-group targets, for decomposition studies and ordering experiments.
/// Inputs are uniform on [-1, 1]; the target is the group-function mean plus
/// Gaussian noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeteroProblem {
    pub widths: Vec<usize>,
    /// Standard deviation of the additive target noise.
    pub noise_sd: f64,
}

impl HeteroProblem {
    pub fn new(widths: Vec<usize>, noise_sd: f64) -> Self {
        Self { widths, noise_sd }
    }

    pub fn group_count(&self) -> usize {
        self.widths.len()
    }

    pub fn total_dim(&self) -> usize {
        self.widths.iter().sum()
    }

    pub fn group_spec(&self) -> FeatureGroupSpec {
        let mut ranges = Vec::with_capacity(self.widths.len());
        let mut lo = 1;
        for &w in &self.widths {
            ranges.push((lo, lo + w - 1));
            lo += w;
        }
        FeatureGroupSpec::from_ranges(&ranges)
    }

    /// The true target of group `m` at its own feature block.
    pub fn group_fn(&self, m: usize, x_group: &[f64]) -> f64 {
        let u = x_group.iter().sum::<f64>() / (x_group.len() as f64).sqrt();
        match m % 3 {
            0 => (std::f64::consts::PI * u).sin(),
            1 => u * u,
            _ => (2.0 * u).tanh(),
        }
    }

    /// Noise-free target: the mean of the group functions.
    pub fn mean_fn(&self, row: &[f64]) -> f64 {
        let mut lo = 0;
        let mut acc = 0.0;
        for (m, &w) in self.widths.iter().enumerate() {
            acc += self.group_fn(m, &row[lo..lo + w]);
            lo += w;
        }
        acc / self.group_count() as f64
    }

    /// Draws `n` samples with fresh noise.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.sample_inner(n, seed, true)
    }

    /// Draws `n` samples with the noise-free target, for holdout evaluation.
    pub fn sample_noiseless(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.sample_inner(n, seed, false)
    }

    fn sample_inner(&self, n: usize, seed: u64, noisy: bool) -> Result<Dataset> {
        if n == 0 {
            return Err(DiagError::Parameter("sample size must be >= 1".into()));
        }
        let d = self.total_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::with_capacity(n * d);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..d).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            let mut target = self.mean_fn(&row);
            if noisy && self.noise_sd > 0.0 {
                target += self.noise_sd * gaussian(&mut rng);
            }
            x.extend_from_slice(&row);
            y.push(target);
        }
        Ok(Dataset::new(
            Matrix::from_raw(n, d, x),
            y,
            (1..=d).map(|i| format!("x{i}")).collect(),
        )?)
    }
}

/// Standard normal draw by Box-Muller from the seeded uniform stream.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = loop {
        let v = rng.random::<f64>();
        if v > 0.0 {
            break v;
        }
    };
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// The assembled generalization-error decomposition over a holdout set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// Mean over holdout points of the average per-model variance.
    pub avg_variance: f64,
    /// Mean over holdout points of the average pairwise covariance.
    pub avg_covariance: f64,
    /// Mean over holdout points of the squared average bias.
    pub avg_bias_sq: f64,
    pub noise_sigma_sq: f64,
    /// `(1/M)·avg_variance + (1 - 1/M)·avg_covariance + avg_bias_sq + σ²`.
    pub weighted_total: f64,
    /// Monte-Carlo estimate of `E{(f̄ - y)²}` over trials and holdout.
    pub direct_generalization_error: f64,
}

/// Trains the ensemble `trials` times on freshly drawn training sets and
/// decomposes the holdout generalization error into variance, covariance,
/// and bias parts. With `resample = false` every trial reuses the same data
/// and seeds, which collapses the variance and covariance terms to zero.
pub fn decompose_generalization(
    problem: &HeteroProblem,
    n_train: usize,
    scn_cfg: &ScnConfig,
    solver_cfg: &SolverConfig,
    trials: usize,
    holdout: &Dataset,
    seed: u64,
    resample: bool,
) -> Result<DecompositionReport> {
    if trials < 2 {
        return Err(DiagError::InsufficientTrials(trials));
    }
    if holdout.dim() != problem.total_dim() {
        return Err(DiagError::Parameter(format!(
            "holdout has {} columns, problem expects {}",
            holdout.dim(),
            problem.total_dim()
        )));
    }
    let spec = problem.group_spec();
    let m_count = problem.group_count();
    let holdout_parts = dataio::partition_features(holdout, &spec)?;

    // Per trial, per model: predictions over the holdout.
    let trial_preds: Vec<Result<Vec<Vec<f64>>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let tseed = if resample {
                seed.wrapping_add(1000 * t as u64)
            } else {
                seed
            };
            let train = problem.sample(n_train, tseed)?;
            let parts = dataio::partition_features(&train, &spec)?;
            let mut models = Vec::with_capacity(m_count);
            for (m, part) in parts.iter().enumerate() {
                let cfg = ScnConfig {
                    seed: tseed.wrapping_mul(31).wrapping_add(m as u64),
                    ..scn_cfg.clone()
                };
                models.push(scn::build_scn(part, &cfg)?.0);
            }
            let inputs: Vec<Matrix> = parts.into_iter().map(|p| p.x).collect();
            let sys = NclSystem::from_models(
                &models,
                &inputs,
                &train.y,
                solver_cfg.lambda,
                solver_cfg.ridge,
            )?;
            let (b, _) = ncl::solve(&sys, solver_cfg)?;
            let mut preds = Vec::with_capacity(m_count);
            let mut lo = 0;
            for (m, model) in models.iter_mut().enumerate() {
                let hi = lo + model.hidden_count();
                model.beta = b[lo..hi].to_vec();
                lo = hi;
                preds.push(scn::predict_base(model, &holdout_parts[m].x)?);
            }
            Ok(preds)
        })
        .collect();
    let mut preds = Vec::with_capacity(trials);
    for p in trial_preds {
        preds.push(p?);
    }

    let n0 = holdout.n();
    let t_f = trials as f64;
    let m_f = m_count as f64;
    let sigma_sq = problem.noise_sd * problem.noise_sd;

    let mut sum_avg_var = 0.0;
    let mut sum_avg_cov = 0.0;
    let mut sum_bias_sq = 0.0;
    let mut sum_weighted = 0.0;
    let mut direct = 0.0;

    for i in 0..n0 {
        let means: Vec<f64> = (0..m_count)
            .map(|m| preds.iter().map(|p| p[m][i]).sum::<f64>() / t_f)
            .collect();
        let mut vars = vec![0.0; m_count];
        let mut cov_sum = 0.0;
        for p in &preds {
            let dev: Vec<f64> = (0..m_count).map(|m| p[m][i] - means[m]).collect();
            for m in 0..m_count {
                vars[m] += dev[m] * dev[m];
            }
            for m in 0..m_count {
                for q in (m + 1)..m_count {
                    cov_sum += dev[m] * dev[q];
                }
            }
        }
        for v in &mut vars {
            *v /= t_f - 1.0;
        }
        cov_sum /= t_f - 1.0;
        let avg_var = vars.iter().sum::<f64>() / m_f;
        let avg_cov = if m_count > 1 {
            2.0 * cov_sum / (m_f * (m_f - 1.0))
        } else {
            0.0
        };

        let g_true = self_group_truth(problem, &holdout_parts, i);
        let avg_bias = (0..m_count).map(|m| means[m] - g_true[m]).sum::<f64>() / m_f;
        let bias_sq = avg_bias * avg_bias;

        sum_avg_var += avg_var;
        sum_avg_cov += avg_cov;
        sum_bias_sq += bias_sq;
        sum_weighted += avg_var / m_f + (1.0 - 1.0 / m_f) * avg_cov + bias_sq;

        let g_mean = g_true.iter().sum::<f64>() / m_f;
        for p in &preds {
            let fbar = (0..m_count).map(|m| p[m][i]).sum::<f64>() / m_f;
            let d = fbar - g_mean;
            direct += d * d;
        }
    }

    let n0f = n0 as f64;
    Ok(DecompositionReport {
        avg_variance: sum_avg_var / n0f,
        avg_covariance: sum_avg_cov / n0f,
        avg_bias_sq: sum_bias_sq / n0f,
        noise_sigma_sq: sigma_sq,
        weighted_total: sum_weighted / n0f + sigma_sq,
        direct_generalization_error: direct / (n0f * t_f) + sigma_sq,
    })
}

fn self_group_truth(problem: &HeteroProblem, parts: &[Dataset], i: usize) -> Vec<f64> {
    (0..problem.group_count())
        .map(|m| problem.group_fn(m, parts[m].x.row(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn hetero_problem_shapes_and_determinism() {
        let p = HeteroProblem::new(vec![2, 3, 2], 0.05);
        assert_eq!(p.total_dim(), 7);
        let spec = p.group_spec();
        assert_eq!(spec.group_count(), 3);
        spec.validate(7).unwrap();
        let a = p.sample(50, 7).unwrap();
        let b = p.sample(50, 7).unwrap();
        assert_eq!(a.x.data(), b.x.data());
        assert_eq!(a.y, b.y);
        let clean = p.sample_noiseless(10, 3).unwrap();
        for i in 0..10 {
            assert_close(clean.y[i], p.mean_fn(clean.x.row(i)), 1e-12);
        }
    }

    #[test]
    fn gaussian_moments_are_sane() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20000;
        let draws: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn correlation_study_singleton_grid() {
        let data = dataio::synth_generate(300, -2.0, 2.0, 11).unwrap();
        let recs = weight_correlation_study(&data, 3, &[8], 0.1, 0.1, 5, 77).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].l_m, 8);
        // Ridge-regularized solvers agree tightly even on a small case.
        assert!(recs[0].a2_a3 >= 0.999, "a2_a3 = {}", recs[0].a2_a3);
    }

    #[test]
    fn correlation_study_single_model_is_exactly_one() {
        let data = dataio::synth_generate(200, -2.0, 2.0, 13).unwrap();
        let recs = weight_correlation_study(&data, 1, &[6], 0.1, 0.0, 5, 3).unwrap();
        assert_close(recs[0].a1_a2, 1.0, 1e-12);
        assert_close(recs[0].a1_a3, 1.0, 1e-12);
        assert_close(recs[0].a2_a3, 1.0, 1e-12);
    }

    #[test]
    fn bench_records_cover_grid_and_methods() {
        let data = dataio::synth_generate(150, -2.0, 2.0, 17).unwrap();
        let recs = bench_construction(
            &data,
            2,
            &[4, 8],
            &[SolveMethod::Analytic, SolveMethod::Jacobi],
            3,
            0.1,
            0.1,
            5,
            5,
        )
        .unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs.iter().all(|r| r.wall_seconds >= 0.0));
        let singleton = bench_construction(
            &data,
            2,
            &[4],
            &[SolveMethod::GaussSeidel],
            1,
            0.1,
            0.1,
            5,
            5,
        )
        .unwrap();
        assert_eq!(singleton.len(), 1);
    }

    #[test]
    fn decomposition_identity_and_errors() {
        let p = HeteroProblem::new(vec![1, 1], 0.1);
        let holdout = p.sample_noiseless(40, 99).unwrap();
        let scn_cfg = ScnConfig {
            l_max: 4,
            t_max: 30,
            ..Default::default()
        };
        let solver = SolverConfig {
            k_max: 3,
            ..Default::default()
        };
        let rep =
            decompose_generalization(&p, 80, &scn_cfg, &solver, 8, &holdout, 1, true).unwrap();
        let m = 2.0;
        let assembled = rep.avg_variance / m
            + (1.0 - 1.0 / m) * rep.avg_covariance
            + rep.avg_bias_sq
            + rep.noise_sigma_sq;
        assert_close(rep.weighted_total, assembled, 1e-10);
        assert!(rep.direct_generalization_error > 0.0);

        assert!(matches!(
            decompose_generalization(&p, 80, &scn_cfg, &solver, 1, &holdout, 1, true),
            Err(DiagError::InsufficientTrials(1))
        ));
    }

    #[test]
    fn decomposition_degenerate_trials_have_zero_spread() {
        let p = HeteroProblem::new(vec![1, 1, 1], 0.05);
        let holdout = p.sample_noiseless(30, 5).unwrap();
        let scn_cfg = ScnConfig {
            l_max: 3,
            t_max: 20,
            ..Default::default()
        };
        let solver = SolverConfig {
            k_max: 2,
            ..Default::default()
        };
        let rep =
            decompose_generalization(&p, 60, &scn_cfg, &solver, 5, &holdout, 9, false).unwrap();
        assert!(rep.avg_variance.abs() < 1e-20);
        assert!(rep.avg_covariance.abs() < 1e-20);
        assert_close(
            rep.weighted_total,
            rep.avg_bias_sq + rep.noise_sigma_sq,
            1e-12,
        );
        // With no spread the direct error is bias² + σ² as well.
        assert_close(rep.weighted_total, rep.direct_generalization_error, 1e-10);
    }

    #[test]
    fn decomposition_single_model_drops_covariance_weight() {
        let p = HeteroProblem::new(vec![2], 0.05);
        let holdout = p.sample_noiseless(25, 2).unwrap();
        let scn_cfg = ScnConfig {
            l_max: 3,
            t_max: 20,
            ..Default::default()
        };
        let solver = SolverConfig {
            k_max: 2,
            ..Default::default()
        };
        let rep =
            decompose_generalization(&p, 50, &scn_cfg, &solver, 4, &holdout, 3, true).unwrap();
        assert_eq!(rep.avg_covariance, 0.0);
        let assembled = rep.avg_variance + rep.avg_bias_sq + rep.noise_sigma_sq;
        assert_close(rep.weighted_total, assembled, 1e-10);
    }

    #[test]
    fn covariance_estimates_are_symmetric() {
        // Build the full covariance matrix explicitly from a handful of
        // per-model prediction vectors and check Cov(m,q) = Cov(q,m).
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let trials = 6;
        let m_count = 3;
        let preds: Vec<Vec<f64>> = (0..trials)
            .map(|_| (0..m_count).map(|_| rng.random::<f64>()).collect())
            .collect();
        let means: Vec<f64> = (0..m_count)
            .map(|m| preds.iter().map(|p| p[m]).sum::<f64>() / trials as f64)
            .collect();
        let cov = |m: usize, q: usize| {
            preds
                .iter()
                .map(|p| (p[m] - means[m]) * (p[q] - means[q]))
                .sum::<f64>()
                / (trials - 1) as f64
        };
        for m in 0..m_count {
            for q in 0..m_count {
                assert_close(cov(m, q), cov(q, m), 1e-15);
            }
        }
    }
}
