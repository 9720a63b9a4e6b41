//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --show-output`).
//!
//! The heavier studies share a lock so their wall-clock measurements are not
//! distorted by concurrently running criteria.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scnlab::dataio::{self, Dataset, SplitSpec};
use scnlab::diagnostics::{self, HeteroProblem};
use scnlab::ncl::{self, NclSystem, SolveMethod, SolverConfig};
use scnlab::numkit::{self, Matrix};
use scnlab::scn::{self, RvflConfig, ScnConfig};
use std::sync::Mutex;

static HEAVY: Mutex<()> = Mutex::new(());

fn heavy_guard() -> std::sync::MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

fn pass(criterion: &str) {
    println!("acceptance {criterion}: PASS");
}

fn random_blocks(rng: &mut ChaCha8Rng, n: usize, widths: &[usize]) -> (Vec<Matrix>, Vec<f64>) {
    let blocks = widths
        .iter()
        .map(|&w| Matrix::from_fn(n, w, |_, _| rng.random::<f64>() * 2.0 - 1.0))
        .collect();
    let y = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    (blocks, y)
}

/// Criterion 1 — with ridge 0.1 the three coupled solvers agree to Pearson
/// >= 0.999 at every grid point of the demonstration study.
#[test]
fn criterion_01_solver_equivalence_ridge() {
    let _g = heavy_guard();
    let data = dataio::synth_generate(4000, -5.0, 5.0, 20).unwrap();
    let grid = [10, 50, 100, 200];
    let recs = diagnostics::weight_correlation_study(&data, 10, &grid, 0.1, 0.1, 5, 7).unwrap();
    assert_eq!(recs.len(), grid.len());
    for r in &recs {
        assert!(
            r.a1_a2 >= 0.999 && r.a1_a3 >= 0.999 && r.a2_a3 >= 0.999,
            "correlations below 0.999 at l_m = {}: a1_a2 {:.6} a1_a3 {:.6} a2_a3 {:.6}",
            r.l_m,
            r.a1_a2,
            r.a1_a3,
            r.a2_a3
        );
    }
    pass("criterion 1 (solver equivalence, ridge 0.1, grid 10/50/100/200)");
}

/// Criterion 2 — without ridge the two iterative schemes still track each
/// other (>= 0.999) even where the pseudo-inverse solution drifts away.
#[test]
fn criterion_02_iterative_consistency_no_ridge() {
    let _g = heavy_guard();
    let data = dataio::synth_generate(4000, -5.0, 5.0, 20).unwrap();
    let grid = [10, 50, 100, 200];
    let recs = diagnostics::weight_correlation_study(&data, 10, &grid, 0.1, 0.0, 5, 7).unwrap();
    for r in &recs {
        assert!(
            r.a2_a3 >= 0.999,
            "jacobi/gauss-seidel correlation {:.6} below 0.999 at l_m = {}",
            r.a2_a3,
            r.l_m
        );
    }
    pass("criterion 2 (jacobi vs gauss-seidel agreement without ridge)");
}

/// Criterion 3 — converged iterative weights satisfy the stacked defining
/// equation to 1e-6 relative on 20 random full-rank instances.
#[test]
fn criterion_03_fixed_point_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for trial in 0..20 {
        let (blocks, y) = random_blocks(&mut rng, 200, &[10, 10, 10, 10]);
        let sys = NclSystem::from_hidden(&blocks, &y, 0.1, 0.1).unwrap();
        let cfg = SolverConfig {
            lambda: 0.1,
            ridge: 0.1,
            k_max: 100,
            tau: 0.0,
            ..Default::default()
        };
        let hh = ncl::assemble_blockmatrix(&sys);
        let rhs = sys.big_h().t_matvec(sys.y()).unwrap();
        let rhs_norm = numkit::l2_norm(&rhs);
        for method in [SolveMethod::Jacobi, SolveMethod::GaussSeidel] {
            let cfg = SolverConfig {
                method,
                ..cfg.clone()
            };
            let (b, _) = ncl::solve(&sys, &cfg).unwrap();
            let lhs = hh.matvec(&b).unwrap();
            let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            let rel = numkit::l2_norm(&diff) / rhs_norm;
            assert!(
                rel <= 1e-6,
                "trial {trial} {method}: residual {rel:.3e} above 1e-6"
            );
        }
    }
    pass("criterion 3 (fixed-point residual <= 1e-6 relative, 20 instances)");
}

/// Criterion 4 — the block gradient matches central finite differences of
/// the cost, and vanishes at the analytic solution.
#[test]
fn criterion_04_gradient_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for trial in 0..10 {
        let (blocks, y) = random_blocks(&mut rng, 10, &[3, 3]);
        let sys = NclSystem::from_hidden(&blocks, &y, 0.3, 0.0).unwrap();
        let b: Vec<f64> = (0..sys.l_total())
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        let step = 1e-5;
        for m in 0..sys.model_count() {
            let grad = ncl::ncl_gradient(&sys, m, &b).unwrap();
            let (lo, hi) = sys.block_range(m);
            for k in 0..(hi - lo) {
                let mut bp = b.clone();
                let mut bm = b.clone();
                bp[lo + k] += step;
                bm[lo + k] -= step;
                let fd = (ncl::ncl_cost(&sys, m, &bp).unwrap()
                    - ncl::ncl_cost(&sys, m, &bm).unwrap())
                    / (2.0 * step);
                let rel = (grad[k] - fd).abs() / grad[k].abs().max(1.0);
                assert!(
                    rel < 1e-6,
                    "trial {trial} m={m} k={k}: fd mismatch {rel:.3e}"
                );
            }
        }
    }
    // First-order optimality at the analytic solution.
    let (blocks, y) = random_blocks(&mut rng, 40, &[5, 5, 5]);
    let sys = NclSystem::from_hidden(&blocks, &y, 0.2, 0.0).unwrap();
    let (b, _) = ncl::solve_analytic(&sys).unwrap();
    for m in 0..sys.model_count() {
        let (lo, hi) = sys.block_range(m);
        let rhs_norm = numkit::l2_norm(&sys.big_h().t_matvec_cols(lo, hi, sys.y()));
        let g = numkit::l2_norm(&ncl::ncl_gradient(&sys, m, &b).unwrap());
        assert!(g <= 1e-8 * rhs_norm, "block {m}: gradient {g:.3e} vs bound");
    }
    pass("criterion 4 (gradient vs finite differences and optimality)");
}

/// Criterion 5 — with λ drawn below the coupling bound, the measured Jacobi
/// iteration radius stays below one on 50 random full-rank instances.
#[test]
fn criterion_05_convergence_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for trial in 0..50 {
        let w1 = 3 + (trial % 3);
        let w2 = 3 + (trial % 4);
        let w3 = 2 + (trial % 2);
        let (blocks, y) = random_blocks(&mut rng, 60, &[w1, w2, w3]);
        let probe = NclSystem::from_hidden(&blocks, &y, 0.1, 0.0).unwrap();
        let bound = ncl::convergence_check(&probe).unwrap().lambda_bound;
        let lambda = 0.999 * bound.min(1.0) * rng.random::<f64>();
        let sys = NclSystem::from_hidden(&blocks, &y, lambda, 0.0).unwrap();
        let rep = ncl::convergence_check(&sys).unwrap();
        assert!(
            rep.rho_jacobi < 1.0,
            "trial {trial}: lambda {lambda:.4} below bound {bound:.4} but rho {:.4}",
            rep.rho_jacobi
        );
    }
    pass("criterion 5 (jacobi spectral radius < 1 under the lambda bound, 50 instances)");
}

/// Criterion 6 — every accepted node passes the supervisory inequality and
/// the post-refit residual strictly decreases, over 100 seeded builds.
#[test]
fn criterion_06_supervisory_property() {
    for seed in 0..100u64 {
        let data = dataio::synth_generate(80, -3.0, 3.0, 9000 + seed).unwrap();
        let cfg = ScnConfig {
            l_max: 8,
            t_max: 50,
            seed,
            ..Default::default()
        };
        let (_, trace) = scn::build_scn(&data, &cfg).unwrap();
        assert!(!trace.min_xi.is_empty());
        assert!(
            trace.min_xi.iter().all(|&xi| xi > 0.0),
            "seed {seed}: accepted node with non-positive score"
        );
        for w in trace.residual_rmse.windows(2) {
            assert!(
                w[1] < w[0],
                "seed {seed}: residual trace not strictly decreasing {w:?}"
            );
        }
    }
    pass("criterion 6 (supervisory acceptance and strict residual decrease, 100 builds)");
}

/// Criterion 7 — the analytic/iterative time ratio grows with the stacked
/// width: the ratio at L_total = 5000 must exceed the ratio at L_total = 100.
/// Absolute seconds and memory peaks are machine-specific and not asserted.
#[test]
fn criterion_07_timing_shape() {
    let _g = heavy_guard();
    let data = dataio::synth_generate(4000, -5.0, 5.0, 20).unwrap();
    let grid = [10, 100, 500];
    let recs = diagnostics::bench_construction(
        &data,
        10,
        &grid,
        &[SolveMethod::Analytic, SolveMethod::Jacobi],
        1,
        0.1,
        0.1,
        5,
        7,
    )
    .unwrap();
    let time_of = |l: usize, m: SolveMethod| {
        recs.iter()
            .find(|r| r.l_total == l && r.method == m)
            .map(|r| r.wall_seconds)
            .unwrap_or_else(|| panic!("missing record for l_total {l} {m}"))
    };
    let small = time_of(100, SolveMethod::Analytic) / time_of(100, SolveMethod::Jacobi);
    let large = time_of(5000, SolveMethod::Analytic) / time_of(5000, SolveMethod::Jacobi);
    assert!(
        large > small,
        "analytic/jacobi ratio did not grow: {small:.3} at 100 vs {large:.3} at 5000"
    );
    // Analytic medians should climb with the stacked width; one inversion is
    // tolerated as measurement noise.
    let analytic: Vec<f64> = grid
        .iter()
        .map(|&l| time_of(l * 10, SolveMethod::Analytic))
        .collect();
    let violations = analytic.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(
        violations <= 1,
        "analytic timings not monotone: {analytic:?}"
    );
    pass(&format!(
        "criterion 7 (timing shape: analytic/jacobi ratio {small:.3} at L=100, {large:.3} at L=5000)"
    ));
}

/// Criterion 8 — the variance/covariance/bias assembly matches the direct
/// Monte-Carlo generalization error within 5% over 200 trials.
#[test]
fn criterion_08_decomposition_self_consistency() {
    let _g = heavy_guard();
    let problem = HeteroProblem::new(vec![2, 2, 2], 0.1); // sigma^2 = 0.01
    let holdout = problem.sample_noiseless(300, 808).unwrap();
    let scn_cfg = ScnConfig {
        l_max: 10,
        t_max: 40,
        ..Default::default()
    };
    let solver = SolverConfig {
        lambda: 0.1,
        ridge: 0.1,
        k_max: 5,
        ..Default::default()
    };
    let rep = diagnostics::decompose_generalization(
        &problem, 300, &scn_cfg, &solver, 200, &holdout, 11, true,
    )
    .unwrap();
    let rel = (rep.weighted_total - rep.direct_generalization_error).abs()
        / rep.direct_generalization_error;
    assert!(
        rel <= 0.05,
        "decomposition off by {rel:.4}: assembled {:.6e} vs direct {:.6e}",
        rep.weighted_total,
        rep.direct_generalization_error
    );
    pass(&format!(
        "criterion 8 (decomposition self-consistency, relative gap {rel:.4})"
    ));
}

/// Criterion 9 — λ = 0 and M = 1 return the independent fits bit-for-bit
/// from all four methods, with and without ridge.
#[test]
fn criterion_09_degenerate_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for (widths, lambda) in [(vec![4usize, 3, 5], 0.0), (vec![6usize], 0.3)] {
        for ridge in [0.0, 0.1] {
            let (blocks, y) = random_blocks(&mut rng, 30, &widths);
            let sys = NclSystem::from_hidden(&blocks, &y, lambda, ridge).unwrap();
            let (b0, _) = ncl::init_blocks(&sys).unwrap();
            let cfg = SolverConfig {
                lambda,
                ridge,
                k_max: 4,
                tau: 0.0,
                ..Default::default()
            };
            for method in SolveMethod::ALL {
                let cfg = SolverConfig {
                    method,
                    ..cfg.clone()
                };
                let (b, _) = ncl::solve(&sys, &cfg).unwrap();
                assert_eq!(
                    b, b0,
                    "method {method} deviated (lambda {lambda}, ridge {ridge})"
                );
            }
        }
    }
    pass("criterion 9 (degenerate cases bit-for-bit equal to independent fits)");
}

mod dataset_direction {
    use super::*;

    pub struct TrialOutcome {
        pub naive_test: f64,
        pub coupled_test: f64,
        pub rvfl_coupled_test: f64,
    }

    pub fn grouped_problem() -> HeteroProblem {
        HeteroProblem::new(vec![7; 11], 0.05)
    }

    /// Splits, normalizes on train+val, and returns the combined set, the
    /// test set, and the group partitions of both.
    pub fn prepare(data: &Dataset, seed: u64) -> (Dataset, Dataset, Vec<Dataset>, Vec<Dataset>) {
        let spec = grouped_problem().group_spec();
        let split_spec = SplitSpec::new(0.70, 0.15, 0.15, seed);
        let (train, val, test) = dataio::split(data, &split_spec).unwrap();
        let combined = train.concat(&val).unwrap();
        let (combined_n, others, _) = dataio::minmax_fit_apply(&combined, &[&test]);
        let test_n = others.into_iter().next().unwrap();
        let parts = dataio::partition_features(&combined_n, &spec).unwrap();
        let test_parts = dataio::partition_features(&test_n, &spec).unwrap();
        (combined_n, test_n, parts, test_parts)
    }

    fn ensemble_test_rmse(
        b: &[f64],
        models: &mut [scnlab::scn::ScnModel],
        test_parts: &[Dataset],
    ) -> f64 {
        let mut lo = 0;
        let mut sum = vec![0.0; test_parts[0].n()];
        for (m, model) in models.iter_mut().enumerate() {
            let hi = lo + model.hidden_count();
            model.beta = b[lo..hi].to_vec();
            lo = hi;
            let p = scn::predict_base(model, &test_parts[m].x).unwrap();
            for (s, v) in sum.iter_mut().zip(&p) {
                *s += v;
            }
        }
        let m_f = models.len() as f64;
        for s in &mut sum {
            *s /= m_f;
        }
        numkit::rmse(&sum, &test_parts[0].y).unwrap()
    }

    pub fn run_trial(data: &Dataset, seed: u64, lambda: f64) -> TrialOutcome {
        let (combined, _test, parts, test_parts) = prepare(data, seed);
        let nodes = 25;
        let mut scn_models = Vec::new();
        for (m, part) in parts.iter().enumerate() {
            let cfg = ScnConfig {
                l_max: nodes,
                t_max: 50,
                seed: seed * 1000 + m as u64,
                ..Default::default()
            };
            scn_models.push(scn::build_scn(part, &cfg).unwrap().0);
        }
        let inputs: Vec<Matrix> = parts.iter().map(|p| p.x.clone()).collect();
        let sys = NclSystem::from_models(&scn_models, &inputs, &combined.y, lambda, 0.1).unwrap();
        let cfg = SolverConfig {
            lambda,
            ridge: 0.1,
            k_max: 10,
            ..Default::default()
        };
        let (b_naive, _) = ncl::solve_naive(&sys).unwrap();
        let (b_gs, _) = ncl::solve_gauss_seidel(&sys, &cfg).unwrap();
        let naive_test = ensemble_test_rmse(&b_naive, &mut scn_models.clone(), &test_parts);
        let coupled_test = ensemble_test_rmse(&b_gs, &mut scn_models.clone(), &test_parts);

        // Matched-architecture RVFL ensemble solved the same way.
        let mut rvfl_models = Vec::new();
        for (m, part) in parts.iter().enumerate() {
            let cfg = RvflConfig {
                l: nodes,
                alpha: 1.0,
                seed: seed * 1000 + m as u64,
                activation: scnlab::scn::Activation::Sigmoid,
            };
            rvfl_models.push(scn::build_rvfl(part, &cfg).unwrap());
        }
        let sys_rvfl =
            NclSystem::from_models(&rvfl_models, &inputs, &combined.y, lambda, 0.1).unwrap();
        let (b_rvfl, _) = ncl::solve_gauss_seidel(&sys_rvfl, &cfg).unwrap();
        let rvfl_coupled_test = ensemble_test_rmse(&b_rvfl, &mut rvfl_models, &test_parts);

        TrialOutcome {
            naive_test,
            coupled_test,
            rvfl_coupled_test,
        }
    }
}

/// Criterion 10 — on a 10,000-row down-sampled stand-in with the 11-group
/// width-7 partition, the coupled ensemble beats naive averaging in at least
/// 8 of 10 seeded trials and the matched RVFL ensemble in at least 7 of 10.
#[test]
fn criterion_10_dataset_scale_direction() {
    let _g = heavy_guard();
    let data = dataset_direction::grouped_problem()
        .sample(10_000, 4242)
        .unwrap();
    let mut beats_naive = 0;
    let mut beats_rvfl = 0;
    for seed in 0..10 {
        let out = dataset_direction::run_trial(&data, seed, 0.10);
        if out.coupled_test <= out.naive_test {
            beats_naive += 1;
        }
        if out.coupled_test <= out.rvfl_coupled_test {
            beats_rvfl += 1;
        }
    }
    assert!(
        beats_naive >= 8,
        "coupled beat naive in only {beats_naive}/10 trials"
    );
    assert!(
        beats_rvfl >= 7,
        "coupled beat matched rvfl in only {beats_rvfl}/10 trials"
    );
    pass(&format!(
        "criterion 10 (ordering: beat naive {beats_naive}/10, beat rvfl {beats_rvfl}/10)"
    ));
}

/// Criterion 11 — the λ sweep over 0.08..0.12 moves the median test RMSE by
/// at most 5% relative.
#[test]
fn criterion_11_lambda_robustness() {
    let _g = heavy_guard();
    let data = dataset_direction::grouped_problem()
        .sample(10_000, 4242)
        .unwrap();
    let lambdas = [0.08, 0.09, 0.10, 0.11, 0.12];
    let mut medians = Vec::new();
    // Base models are shared across λ within a repeat; only the solve varies.
    let mut per_lambda = vec![Vec::new(); lambdas.len()];
    for seed in 0..10u64 {
        let (combined, _test, parts, test_parts) = dataset_direction::prepare(&data, seed);
        let mut models = Vec::new();
        for (m, part) in parts.iter().enumerate() {
            let cfg = ScnConfig {
                l_max: 25,
                t_max: 50,
                seed: seed * 500 + m as u64,
                ..Default::default()
            };
            models.push(scn::build_scn(part, &cfg).unwrap().0);
        }
        let inputs: Vec<Matrix> = parts.iter().map(|p| p.x.clone()).collect();
        let blocks: Vec<Matrix> = models
            .iter()
            .zip(&inputs)
            .map(|(m, x)| scn::hidden_matrix(m, x).unwrap())
            .collect();
        for (li, &lambda) in lambdas.iter().enumerate() {
            let sys = NclSystem::from_hidden(&blocks, &combined.y, lambda, 0.1).unwrap();
            let cfg = SolverConfig {
                lambda,
                ridge: 0.1,
                k_max: 10,
                ..Default::default()
            };
            let (b, _) = ncl::solve_gauss_seidel(&sys, &cfg).unwrap();
            let mut lo = 0;
            let mut sum = vec![0.0; test_parts[0].n()];
            for (m, model) in models.iter().enumerate() {
                let hi = lo + model.hidden_count();
                let mut mm = model.clone();
                mm.beta = b[lo..hi].to_vec();
                lo = hi;
                let p = scn::predict_base(&mm, &test_parts[m].x).unwrap();
                for (s, v) in sum.iter_mut().zip(&p) {
                    *s += v;
                }
            }
            for s in &mut sum {
                *s /= models.len() as f64;
            }
            per_lambda[li].push(numkit::rmse(&sum, &test_parts[0].y).unwrap());
        }
    }
    for runs in &mut per_lambda {
        runs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = runs.len();
        let median = if n % 2 == 1 {
            runs[n / 2]
        } else {
            0.5 * (runs[n / 2 - 1] + runs[n / 2])
        };
        medians.push(median);
    }
    let max = medians.iter().cloned().fold(f64::MIN, f64::max);
    let min = medians.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / min;
    assert!(
        spread <= 0.05,
        "median spread {spread:.4} above 5%: {medians:?}"
    );
    pass(&format!(
        "criterion 11 (lambda robustness, median spread {spread:.4})"
    ));
}
