//! Negative-correlation coupling of the base models.
//!
//! With the hidden layers frozen, each model's cost couples its residual to
//! the ensemble mean through a λ-weighted penalty. The stationarity
//! conditions stack into one block linear system over the concatenated
//! output weights, solved here four ways: naive (independent fits), analytic
//! (pseudo-inverse or ridge inverse of the full block matrix), block Jacobi,
//! and block Gauss-Seidel. The iterative methods never materialize the block
//! matrix; they work from the per-model hidden blocks alone.

use crate::dataio::FeatureGroupSpec;
use crate::numkit::{self, CholFactor, Matrix, NumError};
use crate::scn::{self, ScnError, ScnModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NclError {
    #[error("numerical failure: {0}")]
    Num(#[from] NumError),
    #[error("base model failure: {0}")]
    Scn(#[from] ScnError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("diagonal block {0} is rank deficient and no ridge is set")]
    RankDeficientBlock(usize),
}

pub type Result<T> = std::result::Result<T, NclError>;

/// Output-weight evaluation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Naive,
    Analytic,
    Jacobi,
    GaussSeidel,
}

impl SolveMethod {
    pub const ALL: [SolveMethod; 4] = [
        SolveMethod::Naive,
        SolveMethod::Analytic,
        SolveMethod::Jacobi,
        SolveMethod::GaussSeidel,
    ];

    /// Report label, matching the customary table row names.
    pub fn label(self) -> &'static str {
        match self {
            SolveMethod::Naive => "Naive",
            SolveMethod::Analytic => "Pseudo-inverse",
            SolveMethod::Jacobi => "Block Jacobi",
            SolveMethod::GaussSeidel => "Block Gauss-Seidel",
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            SolveMethod::Naive => "naive",
            SolveMethod::Analytic => "analytic",
            SolveMethod::Jacobi => "jacobi",
            SolveMethod::GaussSeidel => "gauss_seidel",
        }
    }
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for SolveMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "naive" => Ok(SolveMethod::Naive),
            "analytic" | "pseudo_inverse" | "pinv" => Ok(SolveMethod::Analytic),
            "jacobi" => Ok(SolveMethod::Jacobi),
            "gauss_seidel" | "gs" => Ok(SolveMethod::GaussSeidel),
            other => Err(format!(
                "unknown method {other:?} (naive|analytic|jacobi|gauss_seidel)"
            )),
        }
    }
}

/// Solver settings. `lambda` and `ridge` describe the system to build;
/// `k_max` and `tau` drive the iterative termination rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: SolveMethod,
    pub lambda: f64,
    pub ridge: f64,
    pub k_max: usize,
    /// Ensemble-training-error tolerance for early termination.
    pub tau: f64,
    /// Keep a copy of the weight vector after every sweep.
    pub record_trajectory: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolveMethod::GaussSeidel,
            lambda: 0.10,
            ridge: 0.1,
            k_max: 10,
            tau: 1e-6,
            record_trajectory: false,
        }
    }
}

/// Outcome of one solve: iteration trace, timing, and termination status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub iterations_used: usize,
    /// Ensemble training RMSE; entry 0 is the initial state for iterative
    /// methods, followed by one entry per sweep.
    pub e_ens: Vec<f64>,
    pub wall_seconds: f64,
    /// True when the error tolerance was reached (direct solves always
    /// converge).
    pub converged: bool,
    /// True when the divergence guard halted the iteration.
    pub diverged: bool,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_trajectory: Option<Vec<Vec<f64>>>,
}

/// Penalty coefficients of the stacked system.
pub fn coefficients(m_count: usize, lambda: f64) -> Result<(f64, f64)> {
    if m_count == 0 {
        return Err(NclError::Parameter(
            "ensemble needs at least one model".into(),
        ));
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(NclError::Parameter(format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    let m = m_count as f64;
    let c1 = 1.0 - lambda * (m - 1.0) * (m - 1.0) / (m * m);
    let c2 = lambda * (m - 1.0) / (m * m);
    if !(c1 > 0.0) {
        return Err(NclError::Parameter(format!("c1 = {c1} must be positive")));
    }
    Ok((c1, c2))
}

/// The assembled block system: concatenated hidden blocks, target, and the
/// penalty/ridge coefficients.
#[derive(Debug, Clone)]
pub struct NclSystem {
    big_h: Matrix,
    /// Column offsets of the M blocks inside `big_h` (length M + 1).
    offsets: Vec<usize>,
    y: Vec<f64>,
    pub lambda: f64,
    pub ridge: f64,
    pub c1: f64,
    pub c2: f64,
}

impl NclSystem {
    /// Builds the system directly from per-model hidden matrices.
    pub fn from_hidden(blocks: &[Matrix], y: &[f64], lambda: f64, ridge: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(NclError::Parameter(
                "ensemble needs at least one model".into(),
            ));
        }
        if !(ridge >= 0.0) || !ridge.is_finite() {
            return Err(NclError::Parameter(format!(
                "ridge must be >= 0, got {ridge}"
            )));
        }
        let n = y.len();
        if blocks.iter().any(|b| b.rows() != n) {
            return Err(NclError::Shape(
                "hidden blocks and target disagree on row count".into(),
            ));
        }
        let (c1, c2) = coefficients(blocks.len(), lambda)?;
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for b in blocks {
            offsets.push(offsets.last().unwrap() + b.cols());
        }
        let refs: Vec<&Matrix> = blocks.iter().collect();
        let big_h = Matrix::hstack(&refs)?;
        Ok(NclSystem {
            big_h,
            offsets,
            y: y.to_vec(),
            lambda,
            ridge,
            c1,
            c2,
        })
    }

    /// Evaluates each model's hidden layer on its own input block and stacks
    /// the system. `inputs[m]` must match model `m`'s input width.
    pub fn from_models(
        models: &[ScnModel],
        inputs: &[Matrix],
        y: &[f64],
        lambda: f64,
        ridge: f64,
    ) -> Result<Self> {
        if models.len() != inputs.len() {
            return Err(NclError::Shape(format!(
                "{} models but {} input blocks",
                models.len(),
                inputs.len()
            )));
        }
        let blocks = models
            .iter()
            .zip(inputs)
            .map(|(m, x)| scn::hidden_matrix(m, x))
            .collect::<scn::Result<Vec<_>>>()?;
        Self::from_hidden(&blocks, y, lambda, ridge)
    }

    pub fn model_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn l_total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn big_h(&self) -> &Matrix {
        &self.big_h
    }

    pub fn block_range(&self, m: usize) -> (usize, usize) {
        (self.offsets[m], self.offsets[m + 1])
    }

    pub fn block_width(&self, m: usize) -> usize {
        self.offsets[m + 1] - self.offsets[m]
    }

    fn block_gram(&self, m: usize, q: usize) -> Matrix {
        self.big_h
            .gram_cols(self.block_range(m), self.block_range(q))
    }

    fn check_b(&self, b: &[f64]) -> Result<()> {
        if b.len() != self.l_total() {
            return Err(NclError::Shape(format!(
                "weight vector has length {}, expected {}",
                b.len(),
                self.l_total()
            )));
        }
        Ok(())
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m >= self.model_count() {
            return Err(NclError::Parameter(format!(
                "model index {m} out of range 0..{}",
                self.model_count()
            )));
        }
        Ok(())
    }

    /// Ensemble training RMSE of the mean prediction under weights `b`.
    pub fn e_ens(&self, b: &[f64]) -> Result<f64> {
        self.check_b(b)?;
        let mut s = self.big_h.matvec(b)?;
        let inv_m = 1.0 / self.model_count() as f64;
        for v in &mut s {
            *v *= inv_m;
        }
        Ok(numkit::rmse(&s, &self.y)?)
    }
}

/// The per-model cost: squared residual minus the λ-weighted deviation of
/// this model from the ensemble mean, halved.
pub fn ncl_cost(system: &NclSystem, m: usize, b: &[f64]) -> Result<f64> {
    system.check_m(m)?;
    system.check_b(b)?;
    let (lo, hi) = system.block_range(m);
    let p = system.big_h.matvec_cols(lo, hi, &b[lo..hi]);
    let fbar = {
        let mut s = system.big_h.matvec(b)?;
        let inv_m = 1.0 / system.model_count() as f64;
        for v in &mut s {
            *v *= inv_m;
        }
        s
    };
    let mut fit = 0.0;
    let mut penalty = 0.0;
    for i in 0..system.n() {
        let r = p[i] - system.y[i];
        fit += r * r;
        let d = p[i] - fbar[i];
        penalty += d * d;
    }
    Ok(0.5 * (fit - system.lambda * penalty))
}

/// Gradient of [`ncl_cost`] with respect to block `m`'s weights:
/// `c1·HₘᵀHₘβₘ + c2·HₘᵀH̃ₘB − Hₘᵀy`.
pub fn ncl_gradient(system: &NclSystem, m: usize, b: &[f64]) -> Result<Vec<f64>> {
    system.check_m(m)?;
    system.check_b(b)?;
    let (lo, hi) = system.block_range(m);
    let p = system.big_h.matvec_cols(lo, hi, &b[lo..hi]);
    let s = system.big_h.matvec(b)?;
    let mut v = vec![0.0; system.n()];
    for i in 0..system.n() {
        // s - p is the summed prediction of the other blocks.
        v[i] = system.c1 * p[i] + system.c2 * (s[i] - p[i]) - system.y[i];
    }
    Ok(system.big_h.t_matvec_cols(lo, hi, &v))
}

/// Materializes the full block matrix: diagonal blocks `c1·HₘᵀHₘ + c1·r·I`,
/// off-diagonal blocks `c2·HₘᵀH_q`.
pub fn assemble_blockmatrix(system: &NclSystem) -> Matrix {
    let l = system.l_total();
    let m_count = system.model_count();
    let pairs: Vec<(usize, usize)> = (0..m_count)
        .flat_map(|m| (m..m_count).map(move |q| (m, q)))
        .collect();
    let grams: Vec<(usize, usize, Matrix)> = pairs
        .par_iter()
        .map(|&(m, q)| (m, q, system.block_gram(m, q)))
        .collect();
    let mut out = Matrix::zeros(l, l);
    for (m, q, g) in grams {
        let (mlo, _) = system.block_range(m);
        let (qlo, _) = system.block_range(q);
        if m == q {
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    let mut v = system.c1 * g.get(i, j);
                    if i == j {
                        v += system.c1 * system.ridge;
                    }
                    out.set(mlo + i, qlo + j, v);
                }
            }
        } else {
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    let v = system.c2 * g.get(i, j);
                    out.set(mlo + i, qlo + j, v);
                    out.set(qlo + j, mlo + i, v);
                }
            }
        }
    }
    out
}

/// Block-structured splitting of the assembled matrix: block diagonal `D`,
/// remainder `R`, block lower (including the diagonal) `L`, strictly upper
/// `U`. `D + R` and `L + U` both equal the assembled matrix entrywise.
pub fn splitting_matrices(system: &NclSystem) -> (Matrix, Matrix, Matrix, Matrix) {
    let hh = assemble_blockmatrix(system);
    let l_total = system.l_total();
    let mut d = Matrix::zeros(l_total, l_total);
    let mut lower = Matrix::zeros(l_total, l_total);
    for m in 0..system.model_count() {
        let (lo, hi) = system.block_range(m);
        for i in lo..hi {
            for j in lo..hi {
                d.set(i, j, hh.get(i, j));
            }
            for j in 0..hi {
                lower.set(i, j, hh.get(i, j));
            }
        }
    }
    let r = hh.sub(&d).expect("same shape");
    let u = hh.sub(&lower).expect("same shape");
    (d, r, lower, u)
}

/// Per-block solver for `(HₘᵀHₘ [+ rI]) x = rhs`, shared by the initial fits
/// and the iterative updates.
enum BlockSolver {
    Chol(CholFactor),
    /// Spectral pseudo-inverse for rank-deficient unridged blocks.
    Pinv {
        vectors: Matrix,
        values: Vec<f64>,
        cutoff: f64,
    },
}

impl BlockSolver {
    fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            BlockSolver::Chol(f) => f.solve(rhs),
            BlockSolver::Pinv {
                vectors,
                values,
                cutoff,
            } => {
                let mut x = vec![0.0; rhs.len()];
                for (i, &lam) in values.iter().enumerate() {
                    if lam.abs().sqrt() > *cutoff {
                        let row = vectors.row(i);
                        let coef = numkit::dot(row, rhs) / lam;
                        numkit::axpy(&mut x, coef, row);
                    }
                }
                x
            }
        }
    }
}

fn build_block_solvers(system: &NclSystem) -> Result<(Vec<BlockSolver>, Vec<String>)> {
    let results: Vec<Result<(BlockSolver, Option<String>)>> = (0..system.model_count())
        .into_par_iter()
        .map(|m| {
            let mut g = system.block_gram(m, m);
            if system.ridge > 0.0 {
                g.add_diag(system.ridge);
            }
            match CholFactor::new(&g) {
                Ok(f) => Ok((BlockSolver::Chol(f), None)),
                Err(_) => {
                    let n = system.n().max(g.rows());
                    let eig = numkit::eigh(&g)?;
                    let sigma_max = eig
                        .values
                        .iter()
                        .fold(0.0_f64, |a, v| a.max(v.abs()))
                        .sqrt();
                    let cutoff = n as f64 * f64::EPSILON * sigma_max;
                    let rank = eig
                        .values
                        .iter()
                        .filter(|v| v.abs().sqrt() > cutoff)
                        .count();
                    let note = format!(
                        "block {m}: rank {rank} of {}, pseudo-inverse fit is not unique",
                        g.rows()
                    );
                    Ok((
                        BlockSolver::Pinv {
                            vectors: eig.vectors,
                            values: eig.values,
                            cutoff,
                        },
                        Some(note),
                    ))
                }
            }
        })
        .collect();
    let mut solvers = Vec::with_capacity(system.model_count());
    let mut notes = Vec::new();
    for r in results {
        let (s, note) = r?;
        solvers.push(s);
        notes.extend(note);
    }
    Ok((solvers, notes))
}

fn init_from_solvers(system: &NclSystem, solvers: &[BlockSolver]) -> Vec<f64> {
    let mut b = vec![0.0; system.l_total()];
    let segments: Vec<Vec<f64>> = solvers
        .par_iter()
        .enumerate()
        .map(|(m, s)| {
            let (lo, hi) = system.block_range(m);
            s.apply(&system.big_h.t_matvec_cols(lo, hi, &system.y))
        })
        .collect();
    for (m, seg) in segments.into_iter().enumerate() {
        let (lo, hi) = system.block_range(m);
        b[lo..hi].copy_from_slice(&seg);
    }
    b
}

/// Independent per-block fits: the iterative starting point, and the weights
/// the naive ensemble keeps.
pub fn init_blocks(system: &NclSystem) -> Result<(Vec<f64>, Vec<String>)> {
    let (solvers, notes) = build_block_solvers(system)?;
    Ok((init_from_solvers(system, &solvers), notes))
}

/// Naive ensemble weights: each block fitted on its own, uniform averaging.
pub fn solve_naive(system: &NclSystem) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let (b, notes) = init_blocks(system)?;
    let e = system.e_ens(&b)?;
    Ok((
        b,
        SolveReport {
            method: SolveMethod::Naive,
            iterations_used: 0,
            e_ens: vec![e],
            wall_seconds: start.elapsed().as_secs_f64(),
            converged: true,
            diverged: false,
            notes,
            b_trajectory: None,
        },
    ))
}

/// Direct solve of the stacked system: ridge inverse when `r > 0`,
/// pseudo-inverse otherwise. With no coupling (`c2 = 0`) the system is block
/// diagonal and the independent fits are returned unchanged.
pub fn solve_analytic(system: &NclSystem) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let mut notes = Vec::new();
    let b = if system.c2 == 0.0 {
        let (b0, init_notes) = init_blocks(system)?;
        notes = init_notes;
        b0
    } else {
        let hh = assemble_blockmatrix(system);
        let rhs = system.big_h.t_matvec(&system.y)?;
        if system.ridge > 0.0 {
            match CholFactor::new(&hh) {
                Ok(f) => f.solve(&rhs),
                Err(_) => {
                    notes.push("ridge system resisted factorization; spectral solve".into());
                    numkit::sym_pinv_solve(&hh, &rhs, 0.0, system.n().max(system.l_total()))?.0
                }
            }
        } else {
            let (b, rank) =
                numkit::sym_pinv_solve(&hh, &rhs, 0.0, system.n().max(system.l_total()))?;
            if rank < system.l_total() {
                notes.push(format!(
                    "block matrix rank {rank} of {}, minimum-norm solution",
                    system.l_total()
                ));
            }
            b
        }
    };
    let e = system.e_ens(&b)?;
    Ok((
        b,
        SolveReport {
            method: SolveMethod::Analytic,
            iterations_used: 0,
            e_ens: vec![e],
            wall_seconds: start.elapsed().as_secs_f64(),
            converged: true,
            diverged: false,
            notes,
            b_trajectory: None,
        },
    ))
}

/// Shared sweep driver for the two block-iterative schemes.
fn solve_iterative(
    system: &NclSystem,
    config: &SolverConfig,
    method: SolveMethod,
) -> Result<(Vec<f64>, SolveReport)> {
    if config.k_max == 0 {
        return Err(NclError::Parameter("k_max must be >= 1".into()));
    }
    let start = Instant::now();
    let (solvers, mut notes) = build_block_solvers(system)?;
    let mut b = init_from_solvers(system, &solvers);
    let m_count = system.model_count();
    let inv_c1 = 1.0 / system.c1;
    let c2 = system.c2;

    let e0 = system.e_ens(&b)?;
    let mut e_ens = vec![e0];
    let mut trajectory = config.record_trajectory.then(|| vec![b.clone()]);
    let mut converged = e0 < config.tau;
    let mut diverged = false;
    let mut iterations = 0;

    while iterations < config.k_max && !converged && !diverged {
        match method {
            SolveMethod::Jacobi => {
                // Every block reads the previous iterate; updates commute.
                let s = system.big_h.matvec(&b)?;
                let segments: Vec<Vec<f64>> = (0..m_count)
                    .into_par_iter()
                    .map(|m| {
                        let (lo, hi) = system.block_range(m);
                        let p = system.big_h.matvec_cols(lo, hi, &b[lo..hi]);
                        let mut rhs = vec![0.0; system.n()];
                        for i in 0..system.n() {
                            rhs[i] = system.y[i] - c2 * (s[i] - p[i]);
                        }
                        let w = system.big_h.t_matvec_cols(lo, hi, &rhs);
                        let mut seg = solvers[m].apply(&w);
                        for v in &mut seg {
                            *v *= inv_c1;
                        }
                        seg
                    })
                    .collect();
                for (m, seg) in segments.into_iter().enumerate() {
                    let (lo, hi) = system.block_range(m);
                    b[lo..hi].copy_from_slice(&seg);
                }
            }
            SolveMethod::GaussSeidel => {
                // Blocks before m read the current sweep, blocks after read
                // the previous one; the running prediction tracks that state.
                let mut s = system.big_h.matvec(&b)?;
                for m in 0..m_count {
                    let (lo, hi) = system.block_range(m);
                    let p = system.big_h.matvec_cols(lo, hi, &b[lo..hi]);
                    let mut rhs = vec![0.0; system.n()];
                    for i in 0..system.n() {
                        rhs[i] = system.y[i] - c2 * (s[i] - p[i]);
                    }
                    let w = system.big_h.t_matvec_cols(lo, hi, &rhs);
                    let mut seg = solvers[m].apply(&w);
                    for v in &mut seg {
                        *v *= inv_c1;
                    }
                    let delta: Vec<f64> = seg
                        .iter()
                        .zip(&b[lo..hi])
                        .map(|(new, old)| new - old)
                        .collect();
                    let dp = system.big_h.matvec_cols(lo, hi, &delta);
                    for i in 0..system.n() {
                        s[i] += dp[i];
                    }
                    b[lo..hi].copy_from_slice(&seg);
                }
            }
            _ => unreachable!("solve_iterative only handles the iterative methods"),
        }
        iterations += 1;
        let e = system.e_ens(&b)?;
        e_ens.push(e);
        if let Some(t) = trajectory.as_mut() {
            t.push(b.clone());
        }
        if e < config.tau {
            converged = true;
        } else if e > 10.0 * e0 && e0 > 0.0 {
            diverged = true;
            notes.push(format!(
                "divergence guard: ensemble error {e:.3e} exceeded 10x initial {e0:.3e} at sweep {iterations}"
            ));
        }
    }

    Ok((
        b,
        SolveReport {
            method,
            iterations_used: iterations,
            e_ens,
            wall_seconds: start.elapsed().as_secs_f64(),
            converged,
            diverged,
            notes,
            b_trajectory: trajectory,
        },
    ))
}

/// Block Jacobi sweeps from the independent fits.
pub fn solve_jacobi(system: &NclSystem, config: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    solve_iterative(system, config, SolveMethod::Jacobi)
}

/// Block Gauss-Seidel sweeps from the independent fits.
pub fn solve_gauss_seidel(
    system: &NclSystem,
    config: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    solve_iterative(system, config, SolveMethod::GaussSeidel)
}

/// Dispatches on `config.method`.
pub fn solve(system: &NclSystem, config: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    match config.method {
        SolveMethod::Naive => solve_naive(system),
        SolveMethod::Analytic => solve_analytic(system),
        SolveMethod::Jacobi => solve_jacobi(system, config),
        SolveMethod::GaussSeidel => solve_gauss_seidel(system, config),
    }
}

/// Convergence indicators for the iterative schemes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Spectral radius of the Jacobi iteration matrix `D⁻¹R`.
    pub rho_jacobi: f64,
    /// Spectral radius of the Gauss-Seidel iteration matrix `L⁻¹U`.
    pub rho_gs: f64,
    /// Row-sum coupling bound `max_m Σ_{q≠m} ‖(HₘᵀHₘ + rI)⁻¹HₘᵀH_q‖₂`.
    pub theta0: f64,
    /// Largest admissible λ implied by `theta0`; infinite for M = 1.
    pub lambda_bound: f64,
    pub rho_jacobi_converged: bool,
    pub rho_gs_converged: bool,
}

/// Computes the iteration-matrix spectral radii and the coupling-based λ
/// bound. Requires invertible diagonal blocks (guaranteed by any `r > 0`).
pub fn convergence_check(system: &NclSystem) -> Result<ConvergenceReport> {
    let m_count = system.model_count();
    let l_total = system.l_total();

    let mut factors = Vec::with_capacity(m_count);
    for m in 0..m_count {
        let mut g = system.block_gram(m, m);
        if system.ridge > 0.0 {
            g.add_diag(system.ridge);
        }
        factors.push(CholFactor::new(&g).map_err(|_| NclError::RankDeficientBlock(m))?);
    }

    // Cross grams HₘᵀH_q for m != q.
    let cross: Vec<Vec<Option<Matrix>>> = (0..m_count)
        .map(|m| {
            (0..m_count)
                .map(|q| (q != m).then(|| system.block_gram(m, q)))
                .collect()
        })
        .collect();

    // theta0 from the unscaled solves.
    let mut theta0 = 0.0_f64;
    for m in 0..m_count {
        let mut sum = 0.0;
        for q in 0..m_count {
            if let Some(g) = &cross[m][q] {
                let x = factors[m].solve_matrix(g);
                sum += numkit::op_norm2(&x)?;
            }
        }
        theta0 = theta0.max(sum);
    }
    let lambda_bound = if m_count >= 2 {
        let m = m_count as f64;
        m * m / ((m - 1.0) * (m + theta0 - 1.0))
    } else {
        f64::INFINITY
    };

    let ratio = system.c2 / system.c1;

    // Jacobi iteration matrix D⁻¹R, assembled blockwise.
    let mut jac = Matrix::zeros(l_total, l_total);
    for m in 0..m_count {
        let (mlo, _) = system.block_range(m);
        for q in 0..m_count {
            if let Some(g) = &cross[m][q] {
                let x = factors[m].solve_matrix(g);
                let (qlo, _) = system.block_range(q);
                for i in 0..x.rows() {
                    for j in 0..x.cols() {
                        jac.set(mlo + i, qlo + j, ratio * x.get(i, j));
                    }
                }
            }
        }
    }
    let jac_est = numkit::spectral_radius(&jac, 0, 0.0)?;

    // Gauss-Seidel iteration matrix L⁻¹U by block forward substitution.
    let mut gs = Matrix::zeros(l_total, l_total);
    for m in 0..m_count {
        let (mlo, mhi) = system.block_range(m);
        let wm = mhi - mlo;
        // Row block of the strictly-upper part, pre-divided by c1.
        let mut rhs = Matrix::zeros(wm, l_total);
        for q in (m + 1)..m_count {
            if let Some(g) = &cross[m][q] {
                let (qlo, _) = system.block_range(q);
                for i in 0..wm {
                    for j in 0..g.cols() {
                        rhs.set(i, qlo + j, ratio * g.get(i, j));
                    }
                }
            }
        }
        // Subtract the contribution of already-solved lower blocks.
        for p in 0..m {
            if let Some(g) = &cross[m][p] {
                let (plo, phi) = system.block_range(p);
                let mut zp = Matrix::zeros(phi - plo, l_total);
                for i in 0..(phi - plo) {
                    for j in 0..l_total {
                        zp.set(i, j, gs.get(plo + i, j));
                    }
                }
                let prod = g.matmul(&zp)?;
                for i in 0..wm {
                    for j in 0..l_total {
                        rhs.set(i, j, rhs.get(i, j) - ratio * prod.get(i, j));
                    }
                }
            }
        }
        let solved = factors[m].solve_matrix(&rhs);
        for i in 0..wm {
            for j in 0..l_total {
                gs.set(mlo + i, j, solved.get(i, j));
            }
        }
    }
    let gs_est = numkit::spectral_radius(&gs, 0, 0.0)?;

    Ok(ConvergenceReport {
        rho_jacobi: jac_est.rho,
        rho_gs: gs_est.rho,
        theta0,
        lambda_bound,
        rho_jacobi_converged: jac_est.converged,
        rho_gs_converged: gs_est.converged,
    })
}

/// A solved ensemble: base models over a feature partition, the coupling
/// strength, and the stacked output weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub lambda: f64,
    pub group_spec: FeatureGroupSpec,
    pub base_models: Vec<ScnModel>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
}

impl EnsembleModel {
    /// Assembles an ensemble, writing the segments of `b` into the base
    /// models' output weights.
    pub fn new(
        mut base_models: Vec<ScnModel>,
        group_spec: FeatureGroupSpec,
        lambda: f64,
        b: Vec<f64>,
    ) -> Result<Self> {
        if base_models.len() != group_spec.group_count() {
            return Err(NclError::Shape(format!(
                "{} models for {} feature groups",
                base_models.len(),
                group_spec.group_count()
            )));
        }
        let l_total: usize = base_models.iter().map(|m| m.hidden_count()).sum();
        if b.len() != l_total {
            return Err(NclError::Shape(format!(
                "weight vector has length {}, models hold {l_total} nodes",
                b.len()
            )));
        }
        let mut lo = 0;
        for model in &mut base_models {
            let hi = lo + model.hidden_count();
            model.beta = b[lo..hi].to_vec();
            lo = hi;
        }
        Ok(EnsembleModel {
            lambda,
            group_spec,
            base_models,
            b,
        })
    }

    pub fn model_count(&self) -> usize {
        self.base_models.len()
    }

    /// Mean base-model prediction over the column-partitioned input.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let d = self.group_spec.total_width();
        if x.cols() != d {
            return Err(NclError::Shape(format!(
                "input has {} columns, the feature groups cover {d}",
                x.cols()
            )));
        }
        let n = x.rows();
        let mut sum = vec![0.0; n];
        for (m, model) in self.base_models.iter().enumerate() {
            let cols = self.group_spec.columns0(m);
            let mut xm = Vec::with_capacity(n * cols.len());
            for i in 0..n {
                let row = x.row(i);
                for &c in &cols {
                    xm.push(row[c]);
                }
            }
            let xm = Matrix::from_raw(n, cols.len(), xm);
            let p = scn::predict_base(model, &xm)?;
            numkit::axpy(&mut sum, 1.0, &p);
        }
        let inv_m = 1.0 / self.model_count() as f64;
        for v in &mut sum {
            *v *= inv_m;
        }
        Ok(sum)
    }

    /// Reassembles after deserialization: `B` is authoritative for the
    /// per-model output weights.
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: EnsembleModel = serde_json::from_str(text)
            .map_err(|e| NclError::Parameter(format!("ensemble json: {e}")))?;
        EnsembleModel::new(
            parsed.base_models,
            parsed.group_spec,
            parsed.lambda,
            parsed.b,
        )
    }
}

/// Free-function form of [`EnsembleModel::predict`].
pub fn predict_ensemble(model: &EnsembleModel, x: &Matrix) -> Result<Vec<f64>> {
    model.predict(x)
}
