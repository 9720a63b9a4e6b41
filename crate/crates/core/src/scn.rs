//! Stochastic configuration base models.
//!
//! A model is grown node by node: each step draws a pool of random hidden
//! nodes, keeps only those passing the data-dependent acceptance inequality
//! (`ξ > 0` for every output), adds the best-scoring ones, and refits the
//! output weights by least squares. When no candidate qualifies the
//! constraint is relaxed along the `r` sequence and then the sampling scope
//! is widened. An RVFL builder (one-shot random nodes, no supervisory test)
//! is included as the comparison baseline.

use crate::dataio::Dataset;
use crate::numkit::{self, CholFactor, Matrix, NumError};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScnError {
    #[error("numerical failure: {0}")]
    Num(#[from] NumError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("candidate hidden output is identically zero")]
    DegenerateCandidate,
    #[error(
        "no admissible candidate found before any node was added (scopes and r sequence exhausted)"
    )]
    ConstructionFailure,
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, ScnError>;

/// Hidden-node nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }
}

/// One trained base model: hidden weights/biases plus fitted output weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ScnModelRepr", into = "ScnModelRepr")]
pub struct ScnModel {
    pub input_dim: usize,
    /// Hidden weights, one row per node.
    pub w: Matrix,
    pub b: Vec<f64>,
    pub beta: Vec<f64>,
    pub activation: Activation,
}

#[derive(Serialize, Deserialize)]
struct ScnModelRepr {
    input_dim: usize,
    activation: Activation,
    #[serde(rename = "W")]
    w: Vec<f64>,
    b: Vec<f64>,
    beta: Vec<f64>,
}

impl From<ScnModel> for ScnModelRepr {
    fn from(m: ScnModel) -> Self {
        ScnModelRepr {
            input_dim: m.input_dim,
            activation: m.activation,
            w: m.w.data().to_vec(),
            b: m.b,
            beta: m.beta,
        }
    }
}

impl TryFrom<ScnModelRepr> for ScnModel {
    type Error = String;

    fn try_from(r: ScnModelRepr) -> std::result::Result<Self, String> {
        let l = r.b.len();
        if r.beta.len() != l {
            return Err(format!("beta has length {}, expected {}", r.beta.len(), l));
        }
        if r.w.len() != l * r.input_dim {
            return Err(format!(
                "W has {} entries, expected {} ({} nodes x {} inputs)",
                r.w.len(),
                l * r.input_dim,
                l,
                r.input_dim
            ));
        }
        let w = Matrix::new(l, r.input_dim, r.w).map_err(|e| e.to_string())?;
        Ok(ScnModel {
            input_dim: r.input_dim,
            w,
            b: r.b,
            beta: r.beta,
            activation: r.activation,
        })
    }
}

impl ScnModel {
    pub fn hidden_count(&self) -> usize {
        self.b.len()
    }

    /// Model restricted to its first `l` nodes with the given refit weights.
    /// Growth is incremental, so the prefix is exactly the model the build
    /// passed through at size `l`, up to the output-weight refit.
    pub fn prefix(&self, l: usize, beta: Vec<f64>) -> ScnModel {
        assert!(l <= self.hidden_count() && beta.len() == l);
        ScnModel {
            input_dim: self.input_dim,
            w: Matrix::from_raw(
                l,
                self.input_dim,
                self.w.data()[..l * self.input_dim].to_vec(),
            ),
            b: self.b[..l].to_vec(),
            beta,
            activation: self.activation,
        }
    }
}

/// Settings for the constructive growth.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScnConfig {
    /// Maximum number of hidden nodes.
    pub l_max: usize,
    /// Candidate pool size per search attempt.
    pub t_max: usize,
    /// Ascending weight/bias sampling ranges.
    pub scope_set: Vec<f64>,
    /// Ascending relaxation values in (0, 1).
    pub r_sequence: Vec<f64>,
    /// Stop once the training residual RMSE falls to this level.
    pub tol: f64,
    /// Nodes accepted per growth step (batch size).
    pub batch_size: usize,
    /// Ridge used in the output-weight refit; 0 means plain least squares.
    pub ridge: f64,
    pub seed: u64,
    pub activation: Activation,
}

impl Default for ScnConfig {
    fn default() -> Self {
        ScnConfig {
            l_max: 50,
            t_max: 100,
            scope_set: vec![0.5, 1.0, 5.0, 10.0, 30.0, 50.0, 100.0, 150.0, 200.0],
            r_sequence: vec![0.9, 0.99, 0.999, 0.9999, 0.99999],
            tol: 1e-6,
            batch_size: 1,
            ridge: 0.0,
            seed: 0,
            activation: Activation::Sigmoid,
        }
    }
}

impl ScnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_max == 0 {
            return Err(ScnError::Config("l_max must be >= 1".into()));
        }
        if self.t_max == 0 {
            return Err(ScnError::Config("t_max must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(ScnError::Config("batch_size must be >= 1".into()));
        }
        if self.scope_set.is_empty() || self.scope_set.iter().any(|a| !(*a > 0.0)) {
            return Err(ScnError::Config(
                "scope_set must be nonempty and positive".into(),
            ));
        }
        if self.r_sequence.is_empty() || self.r_sequence.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(ScnError::Config(
                "r_sequence values must lie in (0, 1)".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(ScnError::Config("tol must be > 0".into()));
        }
        if !(self.ridge >= 0.0) {
            return Err(ScnError::Config("ridge must be >= 0".into()));
        }
        Ok(())
    }
}

/// Settings for the RVFL baseline: all nodes drawn at once from `[-α, α]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvflConfig {
    pub l: usize,
    pub alpha: f64,
    pub seed: u64,
    #[serde(default)]
    pub activation: Activation,
}

/// Per-step record of one construction run.
#[derive(Debug, Clone, Default)]
pub struct ScnTrace {
    /// Training residual RMSE after each refit (one entry per growth step).
    pub residual_rmse: Vec<f64>,
    /// Smallest ξ among the nodes accepted at each step.
    pub min_xi: Vec<f64>,
    /// Sampling scope in effect at each step.
    pub scope_used: Vec<f64>,
    /// Relaxation value in effect at each step.
    pub r_used: Vec<f64>,
}

/// Acceptance score of a candidate node against the multi-output residual.
/// Returns the per-output scores and their sum.
pub fn xi_score(
    e_residual: &Matrix,
    h_candidate: &[f64],
    r: f64,
    mu: f64,
) -> Result<(Vec<f64>, f64)> {
    if h_candidate.len() != e_residual.rows() {
        return Err(ScnError::Shape(format!(
            "candidate length {} vs residual rows {}",
            h_candidate.len(),
            e_residual.rows()
        )));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(ScnError::Config(format!("r must lie in (0, 1), got {r}")));
    }
    if !(0.0..=(1.0 - r)).contains(&mu) {
        return Err(ScnError::Config(format!(
            "mu must lie in [0, 1 - r], got {mu}"
        )));
    }
    let hh = numkit::dot(h_candidate, h_candidate);
    if hh == 0.0 {
        return Err(ScnError::DegenerateCandidate);
    }
    let coeff = 1.0 - r - mu;
    let mut per_output = Vec::with_capacity(e_residual.cols());
    let mut total = 0.0;
    for q in 0..e_residual.cols() {
        let eq = e_residual.col(q);
        let eh = numkit::dot(&eq, h_candidate);
        let ee = numkit::dot(&eq, &eq);
        let xi = eh * eh / hh - coeff * ee;
        per_output.push(xi);
        total += xi;
    }
    Ok((per_output, total))
}

/// Hidden-layer output matrix: entry (n, l) is `φ(w_l · x_n + b_l)`.
pub fn hidden_matrix(model: &ScnModel, x: &Matrix) -> Result<Matrix> {
    if x.cols() != model.input_dim {
        return Err(ScnError::Shape(format!(
            "input has {} columns, model expects {}",
            x.cols(),
            model.input_dim
        )));
    }
    let l = model.hidden_count();
    let n = x.rows();
    let mut data = vec![0.0; n * l];
    let fill_row = |i: usize, dst: &mut [f64]| {
        let xi = x.row(i);
        for (k, out) in dst.iter_mut().enumerate() {
            *out = model
                .activation
                .apply(numkit::dot(model.w.row(k), xi) + model.b[k]);
        }
    };
    if n * l * model.input_dim > 4_000_000 {
        data.par_chunks_mut(l)
            .enumerate()
            .for_each(|(i, dst)| fill_row(i, dst));
    } else {
        for (i, dst) in data.chunks_mut(l).enumerate() {
            fill_row(i, dst);
        }
    }
    Ok(Matrix::from_raw(n, l, data))
}

/// Model output `Σ_l β_l φ(w_l · x + b_l)` for each row of `x`.
pub fn predict_base(model: &ScnModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != model.input_dim {
        return Err(ScnError::Shape(format!(
            "input has {} columns, model expects {}",
            x.cols(),
            model.input_dim
        )));
    }
    Ok((0..x.rows())
        .map(|i| {
            let xi = x.row(i);
            (0..model.hidden_count())
                .map(|k| {
                    model.beta[k]
                        * model
                            .activation
                            .apply(numkit::dot(model.w.row(k), xi) + model.b[k])
                })
                .sum()
        })
        .collect())
}

/// Event handed to growth observers after every refit.
pub struct GrowthEvent<'a> {
    /// Node count after this step.
    pub l: usize,
    /// Nodes accepted at this step, `(w, b)` pairs.
    pub new_nodes: &'a [(Vec<f64>, f64)],
    /// Output weights after the refit.
    pub beta: &'a [f64],
}

/// Grows an SCN on `data`. See [`build_scn_observed`] for the variant that
/// reports intermediate states.
pub fn build_scn(data: &Dataset, config: &ScnConfig) -> Result<(ScnModel, ScnTrace)> {
    build_scn_observed(data, config, |_| {})
}

/// Grows an SCN, invoking `observer` after each accepted batch and refit.
pub fn build_scn_observed(
    data: &Dataset,
    config: &ScnConfig,
    mut observer: impl FnMut(&GrowthEvent),
) -> Result<(ScnModel, ScnTrace)> {
    config.validate()?;
    let n = data.n();
    let d = data.dim();
    let y = &data.y;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut nodes: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut gram_rows: Vec<Vec<f64>> = Vec::new();
    let mut hty: Vec<f64> = Vec::new();
    let mut chol: Option<CholFactor> = Some(CholFactor::empty());
    let mut beta: Vec<f64> = Vec::new();
    let mut residual = y.clone();
    let mut trace = ScnTrace::default();

    while nodes.len() < config.l_max {
        let ee = numkit::dot(&residual, &residual);
        let step_node = nodes.len() + 1;
        let want = config.batch_size.min(config.l_max - nodes.len());

        type Batch = (Vec<(Vec<f64>, f64)>, f64);
        let mut batch: Option<Batch> = None;
        'search: for &scope in &config.scope_set {
            // One pool per scope, drawn up front so the random stream never
            // depends on evaluation order; walking the r sequence relaxes the
            // acceptance threshold against this same pool.
            let pool: Vec<(Vec<f64>, f64)> = (0..config.t_max)
                .map(|_| {
                    let w: Vec<f64> = (0..d)
                        .map(|_| scope * (2.0 * rng.random::<f64>() - 1.0))
                        .collect();
                    let b = scope * (2.0 * rng.random::<f64>() - 1.0);
                    (w, b)
                })
                .collect();
            let ratios: Vec<Option<f64>> = pool
                .par_iter()
                .map(|(w, b)| {
                    let mut eh = 0.0;
                    let mut hh = 0.0;
                    for (i, &ei) in residual.iter().enumerate() {
                        let h = config.activation.apply(numkit::dot(w, data.x.row(i)) + b);
                        eh += ei * h;
                        hh += h * h;
                    }
                    (hh > 0.0).then(|| eh * eh / hh)
                })
                .collect();
            for &r in &config.r_sequence {
                let mu = (1.0 - r) / (step_node as f64 + 1.0);
                let coeff = 1.0 - r - mu;
                let mut qualified: Vec<(usize, f64)> = ratios
                    .iter()
                    .enumerate()
                    .filter_map(|(i, ratio)| ratio.map(|v| (i, v - coeff * ee)))
                    .filter(|&(_, xi)| xi > 0.0)
                    .collect();
                if !qualified.is_empty() {
                    // Stable sort keeps generation order on score ties.
                    qualified.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
                    qualified.truncate(want);
                    let min_xi = qualified.iter().map(|q| q.1).fold(f64::INFINITY, f64::min);
                    let chosen: Vec<(Vec<f64>, f64)> =
                        qualified.iter().map(|&(i, _)| pool[i].clone()).collect();
                    trace.scope_used.push(scope);
                    trace.r_used.push(r);
                    trace.min_xi.push(min_xi);
                    batch = Some((chosen, min_xi));
                    break 'search;
                }
            }
        }
        let batch = match batch {
            Some((chosen, _)) => chosen,
            None => {
                if nodes.is_empty() {
                    return Err(ScnError::ConstructionFailure);
                }
                break;
            }
        };

        // Extend hidden columns, the gram system, and the factorization.
        let start = nodes.len();
        for (w, b) in batch {
            let col: Vec<f64> = (0..n)
                .map(|i| config.activation.apply(numkit::dot(&w, data.x.row(i)) + b))
                .collect();
            let mut gr: Vec<f64> = cols.iter().map(|c| numkit::dot(c, &col)).collect();
            gr.push(numkit::dot(&col, &col));
            hty.push(numkit::dot(&col, y));
            if let Some(f) = chol.as_mut() {
                let mut aug = gr.clone();
                *aug.last_mut().unwrap() += config.ridge;
                if f.extend(&aug).is_err() {
                    chol = None;
                }
            }
            gram_rows.push(gr);
            cols.push(col);
            nodes.push((w, b));
        }

        // Refit the output weights over all nodes.
        beta = match &chol {
            Some(f) => f.solve(&hty),
            None => {
                // A near-dependent column defeated the factorization; fall
                // back to the minimum-norm refit over the full gram.
                let l = cols.len();
                let mut g = Matrix::zeros(l, l);
                for i in 0..l {
                    for j in 0..=i {
                        g.set(i, j, gram_rows[i][j]);
                        g.set(j, i, gram_rows[i][j]);
                    }
                }
                if config.ridge > 0.0 {
                    g.add_diag(config.ridge);
                }
                numkit::sym_pinv_solve(&g, &hty, 0.0, n.max(l))?.0
            }
        };
        let mut pred = vec![0.0; n];
        for (k, c) in cols.iter().enumerate() {
            numkit::axpy(&mut pred, beta[k], c);
        }
        for i in 0..n {
            residual[i] = y[i] - pred[i];
        }
        let step_rmse = numkit::rmse(&pred, y)?;
        trace.residual_rmse.push(step_rmse);
        observer(&GrowthEvent {
            l: nodes.len(),
            new_nodes: &nodes[start..],
            beta: &beta,
        });
        if step_rmse <= config.tol {
            break;
        }
    }

    let l = nodes.len();
    let mut wdata = Vec::with_capacity(l * d);
    let mut bvec = Vec::with_capacity(l);
    for (w, b) in &nodes {
        wdata.extend_from_slice(w);
        bvec.push(*b);
    }
    let model = ScnModel {
        input_dim: d,
        w: Matrix::from_raw(l, d, wdata),
        b: bvec,
        beta,
        activation: config.activation,
    };
    Ok((model, trace))
}

/// Builds an RVFL model: every hidden node drawn uniformly from `[-α, α]` in
/// one shot, output weights fitted by least squares.
pub fn build_rvfl(data: &Dataset, config: &RvflConfig) -> Result<ScnModel> {
    if config.l == 0 {
        return Err(ScnError::Config("rvfl: node count must be >= 1".into()));
    }
    if !(config.alpha > 0.0) {
        return Err(ScnError::Config("rvfl: alpha must be > 0".into()));
    }
    let d = data.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut wdata = Vec::with_capacity(config.l * d);
    let mut b = Vec::with_capacity(config.l);
    for _ in 0..config.l {
        for _ in 0..d {
            wdata.push(config.alpha * (2.0 * rng.random::<f64>() - 1.0));
        }
        b.push(config.alpha * (2.0 * rng.random::<f64>() - 1.0));
    }
    let mut model = ScnModel {
        input_dim: d,
        w: Matrix::from_raw(config.l, d, wdata),
        b,
        beta: vec![0.0; config.l],
        activation: config.activation,
    };
    let h = hidden_matrix(&model, &data.x)?;
    model.beta = numkit::pinv_solve(&h, &data.y, 0.0)?;
    Ok(model)
}

/// Validation-driven choice of the hidden-node count: one growth per repeat,
/// argmin of validation RMSE over the range, median across repeats (ties
/// toward the smaller count).
pub fn estimate_nodes(
    train: &Dataset,
    val: &Dataset,
    l_range: (usize, usize),
    repeats: usize,
    config: &ScnConfig,
) -> Result<usize> {
    let runs = estimate_nodes_runs(train, val, l_range, repeats, config)?;
    Ok(median_lower(&runs))
}

/// Per-repeat argmin node counts behind [`estimate_nodes`].
pub fn estimate_nodes_runs(
    train: &Dataset,
    val: &Dataset,
    l_range: (usize, usize),
    repeats: usize,
    config: &ScnConfig,
) -> Result<Vec<usize>> {
    let (lo, hi) = l_range;
    if lo == 0 || lo > hi {
        return Err(ScnError::Config(format!("bad node range [{lo}, {hi}]")));
    }
    if repeats == 0 {
        return Err(ScnError::Config("repeats must be >= 1".into()));
    }
    if val.dim() != train.dim() {
        return Err(ScnError::Shape("train/val widths differ".into()));
    }
    let mut argmins = Vec::with_capacity(repeats);
    for rep in 0..repeats {
        let mut cfg = config.clone();
        cfg.l_max = hi;
        cfg.seed = config.seed.wrapping_add(rep as u64);
        let mut val_cols: Vec<Vec<f64>> = Vec::new();
        let mut best: Option<(usize, f64)> = None;
        let mut fallback: Option<(usize, f64)> = None;
        build_scn_observed(train, &cfg, |event| {
            for (w, b) in event.new_nodes {
                let col: Vec<f64> = (0..val.n())
                    .map(|i| cfg.activation.apply(numkit::dot(w, val.x.row(i)) + *b))
                    .collect();
                val_cols.push(col);
            }
            let mut pred = vec![0.0; val.n()];
            for (k, c) in val_cols.iter().enumerate() {
                numkit::axpy(&mut pred, event.beta[k], c);
            }
            let err = numkit::rmse(&pred, &val.y).unwrap_or(f64::INFINITY);
            let slot = if (lo..=hi).contains(&event.l) {
                &mut best
            } else {
                &mut fallback
            };
            if slot.is_none_or(|(_, e)| err < e) {
                *slot = Some((event.l, err));
            }
        })?;
        let chosen = best.or(fallback).map(|(l, _)| l).unwrap_or(lo);
        argmins.push(chosen);
    }
    Ok(argmins)
}

/// Median with ties resolved toward the smaller value.
pub(crate) fn median_lower(values: &[usize]) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    sorted[(sorted.len() - 1) / 2]
}

/// Folds per-repeat argmin runs into the chosen node count (the median rule
/// of [`estimate_nodes`]).
pub fn estimate_from_runs(runs: &[usize]) -> usize {
    median_lower(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio;

    fn toy_dataset(n: usize, seed: u64) -> Dataset {
        dataio::synth_generate(n, -2.0, 2.0, seed).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn xi_score_hand_values() {
        let e = Matrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        let (per, total) = xi_score(&e, &[1.0, 1.0], 0.9, 0.0).unwrap();
        assert_close(per[0], 1.8, 1e-12);
        assert_close(total, 1.8, 1e-12);

        let e = Matrix::new(2, 1, vec![1.0, 0.0]).unwrap();
        let (per, _) = xi_score(&e, &[0.0, 1.0], 0.9, 0.0).unwrap();
        assert_close(per[0], -0.1, 1e-12);
    }

    #[test]
    fn xi_score_scale_invariances() {
        let e = Matrix::new(3, 1, vec![0.4, -1.0, 2.0]).unwrap();
        let h = [0.3, 0.7, -0.2];
        let h10: Vec<f64> = h.iter().map(|v| v * 10.0).collect();
        let (a, _) = xi_score(&e, &h, 0.95, 0.01).unwrap();
        let (b, _) = xi_score(&e, &h10, 0.95, 0.01).unwrap();
        assert_close(a[0], b[0], 1e-9);

        // Quadratic scaling in the residual.
        let e3 = Matrix::new(3, 1, vec![1.2, -3.0, 6.0]).unwrap();
        let (c, _) = xi_score(&e3, &h, 0.95, 0.01).unwrap();
        assert_close(c[0], 9.0 * a[0], 1e-9);
    }

    #[test]
    fn xi_score_error_paths() {
        let e = Matrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            xi_score(&e, &[0.0, 0.0], 0.9, 0.0),
            Err(ScnError::DegenerateCandidate)
        ));
        assert!(matches!(
            xi_score(&e, &[1.0, 1.0], 1.2, 0.0),
            Err(ScnError::Config(_))
        ));
        assert!(matches!(
            xi_score(&e, &[1.0, 1.0], 0.9, 0.5),
            Err(ScnError::Config(_))
        ));
        assert!(matches!(
            xi_score(&e, &[1.0], 0.9, 0.0),
            Err(ScnError::Shape(_))
        ));
    }

    #[test]
    fn xi_score_multi_output_sums_per_column() {
        let e = Matrix::new(2, 2, vec![1.0, 2.0, 1.0, 0.0]).unwrap();
        let (per, total) = xi_score(&e, &[1.0, 1.0], 0.9, 0.0).unwrap();
        assert_eq!(per.len(), 2);
        assert_close(total, per[0] + per[1], 1e-12);
    }

    #[test]
    fn hidden_matrix_and_predict_agree_with_scalar_loop() {
        let model = ScnModel {
            input_dim: 2,
            w: Matrix::new(2, 2, vec![0.5, -1.0, 2.0, 0.25]).unwrap(),
            b: vec![0.1, -0.4],
            beta: vec![1.5, -2.0],
            activation: Activation::Sigmoid,
        };
        let x = Matrix::new(2, 2, vec![0.2, 0.3, -1.0, 0.8]).unwrap();
        let h = hidden_matrix(&model, &x).unwrap();
        for i in 0..2 {
            for l in 0..2 {
                let z =
                    model.w.get(l, 0) * x.get(i, 0) + model.w.get(l, 1) * x.get(i, 1) + model.b[l];
                assert_close(h.get(i, l), 1.0 / (1.0 + (-z).exp()), 1e-14);
            }
        }
        let pred = predict_base(&model, &x).unwrap();
        for i in 0..2 {
            let expect = model.beta[0] * h.get(i, 0) + model.beta[1] * h.get(i, 1);
            assert_close(pred[i], expect, 1e-12);
        }
        let bad = Matrix::zeros(2, 3);
        assert!(matches!(
            hidden_matrix(&model, &bad),
            Err(ScnError::Shape(_))
        ));
        assert!(matches!(
            predict_base(&model, &bad),
            Err(ScnError::Shape(_))
        ));
    }

    #[test]
    fn hidden_matrix_sigmoid_limits() {
        let model = ScnModel {
            input_dim: 1,
            w: Matrix::new(1, 1, vec![0.0]).unwrap(),
            b: vec![0.0],
            beta: vec![2.0],
            activation: Activation::Sigmoid,
        };
        let x = Matrix::new(3, 1, vec![-4.0, 0.0, 4.0]).unwrap();
        let h = hidden_matrix(&model, &x).unwrap();
        for i in 0..3 {
            assert_close(h.get(i, 0), 0.5, 1e-14);
        }
        let pred = predict_base(&model, &x).unwrap();
        assert!(pred.iter().all(|p| (p - 1.0).abs() < 1e-12));

        let steep = ScnModel {
            input_dim: 1,
            w: Matrix::new(1, 1, vec![1.0]).unwrap(),
            b: vec![0.0],
            beta: vec![1.0],
            activation: Activation::Sigmoid,
        };
        let far = Matrix::new(1, 1, vec![40.0]).unwrap();
        assert_close(hidden_matrix(&steep, &far).unwrap().get(0, 0), 1.0, 1e-12);
    }

    #[test]
    fn predict_base_zero_beta_gives_zero() {
        let model = ScnModel {
            input_dim: 1,
            w: Matrix::new(2, 1, vec![1.0, -1.0]).unwrap(),
            b: vec![0.0, 0.5],
            beta: vec![0.0, 0.0],
            activation: Activation::Sigmoid,
        };
        let x = Matrix::new(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(predict_base(&model, &x).unwrap().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn predict_base_is_linear_in_beta() {
        let data = toy_dataset(40, 3);
        let (model, _) = build_scn(
            &data,
            &ScnConfig {
                l_max: 4,
                seed: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let mut m1 = model.clone();
        let mut m2 = model.clone();
        m1.beta = vec![0.3; model.hidden_count()];
        m2.beta = vec![-0.7; model.hidden_count()];
        let mut sum = model.clone();
        sum.beta = m1.beta.iter().zip(&m2.beta).map(|(a, b)| a + b).collect();
        let p1 = predict_base(&m1, &data.x).unwrap();
        let p2 = predict_base(&m2, &data.x).unwrap();
        let ps = predict_base(&sum, &data.x).unwrap();
        for i in 0..data.n() {
            assert_close(ps[i], p1[i] + p2[i], 1e-10);
        }
    }

    #[test]
    fn build_scn_recovers_plantable_target() {
        // Target generated by a single sigmoid node; with a large pool the
        // residual should reach the tolerance with very few nodes.
        let n = 60;
        let x = Matrix::from_fn(n, 1, |i, _| -2.0 + 4.0 * i as f64 / (n - 1) as f64);
        let y: Vec<f64> = (0..n)
            .map(|i| 1.0 / (1.0 + (-(0.8 * x.get(i, 0) + 0.2)).exp()))
            .collect();
        let data = Dataset::new(x, y, vec!["x".into()]).unwrap();
        let cfg = ScnConfig {
            l_max: 25,
            t_max: 300,
            tol: 1e-6,
            seed: 11,
            ..Default::default()
        };
        let (model, trace) = build_scn(&data, &cfg).unwrap();
        assert!(model.hidden_count() >= 1);
        assert!(*trace.residual_rmse.last().unwrap() <= 1e-6);
    }

    #[test]
    fn build_scn_trace_strictly_decreases() {
        let data = toy_dataset(150, 9);
        let cfg = ScnConfig {
            l_max: 20,
            seed: 1,
            ..Default::default()
        };
        let (model, trace) = build_scn(&data, &cfg).unwrap();
        assert_eq!(trace.residual_rmse.len(), model.hidden_count());
        for w in trace.residual_rmse.windows(2) {
            assert!(w[1] < w[0], "trace not strictly decreasing: {w:?}");
        }
        assert!(trace.min_xi.iter().all(|&xi| xi > 0.0));
    }

    #[test]
    fn build_scn_huge_tolerance_stops_after_first_batch() {
        let data = toy_dataset(50, 2);
        let cfg = ScnConfig {
            l_max: 30,
            batch_size: 3,
            tol: 1e9,
            seed: 4,
            ..Default::default()
        };
        let (model, _) = build_scn(&data, &cfg).unwrap();
        assert_eq!(model.hidden_count(), 3);

        let cfg = ScnConfig {
            l_max: 2,
            batch_size: 5,
            tol: 1e9,
            seed: 4,
            ..Default::default()
        };
        let (model, _) = build_scn(&data, &cfg).unwrap();
        assert_eq!(model.hidden_count(), 2);
    }

    #[test]
    fn build_scn_determinism() {
        let data = toy_dataset(80, 5);
        let cfg = ScnConfig {
            l_max: 6,
            seed: 42,
            ..Default::default()
        };
        let (m1, t1) = build_scn(&data, &cfg).unwrap();
        let (m2, t2) = build_scn(&data, &cfg).unwrap();
        assert_eq!(m1.w.data(), m2.w.data());
        assert_eq!(m1.beta, m2.beta);
        assert_eq!(t1.residual_rmse, t2.residual_rmse);
    }

    #[test]
    fn build_scn_construction_failure_when_nothing_qualifies() {
        // Zero target: ξ = 0 - 0 for every candidate, never strictly positive.
        let data = Dataset::new(
            Matrix::from_fn(20, 1, |i, _| i as f64 / 20.0),
            vec![0.0; 20],
            vec!["x".into()],
        )
        .unwrap();
        let cfg = ScnConfig {
            l_max: 3,
            t_max: 10,
            seed: 0,
            ..Default::default()
        };
        assert!(matches!(
            build_scn(&data, &cfg),
            Err(ScnError::ConstructionFailure)
        ));
    }

    #[test]
    fn rvfl_determinism_and_errors() {
        let data = toy_dataset(60, 8);
        let cfg = RvflConfig {
            l: 12,
            alpha: 1.0,
            seed: 3,
            activation: Activation::Sigmoid,
        };
        let a = build_rvfl(&data, &cfg).unwrap();
        let b = build_rvfl(&data, &cfg).unwrap();
        assert_eq!(a.w.data(), b.w.data());
        assert_eq!(a.b, b.b);
        assert_eq!(a.beta, b.beta);

        let bad = RvflConfig {
            l: 0,
            alpha: 1.0,
            seed: 3,
            activation: Activation::Sigmoid,
        };
        assert!(matches!(build_rvfl(&data, &bad), Err(ScnError::Config(_))));
    }

    #[test]
    fn rvfl_matches_scn_architecture_shape() {
        let data = toy_dataset(60, 8);
        let (scn, _) = build_scn(
            &data,
            &ScnConfig {
                l_max: 7,
                seed: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let rvfl = build_rvfl(
            &data,
            &RvflConfig {
                l: scn.hidden_count(),
                alpha: 1.0,
                seed: 2,
                activation: Activation::Sigmoid,
            },
        )
        .unwrap();
        assert_eq!(rvfl.hidden_count(), scn.hidden_count());
        assert_eq!(rvfl.input_dim, scn.input_dim);
    }

    #[test]
    fn estimate_nodes_median_rules() {
        assert_eq!(median_lower(&[10, 20, 30]), 20);
        assert_eq!(median_lower(&[30, 10, 20]), 20);
        assert_eq!(median_lower(&[10, 20]), 10);
        assert_eq!(median_lower(&[7]), 7);
    }

    #[test]
    fn estimate_nodes_single_repeat_returns_argmin() {
        let train = toy_dataset(120, 14);
        let val = toy_dataset(60, 15);
        let cfg = ScnConfig {
            seed: 21,
            ..Default::default()
        };
        let runs = estimate_nodes_runs(&train, &val, (1, 10), 1, &cfg).unwrap();
        assert_eq!(runs.len(), 1);
        let chosen = estimate_nodes(&train, &val, (1, 10), 1, &cfg).unwrap();
        assert_eq!(chosen, runs[0]);
        assert!((1..=10).contains(&chosen));
    }

    #[test]
    fn scn_model_json_round_trip() {
        let data = toy_dataset(50, 6);
        let (model, _) = build_scn(
            &data,
            &ScnConfig {
                l_max: 5,
                seed: 9,
                ..Default::default()
            },
        )
        .unwrap();
        let text = serde_json::to_string(&model).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(parsed.get("W").is_some());
        assert!(parsed.get("input_dim").is_some());
        let back: ScnModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back.w.data(), model.w.data());
        assert_eq!(back.beta, model.beta);
        let p1 = predict_base(&model, &data.x).unwrap();
        let p2 = predict_base(&back, &data.x).unwrap();
        assert_eq!(p1, p2);
    }
}
