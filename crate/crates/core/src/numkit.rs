//! Dense linear-algebra kernel shared by every other module.
//!
//! Everything here is pure and deterministic: least-squares and ridge solves,
//! an extendable Cholesky factor for incremental gram systems, a symmetric
//! eigendecomposition (Householder tridiagonalization + implicit QL), power
//! iteration for spectral radii, and the scalar metrics (Pearson correlation,
//! RMSE).

use rayon::prelude::*;
use thiserror::Error;

/// Errors raised by the numerical kernel.
#[derive(Debug, Error)]
pub enum NumError {
    #[error("matrix data length {len} does not match {rows}x{cols}")]
    BadLength {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("correlation is undefined for a constant vector")]
    ConstantVector,
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },
    #[error("eigensolver failed to converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, NumError>;

/// Dense real matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting length mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NumError::BadLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(NumError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Like [`Matrix::new`] but skips the finiteness scan. For internal use
    /// where the entries are already known finite.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(NumError::ShapeMismatch("ragged row lengths".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Copies a contiguous column range into its own matrix.
    pub fn col_slice(&self, lo: usize, hi: usize) -> Matrix {
        assert!(lo <= hi && hi <= self.cols);
        let w = hi - lo;
        let mut data = Vec::with_capacity(self.rows * w);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[lo..hi]);
        }
        Matrix::from_raw(self.rows, w, data)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// Horizontal concatenation of equally tall blocks.
    pub fn hstack(blocks: &[&Matrix]) -> Result<Matrix> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(NumError::ShapeMismatch(
                "hstack blocks differ in row count".into(),
            ));
        }
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for b in blocks {
                data.extend_from_slice(b.row(i));
            }
        }
        Ok(Matrix::from_raw(rows, cols, data))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * s).collect(),
        )
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumError::ShapeMismatch("sub: dimension mismatch".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix::from_raw(self.rows, self.cols, data))
    }

    pub fn add_diag(&mut self, v: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += v;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(NumError::ShapeMismatch(format!(
                "matmul: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; m * n];
        let work = m * k * n;
        let body = |i: usize, dst: &mut [f64]| {
            let arow = self.row(i);
            for (l, &a) in arow.iter().enumerate() {
                if a != 0.0 {
                    axpy(dst, a, other.row(l));
                }
            }
        };
        if work > 8_000_000 {
            out.par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, dst)| body(i, dst));
        } else {
            for (i, dst) in out.chunks_mut(n).enumerate() {
                body(i, dst);
            }
        }
        Ok(Matrix::from_raw(m, n, out))
    }

    /// `self * x` for a vector `x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(NumError::ShapeMismatch(format!(
                "matvec: {}x{} * len {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `selfᵀ * v`.
    pub fn t_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(NumError::ShapeMismatch(format!(
                "t_matvec: ({}x{})ᵀ * len {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(&mut out, vi, self.row(i));
            }
        }
        Ok(out)
    }

    /// `self[:, lo..hi] * x` restricted to a column range.
    pub fn matvec_cols(&self, lo: usize, hi: usize, x: &[f64]) -> Vec<f64> {
        assert!(lo <= hi && hi <= self.cols && x.len() == hi - lo);
        (0..self.rows)
            .map(|i| dot(&self.row(i)[lo..hi], x))
            .collect()
    }

    /// `self[:, lo..hi]ᵀ * v`.
    pub fn t_matvec_cols(&self, lo: usize, hi: usize, v: &[f64]) -> Vec<f64> {
        assert!(lo <= hi && hi <= self.cols && v.len() == self.rows);
        let mut out = vec![0.0; hi - lo];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(&mut out, vi, &self.row(i)[lo..hi]);
            }
        }
        out
    }

    /// `self[:, a]ᵀ * self[:, b]` for two column ranges. Tiled over output
    /// rows so the accumulator block stays cache-resident; the source-row
    /// summation order is fixed, so results do not depend on the tiling or
    /// the thread count.
    pub fn gram_cols(&self, a: (usize, usize), b: (usize, usize)) -> Matrix {
        let (a0, a1) = a;
        let (b0, b1) = b;
        assert!(a0 <= a1 && a1 <= self.cols && b0 <= b1 && b1 <= self.cols);
        let (wa, wb) = (a1 - a0, b1 - b0);
        let mut g = vec![0.0; wa * wb];
        const TILE: usize = 48;
        let body = |tile_start: usize, gslice: &mut [f64]| {
            let tile_len = gslice.len() / wb.max(1);
            for r in 0..self.rows {
                let row = self.row(r);
                let ra = &row[a0..a1];
                let rb = &row[b0..b1];
                for ii in 0..tile_len {
                    let av = ra[tile_start + ii];
                    if av != 0.0 {
                        axpy(&mut gslice[ii * wb..(ii + 1) * wb], av, rb);
                    }
                }
            }
        };
        if wb == 0 || wa == 0 {
            return Matrix::from_raw(wa, wb, g);
        }
        if self.rows * wa * wb > 8_000_000 {
            g.par_chunks_mut(TILE * wb)
                .enumerate()
                .for_each(|(k, gs)| body(k * TILE, gs));
        } else {
            body(0, &mut g);
        }
        Matrix::from_raw(wa, wb, g)
    }

    /// `selfᵀ * self`.
    pub fn gram(&self) -> Matrix {
        self.gram_cols((0, self.cols), (0, self.cols))
    }

    /// `self * selfᵀ`.
    pub fn gram_t(&self) -> Matrix {
        let n = self.rows;
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                g.set(i, j, v);
                g.set(j, i, v);
            }
        }
        g
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(dst: &mut [f64], alpha: f64, src: &[f64]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d += alpha * s;
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Lower-triangular Cholesky factor that can grow one row at a time, so an
/// incrementally extended gram system never pays more than O(k²) per column.
#[derive(Debug, Clone)]
pub struct CholFactor {
    rows: Vec<Vec<f64>>,
}

impl CholFactor {
    pub fn new(a: &Matrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(NumError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let mut f = CholFactor {
            rows: Vec::with_capacity(a.rows()),
        };
        for k in 0..a.rows() {
            f.extend(&a.row(k)[..=k])?;
        }
        Ok(f)
    }

    pub fn empty() -> Self {
        CholFactor { rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Appends the next row/column of the underlying symmetric matrix.
    /// `col[0..k]` are the cross terms against existing indices, `col[k]`
    /// the new diagonal entry.
    pub fn extend(&mut self, col: &[f64]) -> Result<()> {
        let k = self.rows.len();
        assert_eq!(col.len(), k + 1);
        let mut r = vec![0.0; k + 1];
        for j in 0..k {
            let s = col[j] - dot(&self.rows[j][..j], &r[..j]);
            r[j] = s / self.rows[j][j];
        }
        let d = col[k] - dot(&r[..k], &r[..k]);
        let floor = col[k].abs() * (k + 1) as f64 * f64::EPSILON;
        if !(d > floor) || !d.is_finite() {
            return Err(NumError::NotPositiveDefinite { pivot: d, index: k });
        }
        r[k] = d.sqrt();
        self.rows.push(r);
        Ok(())
    }

    /// Solves `A x = b` where `A = L Lᵀ`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.rows.len();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            let s = x[k] - dot(&self.rows[k][..k], &x[..k]);
            x[k] = s / self.rows[k][k];
        }
        for k in (0..n).rev() {
            x[k] /= self.rows[k][k];
            let xk = x[k];
            for j in 0..k {
                x[j] -= self.rows[k][j] * xk;
            }
        }
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let n = self.dim();
        assert_eq!(b.rows(), n);
        let mut out = Matrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.col(j));
            for i in 0..n {
                out.set(i, j, x[i]);
            }
        }
        out
    }
}

/// Eigendecomposition of a symmetric matrix. `values` ascend and row `i` of
/// `vectors` is the unit eigenvector paired with `values[i]`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Symmetric eigendecomposition by Householder tridiagonalization followed by
/// the implicit-shift QL iteration, after the classic EISPACK routines. The
/// workspace keeps transformation vectors as rows so the hot loops stay
/// unit-stride.
pub fn eigh(a: &Matrix) -> Result<Eigh> {
    let n = a.rows();
    if a.rows() != a.cols() {
        return Err(NumError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: Matrix::zeros(0, 0),
        });
    }
    // q holds the working matrix transposed: q[r*n + c] is entry (c, r) of the
    // original formulation. The input is symmetric, so the copy is direct.
    let mut q = a.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    // Householder reduction to tridiagonal form.
    for j in 0..n {
        d[j] = q[j * n + (n - 1)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0_f64;
        let mut h = 0.0_f64;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = q[j * n + (i - 1)];
                q[j * n + i] = 0.0;
                q[i * n + j] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                f = d[j];
                q[i * n + j] = f;
                g = e[j] + q[j * n + j] * f;
                let qj = &q[j * n..j * n + i];
                for k in (j + 1)..i {
                    g += qj[k] * d[k];
                    e[k] += qj[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let qj = &mut q[j * n..j * n + i];
                for k in j..i {
                    qj[k] -= f * e[k] + g * d[k];
                }
                d[j] = q[j * n + (i - 1)];
                q[j * n + i] = 0.0;
            }
        }
        d[i] = h;
    }
    // Accumulate transformations.
    for i in 0..n - 1 {
        q[i * n + (n - 1)] = q[i * n + i];
        q[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = q[(i + 1) * n + k] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                {
                    let qi1 = &q[(i + 1) * n..(i + 1) * n + i + 1];
                    let qj = &q[j * n..j * n + i + 1];
                    for k in 0..=i {
                        g += qi1[k] * qj[k];
                    }
                }
                let qj = &mut q[j * n..j * n + i + 1];
                for k in 0..=i {
                    qj[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            q[(i + 1) * n + k] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = q[j * n + (n - 1)];
        q[j * n + (n - 1)] = 0.0;
    }
    q[(n - 1) * n + (n - 1)] = 1.0;
    e[0] = 0.0;

    // Implicit-shift QL iteration on the tridiagonal form.
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0_f64;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(NumError::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0_f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0_f64;
                let mut s2 = 0.0_f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    // Rotate the two affected transformation rows in place.
                    let (lo, hi) = (i * n, (i + 1) * n);
                    let (head, tail) = q.split_at_mut(hi);
                    let row_i = &mut head[lo..lo + n];
                    let row_i1 = &mut tail[..n];
                    for k in 0..n {
                        let h2 = row_i1[k];
                        row_i1[k] = s * row_i[k] + c * h2;
                        row_i[k] = c * row_i[k] - s * h2;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Sort eigenvalues ascending, carrying the eigenvector rows along.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d.swap(i, k);
            for col in 0..n {
                q.swap(i * n + col, k * n + col);
            }
        }
    }

    Ok(Eigh {
        values: d,
        vectors: Matrix::from_raw(n, n, q),
    })
}

/// Minimum-norm solution of the symmetric system `A x = b`, zeroing spectral
/// components with |eigenvalue|^(1/2) at or below the cutoff. With `tol = 0`
/// the cutoff defaults to `dim_hint · ε · σ_max`. Returns the solution and
/// the retained rank.
pub fn sym_pinv_solve(
    a: &Matrix,
    b: &[f64],
    tol: f64,
    dim_hint: usize,
) -> Result<(Vec<f64>, usize)> {
    if a.rows() != a.cols() {
        return Err(NumError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.len() != a.rows() {
        return Err(NumError::ShapeMismatch("sym_pinv_solve: rhs length".into()));
    }
    let eig = eigh(a)?;
    let sigma_max = eig
        .values
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .sqrt();
    let cutoff = if tol > 0.0 {
        tol
    } else {
        dim_hint.max(a.rows()) as f64 * f64::EPSILON * sigma_max
    };
    let mut x = vec![0.0; a.rows()];
    let mut rank = 0;
    for (i, &lam) in eig.values.iter().enumerate() {
        if lam.abs().sqrt() > cutoff {
            let row = eig.vectors.row(i);
            let coef = dot(row, b) / lam;
            axpy(&mut x, coef, row);
            rank += 1;
        }
    }
    Ok((x, rank))
}

/// Minimum-norm least-squares solution `H†y` with singular values at or below
/// the rank cutoff treated as zero. `tol = 0` selects the default cutoff
/// `max(N, L) · ε · σ_max`.
pub fn pinv_solve(h: &Matrix, y: &[f64], tol: f64) -> Result<Vec<f64>> {
    if h.rows() == 0 || h.cols() == 0 {
        return Err(NumError::Parameter("pinv_solve: empty matrix".into()));
    }
    if y.len() != h.rows() {
        return Err(NumError::ShapeMismatch(format!(
            "pinv_solve: H is {}x{} but y has length {}",
            h.rows(),
            h.cols(),
            y.len()
        )));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(NumError::NonFinite);
    }
    if !(tol >= 0.0) {
        return Err(NumError::Parameter("pinv_solve: tol must be >= 0".into()));
    }
    let dim_hint = h.rows().max(h.cols());
    if h.rows() >= h.cols() {
        let g = h.gram();
        let rhs = h.t_matvec(y)?;
        let (x, _) = sym_pinv_solve(&g, &rhs, tol, dim_hint)?;
        Ok(x)
    } else {
        // Wide case: H†y = Hᵀ (H Hᵀ)† y keeps the eigenproblem at N×N.
        let g = h.gram_t();
        let (z, _) = sym_pinv_solve(&g, y, tol, dim_hint)?;
        h.t_matvec(&z)
    }
}

/// Ridge solution `(HᵀH + rI)⁻¹ Hᵀy`, well-defined for every `r > 0`
/// regardless of the rank of `H`.
pub fn ridge_solve(h: &Matrix, y: &[f64], r: f64) -> Result<Vec<f64>> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(NumError::Parameter(format!(
            "ridge_solve: r must be > 0, got {r}"
        )));
    }
    if y.len() != h.rows() {
        return Err(NumError::ShapeMismatch(format!(
            "ridge_solve: H is {}x{} but y has length {}",
            h.rows(),
            h.cols(),
            y.len()
        )));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(NumError::NonFinite);
    }
    let mut g = h.gram();
    g.add_diag(r);
    let rhs = h.t_matvec(y)?;
    match CholFactor::new(&g) {
        Ok(f) => Ok(f.solve(&rhs)),
        // (G + rI) is SPD in exact arithmetic; fall back if scaling defeats
        // the factorization.
        Err(_) => Ok(sym_pinv_solve(&g, &rhs, 0.0, h.rows().max(h.cols()))?.0),
    }
}

/// Power-iteration estimate of a spectral radius.
#[derive(Debug, Clone, Copy)]
pub struct SpectralEstimate {
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Estimates ρ(A) by power iteration from the fixed all-ones start vector.
/// Successive norm ratios are combined pairwise (geometric mean) so spectra
/// with a ±λ dominant pair still settle. `max_iters = 0` and `tol = 0` select
/// the defaults 1000 and 1e-9.
pub fn spectral_radius(a: &Matrix, max_iters: usize, tol: f64) -> Result<SpectralEstimate> {
    if a.rows() != a.cols() {
        return Err(NumError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(SpectralEstimate {
            rho: 0.0,
            converged: true,
            iterations: 0,
        });
    }
    let max_iters = if max_iters == 0 { 1000 } else { max_iters };
    let tol = if tol > 0.0 { tol } else { 1e-9 };

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut prev_ratio: Option<f64> = None;
    let mut prev_est = f64::NAN;
    for it in 1..=max_iters {
        let ax = a.matvec(&x)?;
        let norm = l2_norm(&ax);
        if norm == 0.0 {
            return Ok(SpectralEstimate {
                rho: 0.0,
                converged: true,
                iterations: it,
            });
        }
        let est = match prev_ratio {
            Some(r) => (norm * r).sqrt(),
            None => norm,
        };
        for (xi, &axi) in x.iter_mut().zip(&ax) {
            *xi = axi / norm;
        }
        if prev_est.is_finite() && (est - prev_est).abs() <= tol * est.max(1.0) {
            return Ok(SpectralEstimate {
                rho: est,
                converged: true,
                iterations: it,
            });
        }
        prev_est = est;
        prev_ratio = Some(norm);
    }
    Ok(SpectralEstimate {
        rho: prev_est,
        converged: false,
        iterations: max_iters,
    })
}

/// Largest singular value of `A`, via power iteration on `AᵀA`.
pub fn op_norm2(a: &Matrix) -> Result<f64> {
    let g = a.gram();
    let est = spectral_radius(&g, 2000, 1e-12)?;
    Ok(est.rho.max(0.0).sqrt())
}

/// Pearson correlation coefficient, clamped into [-1, 1].
pub fn pearson_corr(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(NumError::ShapeMismatch(format!(
            "pearson_corr: lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 2 {
        return Err(NumError::Parameter(
            "pearson_corr: need at least 2 samples".into(),
        ));
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let mut suu = 0.0;
    let mut svv = 0.0;
    let mut suv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        let da = a - mu;
        let db = b - mv;
        suu += da * da;
        svv += db * db;
        suv += da * db;
    }
    if suu == 0.0 || svv == 0.0 {
        return Err(NumError::ConstantVector);
    }
    Ok((suv / (suu.sqrt() * svv.sqrt())).clamp(-1.0, 1.0))
}

/// Root mean square error between two equally long vectors.
pub fn rmse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(NumError::ShapeMismatch(format!(
            "rmse: lengths {} and {}",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(NumError::Parameter("rmse: empty input".into()));
    }
    let ss: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((ss / pred.len() as f64).sqrt())
}
