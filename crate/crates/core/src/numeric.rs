//! Dense numeric primitives shared by every other module: a column-major
//! series container, QR-based least squares, partial sums, lower empirical
//! quantiles and a counter-keyed random stream.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which a design is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A `T x k` matrix of observations, one series per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    values: DMatrix<f64>,
}

impl SeriesMatrix {
    /// Builds a matrix from equally long columns. All entries must be finite.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::EmptyInput);
        };
        let t = first.len();
        if t == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = columns.iter().position(|c| c.len() != t) {
            return Err(Error::DimensionMismatch(format!(
                "column {bad} has {} rows, expected {t}",
                columns[bad].len()
            )));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry in series matrix".into()));
        }
        let data: Vec<f64> = columns.iter().flatten().copied().collect();
        Ok(Self {
            values: DMatrix::from_vec(t, columns.len(), data),
        })
    }

    pub fn from_column(column: Vec<f64>) -> Result<Self> {
        Self::from_columns(&[column])
    }

    /// A `T x 0` matrix (no deterministic regressors).
    pub fn empty(t: usize) -> Self {
        Self {
            values: DMatrix::zeros(t, 0),
        }
    }

    pub(crate) fn from_matrix(values: DMatrix<f64>) -> Self {
        Self { values }
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let t = self.nrows();
        &self.values.as_slice()[j * t..(j + 1) * t]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.ncols()).map(move |j| self.column(j))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Rows `start..start+len` as a new matrix.
    pub fn rows(&self, start: usize, len: usize) -> Self {
        Self {
            values: self.values.rows(start, len).into_owned(),
        }
    }

    /// New matrix with `f` applied to every entry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.map(f),
        }
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hstack(&self, other: &SeriesMatrix) -> Result<Self> {
        if self.nrows() != other.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} rows next to {} rows",
                self.nrows(),
                other.nrows()
            )));
        }
        let mut out = DMatrix::zeros(self.nrows(), self.ncols() + other.ncols());
        out.columns_mut(0, self.ncols()).copy_from(&self.values);
        out.columns_mut(self.ncols(), other.ncols())
            .copy_from(&other.values);
        Ok(Self { values: out })
    }
}

/// Output of [`least_squares`].
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Householder QR factorization of a full-column-rank design, reusable for
/// several right-hand sides.
pub struct QrFactor {
    design: DMatrix<f64>,
    qr: nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    r: DMatrix<f64>,
}

impl QrFactor {
    pub fn new(design: DMatrix<f64>) -> Result<Self> {
        let (n, k) = design.shape();
        if k == 0 {
            return Err(Error::DimensionMismatch("design has no columns".into()));
        }
        if n <= k {
            return Err(Error::DimensionMismatch(format!(
                "need more rows than columns, got {n} x {k}"
            )));
        }
        let qr = design.clone().qr();
        let r = qr.r();
        let rank = numerical_rank(&r);
        if rank < k {
            return Err(Error::RankDeficient { rank, columns: k });
        }
        Ok(Self { design, qr, r })
    }

    /// Upper-triangular `k x k` factor.
    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn ncols(&self) -> usize {
        self.design.ncols()
    }

    /// Full-length `Q' y`.
    pub fn q_transpose_mul(&self, y: &[f64]) -> DVector<f64> {
        let mut qty = DVector::from_column_slice(y);
        self.qr.q_tr_mul(&mut qty);
        qty
    }

    /// Coefficients of the regression restricted to the leading `k` columns,
    /// given `Q' y` from [`QrFactor::q_transpose_mul`].
    pub fn leading_coefficients(&self, qty: &DVector<f64>, k: usize) -> Vec<f64> {
        let r = self.r.view((0, 0), (k, k));
        let rhs = qty.rows(0, k).into_owned();
        r.solve_upper_triangular(&rhs)
            .expect("rank was checked at factorization")
            .as_slice()
            .to_vec()
    }

    pub fn solve(&self, y: &[f64]) -> Result<LeastSquares> {
        if y.len() != self.design.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "response has {} rows, design has {}",
                y.len(),
                self.design.nrows()
            )));
        }
        let qty = self.q_transpose_mul(y);
        let coefficients = self.leading_coefficients(&qty, self.ncols());
        let fitted = &self.design * DVector::from_column_slice(&coefficients);
        let residuals = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
        Ok(LeastSquares {
            coefficients,
            residuals,
        })
    }

    /// Diagonal element `j` of `(X'X)^{-1}`.
    pub fn inverse_gram_diagonal(&self, j: usize) -> f64 {
        // (X'X)^{-1} = R^{-1} R^{-T}; its j-th diagonal is |R^{-T} e_j|^2.
        let k = self.ncols();
        let mut e = DVector::zeros(k);
        e[j] = 1.0;
        let z = self
            .r
            .tr_solve_upper_triangular(&e)
            .expect("rank was checked at factorization");
        z.norm_squared()
    }
}

/// Number of singular values of `m` above `RANK_TOLERANCE` times the largest.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().singular_values();
    let largest = sv.iter().cloned().fold(0.0_f64, f64::max);
    if largest == 0.0 || !largest.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s >= RANK_TOLERANCE * largest).count()
}

/// Least-squares fit of `y` on the columns of `x` via orthogonal decomposition.
pub fn least_squares(x: &SeriesMatrix, y: &[f64]) -> Result<LeastSquares> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} rows, regressors have {}",
            y.len(),
            x.nrows()
        )));
    }
    QrFactor::new(x.as_matrix().clone())?.solve(y)
}

/// Running sums `out[t] = v[0] + ... + v[t]`.
pub fn partial_sums(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Index (1-based) of the order statistic returned for `level` among `n` draws.
pub fn quantile_rank(n: usize, level: f64) -> usize {
    // ceil(level * n), guarded against products like 0.07 * 100 = 7.000000000000001
    let raw = (level * n as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(n)
}

/// Lower empirical quantile: the `ceil(level * N)`-th order statistic, no interpolation.
pub fn empirical_quantile(draws: &[f64], level: f64) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_of_sorted(&sorted, level)
}

/// As [`empirical_quantile`] for draws already sorted ascending.
pub fn quantile_of_sorted(sorted: &[f64], level: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "quantile level must lie in (0, 1), got {level}"
        )));
    }
    Ok(sorted[quantile_rank(sorted.len(), level) - 1])
}

/// Reproducible random source keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id selecting an independent keystream,
/// so a replication's draws never depend on which worker produces them.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = StandardNormal.sample(&mut self.rng);
        }
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}
