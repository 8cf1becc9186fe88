//! Truncated singular-value decomposition of the frequency matrix, spectrum
//! outlier counting, and the leading-factor positivity diagnostic.
//!
//! The decomposition works on the Gram matrix of the smaller side (X·Xᵀ or
//! Xᵀ·X), whose symmetric eigendecomposition gives one set of factors; the
//! other side follows from v = Xᵀf/θ. Memory is O(min(m,B)²), so callers
//! restrict the matrix to the top words first.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::FrequencyView;

const GRAM_CHUNK: usize = 512;

/// Column-major sparse real matrix; rows are words, columns documents.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumns {
    nrows: usize,
    cols: Vec<Vec<(u32, f64)>>,
}

impl SparseColumns {
    /// View a frequency matrix as sparse columns. Empty documents stay as
    /// zero columns so factor rows keep their document indices.
    pub fn from_frequencies(freq: &FrequencyView) -> SparseColumns {
        let cols = (0..freq.num_docs())
            .map(|b| freq.col(b).map(|(w, x)| (w as u32, x)).collect())
            .collect();
        SparseColumns {
            nrows: freq.num_words(),
            cols,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> SparseColumns {
        let cols = (0..m.ncols())
            .map(|j| {
                (0..m.nrows())
                    .filter_map(|i| {
                        let v = m[(i, j)];
                        (v != 0.0).then_some((i as u32, v))
                    })
                    .collect()
            })
            .collect();
        SparseColumns {
            nrows: m.nrows(),
            cols,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn transpose(&self) -> SparseColumns {
        let mut cols = vec![Vec::new(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                cols[i as usize].push((j as u32, v));
            }
        }
        SparseColumns {
            nrows: self.cols.len(),
            cols,
        }
    }

    /// X·v
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.ncols());
        let mut out = vec![0.0; self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            let vj = v[j];
            if vj != 0.0 {
                for &(i, x) in col {
                    out[i as usize] += x * vj;
                }
            }
        }
        out
    }

    /// Xᵀ·u
    pub fn tr_matvec(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.nrows);
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(i, x)| x * u[i as usize]).sum())
            .collect()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.cols
            .iter()
            .flatten()
            .map(|&(_, v)| v * v)
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols());
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                m[(i as usize, j)] = v;
            }
        }
        m
    }
}

/// Rank-s factorization X ≈ Σ_k θ_k f_k v_kᵀ with θ₁ ≥ … ≥ θ_s > 0 and
/// orthonormal factor columns. The sign convention makes the
/// largest-magnitude entry of each word factor positive.
#[derive(Debug, Clone)]
pub struct FactorDecomposition {
    pub thetas: Vec<f64>,
    /// m×s; column k is the word factor f_k.
    pub word_factors: DMatrix<f64>,
    /// B×s; column k is the document factor v_k.
    pub book_factors: DMatrix<f64>,
}

impl FactorDecomposition {
    pub fn rank(&self) -> usize {
        self.thetas.len()
    }

    /// Dense Σ_k θ_k f_k v_kᵀ; for diagnostics on desk-scale matrices.
    pub fn reconstruction(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.thetas));
        &self.word_factors * d * self.book_factors.transpose()
    }

    /// Frobenius norm of X − reconstruction.
    pub fn residual_frobenius(&self, x: &SparseColumns) -> f64 {
        (x.to_dense() - self.reconstruction()).norm()
    }
}

/// Top-s singular triples of a sparse matrix.
pub fn truncated_svd_sparse(x: &SparseColumns, s: usize) -> Result<FactorDecomposition> {
    let (m, b) = (x.nrows(), x.ncols());
    let max_s = m.min(b);
    if s == 0 || s > max_s {
        return Err(Error::InvalidArgument(format!(
            "rank s={s} must satisfy 1 <= s <= min(m={m}, B={b})"
        )));
    }

    let rows_side = m <= b;
    let gram = if rows_side {
        gram_of_rows(x)
    } else {
        gram_of_rows(&x.transpose())
    };
    let (lambdas, vectors) = sym_eig_desc(gram);

    let lam1 = lambdas[0].max(0.0);
    if lam1 <= 0.0 {
        return Err(Error::InvalidArgument(
            "matrix has no nonzero entries".into(),
        ));
    }
    let rank_tol = lam1 * 1e-24;

    let mut thetas = Vec::with_capacity(s);
    let mut word_factors = DMatrix::zeros(m, s);
    let mut book_factors = DMatrix::zeros(b, s);
    for k in 0..s {
        let lam = lambdas[k];
        if lam <= rank_tol {
            return Err(Error::InvalidArgument(format!(
                "requested rank {s} exceeds the numerical rank {k} of the matrix"
            )));
        }
        let theta = lam.sqrt();
        let primary: Vec<f64> = vectors.column(k).iter().copied().collect();
        let (mut f, mut v) = if rows_side {
            let mut other = x.tr_matvec(&primary);
            normalize(&mut other);
            (primary, other)
        } else {
            let mut other = x.matvec(&primary);
            normalize(&mut other);
            (other, primary)
        };
        if largest_magnitude_entry(&f) < 0.0 {
            for e in f.iter_mut().chain(v.iter_mut()) {
                *e = -*e;
            }
        }
        thetas.push(theta);
        word_factors.column_mut(k).copy_from_slice(&f);
        book_factors.column_mut(k).copy_from_slice(&v);
    }

    Ok(FactorDecomposition {
        thetas,
        word_factors,
        book_factors,
    })
}

/// Decompose a frequency matrix (the standard entry point).
pub fn truncated_svd(freq: &FrequencyView, s: usize) -> Result<FactorDecomposition> {
    truncated_svd_sparse(&SparseColumns::from_frequencies(freq), s)
}

/// All min(m,B) singular values, descending. Zeros appear when the matrix is
/// rank deficient.
pub fn singular_spectrum(x: &SparseColumns) -> Vec<f64> {
    let (m, b) = (x.nrows(), x.ncols());
    if m.min(b) == 0 {
        return Vec::new();
    }
    let gram = if m <= b {
        gram_of_rows(x)
    } else {
        gram_of_rows(&x.transpose())
    };
    let (lambdas, _) = sym_eig_desc(gram);
    lambdas.into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

/// Recover document factors from word factors: v_k = Xᵀ f_k / θ_k, then
/// normalized to unit length. With factors from [`truncated_svd`] this
/// reproduces its `book_factors`.
pub fn book_factors_from_word_factors(
    x: &SparseColumns,
    thetas: &[f64],
    word_factors: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if word_factors.nrows() != x.nrows() || word_factors.ncols() != thetas.len() {
        return Err(Error::DimensionMismatch(format!(
            "word factors are {}×{} but the matrix has {} rows and {} thetas given",
            word_factors.nrows(),
            word_factors.ncols(),
            x.nrows(),
            thetas.len()
        )));
    }
    if let Some(&bad) = thetas.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "singular value {bad} is not positive"
        )));
    }
    let mut out = DMatrix::zeros(x.ncols(), thetas.len());
    for (k, &theta) in thetas.iter().enumerate() {
        let f: Vec<f64> = word_factors.column(k).iter().copied().collect();
        let mut v = x.tr_matvec(&f);
        for e in &mut v {
            *e /= theta;
        }
        normalize(&mut v);
        out.column_mut(k).copy_from_slice(&v);
    }
    Ok(out)
}

/// Spectrum outlier policy: the bulk is summarized by the median and IQR of
/// the lowest `bulk_fraction` of the eigenvalues, and anything above
/// median + `iqr_multiplier`·IQR counts as an outlier.
#[derive(Debug, Clone)]
pub struct OutlierPolicy {
    pub bulk_fraction: f64,
    pub iqr_multiplier: f64,
}

impl Default for OutlierPolicy {
    fn default() -> Self {
        OutlierPolicy {
            bulk_fraction: 0.9,
            iqr_multiplier: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutlierReport {
    pub count: usize,
    pub bulk_edge: f64,
    pub bulk_median: f64,
    pub bulk_iqr: f64,
    /// Largest spacings λ_k − λ_{k+1} of the sorted spectrum, as (k, gap),
    /// biggest first.
    pub top_gaps: Vec<(usize, f64)>,
}

/// Count spectrum entries above the bulk edge. `spectrum` holds eigenvalues
/// of X·Xᵀ (θ², not θ); the order need not be sorted. The count is invariant
/// under scaling the spectrum by any positive constant.
pub fn count_outliers(spectrum: &[f64], policy: &OutlierPolicy) -> Result<OutlierReport> {
    if spectrum.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 eigenvalues to separate bulk from outliers, have {}",
            spectrum.len()
        )));
    }
    if !(policy.bulk_fraction > 0.0 && policy.bulk_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bulk_fraction {} outside (0, 1]",
            policy.bulk_fraction
        )));
    }
    if !(policy.iqr_multiplier >= 0.0 && policy.iqr_multiplier.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "iqr_multiplier {} must be finite and nonnegative",
            policy.iqr_multiplier
        )));
    }
    if spectrum.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "spectrum contains non-finite entries".into(),
        ));
    }

    let mut asc = spectrum.to_vec();
    asc.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = asc.len();
    let bulk_len = ((n as f64) * policy.bulk_fraction).floor() as usize;
    if bulk_len < 4 {
        return Err(Error::InvalidArgument(format!(
            "bulk sample of {bulk_len} values is too small for quartiles"
        )));
    }
    let bulk = &asc[..bulk_len];
    let median = quantile(bulk, 0.5);
    let iqr = quantile(bulk, 0.75) - quantile(bulk, 0.25);
    let edge = median + policy.iqr_multiplier * iqr;
    let count = asc.iter().filter(|&&v| v > edge).count();

    let mut gaps: Vec<(usize, f64)> = asc
        .windows(2)
        .rev()
        .enumerate()
        .map(|(k, pair)| (k + 1, pair[1] - pair[0]))
        .collect();
    gaps.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    gaps.truncate(5);

    Ok(OutlierReport {
        count,
        bulk_edge: edge,
        bulk_median: median,
        bulk_iqr: iqr,
        top_gaps: gaps,
    })
}

#[derive(Debug, Clone)]
pub struct PositivityReport {
    pub all_positive: bool,
    pub num_nonpositive: usize,
    /// Cosine similarity between f₁ and the mean frequency column.
    pub cosine_with_mean: f64,
}

/// Check the sign structure of the leading word factor. Entries below
/// 10⁻¹²·max|f₁| count as nonpositive, so words absent from every document
/// (exact zero rows) are flagged rather than passed on rounding noise.
pub fn leading_vector_positivity(
    decomp: &FactorDecomposition,
    x: &SparseColumns,
) -> PositivityReport {
    let f1 = decomp.word_factors.column(0);
    let max_abs = f1.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = 1e-12 * max_abs;
    let num_nonpositive = f1.iter().filter(|&&v| v <= tol).count();

    let mut mean = vec![0.0; x.nrows()];
    for col in &x.cols {
        for &(i, v) in col {
            mean[i as usize] += v;
        }
    }
    let ncols = x.ncols() as f64;
    for v in &mut mean {
        *v /= ncols;
    }
    let dot: f64 = f1.iter().zip(&mean).map(|(a, b)| a * b).sum();
    let nf = f1.norm();
    let nm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
    let cosine = if nf > 0.0 && nm > 0.0 {
        dot / (nf * nm)
    } else {
        f64::NAN
    };

    PositivityReport {
        all_positive: num_nonpositive == 0,
        num_nonpositive,
        cosine_with_mean: cosine,
    }
}

/// Gram matrix X·Xᵀ over the rows of x, accumulated per column chunk in a
/// fixed order so results do not depend on thread count.
fn gram_of_rows(x: &SparseColumns) -> DMatrix<f64> {
    let n = x.nrows;
    let partials: Vec<DMatrix<f64>> = x
        .cols
        .par_chunks(GRAM_CHUNK)
        .map(|chunk| {
            let mut g = DMatrix::zeros(n, n);
            for col in chunk {
                for (a, &(i, vi)) in col.iter().enumerate() {
                    for &(j, vj) in &col[a..] {
                        g[(i as usize, j as usize)] += vi * vj;
                    }
                }
            }
            g
        })
        .collect();
    let mut g = DMatrix::zeros(n, n);
    for p in partials {
        g += p;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            g[(j, i)] = g[(i, j)];
        }
    }
    g
}

fn sym_eig_desc(g: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = g.nrows();
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.column_mut(k).copy_from(&eig.eigenvectors.column(i));
    }
    (values, vectors)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for e in v {
            *e /= norm;
        }
    }
}

fn largest_magnitude_entry(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &e in v {
        if e.abs() > best.abs() {
            best = e;
        }
    }
    best
}

fn quantile(sorted_asc: &[f64], q: f64) -> f64 {
    let h = (sorted_asc.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted_asc.len() {
        sorted_asc[lo] + frac * (sorted_asc[lo + 1] - sorted_asc[lo])
    } else {
        sorted_asc[lo]
    }
}
