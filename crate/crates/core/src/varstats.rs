//! Per-word frequency dispersion across documents: pooled frequencies,
//! length-normalized variance, cross-text moments, and the variance–mean
//! power-law fit.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::TermDocMatrix;

/// Per-word moment table over a corpus, frequency-ranked.
#[derive(Debug, Clone)]
pub struct MomentTable {
    words: Vec<String>,
    p_hat: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
    norm_var: Vec<f64>,
    y: Vec<f64>,
    rank: Vec<usize>,
    kappa: f64,
    num_active_docs: usize,
}

impl MomentTable {
    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Pooled corpus frequency p̂_w = (Σ_b n_bw) / (Σ_b T_b).
    pub fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    /// Cross-text mean x̄_w of the per-document frequencies.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Population cross-text variance σ²_w (divide by B, not B−1).
    pub fn var(&self) -> &[f64] {
        &self.var
    }

    /// Length-normalized variance V_w; NaN where p̂_w ∈ {0, 1}.
    pub fn norm_var(&self) -> &[f64] {
        &self.norm_var
    }

    /// Scale-compensated dispersion y_w = σ²_w / x̄_w^κ; NaN where x̄_w = 0.
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// 1-based position of each word when sorted by x̄ descending.
    pub fn rank(&self) -> &[usize] {
        &self.rank
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Documents with T_b > 0 that entered the moments.
    pub fn num_active_docs(&self) -> usize {
        self.num_active_docs
    }

    /// Word indices ordered by rank (most frequent first).
    pub fn by_rank(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.num_words()).collect();
        order.sort_by_key(|&w| self.rank[w]);
        order
    }
}

/// Length-normalized variance per word with bookkeeping of skipped rows.
#[derive(Debug, Clone)]
pub struct NormalizedVariance {
    /// V_w; NaN for skipped words.
    pub values: Vec<f64>,
    /// Words with p̂ ∈ {0, 1}, for which V is undefined.
    pub skipped: Vec<usize>,
    /// Number of documents with T_b > 0.
    pub num_active_docs: usize,
}

/// Least-squares power law σ² = a · x̄^κ fitted in log–log space.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    /// Standard error of the exponent; NaN when the fit has no residual
    /// degrees of freedom (exactly two points).
    pub stderr: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Selected words dropped because x̄ = 0 or σ² = 0.
    pub n_excluded: usize,
}

/// Which words enter a fit.
#[derive(Debug, Clone)]
pub enum WordSelection {
    All,
    /// The m words of highest cross-text mean (rank ≤ m).
    TopByMean(usize),
    /// The first m words in vocabulary order.
    FirstInVocabulary(usize),
    /// Explicit word indices.
    Indices(Vec<usize>),
    /// Words with x̄ at or above a reliability cutoff.
    MeanAtLeast(f64),
}

/// Derived σ/x̄ scaling report: exponents obtained from the σ² fit, not by a
/// separate regression.
#[derive(Debug, Clone)]
pub struct VolatilityReport {
    /// Per-word σ_w / x̄_w; NaN where x̄_w = 0.
    pub ratios: Vec<f64>,
    /// Exponent of σ/x̄ as a function of x̄: (κ − 2) / 2.
    pub ratio_exponent: f64,
    /// Exponent of σ itself: κ / 2.
    pub sigma_exponent: f64,
    /// Amplitude of the σ law: √a.
    pub sigma_amplitude: f64,
}

/// Pooled corpus frequencies p̂_w. Documents with T_b = 0 contribute nothing.
pub fn pooled_frequency(matrix: &TermDocMatrix) -> Result<Vec<f64>> {
    if matrix.num_docs() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let t = matrix.total_tokens();
    if t == 0 {
        return Err(Error::AllDocumentsEmpty);
    }
    let t = t as f64;
    Ok(matrix.word_totals().iter().map(|&n| n as f64 / t).collect())
}

/// Length-normalized cross-text variance
/// V_w = (1/B) Σ_b T_b (x_bw − p̂_w)² / (p̂_w (1 − p̂_w)),
/// where B counts documents with T_b > 0. Under an i.i.d. token null this
/// statistic is ≈ 1 for every word regardless of its frequency.
pub fn normalized_variance(matrix: &TermDocMatrix, p_hat: &[f64]) -> Result<NormalizedVariance> {
    if p_hat.len() != matrix.num_words() {
        return Err(Error::DimensionMismatch(format!(
            "p_hat has {} entries for {} words",
            p_hat.len(),
            matrix.num_words()
        )));
    }
    let active: Vec<usize> = (0..matrix.num_docs())
        .filter(|&b| matrix.doc_lengths()[b] > 0)
        .collect();
    if active.is_empty() {
        return Err(Error::AllDocumentsEmpty);
    }
    let b_eff = active.len() as f64;
    let sum_t: f64 = active.iter().map(|&b| matrix.doc_lengths()[b] as f64).sum();

    let mut values = vec![f64::NAN; matrix.num_words()];
    let mut skipped = Vec::new();
    let computed: Vec<Option<f64>> = (0..matrix.num_words())
        .into_par_iter()
        .map(|w| {
            let p = p_hat[w];
            if !(p > 0.0 && p < 1.0) {
                return None;
            }
            // Σ_b T_b (x − p)² over all active docs splits into the nonzero
            // cells, where T_b(x − p)² − T_b p² = n²/T_b − 2np, plus p²·Σ T_b.
            let mut acc = 0.0;
            for &(b, n) in matrix.row(w) {
                let t = matrix.doc_lengths()[b as usize] as f64;
                let n = f64::from(n);
                acc += n * n / t - 2.0 * n * p;
            }
            acc += p * p * sum_t;
            Some((acc / (p * (1.0 - p)) / b_eff).max(0.0))
        })
        .collect();
    for (w, v) in computed.into_iter().enumerate() {
        match v {
            Some(v) => values[w] = v,
            None => skipped.push(w),
        }
    }

    Ok(NormalizedVariance {
        values,
        skipped,
        num_active_docs: active.len(),
    })
}

/// Cross-text first and second moments of per-document frequencies, together
/// with the pooled frequency, normalized variance, dispersion y = σ²/x̄^κ, and
/// the frequency rank of each word.
pub fn cross_text_moments(matrix: &TermDocMatrix, kappa: f64) -> Result<MomentTable> {
    let p_hat = pooled_frequency(matrix)?;
    let norm = normalized_variance(matrix, &p_hat)?;
    let b_eff = norm.num_active_docs as f64;

    let lengths = matrix.doc_lengths();
    let moments: Vec<(f64, f64)> = (0..matrix.num_words())
        .into_par_iter()
        .map(|w| {
            let mut sum = 0.0;
            for &(b, n) in matrix.row(w) {
                sum += f64::from(n) / lengths[b as usize] as f64;
            }
            let mean = sum / b_eff;
            // two-pass population variance; absent cells contribute mean²
            let mut ss = 0.0;
            let mut nnz_active = 0usize;
            for &(b, n) in matrix.row(w) {
                let x = f64::from(n) / lengths[b as usize] as f64;
                ss += (x - mean) * (x - mean);
                nnz_active += 1;
            }
            ss += (b_eff - nnz_active as f64) * mean * mean;
            (mean, (ss / b_eff).max(0.0))
        })
        .collect();

    let mean: Vec<f64> = moments.iter().map(|&(m, _)| m).collect();
    let var: Vec<f64> = moments.iter().map(|&(_, v)| v).collect();
    let y: Vec<f64> = mean
        .iter()
        .zip(&var)
        .map(|(&m, &v)| if m > 0.0 { v / m.powf(kappa) } else { f64::NAN })
        .collect();

    let mut order: Vec<usize> = (0..matrix.num_words()).collect();
    order.sort_by(|&a, &b| {
        mean[b]
            .partial_cmp(&mean[a])
            .expect("means are finite")
            .then(a.cmp(&b))
    });
    let mut rank = vec![0usize; matrix.num_words()];
    for (pos, &w) in order.iter().enumerate() {
        rank[w] = pos + 1;
    }

    Ok(MomentTable {
        words: matrix.words().to_vec(),
        p_hat,
        mean,
        var,
        norm_var: norm.values,
        y,
        rank,
        kappa,
        num_active_docs: norm.num_active_docs,
    })
}

/// Fit ln σ² = ln a + κ ln x̄ by ordinary least squares over the selected
/// words. Words with x̄ = 0 or σ² = 0 are excluded and counted.
pub fn fit_power_law(table: &MomentTable, selection: &WordSelection) -> Result<PowerLawFit> {
    let indices: Vec<usize> = match selection {
        WordSelection::All => (0..table.num_words()).collect(),
        WordSelection::TopByMean(m) => {
            let order = table.by_rank();
            order.into_iter().take(*m).collect()
        }
        WordSelection::FirstInVocabulary(m) => (0..table.num_words().min(*m)).collect(),
        WordSelection::Indices(idx) => {
            if let Some(&bad) = idx.iter().find(|&&w| w >= table.num_words()) {
                return Err(Error::InvalidArgument(format!(
                    "selected word index {bad} out of range"
                )));
            }
            idx.clone()
        }
        WordSelection::MeanAtLeast(cutoff) => (0..table.num_words())
            .filter(|&w| table.mean[w] >= *cutoff)
            .collect(),
    };

    let mut points = Vec::with_capacity(indices.len());
    let mut excluded = 0usize;
    for &w in &indices {
        let (m, v) = (table.mean[w], table.var[w]);
        if m > 0.0 && v > 0.0 {
            points.push((m, v));
        } else {
            excluded += 1;
        }
    }
    let mut fit = fit_power_law_points(&points)?;
    fit.n_excluded = excluded;
    Ok(fit)
}

/// OLS power-law fit on raw (x, y) pairs; both coordinates must be positive.
pub fn fit_power_law_points(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 usable points, have {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::DegenerateFit(format!(
            "nonpositive point ({x}, {y}) cannot enter a log–log fit"
        )));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let my = logs.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in &logs {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::DegenerateFit(
            "all abscissae coincide; slope is undefined".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = (syy - slope * sxy).max(0.0);
    let stderr = if points.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };

    Ok(PowerLawFit {
        amplitude: intercept.exp(),
        exponent: slope,
        stderr,
        r_squared,
        n_points: points.len(),
        n_excluded: 0,
    })
}

/// Derive the σ/x̄ scaling from an existing σ²–x̄ fit: if σ² = a·x̄^κ then
/// σ = √a·x̄^{κ/2} and σ/x̄ = √a·x̄^{(κ−2)/2}.
pub fn volatility_ratio(table: &MomentTable, fit: &PowerLawFit) -> VolatilityReport {
    let ratios = table
        .mean
        .iter()
        .zip(&table.var)
        .map(|(&m, &v)| if m > 0.0 { v.sqrt() / m } else { f64::NAN })
        .collect();
    VolatilityReport {
        ratios,
        ratio_exponent: (fit.exponent - 2.0) / 2.0,
        sigma_exponent: fit.exponent / 2.0,
        sigma_amplitude: fit.amplitude.sqrt(),
    }
}

/// Write the moment table as moments.csv with columns
/// word,rank,p_hat,mean,var,norm_var,y in rank order.
pub fn write_moments_csv(table: &MomentTable, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["word", "rank", "p_hat", "mean", "var", "norm_var", "y"])
        .map_err(|source| Error::Csv {
            path: path.to_owned(),
            source,
        })?;
    for idx in table.by_rank() {
        w.write_record([
            table.words[idx].as_str(),
            &table.rank[idx].to_string(),
            &table.p_hat[idx].to_string(),
            &table.mean[idx].to_string(),
            &table.var[idx].to_string(),
            &table.norm_var[idx].to_string(),
            &table.y[idx].to_string(),
        ])
        .map_err(|source| Error::Csv {
            path: path.to_owned(),
            source,
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Write a fit as fit.csv with columns a,kappa,stderr,r2,n_points.
pub fn write_fit_csv(fit: &PowerLawFit, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["a", "kappa", "stderr", "r2", "n_points"])
        .map_err(|source| Error::Csv {
            path: path.to_owned(),
            source,
        })?;
    w.write_record([
        fit.amplitude.to_string(),
        fit.exponent.to_string(),
        fit.stderr.to_string(),
        fit.r_squared.to_string(),
        fit.n_points.to_string(),
    ])
    .map_err(|source| Error::Csv {
        path: path.to_owned(),
        source,
    })?;
    w.flush().map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}
