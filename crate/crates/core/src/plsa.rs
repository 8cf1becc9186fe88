//! Aspect-model topic decomposition fitted by expectation–maximization over
//! the nonzero cells of a count matrix: P(w|b) = Σ_z P(w|z) P(z|b).

use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::TermDocMatrix;
use crate::sampling::sample_dirichlet;

const DOC_CHUNK: usize = 256;

#[derive(Debug, Clone)]
pub struct PlsaModel {
    /// s×N; row z is P(w|z).
    pub word_given_topic: Array2<f64>,
    /// B×s; row b is P(z|b).
    pub topic_given_doc: Array2<f64>,
    /// Log-likelihood before each applied update; the last entry belongs to
    /// the returned matrices.
    pub loglik_trace: Vec<f64>,
    /// EM updates actually applied.
    pub iterations: usize,
    pub converged: bool,
}

impl PlsaModel {
    pub fn num_topics(&self) -> usize {
        self.word_given_topic.nrows()
    }

    pub fn num_words(&self) -> usize {
        self.word_given_topic.ncols()
    }

    pub fn num_docs(&self) -> usize {
        self.topic_given_doc.nrows()
    }

    pub fn final_loglik(&self) -> f64 {
        *self.loglik_trace.last().expect("trace is never empty")
    }

    pub fn loglik(&self, counts: &TermDocMatrix) -> Result<f64> {
        plsa_loglik(
            counts,
            self.word_given_topic.view(),
            self.topic_given_doc.view(),
        )
    }
}

pub enum PlsaInit {
    /// Random start: every row drawn from a flat Dirichlet with the given seed.
    Seed(u64),
    /// Resume from explicit row-stochastic matrices (checkpoint restart).
    Warm {
        word_given_topic: Array2<f64>,
        topic_given_doc: Array2<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct PlsaOptions {
    pub max_iters: usize,
    /// Stop when the per-iteration log-likelihood gain drops to
    /// rel_tol·|loglik|.
    pub rel_tol: f64,
}

impl Default for PlsaOptions {
    fn default() -> Self {
        PlsaOptions {
            max_iters: 2000,
            rel_tol: 1e-9,
        }
    }
}

/// Corpus log-likelihood Σ_{b,w} n_bw · ln Σ_z P(w|z) P(z|b) over nonzero
/// cells. An observed cell with zero model probability is an error, not −∞.
pub fn plsa_loglik(
    counts: &TermDocMatrix,
    word_given_topic: ArrayView2<f64>,
    topic_given_doc: ArrayView2<f64>,
) -> Result<f64> {
    check_dims(counts, &word_given_topic, &topic_given_doc)?;
    check_stochastic("word_given_topic", &word_given_topic)?;
    check_stochastic("topic_given_doc", &topic_given_doc)?;
    let s = word_given_topic.nrows();
    let docs: Vec<usize> = (0..counts.num_docs()).collect();
    let partials: Vec<Result<f64>> = docs
        .par_chunks(DOC_CHUNK)
        .map(|chunk| {
            let mut ll = 0.0;
            for &b in chunk {
                for &(w, n) in counts.col(b) {
                    let w = w as usize;
                    let mut p = 0.0;
                    for z in 0..s {
                        p += word_given_topic[(z, w)] * topic_given_doc[(b, z)];
                    }
                    if !(p > 0.0) {
                        return Err(Error::ZeroProbability { word: w, doc: b });
                    }
                    ll += f64::from(n) * p.ln();
                }
            }
            Ok(ll)
        })
        .collect();
    let mut total = 0.0;
    for p in partials {
        total += p?;
    }
    Ok(total)
}

/// Fit by EM from the given start. The trace is non-decreasing up to
/// rounding; convergence is declared when the gain falls to rel_tol·|L|.
pub fn plsa_em(
    counts: &TermDocMatrix,
    num_topics: usize,
    init: PlsaInit,
    opts: &PlsaOptions,
) -> Result<PlsaModel> {
    if num_topics == 0 {
        return Err(Error::InvalidArgument("need at least one topic".into()));
    }
    if counts.num_docs() == 0 || counts.num_words() == 0 {
        return Err(Error::EmptyCorpus);
    }
    if counts.nnz() == 0 {
        return Err(Error::AllDocumentsEmpty);
    }
    if !(opts.rel_tol >= 0.0 && opts.rel_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rel_tol {} must be finite and nonnegative",
            opts.rel_tol
        )));
    }
    let occupied = counts.word_totals().iter().filter(|&&t| t > 0).count();
    if occupied < num_topics {
        log::warn!(
            "{num_topics} topics over {occupied} occupied words: some topics must stay degenerate"
        );
    }

    let (mut pwz, mut pzb) = init_matrices(counts, num_topics, init)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut applied = 0usize;
    loop {
        let step = e_step(counts, &pwz, &pzb)?;
        trace.push(step.loglik);
        if trace.len() >= 2 {
            let prev = trace[trace.len() - 2];
            let gain = step.loglik - prev;
            if gain <= opts.rel_tol * prev.abs() {
                converged = true;
                break;
            }
        }
        if applied == opts.max_iters {
            break;
        }
        m_step(&step, &mut pwz, &mut pzb);
        applied += 1;
    }

    Ok(PlsaModel {
        word_given_topic: pwz,
        topic_given_doc: pzb,
        loglik_trace: trace,
        iterations: applied,
        converged,
    })
}

struct EStep {
    loglik: f64,
    /// s×N expected word–topic counts.
    word_topic: Array2<f64>,
    /// per-document expected topic counts, corpus order.
    doc_topic: Vec<Array1<f64>>,
}

struct ChunkOut {
    loglik: f64,
    word_topic: Array2<f64>,
    doc_topic: Vec<Array1<f64>>,
}

fn e_step(counts: &TermDocMatrix, pwz: &Array2<f64>, pzb: &Array2<f64>) -> Result<EStep> {
    let s = pwz.nrows();
    let n = pwz.ncols();
    let docs: Vec<usize> = (0..counts.num_docs()).collect();
    // fixed chunking plus an ordered sequential merge keeps the result
    // independent of the worker count
    let chunks: Vec<Result<ChunkOut>> = docs
        .par_chunks(DOC_CHUNK)
        .map(|chunk| {
            let mut word_topic = Array2::<f64>::zeros((s, n));
            let mut doc_topic = Vec::with_capacity(chunk.len());
            let mut loglik = 0.0;
            let mut cell = vec![0.0; s];
            for &b in chunk {
                let mut nd = Array1::<f64>::zeros(s);
                for &(w, cnt) in counts.col(b) {
                    let w = w as usize;
                    let mut denom = 0.0;
                    for z in 0..s {
                        let v = pwz[(z, w)] * pzb[(b, z)];
                        cell[z] = v;
                        denom += v;
                    }
                    if !(denom > 0.0) {
                        return Err(Error::ZeroProbability { word: w, doc: b });
                    }
                    let cnt = f64::from(cnt);
                    loglik += cnt * denom.ln();
                    let scale = cnt / denom;
                    for z in 0..s {
                        let inc = cell[z] * scale;
                        word_topic[(z, w)] += inc;
                        nd[z] += inc;
                    }
                }
                doc_topic.push(nd);
            }
            Ok(ChunkOut {
                loglik,
                word_topic,
                doc_topic,
            })
        })
        .collect();

    let mut out = EStep {
        loglik: 0.0,
        word_topic: Array2::zeros((s, n)),
        doc_topic: Vec::with_capacity(counts.num_docs()),
    };
    for chunk in chunks {
        let chunk = chunk?;
        out.loglik += chunk.loglik;
        out.word_topic += &chunk.word_topic;
        out.doc_topic.extend(chunk.doc_topic);
    }
    Ok(out)
}

fn m_step(step: &EStep, pwz: &mut Array2<f64>, pzb: &mut Array2<f64>) {
    let (s, n) = pwz.dim();
    for z in 0..s {
        let total: f64 = step.word_topic.row(z).sum();
        if total > 0.0 {
            for w in 0..n {
                pwz[(z, w)] = step.word_topic[(z, w)] / total;
            }
        } else {
            log::warn!("topic {z} received no mass; resetting it to uniform");
            pwz.row_mut(z).fill(1.0 / n as f64);
        }
    }
    for (b, nd) in step.doc_topic.iter().enumerate() {
        let total: f64 = nd.sum();
        if total > 0.0 {
            for z in 0..s {
                pzb[(b, z)] = nd[z] / total;
            }
        } else {
            pzb.row_mut(b).fill(1.0 / s as f64);
        }
    }
}

fn init_matrices(
    counts: &TermDocMatrix,
    s: usize,
    init: PlsaInit,
) -> Result<(Array2<f64>, Array2<f64>)> {
    match init {
        PlsaInit::Seed(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = counts.num_words();
            let b = counts.num_docs();
            let flat_n = vec![1.0; n];
            let flat_s = vec![1.0; s];
            let mut pwz = Array2::zeros((s, n));
            for z in 0..s {
                let row = sample_dirichlet(&mut rng, &flat_n);
                for (w, v) in row.into_iter().enumerate() {
                    pwz[(z, w)] = v;
                }
            }
            let mut pzb = Array2::zeros((b, s));
            for d in 0..b {
                let row = sample_dirichlet(&mut rng, &flat_s);
                for (z, v) in row.into_iter().enumerate() {
                    pzb[(d, z)] = v;
                }
            }
            Ok((pwz, pzb))
        }
        PlsaInit::Warm {
            word_given_topic,
            topic_given_doc,
        } => {
            if word_given_topic.nrows() != s {
                return Err(Error::DimensionMismatch(format!(
                    "warm start has {} topics, requested {s}",
                    word_given_topic.nrows()
                )));
            }
            check_dims(counts, &word_given_topic.view(), &topic_given_doc.view())?;
            check_stochastic("word_given_topic", &word_given_topic.view())?;
            check_stochastic("topic_given_doc", &topic_given_doc.view())?;
            Ok((word_given_topic, topic_given_doc))
        }
    }
}

fn check_dims(
    counts: &TermDocMatrix,
    pwz: &ArrayView2<f64>,
    pzb: &ArrayView2<f64>,
) -> Result<()> {
    let s = pwz.nrows();
    if s == 0 || pzb.ncols() != s {
        return Err(Error::DimensionMismatch(format!(
            "word matrix has {s} topics, document matrix has {}",
            pzb.ncols()
        )));
    }
    if pwz.ncols() != counts.num_words() || pzb.nrows() != counts.num_docs() {
        return Err(Error::DimensionMismatch(format!(
            "model is {}×{} words / {}×{} docs against a {}×{} count matrix",
            s,
            pwz.ncols(),
            pzb.nrows(),
            pzb.ncols(),
            counts.num_words(),
            counts.num_docs()
        )));
    }
    Ok(())
}

fn check_stochastic(name: &str, m: &ArrayView2<f64>) -> Result<()> {
    for (i, row) in m.rows().into_iter().enumerate() {
        let mut sum = 0.0;
        for &v in row {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSimplex(format!(
                    "{name} row {i} has entry {v}"
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidSimplex(format!(
                "{name} row {i} sums to {sum}"
            )));
        }
    }
    Ok(())
}
