//! Corpus simulator with known ground truth, the oracle for everything else:
//! i.i.d. token streams, fixed-mixture documents, and Dirichlet-mixed topic
//! documents, plus canned experiments (null calibration of the variation
//! statistic and power-law emergence under two-topic priors).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lda::{two_topic_moments, TwoTopicPrior};
use crate::matrix::count_matrix;
use crate::sampling::{sample_dirichlet, Categorical};
use crate::varstats::{
    cross_text_moments, fit_power_law_points, normalized_variance, pooled_frequency, PowerLawFit,
};

/// Synthetic corpus description; serializes to/from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub doc_length: DocLength,
    pub mode: GeneratorMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DocLength {
    Fixed { tokens: u32 },
    Uniform { min: u32, max: u32 },
}

impl DocLength {
    fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        match *self {
            DocLength::Fixed { tokens } => tokens,
            DocLength::Uniform { min, max } => rng.random_range(min..=max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorMode {
    /// Every token of every document drawn from one fixed distribution.
    Iid { probs: Vec<f64>, num_docs: u32 },
    /// Fixed per-document topic weights (one row per document).
    Plsa {
        word_given_topic: Vec<Vec<f64>>,
        topic_given_doc: Vec<Vec<f64>>,
    },
    /// Topic weights drawn per document from Dir(alpha).
    Lda {
        word_given_topic: Vec<Vec<f64>>,
        alpha: Vec<f64>,
        num_docs: u32,
    },
}

/// What the simulator knows and a fitted model does not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationTruth {
    /// Per-document topic weights; empty for i.i.d. corpora.
    pub thetas: Vec<Vec<f64>>,
    /// Per-token topic assignments; empty for i.i.d. corpora.
    pub assignments: Vec<Vec<u16>>,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if let DocLength::Uniform { min, max } = self.doc_length {
            if min < 1 || min > max {
                return Err(Error::InvalidArgument(format!(
                    "document length range {min}..={max} is invalid"
                )));
            }
        }
        match &self.mode {
            GeneratorMode::Iid { probs, num_docs } => {
                if *num_docs == 0 {
                    return Err(Error::InvalidArgument("need at least one document".into()));
                }
                check_simplex(probs, "token distribution")?;
            }
            GeneratorMode::Plsa {
                word_given_topic,
                topic_given_doc,
            } => {
                let s = check_topic_rows(word_given_topic)?;
                if topic_given_doc.is_empty() {
                    return Err(Error::InvalidArgument("need at least one document".into()));
                }
                for (b, row) in topic_given_doc.iter().enumerate() {
                    if row.len() != s {
                        return Err(Error::DimensionMismatch(format!(
                            "document {b} mixes {} topics, model has {s}",
                            row.len()
                        )));
                    }
                    check_simplex(row, "topic weights")?;
                }
            }
            GeneratorMode::Lda {
                word_given_topic,
                alpha,
                num_docs,
            } => {
                if *num_docs == 0 {
                    return Err(Error::InvalidArgument("need at least one document".into()));
                }
                let s = check_topic_rows(word_given_topic)?;
                if alpha.len() != s {
                    return Err(Error::DimensionMismatch(format!(
                        "{} prior shapes for {s} topics",
                        alpha.len()
                    )));
                }
                if let Some(&a) = alpha.iter().find(|&&a| !(a > 0.0) || !a.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "Dirichlet shape {a} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_docs(&self) -> usize {
        match &self.mode {
            GeneratorMode::Iid { num_docs, .. } | GeneratorMode::Lda { num_docs, .. } => {
                *num_docs as usize
            }
            GeneratorMode::Plsa { topic_given_doc, .. } => topic_given_doc.len(),
        }
    }

    pub fn num_words(&self) -> usize {
        match &self.mode {
            GeneratorMode::Iid { probs, .. } => probs.len(),
            GeneratorMode::Plsa { word_given_topic, .. }
            | GeneratorMode::Lda { word_given_topic, .. } => {
                word_given_topic.first().map_or(0, Vec::len)
            }
        }
    }

    /// Produce the corpus and its ground truth. Each document has its own
    /// random stream, so document b is identical no matter how many other
    /// documents are requested or how many threads run.
    pub fn generate(&self) -> Result<(Corpus, GenerationTruth)> {
        self.validate()?;
        let n = self.num_words();
        let words: Vec<String> = (0..n).map(word_name).collect();

        let topic_samplers: Vec<Categorical> = match &self.mode {
            GeneratorMode::Iid { probs, .. } => vec![Categorical::new(probs)?],
            GeneratorMode::Plsa { word_given_topic, .. }
            | GeneratorMode::Lda { word_given_topic, .. } => word_given_topic
                .iter()
                .map(|row| Categorical::new(row))
                .collect::<Result<_>>()?,
        };

        let num_docs = self.num_docs();
        let per_doc: Vec<(Vec<u32>, Vec<f64>, Vec<u16>)> = (0..num_docs)
            .into_par_iter()
            .map(|b| {
                let mut rng = doc_rng(self.seed, b);
                let tokens = self.doc_length.sample(&mut rng) as usize;
                match &self.mode {
                    GeneratorMode::Iid { .. } => {
                        let dist = &topic_samplers[0];
                        let toks = (0..tokens).map(|_| dist.sample(&mut rng) as u32).collect();
                        (toks, Vec::new(), Vec::new())
                    }
                    GeneratorMode::Plsa { topic_given_doc, .. } => {
                        let theta = topic_given_doc[b].clone();
                        let (toks, asg) =
                            sample_mixture_doc(&mut rng, &theta, &topic_samplers, tokens);
                        (toks, theta, asg)
                    }
                    GeneratorMode::Lda { alpha, .. } => {
                        let theta = sample_dirichlet(&mut rng, alpha);
                        let (toks, asg) =
                            sample_mixture_doc(&mut rng, &theta, &topic_samplers, tokens);
                        (toks, theta, asg)
                    }
                }
            })
            .collect();

        let mut docs = Vec::with_capacity(num_docs);
        let mut thetas = Vec::new();
        let mut assignments = Vec::new();
        let iid = matches!(self.mode, GeneratorMode::Iid { .. });
        for (b, (toks, theta, asg)) in per_doc.into_iter().enumerate() {
            docs.push((format!("doc{b:05}"), toks));
            if !iid {
                thetas.push(theta);
                assignments.push(asg);
            }
        }
        let corpus = Corpus::from_indexed(words, docs);
        Ok((corpus, GenerationTruth { thetas, assignments }))
    }
}

/// Independent ChaCha stream for one document.
pub fn doc_rng(seed: u64, doc: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(doc as u64 + 1);
    rng
}

fn sample_mixture_doc(
    rng: &mut ChaCha8Rng,
    theta: &[f64],
    topics: &[Categorical],
    tokens: usize,
) -> (Vec<u32>, Vec<u16>) {
    let mixer = Categorical::new(theta).expect("validated topic weights");
    let mut toks = Vec::with_capacity(tokens);
    let mut asg = Vec::with_capacity(tokens);
    for _ in 0..tokens {
        let z = mixer.sample(rng);
        let w = topics[z].sample(rng);
        toks.push(w as u32);
        asg.push(z as u16);
    }
    (toks, asg)
}

fn check_simplex(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidSimplex(format!("{what} is empty")));
    }
    if let Some(&p) = probs.iter().find(|&&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidSimplex(format!(
            "{what} holds invalid entry {p}"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSimplex(format!("{what} sums to {sum}")));
    }
    Ok(())
}

fn check_topic_rows(word_given_topic: &[Vec<f64>]) -> Result<usize> {
    let s = word_given_topic.len();
    if s == 0 {
        return Err(Error::InvalidArgument("need at least one topic".into()));
    }
    if s > usize::from(u16::MAX) {
        return Err(Error::InvalidArgument(format!(
            "{s} topics exceed the assignment encoding limit"
        )));
    }
    let n = word_given_topic[0].len();
    for (z, row) in word_given_topic.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "topic {z} emits {} words, topic 0 emits {n}",
                row.len()
            )));
        }
        check_simplex(row, "topic emission row")?;
    }
    Ok(s)
}

/// Synthetic vocabulary entry: 'w' plus four base-26 letters.
pub fn word_name(i: usize) -> String {
    assert!(i < 26usize.pow(4), "vocabulary name space exhausted");
    let mut s = String::with_capacity(5);
    s.push('w');
    let mut rem = i;
    let mut chars = [b'a'; 4];
    for slot in (0..4).rev() {
        chars[slot] = b'a' + (rem % 26) as u8;
        rem /= 26;
    }
    s.push_str(std::str::from_utf8(&chars).expect("ascii"));
    s
}

/// Distribution of the normalized variation statistic on an i.i.d. corpus,
/// where its calibration predicts values near 1.
#[derive(Debug, Clone)]
pub struct NullCalibration {
    /// Per-word statistic, NaN where skipped.
    pub norm_var: Vec<f64>,
    /// Words that actually received a value.
    pub scored: usize,
    pub mean: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
}

pub fn null_calibration_experiment(
    probs: &[f64],
    num_docs: u32,
    doc_tokens: u32,
    seed: u64,
) -> Result<NullCalibration> {
    let spec = GeneratorSpec {
        seed,
        doc_length: DocLength::Fixed { tokens: doc_tokens },
        mode: GeneratorMode::Iid {
            probs: probs.to_vec(),
            num_docs,
        },
    };
    let (corpus, _) = spec.generate()?;
    let matrix = count_matrix(&corpus);
    let p_hat = pooled_frequency(&matrix)?;
    let nv = normalized_variance(&matrix, &p_hat)?;
    let mut observed: Vec<f64> = nv.values.iter().copied().filter(|v| v.is_finite()).collect();
    if observed.is_empty() {
        return Err(Error::DegenerateFit(
            "no word received a variation value".into(),
        ));
    }
    observed.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    Ok(NullCalibration {
        scored: observed.len(),
        mean,
        q05: quantile(&observed, 0.05),
        median: quantile(&observed, 0.5),
        q95: quantile(&observed, 0.95),
        norm_var: nv.values,
    })
}

/// A named generative setting together with the words whose (mean, variance)
/// points the power-law fit should use and the slope the closed-form moments
/// predict for them.
#[derive(Debug, Clone)]
pub struct RegimeSpec {
    pub name: String,
    pub generator: GeneratorSpec,
    pub fit_words: Vec<usize>,
    pub predicted_exponent: f64,
}

#[derive(Debug, Clone)]
pub struct RegimeResult {
    pub name: String,
    /// (mean, variance) per fitted word, in word order.
    pub points: Vec<(f64, f64)>,
    pub fit: PowerLawFit,
    pub predicted_exponent: f64,
}

/// Simulate one regime and fit variance against mean on its scored words.
pub fn powerlaw_emergence_experiment(spec: &RegimeSpec) -> Result<RegimeResult> {
    let (corpus, _) = spec.generator.generate()?;
    let matrix = count_matrix(&corpus);
    let table = cross_text_moments(&matrix, 1.25)?;
    let mut points = Vec::with_capacity(spec.fit_words.len());
    for &w in &spec.fit_words {
        if w >= table.words().len() {
            return Err(Error::InvalidArgument(format!(
                "scored word index {w} outside the vocabulary"
            )));
        }
        points.push((table.mean()[w], table.var()[w]));
    }
    let fit = fit_power_law_points(&points)?;
    Ok(RegimeResult {
        name: spec.name.clone(),
        points,
        fit,
        predicted_exponent: spec.predicted_exponent,
    })
}

/// Slope the two-topic closed forms predict once finite-document sampling
/// noise is added: fits variance E[V̂] = V + (E − E² − V)/T against mean E.
pub fn predicted_two_topic_slope(
    prior: &TwoTopicPrior,
    betas: &[(f64, f64)],
    doc_tokens: f64,
) -> Result<PowerLawFit> {
    if !(doc_tokens >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "document length {doc_tokens} must be at least 1"
        )));
    }
    let mut points = Vec::with_capacity(betas.len());
    for &(b1, b2) in betas {
        let m = two_topic_moments(prior, b1, b2)?;
        let observed = m.variance + (m.mean - m.mean * m.mean - m.variance) / doc_tokens;
        points.push((m.mean, observed));
    }
    fit_power_law_points(&points)
}

/// Three canned regimes demonstrating how the variance-mean slope moves from
/// 1 (pure sampling noise) toward 2 (strong topical mixture):
///
/// * `sampling-noise`: both topics emit identically, so document frequencies
///   are i.i.d. draws and the slope stays at 1.
/// * `two-point-mixture`: near-deterministic topic choice (tiny symmetric
///   prior) with 5x emission contrast pushes the slope close to 2.
/// * `rare-burst`: a rare second topic (Dir(1, 0.01)) over-emitting low
///   frequency words lands in between.
pub fn standard_regimes(seed: u64) -> Vec<RegimeSpec> {
    let noise_probs = geometric_grid(1e-4, 0.03, 24);
    let noise: Vec<(f64, f64)> = noise_probs.iter().map(|&p| (p, p)).collect();
    let mixture: Vec<(f64, f64)> = geometric_grid(5e-3, 0.08, 16)
        .into_iter()
        .map(|p| (p, 0.2 * p))
        .collect();
    let rare: Vec<(f64, f64)> = geometric_grid(8e-5, 1.2e-2, 20)
        .into_iter()
        .map(|p| (p, 2.2 * p.powf(0.7)))
        .collect();

    vec![
        two_topic_regime(
            "sampling-noise",
            seed,
            &noise,
            8,
            TwoTopicPrior::Symmetric { alpha: 1000.0 },
            2000,
            4000,
        ),
        two_topic_regime(
            "two-point-mixture",
            seed.wrapping_add(1),
            &mixture,
            6,
            TwoTopicPrior::Symmetric { alpha: 1e-3 },
            1500,
            6000,
        ),
        two_topic_regime(
            "rare-burst",
            seed.wrapping_add(2),
            &rare,
            8,
            TwoTopicPrior::RareSecond { alpha: 0.01 },
            2000,
            10_000,
        ),
    ]
}

/// Two-topic corpus whose scored words sit first in the vocabulary followed
/// by filler words absorbing the remaining emission mass of each topic.
fn two_topic_regime(
    name: &str,
    seed: u64,
    scored: &[(f64, f64)],
    filler: usize,
    prior: TwoTopicPrior,
    num_docs: u32,
    doc_tokens: u32,
) -> RegimeSpec {
    let sum1: f64 = scored.iter().map(|&(b1, _)| b1).sum();
    let sum2: f64 = scored.iter().map(|&(_, b2)| b2).sum();
    assert!(sum1 < 1.0 && sum2 < 1.0, "scored emissions exceed a topic row");
    let mut row1: Vec<f64> = scored.iter().map(|&(b1, _)| b1).collect();
    let mut row2: Vec<f64> = scored.iter().map(|&(_, b2)| b2).collect();
    row1.extend(std::iter::repeat((1.0 - sum1) / filler as f64).take(filler));
    row2.extend(std::iter::repeat((1.0 - sum2) / filler as f64).take(filler));
    let alpha = match prior {
        TwoTopicPrior::Symmetric { alpha } => vec![alpha, alpha],
        TwoTopicPrior::RareSecond { alpha } => vec![1.0, alpha],
    };
    let predicted = predicted_two_topic_slope(&prior, scored, f64::from(doc_tokens))
        .expect("closed-form slope on validated emissions");
    RegimeSpec {
        name: name.to_string(),
        generator: GeneratorSpec {
            seed,
            doc_length: DocLength::Fixed { tokens: doc_tokens },
            mode: GeneratorMode::Lda {
                word_given_topic: vec![row1, row2],
                alpha,
                num_docs,
            },
        },
        fit_words: (0..scored.len()).collect(),
        predicted_exponent: predicted.exponent,
    }
}

/// n points from lo to hi inclusive with constant ratio.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo, "degenerate grid");
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * ratio.powi(i as i32)
            }
        })
        .collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iid_spec(probs: Vec<f64>, num_docs: u32, tokens: u32, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            seed,
            doc_length: DocLength::Fixed { tokens },
            mode: GeneratorMode::Iid { probs, num_docs },
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec {
            seed: 99,
            doc_length: DocLength::Uniform { min: 5, max: 60 },
            mode: GeneratorMode::Lda {
                word_given_topic: vec![vec![0.6, 0.3, 0.1], vec![0.1, 0.2, 0.7]],
                alpha: vec![0.5, 1.5],
                num_docs: 40,
            },
        };
        let (c1, t1) = spec.generate().unwrap();
        let (c2, t2) = spec.generate().unwrap();
        assert_eq!(t1, t2);
        assert_eq!(c1.documents.len(), c2.documents.len());
        for (a, b) in c1.documents.iter().zip(&c2.documents) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.tokens, b.tokens);
        }
    }

    #[test]
    fn documents_do_not_depend_on_corpus_size() {
        let small = iid_spec(vec![0.5, 0.5], 3, 20, 4).generate().unwrap().0;
        let large = iid_spec(vec![0.5, 0.5], 10, 20, 4).generate().unwrap().0;
        for b in 0..3 {
            assert_eq!(small.documents[b].tokens, large.documents[b].tokens);
        }
    }

    #[test]
    fn point_mass_emits_one_word() {
        let (corpus, truth) = iid_spec(vec![0.0, 1.0, 0.0], 5, 30, 1).generate().unwrap();
        for doc in &corpus.documents {
            assert!(doc.tokens.iter().all(|&t| t == 1));
        }
        assert!(truth.thetas.is_empty());
        assert!(truth.assignments.is_empty());
    }

    #[test]
    fn pooled_frequencies_match_iid_probs() {
        let probs = vec![0.5, 0.3, 0.2];
        let (corpus, _) = iid_spec(probs.clone(), 200, 100, 7).generate().unwrap();
        let matrix = count_matrix(&corpus);
        let total = matrix.total_tokens() as f64;
        assert_eq!(total, 20_000.0);
        for (w, &p) in probs.iter().enumerate() {
            let observed = matrix.word_totals()[w] as f64 / total;
            let se = (p * (1.0 - p) / total).sqrt();
            assert!(
                (observed - p).abs() < 3.0 * se,
                "word {w}: {observed} vs {p}"
            );
        }
    }

    #[test]
    fn dirichlet_thetas_have_the_right_mean() {
        let spec = GeneratorSpec {
            seed: 11,
            doc_length: DocLength::Fixed { tokens: 1 },
            mode: GeneratorMode::Lda {
                word_given_topic: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                alpha: vec![2.0, 5.0],
                num_docs: 2000,
            },
        };
        let (_, truth) = spec.generate().unwrap();
        let mean: f64 = truth.thetas.iter().map(|t| t[0]).sum::<f64>() / 2000.0;
        let want = 2.0 / 7.0;
        let var: f64 = 2.0 * 5.0 / (49.0 * 8.0);
        let se = (var / 2000.0).sqrt();
        assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want}");
    }

    #[test]
    fn tiny_shapes_stay_on_the_simplex() {
        let spec = GeneratorSpec {
            seed: 3,
            doc_length: DocLength::Fixed { tokens: 2 },
            mode: GeneratorMode::Lda {
                word_given_topic: vec![vec![0.7, 0.3], vec![0.3, 0.7]],
                alpha: vec![1e-3, 1e-3],
                num_docs: 500,
            },
        };
        let (_, truth) = spec.generate().unwrap();
        for t in &truth.thetas {
            assert!(t.iter().all(|&v| v.is_finite() && v >= 0.0));
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        // tiny shapes concentrate on vertices
        let extreme = truth
            .thetas
            .iter()
            .filter(|t| t[0] > 0.99 || t[0] < 0.01)
            .count();
        assert!(extreme > 450, "{extreme} of 500 near a vertex");
    }

    #[test]
    fn fixed_mixture_matches_expected_cell_counts() {
        let beta = vec![vec![0.8, 0.15, 0.05], vec![0.1, 0.1, 0.8]];
        let theta = vec![0.3, 0.7];
        let spec = GeneratorSpec {
            seed: 21,
            doc_length: DocLength::Fixed { tokens: 50_000 },
            mode: GeneratorMode::Plsa {
                word_given_topic: beta.clone(),
                topic_given_doc: vec![theta.clone()],
            },
        };
        let (corpus, truth) = spec.generate().unwrap();
        assert_eq!(truth.thetas[0], theta);
        assert_eq!(truth.assignments[0].len(), 50_000);
        let matrix = count_matrix(&corpus);
        for w in 0..3 {
            let p = theta[0] * beta[0][w] + theta[1] * beta[1][w];
            let count = matrix.word_totals()[w] as f64;
            let se = (50_000.0 * p * (1.0 - p)).sqrt();
            assert!(
                (count - 50_000.0 * p).abs() < 3.0 * se,
                "word {w}: {count} vs {}",
                50_000.0 * p
            );
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(iid_spec(vec![0.5, 0.6], 3, 5, 0).validate().is_err());
        assert!(iid_spec(vec![0.5, 0.5], 0, 5, 0).validate().is_err());
        let bad_len = GeneratorSpec {
            seed: 0,
            doc_length: DocLength::Uniform { min: 9, max: 3 },
            mode: GeneratorMode::Iid {
                probs: vec![1.0],
                num_docs: 1,
            },
        };
        assert!(bad_len.validate().is_err());
        let ragged = GeneratorSpec {
            seed: 0,
            doc_length: DocLength::Fixed { tokens: 4 },
            mode: GeneratorMode::Plsa {
                word_given_topic: vec![vec![1.0], vec![0.5, 0.5]],
                topic_given_doc: vec![vec![0.5, 0.5]],
            },
        };
        assert!(ragged.validate().is_err());
        let bad_alpha = GeneratorSpec {
            seed: 0,
            doc_length: DocLength::Fixed { tokens: 4 },
            mode: GeneratorMode::Lda {
                word_given_topic: vec![vec![1.0], vec![1.0]],
                alpha: vec![1.0, 0.0],
                num_docs: 2,
            },
        };
        assert!(bad_alpha.validate().is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = GeneratorSpec {
            seed: 42,
            doc_length: DocLength::Uniform { min: 10, max: 99 },
            mode: GeneratorMode::Lda {
                word_given_topic: vec![vec![0.25, 0.75], vec![0.5, 0.5]],
                alpha: vec![0.125, 2.0],
                num_docs: 17,
            },
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: GeneratorSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        assert!(json.contains("\"kind\":\"lda\""));
        assert!(json.contains("\"kind\":\"uniform\""));
    }

    #[test]
    fn word_names_are_distinct_and_well_formed() {
        assert_eq!(word_name(0), "waaaa");
        assert_eq!(word_name(1), "waaab");
        assert_eq!(word_name(26), "waaba");
        assert_eq!(word_name(456_975), "wzzzz");
        let names: std::collections::HashSet<String> = (0..2000).map(word_name).collect();
        assert_eq!(names.len(), 2000);
    }

    #[test]
    fn geometric_grid_hits_both_ends() {
        let g = geometric_grid(1e-4, 0.03, 24);
        assert_eq!(g.len(), 24);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[23], 0.03);
        for pair in g.windows(2) {
            let ratio = pair[1] / pair[0];
            assert!((ratio - g[1] / g[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn null_calibration_centers_near_one() {
        let mut probs = geometric_grid(1e-3, 0.05, 20);
        let rest: f64 = 1.0 - probs.iter().sum::<f64>();
        probs.push(rest);
        let cal = null_calibration_experiment(&probs, 400, 2000, 13).unwrap();
        assert_eq!(cal.scored, 21);
        assert!(cal.mean > 0.8 && cal.mean < 1.2, "mean {}", cal.mean);
        assert!(cal.median > 0.75 && cal.median < 1.25, "median {}", cal.median);
        assert!(cal.q95 < 1.8, "q95 {}", cal.q95);
        assert!(cal.q05 > 0.5, "q05 {}", cal.q05);
    }

    #[test]
    fn two_topic_marker_matches_closed_forms_with_sampling_correction() {
        let prior = TwoTopicPrior::Symmetric { alpha: 0.4 };
        let (b1, b2) = (0.2, 0.05);
        let m = two_topic_moments(&prior, b1, b2).unwrap();
        let t = 500.0;
        let num_docs = 40_000usize;
        // population-variance estimator: E[σ̂²] = (1 − 1/B)·Var(x̂)
        let expect_var = (m.variance + (m.mean - m.mean * m.mean - m.variance) / t)
            * (1.0 - 1.0 / num_docs as f64);

        let spec = GeneratorSpec {
            seed: 770,
            doc_length: DocLength::Fixed { tokens: 500 },
            mode: GeneratorMode::Lda {
                word_given_topic: vec![vec![b1, 1.0 - b1], vec![b2, 1.0 - b2]],
                alpha: vec![0.4, 0.4],
                num_docs: num_docs as u32,
            },
        };
        let (corpus, _) = spec.generate().unwrap();
        let matrix = count_matrix(&corpus);
        let mut freqs = vec![0.0f64; num_docs];
        for (b, x) in matrix.frequencies().row(0) {
            freqs[b] = x;
        }
        let nb = freqs.len() as f64;
        let mean: f64 = freqs.iter().sum::<f64>() / nb;
        let var: f64 = freqs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nb;
        let m4: f64 = freqs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nb;

        let se_mean = (var / nb).sqrt();
        assert!((mean - m.mean).abs() < 3.0 * se_mean, "{mean} vs {}", m.mean);
        let se_var = ((m4 - var * var) / nb).sqrt();
        assert!(
            (var - expect_var).abs() < 3.0 * se_var,
            "{var} vs {expect_var} ± {se_var}"
        );
    }

    #[test]
    fn mixture_regime_recovers_its_predicted_slope() {
        let scored: Vec<(f64, f64)> = geometric_grid(0.01, 0.08, 8)
            .into_iter()
            .map(|p| (p, 0.2 * p))
            .collect();
        let prior = TwoTopicPrior::Symmetric { alpha: 1e-3 };
        let spec = two_topic_regime("micro", 5, &scored, 4, prior, 400, 1500);
        assert!(spec.predicted_exponent > 1.5, "{}", spec.predicted_exponent);
        let result = powerlaw_emergence_experiment(&spec).unwrap();
        assert!(
            (result.fit.exponent - spec.predicted_exponent).abs() < 0.3,
            "fitted {} vs predicted {}",
            result.fit.exponent,
            spec.predicted_exponent
        );
    }

    #[test]
    fn standard_regimes_order_their_slopes() {
        let regimes = standard_regimes(1);
        assert_eq!(regimes.len(), 3);
        let by_name: std::collections::HashMap<&str, f64> = regimes
            .iter()
            .map(|r| (r.name.as_str(), r.predicted_exponent))
            .collect();
        let noise = by_name["sampling-noise"];
        let mixture = by_name["two-point-mixture"];
        let rare = by_name["rare-burst"];
        assert!((noise - 1.0).abs() < 0.05, "noise slope {noise}");
        assert!(mixture > 1.85 && mixture < 2.0, "mixture slope {mixture}");
        assert!(rare > 1.15 && rare < 1.85, "rare slope {rare}");
        for r in &regimes {
            r.generator.validate().unwrap();
        }
    }
}
