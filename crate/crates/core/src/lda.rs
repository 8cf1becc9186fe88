//! Latent Dirichlet topic model fitted by variational EM with full
//! (asymmetric) Dirichlet prior estimation, plus closed-form Dirichlet moment
//! machinery: joint factorial moments, two-topic mean/variance formulas, and
//! the burstiness regime check for rare topics.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::TermDocMatrix;
use crate::sampling::sample_dirichlet;
use crate::special::{digamma, ln_gamma, trigamma};

const DOC_CHUNK: usize = 128;

#[derive(Debug, Clone)]
pub struct LdaModel {
    /// Estimated Dirichlet prior over topics.
    pub alpha: Array1<f64>,
    /// s×N; row z is P(w|z).
    pub beta: Array2<f64>,
    /// B×s variational Dirichlet posteriors over per-document topic weights.
    pub gamma: Array2<f64>,
    /// Evidence lower bound before each applied update; the last entry
    /// belongs to the returned parameters.
    pub elbo_trace: Vec<f64>,
    /// EM updates actually applied.
    pub iterations: usize,
    pub converged: bool,
    /// True when a prior update needed a damped (backtracked) Newton step.
    pub alpha_damped: bool,
}

impl LdaModel {
    pub fn num_topics(&self) -> usize {
        self.beta.nrows()
    }

    pub fn num_words(&self) -> usize {
        self.beta.ncols()
    }

    pub fn num_docs(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn final_elbo(&self) -> f64 {
        *self.elbo_trace.last().expect("trace is never empty")
    }
}

#[derive(Debug, Clone)]
pub struct LdaOptions {
    pub max_iters: usize,
    /// Stop when the per-iteration bound gain drops to rel_tol·|bound|.
    pub rel_tol: f64,
    pub inner_max_iters: usize,
    /// Per-document stop on the relative L1 change of γ.
    pub inner_tol: f64,
    /// Re-estimate the full asymmetric prior each iteration.
    pub estimate_alpha: bool,
    /// Symmetric starting value for every prior component.
    pub initial_alpha: f64,
    /// Iterations with the prior held fixed before estimation begins.
    /// Updating α while the topics are still near their initialization
    /// collapses the prior prematurely and can freeze a contaminated topic
    /// in place, so let β settle first.
    pub alpha_burn_in: usize,
}

impl Default for LdaOptions {
    fn default() -> Self {
        LdaOptions {
            max_iters: 200,
            rel_tol: 1e-8,
            inner_max_iters: 100,
            inner_tol: 1e-8,
            estimate_alpha: true,
            initial_alpha: 1.0,
            alpha_burn_in: 20,
        }
    }
}

/// Fit by variational EM. Per-document posteriors warm-start from the
/// previous iteration, which keeps the bound non-decreasing and the inner
/// loops short.
pub fn lda_fit(
    counts: &TermDocMatrix,
    num_topics: usize,
    seed: u64,
    opts: &LdaOptions,
) -> Result<LdaModel> {
    if num_topics < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 topics, requested {num_topics}"
        )));
    }
    if counts.num_docs() == 0 || counts.num_words() == 0 {
        return Err(Error::EmptyCorpus);
    }
    if counts.nnz() == 0 {
        return Err(Error::AllDocumentsEmpty);
    }
    if !(opts.rel_tol >= 0.0 && opts.rel_tol.is_finite()) || !(opts.inner_tol >= 0.0) {
        return Err(Error::InvalidArgument("tolerances must be nonnegative".into()));
    }
    if !(opts.initial_alpha > 0.0 && opts.initial_alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "initial_alpha {} must be positive",
            opts.initial_alpha
        )));
    }

    let s = num_topics;
    let b_total = counts.num_docs();
    let active: Vec<usize> = (0..b_total)
        .filter(|&b| !counts.col(b).is_empty())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut beta = init_beta(counts, s, &active, &mut rng);
    let mut alpha = Array1::from_elem(s, opts.initial_alpha);

    // warm-start posteriors: γ_z = α_z + (document tokens)/s
    let mut gamma = Array2::zeros((b_total, s));
    for b in 0..b_total {
        let tokens: f64 = counts.col(b).iter().map(|&(_, n)| f64::from(n)).sum();
        for z in 0..s {
            gamma[(b, z)] = alpha[z] + tokens / s as f64;
        }
    }

    let mut trace = Vec::new();
    let mut converged = false;
    let mut applied = 0usize;
    let mut alpha_damped = false;
    loop {
        let es = e_step(counts, &beta, &alpha, &gamma, opts);
        gamma = es.gamma;
        trace.push(es.bound);
        // during burn-in the bound can flatline while α is still pinned at
        // its starting value; only declare convergence once the prior has
        // had a chance to move
        let alpha_settled = !opts.estimate_alpha || applied > opts.alpha_burn_in;
        if trace.len() >= 2 && alpha_settled {
            let prev = trace[trace.len() - 2];
            let gain = es.bound - prev;
            if gain <= opts.rel_tol * prev.abs() {
                converged = true;
                break;
            }
        }
        if applied == opts.max_iters {
            break;
        }
        m_step_beta(&es.sstats, &mut beta);
        if opts.estimate_alpha && applied >= opts.alpha_burn_in {
            alpha_damped |= optimize_alpha(&mut alpha, &es.alpha_stats, active.len() as f64);
        }
        applied += 1;
    }

    Ok(LdaModel {
        alpha,
        beta,
        gamma,
        elbo_trace: trace,
        iterations: applied,
        converged,
        alpha_damped,
    })
}

struct EStepOut {
    bound: f64,
    sstats: Array2<f64>,
    alpha_stats: Array1<f64>,
    gamma: Array2<f64>,
}

struct ChunkOut {
    bound: f64,
    sstats: Array2<f64>,
    alpha_stats: Array1<f64>,
    gamma_rows: Vec<Array1<f64>>,
}

fn e_step(
    counts: &TermDocMatrix,
    beta: &Array2<f64>,
    alpha: &Array1<f64>,
    gamma_warm: &Array2<f64>,
    opts: &LdaOptions,
) -> EStepOut {
    let (s, n) = beta.dim();
    let ln_beta = beta.mapv(f64::ln);
    let alpha_sum: f64 = alpha.sum();
    let ln_gamma_alpha_sum = ln_gamma(alpha_sum);
    let sum_ln_gamma_alpha: f64 = alpha.iter().map(|&a| ln_gamma(a)).sum();

    let docs: Vec<usize> = (0..counts.num_docs()).collect();
    let chunks: Vec<ChunkOut> = docs
        .par_chunks(DOC_CHUNK)
        .map(|chunk| {
            let mut out = ChunkOut {
                bound: 0.0,
                sstats: Array2::zeros((s, n)),
                alpha_stats: Array1::zeros(s),
                gamma_rows: Vec::with_capacity(chunk.len()),
            };
            let mut e_psi = vec![0.0; s];
            let mut next = vec![0.0; s];
            for &b in chunk {
                let col = counts.col(b);
                if col.is_empty() {
                    // no data: the exact posterior is the prior and the
                    // document contributes nothing to the bound
                    out.gamma_rows.push(alpha.clone());
                    continue;
                }
                let mut g: Vec<f64> = gamma_warm.row(b).iter().copied().collect();
                for _ in 0..opts.inner_max_iters {
                    for z in 0..s {
                        e_psi[z] = digamma(g[z]).exp();
                    }
                    for z in 0..s {
                        next[z] = alpha[z];
                    }
                    for &(w, cnt) in col {
                        let w = w as usize;
                        let mut norm = 0.0;
                        for z in 0..s {
                            norm += beta[(z, w)] * e_psi[z];
                        }
                        let cnt = f64::from(cnt);
                        if norm > 0.0 {
                            let scale = cnt / norm;
                            for z in 0..s {
                                next[z] += beta[(z, w)] * e_psi[z] * scale;
                            }
                        } else {
                            for z in 0..s {
                                next[z] += cnt / s as f64;
                            }
                        }
                    }
                    let change: f64 = g.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
                    let scale: f64 = g.iter().sum();
                    g.copy_from_slice(&next);
                    if change <= opts.inner_tol * scale {
                        break;
                    }
                }

                // final pass: bound and expected counts at the settled γ
                let gsum: f64 = g.iter().sum();
                let dig0 = digamma(gsum);
                for z in 0..s {
                    e_psi[z] = digamma(g[z]).exp();
                }
                let mut bound = ln_gamma_alpha_sum - sum_ln_gamma_alpha - ln_gamma(gsum);
                for z in 0..s {
                    let diff = digamma(g[z]) - dig0;
                    bound += (alpha[z] - 1.0) * diff + ln_gamma(g[z]) - (g[z] - 1.0) * diff;
                    out.alpha_stats[z] += diff;
                }
                for &(w, cnt) in col {
                    let w = w as usize;
                    let mut norm = 0.0;
                    for z in 0..s {
                        norm += beta[(z, w)] * e_psi[z];
                    }
                    let cnt = f64::from(cnt);
                    for z in 0..s {
                        let phi = if norm > 0.0 {
                            beta[(z, w)] * e_psi[z] / norm
                        } else {
                            1.0 / s as f64
                        };
                        if phi > 0.0 {
                            let diff = digamma(g[z]) - dig0;
                            bound += cnt * phi * (diff + ln_beta[(z, w)] - phi.ln());
                            out.sstats[(z, w)] += cnt * phi;
                        }
                    }
                }
                out.bound += bound;
                out.gamma_rows.push(Array1::from_vec(g));
            }
            out
        })
        .collect();

    let mut bound = 0.0;
    let mut sstats = Array2::zeros((s, n));
    let mut alpha_stats = Array1::zeros(s);
    let mut gamma = Array2::zeros((counts.num_docs(), s));
    let mut row = 0usize;
    for chunk in chunks {
        bound += chunk.bound;
        sstats += &chunk.sstats;
        alpha_stats += &chunk.alpha_stats;
        for g in chunk.gamma_rows {
            gamma.row_mut(row).assign(&g);
            row += 1;
        }
    }
    EStepOut {
        bound,
        sstats,
        alpha_stats,
        gamma,
    }
}

fn m_step_beta(sstats: &Array2<f64>, beta: &mut Array2<f64>) {
    let (s, n) = beta.dim();
    for z in 0..s {
        let total: f64 = sstats.row(z).sum();
        if total > 0.0 {
            for w in 0..n {
                beta[(z, w)] = sstats[(z, w)] / total;
            }
        } else {
            log::warn!("topic {z} received no mass; resetting it to uniform");
            beta.row_mut(z).fill(1.0 / n as f64);
        }
    }
}

/// Newton update of the Dirichlet prior given Σ_b E[ln θ_b]. The Hessian is
/// diagonal plus rank one, so the step solves in O(s) (Sherman–Morrison).
/// Steps that leave the domain or lower the objective are halved; returns
/// whether any damping happened.
fn optimize_alpha(alpha: &mut Array1<f64>, stats: &Array1<f64>, ndocs: f64) -> bool {
    if ndocs == 0.0 {
        return false;
    }
    let s = alpha.len();
    let tol = 1e-9 * ndocs.max(1.0);
    let mut damped = false;
    for _ in 0..200 {
        let asum: f64 = alpha.sum();
        let dig_sum = digamma(asum);
        let g: Vec<f64> = (0..s)
            .map(|z| ndocs * (dig_sum - digamma(alpha[z])) + stats[z])
            .collect();
        if g.iter().all(|v| v.abs() <= tol) {
            break;
        }
        let h: Vec<f64> = alpha.iter().map(|&a| -ndocs * trigamma(a)).collect();
        let c = ndocs * trigamma(asum);
        let inv_h_sum: f64 = h.iter().map(|&hz| 1.0 / hz).sum();
        let b = g.iter().zip(&h).map(|(gz, hz)| gz / hz).sum::<f64>() / (1.0 / c + inv_h_sum);
        let step: Vec<f64> = (0..s).map(|z| (g[z] - b) / h[z]).collect();

        let f0 = alpha_objective(alpha, stats, ndocs);
        let mut t = 1.0;
        let mut moved = false;
        while t >= 1e-12 {
            let cand: Vec<f64> = (0..s).map(|z| alpha[z] - t * step[z]).collect();
            if cand.iter().all(|&a| a > 0.0) {
                let cand = Array1::from_vec(cand);
                let f1 = alpha_objective(&cand, stats, ndocs);
                if f1.is_finite() && f1 >= f0 {
                    alpha.assign(&cand);
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
            damped = true;
        }
        if !moved {
            break;
        }
    }
    damped
}

fn alpha_objective(alpha: &Array1<f64>, stats: &Array1<f64>, ndocs: f64) -> f64 {
    let asum: f64 = alpha.sum();
    let mut f = ndocs * ln_gamma(asum);
    for (&a, &ss) in alpha.iter().zip(stats) {
        f += -ndocs * ln_gamma(a) + (a - 1.0) * ss;
    }
    f
}

/// Farthest-first document anchors: pick s documents with mutually maximal
/// total-variation distance between their frequency profiles and mix each
/// anchor with the uniform distribution. Separated planted topics then start
/// near distinct anchors.
fn init_beta(
    counts: &TermDocMatrix,
    s: usize,
    active: &[usize],
    rng: &mut ChaCha8Rng,
) -> Array2<f64> {
    let n = counts.num_words();
    let mut beta = Array2::zeros((s, n));
    if active.len() < s {
        log::warn!(
            "only {} nonempty documents for {s} topics; falling back to random rows",
            active.len()
        );
        let flat = vec![1.0; n];
        for z in 0..s {
            for (w, v) in sample_dirichlet(rng, &flat).into_iter().enumerate() {
                beta[(z, w)] = v;
            }
        }
        return beta;
    }

    let first = active[rng.random_range(0..active.len())];
    let mut chosen = vec![first];
    let mut min_dist: Vec<f64> = active
        .iter()
        .map(|&b| tv_distance(counts, b, first))
        .collect();
    while chosen.len() < s {
        let mut best = 0usize;
        for i in 1..active.len() {
            if min_dist[i] > min_dist[best] {
                best = i;
            }
        }
        let next = active[best];
        chosen.push(next);
        for (i, &b) in active.iter().enumerate() {
            min_dist[i] = min_dist[i].min(tv_distance(counts, b, next));
        }
    }

    for (z, &b) in chosen.iter().enumerate() {
        let total: f64 = counts.col(b).iter().map(|&(_, c)| f64::from(c)).sum();
        for w in 0..n {
            beta[(z, w)] = 0.05 / n as f64;
        }
        for &(w, c) in counts.col(b) {
            beta[(z, w as usize)] += 0.95 * f64::from(c) / total;
        }
    }
    beta
}

/// Total-variation distance between the in-support frequency profiles of two
/// documents.
fn tv_distance(counts: &TermDocMatrix, a: usize, b: usize) -> f64 {
    let ta: f64 = counts.col(a).iter().map(|&(_, c)| f64::from(c)).sum();
    let tb: f64 = counts.col(b).iter().map(|&(_, c)| f64::from(c)).sum();
    let (mut i, mut j) = (0usize, 0usize);
    let ca = counts.col(a);
    let cb = counts.col(b);
    let mut dist = 0.0;
    while i < ca.len() || j < cb.len() {
        let wa = ca.get(i).map(|&(w, _)| w);
        let wb = cb.get(j).map(|&(w, _)| w);
        match (wa, wb) {
            (Some(x), Some(y)) if x == y => {
                dist += (f64::from(ca[i].1) / ta - f64::from(cb[j].1) / tb).abs();
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                dist += f64::from(ca[i].1) / ta;
                i += 1;
                let _ = y;
            }
            (Some(_), Some(_)) => {
                dist += f64::from(cb[j].1) / tb;
                j += 1;
            }
            (Some(_), None) => {
                dist += f64::from(ca[i].1) / ta;
                i += 1;
            }
            (None, Some(_)) => {
                dist += f64::from(cb[j].1) / tb;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    dist / 2.0
}

/// Joint factorial moment E[Π_i θ_i^{k_i}] of a Dirichlet vector, evaluated
/// in log-Γ space: Γ(Σα)/Γ(Σα+Σk) · Π Γ(α_i+k_i)/Γ(α_i).
pub fn dirichlet_joint_moment(alpha: &[f64], orders: &[u32]) -> Result<f64> {
    if alpha.is_empty() || alpha.len() != orders.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} shapes against {} moment orders",
            alpha.len(),
            orders.len()
        )));
    }
    if let Some(&bad) = alpha.iter().find(|&&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Dirichlet shape {bad} must be positive"
        )));
    }
    let a0: f64 = alpha.iter().sum();
    let k0: f64 = orders.iter().map(|&k| f64::from(k)).sum();
    let mut ln = ln_gamma(a0) - ln_gamma(a0 + k0);
    for (&a, &k) in alpha.iter().zip(orders) {
        ln += ln_gamma(a + f64::from(k)) - ln_gamma(a);
    }
    Ok(ln.exp())
}

/// Two-topic Dirichlet prior over (θ, 1−θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoTopicPrior {
    /// Dir(α, α): exchangeable topics.
    Symmetric { alpha: f64 },
    /// Dir(1, α): the second topic is rare for α ≪ 1.
    RareSecond { alpha: f64 },
}

impl TwoTopicPrior {
    fn alpha(&self) -> f64 {
        match *self {
            TwoTopicPrior::Symmetric { alpha } | TwoTopicPrior::RareSecond { alpha } => alpha,
        }
    }
}

/// Closed-form mean and variance of one word's document frequency
/// p_w = θ₁β₁ + θ₂β₂ under a two-topic Dirichlet prior, with the α ≪ 1
/// leading-order forms where they exist.
#[derive(Debug, Clone)]
pub struct TwoTopicMoments {
    pub mean: f64,
    pub variance: f64,
    /// Leading order of E[p_w]² as α→0 with γ_w = β₁/α held fixed:
    /// (γ_w + β₂)²·α². Only for the rare-second prior.
    pub asymptotic_mean_sq: Option<f64>,
    /// Leading order of V[p_w] as α→0: β₂²·α/2. Only for the rare-second
    /// prior.
    pub asymptotic_variance: Option<f64>,
}

/// Exact first and second moments of p_w = θ₁β₁ + θ₂β₂.
///
/// Symmetric Dir(α,α):  E = (β₁+β₂)/2,  V = (β₁−β₂)²/(4(2α+1)).
/// RareSecond Dir(1,α): E = (β₁+αβ₂)/(1+α),  V = α(β₁−β₂)²/((2+α)(1+α)²).
pub fn two_topic_moments(prior: &TwoTopicPrior, beta1: f64, beta2: f64) -> Result<TwoTopicMoments> {
    let a = prior.alpha();
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "prior shape {a} must be positive"
        )));
    }
    for b in [beta1, beta2] {
        if !(0.0..=1.0).contains(&b) || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "word emission probability {b} outside [0, 1]"
            )));
        }
    }
    let d = beta1 - beta2;
    let (mean, variance, asym_msq, asym_var) = match prior {
        TwoTopicPrior::Symmetric { alpha } => {
            let mean = 0.5 * (beta1 + beta2);
            let var = d * d / (4.0 * (2.0 * alpha + 1.0));
            (mean, var, None, None)
        }
        TwoTopicPrior::RareSecond { alpha } => {
            let mean = (beta1 + alpha * beta2) / (1.0 + alpha);
            let var = alpha * d * d / ((2.0 + alpha) * (1.0 + alpha) * (1.0 + alpha));
            let gamma_w = beta1 / alpha;
            let msq = (gamma_w + beta2) * (gamma_w + beta2) * alpha * alpha;
            let av = beta2 * beta2 * alpha / 2.0;
            (mean, var, Some(msq), Some(av))
        }
    };
    Ok(TwoTopicMoments {
        mean,
        variance,
        asymptotic_mean_sq: asym_msq,
        asymptotic_variance: asym_var,
    })
}

/// Verdict on whether a word sits in the bursty window of a rare-topic model.
#[derive(Debug, Clone)]
pub struct BurstinessCheck {
    pub alpha: f64,
    pub gamma_w: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub exact_mean: f64,
    pub exact_variance: f64,
    /// V/E² from the exact closed forms.
    pub exact_ratio: f64,
    /// (β₂²α/2) / ((γ_w+β₂)²α²): the α ≪ 1 prediction for V/E².
    pub asymptotic_ratio: f64,
    /// α is small enough (< 0.1) for the leading-order forms to mean much.
    pub asymptotics_applicable: bool,
    /// β₁ < β₂ < β₁/α, the window where variance dominates squared mean.
    pub in_band: bool,
    pub band_lower: f64,
    pub band_upper: f64,
}

/// Evaluate the Dir(1, α) burstiness window for a word with common-topic
/// emission β₁ = γ_w·α and rare-topic emission β₂.
pub fn burstiness_regime_check(alpha: f64, gamma_w: f64, beta2: f64) -> Result<BurstinessCheck> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "prior shape {alpha} must be positive"
        )));
    }
    if !(gamma_w >= 0.0 && gamma_w.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scaled common frequency {gamma_w} must be nonnegative"
        )));
    }
    let beta1 = gamma_w * alpha;
    if beta1 > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "γ_w·α = {beta1} exceeds 1 and cannot be an emission probability"
        )));
    }
    let m = two_topic_moments(&TwoTopicPrior::RareSecond { alpha }, beta1, beta2)?;
    let exact_ratio = if m.mean > 0.0 {
        m.variance / (m.mean * m.mean)
    } else {
        f64::NAN
    };
    let asymptotic_ratio = m.asymptotic_variance.expect("rare-second prior")
        / m.asymptotic_mean_sq.expect("rare-second prior");
    Ok(BurstinessCheck {
        alpha,
        gamma_w,
        beta1,
        beta2,
        exact_mean: m.mean,
        exact_variance: m.variance,
        exact_ratio,
        asymptotic_ratio,
        asymptotics_applicable: alpha < 0.1,
        in_band: beta1 < beta2 && beta2 < gamma_w,
        band_lower: beta1,
        band_upper: gamma_w,
    })
}

/// One topic's top words with their corpus-level over-representation.
#[derive(Debug, Clone)]
pub struct TopicMarker {
    pub word_index: usize,
    pub word: String,
    pub beta: f64,
    pub corpus_mean: f64,
    /// β_zw / x̄_w.
    pub strength: f64,
}

#[derive(Debug, Clone)]
pub struct TopicReport {
    pub topic: usize,
    pub alpha: f64,
    pub markers: Vec<TopicMarker>,
}

/// Topics ordered by estimated prior weight ascending (rarest first), each
/// with its `top_k` highest-β words and their strength β/x̄ against the
/// corpus mean frequency.
pub fn rare_topic_report(
    model: &LdaModel,
    words: &[String],
    corpus_means: &[f64],
    top_k: usize,
) -> Result<Vec<TopicReport>> {
    let n = model.num_words();
    if words.len() != n || corpus_means.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} words and {} means against a model over {n} words",
            words.len(),
            corpus_means.len()
        )));
    }
    if top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be at least 1".into()));
    }
    let s = model.num_topics();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| {
        model.alpha[a]
            .partial_cmp(&model.alpha[b])
            .expect("alpha is finite")
            .then(a.cmp(&b))
    });
    let mut reports = Vec::with_capacity(s);
    for z in order {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            model.beta[(z, b)]
                .partial_cmp(&model.beta[(z, a)])
                .expect("beta is finite")
                .then(a.cmp(&b))
        });
        let markers = idx
            .into_iter()
            .take(top_k.min(n))
            .map(|w| {
                let beta = model.beta[(z, w)];
                let mean = corpus_means[w];
                let strength = if mean > 0.0 {
                    beta / mean
                } else if beta > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                TopicMarker {
                    word_index: w,
                    word: words[w].clone(),
                    beta,
                    corpus_mean: mean,
                    strength,
                }
            })
            .collect();
        reports.push(TopicReport {
            topic: z,
            alpha: model.alpha[z],
            markers,
        });
    }
    Ok(reports)
}
