//! Seeded sampling primitives shared by the generators, initializers, and
//! Monte Carlo test oracles.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Cumulative-probability table for categorical draws.
#[derive(Debug, Clone)]
pub struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    /// Build from a probability vector: nonnegative entries summing to 1
    /// within 1e-9. The table renormalizes and pins the last cumulative
    /// value to exactly 1, so a draw can never fall off the end.
    pub fn new(p: &[f64]) -> Result<Categorical> {
        if p.is_empty() {
            return Err(Error::InvalidSimplex("empty probability vector".into()));
        }
        if let Some(&bad) = p.iter().find(|&&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidSimplex(format!(
                "entry {bad} is not a probability"
            )));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSimplex(format!(
                "entries sum to {total}, not 1"
            )));
        }
        let mut cdf = Vec::with_capacity(p.len());
        let mut acc = 0.0;
        for &v in p {
            acc += v;
            cdf.push(acc / total);
        }
        *cdf.last_mut().expect("nonempty") = 1.0;
        Ok(Categorical { cdf })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u)
    }
}

/// Shapes below this bound sample in log space: a plain Gamma(α) draw
/// underflows to exactly zero with high probability once α ≲ 0.01, which
/// would leave the normalized vector 0/0.
const LOG_SPACE_SHAPE: f64 = 0.01;

/// Draw from Dirichlet(alpha) via normalized Gamma variates.
///
/// Small shapes use the boost Gamma(α) ~ Gamma(α+1)·U^{1/α} evaluated in log
/// space, and normalization happens through log-sum-exp, so the result is a
/// valid simplex point (no NaN, no all-zero vector) for shapes down to the
/// underflow limit.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, alpha: &[f64]) -> Vec<f64> {
    assert!(
        !alpha.is_empty() && alpha.iter().all(|&a| a > 0.0 && a.is_finite()),
        "Dirichlet shapes must be positive and finite"
    );
    let mut logs = Vec::with_capacity(alpha.len());
    for &a in alpha {
        if a < LOG_SPACE_SHAPE {
            let boost: f64 = Gamma::new(a + 1.0, 1.0).expect("valid shape").sample(rng);
            let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
            logs.push(boost.ln() + u.ln() / a);
        } else {
            let g: f64 = Gamma::new(a, 1.0).expect("valid shape").sample(rng);
            logs.push(g.ln());
        }
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // every component underflowed; return the simplex center
        return vec![1.0 / alpha.len() as f64; alpha.len()];
    }
    let mut vals: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = vals.iter().sum();
    for v in &mut vals {
        *v /= sum;
    }
    vals
}
