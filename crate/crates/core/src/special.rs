//! Scalar special functions used by the Dirichlet machinery.

pub use statrs::function::gamma::{digamma, ln_gamma};

/// Trigamma function ψ'(x) for x > 0.
///
/// Shifts x up with ψ'(x) = ψ'(x+1) + 1/x² until the asymptotic series is
/// accurate, then sums it through the y⁻⁹ term.
pub fn trigamma(x: f64) -> f64 {
    assert!(x > 0.0, "trigamma requires x > 0, got {x}");
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = 1.0
        + inv * (0.5
            + inv * (1.0 / 6.0 + inv2 * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 - inv2 / 30.0))));
    acc + inv * series
}
