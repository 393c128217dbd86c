//! Special functions used by the variational updates.

pub use statrs::function::gamma::{digamma, ln_gamma};

/// Trigamma function ψ'(x) for x > 0.
///
/// Shifts the argument above 10 with ψ'(x) = ψ'(x + 1) + 1/x² and then applies the
/// asymptotic expansion.
pub fn trigamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/2x² + 1/6x³ - 1/30x⁵ + 1/42x⁷ - 1/30x⁹ + 5/66x¹¹
    acc + inv
        + inv2 / 2.0
        + inv
            * inv2
            * (1.0 / 6.0 + inv2 * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0 + inv2 * 5.0 / 66.0))))
}

/// E[log X] for X ~ Dirichlet(params), written into `out`.
pub fn dirichlet_expectation(params: &[f64], out: &mut [f64]) {
    let total = digamma(params.iter().sum());
    for (o, &p) in out.iter_mut().zip(params) {
        *o = digamma(p) - total;
    }
}
