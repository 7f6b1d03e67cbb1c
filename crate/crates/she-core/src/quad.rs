//! Gauss-Legendre nodes, computed by Newton iteration on the recurrence.
//!
//! No tabulated constants: nodes are roots of the Legendre polynomial found
//! from the standard cosine initial guess, accurate to machine precision for
//! the orders used here.

use std::sync::OnceLock;

/// Nodes and weights on the reference interval `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_{n-1} by upward recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn cached(cell: &'static OnceLock<(Vec<f64>, Vec<f64>)>, n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    cell.get_or_init(|| gauss_legendre(n))
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static CELL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    cached(&CELL, 16)
}

pub(crate) fn gl64() -> &'static (Vec<f64>, Vec<f64>) {
    static CELL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    cached(&CELL, 64)
}

/// Integrates `f` over `[a, b]` with the given reference rule.
pub(crate) fn integrate_mapped(
    rule: &(Vec<f64>, Vec<f64>),
    a: f64,
    b: f64,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_symmetric_and_weights_sum_to_two() {
        for n in [2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for i in 0..n {
                assert!((x[i] + x[n - 1 - i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rule_is_exact_on_high_degree_polynomials() {
        // An n-point rule integrates degree 2n-1 exactly: x^21 on [0, 1].
        let rule = gauss_legendre(16);
        let got = integrate_mapped(&rule, 0.0, 1.0, |x| x.powi(21));
        assert!((got - 1.0 / 22.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_integral_converges() {
        let got = integrate_mapped(gl64(), -8.0, 8.0, |x| (-0.5 * x * x).exp());
        assert!((got - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }
}
