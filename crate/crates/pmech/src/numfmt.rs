//! Deterministic numeric formatting and reduction helpers.

use crate::C64;

/// Formats a float with 17 significant digits, scientific notation, `.`
/// decimal separator. Identical inputs always yield identical bytes.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // normalise -0.0
        return "0".to_string();
    }
    format!("{:.16e}", x)
}

/// Pairwise (tree) summation: the reduction order is fixed by the slice
/// layout, so results do not depend on thread counts or chunking further up.
pub fn pairwise_sum(xs: &[C64]) -> C64 {
    match xs.len() {
        0 => C64::new(0.0, 0.0),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Pairwise summation of real values.
pub fn pairwise_sum_f64(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum_f64(&xs[..mid]) + pairwise_sum_f64(&xs[mid..])
        }
    }
}
