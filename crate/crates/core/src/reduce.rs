//! Order-fixed summation so parallel results do not depend on worker count.

/// Pairwise (tree) sum with a topology that depends only on `xs.len()`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Weighted pairwise sum `sum_i w_i x_i`.
pub fn pairwise_dot(w: &[f64], x: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), x.len());
    let prods: Vec<f64> = w.iter().zip(x).map(|(a, b)| a * b).collect();
    pairwise_sum(&prods)
}
