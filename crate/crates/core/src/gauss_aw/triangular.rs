use rayon::prelude::*;

use super::continuous::{gradings, kernel_column, weighted_inner};
use crate::error::{Error, Result};
use crate::kernels::GaussianProcessSpec;
use crate::quadrature::{Cluster, QuadratureGrid, Rule, Scheme};
use crate::reduce::pairwise_sum;

/// Nodes of the short inner integral from `max(r1, r2)` to the cell end.
const SHORT_NODES: usize = 16;

/// Minimum r-nodes per partition cell.
const MIN_CELL_NODES: usize = 8;

/// Partition sum `sum_cells [int_cell int_cell |<k1(., r1), k2(., r2)>|^2 mu1(dr1) mu2(dr2)]^(1/2)`
/// over a uniform partition of `[0, T]`.
pub fn triangular_integral(
    spec1: &GaussianProcessSpec,
    spec2: &GaussianProcessSpec,
    partition_count: usize,
    grid: &QuadratureGrid,
) -> Result<f64> {
    grid.validate()?;
    if partition_count == 0 {
        return Err(Error::Invalid("partition needs at least one cell".into()));
    }
    if spec1.horizon() != spec2.horizon() {
        return Err(Error::HorizonMismatch(spec1.horizon(), spec2.horizon()));
    }
    if spec1.multiplicity() != 1 || spec2.multiplicity() != 1 {
        return Err(Error::Invalid("triangular integral needs unit multiplicity".into()));
    }
    let (k1, m1) = (spec1.kernel(0), spec1.measure(0));
    let (k2, m2) = (spec2.kernel(0), spec2.measure(0));
    match (m1.is_singular(), m2.is_singular()) {
        (true, true) => return Err(Error::UnsupportedMeasure("both intensity measures are singular".into())),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let horizon = spec1.horizon();
    let (g_s, g_t) = gradings(grid, &[k1, k2]);
    let h = horizon / partition_count as f64;
    let q = grid.s_nodes.div_ceil(partition_count).max(MIN_CELL_NODES);

    let cells = (0..partition_count)
        .into_par_iter()
        .map(|c| {
            let lo = c as f64 * h;
            let hi = if c + 1 == partition_count { horizon } else { lo + h };
            let g = if c == 0 { g_s } else { 1.0 };
            let r = Rule::graded(lo, hi, q, g, Cluster::Left, Scheme::GradedGaussLegendre);
            let d1 = r.nodes.iter().map(|&x| m1.density_at(x)).collect::<Result<Vec<_>>>()?;
            let d2 = r.nodes.iter().map(|&x| m2.density_at(x)).collect::<Result<Vec<_>>>()?;

            // <k1(., r_a), k2(., r_b)> on [hi, T], shared by all pairs in the cell
            let long = if hi < horizon {
                let tail = Rule::graded(hi, horizon, grid.t_nodes, g_t, Cluster::Left, grid.scheme);
                let c1 = r.nodes.iter().map(|&x| kernel_column(k1, x, &tail)).collect::<Result<Vec<_>>>()?;
                let c2 = r.nodes.iter().map(|&x| kernel_column(k2, x, &tail)).collect::<Result<Vec<_>>>()?;
                Some((tail, c1, c2))
            } else {
                None
            };
            let mut terms = Vec::with_capacity(r.len() * r.len());
            for (a, &ra) in r.nodes.iter().enumerate() {
                for (b, &rb) in r.nodes.iter().enumerate() {
                    let start = ra.max(rb);
                    let short = Rule::graded(start, hi, SHORT_NODES, g_t, Cluster::Left, Scheme::GradedGaussLegendre);
                    let mut ip = 0.0;
                    for (&t, &w) in short.nodes.iter().zip(&short.weights) {
                        ip += w * k1.eval(t, ra)? * k2.eval(t, rb)?;
                    }
                    if let Some((tail, c1, c2)) = &long {
                        ip += weighted_inner(tail, &c1[a], &c2[b]);
                    }
                    terms.push(r.weights[a] * r.weights[b] * ip * ip * d1[a] * d2[b]);
                }
            }
            Ok(pairwise_sum(&terms).sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_brownian() {
        // <1_[r1,1], 1_[r2,1]> = 1 - max(r1, r2); int int (1 - max)^2 = 1/6
        let g = QuadratureGrid::with_nodes(64, 64);
        let bm = GaussianProcessSpec::brownian(1.0).unwrap();
        let v = triangular_integral(&bm, &bm, 1, &g).unwrap();
        assert!((v - (1.0f64 / 6.0).sqrt()).abs() < 1e-3, "{v}");
    }

    #[test]
    fn fine_partition_approaches_trace_half() {
        // int ||1_[s,1]||^2 ds = 1/2
        let g = QuadratureGrid::with_nodes(64, 64);
        let bm = GaussianProcessSpec::brownian(1.0).unwrap();
        let v = triangular_integral(&bm, &bm, 256, &g).unwrap();
        assert!((v - 0.5).abs() < 5e-3, "{v}");
    }
}
