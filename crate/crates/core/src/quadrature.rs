//! Quadrature rules: graded midpoint and graded Gauss–Legendre panels for
//! integrands with algebraic endpoint singularities, Gauss–Jacobi rules, and
//! an adaptive Gauss–Kronrod integrator for smooth one-dimensional work.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points per panel in the Gauss–Legendre scheme.
const PANEL_POINTS: usize = 8;

/// Largest grading exponent ever applied.
const MAX_GRADING: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Midpoint rule in the graded variable.
    #[default]
    GradedMidpoint,
    /// Composite Gauss–Legendre panels in the graded variable.
    GradedGaussLegendre,
}

impl Scheme {
    pub fn other(self) -> Self {
        match self {
            Scheme::GradedMidpoint => Scheme::GradedGaussLegendre,
            Scheme::GradedGaussLegendre => Scheme::GradedMidpoint,
        }
    }
}

/// Which end(s) of the interval the nodes cluster at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cluster {
    Left,
    Right,
    Both,
}

/// Resolution and scheme shared by the distance computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureGrid {
    /// Nodes of the outer (s) integral.
    pub s_nodes: usize,
    /// Nodes of each inner (t) integral.
    pub t_nodes: usize,
    pub scheme: Scheme,
    /// Fixed grading exponent; derived from the integrand's singularity when absent.
    pub grading: Option<f64>,
    /// When set, every distance is recomputed with the other scheme and a
    /// relative disagreement above this tolerance is an error.
    pub crosscheck_tol: Option<f64>,
    /// Cells of the Riemann–Stieltjes sum used against singular measures.
    pub stieltjes_nodes: usize,
    /// Nodes of the inner integral inside the fOU kernel.
    pub kernel_quad_nodes: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            s_nodes: 256,
            t_nodes: 256,
            scheme: Scheme::GradedMidpoint,
            grading: None,
            crosscheck_tol: None,
            stieltjes_nodes: 100_000,
            kernel_quad_nodes: 64,
        }
    }
}

impl QuadratureGrid {
    pub fn with_nodes(s_nodes: usize, t_nodes: usize) -> Self {
        Self {
            s_nodes,
            t_nodes,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_nodes == 0 || self.t_nodes == 0 || self.kernel_quad_nodes == 0 {
            return Err(Error::Invalid("quadrature node counts must be positive".into()));
        }
        if let Some(g) = self.grading {
            if !(g >= 1.0 && g.is_finite()) {
                return Err(Error::Invalid(format!("grading exponent {g} must be >= 1")));
            }
        }
        Ok(())
    }

    /// Grading to use for an integrand behaving like `x^alpha` at the cluster point.
    pub fn grading_for(&self, alpha: f64) -> f64 {
        self.grading.unwrap_or_else(|| grading_for_exponent(alpha))
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }
}

/// Grading exponent that turns an `x^alpha` endpoint singularity into an
/// integrand whose midpoint error is second order: `2 / (1 + alpha)`.
pub fn grading_for_exponent(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    (2.0 / (1.0 + alpha).max(1e-3)).clamp(1.0, MAX_GRADING)
}

/// Grading used for a single fractional kernel `(t - s)^(H - 1/2)`.
pub fn kernel_grading(hurst: f64) -> f64 {
    (2.0 / (hurst + 0.5)).max(1.0)
}

/// Nodes and weights of a quadrature rule on a fixed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn try_integrate<F: FnMut(f64) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }

    /// Uniform midpoint rule on `[a, b]`.
    pub fn midpoint(a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / n as f64;
        Self {
            nodes: (0..n).map(|i| a + (i as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
        }
    }

    /// Graded rule on `[a, b]` with `n` nodes (rounded up to whole panels for
    /// the Gauss–Legendre scheme).
    pub fn graded(a: f64, b: f64, n: usize, grading: f64, cluster: Cluster, scheme: Scheme) -> Self {
        let len = b - a;
        let (us, uw): (Vec<f64>, Vec<f64>) = match scheme {
            Scheme::GradedMidpoint => {
                let h = 1.0 / n as f64;
                ((0..n).map(|i| (i as f64 + 0.5) * h).collect(), vec![h; n])
            }
            Scheme::GradedGaussLegendre => {
                let panels = n.div_ceil(PANEL_POINTS).max(1);
                let (gx, gw) = gauss_legendre(PANEL_POINTS);
                let h = 1.0 / panels as f64;
                let mut xs = Vec::with_capacity(panels * PANEL_POINTS);
                let mut ws = Vec::with_capacity(panels * PANEL_POINTS);
                for p in 0..panels {
                    let lo = p as f64 * h;
                    for (x, w) in gx.iter().zip(&gw) {
                        xs.push(lo + 0.5 * h * (x + 1.0));
                        ws.push(0.5 * h * w);
                    }
                }
                (xs, ws)
            }
        };
        let mut nodes = Vec::with_capacity(us.len());
        let mut weights = Vec::with_capacity(us.len());
        for (u, w) in us.into_iter().zip(uw) {
            let (phi, dphi) = grade(u, grading, cluster);
            nodes.push(a + len * phi);
            weights.push(len * dphi * w);
        }
        Self { nodes, weights }
    }

    /// Gauss–Jacobi rule for `int_a^b f(x) (b - x)^alpha (x - a)^beta dx`.
    pub fn gauss_jacobi(a: f64, b: f64, n: usize, alpha: f64, beta: f64) -> Self {
        let (x, w) = gauss_jacobi(n, alpha, beta);
        let half = 0.5 * (b - a);
        let scale = half.powf(1.0 + alpha + beta);
        Self {
            nodes: x.iter().map(|x| a + half * (x + 1.0)).collect(),
            weights: w.iter().map(|w| w * scale).collect(),
        }
    }
}

fn grade(u: f64, g: f64, cluster: Cluster) -> (f64, f64) {
    match cluster {
        Cluster::Left => (u.powf(g), g * u.powf(g - 1.0)),
        Cluster::Right => {
            let v = 1.0 - u;
            (1.0 - v.powf(g), g * v.powf(g - 1.0))
        }
        Cluster::Both => {
            if u < 0.5 {
                let v = 2.0 * u;
                (0.5 * v.powf(g), g * v.powf(g - 1.0))
            } else {
                let v = 2.0 - 2.0 * u;
                (1.0 - 0.5 * v.powf(g), g * v.powf(g - 1.0))
            }
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Jacobi nodes and weights on `[-1, 1]` for the weight
/// `(1 - x)^alpha (1 + x)^beta`, by the Golub–Welsch eigenvalue method.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(alpha > -1.0 && beta > -1.0, "Jacobi exponents must exceed -1");
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        let denom = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
        jac[(i, i)] = if denom.abs() < 1e-300 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / denom
        };
        if i + 1 < n {
            let k1 = k + 1.0;
            let num = 4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab);
            let d = (2.0 * k1 + ab).powi(2) * (2.0 * k1 + ab + 1.0) * (2.0 * k1 + ab - 1.0);
            let off = (num / d).sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0)
        * crate::specfun::gamma_real(alpha + 1.0)
        * crate::specfun::gamma_real(beta + 1.0)
        * crate::specfun::rgamma(ab + 2.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Adaptive Gauss–Kronrod (7/15) integration to absolute-or-relative tolerance.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut stack = vec![(a, b, 0usize)];
    let mut total = 0.0;
    let mut evals = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (k, g) = gk15(&mut f, lo, hi);
        evals += 15;
        let err = (k - g).abs();
        let local_tol = tol * ((hi - lo) / (b - a)).abs();
        if err <= local_tol.max(1e-15 * k.abs()) || depth >= 40 {
            if depth >= 40 && err > local_tol {
                return Err(Error::Quadrature {
                    a: k,
                    b: g,
                    rel: err / k.abs().max(f64::MIN_POSITIVE),
                    tol,
                });
            }
            total += k;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
        if evals > 2_000_000 {
            return Err(Error::Quadrature {
                a: total,
                b: f64::NAN,
                rel: f64::NAN,
                tol,
            });
        }
    }
    Ok(total)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, g * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(s, 2.0 / 15.0, max_relative = 1e-13);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_reduces_to_legendre() {
        let (xj, wj) = gauss_jacobi(6, 0.0, 0.0);
        let (xl, wl) = gauss_legendre(6);
        for i in 0..6 {
            assert_relative_eq!(xj[i], xl[i], epsilon = 1e-13);
            assert_relative_eq!(wj[i], wl[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn jacobi_weight_moment() {
        // int_0^1 (1 - s)^(1/4) ds = 0.8
        let r = Rule::gauss_jacobi(0.0, 1.0, 4, 0.25, 0.0);
        assert_relative_eq!(r.integrate(|_| 1.0), 0.8, max_relative = 1e-13);
    }

    #[test]
    fn graded_rules_handle_endpoint_singularity() {
        // int_0^1 x^(-1/2) dx = 2
        for scheme in [Scheme::GradedMidpoint, Scheme::GradedGaussLegendre] {
            let r = Rule::graded(0.0, 1.0, 256, grading_for_exponent(-0.5), Cluster::Left, scheme);
            assert_relative_eq!(r.integrate(|x| x.powf(-0.5)), 2.0, max_relative = 1e-4);
        }
        let r = Rule::graded(0.0, 1.0, 128, 3.0, Cluster::Both, Scheme::GradedMidpoint);
        let exact = std::f64::consts::PI; // int x^-1/2 (1-x)^-1/2
        assert_relative_eq!(
            r.integrate(|x| (x * (1.0 - x)).powf(-0.5)),
            exact,
            max_relative = 2e-2
        );
        assert_relative_eq!(r.weights.iter().sum::<f64>(), 1.0, max_relative = 1e-3);
    }

    #[test]
    fn adaptive_smooth() {
        let v = adaptive(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-13);
        assert_eq!(adaptive(|x| x, 1.0, 1.0, 1e-12).unwrap(), 0.0);
        let v = adaptive(|x| x, 1.0, 0.0, 1e-12).unwrap();
        assert_relative_eq!(v, -0.5, max_relative = 1e-13);
    }
}
