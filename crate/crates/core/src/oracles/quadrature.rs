use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{OracleVerdict, ToleranceMode};
use crate::error::Result;
use crate::quadrature::{adaptive, grading_for_exponent, Cluster, Rule, Scheme};

const SMOOTH_TOL: f64 = 1e-5;
const SINGULAR_TOL: f64 = 1e-3;

/// `int_lo^hi f`, with `f ~ (x - lo)^p` and `f ~ (hi - x)^q` at the ends for
/// `endpoint_exponents = (p, q)`.
#[derive(Clone)]
pub struct Integrand {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub endpoint_exponents: (f64, f64),
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Integrand({}, [{}, {}], {:?})", self.name, self.lo, self.hi, self.endpoint_exponents)
    }
}

impl Integrand {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(name: &str, lo: f64, hi: f64, f: F) -> Self {
        Self {
            name: name.into(),
            lo,
            hi,
            endpoint_exponents: (0.0, 0.0),
            f: Arc::new(f),
        }
    }

    pub fn with_endpoint_exponents(mut self, at_lo: f64, at_hi: f64) -> Self {
        self.endpoint_exponents = (at_lo, at_hi);
        self
    }

    pub fn is_singular(&self) -> bool {
        let (p, q) = self.endpoint_exponents;
        p.fract() != 0.0 || q.fract() != 0.0 || p < 0.0 || q < 0.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadScheme {
    GradedMidpoint { nodes: usize },
    GradedGaussLegendre { nodes: usize },
    /// Weight `(hi - x)^q (x - lo)^p` taken from the endpoint exponents.
    GaussJacobi { nodes: usize },
    Adaptive { tol: f64 },
}

impl QuadScheme {
    pub fn integrate(&self, g: &Integrand) -> Result<f64> {
        let (p, q) = g.endpoint_exponents;
        let graded = |n: usize, scheme: Scheme| {
            let (cluster, alpha) = match (p != 0.0, q != 0.0) {
                (true, true) => (Cluster::Both, p.min(q)),
                (true, false) => (Cluster::Left, p),
                (false, true) => (Cluster::Right, q),
                (false, false) => (Cluster::Left, 1.0),
            };
            Rule::graded(g.lo, g.hi, n, grading_for_exponent(alpha), cluster, scheme).integrate(|x| g.eval(x))
        };
        match *self {
            QuadScheme::GradedMidpoint { nodes } => Ok(graded(nodes, Scheme::GradedMidpoint)),
            QuadScheme::GradedGaussLegendre { nodes } => Ok(graded(nodes, Scheme::GradedGaussLegendre)),
            QuadScheme::GaussJacobi { nodes } => {
                let rule = Rule::gauss_jacobi(g.lo, g.hi, nodes, q, p);
                Ok(rule.integrate(|x| g.eval(x) / ((g.hi - x).powf(q) * (x - g.lo).powf(p))))
            }
            QuadScheme::Adaptive { tol } => adaptive(|x| g.eval(x), g.lo, g.hi, tol),
        }
    }
}

/// Integrates with two schemes; passes when the relative disagreement is below
/// `tol` (default `1e-5`, or `1e-3` for singular integrands).
pub fn quadrature_crosscheck(g: &Integrand, a: QuadScheme, b: QuadScheme, tol: Option<f64>) -> Result<OracleVerdict> {
    let tol = tol.unwrap_or(if g.is_singular() { SINGULAR_TOL } else { SMOOTH_TOL });
    let (va, vb) = (a.integrate(g)?, b.integrate(g)?);
    Ok(OracleVerdict::compare(
        va,
        vb,
        tol,
        ToleranceMode::Relative,
        format!("{}: {a:?} -> {va:.15e}, {b:?} -> {vb:.15e}", g.name),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_integrand() {
        let g = Integrand::new("t", 0.0, 1.0, |t| t);
        let v = quadrature_crosscheck(
            &g,
            QuadScheme::GradedMidpoint { nodes: 64 },
            QuadScheme::GradedGaussLegendre { nodes: 64 },
            None,
        )
        .unwrap();
        assert!(v.pass && (v.target - 0.5).abs() < 1e-12, "{v:?}");
    }

    #[test]
    fn endpoint_power() {
        let h = 0.75;
        let g = Integrand::new("power", 0.0, 1.0, move |s: f64| (1.0 - s).powf(h - 0.5)).with_endpoint_exponents(0.0, h - 0.5);
        let v = quadrature_crosscheck(
            &g,
            QuadScheme::GaussJacobi { nodes: 8 },
            QuadScheme::GradedMidpoint { nodes: 256 },
            None,
        )
        .unwrap();
        assert!(v.pass, "{v:?}");
        assert!((v.target - 0.8).abs() < 1e-13);
        assert!((v.oracle - 0.8).abs() < 1e-3);
    }
}
