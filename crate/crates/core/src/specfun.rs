//! Gamma, Pochhammer and the Gauss hypergeometric function on `z <= 0`.
//!
//! `hyp2f1` is evaluated through the Pfaff transformation
//! `F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1))`, which maps the negative
//! half-line into `[0, 1)`. Close to `w = 1` the series in `w` converges too
//! slowly, so the linear `1 - w` connection formula takes over there. When
//! `c - a - b` of the transformed series is an integer the connection formula
//! degenerates (logarithmic case); the plain series is used instead and may
//! report non-convergence far out on the negative axis.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Above this transformed argument the connection formula is used.
const CONNECTION_SWITCH: f64 = 0.7;

/// Truncation rule for the hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// A term is negligible when `|term| <= rel_tol * |partial sum|`.
    pub rel_tol: f64,
    /// Number of consecutive negligible terms required to stop.
    pub consecutive: usize,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            consecutive: 3,
            max_terms: 10_000,
        }
    }
}

/// Parameters `(a, b, c)` of `F(a, b; c; z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HypergeometricParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Domain(format!("non-finite parameters ({a}, {b}, {c})")));
        }
        if c <= 0.0 && c == c.round() {
            return Err(Error::Domain(format!("c = {c} is a non-positive integer")));
        }
        Ok(Self { a, b, c })
    }

    /// `(H - 1/2, 1/2 - H, H + 1/2)`, the parameters of the Molchan–Golosov kernel.
    pub fn molchan_golosov(hurst: f64) -> Self {
        Self {
            a: hurst - 0.5,
            b: 0.5 - hurst,
            c: hurst + 0.5,
        }
    }

    pub fn swapped(self) -> Self {
        Self {
            a: self.b,
            b: self.a,
            c: self.c,
        }
    }
}

fn lanczos(x: f64) -> f64 {
    // valid for x >= 1/2
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Gamma function for positive arguments.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(gamma_real(x))
}

/// Gamma on the whole real line via reflection; infinite at the poles.
pub(crate) fn gamma_real(x: f64) -> f64 {
    if x < 0.5 {
        if x == x.floor() {
            return f64::INFINITY;
        }
        PI / ((PI * x).sin() * gamma_real(1.0 - x))
    } else {
        lanczos(x)
    }
}

/// `1 / Gamma(x)`, which is entire: zero at the poles of Gamma.
pub(crate) fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        (PI * x).sin() * gamma_real(1.0 - x) / PI
    } else {
        1.0 / lanczos(x)
    }
}

/// Rising factorial `(x)_n = x (x+1) ... (x+n-1)`, with `(x)_0 = 1`.
pub fn pochhammer(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x + k as f64))
}

/// Truncated series `sum (a)_n (b)_n / (c)_n x^n / n!` for `0 <= x < 1`.
pub(crate) fn series(p: HypergeometricParams, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0usize;
    for n in 0..cfg.max_terms {
        let nf = n as f64;
        term *= (p.a + nf) * (p.b + nf) / ((p.c + nf) * (nf + 1.0)) * x;
        sum += term;
        if term.abs() <= cfg.rel_tol * sum.abs() {
            small += 1;
            if small >= cfg.consecutive {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        terms: cfg.max_terms,
        z: x,
    })
}

/// `F(a, b; c; 1 - y)` for `y` in `(0, 1]` via the `1 - w` connection formula.
/// Takes `y` rather than `w` so that `y` keeps full relative precision.
fn connection(p: HypergeometricParams, y: f64, cfg: &SeriesConfig) -> Result<f64> {
    let HypergeometricParams { a, b, c } = p;
    let d = c - a - b;
    let first = gamma_real(c) * gamma_real(d) * rgamma(c - a) * rgamma(c - b);
    let second = gamma_real(c) * gamma_real(-d) * rgamma(a) * rgamma(b);
    let mut out = 0.0;
    if first != 0.0 {
        out += first * series(HypergeometricParams { a, b, c: 1.0 - d }, y, cfg)?;
    }
    if second != 0.0 {
        out += second
            * y.powf(d)
            * series(
                HypergeometricParams {
                    a: c - a,
                    b: c - b,
                    c: 1.0 + d,
                },
                y,
                cfg,
            )?;
    }
    Ok(out)
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-12
}

fn terminates(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gauss hypergeometric function on `z <= 0` with the default series rule.
pub fn hyp2f1(params: HypergeometricParams, z: f64) -> Result<f64> {
    hyp2f1_with(params, z, &SeriesConfig::default())
}

pub fn hyp2f1_with(params: HypergeometricParams, z: f64, cfg: &SeriesConfig) -> Result<f64> {
    let HypergeometricParams { a, b, c } = HypergeometricParams::new(params.a, params.b, params.c)?;
    if !(z <= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("hyp2f1 requires finite z <= 0, got {z}")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    // Pfaff: keep a terminating parameter in front so the transformed series
    // stays polynomial where possible.
    let (a, b) = if terminates(b) && !terminates(a) { (b, a) } else { (a, b) };
    let w = z / (z - 1.0);
    let y = 1.0 / (1.0 - z);
    let prefactor = (1.0 - z).powf(-a);
    let inner = HypergeometricParams { a, b: c - b, c };
    let value = if w <= CONNECTION_SWITCH || is_integer(c - inner.a - inner.b) || terminates(a) {
        series(inner, w, cfg)?
    } else {
        connection(inner, y, cfg)?
    };
    Ok(prefactor * value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_small_integers_and_half() {
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(gamma_fn(5.0).unwrap(), 24.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_factorials_and_half_integers() {
        // Gamma(n+1) = n!, Gamma(n + 1/2) = (2n)! sqrt(pi) / (4^n n!)
        let mut fact = 1.0f64;
        for n in 1..=40u32 {
            fact *= n as f64;
            assert_relative_eq!(gamma_fn(n as f64 + 1.0).unwrap(), fact, max_relative = 1e-13);
        }
        for n in 0..=30u32 {
            let num: f64 = (1..=2 * n).map(|k| k as f64).product();
            let den: f64 = 4f64.powi(n as i32) * (1..=n).map(|k| k as f64).product::<f64>();
            let exact = num / den * PI.sqrt();
            assert_relative_eq!(gamma_fn(n as f64 + 0.5).unwrap(), exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn gamma_recurrence_grid() {
        for i in 0..1000 {
            let x = 0.1 + 48.9 * i as f64 / 999.0;
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn reflection_and_reciprocal() {
        assert_relative_eq!(gamma_real(-0.5), -2.0 * PI.sqrt(), max_relative = 1e-14);
        assert_eq!(rgamma(-3.0), 0.0);
        assert_eq!(rgamma(0.0), 0.0);
        assert_relative_eq!(rgamma(-0.5) * gamma_real(-0.5), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(3.7, 0), 1.0);
        assert_eq!(pochhammer(2.0, 3), 24.0);
        assert_eq!(pochhammer(0.5, 2), 0.75);
    }

    #[test]
    fn hyp2f1_trivial_values() {
        let p = HypergeometricParams::new(0.3, -1.7, 2.2).unwrap();
        assert_eq!(hyp2f1(p, 0.0).unwrap(), 1.0);
        let p = HypergeometricParams::new(0.0, 4.2, 1.0).unwrap();
        assert_eq!(hyp2f1(p, -5.0).unwrap(), 1.0);
    }

    #[test]
    fn hyp2f1_log_identity() {
        let p = HypergeometricParams::new(1.0, 1.0, 2.0).unwrap();
        for &z in &[-0.3f64, -1.0, -7.0, -20.0] {
            let exact = (1.0 - z).ln() / -z;
            assert_relative_eq!(hyp2f1(p, z).unwrap(), exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn hyp2f1_rejects_bad_input() {
        assert!(HypergeometricParams::new(1.0, 1.0, -2.0).is_err());
        let p = HypergeometricParams::new(1.0, 1.0, 2.0).unwrap();
        assert!(hyp2f1(p, 0.5).is_err());
        assert!(hyp2f1(p, f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn series_cap_reports_nonconvergence() {
        let p = HypergeometricParams::new(0.4, 1.6, 1.2).unwrap();
        let cfg = SeriesConfig {
            max_terms: 5,
            ..SeriesConfig::default()
        };
        assert!(matches!(series(p, 0.9, &cfg), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn kernel_parameters_far_from_origin() {
        // large |z| goes through the connection branch
        for &h in &[0.2, 0.35, 0.65, 0.8, 0.95] {
            let p = HypergeometricParams::molchan_golosov(h);
            for &z in &[-0.5, -3.0, -40.0, -1e4, -1e8] {
                let x = hyp2f1(p, z).unwrap();
                let y = hyp2f1(p.swapped(), z).unwrap();
                assert_relative_eq!(x, y, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn elementary_closed_form_half() {
        // F(1/2, 1; 3/2; -x^2) = atan(x) / x
        let p = HypergeometricParams::new(0.5, 1.0, 1.5).unwrap();
        for &x in &[0.1f64, 0.9, 3.0, 30.0, 3000.0] {
            let exact = x.atan() / x;
            assert_relative_eq!(hyp2f1(p, -x * x).unwrap(), exact, max_relative = 1e-11);
        }
    }
}
