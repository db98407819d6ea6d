//! Volterra kernels `k(t, s)`, intensity measures and canonical process
//! representations `X(t) = sum_n int_0^t k_n(t, s) dM_n(s)`.

mod covariance;
mod measure;
mod process;
mod tabulated;

pub use covariance::{covariance, covariance_matrix};
pub use measure::{cantor_function, cantor_function_ratio, IntensityMeasure, SingularTag};
pub use process::GaussianProcessSpec;
pub use tabulated::TabulatedKernel;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::ScalarFn;
use crate::quadrature::{kernel_grading, Cluster, Rule, Scheme};
use crate::specfun::{gamma_real, hyp2f1, HypergeometricParams};

/// Sign convention of the exponential weight in the fOU kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FouConvention {
    /// `k_H(t,s) + int_s^t e^{lambda (t-r)} k_H(r,s) dr`
    AsPrinted,
    /// `k_H(t,s) - lambda int_s^t e^{-lambda (t-r)} k_H(r,s) dr`, the kernel of
    /// `int_0^t e^{-lambda (t-u)} dB_H(u)`, i.e. of `dX = -lambda X dt + dB_H`.
    #[default]
    MildSolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FouBase {
    #[default]
    MolchanGolosov,
    RiemannLiouville,
}

fn default_quad_nodes() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelKind {
    MolchanGolosov {
        hurst: f64,
    },
    RiemannLiouville {
        hurst: f64,
    },
    FractionalOu {
        hurst: f64,
        lambda: f64,
        #[serde(default)]
        base: FouBase,
        #[serde(default)]
        convention: FouConvention,
        #[serde(default = "default_quad_nodes")]
        quad_nodes: usize,
    },
    Brownian,
    /// `k(t, s) = volatility(s)` for `s <= t`: a Gaussian martingale.
    ConstantVolatility {
        volatility: ScalarFn,
    },
    /// Lévy's non-canonical kernel `3 - 12 (s/t) + 10 (s/t)^2` of a Brownian motion.
    LevyNoncanonical,
    Tabulated(TabulatedKernel),
    /// `base` restricted to `s` in `[s_lo, s_hi)`.
    Windowed {
        base: Box<KernelKind>,
        s_lo: f64,
        s_hi: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolterraKernel {
    pub kind: KernelKind,
    pub horizon: f64,
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Hurst parameter {hurst} outside (0, 1)")))
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("horizon {horizon} must be positive")))
    }
}

/// Normalising constant making `int k_H(t,r) k_H(s,r) dr` the fBM covariance:
/// `c_H^2 = 2H Gamma(3/2 - H) Gamma(H + 1/2) / Gamma(2 - 2H)`.
pub fn mg_normalisation(hurst: f64) -> f64 {
    if hurst == 0.5 {
        return 1.0;
    }
    (2.0 * hurst * gamma_real(1.5 - hurst) * gamma_real(hurst + 0.5) / gamma_real(2.0 - 2.0 * hurst)).sqrt()
}

/// Molchan–Golosov kernel of a standard fractional Brownian motion:
/// `c_H / Gamma(H+1/2) (t-s)^(H-1/2) F(H-1/2, 1/2-H; H+1/2; 1-t/s)` for `s <= t`.
pub fn eval_mg_kernel(hurst: f64, t: f64, s: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if s > t {
        return Ok(0.0);
    }
    if hurst == 0.5 {
        return Ok(1.0);
    }
    if s <= 0.0 {
        return Err(Error::Singularity);
    }
    if s == t {
        return Ok(0.0);
    }
    let prefactor = mg_normalisation(hurst) / gamma_real(hurst + 0.5);
    let f = hyp2f1(HypergeometricParams::molchan_golosov(hurst), 1.0 - t / s)?;
    Ok(prefactor * (t - s).powf(hurst - 0.5) * f)
}

/// Riemann–Liouville kernel `Gamma(H+1/2)^-1 (t-s)^(H-1/2)` for `s < t`, zero on and above the diagonal.
pub fn eval_rl_kernel(hurst: f64, t: f64, s: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if s >= t {
        return Ok(0.0);
    }
    if hurst == 0.5 {
        return Ok(1.0);
    }
    Ok((t - s).powf(hurst - 0.5) / gamma_real(hurst + 0.5))
}

fn eval_fou_with_base(
    hurst: f64,
    lambda: f64,
    t: f64,
    s: f64,
    quad_nodes: usize,
    base: FouBase,
    convention: FouConvention,
) -> Result<f64> {
    check_hurst(hurst)?;
    if s > t {
        return Ok(0.0);
    }
    let base_eval = |u: f64| match base {
        FouBase::MolchanGolosov => eval_mg_kernel(hurst, u, s),
        FouBase::RiemannLiouville => eval_rl_kernel(hurst, u, s),
    };
    let head = if s == t && hurst == 0.5 {
        1.0
    } else {
        base_eval(t)?
    };
    if s == t || lambda == 0.0 && convention == FouConvention::MildSolution {
        return Ok(head);
    }
    let rule = Rule::graded(s, t, quad_nodes, kernel_grading(hurst), Cluster::Left, Scheme::GradedGaussLegendre);
    let tail = match convention {
        FouConvention::AsPrinted => rule.try_integrate(|r| Ok((lambda * (t - r)).exp() * base_eval(r)?))?,
        FouConvention::MildSolution => -lambda * rule.try_integrate(|r| Ok((-lambda * (t - r)).exp() * base_eval(r)?))?,
    };
    Ok(head + tail)
}

/// Kernel of the fractional Ornstein–Uhlenbeck process with Molchan–Golosov base.
pub fn eval_fou_kernel(
    hurst: f64,
    lambda: f64,
    t: f64,
    s: f64,
    quad_nodes: usize,
    convention: FouConvention,
) -> Result<f64> {
    eval_fou_with_base(hurst, lambda, t, s, quad_nodes, FouBase::MolchanGolosov, convention)
}

impl KernelKind {
    pub fn eval(&self, t: f64, s: f64) -> Result<f64> {
        if s > t {
            return Ok(0.0);
        }
        match self {
            KernelKind::MolchanGolosov { hurst } => eval_mg_kernel(*hurst, t, s),
            KernelKind::RiemannLiouville { hurst } => eval_rl_kernel(*hurst, t, s),
            KernelKind::FractionalOu {
                hurst,
                lambda,
                base,
                convention,
                quad_nodes,
            } => eval_fou_with_base(*hurst, *lambda, t, s, *quad_nodes, *base, *convention),
            KernelKind::Brownian => Ok(1.0),
            KernelKind::ConstantVolatility { volatility } => Ok(volatility.eval(s)),
            KernelKind::LevyNoncanonical => {
                if t <= 0.0 {
                    return Ok(0.0);
                }
                let x = s / t;
                Ok(3.0 - 12.0 * x + 10.0 * x * x)
            }
            KernelKind::Tabulated(tab) => Ok(tab.eval(t, s)),
            KernelKind::Windowed { base, s_lo, s_hi } => {
                if s >= *s_lo && s < *s_hi {
                    base.eval(t, s)
                } else {
                    Ok(0.0)
                }
            }
        }
    }

    /// Hurst parameter of fractional kinds.
    pub fn hurst(&self) -> Option<f64> {
        match self {
            KernelKind::MolchanGolosov { hurst }
            | KernelKind::RiemannLiouville { hurst }
            | KernelKind::FractionalOu { hurst, .. } => Some(*hurst),
            KernelKind::Windowed { base, .. } => base.hurst(),
            _ => None,
        }
    }

    /// Exponent `alpha` with `k(t, s) ~ s^alpha` as `s -> 0` (zero when bounded).
    pub fn origin_exponent(&self) -> f64 {
        match self {
            KernelKind::MolchanGolosov { hurst }
            | KernelKind::FractionalOu {
                hurst,
                base: FouBase::MolchanGolosov,
                ..
            } => (0.5 - hurst).min(0.0),
            KernelKind::Windowed { base, .. } => base.origin_exponent(),
            _ => 0.0,
        }
    }

    /// Exponent `beta` with `k(t, s) ~ (t - s)^beta` as `t -> s`.
    pub fn diagonal_exponent(&self) -> f64 {
        match self {
            KernelKind::MolchanGolosov { hurst }
            | KernelKind::RiemannLiouville { hurst }
            | KernelKind::FractionalOu { hurst, .. } => hurst - 0.5,
            KernelKind::Windowed { base, .. } => base.diagonal_exponent(),
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            KernelKind::MolchanGolosov { hurst } | KernelKind::RiemannLiouville { hurst } => check_hurst(*hurst),
            KernelKind::FractionalOu {
                hurst,
                lambda,
                quad_nodes,
                ..
            } => {
                check_hurst(*hurst)?;
                if !lambda.is_finite() {
                    return Err(Error::Domain("fOU lambda must be finite".into()));
                }
                if *quad_nodes == 0 {
                    return Err(Error::Invalid("fOU quadrature needs at least one node".into()));
                }
                Ok(())
            }
            KernelKind::ConstantVolatility { volatility } => volatility.validate(),
            KernelKind::Tabulated(tab) => tab.validate(),
            KernelKind::Windowed { base, s_lo, s_hi } => {
                if !(s_lo < s_hi) {
                    return Err(Error::Invalid(format!("empty kernel window [{s_lo}, {s_hi})")));
                }
                base.validate()
            }
            KernelKind::Brownian | KernelKind::LevyNoncanonical => Ok(()),
        }
    }
}

impl VolterraKernel {
    pub fn new(kind: KernelKind, horizon: f64) -> Result<Self> {
        check_horizon(horizon)?;
        kind.validate()?;
        Ok(Self { kind, horizon })
    }

    pub fn molchan_golosov(hurst: f64, horizon: f64) -> Result<Self> {
        Self::new(KernelKind::MolchanGolosov { hurst }, horizon)
    }

    pub fn riemann_liouville(hurst: f64, horizon: f64) -> Result<Self> {
        Self::new(KernelKind::RiemannLiouville { hurst }, horizon)
    }

    pub fn fractional_ou(hurst: f64, lambda: f64, horizon: f64) -> Result<Self> {
        Self::new(
            KernelKind::FractionalOu {
                hurst,
                lambda,
                base: FouBase::MolchanGolosov,
                convention: FouConvention::MildSolution,
                quad_nodes: default_quad_nodes(),
            },
            horizon,
        )
    }

    pub fn brownian(horizon: f64) -> Result<Self> {
        Self::new(KernelKind::Brownian, horizon)
    }

    pub fn constant_volatility(volatility: ScalarFn, horizon: f64) -> Result<Self> {
        Self::new(KernelKind::ConstantVolatility { volatility }, horizon)
    }

    pub fn eval(&self, t: f64, s: f64) -> Result<f64> {
        self.kind.eval(t, s)
    }

    pub fn hurst(&self) -> Option<f64> {
        self.kind.hurst()
    }

    pub fn origin_exponent(&self) -> f64 {
        self.kind.origin_exponent()
    }

    pub fn diagonal_exponent(&self) -> f64 {
        self.kind.diagonal_exponent()
    }

    /// Replaces the fOU quadrature resolution, if this is an fOU kernel.
    pub fn with_kernel_quad_nodes(mut self, nodes: usize) -> Self {
        if let KernelKind::FractionalOu { quad_nodes, .. } = &mut self.kind {
            *quad_nodes = nodes;
        }
        self
    }
}
