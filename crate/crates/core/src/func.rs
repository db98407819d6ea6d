//! Named scalar functions used for drifts, diffusions, volatilities and
//! measure densities. The serializable variants form the registry that
//! scenario files refer to.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFn {
    Zero,
    Constant {
        value: f64,
    },
    /// `slope * x + intercept`
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    Tanh,
    Identity,
    /// `offset + amplitude * sin(x)`
    SinOffset {
        offset: f64,
        amplitude: f64,
    },
    /// `1 + x^2 / (1 + x^2)`
    RationalBump,
    /// `value` on `[lo, hi)`, zero elsewhere.
    Indicator {
        lo: f64,
        hi: f64,
        #[serde(default = "one")]
        value: f64,
    },
    /// Piecewise-linear interpolation with flat extrapolation.
    Tabulated {
        x: Vec<f64>,
        y: Vec<f64>,
    },
    #[serde(skip)]
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

fn one() -> f64 {
    1.0
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Zero => write!(f, "Zero"),
            ScalarFn::Constant { value } => write!(f, "Constant({value})"),
            ScalarFn::Linear { slope, intercept } => write!(f, "Linear({slope}, {intercept})"),
            ScalarFn::Tanh => write!(f, "Tanh"),
            ScalarFn::Identity => write!(f, "Identity"),
            ScalarFn::SinOffset { offset, amplitude } => write!(f, "SinOffset({offset}, {amplitude})"),
            ScalarFn::RationalBump => write!(f, "RationalBump"),
            ScalarFn::Indicator { lo, hi, value } => write!(f, "Indicator([{lo}, {hi}), {value})"),
            ScalarFn::Tabulated { x, .. } => write!(f, "Tabulated({} points)", x.len()),
            ScalarFn::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl ScalarFn {
    pub fn constant(value: f64) -> Self {
        ScalarFn::Constant { value }
    }

    pub fn linear(slope: f64) -> Self {
        ScalarFn::Linear {
            slope,
            intercept: 0.0,
        }
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        ScalarFn::Custom(Arc::new(f))
    }

    pub fn tabulated(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let f = ScalarFn::Tabulated { x, y };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if let ScalarFn::Tabulated { x, y } = self {
            if x.is_empty() || x.len() != y.len() {
                return Err(Error::Invalid("tabulated function needs matching, non-empty x and y".into()));
            }
            if x.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Invalid("tabulated abscissae must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Zero => 0.0,
            ScalarFn::Constant { value } => *value,
            ScalarFn::Linear { slope, intercept } => slope * x + intercept,
            ScalarFn::Tanh => x.tanh(),
            ScalarFn::Identity => x,
            ScalarFn::SinOffset { offset, amplitude } => offset + amplitude * x.sin(),
            ScalarFn::RationalBump => 1.0 + x * x / (1.0 + x * x),
            ScalarFn::Indicator { lo, hi, value } => {
                if x >= *lo && x < *hi {
                    *value
                } else {
                    0.0
                }
            }
            ScalarFn::Tabulated { x: xs, y: ys } => interp_linear(xs, ys, x),
            ScalarFn::Custom(f) => f(x),
        }
    }

    /// Central finite difference with step `h`.
    pub fn derivative(&self, x: f64, h: f64) -> f64 {
        (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)
    }
}

pub(crate) fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] * (1.0 - w) + ys[i + 1] * w
}
