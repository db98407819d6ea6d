use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::ScalarFn;

/// Singular intensity measures without a Lebesgue density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularTag {
    /// The Cantor measure `dF` on `[0, 1]` (rescaled to the horizon).
    Cantor,
}

/// Quadratic-variation measure `[M](ds)` of a driving Gaussian martingale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntensityMeasure {
    pub density: ScalarFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular: Option<SingularTag>,
}

impl Default for IntensityMeasure {
    fn default() -> Self {
        Self::lebesgue()
    }
}

impl IntensityMeasure {
    pub fn lebesgue() -> Self {
        Self {
            density: ScalarFn::constant(1.0),
            singular: None,
        }
    }

    pub fn with_density(density: ScalarFn) -> Self {
        Self { density, singular: None }
    }

    pub fn cantor() -> Self {
        Self {
            density: ScalarFn::Zero,
            singular: Some(SingularTag::Cantor),
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular.is_some()
    }

    /// Lebesgue density at `s`; an error for singular measures.
    pub fn density_at(&self, s: f64) -> Result<f64> {
        if let Some(tag) = self.singular {
            return Err(Error::UnsupportedMeasure(format!("{tag:?} measure has no density")));
        }
        let d = self.density.eval(s);
        if d < 0.0 {
            return Err(Error::Invalid(format!("negative density {d} at s = {s}")));
        }
        Ok(d)
    }

    /// Density of `sqrt(mu_1 mu_2)` at `s`. Zero as soon as exactly one of
    /// the measures is singular (mutual singularity).
    pub fn geometric_mean_density(a: &Self, b: &Self, s: f64) -> Result<f64> {
        match (a.singular, b.singular) {
            (None, None) => Ok((a.density_at(s)? * b.density_at(s)?).sqrt()),
            (Some(_), None) | (None, Some(_)) => Ok(0.0),
            (Some(x), Some(y)) => Err(Error::UnsupportedMeasure(format!(
                "geometric mean of singular measures {x:?} and {y:?} has no density"
            ))),
        }
    }

    /// Cumulative mass `mu([0, s])` on `[0, horizon]` for singular measures.
    pub fn singular_cdf(&self, s: f64, horizon: f64) -> Option<f64> {
        match self.singular? {
            SingularTag::Cantor => Some(cantor_function((s / horizon).clamp(0.0, 1.0))),
        }
    }
}

/// Ternary digits of the Cantor function examined before truncation.
const CANTOR_DIGITS: usize = 52;

/// Cantor function from the first 52 ternary digits of `t`. The digits are
/// extracted exactly from the binary value of `t`.
pub fn cantor_function(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let bits = t.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut k) = if exp == 0 { (frac, 1074) } else { (frac | (1u64 << 52), 1075 - exp) };
    while m & 1 == 0 && k > 0 {
        m >>= 1;
        k -= 1;
    }
    if k <= 125 {
        cantor_ratio(m as u128, 1u128 << k)
    } else {
        cantor_float(t)
    }
}

/// Cantor function at the exact rational `num / den`, `0 <= num <= den`.
pub fn cantor_function_ratio(num: u64, den: u64) -> f64 {
    assert!(den > 0 && num <= den, "ratio must lie in [0, 1]");
    if num == den {
        return 1.0;
    }
    cantor_ratio(num as u128, den as u128)
}

fn cantor_ratio(mut num: u128, den: u128) -> f64 {
    let mut value = 0.0;
    let mut scale = 0.5;
    for _ in 0..CANTOR_DIGITS {
        num *= 3;
        let digit = num / den;
        num %= den;
        match digit {
            0 => {}
            1 => return value + scale,
            _ => value += scale,
        }
        scale *= 0.5;
    }
    value
}

// Only reached below 2^-72, where every digit error is far under 1e-16.
fn cantor_float(t: f64) -> f64 {
    let mut x = t;
    let mut value = 0.0;
    let mut scale = 0.5;
    for _ in 0..CANTOR_DIGITS {
        x *= 3.0;
        let digit = x.floor();
        x -= digit;
        if digit >= 2.0 {
            value += scale;
        } else if digit >= 1.0 {
            return value + scale;
        }
        scale *= 0.5;
    }
    value
}
