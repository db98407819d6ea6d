use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic correlation `rho(t)` between the two driving Brownian motions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingControl {
    /// `rho = 1`
    Synchronous,
    /// `rho = -1`
    Antithetic,
    /// `rho = 0`
    Independent,
    /// `values[j]` on the j-th of `values.len()` uniform cells of `[0, T)`, right-continuous.
    PiecewiseConstant { values: Vec<f64> },
    /// `rho[i]` on `[t[i], t[i+1])`, `rho[0]` before `t[0]`, last value after the end.
    Tabulated { t: Vec<f64>, rho: Vec<f64> },
}

impl CouplingControl {
    pub fn validate(&self) -> Result<()> {
        let check = |v: &[f64]| -> Result<()> {
            match v.iter().find(|x| !(x.abs() <= 1.0)) {
                Some(&bad) => Err(Error::Correlation(bad)),
                None => Ok(()),
            }
        };
        match self {
            CouplingControl::PiecewiseConstant { values } => {
                if values.is_empty() {
                    return Err(Error::Invalid("piecewise control needs at least one cell".into()));
                }
                check(values)
            }
            CouplingControl::Tabulated { t, rho } => {
                if t.is_empty() || t.len() != rho.len() {
                    return Err(Error::Invalid("tabulated control needs matching, non-empty t and rho".into()));
                }
                if t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Invalid("tabulated control times must be strictly increasing".into()));
                }
                check(rho)
            }
            _ => Ok(()),
        }
    }

    /// `rho(t)` on `[0, horizon]`.
    pub fn rho_at(&self, t: f64, horizon: f64) -> f64 {
        match self {
            CouplingControl::Synchronous => 1.0,
            CouplingControl::Antithetic => -1.0,
            CouplingControl::Independent => 0.0,
            CouplingControl::PiecewiseConstant { values } => {
                let n = values.len();
                let j = ((t / horizon) * n as f64).floor();
                values[(j.max(0.0) as usize).min(n - 1)]
            }
            CouplingControl::Tabulated { t: ts, rho } => {
                let i = ts.partition_point(|&x| x <= t);
                rho[i.saturating_sub(1)]
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            CouplingControl::Synchronous => "synchronous".into(),
            CouplingControl::Antithetic => "antithetic".into(),
            CouplingControl::Independent => "independent".into(),
            CouplingControl::PiecewiseConstant { values } => format!("piecewise_constant[{}]", values.len()),
            CouplingControl::Tabulated { t, .. } => format!("tabulated[{}]", t.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_is_right_continuous() {
        let c = CouplingControl::PiecewiseConstant {
            values: vec![0.1, -0.2, 0.3, 0.4],
        };
        assert_eq!(c.rho_at(0.0, 1.0), 0.1);
        assert_eq!(c.rho_at(0.25, 1.0), -0.2);
        assert_eq!(c.rho_at(0.2499, 1.0), 0.1);
        assert_eq!(c.rho_at(1.0, 1.0), 0.4);
    }

    #[test]
    fn tabulated_steps() {
        let c = CouplingControl::Tabulated {
            t: vec![0.1, 0.5],
            rho: vec![1.0, -1.0],
        };
        assert_eq!(c.rho_at(0.0, 1.0), 1.0);
        assert_eq!(c.rho_at(0.5, 1.0), -1.0);
        assert_eq!(c.rho_at(0.49, 1.0), 1.0);
    }

    #[test]
    fn rejects_out_of_range() {
        let c = CouplingControl::PiecewiseConstant { values: vec![0.5, 1.5] };
        assert!(matches!(c.validate(), Err(Error::Correlation(v)) if v == 1.5));
        assert!(CouplingControl::PiecewiseConstant { values: vec![f64::NAN] }.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&CouplingControl::Synchronous).unwrap();
        assert_eq!(s, r#"{"kind":"synchronous"}"#);
    }
}
