use serde::{Deserialize, Serialize};

use super::{IntensityMeasure, KernelKind, VolterraKernel};
use crate::error::{Error, Result};

/// One kernel/measure pair of a canonical representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Component {
    pub kernel: KernelKind,
    #[serde(default)]
    pub measure: IntensityMeasure,
}

/// Canonical representation `X(t) = sum_{n=1}^N int_0^t k_n(t,s) dM_n(s)`
/// with `[M_n](ds) = mu_n(ds)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct GaussianProcessSpec {
    components: Vec<(VolterraKernel, IntensityMeasure)>,
    horizon: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    horizon: f64,
    components: Vec<Component>,
}

impl TryFrom<RawSpec> for GaussianProcessSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let comps = raw
            .components
            .into_iter()
            .map(|c| Ok((VolterraKernel::new(c.kernel, raw.horizon)?, c.measure)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }
}

impl From<GaussianProcessSpec> for RawSpec {
    fn from(spec: GaussianProcessSpec) -> Self {
        RawSpec {
            horizon: spec.horizon,
            components: spec
                .components
                .into_iter()
                .map(|(k, m)| Component {
                    kernel: k.kind,
                    measure: m,
                })
                .collect(),
        }
    }
}

impl GaussianProcessSpec {
    pub fn new(components: Vec<(VolterraKernel, IntensityMeasure)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Invalid("a process needs at least one component".into()))?;
        let horizon = first.0.horizon;
        for (k, m) in &components {
            if k.horizon != horizon {
                return Err(Error::HorizonMismatch(horizon, k.horizon));
            }
            m.density.validate()?;
        }
        Ok(Self { components, horizon })
    }

    /// Unit-multiplicity process driven by a Lebesgue-intensity martingale.
    pub fn unit(kernel: VolterraKernel) -> Self {
        Self::unit_with(kernel, IntensityMeasure::lebesgue())
    }

    pub fn unit_with(kernel: VolterraKernel, measure: IntensityMeasure) -> Self {
        let horizon = kernel.horizon;
        Self {
            components: vec![(kernel, measure)],
            horizon,
        }
    }

    /// Fractional Brownian motion through its Molchan–Golosov representation.
    pub fn fbm(hurst: f64, horizon: f64) -> Result<Self> {
        Ok(Self::unit(VolterraKernel::molchan_golosov(hurst, horizon)?))
    }

    pub fn brownian(horizon: f64) -> Result<Self> {
        Ok(Self::unit(VolterraKernel::brownian(horizon)?))
    }

    /// Gaussian martingale with unit kernel and Cantor intensity.
    pub fn cantor_martingale(horizon: f64) -> Result<Self> {
        Ok(Self::unit_with(VolterraKernel::brownian(horizon)?, IntensityMeasure::cantor()))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn multiplicity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[(VolterraKernel, IntensityMeasure)] {
        &self.components
    }

    pub fn kernel(&self, n: usize) -> &VolterraKernel {
        &self.components[n].0
    }

    pub fn measure(&self, n: usize) -> &IntensityMeasure {
        &self.components[n].1
    }

    /// Checks `mu_1 >> mu_2 >> ...` on the given nodes: wherever the density
    /// of component `n` vanishes, so must the density of component `n + 1`.
    pub fn check_ordering(&self, nodes: &[f64]) -> Result<()> {
        for (n, pair) in self.components.windows(2).enumerate() {
            let (prev, next) = (&pair[0].1, &pair[1].1);
            if prev.is_singular() || next.is_singular() {
                if prev.singular != next.singular && next.is_singular() {
                    return Err(Error::MeasureOrdering {
                        s: f64::NAN,
                        component: n + 1,
                        prev: n,
                    });
                }
                continue;
            }
            for &s in nodes {
                if prev.density_at(s)? == 0.0 && next.density_at(s)? > 0.0 {
                    return Err(Error::MeasureOrdering {
                        s,
                        component: n + 1,
                        prev: n,
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ScalarFn;

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(GaussianProcessSpec::new(vec![]).is_err());
        let a = VolterraKernel::brownian(1.0).unwrap();
        let b = VolterraKernel::brownian(2.0).unwrap();
        let err = GaussianProcessSpec::new(vec![
            (a, IntensityMeasure::lebesgue()),
            (b, IntensityMeasure::lebesgue()),
        ]);
        assert!(matches!(err, Err(Error::HorizonMismatch(..))));
    }

    #[test]
    fn ordering_violation_detected() {
        let k = VolterraKernel::brownian(1.0).unwrap();
        let half = IntensityMeasure::with_density(ScalarFn::Indicator {
            lo: 0.0,
            hi: 0.5,
            value: 1.0,
        });
        let spec = GaussianProcessSpec::new(vec![(k.clone(), half), (k, IntensityMeasure::lebesgue())]).unwrap();
        let nodes: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        assert!(matches!(spec.check_ordering(&nodes), Err(Error::MeasureOrdering { component: 1, .. })));
    }

    #[test]
    fn json_round_trip() {
        let spec = GaussianProcessSpec::fbm(0.7, 2.0).unwrap();
        let s = serde_json::to_string(&spec).unwrap();
        let back: GaussianProcessSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back.horizon(), 2.0);
        assert_eq!(back.multiplicity(), 1);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        assert!(serde_json::from_str::<GaussianProcessSpec>(r#"{"horizon":1.0,"components":[]}"#).is_err());
    }
}
