//! Coupled Gaussian Volterra noises, Euler simulation of fractional SDEs
//! `dX = b(X) dt + sigma(X) dZ`, Monte Carlo coupling costs, the Lamperti
//! reduction to additive noise, and coefficient/kernel assumption checks.

mod assumptions;
mod control;
mod cost;
mod euler;
mod lamperti;
mod noise;
mod scenario;

pub use assumptions::{assumption_checker, AssumptionReport, CheckResult};
pub use control::CouplingControl;
pub use cost::{estimate_coupling_cost, estimate_with_generator, random_piecewise_controls, CostEstimate};
pub use euler::{euler_fsde, euler_path};
pub use lamperti::{lamperti_inverse, lamperti_transform, LampertiMap};
pub use noise::{simulate_coupled_noise, NoiseGenerator, PathEnsemble, REFINE_LEVELS};
pub use scenario::{run_scenario, KernelFamily, RandomControls, Scenario, ScenarioOutput, DUMPED_PATHS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::ScalarFn;
use crate::kernels::VolterraKernel;

/// Smallest admissible number of time steps.
pub const MIN_STEPS: usize = 8;

/// Paths are aborted once `|X|` exceeds this.
pub const EXPLOSION_BOUND: f64 = 1e12;

/// How the state equation is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Explicit Euler on `X` directly.
    #[default]
    Direct,
    /// Euler on `Y = g(X)` with `g' = 1 / sigma`, mapped back through `g^-1`.
    Lamperti,
}

/// `X(t) = x0 + int_0^t b(X) ds + int_0^t sigma(X) dZ` with `Z` a Volterra noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FsdeSpec {
    pub drift: ScalarFn,
    pub diffusion: ScalarFn,
    pub x0: f64,
    pub noise_kernel: VolterraKernel,
    #[serde(default)]
    pub method: Method,
}

impl FsdeSpec {
    pub fn new(drift: ScalarFn, diffusion: ScalarFn, x0: f64, noise_kernel: VolterraKernel) -> Result<Self> {
        let spec = Self {
            drift,
            diffusion,
            x0,
            noise_kernel,
            method: Method::Direct,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Pure noise `X = x0 + Z`.
    pub fn additive(noise_kernel: VolterraKernel) -> Self {
        Self {
            drift: ScalarFn::Zero,
            diffusion: ScalarFn::constant(1.0),
            x0: 0.0,
            noise_kernel,
            method: Method::Direct,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn horizon(&self) -> f64 {
        self.noise_kernel.horizon
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x0.is_finite() {
            return Err(Error::Invalid("initial state must be finite".into()));
        }
        self.drift.validate()?;
        self.diffusion.validate()?;
        if let Some(h) = self.noise_kernel.hurst() {
            if h < 0.5 {
                return Err(Error::Domain(format!(
                    "Euler simulation needs Hurst >= 1/2 (Young regime), got {h}"
                )));
            }
        }
        Ok(())
    }
}

/// Uniform time grid `t_m = m T / M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if steps < MIN_STEPS {
            return Err(Error::GridTooCoarse(steps));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon {horizon} must be positive")));
        }
        Ok(Self { horizon, steps })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        if m == self.steps {
            self.horizon
        } else {
            m as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|m| self.time(m)).collect()
    }
}
