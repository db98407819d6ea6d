use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::euler::Stepper;
use super::{
    estimate_with_generator, random_piecewise_controls, CostEstimate, CouplingControl, FsdeSpec, Method,
    NoiseGenerator, TimeGrid,
};
use crate::error::{Error, Result};
use crate::func::ScalarFn;
use crate::kernels::{KernelKind, VolterraKernel};

/// Number of paths written to the CSV dump.
pub const DUMPED_PATHS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    #[default]
    MolchanGolosov,
    RiemannLiouville,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomControls {
    pub count: usize,
    pub cells: usize,
    pub seed: u64,
}

fn zero_fn() -> ScalarFn {
    ScalarFn::Zero
}

fn default_diffusion() -> ScalarFn {
    ScalarFn::constant(1.0)
}

fn default_controls() -> Vec<CouplingControl> {
    vec![CouplingControl::Synchronous]
}

/// A pair of fSDEs and the controls to price. Kernels are either given in
/// full (`kernel1`, `kernel2`) or built from `family` and `h1`, `h2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub h1: Option<f64>,
    #[serde(default)]
    pub h2: Option<f64>,
    #[serde(default)]
    pub family: KernelFamily,
    #[serde(default)]
    pub kernel1: Option<KernelKind>,
    #[serde(default)]
    pub kernel2: Option<KernelKind>,
    #[serde(default = "zero_fn")]
    pub drift1: ScalarFn,
    #[serde(default = "zero_fn")]
    pub drift2: ScalarFn,
    #[serde(default = "default_diffusion")]
    pub diffusion1: ScalarFn,
    #[serde(default = "default_diffusion")]
    pub diffusion2: ScalarFn,
    #[serde(default)]
    pub x0: [f64; 2],
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "M")]
    pub steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default = "default_controls")]
    pub controls: Vec<CouplingControl>,
    #[serde(default)]
    pub random_controls: Option<RandomControls>,
    #[serde(default)]
    pub method: Method,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioOutput {
    pub estimates: Vec<CostEstimate>,
    /// `path_id,t,x1,x2` rows for the first paths under the first control.
    #[serde(skip)]
    pub path_csv: String,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn kernel(&self, explicit: &Option<KernelKind>, h: Option<f64>, which: &str) -> Result<VolterraKernel> {
        let kind = match (explicit, h) {
            (Some(k), _) => k.clone(),
            (None, Some(h)) => match self.family {
                KernelFamily::MolchanGolosov => KernelKind::MolchanGolosov { hurst: h },
                KernelFamily::RiemannLiouville => KernelKind::RiemannLiouville { hurst: h },
            },
            (None, None) => return Err(Error::Invalid(format!("scenario needs {which} or a kernel"))),
        };
        VolterraKernel::new(kind, self.horizon)
    }

    pub fn specs(&self) -> Result<(FsdeSpec, FsdeSpec)> {
        let k1 = self.kernel(&self.kernel1, self.h1, "h1")?;
        let k2 = self.kernel(&self.kernel2, self.h2, "h2")?;
        let s1 = FsdeSpec::new(self.drift1.clone(), self.diffusion1.clone(), self.x0[0], k1)?.with_method(self.method);
        let s2 = FsdeSpec::new(self.drift2.clone(), self.diffusion2.clone(), self.x0[1], k2)?.with_method(self.method);
        Ok((s1, s2))
    }

    pub fn all_controls(&self) -> Vec<CouplingControl> {
        let mut out = self.controls.clone();
        if let Some(r) = &self.random_controls {
            out.extend(random_piecewise_controls(r.count, r.cells, r.seed));
        }
        out
    }
}

pub fn run_scenario(sc: &Scenario) -> Result<ScenarioOutput> {
    let (s1, s2) = sc.specs()?;
    let grid = TimeGrid::new(sc.horizon, sc.steps)?;
    let gen = NoiseGenerator::new(&s1.noise_kernel, &s2.noise_kernel, grid)?;
    let controls = sc.all_controls();
    if controls.is_empty() {
        return Err(Error::Invalid("scenario lists no controls".into()));
    }
    let estimates = controls
        .iter()
        .map(|c| estimate_with_generator(&gen, &s1, &s2, c, sc.n_paths, sc.seed))
        .collect::<Result<Vec<_>>>()?;
    let path_csv = dump_paths(&gen, &s1, &s2, &controls[0], sc.seed, DUMPED_PATHS.min(sc.n_paths))?;
    Ok(ScenarioOutput { estimates, path_csv })
}

fn dump_paths(
    gen: &NoiseGenerator,
    s1: &FsdeSpec,
    s2: &FsdeSpec,
    control: &CouplingControl,
    seed: u64,
    n: usize,
) -> Result<String> {
    let rhos = gen.cell_correlations(control)?;
    let (st1, st2) = (Stepper::new(s1)?, Stepper::new(s2)?);
    let grid = gen.grid();
    let mut out = String::from("path_id,t,x1,x2\n");
    let (mut x1, mut x2) = (Vec::new(), Vec::new());
    for p in 0..n {
        let (z1, z2) = gen.pair(seed, p, &rhos);
        st1.run(&z1, grid.dt(), p, &mut x1)?;
        st2.run(&z2, grid.dt(), p, &mut x2)?;
        for m in 0..=grid.steps {
            let _ = writeln!(out, "{p},{},{},{}", grid.time(m), x1[m], x2[m]);
        }
    }
    Ok(out)
}
