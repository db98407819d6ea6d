use rayon::prelude::*;

use super::{FsdeSpec, LampertiMap, Method, PathEnsemble, EXPLOSION_BOUND};
use crate::error::{Error, Result};

/// One explicit Euler recursion, either on `X` or on its Lamperti image.
pub(crate) struct Stepper<'a> {
    spec: &'a FsdeSpec,
    map: Option<LampertiMap>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(spec: &'a FsdeSpec) -> Result<Self> {
        spec.validate()?;
        let map = match spec.method {
            Method::Direct => None,
            Method::Lamperti => {
                let s0 = spec.diffusion.eval(spec.x0);
                if !(s0 > 0.0) {
                    return Err(Error::NonPositiveDiffusion(spec.x0));
                }
                let width = 8.0 * s0 * spec.horizon().sqrt() + 1.0;
                Some(LampertiMap::new(spec.diffusion.clone(), spec.x0, width)?)
            }
        };
        Ok(Self { spec, map })
    }

    /// States at the grid times given the noise values `z` there.
    pub(crate) fn run(&self, z: &[f64], dt: f64, path: usize, out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        out.push(self.spec.x0);
        let b = &self.spec.drift;
        let s = &self.spec.diffusion;
        match &self.map {
            None => {
                let mut x = self.spec.x0;
                for m in 0..z.len() - 1 {
                    x += b.eval(x) * dt + s.eval(x) * (z[m + 1] - z[m]);
                    guard(x, path, m + 1)?;
                    out.push(x);
                }
            }
            Some(map) => {
                let (mut x, mut y) = (self.spec.x0, 0.0);
                for m in 0..z.len() - 1 {
                    y += b.eval(x) / map.sigma(x)? * dt + (z[m + 1] - z[m]);
                    guard(y, path, m + 1)?;
                    x = map.inverse(y)?;
                    guard(x, path, m + 1)?;
                    out.push(x);
                }
            }
        }
        Ok(())
    }
}

fn guard(x: f64, path: usize, step: usize) -> Result<()> {
    if x.is_finite() && x.abs() <= EXPLOSION_BOUND {
        Ok(())
    } else {
        Err(Error::Explosion { path, step, value: x.abs() })
    }
}

/// `X_{m+1} = X_m + b(X_m) dt + sigma(X_m) (Z_{m+1} - Z_m)` for a single noise path.
pub fn euler_path(spec: &FsdeSpec, z: &[f64], dt: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(z.len());
    Stepper::new(spec)?.run(z, dt, 0, &mut out)?;
    Ok(out)
}

/// Euler states for every path of a noise ensemble.
pub fn euler_fsde(spec: &FsdeSpec, noise: &PathEnsemble) -> Result<PathEnsemble> {
    let t_end = *noise.times.last().ok_or_else(|| Error::Invalid("empty noise grid".into()))?;
    if (t_end - spec.horizon()).abs() > 1e-12 * spec.horizon() {
        return Err(Error::HorizonMismatch(spec.horizon(), t_end));
    }
    let dt = t_end / noise.steps() as f64;
    let stepper = Stepper::new(spec)?;
    let results: Vec<Result<Vec<f64>>> = noise
        .paths
        .par_iter()
        .enumerate()
        .map(|(p, z)| {
            let mut out = Vec::with_capacity(z.len());
            stepper.run(z, dt, p, &mut out).map(|_| out)
        })
        .collect();
    let paths = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(PathEnsemble {
        times: noise.times.clone(),
        paths,
        seed: noise.seed,
        substreams: noise.substreams.clone(),
    })
}
