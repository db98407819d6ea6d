use crate::error::{Error, Result};
use crate::func::ScalarFn;
use crate::quadrature::{adaptive, gauss_legendre};

const LOCAL_TOL: f64 = 1e-13;
const INVERSE_TOL: f64 = 1e-10;
const TABLE_PANELS: usize = 512;

fn positive(sigma: &ScalarFn, x: f64) -> Result<f64> {
    let v = sigma.eval(x);
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonPositiveDiffusion(x))
    }
}

/// `g(x) = int_{x0}^x 1 / sigma`, adaptively on `quad_nodes` equal panels.
/// `sigma` is checked for positivity at every panel end.
pub fn lamperti_transform(sigma: &ScalarFn, x0: f64, x: f64, quad_nodes: usize) -> Result<f64> {
    if !(x0.is_finite() && x.is_finite()) {
        return Err(Error::Domain("Lamperti transform needs finite arguments".into()));
    }
    let n = quad_nodes.max(1);
    let h = (x - x0) / n as f64;
    let mut total = 0.0;
    positive(sigma, x0)?;
    for i in 0..n {
        let a = x0 + i as f64 * h;
        let b = if i + 1 == n { x } else { a + h };
        positive(sigma, b)?;
        let mut bad = None;
        let part = adaptive(
            |u| match positive(sigma, u) {
                Ok(v) => 1.0 / v,
                Err(_) => {
                    bad.get_or_insert(u);
                    0.0
                }
            },
            a,
            b,
            LOCAL_TOL * h.abs().max(f64::MIN_POSITIVE),
        )?;
        if let Some(u) = bad {
            return Err(Error::NonPositiveDiffusion(u));
        }
        total += part;
    }
    Ok(total)
}

/// `g^-1(y)` by safeguarded Newton iteration, `|g(g^-1(y)) - y| <= 1e-10`.
pub fn lamperti_inverse(sigma: &ScalarFn, x0: f64, y: f64, quad_nodes: usize) -> Result<f64> {
    let g = |x: f64| lamperti_transform(sigma, x0, x, quad_nodes);
    let (lo, hi) = bracket(&g, x0, y, positive(sigma, x0)?)?;
    newton(g, |x| positive(sigma, x), y, lo, hi)
}

fn bracket<G: Fn(f64) -> Result<f64>>(g: G, x0: f64, y: f64, scale: f64) -> Result<(f64, f64)> {
    let mut step = scale.max(1e-3) * y.abs().max(1.0);
    let mut edge = x0;
    for _ in 0..200 {
        let next = if y >= 0.0 { edge + step } else { edge - step };
        let gv = g(next)?;
        if (y >= 0.0 && gv >= y) || (y < 0.0 && gv <= y) {
            return Ok(if y >= 0.0 { (edge, next) } else { (next, edge) });
        }
        edge = next;
        step *= 2.0;
    }
    Err(Error::Domain(format!("no preimage found for Lamperti value {y}")))
}

fn newton<G, S>(g: G, sigma: S, y: f64, mut lo: f64, mut hi: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
    S: Fn(f64) -> Result<f64>,
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = g(x)? - y;
        if r.abs() <= INVERSE_TOL {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let cand = x - r * sigma(x)?;
        x = if cand > lo && cand < hi { cand } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * x.abs().max(1.0) {
            let r = g(x)? - y;
            if r.abs() <= INVERSE_TOL {
                return Ok(x);
            }
            break;
        }
    }
    Err(Error::Domain(format!("Lamperti inverse did not converge at y = {y}")))
}

/// Tabulated `g` on a fixed window around `x0` with an 8-point Gauss rule
/// inside each panel; falls back to [`lamperti_transform`] outside.
#[derive(Debug, Clone)]
pub struct LampertiMap {
    sigma: ScalarFn,
    x0: f64,
    step: f64,
    /// `g` at `x0 + (i - TABLE_PANELS / 2) step`.
    table: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
}

impl LampertiMap {
    /// Table covering `x0 +- half_width`.
    pub fn new(sigma: ScalarFn, x0: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Domain(format!("table half width {half_width} must be positive")));
        }
        let step = 2.0 * half_width / TABLE_PANELS as f64;
        let mut map = Self {
            sigma,
            x0,
            step,
            table: vec![0.0; TABLE_PANELS + 1],
            gl: gauss_legendre(8),
        };
        let mid = TABLE_PANELS / 2;
        for i in mid..TABLE_PANELS {
            map.table[i + 1] = map.table[i] + map.panel(map.node(i), map.node(i + 1))?;
        }
        for i in (0..mid).rev() {
            map.table[i] = map.table[i + 1] - map.panel(map.node(i), map.node(i + 1))?;
        }
        Ok(map)
    }

    fn node(&self, i: usize) -> f64 {
        self.x0 + (i as f64 - (TABLE_PANELS / 2) as f64) * self.step
    }

    fn panel(&self, a: f64, b: f64) -> Result<f64> {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = 0.0;
        for (x, w) in self.gl.0.iter().zip(&self.gl.1) {
            s += w / positive(&self.sigma, c + r * x)?;
        }
        Ok(s * r)
    }

    pub fn sigma(&self, x: f64) -> Result<f64> {
        positive(&self.sigma, x)
    }

    pub fn forward(&self, x: f64) -> Result<f64> {
        let lo = self.node(0);
        let hi = self.node(TABLE_PANELS);
        if x < lo {
            return Ok(self.table[0] - lamperti_transform(&self.sigma, x, lo, 16)?);
        }
        if x > hi {
            return Ok(self.table[TABLE_PANELS] + lamperti_transform(&self.sigma, hi, x, 16)?);
        }
        let i = (((x - lo) / self.step).floor() as usize).min(TABLE_PANELS - 1);
        Ok(self.table[i] + self.panel(self.node(i), x)?)
    }

    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (lo, hi) = if y >= self.table[0] && y <= self.table[TABLE_PANELS] {
            let j = self.table.partition_point(|&g| g <= y).clamp(1, TABLE_PANELS);
            (self.node(j - 1), self.node(j))
        } else {
            bracket(|x| self.forward(x), self.x0, y, self.sigma(self.x0)?)?
        };
        newton(|x| self.forward(x), |x| self.sigma(x), y, lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_diffusion_is_a_shift() {
        let s = ScalarFn::constant(1.0);
        assert!((lamperti_transform(&s, 0.3, 2.0, 4).unwrap() - 1.7).abs() < 1e-14);
        assert!((lamperti_inverse(&s, 0.3, 1.7, 4).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn linear_diffusion_gives_log() {
        let s = ScalarFn::Identity;
        for x in [0.2, 1.0, 3.5] {
            assert!((lamperti_transform(&s, 1.0, x, 8).unwrap() - x.ln()).abs() < 1e-12);
        }
        assert!(matches!(
            lamperti_transform(&s, 1.0, -0.5, 8),
            Err(Error::NonPositiveDiffusion(_))
        ));
    }

    #[test]
    fn refinement_agrees() {
        let s = ScalarFn::RationalBump;
        let a = lamperti_transform(&s, -0.4, 2.5, 10).unwrap();
        let b = lamperti_transform(&s, -0.4, 2.5, 100).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn map_matches_direct_and_inverts() {
        let s = ScalarFn::SinOffset {
            offset: 2.0,
            amplitude: 1.0,
        };
        let map = LampertiMap::new(s.clone(), 0.5, 4.0).unwrap();
        for x in [-7.0, -1.2, 0.5, 0.51, 3.9, 9.0] {
            let direct = lamperti_transform(&s, 0.5, x, 32).unwrap();
            let y = map.forward(x).unwrap();
            assert!((y - direct).abs() < 1e-12, "{x}: {y} vs {direct}");
            let back = map.inverse(y).unwrap();
            assert!((map.forward(back).unwrap() - y).abs() <= 1e-10);
            assert!((back - x).abs() < 1e-9);
        }
    }
}
