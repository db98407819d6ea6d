use serde::{Deserialize, Serialize};

use super::FsdeSpec;

/// `sigma` must stay at least this far above zero.
const DIFFUSION_FLOOR: f64 = 1e-6;
/// Finite-difference slopes above this count as unbounded.
const DERIVATIVE_CAP: f64 = 1e6;
/// Kernel growth constants above this count as unbounded.
const GROWTH_CAP: f64 = 1e6;
const MONOTONE_TOL: f64 = 1e-12;

/// One sampled check with its worst point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Worst value found (minimum, maximum or largest violation, per check).
    pub worst: f64,
    /// Where the worst value occurs: a state, or `(t, s)` for kernel checks.
    pub witness: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub state_range: (f64, f64),
    pub checks: Vec<CheckResult>,
    /// Coefficients Lipschitz, `sigma` positive, bounded and bounded away from zero.
    pub coefficients: bool,
    /// Kernel nonnegative with the power-law growth bound.
    pub kernel: bool,
    /// `b / sigma` non-decreasing (branch i).
    pub drift_ratio_branch: bool,
    /// Kernel non-decreasing in `t` (branch ii).
    pub kernel_monotone_branch: bool,
    /// Everything holds with at least one of the two monotonicity branches.
    pub overall: bool,
}

impl AssumptionReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn result(name: &str, pass: bool, worst: f64, witness: Vec<f64>, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        pass,
        worst,
        witness,
        detail,
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Default range `x0 +- 5 sigma_max sqrt(T)`, with `sigma_max` sampled on `x0 +- 5 sqrt(T)`.
fn default_range(spec: &FsdeSpec, points: usize) -> (f64, f64) {
    let w = 5.0 * spec.horizon().sqrt();
    let smax = linspace(spec.x0 - w, spec.x0 + w, points)
        .into_iter()
        .map(|x| spec.diffusion.eval(x).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    (spec.x0 - w * smax, spec.x0 + w * smax)
}

/// Samples the coefficient and kernel assumptions on `points` states and a
/// `points x points` kernel grid. Never fails; violations are reported.
pub fn assumption_checker(spec: &FsdeSpec, state_range: Option<(f64, f64)>, points: usize) -> AssumptionReport {
    let points = points.max(3);
    let range = state_range.unwrap_or_else(|| default_range(spec, points));
    let xs = linspace(range.0, range.1, points);
    let h = ((range.1 - range.0) / (points - 1) as f64 * 1e-3).max(1e-7);
    let b = &spec.drift;
    let s = &spec.diffusion;
    let mut checks = Vec::new();

    let (smin_x, smin) = xs
        .iter()
        .map(|&x| (x, s.eval(x)))
        .fold((f64::NAN, f64::INFINITY), |a, c| if c.1 < a.1 || c.1.is_nan() { c } else { a });
    let (smax_x, smax) = xs
        .iter()
        .map(|&x| (x, s.eval(x)))
        .fold((f64::NAN, f64::NEG_INFINITY), |a, c| if c.1 > a.1 || c.1.is_nan() { c } else { a });
    checks.push(result(
        "diffusion_bounded_away_from_zero",
        smin >= DIFFUSION_FLOOR,
        smin,
        vec![smin_x],
        format!("min sigma = {smin:e} (floor {DIFFUSION_FLOOR:e})"),
    ));
    checks.push(result(
        "diffusion_bounded",
        smax.is_finite(),
        smax,
        vec![smax_x],
        format!("max sigma = {smax:e}"),
    ));
    for (name, f) in [("drift_derivative_bounded", b), ("diffusion_derivative_bounded", s)] {
        let (x, d) = xs
            .iter()
            .map(|&x| (x, f.derivative(x, h).abs()))
            .fold((f64::NAN, 0.0), |a, c| if c.1 > a.1 || c.1.is_nan() { c } else { a });
        checks.push(result(
            name,
            d.is_finite() && d <= DERIVATIVE_CAP,
            d,
            vec![x],
            format!("max |f'| = {d:e}"),
        ));
    }
    let ratio = |x: f64| b.eval(x) / s.eval(x);
    let (x, drop) = xs
        .windows(2)
        .map(|w| (w[0], ratio(w[0]) - ratio(w[1])))
        .fold((f64::NAN, f64::NEG_INFINITY), |a, c| if c.1 > a.1 || c.1.is_nan() { c } else { a });
    checks.push(result(
        "drift_ratio_nondecreasing",
        drop <= MONOTONE_TOL * (1.0 + ratio(x).abs()),
        drop,
        vec![x],
        format!("largest decrease of b/sigma = {drop:e}"),
    ));

    checks.extend(kernel_checks(spec, points));

    let pass = |n: &str| checks.iter().any(|c| c.name == n && c.pass);
    let coefficients = pass("diffusion_bounded_away_from_zero")
        && pass("diffusion_bounded")
        && pass("drift_derivative_bounded")
        && pass("diffusion_derivative_bounded");
    let kernel = pass("kernel_nonnegative") && pass("kernel_growth_bound");
    let drift_ratio_branch = pass("drift_ratio_nondecreasing");
    let kernel_monotone_branch = pass("kernel_nondecreasing_in_t");
    AssumptionReport {
        state_range: range,
        coefficients,
        kernel,
        drift_ratio_branch,
        kernel_monotone_branch,
        overall: coefficients && kernel && (drift_ratio_branch || kernel_monotone_branch),
        checks,
    }
}

fn kernel_checks(spec: &FsdeSpec, points: usize) -> Vec<CheckResult> {
    let k = &spec.noise_kernel;
    let big_t = k.horizon;
    let h = k.hurst().unwrap_or(0.5);
    let n = points;
    let ts: Vec<f64> = (1..=n).map(|i| big_t * i as f64 / n as f64).collect();
    let ss: Vec<f64> = (0..n).map(|j| big_t * (j as f64 + 0.5) / n as f64).collect();
    let mut vals = vec![vec![f64::NAN; n]; n];
    let mut failure = None;
    for (i, &t) in ts.iter().enumerate() {
        for (j, &s) in ss.iter().enumerate().filter(|(_, &s)| s < t) {
            match k.eval(t, s) {
                Ok(v) => vals[i][j] = v,
                Err(e) => {
                    failure.get_or_insert((t, s, e.to_string()));
                }
            }
        }
    }
    if let Some((t, s, e)) = failure {
        let names = ["kernel_nonnegative", "kernel_growth_bound", "kernel_nondecreasing_in_t"];
        return names
            .iter()
            .map(|n| result(n, false, f64::NAN, vec![t, s], format!("kernel evaluation failed: {e}")))
            .collect();
    }
    let cells = || {
        (0..n).flat_map(move |i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| ss[j] < ts[i])
    };
    let (mut min, mut min_at) = (f64::INFINITY, vec![]);
    let (mut growth, mut growth_at) = (0.0f64, vec![]);
    let mut scale = 0.0f64;
    for (i, j) in cells() {
        let (t, s, v) = (ts[i], ss[j], vals[i][j]);
        scale = scale.max(v.abs());
        if v < min || v.is_nan() {
            min = v;
            min_at = vec![t, s];
        }
        let c = v.abs() / (s.powf(0.5 - h) * (t - s).powf(h - 0.5));
        if !(c <= growth) {
            growth = c;
            growth_at = vec![t, s];
        }
    }
    let (mut drop, mut drop_at) = (f64::NEG_INFINITY, vec![]);
    for j in 0..n {
        let col: Vec<(f64, f64)> = (0..n).filter(|&i| ss[j] < ts[i]).map(|i| (ts[i], vals[i][j])).collect();
        for w in col.windows(2) {
            let d = w[0].1 - w[1].1;
            if d > drop || d.is_nan() {
                drop = d;
                drop_at = vec![w[0].0, ss[j]];
            }
        }
    }
    let tol = MONOTONE_TOL * scale.max(1.0);
    vec![
        result(
            "kernel_nonnegative",
            min >= -tol,
            min,
            min_at,
            format!("min k(t, s) = {min:e}"),
        ),
        result(
            "kernel_growth_bound",
            growth.is_finite() && growth <= GROWTH_CAP,
            growth,
            growth_at,
            format!("max |k| / (s^(1/2-H) (t-s)^(H-1/2)) = {growth:e} with H = {h}"),
        ),
        result(
            "kernel_nondecreasing_in_t",
            drop <= tol,
            drop,
            drop_at,
            format!("largest decrease in t = {drop:e}"),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ScalarFn;
    use crate::kernels::VolterraKernel;

    fn spec(b: ScalarFn, s: ScalarFn, k: VolterraKernel) -> FsdeSpec {
        FsdeSpec::new(b, s, 0.0, k).unwrap()
    }

    #[test]
    fn tanh_drift_passes_everything() {
        let r = assumption_checker(
            &spec(ScalarFn::Tanh, ScalarFn::constant(1.0), VolterraKernel::molchan_golosov(0.7, 1.0).unwrap()),
            None,
            60,
        );
        assert!(r.checks.iter().all(|c| c.pass), "{r:#?}");
        assert!(r.overall);
    }

    #[test]
    fn decreasing_drift_needs_the_kernel_branch() {
        let r = assumption_checker(
            &spec(
                ScalarFn::linear(-1.0),
                ScalarFn::constant(1.0),
                VolterraKernel::riemann_liouville(0.7, 1.0).unwrap(),
            ),
            None,
            60,
        );
        assert!(!r.drift_ratio_branch);
        assert!(r.kernel_monotone_branch);
        assert!(r.overall);
        assert!(r.check("drift_ratio_nondecreasing").unwrap().worst > 0.0);
    }

    #[test]
    fn vanishing_diffusion_is_flagged() {
        let r = assumption_checker(
            &spec(ScalarFn::Zero, ScalarFn::Identity, VolterraKernel::brownian(1.0).unwrap()),
            Some((0.0, 2.0)),
            41,
        );
        let c = r.check("diffusion_bounded_away_from_zero").unwrap();
        assert!(!c.pass);
        assert_eq!(c.witness, vec![0.0]);
        assert!(!r.overall);
    }
}
