use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel values on a rectangular `(t, s)` grid, bilinearly interpolated.
/// `values[i * s.len() + j]` is `k(t[i], s[j])`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabulatedKernel {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Deserialize)]
struct Row {
    t: f64,
    s: f64,
    value: f64,
}

fn strictly_increasing(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::Invalid(format!("tabulated kernel needs at least two {name} coordinates")));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(format!("{name} coordinates must be finite and strictly increasing")));
    }
    Ok(())
}

/// Index `i` with `grid[i] <= x < grid[i+1]` and the local weight, clamped to the grid.
fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let n = grid.len();
    if x <= grid[0] {
        return (0, 0.0);
    }
    if x >= grid[n - 1] {
        return (n - 2, 1.0);
    }
    let i = grid.partition_point(|&g| g <= x) - 1;
    (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
}

impl TabulatedKernel {
    pub fn new(t: Vec<f64>, s: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = Self { t, s, values };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        strictly_increasing("t", &self.t)?;
        strictly_increasing("s", &self.s)?;
        if self.values.len() != self.t.len() * self.s.len() {
            return Err(Error::Dimension(format!(
                "{} values for a {}x{} grid",
                self.values.len(),
                self.t.len(),
                self.s.len()
            )));
        }
        for (i, &t) in self.t.iter().enumerate() {
            for (j, &s) in self.s.iter().enumerate() {
                let v = self.values[i * self.s.len() + j];
                if !v.is_finite() {
                    return Err(Error::Invalid(format!("non-finite kernel value at t = {t}, s = {s}")));
                }
                if s > t && v != 0.0 {
                    return Err(Error::Invalid(format!("kernel value {v} at s = {s} > t = {t} must be 0")));
                }
            }
        }
        Ok(())
    }

    /// Reads CSV with header `t,s,value`. Every grid combination must be present.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "s", "value"] {
            return Err(Error::Invalid("tabulated kernel header must be `t,s,value`".into()));
        }
        let mut cells = BTreeMap::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            if cells.insert((row.t.to_bits(), row.s.to_bits()), (row.t, row.s, row.value)).is_some() {
                return Err(Error::Invalid(format!("duplicate grid point t = {}, s = {}", row.t, row.s)));
            }
        }
        let mut t: Vec<f64> = cells.values().map(|c| c.0).collect();
        let mut s: Vec<f64> = cells.values().map(|c| c.1).collect();
        for v in [&mut t, &mut s] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        if cells.len() != t.len() * s.len() {
            return Err(Error::Invalid(format!(
                "{} rows do not form a rectangular {}x{} grid",
                cells.len(),
                t.len(),
                s.len()
            )));
        }
        let mut values = Vec::with_capacity(cells.len());
        for &ti in &t {
            for &sj in &s {
                values.push(cells[&(ti.to_bits(), sj.to_bits())].2);
            }
        }
        Self::new(t, s, values)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    /// Bilinear interpolation, flat outside the grid; zero for `s > t`.
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        if s > t {
            return 0.0;
        }
        let (i, wt) = locate(&self.t, t);
        let (j, ws) = locate(&self.s, s);
        let n = self.s.len();
        let v = |a: usize, b: usize| self.values[a * n + b];
        (1.0 - wt) * ((1.0 - ws) * v(i, j) + ws * v(i, j + 1)) + wt * ((1.0 - ws) * v(i + 1, j) + ws * v(i + 1, j + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "t,s,value\n0,0,1\n0,1,0\n1,0,3\n1,1,5\n";

    #[test]
    fn loads_and_interpolates() {
        let k = TabulatedKernel::from_csv_reader(CSV.as_bytes()).unwrap();
        assert_eq!(k.t, vec![0.0, 1.0]);
        assert_eq!(k.eval(1.0, 0.5), 4.0);
        assert_eq!(k.eval(0.5, 0.0), 2.0);
        assert_eq!(k.eval(0.5, 0.6), 0.0);
        assert_eq!(k.eval(2.0, 1.0), 5.0);
    }

    #[test]
    fn rejects_noncausal_values() {
        let bad = "t,s,value\n0,0,1\n0,1,2\n1,0,3\n1,1,5\n";
        assert!(TabulatedKernel::from_csv_reader(bad.as_bytes()).is_err());
    }

    #[test]
    fn rejects_ragged_grid_and_bad_header() {
        let ragged = "t,s,value\n0,0,1\n1,0,3\n1,1,5\n";
        assert!(TabulatedKernel::from_csv_reader(ragged.as_bytes()).is_err());
        let header = "time,s,value\n0,0,1\n";
        assert!(TabulatedKernel::from_csv_reader(header.as_bytes()).is_err());
    }
}
