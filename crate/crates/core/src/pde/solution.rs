use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Potential `U(x, t)` on its own grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

/// Density field `u(x, t)` on a grid of points (cell centers for the
/// finite-volume solver).
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField {
    pub x: Vec<f64>,
    pub t: f64,
    pub u: Vec<f64>,
    pub potential: Option<Potential>,
}

impl SolutionField {
    pub fn new(x: Vec<f64>, t: f64, u: Vec<f64>) -> Self {
        SolutionField {
            x,
            t,
            u,
            potential: None,
        }
    }

    /// Quadrature weights: half the distance between neighbours, with the
    /// end cells mirrored.
    pub fn weights(&self) -> Vec<f64> {
        cell_widths(&self.x)
    }

    pub fn mass(&self) -> f64 {
        self.weights().iter().zip(&self.u).map(|(w, u)| w * u).sum()
    }

    pub fn l1_distance(&self, other: &SolutionField) -> Result<f64> {
        if self.x.len() != other.x.len() || self.x.iter().zip(&other.x).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::Solver("solutions live on different grids".into()));
        }
        Ok(self
            .weights()
            .iter()
            .zip(self.u.iter().zip(&other.u))
            .map(|(w, (a, b))| w * (a - b).abs())
            .sum())
    }

    /// L1 distance to a function sampled at the grid points.
    pub fn l1_to(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.weights()
            .iter()
            .zip(self.x.iter().zip(&self.u))
            .map(|(w, (x, u))| w * (u - f(*x)).abs())
            .sum()
    }

    /// Linear interpolation, constant beyond the ends.
    pub fn eval(&self, at: f64) -> f64 {
        let n = self.x.len();
        if n == 1 || at <= self.x[0] {
            return self.u[0];
        }
        if at >= self.x[n - 1] {
            return self.u[n - 1];
        }
        let i = self.x.partition_point(|&b| b <= at) - 1;
        let w = (at - self.x[i]) / (self.x[i + 1] - self.x[i]);
        self.u[i] * (1.0 - w) + self.u[i + 1] * w
    }

    /// CSV with header `x,u`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,u\n");
        for (x, u) in self.x.iter().zip(&self.u) {
            out.push_str(&format!("{x},{u}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(self.to_csv().as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn cell_widths(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                x[1] - x[0]
            } else if i == n - 1 {
                x[n - 1] - x[n - 2]
            } else {
                0.5 * (x[i + 1] - x[i - 1])
            }
        })
        .collect()
}

/// Cell centers of `cells` equal cells covering `[a, b]`.
pub fn cell_centers(a: f64, b: f64, cells: usize) -> Vec<f64> {
    let h = (b - a) / cells as f64;
    (0..cells).map(|i| a + (i as f64 + 0.5) * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_and_mass() {
        let x = cell_centers(0.0, 1.0, 4);
        assert_eq!(x, vec![0.125, 0.375, 0.625, 0.875]);
        let a = SolutionField::new(x.clone(), 0.0, vec![1.0; 4]);
        let b = SolutionField::new(x, 0.0, vec![0.0, 1.0, 1.0, 0.0]);
        assert!((a.mass() - 1.0).abs() < 1e-15);
        assert!((a.l1_distance(&b).unwrap() - 0.5).abs() < 1e-15);
        assert!((a.l1_to(|_| 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(b.eval(0.5), 1.0);
        assert!(a.to_csv().starts_with("x,u\n0.125,1\n"));
    }
}
