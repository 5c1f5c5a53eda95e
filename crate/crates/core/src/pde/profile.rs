use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Macroscopic initial density, defined on the whole line.
///
/// A piecewise-constant profile takes `values[i]` between `breaks[i-1]`
/// and `breaks[i]` (with `breaks[-1] = -inf`, `breaks[n] = +inf`). A sampled
/// profile interpolates linearly and is constant beyond its end nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    Sampled { x: Vec<f64>, u: Vec<f64> },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::PiecewiseConstant {
            breaks: Vec::new(),
            values: vec![value],
        }
    }

    /// `left` for `x < at`, `right` for `x > at`.
    pub fn step(left: f64, right: f64, at: f64) -> Self {
        Profile::PiecewiseConstant {
            breaks: vec![at],
            values: vec![left, right],
        }
    }

    pub fn validate(&self, cap: Option<f64>) -> Result<()> {
        let values = match self {
            Profile::PiecewiseConstant { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::InvalidProfile(format!(
                        "{} breakpoints need {} values, got {}",
                        breaks.len(),
                        breaks.len() + 1,
                        values.len()
                    )));
                }
                if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
                    return Err(Error::InvalidProfile("breakpoints must be finite and increasing".into()));
                }
                values
            }
            Profile::Sampled { x, u } => {
                if x.is_empty() || x.len() != u.len() {
                    return Err(Error::InvalidProfile("sampled profile needs matching nonempty grids".into()));
                }
                if x.windows(2).any(|w| !(w[0] < w[1])) || x.iter().any(|b| !b.is_finite()) {
                    return Err(Error::InvalidProfile("sample nodes must be finite and increasing".into()));
                }
                u
            }
        };
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidProfile(format!("density {v} must be finite and nonnegative")));
        }
        if let Some(k) = cap {
            if let Some(v) = values.iter().find(|v| **v > k) {
                return Err(Error::InvalidProfile(format!("density {v} exceeds the cap {k}")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, at: f64) -> f64 {
        match self {
            Profile::PiecewiseConstant { breaks, values } => values[breaks.partition_point(|&b| b <= at)],
            Profile::Sampled { x, u } => {
                let n = x.len();
                if at <= x[0] {
                    return u[0];
                }
                if at >= x[n - 1] {
                    return u[n - 1];
                }
                let i = x.partition_point(|&b| b <= at) - 1;
                let w = (at - x[i]) / (x[i + 1] - x[i]);
                u[i] * (1.0 - w) + u[i + 1] * w
            }
        }
    }

    pub fn min(&self) -> f64 {
        self.values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn values(&self) -> &[f64] {
        match self {
            Profile::PiecewiseConstant { values, .. } => values,
            Profile::Sampled { u, .. } => u,
        }
    }

    /// Exact `∫_a^b u`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        match self {
            Profile::PiecewiseConstant { breaks, values } => {
                let mut total = 0.0;
                for (i, v) in values.iter().enumerate() {
                    let lo = if i == 0 { f64::NEG_INFINITY } else { breaks[i - 1] };
                    let hi = if i == breaks.len() { f64::INFINITY } else { breaks[i] };
                    let (l, h) = (lo.max(a), hi.min(b));
                    if h > l {
                        total += v * (h - l);
                    }
                }
                total
            }
            Profile::Sampled { .. } => self.sampled_antiderivative(b) - self.sampled_antiderivative(a),
        }
    }

    fn sampled_antiderivative(&self, y: f64) -> f64 {
        let Profile::Sampled { x, u } = self else { unreachable!() };
        let n = x.len();
        if y <= x[0] {
            return (y - x[0]) * u[0];
        }
        let mut acc = 0.0;
        for i in 0..n - 1 {
            if y <= x[i + 1] {
                let h = y - x[i];
                let uy = self.eval(y);
                return acc + 0.5 * h * (u[i] + uy);
            }
            acc += 0.5 * (x[i + 1] - x[i]) * (u[i] + u[i + 1]);
        }
        acc + (y - x[n - 1]) * u[n - 1]
    }

    /// `U0(y) = ∫_0^y u`.
    pub fn potential(&self, y: f64) -> f64 {
        self.integral(0.0, y)
    }

    /// Exact averages over the cells `[edges[i], edges[i+1]]`.
    pub fn cell_averages(&self, edges: &[f64]) -> Vec<f64> {
        edges
            .windows(2)
            .map(|w| self.integral(w[0], w[1]) / (w[1] - w[0]))
            .collect()
    }

    /// Breakpoints where the profile may fail to be smooth.
    pub fn kinks(&self) -> &[f64] {
        match self {
            Profile::PiecewiseConstant { breaks, .. } => breaks,
            Profile::Sampled { x, .. } => x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_profile() {
        let p = Profile::step(1.0, 0.0, 0.0);
        p.validate(Some(1.0)).unwrap();
        assert_eq!(p.eval(-0.1), 1.0);
        assert_eq!(p.eval(0.1), 0.0);
        assert_eq!(p.integral(-2.0, 3.0), 2.0);
        assert_eq!(p.potential(-1.0), -1.0);
        assert_eq!(p.potential(1.0), 0.0);
        assert_eq!(p.cell_averages(&[-0.5, 0.0, 0.5, 1.0]), vec![1.0, 0.0, 0.0]);
        assert_eq!(p.cell_averages(&[-0.5, 0.5]), vec![0.5]);
    }

    #[test]
    fn sampled_profile_integrates_exactly() {
        let p = Profile::Sampled {
            x: vec![0.0, 1.0, 3.0],
            u: vec![1.0, 3.0, 1.0],
        };
        p.validate(None).unwrap();
        assert_eq!(p.eval(0.5), 2.0);
        assert_eq!(p.eval(-5.0), 1.0);
        assert!((p.integral(0.0, 3.0) - 6.0).abs() < 1e-14);
        assert!((p.integral(-1.0, 4.0) - 8.0).abs() < 1e-14);
        assert!((p.integral(0.5, 2.0) - (1.25 + 2.5)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(Profile::constant(-1.0).validate(None).is_err());
        assert!(Profile::constant(3.0).validate(Some(2.0)).is_err());
        let p = Profile::PiecewiseConstant {
            breaks: vec![1.0, 0.0],
            values: vec![0.0, 1.0, 2.0],
        };
        assert!(p.validate(None).is_err());
    }
}
