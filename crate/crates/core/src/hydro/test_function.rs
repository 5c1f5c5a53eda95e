use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Compactly supported continuous test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum TestFunction {
    /// Tent of height 1 on `[center - half_width, center + half_width]`.
    Triangular { center: f64, half_width: f64 },
    /// `exp(-z^2/2) - exp(-9/2)` with `z = (x - center) / sigma`, cut at
    /// `|z| = 3`.
    TruncatedGaussian { center: f64, sigma: f64 },
    /// Plateau of height 1 on `|x - center| <= half_width`, linear ramps of
    /// length `ramp` on both sides.
    SmoothedIndicator { center: f64, half_width: f64, ramp: f64 },
}

const GAUSS_CUT: f64 = 3.0;

impl TestFunction {
    pub fn triangular(center: f64, half_width: f64) -> Self {
        TestFunction::Triangular { center, half_width }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TestFunction::Triangular { center, half_width } => center.is_finite() && half_width > 0.0,
            TestFunction::TruncatedGaussian { center, sigma } => center.is_finite() && sigma > 0.0,
            TestFunction::SmoothedIndicator {
                center,
                half_width,
                ramp,
            } => center.is_finite() && half_width >= 0.0 && ramp > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidExperiment(format!("degenerate test function {self:?}")))
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Triangular { center, half_width } => (1.0 - (x - center).abs() / half_width).max(0.0),
            TestFunction::TruncatedGaussian { center, sigma } => {
                let z = (x - center) / sigma;
                if z.abs() >= GAUSS_CUT {
                    0.0
                } else {
                    (-0.5 * z * z).exp() - (-0.5 * GAUSS_CUT * GAUSS_CUT).exp()
                }
            }
            TestFunction::SmoothedIndicator {
                center,
                half_width,
                ramp,
            } => (1.0 - ((x - center).abs() - half_width) / ramp).clamp(0.0, 1.0),
        }
    }

    /// Closed support `[a, b]`.
    pub fn support(&self) -> (f64, f64) {
        let (c, r) = match *self {
            TestFunction::Triangular { center, half_width } => (center, half_width),
            TestFunction::TruncatedGaussian { center, sigma } => (center, GAUSS_CUT * sigma),
            TestFunction::SmoothedIndicator {
                center,
                half_width,
                ramp,
            } => (center, half_width + ramp),
        };
        (c - r, c + r)
    }

    /// Points where the function is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        let (a, b) = self.support();
        match *self {
            TestFunction::Triangular { center, .. } => vec![a, center, b],
            TestFunction::TruncatedGaussian { .. } => vec![a, b],
            TestFunction::SmoothedIndicator { center, half_width, .. } => {
                vec![a, center - half_width, center + half_width, b]
            }
        }
    }

    /// `∫ |phi|`, in closed form.
    pub fn integral_abs(&self) -> f64 {
        match *self {
            TestFunction::Triangular { half_width, .. } => half_width,
            TestFunction::TruncatedGaussian { sigma, .. } => {
                let k = GAUSS_CUT;
                sigma * (2.0 * std::f64::consts::PI).sqrt() * erf(k / std::f64::consts::SQRT_2)
                    - 2.0 * k * sigma * (-0.5 * k * k).exp()
            }
            TestFunction::SmoothedIndicator { half_width, ramp, .. } => 2.0 * half_width + ramp,
        }
    }

    pub fn id(&self) -> String {
        match *self {
            TestFunction::Triangular { center, half_width } => format!("triangular({center},{half_width})"),
            TestFunction::TruncatedGaussian { center, sigma } => format!("gaussian({center},{sigma})"),
            TestFunction::SmoothedIndicator {
                center,
                half_width,
                ramp,
            } => format!("indicator({center},{half_width},{ramp})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_with_breaks;

    #[test]
    fn closed_form_integrals() {
        let tests = [
            TestFunction::triangular(0.0, 1.0),
            TestFunction::TruncatedGaussian { center: 0.3, sigma: 0.2 },
            TestFunction::SmoothedIndicator {
                center: -1.0,
                half_width: 0.5,
                ramp: 0.25,
            },
        ];
        for t in tests {
            t.validate().unwrap();
            let (a, b) = t.support();
            let q = integrate_with_breaks(|x| t.eval(x).abs(), a - 1.0, b + 1.0, &t.kinks(), 1e-13);
            assert!((q - t.integral_abs()).abs() < 1e-10, "{t:?}: {q}");
            assert_eq!(t.eval(a - 1e-9), 0.0);
            assert_eq!(t.eval(b + 1e-9), 0.0);
        }
        assert_eq!(TestFunction::triangular(0.0, 1.0).integral_abs(), 1.0);
    }
}
