//! Small statistics toolkit used by the experiments and their tests.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Sample mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return MeanSe { mean: f64::NAN, se: f64::NAN, count };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let se = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        MeanSe { mean, se, count }
    }

    /// Normal-approximation 95% interval.
    pub fn ci95(&self) -> (f64, f64) {
        (self.mean - 1.96 * self.se, self.mean + 1.96 * self.se)
    }

    /// `|mean - target| <= k * se`, with a zero SE meaning exact equality.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

/// Asymptotic Kolmogorov survival function `P(sqrt(n) D > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = 2.0 * (-1f64).powf(j - 1.0) * (-2.0 * j * j * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test of `samples` against `cdf`.
/// Returns `(D, p_value)`. For integer-valued data the asymptotic p-value
/// is conservative, which is the direction we want for acceptance checks.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64, discrete: bool) -> (f64, f64) {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let f = cdf(x);
        let below = i as f64 / n;
        let upto = j as f64 / n;
        d = d.max((upto - f).abs());
        if discrete {
            // left limit of a step CDF at an atom is the CDF just below it
            d = d.max((below - cdf(x - 0.5)).abs());
        } else {
            d = d.max((f - below).abs());
        }
        i = j;
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    (d, kolmogorov_survival(lambda))
}

/// Chi-square homogeneity test of two histograms over the same bins.
/// Bins where both counts are zero are dropped. Returns `(statistic, p)`.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> (f64, f64) {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let (na, nb) = (na as f64, nb as f64);
    let ka = (nb / na).sqrt();
    let kb = (na / nb).sqrt();
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x + y == 0 {
            continue;
        }
        let (x, y) = (x as f64, y as f64);
        stat += (ka * x - kb * y).powi(2) / (x + y);
        bins += 1;
    }
    if bins < 2 {
        return (0.0, 1.0);
    }
    let dist = ChiSquared::new((bins - 1) as f64).expect("positive dof");
    (stat, 1.0 - dist.cdf(stat))
}

/// Kendall's tau-b trend statistic of `values` against their index, with
/// a two-sided normal-approximation p-value.
pub fn kendall_trend(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n < 3 {
        return (0.0, 1.0);
    }
    let mut s: i64 = 0;
    let mut ties = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            match values[j].partial_cmp(&values[i]) {
                Some(std::cmp::Ordering::Greater) => s += 1,
                Some(std::cmp::Ordering::Less) => s -= 1,
                _ => ties += 1,
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let tau = s as f64 / (pairs * (pairs - ties as f64)).sqrt().max(1.0);
    let nf = n as f64;
    let var = nf * (nf - 1.0) * (2.0 * nf + 5.0) / 18.0;
    let z = (s as f64 - (s.signum() as f64)) / var.sqrt();
    let normal = Normal::standard();
    let p = 2.0 * (1.0 - normal.cdf(z.abs()));
    (tau, p)
}

/// Batch means over consecutive equal-length slices of `series`.
pub fn batch_means(series: &[f64], batches: usize) -> Vec<f64> {
    let len = series.len() / batches.max(1);
    (0..batches)
        .map(|b| series[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect()
}
