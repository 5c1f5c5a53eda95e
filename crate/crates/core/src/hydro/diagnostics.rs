use serde::{Deserialize, Serialize};

use crate::dynamics::Configuration;
use crate::environment::{DisorderLaw, RateField, RateFunction};
use crate::equilibria::{density_rho, mean_occupancy};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::stats::{kendall_trend, MeanSe};

pub const DECILES: usize = 10;

/// Site indices grouped by rate decile, slowest first. Ties are broken
/// by site index; group sizes differ by at most one.
pub fn decile_groups(field: &RateField) -> Vec<Vec<usize>> {
    let alphas = field.alphas();
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&a, &b| alphas[a].total_cmp(&alphas[b]).then(a.cmp(&b)));
    let l = order.len();
    (0..DECILES)
        .map(|d| order[d * l / DECILES..(d + 1) * l / DECILES].to_vec())
        .collect()
}

/// Condensation observables along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagnostics {
    pub times: Vec<f64>,
    pub max_occupancy: Vec<u32>,
    /// Per snapshot, mass share of each decile (slowest first).
    pub decile_shares: Vec<Vec<f64>>,
    /// Per snapshot, mean occupancy of each decile.
    pub decile_mean_occupancy: Vec<Vec<f64>>,
    /// Per decile, mean rate.
    pub decile_mean_alpha: Vec<f64>,
    /// Kendall tau and two-sided p-value of the max-occupancy series.
    pub max_trend: (f64, f64),
}

impl PhaseDiagnostics {
    pub fn slow_decile_share(&self) -> Vec<f64> {
        self.decile_shares.iter().map(|s| s[0]).collect()
    }

    /// Time average of each decile share over snapshots from `from` on,
    /// with the snapshot spread as SE (snapshots are assumed well spaced).
    pub fn mean_shares(&self, from: usize) -> Vec<MeanSe> {
        (0..DECILES)
            .map(|d| {
                let v: Vec<f64> = self.decile_shares.iter().skip(from).map(|s| s[d]).collect();
                MeanSe::of(&v)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,max_occupancy,slow_decile_share\n");
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t},{},{}\n", self.max_occupancy[i], self.decile_shares[i][0]));
        }
        out
    }

    pub fn decile_csv(&self, from: usize) -> String {
        let shares = self.mean_shares(from);
        let mut out = String::from("decile,mean_alpha,mean_occupancy,share,share_se\n");
        for d in 0..DECILES {
            let occ: Vec<f64> = self.decile_mean_occupancy.iter().skip(from).map(|s| s[d]).collect();
            out.push_str(&format!(
                "{d},{},{},{},{}\n",
                self.decile_mean_alpha[d],
                MeanSe::of(&occ).mean,
                shares[d].mean,
                shares[d].se
            ));
        }
        out
    }
}

pub fn platoon_diagnostics(snapshots: &[(f64, Configuration)], field: &RateField) -> Result<PhaseDiagnostics> {
    if field.len() < DECILES {
        return Err(Error::InvalidExperiment(format!(
            "decile diagnostics need at least {DECILES} sites, got {}",
            field.len()
        )));
    }
    if snapshots.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::InvalidExperiment("snapshots must be in increasing time".into()));
    }
    if let Some((_, c)) = snapshots.iter().find(|(_, c)| c.len() != field.len()) {
        return Err(Error::InvalidConfiguration(format!(
            "snapshot has {} sites but the rate field has {}",
            c.len(),
            field.len()
        )));
    }
    let groups = decile_groups(field);
    let alphas = field.alphas();
    let decile_mean_alpha = groups
        .iter()
        .map(|g| g.iter().map(|&x| alphas[x]).sum::<f64>() / g.len() as f64)
        .collect();
    let mut times = Vec::with_capacity(snapshots.len());
    let mut max_occupancy = Vec::with_capacity(snapshots.len());
    let mut decile_shares = Vec::with_capacity(snapshots.len());
    let mut decile_mean_occupancy = Vec::with_capacity(snapshots.len());
    for (t, config) in snapshots {
        let eta = config.occupancy();
        let mass: Vec<f64> = groups
            .iter()
            .map(|g| g.iter().map(|&x| f64::from(eta[x])).sum())
            .collect();
        let total: f64 = mass.iter().sum();
        times.push(*t);
        max_occupancy.push(config.max_occupancy());
        // An empty configuration has no mass to share; report zeros.
        decile_shares.push(mass.iter().map(|m| if total > 0.0 { m / total } else { 0.0 }).collect());
        decile_mean_occupancy.push(mass.iter().zip(&groups).map(|(m, g)| m / g.len() as f64).collect());
    }
    let series: Vec<f64> = max_occupancy.iter().map(|&m| f64::from(m)).collect();
    let max_trend = if series.len() >= 3 { kendall_trend(&series) } else { (0.0, 1.0) };
    Ok(PhaseDiagnostics {
        times,
        max_occupancy,
        decile_shares,
        decile_mean_occupancy,
        decile_mean_alpha,
        max_trend,
    })
}

/// Decile shares expected under the quenched product measure at fugacity
/// `phi` on this field.
pub fn predicted_decile_shares(field: &RateField, rate: &RateFunction, phi: f64) -> Result<Vec<f64>> {
    let alphas = field.alphas();
    let mass: Vec<f64> = decile_groups(field)
        .iter()
        .map(|g| g.iter().map(|&x| mean_occupancy(phi / alphas[x], rate)).sum::<Result<f64>>())
        .collect::<Result<_>>()?;
    let total: f64 = mass.iter().sum();
    Ok(mass.iter().map(|m| m / total).collect())
}

/// Decile shares in the infinite-volume limit: the integral of `M(phi/alpha)`
/// over each tenth of the quantile range of the law, divided by `rho(phi)`.
pub fn annealed_decile_shares(law: &DisorderLaw, rate: &RateFunction, phi: f64) -> Result<Vec<f64>> {
    let rho = density_rho(phi, law, rate)?;
    (0..DECILES)
        .map(|d| {
            let (a, b) = (d as f64 / DECILES as f64, (d + 1) as f64 / DECILES as f64);
            let m = |u: f64| mean_occupancy(phi / law.quantile(u), rate).unwrap_or(f64::NAN);
            Ok(integrate(m, a, b, 1e-11, 1e-10).0 / rho)
        })
        .collect()
}
