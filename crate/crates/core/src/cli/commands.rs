use std::collections::BTreeMap;
use std::path::Path;

use super::config::{Experiment, ExperimentConfig, FluxSource, InitialState, PdeMethod};
use super::manifest::OutputFile;
use crate::dynamics::graph::{build_interaction_graph_on, subcritical_threshold, Range};
use crate::dynamics::{measure_current, percolation_experiment, Configuration, Lattice, RunOptions};
use crate::environment::{sample_rate_field, RateField, RateFunction};
use crate::equilibria::{sample_product_measure, Equilibria, FluxTable, QuenchedProductLaw};
use crate::error::{Error, Result};
use crate::hydro::{
    estimate_flux_empirical, initial_ring_state, platoon_diagnostics, run_scaling_experiment, spread, FluxSpec, Model,
    ScalingSpec, BLOCK_L1_ID,
};
use crate::oracle::{default_suite, run_suite, suite_json_lines};
use crate::pde::{cell_centers, godunov_solve, lax_oleinik_solve, Profile, RiemannSolution, SolutionField};
use crate::rng;
use crate::stats::MeanSe;

/// Files, derived seeds and the `--check` verdict of one command.
#[derive(Clone, Debug, Default)]
pub struct CommandOutput {
    pub files: Vec<OutputFile>,
    pub seeds: BTreeMap<String, u64>,
    /// Acceptance checks: description and verdict.
    pub checks: Vec<(String, bool)>,
}

impl CommandOutput {
    fn file(&mut self, name: impl Into<String>, body: impl Into<String>) {
        self.files.push(OutputFile::new(name, body));
    }

    fn seed(&mut self, seed: u64, label: &str) -> u64 {
        let s = rng::derive(seed, label);
        self.seeds.insert(label.to_string(), s);
        s
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    pub fn checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }
}

fn json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// JSON has no infinity; report it as the string `"inf"`.
fn json_number(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::json!("inf")
    }
}

fn zrp_rate(model: &Model) -> Result<&RateFunction> {
    match model {
        Model::Zrp { rate, .. } => Ok(rate),
        Model::KExclusion { .. } => Err(Error::Config("this experiment needs a zero-range model".into())),
    }
}

fn field_for(config: &ExperimentConfig, sites: usize, out: &mut CommandOutput) -> Result<RateField> {
    let env = config
        .environment
        .as_ref()
        .ok_or_else(|| Error::Config("missing [environment] section".into()))?;
    let field = match &env.field_csv {
        Some(path) => RateField::read_csv(path)?,
        None => sample_rate_field(&env.law, sites, out.seed(config.seed, "cli/field"))?,
    };
    if field.len() != sites {
        return Err(Error::Config(format!(
            "rate field has {} sites, experiment needs {sites}",
            field.len()
        )));
    }
    Ok(field)
}

fn field_csv(field: &RateField) -> String {
    let mut s = String::from("site_index,alpha\n");
    for (i, a) in field.alphas().iter().enumerate() {
        s.push_str(&format!("{i},{a}\n"));
    }
    s
}

fn configuration_csv(config: &Configuration) -> String {
    let mut s = String::from("site_index,occupancy\n");
    for (i, k) in config.occupancy().iter().enumerate() {
        s.push_str(&format!("{i},{k}\n"));
    }
    s
}

fn read_configuration(path: &Path) -> Result<Configuration> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("site_index,occupancy") {
        return Err(err("expected header site_index,occupancy".into()));
    }
    let mut eta = Vec::new();
    for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let (i, k) = line.split_once(',').ok_or_else(|| err(format!("row {row}: expected two columns")))?;
        if i.trim().parse::<usize>().ok() != Some(eta.len()) {
            return Err(err(format!("row {row}: site indices must be 0..L in order")));
        }
        eta.push(k.trim().parse().map_err(|_| err(format!("row {row}: bad occupancy")))?);
    }
    Configuration::new(eta)
}

/// Runs the experiment of `config` in memory.
pub fn execute(config: &ExperimentConfig) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    match &config.experiment {
        Experiment::Equilibria { rho_max, step } => equilibria(config, *rho_max, *step, &mut out)?,
        Experiment::Simulate { .. } => simulate(config, &mut out)?,
        Experiment::Flux { .. } => flux(config, &mut out)?,
        Experiment::Hydro { .. } => hydro(config, &mut out)?,
        Experiment::Platoon { .. } => platoon(config, &mut out)?,
        Experiment::Pde { .. } => pde(config, &mut out)?,
        Experiment::Oracle { cases, pairs } => {
            out.seed(config.seed, "oracle/suite");
            let reports = run_suite(&default_suite(config.seed, *cases), *pairs)?;
            out.file("suite.jsonl", suite_json_lines(&reports));
            out.check(
                format!("{} oracle cases pass", reports.len()),
                reports.iter().all(|r| r.pass),
            );
        }
        Experiment::Graph { .. } => graph(config, &mut out)?,
    }
    Ok(out)
}

fn equilibria(config: &ExperimentConfig, rho_max: f64, step: f64, out: &mut CommandOutput) -> Result<()> {
    let law = config.law()?;
    let rate = match &config.model {
        Some(m) => zrp_rate(m)?.clone(),
        None => RateFunction::indicator(),
    };
    let eq = Equilibria::new(law, &rate)?;
    let table = FluxTable::from_equilibria(&eq, rho_max, step)?;
    out.file("flux.csv", table.to_csv());
    out.file(
        "critical.json",
        json(&serde_json::json!({
            "rho_star": json_number(eq.rho_star()),
            "c": eq.c(),
            "saturated_flux": eq.saturated_flux(),
            "phi_limit": eq.phi_limit(),
            "law": law,
        })),
    );
    Ok(())
}

fn simulate(config: &ExperimentConfig, out: &mut CommandOutput) -> Result<()> {
    let Experiment::Simulate {
        sites,
        horizon,
        init,
        burn_in,
        batches,
        bond,
        snapshot_every,
        replicas,
        expect_current,
    } = &config.experiment
    else {
        unreachable!()
    };
    if *replicas == 0 {
        return Err(Error::Config("replicas must be at least 1".into()));
    }
    let model = config.model()?;
    let field = field_for(config, *sites, out)?;
    let snapshot_times = match snapshot_every {
        Some(dt) if *dt > 0.0 => (1..).map(|k| k as f64 * dt).take_while(|t| *t <= *horizon).collect(),
        _ => Vec::new(),
    };
    let measured = *horizon > *burn_in;
    let mut currents = String::from("replica,particles,events,current,se,mean_current,mean_se,drift_z\n");
    let mut means = Vec::with_capacity(*replicas);
    let mut first_se = 0.0;
    for r in 0..*replicas {
        let start = match init {
            InitialState::Empty => Configuration::empty(*sites),
            InitialState::Product { phi } => {
                let law = QuenchedProductLaw::new(*phi, field.clone(), zrp_rate(model)?.clone())?;
                sample_product_measure(&law, out.seed(config.seed, &format!("cli/init/{r}")))
            }
            InitialState::Spread { density } => {
                Configuration::new(spread(*sites, (density * *sites as f64).round() as u64))?
            }
            InitialState::Csv { path } => read_configuration(path)?,
        };
        let options = RunOptions {
            bond: *bond,
            checkpoint_every: measured.then(|| (horizon - burn_in) / (*batches * 10).max(1) as f64),
            snapshot_times: if r == 0 { snapshot_times.clone() } else { Vec::new() },
            sentinel_seeds: Vec::new(),
        };
        let seed = out.seed(config.seed, &format!("cli/dynamics/{r}"));
        let run = model.run(&field, &start, *horizon, seed, &options)?;
        if r == 0 {
            out.file("initial.csv", configuration_csv(&start));
            out.file("final.csv", configuration_csv(&run.config));
            if !run.snapshots.is_empty() {
                let mut s = String::from("t,site_index,occupancy\n");
                for (t, c) in &run.snapshots {
                    c.snapshot_rows(*t, &mut s);
                }
                out.file("snapshots.csv", s);
            }
        }
        if measured {
            let est = measure_current(&run.counter, *burn_in, *batches)?;
            if r == 0 {
                let mut b = String::from("batch,bond_current,mean_current\n");
                for (i, (x, y)) in est.bond_batches.iter().zip(&est.mean_batches).enumerate() {
                    b.push_str(&format!("{i},{x},{y}\n"));
                }
                out.file("batches.csv", b);
                first_se = est.mean_se;
            }
            currents.push_str(&format!(
                "{r},{},{},{},{},{},{},{}\n",
                run.config.total(),
                run.events,
                est.current,
                est.se,
                est.mean_current,
                est.mean_se,
                est.drift_z
            ));
            means.push(est.mean_current);
        }
    }
    out.file("field.csv", field_csv(&field));
    if measured {
        let pooled = MeanSe::of(&means);
        let se = if *replicas > 1 { pooled.se } else { first_se };
        out.file("currents.csv", currents);
        out.file(
            "current.json",
            json(&serde_json::json!({
                "mean_current": pooled.mean,
                "se": se,
                "replicas": replicas,
                "burn_in": burn_in,
                "horizon": horizon,
            })),
        );
        if let Some(e) = expect_current {
            out.check(
                format!("current {:.6} within 3 SE ({se:.2e}) of {e}", pooled.mean),
                (pooled.mean - e).abs() <= 3.0 * se,
            );
        }
    }
    Ok(())
}

fn flux(config: &ExperimentConfig, out: &mut CommandOutput) -> Result<()> {
    let Experiment::Flux {
        densities,
        sites,
        horizon,
        burn_in,
        replicas,
        batches,
        quenched,
        start,
        rho_max,
        check_analytic,
        check_concavity,
    } = &config.experiment
    else {
        unreachable!()
    };
    let model = config.model()?.clone();
    let law = config.law()?.clone();
    let spec = FluxSpec {
        model: model.clone(),
        law: law.clone(),
        densities: densities.clone(),
        sites: *sites,
        horizon: *horizon,
        burn_in: *burn_in,
        replicas: *replicas,
        batches: *batches,
        seed: config.seed,
        quenched: *quenched,
        start: *start,
    };
    let table = estimate_flux_empirical(&spec)?;
    out.file("flux_empirical.csv", table.to_csv());
    out.file("flux_empirical.json", json(&table));
    let top = densities.last().copied().unwrap_or(1.0);
    let rho_max = rho_max.unwrap_or_else(|| model.cap().map_or(1.25 * top.max(1.0), f64::from));
    let analytic = model.macroscopic_flux(&law, rho_max, 1e-3).ok();
    if let Some(a) = &analytic {
        out.file("flux.csv", a.to_csv());
    }
    if *check_analytic {
        let a = analytic
            .as_ref()
            .ok_or_else(|| Error::Config("no closed-form flux for this model and law".into()))?;
        for p in &table.points {
            let f = a.eval(p.rho);
            out.check(
                format!("rho={}: {:.6} vs f={f:.6} within 3 SE ({:.2e})", p.rho, p.current, p.se),
                (p.current - f).abs() <= 3.0 * p.se,
            );
        }
    }
    if *check_concavity {
        for c in &table.concavity {
            out.check(
                format!("rho={}: concavity excess {:.2e} <= 2 SE ({:.2e})", c.rho, c.violation, c.pooled_se),
                c.passes(2.0),
            );
        }
    }
    Ok(())
}

fn hydro(config: &ExperimentConfig, out: &mut CommandOutput) -> Result<()> {
    let Experiment::Hydro {
        u0,
        t,
        scales,
        tests,
        replicas,
        quenched,
        sampling,
        block_width,
        profile_window,
        margin,
        rho_max,
        flux_step,
        tolerance,
        profile_tolerance,
    } = &config.experiment
    else {
        unreachable!()
    };
    let spec = ScalingSpec {
        model: config.model()?.clone(),
        law: config.law()?.clone(),
        u0: u0.clone(),
        t: *t,
        scales: scales.clone(),
        tests: tests.clone(),
        replicas: *replicas,
        seed: config.seed,
        quenched: *quenched,
        sampling: *sampling,
        block_width: *block_width,
        profile_window: *profile_window,
        margin: *margin,
        rho_max: *rho_max,
        flux_step: *flux_step,
    };
    let report = run_scaling_experiment(&spec)?;
    for r in &report.results {
        out.seeds.insert(format!("hydro/field/{}/{}", r.scale, r.replica), r.field_seed);
        out.seeds.insert(format!("hydro/init/{}/{}", r.scale, r.replica), r.init_seed);
        out.seeds.insert(format!("hydro/dynamics/{}/{}", r.scale, r.replica), r.dynamics_seed);
    }
    out.file("comparison.csv", report.to_csv());
    for &n in scales {
        if let Some(p) = report.profile_csv(n) {
            out.file(format!("profile_n{n}.csv"), p);
        }
    }
    out.file("report.json", report.manifest_json() + "\n");
    let last = *scales.last().expect("validated scales");
    for (k, id) in report.test_ids.iter().enumerate() {
        out.check(format!("{id}: mean D nonincreasing within 1 pooled SE"), report.nonincreasing_within_se(id));
        if let (Some(tol), Some(s)) = (tolerance, report.summary(last, id)) {
            let bound = tol * report.integral_abs[k];
            out.check(format!("{id}: D at n={last} is {:.5} < {bound:.5}", s.mean), s.mean < bound);
        }
    }
    out.check("no window underflow", report.results.iter().all(|r| r.valid));
    if let (Some(tol), Some(s)) = (profile_tolerance, report.summary(last, BLOCK_L1_ID)) {
        out.check(format!("block profile L1 at n={last} is {:.5} < {tol}", s.mean), s.mean < *tol);
    }
    Ok(())
}

fn platoon(config: &ExperimentConfig, out: &mut CommandOutput) -> Result<()> {
    let Experiment::Platoon {
        sites,
        density,
        horizon,
        snapshot_every,
        start,
    } = &config.experiment
    else {
        unreachable!()
    };
    if !(*snapshot_every > 0.0) {
        return Err(Error::Config("snapshot_every must be positive".into()));
    }
    let model = config.model()?;
    let field = field_for(config, *sites, out)?;
    let particles = (density * *sites as f64).round() as u64;
    let init = initial_ring_state(*start, model, &field, particles, out.seed(config.seed, "cli/init"))?;
    let mut times = vec![0.0];
    times.extend((1..).map(|k| k as f64 * snapshot_every).take_while(|t| *t <= *horizon));
    let options = RunOptions {
        snapshot_times: times,
        ..RunOptions::default()
    };
    let run = model.run(&field, &init, *horizon, out.seed(config.seed, "cli/dynamics"), &options)?;
    let diag = platoon_diagnostics(&run.snapshots, &field)?;
    out.file("field.csv", field_csv(&field));
    out.file("platoon.csv", diag.to_csv());
    out.file("deciles.csv", diag.decile_csv(diag.times.len() / 2));
    out.file(
        "platoon.json",
        json(&serde_json::json!({
            "kendall_tau": diag.max_trend.0,
            "p_value": diag.max_trend.1,
            "final_max_occupancy": diag.max_occupancy.last(),
        })),
    );
    Ok(())
}

fn pde_flux(config: &ExperimentConfig) -> Result<FluxTable> {
    let section = config
        .pde
        .as_ref()
        .ok_or_else(|| Error::Config("missing [pde] section".into()))?;
    match &section.flux {
        FluxSource::Tasep { points } => Ok(FluxTable::tasep(*points)),
        FluxSource::GeometricZrp { rho_max, points } => FluxTable::geometric_zrp(*rho_max, *points),
        FluxSource::Model { rho_max, step } => config.model()?.macroscopic_flux(config.law()?, *rho_max, *step),
    }
}

fn riemann_data(u0: &Profile) -> Result<(f64, f64, f64)> {
    match u0 {
        Profile::PiecewiseConstant { breaks, values } if breaks.len() == 1 => Ok((values[0], values[1], breaks[0])),
        _ => Err(Error::Config("the riemann method needs a single-jump piecewise constant profile".into())),
    }
}

fn pde(config: &ExperimentConfig, out: &mut CommandOutput) -> Result<()> {
    let Experiment::Pde {
        u0,
        t,
        domain,
        dx,
        cfl,
        boundary,
        methods,
        tolerance,
    } = &config.experiment
    else {
        unreachable!()
    };
    let flux = pde_flux(config)?;
    let cells = ((domain.1 - domain.0) / dx).round() as usize;
    let x = cell_centers(domain.0, domain.1, cells);
    let mut solutions: Vec<(PdeMethod, SolutionField)> = Vec::new();
    for &m in methods {
        let s = match m {
            PdeMethod::Godunov => godunov_solve(u0, &flux, *domain, *dx, *cfl, *t, *boundary)?,
            PdeMethod::LaxOleinik => lax_oleinik_solve(u0, &flux, &x, *t)?,
            PdeMethod::Riemann => {
                let (ul, ur, at) = riemann_data(u0)?;
                RiemannSolution::new(ul, ur, &flux).sample(&x, *t, at)
            }
        };
        solutions.push((m, s));
    }
    let name = |m: PdeMethod| match m {
        PdeMethod::Godunov => "godunov",
        PdeMethod::LaxOleinik => "lax_oleinik",
        PdeMethod::Riemann => "riemann",
    };
    let mut distances = Vec::new();
    for (i, (a, sa)) in solutions.iter().enumerate() {
        for (b, sb) in &solutions[i + 1..] {
            let d = sa.l1_distance(sb)?;
            distances.push(serde_json::json!({ "a": name(*a), "b": name(*b), "l1": d }));
            if let Some(tol) = tolerance {
                out.check(format!("L1({}, {}) = {d:.3e} < {tol}", name(*a), name(*b)), d < *tol);
            }
        }
    }
    for (m, s) in &solutions {
        out.file(format!("solution_{}.csv", name(*m)), s.to_csv());
    }
    out.file("flux.csv", flux.to_csv());
    out.file("l1.json", json(&distances));
    Ok(())
}

fn graph(config: &ExperimentConfig, out: &mut CommandOutput) -> Result<()> {
    let Experiment::Graph {
        lattice,
        t0,
        samples,
        min_hits,
    } = &config.experiment
    else {
        unreachable!()
    };
    let range = match lattice {
        Lattice::Ring { .. } => Range::from_kernel(&config.kernel()),
        Lattice::Torus { .. } => Range::new(&[[1, 0], [0, 1]])?,
    };
    let rate = config.model.as_ref().map_or(1.0, Model::max_site_rate);
    let g = build_interaction_graph_on(*lattice, &range, *t0, rate, out.seed(config.seed, "cli/graph"))?;
    out.file("histogram.csv", g.histogram_csv());
    let threshold = subcritical_threshold(range.degree(), rate);
    let mut report = serde_json::json!({
        "degree": range.degree(),
        "rate": rate,
        "t0": t0,
        "threshold": threshold,
        "largest_component": g.largest_component(),
        "components": g.components(),
    });
    if let Some(n) = samples {
        let p = percolation_experiment(*lattice, &range, rate, *t0, *n, out.seed(config.seed, "cli/percolation"))?;
        out.file("tail.csv", p.tail_csv());
        report["mean_size"] = serde_json::json!(p.mean_size);
        report["mean_size_se"] = serde_json::json!(p.mean_size_se);
        report["samples"] = serde_json::json!(n);
        out.check(
            format!("tail below the path bound wherever hits >= {min_hits}"),
            p.below_bound(*min_hits),
        );
    }
    out.file("graph.json", json(&report));
    Ok(())
}
