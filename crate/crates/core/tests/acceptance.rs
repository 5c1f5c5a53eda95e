//! Acceptance suite. Prints one line per criterion.
//!
//! Usage: `cargo test --test acceptance [-- N ... ] [--strict]`. Numeric
//! arguments select criteria; `--strict` turns any failure into a nonzero
//! exit status, as does `ZRPLAB_STRICT=1`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use zrplab::cli::{execute, CommandOutput, ExperimentConfig};
use zrplab::dynamics::graph::Range;
use zrplab::dynamics::{measure_current, percolation_experiment, run_zrp, Configuration, Lattice, RunOptions};
use zrplab::environment::{sample_rate_field, DisorderLaw, JumpKernel, RateFunction};
use zrplab::equilibria::{canonical_ring_current, critical_density, critical_density_quadrature, FluxTable};
use zrplab::oracle::{default_suite, exact_ring_current, run_suite, SectorModel};
use zrplab::pde::{godunov_solve, lax_oleinik_solve, Boundary, Profile, RiemannSolution};

macro_rules! config {
    ($name:literal) => {
        include_str!(concat!("../../../configs/", $name, ".toml"))
    };
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

/// CSV bodies kept from criteria 3 and 7 for the determinism rerun.
type Bodies = BTreeMap<String, String>;

fn run(text: &str) -> CommandOutput {
    let config = ExperimentConfig::parse(text).expect("shipped config parses");
    execute(&config).expect("shipped config runs")
}

fn csv_bodies(out: &CommandOutput) -> Bodies {
    out.files
        .iter()
        .filter(|f| f.name.ends_with(".csv"))
        .map(|f| (f.name.clone(), f.body.clone()))
        .collect()
}

fn failed_checks(out: &CommandOutput) -> Vec<&str> {
    out.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect()
}

fn json_field(out: &CommandOutput, file: &str, key: &str) -> f64 {
    let body = &out.files.iter().find(|f| f.name == file).expect("output exists").body;
    let v: serde_json::Value = serde_json::from_str(body).expect("valid json");
    v[key].as_f64().unwrap_or(f64::NAN)
}

fn oracle_suite(pairs: usize) -> Vec<zrplab::oracle::CaseReport> {
    let config = ExperimentConfig::parse(config!("oracle_suite")).unwrap();
    run_suite(&default_suite(config.seed, 20), pairs).unwrap()
}

fn c1(_: &mut Bodies) -> Outcome {
    let reports = oracle_suite(0);
    let worst = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
    Outcome::new(
        reports.len() == 20 && worst < 1e-10,
        format!("20 cases, max stationarity residual {worst:.2e} (< 1e-10)"),
    )
}

fn c2(_: &mut Bodies) -> Outcome {
    let reports = oracle_suite(100);
    let worst = reports.iter().map(|r| r.scaled_discrepancy).fold(0.0, f64::max);
    let gap = reports.iter().map(|r| r.reduction_gap).fold(0.0, f64::max);
    Outcome::new(
        worst < 1e-10 && gap < 1e-12,
        format!("2000 pairs, max discrepancy/scale {worst:.2e} (< 1e-10), g=1 reduction gap {gap:.2e} (< 1e-12)"),
    )
}

fn c3(bodies: &mut Bodies) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, text) in [
        ("phi=0.2", config!("stationary_current_phi02")),
        ("phi=0.4", config!("stationary_current_phi04")),
    ] {
        let out = run(text);
        let j = json_field(&out, "current.json", "mean_current");
        let se = json_field(&out, "current.json", "se");
        pass &= out.checks_passed();
        detail.push(format!("{name}: J={j:.5}±{se:.1e}"));
        if name == "phi=0.2" {
            for (k, v) in csv_bodies(&out) {
                bodies.insert(format!("c3/{k}"), v);
            }
        }
    }
    // Small ring against the exact generator.
    let law = DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 };
    let field = sample_rate_field(&law, 4, 41).unwrap();
    let kernel = JumpKernel::totally_asymmetric();
    let rate = RateFunction::indicator();
    let exact = exact_ring_current(
        &field,
        &SectorModel::Zrp {
            kernel: kernel.clone(),
            rate: rate.clone(),
        },
        3,
        0,
    )
    .unwrap();
    let options = RunOptions {
        checkpoint_every: Some(100.0),
        ..RunOptions::default()
    };
    let init = Configuration::new(vec![3, 0, 0, 0]).unwrap();
    let t = run_zrp(&field, &kernel, &rate, &init, 200_000.0, 42, &options).unwrap();
    let est = measure_current(&t.counter, 100.0, 20).unwrap();
    let ok = (est.current - exact).abs() <= 3.0 * est.se;
    let closed = (canonical_ring_current(field.alphas(), 3) - exact).abs();
    pass &= ok && closed < 1e-12;
    detail.push(format!(
        "L=4 N=3: J={:.5}±{:.1e} vs exact {exact:.5} (closed form gap {closed:.1e})",
        est.current, est.se
    ));
    Outcome::new(pass, detail.join("; "))
}

fn c4(_: &mut Bodies) -> Outcome {
    let out = run(config!("flux_homogeneous"));
    let table: serde_json::Value = serde_json::from_str(
        &out.files
            .iter()
            .find(|f| f.name == "flux_empirical.json")
            .unwrap()
            .body,
    )
    .unwrap();
    let points: Vec<String> = table["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            let rho = p["rho"].as_f64().unwrap();
            format!(
                "rho={rho}: {:.5}±{:.1e} vs {:.5}",
                p["current"].as_f64().unwrap(),
                p["se"].as_f64().unwrap(),
                rho / (1.0 + rho)
            )
        })
        .collect();
    let failed = failed_checks(&out);
    Outcome::new(failed.is_empty() && out.checks.len() == 3, points.join("; "))
}

fn c5(_: &mut Bodies) -> Outcome {
    let rate = RateFunction::indicator();
    let law = DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 };
    let closed = critical_density(&law, &rate);
    let quad = critical_density_quadrature(&law, &rate);
    let atom = DisorderLaw::FiniteSupport {
        atoms: vec![(0.5, 0.2), (1.0, 0.8)],
    };
    let inf = critical_density(&atom, &rate);
    let out = run(config!("equilibria_atom"));
    let body = &out.files.iter().find(|f| f.name == "critical.json").unwrap().body;
    let reported: serde_json::Value = serde_json::from_str(body).unwrap();
    let pass = (closed - 2.0).abs() < 1e-6
        && (quad - 2.0).abs() < 1e-6
        && inf == f64::INFINITY
        && reported["rho_star"] == "inf";
    Outcome::new(
        pass,
        format!(
            "closed form {closed:.9}, quadrature {quad:.9}; atom at c -> {inf} (reported {})",
            reported["rho_star"]
        ),
    )
}

fn c6(_: &mut Bodies) -> Outcome {
    let problems = [
        ("tasep (1,0)", true, 1.0, 0.0),
        ("tasep (0,1)", true, 0.0, 1.0),
        ("zrp (0,1)", false, 0.0, 1.0),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, tasep, ul, ur) in problems {
        let mut d = Vec::new();
        for (dx, points) in [(1e-3, 1001usize), (5e-4, 2001)] {
            let flux = if tasep {
                FluxTable::tasep(points)
            } else {
                FluxTable::geometric_zrp(2.0, 2 * points - 1).unwrap()
            };
            let u0 = Profile::step(ul, ur, 0.0);
            let g = godunov_solve(&u0, &flux, (-1.0, 1.0), dx, 0.9, 0.5, Boundary::Outflow).unwrap();
            let lo = lax_oleinik_solve(&u0, &flux, &g.x, 0.5).unwrap();
            let ex = RiemannSolution::new(ul, ur, &flux).sample(&g.x, 0.5, 0.0);
            d.push([g.l1_distance(&lo).unwrap(), g.l1_distance(&ex).unwrap()]);
        }
        for (k, pair) in ["LO", "exact"].iter().enumerate() {
            let (coarse, fine) = (d[0][k], d[1][k]);
            // An exactly represented solution has nothing left to refine.
            let refined = fine * 1.5 <= coarse || (coarse < 1e-12 && fine < 1e-12);
            pass &= coarse < 1e-2 && refined;
            detail.push(format!("{name} G-{pair}: {coarse:.2e} -> {fine:.2e}"));
        }
    }
    Outcome::new(pass, detail.join("; "))
}

fn c7(bodies: &mut Bodies) -> Outcome {
    let out = run(config!("hydro_subcritical"));
    let csv = &out.files.iter().find(|f| f.name == "comparison.csv").unwrap().body;
    let means: Vec<String> = csv
        .lines()
        .filter(|l| l.contains(",mean,") && l.contains("triangular"))
        .map(|l| {
            // Test ids contain commas; D is the second field from the right.
            let d: f64 = l.rsplit(',').nth(1).unwrap().parse().unwrap();
            format!("D_{}={d:.4}", l.split(',').next().unwrap())
        })
        .collect();
    for (k, v) in csv_bodies(&out) {
        bodies.insert(format!("c7/{k}"), v);
    }
    let failed = failed_checks(&out);
    Outcome::new(
        failed.is_empty(),
        format!("{} (bound 0.05); failed checks: {failed:?}", means.join(" ")),
    )
}

fn c8(_: &mut Bodies) -> Outcome {
    let out = run(config!("supercritical_freeze"));
    let csv = &out.files.iter().find(|f| f.name == "comparison.csv").unwrap().body;
    let mean = |id: &str| {
        csv.lines()
            .find(|l| l.contains(id) && l.contains(",mean,"))
            .and_then(|l| l.rsplit(',').nth(1))
            .and_then(|v| v.parse::<f64>().ok())
            .unwrap_or(f64::NAN)
    };
    Outcome::new(
        out.checks_passed(),
        format!(
            "block L1 (w = 45 sites) {:.4} vs 0.05; test-function D {:.4}",
            mean("block_l1"),
            mean("triangular")
        ),
    )
}

fn flux_points(out: &CommandOutput) -> Vec<(f64, f64, f64)> {
    let body = &out.files.iter().find(|f| f.name == "flux_empirical.json").unwrap().body;
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            (
                p["rho"].as_f64().unwrap(),
                p["current"].as_f64().unwrap(),
                p["se"].as_f64().unwrap(),
            )
        })
        .collect()
}

fn c9(_: &mut Bodies) -> Outcome {
    let runs: Vec<Vec<(f64, f64, f64)>> = [
        config!("flat_flux_L100"),
        config!("flat_flux_L1000"),
        config!("flat_flux_L10000"),
    ]
    .iter()
    .map(|t| flux_points(&run(t)))
    .collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for k in 0..2 {
        let j: Vec<f64> = runs.iter().map(|r| r[k].1).collect();
        let decreasing = j.windows(2).all(|w| w[1] < w[0]);
        let close = (j[2] - 0.5).abs() <= 0.025;
        pass &= decreasing && close;
        detail.push(format!(
            "rho={}: {:.4} > {:.4} > {:.4} (within 5% of 0.5: {close})",
            runs[0][k].0, j[0], j[1], j[2]
        ));
    }
    Outcome::new(pass, detail.join("; "))
}

fn c10(_: &mut Bodies) -> Outcome {
    let out = run(config!("percolation"));
    let big = json_field(&out, "graph.json", "mean_size");
    let config = ExperimentConfig::parse(config!("percolation")).unwrap();
    let range = Range::from_kernel(&config.kernel());
    let small = percolation_experiment(Lattice::Ring { len: 1000 }, &range, 1.0, 0.1, 100_000, 1013).unwrap();
    let rel = (small.mean_size - big).abs() / big;
    Outcome::new(
        out.checks_passed() && rel <= 0.05,
        format!(
            "tail below bound: {}; mean size L=1e3 {:.4}, L=1e4 {big:.4} ({:.2}% apart)",
            out.checks_passed(),
            small.mean_size,
            100.0 * rel
        ),
    )
}

fn c11(_: &mut Bodies) -> Outcome {
    let out = run(config!("kexclusion_concavity"));
    let body = &out.files.iter().find(|f| f.name == "flux_empirical.json").unwrap().body;
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    let worst = v["concavity"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["violation"].as_f64().unwrap() / c["pooled_se"].as_f64().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    Outcome::new(
        out.checks_passed() && out.checks.len() == 5,
        format!("largest concavity excess {worst:.2} pooled SE (limit 2)"),
    )
}

fn c12(bodies: &mut Bodies) -> Outcome {
    if !bodies.keys().any(|k| k.starts_with("c3/")) {
        c3(bodies);
    }
    if !bodies.keys().any(|k| k.starts_with("c7/")) {
        c7(bodies);
    }
    let mut again = Bodies::new();
    for (k, v) in csv_bodies(&run(config!("stationary_current_phi02"))) {
        again.insert(format!("c3/{k}"), v);
    }
    for (k, v) in csv_bodies(&run(config!("hydro_subcritical"))) {
        again.insert(format!("c7/{k}"), v);
    }
    let differing: Vec<&String> = bodies.keys().filter(|k| again.get(*k) != bodies.get(*k)).collect();
    Outcome::new(
        differing.is_empty() && bodies.len() == again.len(),
        format!("{} CSV bodies compared, {} differ", bodies.len(), differing.len()),
    )
}

type Criterion = (u32, fn(&mut Bodies) -> Outcome, Option<u64>);

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let strict = args.iter().any(|a| a == "--strict") || std::env::var("ZRPLAB_STRICT").is_ok_and(|v| v == "1");
    let selected: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 12] = [
        (1, c1, Some(10)),
        (2, c2, Some(30)),
        (3, c3, Some(300)),
        (4, c4, Some(600)),
        (5, c5, Some(1)),
        (6, c6, Some(120)),
        (7, c7, Some(1800)),
        (8, c8, Some(1200)),
        (9, c9, Some(1800)),
        (10, c10, Some(300)),
        (11, c11, Some(1800)),
        (12, c12, None),
    ];
    let mut bodies = Bodies::new();
    let mut failures = 0;
    let mut ran = 0;
    for (id, f, limit) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = f(&mut bodies);
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|s| elapsed <= Duration::from_secs(s));
        let pass = outcome.pass && in_time;
        ran += 1;
        failures += usize::from(!pass);
        let budget = limit.map_or(String::new(), |s| format!(" / {s} s"));
        println!(
            "criterion {id:>2}: {} ({:.1} s{budget}) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {}/{ran} passed", ran - failures);
    if strict && failures > 0 {
        std::process::exit(1);
    }
}
