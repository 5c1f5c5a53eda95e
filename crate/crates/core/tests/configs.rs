use std::fs;
use std::path::PathBuf;

use zrplab::cli::ExperimentConfig;

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped() -> Vec<(String, ExperimentConfig)> {
    let mut out: Vec<_> = fs::read_dir(config_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let config = ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, config)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn every_shipped_config_parses() {
    let configs = shipped();
    assert!(configs.len() >= 15, "only {} configs found", configs.len());
    for (name, config) in &configs {
        let dir = config.output.dir.as_ref().unwrap_or_else(|| panic!("{name}: no output dir"));
        assert!(dir.ends_with(name), "{name} writes to {}", dir.display());
    }
}

#[test]
fn shipped_configs_round_trip_through_toml() {
    for (name, config) in shipped() {
        let again = ExperimentConfig::parse(&config.to_toml()).unwrap();
        assert_eq!(again, config, "{name}");
        assert_eq!(again.hash(), config.hash(), "{name}");
    }
}

#[test]
fn every_subcommand_is_covered() {
    let used: std::collections::BTreeSet<&str> =
        shipped().iter().map(|(_, c)| c.experiment.subcommand()).collect();
    for sub in ["equilibria", "simulate", "hydro", "pde", "oracle", "graph"] {
        assert!(used.contains(sub), "no config for {sub}");
    }
}

#[test]
fn distinct_configs_hash_differently() {
    let configs = shipped();
    let mut hashes: Vec<String> = configs.iter().map(|c| c.1.hash()).collect();
    hashes.sort();
    hashes.dedup();
    assert_eq!(hashes.len(), configs.len());
}
