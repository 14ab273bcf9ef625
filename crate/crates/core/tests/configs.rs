use std::path::PathBuf;

use dualtilt::config::{IntegratorName, ScenarioConfig};
use dualtilt::objective::ObjectiveKind;

fn bundled(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.toml"));
    ScenarioConfig::load(&path).unwrap()
}

fn renamed(mut c: ScenarioConfig, name: &str) -> ScenarioConfig {
    c.name = name.into();
    c.output.dir = name.into();
    c
}

#[test]
fn bundled_configs_match_builders() {
    assert_eq!(bundled("hover"), ScenarioConfig::hover());
    assert_eq!(bundled("circle_gj0"), ScenarioConfig::circle(0.0, ObjectiveKind::Symmetric));
    assert_eq!(bundled("table1_gj10"), renamed(ScenarioConfig::circle(10.0, ObjectiveKind::Symmetric), "table1_gj10"));
    assert_eq!(bundled("circle_jalpha"), ScenarioConfig::circle(10.0, ObjectiveKind::Alpha));
    assert_eq!(bundled("circle_jbeta"), ScenarioConfig::circle(10.0, ObjectiveKind::Beta));
}

#[test]
fn stress_configs() {
    let both = bundled("stress_tilt1");
    assert_eq!((both.saturation.alpha_deg, both.saturation.beta_deg), (1.0, 1.0));
    let alpha = bundled("stress_alpha1");
    assert_eq!((alpha.saturation.alpha_deg, alpha.saturation.beta_deg), (1.0, 30.0));
    assert_eq!(alpha.sim.integrator, IntegratorName::Ros23);
    let offset = bundled("offset_start");
    assert_eq!(offset.initial.position, [3.0, 0.0, 0.5]);
}

#[test]
fn every_bundled_config_builds() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let paths = dualtilt::runner::configs_in(&dir).unwrap();
    assert_eq!(paths.len(), 8);
    for p in paths {
        let c = ScenarioConfig::load(&p).unwrap();
        assert_eq!(p.file_stem().unwrap().to_str().unwrap(), c.name);
        c.to_scenario().unwrap();
    }
}
