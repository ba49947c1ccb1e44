//! Suite and vehicle files: the shipped suite, round trips, key deletions and
//! overrides.

use std::path::{Path, PathBuf};

use eompc::app;
use eompc::config::{apply_override, shipped_config_dir, ConfigError, Speed};
use eompc::harness::preflight;
use eompc::{load, Method, Override, SuiteConfig};
use proptest::prelude::*;

fn shipped() -> PathBuf {
    shipped_config_dir().join("paper_suite.toml")
}

fn read(path: &Path) -> toml::Table {
    std::fs::read_to_string(path).unwrap().parse().unwrap()
}

/// Every key path of `t`, array-of-table elements addressed by index.
fn key_paths(t: &toml::Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in t {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        out.push(path.clone());
        match v {
            toml::Value::Table(inner) => key_paths(inner, &path, out),
            toml::Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    if let toml::Value::Table(inner) = item {
                        key_paths(inner, &format!("{path}[{i}]"), out);
                    }
                }
            }
            _ => {}
        }
    }
}

fn remove_path(t: &mut toml::Table, path: &str) {
    let segs: Vec<String> = path.replace('[', ".").replace(']', "").split('.').map(str::to_string).collect();
    let mut node = t;
    for seg in &segs[..segs.len() - 1] {
        node = node.get_mut(seg.as_str()).and_then(|v| v.as_table_mut()).unwrap();
    }
    node.remove(segs.last().unwrap().as_str());
}

/// Removes `path`, which may go through an array of tables by index.
fn delete(doc: &toml::Table, path: &str) -> toml::Table {
    let mut doc = doc.clone();
    let segs: Vec<&str> = path.split('.').collect();
    if let Some((head, rest)) = segs.split_first() {
        if let Some((name, idx)) = head.split_once('[') {
            let i: usize = idx.trim_end_matches(']').parse().unwrap();
            let item = doc.get_mut(name).unwrap().as_array_mut().unwrap()[i].as_table_mut().unwrap();
            remove_path(item, &rest.join("."));
            return doc;
        }
    }
    remove_path(&mut doc, path);
    doc
}

fn is_optional(path: &str) -> bool {
    path.starts_with("scenarios[") && [".max_time", ".dt", ".plan_start"].iter().any(|s| path.ends_with(s))
}

#[test]
fn shipped_suite_is_valid_and_has_ten_runs() {
    let loaded = load(&shipped(), &[]).unwrap();
    let msg = app::validate(&loaded).unwrap();
    assert!(msg.contains("3 scenario(s), 10 run(s)"), "{msg}");
    let cfg = &loaded.config;
    assert_eq!(cfg.params(), eompc_core::VehicleParams { weight: 200.3202, buoyancy: 201.7917, ..Default::default() });
    let methods: Vec<usize> = cfg.scenarios.iter().map(|s| s.methods.len()).collect();
    assert_eq!(methods, [4, 3, 3]);
}

#[test]
fn resolved_config_round_trips_through_toml() {
    let cfg = load(&shipped(), &[]).unwrap().config;
    let text = cfg.to_toml_string();
    let back = SuiteConfig::from_toml_str(&text).unwrap();
    assert_eq!(back, SuiteConfig { vehicle_file: None, ..cfg });
}

#[test]
fn deleting_any_required_key_is_rejected() {
    let suite = read(&shipped());
    let vehicle = read(&shipped_config_dir().join("vehicle.toml"));
    let dir = tempfile::tempdir().unwrap();
    let write = |s: &toml::Table, v: &toml::Table| {
        std::fs::write(dir.path().join("vehicle.toml"), toml::to_string(v).unwrap()).unwrap();
        let p = dir.path().join("suite.toml");
        std::fs::write(&p, toml::to_string(s).unwrap()).unwrap();
        p
    };
    assert!(load(&write(&suite, &vehicle), &[]).is_ok());

    let mut paths = Vec::new();
    key_paths(&suite, "", &mut paths);
    assert!(paths.len() > 60, "{} keys", paths.len());
    for path in &paths {
        let result = load(&write(&delete(&suite, path), &vehicle), &[]);
        if is_optional(path) {
            assert!(result.is_ok(), "dropping optional `{path}`: {:?}", result.err());
        } else {
            assert!(result.is_err(), "dropping `{path}` was accepted");
        }
    }

    let mut vpaths = Vec::new();
    key_paths(&vehicle, "", &mut vpaths);
    assert_eq!(vpaths.len(), 26);
    for path in &vpaths {
        let result = load(&write(&suite, &delete(&vehicle, path)), &[]);
        assert!(result.is_err(), "dropping vehicle `{path}` was accepted");
    }
}

#[test]
fn missing_key_errors_name_the_key() {
    let suite = read(&shipped());
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(shipped_config_dir().join("vehicle.toml"), dir.path().join("vehicle.toml")).unwrap();
    let p = dir.path().join("suite.toml");
    std::fs::write(&p, toml::to_string(&delete(&suite, "scenarios[1].goal")).unwrap()).unwrap();
    let msg = load(&p, &[]).unwrap_err().to_string();
    assert!(msg.contains("scenarios[1]") && msg.contains("goal"), "{msg}");

    std::fs::write(&p, toml::to_string(&delete(&suite, "controllers.dc.plan_radius")).unwrap()).unwrap();
    let msg = load(&p, &[]).unwrap_err().to_string();
    assert!(msg.contains("controllers.dc") && msg.contains("plan_radius"), "{msg}");
}

#[test]
fn overrides_apply_before_validation() {
    let o = |s: &str| s.parse::<Override>().unwrap();
    let loaded = load(
        &shipped(),
        &[
            o("scenarios.nominal.goal=[1.0, 1.5]"),
            o("scenarios[2].methods=[\"eo-empc\"]"),
            o("vehicle.power.kappa=0.5"),
            o("controllers.los_mpc.u_ref=0.2"),
        ],
    )
    .unwrap();
    let cfg = &loaded.config;
    assert_eq!(cfg.scenarios[0].goal, [1.0, 1.5]);
    assert_eq!(cfg.scenarios[2].methods, [Method::EoEmpc]);
    assert_eq!(cfg.params().power, eompc_core::PowerModel::Propeller { kappa: 0.5 });
    assert_eq!(cfg.controllers.los_mpc.u_ref, Speed::Fixed(0.2));
    // Other vehicle keys still come from the file.
    assert_eq!(cfg.vehicle.x_uu, 55.0);

    let err = load(&shipped(), &[o("scenarios.nominal.arrival_radius=0")]).unwrap_err();
    assert!(matches!(&err, ConfigError::Invalid { key, .. } if key.starts_with("scenarios[0].arrival_radius")), "{err}");
    assert!(load(&shipped(), &[o("scenarios.nowhere.goal=[1, 1]")]).is_err());
    assert!(load(&shipped(), &[o("controllers.eo_empc.horizon=\"five\"")]).is_err());
}

#[test]
fn override_into_a_scalar_is_an_error() {
    let mut doc = toml::Value::Table("a = 1".parse().unwrap());
    assert!(apply_override(&mut doc, &"a.b=2".parse().unwrap()).is_err());
}

const NUMERIC_KEYS: [&str; 14] = [
    "simulation.dt",
    "controllers.eo_empc.dt",
    "controllers.eo_empc.td_min",
    "controllers.eo_empc.td_max",
    "controllers.eo_empc.thrust_limit",
    "controllers.eo_empc.grad_tol",
    "controllers.los_mpc.lookahead",
    "controllers.los_mpc.dt",
    "controllers.los_mpc.w_surge",
    "controllers.los_mpc.w_heading",
    "controllers.pid.output_limit",
    "controllers.pid.integral_limit",
    "scenarios.nominal.arrival_radius",
    "vehicle.t_max",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Config validation is at least as strict as building the controllers, so
    // validate-config never passes a suite the runner would reject.
    #[test]
    fn accepted_configs_build_every_controller(k in 0..NUMERIC_KEYS.len(), v in -1.0..20.0f64) {
        let o: Override = format!("{}={v:?}", NUMERIC_KEYS[k]).parse().unwrap();
        if let Ok(loaded) = load(&shipped(), &[o]) {
            let cfg = &loaded.config;
            for sc in &cfg.scenarios {
                for m in &sc.methods {
                    prop_assert!(preflight(cfg, sc, *m).is_ok(), "{} {v}: {m}", NUMERIC_KEYS[k]);
                }
            }
        }
    }
}
