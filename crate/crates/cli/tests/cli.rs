use std::path::Path;
use std::process::{Command, Output};

use atomlink_cli::config::{parse, Job};
use atomlink_cli::CliError;

fn atomlink(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atomlink"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SPECTRUM: &str = r#"{
  "command": "spectrum",
  "parameters": {
    "gamma_1d": 0.05, "omega": 10, "c_over_a": 1e7, "n_sites": 100,
    "delta_min": -20, "delta_max": 20, "n_points": 41
  }
}"#;

#[test]
fn unknown_keys_are_named() {
    let text = SPECTRUM.replace("\"omega\"", "\"omgea\"");
    let err = parse(&text).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert!(err.to_string().contains("omgea"), "{err}");
    let err = parse(r#"{"command": "spectrum", "parameters": {}, "colour": 1}"#).unwrap_err();
    assert!(err.to_string().contains("colour"), "{err}");
}

#[test]
fn single_point_sweep_is_rejected() {
    let err = parse(&SPECTRUM.replace("\"n_points\": 41", "\"n_points\": 1")).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
}

#[test]
fn physical_invariants_are_checked_at_parse_time() {
    let err = parse(&SPECTRUM.replace("\"gamma_1d\": 0.05", "\"gamma_1d\": 0.05, \"gamma_out\": 0.5")).unwrap_err();
    assert!(err.to_string().contains("gamma_1d + gamma_out"), "{err}");
}

const STORAGE: &str = r#"{
  "command": "storage",
  "parameters": {
    "g_over_2pi_hz": 70, "atom_number": 8000, "gamma_per_s": 20,
    "kappa_per_s": 42725.66, "omega_over_2pi_hz": 6300, "mode": "resonator",
    "branching": 0.05, "guide_velocity_m_per_s": 3e8, "length_m": 0.004
  }
}"#;

#[test]
fn frequency_units_convert_and_exclude_each_other() {
    let hz = parse(STORAGE).unwrap();
    let rad = parse(&STORAGE.replace("\"g_over_2pi_hz\": 70", "\"g_rad_per_s\": 439.822971502571")).unwrap();
    let (Job::Storage(a), Job::Storage(b)) = (hz.job, rad.job) else { panic!() };
    assert!((a.rates.g - b.rates.g).abs() < 1e-12);
    assert_eq!(a.pulse_duration, 1.0 / 42725.66);

    let both = STORAGE.replace("\"g_over_2pi_hz\": 70", "\"g_over_2pi_hz\": 70, \"g_rad_per_s\": 1");
    let err = parse(&both).unwrap_err();
    assert!(err.to_string().contains("mutually exclusive"), "{err}");
}

#[test]
fn transfer_rates_in_laboratory_units() {
    let text = r#"{
      "command": "transfer",
      "parameters": {
        "kappa_per_s": 2, "kappa_in_per_s": 10, "gamma_per_s": 0.005,
        "collective_coupling_rad_per_s": 10, "delta2": 5, "eta_c": 20
      }
    }"#;
    let Job::Transfer(t) = parse(text).unwrap().job else { panic!() };
    assert_eq!((t.system.kappa, t.system.kappa_in, t.system.gamma), (0.2, 1.0, 0.0005));
    assert_eq!(t.schedule.len(), 400);
}

#[test]
fn empty_grid_is_a_config_error() {
    let text = r#"{
      "command": "optimize",
      "parameters": {
        "kappa": 0.2, "kappa_in": 1, "gamma": 0.0005,
        "eta_c": {"min": 1, "max": 100, "n": 0},
        "delta2": {"min": 0.5, "max": 20, "n": 40}
      }
    }"#;
    assert_eq!(parse(text).unwrap_err().exit_code(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let ok = write(d, "ok.json", SPECTRUM);
    let o = atomlink(&["--config", &ok, "--out", "s.csv"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(d.join("s.csv")).unwrap();
    assert!(text.starts_with("delta,T,R,re_t,im_t,re_r,im_r,status\n"));
    assert_eq!(text.lines().count(), 42);

    let bad = write(d, "bad.json", &SPECTRUM.replace("\"omega\"", "\"omgea\""));
    let o = atomlink(&["--config", &bad], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("omgea"));

    let o = atomlink(&["--config", "missing.json"], d);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("missing.json"));

    // Decoupled cells: the adiabaticity sum diverges.
    let singular = write(
        d,
        "singular.json",
        r#"{"command": "transfer", "parameters": {"kappa": 0, "kappa_in": 1, "gamma": 0.0005, "delta2": 5, "eta_c": 20}}"#,
    );
    let o = atomlink(&["--config", &singular], d);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("eta1"));

    std::fs::write(d.join("blocker"), "").unwrap();
    let o = atomlink(&["--config", &ok, "--out", "blocker/s.csv"], d);
    assert_eq!(o.status.code(), Some(4));

    let o = atomlink(&["--preset", "nope"], d);
    assert_eq!(o.status.code(), Some(2));

    let o = atomlink(&["--list-presets"], d);
    assert!(String::from_utf8_lossy(&o.stdout).contains("fig3c"));
}

#[test]
fn plots() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write(d, "s.json", SPECTRUM);
    assert!(atomlink(&["--config", &cfg, "--out", "s.csv"], d).status.success());

    let o = atomlink(&["plot", "s.csv", "--y", "T,R", "--out", "s.svg"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(d.join("s.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<path").count(), 2);
    assert!(svg.contains(">delta<"));

    let grid = "eta_c,delta2,eps1,eps2,product,status\n\
                1,1,2,0.5,1,ok\n10,1,3,0.1,0.3,ok\n1,2,4,0.5,2,ok\n10,2,inf,0.1,inf,divergent_eps1\n";
    std::fs::write(d.join("g.csv"), grid).unwrap();
    let o = atomlink(
        &["plot", "g.csv", "--kind", "contour", "--z", "product", "--log-x", "--log-z"],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(d.join("g.svg")).unwrap();
    assert!(svg.contains("#bbbbbb"), "divergent cell should be greyed");

    std::fs::write(d.join("empty.csv"), "").unwrap();
    assert_eq!(atomlink(&["plot", "empty.csv"], d).status.code(), Some(2));

    std::fs::write(d.join("broken.csv"), "a,b\n1,2\n3,oops\n").unwrap();
    let o = atomlink(&["plot", "broken.csv"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn plot_config_round_trips() {
    let text = r#"{"command": "plot", "parameters": {"input": "x.csv", "kind": "contour", "log_x": true}}"#;
    let Job::Plot(p) = parse(text).unwrap().job else { panic!() };
    assert!(p.log_x && p.y.is_empty());
}

fn storage_report(mode: &str) -> serde_json::Map<String, serde_json::Value> {
    let text = STORAGE
        .replace("\"resonator\"", &format!("\"{mode}\""))
        .replace("\"length_m\": 0.004", "\"length_m\": 0.004, \"pulse_duration_s\": 2e-5");
    let config = parse(&text).unwrap();
    let out = std::path::PathBuf::from("r.json");
    let artifacts = atomlink_cli::execute(&config, Some(&out), Some(1)).unwrap();
    match serde_json::from_slice(&artifacts[0].contents).unwrap() {
        serde_json::Value::Object(m) => m,
        _ => panic!(),
    }
}

#[test]
fn storage_modes_differ_only_in_decay_dependent_fields() {
    let res = storage_report("resonator");
    let free = storage_report("free_space");
    let mut differing: Vec<&str> = res
        .iter()
        .filter(|(k, v)| free.get(*k) != Some(v))
        .map(|(k, _)| k.as_str())
        .collect();
    differing.sort();
    for k in &differing {
        assert!(
            k.starts_with("input_mode")
                || k.starts_with("decay_rate")
                || k.starts_with("cooperativity")
                || k.starts_with("high_cooperativity")
                || k.starts_with("retrieval_efficiency")
                || k.starts_with("efficiency_clamped")
                || k.starts_with("eit_w")
                || k.starts_with("recommended_omega")
                || k.starts_with("max_bandwidth")
                || k.starts_with("bandwidth_")
                || k.starts_with("pulse_fits")
                || k.starts_with("warnings"),
            "{k} should not depend on the mode"
        );
    }
    assert!(differing.contains(&"decay_rate_per_s"));
    assert!(res["pulse_fits_pass"].is_null());
    assert!(free["pulse_fits_pass"].is_boolean());
}

#[test]
fn zero_coupling_fails_every_condition() {
    let config = atomlink_cli::preset("zero_coupling").unwrap();
    let out = std::path::PathBuf::from("z.json");
    let artifacts = atomlink_cli::execute(&config, Some(&out), Some(1)).unwrap();
    let report: serde_json::Value = serde_json::from_slice(&artifacts[0].contents).unwrap();
    for c in ["high_cooperativity", "bandwidth", "eit_window"] {
        assert_eq!(report[format!("{c}_pass")], false, "{c}");
    }
    assert_eq!(report["cooperativity"], 0.0);
    assert!(!report["warnings"].as_array().unwrap().is_empty());
}
