use bistatic_ipcrlb::error::Error;
use bistatic_ipcrlb::sim::table::{format12, parse_csv_bytes, round12, to_csv_bytes};
use bistatic_ipcrlb::sim::{self, emit_csv, read_csv, Cell, Scenario, Table};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e15f64..1e15,
        -1.0f64..1.0,
        (-1e-9f64..1e-9),
        Just(0.0),
    ]
}

proptest! {
    #[test]
    fn emitted_floats_read_back_rounded(x in finite()) {
        let s = format12(x);
        prop_assert!(s.contains('.'));
        prop_assert!(!s.contains('e') && !s.contains('E'));
        let back: f64 = s.parse().unwrap();
        prop_assert_eq!(back, round12(x));
    }

    #[test]
    fn tables_round_trip(rows in proptest::collection::vec((finite(), 0usize..1000, "[a-z_,\"]{0,8}"), 1..20)) {
        let mut t = Table::new(&["x", "n", "label"]);
        for (x, n, label) in rows {
            // an empty or integer-looking label would read back as a number
            t.push(vec![x.into(), n.into(), format!("L{label}").into()]);
        }
        let bytes = to_csv_bytes(&t).unwrap();
        prop_assert_eq!(parse_csv_bytes(&bytes).unwrap(), t.rounded());
    }
}

#[test]
fn file_round_trip_and_line_endings() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut t = Table::new(&["a", "b"]);
    t.push(vec![Cell::Num(1.0 / 3.0), Cell::Int(7)]);
    t.push(vec![Cell::Num(-2.5e-7), Cell::Int(-1)]);
    emit_csv(&t, &path).unwrap();
    let raw = std::fs::read(&path).unwrap();
    assert!(!raw.contains(&b'\r'));
    assert_eq!(read_csv(&path).unwrap(), t.rounded());
}

#[test]
fn unknown_keys_are_named() {
    let err = Scenario::from_json_str(r#"{ "signal": { "vartheta": 1 } }"#).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("vartheta"), "{err}");
    let err = Scenario::from_json_str(r#"{ "plotting": {} }"#).unwrap_err();
    assert!(err.to_string().contains("plotting"), "{err}");
}

#[test]
fn invalid_values_name_the_key() {
    let err = Scenario::from_json_str(r#"{ "signal": { "p_fa": 2.0 } }"#).unwrap_err();
    assert!(err.to_string().contains("signal.p_fa"), "{err}");
    let err = Scenario::from_json_str(r#"{ "sim": { "horizon": 0 } }"#).unwrap_err();
    assert!(err.to_string().contains("sim.horizon"), "{err}");
}

#[test]
fn missing_config_names_the_path() {
    let err = Scenario::from_path(std::path::Path::new("/nonexistent/case.json")).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("/nonexistent/case.json"));
}

#[test]
fn shipped_configs_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            Scenario::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn sweep_tables_have_documented_columns_and_valid_values() {
    let scn = Scenario::default();
    let t = sim::tmu_sweep_table(&scn).unwrap();
    assert_eq!(t.columns, ["sweep_var", "value", "sigma_d_m", "sigma_v_mps", "sigma_theta_rad", "pd"]);
    assert!(t.numbers("pd").iter().all(|&p| p > 0.0 && p < 1.0));
    for c in ["sigma_d_m", "sigma_v_mps", "sigma_theta_rad"] {
        assert!(t.numbers(c).iter().all(|&s| s > 0.0));
    }
    let a = sim::assumption1_table(&scn).unwrap();
    assert_eq!(a.columns[1], "theta_deg");
    assert!(!a.rows.is_empty());
}

#[test]
fn bound_samples_are_independent_of_the_clutter_streams() {
    // the bound estimates depend only on the bound-sample stream: the seed
    // shared with clutter generation does not enter through any other path
    let mut scn: Scenario = Scenario::from_json_str(r#"{ "bounds": { "n_samples": 500 } }"#).unwrap();
    scn.sim.bound_sweeps.truncate(1);
    scn.sim.bound_sweeps[0].values = Some(vec![30.0, 90.0]);
    let a = sim::bounds_table(&scn).unwrap();
    let b = sim::bounds_table(&scn).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        a.columns,
        ["sweep_var", "value", "trace_ipcrlb", "std_ipcrlb", "trace_efim", "std_efim", "trace_pcrlb", "std_pcrlb"]
    );
    assert!(a.numbers("trace_pcrlb").iter().all(|&x| x > 0.0));
    scn.sim.seed += 1;
    assert_ne!(sim::bounds_table(&scn).unwrap(), a);
}
