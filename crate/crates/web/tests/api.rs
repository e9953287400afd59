use dirac_web::{coulomb_level_rows, energy_curve_json, solve_state_json};
use serde_json::Value;

#[test]
fn solves_coulomb_ground_state() {
    let reply: Value = serde_json::from_str(
        &solve_state_json(r#"{"family": "pure-coulomb alpha=0.5", "tau": -1, "j": 0.5}"#).unwrap(),
    )
    .unwrap();
    let e = reply["energy"].as_f64().unwrap();
    assert!((e - 0.75f64.sqrt()).abs() < 1e-8, "{e}");
    // dE/dα at α = 1/2 is -1/sqrt(3)
    assert!((reply["de_da"].as_f64().unwrap() + 1.0 / 3f64.sqrt()).abs() < 1e-6);
    let r = reply["r"].as_array().unwrap();
    assert_eq!(r.len(), reply["psi1"].as_array().unwrap().len());
    assert_eq!(r.len(), reply["potential"].as_array().unwrap().len());
    assert!(r.len() > 50 && r.len() <= 401);
}

#[test]
fn solves_one_dimensional_odd_state() {
    let reply: Value = serde_json::from_str(
        &solve_state_json(r#"{"family": "cutoff-coulomb alpha=1 a=1", "d": 1, "parity": "odd"}"#).unwrap(),
    )
    .unwrap();
    let e = reply["energy"].as_f64().unwrap();
    assert!(e > -1.0 && e < 1.0);
    assert!(reply["de_da"].as_f64().unwrap() > 0.0);
}

#[test]
fn energy_curve_rises_with_cutoff() {
    let reply: Value = serde_json::from_str(
        &energy_curve_json(
            r#"{"family": "cutoff-coulomb alpha=1 a=1", "tau": -1, "j": 0.5, "from": 0.2, "to": 2, "steps": 5}"#,
        )
        .unwrap(),
    )
    .unwrap();
    assert_eq!(reply["active"], "a");
    assert!(reply["stopped"].is_null());
    let e: Vec<f64> = reply["energy"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(e.len(), 5);
    assert!(e.windows(2).all(|w| w[1] > w[0]));
    assert!(reply["de_da"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_f64().unwrap() > 0.0));
}

#[test]
fn energy_curve_stops_where_the_state_is_lost() {
    let reply: Value = serde_json::from_str(
        &energy_curve_json(
            r#"{"family": "cutoff-coulomb alpha=1 a=0.1 active=alpha", "tau": -1, "j": 0.5, "from": 0.5, "to": 4, "steps": 4}"#,
        )
        .unwrap(),
    )
    .unwrap();
    assert_eq!(reply["energy"].as_array().unwrap().len(), 2);
    assert!(reply["stopped"].as_str().unwrap().contains("alpha"));
}

#[test]
fn coulomb_table_agrees_with_solver() {
    let rows = coulomb_level_rows(0.6, 3).unwrap();
    // n = 1: 1s; n = 2: 2s, 2p1/2, 2p3/2; n = 3: 3s, 3p1/2, 3p3/2, 3d3/2
    assert_eq!(rows.len(), 8);
    for row in &rows {
        assert!((row.exact - row.solved).abs() < 1e-7, "{row:?}");
        assert!(row.de_dalpha < 0.0);
    }
}
