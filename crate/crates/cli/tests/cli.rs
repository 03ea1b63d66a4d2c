use std::path::Path;
use std::process::{Command, Output};

use mecomm_core::capacity::capacity_cumulative;
use mecomm_core::data_io::{parse_range, parse_spectrum};
use mecomm_core::link_budget::fit_path_loss;
use mecomm_core::medium::{attenuation_db_per_m, wavelength};
use mecomm_core::modem::ber_closed_form;
use mecomm_core::ConductiveMedium;

fn mecomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mecomm"))
        .args(args)
        .output()
        .expect("spawn mecomm")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Rows of a CSV table, skipping metadata and the header.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn report(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .parse()
        .unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn medium_seawater_wavelength() {
    let out = stdout(&mecomm(&["medium", "--conductivity", "4.818", "--frequency", "36000"]));
    assert!(out.contains("7.59"));
    let r = &rows(&out)[0];
    let m = ConductiveMedium::water(4.818, "sea").unwrap();
    assert!(close(r[1], wavelength(&m, 36e3).unwrap(), 1e-5));
    assert!(close(r[3], attenuation_db_per_m(&m, 36e3).unwrap(), 1e-5));
}

#[test]
fn link_budget_row() {
    let out = stdout(&mecomm(&["link", "--n-tx", "15", "--n-rx", "15", "--medium-ratio", "267"]));
    let r = &rows(&out)[0];
    assert_eq!(r[4], 901125.0);
    assert!((r[5] - 119.1).abs() < 0.05);
}

#[test]
fn missing_spectrum_exits_2_and_names_path() {
    let o = mecomm(&["ber", "--spectrum", "missing.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.csv"));
}

#[test]
fn bad_flag_exits_2() {
    let o = mecomm(&["link", "--n-tx", "many"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--n-tx"));
}

#[test]
fn domain_error_exits_1() {
    let o = mecomm(&["medium", "--conductivity", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = mecomm(&["medium", "--frequency", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cfg");
    std::fs::write(&p, "# comment\nmedium.conductivity_s_per_m = 4.8\nnot a pair\n").unwrap();
    let o = mecomm(&["medium", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.cfg") && err.contains('3'), "{err}");
}

#[test]
fn config_file_and_override_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("sea.cfg");
    std::fs::write(&p, "medium.conductivity_s_per_m = 4.818\n").unwrap();
    let cfg = p.to_str().unwrap();
    let from_file = rows(&stdout(&mecomm(&["medium", "--config", cfg])))[0][1];
    assert!((from_file - 7.593).abs() < 1e-3);
    let overridden = rows(&stdout(&mecomm(&["medium", "--config", cfg, "--conductivity", "0.0097"])))[0][1];
    assert!(overridden > 100.0);
}

#[test]
fn ber_sweep_matches_closed_form() {
    let out = stdout(&mecomm(&["ber", "--snr-db", "0,6,12", "--delta-f", "100", "--rb", "100"]));
    for r in rows(&out) {
        let snr = 10f64.powf(r[0] / 10.0);
        assert!(close(r[2], ber_closed_form(snr, 100.0, 100.0), 1e-5));
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("link.csv");
    let o = mecomm(&["link", "--medium-ratio", "10", "--out", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&p).unwrap().starts_with("rad_resistance_ratio,"));
}

fn synth_into(dir: &Path, seed: &str) -> String {
    stdout(&mecomm(&["synth", "--out-dir", dir.to_str().unwrap(), "--seed", seed]))
}

#[test]
fn synth_is_deterministic_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(synth_into(a.path(), "7"), synth_into(b.path(), "7"));
    let s = |d: &Path| std::fs::read_to_string(d.join("spectrum_10m.csv")).unwrap();
    assert_eq!(s(a.path()), s(b.path()));
    assert_ne!(synth_into(a.path(), "7"), synth_into(b.path(), "8"));
}

#[test]
fn fit_matches_core() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path(), "3");
    let range = dir.path().join("range.csv");
    let out = stdout(&mecomm(&["fit", "--range", range.to_str().unwrap(), "--breakpoints", "15"]));
    let file = parse_range(&std::fs::read_to_string(&range).unwrap()).unwrap();
    let model = fit_path_loss(&file, &[15.0]).unwrap();
    for (i, seg) in model.segments.iter().enumerate() {
        let e = report(&out, &format!("segment{i}.exponent"));
        assert!(close(e, seg.exponent, 1e-5));
    }
    assert!((report(&out, "segment0.exponent") - 4.0).abs() < 0.4);
}

#[test]
fn capacity_matches_core() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path(), "1");
    let path = dir.path().join("spectrum_10m.csv");
    let out = stdout(&mecomm(&["capacity", "--spectrum", path.to_str().unwrap()]));
    let spectrum = parse_spectrum(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let expect = capacity_cumulative(&spectrum).unwrap();
    let got = rows(&out);
    assert_eq!(got.len(), expect.len());
    let (last, want) = (got.last().unwrap()[1], expect.last().unwrap().1);
    assert!(close(last, want, 1e-5));

    let band = stdout(&mecomm(&[
        "capacity", "--spectrum", path.to_str().unwrap(), "--f-lo", "31000", "--f-hi", "41000",
    ]));
    assert!(close(report(&band, "band.capacity_bits_per_s"), want, 1e-5));
}

#[test]
fn ber_vs_distance_degrades() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path(), "1");
    let s = |d: &str| dir.path().join(format!("spectrum_{d}m.csv")).to_str().unwrap().to_string();
    let (near, far) = (s("1"), s("300"));
    let out = stdout(&mecomm(&[
        "ber", "--spectrum", &far, "--spectrum", &near, "--tone-spacings", "100", "--center", "35500",
    ]));
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    assert!(r[0][0] < r[1][0]);
    assert!(r[0][4] <= r[1][4]);
    assert!(r[0][3] > r[1][3]);
}
