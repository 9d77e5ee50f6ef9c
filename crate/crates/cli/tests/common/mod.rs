#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_rovib");

pub fn sr2_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/sr2_like.cfg")
}

/// Fresh scratch directory per test.
pub fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("rovib-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn stdout(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

/// Rows of a CSV document as header-keyed records.
pub fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (headers, rows)
}

pub fn column(text: &str, name: &str) -> Vec<f64> {
    let (h, rows) = csv_rows(text);
    let i = h.iter().position(|x| x == name).unwrap_or_else(|| panic!("no column {name} in {h:?}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

pub const MORSE_MU: f64 = 5000.0;
pub const MORSE_DEPTH: f64 = 0.1;
pub const HARTREE_CM1: f64 = 219_474.631_363_2;
pub const AMU_ME: f64 = 1_822.888_486;

/// Single Morse well (depth 0.1 Eh, a = 1/a0, R_e = 3 a0, μ = 5000 m_e).
pub fn morse_config(dir: &Path) -> PathBuf {
    let p = dir.join("morse.cfg");
    std::fs::write(
        &p,
        format!(
            "[system]\nreduced_mass_amu = {}\n\n[curve.morse]\nform = morse\ndepth_cm1 = {}\na_inv_a0 = 1\nr_e_a0 = 3\n",
            MORSE_MU / AMU_ME,
            MORSE_DEPTH * HARTREE_CM1
        ),
    )
    .unwrap();
    p
}

/// Identical harmonic wells 0.05 Eh apart with a constant 0.7 e a0 dipole.
pub fn harmonic_config(dir: &Path) -> PathBuf {
    let p = dir.join("harmonic.cfg");
    let omega: f64 = 0.01;
    let mu: f64 = 1000.0;
    let k = mu * omega * omega;
    std::fs::write(
        &p,
        format!(
            "[system]\nreduced_mass_amu = {}\npoints_per_wavelength = 60\n\n\
             [curve.g]\nform = harmonic\nforce_constant_au = {k}\nr_e_a0 = 10\ndepth_cm1 = {}\n\n\
             [curve.e]\nform = harmonic\nsymmetry = u\nforce_constant_au = {k}\nr_e_a0 = 10\nasymptote_cm1 = {}\ndepth_cm1 = {}\n\n\
             [dipole.e.g]\nform = constant\nd_infinity_ea0 = 0.7\n",
            mu / AMU_ME,
            3.0 * omega * HARTREE_CM1,
            (0.05 + 1.5 * omega) * HARTREE_CM1,
            3.0 * omega * HARTREE_CM1,
        ),
    )
    .unwrap();
    p
}
