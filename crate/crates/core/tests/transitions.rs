mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rovib::models::{harmonic_pair, ONE_U, X, ZERO_U};
use rovib::radial::Engine;
use rovib::transitions::{dipole_matrix, fcf_matrix, raman_product, rank_intermediates, reduced_dipole};
use rovib::Error;

const MU: f64 = 1000.0;
const OMEGA: f64 = 0.01;
const R_E: f64 = 10.0;

fn displaced(delta: f64, d: f64) -> Engine {
    let shift = delta / (MU * OMEGA).sqrt();
    Engine::new(harmonic_pair(MU, OMEGA, R_E, shift, 0.05, d, 12, 12).unwrap()).unwrap()
}

/// |⟨0|n'⟩|² for equal-frequency oscillators displaced by Δ (dimensionless): Poisson in S = Δ²/2.
fn poisson(delta: f64, n: u32) -> f64 {
    let s = delta * delta / 2.0;
    let fact: f64 = (1..=n).map(f64::from).product();
    (-s).exp() * s.powi(n as i32) / fact
}

#[test]
fn displaced_oscillator_factors() {
    for delta in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
        let m = fcf_matrix(&displaced(delta, 1.0), "e", "g", 0, 0).unwrap();
        assert_relative_eq!(m.get(0, 0), (-delta * delta / 2.0).exp(), epsilon = 1e-6);
        for n in 1..6 {
            assert!((m.get(n, 0) - poisson(delta, n as u32)).abs() < 1e-6, "Δ={delta} n={n}");
        }
    }
}

#[test]
fn identical_wells_give_identity() {
    let m = fcf_matrix(&displaced(0.0, 1.0), "e", "g", 0, 0).unwrap();
    for (i, row) in m.values.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            let want = if i == k { 1.0 } else { 0.0 };
            assert!((x - want).abs() < 1e-9, "({i},{k}) = {x}");
        }
    }
}

#[test]
fn unit_dipole_reproduces_overlap() {
    let engine = displaced(1.3, 1.0);
    let f = fcf_matrix(&engine, "e", "g", 0, 0).unwrap();
    let d = dipole_matrix(&engine, "e", 0, 0).unwrap();
    for (fr, dr) in f.values.iter().zip(&d.values) {
        for (a, b) in fr.iter().zip(dr) {
            assert!((a - b * b).abs() < 1e-10);
        }
    }
}

#[test]
fn rows_are_subnormalised() {
    let m = fcf_matrix(common::sr2(), ZERO_U, X, 1, 0).unwrap();
    for v in 0..m.rows.len() {
        assert!(m.row_sum(v) <= 1.0 + 1e-8, "row {v}: {}", m.row_sum(v));
    }
    for v in 0..m.cols.len() {
        assert!(m.col_sum(v) <= 1.0 + 1e-8, "col {v}: {}", m.col_sum(v));
    }
}

#[test]
fn reduced_dipole_matches_matrix() {
    let e = common::sr2();
    let ex = &e.bound_levels(ZERO_U, 1).unwrap()[3];
    let g = &e.bound_levels(X, 0).unwrap()[5];
    let t = reduced_dipole(e, ex, g).unwrap();
    let m = dipole_matrix(e, ZERO_U, 1, 0).unwrap();
    assert_relative_eq!(t.reduced_dipole, m.get(3, 5), max_relative = 1e-12);
    assert!(reduced_dipole(e, g, ex).is_err());
}

#[test]
fn deep_triplet_ordering() {
    let e = common::sr2();
    let g = &e.bound_levels(X, 0).unwrap()[0];
    let strongest = |ch: &str| {
        e.bound_levels(ch, 1)
            .unwrap()
            .iter()
            .take(10)
            .map(|l| reduced_dipole(e, l, g).unwrap().reduced_dipole.powi(2))
            .fold(0.0f64, f64::max)
    };
    assert!(strongest(ZERO_U) > strongest(ONE_U));
}

#[test]
fn raman_symmetry_and_ranking() {
    let e = common::sr2();
    let x = e.bound_levels(X, 0).unwrap();
    let (a, b) = (&x[0], &x[x.len() - 3]);
    let mid = &e.bound_levels(ZERO_U, 1).unwrap()[40];
    let p = raman_product(e, a, b, mid).unwrap();
    let q = raman_product(e, b, a, mid).unwrap();
    assert_relative_eq!(p.product, q.product, max_relative = 1e-14);
    assert_relative_eq!(p.product, p.dipole_initial * p.dipole_final, max_relative = 1e-14);

    let ranked = rank_intermediates(e, a, b, Some(ZERO_U)).unwrap();
    assert_eq!(ranked.len(), e.bound_levels(ZERO_U, 1).unwrap().len());
    for w in ranked.windows(2) {
        assert!(w[0].product.abs() >= w[1].product.abs());
    }
}

#[test]
fn raman_selection_rules() {
    let e = common::sr2();
    let x0 = &e.bound_levels(X, 0).unwrap()[0];
    let x1 = &e.bound_levels(X, 2).unwrap()[0];
    let mid = &e.bound_levels(ZERO_U, 1).unwrap()[0];
    let mid0 = &e.bound_levels(ZERO_U, 0).unwrap()[0];
    assert!(matches!(raman_product(e, x1, x0, mid), Err(Error::SelectionRule(_))));
    assert!(matches!(raman_product(e, x0, x0, mid0), Err(Error::SelectionRule(_))));
    assert!(matches!(raman_product(e, mid, x0, mid), Err(Error::SelectionRule(_))));
    assert!(matches!(rank_intermediates(e, x0, x0, Some("nope")), Err(Error::MissingDipole { .. } | Error::UnknownChannel(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn ground_overlap_decays_with_displacement(delta in 0.0f64..3.0) {
        let m = fcf_matrix(&displaced(delta, 1.0), "e", "g", 0, 0).unwrap();
        let total: f64 = (0..m.rows.len()).map(|v| m.get(v, 0)).sum();
        prop_assert!((m.get(0, 0) - (-delta * delta / 2.0).exp()).abs() < 1e-6);
        prop_assert!(total <= 1.0 + 1e-9);
    }
}
