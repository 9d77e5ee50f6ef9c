mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rovib::decay::{decay_reports, einstein_a, linewidth_map, DecaySettings, FinalKind};
use rovib::models::{harmonic_pair, ONE_U, ZERO_U};
use rovib::potential::{DipoleFunction, MoleculeSystem, PotentialCurve, Symmetry};
use rovib::radial::Engine;
use rovib::transitions::dipole_integral;

// CODATA 2018, SI.
const HBAR: f64 = 1.054_571_817e-34;
const EPS0: f64 = 8.854_187_812_8e-12;
const C: f64 = 299_792_458.0;
const E_CHARGE: f64 = 1.602_176_634e-19;
const A0: f64 = 5.291_772_109_03e-11;
const E_H: f64 = 4.359_744_722_207_1e-18;

fn pair(d: f64) -> Engine {
    Engine::new(harmonic_pair(1000.0, 0.01, 10.0, 0.0, 0.05, d, 1, 1).unwrap()).unwrap()
}

/// A = ω³|d|²/(3πε₀ħc³) summed over the J=0 (1/3) and J=2 (2/3) branches.
fn two_level_oracle(e: &Engine, d: f64) -> f64 {
    let x = &e.bound_levels("e", 1).unwrap()[0];
    let wx = e.wavefunction(x).unwrap();
    let df = DipoleFunction::constant("e", "g", d);
    [(0, 1.0 / 3.0), (2, 2.0 / 3.0)]
        .iter()
        .map(|&(j, hl)| {
            let g = &e.bound_levels("g", j).unwrap()[0];
            let m = dipole_integral(&wx, &df, &e.wavefunction(g).unwrap()) * E_CHARGE * A0;
            let w = (x.energy - g.energy) * E_H / HBAR;
            hl * w.powi(3) * m * m / (3.0 * PI * EPS0 * HBAR * C.powi(3))
        })
        .sum()
}

#[test]
fn two_level_einstein_a() {
    let e = pair(0.9);
    let x = &e.bound_levels("e", 1).unwrap()[0];
    let r = einstein_a(&e, x).unwrap();
    assert_relative_eq!(r.a_total, two_level_oracle(&e, 0.9), max_relative = 1e-8);
    assert_eq!(r.a_continuum, 0.0);
    assert_eq!(r.bound_bound_fraction, 1.0);
    assert_relative_eq!(r.linewidth_khz, r.a_total / (2.0 * PI * 1e3), max_relative = 1e-14);
    assert_eq!(r.per_transition.len(), 2);
}

#[test]
fn zero_dipole_gives_zero_rate() {
    let e = pair(0.0);
    let x = &e.bound_levels("e", 1).unwrap()[0];
    let r = einstein_a(&e, x).unwrap();
    assert_eq!(r.a_total, 0.0);
    assert_eq!(r.bound_bound_fraction, 1.0);
}

#[test]
fn flat_ground_decays_only_to_continuum() {
    let g = PotentialCurve::flat("g", 0.0);
    let x = PotentialCurve::morse("e", 0.02, 0.8, 6.0, 0.1).unwrap().with_symmetry(0, Symmetry::Ungerade);
    let sys = MoleculeSystem::new(5000.0, g, vec![x], vec![DipoleFunction::constant("e", "g", 1.0)]).unwrap();
    let e = Engine::new(sys).unwrap();
    let l = &e.bound_levels("e", 1).unwrap()[0];
    let r = einstein_a(&e, l).unwrap();
    assert!(r.a_total > 0.0);
    assert_eq!(r.a_bound, 0.0);
    assert_eq!(r.bound_bound_fraction, 0.0);
    assert!(r.per_transition.iter().all(|p| p.kind == FinalKind::Continuum));
}

#[test]
fn ground_levels_are_rejected() {
    let e = pair(1.0);
    let g = &e.bound_levels("g", 0).unwrap()[0];
    assert!(einstein_a(&e, g).is_err());
}

#[test]
fn quadrature_refinement_is_stable() {
    let e = common::sr2();
    let levels = e.bound_levels(ZERO_U, 1).unwrap();
    let picks = [levels[levels.len() - 3].clone(), levels[levels.len() / 2].clone()];
    let base = decay_reports(e, &picks, &DecaySettings::default()).unwrap();
    let fine = DecaySettings { order: 14, rel_tol: 1e-10, octaves: 24, max_rounds: 20 };
    let refined = decay_reports(e, &picks, &fine).unwrap();
    for (a, b) in base.iter().zip(&refined) {
        assert_relative_eq!(a.a_total, b.a_total, max_relative = 1e-6);
    }
}

#[test]
fn deep_levels_order_by_channel() {
    let e = common::sr2();
    let z = einstein_a(e, &e.bound_levels(ZERO_U, 1).unwrap()[0]).unwrap();
    let o = einstein_a(e, &e.bound_levels(ONE_U, 1).unwrap()[0]).unwrap();
    assert!(z.linewidth_khz > 5.0 * o.linewidth_khz, "{} vs {}", z.linewidth_khz, o.linewidth_khz);
}

#[test]
fn bound_bound_fraction_pattern() {
    let map = linewidth_map(common::sr2(), ZERO_U).unwrap();
    let f: Vec<f64> = map.iter().map(|r| r.bound_bound_fraction).collect();
    assert!(f[0] > 0.99, "deepest {}", f[0]);
    let dip = f.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(dip < 0.7, "minimum {dip}");
    let top = f[f.len() - 5..].iter().cloned().fold(0.0, f64::max);
    assert!(top > 0.95, "least bound {top}");
    let least = map.last().unwrap().linewidth_khz;
    assert!((least - 15.0).abs() <= 1.5, "least-bound width {least} kHz");
    for r in &map {
        assert_relative_eq!(r.a_bound + r.a_continuum, r.a_total, max_relative = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn rate_scales_with_dipole_squared(d in 0.05f64..5.0) {
        let e = pair(d);
        let x = &e.bound_levels("e", 1).unwrap()[0];
        let a = einstein_a(&e, x).unwrap().a_total;
        let oracle = two_level_oracle(&e, d);
        prop_assert!((a - oracle).abs() <= 1e-8 * oracle);
    }
}
