mod common;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rovib::decay::{decay_reports, DecaySettings};
use rovib::models::{harmonic_pair, X};
use rovib::potential::{DipoleFunction, MoleculeSystem, PotentialCurve, Symmetry};
use rovib::radial::Engine;
use rovib::response::{
    intermediate_rates, level_response, polarizability_vs_v, scattering_rate_from_alpha, stark_shift, LevelResponse,
    Polarization, WidthPolicy,
};
use rovib::transitions::dipole_integral;
use rovib::units::hartree_to_cm1;
use rovib::Error;

// CODATA 2018, SI.
const HBAR: f64 = 1.054_571_817e-34;
const EPS0: f64 = 8.854_187_812_8e-12;
const C: f64 = 299_792_458.0;
const E_CHARGE: f64 = 1.602_176_634e-19;
const A0: f64 = 5.291_772_109_03e-11;
const E_H: f64 = 4.359_744_722_207_1e-18;
const FINE_STRUCTURE_INV: f64 = 137.035_999_084;
/// Light shift per intensity of a two-level system in MHz/(W/cm²), from SI:
/// ΔE = −α I/(2ε₀c) with α = 2|d_z|² ΔE₀/(ΔE₀² − (ħω)²).
fn si_shift_mhz(dz2_au: f64, gap_au: f64, omega_au: f64) -> f64 {
    let dz2 = dz2_au * (E_CHARGE * A0).powi(2);
    let (g, w) = (gap_au * E_H, omega_au * E_H);
    let alpha = 2.0 * dz2 * g / (g * g - w * w);
    let joule_per_w_m2 = alpha / (2.0 * EPS0 * C);
    joule_per_w_m2 * 1e4 / (2.0 * PI * HBAR) / 1e6
}

/// One ground and one excited harmonic level (plus the J'=1 excited well).
fn two_level() -> &'static Engine {
    static E: OnceLock<Engine> = OnceLock::new();
    E.get_or_init(|| Engine::new(harmonic_pair(1000.0, 0.01, 10.0, 0.0, 0.05, 0.7, 1, 1).unwrap()).unwrap())
}

/// Morse ground, shallow excited Morse whose repulsive wall sits above the
/// ground equilibrium, so the response has a large continuum part.
fn continuum_toy() -> &'static Engine {
    static E: OnceLock<Engine> = OnceLock::new();
    E.get_or_init(|| {
        let g = PotentialCurve::morse("g", 0.1, 1.0, 3.0, 0.0).unwrap();
        let e = PotentialCurve::morse("e", 0.005, 0.5, 6.0, 0.25).unwrap().with_symmetry(0, Symmetry::Ungerade);
        let sys = MoleculeSystem::new(5000.0, g, vec![e], vec![DipoleFunction::constant("e", "g", 1.0)]).unwrap();
        Engine::new(sys).unwrap()
    })
}

/// (ground, excited J'=1, ⟨e|d|g⟩) of the two-level system.
fn two_level_parts() -> (f64, f64, f64) {
    let e = two_level();
    let g = &e.bound_levels("g", 0).unwrap()[0];
    let x = &e.bound_levels("e", 1).unwrap()[0];
    let d = dipole_integral(&e.wavefunction(x).unwrap(), &DipoleFunction::constant("e", "g", 0.7), &e.wavefunction(g).unwrap());
    (g.energy, x.energy, d)
}

fn two_level_response(widths: &WidthPolicy) -> LevelResponse {
    let e = two_level();
    let g = e.bound_levels("g", 0).unwrap()[0].clone();
    level_response(e, &g, Polarization::default(), widths).unwrap()
}

#[test]
fn two_level_closed_form() {
    let (eg, ex, d) = two_level_parts();
    let gap = ex - eg;
    let r = two_level_response(&WidthPolicy::Zero);
    assert_eq!(r.terms.len(), 1);
    assert!(r.continuum.is_empty());
    let c_au = FINE_STRUCTURE_INV;
    for k in 0..10 {
        let omega = gap * (0.05 + 0.21 * k as f64);
        let want = 4.0 * PI / c_au * (d * d / 3.0) * gap / (gap * gap - omega * omega);
        let got = r.alpha_au(omega).unwrap();
        assert_relative_eq!(got.re, want, max_relative = 1e-10);
        assert_eq!(got.im, 0.0);
        let mhz = r.alpha(hartree_to_cm1(omega)).unwrap().re;
        assert_relative_eq!(mhz, si_shift_mhz(d * d / 3.0, gap, omega), max_relative = 1e-8);
    }
}

#[test]
fn sign_change_across_resonance() {
    let (eg, ex, _) = two_level_parts();
    let nu = hartree_to_cm1(ex - eg);
    let r = two_level_response(&WidthPolicy::Zero);
    assert!(r.alpha(0.0).unwrap().re > 0.0);
    assert!(r.alpha(nu - 1.0).unwrap().re > 0.0);
    assert!(r.alpha(nu + 1.0).unwrap().re < 0.0);
    assert!(matches!(r.alpha_au(ex - eg), Err(Error::OnResonance { .. })));
    let s = r.scan(nu - 10.0, nu + 10.0, 0.3).unwrap();
    assert_eq!(s.resonances.len(), 1);
    assert!(s.zero_crossings.is_empty());
}

#[test]
fn far_detuned_scattering() {
    let (eg, ex, d) = two_level_parts();
    let gap = ex - eg;
    let gamma = 2.0 * PI * 7.4e3;
    let e = two_level();
    let label = e.bound_levels("e", 1).unwrap()[0].label();
    let r = two_level_response(&WidthPolicy::Custom(HashMap::from([(label, gamma)])));
    let intensity = 1e4;
    let delta = 1e-3 * gap;
    let alpha = r.alpha(hartree_to_cm1(gap - delta)).unwrap();
    let got = scattering_rate_from_alpha(alpha, intensity).unwrap();

    // Rotating-wave two-level result with |d_z|² = d²/3.
    let dz2 = (d * E_CHARGE * A0).powi(2) / 3.0;
    let delta_si = delta * E_H / HBAR;
    let want = dz2 * gamma * intensity * 1e4 / (2.0 * HBAR * HBAR * EPS0 * C * delta_si * delta_si);
    assert_relative_eq!(got, want, max_relative = 1e-2);

    let narrow = two_level_response(&WidthPolicy::Zero);
    let a0 = narrow.alpha(hartree_to_cm1(gap - delta)).unwrap();
    assert_eq!(scattering_rate_from_alpha(a0, intensity).unwrap(), 0.0);
}

#[test]
fn shift_arithmetic() {
    let s = stark_shift(Complex64::new(3e-5, 1e-9), 1e4).unwrap();
    assert_relative_eq!(s.re, -0.3, max_relative = 1e-14);
    assert!(stark_shift(Complex64::new(1.0, 0.0), -1.0).is_err());
    assert!(scattering_rate_from_alpha(Complex64::new(1.0, 0.0), -1.0).is_err());
}

#[test]
fn j0_is_polarization_independent() {
    let e = common::sr2();
    let g = e.bound_levels(X, 0).unwrap()[0].clone();
    let nu = 10600.0;
    let vals: Vec<Complex64> = (-1..=1)
        .map(|eps| level_response(e, &g, Polarization { m: 0, eps }, &WidthPolicy::Zero).unwrap().alpha(nu).unwrap())
        .collect();
    for v in &vals[1..] {
        assert_relative_eq!(v.re, vals[0].re, max_relative = 1e-12);
    }
    assert!(vals[0].re > 1e-5 && vals[0].re < 1e-4, "baseline {:e}", vals[0].re);
    assert!(level_response(e, &g, Polarization { m: 1, eps: 0 }, &WidthPolicy::Zero).is_err());
    assert!(level_response(e, &g, Polarization { m: 0, eps: 2 }, &WidthPolicy::Zero).is_err());
}

#[test]
fn static_polarizability_positive_for_every_level() {
    let rows = polarizability_vs_v(two_level(), 0.0, 0, &WidthPolicy::Zero).unwrap();
    assert!(rows.iter().all(|r| r.alpha.re > 0.0));
    let g = continuum_toy().bound_levels("g", 0).unwrap()[0].clone();
    let r = level_response(continuum_toy(), &g, Polarization::default(), &WidthPolicy::Zero).unwrap();
    assert!(r.alpha(0.0).unwrap().re > 0.0);
}

fn toy_response() -> &'static LevelResponse {
    static R: OnceLock<LevelResponse> = OnceLock::new();
    R.get_or_init(|| {
        let e = continuum_toy();
        let g = e.bound_levels("g", 0).unwrap()[0].clone();
        level_response(e, &g, Polarization::default(), &WidthPolicy::Zero).unwrap()
    })
}

#[test]
fn oscillator_closure() {
    // Σ_f |⟨f|d_z|i⟩|² over bound and continuum J'=1 states equals ⟨i|d²|i⟩/3.
    let r = toy_response();
    assert_eq!(r.continuum.len(), 1);
    let bound: f64 = r.terms.iter().map(|t| t.strength).sum();
    let b = &r.continuum[0];
    let cont: f64 = b.weights.iter().zip(&b.density).map(|(q, g)| q * g).sum();
    assert!(cont > 0.1 * bound, "toy should be continuum-heavy: {bound} {cont}");
    assert_relative_eq!(bound + cont, 1.0 / 3.0, max_relative = 1e-5);
}

#[test]
fn continuum_cutoff_is_converged() {
    let b = &toy_response().continuum[0];
    let total: f64 = b.weights.iter().zip(&b.density).zip(&b.nodes).map(|((q, g), e)| q * g / e).sum();
    let tail: f64 = b
        .weights
        .iter()
        .zip(&b.density)
        .zip(&b.nodes)
        .filter(|(_, e)| **e > b.threshold + 0.5 * (b.cutoff - b.threshold))
        .map(|((q, g), e)| q * g / e)
        .sum();
    assert!(tail < 1e-6 * total, "tail {tail:e} of {total:e}");
}

#[test]
fn dispersion_relation_for_continuum() {
    // Re α(0) = (2/π) ∫ Im α(ω)/ω dω for a response with only continuum.
    let full = toy_response();
    let cont = LevelResponse { terms: Vec::new(), ..full.clone() };
    let b = &cont.continuum[0];
    let (lo, hi) = (b.threshold, b.cutoff);
    let n = 40_000;
    // Substitution ω = lo + (hi - lo) s², which clusters points at the threshold.
    let f = |s: f64| {
        let w = lo + (hi - lo) * s * s;
        cont.alpha_au(w).unwrap().im / w * 2.0 * (hi - lo) * s
    };
    let h = 1.0 / n as f64;
    let mut integral = f(0.0) + f(1.0);
    for i in 1..n {
        integral += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    integral *= h / 3.0;
    let static_re = cont.alpha_au(0.0).unwrap().re;
    assert_relative_eq!(2.0 / PI * integral, static_re, max_relative = 1e-3);
}

#[test]
fn resonance_window_counts_bound_intermediates() {
    let r = toy_response();
    let e = continuum_toy();
    let g = &r.level;
    let (lo, hi) = (hartree_to_cm1(0.33), hartree_to_cm1(0.345));
    let want = e
        .bound_levels("e", 1)
        .unwrap()
        .iter()
        .filter(|l| (lo..=hi).contains(&hartree_to_cm1(l.energy - g.energy)))
        .count();
    let got = r.resonances(lo, hi);
    assert_eq!(got.len(), want);
    assert!(got.windows(2).all(|w| w[0].nu_cm1 < w[1].nu_cm1));
}

#[test]
fn rates_match_decay_linewidths() {
    let e = continuum_toy();
    let rates = intermediate_rates(e, 0).unwrap();
    let levels = e.bound_levels("e", 1).unwrap();
    let reports = decay_reports(e, &levels, &DecaySettings::default()).unwrap();
    for rep in &reports {
        let r = rates[&rep.level.label()];
        assert_relative_eq!(r, rep.linewidth_khz * 2.0 * PI * 1e3, max_relative = 1e-12);
    }
    assert_eq!(rates.len(), levels.len() + e.bound_levels("e", 0).unwrap().len());
}

#[test]
fn imaginary_part_tracks_width() {
    let (eg, ex, _) = two_level_parts();
    let e = two_level();
    let label = e.bound_levels("e", 1).unwrap()[0].label();
    let nu = hartree_to_cm1(ex - eg) - 5.0;
    let im = |g: f64| two_level_response(&WidthPolicy::Custom(HashMap::from([(label.clone(), g)]))).alpha(nu).unwrap().im;
    assert_relative_eq!(im(2e5) / im(1e5), 2.0, max_relative = 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn two_level_matches_oracle(x in 0.0f64..3.0) {
        prop_assume!((x - 1.0).abs() > 1e-3);
        let (eg, ex, d) = two_level_parts();
        let gap = ex - eg;
        let omega = gap * x;
        let r = two_level_response(&WidthPolicy::Zero);
        let want = 4.0 * PI / FINE_STRUCTURE_INV * (d * d / 3.0) * gap / (gap * gap - omega * omega);
        let got = r.alpha_au(omega).unwrap().re;
        prop_assert!((got - want).abs() <= 1e-10 * want.abs());
    }
}
