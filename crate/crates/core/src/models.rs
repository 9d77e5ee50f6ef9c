//! Ready-made systems: an illustrative Sr2-like model and small synthetic
//! systems with closed-form answers.
//!
//! The Sr2-like curves are analytic Morse cores with dispersion tails whose
//! parameters are round numbers of the right size for the 88Sr2 X, 0u+, 1u
//! and singlet ungerade channels. They are not fits to spectroscopic data.

use crate::error::Result;
use crate::potential::{
    sr88_dimer_reduced_mass, DipoleFunction, MoleculeSystem, PotentialCurve, SolverSettings, Symmetry, TailTerm,
};
use crate::units::{cm1_to_hartree, CONSTANTS};

/// 1S0-3P1 interval of Sr, cm^-1.
pub const SR_INTERCOMBINATION_CM1: f64 = 14_504.334;
/// Natural width of Sr 3P1, Hz.
pub const SR_INTERCOMBINATION_WIDTH_HZ: f64 = 7.4e3;
/// 1S0-1P1 interval of Sr, cm^-1.
pub const SR_RESONANCE_CM1: f64 = 21_698.452;
/// Reduced 1S0-1P1 matrix element of Sr in the (2J'+1) convention, e a0.
pub const SR_RESONANCE_REDUCED_DIPOLE: f64 = 5.248;
/// Ground-state van der Waals coefficient of Sr2, Hartree a0^6.
pub const SR2_C6: f64 = 3103.0;

/// Labels of the Sr2-like channels.
pub const X: &str = "X1Sigma+";
pub const ZERO_U: &str = "0u+";
pub const ONE_U: &str = "1u";
pub const SINGLET_SIGMA: &str = "A1Sigma_u+";
pub const SINGLET_PI: &str = "B1Pi_u";

/// Atomic transition dipole |d| for which 4ω³d²/(3c³) equals the given
/// natural width (Hz) at transition wavenumber `nu_cm1`.
pub fn atomic_dipole_for_width(width_hz: f64, nu_cm1: f64) -> f64 {
    let a_au = 2.0 * std::f64::consts::PI * width_hz * CONSTANTS.au_time;
    let omega = cm1_to_hartree(nu_cm1);
    (3.0 * CONSTANTS.c_au.powi(3) * a_au / (4.0 * omega.powi(3))).sqrt()
}

/// Morse range parameter giving harmonic constant `we` for depth `de` (both Hartree).
pub fn morse_range(de: f64, we: f64, mu: f64) -> f64 {
    we / (2.0 * de / mu).sqrt()
}

fn morse_lr(
    label: &str,
    mu: f64,
    asym_cm1: f64,
    de_cm1: f64,
    re: f64,
    we_cm1: f64,
    tail: (u32, f64),
    switch: (f64, f64),
) -> Result<PotentialCurve> {
    let de = cm1_to_hartree(de_cm1);
    let a = morse_range(de, cm1_to_hartree(we_cm1), mu);
    PotentialCurve::morse_long_range(
        label,
        de,
        a,
        re,
        cm1_to_hartree(asym_cm1),
        vec![TailTerm { power: tail.0, coefficient: tail.1 }],
        switch,
    )
}

/// Illustrative Sr2-like system.
///
/// * X1Sigma+: 30 THz (1000.69 cm^-1) deep, R_e = 8.83 a0, ω_e = 40.3 cm^-1, C6 tail.
/// * 0u+ and 1u: 1S0+3P1 limit, C3 tails, dipoles tending to √2 times the atomic
///   intercombination dipole; 1u has a small dipole at short range.
/// * A1Sigma_u+ and B1Pi_u: 1S0+1P1 limit, constant dipoles √2 times the atomic value.
pub fn sr2_like() -> Result<MoleculeSystem> {
    let mu = sr88_dimer_reduced_mass();
    let ground = morse_lr(X, mu, 0.0, 1000.69, 8.83, 40.3, (6, SR2_C6), (13.0, 17.0))?;
    let d_ic = atomic_dipole_for_width(SR_INTERCOMBINATION_WIDTH_HZ, SR_INTERCOMBINATION_CM1);
    let d_mol = std::f64::consts::SQRT_2 * d_ic;
    let zero_u = morse_lr(ZERO_U, mu, SR_INTERCOMBINATION_CM1, 2800.0, 8.2, 60.0, (3, 2.0 * d_ic * d_ic), (14.0, 22.0))?
        .with_symmetry(0, Symmetry::Ungerade);
    let one_u = morse_lr(ONE_U, mu, SR_INTERCOMBINATION_CM1, 4400.0, 7.9, 70.0, (3, d_ic * d_ic), (14.0, 22.0))?
        .with_symmetry(1, Symmetry::Ungerade);
    let d_res = std::f64::consts::SQRT_2 * SR_RESONANCE_REDUCED_DIPOLE / 3f64.sqrt();
    let sigma = {
        let de = cm1_to_hartree(6000.0);
        PotentialCurve::morse(SINGLET_SIGMA, de, morse_range(de, cm1_to_hartree(85.0), mu), 7.5, cm1_to_hartree(SR_RESONANCE_CM1))?
            .with_symmetry(0, Symmetry::Ungerade)
    };
    let pi = {
        let de = cm1_to_hartree(3000.0);
        PotentialCurve::morse(SINGLET_PI, de, morse_range(de, cm1_to_hartree(55.0), mu), 8.6, cm1_to_hartree(SR_RESONANCE_CM1))?
            .with_symmetry(1, Symmetry::Ungerade)
    };
    let dipoles = vec![
        DipoleFunction::switched(ZERO_U, X, 1.3 * d_mol, d_mol, 14.0, 1.5)?,
        DipoleFunction::switched(ONE_U, X, 0.3 * d_mol, d_mol, 14.0, 1.5)?,
        DipoleFunction::constant(SINGLET_SIGMA, X, d_res),
        DipoleFunction::constant(SINGLET_PI, X, d_res),
    ];
    let settings = SolverSettings { r_max: Some(400.0), ..SolverSettings::default() };
    Ok(MoleculeSystem::new(mu, ground, vec![zero_u, one_u, sigma, pi], dipoles)?.with_settings(settings))
}

/// Single Morse channel labelled "morse".
pub fn morse_system(reduced_mass: f64, depth: f64, a: f64, r_e: f64) -> Result<MoleculeSystem> {
    MoleculeSystem::new(reduced_mass, crate::potential::make_morse(depth, a, r_e, 0.0)?, vec![], vec![])
}

/// Ground ("g") and excited ("e") harmonic wells of equal frequency `omega`
/// (Hartree), the excited one displaced by `shift` a0 and raised by `gap`.
/// Each well keeps `n_ground` / `n_excited` levels below its ceiling; the
/// dipole between them is the constant `d`.
pub fn harmonic_pair(
    reduced_mass: f64,
    omega: f64,
    r_e: f64,
    shift: f64,
    gap: f64,
    d: f64,
    n_ground: u32,
    n_excited: u32,
) -> Result<MoleculeSystem> {
    let k = reduced_mass * omega * omega;
    let ground = PotentialCurve::harmonic("g", k, r_e, 0.0, n_ground as f64 * omega)?;
    let excited = PotentialCurve::harmonic("e", k, r_e + shift, gap, gap + n_excited as f64 * omega)?
        .with_symmetry(0, Symmetry::Ungerade);
    let sys = MoleculeSystem::new(reduced_mass, ground, vec![excited], vec![DipoleFunction::constant("e", "g", d)])?;
    // Step from the oscillator length rather than the (meaningless) ceiling depth.
    let width = 1.0 / (reduced_mass * omega).sqrt();
    let r_span = r_e + shift.abs() + 20.0 * width;
    let settings = SolverSettings {
        grid_step: Some(width / 60.0),
        r_max: Some(r_span),
        ..SolverSettings::default()
    };
    Ok(sys.with_settings(settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn intercombination_dipole_size() {
        let d = atomic_dipole_for_width(SR_INTERCOMBINATION_WIDTH_HZ, SR_INTERCOMBINATION_CM1);
        assert!((0.08..0.095).contains(&d), "{d}");
        // Round trip through the rate formula.
        let w = cm1_to_hartree(SR_INTERCOMBINATION_CM1);
        let a = 4.0 * w.powi(3) * d * d / (3.0 * CONSTANTS.c_au.powi(3)) / CONSTANTS.au_time;
        assert_relative_eq!(a / (2.0 * std::f64::consts::PI), SR_INTERCOMBINATION_WIDTH_HZ, max_relative = 1e-12);
    }

    #[test]
    fn sr2_model_depth() {
        let s = sr2_like().unwrap();
        assert_relative_eq!(crate::units::hartree_to_cm1(s.ground.depth()), 1000.69, max_relative = 1e-3);
    }
}
