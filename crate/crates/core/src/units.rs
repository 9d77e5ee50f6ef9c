//! Fixed physical constants and conversions between the handful of units
//! that appear at the I/O boundary. Everything inside the crate is in
//! Hartree atomic units (hbar = m_e = e = 4 pi eps0 = 1).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// CODATA 2018 values, pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant, J s.
    pub h: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Electric constant, F/m.
    pub eps0: f64,
    /// Bohr radius, m.
    pub a0: f64,
    /// Elementary charge, C.
    pub e_charge: f64,
    /// Hartree energy, J.
    pub hartree_joule: f64,
    /// cm^-1 per Hartree.
    pub hartree_to_wavenumber: f64,
    /// Electron masses per unified atomic mass unit.
    pub amu_to_electron_mass: f64,
    /// Atomic unit of time, s.
    pub au_time: f64,
    /// Speed of light in atomic units (inverse fine-structure constant).
    pub c_au: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    h: 6.626_070_15e-34,
    c: 299_792_458.0,
    eps0: 8.854_187_812_8e-12,
    a0: 5.291_772_109_03e-11,
    e_charge: 1.602_176_634e-19,
    hartree_joule: 4.359_744_722_207_1e-18,
    hartree_to_wavenumber: 219_474.631_363_2,
    amu_to_electron_mass: 1_822.888_486,
    au_time: 2.418_884_326_585_7e-17,
    c_au: 137.035_999_084,
};

/// Version tag of the constant table, recorded in run manifests.
pub const CONSTANTS_VERSION: &str = "codata-2018";

impl PhysicalConstants {
    pub fn hbar(&self) -> f64 {
        self.h / (2.0 * PI)
    }

    /// Hartree expressed as a cyclic frequency, Hz.
    pub fn hartree_hz(&self) -> f64 {
        self.hartree_joule / self.h
    }

    /// Atomic unit of intensity, W/cm^2.
    pub fn au_intensity_w_cm2(&self) -> f64 {
        let eh = self.hartree_joule;
        eh * eh / (self.hbar() * self.a0 * self.a0) * 1e-4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Hartree,
    Wavenumber,
    Terahertz,
    Megahertz,
    Kilohertz,
    /// Angular rate, E / hbar.
    PerSecond,
    DipoleAu,
    Debye,
    Bohr,
    Nanometer,
    Amu,
    ElectronMass,
    MhzPerWcm2,
    ShiftPerIntensityAu,
    WPerCm2,
    IntensityAu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Energy,
    Dipole,
    Length,
    Mass,
    ShiftPerIntensity,
    Intensity,
}

impl Unit {
    pub const ALL: [Unit; 16] = [
        Unit::Hartree,
        Unit::Wavenumber,
        Unit::Terahertz,
        Unit::Megahertz,
        Unit::Kilohertz,
        Unit::PerSecond,
        Unit::DipoleAu,
        Unit::Debye,
        Unit::Bohr,
        Unit::Nanometer,
        Unit::Amu,
        Unit::ElectronMass,
        Unit::MhzPerWcm2,
        Unit::ShiftPerIntensityAu,
        Unit::WPerCm2,
        Unit::IntensityAu,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Hartree => "Hartree",
            Unit::Wavenumber => "cm^-1",
            Unit::Terahertz => "THz",
            Unit::Megahertz => "MHz",
            Unit::Kilohertz => "kHz",
            Unit::PerSecond => "s^-1",
            Unit::DipoleAu => "e a0",
            Unit::Debye => "D",
            Unit::Bohr => "a0",
            Unit::Nanometer => "nm",
            Unit::Amu => "amu",
            Unit::ElectronMass => "m_e",
            Unit::MhzPerWcm2 => "MHz/(W/cm^2)",
            Unit::ShiftPerIntensityAu => "Eh/I_au",
            Unit::WPerCm2 => "W/cm^2",
            Unit::IntensityAu => "I_au",
        }
    }

    fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Hartree | Wavenumber | Terahertz | Megahertz | Kilohertz | PerSecond => Dimension::Energy,
            DipoleAu | Debye => Dimension::Dipole,
            Bohr | Nanometer => Dimension::Length,
            Amu | ElectronMass => Dimension::Mass,
            MhzPerWcm2 | ShiftPerIntensityAu => Dimension::ShiftPerIntensity,
            WPerCm2 | IntensityAu => Dimension::Intensity,
        }
    }

    /// Size of one of this unit in the atomic unit of its dimension.
    fn in_atomic_units(self) -> f64 {
        let k = &CONSTANTS;
        match self {
            Unit::Hartree => 1.0,
            Unit::Wavenumber => 1.0 / k.hartree_to_wavenumber,
            Unit::Terahertz => 1e12 / k.hartree_hz(),
            Unit::Megahertz => 1e6 / k.hartree_hz(),
            Unit::Kilohertz => 1e3 / k.hartree_hz(),
            Unit::PerSecond => k.au_time,
            Unit::DipoleAu => 1.0,
            // 1 D = 1e-21 / c  C m
            Unit::Debye => 1e-21 / k.c / (k.e_charge * k.a0),
            Unit::Bohr => 1.0,
            Unit::Nanometer => 1e-9 / k.a0,
            Unit::Amu => k.amu_to_electron_mass,
            Unit::ElectronMass => 1.0,
            Unit::MhzPerWcm2 => k.au_intensity_w_cm2() * 1e6 / k.hartree_hz(),
            Unit::ShiftPerIntensityAu => 1.0,
            Unit::WPerCm2 => 1.0 / k.au_intensity_w_cm2(),
            Unit::IntensityAu => 1.0,
        }
    }
}

pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from == to {
        return Ok(value);
    }
    if from.dimension() != to.dimension() {
        return Err(Error::IncompatibleUnits { from: from.symbol(), to: to.symbol() });
    }
    Ok(value * (from.in_atomic_units() / to.in_atomic_units()))
}

#[inline]
pub fn cm1_to_hartree(x: f64) -> f64 {
    x / CONSTANTS.hartree_to_wavenumber
}

#[inline]
pub fn hartree_to_cm1(x: f64) -> f64 {
    x * CONSTANTS.hartree_to_wavenumber
}

/// Rate in atomic units of inverse time to s^-1.
#[inline]
pub fn rate_au_to_per_second(x: f64) -> f64 {
    x / CONSTANTS.au_time
}

#[inline]
pub fn amu_to_me(x: f64) -> f64 {
    x * CONSTANTS.amu_to_electron_mass
}

/// Atomic-unit shift-per-intensity to MHz/(W/cm^2).
#[inline]
pub fn shift_per_intensity_to_mhz(x: f64) -> f64 {
    x / Unit::MhzPerWcm2.in_atomic_units()
}
