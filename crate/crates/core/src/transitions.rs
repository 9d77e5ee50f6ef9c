//! Vibrationally averaged transition dipoles, Franck-Condon factors and
//! two-photon Raman pathway products.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::simpson;
use crate::potential::DipoleFunction;
use crate::radial::{Engine, RadialWavefunction, RovibLevel};
use crate::units::hartree_to_cm1;

/// ∫ a(R) f(R) b(R) dR over the common support of two sampled functions.
/// Aligned lattices are integrated directly; otherwise the coarser function is
/// interpolated onto the finer lattice.
pub fn radial_integral<F: Fn(f64) -> f64>(a: &RadialWavefunction, b: &RadialWavefunction, f: F) -> f64 {
    let (fine, coarse) = if a.step <= b.step { (a, b) } else { (b, a) };
    let lo = fine.r_min().max(coarse.r_min());
    let hi = fine.r_max().min(coarse.r_max());
    if !(hi > lo) || fine.values.len() < 2 || coarse.values.len() < 2 {
        return 0.0;
    }
    let i0 = ((lo - fine.r_min()) / fine.step - 1e-9).ceil().max(0.0) as usize;
    let i1 = (((hi - fine.r_min()) / fine.step + 1e-9).floor() as usize).min(fine.values.len() - 1);
    if i1 <= i0 {
        return 0.0;
    }
    let aligned = fine.step == coarse.step && fine.origin == coarse.origin;
    let shift = coarse.start - fine.start;
    let integrand: Vec<f64> = (i0..=i1)
        .map(|i| {
            let r = fine.r(i);
            let other = if aligned {
                let k = i as i64 - shift;
                if k < 0 || k as usize >= coarse.values.len() {
                    0.0
                } else {
                    coarse.values[k as usize]
                }
            } else {
                coarse.value_at(r)
            };
            fine.values[i] * other * f(r)
        })
        .collect();
    simpson(&integrand, fine.step)
}

pub fn overlap(a: &RadialWavefunction, b: &RadialWavefunction) -> f64 {
    radial_integral(a, b, |_| 1.0)
}

/// ∫ ψ_a d(R) ψ_b dR.
pub fn dipole_integral(a: &RadialWavefunction, d: &DipoleFunction, b: &RadialWavefunction) -> f64 {
    radial_integral(a, b, |r| d.evaluate(r))
}

/// d(R)·ψ(R) tabulated on a wavefunction's lattice, for repeated projections
/// onto functions sharing that lattice.
#[derive(Debug, Clone)]
pub struct DipoleKernel {
    wave: RadialWavefunction,
    values: Vec<f64>,
}

impl DipoleKernel {
    pub fn new(wave: &RadialWavefunction, d: &DipoleFunction) -> Self {
        let values = wave.values.iter().enumerate().map(|(i, v)| v * d.evaluate(wave.r(i))).collect();
        Self { wave: wave.clone(), values }
    }

    pub fn r_max(&self) -> f64 {
        self.wave.r_max()
    }

    /// ∫ ψ d(R) φ dR. On a shared lattice this is a trapezoid sum, which is
    /// spectrally accurate because the bound factor vanishes at both ends.
    pub fn project(&self, other: &RadialWavefunction) -> f64 {
        let w = &self.wave;
        if w.step != other.step || w.origin != other.origin {
            return self.interpolated(other);
        }
        let lo = w.start.max(other.start);
        let hi = (w.start + w.values.len() as i64).min(other.start + other.values.len() as i64);
        if hi <= lo {
            return 0.0;
        }
        let a = &self.values[(lo - w.start) as usize..(hi - w.start) as usize];
        let b = &other.values[(lo - other.start) as usize..(hi - other.start) as usize];
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * w.step
    }

    fn interpolated(&self, other: &RadialWavefunction) -> f64 {
        let kernel = RadialWavefunction { values: self.values.clone(), ..self.wave.clone() };
        overlap(&kernel, other)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMoment {
    pub bra: RovibLevel,
    pub ket: RovibLevel,
    /// ⟨v'J'|d(R)|vJ⟩ in e a0.
    pub reduced_dipole: f64,
    /// |⟨v'|v⟩|².
    pub fcf: f64,
}

/// Reduced dipole between an excited-channel level and a ground-channel level.
pub fn reduced_dipole(engine: &Engine, excited: &RovibLevel, ground: &RovibLevel) -> Result<TransitionMoment> {
    let sys = engine.system();
    if !sys.is_ground(&ground.channel) {
        return Err(Error::InvalidParameter(format!("`{}` is not the ground channel", ground.channel)));
    }
    let d = sys.dipole(&excited.channel)?;
    let we = engine.wavefunction(excited)?;
    let wg = engine.wavefunction(ground)?;
    let s = overlap(&we, &wg);
    Ok(TransitionMoment {
        bra: excited.clone(),
        ket: ground.clone(),
        reduced_dipole: dipole_integral(&we, d, &wg),
        fcf: (s * s).min(1.0),
    })
}

/// Rows indexed by the first channel's v, columns by the second's.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelMatrix {
    pub rows: Vec<RovibLevel>,
    pub cols: Vec<RovibLevel>,
    pub values: Vec<Vec<f64>>,
}

impl LevelMatrix {
    pub fn get(&self, row_v: usize, col_v: usize) -> f64 {
        self.values[row_v][col_v]
    }

    pub fn row_sum(&self, row_v: usize) -> f64 {
        self.values[row_v].iter().sum()
    }

    pub fn col_sum(&self, col_v: usize) -> f64 {
        self.values.iter().map(|r| r[col_v]).sum()
    }
}

fn level_matrix<F>(engine: &Engine, row_channel: &str, row_j: u32, col_channel: &str, col_j: u32, f: F) -> Result<LevelMatrix>
where
    F: Fn(&RadialWavefunction, &RadialWavefunction) -> f64 + Sync,
{
    let rows = engine.bound_levels(row_channel, row_j)?;
    let cols = engine.bound_levels(col_channel, col_j)?;
    let row_waves = rows.par_iter().map(|l| engine.wavefunction(l)).collect::<Result<Vec<_>>>()?;
    let col_waves = cols.par_iter().map(|l| engine.wavefunction(l)).collect::<Result<Vec<_>>>()?;
    let values = row_waves
        .par_iter()
        .map(|a| col_waves.iter().map(|b| f(a, b)).collect())
        .collect();
    Ok(LevelMatrix { rows, cols, values })
}

/// Franck-Condon factors |⟨v'J'|vJ⟩|² for every bound pair.
pub fn fcf_matrix(engine: &Engine, excited: &str, ground: &str, jp: u32, j: u32) -> Result<LevelMatrix> {
    level_matrix(engine, excited, jp, ground, j, |a, b| {
        let s = overlap(a, b);
        s * s
    })
}

/// Reduced dipoles ⟨v'J'|d|vJ⟩ (e a0) for every bound pair.
pub fn dipole_matrix(engine: &Engine, excited: &str, jp: u32, j: u32) -> Result<LevelMatrix> {
    let sys = engine.system();
    let d = sys.dipole(excited)?.clone();
    let ground = sys.ground.label.clone();
    level_matrix(engine, excited, jp, &ground, j, move |a, b| dipole_integral(a, &d, b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamanPathway {
    pub initial: RovibLevel,
    #[serde(rename = "final")]
    pub final_level: RovibLevel,
    pub intermediate: RovibLevel,
    /// Product of the two reduced dipoles, (e a0)².
    pub product: f64,
    pub dipole_initial: f64,
    pub dipole_final: f64,
    /// Pump and Stokes frequencies, cm^-1.
    pub detunings: (f64, f64),
}

fn check_raman(engine: &Engine, initial: &RovibLevel, final_level: &RovibLevel) -> Result<()> {
    let sys = engine.system();
    for (name, l) in [("initial", initial), ("final", final_level)] {
        if l.j != 0 {
            return Err(Error::SelectionRule(format!("{name} level must have J=0, got J={}", l.j)));
        }
        if !sys.is_ground(&l.channel) {
            return Err(Error::SelectionRule(format!("{name} level must lie in the ground channel")));
        }
    }
    Ok(())
}

pub fn raman_product(
    engine: &Engine,
    initial: &RovibLevel,
    final_level: &RovibLevel,
    intermediate: &RovibLevel,
) -> Result<RamanPathway> {
    check_raman(engine, initial, final_level)?;
    if intermediate.j != 1 {
        return Err(Error::SelectionRule(format!("intermediate level must have J'=1, got J'={}", intermediate.j)));
    }
    let a = reduced_dipole(engine, intermediate, initial)?.reduced_dipole;
    let b = reduced_dipole(engine, intermediate, final_level)?.reduced_dipole;
    Ok(RamanPathway {
        initial: initial.clone(),
        final_level: final_level.clone(),
        intermediate: intermediate.clone(),
        product: a * b,
        dipole_initial: a,
        dipole_final: b,
        detunings: (
            hartree_to_cm1(intermediate.energy - initial.energy),
            hartree_to_cm1(intermediate.energy - final_level.energy),
        ),
    })
}

/// Every J'=1 intermediate of the dipole-coupled channels (or only `channel`),
/// sorted by descending |product|, ties to the less bound intermediate.
pub fn rank_intermediates(
    engine: &Engine,
    initial: &RovibLevel,
    final_level: &RovibLevel,
    channel: Option<&str>,
) -> Result<Vec<RamanPathway>> {
    check_raman(engine, initial, final_level)?;
    let sys = engine.system();
    let channels: Vec<String> = match channel {
        Some(c) => {
            sys.dipole(c)?;
            vec![c.to_string()]
        }
        None => sys.dipoles.iter().map(|d| d.bra.clone()).collect(),
    };
    let mut intermediates = Vec::new();
    for c in &channels {
        intermediates.extend(engine.bound_levels(c, 1)?);
    }
    let mut out = intermediates
        .par_iter()
        .map(|l| raman_product(engine, initial, final_level, l))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| {
        b.product
            .abs()
            .total_cmp(&a.product.abs())
            .then(a.intermediate.binding_energy.total_cmp(&b.intermediate.binding_energy))
    });
    Ok(out)
}
