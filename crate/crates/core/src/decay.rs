//! Spontaneous emission rates of excited rovibrational levels into bound and
//! continuum levels of the ground channel.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::angular::{allowed_ground_j, partial_line_strength};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, integrate_panels, octave_edges};
use crate::radial::{Engine, RadialWavefunction, RovibLevel};
use crate::transitions::DipoleKernel;
use crate::units::{hartree_to_cm1, rate_au_to_per_second, CONSTANTS};

/// Quadrature controls for the bound-continuum integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySettings {
    /// Gauss-Legendre order per panel.
    pub order: usize,
    pub rel_tol: f64,
    /// Octave panels below the highest open continuum energy.
    pub octaves: u32,
    pub max_rounds: usize,
}

impl Default for DecaySettings {
    fn default() -> Self {
        Self { order: 10, rel_tol: 1e-8, octaves: 20, max_rounds: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FinalKind {
    Bound,
    Continuum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialRate {
    /// Bound level label, or `continuum` for an energy bin.
    pub final_state: String,
    pub kind: FinalKind,
    #[serde(rename = "J")]
    pub final_j: u32,
    /// Angular frequency of the emitted photon, s^-1 (bin centre for continuum).
    pub omega: f64,
    /// Partial rate, s^-1.
    pub rate: f64,
    /// Continuum bin edges above the ground asymptote, cm^-1.
    pub energy_range_cm1: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub level: RovibLevel,
    /// Total rate, s^-1.
    pub a_total: f64,
    /// a_total / 2π, kHz.
    pub linewidth_khz: f64,
    pub a_bound: f64,
    pub a_continuum: f64,
    pub per_transition: Vec<PartialRate>,
    pub bound_bound_fraction: f64,
}

impl DecayReport {
    fn from_partials(level: RovibLevel, per_transition: Vec<PartialRate>) -> Self {
        let a_bound = compensated_sum(per_transition.iter().filter(|p| p.kind == FinalKind::Bound).map(|p| p.rate));
        let a_continuum =
            compensated_sum(per_transition.iter().filter(|p| p.kind == FinalKind::Continuum).map(|p| p.rate));
        let a_total = compensated_sum(per_transition.iter().map(|p| p.rate));
        let fraction = if a_total > 0.0 { (a_bound / a_total).clamp(0.0, 1.0) } else { 1.0 };
        Self {
            level,
            a_total,
            linewidth_khz: a_total / (2.0 * std::f64::consts::PI) / 1e3,
            a_bound,
            a_continuum,
            per_transition,
            bound_bound_fraction: fraction,
        }
    }

    /// Natural width ħA in Hartree.
    pub fn width_hartree(&self) -> f64 {
        self.a_total * CONSTANTS.au_time
    }

    /// Natural width in cm^-1.
    pub fn width_cm1(&self) -> f64 {
        hartree_to_cm1(self.width_hartree())
    }
}

/// Σ(bound partials)/a_total, with 0/0 defined as 1.
pub fn bound_bound_fraction(report: &DecayReport) -> f64 {
    report.bound_bound_fraction
}

/// Sum of the partial rates found so far, back in atomic units.
fn rate_au_scale(partials: &[PartialRate]) -> f64 {
    compensated_sum(partials.iter().map(|p| p.rate)) * CONSTANTS.au_time
}

/// 4ω³/(3c³) in atomic units.
fn emission_prefactor(omega: f64) -> f64 {
    4.0 * omega.powi(3) / (3.0 * CONSTANTS.c_au.powi(3))
}

pub fn einstein_a(engine: &Engine, level: &RovibLevel) -> Result<DecayReport> {
    Ok(decay_reports(engine, std::slice::from_ref(level), &DecaySettings::default())?.remove(0))
}

/// One report per J'=1 level of `channel`, deepest first.
pub fn linewidth_map(engine: &Engine, channel: &str) -> Result<Vec<DecayReport>> {
    let levels = engine.bound_levels(channel, 1)?;
    decay_reports(engine, &levels, &DecaySettings::default())
}

/// Decay reports for several excited levels, sharing continuum waves.
pub fn decay_reports(engine: &Engine, levels: &[RovibLevel], settings: &DecaySettings) -> Result<Vec<DecayReport>> {
    let sys = engine.system();
    if levels.is_empty() {
        return Ok(Vec::new());
    }
    let ground = sys.ground.clone();
    let mut excited = Vec::with_capacity(levels.len());
    for l in levels {
        if sys.is_ground(&l.channel) {
            return Err(Error::InvalidParameter(format!("{} is a ground-channel level", l.label())));
        }
        let curve = sys.channel(&l.channel)?;
        let d = sys.dipole(&l.channel)?;
        let wave = engine.wavefunction(l)?;
        excited.push((l, curve.omega, DipoleKernel::new(&wave, d), wave.r_max()));
    }
    let weights: Vec<Vec<(u32, f64)>> = excited
        .iter()
        .map(|(l, omega, _, _)| {
            allowed_ground_j(l.j, *omega)
                .into_iter()
                .map(|j| (j, partial_line_strength(j, l.j, 0, *omega)))
                .filter(|(_, w)| *w > 0.0)
                .collect()
        })
        .collect();
    let final_js: BTreeSet<u32> = weights.iter().flat_map(|w| w.iter().map(|(j, _)| *j)).collect();

    let mut partials: Vec<Vec<PartialRate>> = vec![Vec::new(); levels.len()];

    // Bound finals.
    for &j in &final_js {
        let finals = engine.bound_levels(&ground.label, j)?;
        let final_waves = finals.par_iter().map(|f| engine.wavefunction(f)).collect::<Result<Vec<_>>>()?;
        let rows: Vec<Vec<PartialRate>> = excited
            .par_iter()
            .zip(&weights)
            .map(|((l, _, kernel, _), w)| {
                let Some(&(_, weight)) = w.iter().find(|(jj, _)| *jj == j) else { return Vec::new() };
                finals
                    .iter()
                    .zip(&final_waves)
                    .filter(|(f, _)| f.energy < l.energy)
                    .map(|(f, fw)| {
                        let omega = l.energy - f.energy;
                        let m = kernel.project(fw);
                        PartialRate {
                            final_state: f.label(),
                            kind: FinalKind::Bound,
                            final_j: j,
                            omega: rate_au_to_per_second(omega),
                            rate: rate_au_to_per_second(weight * emission_prefactor(omega) * m * m),
                            energy_range_cm1: None,
                        }
                    })
                    .collect()
            })
            .collect();
        for (p, r) in partials.iter_mut().zip(rows) {
            p.extend(r);
        }
    }

    // Continuum finals.
    if ground.has_continuum() {
        let r_needed = excited.iter().map(|e| e.3).fold(0.0, f64::max);
        for &j in &final_js {
            let tops: Vec<f64> = excited.iter().map(|(l, ..)| l.energy - ground.asymptote).collect();
            let e_top = tops.iter().cloned().fold(0.0, f64::max);
            if e_top <= 0.0 {
                continue;
            }
            let comp_weight: Vec<f64> = weights
                .iter()
                .map(|w| w.iter().find(|(jj, _)| *jj == j).map(|x| x.1).unwrap_or(0.0))
                .collect();
            let step = engine.step();
            let eval = |es: &[f64]| -> Result<Vec<Vec<f64>>> {
                es.par_iter()
                    .map(|&e| {
                        let cw: RadialWavefunction = engine.continuum_on(&ground.label, e, j, r_needed, step)?;
                        Ok(excited
                            .iter()
                            .zip(&comp_weight)
                            .zip(&tops)
                            .map(|(((_, _, kernel, _), &w), &top)| {
                                if w == 0.0 || e >= top {
                                    return 0.0;
                                }
                                let m = kernel.project(&cw);
                                w * emission_prefactor(top - e) * m * m
                            })
                            .collect())
                    })
                    .collect()
            };
            let edges = octave_edges(e_top, settings.octaves);
            // Bound partials set the scale a continuum contribution must resolve against.
            let scale: Vec<f64> = partials
                .iter()
                .map(|p| rate_au_scale(p))
                .collect();
            let (_, panels) =
                integrate_panels(eval, &edges, settings.order, settings.rel_tol, &scale, settings.max_rounds)?;
            // Bin accepted panels back onto their starting octave.
            for (i, p) in partials.iter_mut().enumerate() {
                for root in 0..edges.len() - 1 {
                    let rate: f64 = compensated_sum(panels.iter().filter(|q| q.root == root).map(|q| q.values[i]));
                    if rate == 0.0 {
                        continue;
                    }
                    let (a, b) = (edges[root], edges[root + 1]);
                    let omega = tops[i] - 0.5 * (a + b);
                    p.push(PartialRate {
                        final_state: "continuum".into(),
                        kind: FinalKind::Continuum,
                        final_j: j,
                        omega: rate_au_to_per_second(omega.max(0.0)),
                        rate: rate_au_to_per_second(rate),
                        energy_range_cm1: Some((hartree_to_cm1(a), hartree_to_cm1(b))),
                    });
                }
            }
        }
    }

    Ok(levels.iter().cloned().zip(partials).map(|(l, p)| DecayReport::from_partials(l, p)).collect())
}
