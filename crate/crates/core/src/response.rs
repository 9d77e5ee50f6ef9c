//! Complex dynamic polarizability of ground-channel levels, ac Stark shifts
//! and photon scattering rates.
//!
//! α(ν) = (1/ε₀c) Σ_f |⟨f|d·ε|i⟩|² z_f / (z_f² − (hν)²), z_f = E_f − iħΓ_f/2 − E_i,
//! summed over bound intermediates of every dipole-coupled channel plus an
//! integral over each channel's continuum. Values are shifts per intensity in
//! MHz/(W/cm²); the level shift is −αI.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::angular::absorption_weight;
use crate::decay::{decay_reports, DecaySettings};
use crate::error::{Error, Result};
use crate::numeric::{integrate_panels, octave_edges, CubicSpline, GaussPanel};
use crate::radial::{Engine, RovibLevel};
use crate::transitions::DipoleKernel;
use crate::units::{cm1_to_hartree, hartree_to_cm1, shift_per_intensity_to_mhz, CONSTANTS};

/// Default frequency step of [`scan`], cm^-1.
pub const DEFAULT_SCAN_STEP: f64 = 0.1;
/// A narrow intermediate closer than this (relative) to the photon energy is on resonance.
const POLE_GUARD: f64 = 1e-12;
const CONTINUUM_ORDER: usize = 10;
const CONTINUUM_TOL: f64 = 1e-9;
const CONTINUUM_OCTAVES: u32 = 16;
const CONTINUUM_DOUBLINGS: usize = 12;

/// Source of the intermediate-level decay rates Γ_f.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum WidthPolicy {
    /// Every intermediate is infinitely narrow.
    Zero,
    /// Total Einstein A of each intermediate from the decay module.
    #[default]
    FromDecay,
    /// Decay rates in s^-1 keyed by level label; unlisted levels are narrow.
    Custom(HashMap<String, f64>),
}

/// Magnetic sublevel of the ground level and spherical component of the light.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Polarization {
    #[serde(rename = "M")]
    pub m: i32,
    pub eps: i32,
}

/// One bound intermediate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillatorTerm {
    pub intermediate: RovibLevel,
    /// E_f − E_i, Hartree.
    pub gap: f64,
    /// |⟨f|d·ε|i⟩|², (e a0)².
    pub strength: f64,
    /// Γ_f, s^-1.
    pub rate: f64,
}

/// Continuum of one channel at one J', sampled on quadrature nodes in E_f − E_i.
#[derive(Debug, Clone)]
pub struct ContinuumBlock {
    pub channel: String,
    pub jp: u32,
    /// Asymptote of the channel minus E_i, Hartree.
    pub threshold: f64,
    /// Upper end of the energy integral, Hartree above E_i.
    pub cutoff: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Squared matrix element per unit energy at each node.
    pub density: Vec<f64>,
    spline: Option<CubicSpline>,
}

impl ContinuumBlock {
    /// Contribution Σ g z/(z² − ω²) in atomic units (before the 1/ε₀c prefactor).
    fn sum(&self, omega: f64) -> Complex64 {
        let anti: f64 = self.nodes.iter().zip(&self.weights).zip(&self.density).map(|((e, q), g)| q * g / (e + omega)).sum();
        let pole_inside = omega > self.threshold && omega < self.cutoff;
        let spline = match (&self.spline, pole_inside) {
            (Some(s), true) => s,
            _ => {
                let direct: f64 =
                    self.nodes.iter().zip(&self.weights).zip(&self.density).map(|((e, q), g)| q * g / (e - omega)).sum();
                return Complex64::new(0.5 * (direct + anti), 0.0);
            }
        };
        // Principal value by subtracting the density at the pole.
        let gp = spline.eval(omega).max(0.0);
        let slope = spline.derivative(omega);
        let regular: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.density)
            .map(|((e, q), g)| if *e == omega { q * slope } else { q * (g - gp) / (e - omega) })
            .sum();
        let pv = regular + gp * ((self.cutoff - omega) / (omega - self.threshold)).ln();
        Complex64::new(0.5 * (pv + anti), 0.5 * PI * gp)
    }
}

/// Everything needed to evaluate α(ν) of one ground level quickly.
#[derive(Debug, Clone)]
pub struct LevelResponse {
    pub level: RovibLevel,
    pub polarization: Polarization,
    pub terms: Vec<OscillatorTerm>,
    pub continuum: Vec<ContinuumBlock>,
}

impl LevelResponse {
    /// α at photon energy `omega` (Hartree) in atomic units of shift per intensity.
    pub fn alpha_au(&self, omega: f64) -> Result<Complex64> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidEnergy(omega));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let half_width = 0.5 * t.rate * CONSTANTS.au_time;
            if half_width == 0.0 && (t.gap - omega).abs() <= POLE_GUARD * t.gap.max(omega) {
                return Err(Error::OnResonance { nu_cm1: hartree_to_cm1(omega) });
            }
            let z = Complex64::new(t.gap, -half_width);
            sum += t.strength * z / (z * z - omega * omega);
        }
        for b in &self.continuum {
            sum += b.sum(omega);
        }
        Ok(sum * (4.0 * PI / CONSTANTS.c_au))
    }

    /// α at `nu_cm1` in MHz/(W/cm²).
    pub fn alpha(&self, nu_cm1: f64) -> Result<Complex64> {
        if !(nu_cm1 >= 0.0) {
            return Err(Error::InvalidParameter(format!("frequency must be non-negative, got {nu_cm1} cm^-1")));
        }
        Ok(self.alpha_au(cm1_to_hartree(nu_cm1))? * shift_per_intensity_to_mhz(1.0))
    }

    /// Bound resonances inside `[nu_min, nu_max]` (cm^-1), in increasing order.
    pub fn resonances(&self, nu_min: f64, nu_max: f64) -> Vec<Resonance> {
        let mut out: Vec<Resonance> = self
            .terms
            .iter()
            .filter(|t| t.strength > 0.0)
            .map(|t| Resonance { nu_cm1: hartree_to_cm1(t.gap), intermediate: t.intermediate.clone(), strength: t.strength })
            .filter(|r| r.nu_cm1 >= nu_min && r.nu_cm1 <= nu_max)
            .collect();
        out.sort_by(|a, b| a.nu_cm1.total_cmp(&b.nu_cm1));
        out
    }

    pub fn scan(&self, nu_min: f64, nu_max: f64, step: f64) -> Result<PolarizabilitySpectrum> {
        if !(nu_min < nu_max) || !(step > 0.0) || nu_min < 0.0 {
            return Err(Error::InvalidParameter(format!("bad scan window [{nu_min}, {nu_max}] step {step}")));
        }
        let n = ((nu_max - nu_min) / step).round() as usize;
        let grid: Vec<f64> = (0..=n).map(|i| (nu_min + i as f64 * step).min(nu_max)).collect();
        let alpha = grid.par_iter().map(|&nu| self.alpha(nu)).collect::<Result<Vec<_>>>()?;
        let resonances = self.resonances(nu_min, nu_max);
        let zero_crossings = grid
            .windows(2)
            .zip(alpha.windows(2))
            .filter(|(g, a)| {
                (a[0].re < 0.0) != (a[1].re < 0.0)
                    && !resonances.iter().any(|r| r.nu_cm1 >= g[0] && r.nu_cm1 <= g[1])
            })
            .map(|(g, a)| g[0] + (g[1] - g[0]) * a[0].re / (a[0].re - a[1].re))
            .collect();
        Ok(PolarizabilitySpectrum {
            level: self.level.clone(),
            polarization: self.polarization,
            grid,
            alpha,
            resonances,
            zero_crossings,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resonance {
    pub nu_cm1: f64,
    pub intermediate: RovibLevel,
    /// |⟨f|d·ε|i⟩|², (e a0)².
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizabilitySpectrum {
    pub level: RovibLevel,
    pub polarization: Polarization,
    /// Frequencies, cm^-1.
    pub grid: Vec<f64>,
    /// α, MHz/(W/cm²).
    pub alpha: Vec<Complex64>,
    pub resonances: Vec<Resonance>,
    /// Sign changes of Re α not bracketing a resonance, linearly interpolated, cm^-1.
    pub zero_crossings: Vec<f64>,
}

impl PolarizabilitySpectrum {
    /// Label of the resonance nearest to `nu_cm1`, if any is registered.
    pub fn nearest_resonance(&self, nu_cm1: f64) -> Option<&Resonance> {
        self.resonances.iter().min_by(|a, b| (a.nu_cm1 - nu_cm1).abs().total_cmp(&(b.nu_cm1 - nu_cm1).abs()))
    }
}

/// Decay rates (s^-1) of `levels` under `policy`.
fn rates(engine: &Engine, levels: &[RovibLevel], policy: &WidthPolicy) -> Result<Vec<f64>> {
    match policy {
        WidthPolicy::Zero => Ok(vec![0.0; levels.len()]),
        WidthPolicy::Custom(map) => Ok(levels.iter().map(|l| map.get(&l.label()).copied().unwrap_or(0.0)).collect()),
        WidthPolicy::FromDecay => {
            Ok(decay_reports(engine, levels, &DecaySettings::default())?.iter().map(|r| r.a_total).collect())
        }
    }
}

/// Decay rates of every intermediate that can couple to ground levels of
/// rotation `j`, keyed by level label; reusable as [`WidthPolicy::Custom`].
pub fn intermediate_rates(engine: &Engine, j: u32) -> Result<HashMap<String, f64>> {
    let sys = engine.system();
    let mut out = HashMap::new();
    for d in &sys.dipoles {
        let omega_p = sys.channel(&d.bra)?.omega;
        for jp in j.saturating_sub(1).max(omega_p)..=j + 1 {
            let levels = engine.bound_levels(&d.bra, jp)?;
            for (l, r) in levels.iter().zip(rates(engine, &levels, &WidthPolicy::FromDecay)?) {
                out.insert(l.label(), r);
            }
        }
    }
    Ok(out)
}

/// Responses of several ground levels, sharing intermediate and continuum waves.
pub fn level_responses(
    engine: &Engine,
    levels: &[RovibLevel],
    pol: Polarization,
    widths: &WidthPolicy,
) -> Result<Vec<LevelResponse>> {
    let sys = engine.system();
    if pol.eps.abs() > 1 {
        return Err(Error::InvalidQuantumNumbers(format!("polarization component {}", pol.eps)));
    }
    for l in levels {
        if !sys.is_ground(&l.channel) {
            return Err(Error::InvalidParameter(format!("{} is not a ground-channel level", l.label())));
        }
        if pol.m.unsigned_abs() > l.j {
            return Err(Error::InvalidQuantumNumbers(format!("|M|={} exceeds J={}", pol.m.abs(), l.j)));
        }
    }
    let mut out: Vec<LevelResponse> = levels
        .iter()
        .map(|l| LevelResponse { level: l.clone(), polarization: pol, terms: Vec::new(), continuum: Vec::new() })
        .collect();
    if levels.is_empty() {
        return Ok(out);
    }
    let waves = levels.par_iter().map(|l| engine.wavefunction(l)).collect::<Result<Vec<_>>>()?;
    let js: BTreeSet<u32> = levels.iter().map(|l| l.j).collect();
    for d in &sys.dipoles {
        let curve = sys.channel(&d.bra)?;
        let kernels: Vec<DipoleKernel> = waves.iter().map(|w| DipoleKernel::new(w, d)).collect();
        let jps: BTreeSet<u32> = js.iter().flat_map(|&j| j.saturating_sub(1)..=j + 1).collect();
        for jp in jps {
            let weights: Vec<f64> =
                levels.iter().map(|l| absorption_weight(l.j, pol.m, jp, curve.omega, pol.eps)).collect();
            if weights.iter().all(|w| *w == 0.0) {
                continue;
            }
            let intermediates = engine.bound_levels(&d.bra, jp)?;
            let gamma = rates(engine, &intermediates, widths)?;
            let inter_waves = intermediates.par_iter().map(|l| engine.wavefunction(l)).collect::<Result<Vec<_>>>()?;
            let rows: Vec<Vec<OscillatorTerm>> = kernels
                .par_iter()
                .zip(levels)
                .zip(&weights)
                .map(|((k, l), &w)| {
                    if w == 0.0 {
                        return Vec::new();
                    }
                    intermediates
                        .iter()
                        .zip(&inter_waves)
                        .zip(&gamma)
                        .map(|((f, fw), &rate)| {
                            let m = k.project(fw);
                            OscillatorTerm { intermediate: f.clone(), gap: f.energy - l.energy, strength: w * m * m, rate }
                        })
                        .collect()
                })
                .collect();
            for (o, r) in out.iter_mut().zip(rows) {
                o.terms.extend(r);
            }
            if curve.has_continuum() {
                let scale: Vec<f64> =
                    out.iter().map(|o| o.terms.iter().map(|t| t.strength / t.gap).sum::<f64>()).collect();
                let blocks = continuum_blocks(engine, &d.bra, jp, levels, &kernels, &weights, &scale)?;
                for (o, b) in out.iter_mut().zip(blocks) {
                    if let Some(b) = b {
                        o.continuum.push(b);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Continuum of `channel` at `jp` for each ground level (None where the
/// angular weight vanishes). The energy cutoff is doubled until the static
/// contribution of the added range is negligible.
fn continuum_blocks(
    engine: &Engine,
    channel: &str,
    jp: u32,
    levels: &[RovibLevel],
    kernels: &[DipoleKernel],
    weights: &[f64],
    scale: &[f64],
) -> Result<Vec<Option<ContinuumBlock>>> {
    let sys = engine.system();
    let curve = sys.channel(channel)?;
    let thresholds: Vec<f64> = levels.iter().map(|l| curve.asymptote - l.energy).collect();
    let r_needed = kernels.iter().map(|k| k.r_max()).fold(0.0, f64::max);
    let step = engine.step();
    let mut cache: HashMap<u64, Vec<f64>> = HashMap::new();
    let mut eval = |es: &[f64]| -> Result<Vec<Vec<f64>>> {
        let dens = es
            .par_iter()
            .map(|&e| {
                let cw = engine.continuum_on(channel, e, jp, r_needed, step)?;
                Ok(kernels
                    .iter()
                    .zip(weights)
                    .map(|(k, &w)| {
                        if w == 0.0 {
                            return 0.0;
                        }
                        let m = k.project(&cw);
                        w * m * m
                    })
                    .collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let out = es
            .iter()
            .zip(&dens)
            .map(|(e, g)| g.iter().zip(&thresholds).map(|(g, t)| g / (t + e)).collect())
            .collect();
        for (e, g) in es.iter().zip(dens) {
            cache.insert(e.to_bits(), g);
        }
        Ok(out)
    };
    let mut top = if curve.depth() > 0.0 { curve.depth() } else { cm1_to_hartree(1000.0) };
    let (mut totals, mut panels) =
        integrate_panels(&mut eval, &octave_edges(top, CONTINUUM_OCTAVES), CONTINUUM_ORDER, CONTINUUM_TOL, scale, 20)?;
    for _ in 0..CONTINUUM_DOUBLINGS {
        let edges: Vec<f64> = (0..=4).map(|k| top * (1.0 + k as f64 / 4.0)).collect();
        let floor: Vec<f64> = scale.iter().zip(&totals).map(|(s, t)| s.abs() + t.abs()).collect();
        let (added, more) = integrate_panels(&mut eval, &edges, CONTINUUM_ORDER, CONTINUUM_TOL, &floor, 20)?;
        panels.extend(more);
        top *= 2.0;
        let small = added.iter().zip(&floor).all(|(a, f)| a.abs() <= CONTINUUM_TOL * f);
        for (t, a) in totals.iter_mut().zip(&added) {
            *t += a;
        }
        if small {
            break;
        }
    }
    panels.sort_by(|a, b| a.a.total_cmp(&b.a));
    let rule = GaussPanel::new(CONTINUUM_ORDER);
    let mut energies = Vec::new();
    let mut quad = Vec::new();
    for p in &panels {
        let mid = 0.5 * (p.a + p.b);
        for (x, w) in rule.points(p.a, mid).chain(rule.points(mid, p.b)) {
            energies.push(x);
            quad.push(w);
        }
    }
    let mut out = Vec::with_capacity(levels.len());
    for (i, &t) in thresholds.iter().enumerate() {
        if weights[i] == 0.0 {
            out.push(None);
            continue;
        }
        let density: Vec<f64> = energies
            .iter()
            .map(|e| cache.get(&e.to_bits()).map(|g| g[i]).ok_or_else(|| Error::Convergence("continuum node lost".into())))
            .collect::<Result<_>>()?;
        let nodes: Vec<f64> = energies.iter().map(|e| t + e).collect();
        let spline = if nodes.len() >= 4 { Some(CubicSpline::new(nodes.clone(), density.clone())?) } else { None };
        out.push(Some(ContinuumBlock {
            channel: channel.to_string(),
            jp,
            threshold: t,
            cutoff: t + top,
            nodes,
            weights: quad.clone(),
            density,
            spline,
        }));
    }
    Ok(out)
}

/// Response of a single ground level.
pub fn level_response(engine: &Engine, level: &RovibLevel, pol: Polarization, widths: &WidthPolicy) -> Result<LevelResponse> {
    Ok(level_responses(engine, std::slice::from_ref(level), pol, widths)?.remove(0))
}

/// α(ν) in MHz/(W/cm²) for M = 0 and linear (ε = 0) polarization. For many
/// frequencies build a [`LevelResponse`] once instead.
pub fn polarizability(engine: &Engine, level: &RovibLevel, nu_cm1: f64, widths: &WidthPolicy) -> Result<Complex64> {
    level_response(engine, level, Polarization::default(), widths)?.alpha(nu_cm1)
}

/// α sampled every `step` cm^-1 over `[nu_min, nu_max]`.
pub fn scan(
    engine: &Engine,
    level: &RovibLevel,
    nu_min: f64,
    nu_max: f64,
    step: f64,
    widths: &WidthPolicy,
) -> Result<PolarizabilitySpectrum> {
    level_response(engine, level, Polarization::default(), widths)?.scan(nu_min, nu_max, step)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizabilityRow {
    pub level: RovibLevel,
    pub alpha: Complex64,
}

/// α at fixed `nu_cm1` for every bound level of the ground channel at rotation `j`.
pub fn polarizability_vs_v(engine: &Engine, nu_cm1: f64, j: u32, widths: &WidthPolicy) -> Result<Vec<PolarizabilityRow>> {
    let ground = engine.system().ground.label.clone();
    let levels = engine.bound_levels(&ground, j)?;
    level_responses(engine, &levels, Polarization::default(), widths)?
        .into_iter()
        .map(|r| Ok(PolarizabilityRow { alpha: r.alpha(nu_cm1)?, level: r.level }))
        .collect()
}

/// Pairs (v1 < v2) whose real polarizabilities differ by less than `tol`.
pub fn equal_polarizability_pairs(rows: &[PolarizabilityRow], tol: f64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            if (a.alpha.re - b.alpha.re).abs() < tol {
                out.push((a.level.v.min(b.level.v), a.level.v.max(b.level.v)));
            }
        }
    }
    out
}

/// −αI in MHz for α in MHz/(W/cm²) and I in W/cm².
pub fn stark_shift(alpha: Complex64, intensity: f64) -> Result<Complex64> {
    if !(intensity >= 0.0) {
        return Err(Error::InvalidParameter(format!("intensity must be non-negative, got {intensity}")));
    }
    Ok(-alpha * intensity)
}

/// Photon scattering rate (s^-1) from α in MHz/(W/cm²) at intensity I (W/cm²):
/// 2 Im(α) I / ħ with α as energy per intensity.
pub fn scattering_rate_from_alpha(alpha: Complex64, intensity: f64) -> Result<f64> {
    if !(intensity >= 0.0) {
        return Err(Error::InvalidParameter(format!("intensity must be non-negative, got {intensity}")));
    }
    Ok(4.0 * PI * 1e6 * alpha.im * intensity)
}

pub fn scattering_rate(
    engine: &Engine,
    level: &RovibLevel,
    nu_cm1: f64,
    intensity: f64,
    widths: &WidthPolicy,
) -> Result<f64> {
    scattering_rate_from_alpha(polarizability(engine, level, nu_cm1, widths)?, intensity)
}
