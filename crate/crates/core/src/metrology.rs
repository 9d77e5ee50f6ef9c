//! Sensitivity of levels and intervals to the proton-to-electron mass ratio,
//! anchor and sensor selection, magic (Stark-cancellation) frequencies and
//! the clock precision budget.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial::{Engine, RovibLevel};
use crate::response::{level_responses, LevelResponse, Polarization, WidthPolicy};
use crate::units::hartree_to_cm1;

/// Default relative mass step of the central difference.
pub const DEFAULT_REL_STEP: f64 = 1e-6;
/// Default half-width of the exclusion zone around each resonance, cm^-1.
pub const DEFAULT_EXCLUSION: f64 = 0.05;

/// dE/dlnμ of one level, where μ = m_p/m_e enters through the reduced mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub level: RovibLevel,
    /// cm^-1.
    #[serde(rename = "dE_dlnmu")]
    pub de_dlnmu: f64,
    /// Set when the level unbinds on one side and a one-sided difference was used.
    pub one_sided: bool,
}

/// Sensitivity of the interval between two levels of one channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSensitivity {
    pub a: SensitivityReport,
    pub b: SensitivityReport,
    /// |E_b − E_a|, cm^-1.
    pub nu: f64,
    /// dE_b/dlnμ − dE_a/dlnμ, cm^-1.
    pub dnu_dlnmu: f64,
    /// ν / (dν/dlnμ).
    pub kappa: f64,
}

fn check_rel_step(rel_step: f64) -> Result<()> {
    if !(1e-8..=1e-3).contains(&rel_step) {
        return Err(Error::InvalidParameter(format!("rel_step {rel_step} outside [1e-8, 1e-3]")));
    }
    Ok(())
}

/// Level energies of `channel` at reduced mass scaled by `factor`, on the
/// unperturbed lattice so discretization errors cancel in the difference.
fn energies_at(engine: &Engine, channel: &str, j: u32, factor: f64) -> Result<Vec<f64>> {
    let base = engine.system();
    let mut sys = base.with_reduced_mass(base.reduced_mass * factor);
    sys.settings.grid_step = Some(engine.step());
    Ok(Engine::new(sys)?.bound_levels(channel, j)?.iter().map(|l| l.energy).collect())
}

/// Sensitivities of every bound level of `channel` at rotation `j`.
pub fn channel_sensitivities(engine: &Engine, channel: &str, j: u32, rel_step: f64) -> Result<Vec<SensitivityReport>> {
    check_rel_step(rel_step)?;
    let levels = engine.bound_levels(channel, j)?;
    let sides = [1.0 + rel_step, 1.0 - rel_step]
        .par_iter()
        .map(|&f| energies_at(engine, channel, j, f))
        .collect::<Result<Vec<_>>>()?;
    let (up, down) = (&sides[0], &sides[1]);
    let (ln_up, ln_down) = ((1.0 + rel_step).ln(), (1.0 - rel_step).ln());
    levels
        .into_iter()
        .map(|l| {
            let v = l.v as usize;
            let (de, one_sided) = match (up.get(v), down.get(v)) {
                (Some(p), Some(m)) => ((p - m) / (ln_up - ln_down), false),
                (Some(p), None) => ((p - l.energy) / ln_up, true),
                (None, Some(m)) => ((m - l.energy) / ln_down, true),
                (None, None) => return Err(Error::LevelLost { channel: l.channel.clone(), v: l.v }),
            };
            Ok(SensitivityReport { level: l, de_dlnmu: hartree_to_cm1(de), one_sided })
        })
        .collect()
}

pub fn mu_sensitivity(engine: &Engine, level: &RovibLevel, rel_step: f64) -> Result<SensitivityReport> {
    channel_sensitivities(engine, &level.channel, level.j, rel_step)?
        .into_iter()
        .nth(level.v as usize)
        .ok_or_else(|| Error::NoSuchLevel(level.label()))
}

/// Interval a → b from two level reports.
pub fn interval_from_reports(a: &SensitivityReport, b: &SensitivityReport) -> Result<IntervalSensitivity> {
    let nu = hartree_to_cm1((b.level.energy - a.level.energy).abs());
    if nu == 0.0 {
        return Err(Error::DegeneratePair(format!("{} and {}", a.level.label(), b.level.label())));
    }
    let dnu = b.de_dlnmu - a.de_dlnmu;
    Ok(IntervalSensitivity { a: a.clone(), b: b.clone(), nu, dnu_dlnmu: dnu, kappa: nu / dnu })
}

pub fn interval_sensitivity(engine: &Engine, a: &RovibLevel, b: &RovibLevel) -> Result<IntervalSensitivity> {
    if a.channel != b.channel {
        return Err(Error::InvalidParameter(format!("{} and {} lie in different channels", a.label(), b.label())));
    }
    if a == b {
        return Err(Error::DegeneratePair(a.label()));
    }
    let ra = mu_sensitivity(engine, a, DEFAULT_REL_STEP)?;
    let rb = if a.j == b.j {
        channel_sensitivities(engine, &b.channel, b.j, DEFAULT_REL_STEP)?
            .into_iter()
            .nth(b.v as usize)
            .ok_or_else(|| Error::NoSuchLevel(b.label()))?
    } else {
        mu_sensitivity(engine, b, DEFAULT_REL_STEP)?
    };
    interval_from_reports(&ra, &rb)
}

/// Value and lnμ-derivative of (ν₁ − ν₂)/(ν₁ + ν₂).
pub fn double_ratio(i1: &IntervalSensitivity, i2: &IntervalSensitivity) -> (f64, f64) {
    let (n1, n2, s1, s2) = (i1.nu, i2.nu, i1.dnu_dlnmu, i2.dnu_dlnmu);
    let sum = n1 + n2;
    ((n1 - n2) / sum, (s1 - s2) / sum - (n1 - n2) * (s1 + s2) / (sum * sum))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorSelection {
    /// Least sensitive level.
    pub anchor: SensitivityReport,
    /// Most sensitive interval.
    pub sensor: IntervalSensitivity,
}

/// Anchor = argmin |dE/dlnμ|, sensor = argmax |dν/dlnμ| over pairs; ties go to lower v.
pub fn select_from_reports(reports: &[SensitivityReport]) -> Result<AnchorSelection> {
    if reports.len() < 3 {
        return Err(Error::InsufficientLevels { needed: 3, got: reports.len() });
    }
    let mut sorted: Vec<&SensitivityReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.level.v);
    let anchor = sorted
        .iter()
        .fold(None::<&SensitivityReport>, |best, r| match best {
            Some(b) if b.de_dlnmu.abs() <= r.de_dlnmu.abs() => Some(b),
            _ => Some(r),
        })
        .cloned()
        .ok_or(Error::InsufficientLevels { needed: 3, got: 0 })?;
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..sorted.len() {
        for k in i + 1..sorted.len() {
            let s = (sorted[k].de_dlnmu - sorted[i].de_dlnmu).abs();
            if best.is_none_or(|(b, ..)| s > b) {
                best = Some((s, i, k));
            }
        }
    }
    let (_, i, k) = best.ok_or(Error::InsufficientLevels { needed: 3, got: 0 })?;
    Ok(AnchorSelection { anchor, sensor: interval_from_reports(sorted[i], sorted[k])? })
}

pub fn select_anchor_sensor(engine: &Engine, channel: &str, j: u32) -> Result<AnchorSelection> {
    select_from_reports(&channel_sensitivities(engine, channel, j, DEFAULT_REL_STEP)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagicSettings {
    /// Scan step, cm^-1.
    pub step: f64,
    /// Half-width of the zone excluded around every resonance, cm^-1.
    pub exclusion: f64,
    /// Bracket width at which refinement stops, cm^-1.
    pub tolerance: f64,
    /// |Re Δα| required at a refined point, MHz/(W/cm²).
    pub residual: f64,
}

impl Default for MagicSettings {
    fn default() -> Self {
        Self { step: 0.1, exclusion: DEFAULT_EXCLUSION, tolerance: 1e-6, residual: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagicPoint {
    pub pair: (RovibLevel, RovibLevel),
    /// cm^-1.
    pub nu_star: f64,
    /// d Re(α_a − α_b)/dν, MHz/(W/cm²) per cm^-1.
    pub slope: f64,
    /// Im α of both levels, MHz/(W/cm²).
    pub im_alpha: (f64, f64),
    /// Re α (equal for both levels), MHz/(W/cm²).
    pub re_alpha: f64,
    /// Re(α_a − α_b) at nu_star.
    pub residual: f64,
    /// Distance to the nearest resonance of either level, cm^-1.
    pub nearest_pole: f64,
}

/// Frequencies in `window` (cm^-1) where Re α_a = Re α_b, away from
/// resonances. An empty list means no crossing.
pub fn find_magic(
    a: &LevelResponse,
    b: &LevelResponse,
    window: (f64, f64),
    settings: &MagicSettings,
) -> Result<Vec<MagicPoint>> {
    let (lo, hi) = window;
    if !(lo < hi) || lo < 0.0 || !(settings.step > 0.0) {
        return Err(Error::InvalidParameter(format!("bad window [{lo}, {hi}] or step {}", settings.step)));
    }
    if a.level == b.level && a.polarization == b.polarization {
        return Err(Error::DegeneratePair(a.level.label()));
    }
    let ex = settings.exclusion;
    let mut poles: Vec<f64> = a
        .resonances(lo - ex, hi + ex)
        .into_iter()
        .chain(b.resonances(lo - ex, hi + ex))
        .map(|r| r.nu_cm1)
        .collect();
    poles.sort_by(f64::total_cmp);
    let excluded = |nu: f64| poles.iter().any(|p| (nu - p).abs() <= ex);
    let n = ((hi - lo) / settings.step).round().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|i| (lo + i as f64 * settings.step).min(hi)).collect();
    if grid.iter().all(|&nu| excluded(nu)) {
        return Err(Error::AllPoles(lo, hi));
    }
    let delta = |nu: f64| -> Result<f64> { Ok(a.alpha(nu)?.re - b.alpha(nu)?.re) };
    let values: Vec<Option<f64>> = grid
        .par_iter()
        .map(|&nu| if excluded(nu) { Ok(None) } else { delta(nu).map(Some) })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..grid.len() - 1 {
        let (Some(f0), Some(f1)) = (values[k], values[k + 1]) else { continue };
        let (x0, x1) = (grid[k], grid[k + 1]);
        if (f0 < 0.0) == (f1 < 0.0) || poles.iter().any(|p| *p >= x0 && *p <= x1) {
            continue;
        }
        let (mut l, mut r, mut fl) = (x0, x1, f0);
        let mut mid = 0.5 * (l + r);
        let mut fm = delta(mid)?;
        for _ in 0..200 {
            if (r - l) <= settings.tolerance && fm.abs() < settings.residual {
                break;
            }
            let next = 0.5 * (l + r);
            if next <= l || next >= r {
                break;
            }
            mid = next;
            fm = delta(mid)?;
            if fm == 0.0 {
                break;
            }
            if (fm < 0.0) == (fl < 0.0) {
                l = mid;
                fl = fm;
            } else {
                r = mid;
            }
        }
        let h = (settings.tolerance * 100.0).max(1e-9);
        let slope = (delta(mid + h)? - delta(mid - h)?) / (2.0 * h);
        let (aa, ab) = (a.alpha(mid)?, b.alpha(mid)?);
        let nearest_pole = poles.iter().map(|p| (p - mid).abs()).fold(f64::INFINITY, f64::min);
        out.push(MagicPoint {
            pair: (a.level.clone(), b.level.clone()),
            nu_star: mid,
            slope,
            im_alpha: (aa.im, ab.im),
            re_alpha: aa.re,
            residual: fm,
            nearest_pole,
        });
    }
    Ok(out)
}

/// [`find_magic`] for two ground levels, building their responses first.
pub fn find_magic_levels(
    engine: &Engine,
    a: &RovibLevel,
    b: &RovibLevel,
    window: (f64, f64),
    widths: &WidthPolicy,
    settings: &MagicSettings,
) -> Result<Vec<MagicPoint>> {
    if a == b {
        return Err(Error::DegeneratePair(a.label()));
    }
    let r = level_responses(engine, &[a.clone(), b.clone()], Polarization::default(), widths)?;
    find_magic(&r[0], &r[1], window, settings)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionBudget {
    /// Hz.
    pub probe_linewidth: f64,
    pub snr: f64,
    /// Hz.
    pub transition_nu: f64,
    pub fractional_instability_at_1s: f64,
}

impl PrecisionBudget {
    /// Instability after averaging for `tau` seconds.
    pub fn at(&self, tau: f64) -> f64 {
        self.fractional_instability_at_1s / tau.sqrt()
    }
}

pub fn precision_budget(probe_linewidth: f64, snr: f64, transition_nu: f64) -> Result<PrecisionBudget> {
    for (name, x) in [("linewidth", probe_linewidth), ("snr", snr), ("transition frequency", transition_nu)] {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
        }
    }
    Ok(PrecisionBudget {
        probe_linewidth,
        snr,
        transition_nu,
        fractional_instability_at_1s: probe_linewidth / (snr * transition_nu),
    })
}
