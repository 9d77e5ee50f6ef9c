//! Single-channel radial Schrödinger equation: bound rovibrational levels by
//! Numerov shooting with Sturm node counting, and energy-normalized
//! continuum waves.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use parking_lot::Mutex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{brent, simpson};
use crate::potential::{MoleculeSystem, PotentialCurve};

/// Decay exponent ∫κ dR accumulated past a turning point before the box ends.
const DECAY_TARGET: f64 = 36.0;
/// Minimum ∫κ dR between a level's outer turning point and the end of the
/// grid for the level to be reported as bound.
pub const BOX_TAIL: f64 = 6.0;
/// Samples smaller than this fraction of the peak are trimmed from bound wavefunctions.
const TRIM: f64 = 1e-14;
const RESCALE: f64 = 1e200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RovibLevel {
    pub channel: String,
    pub v: u32,
    /// Index counted down from dissociation, -1 for the least bound level.
    pub v_from_top: i32,
    #[serde(rename = "J")]
    pub j: u32,
    /// Absolute energy, Hartree.
    pub energy: f64,
    /// asymptote - energy, Hartree.
    pub binding_energy: f64,
}

impl RovibLevel {
    pub fn label(&self) -> String {
        format!("{}(v={},J={})", self.channel, self.v, self.j)
    }
}

/// `v=<n>` counts from the bottom, `v=-<n>` from dissociation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSelector {
    FromBottom(u32),
    FromTop(i32),
}

impl FromStr for LevelSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let body = body.strip_prefix("v=").unwrap_or(body);
        let n: i64 = body
            .parse()
            .map_err(|_| Error::InvalidQuantumNumbers(format!("bad level selector `{s}`")))?;
        if n < 0 {
            Ok(LevelSelector::FromTop(n as i32))
        } else {
            Ok(LevelSelector::FromBottom(n as u32))
        }
    }
}

impl std::fmt::Display for LevelSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LevelSelector::FromBottom(v) => write!(f, "v={v}"),
            LevelSelector::FromTop(v) => write!(f, "v={v}"),
        }
    }
}

impl LevelSelector {
    pub fn pick<'a>(&self, levels: &'a [RovibLevel]) -> Option<&'a RovibLevel> {
        match *self {
            LevelSelector::FromBottom(v) => levels.get(v as usize),
            LevelSelector::FromTop(v) => levels.iter().find(|l| l.v_from_top == v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WaveKind {
    Bound(RovibLevel),
    Continuum {
        channel: String,
        /// Energy above the channel asymptote, Hartree.
        energy: f64,
        #[serde(rename = "J")]
        j: u32,
        /// Phase shift relative to the free Riccati-Bessel solution, in [0, π).
        phase_shift: f64,
    },
}

/// ψ(R) sampled on R_i = origin + (start + i)·step. Bound states are
/// unit-normalized; continuum states are energy-normalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialWavefunction {
    pub kind: WaveKind,
    pub origin: f64,
    pub start: i64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl RadialWavefunction {
    pub fn r(&self, i: usize) -> f64 {
        self.origin + (self.start + i as i64) as f64 * self.step
    }

    pub fn r_min(&self) -> f64 {
        self.r(0)
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.values.len().saturating_sub(1))
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.r(i)).collect()
    }

    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        simpson(&sq, self.step)
    }

    /// Sign changes between consecutive samples.
    pub fn node_count(&self) -> usize {
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let significant: Vec<f64> =
            self.values.iter().copied().filter(|v| v.abs() > 1e-9 * peak).collect();
        significant.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
    }

    /// Value at arbitrary R by cubic interpolation; zero outside the grid.
    pub fn value_at(&self, r: f64) -> f64 {
        let x = (r - self.origin) / self.step - self.start as f64;
        if x < 0.0 || x > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(self.values.len().saturating_sub(2));
        let t = x - i as f64;
        // Four-point Lagrange where possible, linear at the edges.
        let n = self.values.len();
        if i >= 1 && i + 2 < n {
            let (p0, p1, p2, p3) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
            -t * (t - 1.0) * (t - 2.0) / 6.0 * p0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * p1
                - (t + 1.0) * t * (t - 2.0) / 2.0 * p2
                + (t + 1.0) * t * (t - 1.0) / 6.0 * p3
        } else {
            self.values[i] * (1.0 - t) + self.values[(i + 1).min(n - 1)] * t
        }
    }

    /// Two-column (R, ψ) text.
    pub fn to_columns(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{:.10e} {:.10e}\n", self.r(i), v));
        }
        out
    }

    /// Expectation value of the kinetic energy, Hartree, from a fourth-order
    /// discrete Laplacian (samples outside the stored range count as zero).
    pub fn kinetic_energy(&self, reduced_mass: f64) -> f64 {
        let n = self.values.len();
        if n < 5 {
            return 0.0;
        }
        let at = |i: i64| if i < 0 || i >= n as i64 { 0.0 } else { self.values[i as usize] };
        let h2 = self.step * self.step;
        let integrand: Vec<f64> = (0..n as i64)
            .map(|i| {
                let lap = (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) / (12.0 * h2);
                -at(i) * lap
            })
            .collect();
        simpson(&integrand, self.step) / (2.0 * reduced_mass)
    }
}

/// Effective potential tabulated on one lattice for one (channel, J).
#[derive(Debug)]
pub(crate) struct ChannelGrid {
    origin: f64,
    step: f64,
    mu: f64,
    asymptote: f64,
    asymptotic_radius: f64,
    veff: Vec<f64>,
    i_min: usize,
    well: bool,
}

impl ChannelGrid {
    fn new(system: &MoleculeSystem, curve: &PotentialCurve, j: u32, step: f64) -> Self {
        let origin = curve.hard_wall_radius().unwrap_or(0.0);
        let n = ((system.r_cap() - origin) / step).floor() as usize + 1;
        let mu = system.reduced_mass;
        let cent = (j * (j + 1)) as f64 / (2.0 * mu);
        let veff: Vec<f64> = (0..n)
            .map(|i| {
                let r = origin + i as f64 * step;
                if r <= 0.0 {
                    f64::INFINITY
                } else if curve.hard_wall_radius().is_some() && i == 0 {
                    // ψ vanishes on the wall itself
                    f64::INFINITY
                } else {
                    curve.evaluate(r) + if j > 0 { cent / (r * r) } else { 0.0 }
                }
            })
            .collect();
        let (i_min, vmin) = veff
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        Self {
            origin,
            step,
            mu,
            asymptote: curve.asymptote,
            asymptotic_radius: curve.asymptotic_radius(),
            well: vmin < curve.asymptote,
            veff,
            i_min,
        }
    }

    fn r(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    fn v_min(&self) -> f64 {
        self.veff[self.i_min]
    }

    /// First index of the box for energy `e`: deep enough under the inner wall.
    fn inner_start(&self, e: f64) -> usize {
        let c = 2.0 * self.mu * self.step * self.step / 12.0;
        let mut i = self.i_min;
        while i > 0 && self.veff[i] <= e {
            i -= 1;
        }
        let mut acc = 0.0;
        while i > 0 && acc < DECAY_TARGET {
            let d = self.veff[i - 1] - e;
            if d == f64::INFINITY {
                // wall or origin: ψ vanishes there
                return i - 1;
            }
            if c * d > 0.5 {
                break;
            }
            if d > 0.0 {
                acc += (2.0 * self.mu * d).sqrt() * self.step;
            }
            i -= 1;
        }
        i
    }

    /// Outer classical turning point at `e` (first index past the minimum above `e`).
    fn outer_turning(&self, e: f64) -> usize {
        let mut i = self.i_min;
        while i + 1 < self.veff.len() && self.veff[i] <= e {
            i += 1;
        }
        i
    }

    /// ∫κ dR from the outer turning point to the end of the grid, capped at
    /// [`DECAY_TARGET`].
    fn tail_decay(&self, e: f64) -> f64 {
        let mut acc = 0.0;
        for &v in &self.veff[self.outer_turning(e)..] {
            if acc >= DECAY_TARGET {
                break;
            }
            if v > e {
                acc += (2.0 * self.mu * (v - e)).sqrt() * self.step;
            }
        }
        acc
    }

    /// Last index of the bound-state box for energy `e`.
    fn outer_end(&self, e: f64) -> usize {
        let mut i = self.outer_turning(e);
        let mut acc = 0.0;
        while i + 1 < self.veff.len() && acc < DECAY_TARGET {
            let d = self.veff[i] - e;
            if d > 0.0 {
                acc += (2.0 * self.mu * d).sqrt() * self.step;
            }
            i += 1;
        }
        i
    }

    /// Number of box eigenvalues below `e` (sign changes of the outward solution).
    fn count(&self, e: f64) -> usize {
        let start = self.inner_start(e);
        let end = self.outer_end(e);
        let c = 2.0 * self.mu * self.step * self.step / 12.0;
        let mut nodes = 0;
        let mut uy_prev = 0.0;
        let mut y = 1.0;
        let mut u = 1.0 - c * (self.veff[start + 1] - e);
        for i in start + 1..end {
            let u_next = 1.0 - c * (self.veff[i + 1] - e);
            let y_next = ((12.0 - 10.0 * u) * y - uy_prev) / u_next;
            if (y_next < 0.0) != (y < 0.0) {
                nodes += 1;
            }
            uy_prev = u * y;
            y = y_next;
            u = u_next;
            if y.abs() > RESCALE {
                y /= RESCALE;
                uy_prev /= RESCALE;
            }
        }
        nodes
    }

    /// Numerov solution from index `from` (value zero) outward through `to`, inclusive.
    fn outward(&self, e: f64, from: usize, to: usize) -> Vec<f64> {
        let c = 2.0 * self.mu * self.step * self.step / 12.0;
        let mut y = vec![0.0; to - from + 1];
        if y.len() < 2 {
            return y;
        }
        y[1] = 1e-30;
        for i in from + 1..to {
            let k = i - from;
            let u = 1.0 - c * (self.veff[i] - e);
            let u_next = 1.0 - c * (self.veff[i + 1] - e);
            let uy_prev = if k == 1 { 0.0 } else { (1.0 - c * (self.veff[i - 1] - e)) * y[k - 1] };
            y[k + 1] = ((12.0 - 10.0 * u) * y[k] - uy_prev) / u_next;
            if y[k + 1].abs() > RESCALE {
                for v in y[..=k + 1].iter_mut() {
                    *v /= RESCALE;
                }
            }
        }
        y
    }

    /// Numerov solution from index `from` (value zero) inward through `to`; element 0 is `to`.
    fn inward(&self, e: f64, from: usize, to: usize) -> Vec<f64> {
        let c = 2.0 * self.mu * self.step * self.step / 12.0;
        let len = from - to + 1;
        let mut y = vec![0.0; len];
        // y[len - 1] is index `from`
        y[len - 2] = 1e-30;
        let mut k = len - 2;
        while k > 0 {
            let i = to + k;
            let u = 1.0 - c * (self.veff[i] - e);
            let u_prev = 1.0 - c * (self.veff[i - 1] - e);
            let uy_next = if k == len - 2 { 0.0 } else { (1.0 - c * (self.veff[i + 1] - e)) * y[k + 1] };
            y[k - 1] = ((12.0 - 10.0 * u) * y[k] - uy_next) / u_prev;
            if y[k - 1].abs() > RESCALE {
                for v in y[k - 1..].iter_mut() {
                    *v /= RESCALE;
                }
            }
            k -= 1;
        }
        y
    }

    /// Brackets isolating each of the `n` eigenvalues in `[lo, hi]` by recursive
    /// bisection on the node count (spectrum slicing).
    fn isolate(&self, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        let mut out = vec![(lo, hi); n];
        let mut stack = vec![(lo, 0usize, hi, n)];
        while let Some((a, ca, b, cb)) = stack.pop() {
            if cb == ca {
                continue;
            }
            if cb - ca == 1 {
                out[ca] = (a, b);
                continue;
            }
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                // Unresolvable cluster; hand every member the same bracket.
                for slot in out.iter_mut().take(cb).skip(ca) {
                    *slot = (a, b);
                }
                continue;
            }
            let cm = self.count(mid).clamp(ca, cb);
            stack.push((mid, cm, b, cb));
            stack.push((a, ca, mid, cm));
        }
        out
    }

    /// Scale-free mismatch between the outward and inward solutions at `m`;
    /// vanishes at eigenvalues of the box `[start, end]`.
    fn mismatch(&self, e: f64, start: usize, m: usize, end: usize) -> f64 {
        let out = self.outward(e, start, m + 1);
        let inw = self.inward(e, end, m);
        let (a0, a1) = (out[m - start], out[m + 1 - start]);
        let (b0, b1) = (inw[0], inw[1]);
        (a0 * b1 - a1 * b0) / (a0.hypot(a1) * b0.hypot(b1))
    }

    /// The v-th discrete eigenvalue, given a bracket that isolates it.
    fn eigenvalue(&self, v: usize, lo: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        // Make sure the bracket really isolates level v.
        for _ in 0..200 {
            let (clo, chi) = (self.count(lo), self.count(hi));
            if clo == v && chi == v + 1 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return mid;
            }
            if self.count(mid) > v {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let start = self.inner_start(hi);
        let end = self.outer_end(hi);
        let m = self.outer_turning(0.5 * (lo + hi)).clamp(start + 2, end - 3);
        let tol = 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
        match brent(|e| self.mismatch(e, start, m, end), lo, hi, tol, 200) {
            Ok(e) => e,
            Err(_) => {
                // Mismatch lost its sign change: fall back to pure bisection.
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.count(mid) > v {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    fn bound_wave(&self, e: f64, v: u32) -> Result<(usize, Vec<f64>)> {
        let start = self.inner_start(e);
        let end = self.outer_end(e);
        let tp = self.outer_turning(e).clamp(start + 2, end - 1);
        let out = self.outward(e, start, tp + 1);
        // Match where the outward solution is large, near the turning point.
        let window = ((tp - start) / 4).min(64);
        let m = (tp - window..=tp)
            .max_by(|&a, &b| out[a - start].abs().total_cmp(&out[b - start].abs()))
            .unwrap_or(tp);
        let inw = self.inward(e, end, m);
        let scale = out[m - start] / inw[0];
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::Convergence(format!("matching failed for v={v} at E={e:e}")));
        }
        let mut psi: Vec<f64> = out[..m - start].to_vec();
        psi.extend(inw.iter().map(|y| y * scale));
        let peak = psi.iter().fold(0.0f64, |a, y| a.max(y.abs()));
        let first = psi.iter().position(|y| y.abs() > TRIM * peak).unwrap_or(0);
        let last = psi.iter().rposition(|y| y.abs() > TRIM * peak).unwrap_or(psi.len() - 1);
        let mut psi = psi[first.saturating_sub(1)..=(last + 1).min(psi.len() - 1)].to_vec();
        let offset = start + first.saturating_sub(1);
        let sq: Vec<f64> = psi.iter().map(|y| y * y).collect();
        let norm = simpson(&sq, self.step).sqrt();
        let sign = if psi.iter().find(|y| y.abs() > 1e-6 * peak).copied().unwrap_or(1.0) < 0.0 { -1.0 } else { 1.0 };
        for y in psi.iter_mut() {
            *y *= sign / norm;
        }
        Ok((offset, psi))
    }
}

/// Bound spectrum of one (channel, J), with the discrete eigenvalues on the base lattice.
#[derive(Debug, Clone)]
pub(crate) struct Spectrum {
    levels: Vec<RovibLevel>,
    grid_energies: Vec<f64>,
}

type GridKey = (String, u32, u64);

/// Owns a system and memoizes grids, spectra and wavefunctions. Safe to share
/// across threads; cached results are identical regardless of evaluation order.
#[derive(Debug)]
pub struct Engine {
    system: Arc<MoleculeSystem>,
    step: f64,
    grids: Mutex<HashMap<GridKey, Arc<ChannelGrid>>>,
    spectra: Mutex<HashMap<(String, u32), Arc<Spectrum>>>,
    waves: Mutex<HashMap<(String, u32, u32), Arc<RadialWavefunction>>>,
}

impl Engine {
    pub fn new(system: MoleculeSystem) -> Result<Self> {
        Self::from_arc(Arc::new(system))
    }

    pub fn from_arc(system: Arc<MoleculeSystem>) -> Result<Self> {
        system.validate()?;
        let step = system.grid_step();
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid step {step}")));
        }
        Ok(Self {
            system,
            step,
            grids: Mutex::new(HashMap::new()),
            spectra: Mutex::new(HashMap::new()),
            waves: Mutex::new(HashMap::new()),
        })
    }

    pub fn system(&self) -> &MoleculeSystem {
        &self.system
    }

    pub fn system_arc(&self) -> Arc<MoleculeSystem> {
        Arc::clone(&self.system)
    }

    /// Lattice spacing shared by all bound wavefunctions, a0.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub(crate) fn grid(&self, channel: &str, j: u32, step: f64) -> Result<Arc<ChannelGrid>> {
        let key = (channel.to_string(), j, step.to_bits());
        if let Some(g) = self.grids.lock().get(&key) {
            return Ok(Arc::clone(g));
        }
        let curve = self.system.channel(channel)?;
        let g = Arc::new(ChannelGrid::new(&self.system, curve, j, step));
        Ok(Arc::clone(self.grids.lock().entry(key).or_insert(g)))
    }

    fn spectrum(&self, channel: &str, j: u32) -> Result<Arc<Spectrum>> {
        let key = (channel.to_string(), j);
        if let Some(s) = self.spectra.lock().get(&key) {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(self.solve_spectrum(channel, j)?);
        Ok(Arc::clone(self.spectra.lock().entry(key).or_insert(s)))
    }

    fn solve_spectrum(&self, channel: &str, j: u32) -> Result<Spectrum> {
        let grid = self.grid(channel, j, self.step)?;
        if !grid.well {
            return Ok(Spectrum { levels: Vec::new(), grid_energies: Vec::new() });
        }
        let top = grid.asymptote;
        let floor = grid.v_min();
        let brackets = grid.isolate(floor, top, grid.count(top));
        let mut energies: Vec<f64> =
            brackets.par_iter().enumerate().map(|(v, &(lo, hi))| grid.eigenvalue(v, lo, hi)).collect();
        // Levels whose tail reaches the end of the grid are artefacts of the box.
        let n = energies.iter().take_while(|&&e| grid.tail_decay(e) >= BOX_TAIL).count();
        energies.truncate(n);
        let refined: Vec<f64> = if self.system.settings.richardson && n > 0 {
            let fine = self.grid(channel, j, 0.5 * self.step)?;
            energies
                .par_iter()
                .enumerate()
                .map(|(v, &e)| {
                    // Step halving moves levels by far less than their spacing.
                    let below = if v == 0 { e - floor } else { e - energies[v - 1] };
                    let above = if v + 1 == n { top - e } else { energies[v + 1] - e };
                    let delta = (1e-4 * (e - floor).abs()).min(0.25 * below.min(above)).max(1e-300);
                    let (mut lo, mut hi) = (e - delta, (e + delta).min(top));
                    if fine.count(lo) != v || fine.count(hi) != v + 1 {
                        lo = fine.v_min().min(floor);
                        hi = top;
                        let b = fine.isolate(lo, hi, fine.count(hi));
                        if let Some(&(a, c)) = b.get(v) {
                            lo = a;
                            hi = c;
                        }
                    }
                    let e2 = fine.eigenvalue(v, lo, hi);
                    (16.0 * e2 - e) / 15.0
                })
                .collect()
        } else {
            energies.clone()
        };
        let levels = refined
            .iter()
            .enumerate()
            .map(|(v, &e)| RovibLevel {
                channel: channel.to_string(),
                v: v as u32,
                v_from_top: v as i32 - n as i32,
                j,
                energy: e,
                binding_energy: (grid.asymptote - e).max(0.0),
            })
            .collect();
        Ok(Spectrum { levels, grid_energies: energies })
    }

    /// All bound levels of `channel` at rotation `j`, deepest first.
    pub fn bound_levels(&self, channel: &str, j: u32) -> Result<Vec<RovibLevel>> {
        Ok(self.spectrum(channel, j)?.levels.clone())
    }

    pub fn level(&self, channel: &str, j: u32, selector: LevelSelector) -> Result<RovibLevel> {
        let s = self.spectrum(channel, j)?;
        selector
            .pick(&s.levels)
            .cloned()
            .ok_or_else(|| Error::NoSuchLevel(format!("{selector} in `{channel}` at J={j} ({} bound)", s.levels.len())))
    }

    pub fn wavefunction(&self, level: &RovibLevel) -> Result<Arc<RadialWavefunction>> {
        let key = (level.channel.clone(), level.j, level.v);
        if let Some(w) = self.waves.lock().get(&key) {
            return Ok(Arc::clone(w));
        }
        let spectrum = self.spectrum(&level.channel, level.j)?;
        let stored = spectrum
            .levels
            .get(level.v as usize)
            .ok_or_else(|| Error::NoSuchLevel(level.label()))?;
        let e = spectrum.grid_energies[level.v as usize];
        let grid = self.grid(&level.channel, level.j, self.step)?;
        let (offset, values) = grid.bound_wave(e, level.v)?;
        let wave = RadialWavefunction {
            kind: WaveKind::Bound(stored.clone()),
            origin: grid.origin,
            start: offset as i64,
            step: grid.step,
            values,
        };
        let nodes = wave.node_count();
        if nodes != level.v as usize {
            return Err(Error::Convergence(format!("{} has {nodes} nodes", level.label())));
        }
        let w = Arc::new(wave);
        Ok(Arc::clone(self.waves.lock().entry(key).or_insert(w)))
    }

    /// Energy-normalized continuum wave at `energy` Hartree above the channel
    /// asymptote, on a lattice fine enough for the continuum resolution setting.
    pub fn continuum_wave(&self, channel: &str, energy: f64, j: u32) -> Result<RadialWavefunction> {
        let curve = self.system.channel(channel)?;
        if !(energy > 0.0) {
            return Err(Error::InvalidEnergy(energy));
        }
        let k_max = (2.0 * self.system.reduced_mass * (energy + curve.depth())).sqrt();
        let wanted = 2.0 * PI / k_max / self.system.settings.continuum_points_per_wavelength;
        let mut step = self.step;
        while step > wanted {
            step *= 0.5;
        }
        self.continuum_on(channel, energy, j, 0.0, step)
    }

    /// Continuum wave on an explicit lattice step, propagated at least to `r_needed`.
    pub(crate) fn continuum_on(
        &self,
        channel: &str,
        energy: f64,
        j: u32,
        r_needed: f64,
        step: f64,
    ) -> Result<RadialWavefunction> {
        let curve = self.system.channel(channel)?;
        if !(energy > 0.0) {
            return Err(Error::InvalidEnergy(energy));
        }
        if !curve.has_continuum() {
            return Err(Error::InvalidParameter(format!("channel `{channel}` has no continuum")));
        }
        let grid = self.grid(channel, j, step)?;
        let e = grid.asymptote + energy;
        let mu = grid.mu;
        let k = (2.0 * mu * energy).sqrt();
        let lambda = 2.0 * PI / k;
        let n_max = grid.veff.len() - 1;
        let r_end = r_needed.max(grid.asymptotic_radius + 3.0 * lambda);
        let end = (((r_end - grid.origin) / step).ceil() as usize).clamp(8, n_max);
        let start = grid.inner_start(e).min(end - 4);
        let y = grid.outward(e, start, end);
        let span = (end - start) as f64 * step;
        let sep = ((0.25 * lambda).min(0.25 * span) / step).round().max(1.0) as usize;
        let (i2, i1) = (end, end - sep);
        let (r1, r2) = (grid.r(i1), grid.r(i2));
        let (j1, n1) = riccati_bessel(j, k * r1);
        let (j2, n2) = riccati_bessel(j, k * r2);
        let (y1, y2) = (y[i1 - start], y[i2 - start]);
        // y = a·ĵ - b·n̂ at both points
        let det = -j1 * n2 + j2 * n1;
        let a = (-y1 * n2 + y2 * n1) / det;
        let b = (j1 * y2 - j2 * y1) / det;
        let amp = a.hypot(b);
        if !(amp.is_finite() && amp > 0.0) {
            return Err(Error::Convergence(format!("continuum normalization failed at E={energy:e}")));
        }
        let target = (2.0 * mu / (PI * k)).sqrt();
        let scale = target / amp;
        let mut phase = b.atan2(a);
        phase = phase.rem_euclid(PI);
        Ok(RadialWavefunction {
            kind: WaveKind::Continuum { channel: channel.to_string(), energy, j, phase_shift: phase },
            origin: grid.origin,
            start: start as i64,
            step,
            values: y.iter().map(|v| v * scale).collect(),
        })
    }
}

/// Riccati-Bessel functions ĵ_l(x) = x j_l(x) and n̂_l(x) = x y_l(x), so that
/// ĵ_l ~ sin(x - lπ/2) and n̂_l ~ -cos(x - lπ/2).
pub fn riccati_bessel(l: u32, x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    let (mut j0, mut n0) = (s, -c);
    if l == 0 {
        return (j0, n0);
    }
    let (mut j1, mut n1) = (s / x - c, -c / x - s);
    for m in 1..l {
        let f = (2 * m + 1) as f64 / x;
        let (j2, n2) = (f * j1 - j0, f * n1 - n0);
        j0 = j1;
        n0 = n1;
        j1 = j2;
        n1 = n2;
    }
    if x < 0.5 + l as f64 {
        // Upward recurrence loses ĵ to cancellation at small x; use the series.
        j1 = riccati_j_series(l, x);
    }
    (j1, n1)
}

fn riccati_j_series(l: u32, x: f64) -> f64 {
    let mut dfact = 1.0;
    for m in 0..=l {
        dfact *= (2 * m + 1) as f64;
    }
    let lead = x.powi(l as i32 + 1) / dfact;
    let mut term = 1.0;
    let mut sum = 1.0;
    let z = -0.5 * x * x;
    for k in 1..40 {
        term *= z / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

pub fn bound_levels(system: &MoleculeSystem, channel: &str, j: u32) -> Result<Vec<RovibLevel>> {
    Engine::new(system.clone())?.bound_levels(channel, j)
}

pub fn wavefunction(system: &MoleculeSystem, level: &RovibLevel) -> Result<RadialWavefunction> {
    Ok((*Engine::new(system.clone())?.wavefunction(level)?).clone())
}

pub fn continuum_wave(system: &MoleculeSystem, channel: &str, energy: f64, j: u32) -> Result<RadialWavefunction> {
    Engine::new(system.clone())?.continuum_wave(channel, energy, j)
}

/// Result of fitting near-threshold binding energies to E_b = A (v_D - v)^p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearDissociationFit {
    pub tail_power: u32,
    pub expected_exponent: f64,
    pub fitted_exponent: f64,
    pub v_dissociation: f64,
    /// R² of E_b^((n-2)/2n) against v.
    pub linear_r_squared: f64,
    pub power_law: bool,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// LeRoy-Bernstein check on the supplied outermost levels for an `n`-power tail.
pub fn near_dissociation_check(levels: &[RovibLevel], n: u32) -> Result<NearDissociationFit> {
    if levels.len() < 4 {
        return Err(Error::InsufficientLevels { needed: 4, got: levels.len() });
    }
    if n <= 2 {
        return Err(Error::InvalidParameter(format!("tail power {n} has no near-threshold law")));
    }
    let vs: Vec<f64> = levels.iter().map(|l| l.v as f64).collect();
    let eb: Vec<f64> = levels.iter().map(|l| l.binding_energy.max(f64::MIN_POSITIVE)).collect();
    let expected = 2.0 * n as f64 / (n as f64 - 2.0);
    let transformed: Vec<f64> = eb.iter().map(|e| e.powf(1.0 / expected)).collect();
    let (slope, icept, r2) = linear_fit(&vs, &transformed);
    // Log-log fit with v_D refined by golden section on the residual.
    let v_top = vs.iter().cloned().fold(f64::MIN, f64::max);
    let resid = |vd: f64| {
        let x: Vec<f64> = vs.iter().map(|v| (vd - v).ln()).collect();
        let y: Vec<f64> = eb.iter().map(|e| e.ln()).collect();
        let (p, c, _) = linear_fit(&x, &y);
        let ss: f64 = x.iter().zip(&y).map(|(a, b)| (b - (p * a + c)).powi(2)).sum();
        (ss, p)
    };
    let guess = if slope < 0.0 { -icept / slope } else { v_top + 1.0 };
    let (mut a, mut b) = (v_top + 1e-6, (guess.max(v_top + 1e-3)) * 2.0 - v_top + 5.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if resid(c).0 < resid(d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let vd = 0.5 * (a + b);
    let p = resid(vd).1;
    Ok(NearDissociationFit {
        tail_power: n,
        expected_exponent: expected,
        fitted_exponent: p,
        v_dissociation: vd,
        linear_r_squared: r2,
        power_law: r2 > 0.999 && (p / expected - 1.0).abs() < 0.02,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_morse;
    use approx::assert_relative_eq;

    #[test]
    fn riccati_bessel_asymptotics() {
        for l in 0..4u32 {
            let x = 2000.0;
            let (j, n) = riccati_bessel(l, x);
            let ph = x - l as f64 * PI / 2.0;
            assert!((j - ph.sin()).abs() < 0.02, "l={l} j={j} {}", ph.sin());
            assert!((n + ph.cos()).abs() < 0.02);
        }
        // series and recurrence agree in the overlap
        for l in 1..4u32 {
            let x = 0.5 + l as f64 + 0.01;
            let (j, _) = riccati_bessel(l, x);
            assert_relative_eq!(j, riccati_j_series(l, x), max_relative = 1e-10);
        }
    }

    #[test]
    fn selector_parsing() {
        assert_eq!("v=27".parse::<LevelSelector>().unwrap(), LevelSelector::FromBottom(27));
        assert_eq!("v=-3".parse::<LevelSelector>().unwrap(), LevelSelector::FromTop(-3));
        assert!("v=x".parse::<LevelSelector>().is_err());
    }

    #[test]
    fn morse_ground_level() {
        let mu = 1000.0;
        let (d, a, re) = (0.1, 1.0, 3.0);
        let g = make_morse(d, a, re, 0.0).unwrap();
        let sys = MoleculeSystem::new(mu, g, vec![], vec![]).unwrap();
        let levels = bound_levels(&sys, "morse", 0).unwrap();
        let we = a * (2.0 * d / mu).sqrt();
        let wx = we * we / (4.0 * d);
        let e0 = -d + 0.5 * we - 0.25 * wx;
        assert_relative_eq!(levels[0].energy, e0, max_relative = 1e-8);
    }
}
