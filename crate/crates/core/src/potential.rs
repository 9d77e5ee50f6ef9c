//! Adiabatic potential curves, R-dependent transition dipoles and the
//! molecule they describe.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CubicSpline;
use crate::units;

/// Powers allowed in the long-range expansion.
pub const TAIL_POWERS: [u32; 4] = [3, 5, 6, 8];

/// Largest tolerated jump between the interior spline and the tail, Hartree.
pub const TAIL_CONTINUITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Symmetry {
    Gerade,
    Ungerade,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailTerm {
    pub power: u32,
    /// C_n in Hartree a0^n.
    pub coefficient: f64,
}

fn tail_value(tail: &[TailTerm], r: f64) -> f64 {
    tail.iter().map(|t| t.coefficient / r.powi(t.power as i32)).sum()
}

/// How a curve is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveForm {
    /// Spline through samples (R, V - asymptote) up to `r_tail`, dispersion tail beyond.
    Tabulated { spline: CubicSpline, r_tail: f64, tail: Vec<TailTerm> },
    Morse { depth: f64, a: f64, r_e: f64 },
    /// Morse core blended into a dispersion tail over `[switch_start, switch_end]`.
    MorseLongRange { depth: f64, a: f64, r_e: f64, tail: Vec<TailTerm>, switch_start: f64, switch_end: f64 },
    /// Harmonic well; the curve's asymptote acts as an energy ceiling.
    Harmonic { force_constant: f64, r_e: f64, depth: f64 },
    Flat,
    HardWall { r_wall: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCurve {
    pub label: String,
    pub omega: u32,
    pub symmetry: Symmetry,
    /// Dissociation limit, Hartree.
    pub asymptote: f64,
    pub form: CurveForm,
    r_min_energy: f64,
    v_min: f64,
}

fn morse(depth: f64, a: f64, r_e: f64, r: f64) -> f64 {
    let x = 1.0 - (-a * (r - r_e)).exp();
    depth * x * x - depth
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

fn check_tail(tail: &[TailTerm]) -> Result<()> {
    for t in tail {
        if !TAIL_POWERS.contains(&t.power) {
            return Err(Error::Validation(format!("tail power C{} not in {:?}", t.power, TAIL_POWERS)));
        }
        if !t.coefficient.is_finite() {
            return Err(Error::Validation(format!("C{} is not finite", t.power)));
        }
    }
    Ok(())
}

impl PotentialCurve {
    fn build(label: &str, asymptote: f64, form: CurveForm) -> Self {
        let mut curve = Self {
            label: label.to_string(),
            omega: 0,
            symmetry: Symmetry::Gerade,
            asymptote,
            form,
            r_min_energy: 0.0,
            v_min: asymptote,
        };
        let (r, v) = curve.locate_minimum();
        curve.r_min_energy = r;
        curve.v_min = v;
        curve
    }

    pub fn with_symmetry(mut self, omega: u32, symmetry: Symmetry) -> Self {
        self.omega = omega;
        self.symmetry = symmetry;
        self
    }

    pub fn morse(label: &str, depth: f64, a: f64, r_e: f64, asymptote: f64) -> Result<Self> {
        if !(depth > 0.0 && a > 0.0 && r_e > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Morse parameters must be positive (D_e={depth}, a={a}, R_e={r_e})"
            )));
        }
        Ok(Self::build(label, asymptote, CurveForm::Morse { depth, a, r_e }))
    }

    /// Morse core joined to `-sum C_n/R^n` with a quintic switch on `[switch_start, switch_end]`.
    pub fn morse_long_range(
        label: &str,
        depth: f64,
        a: f64,
        r_e: f64,
        asymptote: f64,
        tail: Vec<TailTerm>,
        switch: (f64, f64),
    ) -> Result<Self> {
        if !(depth > 0.0 && a > 0.0 && r_e > 0.0) {
            return Err(Error::InvalidParameter("Morse parameters must be positive".into()));
        }
        if !(switch.0 > r_e && switch.1 > switch.0) {
            return Err(Error::InvalidParameter(format!(
                "switch window {:?} must lie beyond R_e = {r_e}",
                switch
            )));
        }
        check_tail(&tail)?;
        if tail.is_empty() {
            return Err(Error::Validation("long-range form needs at least one C_n".into()));
        }
        Ok(Self::build(
            label,
            asymptote,
            CurveForm::MorseLongRange { depth, a, r_e, tail, switch_start: switch.0, switch_end: switch.1 },
        ))
    }

    pub fn harmonic(label: &str, force_constant: f64, r_e: f64, minimum: f64, ceiling: f64) -> Result<Self> {
        if !(force_constant > 0.0 && r_e > 0.0 && ceiling > minimum) {
            return Err(Error::InvalidParameter("harmonic well needs k > 0, R_e > 0, ceiling above minimum".into()));
        }
        Ok(Self::build(label, ceiling, CurveForm::Harmonic { force_constant, r_e, depth: ceiling - minimum }))
    }

    pub fn flat(label: &str, asymptote: f64) -> Self {
        Self::build(label, asymptote, CurveForm::Flat)
    }

    pub fn hard_wall(label: &str, r_wall: f64, asymptote: f64) -> Result<Self> {
        if r_wall <= 0.0 {
            return Err(Error::InvalidParameter("wall radius must be positive".into()));
        }
        Ok(Self::build(label, asymptote, CurveForm::HardWall { r_wall }))
    }

    /// Tabulated curve. `samples` are (R in a0, V in Hartree, absolute). Tail
    /// coefficients given as `None` are fitted: one unknown is pinned by the
    /// last sample, two unknowns by the last two samples.
    pub fn tabulated(
        label: &str,
        asymptote: f64,
        samples: &[(f64, f64)],
        tail: &[(u32, Option<f64>)],
        r_tail: Option<f64>,
    ) -> Result<Self> {
        if samples.len() < 8 {
            return Err(Error::Validation(format!(
                "curve `{label}` has {} samples, need at least 8",
                samples.len()
            )));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::Validation(format!(
                "curve `{label}`: R not strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
        if samples[0].0 <= 0.0 {
            return Err(Error::Validation(format!("curve `{label}`: R must be positive")));
        }
        if tail.is_empty() {
            return Err(Error::Validation(format!("curve `{label}` has no long-range tail")));
        }
        let r_last = samples[samples.len() - 1].0;
        let r_tail = r_tail.unwrap_or(r_last);
        if !(r_tail > samples[0].0 && r_tail <= r_last) {
            return Err(Error::Validation(format!(
                "curve `{label}`: r_tail {r_tail} outside the sampled range"
            )));
        }
        // Interior points up to r_tail, relative to the asymptote.
        let inside: Vec<(f64, f64)> =
            samples.iter().filter(|s| s.0 <= r_tail).map(|&(r, v)| (r, v - asymptote)).collect();
        if inside.len() < 2 {
            return Err(Error::Validation(format!("curve `{label}`: too few samples below r_tail")));
        }
        let tail = fit_tail(label, tail, &inside)?;
        check_tail(&tail)?;
        let spline = CubicSpline::new(inside.iter().map(|s| s.0).collect(), inside.iter().map(|s| s.1).collect())?;
        let (r0, v0) = inside[0];
        let (r1, v1) = inside[1];
        if (v1 - v0) / (r1 - r0) >= 0.0 {
            return Err(Error::Validation(format!(
                "curve `{label}`: innermost samples are not repulsive"
            )));
        }
        let mismatch = (spline.eval(r_tail) + tail_value(&tail, r_tail)).abs();
        if mismatch > TAIL_CONTINUITY_TOL {
            return Err(Error::Validation(format!(
                "curve `{label}`: tail mismatch {mismatch:e} Hartree at r_tail = {r_tail}"
            )));
        }
        let below: Vec<f64> = inside.iter().map(|s| s.1).collect();
        let minima = below
            .windows(3)
            .filter(|w| w[1] < w[0] && w[1] <= w[2] && w[1] < 0.0)
            .count();
        if minima > 1 {
            return Err(Error::Validation(format!("curve `{label}` has {minima} wells below its asymptote")));
        }
        Ok(Self::build(label, asymptote, CurveForm::Tabulated { spline, r_tail, tail }))
    }

    /// V(R) in Hartree, R in a0.
    pub fn evaluate(&self, r: f64) -> f64 {
        self.asymptote + self.relative(r)
    }

    fn relative(&self, r: f64) -> f64 {
        match &self.form {
            CurveForm::Tabulated { spline, r_tail, tail } => {
                if r > *r_tail {
                    -tail_value(tail, r)
                } else if r < spline.x_min() {
                    let (x, y) = (spline.xs(), spline.ys());
                    y[0] + (r - x[0]) * (y[1] - y[0]) / (x[1] - x[0])
                } else {
                    spline.eval(r)
                }
            }
            CurveForm::Morse { depth, a, r_e } => morse(*depth, *a, *r_e, r),
            CurveForm::MorseLongRange { depth, a, r_e, tail, switch_start, switch_end } => {
                if r <= *switch_start {
                    morse(*depth, *a, *r_e, r)
                } else if r >= *switch_end {
                    -tail_value(tail, r)
                } else {
                    let s = smoothstep((r - switch_start) / (switch_end - switch_start));
                    (1.0 - s) * morse(*depth, *a, *r_e, r) - s * tail_value(tail, r)
                }
            }
            CurveForm::Harmonic { force_constant, r_e, depth } => {
                0.5 * force_constant * (r - r_e) * (r - r_e) - depth
            }
            CurveForm::Flat => 0.0,
            CurveForm::HardWall { r_wall } => {
                if r < *r_wall {
                    1e3
                } else {
                    0.0
                }
            }
        }
    }

    pub fn tail(&self) -> &[TailTerm] {
        match &self.form {
            CurveForm::Tabulated { tail, .. } | CurveForm::MorseLongRange { tail, .. } => tail,
            _ => &[],
        }
    }

    pub fn samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.form {
            CurveForm::Tabulated { spline, .. } => Some((spline.xs(), spline.ys())),
            _ => None,
        }
    }

    /// Position and value of the global minimum.
    pub fn minimum(&self) -> (f64, f64) {
        (self.r_min_energy, self.v_min)
    }

    /// asymptote - V_min; zero for curves without a well.
    pub fn depth(&self) -> f64 {
        (self.asymptote - self.v_min).max(0.0)
    }

    pub fn supports_bound_states(&self) -> bool {
        self.depth() > 0.0
    }

    /// Harmonic wells have no continuum above their ceiling.
    pub fn has_continuum(&self) -> bool {
        !matches!(self.form, CurveForm::Harmonic { .. })
    }

    pub fn hard_wall_radius(&self) -> Option<f64> {
        match self.form {
            CurveForm::HardWall { r_wall } => Some(r_wall),
            _ => None,
        }
    }

    /// Radius beyond which the curve is in its long-range form.
    pub fn asymptotic_radius(&self) -> f64 {
        match &self.form {
            CurveForm::Tabulated { r_tail, .. } => *r_tail,
            CurveForm::Morse { a, r_e, .. } => r_e + (2e9f64).ln() / a,
            CurveForm::MorseLongRange { switch_end, .. } => *switch_end,
            CurveForm::Harmonic { r_e, .. } => *r_e,
            CurveForm::Flat => 0.0,
            CurveForm::HardWall { r_wall } => *r_wall,
        }
    }

    fn locate_minimum(&self) -> (f64, f64) {
        let (lo, hi) = match &self.form {
            CurveForm::Morse { depth, r_e, .. } => return (*r_e, self.asymptote - depth),
            CurveForm::Harmonic { r_e, depth, .. } => return (*r_e, self.asymptote - depth),
            CurveForm::Flat | CurveForm::HardWall { .. } => return (f64::INFINITY, self.asymptote),
            CurveForm::Tabulated { spline, r_tail, .. } => (spline.x_min(), *r_tail),
            CurveForm::MorseLongRange { r_e, switch_end, .. } => (0.5 * r_e, 2.0 * switch_end),
        };
        let n = 4000;
        let step = (hi - lo) / n as f64;
        let (mut best_r, mut best_v) = (lo, self.evaluate(lo));
        for i in 1..=n {
            let r = lo + step * i as f64;
            let v = self.evaluate(r);
            if v < best_v {
                best_r = r;
                best_v = v;
            }
        }
        // Golden-section polish.
        let (mut a, mut b) = ((best_r - step).max(lo), (best_r + step).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.evaluate(c) < self.evaluate(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let r = 0.5 * (a + b);
        let v = self.evaluate(r);
        if v < best_v {
            (r, v)
        } else {
            (best_r, best_v)
        }
    }
}

fn fit_tail(label: &str, tail: &[(u32, Option<f64>)], inside: &[(f64, f64)]) -> Result<Vec<TailTerm>> {
    let known: Vec<TailTerm> =
        tail.iter().filter_map(|&(n, c)| c.map(|c| TailTerm { power: n, coefficient: c })).collect();
    let unknown: Vec<u32> = tail.iter().filter(|t| t.1.is_none()).map(|t| t.0).collect();
    let mut out = known.clone();
    let residual = |r: f64, v: f64| -v - tail_value(&known, r);
    let k = inside.len();
    match unknown.as_slice() {
        [] => {}
        [n] => {
            let (r, v) = inside[k - 1];
            out.push(TailTerm { power: *n, coefficient: residual(r, v) * r.powi(*n as i32) });
        }
        [n, m] => {
            let (r1, v1) = inside[k - 2];
            let (r2, v2) = inside[k - 1];
            let (a11, a12) = (r1.powi(-(*n as i32)), r1.powi(-(*m as i32)));
            let (a21, a22) = (r2.powi(-(*n as i32)), r2.powi(-(*m as i32)));
            let (b1, b2) = (residual(r1, v1), residual(r2, v2));
            let det = a11 * a22 - a12 * a21;
            if det == 0.0 {
                return Err(Error::Validation(format!("curve `{label}`: singular two-point tail fit")));
            }
            out.push(TailTerm { power: *n, coefficient: (b1 * a22 - b2 * a12) / det });
            out.push(TailTerm { power: *m, coefficient: (a11 * b2 - a21 * b1) / det });
        }
        _ => {
            return Err(Error::Validation(format!(
                "curve `{label}`: at most two tail coefficients can be fitted"
            )))
        }
    }
    out.sort_by_key(|t| t.power);
    Ok(out)
}

/// Analytic Morse curve, label "morse".
pub fn make_morse(depth: f64, a: f64, r_e: f64, asymptote: f64) -> Result<PotentialCurve> {
    PotentialCurve::morse("morse", depth, a, r_e, asymptote)
}

/// Maximum relative deviation of the last tabulated dipole from its asymptote.
pub const DIPOLE_ASYMPTOTE_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct DipoleFunction {
    /// Excited channel.
    pub bra: String,
    /// Ground channel.
    pub ket: String,
    spline: CubicSpline,
    /// Asymptotic atomic dipole, e a0.
    pub d_infinity: f64,
}

impl DipoleFunction {
    pub fn tabulated(bra: &str, ket: &str, samples: &[(f64, f64)], d_infinity: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Validation(format!("dipole {bra}-{ket} needs at least two samples")));
        }
        let spline = CubicSpline::new(samples.iter().map(|s| s.0).collect(), samples.iter().map(|s| s.1).collect())
            .map_err(|e| Error::Validation(format!("dipole {bra}-{ket}: {e}")))?;
        let last = samples[samples.len() - 1].1;
        let scale = if d_infinity != 0.0 {
            d_infinity.abs()
        } else {
            samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
        };
        if (last - d_infinity).abs() > DIPOLE_ASYMPTOTE_TOL * scale {
            return Err(Error::Validation(format!(
                "dipole {bra}-{ket}: last sample {last} is not within 5% of d_infinity {d_infinity}"
            )));
        }
        Ok(Self { bra: bra.to_string(), ket: ket.to_string(), spline, d_infinity })
    }

    pub fn constant(bra: &str, ket: &str, d: f64) -> Self {
        Self::tabulated(bra, ket, &[(0.5, d), (1.0, d)], d).expect("constant table is valid")
    }

    /// `d_infinity + (d_short - d_infinity) / (1 + exp((R - r_switch)/width))`, tabulated.
    pub fn switched(bra: &str, ket: &str, d_short: f64, d_infinity: f64, r_switch: f64, width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::InvalidParameter("dipole switch width must be positive".into()));
        }
        let r_end = r_switch + 40.0 * width;
        let n = (((r_end - 2.0) / 0.05).ceil() as usize).max(8);
        let step = (r_end - 2.0) / n as f64;
        let samples: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let r = 2.0 + step * i as f64;
                (r, d_infinity + (d_short - d_infinity) / (1.0 + ((r - r_switch) / width).exp()))
            })
            .collect();
        Self::tabulated(bra, ket, &samples, d_infinity)
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        if r > self.spline.x_max() {
            self.d_infinity
        } else if r < self.spline.x_min() {
            self.spline.ys()[0]
        } else {
            self.spline.eval(r)
        }
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (self.spline.xs(), self.spline.ys())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let ys: Vec<f64> = self.spline.ys().iter().map(|y| y * factor).collect();
        Self {
            bra: self.bra.clone(),
            ket: self.ket.clone(),
            spline: CubicSpline::new(self.spline.xs().to_vec(), ys).expect("same abscissae"),
            d_infinity: self.d_infinity * factor,
        }
    }
}

/// Free functions for symmetry with the curve evaluators.
pub fn evaluate_potential(curve: &PotentialCurve, r: f64) -> f64 {
    curve.evaluate(r)
}

pub fn evaluate_dipole(d: &DipoleFunction, r: f64) -> f64 {
    d.evaluate(r)
}

/// Discretization and box settings shared by every solver on a system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Grid points per local de Broglie wavelength at the deepest well minimum.
    pub points_per_wavelength: f64,
    /// Outer box radius for near-threshold states, a0. `None` picks one from the tails.
    pub r_max: Option<f64>,
    /// Points per wavelength for continuum waves at their highest local momentum.
    pub continuum_points_per_wavelength: f64,
    /// Fixed grid step, a0. Overrides the wavelength rule; set when comparing
    /// solves that must share one lattice (e.g. perturbed masses).
    pub grid_step: Option<f64>,
    /// Extrapolate level energies from steps h and h/2.
    pub richardson: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            points_per_wavelength: 40.0,
            r_max: None,
            continuum_points_per_wavelength: 40.0,
            grid_step: None,
            richardson: true,
        }
    }
}

/// Mass of 88Sr in amu.
pub const SR88_MASS_AMU: f64 = 87.905_612_5;

/// Default reduced mass of 88Sr2, electron masses.
pub fn sr88_dimer_reduced_mass() -> f64 {
    units::amu_to_me(SR88_MASS_AMU / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSystem {
    /// Reduced mass in electron masses.
    pub reduced_mass: f64,
    pub ground: PotentialCurve,
    pub excited: Vec<PotentialCurve>,
    pub dipoles: Vec<DipoleFunction>,
    pub settings: SolverSettings,
}

impl MoleculeSystem {
    pub fn new(
        reduced_mass: f64,
        ground: PotentialCurve,
        excited: Vec<PotentialCurve>,
        dipoles: Vec<DipoleFunction>,
    ) -> Result<Self> {
        let sys = Self { reduced_mass, ground, excited, dipoles, settings: SolverSettings::default() };
        sys.validate()?;
        Ok(sys)
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_reduced_mass(&self, reduced_mass: f64) -> Self {
        let mut s = self.clone();
        s.reduced_mass = reduced_mass;
        s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reduced_mass > 0.0 && self.reduced_mass.is_finite()) {
            return Err(Error::Validation(format!("reduced mass must be positive, got {}", self.reduced_mass)));
        }
        let mut labels = vec![self.ground.label.as_str()];
        for c in &self.excited {
            if labels.contains(&c.label.as_str()) {
                return Err(Error::Validation(format!("duplicate channel `{}`", c.label)));
            }
            labels.push(&c.label);
        }
        for d in &self.dipoles {
            if d.ket != self.ground.label {
                return Err(Error::Validation(format!(
                    "dipole {}-{} does not end on the ground channel `{}`",
                    d.bra, d.ket, self.ground.label
                )));
            }
            if !self.excited.iter().any(|c| c.label == d.bra) {
                return Err(Error::Validation(format!("dipole references unknown channel `{}`", d.bra)));
            }
        }
        if self.settings.points_per_wavelength < 8.0 {
            return Err(Error::Validation("points_per_wavelength must be at least 8".into()));
        }
        Ok(())
    }

    pub fn channel(&self, label: &str) -> Result<&PotentialCurve> {
        if self.ground.label == label {
            return Ok(&self.ground);
        }
        self.excited
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::UnknownChannel(label.to_string()))
    }

    pub fn channels(&self) -> impl Iterator<Item = &PotentialCurve> {
        std::iter::once(&self.ground).chain(self.excited.iter())
    }

    pub fn is_ground(&self, label: &str) -> bool {
        self.ground.label == label
    }

    pub fn dipole(&self, excited: &str) -> Result<&DipoleFunction> {
        self.dipoles.iter().find(|d| d.bra == excited).ok_or_else(|| Error::MissingDipole {
            excited: excited.to_string(),
            ground: self.ground.label.clone(),
        })
    }

    /// Uniform grid step shared by every channel so wavefunctions from
    /// different curves sit on a common lattice.
    pub fn grid_step(&self) -> f64 {
        if let Some(h) = self.settings.grid_step {
            return h;
        }
        let lambda_min = self
            .channels()
            .filter(|c| c.supports_bound_states())
            .map(|c| {
                let k = (2.0 * self.reduced_mass * c.depth()).sqrt();
                2.0 * std::f64::consts::PI / k
            })
            .fold(f64::INFINITY, f64::min);
        if lambda_min.is_finite() {
            lambda_min / self.settings.points_per_wavelength
        } else {
            // No well anywhere: resolve a wave at 1% of a Hartree.
            2.0 * std::f64::consts::PI / (0.02 * self.reduced_mass).sqrt() / self.settings.points_per_wavelength
        }
    }

    /// Outer box radius.
    pub fn r_cap(&self) -> f64 {
        if let Some(r) = self.settings.r_max {
            return r;
        }
        self.channels()
            .map(|c| {
                let tail = c.tail();
                if tail.is_empty() {
                    c.asymptotic_radius() + 40.0
                } else {
                    // Where the dispersion tail falls below 1e-12 Hartree.
                    tail.iter()
                        .map(|t| (t.coefficient.abs() / 1e-12).powf(1.0 / t.power as f64))
                        .fold(c.asymptotic_radius(), f64::max)
                }
            })
            .fold(50.0, f64::max)
            .min(5000.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c6_table(c6: f64) -> Vec<(f64, f64)> {
        // Repulsive wall + C6 attraction, exactly -C6/R^6 beyond R = 12.
        (0..40)
            .map(|i| {
                let r = 5.0 + 0.25 * i as f64;
                let wall = if r < 12.0 { 1e4 * (-(r - 5.0) * 1.5).exp() * (12.0 - r).powi(4) / 2401.0 } else { 0.0 };
                (r, wall - c6 / r.powi(6))
            })
            .collect()
    }

    #[test]
    fn morse_minimum_and_limit() {
        let c = make_morse(0.01, 0.9, 7.0, 0.2).unwrap();
        assert_relative_eq!(c.evaluate(7.0), 0.2 - 0.01, max_relative = 1e-15);
        assert_relative_eq!(c.evaluate(1e4), 0.2, max_relative = 1e-15);
    }

    #[test]
    fn morse_three_quarter_point() {
        let (d, a, re) = (0.004, 0.6, 8.8);
        let c = make_morse(d, a, re, 0.0).unwrap();
        let v = c.evaluate(re + 2f64.ln() / a);
        assert_relative_eq!(v, -0.75 * d, max_relative = 1e-13);
    }

    #[test]
    fn morse_rejects_bad_parameters() {
        assert!(matches!(make_morse(0.0, 1.0, 1.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(make_morse(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(make_morse(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tail_formula_far_out() {
        let c6 = 3000.0;
        let t = c6_table(c6);
        let curve = PotentialCurve::tabulated("X", 0.0, &t, &[(6, Some(c6))], None).unwrap();
        let r = 10.0 * curve.asymptotic_radius();
        assert_relative_eq!(curve.evaluate(r), -c6 / r.powi(6), max_relative = 1e-12);
    }

    #[test]
    fn auto_c6_matches_hand_fit() {
        let c6 = 2500.0;
        let t = c6_table(c6);
        let curve = PotentialCurve::tabulated("X", 0.0, &t, &[(6, None)], None).unwrap();
        let n = t.len();
        // Hand fit from each of the last two points.
        let hand_a = -t[n - 1].1 * t[n - 1].0.powi(6);
        let hand_b = -t[n - 2].1 * t[n - 2].0.powi(6);
        assert_relative_eq!(hand_a, hand_b, max_relative = 1e-12);
        assert_relative_eq!(curve.tail()[0].coefficient, hand_a, max_relative = 1e-12);
    }

    #[test]
    fn two_auto_coefficients_solve_two_point_system() {
        let (c6, c8) = (2500.0, 2.0e5);
        let t: Vec<(f64, f64)> = c6_table(0.0)
            .into_iter()
            .map(|(r, v)| (r, v - c6 / r.powi(6) - c8 / r.powi(8)))
            .collect();
        let curve = PotentialCurve::tabulated("X", 0.0, &t, &[(6, None), (8, None)], None).unwrap();
        assert_relative_eq!(curve.tail()[0].coefficient, c6, max_relative = 1e-8);
        assert_relative_eq!(curve.tail()[1].coefficient, c8, max_relative = 1e-6);
    }

    #[test]
    fn rejects_decreasing_r() {
        let mut t = c6_table(1000.0);
        t.swap(3, 4);
        assert!(matches!(
            PotentialCurve::tabulated("X", 0.0, &t, &[(6, None)], None),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn rejects_tail_mismatch_and_bad_power() {
        let t = c6_table(1000.0);
        assert!(PotentialCurve::tabulated("X", 0.0, &t, &[(6, Some(1500.0))], None).is_err());
        assert!(PotentialCurve::tabulated("X", 0.0, &t, &[(4, None)], None).is_err());
        assert!(PotentialCurve::tabulated("X", 0.0, &t, &[], None).is_err());
    }

    #[test]
    fn tail_continuity() {
        let curve = PotentialCurve::tabulated("X", 0.0, &c6_table(1800.0), &[(6, None)], None).unwrap();
        let rt = curve.asymptotic_radius();
        let jump = (curve.evaluate(rt - 1e-12) - curve.evaluate(rt + 1e-12)).abs();
        assert!(jump < TAIL_CONTINUITY_TOL);
    }

    #[test]
    fn inner_wall_is_linear() {
        let t = c6_table(1000.0);
        let curve = PotentialCurve::tabulated("X", 0.0, &t, &[(6, None)], None).unwrap();
        let slope = (t[1].1 - t[0].1) / (t[1].0 - t[0].0);
        assert_relative_eq!(curve.evaluate(4.0), t[0].1 + slope * (4.0 - 5.0), max_relative = 1e-12);
    }

    #[test]
    fn spline_fourth_order_convergence() {
        // Smooth test curve sampled at two resolutions; midpoint error drops by >= 8x.
        let f = |r: f64| (0.7 * r).sin() * (-0.05 * r).exp() - 2.0 / r.powi(6);
        let err = |step: f64| {
            let n = (8.0 / step) as usize;
            let t: Vec<(f64, f64)> = (0..=n).map(|i| 4.0 + step * i as f64).map(|r| (r, f(r))).collect();
            let s = CubicSpline::new(t.iter().map(|p| p.0).collect(), t.iter().map(|p| p.1).collect()).unwrap();
            // interior midpoints, away from natural-boundary effects
            (n / 4..3 * n / 4)
                .map(|i| {
                    let r = 4.0 + step * (i as f64 + 0.5);
                    (s.eval(r) - f(r)).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.2), err(0.1));
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn dipole_limits() {
        let d = DipoleFunction::tabulated("0u+", "X", &[(4.0, 0.3), (6.0, 0.25), (10.0, 0.2), (20.0, 0.151)], 0.151)
            .unwrap();
        assert_eq!(d.evaluate(50.0), 0.151);
        assert_eq!(d.evaluate(1.0), 0.3);
        assert_relative_eq!(d.evaluate(6.0), 0.25, max_relative = 1e-12);
        let c = DipoleFunction::constant("a", "b", 0.7);
        for r in [0.1, 1.0, 7.0, 1e3] {
            assert_eq!(c.evaluate(r), 0.7);
        }
    }

    #[test]
    fn dipole_rejects_far_asymptote() {
        assert!(DipoleFunction::tabulated("a", "b", &[(4.0, 0.3), (20.0, 0.2)], 0.151).is_err());
    }

    #[test]
    fn system_validation() {
        let g = make_morse(0.01, 1.0, 5.0, 0.0).unwrap();
        let e = PotentialCurve::morse("A", 0.02, 1.0, 5.0, 0.1).unwrap();
        let ok = MoleculeSystem::new(1000.0, g.clone(), vec![e.clone()], vec![DipoleFunction::constant("A", "morse", 1.0)]);
        assert!(ok.is_ok());
        let dangling =
            MoleculeSystem::new(1000.0, g.clone(), vec![e.clone()], vec![DipoleFunction::constant("B", "morse", 1.0)]);
        assert!(matches!(dangling, Err(Error::Validation(_))));
        assert!(MoleculeSystem::new(-1.0, g, vec![e], vec![]).is_err());
    }

    #[test]
    fn sr_dimer_mass() {
        assert_relative_eq!(sr88_dimer_reduced_mass(), 43.952_806_25 * 1822.888_486, max_relative = 1e-12);
    }
}
