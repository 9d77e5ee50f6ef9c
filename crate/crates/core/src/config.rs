//! Reader for the molecule description format.
//!
//! ```text
//! [system]
//! reduced_mass_amu = 43.952806
//! ground = X              # defaults to the first curve
//! r_max_a0 = 400          # optional box cap
//! points_per_wavelength = 40
//!
//! [curve.X]
//! omega = 0
//! symmetry = g
//! asymptote_cm1 = 0
//! r_tail = 20
//! C6 = auto
//! 5.0   2500.0            # R (a0)  V (cm^-1)
//! ...
//!
//! [dipole.A.X]
//! d_infinity_ea0 = 0.12
//! table = dipole.dat
//! ```
//!
//! Curves may instead give `form = morse | morse_lr | harmonic | flat | hard_wall`
//! with the matching parameters; dipoles may give `form = constant | switched`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::potential::{DipoleFunction, MoleculeSystem, PotentialCurve, SolverSettings, Symmetry, TailTerm};
use crate::units::{amu_to_me, cm1_to_hartree};

#[derive(Debug, Default)]
struct Section {
    name: String,
    line: usize,
    keys: BTreeMap<String, (usize, String)>,
    rows: Vec<(usize, f64, f64)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&(usize, String)> {
        self.keys.get(key)
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                line: *line,
                message: format!("`{key}` expects a number, got `{v}`"),
            }),
        }
    }

    fn req(&self, key: &str) -> Result<f64> {
        self.num(key)?.ok_or_else(|| {
            Error::Validation(format!("section [{}] (line {}) is missing `{key}`", self.name, self.line))
        })
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim()
}

fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line: line_no, message: "unterminated section header".into() })?
                .trim();
            if name.is_empty() {
                return Err(Error::Parse { line: line_no, message: "empty section name".into() });
            }
            sections.push(Section { name: name.to_string(), line: line_no, ..Default::default() });
            continue;
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| Error::Parse { line: line_no, message: "content before first section".into() })?;
        if let Some((k, v)) = line.split_once('=') {
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse { line: line_no, message: "empty key".into() });
            }
            if section.keys.insert(key.clone(), (line_no, v.trim().to_string())).is_some() {
                return Err(Error::Parse { line: line_no, message: format!("duplicate key `{key}`") });
            }
        } else {
            section.rows.push(parse_row(line, line_no)?);
        }
    }
    Ok(sections)
}

fn parse_row(line: &str, line_no: usize) -> Result<(usize, f64, f64)> {
    let tokens: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
    if tokens.len() != 2 {
        return Err(Error::Parse { line: line_no, message: format!("expected two columns, got `{line}`") });
    }
    let parse = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| Error::Parse { line: line_no, message: format!("`{t}` is not a number") })
    };
    Ok((line_no, parse(tokens[0])?, parse(tokens[1])?))
}

fn read_table(base: Option<&Path>, file: &str) -> Result<Vec<(usize, f64, f64)>> {
    let path = match base {
        Some(dir) => dir.join(file),
        None => PathBuf::from(file),
    };
    let text = std::fs::read_to_string(&path)?;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if !line.is_empty() {
            rows.push(parse_row(line, idx + 1)?);
        }
    }
    Ok(rows)
}

fn table_rows(section: &Section, base: Option<&Path>) -> Result<Vec<(f64, f64)>> {
    let rows = match section.get("table") {
        Some((line, file)) => {
            if !section.rows.is_empty() {
                return Err(Error::Parse { line: *line, message: "both inline rows and `table =` given".into() });
            }
            read_table(base, file)?
        }
        None => section.rows.clone(),
    };
    Ok(rows.into_iter().map(|(_, a, b)| (a, b)).collect())
}

fn parse_curve(label: &str, s: &Section, base: Option<&Path>) -> Result<PotentialCurve> {
    if label.contains('.') {
        return Err(Error::Parse { line: s.line, message: format!("channel label `{label}` may not contain '.'") });
    }
    let omega = s.num("omega")?.unwrap_or(0.0);
    if omega < 0.0 || omega.fract() != 0.0 {
        return Err(Error::Validation(format!("curve `{label}`: omega must be a non-negative integer")));
    }
    let symmetry = match s.get("symmetry").map(|(_, v)| v.as_str()) {
        None | Some("g") | Some("gerade") => Symmetry::Gerade,
        Some("u") | Some("ungerade") => Symmetry::Ungerade,
        Some(other) => {
            return Err(Error::Parse {
                line: s.get("symmetry").unwrap().0,
                message: format!("unknown symmetry `{other}`"),
            })
        }
    };
    let asymptote = cm1_to_hartree(s.num("asymptote_cm1")?.unwrap_or(0.0));

    let mut tail: Vec<(u32, Option<f64>)> = Vec::new();
    for (key, (line, value)) in &s.keys {
        let Some(n) = key.strip_prefix('C').and_then(|n| n.parse::<u32>().ok()) else { continue };
        let coef = if value == "auto" {
            None
        } else {
            Some(value.parse::<f64>().map_err(|_| Error::Parse {
                line: *line,
                message: format!("`{key}` expects a number or `auto`"),
            })?)
        };
        tail.push((n, coef));
    }
    tail.sort_by_key(|t| t.0);

    let form = s.get("form").map(|(_, v)| v.as_str()).unwrap_or("table");
    let curve = match form {
        "table" => {
            let samples: Vec<(f64, f64)> = table_rows(s, base)?
                .into_iter()
                .map(|(r, v)| (r, asymptote + cm1_to_hartree(v)))
                .collect();
            PotentialCurve::tabulated(label, asymptote, &samples, &tail, s.num("r_tail")?)?
        }
        "morse" | "morse_lr" => {
            let depth = cm1_to_hartree(s.req("depth_cm1")?);
            let a = s.req("a_inv_a0")?;
            let r_e = s.req("r_e_a0")?;
            if form == "morse" {
                PotentialCurve::morse(label, depth, a, r_e, asymptote)?
            } else {
                let fixed = tail
                    .iter()
                    .map(|&(n, c)| {
                        c.map(|c| TailTerm { power: n, coefficient: c }).ok_or_else(|| {
                            Error::Validation(format!("curve `{label}`: `auto` tails need tabulated data"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let switch = (s.req("switch_start_a0")?, s.req("switch_end_a0")?);
                PotentialCurve::morse_long_range(label, depth, a, r_e, asymptote, fixed, switch)?
            }
        }
        "harmonic" => {
            let depth = cm1_to_hartree(s.req("depth_cm1")?);
            let k = s.req("force_constant_au")?;
            PotentialCurve::harmonic(label, k, s.req("r_e_a0")?, asymptote - depth, asymptote)?
        }
        "flat" => PotentialCurve::flat(label, asymptote),
        "hard_wall" => PotentialCurve::hard_wall(label, s.req("r_wall_a0")?, asymptote)?,
        other => {
            return Err(Error::Parse { line: s.get("form").unwrap().0, message: format!("unknown curve form `{other}`") })
        }
    };
    Ok(curve.with_symmetry(omega as u32, symmetry))
}

fn parse_dipole(bra: &str, ket: &str, s: &Section, base: Option<&Path>) -> Result<DipoleFunction> {
    let d_inf = s.req("d_infinity_ea0")?;
    match s.get("form").map(|(_, v)| v.as_str()).unwrap_or("table") {
        "table" => DipoleFunction::tabulated(bra, ket, &table_rows(s, base)?, d_inf),
        "constant" => Ok(DipoleFunction::constant(bra, ket, d_inf)),
        "switched" => DipoleFunction::switched(
            bra,
            ket,
            s.req("d_short_ea0")?,
            d_inf,
            s.req("r_switch_a0")?,
            s.req("width_a0")?,
        ),
        other => Err(Error::Parse { line: s.get("form").unwrap().0, message: format!("unknown dipole form `{other}`") }),
    }
}

/// Parses a description held in memory. Relative `table =` paths resolve against `base`.
pub fn parse_system(text: &str, base: Option<&Path>) -> Result<MoleculeSystem> {
    let sections = parse_sections(text)?;
    let mut system_section: Option<&Section> = None;
    let mut curves: Vec<PotentialCurve> = Vec::new();
    let mut dipole_sections: Vec<(&str, &str, &Section)> = Vec::new();
    for s in &sections {
        if s.name == "system" {
            if system_section.replace(s).is_some() {
                return Err(Error::Parse { line: s.line, message: "duplicate [system] section".into() });
            }
        } else if let Some(label) = s.name.strip_prefix("curve.") {
            curves.push(parse_curve(label, s, base)?);
        } else if let Some(pair) = s.name.strip_prefix("dipole.") {
            let (bra, ket) = pair.split_once('.').ok_or_else(|| Error::Parse {
                line: s.line,
                message: format!("dipole section needs two channels, got [{}]", s.name),
            })?;
            dipole_sections.push((bra, ket, s));
        } else {
            return Err(Error::Parse { line: s.line, message: format!("unknown section [{}]", s.name) });
        }
    }
    let sys = system_section.ok_or_else(|| Error::Validation("missing [system] section".into()))?;
    if curves.is_empty() {
        return Err(Error::Validation("no [curve.*] sections".into()));
    }
    let ground_label = match sys.get("ground") {
        Some((_, g)) => g.clone(),
        None => curves[0].label.clone(),
    };
    let gi = curves
        .iter()
        .position(|c| c.label == ground_label)
        .ok_or_else(|| Error::Validation(format!("ground channel `{ground_label}` is not defined")))?;
    let ground = curves.remove(gi);
    let dipoles = dipole_sections
        .into_iter()
        .map(|(bra, ket, s)| parse_dipole(bra, ket, s, base))
        .collect::<Result<Vec<_>>>()?;

    let mut settings = SolverSettings::default();
    if let Some(p) = sys.num("points_per_wavelength")? {
        settings.points_per_wavelength = p;
    }
    if let Some(p) = sys.num("continuum_points_per_wavelength")? {
        settings.continuum_points_per_wavelength = p;
    }
    settings.r_max = sys.num("r_max_a0")?;

    let mass = amu_to_me(sys.req("reduced_mass_amu")?);
    let system = MoleculeSystem::new(mass, ground, curves, dipoles)?.with_settings(settings);
    system.validate()?;
    Ok(system)
}

pub fn load_system(path: impl AsRef<Path>) -> Result<MoleculeSystem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_system(&text, path.parent())
}
