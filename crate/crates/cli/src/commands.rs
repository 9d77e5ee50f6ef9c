use num_complex::Complex64;
use rovib::decay::linewidth_map;
use rovib::metrology::{
    channel_sensitivities, find_magic_levels, interval_from_reports, precision_budget, select_from_reports,
    MagicSettings,
};
use rovib::radial::{Engine, LevelSelector, RovibLevel};
use rovib::response::{level_responses, Polarization, WidthPolicy};
use rovib::transitions::{rank_intermediates, reduced_dipole};
use rovib::units::{hartree_to_cm1, CONSTANTS};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::{Cell, Output, Table};
use crate::{Command, Widths};

fn engine(config: &std::path::Path) -> CliResult<Engine> {
    Ok(Engine::new(rovib::load_system(config)?)?)
}

fn widths(w: Widths) -> WidthPolicy {
    match w {
        Widths::Zero => WidthPolicy::Zero,
        Widths::Decay => WidthPolicy::FromDecay,
    }
}

fn ground_level(e: &Engine, j: u32, sel: LevelSelector) -> CliResult<RovibLevel> {
    let g = e.system().ground.label.clone();
    Ok(e.level(&g, j, sel)?)
}

pub fn run(cmd: &Command) -> CliResult<Output> {
    match cmd {
        Command::Levels { config, channel, j, from_top } => levels(&engine(&config.config)?, channel, *j, *from_top),
        Command::Tdm { config, channel, jp, j, excited, ground } => {
            tdm(&engine(&config.config)?, channel, *jp, *j, *excited, *ground)
        }
        Command::Raman { config, initial, final_level, channel, rank, top } => {
            raman(&engine(&config.config)?, *initial, *final_level, channel.as_deref(), *rank, *top)
        }
        Command::Polar { config, levels, j, window, step, widths: w, m, eps } => {
            polar(&engine(&config.config)?, &levels.0, *j, *window, *step, widths(*w), Polarization { m: *m, eps: *eps })
        }
        Command::Linewidths { config, channel, jp } => linewidths(&engine(&config.config)?, channel, *jp),
        Command::Magic { config, a, b, j, window, step, exclusion, widths: w } => {
            let settings = MagicSettings { step: *step, exclusion: *exclusion, ..MagicSettings::default() };
            magic(&engine(&config.config)?, *a, *b, *j, *window, widths(*w), &settings)
        }
        Command::Sensitivity { config, channel, j, pair, rel_step } => {
            sensitivity(&engine(&config.config)?, channel.as_deref(), *j, pair.as_ref().map(|p| p.0.as_slice()), *rel_step)
        }
        Command::Budget { linewidth_hz, snr, nu_hz, nu_cm1 } => {
            let nu = nu_hz.or(nu_cm1.map(|x| x * CONSTANTS.c * 100.0)).ok_or_else(|| {
                CliError::Usage("give --nu-hz or --nu-cm1".into())
            })?;
            budget(*linewidth_hz, *snr, nu)
        }
        Command::Replay { .. } => Err(CliError::Usage("replay is resolved before execution".into())),
    }
}

fn levels(e: &Engine, channel: &str, j: u32, from_top: bool) -> CliResult<Output> {
    let levels = e.bound_levels(channel, j)?;
    let mut t = Table::new(["channel", "v", "J", "energy_cm1", "binding_cm1"]);
    for l in &levels {
        let v: Cell = if from_top { l.v_from_top.into() } else { l.v.into() };
        t.push(vec![
            l.channel.as_str().into(),
            v,
            l.j.into(),
            hartree_to_cm1(l.energy).into(),
            hartree_to_cm1(l.binding_energy).into(),
        ]);
    }
    Output::new(t, &levels)
}

fn tdm(
    e: &Engine,
    channel: &str,
    jp: u32,
    j: u32,
    excited: Option<LevelSelector>,
    ground: Option<LevelSelector>,
) -> CliResult<Output> {
    let g = e.system().ground.label.clone();
    let pick = |ch: &str, jj: u32, sel: Option<LevelSelector>| -> CliResult<Vec<RovibLevel>> {
        Ok(match sel {
            Some(s) => vec![e.level(ch, jj, s)?],
            None => e.bound_levels(ch, jj)?,
        })
    };
    let ex = pick(channel, jp, excited)?;
    let gr = pick(&g, j, ground)?;
    let mut t = Table::new([
        "excited_v",
        "excited_v_from_top",
        "ground_v",
        "ground_v_from_top",
        "nu_cm1",
        "d_ea0",
        "d2_ea0",
        "fcf",
    ]);
    let mut rows = Vec::new();
    for x in &ex {
        for y in &gr {
            let m = reduced_dipole(e, x, y)?;
            t.push(vec![
                x.v.into(),
                x.v_from_top.into(),
                y.v.into(),
                y.v_from_top.into(),
                hartree_to_cm1(x.energy - y.energy).into(),
                m.reduced_dipole.into(),
                (m.reduced_dipole * m.reduced_dipole).into(),
                m.fcf.into(),
            ]);
            rows.push(m);
        }
    }
    Output::new(t, &rows)
}

fn raman(
    e: &Engine,
    initial: LevelSelector,
    final_level: LevelSelector,
    channel: Option<&str>,
    rank: bool,
    top: Option<usize>,
) -> CliResult<Output> {
    let a = ground_level(e, 0, initial)?;
    let b = ground_level(e, 0, final_level)?;
    let mut paths = rank_intermediates(e, &a, &b, channel)?;
    if !rank {
        let order: Vec<String> = e.system().excited.iter().map(|c| c.label.clone()).collect();
        let pos = |c: &str| order.iter().position(|x| x == c).unwrap_or(usize::MAX);
        paths.sort_by_key(|p| (pos(&p.intermediate.channel), p.intermediate.v));
    }
    if let Some(n) = top {
        paths.truncate(n);
    }
    let mut t = Table::new([
        "channel", "v", "v_from_top", "Jp", "d_initial_ea0", "d_final_ea0", "product_ea0_2", "pump_cm1", "stokes_cm1",
    ]);
    for p in &paths {
        let l = &p.intermediate;
        t.push(vec![
            l.channel.as_str().into(),
            l.v.into(),
            l.v_from_top.into(),
            l.j.into(),
            p.dipole_initial.into(),
            p.dipole_final.into(),
            p.product.into(),
            p.detunings.0.into(),
            p.detunings.1.into(),
        ]);
    }
    Output::new(t, &paths)
}

fn polar(
    e: &Engine,
    selectors: &[LevelSelector],
    j: u32,
    window: (f64, f64),
    step: f64,
    policy: WidthPolicy,
    pol: Polarization,
) -> CliResult<Output> {
    if selectors.is_empty() {
        return Err(CliError::Usage("--levels needs at least one selector".into()));
    }
    if !(step > 0.0) {
        return Err(CliError::Usage(format!("step must be positive, got {step}")));
    }
    let levels = selectors.iter().map(|s| ground_level(e, j, *s)).collect::<CliResult<Vec<_>>>()?;
    let mut headers = vec!["nu_cm1".to_string()];
    for s in selectors {
        headers.push(format!("re_alpha[{s}]"));
        headers.push(format!("im_alpha[{s}]"));
    }
    let mut t = Table::new(headers);
    let (lo, hi) = window;
    if !(lo < hi) {
        return Ok(Output { table: t, json: json!({ "levels": levels, "grid": [] }), extras: Vec::new() });
    }
    let responses = level_responses(e, &levels, pol, &policy)?;
    let spectra = responses.iter().map(|r| r.scan(lo, hi, step)).collect::<rovib::Result<Vec<_>>>()?;
    for (i, nu) in spectra[0].grid.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*nu).into()];
        for s in &spectra {
            let a: Complex64 = s.alpha[i];
            row.push(a.re.into());
            row.push(a.im.into());
        }
        t.push(row);
    }
    let registry: Vec<_> = selectors
        .iter()
        .zip(&spectra)
        .map(|(sel, s)| json!({ "selector": sel.to_string(), "level": s.level, "resonances": s.resonances, "zero_crossings": s.zero_crossings }))
        .collect();
    let mut out = Output::new(t, &spectra)?;
    out.extras.push(("resonances".into(), serde_json::Value::Array(registry)));
    Ok(out)
}

fn linewidths(e: &Engine, channel: &str, jp: u32) -> CliResult<Output> {
    let levels = e.bound_levels(channel, jp)?;
    let reports = if jp == 1 {
        linewidth_map(e, channel)?
    } else {
        rovib::decay::decay_reports(e, &levels, &rovib::decay::DecaySettings::default())?
    };
    let mut t = Table::new([
        "v",
        "v_from_top",
        "Jp",
        "binding_cm1",
        "a_total_s",
        "linewidth_khz",
        "a_bound_s",
        "a_continuum_s",
        "bound_bound_fraction",
    ]);
    for r in &reports {
        let l = &r.level;
        t.push(vec![
            l.v.into(),
            l.v_from_top.into(),
            l.j.into(),
            hartree_to_cm1(l.binding_energy).into(),
            r.a_total.into(),
            r.linewidth_khz.into(),
            r.a_bound.into(),
            r.a_continuum.into(),
            r.bound_bound_fraction.into(),
        ]);
    }
    Output::new(t, &reports)
}

fn magic(
    e: &Engine,
    a: LevelSelector,
    b: LevelSelector,
    j: u32,
    window: (f64, f64),
    policy: WidthPolicy,
    settings: &MagicSettings,
) -> CliResult<Output> {
    let la = ground_level(e, j, a)?;
    let lb = ground_level(e, j, b)?;
    let points = find_magic_levels(e, &la, &lb, window, &policy, settings)?;
    let mut t =
        Table::new(["nu_star_cm1", "slope", "im_alpha_a", "im_alpha_b", "nearest_pole_cm1", "re_alpha", "residual"]);
    for p in &points {
        t.push(vec![
            p.nu_star.into(),
            p.slope.into(),
            p.im_alpha.0.into(),
            p.im_alpha.1.into(),
            p.nearest_pole.into(),
            p.re_alpha.into(),
            p.residual.into(),
        ]);
    }
    Output::new(t, &points)
}

fn sensitivity(
    e: &Engine,
    channel: Option<&str>,
    j: u32,
    pair: Option<&[LevelSelector]>,
    rel_step: f64,
) -> CliResult<Output> {
    let ground = e.system().ground.label.clone();
    let channel = channel.unwrap_or(&ground);
    let reports = channel_sensitivities(e, channel, j, rel_step)?;
    if let Some(pair) = pair {
        let [sa, sb] = pair else {
            return Err(CliError::Usage(format!("--pair needs exactly two selectors, got {}", pair.len())));
        };
        let levels = e.bound_levels(channel, j)?;
        let find = |s: &LevelSelector| {
            s.pick(&levels)
                .and_then(|l| reports.get(l.v as usize))
                .ok_or_else(|| CliError::Core(rovib::Error::NoSuchLevel(format!("{channel} {s}"))))
        };
        let i = interval_from_reports(find(sa)?, find(sb)?)?;
        let mut t = Table::new(["v_a", "v_b", "nu_cm1", "dnu_dlnmu_cm1", "kappa"]);
        t.push(vec![i.a.level.v.into(), i.b.level.v.into(), i.nu.into(), i.dnu_dlnmu.into(), i.kappa.into()]);
        return Output::new(t, &i);
    }
    let mut t = Table::new(["v", "v_from_top", "J", "binding_cm1", "dE_dlnmu_cm1", "one_sided"]);
    for r in &reports {
        let l = &r.level;
        t.push(vec![
            l.v.into(),
            l.v_from_top.into(),
            l.j.into(),
            hartree_to_cm1(l.binding_energy).into(),
            r.de_dlnmu.into(),
            r.one_sided.into(),
        ]);
    }
    let selection = select_from_reports(&reports).ok();
    Output::new(t, json!({ "levels": reports, "selection": selection }))
}

fn budget(linewidth_hz: f64, snr: f64, nu_hz: f64) -> CliResult<Output> {
    let b = precision_budget(linewidth_hz, snr, nu_hz)?;
    let mut t = Table::new(["linewidth_hz", "snr", "nu_hz", "instability_1s"]);
    t.push(vec![b.probe_linewidth.into(), b.snr.into(), b.transition_nu.into(), b.fractional_instability_at_1s.into()]);
    Output::new(t, &b)
}
