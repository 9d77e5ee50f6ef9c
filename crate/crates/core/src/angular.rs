//! Wigner 3j symbols and the angular factor of a parallel/perpendicular
//! electric-dipole transition in a diatomic.

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

fn ln_factorial(n: i64) -> f64 {
    debug_assert!(n >= 0);
    // Exact table for small n keeps low-j symbols at full precision.
    const TABLE: usize = 171;
    static CACHE: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        let mut t = vec![0.0; TABLE];
        for i in 1..TABLE {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    if (n as usize) < TABLE {
        cache[n as usize]
    } else {
        // Stirling series; only reached for j > 40 or so.
        let x = (n + 1) as f64;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
    }
}

/// Twice the argument, rejecting values that are not integers or half-integers.
fn doubled(x: f64, what: &str) -> Result<i64> {
    let d = 2.0 * x;
    if !x.is_finite() || (d - d.round()).abs() > 1e-9 {
        return Err(Error::InvalidQuantumNumbers(format!("{what} = {x} is not a multiple of 1/2")));
    }
    Ok(d.round() as i64)
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) by the Racah formula.
pub fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> Result<f64> {
    let (tj1, tj2, tj3) = (doubled(j1, "j1")?, doubled(j2, "j2")?, doubled(j3, "j3")?);
    let (tm1, tm2, tm3) = (doubled(m1, "m1")?, doubled(m2, "m2")?, doubled(m3, "m3")?);
    for (tj, tm, name) in [(tj1, tm1, "1"), (tj2, tm2, "2"), (tj3, tm3, "3")] {
        if tj < 0 {
            return Err(Error::InvalidQuantumNumbers(format!("j{name} is negative")));
        }
        if tm.abs() > tj || (tj - tm) % 2 != 0 {
            return Err(Error::InvalidQuantumNumbers(format!("m{name} incompatible with j{name}")));
        }
    }
    Ok(wigner3j_doubled(tj1, tj2, tj3, tm1, tm2, tm3))
}

/// 3j symbol with every argument doubled; assumes each (j, m) pair is valid.
fn wigner3j_doubled(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() || (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    // Integer combinations (all arguments halved back).
    let a = (tj1 + tj2 - tj3) / 2;
    let b = (tj1 - tj2 + tj3) / 2;
    let c = (-tj1 + tj2 + tj3) / 2;
    let big = (tj1 + tj2 + tj3) / 2 + 1;
    let jm = |tj: i64, tm: i64| ((tj + tm) / 2, (tj - tm) / 2);
    let (p1, n1) = jm(tj1, tm1);
    let (p2, n2) = jm(tj2, tm2);
    let (p3, n3) = jm(tj3, tm3);
    let ln_delta = 0.5 * (ln_factorial(a) + ln_factorial(b) + ln_factorial(c) - ln_factorial(big));
    let ln_pref = 0.5
        * (ln_factorial(p1) + ln_factorial(n1) + ln_factorial(p2) + ln_factorial(n2) + ln_factorial(p3)
            + ln_factorial(n3));
    // Summation bounds.
    let t1 = (tj2 - tj3 - tm1) / 2; // j2 - j3 - m1
    let t2 = (tj1 - tj3 + tm2) / 2; // j1 - j3 + m2
    let kmin = 0.max(t1).max(t2);
    let kmax = a.min(n1).min(p2);
    let terms = (kmin..=kmax).map(|k| {
        let ln = ln_factorial(k)
            + ln_factorial(a - k)
            + ln_factorial(n1 - k)
            + ln_factorial(p2 - k)
            + ln_factorial(k - t1)
            + ln_factorial(k - t2);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * (ln_delta + ln_pref - ln).exp()
    });
    let sum = compensated_sum(terms);
    // Overall phase (-1)^(j1 - j2 - m3).
    let phase = (tj1 - tj2 - tm3) / 2;
    if phase.rem_euclid(2) == 0 {
        sum
    } else {
        -sum
    }
}

fn w3j_int(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    wigner3j_doubled(2 * j1, 2 * j2, 2 * j3, 2 * m1, 2 * m2, 2 * m3)
}

/// √((2J'+1)(2J+1)) (-1)^(ε-Ω'+M) (1 J J'; -ε -M M') (1 J J'; -Ω' 0 Ω').
///
/// `j, m` label the ground level, `jp, mp` the excited level, `omega_p` its
/// Ω projection and `eps` the spherical polarization component.
pub fn angular_factor(j: u32, m: i32, jp: u32, mp: i32, omega_p: u32, eps: i32) -> Result<f64> {
    if m.unsigned_abs() > j || mp.unsigned_abs() > jp {
        return Err(Error::InvalidQuantumNumbers(format!("|M| exceeds J in (J={j}, M={m}; J'={jp}, M'={mp})")));
    }
    if eps.abs() > 1 {
        return Err(Error::InvalidQuantumNumbers(format!("polarization component {eps}")));
    }
    if omega_p > jp {
        return Err(Error::InvalidQuantumNumbers(format!("Ω'={omega_p} exceeds J'={jp}")));
    }
    Ok(angular_factor_unchecked(j as i64, m as i64, jp as i64, mp as i64, omega_p as i64, eps as i64))
}

fn angular_factor_unchecked(j: i64, m: i64, jp: i64, mp: i64, omega_p: i64, eps: i64) -> f64 {
    let a = w3j_int(1, j, jp, -eps, -m, mp);
    if a == 0.0 {
        return 0.0;
    }
    let b = w3j_int(1, j, jp, -omega_p, 0, omega_p);
    let phase = if (eps - omega_p + m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (((2 * jp + 1) * (2 * j + 1)) as f64).sqrt() * phase * a * b
}

/// Ground rotational levels reachable from (J', Ω') by one photon.
pub fn allowed_ground_j(jp: u32, omega_p: u32) -> Vec<u32> {
    let mut out = Vec::new();
    for j in jp.saturating_sub(1)..=jp + 1 {
        if (0..=1).any(|eps: i32| {
            (-(jp as i32)..=jp as i32).any(|mp| {
                let m = mp - eps;
                m.unsigned_abs() <= j
                    && angular_factor_unchecked(j as i64, m as i64, jp as i64, mp as i64, omega_p as i64, eps as i64)
                        != 0.0
            })
        }) {
            out.push(j);
        }
    }
    out
}

/// Σ over J ∈ {J'-1, J', J'+1}, M and ε of the squared angular factor.
pub fn line_strength_sum(jp: u32, mp: i32, omega_p: u32) -> f64 {
    compensated_sum((jp.saturating_sub(1)..=jp + 1).map(|j| partial_line_strength(j, jp, mp, omega_p)))
}

/// Contribution of one ground J to [`line_strength_sum`].
pub fn partial_line_strength(j: u32, jp: u32, mp: i32, omega_p: u32) -> f64 {
    let mut terms = Vec::new();
    for eps in -1..=1i64 {
        let m = mp as i64 - eps;
        if m.unsigned_abs() as u32 > j {
            continue;
        }
        let f = angular_factor_unchecked(j as i64, m, jp as i64, mp as i64, omega_p as i64, eps);
        terms.push(f * f);
    }
    compensated_sum(terms)
}

/// Σ over M' of the squared angular factor for fixed (J, M, ε): the weight of
/// the excited rotational level J' in the polarizability of ground level (J, M).
pub fn absorption_weight(j: u32, m: i32, jp: u32, omega_p: u32, eps: i32) -> f64 {
    let mp = m as i64 + eps as i64;
    if mp.unsigned_abs() as u32 > jp || omega_p > jp {
        return 0.0;
    }
    let f = angular_factor_unchecked(j as i64, m as i64, jp as i64, mp, omega_p as i64, eps as i64);
    f * f
}
