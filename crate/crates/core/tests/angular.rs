use approx::assert_relative_eq;
use proptest::prelude::*;
use rayon::prelude::*;
use rovib::angular::{
    absorption_weight, allowed_ground_j, angular_factor, line_strength_sum, partial_line_strength, wigner3j,
};

fn half(x: i64) -> f64 {
    x as f64 / 2.0
}

/// All doubled m values of a doubled j.
fn ms(tj: i64) -> impl Iterator<Item = i64> {
    (-tj..=tj).step_by(2)
}

/// Worst deviation of Σ_{m1,m2} (2j3+1)(j1 j2 j3; m1 m2 m3)(j1 j2 j3'; m1 m2 m3) from δ_{j3 j3'}.
fn orthogonality_error(tj1: i64, tj2: i64) -> f64 {
    let mut worst = 0.0f64;
    let j3s: Vec<i64> = ((tj1 - tj2).abs()..=tj1 + tj2).step_by(2).collect();
    for tm3 in -(tj1 + tj2)..=(tj1 + tj2) {
        if (tj1 + tj2 - tm3) % 2 != 0 {
            continue;
        }
        let cols: Vec<(i64, Vec<f64>)> = j3s
            .iter()
            .filter(|&&tj3| tm3.abs() <= tj3)
            .map(|&tj3| {
                let v = ms(tj1)
                    .map(|tm1| {
                        let tm2 = -tm3 - tm1;
                        if tm2.abs() > tj2 {
                            0.0
                        } else {
                            wigner3j(half(tj1), half(tj2), half(tj3), half(tm1), half(tm2), half(tm3)).unwrap()
                        }
                    })
                    .collect();
                (tj3, v)
            })
            .collect();
        for (ta, a) in &cols {
            for (tb, b) in &cols {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * (*ta as f64 + 1.0);
                let want = if ta == tb { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
    }
    worst
}

/// Worst deviation of Σ_{j3,m3} (2j3+1)(j1 j2 j3; m1 m2 m3)(j1 j2 j3; m1' m2' m3) from δδ.
fn completeness_error(tj1: i64, tj2: i64) -> f64 {
    let mut worst = 0.0f64;
    let j3s: Vec<i64> = ((tj1 - tj2).abs()..=tj1 + tj2).step_by(2).collect();
    for tm in -(tj1 + tj2)..=(tj1 + tj2) {
        if (tj1 + tj2 - tm) % 2 != 0 {
            continue;
        }
        // Pairs (m1, m2) with m1 + m2 = tm/2.
        let pairs: Vec<(i64, i64)> = ms(tj1).map(|a| (a, tm - a)).filter(|(_, b)| b.abs() <= tj2).collect();
        let rows: Vec<Vec<f64>> = pairs
            .iter()
            .map(|&(a, b)| {
                j3s.iter()
                    .map(|&tj3| {
                        if tm.abs() > tj3 {
                            0.0
                        } else {
                            wigner3j(half(tj1), half(tj2), half(tj3), half(a), half(b), half(-tm)).unwrap()
                                * (tj3 as f64 + 1.0).sqrt()
                        }
                    })
                    .collect()
            })
            .collect();
        for (i, r) in rows.iter().enumerate() {
            for (k, s) in rows.iter().enumerate() {
                let dot: f64 = r.iter().zip(s).map(|(x, y)| x * y).sum();
                let want = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
    }
    worst
}

fn all_pairs() -> Vec<(i64, i64)> {
    (0..=20).flat_map(|a| (0..=20).map(move |b| (a, b))).collect()
}

#[test]
fn orthogonality_to_j_10() {
    let worst = all_pairs().par_iter().map(|&(a, b)| orthogonality_error(a, b)).reduce(|| 0.0, f64::max);
    assert!(worst < 1e-12, "worst deviation {worst:e}");
}

#[test]
fn completeness_to_j_10() {
    let worst = all_pairs().par_iter().map(|&(a, b)| completeness_error(a, b)).reduce(|| 0.0, f64::max);
    assert!(worst < 1e-12, "worst deviation {worst:e}");
}

#[test]
fn coupling_to_zero() {
    for tj in 0..=20i64 {
        for tm in ms(tj) {
            let w = wigner3j(half(tj), half(tj), 0.0, half(tm), half(-tm), 0.0).unwrap();
            let sign = if ((tj - tm) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(w, sign / (tj as f64 + 1.0).sqrt(), max_relative = 1e-13);
        }
    }
}

#[test]
fn line_strength_sums_to_one() {
    for jp in 1..=10u32 {
        for omega in 0..=1u32 {
            for mp in -(jp as i32)..=jp as i32 {
                assert_relative_eq!(line_strength_sum(jp, mp, omega), 1.0, max_relative = 1e-12);
            }
        }
    }
}

#[test]
fn parallel_band_skips_q_branch() {
    assert_eq!(allowed_ground_j(1, 0), vec![0, 2]);
    for m in -1i32..=1 {
        for eps in -1..=1 {
            let mp = m + eps;
            if mp.abs() <= 1 {
                assert_eq!(angular_factor(1, m, 1, mp, 0, eps).unwrap(), 0.0);
            }
        }
    }
    assert_eq!(partial_line_strength(1, 1, 0, 0), 0.0);
    assert!(partial_line_strength(1, 1, 0, 1) > 0.0);
    assert_eq!(allowed_ground_j(1, 1), vec![0, 1, 2]);
}

#[test]
fn j0_absorption_weight_is_polarization_independent() {
    for omega in 0..=1u32 {
        let w: Vec<f64> = (-1..=1).map(|eps| absorption_weight(0, 0, 1, omega, eps)).collect();
        for x in &w {
            assert_relative_eq!(*x, 1.0 / 3.0, max_relative = 1e-14);
        }
    }
}

#[test]
fn invalid_arguments_are_rejected() {
    assert!(wigner3j(1.0, 1.0, 1.0, 1.5, -1.5, 0.0).is_err());
    assert!(wigner3j(-1.0, 1.0, 1.0, 0.0, 0.0, 0.0).is_err());
    assert!(angular_factor(1, 0, 1, 0, 2, 0).is_err());
    assert!(angular_factor(1, 0, 1, 0, 0, 2).is_err());
}

fn arb_3j() -> impl Strategy<Value = (i64, i64, i64, i64, i64)> {
    (0i64..=12, 0i64..=12)
        .prop_flat_map(|(a, b)| {
            let j3 = ((a - b).abs()..=a + b).prop_filter("parity", move |c| (a + b + c) % 2 == 0);
            (Just(a), Just(b), j3)
        })
        .prop_flat_map(|(a, b, c)| {
            let m1 = (0..=a).prop_map(move |k| -a + 2 * k);
            let m2 = (0..=b).prop_map(move |k| -b + 2 * k);
            (Just(a), Just(b), Just(c), m1, m2)
        })
}

proptest! {
    #[test]
    fn symmetries((a, b, c, m1, m2) in arb_3j()) {
        let m3 = -m1 - m2;
        prop_assume!(m3.abs() <= c);
        let w = wigner3j(half(a), half(b), half(c), half(m1), half(m2), half(m3)).unwrap();
        let parity = if ((a + b + c) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let cyclic = wigner3j(half(b), half(c), half(a), half(m2), half(m3), half(m1)).unwrap();
        let swapped = wigner3j(half(b), half(a), half(c), half(m2), half(m1), half(m3)).unwrap();
        let flipped = wigner3j(half(a), half(b), half(c), half(-m1), half(-m2), half(-m3)).unwrap();
        prop_assert!((cyclic - w).abs() < 1e-13);
        prop_assert!((swapped - parity * w).abs() < 1e-13);
        prop_assert!((flipped - parity * w).abs() < 1e-13);
        prop_assert!(w.abs() <= 1.0);
    }
}
