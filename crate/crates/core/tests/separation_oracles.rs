//! Product spectra and the cylinder against direct enumeration.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use specdegen::halfline::{solve_below, HalfLineProblem};
use specdegen::profile::WeightProfile;
use specdegen::separation::*;
use specdegen::Boundary;

/// (level/π², multiplicity) for the `n` smallest levels at t² = p/q, by two
/// plain loops grouped exactly on the integer k²p + ℓ²q.
fn two_loop_levels(p: u64, q: u64, n: usize) -> Vec<(f64, usize)> {
    let bound = (n as u64 + 1).pow(2) * p;
    let mut counts = BTreeMap::<u64, usize>::new();
    for k in 1u64.. {
        if k * k * p > bound {
            break;
        }
        for ell in 0u64.. {
            let key = k * k * p + ell * ell * q;
            if key > bound {
                break;
            }
            *counts.entry(key).or_insert(0) += if ell == 0 { 1 } else { 2 };
        }
    }
    counts
        .into_iter()
        .take(n)
        .map(|(key, m)| (key as f64 / p as f64, m))
        .collect()
}

fn check_cylinder(t: f64, p: u64, q: u64, n: usize) {
    let s = cylinder_spectrum(t, n).unwrap();
    let oracle = two_loop_levels(p, q, n);
    assert_eq!(s.levels.len(), oracle.len());
    for (l, (v, m)) in s.levels.iter().zip(&oracle) {
        assert_eq!(l.multiplicity, *m, "t = {t}, level {v}");
        assert!(
            (l.value / (PI * PI) - v).abs() <= 1e-12 * v,
            "{} vs {v}",
            l.value / (PI * PI)
        );
    }
}

#[test]
fn cylinder_matches_two_loop_enumeration() {
    check_cylinder(1.0, 1, 1, 20);
    check_cylinder(0.5, 1, 4, 30);
    check_cylinder(2.0, 4, 1, 25);
    check_cylinder(1.5, 9, 4, 25);
}

#[test]
fn unit_cylinder_multiplicities_are_found_by_the_scan() {
    let s = cylinder_spectrum(1.0, 20).unwrap();
    let scan = simplicity_scan(&[(1.0, s.to_labeled())], 1e-8);
    let shared: usize = s
        .levels
        .iter()
        .map(|l| l.modes.len() * (l.modes.len() - 1) / 2)
        .sum();
    assert_eq!(scan.rows[0].suspects.len(), shared);
    assert!(shared > 0);
}

#[test]
fn enumerated_threshold_is_inverse_square_root() {
    for row in threshold_table(10) {
        if row.n == 1 {
            assert!(row.enumerated.is_none());
            continue;
        }
        let got = row.enumerated.unwrap();
        let expect = row.inverse_sqrt.unwrap();
        assert!(
            (got - expect).abs() <= 1e-12 * expect,
            "n = {}: {got} vs {expect}",
            row.n
        );
        assert!(first_n_simple(0.999 * got, row.n));
        assert!(!first_n_simple(1.001 * got, row.n));
    }
}

#[test]
fn thin_cylinder_start_is_pi_squared_k_squared() {
    let s = cylinder_spectrum(1e-3, 8).unwrap();
    for (k, l) in s.levels.iter().enumerate() {
        assert_eq!(l.modes, vec![(k + 1, 0)]);
    }
}

fn interval_modes(lambda_max: f64) -> TransverseSpectrum {
    TransverseSpectrum::dirichlet_interval(1.0, lambda_max).unwrap()
}

#[test]
fn below_first_threshold_is_empty() {
    let b = interval_modes(9.0);
    let s = product_spectrum(0.2, &WeightProfile::exp2(), &b, 9.0, Boundary::Dirichlet).unwrap();
    assert!(s.entries.is_empty());
}

#[test]
fn product_is_union_of_half_line_spectra() {
    let lambda_max = 60.0;
    let t = 0.2;
    let profile = WeightProfile::exp2();
    let b = interval_modes(lambda_max);
    let s = product_spectrum(t, &profile, &b, lambda_max, Boundary::Dirichlet).unwrap();
    let mut total = 0;
    for (i, &mu) in b.eigenvalues().iter().enumerate() {
        let ell = i + 1;
        let branch: Vec<f64> = s.branch(ell).iter().map(|e| e.lambda).collect();
        if profile.threshold(mu) > lambda_max {
            assert!(branch.is_empty());
            continue;
        }
        let direct = solve_below(
            &HalfLineProblem::new(t, mu, profile.clone(), Boundary::Dirichlet).unwrap(),
            lambda_max,
        )
        .unwrap();
        assert_eq!(branch, direct.eigenvalues, "ℓ = {ell}");
        assert!(branch.iter().all(|l| *l >= mu));
        total += branch.len();
    }
    assert_eq!(total, s.entries.len());
    assert!(s.entries.windows(2).all(|w| w[0].lambda <= w[1].lambda));
    assert!(s.branch(1).len() >= 2 && !s.branch(2).is_empty());
}

#[test]
fn labelled_values_decrease_with_t() {
    let lambda_max = 50.0;
    let profile = WeightProfile::exp2();
    let b = interval_modes(lambda_max);
    let spectra: Vec<(f64, LabeledSpectrum)> = [0.3, 0.15]
        .iter()
        .map(|&t| {
            (
                t,
                product_spectrum(t, &profile, &b, lambda_max, Boundary::Dirichlet).unwrap(),
            )
        })
        .collect();
    let (big, small) = (&spectra[0].1, &spectra[1].1);
    for e in &big.entries {
        let v = small
            .get(e.ell, e.k)
            .expect("branch survives as t decreases");
        assert!(v < e.lambda);
    }
}

#[test]
fn near_threshold_cluster_belongs_to_first_mode() {
    let profile = WeightProfile::exp2();
    let b = interval_modes(60.0);
    let s = product_spectrum(0.01, &profile, &b, PI * PI + 1.0, Boundary::Dirichlet).unwrap();
    assert!(!s.entries.is_empty());
    assert!(s.entries.iter().all(|e| e.ell == 1));
}

#[test]
fn generic_t_spectrum_is_simple() {
    let profile = WeightProfile::exp2();
    let b = interval_modes(80.0);
    let spectra: Vec<(f64, LabeledSpectrum)> = [0.17, 0.23]
        .iter()
        .map(|&t| {
            (
                t,
                product_spectrum(t, &profile, &b, 80.0, Boundary::Dirichlet).unwrap(),
            )
        })
        .collect();
    let r = simplicity_scan(&spectra, 1e-8);
    for row in &r.rows {
        assert!(row.suspects.is_empty(), "{row:?}");
        assert!(row.min_gap > 1e-8 * 80.0);
    }
}
